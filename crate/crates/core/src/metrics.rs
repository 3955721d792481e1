//! Gramians, H2 norms, Hankel singular values, the RE criterion and
//! frequency-response sampling.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::sysrep::{StateSpace, TransferFunction};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 100_000;

/// Which power of the Hankel singular values enters the RE ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HankelPower {
    Two,
    #[default]
    Four,
}

impl HankelPower {
    pub fn exponent(self) -> i32 {
        match self {
            HankelPower::Two => 2,
            HankelPower::Four => 4,
        }
    }

    pub fn from_exponent(p: u32) -> Option<Self> {
        match p {
            2 => Some(HankelPower::Two),
            4 => Some(HankelPower::Four),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gramians {
    /// Controllability Gramian, `AP + PAᵀ + BBᵀ = 0`.
    pub p: DMatrix<f64>,
    /// Observability Gramian, `AᵀQ + QA + CᵀC = 0`.
    pub q: DMatrix<f64>,
    /// Frobenius residuals of the two Lyapunov equations.
    pub residuals: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelSpectrum {
    /// Descending.
    pub sigmas: Vec<f64>,
}

impl HankelSpectrum {
    pub fn power_sum(&self, power: HankelPower) -> f64 {
        self.sigmas.iter().map(|s| s.powi(power.exponent())).sum()
    }
}

fn require_stable(a: &DMatrix<f64>) -> Result<()> {
    if linalg::eigvals_real(a).iter().all(|z| z.re < 0.0) {
        Ok(())
    } else {
        Err(Error::UnstableSystem)
    }
}

/// Solves `AX + XAᵀ + W = 0` for stable `A` by back-substitution on the
/// complex Schur form.
pub fn lyapunov_solve(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || w.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Lyapunov operands must be square and of equal size".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    require_stable(a)?;
    let (u, t) = linalg::complexify(a)
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Linalg("Schur decomposition did not converge".into()))?
        .unpack();
    let wt = u.adjoint() * linalg::complexify(w) * &u;
    // T Y + Y Tᴴ + W̃ = 0, column by column from the right
    let mut y = CMat::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs = -wt.column(j).into_owned();
        for k in (j + 1)..n {
            let coef = t[(j, k)].conj();
            if coef != C64::new(0.0, 0.0) {
                rhs -= y.column(k) * coef;
            }
        }
        let shift = t[(j, j)].conj();
        // upper triangular solve of (T + shift·I) y_j = rhs
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for l in (i + 1)..n {
                acc -= t[(i, l)] * y[(l, j)];
            }
            y[(i, j)] = acc / (t[(i, i)] + shift);
        }
    }
    let x = (&u * y * u.adjoint()).map(|z| z.re);
    Ok((&x + x.transpose()) * 0.5)
}

fn lyapunov_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    (a * x + x * a.transpose() + w).norm()
}

pub fn gramians(sys: &StateSpace) -> Result<Gramians> {
    let a = sys.a();
    let bbt = sys.b() * sys.b().transpose();
    let ctc = sys.c().transpose() * sys.c();
    let p = lyapunov_solve(a, &bbt)?;
    let at = a.transpose();
    let q = lyapunov_solve(&at, &ctc)?;
    let residuals = (lyapunov_residual(a, &p, &bbt), lyapunov_residual(&at, &q, &ctc));
    Ok(Gramians { p, q, residuals })
}

/// `tr(CPCᵀ)` and `tr(BᵀQB)`.
pub fn gramian_traces(sys: &StateSpace, g: &Gramians) -> (f64, f64) {
    let tc = (sys.c() * &g.p * sys.c().transpose()).trace();
    let to = (sys.b().transpose() * &g.q * sys.b()).trace();
    (tc, to)
}

pub fn h2_norm(sys: &StateSpace) -> Result<f64> {
    if sys.d().amax() != 0.0 {
        return Err(Error::NonzeroFeedthrough);
    }
    if sys.order() == 0 {
        return Ok(0.0);
    }
    let g = gramians(sys)?;
    let (tc, to) = gramian_traces(sys, &g);
    let scale = tc.abs().max(to.abs());
    if (tc - to).abs() > 1e-8 * scale {
        log::warn!("gramian traces disagree: tr(CPCᵀ)={tc:e}, tr(BᵀQB)={to:e}");
    }
    Ok(tc.max(0.0).sqrt())
}

/// The difference system `G − Ĝ` realized on the stacked state.
pub fn difference_system(g: &StateSpace, g_hat: &StateSpace) -> Result<StateSpace> {
    if g.inputs() != g_hat.inputs() || g.outputs() != g_hat.outputs() {
        return Err(Error::DimensionMismatch("systems have different input/output counts".into()));
    }
    let a = linalg::block_diag(&[g.a(), g_hat.a()]);
    let (n1, n2) = (g.order(), g_hat.order());
    let mut b = DMatrix::zeros(n1 + n2, g.inputs());
    b.view_mut((0, 0), (n1, g.inputs())).copy_from(g.b());
    b.view_mut((n1, 0), (n2, g.inputs())).copy_from(g_hat.b());
    let mut c = DMatrix::zeros(g.outputs(), n1 + n2);
    c.view_mut((0, 0), (g.outputs(), n1)).copy_from(g.c());
    c.view_mut((0, n1), (g.outputs(), n2)).copy_from(&(-g_hat.c()));
    StateSpace::new(a, b, c, g.d() - g_hat.d())
}

/// `‖G − Ĝ‖_H2`.
pub fn h2_error(g: &StateSpace, g_hat: &StateSpace) -> Result<f64> {
    let diff = difference_system(g, g_hat)?;
    let scale = g.d().amax().max(g_hat.d().amax()).max(1.0);
    if diff.d().amax() > 1e-12 * scale {
        return Err(Error::FeedthroughMismatch);
    }
    require_stable(g.a())?;
    require_stable(g_hat.a())?;
    h2_norm(&diff.with_feedthrough(DMatrix::zeros(g.outputs(), g.inputs()))?)
}

fn psd_sqrt(p: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = p.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// `σ_j = sqrt(eig_j(PQ))`, computed as the eigenvalues of the symmetric
/// `P^{1/2} Q P^{1/2}`.
pub fn hankel_singular_values(sys: &StateSpace) -> Result<HankelSpectrum> {
    if sys.order() == 0 {
        return Ok(HankelSpectrum { sigmas: Vec::new() });
    }
    let g = gramians(sys)?;
    let ph = psd_sqrt(&g.p);
    let m = &ph * &g.q * &ph;
    let m = (&m + m.transpose()) * 0.5;
    let mut sigmas: Vec<f64> = m.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    Ok(HankelSpectrum { sigmas })
}

/// `(Σ σ̄ᵢ^p)^{1/2} / (Σ σⱼ^p)^{1/2}` over the Hankel spectra of the
/// neglected part and of the full system.
pub fn relative_error_re(full: &StateSpace, neglected: &StateSpace, power: HankelPower) -> Result<f64> {
    let num = hankel_singular_values(neglected)?.power_sum(power);
    let den = hankel_singular_values(full)?.power_sum(power);
    if num == 0.0 {
        return Ok(0.0);
    }
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((num / den).sqrt())
}

/// `count` log-spaced points over `[wmin, wmax]`.
pub fn log_grid(wmin: f64, wmax: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![wmin],
        _ => {
            let (a, b) = (wmin.log10(), wmax.log10());
            (0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect()
        }
    }
}

/// Frequency grid used when Gramian metrics are unavailable.
pub fn fallback_grid() -> Vec<f64> {
    log_grid(1e-2, 1e3, 200)
}

/// Largest `‖G₁(iω) − G₂(iω)‖_F / ‖G₁(iω)‖_F` over the grid.
pub fn max_frequency_deviation(g1: &dyn TransferFunction, g2: &dyn TransferFunction, grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &w in grid {
        let s = C64::new(0.0, w);
        let a = g1.transfer_eval(s)?;
        let b = g2.transfer_eval(s)?;
        worst = worst.max((&a - b).norm() / a.norm().max(1e-300));
    }
    Ok(worst)
}

/// One frequency sample: `p×m` magnitudes (dB) and phases (degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct BodeRow {
    pub omega: f64,
    pub mag_db: DMatrix<f64>,
    pub phase_deg: DMatrix<f64>,
}

/// Samples `G(iω)` along an ascending positive grid. Points that hit a pole
/// come back as `None`; phases are unwrapped entrywise across the samples
/// that succeed.
pub fn bode_rows(sys: &dyn TransferFunction, grid: &[f64]) -> Result<Vec<Option<BodeRow>>> {
    if grid.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput("frequency grid must be strictly positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("frequency grid must be ascending".into()));
    }
    let (p, m) = (sys.outputs(), sys.inputs());
    let mut prev: Option<DMatrix<f64>> = None;
    let mut out = Vec::with_capacity(grid.len());
    for &w in grid {
        let g = match sys.transfer_eval(C64::new(0.0, w)) {
            Ok(g) => g,
            Err(Error::ProbeAtPole(_)) => {
                out.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mag_db = g.map(|z| 20.0 * z.norm().log10());
        let mut phase = g.map(|z| z.arg().to_degrees());
        if let Some(last) = &prev {
            for i in 0..p {
                for j in 0..m {
                    let turns = ((last[(i, j)] - phase[(i, j)]) / 360.0).round();
                    phase[(i, j)] += 360.0 * turns;
                }
            }
        }
        prev = Some(phase.clone());
        out.push(Some(BodeRow { omega: w, mag_db, phase_deg: phase }));
    }
    Ok(out)
}

/// Strict variant of [`bode_rows`]: any sample at a pole is an error.
pub fn bode_samples(sys: &dyn TransferFunction, grid: &[f64]) -> Result<Vec<BodeRow>> {
    bode_rows(sys, grid)?
        .into_iter()
        .zip(grid)
        .map(|(row, &w)| row.ok_or(Error::ProbeAtPole(C64::new(0.0, w))))
        .collect()
}
