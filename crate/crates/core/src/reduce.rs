//! The two reduction pipelines.
//!
//! *Latent*: repeatedly pick the `m` latent roots farthest left, build a real
//! right solvent from them and divide it out of the denominator.
//!
//! *Dominant*: decouple the system into solvent blocks, find the dominant
//! poles and drop every block that carries none of them.

use nalgebra::DMatrix;

use crate::dompoles::{self, DominantPole, DominantPoleOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::matpoly::{MatrixPolynomial, Side};
use crate::metrics::{self, HankelPower};
use crate::solvents::{self, CompleteSolventSet, Solvent, SolventOptions};
use crate::sysrep::{self, BlockDiagonalRealization, RightMfd, StateSpace, Subsystem};

/// Every tolerance the pipelines use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Upper bound on the error metric for an elimination to stand. Zero
    /// forbids every elimination.
    pub re_threshold: f64,
    /// Optional upper bound on the H2 error.
    pub h2_threshold: Option<f64>,
    /// Relative distance `|p − λ|/max(1, |λ|)` at which a dominant pole
    /// claims a solvent eigenvalue.
    pub match_tol: f64,
    pub tau_null: f64,
    pub eps_sing: f64,
    pub tau_conv: f64,
    pub hankel_power: HankelPower,
    /// After the matched drop, keep trying to remove whole blocks and then
    /// single modes while the error stays under the threshold.
    pub refine: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            re_threshold: 0.01,
            h2_threshold: None,
            match_tol: 0.1,
            tau_null: crate::matpoly::DEFAULT_TAU_NULL,
            eps_sing: sysrep::DEFAULT_EPS_SING,
            tau_conv: 1e-8,
            hankel_power: HankelPower::Four,
            refine: false,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.re_threshold >= 0.0) || !self.re_threshold.is_finite() {
            return Err(Error::InvalidInput(format!("re_threshold must be finite and non-negative, got {}", self.re_threshold)));
        }
        if let Some(h) = self.h2_threshold {
            if !(h > 0.0) {
                return Err(Error::InvalidInput(format!("h2_threshold must be positive, got {h}")));
            }
        }
        for (name, v) in [("match_tol", self.match_tol), ("tau_null", self.tau_null), ("eps_sing", self.eps_sing), ("tau_conv", self.tau_conv)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn solvent_options(&self) -> SolventOptions {
        SolventOptions { eps_sing: self.eps_sing, tau_null: self.tau_null, ..SolventOptions::default() }
    }

    fn pole_options(&self) -> DominantPoleOptions {
        DominantPoleOptions { tau_conv: self.tau_conv, ..DominantPoleOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Latent,
    Dominant,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Latent => "latent",
            Method::Dominant => "dominant",
        }
    }
}

/// Which quantity was compared against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    /// Hankel-spectrum ratio of the neglected part to the whole.
    HankelRatio,
    /// Largest relative frequency-response deviation on `[1e-2, 1e3]` rad/s,
    /// used when a system is unstable.
    FrequencyDeviation,
}

/// One removed piece: a solvent, a block or a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminatedPart {
    pub label: String,
    pub eigenvalues: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub method: Method,
    pub original_order: usize,
    pub reduced_order: usize,
    pub eliminated: Vec<EliminatedPart>,
    /// Root-sum-square of the Frobenius norms of the numerator remainders
    /// dropped by the latent method.
    pub neglected_numerator_norm: f64,
    pub metric: ErrorMetric,
    /// Error of the returned model (Hankel ratio, or the frequency deviation
    /// when `metric` says so).
    pub re_value: f64,
    /// `‖G − Ĝ‖_H2` when both models are stable.
    pub h2_error: Option<f64>,
    pub threshold: f64,
    /// Eliminations attempted, including any that were rolled back.
    pub iterations: usize,
    /// Dominant poles used for matching (dominant method only).
    pub dominant_poles: Vec<(C64, f64)>,
    /// 1-based solvent indices kept and discarded (dominant method only).
    pub kept_blocks: Vec<usize>,
    pub discarded_blocks: Vec<usize>,
    pub notes: Vec<String>,
}

impl ReductionReport {
    fn new(method: Method, n: usize, tol: &Tolerances) -> Self {
        Self {
            method,
            original_order: n,
            reduced_order: n,
            eliminated: Vec::new(),
            neglected_numerator_norm: 0.0,
            metric: ErrorMetric::HankelRatio,
            re_value: 0.0,
            h2_error: None,
            threshold: tol.re_threshold,
            iterations: 0,
            dominant_poles: Vec::new(),
            kept_blocks: Vec::new(),
            discarded_blocks: Vec::new(),
            notes: Vec::new(),
        }
    }
}

struct Assessment {
    metric: ErrorMetric,
    value: f64,
    h2: Option<f64>,
}

impl Assessment {
    fn acceptable(&self, tol: &Tolerances) -> bool {
        self.value <= tol.re_threshold && tol.h2_threshold.map_or(true, |t| self.h2.is_some_and(|h| h <= t))
    }
}

/// Error of `reduced` against `full`; `neglected` is the part whose Hankel
/// spectrum is compared with the whole.
fn assess(full: &StateSpace, reduced: &StateSpace, neglected: &StateSpace, power: HankelPower) -> Result<Assessment> {
    let h2 = metrics::h2_error(full, reduced).ok();
    match metrics::relative_error_re(full, neglected, power) {
        Ok(value) => Ok(Assessment { metric: ErrorMetric::HankelRatio, value, h2 }),
        Err(Error::UnstableSystem) => {
            let value = metrics::max_frequency_deviation(full, reduced, &metrics::fallback_grid())?;
            Ok(Assessment { metric: ErrorMetric::FrequencyDeviation, value, h2 })
        }
        Err(e) => Err(e),
    }
}

fn record(report: &mut ReductionReport, a: &Assessment) {
    report.metric = a.metric;
    report.re_value = a.value;
    report.h2_error = a.h2;
}

fn baseline(full: &StateSpace) -> Assessment {
    let h2 = if full.is_stable() { Some(0.0) } else { None };
    let metric = if full.is_stable() { ErrorMetric::HankelRatio } else { ErrorMetric::FrequencyDeviation };
    Assessment { metric, value: 0.0, h2 }
}

fn unstable_note(report: &mut ReductionReport, metric: ErrorMetric) {
    if metric == ErrorMetric::FrequencyDeviation && report.notes.is_empty() {
        report.notes.push("metrics unavailable: unstable; frequency-response deviation used instead".into());
    }
}

// ---------------------------------------------------------------- latent ---

/// Result of dividing one solvent out of a fraction.
#[derive(Debug, Clone)]
pub struct LatentElimination {
    pub reduced: RightMfd,
    pub solvent: Solvent,
    /// `‖ℜ‖_F` of the dropped numerator remainder, 0 when the numerator was
    /// left alone.
    pub neglected_numerator_norm: f64,
}

fn conjugate_closed(roots: &[C64]) -> bool {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut sorted = roots.to_vec();
    linalg::sort_roots(&mut sorted);
    linalg::is_conjugate_closed(&sorted, 1e-8 * scale)
}

/// One pass of the latent-root method: choose the `m` leftmost latent roots
/// that form a conjugate-closed set with independent latent vectors, build
/// `R = VΛV⁻¹`, divide `D(λ) = D_MOR(λ)(λI − R)` and, when the numerator is
/// no longer of lower degree, `N(λ) = N_MOR(λ)(λI − R) + ℜ` with `ℜ` dropped.
pub fn eliminate_one_solvent(f: &RightMfd, tol: &Tolerances) -> Result<LatentElimination> {
    let den = f.den();
    let r = den.degree();
    if r <= 1 {
        return Err(Error::AlreadyMinimal);
    }
    let m = den.block_size();
    let structure = den.latent_structure(tol.tau_null)?;
    let pairs = structure.pairs; // ascending real part
    let den_scale = den.coeff_norm().max(1.0);
    for start in 0..=(pairs.len() - m) {
        let window = &pairs[start..start + m];
        let roots: Vec<C64> = window.iter().map(|p| p.root).collect();
        if !conjugate_closed(&roots) {
            continue;
        }
        let solvent = match solvents::solvent_from_latent(window, Side::Right, tol.eps_sing) {
            Ok(s) => s,
            Err(Error::DependentVectors(k)) => {
                log::debug!("roots {roots:?}: latent vectors dependent (cond {k:.3e})");
                continue;
            }
            Err(Error::NonRealSolvent(_)) => continue,
            Err(e) => return Err(e),
        };
        let Some(x) = solvent.real_matrix().cloned() else { continue };
        let division = den.block_divide(&x, Side::Right)?;
        let rem = division.remainder.norm();
        if rem > 1e-8 * den_scale {
            log::debug!("roots {roots:?}: remainder {rem:.3e} too large");
            continue;
        }
        let d_mor = division.quotient;
        let num = f.num().trimmed();
        let (n_mor, neglected) = if num.degree() >= d_mor.degree() && num.coeffs().iter().any(|c| c.amax() != 0.0) {
            let nd = f.num().block_divide(&x, Side::Right)?;
            (nd.quotient, nd.remainder.norm())
        } else {
            (num, 0.0)
        };
        let reduced = RightMfd::new(n_mor, d_mor, f.feedthrough().clone())?;
        let residual = den.block_value(&x, Side::Right)?.norm();
        log::info!("latent elimination of {:?}, residual {residual:.3e}", solvent.eigenvalues());
        return Ok(LatentElimination { reduced, solvent: solvent.with_residual(residual), neglected_numerator_norm: neglected });
    }
    Err(Error::NoEliminableSolvent)
}

/// Latent-root reduction: eliminates solvents while the error against the
/// original stays within `tol`; the first violating step is rolled back.
pub fn reduce_latent(f: &RightMfd, tol: &Tolerances) -> Result<(RightMfd, ReductionReport)> {
    tol.validate()?;
    if f.den().degree() <= 1 {
        return Err(Error::AlreadyMinimal);
    }
    let full = sysrep::controller_canonical(f)?;
    let mut report = ReductionReport::new(Method::Latent, full.order(), tol);
    record(&mut report, &baseline(&full));
    let mut current = f.clone();
    let mut remainder_sq = 0.0;
    while current.den().degree() > 1 {
        let step = match eliminate_one_solvent(&current, tol) {
            Ok(s) => s,
            Err(Error::NoEliminableSolvent) if report.iterations > 0 => {
                report.notes.push("no further eliminable solvent".into());
                break;
            }
            Err(e) => return Err(e),
        };
        report.iterations += 1;
        let candidate = sysrep::controller_canonical(&step.reduced)?;
        let diff = metrics::difference_system(&full, &candidate)?;
        let diff = diff.with_feedthrough(DMatrix::zeros(diff.outputs(), diff.inputs()))?;
        let a = assess(&full, &candidate, &diff, tol.hankel_power)?;
        if !a.acceptable(tol) {
            log::info!("elimination of {:?} rolled back: error {:.4e} > {:.4e}", step.solvent.eigenvalues(), a.value, tol.re_threshold);
            unstable_note(&mut report, a.metric);
            break;
        }
        remainder_sq += step.neglected_numerator_norm.powi(2);
        report.eliminated.push(EliminatedPart { label: format!("solvent {}", report.eliminated.len() + 1), eigenvalues: step.solvent.eigenvalues().to_vec() });
        record(&mut report, &a);
        unstable_note(&mut report, a.metric);
        current = step.reduced;
    }
    report.neglected_numerator_norm = remainder_sq.sqrt();
    report.reduced_order = current.order();
    Ok((current, report))
}

// -------------------------------------------------------------- dominant ---

/// Splits solvent indices into those claimed by at least one pole and the rest.
pub fn match_solvents_to_poles(set: &CompleteSolventSet, poles: &[C64], match_tol: f64) -> (Vec<usize>, Vec<usize>) {
    let spectra: Vec<&[C64]> = set.solvents().iter().map(Solvent::eigenvalues).collect();
    match_spectra_to_poles(&spectra, poles, match_tol)
}

pub fn match_spectra_to_poles(spectra: &[&[C64]], poles: &[C64], match_tol: f64) -> (Vec<usize>, Vec<usize>) {
    let mut keep = Vec::new();
    let mut discard = Vec::new();
    for (i, eig) in spectra.iter().enumerate() {
        let hit = eig.iter().any(|&l| poles.iter().any(|&p| (p - l).norm() / l.norm().max(1.0) <= match_tol));
        if hit {
            keep.push(i);
        } else {
            discard.push(i);
        }
    }
    (keep, discard)
}

/// Modal truncation inside one block: deletes the listed modes (indices into
/// the block's eigenvalues sorted by real then imaginary part) and returns a
/// real realization of what is left. A block losing every mode disappears.
pub fn trim_subsystem_eigen(bd: &BlockDiagonalRealization, block: usize, drop: &[usize], eps_sing: f64) -> Result<BlockDiagonalRealization> {
    let blk = bd.blocks().get(block).ok_or_else(|| Error::InvalidInput(format!("no block {block}")))?;
    if drop.is_empty() {
        return Ok(bd.clone());
    }
    let k = blk.order();
    if drop.iter().any(|&i| i >= k) {
        return Err(Error::InvalidInput(format!("mode index out of range for a block of order {k}")));
    }
    let e = linalg::eigen(&linalg::complexify(&blk.r))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| e.values[i].re.total_cmp(&e.values[j].re).then(e.values[i].im.total_cmp(&e.values[j].im)));
    let values: Vec<C64> = order.iter().map(|&i| e.values[i]).collect();
    let v = CMat::from_fn(k, k, |r, c| e.vectors[(r, order[c])]);
    if !(linalg::cond2(&v) < 1.0 / eps_sing) {
        return Err(Error::NonDiagonalizableBlock(block));
    }
    let dropped: Vec<C64> = drop.iter().map(|&i| values[i]).collect();
    if !conjugate_closed(&dropped) {
        return Err(Error::ConjugateBreak);
    }
    let kept: Vec<usize> = (0..k).filter(|i| !drop.contains(i)).collect();
    let mut blocks: Vec<Subsystem> = bd.blocks().to_vec();
    if kept.is_empty() {
        blocks.remove(block);
        return BlockDiagonalRealization::new(blocks, bd.feedthrough().clone());
    }
    let vinv = v.clone().try_inverse().ok_or(Error::NonDiagonalizableBlock(block))?;
    // spectral projector onto the kept modes; real because the kept set is
    // conjugate-closed
    let vk = CMat::from_fn(k, kept.len(), |r, c| v[(r, kept[c])]);
    let uk = CMat::from_fn(kept.len(), k, |r, c| vinv[(kept[r], c)]);
    let proj = (&vk * &uk).map(|z| z.re);
    // real basis of the kept invariant subspace
    let mut basis: Vec<linalg::CVec> = Vec::new();
    for j in 0..kept.len() {
        let col = vk.column(j).into_owned();
        linalg::mgs_expand(&mut basis, &col.map(|z| C64::new(z.re, 0.0)), 1e-10);
        linalg::mgs_expand(&mut basis, &col.map(|z| C64::new(z.im, 0.0)), 1e-10);
    }
    if basis.len() != kept.len() {
        return Err(Error::ConjugateBreak);
    }
    let w = linalg::columns_to_matrix(k, &basis).map(|z| z.re);
    // L = W⁺P, so that L W = I and P = W L
    let l = (w.transpose() * &w).try_inverse().ok_or(Error::NonDiagonalizableBlock(block))? * w.transpose() * proj;
    blocks[block] = Subsystem { r: &l * &blk.r * &w, b: &l * &blk.b, c: &blk.c * &w };
    BlockDiagonalRealization::new(blocks, bd.feedthrough().clone())
}

/// The decoupled form of a state-space system.
#[derive(Debug, Clone)]
pub struct Decoupling {
    pub fraction: RightMfd,
    pub controller: StateSpace,
    pub solvents: CompleteSolventSet,
    pub blocks: BlockDiagonalRealization,
}

/// Block controller form, complete solvent set and block-diagonal realization.
pub fn decouple(sys: &StateSpace, tol: &Tolerances) -> Result<Decoupling> {
    let fraction = sysrep::mfd_from_state_space_with(sys, tol.eps_sing)?;
    let controller = sysrep::controller_canonical(&fraction)?;
    let solvents = solvents::compute_complete_set(fraction.den(), &tol.solvent_options())?;
    let blocks = sysrep::block_diagonalize(&controller, &solvents)?;
    Ok(Decoupling { fraction, controller, solvents, blocks })
}

fn split(bd: &BlockDiagonalRealization, keep: &[usize], discard: &[usize]) -> (StateSpace, StateSpace) {
    (sysrep::recompose(&bd.select(keep)), sysrep::recompose(&bd.select(discard).without_feedthrough()))
}

fn block_parts(set_eigs: &[Vec<C64>], indices: &[usize]) -> Vec<EliminatedPart> {
    indices.iter().map(|&i| EliminatedPart { label: format!("R{}", i + 1), eigenvalues: set_eigs[i].clone() }).collect()
}

/// Dominant-pole reduction.
///
/// With `k = None` the pole count grows in steps of `m` and the first count
/// whose matched drop meets the threshold wins; with an explicit `k` that
/// count is used as is. A drop that breaks the threshold is rolled back.
pub fn reduce_dominant(sys: &StateSpace, tol: &Tolerances, k: Option<usize>) -> Result<(StateSpace, ReductionReport)> {
    tol.validate()?;
    let n = sys.order();
    let m = sys.inputs();
    if sys.outputs() != m {
        return Err(Error::NonSquareTransfer { p: sys.outputs(), m });
    }
    if m == 0 || n % m != 0 {
        return Err(Error::IndivisibleDimensions { n, m });
    }
    if let Some(k) = k {
        if k > n {
            return Err(Error::InvalidInput(format!("k = {k} exceeds the order {n}")));
        }
    }
    let dec = decouple(sys, tol)?;
    let set_eigs: Vec<Vec<C64>> = dec.solvents.solvents().iter().map(|s| s.eigenvalues().to_vec()).collect();
    let spectra: Vec<&[C64]> = set_eigs.iter().map(Vec::as_slice).collect();
    let r = set_eigs.len();
    let mut report = ReductionReport::new(Method::Dominant, n, tol);
    record(&mut report, &baseline(sys));

    let all: Vec<usize> = (0..r).collect();
    let counts: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=r).map(|j| j * m).collect(),
    };
    let popts = tol.pole_options();
    let mut chosen: Option<(Vec<DominantPole>, Vec<usize>, Vec<usize>, Assessment)> = None;
    let mut last_rejected: Option<(Vec<DominantPole>, Vec<usize>, Vec<usize>, Assessment)> = None;
    let mut tried: Vec<Vec<usize>> = Vec::new();
    for &count in &counts {
        let poles = dompoles::dominant_poles_with(sys, count, None, &popts)?;
        let lambdas: Vec<C64> = poles.iter().map(|p| p.lambda).collect();
        let (keep, discard) = match_spectra_to_poles(&spectra, &lambdas, tol.match_tol);
        log::debug!("k = {count}: keep {keep:?}, discard {discard:?}");
        if discard.is_empty() {
            // growing k until nothing is discarded means every drop failed
            if last_rejected.is_none() {
                chosen = Some((poles, keep, discard, baseline(sys)));
            }
            break;
        }
        if tried.contains(&discard) {
            continue;
        }
        tried.push(discard.clone());
        let (reduced, neglected) = split(&dec.blocks, &keep, &discard);
        let a = assess(sys, &reduced, &neglected, tol.hankel_power)?;
        if a.acceptable(tol) {
            chosen = Some((poles, keep, discard, a));
            break;
        }
        last_rejected = Some((poles, keep, discard, a));
    }

    let (poles, mut keep, mut discard) = match chosen {
        Some((poles, keep, discard, a)) => {
            if !discard.is_empty() {
                report.iterations += 1;
                report.eliminated.extend(block_parts(&set_eigs, &discard));
            }
            record(&mut report, &a);
            unstable_note(&mut report, a.metric);
            (poles, keep, discard)
        }
        None => {
            let (poles, _, discard, a) = last_rejected.expect("at least one candidate was assessed");
            report.iterations += 1;
            log::info!("dropping {discard:?} rolled back: error {:.4e} > {:.4e}", a.value, tol.re_threshold);
            unstable_note(&mut report, a.metric);
            (poles, all.clone(), Vec::new())
        }
    };
    report.dominant_poles = poles.iter().map(|p| (p.lambda, p.dominance)).collect();

    let mut current = dec.blocks.select(&keep);
    if tol.refine && !discard.is_empty() {
        // least dominant kept block first
        let strength = |i: usize| -> f64 {
            poles
                .iter()
                .filter(|p| set_eigs[i].iter().any(|&l| (p.lambda - l).norm() / l.norm().max(1.0) <= tol.match_tol))
                .map(|p| p.dominance)
                .fold(0.0, f64::max)
        };
        let mut order = keep.clone();
        order.sort_by(|&a, &b| strength(a).total_cmp(&strength(b)));
        for &blk in &order {
            if keep.len() <= 1 {
                break;
            }
            report.iterations += 1;
            let trial_keep: Vec<usize> = keep.iter().copied().filter(|&i| i != blk).collect();
            let mut trial_discard = discard.clone();
            trial_discard.push(blk);
            let (reduced, neglected) = split(&dec.blocks, &trial_keep, &trial_discard);
            let a = assess(sys, &reduced, &neglected, tol.hankel_power)?;
            if a.acceptable(tol) {
                keep = trial_keep;
                discard = trial_discard;
                current = dec.blocks.select(&keep);
                report.eliminated.extend(block_parts(&set_eigs, &[blk]));
                record(&mut report, &a);
                continue;
            }
            // the block must stay: try its modes one conjugate group at a time
            let pos = keep.iter().position(|&i| i == blk).expect("kept block");
            let mut trimmed = current.clone();
            let mut neglected_parts = dec.blocks.select(&discard);
            loop {
                let Some(blk_now) = trimmed.blocks().get(pos) else { break };
                let eigs = blk_now.eigenvalues();
                let mut accepted = false;
                for group in conjugate_groups(&eigs) {
                    if group.len() == eigs.len() {
                        continue;
                    }
                    report.iterations += 1;
                    let trial = trim_subsystem_eigen(&trimmed, pos, &group, tol.eps_sing)?;
                    // neglected modes are what the trimmed block lost
                    let mut lost = trimmed.select(&[pos]);
                    let kept_modes: Vec<usize> = (0..eigs.len()).filter(|i| !group.contains(i)).collect();
                    lost = trim_subsystem_eigen(&lost, 0, &kept_modes, tol.eps_sing)?;
                    let mut neg_blocks = neglected_parts.blocks().to_vec();
                    neg_blocks.extend(lost.blocks().iter().cloned());
                    let neg = BlockDiagonalRealization::new(neg_blocks, neglected_parts.feedthrough().clone())?;
                    let reduced = sysrep::recompose(&trial);
                    let a = assess(sys, &reduced, &sysrep::recompose(&neg.without_feedthrough()), tol.hankel_power)?;
                    if a.acceptable(tol) {
                        report.eliminated.push(EliminatedPart {
                            label: format!("modes of R{}", blk + 1),
                            eigenvalues: group.iter().map(|&i| eigs[i]).collect(),
                        });
                        record(&mut report, &a);
                        trimmed = trial;
                        neglected_parts = neg;
                        accepted = true;
                        break;
                    }
                }
                if !accepted {
                    break;
                }
            }
            current = trimmed;
            break;
        }
    }

    report.kept_blocks = keep.iter().map(|i| i + 1).collect();
    report.discarded_blocks = discard.iter().map(|i| i + 1).collect();
    // nothing dropped: hand back the input realization untouched
    let reduced = if discard.is_empty() { sys.clone() } else { sysrep::recompose(&current) };
    report.reduced_order = reduced.order();
    Ok((reduced, report))
}

/// Indices of a sorted eigenvalue list grouped into real singletons and
/// conjugate pairs, right-most group first.
fn conjugate_groups(eigs: &[C64]) -> Vec<Vec<usize>> {
    let mut used = vec![false; eigs.len()];
    let mut groups = Vec::new();
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = eigs[i];
        let tol = 1e-8 * z.norm().max(1.0);
        let partner = if z.im.abs() > tol { (0..eigs.len()).find(|&j| !used[j] && (eigs[j] - z.conj()).norm() <= tol * 1e2) } else { None };
        match partner {
            Some(j) => {
                used[j] = true;
                groups.push(vec![i, j]);
            }
            None => groups.push(vec![i]),
        }
    }
    groups.reverse();
    groups
}

/// Convenience: the monic denominator of a fraction whose solvents are given.
pub fn fraction_from_solvents(solvents: &[DMatrix<f64>], num: MatrixPolynomial, eps_sing: f64) -> Result<RightMfd> {
    let den = solvents::denominator_from_solvents(solvents, eps_sing)?;
    let (p, m) = (num.shape().0, den.block_size());
    RightMfd::new(num, den, DMatrix::zeros(p, m))
}
