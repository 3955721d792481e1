//! Solvents (block roots) of monic matrix polynomials and complete solvent sets.
//!
//! A right solvent `R` satisfies `R^r + A_1 R^{r−1} + … + A_r = 0`, which is
//! the same as `λI − R` dividing `A(λ)` exactly on the right. A complete set
//! of `r` solvents has pairwise disjoint spectra covering all latent roots and
//! a nonsingular block Vandermonde matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::matpoly::{LatentPair, MatrixPolynomial, Side};

/// Tolerances for solvent construction and complete-set validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolventOptions {
    /// Rank threshold: matrices with condition `≥ 1/eps_sing` count as singular.
    pub eps_sing: f64,
    /// Minimum distance between eigenvalues of different solvents.
    pub tau_gap: f64,
    /// Relative tolerance when matching solvent spectra to latent roots.
    pub tau_match: f64,
    /// Relative null-space tolerance for latent vectors.
    pub tau_null: f64,
    /// Relative residual accepted by [`is_solvent`] during validation.
    pub solvent_tol: f64,
    /// Upper bound on groupings tried by [`compute_complete_set`].
    pub node_budget: usize,
}

impl Default for SolventOptions {
    fn default() -> Self {
        Self {
            eps_sing: 1e-10,
            tau_gap: 1e-6,
            tau_match: 1e-6,
            tau_null: crate::matpoly::DEFAULT_TAU_NULL,
            solvent_tol: 1e-6,
            node_budget: 10_000,
        }
    }
}

const REALIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Solvent {
    matrix: CMat,
    real: Option<DMatrix<f64>>,
    side: Side,
    eigenvalues: Vec<C64>,
    residual: Option<f64>,
}

impl Solvent {
    /// Wraps a real matrix; eigenvalues are computed and cached.
    pub fn from_real(matrix: DMatrix<f64>, side: Side) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("solvent must be square".into()));
        }
        let eigenvalues = linalg::eigvals_real(&matrix);
        Ok(Self { matrix: linalg::complexify(&matrix), real: Some(matrix), side, eigenvalues, residual: None })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// The real matrix, when the solvent is real.
    pub fn real_matrix(&self) -> Option<&DMatrix<f64>> {
        self.real.as_ref()
    }

    pub fn is_real(&self) -> bool {
        self.real.is_some()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn residual(&self) -> Option<f64> {
        self.residual
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub(crate) fn with_residual(mut self, residual: f64) -> Self {
        self.residual = Some(residual);
        self
    }
}

/// Builds `R = VΛV⁻¹` from `m` latent pairs (right side) or
/// `L = W⁻ᵀΛWᵀ` from left latent vectors (left side).
///
/// Conjugate-closed root sets produce real solvents.
pub fn solvent_from_latent(pairs: &[LatentPair], side: Side, eps_sing: f64) -> Result<Solvent> {
    let m = pairs
        .first()
        .map(|p| p.right.len())
        .ok_or_else(|| Error::InvalidInput("no latent pairs".into()))?;
    if pairs.len() != m {
        return Err(Error::DimensionMismatch(format!("{} latent pairs for block size {m}", pairs.len())));
    }
    let mut cols = Vec::with_capacity(m);
    for p in pairs {
        let v = match side {
            Side::Right => p.right.clone(),
            Side::Left => p
                .left
                .clone()
                .ok_or_else(|| Error::InvalidInput("left solvent needs left latent vectors".into()))?,
        };
        if v.len() != m {
            return Err(Error::DimensionMismatch("latent vector length".into()));
        }
        cols.push(v);
    }
    let v = linalg::columns_to_matrix(m, &cols);
    let k = linalg::cond2(&v);
    if !(k < 1.0 / eps_sing) {
        return Err(Error::DependentVectors(k));
    }
    let roots: Vec<C64> = pairs.iter().map(|p| p.root).collect();
    let lambda = CMat::from_diagonal(&nalgebra::DVector::from_vec(roots.clone()));
    let matrix = match side {
        Side::Right => {
            let vinv = v.clone().try_inverse().ok_or(Error::DependentVectors(f64::INFINITY))?;
            &v * lambda * vinv
        }
        Side::Left => {
            let vt = v.transpose();
            let vt_inv = vt.clone().try_inverse().ok_or(Error::DependentVectors(f64::INFINITY))?;
            vt_inv * lambda * vt
        }
    };
    let scale = roots.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut sorted = roots;
    linalg::sort_roots(&mut sorted);
    let real = if linalg::is_conjugate_closed(&sorted, 1e-8 * scale) {
        Some(linalg::realify(&matrix, REALIFY_TOL)?)
    } else {
        None
    };
    let matrix = match &real {
        Some(r) => linalg::complexify(r),
        None => matrix,
    };
    Ok(Solvent { matrix, real, side, eigenvalues: sorted, residual: None })
}

/// Checks `‖block_value(P, X)‖_F ≤ tol · max(1, ‖P‖_F)`; returns the verdict
/// and the residual norm.
pub fn is_solvent(p: &MatrixPolynomial, x: &DMatrix<f64>, side: Side, tol: f64) -> Result<(bool, f64)> {
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let residual = p.block_value(x, side)?.norm();
    Ok((residual <= tol * p.coeff_norm().max(1.0), residual))
}

/// Block Vandermonde matrix; block row `i` holds `[R_1^i … R_r^i]`.
pub fn block_vandermonde(solvents: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let r = solvents.len();
    if r == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let m = solvents[0].nrows();
    if solvents.iter().any(|s| s.shape() != (m, m)) {
        return Err(Error::DimensionMismatch("solvents must share one square block size".into()));
    }
    let mut v = DMatrix::zeros(r * m, r * m);
    for (j, s) in solvents.iter().enumerate() {
        let mut power = DMatrix::identity(m, m);
        for i in 0..r {
            v.view_mut((i * m, j * m), (m, m)).copy_from(&power);
            power = &power * s;
        }
    }
    Ok(v)
}

/// A validated complete set of real right solvents with its block Vandermonde matrix.
#[derive(Debug, Clone)]
pub struct CompleteSolventSet {
    solvents: Vec<Solvent>,
    vandermonde: DMatrix<f64>,
    vandermonde_condition: f64,
}

impl CompleteSolventSet {
    pub fn solvents(&self) -> &[Solvent] {
        &self.solvents
    }

    pub fn len(&self) -> usize {
        self.solvents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solvents.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.solvents.first().map_or(0, Solvent::size)
    }

    pub fn vandermonde(&self) -> &DMatrix<f64> {
        &self.vandermonde
    }

    pub fn vandermonde_condition(&self) -> f64 {
        self.vandermonde_condition
    }

    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        self.solvents
            .iter()
            .map(|s| s.real_matrix().expect("complete sets hold real solvents").clone())
            .collect()
    }

    /// Union of the solvent spectra, sorted.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut all: Vec<C64> = self.solvents.iter().flat_map(|s| s.eigenvalues().iter().copied()).collect();
        linalg::sort_roots(&mut all);
        all
    }
}

/// Verifies the complete-set conditions for `set` against `p` and caches the
/// block Vandermonde matrix.
pub fn validate_complete_set(
    p: &MatrixPolynomial,
    set: &[DMatrix<f64>],
    opts: &SolventOptions,
) -> Result<CompleteSolventSet> {
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let r = p.degree();
    let m = p.block_size();
    if set.len() != r {
        return Err(Error::IncompleteSet(format!("{} solvents for a degree-{r} polynomial", set.len())));
    }
    if set.iter().any(|s| s.shape() != (m, m)) {
        return Err(Error::DimensionMismatch(format!("solvents must be {m}x{m}")));
    }
    let mut solvents = Vec::with_capacity(r);
    for s in set {
        solvents.push(Solvent::from_real(s.clone(), Side::Right)?);
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let gap = solvents[i]
                .eigenvalues()
                .iter()
                .flat_map(|a| solvents[j].eigenvalues().iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            if gap <= opts.tau_gap {
                return Err(Error::IncompleteSet(format!(
                    "spectra of solvents {} and {} overlap (gap {gap:.3e})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut checked = Vec::with_capacity(r);
    for (i, s) in solvents.into_iter().enumerate() {
        let (ok, residual) = is_solvent(p, &set[i], Side::Right, opts.solvent_tol)?;
        if !ok {
            return Err(Error::IncompleteSet(format!("matrix {} is not a solvent (residual {residual:.3e})", i + 1)));
        }
        checked.push(s.with_residual(residual));
    }
    let mut union: Vec<C64> = checked.iter().flat_map(|s| s.eigenvalues().iter().copied()).collect();
    linalg::sort_roots(&mut union);
    let roots = p.latent_roots()?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mismatch = linalg::multiset_distance(&union, &roots);
    if !(mismatch <= opts.tau_match * scale) {
        return Err(Error::IncompleteSet(format!(
            "solvent spectra do not cover the latent roots (mismatch {mismatch:.3e})"
        )));
    }
    let vandermonde = block_vandermonde(set)?;
    let vandermonde_condition = linalg::cond2_real(&vandermonde);
    if !(vandermonde_condition < 1.0 / opts.eps_sing) {
        return Err(Error::IncompleteSet(format!(
            "block Vandermonde matrix is singular (condition {vandermonde_condition:.3e})"
        )));
    }
    Ok(CompleteSolventSet { solvents: checked, vandermonde, vandermonde_condition })
}

/// Groups of roots that must stay together: a real root, or a conjugate pair.
fn conjugate_units(pairs: &[LatentPair]) -> Vec<Vec<usize>> {
    let mut units = Vec::new();
    let mut taken = vec![false; pairs.len()];
    for i in 0..pairs.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let z = pairs[i].root;
        if z.im == 0.0 {
            units.push(vec![i]);
            continue;
        }
        let partner = (0..pairs.len())
            .filter(|&j| !taken[j])
            .min_by(|&a, &b| (pairs[a].root - z.conj()).norm().total_cmp(&(pairs[b].root - z.conj()).norm()));
        match partner {
            Some(j) if (pairs[j].root - z.conj()).norm() <= 1e-8 * z.norm().max(1.0) => {
                taken[j] = true;
                units.push(vec![i, j]);
            }
            _ => units.push(vec![i]),
        }
    }
    units
}

struct GroupingSearch<'a> {
    p: &'a MatrixPolynomial,
    pairs: &'a [LatentPair],
    units: Vec<Vec<usize>>,
    m: usize,
    opts: &'a SolventOptions,
    nodes: usize,
}

impl GroupingSearch<'_> {
    fn run(&mut self, remaining: Vec<usize>, chosen: &mut Vec<DMatrix<f64>>) -> Result<Option<CompleteSolventSet>> {
        let Some((&head, rest)) = remaining.split_first() else {
            // report the group nearest the imaginary axis first
            let ordered: Vec<DMatrix<f64>> = chosen.iter().rev().cloned().collect();
            return Ok(validate_complete_set(self.p, &ordered, self.opts).ok());
        };
        let head_size = self.units[head].len();
        if head_size > self.m {
            return Ok(None);
        }
        let mut picks = Vec::new();
        self.combinations(rest, self.m - head_size, 0, &mut Vec::new(), &mut picks);
        for extra in picks {
            self.nodes += 1;
            if self.nodes > self.opts.node_budget {
                return Err(Error::NoCompleteSetFound(self.nodes - 1));
            }
            let members: Vec<usize> = std::iter::once(head)
                .chain(extra.iter().copied())
                .flat_map(|u| self.units[u].iter().copied())
                .collect();
            let group: Vec<LatentPair> = members.iter().map(|&i| self.pairs[i].clone()).collect();
            let Ok(solvent) = solvent_from_latent(&group, Side::Right, self.opts.eps_sing) else {
                continue;
            };
            let Some(real) = solvent.real_matrix() else { continue };
            chosen.push(real.clone());
            let next: Vec<usize> = rest.iter().copied().filter(|u| !extra.contains(u)).collect();
            let found = self.run(next, chosen)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// All subsets of `pool` (in lexicographic order) whose unit sizes sum to `need`.
    fn combinations(&self, pool: &[usize], need: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if need == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..pool.len() {
            let size = self.units[pool[k]].len();
            if size <= need {
                cur.push(pool[k]);
                self.combinations(pool, need - size, k + 1, cur, out);
                cur.pop();
            }
        }
    }
}

/// Partitions the latent roots into `r` conjugate-closed groups of `m` roots
/// with independent latent vectors and returns the first grouping that
/// validates as a complete set.
///
/// Groups are formed in ascending real-part order: every group contains the
/// leftmost root not yet assigned, so each partition is visited once. The
/// returned set lists the rightmost group first.
pub fn compute_complete_set(p: &MatrixPolynomial, opts: &SolventOptions) -> Result<CompleteSolventSet> {
    let p = p.normalized()?;
    let m = p.block_size();
    let r = p.degree();
    if r == 0 {
        return Err(Error::InvalidInput("degree-0 polynomial has no solvents".into()));
    }
    let structure = p.latent_structure(opts.tau_null)?;
    if !structure.defective.is_empty() {
        log::debug!("defective latent roots: {:?}", structure.defective);
    }
    let units = conjugate_units(&structure.pairs);
    let mut search = GroupingSearch { p: &p, pairs: &structure.pairs, units, m, opts, nodes: 0 };
    let all: Vec<usize> = (0..search.units.len()).collect();
    match search.run(all, &mut Vec::with_capacity(r))? {
        Some(set) => {
            log::debug!("complete set found after {} nodes", search.nodes);
            Ok(set)
        }
        None => Err(Error::NoCompleteSetFound(search.nodes)),
    }
}

/// The unique monic degree-`r` polynomial having every matrix in `set` as a
/// right solvent: solves `[A_r … A_1] V_R = −[R_1^r … R_r^r]`.
pub fn denominator_from_solvents(set: &[DMatrix<f64>], eps_sing: f64) -> Result<MatrixPolynomial> {
    let r = set.len();
    if r == 0 {
        return Err(Error::InvalidInput("empty solvent set".into()));
    }
    let m = set[0].nrows();
    let v = block_vandermonde(set)?;
    let k = linalg::cond2_real(&v);
    if !(k < 1.0 / eps_sing) {
        return Err(Error::SingularVandermonde(k));
    }
    let mut top = DMatrix::zeros(m, r * m);
    for (j, s) in set.iter().enumerate() {
        let mut power = DMatrix::identity(m, m);
        for _ in 0..r {
            power = &power * s;
        }
        top.view_mut((0, j * m), (m, m)).copy_from(&(-power));
    }
    // X V = top  <=>  Vᵀ Xᵀ = topᵀ
    let xt = linalg::solve_real(&v.transpose(), &top.transpose()).ok_or(Error::SingularVandermonde(k))?;
    let x = xt.transpose();
    let tail: Vec<DMatrix<f64>> = (0..r).rev().map(|j| x.view((0, j * m), (m, m)).into_owned()).collect();
    MatrixPolynomial::monic(m, tail)
}
