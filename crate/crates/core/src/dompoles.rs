//! Dominant poles of square transfer functions: Newton on the smallest
//! eigenvalue of `H⁻¹(s)`, accelerated inside a growing search space, with
//! deflation of converged poles and conjugate closure.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::sysrep::{StateSpace, DEFAULT_EPS_SING};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriplet {
    /// Smallest-magnitude eigenvalue of `H⁻¹(s)`.
    pub mu: C64,
    /// Unit right eigenvector.
    pub u: CVec,
    /// Unit left eigenvector.
    pub v: CVec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantPole {
    pub lambda: C64,
    pub x: CVec,
    pub y: CVec,
    pub residue: CMat,
    pub dominance: f64,
}

impl DominantPole {
    pub fn residue_norm(&self) -> f64 {
        linalg::norm2_c(&self.residue)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantPoleOptions {
    /// Relative eigen-residual accepted as converged, `‖(A − θI)x‖/‖A‖_F`.
    pub tau_conv: f64,
    /// Outer iterations allowed without a new pole converging.
    pub max_outer: usize,
    /// Search-space dimension that triggers a restart (capped at `n`).
    pub max_dim: usize,
    /// Ritz vectors kept across a restart.
    pub keep_on_restart: usize,
}

impl Default for DominantPoleOptions {
    fn default() -> Self {
        Self { tau_conv: 1e-8, max_outer: 200, max_dim: 30, keep_on_restart: 10 }
    }
}

fn require_square(sys: &StateSpace) -> Result<()> {
    if sys.inputs() != sys.outputs() {
        return Err(Error::NonSquareTransfer { p: sys.outputs(), m: sys.inputs() });
    }
    Ok(())
}

fn shifted(a: &CMat, s: C64) -> CMat {
    let mut m = -a.clone();
    for i in 0..a.nrows() {
        m[(i, i)] += s;
    }
    m
}

/// `(sI − A)⁻¹ rhs`, or `(sI − A)⁻ᴴ rhs` when `adjoint`; `None` at an eigenvalue.
fn resolvent(a: &CMat, s: C64, rhs: &CMat, adjoint: bool) -> Option<CMat> {
    let m = shifted(a, s);
    let m = if adjoint { m.adjoint() } else { m };
    linalg::solve_c(&m, rhs, 1.0 / DEFAULT_EPS_SING)
}

/// Solve used for inverse iteration, where near-singularity is the point.
/// The shift is nudged off an exact eigenvalue.
fn inverse_iteration_solve(a: &CMat, s: C64, rhs: &CVec, adjoint: bool) -> CVec {
    let scale = s.norm().max(1.0);
    let mut shift = s;
    for k in 0..8 {
        let m = shifted(a, shift);
        let m = if adjoint { m.adjoint() } else { m };
        if let Some(z) = m.lu().solve(rhs) {
            if z.iter().all(|w| w.re.is_finite() && w.im.is_finite()) && z.norm() > 0.0 {
                return z;
            }
        }
        shift = s + C64::new(1e-12 * scale * 10f64.powi(k), 1e-12 * scale * 10f64.powi(k));
    }
    rhs.clone()
}

fn normalized(v: CVec) -> CVec {
    let n = v.norm();
    if n > 0.0 {
        v / C64::new(n, 0.0)
    } else {
        v
    }
}

/// Transfer function of a (possibly deflated) complex triple.
fn transfer(a: &CMat, b: &CMat, c: &CMat, d: &CMat, s: C64) -> Result<CMat> {
    let x = resolvent(a, s, b, false).ok_or(Error::ShiftAtEigenvalue(s))?;
    Ok(c * x + d)
}

fn triplet_and_step(a: &CMat, b: &CMat, c: &CMat, d: &CMat, s: C64) -> Result<(C64, EigenTriplet)> {
    let h = transfer(a, b, c, d, s)?;
    let hn = h.norm();
    if hn == 0.0 || !(linalg::cond2(&h) < 1.0 / DEFAULT_EPS_SING) {
        return Err(Error::SingularTransfer(s));
    }
    // the smallest eigenvalue of H⁻¹ is the reciprocal of the largest of H
    let right = linalg::eigen(&h)?;
    let (idx, lam_h) = right
        .values
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
        .map(|(i, z)| (i, *z))
        .expect("square, non-empty H");
    if lam_h.norm() == 0.0 {
        return Err(Error::SingularTransfer(s));
    }
    let u = normalized(right.vectors.column(idx).into_owned());
    let left = linalg::eigen(&h.adjoint())?;
    let jdx = left
        .values
        .iter()
        .enumerate()
        .min_by(|p, q| (p.1 - lam_h.conj()).norm().total_cmp(&(q.1 - lam_h.conj()).norm()))
        .map(|(j, _)| j)
        .expect("square, non-empty H");
    let v = normalized(left.vectors.column(jdx).into_owned());
    let mu = C64::new(1.0, 0.0) / lam_h;

    let vu = v.dotc(&u);
    if vu.norm() < 1e-12 {
        return Err(Error::DegenerateEigenvector);
    }
    // dμ/ds = μ² vᴴC(sI−A)⁻²Bu / vᴴu
    let bu = b * &u;
    let r1 = resolvent(a, s, &CMat::from_column_slice(bu.len(), 1, bu.as_slice()), false).ok_or(Error::ShiftAtEigenvalue(s))?;
    let r2 = resolvent(a, s, &r1, false).ok_or(Error::ShiftAtEigenvalue(s))?;
    let deriv = (c * r2).column(0).into_owned();
    let factor = v.dotc(&deriv) / vu;
    let denom = mu * factor;
    if denom.norm() == 0.0 || !denom.re.is_finite() || !denom.im.is_finite() {
        return Err(Error::SingularTransfer(s));
    }
    Ok((s - C64::new(1.0, 0.0) / denom, EigenTriplet { mu, u, v }))
}

/// One Newton update `s_{k+1} = s_k − vᴴu / (μ · vᴴC(s_kI − A)⁻²Bu)`.
pub fn newton_step(sys: &StateSpace, s: C64) -> Result<(C64, EigenTriplet)> {
    require_square(sys)?;
    let a = linalg::complexify(sys.a());
    triplet_and_step(&a, &linalg::complexify(sys.b()), &linalg::complexify(sys.c()), &linalg::complexify(sys.d()), s)
}

/// `(Cx)(yᴴB)/(yᴴx)`.
pub fn residue_matrix(sys: &StateSpace, lambda: C64, x: &CVec, y: &CVec) -> Result<CMat> {
    let _ = lambda;
    residue_with(&linalg::complexify(sys.b()), &linalg::complexify(sys.c()), x, y)
}

fn residue_with(b: &CMat, c: &CMat, x: &CVec, y: &CVec) -> Result<CMat> {
    let yx = y.dotc(x);
    if yx.norm() < 1e-12 * x.norm() * y.norm() || yx.norm() == 0.0 {
        return Err(Error::DegenerateEigenvector);
    }
    let cx = c * x;
    let yb = y.adjoint() * b;
    Ok(cx * yb / yx)
}

fn dominance_index(residue_norm: f64, lambda: C64) -> f64 {
    if lambda.re == 0.0 {
        f64::INFINITY
    } else {
        residue_norm / lambda.re.abs()
    }
}

/// Descending dominance `‖R‖₂/|Re λ|`; imaginary-axis poles first, ties by
/// descending `‖R‖₂`.
pub fn dominance_order(mut poles: Vec<DominantPole>) -> Vec<DominantPole> {
    poles.sort_by(|p, q| {
        let (np, nq) = (p.residue_norm(), q.residue_norm());
        q.dominance
            .total_cmp(&p.dominance)
            .then(nq.total_cmp(&np))
            .then(p.lambda.re.total_cmp(&q.lambda.re))
            .then(q.lambda.im.total_cmp(&p.lambda.im))
    });
    poles
}

fn is_complex(z: C64) -> bool {
    z.im.abs() > 1e-8 * z.norm().max(1.0)
}

/// First `k` entries of a dominance-ordered list, without splitting a
/// conjugate pair: a pair that straddles the cut is left out.
pub fn truncate_conjugate_closed(poles: Vec<DominantPole>, k: usize) -> Vec<DominantPole> {
    let mut used = vec![false; poles.len()];
    let mut out: Vec<DominantPole> = Vec::with_capacity(k);
    for i in 0..poles.len() {
        if used[i] || out.len() >= k {
            continue;
        }
        used[i] = true;
        let p = &poles[i];
        let tol = 1e-6 * p.lambda.norm().max(1.0);
        let partner = if is_complex(p.lambda) {
            (i + 1..poles.len()).filter(|&j| !used[j]).find(|&j| (poles[j].lambda - p.lambda.conj()).norm() <= tol)
        } else {
            None
        };
        match partner {
            Some(j) => {
                used[j] = true;
                if out.len() + 2 > k {
                    break;
                }
                out.push(p.clone());
                out.push(poles[j].clone());
            }
            None => out.push(p.clone()),
        }
    }
    out
}

/// Default initial shifts: `2m` points on `Re s = −0.1`, imaginary parts
/// log-spaced over `[0.1, ‖A‖₂]`.
pub fn default_shifts(sys: &StateSpace) -> Vec<C64> {
    let count = 2 * sys.inputs().max(1);
    let top = linalg::norm2(sys.a()).max(1.0);
    crate::metrics::log_grid(0.1, top, count).into_iter().map(|w| C64::new(-0.1, w)).collect()
}

struct Ritz {
    theta: C64,
    x: CVec,
    y: CVec,
    residual: f64,
    dominance: f64,
}

struct Search {
    a: CMat,
    a_fro: f64,
    b: CMat,
    c: CMat,
    d: CMat,
    bd: CMat,
    cd: CMat,
    basis: Vec<CVec>,
    found: Vec<DominantPole>,
    opts: DominantPoleOptions,
}

impl Search {
    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn expand(&mut self, v: &CVec) -> bool {
        let mut grew = linalg::mgs_expand(&mut self.basis, v, 1e-10);
        // the system is real: keep the space closed under conjugation
        grew |= linalg::mgs_expand(&mut self.basis, &v.map(|z| z.conj()), 1e-10);
        grew
    }

    /// Expansion at shift `s` from the Newton triplet of the deflated transfer
    /// function; falls back to every input direction when it is singular.
    fn expand_at(&mut self, s: C64) -> bool {
        match triplet_and_step(&self.a, &self.bd, &self.cd, &self.d, s) {
            Ok((_, t)) => {
                let rhs = &self.bd * &t.u;
                match resolvent(&self.a, s, &CMat::from_column_slice(rhs.len(), 1, rhs.as_slice()), false) {
                    Some(x) => self.expand(&x.column(0).into_owned()),
                    None => false,
                }
            }
            Err(_) => {
                let mut grew = false;
                let cols = self.bd.ncols();
                for j in 0..cols {
                    let rhs = self.bd.column(j).into_owned();
                    let x = inverse_iteration_solve(&self.a, s, &rhs, false);
                    grew |= self.expand(&x);
                }
                grew
            }
        }
    }

    fn ritz_pairs(&self) -> Result<Vec<Ritz>> {
        if self.basis.is_empty() {
            return Ok(Vec::new());
        }
        let v = linalg::columns_to_matrix(self.n(), &self.basis);
        let g = v.adjoint() * &self.a * &v;
        let e = linalg::eigen(&g)?;
        let mut out = Vec::with_capacity(e.values.len());
        for (i, &theta) in e.values.iter().enumerate() {
            let x = normalized(&v * e.vectors.column(i));
            let residual = (&self.a * &x - &x * theta).norm() / self.a_fro;
            let mut y = normalized(inverse_iteration_solve(&self.a, theta, &x, true));
            y = normalized(inverse_iteration_solve(&self.a, theta, &y, true));
            let dominance = match residue_with(&self.bd, &self.cd, &x, &y) {
                Ok(r) => dominance_index(linalg::norm2_c(&r), theta),
                Err(_) => 0.0,
            };
            out.push(Ritz { theta, x, y, residual, dominance });
        }
        Ok(out)
    }

    fn already_found(&self, theta: C64) -> bool {
        self.found.iter().any(|p| (p.lambda - theta).norm() <= 1e-8 * theta.norm().max(1.0))
    }

    /// Polishes a converged Ritz pair and records it (with its conjugate).
    fn accept(&mut self, r: &Ritz) -> Result<bool> {
        let mut x = r.x.clone();
        let mut y = r.y.clone();
        let mut lambda = r.theta;
        for _ in 0..2 {
            x = normalized(inverse_iteration_solve(&self.a, lambda, &x, false));
            y = normalized(inverse_iteration_solve(&self.a, lambda, &y, true));
            let yx = y.dotc(&x);
            if yx.norm() == 0.0 {
                return Err(Error::DegenerateEigenvector);
            }
            lambda = y.dotc(&(&self.a * &x)) / yx;
        }
        if !is_complex(lambda) {
            lambda.im = 0.0;
        }
        if self.already_found(lambda) {
            return Ok(false);
        }
        let a2 = self.a_fro;
        let rx = (&self.a * &x - &x * lambda).norm();
        let ry = (self.a.adjoint() * &y - &y * lambda.conj()).norm();
        if rx > self.opts.tau_conv * a2 || ry > self.opts.tau_conv * a2 {
            return Ok(false);
        }
        let mut members = vec![(lambda, x.clone(), y.clone())];
        if is_complex(lambda) && !self.already_found(lambda.conj()) {
            members.push((lambda.conj(), x.map(|z| z.conj()), y.map(|z| z.conj())));
        }
        for (lambda, x, y) in members {
            let residue = residue_with(&self.b, &self.c, &x, &y)?;
            let dominance = dominance_index(linalg::norm2_c(&residue), lambda);
            // deflate: Π = I − x yᴴ / (yᴴx)
            let yx = y.dotc(&x);
            let proj_b = &x * (y.adjoint() * &self.bd) / yx;
            self.bd -= proj_b;
            let proj_c = (&self.cd * &x) * y.adjoint() / yx;
            self.cd -= proj_c;
            log::debug!("dominant pole {lambda} converged, dominance {dominance:.4e}");
            self.found.push(DominantPole { lambda, x, y, residue, dominance });
        }
        Ok(true)
    }

    fn restart(&mut self, ritz: &[Ritz]) {
        let mut order: Vec<usize> = (0..ritz.len()).filter(|&i| !self.already_found(ritz[i].theta)).collect();
        order.sort_by(|&i, &j| ritz[j].dominance.total_cmp(&ritz[i].dominance));
        self.basis.clear();
        for &i in order.iter().take(self.opts.keep_on_restart) {
            let x = ritz[i].x.clone();
            self.expand(&x);
        }
        log::debug!("search space restarted with {} vectors", self.basis.len());
    }
}

/// The `k` most dominant poles of a square system, ordered by
/// [`dominance_order`]. A conjugate pair that would straddle position `k` is
/// omitted, so fewer than `k` poles may come back.
pub fn dominant_poles(sys: &StateSpace, k: usize, shifts: Option<&[C64]>) -> Result<Vec<DominantPole>> {
    dominant_poles_with(sys, k, shifts, &DominantPoleOptions::default())
}

pub fn dominant_poles_with(sys: &StateSpace, k: usize, shifts: Option<&[C64]>, opts: &DominantPoleOptions) -> Result<Vec<DominantPole>> {
    require_square(sys)?;
    let n = sys.order();
    if k > n {
        return Err(Error::InvalidInput(format!("requested {k} poles from an order-{n} system")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let a = linalg::complexify(sys.a());
    let b = linalg::complexify(sys.b());
    let c = linalg::complexify(sys.c());
    let mut search = Search {
        a_fro: sys.a().norm().max(f64::MIN_POSITIVE),
        bd: b.clone(),
        cd: c.clone(),
        d: linalg::complexify(sys.d()),
        a,
        b,
        c,
        basis: Vec::new(),
        found: Vec::new(),
        opts: *opts,
    };
    // compute beyond k so the ranking among the candidates is reliable
    let target = n.min(k + k.max(4));
    let max_dim = opts.max_dim.min(n).max(1);

    let initial: Vec<C64> = match shifts {
        Some(s) if !s.is_empty() => s.to_vec(),
        _ => default_shifts(sys),
    };
    for &s in &initial {
        search.expand_at(s);
    }

    let mut idle = 0usize;
    let mut stalled = 0usize;
    while search.found.len() < target {
        let ritz = search.ritz_pairs()?;
        let mut progress = false;
        let mut conv: Vec<usize> = (0..ritz.len()).filter(|&i| ritz[i].residual < opts.tau_conv).collect();
        conv.sort_by(|&i, &j| ritz[j].dominance.total_cmp(&ritz[i].dominance));
        for i in conv {
            if !search.already_found(ritz[i].theta) && search.accept(&ritz[i])? {
                progress = true;
            }
        }
        if search.found.len() >= target {
            break;
        }
        if progress {
            idle = 0;
        } else {
            idle += 1;
            if idle > opts.max_outer {
                if search.found.len() >= k {
                    break;
                }
                return Err(Error::NoConvergence(opts.max_outer));
            }
        }
        // next shift: the most dominant unconverged Ritz value
        let next = ritz
            .iter()
            .filter(|r| r.residual >= opts.tau_conv && !search.already_found(r.theta))
            .max_by(|p, q| p.dominance.total_cmp(&q.dominance).then(q.residual.total_cmp(&p.residual)));
        let grew = match next {
            Some(r) => {
                let s = r.theta;
                search.expand_at(s)
            }
            None => false,
        };
        if !grew {
            // the space cannot grow from the Ritz shift: retry the initial shifts
            let mut any = false;
            for &s in &initial {
                any |= search.expand_at(s);
            }
            if !any {
                stalled += 1;
                if stalled > 2 {
                    if search.found.len() >= k {
                        break;
                    }
                    // the space is exhausted: fill it with unit vectors
                    let n = search.n();
                    let mut filled = false;
                    for i in 0..n {
                        let mut e = CVec::zeros(n);
                        e[i] = C64::new(1.0, 0.0);
                        filled |= search.expand(&e);
                    }
                    if !filled && stalled > 4 {
                        return Err(Error::NoConvergence(opts.max_outer));
                    }
                }
            }
        }
        if search.basis.len() > max_dim {
            let ritz = search.ritz_pairs()?;
            search.restart(&ritz);
        }
    }
    let ordered = dominance_order(search.found);
    Ok(truncate_conjugate_closed(ordered, k))
}

/// Dense reference: every eigenvalue of `A` with residue and dominance, in
/// [`dominance_order`].
pub fn all_poles_dense(sys: &StateSpace) -> Result<Vec<DominantPole>> {
    require_square(sys)?;
    let a = linalg::complexify(sys.a());
    let right = linalg::eigen(&a)?;
    let b = linalg::complexify(sys.b());
    let c = linalg::complexify(sys.c());
    let mut out = Vec::with_capacity(right.values.len());
    for (i, &lambda) in right.values.iter().enumerate() {
        let x = right.vectors.column(i).into_owned();
        let mut y = normalized(inverse_iteration_solve(&a, lambda, &x, true));
        y = normalized(inverse_iteration_solve(&a, lambda, &y, true));
        let residue = residue_with(&b, &c, &x, &y)?;
        let dominance = dominance_index(linalg::norm2_c(&residue), lambda);
        out.push(DominantPole { lambda, x, y, residue, dominance });
    }
    Ok(dominance_order(out))
}
