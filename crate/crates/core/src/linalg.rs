//! Dense linear algebra helpers shared by the reduction machinery.
//!
//! Thin layer over `nalgebra`: complex eigendecomposition (complex Schur
//! followed by triangular back-substitution), null directions from the SVD,
//! conditioning estimates and a few block-matrix utilities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 100_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn complexify(a: &DMatrix<f64>) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

/// Real part of a complex matrix, failing when any imaginary part exceeds
/// `tol` times the largest entry magnitude (or `tol` absolutely for tiny matrices).
pub fn realify(a: &CMat, tol: f64) -> Result<DMatrix<f64>> {
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let worst = a.iter().map(|z| z.im.abs()).fold(0.0_f64, f64::max);
    if worst > tol * scale {
        return Err(Error::NonRealSolvent(worst));
    }
    Ok(a.map(|z| z.re))
}

pub fn max_imag(a: &CMat) -> f64 {
    a.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub fn norm2_c(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// 2-norm condition number; infinite for singular or empty-rank matrices.
pub fn cond2(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn cond2_real(a: &DMatrix<f64>) -> f64 {
    cond2(&complexify(a))
}

/// 1-norm condition number through an explicit LU inverse.
pub fn cond1_c(a: &CMat) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    match a.clone().lu().try_inverse() {
        Some(inv) => {
            let k = norm1_c(a) * norm1_c(&inv);
            if k.is_finite() {
                k
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

fn norm1_c(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b`, refusing when the 1-norm condition of `a` reaches `max_cond`.
pub fn solve_c(a: &CMat, b: &CMat, max_cond: f64) -> Option<CMat> {
    if a.is_empty() {
        return Some(CMat::zeros(0, b.ncols()));
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse()?;
    let k = norm1_c(a) * norm1_c(&inv);
    if !k.is_finite() || k >= max_cond {
        return None;
    }
    a.clone().lu().solve(b)
}

pub fn solve_real(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.is_empty() {
        return Some(DMatrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Orders roots by ascending real part, ties by ascending imaginary part.
pub fn sort_roots(roots: &mut [C64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues of a real matrix (conjugate pairs exact), sorted.
pub fn eigvals_real(a: &DMatrix<f64>) -> Vec<C64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<C64> = a.complex_eigenvalues().iter().copied().collect();
    sort_roots(&mut ev);
    ev
}

#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, one per column.
    pub vectors: CMat,
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
pub fn eigen(a: &CMat) -> Result<Eigen> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    let schur = a
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Linalg("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut z = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        z[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * z[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            z[(i, k)] = -acc / denom;
        }
    }
    let mut vectors = q * z;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
    }
    let values = (0..n).map(|i| t[(i, i)]).collect();
    Ok(Eigen { values, vectors })
}

/// Right singular directions of `a` ordered from the smallest singular value up.
/// Returns `(sigma, vector)` pairs.
pub fn smallest_right_singular(a: &CMat) -> Vec<(f64, CVec)> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad short-wide matrices so the SVD exposes the full right null space.
    let work = if a.nrows() < n {
        let mut padded = CMat::zeros(n, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut out: Vec<(f64, CVec)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(j, &s)| (s, v_t.row(j).adjoint()))
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Modified Gram-Schmidt: orthogonalizes `v` against the columns of `basis`
/// (twice, for stability) and appends it when it carries a new direction.
/// Returns whether the basis grew.
pub fn mgs_expand(basis: &mut Vec<CVec>, v: &CVec, drop_tol: f64) -> bool {
    let start = v.norm();
    if start == 0.0 || !start.is_finite() {
        return false;
    }
    let mut w = v.clone();
    for _ in 0..2 {
        for q in basis.iter() {
            let h = q.dotc(&w);
            w -= q * h;
        }
    }
    let nrm = w.norm();
    if nrm <= drop_tol * start {
        return false;
    }
    basis.push(w / C64::new(nrm, 0.0));
    true
}

pub fn columns_to_matrix(n: usize, cols: &[CVec]) -> CMat {
    let mut m = CMat::zeros(n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

/// Block-diagonal assembly of square blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(*b);
        off += b.nrows();
    }
    out
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets.
/// Infinite when the sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<C64> = b.to_vec();
    let mut worst = 0.0_f64;
    for x in a {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("pool non-empty while sizes match");
        worst = worst.max(d);
        pool.swap_remove(idx);
    }
    worst
}

/// `true` when every root in the list has its conjugate partner (with
/// multiplicity) within `tol`.
pub fn is_conjugate_closed(roots: &[C64], tol: f64) -> bool {
    let conj: Vec<C64> = roots.iter().map(|z| z.conj()).collect();
    multiset_distance(roots, &conj) <= tol
}
