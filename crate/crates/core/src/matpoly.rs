//! Matrix polynomials `A(λ) = A_0 λ^r + A_1 λ^{r-1} + … + A_r`.
//!
//! Coefficients are stored leading-first. Square polynomials carry the latent
//! structure (roots of `det A(λ)` and the associated null vectors); any shape
//! supports evaluation and division by a linear factor `λI − X`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};

/// Default relative null-space tolerance for latent vectors.
pub const DEFAULT_TAU_NULL: f64 = 1e-6;
/// Leading coefficients with a larger condition number are rejected.
pub const MAX_LEADING_COND: f64 = 1e12;
const MONIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<DMatrix<f64>>,
}

/// A latent root with its null vectors.
#[derive(Debug, Clone)]
pub struct LatentPair {
    pub root: C64,
    /// Unit vector `p` with `A(root) p ≈ 0`.
    pub right: CVec,
    /// Unit vector `q` with `qᵀ A(root) ≈ 0`, when requested.
    pub left: Option<CVec>,
    /// `‖A(root) p‖₂` at construction.
    pub residual: f64,
}

/// Latent roots paired with right latent vectors, one pair per root counted
/// with multiplicity.
#[derive(Debug, Clone)]
pub struct LatentStructure {
    pub pairs: Vec<LatentPair>,
    /// Roots whose geometric multiplicity fell short of the algebraic one.
    /// Their pairs repeat a vector, so any solvent using two of them fails.
    pub defective: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDivisionResult {
    pub quotient: MatrixPolynomial,
    pub remainder: DMatrix<f64>,
    pub side: Side,
}

impl MatrixPolynomial {
    /// Builds a polynomial from leading-first coefficients.
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("matrix polynomial needs at least one coefficient".into()))?;
        let shape = first.shape();
        if let Some((i, bad)) = coeffs.iter().enumerate().find(|(_, c)| c.shape() != shape) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient {i} is {}x{}, expected {}x{}",
                bad.nrows(),
                bad.ncols(),
                shape.0,
                shape.1
            )));
        }
        if coeffs.iter().any(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// Monic square polynomial `Iλ^r + tail[0] λ^{r-1} + … + tail[r-1]`.
    pub fn monic(m: usize, tail: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(tail.len() + 1);
        coeffs.push(DMatrix::identity(m, m));
        coeffs.extend(tail);
        Self::new(coeffs)
    }

    /// `Iλ − X`.
    pub fn linear(x: &DMatrix<f64>) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch("linear factor needs a square matrix".into()));
        }
        Self::monic(x.nrows(), vec![-x])
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { coeffs: vec![DMatrix::zeros(rows, cols)] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    /// Row count of the coefficient blocks (`m` for square polynomials).
    pub fn block_size(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn is_square(&self) -> bool {
        self.coeffs[0].is_square()
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// Coefficient of `λ^{degree − i}`.
    pub fn coeff(&self, i: usize) -> &DMatrix<f64> {
        &self.coeffs[i]
    }

    pub fn into_coeffs(self) -> Vec<DMatrix<f64>> {
        self.coeffs
    }

    pub fn is_monic(&self) -> bool {
        self.is_square()
            && (&self.coeffs[0] - DMatrix::identity(self.block_size(), self.block_size())).amax() <= MONIC_TOL
    }

    /// Frobenius norm of all coefficients stacked together.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
    }

    /// Largest coefficientwise difference, padding the shorter polynomial
    /// with leading zeros.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let (a, b) = (self.aligned_coeffs(other.degree()), other.aligned_coeffs(self.degree()));
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
    }

    fn aligned_coeffs(&self, other_degree: usize) -> Vec<DMatrix<f64>> {
        let (r, c) = self.shape();
        let pad = other_degree.saturating_sub(self.degree());
        let mut out = vec![DMatrix::zeros(r, c); pad];
        out.extend(self.coeffs.iter().cloned());
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch("polynomial shapes differ".into()));
        }
        let deg = self.degree().max(other.degree());
        let a = self.aligned_coeffs(deg);
        let b = other.aligned_coeffs(deg);
        Self::new(a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
    }

    /// `self(λ) · (λI − X)`.
    pub fn mul_linear_right(&self, x: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = self.shape();
        if x.shape() != (cols, cols) {
            return Err(Error::DimensionMismatch("X must be square and match the column count".into()));
        }
        let r = self.degree();
        let mut out = vec![DMatrix::zeros(rows, cols); r + 2];
        for (i, ci) in self.coeffs.iter().enumerate() {
            out[i] += ci;
            out[i + 1] -= ci * x;
        }
        Self::new(out)
    }

    /// `(λI − X) · self(λ)`.
    pub fn mul_linear_left(&self, x: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = self.shape();
        if x.shape() != (rows, rows) {
            return Err(Error::DimensionMismatch("X must be square and match the row count".into()));
        }
        let r = self.degree();
        let mut out = vec![DMatrix::zeros(rows, cols); r + 2];
        for (i, ci) in self.coeffs.iter().enumerate() {
            out[i] += ci;
            out[i + 1] -= x * ci;
        }
        Self::new(out)
    }

    /// Multiplies every coefficient on the right by `m`.
    pub fn scale_right(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.shape().1 {
            return Err(Error::DimensionMismatch("right factor rows".into()));
        }
        Self::new(self.coeffs.iter().map(|c| c * m).collect())
    }

    /// Drops leading coefficients that are exactly zero (keeps at least one).
    pub fn trimmed(&self) -> Self {
        let first = self.coeffs.iter().position(|c| c.amax() != 0.0).unwrap_or(self.degree());
        Self { coeffs: self.coeffs[first..].to_vec() }
    }

    /// `A_0⁻¹ A(λ)`, the monic polynomial with the same latent roots, right
    /// latent vectors and right solvents.
    pub fn normalized(&self) -> Result<Self> {
        self.require_square()?;
        if self.is_monic() {
            return Ok(self.clone());
        }
        let lead = &self.coeffs[0];
        let k = linalg::cond2_real(lead);
        if !(k < MAX_LEADING_COND) {
            return Err(Error::SingularLeadingCoefficient(k));
        }
        let inv = lead
            .clone()
            .try_inverse()
            .ok_or(Error::SingularLeadingCoefficient(f64::INFINITY))?;
        let mut coeffs: Vec<DMatrix<f64>> = self.coeffs.iter().map(|c| &inv * c).collect();
        coeffs[0] = DMatrix::identity(self.block_size(), self.block_size());
        Self::new(coeffs)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            let (r, c) = self.shape();
            Err(Error::DimensionMismatch(format!("square polynomial required, got {r}x{c} blocks")))
        }
    }

    /// `Σ A_i s^{r−i}` by Horner's rule.
    pub fn evaluate(&self, s: C64) -> CMat {
        let mut acc = linalg::complexify(&self.coeffs[0]);
        for ci in &self.coeffs[1..] {
            acc *= s;
            acc += linalg::complexify(ci);
        }
        acc
    }

    /// Coefficients of `det A(λ)` (leading first, length `r·m + 1`), by
    /// sampling on a circle and inverting the discrete Fourier transform.
    ///
    /// The circle radius is the geometric mean of the latent-root moduli,
    /// `|det A_r / det A_0|^{1/(rm)}`, which keeps the sampled determinants
    /// and the recovered coefficients on comparable scales.
    pub fn determinant_polynomial(&self) -> Result<Vec<f64>> {
        self.require_square()?;
        let m = self.block_size();
        let deg = self.degree() * m;
        if deg == 0 {
            return Ok(vec![self.coeffs[0].determinant()]);
        }
        let samples = deg + 1;
        let lead_det = self.coeffs[0].determinant().abs();
        let tail_det = self.coeffs[self.degree()].determinant().abs();
        let mut radius = if lead_det > 0.0 && tail_det > 0.0 {
            (tail_det / lead_det).powf(1.0 / deg as f64)
        } else {
            1.0
        };
        if !radius.is_finite() || radius <= 0.0 {
            radius = 1.0;
        }
        radius = radius.clamp(1e-6, 1e6);
        let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / samples as f64);
        let values: Vec<C64> = (0..samples)
            .map(|k| self.evaluate(omega(k) * radius).lu().determinant())
            .collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InterpolationFailure("non-finite determinant sample".into()));
        }
        if values.iter().all(|v| v.norm() == 0.0) {
            return Err(Error::InterpolationFailure("determinant vanishes identically".into()));
        }
        // c_j ρ^j = (1/N) Σ_k p_k ω^{−jk}
        let mut ascending = Vec::with_capacity(samples);
        for j in 0..samples {
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in values.iter().enumerate() {
                acc += v * omega((j * k) % samples).conj();
            }
            let scale = radius.powi(j as i32) * samples as f64;
            if !scale.is_finite() || scale == 0.0 {
                return Err(Error::InterpolationFailure("sampling radius out of range".into()));
            }
            ascending.push((acc / scale).re);
        }
        ascending.reverse();
        Ok(ascending)
    }

    /// Block companion matrix of the normalized polynomial: identity blocks on
    /// the block superdiagonal, `[−A_r … −A_1]` in the last block row.
    pub fn companion(&self) -> Result<DMatrix<f64>> {
        let p = self.normalized()?;
        let m = p.block_size();
        let r = p.degree();
        let n = r * m;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..r.saturating_sub(1) {
            a.view_mut((i * m, (i + 1) * m), (m, m)).fill_with_identity();
        }
        for j in 0..r {
            // block column j multiplies λ^j, i.e. coefficient A_{r−j}
            a.view_mut(((r - 1) * m, j * m), (m, m)).copy_from(&(-p.coeff(r - j)));
        }
        Ok(a)
    }

    /// All `r·m` latent roots, as eigenvalues of the block companion matrix,
    /// sorted by ascending real part then ascending imaginary part.
    pub fn latent_roots(&self) -> Result<Vec<C64>> {
        let a = self.companion()?;
        Ok(linalg::eigvals_real(&a))
    }

    /// Scale for null-space decisions at `s`: `Σ ‖A_i‖₂ |s|^{r−i}`, the
    /// denominator of the normwise backward error of a latent pair.
    pub fn null_scale(&self, s: C64) -> f64 {
        let z = s.norm();
        let mut acc = 0.0;
        for ci in &self.coeffs {
            acc = acc * z + linalg::norm2(ci);
        }
        acc.max(f64::MIN_POSITIVE)
    }

    /// Latent vector(s) at `root`. The right vector is always computed; the
    /// left vector (null vector of `A(root)ᵀ`) only for [`Side::Left`].
    pub fn latent_vector(&self, root: C64, side: Side, tau_null: f64) -> Result<LatentPair> {
        self.require_square()?;
        let value = self.evaluate(root);
        let tol = tau_null * self.null_scale(root);
        let right = linalg::smallest_right_singular(&value);
        let (sigma, p) = right.into_iter().next().expect("square, non-empty");
        if sigma > tol {
            return Err(Error::NotALatentRoot { root, sigma, tol });
        }
        let left = match side {
            Side::Right => None,
            Side::Left => {
                let (s_left, q) = linalg::smallest_right_singular(&value.transpose())
                    .into_iter()
                    .next()
                    .expect("square, non-empty");
                if s_left > tol {
                    return Err(Error::NotALatentRoot { root, sigma: s_left, tol });
                }
                Some(q)
            }
        };
        let residual = (&value * &p).norm();
        Ok(LatentPair { root, right: p, left, residual })
    }

    /// Orthonormal basis of the numerical right null space of `A(root)`.
    pub fn null_directions(&self, root: C64, tau_null: f64) -> Vec<CVec> {
        let value = self.evaluate(root);
        let tol = tau_null * self.null_scale(root);
        linalg::smallest_right_singular(&value)
            .into_iter()
            .take_while(|(s, _)| *s <= tol)
            .map(|(_, v)| v)
            .collect()
    }

    /// Latent roots with right latent vectors. Numerically repeated roots are
    /// snapped to their mean, share one null-space computation and receive one
    /// vector per independent null direction.
    pub fn latent_structure(&self, tau_null: f64) -> Result<LatentStructure> {
        let roots = self.latent_roots()?;
        let mut pairs = Vec::with_capacity(roots.len());
        let mut defective = Vec::new();
        let mut used = vec![false; roots.len()];
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let cluster: Vec<usize> = (i..roots.len())
                .filter(|&j| !used[j] && (roots[j] - roots[i]).norm() <= 1e-6 * roots[i].norm().max(1.0))
                .collect();
            for &j in &cluster {
                used[j] = true;
            }
            let centre = cluster.iter().map(|&j| roots[j]).sum::<C64>() / cluster.len() as f64;
            let centre = if centre.im.abs() <= 1e-12 * centre.norm().max(1.0) {
                C64::new(centre.re, 0.0)
            } else {
                centre
            };
            let dirs = self.null_directions(centre, tau_null);
            if dirs.is_empty() {
                let sigma = linalg::smallest_right_singular(&self.evaluate(centre))[0].0;
                return Err(Error::NotALatentRoot { root: centre, sigma, tol: tau_null * self.null_scale(centre) });
            }
            if dirs.len() < cluster.len() {
                defective.push(centre);
            }
            for k in 0..cluster.len() {
                let p = dirs[k.min(dirs.len() - 1)].clone();
                let residual = (self.evaluate(centre) * &p).norm();
                pairs.push(LatentPair { root: centre, right: p, left: None, residual });
            }
        }
        Ok(LatentStructure { pairs, defective })
    }

    /// Divides by `λI − X`: right side gives `P = Q(λ)(λI − X) + ℜ`, left side
    /// `P = (λI − X)S(λ) + Γ`. Works for rectangular coefficients as long as
    /// `X` matches the multiplied dimension.
    pub fn block_divide(&self, x: &DMatrix<f64>, side: Side) -> Result<BlockDivisionResult> {
        self.check_operand(x.shape(), side)?;
        if self.degree() == 0 {
            return Err(Error::InvalidInput("division needs degree at least 1".into()));
        }
        let mut running = self.coeffs[0].clone();
        let mut quotient = Vec::with_capacity(self.degree());
        for ci in &self.coeffs[1..] {
            let next = match side {
                Side::Right => ci + &running * x,
                Side::Left => ci + x * &running,
            };
            quotient.push(std::mem::replace(&mut running, next));
        }
        Ok(BlockDivisionResult { quotient: Self::new(quotient)?, remainder: running, side })
    }

    /// Right value `Σ A_i X^{r−i}` or left value `Σ X^{r−i} A_i`.
    pub fn block_value(&self, x: &DMatrix<f64>, side: Side) -> Result<DMatrix<f64>> {
        self.check_operand(x.shape(), side)?;
        let mut acc = self.coeffs[0].clone();
        for ci in &self.coeffs[1..] {
            acc = match side {
                Side::Right => &acc * x + ci,
                Side::Left => x * &acc + ci,
            };
        }
        Ok(acc)
    }

    /// [`Self::block_value`] for a complex operand.
    pub fn block_value_complex(&self, x: &CMat, side: Side) -> Result<CMat> {
        self.check_operand(x.shape(), side)?;
        let mut acc = linalg::complexify(&self.coeffs[0]);
        for ci in &self.coeffs[1..] {
            let c = linalg::complexify(ci);
            acc = match side {
                Side::Right => &acc * x + c,
                Side::Left => x * &acc + c,
            };
        }
        Ok(acc)
    }

    fn check_operand(&self, shape: (usize, usize), side: Side) -> Result<()> {
        let (rows, cols) = self.shape();
        let want = match side {
            Side::Right => cols,
            Side::Left => rows,
        };
        if shape != (want, want) {
            return Err(Error::DimensionMismatch(format!(
                "operand is {}x{}, expected {want}x{want}",
                shape.0, shape.1
            )));
        }
        Ok(())
    }
}

/// Roots of a scalar polynomial (leading coefficient first) via its companion
/// matrix. Used to cross-check latent roots against the determinant.
pub fn scalar_roots(coeffs: &[f64]) -> Vec<C64> {
    let first = coeffs.iter().position(|c| *c != 0.0);
    let Some(first) = first else { return Vec::new() };
    let c = &coeffs[first..];
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(0, i)] = -c[i + 1] / c[0];
    }
    linalg::eigvals_real(&comp)
}
