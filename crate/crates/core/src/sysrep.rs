//! System representations: state space, right matrix fraction `N(s)D(s)⁻¹`,
//! and the block-decoupled realization produced by a complete solvent set.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::matpoly::MatrixPolynomial;
use crate::solvents::CompleteSolventSet;

/// Default singularity threshold shared by the transformations.
pub const DEFAULT_EPS_SING: f64 = 1e-10;

/// `ẋ = Ax + Bu, y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("A is {}x{}, must be square", a.nrows(), a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!("C has {} columns, expected {n}", c.ncols())));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        if [&a, &b, &c, &d].iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// Strictly proper system (`D = 0`).
    pub fn strictly_proper(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let d = DMatrix::zeros(c.nrows(), b.ncols());
        Self::new(a, b, c, d)
    }

    /// Zero-order system whose transfer function is the constant `d`.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (p, m) = d.shape();
        Self { a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, m), c: DMatrix::zeros(p, 0), d }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// State dimension `n`.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    /// Input count `m`.
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    /// Output count `p`.
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Eigenvalues of `A`, sorted by real part.
    pub fn poles(&self) -> Vec<C64> {
        linalg::eigvals_real(&self.a)
    }

    /// `max Re eig(A) < 0`; trivially true without states.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|z| z.re < 0.0)
    }

    /// `(T⁻¹AT, T⁻¹B, CT, D)`.
    pub fn similarity(&self, t: &DMatrix<f64>) -> Result<Self> {
        let tinv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Linalg("similarity transform is singular".into()))?;
        Self::new(&tinv * &self.a * t, &tinv * &self.b, &self.c * t, self.d.clone())
    }

    pub fn with_feedthrough(&self, d: DMatrix<f64>) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), self.c.clone(), d)
    }
}

/// `G(s) = N(s)D(s)⁻¹ + F` with monic `D` and `deg N < deg D`.
#[derive(Debug, Clone, PartialEq)]
pub struct RightMfd {
    num: MatrixPolynomial,
    den: MatrixPolynomial,
    feedthrough: DMatrix<f64>,
}

impl RightMfd {
    /// Ingests a fraction. A non-monic denominator is normalized from the
    /// right (`D A_0⁻¹`, `N A_0⁻¹`); an improper numerator is split by right
    /// division, its constant quotient joining the feedthrough. Quotients of
    /// degree one or more are rejected.
    pub fn new(num: MatrixPolynomial, den: MatrixPolynomial, feedthrough: DMatrix<f64>) -> Result<Self> {
        if !den.is_square() {
            return Err(Error::DimensionMismatch("denominator blocks must be square".into()));
        }
        let m = den.block_size();
        let p = num.block_size();
        if num.shape().1 != m {
            return Err(Error::DimensionMismatch(format!("numerator blocks must have {m} columns")));
        }
        if feedthrough.shape() != (p, m) {
            return Err(Error::DimensionMismatch(format!("feedthrough must be {p}x{m}")));
        }
        if den.degree() == 0 {
            return Err(Error::InvalidInput("denominator degree must be at least 1".into()));
        }
        let (num, den) = if den.is_monic() {
            (num, den)
        } else {
            let lead = den.coeff(0);
            let k = linalg::cond2_real(lead);
            if !(k < crate::matpoly::MAX_LEADING_COND) {
                return Err(Error::SingularLeadingCoefficient(k));
            }
            let inv = lead.clone().try_inverse().ok_or(Error::SingularLeadingCoefficient(k))?;
            let mut dc: Vec<DMatrix<f64>> = den.coeffs().iter().map(|c| c * &inv).collect();
            dc[0] = DMatrix::identity(m, m);
            (num.scale_right(&inv)?, MatrixPolynomial::new(dc)?)
        };
        let r = den.degree();
        let num = num.trimmed();
        let mut feedthrough = feedthrough;
        let num = if num.degree() >= r {
            let (quotient, rem) = divide_right(&num, &den)?;
            if quotient.iter().take(quotient.len() - 1).any(|q| q.amax() != 0.0) {
                return Err(Error::ImproperFraction(format!(
                    "numerator degree {} exceeds denominator degree {r} by more than a constant",
                    num.degree()
                )));
            }
            feedthrough += quotient.last().expect("non-empty quotient");
            rem
        } else {
            num.coeffs().to_vec()
        };
        // pad to exactly r coefficients: N_0 λ^{r−1} + … + N_{r−1}
        let mut padded = vec![DMatrix::zeros(p, m); r - num.len()];
        padded.extend(num);
        Ok(Self { num: MatrixPolynomial::new(padded)?, den, feedthrough })
    }

    pub fn num(&self) -> &MatrixPolynomial {
        &self.num
    }
    pub fn den(&self) -> &MatrixPolynomial {
        &self.den
    }
    pub fn feedthrough(&self) -> &DMatrix<f64> {
        &self.feedthrough
    }
    pub fn inputs(&self) -> usize {
        self.den.block_size()
    }
    pub fn outputs(&self) -> usize {
        self.num.block_size()
    }
    /// McMillan-style order of the controller realization, `r·m`.
    pub fn order(&self) -> usize {
        self.den.degree() * self.den.block_size()
    }
}

/// Right division `N = Q·D + Rem` by a monic `D`. Returns leading-first
/// quotient coefficients and the `r` remainder coefficients.
fn divide_right(num: &MatrixPolynomial, den: &MatrixPolynomial) -> Result<(Vec<DMatrix<f64>>, Vec<DMatrix<f64>>)> {
    let d = num.degree();
    let r = den.degree();
    let mut rem: Vec<DMatrix<f64>> = num.coeffs().to_vec();
    let mut quotient = Vec::with_capacity(d - r + 1);
    for k in 0..=(d - r) {
        let q = rem[k].clone();
        for j in 0..=r {
            rem[k + j] -= &q * den.coeff(j);
        }
        quotient.push(q);
    }
    Ok((quotient, rem[(d - r + 1)..].to_vec()))
}

/// Triples `(R_i, B_i, C_i)` of a block-decoupled realization plus the
/// untouched feedthrough.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    pub r: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl Subsystem {
    pub fn order(&self) -> usize {
        self.r.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        linalg::eigvals_real(&self.r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalRealization {
    blocks: Vec<Subsystem>,
    feedthrough: DMatrix<f64>,
}

impl BlockDiagonalRealization {
    pub fn new(blocks: Vec<Subsystem>, feedthrough: DMatrix<f64>) -> Result<Self> {
        let (p, m) = feedthrough.shape();
        for (i, blk) in blocks.iter().enumerate() {
            let k = blk.r.nrows();
            if !blk.r.is_square() || blk.b.shape() != (k, m) || blk.c.shape() != (p, k) {
                return Err(Error::DimensionMismatch(format!("block {} has inconsistent dimensions", i + 1)));
            }
        }
        Ok(Self { blocks, feedthrough })
    }

    pub fn blocks(&self) -> &[Subsystem] {
        &self.blocks
    }
    pub fn feedthrough(&self) -> &DMatrix<f64> {
        &self.feedthrough
    }
    pub fn order(&self) -> usize {
        self.blocks.iter().map(Subsystem::order).sum()
    }

    /// Realization holding only the listed blocks (in the given order).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self { blocks: indices.iter().map(|&i| self.blocks[i].clone()).collect(), feedthrough: self.feedthrough.clone() }
    }

    /// Same blocks with a zero feedthrough.
    pub fn without_feedthrough(&self) -> Self {
        Self { blocks: self.blocks.clone(), feedthrough: DMatrix::zeros(self.feedthrough.nrows(), self.feedthrough.ncols()) }
    }
}

/// Block controller canonical realization of `N D⁻¹ + F`.
pub fn controller_canonical(f: &RightMfd) -> Result<StateSpace> {
    if !f.den.is_monic() {
        return Err(Error::NotMonic);
    }
    let m = f.inputs();
    let p = f.outputs();
    let r = f.den.degree();
    let n = r * m;
    let a = f.den.companion()?;
    let mut b = DMatrix::zeros(n, m);
    b.view_mut(((r - 1) * m, 0), (m, m)).fill_with_identity();
    let mut c = DMatrix::zeros(p, n);
    for j in 0..r {
        // block column j carries the coefficient of λ^j
        c.view_mut((0, j * m), (p, m)).copy_from(f.num.coeff(r - 1 - j));
    }
    StateSpace::new(a, b, c, f.feedthrough.clone())
}

/// The similarity taking `sys` to block controller form, and the denominator
/// coefficients `[A_1, …, A_r]` read off the block controllability relation
/// `A^r B + A^{r−1} B A_1 + … + B A_r = 0`.
pub fn controller_transform(sys: &StateSpace, eps_sing: f64) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let n = sys.order();
    let m = sys.inputs();
    if m == 0 || n % m != 0 {
        return Err(Error::IndivisibleDimensions { n, m });
    }
    let r = n / m;
    let mut krylov = DMatrix::zeros(n, n);
    let mut power = sys.b.clone();
    for i in 0..r {
        krylov.view_mut((0, i * m), (n, m)).copy_from(&power);
        power = &sys.a * &power;
    }
    let k = linalg::cond2_real(&krylov);
    if !(k < 1.0 / eps_sing) {
        return Err(Error::NotBlockControllable(k));
    }
    // krylov · [A_r; A_{r−1}; …; A_1] = −A^r B
    let stacked = linalg::solve_real(&krylov, &(-power)).ok_or(Error::NotBlockControllable(k))?;
    let coeff = |i: usize| stacked.view(((r - i) * m, 0), (m, m)).into_owned(); // A_i
    let tail: Vec<DMatrix<f64>> = (1..=r).map(coeff).collect();
    // T_r = B, T_{j−1} = A T_j + B A_{r−j+1}
    let mut t = DMatrix::zeros(n, n);
    let mut tj = sys.b.clone();
    t.view_mut((0, (r - 1) * m), (n, m)).copy_from(&tj);
    for j in (2..=r).rev() {
        tj = &sys.a * &tj + &sys.b * &tail[r - j];
        t.view_mut((0, (j - 2) * m), (n, m)).copy_from(&tj);
    }
    Ok((t, tail))
}

/// Reads a right fraction off the block controller form of `sys`.
pub fn mfd_from_state_space(sys: &StateSpace) -> Result<RightMfd> {
    mfd_from_state_space_with(sys, DEFAULT_EPS_SING)
}

pub fn mfd_from_state_space_with(sys: &StateSpace, eps_sing: f64) -> Result<RightMfd> {
    let (t, tail) = controller_transform(sys, eps_sing)?;
    let m = sys.inputs();
    let r = tail.len();
    let den = MatrixPolynomial::monic(m, tail)?;
    let cc = &sys.c * &t;
    let num_coeffs: Vec<DMatrix<f64>> = (0..r).rev().map(|j| cc.view((0, j * m), (sys.outputs(), m)).into_owned()).collect();
    let num = MatrixPolynomial::new(num_coeffs)?;
    RightMfd::new(num, den, sys.d.clone())
}

/// Applies `X_C = V_R X_R` to a block controller form: returns the decoupled
/// blocks `(R_i, B_i, C_i)`.
pub fn block_diagonalize(sys: &StateSpace, set: &CompleteSolventSet) -> Result<BlockDiagonalRealization> {
    let m = set.block_size();
    let r = set.len();
    let n = sys.order();
    if r * m != n || sys.inputs() != m {
        return Err(Error::DimensionMismatch(format!(
            "{r} solvents of size {m} cannot decouple an order-{n} system with {} inputs",
            sys.inputs()
        )));
    }
    let v = set.vandermonde();
    let k = set.vandermonde_condition();
    if !(k < 1.0 / DEFAULT_EPS_SING) {
        return Err(Error::SingularVandermonde(k));
    }
    let lu = v.clone().lu();
    let a_r = lu.solve(&(&sys.a * v)).ok_or(Error::SingularVandermonde(k))?;
    let b_r = lu.solve(&sys.b).ok_or(Error::SingularVandermonde(k))?;
    let c_r = &sys.c * v;
    let mut off = 0.0_f64;
    for i in 0..r {
        for j in 0..r {
            if i != j {
                off = off.max(a_r.view((i * m, j * m), (m, m)).norm());
            }
        }
    }
    let tol = 1e-8 * sys.a.norm().max(1.0);
    if off > tol {
        return Err(Error::NotDecoupled { residue: off, tol });
    }
    let blocks = (0..r)
        .map(|i| Subsystem {
            r: a_r.view((i * m, i * m), (m, m)).into_owned(),
            b: b_r.view((i * m, 0), (m, m)).into_owned(),
            c: c_r.view((0, i * m), (sys.outputs(), m)).into_owned(),
        })
        .collect();
    BlockDiagonalRealization::new(blocks, sys.d.clone())
}

/// `A = blockdiag(R_i)`, `B = [B_1; …; B_r]`, `C = [C_1 … C_r]`, `D = F`.
pub fn recompose(bd: &BlockDiagonalRealization) -> StateSpace {
    let (p, m) = bd.feedthrough.shape();
    let n = bd.order();
    let a = linalg::block_diag(&bd.blocks.iter().map(|b| &b.r).collect::<Vec<_>>());
    let mut b = DMatrix::zeros(n, m);
    let mut c = DMatrix::zeros(p, n);
    let mut off = 0;
    for blk in &bd.blocks {
        let k = blk.order();
        b.view_mut((off, 0), (k, m)).copy_from(&blk.b);
        c.view_mut((0, off), (p, k)).copy_from(&blk.c);
        off += k;
    }
    StateSpace { a, b, c, d: bd.feedthrough.clone() }
}

/// Frequency-domain evaluation shared by every representation.
pub trait TransferFunction {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    /// `G(s)`; fails with [`Error::ProbeAtPole`] when `s` is numerically a pole.
    fn transfer_eval(&self, s: C64) -> Result<CMat>;
}

fn resolvent_apply(a: &DMatrix<f64>, rhs: &DMatrix<f64>, s: C64) -> Result<CMat> {
    let n = a.nrows();
    let mut shifted = linalg::complexify(a) * C64::new(-1.0, 0.0);
    for i in 0..n {
        shifted[(i, i)] += s;
    }
    linalg::solve_c(&shifted, &linalg::complexify(rhs), 1.0 / DEFAULT_EPS_SING).ok_or(Error::ProbeAtPole(s))
}

impl TransferFunction for StateSpace {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }
    fn outputs(&self) -> usize {
        self.c.nrows()
    }
    fn transfer_eval(&self, s: C64) -> Result<CMat> {
        let x = resolvent_apply(&self.a, &self.b, s)?;
        Ok(linalg::complexify(&self.c) * x + linalg::complexify(&self.d))
    }
}

impl TransferFunction for RightMfd {
    fn inputs(&self) -> usize {
        RightMfd::inputs(self)
    }
    fn outputs(&self) -> usize {
        RightMfd::outputs(self)
    }
    fn transfer_eval(&self, s: C64) -> Result<CMat> {
        let d = self.den.evaluate(s);
        let n = self.num.evaluate(s);
        // X D = N  <=>  Dᵀ Xᵀ = Nᵀ
        let xt = linalg::solve_c(&d.transpose(), &n.transpose(), 1.0 / DEFAULT_EPS_SING).ok_or(Error::ProbeAtPole(s))?;
        Ok(xt.transpose() + linalg::complexify(&self.feedthrough))
    }
}

impl TransferFunction for BlockDiagonalRealization {
    fn inputs(&self) -> usize {
        self.feedthrough.ncols()
    }
    fn outputs(&self) -> usize {
        self.feedthrough.nrows()
    }
    fn transfer_eval(&self, s: C64) -> Result<CMat> {
        let mut g = linalg::complexify(&self.feedthrough);
        for blk in &self.blocks {
            g += linalg::complexify(&blk.c) * resolvent_apply(&blk.r, &blk.b, s)?;
        }
        Ok(g)
    }
}

/// Probe points for representation-equivalence checks: 10 log-spaced radii
/// in `[0.1, 10]` on each of the rays `θ = π/7` and `θ = π/3`.
pub fn probe_points() -> Vec<C64> {
    let mut pts = Vec::with_capacity(20);
    for theta in [std::f64::consts::PI / 7.0, std::f64::consts::PI / 3.0] {
        for k in 0..10 {
            let radius = 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0);
            pts.push(C64::from_polar(radius, theta));
        }
    }
    pts
}

/// Largest relative deviation `‖G₁(s) − G₂(s)‖_F / max(‖G₁(s)‖_F, tiny)` over the probes.
pub fn max_relative_deviation(g1: &dyn TransferFunction, g2: &dyn TransferFunction, probes: &[C64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &s in probes {
        let a = g1.transfer_eval(s)?;
        let b = g2.transfer_eval(s)?;
        let scale = a.norm().max(b.norm()).max(1e-300);
        worst = worst.max((a - b).norm() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::solvents::{validate_complete_set, SolventOptions};

    fn eye(m: usize) -> DMatrix<f64> {
        DMatrix::identity(m, m)
    }

    fn quadratic_mfd() -> RightMfd {
        let den = MatrixPolynomial::monic(2, vec![eye(2) * 3.0, eye(2) * 2.0]).unwrap();
        let num = MatrixPolynomial::new(vec![eye(2)]).unwrap();
        RightMfd::new(num, den, DMatrix::zeros(2, 2)).unwrap()
    }

    #[test]
    fn controller_form_of_block_quadratic() {
        let sys = controller_canonical(&quadratic_mfd()).unwrap();
        let want_a = DMatrix::from_row_slice(
            4,
            4,
            &[0., 0., 1., 0., 0., 0., 0., 1., -2., 0., -3., 0., 0., -2., 0., -3.],
        );
        assert_eq!(sys.a(), &want_a);
        assert_eq!(sys.b().view((2, 0), (2, 2)).into_owned(), eye(2));
        assert_eq!(sys.c(), &DMatrix::from_row_slice(2, 4, &[1., 0., 0., 0., 0., 1., 0., 0.]));
    }

    #[test]
    fn scalar_first_order() {
        let den = MatrixPolynomial::new(vec![eye(1), eye(1)]).unwrap();
        let num = MatrixPolynomial::new(vec![eye(1)]).unwrap();
        let sys = controller_canonical(&RightMfd::new(num, den, DMatrix::zeros(1, 1)).unwrap()).unwrap();
        assert_eq!((sys.a()[(0, 0)], sys.b()[(0, 0)], sys.c()[(0, 0)]), (-1.0, 1.0, 1.0));
    }

    #[test]
    fn scalar_chain_to_mfd() {
        let a = DMatrix::from_row_slice(2, 2, &[0., 1., -2., -3.]);
        let sys = StateSpace::strictly_proper(a, DMatrix::from_column_slice(2, 1, &[0., 1.]), DMatrix::from_row_slice(1, 2, &[1., 0.])).unwrap();
        let f = mfd_from_state_space(&sys).unwrap();
        assert!((f.den().coeff(1)[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((f.den().coeff(2)[(0, 0)] - 2.0).abs() < 1e-12);
        assert!(f.num().coeff(0)[(0, 0)].abs() < 1e-12);
        assert!((f.num().coeff(1)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn improper_fraction_split_and_rejected() {
        let den = MatrixPolynomial::new(vec![eye(1), eye(1)]).unwrap(); // s + 1
        let num = MatrixPolynomial::new(vec![eye(1) * 2.0, eye(1) * 3.0]).unwrap(); // 2s + 3
        let f = RightMfd::new(num, den.clone(), DMatrix::zeros(1, 1)).unwrap();
        assert!((f.feedthrough()[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((f.num().coeff(0)[(0, 0)] - 1.0).abs() < 1e-15);
        let num = MatrixPolynomial::new(vec![eye(1), eye(1), eye(1)]).unwrap();
        assert!(matches!(RightMfd::new(num, den, DMatrix::zeros(1, 1)), Err(Error::ImproperFraction(_))));
    }

    #[test]
    fn non_monic_denominator_is_normalized() {
        let den = MatrixPolynomial::new(vec![eye(1) * 2.0, eye(1) * 2.0]).unwrap(); // 2s + 2
        let num = MatrixPolynomial::new(vec![eye(1) * 4.0]).unwrap();
        let f = RightMfd::new(num, den, DMatrix::zeros(1, 1)).unwrap();
        let g = f.transfer_eval(c(0.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn decoupling_quadratic() {
        let f = quadratic_mfd();
        let sys = controller_canonical(&f).unwrap();
        let set = validate_complete_set(f.den(), &[-eye(2), -eye(2) * 2.0], &SolventOptions::default()).unwrap();
        let bd = block_diagonalize(&sys, &set).unwrap();
        assert!((&bd.blocks()[0].r + eye(2)).amax() < 1e-12);
        assert!((&bd.blocks()[1].r + eye(2) * 2.0).amax() < 1e-12);
        assert!(max_relative_deviation(&sys, &bd, &probe_points()).unwrap() < 1e-12);
    }

    #[test]
    fn single_solvent_is_identity_transform() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, -2.6, -1.6]);
        let den = MatrixPolynomial::linear(&r).unwrap();
        let f = RightMfd::new(MatrixPolynomial::new(vec![eye(2)]).unwrap(), den.clone(), DMatrix::zeros(2, 2)).unwrap();
        let sys = controller_canonical(&f).unwrap();
        let set = validate_complete_set(&den, std::slice::from_ref(&r), &SolventOptions::default()).unwrap();
        let bd = block_diagonalize(&sys, &set).unwrap();
        assert!((&bd.blocks()[0].r - &r).amax() < 1e-14);
    }

    #[test]
    fn transfer_examples() {
        let sys = StateSpace::strictly_proper(eye(1) * -1.0, eye(1), eye(1)).unwrap();
        assert!((sys.transfer_eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sys.transfer_eval(c(1e9, 0.0)).unwrap().norm() < 1e-6);
        assert!(matches!(sys.transfer_eval(c(-1.0, 0.0)), Err(Error::ProbeAtPole(_))));
    }

    #[test]
    fn recompose_edge_cases() {
        let blk = Subsystem { r: eye(1) * -3.0, b: eye(1) * 2.0, c: eye(1) };
        let bd = BlockDiagonalRealization::new(vec![blk], eye(1) * 0.5).unwrap();
        let sys = recompose(&bd);
        assert_eq!(sys.a()[(0, 0)], -3.0);
        assert_eq!(sys.d()[(0, 0)], 0.5);

        let empty = BlockDiagonalRealization::new(Vec::new(), eye(2) * 4.0).unwrap();
        let sys = recompose(&empty);
        assert_eq!(sys.order(), 0);
        let g = sys.transfer_eval(c(0.3, 0.7)).unwrap();
        assert!((g - linalg::complexify(&(eye(2) * 4.0))).norm() < 1e-15);
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            StateSpace::strictly_proper(eye(2), DMatrix::zeros(3, 1), DMatrix::zeros(1, 2)),
            Err(Error::DimensionMismatch(_))
        ));
        let sys = StateSpace::strictly_proper(eye(3), DMatrix::zeros(3, 2), DMatrix::zeros(1, 3)).unwrap();
        assert!(matches!(mfd_from_state_space(&sys), Err(Error::IndivisibleDimensions { .. })));
        let sys = StateSpace::strictly_proper(eye(2), DMatrix::from_column_slice(2, 1, &[1.0, 1.0]), DMatrix::zeros(1, 2)).unwrap();
        assert!(matches!(mfd_from_state_space(&sys), Err(Error::NotBlockControllable(_))));
    }
}
