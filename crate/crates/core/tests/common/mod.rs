#![allow(dead_code)]

use std::path::PathBuf;

use blockred::document::{self, SystemModel};
use blockred::linalg::{self, C64};
use blockred::sysrep::{StateSpace, Subsystem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load_model(name: &str) -> SystemModel {
    let text = std::fs::read_to_string(data_path(name)).unwrap();
    document::parse(&text).unwrap().model
}

pub fn load_state_space(name: &str) -> StateSpace {
    load_model(name).to_state_space().unwrap()
}

/// The four reference solvents, slowest first.
pub fn reference_solvents() -> Vec<DMatrix<f64>> {
    match load_model("reference_solvents.sys") {
        SystemModel::BlockDiagonal(bd) => bd.blocks().iter().map(|b| b.r.clone()).collect(),
        other => panic!("unexpected representation {:?}", other.representation()),
    }
}

/// The reference dominant-pole list, duplicates included.
pub fn reference_poles() -> Vec<C64> {
    std::fs::read_to_string(data_path("dominant_poles.txt"))
        .unwrap()
        .lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            C64::new(v[0], v[1])
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Well-conditioned random matrix (identity plus a bounded perturbation).
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let t = DMatrix::identity(n, n) + random_matrix(rng, n, n) * 0.6;
        if linalg::cond2_real(&t) < 50.0 {
            return t;
        }
    }
}

/// Dense random stable system: a random matrix shifted so that its
/// rightmost eigenvalue sits at `−margin`.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpace {
    let mut a = random_matrix(rng, n, n) * 2.0;
    let right = linalg::eigvals_real(&a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = rng.gen_range(0.1..1.0);
    for i in 0..n {
        a[(i, i)] -= right + margin;
    }
    StateSpace::strictly_proper(a, random_matrix(rng, n, m), random_matrix(rng, p, n)).unwrap()
}

/// Real `2×2` matrix with eigenvalues `re ± i·im`, in a random basis.
pub fn oscillator_block(rng: &mut ChaCha8Rng, re: f64, im: f64) -> DMatrix<f64> {
    let core = DMatrix::from_row_slice(2, 2, &[re, im, -im, re]);
    let t = random_invertible(rng, 2);
    &t * core * t.try_inverse().unwrap()
}

/// Real `m×m` matrix with the given conjugate-closed spectrum, in a random basis.
pub fn block_with_spectrum(rng: &mut ChaCha8Rng, spectrum: &[C64]) -> DMatrix<f64> {
    let m = spectrum.len();
    let mut core = DMatrix::zeros(m, m);
    let mut i = 0;
    while i < m {
        let z = spectrum[i];
        if z.im.abs() > 0.0 {
            core[(i, i)] = z.re;
            core[(i + 1, i + 1)] = z.re;
            core[(i, i + 1)] = z.im.abs();
            core[(i + 1, i)] = -z.im.abs();
            i += 2;
        } else {
            core[(i, i)] = z.re;
            i += 1;
        }
    }
    let t = random_invertible(rng, m);
    &t * core * t.try_inverse().unwrap()
}

/// Block-diagonal system with unit-scale inputs and outputs per block.
pub fn block_system(blocks: &[Subsystem]) -> StateSpace {
    let bd = blockred::sysrep::BlockDiagonalRealization::new(blocks.to_vec(), DMatrix::zeros(blocks[0].c.nrows(), blocks[0].b.ncols())).unwrap();
    blockred::sysrep::recompose(&bd)
}

/// `r` random stable oscillators (`m = p = 2`) with distinct real parts in
/// `[−2, −0.5]`; block `suppressed` has its output matrix divided by 100
/// after every block was scaled to a unit largest Hankel singular value.
pub fn planted_system(rng: &mut ChaCha8Rng, r: usize, suppressed: usize) -> (StateSpace, Vec<Vec<C64>>) {
    let mut reals: Vec<f64> = Vec::with_capacity(r);
    while reals.len() < r {
        let x = rng.gen_range(-2.0..-0.5);
        if reals.iter().all(|y: &f64| (x - y).abs() > 0.15) {
            reals.push(x);
        }
    }
    let mut blocks = Vec::with_capacity(r);
    let mut spectra = Vec::with_capacity(r);
    for (i, &re) in reals.iter().enumerate() {
        let im = rng.gen_range(0.5..5.0);
        let rb = oscillator_block(rng, re, im);
        let b = random_invertible(rng, 2);
        let c = random_invertible(rng, 2);
        let single = StateSpace::strictly_proper(rb.clone(), b.clone(), c.clone()).unwrap();
        let top = blockred::metrics::hankel_singular_values(&single).unwrap().sigmas[0];
        let mut c = c / top;
        if i == suppressed {
            c /= 100.0;
        }
        spectra.push(linalg::eigvals_real(&rb));
        blocks.push(Subsystem { r: rb, b, c });
    }
    (block_system(&blocks), spectra)
}

/// `(1/π)∫₀^∞ ‖G(iω)‖²_F dω` by composite Simpson on `ω = tan θ`.
pub fn h2_quadrature(sys: &StateSpace, intervals: usize) -> f64 {
    use blockred::sysrep::TransferFunction;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let h = half_pi / intervals as f64;
    let f = |theta: f64| -> f64 {
        if theta >= half_pi {
            return 0.0;
        }
        let w = theta.tan();
        let g = sys.transfer_eval(C64::new(0.0, w)).unwrap();
        g.norm_squared() / theta.cos().powi(2)
    };
    let mut acc = f(0.0) + f(half_pi);
    for k in 1..intervals {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (acc * h / 3.0 / std::f64::consts::PI).sqrt()
}

/// Kronecker-form solve of `AX + XAᵀ + W = 0`.
pub fn lyapunov_kronecker(a: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = nalgebra::DVector::from_iterator(n * n, (-w).iter().copied());
    let x = k.lu().solve(&rhs).unwrap();
    DMatrix::from_column_slice(n, n, x.as_slice())
}
