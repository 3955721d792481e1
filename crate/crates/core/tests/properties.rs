mod common;

use blockred::document::{self, SystemDocument, SystemModel};
use blockred::dompoles;
use blockred::linalg::{self, C64};
use blockred::matpoly::MatrixPolynomial;
use blockred::metrics::{self, HankelPower};
use blockred::sysrep::{self, BlockDiagonalRealization, StateSpace, Subsystem, TransferFunction};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lyapunov_matches_kronecker_oracle(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = rng(seed);
        let sys = random_stable(&mut rng, n, 2, 1);
        let w = sys.b() * sys.b().transpose();
        let x = metrics::lyapunov_solve(sys.a(), &w).unwrap();
        let oracle = lyapunov_kronecker(sys.a(), &w);
        prop_assert!((&x - &oracle).norm() <= 1e-8 * oracle.norm().max(1e-300));
        let resid = (sys.a() * &x + &x * sys.a().transpose() + &w).norm();
        prop_assert!(resid <= 1e-8 * (linalg::norm2(sys.a()) * linalg::norm2(&x) + linalg::norm2(sys.b()).powi(2)));
        prop_assert!((&x - x.transpose()).amax() <= 1e-12 * x.amax().max(1e-300));
        prop_assert!(x.clone().symmetric_eigenvalues().min() >= -1e-10 * x.amax());
    }

    #[test]
    fn hankel_values_are_similarity_invariant(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng(seed);
        let sys = random_stable(&mut rng, n, 2, 2);
        let t = random_invertible(&mut rng, n);
        let a = metrics::hankel_singular_values(&sys).unwrap().sigmas;
        let b = metrics::hankel_singular_values(&sys.similarity(&t).unwrap()).unwrap().sigmas;
        prop_assert!(a.windows(2).all(|w| w[0] >= w[1]));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * a[0].max(1e-300));
        }
    }

    #[test]
    fn h2_error_is_symmetric_and_zero_on_self(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = random_stable(&mut rng, 4, 2, 2);
        let h = random_stable(&mut rng, 3, 2, 2);
        let e1 = metrics::h2_error(&g, &h).unwrap();
        let e2 = metrics::h2_error(&h, &g).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
        prop_assert!(metrics::h2_error(&g, &g).unwrap() <= 1e-6 * metrics::h2_norm(&g).unwrap());
    }

    #[test]
    fn re_grows_with_the_neglected_part(seed in any::<u64>(), r in 2usize..=4) {
        // blocks on disjoint channels, so the Hankel spectrum of any subset
        // is the union of the per-block spectra
        let mut rng = rng(seed);
        let blocks: Vec<Subsystem> = (0..r)
            .map(|i| {
                let re = rng.gen_range(-3.0..-0.2);
                let im = rng.gen_range(0.5..5.0);
                let mut b = DMatrix::zeros(2, 2 * r);
                let mut c = DMatrix::zeros(2 * r, 2);
                b.view_mut((0, 2 * i), (2, 2)).copy_from(&random_invertible(&mut rng, 2));
                c.view_mut((2 * i, 0), (2, 2)).copy_from(&random_invertible(&mut rng, 2));
                Subsystem { r: oscillator_block(&mut rng, re, im), b, c }
            })
            .collect();
        let sys = block_system(&blocks);
        let mut prev = 0.0;
        for j in 1..=r {
            let neglected = block_system(&blocks[..j]);
            let re = metrics::relative_error_re(&sys, &neglected, HankelPower::Four).unwrap();
            prop_assert!(re >= prev - 1e-12, "RE dropped from {prev} to {re}");
            prop_assert!(re <= 1.0 + 1e-10);
            prev = re;
        }
        prop_assert!((prev - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn residues_rebuild_the_transfer_function(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng(seed);
        let sys = random_stable(&mut rng, n, 2, 2);
        let poles = dompoles::all_poles_dense(&sys).unwrap();
        for s in sysrep::probe_points() {
            let direct = sys.transfer_eval(s).unwrap();
            let mut sum = linalg::complexify(sys.d());
            for p in &poles {
                sum += &p.residue / (s - p.lambda);
            }
            prop_assert!((&sum - &direct).norm() <= 1e-8 * direct.norm().max(1e-300));
        }
    }

    #[test]
    fn dominant_poles_match_dense_top_k(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng(seed);
        let sys = random_stable(&mut rng, n, 2, 2);
        let k = rng.gen_range(1..=n);
        let got = dompoles::dominant_poles(&sys, k, None).unwrap();
        let want = dompoles::truncate_conjugate_closed(dompoles::all_poles_dense(&sys).unwrap(), k);
        let gl: Vec<C64> = got.iter().map(|p| p.lambda).collect();
        let wl: Vec<C64> = want.iter().map(|p| p.lambda).collect();
        prop_assert!(linalg::multiset_distance(&gl, &wl) <= 1e-8 * wl.iter().map(|z| z.norm()).fold(1.0, f64::max));
        // converged eigenpairs, conjugate closure, and no duplicates
        let a = linalg::complexify(sys.a());
        let scale = 1e-8 * sys.a().norm();
        for p in &got {
            prop_assert!((&a * &p.x - &p.x * p.lambda).norm() <= scale * p.x.norm());
            prop_assert!((a.adjoint() * &p.y - &p.y * p.lambda.conj()).norm() <= scale * p.y.norm());
        }
        let conj: Vec<C64> = gl.iter().map(|z| z.conj()).collect();
        prop_assert!(linalg::multiset_distance(&gl, &conj) <= 1e-8 * wl.iter().map(|z| z.norm()).fold(1.0, f64::max));
        for i in 0..gl.len() {
            for j in (i + 1)..gl.len() {
                prop_assert!((gl[i] - gl[j]).norm() > 1e-8);
            }
        }
    }

    #[test]
    fn determinant_polynomial_matches_direct_determinant(seed in any::<u64>(), m in 1usize..=3, r in 1usize..=4) {
        let mut rng = rng(seed);
        let tail: Vec<DMatrix<f64>> = (0..r).map(|_| random_matrix(&mut rng, m, m) * 3.0).collect();
        let p = MatrixPolynomial::monic(m, tail).unwrap();
        let coeffs = p.determinant_polynomial().unwrap();
        prop_assert_eq!(coeffs.len(), r * m + 1);
        for s in sysrep::probe_points() {
            let direct = p.evaluate(s).determinant();
            let horner = coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * s + c);
            prop_assert!((direct - horner).norm() <= 1e-8 * direct.norm().max(s.norm().powi((r * m) as i32)).max(1.0));
        }
    }

    #[test]
    fn kept_and_discarded_blocks_sum_to_the_original(seed in any::<u64>(), r in 2usize..=4) {
        let mut rng = rng(seed);
        let (sys, _) = planted_system(&mut rng, r, 0);
        let blocks = blockred::reduce::decouple(&sys, &Default::default()).unwrap().blocks;
        let cut = rng.gen_range(0..=r);
        let keep: Vec<usize> = (0..cut).collect();
        let discard: Vec<usize> = (cut..r).collect();
        let kept = sysrep::recompose(&blocks.select(&keep));
        let dropped = sysrep::recompose(&blocks.select(&discard).without_feedthrough());
        for s in sysrep::probe_points() {
            let g = sys.transfer_eval(s).unwrap();
            let sum = kept.transfer_eval(s).unwrap() + dropped.transfer_eval(s).unwrap();
            prop_assert!((&sum - &g).norm() <= 1e-8 * g.norm());
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), n in 0usize..=6, m in 1usize..=3, p in 1usize..=3) {
        let mut rng = rng(seed);
        let sys = if n == 0 {
            StateSpace::static_gain(random_matrix(&mut rng, p, m))
        } else {
            let s = random_stable(&mut rng, n, m, p);
            s.with_feedthrough(random_matrix(&mut rng, p, m) * 1e-7).unwrap()
        };
        let doc = SystemDocument { name: Some("random".into()), description: None, model: SystemModel::StateSpace(sys) };
        let text = document::write(&doc);
        let back = document::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(document::write(&back), text);
    }
}

#[test]
fn block_diagonal_documents_round_trip() {
    let mut rng = rng(1);
    let (sys, _) = planted_system(&mut rng, 3, 1);
    let bd = blockred::reduce::decouple(&sys, &Default::default()).unwrap().blocks;
    let doc = SystemDocument::new(SystemModel::BlockDiagonal(bd.clone()));
    let back = document::parse(&document::write(&doc)).unwrap();
    assert_eq!(back.model, SystemModel::BlockDiagonal(bd));
}

#[test]
fn fraction_documents_round_trip() {
    let sys = load_state_space("power_network_patched.sys");
    let f = sysrep::mfd_from_state_space(&sys).unwrap();
    let doc = SystemDocument::new(SystemModel::RightMfd(f.clone()));
    let back = document::parse(&document::write(&doc)).unwrap();
    assert_eq!(back.model, SystemModel::RightMfd(f));
}

#[test]
fn empty_block_diagonal_is_a_static_gain() {
    let bd = BlockDiagonalRealization::new(Vec::new(), DMatrix::identity(2, 2)).unwrap();
    let g = bd.transfer_eval(C64::new(0.0, 1.0)).unwrap();
    assert!((g - linalg::complexify(&DMatrix::identity(2, 2))).norm() < 1e-15);
}
