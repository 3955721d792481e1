//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use blockred::dompoles::{self, DominantPole};
use blockred::linalg::{self, CMat, C64};
use blockred::matpoly::Side;
use blockred::metrics::{self, HankelPower};
use blockred::reduce::{self, Tolerances};
use blockred::solvents::{self, SolventOptions};
use blockred::sysrep::{self, StateSpace, Subsystem, TransferFunction};
use nalgebra::DMatrix;
use rand::Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(limit: Duration, elapsed: Duration, mut o: Outcome) -> Outcome {
    if elapsed > limit {
        o.pass = false;
        o.detail = format!("{}; runtime {:.2?} over {:.0?}", o.detail, elapsed, limit);
    } else {
        o.detail = format!("{}; {:.2?}", o.detail, elapsed);
    }
    o
}

// 1 -------------------------------------------------------------------------

fn reference_solvent_eigenvalues() -> Outcome {
    const TOL: f64 = 1e-3;
    let want = [
        vec![C64::new(-0.8, 1.2), C64::new(-0.8, -1.2)],
        vec![C64::new(-5.7, 0.0), C64::new(-4.75, 0.0)],
        vec![C64::new(-8.25, 11.0651), C64::new(-8.25, -11.0651)],
        vec![C64::new(-11.0557, 0.0), C64::new(-28.9443, 0.0)],
    ];
    let mut worst = 0.0_f64;
    for (r, w) in reference_solvents().iter().zip(&want) {
        worst = worst.max(linalg::multiset_distance(&linalg::eigvals_real(r), w));
    }
    outcome(worst <= TOL, format!("max eigenvalue deviation {worst:.2e} (tol {TOL:e})"))
}

// 2 -------------------------------------------------------------------------

fn complete_set_closure() -> Outcome {
    const SOLVENT_TOL: f64 = 1e-6;
    const ROOT_TOL: f64 = 1e-6;
    let set = reference_solvents();
    let d = match solvents::denominator_from_solvents(&set, 1e-10) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("denominator reconstruction failed: {e}")),
    };
    let mut worst_res = 0.0_f64;
    let mut all_solvents = true;
    for r in &set {
        let (ok, res) = solvents::is_solvent(&d, r, Side::Right, SOLVENT_TOL).unwrap();
        all_solvents &= ok;
        worst_res = worst_res.max(res / d.coeff_norm().max(1.0));
    }
    let v = solvents::block_vandermonde(&set).unwrap();
    let cond = linalg::cond2_real(&v);
    let roots = d.latent_roots().unwrap();
    let union: Vec<C64> = set.iter().flat_map(|r| linalg::eigvals_real(r)).collect();
    let dist = linalg::multiset_distance(&roots, &union);
    let validated = solvents::validate_complete_set(&d, &set, &SolventOptions::default()).is_ok();
    outcome(
        all_solvents && cond < 1e10 && roots.len() == 8 && dist <= ROOT_TOL && validated,
        format!("max relative solvent residual {worst_res:.2e}, cond(V_R) {cond:.3e}, latent-root deviation {dist:.2e}"),
    )
}

// 3 -------------------------------------------------------------------------

fn solvent_matching() -> Outcome {
    let set = reference_solvents();
    let d = solvents::denominator_from_solvents(&set, 1e-10).unwrap();
    let complete = solvents::validate_complete_set(&d, &set, &SolventOptions::default()).unwrap();
    let (keep, discard) = reduce::match_solvents_to_poles(&complete, &reference_poles(), 0.1);
    let keep1: Vec<usize> = keep.iter().map(|i| i + 1).collect();
    let discard1: Vec<usize> = discard.iter().map(|i| i + 1).collect();
    outcome(keep == [0, 1, 3] && discard == [2], format!("keep R{keep1:?}, discard R{discard1:?}"))
}

// 4 -------------------------------------------------------------------------

fn end_to_end_dominant() -> Outcome {
    const REFERENCE_RE: f64 = 0.0021;
    const RE_BAND: f64 = 0.005;
    let sys = load_state_space("power_network.sys");
    let mut lines = Vec::new();
    let mut pass = false;
    for power in [HankelPower::Four, HankelPower::Two] {
        let tol = Tolerances { hankel_power: power, ..Tolerances::default() };
        match reduce::reduce_dominant(&sys, &tol, None) {
            Ok((red, rep)) => {
                let ok = red.order() == 6 && rep.re_value <= 0.01 && (rep.re_value - REFERENCE_RE).abs() <= RE_BAND;
                pass |= ok;
                // what the rejected drop would have cost
                let rejected = if rep.eliminated.is_empty() {
                    discard_cost(&sys, &tol).map(|(order, re)| format!(", matched drop -> order {order} RE {re:.4}")).unwrap_or_default()
                } else {
                    String::new()
                };
                lines.push(format!("p={}: order {} RE {:.4}{rejected}", power.exponent(), red.order(), rep.re_value));
            }
            Err(e) => lines.push(format!("p={}: {e}", power.exponent())),
        }
    }
    outcome(pass, format!("{} (reference RE {REFERENCE_RE} +/- {RE_BAND})", lines.join("; ")))
}

/// Order and RE of the matched drop that the pipeline rolled back.
fn discard_cost(sys: &StateSpace, tol: &Tolerances) -> Option<(usize, f64)> {
    let dec = reduce::decouple(sys, tol).ok()?;
    let poles: Vec<C64> = dompoles::dominant_poles(sys, 6, None).ok()?.iter().map(|p| p.lambda).collect();
    let (keep, discard) = reduce::match_solvents_to_poles(&dec.solvents, &poles, tol.match_tol);
    let kept = sysrep::recompose(&dec.blocks.select(&keep));
    let neglected = sysrep::recompose(&dec.blocks.select(&discard).without_feedthrough());
    let re = metrics::relative_error_re(sys, &neglected, tol.hankel_power).ok()?;
    Some((kept.order(), re))
}

// 5 -------------------------------------------------------------------------

fn planted_dominance() -> Outcome {
    const TRIALS: usize = 50;
    const REQUIRED: usize = 45;
    let mut rng = rng(5);
    let mut hits = 0;
    let mut misses = Vec::new();
    for trial in 0..TRIALS {
        let r = rng.gen_range(2..=4);
        let suppressed = rng.gen_range(0..r);
        let (sys, spectra) = planted_system(&mut rng, r, suppressed);
        let verdict = reduce::reduce_dominant(&sys, &Tolerances::default(), None).map(|(red, rep)| {
            let dropped: Vec<C64> = rep.eliminated.iter().flat_map(|e| e.eigenvalues.clone()).collect();
            let exact = rep.eliminated.len() == 1 && linalg::multiset_distance(&dropped, &spectra[suppressed]) < 1e-6;
            (exact && rep.re_value < 0.01 && red.order() == sys.order() - 2, rep.re_value)
        });
        match verdict {
            Ok((true, _)) => hits += 1,
            Ok((false, re)) => misses.push(format!("#{trial} RE {re:.3e}")),
            Err(e) => misses.push(format!("#{trial} {e}")),
        }
    }
    outcome(hits >= REQUIRED, format!("{hits}/{TRIALS} discarded exactly the suppressed block (need {REQUIRED}){}", if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }))
}

// 6 -------------------------------------------------------------------------

fn division_properties() -> Outcome {
    const TRIALS: usize = 200;
    const IDENTITY_TOL: f64 = 1e-10;
    const SOLVENT_TOL: f64 = 1e-6;
    let mut rng = rng(6);
    let probes = sysrep::probe_points();
    let mut failures = Vec::new();
    let mut worst_identity = 0.0_f64;
    let mut worst_value = 0.0_f64;
    for trial in 0..TRIALS {
        let m = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=4);
        // a polynomial with a known solvent `x_sol`, plus an arbitrary `x`
        let mut set: Vec<DMatrix<f64>> = Vec::with_capacity(r);
        let mut used: Vec<f64> = Vec::new();
        for _ in 0..r {
            let mut spectrum = Vec::with_capacity(m);
            while spectrum.len() < m {
                let x = rng.gen_range(-4.0..1.0);
                if used.iter().all(|u: &f64| (u - x).abs() > 0.2) {
                    used.push(x);
                    spectrum.push(C64::new(x, 0.0));
                }
            }
            set.push(block_with_spectrum(&mut rng, &spectrum));
        }
        let p = match solvents::denominator_from_solvents(&set, 1e-10) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("#{trial} {e}"));
                continue;
            }
        };
        let x = random_matrix(&mut rng, m, m) * 2.0;
        for side in [Side::Right, Side::Left] {
            for (operand, is_sol) in [(&set[0], side == Side::Right), (&x, false)] {
                let div = p.block_divide(operand, side).unwrap();
                let scale = p.coeff_norm().max(1.0);
                // P(s) = Q(s)(sI − X) + ℜ  or  (sI − X)S(s) + Γ
                for &s in &probes {
                    let mut lin = linalg::complexify(operand) * C64::new(-1.0, 0.0);
                    for i in 0..m {
                        lin[(i, i)] += s;
                    }
                    let q = div.quotient.evaluate(s);
                    let rem = linalg::complexify(&div.remainder);
                    let rebuilt: CMat = match side {
                        Side::Right => q * lin + rem,
                        Side::Left => lin * q + rem,
                    };
                    let direct = p.evaluate(s);
                    let rel = (&rebuilt - &direct).norm() / direct.norm().max(scale * s.norm().max(1.0).powi(r as i32));
                    worst_identity = worst_identity.max(rel);
                }
                let value = p.block_value(operand, side).unwrap();
                worst_value = worst_value.max((&value - &div.remainder).norm() / scale);
                let exact = div.remainder.norm() <= SOLVENT_TOL * scale;
                let (verdict, _) = solvents::is_solvent(&p, operand, side, SOLVENT_TOL).unwrap();
                if exact != verdict {
                    failures.push(format!("#{trial} exact-division/solvent disagreement"));
                }
                if is_sol && !verdict {
                    failures.push(format!("#{trial} planted solvent rejected"));
                }
            }
        }
    }
    let pass = failures.is_empty() && worst_identity <= IDENTITY_TOL && worst_value <= IDENTITY_TOL;
    outcome(
        pass,
        format!(
            "division identity {worst_identity:.2e}, remainder vs block value {worst_value:.2e} (tol {IDENTITY_TOL:e}){}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn gramian_identity() -> Outcome {
    const TRACE_TOL: f64 = 1e-8;
    const QUAD_TOL: f64 = 1e-3;
    let mut rng = rng(7);
    let mut worst_trace = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(1..=3);
        let p = rng.gen_range(1..=3);
        let sys = random_stable(&mut rng, n, m, p);
        let g = metrics::gramians(&sys).unwrap();
        let (tc, to) = metrics::gramian_traces(&sys, &g);
        worst_trace = worst_trace.max((tc - to).abs() / tc.abs().max(to.abs()));
    }
    let mut worst_quad = 0.0_f64;
    for _ in 0..10 {
        let n = rng.gen_range(2..=6);
        let sys = random_stable(&mut rng, n, 2, 2);
        let h2 = metrics::h2_norm(&sys).unwrap();
        let q = h2_quadrature(&sys, 40_000);
        worst_quad = worst_quad.max((h2 - q).abs() / q);
    }
    outcome(
        worst_trace <= TRACE_TOL && worst_quad <= QUAD_TOL,
        format!("trace mismatch {worst_trace:.2e} (tol {TRACE_TOL:e}), H2 vs quadrature {worst_quad:.2e} (tol {QUAD_TOL:e})"),
    )
}

// 8 -------------------------------------------------------------------------

/// Poles, residues and dominance from a dense eigendecomposition with left
/// vectors taken from the inverse eigenvector matrix.
fn oracle_poles(sys: &StateSpace) -> Vec<DominantPole> {
    let a = linalg::complexify(sys.a());
    let e = linalg::eigen(&a).unwrap();
    let winv = e.vectors.clone().try_inverse().unwrap();
    let b = linalg::complexify(sys.b());
    let c = linalg::complexify(sys.c());
    let poles = e
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let x = e.vectors.column(i).into_owned();
            let w = winv.row(i).into_owned();
            let residue = (&c * &x) * (&w * &b);
            let dominance = linalg::norm2_c(&residue) / lambda.re.abs();
            DominantPole { lambda, x, y: w.adjoint(), residue, dominance }
        })
        .collect();
    dompoles::dominance_order(poles)
}

fn dominant_pole_oracle() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut rng = rng(8);
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    for trial in 0..25 {
        let n = rng.gen_range(2..=8);
        let sys = random_stable(&mut rng, n, 2, 2);
        let got = match dompoles::dominant_poles(&sys, n, None) {
            Ok(g) => g,
            Err(e) => {
                failures.push(format!("#{trial} {e}"));
                continue;
            }
        };
        let want = oracle_poles(&sys);
        let gl: Vec<C64> = got.iter().map(|p| p.lambda).collect();
        let wl: Vec<C64> = want.iter().map(|p| p.lambda).collect();
        let d = linalg::multiset_distance(&gl, &wl);
        worst = worst.max(d / wl.iter().map(|z| z.norm()).fold(1.0, f64::max));
        // ordering: compare position by position, a conjugate pair counting once
        let key = |z: C64| C64::new(z.re, z.im.abs());
        let ordered = gl.len() == wl.len() && gl.iter().zip(&wl).all(|(g, w)| (key(*g) - key(*w)).norm() <= TOL * w.norm().max(1.0));
        if !ordered {
            failures.push(format!("#{trial} ordering differs"));
        }
    }
    outcome(
        failures.is_empty() && worst <= TOL,
        format!("max relative pole deviation {worst:.2e} (tol {TOL:e}){}", if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }),
    )
}

// 9 -------------------------------------------------------------------------

fn random_decouplable(rng: &mut rand_chacha::ChaCha8Rng) -> StateSpace {
    let m = rng.gen_range(1..=3);
    let r = rng.gen_range(1..=4);
    let p = rng.gen_range(1..=3);
    let mut used: Vec<f64> = Vec::new();
    let mut fresh = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let x = rng.gen_range(-5.0..-0.3);
        if used.iter().all(|u: &f64| (u - x).abs() > 0.3) {
            used.push(x);
            return x;
        }
    };
    let mut blocks = Vec::with_capacity(r);
    for _ in 0..r {
        let spectrum: Vec<C64> = match m {
            1 => vec![C64::new(fresh(rng), 0.0)],
            2 if rng.gen_bool(0.5) => {
                let (re, im) = (fresh(rng), rng.gen_range(0.5..3.0));
                vec![C64::new(re, im), C64::new(re, -im)]
            }
            2 => vec![C64::new(fresh(rng), 0.0), C64::new(fresh(rng), 0.0)],
            _ => {
                let (re, im) = (fresh(rng), rng.gen_range(0.5..3.0));
                vec![C64::new(re, im), C64::new(re, -im), C64::new(fresh(rng), 0.0)]
            }
        };
        blocks.push(Subsystem { r: block_with_spectrum(rng, &spectrum), b: random_matrix(rng, m, m), c: random_matrix(rng, p, m) });
    }
    let sys = block_system(&blocks);
    let t = random_invertible(rng, sys.order());
    sys.similarity(&t).unwrap()
}

fn representation_equivalence() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = rng(9);
    let probes = sysrep::probe_points();
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    for trial in 0..50 {
        let sys = random_decouplable(&mut rng);
        let run = || -> blockred::Result<f64> {
            let f = sysrep::mfd_from_state_space(&sys)?;
            let ctrl = sysrep::controller_canonical(&f)?;
            let dec = reduce::decouple(&sys, &Tolerances::default())?;
            let back = sysrep::recompose(&dec.blocks);
            let reps: [&dyn TransferFunction; 4] = [&f, &ctrl, &dec.blocks, &back];
            let mut w = 0.0_f64;
            for rep in reps {
                w = w.max(sysrep::max_relative_deviation(&sys, rep, &probes)?);
            }
            // and back again from the fraction's realization
            let f2 = sysrep::mfd_from_state_space(&ctrl)?;
            w = w.max(sysrep::max_relative_deviation(&f, &f2, &probes)?);
            Ok(w)
        };
        match run() {
            Ok(w) => worst = worst.max(w),
            Err(e) => failures.push(format!("#{trial} {e}")),
        }
    }
    outcome(
        failures.is_empty() && worst <= TOL,
        format!("max relative transfer deviation {worst:.2e} over 20 probes (tol {TOL:e}){}", if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }),
    )
}

// 10 ------------------------------------------------------------------------

fn re_boundaries() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut systems = vec![load_state_space("power_network.sys"), load_state_space("power_network_patched.sys")];
    let mut rng = rng(10);
    for _ in 0..5 {
        systems.push(random_stable(&mut rng, 6, 2, 2));
    }
    let mut worst_empty = 0.0_f64;
    let mut worst_full = 0.0_f64;
    for sys in &systems {
        let empty = StateSpace::static_gain(DMatrix::zeros(sys.outputs(), sys.inputs()));
        for power in [HankelPower::Four, HankelPower::Two] {
            worst_empty = worst_empty.max(metrics::relative_error_re(sys, &empty, power).unwrap().abs());
            worst_full = worst_full.max((metrics::relative_error_re(sys, sys, power).unwrap() - 1.0).abs());
        }
    }
    outcome(worst_empty <= TOL && worst_full <= TOL, format!("|RE(empty)| {worst_empty:.1e}, |RE(all) - 1| {worst_full:.1e} (tol {TOL:e})"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("reference solvent eigenvalues", 1, reference_solvent_eigenvalues),
        ("complete-set closure of the reference solvents", 1, complete_set_closure),
        ("solvent matching against the dominant-pole list", 1, solvent_matching),
        ("end-to-end dominant reduction of the power network", 10, end_to_end_dominant),
        ("planted-dominance discards the suppressed block", 60, planted_dominance),
        ("division and solvent properties", 30, division_properties),
        ("Gramian trace identity and H2 quadrature", 60, gramian_identity),
        ("dominant poles against dense eigendecomposition", 60, dominant_pole_oracle),
        ("representation equivalence", 60, representation_equivalence),
        ("RE boundary values", 60, re_boundaries),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let o = within(Duration::from_secs(*limit), start.elapsed(), o);
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
