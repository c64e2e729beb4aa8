//! Acceptance checks. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use spcirc::brauer_weingarten::{gram, represent, twirl, BrauerGroup};
use spcirc::circuit::{build_bricklayer, random_rotation_circuit, to_unitary, RotationFamily};
use spcirc::gp_stats::{anticoncentration_check, concentration_tail, run_gp_experiment, sigma_grid, StateSpec};
use spcirc::lie_closure::{closure, prop2_generators, theorem1_generators};
use spcirc::moment_propagator::{
    collision_after, depth_sweep, derive_transfer, haar_collision, log_fit, BlockKind, DEFAULT_MAX_LAYERS,
};
use spcirc::{DenseOperator, Pauli, PauliString, RngStream};

const CLOSURE_RUNTIME: Duration = Duration::from_secs(60);
const GRAM_DENSE_TOL: f64 = 1e-9;
const TWIRL_MC_TOL: f64 = 5e-2;
const TWIRL_MC_SIZES: [usize; 3] = [100, 1_000, 10_000];
/// Accepted log-log slope of the Monte Carlo error against N.
const TWIRL_SLOPE_RANGE: (f64, f64) = (-0.75, -0.25);
const TAU_TOL: f64 = 1e-12;
const SYMPLECTIC_TOL: f64 = 1e-9;
const PROP2_VIOLATION: f64 = 0.1;
const PROP2_MIN_VIOLATIONS: usize = 99;
const GP_SIGMAS: f64 = 3.0;
const GP_KURTOSIS: (f64, f64) = (0.9, 1.1);
const GP_RUNTIME: Duration = Duration::from_secs(600);
const ANTI_MIN_PROB: f64 = 0.125;
const Z_SIGMAS: f64 = 3.0;
const DENSE_Z_TOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 1e-8;
const FIT_MIN_R2: f64 = 0.9;
const SWEEP_RUNTIME: Duration = Duration::from_secs(1800);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_theorem1_closure() -> Outcome {
    let start = Instant::now();
    let dims: Vec<usize> = (2..=5).map(|n| closure(&theorem1_generators(n).unwrap()).unwrap().dimension).collect();
    let elapsed = start.elapsed();
    outcome(dims == [10, 36, 136, 528] && elapsed < CLOSURE_RUNTIME, format!("dims {dims:?} in {elapsed:.2?}"))
}

fn c2_prop2_closure() -> Outcome {
    let dims: Vec<usize> = (2..=4).map(|n| closure(&prop2_generators(n).unwrap()).unwrap().dimension).collect();
    outcome(dims == [15, 63, 255], format!("dims {dims:?}, expected [15, 63, 255]"))
}

fn c3_gram() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [4usize, 8, 16] {
        let w = gram(2, d, BrauerGroup::Sp).unwrap();
        let df = d as f64;
        let want = [[df * df, df, -df], [df, df * df, df], [-df, df, df * df]];
        let exact = (0..3).all(|r| (0..3).all(|c| w.entries[(r, c)] == want[r][c]));
        ok &= exact;
        notes.push(format!("d={d} exact={exact}"));
    }
    let w = gram(2, 4, BrauerGroup::Sp).unwrap();
    let reps: Vec<DenseOperator> = w.diagrams.iter().map(|s| represent(s, 4, BrauerGroup::Sp).unwrap()).collect();
    let mut dev: f64 = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            dev = dev.max((reps[r].hs_inner(&reps[c]).re - w.entries[(r, c)]).abs());
        }
    }
    ok &= dev <= GRAM_DENSE_TOL;
    notes.push(format!("dense deviation {dev:.1e}"));
    outcome(ok, notes.join(", "))
}

fn c4_twirl_mc() -> Outcome {
    let d = 4;
    let root = RngStream::new(400, 0);
    // errors[k][i]: max-entry error of X_i at the k-th sample size.
    let per_x: Vec<Vec<f64>> = (0..10u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.substream(i);
            let x = common::random_hermitian(d * d, &mut rng);
            let exact = twirl(&x, 2, d, BrauerGroup::Sp).unwrap().to_dense().unwrap();
            TWIRL_MC_SIZES
                .iter()
                .map(|&n| exact.distance_max(&common::mc_twirl_sp(&x, d, n, &mut rng)))
                .collect()
        })
        .collect();
    let mean_err: Vec<f64> =
        (0..TWIRL_MC_SIZES.len()).map(|k| per_x.iter().map(|e| e[k]).sum::<f64>() / per_x.len() as f64).collect();
    let worst_final = per_x.iter().map(|e| e[2]).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = TWIRL_MC_SIZES.iter().zip(&mean_err).map(|(&n, &e)| (n as f64, e.ln())).collect();
    // ln(err) = slope * ln(N) + b
    let slope = log_fit(&pts).unwrap().a;
    let decreasing = mean_err.windows(2).all(|w| w[1] < w[0]);
    let pass = worst_final <= TWIRL_MC_TOL
        && decreasing
        && (TWIRL_SLOPE_RANGE.0..=TWIRL_SLOPE_RANGE.1).contains(&slope);
    outcome(
        pass,
        format!("worst error at N=1e4 {worst_final:.3e}, mean errors {mean_err:.3?}, slope {slope:.3}"),
    )
}

fn c5_tau() -> Outcome {
    let t = derive_transfer(BlockKind::Sp2).unwrap();
    let dev = t.reference_deviation().unwrap();
    outcome(dev <= TAU_TOL, format!("max deviation {dev:.1e} (transpose, label order {:?})", t.labels))
}

fn c6_membership() -> Outcome {
    let root = RngStream::new(600, 0);
    let defects: Vec<f64> = (0..2000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.substream(i);
            let n = 2 + (i as usize / 2) % 5;
            let depth = 1 + (i as usize / 10) % 4;
            let c = if i % 2 == 0 {
                random_rotation_circuit(RotationFamily::Theorem1, n, depth, &mut rng).unwrap()
            } else {
                build_bricklayer(n, depth, &mut rng).unwrap()
            };
            to_unitary(&c).unwrap().symplectic_defect().unwrap()
        })
        .collect();
    let worst = defects.iter().copied().fold(0.0, f64::max);
    let mut counts = Vec::new();
    for n in [2usize, 3] {
        let r = RngStream::new(601, n as u64);
        let violations = (0..100u64)
            .into_par_iter()
            .filter(|&i| {
                let c = random_rotation_circuit(RotationFamily::Prop2, n, 2, &mut r.substream(i)).unwrap();
                to_unitary(&c).unwrap().symplectic_defect().unwrap() > PROP2_VIOLATION
            })
            .count();
        counts.push((n, violations));
    }
    let pass = worst <= SYMPLECTIC_TOL && counts.iter().all(|&(_, v)| v >= PROP2_MIN_VIOLATIONS);
    outcome(pass, format!("worst defect {worst:.1e} over 2000 circuits; prop2 violations (n, count/100) {counts:?}"))
}

fn y2(n: usize) -> PauliString {
    PauliString::from_factors(n, &[(1, Pauli::Y)]).unwrap()
}

fn c7_gp() -> Outcome {
    let n = 8;
    let states = [StateSpec::basis(n, 0).unwrap(), StateSpec::pair(n, 0, 1 << (n - 2)).unwrap()];
    let start = Instant::now();
    let s = run_gp_experiment(&states, &y2(n), 10_000, &RngStream::new(1, 0)).unwrap().summary;
    let elapsed = start.elapsed();
    let mut ok = elapsed < GP_RUNTIME;
    let mut worst = (0.0f64, 0.0f64);
    for j in 0..2 {
        for k in 0..2 {
            let se = s.covariance_se[j][k];
            let z_large = (s.covariance[j][k] - s.overlap_covariance[j][k]).abs() / se;
            let z_exact = (s.covariance[j][k] - s.exact_covariance[j][k]).abs() / se;
            worst = (worst.0.max(z_large), worst.1.max(z_exact));
        }
    }
    ok &= worst.0 <= GP_SIGMAS && worst.1 <= GP_SIGMAS;
    let kurt_ok = s.fourth_moment_ratio.iter().all(|r| (GP_KURTOSIS.0..=GP_KURTOSIS.1).contains(r));
    ok &= kurt_ok;
    outcome(
        ok,
        format!(
            "max |dev|/SE vs Tr/d {:.2}, vs exact {:.2}; fourth-moment ratios {:.3?}; {elapsed:.2?}",
            worst.0, worst.1, s.fourth_moment_ratio
        ),
    )
}

fn c8_concentration() -> Outcome {
    let n = 8;
    let state = StateSpec::basis(n, 0).unwrap();
    let grid = sigma_grid(&state, 20, 0.25).unwrap();
    let t = concentration_tail(&state, &y2(n), 10_000, &grid, &RngStream::new(800, 0)).unwrap();
    let violations = t.rows.iter().filter(|r| r.empirical > r.moment_bound_t2).count();
    outcome(violations == 0, format!("{violations} violations over {} thresholds", t.rows.len()))
}

fn c9_anticoncentration() -> Outcome {
    let t = anticoncentration_check(6, 10_000, &[0.5], &RngStream::new(900, 0)).unwrap();
    let p = t.rows[0].empirical;
    let zdev = (t.z_empirical - t.z_haar).abs() / t.z_standard_error;
    outcome(
        p >= ANTI_MIN_PROB && zdev <= Z_SIGMAS,
        format!("Pr(p >= 0.5/d) = {p:.4}; z = {:.5} vs {:.5} ({zdev:.2} SE)", t.z_empirical, t.z_haar),
    )
}

fn c10_collision() -> Outcome {
    let start = Instant::now();
    let mut dense_dev: f64 = 0.0;
    for n in 2..=6 {
        for layers in 1..=4 {
            let z = collision_after(n, layers).unwrap();
            dense_dev = dense_dev.max((z - common::dense_pauli_pair_collision(n, layers)).abs());
        }
    }
    let fixed_dev = (2..=12)
        .into_par_iter()
        .map(|n| (collision_after(n, 200).unwrap() - haar_collision(n)).abs())
        .reduce(|| 0.0, f64::max);
    let sweep = depth_sweep(2..=14, 0.01, DEFAULT_MAX_LAYERS).unwrap();
    let stars: Vec<Option<usize>> = sweep.rows.iter().map(|r| r.n_l_star).collect();
    let pts: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .filter(|r| r.n >= 4)
        .filter_map(|r| r.n_l_star.map(|l| (r.n as f64, l as f64)))
        .collect();
    let fit = log_fit(&pts).unwrap();
    let elapsed = start.elapsed();
    let pass = dense_dev <= DENSE_Z_TOL
        && fixed_dev <= FIXED_POINT_TOL
        && sweep.nondecreasing
        && pts.len() == 11
        && fit.r_squared >= FIT_MIN_R2
        && elapsed < SWEEP_RUNTIME;
    outcome(
        pass,
        format!(
            "dense dev {dense_dev:.1e}, fixed-point dev {fixed_dev:.1e}, n_L* {stars:?}, R^2 {:.4}, {elapsed:.2?}",
            fit.r_squared
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 closure dimensions, universal set", c1_theorem1_closure),
        ("2 closure dimensions, local set", c2_prop2_closure),
        ("3 second-moment Gram matrix", c3_gram),
        ("4 twirl vs Monte Carlo", c4_twirl_mc),
        ("5 transfer matrix reproduction", c5_tau),
        ("6 symplectic membership of circuits", c6_membership),
        ("7 Gaussian-process covariance", c7_gp),
        ("8 concentration bound", c8_concentration),
        ("9 anti-concentration", c9_anticoncentration),
        ("10 collision-probability engine", c10_collision),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
