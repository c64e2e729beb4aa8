//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use spcirc::brauer_weingarten::{twirl, BrauerGroup};
use spcirc::circuit::{apply, brick_bonds, build_bricklayer, StateVector};
use spcirc::group_sampler::sample_sp;
use spcirc::{DenseOperator, RngStream};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// GUE-like matrix with `E|X_ij|^2 = 1/dim`.
pub fn random_hermitian(dim: usize, rng: &mut RngStream) -> DenseOperator {
    let s = (0.5 / dim as f64).sqrt();
    let g: Vec<Complex64> = (0..dim * dim)
        .map(|_| c(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s))
        .collect();
    DenseOperator::from_fn(dim, |r, k| g[r * dim + k] + g[k * dim + r].conj())
}

pub fn random_state(dim: usize, rng: &mut RngStream) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Average of `U^(x)2 X U^dagger(x)2` over `count` Haar symplectic samples.
pub fn mc_twirl_sp(x: &DenseOperator, d: usize, count: usize, rng: &mut RngStream) -> DenseOperator {
    let mut acc = DenseOperator::zeros(d * d);
    for _ in 0..count {
        let u = sample_sp(d, rng).unwrap();
        let uu = u.kron(&u);
        acc = acc.add(&(&(&uu * x) * &uu.adjoint()));
    }
    acc.scale(1.0 / count as f64)
}

fn pauli(k: usize) -> DenseOperator {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let m = match k {
        0 => [one, o, o, one],
        1 => [o, one, one, o],
        2 => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        _ => [one, o, o, -one],
    };
    DenseOperator::from_fn(2, |r, s| m[2 * r + s])
}

/// `M[p'][p]`: coefficient of `P' (x) P'` in the block twirl of `P (x) P`, two-qubit Paulis `p = 4a + b`.
pub fn pauli_pair_block(group: BrauerGroup) -> Vec<Vec<f64>> {
    let two: Vec<DenseOperator> = (0..16).map(|p| pauli(p / 4).kron(&pauli(p % 4))).collect();
    let pp: Vec<DenseOperator> = two.iter().map(|p| p.kron(p)).collect();
    let mut m = vec![vec![0.0; 16]; 16];
    for p in 0..16 {
        let out = twirl(&pp[p], 2, 4, group).unwrap().to_dense().unwrap();
        for q in 0..16 {
            m[q][p] = pp[q].hs_inner(&out).re / 16.0;
        }
    }
    m
}

/// `z` after `layers` brick layers, propagated in the `4^n` space of `P (x) P` operators.
///
/// Each block twirl is the orthogonal projector onto a commutant spanned by
/// `P (x) P` combinations, so projecting `|0><0|^(x)2` onto `(II + ZZ)/4` per
/// qubit first leaves the result unchanged.
pub fn dense_pauli_pair_collision(n: usize, layers: usize) -> f64 {
    let sp = pauli_pair_block(BrauerGroup::Sp);
    let o = pauli_pair_block(BrauerGroup::O);
    let dim = 1usize << (2 * n);
    let mut v = vec![0.0; dim];
    // Only I and Z (digits 0 and 3) per qubit, each with weight 1/4.
    for idx in 0..1usize << n {
        let mut k = 0;
        for q in 0..n {
            k = 4 * k + if (idx >> (n - 1 - q)) & 1 == 1 { 3 } else { 0 };
        }
        v[k] = 0.25f64.powi(n as i32);
    }
    for _ in 0..layers {
        for (a, _) in brick_bonds(n) {
            let m = if a == 0 { &sp } else { &o };
            let inner = 1usize << (2 * (n - a - 2));
            let mut w = vec![0.0; dim];
            for outer in 0..dim / (16 * inner) {
                for i in 0..inner {
                    let base = outer * 16 * inner + i;
                    for r in 0..16 {
                        w[base + r * inner] = (0..16).map(|s| m[r][s] * v[base + s * inner]).sum();
                    }
                }
            }
            v = w;
        }
    }
    // Tr[(P (x) P) sum_b |bb><bb|] is 2 for I and Z, 0 for X and Y.
    (0..dim)
        .map(|k| {
            let mut f = 1.0;
            let mut kk = k;
            for _ in 0..n {
                let digit = kk % 4;
                kk /= 4;
                f *= if digit == 0 || digit == 3 { 2.0 } else { 0.0 };
            }
            f * v[k]
        })
        .sum()
}

/// Monte Carlo `E[sum_x p_U(x)^2]` over random brick circuits, with its standard error.
pub fn mc_collision(n: usize, layers: usize, count: usize, seed: u64) -> (f64, f64) {
    use rayon::prelude::*;
    let root = RngStream::new(seed, 0);
    let vals: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.substream(i as u64);
            let circ = build_bricklayer(n, layers, &mut rng).unwrap();
            let out = apply(&circ, &StateVector::zero(n).unwrap()).unwrap();
            out.probabilities().iter().map(|p| p * p).sum()
        })
        .collect();
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}
