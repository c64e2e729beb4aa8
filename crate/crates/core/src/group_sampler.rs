//! Haar samplers for SP(d/2), O(d), SO(d) and U(d).
//!
//! All samplers factor a Gaussian matrix with a QR decomposition and fix the
//! gauge by making the diagonal of `R` real and positive. The symplectic
//! sampler works in the interleaved basis where a quaternion
//! `a + bi + cj + dk` is the block `[[a+bi, c+di], [-c+di, a-bi]]`, then
//! conjugates by the permutation `e_{2i} -> e_i`, `e_{2i+1} -> e_{i+d/2}` so the
//! result preserves the block form `Omega = [[0, I], [-I, 0]]`.
//!
//! In the interleaved basis the columns of any symplectic unitary come in
//! pairs `(v, J conj(v))` with `J = diag([[0,-1],[1,0]], ...)`.
//! [`SymplecticFrameSampler`] uses that to push a handful of pure states
//! through a Haar symplectic unitary without ever forming the `d x d` matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest dimension accepted by the dense samplers.
pub const DENSE_SAMPLE_MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Sp,
    O,
    So,
    U,
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" => Ok(Group::Sp),
            "o" => Ok(Group::O),
            "so" => Ok(Group::So),
            "u" => Ok(Group::U),
            other => Err(Error::Parse(format!("unknown group {other:?}"))),
        }
    }
}

pub fn sample_group(group: Group, d: usize, rng: &mut RngStream) -> Result<DenseOperator> {
    match group {
        Group::Sp => sample_sp(d, rng),
        Group::O => sample_orthogonal(d, rng, false),
        Group::So => sample_orthogonal(d, rng, true),
        Group::U => sample_unitary(d, rng),
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if d > DENSE_SAMPLE_MAX_DIM {
        return Err(Error::capacity("dense Haar sample (dimension)", d, DENSE_SAMPLE_MAX_DIM));
    }
    Ok(())
}

fn normal(rng: &mut RngStream) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut RngStream) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// `Q diag(r_ii / |r_ii|)` from the QR factors of `m`, so that `R` has a positive diagonal.
fn gauge_fixed_q(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        if norm > 0.0 {
            col *= rkk / norm;
        }
    }
    q
}

pub fn sample_unitary(d: usize, rng: &mut RngStream) -> Result<DenseOperator> {
    check_dim(d)?;
    let z = DMatrix::from_fn(d, d, |_, _| complex_normal(rng));
    Ok(DenseOperator::wrap(gauge_fixed_q(z)))
}

pub fn sample_orthogonal(d: usize, rng: &mut RngStream, special: bool) -> Result<DenseOperator> {
    check_dim(d)?;
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r[(k, k)] < 0.0 {
            col *= -1.0;
        }
    }
    if special && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(DenseOperator::wrap(q.map(|x| Complex64::new(x, 0.0))))
}

/// Interleaved complex image of a `(d/2) x (d/2)` standard quaternionic Gaussian matrix.
fn quaternionic_ginibre(h: usize, rng: &mut RngStream) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2 * h, 2 * h);
    for r in 0..h {
        for s in 0..h {
            let (a, b, c, dd) = (normal(rng), normal(rng), normal(rng), normal(rng));
            m[(2 * r, 2 * s)] = Complex64::new(a, b);
            m[(2 * r, 2 * s + 1)] = Complex64::new(c, dd);
            m[(2 * r + 1, 2 * s)] = Complex64::new(-c, dd);
            m[(2 * r + 1, 2 * s + 1)] = Complex64::new(a, -b);
        }
    }
    m
}

/// Block index of interleaved index `k` (`2i -> i`, `2i+1 -> i + h`).
fn block_index(k: usize, h: usize) -> usize {
    if k % 2 == 0 {
        k / 2
    } else {
        k / 2 + h
    }
}

fn interleaved_index(b: usize, h: usize) -> usize {
    if b < h {
        2 * b
    } else {
        2 * (b - h) + 1
    }
}

/// Haar-random element of SP(d/2) in the block convention `S^T Omega S = Omega`.
pub fn sample_sp(d: usize, rng: &mut RngStream) -> Result<DenseOperator> {
    if d % 2 == 1 {
        return Err(Error::Domain(format!("SP(d/2) needs even d, got {d}")));
    }
    check_dim(d)?;
    let h = d / 2;
    let q = gauge_fixed_q(quaternionic_ginibre(h, rng));
    let s = DMatrix::from_fn(d, d, |r, c| q[(interleaved_index(r, h), interleaved_index(c, h))]);
    Ok(DenseOperator::wrap(s))
}

type Column = Vec<Complex64>;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `J conj(v)` in interleaved coordinates.
fn partner(v: &[Complex64]) -> Column {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for i in 0..v.len() / 2 {
        out[2 * i] = -v[2 * i + 1].conj();
        out[2 * i + 1] = v[2 * i].conj();
    }
    out
}

/// Extends a quaternionic orthonormal frame by `v` (and its partner); returns false if `v` is already spanned.
fn extend_frame(frame: &mut Vec<Column>, v: &[Complex64]) -> bool {
    let mut w = v.to_vec();
    // Two passes of classical Gram-Schmidt keep the frame orthonormal to rounding.
    for _ in 0..2 {
        for f in frame.iter() {
            let a = inner(f, &w);
            for (wi, fi) in w.iter_mut().zip(f) {
                *wi -= a * fi;
            }
        }
    }
    let norm = inner(&w, &w).re.sqrt();
    let scale: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    if norm <= 1e-10 * scale {
        return false;
    }
    for wi in w.iter_mut() {
        *wi /= norm;
    }
    let p = partner(&w);
    frame.push(w);
    frame.push(p);
    true
}

/// Samples `U psi_j` for Haar `U` in SP(d/2) and a fixed list of pure states.
///
/// The states' span is embedded in a quaternionic frame `F` with coordinates
/// `c_j = F^dagger psi_j`. For Haar `U`, `U F` has the law of the first
/// columns of a Haar symplectic matrix, i.e. of the quaternionic Gram-Schmidt
/// image of Gaussian columns. Cost per sample is `O(d k^2)` for a frame of
/// `k` columns rather than `O(d^3)`.
#[derive(Clone, Debug)]
pub struct SymplecticFrameSampler {
    d: usize,
    rank: usize,
    coords: Vec<Column>,
}

impl SymplecticFrameSampler {
    /// States are given in computational-basis (Kronecker) order.
    pub fn new(states: &[Vec<Complex64>]) -> Result<Self> {
        let d = states.first().map_or(0, Vec::len);
        if d == 0 || d % 2 == 1 {
            return Err(Error::Domain(format!("states must have positive even length, got {d}")));
        }
        if states.iter().any(|s| s.len() != d) {
            return Err(Error::Dimension("states must share a dimension".into()));
        }
        let h = d / 2;
        let interleaved: Vec<Column> = states
            .iter()
            .map(|s| (0..d).map(|k| s[block_index(k, h)]).collect())
            .collect();
        let mut frame = Vec::new();
        for v in &interleaved {
            extend_frame(&mut frame, v);
        }
        let coords = interleaved
            .iter()
            .map(|v| frame.iter().map(|f| inner(f, v)).collect())
            .collect();
        Ok(SymplecticFrameSampler { d, rank: frame.len() / 2, coords })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Quaternionic rank of the states' span (frame has twice as many columns).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// One joint draw of `(U psi_1, ..., U psi_m)`, in Kronecker order.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<Column> {
        let d = self.d;
        let h = d / 2;
        let mut g: Vec<Column> = Vec::with_capacity(2 * self.rank);
        while g.len() < 2 * self.rank {
            let z: Column = (0..d).map(|_| complex_normal(rng)).collect();
            extend_frame(&mut g, &z);
        }
        self.coords
            .iter()
            .map(|c| {
                let mut out = vec![Complex64::new(0.0, 0.0); d];
                for (gk, ck) in g.iter().zip(c) {
                    for (k, x) in gk.iter().enumerate() {
                        out[block_index(k, h)] += x * ck;
                    }
                }
                out
            })
            .collect()
    }
}
