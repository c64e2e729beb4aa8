//! Dense complex matrices with group and algebra membership predicates.
//!
//! Binary container used by `read_matrices`/`write_matrices` (all integers
//! little-endian):
//!
//! ```text
//! bytes 0..4    magic  b"SPCM"
//! bytes 4..8    u32    format version (1)
//! bytes 8..16   u64    matrix count
//! bytes 16..24  u64    dimension d
//! then, per matrix, d*d entries in row-major order, each as (re: f64, im: f64)
//! ```

use std::io::{Read, Write};
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const MAGIC: &[u8; 4] = b"SPCM";
const FORMAT_VERSION: u32 = 1;

/// A `d x d` complex matrix plus the tolerance used by its predicates.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
    tolerance: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl DenseOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        Ok(DenseOperator { matrix, tolerance: DEFAULT_TOLERANCE })
    }

    pub(crate) fn wrap(matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        DenseOperator { matrix, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn zeros(d: usize) -> Self {
        Self::wrap(DMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self::wrap(DMatrix::identity(d, d))
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self::wrap(DMatrix::from_fn(d, d, f))
    }

    /// The block form `[[0, I], [-I, 0]]`, which equals `iY (x) I` when `d` is a power of two.
    pub fn omega(d: usize) -> Result<Self> {
        if d == 0 || d % 2 == 1 {
            return Err(Error::Domain(format!("symplectic form needs even d, got {d}")));
        }
        let h = d / 2;
        Ok(Self::from_fn(d, |r, col| {
            if r < h && col == r + h {
                c(1.0)
            } else if r >= h && col + h == r {
                c(-1.0)
            } else {
                c(0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn get(&self, r: usize, col: usize) -> Complex64 {
        self.matrix[(r, col)]
    }

    pub fn set(&mut self, r: usize, col: usize, v: Complex64) {
        self.matrix[(r, col)] = v;
    }

    pub fn adjoint(&self) -> Self {
        self.derived(self.matrix.adjoint())
    }

    pub fn transpose(&self) -> Self {
        self.derived(self.matrix.transpose())
    }

    pub fn conj(&self) -> Self {
        self.derived(self.matrix.map(|z| z.conj()))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.derived(self.matrix.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.derived(self.matrix.map(|z| z * s))
    }

    pub fn add(&self, other: &DenseOperator) -> Self {
        self.derived(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &DenseOperator) -> Self {
        self.derived(&self.matrix - &other.matrix)
    }

    pub fn kron(&self, other: &DenseOperator) -> Self {
        self.derived(self.matrix.kronecker(&other.matrix))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Hilbert-Schmidt product `Tr[self^dagger other]`.
    pub fn hs_inner(&self, other: &DenseOperator) -> Complex64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance_max(&self, other: &DenseOperator) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> Complex64 {
        self.matrix.clone().determinant()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} for a {}x{} operator",
                v.len(),
                self.dim(),
                self.dim()
            )));
        }
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, x) in v.iter().enumerate() {
                acc += self.matrix[(r, col)] * x;
            }
            *o = acc;
        }
        Ok(out)
    }

    fn derived(&self, matrix: DMatrix<Complex64>) -> Self {
        DenseOperator { matrix, tolerance: self.tolerance }
    }

    /// `max |(U^dagger U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        defect_from_identity(&g)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= self.tolerance
    }

    pub fn is_hermitian(&self) -> bool {
        self.distance_max(&self.adjoint()) <= self.tolerance
    }

    /// Real and `Q^T Q = I`.
    pub fn is_orthogonal(&self) -> bool {
        if self.matrix.iter().any(|z| z.im.abs() > self.tolerance) {
            return false;
        }
        let g = self.matrix.transpose() * &self.matrix;
        defect_from_identity(&g) <= self.tolerance
    }

    /// `max |(M^T Omega M - Omega)_{ij}|`.
    pub fn symplectic_defect(&self) -> Result<f64> {
        let omega = Self::omega(self.dim())?;
        let lhs = self.matrix.transpose() * &omega.matrix * &self.matrix;
        Ok(self.derived(lhs).distance_max(&omega))
    }

    pub fn is_symplectic(&self) -> Result<bool> {
        Ok(self.symplectic_defect()? <= self.tolerance)
    }

    /// Anti-Hermitian with `M^T Omega + Omega M = 0`.
    pub fn is_in_sp_algebra_dense(&self) -> Result<bool> {
        let omega = Self::omega(self.dim())?;
        let m = &self.matrix;
        let rel = m.transpose() * &omega.matrix + &omega.matrix * m;
        let anti = m + m.adjoint();
        let rel_ok = rel.iter().all(|z| z.norm() <= self.tolerance);
        let anti_ok = anti.iter().all(|z| z.norm() <= self.tolerance);
        Ok(rel_ok && anti_ok)
    }
}

fn defect_from_identity(g: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for col in 0..g.ncols() {
            let target = if r == col { c(1.0) } else { c(0.0) };
            worst = worst.max((g[(r, col)] - target).norm());
        }
    }
    worst
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator { matrix: &self.matrix * &rhs.matrix, tolerance: self.tolerance }
    }
}

pub fn write_matrices<W: Write>(mut w: W, mats: &[DenseOperator]) -> Result<()> {
    let d = mats.first().map_or(0, DenseOperator::dim);
    if mats.iter().any(|m| m.dim() != d) {
        return Err(Error::Dimension("matrices in one container must share a dimension".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(mats.len() as u64).to_le_bytes())?;
    w.write_all(&(d as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(d * d * 16);
    for m in mats {
        buf.clear();
        for r in 0..d {
            for col in 0..d {
                let z = m.matrix[(r, col)];
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_matrices<R: Read>(mut r: R) -> Result<Vec<DenseOperator>> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Parse("not a matrix container (bad magic)".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported container version {version}")));
    }
    let count = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; d * d * 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let m = DMatrix::from_fn(d, d, |row, col| {
            let k = (row * d + col) * 16;
            let re = f64::from_le_bytes(buf[k..k + 8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[k + 8..k + 16].try_into().unwrap());
            Complex64::new(re, im)
        });
        out.push(DenseOperator::from_matrix(m)?);
    }
    Ok(out)
}
