//! Exact second moments of brick-layer circuits in a reduced label basis.
//!
//! Each qubit carries a label from `{I, S, B}` acting on its two copies,
//!
//! ```text
//! I = 1 (x) 1,   S = XX + YY + ZZ,   B = XX - YY + ZZ,
//! ```
//!
//! with qubit 0 restricted to `{I, S}`. A label vector of length `2 * 3^(n-1)`
//! holds the coefficients of `E[rho_U (x) rho_U]` in the product labels,
//! indexed in mixed radix with qubit 0 most significant.
//!
//! The block twirls map product labels to product labels. Transfer matrices
//! are derived here from the dense twirl and act on column vectors:
//! `T[(i, j)]` is the coefficient of label `i` in the twirl of label `j`.
//!
//! A layer applies the bonds `(0,1), (2,3), ...` and then `(1,2), (3,4), ...`,
//! with a symplectic block on the bond touching qubit 0 and orthogonal
//! blocks elsewhere.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::brauer_weingarten::{twirl, BrauerGroup};
use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Largest supported register (`2 * 3^15` coefficients).
pub const MAX_QUBITS: usize = 16;

pub const DEFAULT_MAX_LAYERS: usize = 400;

const EXPANSION_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    I,
    S,
    B,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::I, Label::S, Label::B];

    pub fn symbol(self) -> char {
        match self {
            Label::I => 'I',
            Label::S => 'S',
            Label::B => 'B',
        }
    }

    /// `(Pauli, sign)` terms of the label on the two copies of one qubit.
    fn terms(self) -> &'static [(Pauli, f64)] {
        match self {
            Label::I => &[(Pauli::I, 1.0)],
            Label::S => &[(Pauli::X, 1.0), (Pauli::Y, 1.0), (Pauli::Z, 1.0)],
            Label::B => &[(Pauli::X, 1.0), (Pauli::Y, -1.0), (Pauli::Z, 1.0)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Symplectic block on qubits `(0, 1)`: labels `{I,S} x {I,S,B}`.
    Sp2,
    /// Orthogonal block: labels `{I,S,B} x {I,S,B}`.
    O4,
}

impl BlockKind {
    fn alphabets(self) -> (&'static [Label], &'static [Label]) {
        match self {
            BlockKind::Sp2 => (&Label::ALL[..2], &Label::ALL),
            BlockKind::O4 => (&Label::ALL, &Label::ALL),
        }
    }

    fn group(self) -> BrauerGroup {
        match self {
            BlockKind::Sp2 => BrauerGroup::Sp,
            BlockKind::O4 => BrauerGroup::O,
        }
    }

    pub fn labels(self) -> Vec<(Label, Label)> {
        let (a, b) = self.alphabets();
        a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
    }
}

/// The sp2 transfer matrix as usually displayed: row-vector convention, label
/// order `II, IS, IB, SI, SS, SB`. It is the transpose of [`derive_transfer`]'s
/// column-convention matrix in the same order.
pub const REFERENCE_SP2_TAU: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.25, 0.15, 0.1, 0.25, -0.15],
    [0.0, 0.15, 0.25, -0.1, 0.15, -0.25],
    [0.0, 0.15, -0.15, 0.3, 0.15, 0.15],
    [0.0, 0.6, 0.0, 0.6, 0.6, 0.0],
    [0.0, 0.0, -0.6, 0.6, 0.0, 0.6],
];

#[derive(Clone, Debug, Serialize)]
pub struct TransferMatrix {
    pub kind: BlockKind,
    /// Column convention, rows and columns in `labels` order.
    #[serde(serialize_with = "serialize_rows")]
    pub entries: DMatrix<f64>,
    pub labels: Vec<String>,
}

fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |T^2 - T|`.
    pub fn idempotency_defect(&self) -> f64 {
        (&self.entries * &self.entries - &self.entries).amax()
    }

    /// `max |T^T - REFERENCE_SP2_TAU|`; `None` for o4.
    pub fn reference_deviation(&self) -> Option<f64> {
        (self.kind == BlockKind::Sp2).then(|| {
            (0..6)
                .flat_map(|r| (0..6).map(move |c| (r, c)))
                .map(|(r, c)| (self.entries[(c, r)] - REFERENCE_SP2_TAU[r][c]).abs())
                .fold(0.0, f64::max)
        })
    }
}

fn pauli_matrix(p: Pauli) -> DenseOperator {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let m = match p {
        Pauli::I => [i, o, o, i],
        Pauli::X => [o, i, i, o],
        Pauli::Y => [o, -Complex64::i(), Complex64::i(), o],
        Pauli::Z => [i, o, o, -i],
    };
    DenseOperator::from_fn(2, |r, c| m[2 * r + c])
}

fn kron_all(ops: &[DenseOperator]) -> DenseOperator {
    ops[1..].iter().fold(ops[0].clone(), |acc, op| acc.kron(op))
}

/// Two-copy operator of a product label on a two-qubit block, legs `(a1, b1, a2, b2)`.
fn block_label_operator(la: Label, lb: Label) -> DenseOperator {
    let mut acc = DenseOperator::zeros(16);
    for &(pa, sa) in la.terms() {
        for &(pb, sb) in lb.terms() {
            let (ma, mb) = (pauli_matrix(pa), pauli_matrix(pb));
            acc = acc.add(&kron_all(&[ma.clone(), mb.clone(), ma, mb]).scale(sa * sb));
        }
    }
    acc
}

/// Coefficients of `x` in the product labels of `kind`, with a residual check.
fn expand(x: &DenseOperator, kind: BlockKind) -> Result<DVector<f64>> {
    let basis: Vec<DenseOperator> = kind.labels().into_iter().map(|(a, b)| block_label_operator(a, b)).collect();
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |r, c| basis[r].hs_inner(&basis[c]).re);
    let rhs = DVector::from_fn(k, |r, _| basis[r].hs_inner(x).re);
    let coeffs = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("label Gram matrix is singular".into()))?;
    let mut recon = DenseOperator::zeros(16);
    for (b, c) in basis.iter().zip(coeffs.iter()) {
        recon = recon.add(&b.scale(*c));
    }
    let residual = recon.distance_max(x);
    if residual > EXPANSION_TOLERANCE {
        return Err(Error::Consistency(format!(
            "label re-expansion residual {residual:e} for {kind:?} block"
        )));
    }
    Ok(coeffs)
}

fn block_twirl(x: &DenseOperator, kind: BlockKind) -> Result<DenseOperator> {
    twirl(x, 2, 4, kind.group())?.to_dense()
}

/// Twirls each product label through the block group and re-expands.
pub fn derive_transfer(kind: BlockKind) -> Result<TransferMatrix> {
    let labels = kind.labels();
    let k = labels.len();
    let mut entries = DMatrix::zeros(k, k);
    for (j, &(a, b)) in labels.iter().enumerate() {
        let out = block_twirl(&block_label_operator(a, b), kind)?;
        entries.set_column(j, &expand(&out, kind)?);
    }
    let labels = labels.iter().map(|(a, b)| format!("{}{}", a.symbol(), b.symbol())).collect();
    Ok(TransferMatrix { kind, entries, labels })
}

/// `|0><0|` on both copies of one qubit, as a 4x4 operator on `(copy1, copy2)`.
fn zero_zero() -> DenseOperator {
    let mut p = DenseOperator::zeros(4);
    p.set(0, 0, Complex64::new(1.0, 0.0));
    p
}

struct Tables {
    sp2: TransferMatrix,
    o4: TransferMatrix,
    first_sp2: DVector<f64>,
    first_o4: DVector<f64>,
    /// 9x3: label on the left qubit and `|0><0|` copies on the right, through an o4 block.
    dangling: DMatrix<f64>,
}

/// Reorders a `(a1, a2) (x) (b1, b2)` operator to legs `(a1, b1, a2, b2)`.
fn interleave(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let ab = a.kron(b);
    // index bits (a1 a2 b1 b2) -> (a1 b1 a2 b2)
    let perm = |i: usize| {
        let (a1, a2, b1, b2) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        (a1 << 3) | (b1 << 2) | (a2 << 1) | b2
    };
    let mut out = DenseOperator::zeros(16);
    for r in 0..16 {
        for c in 0..16 {
            out.set(perm(r), perm(c), ab.get(r, c));
        }
    }
    out
}

/// Single-qubit label as a two-copy 4x4 operator.
fn qubit_label_operator(l: Label) -> DenseOperator {
    let mut acc = DenseOperator::zeros(4);
    for &(p, s) in l.terms() {
        let m = pauli_matrix(p);
        acc = acc.add(&m.kron(&m).scale(s));
    }
    acc
}

fn build_tables() -> Result<Tables> {
    let zz = zero_zero();
    let start = interleave(&zz, &zz);
    let first_sp2 = expand(&block_twirl(&start, BlockKind::Sp2)?, BlockKind::Sp2)?;
    let first_o4 = expand(&block_twirl(&start, BlockKind::O4)?, BlockKind::O4)?;
    let mut dangling = DMatrix::zeros(9, 3);
    for (j, &l) in Label::ALL.iter().enumerate() {
        let x = interleave(&qubit_label_operator(l), &zz);
        dangling.set_column(j, &expand(&block_twirl(&x, BlockKind::O4)?, BlockKind::O4)?);
    }
    Ok(Tables {
        sp2: derive_transfer(BlockKind::Sp2)?,
        o4: derive_transfer(BlockKind::O4)?,
        first_sp2,
        first_o4,
        dangling,
    })
}

fn tables() -> Result<&'static Tables> {
    static TABLES: OnceLock<std::result::Result<Tables, String>> = OnceLock::new();
    TABLES
        .get_or_init(|| build_tables().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Consistency(e.clone()))
}

/// `Tr[label * (|00><00| + |11><11|)]` on the two copies of one qubit.
pub fn label_contraction(l: Label) -> f64 {
    let mut m = DenseOperator::zeros(4);
    m.set(0, 0, Complex64::new(1.0, 0.0));
    m.set(3, 3, Complex64::new(1.0, 0.0));
    qubit_label_operator(l).hs_inner(&m).re
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelVector {
    n: usize,
    coefficients: Vec<f64>,
}

fn radix(q: usize) -> usize {
    if q == 0 {
        2
    } else {
        3
    }
}

fn label_dim(n: usize) -> usize {
    2 * 3usize.pow(n as u32 - 1)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("brick-layer propagation needs n >= 2, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::capacity("label vector (qubits)", n, MAX_QUBITS));
    }
    Ok(())
}

impl LabelVector {
    pub fn new(n: usize, coefficients: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if coefficients.len() != label_dim(n) {
            return Err(Error::Dimension(format!(
                "label vector for n = {n} needs {} entries, got {}",
                label_dim(n),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite label coefficient".into()));
        }
        Ok(LabelVector { n, coefficients })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficient of the all-I label.
    pub fn identity_coefficient(&self) -> f64 {
        self.coefficients[0]
    }

    /// Coefficient of a label string such as `"SIB"`.
    pub fn coefficient(&self, labels: &str) -> Result<f64> {
        let ls: Vec<char> = labels.chars().collect();
        if ls.len() != self.n {
            return Err(Error::Parse(format!("label string {labels:?} is not on {} qubits", self.n)));
        }
        let mut idx = 0;
        for (q, c) in ls.iter().enumerate() {
            let digit = match c {
                'I' => 0,
                'S' => 1,
                'B' if q > 0 => 2,
                _ => return Err(Error::Parse(format!("invalid label {c:?} at qubit {q}"))),
            };
            idx = idx * radix(q) + digit;
        }
        Ok(self.coefficients[idx])
    }

    /// Applies a `(ra * rb)`-square matrix to the label pair on qubits `(q, q+1)`.
    fn apply_block(&mut self, q: usize, m: &DMatrix<f64>) {
        let n = self.n;
        let (ra, rb) = (radix(q), radix(q + 1));
        let k = ra * rb;
        debug_assert_eq!(m.nrows(), k);
        let inner: usize = (q + 2..n).map(radix).product();
        self.coefficients.par_chunks_mut(k * inner).for_each(|chunk| {
            let mut buf = vec![0.0; k];
            for i in 0..inner {
                for (s, b) in buf.iter_mut().enumerate() {
                    *b = chunk[s * inner + i];
                }
                for r in 0..k {
                    chunk[r * inner + i] = (0..k).map(|s| m[(r, s)] * buf[s]).sum();
                }
            }
        });
    }
}

fn block_matrix(t: &Tables, q: usize) -> &DMatrix<f64> {
    if q == 0 {
        &t.sp2.entries
    } else {
        &t.o4.entries
    }
}

fn even_bonds(n: usize) -> impl Iterator<Item = usize> {
    (1..n.saturating_sub(1)).step_by(2)
}

/// Label vector after the first full layer acting on `|0...0>`.
///
/// The product state is outside the label span, so the first odd sublayer uses
/// the twirled `|0><0|^(x)2` blocks directly. For odd `n` the last qubit is only
/// reached by the even sublayer, which uses a 9x3 block on (label, `|0><0|^(x)2`).
pub fn initial_label_vector(n: usize) -> Result<LabelVector> {
    check_n(n)?;
    let t = tables()?;
    let paired = n - n % 2;
    let mut coeffs = vec![1.0];
    for q in (0..paired).step_by(2) {
        let first = if q == 0 { &t.first_sp2 } else { &t.first_o4 };
        coeffs = coeffs.iter().flat_map(|c| first.iter().map(move |f| c * f)).collect();
    }
    let mut v = LabelVector { n: paired, coefficients: coeffs };
    for q in even_bonds(paired) {
        v.apply_block(q, &t.o4.entries);
    }
    if n % 2 == 1 {
        // Widen the last qubit from 3 labels to the 9 labels of the final bond.
        let coefficients = v
            .coefficients
            .par_chunks(3)
            .flat_map_iter(|c| (0..9).map(move |r| (0..3).map(|s| t.dangling[(r, s)] * c[s]).sum::<f64>()))
            .collect();
        v = LabelVector { n, coefficients };
    }
    Ok(v)
}

/// One full brick layer.
pub fn apply_layer(v: &mut LabelVector) -> Result<()> {
    let t = tables()?;
    let n = v.n;
    for q in (0..n - 1).step_by(2) {
        v.apply_block(q, block_matrix(t, q));
    }
    for q in even_bonds(n) {
        v.apply_block(q, block_matrix(t, q));
    }
    Ok(())
}

pub fn propagate(v: &LabelVector, layers: usize) -> Result<LabelVector> {
    let mut out = v.clone();
    for _ in 0..layers {
        apply_layer(&mut out)?;
    }
    Ok(out)
}

/// `z = 2^n E[p_U(x)^2]`, equal here to `E[sum_x p_U(x)^2]` since the block
/// groups contain the bit flips.
pub fn collision_probability(v: &LabelVector) -> f64 {
    // Every label contracts to the same value, so the functional is uniform.
    let f = label_contraction(Label::I);
    debug_assert!(Label::ALL.iter().all(|&l| (label_contraction(l) - f).abs() < 1e-12));
    f.powi(v.n as i32) * v.coefficients.par_iter().sum::<f64>()
}

/// `z` after `layers` full layers (`layers >= 1`).
pub fn collision_after(n: usize, layers: usize) -> Result<f64> {
    if layers == 0 {
        // A computational-basis state is a point mass.
        check_n(n)?;
        return Ok(1.0);
    }
    let v = propagate(&initial_label_vector(n)?, layers - 1)?;
    Ok(collision_probability(&v))
}

pub fn haar_collision(n: usize) -> f64 {
    2.0 / ((1u64 << n) as f64 + 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthResult {
    pub n: usize,
    /// Smallest layer count with `|z - z_H| < epsilon / d`; `None` if not reached within `max_layers`.
    pub n_l_star: Option<usize>,
    /// `z` after `1, 2, ...` layers.
    pub z_trace: Vec<f64>,
}

pub fn depth_to_anticoncentrate(n: usize, epsilon: f64, max_layers: usize) -> Result<DepthResult> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let target = haar_collision(n);
    let tol = epsilon / (1u64 << n) as f64;
    let mut v = initial_label_vector(n)?;
    let mut z_trace = vec![collision_probability(&v)];
    while (z_trace.last().unwrap() - target).abs() >= tol {
        if z_trace.len() >= max_layers {
            return Ok(DepthResult { n, n_l_star: None, z_trace });
        }
        apply_layer(&mut v)?;
        z_trace.push(collision_probability(&v));
    }
    Ok(DepthResult { n, n_l_star: Some(z_trace.len()), z_trace })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LogFit {
    /// Model `a * ln(n) + b`.
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// Least squares fit of `y = a ln x + b`.
pub fn log_fit(points: &[(f64, f64)]) -> Result<LogFit> {
    if points.len() < 3 {
        return Err(Error::Domain("log fit needs at least three points".into()));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LogFit { a, b, r_squared })
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthSweep {
    pub epsilon: f64,
    pub rows: Vec<DepthResult>,
    /// Fit over the rows that reached the threshold; `None` with fewer than three.
    pub fit: Option<LogFit>,
    pub nondecreasing: bool,
}

pub fn depth_sweep(n_range: std::ops::RangeInclusive<usize>, epsilon: f64, max_layers: usize) -> Result<DepthSweep> {
    let ns: Vec<usize> = n_range.collect();
    let rows: Vec<DepthResult> = ns
        .par_iter()
        .map(|&n| depth_to_anticoncentrate(n, epsilon, max_layers))
        .collect::<Result<_>>()?;
    let reached: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| r.n_l_star.map(|l| (r.n as f64, l as f64))).collect();
    let fit = if reached.len() >= 3 { Some(log_fit(&reached)?) } else { None };
    let stars: Vec<Option<usize>> = rows.iter().map(|r| r.n_l_star).collect();
    let nondecreasing = stars.iter().all(Option::is_some) && stars.windows(2).all(|w| w[0] <= w[1]);
    Ok(DepthSweep { epsilon, rows, fit, nondecreasing })
}
