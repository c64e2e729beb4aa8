//! Output statistics of Haar-random symplectic unitaries: covariances of
//! Pauli expectation values, concentration tails and anti-concentration.
//!
//! Two overlaps of states recur throughout,
//!
//! ```text
//! Tr[rho rho']                 (plain overlap)
//! Tr[Omega rho Omega rho'^T]   (twisted overlap)
//! ```
//!
//! and the algebra overlap `Tr_g[rho rho'] = (plain + twisted) / 2`, which is
//! also `(1/d) sum_{P in sp} Tr[rho P] Tr[rho' P]`. For pure states the
//! twisted overlap is `-|psi^T Omega phi|^2`.
//!
//! Error bars are batch standard errors over 20 contiguous batches.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::group_sampler::{sample_sp, SymplecticFrameSampler};
use crate::pauli::{enumerate_sp_basis, PauliString, DENSE_MAX_QUBITS, MAX_QUBITS};
use crate::rng::RngStream;

pub const BATCHES: usize = 20;

/// Qubit limit for states carried as `2^n` amplitudes.
pub const PURE_MAX_QUBITS: usize = 20;

#[derive(Clone, Debug)]
pub enum StateSpec {
    /// `|x>` with `x` a basis index (qubit 0 is the most significant bit).
    Basis { n: usize, x: usize },
    /// `(|x> + |y>) / sqrt(2)`.
    Pair { n: usize, x: usize, y: usize },
    Pure { amplitudes: Vec<Complex64> },
    Dense { rho: DenseOperator },
    MaximallyMixed { n: usize },
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl StateSpec {
    pub fn basis(n: usize, x: usize) -> Result<Self> {
        check_pure_n(n)?;
        if x >> n != 0 {
            return Err(Error::Domain(format!("basis index {x} out of range for n = {n}")));
        }
        Ok(StateSpec::Basis { n, x })
    }

    pub fn pair(n: usize, x: usize, y: usize) -> Result<Self> {
        check_pure_n(n)?;
        if x >> n != 0 || y >> n != 0 || x == y {
            return Err(Error::Domain(format!("invalid superposition pair ({x}, {y}) for n = {n}")));
        }
        Ok(StateSpec::Pair { n, x, y })
    }

    pub fn pure(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!("amplitude count {d} is not a power of two")));
        }
        check_pure_n(d.trailing_zeros() as usize)?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("state has squared norm {norm}")));
        }
        Ok(StateSpec::Pure { amplitudes })
    }

    /// Checks `Tr rho = 1`, Hermiticity and positivity.
    pub fn dense(rho: DenseOperator) -> Result<Self> {
        let d = rho.dim();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!("density matrix dimension {d} is not a power of two")));
        }
        let tol = rho.tolerance();
        if (rho.trace() - Complex64::new(1.0, 0.0)).norm() > tol || !rho.is_hermitian() {
            return Err(Error::Domain("density matrix must be Hermitian with unit trace".into()));
        }
        let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
        if eig.eigenvalues.iter().any(|&l| l < -tol) {
            return Err(Error::Domain("density matrix is not positive semidefinite".into()));
        }
        Ok(StateSpec::Dense { rho })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count {n} out of range")));
        }
        Ok(StateSpec::MaximallyMixed { n })
    }

    pub fn n(&self) -> usize {
        match self {
            StateSpec::Basis { n, .. } | StateSpec::Pair { n, .. } | StateSpec::MaximallyMixed { n } => *n,
            StateSpec::Pure { amplitudes } => amplitudes.len().trailing_zeros() as usize,
            StateSpec::Dense { rho } => rho.dim().trailing_zeros() as usize,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, StateSpec::Basis { .. } | StateSpec::Pair { .. } | StateSpec::Pure { .. })
    }

    pub fn amplitudes(&self) -> Option<Vec<Complex64>> {
        let d = self.dim();
        match self {
            StateSpec::Basis { x, .. } => {
                let mut v = vec![c0(); d];
                v[*x] = Complex64::new(1.0, 0.0);
                Some(v)
            }
            StateSpec::Pair { x, y, .. } => {
                let mut v = vec![c0(); d];
                let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                v[*x] = a;
                v[*y] = a;
                Some(v)
            }
            StateSpec::Pure { amplitudes } => Some(amplitudes.clone()),
            _ => None,
        }
    }

    pub fn density(&self) -> Result<DenseOperator> {
        let n = self.n();
        if n > DENSE_MAX_QUBITS {
            return Err(Error::capacity("dense density matrix (qubits)", n, DENSE_MAX_QUBITS));
        }
        let d = self.dim();
        Ok(match self {
            StateSpec::Dense { rho } => rho.clone(),
            StateSpec::MaximallyMixed { .. } => DenseOperator::identity(d).scale(1.0 / d as f64),
            _ => {
                let v = self.amplitudes().expect("pure state");
                DenseOperator::from_fn(d, |r, c| v[r] * v[c].conj())
            }
        })
    }

    /// `Tr[rho P]`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n() != self.n() {
            return Err(Error::Dimension(format!("{}-qubit Pauli on a {}-qubit state", p.n(), self.n())));
        }
        Ok(match self {
            StateSpec::MaximallyMixed { .. } => {
                if p.is_identity() {
                    crate::pauli::i_pow(p.phase_exp()).re
                } else {
                    0.0
                }
            }
            StateSpec::Dense { rho } => {
                let masks = p.index_masks();
                let mut acc = c0();
                for c in 0..rho.dim() {
                    let (m, k) = p.act_on_index(masks, c);
                    acc += rho.get(c, m) * crate::pauli::i_pow(k);
                }
                acc.re
            }
            _ => p.expectation(&self.amplitudes().expect("pure state"))?.re,
        })
    }
}

fn check_pure_n(n: usize) -> Result<()> {
    if n == 0 || n > PURE_MAX_QUBITS {
        return Err(Error::capacity("pure state (qubits)", n, PURE_MAX_QUBITS));
    }
    Ok(())
}

fn check_pair(a: &StateSpec, b: &StateSpec) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::Dimension(format!("states on {} and {} qubits", a.n(), b.n())));
    }
    Ok(())
}

/// `psi^T Omega phi` in the block form of `Omega`.
fn omega_bilinear(psi: &[Complex64], phi: &[Complex64]) -> Complex64 {
    let h = psi.len() / 2;
    (0..h).map(|i| psi[i] * phi[i + h] - psi[i + h] * phi[i]).sum()
}

/// `Tr[rho rho']`.
pub fn overlap(a: &StateSpec, b: &StateSpec) -> Result<f64> {
    check_pair(a, b)?;
    match (a.amplitudes(), b.amplitudes()) {
        (Some(u), Some(v)) => Ok(u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()),
        _ => {
            if let (StateSpec::MaximallyMixed { .. }, _) | (_, StateSpec::MaximallyMixed { .. }) = (a, b) {
                return Ok(1.0 / a.dim() as f64);
            }
            let (ra, rb) = (a.density()?, b.density()?);
            Ok(ra.adjoint().hs_inner(&rb).re)
        }
    }
}

/// `Tr[Omega rho Omega rho'^T]`.
pub fn twisted_overlap(a: &StateSpec, b: &StateSpec) -> Result<f64> {
    check_pair(a, b)?;
    match (a.amplitudes(), b.amplitudes()) {
        (Some(u), Some(v)) => Ok(-omega_bilinear(&u, &v).norm_sqr()),
        _ => {
            if let (StateSpec::MaximallyMixed { .. }, _) | (_, StateSpec::MaximallyMixed { .. }) = (a, b) {
                return Ok(-1.0 / a.dim() as f64);
            }
            let (ra, rb) = (a.density()?, b.density()?);
            let omega = DenseOperator::omega(a.dim())?;
            Ok((&(&(&omega * &ra) * &omega) * &rb.transpose()).trace().re)
        }
    }
}

/// `Tr_g[rho rho']`, by the cheapest exact route available.
pub fn algebra_overlap(a: &StateSpec, b: &StateSpec) -> Result<f64> {
    check_pair(a, b)?;
    if let (StateSpec::Basis { n, x }, StateSpec::Basis { x: y, .. }) = (a, b) {
        // Only Z_1 (x) {I,Z}^{n-1} diagonal strings are in the algebra.
        let diff = x ^ y;
        let rest = diff & ((1usize << (n - 1)) - 1);
        if rest != 0 {
            return Ok(0.0);
        }
        return Ok(if diff == 0 { 0.5 } else { -0.5 });
    }
    Ok((overlap(a, b)? + twisted_overlap(a, b)?) / 2.0)
}

/// `Tr_g` from the explicit Pauli decomposition over the sp basis.
pub fn algebra_overlap_pauli(a: &StateSpec, b: &StateSpec) -> Result<f64> {
    check_pair(a, b)?;
    let basis = enumerate_sp_basis(a.n())?;
    let d = a.dim() as f64;
    let terms: Vec<f64> = basis
        .par_iter()
        .map(|p| Ok(a.pauli_expectation(p)? * b.pauli_expectation(p)?))
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum::<f64>() / d)
}

/// `(1/2) Tr[rho rho']`-style dense cross-check: `(Tr[rho rho'] + Tr[Omega rho Omega rho'^T]) / 2` by dense products.
pub fn algebra_overlap_dense(a: &StateSpec, b: &StateSpec) -> Result<f64> {
    check_pair(a, b)?;
    let (ra, rb) = (a.density()?, b.density()?);
    let omega = DenseOperator::omega(a.dim())?;
    let plain = (&ra * &rb).trace().re;
    let twisted = (&(&(&omega * &ra) * &omega) * &rb.transpose()).trace().re;
    Ok((plain + twisted) / 2.0)
}

/// Exact finite-d covariance of `Tr[U rho_j U^dagger O]` for Haar `U` and `O` a Pauli in the algebra.
pub fn exact_covariance(states: &[StateSpec]) -> Result<Vec<Vec<f64>>> {
    let d = states.first().ok_or_else(|| Error::Domain("no states".into()))?.dim() as f64;
    pair_matrix(states, |a, b| Ok(2.0 * algebra_overlap(a, b)? / (d + 1.0)))
}

fn pair_matrix(states: &[StateSpec], f: impl Fn(&StateSpec, &StateSpec) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    states.iter().map(|a| states.iter().map(|b| f(a, b)).collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremChoice {
    /// Large overlaps, vanishing twisted overlaps: `Sigma = Tr[rho rho'] / d`.
    Overlap,
    /// Large algebra overlaps: `Sigma = 2 Tr_g / d`.
    AlgebraOverlap,
    /// Vanishing cross algebra overlaps: diagonal `Sigma`.
    Uncorrelated,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremConditions {
    /// `1 / (log2 d)^2`, the finite-size stand-in for `1/poly(log d)`.
    pub threshold: f64,
    pub overlap: bool,
    pub algebra_overlap: bool,
    pub uncorrelated: bool,
    pub selected: TheoremChoice,
}

pub fn theorem_conditions(plain: &[Vec<f64>], twisted: &[Vec<f64>], d: usize) -> TheoremConditions {
    let m = plain.len();
    let threshold = 1.0 / (d as f64).log2().powi(2);
    let pairs = || (0..m).flat_map(move |j| (0..m).map(move |k| (j, k)));
    let overlap = pairs().all(|(j, k)| plain[j][k] >= threshold && twisted[j][k].abs() < threshold);
    let algebra_overlap = pairs().all(|(j, k)| (plain[j][k] + twisted[j][k]).abs() >= threshold);
    let uncorrelated = (0..m).all(|j| plain[j][j] + twisted[j][j] >= threshold)
        && pairs().filter(|(j, k)| j != k).all(|(j, k)| (plain[j][k] + twisted[j][k]).abs() <= 1e-12);
    let selected = if overlap {
        TheoremChoice::Overlap
    } else if uncorrelated {
        TheoremChoice::Uncorrelated
    } else if algebra_overlap {
        TheoremChoice::AlgebraOverlap
    } else {
        TheoremChoice::None
    };
    TheoremConditions { threshold, overlap, algebra_overlap, uncorrelated, selected }
}

/// Mean and batch standard error of a per-batch statistic.
pub fn batch_estimate(len: usize, batches: usize, stat: impl Fn(std::ops::Range<usize>) -> f64) -> (f64, f64) {
    let full = stat(0..len);
    let b = batches.min(len).max(1);
    if b < 2 {
        return (full, f64::NAN);
    }
    let vals: Vec<f64> = (0..b).map(|i| stat(i * len / b..(i + 1) * len / b)).collect();
    let mean = vals.iter().sum::<f64>() / b as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (full, (var / b as f64).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct WickCheck {
    pub j: usize,
    pub k: usize,
    /// Empirical `E[C_j^2 C_k^2]`.
    pub empirical: f64,
    pub standard_error: f64,
    /// `Sigma_jj Sigma_kk + 2 Sigma_jk^2` from the exact covariance.
    pub predicted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GPSummary {
    pub n: usize,
    pub observable: PauliString,
    pub sample_count: usize,
    pub mean_vector: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_se: Vec<Vec<f64>>,
    pub overlaps: Vec<Vec<f64>>,
    pub twisted_overlaps: Vec<Vec<f64>>,
    pub algebra_overlaps: Vec<Vec<f64>>,
    pub conditions: TheoremConditions,
    /// Large-d covariance of the selected regime, if any applies.
    pub theory_covariance: Option<Vec<Vec<f64>>>,
    /// Large-d covariance `Tr[rho rho'] / d`, reported regardless of the regime.
    pub overlap_covariance: Vec<Vec<f64>>,
    pub exact_covariance: Vec<Vec<f64>>,
    /// `m4 / (3 m2^2)` per state.
    pub fourth_moment_ratio: Vec<f64>,
    pub fourth_moment_ratio_se: Vec<f64>,
    pub wick: Vec<WickCheck>,
}

#[derive(Clone, Debug)]
pub struct GpRun {
    pub summary: GPSummary,
    /// `samples[i][j]` is `C(rho_j)` for the `i`-th unitary.
    pub samples: Vec<Vec<f64>>,
}

fn check_states(states: &[StateSpec], observable: &PauliString) -> Result<usize> {
    let n = states.first().ok_or_else(|| Error::Domain("no states given".into()))?.n();
    if states.iter().any(|s| s.n() != n) {
        return Err(Error::Dimension("all states must share a qubit count".into()));
    }
    if observable.n() != n {
        return Err(Error::Dimension(format!("observable on {} qubits, states on {n}", observable.n())));
    }
    if !observable.is_hermitian() || !observable.in_sp_algebra() {
        return Err(Error::Precondition(format!(
            "observable {observable} must be a Hermitian Pauli with iO in sp(d/2)"
        )));
    }
    Ok(n)
}

/// `C(rho_j) = Tr[U rho_j U^dagger O]` for `count` independent Haar symplectic `U`.
///
/// Pure states go through [`SymplecticFrameSampler`]; anything else draws the full matrix.
pub fn sample_expectations(
    states: &[StateSpec],
    observable: &PauliString,
    count: usize,
    rng: &RngStream,
) -> Result<Vec<Vec<f64>>> {
    let n = check_states(states, observable)?;
    let d = 1usize << n;
    if states.iter().all(StateSpec::is_pure) {
        let vecs: Vec<Vec<Complex64>> = states.iter().map(|s| s.amplitudes().unwrap()).collect();
        let sampler = SymplecticFrameSampler::new(&vecs)?;
        return (0..count)
            .into_par_iter()
            .map(|i| {
                let mut r = rng.substream(i as u64);
                sampler.sample(&mut r).iter().map(|psi| Ok(observable.expectation(psi)?.re)).collect()
            })
            .collect();
    }
    if n > DENSE_MAX_QUBITS {
        return Err(Error::capacity("dense Haar sampling for mixed states (qubits)", n, DENSE_MAX_QUBITS));
    }
    let o = observable.to_dense()?;
    let rhos: Vec<Option<DenseOperator>> = states
        .iter()
        .map(|s| match s {
            StateSpec::MaximallyMixed { .. } => Ok(None),
            other => other.density().map(Some),
        })
        .collect::<Result<_>>()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let u = sample_sp(d, &mut r)?;
            let heis = &(&u.adjoint() * &o) * &u;
            Ok(rhos
                .iter()
                // U (I/d) U^dagger = I/d and O is traceless.
                .map(|rho| rho.as_ref().map_or(0.0, |rho| rho.adjoint().hs_inner(&heis).re))
                .collect())
        })
        .collect()
}

pub fn run_gp_experiment(
    states: &[StateSpec],
    observable: &PauliString,
    count: usize,
    rng: &RngStream,
) -> Result<GpRun> {
    if count < 2 * BATCHES {
        return Err(Error::Domain(format!("need at least {} samples, got {count}", 2 * BATCHES)));
    }
    let samples = sample_expectations(states, observable, count, rng)?;
    let summary = summarize(states, observable, &samples)?;
    Ok(GpRun { summary, samples })
}

fn mean_over(samples: &[Vec<f64>], range: std::ops::Range<usize>, f: impl Fn(&[f64]) -> f64) -> f64 {
    let len = range.len() as f64;
    samples[range].iter().map(|s| f(s)).sum::<f64>() / len
}

fn cov_over(samples: &[Vec<f64>], range: std::ops::Range<usize>, j: usize, k: usize) -> f64 {
    let n = range.len() as f64;
    let mj = mean_over(samples, range.clone(), |s| s[j]);
    let mk = mean_over(samples, range.clone(), |s| s[k]);
    samples[range].iter().map(|s| (s[j] - mj) * (s[k] - mk)).sum::<f64>() / (n - 1.0)
}

fn kurtosis_ratio(samples: &[Vec<f64>], range: std::ops::Range<usize>, j: usize) -> f64 {
    let m2 = mean_over(samples, range.clone(), |s| s[j] * s[j]);
    let m4 = mean_over(samples, range, |s| s[j].powi(4));
    m4 / (3.0 * m2 * m2)
}

pub fn summarize(states: &[StateSpec], observable: &PauliString, samples: &[Vec<f64>]) -> Result<GPSummary> {
    let n = check_states(states, observable)?;
    let d = 1usize << n;
    let m = states.len();
    let len = samples.len();
    let mut mean_vector = vec![0.0; m];
    let mut mean_se = vec![0.0; m];
    for j in 0..m {
        let (v, se) = batch_estimate(len, BATCHES, |r| mean_over(samples, r, |s| s[j]));
        mean_vector[j] = v;
        mean_se[j] = se;
    }
    let mut covariance = vec![vec![0.0; m]; m];
    let mut covariance_se = vec![vec![0.0; m]; m];
    for j in 0..m {
        for k in 0..m {
            let (v, se) = batch_estimate(len, BATCHES, |r| cov_over(samples, r, j, k));
            covariance[j][k] = v;
            covariance_se[j][k] = se;
        }
    }
    let overlaps = pair_matrix(states, overlap)?;
    let twisted_overlaps = pair_matrix(states, twisted_overlap)?;
    let algebra_overlaps = pair_matrix(states, algebra_overlap)?;
    let conditions = theorem_conditions(&overlaps, &twisted_overlaps, d);
    let df = d as f64;
    let overlap_covariance: Vec<Vec<f64>> = overlaps.iter().map(|r| r.iter().map(|v| v / df).collect()).collect();
    let theory_covariance = match conditions.selected {
        TheoremChoice::Overlap => Some(overlap_covariance.clone()),
        TheoremChoice::AlgebraOverlap => {
            Some(algebra_overlaps.iter().map(|r| r.iter().map(|v| 2.0 * v / df).collect()).collect())
        }
        TheoremChoice::Uncorrelated => Some(
            (0..m)
                .map(|j| (0..m).map(|k| if j == k { 2.0 * algebra_overlaps[j][j] / df } else { 0.0 }).collect())
                .collect(),
        ),
        TheoremChoice::None => None,
    };
    let exact_covariance: Vec<Vec<f64>> =
        algebra_overlaps.iter().map(|r| r.iter().map(|v| 2.0 * v / (df + 1.0)).collect()).collect();
    let mut fourth_moment_ratio = vec![0.0; m];
    let mut fourth_moment_ratio_se = vec![0.0; m];
    for j in 0..m {
        let (v, se) = batch_estimate(len, BATCHES, |r| kurtosis_ratio(samples, r, j));
        fourth_moment_ratio[j] = v;
        fourth_moment_ratio_se[j] = se;
    }
    let mut wick = Vec::new();
    for j in 0..m {
        for k in j + 1..m {
            let (empirical, standard_error) =
                batch_estimate(len, BATCHES, |r| mean_over(samples, r, |s| s[j] * s[j] * s[k] * s[k]));
            let e = &exact_covariance;
            let predicted = e[j][j] * e[k][k] + 2.0 * e[j][k] * e[j][k];
            wick.push(WickCheck { j, k, empirical, standard_error, predicted });
        }
    }
    Ok(GPSummary {
        n,
        observable: *observable,
        sample_count: len,
        mean_vector,
        mean_se,
        covariance,
        covariance_se,
        overlaps,
        twisted_overlaps,
        algebra_overlaps,
        conditions,
        theory_covariance,
        overlap_covariance,
        exact_covariance,
        fourth_moment_ratio,
        fourth_moment_ratio_se,
        wick,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub c: f64,
    /// Empirical `Pr(|C| >= c)`.
    pub empirical: f64,
    /// Gaussian tail `erfc(c sqrt(d) / (2 sqrt(Tr_g)))` of the large-d limit.
    pub gaussian: f64,
    /// Second-moment bound `2 Tr_g / (d c^2)`.
    pub moment_bound_t2: f64,
    /// Fourth-moment bound `3 (2 Tr_g / (d c^2))^2`.
    pub moment_bound_t4: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailTable {
    pub algebra_purity: f64,
    pub exact_variance: f64,
    pub sample_count: usize,
    pub rows: Vec<TailRow>,
}

/// Thresholds `c_k = k * step * sigma`, `k = 1..=points`, with `sigma^2` the exact variance.
pub fn sigma_grid(state: &StateSpec, points: usize, step: f64) -> Result<Vec<f64>> {
    let d = state.dim() as f64;
    let sigma = (2.0 * algebra_overlap(state, state)? / (d + 1.0)).sqrt();
    Ok((1..=points).map(|k| k as f64 * step * sigma).collect())
}

pub fn concentration_tail(
    state: &StateSpec,
    observable: &PauliString,
    count: usize,
    thresholds: &[f64],
    rng: &RngStream,
) -> Result<TailTable> {
    if thresholds.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::Domain("tail thresholds must be positive".into()));
    }
    let samples = sample_expectations(std::slice::from_ref(state), observable, count, rng)?;
    let values: Vec<f64> = samples.iter().map(|s| s[0].abs()).collect();
    tail_from_values(state, &values, thresholds)
}

pub fn tail_from_values(state: &StateSpec, abs_values: &[f64], thresholds: &[f64]) -> Result<TailTable> {
    let d = state.dim() as f64;
    let trg = algebra_overlap(state, state)?;
    let rows = thresholds
        .iter()
        .map(|&c| {
            let hits = abs_values.iter().filter(|v| **v >= c).count();
            let ratio = 2.0 * trg / (d * c * c);
            TailRow {
                c,
                empirical: hits as f64 / abs_values.len() as f64,
                gaussian: if trg > 0.0 { erfc(c * d.sqrt() / (2.0 * trg.sqrt())) } else { 0.0 },
                moment_bound_t2: ratio,
                moment_bound_t4: 3.0 * ratio * ratio,
            }
        })
        .collect();
    Ok(TailTable {
        algebra_purity: trg,
        exact_variance: 2.0 * trg / (d + 1.0),
        sample_count: abs_values.len(),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiRow {
    pub alpha: f64,
    /// Empirical `Pr(p_U(x) >= alpha / d)` at `x = 0...0`.
    pub empirical: f64,
    pub standard_error: f64,
    /// `(1 - alpha)^2 / 2`.
    pub bound: f64,
    /// Same probability at the spot-check outcomes, in the order of `spot_outcomes`.
    pub spot: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiConcentrationTable {
    pub n: usize,
    pub sample_count: usize,
    pub spot_outcomes: Vec<usize>,
    pub rows: Vec<AntiRow>,
    /// `2^n mean(p_U(0)^2)`.
    pub z_empirical: f64,
    pub z_standard_error: f64,
    /// `mean(sum_x p_U(x)^2)`, a lower-variance estimate of the same quantity.
    pub z_all_outcomes: f64,
    pub z_all_outcomes_se: f64,
    pub z_haar: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub second_moment_haar: f64,
}

/// Output-distribution statistics of `U|0...0>` for Haar symplectic `U`.
pub fn anticoncentration_check(n: usize, count: usize, alphas: &[f64], rng: &RngStream) -> Result<AntiConcentrationTable> {
    check_pure_n(n)?;
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Domain("alpha values must lie in [0, 1]".into()));
    }
    if count < 2 * BATCHES {
        return Err(Error::Domain(format!("need at least {} samples, got {count}", 2 * BATCHES)));
    }
    let d = 1usize << n;
    let df = d as f64;
    let spot_outcomes: Vec<usize> = {
        let mut v = vec![1, d / 2, d - 1];
        v.dedup();
        v.retain(|&x| x != 0);
        v
    };
    let zero = StateSpec::basis(n, 0)?.amplitudes().unwrap();
    let sampler = SymplecticFrameSampler::new(&[zero])?;
    // Per sample: p(0), spot probabilities, sum_x p(x)^2.
    let per: Vec<(f64, Vec<f64>, f64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let psi = sampler.sample(&mut r).pop().unwrap();
            let probs: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let spot = spot_outcomes.iter().map(|&x| probs[x]).collect();
            (probs[0], spot, probs.iter().map(|p| p * p).sum())
        })
        .collect();
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let thr = alpha / df;
            let (empirical, standard_error) = batch_estimate(count, BATCHES, |r| {
                per[r.clone()].iter().filter(|s| s.0 >= thr).count() as f64 / r.len() as f64
            });
            let spot = (0..spot_outcomes.len())
                .map(|k| per.iter().filter(|s| s.1[k] >= thr).count() as f64 / count as f64)
                .collect();
            AntiRow { alpha, empirical, standard_error, bound: (1.0 - alpha).powi(2) / 2.0, spot }
        })
        .collect();
    let avg = |r: std::ops::Range<usize>, f: &dyn Fn(&(f64, Vec<f64>, f64)) -> f64| {
        let len = r.len() as f64;
        per[r].iter().map(f).sum::<f64>() / len
    };
    let (second_moment, second_moment_se) = batch_estimate(count, BATCHES, |r| avg(r, &|s| s.0 * s.0));
    let (z_all_outcomes, z_all_outcomes_se) = batch_estimate(count, BATCHES, |r| avg(r, &|s| s.2));
    Ok(AntiConcentrationTable {
        n,
        sample_count: count,
        spot_outcomes,
        rows,
        z_empirical: df * second_moment,
        z_standard_error: df * second_moment_se,
        z_all_outcomes,
        z_all_outcomes_se,
        z_haar: 2.0 / (df + 1.0),
        second_moment,
        second_moment_se,
        second_moment_haar: 2.0 / (df * (df + 1.0)),
    })
}

/// A candidate pair for the uncorrelated regime and its overlaps.
#[derive(Clone, Debug, Serialize)]
pub struct UncorrelatedPair {
    pub x: (usize, usize),
    pub y: (usize, usize),
    pub overlap: f64,
    pub twisted_overlap: f64,
}

/// Scans pairs of states `(|a> + |b>)/sqrt(2)` with `a < b`, over basis indices below `limit`,
/// for nonzero plain overlap and exactly vanishing algebra overlap.
pub fn search_uncorrelated_pairs(n: usize, limit: usize) -> Result<Vec<UncorrelatedPair>> {
    check_pure_n(n)?;
    let d = 1usize << n;
    let idx: Vec<usize> = (0..d).filter(|&x| x < limit || x >= d / 2 && x < d / 2 + limit).collect();
    let mut cands = Vec::new();
    for (i, &a) in idx.iter().enumerate() {
        for &b in &idx[i + 1..] {
            cands.push((a, b));
        }
    }
    let mut out = Vec::new();
    for (i, &p) in cands.iter().enumerate() {
        for &q in &cands[i + 1..] {
            let s = StateSpec::pair(n, p.0, p.1)?;
            let t = StateSpec::pair(n, q.0, q.1)?;
            let plain = overlap(&s, &t)?;
            let tw = twisted_overlap(&s, &t)?;
            if plain > 1e-12 && (plain + tw).abs() <= 1e-12 {
                out.push(UncorrelatedPair { x: p, y: q, overlap: plain, twisted_overlap: tw });
            }
        }
    }
    Ok(out)
}
