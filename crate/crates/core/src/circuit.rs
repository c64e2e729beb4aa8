//! Generator circuits and brick-layer Haar circuits on dense statevectors.
//!
//! Rotations are `exp(i theta P) = cos(theta) I + i sin(theta) P`. Haar blocks act
//! on two qubits with a `4 x 4` matrix whose more significant index is the
//! first listed qubit.
//!
//! JSON layout (qubits are 1-based there, 0-based everywhere in the API):
//!
//! ```json
//! {"n": 4, "seed": 7,
//!  "gates": [{"type": "rot", "pauli": "IYXI", "theta": 0.3},
//!            {"type": "haar", "qubits": [1, 2], "group": "sp2"}]}
//! ```
//!
//! Haar matrices are not stored; loading redraws them from
//! `RngStream::new(seed, 0)` in gate order.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::group_sampler::{sample_orthogonal, sample_sp, sample_unitary};
use crate::lie_closure::{prop2_generators, theorem1_generators};
use crate::pauli::{PauliString, DENSE_MAX_QUBITS};
use crate::rng::RngStream;

/// Default statevector limit.
pub const STATE_MAX_QUBITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockGroup {
    Sp2,
    So4,
    O4,
    U4,
}

impl BlockGroup {
    pub fn sample(self, rng: &mut RngStream) -> Matrix4<Complex64> {
        let m = match self {
            BlockGroup::Sp2 => sample_sp(4, rng),
            BlockGroup::So4 => sample_orthogonal(4, rng, true),
            BlockGroup::O4 => sample_orthogonal(4, rng, false),
            BlockGroup::U4 => sample_unitary(4, rng),
        }
        .expect("4 is a valid dimension for every block group");
        Matrix4::from_fn(|r, c| m.get(r, c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Rotation { generator: PauliString, theta: f64 },
    HaarBlock { qubits: (usize, usize), group: BlockGroup, matrix: Matrix4<Complex64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub n: usize,
    pub gates: Vec<Gate>,
    /// Gate counts per layer, when the circuit has a layer structure.
    pub layers: Option<Vec<usize>>,
    /// Seed the Haar matrices were drawn from, if any.
    pub seed: Option<u64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > STATE_MAX_QUBITS {
        return Err(Error::capacity("statevector (qubits)", n, STATE_MAX_QUBITS));
    }
    Ok(())
}

impl CircuitSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("circuit needs at least one qubit".into()));
        }
        Ok(CircuitSpec { n, gates: Vec::new(), layers: None, seed: None })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        match &gate {
            Gate::Rotation { generator, theta } => {
                if generator.n() != self.n {
                    return Err(Error::Dimension(format!("generator {generator} on a {}-qubit circuit", self.n)));
                }
                if !generator.is_hermitian() {
                    return Err(Error::Domain(format!("rotation generator {generator} is not Hermitian")));
                }
                if !theta.is_finite() {
                    return Err(Error::Domain("rotation angle must be finite".into()));
                }
            }
            Gate::HaarBlock { qubits: (a, b), .. } => {
                if *a >= self.n || *b >= self.n || a == b {
                    return Err(Error::Domain(format!("block qubits ({a},{b}) invalid for n = {}", self.n)));
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &CircuitSpec) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension("circuits act on different qubit counts".into()));
        }
        self.gates.extend(other.gates.iter().cloned());
        self.layers = None;
        Ok(())
    }

    pub fn has_haar_blocks(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, Gate::HaarBlock { .. }))
    }

    pub fn to_json(&self) -> Result<String> {
        if self.has_haar_blocks() && self.seed.is_none() {
            return Err(Error::Precondition("Haar blocks can only be serialised for seeded circuits".into()));
        }
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Rotation { generator, theta } => GateJson::Rot { pauli: *generator, theta: *theta },
                Gate::HaarBlock { qubits: (a, b), group, .. } => GateJson::Haar { qubits: [a + 1, b + 1], group: *group },
            })
            .collect();
        let file = CircuitJson { n: self.n, gates, seed: self.seed, layers: self.layers.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CircuitJson = serde_json::from_str(s)?;
        let mut circ = CircuitSpec::new(file.n)?;
        let needs_seed = file.gates.iter().any(|g| matches!(g, GateJson::Haar { .. }));
        let mut rng = match (needs_seed, file.seed) {
            (true, None) => return Err(Error::Parse("circuit with Haar blocks needs a seed".into())),
            (_, seed) => RngStream::new(seed.unwrap_or(0), 0),
        };
        for g in file.gates {
            let gate = match g {
                GateJson::Rot { pauli, theta } => Gate::Rotation { generator: pauli, theta },
                GateJson::Haar { qubits: [a, b], group } => {
                    if a == 0 || b == 0 {
                        return Err(Error::Parse("qubit indices in circuit files are 1-based".into()));
                    }
                    Gate::HaarBlock { qubits: (a - 1, b - 1), group, matrix: group.sample(&mut rng) }
                }
            };
            circ.push(gate)?;
        }
        if let Some(layers) = &file.layers {
            if layers.iter().sum::<usize>() != circ.gates.len() {
                return Err(Error::Parse("layer sizes do not add up to the gate count".into()));
            }
        }
        circ.layers = file.layers;
        circ.seed = file.seed;
        Ok(circ)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    n: usize,
    gates: Vec<GateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GateJson {
    Rot { pauli: PauliString, theta: f64 },
    Haar { qubits: [usize; 2], group: BlockGroup },
}

/// Normalised `2^n` amplitudes in Kronecker order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        let d = 1usize << n;
        if index >= d {
            return Err(Error::Domain(format!("basis index {index} out of range for n = {n}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let d = amps.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!("amplitude count {d} is not a power of two")));
        }
        let n = d.trailing_zeros() as usize;
        check_n(n)?;
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("state has squared norm {norm}")));
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    fn apply_gate(&mut self, gate: &Gate) {
        match gate {
            Gate::Rotation { generator, theta } => {
                let masks = generator.index_masks();
                let (c, s) = (theta.cos(), theta.sin());
                let old = self.amps.clone();
                for (b, amp) in old.iter().enumerate() {
                    // i sin(theta) P|b>
                    let (b2, k) = generator.act_on_index(masks, b);
                    self.amps[b2] += *amp * crate::pauli::i_pow(k + 1) * s;
                }
                for (new, amp) in self.amps.iter_mut().zip(&old) {
                    *new += amp * (c - 1.0);
                }
            }
            Gate::HaarBlock { qubits: (qa, qb), matrix, .. } => {
                let ba = 1usize << (self.n - 1 - qa);
                let bb = 1usize << (self.n - 1 - qb);
                for base in 0..self.amps.len() {
                    if base & (ba | bb) != 0 {
                        continue;
                    }
                    let idx = [base, base | bb, base | ba, base | ba | bb];
                    let v = idx.map(|i| self.amps[i]);
                    for r in 0..4 {
                        self.amps[idx[r]] = (0..4).map(|c| matrix[(r, c)] * v[c]).sum();
                    }
                }
            }
        }
    }
}

pub fn apply(circ: &CircuitSpec, psi: &StateVector) -> Result<StateVector> {
    if circ.n != psi.n {
        return Err(Error::Dimension(format!("{}-qubit circuit on a {}-qubit state", circ.n, psi.n)));
    }
    let mut out = psi.clone();
    for g in &circ.gates {
        out.apply_gate(g);
    }
    Ok(out)
}

pub fn to_unitary(circ: &CircuitSpec) -> Result<DenseOperator> {
    if circ.n > DENSE_MAX_QUBITS {
        return Err(Error::capacity("dense circuit unitary (qubits)", circ.n, DENSE_MAX_QUBITS));
    }
    let d = 1usize << circ.n;
    let mut u = DenseOperator::zeros(d);
    for col in 0..d {
        let out = apply(circ, &StateVector::basis(circ.n, col)?)?;
        for (r, z) in out.amps.iter().enumerate() {
            u.set(r, col, *z);
        }
    }
    Ok(u)
}

fn rotation_block(gens: &[PauliString], thetas: &[f64], n: usize) -> Result<CircuitSpec> {
    if thetas.len() != gens.len() {
        return Err(Error::Domain(format!("block has {} gates but {} angles were given", gens.len(), thetas.len())));
    }
    let mut c = CircuitSpec::new(n)?;
    for (g, &theta) in gens.iter().zip(thetas) {
        c.push(Gate::Rotation { generator: *g, theta })?;
    }
    c.layers = Some(vec![gens.len()]);
    Ok(c)
}

pub fn theorem1_block_size(n: usize) -> Result<usize> {
    Ok(theorem1_generators(n)?.len())
}

/// One block of rotations with one angle per generator of the universal symplectic set.
pub fn build_theorem1_block(n: usize, thetas: &[f64]) -> Result<CircuitSpec> {
    let g = theorem1_generators(n)?;
    rotation_block(g.generators(), thetas, n)
}

/// One block of rotations over the locally symplectic generator set.
pub fn build_prop2_block(n: usize, thetas: &[f64]) -> Result<CircuitSpec> {
    let g = prop2_generators(n)?;
    rotation_block(g.generators(), thetas, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationFamily {
    Theorem1,
    Prop2,
}

impl RotationFamily {
    pub fn generators(self, n: usize) -> Result<Vec<PauliString>> {
        let g = match self {
            RotationFamily::Theorem1 => theorem1_generators(n)?,
            RotationFamily::Prop2 => prop2_generators(n)?,
        };
        Ok(g.generators().to_vec())
    }
}

/// `blocks` stacked blocks of `family` with angles drawn uniformly from `[0, 2 pi)`.
pub fn random_rotation_circuit(family: RotationFamily, n: usize, blocks: usize, rng: &mut RngStream) -> Result<CircuitSpec> {
    let gens = family.generators(n)?;
    let mut c = CircuitSpec::new(n)?;
    for _ in 0..blocks {
        let thetas: Vec<f64> = (0..gens.len()).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
        c.append(&rotation_block(&gens, &thetas, n)?)?;
    }
    c.layers = Some(vec![gens.len(); blocks]);
    Ok(c)
}

/// `E[sum_x p_U(x)^2]` of `U|0...0>` over random rotation circuits of `blocks` blocks, with its standard error.
///
/// Compared against `2/(d+1)` this measures how many blocks bring the
/// second moments of the output distribution to their Haar values.
pub fn rotation_collision(
    family: RotationFamily,
    n: usize,
    blocks: usize,
    samples: usize,
    rng: &RngStream,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let c = random_rotation_circuit(family, n, blocks, &mut rng.substream(i as u64))?;
            let out = apply(&c, &StateVector::zero(n)?)?;
            Ok(out.probabilities().iter().map(|p| p * p).sum())
        })
        .collect::<Result<_>>()?;
    let m = samples as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

/// Bonds of one brick layer, 0-based: `(0,1), (2,3), ...` then `(1,2), (3,4), ...`.
pub fn brick_bonds(n: usize) -> Vec<(usize, usize)> {
    let odd = (0..n.saturating_sub(1)).step_by(2).map(|q| (q, q + 1));
    let even = (1..n.saturating_sub(1)).step_by(2).map(|q| (q, q + 1));
    odd.chain(even).collect()
}

/// Group of a brick-layer block: `Sp2` on the block holding qubit 0, `bulk` elsewhere.
pub fn block_group(bond: (usize, usize), bulk: BlockGroup) -> BlockGroup {
    if bond.0 == 0 {
        BlockGroup::Sp2
    } else {
        bulk
    }
}

pub fn build_bricklayer(n: usize, layers: usize, rng: &mut RngStream) -> Result<CircuitSpec> {
    build_bricklayer_with(n, layers, BlockGroup::O4, rng)
}

/// Brick-layer circuit with Haar blocks; `bulk` is the group away from qubit 0.
pub fn build_bricklayer_with(n: usize, layers: usize, bulk: BlockGroup, rng: &mut RngStream) -> Result<CircuitSpec> {
    if n < 2 {
        return Err(Error::Domain(format!("brick-layer circuits need n >= 2, got {n}")));
    }
    if bulk == BlockGroup::Sp2 || bulk == BlockGroup::U4 {
        return Err(Error::Domain(format!("{bulk:?} blocks away from qubit 0 do not preserve Omega")));
    }
    let bonds = brick_bonds(n);
    let mut c = CircuitSpec::new(n)?;
    for _ in 0..layers {
        for &bond in &bonds {
            let group = block_group(bond, bulk);
            c.push(Gate::HaarBlock { qubits: bond, group, matrix: group.sample(rng) })?;
        }
    }
    c.layers = Some(vec![bonds.len(); layers]);
    Ok(c)
}

/// Same as [`build_bricklayer_with`] drawing from `RngStream::new(seed, 0)`, so the JSON form reproduces it.
pub fn build_bricklayer_seeded(n: usize, layers: usize, bulk: BlockGroup, seed: u64) -> Result<CircuitSpec> {
    let mut c = build_bricklayer_with(n, layers, bulk, &mut RngStream::new(seed, 0))?;
    c.seed = Some(seed);
    Ok(c)
}
