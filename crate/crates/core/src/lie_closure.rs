//! Lie closure of Pauli generator sets.
//!
//! Distinct Pauli directions are Hilbert-Schmidt orthogonal and the
//! commutator of two Paulis is either zero or a single Pauli, so the real
//! span of nested commutators is tracked exactly as a set of directions.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Default limit on the number of directions held by [`closure`] (`4^7`).
pub const DEFAULT_MAX_DIMENSION: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    n: usize,
    generators: Vec<PauliString>,
    label: String,
}

impl GeneratorSet {
    /// Phases are dropped and repeated directions removed, keeping first occurrences.
    pub fn new(n: usize, generators: Vec<PauliString>, label: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(generators.len());
        for g in generators {
            if g.n() != n {
                return Err(Error::Dimension(format!("generator {g} is not on {n} qubits")));
            }
            let g = g.direction();
            if seen.insert((g.x_mask(), g.z_mask())) {
                out.push(g);
            }
        }
        Ok(GeneratorSet { n, generators: out, label: label.into() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn with_generator(&self, g: PauliString) -> Result<Self> {
        let mut gens = self.generators.clone();
        gens.push(g);
        Self::new(self.n, gens, self.label.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Sp,
    Su,
    So,
    Other,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosureResult {
    pub basis: Vec<PauliString>,
    pub dimension: usize,
    pub iterations: usize,
    pub classification: Classification,
}

fn pauli(n: usize, factors: &[(usize, Pauli)]) -> PauliString {
    PauliString::from_factors(n, factors).expect("generator factors are in range")
}

fn need_two(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("generator set needs n >= 2, got {n}")));
    }
    Ok(())
}

/// `{Y_i} u {X_i Y_{i+1}, Y_i X_{i+1} : i >= 2} u {X_1, Z_1 Z_2}`, 1-based qubits.
pub fn theorem1_generators(n: usize) -> Result<GeneratorSet> {
    need_two(n)?;
    let mut g: Vec<PauliString> = (0..n).map(|q| pauli(n, &[(q, Pauli::Y)])).collect();
    for q in 1..n - 1 {
        g.push(pauli(n, &[(q, Pauli::X), (q + 1, Pauli::Y)]));
        g.push(pauli(n, &[(q, Pauli::Y), (q + 1, Pauli::X)]));
    }
    g.push(pauli(n, &[(0, Pauli::X)]));
    g.push(pauli(n, &[(0, Pauli::Z), (1, Pauli::Z)]));
    GeneratorSet::new(n, g, "G_theorem1")
}

/// Union over bonds of `{X_i, Y_i, Y_{i+1}, X_i X_{i+1}}`.
pub fn prop2_generators(n: usize) -> Result<GeneratorSet> {
    need_two(n)?;
    let mut g = Vec::new();
    for q in 0..n - 1 {
        g.push(pauli(n, &[(q, Pauli::X)]));
        g.push(pauli(n, &[(q, Pauli::Y)]));
        g.push(pauli(n, &[(q + 1, Pauli::Y)]));
        g.push(pauli(n, &[(q, Pauli::X), (q + 1, Pauli::X)]));
    }
    GeneratorSet::new(n, g, "G_L_prop2")
}

/// `{Y_i} u {X_i Y_{i+1}, Y_i X_{i+1}}` on an open chain of `n` qubits.
///
/// This is the part of the theorem-1 set living on qubits `2..n`, relabelled
/// onto its own register; its closure is `so(2^n)`.
pub fn so_chain_generators(n: usize) -> Result<GeneratorSet> {
    if n == 0 {
        return Err(Error::Domain("generator set needs n >= 1".into()));
    }
    let mut g: Vec<PauliString> = (0..n).map(|q| pauli(n, &[(q, Pauli::Y)])).collect();
    for q in 0..n - 1 {
        g.push(pauli(n, &[(q, Pauli::X), (q + 1, Pauli::Y)]));
        g.push(pauli(n, &[(q, Pauli::Y), (q + 1, Pauli::X)]));
    }
    GeneratorSet::new(n, g, "G_so_chain")
}

pub fn closure(g: &GeneratorSet) -> Result<ClosureResult> {
    closure_with_limit(g, DEFAULT_MAX_DIMENSION)
}

/// Breadth-first closure: each round commutes the directions found in the
/// previous round against everything found so far.
pub fn closure_with_limit(g: &GeneratorSet, max_dimension: usize) -> Result<ClosureResult> {
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut basis: Vec<PauliString> = Vec::new();
    for p in g.generators() {
        if !p.is_identity() && seen.insert((p.x_mask(), p.z_mask())) {
            basis.push(*p);
        }
    }
    let overflow = |len: usize| Error::Capacity {
        what: "Lie closure (directions)".into(),
        requested: len,
        limit: max_dimension,
        partial: Some(len),
    };
    if basis.len() > max_dimension {
        return Err(overflow(basis.len()));
    }
    let mut frontier_start = 0;
    let mut iterations = 0;
    while frontier_start < basis.len() {
        iterations += 1;
        let frontier_end = basis.len();
        let snapshot = &basis[..frontier_end];
        let candidates: Vec<Vec<PauliString>> = (frontier_start..frontier_end)
            .into_par_iter()
            .map(|i| {
                let a = &snapshot[i];
                // Every pair touching the frontier is visited once, from its later index.
                snapshot[..i]
                    .iter()
                    .filter_map(|b| a.commutator(b).ok().flatten())
                    .collect()
            })
            .collect();
        for c in candidates.into_iter().flatten() {
            if seen.insert((c.x_mask(), c.z_mask())) {
                basis.push(c);
                if basis.len() > max_dimension {
                    return Err(overflow(basis.len()));
                }
            }
        }
        frontier_start = frontier_end;
    }
    let classification = classify(g.n(), &basis);
    Ok(ClosureResult { dimension: basis.len(), basis, iterations, classification })
}

/// Matches a commutator-closed set of directions against sp, su and so by dimension and membership.
pub fn classify(n: usize, basis: &[PauliString]) -> Classification {
    let d = 1usize << n;
    let dim = basis.len();
    if dim == d * (d + 1) / 2 && basis.iter().all(PauliString::in_sp_algebra) {
        Classification::Sp
    } else if dim == d * d - 1 {
        Classification::Su
    } else if dim == d * (d - 1) / 2 && basis.iter().all(|p| !p.is_symmetric()) {
        Classification::So
    } else {
        Classification::Other
    }
}
