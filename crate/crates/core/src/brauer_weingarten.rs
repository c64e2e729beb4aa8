//! Brauer diagrams, their symplectic and orthogonal representations, Gram
//! matrices and exact Haar twirls.
//!
//! A diagram of order `t` pairs the items `0..2t`. Items `0..t` form the left
//! column (the input, or bra, legs of copies `1..t`) and items `t..2t` the right
//! column (output, or ket, legs). Text form is 1-based: `"(1,3)(2,4)"` is the
//! identity at `t = 2`, `"(1,4)(2,3)"` the swap and `"(1,2)(3,4)"` the
//! cup-cap element.
//!
//! The representation `F_d` takes a bilinear form `J` (`Omega` for the
//! symplectic group, `I` for the orthogonal one) and assigns to each pair
//!
//! ```text
//! left p  - right q        delta(out_q, in_p)
//! left p  - left q  (p<q)  J[in_p][in_q]
//! right p - right q (p<q)  J[out_q][out_p]
//! ```
//!
//! so that the `t = 2` cup-cap element is `(I (x) Omega) sum_ij |ii><jj| (I (x) Omega)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};

/// Default largest order for diagram enumeration (`D_5 = 945`).
pub const DEFAULT_MAX_ORDER: usize = 5;

/// Default limit on `d^t` for dense representations.
pub const DENSE_REP_MAX_DIM: usize = 4096;

/// Relative eigenvalue cutoff for Gram pseudo-inverses.
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrauerGroup {
    Sp,
    O,
}

impl BrauerGroup {
    /// Loop value `delta`: `-d` for the symplectic group, `+d` for the orthogonal one.
    pub fn delta(self, d: usize) -> f64 {
        match self {
            BrauerGroup::Sp => -(d as f64),
            BrauerGroup::O => d as f64,
        }
    }

    fn check_dim(self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if self == BrauerGroup::Sp && d % 2 == 1 {
            return Err(Error::Domain(format!("symplectic representation needs even d, got {d}")));
        }
        Ok(())
    }

    /// `J` as a signed permutation: `J[x][perm(x)] = sign(x)`.
    fn form(self, d: usize) -> impl Fn(usize) -> (usize, f64) {
        let h = d / 2;
        move |x| match self {
            BrauerGroup::O => (x, 1.0),
            BrauerGroup::Sp if x < h => (x + h, 1.0),
            BrauerGroup::Sp => (x - h, -1.0),
        }
    }
}

impl FromStr for BrauerGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" => Ok(BrauerGroup::Sp),
            "o" => Ok(BrauerGroup::O),
            other => Err(Error::Parse(format!("unknown Brauer group {other:?}"))),
        }
    }
}

/// A perfect pairing of `2t` items.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BrauerDiagram {
    t: usize,
    partner: Vec<usize>,
}

impl BrauerDiagram {
    /// Builds a diagram from 0-based pairs.
    pub fn from_pairs(t: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if t == 0 {
            return Err(Error::Domain("diagram order must be at least 1".into()));
        }
        if pairs.len() != t {
            return Err(Error::Domain(format!("order {t} needs {t} pairs, got {}", pairs.len())));
        }
        let mut partner = vec![usize::MAX; 2 * t];
        for &(a, b) in pairs {
            if a >= 2 * t || b >= 2 * t || a == b {
                return Err(Error::Domain(format!("invalid pair ({a},{b}) for order {t}")));
            }
            if partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::Domain(format!("item repeated in pair ({a},{b})")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Ok(BrauerDiagram { t, partner })
    }

    pub fn identity(t: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..t).map(|i| (i, t + i)).collect();
        Self::from_pairs(t, &pairs)
    }

    /// Permutation diagram sending input leg `i` to output leg `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let t = perm.len();
        let pairs: Vec<_> = perm.iter().enumerate().map(|(i, &p)| (i, t + p)).collect();
        Self::from_pairs(t, &pairs)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn partner(&self, item: usize) -> usize {
        self.partner[item]
    }

    /// Pairs `(a, b)` with `a < b`, sorted by `a`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..2 * self.t)
            .filter(|&a| a < self.partner[a])
            .map(|a| (a, self.partner[a]))
            .collect()
    }

    pub fn same_column_pairs(&self) -> usize {
        self.pairs().iter().filter(|&&(a, b)| (a < self.t) == (b < self.t)).count()
    }

    pub fn is_permutation(&self) -> bool {
        self.same_column_pairs() == 0
    }

    /// Mirror image exchanging the two columns; `F(flip(s)) = F(s)^T`.
    pub fn flip(&self) -> Self {
        let t = self.t;
        let swap = |i: usize| if i < t { i + t } else { i - t };
        let mut partner = vec![0; 2 * t];
        for i in 0..2 * t {
            partner[swap(i)] = swap(self.partner[i]);
        }
        BrauerDiagram { t, partner }
    }

    fn sort_key(&self) -> (usize, Vec<(usize, usize)>) {
        (self.same_column_pairs(), self.pairs())
    }
}

impl Ord for BrauerDiagram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t.cmp(&other.t).then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for BrauerDiagram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BrauerDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        Ok(())
    }
}

impl FromStr for BrauerDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed diagram {s:?}"));
        if !s.trim().ends_with(')') {
            return Err(bad());
        }
        let mut pairs = Vec::new();
        for chunk in s.trim().split(')') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let body = chunk.strip_prefix('(').ok_or_else(bad)?;
            let (a, b) = body.split_once(',').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b == 0 {
                return Err(bad());
            }
            pairs.push((a - 1, b - 1));
        }
        Self::from_pairs(pairs.len(), &pairs)
    }
}

impl Serialize for BrauerDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BrauerDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub fn enumerate_diagrams(t: usize) -> Result<Vec<BrauerDiagram>> {
    enumerate_diagrams_capped(t, DEFAULT_MAX_ORDER)
}

/// All `(2t-1)!!` diagrams: permutations first, then by number of same-column pairs, then lexicographically.
pub fn enumerate_diagrams_capped(t: usize, max_order: usize) -> Result<Vec<BrauerDiagram>> {
    if t == 0 {
        return Err(Error::Domain("diagram order must be at least 1".into()));
    }
    if t > max_order {
        return Err(Error::capacity("Brauer diagram enumeration (order)", t, max_order));
    }
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for k in 0..free.len() {
            let b = free.remove(k);
            cur.push((a, b));
            rec(free, cur, out);
            cur.pop();
            free.insert(k, b);
        }
        free.insert(0, a);
    }
    let mut all = Vec::new();
    rec(&mut (0..2 * t).collect(), &mut Vec::new(), &mut all);
    let mut diagrams: Vec<BrauerDiagram> =
        all.iter().map(|p| BrauerDiagram::from_pairs(t, p)).collect::<Result<_>>()?;
    diagrams.sort();
    Ok(diagrams)
}

/// Linear combination of diagrams with coefficients polynomial in `delta`.
///
/// `terms[diagram][k]` is the integer coefficient of `delta^k * diagram`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BrauerAlgebraElement {
    pub terms: BTreeMap<BrauerDiagram, BTreeMap<u32, i64>>,
}

impl BrauerAlgebraElement {
    pub fn monomial(diagram: BrauerDiagram, power: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(diagram, BTreeMap::from([(power, 1)]));
        BrauerAlgebraElement { terms }
    }

    /// For a single-term element, its loop power and diagram.
    pub fn as_monomial(&self) -> Option<(&BrauerDiagram, u32)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (d, poly) = self.terms.iter().next()?;
        match poly.iter().collect::<Vec<_>>().as_slice() {
            [(&k, &1)] => Some((d, k)),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = BrauerAlgebraElement::default();
        for (a, pa) in &self.terms {
            for (b, pb) in &other.terms {
                let (loops, c) = compose_diagrams(a, b)?;
                let entry = out.terms.entry(c).or_default();
                for (&ka, &ca) in pa {
                    for (&kb, &cb) in pb {
                        *entry.entry(ka + kb + loops).or_insert(0) += ca * cb;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Numerical coefficients at a given `delta`.
    pub fn evaluate(&self, delta: f64) -> BTreeMap<BrauerDiagram, f64> {
        self.terms
            .iter()
            .map(|(d, poly)| (d.clone(), poly.iter().map(|(&k, &c)| c as f64 * delta.powi(k as i32)).sum()))
            .collect()
    }
}

/// Product `a * b` (`b` applied first) as `delta^loops * diagram`.
pub fn compose(a: &BrauerDiagram, b: &BrauerDiagram) -> Result<BrauerAlgebraElement> {
    let (loops, c) = compose_diagrams(a, b)?;
    Ok(BrauerAlgebraElement::monomial(c, loops))
}

/// Stacks `b`'s outputs onto `a`'s inputs. Returns the number of closed loops and the outer pairing.
pub fn compose_diagrams(a: &BrauerDiagram, b: &BrauerDiagram) -> Result<(u32, BrauerDiagram)> {
    if a.t != b.t {
        return Err(Error::Domain(format!("cannot compose orders {} and {}", a.t, b.t)));
    }
    let t = a.t;
    // Middle node m is b's right item t+m, identified with a's left item m.
    let mut middle_seen = vec![false; t];
    // Walks from an outer endpoint; `in_b` says which diagram the current item belongs to.
    let walk = |mut in_b: bool, mut item: usize, seen: &mut Vec<bool>| -> usize {
        loop {
            if in_b {
                let p = b.partner[item];
                if p >= t {
                    seen[p - t] = true;
                    in_b = false;
                    item = p - t;
                } else {
                    return p;
                }
            } else {
                let p = a.partner[item];
                if p < t {
                    seen[p] = true;
                    in_b = true;
                    item = p + t;
                } else {
                    return p;
                }
            }
        }
    };
    let mut pairs = Vec::with_capacity(t);
    let mut done = vec![false; 2 * t];
    for start in 0..2 * t {
        if done[start] {
            continue;
        }
        let end = if start < t { walk(true, start, &mut middle_seen) } else { walk(false, start, &mut middle_seen) };
        done[start] = true;
        done[end] = true;
        pairs.push((start, end));
    }
    let mut loops = 0;
    for m in 0..t {
        if middle_seen[m] {
            continue;
        }
        loops += 1;
        let mut cur = m;
        loop {
            middle_seen[cur] = true;
            // a: left cur -> partner, necessarily another left item; b: right -> right.
            let next_a = a.partner[cur];
            middle_seen[next_a] = true;
            let next = b.partner[next_a + t] - t;
            if next == m {
                break;
            }
            cur = next;
        }
    }
    Ok((loops, BrauerDiagram::from_pairs(t, &pairs)?))
}

/// Nonzero entries `(row, col, value)` of `F_d(sigma)`; exactly `d^t` of them.
pub fn represent_sparse(sigma: &BrauerDiagram, d: usize, group: BrauerGroup) -> Result<Vec<(usize, usize, f64)>> {
    group.check_dim(d)?;
    let t = sigma.t;
    let total = d.checked_pow(t as u32).ok_or_else(|| Error::capacity("d^t", usize::MAX, usize::MAX))?;
    let form = group.form(d);
    let pairs = sigma.pairs();
    // Place value of copy p in a d^t index (copy 1 most significant).
    let place: Vec<usize> = (0..t).map(|p| d.pow((t - 1 - p) as u32)).collect();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; t];
    for _ in 0..total {
        let (mut row, mut col, mut val) = (0usize, 0usize, 1.0);
        for (&(a, b), &v) in pairs.iter().zip(&digits) {
            if a < t && b >= t {
                col += v * place[a];
                row += v * place[b - t];
            } else if b < t {
                let (w, s) = form(v);
                col += v * place[a] + w * place[b];
                val *= s;
            } else {
                // J[out_q][out_p] with p = a - t < q = b - t.
                let (w, s) = form(v);
                row += v * place[b - t] + w * place[a - t];
                val *= s;
            }
        }
        out.push((row, col, val));
        for v in digits.iter_mut().rev() {
            *v += 1;
            if *v < d {
                break;
            }
            *v = 0;
        }
    }
    Ok(out)
}

pub fn represent(sigma: &BrauerDiagram, d: usize, group: BrauerGroup) -> Result<DenseOperator> {
    represent_with_limit(sigma, d, group, DENSE_REP_MAX_DIM)
}

pub fn represent_with_limit(sigma: &BrauerDiagram, d: usize, group: BrauerGroup, max_dim: usize) -> Result<DenseOperator> {
    let dim = d.checked_pow(sigma.t as u32).unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::capacity("dense Brauer representation (d^t)", dim, max_dim));
    }
    let mut m = DenseOperator::zeros(dim);
    for (r, c, v) in represent_sparse(sigma, d, group)? {
        m.set(r, c, m.get(r, c) + Complex64::new(v, 0.0));
    }
    Ok(m)
}

/// `Tr[F(mu)^T F(nu)]` by cycle counting.
///
/// Every cycle of the union of the two pairings contributes `Tr` of a product
/// of `I`, `J` and `J^T`; for `J = Omega` that is `0` for an odd number of
/// `J` edges and `(-1)^{m/2} d` times the orientation sign otherwise.
pub fn gram_entry(mu: &BrauerDiagram, nu: &BrauerDiagram, d: usize, group: BrauerGroup) -> Result<f64> {
    if mu.t != nu.t {
        return Err(Error::Domain(format!("cannot pair orders {} and {}", mu.t, nu.t)));
    }
    group.check_dim(d)?;
    let t = mu.t;
    let n_items = 2 * t;
    // Orientation of a J edge (u, v): forward when traversed u -> v.
    let j_edge_forward = |u: usize, v: usize| -> Option<bool> {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        if lo < t && hi >= t {
            None
        } else if hi < t {
            Some(u == lo)
        } else {
            Some(u == hi)
        }
    };
    let mut seen = vec![false; n_items];
    let mut value = 1.0;
    let df = d as f64;
    for start in 0..n_items {
        if seen[start] {
            continue;
        }
        let (mut j_edges, mut reversed) = (0u32, 0u32);
        let mut cur = start;
        let mut use_mu = true;
        loop {
            seen[cur] = true;
            let next = if use_mu { mu.partner[cur] } else { nu.partner[cur] };
            if let Some(fwd) = j_edge_forward(cur, next) {
                j_edges += 1;
                if !fwd {
                    reversed += 1;
                }
            }
            seen[next] = true;
            use_mu = !use_mu;
            cur = next;
            if cur == start && use_mu {
                break;
            }
        }
        value *= match group {
            BrauerGroup::O => df,
            BrauerGroup::Sp => {
                if j_edges % 2 == 1 {
                    return Ok(0.0);
                }
                let sign = if (j_edges / 2 + reversed) % 2 == 0 { 1.0 } else { -1.0 };
                sign * df
            }
        };
    }
    Ok(value)
}

/// Gram matrix of the commutant basis, with its (pseudo-)inverse.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub t: usize,
    pub d: usize,
    pub group: BrauerGroup,
    pub diagrams: Vec<BrauerDiagram>,
    pub entries: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Numerical rank used for `inverse`; less than `diagrams.len()` means a pseudo-inverse.
    pub rank: usize,
    pub cutoff: f64,
}

impl GramMatrix {
    pub fn is_singular(&self) -> bool {
        self.rank < self.diagrams.len()
    }

    /// `(d^t, B)` with `W = d^t (I + B / d)`.
    pub fn asymptotic_decomposition(&self) -> (f64, DMatrix<f64>) {
        let scale = (self.d as f64).powi(self.t as i32);
        let n = self.diagrams.len();
        let b = (&self.entries / scale - DMatrix::<f64>::identity(n, n)) * self.d as f64;
        (scale, b)
    }

    /// `d^t W^{-1} - I`, the correction to the leading-order Weingarten weights.
    pub fn weingarten_correction(&self) -> DMatrix<f64> {
        let scale = (self.d as f64).powi(self.t as i32);
        let n = self.diagrams.len();
        &self.inverse * scale - DMatrix::<f64>::identity(n, n)
    }
}

pub fn gram(t: usize, d: usize, group: BrauerGroup) -> Result<GramMatrix> {
    gram_with_cutoff(t, d, group, DEFAULT_PINV_CUTOFF)
}

pub fn gram_with_cutoff(t: usize, d: usize, group: BrauerGroup, cutoff: f64) -> Result<GramMatrix> {
    group.check_dim(d)?;
    let diagrams = enumerate_diagrams(t)?;
    let n = diagrams.len();
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| gram_entry(&diagrams[k / n], &diagrams[k % n], d, group))
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_row_slice(n, n, &values);
    let (inverse, rank) = pseudo_inverse(&entries, cutoff)?;
    Ok(GramMatrix { t, d, group, diagrams, entries, inverse, rank, cutoff })
}

fn pseudo_inverse(w: &DMatrix<f64>, cutoff: f64) -> Result<(DMatrix<f64>, usize)> {
    let eig = SymmetricEigen::new(w.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if lmax == 0.0 {
        return Err(Error::Numerical("Gram matrix is zero".into()));
    }
    let mut rank = 0;
    let inv_vals = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| {
            if l.abs() > cutoff * lmax {
                rank += 1;
                1.0 / l
            } else {
                0.0
            }
        }),
    );
    let v = &eig.eigenvectors;
    Ok((v * DMatrix::from_diagonal(&inv_vals) * v.transpose(), rank))
}

#[derive(Clone, Copy, Debug)]
pub struct TwirlOptions {
    pub allow_pseudo_inverse: bool,
    pub cutoff: f64,
}

impl Default for TwirlOptions {
    fn default() -> Self {
        TwirlOptions { allow_pseudo_inverse: true, cutoff: DEFAULT_PINV_CUTOFF }
    }
}

/// `T(X) = sum_mu coefficients[mu] F(sigma_mu)`.
#[derive(Clone, Debug, Serialize)]
pub struct TwirlResult {
    pub t: usize,
    pub d: usize,
    pub group: BrauerGroup,
    pub coefficients: Vec<(BrauerDiagram, Complex64)>,
    /// Frobenius norm of `X - T(X)`.
    pub residual: f64,
}

impl TwirlResult {
    pub fn coefficient(&self, sigma: &BrauerDiagram) -> Option<Complex64> {
        self.coefficients.iter().find(|(s, _)| s == sigma).map(|(_, c)| *c)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let dim = self.d.pow(self.t as u32);
        let mut m = DenseOperator::zeros(dim);
        for (sigma, c) in &self.coefficients {
            for (r, col, v) in represent_sparse(sigma, self.d, self.group)? {
                m.set(r, col, m.get(r, col) + c * v);
            }
        }
        Ok(m)
    }
}

fn infer_d(dim: usize, t: usize) -> Option<usize> {
    let guess = (dim as f64).powf(1.0 / t as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&d| d > 0 && d.checked_pow(t as u32) == Some(dim))
}

pub fn twirl(x: &DenseOperator, t: usize, d: usize, group: BrauerGroup) -> Result<TwirlResult> {
    let w = gram(t, d, group)?;
    twirl_with_gram(x, &w, TwirlOptions::default())
}

/// Haar average of `U^{(x)t} X U^dagger^{(x)t}` via `c = W^+ v`, `v_mu = Tr[F_mu^T X]`.
pub fn twirl_with_gram(x: &DenseOperator, w: &GramMatrix, opts: TwirlOptions) -> Result<TwirlResult> {
    let (t, d, group) = (w.t, w.d, w.group);
    if infer_d(x.dim(), t) != Some(d) {
        return Err(Error::Dimension(format!("operator of dimension {} is not on {t} copies of C^{d}", x.dim())));
    }
    let (inverse, rank) = if opts.cutoff != w.cutoff {
        pseudo_inverse(&w.entries, opts.cutoff)?
    } else {
        (w.inverse.clone(), w.rank)
    };
    let n = w.diagrams.len();
    if rank < n && !opts.allow_pseudo_inverse {
        return Err(Error::Numerical(format!("Gram matrix has rank {rank} < {n} and pseudo-inverse is disabled")));
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (k, sigma) in w.diagrams.iter().enumerate() {
        for (r, c, f) in represent_sparse(sigma, d, group)? {
            v[k] += x.get(r, c) * f;
        }
    }
    let coeffs: Vec<Complex64> = (0..n)
        .map(|mu| (0..n).map(|nu| v[nu] * inverse[(mu, nu)]).sum())
        .collect();
    // |X - T|^2 = |X|^2 - 2 Re <T, X> + c^dagger W c.
    let x2 = x.frobenius_norm().powi(2);
    let cross: f64 = coeffs.iter().zip(&v).map(|(c, vv)| (c.conj() * vv).re).sum();
    let mut t2 = 0.0;
    for mu in 0..n {
        for nu in 0..n {
            t2 += (coeffs[mu].conj() * coeffs[nu]).re * w.entries[(mu, nu)];
        }
    }
    let residual = (x2 - 2.0 * cross + t2).max(0.0).sqrt();
    Ok(TwirlResult {
        t,
        d,
        group,
        coefficients: w.diagrams.iter().cloned().zip(coeffs).collect(),
        residual,
    })
}

/// Closed-form second-moment symplectic twirl; coefficients of `(I, SWAP, Pi_s)`.
pub fn twirl_sp_t2_closed_form(x: &DenseOperator, d: usize) -> Result<[Complex64; 3]> {
    if d <= 2 {
        return Err(Error::Domain(format!("closed form needs d > 2, got {d}")));
    }
    let diagrams = enumerate_diagrams(2)?;
    let mut tr = [Complex64::new(0.0, 0.0); 3];
    for (k, sigma) in diagrams.iter().enumerate() {
        for (r, c, f) in represent_sparse(sigma, d, BrauerGroup::Sp)? {
            // Tr[X F] = sum X[c][r] F[r][c]
            tr[k] += x.get(c, r) * f;
        }
    }
    let df = d as f64;
    let den = df * (df + 1.0) * (df - 2.0);
    let [a, s, p] = tr;
    Ok([
        ((df - 1.0) * a - s + p) / den,
        (-a + (df - 1.0) * s - p) / den,
        (a - s + (df - 1.0) * p) / den,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dg(s: &str) -> BrauerDiagram {
        s.parse().unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_diagrams(1).unwrap(), vec![dg("(1,2)")]);
        let t2: Vec<String> = enumerate_diagrams(2).unwrap().iter().map(|d| d.to_string()).collect();
        assert_eq!(t2, vec!["(1,3)(2,4)", "(1,4)(2,3)", "(1,2)(3,4)"]);
        assert_eq!(enumerate_diagrams(3).unwrap().len(), 15);
        assert_eq!(enumerate_diagrams(4).unwrap().len(), 105);
        let t3 = enumerate_diagrams(3).unwrap();
        assert!(t3[..6].iter().all(|d| d.is_permutation()));
        assert!(t3[6..].iter().all(|d| !d.is_permutation()));
        assert!(enumerate_diagrams_capped(4, 3).unwrap_err().is_capacity());
    }

    #[test]
    fn composition_examples() {
        let id = dg("(1,3)(2,4)");
        let swap = dg("(1,4)(2,3)");
        let cup = dg("(1,2)(3,4)");
        assert_eq!(compose_diagrams(&id, &id).unwrap(), (0, id.clone()));
        assert_eq!(compose_diagrams(&swap, &swap).unwrap(), (0, id.clone()));
        assert_eq!(compose_diagrams(&cup, &cup).unwrap(), (1, cup.clone()));
        assert_eq!(compose_diagrams(&cup, &swap).unwrap(), (0, cup.clone()));
        let e = compose(&cup, &cup).unwrap();
        assert_eq!(e.as_monomial(), Some((&cup, 1)));
        assert_eq!(e.evaluate(-4.0)[&cup], -4.0);
    }

    #[test]
    fn t2_representations() {
        let d = 4;
        let f = |s: &str| represent(&dg(s), d, BrauerGroup::Sp).unwrap();
        let id = f("(1,3)(2,4)");
        assert!(id.distance_max(&DenseOperator::identity(16)) == 0.0);
        let swap = f("(1,4)(2,3)");
        for i in 0..d {
            for j in 0..d {
                assert_eq!(swap.get(i * d + j, j * d + i).re, 1.0);
            }
        }
        let pi = f("(1,2)(3,4)");
        assert_eq!(pi.trace().re, -(d as f64));
        assert!((&pi * &pi).distance_max(&pi.scale(-(d as f64))) < 1e-12);
        // (I (x) Omega) sum |ii><jj| (I (x) Omega)
        let omega = DenseOperator::omega(d).unwrap();
        let io = DenseOperator::identity(d).kron(&omega);
        let bell = DenseOperator::from_fn(d * d, |r, c| {
            let diag = |k: usize| k / d == k % d;
            Complex64::new(if diag(r) && diag(c) { 1.0 } else { 0.0 }, 0.0)
        });
        let expected = &(&io * &bell) * &io;
        assert!(pi.distance_max(&expected) < 1e-12);
        assert_eq!(represent(&dg("(1,2)"), 6, BrauerGroup::Sp).unwrap().distance_max(&DenseOperator::identity(6)), 0.0);
    }

    #[test]
    fn flip_is_transpose() {
        for sigma in enumerate_diagrams(3).unwrap() {
            for group in [BrauerGroup::Sp, BrauerGroup::O] {
                let a = represent(&sigma.flip(), 4, group).unwrap();
                let b = represent(&sigma, 4, group).unwrap().transpose();
                assert_eq!(a.distance_max(&b), 0.0, "{sigma}");
            }
        }
    }

    #[test]
    fn sparse_has_d_pow_t_entries() {
        for sigma in enumerate_diagrams(3).unwrap() {
            assert_eq!(represent_sparse(&sigma, 4, BrauerGroup::Sp).unwrap().len(), 64);
        }
    }

    #[test]
    fn gram_small_cases() {
        let w1 = gram(1, 6, BrauerGroup::Sp).unwrap();
        assert_eq!(w1.entries[(0, 0)], 6.0);
        for d in [4usize, 8, 16] {
            let df = d as f64;
            let w = gram(2, d, BrauerGroup::Sp).unwrap();
            let expected = DMatrix::from_row_slice(3, 3, &[df * df, df, -df, df, df * df, df, -df, df, df * df]);
            assert_eq!(w.entries, expected);
        }
        let (scale, b) = gram(2, 8, BrauerGroup::Sp).unwrap().asymptotic_decomposition();
        assert_eq!(scale, 64.0);
        assert_eq!(b, DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -1.0, 1.0, 0.0, 1.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn gram_matches_dense_traces() {
        for group in [BrauerGroup::Sp, BrauerGroup::O] {
            for t in 1..=3 {
                let diagrams = enumerate_diagrams(t).unwrap();
                let reps: Vec<_> = diagrams.iter().map(|s| represent(s, 4, group).unwrap()).collect();
                let w = gram(t, 4, group).unwrap();
                for (i, a) in reps.iter().enumerate() {
                    for (j, b) in reps.iter().enumerate() {
                        let dense = a.hs_inner(b).re;
                        assert_eq!(w.entries[(i, j)], dense, "{group:?} {} {}", diagrams[i], diagrams[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn twirl_fixed_points_and_closed_form() {
        let d = 4;
        let w = gram(2, d, BrauerGroup::Sp).unwrap();
        let diagrams = &w.diagrams;
        for (k, sigma) in diagrams.iter().enumerate() {
            let x = represent(sigma, d, BrauerGroup::Sp).unwrap();
            let r = twirl_with_gram(&x, &w, TwirlOptions::default()).unwrap();
            for (j, (_, c)) in r.coefficients.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((c - Complex64::new(target, 0.0)).norm() < 1e-12);
            }
            assert!(r.residual < 1e-9);
        }
        // rho_0^{(x)2} with rho_0 = |0><0|.
        let mut x = DenseOperator::zeros(16);
        x.set(0, 0, Complex64::new(1.0, 0.0));
        let r = twirl_with_gram(&x, &w, TwirlOptions::default()).unwrap();
        let closed = twirl_sp_t2_closed_form(&x, d).unwrap();
        let expect = [0.05, 0.05, 0.0];
        for k in 0..3 {
            assert!((r.coefficients[k].1 - closed[k]).norm() < 1e-14);
            assert!((closed[k].re - expect[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_gram_needs_pseudo_inverse() {
        let w = gram(2, 2, BrauerGroup::Sp).unwrap();
        assert!(w.is_singular());
        let x = DenseOperator::identity(4);
        let strict = TwirlOptions { allow_pseudo_inverse: false, ..Default::default() };
        assert!(matches!(twirl_with_gram(&x, &w, strict), Err(Error::Numerical(_))));
        let r = twirl_with_gram(&x, &w, TwirlOptions::default()).unwrap();
        assert!(r.to_dense().unwrap().distance_max(&x) < 1e-10);
    }

    #[test]
    fn text_round_trip() {
        for sigma in enumerate_diagrams(3).unwrap() {
            assert_eq!(sigma.to_string().parse::<BrauerDiagram>().unwrap(), sigma);
        }
        assert!("(1,1)".parse::<BrauerDiagram>().is_err());
        assert!("(1,2".parse::<BrauerDiagram>().is_err());
    }
}
