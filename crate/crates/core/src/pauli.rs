//! Bit-packed n-qubit Pauli strings.
//!
//! Bit ordering is fixed once for the whole crate: qubit `q` (0-based, so
//! `q = 0` is the distinguished first qubit that carries the symplectic form)
//! is the leftmost tensor factor, the lowest bit of the `x`/`z` masks, the
//! leftmost character of the text form, and the most significant bit of a
//! computational-basis index in Kronecker order. `index_masks` converts the
//! mask convention into the basis-index convention.
//!
//! A factor is encoded as `(x, z)`: `00 = I`, `10 = X`, `11 = Y`, `01 = Z`,
//! and the string carries a global phase `i^phase_exp`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::DenseOperator;
use crate::error::{Error, Result};

/// Largest qubit count representable by the 64-bit masks.
pub const MAX_QUBITS: usize = 64;

/// Default limit for conversions to dense matrices (`2^n x 2^n`).
pub const DENSE_MAX_QUBITS: usize = 12;

/// Default limit for [`enumerate_sp_basis`]; the enumeration scans `4^n` strings.
pub const SP_BASIS_MAX_QUBITS: usize = 10;

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^phase_exp * P_0 (x) P_1 (x) ... (x) P_{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask_for(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_same_size(a: &PauliString, b: &PauliString) -> Result<()> {
    if a.n != b.n {
        return Err(Error::Dimension(format!(
            "Pauli strings act on {} and {} qubits",
            a.n, b.n
        )));
    }
    Ok(())
}

impl PauliString {
    /// Builds a string from raw masks; `phase_exp` is reduced mod 4.
    pub fn new(n: usize, x_mask: u64, z_mask: u64, phase_exp: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let valid = mask_for(n);
        if (x_mask | z_mask) & !valid != 0 {
            return Err(Error::Domain(format!("mask bits set beyond qubit {}", n - 1)));
        }
        Ok(PauliString { n: n as u8, x: x_mask, z: z_mask, phase: phase_exp % 4 })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0, 0)
    }

    /// Product of single-qubit factors at the given (0-based) qubits.
    pub fn from_factors(n: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for &(q, p) in factors {
            if q >= n {
                return Err(Error::Domain(format!("qubit {q} out of range for n = {n}")));
            }
            let bit = 1u64 << q;
            if (x | z) & bit != 0 {
                return Err(Error::Domain(format!("qubit {q} listed twice")));
            }
            let (bx, bz) = p.bits();
            if bx {
                x |= bit;
            }
            if bz {
                z |= bit;
            }
        }
        Self::new(n, x, z, 0)
    }

    /// Single non-identity factor `p` on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        Self::from_factors(n, &[(q, p)])
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn factor(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn factors(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n()).map(move |q| self.factor(q))
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Same tensor factors with the phase stripped.
    pub fn direction(&self) -> Self {
        PauliString { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase_exp: u8) -> Self {
        PauliString { phase: phase_exp % 4, ..*self }
    }

    /// Hermitian strings have a real phase (`+1` or `-1`).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Pauli-group product `self * other`, phases included.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_same_size(self, other)?;
        // sigma(x, z) = i^{x z} X^x Z^z, and Z^{z1} X^{x2} = (-1)^{z1 . x2} X^{x2} Z^{z1}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let exp = self.phase as u32
            + other.phase as u32
            + self.y_count()
            + other.y_count()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Ok(PauliString { n: self.n, x, z, phase: (exp % 4) as u8 })
    }

    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        check_same_size(self, other)?;
        Ok(((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0)
    }

    /// Direction of `[self, other]`, or `None` when the two strings commute.
    ///
    /// For anticommuting strings the commutator is `2 self * other`, so the
    /// direction is simply the product with its phase removed.
    pub fn commutator(&self, other: &PauliString) -> Result<Option<PauliString>> {
        if self.commutes_with(other)? {
            return Ok(None);
        }
        Ok(Some(self.multiply(other)?.direction()))
    }

    /// `P^T = P` iff the number of `Y` factors is even.
    pub fn is_symmetric(&self) -> bool {
        self.y_count() % 2 == 0
    }

    /// Membership of `iP` in `sp(d/2)` for `Omega = iY (x) I`.
    ///
    /// Strings of the form `{X,Y,Z} (x) P_s` or `I (x) P_a`, with `P_s`/`P_a`
    /// symmetric/antisymmetric on the remaining qubits. For `n = 1` this
    /// reduces to `{X, Y, Z}`, i.e. `sp(1) = su(2)`.
    pub fn in_sp_algebra(&self) -> bool {
        let first = self.factor(0);
        let rest_y = self.y_count() - u32::from(first == Pauli::Y);
        match first {
            Pauli::I => rest_y % 2 == 1,
            _ => rest_y % 2 == 0,
        }
    }

    /// Same predicate evaluated as `P^T Omega = -Omega P` using
    /// `P^T = (-1)^{#Y} P` and the (anti)commutation of `P` with `Y_0`.
    pub fn in_sp_algebra_symbolic(&self) -> bool {
        let transpose_sign_negative = !self.is_symmetric();
        let anticommutes_with_y0 = matches!(self.factor(0), Pauli::X | Pauli::Z);
        // P^T Y0 = s_T P Y0 = s_T s_c Y0 P, which must equal -Y0 P.
        transpose_sign_negative != anticommutes_with_y0
    }

    /// Masks in computational-basis-index convention (qubit 0 = most significant bit).
    pub fn index_masks(&self) -> (usize, usize) {
        let n = self.n();
        let mut xi = 0usize;
        let mut zi = 0usize;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if self.x >> q & 1 == 1 {
                xi |= bit;
            }
            if self.z >> q & 1 == 1 {
                zi |= bit;
            }
        }
        (xi, zi)
    }

    /// Action on a computational-basis index: `P|b> = i^k |b'>`; returns `(b', k)`.
    pub fn act_on_index(&self, masks: (usize, usize), b: usize) -> (usize, u8) {
        let (xi, zi) = masks;
        let k = self.phase as u32 + self.y_count() + 2 * (zi & b).count_ones();
        (b ^ xi, (k % 4) as u8)
    }

    /// `P psi` for a statevector in Kronecker order.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != 1usize << self.n() {
            return Err(Error::Dimension(format!(
                "state of length {} for a {}-qubit Pauli",
                psi.len(),
                self.n()
            )));
        }
        let masks = self.index_masks();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (b, amp) in psi.iter().enumerate() {
            let (b2, k) = self.act_on_index(masks, b);
            out[b2] = *amp * i_pow(k);
        }
        Ok(out)
    }

    /// `<psi|P|psi>` without materialising `P psi`.
    pub fn expectation(&self, psi: &[Complex64]) -> Result<Complex64> {
        if psi.len() != 1usize << self.n() {
            return Err(Error::Dimension(format!(
                "state of length {} for a {}-qubit Pauli",
                psi.len(),
                self.n()
            )));
        }
        let masks = self.index_masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in psi.iter().enumerate() {
            let (b2, k) = self.act_on_index(masks, b);
            acc += psi[b2].conj() * *amp * i_pow(k);
        }
        Ok(acc)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.to_dense_with_limit(DENSE_MAX_QUBITS)
    }

    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<DenseOperator> {
        if self.n() > max_qubits {
            return Err(Error::capacity("dense Pauli matrix (qubits)", self.n(), max_qubits));
        }
        let d = 1usize << self.n();
        let masks = self.index_masks();
        let mut m = DenseOperator::zeros(d);
        for b in 0..d {
            let (b2, k) = self.act_on_index(masks, b);
            m.set(b2, b, i_pow(k));
        }
        Ok(m)
    }
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for p in self.factors() {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let mut factors = Vec::with_capacity(body.len());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("unexpected character {other:?} in {s:?}"))),
            };
            if p != Pauli::I {
                factors.push((q, p));
            }
        }
        let n = body.chars().count();
        Ok(Self::from_factors(n, &factors)?.with_phase(phase))
    }
}

impl serde::Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All Pauli directions `P` with `iP` in `sp(d/2)`, in increasing `(x, z)` order.
pub fn enumerate_sp_basis(n: usize) -> Result<Vec<PauliString>> {
    enumerate_sp_basis_capped(n, SP_BASIS_MAX_QUBITS)
}

pub fn enumerate_sp_basis_capped(n: usize, max_qubits: usize) -> Result<Vec<PauliString>> {
    if n == 0 {
        return Err(Error::Domain("qubit count must be at least 1".into()));
    }
    if n > max_qubits {
        return Err(Error::capacity("sp basis enumeration (qubits)", n, max_qubits));
    }
    let d = 1usize << n;
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    let full = mask_for(n);
    for x in 0..=full {
        for z in 0..=full {
            let p = PauliString { n: n as u8, x, z, phase: 0 };
            if p.in_sp_algebra() {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// The symplectic form `Omega = iY (x) I^{(x) n-1}` on `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        Ok(SymplecticForm { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `iY_0` as a phased Pauli string.
    pub fn as_pauli(&self) -> PauliString {
        PauliString { n: self.n as u8, x: 1, z: 1, phase: 1 }
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.as_pauli().to_dense()
    }
}
