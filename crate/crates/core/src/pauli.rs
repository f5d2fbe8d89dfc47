//! Pauli strings, weighted sums of them, and the Jordan–Wigner map.
//!
//! A factor pattern is stored as two bitmasks: bit `k` of `x` and `z` give the
//! symbol on qubit `k` as `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`.
//! The overall phase of a [`PauliString`] is an exponent of `i` modulo 4.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are discarded after every combine.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Largest register the bitmask encoding supports.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Phase-free factor pattern. Ordering is by `(x, z)` and is used for
/// deterministic iteration everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliPattern {
    pub x: u64,
    pub z: u64,
}

impl PauliPattern {
    pub const IDENTITY: PauliPattern = PauliPattern { x: 0, z: 0 };

    pub fn new(x: u64, z: u64) -> Self {
        PauliPattern { x, z }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        let (x, z) = p.bits();
        PauliPattern {
            x: (x as u64) << qubit,
            z: (z as u64) << qubit,
        }
    }

    pub fn from_factors(factors: &[(usize, Pauli)]) -> Self {
        factors.iter().fold(PauliPattern::IDENTITY, |acc, &(q, p)| {
            let s = PauliPattern::single(q, p);
            // later factors on the same qubit overwrite
            let mask = !(1u64 << q);
            PauliPattern {
                x: (acc.x & mask) | s.x,
                z: (acc.z & mask) | s.z,
            }
        })
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Highest qubit index carrying a non-identity factor, plus one.
    pub fn support_len(&self) -> usize {
        64 - (self.x | self.z).leading_zeros() as usize
    }

    pub fn commutes_with(&self, other: &PauliPattern) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product of two patterns as `(i^k, pattern)`.
    pub fn product(&self, other: &PauliPattern) -> (u8, PauliPattern) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // sigma(x,z) = i^{|x&z|} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{|z1&x2|}
        let k = self.y_count() as i64 + other.y_count() as i64
            + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        (k.rem_euclid(4) as u8, PauliPattern { x, z })
    }

    /// Render as e.g. `X0 Y3 Z5`, or `I` for the identity.
    pub fn to_token_string(&self) -> String {
        if self.is_identity() {
            return "I".to_string();
        }
        let mut parts = Vec::new();
        for q in 0..self.support_len() {
            match self.get(q) {
                Pauli::I => {}
                Pauli::X => parts.push(format!("X{q}")),
                Pauli::Y => parts.push(format!("Y{q}")),
                Pauli::Z => parts.push(format!("Z{q}")),
            }
        }
        parts.join(" ")
    }

    /// Parse factor tokens like `["X0", "Y3"]` or `["I"]`.
    pub fn parse_tokens<'a, I>(tokens: I) -> std::result::Result<PauliPattern, String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut pat = PauliPattern::IDENTITY;
        let mut seen = 0u64;
        let mut any = false;
        let mut identity_token = false;
        for tok in tokens {
            any = true;
            if tok == "I" {
                identity_token = true;
                continue;
            }
            let mut chars = tok.chars();
            let p = match chars.next() {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(format!("bad factor token `{tok}`")),
            };
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| format!("bad qubit index in `{tok}`"))?;
            if q >= MAX_QUBITS {
                return Err(format!("qubit index {q} exceeds {MAX_QUBITS}"));
            }
            if seen & (1 << q) != 0 {
                return Err(format!("qubit {q} appears twice"));
            }
            seen |= 1 << q;
            let s = PauliPattern::single(q, p);
            pat.x |= s.x;
            pat.z |= s.z;
        }
        if !any {
            return Err("missing factors (use `I` for the identity)".to_string());
        }
        if identity_token && !pat.is_identity() {
            return Err("`I` cannot be combined with other factors".to_string());
        }
        Ok(pat)
    }
}

impl fmt::Display for PauliPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_token_string())
    }
}

/// `i^k` as a complex number.
pub fn phase_value(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A tensor product of single-qubit Paulis with a phase in `{+1, +i, -1, -i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    pattern: PauliPattern,
    phase: u8,
}

impl PauliString {
    pub fn new(n_qubits: usize, pattern: PauliPattern, phase: u8) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::CeilingExceeded {
                n: n_qubits,
                ceiling: MAX_QUBITS,
            });
        }
        if pattern.support_len() > n_qubits {
            return Err(Error::Dimension {
                expected: n_qubits,
                found: pattern.support_len(),
            });
        }
        Ok(PauliString {
            n_qubits,
            pattern,
            phase: phase % 4,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            pattern: PauliPattern::IDENTITY,
            phase: 0,
        }
    }

    /// Build from per-qubit factors; `factors[k]` acts on qubit `k`.
    pub fn from_factors(factors: &[Pauli]) -> Result<Self> {
        let pattern = PauliPattern::from_factors(
            &factors.iter().copied().enumerate().collect::<Vec<_>>(),
        );
        PauliString::new(factors.len(), pattern, 0)
    }

    /// Parse tokens such as `"X0 Y1"` into a phase-`+1` string.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let pattern = PauliPattern::parse_tokens(text.split_whitespace())
            .map_err(Error::Validation)?;
        PauliString::new(n_qubits, pattern, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pattern(&self) -> PauliPattern {
        self.pattern
    }

    /// Exponent `k` of the phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> Complex64 {
        phase_value(self.phase)
    }

    pub fn factors(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.pattern.get(q)).collect()
    }

    /// True when the phase is real, i.e. the string is self-adjoint.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn adjoint(&self) -> Self {
        PauliString {
            phase: (4 - self.phase) % 4,
            ..*self
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.pattern.commutes_with(&other.pattern)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign} {}", self.pattern)
    }
}

/// Exact product `p * q` including the accumulated phase.
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.n_qubits != q.n_qubits {
        return Err(Error::Dimension {
            expected: p.n_qubits,
            found: q.n_qubits,
        });
    }
    let (k, pattern) = p.pattern.product(&q.pattern);
    Ok(PauliString {
        n_qubits: p.n_qubits,
        pattern,
        phase: (p.phase + q.phase + k) % 4,
    })
}

/// Complex-weighted sum of phase-free Pauli patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliPattern, Complex64>,
    drop_tol: f64,
}

impl QubitOperator {
    pub fn zero(n_qubits: usize) -> Self {
        QubitOperator {
            n_qubits,
            terms: BTreeMap::new(),
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::constant(n_qubits, Complex64::new(1.0, 0.0))
    }

    pub fn constant(n_qubits: usize, c: Complex64) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(PauliPattern::IDENTITY, c);
        op
    }

    pub fn from_string(s: &PauliString) -> Self {
        let mut op = Self::zero(s.n_qubits);
        op.add_term(s.pattern, s.phase_value());
        op
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliPattern, Complex64)>,
    {
        let mut op = Self::zero(n_qubits);
        for (p, c) in terms {
            if p.support_len() > n_qubits {
                return Err(Error::Dimension {
                    expected: n_qubits,
                    found: p.support_len(),
                });
            }
            op.add_term(p, c);
        }
        Ok(op)
    }

    pub fn with_drop_tol(mut self, tol: f64) -> Self {
        self.drop_tol = tol;
        self.prune();
        self
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliPattern, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliPattern) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Add `c * pattern`, dropping the entry if it cancels below tolerance.
    pub fn add_term(&mut self, p: PauliPattern, c: Complex64) {
        let entry = self.terms.entry(p).or_default();
        *entry += c;
        if entry.norm() < self.drop_tol {
            self.terms.remove(&p);
        }
    }

    fn prune(&mut self) {
        let tol = self.drop_tol;
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    fn check_dims(&self, other: &QubitOperator) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &QubitOperator) -> Result<QubitOperator> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &QubitOperator) -> Result<QubitOperator> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, -*c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &QubitOperator) -> Result<QubitOperator> {
        self.check_dims(other)?;
        let mut acc: BTreeMap<PauliPattern, Complex64> = BTreeMap::new();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let (k, p) = p1.product(p2);
                *acc.entry(p).or_default() += c1 * c2 * phase_value(k);
            }
        }
        let mut out = QubitOperator {
            n_qubits: self.n_qubits,
            terms: acc,
            drop_tol: self.drop_tol,
        };
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> QubitOperator {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    pub fn scale_real(&self, c: f64) -> QubitOperator {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> QubitOperator {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    /// Every pattern is self-adjoint, so the sum is Hermitian iff all
    /// coefficients are real to `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// True when every term has an even number of `Y` factors and a real
    /// coefficient, so the dense matrix is real.
    pub fn is_real_matrix(&self, tol: f64) -> bool {
        self.terms.iter().all(|(p, c)| {
            if p.y_count() % 2 == 0 {
                c.im.abs() <= tol
            } else {
                c.re.abs() <= tol
            }
        })
    }

    /// Sum of coefficient magnitudes, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Deterministic content hash over patterns and coefficient bits.
    pub fn content_hash(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.n_qubits.hash(&mut h);
        for (p, c) in &self.terms {
            p.hash(&mut h);
            c.re.to_bits().hash(&mut h);
            c.im.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

impl Add for &QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: &QubitOperator) -> QubitOperator {
        self.try_add(rhs).expect("qubit count mismatch in operator sum")
    }
}

impl Sub for &QubitOperator {
    type Output = QubitOperator;
    fn sub(self, rhs: &QubitOperator) -> QubitOperator {
        self.try_sub(rhs)
            .expect("qubit count mismatch in operator difference")
    }
}

impl Mul for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: &QubitOperator) -> QubitOperator {
        self.try_mul(rhs)
            .expect("qubit count mismatch in operator product")
    }
}

impl Neg for &QubitOperator {
    type Output = QubitOperator;
    fn neg(self) -> QubitOperator {
        self.scale_real(-1.0)
    }
}

impl fmt::Display for QubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{:+.12e} {:+.12e} {}", c.re, c.im, p)?;
        }
        Ok(())
    }
}

/// `h s - s h`. Only anticommuting terms survive, each doubled.
pub fn commutator(h: &QubitOperator, s: &PauliString) -> Result<QubitOperator> {
    if h.n_qubits != s.n_qubits {
        return Err(Error::Dimension {
            expected: h.n_qubits,
            found: s.n_qubits,
        });
    }
    let sp = s.phase_value();
    let mut out = QubitOperator::zero(h.n_qubits).with_drop_tol(h.drop_tol);
    for (p, c) in &h.terms {
        if p.commutes_with(&s.pattern) {
            continue;
        }
        let (k, prod) = p.product(&s.pattern);
        out.add_term(prod, c * sp * phase_value(k) * 2.0);
    }
    Ok(out)
}

/// Commutator of two operators (symbolic).
pub fn operator_commutator(a: &QubitOperator, b: &QubitOperator) -> Result<QubitOperator> {
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}

/// One fermionic ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub creation: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder {
            mode,
            creation: true,
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            creation: false,
        }
    }
}

/// An ordered product of ladder operators times a coefficient, read left to
/// right: `[a†_2, a_0]` is `a†_2 a_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    n_modes: usize,
    ops: Vec<Ladder>,
    coefficient: Complex64,
}

impl FermionTerm {
    pub fn new(n_modes: usize, ops: Vec<Ladder>, coefficient: Complex64) -> Result<Self> {
        if n_modes > MAX_QUBITS {
            return Err(Error::CeilingExceeded {
                n: n_modes,
                ceiling: MAX_QUBITS,
            });
        }
        if let Some(bad) = ops.iter().find(|o| o.mode >= n_modes) {
            return Err(Error::IndexOutOfRange {
                index: bad.mode,
                len: n_modes,
            });
        }
        Ok(FermionTerm {
            n_modes,
            ops,
            coefficient,
        })
    }

    /// `coefficient * a†_{c0} a†_{c1} ... a_{a0} a_{a1} ...`
    pub fn excitation(
        n_modes: usize,
        creators: &[usize],
        annihilators: &[usize],
        coefficient: f64,
    ) -> Result<Self> {
        let ops = creators
            .iter()
            .map(|&m| Ladder::create(m))
            .chain(annihilators.iter().map(|&m| Ladder::annihilate(m)))
            .collect();
        FermionTerm::new(n_modes, ops, Complex64::new(coefficient, 0.0))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn ops(&self) -> &[Ladder] {
        &self.ops
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    /// Hermitian conjugate: reversed order, flipped daggers, conjugated coefficient.
    pub fn adjoint(&self) -> FermionTerm {
        FermionTerm {
            n_modes: self.n_modes,
            ops: self
                .ops
                .iter()
                .rev()
                .map(|o| Ladder {
                    mode: o.mode,
                    creation: !o.creation,
                })
                .collect(),
            coefficient: self.coefficient.conj(),
        }
    }
}

/// Qubit image of a single ladder operator. Mode `k` sits on qubit `k`; the
/// parity string covers qubits `0..k`.
fn ladder_image(n_qubits: usize, op: Ladder) -> QubitOperator {
    let k = op.mode;
    let zmask = (1u64 << k) - 1;
    let x = PauliPattern {
        x: 1 << k,
        z: zmask,
    };
    let y = PauliPattern {
        x: 1 << k,
        z: zmask | (1 << k),
    };
    let mut out = QubitOperator::zero(n_qubits);
    out.add_term(x, Complex64::new(0.5, 0.0));
    // a† = (X - iY)/2, a = (X + iY)/2
    let yc = if op.creation { -0.5 } else { 0.5 };
    out.add_term(y, Complex64::new(0.0, yc));
    out
}

pub fn jordan_wigner(t: &FermionTerm) -> QubitOperator {
    let mut acc = QubitOperator::constant(t.n_modes, t.coefficient);
    for op in &t.ops {
        acc = acc
            .try_mul(&ladder_image(t.n_modes, *op))
            .expect("ladder image has the term's qubit count");
    }
    acc
}

/// Jordan–Wigner image of a sum of fermionic terms.
pub fn jordan_wigner_sum(n_modes: usize, terms: &[FermionTerm]) -> Result<QubitOperator> {
    let mut acc = QubitOperator::zero(n_modes);
    for t in terms {
        if t.n_modes != n_modes {
            return Err(Error::Dimension {
                expected: n_modes,
                found: t.n_modes,
            });
        }
        acc = acc.try_add(&jordan_wigner(t))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_qubit_table() {
        let x = PauliString::parse(1, "X0").unwrap();
        let y = PauliString::parse(1, "Y0").unwrap();
        let z = PauliString::parse(1, "Z0").unwrap();
        let xy = multiply(&x, &y).unwrap();
        assert_eq!(xy.pattern(), z.pattern());
        assert_eq!(xy.phase(), 1);
        let yx = multiply(&y, &x).unwrap();
        assert_eq!(yx.phase(), 3);
        let zx = multiply(&z, &x).unwrap();
        assert_eq!(zx.pattern(), y.pattern());
        assert_eq!(zx.phase(), 1);
        let yz = multiply(&y, &z).unwrap();
        assert_eq!(yz.pattern(), x.pattern());
        assert_eq!(yz.phase(), 1);
    }

    #[test]
    fn two_qubit_product_cancels_shared_factor() {
        let p = PauliString::parse(2, "X0 Z1").unwrap();
        let q = PauliString::parse(2, "Y0 Z1").unwrap();
        let r = multiply(&p, &q).unwrap();
        assert_eq!(r.pattern(), PauliPattern::single(0, Pauli::Z));
        assert_eq!(r.phase(), 1);
    }

    #[test]
    fn identity_is_neutral() {
        let id = PauliString::identity(3);
        let p = PauliString::parse(3, "X0 Y2").unwrap().with_phase(3);
        assert_eq!(multiply(&id, &p).unwrap(), p);
        assert_eq!(multiply(&p, &id).unwrap(), p);
    }

    #[test]
    fn size_mismatch_is_dimension_error() {
        let p = PauliString::identity(2);
        let q = PauliString::identity(3);
        assert!(matches!(multiply(&p, &q), Err(Error::Dimension { .. })));
        let h = QubitOperator::identity(2);
        assert!(matches!(commutator(&h, &q), Err(Error::Dimension { .. })));
    }

    #[test]
    fn commutator_su2() {
        let z = QubitOperator::from_string(&PauliString::parse(1, "Z0").unwrap());
        let x = PauliString::parse(1, "X0").unwrap();
        let k = commutator(&z, &x).unwrap();
        assert_eq!(k.len(), 1);
        let coef = k.coefficient(&PauliPattern::single(0, Pauli::Y));
        assert!((coef - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn commuting_strings_give_empty_commutator() {
        let z0 = QubitOperator::from_string(&PauliString::parse(2, "Z0").unwrap());
        let z1z0 = PauliString::parse(2, "Z0 Z1").unwrap();
        assert!(commutator(&z0, &z1z0).unwrap().is_empty());
    }

    #[test]
    fn jw_lowest_mode() {
        let t = FermionTerm::excitation(1, &[0], &[], 1.0).unwrap();
        let q = jordan_wigner(&t);
        assert_eq!(q.len(), 2);
        assert!((q.coefficient(&PauliPattern::single(0, Pauli::X)) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((q.coefficient(&PauliPattern::single(0, Pauli::Y)) - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn jw_number_operator() {
        let t = FermionTerm::excitation(2, &[1], &[1], 1.0).unwrap();
        let q = jordan_wigner(&t);
        assert_eq!(q.len(), 2);
        assert!((q.coefficient(&PauliPattern::IDENTITY) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((q.coefficient(&PauliPattern::single(1, Pauli::Z)) - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jw_index_out_of_range() {
        assert!(matches!(
            FermionTerm::excitation(2, &[2], &[0], 1.0),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn square_of_string_is_identity() {
        for x in 0..16u64 {
            for z in 0..16u64 {
                let s = PauliString::new(4, PauliPattern::new(x, z), 0).unwrap();
                let sq = multiply(&s, &s).unwrap();
                assert!(sq.pattern().is_identity());
                assert_eq!(sq.phase(), 0);
            }
        }
    }

    #[test]
    fn associativity_exhaustive_two_qubits() {
        let all: Vec<PauliString> = (0..4u64)
            .flat_map(|x| (0..4u64).map(move |z| (x, z)))
            .map(|(x, z)| PauliString::new(2, PauliPattern::new(x, z), 0).unwrap())
            .collect();
        let id = PauliString::identity(2);
        for a in &all {
            assert_eq!(multiply(&id, a).unwrap(), *a);
            for b in &all {
                let ab = multiply(a, b).unwrap();
                for cc in &all {
                    let left = multiply(&ab, cc).unwrap();
                    let right = multiply(a, &multiply(b, cc).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn token_round_trip() {
        let p = PauliPattern::parse_tokens("X0 Y3 Z5".split_whitespace()).unwrap();
        assert_eq!(p.to_token_string(), "X0 Y3 Z5");
        assert_eq!(PauliPattern::parse_tokens(["I"]).unwrap(), PauliPattern::IDENTITY);
        assert!(PauliPattern::parse_tokens(["X0", "Z0"]).is_err());
        assert!(PauliPattern::parse_tokens(["Q1"]).is_err());
        assert!(PauliPattern::parse_tokens(["I", "X1"]).is_err());
    }

    #[test]
    fn drop_tolerance_applies_on_combine() {
        let mut op = QubitOperator::zero(1);
        op.add_term(PauliPattern::single(0, Pauli::X), c(1.0, 0.0));
        op.add_term(PauliPattern::single(0, Pauli::X), c(-1.0 + 1e-14, 0.0));
        assert!(op.is_empty());
    }

    #[test]
    fn hermiticity_check() {
        let mut op = QubitOperator::zero(1);
        op.add_term(PauliPattern::single(0, Pauli::X), c(1.0, 0.0));
        assert!(op.is_hermitian(1e-12));
        op.add_term(PauliPattern::single(0, Pauli::Z), c(0.0, 1e-3));
        assert!(!op.is_hermitian(1e-12));
        assert_eq!(op.adjoint().try_add(&op).unwrap().max_imag(), 0.0);
    }
}
