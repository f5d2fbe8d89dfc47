//! Dense statevector storage and the primitive actions built on it.
//!
//! Bit `k` of a basis index is the occupation of qubit `k`, so
//! `Z_k |…0…⟩ = +|…0…⟩` and `Z_k |…1…⟩ = −|…1…⟩`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{phase_value, PauliPattern, PauliString, QubitOperator};

/// Default register-size ceiling for simulations.
pub const DEFAULT_MAX_QUBITS: usize = 16;

/// Tolerance on the imaginary part of a Hermitian expectation value.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

/// Operators with at least this many terms are reduced in parallel.
const PARALLEL_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::IndexOutOfRange {
                index,
                len: 1 << n_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::default(); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Validation(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: n_qubits,
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check(other.n_qubits)?;
        Ok(inner_slices(&self.amplitudes, &other.amplitudes))
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: Complex64, other: &StateVector) -> Result<()> {
        self.check(other.n_qubits)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amplitudes {
            *a *= c;
        }
    }
}

pub(crate) fn inner_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Computational basis state from an occupation bitstring. The rightmost
/// character is qubit 0.
pub fn init_configuration(bits: &str, n_qubits: usize) -> Result<StateVector> {
    let bits = bits.trim();
    if bits.len() != n_qubits {
        return Err(Error::Dimension {
            expected: n_qubits,
            found: bits.len(),
        });
    }
    let mut index = 0usize;
    for ch in bits.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => index |= 1,
            other => {
                return Err(Error::Validation(format!(
                    "invalid character `{other}` in bitstring `{bits}`"
                )))
            }
        }
    }
    StateVector::basis_state(n_qubits, index)
}

/// `out[b ^ x] = i^{|x&z|} (-1)^{|z&b|} v[b]` for a phase-free pattern.
fn apply_pattern_into(pattern: &PauliPattern, coef: Complex64, src: &[Complex64], dst: &mut [Complex64]) {
    let x = pattern.x as usize;
    let z = pattern.z as usize;
    let base = coef * phase_value((pattern.y_count() % 4) as u8);
    for (b, amp) in src.iter().enumerate() {
        let sign = if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        dst[b ^ x] = base * sign * amp;
    }
}

/// Accumulate `coef * pattern * src` into `dst`.
fn accumulate_pattern(pattern: &PauliPattern, coef: Complex64, src: &[Complex64], dst: &mut [Complex64]) {
    let x = pattern.x as usize;
    let z = pattern.z as usize;
    let base = coef * phase_value((pattern.y_count() % 4) as u8);
    for (b, amp) in src.iter().enumerate() {
        let sign = if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        dst[b ^ x] += base * sign * amp;
    }
}

/// Returns `s |v⟩` as a new vector.
pub fn apply_pauli(s: &PauliString, v: &StateVector) -> Result<StateVector> {
    v.check(s.n_qubits())?;
    let mut out = vec![Complex64::default(); v.dim()];
    apply_pattern_into(&s.pattern(), s.phase_value(), &v.amplitudes, &mut out);
    Ok(StateVector {
        n_qubits: v.n_qubits,
        amplitudes: out,
    })
}

/// Applies `s` to `v` in place.
pub fn apply_pauli_in_place(s: &PauliString, v: &mut StateVector) -> Result<()> {
    v.check(s.n_qubits())?;
    let x = s.pattern().x as usize;
    let z = s.pattern().z as usize;
    let base = s.phase_value() * phase_value((s.pattern().y_count() % 4) as u8);
    let sign = |b: usize| if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let amps = &mut v.amplitudes;
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= base * sign(b);
        }
    } else {
        for b in 0..amps.len() {
            let partner = b ^ x;
            if b < partner {
                let ab = amps[b];
                let ap = amps[partner];
                amps[partner] = base * sign(b) * ab;
                amps[b] = base * sign(partner) * ap;
            }
        }
    }
    Ok(())
}

/// `e^{-i theta s} v = cos(theta) v - i sin(theta) s v`, in place.
pub fn apply_rotation(theta: f64, s: &PauliString, v: &mut StateVector) -> Result<()> {
    if !s.is_hermitian() {
        return Err(Error::Contract(format!(
            "rotation generator {s} is not Hermitian"
        )));
    }
    v.check(s.n_qubits())?;
    if theta == 0.0 {
        return Ok(());
    }
    let (sin, cos) = theta.sin_cos();
    let x = s.pattern().x as usize;
    let z = s.pattern().z as usize;
    // -i sin(theta) times the string's own phase
    let base = s.phase_value()
        * phase_value((s.pattern().y_count() % 4) as u8)
        * Complex64::new(0.0, -sin);
    let sign = |b: usize| if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let amps = &mut v.amplitudes;
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a = *a * cos + base * sign(b) * *a;
        }
    } else {
        for b in 0..amps.len() {
            let partner = b ^ x;
            if b < partner {
                let ab = amps[b];
                let ap = amps[partner];
                amps[b] = ab * cos + base * sign(partner) * ap;
                amps[partner] = ap * cos + base * sign(b) * ab;
            }
        }
    }
    Ok(())
}

/// Returns `h |v⟩`.
pub fn apply_operator(h: &QubitOperator, v: &StateVector) -> Result<StateVector> {
    v.check(h.n_qubits())?;
    let dim = v.dim();
    let terms: Vec<(PauliPattern, Complex64)> = h.terms().map(|(p, c)| (*p, *c)).collect();
    let out = if terms.len() >= PARALLEL_TERMS {
        terms
            .par_chunks(16)
            .map(|chunk| {
                let mut acc = vec![Complex64::default(); dim];
                for (p, c) in chunk {
                    accumulate_pattern(p, *c, &v.amplitudes, &mut acc);
                }
                acc
            })
            .reduce(
                || vec![Complex64::default(); dim],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    } else {
        let mut acc = vec![Complex64::default(); dim];
        for (p, c) in &terms {
            accumulate_pattern(p, *c, &v.amplitudes, &mut acc);
        }
        acc
    };
    Ok(StateVector {
        n_qubits: v.n_qubits,
        amplitudes: out,
    })
}

/// `⟨bra|h|ket⟩` including the full complex value.
pub fn transition(h: &QubitOperator, bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
    bra.check(ket.n_qubits)?;
    let hk = apply_operator(h, ket)?;
    bra.inner(&hk)
}

/// `⟨v|h|v⟩` for Hermitian `h`.
pub fn expectation(h: &QubitOperator, v: &StateVector) -> Result<f64> {
    if !h.is_hermitian(EXPECTATION_IMAG_TOL) {
        return Err(Error::Contract(
            "expectation requires a Hermitian operator".to_string(),
        ));
    }
    let z = transition(h, v, v)?;
    let scale = v.norm().powi(2).max(1.0);
    if z.im.abs() > EXPECTATION_IMAG_TOL * scale * h.one_norm().max(1.0) {
        return Err(Error::Contract(format!(
            "expectation has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `⟨bra|s|ket⟩` for a single string, without materialising `s|ket⟩`.
pub fn pauli_transition(s: &PauliString, bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
    bra.check(ket.n_qubits)?;
    bra.check(s.n_qubits())?;
    let x = s.pattern().x as usize;
    let z = s.pattern().z as usize;
    let base = s.phase_value() * phase_value((s.pattern().y_count() % 4) as u8);
    let mut acc = Complex64::default();
    for (b, amp) in ket.amplitudes.iter().enumerate() {
        let sign = if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += bra.amplitudes[b ^ x].conj() * amp * sign;
    }
    Ok(acc * base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliPattern};

    #[test]
    fn configuration_encoding() {
        assert_eq!(init_configuration("00001111", 8).unwrap().amplitudes()[15].re, 1.0);
        assert_eq!(init_configuration("0000", 4).unwrap().amplitudes()[0].re, 1.0);
        assert_eq!(init_configuration("00110011", 8).unwrap().amplitudes()[51].re, 1.0);
        assert!(matches!(
            init_configuration("0011", 3),
            Err(Error::Dimension { .. })
        ));
        assert!(init_configuration("0012", 4).is_err());
    }

    #[test]
    fn bit_flip_and_phase() {
        let v = StateVector::zero_state(2);
        let x0 = PauliString::parse(2, "X0").unwrap();
        let w = apply_pauli(&x0, &v).unwrap();
        assert_eq!(w.amplitudes()[1], Complex64::new(1.0, 0.0));
        let z0 = PauliString::parse(2, "Z0").unwrap();
        let u = apply_pauli(&z0, &w).unwrap();
        assert_eq!(u.amplitudes()[1], Complex64::new(-1.0, 0.0));
        let mut inplace = w.clone();
        apply_pauli_in_place(&z0, &mut inplace).unwrap();
        assert_eq!(inplace, u);
    }

    #[test]
    fn y_action() {
        let v = StateVector::zero_state(1);
        let y = PauliString::parse(1, "Y0").unwrap();
        let w = apply_pauli(&y, &v).unwrap();
        assert_eq!(w.amplitudes()[1], Complex64::new(0.0, 1.0));
        let u = apply_pauli(&y, &w).unwrap();
        assert_eq!(u.amplitudes()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rotation_special_angles() {
        let x0 = PauliString::parse(1, "X0").unwrap();
        let mut v = StateVector::zero_state(1);
        apply_rotation(0.0, &x0, &mut v).unwrap();
        assert_eq!(v, StateVector::zero_state(1));
        apply_rotation(std::f64::consts::FRAC_PI_2, &x0, &mut v).unwrap();
        assert!((v.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(v.amplitudes()[0].norm() < 1e-15);
    }

    #[test]
    fn rotation_rejects_non_hermitian() {
        let s = PauliString::parse(1, "X0").unwrap().with_phase(1);
        let mut v = StateVector::zero_state(1);
        assert!(matches!(apply_rotation(0.1, &s, &mut v), Err(Error::Contract(_))));
    }

    #[test]
    fn expectation_basics() {
        let z0 = QubitOperator::from_string(&PauliString::parse(3, "Z0").unwrap());
        assert_eq!(expectation(&z0, &StateVector::zero_state(3)).unwrap(), 1.0);
        let mut bad = QubitOperator::zero(1);
        bad.add_term(PauliPattern::single(0, Pauli::X), Complex64::new(0.0, 1.0));
        assert!(expectation(&bad, &StateVector::zero_state(1)).is_err());
    }

    #[test]
    fn transition_basics() {
        let x0 = QubitOperator::from_string(&PauliString::parse(1, "X0").unwrap());
        let zero = StateVector::zero_state(1);
        let one = StateVector::basis_state(1, 1).unwrap();
        assert_eq!(transition(&x0, &zero, &one).unwrap(), Complex64::new(1.0, 0.0));
        let id = QubitOperator::identity(1);
        assert_eq!(transition(&id, &one, &one).unwrap(), Complex64::new(1.0, 0.0));
        let two = StateVector::zero_state(2);
        assert!(transition(&id, &one, &two).is_err());
    }
}
