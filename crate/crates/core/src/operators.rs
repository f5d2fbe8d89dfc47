//! Hamiltonians and symmetry operators: file ingestion, built-in lattice
//! models, total-spin operators, spectrum folding and the spin shift.
//!
//! # Hamiltonian text format
//!
//! ```text
//! # comment lines start with '#'; "# key: value" comments become metadata
//! qubits 4
//! -0.5 0.0 I
//! 0.25 0.0 Z0 Z1
//! 0.125 0.0 X0 Z1 X2
//! ```
//!
//! The first non-comment line is `qubits N`. Every following non-blank line is
//! `RE IM factors…`, where factors are tokens `X<k>`, `Y<k>`, `Z<k>` with
//! `k < N`, or the single token `I`. Repeated patterns are summed. After
//! summation every coefficient must be real to `1e-10`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner_sum, FermionTerm, Ladder, Pauli, PauliPattern, QubitOperator};

pub const HERMITIAN_LOAD_TOL: f64 = 1e-10;

/// A Hermitian qubit Hamiltonian plus free-form labels.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianBundle {
    pub h: QubitOperator,
    pub n_qubits: usize,
    pub metadata: BTreeMap<String, String>,
}

impl HamiltonianBundle {
    pub fn new(h: QubitOperator) -> Result<Self> {
        if !h.is_hermitian(HERMITIAN_LOAD_TOL) {
            return Err(Error::Validation(format!(
                "operator is not Hermitian (max imaginary coefficient {:.3e})",
                h.max_imag()
            )));
        }
        let h = real_part(&h);
        Ok(HamiltonianBundle {
            n_qubits: h.n_qubits(),
            h,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_label(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

fn real_part(h: &QubitOperator) -> QubitOperator {
    QubitOperator::from_terms(
        h.n_qubits(),
        h.terms().map(|(p, c)| (*p, Complex64::new(c.re, 0.0))),
    )
    .expect("patterns fit the register")
    .with_drop_tol(h.drop_tol())
}

pub fn parse_hamiltonian_file(path: impl AsRef<Path>) -> Result<HamiltonianBundle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut bundle = parse_hamiltonian_str(&text, &path.display().to_string())?;
    bundle
        .metadata
        .entry("source".to_string())
        .or_insert_with(|| path.display().to_string());
    Ok(bundle)
}

/// Parse the text format; `origin` only labels error messages.
pub fn parse_hamiltonian_str(text: &str, origin: &str) -> Result<HamiltonianBundle> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut metadata = BTreeMap::new();
    let mut n_qubits: Option<usize> = None;
    let mut terms: Vec<(PauliPattern, Complex64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                let k = k.trim();
                if !k.is_empty() && !k.contains(char::is_whitespace) {
                    metadata.insert(k.to_string(), v.trim().to_string());
                }
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let Some(n) = n_qubits else {
            match (tokens.next(), tokens.next(), tokens.next()) {
                (Some("qubits"), Some(count), None) => {
                    let count: usize = count
                        .parse()
                        .map_err(|_| perr(lineno, format!("bad qubit count `{count}`")))?;
                    if count == 0 || count > crate::pauli::MAX_QUBITS {
                        return Err(perr(lineno, format!("unsupported qubit count {count}")));
                    }
                    n_qubits = Some(count);
                    continue;
                }
                _ => return Err(perr(lineno, "expected header `qubits N`".to_string())),
            }
        };
        let re = tokens
            .next()
            .ok_or_else(|| perr(lineno, "missing real part".to_string()))?;
        let im = tokens
            .next()
            .ok_or_else(|| perr(lineno, "missing imaginary part".to_string()))?;
        let re: f64 = re
            .parse()
            .map_err(|_| perr(lineno, format!("bad real part `{re}`")))?;
        let im: f64 = im
            .parse()
            .map_err(|_| perr(lineno, format!("bad imaginary part `{im}`")))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(perr(lineno, "non-finite coefficient".to_string()));
        }
        let pattern = PauliPattern::parse_tokens(tokens).map_err(|m| perr(lineno, m))?;
        if pattern.support_len() > n {
            return Err(perr(
                lineno,
                format!("factor acts on qubit {} but header declares {n}", pattern.support_len() - 1),
            ));
        }
        terms.push((pattern, Complex64::new(re, im)));
    }
    let n = n_qubits.ok_or_else(|| perr(0, "missing header `qubits N`".to_string()))?;
    let h = QubitOperator::from_terms(n, terms)?;
    let mut bundle = HamiltonianBundle::new(h)?;
    bundle.metadata = metadata;
    Ok(bundle)
}

/// Write a bundle in the text format.
pub fn format_hamiltonian(bundle: &HamiltonianBundle) -> String {
    let mut out = String::new();
    for (k, v) in &bundle.metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&format!("qubits {}\n", bundle.n_qubits));
    for (p, c) in bundle.h.terms() {
        out.push_str(&format!("{:.17e} {:.17e} {}\n", c.re, c.im, p));
    }
    out
}

fn default_one() -> f64 {
    1.0
}

/// Quadratic particle-number penalty `weight * (N - electrons)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberPenalty {
    pub electrons: usize,
    pub weight: f64,
}

/// Built-in desk-scale systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `J Σ S_i·S_{i+1} + hz Σ S^z_i` with `S = σ/2`.
    HeisenbergChain {
        sites: usize,
        #[serde(default = "default_one")]
        j: f64,
        #[serde(default)]
        hz: f64,
        #[serde(default)]
        periodic: bool,
    },
    /// `J Σ Z_i Z_{i+1} + g Σ X_i + h Σ Z_i`.
    TransverseIsing {
        sites: usize,
        #[serde(default = "default_one")]
        j: f64,
        #[serde(default = "default_one")]
        g: f64,
        #[serde(default)]
        h: f64,
        #[serde(default)]
        periodic: bool,
    },
    /// `-t Σ (a†_{iσ} a_{jσ} + h.c.) + U Σ n_{i↑} n_{i↓} - mu N`, one spatial
    /// orbital per site, α on qubit `2i` and β on qubit `2i+1`.
    HubbardJw {
        sites: usize,
        #[serde(default = "default_one")]
        t: f64,
        u: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default)]
        periodic: bool,
        #[serde(default)]
        penalty: Option<NumberPenalty>,
    },
    /// Two-site Hubbard model written in its bonding (`g`, qubits 0-1) and
    /// antibonding (`u`, qubits 2-3) orbitals. At half filling the ground
    /// state is dominated by `|0011⟩` and `|1100⟩`.
    HubbardDimerMo {
        #[serde(default = "default_one")]
        t: f64,
        u: f64,
        #[serde(default)]
        penalty: Option<NumberPenalty>,
    },
}

fn bonds(sites: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if periodic && sites > 2 {
        b.push((sites - 1, 0));
    }
    b
}

fn real(c: f64) -> Complex64 {
    Complex64::new(c, 0.0)
}

pub fn build_model(spec: &ModelSpec) -> Result<HamiltonianBundle> {
    match *spec {
        ModelSpec::HeisenbergChain {
            sites,
            j,
            hz,
            periodic,
        } => {
            if sites < 1 || sites > crate::pauli::MAX_QUBITS {
                return Err(Error::InvalidParams(format!("heisenberg-chain sites = {sites}")));
            }
            let mut h = QubitOperator::zero(sites);
            for (a, b) in bonds(sites, periodic) {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    h.add_term(
                        PauliPattern::from_factors(&[(a, p), (b, p)]),
                        real(0.25 * j),
                    );
                }
            }
            for i in 0..sites {
                h.add_term(PauliPattern::single(i, Pauli::Z), real(0.5 * hz));
            }
            Ok(HamiltonianBundle::new(h)?.with_label("system", "heisenberg-chain"))
        }
        ModelSpec::TransverseIsing {
            sites,
            j,
            g,
            h: hfield,
            periodic,
        } => {
            if sites < 1 || sites > crate::pauli::MAX_QUBITS {
                return Err(Error::InvalidParams(format!("transverse-ising sites = {sites}")));
            }
            let mut h = QubitOperator::zero(sites);
            for (a, b) in bonds(sites, periodic) {
                h.add_term(PauliPattern::from_factors(&[(a, Pauli::Z), (b, Pauli::Z)]), real(j));
            }
            for i in 0..sites {
                h.add_term(PauliPattern::single(i, Pauli::X), real(g));
                h.add_term(PauliPattern::single(i, Pauli::Z), real(hfield));
            }
            Ok(HamiltonianBundle::new(h)?.with_label("system", "transverse-ising"))
        }
        ModelSpec::HubbardJw {
            sites,
            t,
            u,
            mu,
            periodic,
            penalty,
        } => {
            if sites < 1 || 2 * sites > crate::pauli::MAX_QUBITS {
                return Err(Error::InvalidParams(format!("hubbard-jw sites = {sites}")));
            }
            let n = 2 * sites;
            let mut terms = Vec::new();
            for (a, b) in bonds(sites, periodic) {
                for spin in 0..2 {
                    let (p, q) = (2 * a + spin, 2 * b + spin);
                    terms.push(FermionTerm::excitation(n, &[p], &[q], -t)?);
                    terms.push(FermionTerm::excitation(n, &[q], &[p], -t)?);
                }
            }
            for i in 0..sites {
                let (up, dn) = (2 * i, 2 * i + 1);
                terms.push(FermionTerm::new(
                    n,
                    vec![
                        Ladder::create(up),
                        Ladder::annihilate(up),
                        Ladder::create(dn),
                        Ladder::annihilate(dn),
                    ],
                    real(u),
                )?);
            }
            for p in 0..n {
                terms.push(FermionTerm::excitation(n, &[p], &[p], -mu)?);
            }
            let h = with_penalty(jordan_wigner_sum(n, &terms)?, penalty)?;
            Ok(HamiltonianBundle::new(h)?.with_label("system", "hubbard-jw"))
        }
        ModelSpec::HubbardDimerMo { t, u, penalty } => {
            let n = 4;
            let mut terms = Vec::new();
            for spin in 0..2 {
                terms.push(FermionTerm::excitation(n, &[spin], &[spin], -t)?);
                terms.push(FermionTerm::excitation(n, &[2 + spin], &[2 + spin], t)?);
            }
            // (pq|rs) = U/2 when an even number of indices are antibonding
            for p in 0..2 {
                for q in 0..2 {
                    for r in 0..2 {
                        for s in 0..2 {
                            if (p + q + r + s) % 2 != 0 {
                                continue;
                            }
                            for sigma in 0..2 {
                                for tau in 0..2 {
                                    terms.push(FermionTerm::new(
                                        n,
                                        vec![
                                            Ladder::create(2 * p + sigma),
                                            Ladder::create(2 * r + tau),
                                            Ladder::annihilate(2 * s + tau),
                                            Ladder::annihilate(2 * q + sigma),
                                        ],
                                        real(0.25 * u),
                                    )?);
                                }
                            }
                        }
                    }
                }
            }
            let h = with_penalty(jordan_wigner_sum(n, &terms)?, penalty)?;
            Ok(HamiltonianBundle::new(h)?.with_label("system", "hubbard-dimer-mo"))
        }
    }
}

fn with_penalty(h: QubitOperator, penalty: Option<NumberPenalty>) -> Result<QubitOperator> {
    let Some(NumberPenalty { electrons, weight }) = penalty else {
        return Ok(h);
    };
    if weight < 0.0 {
        return Err(Error::InvalidParams("penalty weight must be >= 0".to_string()));
    }
    let n = h.n_qubits();
    let shifted = number_operator(n).try_sub(&QubitOperator::constant(n, real(electrons as f64)))?;
    h.try_add(&shifted.try_mul(&shifted)?.scale_real(weight))
}

/// `N = Σ_p n_p`, diagonal in the computational basis.
pub fn number_operator(n_modes: usize) -> QubitOperator {
    let mut num = QubitOperator::zero(n_modes);
    for p in 0..n_modes {
        num.add_term(PauliPattern::IDENTITY, real(0.5));
        num.add_term(PauliPattern::single(p, Pauli::Z), real(-0.5));
    }
    num
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub s2: QubitOperator,
    pub sz: QubitOperator,
    pub num: QubitOperator,
}

/// `S²`, `S_z` and `N` for interleaved α/β spin orbitals.
pub fn build_spin_operators(n_spin_orbitals: usize) -> Result<SpinOperators> {
    if n_spin_orbitals == 0 || n_spin_orbitals % 2 != 0 {
        return Err(Error::InvalidParams(format!(
            "spin operators need an even number of spin orbitals, got {n_spin_orbitals}"
        )));
    }
    let n = n_spin_orbitals;
    let mut sz = QubitOperator::zero(n);
    for p in 0..n {
        let sign = if p % 2 == 0 { 0.5 } else { -0.5 };
        // n_p = (1 - Z_p)/2
        sz.add_term(PauliPattern::IDENTITY, real(0.5 * sign));
        sz.add_term(PauliPattern::single(p, Pauli::Z), real(-0.5 * sign));
    }
    let raise: Vec<FermionTerm> = (0..n / 2)
        .map(|k| FermionTerm::excitation(n, &[2 * k], &[2 * k + 1], 1.0))
        .collect::<Result<_>>()?;
    let s_plus = jordan_wigner_sum(n, &raise)?;
    let s_minus = s_plus.adjoint();
    let sz_shift = sz.try_add(&QubitOperator::identity(n))?;
    let s2 = s_minus.try_mul(&s_plus)?.try_add(&sz.try_mul(&sz_shift)?)?;
    Ok(SpinOperators {
        s2: real_part(&s2),
        sz,
        num: number_operator(n),
    })
}

/// `(H - omega)^2`, expanded and simplified.
pub fn fold_spectrum(h: &HamiltonianBundle, omega: f64) -> Result<HamiltonianBundle> {
    let shifted = h
        .h
        .try_sub(&QubitOperator::constant(h.n_qubits, real(omega)))?;
    let folded = shifted.try_mul(&shifted)?;
    let mut out = HamiltonianBundle::new(real_part(&folded))?;
    out.metadata = h.metadata.clone();
    out.metadata.insert("folded_omega".to_string(), format!("{omega}"));
    out.metadata.insert("folded_terms".to_string(), out.h.len().to_string());
    Ok(out)
}

/// Target total spin `s` and shift strength `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSector {
    pub s: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

/// Shift strength used when none is given.
pub const DEFAULT_SPIN_LAMBDA: f64 = 0.5;

fn default_lambda() -> f64 {
    DEFAULT_SPIN_LAMBDA
}

impl SpinSector {
    pub fn new(s: f64, lambda: f64) -> Result<Self> {
        let sector = SpinSector { s, lambda };
        sector.validate()?;
        Ok(sector)
    }

    pub fn validate(&self) -> Result<()> {
        let twice = 2.0 * self.s;
        if !(self.s >= 0.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "spin s = {} is not a non-negative half-integer",
                self.s
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "spin shift lambda = {} must be >= 0",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `s(s+1)` from the exact half-integer.
    pub fn s_squared(&self) -> f64 {
        let twice = (2.0 * self.s).round();
        twice * (twice + 2.0) / 4.0
    }
}

/// `H + lambda (S² - s(s+1))`.
pub fn apply_spin_shift(
    h: &HamiltonianBundle,
    sector: &SpinSector,
    s2: &QubitOperator,
) -> Result<HamiltonianBundle> {
    sector.validate()?;
    if sector.lambda == 0.0 {
        return Ok(h.clone());
    }
    let n = h.n_qubits;
    let penalty = s2
        .try_sub(&QubitOperator::constant(n, real(sector.s_squared())))?
        .scale_real(sector.lambda);
    let mut out = HamiltonianBundle::new(h.h.try_add(&penalty)?)?;
    out.metadata = h.metadata.clone();
    out.metadata
        .insert("spin_shift".to_string(), format!("s={} lambda={}", sector.s, sector.lambda));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{expectation, init_configuration};

    #[test]
    fn parse_single_term() {
        let b = parse_hamiltonian_str("qubits 1\n0.5 0.0 Z0\n", "t").unwrap();
        assert_eq!(b.n_qubits, 1);
        assert_eq!(b.h.len(), 1);
        assert_eq!(
            b.h.coefficient(&PauliPattern::single(0, Pauli::Z)),
            real(0.5)
        );
    }

    #[test]
    fn parse_xx_plus_yy() {
        let b = parse_hamiltonian_str(
            "# system: xy\nqubits 2\n1.0 0.0 X0 X1\n1.0 0.0 Y0 Y1\n",
            "t",
        )
        .unwrap();
        assert_eq!(b.h.len(), 2);
        assert_eq!(b.metadata.get("system").map(String::as_str), Some("xy"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_hamiltonian_str("qubits 2\n1.0 0.0 X0\n1.0 zz X1\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_hamiltonian_str("1.0 0.0 X0\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_hamiltonian_str("qubits 2\n1.0 0.0 X2\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_hamiltonian_str("qubits 2\n1.0 0.0\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn parse_rejects_non_hermitian() {
        let err = parse_hamiltonian_str("qubits 1\n1.0 0.5 X0\n", "f").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        // imaginary parts that cancel are fine
        assert!(parse_hamiltonian_str("qubits 1\n1.0 0.5 X0\n0.0 -0.5 X0\n", "f").is_ok());
    }

    #[test]
    fn format_round_trip() {
        let b = build_model(&ModelSpec::HubbardJw {
            sites: 2,
            t: 1.0,
            u: 4.0,
            mu: 0.0,
            periodic: false,
            penalty: None,
        })
        .unwrap();
        let text = format_hamiltonian(&b);
        let back = parse_hamiltonian_str(&text, "rt").unwrap();
        assert_eq!(back.h, b.h);
    }

    #[test]
    fn single_site_ising() {
        let b = build_model(&ModelSpec::TransverseIsing {
            sites: 1,
            j: 0.0,
            g: 0.7,
            h: 0.0,
            periodic: false,
        })
        .unwrap();
        assert_eq!(b.h.len(), 1);
        assert_eq!(b.h.coefficient(&PauliPattern::single(0, Pauli::X)), real(0.7));
    }

    #[test]
    fn invalid_model_params() {
        assert!(build_model(&ModelSpec::HeisenbergChain {
            sites: 0,
            j: 1.0,
            hz: 0.0,
            periodic: false
        })
        .is_err());
    }

    #[test]
    fn spin_expectations_on_configurations() {
        let ops = build_spin_operators(4).unwrap();
        let closed = init_configuration("0011", 4).unwrap();
        assert!(expectation(&ops.s2, &closed).unwrap().abs() < 1e-14);
        let triplet = init_configuration("0101", 4).unwrap();
        assert!((expectation(&ops.s2, &triplet).unwrap() - 2.0).abs() < 1e-14);
        assert!((expectation(&ops.sz, &triplet).unwrap() - 1.0).abs() < 1e-14);
        assert!((expectation(&ops.num, &closed).unwrap() - 2.0).abs() < 1e-14);
        assert!(build_spin_operators(3).is_err());
    }

    #[test]
    fn spin_operators_commute() {
        let ops = build_spin_operators(6).unwrap();
        let c1 = crate::pauli::operator_commutator(&ops.s2, &ops.sz).unwrap();
        let c2 = crate::pauli::operator_commutator(&ops.s2, &ops.num).unwrap();
        assert!(c1.is_empty(), "{c1}");
        assert!(c2.is_empty(), "{c2}");
    }

    #[test]
    fn fold_of_z_at_zero_is_identity() {
        let b = parse_hamiltonian_str("qubits 1\n1.0 0.0 Z0\n", "t").unwrap();
        let f = fold_spectrum(&b, 0.0).unwrap();
        assert_eq!(f.h, QubitOperator::identity(1));
    }

    #[test]
    fn spin_shift_zero_lambda_is_identity_map() {
        let b = parse_hamiltonian_str("qubits 2\n1.0 0.0 Z0\n", "t").unwrap();
        let ops = build_spin_operators(2).unwrap();
        let shifted = apply_spin_shift(&b, &SpinSector::new(0.0, 0.0).unwrap(), &ops.s2).unwrap();
        assert_eq!(shifted.h, b.h);
    }

    #[test]
    fn spin_sector_validation() {
        assert!(SpinSector::new(0.5, 0.5).is_ok());
        assert!(SpinSector::new(0.3, 0.5).is_err());
        assert!(SpinSector::new(1.0, -0.1).is_err());
        assert_eq!(SpinSector::new(1.5, 0.0).unwrap().s_squared(), 3.75);
    }

    #[test]
    fn spin_shift_raises_triplet_by_two_lambda() {
        let ops = build_spin_operators(4).unwrap();
        let zero = HamiltonianBundle::new(QubitOperator::zero(4)).unwrap();
        let shifted = apply_spin_shift(&zero, &SpinSector::new(0.0, 0.3).unwrap(), &ops.s2).unwrap();
        let triplet = init_configuration("0101", 4).unwrap();
        assert!((expectation(&shifted.h, &triplet).unwrap() - 0.6).abs() < 1e-14);
    }
}
