//! Operator pools: the Pauli strings whose weighted sum forms the generator
//! of each imaginary-time step.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, FermionTerm, PauliPattern, PauliString, MAX_QUBITS};

/// Largest register for which the complete odd-Y pool may be built.
pub const COMPLETE_POOL_MAX_QUBITS: usize = 6;

/// A fermionic excitation `a†_{c0} a†_{c1} … a_{a0} a_{a1} …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Excitation {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl Excitation {
    /// Even spin orbitals are α, odd are β.
    pub fn conserves_sz(&self) -> bool {
        let spin = |v: &[usize]| v.iter().map(|&p| if p % 2 == 0 { 1i32 } else { -1 }).sum::<i32>();
        spin(&self.creators) == spin(&self.annihilators)
    }

    pub fn conserves_particle_number(&self) -> bool {
        self.creators.len() == self.annihilators.len()
    }

    pub fn rank(&self) -> usize {
        self.creators.len()
    }

    pub fn label(&self) -> String {
        let mut s = String::new();
        for c in &self.creators {
            let _ = write!(s, "a{c}^ ");
        }
        for (i, a) in self.annihilators.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "a{a}");
        }
        s.trim().to_string()
    }

    fn term(&self, n: usize, coef: f64) -> Result<FermionTerm> {
        FermionTerm::excitation(n, &self.creators, &self.annihilators, coef)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub string: PauliString,
    /// Every excitation whose image contains this string, in pool order.
    pub sources: Vec<Excitation>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    n_qubits: usize,
    entries: Vec<PoolEntry>,
}

/// Symmetries a filtered pool must respect.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Conservation {
    pub sz: bool,
    pub particle_number: bool,
}

impl Pool {
    pub fn from_strings(n_qubits: usize, strings: Vec<PauliString>, label: &str) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut entries = Vec::new();
        for s in strings {
            if s.n_qubits() != n_qubits {
                return Err(Error::Dimension {
                    expected: n_qubits,
                    found: s.n_qubits(),
                });
            }
            if s.phase() != 0 {
                return Err(Error::Validation(format!("pool string {s} must have phase +1")));
            }
            if s.pattern().y_count() % 2 != 1 {
                return Err(Error::Validation(format!(
                    "pool string {} has an even number of Y factors",
                    s.pattern()
                )));
            }
            if seen.insert(s.pattern()) {
                entries.push(PoolEntry {
                    string: s,
                    sources: Vec::new(),
                    label: label.to_string(),
                });
            }
        }
        Ok(Pool { n_qubits, entries })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.entries.iter().map(|e| &e.string)
    }

    pub fn string(&self, i: usize) -> &PauliString {
        &self.entries[i].string
    }

    /// One string per line, followed by its provenance label.
    pub fn dump(&self) -> String {
        let mut out = format!("# qubits: {}\n# strings: {}\n", self.n_qubits, self.len());
        for e in &self.entries {
            let _ = writeln!(out, "{}  # {}", e.string.pattern(), e.label);
        }
        out
    }

    /// Parse the `dump` format. Text after `#` on a line is ignored.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let mut strings = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let pattern = PauliPattern::parse_tokens(body.split_whitespace()).map_err(|m| {
                Error::Parse {
                    path: "pool".to_string(),
                    line: i + 1,
                    message: m,
                }
            })?;
            if pattern.support_len() > n_qubits {
                return Err(Error::Parse {
                    path: "pool".to_string(),
                    line: i + 1,
                    message: format!("string acts outside {n_qubits} qubits"),
                });
            }
            strings.push(PauliString::new(n_qubits, pattern, 0)?);
        }
        Pool::from_strings(n_qubits, strings, "file")
    }
}

/// All generalized singles `a†_p a_q` (p > q) and doubles
/// `a†_p a†_q a_r a_s` (p > q, r > s, (p,q) > (r,s)), ordered by rank then
/// lexicographically by indices.
pub fn uccgsd_excitations(n_spin_orbitals: usize) -> Vec<Excitation> {
    let n = n_spin_orbitals;
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..p {
            out.push(Excitation {
                creators: vec![p],
                annihilators: vec![q],
            });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..p).map(move |q| (p, q))).collect();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[..i] {
            out.push(Excitation {
                creators: vec![p, q],
                annihilators: vec![r, s],
            });
        }
    }
    out.sort_by(|a, b| (a.rank(), &a.creators, &a.annihilators).cmp(&(b.rank(), &b.creators, &b.annihilators)));
    out
}

/// Pauli strings of `T - T†` for every generalized single and double.
pub fn build_uccgsd_pool(n_spin_orbitals: usize) -> Result<Pool> {
    if n_spin_orbitals == 0 || n_spin_orbitals % 2 != 0 || n_spin_orbitals > MAX_QUBITS {
        return Err(Error::InvalidParams(format!(
            "UCCGSD pool needs an even number of spin orbitals, got {n_spin_orbitals}"
        )));
    }
    let n = n_spin_orbitals;
    let mut entries: Vec<PoolEntry> = Vec::new();
    let mut index: BTreeMap<PauliPattern, usize> = BTreeMap::new();
    for exc in uccgsd_excitations(n) {
        let t = exc.term(n, 1.0)?;
        let gen = jordan_wigner(&t).try_sub(&jordan_wigner(&t.adjoint()))?;
        // anti-Hermitian: every surviving coefficient is imaginary
        for (pattern, coef) in gen.terms() {
            if coef.re.abs() > 1e-12 || coef.im.abs() < 1e-12 {
                continue;
            }
            debug_assert_eq!(pattern.y_count() % 2, 1);
            match index.get(pattern) {
                Some(&i) => entries[i].sources.push(exc.clone()),
                None => {
                    index.insert(*pattern, entries.len());
                    entries.push(PoolEntry {
                        string: PauliString::new(n, *pattern, 0)?,
                        sources: vec![exc.clone()],
                        label: exc.label(),
                    });
                }
            }
        }
    }
    Ok(Pool {
        n_qubits: n,
        entries,
    })
}

/// Every Pauli string with an odd number of `Y` factors.
pub fn build_complete_pool(n_qubits: usize) -> Result<Pool> {
    if n_qubits == 0 || n_qubits > COMPLETE_POOL_MAX_QUBITS {
        return Err(Error::InvalidParams(format!(
            "complete pool supports 1..={COMPLETE_POOL_MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let dim = 1u64 << n_qubits;
    let mut entries = Vec::new();
    for x in 0..dim {
        for z in 0..dim {
            let p = PauliPattern::new(x, z);
            if p.y_count() % 2 == 1 {
                entries.push(PoolEntry {
                    string: PauliString::new(n_qubits, p, 0)?,
                    sources: Vec::new(),
                    label: "complete".to_string(),
                });
            }
        }
    }
    Ok(Pool { n_qubits, entries })
}

/// Keep strings originating from at least one excitation that satisfies the
/// requested selection rules. Strings without fermionic provenance are kept
/// only if they commute with the diagonal symmetry operators themselves.
pub fn filter_pool(pool: &Pool, conserve: Conservation) -> Pool {
    let ok_exc = |e: &Excitation| {
        (!conserve.sz || e.conserves_sz()) && (!conserve.particle_number || e.conserves_particle_number())
    };
    let entries = pool
        .entries
        .iter()
        .filter_map(|e| {
            if e.sources.is_empty() {
                // Sz and N are diagonal; a string commutes with them only if it
                // flips no qubits.
                let flips = e.string.pattern().x != 0;
                ((!conserve.sz && !conserve.particle_number) || !flips).then(|| e.clone())
            } else {
                let sources: Vec<Excitation> = e.sources.iter().filter(|s| ok_exc(s)).cloned().collect();
                (!sources.is_empty()).then(|| PoolEntry {
                    label: sources[0].label(),
                    sources,
                    string: e.string,
                })
            }
        })
        .collect();
    Pool {
        n_qubits: pool.n_qubits,
        entries,
    }
}
