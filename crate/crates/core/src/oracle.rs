//! Dense exact diagonalization and exact imaginary-time propagation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lanczos::KrylovRecord;
use crate::model_space::{lowdin_d, ModelSpace};
use crate::numerics::{hermitian_eig, CMatrix};
use crate::pauli::QubitOperator;
use crate::statevector::StateVector;

/// Largest imaginary-time chunk between re-orthonormalizations.
pub const EXACT_ITE_CHUNK: f64 = 0.5;
/// Relative size below which an eigenbasis coefficient counts as zero.
pub const EXACT_ITE_ZERO_TOL: f64 = 1e-12;

/// Default qubit ceiling for dense matrices.
pub const DEFAULT_DENSE_CEILING: usize = 14;

/// Dense `2^n × 2^n` matrix of an operator.
pub fn dense_matrix(h: &QubitOperator) -> CMatrix {
    let dim = 1usize << h.n_qubits();
    let mut m = CMatrix::zeros(dim, dim);
    for (p, &c) in h.terms() {
        let base = crate::pauli::phase_value((p.y_count() % 4) as u8) * c;
        for b in 0..dim {
            let sign = if ((p.z & b as u64).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            let out = b ^ p.x as usize;
            m[(out, b)] += base * sign;
        }
    }
    m
}

pub fn dense_vector(v: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(v.amplitudes())
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub spin_labels: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_amplitudes(self.eigenvectors.column(k).iter().cloned().collect())
            .expect("power-of-two dimension")
    }

    /// Eigenvalues whose spin label is within `tol` of `s2`, ascending.
    pub fn sector(&self, s2: f64, tol: f64) -> Option<Vec<f64>> {
        self.spin_labels.as_ref().map(|labels| {
            self.eigenvalues
                .iter()
                .zip(labels)
                .filter(|(_, l)| (*l - s2).abs() < tol)
                .map(|(e, _)| *e)
                .collect()
        })
    }

    /// CSV with columns `index,E,S2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,E,S2\n");
        for (k, e) in self.eigenvalues.iter().enumerate() {
            let s2 = self
                .spin_labels
                .as_ref()
                .map(|l| format!("{:.8}", l[k]))
                .unwrap_or_default();
            let _ = writeln!(out, "{k},{e:.12},{s2}");
        }
        out
    }
}

/// Caches dense eigensystems by operator content.
#[derive(Debug)]
pub struct ReferenceOracle {
    ceiling: usize,
    cache: Mutex<HashMap<u64, Arc<(Vec<f64>, CMatrix)>>>,
}

impl Default for ReferenceOracle {
    fn default() -> Self {
        ReferenceOracle::new(DEFAULT_DENSE_CEILING)
    }
}

impl ReferenceOracle {
    pub fn new(ceiling: usize) -> Self {
        ReferenceOracle {
            ceiling,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn ceiling(&self) -> usize {
        self.ceiling
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.ceiling {
            return Err(Error::CeilingExceeded {
                n,
                ceiling: self.ceiling,
            });
        }
        Ok(())
    }

    /// Eigenvalues and eigenvector columns of `h`, memoized.
    pub fn eigensystem(&self, h: &QubitOperator) -> Result<Arc<(Vec<f64>, CMatrix)>> {
        self.check(h.n_qubits())?;
        let key = h.content_hash();
        if let Some(hit) = self.cache.lock().expect("oracle cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let eig = Arc::new(hermitian_eig(&dense_matrix(h))?);
        self.cache
            .lock()
            .expect("oracle cache poisoned")
            .insert(key, eig.clone());
        Ok(eig)
    }

    pub fn exact_spectrum(&self, h: &QubitOperator, s2: Option<&QubitOperator>) -> Result<Spectrum> {
        let eig = self.eigensystem(h)?;
        let (vals, vecs) = (&eig.0, &eig.1);
        let spin_labels = match s2 {
            Some(op) => {
                if op.n_qubits() != h.n_qubits() {
                    return Err(Error::Dimension {
                        expected: h.n_qubits(),
                        found: op.n_qubits(),
                    });
                }
                let m = dense_matrix(op);
                Some(
                    (0..vals.len())
                        .map(|k| {
                            let v = vecs.column(k);
                            (v.adjoint() * &m * v)[(0, 0)].re
                        })
                        .collect(),
                )
            }
            None => None,
        };
        Ok(Spectrum {
            eigenvalues: vals.clone(),
            eigenvectors: vecs.clone(),
            spin_labels,
        })
    }

    /// `e^{-β(H - E_min)} v` without normalization.
    pub fn propagate(&self, h: &QubitOperator, v: &StateVector, beta: f64) -> Result<StateVector> {
        if v.n_qubits() != h.n_qubits() {
            return Err(Error::Dimension {
                expected: h.n_qubits(),
                found: v.n_qubits(),
            });
        }
        let eig = self.eigensystem(h)?;
        let (vals, vecs) = (&eig.0, &eig.1);
        let e_min = vals[0];
        let mut c = vecs.adjoint() * dense_vector(v);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= (-beta * (vals[k] - e_min)).exp();
        }
        let out = vecs * c;
        StateVector::from_amplitudes(out.iter().cloned().collect())
    }

    /// `e^{-β(H - E_shift)} v` for a caller-chosen shift.
    pub fn propagate_shifted(&self, h: &QubitOperator, v: &StateVector, beta: f64, shift: f64) -> Result<StateVector> {
        let eig = self.eigensystem(h)?;
        let mut out = self.propagate(h, v, beta)?;
        out.scale(Complex64::new((-beta * (eig.0[0] - shift)).exp(), 0.0));
        Ok(out)
    }

    /// Subspace energies of `span{e^{-βH} Φ_I}`.
    ///
    /// Works on eigenbasis coefficients. Coefficients below
    /// `EXACT_ITE_ZERO_TOL` are set to zero first, so roundoff in a state
    /// cannot seed a lower eigenvector that the exact span does not contain;
    /// exact zeros survive every later linear recombination. The span is
    /// carried through chunks of at most `EXACT_ITE_CHUNK` with Löwdin
    /// re-orthonormalization in between.
    pub fn exact_ite(&self, h: &QubitOperator, states: &[StateVector], beta: f64) -> Result<Vec<f64>> {
        if states.is_empty() {
            return Err(Error::InvalidParams("exact_ite needs at least one state".to_string()));
        }
        for v in states {
            if v.n_qubits() != h.n_qubits() {
                return Err(Error::Dimension {
                    expected: h.n_qubits(),
                    found: v.n_qubits(),
                });
            }
        }
        let eig = self.eigensystem(h)?;
        let (vals, vecs) = (&eig.0, &eig.1);
        let n = states.len();
        let mut c = CMatrix::zeros(vals.len(), n);
        for (i, v) in states.iter().enumerate() {
            let mut col = vecs.adjoint() * dense_vector(v);
            let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for z in col.iter_mut() {
                if z.norm() < EXACT_ITE_ZERO_TOL * scale {
                    *z = Complex64::default();
                }
            }
            c.set_column(i, &col);
        }
        let n_chunks = ((beta / EXACT_ITE_CHUNK).ceil() as usize).max(1);
        let db = beta / n_chunks as f64;
        for _ in 0..n_chunks {
            for (k, &lam) in vals.iter().enumerate() {
                let w = (-db * (lam - vals[0])).exp();
                for i in 0..n {
                    c[(k, i)] *= w;
                }
            }
            c = &c * crate::numerics::inv_sqrt_psd(&(c.adjoint() * &c))?;
        }
        let lam = CMatrix::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let h_sub = c.adjoint() * lam * &c;
        let s_sub = c.adjoint() * &c;
        Ok(crate::model_space::subspace_eigensolve_matrices(&h_sub, &s_sub)?.energies)
    }

    /// One model-space step without the unitary approximation:
    /// `Φ'_I = Σ_J d_JI e^{-Δβ(H - E_J)} Φ_J` with the same first-order `d`
    /// the simulated step uses.
    pub fn exact_model_space_step(&self, h: &QubitOperator, space: &ModelSpace, dbeta: f64) -> Result<(ModelSpace, CMatrix)> {
        let d = lowdin_d(space, dbeta)?.d;
        let n = space.n_states();
        let mut propagated = Vec::with_capacity(n);
        for (j, s) in space.states.iter().enumerate() {
            propagated.push(self.propagate_shifted(h, s, dbeta, space.energies[j])?);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = StateVector::from_amplitudes(vec![Complex64::default(); space.states[0].dim()])?;
            for (j, p) in propagated.iter().enumerate() {
                acc.axpy(d[(j, i)], p)?;
            }
            out.push(acc);
        }
        Ok((ModelSpace::new(out, h)?, d))
    }

    /// Exact model-space trajectory and the records it produces; returns
    /// every intermediate space for brute-force comparison.
    pub fn exact_archive(
        &self,
        h: &QubitOperator,
        start: ModelSpace,
        dbeta: f64,
        n_steps: usize,
    ) -> Result<(Vec<ModelSpace>, Vec<KrylovRecord>)> {
        let e0 = start.energies.iter().sum::<f64>() / start.n_states() as f64;
        let mut spaces = vec![start];
        let mut records = Vec::new();
        for step in 0..n_steps {
            let (next, d) = self.exact_model_space_step(h, &spaces[step], dbeta)?;
            records.push(KrylovRecord::from_space(step, &spaces[step], &d, e0, dbeta));
            spaces.push(next);
        }
        // record for the last space, whose d is needed only if stepping on
        let last = spaces.len() - 1;
        let (_, d) = self.exact_model_space_step(h, &spaces[last], dbeta)?;
        records.push(KrylovRecord::from_space(last, &spaces[last], &d, e0, dbeta));
        Ok((spaces, records))
    }
}

/// Bitstring of basis index `k`, qubit 0 rightmost.
pub fn index_bitstring(k: usize, n_qubits: usize) -> String {
    (0..n_qubits).rev().map(|q| if k >> q & 1 == 1 { '1' } else { '0' }).collect()
}

impl ReferenceOracle {
    /// First set of `n` computational basis states whose exact imaginary-time
    /// limit (evaluated at `beta`) reproduces the `n` lowest eigenvalues of
    /// `h` to `tol`. Candidates are ordered by diagonal energy, then index,
    /// and combinations are tried in lexicographic order up to `budget`.
    pub fn reachable_starts(
        &self,
        h: &QubitOperator,
        n: usize,
        beta: f64,
        tol: f64,
        budget: usize,
    ) -> Result<Option<Vec<String>>> {
        let nq = h.n_qubits();
        let dim = 1usize << nq;
        if n == 0 || n > dim {
            return Err(Error::InvalidParams(format!("cannot pick {n} of {dim} basis states")));
        }
        let eig = self.eigensystem(h)?;
        let target = &eig.0[..n];
        let dense = dense_matrix(h);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| dense[(a, a)].re.total_cmp(&dense[(b, b)].re).then(a.cmp(&b)));
        let basis: Vec<StateVector> = (0..dim)
            .map(|k| StateVector::basis_state(nq, k))
            .collect::<Result<_>>()?;
        let mut pick: Vec<usize> = (0..n).collect();
        for _ in 0..budget {
            let states: Vec<StateVector> = pick.iter().map(|&i| basis[order[i]].clone()).collect();
            let e = self.exact_ite(h, &states, beta)?;
            if e.len() == n && e.iter().zip(target).all(|(a, b)| (a - b).abs() < tol) {
                return Ok(Some(pick.iter().map(|&i| index_bitstring(order[i], nq)).collect()));
            }
            // next combination of n out of dim
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(None);
                }
                k -= 1;
                if pick[k] < dim - n + k {
                    break;
                }
            }
            pick[k] += 1;
            for j in k + 1..n {
                pick[j] = pick[j - 1] + 1;
            }
        }
        Ok(None)
    }
}

/// `Φ'_I = Σ_J (S^{-1/2})_JI Φ_J` on the exact overlap.
pub fn lowdin_orthonormalize(states: &[StateVector]) -> Result<Vec<StateVector>> {
    let n = states.len();
    let s = CMatrix::from_fn(n, n, |i, j| states[i].inner(&states[j]).expect("same register"));
    let x = crate::numerics::inv_sqrt_psd(&s)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = StateVector::from_amplitudes(vec![Complex64::default(); states[0].dim()])?;
        for (j, v) in states.iter().enumerate() {
            acc.axpy(x[(j, i)], v)?;
        }
        out.push(acc);
    }
    Ok(out)
}
