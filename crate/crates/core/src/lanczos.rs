//! Krylov-subspace acceleration from archived model-space steps.
//!
//! With `E = e^{-Δβ(H - E0)}` and `d̃_JI = d_JI e^{Δβ(E_J - E0)}`, the state at
//! step `ℓ` is `Φ^(ℓ)_I = Σ_J D^(ℓ'→ℓ-1)_JI E^{ℓ-ℓ'} Φ^(ℓ')_J`. Inner products
//! between steps `ℓ ≥ ℓ'` therefore reduce to matrices measured at the
//! midpoint `m = (ℓ+ℓ')/2`:
//!
//! ```text
//! 𝒮(ℓ,ℓ') = D^(m→ℓ-1)† S^(m) [D^(ℓ'→m-1)]^{-1}
//! 𝓗(ℓ,ℓ') = D^(m→ℓ-1)† H^(m) [D^(ℓ'→m-1)]^{-1}
//! ```
//!
//! which requires `ℓ - ℓ'` even. Candidate time indices share the parity of
//! the latest one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::ModelSpace;
use crate::numerics::{canonical_geneig, condition_number, hermitian_defect, CMatrix, DEFAULT_CANONICAL_CUTOFF};

pub const DEFAULT_THRESHOLD: f64 = 0.99;
pub const DEFAULT_MAX_VECTORS: usize = 5;
/// `D` blocks above this condition number are not inverted.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VectorCap {
    /// `max_vectors` counts time indices.
    #[default]
    TimeIndices,
    /// `max_vectors` counts basis states (time indices × n_states).
    BasisVectors,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanczosConfig {
    pub threshold: f64,
    pub max_vectors: usize,
    pub cap: VectorCap,
    pub canonical_cutoff: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            threshold: DEFAULT_THRESHOLD,
            max_vectors: DEFAULT_MAX_VECTORS,
            cap: VectorCap::TimeIndices,
            canonical_cutoff: DEFAULT_CANONICAL_CUTOFF,
        }
    }
}

impl LanczosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "lanczos threshold {} must lie in (0, 1]",
                self.threshold
            )));
        }
        if self.max_vectors == 0 {
            return Err(Error::InvalidParams("lanczos max_vectors must be >= 1".to_string()));
        }
        Ok(())
    }

    fn max_time_indices(&self, n_states: usize) -> usize {
        match self.cap {
            VectorCap::TimeIndices => self.max_vectors,
            VectorCap::BasisVectors => (self.max_vectors / n_states.max(1)).max(1),
        }
    }
}

/// Per-step archive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovRecord {
    pub step: usize,
    pub h_mat: CMatrix,
    pub s_mat: CMatrix,
    pub d_tilde: CMatrix,
    pub e0: f64,
    pub d_condition: f64,
}

impl KrylovRecord {
    pub fn new(step: usize, h_mat: CMatrix, s_mat: CMatrix, d: &CMatrix, energies: &[f64], e0: f64, dbeta: f64) -> Self {
        let mut d_tilde = d.clone();
        for (j, e) in energies.iter().enumerate() {
            let w = (dbeta * (e - e0)).exp();
            for i in 0..d_tilde.ncols() {
                d_tilde[(j, i)] *= w;
            }
        }
        let d_condition = condition_number(&d_tilde);
        KrylovRecord {
            step,
            h_mat,
            s_mat,
            d_tilde,
            e0,
            d_condition,
        }
    }

    pub fn from_space(step: usize, space: &ModelSpace, d: &CMatrix, e0: f64, dbeta: f64) -> Self {
        KrylovRecord::new(
            step,
            space.h_mat.clone(),
            space.s_mat.clone(),
            d,
            &space.energies,
            e0,
            dbeta,
        )
    }

    pub fn n_states(&self) -> usize {
        self.s_mat.nrows()
    }
}

fn record(records: &[KrylovRecord], step: usize) -> Result<&KrylovRecord> {
    match records.get(step) {
        Some(r) if r.step == step => Ok(r),
        _ => records
            .iter()
            .find(|r| r.step == step)
            .ok_or(Error::MissingRecord(step)),
    }
}

/// `D^(from→to) = d̃^(from) d̃^(from+1) ⋯ d̃^(to)`; identity when `to < from`.
pub fn d_product(records: &[KrylovRecord], from: usize, to: isize) -> Result<CMatrix> {
    let n = records.first().map(|r| r.n_states()).ok_or(Error::MissingRecord(from))?;
    let mut acc = CMatrix::identity(n, n);
    if to < from as isize {
        return Ok(acc);
    }
    for step in from..=(to as usize) {
        acc *= &record(records, step)?.d_tilde;
    }
    Ok(acc)
}

fn invert_checked(d: CMatrix, step: usize) -> Result<CMatrix> {
    if condition_number(&d) > MAX_CONDITION {
        return Err(Error::SingularTransform(step));
    }
    d.try_inverse().ok_or(Error::SingularTransform(step))
}

/// `(𝒮, 𝓗)` blocks between time indices `l ≥ lp`.
pub fn block(records: &[KrylovRecord], l: usize, lp: usize) -> Result<(CMatrix, CMatrix)> {
    if l < lp {
        let (s, h) = block(records, lp, l)?;
        return Ok((s.adjoint(), h.adjoint()));
    }
    if (l - lp) % 2 != 0 {
        return Err(Error::Parity(l, lp));
    }
    let m = (l + lp) / 2;
    let mid = record(records, m)?;
    let left = d_product(records, m, l as isize - 1)?.adjoint();
    let right = invert_checked(d_product(records, lp, m as isize - 1)?, lp)?;
    Ok((&left * &mid.s_mat * &right, &left * &mid.h_mat * &right))
}

/// Assembled Krylov matrices over the given time indices.
#[derive(Debug, Clone)]
pub struct ScriptMatrices {
    pub s: CMatrix,
    pub h: CMatrix,
    /// Hermitian defect of `𝒮` before symmetrization.
    pub s_asymmetry: f64,
}

pub fn script_matrices(records: &[KrylovRecord], indices: &[usize]) -> Result<ScriptMatrices> {
    let n = records.first().map(|r| r.n_states()).ok_or(Error::MissingRecord(0))?;
    if let Some(&first) = indices.first() {
        for &l in indices {
            if (l + first) % 2 != 0 {
                return Err(Error::Parity(first, l));
            }
        }
    }
    let k = indices.len();
    let mut s = CMatrix::zeros(n * k, n * k);
    let mut h = CMatrix::zeros(n * k, n * k);
    for (a, &la) in indices.iter().enumerate() {
        for (b, &lb) in indices.iter().enumerate() {
            let (sb, hb) = block(records, la, lb)?;
            s.view_mut((a * n, b * n), (n, n)).copy_from(&sb);
            h.view_mut((a * n, b * n), (n, n)).copy_from(&hb);
        }
    }
    let s_asymmetry = hermitian_defect(&s);
    let s = crate::numerics::hermitize(&s);
    let h = crate::numerics::hermitize(&h);
    Ok(ScriptMatrices { s, h, s_asymmetry })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovBasisSelection {
    /// Chosen time indices, latest first.
    pub indices: Vec<usize>,
    pub threshold: f64,
    pub max_vectors: usize,
    /// Candidates skipped because their `D` block was ill-conditioned.
    pub excluded: Vec<usize>,
}

impl KrylovBasisSelection {
    /// `(ℓ, I)` pairs spanned by the selection.
    pub fn pairs(&self, n_states: usize) -> Vec<(usize, usize)> {
        self.indices
            .iter()
            .flat_map(|&l| (0..n_states).map(move |i| (l, i)))
            .collect()
    }
}

/// Greedy backward selection. `overlap(kept, candidate)` returns the largest
/// normalized overlap between the two time indices, or `None` when the
/// candidate cannot be evaluated.
pub fn select_backward<F>(latest: usize, threshold: f64, max_indices: usize, mut overlap: F) -> KrylovBasisSelection
where
    F: FnMut(usize, usize) -> Option<f64>,
{
    let mut indices = vec![latest];
    let mut excluded = Vec::new();
    let mut cand = latest as isize - 2;
    while cand >= 0 && indices.len() < max_indices {
        let c = cand as usize;
        let mut ok = true;
        for &k in &indices {
            match overlap(k, c) {
                Some(v) if v < threshold => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    excluded.push(c);
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            indices.push(c);
        }
        cand -= 2;
    }
    KrylovBasisSelection {
        indices,
        threshold,
        max_vectors: max_indices,
        excluded,
    }
}

/// Largest `|𝒮_IJ| / sqrt(𝒮_II 𝒮_JJ)` between two time indices.
pub fn normalized_overlap(records: &[KrylovRecord], l: usize, lp: usize) -> Result<f64> {
    let (s, _) = block(records, l, lp)?;
    let sl = &record(records, l)?.s_mat;
    let slp = &record(records, lp)?.s_mat;
    let mut worst: f64 = 0.0;
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let norm = (sl[(i, i)].re * slp[(j, j)].re).sqrt();
            worst = worst.max(s[(i, j)].norm() / norm);
        }
    }
    Ok(worst)
}

pub fn select_stable(records: &[KrylovRecord], cfg: &LanczosConfig) -> Result<KrylovBasisSelection> {
    let last = records.last().ok_or(Error::MissingRecord(0))?;
    let max = cfg.max_time_indices(last.n_states());
    Ok(select_backward(last.step, cfg.threshold, max, |k, c| {
        normalized_overlap(records, k, c).ok()
    }))
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub energies: Vec<f64>,
    pub selection: KrylovBasisSelection,
    /// Directions lost to canonical truncation.
    pub discarded: usize,
    pub s_asymmetry: f64,
}

/// Ascending eigenvalue estimates from the stabilized Krylov space.
pub fn lanczos_energies(records: &[KrylovRecord], cfg: &LanczosConfig) -> Result<LanczosResult> {
    cfg.validate()?;
    let first = records.first().ok_or(Error::MissingRecord(0))?;
    if records.iter().any(|r| r.e0 != first.e0) {
        return Err(Error::Contract("records carry different reference energies".to_string()));
    }
    let selection = select_stable(records, cfg)?;
    let m = script_matrices(records, &selection.indices)?;
    let sol = canonical_geneig(&m.h, &m.s, cfg.canonical_cutoff)?;
    Ok(LanczosResult {
        energies: sol.energies,
        selection,
        discarded: sol.discarded,
        s_asymmetry: m.s_asymmetry,
    })
}

/// Scalar QLanczos matrices for a single propagated state, from its energy
/// history: `S_ℓℓ' = n_m² / (n_ℓ n_ℓ')`, `H_ℓℓ' = S_ℓℓ' E_m`.
pub fn single_state_matrices(energies: &[f64], e0: f64, dbeta: f64, indices: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    // ln n_ℓ = -Δβ Σ_{k<ℓ} (E_k - E0)
    let mut ln_n = vec![0.0; energies.len() + 1];
    for k in 0..energies.len() {
        ln_n[k + 1] = ln_n[k] - dbeta * (energies[k] - e0);
    }
    let k = indices.len();
    let mut s = DMatrix::zeros(k, k);
    let mut h = DMatrix::zeros(k, k);
    for (a, &l) in indices.iter().enumerate() {
        for (b, &lp) in indices.iter().enumerate() {
            let m = (l + lp) / 2;
            let v = (2.0 * ln_n[m] - ln_n[l] - ln_n[lp]).exp();
            s[(a, b)] = v;
            h[(a, b)] = v * energies[m];
        }
    }
    (s, h)
}
