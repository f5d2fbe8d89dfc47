//! Model-space imaginary time evolution.
//!
//! A set of states `{Φ_I}` is propagated together. At every step the
//! first-order overlap of the imaginary-time-evolved states is Löwdin
//! orthonormalized, giving `d = s̃^{-1/2}`; state `I` then targets
//! `Σ_J d_JI e^{-Δβ(H - E_J)} Φ_J`, which each state reaches through its own
//! fitted unitary (state-specific) or all states through a shared one
//! (state-averaged). Physical energies come from `H c = S c E` in the span.
//!
//! `d` is Hermitian (real symmetric for real Hamiltonians), so whether the
//! orthogonality term is written with `d_JI` or `d_IJ` only matters through
//! conjugation; this module uses `d_JI` throughout.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{lanczos_energies, KrylovRecord, LanczosConfig};
use crate::numerics::{
    canonical_geneig, hermitian_defect, hermitian_eig, inv_sqrt_psd, spectral_function, CMatrix,
    DEFAULT_CANONICAL_CUTOFF,
};
use crate::operators::{apply_spin_shift, build_spin_operators, HamiltonianBundle, SpinSector};
use crate::pauli::QubitOperator;
use crate::pool::Pool;
use crate::qite::{apply_step, build_m_from_images, pool_images, solve_amplitudes, EvolutionConfig, StepSolution};
use crate::statevector::{apply_operator, init_configuration, StateVector};

/// Tolerance on `|S - I|` in state-averaged mode.
pub const STATE_AVERAGED_OVERLAP_TOL: f64 = 1e-10;
/// Default abort threshold on `|S_IJ - δ_IJ|` in state-specific mode.
pub const STATE_SPECIFIC_OVERLAP_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    StateSpecific,
    StateAveraged,
}

/// The propagated states and their step-local matrices.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub states: Vec<StateVector>,
    /// `E_I = ⟨Φ_I|H|Φ_I⟩`
    pub energies: Vec<f64>,
    pub h_mat: CMatrix,
    pub s_mat: CMatrix,
}

/// `⟨bra_I|ket_J⟩` over two sets of vectors.
fn gram(bras: &[StateVector], kets: &[StateVector]) -> CMatrix {
    CMatrix::from_fn(bras.len(), kets.len(), |i, j| {
        crate::statevector::inner_slices(bras[i].amplitudes(), kets[j].amplitudes())
    })
}

impl ModelSpace {
    pub fn new(states: Vec<StateVector>, h: &QubitOperator) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParams("model space needs at least one state".to_string()));
        }
        for s in &states {
            if s.n_qubits() != h.n_qubits() {
                return Err(Error::Dimension {
                    expected: h.n_qubits(),
                    found: s.n_qubits(),
                });
            }
        }
        let hs: Vec<StateVector> = states
            .par_iter()
            .map(|s| apply_operator(h, s))
            .collect::<Result<_>>()?;
        let h_mat = gram(&states, &hs);
        let s_mat = gram(&states, &states);
        let energies = (0..states.len())
            .map(|i| h_mat[(i, i)].re / s_mat[(i, i)].re)
            .collect();
        Ok(ModelSpace {
            states,
            energies,
            h_mat,
            s_mat,
        })
    }

    /// Löwdin-orthonormalize `states` on their exact overlap, then build.
    pub fn orthonormalized(states: Vec<StateVector>, h: &QubitOperator) -> Result<Self> {
        let s = gram(&states, &states);
        let defect = (&s - CMatrix::identity(s.nrows(), s.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect <= 1e-12 {
            return ModelSpace::new(states, h);
        }
        let x = inv_sqrt_psd(&s)?;
        let new_states = combine(&states, &x);
        ModelSpace::new(new_states, h)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Largest `|S_IJ - δ_IJ|` and where it occurs.
    pub fn overlap_drift(&self) -> (f64, usize, usize) {
        let n = self.n_states();
        let mut worst = (0.0, 0, 0);
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (self.s_mat[(i, j)] - target).norm();
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        worst
    }
}

/// `out_I = Σ_J x_JI v_J`
fn combine(states: &[StateVector], x: &CMatrix) -> Vec<StateVector> {
    (0..states.len())
        .map(|i| {
            let mut acc = StateVector::from_amplitudes(vec![Complex64::default(); states[0].dim()])
                .expect("power-of-two dimension");
            for (j, s) in states.iter().enumerate() {
                acc.axpy(x[(j, i)], s).expect("same register");
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LowdinTransform {
    pub d: CMatrix,
    pub s_tilde: CMatrix,
}

/// `s̃_IJ = S_IJ - 2Δβ (H_IJ - ½(E_I + E_J) S_IJ)`.
pub fn first_order_overlap(space: &ModelSpace, dbeta: f64) -> CMatrix {
    let n = space.n_states();
    CMatrix::from_fn(n, n, |i, j| {
        let s = space.s_mat[(i, j)];
        let shift = 0.5 * (space.energies[i] + space.energies[j]);
        s - (space.h_mat[(i, j)] - s * shift) * (2.0 * dbeta)
    })
}

/// `d = U s̃^{-1/2} U†` from the eigendecomposition of the first-order overlap.
pub fn lowdin_d(space: &ModelSpace, dbeta: f64) -> Result<LowdinTransform> {
    let s_tilde = crate::numerics::hermitize(&first_order_overlap(space, dbeta));
    let (vals, vecs) = hermitian_eig(&s_tilde)?;
    if let Some(&min) = vals.first() {
        if min <= 0.0 {
            return Err(Error::StepSize { min_eigenvalue: min });
        }
    }
    let d = spectral_function(&vals, &vecs, |x| 1.0 / x.sqrt());
    Ok(LowdinTransform { d, s_tilde })
}

/// Per-state pieces shared between `M^I`, `b^I` and the update.
struct StateWork {
    images: Vec<StateVector>,
    h_shifted: StateVector,
}

fn state_work(space: &ModelSpace, i: usize, h: &QubitOperator, pool: &Pool) -> Result<StateWork> {
    let v = &space.states[i];
    let images = pool_images(v, pool)?;
    let mut hv = apply_operator(h, v)?;
    hv.axpy(Complex64::new(-space.energies[i], 0.0), v)?;
    Ok(StateWork {
        images,
        h_shifted: hv,
    })
}

fn b_from_work(
    space: &ModelSpace,
    i: usize,
    work: &StateWork,
    d: &CMatrix,
    dbeta: f64,
    orthogonality_term: bool,
) -> DVector<f64> {
    let n = space.n_states();
    DVector::from_iterator(
        work.images.len(),
        work.images.iter().map(|img| {
            // Im⟨Φ_I|[H, σ]|Φ_I⟩ = 2 Im⟨(H - E_I)Φ_I|σ Φ_I⟩
            let mut b = 2.0 * crate::statevector::inner_slices(work.h_shifted.amplitudes(), img.amplitudes()).im;
            if orthogonality_term {
                let mut extra = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    // ⟨Φ_I|σ|Φ_J⟩ = ⟨σΦ_I|Φ_J⟩
                    let t = crate::statevector::inner_slices(img.amplitudes(), space.states[j].amplitudes());
                    extra += (d[(j, i)] * t).im;
                }
                b += 2.0 / dbeta * extra;
            }
            b
        }),
    )
}

/// `b^I_μ = Im⟨Φ_I|[H,σ_μ]|Φ_I⟩ + (2/Δβ) Σ_J Im(d_JI ⟨Φ_I|σ_μ|Φ_J⟩)`.
pub fn build_b_state(
    space: &ModelSpace,
    i: usize,
    h: &QubitOperator,
    pool: &Pool,
    d: &CMatrix,
    dbeta: f64,
) -> Result<DVector<f64>> {
    if i >= space.n_states() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: space.n_states(),
        });
    }
    let work = state_work(space, i, h, pool)?;
    Ok(b_from_work(space, i, &work, d, dbeta, true))
}

/// Knobs beyond the shared evolution config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub mode: Mode,
    /// Include the `(2/Δβ) Σ_J d_JI Im⟨Φ_I|σ|Φ_J⟩` term of `b^I`.
    pub orthogonality_term: bool,
    /// State-specific abort threshold on `|S_IJ - δ_IJ|`; `None` disables.
    pub overlap_limit: Option<f64>,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            mode: Mode::StateSpecific,
            orthogonality_term: true,
            overlap_limit: Some(STATE_SPECIFIC_OVERLAP_LIMIT),
        }
    }
}

impl StepOptions {
    pub fn with_mode(mode: Mode) -> Self {
        StepOptions {
            mode,
            ..Default::default()
        }
    }
}

/// What one step measured before it moved the states.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub lowdin: LowdinTransform,
    pub b_vectors: Vec<DVector<f64>>,
    pub b_norms: Vec<f64>,
    /// `‖Σ_I b^I‖`
    pub summed_b_norm: f64,
    pub residuals: Vec<f64>,
}

impl StepReport {
    pub fn max_b_norm(&self) -> f64 {
        self.b_norms.iter().cloned().fold(0.0, f64::max)
    }

    /// The quantity compared against the convergence threshold.
    pub fn convergence_metric(&self, mode: Mode) -> f64 {
        match mode {
            Mode::StateSpecific => self.max_b_norm(),
            Mode::StateAveraged => self.summed_b_norm,
        }
    }
}

/// Check the orthonormality invariant for `mode`.
pub fn check_overlap(space: &ModelSpace, opts: &StepOptions) -> Result<()> {
    let (dev, i, j) = space.overlap_drift();
    let limit = match opts.mode {
        Mode::StateAveraged => Some(STATE_AVERAGED_OVERLAP_TOL),
        Mode::StateSpecific => opts.overlap_limit,
    };
    match limit {
        Some(limit) if dev > limit => Err(Error::OrthogonalityLost { i, j, value: dev, limit }),
        _ => Ok(()),
    }
}

/// Measure `d`, `M^I`, `b^I` on the current space and solve for amplitudes.
pub fn prepare_step(
    space: &ModelSpace,
    h: &QubitOperator,
    pool: &Pool,
    cfg: &EvolutionConfig,
    opts: &StepOptions,
) -> Result<(StepReport, Vec<StepSolution>)> {
    let lowdin = lowdin_d(space, cfg.dbeta)?;
    let n = space.n_states();
    let works: Vec<StateWork> = (0..n)
        .into_par_iter()
        .map(|i| state_work(space, i, h, pool))
        .collect::<Result<_>>()?;
    let b_vectors: Vec<DVector<f64>> = (0..n)
        .map(|i| b_from_work(space, i, &works[i], &lowdin.d, cfg.dbeta, opts.orthogonality_term))
        .collect();
    let b_norms: Vec<f64> = b_vectors.iter().map(|b| b.norm()).collect();
    let mut b_sum = DVector::zeros(pool.len());
    for b in &b_vectors {
        b_sum += b;
    }
    let summed_b_norm = b_sum.norm();
    let solutions = match opts.mode {
        Mode::StateSpecific => (0..n)
            .into_par_iter()
            .map(|i| {
                let m = build_m_from_images(&works[i].images);
                solve_amplitudes(&m, &b_vectors[i], cfg.svd_cutoff).map_err(|e| e.at_step(f64::NAN, i))
            })
            .collect::<Result<Vec<_>>>()?,
        Mode::StateAveraged => {
            let mut m_sum = build_m_from_images(&works[0].images);
            for w in &works[1..] {
                m_sum += build_m_from_images(&w.images);
            }
            let sol = solve_amplitudes(&m_sum, &b_sum, cfg.svd_cutoff)?;
            vec![sol; n]
        }
    };
    let residuals = solutions.iter().map(|s| s.residual).collect();
    Ok((
        StepReport {
            lowdin,
            b_vectors,
            b_norms,
            summed_b_norm,
            residuals,
        },
        solutions,
    ))
}

/// One model-space step: returns the propagated space and the measurements
/// taken on the input space.
pub fn msqite_step(
    space: &ModelSpace,
    h: &QubitOperator,
    pool: &Pool,
    cfg: &EvolutionConfig,
    opts: &StepOptions,
) -> Result<(ModelSpace, StepReport)> {
    check_overlap(space, opts)?;
    let (report, solutions) = prepare_step(space, h, pool, cfg, opts)?;
    let new_states: Vec<StateVector> = space
        .states
        .par_iter()
        .zip(solutions.par_iter())
        .map(|(v, sol)| {
            let mut v = v.clone();
            apply_step(&mut v, sol, pool, cfg.dbeta)?;
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok((ModelSpace::new(new_states, h)?, report))
}

#[derive(Debug, Clone)]
pub struct SubspaceSolution {
    pub energies: Vec<f64>,
    pub coeffs: CMatrix,
    /// Directions dropped by canonical truncation of `S`.
    pub discarded: usize,
}

/// `H c = S c E` on the model space.
pub fn subspace_eigensolve(space: &ModelSpace) -> Result<SubspaceSolution> {
    subspace_eigensolve_matrices(&space.h_mat, &space.s_mat)
}

pub fn subspace_eigensolve_matrices(h: &CMatrix, s: &CMatrix) -> Result<SubspaceSolution> {
    let r = canonical_geneig(h, s, DEFAULT_CANONICAL_CUTOFF)?;
    Ok(SubspaceSolution {
        energies: r.energies,
        coeffs: r.coeffs,
        discarded: r.discarded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Msqite,
    Lanczos,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Msqite => "msqite",
            Source::Lanczos => "lanczos",
        }
    }
}

/// One CSV row of a multi-state trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub source: Source,
    pub beta: f64,
    pub state_index: usize,
    pub e_subspace: f64,
    pub e_raw: Option<f64>,
    /// `⟨Φ_I|Ŝ²|Φ_I⟩` of propagated state `I`.
    pub s2: Option<f64>,
    pub b_norm: Option<f64>,
    /// `⟨Ŝ²⟩` of subspace eigenstate `k = state_index`.
    pub s2_subspace: Option<f64>,
}

pub const TRAJECTORY_HEADER: &str = "source,beta,state_index,e_subspace,e_raw,s2_expectation,b_norm,s2_subspace";

impl TrajectoryRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>, prec: usize| x.map(|v| format!("{v:.prec$e}")).unwrap_or_default();
        format!(
            "{},{:.6},{},{:.12e},{},{},{},{}",
            self.source.as_str(),
            self.beta,
            self.state_index,
            self.e_subspace,
            opt(self.e_raw, 12),
            opt(self.s2, 8),
            opt(self.b_norm, 6),
            opt(self.s2_subspace, 8),
        )
    }
}

#[derive(Debug, Clone)]
pub struct MsqiteOptions {
    pub step: StepOptions,
    pub sector: Option<SpinSector>,
    /// Report `⟨S²⟩` per state (requires an even qubit count).
    pub track_spin: bool,
    pub lanczos: Option<LanczosConfig>,
}

impl Default for MsqiteOptions {
    fn default() -> Self {
        MsqiteOptions {
            step: StepOptions::default(),
            sector: None,
            track_spin: false,
            lanczos: None,
        }
    }
}

/// Per-step snapshot kept alongside the CSV rows.
#[derive(Debug, Clone)]
pub struct StepSummary {
    pub beta: f64,
    pub subspace_energies: Vec<f64>,
    pub raw_energies: Vec<f64>,
    pub s2: Option<Vec<f64>>,
    pub s2_subspace: Option<Vec<f64>>,
    pub b_norms: Vec<f64>,
    pub summed_b_norm: f64,
    pub s_mat: CMatrix,
    pub lanczos_energies: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MultiTrajectory {
    pub rows: Vec<TrajectoryRow>,
    pub steps: Vec<StepSummary>,
    pub records: Vec<KrylovRecord>,
    pub final_energies: Vec<f64>,
    pub final_space: ModelSpace,
    pub converged: bool,
    pub e0: f64,
}

impl MultiTrajectory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }

    /// First β at which every tracked subspace energy is within `tol` of
    /// `targets` (source = msqite).
    pub fn beta_to_accuracy(&self, targets: &[f64], tol: f64) -> Option<f64> {
        self.steps.iter().find_map(|s| {
            within(&s.subspace_energies, targets, tol).then_some(s.beta)
        })
    }

    /// Same for the Lanczos estimates.
    pub fn lanczos_beta_to_accuracy(&self, targets: &[f64], tol: f64) -> Option<f64> {
        self.steps.iter().find_map(|s| {
            s.lanczos_energies
                .as_ref()
                .and_then(|e| within(e, targets, tol).then_some(s.beta))
        })
    }
}

fn within(values: &[f64], targets: &[f64], tol: f64) -> bool {
    values.len() >= targets.len() && targets.iter().zip(values).all(|(t, v)| (t - v).abs() < tol)
}

/// `⟨Ŝ²⟩` of each subspace eigenstate `Σ_I c_Ik Φ_I`.
pub fn eigenstate_spins(space: &ModelSpace, sub: &SubspaceSolution, s2: &QubitOperator) -> Result<Vec<f64>> {
    let n = space.n_states();
    let s2_states: Vec<StateVector> = space
        .states
        .iter()
        .map(|v| apply_operator(s2, v))
        .collect::<Result<_>>()?;
    let m = gram(&space.states, &s2_states);
    Ok((0..sub.energies.len())
        .map(|k| {
            let c = sub.coeffs.column(k);
            let num = (c.adjoint() * &m * c)[(0, 0)].re;
            let den = (c.adjoint() * &space.s_mat * c)[(0, 0)].re;
            debug_assert!(c.len() == n);
            num / den
        })
        .collect())
}

/// Run from distinct computational-basis configurations.
pub fn run_msqite(
    h: &HamiltonianBundle,
    initial_bits: &[String],
    pool: &Pool,
    cfg: &EvolutionConfig,
    opts: &MsqiteOptions,
) -> Result<MultiTrajectory> {
    let mut seen = std::collections::HashSet::new();
    for b in initial_bits {
        if !seen.insert(b.trim()) {
            return Err(Error::InvalidParams(format!("initial configuration `{b}` is repeated")));
        }
    }
    let states = initial_bits
        .iter()
        .map(|b| init_configuration(b, h.n_qubits))
        .collect::<Result<Vec<_>>>()?;
    run_msqite_states(h, states, pool, cfg, opts)
}

/// Run from arbitrary initial states; a non-orthonormal start is Löwdin
/// orthonormalized once on its exact overlap.
pub fn run_msqite_states(
    h: &HamiltonianBundle,
    states: Vec<StateVector>,
    pool: &Pool,
    cfg: &EvolutionConfig,
    opts: &MsqiteOptions,
) -> Result<MultiTrajectory> {
    cfg.validate()?;
    if pool.n_qubits() != h.n_qubits {
        return Err(Error::Dimension {
            expected: h.n_qubits,
            found: pool.n_qubits(),
        });
    }
    let spin_ops = if opts.track_spin || opts.sector.is_some() {
        Some(build_spin_operators(h.n_qubits)?)
    } else {
        None
    };
    let driver = match (&opts.sector, &spin_ops) {
        (Some(sector), Some(ops)) => apply_spin_shift(h, sector, &ops.s2)?,
        _ => h.clone(),
    };
    let shifted = driver.h != h.h;
    let mut space = ModelSpace::orthonormalized(states, &driver.h)?;
    let n = space.n_states();
    let e0 = space.energies.iter().sum::<f64>() / n as f64;

    let mut rows = Vec::new();
    let mut steps = Vec::new();
    let mut records: Vec<KrylovRecord> = Vec::new();
    let mut converged = false;
    let n_steps = cfg.n_steps();

    for step in 0..=n_steps {
        let beta = step as f64 * cfg.dbeta;
        check_overlap(&space, &opts.step).map_err(|e| e.at_step(beta, 0))?;
        let reported = if shifted {
            ModelSpace::new(space.states.clone(), &h.h)?
        } else {
            space.clone()
        };
        let sub = subspace_eigensolve(&reported).map_err(|e| e.at_step(beta, 0))?;
        let (s2, s2_subspace) = match &spin_ops {
            Some(ops) => {
                let per_state = space
                    .states
                    .iter()
                    .map(|v| Ok(crate::statevector::transition(&ops.s2, v, v)?.re / v.norm().powi(2)))
                    .collect::<Result<Vec<f64>>>()?;
                (Some(per_state), Some(eigenstate_spins(&space, &sub, &ops.s2)?))
            }
            None => (None, None),
        };
        let (report, solutions) =
            prepare_step(&space, &driver.h, pool, cfg, &opts.step).map_err(|e| e.at_step(beta, 0))?;

        let lanczos = match &opts.lanczos {
            Some(lcfg) => {
                records.push(KrylovRecord::from_space(step, &space, &report.lowdin.d, e0, cfg.dbeta));
                Some(lanczos_energies(&records, lcfg).map_err(|e| e.at_step(beta, 0))?)
            }
            None => None,
        };

        for i in 0..n {
            rows.push(TrajectoryRow {
                source: Source::Msqite,
                beta,
                state_index: i,
                e_subspace: sub.energies.get(i).copied().unwrap_or(f64::NAN),
                e_raw: Some(reported.energies[i]),
                s2: s2.as_ref().map(|v| v[i]),
                b_norm: Some(report.b_norms[i]),
                s2_subspace: s2_subspace.as_ref().and_then(|v| v.get(i).copied()),
            });
        }
        if let Some(l) = &lanczos {
            for (i, e) in l.energies.iter().take(n).enumerate() {
                rows.push(TrajectoryRow {
                    source: Source::Lanczos,
                    beta,
                    state_index: i,
                    e_subspace: *e,
                    e_raw: None,
                    s2: None,
                    b_norm: None,
                    s2_subspace: None,
                });
            }
        }
        steps.push(StepSummary {
            beta,
            subspace_energies: sub.energies.clone(),
            raw_energies: reported.energies.clone(),
            s2,
            s2_subspace,
            b_norms: report.b_norms.clone(),
            summed_b_norm: report.summed_b_norm,
            s_mat: space.s_mat.clone(),
            lanczos_energies: lanczos.map(|l| l.energies),
        });

        if report.convergence_metric(opts.step.mode) < cfg.convergence_bnorm {
            converged = true;
            break;
        }
        if step == n_steps {
            break;
        }
        let new_states: Vec<StateVector> = space
            .states
            .par_iter()
            .zip(solutions.par_iter())
            .enumerate()
            .map(|(i, (v, sol))| {
                let mut v = v.clone();
                apply_step(&mut v, sol, pool, cfg.dbeta).map_err(|e| e.at_step(beta, i))?;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        space = ModelSpace::new(new_states, &driver.h)?;
    }

    let final_reported = if shifted {
        ModelSpace::new(space.states.clone(), &h.h)?
    } else {
        space.clone()
    };
    let final_energies = subspace_eigensolve(&final_reported)?.energies;
    debug_assert!(hermitian_defect(&final_reported.h_mat) < 1e-8);
    Ok(MultiTrajectory {
        rows,
        steps,
        records,
        final_energies,
        final_space: space,
        converged,
        e0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_model, ModelSpec};
    use crate::pool::build_complete_pool;

    fn heisenberg2() -> HamiltonianBundle {
        build_model(&ModelSpec::HeisenbergChain {
            sites: 2,
            j: 1.0,
            hz: 0.0,
            periodic: false,
        })
        .unwrap()
    }

    #[test]
    fn lowdin_identity_at_zero_step() {
        let h = heisenberg2();
        let states = vec![
            init_configuration("01", 2).unwrap(),
            init_configuration("11", 2).unwrap(),
        ];
        let space = ModelSpace::new(states, &h.h).unwrap();
        let l = lowdin_d(&space, 0.0).unwrap();
        assert!((l.d - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn lowdin_single_state_is_one() {
        let h = heisenberg2();
        let space = ModelSpace::new(vec![init_configuration("01", 2).unwrap()], &h.h).unwrap();
        let l = lowdin_d(&space, 0.3).unwrap();
        assert!((l.s_tilde[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((l.d[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn oversized_step_reports_step_size() {
        let h = heisenberg2();
        let states = vec![
            init_configuration("01", 2).unwrap(),
            init_configuration("10", 2).unwrap(),
        ];
        let space = ModelSpace::new(states, &h.h).unwrap();
        // H_01 = 1/2: s̃ eigenvalues are 1 ± Δβ
        assert!(matches!(lowdin_d(&space, 1.5), Err(Error::StepSize { .. })));
    }

    #[test]
    fn single_state_b_matches_qite() {
        let h = heisenberg2();
        let pool = build_complete_pool(2).unwrap();
        let mut v = init_configuration("01", 2).unwrap();
        crate::statevector::apply_rotation(0.3, &pool.string(1).clone(), &mut v).unwrap();
        let space = ModelSpace::new(vec![v.clone()], &h.h).unwrap();
        let l = lowdin_d(&space, 0.1).unwrap();
        let b_ms = build_b_state(&space, 0, &h.h, &pool, &l.d, 0.1).unwrap();
        let b_q = crate::qite::build_b_single(&v, &h.h, &pool).unwrap();
        assert!((b_ms - b_q).norm() < 1e-14);
    }

    #[test]
    fn repeated_configuration_rejected() {
        let h = heisenberg2();
        let pool = build_complete_pool(2).unwrap();
        let err = run_msqite(
            &h,
            &["01".to_string(), "01".to_string()],
            &pool,
            &EvolutionConfig::default(),
            &MsqiteOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn invariant_subspace_is_stationary() {
        // span{01, 10} is invariant under the two-site Heisenberg coupling
        let h = heisenberg2();
        let pool = build_complete_pool(2).unwrap();
        let cfg = EvolutionConfig {
            beta_max: 1.0,
            ..Default::default()
        };
        let run = run_msqite(
            &h,
            &["01".to_string(), "10".to_string()],
            &pool,
            &cfg,
            &MsqiteOptions::default(),
        )
        .unwrap();
        for s in &run.steps {
            assert!((s.subspace_energies[0] + 0.75).abs() < 1e-12);
            assert!((s.subspace_energies[1] - 0.25).abs() < 1e-12);
        }
    }
}
