//! Batch runs described by a JSON document.
//!
//! ```json
//! {
//!   "hamiltonian": { "model": { "kind": "hubbard-dimer-mo", "u": 4.0 } },
//!   "initial_states": ["0011", "1100"],
//!   "method": "msqite",
//!   "pool": { "kind": "complete" },
//!   "beta_max": 10.0,
//!   "lanczos": { "enabled": true },
//!   "oracle": true,
//!   "output": "runs/dimer"
//! }
//! ```
//!
//! `output` is a path prefix; the run writes `<output>.csv` and
//! `<output>.summary.json`. Everything except the wall time in the summary is a pure
//! function of the config.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{LanczosConfig, VectorCap, DEFAULT_MAX_VECTORS, DEFAULT_THRESHOLD};
use crate::model_space::{
    run_msqite, Mode, MsqiteOptions, MultiTrajectory, StepOptions, STATE_SPECIFIC_OVERLAP_LIMIT,
};
use crate::numerics::DEFAULT_SVD_CUTOFF;
use crate::operators::{apply_spin_shift, build_model, build_spin_operators, parse_hamiltonian_file, HamiltonianBundle, ModelSpec, SpinSector};
use crate::oracle::ReferenceOracle;
use crate::pool::{build_complete_pool, build_uccgsd_pool, filter_pool, Conservation, Pool};
use crate::qite::{run_fsqite, EvolutionConfig, DEFAULT_CONVERGENCE_BNORM, DEFAULT_DBETA, DEFAULT_FSQITE_DBETA};
use crate::statevector::init_configuration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    File(PathBuf),
    Model(ModelSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Qite,
    Fsqite,
    Msqite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PoolSpec {
    Uccgsd {
        #[serde(default)]
        conserve_sz: bool,
        #[serde(default)]
        conserve_particle_number: bool,
    },
    Complete,
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanczosSpec {
    pub enabled: bool,
    pub threshold: f64,
    pub max_vectors: usize,
    pub cap: VectorCap,
}

impl Default for LanczosSpec {
    fn default() -> Self {
        LanczosSpec {
            enabled: false,
            threshold: DEFAULT_THRESHOLD,
            max_vectors: DEFAULT_MAX_VECTORS,
            cap: VectorCap::TimeIndices,
        }
    }
}

fn default_beta_max() -> f64 {
    10.0
}

fn default_svd_cutoff() -> f64 {
    DEFAULT_SVD_CUTOFF
}

fn default_convergence() -> f64 {
    DEFAULT_CONVERGENCE_BNORM
}

fn default_true() -> bool {
    true
}

fn default_overlap_limit() -> Option<f64> {
    Some(STATE_SPECIFIC_OVERLAP_LIMIT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianSource,
    pub initial_states: Vec<String>,
    pub method: Method,
    #[serde(default)]
    pub mode: Mode,
    pub pool: PoolSpec,
    /// Defaults to 0.1, or 0.05 for `fsqite`.
    #[serde(default)]
    pub dbeta: Option<f64>,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_svd_cutoff")]
    pub svd_cutoff: f64,
    #[serde(default = "default_convergence")]
    pub convergence_bnorm: f64,
    #[serde(default)]
    pub lanczos: LanczosSpec,
    #[serde(default)]
    pub spin_shift: Option<SpinSector>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub track_spin: bool,
    /// Include the orthogonality term of `b^I`. Turning it off reproduces
    /// the drift of the uncorrected model-space update.
    #[serde(default = "default_true")]
    pub orthogonality_term: bool,
    /// State-specific abort threshold on `|S_IJ - δ_IJ|`; `null` disables.
    #[serde(default = "default_overlap_limit")]
    pub overlap_limit: Option<f64>,
    pub output: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse a config file; relative `hamiltonian.file`, `pool.path` and
    /// `output` are resolved against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = RunConfig::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let HamiltonianSource::File(p) = &mut cfg.hamiltonian {
            rebase(p);
        }
        if let PoolSpec::File { path } = &mut cfg.pool {
            rebase(path);
        }
        rebase(&mut cfg.output);
        Ok(cfg)
    }

    pub fn dbeta(&self) -> f64 {
        self.dbeta.unwrap_or(match self.method {
            Method::Fsqite => DEFAULT_FSQITE_DBETA,
            _ => DEFAULT_DBETA,
        })
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            dbeta: self.dbeta(),
            beta_max: self.beta_max,
            svd_cutoff: self.svd_cutoff,
            convergence_bnorm: self.convergence_bnorm,
        }
    }

    /// Checks that do not need the Hamiltonian. Returns warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.initial_states.is_empty() {
            return Err(Error::Config("initial_states must not be empty".to_string()));
        }
        match self.method {
            Method::Fsqite => {
                if self.omega.is_none() {
                    return Err(Error::Config("method fsqite requires omega".to_string()));
                }
                if self.lanczos.enabled {
                    return Err(Error::Config("lanczos is not available for fsqite".to_string()));
                }
                if self.spin_shift.is_some() {
                    return Err(Error::Config("spin_shift is not available for fsqite".to_string()));
                }
            }
            Method::Qite | Method::Msqite => {
                if self.omega.is_some() {
                    warnings.push("omega is ignored unless method = fsqite".to_string());
                }
            }
        }
        if self.method == Method::Msqite && self.initial_states.len() == 1 {
            warnings.push("msqite with a single state is plain QITE".to_string());
        }
        if self.method != Method::Msqite && self.mode == Mode::StateAveraged {
            warnings.push("mode is ignored unless method = msqite".to_string());
        }
        self.evolution().validate()?;
        if let Some(s) = &self.spin_shift {
            s.validate()?;
        }
        self.lanczos_config().validate()?;
        Ok(warnings)
    }

    fn lanczos_config(&self) -> LanczosConfig {
        LanczosConfig {
            threshold: self.lanczos.threshold,
            max_vectors: self.lanczos.max_vectors,
            cap: self.lanczos.cap,
            ..Default::default()
        }
    }
}

pub fn load_hamiltonian(src: &HamiltonianSource) -> Result<HamiltonianBundle> {
    match src {
        HamiltonianSource::File(p) => parse_hamiltonian_file(p),
        HamiltonianSource::Model(m) => build_model(m),
    }
}

pub fn build_pool(spec: &PoolSpec, n_qubits: usize) -> Result<Pool> {
    match spec {
        PoolSpec::Uccgsd {
            conserve_sz,
            conserve_particle_number,
        } => {
            let pool = build_uccgsd_pool(n_qubits)?;
            if *conserve_sz || *conserve_particle_number {
                Ok(filter_pool(
                    &pool,
                    Conservation {
                        sz: *conserve_sz,
                        particle_number: *conserve_particle_number,
                    },
                ))
            } else {
                Ok(pool)
            }
        }
        PoolSpec::Complete => build_complete_pool(n_qubits),
        PoolSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Pool::parse(&text, n_qubits)
        }
    }
}

/// Imaginary time used as the infinite-β limit of the exact reference.
pub const ORACLE_LIMIT_BETA: f64 = 200.0;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// Lowest eigenvalues of `H`, or of the target spin sector.
    pub lowest: Vec<f64>,
    /// Values the run should approach: the exact imaginary-time limit of the
    /// same starting states (the eigenvalue closest to `omega` for fsqite).
    pub reference: Vec<f64>,
    /// `|E_final - reference|` per state.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub method: Method,
    pub mode: Mode,
    pub n_qubits: usize,
    pub pool_size: usize,
    pub converged: bool,
    pub steps: usize,
    pub beta_final: f64,
    pub final_energies: Vec<f64>,
    pub lanczos_final: Option<Vec<f64>>,
    pub oracle: Option<OracleReport>,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
    pub config: RunConfig,
}

/// Everything a run produced; nothing is written to disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub summary: RunSummary,
    pub trajectories: Vec<MultiTrajectory>,
}

fn relabel(csv: &str, tag: &str, state: usize, skip_header: bool) -> String {
    let mut out = String::new();
    for (k, line) in csv.lines().enumerate() {
        if k == 0 {
            if !skip_header {
                out.push_str(line);
                out.push('\n');
            }
            continue;
        }
        // source,beta,state_index,...
        let mut cols: Vec<&str> = line.split(',').collect();
        let idx = state.to_string();
        if cols[0] == "msqite" {
            cols[0] = tag;
        }
        cols[2] = &idx;
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Execute a run in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let mut warnings = cfg.validate()?;
    let h = load_hamiltonian(&cfg.hamiltonian)?;
    for s in &cfg.initial_states {
        init_configuration(s, h.n_qubits).map_err(|e| Error::Config(format!("initial state `{s}`: {e}")))?;
    }
    let pool = build_pool(&cfg.pool, h.n_qubits)?;
    if pool.is_empty() {
        warnings.push("operator pool is empty; states will not move".to_string());
    }
    let evo = cfg.evolution();
    let track_spin = (cfg.track_spin || cfg.spin_shift.is_some()) && h.n_qubits % 2 == 0;
    if cfg.track_spin && !track_spin {
        warnings.push("spin tracking needs an even number of qubits; disabled".to_string());
    }

    let mut csv = String::new();
    let mut trajectories = Vec::new();
    let (final_energies, converged, steps, beta_final, lanczos_final) = match cfg.method {
        Method::Msqite | Method::Qite => {
            let opts = MsqiteOptions {
                step: StepOptions {
                    mode: cfg.mode,
                    orthogonality_term: cfg.orthogonality_term,
                    overlap_limit: cfg.overlap_limit,
                },
                sector: cfg.spin_shift,
                track_spin,
                lanczos: cfg.lanczos.enabled.then(|| cfg.lanczos_config()),
            };
            let groups: Vec<Vec<String>> = match cfg.method {
                Method::Msqite => vec![cfg.initial_states.clone()],
                _ => cfg.initial_states.iter().map(|s| vec![s.clone()]).collect(),
            };
            let mut energies = Vec::new();
            let mut lanczos = Vec::new();
            let mut all_converged = true;
            let (mut steps, mut beta_final) = (0, 0.0f64);
            for (g, starts) in groups.iter().enumerate() {
                let run = run_msqite(&h, starts, &pool, &evo, &opts)?;
                if cfg.method == Method::Qite {
                    csv.push_str(&relabel(&run.to_csv(), "qite", g, g > 0));
                } else {
                    csv.push_str(&run.to_csv());
                }
                energies.extend(run.final_energies.iter().copied());
                if let Some(l) = run.steps.last().and_then(|s| s.lanczos_energies.clone()) {
                    lanczos.extend(l.into_iter().take(starts.len()));
                }
                all_converged &= run.converged;
                steps = steps.max(run.steps.len());
                beta_final = beta_final.max(run.steps.last().map(|s| s.beta).unwrap_or(0.0));
                trajectories.push(run);
            }
            let lanczos_final = (!lanczos.is_empty()).then_some(lanczos);
            (energies, all_converged, steps, beta_final, lanczos_final)
        }
        Method::Fsqite => {
            let omega = cfg.omega.expect("validated");
            let mut energies = Vec::new();
            let mut all_converged = true;
            let (mut steps, mut beta_final) = (0, 0.0f64);
            csv.push_str("source,beta,state_index,e_subspace,e_raw,s2_expectation,b_norm,s2_subspace\n");
            for (i, s) in cfg.initial_states.iter().enumerate() {
                let v0 = init_configuration(s, h.n_qubits)?;
                let run = run_fsqite(&v0, &h, omega, &pool, &evo)?;
                for p in &run.points {
                    csv.push_str(&format!(
                        "fsqite,{:.6},{},{:.12e},{:.12e},,{:.6e},\n",
                        p.beta, i, p.energy, p.energy, p.b_norm
                    ));
                }
                energies.push(run.final_energy());
                all_converged &= run.converged;
                steps = steps.max(run.points.len());
                beta_final = beta_final.max(run.points.last().map(|p| p.beta).unwrap_or(0.0));
            }
            (energies, all_converged, steps, beta_final, None)
        }
    };

    let oracle = if cfg.oracle {
        Some(oracle_report(cfg, &h, &final_energies)?)
    } else {
        None
    };

    let summary = RunSummary {
        method: cfg.method,
        mode: cfg.mode,
        n_qubits: h.n_qubits,
        pool_size: pool.len(),
        converged,
        steps,
        beta_final,
        final_energies,
        lanczos_final,
        oracle,
        warnings,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    Ok(RunOutput {
        csv,
        summary,
        trajectories,
    })
}

fn oracle_report(cfg: &RunConfig, h: &HamiltonianBundle, energies: &[f64]) -> Result<OracleReport> {
    let oracle = ReferenceOracle::default();
    let n = energies.len();
    let starts = cfg
        .initial_states
        .iter()
        .map(|s| init_configuration(s, h.n_qubits))
        .collect::<Result<Vec<_>>>()?;
    let sector = cfg.spin_shift.filter(|_| h.n_qubits % 2 == 0);
    let (lowest, driver) = match &sector {
        Some(sec) => {
            let ops = build_spin_operators(h.n_qubits)?;
            let spec = oracle.exact_spectrum(&h.h, Some(&ops.s2))?;
            let lowest = spec.sector(sec.s_squared(), 1e-6).unwrap_or_default();
            (lowest, apply_spin_shift(h, sec, &ops.s2)?.h)
        }
        None => (oracle.exact_spectrum(&h.h, None)?.eigenvalues, h.h.clone()),
    };
    let reference: Vec<f64> = match cfg.method {
        Method::Fsqite => {
            let omega = cfg.omega.expect("validated");
            let all = oracle.exact_spectrum(&h.h, None)?.eigenvalues;
            let closest = all
                .iter()
                .copied()
                .min_by(|a, b| (a - omega).abs().total_cmp(&(b - omega).abs()))
                .unwrap_or(f64::NAN);
            vec![closest; n]
        }
        Method::Qite => starts
            .iter()
            .map(|v| oracle.exact_ite(&driver, std::slice::from_ref(v), ORACLE_LIMIT_BETA).map(|e| e[0]))
            .collect::<Result<_>>()?,
        Method::Msqite => oracle.exact_ite(&driver, &starts, ORACLE_LIMIT_BETA)?,
    };
    let errors: Vec<f64> = energies
        .iter()
        .zip(reference.iter().chain(std::iter::repeat(&f64::NAN)))
        .map(|(e, r)| (e - r).abs())
        .collect();
    let max_error = errors.iter().copied().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(OracleReport {
        lowest: lowest.into_iter().take(n).collect(),
        reference,
        errors,
        max_error,
    })
}

/// Execute and write `<output>.csv` and `<output>.summary.json`.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let out = execute(cfg)?;
    let csv_path = with_suffix(&cfg.output, "csv");
    let json_path = with_suffix(&cfg.output, "summary.json");
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(&csv_path, &out.csv).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;
    let json = serde_json::to_string_pretty(&out.summary).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&json_path, json + "\n").map_err(|source| Error::Io {
        path: json_path.clone(),
        source,
    })?;
    Ok(out.summary)
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::AtStep { source, .. } => exit_code(source),
        Error::Config(_) | Error::Parse { .. } | Error::InvalidParams(_) | Error::Validation(_) => 2,
        Error::Io { .. } => 3,
        Error::CeilingExceeded { .. } => 5,
        _ => 4,
    }
}

/// gnuplot script plotting `e_subspace` against `beta` per state and source.
pub fn plot_script(csv: &str, csv_path: &str, output_png: &str) -> String {
    let mut series: Vec<(String, usize)> = Vec::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            continue;
        }
        let Ok(idx) = cols[2].parse::<usize>() else { continue };
        let key = (cols[0].to_string(), idx);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{output_png}'\n"));
    s.push_str("set xlabel 'beta'\nset ylabel 'energy'\nset key outside right\n");
    let plots: Vec<String> = series
        .iter()
        .map(|(src, idx)| {
            format!(
                "'{csv_path}' using (strcol(1) eq '{src}' && $3 == {idx} ? $2 : 1/0):4 with lines title '{src} {idx}'"
            )
        })
        .collect();
    if plots.is_empty() {
        s.push_str("# no data rows\n");
    } else {
        s.push_str("plot ");
        s.push_str(&plots.join(", \\\n     "));
        s.push('\n');
    }
    s
}
