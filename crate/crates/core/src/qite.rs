//! Single-state imaginary-time stepping: the `M a + b = 0` system, its
//! regularized solve, and the Trotterized unitary update.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{lstsq_svd, RMatrix, DEFAULT_SVD_CUTOFF};
use crate::operators::{fold_spectrum, HamiltonianBundle};
use crate::pauli::QubitOperator;
use crate::pool::Pool;
use crate::statevector::{apply_operator, apply_pauli, apply_rotation, expectation, inner_slices, StateVector};

/// Default imaginary-time step for QITE and model-space runs (a.u.).
pub const DEFAULT_DBETA: f64 = 0.1;
/// Default imaginary-time step for the folded-spectrum variant (a.u.).
pub const DEFAULT_FSQITE_DBETA: f64 = 0.05;
pub const DEFAULT_CONVERGENCE_BNORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dbeta: f64,
    pub beta_max: f64,
    pub svd_cutoff: f64,
    pub convergence_bnorm: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dbeta: DEFAULT_DBETA,
            beta_max: 10.0,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            convergence_bnorm: DEFAULT_CONVERGENCE_BNORM,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dbeta > 0.0) || !self.dbeta.is_finite() {
            return Err(Error::InvalidParams(format!("dbeta = {} must be > 0", self.dbeta)));
        }
        if !(self.beta_max >= self.dbeta) {
            return Err(Error::InvalidParams(format!(
                "beta_max = {} must be >= dbeta = {}",
                self.beta_max, self.dbeta
            )));
        }
        if !(self.svd_cutoff >= 0.0) || !(self.convergence_bnorm >= 0.0) {
            return Err(Error::InvalidParams("cutoffs must be non-negative".to_string()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `beta_max`.
    pub fn n_steps(&self) -> usize {
        (self.beta_max / self.dbeta - 1e-9).ceil() as usize
    }
}

/// Amplitudes of one step together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub a: DVector<f64>,
    pub residual: f64,
    pub b_norm: f64,
}

/// `σ_μ |v⟩` for every pool string.
pub fn pool_images(v: &StateVector, pool: &Pool) -> Result<Vec<StateVector>> {
    if pool.n_qubits() != v.n_qubits() {
        return Err(Error::Dimension {
            expected: v.n_qubits(),
            found: pool.n_qubits(),
        });
    }
    pool.entries()
        .par_iter()
        .map(|e| apply_pauli(&e.string, v))
        .collect()
}

/// `M_μν = 2 Re⟨σ_μ v|σ_ν v⟩` from precomputed images.
pub fn build_m_from_images(images: &[StateVector]) -> RMatrix {
    let n = images.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|mu| {
            (0..n)
                .map(|nu| {
                    if nu < mu {
                        0.0
                    } else {
                        2.0 * inner_slices(images[mu].amplitudes(), images[nu].amplitudes()).re
                    }
                })
                .collect()
        })
        .collect();
    let mut m = RMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in mu..n {
            m[(mu, nu)] = rows[mu][nu];
            m[(nu, mu)] = rows[mu][nu];
        }
    }
    m
}

pub fn build_m(v: &StateVector, pool: &Pool) -> Result<RMatrix> {
    Ok(build_m_from_images(&pool_images(v, pool)?))
}

/// `b_μ = 2 Im⟨(H - E) v|σ_μ v⟩ = Im⟨v|[H, σ_μ]|v⟩`.
pub fn build_b_from_images(
    v: &StateVector,
    h: &QubitOperator,
    images: &[StateVector],
) -> Result<DVector<f64>> {
    let energy = expectation(h, v)?;
    let mut hv = apply_operator(h, v)?;
    hv.axpy(num_complex::Complex64::new(-energy, 0.0), v)?;
    Ok(DVector::from_iterator(
        images.len(),
        images
            .iter()
            .map(|img| 2.0 * inner_slices(hv.amplitudes(), img.amplitudes()).im),
    ))
}

pub fn build_b_single(v: &StateVector, h: &QubitOperator, pool: &Pool) -> Result<DVector<f64>> {
    build_b_from_images(v, h, &pool_images(v, pool)?)
}

/// `a = argmin ‖M a + b‖` through the truncated pseudo-inverse.
pub fn solve_amplitudes(m: &RMatrix, b: &DVector<f64>, svd_cutoff: f64) -> Result<StepSolution> {
    let b_norm = b.norm();
    if m.nrows() == 0 {
        return Ok(StepSolution {
            a: DVector::zeros(0),
            residual: b_norm,
            b_norm,
        });
    }
    let sol = lstsq_svd(m, &(-b), svd_cutoff)?;
    if sol.x.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSystem);
    }
    Ok(StepSolution {
        a: sol.x,
        residual: sol.residual,
        b_norm,
    })
}

/// Applies `∏_μ e^{-i Δβ a_μ σ_μ}`, the first pool string acting first.
pub fn apply_step(v: &mut StateVector, sol: &StepSolution, pool: &Pool, dbeta: f64) -> Result<()> {
    if sol.a.len() != pool.len() {
        return Err(Error::Dimension {
            expected: pool.len(),
            found: sol.a.len(),
        });
    }
    for (e, &amp) in pool.entries().iter().zip(sol.a.iter()) {
        apply_rotation(dbeta * amp, &e.string, v)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub beta: f64,
    pub energy: f64,
    pub b_norm: f64,
    pub residual: f64,
    /// Expectation of the operator driving the evolution when it differs
    /// from the reported Hamiltonian (folded runs).
    pub driver_energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct QiteRun {
    pub points: Vec<TrajectoryPoint>,
    pub state: StateVector,
    pub converged: bool,
}

impl QiteRun {
    pub fn final_energy(&self) -> f64 {
        self.points.last().map(|p| p.energy).unwrap_or(f64::NAN)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,energy,b_norm,residual,driver_energy\n");
        for p in &self.points {
            let drv = p.driver_energy.map(|e| format!("{e:.12e}")).unwrap_or_default();
            out.push_str(&format!(
                "{:.6},{:.12e},{:.6e},{:.6e},{}\n",
                p.beta, p.energy, p.b_norm, p.residual, drv
            ));
        }
        out
    }
}

fn evolve(
    v0: &StateVector,
    driver: &QubitOperator,
    report: Option<&QubitOperator>,
    pool: &Pool,
    cfg: &EvolutionConfig,
) -> Result<QiteRun> {
    cfg.validate()?;
    let mut v = v0.clone();
    v.normalize();
    let mut points = Vec::new();
    let n_steps = cfg.n_steps();
    let mut converged = false;
    for step in 0..=n_steps {
        let beta = step as f64 * cfg.dbeta;
        let images = pool_images(&v, pool).map_err(|e| e.at_step(beta, 0))?;
        let m = build_m_from_images(&images);
        let b = build_b_from_images(&v, driver, &images).map_err(|e| e.at_step(beta, 0))?;
        let sol = solve_amplitudes(&m, &b, cfg.svd_cutoff).map_err(|e| e.at_step(beta, 0))?;
        let drv_e = expectation(driver, &v)?;
        let (energy, driver_energy) = match report {
            Some(h) => (expectation(h, &v)?, Some(drv_e)),
            None => (drv_e, None),
        };
        points.push(TrajectoryPoint {
            beta,
            energy,
            b_norm: sol.b_norm,
            residual: sol.residual,
            driver_energy,
        });
        if sol.b_norm < cfg.convergence_bnorm {
            converged = true;
            break;
        }
        if step == n_steps {
            break;
        }
        apply_step(&mut v, &sol, pool, cfg.dbeta).map_err(|e| e.at_step(beta, 0))?;
    }
    Ok(QiteRun {
        points,
        state: v,
        converged,
    })
}

/// Plain QITE on `h`.
pub fn run_qite(v0: &StateVector, h: &QubitOperator, pool: &Pool, cfg: &EvolutionConfig) -> Result<QiteRun> {
    evolve(v0, h, None, pool, cfg)
}

/// QITE driven by `(H - omega)^2`; energies are reported for `H`.
pub fn run_fsqite(
    v0: &StateVector,
    h: &HamiltonianBundle,
    omega: f64,
    pool: &Pool,
    cfg: &EvolutionConfig,
) -> Result<QiteRun> {
    let folded = fold_spectrum(h, omega)?;
    evolve(v0, &folded.h, Some(&h.h), pool, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::pool::build_complete_pool;
    use crate::statevector::init_configuration;

    #[test]
    fn m_diagonal_is_two() {
        let pool = build_complete_pool(3).unwrap();
        let v = init_configuration("101", 3).unwrap();
        let m = build_m(&v, &pool).unwrap();
        for i in 0..pool.len() {
            assert!((m[(i, i)] - 2.0).abs() < 1e-14);
        }
        assert!((&m - m.transpose()).amax() == 0.0);
    }

    #[test]
    fn b_vanishes_on_eigenstate() {
        let h = QubitOperator::from_string(&PauliString::parse(2, "Z0").unwrap());
        let v = init_configuration("01", 2).unwrap();
        let b = build_b_single(&v, &h, &build_complete_pool(2).unwrap()).unwrap();
        assert!(b.norm() < 1e-14);
    }

    #[test]
    fn solve_scales_linearly() {
        let m = RMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]);
        let b = DVector::from_vec(vec![0.3, -0.1]);
        let a1 = solve_amplitudes(&m, &b, 1e-8).unwrap().a;
        let a3 = solve_amplitudes(&m, &(&b * 3.0), 1e-8).unwrap().a;
        assert!((a3 - a1 * 3.0).norm() < 1e-14);
    }

    #[test]
    fn zero_amplitudes_leave_state() {
        let pool = build_complete_pool(2).unwrap();
        let mut v = init_configuration("10", 2).unwrap();
        let before = v.clone();
        let sol = StepSolution {
            a: DVector::zeros(pool.len()),
            residual: 0.0,
            b_norm: 0.0,
        };
        apply_step(&mut v, &sol, &pool, 0.1).unwrap();
        assert_eq!(v, before);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EvolutionConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.dbeta = 0.0;
        assert!(cfg.validate().is_err());
        cfg.dbeta = 1.0;
        cfg.beta_max = 0.5;
        assert!(cfg.validate().is_err());
        let cfg = EvolutionConfig { beta_max: 1.0, dbeta: 0.1, ..Default::default() };
        assert_eq!(cfg.n_steps(), 10);
    }
}
