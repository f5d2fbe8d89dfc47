mod common;

use common::*;
use msqite::lanczos::{block, LanczosConfig};
use msqite::model_space::{run_msqite, MsqiteOptions, StepOptions, Mode, ModelSpace};
use msqite::numerics::CMatrix;
use msqite::operators::{parse_hamiltonian_str, ModelSpec};
use msqite::oracle::ReferenceOracle;
use msqite::pool::{build_complete_pool, build_uccgsd_pool};
use msqite::qite::{run_fsqite, run_qite, EvolutionConfig};
use msqite::statevector::{apply_operator, init_configuration, StateVector};
use msqite::Error;

#[test]
fn qite_one_qubit() {
    let h = parse_hamiltonian_str("qubits 1\n1.0 0.0 Z0\n1.0 0.0 X0\n", "x+z").unwrap();
    let pool = build_complete_pool(1).unwrap();
    let v = init_configuration("0", 1).unwrap();
    let run = run_qite(&v, &h.h, &pool, &EvolutionConfig::default()).unwrap();
    assert!(run.converged);
    assert!((run.final_energy() + 2f64.sqrt()).abs() < 1e-8);
    // energies never increase
    for w in run.points.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12);
    }
}

#[test]
fn eigenstate_start_is_stationary() {
    let h = parse_hamiltonian_str("qubits 1\n1.0 0.0 Z0\n", "z").unwrap();
    let pool = build_complete_pool(1).unwrap();
    let up = run_qite(&init_configuration("0", 1).unwrap(), &h.h, &pool, &EvolutionConfig::default()).unwrap();
    assert!(up.converged && up.points.len() == 1 && up.final_energy() == 1.0);
    let down = run_qite(&init_configuration("1", 1).unwrap(), &h.h, &pool, &EvolutionConfig::default()).unwrap();
    assert_eq!(down.final_energy(), -1.0);
}

#[test]
fn single_state_model_space_is_qite() {
    let h = tfim(3);
    let pool = build_complete_pool(3).unwrap();
    let cfg = EvolutionConfig { beta_max: 3.0, ..Default::default() };
    let q = run_qite(&init_configuration("101", 3).unwrap(), &h.h, &pool, &cfg).unwrap();
    let m = run_msqite(&h, &strings(&["101"]), &pool, &cfg, &MsqiteOptions::default()).unwrap();
    // identical algebra, so the trajectories agree to roundoff
    assert_eq!(q.points.len(), m.steps.len());
    for (p, s) in q.points.iter().zip(&m.steps) {
        assert!((p.energy - s.subspace_energies[0]).abs() < 1e-10, "beta {}", p.beta);
        assert!((p.b_norm - s.b_norms[0]).abs() < 1e-10, "beta {}", p.beta);
    }
    let cfg = EvolutionConfig { beta_max: 20.0, ..Default::default() };
    let q = run_qite(&init_configuration("101", 3).unwrap(), &h.h, &pool, &cfg).unwrap();
    let m = run_msqite(&h, &strings(&["101"]), &pool, &cfg, &MsqiteOptions::default()).unwrap();
    assert!((q.final_energy() - m.final_energies[0]).abs() < 1e-8);
}

#[test]
fn folded_spectrum_targets_nearest_eigenvalue() {
    let h = model(&ModelSpec::HeisenbergChain { sites: 3, j: 1.0, hz: 0.3, periodic: false });
    let pool = build_complete_pool(3).unwrap();
    let spec = ReferenceOracle::default().exact_spectrum(&h.h, None).unwrap().eigenvalues;
    let cfg = EvolutionConfig { dbeta: 0.05, beta_max: 40.0, ..Default::default() };
    // "101" overlaps only two eigenstates (E = -1.15 and 0.35); aim at the upper one
    let omega = 0.3;
    let run = run_fsqite(&init_configuration("101", 3).unwrap(), &h, omega, &pool, &cfg).unwrap();
    let nearest = spec
        .iter()
        .copied()
        .min_by(|a, b| (a - omega).abs().total_cmp(&(b - omega).abs()))
        .unwrap();
    assert!((run.final_energy() - nearest).abs() < 1e-4, "{} vs {nearest}", run.final_energy());
    assert!(run.points.windows(2).all(|w| w[1].driver_energy <= w[0].driver_energy.map(|e| e + 1e-10)));
}

fn gram(a: &[StateVector], b: &[StateVector]) -> CMatrix {
    CMatrix::from_fn(a.len(), b.len(), |i, j| a[i].inner(&b[j]).unwrap())
}

#[test]
fn archive_blocks_match_brute_force_overlaps() {
    let oracle = ReferenceOracle::default();
    for (h, starts) in [(tfim(3), ["101", "010"]), (dimer(4.0, 2.0), ["0011", "0110"])] {
        let vs: Vec<StateVector> = starts.iter().map(|s| init_configuration(s, h.n_qubits).unwrap()).collect();
        let start = ModelSpace::orthonormalized(vs, &h.h).unwrap();
        let (spaces, records) = oracle.exact_archive(&h.h, start, 0.1, 12).unwrap();
        let e0 = records[0].e0;
        let scaled = |l: usize| -> Vec<StateVector> {
            // the blocks describe e^{-lΔβ(H-E0)}-consistent vectors, which are the stored states
            spaces[l].states.clone()
        };
        let mut worst: f64 = 0.0;
        for l in 0..=12 {
            for lp in (l % 2..=12).step_by(2) {
                let (s, hb) = block(&records, l, lp).unwrap();
                let a = scaled(l);
                let b = scaled(lp);
                let hb_ref = {
                    let hs: Vec<StateVector> = b.iter().map(|v| apply_operator(&h.h, v).unwrap()).collect();
                    gram(&a, &hs)
                };
                worst = worst.max((s - gram(&a, &b)).iter().map(|z| z.norm()).fold(0.0, f64::max));
                worst = worst.max((hb - hb_ref).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        assert!(worst < 1e-8, "archive reconstruction off by {worst:.2e} (E0 = {e0})");
    }
}

#[test]
fn exact_archive_lanczos_is_variational() {
    let oracle = ReferenceOracle::default();
    let cfg = LanczosConfig::default();
    for (h, starts) in [(tfim(3), vec!["101", "010"]), (dimer(4.0, 2.0), vec!["0011"])] {
        let exact = oracle.exact_spectrum(&h.h, None).unwrap().eigenvalues;
        let vs: Vec<StateVector> = starts.iter().map(|s| init_configuration(s, h.n_qubits).unwrap()).collect();
        let start = ModelSpace::orthonormalized(vs, &h.h).unwrap();
        let (spaces, records) = oracle.exact_archive(&h.h, start, 0.1, 20).unwrap();
        for step in 0..=20 {
            let l = msqite::lanczos::lanczos_energies(&records[..=step], &cfg).unwrap();
            let sub = msqite::model_space::subspace_eigensolve(&spaces[step]).unwrap();
            assert!(l.energies[0] <= sub.energies[0] + 1e-9, "step {step}");
            assert!(l.energies[0] >= exact[0] - 1e-9, "step {step}");
        }
    }
}

/// With the simulated (first-order) archive the estimate stays below the
/// single-state energy; multi-state runs are only checked loosely.
#[test]
fn lanczos_never_above_subspace_energy() {
    let lanczos = MsqiteOptions { lanczos: Some(LanczosConfig::default()), ..Default::default() };
    for (h, starts, tol) in [
        (dimer(4.0, 2.0), strings(&["0011"]), 1e-9),
        (dimer(3.0, 2.0), strings(&["0011"]), 1e-9),
        (tfim(3), strings(&["101"]), 1e-9),
        (tfim(3), strings(&["101", "010"]), 1e-3),
    ] {
        let pool = build_complete_pool(h.n_qubits).unwrap();
        let cfg = EvolutionConfig { beta_max: 4.0, ..Default::default() };
        let r = run_msqite(&h, &starts, &pool, &cfg, &lanczos).unwrap();
        for s in &r.steps {
            let l = s.lanczos_energies.as_ref().unwrap();
            assert!(l[0] <= s.subspace_energies[0] + tol, "beta {}: {} > {}", s.beta, l[0], s.subspace_energies[0]);
        }
    }
}

#[test]
fn drift_beyond_limit_is_reported() {
    let h = tfim(3);
    let pool = build_complete_pool(3).unwrap();
    let cfg = EvolutionConfig { beta_max: 10.0, convergence_bnorm: 0.0, ..Default::default() };
    let opts = MsqiteOptions {
        step: StepOptions { mode: Mode::StateSpecific, orthogonality_term: false, overlap_limit: Some(0.1) },
        ..Default::default()
    };
    match run_msqite(&h, &strings(&["101", "010"]), &pool, &cfg, &opts) {
        Err(Error::AtStep { source, beta, .. }) => {
            assert!(matches!(*source, Error::OrthogonalityLost { .. }));
            assert!(beta > 0.0);
        }
        other => panic!("expected an orthogonality failure, got {:?}", other.map(|r| r.final_energies)),
    }
}

#[test]
fn oversized_step_is_rejected() {
    let h = dimer(8.0, 2.0);
    let pool = build_uccgsd_pool(4).unwrap();
    let cfg = EvolutionConfig { dbeta: 1.0, beta_max: 2.0, ..Default::default() };
    let err = run_msqite(&h, &strings(&["0011", "1100"]), &pool, &cfg, &MsqiteOptions::default()).unwrap_err();
    let inner = match err {
        Error::AtStep { source, .. } => *source,
        e => e,
    };
    assert!(matches!(inner, Error::StepSize { .. }), "{inner}");
}

#[test]
fn state_averaged_keeps_exact_orthonormality() {
    let h = tfim(3);
    let pool = build_complete_pool(3).unwrap();
    let cfg = EvolutionConfig { beta_max: 5.0, ..Default::default() };
    let opts = MsqiteOptions { step: StepOptions::with_mode(Mode::StateAveraged), ..Default::default() };
    let r = run_msqite(&h, &strings(&["101", "010", "011"]), &pool, &cfg, &opts).unwrap();
    for s in &r.steps {
        let dev = (&s.s_mat - CMatrix::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "beta {}: {dev:e}", s.beta);
    }
}
