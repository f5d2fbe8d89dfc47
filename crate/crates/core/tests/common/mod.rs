#![allow(dead_code)]

use msqite::operators::{build_model, HamiltonianBundle, ModelSpec, NumberPenalty};
use msqite::statevector::StateVector;

/// Built-in systems on at most four qubits used across the suites.
pub fn bundled_systems() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("heis2", ModelSpec::HeisenbergChain { sites: 2, j: 1.0, hz: 0.0, periodic: false }),
        ("heis3", ModelSpec::HeisenbergChain { sites: 3, j: 1.0, hz: 0.3, periodic: false }),
        ("heis4", ModelSpec::HeisenbergChain { sites: 4, j: 1.0, hz: 0.0, periodic: false }),
        ("tfim2", ModelSpec::TransverseIsing { sites: 2, j: 1.0, g: 1.0, h: 0.5, periodic: false }),
        ("tfim3", ModelSpec::TransverseIsing { sites: 3, j: 1.0, g: 1.0, h: 0.5, periodic: false }),
        ("tfim4", ModelSpec::TransverseIsing { sites: 4, j: 1.0, g: 1.0, h: 0.5, periodic: false }),
        (
            "hubbard2",
            ModelSpec::HubbardJw {
                sites: 2,
                t: 1.0,
                u: 2.0,
                mu: 0.0,
                periodic: false,
                penalty: Some(NumberPenalty { electrons: 2, weight: 2.0 }),
            },
        ),
        (
            "dimer-mo",
            ModelSpec::HubbardDimerMo {
                t: 1.0,
                u: 4.0,
                penalty: Some(NumberPenalty { electrons: 2, weight: 2.0 }),
            },
        ),
    ]
}

pub fn model(spec: &ModelSpec) -> HamiltonianBundle {
    build_model(spec).expect("valid model")
}

pub fn dimer(u: f64, weight: f64) -> HamiltonianBundle {
    model(&ModelSpec::HubbardDimerMo {
        t: 1.0,
        u,
        penalty: Some(NumberPenalty { electrons: 2, weight }),
    })
}

pub fn tfim(sites: usize) -> HamiltonianBundle {
    model(&ModelSpec::TransverseIsing { sites, j: 1.0, g: 1.0, h: 0.5, periodic: false })
}

pub fn strings(bits: &[&str]) -> Vec<String> {
    bits.iter().map(|s| s.to_string()).collect()
}

/// `1 - |⟨a|b⟩|` for normalized states.
pub fn infidelity(a: &StateVector, b: &StateVector) -> f64 {
    1.0 - a.inner(b).unwrap().norm()
}
