//! Randomized invariants against dense linear algebra.

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use msqite::lanczos::{script_matrices, single_state_matrices, LanczosConfig};
use msqite::model_space::{lowdin_d, run_msqite_states, subspace_eigensolve, ModelSpace, MsqiteOptions};
use msqite::numerics::CMatrix;
use msqite::operators::HamiltonianBundle;
use msqite::oracle::{dense_matrix, ReferenceOracle};
use msqite::pauli::{multiply, PauliPattern, PauliString, QubitOperator};
use msqite::pool::{build_complete_pool, build_uccgsd_pool, filter_pool, Conservation, Pool};
use msqite::qite::EvolutionConfig;
use msqite::statevector::{apply_pauli, apply_rotation, StateVector};

const N: usize = 3;

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    let mask = (1u64 << n) - 1;
    (any::<u64>(), any::<u64>(), 0u8..4).prop_map(move |(x, z, ph)| {
        PauliString::new(n, PauliPattern::new(x & mask, z & mask), ph).unwrap()
    })
}

fn hermitian_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    pauli(n).prop_map(|s| s.with_phase(0)).prop_filter("hermitian", |s| s.is_hermitian())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("non-zero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let mut s = StateVector::from_amplitudes(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
            s.normalize();
            s
        })
}

fn hamiltonian(n: usize) -> impl Strategy<Value = QubitOperator> {
    terms_to_operator(n, hermitian_pauli(n).boxed())
}

/// Real symmetric: only strings with an even number of Y factors.
fn real_hamiltonian(n: usize) -> impl Strategy<Value = QubitOperator> {
    terms_to_operator(n, hermitian_pauli(n).prop_filter("real", |s| s.pattern().y_count() % 2 == 0).boxed())
}

fn terms_to_operator(n: usize, strings: BoxedStrategy<PauliString>) -> impl Strategy<Value = QubitOperator> {
    prop::collection::vec((strings, -1.0f64..1.0), 1..8).prop_map(move |terms| {
        let mut h = QubitOperator::zero(n);
        for (s, c) in terms {
            h.add_term(s.pattern(), Complex64::new(c, 0.0));
        }
        h
    })
}

fn dense_state(v: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(v.amplitudes())
}

fn pool_patterns(p: &Pool) -> Vec<PauliPattern> {
    p.strings().map(|s| s.pattern()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_dense(p in pauli(N), q in pauli(N)) {
        let pq = multiply(&p, &q).unwrap();
        let lhs = dense_matrix(&QubitOperator::from_string(&pq));
        let rhs = dense_matrix(&QubitOperator::from_string(&p)) * dense_matrix(&QubitOperator::from_string(&q));
        prop_assert!(max_diff(&lhs, &rhs) < 1e-14);
        prop_assert_eq!(p.commutes_with(&q), max_diff(&(&rhs - dense_matrix(&QubitOperator::from_string(&multiply(&q, &p).unwrap()))), &CMatrix::zeros(8, 8)) < 1e-14);
    }

    #[test]
    fn apply_pauli_matches_dense(s in pauli(N), v in state(N)) {
        let got = dense_state(&apply_pauli(&s, &v).unwrap());
        let want = dense_matrix(&QubitOperator::from_string(&s)) * dense_state(&v);
        prop_assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn rotation_is_unitary_and_invertible(s in hermitian_pauli(N), theta in -3.0f64..3.0, v in state(N)) {
        let mut w = v.clone();
        apply_rotation(theta, &s, &mut w).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < 1e-13);
        let dense = dense_matrix(&QubitOperator::from_string(&s));
        let want = dense_state(&v) * Complex64::new(theta.cos(), 0.0)
            - dense * dense_state(&v) * Complex64::new(0.0, theta.sin());
        prop_assert!((dense_state(&w) - want).norm() < 1e-13);
        apply_rotation(-theta, &s, &mut w).unwrap();
        prop_assert!((dense_state(&w) - dense_state(&v)).norm() < 1e-13);
    }

    #[test]
    fn lowdin_d_is_hermitian_inverse_root(h in hamiltonian(N), a in state(N), b in state(N), dbeta in 0.001f64..0.05) {
        let space = ModelSpace::orthonormalized(vec![a, b], &h);
        prop_assume!(space.is_ok());
        let space = space.unwrap();
        let t = lowdin_d(&space, dbeta).unwrap();
        prop_assert!(max_diff(&t.d, &t.d.adjoint()) < 1e-12);
        prop_assert!(max_diff(&(&t.d * &t.s_tilde * &t.d), &CMatrix::identity(2, 2)) < 1e-10);
    }

    #[test]
    fn subspace_and_exact_ite_energies_bound_the_spectrum(
        h in hamiltonian(N),
        states in prop::collection::vec(state(N), 1..4),
        beta in 0.0f64..5.0,
    ) {
        let oracle = ReferenceOracle::default();
        let exact = oracle.exact_spectrum(&h, None).unwrap().eigenvalues;
        let space = ModelSpace::orthonormalized(states.clone(), &h);
        prop_assume!(space.is_ok());
        let sub = subspace_eigensolve(&space.unwrap()).unwrap();
        for (k, e) in sub.energies.iter().enumerate() {
            prop_assert!(*e >= exact[k] - 1e-9, "subspace root {k}: {e} < {}", exact[k]);
        }
        if let Ok(ite) = oracle.exact_ite(&h, &states, beta) {
            for (k, e) in ite.iter().enumerate() {
                prop_assert!(*e >= exact[k] - 1e-9, "exact ite root {k}: {e} < {}", exact[k]);
            }
        }
    }

    #[test]
    fn pool_dump_roundtrip(n in 1usize..4, sz in any::<bool>(), np in any::<bool>()) {
        for pool in [build_complete_pool(n).unwrap(), filter_pool(&build_uccgsd_pool(2 * n).unwrap(), Conservation { sz, particle_number: np })] {
            let back = Pool::parse(&pool.dump(), pool.n_qubits()).unwrap();
            prop_assert_eq!(pool_patterns(&back), pool_patterns(&pool));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// For one state the block construction collapses to norms and energies.
    #[test]
    fn single_state_blocks_match_scalar_formula(
        h in real_hamiltonian(N),
        bits in 0usize..8,
        picks in prop::collection::vec(0usize..5, 1..4),
    ) {
        let bundle = HamiltonianBundle::new(h).unwrap();
        let pool = build_complete_pool(N).unwrap();
        let cfg = EvolutionConfig { beta_max: 1.0, convergence_bnorm: 0.0, ..Default::default() };
        let start = StateVector::basis_state(N, bits).unwrap();
        let opts = MsqiteOptions { lanczos: Some(LanczosConfig::default()), ..Default::default() };
        let run = run_msqite_states(&bundle, vec![start], &pool, &cfg, &opts);
        prop_assume!(run.is_ok());
        let run = run.unwrap();
        prop_assume!(run.records.len() > 8);
        let energies: Vec<f64> = run.steps.iter().map(|s| s.raw_energies[0]).collect();
        // same-parity indices, latest first
        let mut indices: Vec<usize> = picks.iter().map(|k| 8 - 2 * k).collect();
        indices.sort_unstable_by(|a, b| b.cmp(a));
        indices.dedup();
        let m = script_matrices(&run.records, &indices).unwrap();
        let (s, hh) = single_state_matrices(&energies, run.e0, cfg.dbeta, &indices);
        for a in 0..indices.len() {
            for b in 0..indices.len() {
                prop_assert!((m.s[(a, b)] - Complex64::new(s[(a, b)], 0.0)).norm() < 1e-10);
                prop_assert!((m.h[(a, b)] - Complex64::new(hh[(a, b)], 0.0)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn complete_pool_counts() {
    for n in 1..=5 {
        let pool = build_complete_pool(n).unwrap();
        assert_eq!(pool.len(), (4usize.pow(n as u32) - 2usize.pow(n as u32)) / 2, "n = {n}");
        assert!(pool.strings().all(|s| s.is_hermitian() && s.pattern().y_count() % 2 == 1));
    }
}

#[test]
fn filtered_pool_is_subset() {
    let full = build_uccgsd_pool(6).unwrap();
    let all = pool_patterns(&full);
    for (sz, particle_number) in [(true, false), (false, true), (true, true)] {
        let sub = filter_pool(&full, Conservation { sz, particle_number });
        assert!(sub.len() <= full.len());
        assert!(pool_patterns(&sub).iter().all(|p| all.contains(p)));
    }
    let both = filter_pool(&full, Conservation { sz: true, particle_number: true });
    let sz = filter_pool(&full, Conservation { sz: true, particle_number: false });
    assert!(both.len() <= sz.len());
}
