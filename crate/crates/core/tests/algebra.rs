use num_complex::Complex64;
use proptest::prelude::*;
use qdeform::algebra::{
    self, binomial_power_law_consistency, closure_coeffs, multicommutator_expansion, normal_ordered_operator,
    scaling_phase_check,
};
use qdeform::fock::{self, build_hamiltonian, build_ladder, build_lambda, commutator, interior_relative_error};
use qdeform::{LambdaIndex, ModelParams, QError};

const DIM: usize = 24;

fn iterate(p: &ModelParams, idx: LambdaIndex, depth: u32) -> fock::FockOperator {
    let h = build_hamiltonian(p, DIM).unwrap();
    fock::multicommutator_matrix(&h, &build_lambda(p, idx, DIM).unwrap(), depth).unwrap()
}

#[test]
fn deformed_commutator_diagonal() {
    for q in [0.4, 1.0, 1.7] {
        let omega_q = 1.3;
        let p = ModelParams::q_osc(q, omega_q).unwrap();
        let (a, ad) = build_ladder(&p, DIM).unwrap();
        let c = commutator(&a, &ad).unwrap();
        for j in 0..DIM - 1 {
            let expected = 1.0 + (q - 1.0) * p.energy(j as u32) / omega_q;
            assert!((c.entry(j, j).re - expected).abs() <= 1e-12 * expected.max(1.0), "q={q} j={j}");
        }
        assert!(c.is_diagonal());
    }
}

#[test]
fn harmonic_case_has_a_single_term() {
    let p = ModelParams::anharmonic(3.0, 0.0).unwrap();
    let terms = multicommutator_expansion(&p, 2, 1, 5).unwrap();
    assert_eq!(terms.len(), 1);
    assert!((terms[0].coeff - Complex64::new(6.0f64.powi(5), 0.0)).norm() < 1e-9);
    let literal = iterate(&p, LambdaIndex::new(2, 1), 5);
    let closed = algebra::expansion_operator(&p, LambdaIndex::new(2, 1), &terms, DIM).unwrap();
    assert!(interior_relative_error(&closed, &literal).unwrap() < 1e-12);
}

#[test]
fn binomial_form_needs_q_above_one() {
    let p = ModelParams::q_osc(0.8, 1.0).unwrap();
    assert!(matches!(multicommutator_expansion(&p, 1, 0, 2), Err(QError::Domain(_))));
}

#[test]
fn closure_coefficients_match_first_commutator() {
    let p = ModelParams::anharmonic(4.0, 0.5).unwrap();
    let c = closure_coeffs(&p, 3);
    assert!((c.c_same - (3.0 * 4.0 + 9.0 * 0.5)).abs() < 1e-14);
    assert!((c.c_up - 3.0).abs() < 1e-14);
}

#[test]
fn scaling_check_refuses_n_zero() {
    let p = ModelParams::q_osc(1.2, 1.0).unwrap();
    assert!(scaling_phase_check(&p, LambdaIndex::new(0, 1), 1.0, 0, DIM).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closure_holds(q in 0.3f64..2.5, n in 0u32..4, m in 0u32..4) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        prop_assert!(algebra::closure_residual(&p, LambdaIndex::new(n, m), DIM).unwrap() < 1e-10);
    }

    #[test]
    fn anharmonic_closure_holds(w1 in 0.1f64..20.0, w2 in 0.0f64..3.0, n in 0u32..4, m in 0u32..4) {
        let p = ModelParams::anharmonic(w1, w2).unwrap();
        prop_assert!(algebra::closure_residual(&p, LambdaIndex::new(n, m), DIM).unwrap() < 1e-10);
    }

    #[test]
    fn binomial_expansion_matches_iteration(q in 1.05f64..2.2, n in 0u32..4, m in 0u32..3, depth in 0u32..6) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let idx = LambdaIndex::new(n, m);
        let terms = multicommutator_expansion(&p, n, m, depth).unwrap();
        let closed = algebra::expansion_operator(&p, idx, &terms, DIM).unwrap();
        prop_assert!(interior_relative_error(&closed, &iterate(&p, idx, depth)).unwrap() < 1e-9);
    }

    #[test]
    fn power_law_matches_iteration(q in 0.3f64..2.2, n in 0u32..4, m in 0u32..3, depth in 0u32..6) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let idx = LambdaIndex::new(n, m);
        let closed = algebra::power_law_multicommutator(&p, idx, depth, DIM).unwrap();
        prop_assert!(interior_relative_error(&closed, &iterate(&p, idx, depth)).unwrap() < 1e-9);
    }

    #[test]
    fn binomial_and_power_law_agree(q in 1.05f64..2.5, n in 1u32..5, depth in 0u32..8) {
        prop_assert!(binomial_power_law_consistency(q, 1.0, n, depth, 12).unwrap() < 1e-9);
    }

    #[test]
    fn normal_ordering_reproduces_lambda(q in 0.3f64..2.2, n in 0u32..4, order in 0u32..6) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let lhs = build_lambda(&p, LambdaIndex::new(n, order), DIM).unwrap();
        let rhs = normal_ordered_operator(&p, n, order, DIM).unwrap();
        prop_assert!(interior_relative_error(&rhs, &lhs).unwrap() < 1e-9);
    }

    #[test]
    fn scaling_residual_is_independent_of_indices(q in 1.05f64..2.0, tau in 0.0f64..10.0, j_col in 0usize..4) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let mut residuals = vec![];
        for n in 1..=3 {
            for m in 0..=2 {
                if j_col == 0 && m > 0 {
                    continue;
                }
                residuals.push(scaling_phase_check(&p, LambdaIndex::new(n, m), tau, j_col, DIM).unwrap());
            }
        }
        prop_assert!(residuals.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn evolution_preserves_moduli(q in 0.5f64..2.0, t in -5.0f64..5.0, n in 0u32..3, m in 0u32..3) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let h = build_hamiltonian(&p, DIM).unwrap();
        let o = build_lambda(&p, LambdaIndex::new(n, m), DIM).unwrap();
        let e = fock::heisenberg_evolve(&o, &h, t).unwrap();
        for r in 0..DIM {
            for c in 0..DIM {
                let (a, b) = (o.entry(r, c).norm(), e.entry(r, c).norm());
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }
    }

    #[test]
    fn coherent_state_is_an_eigenstate(q in 0.6f64..1.8, re in -1.2f64..1.2, im in -1.2f64..1.2) {
        let p = ModelParams::q_osc(q, 1.0).unwrap();
        let alpha = Complex64::new(re, im);
        prop_assume!(q >= 1.0 || alpha.norm_sqr() < 0.8 / (1.0 - q));
        let dim = fock::coherent_dimension(&p, alpha, 1e-14, 8).unwrap() + 4;
        let state = fock::coherent_state(&p, alpha, dim, 1e-14).unwrap();
        prop_assert!(state.eigen_residual(&p, alpha) < fock::EIGEN_TOL);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
