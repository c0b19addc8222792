use approx::assert_relative_eq;
use proptest::prelude::*;
use qdeform::qcore::{
    binomial_weights, poisson_weights, q_exponential, q_factorial, q_number, q_poisson_weights, q_stirling2, stirling2,
};
use qdeform::QError;

proptest! {
    #[test]
    fn q_number_recurrence(n in 0u32..60, q in 0.05f64..3.0) {
        let lhs = q_number(n + 1, q);
        let rhs = 1.0 + q * q_number(n, q);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn q_number_is_continuous_at_one(n in 1u32..40, eps in 1e-11f64..1e-6) {
        let exact = n as f64;
        for q in [1.0 - eps, 1.0 + eps] {
            let tol = 1e-12 * exact + eps * exact * exact;
            prop_assert!((q_number(n, q) - exact).abs() <= tol);
        }
    }

    #[test]
    fn binomial_weights_sum_to_one(j in 0u32..200, p in 0.0f64..=1.0) {
        let w = binomial_weights(j, p).unwrap();
        prop_assert_eq!(w.len(), j as usize + 1);
        prop_assert!((w.total() - 1.0).abs() < 1e-14 * (1.0 + j as f64).sqrt().max(1.0));
        prop_assert!(w.weights().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn q_poisson_is_a_distribution(x in 0.0f64..6.0, q in 0.3f64..2.5) {
        prop_assume!(q >= 1.0 || x < 0.9 / (1.0 - q));
        let w = q_poisson_weights(x, q, 1e-12).unwrap();
        prop_assert!(w.weights().iter().all(|&v| v >= 0.0));
        prop_assert!(w.tail_bound() <= 1e-12);
        prop_assert!((w.total() - 1.0).abs() <= w.tail_bound() + 1e-13);
    }

    #[test]
    fn q_factorial_is_a_log_product(n in 0u32..30, q in 0.2f64..2.0) {
        let direct: f64 = (1..=n).map(|k| q_number(k, q).ln()).sum();
        prop_assert!((q_factorial(n, q).unwrap() - direct).abs() <= 1e-11 * direct.abs().max(1.0));
    }
}

#[test]
fn q_stirling_reduces_to_classical() {
    for s in 0..=8 {
        for m in 0..=8 {
            assert_eq!(q_stirling2(s, m, 1.0).unwrap(), stirling2(s, m), "S({s},{m})");
        }
    }
}

#[test]
fn q_stirling_is_continuous_at_one() {
    for s in 0..=6 {
        for m in 0..=6 {
            let base = stirling2(s, m);
            let near = q_stirling2(s, m, 1.0 + 1e-9).unwrap();
            assert!((near - base).abs() <= 1e-6 * base.max(1.0), "S({s},{m}): {near} vs {base}");
        }
    }
}

#[test]
fn classical_stirling_values() {
    // Arguments are (blocks, set size).
    assert_relative_eq!(stirling2(2, 5), 15.0, max_relative = 1e-12);
    assert_relative_eq!(stirling2(3, 6), 90.0, max_relative = 1e-12);
    assert_relative_eq!(stirling2(7, 7), 1.0, max_relative = 1e-12);
    assert_eq!(stirling2(0, 4), 0.0);
    assert_eq!(stirling2(5, 4), 0.0);
    assert_eq!(stirling2(0, 0), 1.0);
}

#[test]
fn poisson_matches_q_poisson_at_one() {
    let a = poisson_weights(2.5, 1e-13).unwrap();
    let b = q_poisson_weights(2.5, 1.0, 1e-13).unwrap();
    for (x, y) in a.weights().iter().zip(b.weights()) {
        assert_relative_eq!(x, y, max_relative = 1e-13);
    }
    assert_relative_eq!(a.mean(), 2.5, max_relative = 1e-10);
}

#[test]
fn q_exponential_values() {
    assert_relative_eq!(q_exponential(1.0, 1.0).unwrap(), std::f64::consts::E, max_relative = 1e-14);
    // Below q = 1 the series equals an infinite product.
    let q: f64 = 0.5;
    let x: f64 = 0.3;
    let product: f64 = (0..200).map(|k| 1.0 / (1.0 - x * (1.0 - q) * q.powi(k))).product();
    assert_relative_eq!(q_exponential(x, q).unwrap(), product, max_relative = 1e-13);
}

#[test]
fn q_exponential_outside_radius_is_refused() {
    assert!(matches!(q_exponential(2.0, 0.5), Err(QError::Convergence(_))));
    assert!(matches!(q_exponential(1.0, -1.0), Err(QError::Domain(_))));
}
