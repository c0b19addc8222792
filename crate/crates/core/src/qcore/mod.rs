//! q-arithmetic: q-numbers, q-factorials, the q-exponential, q-Stirling
//! numbers of the second kind and the probability weights built from them.
//!
//! Everything factorial-like is kept in log space. Probability weights are
//! generated by term-ratio recursion so that `[k]_q!`, which grows like
//! `q^{k^2/2}` for `q > 1`, never has to be formed explicitly.

mod stirling;
mod weights;

pub use stirling::{q_stirling2, stirling2, StirlingTable};
pub use weights::{
    binomial_weights, poisson_weights, q_poisson_moment_weights, q_poisson_weights, MomentWeights,
    WeightDistribution, WeightKind,
};

use crate::error::{QError, Result};

/// Below this distance from `q = 1` the q-number is evaluated as the
/// polynomial `1 + q + ... + q^{n-1}` instead of a quotient.
pub const Q_ONE_BAND: f64 = 1e-8;

/// Default tail tolerance for every truncated series.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative tail bound at which [`q_exponential`] stops.
const EXP_Q_TAIL: f64 = 1e-14;

const MAX_SERIES_TERMS: usize = 1 << 20;

pub(crate) fn near_one(q: f64) -> bool {
    (q - 1.0).abs() < Q_ONE_BAND
}

pub(crate) fn require_positive_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(QError::Domain(format!("q must be positive and finite, got {q}")))
    }
}

/// The q-number `[n]_q = (q^n - 1)/(q - 1)`.
///
/// Any real `q` is accepted. At `q = 1` (and within [`Q_ONE_BAND`] of it) the
/// geometric sum is evaluated directly, which is the removable-singularity
/// limit `n`.
pub fn q_number(n: u32, q: f64) -> f64 {
    match n {
        0 => return 0.0,
        1 => return 1.0,
        _ => {}
    }
    if near_one(q) {
        // Horner form of sum_{k<n} q^k.
        return (0..n).fold(0.0, |acc, _| acc * q + 1.0);
    }
    if q > 0.0 {
        let lq = q.ln();
        (n as f64 * lq).exp_m1() / lq.exp_m1()
    } else {
        let qn = if n <= i32::MAX as u32 { q.powi(n as i32) } else { q.powf(n as f64) };
        (qn - 1.0) / (q - 1.0)
    }
}

/// `ln [n]_q` for `q > 0` and `n >= 1`, finite even where `[n]_q` overflows.
pub(crate) fn ln_q_number(n: u32, q: f64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    if near_one(q) {
        return q_number(n, q).ln();
    }
    let lq = q.ln();
    let nl = n as f64 * lq;
    if q > 1.0 {
        nl + (-(-nl).exp_m1()).ln() - lq.exp_m1().ln()
    } else {
        (-nl.exp_m1()).ln() - (-lq.exp_m1()).ln()
    }
}

/// `ln([n]_q!)`, accumulated as a sum of logarithms.
pub fn q_factorial(n: u32, q: f64) -> Result<f64> {
    require_positive_q(q)?;
    Ok((1..=n).map(|k| ln_q_number(k, q)).sum())
}

/// `[n]_q!` as a plain double. Overflows to infinity for large arguments;
/// callers that care use [`q_factorial`].
pub(crate) fn q_factorial_value(n: u32, q: f64) -> f64 {
    (1..=n).map(|k| q_number(k, q)).product()
}

/// Radius of convergence of `exp_q`: infinite for `q >= 1`, `1/(1-q)` below.
pub fn exp_q_radius(q: f64) -> f64 {
    if q >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - q)
    }
}

pub(crate) fn check_radius(x: f64, q: f64) -> Result<()> {
    let radius = exp_q_radius(q);
    if x.abs() < radius {
        Ok(())
    } else {
        Err(QError::Convergence(format!(
            "|x| = {} is outside the radius 1/(1-q) = {radius} of exp_q at q = {q}",
            x.abs()
        )))
    }
}

/// The q-exponential `exp_q(x) = sum_k x^k / [k]_q!`.
///
/// Terms follow `t_{k+1} = t_k * x / [k+1]_q`. Summation stops once the
/// geometric tail bound `|t_{k+1}| / (1 - |x|/[k+2]_q)` drops below
/// `1e-14` of the accumulated absolute sum. The term ratios are
/// nonincreasing in `k`, so the bound is rigorous once it is below one.
pub fn q_exponential(x: f64, q: f64) -> Result<f64> {
    require_positive_q(q)?;
    if !x.is_finite() {
        return Err(QError::Domain(format!("x must be finite, got {x}")));
    }
    check_radius(x, q)?;
    if x == 0.0 {
        return Ok(1.0);
    }

    let mut term = 1.0_f64;
    let mut sum = Neumaier::default();
    let mut abs_sum = 0.0;
    for k in 0..MAX_SERIES_TERMS as u32 {
        sum.add(term);
        abs_sum += term.abs();
        let next = term * x / q_number(k + 1, q);
        let ratio = x.abs() / q_number(k + 2, q);
        if ratio < 1.0 {
            let tail = next.abs() / (1.0 - ratio);
            if tail <= EXP_Q_TAIL * abs_sum {
                sum.add(next);
                return Ok(sum.total());
            }
        }
        term = next;
    }
    Err(QError::Convergence(format!(
        "exp_q({x}) at q = {q} did not converge in {MAX_SERIES_TERMS} terms"
    )))
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: the geometric sum written out term by term.
    fn geometric(n: u32, q: f64) -> f64 {
        (0..n).map(|k| q.powi(k as i32)).sum()
    }

    #[test]
    fn q_number_examples() {
        assert_eq!(q_number(0, 2.0), 0.0);
        assert_eq!(q_number(5, 1.0), 5.0);
        assert_relative_eq!(q_number(3, 2.0), 7.0, max_relative = 1e-14);
        assert_relative_eq!(q_number(4, 0.5), 1.875, max_relative = 1e-14);
        assert_eq!(q_number(1, -3.7), 1.0);
        assert_eq!(q_number(0, -3.7), 0.0);
    }

    #[test]
    fn q_number_accepts_nonpositive_q() {
        assert_relative_eq!(q_number(3, -2.0), geometric(3, -2.0), max_relative = 1e-14);
        assert_eq!(q_number(4, 0.0), 1.0);
    }

    #[test]
    fn q_number_continuous_at_one() {
        for n in 1..=50 {
            for q in [1.0 + 1e-9, 1.0 - 1e-9, 1.0 + 2e-8, 1.0 - 2e-8] {
                let v = q_number(n, q);
                assert!((v - n as f64).abs() < 1e-6 * n as f64, "n={n} q={q} v={v}");
            }
        }
    }

    #[test]
    fn ln_q_number_survives_overflow() {
        let v = ln_q_number(2000, 2.0);
        assert_relative_eq!(v, 2000.0 * 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_q_number(7, 1.3), q_number(7, 1.3).ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_q_number(7, 0.3), q_number(7, 0.3).ln(), max_relative = 1e-13);
    }

    #[test]
    fn q_factorial_examples() {
        assert_eq!(q_factorial(0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(q_factorial(3, 2.0).unwrap(), 21f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(q_factorial(4, 1.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert!(q_factorial(60, 2.0).unwrap().is_finite());
        assert!(matches!(q_factorial(3, 0.0), Err(QError::Domain(_))));
        assert!(matches!(q_factorial(3, -1.0), Err(QError::Domain(_))));
    }

    #[test]
    fn q_exponential_examples() {
        assert_eq!(q_exponential(0.0, 0.7).unwrap(), 1.0);
        assert_relative_eq!(q_exponential(1.0, 1.0).unwrap(), std::f64::consts::E, max_relative = 1e-14);
        // 40-digit partial sum computed offline.
        assert_relative_eq!(q_exponential(1.0, 0.5).unwrap(), 3.462746619455064, max_relative = 1e-13);
        assert_relative_eq!(q_exponential(-2.0, 1.0).unwrap(), (-2f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn q_exponential_radius() {
        assert!(matches!(q_exponential(2.0, 0.5), Err(QError::Convergence(_))));
        assert!(matches!(q_exponential(-2.5, 0.5), Err(QError::Convergence(_))));
        assert!(q_exponential(1.99, 0.5).is_ok());
        assert!(matches!(q_exponential(1.0, 0.0), Err(QError::Domain(_))));
    }

    proptest! {
        #[test]
        fn q_number_recurrence(n in 1u32..60, q in 0.05f64..3.0) {
            let lhs = q_number(n, q);
            let rhs = q_number(n - 1, q) * q + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn q_number_matches_geometric_sum(n in 0u32..40, q in 0.05f64..2.5) {
            let a = q_number(n, q);
            let b = geometric(n, q);
            prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }
}
