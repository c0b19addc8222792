use serde::Serialize;

use super::{check_radius, ln_q_number, require_positive_q, Neumaier, MAX_SERIES_TERMS};
use crate::error::{QError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Binomial,
    Poisson,
    QPoisson,
}

/// A normalized, nonnegative weight sequence indexed by `k = 0, 1, ...`.
///
/// For the truncated kinds `tail_bound` is a certified upper bound on the
/// probability mass dropped beyond the last stored index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightDistribution {
    kind: WeightKind,
    weights: Vec<f64>,
    tail_bound: f64,
}

impl WeightDistribution {
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mean of the index `k`.
    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(k, w)| k as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| (k as f64 - mean).powi(2) * w)
            .sum()
    }
}

/// Binomial weights `B(j, k, p) = C(j, k) p^{j-k} (1-p)^k` for `k = 0..=j`.
///
/// `p` sits on the `j - k` power, so the mean of `k` is `j (1 - p)`.
pub fn binomial_weights(j: u32, p: f64) -> Result<WeightDistribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QError::Domain(format!("binomial parameter must lie in [0, 1], got {p}")));
    }
    let jf = f64::from(j);
    let weights: Vec<f64> = if j <= 1000 {
        let mut binom = 1.0_f64;
        (0..=j)
            .map(|k| {
                let w = binom * p.powi((j - k) as i32) * (1.0 - p).powi(k as i32);
                binom = binom * (jf - f64::from(k)) / f64::from(k + 1);
                w
            })
            .collect()
    } else {
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let mut ln_binom = 0.0_f64;
        (0..=j)
            .map(|k| {
                let kf = f64::from(k);
                let a = if j == k { 0.0 } else { (jf - kf) * lp };
                let b = if k == 0 { 0.0 } else { kf * lq };
                let w = (ln_binom + a + b).exp();
                ln_binom += (jf - kf).ln() - (kf + 1.0).ln();
                w
            })
            .collect()
    };
    // The exact total is 1; dividing out the computed total removes the
    // rounding drift of the coefficient recurrence.
    let total = weights.iter().copied().collect::<Neumaier>().total();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Ok(WeightDistribution { kind: WeightKind::Binomial, weights, tail_bound: 0.0 })
}

/// q-Poisson weights `|alpha|^{2k} / ([k]_q! exp_q(|alpha|^2))`.
///
/// Built by the ratio recursion `w_{k+1} = w_k alpha_sq / [k+1]_q` in log
/// space and truncated once the certified geometric tail falls below `tol`.
/// The normalizer is the fully converged `exp_q(|alpha|^2)`, so the retained
/// weights sum to at least `1 - tail_bound`.
pub fn q_poisson_weights(alpha_sq: f64, q: f64, tol: f64) -> Result<WeightDistribution> {
    Ok(q_poisson_moment_weights(alpha_sq, q, tol, 0)?.distribution)
}

/// Classical Poisson weights `|alpha|^{2k} e^{-|alpha|^2} / k!`, the `q = 1`
/// member of the q-Poisson family.
pub fn poisson_weights(alpha_sq: f64, tol: f64) -> Result<WeightDistribution> {
    let mut dist = q_poisson_moment_weights(alpha_sq, 1.0, tol, 0)?.distribution;
    dist.kind = WeightKind::Poisson;
    Ok(dist)
}

/// q-Poisson weights together with the moment-weighted sequence
/// `[k]_q^m P_q(alpha, k)`, truncated so that both the plain tail and the
/// `[k]_q^m`-weighted tail are below `tol` (relative).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentWeights {
    pub distribution: WeightDistribution,
    pub order: u32,
    /// `[k]_q^m P_q(alpha, k)` for each retained `k`.
    pub moment_weights: Vec<f64>,
    /// Certified relative bound on the dropped part of `sum_k [k]_q^m P_q`.
    pub moment_tail: f64,
}

impl MomentWeights {
    /// `sum_k [k]_q^m P_q(alpha, k)` over the retained range.
    pub fn moment(&self) -> f64 {
        if self.order == 0 {
            1.0
        } else {
            self.moment_weights.iter().sum()
        }
    }
}

/// Relative tail at which the normalizing sum is considered converged.
const NORMALIZER_TAIL: f64 = 1e-17;

/// Running `ln(sum exp(l_i))`.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    reference: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        Self { reference: f64::NEG_INFINITY, scaled: 0.0 }
    }

    fn add(&mut self, l: f64) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if l > self.reference {
            self.scaled = self.scaled * (self.reference - l).exp() + 1.0;
            self.reference = l;
        } else {
            self.scaled += (l - self.reference).exp();
        }
    }

    fn value(&self) -> f64 {
        self.reference + self.scaled.ln()
    }
}

/// Relative tail of a positive series whose term ratios are nonincreasing
/// from index `k + 1` on, given the log terms at `k + 1` and `k + 2`.
fn relative_tail(l_next: f64, l_after: f64, log_sum: f64) -> Option<f64> {
    if l_next == f64::NEG_INFINITY {
        return Some(0.0);
    }
    let ratio = (l_after - l_next).exp();
    (ratio < 1.0).then(|| (l_next - (-ratio).ln_1p() - log_sum).exp())
}

pub fn q_poisson_moment_weights(alpha_sq: f64, q: f64, tol: f64, order: u32) -> Result<MomentWeights> {
    require_positive_q(q)?;
    if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) {
        return Err(QError::Domain(format!("|alpha|^2 must be finite and nonnegative, got {alpha_sq}")));
    }
    if !(tol > 0.0) {
        return Err(QError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    check_radius(alpha_sq, q)?;

    if alpha_sq == 0.0 {
        let distribution = WeightDistribution { kind: WeightKind::QPoisson, weights: vec![1.0], tail_bound: 0.0 };
        let moment_weights = vec![if order == 0 { 1.0 } else { 0.0 }];
        return Ok(MomentWeights { distribution, order, moment_weights, moment_tail: 0.0 });
    }

    let ln_x = alpha_sq.ln();
    let m = f64::from(order);
    let moment_log = |k: usize, lw: f64| {
        if order == 0 {
            lw
        } else if k == 0 {
            f64::NEG_INFINITY
        } else {
            lw + m * ln_q_number(k as u32, q)
        }
    };

    // log of x^k / [k]_q!
    let mut log_w: Vec<f64> = vec![0.0];
    let mut sum_w = LogSum::new();
    let mut sum_m = LogSum::new();
    // (retained length, weight tail, moment tail) once certified against `tol`
    let mut cut: Option<(usize, f64, f64)> = None;

    for k in 0..MAX_SERIES_TERMS {
        let lw = log_w[k];
        sum_w.add(lw);
        sum_m.add(moment_log(k, lw));

        let l1 = lw + ln_x - ln_q_number(k as u32 + 1, q);
        let l2 = l1 + ln_x - ln_q_number(k as u32 + 2, q);
        let tail_w = relative_tail(l1, l2, sum_w.value());
        let tail_m = if order == 0 {
            tail_w
        } else if sum_m.value() == f64::NEG_INFINITY {
            None
        } else {
            relative_tail(moment_log(k + 1, l1), moment_log(k + 2, l2), sum_m.value())
        };

        match (cut, tail_w, tail_m) {
            (None, Some(tw), Some(tm)) if tw < tol && tm < tol => {
                cut = Some((k + 1, tw, tm));
                if tw < NORMALIZER_TAIL {
                    break;
                }
            }
            // Keep summing past the cut so the normalizer is exp_q(x) to
            // working precision.
            (Some(_), Some(tw), _) if tw < NORMALIZER_TAIL => break,
            _ => {}
        }
        log_w.push(l1);
    }

    let Some((len, tail_bound, moment_tail)) = cut else {
        return Err(QError::Truncation(format!(
            "q-Poisson tail for |alpha|^2 = {alpha_sq}, q = {q} not below {tol} within {MAX_SERIES_TERMS} terms"
        )));
    };
    let norm = sum_w.value();
    let weights = log_w[..len].iter().map(|l| (l - norm).exp()).collect();
    let moment_weights = log_w[..len]
        .iter()
        .enumerate()
        .map(|(i, &l)| (moment_log(i, l) - norm).exp())
        .collect();
    let distribution = WeightDistribution { kind: WeightKind::QPoisson, weights, tail_bound };
    Ok(MomentWeights { distribution, order, moment_weights, moment_tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{q_exponential, q_factorial, q_number};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_weights(0, 0.3).unwrap().weights(), &[1.0]);
        assert_eq!(binomial_weights(2, 0.5).unwrap().weights(), &[0.25, 0.5, 0.25]);
        let b = binomial_weights(10, 0.3).unwrap();
        assert_relative_eq!(b.mean(), 10.0 * 0.7, max_relative = 1e-13);
        assert_relative_eq!(b.variance(), 10.0 * 0.3 * 0.7, max_relative = 1e-13);
        assert_eq!(binomial_weights(3, 1.0).unwrap().weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(binomial_weights(3, 0.0).unwrap().weights(), &[0.0, 0.0, 0.0, 1.0]);
        assert!(binomial_weights(3, 1.5).is_err());
        assert!(binomial_weights(3, f64::NAN).is_err());
    }

    #[test]
    fn binomial_large_j_uses_logs() {
        let b = binomial_weights(2000, 0.4).unwrap();
        assert!((b.total() - 1.0).abs() < 1e-12);
        assert_relative_eq!(b.mean(), 1200.0, max_relative = 1e-10);
    }

    #[test]
    fn q_poisson_vacuum() {
        let d = q_poisson_weights(0.0, 1.3, 1e-12).unwrap();
        assert_eq!(d.weights(), &[1.0]);
        assert_eq!(d.tail_bound(), 0.0);
    }

    #[test]
    fn q_poisson_at_one_is_poisson() {
        let d = q_poisson_weights(0.64, 1.0, 1e-12).unwrap();
        let mut fact = 1.0;
        for (k, w) in d.weights().iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let want = (-0.64f64).exp() * 0.64f64.powi(k as i32) / fact;
            assert!((w - want).abs() < 1e-13, "k={k}");
        }
        let p = poisson_weights(0.64, 1e-12).unwrap();
        assert_eq!(p.kind(), WeightKind::Poisson);
        for (a, b) in p.weights().iter().zip(d.weights()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn poisson_closed_form() {
        let p = poisson_weights(1.0, 1e-12).unwrap();
        assert_relative_eq!(p.weights()[0], (-1f64).exp(), max_relative = 1e-11);
        assert_eq!(poisson_weights(0.0, 1e-12).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn q_poisson_matches_direct_log_evaluation() {
        // Oracle: |a|^{2k} / ([k]_q! exp_q(|a|^2)) term by term.
        let (x, q) = (0.64, 1.2);
        let z = q_exponential(x, q).unwrap();
        let d = q_poisson_weights(x, q, 1e-12).unwrap();
        for (k, w) in d.weights().iter().enumerate() {
            let want = (k as f64 * x.ln() - q_factorial(k as u32, q).unwrap()).exp() / z;
            assert!((w - want).abs() < 1e-13 * want.max(1e-300) + 1e-16, "k={k}: {w} vs {want}");
        }
        // 40-digit values computed offline.
        let frozen = [0.5367172705603824, 0.3434990531586447, 0.09992699728251483, 0.017569581939782826];
        for (w, f) in d.weights().iter().zip(frozen) {
            assert_relative_eq!(*w, f, max_relative = 1e-12);
        }
    }

    #[test]
    fn q_poisson_below_one_respects_radius() {
        assert!(matches!(q_poisson_weights(2.0, 0.5, 1e-12), Err(QError::Convergence(_))));
        let d = q_poisson_weights(1.5, 0.5, 1e-12).unwrap();
        assert!(d.tail_bound() < 1e-12);
    }

    #[test]
    fn q_poisson_large_argument_is_overflow_free() {
        let d = q_poisson_weights(900.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(d.mean(), 900.0, max_relative = 1e-9);
        let d = q_poisson_weights(1e5, 2.0, 1e-12).unwrap();
        assert!(d.weights().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn moment_weights_cover_moment_tail() {
        let mw = q_poisson_moment_weights(0.64, 1.2, 1e-12, 3).unwrap();
        assert!(mw.moment_tail < 1e-12);
        for (k, (&w, &mwk)) in mw.distribution.weights().iter().zip(&mw.moment_weights).enumerate() {
            let want = w * q_number(k as u32, 1.2).powi(3);
            assert!((mwk - want).abs() <= 1e-14 * want.max(1e-300));
        }
        assert_eq!(q_poisson_moment_weights(0.0, 1.2, 1e-12, 2).unwrap().moment(), 0.0);
    }

    proptest! {
        #[test]
        fn binomial_sums_to_one(j in 0u32..200, p in 0.0f64..=1.0) {
            let b = binomial_weights(j, p).unwrap();
            prop_assert!(b.weights().iter().all(|w| *w >= 0.0));
            prop_assert!((b.total() - 1.0).abs() < 1e-14, "sum off by {}", b.total() - 1.0);
        }

        #[test]
        fn q_poisson_is_normalized(x in 0.0f64..20.0, q in 0.6f64..3.0) {
            prop_assume!(q >= 1.0 || x < 0.95 / (1.0 - q));
            let d = q_poisson_weights(x, q, 1e-12).unwrap();
            prop_assert!(d.weights().iter().all(|w| *w >= 0.0));
            let total = d.total();
            prop_assert!(total <= 1.0 + 1e-14 && total >= 1.0 - d.tail_bound() - 1e-14);
            prop_assert!(d.tail_bound() < 1e-12);
        }
    }
}
