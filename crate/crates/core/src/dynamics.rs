//! Expectation values of `Lambda^{n,m}` in coherent states, evolved in time.
//!
//! Every grid point is an independent finite phase sum, so grids are
//! evaluated in parallel and no stepping error accumulates.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra;
use crate::error::{QError, Result};
use crate::fock::{self, LambdaIndex, ModelParams};
use crate::qcore::{self, q_number, q_poisson_moment_weights, Neumaier};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    /// `tau = omega_q t` for the q-oscillator, `t` for the anharmonic model.
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub model: ModelParams,
    pub idx: LambdaIndex,
    pub alpha: Complex64,
    /// Relative bound on the dropped part of the k-sum; 0 for closed forms.
    pub truncation_tail: f64,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|a_i - b_i|`.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest `|a_i - b_i| / |b_i|` (with `0/0 = 0`), `other` being the reference.
    pub fn max_relative_diff(&self, other: &TimeSeries) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = (a - b).norm();
                if d == 0.0 {
                    0.0
                } else {
                    d / b.norm()
                }
            })
            .fold(0.0, f64::max))
    }

    fn check_same_grid(&self, other: &TimeSeries) -> Result<()> {
        if self.times != other.times {
            return Err(QError::Dimension("time series are on different grids".into()));
        }
        Ok(())
    }
}

/// `points` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(QError::Domain("a time grid needs at least one point".into()));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(QError::Domain(format!("t_max must be positive and finite, got {t_max}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| if i == points - 1 { t_max } else { t_max * i as f64 / last }).collect())
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(QError::Domain("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(QError::Domain("time grid contains a non-finite value".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QError::Domain("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(QError::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// `sum_k w_k e^{i theta_k}`, compensated in both components.
fn phase_sum(weights: &[f64], theta: impl Fn(usize) -> f64) -> Complex64 {
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (s, c) = theta(k).sin_cos();
        re.add(w * c);
        im.add(w * s);
    }
    Complex64::new(re.total(), im.total())
}

/// `<alpha| Lambda^{n,m}(tau) |alpha>` in a q-coherent state,
///
/// `(alpha*)^n e^{i[n] tau} sum_k [k]^m P_q(alpha, k) e^{i[n](q-1)[k] tau}`.
///
/// The two phases are combined as `[n]_q tau q^k`.
pub fn evolve_q_expectation(
    params: &ModelParams,
    alpha: Complex64,
    idx: LambdaIndex,
    taus: &[f64],
    tol: f64,
) -> Result<TimeSeries> {
    params.validate()?;
    let ModelParams::QOsc { q, .. } = *params else {
        return Err(QError::Domain("evolve_q_expectation needs q-oscillator parameters".into()));
    };
    check_grid(taus)?;
    check_tol(tol)?;
    let mw = q_poisson_moment_weights(alpha.norm_sqr(), q, tol, idx.m)?;
    let prefactor = alpha.conj().powu(idx.n);
    let qn = q_number(idx.n, q);
    let static_moment = prefactor * mw.moment();
    let lq = q.ln();

    let values = taus
        .par_iter()
        .map(|&tau| {
            if idx.n == 0 || tau == 0.0 {
                return static_moment;
            }
            prefactor * phase_sum(&mw.moment_weights, |k| qn * tau * (k as f64 * lq).exp())
        })
        .collect();
    Ok(TimeSeries {
        times: taus.to_vec(),
        values,
        model: *params,
        idx,
        alpha,
        truncation_tail: mw.moment_tail.max(mw.distribution.tail_bound()),
    })
}

fn anharmonic_parts(params: &ModelParams, n: u32) -> Result<(f64, f64)> {
    params.validate()?;
    let ModelParams::Anharmonic { omega1, omega2 } = *params else {
        return Err(QError::Domain("expected anharmonic parameters".into()));
    };
    let nf = f64::from(n);
    Ok((nf * omega1 + nf * nf * omega2, 2.0 * nf * omega2))
}

/// `(alpha*)^n e^{i(n omega1 + n^2 omega2)t} sum_k k^m P(alpha, k) e^{i 2 n omega2 k t}`.
pub fn evolve_anharmonic_expectation(
    params: &ModelParams,
    alpha: Complex64,
    idx: LambdaIndex,
    times: &[f64],
    tol: f64,
) -> Result<TimeSeries> {
    let (c1, c2) = anharmonic_parts(params, idx.n)?;
    check_grid(times)?;
    check_tol(tol)?;
    let mw = q_poisson_moment_weights(alpha.norm_sqr(), 1.0, tol, idx.m)?;
    let prefactor = alpha.conj().powu(idx.n);
    let static_moment = prefactor * mw.moment();

    let values = times
        .par_iter()
        .map(|&t| {
            if idx.n == 0 || t == 0.0 {
                return static_moment;
            }
            prefactor * phase_sum(&mw.moment_weights, |k| (c1 + c2 * k as f64) * t)
        })
        .collect();
    Ok(TimeSeries {
        times: times.to_vec(),
        values,
        model: *params,
        idx,
        alpha,
        truncation_tail: mw.moment_tail.max(mw.distribution.tail_bound()),
    })
}

/// Closed form of [`evolve_anharmonic_expectation`]: with `x = |alpha|^2` and
/// `theta = 2 n omega2 t`,
///
/// `(alpha*)^n e^{i c1 t} exp[x(e^{i theta} - 1)] sum_r S^{r,m} x^r e^{i r theta}`.
pub fn evolve_anharmonic_closed(
    params: &ModelParams,
    alpha: Complex64,
    idx: LambdaIndex,
    times: &[f64],
) -> Result<TimeSeries> {
    let (c1, c2) = anharmonic_parts(params, idx.n)?;
    check_grid(times)?;
    let x = alpha.norm_sqr();
    let prefactor = alpha.conj().powu(idx.n);
    let stirling: Vec<f64> = (0..=idx.m).map(|r| qcore::stirling2(r, idx.m)).collect();

    let values = times
        .par_iter()
        .map(|&t| {
            let theta = c2 * t;
            let z = Complex64::from_polar(x, theta);
            let poly: Complex64 = stirling.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &s| acc * z + s);
            let envelope = (z - x).exp();
            prefactor * Complex64::from_polar(1.0, c1 * t) * envelope * poly
        })
        .collect();
    Ok(TimeSeries { times: times.to_vec(), values, model: *params, idx, alpha, truncation_tail: 0.0 })
}

/// `sum_k [k]_q^m x^k / [k]_q!` summed directly, with a geometric tail
/// certificate (the term ratios are nonincreasing for every `q > 0`).
fn moment_series(x: f64, q: f64, m: u32) -> Result<f64> {
    let mut acc = Neumaier::default();
    let mut abs_acc = 0.0;
    // base = x^k / [k]_q!
    let mut base = 1.0_f64;
    for k in 0..1u32 << 20 {
        let level = q_number(k, q);
        let term = if m == 0 { base } else if k == 0 { 0.0 } else { base * level.powi(m as i32) };
        acc.add(term);
        abs_acc += term.abs();
        let next_base = base * x / q_number(k + 1, q);
        if k >= 1 && abs_acc > 0.0 {
            let l1 = q_number(k + 1, q);
            let l2 = q_number(k + 2, q);
            let next = next_base * l1.powi(m as i32);
            let ratio = x.abs() / l2 * (l2 / l1).powi(m as i32);
            if ratio < 1.0 && next.abs() / (1.0 - ratio) <= 1e-17 * abs_acc {
                acc.add(next);
                return Ok(acc.total());
            }
        }
        base = next_base;
    }
    Err(QError::Convergence(format!("moment series at x = {x}, q = {q}, m = {m} did not converge")))
}

/// Relative residual `|LHS - RHS| / |RHS|` of
/// `sum_k [k]_q^m x^k/[k]_q! = exp_q(x) sum_r S_q^{r,m} x^r`.
pub fn relation_identity_residual(x: f64, q: f64, m: u32) -> Result<f64> {
    let e = qcore::q_exponential(x, q)?;
    if m == 0 {
        return Ok(0.0);
    }
    let lhs = moment_series(x, q, m)?;
    let mut poly = Neumaier::default();
    for r in 0..=m {
        poly.add(qcore::q_stirling2(r, m, q)? * x.powi(r as i32));
    }
    let rhs = e * poly.total();
    if lhs == rhs {
        return Ok(0.0);
    }
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Matrix oracle: `<alpha| e^{iHt} Lambda e^{-iHt} |alpha>` with explicit
/// coherent-state vectors on `dim` levels. Times are native (`tau` for the
/// q-oscillator).
pub fn fock_oracle_series(
    params: &ModelParams,
    alpha: Complex64,
    idx: LambdaIndex,
    times: &[f64],
    dim: usize,
    tol: f64,
) -> Result<TimeSeries> {
    check_grid(times)?;
    let state = fock::coherent_state(params, alpha, dim, tol)?;
    let h = fock::build_hamiltonian(params, dim)?;
    let lambda = fock::build_lambda(params, idx, dim)?;
    let values = times
        .par_iter()
        .map(|&t| {
            let evolved = fock::heisenberg_evolve(&lambda, &h, params.physical_time(t))?;
            Ok(fock::expectation(&state, &evolved)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries {
        times: times.to_vec(),
        values,
        model: *params,
        idx,
        alpha,
        truncation_tail: state.tail_bound(),
    })
}

/// Wrapped phase of one band element of `Lambda^{n,m}(tau)` over a grid,
/// tagged for [`collapse_transform`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub idx: LambdaIndex,
    pub q: f64,
    pub j_col: usize,
    pub taus: Vec<f64>,
    /// Phases in `(-pi, pi]`.
    pub phases: Vec<f64>,
}

impl PhaseCurve {
    pub fn label(&self) -> String {
        format!("{}_q{}_j{}", self.idx, self.q, self.j_col)
    }

    /// Phase advance per unit `tau`: `[n]_q q^{j_col}`.
    pub fn rate(&self) -> f64 {
        q_number(self.idx.n, self.q) * self.q.powi(self.j_col as i32)
    }
}

/// Element phases from matrix Heisenberg evolution.
pub fn element_phase_curve(
    params: &ModelParams,
    idx: LambdaIndex,
    j_col: usize,
    taus: &[f64],
    dim: usize,
) -> Result<PhaseCurve> {
    check_grid(taus)?;
    let phases = algebra::element_phases(params, idx, taus, j_col, dim)?;
    Ok(PhaseCurve { idx, q: params.deformation(), j_col, taus: taus.to_vec(), phases })
}

/// A phase curve unwrapped and divided by `[n]_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapsedCurve {
    pub idx: LambdaIndex,
    pub q: f64,
    pub j_col: usize,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

/// Unwraps each curve by nearest-branch continuation and divides by `[n]_q`.
///
/// A curve whose grid step lets the phase advance by `pi` or more between
/// neighbours is refused with [`QError::Unwrap`]: its branch cannot be
/// recovered from wrapped samples.
pub fn collapse_transform(curves: &[PhaseCurve]) -> Result<Vec<CollapsedCurve>> {
    curves.iter().map(collapse_one).collect()
}

fn collapse_one(curve: &PhaseCurve) -> Result<CollapsedCurve> {
    if curve.taus.len() != curve.phases.len() {
        return Err(QError::Dimension(format!("curve {} has mismatched lengths", curve.label())));
    }
    check_grid(&curve.taus)?;
    if curve.idx.n == 0 {
        return Err(QError::Domain("collapse needs n >= 1".into()));
    }
    let rate = curve.rate();
    let step = curve.taus.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if step * rate >= algebra::MAX_PHASE_STEP {
        return Err(QError::Unwrap { label: curve.label(), step, rate });
    }
    // The first sample is anchored to the branch of the expected phase.
    let anchor = rate * curve.taus[0];
    let mut unwrapped = Vec::with_capacity(curve.phases.len());
    let mut prev = curve.phases[0] + TAU * ((anchor - curve.phases[0]) / TAU).round();
    unwrapped.push(prev);
    for &p in &curve.phases[1..] {
        let d = (p - prev + PI).rem_euclid(TAU) - PI;
        prev += d;
        unwrapped.push(prev);
    }
    let qn = q_number(curve.idx.n, curve.q);
    Ok(CollapsedCurve {
        idx: curve.idx,
        q: curve.q,
        j_col: curve.j_col,
        taus: curve.taus.clone(),
        values: unwrapped.into_iter().map(|v| v / qn).collect(),
    })
}

/// Largest pointwise difference between any two collapsed curves.
pub fn max_pairwise_deviation(curves: &[CollapsedCurve]) -> f64 {
    let Some(first) = curves.first() else { return 0.0 };
    (0..first.values.len())
        .map(|i| {
            let (lo, hi) = curves
                .iter()
                .filter_map(|c| c.values.get(i))
                .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max)
}
