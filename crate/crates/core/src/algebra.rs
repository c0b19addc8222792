//! Closed-form algebraic structure of both models.
//!
//! Commuting `Lambda^{n,m}` with either Hamiltonian gives two terms,
//! `c_same Lambda^{n,m} + c_up Lambda^{n,m+1}`, so the j-fold multicommutator
//! is a finite sum over shifts `m -> m + k`, `k <= j`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QError, Result};
use crate::fock::{self, FockOperator, LambdaIndex, ModelParams};
use crate::qcore::{self, binomial_weights, q_number};

/// Coefficients of `[H, Lambda^{n,m}] = c_same Lambda^{n,m} + c_up Lambda^{n,m+1}`.
/// For the adjoint both coefficients change sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureCoeffs {
    pub c_same: f64,
    pub c_up: f64,
}

pub fn closure_coeffs(params: &ModelParams, n: u32) -> ClosureCoeffs {
    match *params {
        ModelParams::QOsc { q, omega_q } => {
            let e = omega_q * q_number(n, q);
            ClosureCoeffs { c_same: e, c_up: e * (q - 1.0) }
        }
        ModelParams::Anharmonic { omega1, omega2 } => {
            let n = f64::from(n);
            ClosureCoeffs { c_same: n * omega1 + n * n * omega2, c_up: 2.0 * n * omega2 }
        }
    }
}

/// One term `coeff * Lambda^{n, m+k}` of a multicommutator expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub k: u32,
    pub coeff: Complex64,
}

/// `(Z, p)` such that the depth-j multicommutator is `Z^j sum_k B(j,k,p) Lambda^{n,m+k}`.
///
/// q-oscillator (`q > 1` only): `Z = E_q(n) q`, `p = 1/q`.
/// Anharmonic (`omega2 > 0`): `Z = n (omega1 + (n+2) omega2)`,
/// `p = (w + n)/(w + n + 2)` with `w = omega1/omega2`.
pub fn binomial_parameters(params: &ModelParams, n: u32) -> Result<(f64, f64)> {
    params.validate()?;
    match *params {
        ModelParams::QOsc { q, omega_q } => {
            if q <= 1.0 {
                return Err(QError::Domain(format!(
                    "binomial multicommutator form needs q > 1 (got {q}); use the power-law form"
                )));
            }
            Ok((omega_q * q_number(n, q) * q, 1.0 / q))
        }
        ModelParams::Anharmonic { omega1, omega2 } => {
            if omega2 == 0.0 {
                return Err(QError::Domain("binomial parameter p_n is undefined for omega2 = 0".into()));
            }
            let nf = f64::from(n);
            let w = omega1 / omega2;
            Ok((nf * (omega1 + (nf + 2.0) * omega2), (w + nf) / (w + nf + 2.0)))
        }
    }
}

/// Coefficients of the depth-`depth` multicommutator of `Lambda^{n,m}` in the
/// basis `Lambda^{n,m+k}`. `m` only labels the base operator; the
/// coefficients do not depend on it.
pub fn multicommutator_expansion(params: &ModelParams, n: u32, _m: u32, depth: u32) -> Result<Vec<ExpansionTerm>> {
    if let ModelParams::Anharmonic { omega1, omega2 } = *params {
        params.validate()?;
        if omega2 == 0.0 {
            // harmonic: a single surviving term
            let z = f64::from(n) * omega1;
            return Ok(vec![ExpansionTerm { k: 0, coeff: Complex64::new(z.powi(depth as i32), 0.0) }]);
        }
    }
    let (z, p) = binomial_parameters(params, n)?;
    let zj = z.powi(depth as i32);
    let weights = binomial_weights(depth, p)?;
    Ok(weights
        .weights()
        .iter()
        .enumerate()
        .map(|(k, w)| ExpansionTerm { k: k as u32, coeff: Complex64::new(zj * w, 0.0) })
        .collect())
}

/// `sum_k coeff_k Lambda^{n, m+k}` as a matrix.
pub fn expansion_operator(
    params: &ModelParams,
    idx: LambdaIndex,
    terms: &[ExpansionTerm],
    dim: usize,
) -> Result<FockOperator> {
    let mut acc = FockOperator::zeros(dim).with_margin(idx.n as usize);
    for t in terms {
        let op = fock::build_lambda(params, LambdaIndex::new(idx.n, idx.m + t.k), dim)?;
        acc = acc.add(&op.scale(t.coeff))?;
    }
    Ok(acc)
}

fn require_q_osc(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    match *params {
        ModelParams::QOsc { q, omega_q } => Ok((q, omega_q)),
        ModelParams::Anharmonic { .. } => Err(QError::Domain("operation is defined for the q-oscillator only".into())),
    }
}

/// `Lambda^{n,m} (E_q(n) [a, a^+])^j`, with `[a, a^+]` taken literally from
/// the truncated ladder matrices. Valid for every `q > 0`.
pub fn power_law_multicommutator(params: &ModelParams, idx: LambdaIndex, depth: u32, dim: usize) -> Result<FockOperator> {
    let (q, omega_q) = require_q_osc(params)?;
    let lambda = fock::build_lambda(params, idx, dim)?;
    let (a, adag) = fock::build_ladder(params, dim)?;
    let energy = omega_q * q_number(idx.n, q);
    // Diagonal; only its last entry feels the truncation.
    let kernel = fock::commutator(&a, &adag)?.scale(Complex64::new(energy, 0.0)).with_margin(1);
    let mut out = lambda;
    for _ in 0..depth {
        out = out.mul(&kernel)?;
    }
    // Right-multiplying by a diagonal rescales columns independently.
    let margin = (idx.n as usize).max(if depth > 0 { 1 } else { 0 });
    Ok(out.with_margin(margin))
}

/// Wrapped phase of `<j+n| Lambda^{n,m}(tau) |j> / <j+n| Lambda^{n,m}(0) |j>`,
/// from matrix Heisenberg evolution.
pub fn element_phase(params: &ModelParams, idx: LambdaIndex, tau: f64, j_col: usize, dim: usize) -> Result<f64> {
    Ok(element_phases(params, idx, &[tau], j_col, dim)?[0])
}

/// [`element_phase`] over a grid of `tau`, building the matrices once.
pub fn element_phases(params: &ModelParams, idx: LambdaIndex, taus: &[f64], j_col: usize, dim: usize) -> Result<Vec<f64>> {
    require_q_osc(params)?;
    let n = idx.n as usize;
    if j_col + n > dim.saturating_sub(1) {
        return Err(QError::Index(format!("column {j_col} + n = {n} exceeds the top level {}", dim.saturating_sub(1))));
    }
    let h = fock::build_hamiltonian(params, dim)?;
    let lambda = fock::build_lambda(params, idx, dim)?;
    let before = lambda.entry(j_col + n, j_col);
    if before.norm() == 0.0 {
        return Err(QError::ZeroElement { row: j_col + n, col: j_col });
    }
    taus.par_iter()
        .map(|&tau| {
            let evolved = fock::heisenberg_evolve(&lambda, &h, params.physical_time(tau))?;
            Ok((evolved.entry(j_col + n, j_col) / before).arg())
        })
        .collect()
}

/// Distance on the circle between two angles, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Residual of the element-wise scaling law: the phase of the evolved band
/// element, divided by `[n]_q`, advances as `tau q^{j_col}`.
///
/// The comparison is done on the circle at the scale of the raw phase
/// (`[n]_q tau q^{j_col}`) and then divided by `[n]_q`, which avoids picking
/// a branch for the `1/[n]_q` root.
pub fn scaling_phase_check(params: &ModelParams, idx: LambdaIndex, tau: f64, j_col: usize, dim: usize) -> Result<f64> {
    let (q, _) = require_q_osc(params)?;
    if idx.n == 0 {
        return Err(QError::Domain("scaling law needs n >= 1".into()));
    }
    let phase = element_phase(params, idx, tau, j_col, dim)?;
    let qn = q_number(idx.n, q);
    let expected = qn * tau * q.powi(j_col as i32);
    Ok(circular_distance(phase, expected) / qn)
}

/// Normal-ordering coefficients: `Delta^M = sum_s S_q^{s,M} (a^+)^s a^s`,
/// hence `Lambda^{n,M} = sum_s S_q^{s,M} (a^+)^{n+s} a^s`.
pub fn normal_order_expansion(order: u32, q: f64) -> Result<Vec<(u32, f64)>> {
    (0..=order).map(|s| Ok((s, qcore::q_stirling2(s, order, q)?))).collect()
}

/// Literal products `(a^+)^{n+s} a^s` for `n <= max_n`, `s <= max_s`, built
/// from cached powers of the truncated ladder matrices.
#[derive(Debug, Clone)]
pub struct LadderStrings {
    max_n: u32,
    max_s: u32,
    // strings[n][s]
    strings: Vec<Vec<FockOperator>>,
}

impl LadderStrings {
    pub fn new(params: &ModelParams, dim: usize, max_n: u32, max_s: u32) -> Result<Self> {
        let (a, adag) = fock::build_ladder(params, dim)?;
        let mut lowering = vec![FockOperator::identity(dim)];
        for s in 0..max_s as usize {
            lowering.push(a.mul(&lowering[s])?);
        }
        let mut raising = vec![FockOperator::identity(dim)];
        for k in 0..(max_n + max_s) as usize {
            raising.push(adag.mul(&raising[k])?);
        }
        let strings = (0..=max_n as usize)
            .map(|n| {
                (0..=max_s as usize)
                    // Lowering first keeps every intermediate level at or below c + n.
                    .map(|s| Ok(raising[n + s].mul(&lowering[s])?.with_margin(n)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { max_n, max_s, strings })
    }

    /// `(a^+)^{n+s} a^s`.
    pub fn get(&self, n: u32, s: u32) -> Result<&FockOperator> {
        if n > self.max_n || s > self.max_s {
            return Err(QError::Index(format!("string ({n}, {s}) outside the cached range ({}, {})", self.max_n, self.max_s)));
        }
        Ok(&self.strings[n as usize][s as usize])
    }

    /// `sum_s S_q^{s,M} (a^+)^{n+s} a^s`.
    pub fn normal_ordered(&self, n: u32, order: u32, q: f64) -> Result<FockOperator> {
        let first = self.get(n, 0)?;
        let mut acc = FockOperator::zeros(first.dim()).with_margin(n as usize);
        for (s, coeff) in normal_order_expansion(order, q)? {
            if coeff != 0.0 {
                acc = acc.add(&self.get(n, s)?.scale(Complex64::new(coeff, 0.0)))?;
            }
        }
        Ok(acc)
    }
}

/// `sum_s S_q^{s,M} (a^+)^{n+s} a^s` from literal ladder products.
pub fn normal_ordered_operator(params: &ModelParams, n: u32, order: u32, dim: usize) -> Result<FockOperator> {
    LadderStrings::new(params, dim, n, order)?.normal_ordered(n, order, params.deformation())
}

/// Normwise residual of `[H, Lambda^{n,m}] - c_same Lambda^{n,m} - c_up Lambda^{n,m+1}`
/// and of its adjoint counterpart; returns the larger.
pub fn closure_residual(params: &ModelParams, idx: LambdaIndex, dim: usize) -> Result<f64> {
    let h = fock::build_hamiltonian(params, dim)?;
    let base = fock::build_lambda(params, idx, dim)?;
    let up = fock::build_lambda(params, LambdaIndex::new(idx.n, idx.m + 1), dim)?;
    let cc = closure_coeffs(params, idx.n);
    let rhs = base
        .scale(Complex64::new(cc.c_same, 0.0))
        .add(&up.scale(Complex64::new(cc.c_up, 0.0)))?;

    let lhs = fock::commutator(&h, &base)?;
    let forward = fock::interior_relative_error(&lhs, &rhs)?;

    let lhs_dag = fock::commutator(&h, &base.dagger())?;
    let backward = fock::interior_relative_error(&lhs_dag, &rhs.dagger().scale(Complex64::new(-1.0, 0.0)))?;
    Ok(forward.max(backward))
}

/// Column-wise check that `(E_q(n) q^c)^j = Z^j sum_k B(j,k,1/q) [c]_q^k`,
/// i.e. the power-law and binomial forms agree on every band element.
/// Returns the worst relative difference over `c < columns`.
pub fn binomial_power_law_consistency(q: f64, omega_q: f64, n: u32, depth: u32, columns: u32) -> Result<f64> {
    let params = ModelParams::q_osc(q, omega_q)?;
    let terms = multicommutator_expansion(&params, n, 0, depth)?;
    let energy = omega_q * q_number(n, q);
    let mut worst: f64 = 0.0;
    for c in 0..columns {
        let power = (energy * q.powi(c as i32)).powi(depth as i32);
        let level = q_number(c, q);
        let binom: f64 = terms
            .iter()
            .map(|t| t.coeff.re * if t.k == 0 { 1.0 } else { level.powi(t.k as i32) })
            .sum();
        let scale = power.abs().max(binom.abs());
        if scale > 0.0 {
            worst = worst.max((power - binom).abs() / scale);
        }
    }
    Ok(worst)
}

/// Phase step allowed between adjacent grid points before unwrapping is refused.
pub const MAX_PHASE_STEP: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qosc(q: f64, w: f64) -> ModelParams {
        ModelParams::q_osc(q, w).unwrap()
    }

    #[test]
    fn closure_coeff_examples() {
        let c = closure_coeffs(&qosc(1.2, 1.0), 1);
        assert_relative_eq!(c.c_same, 1.0);
        assert_relative_eq!(c.c_up, 0.2, max_relative = 1e-14);
        let c = closure_coeffs(&ModelParams::anharmonic(10.0, 1.0).unwrap(), 1);
        assert_eq!((c.c_same, c.c_up), (11.0, 2.0));
        for p in [qosc(2.0, 3.0), ModelParams::anharmonic(4.0, 0.5).unwrap()] {
            assert_eq!(closure_coeffs(&p, 0), ClosureCoeffs { c_same: 0.0, c_up: 0.0 });
        }
    }

    #[test]
    fn closure_holds_on_small_grid() {
        for p in [qosc(0.5, 1.0), qosc(2.0, 0.7), ModelParams::anharmonic(10.0, 1.0).unwrap()] {
            for n in 0..3 {
                for m in 0..3 {
                    let r = closure_residual(&p, LambdaIndex::new(n, m), 16).unwrap();
                    assert!(r < 1e-12, "{p:?} n={n} m={m} r={r}");
                }
            }
        }
    }

    #[test]
    fn expansion_depth_zero_and_one() {
        let p = qosc(1.5, 2.0);
        let t0 = multicommutator_expansion(&p, 2, 1, 0).unwrap();
        assert_eq!(t0, vec![ExpansionTerm { k: 0, coeff: Complex64::new(1.0, 0.0) }]);
        let t1 = multicommutator_expansion(&p, 2, 1, 1).unwrap();
        let cc = closure_coeffs(&p, 2);
        assert_relative_eq!(t1[0].coeff.re, cc.c_same, max_relative = 1e-14);
        assert_relative_eq!(t1[1].coeff.re, cc.c_up, max_relative = 1e-14);

        let a = ModelParams::anharmonic(10.0, 1.0).unwrap();
        let t1 = multicommutator_expansion(&a, 1, 0, 1).unwrap();
        assert_relative_eq!(t1[0].coeff.re, 11.0, max_relative = 1e-14);
        assert_relative_eq!(t1[1].coeff.re, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn expansion_domain() {
        assert!(matches!(multicommutator_expansion(&qosc(1.0, 1.0), 1, 0, 2), Err(QError::Domain(_))));
        assert!(matches!(multicommutator_expansion(&qosc(0.5, 1.0), 1, 0, 2), Err(QError::Domain(_))));
        let harmonic = ModelParams::anharmonic(3.0, 0.0).unwrap();
        let t = multicommutator_expansion(&harmonic, 2, 0, 3).unwrap();
        assert_eq!(t, vec![ExpansionTerm { k: 0, coeff: Complex64::new(216.0, 0.0) }]);
    }

    #[test]
    fn expansion_matches_iterated_commutator() {
        for p in [qosc(1.2, 1.0), ModelParams::anharmonic(10.0, 1.0).unwrap()] {
            let d = 20;
            let h = fock::build_hamiltonian(&p, d).unwrap();
            for (n, m, j) in [(1, 0, 3), (2, 1, 4), (3, 2, 2)] {
                let idx = LambdaIndex::new(n, m);
                let base = fock::build_lambda(&p, idx, d).unwrap();
                let lit = fock::multicommutator_matrix(&h, &base, j).unwrap();
                let terms = multicommutator_expansion(&p, n, m, j).unwrap();
                let closed = expansion_operator(&p, idx, &terms, d).unwrap();
                assert!(fock::interior_relative_error(&closed, &lit).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn power_law_examples() {
        let p = qosc(0.5, 1.0);
        let idx = LambdaIndex::new(1, 1);
        let d = 32;
        let base = fock::build_lambda(&p, idx, d).unwrap();
        assert_eq!(power_law_multicommutator(&p, idx, 0, d).unwrap(), base);

        let zero = power_law_multicommutator(&p, LambdaIndex::new(0, 2), 2, d).unwrap();
        assert!(zero.matrix().iter().all(|z| z.norm() == 0.0));

        let h = fock::build_hamiltonian(&p, d).unwrap();
        let lit = fock::multicommutator_matrix(&h, &base, 3).unwrap();
        let pl = power_law_multicommutator(&p, idx, 3, d).unwrap();
        assert!(fock::interior_relative_error(&pl, &lit).unwrap() < 1e-10);

        assert!(power_law_multicommutator(&ModelParams::anharmonic(1.0, 1.0).unwrap(), idx, 1, d).is_err());
    }

    #[test]
    fn scaling_examples() {
        let p = qosc(1.2, 1.0);
        assert_eq!(scaling_phase_check(&p, LambdaIndex::new(1, 0), 0.0, 2, 16).unwrap(), 0.0);
        assert!(scaling_phase_check(&p, LambdaIndex::new(1, 0), 0.7, 2, 16).unwrap() < 1e-12);

        let mut residuals = vec![];
        for n in 1..=3 {
            for m in 0..=2 {
                residuals.push(scaling_phase_check(&p, LambdaIndex::new(n, m), 0.7, 2, 16).unwrap());
            }
        }
        let spread = residuals.iter().cloned().fold(0.0, f64::max) - residuals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-12);

        assert!(matches!(scaling_phase_check(&p, LambdaIndex::new(0, 0), 0.7, 2, 16), Err(QError::Domain(_))));
        assert!(matches!(
            scaling_phase_check(&p, LambdaIndex::new(1, 1), 0.7, 0, 16),
            Err(QError::ZeroElement { row: 1, col: 0 })
        ));
        assert!(matches!(scaling_phase_check(&p, LambdaIndex::new(3, 0), 0.7, 13, 16), Err(QError::Index(_))));
    }

    #[test]
    fn normal_order_examples() {
        assert_eq!(normal_order_expansion(0, 1.7).unwrap(), vec![(0, 1.0)]);
        assert_eq!(normal_order_expansion(1, 1.7).unwrap(), vec![(0, 0.0), (1, 1.0)]);
        let row: Vec<f64> = normal_order_expansion(3, 1.0).unwrap().iter().map(|(_, c)| c.round()).collect();
        assert_eq!(row, vec![0.0, 1.0, 3.0, 1.0]);

        // Lambda^{n,1} = (a^+)^{n+1} a
        let p = qosc(1.3, 1.0);
        for n in 0..3 {
            let lhs = fock::build_lambda(&p, LambdaIndex::new(n, 1), 12).unwrap();
            let rhs = normal_ordered_operator(&p, n, 1, 12).unwrap();
            assert!(fock::interior_relative_error(&rhs, &lhs).unwrap() < 1e-14);
        }
    }

    #[test]
    fn binomial_and_power_law_agree() {
        for q in [1.2, 2.0] {
            for n in 1..4 {
                for j in 0..7 {
                    assert!(binomial_power_law_consistency(q, 1.0, n, j, 30).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn circular_distance_wraps() {
        assert_relative_eq!(circular_distance(0.1, TAU - 0.1), 0.2, max_relative = 1e-12);
        assert_eq!(circular_distance(3.0, 3.0), 0.0);
        assert_relative_eq!(circular_distance(0.0, PI), PI);
    }
}
