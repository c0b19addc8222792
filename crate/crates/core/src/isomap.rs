//! Parameter map between the anharmonic oscillator and the q-oscillator.
//!
//! For a fixed supra-index `n`, choosing
//! `q(n) = (w + n + 2)/(w + n)` with `w = omega1/omega2` and
//! `omega_q [n]_q = n omega1 + n^2 omega2` makes the two models' commutator
//! coefficients on `Lambda^{n,m}` identical.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{self, closure_coeffs, multicommutator_expansion};
use crate::error::{QError, Result};
use crate::fock::ModelParams;
use crate::qcore::q_number;

/// Tolerance used when a freshly built map checks its own invariants.
pub const MAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoMap {
    pub n: u32,
    pub q_of_n: f64,
    pub omega_q: f64,
    pub p_n: f64,
    pub source: ModelParams,
}

impl IsoMap {
    pub fn q_params(&self) -> ModelParams {
        ModelParams::QOsc { q: self.q_of_n, omega_q: self.omega_q }
    }
}

pub fn map_to_q(omega1: f64, omega2: f64, n: u32) -> Result<IsoMap> {
    if !(omega2 > 0.0 && omega2.is_finite()) {
        return Err(QError::Domain(format!("omega2 must be positive for the map, got {omega2}")));
    }
    if n == 0 {
        return Err(QError::Domain("the map needs n >= 1".into()));
    }
    let source = ModelParams::anharmonic(omega1, omega2)?;
    let nf = f64::from(n);
    let w = omega1 / omega2;
    let q = (w + nf + 2.0) / (w + nf);
    let p_n = (w + nf) / (w + nf + 2.0);
    let energy = nf * omega1 + nf * nf * omega2;
    let omega_q = energy / q_number(n, q);
    let map = IsoMap { n, q_of_n: q, omega_q, p_n, source };

    if !(q > 1.0) {
        return Err(QError::Domain(format!("mapped q = {q} is not above 1")));
    }
    let inverse_gap = (1.0 / q - p_n).abs();
    let energy_gap = (omega_q * q_number(n, q) - energy).abs() / energy;
    if inverse_gap > MAP_TOL || energy_gap > MAP_TOL {
        return Err(QError::Domain(format!(
            "map invariants violated: |1/q - p_n| = {inverse_gap:e}, energy gap {energy_gap:e}"
        )));
    }
    Ok(map)
}

/// How closely the mapped q-oscillator reproduces the anharmonic coefficients.
/// All gaps except `inverse_q` are relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoResiduals {
    pub map: IsoMap,
    pub j_max: u32,
    /// `|1/q - p_n|`
    pub inverse_q: f64,
    /// `Z_{[n]_q} = omega_q [n]_q q` against `Z_n = n(omega1 + (n+2) omega2)`.
    pub z: f64,
    /// Multicommutator coefficient tables for `j <= j_max`.
    pub coefficient_table: f64,
    /// `e^{i c1 t}(i c2 t)^r / r!` for `r <= j_max` over one revival period.
    pub coefficient_function: f64,
    /// First-order closure coefficients.
    pub closure: f64,
}

impl IsoResiduals {
    pub fn max(&self) -> f64 {
        [self.inverse_q, self.z, self.coefficient_table, self.coefficient_function, self.closure]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Points on the coefficient-function grid `t in [0, pi/omega2]`.
pub const FUNCTION_GRID_POINTS: usize = 64;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn isomorphism_residuals(omega1: f64, omega2: f64, n: u32, j_max: u32) -> Result<IsoResiduals> {
    let map = map_to_q(omega1, omega2, n)?;
    let qp = map.q_params();
    let ap = map.source;
    let nf = f64::from(n);

    let inverse_q = (1.0 / map.q_of_n - map.p_n).abs();
    let z_q = map.omega_q * q_number(n, map.q_of_n) * map.q_of_n;
    let z_a = nf * (omega1 + (nf + 2.0) * omega2);
    let z = rel(z_q, z_a);

    let mut coefficient_table: f64 = 0.0;
    for j in 0..=j_max {
        let tq = multicommutator_expansion(&qp, n, 0, j)?;
        let ta = multicommutator_expansion(&ap, n, 0, j)?;
        if tq.len() != ta.len() {
            return Err(QError::Dimension(format!("expansion lengths differ at j = {j}")));
        }
        let scale = ta.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        for (a, b) in tq.iter().zip(&ta) {
            coefficient_table = coefficient_table.max((a.coeff - b.coeff).norm() / scale);
        }
    }

    let cq = closure_coeffs(&qp, n);
    let ca = closure_coeffs(&ap, n);
    let closure = rel(cq.c_same, ca.c_same).max(rel(cq.c_up, ca.c_up));

    let coefficient_function = coefficient_function_gap(cq.c_same, cq.c_up, ca.c_same, ca.c_up, omega2, j_max);

    Ok(IsoResiduals { map, j_max, inverse_q, z, coefficient_table, coefficient_function, closure })
}

/// `e^{i c1 t} (i c2 t)^r / r!`
pub fn coefficient_function(c1: f64, c2: f64, r: u32, t: f64) -> Complex64 {
    let fact: f64 = (1..=r).map(f64::from).product();
    Complex64::from_polar(1.0, c1 * t) * Complex64::new(0.0, c2 * t).powu(r) / fact
}

fn coefficient_function_gap(c1q: f64, c2q: f64, c1a: f64, c2a: f64, omega2: f64, j_max: u32) -> f64 {
    let period = std::f64::consts::PI / omega2;
    let last = (FUNCTION_GRID_POINTS - 1) as f64;
    let mut worst: f64 = 0.0;
    for r in 0..=j_max {
        let pairs: Vec<(Complex64, Complex64)> = (0..FUNCTION_GRID_POINTS)
            .map(|i| {
                let t = period * i as f64 / last;
                (coefficient_function(c1q, c2q, r, t), coefficient_function(c1a, c2a, r, t))
            })
            .collect();
        let scale = pairs.iter().map(|(_, b)| b.norm()).fold(0.0, f64::max);
        let gap = pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            worst = worst.max(gap / scale);
        }
    }
    worst
}

/// Whether the mapped closure coefficients coincide with the anharmonic ones
/// to `tol` (relative).
pub fn closure_consequence(omega1: f64, omega2: f64, n: u32, tol: f64) -> Result<bool> {
    let map = map_to_q(omega1, omega2, n)?;
    let cq = algebra::closure_coeffs(&map.q_params(), n);
    let ca = algebra::closure_coeffs(&map.source, n);
    Ok(rel(cq.c_same, ca.c_same) <= tol && rel(cq.c_up, ca.c_up) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn map_examples() {
        let m = map_to_q(10.0, 1.0, 1).unwrap();
        assert_relative_eq!(m.q_of_n, 13.0 / 11.0, max_relative = 1e-15);
        assert_relative_eq!(m.omega_q, 11.0, max_relative = 1e-14);

        let m = map_to_q(10.0, 1.0, 2).unwrap();
        assert_relative_eq!(m.q_of_n, 7.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(q_number(2, m.q_of_n), 13.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(m.omega_q, 144.0 / 13.0, max_relative = 1e-14);
        assert_relative_eq!(m.omega_q * q_number(2, m.q_of_n) * m.q_of_n, 28.0, max_relative = 1e-14);

        assert_ne!(map_to_q(10.0, 1.0, 1).unwrap().q_of_n, map_to_q(10.0, 1.0, 3).unwrap().q_of_n);
    }

    #[test]
    fn map_domain() {
        assert!(matches!(map_to_q(10.0, 0.0, 1), Err(QError::Domain(_))));
        assert!(matches!(map_to_q(10.0, -1.0, 1), Err(QError::Domain(_))));
        assert!(matches!(map_to_q(10.0, 1.0, 0), Err(QError::Domain(_))));
        let big = map_to_q(10.0, 1.0, 100).unwrap();
        assert!(big.q_of_n > 1.0 && big.q_of_n < 1.02);
    }

    #[test]
    fn residual_grid() {
        for ratio in [1.0, 5.0, 10.0, 100.0] {
            for n in 1..=4 {
                let r = isomorphism_residuals(ratio, 1.0, n, 6).unwrap();
                assert!(r.max() < 1e-12, "ratio={ratio} n={n} {r:?}");
                assert!(closure_consequence(ratio, 1.0, n, 1e-12).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn q_above_one_and_decreasing(w1 in 0.01f64..1e3, w2 in 0.01f64..10.0, n in 1u32..50) {
            let a = map_to_q(w1, w2, n).unwrap();
            let b = map_to_q(w1, w2, n + 1).unwrap();
            prop_assert!(a.q_of_n > 1.0);
            prop_assert!(b.q_of_n <= a.q_of_n);
            let c = map_to_q(w1 * 2.0, w2, n).unwrap();
            prop_assert!(c.q_of_n <= a.q_of_n);
        }
    }
}
