//! Verification suites: every closed form checked against its matrix or
//! series oracle, reported as flat records.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{self, LadderStrings};
use crate::dynamics::{self, collapse_transform, max_pairwise_deviation, uniform_grid, PhaseCurve};
use crate::error::{QError, Result};
use crate::fock::{self, LambdaIndex, ModelParams};
use crate::isomap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Closure,
    Multicommutator,
    Scaling,
    NormalOrder,
    Relation,
    Isomorphism,
    DynamicsOracle,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Closure,
        Suite::Multicommutator,
        Suite::Scaling,
        Suite::NormalOrder,
        Suite::Relation,
        Suite::Isomorphism,
        Suite::DynamicsOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Closure => "closure",
            Suite::Multicommutator => "multicommutator",
            Suite::Scaling => "scaling",
            Suite::NormalOrder => "normal-order",
            Suite::Relation => "relation",
            Suite::Isomorphism => "isomorphism",
            Suite::DynamicsOracle => "dynamics-oracle",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| QError::Domain(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub params: Value,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check_id: impl Into<String>, params: Value, max_residual: f64, tolerance: f64) -> Self {
        // NaN never passes
        let pass = max_residual <= tolerance;
        Self { check_id: check_id.into(), params, max_residual, tolerance, pass }
    }

    fn failed(check_id: impl Into<String>, params: Value, tolerance: f64, err: &QError) -> Self {
        let mut params = params;
        if let Value::Object(map) = &mut params {
            map.insert("error".into(), json!({ "kind": err.kind(), "message": err.to_string() }));
        }
        Self { check_id: check_id.into(), params, max_residual: f64::INFINITY, tolerance, pass: false }
    }

    fn from_result(check_id: &str, params: Value, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::new(check_id, params, v, tolerance),
            Err(e) => Self::failed(check_id, params, tolerance, &e),
        }
    }
}

/// Knobs shared by all suites. Parameter grids are fixed per suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub dim: usize,
    /// Tail tolerance for truncated series.
    pub tol: f64,
    pub tau_max: f64,
    pub steps: usize,
    pub alpha: Complex64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { dim: 64, tol: 1e-12, tau_max: 10.0, steps: 401, alpha: Complex64::new(0.8, 0.0) }
    }
}

pub const CLOSURE_TOL: f64 = 1e-10;
pub const MULTICOMMUTATOR_TOL: f64 = 1e-9;
pub const SCALING_TOL: f64 = 1e-9;
pub const NORMAL_ORDER_TOL: f64 = 1e-9;
pub const RELATION_TOL: f64 = 1e-10;
pub const ISOMORPHISM_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-8;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const BRIDGE_TOL: f64 = 1e-6;
pub const REVIVAL_TOL: f64 = 1e-10;

const Q_GRID: [f64; 4] = [0.5, 1.0, 1.2, 2.0];
const Q_ABOVE_ONE: [f64; 2] = [1.2, 2.0];
const ANHARMONIC: (f64, f64) = (10.0, 1.0);

fn q_model(q: f64) -> ModelParams {
    ModelParams::QOsc { q, omega_q: 1.0 }
}

fn anharmonic_model() -> ModelParams {
    ModelParams::Anharmonic { omega1: ANHARMONIC.0, omega2: ANHARMONIC.1 }
}

fn model_json(p: &ModelParams) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

fn with_model(p: &ModelParams, extra: Value) -> Value {
    let mut v = model_json(p);
    if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<CheckRecord> {
    match suite {
        Suite::Closure => closure_suite(cfg),
        Suite::Multicommutator => multicommutator_suite(cfg),
        Suite::Scaling => scaling_suite(cfg),
        Suite::NormalOrder => normal_order_suite(cfg),
        Suite::Relation => relation_suite(),
        Suite::Isomorphism => isomorphism_suite(),
        Suite::DynamicsOracle => dynamics_oracle_suite(cfg),
        Suite::All => Suite::ALL.iter().flat_map(|s| run_suite(*s, cfg)).collect(),
    }
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

fn closure_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let models: Vec<ModelParams> = Q_GRID.iter().map(|&q| q_model(q)).chain([anharmonic_model()]).collect();
    let points: Vec<(ModelParams, u32, u32)> = models
        .iter()
        .flat_map(|p| (0..=4).flat_map(move |n| (0..=4).map(move |m| (*p, n, m))))
        .collect();
    points
        .par_iter()
        .map(|(p, n, m)| {
            let params = with_model(p, json!({ "n": n, "m": m, "dim": cfg.dim }));
            let r = algebra::closure_residual(p, LambdaIndex::new(*n, *m), cfg.dim);
            CheckRecord::from_result("closure", params, CLOSURE_TOL, r)
        })
        .collect()
}

fn binomial_residual(p: &ModelParams, idx: LambdaIndex, dim: usize) -> Result<f64> {
    let h = fock::build_hamiltonian(p, dim)?;
    let base = fock::build_lambda(p, idx, dim)?;
    let mut worst: f64 = 0.0;
    let mut literal = base;
    for j in 0..=6 {
        if j > 0 {
            literal = fock::commutator(&h, &literal)?;
        }
        let terms = algebra::multicommutator_expansion(p, idx.n, idx.m, j)?;
        let closed = algebra::expansion_operator(p, idx, &terms, dim)?;
        worst = worst.max(fock::interior_relative_error(&closed, &literal)?);
    }
    Ok(worst)
}

fn power_law_residual(p: &ModelParams, idx: LambdaIndex, dim: usize) -> Result<f64> {
    let h = fock::build_hamiltonian(p, dim)?;
    let mut literal = fock::build_lambda(p, idx, dim)?;
    let mut worst: f64 = 0.0;
    for j in 0..=6 {
        if j > 0 {
            literal = fock::commutator(&h, &literal)?;
        }
        let closed = algebra::power_law_multicommutator(p, idx, j, dim)?;
        worst = worst.max(fock::interior_relative_error(&closed, &literal)?);
    }
    Ok(worst)
}

fn multicommutator_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let idxs: Vec<LambdaIndex> = (0..=3).flat_map(|n| (0..=3).map(move |m| LambdaIndex::new(n, m))).collect();
    let mut jobs: Vec<(&'static str, ModelParams, LambdaIndex)> = vec![];
    for &q in &Q_ABOVE_ONE {
        jobs.extend(idxs.iter().map(|i| ("multicommutator-binomial", q_model(q), *i)));
    }
    jobs.extend(idxs.iter().map(|i| ("multicommutator-binomial", anharmonic_model(), *i)));
    for q in [0.5, 1.2, 2.0] {
        jobs.extend(idxs.iter().map(|i| ("multicommutator-power-law", q_model(q), *i)));
    }
    let mut records: Vec<CheckRecord> = jobs
        .par_iter()
        .map(|(id, p, idx)| {
            let params = with_model(p, json!({ "n": idx.n, "m": idx.m, "j_max": 6, "dim": cfg.dim }));
            let r = if *id == "multicommutator-power-law" {
                power_law_residual(p, *idx, cfg.dim)
            } else {
                binomial_residual(p, *idx, cfg.dim)
            };
            CheckRecord::from_result(id, params, MULTICOMMUTATOR_TOL, r)
        })
        .collect();
    for &q in &Q_ABOVE_ONE {
        let params = json!({ "q": q, "n_max": 3, "j_max": 6, "columns": 60 });
        let r = (1..=3)
            .flat_map(|n| (0..=6).map(move |j| algebra::binomial_power_law_consistency(q, 1.0, n, j, 60)))
            .try_fold(0.0, |acc: f64, r| r.map(|v| acc.max(v)));
        records.push(CheckRecord::from_result("multicommutator-consistency", params, MULTICOMMUTATOR_TOL, r));
    }
    records
}

fn scaling_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let taus = match uniform_grid(cfg.tau_max, cfg.steps) {
        Ok(t) => t,
        Err(e) => return vec![CheckRecord::failed("scaling", json!({}), SCALING_TOL, &e)],
    };
    let groups: Vec<(f64, usize)> = Q_ABOVE_ONE.iter().flat_map(|&q| [0, 1, 3].map(|j| (q, j))).collect();
    groups
        .par_iter()
        .flat_map_iter(|&(q, j_col)| {
            let p = q_model(q);
            let idxs: Vec<LambdaIndex> = (1..=3)
                .flat_map(|n| (0..=3).map(move |m| LambdaIndex::new(n, m)))
                // the column-0 element of Lambda^{n,m>0} vanishes
                .filter(|i| j_col > 0 || i.m == 0)
                .collect();
            let mut records = vec![];
            let mut curves = vec![];
            for idx in idxs {
                let params = json!({ "q": q, "n": idx.n, "m": idx.m, "j_col": j_col, "tau_max": cfg.tau_max, "steps": cfg.steps });
                let r = dynamics::element_phase_curve(&p, idx, j_col, &taus, cfg.dim).map(|curve| {
                    let qn = crate::qcore::q_number(idx.n, q);
                    let worst = curve
                        .phases
                        .iter()
                        .zip(&curve.taus)
                        .map(|(ph, tau)| algebra::circular_distance(*ph, qn * tau * q.powi(j_col as i32)) / qn)
                        .fold(0.0, f64::max);
                    curves.push(curve);
                    worst
                });
                records.push(CheckRecord::from_result("scaling-element", params, SCALING_TOL, r));
            }
            let params = json!({ "q": q, "j_col": j_col, "curves": curves.len(), "tau_max": cfg.tau_max, "steps": cfg.steps });
            let r = collapse_deviation(&curves);
            records.push(CheckRecord::from_result("scaling-collapse", params, SCALING_TOL, r));
            records
        })
        .collect()
}

/// Largest deviation of collapsed curves from each other and from `tau q^{j_col}`.
fn collapse_deviation(curves: &[PhaseCurve]) -> Result<f64> {
    let collapsed = collapse_transform(curves)?;
    let against_line = collapsed
        .iter()
        .flat_map(|c| c.taus.iter().zip(&c.values).map(move |(t, v)| (v - t * c.q.powi(c.j_col as i32)).abs()))
        .fold(0.0, f64::max);
    Ok(max_pairwise_deviation(&collapsed).max(against_line))
}

fn normal_order_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    Q_GRID
        .par_iter()
        .flat_map_iter(|&q| {
            let p = q_model(q);
            let strings = LadderStrings::new(&p, cfg.dim, 3, 5);
            let mut records = vec![];
            for n in 0..=3 {
                for order in 0..=5 {
                    let params = json!({ "q": q, "n": n, "M": order, "dim": cfg.dim });
                    let r = strings.as_ref().map_err(Clone::clone).and_then(|s| {
                        let lhs = fock::build_lambda(&p, LambdaIndex::new(n, order), cfg.dim)?;
                        let rhs = s.normal_ordered(n, order, q)?;
                        fock::interior_relative_error(&rhs, &lhs)
                    });
                    records.push(CheckRecord::from_result("normal-order", params, NORMAL_ORDER_TOL, r));
                }
            }
            records
        })
        .collect()
}

fn relation_suite() -> Vec<CheckRecord> {
    let mut records = vec![];
    for q in Q_GRID {
        for x in [0.1, 0.5, 1.0, 2.0] {
            if x >= crate::qcore::exp_q_radius(q) {
                continue;
            }
            for m in 0..=5 {
                let params = json!({ "q": q, "x": x, "m": m });
                let r = dynamics::relation_identity_residual(x, q, m);
                records.push(CheckRecord::from_result("relation", params, RELATION_TOL, r));
            }
        }
    }
    records
}

fn isomorphism_suite() -> Vec<CheckRecord> {
    let mut records = vec![];
    for ratio in [1.0, 5.0, 10.0, 100.0] {
        for n in 1..=4 {
            let params = json!({ "omega1": ratio, "omega2": 1.0, "n": n, "j_max": 6 });
            let res = isomap::isomorphism_residuals(ratio, 1.0, n, 6);
            let r = res.and_then(|res| {
                if res.map.q_of_n > 1.0 {
                    Ok(res.max())
                } else {
                    Err(QError::Domain(format!("q(n) = {} is not above 1", res.map.q_of_n)))
                }
            });
            records.push(CheckRecord::from_result("isomorphism", params, ISOMORPHISM_TOL, r));
        }
    }
    records
}

fn dynamics_oracle_suite(cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let grid = match uniform_grid(cfg.tau_max, cfg.steps) {
        Ok(t) => t,
        Err(e) => return vec![CheckRecord::failed("dynamics-oracle", json!({}), ORACLE_TOL, &e)],
    };
    let alpha = cfg.alpha;
    let a_json = json!([alpha.re, alpha.im]);
    let idxs: Vec<LambdaIndex> = (0..=3).flat_map(|n| (0..=3).map(move |m| LambdaIndex::new(n, m))).collect();
    let qp = q_model(1.2);
    let ap = anharmonic_model();

    let mut records: Vec<CheckRecord> = idxs
        .par_iter()
        .flat_map_iter(|&idx| {
            let base = json!({ "n": idx.n, "m": idx.m, "alpha": a_json, "tau_max": cfg.tau_max, "steps": cfg.steps, "dim": cfg.dim });
            let oracle_tol = (cfg.tol * 1e-2).max(1e-300);
            let q_series = dynamics::evolve_q_expectation(&qp, alpha, idx, &grid, cfg.tol);
            let q_err = q_series.and_then(|s| {
                let o = dynamics::fock_oracle_series(&qp, alpha, idx, &grid, cfg.dim, oracle_tol)?;
                s.max_relative_diff(&o)
            });
            let a_series = dynamics::evolve_anharmonic_expectation(&ap, alpha, idx, &grid, cfg.tol);
            let a_err = a_series.clone().and_then(|s| {
                let o = dynamics::fock_oracle_series(&ap, alpha, idx, &grid, cfg.dim, oracle_tol)?;
                s.max_relative_diff(&o)
            });
            let closed_err = a_series.and_then(|s| dynamics::evolve_anharmonic_closed(&ap, alpha, idx, &grid)?.max_abs_diff(&s));
            vec![
                CheckRecord::from_result("dynamics-oracle-q", with_model(&qp, base.clone()), ORACLE_TOL, q_err),
                CheckRecord::from_result("dynamics-oracle-anharmonic", with_model(&ap, base.clone()), ORACLE_TOL, a_err),
                CheckRecord::from_result("dynamics-closed-form", with_model(&ap, base), CLOSED_FORM_TOL, closed_err),
            ]
        })
        .collect();

    // Revival: values one period apart differ by a global phase.
    for idx in [LambdaIndex::new(1, 0), LambdaIndex::new(2, 2), LambdaIndex::new(3, 3)] {
        let period = std::f64::consts::PI / ANHARMONIC.1;
        let shifted: Vec<f64> = grid.iter().map(|t| t + period).collect();
        let r = dynamics::evolve_anharmonic_expectation(&ap, alpha, idx, &grid, cfg.tol).and_then(|a| {
            let b = dynamics::evolve_anharmonic_expectation(&ap, alpha, idx, &shifted, cfg.tol)?;
            let nf = f64::from(idx.n);
            let global = Complex64::from_polar(1.0, (nf * ANHARMONIC.0 + nf * nf * ANHARMONIC.1) * period);
            Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x * global - y).norm()).fold(0.0, f64::max))
        });
        let params = with_model(&ap, json!({ "n": idx.n, "m": idx.m, "alpha": a_json }));
        records.push(CheckRecord::from_result("dynamics-revival", params, REVIVAL_TOL, r));
    }

    // Bridge: q -> 1 with omega_q = omega1 against omega2 = 0.
    let bridge_q = ModelParams::QOsc { q: 1.0 + 1e-9, omega_q: 1.0 };
    let bridge_h = ModelParams::Anharmonic { omega1: 1.0, omega2: 0.0 };
    for idx in [LambdaIndex::new(1, 0), LambdaIndex::new(2, 1), LambdaIndex::new(3, 3)] {
        let r = dynamics::evolve_q_expectation(&bridge_q, alpha, idx, &grid, cfg.tol).and_then(|a| {
            let b = dynamics::evolve_anharmonic_expectation(&bridge_h, alpha, idx, &grid, cfg.tol)?;
            a.max_abs_diff(&b)
        });
        let params = json!({ "q": 1.0 + 1e-9, "omega": 1.0, "n": idx.n, "m": idx.m, "alpha": a_json });
        records.push(CheckRecord::from_result("dynamics-bridge", params, BRIDGE_TOL, r));
    }

    // Modulus of the m = 0 expectation never exceeds its initial value |alpha|^n.
    for n in 1..=3 {
        let idx = LambdaIndex::new(n, 0);
        let r = dynamics::evolve_q_expectation(&qp, alpha, idx, &grid, cfg.tol).map(|s| {
            let bound = alpha.norm().powi(n as i32);
            let start = (s.values[0].norm() - bound).abs();
            let excess = s.values.iter().map(|v| (v.norm() - bound).max(0.0)).fold(0.0, f64::max);
            start.max(excess) / bound.max(f64::MIN_POSITIVE)
        });
        let params = with_model(&qp, json!({ "n": n, "m": 0, "alpha": a_json }));
        records.push(CheckRecord::from_result("dynamics-modulus", params, 1e-12, r));
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn record_pass_flag() {
        assert!(CheckRecord::new("x", json!({}), 1e-13, 1e-12).pass);
        assert!(!CheckRecord::new("x", json!({}), f64::NAN, 1e-12).pass);
        let err = QError::Domain("bad".into());
        let r = CheckRecord::failed("x", json!({ "q": 1.0 }), 1e-12, &err);
        assert!(!r.pass);
        assert_eq!(r.params["error"]["kind"], "domain");
    }

    #[test]
    fn cheap_suites_pass() {
        let cfg = VerifyConfig::default();
        for s in [Suite::Relation, Suite::Isomorphism] {
            let recs = run_suite(s, &cfg);
            assert!(!recs.is_empty());
            assert!(all_pass(&recs), "{:?}", recs.iter().find(|r| !r.pass));
        }
    }
}
