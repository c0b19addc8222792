use super::{ln_q_number, q_factorial, q_factorial_value, q_number, require_positive_q, Neumaier};
use crate::error::Result;

/// `[k]_q^m` with the convention `0^0 = 1`.
fn q_power(k: u32, m: u32, q: f64) -> f64 {
    if m == 0 {
        1.0
    } else if k == 0 {
        0.0
    } else {
        q_number(k, q).powi(m as i32)
    }
}

/// q-Stirling number of the second kind,
///
/// `S_q^{s,m} = sum_{k=0}^{s} (-1)^{s-k} q^{((s-k)^2-(s-k))/2} [k]_q^m / ([k]_q! [s-k]_q!)`.
///
/// These are the coefficients of `[k]_q^m = sum_s S_q^{s,m} [k]_q! / [k-s]_q!`,
/// which is what normal-orders `Delta^m` into strings `(a^+)^s a^s`.
/// The alternating sum is accumulated with compensated summation.
pub fn q_stirling2(s: u32, m: u32, q: f64) -> Result<f64> {
    require_positive_q(q)?;
    if s > m {
        // The alternating sum vanishes identically here; skip the cancellation noise.
        return Ok(0.0);
    }
    let mut acc = Neumaier::default();
    for k in 0..=s {
        let d = s - k;
        let pow = q_power(k, m, q);
        if pow == 0.0 {
            continue;
        }
        let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
        let qexp = (d as f64) * (d as f64 - 1.0) / 2.0;
        let direct = sign * q.powf(qexp) * pow / (q_factorial_value(k, q) * q_factorial_value(d, q));
        let term = if direct.is_finite() && direct != 0.0 {
            direct
        } else {
            // Magnitudes out of double range: go through logs.
            let ln = qexp * q.ln() + m as f64 * ln_q_number(k, q) - q_factorial(k, q)? - q_factorial(d, q)?;
            sign * ln.exp()
        };
        acc.add(term);
    }
    Ok(acc.total())
}

/// Classical Stirling number of the second kind from its finite-sum form
/// `sum_k (-1)^{r-k} k^m / (k! (r-k)!)`.
pub fn stirling2(r: u32, m: u32) -> f64 {
    if r > m {
        return 0.0;
    }
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    (0..=r)
        .filter_map(|k| {
            let pow = if m == 0 { 1.0 } else if k == 0 { return None } else { f64::from(k).powi(m as i32) };
            let sign = if (r - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            Some(sign * pow / (fact(k) * fact(r - k)))
        })
        .collect::<Neumaier>()
        .total()
}

/// Table of `S_q^{s,m}` for `0 <= s, m <= max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingTable {
    q: f64,
    max_order: u32,
    // entries[m][s]
    entries: Vec<Vec<f64>>,
}

impl StirlingTable {
    pub fn new(max_order: u32, q: f64) -> Result<Self> {
        require_positive_q(q)?;
        let entries = (0..=max_order)
            .map(|m| (0..=m).map(|s| q_stirling2(s, m, q)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q, max_order, entries })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// `S_q^{s,m}`; zero for `s > m`. Panics if `m` exceeds the table order.
    pub fn get(&self, s: u32, m: u32) -> f64 {
        let row = &self.entries[m as usize];
        row.get(s as usize).copied().unwrap_or(0.0)
    }

    /// The row `S_q^{0,m}, ..., S_q^{m,m}`.
    pub fn row(&self, m: u32) -> &[f64] {
        &self.entries[m as usize]
    }
}
