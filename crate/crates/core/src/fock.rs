//! Truncated Fock-space matrices.
//!
//! Everything here is deliberately literal: ladder operators are dense
//! matrices, commutators are `AB - BA`, and Heisenberg evolution multiplies
//! entries by phases. The closed forms elsewhere in the crate are checked
//! against these matrices.
//!
//! Both Hamiltonians are diagonal, so truncating the infinite ladder only
//! corrupts the top Fock levels. Every [`FockOperator`] carries a `margin`,
//! the number of top columns that may differ from the infinite-dimensional
//! operator. Identities are compared on the remaining interior columns.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::qcore::{self, q_number};

/// Model Hamiltonian parameters, with `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    /// Arik-Coon oscillator `H = omega_q a^+ a` with `a a^+ - q a^+ a = 1`.
    QOsc { q: f64, omega_q: f64 },
    /// `H = omega1 Delta + omega2 Delta^2` with bosonic `a`.
    Anharmonic { omega1: f64, omega2: f64 },
}

impl ModelParams {
    pub fn q_osc(q: f64, omega_q: f64) -> Result<Self> {
        let p = ModelParams::QOsc { q, omega_q };
        p.validate()?;
        Ok(p)
    }

    pub fn anharmonic(omega1: f64, omega2: f64) -> Result<Self> {
        let p = ModelParams::Anharmonic { omega1, omega2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelParams::QOsc { q, omega_q } => {
                qcore::require_positive_q(q)?;
                if !(omega_q > 0.0 && omega_q.is_finite()) {
                    return Err(QError::Domain(format!("omega_q must be positive, got {omega_q}")));
                }
            }
            ModelParams::Anharmonic { omega1, omega2 } => {
                if !(omega1 > 0.0 && omega1.is_finite()) {
                    return Err(QError::Domain(format!("omega1 must be positive, got {omega1}")));
                }
                if !(omega2 >= 0.0 && omega2.is_finite()) {
                    return Err(QError::Domain(format!("omega2 must be nonnegative, got {omega2}")));
                }
            }
        }
        Ok(())
    }

    /// The deformation parameter; 1 for the bosonic model.
    pub fn deformation(&self) -> f64 {
        match *self {
            ModelParams::QOsc { q, .. } => q,
            ModelParams::Anharmonic { .. } => 1.0,
        }
    }

    /// Eigenvalue of `a^+ a` on level `k`: `[k]_q`, or `k`.
    pub fn number_eigenvalue(&self, k: u32) -> f64 {
        match *self {
            ModelParams::QOsc { q, .. } => q_number(k, q),
            ModelParams::Anharmonic { .. } => f64::from(k),
        }
    }

    /// Energy of level `k`.
    pub fn energy(&self, k: u32) -> f64 {
        match *self {
            ModelParams::QOsc { q, omega_q } => omega_q * q_number(k, q),
            ModelParams::Anharmonic { omega1, omega2 } => {
                let k = f64::from(k);
                omega1 * k + omega2 * k * k
            }
        }
    }

    /// Converts the model's native time to the physical time fed to `e^{iHt}`.
    /// The q-oscillator runs on `tau = omega_q t`; the anharmonic model on `t`.
    pub fn physical_time(&self, native: f64) -> f64 {
        match *self {
            ModelParams::QOsc { omega_q, .. } => native / omega_q,
            ModelParams::Anharmonic { .. } => native,
        }
    }

    pub fn is_q_osc(&self) -> bool {
        matches!(self, ModelParams::QOsc { .. })
    }
}

/// Labels the relevant operator `Lambda^{n,m} = (a^+)^n Delta^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LambdaIndex {
    pub n: u32,
    pub m: u32,
}

impl LambdaIndex {
    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }
}

impl std::fmt::Display for LambdaIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}_m{}", self.n, self.m)
    }
}

/// Dense operator on a `dim`-level truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
    margin: usize,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<Complex64>, margin: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QError::Dimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, margin })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), margin: 0 }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim), margin: 0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// Columns unaffected by truncation.
    pub fn interior_columns(&self) -> std::ops::Range<usize> {
        0..self.dim().saturating_sub(self.margin)
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), margin: self.margin }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { matrix: &self.matrix * c, margin: self.margin }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(QError::Dimension(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, margin: self.margin.max(other.margin) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self { matrix: &self.matrix - &other.matrix, margin: self.margin.max(other.margin) })
    }

    /// Matrix product. Margins add: every factor can push a column's support
    /// further into the truncated region.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, margin: self.margin + other.margin })
    }

    pub fn is_diagonal(&self) -> bool {
        self.max_off_diagonal() == 0.0
    }

    fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|c| (0..d).map(move |r| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| self.matrix[(r, c)].norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|r| (0..d).all(|c| (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm() <= tol))
    }
}

fn require_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(QError::Dimension(format!("Fock dimension must be at least 2, got {dim}")))
    } else {
        Ok(())
    }
}

/// Annihilation and creation operators. `a` carries `sqrt([k]_q)` at
/// `(k-1, k)`; `a^+` is its adjoint.
pub fn build_ladder(params: &ModelParams, dim: usize) -> Result<(FockOperator, FockOperator)> {
    params.validate()?;
    require_dim(dim)?;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new(params.number_eigenvalue(k as u32).sqrt(), 0.0);
    }
    let a = FockOperator { matrix: a, margin: 1 };
    let adag = a.dagger();
    Ok((a, adag))
}

/// Diagonal Hamiltonian; exact under truncation.
pub fn build_hamiltonian(params: &ModelParams, dim: usize) -> Result<FockOperator> {
    params.validate()?;
    require_dim(dim)?;
    let diag = DVector::from_iterator(dim, (0..dim).map(|k| Complex64::new(params.energy(k as u32), 0.0)));
    Ok(FockOperator { matrix: DMatrix::from_diagonal(&diag), margin: 0 })
}

/// `Lambda^{n,m} = (a^+)^n Delta^m` from its band formula:
/// entry `(j+n, j) = prod_{i=1}^{n} sqrt([j+i]_q) * [j]_q^m`.
pub fn build_lambda(params: &ModelParams, idx: LambdaIndex, dim: usize) -> Result<FockOperator> {
    params.validate()?;
    let n = idx.n as usize;
    if n >= dim {
        return Err(QError::Index(format!("supra-index n = {n} must be below the dimension {dim}")));
    }
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim - n {
        let raise: f64 = (1..=n).map(|i| params.number_eigenvalue((j + i) as u32).sqrt()).product();
        let number = if idx.m == 0 { 1.0 } else { params.number_eigenvalue(j as u32).powi(idx.m as i32) };
        matrix[(j + n, j)] = Complex64::new(raise * number, 0.0);
    }
    Ok(FockOperator { matrix, margin: n })
}

/// `(O + O^+, i (O - O^+))`. The inverse map is `O = (plus - i minus) / 2`.
pub fn hermitian_pair(op: &FockOperator) -> (FockOperator, FockOperator) {
    let dag = op.dagger();
    let plus = FockOperator { matrix: &op.matrix + &dag.matrix, margin: op.margin };
    let minus = FockOperator { matrix: (&op.matrix - &dag.matrix) * Complex64::i(), margin: op.margin };
    (plus, minus)
}

/// Recovers `O` from a Hermitian pair.
pub fn from_hermitian_pair(plus: &FockOperator, minus: &FockOperator) -> Result<FockOperator> {
    plus.check_dims(minus)?;
    Ok(FockOperator {
        matrix: (&plus.matrix - &minus.matrix * Complex64::i()) * Complex64::new(0.5, 0.0),
        margin: plus.margin.max(minus.margin),
    })
}

/// `AB - BA`.
pub fn commutator(a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
    a.check_dims(b)?;
    let matrix = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
    Ok(FockOperator { matrix, margin: a.margin + b.margin })
}

/// `[H, [H, ... [H, O] ... ]]` with `depth` nested commutators.
pub fn multicommutator_matrix(h: &FockOperator, o: &FockOperator, depth: u32) -> Result<FockOperator> {
    h.check_dims(o)?;
    (0..depth).try_fold(o.clone(), |acc, _| commutator(h, &acc))
}

/// `e^{iHt} O e^{-iHt}` for diagonal `H`: entry `(r, c)` picks up
/// `e^{i (E_r - E_c) t}`. `t` is physical time; see [`ModelParams::physical_time`].
pub fn heisenberg_evolve(o: &FockOperator, h: &FockOperator, t: f64) -> Result<FockOperator> {
    o.check_dims(h)?;
    let off = h.max_off_diagonal();
    if off != 0.0 {
        return Err(QError::NonDiagonal(off));
    }
    let energies: Vec<f64> = (0..h.dim()).map(|k| h.matrix[(k, k)].re).collect();
    let mut matrix = o.matrix.clone();
    for c in 0..o.dim() {
        for r in 0..o.dim() {
            let z = matrix[(r, c)];
            if z != Complex64::new(0.0, 0.0) {
                matrix[(r, c)] = z * Complex64::from_polar(1.0, (energies[r] - energies[c]) * t);
            }
        }
    }
    Ok(FockOperator { matrix, margin: o.margin })
}

/// Normwise relative difference `max |A - B| / max |B|` over interior
/// columns (the larger of the two margins applies).
///
/// Normwise rather than entrywise: for `q < 1` the high levels are nearly
/// degenerate and entrywise relative error of a literal commutator there is
/// pure cancellation noise.
pub fn interior_relative_error(computed: &FockOperator, reference: &FockOperator) -> Result<f64> {
    computed.check_dims(reference)?;
    let margin = computed.margin.max(reference.margin);
    Ok(interior_relative_error_with_margin(computed, reference, margin))
}

pub fn interior_relative_error_with_margin(computed: &FockOperator, reference: &FockOperator, margin: usize) -> f64 {
    let dim = computed.dim();
    let cols = dim.saturating_sub(margin);
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for c in 0..cols {
        for r in 0..dim {
            diff = diff.max((computed.matrix[(r, c)] - reference.matrix[(r, c)]).norm());
            scale = scale.max(reference.matrix[(r, c)].norm());
        }
    }
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

/// Largest entry magnitude on the single nonzero band of `Lambda^{n,m}` at
/// each dimension. For `q < 1` this saturates as `dim` grows, for `q > 1` it
/// does not; a finite-size view of the boundedness question only.
pub fn band_growth(params: &ModelParams, idx: LambdaIndex, dims: &[usize]) -> Result<Vec<(usize, f64)>> {
    dims.iter()
        .map(|&d| {
            let op = build_lambda(params, idx, d)?;
            let max = op.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((d, max))
        })
        .collect()
}

/// Pure state on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: DVector<Complex64>,
    tail_bound: f64,
}

impl FockState {
    pub fn new(amplitudes: DVector<Complex64>, tail_bound: f64) -> Self {
        Self { amplitudes, tail_bound }
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes, tail_bound: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Certified bound on the probability mass beyond the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `max_k |sqrt(n_{k+1}) c_{k+1} - alpha c_k| / max_k |c_k|` over the
    /// first `dim - 1` components.
    pub fn eigen_residual(&self, params: &ModelParams, alpha: Complex64) -> f64 {
        let c = &self.amplitudes;
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let worst = (0..self.dim() - 1)
            .map(|k| (c[k + 1] * params.number_eigenvalue(k as u32 + 1).sqrt() - alpha * c[k]).norm())
            .fold(0.0, f64::max);
        worst / scale
    }
}

/// Tolerance on the eigenvalue relation `a |alpha> = alpha |alpha>`.
pub const EIGEN_TOL: f64 = 1e-10;

/// Coherent state of the model's annihilator: `c_k ∝ alpha^k / sqrt([k]_q!)`
/// (classical `k!` for the bosonic model), normalized with the full
/// `exp_q(|alpha|^2)`.
pub fn coherent_state(params: &ModelParams, alpha: Complex64, dim: usize, tol: f64) -> Result<FockState> {
    params.validate()?;
    require_dim(dim)?;
    let q = params.deformation();
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return Ok(FockState::vacuum(dim));
    }
    let dist = qcore::q_poisson_weights(x, q, tol)?;
    if dist.len() > dim {
        return Err(QError::Truncation(format!(
            "coherent state with |alpha|^2 = {x} needs more than {dim} levels for tail < {tol}"
        )));
    }
    let ln_norm = -dist.weights()[0].ln();
    let (ln_r, phase) = (alpha.norm().ln(), alpha.arg());
    let mut ln_fact = 0.0;
    let mut amplitudes = DVector::<Complex64>::zeros(dim);
    for k in 0..dim {
        if k > 0 {
            ln_fact += params.number_eigenvalue(k as u32).ln();
        }
        let modulus = (k as f64 * ln_r - 0.5 * ln_fact - 0.5 * ln_norm).exp();
        amplitudes[k] = Complex64::from_polar(modulus, k as f64 * phase);
    }
    // Certified tail beyond the last level: ratios x / n_{k+1} are nonincreasing.
    let ln_next = dim as f64 * x.ln() - ln_fact - params.number_eigenvalue(dim as u32).ln() - ln_norm;
    let ratio = x / params.number_eigenvalue(dim as u32 + 1);
    let tail_bound = if ratio < 1.0 { ln_next.exp() / (1.0 - ratio) } else { dist.tail_bound() };
    let state = FockState { amplitudes, tail_bound: tail_bound.min(dist.tail_bound()) };
    let residual = state.eigen_residual(params, alpha);
    if residual > EIGEN_TOL {
        return Err(QError::Truncation(format!("coherent state eigen-residual {residual:e} exceeds {EIGEN_TOL:e}")));
    }
    Ok(state)
}

/// Smallest dimension (at least `min_dim`) whose coherent-state tail is below `tol`.
pub fn coherent_dimension(params: &ModelParams, alpha: Complex64, tol: f64, min_dim: usize) -> Result<usize> {
    let dist = qcore::q_poisson_weights(alpha.norm_sqr(), params.deformation(), tol)?;
    Ok(dist.len().max(min_dim).max(2))
}

/// `<psi|O|psi>` with an estimate of the error from the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: Complex64,
    /// `tail_bound * max column 1-norm of O`; heuristic, since `O` may be unbounded.
    pub tail_estimate: f64,
}

pub fn expectation(state: &FockState, op: &FockOperator) -> Result<Expectation> {
    if state.dim() != op.dim() {
        return Err(QError::Dimension(format!("state has {} levels, operator {}", state.dim(), op.dim())));
    }
    let psi = &state.amplitudes;
    let value = psi.dotc(&(&op.matrix * psi));
    let col_norm = (0..op.dim())
        .map(|c| op.matrix.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(Expectation { value, tail_estimate: state.tail_bound * col_norm })
}
