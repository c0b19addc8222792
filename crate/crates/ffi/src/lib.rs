//! C ABI for `qdeform`.
//!
//! Fallible functions return a [`QdStatus`] and write results through out
//! pointers. On failure the message is available from [`qd_last_error`]
//! until the next failing call on the same thread. Objects created here are
//! opaque handles released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use qdeform::dynamics::{self, TimeSeries};
use qdeform::fock::{self, FockOperator};
use qdeform::qcore::{self, WeightDistribution};
use qdeform::{algebra, isomap, LambdaIndex, ModelParams, QError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Convergence = 3,
    Dimension = 4,
    Index = 5,
    Truncation = 6,
    NonDiagonal = 7,
    ZeroElement = 8,
    Unwrap = 9,
    Panic = 10,
}

impl From<&QError> for QdStatus {
    fn from(e: &QError) -> Self {
        match e {
            QError::Domain(_) => QdStatus::Domain,
            QError::Convergence(_) => QdStatus::Convergence,
            QError::Dimension(_) => QdStatus::Dimension,
            QError::Index(_) => QdStatus::Index,
            QError::Truncation(_) => QdStatus::Truncation,
            QError::NonDiagonal(_) => QdStatus::NonDiagonal,
            QError::ZeroElement { .. } => QdStatus::ZeroElement,
            QError::Unwrap { .. } => QdStatus::Unwrap,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdModelKind {
    QOsc = 0,
    Anharmonic = 1,
}

/// Model parameters. `q`/`omega_q` are read for the q-oscillator,
/// `omega1`/`omega2` for the anharmonic model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdModel {
    pub kind: QdModelKind,
    pub q: f64,
    pub omega_q: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl QdModel {
    fn params(&self) -> Result<ModelParams, QError> {
        match self.kind {
            QdModelKind::QOsc => ModelParams::q_osc(self.q, self.omega_q),
            QdModelKind::Anharmonic => ModelParams::anharmonic(self.omega1, self.omega2),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QdIsoMap {
    pub n: u32,
    pub q: f64,
    pub omega_q: f64,
    pub p_n: f64,
}

/// Expectation values on a time grid.
pub struct QdTimeSeries(TimeSeries);

/// A discrete probability distribution.
pub struct QdWeights(WeightDistribution);

/// A dense operator on a truncated Fock space.
pub struct QdOperator(FockOperator);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), QError>) -> QdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            QdStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QdStatus::Panic
        }
    }
}

macro_rules! require {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument");
            return QdStatus::NullPointer;
        }
    };
}

unsafe fn grid<'a>(times: *const f64, len: usize) -> &'a [f64] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(times, len)
    }
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn qd_model_qosc(q: f64, omega_q: f64) -> QdModel {
    QdModel { kind: QdModelKind::QOsc, q, omega_q, omega1: 0.0, omega2: 0.0 }
}

#[no_mangle]
pub extern "C" fn qd_model_anharmonic(omega1: f64, omega2: f64) -> QdModel {
    QdModel { kind: QdModelKind::Anharmonic, q: 1.0, omega_q: 0.0, omega1, omega2 }
}

/// `[n]_q`; defined for every real `q`.
#[no_mangle]
pub extern "C" fn qd_q_number(n: u32, q: f64) -> f64 {
    qcore::q_number(n, q)
}

/// `ln([n]_q!)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_q_factorial_ln(n: u32, q: f64, out: *mut f64) -> QdStatus {
    require!(out);
    guard(|| {
        *out = qcore::q_factorial(n, q)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_q_exponential(x: f64, q: f64, out: *mut f64) -> QdStatus {
    require!(out);
    guard(|| {
        *out = qcore::q_exponential(x, q)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_q_stirling2(s: u32, m: u32, q: f64, out: *mut f64) -> QdStatus {
    require!(out);
    guard(|| {
        *out = qcore::q_stirling2(s, m, q)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qd_stirling2(r: u32, m: u32) -> f64 {
    qcore::stirling2(r, m)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_map_to_q(omega1: f64, omega2: f64, n: u32, out: *mut QdIsoMap) -> QdStatus {
    require!(out);
    guard(|| {
        let m = isomap::map_to_q(omega1, omega2, n)?;
        *out = QdIsoMap { n: m.n, q: m.q_of_n, omega_q: m.omega_q, p_n: m.p_n };
        Ok(())
    })
}

/// Largest of the isomorphism residuals for `j <= j_max`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_isomorphism_residual(omega1: f64, omega2: f64, n: u32, j_max: u32, out: *mut f64) -> QdStatus {
    require!(out);
    guard(|| {
        *out = isomap::isomorphism_residuals(omega1, omega2, n, j_max)?.max();
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_relation_identity_residual(x: f64, q: f64, m: u32, out: *mut f64) -> QdStatus {
    require!(out);
    guard(|| {
        *out = dynamics::relation_identity_residual(x, q, m)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_scaling_phase_check(
    model: QdModel,
    n: u32,
    m: u32,
    tau: f64,
    j_col: usize,
    dim: usize,
    out: *mut f64,
) -> QdStatus {
    require!(out);
    guard(|| {
        *out = algebra::scaling_phase_check(&model.params()?, LambdaIndex::new(n, m), tau, j_col, dim)?;
        Ok(())
    })
}

// ---- weights ----

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_q_poisson_weights(alpha_sq: f64, q: f64, tol: f64, out: *mut *mut QdWeights) -> QdStatus {
    require!(out);
    guard(|| {
        let w = qcore::q_poisson_weights(alpha_sq, q, tol)?;
        *out = Box::into_raw(Box::new(QdWeights(w)));
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_binomial_weights(j: u32, p: f64, out: *mut *mut QdWeights) -> QdStatus {
    require!(out);
    guard(|| {
        let w = qcore::binomial_weights(j, p)?;
        *out = Box::into_raw(Box::new(QdWeights(w)));
        Ok(())
    })
}

/// # Safety
/// `w` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_weights_len(w: *const QdWeights) -> usize {
    w.as_ref().map_or(0, |w| w.0.len())
}

/// # Safety
/// `w` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_weights_tail_bound(w: *const QdWeights) -> f64 {
    w.as_ref().map_or(f64::NAN, |w| w.0.tail_bound())
}

/// # Safety
/// `w` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_weights_get(w: *const QdWeights, k: usize, out: *mut f64) -> QdStatus {
    require!(w, out);
    guard(|| {
        let weights = (*w).0.weights();
        *out = *weights
            .get(k)
            .ok_or_else(|| QError::Index(format!("weight {k} out of range (len {})", weights.len())))?;
        Ok(())
    })
}

/// # Safety
/// `w` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn qd_weights_free(w: *mut QdWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

// ---- time series ----

type Evolver = fn(&ModelParams, Complex64, LambdaIndex, &[f64], f64) -> Result<TimeSeries, QError>;

#[allow(clippy::too_many_arguments)]
unsafe fn evolve_into(
    f: Evolver,
    model: QdModel,
    alpha_re: f64,
    alpha_im: f64,
    n: u32,
    m: u32,
    times: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut QdTimeSeries,
) -> QdStatus {
    require!(out);
    if len > 0 {
        require!(times);
    }
    guard(|| {
        let ts = f(&model.params()?, Complex64::new(alpha_re, alpha_im), LambdaIndex::new(n, m), grid(times, len), tol)?;
        *out = Box::into_raw(Box::new(QdTimeSeries(ts)));
        Ok(())
    })
}

/// `<alpha| Lambda^{n,m}(tau) |alpha>` for the q-oscillator at dimensionless times.
///
/// # Safety
/// `times` must point to `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_evolve_q(
    model: QdModel,
    alpha_re: f64,
    alpha_im: f64,
    n: u32,
    m: u32,
    times: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut QdTimeSeries,
) -> QdStatus {
    evolve_into(dynamics::evolve_q_expectation, model, alpha_re, alpha_im, n, m, times, len, tol, out)
}

/// Series form for the anharmonic model.
///
/// # Safety
/// `times` must point to `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_evolve_anharmonic(
    model: QdModel,
    alpha_re: f64,
    alpha_im: f64,
    n: u32,
    m: u32,
    times: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut QdTimeSeries,
) -> QdStatus {
    evolve_into(dynamics::evolve_anharmonic_expectation, model, alpha_re, alpha_im, n, m, times, len, tol, out)
}

/// Closed form for the anharmonic model.
///
/// # Safety
/// `times` must point to `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_evolve_anharmonic_closed(
    model: QdModel,
    alpha_re: f64,
    alpha_im: f64,
    n: u32,
    m: u32,
    times: *const f64,
    len: usize,
    out: *mut *mut QdTimeSeries,
) -> QdStatus {
    fn closed(p: &ModelParams, a: Complex64, i: LambdaIndex, t: &[f64], _tol: f64) -> Result<TimeSeries, QError> {
        dynamics::evolve_anharmonic_closed(p, a, i, t)
    }
    evolve_into(closed, model, alpha_re, alpha_im, n, m, times, len, 1.0, out)
}

/// # Safety
/// `ts` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_time_series_len(ts: *const QdTimeSeries) -> usize {
    ts.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `ts` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_time_series_truncation_tail(ts: *const QdTimeSeries) -> f64 {
    ts.as_ref().map_or(f64::NAN, |t| t.0.truncation_tail)
}

/// Time and value at index `i`.
///
/// # Safety
/// `ts` must be a live handle; out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_time_series_get(
    ts: *const QdTimeSeries,
    i: usize,
    time: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> QdStatus {
    require!(ts, time, re, im);
    guard(|| {
        let s = &(*ts).0;
        if i >= s.len() {
            return Err(QError::Index(format!("sample {i} out of range (len {})", s.len())));
        }
        *time = s.times[i];
        *re = s.values[i].re;
        *im = s.values[i].im;
        Ok(())
    })
}

/// # Safety
/// `ts` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn qd_time_series_free(ts: *mut QdTimeSeries) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

// ---- operators ----

unsafe fn store(out: *mut *mut QdOperator, op: FockOperator) {
    *out = Box::into_raw(Box::new(QdOperator(op)));
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_hamiltonian(model: QdModel, dim: usize, out: *mut *mut QdOperator) -> QdStatus {
    require!(out);
    guard(|| {
        store(out, fock::build_hamiltonian(&model.params()?, dim)?);
        Ok(())
    })
}

/// `Lambda^{n,m} = (a^+)^n (a^+ a)^m` on `dim` levels.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_lambda(model: QdModel, n: u32, m: u32, dim: usize, out: *mut *mut QdOperator) -> QdStatus {
    require!(out);
    guard(|| {
        store(out, fock::build_lambda(&model.params()?, LambdaIndex::new(n, m), dim)?);
        Ok(())
    })
}

/// `[a, b]`.
///
/// # Safety
/// `a`, `b` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_commutator(a: *const QdOperator, b: *const QdOperator, out: *mut *mut QdOperator) -> QdStatus {
    require!(a, b, out);
    guard(|| {
        store(out, fock::commutator(&(*a).0, &(*b).0)?);
        Ok(())
    })
}

/// `depth` nested commutators `[h, [h, ... [h, o]]]`.
///
/// # Safety
/// `h`, `o` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_multicommutator(
    h: *const QdOperator,
    o: *const QdOperator,
    depth: u32,
    out: *mut *mut QdOperator,
) -> QdStatus {
    require!(h, o, out);
    guard(|| {
        store(out, fock::multicommutator_matrix(&(*h).0, &(*o).0, depth)?);
        Ok(())
    })
}

/// `e^{iHt} O e^{-iHt}` for a diagonal `h`, `t` in physical time.
///
/// # Safety
/// `o`, `h` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_evolve(o: *const QdOperator, h: *const QdOperator, t: f64, out: *mut *mut QdOperator) -> QdStatus {
    require!(o, h, out);
    guard(|| {
        store(out, fock::heisenberg_evolve(&(*o).0, &(*h).0, t)?);
        Ok(())
    })
}

/// # Safety
/// `op` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_dim(op: *const QdOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Number of top columns affected by truncation.
///
/// # Safety
/// `op` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_margin(op: *const QdOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.margin())
}

/// # Safety
/// `op` must be a live handle; out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_entry(op: *const QdOperator, row: usize, col: usize, re: *mut f64, im: *mut f64) -> QdStatus {
    require!(op, re, im);
    guard(|| {
        let o = &(*op).0;
        if row >= o.dim() || col >= o.dim() {
            return Err(QError::Index(format!("entry ({row}, {col}) outside a {0}x{0} operator", o.dim())));
        }
        let z = o.entry(row, col);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Normwise relative difference over interior columns, `reference` in the denominator.
///
/// # Safety
/// Both must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_interior_relative_error(
    computed: *const QdOperator,
    reference: *const QdOperator,
    out: *mut f64,
) -> QdStatus {
    require!(computed, reference, out);
    guard(|| {
        *out = fock::interior_relative_error(&(*computed).0, &(*reference).0)?;
        Ok(())
    })
}

/// # Safety
/// `op` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn qd_operator_free(op: *mut QdOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}
