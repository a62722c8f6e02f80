//! C interface to `quench-krylov`.
//!
//! Every fallible call returns a [`QkStatus`]; on failure a description is
//! kept per thread and can be read with [`qk_last_error_message`]. Objects
//! are handed out as opaque pointers that must be released with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quench_krylov::bell::moments_from_cumulants;
use quench_krylov::chain::{mode_lanczos, ModePair};
use quench_krylov::fieldtheory::{cumulant_density, FieldQuench};
use quench_krylov::krylov::{evolve, spread_complexity, survival_from_phi, EvolveOptions};
use quench_krylov::lanczos::{hamiltonian_moments, lanczos_adaptive, lanczos_from_moments, HamiltonianMoments, LanczosCoefficients};
use quench_krylov::scalar::{Complex, Real, DEFAULT_PRECISION_BITS};
use quench_krylov::workstats::{
    characteristic_function, mean_and_variance, oscillator_overlaps, survival_probability, work_moments, Convention,
    WorkSpectrum,
};
use quench_krylov::Error;

/// Energies are post-quench eigenvalues.
pub const QK_CONVENTION_HAMILTONIAN: u32 = 0;
/// Energies are measured from the pre-quench ground energy.
pub const QK_CONVENTION_WORK: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Precision = 4,
    Divergence = 5,
    Truncation = 6,
    Quadrature = 7,
    CrossCheck = 8,
    BufferTooSmall = 9,
    Internal = 10,
    Panic = 11,
}

/// Lanczos coefficients a₀..a_{K−1}, b₁..b_{K−1}.
pub struct QkLanczos {
    inner: LanczosCoefficients<f64>,
}

/// Discrete work distribution of a quench.
pub struct QkSpectrum {
    inner: WorkSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Argument(_) => QkStatus::InvalidArgument,
            Error::Domain(_) => QkStatus::Domain,
            Error::Precision { .. } => QkStatus::Precision,
            Error::Divergence(_) => QkStatus::Divergence,
            Error::Truncation(_) => QkStatus::Truncation,
            Error::Quadrature { .. } => QkStatus::Quadrature,
            Error::CrossCheck(_) => QkStatus::CrossCheck,
            _ => QkStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: QkStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            QkStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return fail(QkStatus::NullPointer, format!("{name} is null"));
    }
    Ok(())
}

/// # Safety
/// `p` must be null only when `len` is 0, otherwise valid for `len` reads.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `dst` must be valid for `cap` writes when `src` is non-empty.
unsafe fn copy_out(src: &[f64], dst: *mut f64, cap: usize, name: &str) -> Result<(), Failure> {
    if src.is_empty() {
        return Ok(());
    }
    non_null(dst, name)?;
    if cap < src.len() {
        return fail(QkStatus::BufferTooSmall, format!("{name} holds {cap} values, need {}", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn bits_or_default(bits: u32) -> usize {
    if bits == 0 {
        DEFAULT_PRECISION_BITS
    } else {
        bits as usize
    }
}

fn convention(c: u32) -> Result<Convention, Failure> {
    match c {
        QK_CONVENTION_HAMILTONIAN => Ok(Convention::Hamiltonian),
        QK_CONVENTION_WORK => Ok(Convention::Work),
        _ => fail(QkStatus::InvalidArgument, format!("unknown convention {c}")),
    }
}

fn hand_out<T>(value: T, out: *mut *mut T) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn qk_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qk_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// K Lanczos coefficients from Hamiltonian moments h₀ = 1, h₁, … (at least 2K
/// of them). The recursion runs at `precision_bits` (0 for the default) and
/// doubles the precision when cancellation demands it.
///
/// # Safety
/// `moments` must point to `count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_from_moments(
    moments: *const f64,
    count: usize,
    k: usize,
    precision_bits: u32,
    out: *mut *mut QkLanczos,
) -> QkStatus {
    guard(|| {
        non_null(out, "out")?;
        let h = slice(moments, count, "moments")?;
        if h.iter().any(|x| !x.is_finite()) {
            return fail(QkStatus::InvalidArgument, "moments must be finite");
        }
        let lc = lanczos_adaptive(k, bits_or_default(precision_bits), |bits| {
            Ok(HamiltonianMoments(h.iter().map(|&x| Real::from_f64(x, bits)).collect()))
        })?;
        hand_out(QkLanczos { inner: lc.to_f64() }, out);
        Ok(())
    })
}

/// Closed-form coefficients of a single oscillator quenched from `omega0` to
/// `omega1`, first `k` sites.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_oscillator(omega0: f64, omega1: f64, k: usize, out: *mut *mut QkLanczos) -> QkStatus {
    guard(|| {
        non_null(out, "out")?;
        let lc = mode_lanczos(&ModePair::new(omega0, omega1), k)?;
        hand_out(QkLanczos { inner: lc }, out);
        Ok(())
    })
}

/// Coefficients given directly; `len_b` must be `len_a − 1`.
///
/// # Safety
/// `a` and `b` must point to `len_a` and `len_b` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_from_ab(
    a: *const f64,
    len_a: usize,
    b: *const f64,
    len_b: usize,
    terminated: bool,
    out: *mut *mut QkLanczos,
) -> QkStatus {
    guard(|| {
        non_null(out, "out")?;
        let a = slice(a, len_a, "a")?.to_vec();
        let b = slice(b, len_b, "b")?.to_vec();
        let lc = LanczosCoefficients::from_ab(a, b, terminated)?;
        hand_out(QkLanczos { inner: lc }, out);
        Ok(())
    })
}

/// Number of a-coefficients (0 for NULL).
///
/// # Safety
/// `lc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_len(lc: *const QkLanczos) -> usize {
    lc.as_ref().map_or(0, |l| l.inner.a.len())
}

/// # Safety
/// `lc` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_terminated(lc: *const QkLanczos, out: *mut bool) -> QkStatus {
    guard(|| {
        non_null(lc, "lc")?;
        non_null(out, "out")?;
        *out = (*lc).inner.terminated;
        Ok(())
    })
}

/// Copies a₀..a_{K−1} into `buf`, which holds `cap` doubles.
///
/// # Safety
/// `lc` must be a live handle and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_copy_a(lc: *const QkLanczos, buf: *mut f64, cap: usize) -> QkStatus {
    guard(|| {
        non_null(lc, "lc")?;
        copy_out(&(*lc).inner.a, buf, cap, "buf")
    })
}

/// Copies b₁..b_{K−1} into `buf`, which holds `cap` doubles.
///
/// # Safety
/// `lc` must be a live handle and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_copy_b(lc: *const QkLanczos, buf: *mut f64, cap: usize) -> QkStatus {
    guard(|| {
        non_null(lc, "lc")?;
        copy_out(&(*lc).inner.b(), buf, cap, "buf")
    })
}

/// Spread complexity and survival probability of e₀ evolved on the chain at
/// each of the `count` non-decreasing `times`. `survival` may be NULL.
/// A chain that is not terminated is truncated adaptively to `tol`.
///
/// # Safety
/// `lc` must be a live handle; `times`, `complexity` and a non-null
/// `survival` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_evolve(
    lc: *const QkLanczos,
    times: *const f64,
    count: usize,
    tol: f64,
    complexity: *mut f64,
    survival: *mut f64,
) -> QkStatus {
    guard(|| {
        non_null(lc, "lc")?;
        let t = slice(times, count, "times")?;
        if count > 0 {
            non_null(complexity, "complexity")?;
        }
        let opts = EvolveOptions { tol, ..EvolveOptions::default() };
        let states = evolve(&(*lc).inner, t, &opts)?;
        for (i, s) in states.iter().enumerate() {
            *complexity.add(i) = spread_complexity(s);
            if !survival.is_null() {
                *survival.add(i) = survival_from_phi(s);
            }
        }
        Ok(())
    })
}

/// # Safety
/// `lc` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qk_lanczos_free(lc: *mut QkLanczos) {
    if !lc.is_null() {
        drop(Box::from_raw(lc));
    }
}

/// Work spectrum of a single oscillator quenched from `omega0` to `omega1`,
/// truncated once less than `tail_tol` of the probability remains.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_oscillator(
    omega0: f64,
    omega1: f64,
    tail_tol: f64,
    convention_id: u32,
    precision_bits: u32,
    out: *mut *mut QkSpectrum,
) -> QkStatus {
    guard(|| {
        non_null(out, "out")?;
        let c = convention(convention_id)?;
        let spec = oscillator_overlaps(omega0, omega1, tail_tol, c, bits_or_default(precision_bits))?;
        hand_out(QkSpectrum { inner: spec }, out);
        Ok(())
    })
}

/// Number of spectral lines (0 for NULL).
///
/// # Safety
/// `spec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_len(spec: *const QkSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.lines().len())
}

/// Copies line energies and probabilities; both buffers hold `cap` doubles.
///
/// # Safety
/// `spec` must be a live handle; `energies` and `weights` valid for `cap`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_copy_lines(
    spec: *const QkSpectrum,
    energies: *mut f64,
    weights: *mut f64,
    cap: usize,
) -> QkStatus {
    guard(|| {
        non_null(spec, "spec")?;
        let lines = (*spec).inner.lines();
        let e: Vec<f64> = lines.iter().map(|l| l.energy.to_f64()).collect();
        let w: Vec<f64> = lines.iter().map(|l| l.weight.to_f64()).collect();
        copy_out(&e, energies, cap, "energies")?;
        copy_out(&w, weights, cap, "weights")
    })
}

/// Mean and variance of the work.
///
/// # Safety
/// `spec` must be a live handle; `mean` and `variance` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_mean_variance(spec: *const QkSpectrum, mean: *mut f64, variance: *mut f64) -> QkStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(mean, "mean")?;
        non_null(variance, "variance")?;
        let (m, v) = mean_and_variance(&(*spec).inner);
        *mean = m.to_f64();
        *variance = v.to_f64();
        Ok(())
    })
}

/// Characteristic function G(t) = Σ p e^{−iWt} as (re, im).
///
/// # Safety
/// `spec` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_characteristic(spec: *const QkSpectrum, t: f64, re: *mut f64, im: *mut f64) -> QkStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let g = characteristic_function(&(*spec).inner, t);
        *re = g.re;
        *im = g.im;
        Ok(())
    })
}

/// Survival probability |G(t)|².
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_survival(spec: *const QkSpectrum, t: f64, out: *mut f64) -> QkStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        *out = survival_probability(&(*spec).inner, t);
        Ok(())
    })
}

/// K Lanczos coefficients from the spectrum's moments, computed at the
/// spectrum's precision; `tol` bounds the moment truncation error.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_lanczos(spec: *const QkSpectrum, k: usize, tol: f64, out: *mut *mut QkLanczos) -> QkStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        let moments = work_moments(&(*spec).inner, 2 * k, tol)?;
        let lc = lanczos_from_moments(&hamiltonian_moments(&moments)?, k)?;
        hand_out(QkLanczos { inner: lc.to_f64() }, out);
        Ok(())
    })
}

/// # Safety
/// `spec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qk_spectrum_free(spec: *mut QkSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// n-th work cumulant per unit volume of a free-boson mass quench m0 → m1 in
/// `dim` dimensions with momentum cutoff `cutoff`. `divergent` (may be NULL)
/// reports whether the value grows with the cutoff.
///
/// # Safety
/// `value` must be writable; `divergent` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn qk_field_cumulant_density(
    dim: u32,
    m0: f64,
    m1: f64,
    cutoff: f64,
    n: u32,
    value: *mut f64,
    divergent: *mut bool,
) -> QkStatus {
    guard(|| {
        non_null(value, "value")?;
        let c = cumulant_density(&FieldQuench::new(dim as usize, m0, m1, cutoff), n as usize)?;
        *value = c.value;
        if !divergent.is_null() {
            *divergent = c.divergent;
        }
        Ok(())
    })
}

/// Moments M₀..M_{n_max} from cumulants β₁..β_count. Complex numbers are
/// interleaved (re, im); `moments` holds 2·(n_max + 1) doubles. Missing
/// cumulants above `count` are zero.
///
/// # Safety
/// `cumulants` must hold 2·`count` doubles and `moments` 2·(`n_max` + 1).
#[no_mangle]
pub unsafe extern "C" fn qk_moments_from_cumulants(
    cumulants: *const f64,
    count: usize,
    n_max: usize,
    moments: *mut f64,
) -> QkStatus {
    guard(|| {
        if count == 0 {
            return fail(QkStatus::InvalidArgument, "no cumulants");
        }
        let raw = slice(cumulants, 2 * count, "cumulants")?;
        non_null(moments, "moments")?;
        let mut beta: Vec<Complex<f64>> = raw.chunks(2).map(|c| Complex::new(c[0], c[1])).collect();
        beta.resize(n_max.max(count), Complex::new(0.0, 0.0));
        let m = moments_from_cumulants(&beta, n_max)?;
        for (i, z) in m.iter().enumerate() {
            *moments.add(2 * i) = z.re;
            *moments.add(2 * i + 1) = z.im;
        }
        Ok(())
    })
}
