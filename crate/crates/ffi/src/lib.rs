//! C ABI for `nuspec`.
//!
//! Potentials and spectra live behind opaque handles created by `nu_*`
//! constructors and released by the matching `*_free` function. Every
//! fallible function returns a [`NuStatus`]; on failure a message is stored
//! per thread and can be read with [`nu_last_error_message`]. Strings
//! returned by the library are released with [`nu_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nuspec::oracle;
use nuspec::potentials::{self, PotentialSpec};
use nuspec::spectra::{self, RealityFlag, SpectrumResult};
use nuspec::Error;

/// Result codes of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    InvalidArgument = 4,
    Singularity = 5,
    Unsupported = 6,
    NotConverged = 7,
    NoAdmissibleBranch = 8,
    IndexOutOfRange = 9,
    Panic = 10,
}

/// Reality classification of a spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuRealityFlag {
    AllReal = 0,
    ConditionallyReal = 1,
    Complex = 2,
}

/// Complex number with the memory layout of C99 `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NuComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque potential handle.
pub struct NuPotential {
    spec: PotentialSpec,
}

/// Opaque spectrum handle.
pub struct NuSpectrum {
    result: SpectrumResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(error: &Error) -> NuStatus {
    match error {
        Error::InvalidSpec(_) => NuStatus::InvalidSpec,
        Error::Singularity { .. } | Error::SingularNodes { .. } => NuStatus::Singularity,
        Error::UnsupportedFamily(_)
        | Error::UnsupportedVariant(_)
        | Error::UnsupportedTransform { .. } => NuStatus::Unsupported,
        Error::NoAdmissibleBranch { .. } => NuStatus::NoAdmissibleBranch,
        Error::RootNotConverged { .. }
        | Error::BranchMismatch { .. }
        | Error::EigenNotConverged { .. }
        | Error::CertificationFailed { .. }
        | Error::DegenerateDiscriminant
        | Error::NonIntegrableWeight(_)
        | Error::NotNormalizable(_) => NuStatus::NotConverged,
        Error::Degree | Error::InvalidArgument(_) => NuStatus::InvalidArgument,
    }
}

fn fail(status: NuStatus, message: &str) -> NuStatus {
    set_error(message);
    status
}

fn from_error(error: Error) -> NuStatus {
    fail(status_of(&error), &error.to_string())
}

/// Runs `f`, converting panics into [`NuStatus::Panic`].
fn guard(f: impl FnOnce() -> NuStatus) -> NuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NuStatus::Panic, "internal panic"),
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread (empty if none).
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nu_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON potential spec.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_potential_from_json(
    json: *const c_char,
    out: *mut *mut NuPotential,
) -> NuStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(NuStatus::InvalidUtf8, "spec is not valid UTF-8");
        };
        match PotentialSpec::from_json(text) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(NuPotential { spec }));
                NuStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Canonical JSON of the potential spec; release with [`nu_string_free`].
///
/// # Safety
/// `potential` must come from [`nu_potential_from_json`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nu_potential_to_json(
    potential: *const NuPotential,
    out: *mut *mut c_char,
) -> NuStatus {
    guard(|| {
        if potential.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = into_c_string((*potential).spec.to_canonical_json());
        NuStatus::Ok
    })
}

/// Releases a potential handle. Null is ignored.
///
/// # Safety
/// `potential` must come from [`nu_potential_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nu_potential_free(potential: *mut NuPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// `V(x)`.
///
/// # Safety
/// `potential` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_potential_evaluate(
    potential: *const NuPotential,
    x: f64,
    out: *mut NuComplex,
) -> NuStatus {
    guard(|| {
        if potential.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        match potentials::evaluate(&(*potential).spec, x) {
            Ok(v) => {
                *out = NuComplex { re: v.re, im: v.im };
                NuStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

unsafe fn spectrum_with(
    potential: *const NuPotential,
    out: *mut *mut NuSpectrum,
    f: impl FnOnce(&PotentialSpec) -> nuspec::Result<SpectrumResult>,
) -> NuStatus {
    guard(|| {
        if potential.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        match f(&(*potential).spec) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(NuSpectrum { result }));
                NuStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Closed-form levels `0..=n_max`.
///
/// # Safety
/// `potential` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_closed_form(
    potential: *const NuPotential,
    n_max: u32,
    out: *mut *mut NuSpectrum,
) -> NuStatus {
    spectrum_with(potential, out, |s| spectra::closed_form_spectrum(s, n_max))
}

/// Levels `0..=n_max` from the numerical Nikiforov-Uvarov pipeline.
///
/// # Safety
/// `potential` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_numeric(
    potential: *const NuPotential,
    n_max: u32,
    out: *mut *mut NuSpectrum,
) -> NuStatus {
    spectrum_with(potential, out, |s| nuspec::nu::solve_spectrum_numeric(s, n_max))
}

/// Releases a spectrum handle. Null is ignored.
///
/// # Safety
/// `spectrum` must come from a `nu_spectrum_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_free(spectrum: *mut NuSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of levels.
///
/// # Safety
/// `spectrum` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_len(spectrum: *const NuSpectrum, out: *mut usize) -> NuStatus {
    guard(|| {
        if spectrum.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = (*spectrum).result.entries.len();
        NuStatus::Ok
    })
}

/// Energy of the level at position `index`.
///
/// # Safety
/// `spectrum` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_energy(
    spectrum: *const NuSpectrum,
    index: usize,
    out: *mut NuComplex,
) -> NuStatus {
    guard(|| {
        if spectrum.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        let spectrum = &*spectrum;
        match spectrum.result.entries.get(index) {
            Some(e) => {
                *out = NuComplex { re: e.re, im: e.im };
                NuStatus::Ok
            }
            None => fail(NuStatus::IndexOutOfRange, "level index out of range"),
        }
    })
}

/// Reality flag of the spectrum.
///
/// # Safety
/// `spectrum` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_reality_flag(
    spectrum: *const NuSpectrum,
    out: *mut NuRealityFlag,
) -> NuStatus {
    guard(|| {
        if spectrum.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = match (*spectrum).result.reality_flag {
            RealityFlag::AllReal => NuRealityFlag::AllReal,
            RealityFlag::ConditionallyReal => NuRealityFlag::ConditionallyReal,
            RealityFlag::Complex => NuRealityFlag::Complex,
        };
        NuStatus::Ok
    })
}

/// JSON of the spectrum; release with [`nu_string_free`].
///
/// # Safety
/// `spectrum` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nu_spectrum_to_json(
    spectrum: *const NuSpectrum,
    out: *mut *mut c_char,
) -> NuStatus {
    guard(|| {
        if spectrum.is_null() || out.is_null() {
            return fail(NuStatus::NullPointer, "null argument");
        }
        *out = into_c_string((*spectrum).result.to_json());
        NuStatus::Ok
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Finite-difference eigenvalues on the natural domain of the potential with
/// `n_grid` interior points and truncation length `length`.
///
/// The lowest `min(capacity, total)` eigenvalues (ordered by real part) are
/// copied to `out`; `total` receives the full count. `out` may be null when
/// `capacity` is 0.
///
/// # Safety
/// `potential` must be a live handle, `out` must hold `capacity` elements and
/// `total` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nu_oracle_eigenvalues(
    potential: *const NuPotential,
    n_grid: usize,
    length: f64,
    out: *mut NuComplex,
    capacity: usize,
    total: *mut usize,
) -> NuStatus {
    guard(|| {
        if potential.is_null() || total.is_null() || (out.is_null() && capacity > 0) {
            return fail(NuStatus::NullPointer, "null argument");
        }
        let spec = &(*potential).spec;
        let domain = potentials::natural_domain(spec, length);
        let eigs = match domain
            .validate()
            .and_then(|_| oracle::discretize(spec, &domain, n_grid))
            .and_then(|h| oracle::eigenvalues(&h))
        {
            Ok(e) => e,
            Err(e) => return from_error(e),
        };
        *total = eigs.len();
        for (i, z) in eigs.iter().take(capacity).enumerate() {
            *out.add(i) = NuComplex { re: z.re, im: z.im };
        }
        NuStatus::Ok
    })
}
