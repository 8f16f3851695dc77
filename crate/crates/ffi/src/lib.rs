//! C ABI over `thinorbits`.
//!
//! Every fallible call returns a [`ThinorbitsStatus`] and writes its result through an
//! out pointer. On failure [`thinorbits_last_error`] holds a message for the calling
//! thread. Big integers cross the boundary as decimal strings. Strings handed out by
//! the library are released with [`thinorbits_string_free`] and handles with their
//! own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use thinorbits::{cf_expand, class_group, solve_pell4, solve_pell_neg4, ClassGroupListing, Error, PellSolution, QuadSurd};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThinorbitsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    OutOfRange = 4,
    Panic = 5,
    SquareDiscriminant = 10,
    InvalidDigit = 11,
    NotProper = 12,
    LeadingZero = 13,
    WrongSign = 14,
    BadDiscriminant = 15,
    Imprimitive = 16,
    NotHyperbolic = 17,
    ParabolicAxis = 18,
    DegenerateHit = 19,
    BadGrid = 20,
    BadBound = 21,
    BadLength = 22,
    ZeroFunctional = 23,
    BadKernel = 24,
    Overflow = 25,
    Config = 26,
    NotFound = 27,
}

impl From<&Error> for ThinorbitsStatus {
    fn from(e: &Error) -> Self {
        use ThinorbitsStatus as S;
        match e {
            Error::SquareDiscriminant(_) => S::SquareDiscriminant,
            Error::InvalidDigit(_) => S::InvalidDigit,
            Error::NotProper(_) => S::NotProper,
            Error::LeadingZero => S::LeadingZero,
            Error::WrongSign(_) => S::WrongSign,
            Error::BadDiscriminant(_) => S::BadDiscriminant,
            Error::Imprimitive(_) => S::Imprimitive,
            Error::NotHyperbolic(_) => S::NotHyperbolic,
            Error::ParabolicAxis(_) => S::ParabolicAxis,
            Error::DegenerateHit { .. } => S::DegenerateHit,
            Error::BadGrid(_) => S::BadGrid,
            Error::BadBound(_) => S::BadBound,
            Error::BadLength(_) => S::BadLength,
            Error::ZeroFunctional => S::ZeroFunctional,
            Error::BadKernel(_) => S::BadKernel,
            Error::Overflow(_) => S::Overflow,
            Error::Parse(_) => S::Parse,
            Error::Config(_) => S::Config,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Fail(ThinorbitsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), format!("{}: {e}", e.code()))
    }
}

type Outcome = std::result::Result<(), Fail>;

fn guard(f: impl FnOnce() -> Outcome) -> ThinorbitsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ThinorbitsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ThinorbitsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(ThinorbitsStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> std::result::Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ThinorbitsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn integer(p: *const c_char, what: &str) -> std::result::Result<BigInt, Fail> {
    let s = text(p, what)?.trim();
    s.strip_prefix('+')
        .unwrap_or(s)
        .parse()
        .map_err(|_| Fail(ThinorbitsStatus::Parse, format!("{what}: malformed integer {s:?}")))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Outcome {
    let c = CString::new(s).expect("library strings contain no nul");
    write(out, c.into_raw(), "out")
}

/// Message for the last failed call on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn thinorbits_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `(P + sqrt D) / Q`.
pub struct ThinorbitsSurd(QuadSurd);

/// # Safety
/// `p`, `q`, `d` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_surd_new(
    p: *const c_char,
    q: *const c_char,
    d: *const c_char,
    out: *mut *mut ThinorbitsSurd,
) -> ThinorbitsStatus {
    guard(|| {
        let x = QuadSurd::new(integer(p, "p")?, integer(q, "q")?, integer(d, "d")?)?;
        write(out, Box::into_raw(Box::new(ThinorbitsSurd(x))), "out")
    })
}

/// # Safety
/// `h` must be null or a live handle from [`thinorbits_surd_new`].
#[no_mangle]
pub unsafe extern "C" fn thinorbits_surd_free(h: *mut ThinorbitsSurd) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Truncated decimal expansion with `digits` places.
///
/// # Safety
/// `h` must be a live surd handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_surd_decimal(
    h: *const ThinorbitsSurd,
    digits: u32,
    out: *mut *mut c_char,
) -> ThinorbitsStatus {
    guard(|| {
        let x = h.as_ref().ok_or_else(|| null("surd"))?;
        write_string(out, x.0.to_decimal(digits))
    })
}

/// Continued fraction in the form `[a0;a1,...,(b1,...,bk)]`.
///
/// # Safety
/// `h` must be a live surd handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_surd_continued_fraction(
    h: *const ThinorbitsSurd,
    out: *mut *mut c_char,
) -> ThinorbitsStatus {
    guard(|| {
        let x = h.as_ref().ok_or_else(|| null("surd"))?;
        write_string(out, cf_expand(&x.0).to_string())
    })
}

/// Narrow classes of primitive forms of one discriminant.
pub struct ThinorbitsClassGroup(ClassGroupListing);

/// # Safety
/// `d` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_class_group_new(
    d: *const c_char,
    out: *mut *mut ThinorbitsClassGroup,
) -> ThinorbitsStatus {
    guard(|| {
        let g = class_group(&integer(d, "d")?)?;
        write(out, Box::into_raw(Box::new(ThinorbitsClassGroup(g))), "out")
    })
}

/// # Safety
/// `h` must be null or a live class group handle.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_class_group_free(h: *mut ThinorbitsClassGroup) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Class number; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live class group handle.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_class_group_h(h: *const ThinorbitsClassGroup) -> usize {
    h.as_ref().map_or(0, |g| g.0.h)
}

/// Representative of class `i` as `[A,B,C]`.
///
/// # Safety
/// `h` must be a live class group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_class_group_rep(
    h: *const ThinorbitsClassGroup,
    i: usize,
    out: *mut *mut c_char,
) -> ThinorbitsStatus {
    guard(|| {
        let g = h.as_ref().ok_or_else(|| null("class group"))?;
        let c = g.0.classes.get(i).ok_or_else(|| {
            Fail(ThinorbitsStatus::OutOfRange, format!("class {i} of {}", g.0.h))
        })?;
        write_string(out, c.rep.to_string())
    })
}

/// Fundamental solution of `t^2 - D s^2 = sign * 4`.
pub struct ThinorbitsPell(PellSolution);

/// Least solution with `sign = 4` or `sign = -4`. For `-4` without a solution the
/// status is `NotFound`.
///
/// # Safety
/// `d` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_pell_solve(
    d: *const c_char,
    sign: i32,
    out: *mut *mut ThinorbitsPell,
) -> ThinorbitsStatus {
    guard(|| {
        let d = integer(d, "d")?;
        let sol = match sign {
            4 => solve_pell4(&d)?,
            -4 => solve_pell_neg4(&d)?.ok_or_else(|| {
                Fail(ThinorbitsStatus::NotFound, format!("t^2 - {d} s^2 = -4 has no solution"))
            })?,
            _ => return Err(Fail(ThinorbitsStatus::OutOfRange, format!("sign {sign}, expected 4 or -4"))),
        };
        write(out, Box::into_raw(Box::new(ThinorbitsPell(sol))), "out")
    })
}

/// # Safety
/// `h` must be null or a live Pell handle.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_pell_free(h: *mut ThinorbitsPell) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes `t` and `s` as decimal strings, each released with [`thinorbits_string_free`].
///
/// # Safety
/// `h` must be a live Pell handle; `t` and `s` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_pell_get(
    h: *const ThinorbitsPell,
    t: *mut *mut c_char,
    s: *mut *mut c_char,
) -> ThinorbitsStatus {
    guard(|| {
        let p = h.as_ref().ok_or_else(|| null("pell"))?;
        if t.is_null() || s.is_null() {
            return Err(null("out"));
        }
        write_string(t, p.0.t.to_string())?;
        write_string(s, p.0.s.to_string())
    })
}

/// Number of `Gamma_A` words with top-left entry at most `x`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_ball_count(alphabet: u32, x: u64, out: *mut u64) -> ThinorbitsStatus {
    guard(|| write(out, thinorbits::orbits::ball_count(alphabet, x)?, "out"))
}

/// Least `b` with `b / d` having partial quotients at most `alphabet`. `NotFound`
/// when `d` is an exception.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thinorbits_zaremba(d: u64, alphabet: u32, out: *mut u64) -> ThinorbitsStatus {
    guard(|| {
        let hit = thinorbits::orbits::zaremba_check(d, alphabet)
            .ok_or_else(|| Fail(ThinorbitsStatus::NotFound, format!("{d} is an exception for A = {alphabet}")))?;
        write(out, hit.b, "out")
    })
}
