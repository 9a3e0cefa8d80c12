//! C ABI for the sdmc model checker.
//!
//! Diagrams are opaque handles created from the text file format. Every
//! fallible call reports through a per-thread error slot: a non-zero
//! status (or a null return) means the code and message are available via
//! `sdmc_last_error_code` / `sdmc_last_error_message`. Strings returned as
//! `char*` are owned by the caller and must be released with
//! `sdmc_string_free`.

use libc::{c_char, c_int};
use sdmc::compose::Limits;
use sdmc::diagram::DiagramIndex;
use sdmc::refinement::CacheMode;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// An opaque parsed diagram.
pub struct SdmcDiagram {
    diagram: sdmc::diagram::Diagram,
    index: DiagramIndex,
}

/// Verification method selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SdmcMethod {
    /// Flatten the diagram and run the classical fixpoint.
    Monolithic = 0,
    /// Compose per-leaf solutions bottom-up.
    Bottomup = 1,
    /// Build the explicit shortcut graph.
    Shortcut = 2,
    /// Iterative strategy refinement (the production method).
    Refine = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<(c_int, CString)>> = const { RefCell::new(None) };
}

fn set_error(code: c_int, msg: String) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some((code, msg)));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn set_from(err: &sdmc::Error) -> c_int {
    let code = err.exit_code();
    set_error(code, err.to_string());
    code
}

/// Status code of the most recent failing call on this thread: 0 none, 2
/// validation error, 3 size guard, 4 internal invariant violation, 5 bad
/// argument.
#[no_mangle]
pub extern "C" fn sdmc_last_error_code() -> c_int {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |(c, _)| *c))
}

/// Message of the most recent failing call on this thread; the pointer
/// stays valid until the next failing call on the same thread. Null when
/// no error is pending.
#[no_mangle]
pub extern "C" fn sdmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |(_, m)| m.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sdmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a diagram from the text file format. Returns null on error.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sdmc_diagram_parse(text: *const c_char) -> *mut SdmcDiagram {
    if text.is_null() {
        set_error(5, "null text".into());
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error(5, "text is not valid UTF-8".into());
            return ptr::null_mut();
        }
    };
    match sdmc::diagfile::parse_sd(text) {
        Ok(diagram) => match diagram.index() {
            Ok(index) => {
                clear_error();
                Box::into_raw(Box::new(SdmcDiagram { diagram, index }))
            }
            Err(e) => {
                set_from(&e);
                ptr::null_mut()
            }
        },
        Err(e) => {
            set_from(&e);
            ptr::null_mut()
        }
    }
}

/// Releases a diagram handle; null is ignored.
///
/// # Safety
/// `d` must be a pointer returned by `sdmc_diagram_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sdmc_diagram_free(d: *mut SdmcDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of component entrances (one verdict slot each).
///
/// # Safety
/// `d` must be a live handle from `sdmc_diagram_parse`.
#[no_mangle]
pub unsafe extern "C" fn sdmc_entrance_count(d: *const SdmcDiagram) -> usize {
    if d.is_null() {
        set_error(5, "null diagram".into());
        return 0;
    }
    (*d).index.cpi().len()
}

/// Key `name#occ:idx` of the component entrance at one ordinal, as a
/// caller-owned string; null when the ordinal is out of range.
///
/// # Safety
/// `d` must be a live handle from `sdmc_diagram_parse`.
#[no_mangle]
pub unsafe extern "C" fn sdmc_entrance_key(d: *const SdmcDiagram, ordinal: usize) -> *mut c_char {
    if d.is_null() {
        set_error(5, "null diagram".into());
        return ptr::null_mut();
    }
    let index = &(*d).index;
    match index.cpi().get(ordinal) {
        Some(&ce) => {
            clear_error();
            CString::new(index.entrance_key(ce))
                .map(CString::into_raw)
                .unwrap_or(ptr::null_mut())
        }
        None => {
            set_error(
                5,
                format!("ordinal {ordinal} out of range {}", index.cpi().len()),
            );
            ptr::null_mut()
        }
    }
}

/// Is the component entrance at this ordinal a global entrance of the
/// diagram?
///
/// # Safety
/// `d` must be a live handle from `sdmc_diagram_parse`.
#[no_mangle]
pub unsafe extern "C" fn sdmc_entrance_is_global(d: *const SdmcDiagram, ordinal: usize) -> bool {
    if d.is_null() {
        return false;
    }
    let index = &(*d).index;
    index
        .cpi()
        .get(ordinal)
        .is_some_and(|ce| index.global_entrances().contains(ce))
}

/// Decides the almost-sure Büchi objective for every component entrance
/// and writes one verdict per ordinal into `verdicts`. `len` must equal
/// `sdmc_entrance_count`. Returns 0 on success.
///
/// # Safety
/// `d` must be a live handle and `verdicts` must point to `len` writable
/// booleans.
#[no_mangle]
pub unsafe extern "C" fn sdmc_check(
    d: *const SdmcDiagram,
    method: SdmcMethod,
    verdicts: *mut bool,
    len: usize,
) -> c_int {
    if d.is_null() || verdicts.is_null() {
        set_error(5, "null argument".into());
        return 5;
    }
    let handle = &*d;
    let n = handle.index.cpi().len();
    if len != n {
        set_error(5, format!("verdict buffer holds {len}, need {n}"));
        return 5;
    }
    let limits = Limits::default();
    let result = match method {
        SdmcMethod::Monolithic => sdmc::diagram::monolithic_verdicts(&handle.diagram),
        SdmcMethod::Bottomup => {
            sdmc::compose::bottom_up_verdicts(&handle.diagram, Default::default(), &limits)
                .map(|(v, _)| v)
        }
        SdmcMethod::Shortcut => sdmc::shortcut::shortcut_verdicts(&handle.diagram, false, &limits),
        SdmcMethod::Refine => {
            sdmc::refinement::strat_ref_verdicts(&handle.diagram, CacheMode::Monotone)
                .map(|(v, _)| v)
        }
    };
    match result {
        Ok(vs) => {
            for (k, v) in vs.into_iter().enumerate() {
                *verdicts.add(k) = v;
            }
            clear_error();
            0
        }
        Err(e) => set_from(&e),
    }
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from an sdmc function that documents caller ownership.
#[no_mangle]
pub unsafe extern "C" fn sdmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
