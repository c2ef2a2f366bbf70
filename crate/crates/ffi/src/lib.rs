//! C ABI for `dyadlab`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every function returns a
//! [`DyadStatus`]; on failure `dyad_last_error` describes the problem on the
//! calling thread. Panics are caught and reported as `DYAD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use dyadlab::complexity::{dimension_estimate, surrogate_k, ComplexityProfile};
use dyadlab::dyadic::DyadicPoint;
use dyadlab::experiments::BoundCurvePoint;
use dyadlab::fractal::{generate, Ambient, CellSet, FractalSpec};
use dyadlab::geometry::{annulus_intersection_cover, Annulus};
use dyadlab::selection::{SelectionInstance, TripleRelation};
use dyadlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DyadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Precondition = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A dyadic cell set.
pub struct DyadCellSet(CellSet);

/// A parsed pair-selection instance.
pub struct DyadSelection(SelectionInstance<TripleRelation>);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadDimensionEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub min_step_slope: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadBoundPoint {
    pub s: f64,
    pub ours: f64,
    pub sw: f64,
    pub fs: f64,
}

/// One sector of an annulus intersection cover. Angles are in turns.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadArc {
    pub start: f64,
    pub length: f64,
    pub arc_length: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadPair {
    pub u: usize,
    pub v: usize,
    pub witnesses: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> DyadStatus {
    match err {
        Error::Io(_) => DyadStatus::Io,
        Error::Format(_) => DyadStatus::Format,
        Error::Parameter(_) | Error::PrecisionTooLarge(_) => DyadStatus::InvalidArgument,
        _ => DyadStatus::Precondition,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DyadStatus, String)>) -> DyadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DyadStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DyadStatus::Panic
        }
    }
}

fn lib(err: Error) -> (DyadStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (DyadStatus, String) {
    (DyadStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (DyadStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(p: *mut T, name: &str, value: T) -> Result<(), (DyadStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (DyadStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DyadStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn generate_into(spec: FractalSpec, depth: u32, out: *mut *mut DyadCellSet) -> Result<(), (DyadStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let set = generate(&spec, depth).map_err(lib)?;
    out.write(Box::into_raw(Box::new(DyadCellSet(set))));
    Ok(())
}

unsafe fn cantor_spec(digit_bits: u32, digits: *const u32, n_digits: usize) -> Result<FractalSpec, (DyadStatus, String)> {
    if digits.is_null() && n_digits > 0 {
        return Err(null("digits"));
    }
    let ds = if n_digits == 0 { &[][..] } else { std::slice::from_raw_parts(digits, n_digits) };
    Ok(FractalSpec::cantor(digit_bits, ds))
}

/// Message for the last failure on this thread. Valid until the next call
/// into this library from the same thread.
#[no_mangle]
pub extern "C" fn dyad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Digit Cantor set in base `2^digit_bits` at precision `depth`.
///
/// # Safety
/// `digits` must point to `n_digits` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_cantor(
    digit_bits: u32,
    digits: *const u32,
    n_digits: usize,
    depth: u32,
    out: *mut *mut DyadCellSet,
) -> DyadStatus {
    guard(|| generate_into(cantor_spec(digit_bits, digits, n_digits)?, depth, out))
}

/// Product of a digit Cantor set with itself.
///
/// # Safety
/// As [`dyad_cellset_cantor`].
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_cantor_product(
    digit_bits: u32,
    digits: *const u32,
    n_digits: usize,
    depth: u32,
    out: *mut *mut DyadCellSet,
) -> DyadStatus {
    guard(|| {
        let c = cantor_spec(digit_bits, digits, n_digits)?;
        generate_into(FractalSpec::Product(Box::new(c.clone()), Box::new(c)), depth, out)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_square(depth: u32, out: *mut *mut DyadCellSet) -> DyadStatus {
    guard(|| generate_into(FractalSpec::FullSquare, depth, out))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_segment(depth: u32, out: *mut *mut DyadCellSet) -> DyadStatus {
    guard(|| generate_into(FractalSpec::Segment, depth, out))
}

/// Seeded random tree with target dimension `dim` in ambient dimension 1 or 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_random_tree(
    dim: f64,
    ambient: u32,
    seed: u64,
    depth: u32,
    out: *mut *mut DyadCellSet,
) -> DyadStatus {
    guard(|| {
        let ambient = Ambient::from_dim(ambient).map_err(lib)?;
        generate_into(FractalSpec::RandomTree { dim, ambient, seed }, depth, out)
    })
}

/// Reads a DYCS file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_read(path: *const c_char, out: *mut *mut DyadCellSet) -> DyadStatus {
    guard(|| {
        let path = PathBuf::from(c_str(path, "path")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let file = std::fs::File::open(&path).map_err(|e| lib(e.into()))?;
        let set = CellSet::read_from(std::io::BufReader::new(file)).map_err(lib)?;
        out.write(Box::into_raw(Box::new(DyadCellSet(set))));
        Ok(())
    })
}

/// Writes a DYCS file.
///
/// # Safety
/// `set` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_write(set: *const DyadCellSet, path: *const c_char) -> DyadStatus {
    guard(|| {
        let set = deref(set, "set")?;
        let path = c_str(path, "path")?;
        std::fs::write(path, set.0.to_bytes()).map_err(|e| lib(e.into()))
    })
}

/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_len(set: *const DyadCellSet, out: *mut usize) -> DyadStatus {
    guard(|| write_out(out, "out", deref(set, "set")?.0.len()))
}

/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_precision(set: *const DyadCellSet, out: *mut u32) -> DyadStatus {
    guard(|| write_out(out, "out", deref(set, "set")?.0.precision()))
}

/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_ambient_dim(set: *const DyadCellSet, out: *mut u32) -> DyadStatus {
    guard(|| write_out(out, "out", deref(set, "set")?.0.ambient().dim()))
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dyad_cellset_free(set: *mut DyadCellSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// `log2` of the number of occupied cells at precision `r`.
///
/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_surrogate_bits(set: *const DyadCellSet, r: u32, out: *mut f64) -> DyadStatus {
    guard(|| {
        let bits = surrogate_k(&deref(set, "set")?.0, r).map_err(lib)?;
        write_out(out, "out", bits)
    })
}

/// Least-squares box-dimension slope over precisions `lo..=hi`.
///
/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_dimension_estimate(
    set: *const DyadCellSet,
    lo: u32,
    hi: u32,
    out: *mut DyadDimensionEstimate,
) -> DyadStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        let rs: Vec<u32> = (lo..=hi.min(set.precision())).collect();
        let profile = ComplexityProfile::of_set(set, &rs).map_err(lib)?;
        let est = dimension_estimate(&profile, lo, hi).map_err(lib)?;
        write_out(
            out,
            "out",
            DyadDimensionEstimate {
                slope: est.slope,
                stderr: est.stderr,
                intercept: est.intercept,
                min_step_slope: est.min_step_slope,
            },
        )
    })
}

/// The three pinned-distance lower bounds at `s` in `(0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_bound_curve_point(s: f64, out: *mut DyadBoundPoint) -> DyadStatus {
    guard(|| {
        let p = BoundCurvePoint::at(s).map_err(lib)?;
        write_out(out, "out", DyadBoundPoint { s: p.s, ours: p.ours, sw: p.sw, fs: p.fs })
    })
}

/// Covers the intersection of two annuli by sectors of the first. Writes at
/// most `capacity` arcs to `out` and the full count to `count`; returns
/// `DYAD_STATUS_BUFFER_TOO_SMALL` when the buffer is short.
///
/// # Safety
/// `out` must point to `capacity` writable arcs (may be null when
/// `capacity` is 0); `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_annulus_cover(
    c1_x: f64,
    c1_y: f64,
    radius1: f64,
    eps1: f64,
    c2_x: f64,
    c2_y: f64,
    radius2: f64,
    eps2: f64,
    out: *mut DyadArc,
    capacity: usize,
    count: *mut usize,
) -> DyadStatus {
    guard(|| {
        let a1 = Annulus::new([c1_x, c1_y], radius1, eps1).map_err(lib)?;
        let a2 = Annulus::new([c2_x, c2_y], radius2, eps2).map_err(lib)?;
        let sectors = annulus_intersection_cover(&a1, &a2).map_err(lib)?;
        write_out(count, "count", sectors.len())?;
        if sectors.len() > capacity {
            return Err((DyadStatus::BufferTooSmall, format!("{} arcs need a larger buffer", sectors.len())));
        }
        if out.is_null() && !sectors.is_empty() {
            return Err(null("out"));
        }
        for (i, s) in sectors.iter().enumerate() {
            out.add(i).write(DyadArc { start: s.start, length: s.length, arc_length: s.arc_length() });
        }
        Ok(())
    })
}

/// Mantissas of the floor of `(x, y)` on the grid of spacing `2^-r`.
///
/// # Safety
/// `mx` and `my` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_floor_point(x: f64, y: f64, r: u32, mx: *mut i64, my: *mut i64) -> DyadStatus {
    guard(|| {
        let p = DyadicPoint::floor([x, y], r).map_err(lib)?;
        let [a, b] = p.mantissas();
        write_out(mx, "mx", a)?;
        write_out(my, "my", b)
    })
}

/// Parses an instance in the plain-text interchange format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_selection_parse(text: *const c_char, out: *mut *mut DyadSelection) -> DyadStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inst: SelectionInstance<TripleRelation> = text.parse().map_err(lib)?;
        out.write(Box::into_raw(Box::new(DyadSelection(inst))));
        Ok(())
    })
}

/// Whether the neighborhood-size and similarity-cap hypotheses hold. The
/// first violation, if any, is left in `dyad_last_error`.
///
/// # Safety
/// `sel` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_selection_hypotheses_hold(sel: *const DyadSelection, out: *mut bool) -> DyadStatus {
    guard(|| {
        let held = match deref(sel, "selection")?.0.verify_hypotheses() {
            Ok(()) => true,
            Err(v) => {
                set_error(&v.to_string());
                false
            }
        };
        write_out(out, "out", held)
    })
}

/// Lexicographically least qualifying pair. `found` is false when there is none.
///
/// # Safety
/// `sel` must be a live handle; `pair` and `found` writable.
#[no_mangle]
pub unsafe extern "C" fn dyad_selection_find_pair(
    sel: *const DyadSelection,
    pair: *mut DyadPair,
    found: *mut bool,
) -> DyadStatus {
    guard(|| {
        let cert = deref(sel, "selection")?.0.find_pair();
        if let Some(c) = &cert {
            write_out(pair, "pair", DyadPair { u: c.u, v: c.v, witnesses: c.witnesses })?;
        }
        write_out(found, "found", cert.is_some())
    })
}

/// # Safety
/// `sel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dyad_selection_free(sel: *mut DyadSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}
