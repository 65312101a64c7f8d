//! C ABI over the `spheremax` core.
//!
//! Every fallible function returns an [`SmxStatus`]. On failure the message is
//! kept per thread and can be fetched with [`smx_last_error`]. Grids and
//! symbols are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use spheremax::bilop::{average_mult, default_t_grid, maximal};
use spheremax::cex::{cex_average, CexPair};
use spheremax::grid::GridFunction;
use spheremax::harness::fit_loglog;
use spheremax::region::{classify, delta_n, rhombus_vertices, ExponentPoint, RegionStatus};
use spheremax::specfn::{bessel_j, dsigma_hat, dsigma_hat_deriv};
use spheremax::symbols::{RadialBilinearSymbol, SymbolKind};
use spheremax::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    GridMismatch = 4,
    NonConvergence = 5,
    Divergent = 6,
    Io = 7,
    Format = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmxRegion {
    BoundedRhombus = 0,
    BoundedBanach = 1,
    Unbounded = 2,
    Unknown = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmxSymbolKind {
    Full = 0,
    Piece = 1,
    Diagonal = 2,
    OffDiagonal = 3,
    EulerPiece = 4,
    EulerDiagonal = 5,
    EulerOffDiagonal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SmxFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Opaque periodic grid function.
pub struct SmxGrid(GridFunction);

/// Opaque bilinear multiplier.
pub struct SmxSymbol(RadialBilinearSymbol);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SmxStatus {
    match e {
        Error::Domain { .. } => SmxStatus::Domain,
        Error::InvalidArgument(_) | Error::UnknownExperiment(_) => SmxStatus::InvalidArgument,
        Error::GridMismatch(_) => SmxStatus::GridMismatch,
        Error::NonConvergence { .. } => SmxStatus::NonConvergence,
        Error::Divergent(_) => SmxStatus::Divergent,
        Error::Io { .. } => SmxStatus::Io,
        Error::Format(_) | Error::Json(_) => SmxStatus::Format,
    }
}

enum Fail {
    Null(&'static str),
    Small(usize),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SmxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmxStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SmxStatus::NullPointer
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("buffer too small, need {need}"));
            SmxStatus::BufferTooSmall
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SmxStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn grid<'a>(p: *const SmxGrid, what: &'static str) -> Result<&'a GridFunction, Fail> {
    p.as_ref().map(|g| &g.0).ok_or(Fail::Null(what))
}

unsafe fn symbol<'a>(p: *const SmxSymbol) -> Result<&'a RadialBilinearSymbol, Fail> {
    p.as_ref().map(|s| &s.0).ok_or(Fail::Null("symbol"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Fail::Core(Error::InvalidArgument("path is not UTF-8".into())))?;
    Ok(Path::new(s))
}

fn boxed<T>(v: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(v));
}

/// Copies the last error message of this thread into `buf` with a trailing
/// NUL, truncating if needed. Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn smx_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `δ_n = (2n - 15)/10`.
#[no_mangle]
pub extern "C" fn smx_delta_n(n: u32) -> f64 {
    delta_n(n)
}

/// # Safety
/// `status` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_classify(n: u32, inv_p1: f64, inv_p2: f64, status: *mut SmxRegion) -> SmxStatus {
    guard(|| {
        let dst = out(status, "status")?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()).into());
        }
        let pt = ExponentPoint::new(inv_p1, inv_p2)?;
        *dst = match classify(n, &pt).status {
            RegionStatus::BoundedRhombus => SmxRegion::BoundedRhombus,
            RegionStatus::BoundedBanach => SmxRegion::BoundedBanach,
            RegionStatus::Unbounded => SmxRegion::Unbounded,
            RegionStatus::Unknown => SmxRegion::Unknown,
        };
        Ok(())
    })
}

/// Writes the four rhombus vertices as `(1/p1, 1/p2, 1/p)` triples into
/// `coords[0..12]`.
///
/// # Safety
/// `coords` must be valid for 12 writes.
#[no_mangle]
pub unsafe extern "C" fn smx_rhombus_vertices(n: u32, coords: *mut f64) -> SmxStatus {
    guard(|| {
        if coords.is_null() {
            return Err(Fail::Null("coords"));
        }
        let vs = rhombus_vertices(n)?;
        let dst = std::slice::from_raw_parts_mut(coords, 12);
        for (i, v) in vs.iter().enumerate() {
            dst[3 * i] = v.inv_p1();
            dst[3 * i + 1] = v.inv_p2();
            dst[3 * i + 2] = v.inv_p();
        }
        Ok(())
    })
}

/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_bessel_j(nu: f64, x: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        *out(value, "value")? = bessel_j(nu, x)?;
        Ok(())
    })
}

/// Fourier transform of surface measure on the unit sphere of ℝ^d at radius `r`.
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_dsigma_hat(d: usize, r: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        *out(value, "value")? = dsigma_hat(d, r)?;
        Ok(())
    })
}

/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_dsigma_hat_deriv(d: usize, r: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        *out(value, "value")? = dsigma_hat_deriv(d, r)?;
        Ok(())
    })
}

/// New zero grid on `[0, period)^n` with `size` points per axis.
///
/// # Safety
/// `grid` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_new(n: usize, size: usize, period: f64, grid: *mut *mut SmxGrid) -> SmxStatus {
    guard(|| {
        let dst = out(grid, "grid")?;
        boxed(SmxGrid(GridFunction::zeros(n, size, period)?), dst);
        Ok(())
    })
}

/// Grid from `size^n` real samples in row-major order.
///
/// # Safety
/// `values` must hold `len` doubles; `grid` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_from_values(
    n: usize,
    size: usize,
    period: f64,
    values: *const f64,
    len: usize,
    grid: *mut *mut SmxGrid,
) -> SmxStatus {
    guard(|| {
        let dst = out(grid, "grid")?;
        let vals = slice(values, len, "values")?;
        let g = GridFunction::new(n, size, period, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
        boxed(SmxGrid(g), dst);
        Ok(())
    })
}

/// Number of samples in the grid, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_len(grid: *const SmxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Copies the real parts into `values`, which must hold at least
/// [`smx_grid_len`] doubles.
///
/// # Safety
/// `grid` must be a live handle; `values` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_values(grid: *const SmxGrid, values: *mut f64, len: usize) -> SmxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        if len < g.len() {
            return Err(Fail::Small(g.len()));
        }
        if values.is_null() {
            return Err(Fail::Null("values"));
        }
        let dst = std::slice::from_raw_parts_mut(values, g.len());
        for (d, v) in dst.iter_mut().zip(g.values()) {
            *d = v.re;
        }
        Ok(())
    })
}

unsafe fn grid_ref<'a>(p: *const SmxGrid) -> Result<&'a GridFunction, Fail> {
    grid(p, "grid")
}

/// Discrete `L^p` norm; pass `INFINITY` for the max norm.
///
/// # Safety
/// `grid` must be a live handle; `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_lp_norm(grid: *const SmxGrid, p: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        *out(value, "value")? = grid_ref(grid)?.lp_norm(p)?;
        Ok(())
    })
}

/// # Safety
/// `grid` must be a live handle; `file` a NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_save(grid: *const SmxGrid, file: *const c_char) -> SmxStatus {
    guard(|| {
        grid_ref(grid)?.save(path(file)?)?;
        Ok(())
    })
}

/// # Safety
/// `file` must be a NUL-terminated UTF-8 path; `grid` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_load(file: *const c_char, grid: *mut *mut SmxGrid) -> SmxStatus {
    guard(|| {
        let dst = out(grid, "grid")?;
        boxed(SmxGrid(GridFunction::load(path(file)?)?), dst);
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smx_grid_free(grid: *mut SmxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Radial multiplier of dimension `2n`; `j` selects the dyadic piece and is
/// ignored for `Full`.
///
/// # Safety
/// `symbol` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_symbol_new(
    n: u32,
    j: u32,
    kind: SmxSymbolKind,
    epsilon: f64,
    symbol: *mut *mut SmxSymbol,
) -> SmxStatus {
    guard(|| {
        let dst = out(symbol, "symbol")?;
        let kind = match kind {
            SmxSymbolKind::Full => SymbolKind::Full,
            SmxSymbolKind::Piece => SymbolKind::Piece,
            SmxSymbolKind::Diagonal => SymbolKind::Diagonal,
            SmxSymbolKind::OffDiagonal => SymbolKind::OffDiagonal,
            SmxSymbolKind::EulerPiece => SymbolKind::EulerPiece,
            SmxSymbolKind::EulerDiagonal => SymbolKind::EulerDiagonal,
            SmxSymbolKind::EulerOffDiagonal => SymbolKind::EulerOffDiagonal,
        };
        boxed(SmxSymbol(RadialBilinearSymbol::new(n, j, kind, epsilon)?), dst);
        Ok(())
    })
}

/// Value at `(ξ, η)` given the magnitudes `|ξ|` and `|η|`.
///
/// # Safety
/// `symbol` must be a live handle; `value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_symbol_eval(symbol: *const SmxSymbol, xi: f64, eta: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        let s = self::symbol(symbol)?;
        if !(xi >= 0.0 && eta >= 0.0) {
            return Err(Error::InvalidArgument("magnitudes must be nonnegative".into()).into());
        }
        *out(value, "value")? = s.eval(xi, eta);
        Ok(())
    })
}

/// # Safety
/// `symbol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smx_symbol_free(symbol: *mut SmxSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}

/// Bilinear spherical average at radius `t`, computed with the multiplier.
///
/// # Safety
/// Handles must be live; `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_average_mult(
    symbol: *const SmxSymbol,
    f: *const SmxGrid,
    g: *const SmxGrid,
    t: f64,
    result: *mut *mut SmxGrid,
) -> SmxStatus {
    guard(|| {
        let dst = out(result, "result")?;
        let r = average_mult(self::symbol(symbol)?, grid(f, "f")?, grid(g, "g")?, t)?;
        boxed(SmxGrid(r), dst);
        Ok(())
    })
}

/// Maximal function over the radii `t_grid`. With `t_len == 0` the default
/// geometric grid for the grid spacing is used.
///
/// # Safety
/// Handles must be live; `t_grid` valid for `t_len` reads; `result` for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_maximal(
    symbol: *const SmxSymbol,
    f: *const SmxGrid,
    g: *const SmxGrid,
    t_grid: *const f64,
    t_len: usize,
    result: *mut *mut SmxGrid,
) -> SmxStatus {
    guard(|| {
        let dst = out(result, "result")?;
        let (fg, gg) = (grid(f, "f")?, grid(g, "g")?);
        let ts = match slice(t_grid, t_len, "t_grid")? {
            [] => default_t_grid(fg.spacing()),
            s => s.to_vec(),
        };
        boxed(SmxGrid(maximal(self::symbol(symbol)?, fg, gg, &ts)?), dst);
        Ok(())
    })
}

/// Bilinear spherical average of the singular counterexample pair at distance
/// `scale` from the origin.
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_cex_average(n: usize, p1: f64, p2: f64, scale: f64, value: *mut f64) -> SmxStatus {
    guard(|| {
        let dst = out(value, "value")?;
        *dst = cex_average(&CexPair::new(n, p1, p2)?, scale)?;
        Ok(())
    })
}

/// Least-squares line through `(log2 x, log2 y)`.
///
/// # Safety
/// `x`, `y` must hold `len` doubles; `fit` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn smx_fit_loglog(x: *const f64, y: *const f64, len: usize, fit: *mut SmxFit) -> SmxStatus {
    guard(|| {
        let dst = out(fit, "fit")?;
        let pts: Vec<(f64, f64)> = slice(x, len, "x")?.iter().copied().zip(slice(y, len, "y")?.iter().copied()).collect();
        let r = fit_loglog(&pts)?;
        *dst = SmxFit { slope: r.slope, intercept: r.intercept, r_squared: r.r_squared };
        Ok(())
    })
}
