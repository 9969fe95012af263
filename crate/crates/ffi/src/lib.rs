//! C interface to `gsa-core`.
//!
//! Games are passed around as opaque `GsaGame` handles created by
//! `gsa_game_new`, `gsa_game_dual`, `gsa_toycase_game` or `gsa_estimate_knn`
//! and released with `gsa_game_free`. Every fallible function returns a
//! `GsaStatus`; on failure `gsa_last_error` describes the problem. The message
//! is stored per thread and stays valid until the next failing call on that
//! thread.
//!
//! Coalitions are bitmasks: bit `i` set means player `i` (0-based) belongs to
//! the coalition.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gsa_core::allocation::{
    detect_exogenous, pme_from_total_indices, proportional_values, proportional_values_extended,
    shapley_coalitional, Allocation,
};
use gsa_core::error::ErrorClass;
use gsa_core::estimators::{estimate_all_total_indices, DataSet, IndexSource};
use gsa_core::gaussian::ToyCase;
use gsa_core::nalgebra::DMatrix;
use gsa_core::{Coalition, Error, GameTable};

/// Opaque game handle.
pub struct GsaGame {
    table: GameTable,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsaStatus {
    Ok = 0,
    InvalidArgument = 1,
    Degenerate = 2,
    Numerical = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Toy case selector for `gsa_toycase_game`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsaToyCase {
    /// `Y = X1 + X2`; `X3` correlated to `X1` but unused. `param` is ignored.
    Exogenous = 0,
    /// `Y = X1 + param·X2 + X3`; `X2` and `X3` correlated.
    Unbalanced = 1,
    /// `Y = X1 + (1 − param)X2 + X1X2`, `param` in [0, 1].
    Interaction = 2,
    /// `Y = X1`; `X2` correlated to `X1`. `param` is ignored.
    Joke = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: GsaStatus, message: &str) -> GsaStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> GsaStatus {
    let status = match e.class() {
        ErrorClass::Usage => GsaStatus::InvalidArgument,
        ErrorClass::Degenerate => GsaStatus::Degenerate,
        ErrorClass::Numerical => GsaStatus::Numerical,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, turning panics into `GsaStatus::Panic`.
fn guard<F: FnOnce() -> GsaStatus>(f: F) -> GsaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GsaStatus::Panic, "internal panic"),
    }
}

fn into_handle(table: GameTable, out: *mut *mut GsaGame) -> GsaStatus {
    // SAFETY: callers check `out` for null before computing the table.
    unsafe { *out = Box::into_raw(Box::new(GsaGame { table })) };
    GsaStatus::Ok
}

/// Copies the shares into `out`, which must hold `len >= d` doubles.
fn write_shares(result: gsa_core::Result<Allocation>, out: *mut f64, len: usize) -> GsaStatus {
    let allocation = match result {
        Ok(a) => a,
        Err(e) => return from_error(e),
    };
    if allocation.degenerate {
        return fail(
            GsaStatus::Degenerate,
            "grand coalition value is not above the zero threshold",
        );
    }
    let d = allocation.shares.len();
    if len < d {
        return fail(
            GsaStatus::InvalidArgument,
            &format!("output buffer holds {len} values, need {d}"),
        );
    }
    // SAFETY: `out` is non-null and the caller guarantees `len` writable doubles.
    unsafe { ptr::copy_nonoverlapping(allocation.shares.as_ptr(), out, d) };
    GsaStatus::Ok
}

/// Text of the last error on this thread, or an empty string.
#[no_mangle]
pub extern "C" fn gsa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a game over `d` players from `len = 2^d` values indexed by
/// coalition bitmask. `values[0]` must be 0.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_game_new(
    d: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut GsaGame,
) -> GsaStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        }
        if d == 0 || d > gsa_core::MAX_PLAYERS || len != 1usize << d {
            return fail(
                GsaStatus::InvalidArgument,
                &format!("need 2^d values for d in 1..=20, got d={d}, len={len}"),
            );
        }
        let values = std::slice::from_raw_parts(values, len).to_vec();
        match GameTable::new(d, values) {
            Ok(t) => into_handle(t, out),
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `game` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gsa_game_free(game: *mut GsaGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_game_dim(game: *const GsaGame, out: *mut usize) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        *out = g.table.players();
        GsaStatus::Ok
    })
}

/// Value of the coalition with bitmask `coalition`.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_game_value(
    game: *const GsaGame,
    coalition: u32,
    out: *mut f64,
) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        match Coalition::new(coalition, g.table.players()) {
            Ok(c) => {
                *out = g.table.value(c);
                GsaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// New handle holding the dual game `w(A) = v(D) − v(D∖A)`.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_game_dual(game: *const GsaGame, out: *mut *mut GsaGame) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        into_handle(g.table.dual(), out)
    })
}

/// Shapley values into `out[0..d]`.
///
/// # Safety
/// `game` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gsa_shapley(game: *const GsaGame, out: *mut f64, len: usize) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        write_shares(Ok(shapley_coalitional(&g.table)), out, len)
    })
}

/// Proportional values of a game with positive values.
///
/// # Safety
/// `game` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gsa_proportional_values(
    game: *const GsaGame,
    out: *mut f64,
    len: usize,
) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        write_shares(proportional_values(&g.table), out, len)
    })
}

/// Proportional values extended to nonnegative games; values `<= tau` are null.
///
/// # Safety
/// `game` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gsa_pv0(
    game: *const GsaGame,
    tau: f64,
    out: *mut f64,
    len: usize,
) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        write_shares(proportional_values_extended(&g.table, tau), out, len)
    })
}

/// Proportional marginal effects of a total index table.
///
/// # Safety
/// `game` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gsa_pme(
    game: *const GsaGame,
    tau: f64,
    out: *mut f64,
    len: usize,
) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        write_shares(pme_from_total_indices(&g.table, tau), out, len)
    })
}

/// Bitmask of the inputs detected as exogenous in a total index table.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_detect_exogenous(
    game: *const GsaGame,
    tau: f64,
    out: *mut u32,
) -> GsaStatus {
    guard(|| {
        let (Some(g), false) = (game.as_ref(), out.is_null()) else {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        };
        match detect_exogenous(&g.table, tau) {
            Ok(c) => {
                *out = c.bits();
                GsaStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Exact total Sobol' index table of a toy case.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_toycase_game(
    case: GsaToyCase,
    rho: f64,
    param: f64,
    out: *mut *mut GsaGame,
) -> GsaStatus {
    guard(|| {
        if out.is_null() {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        }
        let case = match case {
            GsaToyCase::Exogenous => ToyCase::ExogenousLinear { rho },
            GsaToyCase::Unbalanced => ToyCase::UnbalancedLinear { rho, beta: param },
            GsaToyCase::Interaction => ToyCase::InteractionLinear { rho, alpha: param },
            GsaToyCase::Joke => ToyCase::ShapleyJoke { rho },
        };
        match case.total_table() {
            Ok(t) => into_handle(t, out),
            Err(e) => from_error(e),
        }
    })
}

/// Nearest-neighbour estimate of the total index table from `n` observations.
/// `x` is row-major `n × d`, `y` has `n` entries. Estimates are clamped to
/// `[0, 1]`; a constant output gives the all-zero table.
///
/// # Safety
/// `x` must hold `n·d` doubles, `y` `n` doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsa_estimate_knn(
    x: *const f64,
    y: *const f64,
    n: usize,
    d: usize,
    k: usize,
    out: *mut *mut GsaGame,
) -> GsaStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return fail(GsaStatus::NullPointer, "null pointer argument");
        }
        let Some(cells) = n.checked_mul(d) else {
            return fail(GsaStatus::InvalidArgument, "n·d overflows");
        };
        let xs = std::slice::from_raw_parts(x, cells);
        let ys = std::slice::from_raw_parts(y, n).to_vec();
        let result = DataSet::new(DMatrix::from_row_slice(n, d, xs), ys).and_then(|data| {
            estimate_all_total_indices(&IndexSource::GivenData { data: &data, k })
        });
        match result {
            Ok(est) => into_handle(est.table, out),
            Err(e) => from_error(e),
        }
    })
}
