//! C ABI for the `rsgame` solver.
//!
//! Games and saddle results are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`RsgStatus`]; on
//! failure a description is kept per thread and read with
//! [`rsg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rsgame::error::Error;
use rsgame::model::GameModel;
use rsgame::saddle::SaddleResult;
use rsgame::smartgrid::SmartGridParams;

/// Status codes; the nonzero CLI exit codes keep their meaning.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsgStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Precondition = 3,
    NonConvergence = 4,
    NullPointer = 10,
    InvalidArgument = 11,
    Panic = 12,
}

/// Opaque game model.
pub struct RsgGame {
    model: GameModel,
}

/// Opaque saddle-point result.
pub struct RsgSaddle {
    result: SaddleResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsgIrreducibility {
    pub gamma: f64,
    pub eta: f64,
    pub i_star: usize,
    pub m_c: f64,
    /// `INFINITY` when unbounded.
    pub theta_max: f64,
    pub irreducible: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsgValueBracket {
    pub lower: f64,
    pub upper: f64,
    pub rho_tilde: f64,
    pub n_outer: u32,
    pub applications: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsgCertificate {
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub slack_player1: f64,
    pub slack_player2: f64,
    pub certified_eps: f64,
    pub tolerance: f64,
    pub passes: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsgSmartGridParams {
    pub n_s: u32,
    pub n_c: u32,
    pub n_p: u32,
    pub m: u32,
    pub gen_mean: f64,
    pub gen_std: f64,
    pub theta: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RsgStatus {
    match err.exit_code() {
        1 => RsgStatus::Io,
        2 => RsgStatus::Validation,
        3 => RsgStatus::Precondition,
        _ => RsgStatus::NonConvergence,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (RsgStatus, String)>) -> RsgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside rsgame".into());
            RsgStatus::Panic
        }
    }
}

fn lib<T>(r: rsgame::Result<T>) -> Result<T, (RsgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RsgStatus, String) {
    (RsgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RsgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RsgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn game_ref<'a>(g: *const RsgGame) -> Result<&'a GameModel, (RsgStatus, String)> {
    g.as_ref().map(|g| &g.model).ok_or_else(|| null("game"))
}

fn boxed_game(model: GameModel, out: *mut *mut RsgGame) {
    unsafe { *out = Box::into_raw(Box::new(RsgGame { model })) };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn rsg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rsg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_game_load(path: *const c_char, out: *mut *mut RsgGame) -> RsgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = text(path, "path")?;
        boxed_game(lib(GameModel::load(path))?, out);
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_game_from_json(
    json: *const c_char,
    out: *mut *mut RsgGame,
) -> RsgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let json = text(json, "json")?;
        boxed_game(lib(GameModel::from_json_str(json))?, out);
        Ok(())
    })
}

/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rsg_smartgrid_new(
    params: *const RsgSmartGridParams,
    out: *mut *mut RsgGame,
) -> RsgStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = SmartGridParams {
            n_s: p.n_s,
            n_c: p.n_c,
            n_p: p.n_p,
            m: p.m,
            gen_mean: p.gen_mean,
            gen_std: p.gen_std,
            theta: p.theta,
        };
        boxed_game(lib(rsgame::build_smartgrid(&params))?, out);
        Ok(())
    })
}

/// Defaults of the built-in smart-grid example.
#[no_mangle]
pub extern "C" fn rsg_smartgrid_default_params() -> RsgSmartGridParams {
    let d = SmartGridParams::default();
    RsgSmartGridParams {
        n_s: d.n_s,
        n_c: d.n_c,
        n_p: d.n_p,
        m: d.m,
        gen_mean: d.gen_mean,
        gen_std: d.gen_std,
        theta: d.theta,
    }
}

/// # Safety
/// `game` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsg_game_free(game: *mut RsgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsg_game_n_states(game: *const RsgGame) -> usize {
    game.as_ref().map_or(0, |g| g.model.n_states())
}

/// # Safety
/// `game` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_analyze(
    game: *const RsgGame,
    out: *mut RsgIrreducibility,
) -> RsgStatus {
    guard(|| {
        let model = game_ref(game)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = rsgame::analyze(model);
        *out = RsgIrreducibility {
            gamma: r.gamma,
            eta: r.eta,
            i_star: r.i_star,
            m_c: r.m_c,
            theta_max: r.theta_max,
            irreducible: r.irreducible,
        };
        Ok(())
    })
}

/// # Safety
/// `game` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_approximate_value(
    game: *const RsgGame,
    eps: f64,
    max_outer: u32,
    out: *mut RsgValueBracket,
) -> RsgStatus {
    guard(|| {
        let model = game_ref(game)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = lib(rsgame::approximate_value(model, eps, max_outer))?;
        let (lower, upper) = lib(rsgame::sandwich_certificate(&r))?;
        *out = RsgValueBracket {
            lower,
            upper,
            rho_tilde: r.rho_tilde,
            n_outer: r.n_outer,
            applications: r.applications,
        };
        Ok(())
    })
}

/// # Safety
/// `game` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_compute_saddle(
    game: *const RsgGame,
    eps: f64,
    out: *mut *mut RsgSaddle,
) -> RsgStatus {
    guard(|| {
        let model = game_ref(game)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = lib(rsgame::compute_saddle(model, eps))?;
        *out = Box::into_raw(Box::new(RsgSaddle { result }));
        Ok(())
    })
}

/// # Safety
/// `saddle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsg_saddle_free(saddle: *mut RsgSaddle) {
    if !saddle.is_null() {
        drop(Box::from_raw(saddle));
    }
}

/// Value estimate of the saddle computation, NaN for a null handle.
///
/// # Safety
/// `saddle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsg_saddle_rho(saddle: *const RsgSaddle) -> f64 {
    saddle.as_ref().map_or(f64::NAN, |s| s.result.rho_eps)
}

/// # Safety
/// `saddle` must be a live handle and the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rsg_saddle_counts(
    saddle: *const RsgSaddle,
    k_eps: *mut u64,
    n_eps: *mut u64,
    constant_cost: *mut bool,
) -> RsgStatus {
    guard(|| {
        let s = &saddle.as_ref().ok_or_else(|| null("saddle"))?.result;
        *k_eps.as_mut().ok_or_else(|| null("k_eps"))? = s.k_eps;
        *n_eps.as_mut().ok_or_else(|| null("n_eps"))? = s.n_eps;
        *constant_cost
            .as_mut()
            .ok_or_else(|| null("constant_cost"))? = s.constant_cost;
        Ok(())
    })
}

/// Copies the strategy of `player` (1 or 2) at `state` into `buf`. With
/// `buf` null or too short only `*len` is set to the number of actions.
///
/// # Safety
/// `saddle` must be a live handle, `len` valid, and `buf` null or valid for
/// `*len` writes on entry.
#[no_mangle]
pub unsafe extern "C" fn rsg_saddle_strategy(
    saddle: *const RsgSaddle,
    player: u32,
    state: usize,
    buf: *mut f64,
    len: *mut usize,
) -> RsgStatus {
    guard(|| {
        let s = &saddle.as_ref().ok_or_else(|| null("saddle"))?.result;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let policy = match player {
            1 => &s.phi_eps,
            2 => &s.psi_eps,
            _ => {
                return Err((
                    RsgStatus::InvalidArgument,
                    format!("player must be 1 or 2, got {player}"),
                ))
            }
        };
        if state >= policy.n_states() {
            return Err((
                RsgStatus::InvalidArgument,
                format!("state {state} out of range"),
            ));
        }
        let probs = policy.at(state);
        let room = *len;
        *len = probs.len();
        if !buf.is_null() && room >= probs.len() {
            ptr::copy_nonoverlapping(probs.as_ptr(), buf, probs.len());
        }
        Ok(())
    })
}

/// Certifies the pair held by `saddle` on `game`.
///
/// # Safety
/// Both handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsg_verify_saddle(
    game: *const RsgGame,
    saddle: *const RsgSaddle,
    eps: f64,
    out: *mut RsgCertificate,
) -> RsgStatus {
    guard(|| {
        let model = game_ref(game)?;
        let s = &saddle.as_ref().ok_or_else(|| null("saddle"))?.result;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lib(rsgame::verify_saddle(model, &s.phi_eps, &s.psi_eps, eps))?;
        *out = RsgCertificate {
            rho_lower: c.rho_bracket.0,
            rho_upper: c.rho_bracket.1,
            slack_player1: c.slack_player1,
            slack_player2: c.slack_player2,
            certified_eps: c.certified_eps,
            tolerance: c.tolerance,
            passes: c.passes,
        };
        Ok(())
    })
}
