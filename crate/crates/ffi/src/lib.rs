//! C interface to the kitchen simulator, the program interpreter and
//! self-play evaluation.
//!
//! Every function returns a [`KpStatus`]. On failure the message is kept
//! per thread and read with [`kp_last_error_message`]. Handles are opaque
//! and released with their `_free` function; strings returned through out
//! pointers are released with [`kp_string_free`]. Actions are encoded as
//! 0 up, 1 down, 2 left, 3 right, 4 noop, 5 interact.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use knowpc::dsl::parse_program;
use knowpc::rollout::{episode_rng, self_play, EpisodeRng, Policy, ProgramPolicy};
use knowpc::sim::LayoutError;
use knowpc::{EnvAction, GridLayout, Program, WorldState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Layout = 3,
    Parse = 4,
    InvalidArgument = 5,
    EpisodeOver = 6,
    Io = 7,
    Panic = 8,
}

pub struct KpLayout(Arc<GridLayout>);

pub struct KpProgram(Program);

pub struct KpEpisode {
    state: WorldState,
    rng: EpisodeRng,
    score: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (KpStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            KpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (KpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (KpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| (KpStatus::InvalidArgument, "string contains a nul byte".to_string()))?;
    put(out, c.into_raw())
}

fn action(code: u8) -> Result<EnvAction, Failure> {
    EnvAction::from_index(code as usize).ok_or_else(|| (KpStatus::InvalidArgument, format!("action code {code} outside 0..=5")))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn kp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn kp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a `.layout` file; its stem becomes the layout name.
#[no_mangle]
pub unsafe extern "C" fn kp_layout_load(path: *const c_char, out: *mut *mut KpLayout) -> KpStatus {
    guard(|| {
        let path = text(path, "path")?;
        let layout = GridLayout::resolve(path).map_err(|e| match e {
            LayoutError::Io(_) => (KpStatus::Io, e.to_string()),
            _ => (KpStatus::Layout, e.to_string()),
        })?;
        store(out, KpLayout(Arc::new(layout)))
    })
}

/// One of the ten layouts shipped with the library, e.g. `cramped_room`.
#[no_mangle]
pub unsafe extern "C" fn kp_layout_bundled(name: *const c_char, out: *mut *mut KpLayout) -> KpStatus {
    guard(|| {
        let name = text(name, "name")?;
        let layout = GridLayout::bundled(name).map_err(|e| (KpStatus::Layout, e.to_string()))?;
        store(out, KpLayout(Arc::new(layout)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_layout_size(layout: *const KpLayout, width: *mut usize, height: *mut usize) -> KpStatus {
    guard(|| {
        let l = &handle(layout, "layout")?.0;
        put(width, l.width)?;
        put(height, l.height)
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_layout_free(layout: *mut KpLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kp_program_parse(source: *const c_char, out: *mut *mut KpProgram) -> KpStatus {
    guard(|| {
        let src = text(source, "source")?;
        let p = parse_program(src).map_err(|e| (KpStatus::Parse, e.to_string()))?;
        store(out, KpProgram(p))
    })
}

/// Canonical source text; free with [`kp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kp_program_render(program: *const KpProgram, out: *mut *mut c_char) -> KpStatus {
    guard(|| put_string(out, handle(program, "program")?.0.to_string()))
}

/// Number of condition occurrences.
#[no_mangle]
pub unsafe extern "C" fn kp_program_complexity(program: *const KpProgram, out: *mut usize) -> KpStatus {
    guard(|| put(out, handle(program, "program")?.0.complexity()))
}

#[no_mangle]
pub unsafe extern "C" fn kp_program_free(program: *mut KpProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// A fresh episode of `horizon` steps. `seed` drives the random choices
/// of [`kp_episode_policy_action`].
#[no_mangle]
pub unsafe extern "C" fn kp_episode_new(layout: *const KpLayout, horizon: u32, seed: u64, out: *mut *mut KpEpisode) -> KpStatus {
    guard(|| {
        let l = handle(layout, "layout")?;
        if horizon == 0 {
            return Err((KpStatus::InvalidArgument, "horizon must be at least 1".into()));
        }
        store(out, KpEpisode { state: WorldState::with_horizon(l.0.clone(), horizon), rng: episode_rng(seed), score: 0 })
    })
}

/// Applies one joint action; `reward` receives this step's reward and may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn kp_episode_step(episode: *mut KpEpisode, action1: u8, action2: u8, reward: *mut u32) -> KpStatus {
    guard(|| {
        let ep = episode.as_mut().ok_or_else(|| null("episode"))?;
        let (a, b) = (action(action1)?, action(action2)?);
        let r = ep.state.step_mut(a, b).map_err(|e| (KpStatus::EpisodeOver, e.to_string()))?;
        ep.score += r;
        if !reward.is_null() {
            *reward = r;
        }
        Ok(())
    })
}

/// The action `program` picks for chef `chef` (0 or 1) in the current
/// state, ε = 0.
#[no_mangle]
pub unsafe extern "C" fn kp_episode_policy_action(
    episode: *mut KpEpisode,
    program: *const KpProgram,
    chef: u32,
    out: *mut u8,
) -> KpStatus {
    guard(|| {
        let ep = episode.as_mut().ok_or_else(|| null("episode"))?;
        let p = handle(program, "program")?;
        if chef > 1 {
            return Err((KpStatus::InvalidArgument, format!("chef {chef} is not 0 or 1")));
        }
        let a = ProgramPolicy::greedy(&p.0).act(&ep.state, chef as usize, &mut ep.rng);
        put(out, a as u8)
    })
}

/// Current time step, accumulated score and whether the horizon is reached.
#[no_mangle]
pub unsafe extern "C" fn kp_episode_status(episode: *const KpEpisode, t: *mut u32, score: *mut u32, done: *mut bool) -> KpStatus {
    guard(|| {
        let ep = handle(episode, "episode")?;
        put(t, ep.state.t)?;
        put(score, ep.score)?;
        put(done, ep.state.is_terminal())
    })
}

/// JSON snapshot of chefs, pots and counters; free with [`kp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kp_episode_snapshot_json(episode: *const KpEpisode, out: *mut *mut c_char) -> KpStatus {
    guard(|| {
        let ep = handle(episode, "episode")?;
        put_string(out, serde_json::to_string(&ep.state.snapshot()).expect("plain data"))
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_episode_free(episode: *mut KpEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// Mean greedy self-play reward over `episodes` episodes of `horizon` steps.
#[no_mangle]
pub unsafe extern "C" fn kp_evaluate_selfplay(
    layout: *const KpLayout,
    program: *const KpProgram,
    episodes: u32,
    horizon: u32,
    seed: u64,
    out: *mut f64,
) -> KpStatus {
    guard(|| {
        let l = handle(layout, "layout")?;
        let p = handle(program, "program")?;
        if episodes == 0 || horizon == 0 {
            return Err((KpStatus::InvalidArgument, "episodes and horizon must be at least 1".into()));
        }
        put(out, self_play(&l.0, &ProgramPolicy::greedy(&p.0), episodes as usize, seed, horizon, None))
    })
}
