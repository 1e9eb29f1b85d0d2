//! C ABI over the benchmark library.
//!
//! Every fallible call returns a status code (`WB_OK` on success) and writes
//! results through out-pointers. After a failure, `wb_last_error` describes it
//! until the next failing call on the same thread. Handles are opaque and must
//! be released with their `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use wavebench::dof::match_cn_to_dof;
use wavebench::fem::{cn_solve, CnVariant, FemSystem, FemTrajectory, StartRule, TimeSampling};
use wavebench::lhs::LhsMode;
use wavebench::mesh::Mesh;
use wavebench::problem::{InitialCondition, WaveProblem};
use wavebench::spectral::{fit_initial_condition, FitSettings, LambdaChoice, LambdaGrid, SpectralModel};
use wavebench::Error;

pub const WB_OK: i32 = 0;
pub const WB_ERR_NULL: i32 = 1;
pub const WB_ERR_INVALID: i32 = 2;
pub const WB_ERR_SINGULAR: i32 = 3;
pub const WB_ERR_NUMERICAL: i32 = 4;
pub const WB_ERR_IO: i32 = 5;
pub const WB_ERR_FORMAT: i32 = 6;
pub const WB_ERR_PANIC: i32 = 7;

pub const WB_IC_POLYNOMIAL: i32 = 0;
pub const WB_IC_MOLLIFIER: i32 = 1;
pub const WB_IC_SINGLE_MODE: i32 = 2;
pub const WB_IC_ZERO: i32 = 3;

pub const WB_CN_CENTERED: i32 = 0;
pub const WB_CN_LAGGED: i32 = 1;

pub const WB_START_TAYLOR: i32 = 0;
pub const WB_START_IMPLICIT: i32 = 1;

pub const WB_TIME_LINEAR: i32 = 0;
pub const WB_TIME_HOLD: i32 = 1;

/// Rectangle `[0, l1] x [0, l2]`, wave speed `c`, final time `t_final`, and a `WB_IC_*` code.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WbProblem {
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub t_final: f64,
    pub ic: i32,
}

/// Matched coarse resolution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WbMatch {
    pub n: usize,
    pub nt: usize,
    pub dof_cn: u64,
    pub dt: f64,
    pub mismatch: f64,
    pub root: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WbModelInfo {
    pub n_modes: usize,
    pub lambda: f64,
    pub edof: f64,
    pub gcv_score: f64,
}

/// Fitted surrogate.
pub struct WbModel {
    inner: SpectralModel,
}

/// Coarse finite element trajectory.
pub struct WbTrajectory {
    inner: FemTrajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Json(_) => WB_ERR_INVALID,
        Error::Singular(_) => WB_ERR_SINGULAR,
        Error::Numerical(_) => WB_ERR_NUMERICAL,
        Error::Io(_) => WB_ERR_IO,
        Error::Cache { .. } | Error::Format(_) => WB_ERR_FORMAT,
        Error::Stage { source, .. } => code_of(source),
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WB_OK,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            WB_ERR_NULL
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            code_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            WB_ERR_PANIC
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn invalid(msg: String) -> Failure {
    Failure::Lib(Error::InvalidArgument(msg))
}

fn to_problem(p: &WbProblem) -> Result<WaveProblem, Failure> {
    let ic = match p.ic {
        WB_IC_POLYNOMIAL => InitialCondition::Polynomial,
        WB_IC_MOLLIFIER => InitialCondition::mollifier(),
        WB_IC_SINGLE_MODE => InitialCondition::SingleMode,
        WB_IC_ZERO => InitialCondition::Zero,
        other => return Err(invalid(format!("unknown initial condition code {other}"))),
    };
    let problem = WaveProblem { l1: p.l1, l2: p.l2, c: p.c, t_final: p.t_final, ic };
    problem.validate()?;
    Ok(problem)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn wb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Unit square, `c = 1`, `T = 1`.
#[no_mangle]
pub extern "C" fn wb_problem_unit_square(ic: i32) -> WbProblem {
    WbProblem { l1: 1.0, l2: 1.0, c: 1.0, t_final: 1.0, ic }
}

/// Coarse resolution whose DoF best matches `dof_ep`.
#[no_mangle]
pub unsafe extern "C" fn wb_match_dof(dof_ep: f64, t_final: f64, out: *mut WbMatch) -> i32 {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let m = match_cn_to_dof(dof_ep, t_final)?;
        *out = WbMatch { n: m.n, nt: m.nt, dof_cn: m.dof_cn, dt: m.dt, mismatch: m.mismatch, root: m.root };
        Ok(())
    })
}

/// Fits the surrogate to the initial condition of `problem` from `samples`
/// Latin hypercube points. A negative `lambda` selects it by GCV over the
/// default grid.
#[no_mangle]
pub unsafe extern "C" fn wb_model_fit(
    problem: *const WbProblem,
    n_modes: usize,
    samples: usize,
    seed: u64,
    lambda: f64,
    out: *mut *mut WbModel,
) -> i32 {
    guard(|| {
        let problem = to_problem(unsafe { in_ref(problem, "problem") }?)?;
        let out = unsafe { out_ref(out, "out") }?;
        let choice = if lambda < 0.0 {
            LambdaChoice::Gcv(LambdaGrid::default().values()?)
        } else {
            LambdaChoice::Fixed(lambda)
        };
        let settings =
            FitSettings { n_modes, samples, seed, mode: LhsMode::Jittered, lambda: choice, noise_std: 0.0 };
        let (model, _) = fit_initial_condition(&problem, &settings)?;
        *out = Box::into_raw(Box::new(WbModel { inner: model }));
        Ok(())
    })
}

/// Loads a model from its JSON form.
#[no_mangle]
pub unsafe extern "C" fn wb_model_from_json(json: *const c_char, out: *mut *mut WbModel) -> i32 {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let out = unsafe { out_ref(out, "out") }?;
        let text = unsafe { CStr::from_ptr(json) }.to_str().map_err(|e| invalid(e.to_string()))?;
        let model = SpectralModel::from_json(text)?;
        *out = Box::into_raw(Box::new(WbModel { inner: model }));
        Ok(())
    })
}

/// Writes the model's JSON form into `buf` (NUL-terminated) when it fits.
/// `needed` always receives the required size including the terminator.
#[no_mangle]
pub unsafe extern "C" fn wb_model_to_json(model: *const WbModel, buf: *mut c_char, len: usize, needed: *mut usize) -> i32 {
    guard(|| {
        let model = unsafe { in_ref(model, "model") }?;
        let needed = unsafe { out_ref(needed, "needed") }?;
        let text = model.inner.to_json()?;
        *needed = text.len() + 1;
        if !buf.is_null() && len > text.len() {
            unsafe {
                std::ptr::copy_nonoverlapping(text.as_ptr().cast(), buf, text.len());
                *buf.add(text.len()) = 0;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wb_model_info(model: *const WbModel, out: *mut WbModelInfo) -> i32 {
    guard(|| {
        let m = &unsafe { in_ref(model, "model") }?.inner;
        let out = unsafe { out_ref(out, "out") }?;
        *out = WbModelInfo { n_modes: m.basis.n_modes, lambda: m.lambda, edof: m.edof, gcv_score: m.diagnostics.gcv_score };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wb_model_predict(model: *const WbModel, x: f64, y: f64, t: f64, out: *mut f64) -> i32 {
    guard(|| {
        let m = unsafe { in_ref(model, "model") }?;
        let out = unsafe { out_ref(out, "out") }?;
        *out = m.inner.predict(x, y, t)?;
        Ok(())
    })
}

/// Evaluates `count` points `(xs[i], ys[i], ts[i])` into `out[i]`.
#[no_mangle]
pub unsafe extern "C" fn wb_model_predict_many(
    model: *const WbModel,
    xs: *const f64,
    ys: *const f64,
    ts: *const f64,
    count: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let m = unsafe { in_ref(model, "model") }?;
        if count == 0 {
            return Ok(());
        }
        if xs.is_null() || ys.is_null() || ts.is_null() || out.is_null() {
            return Err(Failure::Null("point or output array"));
        }
        let (xs, ys, ts) = unsafe {
            (
                std::slice::from_raw_parts(xs, count),
                std::slice::from_raw_parts(ys, count),
                std::slice::from_raw_parts(ts, count),
            )
        };
        let out = unsafe { std::slice::from_raw_parts_mut(out, count) };
        for i in 0..count {
            out[i] = m.inner.predict(xs[i], ys[i], ts[i])?;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wb_model_free(model: *mut WbModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Solves on an `n x n` mesh with `nt` steps up to `problem.t_final`.
/// `variant` is a `WB_CN_*` code and `start` a `WB_START_*` code.
#[no_mangle]
pub unsafe extern "C" fn wb_fem_solve(
    problem: *const WbProblem,
    n: usize,
    nt: usize,
    variant: i32,
    start: i32,
    out: *mut *mut WbTrajectory,
) -> i32 {
    guard(|| {
        let p = to_problem(unsafe { in_ref(problem, "problem") }?)?;
        let out = unsafe { out_ref(out, "out") }?;
        let variant = match variant {
            WB_CN_CENTERED => CnVariant::Centered,
            WB_CN_LAGGED => CnVariant::Lagged,
            other => return Err(invalid(format!("unknown scheme code {other}"))),
        };
        let start = match start {
            WB_START_TAYLOR => StartRule::Taylor,
            WB_START_IMPLICIT => StartRule::Implicit,
            other => return Err(invalid(format!("unknown start code {other}"))),
        };
        if nt == 0 {
            return Err(invalid("at least one time step is required".into()));
        }
        let mesh = Arc::new(Mesh::structured(p.l1, p.l2, n, n)?);
        let sys = FemSystem::assemble(Arc::clone(&mesh), p.c)?;
        let u0 = mesh.sample_interior(|x, y| p.u0(x, y));
        let traj = cn_solve(&sys, &u0, p.t_final / nt as f64, nt, variant, start)?;
        *out = Box::into_raw(Box::new(WbTrajectory { inner: traj }));
        Ok(())
    })
}

/// Number of stored time levels (`nt + 1`).
#[no_mangle]
pub unsafe extern "C" fn wb_trajectory_levels(traj: *const WbTrajectory, out: *mut usize) -> i32 {
    guard(|| {
        let t = unsafe { in_ref(traj, "trajectory") }?;
        *unsafe { out_ref(out, "out") }? = t.inner.nt + 1;
        Ok(())
    })
}

/// Value at `(x, y, t)`; `sampling` is a `WB_TIME_*` code.
#[no_mangle]
pub unsafe extern "C" fn wb_trajectory_eval(
    traj: *const WbTrajectory,
    x: f64,
    y: f64,
    t: f64,
    sampling: i32,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let tr = unsafe { in_ref(traj, "trajectory") }?;
        let out = unsafe { out_ref(out, "out") }?;
        let sampling = match sampling {
            WB_TIME_LINEAR => TimeSampling::Linear,
            WB_TIME_HOLD => TimeSampling::Hold,
            other => return Err(invalid(format!("unknown time sampling code {other}"))),
        };
        *out = tr.inner.eval_sampled(x, y, t, sampling)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wb_trajectory_free(traj: *mut WbTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}
