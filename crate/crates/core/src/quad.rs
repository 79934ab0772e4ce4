//! Adaptive Simpson quadrature with interval bisection.
//!
//! The integrand is assumed bounded on the interval; the routine bisects
//! until the local Richardson error estimate meets its share of the
//! absolute tolerance, and reports the achieved error bound.

use crate::error::{Error, Result};

/// Default absolute tolerance for measure integrals.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 48;
const MIN_DEPTH: u32 = 4;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated Richardson error bound.
    pub abs_error: f64,
    pub evals: usize,
}

struct Ctx<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: usize,
    err: f64,
    max_depth: u32,
    converged: bool,
}

impl Ctx<'_> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Numeric {
                what: format!("integrand non-finite at y = {x}"),
                achieved: f64::INFINITY,
            });
        }
        Ok(v)
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    ctx: &mut Ctx,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = ctx.eval(lm)?;
    let frm = ctx.eval(rm)?;
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // A few forced bisections first: symmetric integrands can zero out the
    // top-level Richardson estimate and trigger a false acceptance.
    if (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) || h.abs() < 1e-14 {
        ctx.err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth >= ctx.max_depth {
        if delta.abs() <= 15.0 * tol {
            ctx.err += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        ctx.err += delta.abs();
        ctx.converged = false;
        return Ok(left + right);
    }
    let l = simpson_rec(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = simpson_rec(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    adaptive_simpson_capped(f, a, b, tol, MAX_DEPTH)
}

pub(crate) fn adaptive_simpson_capped(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("quadrature interval must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evals: 0,
        });
    }
    let mut ctx = Ctx {
        f,
        evals: 0,
        err: 0.0,
        max_depth,
        converged: true,
    };
    let m = 0.5 * (a + b);
    let fa = ctx.eval(a)?;
    let fm = ctx.eval(m)?;
    let fb = ctx.eval(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = simpson_rec(&mut ctx, a, b, fa, fm, fb, whole, tol, 0)?;
    if !ctx.converged && ctx.err > tol {
        return Err(Error::Numeric {
            what: format!("adaptive Simpson on [{a}, {b}]"),
            achieved: ctx.err,
        });
    }
    Ok(QuadResult {
        value,
        abs_error: ctx.err,
        evals: ctx.evals,
    })
}

/// Integrate over a union of disjoint intervals, splitting the tolerance
/// by relative length.
pub fn adaptive_simpson_multi(
    f: &dyn Fn(f64) -> f64,
    intervals: &[(f64, f64)],
    tol: f64,
) -> Result<QuadResult> {
    let total_len: f64 = intervals.iter().map(|(a, b)| (b - a).abs()).sum();
    let mut out = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        evals: 0,
    };
    if total_len == 0.0 {
        return Ok(out);
    }
    for &(a, b) in intervals {
        let share = ((b - a).abs() / total_len).max(1e-3);
        let r = adaptive_simpson(f, a, b, tol * share)?;
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.evals += r.evals;
    }
    Ok(out)
}
