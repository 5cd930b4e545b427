//! Bracketed root finding (Brent's method) with geometric bracket expansion.

use crate::error::{Error, Result};

/// A scalar root-finding problem on the effect scale.
#[derive(Debug, Clone, Copy)]
pub struct RootProblem<F> {
    pub objective: F,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tol_x: f64,
    pub tol_f: f64,
    pub max_iter: usize,
}

/// Default absolute tolerance on the effect scale.
pub const TOL_X: f64 = 1e-8;
/// Default absolute tolerance on the probability scale.
pub const TOL_F: f64 = 1e-10;
const MAX_ITER: usize = 200;

impl<F: Fn(f64) -> f64> RootProblem<F> {
    pub fn new(objective: F, bracket_lo: f64, bracket_hi: f64) -> Self {
        Self {
            objective,
            bracket_lo,
            bracket_hi,
            tol_x: TOL_X,
            tol_f: TOL_F,
            max_iter: MAX_ITER,
        }
    }

    pub fn with_tolerances(mut self, tol_x: f64, tol_f: f64) -> Self {
        self.tol_x = tol_x;
        self.tol_f = tol_f;
        self
    }
}

/// Solves `objective(x) = 0` on the bracket with Brent's method.
///
/// The objective must change sign over the bracket.
pub fn find_root<F: Fn(f64) -> f64>(problem: &RootProblem<F>) -> Result<f64> {
    let f = &problem.objective;
    let (mut a, mut b) = (problem.bracket_lo, problem.bracket_hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NonFinite("objective at bracket end"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..problem.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * problem.tol_x;
        let m = 0.5 * (c - b);
        if fb.abs() <= problem.tol_f || m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NonFinite("objective"));
        }
    }
    Err(Error::MaxIterations(problem.max_iter))
}

/// Grows `[center - step, center + step]` geometrically until the objective
/// changes sign, never leaving `[limit_lo, limit_hi]`.
///
/// Returns the bracket, or [`Error::NoSignChange`] once both sides are pinned
/// at the limits.
pub fn expand_bracket<F: Fn(f64) -> f64>(
    f: &F,
    center: f64,
    step: f64,
    limit_lo: f64,
    limit_hi: f64,
) -> Result<(f64, f64)> {
    let center = center.clamp(limit_lo, limit_hi);
    let mut step = step.abs().max(1e-6);
    let mut lo = (center - step).max(limit_lo);
    let mut hi = (center + step).min(limit_hi);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    loop {
        if flo.is_nan() || fhi.is_nan() {
            return Err(Error::NonFinite("objective during bracket expansion"));
        }
        if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
            return Ok((lo, hi));
        }
        if lo <= limit_lo && hi >= limit_hi {
            return Err(Error::NoSignChange { lo, hi });
        }
        step *= 2.0;
        // For an increasing objective both values positive means the root is
        // to the left; move that side first but grow both.
        let new_lo = (center - step).max(limit_lo);
        let new_hi = (center + step).min(limit_hi);
        if new_lo < lo {
            lo = new_lo;
            flo = f(lo);
        }
        if new_hi > hi {
            hi = new_hi;
            fhi = f(hi);
        }
    }
}

/// Initial half-width used when bracketing a confidence limit.
pub const BRACKET_STEP: f64 = 0.05;

/// Solves `f(x) = target` for a nondecreasing `f`, searching outward from
/// `center` no further than `span` on either side.
pub fn invert_increasing<F: Fn(f64) -> f64>(f: F, target: f64, center: f64, span: f64) -> Result<f64> {
    let g = |x: f64| f(x) - target;
    let (lo, hi) = expand_bracket(&g, center, BRACKET_STEP, center - span, center + span)?;
    find_root(&RootProblem::new(g, lo, hi))
}

/// Solves `f(x) = target` for a nondecreasing `f` on `[lo, hi]`, searching
/// outward from `center`. A root beyond the region is replaced by the nearer
/// edge; the flag reports whether that happened.
pub fn invert_increasing_within<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    center: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, bool)> {
    let g = |x: f64| f(x) - target;
    match expand_bracket(&g, center, BRACKET_STEP, lo, hi) {
        Ok((a, b)) => find_root(&RootProblem::new(g, a, b)).map(|x| (x, false)),
        Err(Error::NoSignChange { .. }) => {
            let at_lo = g(lo);
            if at_lo.is_nan() {
                return Err(Error::NonFinite("objective at search edge"));
            }
            Ok((if at_lo > 0.0 { lo } else { hi }, true))
        }
        Err(e) => Err(e),
    }
}
