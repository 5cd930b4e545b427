//! Bounded one-dimensional maximisation (Brent's parabolic/golden-section method).

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Maximises a unimodal `objective` on `[lo, hi]`; returns the argmax.
pub fn maximize_1d<F: Fn(f64) -> f64>(objective: F, lo: f64, hi: f64) -> Result<f64> {
    maximize_1d_tol(objective, lo, hi, 1e-10, 500)
}

pub fn maximize_1d_tol<F: Fn(f64) -> f64>(
    objective: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::NonFinite("maximisation interval"));
    }
    let f = |x: f64| -objective(x);
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(x);
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(m - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::MaxIterations(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shifted_parabola() {
        let x = maximize_1d(|x| -(x - 0.2) * (x - 0.2), -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.2, epsilon = 1e-8);
    }

    #[test]
    fn symmetric_parabola() {
        let x = maximize_1d(|x| -x * x, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn boundary_maximum() {
        let x = maximize_1d(|x| x, -1.0, 1.0).unwrap();
        assert!(x > 1.0 - 1e-7);
    }

    #[test]
    fn iteration_limit() {
        assert!(matches!(
            maximize_1d_tol(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-15, 3),
            Err(Error::MaxIterations(3))
        ));
    }
}
