//! Shared numerical routines: adaptive quadrature, bracketed root finding
//! and golden-section extremum refinement.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("integrand returned a non-finite value at {point}")]
    NonFiniteIntegrand { point: f64 },
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureNoConvergence { a: f64, b: f64 },
    #[error("root bracketing failed: {0}")]
    BracketFailure(String),
}

pub const QUAD_ABS_TOL: f64 = 1e-10;
pub const QUAD_MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature with interval bisection.
///
/// Sign-aware: `a > b` yields the negated integral over `[b, a]`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64, NumericError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, abs_tol).map(|v| -v);
    }
    let eval = |x: f64| -> Result<f64, NumericError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericError::NonFiniteIntegrand { point: x })
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(&eval, a, b, fa, fm, fb, whole, abs_tol, QUAD_MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<E>(
    eval: &E,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, NumericError>
where
    E: Fn(f64) -> Result<f64, NumericError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < f64::EPSILON * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(NumericError::QuadratureNoConvergence { a, b });
    }
    let half_tol = 0.5 * tol;
    Ok(simpson_rec(eval, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + simpson_rec(eval, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}

/// Bisection on a bracketing interval `[lo, hi]` with `f(lo)` and `f(hi)` of
/// opposite sign. Stops when the residual drops below `f_tol` or the bracket
/// is at floating-point resolution.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, f_tol: f64) -> Result<f64, NumericError>
where
    F: FnMut(f64) -> Result<f64, NumericError>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericError::BracketFailure(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm.abs() <= f_tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[a, b]` to argument tolerance `tol`.
/// Returns `(argmin, min)`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    let fm = f(xm);
    if f1.min(f2) < fm {
        if f1 < f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    } else {
        (xm, fm)
    }
}

/// Golden-section maximization; returns `(argmax, max)`.
pub fn golden_max<F>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (x, v) = golden_min(|y| -f(y), a, b, tol);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_exp() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1.0f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn simpson_reversed_sign() {
        let fwd = adaptive_simpson(|x| x.sin(), 0.0, 1.5, 1e-12).unwrap();
        let bwd = adaptive_simpson(|x| x.sin(), 1.5, 0.0, 1e-12).unwrap();
        assert!((fwd + bwd).abs() < 1e-14);
    }

    #[test]
    fn simpson_rejects_nonfinite() {
        let r = adaptive_simpson(|x| 1.0 / x, -1.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn golden_quadratic() {
        let (x, v) = golden_min(|y| (y - 0.3).powi(2) + 1.0, -5.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
