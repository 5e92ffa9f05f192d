//! Closed-form transition kernels of the reference processes: Brownian
//! motion (case A) and the Bessel process of real dimension `d >= 3`
//! (case B), plus the Brownian crossing kernel.
//!
//! The Bessel kernel is
//! `p_R(t,y,z) = z (z/y)^η t⁻¹ exp(-(y²+z²)/2t) I_η(yz/t)`, `η = d/2 - 1`,
//! and is always evaluated through the exponentially scaled modified Bessel
//! function so that small `t` does not overflow.

use crate::model::IntervalCase;
use crate::numeric::{self, NumericError};
use statrs::function::erf;
use statrs::function::gamma::gamma;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RefError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("argument {0} is outside the reference diffusion interval")]
    OutOfInterval(f64),
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
    #[error("quadrature failure: {0}")]
    Numeric(#[from] NumericError),
}

/// Reference process kernel selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKernel {
    Brownian,
    Bessel { d: f64 },
}

impl ReferenceKernel {
    /// Bessel kernel of dimension `d`; requires `d >= 3`.
    pub fn bessel(d: f64) -> Result<Self, RefError> {
        if !(d >= 3.0) {
            return Err(RefError::Unsupported("Bessel reference requires d >= 3"));
        }
        Ok(ReferenceKernel::Bessel { d })
    }

    /// Default kernel for an interval case (Bessel defaults to d = 3).
    pub fn default_for(case: IntervalCase) -> Self {
        match case {
            IntervalCase::A => ReferenceKernel::Brownian,
            IntervalCase::B => ReferenceKernel::Bessel { d: 3.0 },
        }
    }

    /// Bessel index `η = d/2 - 1`; `None` for the Brownian kernel.
    pub fn eta(&self) -> Option<f64> {
        match self {
            ReferenceKernel::Brownian => None,
            ReferenceKernel::Bessel { d } => Some(d / 2.0 - 1.0),
        }
    }

    pub fn case(&self) -> IntervalCase {
        match self {
            ReferenceKernel::Brownian => IntervalCase::A,
            ReferenceKernel::Bessel { .. } => IntervalCase::B,
        }
    }
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the first kind, real order
// ---------------------------------------------------------------------------

const SERIES_ASYMPTOTIC_SWITCH: f64 = 30.0;

/// `I_order(z)` for `order >= -0.5`, `z >= 0`. With `scaled` the
/// overflow-safe form `exp(-z) I_order(z)` is returned.
///
/// Ascending power series for `z <= 30`, large-argument asymptotic
/// expansion beyond; the two branches agree to 1e-9 relative on the
/// hand-over band.
pub fn bessel_i(order: f64, z: f64, scaled: bool) -> f64 {
    debug_assert!(order >= -0.5, "order must be >= -0.5");
    debug_assert!(z >= 0.0, "argument must be non-negative");
    if z <= SERIES_ASYMPTOTIC_SWITCH {
        bessel_i_series(order, z, scaled)
    } else {
        bessel_i_asymptotic(order, z, scaled)
    }
}

/// Ascending series `Σ_k (z/2)^{order+2k} / (k! Γ(order+k+1))`.
pub(crate) fn bessel_i_series(order: f64, z: f64, scaled: bool) -> f64 {
    if z == 0.0 {
        let v = if order == 0.0 {
            1.0
        } else if order > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        return v; // e^{-0} = 1, scaled and unscaled agree
    }
    let half = 0.5 * z;
    let mut term = half.powf(order) / gamma(order + 1.0);
    let q = half * half;
    let mut sum = term;
    for k in 0..500 {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (order + kf + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    if scaled {
        sum * (-z).exp()
    } else {
        sum
    }
}

/// Large-argument expansion
/// `I_ν(z) ~ e^z/√(2πz) Σ_k (-1)^k a_k(ν)/z^k`,
/// `a_k = Π_{j=1..k} (4ν² - (2j-1)²) / (8j)`.
pub(crate) fn bessel_i_asymptotic(order: f64, z: f64, scaled: bool) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev_abs = f64::INFINITY;
    for k in 1..=40 {
        let kf = k as f64;
        let factor = (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        term *= -factor / z;
        if term.abs() >= prev_abs {
            break; // asymptotic series: stop at the smallest term
        }
        sum += term;
        prev_abs = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let s = sum / (2.0 * std::f64::consts::PI * z).sqrt();
    if scaled {
        s
    } else {
        s * z.exp()
    }
}

// ---------------------------------------------------------------------------
// Transition kernels
// ---------------------------------------------------------------------------

pub(crate) fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn normal_cdf(u: f64) -> f64 {
    0.5 * (1.0 + erf::erf(u / std::f64::consts::SQRT_2))
}

fn check_time(t: f64) -> Result<(), RefError> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(RefError::NonPositiveTime(t))
    }
}

/// Transition density `p_Y(t, x, w)` of the reference process.
pub fn ref_density(kernel: ReferenceKernel, t: f64, x: f64, w: f64) -> Result<f64, RefError> {
    check_time(t)?;
    match kernel {
        ReferenceKernel::Brownian => Ok(normal_pdf((w - x) / t.sqrt()) / t.sqrt()),
        ReferenceKernel::Bessel { d } => {
            if x <= 0.0 {
                return Err(RefError::OutOfInterval(x));
            }
            if w < 0.0 {
                return Err(RefError::OutOfInterval(w));
            }
            Ok(bessel_density(d, t, x, w))
        }
    }
}

/// Bessel kernel with the `exp(-(x-w)²/2t)` grouping; accepts `w = 0`
/// (density vanishes there for d >= 3).
fn bessel_density(d: f64, t: f64, x: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let eta = d / 2.0 - 1.0;
    let scaled_i = bessel_i(eta, x * w / t, true);
    w * (w / x).powf(eta) / t * (-(x - w) * (x - w) / (2.0 * t)).exp() * scaled_i
}

/// Transition distribution `P_Y(t, x, w)`.
///
/// Brownian via the error function; Bessel by adaptive quadrature of the
/// density over `(0, w]` to 1e-9 absolute.
pub fn ref_cdf(kernel: ReferenceKernel, t: f64, x: f64, w: f64) -> Result<f64, RefError> {
    check_time(t)?;
    match kernel {
        ReferenceKernel::Brownian => Ok(normal_cdf((w - x) / t.sqrt())),
        ReferenceKernel::Bessel { d } => {
            if x <= 0.0 {
                return Err(RefError::OutOfInterval(x));
            }
            if w <= 0.0 {
                return Ok(0.0);
            }
            if w.is_infinite() {
                return Ok(1.0);
            }
            // piecewise so a narrow density bump cannot be missed by the
            // first coarse subdivision
            let step = (2.0 * t.sqrt()).min(w);
            let mut acc = 0.0;
            let mut a = 0.0;
            while a < w {
                let b = (a + step).min(w);
                acc += numeric::adaptive_simpson(|z| bessel_density(d, t, x, z), a, b, 1e-10)?;
                a = b;
            }
            Ok(acc.clamp(0.0, 1.0))
        }
    }
}

/// Brownian crossing kernel: the `w`-density of
/// `{sup_{s<=t} X_s >= level, X_t <= w}`.
///
/// For `level <= max(x, w)` the sup-event is implied and the plain
/// transition density is returned. The Bessel kernel has no crossing form
/// here and reports an unsupported operation.
pub fn ref_crossing_density(
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    level: f64,
    w: f64,
) -> Result<f64, RefError> {
    check_time(t)?;
    match kernel {
        ReferenceKernel::Bessel { .. } => Err(RefError::Unsupported(
            "crossing kernel is only available for the Brownian reference",
        )),
        ReferenceKernel::Brownian => {
            if level < x.max(w) {
                return ref_density(kernel, t, x, w);
            }
            let u = 2.0 * level - x - w;
            Ok((-u * u / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt())
        }
    }
}
