//! Diffusion model handling: the original process, the unit-diffusion
//! (Lamperti) transform `F(y) = ∫_{y0}^{y} du/σ(u)`, and classification of
//! the transformed diffusion interval.
//!
//! Two interval shapes are supported for the transformed process: the whole
//! real line (case A, Brownian reference) and the positive half-line
//! (case B, Bessel reference). An interval with a finite lower endpoint is
//! translated so that endpoint sits at zero before classification.

use crate::expr::{self, Compiled, Expr};
use crate::numeric::{self, NumericError};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error in `{field}`: {source}")]
    Parse {
        field: &'static str,
        #[source]
        source: expr::ParseError,
    },
    #[error("expression error: {0}")]
    Expr(#[from] expr::EvalError),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("diffusion coefficient is singular: {0}")]
    SingularCoefficient(NumericError),
    #[error("point {0} is outside the image of the transform")]
    OutOfRange(f64),
    #[error("unsupported diffusion interval: {0}")]
    UnsupportedInterval(String),
    #[error("model file error: {0}")]
    File(String),
}

/// Transformed-interval classification.
///
/// Case A: the whole real line, Brownian reference process.
/// Case B: the positive half-line, Bessel reference process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalCase {
    A,
    B,
}

impl IntervalCase {
    /// Lower endpoint of the transformed diffusion interval.
    pub fn lower(self) -> f64 {
        match self {
            IntervalCase::A => f64::NEG_INFINITY,
            IntervalCase::B => 0.0,
        }
    }
}

/// The original diffusion `dU = ν(U)dt + σ(U)dW` on a given interval.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    drift: Expr,
    diffusion: Expr,
    interval: (f64, f64),
    params: HashMap<String, f64>,
    y0: f64,
    sigma_c: Compiled,
    // g = ν/σ - σ'/2, the transformed drift before composition with F⁻¹
    g_c: Compiled,
    g_prime_c: Compiled,
}

impl DiffusionSpec {
    pub fn new(
        drift: Expr,
        diffusion: Expr,
        interval: (f64, f64),
        params: HashMap<String, f64>,
        y0: f64,
    ) -> Result<Self, ModelError> {
        let (lo, hi) = interval;
        if !(lo < hi) {
            return Err(ModelError::Invalid(format!(
                "interval [{lo}, {hi}] is empty"
            )));
        }
        if !(y0 > lo && y0 < hi) {
            return Err(ModelError::Invalid(format!(
                "anchor y0 = {y0} is not strictly inside ({lo}, {hi})"
            )));
        }
        let sigma_c = Compiled::new(&diffusion, &params)?;
        let sigma_prime = expr::differentiate(&diffusion);
        // g = ν/σ - σ'/2
        let g = expr::sub(
            expr::div(drift.clone(), diffusion.clone()),
            expr::mul(expr::constant(0.5), sigma_prime),
        );
        let g_prime = expr::differentiate(&g);
        let g_c = Compiled::new(&g, &params)?;
        let g_prime_c = Compiled::new(&g_prime, &params)?;
        let spec = DiffusionSpec {
            drift,
            diffusion,
            interval,
            params,
            y0,
            sigma_c,
            g_c,
            g_prime_c,
        };
        spec.check_sigma_positive()?;
        Ok(spec)
    }

    /// Parse a model from its JSON document form.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::File(e.to_string()))?;
        raw.build()
    }

    pub fn from_file(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::File(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn drift(&self) -> &Expr {
        &self.drift
    }

    pub fn diffusion(&self) -> &Expr {
        &self.diffusion
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn params(&self) -> &HashMap<String, f64> {
        &self.params
    }

    pub fn anchor(&self) -> f64 {
        self.y0
    }

    fn sigma(&self, v: f64) -> f64 {
        self.sigma_c.eval_f64(v)
    }

    fn check_sigma_positive(&self) -> Result<(), ModelError> {
        let (lo, hi) = self.interval;
        // sample interior points through a tangent map so infinite endpoints
        // are covered too
        for i in 1..50 {
            let u = i as f64 / 50.0; // (0, 1)
            let v = if lo.is_infinite() && hi.is_infinite() {
                (std::f64::consts::PI * (u - 0.5)).tan() * 2.0
            } else if hi.is_infinite() {
                lo + (std::f64::consts::FRAC_PI_2 * u).tan()
            } else if lo.is_infinite() {
                hi - (std::f64::consts::FRAC_PI_2 * (1.0 - u)).tan()
            } else {
                lo + (hi - lo) * u
            };
            let s = self.sigma(v);
            if !(s.is_finite() && s > 0.0) {
                return Err(ModelError::Invalid(format!(
                    "diffusion coefficient is not strictly positive at v = {v} (value {s})"
                )));
            }
        }
        Ok(())
    }

    /// `F(v) = ∫_{y0}^{v} du/σ(u)` by adaptive quadrature.
    pub fn lamperti_f(&self, v: f64) -> Result<f64, ModelError> {
        let (lo, hi) = self.interval;
        if !(v > lo && v < hi) {
            return Err(ModelError::Invalid(format!(
                "point {v} is not strictly inside ({lo}, {hi})"
            )));
        }
        numeric::adaptive_simpson(|u| 1.0 / self.sigma(u), self.y0, v, F_QUAD_TOL)
            .map_err(ModelError::SingularCoefficient)
    }

    /// Inverse of the transform: the `v` with `F(v) = x`, found by geometric
    /// bracket expansion from the anchor followed by bisection.
    pub fn lamperti_f_inv(&self, x: f64) -> Result<f64, ModelError> {
        if let Some(c) = self.constant_sigma() {
            let v = self.y0 + c * x;
            let (lo, hi) = self.interval;
            if v <= lo || v >= hi {
                return Err(ModelError::OutOfRange(x));
            }
            return Ok(v);
        }
        let mut f = IncrementalF::new(self);
        if x == 0.0 {
            return Ok(self.y0);
        }
        let (lo, hi) = self.interval;
        // expand a bracket away from the anchor in the direction of x
        let mut prev = self.y0;
        let mut step = 0.5 * self.y0.abs().max(1.0);
        let mut cur;
        let mut g_prev = -x; // F(y0) - x
        let mut found = None;
        for _ in 0..300 {
            cur = if x > 0.0 {
                let cand = prev + step;
                if cand >= hi {
                    0.5 * (prev + hi)
                } else {
                    cand
                }
            } else {
                let cand = prev - step;
                if cand <= lo {
                    0.5 * (prev + lo)
                } else {
                    cand
                }
            };
            if cur == prev || !cur.is_finite() {
                return Err(ModelError::OutOfRange(x));
            }
            let g_cur = f.eval(cur).map_err(ModelError::SingularCoefficient)? - x;
            if g_cur == 0.0 {
                return Ok(cur);
            }
            if g_cur.signum() != g_prev.signum() {
                found = Some((prev.min(cur), prev.max(cur)));
                break;
            }
            // widen while running free, halve the remaining distance near a
            // finite endpoint
            step *= 2.0;
            prev = cur;
            g_prev = g_cur;
        }
        let (a, b) = found.ok_or(ModelError::OutOfRange(x))?;
        let root = numeric::bisect(
            |v| f.eval(v).map(|fv| fv - x),
            a,
            b,
            F_INV_RESIDUAL_TOL,
        )
        .map_err(ModelError::SingularCoefficient)?;
        Ok(root)
    }

    fn constant_sigma(&self) -> Option<f64> {
        match self.sigma_c.tree() {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Image of an interval endpoint under `F`.
    fn endpoint_image(&self, endpoint: f64, toward_upper: bool) -> Result<EndpointImage, ModelError> {
        let mut f = IncrementalF::new(self);
        let mut prev_f = 0.0;
        let mut prev_d: Option<f64> = None;
        let mut nonshrink = 0usize;
        if endpoint.is_infinite() {
            let step0 = self.y0.abs().max(1.0);
            for k in 0..60 {
                let v = if toward_upper {
                    self.y0 + step0 * (2f64).powi(k)
                } else {
                    self.y0 - step0 * (2f64).powi(k)
                };
                let fv = f.eval(v).map_err(ModelError::SingularCoefficient)?;
                let d = fv - prev_f;
                if let Some(pd) = prev_d {
                    if d.abs() >= 0.95 * pd.abs() {
                        nonshrink += 1;
                        if nonshrink >= 8 {
                            return Ok(if toward_upper {
                                EndpointImage::DivergesPos
                            } else {
                                EndpointImage::DivergesNeg
                            });
                        }
                    } else {
                        nonshrink = 0;
                    }
                    if d.abs() < 1e-10 {
                        return Ok(EndpointImage::Finite(fv));
                    }
                }
                prev_d = Some(d);
                prev_f = fv;
            }
            // still growing after 60 doublings
            Ok(if toward_upper {
                EndpointImage::DivergesPos
            } else {
                EndpointImage::DivergesNeg
            })
        } else {
            // approach the finite endpoint geometrically from the anchor
            let gap0 = (self.y0 - endpoint).abs();
            let sign = if toward_upper { 1.0 } else { -1.0 };
            let mut last_ratio = 0.5;
            for k in 1..200 {
                let gap = gap0 * (2f64).powi(-k);
                // step from the endpoint toward the interior
                let v = endpoint - sign * gap;
                if v == endpoint {
                    break;
                }
                let fv = f.eval(v).map_err(ModelError::SingularCoefficient)?;
                let d = fv - prev_f;
                if k >= 2 {
                    let pd = prev_d.unwrap();
                    if pd != 0.0 {
                        last_ratio = (d / pd).clamp(-2.0, 2.0);
                    }
                    if d.abs() >= 0.95 * pd.abs() {
                        nonshrink += 1;
                        if nonshrink >= 8 {
                            return Ok(if toward_upper {
                                EndpointImage::DivergesPos
                            } else {
                                EndpointImage::DivergesNeg
                            });
                        }
                    } else {
                        nonshrink = 0;
                    }
                    let rho = last_ratio.abs().min(0.95);
                    let tail = d.abs() * rho / (1.0 - rho);
                    if d.abs() < 5e-12 || tail < 1e-11 {
                        let rho_s = last_ratio;
                        let extr = if rho_s.abs() < 1.0 {
                            fv + d * rho_s / (1.0 - rho_s)
                        } else {
                            fv
                        };
                        return Ok(EndpointImage::Finite(extr));
                    }
                }
                prev_d = Some(d);
                prev_f = fv;
            }
            Ok(EndpointImage::Finite(prev_f))
        }
    }
}

const F_QUAD_TOL: f64 = 1e-12;
const F_INV_RESIDUAL_TOL: f64 = 1e-10;

enum EndpointImage {
    DivergesNeg,
    DivergesPos,
    Finite(f64),
}

/// `F` evaluated incrementally: each call integrates only from the previous
/// query point, so repeated nearby evaluations (bracketing, bisection,
/// endpoint probing) stay cheap.
struct IncrementalF<'a> {
    spec: &'a DiffusionSpec,
    v: f64,
    f: f64,
}

impl<'a> IncrementalF<'a> {
    fn new(spec: &'a DiffusionSpec) -> Self {
        IncrementalF {
            spec,
            v: spec.y0,
            f: 0.0,
        }
    }

    fn eval(&mut self, v: f64) -> Result<f64, NumericError> {
        let inc = numeric::adaptive_simpson(|u| 1.0 / self.spec.sigma(u), self.v, v, F_QUAD_TOL)?;
        self.v = v;
        self.f += inc;
        Ok(self.f)
    }
}

type CoefFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The unit-diffusion process `dX = μ(X)dt + dW` on ℝ (case A) or (0, ∞)
/// (case B), with its drift and drift derivative as callables.
#[derive(Clone)]
pub struct TransformedDiffusion {
    mu: CoefFn,
    mu_prime: CoefFn,
    case: IntervalCase,
}

impl std::fmt::Debug for TransformedDiffusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformedDiffusion")
            .field("case", &self.case)
            .finish_non_exhaustive()
    }
}

impl TransformedDiffusion {
    /// Wrap drift callables directly.
    pub fn from_fns<F, G>(mu: F, mu_prime: G, case: IntervalCase) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TransformedDiffusion {
            mu: Arc::new(mu),
            mu_prime: Arc::new(mu_prime),
            case,
        }
    }

    /// Build from a unit-diffusion drift expression, with the derivative
    /// taken symbolically.
    pub fn from_unit_drift(
        drift: &Expr,
        params: &HashMap<String, f64>,
        case: IntervalCase,
    ) -> Result<Self, ModelError> {
        let mu_c = Compiled::new(drift, params)?;
        let mu_prime_c = Compiled::new(&expr::differentiate(drift), params)?;
        Ok(TransformedDiffusion {
            mu: Arc::new(move |y| mu_c.eval_f64(y)),
            mu_prime: Arc::new(move |y| mu_prime_c.eval_f64(y)),
            case,
        })
    }

    /// Apply the Lamperti transform to an original-coordinates model:
    /// `μ = (ν/σ - σ'/2) ∘ F⁻¹`, `μ' = ((ν/σ - σ'/2)' · σ) ∘ F⁻¹`.
    pub fn from_spec(spec: &DiffusionSpec) -> Result<Self, ModelError> {
        let (lo, hi) = spec.interval();
        let upper = spec.endpoint_image(hi, true)?;
        let lower = spec.endpoint_image(lo, false)?;
        let (case, shift) = match (lower, upper) {
            (EndpointImage::DivergesNeg, EndpointImage::DivergesPos) => (IntervalCase::A, 0.0),
            (EndpointImage::Finite(fa), EndpointImage::DivergesPos) => (IntervalCase::B, fa),
            (EndpointImage::Finite(_), EndpointImage::Finite(_))
            | (EndpointImage::DivergesNeg, EndpointImage::Finite(_)) => {
                return Err(ModelError::UnsupportedInterval(
                    "transformed interval has a finite upper endpoint".into(),
                ))
            }
            _ => {
                return Err(ModelError::UnsupportedInterval(
                    "could not classify the transformed interval".into(),
                ))
            }
        };
        let spec_mu = Arc::new(spec.clone());
        let spec_mu_prime = Arc::clone(&spec_mu);
        let mu: CoefFn = Arc::new(move |x: f64| match spec_mu.lamperti_f_inv(x + shift) {
            Ok(v) => spec_mu.g_c.eval_f64(v),
            Err(_) => f64::NAN,
        });
        let mu_prime: CoefFn = Arc::new(move |x: f64| {
            match spec_mu_prime.lamperti_f_inv(x + shift) {
                Ok(v) => spec_mu_prime.g_prime_c.eval_f64(v) * spec_mu_prime.sigma(v),
                Err(_) => f64::NAN,
            }
        });
        Ok(TransformedDiffusion { mu, mu_prime, case })
    }

    pub fn mu(&self, y: f64) -> f64 {
        (self.mu)(y)
    }

    pub fn mu_prime(&self, y: f64) -> f64 {
        (self.mu_prime)(y)
    }

    pub fn case(&self) -> IntervalCase {
        self.case
    }
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct ModelFile {
    drift: String,
    diffusion: String,
    #[serde(default)]
    params: HashMap<String, f64>,
    interval: (EndpointField, EndpointField),
    #[serde(default)]
    x0: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EndpointField {
    Num(f64),
    Named(String),
}

impl EndpointField {
    fn value(&self) -> Result<f64, ModelError> {
        match self {
            EndpointField::Num(v) => Ok(*v),
            EndpointField::Named(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(ModelError::File(format!(
                    "bad interval endpoint `{other}` (expected a number, \"inf\" or \"-inf\")"
                ))),
            },
        }
    }
}

impl ModelFile {
    fn build(self) -> Result<DiffusionSpec, ModelError> {
        let drift = expr::parse(&self.drift).map_err(|source| ModelError::Parse {
            field: "drift",
            source,
        })?;
        let diffusion = expr::parse(&self.diffusion).map_err(|source| ModelError::Parse {
            field: "diffusion",
            source,
        })?;
        let lo = self.interval.0.value()?;
        let hi = self.interval.1.value()?;
        let y0 = self.x0.unwrap_or(default_anchor(lo, hi));
        DiffusionSpec::new(drift, diffusion, (lo, hi), self.params, y0)
    }
}

fn default_anchor(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => 0.0,
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (true, true) => 0.5 * (lo + hi),
    }
}
