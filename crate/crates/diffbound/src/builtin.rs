//! Built-in example models with registered closed-form transition
//! densities, used for comparison columns and end-to-end sandwich tests.
//!
//! - `ou`: `dS = -S dt + dW` on ℝ.
//! - `trunc-ou`: OU drift clamped to `[-c, c]` (bounded drift), on ℝ;
//!   no closed-form density is registered.
//! - `feller`: `dV = (pV + q)dt + sqrt(2rV)dW` on (0, ∞); queries are in
//!   the transformed coordinate `z = sqrt(2v/r)`.

use crate::expr;
use crate::model::{DiffusionSpec, IntervalCase, ModelError, TransformedDiffusion};
use crate::reference::{bessel_i, normal_cdf};
use std::collections::HashMap;

pub type ExactDensity = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// One of the registered example models.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Ou,
    TruncOu { c: f64 },
    Feller { p: f64, q: f64, r: f64 },
}

impl Builtin {
    /// Parse `ou`, `trunc-ou`, `feller`, optionally with parameter
    /// overrides: `trunc-ou:c=2`, `feller:p=1,q=2.5,r=1`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let mut kv: HashMap<&str, f64> = HashMap::new();
        if let Some(args) = args {
            for pair in args.split(',') {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| format!("bad parameter `{pair}` (expected key=value)"))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad numeric value in `{pair}`"))?;
                kv.insert(k.trim(), v);
            }
        }
        match name {
            "ou" => Ok(Builtin::Ou),
            "trunc-ou" => {
                let c = kv.get("c").copied().unwrap_or(1.0);
                if !(c > 0.0) {
                    return Err(format!("trunc-ou requires c > 0, got {c}"));
                }
                Ok(Builtin::TruncOu { c })
            }
            "feller" => {
                let p = kv.get("p").copied().unwrap_or(1.0);
                let q = kv.get("q").copied().unwrap_or(2.5);
                let r = kv.get("r").copied().unwrap_or(1.0);
                if !(r > 0.0) {
                    return Err(format!("feller requires r > 0, got {r}"));
                }
                Ok(Builtin::Feller { p, q, r })
            }
            other => Err(format!(
                "unknown example `{other}` (available: ou, trunc-ou, feller)"
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Ou => "ou",
            Builtin::TruncOu { .. } => "trunc-ou",
            Builtin::Feller { .. } => "feller",
        }
    }

    /// Drift of the model in expression-grammar form.
    pub fn drift_text(&self) -> String {
        match self {
            Builtin::Ou => "-y".into(),
            Builtin::TruncOu { .. } => "max(-c, min(c, -y))".into(),
            Builtin::Feller { .. } => "p*y + q".into(),
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Builtin::Ou => vec![],
            Builtin::TruncOu { c } => vec![("c", *c)],
            Builtin::Feller { p, q, r } => vec![("p", *p), ("q", *q), ("r", *r)],
        }
    }

    /// The unit-diffusion process for this model. The first two models are
    /// already in unit-diffusion form; the Feller model goes through the
    /// full transform.
    pub fn transformed(&self) -> Result<TransformedDiffusion, ModelError> {
        match self {
            Builtin::Ou => {
                let drift = expr::parse("-y").expect("builtin drift parses");
                TransformedDiffusion::from_unit_drift(&drift, &HashMap::new(), IntervalCase::A)
            }
            Builtin::TruncOu { c } => {
                let drift = expr::parse("max(-c, min(c, -y))").expect("builtin drift parses");
                let params = [("c".to_string(), *c)].into();
                TransformedDiffusion::from_unit_drift(&drift, &params, IntervalCase::A)
            }
            Builtin::Feller { p, q, r } => {
                // closed form of the transform z = sqrt(2v/r); the generic
                // composed route matches it but loses precision near 0
                let drift = expr::parse("(q/r - 1/2)/y + p*y/2").expect("builtin drift parses");
                let params = [
                    ("p".to_string(), *p),
                    ("q".to_string(), *q),
                    ("r".to_string(), *r),
                ]
                .into();
                TransformedDiffusion::from_unit_drift(&drift, &params, IntervalCase::B)
            }
        }
    }

    /// The model as a full original-coordinates spec.
    pub fn spec(&self) -> Result<DiffusionSpec, ModelError> {
        match self {
            Builtin::Ou => DiffusionSpec::new(
                expr::parse("-y").unwrap(),
                expr::parse("1").unwrap(),
                (f64::NEG_INFINITY, f64::INFINITY),
                HashMap::new(),
                0.0,
            ),
            Builtin::TruncOu { c } => DiffusionSpec::new(
                expr::parse("max(-c, min(c, -y))").unwrap(),
                expr::parse("1").unwrap(),
                (f64::NEG_INFINITY, f64::INFINITY),
                [("c".to_string(), *c)].into(),
                0.0,
            ),
            Builtin::Feller { p, q, r } => DiffusionSpec::new(
                expr::parse("p*y + q").unwrap(),
                expr::parse("sqrt(2*r*y)").unwrap(),
                (0.0, f64::INFINITY),
                [
                    ("p".to_string(), *p),
                    ("q".to_string(), *q),
                    ("r".to_string(), *r),
                ]
                .into(),
                0.5,
            ),
        }
    }

    /// Registered exact transition density in the transformed coordinate,
    /// when a closed form is known.
    pub fn exact_density(&self) -> Option<ExactDensity> {
        match self {
            Builtin::Ou => Some(Box::new(ou_exact_density)),
            Builtin::TruncOu { .. } => None,
            Builtin::Feller { p, q, r } => {
                let (p, q, r) = (*p, *q, *r);
                if q <= 0.5 * r {
                    // the closed form below needs the index q/r - 1 >= -1/2
                    return None;
                }
                Some(Box::new(move |t, x, w| feller_exact_density(p, q, r, t, x, w)))
            }
        }
    }

    /// All built-ins with their default parameters, for listings.
    pub fn all() -> Vec<Builtin> {
        vec![
            Builtin::Ou,
            Builtin::TruncOu { c: 1.0 },
            Builtin::Feller {
                p: 1.0,
                q: 2.5,
                r: 1.0,
            },
        ]
    }
}

/// Exact OU transition density
/// `p_S(t,x,w) = e^t / sqrt(pi (e^{2t}-1)) exp((w e^t - x)^2 / (1 - e^{2t}))`.
pub fn ou_exact_density(t: f64, x: f64, w: f64) -> f64 {
    let e_t = t.exp();
    let e_2t = (2.0 * t).exp();
    e_t / (std::f64::consts::PI * (e_2t - 1.0)).sqrt()
        * ((w * e_t - x).powi(2) / (1.0 - e_2t)).exp()
}

/// Exact OU transition distribution: Gaussian with mean `x e^{-t}` and
/// variance `(1 - e^{-2t})/2`.
pub fn ou_exact_cdf(t: f64, x: f64, w: f64) -> f64 {
    let mean = x * (-t).exp();
    let sd = ((1.0 - (-2.0 * t).exp()) / 2.0).sqrt();
    normal_cdf((w - mean) / sd)
}

/// Exact OU crossing density at level 0:
/// `η_S(t,x,0,z) = exp(-(|z| - x e^{-t})^2/(1-e^{-2t})) / sqrt(pi (1-e^{-2t}))`.
pub fn ou_exact_crossing_density(t: f64, x: f64, z: f64) -> f64 {
    let v = 1.0 - (-2.0 * t).exp();
    (-(z.abs() - x * (-t).exp()).powi(2) / v).exp() / (std::f64::consts::PI * v).sqrt()
}

/// Exact density of the transformed Feller process at `w`, obtained from
/// the square-root-process density (noncentral-χ² type with index
/// `q/r - 1`) and the change of variable `v = r z²/2`.
pub fn feller_exact_density(p: f64, q: f64, r: f64, t: f64, x: f64, w: f64) -> f64 {
    if w <= 0.0 || x <= 0.0 || t <= 0.0 {
        return 0.0;
    }
    let v_x = r * x * x / 2.0;
    let v_w = r * w * w / 2.0;
    // c = p / (r (e^{pt} - 1)), with the p -> 0 limit 1/(rt)
    let c = if p.abs() > 1e-12 {
        p / (r * (p * t).exp_m1())
    } else {
        1.0 / (r * t)
    };
    let u = c * v_x * (p * t).exp();
    let v = c * v_w;
    let index = q / r - 1.0;
    let z = 2.0 * (u * v).sqrt();
    let density_v = c
        * (v / u).powf(index / 2.0)
        * (-(u.sqrt() - v.sqrt()).powi(2)).exp()
        * bessel_i(index, z, true);
    density_v * r * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_simpson;

    #[test]
    fn parse_names_and_overrides() {
        assert_eq!(Builtin::parse("ou").unwrap(), Builtin::Ou);
        assert_eq!(
            Builtin::parse("trunc-ou:c=2").unwrap(),
            Builtin::TruncOu { c: 2.0 }
        );
        assert_eq!(
            Builtin::parse("feller").unwrap(),
            Builtin::Feller {
                p: 1.0,
                q: 2.5,
                r: 1.0
            }
        );
        assert!(Builtin::parse("cir").is_err());
        assert!(Builtin::parse("trunc-ou:c=oops").is_err());
    }

    #[test]
    fn lists_three_builtins() {
        assert_eq!(Builtin::all().len(), 3);
    }

    #[test]
    fn ou_density_peak_value() {
        // p_S(1, 0, 0) = e / sqrt(pi (e^2 - 1))
        let v = ou_exact_density(1.0, 0.0, 0.0);
        assert!((v - 0.6067380).abs() < 1e-6, "{v}");
    }

    #[test]
    fn ou_density_normalizes() {
        let mass = adaptive_simpson(|w| ou_exact_density(0.7, 0.3, w), -10.0, 10.0, 1e-10)
            .unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ou_cdf_median_at_mean() {
        let v = ou_exact_cdf(0.9, 0.8, 0.8 * (-0.9f64).exp());
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ou_crossing_exact_value() {
        let v = ou_exact_crossing_density(1.0, -0.5, -0.5);
        assert!((v - 0.3532).abs() < 1e-3, "{v}");
    }

    #[test]
    fn feller_density_normalizes() {
        let mass = adaptive_simpson(
            |w| feller_exact_density(1.0, 2.5, 1.0, 0.5, 0.5, w),
            0.0,
            20.0,
            1e-10,
        )
        .unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn trunc_ou_has_no_registered_exact() {
        assert!(Builtin::TruncOu { c: 1.0 }.exact_density().is_none());
        assert!(Builtin::Ou.exact_density().is_some());
    }
}
