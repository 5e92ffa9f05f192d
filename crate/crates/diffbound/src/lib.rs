//! Sharp two-sided bounds for transition densities, transition
//! distributions, and boundary-crossing densities of one-dimensional
//! time-homogeneous diffusions.
//!
//! The pipeline: a diffusion `dV = ν(V)dt + σ(V)dW` is reduced to unit
//! diffusion coefficient by the change of variable `F(y) = ∫ du/σ(u)`.
//! The transformed process is compared against a reference process with a
//! known density (Brownian motion on ℝ, or a Bessel process on (0, ∞))
//! through an explicit change-of-measure weight. Bounding the weight gives
//!
//! ```text
//! e^{-tL/2} · e^{ΔG} p_ref  ≤  p  ≤  e^{-tM/2} · e^{ΔG} p_ref
//! ```
//!
//! where `L` and `M` are the essential supremum and infimum of
//! `μ'(y) + μ(y)²` (with a centrifugal correction in the Bessel case) and
//! `ΔG` integrates the drift gap between the two processes.
//!
//! # Quick start
//!
//! Bounds for the Ornstein-Uhlenbeck density `p(1, 0, ·)` at `w = 0`:
//!
//! ```
//! use diffbound::builtin::Builtin;
//! use diffbound::bounds::{density_bounds, estimate_lm, LmSearch};
//! use diffbound::reference::ReferenceKernel;
//!
//! let td = Builtin::Ou.transformed().unwrap();
//! let kernel = ReferenceKernel::default_for(td.case());
//! let (t, x, w) = (1.0, 0.0, 0.0);
//! let lm = estimate_lm(&td, kernel, &LmSearch::default_for(td.case(), x, t)).unwrap();
//! let b = density_bounds(&td, kernel, t, x, w, &lm).unwrap();
//!
//! // L = +inf for the OU drift, so the lower bound degenerates to 0;
//! // the upper bound e^{1/2} / sqrt(2 pi) is within 10% of the true value.
//! assert!(b.degenerate_lower && b.lower == 0.0);
//! assert!((b.upper - 0.6577446).abs() < 1e-5);
//! let exact = diffbound::builtin::ou_exact_density(t, x, w);
//! assert!(b.lower <= exact && exact <= b.upper);
//! ```
//!
//! Models can also be loaded from JSON (drift, diffusion, interval,
//! parameters) and transformed automatically:
//!
//! ```
//! use diffbound::model::{DiffusionSpec, TransformedDiffusion};
//!
//! let spec = DiffusionSpec::from_json(r#"{
//!     "drift": "p*y + q",
//!     "diffusion": "sqrt(2*r*y)",
//!     "params": {"p": 1.0, "q": 2.5, "r": 1.0},
//!     "interval": [0.0, "inf"]
//! }"#).unwrap();
//! let td = TransformedDiffusion::from_spec(&spec).unwrap();
//! // unit-diffusion drift mu(y) = (q/r - 1/2)/y + p y/2, so mu(1) = 2.5 here
//! assert!((td.mu(1.0) - 2.5).abs() < 1e-8);
//! ```

pub mod bounds;
pub mod builtin;
pub mod cli;
pub mod expr;
pub mod mc;
pub mod model;
pub mod numeric;
pub mod reference;
