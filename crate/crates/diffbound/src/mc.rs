//! Monte Carlo oracle: predictor-corrector path simulation, kernel density
//! estimation of the endpoint law, crossing-event tracking, and a direct
//! simulation check of the change-of-measure identity
//! `Pr_x(A) = Ê_x[e^{G(X_t)-G(x)} e^{-N(t)/2} 1_A]`.
//!
//! Every path draws from its own counter-based substream keyed by
//! `(seed, path index)`, so results are bit-identical for a fixed seed
//! regardless of how paths are scheduled across threads.

use crate::bounds::{self, BoundsError};
use crate::model::{IntervalCase, TransformedDiffusion};
use crate::reference::ReferenceKernel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("sample too small: need at least {need}, got {got}")]
    SampleTooSmall { need: usize, got: usize },
    #[error("degenerate sample (zero variance)")]
    DegenerateSample,
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Simulation run description.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub t: f64,
    pub x: f64,
    pub seed: u64,
    pub barrier: Option<f64>,
}

impl SimConfig {
    fn validate(&self) -> Result<(), McError> {
        if self.n_paths < 1 {
            return Err(McError::InvalidConfig("n_paths must be >= 1".into()));
        }
        if self.n_steps < 1 {
            return Err(McError::InvalidConfig("n_steps must be >= 1".into()));
        }
        if !(self.t > 0.0) {
            return Err(McError::InvalidConfig(format!(
                "t must be positive, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// Simulation output; all arrays have length `n_paths`. Paths flagged
/// invalid carry NaN endpoints and are counted in `excluded`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub endpoints: Vec<f64>,
    pub crossings: Option<Vec<bool>>,
    pub log_weights: Option<Vec<f64>>,
    pub excluded: usize,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

struct PathOutcome {
    endpoint: f64,
    crossed: bool,
    valid: bool,
}

fn run_path(td: &TransformedDiffusion, cfg: &SimConfig, idx: u64) -> PathOutcome {
    let mut rng = path_rng(cfg.seed, idx);
    let dt = cfg.t / cfg.n_steps as f64;
    let sq_dt = dt.sqrt();
    let positivity = td.case() == IntervalCase::B;
    let mut x = cfg.x;
    let mut crossed = cfg.barrier.map(|b| x >= b).unwrap_or(false);
    for _ in 0..cfg.n_steps {
        let mut next = f64::NAN;
        let mut ok = false;
        // reject-and-resample when a step exits the positive half-line
        for _ in 0..100 {
            let dw: f64 = sq_dt * rng.sample::<f64, _>(StandardNormal);
            let mu_x = td.mu(x);
            let pred = x + mu_x * dt + dw;
            if positivity && pred <= 0.0 {
                continue;
            }
            let cand = x + 0.5 * (td.mu(pred) + mu_x) * dt + dw;
            if positivity && cand <= 0.0 {
                continue;
            }
            next = cand;
            ok = true;
            break;
        }
        if !ok || !next.is_finite() {
            return PathOutcome {
                endpoint: f64::NAN,
                crossed: false,
                valid: false,
            };
        }
        x = next;
        if let Some(b) = cfg.barrier {
            crossed = crossed || x >= b;
        }
    }
    PathOutcome {
        endpoint: x,
        crossed,
        valid: true,
    }
}

/// Simulate endpoint samples of the transformed diffusion (discrete barrier
/// monitoring at step endpoints when a barrier is set).
pub fn simulate_paths(td: &TransformedDiffusion, cfg: &SimConfig) -> Result<SimResult, McError> {
    cfg.validate()?;
    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(td, cfg, i))
        .collect();
    let excluded = outcomes.iter().filter(|o| !o.valid).count();
    let endpoints = outcomes.iter().map(|o| o.endpoint).collect();
    let crossings = cfg
        .barrier
        .map(|_| outcomes.iter().map(|o| o.crossed).collect());
    Ok(SimResult {
        endpoints,
        crossings,
        log_weights: None,
        excluded,
    })
}

/// Gaussian kernel density estimate with the Silverman bandwidth
/// `1.06 σ̂ n^{-1/5}`; returns `(estimate, stderr)` with the asymptotic
/// KDE standard error `sqrt(f̂ ∫K² / (n h))`.
pub fn kde_density(samples: &[f64], w: f64) -> Result<(f64, f64), McError> {
    let clean: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    let n = clean.len();
    if n < 100 {
        return Err(McError::SampleTooSmall { need: 100, got: n });
    }
    let nf = n as f64;
    let mean = clean.iter().sum::<f64>() / nf;
    let var = clean.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return Err(McError::DegenerateSample);
    }
    let h = 1.06 * var.sqrt() * nf.powf(-0.2);
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let estimate = clean
        .iter()
        .map(|xi| (-0.5 * ((w - xi) / h).powi(2)).exp() / (norm * h))
        .sum::<f64>()
        / nf;
    // ∫K² = 1/(2 sqrt(pi)) for the Gaussian kernel
    let k2 = 0.5 / std::f64::consts::PI.sqrt();
    let stderr = (estimate * k2 / (nf * h)).max(0.0).sqrt();
    Ok((estimate, stderr))
}

/// Endpoint event for [`girsanov_check`].
#[derive(Debug, Clone, Copy)]
pub enum McEvent {
    /// `{X_t <= w}`
    Below(f64),
    /// `{X_t in [a, b)}`
    Interval(f64, f64),
}

impl McEvent {
    fn holds(&self, x: f64) -> bool {
        match *self {
            McEvent::Below(w) => x <= w,
            McEvent::Interval(a, b) => x >= a && x < b,
        }
    }
}

/// Estimate `Pr_x(A)` by simulating REFERENCE paths (Brownian in case A,
/// Bessel in case B) and weighting the event indicator with
/// `e^{G(X_t)-G(x) - N(t)/2}`, where `N(t)` accumulates the `h` integrand
/// by the trapezoidal rule along each path. Returns `(estimate, stderr)`.
pub fn girsanov_check(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    event: McEvent,
    cfg: &SimConfig,
) -> Result<(f64, f64), McError> {
    cfg.validate()?;
    let reference_td = match kernel {
        ReferenceKernel::Brownian => {
            TransformedDiffusion::from_fns(|_| 0.0, |_| 0.0, IntervalCase::A)
        }
        ReferenceKernel::Bessel { d } => TransformedDiffusion::from_fns(
            move |y| (d - 1.0) / (2.0 * y),
            move |y| -(d - 1.0) / (2.0 * y * y),
            IntervalCase::B,
        ),
    };
    let dt = t / cfg.n_steps as f64;
    let sq_dt = dt.sqrt();
    let positivity = td.case() == IntervalCase::B;
    let contributions: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(cfg.seed, idx);
            let mut y = x;
            let mut h_prev = bounds::n_integrand(td, kernel, y);
            let mut n_acc = 0.0f64;
            for _ in 0..cfg.n_steps {
                let mut stepped = false;
                for _ in 0..100 {
                    let dw: f64 = sq_dt * rng.sample::<f64, _>(StandardNormal);
                    let mu_y = reference_td.mu(y);
                    let pred = y + mu_y * dt + dw;
                    if positivity && pred <= 0.0 {
                        continue;
                    }
                    let cand = y + 0.5 * (reference_td.mu(pred) + mu_y) * dt + dw;
                    if positivity && cand <= 0.0 {
                        continue;
                    }
                    y = cand;
                    stepped = true;
                    break;
                }
                if !stepped || !y.is_finite() {
                    return f64::NAN;
                }
                let h_now = bounds::n_integrand(td, kernel, y);
                n_acc += 0.5 * dt * (h_prev + h_now);
                h_prev = h_now;
            }
            if !event.holds(y) {
                return 0.0;
            }
            match bounds::g_delta(td, kernel, x, y) {
                Ok(gd) => (gd - 0.5 * n_acc).exp(),
                Err(_) => f64::NAN,
            }
        })
        .collect();
    let clean: Vec<f64> = contributions
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if clean.is_empty() {
        return Err(McError::DegenerateSample);
    }
    let nf = clean.len() as f64;
    let mean = clean.iter().sum::<f64>() / nf;
    let var = clean.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}
