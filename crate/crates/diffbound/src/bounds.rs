//! The bound machinery: `G` increments, the `N`-integrand, essential
//! extrema `L`/`M`, and the four bound families (density, small-time
//! asymptotic, distribution, crossing density).
//!
//! For a unit-diffusion drift `μ` the integrand is
//! `h(y) = μ'(y) + μ²(y)` on ℝ and
//! `h(y) = μ'(y) - (d-1)(d-3)/(4y²) + μ²(y)` on (0, ∞); the density
//! sandwich is
//! `e^{-tL/2} <= p_X / (e^{G(w)-G(x)} p_Y) <= e^{-tM/2}`
//! with `L = ess sup h` and `M = ess inf h`.
//!
//! Divergent extrema degrade gracefully: `L = +∞` yields a zero lower
//! bound, `M = -∞` an infinite upper bound, both flagged on the result.

use crate::model::{IntervalCase, TransformedDiffusion};
use crate::numeric::{self, NumericError};
use crate::reference::{self, RefError, ReferenceKernel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("reference kernel does not match the diffusion interval case")]
    KernelMismatch,
    #[error(transparent)]
    Ref(#[from] RefError),
    #[error("quadrature failure near a singular integrand: {0}")]
    Numeric(#[from] NumericError),
    #[error("drift evaluation returned a non-finite value at y = {0}")]
    NonFinite(f64),
    #[error("empty search domain [{0}, {1}]")]
    EmptyDomain(f64, f64),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

fn check_kernel(td: &TransformedDiffusion, kernel: ReferenceKernel) -> Result<(), BoundsError> {
    if kernel.case() == td.case() {
        Ok(())
    } else {
        Err(BoundsError::KernelMismatch)
    }
}

// ---------------------------------------------------------------------------
// G increments and the N-integrand
// ---------------------------------------------------------------------------

/// `G(w) - G(x)`: the integral over `[x, w]` of `μ(z)` (case A) or
/// `μ(z) - (d-1)/(2z)` (case B). Independent of the anchor by construction.
pub fn g_delta(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    x: f64,
    w: f64,
) -> Result<f64, BoundsError> {
    check_kernel(td, kernel)?;
    let lower = td.case().lower();
    if x <= lower || w <= lower {
        return Err(BoundsError::NonFinite(x.min(w)));
    }
    let integrand = g_integrand(td, kernel);
    Ok(numeric::adaptive_simpson(integrand, x, w, 1e-10)?)
}

fn g_integrand<'a>(
    td: &'a TransformedDiffusion,
    kernel: ReferenceKernel,
) -> impl Fn(f64) -> f64 + 'a {
    move |z: f64| match kernel {
        ReferenceKernel::Brownian => td.mu(z),
        ReferenceKernel::Bessel { d } => td.mu(z) - (d - 1.0) / (2.0 * z),
    }
}

/// The `N`-integrand `h(y)` whose essential extrema are `L` and `M`.
pub fn n_integrand(td: &TransformedDiffusion, kernel: ReferenceKernel, y: f64) -> f64 {
    let mu = td.mu(y);
    let base = td.mu_prime(y) + mu * mu;
    match kernel {
        ReferenceKernel::Brownian => base,
        ReferenceKernel::Bessel { d } => base - (d - 1.0) * (d - 3.0) / (4.0 * y * y),
    }
}

// ---------------------------------------------------------------------------
// Essential extrema
// ---------------------------------------------------------------------------

/// Search configuration for [`estimate_lm`].
#[derive(Debug, Clone)]
pub struct LmSearch {
    /// Search interval; when restricted, endpoint-divergence probing is off
    /// (the extrema are then taken over exactly this range).
    pub domain: (f64, f64),
    /// Whether `domain` is the default full-interval working window, which
    /// enables tail analysis toward the interval endpoints.
    pub full_interval: bool,
    pub grid_n: usize,
    pub refine_tol: f64,
}

pub const DEFAULT_GRID_N: usize = 2001;
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;

impl LmSearch {
    /// Default working window: case A `[-R, R]`, case B `[1e-4 R, R]` with
    /// `R = max(10, |x| + 10 sqrt(t))`.
    pub fn default_for(case: IntervalCase, x: f64, t: f64) -> Self {
        let r = 10.0f64.max(x.abs() + 10.0 * t.sqrt());
        let domain = match case {
            IntervalCase::A => (-r, r),
            IntervalCase::B => (1e-4 * r, r),
        };
        LmSearch {
            domain,
            full_interval: true,
            grid_n: DEFAULT_GRID_N,
            refine_tol: DEFAULT_REFINE_TOL,
        }
    }

    /// Restrict the extremum search to `[lo, hi]`.
    pub fn restricted(lo: f64, hi: f64) -> Self {
        LmSearch {
            domain: (lo, hi),
            full_interval: false,
            grid_n: DEFAULT_GRID_N,
            refine_tol: DEFAULT_REFINE_TOL,
        }
    }
}

/// Extended-real essential-extrema estimate of the `N`-integrand.
#[derive(Debug, Clone)]
pub struct LMEstimate {
    /// `ess sup h`; `+∞` when the integrand diverges toward an endpoint.
    pub l: f64,
    /// `ess inf h`; `-∞` when the integrand diverges downward.
    pub m: f64,
    /// Attainment point; `None` marks an endpoint limit or divergence.
    pub arg_l: Option<f64>,
    pub arg_m: Option<f64>,
    pub domain: (f64, f64),
    pub grid_n: usize,
}

impl LMEstimate {
    /// Analytic override, bypassing the numerical search.
    pub fn analytic(l: f64, m: f64) -> Self {
        LMEstimate {
            l,
            m,
            arg_l: None,
            arg_m: None,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            grid_n: 0,
        }
    }
}

enum TailBehavior {
    DivergesUp,
    DivergesDown,
    Limit(f64),
}

/// Classify a function along a probe sequence toward an endpoint from its
/// `(point, value)` pairs: monotone non-shrinking increments over eight
/// consecutive probes count as divergence, shrinking increments as
/// convergence to a limit.
fn tail_behavior<I>(pairs: I) -> Result<TailBehavior, BoundsError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut prev: Option<f64> = None;
    let mut prev_d: Option<f64> = None;
    let mut up = 0usize;
    let mut down = 0usize;
    let mut last = f64::NAN;
    for (p, v) in pairs {
        if v.is_nan() {
            return Err(BoundsError::NonFinite(p));
        }
        last = v;
        if let Some(pv) = prev {
            let d = v - pv;
            if let Some(pd) = prev_d {
                if d > 0.0 && pd > 0.0 && d >= 0.95 * pd {
                    up += 1;
                    down = 0;
                } else if d < 0.0 && pd < 0.0 && d.abs() >= 0.95 * pd.abs() {
                    down += 1;
                    up = 0;
                } else {
                    up = 0;
                    down = 0;
                }
                if up >= 8 || v == f64::INFINITY {
                    return Ok(TailBehavior::DivergesUp);
                }
                if down >= 8 || v == f64::NEG_INFINITY {
                    return Ok(TailBehavior::DivergesDown);
                }
                if d.abs() <= 1e-12 * v.abs().max(1.0) {
                    return Ok(TailBehavior::Limit(v));
                }
            }
            prev_d = Some(d);
        }
        prev = Some(v);
    }
    Ok(TailBehavior::Limit(last))
}

/// Geometric probe sequences from the edge of the working window toward
/// each endpoint of the diffusion interval.
fn tail_probe_sequences(case: IntervalCase, domain: (f64, f64)) -> Vec<Vec<f64>> {
    let (a, b) = domain;
    match case {
        IntervalCase::A => {
            let up0 = b.abs().max(1.0);
            let dn0 = a.abs().max(1.0);
            vec![
                (0..200).map(|k| up0 * (2f64).powi(k)).collect(),
                (0..200).map(|k| -dn0 * (2f64).powi(k)).collect(),
            ]
        }
        IntervalCase::B => {
            let up0 = b.max(1.0);
            vec![
                (0..200).map(|k| up0 * (2f64).powi(k)).collect(),
                (0..600)
                    .map(|k| a * (2f64).powi(-k))
                    .take_while(|v| *v > 0.0)
                    .collect(),
            ]
        }
    }
}

/// Estimate `L = ess sup h` and `M = ess inf h` by grid evaluation,
/// golden-section refinement of the best cells, and tail-monotonicity
/// analysis toward the interval endpoints.
pub fn estimate_lm(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    search: &LmSearch,
) -> Result<LMEstimate, BoundsError> {
    check_kernel(td, kernel)?;
    let (a, b) = search.domain;
    if !(a < b) {
        return Err(BoundsError::EmptyDomain(a, b));
    }
    let n = search.grid_n.max(3);
    let h = |y: f64| n_integrand(td, kernel, y);
    let log_grid = td.case() == IntervalCase::B;
    let point = |i: usize| -> f64 {
        let u = i as f64 / (n - 1) as f64;
        if log_grid {
            a * (b / a).powf(u)
        } else {
            a + (b - a) * u
        }
    };

    let mut best_max = f64::NEG_INFINITY;
    let mut best_min = f64::INFINITY;
    let mut i_max = 0usize;
    let mut i_min = 0usize;
    for i in 0..n {
        let y = point(i);
        let v = h(y);
        if v.is_nan() {
            return Err(BoundsError::NonFinite(y));
        }
        if v > best_max {
            best_max = v;
            i_max = i;
        }
        if v < best_min {
            best_min = v;
            i_min = i;
        }
    }

    let refine = |idx: usize, maximize: bool| -> (f64, f64) {
        let lo = point(idx.saturating_sub(1));
        let hi = point((idx + 1).min(n - 1));
        if maximize {
            numeric::golden_max(&h, lo, hi, search.refine_tol)
        } else {
            numeric::golden_min(&h, lo, hi, search.refine_tol)
        }
    };
    let (al, mut l) = refine(i_max, true);
    let (am, mut m) = refine(i_min, false);
    let mut arg_l = Some(al);
    let mut arg_m = Some(am);

    if search.full_interval {
        for probes in tail_probe_sequences(td.case(), search.domain) {
            match tail_behavior(probes.into_iter().map(|p| (p, h(p))))? {
                TailBehavior::DivergesUp => {
                    l = f64::INFINITY;
                    arg_l = None;
                }
                TailBehavior::DivergesDown => {
                    m = f64::NEG_INFINITY;
                    arg_m = None;
                }
                TailBehavior::Limit(v) => {
                    if v > l {
                        l = v;
                        arg_l = None;
                    }
                    if v < m {
                        m = v;
                        arg_m = None;
                    }
                }
            }
        }
    }

    Ok(LMEstimate {
        l,
        m,
        arg_l,
        arg_m,
        domain: search.domain,
        grid_n: n,
    })
}

// ---------------------------------------------------------------------------
// Bound results
// ---------------------------------------------------------------------------

/// Lower/upper bound pair for one query point, together with the pieces
/// that built it.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub lower: f64,
    /// `+∞` when `M = -∞` (flagged degenerate).
    pub upper: f64,
    /// Reference-kernel value entering the bound.
    pub ref_value: f64,
    /// `G(w) - G(x)`.
    pub g_delta: f64,
    pub lm: LMEstimate,
    /// `L = +∞`: no meaningful lower bound, `lower` is 0.
    pub degenerate_lower: bool,
    /// `M = -∞`: no meaningful upper bound.
    pub degenerate_upper: bool,
    /// Unclamped upper value where clamping applies (distribution bounds).
    pub raw_upper: Option<f64>,
}

fn assemble(ref_value: f64, gd: f64, t: f64, lm: &LMEstimate) -> BoundResult {
    let base = gd.exp() * ref_value;
    let degenerate_lower = lm.l == f64::INFINITY;
    let degenerate_upper = lm.m == f64::NEG_INFINITY;
    let lower = if degenerate_lower {
        0.0
    } else {
        (-t * lm.l / 2.0).exp() * base
    };
    let upper = if degenerate_upper {
        f64::INFINITY
    } else {
        (-t * lm.m / 2.0).exp() * base
    };
    BoundResult {
        lower,
        upper,
        ref_value,
        g_delta: gd,
        lm: lm.clone(),
        degenerate_lower,
        degenerate_upper,
        raw_upper: None,
    }
}

/// Transition-density bounds:
/// `e^{-tL/2} e^{ΔG} p_Y <= p_X <= e^{-tM/2} e^{ΔG} p_Y`.
pub fn density_bounds(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    w: f64,
    lm: &LMEstimate,
) -> Result<BoundResult, BoundsError> {
    check_kernel(td, kernel)?;
    let ref_value = reference::ref_density(kernel, t, x, w)?;
    let gd = g_delta(td, kernel, x, w)?;
    Ok(assemble(ref_value, gd, t, lm))
}

/// Small-time equivalent `e^{ΔG} p_Y(t,x,w)`; a valid approximation of
/// `p_X` as `t -> 0` only when both `L` and `M` are finite.
pub fn asymptotic_density(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    w: f64,
) -> Result<f64, BoundsError> {
    check_kernel(td, kernel)?;
    let ref_value = reference::ref_density(kernel, t, x, w)?;
    let gd = g_delta(td, kernel, x, w)?;
    Ok(gd.exp() * ref_value)
}

/// Extremum of `ΔG(y) = G(y) - G(x)` over an interval with one endpoint of
/// the diffusion interval, by cumulative quadrature on a grid plus
/// refinement plus tail analysis.
struct GExtrema {
    inf: f64, // may be -inf
    sup: f64, // may be +inf
}

fn g_extrema(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    x: f64,
    lo: f64,
    hi: f64,
    toward: TailSide,
) -> Result<GExtrema, BoundsError> {
    let integrand = g_integrand(td, kernel);
    let n = 801usize;
    let log_grid = td.case() == IntervalCase::B && lo > 0.0;
    let point = |i: usize| -> f64 {
        let u = i as f64 / (n - 1) as f64;
        if log_grid {
            lo * (hi / lo).powf(u)
        } else {
            lo + (hi - lo) * u
        }
    };
    // cumulative ΔG along the grid
    let mut gs = vec![0.0f64; n];
    let mut acc = numeric::adaptive_simpson(&integrand, x, point(0), 1e-10)?;
    gs[0] = acc;
    for i in 1..n {
        acc += numeric::adaptive_simpson(&integrand, point(i - 1), point(i), 1e-12)?;
        gs[i] = acc;
    }
    let (mut i_min, mut i_max) = (0usize, 0usize);
    for i in 1..n {
        if gs[i] < gs[i_min] {
            i_min = i;
        }
        if gs[i] > gs[i_max] {
            i_max = i;
        }
    }
    let gfun = |y: f64| -> f64 {
        numeric::adaptive_simpson(&integrand, x, y, 1e-10).unwrap_or(f64::NAN)
    };
    let refine = |idx: usize, maximize: bool| -> f64 {
        let a = point(idx.saturating_sub(1));
        let b = point((idx + 1).min(n - 1));
        if maximize {
            numeric::golden_max(&gfun, a, b, 1e-8).1
        } else {
            numeric::golden_min(&gfun, a, b, 1e-8).1
        }
    };
    let mut sup = refine(i_max, true);
    let mut inf = refine(i_min, false);

    // tail toward the open endpoint
    let probes: Vec<f64> = match toward {
        TailSide::LowerInfinite => (0..120).map(|k| lo - lo.abs().max(1.0) * (2f64).powi(k)).collect(),
        TailSide::LowerZero => (1..600)
            .map(|k| lo * (2f64).powi(-k))
            .take_while(|v| *v > 0.0)
            .collect(),
        TailSide::UpperInfinite => (0..120).map(|k| hi + hi.abs().max(1.0) * (2f64).powi(k)).collect(),
    };
    if !probes.is_empty() {
        // incremental quadrature along the probe sequence; stop at the
        // first failure and classify from what was gathered
        let mut at = match toward {
            TailSide::UpperInfinite => hi,
            _ => lo,
        };
        let mut val = match toward {
            TailSide::UpperInfinite => gs[n - 1],
            _ => gs[0],
        };
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(probes.len());
        for &p in &probes {
            match numeric::adaptive_simpson(&integrand, at, p, 1e-10) {
                Ok(inc) => {
                    at = p;
                    val += inc;
                    pairs.push((p, val));
                }
                Err(_) => break,
            }
        }
        if !pairs.is_empty() {
            match tail_behavior(pairs.iter().copied())? {
                TailBehavior::DivergesUp => sup = f64::INFINITY,
                TailBehavior::DivergesDown => inf = f64::NEG_INFINITY,
                TailBehavior::Limit(v) => {
                    if v > sup {
                        sup = v;
                    }
                    if v < inf {
                        inf = v;
                    }
                }
            }
        }
    }
    Ok(GExtrema { inf, sup })
}

#[derive(Clone, Copy, PartialEq)]
enum TailSide {
    LowerInfinite,
    LowerZero,
    UpperInfinite,
}

/// Transition-distribution bounds (tail variant bounds `1 - P_X`):
/// `m⁻ e^{-tL/2} P_Y <= P_X <= min(1, m⁺ e^{-tM/2} P_Y)` with
/// `m∓ = inf/sup_{ℓ < y <= w} e^{ΔG(y)}`.
pub fn distribution_bounds(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    w: f64,
    lm: &LMEstimate,
    tail: bool,
) -> Result<BoundResult, BoundsError> {
    check_kernel(td, kernel)?;
    if td.case() == IntervalCase::B && w <= 0.0 && !tail {
        // no mass at or below the lower endpoint
        return Ok(BoundResult {
            lower: 0.0,
            upper: 0.0,
            ref_value: 0.0,
            g_delta: 0.0,
            lm: lm.clone(),
            degenerate_lower: false,
            degenerate_upper: false,
            raw_upper: Some(0.0),
        });
    }
    let p_y = reference::ref_cdf(kernel, t, x, w)?;
    let gd = g_delta(td, kernel, x, w)?;
    let (prob, extrema) = if tail {
        // event {X_t > w}: extrema over [w, upper endpoint)
        let hi = w + 10.0f64.max(x.abs() + 10.0 * t.sqrt()) + (w - x).abs();
        let e = g_extrema(td, kernel, x, w, hi, TailSide::UpperInfinite)?;
        (1.0 - p_y, e)
    } else {
        let span = 10.0f64.max(x.abs() + 10.0 * t.sqrt()) + (w - x).abs();
        let (lo, side) = match td.case() {
            IntervalCase::A => (w - span, TailSide::LowerInfinite),
            IntervalCase::B => ((w / 1e4).min(w), TailSide::LowerZero),
        };
        let e = g_extrema(td, kernel, x, lo, w, side)?;
        (p_y, e)
    };
    let m_minus = if extrema.inf.is_finite() {
        extrema.inf.exp()
    } else {
        0.0
    };
    let m_plus = extrema.sup.exp(); // +inf allowed

    let degenerate_lower = lm.l == f64::INFINITY;
    let degenerate_upper = lm.m == f64::NEG_INFINITY;
    let lower = if degenerate_lower {
        0.0
    } else {
        m_minus * (-t * lm.l / 2.0).exp() * prob
    };
    let raw_upper = if degenerate_upper {
        f64::INFINITY
    } else {
        m_plus * (-t * lm.m / 2.0).exp() * prob
    };
    Ok(BoundResult {
        lower,
        upper: raw_upper.min(1.0),
        ref_value: prob,
        g_delta: gd,
        lm: lm.clone(),
        degenerate_lower,
        degenerate_upper,
        raw_upper: Some(raw_upper),
    })
}

/// Crossing-density bounds (case A only):
/// `e^{-tL/2} e^{ΔG} η_W <= η_X <= e^{-tM/2} e^{ΔG} η_W`.
pub fn crossing_density_bounds(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    t: f64,
    x: f64,
    level: f64,
    w: f64,
    lm: &LMEstimate,
) -> Result<BoundResult, BoundsError> {
    if td.case() != IntervalCase::A {
        return Err(BoundsError::Unsupported(
            "crossing bounds are only available on the whole line (case A)",
        ));
    }
    check_kernel(td, kernel)?;
    let eta_w = reference::ref_crossing_density(kernel, t, x, level, w)?;
    let gd = g_delta(td, kernel, x, w)?;
    Ok(assemble(eta_w, gd, t, lm))
}

/// Objective for the reference-dimension search.
#[derive(Debug, Clone)]
pub enum DOptimizeObjective {
    /// Minimize the upper density bound at a single `w`.
    Point { w: f64 },
    /// Minimize the summed upper bound over a `w` grid.
    Integrated { w_grid: Vec<f64> },
}

/// Search the Bessel reference dimension `d` in `[d_range.0, d_range.1]`
/// minimizing the upper density bound; coarse scan plus golden-section
/// refinement, ties resolved toward smaller `d`.
pub fn optimize_d(
    td: &TransformedDiffusion,
    t: f64,
    x: f64,
    objective: &DOptimizeObjective,
    d_range: (f64, f64),
) -> Result<f64, BoundsError> {
    if td.case() != IntervalCase::B {
        return Err(BoundsError::Unsupported(
            "reference-dimension optimization applies to case B only",
        ));
    }
    let (d_lo, d_hi) = d_range;
    if !(d_lo >= 3.0 && d_hi > d_lo) {
        return Err(BoundsError::EmptyDomain(d_lo, d_hi));
    }
    let eval = |d: f64| -> f64 {
        let kernel = match ReferenceKernel::bessel(d) {
            Ok(k) => k,
            Err(_) => return f64::INFINITY,
        };
        let search = LmSearch::default_for(IntervalCase::B, x, t);
        let lm = match estimate_lm(td, kernel, &search) {
            Ok(lm) => lm,
            Err(_) => return f64::INFINITY,
        };
        let upper_at = |w: f64| -> f64 {
            match density_bounds(td, kernel, t, x, w, &lm) {
                Ok(b) => b.upper,
                Err(_) => f64::INFINITY,
            }
        };
        match objective {
            DOptimizeObjective::Point { w } => upper_at(*w),
            DOptimizeObjective::Integrated { w_grid } => w_grid.iter().map(|&w| upper_at(w)).sum(),
        }
    };
    // coarse scan (first minimum wins -> smaller d on ties)
    let scan_n = 25usize;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..scan_n {
        let d = d_lo + (d_hi - d_lo) * i as f64 / (scan_n - 1) as f64;
        let v = eval(d);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let cell = (d_hi - d_lo) / (scan_n - 1) as f64;
    let lo = (d_lo + cell * (best_i as f64 - 1.0)).max(d_lo);
    let hi = (d_lo + cell * (best_i as f64 + 1.0)).min(d_hi);
    let (d_star, v_star) = numeric::golden_min(&eval, lo, hi, 1e-4);
    Ok(if v_star <= best_v { d_star } else { d_lo + cell * best_i as f64 })
}
