//! Front-shape fitting for OTOC grids.
//!
//! The early-growth region of the squared commutator — values between
//! machine noise and order one, ahead of the arriving operator front —
//! carries the shape information that discriminates competing models of
//! operator spreading. This module extracts that window from an
//! [`OtocGrid`], estimates the front velocity from first-crossing times,
//! fits the front form
//!
//! ```text
//! C(x, t) = exp(-lambda (x - v_B t - x0)^{1+p} / t^p)
//! ```
//!
//! together with a catalog of competitor forms, and rescales data onto the
//! collapse coordinate `u = (x - v_B t - x0) / t^{p/(1+p)}`.
//!
//! All fits are least squares in `log C` with uniform weights. The front
//! form is minimized by a derivative-free simplex over transformed
//! coordinates (`lambda` and `v_B` log-transformed, `p` mapped into `(0, 2)`
//! through `tanh`, `x0` free), restarted from deterministic random
//! perturbations of the initial guess; purely linear competitor forms are
//! solved in closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::observables::OtocGrid;
use crate::oracles::special::perturbative_form;

/// First-crossing threshold used by velocity estimation unless the caller
/// overrides it.
pub const DEFAULT_CROSSING_THRESHOLD: f64 = 1e-6;

/// Minimum number of windowed points accepted by the fitters.
const MIN_FIT_POINTS: usize = 20;
/// Minimum number of distinct probe separations accepted by the fitters.
const MIN_FIT_DISTANCES: usize = 3;
/// Minimum number of first crossings for a velocity regression.
const MIN_CROSSINGS: usize = 3;
/// Simplex iteration budget per start.
const MAX_SIMPLEX_ITERATIONS: usize = 500;
/// Convergence criterion: relative spread of the objective across the
/// simplex vertices.
const SIMPLEX_RELATIVE_TOLERANCE: f64 = 1e-10;
/// Denominator floor for the relative spread. A mean-square residual this
/// small (rms `1e-8` in `log C`) is far below any physical scatter, so a
/// simplex whose absolute spread sits under `floor * tolerance` counts as
/// settled even when the objective itself is effectively zero.
const OBJECTIVE_FLOOR: f64 = 1e-16;
/// Number of random restarts around the caller's initial guess.
const SIMPLEX_RESTARTS: usize = 8;
/// Restart-perturbation seed used by the unseeded fit entry points. The
/// seeded variants let a batch driver route all of its randomness through
/// one recorded seed.
pub const DEFAULT_RESTART_SEED: u64 = 0x05EE_DF17;
/// Weight of the quadratic penalty applied to points at or behind the
/// fitted front, in units of `(log C)^2` per unit squared overshoot.
const FRONT_PENALTY_WEIGHT: f64 = 100.0;
/// Half-width of the moving window used by [`upper_envelope`] (full window:
/// five samples).
const ENVELOPE_HALF_WIDTH: usize = 2;

fn default_c_min() -> f64 {
    1e-15
}

fn default_c_max() -> f64 {
    0.1
}

fn default_x_min() -> f64 {
    10.0
}

/// Bounds selecting the early-growth window of an OTOC grid.
///
/// A grid point `(x, t, C)` belongs to the window when
/// `c_min <= C <= c_max`, `x >= x_min`, and `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// Lower edge of the window in `C` (default `1e-15`).
    #[serde(default = "default_c_min")]
    pub c_min: f64,
    /// Upper edge of the window in `C` (default `0.1`).
    #[serde(default = "default_c_max")]
    pub c_max: f64,
    /// Minimum probe separation from the base site (default `10`).
    #[serde(default = "default_x_min")]
    pub x_min: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            c_min: default_c_min(),
            c_max: default_c_max(),
            x_min: default_x_min(),
        }
    }
}

impl WindowConfig {
    /// Checks `0 < c_min < c_max <= 1` and `x_min >= 0`, all finite.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidWindow`] when any bound is violated.
    pub fn validate(&self) -> Result<()> {
        let ok = self.c_min.is_finite()
            && self.c_max.is_finite()
            && self.x_min.is_finite()
            && self.c_min > 0.0
            && self.c_min < self.c_max
            && self.c_max <= 1.0
            && self.x_min >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWindow(format!(
                "bounds must satisfy 0 < c_min < c_max <= 1 and x_min >= 0, \
                 got c_min = {}, c_max = {}, x_min = {}",
                self.c_min, self.c_max, self.x_min
            )))
        }
    }
}

/// One windowed data point: probe separation, time, and the natural log of
/// the squared commutator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPoint {
    /// Separation `|probe - base|` in lattice units.
    pub x: f64,
    /// Evolution time, strictly positive.
    pub t: f64,
    /// `ln C(x, t)`.
    pub log_c: f64,
}

/// The extracted early-growth window: the bounds that produced it and the
/// surviving points.
#[derive(Debug, Clone, PartialEq)]
pub struct FitWindow {
    /// Bounds the points were filtered with.
    pub config: WindowConfig,
    /// Windowed points, in extraction order.
    pub points: Vec<WindowPoint>,
}

impl FitWindow {
    /// Builds a window from raw `(x, t, C)` triples, applying the same
    /// filter as [`extract_window`]: keep points with
    /// `c_min <= C <= c_max`, `x >= x_min`, and `t > 0`. Non-finite
    /// entries are dropped with the out-of-band points.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidWindow`] for invalid bounds and
    /// [`Error::EmptyWindow`] when no point survives the filter.
    pub fn from_points(config: WindowConfig, points: &[(f64, f64, f64)]) -> Result<Self> {
        config.validate()?;
        let kept: Vec<WindowPoint> = points
            .iter()
            .filter(|(x, t, c)| {
                x.is_finite()
                    && t.is_finite()
                    && c.is_finite()
                    && *t > 0.0
                    && *x >= config.x_min
                    && *c >= config.c_min
                    && *c <= config.c_max
            })
            .map(|&(x, t, c)| WindowPoint { x, t, log_c: c.ln() })
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyWindow);
        }
        Ok(Self {
            config,
            points: kept,
        })
    }

    /// Number of distinct probe separations among the points.
    pub fn distinct_distances(&self) -> usize {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    }
}

/// Functional forms for the growth front, with fitted parameters. Every
/// form models the natural log of the squared commutator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitParams {
    /// `log C = -lambda (x - v_b t - x0)^{1+p} / t^p`.
    XsForm {
        /// Front steepness, positive.
        lambda: f64,
        /// Broadening exponent in `(0, 2)`.
        p: f64,
        /// Front velocity, positive.
        v_b: f64,
        /// Front offset, unconstrained.
        x0: f64,
    },
    /// `log C = b x ln(a t) - ln Gamma(b x + 1)`, the early-time lattice
    /// expansion.
    Perturbative {
        /// Time scale, positive.
        a: f64,
        /// Order-per-site rate, positive.
        b: f64,
    },
    /// `log C = lambda t - mu x`, exponential growth with a linear cone.
    Exponential {
        /// Temporal growth rate.
        lambda: f64,
        /// Spatial decay rate.
        mu: f64,
    },
    /// `log C = -(x - v t)^2 / (d t)`, a diffusively broadening front.
    RandomCircuit {
        /// Front velocity, positive.
        v: f64,
        /// Front diffusion constant, positive.
        d: f64,
    },
    /// `log C = lambda t - x^2 / (d t)`, growth with diffusive spreading.
    GrowthDiffusion {
        /// Temporal growth rate.
        lambda: f64,
        /// Diffusion constant.
        d: f64,
    },
}

impl FitParams {
    /// Stable machine-readable model name.
    pub fn model_name(&self) -> &'static str {
        match self {
            Self::XsForm { .. } => "xs_form",
            Self::Perturbative { .. } => "perturbative",
            Self::Exponential { .. } => "exponential",
            Self::RandomCircuit { .. } => "random_circuit",
            Self::GrowthDiffusion { .. } => "growth_diffusion",
        }
    }

    /// Modeled `ln C` at separation `x` and time `t > 0`.
    ///
    /// The front form is clamped to `0` at and behind the front
    /// (`x - v_b t - x0 <= 0`), where the expression stops being
    /// meaningful.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] for `t <= 0`; the perturbative form
    /// additionally propagates its own domain errors.
    pub fn log_c(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "model evaluation requires finite t > 0, got {t}"
            )));
        }
        match *self {
            Self::XsForm { lambda, p, v_b, x0 } => {
                let s = (x - v_b * t - x0).max(0.0);
                Ok(-lambda * s.powf(1.0 + p) / t.powf(p))
            }
            Self::Perturbative { a, b } => perturbative_form(x, t, a, b),
            Self::Exponential { lambda, mu } => Ok(lambda * t - mu * x),
            Self::RandomCircuit { v, d } => {
                let s = x - v * t;
                Ok(-s * s / (d * t))
            }
            Self::GrowthDiffusion { lambda, d } => Ok(lambda * t - x * x / (d * t)),
        }
    }
}

/// Competitor forms selectable by [`fit_competitor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompetitorModel {
    /// Early-time lattice expansion.
    Perturbative,
    /// Exponential growth with a linear cone.
    Exponential,
    /// Diffusively broadening ballistic front.
    RandomCircuit,
    /// Exponential growth with diffusive spreading.
    GrowthDiffusion,
}

/// Outcome of a front fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Fitted model and parameters.
    pub params: FitParams,
    /// Root-mean-square residual in `log C` over the window.
    pub rms_residual: f64,
    /// Simplex iterations spent on the returned solution (zero for forms
    /// solved in closed form).
    pub iterations: usize,
    /// Whether the minimizer met its convergence criterion. On `false` the
    /// result is the best point found within the iteration budget.
    pub converged: bool,
    /// Number of windowed points the fit used.
    pub n_points: usize,
}

/// Output of [`estimate_velocity`]: a regression of first-crossing times
/// against probe separation.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEstimate {
    /// Estimated front velocity: the inverse slope of crossing time versus
    /// separation.
    pub v_b: f64,
    /// Time-axis intercept of the regression.
    pub intercept: f64,
    /// `(separation, first-crossing time)` pairs, sorted by separation.
    pub crossings: Vec<(f64, f64)>,
}

/// One point of a scaling collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsePoint {
    /// Rescaled front coordinate `(x - v_b t - x0) / t^{p/(1+p)}`.
    pub u: f64,
    /// `ln C` of the underlying window point.
    pub log_c: f64,
}

/// Initial guess for [`fit_xs_form`].
///
/// A crude guess suffices: the minimizer restarts from deterministic
/// random perturbations of it. [`estimate_velocity`] provides a data-driven
/// `v_b` when the grid shows a clear front.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsFormGuess {
    /// Front steepness, positive (default `1`).
    #[serde(default = "default_guess_lambda")]
    pub lambda: f64,
    /// Broadening exponent, clamped into `(0, 2)` (default `0.5`).
    #[serde(default = "default_guess_p")]
    pub p: f64,
    /// Front velocity, positive (default `1`).
    #[serde(default = "default_guess_lambda")]
    pub v_b: f64,
    /// Front offset (default `0`).
    #[serde(default)]
    pub x0: f64,
}

fn default_guess_lambda() -> f64 {
    1.0
}

fn default_guess_p() -> f64 {
    0.5
}

impl Default for XsFormGuess {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: 0.5,
            v_b: 1.0,
            x0: 0.0,
        }
    }
}

/// Checks that the grid's value table matches its probe and time axes.
fn check_grid_shape(grid: &OtocGrid) -> Result<()> {
    if grid.values.len() != grid.probe_sites.len()
        || grid.values.iter().any(|row| row.len() != grid.times.len())
    {
        return Err(Error::InvalidArgument(format!(
            "grid value table must be {} rows of {} samples",
            grid.probe_sites.len(),
            grid.times.len()
        )));
    }
    Ok(())
}

/// Extracts the early-growth window from an OTOC grid: all points with
/// `c_min <= C <= c_max`, separation at least `x_min`, and `t > 0`.
///
/// # Errors
///
/// [`Error::InvalidWindow`] for invalid bounds, [`Error::InvalidArgument`]
/// for a malformed grid, and [`Error::EmptyWindow`] when nothing survives.
pub fn extract_window(grid: &OtocGrid, config: &WindowConfig) -> Result<FitWindow> {
    config.validate()?;
    check_grid_shape(grid)?;
    let mut points = Vec::new();
    for (row, &site) in grid.values.iter().zip(&grid.probe_sites) {
        let x = (site as f64 - grid.base_site as f64).abs();
        if x < config.x_min {
            continue;
        }
        for (&t, &c) in grid.times.iter().zip(row) {
            if t > 0.0 && c.is_finite() && c >= config.c_min && c <= config.c_max {
                points.push(WindowPoint { x, t, log_c: c.ln() });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(FitWindow {
        config: *config,
        points,
    })
}

/// Estimates the front velocity from first-crossing times: for every probe
/// whose value exceeds `threshold` at some recorded time, the earliest such
/// time is regressed linearly against the probe separation, and the
/// velocity is the inverse slope.
///
/// # Errors
///
/// [`Error::InvalidArgument`] for a non-positive threshold, a malformed
/// grid, crossings confined to one separation, or a non-positive regression
/// slope; [`Error::TooFewCrossings`] when fewer than three probes cross.
pub fn estimate_velocity(grid: &OtocGrid, threshold: f64) -> Result<VelocityEstimate> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "crossing threshold must be positive and finite, got {threshold}"
        )));
    }
    check_grid_shape(grid)?;
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    for (row, &site) in grid.values.iter().zip(&grid.probe_sites) {
        let x = (site as f64 - grid.base_site as f64).abs();
        if let Some(k) = row.iter().position(|&c| c > threshold) {
            crossings.push((x, grid.times[k]));
        }
    }
    if crossings.len() < MIN_CROSSINGS {
        return Err(Error::TooFewCrossings {
            found: crossings.len(),
            min: MIN_CROSSINGS,
        });
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = crossings.iter().map(|c| c.0).collect();
    let ts: Vec<f64> = crossings.iter().map(|c| c.1).collect();
    let (slope, intercept) = linear_fit(&xs, &ts).ok_or_else(|| {
        Error::InvalidArgument(
            "first crossings are confined to a single separation; \
             cannot regress a velocity"
                .into(),
        )
    })?;
    if !(slope > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "first-crossing times do not increase with separation \
             (regression slope {slope:.3e}); no ballistic front to estimate"
        )));
    }
    Ok(VelocityEstimate {
        v_b: 1.0 / slope,
        intercept,
        crossings,
    })
}

/// Least-squares line `y = slope * x + intercept`; `None` when the
/// abscissae are all equal.
fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, y_mean - slope * x_mean))
}

/// Rejects windows too thin to constrain a front fit.
fn validate_for_fit(window: &FitWindow) -> Result<()> {
    if window.points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateWindow(format!(
            "need at least {MIN_FIT_POINTS} windowed points, got {}",
            window.points.len()
        )));
    }
    let distances = window.distinct_distances();
    if distances < MIN_FIT_DISTANCES {
        return Err(Error::DegenerateWindow(format!(
            "need points at {MIN_FIT_DISTANCES} or more distinct separations, got {distances}"
        )));
    }
    Ok(())
}

// ---- simplex minimizer ----

/// Result of one simplex descent.
struct SimplexRun {
    point: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Maps NaN objective values to `+inf` so the simplex avoids them.
fn guard(value: f64) -> f64 {
    if value.is_nan() {
        f64::INFINITY
    } else {
        value
    }
}

/// Nelder–Mead descent with standard coefficients (reflection 1, expansion
/// 2, contraction 1/2, shrink 1/2). Converges when the relative spread of
/// the objective across the simplex drops below
/// [`SIMPLEX_RELATIVE_TOLERANCE`], with the denominator floored at
/// [`OBJECTIVE_FLOOR`] so exact-data fits terminate.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], steps: &[f64]) -> SimplexRun {
    let n = start.len();
    debug_assert_eq!(steps.len(), n);
    let mut vertices: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    vertices.push((guard(f(start)), start.to_vec()));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += steps[i];
        vertices.push((guard(f(&v)), v));
    }
    let mut iterations = 0;
    let mut converged = false;
    loop {
        vertices.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = vertices[0].0;
        let worst = vertices[n].0;
        if (worst - best) / best.max(OBJECTIVE_FLOOR) < SIMPLEX_RELATIVE_TOLERANCE {
            converged = true;
            break;
        }
        if iterations >= MAX_SIMPLEX_ITERATIONS {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (_, v) in &vertices[..n] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }
        let worst_point = vertices[n].1.clone();
        let towards = |scale: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst_point)
                .map(|(&c, &w)| c + scale * (c - w))
                .collect()
        };

        let reflected = towards(1.0);
        let f_reflected = guard(f(&reflected));
        if f_reflected < vertices[0].0 {
            let expanded = towards(2.0);
            let f_expanded = guard(f(&expanded));
            vertices[n] = if f_expanded < f_reflected {
                (f_expanded, expanded)
            } else {
                (f_reflected, reflected)
            };
            continue;
        }
        if f_reflected < vertices[n - 1].0 {
            vertices[n] = (f_reflected, reflected);
            continue;
        }
        let contracted = if f_reflected < vertices[n].0 {
            towards(0.5)
        } else {
            towards(-0.5)
        };
        let f_contracted = guard(f(&contracted));
        if f_contracted < vertices[n].0.min(f_reflected) {
            vertices[n] = (f_contracted, contracted);
            continue;
        }
        // Shrink every vertex towards the best one.
        let anchor = vertices[0].1.clone();
        for (value, v) in &mut vertices[1..] {
            for (vi, &ai) in v.iter_mut().zip(&anchor) {
                *vi = ai + 0.5 * (*vi - ai);
            }
            *value = guard(f(v));
        }
    }
    vertices.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (value, point) = vertices.swap_remove(0);
    SimplexRun {
        point,
        value,
        iterations,
        converged,
    }
}

/// Runs the simplex from the caller's start plus [`SIMPLEX_RESTARTS`]
/// deterministic random perturbations of it (uniform within `spreads` per
/// axis), keeps the best minimum, and polishes it with one final descent
/// on a tightened simplex.
fn minimize_with_restarts(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    spreads: &[f64],
    seed: u64,
) -> SimplexRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<SimplexRun> = None;
    for restart in 0..=SIMPLEX_RESTARTS {
        let mut s = start.to_vec();
        if restart > 0 {
            for (si, &spread) in s.iter_mut().zip(spreads) {
                *si += rng.random_range(-spread..=spread);
            }
        }
        let run = nelder_mead(f, &s, steps);
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one simplex start runs");
    let polish_steps: Vec<f64> = steps.iter().map(|s| s * 0.05).collect();
    let polish = nelder_mead(f, &best.point, &polish_steps);
    best.iterations += polish.iterations;
    if polish.value <= best.value {
        best.point = polish.point;
        best.value = polish.value;
        best.converged = polish.converged;
    }
    best
}

// ---- front-form fit ----

/// Transformed coordinates -> physical front parameters.
fn unpack_xs(theta: &[f64]) -> (f64, f64, f64, f64) {
    (
        theta[0].exp(),
        1.0 + theta[1].tanh(),
        theta[2].exp(),
        theta[3],
    )
}

/// Mean squared residual of the front form, with a quadratic penalty for
/// points the candidate front has already passed (their model value is
/// pinned to the `s -> 0` limit, keeping the objective continuous).
fn xs_objective(points: &[WindowPoint], theta: &[f64]) -> f64 {
    let (lambda, p, v_b, x0) = unpack_xs(theta);
    let mut sum = 0.0;
    for pt in points {
        let s = pt.x - v_b * pt.t - x0;
        if s > 0.0 {
            let residual = pt.log_c + lambda * s.powf(1.0 + p) / pt.t.powf(p);
            sum += residual * residual;
        } else {
            sum += pt.log_c * pt.log_c + FRONT_PENALTY_WEIGHT * s * s;
        }
    }
    sum / points.len() as f64
}

/// Root-mean-square residual in `log C` of a fitted form over a window.
fn rms_residual(points: &[WindowPoint], params: &FitParams) -> f64 {
    let sum: f64 = points
        .iter()
        .map(|pt| {
            let model = params.log_c(pt.x, pt.t).unwrap_or(f64::INFINITY);
            let r = pt.log_c - model;
            r * r
        })
        .sum();
    (sum / points.len() as f64).sqrt()
}

/// Fits the front form `log C = -lambda (x - v_B t - x0)^{1+p} / t^p` to a
/// window by derivative-free simplex descent over transformed coordinates
/// (`lambda = e^theta`, `v_B = e^theta`, `p = 1 + tanh(theta)`, `x0` free),
/// restarted from eight deterministic random perturbations of `guess`.
/// Points behind a candidate front receive a quadratic penalty that pushes
/// the front back behind them.
///
/// Non-convergence within the iteration budget is not an error: the result
/// carries `converged: false` and the best parameters found.
///
/// # Errors
///
/// [`Error::DegenerateWindow`] when the window has fewer than 20 points or
/// fewer than 3 distinct separations; [`Error::InvalidArgument`] for a
/// non-finite or non-positive guess.
///
/// # Examples
///
/// ```
/// use otoc::{fit_xs_form, FitParams, FitWindow, WindowConfig, XsFormGuess};
/// # fn main() -> otoc::Result<()> {
/// let truth = FitParams::XsForm { lambda: 2.0, p: 0.5, v_b: 1.0, x0: 0.0 };
/// let mut triples = Vec::new();
/// for x in (12..=30).step_by(3) {
///     for k in 1..=140 {
///         let (x, t) = (f64::from(x), 0.2 * f64::from(k));
///         triples.push((x, t, truth.log_c(x, t)?.exp()));
///     }
/// }
/// let window = FitWindow::from_points(WindowConfig::default(), &triples)?;
/// let fit = fit_xs_form(&window, &XsFormGuess::default())?;
/// let FitParams::XsForm { p, .. } = fit.params else { unreachable!() };
/// assert!((p - 0.5).abs() < 1e-4);
/// # Ok(())
/// # }
/// ```
pub fn fit_xs_form(window: &FitWindow, guess: &XsFormGuess) -> Result<FitResult> {
    fit_xs_form_seeded(window, guess, DEFAULT_RESTART_SEED)
}

/// [`fit_xs_form`] with the restart-perturbation seed chosen by the
/// caller, so every random choice a batch run makes can flow from one
/// recorded 64-bit seed. Identical seeds give bitwise-identical fits.
///
/// # Errors
///
/// Same domain as [`fit_xs_form`].
pub fn fit_xs_form_seeded(window: &FitWindow, guess: &XsFormGuess, seed: u64) -> Result<FitResult> {
    validate_for_fit(window)?;
    if !(guess.lambda > 0.0 && guess.v_b > 0.0)
        || !guess.lambda.is_finite()
        || !guess.v_b.is_finite()
        || !guess.p.is_finite()
        || !guess.x0.is_finite()
    {
        return Err(Error::InvalidArgument(format!(
            "front-form guess must be finite with lambda > 0 and v_b > 0, got {guess:?}"
        )));
    }
    let start = [
        guess.lambda.ln(),
        (guess.p.clamp(0.02, 1.98) - 1.0).atanh(),
        guess.v_b.ln(),
        guess.x0,
    ];
    let points = window.points.clone();
    let objective = move |theta: &[f64]| xs_objective(&points, theta);
    let run = minimize_with_restarts(
        &objective,
        &start,
        &[0.25, 0.25, 0.25, 1.0],
        &[0.7, 0.7, 0.5, 3.0],
        seed,
    );
    let (lambda, p, v_b, x0) = unpack_xs(&run.point);
    let params = FitParams::XsForm { lambda, p, v_b, x0 };
    Ok(FitResult {
        rms_residual: rms_residual(&window.points, &params),
        params,
        iterations: run.iterations,
        converged: run.converged,
        n_points: window.points.len(),
    })
}

// ---- competitor fits ----

/// Solves the 2x2 normal equations of a two-basis linear least-squares
/// problem `y ~ c1 phi1 + c2 phi2`.
fn solve_two_basis(points: &[WindowPoint], phi: impl Fn(&WindowPoint) -> (f64, f64)) -> Result<(f64, f64)> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for pt in points {
        let (p1, p2) = phi(pt);
        a11 += p1 * p1;
        a12 += p1 * p2;
        a22 += p2 * p2;
        b1 += p1 * pt.log_c;
        b2 += p2 * pt.log_c;
    }
    let det = a11 * a22 - a12 * a12;
    let scale = (a11 * a22).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateWindow(
            "competitor basis functions are collinear on this window".into(),
        ));
    }
    Ok(((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

fn fit_exponential(window: &FitWindow) -> Result<FitResult> {
    let (lambda, mu) = solve_two_basis(&window.points, |pt| (pt.t, -pt.x))?;
    let params = FitParams::Exponential { lambda, mu };
    Ok(FitResult {
        rms_residual: rms_residual(&window.points, &params),
        params,
        iterations: 0,
        converged: true,
        n_points: window.points.len(),
    })
}

fn fit_growth_diffusion(window: &FitWindow) -> Result<FitResult> {
    let (lambda, inverse_d) = solve_two_basis(&window.points, |pt| (pt.t, -pt.x * pt.x / pt.t))?;
    let params = FitParams::GrowthDiffusion {
        lambda,
        d: 1.0 / inverse_d,
    };
    Ok(FitResult {
        rms_residual: rms_residual(&window.points, &params),
        params,
        iterations: 0,
        converged: true,
        n_points: window.points.len(),
    })
}

fn fit_random_circuit(window: &FitWindow, seed: u64) -> Result<FitResult> {
    let mean_speed = window
        .points
        .iter()
        .map(|pt| pt.x / pt.t)
        .sum::<f64>()
        / window.points.len() as f64;
    let start = [mean_speed.max(1e-3).ln(), 0.0];
    let points = window.points.clone();
    let objective = move |theta: &[f64]| {
        let (v, d) = (theta[0].exp(), theta[1].exp());
        let sum: f64 = points
            .iter()
            .map(|pt| {
                let s = pt.x - v * pt.t;
                let residual = pt.log_c + s * s / (d * pt.t);
                residual * residual
            })
            .sum();
        sum / points.len() as f64
    };
    let run = minimize_with_restarts(&objective, &start, &[0.2, 0.2], &[0.5, 1.0], seed);
    let params = FitParams::RandomCircuit {
        v: run.point[0].exp(),
        d: run.point[1].exp(),
    };
    Ok(FitResult {
        rms_residual: rms_residual(&window.points, &params),
        params,
        iterations: run.iterations,
        converged: run.converged,
        n_points: window.points.len(),
    })
}

fn fit_perturbative(window: &FitWindow, seed: u64) -> Result<FitResult> {
    let mean_time = window.points.iter().map(|pt| pt.t).sum::<f64>() / window.points.len() as f64;
    let start = [(1.0 / mean_time).ln(), 0.0];
    let points = window.points.clone();
    let objective = move |theta: &[f64]| {
        let (a, b) = (theta[0].exp(), theta[1].exp());
        let mut sum = 0.0;
        for pt in &points {
            match perturbative_form(pt.x, pt.t, a, b) {
                Ok(model) => {
                    let residual = pt.log_c - model;
                    sum += residual * residual;
                }
                Err(_) => return f64::INFINITY,
            }
        }
        sum / points.len() as f64
    };
    let run = minimize_with_restarts(&objective, &start, &[0.2, 0.2], &[1.0, 1.0], seed);
    let params = FitParams::Perturbative {
        a: run.point[0].exp(),
        b: run.point[1].exp(),
    };
    Ok(FitResult {
        rms_residual: rms_residual(&window.points, &params),
        params,
        iterations: run.iterations,
        converged: run.converged,
        n_points: window.points.len(),
    })
}

/// Least-squares fit of a competitor log-form to a window, under the same
/// convergence contract as [`fit_xs_form`]. The exponential and
/// growth-diffusion forms are linear in their parameters and solve in
/// closed form (`iterations: 0`); the others run the restarted simplex.
///
/// # Errors
///
/// [`Error::DegenerateWindow`] under the same window preconditions as
/// [`fit_xs_form`], or when a closed-form system is collinear.
pub fn fit_competitor(window: &FitWindow, model: CompetitorModel) -> Result<FitResult> {
    fit_competitor_seeded(window, model, DEFAULT_RESTART_SEED)
}

/// [`fit_competitor`] with a caller-chosen restart seed; see
/// [`fit_xs_form_seeded`]. The closed-form models ignore the seed.
///
/// # Errors
///
/// Same domain as [`fit_competitor`].
pub fn fit_competitor_seeded(
    window: &FitWindow,
    model: CompetitorModel,
    seed: u64,
) -> Result<FitResult> {
    validate_for_fit(window)?;
    match model {
        CompetitorModel::Exponential => fit_exponential(window),
        CompetitorModel::GrowthDiffusion => fit_growth_diffusion(window),
        CompetitorModel::RandomCircuit => fit_random_circuit(window, seed),
        CompetitorModel::Perturbative => fit_perturbative(window, seed),
    }
}

// ---- collapse and envelopes ----

/// Rescales windowed points onto the collapse coordinate
/// `u = (x - v_b t - x0) / t^{p/(1+p)}`, under a front-form fit. Data that
/// follows the form exactly lands on the master curve
/// `log C = -lambda u^{1+p}`. Output order matches window order.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when `fit` does not hold front-form
/// parameters.
pub fn collapse(window: &FitWindow, fit: &FitResult) -> Result<Vec<CollapsePoint>> {
    let FitParams::XsForm { p, v_b, x0, .. } = fit.params else {
        return Err(Error::InvalidArgument(format!(
            "collapse requires front-form parameters, got model {}",
            fit.params.model_name()
        )));
    };
    let alpha = p / (1.0 + p);
    Ok(window
        .points
        .iter()
        .map(|pt| CollapsePoint {
            u: (pt.x - v_b * pt.t - x0) / pt.t.powf(alpha),
            log_c: pt.log_c,
        })
        .collect())
}

/// Extracts the upper envelope of an oscillating series: samples that are
/// maximal over a centered five-sample moving window and strictly exceed at
/// least one neighbor in it. Only interior samples (two or more neighbors
/// on each side) and positive values qualify. Returns `(time, value)`
/// pairs in sample order.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when the slices differ in length or hold
/// fewer than five samples.
pub fn upper_envelope(times: &[f64], values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "times ({}) and values ({}) must have equal length",
            times.len(),
            values.len()
        )));
    }
    let window = 2 * ENVELOPE_HALF_WIDTH + 1;
    if times.len() < window {
        return Err(Error::InvalidArgument(format!(
            "need at least {window} samples to extract an envelope, got {}",
            times.len()
        )));
    }
    let mut peaks = Vec::new();
    for i in ENVELOPE_HALF_WIDTH..times.len() - ENVELOPE_HALF_WIDTH {
        let neighbors = i - ENVELOPE_HALF_WIDTH..=i + ENVELOPE_HALF_WIDTH;
        let c = values[i];
        if c > 0.0
            && neighbors.clone().all(|j| values[j] <= c)
            && neighbors.clone().any(|j| values[j] < c)
        {
            peaks.push((times[i], c));
        }
    }
    Ok(peaks)
}
