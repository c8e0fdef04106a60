//! Tunable tolerances and thresholds with their documented defaults.

use serde::{Deserialize, Serialize};

/// Knobs of the adaptive integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Relative local error tolerance per step.
    pub rel_tol: f64,
    /// Absolute local error tolerance per step.
    pub abs_tol: f64,
    /// Integration stops with `StateOverflow` once a coordinate exceeds this.
    pub overflow_bound: f64,
    /// Stored samples are thinned (every other one dropped) past this count.
    pub max_samples: usize,
    /// Accepted plus rejected steps before giving up with `StepBudget`.
    pub max_steps: usize,
    /// Events are refined until `|guard| ≤ event_tol · scale`.
    pub event_tol: f64,
    /// A guard this close to zero without a sign change is recorded as a
    /// near miss.
    pub near_miss_tol: f64,
    /// Take constant steps of this size and skip error control (used for
    /// convergence-order measurements).
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            overflow_bound: 1e8,
            max_samples: 100_000,
            max_steps: 5_000_000,
            event_tol: 1e-12,
            near_miss_tol: 1e-9,
            fixed_step: None,
        }
    }
}

/// Knobs of the shooting classifier and the connection search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShooterConfig {
    pub integrator: IntegratorConfig,
    /// Offset along the unstable manifold of `P0` (scaled by `1/max(1, C)`
    /// for the `X`-coordinate so that `Z = C·X` stays small).
    pub delta: f64,
    /// Length of the `η`-span of each shot.
    pub eta_span: f64,
    /// `X` beyond which a tail inside the `Y`-band counts as entering `Q1`.
    pub x_big: f64,
    /// The `Y`-band is `(−(N−2)/m + band_lower_margin, −band_upper_margin)`.
    pub band_lower_margin: f64,
    pub band_upper_margin: f64,
    /// Relative drift of `Z` allowed over the last decade of `X` growth.
    pub drift_tol: f64,
    /// The center-manifold continuation of a connecting tail stops here
    /// if the drift test has not passed yet.
    pub tail_x_budget: f64,
    /// Bracket trajectories are considered indistinguishable while their
    /// `Y` values differ by less than this.
    pub match_tol: f64,
    /// An excursion into `Y > 0` counts as an oscillation only if its
    /// maximum exceeds this.
    pub hysteresis: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tol_c: f64,
    /// Largest `C` tried when scanning for brackets.
    pub c_max: f64,
    /// Geometric ratio of the bracket scan.
    pub scan_ratio: f64,
}

impl Default for ShooterConfig {
    fn default() -> Self {
        Self {
            // Boundary parameters inherit the global integration error
            // roughly in proportion to the tolerance, so shooting runs
            // tighter than the integrator defaults.
            integrator: IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..IntegratorConfig::default() },
            delta: 1e-6,
            eta_span: 400.0,
            x_big: 1e4,
            band_lower_margin: 1e-6,
            band_upper_margin: 1e-9,
            drift_tol: 1e-6,
            tail_x_budget: 1e14,
            match_tol: 1e-6,
            hysteresis: 1e-7,
            tol_c: 1e-10,
            c_max: 1e8,
            scan_ratio: 2.0,
        }
    }
}

/// Knobs of the linearized zero-count oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LepinConfig {
    pub integrator: IntegratorConfig,
    /// Multiplier applied to the default constant `β c_s^{1−m}/m`.
    pub constant_scale: f64,
    /// Default start point: where `constant · e^{η/β}` equals this.
    pub start_level: f64,
    /// Left end of the counting window.
    pub eta_start: f64,
    /// Error if `|h|` exceeds this.
    pub overflow_bound: f64,
}

impl Default for LepinConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-14, ..IntegratorConfig::default() },
            constant_scale: 1.0,
            start_level: 200.0,
            eta_start: -25.0,
            overflow_bound: 1e250,
        }
    }
}
