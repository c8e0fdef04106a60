//! Shooting along the two-dimensional unstable manifold of `P0`.
//!
//! Each `C > 0` selects the orbit `l_C` leaving `P0` with asymptotic ratio
//! `Z/X → C` (the profile starts at `f(0) = (C/(p−1))^{1/(p−1)}`). Orbits are
//! classified by their first decisive event: an upcrossing of `Y = 0`
//! (set C) or a downcrossing of `Y = −2/(p−m)` (set A). The boundary between
//! the two sets carries orbits entering `Q1`, i.e. profiles decaying like
//! `ξ^{−2/(p−m)}`.

mod invariants;
mod lepin;
mod search;

pub use invariants::{
    check_cylinder_bound, check_monotone_escape, check_no_extremum_regions, center_manifold_residual,
    InvariantViolation,
};
pub use lepin::{lepin_constant, lepin_default_eta_end, lepin_transition, lepin_zero_count, lepin_zeros, LepinReport};
pub use search::{
    bisect_boundary, bisect_level, certify_q1_tail, classify_level, find_solutions, FindReport, LevelFailure,
    LevelSide, Solution,
};

use serde::{Deserialize, Serialize};

use crate::config::ShooterConfig;
use crate::dynsys::{from_inf_y, inf_y_field, main_field, to_inf_y, Field3, PhaseState, YSide};
use crate::error::{Error, Result};
use crate::exponents::ParamTriple;
use crate::odeint::{integrate, Direction, EventSpec, Termination, Trajectory};

/// Event names used on shooting trajectories.
pub mod event_names {
    pub const ZERO_UP: &str = "y-zero-up";
    pub const ZERO_DOWN: &str = "y-zero-down";
    /// `Y` rising through the hysteresis level: a genuine oscillation starts.
    pub const UP_HYSTERESIS: &str = "y-up-hysteresis";
    pub const STAT_LEVEL: &str = "y-stat-level";
    pub const ESCAPE_LEVEL: &str = "y-escape-level";
    pub const Y_MAX: &str = "y-local-max";
    pub const Q1_MONITOR: &str = "x-big";
}

use event_names as ev;

/// Smallest and largest admissible manifold offsets.
const DELTA_RANGE: (f64, f64) = (1e-8, 1e-4);

/// One member `l_C` of the unstable-manifold family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchSpec {
    pub c: f64,
    pub delta: f64,
    pub params: ParamTriple,
}

impl LaunchSpec {
    pub fn new(c: f64, delta: f64, params: ParamTriple) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("shooting parameter C = {c} must be positive")));
        }
        if !(delta >= DELTA_RANGE.0 && delta <= DELTA_RANGE.1) {
            return Err(Error::Domain(format!(
                "manifold offset {delta} outside [{}, {}]",
                DELTA_RANGE.0, DELTA_RANGE.1
            )));
        }
        Ok(Self { c, delta, params })
    }

    /// Initial point on the unstable manifold of `P0`, to second order.
    ///
    /// The `X`-offset is `δ/max(1, C)` so that `Z ≈ C·X` stays of size `δ`.
    /// `Y` follows the quadratic manifold expansion
    /// `Y = (X − Z)/N + αX² + βXZ + γZ²`, and `Z` carries the factor
    /// `exp((p−1)(1−C)X/(2N))` so that `C` is the exact limit of `Z/X` as the
    /// orbit is followed back into `P0`.
    pub fn initial_state(&self) -> PhaseState {
        let (n, p, k) = (self.params.dim, self.params.p, self.params.gap());
        let c = self.c;
        let x = self.delta / c.max(1.0);
        let z = c * x * ((p - 1.0) * (1.0 - c) * x / (2.0 * n)).exp();
        let alpha = (k / (2.0 * n) - 1.0 / (n * n)) / (n + 2.0);
        let beta = ((p + 1.0) / (n * n) - k / (2.0 * n)) / (n + 2.0);
        let gamma = -p / (n * n * (n + 2.0));
        let y = (x - z) / n + alpha * x * x + beta * x * z + gamma * z * z;
        PhaseState::new(x, y, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SetA,
    SetC,
    ConnectsQ1,
    EntersQ3,
    Undetermined,
}

/// Where the orbit ends up after its first decisive event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fate {
    EntersQ3,
    ConnectsQ1,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstEventKind {
    /// `Y` crossed `0` upwards (beyond the hysteresis level).
    ZeroUpcrossing,
    /// `Y` crossed `−2/(p−m)` downwards.
    StatDowncrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstEvent {
    pub kind: FirstEventKind,
    pub eta: f64,
    pub state: PhaseState,
}

/// A maximal excursion into `Y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub eta_enter: f64,
    pub eta_exit: Option<f64>,
    pub max_y: f64,
}

/// Oscillations with respect to `Y = 0`: completed excursions whose maximum
/// exceeds the hysteresis level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationCount {
    pub count: usize,
    pub excursion_intervals: Vec<(f64, f64)>,
}

/// Continuation of a trajectory beyond the reach of the main chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail {
    /// `(η, state)` pairs in main-chart coordinates.
    pub points: Vec<(f64, PhaseState)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotOutcome {
    pub c: f64,
    pub classification: Classification,
    pub oscillations: usize,
    pub excursions: Vec<Excursion>,
    pub first_event: Option<FirstEvent>,
    pub fate: Fate,
    /// Limit of `Z` along a connection to `Q1`.
    pub z_limit: Option<f64>,
    pub trajectory: Trajectory<3>,
    /// Center-manifold continuation of a `Q1` connection, or the `Y`-chart
    /// continuation into `Q3`.
    pub tail: Option<Tail>,
}

impl ShotOutcome {
    /// Main-chart samples followed by the tail, with `η` increasing.
    pub fn all_points(&self) -> Vec<(f64, PhaseState)> {
        let mut pts: Vec<(f64, PhaseState)> = Vec::new();
        let cut = self
            .tail
            .as_ref()
            .and_then(|t| t.points.first().map(|p| p.0))
            .unwrap_or(f64::INFINITY);
        for (eta, s) in self.trajectory.points() {
            if eta < cut {
                pts.push((eta, PhaseState::from_array(s)));
            }
        }
        if let Some(t) = &self.tail {
            pts.extend(t.points.iter().copied());
        }
        pts
    }
}

/// The event set of a shot. `terminal_on_drop` stops at the first
/// downcrossing of `Y = −2/(p−m)`.
pub(crate) fn shot_events<'a>(pr: ParamTriple, cfg: &ShooterConfig, terminal_on_drop: bool) -> Vec<EventSpec<'a, 3>> {
    let stat = pr.stat_level();
    let escape = pr.escape_level();
    let hyst = cfg.hysteresis;
    let x_big = cfg.x_big;
    let stat_event = if terminal_on_drop {
        EventSpec::new(ev::STAT_LEVEL, Direction::Falling, true, move |_t, s: &[f64; 3]| s[1] - stat)
    } else {
        EventSpec::new(ev::STAT_LEVEL, Direction::Any, false, move |_t, s: &[f64; 3]| s[1] - stat)
    };
    vec![
        EventSpec::new(ev::ZERO_UP, Direction::Rising, false, |_t, s: &[f64; 3]| s[1]),
        EventSpec::new(ev::ZERO_DOWN, Direction::Falling, false, |_t, s: &[f64; 3]| s[1]),
        EventSpec::new(ev::UP_HYSTERESIS, Direction::Rising, false, move |_t, s: &[f64; 3]| s[1] - hyst),
        stat_event,
        EventSpec::new(ev::ESCAPE_LEVEL, Direction::Falling, false, move |_t, s: &[f64; 3]| s[1] - escape),
        EventSpec::new(ev::Y_MAX, Direction::Falling, false, move |_t, s: &[f64; 3]| main_field(&pr, s)[1]),
        EventSpec::new(ev::Q1_MONITOR, Direction::Rising, false, move |_t, s: &[f64; 3]| s[0] - x_big),
    ]
}

fn run_shot(spec: &LaunchSpec, cfg: &ShooterConfig, terminal_on_drop: bool) -> Result<Trajectory<3>> {
    let pr = spec.params;
    let field = Field3::main(pr);
    let events = shot_events(pr, cfg, terminal_on_drop);
    let init = spec.initial_state().to_array();
    let traj = integrate(&field, init, (0.0, cfg.eta_span), &events, &cfg.integrator)?;
    Ok(traj.with_chart(crate::dynsys::ChartId::Main, pr))
}

/// Integrates `l_C` forward in the main chart with the full event set until
/// it escapes (overflow), the span ends or the step size collapses.
pub fn launch(spec: &LaunchSpec, cfg: &ShooterConfig) -> Result<Trajectory<3>> {
    run_shot(spec, cfg, false)
}

/// Excursions into `Y > 0` reconstructed from the zero-crossing and
/// local-maximum events, optionally only up to `eta_limit`.
pub fn excursions(traj: &Trajectory<3>, eta_limit: f64) -> Vec<Excursion> {
    let mut out: Vec<Excursion> = Vec::new();
    let mut open: Option<Excursion> = None;
    for e in traj.events.iter().filter(|e| e.eta <= eta_limit) {
        match e.name.as_str() {
            ev::ZERO_UP => {
                open = Some(Excursion { eta_enter: e.eta, eta_exit: None, max_y: e.state[1].max(0.0) });
            }
            ev::Y_MAX => {
                if let Some(x) = open.as_mut() {
                    x.max_y = x.max_y.max(e.state[1]);
                }
            }
            ev::ZERO_DOWN => {
                if let Some(mut x) = open.take() {
                    x.eta_exit = Some(e.eta);
                    out.push(x);
                }
            }
            _ => {}
        }
    }
    if let Some(mut x) = open {
        // Still inside an excursion at the end: use the stored samples.
        for (eta, s) in traj.points().filter(|(eta, _)| *eta >= x.eta_enter && *eta <= eta_limit) {
            let _ = eta;
            x.max_y = x.max_y.max(s[1]);
        }
        out.push(x);
    }
    out
}

/// Counts completed excursions with maximum above `hysteresis`.
pub fn count_oscillations(exc: &[Excursion], hysteresis: f64) -> OscillationCount {
    let intervals: Vec<(f64, f64)> = exc
        .iter()
        .filter(|x| x.max_y > hysteresis)
        .filter_map(|x| x.eta_exit.map(|exit| (x.eta_enter, exit)))
        .collect();
    OscillationCount { count: intervals.len(), excursion_intervals: intervals }
}

/// First decisive event: an upcrossing of the hysteresis level or a
/// downcrossing of `Y = −2/(p−m)`, whichever happens first.
pub fn first_event(traj: &Trajectory<3>) -> Option<FirstEvent> {
    traj.events.iter().find_map(|e| {
        let kind = match e.name.as_str() {
            ev::UP_HYSTERESIS => FirstEventKind::ZeroUpcrossing,
            ev::STAT_LEVEL if !e.rising => FirstEventKind::StatDowncrossing,
            _ => return None,
        };
        Some(FirstEvent { kind, eta: e.eta, state: PhaseState::from_array(e.state) })
    })
}

/// Relative drift of `Z` between `X_end/10` and `X_end` along the samples
/// (which have increasing `X` in the tail of a `Q1` approach).
pub(crate) fn z_drift_last_decade(points: &[(f64, PhaseState)]) -> Option<f64> {
    let last = points.last()?.1;
    let target = last.x / 10.0;
    let idx = points.iter().rposition(|(_, s)| s.x <= target)?;
    let (a, b) = (points[idx].1, points[idx + 1].1);
    // Interpolate Z linearly in ln X.
    let t = (target.ln() - a.x.ln()) / (b.x.ln() - a.x.ln());
    let z_then = a.z + t * (b.z - a.z);
    Some(((last.z - z_then) / last.z).abs())
}

/// Where the orbit ends up, judged from its final samples.
pub(crate) fn judge_fate(pr: &ParamTriple, traj: &Trajectory<3>, cfg: &ShooterConfig) -> Fate {
    let escape = pr.escape_level();
    if traj.samples.iter().any(|s| s.state[1] < escape) {
        return Fate::EntersQ3;
    }
    let last = PhaseState::from_array(traj.last_state());
    let band = (escape + cfg.band_lower_margin, -cfg.band_upper_margin);
    if last.x > cfg.x_big && last.y > band.0 && last.y < band.1 {
        let pts: Vec<(f64, PhaseState)> = traj.points().map(|(e, s)| (e, PhaseState::from_array(s))).collect();
        if z_drift_last_decade(&pts).is_some_and(|d| d < cfg.drift_tol) {
            return Fate::ConnectsQ1;
        }
    }
    Fate::Undetermined
}

/// Classifies `l_C` by its first decisive event and follows it to its fate.
pub fn classify(spec: &LaunchSpec, cfg: &ShooterConfig) -> Result<ShotOutcome> {
    let traj = launch(spec, cfg)?;
    Ok(outcome_from_trajectory(spec, traj, cfg))
}

pub(crate) fn outcome_from_trajectory(spec: &LaunchSpec, traj: Trajectory<3>, cfg: &ShooterConfig) -> ShotOutcome {
    let pr = spec.params;
    let exc = excursions(&traj, f64::INFINITY);
    let osc = count_oscillations(&exc, cfg.hysteresis);
    let first = first_event(&traj);
    let fate = judge_fate(&pr, &traj, cfg);
    let classification = match (first.map(|f| f.kind), fate) {
        (Some(FirstEventKind::ZeroUpcrossing), _) => Classification::SetC,
        (Some(FirstEventKind::StatDowncrossing), _) => Classification::SetA,
        (None, Fate::ConnectsQ1) => Classification::ConnectsQ1,
        (None, Fate::EntersQ3) => Classification::EntersQ3,
        (None, Fate::Undetermined) => Classification::Undetermined,
    };
    let z_limit = if fate == Fate::ConnectsQ1 { Some(traj.last_state()[2]) } else { None };
    ShotOutcome {
        c: spec.c,
        classification,
        oscillations: osc.count,
        excursions: exc,
        first_event: first,
        fate,
        z_limit,
        trajectory: traj,
        tail: None,
    }
}

/// Follows an orbit heading to `Q3` in the `Y`-chart, from the last main
/// chart sample with `Y < −(N−2)/m`, until the profile value
/// `f = [Z/((p−1)X)]^{1/(p−1)}` drops below `f_stop`.
pub fn continue_to_q3(outcome: &ShotOutcome, f_stop: f64, cfg: &ShooterConfig) -> Result<Tail> {
    let pr = outcome.trajectory.params.ok_or_else(|| Error::Precondition("trajectory without parameters".into()))?;
    let escape = pr.escape_level();
    let start = outcome
        .trajectory
        .samples
        .iter()
        .rev()
        .find(|s| s.state[1] < escape && s.state[0] > 0.0 && s.state[2] > 0.0)
        .ok_or_else(|| Error::Precondition("trajectory never drops below Y = −(N−2)/m".into()))?;
    let s0 = PhaseState::from_array(start.state);
    let c0 = to_inf_y(&s0);
    // Fourth coordinate: η, advancing at rate |w| per unit chart time.
    let field = move |_t: f64, u: &[f64; 4]| {
        let g = inf_y_field(&pr, YSide::Negative, &[u[0], u[1], u[2]]);
        [g[0], g[1], g[2], u[2].abs()]
    };
    let p = pr.p;
    let profile_value = move |u: &[f64; 4]| (u[1] / ((p - 1.0) * u[0])).powf(1.0 / (p - 1.0));
    let stop = EventSpec::new("f-small", Direction::Falling, true, move |_t, u: &[f64; 4]| {
        profile_value(u).ln() - f_stop.ln()
    });
    let icfg = crate::config::IntegratorConfig { abs_tol: 1e-300, overflow_bound: f64::MAX, ..cfg.integrator.clone() };
    let tr = integrate(&field, [c0[0], c0[1], c0[2], start.eta], (0.0, 200.0), &[stop], &icfg)?;
    if tr.termination != Termination::EventTerminal {
        return Err(Error::Undetermined(format!(
            "Y-chart continuation ended with {:?} before f < {f_stop}",
            tr.termination
        )));
    }
    let points = tr
        .samples
        .iter()
        .map(|s| (s.state[3], from_inf_y(&[s.state[0], s.state[1], s.state[2]])))
        .collect();
    Ok(Tail { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supra_lepin() -> ParamTriple {
        ParamTriple::new(2.0, 20.0, 10.0).unwrap()
    }

    #[test]
    fn launch_spec_validation() {
        assert!(LaunchSpec::new(0.0, 1e-6, supra_lepin()).is_err());
        assert!(LaunchSpec::new(2.0, 1e-3, supra_lepin()).is_err());
        assert!(LaunchSpec::new(2.0, 1e-9, supra_lepin()).is_err());
        assert!(LaunchSpec::new(2.0, 1e-6, supra_lepin()).is_ok());
    }

    #[test]
    fn initial_state_near_tangent_plane() {
        let s = LaunchSpec::new(5.0, 1e-6, supra_lepin()).unwrap().initial_state();
        let x = 1e-6 / 5.0;
        assert_eq!(s.x, x);
        assert!((s.z / s.x - 5.0).abs() < 1e-6);
        assert!((s.y - x * (1.0 - 5.0) / 20.0).abs() < 1e-12);
        // C = 1 lands exactly on the constant-profile orbit.
        let s = LaunchSpec::new(1.0, 1e-6, supra_lepin()).unwrap().initial_state();
        assert_eq!(s.x, s.z);
        assert!(s.y.abs() < 1e-25);
    }

    #[test]
    fn c_one_follows_constant_orbit() {
        let cfg = ShooterConfig { eta_span: 8.0, ..ShooterConfig::default() };
        let tr = launch(&LaunchSpec::new(1.0, 1e-6, supra_lepin()).unwrap(), &cfg).unwrap();
        for (_, s) in tr.points() {
            assert!((s[0] - s[2]).abs() <= 1e-7 * s[0].max(1.0));
            assert!(s[1].abs() < 1e-7);
        }
    }

    #[test]
    fn classification_examples_supra_lepin() {
        let cfg = ShooterConfig::default();
        let o = classify(&LaunchSpec::new(1.001, 1e-6, supra_lepin()).unwrap(), &cfg).unwrap();
        assert_eq!(o.classification, Classification::SetC);
        assert!(o.oscillations >= 1);
        let o = classify(&LaunchSpec::new(50.0, 1e-6, supra_lepin()).unwrap(), &cfg).unwrap();
        assert_eq!(o.classification, Classification::SetA);
        assert_eq!(o.oscillations, 0);
        assert_eq!(o.fate, Fate::EntersQ3);
    }

    #[test]
    fn oscillation_hysteresis() {
        let exc = vec![
            Excursion { eta_enter: 1.0, eta_exit: Some(2.0), max_y: 1e-9 },
            Excursion { eta_enter: 3.0, eta_exit: Some(4.0), max_y: 0.3 },
            Excursion { eta_enter: 5.0, eta_exit: None, max_y: 0.3 },
        ];
        let c = count_oscillations(&exc, 1e-7);
        assert_eq!(c.count, 1);
        assert_eq!(c.excursion_intervals, vec![(3.0, 4.0)]);
    }
}
