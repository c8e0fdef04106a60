//! Bracketing and bisection for orbits connecting `P0` to `Q1`.
//!
//! Level `k` splits the shooting parameters into the `C`-side (at least
//! `k + 1` oscillations before the first drop below `Y = −2/(p−m)`) and the
//! `A`-side (exactly `k` oscillations, then a drop). Level `0` is the plain
//! split into sets A and C. The boundary of each level carries a connection
//! with `k` oscillations.

use serde::{Deserialize, Serialize};

use super::{
    count_oscillations, event_names as ev, excursions, first_event, launch, run_shot, z_drift_last_decade,
    Classification, Fate, LaunchSpec, ShotOutcome, Tail,
};
use crate::config::{IntegratorConfig, ShooterConfig};
use crate::dynsys::{stat_z0, PhaseState};
use crate::error::{Error, Result};
use crate::exponents::{max_reaction_for_k, multiplicity_dimension_bound, ParamTriple};
use crate::odeint::{dense_eval, integrate, Termination, Trajectory};

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelSide {
    CSide,
    ASide,
    Undetermined,
}

/// Side of `l_C` at oscillation level `k`.
pub fn classify_level(params: &ParamTriple, c: f64, k: usize, cfg: &ShooterConfig) -> Result<LevelSide> {
    let spec = LaunchSpec::new(c, cfg.delta, *params)?;
    let traj = run_shot(&spec, cfg, true)?;
    Ok(side_of(&traj, k))
}

fn side_of(traj: &Trajectory<3>, k: usize) -> LevelSide {
    let ups = traj.events_named(ev::UP_HYSTERESIS).count();
    let dropped = traj.termination == Termination::EventTerminal;
    if ups > k {
        LevelSide::CSide
    } else if dropped && ups == k {
        LevelSide::ASide
    } else {
        LevelSide::Undetermined
    }
}

/// Bisection at level 0 between a set-C and a set-A parameter.
pub fn bisect_boundary(params: &ParamTriple, c_lo: f64, c_hi: f64, cfg: &ShooterConfig) -> Result<ShotOutcome> {
    bisect_level(params, 0, c_lo, c_hi, cfg)
}

/// Bisects the level-`k` boundary between `c_cside` and `c_aside` down to
/// `tol_c`, then certifies the midpoint orbit as a connection to `Q1`.
pub fn bisect_level(
    params: &ParamTriple,
    k: usize,
    c_cside: f64,
    c_aside: f64,
    cfg: &ShooterConfig,
) -> Result<ShotOutcome> {
    params.require_supercritical()?;
    if !(c_cside.is_finite() && c_aside.is_finite()) || c_cside == c_aside {
        return Err(Error::InvalidBracket(format!("degenerate bracket ({c_cside}, {c_aside})")));
    }
    let side_lo = classify_level(params, c_cside, k, cfg)?;
    let side_hi = classify_level(params, c_aside, k, cfg)?;
    if side_lo != LevelSide::CSide || side_hi != LevelSide::ASide {
        return Err(Error::InvalidBracket(format!(
            "level {k}: C = {c_cside} is {side_lo:?} and C = {c_aside} is {side_hi:?}"
        )));
    }
    let (mut cs, mut as_) = (c_cside, c_aside);
    let mut iterations = 0;
    while (as_ - cs).abs() > cfg.tol_c {
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::Undetermined(format!("bisection did not reach tol_C = {}", cfg.tol_c)));
        }
        let mid = 0.5 * (cs + as_);
        if mid == cs || mid == as_ {
            break;
        }
        match classify_level(params, mid, k, cfg)? {
            LevelSide::CSide => cs = mid,
            LevelSide::ASide => as_ = mid,
            LevelSide::Undetermined => {
                return Err(Error::Undetermined(format!(
                    "level {k}: C = {mid} is neither side; try a smaller tol_C"
                )))
            }
        }
    }
    let c0 = 0.5 * (cs + as_);
    let cside_traj = launch(&LaunchSpec::new(cs, cfg.delta, *params)?, cfg)?;
    let aside_traj = launch(&LaunchSpec::new(as_, cfg.delta, *params)?, cfg)?;
    let spec = LaunchSpec::new(c0, cfg.delta, *params)?;
    let traj = launch(&spec, cfg)?;
    let (eta_match, tail, z_limit) = certify_q1_tail(params, &traj, &cside_traj, &aside_traj, cfg)?;

    let exc = excursions(&traj, eta_match);
    let osc = count_oscillations(&exc, cfg.hysteresis);
    let first = first_event(&traj).filter(|f| f.eta <= eta_match);
    Ok(ShotOutcome {
        c: c0,
        classification: Classification::ConnectsQ1,
        oscillations: osc.count,
        excursions: exc,
        first_event: first,
        fate: Fate::ConnectsQ1,
        z_limit: Some(z_limit),
        trajectory: traj,
        tail: Some(tail),
    })
}

/// Finds the last point where the two bracket orbits still agree with the
/// boundary orbit and, from there, follows the center manifold of `Q1`
/// until the connection criterion holds: `X > X_big`, `Y` in the band, and
/// relative drift of `Z` over the last decade of `X` below `drift_tol`.
///
/// Returns the match time, the continuation and the limit of `Z`.
pub fn certify_q1_tail(
    params: &ParamTriple,
    traj: &Trajectory<3>,
    cside: &Trajectory<3>,
    aside: &Trajectory<3>,
    cfg: &ShooterConfig,
) -> Result<(f64, Tail, f64)> {
    let x_min = (2.0 * (params.dim - 2.0) / (params.p - 1.0)).max(5.0);
    let band = (params.escape_level() + cfg.band_lower_margin, -cfg.band_upper_margin);
    let mut matched: Option<(f64, PhaseState)> = None;
    for (eta, s) in traj.points() {
        let (Ok(a), Ok(b)) = (dense_eval(cside, eta), dense_eval(aside, eta)) else {
            break;
        };
        if (a[1] - b[1]).abs() > cfg.match_tol || (s[1] - a[1]).abs() > cfg.match_tol {
            break;
        }
        if s[0] >= x_min && s[1] > band.0 && s[1] < band.1 {
            matched = Some((eta, PhaseState::from_array(s)));
        }
    }
    let (eta_match, start) = matched.ok_or_else(|| {
        Error::Undetermined("bracket orbits separate before the boundary orbit nears Q1".into())
    })?;
    let points = center_manifold_tail(params, eta_match, &start, cfg)?;

    let hit = points
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| s.x > cfg.x_big && s.y > band.0 && s.y < band.1)
        .find(|(i, _)| z_drift_last_decade(&points[..=*i]).is_some_and(|d| d < cfg.drift_tol))
        .map(|(i, _)| i)
        .ok_or_else(|| {
            Error::Undetermined(format!(
                "Z still drifts by more than {} per decade at X = {}",
                cfg.drift_tol, cfg.tail_x_budget
            ))
        })?;
    let mut tail_points = points;
    tail_points.truncate(hit + 1);
    let z_limit = tail_points[hit].1.z;
    Ok((eta_match, Tail { points: tail_points }, z_limit))
}

/// Flow on the center manifold of `Q1` in the `X`-chart, with
/// `w = (p−m)/2·y + x` slaved to `−Z₀x² + x·z + ρx³`, where `ρ` is fitted
/// at the start point. `X = 1/x` grows monotonically along the tail, so
/// `s = ln X` serves as time; `z` and `η` are carried along.
fn center_manifold_tail(
    params: &ParamTriple,
    eta0: f64,
    start: &PhaseState,
    cfg: &ShooterConfig,
) -> Result<Vec<(f64, PhaseState)>> {
    let (m, p, k) = (params.m, params.p, params.gap());
    let a = -stat_z0(params);
    let (x0, y0, z0) = (1.0 / start.x, start.y / start.x, start.z / start.x);
    let rho = (k / 2.0 * y0 + x0 - a * x0 * x0 - x0 * z0) / (x0 * x0 * x0);
    let slaved_y = move |x: f64, z: f64| 2.0 * (a * x * x + x * z + rho * x * x * x - x) / k;
    let field = move |s: f64, u: &[f64; 2]| {
        let x = (-s).exp();
        let y = slaved_y(x, u[0]);
        // ds/dt = −x'/x in chart time t.
        let rate = 2.0 * x - (m - 1.0) * y;
        [(p - 1.0) * y * u[0] / rate, x / rate]
    };
    let span = (start.x.ln(), cfg.tail_x_budget.ln());
    if !(span.0 < span.1) {
        return Err(Error::Precondition(format!("match point X = {} is beyond the tail budget", start.x)));
    }
    let icfg = IntegratorConfig { abs_tol: 1e-300, overflow_bound: f64::MAX, ..cfg.integrator.clone() };
    let tr = integrate(&field, [z0, eta0], span, &[], &icfg)?;
    if tr.termination != Termination::SpanEnd {
        return Err(Error::Undetermined(format!("center-manifold continuation ended with {:?}", tr.termination)));
    }
    Ok(tr
        .samples
        .iter()
        .map(|smp| {
            let (x, z) = ((-smp.eta).exp(), smp.state[0]);
            (smp.state[1], PhaseState::new(1.0 / x, slaved_y(x, z) / x, z / x))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFailure {
    pub level: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub level: usize,
    pub outcome: ShotOutcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FindReport {
    pub solutions: Vec<Solution>,
    pub failures: Vec<LevelFailure>,
}

/// Whether a connection with `k` oscillations is guaranteed: `k = 0`
/// always; `k ≥ 1` needs `p < ((k+1)m − 1)/k` and `N` above the dimension
/// bound for `K = k + 1`.
fn level_guaranteed(params: &ParamTriple, k: usize) -> Result<Option<String>> {
    if k == 0 {
        return Ok(None);
    }
    let kk = u32::try_from(k + 1).map_err(|_| Error::Domain(format!("level {k} too large")))?;
    let p_max = max_reaction_for_k(kk, params.m)?;
    let n_min = multiplicity_dimension_bound(kk, params.m)?;
    if params.p >= p_max {
        return Ok(Some(format!("p = {} ≥ {p_max}: no class with {k} oscillations is predicted", params.p)));
    }
    if params.dim <= n_min {
        return Ok(Some(format!("N = {} ≤ {n_min}: no class with {k} oscillations is predicted", params.dim)));
    }
    Ok(None)
}

/// Scans `C` geometrically downward from `c_top` for an `A`-side value
/// directly followed by a `C`-side one.
fn scan_bracket(params: &ParamTriple, k: usize, c_top: f64, cfg: &ShooterConfig) -> Result<Option<(f64, f64)>> {
    let mut above: Option<(f64, LevelSide)> = None;
    let mut c = c_top;
    while c > 1.0 {
        let side = classify_level(params, c, k, cfg)?;
        if let (LevelSide::CSide, Some((c_above, LevelSide::ASide))) = (side, above) {
            return Ok(Some((c, c_above)));
        }
        above = Some((c, side));
        c /= cfg.scan_ratio;
    }
    Ok(None)
}

/// Connections with `0, 1, …, K_max − 1` oscillations. Each level is
/// searched below the previous boundary; a failed level is recorded and the
/// search moves on.
pub fn find_solutions(params: &ParamTriple, k_max: usize, cfg: &ShooterConfig) -> Result<FindReport> {
    params.require_supercritical()?;
    if k_max == 0 {
        return Err(Error::Precondition("K_max must be at least 1".into()));
    }
    if !(cfg.scan_ratio > 1.0) {
        return Err(Error::Precondition(format!("scan ratio {} must exceed 1", cfg.scan_ratio)));
    }
    let mut report = FindReport::default();
    let mut c_top = cfg.c_max;
    for k in 0..k_max {
        if let Some(reason) = level_guaranteed(params, k)? {
            report.failures.push(LevelFailure { level: k, reason });
            break;
        }
        let bracket = match scan_bracket(params, k, c_top, cfg) {
            Ok(b) => b,
            Err(e) => {
                report.failures.push(LevelFailure { level: k, reason: e.to_string() });
                continue;
            }
        };
        let Some((cs, as_)) = bracket else {
            report.failures.push(LevelFailure {
                level: k,
                reason: format!("no A-side/C-side bracket found in (1, {c_top})"),
            });
            continue;
        };
        match bisect_level(params, k, cs, as_, cfg) {
            Ok(outcome) => {
                if outcome.oscillations != k {
                    report.failures.push(LevelFailure {
                        level: k,
                        reason: format!("boundary orbit has {} oscillations", outcome.oscillations),
                    });
                    continue;
                }
                c_top = outcome.c;
                report.solutions.push(Solution { level: k, outcome });
            }
            Err(e) => report.failures.push(LevelFailure { level: k, reason: e.to_string() }),
        }
    }
    Ok(report)
}
