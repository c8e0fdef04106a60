//! The six experiment modes. Each writes its tables through a [`Sink`] and
//! finishes with `summary.json`.

use blowup::dynsys::{critical_points, exact_orbit_state, ExactOrbit, Location, PhaseState, PointLabel};
use blowup::exponents::{classify_regime, exponent_table, max_reaction_for_k, multiplicity_dimension_bound, ExtReal};
use blowup::profile::{
    const_level, exact_jet, extract_decay, ode_residual, profile_samples, sampled_ode_residuals, solution_profile,
    stat_constant, stationary_residual, ExactProfile, ProfilePoint,
};
use blowup::shooter::{
    classify, find_solutions, lepin_default_eta_end, lepin_zeros, LaunchSpec, ShotOutcome,
};
use blowup::ParamTriple;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{Cell, Sink, Table};
use crate::CliError;

pub const TRAJECTORY_COLUMNS: &[&str] = &["eta", "X", "Y", "Z", "events"];
pub const PROFILE_COLUMNS: &[&str] = &["xi", "f"];
pub const REFERENCE_COLUMNS: &[&str] = &["xi", "u_star", "u_s"];
pub const EXPONENT_COLUMNS: &[&str] = &["quantity", "K", "value"];
pub const POINT_COLUMNS: &[&str] = &[
    "label", "gamma", "chart", "c1", "c2", "c3", "c4", "stability", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
    "eig3_re", "eig3_im",
];
pub const REFERENCE_ORBIT_COLUMNS: &[&str] = &["series", "eta", "X", "Y", "Z"];
pub const ZERO_COLUMNS: &[&str] = &["index", "eta"];
pub const RESIDUAL_COLUMNS: &[&str] = &["series", "xi", "residual"];

/// Default `K` for the bound table and for `find`.
const DEFAULT_K: usize = 2;
/// Points on reference and residual grids.
const GRID_POINTS: usize = 201;

#[derive(Serialize)]
struct ParamsOut {
    m: f64,
    #[serde(rename = "N")]
    dim: f64,
    p: Option<f64>,
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    mode: &'static str,
    params: ParamsOut,
    results: T,
}

fn params_out(cfg: &ExperimentConfig) -> ParamsOut {
    ParamsOut { m: cfg.m, dim: cfg.dim, p: cfg.p }
}

fn kebab<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

// ---------------------------------------------------------------- exponents

#[derive(Serialize)]
struct ExponentsOut {
    fujita: f64,
    sobolev: ExtReal,
    joseph_lundgren: ExtReal,
    lepin: ExtReal,
    regime: Option<String>,
}

pub fn exponents(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let t = exponent_table(cfg.m, cfg.dim)?;
    let k_max = cfg.k.unwrap_or(DEFAULT_K).max(2);
    let mut table = Table::new(EXPONENT_COLUMNS);
    table.push(vec!["p_F".into(), "".into(), t.fujita.into()]);
    table.push(vec!["p_s".into(), "".into(), t.sobolev.value().into()]);
    table.push(vec!["p_JL".into(), "".into(), t.joseph_lundgren.value().into()]);
    table.push(vec!["p_L".into(), "".into(), t.lepin.value().into()]);
    for k in 2..=k_max {
        let kk = u32::try_from(k).map_err(|_| CliError::Config(format!("K = {k} is too large")))?;
        table.push(vec!["N_bound".into(), k.into(), multiplicity_dimension_bound(kk, cfg.m)?.into()]);
        table.push(vec!["p_max".into(), k.into(), max_reaction_for_k(kk, cfg.m)?.into()]);
    }
    sink.table("exponents", &table)?;
    let regime = match cfg.p {
        Some(p) => Some(classify_regime(&ParamTriple::new(cfg.m, cfg.dim, p)?).label().to_owned()),
        None => None,
    };
    let results = ExponentsOut {
        fujita: t.fujita,
        sobolev: t.sobolev,
        joseph_lundgren: t.joseph_lundgren,
        lepin: t.lepin,
        regime,
    };
    sink.summary(&Summary { mode: "exponents", params: params_out(cfg), results })
}

// ---------------------------------------------------------------- portrait

#[derive(Serialize)]
struct PortraitOut {
    points: usize,
    regime: String,
}

fn label_cells(label: PointLabel) -> (Cell, Cell) {
    match label {
        PointLabel::QGamma(g) => ("QGamma".into(), g.into()),
        other => (format!("{other:?}").into(), "".into()),
    }
}

pub fn portrait(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pr = cfg.params()?;
    let points = critical_points(&pr)?;
    let mut table = Table::new(POINT_COLUMNS);
    for info in &points {
        let (label, gamma) = label_cells(info.label);
        let (chart, coords): (String, Vec<f64>) = match info.location {
            Location::Main(s) => ("main".into(), s.to_array().to_vec()),
            Location::Chart { chart, coords } => (chart.name().into(), coords.to_vec()),
            Location::Sphere(c) => ("sphere".into(), c.to_vec()),
        };
        let mut row = vec![label, gamma, chart.into()];
        for i in 0..4 {
            row.push(coords.get(i).map_or(Cell::from(""), |&v| v.into()));
        }
        row.push(kebab(&info.stability).into());
        for e in &info.eigenvalues {
            row.push(e.re.into());
            row.push(e.im.into());
        }
        table.push(row);
    }
    sink.table("critical_points", &table)?;

    // Phase-space polylines of the two exact orbits.
    let mut orbits = Table::new(REFERENCE_ORBIT_COLUMNS);
    for (name, which) in [("const-orbit", ExactOrbit::ConstOrbit), ("stat-orbit", ExactOrbit::StatOrbit)] {
        for i in 0..GRID_POINTS {
            let eta = -5.0 + 10.0 * i as f64 / (GRID_POINTS - 1) as f64;
            let s = exact_orbit_state(which, &pr, eta)?;
            orbits.push(vec![name.into(), eta.into(), s.x.into(), s.y.into(), s.z.into()]);
        }
    }
    sink.table("reference_orbits", &orbits)?;
    let results = PortraitOut { points: points.len(), regime: classify_regime(&pr).label().to_owned() };
    sink.summary(&Summary { mode: "portrait", params: params_out(cfg), results })
}

// ---------------------------------------------------------------- shoot / find

fn trajectory_table(outcome: &ShotOutcome) -> Table {
    let mut rows: Vec<(f64, PhaseState, Vec<String>)> =
        outcome.all_points().into_iter().map(|(eta, s)| (eta, s, Vec::new())).collect();
    for ev in &outcome.trajectory.events {
        let i = rows.partition_point(|r| r.0 < ev.eta);
        match rows.get_mut(i) {
            Some(r) if r.0 == ev.eta => r.2.push(ev.name.clone()),
            _ => rows.insert(i, (ev.eta, PhaseState::from_array(ev.state), vec![ev.name.clone()])),
        }
    }
    let mut table = Table::new(TRAJECTORY_COLUMNS);
    for (eta, s, names) in rows {
        table.push(vec![eta.into(), s.x.into(), s.y.into(), s.z.into(), names.join(";").into()]);
    }
    table
}

fn profile_table(samples: &[ProfilePoint]) -> Table {
    let mut table = Table::new(PROFILE_COLUMNS);
    for s in samples {
        table.push(vec![s.xi.into(), s.f.into()]);
    }
    table
}

/// `U_*` and `U_s` on a grid covering the given profile samples.
fn reference_table(pr: &ParamTriple, profiles: &[Vec<ProfilePoint>]) -> Result<Table, CliError> {
    let mut table = Table::new(REFERENCE_COLUMNS);
    let xis = profiles.iter().flatten().map(|s| s.xi);
    let (lo, hi) = xis.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !(lo > 0.0 && hi > lo) {
        return Ok(table);
    }
    let (k_star, cs, e) = (const_level(pr), stat_constant(pr)?, 2.0 / pr.gap());
    for xi in log_grid(lo, hi, GRID_POINTS) {
        table.push(vec![xi.into(), k_star.into(), (cs * xi.powf(-e)).into()]);
    }
    Ok(table)
}

#[derive(Serialize)]
struct ShotOut {
    index: usize,
    #[serde(rename = "C")]
    c: f64,
    classification: String,
    fate: String,
    oscillations: usize,
    z_limit: Option<f64>,
    decay_c: Option<f64>,
    f0: f64,
    trajectory_file: String,
    profile_file: String,
}

#[derive(Serialize)]
struct ShootOut {
    shots: Vec<ShotOut>,
    reference_file: String,
}

pub fn shoot(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pr = cfg.params()?;
    pr.require_supercritical()?;
    let mut shots = Vec::new();
    let mut profiles = Vec::new();
    for (index, &c) in cfg.c_list.iter().enumerate() {
        let spec = LaunchSpec::new(c, cfg.shooter.delta, pr)?;
        let outcome = classify(&spec, &cfg.shooter)?;
        let prof = solution_profile(&pr, &outcome)?;
        let trajectory_file = sink.table(&format!("trajectory_{index}"), &trajectory_table(&outcome))?;
        let profile_file = sink.table(&format!("profile_{index}"), &profile_table(&prof.samples))?;
        shots.push(ShotOut {
            index,
            c,
            classification: kebab(&outcome.classification),
            fate: kebab(&outcome.fate),
            oscillations: outcome.oscillations,
            z_limit: outcome.z_limit,
            decay_c: prof.decay_c,
            f0: prof.f0,
            trajectory_file,
            profile_file,
        });
        profiles.push(prof.samples);
    }
    let reference_file = sink.table("reference", &reference_table(&pr, &profiles)?)?;
    sink.summary(&Summary { mode: "shoot", params: params_out(cfg), results: ShootOut { shots, reference_file } })
}

#[derive(Serialize)]
struct SolutionOut {
    level: usize,
    #[serde(rename = "C")]
    c: f64,
    oscillations: usize,
    local_maxima: usize,
    monotone: bool,
    z_limit: Option<f64>,
    decay_c: f64,
    decay_fit: f64,
    f0: f64,
    trajectory_file: String,
    profile_file: String,
}

#[derive(Serialize)]
struct FailureOut {
    level: usize,
    reason: String,
}

#[derive(Serialize)]
struct FindOut {
    k_max: usize,
    solutions: Vec<SolutionOut>,
    failures: Vec<FailureOut>,
    reference_file: String,
}

pub fn find(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pr = cfg.params()?;
    let k_max = cfg.k.unwrap_or(DEFAULT_K);
    let report = find_solutions(&pr, k_max, &cfg.shooter)?;
    let mut solutions = Vec::new();
    let mut profiles = Vec::new();
    for sol in &report.solutions {
        let prof = solution_profile(&pr, &sol.outcome)?;
        let (decay_c, decay_fit) = extract_decay(&pr, &sol.outcome)?;
        let trajectory_file = sink.table(&format!("solution_{}_trajectory", sol.level), &trajectory_table(&sol.outcome))?;
        let profile_file = sink.table(&format!("solution_{}_profile", sol.level), &profile_table(&prof.samples))?;
        solutions.push(SolutionOut {
            level: sol.level,
            c: sol.outcome.c,
            oscillations: sol.outcome.oscillations,
            local_maxima: prof.local_maxima,
            monotone: prof.monotone,
            z_limit: sol.outcome.z_limit,
            decay_c,
            decay_fit,
            f0: prof.f0,
            trajectory_file,
            profile_file,
        });
        profiles.push(prof.samples);
    }
    let reference_file = sink.table("reference", &reference_table(&pr, &profiles)?)?;
    let failures = report.failures.iter().map(|f| FailureOut { level: f.level, reason: f.reason.clone() }).collect();
    let results = FindOut { k_max, solutions, failures, reference_file };
    sink.summary(&Summary { mode: "find", params: params_out(cfg), results })
}

// ---------------------------------------------------------------- lepin

#[derive(Serialize)]
struct LepinOut {
    count: usize,
    eta_start: f64,
    eta_end: f64,
    constant: f64,
    zeros_file: String,
}

pub fn lepin(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pr = cfg.params()?;
    let eta_end = lepin_default_eta_end(&pr, &cfg.lepin)?;
    let report = lepin_zeros(&pr, eta_end, cfg.lepin.eta_start, &cfg.lepin)?;
    let mut table = Table::new(ZERO_COLUMNS);
    for (i, &z) in report.zeros.iter().enumerate() {
        table.push(vec![i.into(), z.into()]);
    }
    let zeros_file = sink.table("lepin_zeros", &table)?;
    let results = LepinOut {
        count: report.count,
        eta_start: report.eta_start,
        eta_end: report.eta_end,
        constant: report.constant,
        zeros_file,
    };
    sink.summary(&Summary { mode: "lepin", params: params_out(cfg), results })
}

// ---------------------------------------------------------------- residuals

#[derive(Serialize)]
struct SeriesOut {
    series: String,
    points: usize,
    max_abs: f64,
}

#[derive(Serialize)]
struct ResidualsOut {
    series: Vec<SeriesOut>,
    residuals_file: String,
}

pub fn residuals(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let pr = cfg.params()?;
    let grid = log_grid(1e-2, 1e2, GRID_POINTS);
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let sobolev = blowup::exponents::classify_regime(&pr) == blowup::exponents::Regime::SobolevCritical;
    if sobolev {
        // The stationary family lives at p = p_s, where U_s does not exist.
        let which = ExactProfile::SobolevFamily { c: 1.0 };
        let mut rows = Vec::new();
        for &xi in &grid {
            rows.push((xi, stationary_residual(&pr, exact_jet(which, &pr, xi)?, xi)));
        }
        series.push(("sobolev".into(), rows));
    } else {
        for (name, which) in [("u_star", ExactProfile::ConstantStar), ("u_s", ExactProfile::StationarySingular)] {
            let mut rows = Vec::new();
            for &xi in &grid {
                rows.push((xi, ode_residual(&pr, exact_jet(which, &pr, xi)?, xi)));
            }
            series.push((name.into(), rows));
        }
    }
    for (index, &c) in cfg.c_list.iter().enumerate() {
        let outcome = classify(&LaunchSpec::new(c, cfg.shooter.delta, pr)?, &cfg.shooter)?;
        let samples = profile_samples(&pr, &outcome.all_points())?;
        series.push((format!("shot_{index}"), sampled_ode_residuals(&pr, &samples)));
    }
    let mut table = Table::new(RESIDUAL_COLUMNS);
    let mut summary = Vec::new();
    for (name, rows) in &series {
        for &(xi, r) in rows {
            table.push(vec![name.as_str().into(), xi.into(), r.into()]);
        }
        let max_abs = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        summary.push(SeriesOut { series: name.clone(), points: rows.len(), max_abs });
    }
    let residuals_file = sink.table("residuals", &table)?;
    let results = ResidualsOut { series: summary, residuals_file };
    sink.summary(&Summary { mode: "residuals", params: params_out(cfg), results })
}
