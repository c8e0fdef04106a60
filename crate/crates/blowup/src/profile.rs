//! Profiles `f(ξ)` of self-similar solutions `u = (T−t)^{−1/(p−1)} f(ξ)`,
//! `ξ = |x|(T−t)^{−β}`, and their relation to phase-space states.
//!
//! The profile equation is
//! `(f^m)'' + (N−1)/ξ·(f^m)' − f/(p−1) − βξf' + f^p = 0`, and a state with
//! `X, Z > 0` corresponds to the point
//! `f = [Z/((p−1)X)]^{1/(p−1)}`, `ξ = √m·[(p−1)X]^β·Z^{(m−1)/(2(p−1))}`.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::config::ShooterConfig;
use crate::dynsys::PhaseState;
use crate::error::{domain, Error, Result};
use crate::exponents::ParamTriple;
use crate::shooter::{continue_to_q3, Classification, Fate, ShotOutcome};

/// Threshold below which the profile counts as having reached its edge.
pub const DEAD_CORE_LEVEL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub xi: f64,
    pub f: f64,
}

/// `k_* = (1/(p−1))^{1/(p−1)}`, the constant profile.
pub fn const_level(params: &ParamTriple) -> f64 {
    (1.0 / (params.p - 1.0)).powf(1.0 / (params.p - 1.0))
}

/// `c_s = [2m(p(N−2) − mN)/(p−m)²]^{1/(p−m)}`, the constant of the singular
/// stationary profile `c_s ξ^{−2/(p−m)}`.
pub fn stat_constant(params: &ParamTriple) -> Result<f64> {
    params.require_supercritical()?;
    let (m, n, p, k) = (params.m, params.dim, params.p, params.gap());
    Ok((2.0 * m * (p * (n - 2.0) - m * n) / (k * k)).powf(1.0 / k))
}

/// `f(0)` of the profile launched with shooting parameter `C`.
pub fn launch_level(params: &ParamTriple, c: f64) -> f64 {
    (c / (params.p - 1.0)).powf(1.0 / (params.p - 1.0))
}

pub fn state_to_profile(params: &ParamTriple, state: &PhaseState) -> Result<ProfilePoint> {
    if !(state.x > 0.0 && state.z > 0.0) {
        return domain(format!("profile needs X > 0 and Z > 0, got {state:?}"));
    }
    let (m, p) = (params.m, params.p);
    let f = (state.z / ((p - 1.0) * state.x)).powf(1.0 / (p - 1.0));
    let xi = m.sqrt() * ((p - 1.0) * state.x).powf(params.beta()) * state.z.powf((m - 1.0) / (2.0 * (p - 1.0)));
    Ok(ProfilePoint { xi, f })
}

/// `X = ξ²f^{1−m}/(m(p−1))`, `Y = ξf'/f`, `Z = ξ²f^{p−m}/m`.
pub fn profile_to_state(params: &ParamTriple, xi: f64, f: f64, df: f64) -> Result<PhaseState> {
    if !(xi > 0.0 && f > 0.0) {
        return domain(format!("state needs ξ > 0 and f > 0, got ξ = {xi}, f = {f}"));
    }
    let (m, p) = (params.m, params.p);
    Ok(PhaseState::new(
        xi * xi * f.powf(1.0 - m) / (m * (p - 1.0)),
        xi * df / f,
        xi * xi * f.powf(p - m) / m,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExactProfile {
    /// `f ≡ k_*`.
    ConstantStar,
    /// `f = c_s ξ^{−2/(p−m)}`.
    StationarySingular,
    /// The stationary family at `p = p_s`:
    /// `f^m = (N(N−2)C)^{(N−2)/4} (ξ² + C)^{−(N−2)/2}`.
    SobolevFamily { c: f64 },
}

fn require_sobolev(params: &ParamTriple, c: f64) -> Result<()> {
    let ps = params.m * (params.dim + 2.0) / (params.dim - 2.0);
    if (params.p - ps).abs() > 1e-12 * ps {
        return domain(format!("the stationary family needs p = p_s = {ps}, got {}", params.p));
    }
    if !(c > 0.0) {
        return domain(format!("family parameter C = {c} must be positive"));
    }
    Ok(())
}

/// `(f, f', f'')` of the stationary family with constant `k0` in place of
/// `N(N−2)`.
fn sobolev_jet(params: &ParamTriple, c: f64, k0: f64, xi: f64) -> [f64; 3] {
    let (m, n) = (params.m, params.dim);
    let q = (n - 2.0) / 2.0;
    let amp = (k0 * c).powf((n - 2.0) / 4.0);
    let s = xi * xi + c;
    let v = amp * s.powf(-q);
    let dv = -2.0 * q * xi * amp * s.powf(-q - 1.0);
    let ddv = -2.0 * q * amp * s.powf(-q - 1.0) + 4.0 * q * (q + 1.0) * xi * xi * amp * s.powf(-q - 2.0);
    let e = 1.0 / m;
    let f = v.powf(e);
    let df = e * v.powf(e - 1.0) * dv;
    let ddf = e * ((e - 1.0) * v.powf(e - 2.0) * dv * dv + v.powf(e - 1.0) * ddv);
    [f, df, ddf]
}

/// Value and first two derivatives of an exact profile.
pub fn exact_jet(which: ExactProfile, params: &ParamTriple, xi: f64) -> Result<[f64; 3]> {
    match which {
        ExactProfile::ConstantStar => Ok([const_level(params), 0.0, 0.0]),
        ExactProfile::StationarySingular => {
            if !(xi > 0.0) {
                return domain(format!("singular profile needs ξ > 0, got {xi}"));
            }
            let cs = stat_constant(params)?;
            let e = -2.0 / params.gap();
            Ok([cs * xi.powf(e), cs * e * xi.powf(e - 1.0), cs * e * (e - 1.0) * xi.powf(e - 2.0)])
        }
        ExactProfile::SobolevFamily { c } => {
            require_sobolev(params, c)?;
            if !(xi >= 0.0) {
                return domain(format!("radius must be non-negative, got {xi}"));
            }
            let n = params.dim;
            Ok(sobolev_jet(params, c, n * (n - 2.0), xi))
        }
    }
}

pub fn exact_profile(which: ExactProfile, params: &ParamTriple, xi: f64) -> Result<f64> {
    exact_jet(which, params, xi).map(|j| j[0])
}

/// `((f^m)', (f^m)'')` from `(f, f', f'')`.
fn power_derivatives(m: f64, jet: [f64; 3]) -> (f64, f64) {
    let [f, df, ddf] = jet;
    let g1 = m * f.powf(m - 1.0) * df;
    let g2 = m * (m - 1.0) * f.powf(m - 2.0) * df * df + m * f.powf(m - 1.0) * ddf;
    (g1, g2)
}

/// Left-hand side of the profile equation at `ξ`.
pub fn ode_residual(params: &ParamTriple, jet: [f64; 3], xi: f64) -> f64 {
    let (m, n, p) = (params.m, params.dim, params.p);
    let (g1, g2) = power_derivatives(m, jet);
    g2 + (n - 1.0) / xi * g1 - jet[0] / (p - 1.0) - params.beta() * xi * jet[1] + jet[0].powf(p)
}

/// Left-hand side of the radial stationary equation `Δ(f^m) + f^p = 0`.
pub fn stationary_residual(params: &ParamTriple, jet: [f64; 3], xi: f64) -> f64 {
    let (m, n, p) = (params.m, params.dim, params.p);
    let (g1, g2) = power_derivatives(m, jet);
    g2 + (n - 1.0) / xi * g1 + jet[0].powf(p)
}

/// Constant `K₀` for which `v = (K₀C)^{(N−2)/4}(ξ² + C)^{−(N−2)/2}` solves
/// `Δv + v^{(N+2)/(N−2)} = 0`, by least squares over `xis`.
///
/// With `v₁` the `K₀ = 1` member, the residual is
/// `K₀^{(N−2)/4}(Δv₁ + K₀ v₁^{(N+2)/(N−2)})`, linear in `K₀` after the
/// common factor is dropped.
pub fn calibrate_sobolev_constant(params: &ParamTriple, c: f64, xis: &[f64]) -> Result<f64> {
    require_sobolev(params, c)?;
    if xis.is_empty() || xis.iter().any(|&x| !(x > 0.0)) {
        return domain("calibration radii must be positive and non-empty");
    }
    let n = params.dim;
    let q = (n + 2.0) / (n - 2.0);
    // v₁ and its Laplacian, computed directly on v (m = 1 view).
    let flat = ParamTriple { m: 1.0, ..*params };
    let (mut ab, mut bb) = (0.0, 0.0);
    for &xi in xis {
        let [v, dv, ddv] = sobolev_jet(&flat, c, 1.0, xi);
        let a = ddv + (n - 1.0) / xi * dv;
        let b = v.powf(q);
        ab += a * b;
        bb += b * b;
    }
    Ok(-ab / bb)
}

/// Profile of a computed orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub c_shoot: f64,
    pub samples: Vec<ProfilePoint>,
    pub oscillations: usize,
    pub monotone: bool,
    pub local_maxima: usize,
    pub decay_c: Option<f64>,
    pub f0: f64,
}

/// Profile samples of an orbit, with strictly increasing `ξ`.
pub fn profile_samples(params: &ParamTriple, points: &[(f64, PhaseState)]) -> Result<Vec<ProfilePoint>> {
    let mut out: Vec<ProfilePoint> = Vec::with_capacity(points.len());
    for (_, s) in points {
        let pt = state_to_profile(params, s)?;
        if out.last().is_none_or(|last| pt.xi > last.xi) {
            out.push(pt);
        }
    }
    Ok(out)
}

/// Number of interior local maxima of `f` (sign changes of the discrete
/// difference from positive to negative).
pub fn local_maxima(samples: &[ProfilePoint]) -> usize {
    let mut rising = false;
    let mut count = 0;
    for w in samples.windows(2) {
        let d = w[1].f - w[0].f;
        if d > 0.0 {
            rising = true;
        } else if d < 0.0 {
            if rising {
                count += 1;
            }
            rising = false;
        }
    }
    count
}

pub fn is_strictly_decreasing(samples: &[ProfilePoint]) -> bool {
    samples.windows(2).all(|w| w[1].f < w[0].f)
}

pub fn solution_profile(params: &ParamTriple, outcome: &ShotOutcome) -> Result<SolutionProfile> {
    let samples = profile_samples(params, &outcome.all_points())?;
    let decay_c = outcome.z_limit.map(|z| (params.m * z).powf(1.0 / params.gap()));
    Ok(SolutionProfile {
        c_shoot: outcome.c,
        oscillations: outcome.oscillations,
        monotone: is_strictly_decreasing(&samples),
        local_maxima: local_maxima(&samples),
        decay_c,
        f0: launch_level(params, outcome.c),
        samples,
    })
}

/// Far-field constant `(m·Z_lim)^{1/(p−m)}` of a connection to `Q1`, and the
/// largest relative deviation of `f·ξ^{2/(p−m)}` from it over the last
/// decade of `ξ`.
pub fn extract_decay(params: &ParamTriple, outcome: &ShotOutcome) -> Result<(f64, f64)> {
    if outcome.classification != Classification::ConnectsQ1 {
        return Err(Error::Precondition(format!("decay needs a connection to Q1, got {:?}", outcome.classification)));
    }
    let z = outcome.z_limit.ok_or_else(|| Error::Precondition("connection without a Z limit".into()))?;
    let decay = (params.m * z).powf(1.0 / params.gap());
    let samples = profile_samples(params, &outcome.all_points())?;
    let xi_end = samples.last().map_or(0.0, |s| s.xi);
    let e = 2.0 / params.gap();
    let fit = samples
        .iter()
        .filter(|s| s.xi >= xi_end / 10.0)
        .map(|s| (s.f * s.xi.powf(e) - decay).abs() / decay)
        .fold(0.0, f64::max);
    Ok((decay, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxSign {
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadCore {
    /// First radius at which `f < 10⁻³`.
    pub xi0_estimate: f64,
    pub f: f64,
    /// `(f^m)' = m f^m Y/ξ` there.
    pub flux: f64,
    pub flux_sign: FluxSign,
}

/// Edge of the support of a profile entering `Q3`: the orbit is followed
/// until `f < 10⁻³` (continuing in the `Y`-chart when the main chart
/// overflows first) and the flux there is reported.
pub fn dead_core_diagnostic(params: &ParamTriple, outcome: &ShotOutcome, cfg: &ShooterConfig) -> Result<DeadCore> {
    if outcome.fate != Fate::EntersQ3 {
        return Err(Error::Precondition(format!(
            "dead-core diagnostic needs an orbit entering Q3, got {:?}",
            outcome.classification
        )));
    }
    let find = |pts: &[(f64, PhaseState)]| -> Result<Option<DeadCore>> {
        for (_, s) in pts {
            let pt = state_to_profile(params, s)?;
            if pt.f < DEAD_CORE_LEVEL {
                let flux = params.m * pt.f.powf(params.m) * s.y / pt.xi;
                let flux_sign = if flux < 0.0 {
                    FluxSign::Negative
                } else if flux > 0.0 {
                    FluxSign::Positive
                } else {
                    FluxSign::Zero
                };
                return Ok(Some(DeadCore { xi0_estimate: pt.xi, f: pt.f, flux, flux_sign }));
            }
        }
        Ok(None)
    };
    let main: Vec<(f64, PhaseState)> =
        outcome.trajectory.points().map(|(e, s)| (e, PhaseState::from_array(s))).collect();
    if let Some(d) = find(&main)? {
        return Ok(d);
    }
    let tail = continue_to_q3(outcome, DEAD_CORE_LEVEL / 10.0, cfg)?;
    find(&tail.points)?.ok_or_else(|| Error::Undetermined(format!("profile never dropped below {DEAD_CORE_LEVEL}")))
}

/// Local form of a profile with an interface at `ξ₀` approached from the
/// outside: `f = [(p−m)(m−1)(ξ² − ξ₀²)/(4m(p−1))]_+^{1/(m−1)}`.
pub fn interface_form(params: &ParamTriple, xi: f64, xi0: f64) -> f64 {
    let (m, p) = (params.m, params.p);
    let base = (p - m) * (m - 1.0) * (xi * xi - xi0 * xi0) / (4.0 * m * (p - 1.0));
    base.max(0.0).powf(1.0 / (m - 1.0))
}

/// Fits the interface position `ξ₀` from the positive sample closest to the
/// interface and returns it with the largest relative deviation of the
/// samples in `(ξ₀, window·ξ₀)` from [`interface_form`].
pub fn fit_interface(params: &ParamTriple, samples: &[ProfilePoint], window: f64) -> Result<(f64, f64)> {
    let (m, p) = (params.m, params.p);
    let kappa = (p - m) * (m - 1.0) / (4.0 * m * (p - 1.0));
    let edge = samples
        .iter()
        .filter(|s| s.f > 0.0)
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .ok_or_else(|| Error::Precondition("no positive samples".into()))?;
    let xi0_sq = edge.xi * edge.xi - edge.f.powf(m - 1.0) / kappa;
    if !(xi0_sq > 0.0) {
        return domain("samples do not show an interface");
    }
    let xi0 = xi0_sq.sqrt();
    let dev = samples
        .iter()
        .filter(|s| s.f > 0.0 && s.xi > xi0 && s.xi < window * xi0)
        .map(|s| (s.f - interface_form(params, s.xi, xi0)).abs() / s.f)
        .fold(0.0, f64::max);
    Ok((xi0, dev))
}

/// Samples closer than this in `ln ξ` are skipped by [`sampled_ode_residuals`]:
/// below it rounding in the stencil outweighs truncation.
pub const MIN_LOG_STEP: f64 = 1e-5;

/// Profile-equation residuals of sampled data, with derivatives from
/// five-point stencils in `ln ξ`. The samples are first thinned so that
/// neighbours are at least [`MIN_LOG_STEP`] apart.
pub fn sampled_ode_residuals(params: &ParamTriple, samples: &[ProfilePoint]) -> Vec<(f64, f64)> {
    let mut grid: Vec<(f64, ProfilePoint)> = Vec::with_capacity(samples.len());
    for s in samples {
        let t = s.xi.ln();
        if grid.last().is_none_or(|(last, _)| t - last >= MIN_LOG_STEP) {
            grid.push((t, *s));
        }
    }
    let mut out = Vec::new();
    for i in 2..grid.len().saturating_sub(2) {
        let (t0, centre) = grid[i];
        let mut vander = SMatrix::<f64, 5, 5>::zeros();
        let mut rhs = SVector::<f64, 5>::zeros();
        for (r, (t, s)) in grid[i - 2..=i + 2].iter().enumerate() {
            let dt = t - t0;
            for c in 0..5 {
                vander[(r, c)] = dt.powi(c as i32);
            }
            rhs[r] = s.f;
        }
        let Some(coef) = vander.lu().solve(&rhs) else { continue };
        let xi = centre.xi;
        let (ft, ftt) = (coef[1], 2.0 * coef[2]);
        let jet = [centre.f, ft / xi, (ftt - ft) / (xi * xi)];
        out.push((xi, ode_residual(params, jet, xi)));
    }
    out
}
