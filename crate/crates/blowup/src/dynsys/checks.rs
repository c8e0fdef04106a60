//! Exact invariant orbits and the signed quantities used by the
//! invariant-region arguments (flow across curves and surfaces, Dulac
//! divergence).

use serde::{Deserialize, Serialize};

use super::{points::stat_z0, PhaseState};
use crate::error::{domain, Result};
use crate::exponents::ParamTriple;

/// Maximal relative distance of a sample from the manifold it is claimed
/// to lie on.
const ON_MANIFOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactOrbit {
    /// `X = Z = e^{2η}`, `Y = 0`: the constant profile.
    ConstOrbit,
    /// `Y = −2/(p−m)`, `Z = Z₀`, `X = e^{2(p−1)η/(p−m)}`: the singular
    /// stationary profile.
    StatOrbit,
}

/// State on an exact orbit at time `η`, normalised so that `X(0) = 1`.
pub fn exact_orbit_state(which: ExactOrbit, params: &ParamTriple, eta: f64) -> Result<PhaseState> {
    match which {
        ExactOrbit::ConstOrbit => {
            let x = (2.0 * eta).exp();
            Ok(PhaseState::new(x, 0.0, x))
        }
        ExactOrbit::StatOrbit => {
            params.require_supercritical()?;
            let rate = 2.0 * (params.p - 1.0) / params.gap();
            Ok(PhaseState::new((rate * eta).exp(), params.stat_level(), stat_z0(params)))
        }
    }
}

fn off_manifold(actual: f64, expected: f64) -> bool {
    (actual - expected).abs() > ON_MANIFOLD_TOL * expected.abs().max(1.0)
}

/// Flow of the `X = 0` plane system across the curve
/// `N/(N−2)·Y(mY + N − 2) + Z = 0`, i.e.
/// `H(Y) = N(p_s − p)/(N − 2) · Y²(mY + N − 2)`.
pub fn curve_flow_sign(params: &ParamTriple, y: f64, z: f64) -> Result<f64> {
    let (m, n, p) = (params.m, params.dim, params.p);
    let on_curve = -n / (n - 2.0) * y * (m * y + n - 2.0);
    if off_manifold(z, on_curve) {
        return domain(format!("({y}, {z}) is not on the curve Z = {on_curve}"));
    }
    let ps = m * (n + 2.0) / (n - 2.0);
    Ok(n * (ps - p) / (n - 2.0) * y * y * (m * y + n - 2.0))
}

/// Divergence of `Z^a` times the `X = 0` plane field with
/// `a = (3m − p)/(p − m)`: `h(Z) = (4m/(p−m) − N + 2) Z^a`.
pub fn dulac_divergence(params: &ParamTriple, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("Dulac function needs Z > 0, got {z}"));
    }
    let (m, n, p) = (params.m, params.dim, params.p);
    let k = params.gap();
    let a = (3.0 * m - p) / k;
    Ok((4.0 * m / k - n + 2.0) * z.powf(a))
}

/// Flow of the main system across the surface `Z = −(N−2)Y − mY²`, with
/// normal `(0, N − 2 + 2mY, 1)`:
/// `H(X, Y) = ½(2 + (p−m)Y)[X(2mY + N − 2) − 2Y(mY + N − 2)]`.
pub fn cylinder_flow_sign(params: &ParamTriple, state: &PhaseState) -> Result<f64> {
    let (m, n) = (params.m, params.dim);
    let (x, y) = (state.x, state.y);
    let on_surface = -(n - 2.0) * y - m * y * y;
    if off_manifold(state.z, on_surface) {
        return domain(format!("{state:?} is not on the surface Z = {on_surface}"));
    }
    Ok(0.5 * (2.0 + params.gap() * y) * (x * (2.0 * m * y + n - 2.0) - 2.0 * y * (m * y + n - 2.0)))
}

/// `Ẏ` on the plane `Y = −(N−2)/m`: `E(X, Z) = (mN − p(N−2))/(2m)·X − Z`.
pub fn plane_crossing_sign(params: &ParamTriple, x: f64, z: f64) -> f64 {
    let (m, n, p) = (params.m, params.dim, params.p);
    (m * n - p * (n - 2.0)) / (2.0 * m) * x - z
}

/// A sample fed to [`region_sign_checks`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignSample {
    /// A point `(Y, Z)` of the curve in the plane `X = 0`.
    Curve { y: f64, z: f64 },
    /// A point of the plane `X = 0` with `Z > 0`.
    Dulac { z: f64 },
    /// A point of the parabolic cylinder.
    Cylinder(PhaseState),
    /// A point `(X, Z)` of the plane `Y = −(N−2)/m`.
    Crossing { x: f64, z: f64 },
}

/// Raw signed value for the given sample. Expected signs for `p > p_s`:
/// curve `< 0`, Dulac `< 0`, cylinder `≥ 0` on `−2/(p−m) ≤ Y ≤ 0`,
/// crossing `< 0`.
pub fn region_sign_checks(params: &ParamTriple, sample: &SignSample) -> Result<f64> {
    match sample {
        SignSample::Curve { y, z } => {
            params.require_supercritical()?;
            curve_flow_sign(params, *y, *z)
        }
        SignSample::Dulac { z } => dulac_divergence(params, *z),
        SignSample::Cylinder(s) => {
            params.require_supercritical()?;
            cylinder_flow_sign(params, s)
        }
        SignSample::Crossing { x, z } => {
            params.require_supercritical()?;
            Ok(plane_crossing_sign(params, *x, *z))
        }
    }
}
