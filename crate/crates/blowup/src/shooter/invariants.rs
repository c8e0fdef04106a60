//! Checks of the invariant-region properties along computed trajectories.

use serde::{Deserialize, Serialize};

use crate::dynsys::{main_field, stat_z0, PhaseState};
use crate::exponents::ParamTriple;

/// Tolerance of the three-point extremum stencil.
const STENCIL_TOL: f64 = 1e-9;
/// Slack of the cylinder lower bound.
const CYLINDER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InvariantViolation {
    /// Local maximum of `Y` with `X ≥ 2(N−2)/(p−1)` and `−2/(p−m) < Y < 0`.
    MaxInNoMaxRegion { eta: f64, state: PhaseState },
    /// Local minimum of `Y` with `X ≥ 2(N−2)/(p−1)` and `Y < −2/(p−m)`.
    MinInNoMinRegion { eta: f64, state: PhaseState },
    /// After dropping below `Y = −(N−2)/m` the orbit must have
    /// `Ẋ > 0`, `Ẏ < 0`, `Ż < 0`.
    NonMonotoneEscape { eta: f64, state: PhaseState },
    /// `Z < −(N−2)Y − mY²` before the first drop below `−2/(p−m)`.
    BelowCylinder { eta: f64, state: PhaseState },
}

/// Scans samples with a three-point stencil for extrema of `Y` in the
/// regions where none can occur.
pub fn check_no_extremum_regions(params: &ParamTriple, points: &[(f64, PhaseState)]) -> Vec<InvariantViolation> {
    let x_min = 2.0 * (params.dim - 2.0) / (params.p - 1.0);
    let stat = params.stat_level();
    let mut out = Vec::new();
    for w in points.windows(3) {
        let (a, (eta, b), c) = (w[0].1, w[1], w[2].1);
        if b.x < x_min {
            continue;
        }
        let is_max = b.y - a.y.max(c.y) > STENCIL_TOL;
        let is_min = a.y.min(c.y) - b.y > STENCIL_TOL;
        if is_max && b.y > stat && b.y < 0.0 {
            out.push(InvariantViolation::MaxInNoMaxRegion { eta, state: b });
        }
        if is_min && b.y < stat {
            out.push(InvariantViolation::MinInNoMinRegion { eta, state: b });
        }
    }
    out
}

/// Once `Y < −(N−2)/m`, `X` increases while `Y` and `Z` decrease.
pub fn check_monotone_escape(params: &ParamTriple, points: &[(f64, PhaseState)]) -> Vec<InvariantViolation> {
    let escape = params.escape_level();
    let Some(start) = points.iter().position(|(_, s)| s.y < escape) else {
        return Vec::new();
    };
    points[start..]
        .iter()
        .filter(|(_, s)| {
            let d = main_field(params, &s.to_array());
            !(d[0] > 0.0 && d[1] < 0.0 && d[2] < 0.0)
        })
        .map(|&(eta, state)| InvariantViolation::NonMonotoneEscape { eta, state })
        .collect()
}

/// For launches with `C ≥ 1`: `Z ≥ −(N−2)Y − mY²` on `−2/(p−m) ≤ Y ≤ 0`
/// until the first drop below `Y = −2/(p−m)`.
pub fn check_cylinder_bound(params: &ParamTriple, points: &[(f64, PhaseState)]) -> Vec<InvariantViolation> {
    let (m, n) = (params.m, params.dim);
    let stat = params.stat_level();
    points
        .iter()
        .take_while(|(_, s)| s.y >= stat)
        .filter(|(_, s)| s.y <= 0.0 && s.z < -(n - 2.0) * s.y - m * s.y * s.y - CYLINDER_TOL)
        .map(|&(eta, state)| InvariantViolation::BelowCylinder { eta, state })
        .collect()
}

/// Residual of the quadratic center-manifold approximation at `Q1`, in the
/// `X`-chart coordinates `x = 1/X, y = Y/X, z = Z/X`:
/// `(p−m)/2·y + x − (x·z − Z₀x²)`.
pub fn center_manifold_residual(params: &ParamTriple, state: &PhaseState) -> f64 {
    let (x, y, z) = (1.0 / state.x, state.y / state.x, state.z / state.x);
    params.gap() / 2.0 * y + x - (x * z - stat_z0(params) * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{exact_orbit_state, ExactOrbit};

    fn supra_lepin() -> ParamTriple {
        ParamTriple::new(2.0, 20.0, 10.0).unwrap()
    }

    #[test]
    fn stencil_flags_forbidden_max() {
        let pr = supra_lepin();
        let pts = vec![
            (0.0, PhaseState::new(10.0, -0.2, 1.0)),
            (1.0, PhaseState::new(11.0, -0.1, 1.0)),
            (2.0, PhaseState::new(12.0, -0.2, 1.0)),
        ];
        let v = check_no_extremum_regions(&pr, &pts);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], InvariantViolation::MaxInNoMaxRegion { .. }));
        // The same shape at small X is allowed.
        let low: Vec<_> = pts.iter().map(|&(e, s)| (e, PhaseState::new(1.0, s.y, s.z))).collect();
        assert!(check_no_extremum_regions(&pr, &low).is_empty());
    }

    #[test]
    fn cylinder_stops_at_first_drop() {
        let pr = supra_lepin();
        let pts = vec![
            (0.0, PhaseState::new(1.0, -0.1, 5.0)),
            (1.0, PhaseState::new(1.0, -0.3, 0.0)),
            (2.0, PhaseState::new(1.0, -0.1, 0.0)),
        ];
        assert!(check_cylinder_bound(&pr, &pts).is_empty());
        let bad = vec![(0.0, PhaseState::new(1.0, -0.1, 0.1))];
        assert_eq!(check_cylinder_bound(&pr, &bad).len(), 1);
    }

    #[test]
    fn stat_orbit_is_on_center_manifold_quadratic() {
        let pr = supra_lepin();
        for eta in [0.0, 1.0, 3.0] {
            let s = exact_orbit_state(ExactOrbit::StatOrbit, &pr, eta).unwrap();
            assert!(center_manifold_residual(&pr, &s).abs() < 1e-12);
        }
    }
}
