//! The autonomous phase system of the profile equation, its charts at
//! infinity and on the invariant planes, critical points with analytic
//! linearizations, exact invariant orbits and the sign checks behind the
//! invariant-region arguments.
//!
//! Main chart coordinates, with `η = ln ξ`:
//!
//! ```text
//! X = ξ² f^{1−m} / (m(p−1)),   Y = ξ f'/f,   Z = ξ² f^{p−m} / m
//! Ẋ = X(2 − (m−1)Y)
//! Ẏ = X − (N−2)Y − Z − mY² + (p−m)/2 · XY
//! Ż = Z(2 + (p−m)Y)
//! ```

mod checks;
mod points;

pub use checks::{
    curve_flow_sign, cylinder_flow_sign, dulac_divergence, exact_orbit_state, plane_crossing_sign,
    region_sign_checks, ExactOrbit, SignSample,
};
pub use points::{
    classify_stability, critical_points, discriminant_f, q_gamma, stat_z0, CriticalPointInfo, Location,
    PointFlag, PointLabel, Stability,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::ParamTriple;
use crate::odeint::VectorField;

/// A point of the main phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Z")]
    pub z: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { x: a[0], y: a[1], z: a[2] }
    }
}

/// Which side of infinity the `Y`-projected chart describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YSide {
    /// `Y → −∞`, the stable node `Q3`; the printed right-hand side is used
    /// as is, with time `τ` satisfying `dτ/dη = |Y|`.
    Negative,
    /// `Y → +∞`, the unstable node `Q2`; the printed right-hand side is
    /// negated, with time `η₂` satisfying `dη₂/dη = Y`.
    Positive,
}

/// The charts on which vector fields are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartId {
    /// `(X, Y, Z)` with time `η = ln ξ`.
    Main,
    /// `(x, y, z) = (1/X, Y/X, Z/X)` with time `η₁`, `dη₁/dη = X`.
    InfX,
    /// `(x, z, w) = (X/Y, Z/Y, 1/Y)` with time `η₂`, `dη₂/dη = Y`.
    InfY(YSide),
    /// The invariant plane `X = 0`, coordinates `(Y, Z)`.
    PlaneX0,
    /// The invariant plane `x = 0` of [`ChartId::InfX`] after `w = xz`,
    /// coordinates `(y, w)`.
    PlaneW0,
}

impl ChartId {
    pub fn dimension(&self) -> usize {
        match self {
            ChartId::PlaneX0 | ChartId::PlaneW0 => 2,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChartId::Main => "main",
            ChartId::InfX => "inf-x",
            ChartId::InfY(YSide::Negative) => "inf-y-negative",
            ChartId::InfY(YSide::Positive) => "inf-y-positive",
            ChartId::PlaneX0 => "plane-x0",
            ChartId::PlaneW0 => "plane-w0",
        }
    }
}

pub fn main_field(pr: &ParamTriple, s: &[f64; 3]) -> [f64; 3] {
    let (m, n, k) = (pr.m, pr.dim, pr.gap());
    let [x, y, z] = *s;
    [
        x * (2.0 - (m - 1.0) * y),
        // Factored so that the stationary orbit Y = −2/(p−m) stays exactly
        // invariant: off it, errors in Y grow like exp(∫(p−m)X/2).
        x * (1.0 + 0.5 * k * y) - (n - 2.0) * y - z - m * y * y,
        z * (2.0 + k * y),
    ]
}

pub fn inf_x_field(pr: &ParamTriple, s: &[f64; 3]) -> [f64; 3] {
    let (m, n, p, k) = (pr.m, pr.dim, pr.p, pr.gap());
    let [x, y, z] = *s;
    [
        x * ((m - 1.0) * y - 2.0 * x),
        -y * y + 0.5 * k * y + x - n * x * y - x * z,
        (p - 1.0) * y * z,
    ]
}

/// The printed right-hand side of the `Y`-projected chart, before the side
/// sign is applied.
fn inf_y_printed(pr: &ParamTriple, s: &[f64; 3]) -> [f64; 3] {
    let (m, n, p, k) = (pr.m, pr.dim, pr.p, pr.gap());
    let [x, z, w] = *s;
    [
        -x - n * x * w + 0.5 * k * x * x + x * x * w - x * z * w,
        -p * z - n * z * w + 0.5 * k * x * z + x * z * w - z * z * w,
        -m * w - (n - 2.0) * w * w + 0.5 * k * x * w + x * w * w - z * w * w,
    ]
}

pub fn inf_y_field(pr: &ParamTriple, side: YSide, s: &[f64; 3]) -> [f64; 3] {
    let g = inf_y_printed(pr, s);
    match side {
        YSide::Negative => g,
        YSide::Positive => [-g[0], -g[1], -g[2]],
    }
}

pub fn plane_x0_field(pr: &ParamTriple, s: &[f64; 2]) -> [f64; 2] {
    let (m, n, k) = (pr.m, pr.dim, pr.gap());
    let [y, z] = *s;
    [-(n - 2.0) * y - z - m * y * y, z * (2.0 + k * y)]
}

pub fn plane_w0_field(pr: &ParamTriple, s: &[f64; 2]) -> [f64; 2] {
    let (m, p, k) = (pr.m, pr.p, pr.gap());
    let [y, w] = *s;
    [-y * y + 0.5 * k * y - w, (m + p - 2.0) * y * w]
}

fn main_jacobian(pr: &ParamTriple, s: &[f64; 3]) -> [[f64; 3]; 3] {
    let (m, n, k) = (pr.m, pr.dim, pr.gap());
    let [x, y, z] = *s;
    [
        [2.0 - (m - 1.0) * y, -(m - 1.0) * x, 0.0],
        [1.0 + 0.5 * k * y, -(n - 2.0) - 2.0 * m * y + 0.5 * k * x, -1.0],
        [0.0, k * z, 2.0 + k * y],
    ]
}

fn inf_x_jacobian(pr: &ParamTriple, s: &[f64; 3]) -> [[f64; 3]; 3] {
    let (m, n, p, k) = (pr.m, pr.dim, pr.p, pr.gap());
    let [x, y, z] = *s;
    [
        [(m - 1.0) * y - 4.0 * x, (m - 1.0) * x, 0.0],
        [1.0 - n * y - z, -2.0 * y + 0.5 * k - n * x, -x],
        [0.0, (p - 1.0) * z, (p - 1.0) * y],
    ]
}

fn inf_y_jacobian(pr: &ParamTriple, side: YSide, s: &[f64; 3]) -> [[f64; 3]; 3] {
    let (m, n, p, k) = (pr.m, pr.dim, pr.p, pr.gap());
    let [x, z, w] = *s;
    let j = [
        [
            -1.0 - n * w + k * x + 2.0 * x * w - z * w,
            -x * w,
            -n * x + x * x - x * z,
        ],
        [
            0.5 * k * z + z * w,
            -p - n * w + 0.5 * k * x + x * w - 2.0 * z * w,
            -n * z + x * z - z * z,
        ],
        [
            0.5 * k * w + w * w,
            -w * w,
            -m - 2.0 * (n - 2.0) * w + 0.5 * k * x + 2.0 * x * w - 2.0 * z * w,
        ],
    ];
    match side {
        YSide::Negative => j,
        YSide::Positive => j.map(|row| row.map(|v| -v)),
    }
}

fn plane_x0_jacobian(pr: &ParamTriple, s: &[f64; 2]) -> [[f64; 2]; 2] {
    let (m, n, k) = (pr.m, pr.dim, pr.gap());
    let [y, z] = *s;
    [[-(n - 2.0) - 2.0 * m * y, -1.0], [k * z, 2.0 + k * y]]
}

fn plane_w0_jacobian(pr: &ParamTriple, s: &[f64; 2]) -> [[f64; 2]; 2] {
    let (m, p, k) = (pr.m, pr.p, pr.gap());
    let [y, w] = *s;
    let r = m + p - 2.0;
    [[-2.0 * y + 0.5 * k, -1.0], [r * w, r * y]]
}

/// Checks that `state` lies in the chart's admissible region.
pub fn check_admissible(chart: ChartId, state: &[f64]) -> Result<()> {
    if state.len() != chart.dimension() {
        return domain(format!(
            "chart {} expects {} coordinates, got {}",
            chart.name(),
            chart.dimension(),
            state.len()
        ));
    }
    if state.iter().any(|v| !v.is_finite()) {
        return domain(format!("non-finite state {state:?}"));
    }
    let ok = match chart {
        ChartId::Main => state[0] >= 0.0 && state[2] >= 0.0,
        ChartId::InfX => state[0] >= 0.0 && state[2] >= 0.0,
        ChartId::InfY(YSide::Negative) => state.iter().all(|&v| v <= 0.0),
        ChartId::InfY(YSide::Positive) => state.iter().all(|&v| v >= 0.0),
        ChartId::PlaneX0 => state[1] >= 0.0,
        ChartId::PlaneW0 => state[1] >= 0.0,
    };
    if ok {
        Ok(())
    } else {
        domain(format!("state {state:?} outside the admissible region of chart {}", chart.name()))
    }
}

/// Right-hand side of the chart's system at `state`.
pub fn vector_field(chart: ChartId, params: &ParamTriple, state: &[f64]) -> Result<Vec<f64>> {
    check_admissible(chart, state)?;
    Ok(match chart {
        ChartId::Main => main_field(params, &[state[0], state[1], state[2]]).to_vec(),
        ChartId::InfX => inf_x_field(params, &[state[0], state[1], state[2]]).to_vec(),
        ChartId::InfY(side) => inf_y_field(params, side, &[state[0], state[1], state[2]]).to_vec(),
        ChartId::PlaneX0 => plane_x0_field(params, &[state[0], state[1]]).to_vec(),
        ChartId::PlaneW0 => plane_w0_field(params, &[state[0], state[1]]).to_vec(),
    })
}

/// Analytic Jacobian of the chart's system at `state`, as row vectors.
pub fn jacobian(chart: ChartId, params: &ParamTriple, state: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_admissible(chart, state)?;
    let rows3 = |j: [[f64; 3]; 3]| j.iter().map(|r| r.to_vec()).collect();
    let rows2 = |j: [[f64; 2]; 2]| j.iter().map(|r| r.to_vec()).collect();
    Ok(match chart {
        ChartId::Main => rows3(main_jacobian(params, &[state[0], state[1], state[2]])),
        ChartId::InfX => rows3(inf_x_jacobian(params, &[state[0], state[1], state[2]])),
        ChartId::InfY(side) => rows3(inf_y_jacobian(params, side, &[state[0], state[1], state[2]])),
        ChartId::PlaneX0 => rows2(plane_x0_jacobian(params, &[state[0], state[1]])),
        ChartId::PlaneW0 => rows2(plane_w0_jacobian(params, &[state[0], state[1]])),
    })
}

/// Three-dimensional chart field usable by the integrator.
#[derive(Debug, Clone, Copy)]
pub struct Field3 {
    pub chart: ChartId,
    pub params: ParamTriple,
}

impl Field3 {
    /// Errors for the two-dimensional plane charts.
    pub fn new(chart: ChartId, params: ParamTriple) -> Result<Self> {
        if chart.dimension() != 3 {
            return domain(format!("chart {} is two-dimensional", chart.name()));
        }
        Ok(Self { chart, params })
    }

    pub fn main(params: ParamTriple) -> Self {
        Self { chart: ChartId::Main, params }
    }
}

impl VectorField<3> for Field3 {
    fn eval(&self, _t: f64, s: &[f64; 3]) -> [f64; 3] {
        match self.chart {
            ChartId::Main => main_field(&self.params, s),
            ChartId::InfX => inf_x_field(&self.params, s),
            ChartId::InfY(side) => inf_y_field(&self.params, side, s),
            ChartId::PlaneX0 | ChartId::PlaneW0 => unreachable!("Field3::new rejects planar charts"),
        }
    }
}

/// Two-dimensional invariant-plane field usable by the integrator.
#[derive(Debug, Clone, Copy)]
pub struct Field2 {
    pub chart: ChartId,
    pub params: ParamTriple,
}

impl Field2 {
    pub fn new(chart: ChartId, params: ParamTriple) -> Result<Self> {
        if chart.dimension() != 2 {
            return domain(format!("chart {} is three-dimensional", chart.name()));
        }
        Ok(Self { chart, params })
    }
}

impl VectorField<2> for Field2 {
    fn eval(&self, _t: f64, s: &[f64; 2]) -> [f64; 2] {
        match self.chart {
            ChartId::PlaneX0 => plane_x0_field(&self.params, s),
            ChartId::PlaneW0 => plane_w0_field(&self.params, s),
            _ => unreachable!("Field2::new rejects spatial charts"),
        }
    }
}

/// Projection of a main-chart state with `X > 0` into the `X`-chart.
pub fn to_inf_x(s: &PhaseState) -> [f64; 3] {
    [1.0 / s.x, s.y / s.x, s.z / s.x]
}

pub fn from_inf_x(c: &[f64; 3]) -> PhaseState {
    PhaseState::new(1.0 / c[0], c[1] / c[0], c[2] / c[0])
}

/// Projection of a main-chart state with `Y ≠ 0` into the `Y`-chart.
pub fn to_inf_y(s: &PhaseState) -> [f64; 3] {
    [s.x / s.y, s.z / s.y, 1.0 / s.y]
}

pub fn from_inf_y(c: &[f64; 3]) -> PhaseState {
    PhaseState::new(c[0] / c[2], 1.0 / c[2], c[1] / c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supra_lepin() -> ParamTriple {
        ParamTriple::new(2.0, 20.0, 10.0).unwrap()
    }

    #[test]
    fn main_field_examples() {
        let pr = supra_lepin();
        let v = vector_field(ChartId::Main, &pr, &[0.0, -0.25, 4.375]).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-14));
        let v = vector_field(ChartId::Main, &pr, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(v, vec![2.0, 0.0, 2.0]);
    }

    #[test]
    fn q5_is_critical_in_inf_x() {
        let pr = supra_lepin();
        let v = vector_field(ChartId::InfX, &pr, &[0.0, 0.5 * pr.gap(), 0.0]).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn inadmissible_states_rejected() {
        let pr = supra_lepin();
        assert!(vector_field(ChartId::Main, &pr, &[-1.0, 0.0, 1.0]).is_err());
        assert!(vector_field(ChartId::Main, &pr, &[1.0, 0.0]).is_err());
        assert!(vector_field(ChartId::InfY(YSide::Negative), &pr, &[0.1, -0.1, -0.1]).is_err());
        assert!(jacobian(ChartId::PlaneX0, &pr, &[0.0, -1.0]).is_err());
        assert!(Field3::new(ChartId::PlaneW0, pr).is_err());
        assert!(Field2::new(ChartId::Main, pr).is_err());
    }

    #[test]
    fn inf_x_matches_pushed_forward_main_tangent() {
        let pr = supra_lepin();
        let s = PhaseState::new(2.5, -0.7, 3.1);
        let t = main_field(&pr, &s.to_array());
        let c = to_inf_x(&s);
        // d/dη₁ = (1/X) d/dη.
        let dx = -t[0] / (s.x * s.x);
        let dy = (t[1] * s.x - s.y * t[0]) / (s.x * s.x);
        let dz = (t[2] * s.x - s.z * t[0]) / (s.x * s.x);
        let pushed = [dx / s.x, dy / s.x, dz / s.x];
        let direct = inf_x_field(&pr, &c);
        for i in 0..3 {
            assert!((pushed[i] - direct[i]).abs() < 1e-12, "{i}: {pushed:?} vs {direct:?}");
        }
    }

    #[test]
    fn inf_y_sign_convention_matches_main_tangent() {
        let pr = supra_lepin();
        for (s, side) in [
            (PhaseState::new(2.0, -3.0, 1.5), YSide::Negative),
            (PhaseState::new(2.0, 4.0, 1.5), YSide::Positive),
        ] {
            let t = main_field(&pr, &s.to_array());
            let c = to_inf_y(&s);
            let y2 = s.y * s.y;
            let d = [
                (t[0] * s.y - s.x * t[1]) / y2,
                (t[2] * s.y - s.z * t[1]) / y2,
                -t[1] / y2,
            ];
            // Chart time runs at rate |Y| relative to η.
            let pushed = d.map(|v| v / s.y.abs());
            let direct = inf_y_field(&pr, side, &c);
            for i in 0..3 {
                assert!((pushed[i] - direct[i]).abs() < 1e-12, "{side:?} {i}: {pushed:?} vs {direct:?}");
            }
        }
    }

    #[test]
    fn round_trip_projections() {
        let s = PhaseState::new(3.0, -2.0, 0.5);
        let back = from_inf_x(&to_inf_x(&s));
        let back2 = from_inf_y(&to_inf_y(&s));
        for (a, b) in [(back, s), (back2, s)] {
            assert!((a.x - b.x).abs() < 1e-14 && (a.y - b.y).abs() < 1e-14 && (a.z - b.z).abs() < 1e-14);
        }
    }
}
