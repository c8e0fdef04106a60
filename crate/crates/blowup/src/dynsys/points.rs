//! Critical points of the main system and of the charts at infinity, with
//! analytic eigen-data.

use serde::{Deserialize, Serialize};

use super::{jacobian, ChartId, PhaseState, YSide};
use crate::error::{domain, Result};
use crate::exponents::ParamTriple;

/// Real parts below this magnitude count as zero when labelling stability.
const ZERO_EIG: f64 = 1e-12;

/// `Z`-coordinate of `P2` (and level of the stationary orbit):
/// `2[p(N−2) − mN]/(p−m)²`.
pub fn stat_z0(pr: &ParamTriple) -> f64 {
    2.0 * (pr.p * (pr.dim - 2.0) - pr.m * pr.dim) / (pr.gap() * pr.gap())
}

/// Discriminant of the characteristic polynomial of `P2` restricted to the
/// plane `X = 0`: negative exactly when `P2` is a saddle-focus.
pub fn discriminant_f(pr: &ParamTriple) -> f64 {
    let (m, n, p) = (pr.m, pr.dim, pr.p);
    let num = (n - 2.0) * (n - 10.0) * p * p - 2.0 * m * (n * n - 8.0 * n + 4.0) * p + m * m * (n - 2.0).powi(2);
    num / (pr.gap() * pr.gap())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointLabel {
    P0,
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    /// Member of the one-parameter family at infinity, with its `γ ∈ (0, 1)`.
    QGamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Saddle,
    SaddleFocus,
    UnstableNode,
    StableNode,
    CenterUnstable,
    Nonhyperbolic,
}

/// Qualitative notes attached to points whose dynamics the classifier does
/// not integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointFlag {
    /// No orbit from the finite part of the phase space enters this point.
    NoIncomingProfiles,
    /// Only the member with `κ = 1` (reached by the constant-profile orbit)
    /// admits connections.
    NoAdmissibleConnections,
}

/// Where a critical point lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    Main(PhaseState),
    Chart { chart: ChartId, coords: [f64; 3] },
    /// Point on the equator of the Poincaré hypersphere `(X̄, Ȳ, Z̄, W)`.
    Sphere([f64; 4]),
}

/// A complex eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eig {
    pub re: f64,
    pub im: f64,
}

impl Eig {
    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointInfo {
    pub label: PointLabel,
    pub location: Location,
    pub eigenvalues: [Eig; 3],
    /// Real eigenvectors, present when all eigenvalues are real and the
    /// linearization is diagonalizable.
    pub eigenvectors: Option<[[f64; 3]; 3]>,
    pub stability: Stability,
    pub flag: Option<PointFlag>,
}

/// Stability label as a pure function of the eigenvalues.
pub fn classify_stability(eigs: &[Eig]) -> Stability {
    let zero = eigs.iter().filter(|e| e.re.abs() < ZERO_EIG).count();
    let pos = eigs.iter().filter(|e| e.re >= ZERO_EIG).count();
    let neg = eigs.iter().filter(|e| e.re <= -ZERO_EIG).count();
    let complex = eigs.iter().any(|e| e.im.abs() > ZERO_EIG);
    if zero > 0 {
        if neg == 0 && pos > 0 {
            Stability::CenterUnstable
        } else {
            Stability::Nonhyperbolic
        }
    } else if neg == 0 {
        Stability::UnstableNode
    } else if pos == 0 {
        Stability::StableNode
    } else if complex {
        Stability::SaddleFocus
    } else {
        Stability::Saddle
    }
}

/// Roots of `λ² − trace·λ + det = 0`.
fn quadratic_eigs(trace: f64, det: f64) -> [Eig; 2] {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Larger root first; avoid cancellation in the smaller one.
        let big = if trace >= 0.0 { 0.5 * (trace + r) } else { 0.5 * (trace - r) };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (a, b) = if big >= small { (big, small) } else { (small, big) };
        [Eig::real(a), Eig::real(b)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Eig { re: 0.5 * trace, im }, Eig { re: 0.5 * trace, im: -im }]
    }
}

/// Null vector of `M − λI` (3×3) from the largest cross product of two rows.
fn null_vector(m: &[Vec<f64>], lambda: f64) -> Option<[f64; 3]> {
    let a: Vec<[f64; 3]> = (0..3)
        .map(|i| {
            let mut r = [m[i][0], m[i][1], m[i][2]];
            r[i] -= lambda;
            r
        })
        .collect();
    let cross = |u: [f64; 3], v: [f64; 3]| {
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    };
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let best = [cross(a[0], a[1]), cross(a[0], a[2]), cross(a[1], a[2])]
        .into_iter()
        .max_by(|u, v| norm(*u).total_cmp(&norm(*v)))?;
    let n = norm(best);
    if n < 1e-13 {
        None
    } else {
        Some(best.map(|c| c / n))
    }
}

/// Eigenvectors for the given real eigenvalues, unless one of them is
/// repeated (then the null space is not one-dimensional).
fn eigenvectors_for(chart: ChartId, pr: &ParamTriple, at: &[f64; 3], eigs: &[Eig; 3]) -> Option<[[f64; 3]; 3]> {
    if eigs.iter().any(|e| e.im != 0.0) {
        return None;
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (eigs[i].re - eigs[j].re).abs() < 1e-9 * (1.0 + eigs[i].re.abs()) {
                return None;
            }
        }
    }
    let m = jacobian(chart, pr, at).ok()?;
    let mut out = [[0.0; 3]; 3];
    for (k, e) in eigs.iter().enumerate() {
        out[k] = null_vector(&m, e.re)?;
    }
    Some(out)
}

fn info(
    label: PointLabel,
    location: Location,
    eigenvalues: [Eig; 3],
    eigenvectors: Option<[[f64; 3]; 3]>,
) -> CriticalPointInfo {
    CriticalPointInfo {
        label,
        location,
        stability: classify_stability(&eigenvalues),
        eigenvalues,
        eigenvectors,
        flag: None,
    }
}

fn p0(pr: &ParamTriple) -> CriticalPointInfo {
    let n = pr.dim;
    let eigs = [Eig::real(2.0), Eig::real(-(n - 2.0)), Eig::real(2.0)];
    let inv = |v: [f64; 3]| {
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.map(|c| c / l)
    };
    let vecs = [inv([n, 1.0, 0.0]), [0.0, 1.0, 0.0], inv([0.0, 1.0, -n])];
    info(PointLabel::P0, Location::Main(PhaseState::new(0.0, 0.0, 0.0)), eigs, Some(vecs))
}

fn p1(pr: &ParamTriple) -> CriticalPointInfo {
    let (m, n, p) = (pr.m, pr.dim, pr.p);
    let at = PhaseState::new(0.0, -(n - 2.0) / m, 0.0);
    let eigs = [
        Eig::real((m * n - n + 2.0) / m),
        Eig::real(n - 2.0),
        Eig::real((m * n - p * (n - 2.0)) / m),
    ];
    let vecs = eigenvectors_for(ChartId::Main, pr, &at.to_array(), &eigs);
    info(PointLabel::P1, Location::Main(at), eigs, vecs)
}

fn p2(pr: &ParamTriple) -> CriticalPointInfo {
    let (m, n, p) = (pr.m, pr.dim, pr.p);
    let k = pr.gap();
    let at = PhaseState::new(0.0, -2.0 / k, stat_z0(pr));
    let a = n - 2.0 - 4.0 * m / k;
    let b = 2.0 * (n - 2.0 - 2.0 * m / k);
    let [l2, l3] = quadratic_eigs(-a, b);
    let eigs = [Eig::real(2.0 * (p - 1.0) / k), l2, l3];
    let vecs = eigenvectors_for(ChartId::Main, pr, &at.to_array(), &eigs);
    info(PointLabel::P2, Location::Main(at), eigs, vecs)
}

fn p3(pr: &ParamTriple) -> CriticalPointInfo {
    let (m, n, p) = (pr.m, pr.dim, pr.p);
    let at = PhaseState::new(
        2.0 * (m * n - n + 2.0) / ((m - 1.0) * (p - 1.0)),
        2.0 / (m - 1.0),
        0.0,
    );
    let trace = -(n * (m - 1.0).powi(2) + 2.0 * (m * p - 1.0)) / ((m - 1.0) * (p - 1.0));
    let det = 2.0 * (m * n - n + 2.0) / (m - 1.0);
    let [l1, l2] = quadratic_eigs(trace, det);
    let eigs = [l1, l2, Eig::real(2.0 * (p - 1.0) / (m - 1.0))];
    let vecs = eigenvectors_for(ChartId::Main, pr, &at.to_array(), &eigs);
    info(PointLabel::P3, Location::Main(at), eigs, vecs)
}

fn q1(pr: &ParamTriple) -> CriticalPointInfo {
    let k = 0.5 * pr.gap();
    let eigs = [Eig::real(0.0), Eig::real(k), Eig::real(0.0)];
    let l = (k * k + 1.0).sqrt();
    // The zero eigenvalue has the two-dimensional eigenspace spanned by
    // (k, −1, 0) and (0, 0, 1).
    let vecs = [[k / l, -1.0 / l, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    info(
        PointLabel::Q1,
        Location::Chart { chart: ChartId::InfX, coords: [0.0, 0.0, 0.0] },
        eigs,
        Some(vecs),
    )
}

fn q5(pr: &ParamTriple) -> CriticalPointInfo {
    let (m, p) = (pr.m, pr.p);
    let k = 0.5 * pr.gap();
    let at = [0.0, k, 0.0];
    let eigs = [Eig::real((m - 1.0) * k), Eig::real(-k), Eig::real((p - 1.0) * k)];
    let vecs = eigenvectors_for(ChartId::InfX, pr, &at, &eigs);
    info(PointLabel::Q5, Location::Chart { chart: ChartId::InfX, coords: at }, eigs, vecs)
}

fn q23(pr: &ParamTriple, side: YSide) -> CriticalPointInfo {
    let s = match side {
        YSide::Negative => -1.0,
        YSide::Positive => 1.0,
    };
    let eigs = [Eig::real(s), Eig::real(s * pr.p), Eig::real(s * pr.m)];
    // Diagonal linearization; p > m > 1 keeps the eigenvalues distinct.
    let vecs = Some([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let label = match side {
        YSide::Negative => PointLabel::Q3,
        YSide::Positive => PointLabel::Q2,
    };
    info(label, Location::Chart { chart: ChartId::InfY(side), coords: [0.0; 3] }, eigs, vecs)
}

fn q4() -> CriticalPointInfo {
    let mut q = info(
        PointLabel::Q4,
        Location::Sphere([0.0, 0.0, 1.0, 0.0]),
        [Eig::real(0.0); 3],
        None,
    );
    q.flag = Some(PointFlag::NoIncomingProfiles);
    q
}

/// The point `Q_γ = (0, 0, κ)` of the `X`-chart, `κ = √(1−γ²)/γ`.
pub fn q_gamma(pr: &ParamTriple, gamma: f64) -> Result<CriticalPointInfo> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma = {gamma} must lie in (0, 1)"));
    }
    let kappa = (1.0 - gamma * gamma).sqrt() / gamma;
    let eigs = [Eig::real(0.0), Eig::real(0.5 * pr.gap()), Eig::real(0.0)];
    let mut q = info(
        PointLabel::QGamma(gamma),
        Location::Chart { chart: ChartId::InfX, coords: [0.0, 0.0, kappa] },
        eigs,
        None,
    );
    if (kappa - 1.0).abs() > 1e-12 {
        q.flag = Some(PointFlag::NoAdmissibleConnections);
    }
    Ok(q)
}

/// All critical points: `P0`–`P3` in the main chart and `Q1`–`Q5` plus the
/// admissible member `γ = √2/2` of the `Q_γ` family at infinity.
pub fn critical_points(params: &ParamTriple) -> Result<Vec<CriticalPointInfo>> {
    params.require_supercritical()?;
    let pr = params;
    Ok(vec![
        p0(pr),
        p1(pr),
        p2(pr),
        p3(pr),
        q1(pr),
        q23(pr, YSide::Positive),
        q23(pr, YSide::Negative),
        q4(),
        q5(pr),
        q_gamma(pr, std::f64::consts::FRAC_1_SQRT_2)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supra_lepin() -> ParamTriple {
        ParamTriple::new(2.0, 20.0, 10.0).unwrap()
    }

    fn find(pts: &[CriticalPointInfo], label: PointLabel) -> &CriticalPointInfo {
        pts.iter().find(|c| c.label == label).unwrap()
    }

    #[test]
    fn locations_supra_lepin() {
        let pts = critical_points(&supra_lepin()).unwrap();
        let at = |l| match find(&pts, l).location {
            Location::Main(s) => s,
            _ => panic!(),
        };
        assert_eq!(at(PointLabel::P1), PhaseState::new(0.0, -9.0, 0.0));
        let p2 = at(PointLabel::P2);
        assert!((p2.y + 0.25).abs() < 1e-15 && (p2.z - 4.375).abs() < 1e-14);
        let p3 = at(PointLabel::P3);
        assert!((p3.x - 44.0 / 9.0).abs() < 1e-14 && (p3.y - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_supra_lepin() {
        let pts = critical_points(&supra_lepin()).unwrap();
        let re = |l| find(&pts, l).eigenvalues.map(|e| e.re);
        assert_eq!(re(PointLabel::P1), [11.0, 18.0, -70.0]);
        assert_eq!(re(PointLabel::P0), [2.0, -18.0, 2.0]);
        let p2 = re(PointLabel::P2);
        assert!((p2[0] - 2.25).abs() < 1e-14);
        assert!((p2[1] - (-17.0 + 149f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((p2[2] - (-17.0 - 149f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(find(&pts, PointLabel::P2).stability, Stability::Saddle);
        assert_eq!(find(&pts, PointLabel::Q3).stability, Stability::StableNode);
        assert_eq!(find(&pts, PointLabel::Q2).stability, Stability::UnstableNode);
        assert_eq!(find(&pts, PointLabel::Q1).stability, Stability::CenterUnstable);
        assert_eq!(find(&pts, PointLabel::Q5).stability, Stability::Saddle);
        assert_eq!(find(&pts, PointLabel::Q4).flag, Some(PointFlag::NoIncomingProfiles));
    }

    #[test]
    fn p0_eigenvectors_match_closed_form() {
        let pts = critical_points(&supra_lepin()).unwrap();
        let v = find(&pts, PointLabel::P0).eigenvectors.unwrap();
        let l = (401f64).sqrt();
        assert!((v[0][0] - 20.0 / l).abs() < 1e-15 && (v[0][1] - 1.0 / l).abs() < 1e-15);
        assert_eq!(v[1], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn discriminant_supra_lepin() {
        assert!((discriminant_f(&supra_lepin()) - 149.0).abs() < 1e-12);
        assert!((stat_z0(&supra_lepin()) - 4.375).abs() < 1e-15);
    }

    #[test]
    fn subcritical_rejected() {
        let pr = ParamTriple::new(2.0, 20.0, 2.3).unwrap();
        assert!(critical_points(&pr).is_err());
    }

    #[test]
    fn q_gamma_flags() {
        let pr = supra_lepin();
        assert!(q_gamma(&pr, 0.5).unwrap().flag.is_some());
        assert!(q_gamma(&pr, std::f64::consts::FRAC_1_SQRT_2).unwrap().flag.is_none());
        assert!(q_gamma(&pr, 1.0).is_err());
    }

    #[test]
    fn stability_labels() {
        let r = Eig::real;
        assert_eq!(classify_stability(&[r(1.0), r(2.0), r(3.0)]), Stability::UnstableNode);
        assert_eq!(classify_stability(&[r(-1.0), r(-2.0), r(-3.0)]), Stability::StableNode);
        assert_eq!(classify_stability(&[r(1.0), r(-2.0), r(-3.0)]), Stability::Saddle);
        let c = [r(1.0), Eig { re: -1.0, im: 2.0 }, Eig { re: -1.0, im: -2.0 }];
        assert_eq!(classify_stability(&c), Stability::SaddleFocus);
        assert_eq!(classify_stability(&[r(0.0), r(-1.0), r(1.0)]), Stability::Nonhyperbolic);
    }
}
