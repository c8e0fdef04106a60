//! Critical exponents of `u_t = Δu^m + u^p`, regime classification and the
//! dimension bound that guarantees several distinct self-similar profiles.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Relative tolerance used to detect that `p` sits exactly on a critical
/// exponent.
const EQUALITY_RTOL: f64 = 1e-12;

/// Problem parameters: diffusion exponent `m`, space dimension `N` (a real
/// number so the curves can be explored continuously) and reaction exponent
/// `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTriple {
    pub m: f64,
    #[serde(rename = "N")]
    pub dim: f64,
    pub p: f64,
}

impl ParamTriple {
    /// Validates `m > 1`, `N ≥ 3` and `p > m`.
    pub fn new(m: f64, dim: f64, p: f64) -> Result<Self> {
        check_m_dim(m, dim)?;
        if !p.is_finite() || p <= m {
            return domain(format!("reaction exponent p = {p} must exceed m = {m}"));
        }
        Ok(Self { m, dim, p })
    }

    /// `p − m`, positive by construction.
    pub fn gap(&self) -> f64 {
        self.p - self.m
    }

    /// Self-similar scaling exponent `(p − m) / (2(p − 1))`.
    pub fn beta(&self) -> f64 {
        (self.p - self.m) / (2.0 * (self.p - 1.0))
    }

    /// `Y`-level of the singular stationary orbit, `−2/(p − m)`.
    pub fn stat_level(&self) -> f64 {
        -2.0 / self.gap()
    }

    /// `Y`-level `−(N − 2)/m` below which orbits escape to the stable node.
    pub fn escape_level(&self) -> f64 {
        -(self.dim - 2.0) / self.m
    }

    pub fn exponents(&self) -> ExponentTable {
        table_unchecked(self.m, self.dim)
    }

    /// Errors unless `p > p_s` (needed by the stability taxonomy and by
    /// everything that uses the singular stationary solution).
    pub fn require_supercritical(&self) -> Result<()> {
        let ps = sobolev(self.m, self.dim);
        if self.p > ps && !approx_eq(self.p, ps) {
            Ok(())
        } else {
            domain(format!("requires p > p_s = {ps}, got p = {}", self.p))
        }
    }
}

fn check_m_dim(m: f64, dim: f64) -> Result<()> {
    if !m.is_finite() || m <= 1.0 {
        return domain(format!("diffusion exponent m = {m} must exceed 1"));
    }
    if !dim.is_finite() || dim < 3.0 {
        return domain(format!("dimension N = {dim} must be at least 3"));
    }
    Ok(())
}

/// A real number or `+∞`, ordered with `+∞` above every finite value.
/// Serialises as a number, or as the string `"inf"` for the infinite branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(ExtReal::PosInf),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

impl ExtReal {
    pub const INF: ExtReal = ExtReal::PosInf;

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Value as an `f64`, mapping `+∞` to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PosInf => None,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

/// The four critical exponents for a given `(m, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    /// Fujita exponent `m + 2/N`.
    pub fujita: f64,
    /// Sobolev exponent `m(N + 2)/(N − 2)`.
    pub sobolev: ExtReal,
    /// Joseph–Lundgren exponent (finite only for `N ≥ 11`).
    pub joseph_lundgren: ExtReal,
    /// Lepin exponent (finite only for `N ≥ 11`).
    pub lepin: ExtReal,
}

/// Evaluates the closed forms of all four exponents.
pub fn exponent_table(m: f64, dim: f64) -> Result<ExponentTable> {
    check_m_dim(m, dim)?;
    Ok(table_unchecked(m, dim))
}

fn table_unchecked(m: f64, dim: f64) -> ExponentTable {
    let fujita = m + 2.0 / dim;
    let sobolev = ExtReal::Finite(sobolev(m, dim));
    let (joseph_lundgren, lepin) = if dim >= 11.0 {
        let jl = m * (1.0 + 4.0 / (dim - 4.0 - 2.0 * (dim - 1.0).sqrt()));
        let d = dim - 10.0;
        let root = ((m - 1.0).powi(2) * d * d
            + 2.0 * (m - 1.0) * (5.0 * m - 4.0) * d
            + 9.0 * m * m)
            .sqrt();
        let lepin = 1.0 + (3.0 * m + root) / d;
        (ExtReal::Finite(jl), ExtReal::Finite(lepin))
    } else {
        (ExtReal::INF, ExtReal::INF)
    };
    ExponentTable { fujita, sobolev, joseph_lundgren, lepin }
}

fn sobolev(m: f64, dim: f64) -> f64 {
    m * (dim + 2.0) / (dim - 2.0)
}

/// Smallest dimension above which `K` distinct profiles are guaranteed:
/// `2(8K²m − 3Km − 4K² − 2K + 1)/((2K − 1)(m − 1))`.
pub fn multiplicity_dimension_bound(k: u32, m: f64) -> Result<f64> {
    check_k_m(k, m)?;
    let k = f64::from(k);
    let num = 2.0 * (8.0 * k * k * m - 3.0 * k * m - 4.0 * k * k - 2.0 * k + 1.0);
    Ok(num / ((2.0 * k - 1.0) * (m - 1.0)))
}

/// Upper end `(Km − 1)/(K − 1)` of the reaction range with `K` profiles.
pub fn max_reaction_for_k(k: u32, m: f64) -> Result<f64> {
    check_k_m(k, m)?;
    let k = f64::from(k);
    Ok((k * m - 1.0) / (k - 1.0))
}

fn check_k_m(k: u32, m: f64) -> Result<()> {
    if k < 2 {
        return domain(format!("multiplicity K = {k} must be at least 2"));
    }
    if !m.is_finite() || m <= 1.0 {
        return domain(format!("diffusion exponent m = {m} must exceed 1"));
    }
    Ok(())
}

/// Position of `p` relative to the critical exponents. Equality cases are
/// separate labels; `p = p_F` belongs to the sub-Fujita (all blow-up) range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SubFujita,
    FujitaToSobolev,
    SobolevCritical,
    SobolevToJl,
    JlCritical,
    JlToLepin,
    LepinCritical,
    SupraLepin,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::SubFujita => "sub-Fujita",
            Regime::FujitaToSobolev => "Fujita-to-Sobolev",
            Regime::SobolevCritical => "Sobolev-critical",
            Regime::SobolevToJl => "Sobolev-to-JL",
            Regime::JlCritical => "JL-critical",
            Regime::JlToLepin => "JL-to-Lepin",
            Regime::LepinCritical => "Lepin-critical",
            Regime::SupraLepin => "supra-Lepin",
        }
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQUALITY_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Classifies `p` against the exponent table of `(m, N)`.
pub fn classify_regime(params: &ParamTriple) -> Regime {
    let t = params.exponents();
    let p = params.p;
    if p < t.fujita || approx_eq(p, t.fujita) {
        return Regime::SubFujita;
    }
    let ps = t.sobolev.value();
    if approx_eq(p, ps) {
        return Regime::SobolevCritical;
    }
    if p < ps {
        return Regime::FujitaToSobolev;
    }
    if let Some(jl) = t.joseph_lundgren.finite() {
        if approx_eq(p, jl) {
            return Regime::JlCritical;
        }
    }
    if p < t.joseph_lundgren.value() {
        return Regime::SobolevToJl;
    }
    if let Some(l) = t.lepin.finite() {
        if approx_eq(p, l) {
            return Regime::LepinCritical;
        }
    }
    if p < t.lepin.value() {
        Regime::JlToLepin
    } else {
        Regime::SupraLepin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lepin_exponent_pins() {
        let t = exponent_table(2.0, 20.0).unwrap();
        assert!((t.lepin.value() - 3.2).abs() < 1e-12);
        let t = exponent_table(2.0, 100.0).unwrap();
        assert!((t.lepin.value() - (1.0 + 102.0 / 90.0)).abs() < 1e-12);
    }

    #[test]
    fn low_dimension_infinite_branch() {
        let t = exponent_table(2.0, 10.0).unwrap();
        assert_eq!(t.joseph_lundgren, ExtReal::INF);
        assert_eq!(t.lepin, ExtReal::INF);
        assert!(t.sobolev.is_finite());
    }

    #[test]
    fn table_values_m2_n20() {
        let t = exponent_table(2.0, 20.0).unwrap();
        assert!((t.fujita - 2.1).abs() < 1e-15);
        assert!((t.sobolev.value() - 22.0 / 9.0).abs() < 1e-14);
        assert!((t.joseph_lundgren.value() - 3.0986).abs() < 1e-3);
    }

    #[test]
    fn domain_errors() {
        assert!(exponent_table(1.0, 20.0).is_err());
        assert!(exponent_table(2.0, 2.5).is_err());
        assert!(ParamTriple::new(2.0, 20.0, 1.5).is_err());
        assert!(multiplicity_dimension_bound(1, 2.0).is_err());
        assert!(max_reaction_for_k(2, 0.5).is_err());
    }

    #[test]
    fn multiplicity_bound_values() {
        assert!((multiplicity_dimension_bound(2, 2.0).unwrap() - 22.0).abs() < 1e-12);
        assert!((multiplicity_dimension_bound(3, 2.0).unwrap() - 34.0).abs() < 1e-12);
        assert!((max_reaction_for_k(2, 2.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((max_reaction_for_k(4, 3.0).unwrap() - 11.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn regimes() {
        let r = |p| classify_regime(&ParamTriple::new(2.0, 20.0, p).unwrap());
        assert_eq!(r(10.0), Regime::SupraLepin);
        assert_eq!(r(22.0 / 9.0), Regime::SobolevCritical);
        assert_eq!(r(2.1), Regime::SubFujita);
        assert_eq!(r(2.05), Regime::SubFujita);
        assert_eq!(r(2.3), Regime::FujitaToSobolev);
        assert_eq!(r(3.0), Regime::SobolevToJl);
        assert_eq!(r(3.15), Regime::JlToLepin);
        assert_eq!(r(3.2), Regime::LepinCritical);
        let oscillating = ParamTriple::new(2.0, 100.0, 2.2).unwrap();
        assert_eq!(classify_regime(&oscillating), Regime::SupraLepin);
        let low = ParamTriple::new(2.0, 10.0, 50.0).unwrap();
        assert_eq!(classify_regime(&low), Regime::SobolevToJl);
    }

    #[test]
    fn ext_real_ordering_and_serde() {
        assert!(ExtReal::Finite(1e300) < ExtReal::INF);
        assert!(ExtReal::INF > ExtReal::Finite(f64::MAX));
        assert_eq!(ExtReal::INF.value(), f64::INFINITY);
        assert_eq!(ExtReal::Finite(2.5).finite(), Some(2.5));
    }
}
