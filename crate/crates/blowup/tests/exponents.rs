use blowup::exponents::{
    classify_regime, exponent_table, max_reaction_for_k, multiplicity_dimension_bound, ExtReal, Regime,
};
use blowup::ParamTriple;

#[test]
fn pinned_lepin_values() {
    assert!((exponent_table(2.0, 20.0).unwrap().lepin.value() - 3.2).abs() < 1e-12);
    let t = exponent_table(2.0, 100.0).unwrap();
    assert!((t.lepin.value() - (1.0 + 102.0 / 90.0)).abs() < 1e-12);
}

#[test]
fn low_dimension_branches_are_infinite() {
    let t = exponent_table(2.0, 10.0).unwrap();
    assert_eq!(t.joseph_lundgren, ExtReal::PosInf);
    assert_eq!(t.lepin, ExtReal::PosInf);
    assert!(t.sobolev.is_finite());
}

#[test]
fn values_at_m2_n20() {
    let t = exponent_table(2.0, 20.0).unwrap();
    assert!((t.fujita - 2.1).abs() < 1e-15);
    assert!((t.sobolev.value() - 22.0 / 9.0).abs() < 1e-15);
    assert!((t.joseph_lundgren.value() - 3.0986).abs() < 1e-4);
}

#[test]
fn bounds() {
    assert!((multiplicity_dimension_bound(2, 2.0).unwrap() - 22.0).abs() < 1e-12);
    assert!((multiplicity_dimension_bound(3, 2.0).unwrap() - 34.0).abs() < 1e-12);
    assert!((max_reaction_for_k(2, 2.0).unwrap() - 3.0).abs() < 1e-15);
    assert!((max_reaction_for_k(4, 3.0).unwrap() - 11.0 / 3.0).abs() < 1e-15);
    assert!(multiplicity_dimension_bound(1, 2.0).is_err());
    assert!(max_reaction_for_k(2, 1.0).is_err());
}

#[test]
fn bound_monotonicity() {
    for k in 2..8u32 {
        let mut prev_m = f64::INFINITY;
        for i in 0..40 {
            let m = 1.1 + 0.25 * i as f64;
            let b = multiplicity_dimension_bound(k, m).unwrap();
            assert!(b < prev_m, "not decreasing in m at K = {k}, m = {m}");
            prev_m = b;
            assert!(multiplicity_dimension_bound(k + 1, m).unwrap() > b);
            // The reaction bound decreases towards m.
            let r = max_reaction_for_k(k, m).unwrap();
            assert!(r > max_reaction_for_k(k + 1, m).unwrap() && r > m);
        }
    }
}

#[test]
fn regimes_of_experiments() {
    let r = |m, n, p| classify_regime(&ParamTriple::new(m, n, p).unwrap());
    assert_eq!(r(2.0, 20.0, 10.0), Regime::SupraLepin);
    assert_eq!(r(2.0, 100.0, 2.2), Regime::SupraLepin);
    assert_eq!(r(2.0, 20.0, 22.0 / 9.0), Regime::SobolevCritical);
    assert_eq!(r(2.0, 20.0, 2.1), Regime::SubFujita);
    assert_eq!(r(2.0, 20.0, 2.3), Regime::FujitaToSobolev);
    assert_eq!(r(2.0, 20.0, 3.0), Regime::SobolevToJl);
    assert_eq!(r(2.0, 20.0, 3.15), Regime::JlToLepin);
    assert_eq!(r(2.0, 20.0, 3.2), Regime::LepinCritical);
    assert_eq!(r(2.0, 10.0, 50.0), Regime::SobolevToJl);
}

#[test]
fn ordering_on_grid() {
    for i in 0..40 {
        let m = 1.1 + 0.1 * i as f64;
        for n in (11..=200).step_by(7) {
            let t = exponent_table(m, n as f64).unwrap();
            let (ps, jl, l) = (t.sobolev.value(), t.joseph_lundgren.value(), t.lepin.value());
            assert!(t.fujita < ps && ps < jl && jl < l, "m = {m}, N = {n}: {t:?}");
        }
    }
}

#[test]
fn lepin_tends_to_m() {
    for n in (100..=2000).step_by(50) {
        let l = exponent_table(2.0, n as f64).unwrap().lepin.value();
        assert!(l - 2.0 < 0.2 && l > 2.0);
    }
}

#[test]
fn invalid_triples() {
    assert!(ParamTriple::new(1.0, 20.0, 3.0).is_err());
    assert!(ParamTriple::new(2.0, 2.0, 3.0).is_err());
    assert!(ParamTriple::new(2.0, 20.0, 1.5).is_err());
    assert!(ParamTriple::new(2.0, 20.0, 2.3).unwrap().require_supercritical().is_err());
}
