use blowup::config::{LepinConfig, ShooterConfig};
use blowup::dynsys::stat_z0;
use blowup::shooter::{
    bisect_boundary, bisect_level, center_manifold_residual, classify, classify_level, find_solutions,
    lepin_default_eta_end, lepin_zero_count, Classification, Fate, LaunchSpec, LevelSide,
};
use blowup::{Error, ParamTriple};

fn supra_lepin() -> ParamTriple {
    ParamTriple::new(2.0, 20.0, 10.0).unwrap()
}

fn shot(c: f64) -> Classification {
    let cfg = ShooterConfig::default();
    classify(&LaunchSpec::new(c, cfg.delta, supra_lepin()).unwrap(), &cfg).unwrap().classification
}

#[test]
fn launch_validation() {
    assert!(LaunchSpec::new(0.0, 1e-6, supra_lepin()).is_err());
    assert!(LaunchSpec::new(1.0, 1e-3, supra_lepin()).is_err());
    assert!(LaunchSpec::new(1.0, 1e-9, supra_lepin()).is_err());
    let s = LaunchSpec::new(2.0, 1e-6, supra_lepin()).unwrap().initial_state();
    assert!(s.x > 0.0 && s.z > 0.0 && (s.z / s.x - 2.0).abs() < 1e-4);
}

#[test]
fn classification_examples() {
    assert_eq!(shot(1.001), Classification::SetC);
    assert_eq!(shot(2.0), Classification::SetC);
    assert_eq!(shot(50.0), Classification::SetA);
    assert_eq!(shot(1e4), Classification::SetA);
}

#[test]
fn classes_are_open() {
    // Small perturbations of a classified C keep the class.
    for (c, class) in [(2.0, Classification::SetC), (50.0, Classification::SetA)] {
        for i in 0..10 {
            let d = 1e-6 * (i as f64 - 4.5);
            assert_eq!(shot(c * (1.0 + d)), class, "C = {c}, offset {d}");
        }
    }
}

#[test]
fn supra_lepin_boundary_connects() {
    let pr = supra_lepin();
    let cfg = ShooterConfig::default();
    let out = bisect_boundary(&pr, 2.0, 50.0, &cfg).unwrap();
    assert!((out.c - 5.349_266_816_271_387_4).abs() < 1e-8, "C0 = {}", out.c);
    assert_eq!(out.fate, Fate::ConnectsQ1);
    assert_eq!(out.oscillations, 0);
    let z = out.z_limit.unwrap();
    assert!(z > stat_z0(&pr));
    let tail = &out.tail.as_ref().unwrap().points;
    let (_, last) = tail.last().unwrap();
    assert!((last.y + 2.0 / pr.gap()).abs() < 1e-3, "Y_end = {}", last.y);
    let early = center_manifold_residual(&pr, &tail[0].1).abs();
    let late = center_manifold_residual(&pr, last).abs();
    assert!(late <= early.max(1e-12), "{early} → {late}");
}

#[test]
fn bad_brackets_are_reported() {
    let cfg = ShooterConfig::default();
    assert!(matches!(bisect_boundary(&supra_lepin(), 2.0, 2.0, &cfg), Err(Error::InvalidBracket(_))));
    assert!(matches!(bisect_boundary(&supra_lepin(), 50.0, 2.0, &cfg), Err(Error::InvalidBracket(_))));
    assert!(matches!(bisect_boundary(&supra_lepin(), 2.0, 3.0, &cfg), Err(Error::InvalidBracket(_))));
}

#[test]
fn find_respects_predicted_levels() {
    let cfg = ShooterConfig::default();
    let one = find_solutions(&supra_lepin(), 1, &cfg).unwrap();
    assert_eq!(one.solutions.len(), 1);
    assert!(one.failures.is_empty());
    // p = 10 exceeds every reaction bound with K ≥ 2.
    let two = find_solutions(&supra_lepin(), 2, &cfg).unwrap();
    assert_eq!(two.solutions.len(), 1);
    assert_eq!(two.failures.len(), 1);
    assert_eq!(two.failures[0].level, 1);
    assert!(find_solutions(&supra_lepin(), 0, &cfg).is_err());
}

#[test]
fn oscillating_level_one_boundary() {
    let pr = ParamTriple::new(2.0, 100.0, 2.2).unwrap();
    let cfg = ShooterConfig::default();
    assert_eq!(classify_level(&pr, 7e4, 1, &cfg).unwrap(), LevelSide::CSide);
    assert_eq!(classify_level(&pr, 8e4, 1, &cfg).unwrap(), LevelSide::ASide);
    let out = bisect_level(&pr, 1, 7e4, 8e4, &cfg).unwrap();
    assert_eq!(out.oscillations, 1);
    assert!((out.c - 71730.698).abs() < 1e-2, "C = {}", out.c);
}

#[test]
fn zero_count_is_scale_invariant() {
    let pr = ParamTriple::new(2.0, 20.0, 4.0).unwrap();
    let base = LepinConfig::default();
    let count = |cfg: &LepinConfig, stretch: f64| {
        let end = lepin_default_eta_end(&pr, cfg).unwrap() * stretch;
        lepin_zero_count(&pr, end, cfg.eta_start, cfg).unwrap()
    };
    let n = count(&base, 1.0);
    assert_eq!(n, 1);
    for scale in [10.0, 0.1] {
        assert_eq!(count(&LepinConfig { constant_scale: scale, ..base.clone() }, 1.0), n);
    }
    assert_eq!(count(&base, 2.0), n);
}
