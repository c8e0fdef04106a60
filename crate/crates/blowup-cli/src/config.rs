//! Experiment configuration: an optional TOML file with command-line
//! overrides on top.

use std::path::{Path, PathBuf};

use blowup::config::{LepinConfig, ShooterConfig};
use blowup::ParamTriple;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<f64>,
    #[serde(rename = "N")]
    pub dim: Option<f64>,
    pub p: Option<f64>,
    #[serde(rename = "C")]
    pub c_list: Option<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub shooter: ShooterConfig,
    pub lepin: LepinConfig,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub m: Option<f64>,
    pub dim: Option<f64>,
    pub p: Option<f64>,
    pub c_list: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub tol_rel: Option<f64>,
    pub tol_abs: Option<f64>,
    pub tol_c: Option<f64>,
    pub x_big: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub m: f64,
    pub dim: f64,
    pub p: Option<f64>,
    pub c_list: Vec<f64>,
    pub k: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
    pub shooter: ShooterConfig,
    pub lepin: LepinConfig,
}

impl ExperimentConfig {
    pub fn resolve(file: Option<&Path>, ov: Overrides) -> Result<Self, CliError> {
        let base = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let m = ov.m.or(base.m).ok_or_else(|| CliError::Config("missing --m".into()))?;
        let dim = ov.dim.or(base.dim).ok_or_else(|| CliError::Config("missing --N".into()))?;
        let mut shooter = base.shooter;
        let mut lepin = base.lepin;
        if let Some(t) = ov.tol_rel {
            shooter.integrator.rel_tol = t;
            lepin.integrator.rel_tol = t;
        }
        if let Some(t) = ov.tol_abs {
            shooter.integrator.abs_tol = t;
            lepin.integrator.abs_tol = t;
        }
        if let Some(t) = ov.tol_c {
            shooter.tol_c = t;
        }
        if let Some(x) = ov.x_big {
            shooter.x_big = x;
        }
        for (name, v) in [
            ("tol-rel", shooter.integrator.rel_tol),
            ("tol-abs", shooter.integrator.abs_tol),
            ("tol-C", shooter.tol_c),
            ("x-big", shooter.x_big),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            m,
            dim,
            p: ov.p.or(base.p),
            c_list: ov.c_list.or(base.c_list).unwrap_or_default(),
            k: ov.k.or(base.k),
            out: ov.out.or(base.out).unwrap_or_else(|| PathBuf::from(".")),
            format: ov.format.or(base.format).unwrap_or_default(),
            shooter,
            lepin,
        })
    }

    pub fn params(&self) -> Result<ParamTriple, CliError> {
        let p = self.p.ok_or_else(|| CliError::Config("missing --p".into()))?;
        Ok(ParamTriple::new(self.m, self.dim, p)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "m = 2.0\nN = 20.0\np = 10.0\nC = [1.5]\n[shooter]\nx_big = 1e5\n").unwrap();
        let ov = Overrides { p: Some(4.0), tol_c: Some(1e-6), ..Overrides::default() };
        let cfg = ExperimentConfig::resolve(Some(&path), ov).unwrap();
        assert_eq!((cfg.m, cfg.dim, cfg.p), (2.0, 20.0, Some(4.0)));
        assert_eq!(cfg.c_list, vec![1.5]);
        assert_eq!(cfg.shooter.x_big, 1e5);
        assert_eq!(cfg.shooter.tol_c, 1e-6);
        assert_eq!(cfg.shooter.delta, ShooterConfig::default().delta);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let ov = Overrides { m: Some(2.0), dim: Some(20.0), x_big: Some(-1.0), ..Overrides::default() };
        assert!(matches!(ExperimentConfig::resolve(None, ov), Err(CliError::Config(_))));
        let ov = Overrides { m: Some(2.0), ..Overrides::default() };
        assert!(matches!(ExperimentConfig::resolve(None, ov), Err(CliError::Config(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "m = 2.0\nunknown = 1\n").unwrap();
        assert!(matches!(ExperimentConfig::resolve(Some(&path), Overrides::default()), Err(CliError::Config(_))));
    }
}
