use std::path::Path;

use milnor::fiber::FibrationConfig;
use milnor::MixedPolynomial;
use serde::Deserialize;

use crate::commands::CliError;
use crate::GlobalArgs;

/// Contents of a `--config` file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub tol_fiber: Option<f64>,
    pub tol_angle: Option<f64>,
    pub delta: Option<f64>,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub ode_step: Option<f64>,
    pub margin: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("bad config {}: {e}", path.display())))
    }
}

/// Global settings after applying flags over the config file over defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    tol_fiber: Option<f64>,
    tol_angle: Option<f64>,
    delta: Option<f64>,
    r0: Option<f64>,
    r1: Option<f64>,
    ode_step: Option<f64>,
    margin: Option<f64>,
}

impl Settings {
    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &g.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self {
            seed: g.seed.or(file.seed).unwrap_or(0),
            tol_fiber: g.tol_fiber.or(file.tol_fiber),
            tol_angle: g.tol_angle.or(file.tol_angle),
            delta: g.delta.or(file.delta),
            r0: g.r0.or(file.r0),
            r1: g.r1.or(file.r1),
            ode_step: g.ode_step.or(file.ode_step),
            margin: g.margin.or(file.margin),
        })
    }

    /// The fibration configuration for `f`; `delta` defaults depend on `f`.
    pub fn fibration(&self, f: &MixedPolynomial) -> Result<FibrationConfig, CliError> {
        let d = FibrationConfig::default();
        let r0 = self.r0.unwrap_or(d.r0);
        let cfg = FibrationConfig {
            r0,
            r1: self.r1.unwrap_or(0.5 * r0),
            delta: self.delta.unwrap_or_else(|| FibrationConfig::default_delta(f, r0)),
            tol_fiber: self.tol_fiber.unwrap_or(d.tol_fiber),
            tol_angle: self.tol_angle.unwrap_or(d.tol_angle),
            ode_step: self.ode_step.unwrap_or(d.ode_step),
            margin: self.margin.unwrap_or(d.margin),
            ..d
        };
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }
}
