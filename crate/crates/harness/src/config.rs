//! Experiment configuration: a flat TOML key-value file plus `key=value`
//! overrides. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vdsom::{ArmModel, Decode, DensityParams, MapVariant, ModelConfig};

use crate::error::{AtStage, Result, Stage, StageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    BaselineSom,
    Vdsom,
    Stretch,
    Shorten,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::BaselineSom => "baseline_som",
            Scenario::Vdsom => "vdsom",
            Scenario::Stretch => "stretch",
            Scenario::Shorten => "shorten",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    Argmax,
    Interpolate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid_sizes: Vec<usize>,
    pub seed: u64,

    /// Link lengths in mm.
    pub l1: f64,
    pub l2: f64,
    /// Joint ranges in degrees.
    pub theta1_min: f64,
    pub theta1_max: f64,
    pub theta2_min: f64,
    pub theta2_max: f64,
    pub n_train: usize,
    pub n_test: usize,

    pub map_iters: usize,
    pub alpha_init: f64,
    /// Defaults to half the grid side.
    pub sigma_init: Option<f64>,
    /// Defaults to the constant that brings sigma to 1 at the end.
    pub time_constant: Option<f64>,
    /// Neighborhood cutoff in multiples of sigma.
    pub cutoff: f64,
    /// Update every node on every step instead of using the cutoff.
    pub exact_neighborhood: bool,
    pub local_radius: f64,
    pub rho_floor: f64,

    pub bridge_eta: f64,
    pub bridge_iters: usize,
    pub activity_floor: f64,
    pub decode: DecodeMode,
    /// Lattice radius used by interpolating decode.
    pub interp_radius: f64,

    /// Link perturbed by the stretch and shorten scenarios (1 or 2).
    pub perturb_link: u8,
    pub stretch_factor: f64,
    pub shorten_factor: f64,
    /// Detection threshold as a multiple of the final training distortion.
    pub threshold_factor: f64,
    pub beta_init: f64,
    pub eta_init: f64,
    /// Relearning budget as a fraction of `map_iters`.
    pub relearn_fraction: f64,
    /// Also train a fresh model with the relearning budget for comparison.
    pub compare_scratch: bool,

    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let arm = ArmModel::default();
        Self {
            scenario: Scenario::Vdsom,
            grid_sizes: vec![70],
            seed: 1,
            l1: arm.l1,
            l2: arm.l2,
            theta1_min: arm.theta1_range.0.to_degrees(),
            theta1_max: arm.theta1_range.1.to_degrees(),
            theta2_min: arm.theta2_range.0.to_degrees(),
            theta2_max: arm.theta2_range.1.to_degrees(),
            n_train: 20_000,
            n_test: 5_000,
            map_iters: 100_000,
            alpha_init: 0.3,
            sigma_init: None,
            time_constant: None,
            cutoff: vdsom::som::DEFAULT_CUTOFF,
            exact_neighborhood: false,
            local_radius: DensityParams::default().local_radius,
            rho_floor: DensityParams::default().rho_floor,
            bridge_eta: 0.3,
            bridge_iters: 20_000,
            activity_floor: vdsom::association::DEFAULT_ACTIVITY_FLOOR,
            decode: DecodeMode::Argmax,
            interp_radius: 1.5,
            perturb_link: 2,
            stretch_factor: 1.5,
            shorten_factor: 0.6,
            threshold_factor: 1.3,
            beta_init: 1.0,
            eta_init: 0.1,
            relearn_fraction: 0.2,
            compare_scratch: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Parses one `key=value` override into a TOML value. Values that are not
/// valid TOML are taken as bare strings.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ExperimentConfig {
    /// Builds a config from TOML text and `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().at(Stage::Config)?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| StageError::new(Stage::Config, format!("override `{item}` is not key=value")))?;
            table.insert(key.trim().to_string(), override_value(value.trim()));
        }
        let cfg: Self = table.try_into().at(Stage::Config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (if given) and applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| StageError::new(Stage::Config, format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(StageError::new(Stage::Config, m));
        if self.grid_sizes.is_empty() {
            return fail("grid_sizes is empty".into());
        }
        if let Some(&n) = self.grid_sizes.iter().find(|&&n| n < 2) {
            return fail(format!("grid size {n} is below 2"));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return fail("n_train and n_test must be positive".into());
        }
        if !(self.relearn_fraction > 0.0 && self.relearn_fraction.is_finite()) {
            return fail(format!("relearn_fraction must be positive, got {}", self.relearn_fraction));
        }
        if !(self.threshold_factor >= 0.0) {
            return fail(format!("threshold_factor must be >= 0, got {}", self.threshold_factor));
        }
        if !(self.cutoff > 0.0) {
            return fail(format!("cutoff must be positive, got {}", self.cutoff));
        }
        if !(self.interp_radius >= 0.0) {
            return fail(format!("interp_radius must be >= 0, got {}", self.interp_radius));
        }
        self.arm().validate().at(Stage::Config)?;
        self.density().validate().at(Stage::Config)?;
        for &n in &self.grid_sizes {
            self.model_config(n, self.variant()).schedule(0).at(Stage::Config)?;
        }
        Ok(())
    }

    pub fn arm(&self) -> ArmModel {
        ArmModel {
            l1: self.l1,
            l2: self.l2,
            theta1_range: (self.theta1_min.to_radians(), self.theta1_max.to_radians()),
            theta2_range: (self.theta2_min.to_radians(), self.theta2_max.to_radians()),
        }
    }

    pub fn density(&self) -> DensityParams {
        DensityParams {
            local_radius: self.local_radius,
            rho_floor: self.rho_floor,
            amplitude: true,
        }
    }

    /// Plain Kohonen maps for the baseline scenario, varying density
    /// otherwise.
    pub fn variant(&self) -> MapVariant {
        match self.scenario {
            Scenario::BaselineSom => MapVariant::Som,
            _ => MapVariant::Vdsom(self.density()),
        }
    }

    pub fn decode(&self) -> Decode {
        match self.decode {
            DecodeMode::Argmax => Decode::Argmax,
            DecodeMode::Interpolate => Decode::Interpolate {
                radius: self.interp_radius,
            },
        }
    }

    pub fn model_config(&self, side: usize, variant: MapVariant) -> ModelConfig {
        ModelConfig {
            map_iters: self.map_iters,
            alpha_init: self.alpha_init,
            sigma_init: self.sigma_init,
            time_constant: self.time_constant,
            cutoff: (!self.exact_neighborhood).then_some(self.cutoff),
            bridge_eta: self.bridge_eta,
            bridge_iters: self.bridge_iters,
            activity_floor: self.activity_floor,
            ..ModelConfig::square(side, variant, self.seed)
        }
    }

    pub fn relearn_iters(&self) -> usize {
        ((self.map_iters as f64 * self.relearn_fraction).round() as usize).max(1)
    }
}
