//! Browser bindings: train a model, query it in both directions, and watch
//! the distortion of the sensory map after the arm changes.

use vdsom::{
    babble_with, distortion, perturb, ArmModel, BabbleSample, Decode, DensityParams, MapVariant, ModelConfig,
    Normalizer, PerturbKind, SensorimotorModel,
};
use wasm_bindgen::prelude::*;

const TRAIN_SEED: u64 = 101;
const PERTURBED_SEED: u64 = 103;
const WINDOW: usize = 500;

/// A trained model together with the arm and bounds it was trained on.
#[wasm_bindgen]
pub struct Workbench {
    arm: ArmModel,
    normalizer: Normalizer,
    model: SensorimotorModel,
    final_zeta: f64,
}

impl Workbench {
    pub fn train(side: usize, vdsom: bool, map_iters: usize, seed: u64) -> vdsom::Result<Self> {
        let arm = ArmModel::default();
        let normalizer = Normalizer::for_arm(&arm)?;
        let variant = if vdsom {
            MapVariant::Vdsom(DensityParams::default())
        } else {
            MapVariant::Som
        };
        let mut config = ModelConfig::square(side, variant, seed);
        config.map_iters = map_iters;
        config.bridge_iters = map_iters.min(20_000);
        let data = babble_with(&arm, map_iters.clamp(1, 20_000), vdsom::derive_seed(seed, TRAIN_SEED), &normalizer)?;
        let pairs: Vec<_> = data.iter().map(|s| (s.joints_norm, s.position_norm)).collect();
        let model = SensorimotorModel::fit(config, &pairs)?;
        let final_zeta = model.sensory_trace.last().map_or(0.0, |p| p.distortion);
        Ok(Self { arm, normalizer, model, final_zeta })
    }

    /// Predicted and true hand position in mm for joints in degrees.
    pub fn forward_mm(&self, theta1: f64, theta2: f64) -> vdsom::Result<[f64; 4]> {
        let q = [theta1.to_radians(), theta2.to_radians()];
        let p = self.model.forward(self.normalizer.normalize_joints(q), Decode::Argmax)?;
        let p = self.normalizer.denormalize_task(p);
        let truth = self.arm.forward_kinematics(q);
        Ok([p[0], p[1], truth[0], truth[1]])
    }

    /// Predicted joints in degrees and the position they actually reach.
    pub fn inverse_deg(&self, x: f64, y: f64) -> vdsom::Result<[f64; 4]> {
        let q = self.model.inverse(self.normalizer.normalize_task([x, y]), Decode::Argmax)?;
        let q = self.normalizer.denormalize_joints(q);
        let reached = self.arm.forward_kinematics(q);
        Ok([q[0].to_degrees(), q[1].to_degrees(), reached[0], reached[1]])
    }

    /// Distortion of the frozen sensory map on consecutive windows of babble
    /// from the arm with link 2 scaled by `factor`.
    pub fn perturbed_trace(&self, factor: f64, windows: usize) -> vdsom::Result<Vec<f64>> {
        let kind = if factor >= 1.0 { PerturbKind::Stretch } else { PerturbKind::Shorten };
        let changed = perturb(&self.arm, kind, 2, factor)?;
        let samples = babble_with(&changed, windows.max(1) * WINDOW, PERTURBED_SEED, &self.normalizer)?;
        samples
            .chunks(WINDOW)
            .map(|w| {
                let positions: Vec<_> = w.iter().map(|s: &BabbleSample| s.position_norm).collect();
                distortion(&self.model.sensory, &positions)
            })
            .collect()
    }
}

fn js(e: vdsom::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Workbench {
    #[wasm_bindgen(constructor)]
    pub fn new(side: usize, vdsom: bool, map_iters: usize, seed: u32) -> Result<Workbench, JsError> {
        Self::train(side, vdsom, map_iters, seed as u64).map_err(js)
    }

    pub fn side(&self) -> usize {
        self.model.config.rows
    }

    /// Sensory weights in mm, interleaved x, y per node in row-major order.
    pub fn sensory_weights(&self) -> Vec<f64> {
        self.model
            .sensory
            .iter_weights()
            .flat_map(|w| self.normalizer.denormalize_task([w[0], w[1]]))
            .collect()
    }

    /// Distortion of the sensory map at the end of training.
    pub fn final_zeta(&self) -> f64 {
        self.final_zeta
    }

    pub fn forward(&self, theta1_deg: f64, theta2_deg: f64) -> Result<Vec<f64>, JsError> {
        self.forward_mm(theta1_deg, theta2_deg).map(Vec::from).map_err(js)
    }

    pub fn inverse(&self, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
        self.inverse_deg(x, y).map(Vec::from).map_err(js)
    }

    pub fn perturb_trace(&self, factor: f64, windows: usize) -> Result<Vec<f64>, JsError> {
        self.perturbed_trace(factor, windows).map_err(js)
    }
}
