//! A motor map, a sensory map and the bridge between them, trained from
//! babbled joint/position pairs.

use serde::{Deserialize, Serialize};

use crate::adaptation::{distortion, AdaptationController, TauResolution};
use crate::association::{
    query_forward, query_inverse, train_bridge, AssociativeBridge, BridgeSchedule, Decode, Schedule,
    DEFAULT_ACTIVITY_FLOOR,
};
use crate::error::{Error, Result};
use crate::lattice::{GridSpec, SomMap};
use crate::som::{check_data, run_training, StepParams, TrainingSchedule, TrainingTrace};
use crate::density::DensityParams;

/// Which neighborhood the maps are trained with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapVariant {
    Som,
    Vdsom(DensityParams),
}

impl MapVariant {
    fn density(&self) -> Option<&DensityParams> {
        match self {
            MapVariant::Som => None,
            MapVariant::Vdsom(p) => Some(p),
        }
    }
}

/// SplitMix64 step, used to derive independent seeds from one base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const MOTOR_INIT: u64 = 1;
const SENSORY_INIT: u64 = 2;
const MOTOR_TRAIN: u64 = 3;
const SENSORY_TRAIN: u64 = 4;
const MOTOR_RELEARN: u64 = 5;
const SENSORY_RELEARN: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub rows: usize,
    pub cols: usize,
    pub variant: MapVariant,
    pub map_iters: usize,
    pub alpha_init: f64,
    /// Defaults to half the larger grid side.
    pub sigma_init: Option<f64>,
    /// Defaults to a constant that brings sigma to 1 at the end.
    pub time_constant: Option<f64>,
    pub cutoff: Option<f64>,
    pub bridge_eta: f64,
    /// Bridge presentations; the training pairs are cycled.
    pub bridge_iters: usize,
    pub activity_floor: f64,
    pub seed: u64,
}

impl ModelConfig {
    pub fn square(side: usize, variant: MapVariant, seed: u64) -> Self {
        Self {
            rows: side,
            cols: side,
            variant,
            map_iters: 100_000,
            alpha_init: 0.3,
            sigma_init: None,
            time_constant: None,
            cutoff: Some(crate::som::DEFAULT_CUTOFF),
            bridge_eta: 0.3,
            bridge_iters: 20_000,
            activity_floor: DEFAULT_ACTIVITY_FLOOR,
            seed,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.rows, self.cols, 2)
    }

    /// Map schedule with the given seed stream.
    pub fn schedule(&self, stream: u64) -> Result<TrainingSchedule> {
        let spec = self.grid()?;
        let mut s = TrainingSchedule::for_grid(&spec, self.map_iters, derive_seed(self.seed, stream));
        s.alpha_init = self.alpha_init;
        if let Some(sigma) = self.sigma_init {
            s.sigma_init = sigma;
            s.time_constant = crate::som::default_time_constant(sigma, self.map_iters);
        }
        if let Some(tc) = self.time_constant {
            s.time_constant = tc;
        }
        s.cutoff = self.cutoff;
        s.validate(&spec)?;
        Ok(s)
    }

    pub fn map_radius(&self) -> f64 {
        self.rows.max(self.cols) as f64 / 2.0
    }
}

fn train_map<V: AsRef<[f64]>>(map: &mut SomMap, data: &[V], sched: &TrainingSchedule, variant: &MapVariant) -> Result<TrainingTrace> {
    match variant {
        MapVariant::Som => crate::som::train_som(map, data, sched),
        MapVariant::Vdsom(p) => crate::density::train_vdsom(map, data, sched, p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorimotorModel {
    pub config: ModelConfig,
    pub motor: SomMap,
    pub sensory: SomMap,
    pub bridge: AssociativeBridge,
    pub motor_trace: TrainingTrace,
    pub sensory_trace: TrainingTrace,
}

impl SensorimotorModel {
    /// Freshly initialized maps and an empty bridge.
    pub fn untrained(config: ModelConfig) -> Result<Self> {
        let spec = config.grid()?;
        let motor = SomMap::new(spec, derive_seed(config.seed, MOTOR_INIT));
        let sensory = SomMap::new(spec, derive_seed(config.seed, SENSORY_INIT));
        let mut bridge = AssociativeBridge::between(&motor, &sensory, config.bridge_eta)?;
        bridge.activity_floor = config.activity_floor;
        Ok(Self {
            config,
            motor,
            sensory,
            bridge,
            motor_trace: TrainingTrace::default(),
            sensory_trace: TrainingTrace::default(),
        })
    }

    /// Trains both maps on their halves of the pairs.
    pub fn train_maps(&mut self, joints: &[[f64; 2]], positions: &[[f64; 2]]) -> Result<()> {
        let variant = self.config.variant;
        self.motor_trace = train_map(&mut self.motor, joints, &self.config.schedule(MOTOR_TRAIN)?, &variant)?;
        self.sensory_trace = train_map(&mut self.sensory, positions, &self.config.schedule(SENSORY_TRAIN)?, &variant)?;
        Ok(())
    }

    pub fn bridge_schedule(&self) -> Result<BridgeSchedule> {
        Ok(BridgeSchedule::initial(&self.config.schedule(SENSORY_TRAIN)?, self.config.bridge_eta))
    }

    /// Trains the bridge from zero-initialized connections with the maps
    /// frozen.
    pub fn train_bridge(&mut self, pairs: &[([f64; 2], [f64; 2])]) -> Result<()> {
        let mut bridge = AssociativeBridge::between(&self.motor, &self.sensory, self.config.bridge_eta)?;
        bridge.activity_floor = self.config.activity_floor;
        let sched = self.bridge_schedule()?;
        train_bridge(&mut bridge, &self.motor, &self.sensory, pairs, &sched, self.config.bridge_iters)?;
        self.bridge = bridge;
        Ok(())
    }

    /// Maps then bridge.
    pub fn fit(config: ModelConfig, pairs: &[([f64; 2], [f64; 2])]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("training pairs"));
        }
        let mut model = Self::untrained(config)?;
        let (joints, positions): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        model.train_maps(&joints, &positions)?;
        model.train_bridge(pairs)?;
        Ok(model)
    }

    pub fn forward(&self, joints: [f64; 2], mode: Decode) -> Result<[f64; 2]> {
        let v = query_forward(&self.bridge, &self.motor, &self.sensory, &joints, mode)?;
        Ok([v[0], v[1]])
    }

    pub fn inverse(&self, position: [f64; 2], mode: Decode) -> Result<[f64; 2]> {
        let v = query_inverse(&self.bridge, &self.motor, &self.sensory, &position, mode)?;
        Ok([v[0], v[1]])
    }

    /// Controller for the sensory map with the given distortion threshold and
    /// relearning parameters.
    pub fn controller(&self, threshold: f64, beta_init: f64, eta_init: f64, relearn_iters: usize) -> Result<AdaptationController> {
        AdaptationController::new(
            threshold,
            self.config.schedule(SENSORY_TRAIN)?,
            self.config.map_radius(),
            beta_init,
            eta_init,
            relearn_iters,
        )
    }
}

/// Outcome of [`run_readaptation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readaptation {
    pub motor_tau: TauResolution,
    pub sensory_tau: TauResolution,
    pub motor_trace: TrainingTrace,
    pub sensory_trace: TrainingTrace,
    /// Sensory distortion on the most recent window after relearning.
    pub final_distortion: f64,
}

/// Size of the recent-sample window distortion is measured on.
pub const DISTORTION_WINDOW: usize = 500;

/// The most recent `DISTORTION_WINDOW` entries of `data`.
pub fn recent_window<T>(data: &[T]) -> &[T] {
    &data[data.len().saturating_sub(DISTORTION_WINDOW)..]
}

fn relearn_map(
    map: &mut SomMap,
    data: &[[f64; 2]],
    history: &TrainingTrace,
    ctl: &AdaptationController,
    sched: &TrainingSchedule,
    variant: &MapVariant,
    seed: u64,
) -> Result<(TauResolution, TrainingTrace)> {
    let zeta_now = distortion(map, recent_window(data))?;
    let tau = crate::adaptation::resolve_tau(history, zeta_now)?;
    let trace = run_training(map, data, ctl.relearn_iters, seed, variant.density(), |t| {
        let p = ctl.relearn_schedules_for(&tau, sched, t as f64);
        StepParams {
            alpha: p.alpha,
            sigma: p.sigma,
            time: p.schedule_time,
            time_constant: sched.time_constant,
            cutoff: sched.cutoff,
        }
    });
    Ok((tau, trace))
}

/// Resets learning after a detected change: both maps resume training on
/// `new_pairs` from their resolved `τ`, then the warm-started bridge is
/// retrained with the decaying `β(t)`, `η(t)` schedules.
pub fn run_readaptation(
    model: &mut SensorimotorModel,
    new_pairs: &[([f64; 2], [f64; 2])],
    controller: &mut AdaptationController,
) -> Result<Readaptation> {
    if new_pairs.is_empty() {
        return Err(Error::Empty("re-adaptation pairs"));
    }
    let (joints, positions): (Vec<_>, Vec<_>) = new_pairs.iter().copied().unzip();
    check_data(&model.motor, &joints)?;
    check_data(&model.sensory, &positions)?;
    let variant = model.config.variant;
    let seed = model.config.seed;

    let motor_sched = model.config.schedule(MOTOR_TRAIN)?;
    let (motor_tau, motor_trace) = relearn_map(
        &mut model.motor,
        &joints,
        &model.motor_trace,
        controller,
        &motor_sched,
        &variant,
        derive_seed(seed, MOTOR_RELEARN),
    )?;
    let sensory_sched = model.config.schedule(SENSORY_TRAIN)?;
    let (sensory_tau, sensory_trace) = relearn_map(
        &mut model.sensory,
        &positions,
        &model.sensory_trace,
        controller,
        &sensory_sched,
        &variant,
        derive_seed(seed, SENSORY_RELEARN),
    )?;
    controller.resolve(&model.sensory_trace, sensory_tau.distortion)?;

    let steps = controller.relearn_iters as f64;
    let end_sigma = controller.relearn_schedules_for(&sensory_tau, &sensory_sched, steps).sigma;
    let schedule = BridgeSchedule {
        sigma: Schedule::constant(end_sigma),
        eta: Schedule::Relearn {
            init: controller.eta_init,
            time_constant: steps,
        },
        beta: Schedule::Relearn {
            init: controller.beta_init,
            time_constant: steps,
        },
    };
    train_bridge(
        &mut model.bridge,
        &model.motor,
        &model.sensory,
        new_pairs,
        &schedule,
        controller.relearn_iters,
    )?;
    let final_distortion = distortion(&model.sensory, recent_window(&positions))?;
    Ok(Readaptation {
        motor_tau,
        sensory_tau,
        motor_trace,
        sensory_trace,
        final_distortion,
    })
}
