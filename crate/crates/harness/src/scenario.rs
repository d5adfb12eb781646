//! End-to-end experiment runs: babble, train, evaluate, export, and for the
//! perturbation scenarios detect the change and re-adapt.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use vdsom::{
    babble_with, derive_seed, distortion, perturb, recent_window, run_readaptation, ArmModel, BabbleSample,
    MapVariant, Normalizer, PerturbKind, SensorimotorModel, TauResolution, DISTORTION_WINDOW,
};

use crate::config::{ExperimentConfig, Scenario};
use crate::csv_io::{trace_points, write_heatmap, write_trace};
use crate::error::{AtStage, Result, Stage, StageError};
use crate::report::{evaluate, ErrorReport, ErrorStats};
use crate::snapshot::Snapshot;

/// Seed streams for the babble datasets.
pub const TRAIN_DATA: u64 = 101;
pub const TEST_DATA: u64 = 102;
pub const PERTURBED_TRAIN_DATA: u64 = 103;
pub const PERTURBED_TEST_DATA: u64 = 104;

/// Number of pre-change windows included in the monitoring trace.
const MONITOR_WINDOWS_BEFORE: usize = 5;

/// Name of the marker file left in a scenario directory when a stage fails.
pub const FAILURE_MARKER: &str = "FAILED";

pub type Pairs = Vec<([f64; 2], [f64; 2])>;

pub fn pairs(samples: &[BabbleSample]) -> Pairs {
    samples.iter().map(|s| (s.joints_norm, s.position_norm)).collect()
}

/// Training and test babble for one arm, normalized by the arm's workspace.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub arm: ArmModel,
    pub normalizer: Normalizer,
    pub train: Vec<BabbleSample>,
    pub test: Vec<BabbleSample>,
}

pub fn datasets(cfg: &ExperimentConfig) -> Result<Datasets> {
    let arm = cfg.arm();
    let normalizer = Normalizer::for_arm(&arm).at(Stage::Babble)?;
    let train = babble_with(&arm, cfg.n_train, derive_seed(cfg.seed, TRAIN_DATA), &normalizer).at(Stage::Babble)?;
    let test = babble_with(&arm, cfg.n_test, derive_seed(cfg.seed, TEST_DATA), &normalizer).at(Stage::Babble)?;
    Ok(Datasets {
        arm,
        normalizer,
        train,
        test,
    })
}

/// Trains both maps and then the bridge.
pub fn train_model(cfg: &ExperimentConfig, side: usize, variant: MapVariant, data: &[BabbleSample]) -> Result<SensorimotorModel> {
    let mut model = SensorimotorModel::untrained(cfg.model_config(side, variant)).at(Stage::Train)?;
    let joints: Vec<_> = data.iter().map(|s| s.joints_norm).collect();
    let positions: Vec<_> = data.iter().map(|s| s.position_norm).collect();
    model.train_maps(&joints, &positions).at(Stage::Train)?;
    model.train_bridge(&pairs(data)).at(Stage::Bridge)?;
    Ok(model)
}

/// Mean and max errors without the per-node grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub forward_x: ErrorStats,
    pub forward_y: ErrorStats,
    pub inverse_theta1: ErrorStats,
    pub inverse_theta2: ErrorStats,
}

impl From<&ErrorReport> for Accuracy {
    fn from(r: &ErrorReport) -> Self {
        Self {
            forward_x: r.forward_x,
            forward_y: r.forward_y,
            inverse_theta1: r.inverse_theta1,
            inverse_theta2: r.inverse_theta2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationSummary {
    pub kind: PerturbKind,
    pub link: u8,
    pub factor: f64,
    /// Sensory distortion on the last training window.
    pub zeta_before: f64,
    pub threshold: f64,
    /// Largest monitored distortion after the change.
    pub zeta_peak: f64,
    pub triggered: bool,
    /// Index in the post-change stream of the sample that completed the
    /// triggering window.
    pub trigger_sample: Option<usize>,
    pub relearn_iters: usize,
    pub motor_tau: Option<TauResolution>,
    pub sensory_tau: Option<TauResolution>,
    /// Sensory distortion on the most recent window after relearning.
    pub zeta_after: Option<f64>,
    /// Accuracy on the new morphology before relearning.
    pub unadapted: Accuracy,
    pub adapted: Option<Accuracy>,
    /// A fresh model trained on the new morphology with the relearning
    /// budget.
    pub scratch: Option<Accuracy>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub side: usize,
    pub report: ErrorReport,
    pub model: SensorimotorModel,
    /// Map and bridge training time.
    pub train_time: Duration,
    pub adaptation: Option<AdaptationSummary>,
    pub dir: PathBuf,
}

pub fn scenario_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.join(cfg.scenario.name())
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).at(Stage::Export)?;
    text.push('\n');
    write_file(path, text)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", path.display())))
}

fn export_run(dir: &Path, report: &ErrorReport, model: &SensorimotorModel, arm: ArmModel, norm: Normalizer, prefix: &str) -> Result<()> {
    write_json(&dir.join(format!("{prefix}report.json")), report)?;
    write_heatmap(&report.motor_grid.to_rows(), create(&dir.join(format!("{prefix}heatmap_motor.csv")))?)?;
    write_heatmap(&report.sensory_grid.to_rows(), create(&dir.join(format!("{prefix}heatmap_sensory.csv")))?)?;
    Snapshot::new(arm, norm, model.clone())
        .save(&dir.join(format!("{prefix}snapshot.json")))
        .at(Stage::Snapshot)
}

/// Runs the configured scenario for every grid size, writing artifacts under
/// `output_dir/<scenario>/<n>x<n>/`. On failure a marker file with the
/// stage-labeled message is left next to whatever was already written.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    let root = scenario_dir(cfg);
    let result = fs::create_dir_all(&root)
        .map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", root.display())))
        .and_then(|_| run_all(cfg, &root));
    if let Err(e) = &result {
        // Best effort: the stage error is what the caller needs to see.
        let _ = fs::write(root.join(FAILURE_MARKER), format!("{e}\n"));
    } else {
        let _ = fs::remove_file(root.join(FAILURE_MARKER));
    }
    result
}

fn run_all(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    write_file(&root.join("config.toml"), cfg.to_toml())?;
    let data = datasets(cfg)?;
    cfg.grid_sizes.iter().map(|&side| run_one(cfg, root, side, &data)).collect()
}

fn run_one(cfg: &ExperimentConfig, root: &Path, side: usize, data: &Datasets) -> Result<RunOutcome> {
    let dir = root.join(format!("{side}x{side}"));
    fs::create_dir_all(&dir).map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", dir.display())))?;
    let start = Instant::now();
    let mut model = train_model(cfg, side, cfg.variant(), &data.train)?;
    let train_time = start.elapsed();
    write_trace(trace_points(&model.motor_trace), create(&dir.join("trace_motor.csv"))?)?;
    write_trace(trace_points(&model.sensory_trace), create(&dir.join("trace_sensory.csv"))?)?;
    let report = evaluate(&model, &data.arm, &data.normalizer, &data.test, cfg.decode())?;
    export_run(&dir, &report, &model, data.arm, data.normalizer, "")?;

    let adaptation = match cfg.scenario {
        Scenario::Stretch => Some(adapt(cfg, &dir, &mut model, data, PerturbKind::Stretch, cfg.stretch_factor)?),
        Scenario::Shorten => Some(adapt(cfg, &dir, &mut model, data, PerturbKind::Shorten, cfg.shorten_factor)?),
        Scenario::BaselineSom | Scenario::Vdsom => None,
    };
    Ok(RunOutcome {
        side,
        report,
        model,
        train_time,
        adaptation,
        dir,
    })
}

fn adapt(
    cfg: &ExperimentConfig,
    dir: &Path,
    model: &mut SensorimotorModel,
    data: &Datasets,
    kind: PerturbKind,
    factor: f64,
) -> Result<AdaptationSummary> {
    let new_arm = perturb(&data.arm, kind, cfg.perturb_link, factor).at(Stage::Adapt)?;
    // The sensor calibration stays frozen at the original workspace.
    let norm = data.normalizer;
    let stream = babble_with(&new_arm, cfg.n_train, derive_seed(cfg.seed, PERTURBED_TRAIN_DATA), &norm).at(Stage::Babble)?;
    let test = babble_with(&new_arm, cfg.n_test, derive_seed(cfg.seed, PERTURBED_TEST_DATA), &norm).at(Stage::Babble)?;

    let positions = |s: &[BabbleSample]| s.iter().map(|s| s.position_norm).collect::<Vec<_>>();
    let old_positions = positions(&data.train);
    let new_positions = positions(&stream);
    let zeta_before = distortion(&model.sensory, recent_window(&old_positions)).at(Stage::Adapt)?;
    let final_zeta = model
        .sensory_trace
        .last()
        .ok_or_else(|| StageError::new(Stage::Adapt, "sensory map has no training trace"))?
        .distortion;
    let threshold = cfg.threshold_factor * final_zeta;
    let relearn_iters = cfg.relearn_iters();
    let mut controller = model
        .controller(threshold, cfg.beta_init, cfg.eta_init, relearn_iters)
        .at(Stage::Adapt)?;

    // Monitor non-overlapping windows: a few from before the change, then
    // the new stream until the trigger fires.
    let mut monitor = Vec::new();
    let pre_start = old_positions.len().saturating_sub(MONITOR_WINDOWS_BEFORE * DISTORTION_WINDOW);
    for (k, w) in old_positions[pre_start..].chunks(DISTORTION_WINDOW).enumerate() {
        monitor.push((k * DISTORTION_WINDOW + w.len(), distortion(&model.sensory, w).at(Stage::Adapt)?));
    }
    let offset = old_positions.len() - pre_start;
    let mut trigger_sample = None;
    let mut zeta_peak = 0.0f64;
    for (k, w) in new_positions.chunks(DISTORTION_WINDOW).enumerate() {
        let z = distortion(&model.sensory, w).at(Stage::Adapt)?;
        let end = k * DISTORTION_WINDOW + w.len();
        monitor.push((offset + end, z));
        zeta_peak = zeta_peak.max(z);
        if controller.detect_change(z) {
            trigger_sample = Some(end);
            break;
        }
    }
    write_trace(monitor, create(&dir.join("distortion_monitor.csv"))?)?;

    let unadapted = evaluate(model, &new_arm, &norm, &test, cfg.decode())?;
    let mut summary = AdaptationSummary {
        kind,
        link: cfg.perturb_link,
        factor,
        zeta_before,
        threshold,
        zeta_peak,
        triggered: trigger_sample.is_some(),
        trigger_sample,
        relearn_iters,
        motor_tau: None,
        sensory_tau: None,
        zeta_after: None,
        unadapted: Accuracy::from(&unadapted),
        adapted: None,
        scratch: None,
    };
    if summary.triggered {
        let r = run_readaptation(model, &pairs(&stream), &mut controller).at(Stage::Adapt)?;
        write_trace(trace_points(&r.sensory_trace), create(&dir.join("distortion_relearn.csv"))?)?;
        write_trace(trace_points(&r.motor_trace), create(&dir.join("distortion_relearn_motor.csv"))?)?;
        let adapted = evaluate(model, &new_arm, &norm, &test, cfg.decode())?;
        export_run(dir, &adapted, model, new_arm, norm, "adapted_")?;
        summary.motor_tau = Some(r.motor_tau);
        summary.sensory_tau = Some(r.sensory_tau);
        summary.zeta_after = Some(r.final_distortion);
        summary.adapted = Some(Accuracy::from(&adapted));
    }
    if cfg.compare_scratch {
        let mut scratch_cfg = cfg.clone();
        scratch_cfg.map_iters = relearn_iters;
        scratch_cfg.bridge_iters = relearn_iters;
        let scratch = train_model(&scratch_cfg, model.config.rows, model.config.variant, &stream)?;
        let report = evaluate(&scratch, &new_arm, &norm, &test, cfg.decode())?;
        summary.scratch = Some(Accuracy::from(&report));
    }
    write_json(&dir.join("adaptation.json"), &summary)?;
    Ok(summary)
}
