use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use vdsom::{babble_with, derive_seed, perturb, MapVariant, Normalizer, PerturbKind, SensorimotorModel};
use vdsom_harness::csv_io::{heatmap_string, read_babble, write_babble, write_heatmap};
use vdsom_harness::error::{AtStage, Result, Stage, StageError};
use vdsom_harness::scenario::{self, PERTURBED_TEST_DATA, PERTURBED_TRAIN_DATA, TEST_DATA, TRAIN_DATA};
use vdsom_harness::{evaluate, pairs, ErrorReport, ExperimentConfig, Snapshot};

/// Sensorimotor maps for a simulated two-link arm.
#[derive(Parser)]
#[command(name = "vdsom", version)]
struct Cli {
    /// TOML key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set map_iters=50000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Perturbation {
    Stretch,
    Shorten,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Som,
    Vdsom,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Motor,
    Sensory,
}

#[derive(Subcommand)]
enum Command {
    /// Write a motor-babbling dataset as CSV (theta1,theta2,X,Y).
    Babble {
        #[arg(long)]
        out: PathBuf,
        /// Use the test stream and `n_test` samples.
        #[arg(long)]
        test: bool,
        /// Babble with a perturbed arm, using the configured factor.
        #[arg(long)]
        perturb: Option<Perturbation>,
    },
    /// Train both maps and write a snapshot with an empty bridge.
    Train {
        #[arg(long)]
        out: PathBuf,
        /// Babble dataset; generated from the config when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Grid side; defaults to the first of `grid_sizes`.
        #[arg(long)]
        grid: Option<usize>,
        /// Defaults to `som` for the baseline scenario, `vdsom` otherwise.
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Train the bridge of a snapshot with frozen maps.
    Bridge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a snapshot and write an error report as JSON.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Test dataset; generated from the snapshot's arm when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export one per-node error grid of a report as CSV.
    Heatmap {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum, default_value = "motor")]
        map: Side,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured scenario and write all artifacts.
    Scenario {
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a snapshot and print a summary.
    Snapshot { path: PathBuf },
}

fn create(path: &Path, stage: Stage) -> Result<File> {
    File::create(path).map_err(|e| StageError::new(stage, format!("{}: {e}", path.display())))
}

fn open(path: &Path, stage: Stage) -> Result<File> {
    File::open(path).map_err(|e| StageError::new(stage, format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).at(Stage::Export),
    }
}

fn load_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::load(path).map_err(|e| StageError::new(Stage::Snapshot, format!("{}: {e}", path.display())))
}

fn save_snapshot(snap: &Snapshot, path: &Path) -> Result<()> {
    snap.save(path)
        .map_err(|e| StageError::new(Stage::Snapshot, format!("{}: {e}", path.display())))
}

fn samples(cfg: &ExperimentConfig, data: Option<&Path>, norm: &Normalizer, stream: u64, n: usize) -> Result<Vec<vdsom::BabbleSample>> {
    match data {
        Some(p) => read_babble(open(p, Stage::Babble)?, norm),
        None => babble_with(&cfg.arm(), n, derive_seed(cfg.seed, stream), norm).at(Stage::Babble),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Babble { out, test, perturb: p } => {
            let base = cfg.arm();
            let norm = Normalizer::for_arm(&base).at(Stage::Babble)?;
            let (arm, stream) = match p {
                None => (base, if test { TEST_DATA } else { TRAIN_DATA }),
                Some(kind) => {
                    let (kind, factor) = match kind {
                        Perturbation::Stretch => (PerturbKind::Stretch, cfg.stretch_factor),
                        Perturbation::Shorten => (PerturbKind::Shorten, cfg.shorten_factor),
                    };
                    let arm = perturb(&base, kind, cfg.perturb_link, factor).at(Stage::Babble)?;
                    (arm, if test { PERTURBED_TEST_DATA } else { PERTURBED_TRAIN_DATA })
                }
            };
            let n = if test { cfg.n_test } else { cfg.n_train };
            let set = babble_with(&arm, n, derive_seed(cfg.seed, stream), &norm).at(Stage::Babble)?;
            write_babble(&set, create(&out, Stage::Babble)?)
        }
        Command::Train { out, data, grid, variant } => {
            let arm = cfg.arm();
            let norm = Normalizer::for_arm(&arm).at(Stage::Train)?;
            let train = samples(&cfg, data.as_deref(), &norm, TRAIN_DATA, cfg.n_train)?;
            let variant = match variant {
                None => cfg.variant(),
                Some(Variant::Som) => MapVariant::Som,
                Some(Variant::Vdsom) => MapVariant::Vdsom(cfg.density()),
            };
            let side = grid.unwrap_or(cfg.grid_sizes[0]);
            let mut model = SensorimotorModel::untrained(cfg.model_config(side, variant)).at(Stage::Train)?;
            let joints: Vec<_> = train.iter().map(|s| s.joints_norm).collect();
            let positions: Vec<_> = train.iter().map(|s| s.position_norm).collect();
            model.train_maps(&joints, &positions).at(Stage::Train)?;
            save_snapshot(&Snapshot::new(arm, norm, model), &out)
        }
        Command::Bridge { model, data, out } => {
            let mut snap = load_snapshot(&model)?;
            let train = samples(&cfg, data.as_deref(), &snap.normalizer, TRAIN_DATA, cfg.n_train)?;
            let m = &mut snap.model;
            m.config.bridge_eta = cfg.bridge_eta;
            m.config.bridge_iters = cfg.bridge_iters;
            m.config.activity_floor = cfg.activity_floor;
            m.train_bridge(&pairs(&train)).at(Stage::Bridge)?;
            save_snapshot(&snap, &out)
        }
        Command::Eval { model, data, out } => {
            let snap = load_snapshot(&model)?;
            let test = match data {
                Some(p) => read_babble(open(&p, Stage::Evaluate)?, &snap.normalizer)?,
                None => babble_with(&snap.arm, cfg.n_test, derive_seed(cfg.seed, TEST_DATA), &snap.normalizer)
                    .at(Stage::Babble)?,
            };
            let report = evaluate(&snap.model, &snap.arm, &snap.normalizer, &test, cfg.decode())?;
            output(out.as_deref(), &(serde_json::to_string_pretty(&report).at(Stage::Export)? + "\n"))
        }
        Command::Heatmap { report, map, out } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| StageError::new(Stage::Export, format!("{}: {e}", report.display())))?;
            let report: ErrorReport = serde_json::from_str(&text).at(Stage::Export)?;
            let grid = match map {
                Side::Motor => &report.motor_grid,
                Side::Sensory => &report.sensory_grid,
            };
            let rows = grid.to_rows();
            match out {
                Some(p) => write_heatmap(&rows, create(&p, Stage::Export)?),
                None => output(None, &heatmap_string(&rows)),
            }
        }
        Command::Scenario { out } => {
            let mut cfg = cfg;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let runs = scenario::run_scenario(&cfg)?;
            let summary: Vec<_> = runs
                .iter()
                .map(|r| {
                    json!({
                        "grid": r.side,
                        "dir": r.dir,
                        "train_seconds": r.train_time.as_secs_f64(),
                        "accuracy": scenario::Accuracy::from(&r.report),
                        "adaptation": r.adaptation,
                    })
                })
                .collect();
            output(None, &(serde_json::to_string_pretty(&summary).at(Stage::Export)? + "\n"))
        }
        Command::Snapshot { path } => {
            let snap = load_snapshot(&path)?;
            let m = &snap.model;
            let summary = json!({
                "schema_version": snap.schema_version,
                "rows": m.config.rows,
                "cols": m.config.cols,
                "variant": m.config.variant,
                "seed": m.config.seed,
                "links": m.bridge.link_count(),
                "arm": snap.arm,
            });
            output(None, &(serde_json::to_string_pretty(&summary).at(Stage::Export)? + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
