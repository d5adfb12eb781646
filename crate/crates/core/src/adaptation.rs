//! Distortion monitoring and the re-adaptation protocol that follows a
//! detected change in the sensorimotor model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SomMap;
use crate::som::{nearest, TrainingSchedule, TrainingTrace};

/// Mean squared distance from each datum to its best-matching node.
pub fn distortion<V: AsRef<[f64]>>(map: &SomMap, data: &[V]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("distortion data"));
    }
    data.iter().try_for_each(|x| map.check_input(x.as_ref()))?;
    Ok(distortion_unchecked(map, data))
}

pub(crate) fn distortion_unchecked<V: AsRef<[f64]>>(map: &SomMap, data: &[V]) -> f64 {
    let sum: f64 = data.iter().map(|x| nearest(map, x.as_ref()).1).sum();
    sum / data.len() as f64
}

/// Where on the original schedule re-learning resumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauResolution {
    /// Checkpoint iteration whose recorded distortion best matches the
    /// current one.
    pub tau: usize,
    /// Set when the current distortion exceeds the distortion at the start
    /// of training; re-learning then starts from the full map radius.
    pub max_radius: bool,
    pub distortion: f64,
}

/// Nearest trace checkpoint by distortion (ties go to the earlier one).
pub fn resolve_tau(history: &TrainingTrace, zeta_now: f64) -> Result<TauResolution> {
    let first = history
        .first()
        .ok_or_else(|| Error::State("training history is empty".into()))?;
    if zeta_now > first.distortion {
        return Ok(TauResolution {
            tau: 0,
            max_radius: true,
            distortion: zeta_now,
        });
    }
    let mut best = first;
    for p in &history.points[1..] {
        if (p.distortion - zeta_now).abs() < (best.distortion - zeta_now).abs() {
            best = p;
        }
    }
    Ok(TauResolution {
        tau: best.iteration,
        max_radius: false,
        distortion: zeta_now,
    })
}

/// Parameter values at relearning step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelearnPoint {
    /// Neighborhood radius in lattice units.
    pub sigma: f64,
    pub alpha: f64,
    /// Position on the original schedule that `sigma` and `alpha` come from.
    pub schedule_time: f64,
    pub beta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationController {
    /// Distortion above which a change is declared.
    pub threshold: f64,
    pub beta_init: f64,
    pub eta_init: f64,
    /// Iterations of map retraining, and of bridge retraining.
    pub relearn_iters: usize,
    /// Original schedule of the monitored map.
    pub schedule: TrainingSchedule,
    /// Full map radius in lattice units.
    pub map_radius: f64,
    tau: Option<TauResolution>,
}

impl AdaptationController {
    pub fn new(
        threshold: f64,
        schedule: TrainingSchedule,
        map_radius: f64,
        beta_init: f64,
        eta_init: f64,
        relearn_iters: usize,
    ) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::Parameter(format!("threshold must be >= 0, got {threshold}")));
        }
        if !(beta_init > 0.0 && eta_init > 0.0) {
            return Err(Error::Parameter(format!(
                "beta_init and eta_init must be positive, got {beta_init}, {eta_init}"
            )));
        }
        if relearn_iters == 0 {
            return Err(Error::Parameter("relearn_iters must be at least 1".into()));
        }
        if !(map_radius > 0.0) {
            return Err(Error::Parameter(format!("map radius must be positive, got {map_radius}")));
        }
        Ok(Self {
            threshold,
            beta_init,
            eta_init,
            relearn_iters,
            schedule,
            map_radius,
            tau: None,
        })
    }

    /// Strict exceedance of the threshold.
    pub fn detect_change(&self, zeta: f64) -> bool {
        zeta > self.threshold
    }

    pub fn tau(&self) -> Option<TauResolution> {
        self.tau
    }

    /// Resolves and stores `τ` for the monitored map.
    pub fn resolve(&mut self, history: &TrainingTrace, zeta_now: f64) -> Result<TauResolution> {
        let res = resolve_tau(history, zeta_now)?;
        self.tau = Some(res);
        Ok(res)
    }

    /// Schedules at step `t` with the stored `τ`.
    pub fn relearn_schedules(&self, t: f64) -> Result<RelearnPoint> {
        let tau = self
            .tau
            .ok_or_else(|| Error::State("tau has not been resolved; no change was triggered".into()))?;
        Ok(self.relearn_schedules_for(&tau, &self.schedule, t))
    }

    /// `σ_r` and `α` follow the original schedule from `τ` to its end,
    /// compressed into `relearn_iters` steps:
    /// `σ_r(t) = σ_init · exp(−(t' + τ)/T)` with `t' = t·(N − τ)/relearn_iters`.
    /// With the max-radius flag the whole schedule replays from the map
    /// radius. `β` and `η` follow `init · exp((T_r − t)/T_r)` with
    /// `T_r = relearn_iters`.
    pub fn relearn_schedules_for(&self, tau: &TauResolution, sched: &TrainingSchedule, t: f64) -> RelearnPoint {
        let n = sched.total_iters as f64;
        let steps = self.relearn_iters as f64;
        let (start, sigma0) = if tau.max_radius {
            (0.0, self.map_radius)
        } else {
            (tau.tau as f64, sched.sigma_init)
        };
        let schedule_time = start + t * (n - start).max(0.0) / steps;
        let decay = (-schedule_time / sched.time_constant).exp();
        let growth = ((steps - t) / steps).exp();
        RelearnPoint {
            sigma: sigma0 * decay,
            alpha: sched.alpha_init * decay,
            schedule_time,
            beta: self.beta_init * growth,
            eta: self.eta_init * growth,
        }
    }
}
