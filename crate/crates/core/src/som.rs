//! Kohonen training: best-matching-unit search, the Gaussian lattice
//! neighborhood, exponential decay schedules and the weight update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::distortion_unchecked;
use crate::error::{Error, Result};
use crate::lattice::{dist_sq, grid_distance_sq, GridSpec, NodeIndex, SomMap};
use crate::density::{self, DensityParams};

/// Neighborhood cutoff, in multiples of sigma, used unless exact mode is
/// requested. Past `3σ` the Gaussian is below `e^-4.5`.
pub const DEFAULT_CUTOFF: f64 = 3.0;

/// Number of trace checkpoints recorded over a training run.
const CHECKPOINTS: usize = 100;

/// Upper bound on the probe set used for trace distortion.
pub const PROBE_SIZE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub alpha_init: f64,
    /// Initial neighborhood radius in lattice units.
    pub sigma_init: f64,
    /// Decay time constant in iterations.
    pub time_constant: f64,
    pub total_iters: usize,
    pub seed: u64,
    /// Skip nodes farther than this many sigmas from the BMU. `None` updates
    /// every node.
    pub cutoff: Option<f64>,
}

impl TrainingSchedule {
    /// `alpha_init = 0.1`, `sigma_init` half the larger grid side and a time
    /// constant that brings sigma down to 1 at the end of the budget.
    pub fn for_grid(spec: &GridSpec, total_iters: usize, seed: u64) -> Self {
        let sigma_init = spec.rows().max(spec.cols()) as f64 / 2.0;
        Self {
            alpha_init: 0.3,
            sigma_init,
            time_constant: default_time_constant(sigma_init, total_iters),
            total_iters,
            seed,
            cutoff: Some(DEFAULT_CUTOFF),
        }
    }

    pub fn exact(mut self) -> Self {
        self.cutoff = None;
        self
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<()> {
        if !(self.alpha_init > 0.0 && self.alpha_init <= 1.0) {
            return Err(Error::Parameter(format!(
                "alpha_init must lie in (0, 1], got {}",
                self.alpha_init
            )));
        }
        let max_side = spec.rows().max(spec.cols()) as f64;
        if !(self.sigma_init > 0.0 && self.sigma_init <= max_side) {
            return Err(Error::Parameter(format!(
                "sigma_init must lie in (0, {max_side}], got {}",
                self.sigma_init
            )));
        }
        if !(self.time_constant > 0.0 && self.time_constant.is_finite()) {
            return Err(Error::Parameter(format!(
                "time constant must be positive, got {}",
                self.time_constant
            )));
        }
        if let Some(c) = self.cutoff {
            if !(c > 0.0) {
                return Err(Error::Parameter(format!("cutoff must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self, t: f64) -> f64 {
        decayed(self.sigma_init, t, self.time_constant)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        decayed(self.alpha_init, t, self.time_constant)
    }

    pub(crate) fn step_at(&self, t: f64) -> StepParams {
        StepParams {
            alpha: self.alpha(t),
            sigma: self.sigma(t),
            time: t,
            time_constant: self.time_constant,
            cutoff: self.cutoff,
        }
    }
}

/// Time constant that takes `sigma_init` to 1 over `total_iters`.
pub fn default_time_constant(sigma_init: f64, total_iters: usize) -> f64 {
    let iters = total_iters.max(1) as f64;
    let ln = sigma_init.ln();
    if ln > 0.0 {
        iters / ln
    } else {
        iters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub distortion: f64,
}

/// Checkpointed training history.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub points: Vec<TracePoint>,
}

impl TrainingTrace {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Option<&TracePoint> {
        self.points.first()
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.points.last()
    }
}

/// `init · exp(−t / T)`.
pub fn decayed(init: f64, t: f64, time_constant: f64) -> f64 {
    init * (-t / time_constant).exp()
}

/// Node whose weight is nearest to `x`; ties go to the lowest index.
pub fn find_bmu(map: &SomMap, x: &[f64]) -> Result<NodeIndex> {
    map.check_input(x)?;
    Ok(nearest(map, x).0)
}

#[inline]
pub(crate) fn nearest(map: &SomMap, x: &[f64]) -> (NodeIndex, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    if let [x0, x1] = *x {
        for (i, w) in map.weights_flat().chunks_exact(2).enumerate() {
            let d0 = w[0] - x0;
            let d1 = w[1] - x1;
            let d = d0 * d0 + d1 * d1;
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
    } else {
        for (i, w) in map.iter_weights().enumerate() {
            let d = dist_sq(w, x);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
    }
    (NodeIndex(best), best_d)
}

/// Gaussian lattice neighborhood `exp(−‖r_j − r_i‖² / 2σ²)`.
pub fn gaussian_neighborhood(j: NodeIndex, bmu: NodeIndex, sigma: f64, spec: &GridSpec) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let d2 = grid_distance_sq(j, bmu, spec)?;
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// Everything one update needs besides the map and the sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepParams {
    pub alpha: f64,
    pub sigma: f64,
    /// Schedule time seen by the density amplitude.
    pub time: f64,
    pub time_constant: f64,
    pub cutoff: Option<f64>,
}

/// One Kohonen update at iteration `t`.
pub fn som_step(map: &mut SomMap, x: &[f64], t: usize, sched: &TrainingSchedule) -> Result<NodeIndex> {
    map.check_input(x)?;
    Ok(apply_step(map, x, &sched.step_at(t as f64), None))
}

/// Moves every node toward `x` by its update factor. The factor is
/// `α·h` for plain maps and `α·(h + min(1, A·h))` with density params, always
/// clamped to `[0, 1]`; all factors are computed from the pre-step weights.
pub(crate) fn apply_step(
    map: &mut SomMap,
    x: &[f64],
    p: &StepParams,
    density: Option<&DensityParams>,
) -> NodeIndex {
    let spec = *map.spec();
    let (bmu, _) = nearest(map, x);
    let amplitude = match density {
        Some(params) if params.amplitude => {
            let rho = density::rho_unchecked(map, bmu, params);
            density::amplitude(p.time, rho, p.sigma, p.time_constant)
        }
        _ => 0.0,
    };
    let two_s2 = 2.0 * p.sigma * p.sigma;
    let (br, bc) = spec.coords(bmu);
    let (r0, r1, c0, c1, reach_sq) = match p.cutoff {
        Some(c) => {
            // Combined factor falls below α·exp(−c²/2) past this radius.
            let reach_sq = p.sigma * p.sigma * (c * c + 2.0 * amplitude.ln_1p());
            let reach = reach_sq.sqrt();
            let lo = |center: usize| (center as f64 - reach).ceil().max(0.0) as usize;
            let hi = |center: usize, n: usize| ((center as f64 + reach).floor() as usize).min(n - 1);
            (lo(br), hi(br, spec.rows()), lo(bc), hi(bc, spec.cols()), reach_sq)
        }
        None => (0, spec.rows() - 1, 0, spec.cols() - 1, f64::INFINITY),
    };
    for r in r0..=r1 {
        let dr = r as f64 - br as f64;
        for c in c0..=c1 {
            let dc = c as f64 - bc as f64;
            let d2 = dr * dr + dc * dc;
            if d2 > reach_sq {
                continue;
            }
            let h = (-d2 / two_s2).exp();
            let factor = if amplitude > 0.0 {
                (p.alpha * (h + (amplitude * h).min(1.0))).min(1.0)
            } else {
                p.alpha * h
            };
            if factor <= 0.0 {
                continue;
            }
            let w = map.weight_mut(spec.index_of(r, c));
            for (wk, &xk) in w.iter_mut().zip(x) {
                let moved = (1.0 - factor) * *wk + factor * xk;
                *wk = moved.clamp(wk.min(xk), wk.max(xk));
            }
        }
    }
    bmu
}

pub(crate) fn check_data<V: AsRef<[f64]>>(map: &SomMap, data: &[V]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    data.iter().try_for_each(|x| map.check_input(x.as_ref()))
}

/// Evenly strided subset of at most [`PROBE_SIZE`] samples.
pub(crate) fn probe_set<V: AsRef<[f64]>>(data: &[V]) -> Vec<&[f64]> {
    let n = data.len();
    let k = n.min(PROBE_SIZE);
    (0..k).map(|i| data[i * n / k].as_ref()).collect()
}

/// Shared training loop. `timeline(t)` supplies the step parameters for
/// iteration `t`; samples are drawn uniformly with replacement.
pub(crate) fn run_training<V, F>(
    map: &mut SomMap,
    data: &[V],
    iters: usize,
    seed: u64,
    density: Option<&DensityParams>,
    timeline: F,
) -> TrainingTrace
where
    V: AsRef<[f64]>,
    F: Fn(usize) -> StepParams,
{
    let mut trace = TrainingTrace::default();
    if iters == 0 {
        return trace;
    }
    let probe = probe_set(data);
    let cadence = (iters / CHECKPOINTS).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let record = |map: &SomMap, t: usize, p: &StepParams, trace: &mut TrainingTrace| {
        trace.points.push(TracePoint {
            iteration: t,
            sigma: p.sigma,
            alpha: p.alpha,
            distortion: distortion_unchecked(map, &probe),
        });
    };
    for t in 0..iters {
        let p = timeline(t);
        if t % cadence == 0 {
            record(map, t, &p, &mut trace);
        }
        let x = data[rng.gen_range(0..data.len())].as_ref();
        apply_step(map, x, &p, density);
    }
    record(map, iters, &timeline(iters), &mut trace);
    trace
}

/// Trains a plain Kohonen map for `sched.total_iters` iterations.
pub fn train_som<V: AsRef<[f64]>>(
    map: &mut SomMap,
    data: &[V],
    sched: &TrainingSchedule,
) -> Result<TrainingTrace> {
    sched.validate(map.spec())?;
    check_data(map, data)?;
    Ok(run_training(map, data, sched.total_iters, sched.seed, None, |t| {
        sched.step_at(t as f64)
    }))
}
