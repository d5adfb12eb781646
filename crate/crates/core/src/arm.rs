//! Simulated two-link planar arm: forward kinematics, motor babbling,
//! normalization and link-length perturbations.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Link lengths in millimetres and joint ranges in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub l1: f64,
    pub l2: f64,
    pub theta1_range: (f64, f64),
    pub theta2_range: (f64, f64),
}

impl Default for ArmModel {
    fn default() -> Self {
        Self {
            l1: 150.0,
            l2: 150.0,
            theta1_range: (0.0, FRAC_PI_2),
            theta2_range: (PI / 9.0, 5.0 * PI / 6.0),
        }
    }
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        for (name, len) in [("l1", self.l1), ("l2", self.l2)] {
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {len}")));
            }
        }
        for (name, (lo, hi)) in [("theta1", self.theta1_range), ("theta2", self.theta2_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Config(format!("{name} range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    pub fn reach(&self) -> f64 {
        self.l1 + self.l2
    }

    pub fn forward_kinematics(&self, joints: [f64; 2]) -> [f64; 2] {
        forward_kinematics(self, joints)
    }
}

/// End-effector position `(X, Y)` for joint angles `(θ1, θ2)`, with θ2
/// measured relative to the first link.
pub fn forward_kinematics(arm: &ArmModel, joints: [f64; 2]) -> [f64; 2] {
    let [t1, t2] = joints;
    let (s1, c1) = t1.sin_cos();
    let (s12, c12) = (t1 + t2).sin_cos();
    [arm.l1 * c1 + arm.l2 * c12, arm.l1 * s1 + arm.l2 * s12]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbKind {
    Stretch,
    Shorten,
}

/// Scales one link's length. Stretching needs `factor >= 1`, shortening
/// `factor <= 1`.
pub fn perturb(arm: &ArmModel, kind: PerturbKind, link: u8, factor: f64) -> Result<ArmModel> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Parameter(format!("perturbation factor must be positive, got {factor}")));
    }
    match kind {
        PerturbKind::Stretch if factor < 1.0 => {
            return Err(Error::Parameter(format!("stretch needs factor >= 1, got {factor}")))
        }
        PerturbKind::Shorten if factor > 1.0 => {
            return Err(Error::Parameter(format!("shorten needs factor <= 1, got {factor}")))
        }
        _ => {}
    }
    let mut out = *arm;
    match link {
        1 => out.l1 *= factor,
        2 => out.l2 *= factor,
        other => return Err(Error::Parameter(format!("link must be 1 or 2, got {other}"))),
    }
    Ok(out)
}

/// Per-dimension `(min, max)` bounds mapping joint and task space onto the
/// unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub joints: [(f64, f64); 2],
    pub task: [(f64, f64); 2],
}

impl Normalizer {
    pub fn new(joints: [(f64, f64); 2], task: [(f64, f64); 2]) -> Result<Self> {
        for (lo, hi) in joints.iter().chain(&task) {
            if !(hi > lo && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Config(format!("normalizer bound [{lo}, {hi}] is empty")));
            }
        }
        Ok(Self { joints, task })
    }

    /// Joint bounds are the configured ranges; task bounds are the exact
    /// extremes of X and Y over the joint box.
    pub fn for_arm(arm: &ArmModel) -> Result<Self> {
        arm.validate()?;
        Self::new([arm.theta1_range, arm.theta2_range], workspace_bounds(arm))
    }

    pub fn normalize_joints(&self, q: [f64; 2]) -> [f64; 2] {
        scale(q, &self.joints)
    }

    pub fn denormalize_joints(&self, q: [f64; 2]) -> [f64; 2] {
        unscale(q, &self.joints)
    }

    pub fn normalize_task(&self, p: [f64; 2]) -> [f64; 2] {
        scale(p, &self.task)
    }

    pub fn denormalize_task(&self, p: [f64; 2]) -> [f64; 2] {
        unscale(p, &self.task)
    }
}

fn scale(v: [f64; 2], b: &[(f64, f64); 2]) -> [f64; 2] {
    [(v[0] - b[0].0) / (b[0].1 - b[0].0), (v[1] - b[1].0) / (b[1].1 - b[1].0)]
}

fn unscale(v: [f64; 2], b: &[(f64, f64); 2]) -> [f64; 2] {
    [b[0].0 + v[0] * (b[0].1 - b[0].0), b[1].0 + v[1] * (b[1].1 - b[1].0)]
}

/// Exact `[(x_min, x_max), (y_min, y_max)]` of the reachable workspace.
///
/// Extremes of X and Y over the joint rectangle sit at corners, at
/// stationary points along an edge, or at interior stationary points. Along a
/// θ1 edge the stationary θ2 satisfy `θ1 + θ2 ∈ kπ/2`; along a θ2 edge the
/// position is a rotated phasor and the stationary θ1 are `−φ + kπ/2`;
/// interior stationary points have `θ1 ∈ kπ/2`.
pub fn workspace_bounds(arm: &ArmModel) -> [(f64, f64); 2] {
    let (a1, b1) = arm.theta1_range;
    let (a2, b2) = arm.theta2_range;
    let in1 = |t: f64| t >= a1 && t <= b1;
    let in2 = |t: f64| t >= a2 && t <= b2;
    let quarter_turns = |lo: f64, hi: f64| {
        let k0 = (lo / FRAC_PI_2).ceil() as i64;
        let k1 = (hi / FRAC_PI_2).floor() as i64;
        (k0..=k1).map(|k| k as f64 * FRAC_PI_2)
    };

    let mut theta1 = vec![a1, b1];
    theta1.extend(quarter_turns(a1, b1));
    for t2 in [a2, b2] {
        // l1 + l2 e^{iθ2} = R e^{iφ}
        let phi = (arm.l2 * t2.sin()).atan2(arm.l1 + arm.l2 * t2.cos());
        theta1.extend(quarter_turns(a1 + phi, b1 + phi).map(|s| s - phi).filter(|&t| in1(t)));
    }

    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for &t1 in &theta1 {
        let mut theta2 = vec![a2, b2];
        theta2.extend(quarter_turns(a2 + t1, b2 + t1).map(|s| s - t1).filter(|&t| in2(t)));
        for t2 in theta2 {
            let [x, y] = forward_kinematics(arm, [t1, t2]);
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    [xs, ys]
}

/// One motor-babbling observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BabbleSample {
    pub joints: [f64; 2],
    pub position: [f64; 2],
    pub joints_norm: [f64; 2],
    pub position_norm: [f64; 2],
}

impl BabbleSample {
    pub fn observe(arm: &ArmModel, joints: [f64; 2], norm: &Normalizer) -> Self {
        let position = forward_kinematics(arm, joints);
        Self {
            joints,
            position,
            joints_norm: norm.normalize_joints(joints),
            position_norm: norm.normalize_task(position),
        }
    }
}

/// Babbled samples together with the bounds used to normalize them.
#[derive(Debug, Clone, PartialEq)]
pub struct BabbleSet {
    pub samples: Vec<BabbleSample>,
    pub normalizer: Normalizer,
}

impl BabbleSet {
    pub fn joints_norm(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| s.joints_norm).collect()
    }

    pub fn positions_norm(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| s.position_norm).collect()
    }
}

/// `n` samples with joints uniform over the arm's ranges, normalized by the
/// arm's own workspace bounds.
pub fn babble(arm: &ArmModel, n: usize, seed: u64) -> Result<BabbleSet> {
    let normalizer = Normalizer::for_arm(arm)?;
    let samples = babble_with(arm, n, seed, &normalizer)?;
    Ok(BabbleSet { samples, normalizer })
}

/// Like [`babble`] but normalizes with fixed, previously frozen bounds.
pub fn babble_with(arm: &ArmModel, n: usize, seed: u64, norm: &Normalizer) -> Result<Vec<BabbleSample>> {
    arm.validate()?;
    if n == 0 {
        return Err(Error::Empty("babble count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a1, b1) = arm.theta1_range;
    let (a2, b2) = arm.theta2_range;
    Ok((0..n)
        .map(|_| {
            let q = [rng.gen_range(a1..=b1), rng.gen_range(a2..=b2)];
            BabbleSample::observe(arm, q, norm)
        })
        .collect())
}
