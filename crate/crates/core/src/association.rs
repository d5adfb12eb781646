//! Oja-Hebbian links between a motor map and a sensory map.
//!
//! Connection `c_ij` joins motor node `i` to sensory node `j` and follows
//!
//! ```text
//! c_ij ← c_ij + η (a_i a_j − β c_ij a_j²)
//! ```
//!
//! where the activities are Gaussian in weight space. The forgetting term
//! touches every `c_ij` in an active column, so columns carry a lazy scale
//! factor: `c_ij = s_j · u_ij`. Decaying a column is then an update of `s_j`
//! and only the co-active pairs write to `u`. Activities at or below
//! `activity_floor` count as zero, which keeps the matrix sparse; a floor of
//! zero gives the dense rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dist_sq, neighbors_within, NodeIndex, SomMap};
use crate::som::nearest;

/// Bridge training never lets the activity width drop below one lattice step.
pub const SIGMA_FLOOR: f64 = 1.0;

/// Default activity cutoff for sparse training.
pub const DEFAULT_ACTIVITY_FLOOR: f64 = 1e-6;

const RESCALE_LOW: f64 = 1e-100;
const RESCALE_HIGH: f64 = 1e100;

/// Per-node Gaussian activities for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityProfile {
    pub values: Vec<f64>,
}

impl ActivityProfile {
    /// Nodes with activity strictly above `floor`, in index order.
    pub fn support(&self, floor: f64) -> Vec<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > floor)
            .map(|(i, &a)| (i, a))
            .collect()
    }

    pub fn argmax(&self) -> NodeIndex {
        let mut best = 0;
        for (i, &a) in self.values.iter().enumerate() {
            if a > self.values[best] {
                best = i;
            }
        }
        NodeIndex(best)
    }
}

/// `a_j = exp(−‖w_j − x‖² / σ²)` with `σ` in weight-space units.
pub fn activities(map: &SomMap, x: &[f64], sigma: f64) -> Result<ActivityProfile> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    map.check_input(x)?;
    let inv = 1.0 / (sigma * sigma);
    Ok(ActivityProfile {
        values: map.iter_weights().map(|w| (-dist_sq(w, x) * inv).exp()).collect(),
    })
}

fn sparse_activities(map: &SomMap, x: &[f64], sigma: f64, floor: f64) -> Vec<(usize, f64)> {
    let inv = 1.0 / (sigma * sigma);
    // a > floor  <=>  d² < −σ² ln(floor)
    let max_d2 = if floor > 0.0 { -floor.ln() * sigma * sigma } else { f64::INFINITY };
    map.iter_weights()
        .enumerate()
        .filter_map(|(i, w)| {
            let d2 = dist_sq(w, x);
            (d2 <= max_d2).then(|| (i, (-d2 * inv).exp())).filter(|&(_, a)| a > floor)
        })
        .collect()
}

/// Time course of one bridge parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { value: f64 },
    /// `init · exp(−(t + offset) / T)`
    Decay { init: f64, time_constant: f64, offset: f64 },
    /// `init · exp((T − t) / T)`, high at first and settling at `init`.
    Relearn { init: f64, time_constant: f64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Decay {
                init,
                time_constant,
                offset,
            } => init * (-(t + offset) / time_constant).exp(),
            Self::Relearn { init, time_constant } => init * ((time_constant - t) / time_constant).exp(),
        }
    }

    /// Largest value over `t >= 0`.
    fn peak(&self) -> f64 {
        self.value(0.0)
    }
}

/// Schedules for `σ` (lattice units), `η` and `β` during bridge training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeSchedule {
    pub sigma: Schedule,
    pub eta: Schedule,
    pub beta: Schedule,
}

impl BridgeSchedule {
    /// Initial training: `σ` continues the map schedule from where map
    /// training stopped (floored at one lattice step), `η` constant and
    /// `β = 1`.
    pub fn initial(map_sched: &crate::som::TrainingSchedule, eta: f64) -> Self {
        Self {
            sigma: Schedule::Decay {
                init: map_sched.sigma_init,
                time_constant: map_sched.time_constant,
                offset: map_sched.total_iters as f64,
            },
            eta: Schedule::constant(eta),
            beta: Schedule::constant(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eta = self.eta.peak();
        let beta = self.beta.peak();
        if !(eta > 0.0 && beta > 0.0 && self.sigma.peak() > 0.0) {
            return Err(Error::Parameter("bridge schedules must stay positive".into()));
        }
        // |1 − ηβa²| must stay within 1 for a ≤ 1 or the forgetting term
        // oscillates with growing amplitude.
        if eta * beta > 2.0 {
            return Err(Error::Parameter(format!(
                "unstable forgetting: peak eta*beta = {} exceeds 2",
                eta * beta
            )));
        }
        Ok(())
    }
}

/// How a query turns connection strengths into an output vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Decode {
    /// Weight of the single strongest-linked node.
    #[default]
    Argmax,
    /// Connection-weighted mean of node weights within `radius` lattice units
    /// of the strongest-linked node.
    Interpolate { radius: f64 },
}

/// Sparse motor×sensory connection matrix with Oja learning parameters.
///
/// Equality compares effective strengths, not the internal scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "BridgeRecord", try_from = "BridgeRecord")]
pub struct AssociativeBridge {
    motor_nodes: usize,
    sensory_nodes: usize,
    rows: Vec<HashMap<u32, f64>>,
    scale: Vec<f64>,
    pub eta: f64,
    pub beta: f64,
    pub activity_floor: f64,
}

impl PartialEq for AssociativeBridge {
    fn eq(&self, other: &Self) -> bool {
        self.motor_nodes == other.motor_nodes
            && self.sensory_nodes == other.sensory_nodes
            && self.eta == other.eta
            && self.beta == other.beta
            && self.activity_floor == other.activity_floor
            && self.links() == other.links()
    }
}

/// Materialized form used for persistence.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BridgeRecord {
    motor_nodes: usize,
    sensory_nodes: usize,
    eta: f64,
    beta: f64,
    activity_floor: f64,
    /// `(motor, sensory, strength)`, sorted, nonzero only.
    links: Vec<(u32, u32, f64)>,
}

impl From<AssociativeBridge> for BridgeRecord {
    fn from(b: AssociativeBridge) -> Self {
        Self {
            motor_nodes: b.motor_nodes,
            sensory_nodes: b.sensory_nodes,
            eta: b.eta,
            beta: b.beta,
            activity_floor: b.activity_floor,
            links: b.links(),
        }
    }
}

impl TryFrom<BridgeRecord> for AssociativeBridge {
    type Error = Error;

    fn try_from(r: BridgeRecord) -> Result<Self> {
        let mut b = AssociativeBridge::new(r.motor_nodes, r.sensory_nodes, r.eta, r.beta)?;
        b.activity_floor = r.activity_floor;
        for (i, j, c) in r.links {
            b.set_strength(NodeIndex(i as usize), NodeIndex(j as usize), c)?;
        }
        Ok(b)
    }
}

impl AssociativeBridge {
    /// All-zero connections.
    pub fn new(motor_nodes: usize, sensory_nodes: usize, eta: f64, beta: f64) -> Result<Self> {
        if motor_nodes == 0 || sensory_nodes == 0 {
            return Err(Error::Config("bridge needs nodes on both sides".into()));
        }
        if motor_nodes > u32::MAX as usize || sensory_nodes > u32::MAX as usize {
            return Err(Error::Config("bridge side exceeds u32 node count".into()));
        }
        if !(eta > 0.0 && beta > 0.0) {
            return Err(Error::Parameter(format!("eta and beta must be positive, got {eta}, {beta}")));
        }
        Ok(Self {
            motor_nodes,
            sensory_nodes,
            rows: vec![HashMap::new(); motor_nodes],
            scale: vec![1.0; sensory_nodes],
            eta,
            beta,
            activity_floor: DEFAULT_ACTIVITY_FLOOR,
        })
    }

    /// Sized for the two maps.
    pub fn between(motor: &SomMap, sensory: &SomMap, eta: f64) -> Result<Self> {
        Self::new(motor.node_count(), sensory.node_count(), eta, 1.0)
    }

    pub fn motor_nodes(&self) -> usize {
        self.motor_nodes
    }

    pub fn sensory_nodes(&self) -> usize {
        self.sensory_nodes
    }

    pub fn strength(&self, motor: NodeIndex, sensory: NodeIndex) -> f64 {
        self.rows[motor.0]
            .get(&(sensory.0 as u32))
            .map_or(0.0, |u| u * self.scale[sensory.0])
    }

    pub fn set_strength(&mut self, motor: NodeIndex, sensory: NodeIndex, c: f64) -> Result<()> {
        self.check_pair(motor, sensory)?;
        if !c.is_finite() {
            return Err(Error::Parameter(format!("connection strength must be finite, got {c}")));
        }
        let u = c / self.scale[sensory.0];
        let row = &mut self.rows[motor.0];
        if u == 0.0 {
            row.remove(&(sensory.0 as u32));
        } else {
            row.insert(sensory.0 as u32, u);
        }
        Ok(())
    }

    fn check_pair(&self, motor: NodeIndex, sensory: NodeIndex) -> Result<()> {
        if motor.0 >= self.motor_nodes {
            return Err(Error::OutOfBounds {
                index: motor.0,
                count: self.motor_nodes,
            });
        }
        if sensory.0 >= self.sensory_nodes {
            return Err(Error::OutOfBounds {
                index: sensory.0,
                count: self.sensory_nodes,
            });
        }
        Ok(())
    }

    /// Number of stored (possibly nonzero) links.
    pub fn link_count(&self) -> usize {
        self.rows.iter().map(HashMap::len).sum()
    }

    /// Sorted `(motor, sensory, strength)` triples with nonzero strength.
    pub fn links(&self) -> Vec<(u32, u32, f64)> {
        let mut out: Vec<_> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .map(move |(&j, &u)| (i as u32, j, u * self.scale[j as usize]))
            })
            .filter(|&(_, _, c)| c != 0.0)
            .collect();
        out.sort_by_key(|&(i, j, _)| (i, j));
        out
    }

    /// Dense copy of the matrix, row-major by motor node.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.motor_nodes * self.sensory_nodes];
        for (i, j, c) in self.links() {
            out[i as usize * self.sensory_nodes + j as usize] = c;
        }
        out
    }

    /// Strongest sensory link of a motor node; ties go to the lowest index.
    pub fn strongest_sensory(&self, motor: NodeIndex) -> Result<(NodeIndex, f64)> {
        if motor.0 >= self.motor_nodes {
            return Err(Error::OutOfBounds {
                index: motor.0,
                count: self.motor_nodes,
            });
        }
        let mut best: Option<(u32, f64)> = None;
        for (&j, &u) in &self.rows[motor.0] {
            let c = u * self.scale[j as usize];
            best = match best {
                Some((bj, bc)) if bc > c || (bc == c && bj < j) => Some((bj, bc)),
                _ => Some((j, c)),
            };
        }
        match best {
            Some((j, c)) if c > 0.0 => Ok((NodeIndex(j as usize), c)),
            _ => Err(Error::UntrainedLink {
                side: "motor",
                node: motor.0,
            }),
        }
    }

    /// Strongest motor link of a sensory node; ties go to the lowest index.
    pub fn strongest_motor(&self, sensory: NodeIndex) -> Result<(NodeIndex, f64)> {
        if sensory.0 >= self.sensory_nodes {
            return Err(Error::OutOfBounds {
                index: sensory.0,
                count: self.sensory_nodes,
            });
        }
        let key = sensory.0 as u32;
        let s = self.scale[sensory.0];
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(&u) = row.get(&key) {
                let c = u * s;
                if best.map_or(true, |(_, bc)| c > bc) {
                    best = Some((i, c));
                }
            }
        }
        match best {
            Some((i, c)) if c > 0.0 => Ok((NodeIndex(i), c)),
            _ => Err(Error::UntrainedLink {
                side: "sensory",
                node: sensory.0,
            }),
        }
    }

    /// One Oja step over sparse activity supports.
    fn update(&mut self, motor: &[(usize, f64)], sensory: &[(usize, f64)], eta: f64, beta: f64) {
        for &(j, aj) in sensory {
            let factor = 1.0 - eta * beta * aj * aj;
            let mut s = self.scale[j] * factor;
            if s == 0.0 || !(RESCALE_LOW..=RESCALE_HIGH).contains(&s.abs()) {
                self.materialize_column(j, s);
                s = 1.0;
            }
            self.scale[j] = s;
            let gain = eta * aj / s;
            let key = j as u32;
            for &(i, ai) in motor {
                *self.rows[i].entry(key).or_insert(0.0) += gain * ai;
            }
        }
    }

    /// Folds `new_scale` into the stored entries of column `j` and resets its
    /// scale to 1.
    fn materialize_column(&mut self, j: usize, new_scale: f64) {
        let key = j as u32;
        for row in &mut self.rows {
            if let Some(u) = row.get_mut(&key) {
                *u *= new_scale;
                if *u == 0.0 {
                    row.remove(&key);
                }
            }
        }
        self.scale[j] = 1.0;
    }
}

/// `c_ij ← c_ij + η(a_i a_j − β c_ij a_j²)` for every pair, using the
/// bridge's `eta`, `beta` and activity floor.
pub fn oja_step(bridge: &mut AssociativeBridge, motor: &ActivityProfile, sensory: &ActivityProfile) -> Result<()> {
    if motor.values.len() != bridge.motor_nodes {
        return Err(Error::Dimension {
            expected: bridge.motor_nodes,
            got: motor.values.len(),
        });
    }
    if sensory.values.len() != bridge.sensory_nodes {
        return Err(Error::Dimension {
            expected: bridge.sensory_nodes,
            got: sensory.values.len(),
        });
    }
    let floor = bridge.activity_floor;
    let (eta, beta) = (bridge.eta, bridge.beta);
    bridge.update(&motor.support(floor), &sensory.support(floor), eta, beta);
    Ok(())
}

fn check_bridge_maps(bridge: &AssociativeBridge, motor: &SomMap, sensory: &SomMap) -> Result<()> {
    if bridge.motor_nodes != motor.node_count() {
        return Err(Error::Dimension {
            expected: bridge.motor_nodes,
            got: motor.node_count(),
        });
    }
    if bridge.sensory_nodes != sensory.node_count() {
        return Err(Error::Dimension {
            expected: bridge.sensory_nodes,
            got: sensory.node_count(),
        });
    }
    Ok(())
}

/// Presents `iters` pairs (cycling through `pairs` in order) and applies one
/// Oja step per pair. Both maps are frozen. `σ(t)` is in lattice units and is
/// converted with each map's own [`SomMap::lattice_unit`].
pub fn train_bridge<V: AsRef<[f64]>>(
    bridge: &mut AssociativeBridge,
    motor: &SomMap,
    sensory: &SomMap,
    pairs: &[(V, V)],
    schedule: &BridgeSchedule,
    iters: usize,
) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Empty("bridge training pairs"));
    }
    check_bridge_maps(bridge, motor, sensory)?;
    schedule.validate()?;
    for (q, p) in pairs {
        motor.check_input(q.as_ref())?;
        sensory.check_input(p.as_ref())?;
    }
    let motor_unit = motor.lattice_unit();
    let sensory_unit = sensory.lattice_unit();
    let floor = bridge.activity_floor;
    for t in 0..iters {
        let (q, p) = &pairs[t % pairs.len()];
        let tf = t as f64;
        let sigma = schedule.sigma.value(tf).max(SIGMA_FLOOR);
        let a_motor = sparse_activities(motor, q.as_ref(), sigma * motor_unit, floor);
        let a_sensory = sparse_activities(sensory, p.as_ref(), sigma * sensory_unit, floor);
        bridge.update(&a_motor, &a_sensory, schedule.eta.value(tf), schedule.beta.value(tf));
    }
    Ok(())
}

fn decode(map: &SomMap, best: NodeIndex, decode: Decode, strength: impl Fn(NodeIndex) -> f64) -> Result<Vec<f64>> {
    match decode {
        Decode::Argmax => Ok(map.weight(best).to_vec()),
        Decode::Interpolate { radius } => {
            let mut acc = vec![0.0; map.input_dim()];
            let mut total = 0.0;
            for n in neighbors_within(best, radius, map.spec())? {
                let c = strength(n);
                if c > 0.0 {
                    total += c;
                    for (a, w) in acc.iter_mut().zip(map.weight(n)) {
                        *a += c * w;
                    }
                }
            }
            acc.iter_mut().for_each(|a| *a /= total);
            Ok(acc)
        }
    }
}

/// Predicted sensory (task-space) vector for a normalized joint input.
pub fn query_forward(
    bridge: &AssociativeBridge,
    motor: &SomMap,
    sensory: &SomMap,
    joints: &[f64],
    mode: Decode,
) -> Result<Vec<f64>> {
    check_bridge_maps(bridge, motor, sensory)?;
    motor.check_input(joints)?;
    let i = nearest(motor, joints).0;
    let (j, _) = bridge.strongest_sensory(i)?;
    decode(sensory, j, mode, |n| bridge.strength(i, n))
}

/// Motor (joint-space) vector predicted to reach a normalized task point.
pub fn query_inverse(
    bridge: &AssociativeBridge,
    motor: &SomMap,
    sensory: &SomMap,
    task: &[f64],
    mode: Decode,
) -> Result<Vec<f64>> {
    check_bridge_maps(bridge, motor, sensory)?;
    sensory.check_input(task)?;
    let j = nearest(sensory, task).0;
    let (i, _) = bridge.strongest_motor(j)?;
    decode(motor, i, mode, |n| bridge.strength(n, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GridSpec;
    use crate::som::find_bmu;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(values: &[f64]) -> ActivityProfile {
        ActivityProfile { values: values.to_vec() }
    }

    fn dense_bridge(m: usize, s: usize, eta: f64, beta: f64) -> AssociativeBridge {
        let mut b = AssociativeBridge::new(m, s, eta, beta).unwrap();
        b.activity_floor = 0.0;
        b
    }

    /// Direct element-wise evaluation of the update rule.
    fn oja_dense(c: &mut [f64], m: &[f64], s: &[f64], eta: f64, beta: f64) {
        for (i, ai) in m.iter().enumerate() {
            for (j, aj) in s.iter().enumerate() {
                let k = i * s.len() + j;
                c[k] += eta * (ai * aj - beta * c[k] * aj * aj);
            }
        }
    }

    #[test]
    fn activity_examples() {
        let spec = GridSpec::new(2, 2, 2).unwrap();
        let map = SomMap::from_weights(spec, vec![0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        let a = activities(&map, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(a.values[0], 1.0);
        assert!((a.values[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert!(a.values[3] < a.values[1]);
        assert!(activities(&map, &[0.0, 0.0], 0.0).is_err());
        assert!(activities(&map, &[0.0], 1.0).is_err());
    }

    #[test]
    fn oja_examples() {
        let mut b = dense_bridge(1, 1, 0.1, 1.0);
        oja_step(&mut b, &profile(&[1.0]), &profile(&[1.0])).unwrap();
        assert!((b.strength(NodeIndex(0), NodeIndex(0)) - 0.1).abs() < 1e-15);

        let mut b = dense_bridge(1, 1, 0.1, 1.0);
        b.set_strength(NodeIndex(0), NodeIndex(0), 0.5).unwrap();
        oja_step(&mut b, &profile(&[1.0]), &profile(&[1.0])).unwrap();
        assert!((b.strength(NodeIndex(0), NodeIndex(0)) - 0.55).abs() < 1e-15);

        let mut b = dense_bridge(2, 2, 0.1, 1.0);
        b.set_strength(NodeIndex(1), NodeIndex(0), 0.3).unwrap();
        let before = b.clone();
        oja_step(&mut b, &profile(&[1.0, 0.7]), &profile(&[0.0, 0.0])).unwrap();
        assert_eq!(b.links(), before.links());

        assert!(oja_step(&mut b, &profile(&[1.0]), &profile(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn lazy_scaling_matches_dense_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, s) = (4, 3);
        let mut b = dense_bridge(m, s, 0.3, 1.7);
        let mut c = vec![0.0; m * s];
        for _ in 0..5000 {
            let am: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let as_: Vec<f64> = (0..s).map(|_| rng.gen_range(0.0..1.0)).collect();
            oja_dense(&mut c, &am, &as_, 0.3, 1.7);
            oja_step(&mut b, &profile(&am), &profile(&as_)).unwrap();
        }
        for (x, y) in b.to_dense().iter().zip(&c) {
            assert!((x - y).abs() < 1e-10 * y.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn fixed_point_is_ai_over_beta_aj() {
        for &(ai, aj, beta) in &[(1.0, 1.0, 1.0), (0.8, 0.5, 1.0), (0.3, 0.9, 2.5), (0.6, 0.2, 0.7)] {
            let mut b = dense_bridge(1, 1, 0.3, beta);
            let mut prev = f64::NAN;
            for _ in 0..200_000 {
                oja_step(&mut b, &profile(&[ai]), &profile(&[aj])).unwrap();
                let c = b.strength(NodeIndex(0), NodeIndex(0));
                if (c - prev).abs() < 1e-15 {
                    break;
                }
                prev = c;
            }
            let c = b.strength(NodeIndex(0), NodeIndex(0));
            let target = ai / (beta * aj);
            assert!((c - target).abs() < 1e-6, "{c} vs {target}");
        }
    }

    #[test]
    fn bounded_over_many_random_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut b = dense_bridge(3, 3, 0.2, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                b.set_strength(NodeIndex(i), NodeIndex(j), rng.gen_range(0.0..1.0)).unwrap();
            }
        }
        let lo = 0.05;
        let bound = 1.0 / lo;
        for _ in 0..1_000_000 {
            let am = [rng.gen_range(lo..=1.0), rng.gen_range(lo..=1.0), rng.gen_range(lo..=1.0)];
            let as_ = [rng.gen_range(lo..=1.0), rng.gen_range(lo..=1.0), rng.gen_range(lo..=1.0)];
            b.update(
                &am.iter().copied().enumerate().collect::<Vec<_>>(),
                &as_.iter().copied().enumerate().collect::<Vec<_>>(),
                0.2,
                1.0,
            );
        }
        for c in b.to_dense() {
            assert!(c.is_finite() && (0.0..=bound).contains(&c), "{c}");
        }
    }

    fn one_hot_setup() -> (SomMap, SomMap, AssociativeBridge) {
        let spec = GridSpec::new(2, 2, 2).unwrap();
        let motor = SomMap::from_weights(spec, vec![0.1, 0.1, 0.1, 0.9, 0.9, 0.1, 0.9, 0.9]).unwrap();
        let sensory = SomMap::from_weights(spec, vec![0.2, 0.2, 0.2, 0.8, 0.8, 0.2, 0.8, 0.8]).unwrap();
        let mut b = AssociativeBridge::between(&motor, &sensory, 0.3).unwrap();
        b.set_strength(NodeIndex(0), NodeIndex(3), 1.0).unwrap();
        b.set_strength(NodeIndex(2), NodeIndex(1), 1.0).unwrap();
        (motor, sensory, b)
    }

    #[test]
    fn forced_queries() {
        let (motor, sensory, b) = one_hot_setup();
        let p = query_forward(&b, &motor, &sensory, &[0.12, 0.08], Decode::Argmax).unwrap();
        assert_eq!(p, vec![0.8, 0.8]);
        let q = query_inverse(&b, &motor, &sensory, &[0.2, 0.8], Decode::Argmax).unwrap();
        assert_eq!(q, vec![0.9, 0.1]);
        let q = query_inverse(&b, &motor, &sensory, &[0.8, 0.8], Decode::Argmax).unwrap();
        assert_eq!(q, vec![0.1, 0.1]);
        assert!(matches!(
            query_forward(&b, &motor, &sensory, &[0.1, 0.9], Decode::Argmax),
            Err(Error::UntrainedLink { side: "motor", node: 1 })
        ));
        assert!(matches!(
            query_inverse(&b, &motor, &sensory, &[0.2, 0.2], Decode::Argmax),
            Err(Error::UntrainedLink { side: "sensory", node: 0 })
        ));
        let fresh = AssociativeBridge::between(&motor, &sensory, 0.3).unwrap();
        assert!(query_forward(&fresh, &motor, &sensory, &[0.5, 0.5], Decode::Argmax).is_err());
    }

    #[test]
    fn interpolated_query_weights_by_strength() {
        let (motor, sensory, mut b) = one_hot_setup();
        b.set_strength(NodeIndex(0), NodeIndex(1), 0.5).unwrap();
        let p = query_forward(&b, &motor, &sensory, &[0.1, 0.1], Decode::Interpolate { radius: 1.0 }).unwrap();
        // Nodes 3 (0.8, 0.8) and 1 (0.2, 0.8) are both within one step of node 3.
        let expect = [(0.8 * 1.0 + 0.2 * 0.5) / 1.5, 0.8];
        assert!((p[0] - expect[0]).abs() < 1e-15 && (p[1] - expect[1]).abs() < 1e-15);
        let p0 = query_forward(&b, &motor, &sensory, &[0.1, 0.1], Decode::Interpolate { radius: 0.0 }).unwrap();
        assert_eq!(p0, vec![0.8, 0.8]);
    }

    #[test]
    fn training_converges_on_repeated_pair() {
        let spec = GridSpec::new(2, 2, 2).unwrap();
        let motor = SomMap::from_weights(spec, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        let sensory = motor.clone();
        let mut b = AssociativeBridge::between(&motor, &sensory, 0.3).unwrap();
        let pairs = [([0.0, 0.0], [1.0, 1.0])];
        let sched = BridgeSchedule {
            sigma: Schedule::constant(1.0),
            eta: Schedule::constant(0.3),
            beta: Schedule::constant(1.0),
        };
        let before = b.clone();
        train_bridge(&mut b, &motor, &sensory, &pairs, &sched, 0).unwrap();
        assert_eq!(b, before);
        train_bridge(&mut b, &motor, &sensory, &pairs, &sched, 2000).unwrap();
        // a_i = a_j = 1 at the two BMUs.
        assert!((b.strength(NodeIndex(0), NodeIndex(3)) - 1.0).abs() < 1e-9);
        let mut again = AssociativeBridge::between(&motor, &sensory, 0.3).unwrap();
        train_bridge(&mut again, &motor, &sensory, &pairs, &sched, 2000).unwrap();
        assert_eq!(again.links(), b.links());
        let empty: [([f64; 2], [f64; 2]); 0] = [];
        assert!(train_bridge(&mut b, &motor, &sensory, &empty, &sched, 1).is_err());
    }

    #[test]
    fn unstable_schedule_rejected() {
        let sched = BridgeSchedule {
            sigma: Schedule::constant(1.0),
            eta: Schedule::Relearn { init: 0.5, time_constant: 100.0 },
            beta: Schedule::Relearn { init: 1.0, time_constant: 100.0 },
        };
        assert!(sched.validate().is_err());
        let ok = BridgeSchedule {
            eta: Schedule::Relearn { init: 0.1, time_constant: 100.0 },
            ..sched
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn schedule_values() {
        let r = Schedule::Relearn { init: 2.0, time_constant: 50.0 };
        assert!((r.value(50.0) - 2.0).abs() < 1e-15);
        assert!((r.value(0.0) - 2.0 * std::f64::consts::E).abs() < 1e-14);
        let d = Schedule::Decay { init: 10.0, time_constant: 5.0, offset: 5.0 };
        assert!((d.value(0.0) - 10.0 / std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn serde_round_trip_preserves_strengths() {
        let (_, _, b) = one_hot_setup();
        let json = serde_json::to_string(&b).unwrap();
        let back: AssociativeBridge = serde_json::from_str(&json).unwrap();
        assert_eq!(back.links(), b.links());
    }

    proptest! {
        #[test]
        fn activity_peak_is_bmu(seed in any::<u64>(), x in prop::array::uniform2(0.0f64..1.0), sigma in 0.1f64..2.0) {
            let map = SomMap::new(GridSpec::square(9, 2).unwrap(), seed);
            let a = activities(&map, &x, sigma).unwrap();
            prop_assert_eq!(a.argmax(), find_bmu(&map, &x).unwrap());
            prop_assert!(a.values.iter().all(|&v| v > 0.0));
            prop_assert!(a.values.iter().all(|&v| v <= 1.0));
        }
    }
}
