//! Forward and inverse error reports with per-node error grids.

use serde::{Deserialize, Serialize};
use vdsom::{find_bmu, ArmModel, BabbleSample, Decode, GridSpec, NodeIndex, Normalizer, SensorimotorModel};

use crate::error::{AtStage, Result, Stage, StageError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ErrorStats {
    pub mean: f64,
    pub max: f64,
}

#[derive(Default)]
struct Accumulator {
    sum: f64,
    max: f64,
}

impl Accumulator {
    fn add(&mut self, e: f64) {
        self.sum += e;
        self.max = self.max.max(e);
    }

    fn finish(&self, n: usize) -> ErrorStats {
        ErrorStats {
            mean: self.sum / n as f64,
            max: self.max,
        }
    }
}

/// Mean error of the test points whose BMU was each node. Nodes that were
/// never a BMU hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGrid {
    pub rows: usize,
    pub cols: usize,
    pub mean_error: Vec<Option<f64>>,
    pub visits: Vec<usize>,
}

impl NodeGrid {
    fn from_sums(spec: &GridSpec, sums: &[f64], visits: Vec<usize>) -> Self {
        let mean_error = sums
            .iter()
            .zip(&visits)
            .map(|(&s, &v)| (v > 0).then(|| s / v as f64))
            .collect();
        Self {
            rows: spec.rows(),
            cols: spec.cols(),
            mean_error,
            visits,
        }
    }

    /// Row-major values, one inner vector per lattice row.
    pub fn to_rows(&self) -> Vec<Vec<Option<f64>>> {
        self.mean_error.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    /// Visit-weighted mean over all nodes.
    pub fn weighted_mean(&self) -> f64 {
        let (sum, n) = self
            .mean_error
            .iter()
            .zip(&self.visits)
            .filter_map(|(e, &v)| e.map(|e| (e * v as f64, v)))
            .fold((0.0, 0), |(s, n), (e, v)| (s + e, n + v));
        sum / n as f64
    }

    /// Unweighted mean of node errors over visited boundary and interior
    /// nodes, as `(boundary, interior)`.
    pub fn boundary_interior(&self) -> (f64, f64) {
        let spec = GridSpec::new(self.rows, self.cols, 1).expect("grid shape was valid");
        let mut acc = [(0.0, 0usize); 2];
        for (i, e) in self.mean_error.iter().enumerate() {
            if let Some(e) = e {
                let k = spec.is_boundary(NodeIndex(i)) as usize;
                acc[k].0 += e;
                acc[k].1 += 1;
            }
        }
        let mean = |(s, n): (f64, usize)| if n == 0 { f64::NAN } else { s / n as f64 };
        (mean(acc[1]), mean(acc[0]))
    }
}

/// Table-style accuracy report.
///
/// Forward errors are absolute X/Y differences in mm; inverse errors are
/// absolute joint differences in degrees against the generating angles.
/// `motor_grid` holds the Euclidean forward error (mm) at each test point's
/// motor BMU and `sensory_grid` the Euclidean inverse error (degrees) at its
/// sensory BMU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub test_size: usize,
    pub forward_x: ErrorStats,
    pub forward_y: ErrorStats,
    pub forward_norm: ErrorStats,
    pub inverse_theta1: ErrorStats,
    pub inverse_theta2: ErrorStats,
    pub inverse_norm: ErrorStats,
    pub motor_grid: NodeGrid,
    pub sensory_grid: NodeGrid,
}

/// Evaluates forward and inverse queries on `test`. Positions are compared
/// against the arm's forward kinematics, so `test` must come from `arm`.
pub fn evaluate(
    model: &SensorimotorModel,
    arm: &ArmModel,
    norm: &Normalizer,
    test: &[BabbleSample],
    decode: Decode,
) -> Result<ErrorReport> {
    if test.is_empty() {
        return Err(StageError::new(Stage::Evaluate, "test set is empty"));
    }
    let motor_spec = *model.motor.spec();
    let sensory_spec = *model.sensory.spec();
    let mut fx = Accumulator::default();
    let mut fy = Accumulator::default();
    let mut fnorm = Accumulator::default();
    let mut it1 = Accumulator::default();
    let mut it2 = Accumulator::default();
    let mut inorm = Accumulator::default();
    let mut motor_sum = vec![0.0; motor_spec.node_count()];
    let mut motor_visits = vec![0; motor_spec.node_count()];
    let mut sensory_sum = vec![0.0; sensory_spec.node_count()];
    let mut sensory_visits = vec![0; sensory_spec.node_count()];

    for s in test {
        let truth = arm.forward_kinematics(s.joints);
        let p = norm.denormalize_task(model.forward(s.joints_norm, decode).at(Stage::Evaluate)?);
        let (ex, ey) = ((p[0] - truth[0]).abs(), (p[1] - truth[1]).abs());
        let e = ex.hypot(ey);
        fx.add(ex);
        fy.add(ey);
        fnorm.add(e);
        let i = find_bmu(&model.motor, &s.joints_norm).at(Stage::Evaluate)?.get();
        motor_sum[i] += e;
        motor_visits[i] += 1;

        let q = norm.denormalize_joints(model.inverse(s.position_norm, decode).at(Stage::Evaluate)?);
        let (e1, e2) = (
            (q[0] - s.joints[0]).abs().to_degrees(),
            (q[1] - s.joints[1]).abs().to_degrees(),
        );
        let e = e1.hypot(e2);
        it1.add(e1);
        it2.add(e2);
        inorm.add(e);
        let j = find_bmu(&model.sensory, &s.position_norm).at(Stage::Evaluate)?.get();
        sensory_sum[j] += e;
        sensory_visits[j] += 1;
    }
    let n = test.len();
    Ok(ErrorReport {
        test_size: n,
        forward_x: fx.finish(n),
        forward_y: fy.finish(n),
        forward_norm: fnorm.finish(n),
        inverse_theta1: it1.finish(n),
        inverse_theta2: it2.finish(n),
        inverse_norm: inorm.finish(n),
        motor_grid: NodeGrid::from_sums(&motor_spec, &motor_sum, motor_visits),
        sensory_grid: NodeGrid::from_sums(&sensory_spec, &sensory_sum, sensory_visits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: &[Option<f64>], visits: &[usize]) -> NodeGrid {
        NodeGrid {
            rows: 3,
            cols: 3,
            mean_error: values.to_vec(),
            visits: visits.to_vec(),
        }
    }

    #[test]
    fn grid_means() {
        let mut values = vec![Some(2.0); 9];
        values[4] = Some(0.5);
        let mut visits = vec![1; 9];
        visits[4] = 8;
        let g = grid(&values, &visits);
        assert_eq!(g.boundary_interior(), (2.0, 0.5));
        assert!((g.weighted_mean() - (16.0 + 4.0) / 16.0).abs() < 1e-15);
        values[0] = None;
        visits[0] = 0;
        let g = grid(&values, &visits);
        assert!((g.weighted_mean() - (14.0 + 4.0) / 15.0).abs() < 1e-15);
        assert_eq!(g.to_rows()[0], vec![None, Some(2.0), Some(2.0)]);
    }

    #[test]
    fn empty_interior_is_nan() {
        let g = NodeGrid {
            rows: 2,
            cols: 2,
            mean_error: vec![Some(1.0); 4],
            visits: vec![1; 4],
        };
        let (b, i) = g.boundary_interior();
        assert_eq!(b, 1.0);
        assert!(i.is_nan());
    }
}
