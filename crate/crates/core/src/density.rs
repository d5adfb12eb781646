//! Varying-density maps.
//!
//! The BMU's node density coefficient `ρ = exp(−Σ_O ‖w_bmu − w_i‖²)` over its
//! local lattice neighborhood `O` scales a late-onset amplitude
//!
//! ```text
//! A(t, ρ) = (t / (ρ T))⁴ · exp(−t / (σ(t)² T))
//! ```
//!
//! that multiplies the spatial Gaussian and is added to the ordinary Kohonen
//! neighborhood. Sparse regions (small `ρ`) get a stronger pull, so nodes
//! migrate toward them as training proceeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dist_sq, grid_distance_sq, GridSpec, NodeIndex, SomMap};
use crate::som::{check_data, run_training, TrainingSchedule, TrainingTrace};

/// Power of the onset term.
pub const ONSET_EXPONENT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Lattice radius of the neighborhood `O` around the BMU.
    pub local_radius: f64,
    /// Lower clamp for `ρ`.
    pub rho_floor: f64,
    /// When false the density term is off and training is plain Kohonen.
    pub amplitude: bool,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            local_radius: 1.0,
            rho_floor: 0.05,
            amplitude: true,
        }
    }
}

impl DensityParams {
    pub fn disabled() -> Self {
        Self {
            amplitude: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.local_radius > 0.0 && self.local_radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "local_radius must be positive, got {}",
                self.local_radius
            )));
        }
        if !(self.rho_floor > 0.0 && self.rho_floor < 1.0) {
            return Err(Error::Parameter(format!(
                "rho_floor must lie in (0, 1), got {}",
                self.rho_floor
            )));
        }
        Ok(())
    }
}

/// Node density coefficient around `bmu`, clamped below at `rho_floor`.
pub fn density_coefficient(map: &SomMap, bmu: NodeIndex, params: &DensityParams) -> Result<f64> {
    map.spec().check(bmu)?;
    params.validate()?;
    Ok(rho_unchecked(map, bmu, params))
}

pub(crate) fn rho_unchecked(map: &SomMap, bmu: NodeIndex, params: &DensityParams) -> f64 {
    let spec = map.spec();
    let (br, bc) = spec.coords(bmu);
    let reach = params.local_radius.floor() as usize;
    let r2 = params.local_radius * params.local_radius;
    let center = map.weight(bmu);
    let mut sum = 0.0;
    for r in br.saturating_sub(reach)..=(br + reach).min(spec.rows() - 1) {
        for c in bc.saturating_sub(reach)..=(bc + reach).min(spec.cols() - 1) {
            let dr = r as f64 - br as f64;
            let dc = c as f64 - bc as f64;
            let d2 = dr * dr + dc * dc;
            if d2 == 0.0 || d2 > r2 {
                continue;
            }
            sum += dist_sq(center, map.weight(spec.index_of(r, c)));
        }
    }
    (-sum).exp().max(params.rho_floor)
}

/// The density amplitude `A(t, ρ)`.
#[inline]
pub fn amplitude(t: f64, rho: f64, sigma: f64, time_constant: f64) -> f64 {
    (t / (rho * time_constant)).powi(ONSET_EXPONENT) * (-t / (sigma * sigma * time_constant)).exp()
}

/// `min(1, A(t, ρ) · exp(−‖r_j − r_bmu‖² / 2σ²))`.
#[allow(clippy::too_many_arguments)]
pub fn vdsom_neighborhood(
    j: NodeIndex,
    bmu: NodeIndex,
    t: f64,
    sigma: f64,
    time_constant: f64,
    rho: f64,
    spec: &GridSpec,
) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Parameter(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(time_constant > 0.0) {
        return Err(Error::Parameter(format!(
            "time constant must be positive, got {time_constant}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("iteration must be >= 0, got {t}")));
    }
    let d2 = grid_distance_sq(j, bmu, spec)?;
    let g = (-d2 / (2.0 * sigma * sigma)).exp();
    Ok((amplitude(t, rho, sigma, time_constant) * g).min(1.0))
}

/// Trains a varying-density map. Same sampling, schedules and trace as
/// [`crate::som::train_som`]; with `params.amplitude == false` the result is
/// identical to it.
pub fn train_vdsom<V: AsRef<[f64]>>(
    map: &mut SomMap,
    data: &[V],
    sched: &TrainingSchedule,
    params: &DensityParams,
) -> Result<TrainingTrace> {
    sched.validate(map.spec())?;
    params.validate()?;
    check_data(map, data)?;
    Ok(run_training(map, data, sched.total_iters, sched.seed, Some(params), |t| {
        sched.step_at(t as f64)
    }))
}

/// Mean over boundary nodes of the mean weight-space distance to their
/// 4-connected lattice neighbors.
pub fn boundary_spacing(map: &SomMap) -> f64 {
    let spec = *map.spec();
    let mut total = 0.0;
    let mut count = 0usize;
    for i in (0..spec.node_count()).map(NodeIndex) {
        if !spec.is_boundary(i) {
            continue;
        }
        let (sum, n) = spec
            .four_neighbors(i)
            .fold((0.0, 0usize), |(s, n), j| (s + dist_sq(map.weight(i), map.weight(j)).sqrt(), n + 1));
        total += sum / n as f64;
        count += 1;
    }
    total / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::som::train_som;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_map(side: usize, f: impl Fn(usize, usize) -> [f64; 2]) -> SomMap {
        let spec = GridSpec::square(side, 2).unwrap();
        let w = (0..side * side).flat_map(|i| f(i / side, i % side)).collect();
        SomMap::from_weights(spec, w).unwrap()
    }

    #[test]
    fn rho_examples() {
        let params = DensityParams::default();
        let flat = grid_map(3, |_, _| [0.5, 0.5]);
        let center = flat.spec().index_of(1, 1);
        assert_eq!(density_coefficient(&flat, center, &params).unwrap(), 1.0);

        // Corner (0,0) has neighbors (0,1) and (1,0); put one at squared
        // distance 1 and the other on top of the corner.
        let one = grid_map(3, |r, c| if (r, c) == (0, 1) { [1.0, 0.0] } else { [0.0, 0.0] });
        let rho = density_coefficient(&one, NodeIndex(0), &params).unwrap();
        assert!((rho - (-1.0f64).exp()).abs() < 1e-15);

        let far = grid_map(3, |r, c| [r as f64 * 10.0, c as f64 * 10.0]);
        assert_eq!(density_coefficient(&far, center, &params).unwrap(), params.rho_floor);
        assert!(density_coefficient(&far, NodeIndex(9), &params).is_err());
    }

    #[test]
    fn amplitude_examples() {
        let spec = GridSpec::square(5, 2).unwrap();
        let b = spec.index_of(2, 2);
        assert_eq!(vdsom_neighborhood(b, b, 0.0, 2.0, 100.0, 0.5, &spec).unwrap(), 0.0);
        assert!(amplitude(40.0, 0.3, 2.0, 100.0) > amplitude(40.0, 0.6, 2.0, 100.0));
        // t = T, ρ = 1, σ = 1: A = exp(−1).
        let a = vdsom_neighborhood(b, b, 100.0, 1.0, 100.0, 1.0, &spec).unwrap();
        assert!((a - (-1.0f64).exp()).abs() < 1e-15);
        let j = spec.index_of(2, 3);
        let aj = vdsom_neighborhood(j, b, 100.0, 1.0, 100.0, 1.0, &spec).unwrap();
        assert!((aj - (-1.0f64).exp() * (-0.5f64).exp()).abs() < 1e-15);
        // Clamped at 1.
        assert_eq!(vdsom_neighborhood(b, b, 100.0, 10.0, 100.0, 0.05, &spec).unwrap(), 1.0);
        assert!(vdsom_neighborhood(b, b, 1.0, 1.0, 1.0, 0.0, &spec).is_err());
        assert!(vdsom_neighborhood(b, b, 1.0, 0.0, 1.0, 0.5, &spec).is_err());
    }

    fn uniform(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen(), rng.gen()]).collect()
    }

    #[test]
    fn disabled_amplitude_equals_plain_som() {
        let spec = GridSpec::square(10, 2).unwrap();
        let data = uniform(300, 4);
        let sched = TrainingSchedule::for_grid(&spec, 3000, 21);
        let mut plain = SomMap::new(spec, 8);
        let mut off = plain.clone();
        let t1 = train_som(&mut plain, &data, &sched).unwrap();
        let t2 = train_vdsom(&mut off, &data, &sched, &DensityParams::disabled()).unwrap();
        assert_eq!(plain, off);
        assert_eq!(t1, t2);
    }

    #[test]
    fn vdsom_reproducible_and_finite() {
        let spec = GridSpec::square(10, 2).unwrap();
        let data = uniform(300, 5);
        let sched = TrainingSchedule::for_grid(&spec, 3000, 2);
        let params = DensityParams::default();
        let mut a = SomMap::new(spec, 1);
        let mut b = a.clone();
        train_vdsom(&mut a, &data, &sched, &params).unwrap();
        train_vdsom(&mut b, &data, &sched, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.weights_flat().iter().all(|w| w.is_finite() && (0.0..=1.0).contains(w)));
    }

    #[test]
    fn early_training_matches_plain_som() {
        // A(t) ~ (t/T)^4 is negligible for t << T.
        let spec = GridSpec::square(8, 2).unwrap();
        let data = uniform(200, 6);
        let mut sched = TrainingSchedule::for_grid(&spec, 50, 3);
        sched.time_constant = 1e6;
        let mut plain = SomMap::new(spec, 2);
        let mut dense = plain.clone();
        train_som(&mut plain, &data, &sched).unwrap();
        train_vdsom(&mut dense, &data, &sched, &DensityParams::default()).unwrap();
        let diff = plain
            .weights_flat()
            .iter()
            .zip(dense.weights_flat())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn boundary_spacing_of_regular_grid() {
        let map = grid_map(4, |r, c| [r as f64 * 0.25, c as f64 * 0.25]);
        assert!((boundary_spacing(&map) - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rho_monotone_in_neighbor_distance(
            seed in any::<u64>(), extra in 0.001f64..2.0, radius in 1.0f64..3.0
        ) {
            // Pushing one neighbor farther away can only lower rho.
            let spec = GridSpec::square(7, 2).unwrap();
            let mut map = SomMap::new(spec, seed);
            let params = DensityParams { local_radius: radius, rho_floor: 1e-300, amplitude: true };
            let bmu = spec.index_of(3, 3);
            let before = density_coefficient(&map, bmu, &params).unwrap();
            let n = spec.index_of(3, 4);
            let center = map.weight(bmu).to_vec();
            let w = map.weight_mut(n);
            for k in 0..2 { w[k] = center[k] + (w[k] - center[k]) * (1.0 + extra) + extra * 1e-3; }
            let after = density_coefficient(&map, bmu, &params).unwrap();
            prop_assert!(after <= before);
        }

        #[test]
        fn rho_within_floor_and_one(seed in any::<u64>(), node in 0usize..49, floor in 0.01f64..0.9) {
            let spec = GridSpec::square(7, 2).unwrap();
            let map = SomMap::new(spec, seed);
            let params = DensityParams { rho_floor: floor, ..DensityParams::default() };
            let rho = density_coefficient(&map, NodeIndex(node), &params).unwrap();
            prop_assert!(rho >= floor && rho <= 1.0);
        }

        #[test]
        fn combined_factor_is_convex(
            t in 0.0f64..1e5, sigma in 0.1f64..30.0, tc in 1.0f64..1e4, rho in 0.05f64..1.0,
            alpha in 0.0f64..1.0, d in 0usize..30
        ) {
            let spec = GridSpec::square(31, 2).unwrap();
            let bmu = NodeIndex(0);
            let j = spec.index_of(0, d);
            let h = crate::som::gaussian_neighborhood(j, bmu, sigma, &spec).unwrap();
            let v = vdsom_neighborhood(j, bmu, t, sigma, tc, rho, &spec).unwrap();
            let f = (alpha * (h + v)).min(1.0);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
