//! Rectangular lattice topology and the weight storage shared by both map
//! variants.
//!
//! Nodes are indexed row-major: `index = row * cols + col`. Grid positions are
//! the integer `(row, col)` pairs with unit spacing, and all lattice distances
//! are Euclidean in those coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a lattice and the dimension of the vectors its nodes hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec")]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    input_dim: usize,
}

#[derive(Deserialize)]
struct RawGridSpec {
    rows: usize,
    cols: usize,
    input_dim: usize,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.rows, raw.cols, raw.input_dim)
    }
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, input_dim: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Config(format!(
                "lattice must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be at least 1".into()));
        }
        Ok(Self {
            rows,
            cols,
            input_dim,
        })
    }

    /// A `side`×`side` lattice.
    pub fn square(side: usize, input_dim: usize) -> Result<Self> {
        Self::new(side, side, input_dim)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn node_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Length of the lattice diagonal in grid units.
    pub fn diagonal(&self) -> f64 {
        let r = (self.rows - 1) as f64;
        let c = (self.cols - 1) as f64;
        (r * r + c * c).sqrt()
    }

    pub fn check(&self, index: NodeIndex) -> Result<()> {
        if index.0 < self.node_count() {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                index: index.0,
                count: self.node_count(),
            })
        }
    }

    pub fn coords(&self, index: NodeIndex) -> (usize, usize) {
        (index.0 / self.cols, index.0 % self.cols)
    }

    pub fn index_of(&self, row: usize, col: usize) -> NodeIndex {
        debug_assert!(row < self.rows && col < self.cols);
        NodeIndex(row * self.cols + col)
    }

    /// True for nodes on the outer ring of the lattice.
    pub fn is_boundary(&self, index: NodeIndex) -> bool {
        let (r, c) = self.coords(index);
        r == 0 || c == 0 || r + 1 == self.rows || c + 1 == self.cols
    }

    /// Axis-adjacent lattice neighbors, in ascending index order.
    pub fn four_neighbors(&self, index: NodeIndex) -> impl Iterator<Item = NodeIndex> + '_ {
        let (r, c) = self.coords(index);
        let up = (r > 0).then(|| self.index_of(r - 1, c));
        let left = (c > 0).then(|| self.index_of(r, c - 1));
        let right = (c + 1 < self.cols).then(|| self.index_of(r, c + 1));
        let down = (r + 1 < self.rows).then(|| self.index_of(r + 1, c));
        [up, left, right, down].into_iter().flatten()
    }
}

/// Row-major position of a node in its lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeIndex(pub usize);

impl NodeIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Squared Euclidean distance between two nodes' grid coordinates.
pub fn grid_distance_sq(a: NodeIndex, b: NodeIndex, spec: &GridSpec) -> Result<f64> {
    spec.check(a)?;
    spec.check(b)?;
    Ok(grid_distance_sq_unchecked(a, b, spec))
}

#[inline]
pub(crate) fn grid_distance_sq_unchecked(a: NodeIndex, b: NodeIndex, spec: &GridSpec) -> f64 {
    let (ar, ac) = spec.coords(a);
    let (br, bc) = spec.coords(b);
    let dr = ar as f64 - br as f64;
    let dc = ac as f64 - bc as f64;
    dr * dr + dc * dc
}

/// All nodes within `radius` grid units of `center`, including `center`,
/// in ascending index order.
pub fn neighbors_within(center: NodeIndex, radius: f64, spec: &GridSpec) -> Result<Vec<NodeIndex>> {
    spec.check(center)?;
    if !(radius >= 0.0) {
        return Err(Error::Parameter(format!("radius must be >= 0, got {radius}")));
    }
    let (cr, cc) = spec.coords(center);
    let reach = radius.floor().min((spec.rows.max(spec.cols)) as f64) as usize;
    let r0 = cr.saturating_sub(reach);
    let r1 = (cr + reach).min(spec.rows - 1);
    let c0 = cc.saturating_sub(reach);
    let c1 = (cc + reach).min(spec.cols - 1);
    let r2 = radius * radius;
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            let dr = r as f64 - cr as f64;
            let dc = c as f64 - cc as f64;
            if dr * dr + dc * dc <= r2 {
                out.push(spec.index_of(r, c));
            }
        }
    }
    Ok(out)
}

/// A lattice of nodes, each holding a weight vector in input space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomMap {
    spec: GridSpec,
    /// Flat row-major storage, `input_dim` components per node.
    weights: Vec<f64>,
}

impl SomMap {
    /// Weights drawn i.i.d. uniform on `[0, 1]^input_dim`.
    pub fn new(spec: GridSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..spec.node_count() * spec.input_dim)
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        Self { spec, weights }
    }

    /// Builds a map from explicit per-node weights.
    pub fn from_weights(spec: GridSpec, weights: Vec<f64>) -> Result<Self> {
        let expected = spec.node_count() * spec.input_dim;
        if weights.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: weights.len(),
            });
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { spec, weights })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.spec.node_count()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn weight(&self, index: NodeIndex) -> &[f64] {
        let d = self.spec.input_dim;
        &self.weights[index.0 * d..(index.0 + 1) * d]
    }

    pub(crate) fn weight_mut(&mut self, index: NodeIndex) -> &mut [f64] {
        let d = self.spec.input_dim;
        &mut self.weights[index.0 * d..(index.0 + 1) * d]
    }

    pub fn weights_flat(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter_weights(&self) -> std::slice::ChunksExact<'_, f64> {
        self.weights.chunks_exact(self.spec.input_dim)
    }

    /// Grid coordinates `(row, col)` of a node.
    pub fn position(&self, index: NodeIndex) -> (usize, usize) {
        self.spec.coords(index)
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::Dimension {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        match x.iter().position(|v| !v.is_finite()) {
            Some(pos) => Err(Error::NonFinite(pos)),
            None => Ok(()),
        }
    }

    /// Mean weight-space distance between 4-connected lattice neighbors. This
    /// is the weight-space length of one lattice step.
    pub fn lattice_unit(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in 0..self.spec.rows {
            for c in 0..self.spec.cols {
                let a = self.spec.index_of(r, c);
                if c + 1 < self.spec.cols {
                    sum += dist(self.weight(a), self.weight(self.spec.index_of(r, c + 1)));
                    count += 1;
                }
                if r + 1 < self.spec.rows {
                    sum += dist(self.weight(a), self.weight(self.spec.index_of(r + 1, c)));
                    count += 1;
                }
            }
        }
        sum / count as f64
    }
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_map_range_and_determinism() {
        let spec = GridSpec::new(2, 2, 2).unwrap();
        let a = SomMap::new(spec, 7);
        assert_eq!(a.node_count(), 4);
        assert!(a.weights_flat().iter().all(|w| (0.0..=1.0).contains(w)));
        assert_eq!(a, SomMap::new(spec, 7));
        assert_ne!(a, SomMap::new(spec, 8));
        assert_eq!(SomMap::new(GridSpec::square(30, 2).unwrap(), 1).node_count(), 900);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(GridSpec::new(2, 2, 0), Err(Error::Config(_))));
        assert!(GridSpec::new(1, 5, 2).is_err());
        assert!(serde_json::from_str::<GridSpec>(r#"{"rows":0,"cols":3,"input_dim":2}"#).is_err());
    }

    #[test]
    fn grid_distances() {
        let spec = GridSpec::square(10, 2).unwrap();
        let a = spec.index_of(0, 0);
        assert_eq!(grid_distance_sq(a, a, &spec).unwrap(), 0.0);
        assert_eq!(grid_distance_sq(a, spec.index_of(0, 1), &spec).unwrap(), 1.0);
        assert_eq!(grid_distance_sq(a, spec.index_of(3, 4), &spec).unwrap(), 25.0);
        assert!(matches!(
            grid_distance_sq(a, NodeIndex(100), &spec),
            Err(Error::OutOfBounds { index: 100, count: 100 })
        ));
    }

    #[test]
    fn neighborhoods() {
        let spec = GridSpec::square(5, 2).unwrap();
        let center = spec.index_of(2, 2);
        assert_eq!(neighbors_within(center, 0.0, &spec).unwrap(), vec![center]);
        let ring = neighbors_within(center, 1.0, &spec).unwrap();
        let expected: Vec<_> = [(1, 2), (2, 1), (2, 2), (2, 3), (3, 2)]
            .iter()
            .map(|&(r, c)| spec.index_of(r, c))
            .collect();
        assert_eq!(ring, expected);
        assert_eq!(neighbors_within(center, spec.diagonal(), &spec).unwrap().len(), 25);
        assert_eq!(
            neighbors_within(spec.index_of(0, 0), spec.diagonal(), &spec).unwrap().len(),
            25
        );
        assert!(neighbors_within(center, -1.0, &spec).is_err());
    }

    #[test]
    fn boundary_and_four_neighbors() {
        let spec = GridSpec::new(3, 4, 1).unwrap();
        let boundary = (0..12).filter(|&i| spec.is_boundary(NodeIndex(i))).count();
        assert_eq!(boundary, 10);
        assert_eq!(spec.four_neighbors(spec.index_of(0, 0)).count(), 2);
        assert_eq!(spec.four_neighbors(spec.index_of(1, 1)).count(), 4);
    }

    #[test]
    fn lattice_unit_of_regular_grid() {
        let spec = GridSpec::square(3, 2).unwrap();
        let w: Vec<f64> = (0..9)
            .flat_map(|i| [(i / 3) as f64 * 0.5, (i % 3) as f64 * 0.5])
            .collect();
        let map = SomMap::from_weights(spec, w).unwrap();
        assert!((map.lattice_unit() - 0.5).abs() < 1e-15);
    }

    fn enumerate_within(center: NodeIndex, radius: f64, spec: &GridSpec) -> Vec<NodeIndex> {
        (0..spec.node_count())
            .map(NodeIndex)
            .filter(|&n| grid_distance_sq(center, n, spec).unwrap() <= radius * radius)
            .collect()
    }

    proptest! {
        #[test]
        fn distance_symmetric(rows in 2usize..12, cols in 2usize..12, a in 0usize..144, b in 0usize..144) {
            let spec = GridSpec::new(rows, cols, 1).unwrap();
            let a = NodeIndex(a % spec.node_count());
            let b = NodeIndex(b % spec.node_count());
            let ab = grid_distance_sq(a, b, &spec).unwrap();
            prop_assert_eq!(ab, grid_distance_sq(b, a, &spec).unwrap());
            prop_assert_eq!(ab == 0.0, a == b);
        }

        #[test]
        fn neighbors_match_enumeration_and_are_monotone(
            rows in 2usize..10, cols in 2usize..10, c in 0usize..100, r1 in 0.0f64..8.0, dr in 0.0f64..4.0
        ) {
            let spec = GridSpec::new(rows, cols, 1).unwrap();
            let center = NodeIndex(c % spec.node_count());
            let small = neighbors_within(center, r1, &spec).unwrap();
            prop_assert_eq!(&small, &enumerate_within(center, r1, &spec));
            let large = neighbors_within(center, r1 + dr, &spec).unwrap();
            prop_assert!(small.iter().all(|n| large.contains(n)));
        }

        #[test]
        fn index_coords_bijection(rows in 2usize..20, cols in 2usize..20, i in 0usize..400) {
            let spec = GridSpec::new(rows, cols, 1).unwrap();
            let i = NodeIndex(i % spec.node_count());
            let (r, c) = spec.coords(i);
            prop_assert_eq!(spec.index_of(r, c), i);
        }
    }
}
