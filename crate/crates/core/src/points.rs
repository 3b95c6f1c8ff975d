//! Finite discrete measures with integer multiplicities.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Two points are the same when they agree to this tolerance in the infinity norm.
pub const MERGE_TOL: f64 = 1e-9;

/// Points with positive integer weights, merged within [`MERGE_TOL`] and
/// sorted lexicographically by coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<u64>,
    total_mass: u64,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MERGE_TOL)
}

impl WeightedPointSet {
    /// Builds a canonical set from flat coordinates (`dim` values per point)
    /// and matching weights. Zero weights are dropped.
    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch { expected: dim * weights.len(), got: coords.len() });
        }
        Ok(canonicalize(dim, coords, weights))
    }

    pub fn from_points(dim: usize, points: &[(Vec<f64>, u64)]) -> Result<Self> {
        let mut coords = Vec::with_capacity(dim * points.len());
        let mut weights = Vec::with_capacity(points.len());
        for (p, w) in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
            weights.push(*w);
        }
        Self::from_flat(dim, coords, weights)
    }

    /// One-dimensional points, each with weight 1.
    pub fn from_reals(values: &[f64]) -> Self {
        canonicalize(1, values.to_vec(), vec![1; values.len()])
    }

    /// The Dirac mass at the origin.
    pub fn dirac_origin(dim: usize) -> Self {
        Self { dim, coords: vec![0.0; dim], weights: vec![1], total_mass: 1 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> u64 {
        self.total_mass
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], u64)> + '_ {
        self.coords.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// Weight of the point within [`MERGE_TOL`] of `x`, or 0.
    pub fn weight_at(&self, x: &[f64]) -> u64 {
        if self.dim == 1 {
            let lo = self.coords.partition_point(|&v| v < x[0] - MERGE_TOL);
            return match self.coords.get(lo) {
                Some(&v) if (v - x[0]).abs() <= MERGE_TOL => self.weights[lo],
                _ => 0,
            };
        }
        self.iter().find(|(p, _)| close(p, x)).map(|(_, w)| w).unwrap_or(0)
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Same support, every weight set to 1 (the set `D_k` rather than `μ_k`).
    pub fn support(&self) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.clone(),
            weights: vec![1; self.weights.len()],
            total_mass: self.weights.len() as u64,
        }
    }

    /// Per-axis `(min, max)` of the support.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.is_empty() {
            return None;
        }
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.coords.chunks_exact(self.dim) {
            for (axis, &v) in p.iter().enumerate() {
                b[axis].0 = b[axis].0.min(v);
                b[axis].1 = b[axis].1.max(v);
            }
        }
        Some(b)
    }

    /// Largest per-axis extent of the support.
    pub fn extent(&self) -> f64 {
        self.bounds().map(|b| b.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)).unwrap_or(0.0)
    }

    /// Coordinates along one axis, in storage order.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.coords.iter().skip(axis).step_by(self.dim).copied().collect()
    }
}

/// Sorts lexicographically and merges points closer than [`MERGE_TOL`].
pub(crate) fn canonicalize(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> WeightedPointSet {
    let n = weights.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| weights[i] > 0).collect();
    order.sort_by(|&a, &b| lex_cmp(&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]));

    let mut out_coords: Vec<f64> = Vec::with_capacity(order.len() * dim);
    let mut out_weights: Vec<u64> = Vec::with_capacity(order.len());
    if dim == 1 {
        // Merge runs against the first point of each run.
        for &i in &order {
            let x = coords[i];
            match out_coords.last() {
                Some(&rep) if (x - rep).abs() <= MERGE_TOL => *out_weights.last_mut().unwrap() += weights[i],
                _ => {
                    out_coords.push(x);
                    out_weights.push(weights[i]);
                }
            }
        }
    } else {
        // Lexicographic neighbours need not be metric neighbours, so bucket
        // representatives on a grid of side MERGE_TOL and probe adjacent cells.
        let mut grid: HashMap<Vec<i128>, Vec<usize>> = HashMap::new();
        let mut reps: Vec<(Vec<f64>, u64)> = Vec::new();
        let mut key = vec![0i128; dim];
        for &i in &order {
            let p = &coords[i * dim..(i + 1) * dim];
            for (k, v) in key.iter_mut().zip(p) {
                *k = (v / MERGE_TOL).floor() as i128;
            }
            let mut found = None;
            'probe: for offset in 0..3usize.pow(dim as u32) {
                let mut probe = key.clone();
                let mut o = offset;
                for k in probe.iter_mut() {
                    *k += (o % 3) as i128 - 1;
                    o /= 3;
                }
                if let Some(list) = grid.get(&probe) {
                    for &r in list {
                        if close(&reps[r].0, p) {
                            found = Some(r);
                            break 'probe;
                        }
                    }
                }
            }
            match found {
                Some(r) => reps[r].1 += weights[i],
                None => {
                    grid.entry(key.clone()).or_default().push(reps.len());
                    reps.push((p.to_vec(), weights[i]));
                }
            }
        }
        // Representatives were created in lexicographic order already.
        for (p, w) in reps {
            out_coords.extend_from_slice(&p);
            out_weights.push(w);
        }
    }
    let total_mass = out_weights.iter().sum();
    WeightedPointSet { dim, coords: out_coords, weights: out_weights, total_mass }
}

/// All pairwise sums with multiplied weights.
pub(crate) fn convolve(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<WeightedPointSet> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let dim = a.dim;
    let mut coords = Vec::with_capacity(a.len() * b.len() * dim);
    let mut weights = Vec::with_capacity(a.len() * b.len());
    for (p, wp) in a.iter() {
        for (q, wq) in b.iter() {
            coords.extend(p.iter().zip(q).map(|(x, y)| x + y));
            weights.push(wp * wq);
        }
    }
    Ok(canonicalize(dim, coords, weights))
}
