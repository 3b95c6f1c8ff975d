//! Level-`k` digit expansions `D_k` with multiplicities (the measures `μ_k`).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pair::SelfAffinePair;
use crate::points::{canonicalize, WeightedPointSet, MERGE_TOL};

/// Total mass `m^k`, or `BudgetExceeded` when it is above `cap`.
pub fn check_budget(m: usize, k: u32, cap: u64) -> Result<u64> {
    let mass = (m as u128).checked_pow(k).unwrap_or(u128::MAX);
    if mass > cap as u128 {
        return Err(Error::BudgetExceeded { mass, cap });
    }
    Ok(mass as u64)
}

/// Iterates `μ_1, μ_2, …`, each built from the previous by
/// `μ_k = μ_{k-1} ⊛ Σ_d δ(B^{k-1} d)`.
pub struct LevelIter<'a> {
    pair: &'a SelfAffinePair,
    current: WeightedPointSet,
    /// `B^{level} d` for every digit.
    shifts: Vec<Vec<f64>>,
    level: u32,
}

impl<'a> LevelIter<'a> {
    pub fn new(pair: &'a SelfAffinePair) -> Self {
        Self {
            pair,
            current: WeightedPointSet::dirac_origin(pair.dim()),
            shifts: pair.digits().digits().to_vec(),
            level: 0,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn current(&self) -> &WeightedPointSet {
        &self.current
    }

    /// Advances one level and returns the new `μ_k`.
    pub fn step(&mut self) -> &WeightedPointSet {
        let dim = self.pair.dim();
        let prev = &self.current;
        let mut coords = Vec::with_capacity(prev.len() * self.shifts.len() * dim);
        let mut weights = Vec::with_capacity(prev.len() * self.shifts.len());
        for shift in &self.shifts {
            for (p, w) in prev.iter() {
                coords.extend(p.iter().zip(shift).map(|(x, s)| x + s));
                weights.push(w);
            }
        }
        self.current = canonicalize(dim, coords, weights);
        let matrix = self.pair.matrix();
        for s in self.shifts.iter_mut() {
            *s = matrix.apply(s);
        }
        self.level += 1;
        &self.current
    }
}

/// Computes `μ_k`: every sum `ℓ_0 + Bℓ_1 + … + B^{k-1}ℓ_{k-1}` with weight 1,
/// coincident sums merged into multiplicities.
pub fn expand_level(pair: &SelfAffinePair, k: u32, cap: u64) -> Result<WeightedPointSet> {
    check_budget(pair.m(), k, cap)?;
    let mut it = LevelIter::new(pair);
    for _ in 0..k {
        it.step();
    }
    Ok(it.current)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub level: u32,
    pub distinct_count: usize,
    pub has_collision: bool,
    pub max_multiplicity: u64,
    /// Minimum Euclidean distance between distinct points; `+∞` below two points.
    pub min_separation: f64,
}

pub fn analyze_expansion(pts: &WeightedPointSet, m: usize, k: u32) -> ExpansionReport {
    let expected = (m as u128).checked_pow(k).unwrap_or(u128::MAX);
    let distinct_count = pts.len();
    ExpansionReport {
        level: k,
        distinct_count,
        has_collision: (distinct_count as u128) < expected,
        max_multiplicity: pts.max_weight(),
        min_separation: min_separation(pts),
    }
}

/// Exact closest-pair distance.
///
/// 1-D: adjacent differences of the sorted support. Higher dimensions: the
/// closest lexicographic neighbours give an upper bound `δ`, points are then
/// bucketed on a grid of side `δ` and every pair in adjacent buckets is
/// checked.
pub fn min_separation(pts: &WeightedPointSet) -> f64 {
    let n = pts.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let dim = pts.dim();
    if dim == 1 {
        return pts.coords().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    }
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best = (1..n).map(|i| dist(pts.point(i - 1), pts.point(i))).fold(f64::INFINITY, f64::min);
    let cell = best.max(MERGE_TOL);
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..n {
        grid.entry(key(pts.point(i))).or_default().push(i);
    }
    for i in 0..n {
        let p = pts.point(i);
        let base = key(p);
        for offset in 0..3usize.pow(dim as u32) {
            let mut probe = base.clone();
            let mut o = offset;
            for k in probe.iter_mut() {
                *k += (o % 3) as i64 - 1;
                o /= 3;
            }
            if let Some(list) = grid.get(&probe) {
                for &j in list {
                    if j > i {
                        best = best.min(dist(p, pts.point(j)));
                    }
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessCheck {
    /// `μ_{Mk}({z_M})` computed by enumeration.
    Verified(u64),
    /// `m^{Mk}` is above the budget; only the bound is available.
    Unverified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionWitness {
    pub point: Vec<f64>,
    /// Guaranteed multiplicity `2^M` of `point` in `μ_{Mk}`.
    pub lower_bound: u64,
    pub level: u32,
    pub check: WitnessCheck,
}

/// Amplifies a collision `a` at level `k` into `z_M = Σ_{j<M} B^{kj} a`, which
/// has at least `2^M` distinct expansions of length `Mk`.
pub fn collision_witness(pair: &SelfAffinePair, a: &[f64], k: u32, copies: u32, cap: u64) -> Result<CollisionWitness> {
    if a.len() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), got: a.len() });
    }
    if copies == 0 || copies >= 64 {
        return Err(Error::InvalidArgument(format!("witness copy count must be in 1..64, got {copies}")));
    }
    let base = expand_level(pair, k, cap)?;
    let mult = base.weight_at(a);
    if mult < 2 {
        return Err(Error::NotACollision(mult));
    }
    let matrix = pair.matrix();
    let mut point = vec![0.0; a.len()];
    let mut term = a.to_vec();
    for j in 0..copies {
        if j > 0 {
            term = matrix.apply_power(k, &term);
        }
        for (z, t) in point.iter_mut().zip(&term) {
            *z += t;
        }
    }
    let level = copies * k;
    let check = match expand_level(pair, level, cap) {
        Ok(mu) => WitnessCheck::Verified(mu.weight_at(&point)),
        Err(Error::BudgetExceeded { .. }) => WitnessCheck::Unverified,
        Err(e) => return Err(e),
    };
    Ok(CollisionWitness { point, lower_bound: 1u64 << copies, level, check })
}
