//! Exact window extrema of weighted point sets and the Lebesgue measure of
//! tiles as `1 / D⁺(μ)`.
//!
//! All windows are closed cubes `I_N(z) = {y : |y_i - z_i| <= N/2}`. A point
//! `x` belongs to the window with left/bottom corner `a` when
//! `a_i - tol <= x_i <= a_i + N + tol` on every axis, `tol = 1e-12 N`.

use nalgebra::DMatrix;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::{canonicalize, WeightedPointSet};

/// Relative boundary tolerance of a window.
pub const WINDOW_TOL: f64 = 1e-12;
/// Ratio between the last and first value of a growing series that counts as divergence.
pub const DIVERGENCE_RATIO: f64 = 10.0;

/// Strictly increasing cube side lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSchedule {
    sizes: Vec<f64>,
}

impl WindowSchedule {
    pub fn new(sizes: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidSchedule("empty".into()));
        }
        if sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidSchedule("sizes must be positive and finite".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule("sizes must be strictly increasing".into()));
        }
        Ok(Self { sizes })
    }

    /// `count` sizes from `start` to `stop` with a constant ratio.
    pub fn geometric(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 || !(start > 0.0) || stop < start {
            return Err(Error::InvalidSchedule(format!("geo:{start},{stop},{count}")));
        }
        if count == 1 {
            return Self::new(vec![start]);
        }
        let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
        let mut sizes: Vec<f64> = (0..count).map(|i| start * ratio.powi(i as i32)).collect();
        sizes[count - 1] = stop;
        Self::new(sizes)
    }

    /// `count` evenly spaced sizes from `start` to `stop`.
    pub fn linear(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 || stop < start {
            return Err(Error::InvalidSchedule(format!("lin:{start},{stop},{count}")));
        }
        if count == 1 {
            return Self::new(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    /// Natural scale for a support of the given extent: ratio 2, the largest
    /// size `extent / 2`, `count` sizes.
    pub fn natural(extent: f64, count: usize) -> Result<Self> {
        if !(extent > 0.0) || count == 0 {
            return Err(Error::InvalidSchedule(format!("natural scale needs positive extent, got {extent}")));
        }
        let top = extent / 2.0;
        Self::new((0..count).rev().map(|q| top / f64::powi(2.0, q as i32)).collect())
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfEntry {
    /// Weighted count of the minimizing window.
    pub count: u64,
    pub value: f64,
    /// Center of the minimizing window.
    pub argmin: Vec<f64>,
    /// The count is unchanged on the deeper reference level.
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEntry {
    pub size: f64,
    /// Weighted count of the maximizing window; `sup_value = sup_count / N^n`.
    pub sup_count: u64,
    pub sup_value: f64,
    /// Center of the maximizing window.
    pub argmax: Vec<f64>,
    pub inf: Option<InfEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub dim: usize,
    /// Expansion level the points came from, when known.
    pub level: Option<u32>,
    /// Largest per-axis extent of the support.
    pub extent: f64,
    pub per_size: Vec<DensityEntry>,
}

impl DensityEstimate {
    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn last(&self) -> &DensityEntry {
        self.per_size.last().expect("schedules are nonempty")
    }
}

fn check_input(pts: &WeightedPointSet) -> Result<()> {
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if !(1..=2).contains(&pts.dim()) {
        return Err(Error::UnsupportedDimension(pts.dim()));
    }
    Ok(())
}

/// Independent weighted count of the closed window with the given corner.
pub fn window_count(pts: &WeightedPointSet, corner: &[f64], size: f64) -> u64 {
    let tol = WINDOW_TOL * size;
    pts.iter()
        .filter(|(p, _)| p.iter().zip(corner).all(|(x, a)| *x >= a - tol && *x <= a + size + tol))
        .map(|(_, w)| w)
        .sum()
}

fn prefix_sums(weights: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut acc = 0u64;
    for w in weights {
        acc += w;
        out.push(acc);
    }
    out
}

/// Sorted 1-D coordinates with weight prefix sums.
struct Line {
    xs: Vec<f64>,
    prefix: Vec<u64>,
}

impl Line {
    fn new(mut pairs: Vec<(f64, u64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let prefix = prefix_sums(pairs.iter().map(|p| p.1));
        Self { xs: pairs.into_iter().map(|p| p.0).collect(), prefix }
    }

    fn count(&self, a: f64, size: f64) -> u64 {
        let tol = WINDOW_TOL * size;
        let lo = self.xs.partition_point(|&x| x < a - tol);
        let hi = self.xs.partition_point(|&x| x <= a + size + tol);
        if hi <= lo {
            0
        } else {
            self.prefix[hi] - self.prefix[lo]
        }
    }

    /// Max count over windows whose left edge is one of `anchors` (sorted),
    /// by a two-pointer sweep. Returns `(count, anchor index)`; ties keep
    /// the smallest anchor.
    fn max_anchored(&self, anchors: &[f64], size: f64) -> (u64, usize) {
        let tol = WINDOW_TOL * size;
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut best = (0u64, 0usize);
        for (i, &a) in anchors.iter().enumerate() {
            while lo < self.xs.len() && self.xs[lo] < a - tol {
                lo += 1;
            }
            if hi < lo {
                hi = lo;
            }
            while hi < self.xs.len() && self.xs[hi] <= a + size + tol {
                hi += 1;
            }
            let c = self.prefix[hi] - self.prefix[lo];
            if c > best.0 {
                best = (c, i);
            }
        }
        best
    }
}

fn unique_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Max weighted count over windows anchored at point coordinates, with the
/// lexicographically smallest maximizing corner.
fn sup_window(pts: &WeightedPointSet, size: f64) -> (u64, Vec<f64>) {
    if pts.dim() == 1 {
        let line = Line::new(pts.iter().map(|(p, w)| (p[0], w)).collect());
        let anchors = unique_sorted(pts.axis(0));
        let (count, i) = line.max_anchored(&anchors, size);
        return (count, vec![anchors[i]]);
    }
    let xs = pts.axis(0);
    let ys = pts.axis(1);
    let weights = pts.weights();
    let x_anchors = unique_sorted(xs.clone());
    let y_anchors = unique_sorted(ys.clone());
    let mut by_x: Vec<usize> = (0..pts.len()).collect();
    by_x.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let sorted_x: Vec<f64> = by_x.iter().map(|&i| xs[i]).collect();
    let tol = WINDOW_TOL * size;

    let slab_best = |ix: usize| -> (u64, usize, usize) {
        let a = x_anchors[ix];
        let lo = sorted_x.partition_point(|&x| x < a - tol);
        let hi = sorted_x.partition_point(|&x| x <= a + size + tol);
        let line = Line::new(by_x[lo..hi].iter().map(|&i| (ys[i], weights[i])).collect());
        let (c, iy) = line.max_anchored(&y_anchors, size);
        (c, ix, iy)
    };
    let better = |p: (u64, usize, usize), q: (u64, usize, usize)| {
        if q.0 > p.0 || (q.0 == p.0 && (q.1, q.2) < (p.1, p.2)) {
            q
        } else {
            p
        }
    };
    #[cfg(feature = "parallel")]
    let best = (0..x_anchors.len()).into_par_iter().map(slab_best).reduce(|| (0, usize::MAX, usize::MAX), better);
    #[cfg(not(feature = "parallel"))]
    let best = (0..x_anchors.len()).map(slab_best).fold((0, usize::MAX, usize::MAX), better);
    (best.0, vec![x_anchors[best.1], y_anchors[best.2]])
}

fn center(corner: &[f64], size: f64) -> Vec<f64> {
    corner.iter().map(|a| a + size / 2.0).collect()
}

/// For each window size, the exact maximum over all placements of the
/// weighted count in the closed cube divided by `N^n`.
///
/// In 1-D the optimum has its left edge at a point (two-pointer sweep over
/// the sorted points). In 2-D it has its left edge at a point's `x` and its
/// bottom edge at a point's `y`; every `x` anchor gets a sorted sweep in `y`.
pub fn upper_density_profile(pts: &WeightedPointSet, schedule: &WindowSchedule) -> Result<DensityEstimate> {
    check_input(pts)?;
    let n = pts.dim() as i32;
    let per_size = schedule
        .sizes()
        .iter()
        .map(|&size| {
            let (count, corner) = sup_window(pts, size);
            DensityEntry {
                size,
                sup_count: count,
                sup_value: count as f64 / size.powi(n),
                argmax: center(&corner, size),
                inf: None,
            }
        })
        .collect();
    Ok(DensityEstimate { dim: pts.dim(), level: None, extent: pts.extent(), per_size })
}

/// Representative left-edge positions, one per interval on which the window
/// count is constant for every point set in `sets`. `range` bounds the edge.
fn inf_candidates(sets: &[&WeightedPointSet], axis: usize, size: f64, range: (f64, f64)) -> Vec<f64> {
    let (amin, amax) = range;
    if amax <= amin {
        return vec![amin];
    }
    let tol = WINDOW_TOL * size;
    let mut events = vec![amin, amax];
    for s in sets {
        for x in s.axis(axis) {
            for e in [x + tol, x - size - tol] {
                if e > amin && e < amax {
                    events.push(e);
                }
            }
        }
    }
    let events = unique_sorted(events);
    events.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Per window size, the infimum of the weighted count per volume.
///
/// Without `reference`, window centers range over the support hull shrunk by
/// `N/2` (windows inside the hull); the entry is absent when the hull is
/// narrower than `N`, and no entry is trusted.
///
/// With `reference` (a deeper level `μ_{k'}`, `k' > k`), centers range over
/// the hull grown by `N`, so windows may leave the support entirely. A
/// window is stable when its count agrees on both levels; the infimum is
/// then taken over stable windows and marked trusted. Entries fall back to
/// the plain infimum, untrusted, when no window is stable.
///
/// The infimum over a continuum of placements is exact: the count is
/// piecewise constant in the window corner, so one placement per constant
/// piece suffices.
pub fn lower_density_profile(
    pts: &WeightedPointSet,
    schedule: &WindowSchedule,
    reference: Option<&WeightedPointSet>,
) -> Result<DensityEstimate> {
    check_input(pts)?;
    if let Some(r) = reference {
        if r.dim() != pts.dim() {
            return Err(Error::DimensionMismatch { expected: pts.dim(), got: r.dim() });
        }
    }
    let mut estimate = upper_density_profile(pts, schedule)?;
    let bounds = pts.bounds().expect("nonempty");
    let n = pts.dim() as i32;
    for entry in estimate.per_size.iter_mut() {
        let size = entry.size;
        let ranges: Option<Vec<(f64, f64)>> = match reference {
            Some(_) => Some(bounds.iter().map(|&(lo, hi)| (lo - 1.5 * size, hi + 0.5 * size)).collect()),
            None => {
                if bounds.iter().any(|&(lo, hi)| hi - lo < size) {
                    None
                } else {
                    Some(bounds.iter().map(|&(lo, hi)| (lo, hi - size)).collect())
                }
            }
        };
        let Some(ranges) = ranges else { continue };
        let sets: Vec<&WeightedPointSet> = std::iter::once(pts).chain(reference).collect();
        let found = if pts.dim() == 1 {
            inf_1d(pts, reference, &sets, size, ranges[0])
        } else {
            inf_2d(pts, reference, &sets, size, &ranges)
        };
        entry.inf = found.map(|(count, corner, trusted)| InfEntry {
            count,
            value: count as f64 / size.powi(n),
            argmin: center(&corner, size),
            trusted,
        });
    }
    Ok(estimate)
}

/// Tracks the minimum over all windows and over stable windows.
#[derive(Default, Clone)]
struct InfTracker {
    all: Option<(u64, Vec<f64>)>,
    stable: Option<(u64, Vec<f64>)>,
}

impl InfTracker {
    fn offer(&mut self, count: u64, reference_count: Option<u64>, corner: &[f64]) {
        if self.all.as_ref().is_none_or(|(c, _)| count < *c) {
            self.all = Some((count, corner.to_vec()));
        }
        if reference_count == Some(count) && self.stable.as_ref().is_none_or(|(c, _)| count < *c) {
            self.stable = Some((count, corner.to_vec()));
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (mine, theirs) in [(&mut self.all, other.all), (&mut self.stable, other.stable)] {
            if let Some((c, corner)) = theirs {
                if mine.as_ref().is_none_or(|(m, _)| c < *m) {
                    *mine = Some((c, corner));
                }
            }
        }
        self
    }

    fn finish(self) -> Option<(u64, Vec<f64>, bool)> {
        match (self.stable, self.all) {
            (Some((c, corner)), _) => Some((c, corner, true)),
            (None, Some((c, corner))) => Some((c, corner, false)),
            (None, None) => None,
        }
    }
}

fn inf_1d(
    pts: &WeightedPointSet,
    reference: Option<&WeightedPointSet>,
    sets: &[&WeightedPointSet],
    size: f64,
    range: (f64, f64),
) -> Option<(u64, Vec<f64>, bool)> {
    let line = Line::new(pts.iter().map(|(p, w)| (p[0], w)).collect());
    let ref_line = reference.map(|r| Line::new(r.iter().map(|(p, w)| (p[0], w)).collect()));
    let mut tracker = InfTracker::default();
    for a in inf_candidates(sets, 0, size, range) {
        let c = line.count(a, size);
        tracker.offer(c, ref_line.as_ref().map(|l| l.count(a, size)), &[a]);
    }
    tracker.finish()
}

fn inf_2d(
    pts: &WeightedPointSet,
    reference: Option<&WeightedPointSet>,
    sets: &[&WeightedPointSet],
    size: f64,
    ranges: &[(f64, f64)],
) -> Option<(u64, Vec<f64>, bool)> {
    let xs_cand = inf_candidates(sets, 0, size, ranges[0]);
    let ys_cand = inf_candidates(sets, 1, size, ranges[1]);
    let tol = WINDOW_TOL * size;
    let slab = |set: &WeightedPointSet, a: f64| -> Line {
        Line::new(
            set.iter().filter(|(p, _)| p[0] >= a - tol && p[0] <= a + size + tol).map(|(p, w)| (p[1], w)).collect(),
        )
    };
    let per_x = |a: &f64| -> InfTracker {
        let line = slab(pts, *a);
        let ref_line = reference.map(|r| slab(r, *a));
        let mut t = InfTracker::default();
        for &b in &ys_cand {
            let c = line.count(b, size);
            t.offer(c, ref_line.as_ref().map(|l| l.count(b, size)), &[*a, b]);
        }
        t
    };
    #[cfg(feature = "parallel")]
    let tracker = xs_cand.par_iter().map(per_x).reduce(InfTracker::default, InfTracker::merge);
    #[cfg(not(feature = "parallel"))]
    let tracker = xs_cand.iter().map(per_x).fold(InfTracker::default(), InfTracker::merge);
    tracker.finish()
}

/// True when the last three values strictly increase and the last exceeds
/// [`DIVERGENCE_RATIO`] times the first.
pub fn sup_series_diverges(series: &[f64]) -> bool {
    let n = series.len();
    n >= 3
        && series[n - 3] < series[n - 2]
        && series[n - 2] < series[n - 1]
        && series[n - 1] > DIVERGENCE_RATIO * series[0]
}

/// Scans `profiles` (ascending levels) for a growing sup series, at each
/// size shared by all profiles and using only levels whose support extent
/// is at least twice the size; also scans the last profile across its sizes.
pub(crate) fn profiles_diverge(sizes_and_values: impl Fn(usize) -> Vec<(f64, Option<f64>)>, extents: &[f64]) -> bool {
    let levels = extents.len();
    if levels == 0 {
        return false;
    }
    let last = sizes_and_values(levels - 1);
    let within: Vec<f64> = last.iter().filter_map(|(_, v)| *v).collect();
    if sup_series_diverges(&within) {
        return true;
    }
    for (size, _) in &last {
        let mut series = Vec::new();
        for (l, &extent) in extents.iter().enumerate() {
            if extent < 2.0 * size {
                continue;
            }
            let entries = sizes_and_values(l);
            let hit = entries.iter().find(|(s, _)| (s - size).abs() <= 1e-12 * size);
            if let Some((_, Some(v))) = hit {
                series.push(*v);
            }
        }
        if sup_series_diverges(&series) {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueFromDensity {
    /// `1 / D̂⁺`, or 0 when the density diverges.
    pub measure: f64,
    pub divergent: bool,
    /// Density and window size the estimate was read from.
    pub density: f64,
    pub size: f64,
}

/// Lebesgue measure of a tile from density profiles of `μ_k` at ascending
/// levels (a single profile is allowed). The estimate is the reciprocal of
/// the sup at the largest window of the last profile; the result is 0 with
/// the divergence flag when a sup series grows without bound.
pub fn lebesgue_from_density(profiles: &[DensityEstimate]) -> Result<LebesgueFromDensity> {
    let last = profiles.last().ok_or(Error::EmptyPointSet)?;
    let extents: Vec<f64> = profiles.iter().map(|p| p.extent).collect();
    let divergent =
        profiles_diverge(|l| profiles[l].per_size.iter().map(|e| (e.size, Some(e.sup_value))).collect(), &extents);
    let entry = last.last();
    let measure = if divergent || entry.sup_value == 0.0 { 0.0 } else { 1.0 / entry.sup_value };
    Ok(LebesgueFromDensity { measure, divergent, density: entry.sup_value, size: entry.size })
}

/// Maps every point `x ↦ C x`, keeping weights.
pub fn rescale_points(pts: &WeightedPointSet, c: &[Vec<f64>]) -> Result<WeightedPointSet> {
    let n = pts.dim();
    if c.len() != n || c.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    let flat: Vec<f64> = c.iter().flatten().copied().collect();
    let m = DMatrix::from_row_slice(n, n, &flat);
    if m.determinant() == 0.0 || m.clone().try_inverse().is_none() {
        return Err(Error::SingularMatrix);
    }
    let mut coords = Vec::with_capacity(pts.coords().len());
    for (p, _) in pts.iter() {
        coords.extend(crate::pair::mat_vec(&flat, p));
    }
    Ok(canonicalize(n, coords, pts.weights().to_vec()))
}
