//! Raster outer approximation of the attractor, the origin classifier and the
//! open-set-condition verdict.

use std::fmt;

use crate::beurling::{
    lebesgue_from_density, lower_density_profile, profiles_diverge, upper_density_profile, DensityEstimate,
    WindowSchedule,
};
use crate::error::{Error, Result};
use crate::expansion::{
    analyze_expansion, check_budget, collision_witness, CollisionWitness, ExpansionReport, LevelIter,
};
use crate::pair::{Regime, SelfAffinePair};

/// Smallest accepted cells-per-axis count.
pub const MIN_RESOLUTION: usize = 16;
/// Relative tolerance of the origin classifier.
pub const ORIGIN_TOL: f64 = 0.1;
/// Separations equal within this over the last three levels count as stable.
pub const SEPARATION_TOL: f64 = 1e-9;
/// The raster iterates composite maps `f_w` contracting at least this much.
const WORD_CONTRACTION: f64 = 1.0 / 16.0;
const MAX_WORDS: usize = 1024;

/// Occupancy bitmask over an axis-aligned box split into `resolution` cells
/// per axis. In 2-D cell `(ix, iy)` is stored at `iy * resolution + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: usize,
    pub cells: Vec<bool>,
    pub cell_volume: f64,
}

impl RasterGrid {
    fn full(lo: Vec<f64>, hi: Vec<f64>, resolution: usize) -> Self {
        let dim = lo.len();
        let cell_volume = lo.iter().zip(&hi).map(|(a, b)| (b - a) / resolution as f64).product();
        Self { dim, lo, hi, resolution, cells: vec![true; resolution.pow(dim as u32)], cell_volume }
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.resolution as f64
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn outer(&self) -> f64 {
        self.occupied_count() as f64 * self.cell_volume
    }

    /// Occupancy of the cell with per-axis indices `idx`.
    pub fn is_occupied(&self, idx: &[usize]) -> bool {
        let flat = idx.iter().rev().fold(0, |acc, &i| acc * self.resolution + i);
        self.cells[flat]
    }

    /// Per-axis index range of the cells meeting `[a, b]` on `axis`.
    pub fn cells_meeting(&self, axis: usize, a: f64, b: f64) -> Option<(usize, usize)> {
        let h = self.cell_size(axis);
        let first = ((a - self.lo[axis]) / h - 1.0).ceil().max(0.0);
        let last = ((b - self.lo[axis]) / h).floor().min(self.resolution as f64 - 1.0);
        (first <= last).then_some((first as usize, last as usize))
    }

    /// Occupied cells with a free or missing edge neighbour, times the cell
    /// volume.
    pub fn boundary_layer_volume(&self) -> f64 {
        let r = self.resolution;
        let occ = |ix: isize, iy: isize| -> bool {
            ix >= 0 && iy >= 0 && (ix as usize) < r && (iy as usize) < r && self.cells[iy as usize * r + ix as usize]
        };
        let count = match self.dim {
            1 => (0..r as isize).filter(|&i| self.cells[i as usize] && !(occ(i - 1, 0) && occ(i + 1, 0))).count(),
            _ => (0..r as isize)
                .flat_map(|iy| (0..r as isize).map(move |ix| (ix, iy)))
                .filter(|&(ix, iy)| {
                    occ(ix, iy) && !(occ(ix - 1, iy) && occ(ix + 1, iy) && occ(ix, iy - 1) && occ(ix, iy + 1))
                })
                .count(),
        };
        count as f64 * self.cell_volume
    }

    /// Plain PBM, top image row = largest `y`; rows wrap at 70 characters.
    pub fn to_pbm(&self) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let r = self.resolution;
        let mut out = format!("P1\n{r} {r}\n");
        for iy in (0..r).rev() {
            let row: Vec<u8> = (0..r).map(|ix| if self.cells[iy * r + ix] { b'1' } else { b'0' }).collect();
            for chunk in row.chunks(70) {
                out.push_str(std::str::from_utf8(chunk).expect("ascii"));
                out.push('\n');
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueEstimate {
    /// Occupied volume at the last iteration.
    pub outer: f64,
    pub iterations: usize,
    pub resolution: usize,
    /// No cell changed in the last iteration.
    pub converged: bool,
    /// Occupied volume after each iteration, starting with the full box.
    pub history: Vec<f64>,
}

/// Box `[c - w, c + w]` given by center and half widths.
#[derive(Clone)]
struct CenterBox {
    c: Vec<f64>,
    w: Vec<f64>,
}

fn image_box(pair: &SelfAffinePair, b: &CenterBox, digit: &[f64]) -> CenterBox {
    let inv = pair.matrix().inverse();
    let n = pair.dim();
    let shifted: Vec<f64> = b.c.iter().zip(digit).map(|(x, d)| x + d).collect();
    let c = pair.matrix().apply_inverse(&shifted);
    let w = (0..n).map(|i| (0..n).map(|j| inv[i * n + j].abs() * b.w[j]).sum()).collect();
    CenterBox { c, w }
}

/// Axis box containing `K`: starts from the ball of radius
/// `max ‖d‖ · Σ ‖B^{-t}‖` and shrinks by `Box ← bbox(⋃ f_d(Box)) ∩ Box`,
/// which keeps `K` inside because `K = ⋃ f_d(K)`.
pub fn invariant_box(pair: &SelfAffinePair) -> (Vec<f64>, Vec<f64>) {
    let n = pair.dim();
    let radius = pair.digits().max_norm() * pair.matrix().inverse_series_bound();
    let mut lo = vec![-radius; n];
    let mut hi = vec![radius; n];
    let scale = radius.max(1.0);
    for _ in 0..10_000 {
        let b = CenterBox {
            c: lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            w: lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).collect(),
        };
        let mut new_lo = vec![f64::INFINITY; n];
        let mut new_hi = vec![f64::NEG_INFINITY; n];
        for d in pair.digits().digits() {
            let img = image_box(pair, &b, d);
            for a in 0..n {
                new_lo[a] = new_lo[a].min(img.c[a] - img.w[a]);
                new_hi[a] = new_hi[a].max(img.c[a] + img.w[a]);
            }
        }
        let mut change: f64 = 0.0;
        for a in 0..n {
            let l = new_lo[a].max(lo[a]);
            let h = new_hi[a].min(hi[a]);
            change = change.max((l - lo[a]).abs()).max((hi[a] - h).abs());
            lo[a] = l;
            hi[a] = h;
        }
        if change <= 1e-15 * scale {
            break;
        }
    }
    // Rounding margin; also keeps degenerate axes of positive width.
    let pad = 1e-9 * scale;
    for a in 0..n {
        lo[a] -= pad;
        hi[a] += pad;
    }
    (lo, hi)
}

/// The maps `f_w`, `|w| = depth`: `x ↦ A x + t` with `A = B^{-depth}` and
/// `t` ranging over the distinct `Σ_{j=1}^{depth} B^{-j} d_j`.
#[derive(Debug, Clone)]
struct WordMaps {
    a: Vec<f64>,
    ts: Vec<Vec<f64>>,
}

impl WordMaps {
    /// Smallest depth with `‖B^{-depth}‖_∞ <= WORD_CONTRACTION`, capped so
    /// that `m^depth <= MAX_WORDS`.
    fn new(pair: &SelfAffinePair) -> Self {
        let n = pair.dim();
        let inv = pair.matrix().inverse().to_vec();
        let mut a = inv.clone();
        let mut ts: Vec<Vec<f64>> = pair.digits().digits().iter().map(|d| pair.matrix().apply_inverse(d)).collect();
        let norm =
            |m: &[f64]| (0..n).map(|i| m[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        while norm(&a) > WORD_CONTRACTION && ts.len() * pair.m() <= MAX_WORDS {
            a = (0..n * n).map(|ij| (0..n).map(|k| inv[(ij / n) * n + k] * a[k * n + ij % n]).sum()).collect();
            let mut next = Vec::with_capacity(ts.len() * pair.m());
            for t in &ts {
                for d in pair.digits().digits() {
                    let shifted: Vec<f64> = t.iter().zip(d).map(|(x, y)| x + y).collect();
                    next.push(pair.matrix().apply_inverse(&shifted));
                }
            }
            next.sort_by(|p, q| {
                p.iter()
                    .zip(q.iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            next.dedup();
            ts = next;
        }
        Self { a, ts }
    }

    fn apply(&self, x: &[f64], t: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n).map(|i| (0..n).map(|j| self.a[i * n + j] * x[j]).sum::<f64>() + t[i]).collect()
    }
}

fn map_1d(maps: &WordMaps, grid: &RasterGrid, next: &mut [bool]) {
    let h = grid.cell_size(0);
    let eps = 1e-9 * h;
    let r = grid.resolution;
    let mut i = 0;
    while i < r {
        if !grid.cells[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < r && grid.cells[i] {
            i += 1;
        }
        let a = grid.lo[0] + start as f64 * h;
        let b = grid.lo[0] + i as f64 * h;
        for t in &maps.ts {
            let u = maps.a[0] * a + t[0];
            let v = maps.a[0] * b + t[0];
            if let Some((p, q)) = grid.cells_meeting(0, u.min(v) - eps, u.max(v) + eps) {
                next[p..=q].iter_mut().for_each(|c| *c = true);
            }
        }
    }
}

/// x-extent of the convex polygon `poly` clipped to the strip `y0 <= y <= y1`.
fn strip_extent(poly: &[[f64; 2]; 4], y0: f64, y1: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in 0..4 {
        let p = poly[e];
        let q = poly[(e + 1) % 4];
        let dy = q[1] - p[1];
        let (t0, t1) = if dy == 0.0 {
            if p[1] < y0 || p[1] > y1 {
                continue;
            }
            (0.0, 1.0)
        } else {
            let ta = (y0 - p[1]) / dy;
            let tb = (y1 - p[1]) / dy;
            (ta.min(tb).max(0.0), ta.max(tb).min(1.0))
        };
        if t0 > t1 {
            continue;
        }
        for t in [t0, t1] {
            let x = p[0] + t * (q[0] - p[0]);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

fn map_2d(maps: &WordMaps, grid: &RasterGrid, next: &mut [bool]) {
    let r = grid.resolution;
    let (hx, hy) = (grid.cell_size(0), grid.cell_size(1));
    let (ex, ey) = (1e-9 * hx, 1e-9 * hy);
    for iy in 0..r {
        let row = &grid.cells[iy * r..(iy + 1) * r];
        let y0 = grid.lo[1] + iy as f64 * hy;
        let y1 = y0 + hy;
        let mut ix = 0;
        while ix < r {
            if !row[ix] {
                ix += 1;
                continue;
            }
            let start = ix;
            while ix < r && row[ix] {
                ix += 1;
            }
            let x0 = grid.lo[0] + start as f64 * hx;
            let x1 = grid.lo[0] + ix as f64 * hx;
            // The image of a rectangle run is a parallelogram; within one row of
            // cells it meets exactly the cells its clipped x-extent meets.
            for t in &maps.ts {
                let corner = |x: f64, y: f64| {
                    let v = maps.apply(&[x, y], t);
                    [v[0], v[1]]
                };
                let poly = [corner(x0, y0), corner(x1, y0), corner(x1, y1), corner(x0, y1)];
                let ylo = poly.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
                let yhi = poly.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
                let Some((ra, rb)) = grid.cells_meeting(1, ylo - ey, yhi + ey) else { continue };
                for ty in ra..=rb {
                    let s0 = grid.lo[1] + ty as f64 * hy - ey;
                    let s1 = s0 + hy + 2.0 * ey;
                    if let Some((a, b)) = strip_extent(&poly, s0, s1) {
                        if let Some((p, q)) = grid.cells_meeting(0, a - ex, b + ex) {
                            next[ty * r + p..=ty * r + q].iter_mut().for_each(|c| *c = true);
                        }
                    }
                }
            }
        }
    }
}

/// Iterates the Hutchinson operator on a raster of the invariant box. A cell
/// is kept when it meets the image `f_w(c)` of an occupied cell `c` under a
/// composite map `f_w = f_{w_1} ∘ … ∘ f_{w_L}`; images are mapped exactly, so
/// the occupied set always contains every cell meeting `K = ⋃_w f_w(K)`.
/// Composite maps contract more per step, which thins the boundary layer. Each new mask is intersected with the previous one, which
/// makes the occupied volume nonincreasing.
pub fn raster_attractor(
    pair: &SelfAffinePair,
    resolution: usize,
    max_iters: usize,
) -> Result<(RasterGrid, LebesgueEstimate)> {
    let dim = pair.dim();
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    if dim == 2 && resolution.checked_mul(resolution).is_none_or(|c| c > 1 << 26) {
        return Err(Error::InvalidArgument(format!("resolution {resolution} is too large for a 2-D raster")));
    }
    let (lo, hi) = invariant_box(pair);
    let mut grid = RasterGrid::full(lo, hi, resolution);
    let mut history = vec![grid.outer()];
    let maps = WordMaps::new(pair);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        let mut next = vec![false; grid.cells.len()];
        if dim == 1 {
            map_1d(&maps, &grid, &mut next);
        } else {
            map_2d(&maps, &grid, &mut next);
        }
        for (n, c) in next.iter_mut().zip(&grid.cells) {
            *n &= *c;
        }
        iterations += 1;
        let changed = next != grid.cells;
        grid.cells = next;
        history.push(grid.outer());
        if !changed {
            converged = true;
            break;
        }
    }
    let estimate = LebesgueEstimate { outer: grid.outer(), iterations, resolution, converged, history };
    Ok((grid, estimate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginClass {
    Interior,
    Boundary,
    Inconclusive,
}

impl OriginClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::Boundary => "boundary",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OriginReport {
    pub class: OriginClass,
    /// `1 / |K|`.
    pub target: f64,
    /// Window size of the trusted lower entry used, when there is one.
    pub size: Option<f64>,
    pub lower_value: Option<f64>,
    pub upper_value: f64,
    pub level: Option<u32>,
    /// Relative tolerance used for both tests.
    pub tolerance: f64,
}

impl fmt::Display for OriginReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class.as_str())?;
        if let (OriginClass::Boundary, Some(k)) = (self.class, self.level) {
            write!(f, " (evidence at level {k})")?;
        }
        Ok(())
    }
}

/// Reads the origin position from densities of `D_∞` at finite level.
///
/// Uses the trusted lower entry at the largest window: interior when it is
/// within [`ORIGIN_TOL`] of `1 / |K|` and the upper density at the largest
/// window is too; boundary when it is below `ORIGIN_TOL / |K|`; otherwise
/// inconclusive. No trusted entry at all is inconclusive.
pub fn classify_origin(
    pair: &SelfAffinePair,
    upper: &DensityEstimate,
    lower: &DensityEstimate,
    lebesgue: f64,
) -> Result<OriginReport> {
    if pair.regime() != Regime::TileCandidate || !(lebesgue > 0.0) {
        return Err(Error::NotATileCandidate);
    }
    let infs: Vec<_> = lower.per_size.iter().filter_map(|e| e.inf.as_ref().map(|i| (e.size, i))).collect();
    if infs.is_empty() {
        return Err(Error::NoTrustedLowerEntry);
    }
    let target = 1.0 / lebesgue;
    let upper_value = upper.last().sup_value;
    let trusted = infs.iter().rev().find(|(_, i)| i.trusted);
    let mut report = OriginReport {
        class: OriginClass::Inconclusive,
        target,
        size: None,
        lower_value: None,
        upper_value,
        level: lower.level,
        tolerance: ORIGIN_TOL,
    };
    let Some(&(size, inf)) = trusted else { return Ok(report) };
    report.size = Some(size);
    report.lower_value = Some(inf.value);
    let near = |v: f64| (v - target).abs() <= ORIGIN_TOL * target;
    report.class = if inf.value < ORIGIN_TOL * target {
        OriginClass::Boundary
    } else if near(inf.value) && near(upper_value) {
        OriginClass::Interior
    } else {
        OriginClass::Inconclusive
    };
    Ok(report)
}

/// Runs [`classify_origin`] on the support `D_k`, with trust decided against
/// `D_{k + lookahead}` and `|K|` read from the upper density of `D_k`.
pub fn classify_origin_at_level(
    pair: &SelfAffinePair,
    k: u32,
    lookahead: u32,
    schedule: Option<&WindowSchedule>,
    cap: u64,
) -> Result<OriginReport> {
    if pair.regime() != Regime::TileCandidate {
        return Err(Error::NotATileCandidate);
    }
    if !(1..=2).contains(&pair.dim()) {
        return Err(Error::UnsupportedDimension(pair.dim()));
    }
    check_budget(pair.m(), k + lookahead, cap)?;
    let mut it = LevelIter::new(pair);
    for _ in 0..k {
        it.step();
    }
    let support = it.current().support();
    for _ in 0..lookahead {
        it.step();
    }
    let reference = it.current().support();
    let natural;
    let schedule = match schedule {
        Some(s) => s,
        None => {
            natural = WindowSchedule::natural(support.extent().max(1.0), 6)?;
            &natural
        }
    };
    let lower = lower_density_profile(&support, schedule, Some(&reference))?.with_level(k);
    let lebesgue = lebesgue_from_density(std::slice::from_ref(&lower))?;
    classify_origin(pair, &lower, &lower, lebesgue.measure)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscVerdict {
    ConsistentWithOsc,
    OscFails,
    Undetermined,
}

impl OscVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ConsistentWithOsc => "consistent-with-OSC",
            Self::OscFails => "OSC-fails",
            Self::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub point: Vec<f64>,
    pub level: u32,
    pub witness: CollisionWitness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscReport {
    pub levels: Vec<ExpansionReport>,
    pub collision_free_up_to_k: bool,
    pub collision: Option<Collision>,
    pub min_separation_trend: Vec<f64>,
    /// Window size of the fixed-window density series.
    pub density_window: f64,
    /// Sup density at `density_window`, per level.
    pub density_series: Vec<f64>,
    /// `None` when fewer than three levels are wide enough to judge.
    pub density_bounded: Option<bool>,
    pub verdict: OscVerdict,
}

impl fmt::Display for OscReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verdict.as_str())?;
        if let Some(c) = &self.collision {
            let p: Vec<String> = c.point.iter().map(|v| format!("{v}")).collect();
            write!(f, ": collision at point {} (level {})", p.join(" "), c.level)?;
        } else if self.verdict == OscVerdict::OscFails {
            write!(f, ": density diverges at window {}", self.density_window)?;
        }
        Ok(())
    }
}

/// Combines collision detection, separation stability and the fixed-window
/// density series over levels `1..=k`.
///
/// The first collision (its lexicographically smallest point) fails the
/// condition and stops the scan; a growing density series fails it too.
/// Consistency needs no collision, equal minimum separations over the last
/// three levels and a bounded density series.
pub fn osc_verdict(pair: &SelfAffinePair, k: u32, cap: u64) -> Result<OscReport> {
    if !(1..=2).contains(&pair.dim()) {
        return Err(Error::UnsupportedDimension(pair.dim()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    check_budget(pair.m(), k, cap)?;
    let digit_span = {
        let n = pair.dim();
        (0..n)
            .map(|a| {
                let vals = pair.digits().digits().iter().map(|d| d[a]);
                vals.clone().fold(f64::NEG_INFINITY, f64::max) - vals.fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let window = if digit_span > 0.0 { digit_span } else { 1.0 };
    let schedule = WindowSchedule::new(vec![window])?;

    let mut it = LevelIter::new(pair);
    let mut levels = Vec::new();
    let mut profiles: Vec<DensityEstimate> = Vec::new();
    let mut collision = None;
    for level in 1..=k {
        let mu = it.step();
        let report = analyze_expansion(mu, pair.m(), level);
        let has_collision = report.has_collision;
        levels.push(report);
        profiles.push(upper_density_profile(mu, &schedule)?.with_level(level));
        if has_collision {
            let (point, _) = mu.iter().find(|(_, w)| *w >= 2).expect("collision has a repeated point");
            let point = point.to_vec();
            let witness = collision_witness(pair, &point, level, 2, cap)?;
            collision = Some(Collision { point, level, witness });
            break;
        }
    }

    let min_separation_trend: Vec<f64> = levels.iter().map(|r| r.min_separation).collect();
    let density_series: Vec<f64> = profiles.iter().map(|p| p.last().sup_value).collect();
    let extents: Vec<f64> = profiles.iter().map(|p| p.extent).collect();
    let divergent =
        profiles_diverge(|l| profiles[l].per_size.iter().map(|e| (e.size, Some(e.sup_value))).collect(), &extents);
    let wide_levels = extents.iter().filter(|&&e| e >= 2.0 * window).count();
    let density_bounded = if divergent {
        Some(false)
    } else if wide_levels >= 3 {
        Some(true)
    } else {
        None
    };
    let stable = min_separation_trend.len() >= 3 && {
        let t = &min_separation_trend[min_separation_trend.len() - 3..];
        t.iter().all(|v| v.is_finite() && (v - t[2]).abs() <= SEPARATION_TOL)
    };
    let collision_free_up_to_k = collision.is_none();
    let verdict = if !collision_free_up_to_k || divergent {
        OscVerdict::OscFails
    } else if stable && density_bounded == Some(true) {
        OscVerdict::ConsistentWithOsc
    } else {
        OscVerdict::Undetermined
    };
    Ok(OscReport {
        levels,
        collision_free_up_to_k,
        collision,
        min_separation_trend,
        density_window: window,
        density_series,
        density_bounded,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::WitnessCheck;
    use crate::pair::{pair_1d, validate_pair};
    use crate::sdensity::sample_self_similar_measure;
    use crate::DEFAULT_CAP;

    fn twin_dragon() -> SelfAffinePair {
        validate_pair(&[vec![1.0, -1.0], vec![1.0, 1.0]], &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        let p = pair_1d(2.0, &[0.0, 1.0]).unwrap();
        assert_eq!(raster_attractor(&p, 8, 10).unwrap_err(), Error::ResolutionTooSmall(8));
        let p3 = validate_pair(
            &[vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0]],
            &[vec![0.0; 3], vec![1.0, 0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(raster_attractor(&p3, 16, 10).unwrap_err(), Error::UnsupportedDimension(3));
    }

    #[test]
    fn invariant_box_shrinks_to_hull() {
        let (lo, hi) = invariant_box(&pair_1d(-2.0, &[0.0, 1.0]).unwrap());
        assert!((lo[0] + 2.0 / 3.0).abs() < 1e-8 && lo[0] <= -2.0 / 3.0);
        assert!((hi[0] - 1.0 / 3.0).abs() < 1e-8 && hi[0] >= 1.0 / 3.0);
    }

    #[test]
    fn unit_interval() {
        let p = pair_1d(2.0, &[0.0, 1.0]).unwrap();
        let (grid, est) = raster_attractor(&p, 4096, 200).unwrap();
        assert!(est.converged);
        assert!(est.outer >= 1.0 && est.outer <= 1.01, "{}", est.outer);
        // Every cell meeting [0, 1] stays occupied.
        let (a, b) = grid.cells_meeting(0, 0.0, 1.0).unwrap();
        assert!((a..=b).all(|i| grid.cells[i]));
    }

    #[test]
    fn three_halves_overlap() {
        let p = pair_1d(1.5, &[0.0, 1.0]).unwrap();
        let (_, est) = raster_attractor(&p, 4096, 400).unwrap();
        assert!((est.outer - 2.0).abs() <= 0.02, "{}", est.outer);
        assert!(est.outer >= 2.0);
    }

    #[test]
    fn history_is_monotone() {
        for p in [pair_1d(3.0, &[0.0, 2.0]).unwrap(), pair_1d(-2.0, &[0.0, 1.0]).unwrap()] {
            let (_, est) = raster_attractor(&p, 512, 100).unwrap();
            assert_eq!(est.history.len(), est.iterations + 1);
            assert!(est.history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn cantor_contains_sampled_points() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let (grid, est) = raster_attractor(&p, 1024, 200).unwrap();
        assert!(est.converged);
        let sample = sample_self_similar_measure(&p, 2000, 7, 64);
        for i in 0..2000 {
            let x = sample.point(i)[0];
            let (a, b) = grid.cells_meeting(0, x, x).unwrap();
            assert!((a..=b).any(|c| grid.cells[c]), "sample {x} fell in a free cell");
        }
        // |K| = 0, so the outer volume is the boundary layer alone.
        assert!(est.outer < 0.2, "{}", est.outer);
        let (_, finer) = raster_attractor(&p, 4096, 200).unwrap();
        assert!(finer.outer < est.outer);
    }

    #[test]
    fn twin_dragon_area() {
        let p = twin_dragon();
        let (_, coarse) = raster_attractor(&p, 128, 300).unwrap();
        let (grid, est) = raster_attractor(&p, 256, 300).unwrap();
        assert!(est.converged);
        // The fractal boundary keeps a thick layer of cells at this resolution.
        assert!(est.outer >= 1.0 && est.outer < 1.45, "{}", est.outer);
        assert!(est.outer < coarse.outer);
        let sample = sample_self_similar_measure(&p, 1000, 3, 64);
        for i in 0..1000 {
            let x = sample.point(i);
            let (xa, xb) = grid.cells_meeting(0, x[0], x[0]).unwrap();
            let (ya, yb) = grid.cells_meeting(1, x[1], x[1]).unwrap();
            let hit = (xa..=xb).any(|ix| (ya..=yb).any(|iy| grid.is_occupied(&[ix, iy])));
            assert!(hit, "sample {x:?} fell in a free cell");
        }
        let pbm = grid.to_pbm().unwrap();
        assert!(pbm.starts_with("P1\n256 256\n"));
        assert!(pbm.lines().all(|l| l.len() <= 70));
    }

    #[test]
    fn doubling_resolution_stays_within_boundary_layer() {
        for p in [pair_1d(-2.0, &[0.0, 1.0]).unwrap(), pair_1d(3.0, &[0.0, 2.0]).unwrap(), twin_dragon()] {
            let r = if p.dim() == 1 { 256 } else { 64 };
            let (g1, e1) = raster_attractor(&p, r, 300).unwrap();
            let (_, e2) = raster_attractor(&p, 2 * r, 300).unwrap();
            assert!(e2.outer <= e1.outer + g1.boundary_layer_volume() + 1e-12);
        }
    }

    #[test]
    fn origin_dichotomy() {
        let binary = pair_1d(2.0, &[0.0, 1.0]).unwrap();
        let r = classify_origin_at_level(&binary, 10, 4, None, DEFAULT_CAP).unwrap();
        assert_eq!(r.class, OriginClass::Boundary);
        assert_eq!(r.to_string(), "boundary (evidence at level 10)");
        let nega = pair_1d(-2.0, &[0.0, 1.0]).unwrap();
        let r = classify_origin_at_level(&nega, 10, 4, None, DEFAULT_CAP).unwrap();
        assert_eq!(r.class, OriginClass::Interior);
        assert!((r.lower_value.unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn origin_without_trusted_entries() {
        let p = pair_1d(-2.0, &[0.0, 1.0]).unwrap();
        let mut it = LevelIter::new(&p);
        for _ in 0..6 {
            it.step();
        }
        let pts = it.current().support();
        let schedule = WindowSchedule::new(vec![4.0]).unwrap();
        let mut lower = lower_density_profile(&pts, &schedule, None).unwrap();
        lower.per_size[0].inf.as_mut().unwrap().trusted = false;
        let r = classify_origin(&p, &lower, &lower, 1.0).unwrap();
        assert_eq!(r.class, OriginClass::Inconclusive);
        lower.per_size[0].inf = None;
        assert_eq!(classify_origin(&p, &lower, &lower, 1.0).unwrap_err(), Error::NoTrustedLowerEntry);
        let cantor = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        assert_eq!(classify_origin(&cantor, &lower, &lower, 1.0).unwrap_err(), Error::NotATileCandidate);
    }

    #[test]
    fn osc_examples() {
        let r = osc_verdict(&pair_1d(4.0, &[0.0, 1.0, 2.0, 8.0]).unwrap(), 4, DEFAULT_CAP).unwrap();
        assert_eq!(r.verdict, OscVerdict::OscFails);
        assert_eq!(r.to_string(), "OSC-fails: collision at point 8 (level 2)");
        let c = r.collision.unwrap();
        assert!(matches!(c.witness.check, WitnessCheck::Verified(v) if v >= 4));

        let r = osc_verdict(&pair_1d(3.0, &[0.0, 2.0]).unwrap(), 10, DEFAULT_CAP).unwrap();
        assert_eq!(r.verdict, OscVerdict::ConsistentWithOsc);
        assert!(r.min_separation_trend.iter().all(|&s| s == 2.0));

        let r = osc_verdict(&pair_1d(2.0, &[0.0, 1.0]).unwrap(), 12, DEFAULT_CAP).unwrap();
        assert_eq!(r.verdict, OscVerdict::ConsistentWithOsc);
        assert_eq!(r.density_bounded, Some(true));

        let r = osc_verdict(&pair_1d(2.0, &[0.0, 1.0]).unwrap(), 2, DEFAULT_CAP).unwrap();
        assert_eq!(r.verdict, OscVerdict::Undetermined);
    }

    #[test]
    fn osc_detects_overlap_growth() {
        let r = osc_verdict(&pair_1d(1.5, &[0.0, 1.0]).unwrap(), 16, DEFAULT_CAP).unwrap();
        assert_eq!(r.verdict, OscVerdict::OscFails);
        assert!(r.collision.is_none());
        assert_eq!(r.density_bounded, Some(false));
    }

    #[test]
    fn osc_budget() {
        let p = pair_1d(4.0, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(osc_verdict(&p, 20, DEFAULT_CAP), Err(Error::BudgetExceeded { .. })));
    }
}
