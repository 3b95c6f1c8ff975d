//! Upper s-densities of 1-D measures and the Hausdorff measure of
//! self-similar sets as `1 / E_s⁺(μ)`.
//!
//! Also hosts the discrete convolution of point measures and a seeded chaos
//! game for the invariant probability measure `σ` of the pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beurling::profiles_diverge;
use crate::error::{Error, Result};
use crate::expansion::expand_level;
use crate::pair::SelfAffinePair;
use crate::points::{convolve, WeightedPointSet};

/// Relative slack when testing `x_j - x_i >= r`.
pub const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SSup {
    pub value: f64,
    /// Weight of the maximizing interval.
    pub weight: u64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SEntry {
    pub threshold: f64,
    /// Absent when no point-bounded interval reaches the threshold.
    pub sup: Option<SSup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SDensityEstimate {
    pub s: f64,
    pub level: Option<u32>,
    pub extent: f64,
    pub per_threshold: Vec<SEntry>,
}

impl SDensityEstimate {
    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    /// The entry at the largest threshold that has an admissible interval.
    pub fn last_present(&self) -> Option<(f64, &SSup)> {
        self.per_threshold.iter().rev().find_map(|e| e.sup.as_ref().map(|s| (e.threshold, s)))
    }
}

/// Geometric thresholds with ratio 2 ending at `extent`.
pub fn natural_thresholds(extent: f64, count: usize) -> Vec<f64> {
    (0..count).rev().map(|q| extent / f64::powi(2.0, q as i32)).collect()
}

struct Prefix {
    xs: Vec<f64>,
    cum: Vec<u64>,
}

impl Prefix {
    fn new(pts: &WeightedPointSet) -> Self {
        let mut cum = Vec::with_capacity(pts.len() + 1);
        cum.push(0);
        let mut acc = 0;
        for &w in pts.weights() {
            acc += w;
            cum.push(acc);
        }
        Self { xs: pts.coords().to_vec(), cum }
    }

    /// Weight of `[xs[i], xs[j]]`.
    fn weight(&self, i: usize, j: usize) -> u64 {
        self.cum[j + 1] - self.cum[i]
    }
}

fn check_1d(pts: &WeightedPointSet) -> Result<()> {
    if pts.dim() != 1 {
        return Err(Error::UnsupportedDimension(pts.dim()));
    }
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok(())
}

/// Max of `weight / length^s` over intervals `[x_i, x_j]` between support
/// points with `x_j - x_i >= r`.
///
/// Restricting endpoints to support points loses nothing: shrinking an
/// interval to the smallest one holding the same points keeps the weight
/// and reduces the length. For a fixed left end the ratio is bounded by
/// `(remaining weight) / length^s`, which prunes the scan.
fn scan(prefix: &Prefix, s: f64, r: f64) -> Option<SSup> {
    let xs = &prefix.xs;
    let n = xs.len();
    let total = prefix.cum[n];
    let min_len = r * (1.0 - THRESHOLD_TOL);
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        let remaining = (total - prefix.cum[i]) as f64;
        if let Some((b, _, _)) = best {
            if remaining / min_len.powf(s) <= b {
                continue;
            }
        }
        let start = xs.partition_point(|&x| x - xs[i] < min_len);
        for j in start.max(i + 1)..n {
            let len = xs[j] - xs[i];
            let denom = len.powf(s);
            if let Some((b, _, _)) = best {
                if remaining / denom <= b {
                    break;
                }
            }
            let v = prefix.weight(i, j) as f64 / denom;
            if best.is_none_or(|(b, _, _)| v > b) {
                best = Some((v, i, j));
            }
        }
    }
    best.map(|(value, i, j)| SSup { value, weight: prefix.weight(i, j), left: xs[i], right: xs[j] })
}

/// Upper s-density profile of a 1-D measure, one entry per threshold.
pub fn upper_s_density_profile(pts: &WeightedPointSet, s: f64, thresholds: &[f64]) -> Result<SDensityEstimate> {
    check_1d(pts)?;
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("exponent s must be positive, got {s}")));
    }
    if thresholds.iter().any(|r| !(*r > 0.0)) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule("thresholds must be positive and increasing".into()));
    }
    let prefix = Prefix::new(pts);
    let per_threshold = thresholds.iter().map(|&r| SEntry { threshold: r, sup: scan(&prefix, s, r) }).collect();
    Ok(SDensityEstimate { s, level: None, extent: pts.extent(), per_threshold })
}

/// `(weight, weight / (b - a)^s)` of the closed interval `[a, b]`.
pub fn interval_ratio(pts: &WeightedPointSet, a: f64, b: f64, s: f64) -> Result<(u64, f64)> {
    check_1d(pts)?;
    let tol = 1e-9;
    let w: u64 = pts.iter().filter(|(p, _)| p[0] >= a - tol && p[0] <= b + tol).map(|(_, w)| w).sum();
    Ok((w, w as f64 / (b - a).powf(s)))
}

/// All pairwise sums with multiplied weights, merged and canonicalized.
pub fn discrete_convolve(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<WeightedPointSet> {
    convolve(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffFromSDensity {
    /// `1 / Ê_s⁺`, or 0 when the s-density diverges.
    pub measure: f64,
    pub divergent: bool,
    pub density: f64,
    pub threshold: f64,
}

/// Hausdorff measure from s-density profiles at ascending levels, read at
/// the largest threshold of the last profile.
pub fn hausdorff_from_sdensity(profiles: &[SDensityEstimate]) -> Result<HausdorffFromSDensity> {
    let last = profiles.last().ok_or(Error::EmptyPointSet)?;
    let (threshold, sup) = last.last_present().ok_or(Error::EmptyPointSet)?;
    let extents: Vec<f64> = profiles.iter().map(|p| p.extent).collect();
    let divergent = profiles_diverge(
        |l| profiles[l].per_threshold.iter().map(|e| (e.threshold, e.sup.as_ref().map(|s| s.value))).collect(),
        &extents,
    );
    let measure = if divergent { 0.0 } else { 1.0 / sup.value };
    Ok(HausdorffFromSDensity { measure, divergent, density: sup.value, threshold })
}

/// Points drawn by the chaos game.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSample {
    pub dim: usize,
    /// Flat coordinates, `dim` per point.
    pub points: Vec<f64>,
    pub seed: u64,
    pub count: usize,
    pub burn_in: usize,
}

impl MeasureSample {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Fraction of points inside the closed box.
    pub fn mass(&self, b: &AxisBox) -> f64 {
        let inside = self.points.chunks_exact(self.dim).filter(|p| b.contains(p)).count();
        inside as f64 / self.count as f64
    }
}

/// Chaos game `x_{t+1} = B^{-1}(x_t + d_t)` from `x_0 = 0` with uniform digits.
///
/// The generator is ChaCha8 seeded with `seed`; digits are drawn as `u32`
/// in `0..m`, so the stream is identical on every platform. The first
/// `burn_in` iterates are discarded.
pub fn sample_self_similar_measure(pair: &SelfAffinePair, count: usize, seed: u64, burn_in: usize) -> MeasureSample {
    let dim = pair.dim();
    let m = pair.m() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; dim];
    let mut points = Vec::with_capacity(count * dim);
    for t in 0..burn_in + count {
        let d = rng.gen_range(0..m) as usize;
        x = pair.contract(d, &x);
        if t >= burn_in {
            points.extend_from_slice(&x);
        }
    }
    MeasureSample { dim, points, seed, count, burn_in }
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidArgument("box must have lo <= hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(shift).map(|(a, s)| a + s).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizationCheck {
    /// Empirical `σ(B^{-N} W)`.
    pub lhs: f64,
    /// Empirical `m^{-N} (μ_N ∗ σ)(W)`.
    pub rhs: f64,
    /// `sqrt(lhs(1-lhs)/n) + sqrt(rhs(1-rhs)/n)`, a bound on the standard
    /// error of `lhs - rhs` whatever the correlation of the two estimates.
    pub stderr: f64,
}

impl RenormalizationCheck {
    pub fn agrees(&self, sigmas: f64) -> bool {
        (self.lhs - self.rhs).abs() <= sigmas * self.stderr
    }
}

/// Compares both sides of `σ(B^{-N} W) = m^{-N} (μ_N ∗ σ)(W)` on one sample.
pub fn check_renormalization(
    pair: &SelfAffinePair,
    window: &AxisBox,
    steps: u32,
    sample: &MeasureSample,
    cap: u64,
) -> Result<RenormalizationCheck> {
    if window.dim() != pair.dim() || sample.dim != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), got: window.dim() });
    }
    let mu = expand_level(pair, steps, cap)?;
    let n = sample.count as f64;
    let matrix = pair.matrix();
    let lhs_hits = (0..sample.count).filter(|&i| window.contains(&matrix.apply_power(steps, sample.point(i)))).count();
    let lhs = lhs_hits as f64 / n;

    let mut acc = 0.0;
    if pair.dim() == 1 {
        let mut xs = sample.points.clone();
        xs.sort_by(f64::total_cmp);
        for (p, w) in mu.iter() {
            let lo = xs.partition_point(|&x| x < window.lo[0] - p[0]);
            let hi = xs.partition_point(|&x| x <= window.hi[0] - p[0]);
            acc += w as f64 * hi.saturating_sub(lo) as f64 / n;
        }
    } else {
        for (p, w) in mu.iter() {
            let neg: Vec<f64> = p.iter().map(|v| -v).collect();
            acc += w as f64 * sample.mass(&window.translated(&neg));
        }
    }
    let rhs = acc / mu.total_mass() as f64;
    let se = |p: f64| (p * (1.0 - p)).max(0.0).sqrt() / n.sqrt();
    Ok(RenormalizationCheck { lhs, rhs, stderr: se(lhs) + se(rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::pair_1d;
    use crate::DEFAULT_CAP;

    fn log3_2() -> f64 {
        2f64.ln() / 3f64.ln()
    }

    #[test]
    fn cantor_level_two() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let mu = expand_level(&p, 2, DEFAULT_CAP).unwrap();
        assert_eq!(mu.coords(), &[0.0, 2.0, 6.0, 8.0]);
        let est = upper_s_density_profile(&mu, log3_2(), &[8.0]).unwrap();
        let sup = est.per_threshold[0].sup.clone().unwrap();
        assert_eq!((sup.left, sup.right, sup.weight), (0.0, 8.0, 4));
        // Exhaustive over the 6 intervals.
        let mut best: f64 = 0.0;
        let xs = mu.coords();
        for i in 0..4 {
            for j in i + 1..4 {
                if xs[j] - xs[i] >= 8.0 {
                    best = best.max((j - i + 1) as f64 / (xs[j] - xs[i]).powf(log3_2()));
                }
            }
        }
        assert_eq!(sup.value, best);
        assert!((sup.value - 1.0771).abs() < 1e-4);
    }

    #[test]
    fn single_point_has_no_interval() {
        let est = upper_s_density_profile(&WeightedPointSet::from_reals(&[1.0]), 0.5, &[1.0]).unwrap();
        assert!(est.per_threshold[0].sup.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let pts = WeightedPointSet::from_points(2, &[(vec![0.0, 0.0], 1)]).unwrap();
        assert_eq!(upper_s_density_profile(&pts, 0.5, &[1.0]).unwrap_err(), Error::UnsupportedDimension(2));
        let empty = WeightedPointSet::from_reals(&[]);
        assert_eq!(upper_s_density_profile(&empty, 0.5, &[1.0]).unwrap_err(), Error::EmptyPointSet);
    }

    #[test]
    fn cantor_level_twelve_large_threshold() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let mu = expand_level(&p, 12, DEFAULT_CAP).unwrap();
        let est = upper_s_density_profile(&mu, log3_2(), &[1000.0]).unwrap();
        let v = est.per_threshold[0].sup.clone().unwrap().value;
        assert!((1.0..=1.01).contains(&v), "{v}");
    }

    #[test]
    fn convolution_examples() {
        let dirac = WeightedPointSet::dirac_origin(1);
        let b = WeightedPointSet::from_flat(1, vec![3.0, -1.0], vec![2, 5]).unwrap();
        assert_eq!(discrete_convolve(&dirac, &b).unwrap(), b);
        let a = WeightedPointSet::from_reals(&[0.0, 2.0]);
        let c = WeightedPointSet::from_reals(&[0.0, 6.0]);
        assert_eq!(discrete_convolve(&a, &c).unwrap(), WeightedPointSet::from_reals(&[0.0, 2.0, 6.0, 8.0]));
        let e = WeightedPointSet::from_reals(&[0.0, 8.0]);
        let sq = discrete_convolve(&e, &e).unwrap();
        assert_eq!(sq.coords(), &[0.0, 8.0, 16.0]);
        assert_eq!(sq.weights(), &[1, 2, 1]);
        let p2 = WeightedPointSet::dirac_origin(2);
        assert!(discrete_convolve(&a, &p2).is_err());
    }

    #[test]
    fn sampler_single_step() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let s = sample_self_similar_measure(&p, 1, 7, 0);
        assert_eq!(s.points.len(), 1);
        assert!(s.points[0] == 0.0 || s.points[0] == 2.0 / 3.0);
        assert_eq!(s, sample_self_similar_measure(&p, 1, 7, 0));
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let a = sample_self_similar_measure(&p, 1000, 42, 10);
        let b = sample_self_similar_measure(&p, 1000, 42, 10);
        assert_eq!(a.points, b.points);
        let c = sample_self_similar_measure(&p, 1000, 43, 10);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn renormalization_disjoint_window() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let s = sample_self_similar_measure(&p, 2000, 1, 20);
        let w = AxisBox::new(vec![50.0], vec![60.0]).unwrap();
        let c = check_renormalization(&p, &w, 1, &s, DEFAULT_CAP).unwrap();
        assert_eq!((c.lhs, c.rhs, c.stderr), (0.0, 0.0, 0.0));
        assert!(c.agrees(3.0));
    }

    #[test]
    fn renormalization_budget() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let s = sample_self_similar_measure(&p, 10, 1, 0);
        let w = AxisBox::new(vec![0.0], vec![2.0]).unwrap();
        assert!(matches!(check_renormalization(&p, &w, 10, &s, 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn hausdorff_of_cantor_profile() {
        let p = pair_1d(3.0, &[0.0, 2.0]).unwrap();
        let profiles: Vec<_> = (6..=10)
            .map(|k| {
                let mu = expand_level(&p, k, DEFAULT_CAP).unwrap();
                upper_s_density_profile(&mu, log3_2(), &natural_thresholds(mu.extent(), 6)).unwrap().with_level(k)
            })
            .collect();
        let h = hausdorff_from_sdensity(&profiles).unwrap();
        assert!(!h.divergent);
        assert!((0.99..=1.0).contains(&h.measure), "{}", h.measure);
    }
}
