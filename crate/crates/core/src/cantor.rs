//! Closed forms for the two-digit family `N K = K ∪ (K + d)`, `N >= 3`, `d > 0`.

use crate::error::{Error, Result};
use crate::expansion::expand_level;
use crate::pair::{pair_1d, SelfAffinePair};
use crate::points::WeightedPointSet;

/// Tolerance for matching coefficients against `{0, d}` and interval endpoints.
const COEFF_TOL: f64 = 1e-12;
const POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantorPair {
    dilation: f64,
    digit: f64,
    s: f64,
}

impl CantorPair {
    pub fn new(dilation: f64, digit: f64) -> Result<Self> {
        if !(dilation >= 3.0) || !dilation.is_finite() {
            return Err(Error::InvalidCantorPair(format!("dilation must be >= 3, got {dilation}")));
        }
        if !(digit > 0.0) || !digit.is_finite() {
            return Err(Error::InvalidCantorPair(format!("digit must be > 0, got {digit}")));
        }
        Ok(Self { dilation, digit, s: 2f64.ln() / dilation.ln() })
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn digit(&self) -> f64 {
        self.digit
    }

    /// Similarity dimension `ln 2 / ln N`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn to_pair(&self) -> SelfAffinePair {
        pair_1d(self.dilation, &[0.0, self.digit]).expect("N >= 3 and d > 0 form a valid pair")
    }

    /// `b = Σ N^j r_j`.
    pub fn value(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, r| acc * self.dilation + r)
    }
}

/// Number of points of `D_∞` in `[0, b]` for `b = Σ_j N^j r_j`, `r_j ∈ {0, d}`:
/// `Σ_j 2^j (r_j / d) + 1`. Trailing zero coefficients are allowed.
pub fn count_upto(cp: &CantorPair, coeffs: &[f64]) -> Result<u64> {
    if coeffs.len() > 63 {
        return Err(Error::InvalidArgument("at most 63 coefficients".into()));
    }
    let mut count = 1u64;
    for (j, &r) in coeffs.iter().enumerate() {
        if (r - cp.digit).abs() <= COEFF_TOL * cp.digit {
            count += 1 << j;
        } else if r.abs() > COEFF_TOL * cp.digit {
            return Err(Error::InvalidCoefficient { index: j, value: r });
        }
    }
    Ok(count)
}

fn closed_count(mu: &WeightedPointSet, a: f64, b: f64) -> u64 {
    let xs = mu.coords();
    let lo = xs.partition_point(|&x| x < a - POINT_TOL);
    let hi = xs.partition_point(|&x| x <= b + POINT_TOL);
    mu.weights()[lo..hi.max(lo)].iter().sum()
}

/// `μ_k([a, b])` by enumeration.
pub fn interval_count(cp: &CantorPair, k: u32, a: f64, b: f64, cap: u64) -> Result<u64> {
    if a > b {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    let mu = expand_level(&cp.to_pair(), k, cap)?;
    Ok(closed_count(&mu, a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceViolation {
    pub a: f64,
    pub b: f64,
    pub count: u64,
    pub origin_count: u64,
}

/// Checks `μ_k([a, b]) <= μ_k([0, b - a])` on every interval with endpoints
/// in the support. Any other interval has the count of its smallest
/// point-bounded shrink, which is no longer, so these cover all cases.
pub fn translation_dominance_check(cp: &CantorPair, k: u32, cap: u64) -> Result<Option<DominanceViolation>> {
    let mu = expand_level(&cp.to_pair(), k, cap)?;
    let xs = mu.coords();
    let mut cum = vec![0u64];
    for &w in mu.weights() {
        cum.push(cum.last().unwrap() + w);
    }
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let count = cum[j + 1] - cum[i];
            let origin_count = closed_count(&mu, 0.0, xs[j] - xs[i]);
            if count > origin_count {
                return Ok(Some(DominanceViolation { a: xs[i], b: xs[j], count, origin_count }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SDensitySequence {
    /// `(m, v_m)` with `v_m = 2^m / (((N^m - 1)/(N - 1)) d)^s`.
    pub values: Vec<(u32, f64)>,
    /// `((N - 1)/d)^s`.
    pub limit: f64,
}

/// The ratios `μ(U_m) / diam(U_m)^s` on `U_m = [0, (N^m - 1)/(N - 1) d]`.
pub fn cantor_sdensity_sequence(cp: &CantorPair, m_max: u32) -> Result<SDensitySequence> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let n = cp.dilation;
    let values = (1..=m_max)
        .map(|m| {
            let len = (n.powi(m as i32) - 1.0) / (n - 1.0) * cp.digit;
            (m, 2f64.powi(m as i32) / len.powf(cp.s))
        })
        .collect();
    Ok(SDensitySequence { values, limit: ((n - 1.0) / cp.digit).powf(cp.s) })
}

/// `H^s(K) = ((N - 1)/d)^{-s}`.
pub fn cantor_hausdorff(cp: &CantorPair) -> f64 {
    ((cp.dilation - 1.0) / cp.digit).powf(-cp.s)
}
