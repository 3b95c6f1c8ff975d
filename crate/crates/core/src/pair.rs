//! Validation and classification of self-affine pairs `(B, D)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest power of `B^{-1}` tried by the expansivity certificate.
pub const MAX_CERT_POWER: u32 = 64;
/// Tolerance for treating `|det B|` as an integer.
pub const DET_INTEGER_TOL: f64 = 1e-9;
/// Entrywise tolerance for `BᵀB = ρ² I`.
pub const SIMILARITY_TOL: f64 = 1e-9;

/// An invertible real matrix with `‖(B^{-1})^p‖_∞ < 1` for some `p <= 64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandingMatrix {
    dim: usize,
    entries: Vec<f64>,
    inverse: Vec<f64>,
    det_abs: f64,
    cert_power: u32,
    cert_norm: f64,
}

impl ExpandingMatrix {
    /// Builds the matrix from row-major entries and certifies expansivity.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let m = DMatrix::from_row_slice(dim, dim, &entries);
        let det_abs = m.determinant().abs();
        if !(det_abs > 0.0) || !det_abs.is_finite() {
            return Err(Error::NotInvertible(det_abs));
        }
        let inv = m.clone().try_inverse().ok_or(Error::NotInvertible(det_abs))?;
        let (cert_power, cert_norm) = contraction_certificate(&inv).ok_or(Error::NotExpanding(MAX_CERT_POWER))?;
        Ok(Self { dim, entries, inverse: row_major(&inv), det_abs, cert_power, cert_norm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries of `B`.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major entries of `B^{-1}`.
    pub fn inverse(&self) -> &[f64] {
        &self.inverse
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Smallest `p` with `‖B^{-p}‖_∞ < 1`, and that norm.
    pub fn certificate(&self) -> (u32, f64) {
        (self.cert_power, self.cert_norm)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub fn inverse_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.inverse)
    }

    /// `B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.entries, x)
    }

    /// `B^{-1} x`.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, x)
    }

    /// `B^j x`, by repeated multiplication.
    pub fn apply_power(&self, j: u32, x: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        for _ in 0..j {
            v = self.apply(&v);
        }
        v
    }

    /// Upper bound on `Σ_{t>=1} ‖B^{-t}‖_∞`, finite thanks to the certificate.
    pub fn inverse_series_bound(&self) -> f64 {
        let inv = self.inverse_dmatrix();
        let mut power = DMatrix::identity(self.dim, self.dim);
        let mut head = 0.0;
        for _ in 0..self.cert_power {
            power = &power * &inv;
            head += inf_norm(&power);
        }
        head / (1.0 - self.cert_norm)
    }
}

/// Row-major square matrix times vector.
pub(crate) fn mat_vec(entries: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| entries[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Operator infinity norm: the largest absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn contraction_certificate(inv: &DMatrix<f64>) -> Option<(u32, f64)> {
    let mut power = inv.clone();
    for p in 1..=MAX_CERT_POWER {
        let norm = inf_norm(&power);
        if !norm.is_finite() {
            return None;
        }
        if norm < 1.0 {
            return Some((p, norm));
        }
        power = &power * inv;
    }
    None
}

/// A finite digit set containing the zero vector, digits pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitSet {
    dim: usize,
    digits: Vec<Vec<f64>>,
}

impl DigitSet {
    pub fn new(dim: usize, digits: Vec<Vec<f64>>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::MissingZeroDigit);
        }
        for d in &digits {
            if d.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: d.len() });
            }
        }
        for (i, a) in digits.iter().enumerate() {
            if digits[..i].iter().any(|b| b == a) {
                return Err(Error::DuplicateDigit(i));
            }
        }
        if !digits.iter().any(|d| d.iter().all(|&v| v == 0.0)) {
            return Err(Error::MissingZeroDigit);
        }
        Ok(Self { dim, digits })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[Vec<f64>] {
        &self.digits
    }

    /// Largest infinity norm over the digits.
    pub fn max_norm(&self) -> f64 {
        self.digits.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Relation between `m = card(D)` and `|det B|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `m = |det B|` with `|det B|` an integer.
    TileCandidate,
    /// `m < |det B|`.
    Fractal,
    /// `m > |det B|`.
    Overfull,
}

impl Regime {
    pub fn classify(m: usize, det_abs: f64) -> Self {
        let rounded = det_abs.round();
        if (det_abs - rounded).abs() <= DET_INTEGER_TOL {
            let det = rounded as u128;
            let m = m as u128;
            return match m.cmp(&det) {
                std::cmp::Ordering::Equal => Regime::TileCandidate,
                std::cmp::Ordering::Less => Regime::Fractal,
                std::cmp::Ordering::Greater => Regime::Overfull,
            };
        }
        if (m as f64) < det_abs {
            Regime::Fractal
        } else {
            Regime::Overfull
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::TileCandidate => "tile-candidate",
            Regime::Fractal => "fractal",
            Regime::Overfull => "overfull",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfAffinePair {
    matrix: ExpandingMatrix,
    digits: DigitSet,
    regime: Regime,
}

impl SelfAffinePair {
    pub fn new(matrix: ExpandingMatrix, digits: DigitSet) -> Result<Self> {
        if matrix.dim() != digits.dim() {
            return Err(Error::DimensionMismatch { expected: matrix.dim(), got: digits.dim() });
        }
        let regime = Regime::classify(digits.len(), matrix.det_abs());
        Ok(Self { matrix, digits, regime })
    }

    pub fn matrix(&self) -> &ExpandingMatrix {
        &self.matrix
    }

    pub fn digits(&self) -> &DigitSet {
        &self.digits
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Number of digits `m`.
    pub fn m(&self) -> usize {
        self.digits.len()
    }

    /// The map `f_d(x) = B^{-1}(x + d)`.
    pub fn contract(&self, digit: usize, x: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(&self.digits.digits[digit]).map(|(a, b)| a + b).collect();
        self.matrix.apply_inverse(&shifted)
    }
}

/// Validates `B` (row-major, `n×n`) and the digit rows into a pair.
pub fn validate_pair(matrix_rows: &[Vec<f64>], digit_rows: &[Vec<f64>]) -> Result<SelfAffinePair> {
    let n = matrix_rows.len();
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let mut entries = Vec::with_capacity(n * n);
    for row in matrix_rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        entries.extend_from_slice(row);
    }
    if digit_rows.is_empty() {
        return Err(Error::MissingZeroDigit);
    }
    let matrix = ExpandingMatrix::new(n, entries)?;
    let digits = DigitSet::new(n, digit_rows.to_vec())?;
    SelfAffinePair::new(matrix, digits)
}

/// Convenience constructor for one-dimensional pairs `(b, D)`.
pub fn pair_1d(b: f64, digits: &[f64]) -> Result<SelfAffinePair> {
    let rows: Vec<Vec<f64>> = digits.iter().map(|&d| vec![d]).collect();
    validate_pair(&[vec![b]], &rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityInfo {
    pub is_similarity: bool,
    /// Scaling factor `ρ`; `NaN` when not a similarity.
    pub rho: f64,
    /// `ln m / ln ρ`; `NaN` when not a similarity.
    pub sim_dimension: f64,
}

/// Checks whether `BᵀB = ρ² I` and, if so, returns `ρ` and `s = log_ρ m`.
pub fn detect_similarity(pair: &SelfAffinePair) -> SimilarityInfo {
    let b = pair.matrix.to_dmatrix();
    let btb = b.transpose() * &b;
    let n = pair.dim();
    let scale = btb[(0, 0)];
    let mut is_similarity = scale > 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { scale } else { 0.0 };
            if (btb[(i, j)] - target).abs() > SIMILARITY_TOL {
                is_similarity = false;
            }
        }
    }
    if !is_similarity {
        return SimilarityInfo { is_similarity: false, rho: f64::NAN, sim_dimension: f64::NAN };
    }
    let rho = scale.sqrt();
    SimilarityInfo { is_similarity: true, rho, sim_dimension: (pair.m() as f64).ln() / rho.ln() }
}
