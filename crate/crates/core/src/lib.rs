//! Measures of self-affine sets computed from their digit expansions.
//!
//! A self-affine pair `(B, D)` consists of an expanding matrix `B` and a finite
//! digit set `D` containing the origin. Its attractor `K` is the unique compact
//! set with `B K = ⋃_{d ∈ D} (K + d)`. The crate works with the discrete
//! measure
//!
//! ```text
//! μ = lim_k Σ_{ℓ_0..ℓ_{k-1} ∈ D} δ(ℓ_0 + B ℓ_1 + … + B^{k-1} ℓ_{k-1})
//! ```
//!
//! and its level-`k` truncations `μ_k`:
//!
//! * [`beurling`]: the Lebesgue measure of a tile is `1 / D⁺(μ)`, where `D⁺` is
//!   the upper Beurling density. Window maxima are computed exactly.
//! * [`sdensity`]: for similarities with `card(D) < |det B|`, the Hausdorff
//!   measure `H^s(K)` is `1 / E_s⁺(μ)`, the reciprocal of the upper s-density.
//! * [`cantor`]: closed forms for the two-digit family `N K = K ∪ (K + d)`.
//! * [`attractor`]: an independent raster outer approximation of `K`, the
//!   origin classifier and the open-set-condition verdict.
//!
//! Everything here is deterministic: sorted canonical point sets, seeded
//! samplers and fixed tolerances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod beurling;
pub mod cantor;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod format;
pub mod pair;
pub mod points;
pub mod sdensity;
pub mod spec_file;

pub use error::{Error, Result};
pub use pair::{DigitSet, ExpandingMatrix, Regime, SelfAffinePair, SimilarityInfo};
pub use points::WeightedPointSet;

/// Default expansion budget, in units of total mass `m^k`.
pub const DEFAULT_CAP: u64 = 1 << 24;
