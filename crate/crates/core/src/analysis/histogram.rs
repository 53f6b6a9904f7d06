//! Relative face dimensions `k / (d - 1)` binned in 5 % steps.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{ratio, Rational};

/// Ordered as on a histogram axis: `∅ < [0%,5%) < ... < [95%,100%) < 100% < ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DimensionBin {
    /// `k = -1`: the cut touches no point.
    EmptyFace,
    /// Interval index `i` stands for `[5i %, 5(i+1) %)`, `i` in `0..20`.
    Percent(u8),
    /// `k = d - 1`.
    ExactlyFull,
    /// `k = d`: the cut holds with equality on the whole polyhedron.
    WholePolytope,
}

impl DimensionBin {
    /// All 23 bins in axis order.
    pub fn all() -> impl Iterator<Item = DimensionBin> {
        std::iter::once(DimensionBin::EmptyFace)
            .chain((0..20).map(DimensionBin::Percent))
            .chain([DimensionBin::ExactlyFull, DimensionBin::WholePolytope])
    }

    pub fn label(&self) -> String {
        match self {
            DimensionBin::EmptyFace => "∅".to_string(),
            DimensionBin::Percent(i) => format!("[{}%,{}%)", 5 * *i as u32, 5 * (*i as u32 + 1)),
            DimensionBin::ExactlyFull => "100%".to_string(),
            DimensionBin::WholePolytope => "∞".to_string(),
        }
    }

    /// Inverse of [`label`](Self::label).
    pub fn from_label(s: &str) -> Option<DimensionBin> {
        DimensionBin::all().find(|b| b.label() == s.trim())
    }
}

impl fmt::Display for DimensionBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinError {
    #[error("face dimension {k} outside [-1, {d}]")]
    OutOfRange { k: isize, d: isize },
    #[error("relative dimension {k}/({d}-1) is undefined")]
    Degenerate { k: isize, d: isize },
}

/// Bin of a face of dimension `k` in a polyhedron of dimension `d`.
pub fn relative_dimension_bin(k: isize, d: isize) -> Result<DimensionBin, BinError> {
    if k < -1 || k > d {
        return Err(BinError::OutOfRange { k, d });
    }
    if k == -1 {
        return Ok(DimensionBin::EmptyFace);
    }
    if k == d {
        return Ok(DimensionBin::WholePolytope);
    }
    if d <= 1 {
        return Err(BinError::Degenerate { k, d });
    }
    if k == d - 1 {
        return Ok(DimensionBin::ExactlyFull);
    }
    // floor(20 k / (d - 1)) < 20 since k < d - 1
    Ok(DimensionBin::Percent((20 * k / (d - 1)) as u8))
}

/// Each instance carries total weight `1/M`, split evenly over its cuts, so
/// a cut contributes `1/(M l)` to its bin. Instances without cuts are left
/// out of `M`. Bins are returned in axis order; empty bins are omitted.
pub fn build_histogram(results: &[(String, Vec<(isize, isize)>)]) -> Result<Vec<(DimensionBin, Rational)>, BinError> {
    let with_cuts: Vec<_> = results.iter().filter(|(_, cuts)| !cuts.is_empty()).collect();
    let m = with_cuts.len() as i64;
    let mut bins: BTreeMap<DimensionBin, Rational> = BTreeMap::new();
    for (_, cuts) in with_cuts {
        let w = ratio(1, m * cuts.len() as i64);
        for &(k, d) in cuts {
            *bins.entry(relative_dimension_bin(k, d)?).or_insert_with(Rational::zero) += &w;
        }
    }
    Ok(bins.into_iter().collect())
}
