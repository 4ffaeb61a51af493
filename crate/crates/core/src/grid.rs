//! Multiresolution grid coverage and the polysemy score.
//!
//! Level `l` (1-based) splits every dimension of a shared bounding box into
//! `2^l` half-open bins, the last one closed. A word's coverage at level `l`
//! is the fraction of the `(2^l)^D` bins holding at least one of its points,
//! and its score is `sum_l coverage_l / 2^(L - l)`.
//!
//! Only occupied bins are ever materialized: each point is binned once at the
//! finest level and coarser coordinates are obtained by right shifts, which is
//! exact because scaling by a power of two is exact in binary floating point.

use std::fmt;

use thiserror::Error;

use crate::vectors::Points;

/// Finest supported level; coordinates stay below `2^31`.
pub const MAX_LEVEL: u32 = 31;
/// Coverage denominators `2^(l*D)` must stay normal `f64`s.
pub const MAX_LEVEL_TIMES_DIMS: u32 = 1000;
const BOUNDS_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one level")]
    NoLevels,
    #[error("level {0} exceeds the supported maximum {MAX_LEVEL}")]
    LevelTooDeep(u32),
    #[error("levels * dims = {0} exceeds {MAX_LEVEL_TIMES_DIMS}")]
    TooFine(u32),
    #[error("bounds must have low < high in every dimension (dimension {0})")]
    BadBounds(usize),
    #[error("expected {expected} dimensions, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("level {level} outside 1..={levels}")]
    BadLevel { level: u32, levels: u32 },
    #[error("point coordinate {value} in dimension {dim} lies outside [{low}, {high}]")]
    OutOfRange {
        dim: usize,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("non-finite coordinate in dimension {0}")]
    NonFinite(usize),
    #[error("no points")]
    Empty,
}

/// Per-dimension `(low, high)` box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, GridError> {
        for (i, (lo, hi)) in pairs.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GridError::BadBounds(i));
            }
        }
        Ok(Self(pairs))
    }

    /// The same `(low, high)` for each of `dims` dimensions.
    pub fn uniform(dims: usize, low: f64, high: f64) -> Result<Self, GridError> {
        Self::new(vec![(low, high); dims])
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }
}

/// Min/max box over all rows, widened by `1e-9 * width` (or `1e-9` absolute
/// for a zero-width dimension) so every row lies strictly inside.
pub fn compute_bounds<'a>(
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> Result<Bounds, GridError> {
    let mut acc: Option<Vec<(f64, f64)>> = None;
    for row in rows {
        let acc = acc.get_or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); row.len()]);
        if row.len() != acc.len() {
            return Err(GridError::DimMismatch {
                expected: acc.len(),
                got: row.len(),
            });
        }
        for (i, (v, (lo, hi))) in row.iter().zip(acc.iter_mut()).enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite(i));
            }
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }
    let acc = acc.ok_or(GridError::Empty)?;
    Bounds::new(
        acc.into_iter()
            .map(|(lo, hi)| {
                let margin = if hi > lo { BOUNDS_MARGIN * (hi - lo) } else { BOUNDS_MARGIN };
                (lo - margin, hi + margin)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    levels: u32,
    bounds: Bounds,
}

impl GridConfig {
    pub fn new(levels: u32, bounds: Bounds) -> Result<Self, GridError> {
        if levels == 0 {
            return Err(GridError::NoLevels);
        }
        if levels > MAX_LEVEL {
            return Err(GridError::LevelTooDeep(levels));
        }
        let fine = levels.saturating_mul(bounds.dims() as u32);
        if fine > MAX_LEVEL_TIMES_DIMS {
            return Err(GridError::TooFine(fine));
        }
        if bounds.dims() == 0 {
            return Err(GridError::BadBounds(0));
        }
        Ok(Self { levels, bounds })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn dims(&self) -> usize {
        self.bounds.dims()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// `(2^level)^D` as a float.
    pub fn bin_count(&self, level: u32) -> f64 {
        2f64.powi((level as usize * self.dims()) as i32)
    }

    fn check_level(&self, level: u32) -> Result<(), GridError> {
        if level == 0 || level > self.levels {
            return Err(GridError::BadLevel {
                level,
                levels: self.levels,
            });
        }
        Ok(())
    }

    /// Bin coordinates at `level`, with the top edge clamped into the last bin.
    pub fn bin_index(&self, point: &[f64], level: u32) -> Result<BinIndex, GridError> {
        self.check_level(level)?;
        Ok(BinIndex {
            level,
            coords: self.coords_at(point, level)?,
        })
    }

    fn coords_at(&self, point: &[f64], level: u32) -> Result<Vec<u32>, GridError> {
        if point.len() != self.dims() {
            return Err(GridError::DimMismatch {
                expected: self.dims(),
                got: point.len(),
            });
        }
        let side = 2f64.powi(level as i32);
        let last = (1u32 << level) - 1;
        point
            .iter()
            .zip(self.bounds.pairs())
            .enumerate()
            .map(|(i, (&v, &(low, high)))| {
                if !v.is_finite() {
                    return Err(GridError::NonFinite(i));
                }
                if v < low || v > high {
                    return Err(GridError::OutOfRange {
                        dim: i,
                        value: v,
                        low,
                        high,
                    });
                }
                let t = (v - low) / (high - low);
                Ok(((t * side).floor() as u32).min(last))
            })
            .collect()
    }

    /// Geometric center of a bin.
    pub fn bin_center(&self, bin: &BinIndex) -> Vec<f64> {
        let side = 2f64.powi(bin.level as i32);
        bin.coords
            .iter()
            .zip(self.bounds.pairs())
            .map(|(&c, &(low, high))| low + (f64::from(c) + 0.5) / side * (high - low))
            .collect()
    }

    /// Finest-level coordinates of every point, row-major.
    pub fn finest_coords(&self, points: &Points) -> Result<Vec<u32>, GridError> {
        if points.dim() != self.dims() {
            return Err(GridError::DimMismatch {
                expected: self.dims(),
                got: points.dim(),
            });
        }
        let mut out = Vec::with_capacity(points.as_slice().len());
        for row in points.rows() {
            out.extend(self.coords_at(row, self.levels)?);
        }
        Ok(out)
    }

    pub fn coverage(&self, points: &Points) -> Result<CoverageProfile, GridError> {
        if points.is_empty() {
            return Err(GridError::Empty);
        }
        let fine = self.finest_coords(points)?;
        let occupied = occupied_counts(&fine, self.dims(), self.levels);
        let per_level = occupied
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / self.bin_count(i as u32 + 1))
            .collect();
        Ok(CoverageProfile { per_level, occupied })
    }

    pub fn score(&self, points: &Points) -> Result<f64, GridError> {
        Ok(polysemy_score(&self.coverage(points)?))
    }
}

/// Distinct occupied bins per level `1..=levels`, from finest-level coords.
fn occupied_counts(fine: &[u32], dims: usize, levels: u32) -> Vec<usize> {
    let n = fine.len() / dims;
    let mut shifted = fine.to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counts = vec![0; levels as usize];
    for level in (1..=levels).rev() {
        if level < levels {
            shifted.iter_mut().for_each(|c| *c >>= 1);
        }
        let row = |i: usize| &shifted[i * dims..(i + 1) * dims];
        order.sort_unstable_by(|&a, &b| row(a).cmp(row(b)));
        let distinct = 1 + order.windows(2).filter(|w| row(w[0]) != row(w[1])).count();
        counts[level as usize - 1] = distinct;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinIndex {
    pub level: u32,
    pub coords: Vec<u32>,
}

impl fmt::Display for BinIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl BinIndex {
    /// Parses `3,5,1` or `(3,5,1)`.
    pub fn parse(level: u32, text: &str) -> Option<BinIndex> {
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = inner
            .split(',')
            .map(|c| c.trim().parse().ok())
            .collect::<Option<Vec<u32>>>()?;
        let limit = 1u64 << level;
        coords
            .iter()
            .all(|&c| u64::from(c) < limit)
            .then_some(BinIndex { level, coords })
    }
}

/// Per-level occupied fractions; index 0 is level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageProfile {
    per_level: Vec<f64>,
    occupied: Vec<usize>,
}

impl CoverageProfile {
    /// Builds a profile directly from fractions (mainly for tests and dumps).
    pub fn from_fractions(per_level: Vec<f64>) -> Self {
        Self {
            occupied: Vec::new(),
            per_level,
        }
    }

    pub fn per_level(&self) -> &[f64] {
        &self.per_level
    }

    /// Occupied bin counts, when computed from points.
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn levels(&self) -> usize {
        self.per_level.len()
    }
}

/// `sum_{l=1..L} coverage_l / 2^(L-l)`.
pub fn polysemy_score(profile: &CoverageProfile) -> f64 {
    let levels = profile.levels() as i32;
    profile
        .per_level
        .iter()
        .enumerate()
        .map(|(i, c)| c * 2f64.powi(i as i32 + 1 - levels))
        .sum()
}

/// Upper bound of the score for `levels` levels: `2 - 2^(1-L)`.
pub fn max_score(levels: u32) -> f64 {
    2.0 - 2f64.powi(1 - levels as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dims: usize, levels: u32) -> GridConfig {
        GridConfig::new(levels, Bounds::uniform(dims, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn bounds_min_max_and_degenerate() {
        let rows = [vec![0.0, 0.0], vec![1.0, 2.0]];
        let b = compute_bounds(rows.iter().map(Vec::as_slice)).unwrap();
        let p = b.pairs();
        assert!(p[0].0 < 0.0 && p[0].0 > -1e-8 && p[0].1 > 1.0 && p[0].1 < 1.0 + 1e-8);
        assert!(p[1].1 > 2.0 && p[1].1 < 2.0 + 1e-8);

        let single = [vec![3.0]];
        let b = compute_bounds(single.iter().map(Vec::as_slice)).unwrap();
        assert!(b.pairs()[0].1 - b.pairs()[0].0 > 0.0);

        let mut shuffled = [vec![0.5, 0.2], vec![0.0, 0.0], vec![1.0, 2.0]];
        let a = compute_bounds(shuffled.iter().map(Vec::as_slice)).unwrap();
        shuffled.reverse();
        assert_eq!(a, compute_bounds(shuffled.iter().map(Vec::as_slice)).unwrap());

        let bad = [vec![f64::NAN]];
        assert!(compute_bounds(bad.iter().map(Vec::as_slice)).is_err());
        assert_eq!(compute_bounds(std::iter::empty()), Err(GridError::Empty));
    }

    #[test]
    fn bin_index_cases() {
        let g = unit(2, 3);
        assert_eq!(g.bin_index(&[0.1, 0.9], 1).unwrap().coords, vec![0, 1]);
        assert_eq!(g.bin_index(&[1.0, 1.0], 3).unwrap().coords, vec![7, 7]);
        assert_eq!(g.bin_index(&[0.0, 0.0], 3).unwrap().coords, vec![0, 0]);
        assert!(matches!(g.bin_index(&[1.5, 0.0], 1), Err(GridError::OutOfRange { dim: 0, .. })));
        assert!(matches!(g.bin_index(&[0.5, 0.5], 0), Err(GridError::BadLevel { .. })));
        assert!(matches!(g.bin_index(&[0.5, 0.5], 4), Err(GridError::BadLevel { .. })));
    }

    #[test]
    fn shifted_coords_match_direct_binning() {
        let g = unit(3, 6);
        let pts: Vec<f64> = (0..300).map(|i| ((i * 7919) % 1000) as f64 / 999.0).collect();
        let p = Points::new(3, pts).unwrap();
        let fine = g.finest_coords(&p).unwrap();
        for (i, row) in p.rows().enumerate() {
            for level in 1..=6 {
                let direct = g.bin_index(row, level).unwrap().coords;
                let shifted: Vec<u32> = fine[i * 3..i * 3 + 3].iter().map(|c| c >> (6 - level)).collect();
                assert_eq!(direct, shifted);
            }
        }
    }

    #[test]
    fn single_point_profile() {
        let g = unit(2, 3);
        let one = Points::new(2, vec![0.3, 0.3]).unwrap();
        let prof = g.coverage(&one).unwrap();
        assert_eq!(prof.per_level(), &[0.25, 1.0 / 16.0, 1.0 / 64.0]);
        let many = Points::new(2, [0.3, 0.3].repeat(20)).unwrap();
        assert_eq!(g.coverage(&many).unwrap().per_level(), prof.per_level());
    }

    #[test]
    fn scores_of_worked_example_profiles() {
        let w1 = CoverageProfile::from_fractions(vec![3.0 / 4.0, 7.0 / 16.0, 10.0 / 64.0]);
        let w2 = CoverageProfile::from_fractions(vec![1.0 / 4.0, 4.0 / 16.0, 7.0 / 64.0]);
        assert_eq!(polysemy_score(&w1), 0.5625);
        assert_eq!(polysemy_score(&w2), 0.296875);
        let full = CoverageProfile::from_fractions(vec![1.0; 3]);
        assert_eq!(polysemy_score(&full), 1.75);
        assert_eq!(max_score(3), 1.75);
    }

    #[test]
    fn config_validation() {
        let b = Bounds::uniform(20, 0.0, 1.0).unwrap();
        assert!(GridConfig::new(19, b.clone()).is_ok());
        assert_eq!(GridConfig::new(0, b.clone()), Err(GridError::NoLevels));
        assert!(GridConfig::new(19, Bounds::uniform(60, 0.0, 1.0).unwrap()).is_err());
        assert!(Bounds::new(vec![(1.0, 1.0)]).is_err());
        // (2^19)^20 = 2^380 is an exact f64
        let g = GridConfig::new(19, b).unwrap();
        assert_eq!(g.bin_count(19), 2f64.powi(380));
    }

    #[test]
    fn bin_display_and_parse() {
        let b = BinIndex { level: 3, coords: vec![3, 5, 1] };
        assert_eq!(b.to_string(), "(3,5,1)");
        assert_eq!(BinIndex::parse(3, "(3,5,1)"), Some(b));
        assert_eq!(BinIndex::parse(2, "3,5,1"), None);
    }

    #[test]
    fn bin_center_is_inside_bin() {
        let g = unit(2, 3);
        let b = BinIndex { level: 2, coords: vec![1, 3] };
        let c = g.bin_center(&b);
        assert_eq!(c, vec![0.375, 0.875]);
        assert_eq!(g.bin_index(&c, 2).unwrap(), b);
    }
}
