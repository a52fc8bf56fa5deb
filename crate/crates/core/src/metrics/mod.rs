//! Coherence and detection metrics.
//!
//! MPC, NMPM and EMPW quantify how coherently a target adds up across
//! subbands; OSPA scores a detection set against ground truth.

mod ospa;
mod sweep;

use num_complex::Complex;

use crate::combine::{ProfileKind, RangeProfile};
use crate::error::{invalid, Error, Result};
use crate::scalar::{amplitude_db, from_usize, lit, Real};

pub use ospa::{align_rigid, ospa, Alignment};
pub use sweep::{coherence_sweep, CoherenceReport, CoherenceRow, SweepConfig};

/// One detected (or true) target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub range: T,
    pub magnitude: T,
}

/// Detected targets, sorted by range.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet<T> {
    pub detections: Vec<Detection<T>>,
    pub source: ProfileKind,
}

impl<T: Real> DetectionSet<T> {
    pub fn new(mut detections: Vec<Detection<T>>, source: ProfileKind) -> Self {
        detections.sort_by(|a, b| a.range.partial_cmp(&b.range).expect("finite ranges"));
        Self { detections, source }
    }

    /// Unit-magnitude points at `ranges`, e.g. ground truth.
    pub fn from_ranges(ranges: &[T], source: ProfileKind) -> Self {
        Self::new(
            ranges
                .iter()
                .map(|&range| Detection {
                    range,
                    magnitude: T::one(),
                })
                .collect(),
            source,
        )
    }

    pub fn ranges(&self) -> Vec<T> {
        self.detections.iter().map(|d| d.range).collect()
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    /// Strongest detection (first in range order on ties).
    pub fn strongest(&self) -> Option<Detection<T>> {
        self.detections
            .iter()
            .copied()
            .fold(None, |best: Option<Detection<T>>, d| match best {
                Some(b) if b.magnitude >= d.magnitude => Some(b),
                _ => Some(d),
            })
    }
}

/// Default detection threshold below the global maximum, dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 12.0;
/// Default half width of the direct-path exclusion zone around `R = 0`, m.
pub const DEFAULT_EXCLUSION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakDetectConfig<T> {
    /// Keep peaks no more than this many dB below the global maximum.
    pub threshold_db: T,
    pub min_separation: T,
    /// Samples with `|R| < exclusion` are ignored.
    pub exclusion: T,
}

impl<T: Real> PeakDetectConfig<T> {
    /// Defaults with minimum separation equal to `resolution`.
    pub fn for_resolution(resolution: T) -> Self {
        Self {
            threshold_db: lit(DEFAULT_THRESHOLD_DB),
            min_separation: resolution,
            exclusion: lit(DEFAULT_EXCLUSION),
        }
    }

    pub fn validate(&self, step: T) -> Result<()> {
        if !(self.threshold_db > T::zero()) {
            return invalid("peak threshold must be > 0 dB");
        }
        if !(self.min_separation >= step) {
            return invalid("peak minimum separation must be >= the grid step");
        }
        if !(self.exclusion >= T::zero()) {
            return invalid("exclusion zone must be >= 0");
        }
        Ok(())
    }
}

/// Local maxima of `|profile|` within `threshold_db` of the global maximum,
/// thinned greedily (strongest first) to `min_separation`.
pub fn detect_peaks<T: Real>(
    profile: &RangeProfile<T>,
    cfg: &PeakDetectConfig<T>,
) -> Result<DetectionSet<T>> {
    let grid = &profile.grid;
    cfg.validate(grid.step())?;
    let mag = profile.magnitudes();
    let allowed = |i: usize| grid.at(i).abs() >= cfg.exclusion;
    let global = (0..mag.len())
        .filter(|&i| allowed(i))
        .map(|i| mag[i])
        .fold(T::zero(), T::max);
    if global == T::zero() {
        return Ok(DetectionSet::new(Vec::new(), profile.kind));
    }
    let floor = global * lit::<T>(10.0).powf(-cfg.threshold_db / lit(20.0));
    let mut candidates: Vec<usize> = (1..mag.len().saturating_sub(1))
        .filter(|&i| allowed(i) && mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] >= floor)
        .collect();
    candidates.sort_by(|&a, &b| mag[b].partial_cmp(&mag[a]).expect("finite").then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in candidates {
        let r = grid.at(i);
        if kept
            .iter()
            .all(|&j| (grid.at(j) - r).abs() >= cfg.min_separation)
        {
            kept.push(i);
        }
    }
    Ok(DetectionSet::new(
        kept.into_iter()
            .map(|i| Detection {
                range: grid.at(i),
                magnitude: mag[i],
            })
            .collect(),
        profile.kind,
    ))
}

/// Mean phase coherence `|mean_k e^{j arg eta_k(R)}|` at range `r`.
pub fn mpc<T: Real>(profiles: &[RangeProfile<T>], r: T) -> Result<T> {
    if profiles.is_empty() {
        return invalid("MPC needs at least one profile");
    }
    let mut sum = Complex::new(T::zero(), T::zero());
    for p in profiles {
        let x = p.at(r);
        let m = x.norm();
        if m == T::zero() {
            return Err(Error::UndefinedPhase(r.to_f64().unwrap_or(f64::NAN)));
        }
        sum = sum + x / m;
    }
    Ok((sum.norm() / from_usize::<T>(profiles.len())).min(T::one()))
}

/// `20 log10(|eta(R)| / mean_k |eta_k(R)|)`, floored at -200 dB.
pub fn nmpm<T: Real>(combined: &RangeProfile<T>, profiles: &[RangeProfile<T>], r: T) -> Result<T> {
    if profiles.is_empty() {
        return invalid("NMPM needs at least one profile");
    }
    let mean = profiles.iter().map(|p| p.at(r).norm()).sum::<T>() / from_usize::<T>(profiles.len());
    if mean == T::zero() {
        return Err(Error::Undefined(format!("NMPM at {r} m: all subband profiles are zero")));
    }
    Ok(amplitude_db(combined.at(r).norm() / mean))
}

/// Width of the contiguous half-power region of `|eta|^2` around the local
/// maximum at `r`, as (sample count) x (grid step).
pub fn empw<T: Real>(combined: &RangeProfile<T>, r: T) -> Result<T> {
    let p: Vec<T> = combined.magnitudes().iter().map(|&m| m * m).collect();
    let i = combined.grid.nearest(r);
    let left_ok = i == 0 || p[i] >= p[i - 1];
    let right_ok = i + 1 == p.len() || p[i] >= p[i + 1];
    if !left_ok || !right_ok || p[i] == T::zero() {
        return invalid(format!("{r} m is not a local maximum of the profile"));
    }
    let half = p[i] / lit(2.0);
    let mut lo = i;
    while lo > 0 && p[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < p.len() && p[hi + 1] >= half {
        hi += 1;
    }
    Ok(from_usize::<T>(hi - lo + 1) * combined.grid.step())
}
