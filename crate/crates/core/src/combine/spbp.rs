//! Subsets-product backprojection.
//!
//! Two BP profiles built from different subband subsets `K0` and `K1` have
//! grating lobes in different places; multiplying their magnitudes keeps the
//! common main lobe and suppresses the rest. `K0` is all subbands but one
//! interior index; `K1` is found by exhaustive search for the subset whose
//! product RAF `|Psi_K0| |Psi_K1|` has the best PSLR.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use super::{bp_subset, check_grids, pslr_of, raf_term, ProfileKind, RangeGrid, RangeProfile};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scalar::{from_usize, lit, Real};
use crate::subband::SubbandPlan;

/// Largest plan the exhaustive `K1` search accepts.
pub const MAX_SEARCH_SUBBANDS: usize = 20;

/// Candidates whose PSLR is within this many dB of the best are ties.
pub const PSLR_TIE_DB: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpbpConfig<T> {
    /// Main-lobe half width, m.
    pub omega: T,
    /// PSLR evaluation region `[-r_max, r_max]`, m.
    pub r_max: T,
    pub min_cardinality: usize,
    /// Minimum aperture of a candidate as a fraction of the plan aperture.
    pub min_coverage: T,
    /// RAF grid step used by the search, m.
    pub step: T,
    pub seed: u64,
}

impl<T: Real> SpbpConfig<T> {
    /// Defaults scaled to the plan resolution `res`: `omega = 1.2 res`,
    /// `r_max = 1 m`, at least 2 subbands covering half the aperture,
    /// search step `res / 16`.
    pub fn for_plan(plan: &SubbandPlan<T>, seed: u64) -> Self {
        let res = plan.nominal_resolution();
        Self {
            omega: lit::<T>(1.2) * res,
            r_max: T::one(),
            min_cardinality: 2,
            min_coverage: lit(0.5),
            step: res / lit(16.0),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero()) {
            return invalid("SPBP main-lobe half width must be > 0");
        }
        if self.min_cardinality < 2 {
            return invalid("SPBP minimum cardinality must be >= 2");
        }
        if !(self.r_max > self.omega) || !(self.step > T::zero()) {
            return invalid("SPBP needs r_max > omega and step > 0");
        }
        Ok(())
    }
}

/// `K0`: every index of `0..k` except one interior index drawn from `seed`.
pub fn spbp_select_k0(k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 3 {
        return invalid(format!("SPBP needs K >= 3 subbands, got {k}"));
    }
    let drop = rng::stream(seed, &[rng::TAG_SPBP, k as u64]).random_range(1..k - 1);
    Ok((0..k).filter(|&i| i != drop).collect())
}

fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

fn indices_of(mask: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Aperture of the subbands in `mask`.
fn coverage<T: Real>(plan: &SubbandPlan<T>, mask: u32) -> T {
    let (lo, hi) = (0..plan.len())
        .filter(|&i| mask & (1 << i) != 0)
        .map(|i| plan.subband(i))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), s| {
            (lo.min(s.low()), hi.max(s.high()))
        });
    hi - lo
}

/// Whether the subset `mask` is an admissible `K1` candidate.
fn admissible<T: Real>(plan: &SubbandPlan<T>, mask: u32, k0_mask: u32, cfg: &SpbpConfig<T>) -> bool {
    let full: u32 = (1 << plan.len()) - 1;
    mask != 0
        && mask != full
        && mask != k0_mask
        && mask.count_ones() as usize >= cfg.min_cardinality
        && coverage(plan, mask) >= cfg.min_coverage * plan.aperture()
}

fn check_plan<T: Real>(plan: &SubbandPlan<T>) -> Result<()> {
    let k = plan.len();
    if k < 3 {
        return invalid(format!("SPBP needs K >= 3 subbands, got {k}"));
    }
    if k > MAX_SEARCH_SUBBANDS {
        return invalid(format!(
            "exhaustive SPBP search is limited to K <= {MAX_SEARCH_SUBBANDS}, got {k}"
        ));
    }
    Ok(())
}

/// Candidate subsets allowed by `cfg`, as ascending index lists.
pub fn spbp_candidates<T: Real>(
    plan: &SubbandPlan<T>,
    k0: &[usize],
    cfg: &SpbpConfig<T>,
) -> Result<Vec<Vec<usize>>> {
    check_plan(plan)?;
    let k0_mask = mask_of(k0);
    Ok((1..(1u32 << plan.len()))
        .filter(|&m| admissible(plan, m, k0_mask, cfg))
        .map(|m| indices_of(m, plan.len()))
        .collect())
}

/// Masks visited per work unit of the search.
const CHUNK: u32 = 1 << 12;

/// Exhaustive search for `K1`.
///
/// Subsets are visited in Gray-code order so each step adds or removes a
/// single RAF term; the order is split into fixed chunks scored in
/// parallel. The RAF magnitude is even in `R`, so only `R >= 0` is
/// evaluated. The best PSLR wins, and candidates within [`PSLR_TIE_DB`] of
/// it are broken by smaller size, then lexicographic order.
pub fn spbp_search_k1<T: Real>(
    plan: &SubbandPlan<T>,
    k0: &[usize],
    cfg: &SpbpConfig<T>,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    check_plan(plan)?;
    let k = plan.len();
    if k0.windows(2).any(|w| w[1] <= w[0]) || k0.iter().any(|&i| i >= k) {
        return invalid("K0 must be ascending indices into the plan");
    }
    let k0_mask = mask_of(k0);
    let grid = RangeGrid::new(T::zero(), cfg.r_max, cfg.step)?;
    let points = grid.points();
    let terms: Vec<Vec<Complex<T>>> = plan
        .subbands()
        .iter()
        .map(|s| {
            points
                .iter()
                .map(|&r| raf_term(s.carrier(), s.bandwidth(), r))
                .collect()
        })
        .collect();
    let direct_sum = |mask: u32| -> Vec<Complex<T>> {
        (0..points.len())
            .map(|i| {
                (0..k)
                    .filter(|&j| mask & (1 << j) != 0)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + terms[j][i])
            })
            .collect()
    };
    let base: Vec<T> = direct_sum(k0_mask)
        .iter()
        .map(|x| x.norm() / from_usize::<T>(k0.len()))
        .collect();
    let total: u32 = 1 << k;
    let chunks: Vec<u32> = (0..total.div_ceil(CHUNK)).collect();
    let scored = chunks
        .par_iter()
        .map(|&c| -> Result<Vec<(u32, T)>> {
            let first = c * CHUNK;
            let last = (first + CHUNK).min(total);
            let mut mask = first ^ (first >> 1);
            let mut sum = direct_sum(mask);
            let mut out = Vec::new();
            let mut gamma = vec![T::zero(); points.len()];
            for i in first..last {
                if i > first {
                    let bit = i.trailing_zeros() as usize;
                    mask ^= 1 << bit;
                    let add = mask & (1 << bit) != 0;
                    for (s, t) in sum.iter_mut().zip(&terms[bit]) {
                        *s = if add { *s + t } else { *s - t };
                    }
                }
                if !admissible(plan, mask, k0_mask, cfg) {
                    continue;
                }
                let n = from_usize::<T>(mask.count_ones() as usize);
                for ((g, s), b) in gamma.iter_mut().zip(&sum).zip(&base) {
                    *g = s.norm() / n * *b;
                }
                out.push((mask, pslr_of(&grid, &gamma, cfg.omega, cfg.r_max)?));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut flat: Vec<(u32, T)> = scored.into_iter().flatten().collect();
    if flat.is_empty() {
        return Err(Error::NoCandidate(format!(
            "no subset of {k} subbands has >= {} members and coverage >= {}",
            cfg.min_cardinality, cfg.min_coverage
        )));
    }
    flat.sort_by_key(|&(m, _)| m);
    let candidates: Vec<Vec<usize>> = flat.iter().map(|&(m, _)| indices_of(m, k)).collect();
    let scores: Vec<T> = flat.iter().map(|&(_, s)| s).collect();
    Ok(pick_best(&candidates, &scores))
}

/// Highest score with the tie rule; `scores[i]` belongs to `candidates[i]`.
pub(crate) fn pick_best<T: Real>(candidates: &[Vec<usize>], scores: &[T]) -> Vec<usize> {
    let best = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = lit::<T>(PSLR_TIE_DB);
    candidates
        .iter()
        .zip(scores)
        .filter(|(_, &s)| s >= best - tol || s == best)
        .map(|(c, _)| c)
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .expect("at least one candidate")
        .clone()
}

/// `|BP_K0| |BP_K1|` as a magnitude-only profile.
pub fn spbp_profile<T: Real>(
    profiles: &[RangeProfile<T>],
    k0: &[usize],
    k1: &[usize],
) -> Result<RangeProfile<T>> {
    let grid = check_grids(profiles)?;
    let a = bp_subset(profiles, k0)?;
    let b = bp_subset(profiles, k1)?;
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| Complex::new(x.norm() * y.norm(), T::zero()))
        .collect();
    RangeProfile::new(grid, samples, ProfileKind::Spbp)
}
