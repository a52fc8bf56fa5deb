//! Coherence versus carrier frequency and combined bandwidth.

use rayon::prelude::*;

use super::{detect_peaks, empw, mpc, nmpm, PeakDetectConfig};
use crate::combine::{bp_combine, subband_profiles, RangeGrid, RangeProfile};
use crate::error::{invalid, Error, Result};
use crate::scalar::{from_usize, lit, Real};
use crate::subband::SubbandPlan;
use crate::synth::Cfr;

/// Curves with more than this many points are smoothed.
const SMOOTHING_MIN_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig<T> {
    /// Combined bandwidths to evaluate, Hz.
    pub total_bandwidths: Vec<T>,
    pub grid: RangeGrid<T>,
    pub peaks: PeakDetectConfig<T>,
    pub oversampling: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceRow<T> {
    /// Mean carrier of the window, Hz.
    pub center_frequency: T,
    pub total_bandwidth: T,
    pub mpc: T,
    pub nmpm_db: T,
    pub empw: T,
    pub smoothed: bool,
}

/// Rows grouped by total bandwidth (input order), then ascending carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport<T> {
    pub rows: Vec<CoherenceRow<T>>,
}

struct WindowMetrics<T> {
    mpc: T,
    nmpm: T,
    empw: T,
}

fn window_metrics<T: Real>(
    profiles: &[RangeProfile<T>],
    peaks: &PeakDetectConfig<T>,
) -> Result<WindowMetrics<T>> {
    let combined = bp_combine(profiles)?;
    let target = detect_peaks(&combined, peaks)?
        .strongest()
        .ok_or_else(|| Error::Undefined("no target detected in coherence window".into()))?;
    Ok(WindowMetrics {
        mpc: mpc(profiles, target.range)?,
        nmpm: nmpm(&combined, profiles, target.range)?,
        empw: empw(&combined, target.range)?,
    })
}

/// 3-point moving average; endpoints average the available neighbours.
fn smooth<T: Real>(v: &[T]) -> Vec<T> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(v.len() - 1);
            v[lo..=hi].iter().copied().sum::<T>() / from_usize::<T>(hi - lo + 1)
        })
        .collect()
}

/// MPC, NMPM and EMPW for every window of adjacent subbands spanning each
/// total bandwidth, averaged over snapshots.
///
/// `snapshots[s][k]` is the calibrated CFR of subband `k` in snapshot `s`.
/// The plan must use one common subband bandwidth `B`, and every total
/// bandwidth must be a multiple `m B` with `m <= K`. Windows are keyed by
/// their mean carrier; curves longer than five points get a 3-point moving
/// average.
pub fn coherence_sweep<T: Real>(
    snapshots: &[Vec<Cfr<T>>],
    plan: &SubbandPlan<T>,
    cfg: &SweepConfig<T>,
) -> Result<CoherenceReport<T>> {
    if snapshots.is_empty() {
        return invalid("coherence sweep needs at least one snapshot");
    }
    let Some(b) = plan.common_bandwidth() else {
        return invalid("coherence sweep needs equal subband bandwidths");
    };
    let mut widths = Vec::with_capacity(cfg.total_bandwidths.len());
    for &bt in &cfg.total_bandwidths {
        let m = (bt / b).round();
        if !(m >= T::one()) || (bt / b - m).abs() > lit(1e-6) {
            return invalid(format!("total bandwidth {bt} Hz is not a multiple of {b} Hz"));
        }
        let m = m.to_usize().unwrap_or(usize::MAX);
        if m > plan.len() {
            return invalid(format!(
                "total bandwidth {bt} Hz exceeds the plan's {} subbands",
                plan.len()
            ));
        }
        widths.push(m);
    }
    let windows: Vec<(usize, usize)> = widths
        .iter()
        .flat_map(|&m| (0..=plan.len() - m).map(move |w| (m, w)))
        .collect();

    let zero = || WindowMetrics {
        mpc: T::zero(),
        nmpm: T::zero(),
        empw: T::zero(),
    };
    let mut sums: Vec<WindowMetrics<T>> = windows.iter().map(|_| zero()).collect();
    for snap in snapshots {
        if snap.len() != plan.len() {
            return invalid(format!("snapshot has {} CFRs, plan has {}", snap.len(), plan.len()));
        }
        let profiles = subband_profiles(snap, plan, &cfg.grid, cfg.oversampling)?;
        let results = windows
            .par_iter()
            .map(|&(m, w)| window_metrics(&profiles[w..w + m], &cfg.peaks))
            .collect::<Result<Vec<_>>>()?;
        for (s, r) in sums.iter_mut().zip(results) {
            s.mpc = s.mpc + r.mpc;
            s.nmpm = s.nmpm + r.nmpm;
            s.empw = s.empw + r.empw;
        }
    }
    let n = from_usize::<T>(snapshots.len());
    let mut rows = Vec::with_capacity(windows.len());
    let mut offset = 0;
    for (&m, &bt) in widths.iter().zip(&cfg.total_bandwidths) {
        let count = plan.len() - m + 1;
        let block = &sums[offset..offset + count];
        let mut mpcs: Vec<T> = block.iter().map(|s| s.mpc / n).collect();
        let mut nmpms: Vec<T> = block.iter().map(|s| s.nmpm / n).collect();
        let mut empws: Vec<T> = block.iter().map(|s| s.empw / n).collect();
        let smoothed = count > SMOOTHING_MIN_POINTS;
        if smoothed {
            mpcs = smooth(&mpcs);
            nmpms = smooth(&nmpms);
            empws = smooth(&empws);
        }
        for w in 0..count {
            let center = (w..w + m)
                .map(|k| plan.subband(k).carrier())
                .sum::<T>()
                / from_usize::<T>(m);
            rows.push(CoherenceRow {
                center_frequency: center,
                total_bandwidth: bt,
                mpc: mpcs[w],
                nmpm_db: nmpms[w],
                empw: empws[w],
                smoothed,
            });
        }
        offset += count;
    }
    Ok(CoherenceReport { rows })
}
