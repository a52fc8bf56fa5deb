//! Multiband frequency plans.
//!
//! A [`SubbandPlan`] is the ordered set of carriers and bandwidths swept by the
//! transceiver together with the OFDM numerology used in every subband. Plans
//! are built explicitly, as contiguous sweeps, or by tiling named allocation
//! intervals such as the 3GPP FR3 candidates returned by
//! [`gpp_fr3_allocations`].

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng;
use crate::scalar::{from_usize, lit, speed_of_light, Real};

/// OFDM numerology shared by all subbands.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmParams<T> {
    subcarrier_spacing: T,
    pilot_seed: u64,
}

impl<T: Real> OfdmParams<T> {
    pub fn new(subcarrier_spacing: T, pilot_seed: u64) -> Result<Self> {
        if !(subcarrier_spacing > T::zero()) || !subcarrier_spacing.is_finite() {
            return invalid(format!("subcarrier spacing must be > 0, got {subcarrier_spacing}"));
        }
        Ok(Self {
            subcarrier_spacing,
            pilot_seed,
        })
    }

    pub fn subcarrier_spacing(&self) -> T {
        self.subcarrier_spacing
    }

    pub fn pilot_seed(&self) -> u64 {
        self.pilot_seed
    }

    /// OFDM symbol duration `1 / spacing`.
    pub fn symbol_duration(&self) -> T {
        T::one() / self.subcarrier_spacing
    }

    /// Number of subcarriers `bandwidth / spacing`; must be an even integer >= 2.
    pub fn subcarrier_count(&self, bandwidth: T) -> Result<usize> {
        let ratio = bandwidth / self.subcarrier_spacing;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > lit::<T>(1e-6) * rounded.max(T::one()) {
            return invalid(format!(
                "bandwidth {bandwidth} Hz is not a multiple of subcarrier spacing {} Hz",
                self.subcarrier_spacing
            ));
        }
        let n = rounded.to_usize().unwrap_or(0);
        if n < 2 || n % 2 != 0 {
            return invalid(format!("subcarrier count must be even and >= 2, got {n}"));
        }
        Ok(n)
    }

    /// Unit-magnitude 4-QAM preamble of length `n`.
    ///
    /// The sequence is a prefix of one seeded stream, so every subband sees
    /// the same pilots regardless of its subcarrier count.
    pub fn pilots(&self, n: usize) -> Vec<Complex<T>> {
        let mut stream = rng::stream(self.pilot_seed, &[rng::TAG_PILOTS]);
        let a = T::FRAC_1_SQRT_2();
        (0..n)
            .map(|_| {
                let re = if stream.random::<bool>() { a } else { -a };
                let im = if stream.random::<bool>() { a } else { -a };
                Complex::new(re, im)
            })
            .collect()
    }
}

/// One subband: carrier frequency and bandwidth in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subband<T> {
    carrier: T,
    bandwidth: T,
}

impl<T: Real> Subband<T> {
    pub fn new(carrier: T, bandwidth: T) -> Result<Self> {
        let half = bandwidth / lit(2.0);
        if !(half > T::zero()) || !(carrier > half) || !carrier.is_finite() {
            return invalid(format!(
                "subband must satisfy f > B/2 > 0, got f = {carrier} Hz, B = {bandwidth} Hz"
            ));
        }
        Ok(Self { carrier, bandwidth })
    }

    pub fn carrier(&self) -> T {
        self.carrier
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn low(&self) -> T {
        self.carrier - self.bandwidth / lit(2.0)
    }

    pub fn high(&self) -> T {
        self.carrier + self.bandwidth / lit(2.0)
    }
}

/// Ordered list of subbands with shared numerology and switching time.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPlan<T> {
    subbands: Vec<Subband<T>>,
    subcarriers: Vec<usize>,
    ofdm: OfdmParams<T>,
    switch_time: T,
}

impl<T: Real> SubbandPlan<T> {
    /// Validates and builds a plan.
    ///
    /// Carriers must be strictly ascending. Neighbouring subbands may share
    /// spectrum: allocation tilings overhang interval edges (see
    /// [`Tiling::PerInterval`]); use [`SubbandPlan::has_overlap`] to check.
    pub fn new(subbands: Vec<Subband<T>>, ofdm: OfdmParams<T>, switch_time: T) -> Result<Self> {
        if subbands.is_empty() {
            return invalid("a plan needs at least one subband");
        }
        if !(switch_time >= T::zero()) {
            return invalid("switch time must be >= 0");
        }
        if subbands.windows(2).any(|w| !(w[1].carrier > w[0].carrier)) {
            return invalid("subband carriers must be strictly ascending");
        }
        let subcarriers = subbands
            .iter()
            .map(|s| ofdm.subcarrier_count(s.bandwidth))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            subbands,
            subcarriers,
            ofdm,
            switch_time,
        })
    }

    pub fn len(&self) -> usize {
        self.subbands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subbands.is_empty()
    }

    pub fn subbands(&self) -> &[Subband<T>] {
        &self.subbands
    }

    pub fn subband(&self, k: usize) -> &Subband<T> {
        &self.subbands[k]
    }

    pub fn subcarrier_count(&self, k: usize) -> usize {
        self.subcarriers[k]
    }

    pub fn total_subcarriers(&self) -> usize {
        self.subcarriers.iter().sum()
    }

    pub fn ofdm(&self) -> &OfdmParams<T> {
        &self.ofdm
    }

    pub fn switch_time(&self) -> T {
        self.switch_time
    }

    pub fn carriers(&self) -> Vec<T> {
        self.subbands.iter().map(|s| s.carrier).collect()
    }

    /// Span from the lowest to the highest occupied frequency.
    pub fn aperture(&self) -> T {
        total_aperture(self)
    }

    pub fn nominal_resolution(&self) -> T {
        speed_of_light::<T>() / (lit::<T>(2.0) * self.aperture())
    }

    pub fn has_overlap(&self) -> bool {
        self.subbands.windows(2).any(|w| w[1].low() < w[0].high())
    }

    /// Common bandwidth if all subbands share one.
    pub fn common_bandwidth(&self) -> Option<T> {
        let b = self.subbands[0].bandwidth;
        let tol = lit::<T>(1e-9) * b;
        self.subbands
            .iter()
            .all(|s| (s.bandwidth - b).abs() <= tol)
            .then_some(b)
    }

    /// Carrier spacing if the carriers are equally spaced (K >= 2).
    pub fn carrier_spacing(&self) -> Option<T> {
        if self.len() < 2 {
            return None;
        }
        let d = self.subbands[1].carrier - self.subbands[0].carrier;
        let tol = lit::<T>(1e-9) * self.subbands[self.len() - 1].carrier;
        self.subbands
            .windows(2)
            .all(|w| (w[1].carrier - w[0].carrier - d).abs() <= tol)
            .then_some(d)
    }

    /// Plan restricted to `indices` (ascending, unique).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("subset indices must be strictly ascending");
        }
        if let Some(&k) = indices.iter().find(|&&k| k >= self.len()) {
            return invalid(format!("subband index {k} out of range for K = {}", self.len()));
        }
        Self::new(
            indices.iter().map(|&k| self.subbands[k]).collect(),
            self.ofdm.clone(),
            self.switch_time,
        )
    }
}

/// Named frequency intervals (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSet<T> {
    intervals: Vec<Allocation<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    pub label: String,
    pub low: T,
    pub high: T,
}

impl<T: Real> AllocationSet<T> {
    pub fn new(intervals: Vec<Allocation<T>>) -> Result<Self> {
        for (i, a) in intervals.iter().enumerate() {
            if !(a.low < a.high) {
                return invalid(format!("allocation {} has low >= high", a.label));
            }
            if intervals[..i].iter().any(|b| b.label == a.label) {
                return invalid(format!("duplicate allocation label {}", a.label));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[Allocation<T>] {
        &self.intervals
    }

    pub fn get(&self, label: &str) -> Option<&Allocation<T>> {
        self.intervals.iter().find(|a| a.label == label)
    }
}

/// 3GPP FR3 candidate intervals S1..S5.
pub fn gpp_fr3_allocations<T: Real>() -> AllocationSet<T> {
    let s = |label: &str, low: f64, high: f64| Allocation {
        label: label.to_string(),
        low: lit(low * 1e9),
        high: lit(high * 1e9),
    };
    AllocationSet::new(vec![
        s("S1", 7.125, 8.5),
        s("S2", 8.5, 10.5),
        s("S3", 12.7, 13.25),
        s("S4", 14.8, 15.35),
        s("S5", 15.35, 17.3),
    ])
    .expect("static allocation table is valid")
}

/// Contiguous sweep with carriers `f_start + k B`, `k = 0..count`.
pub fn make_contiguous_sweep<T: Real>(
    f_start: T,
    bandwidth: T,
    count: usize,
    ofdm: OfdmParams<T>,
    switch_time: T,
) -> Result<SubbandPlan<T>> {
    if count == 0 {
        return invalid("sweep needs at least one subband");
    }
    if !(bandwidth > T::zero()) {
        return invalid(format!("sweep bandwidth must be > 0, got {bandwidth}"));
    }
    let subbands = (0..count)
        .map(|k| Subband::new(f_start + from_usize::<T>(k) * bandwidth, bandwidth))
        .collect::<Result<Vec<_>>>()?;
    SubbandPlan::new(subbands, ofdm, switch_time)
}

/// How allocation intervals are covered by fixed-width tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tiling {
    /// Each interval is tiled on its own from its low edge upward; the last
    /// tile may overhang the high edge and therefore overlap the first tile
    /// of an adjacent interval.
    #[default]
    PerInterval,
    /// Intervals are tiled in ascending order and a tile never starts below
    /// the end of the previous one, so tiles never overlap.
    Packed,
}

/// Tiles the selected allocation intervals with subbands of width `granularity`.
pub fn plan_from_allocations<T: Real>(
    alloc: &AllocationSet<T>,
    selection: &[&str],
    granularity: T,
    ofdm: OfdmParams<T>,
    switch_time: T,
    tiling: Tiling,
) -> Result<SubbandPlan<T>> {
    if selection.is_empty() {
        return invalid("empty allocation selection");
    }
    if !(granularity > T::zero()) {
        return invalid("tiling granularity must be > 0");
    }
    let mut chosen = Vec::with_capacity(selection.len());
    for (i, label) in selection.iter().enumerate() {
        if selection[..i].contains(label) {
            return invalid(format!("allocation {label} selected twice"));
        }
        match alloc.get(label) {
            Some(a) => chosen.push(a),
            None => return invalid(format!("unknown allocation label {label}")),
        }
    }
    chosen.sort_by(|a, b| a.low.partial_cmp(&b.low).expect("finite edges"));

    let half = granularity / lit(2.0);
    let eps = lit::<T>(1e-9);
    let mut centers: Vec<T> = Vec::new();
    let mut cursor = T::neg_infinity();
    for a in chosen {
        let start = match tiling {
            Tiling::PerInterval => a.low,
            Tiling::Packed => a.low.max(cursor),
        };
        if start >= a.high {
            continue;
        }
        let tiles = ((a.high - start) / granularity - eps).ceil().max(T::one());
        let tiles = tiles.to_usize().unwrap_or(1);
        for i in 0..tiles {
            centers.push(start + granularity * from_usize::<T>(i) + half);
        }
        cursor = start + granularity * from_usize::<T>(tiles);
    }
    centers.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
    centers.dedup();
    let subbands = centers
        .into_iter()
        .map(|f| Subband::new(f, granularity))
        .collect::<Result<Vec<_>>>()?;
    SubbandPlan::new(subbands, ofdm, switch_time)
}

/// `(max_k f_k + B_k/2) - (min_k f_k - B_k/2)`.
pub fn total_aperture<T: Real>(plan: &SubbandPlan<T>) -> T {
    let low = plan
        .subbands
        .iter()
        .map(Subband::low)
        .fold(T::infinity(), T::min);
    let high = plan
        .subbands
        .iter()
        .map(Subband::high)
        .fold(T::neg_infinity(), T::max);
    high - low
}

/// Range resolution `c / (2 B)` of an aperture `B`.
pub fn nominal_resolution<T: Real>(aperture: T) -> Result<T> {
    if !(aperture > T::zero()) {
        return invalid(format!("aperture must be > 0, got {aperture}"));
    }
    Ok(speed_of_light::<T>() / (lit::<T>(2.0) * aperture))
}

/// Time to visit every subband once: `K t_switch`.
pub fn sweep_duration<T: Real>(plan: &SubbandPlan<T>) -> T {
    from_usize::<T>(plan.len()) * plan.switch_time
}
