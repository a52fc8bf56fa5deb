//! Multiband combination.
//!
//! Per-subband range profiles `eta_k(R) = h_k(2R/c) e^{j 4 pi f_k R / c}`
//! are combined coherently by backprojection ([`bp_combine`]), by the
//! subsets-product variant in [`spbp`], or replaced by sparse reconstruction
//! in [`omp`]. The range ambiguity function ([`raf`]) is the noiseless BP
//! response to a point target at zero range.

pub mod omp;
pub mod spbp;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::preproc::{cfr_to_cir, Cir};
use crate::scalar::{amplitude_db, cis, from_usize, lit, sinc, speed_of_light, Real};
use crate::subband::SubbandPlan;
use crate::synth::Cfr;

pub use omp::{omp_combine, OmpConfig, OmpResult};
pub use spbp::{spbp_profile, spbp_search_k1, spbp_select_k0, SpbpConfig};

/// Uniform range grid `start + i step`, `i = 0 .. len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeGrid<T> {
    start: T,
    step: T,
    len: usize,
}

impl<T: Real> RangeGrid<T> {
    /// Grid from `start` up to and including `stop` (within rounding).
    pub fn new(start: T, stop: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return invalid(format!("grid step must be > 0, got {step}"));
        }
        if !(start < stop) || !stop.is_finite() || !start.is_finite() {
            return invalid(format!("grid needs start < stop, got [{start}, {stop}]"));
        }
        let n = ((stop - start) / step + lit(1e-9)).floor();
        let len = n.to_usize().map(|n| n + 1).ok_or_else(|| {
            Error::InvalidArgument(format!("grid [{start}, {stop}] / {step} is too large"))
        })?;
        Ok(Self { start, step, len })
    }

    /// Grid `i step` for `|i| <= round(half_width / step)`; contains `R = 0` exactly.
    pub fn symmetric(half_width: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !(half_width > T::zero()) {
            return invalid("symmetric grid needs half width > 0 and step > 0");
        }
        let n = (half_width / step).round().to_usize().unwrap_or(0).max(1);
        Ok(Self {
            start: -(from_usize::<T>(n) * step),
            step,
            len: 2 * n + 1,
        })
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn stop(&self) -> T {
        self.at(self.len - 1)
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn at(&self, i: usize) -> T {
        self.start + from_usize::<T>(i) * self.step
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    /// Index of the grid point nearest to `r`, clamped to the grid.
    pub fn nearest(&self, r: T) -> usize {
        let i = ((r - self.start) / self.step).round();
        if i <= T::zero() {
            0
        } else {
            i.to_usize().unwrap_or(usize::MAX).min(self.len - 1)
        }
    }
}

/// What a range profile was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Subband(usize),
    Bp,
    /// Magnitude only; samples are real and non-negative.
    Spbp,
    Omp,
    Raf,
}

/// Complex reflectivity on a range grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile<T> {
    pub grid: RangeGrid<T>,
    pub samples: Vec<Complex<T>>,
    pub kind: ProfileKind,
}

impl<T: Real> RangeProfile<T> {
    pub fn new(grid: RangeGrid<T>, samples: Vec<Complex<T>>, kind: ProfileKind) -> Result<Self> {
        if samples.len() != grid.len() {
            return invalid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            ));
        }
        Ok(Self {
            grid,
            samples,
            kind,
        })
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.samples.iter().map(|x| x.norm()).collect()
    }

    /// Magnitudes in dB relative to `reference`, floored at -200 dB.
    pub fn magnitudes_db(&self, reference: T) -> Vec<T> {
        self.samples
            .iter()
            .map(|x| amplitude_db(x.norm() / reference))
            .collect()
    }

    /// Sample nearest to range `r`.
    pub fn at(&self, r: T) -> Complex<T> {
        self.samples[self.grid.nearest(r)]
    }

    /// Index and magnitude of the largest sample (first on ties).
    pub fn peak(&self) -> (usize, T) {
        self.samples
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, bm), (i, x)| {
                let m = x.norm();
                if m > bm {
                    (i, m)
                } else {
                    (bi, bm)
                }
            })
    }
}

/// Carrier-compensated range profile of one subband.
pub fn range_profile<T: Real>(cir: &Cir<T>, f_k: T, grid: &RangeGrid<T>) -> Result<RangeProfile<T>> {
    let c = speed_of_light::<T>();
    let two = lit::<T>(2.0);
    let span = cir.span();
    let d0 = two * grid.start() / c;
    let d1 = two * grid.stop() / c;
    if d1 - d0 > span || d0 < -span || d1 > span {
        return invalid(format!(
            "range grid [{}, {}] m exceeds the unambiguous CIR span of {} m",
            grid.start(),
            grid.stop(),
            span * c / two
        ));
    }
    let four_pi_f_over_c = lit::<T>(4.0) * T::PI() * f_k / c;
    let samples = (0..grid.len())
        .map(|i| {
            let r = grid.at(i);
            cir.at(two * r / c) * cis(four_pi_f_over_c * r)
        })
        .collect();
    RangeProfile::new(*grid, samples, ProfileKind::Subband(cir.subband))
}

/// Range profiles of every calibrated CFR in `cfrs`, in input order.
pub fn subband_profiles<T: Real>(
    cfrs: &[Cfr<T>],
    plan: &SubbandPlan<T>,
    grid: &RangeGrid<T>,
    oversampling: usize,
) -> Result<Vec<RangeProfile<T>>> {
    cfrs.par_iter()
        .map(|cfr| {
            let cir = cfr_to_cir(cfr, plan, oversampling)?;
            range_profile(&cir, plan.subband(cfr.subband).carrier(), grid)
        })
        .collect()
}

fn check_grids<T: Real>(profiles: &[RangeProfile<T>]) -> Result<RangeGrid<T>> {
    let Some(first) = profiles.first() else {
        return invalid("need at least one range profile");
    };
    if profiles.iter().any(|p| p.grid != first.grid) {
        return invalid("range profiles are on different grids");
    }
    Ok(first.grid)
}

/// Backprojection: mean of the per-subband profiles.
pub fn bp_combine<T: Real>(profiles: &[RangeProfile<T>]) -> Result<RangeProfile<T>> {
    let grid = check_grids(profiles)?;
    let k = from_usize::<T>(profiles.len());
    let samples = (0..grid.len())
        .map(|i| {
            let sum = profiles
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.samples[i]);
            sum / k
        })
        .collect();
    RangeProfile::new(grid, samples, ProfileKind::Bp)
}

/// BP over the subset `indices` of `profiles`.
pub fn bp_subset<T: Real>(profiles: &[RangeProfile<T>], indices: &[usize]) -> Result<RangeProfile<T>> {
    let picked = indices
        .iter()
        .map(|&k| {
            profiles
                .get(k)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("no profile for subband {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    bp_combine(&picked)
}

/// `sinc(2 B R / c) e^{j 4 pi f R / c}`: one subband's contribution to the RAF.
pub(crate) fn raf_term<T: Real>(f: T, b: T, r: T) -> Complex<T> {
    let c = speed_of_light::<T>();
    cis(lit::<T>(4.0) * T::PI() * f * r / c) * sinc(lit::<T>(2.0) * b * r / c)
}

/// Range ambiguity function of `plan`, normalized so `Psi(0) = 1`.
pub fn raf<T: Real>(plan: &SubbandPlan<T>, grid: &RangeGrid<T>) -> RangeProfile<T> {
    let all: Vec<usize> = (0..plan.len()).collect();
    raf_subset(plan, &all, grid).expect("full index set is valid")
}

/// RAF of the subbands `indices` of `plan`.
pub fn raf_subset<T: Real>(
    plan: &SubbandPlan<T>,
    indices: &[usize],
    grid: &RangeGrid<T>,
) -> Result<RangeProfile<T>> {
    if indices.is_empty() {
        return invalid("RAF of an empty subset");
    }
    if let Some(&k) = indices.iter().find(|&&k| k >= plan.len()) {
        return invalid(format!("subband index {k} out of range"));
    }
    let k = from_usize::<T>(indices.len());
    let samples = (0..grid.len())
        .map(|i| {
            let r = grid.at(i);
            let sum = indices.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &j| {
                let s = plan.subband(j);
                acc + raf_term(s.carrier(), s.bandwidth(), r)
            });
            sum / k
        })
        .collect();
    RangeProfile::new(*grid, samples, ProfileKind::Raf)
}

/// Dirichlet kernel of `k` carriers `f0 + i spacing`:
/// `e^{j (2 pi / c) (2 f0 + (k-1) spacing) R} sin(2 pi k spacing R / c) / sin(2 pi spacing R / c)`.
pub fn dirichlet<T: Real>(r: T, k: usize, spacing: T, f0: T) -> Complex<T> {
    let c = speed_of_light::<T>();
    let two_pi = lit::<T>(2.0) * T::PI();
    let kk = from_usize::<T>(k);
    let phase = two_pi / c * (lit::<T>(2.0) * f0 + (kk - T::one()) * spacing) * r;
    let x = two_pi * spacing * r / c;
    // sin(K x) / sin(x) is pi-periodic up to the sign (-1)^{(K-1) m}.
    let m = (x / T::PI()).round();
    let xr = x - m * T::PI();
    let ratio = if xr == T::zero() {
        kk
    } else {
        (kk * xr).sin() / xr.sin()
    };
    let odd = (m.abs().to_u64().unwrap_or(0) % 2 == 1) && (k % 2 == 0);
    let ratio = if odd { -ratio } else { ratio };
    cis(phase) * ratio
}

fn region_bounds<T: Real>(grid: &RangeGrid<T>, r_max: T) -> (usize, usize) {
    let lo = (0..grid.len()).find(|&i| grid.at(i) >= -r_max);
    let hi = (0..grid.len()).rev().find(|&i| grid.at(i) <= r_max);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi => (lo, hi + 1),
        _ => (0, 0),
    }
}

/// PSLR of magnitudes `mag` on `grid`, in dB.
pub(crate) fn pslr_of<T: Real>(grid: &RangeGrid<T>, mag: &[T], omega: T, r_max: T) -> Result<T> {
    let (lo, hi) = region_bounds(grid, r_max);
    if lo == hi {
        return Err(Error::UndefinedPslr(format!(
            "no grid samples within +-{r_max} m"
        )));
    }
    let mut peak = lo;
    for i in lo..hi {
        if mag[i] > mag[peak] {
            peak = i;
        }
    }
    let r_peak = grid.at(peak);
    let side = (lo..hi)
        .filter(|&i| (grid.at(i) - r_peak).abs() > omega)
        .map(|i| mag[i])
        .fold(None, |acc: Option<T>, m| Some(acc.map_or(m, |a| a.max(m))));
    let Some(side) = side else {
        return Err(Error::UndefinedPslr(format!(
            "main lobe +-{omega} m covers the whole region +-{r_max} m"
        )));
    };
    if !(mag[peak] > T::zero()) {
        return Err(Error::UndefinedPslr("profile is identically zero".into()));
    }
    if side == T::zero() {
        return Ok(T::infinity());
    }
    Ok(lit::<T>(20.0) * (mag[peak] / side).log10())
}

/// Peak-to-sidelobe ratio in dB over `[-r_max, r_max]`, main lobe `peak +- omega`.
pub fn pslr<T: Real>(profile: &RangeProfile<T>, omega: T, r_max: T) -> Result<T> {
    if !(omega > T::zero()) {
        return invalid("main-lobe half width must be > 0");
    }
    pslr_of(&profile.grid, &profile.magnitudes(), omega, r_max)
}

/// A sidelobe: local maximum outside the main lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe<T> {
    pub range: T,
    /// Level relative to the main peak, dB.
    pub level_db: T,
}

/// Local maxima of `|profile|` outside `peak +- omega` within `[-r_max, r_max]`,
/// strongest first.
pub fn sidelobes<T: Real>(profile: &RangeProfile<T>, omega: T, r_max: T) -> Vec<Lobe<T>> {
    let mag = profile.magnitudes();
    let grid = &profile.grid;
    let (lo, hi) = region_bounds(grid, r_max);
    if hi < lo + 3 {
        return Vec::new();
    }
    let peak = (lo..hi).fold(lo, |b, i| if mag[i] > mag[b] { i } else { b });
    let r_peak = grid.at(peak);
    let mut lobes: Vec<Lobe<T>> = (lo + 1..hi - 1)
        .filter(|&i| mag[i] > mag[i - 1] && mag[i] >= mag[i + 1])
        .filter(|&i| (grid.at(i) - r_peak).abs() > omega)
        .map(|i| Lobe {
            range: grid.at(i),
            level_db: amplitude_db(mag[i] / mag[peak]),
        })
        .collect();
    lobes.sort_by(|a, b| b.level_db.partial_cmp(&a.level_db).expect("finite levels"));
    lobes
}
