//! Preprocessing: CFR estimation, calibration and oversampled CIRs.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::scalar::{from_usize, Real};
use crate::subband::SubbandPlan;
use crate::synth::{Cfr, CfrState, HardwareResponse};

/// Default IDFT oversampling factor.
pub const DEFAULT_OVERSAMPLING: usize = 16;

/// `Y / X`: least-squares CFR estimate from received pilot symbols.
pub fn estimate_cfr<T: Real>(
    subband: usize,
    rx: &[Complex<T>],
    pilots: &[Complex<T>],
) -> Result<Cfr<T>> {
    if rx.len() != pilots.len() {
        return invalid(format!(
            "{} received symbols for {} pilots",
            rx.len(),
            pilots.len()
        ));
    }
    if let Some(n) = pilots.iter().position(|a| a.norm_sqr() == T::zero()) {
        return invalid(format!("pilot {n} is zero"));
    }
    let samples = rx.iter().zip(pilots).map(|(y, x)| y / x).collect();
    Ok(Cfr::new(subband, samples, CfrState::Measured))
}

/// Removes the transceiver response: `H_meas / H_hw`.
pub fn calibrate<T: Real>(cfr: &Cfr<T>, hw: &HardwareResponse<T>) -> Result<Cfr<T>> {
    cfr.expect_state(CfrState::Measured)?;
    let curve = hw.matching_curve(cfr)?;
    let samples = cfr.samples.iter().zip(curve).map(|(h, g)| h / g).collect();
    Ok(Cfr::new(cfr.subband, samples, CfrState::Calibrated))
}

/// Channel impulse response on a dense, periodic delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir<T> {
    pub subband: usize,
    /// `samples[m]` is the response at delay `m * step` (periodic in `span`).
    pub samples: Vec<Complex<T>>,
    pub step: T,
    pub oversampling: usize,
}

impl<T: Real> Cir<T> {
    /// Unambiguous delay span `1 / df`.
    pub fn span(&self) -> T {
        from_usize::<T>(self.samples.len()) * self.step
    }

    /// Response at an arbitrary delay: nearest grid sample, wrapped periodically.
    pub fn at(&self, delay: T) -> Complex<T> {
        let m = self.samples.len() as i64;
        let idx = (delay / self.step).round().to_i64().unwrap_or(0);
        self.samples[idx.rem_euclid(m) as usize]
    }
}

/// Zero-padded IDFT of a calibrated CFR with `1/N` scaling.
///
/// With `N` subcarriers and oversampling `os`, the result has `N os`
/// samples spaced `1 / (B os)`, and a flat unit CFR maps to a unit peak at
/// zero delay.
pub fn cfr_to_cir<T: Real>(
    cfr: &Cfr<T>,
    plan: &SubbandPlan<T>,
    oversampling: usize,
) -> Result<Cir<T>> {
    cfr.expect_state(CfrState::Calibrated)?;
    if oversampling == 0 {
        return invalid("oversampling must be >= 1");
    }
    let k = cfr.subband;
    if k >= plan.len() || plan.subcarrier_count(k) != cfr.len() {
        return invalid(format!("CFR of subband {k} does not match the plan"));
    }
    let n = cfr.len();
    let m = n * oversampling;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    for (i, h) in cfr.samples.iter().enumerate() {
        let offset = i as i64 - (n / 2) as i64;
        buf[offset.rem_euclid(m as i64) as usize] = *h;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = T::one() / from_usize::<T>(n);
    for x in &mut buf {
        *x = *x * scale;
    }
    let step = T::one() / (plan.subband(k).bandwidth() * from_usize::<T>(oversampling));
    Ok(Cir {
        subband: k,
        samples: buf,
        step,
        oversampling,
    })
}
