//! CFR synthesis.
//!
//! The channel is built directly in the frequency domain: for subband `k`
//! and subcarrier `n` the ideal response is
//! `sum_l rho_{l,k} e^{j theta_{l,k}} e^{-j 2 pi (f_k + n df) 2 R_l / c}`.
//! Measured CFRs then pass through a hardware response, white phase jitter
//! and additive circular Gaussian noise.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scalar::{cis, from_usize, lit, Real};
use crate::scene::Scene;
use crate::subband::SubbandPlan;

/// Processing stage of a CFR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfrState {
    Ideal,
    Measured,
    Calibrated,
}

/// Channel frequency response of one subband, subcarriers `-N/2 .. N/2-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfr<T> {
    pub subband: usize,
    pub samples: Vec<Complex<T>>,
    pub state: CfrState,
}

impl<T: Real> Cfr<T> {
    pub fn new(subband: usize, samples: Vec<Complex<T>>, state: CfrState) -> Self {
        Self {
            subband,
            samples,
            state,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub(crate) fn expect_state(&self, expected: CfrState) -> Result<()> {
        if self.state == expected {
            Ok(())
        } else {
            Err(Error::StateMismatch {
                subband: self.subband,
                expected,
                found: self.state,
            })
        }
    }
}

/// Baseband offset `n df` of the `i`-th stored subcarrier out of `n`.
pub fn subcarrier_offset<T: Real>(i: usize, n: usize, spacing: T) -> T {
    (from_usize::<T>(i) - from_usize::<T>(n / 2)) * spacing
}

/// Noiseless CFR of subband `k`.
pub fn ideal_cfr<T: Real>(scene: &Scene<T>, plan: &SubbandPlan<T>, k: usize) -> Result<Cfr<T>> {
    if k >= plan.len() {
        return invalid(format!("subband index {k} out of range for K = {}", plan.len()));
    }
    let f_k = plan.subband(k).carrier();
    let n = plan.subcarrier_count(k);
    let df = plan.ofdm().subcarrier_spacing();
    let two_pi = lit::<T>(2.0) * T::PI();
    let mut samples = vec![Complex::new(T::zero(), T::zero()); n];
    for l in 0..scene.len() {
        let gain = scene.path_gain(l, k, f_k)?;
        let tau = scene.targets()[l].delay();
        for (i, h) in samples.iter_mut().enumerate() {
            let f = f_k + subcarrier_offset(i, n, df);
            *h = *h + gain * cis(-two_pi * f * tau);
        }
    }
    Ok(Cfr::new(k, samples, CfrState::Ideal))
}

/// Parameters of the default smooth-ripple hardware generator.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareParams<T> {
    /// Peak magnitude ripple, dB.
    pub ripple_db: T,
    /// Peak phase ripple, degrees.
    pub phase_ripple_deg: T,
    pub seed: u64,
}

impl<T: Real> Default for HardwareParams<T> {
    fn default() -> Self {
        Self {
            ripple_db: lit(1.0),
            phase_ripple_deg: lit(25.0),
            seed: 0,
        }
    }
}

/// Complex frequency response of the transceiver, one curve per subband.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareResponse<T> {
    curves: Vec<Vec<Complex<T>>>,
}

impl<T: Real> HardwareResponse<T> {
    /// Unit response for every subcarrier of `plan`.
    pub fn identity(plan: &SubbandPlan<T>) -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self {
            curves: (0..plan.len())
                .map(|k| vec![one; plan.subcarrier_count(k)])
                .collect(),
        }
    }

    pub fn from_curves(curves: Vec<Vec<Complex<T>>>) -> Result<Self> {
        for (k, c) in curves.iter().enumerate() {
            if let Some(n) = c.iter().position(|h| !(h.norm() > T::zero()) || !h.norm().is_finite()) {
                return invalid(format!(
                    "hardware response of subband {k} is zero or non-finite at subcarrier {n}"
                ));
            }
        }
        Ok(Self { curves })
    }

    /// Smooth random ripple spanning the whole plan.
    ///
    /// Magnitude and phase are each a sum of three sinusoids in absolute
    /// frequency with random periods and offsets, scaled so the largest
    /// excursion over all subcarriers is exactly `ripple_db` and
    /// `phase_ripple_deg`.
    pub fn generate(plan: &SubbandPlan<T>, params: &HardwareParams<T>) -> Result<Self> {
        if !(params.ripple_db >= T::zero()) || !(params.phase_ripple_deg >= T::zero()) {
            return invalid("hardware ripple amplitudes must be >= 0");
        }
        let df = plan.ofdm().subcarrier_spacing();
        let freqs: Vec<Vec<T>> = (0..plan.len())
            .map(|k| {
                let n = plan.subcarrier_count(k);
                let f_k = plan.subband(k).carrier();
                (0..n).map(|i| f_k + subcarrier_offset(i, n, df)).collect()
            })
            .collect();
        let lo = plan.subband(0).low();
        let span = plan.aperture();
        let mut s = rng::stream(params.seed, &[rng::TAG_HARDWARE]);
        let mut ripple = || -> Vec<(T, T, T)> {
            (0..3)
                .map(|_| {
                    let cycles = lit::<T>(0.5 + 3.5 * rand::Rng::random::<f64>(&mut s));
                    let offset = lit::<T>(std::f64::consts::TAU * rand::Rng::random::<f64>(&mut s));
                    let weight = lit::<T>(0.3 + 0.7 * rand::Rng::random::<f64>(&mut s));
                    (cycles, offset, weight)
                })
                .collect()
        };
        let mag_terms = ripple();
        let phase_terms = ripple();
        let eval = |terms: &[(T, T, T)], f: T| -> T {
            let x = (f - lo) / span;
            terms
                .iter()
                .map(|&(c, o, w)| w * (lit::<T>(2.0) * T::PI() * c * x + o).sin())
                .sum()
        };
        let peak = |terms: &[(T, T, T)]| -> T {
            freqs
                .iter()
                .flatten()
                .map(|&f| eval(terms, f).abs())
                .fold(T::zero(), T::max)
        };
        let mag_scale = params.ripple_db / peak(&mag_terms).max(T::epsilon());
        let phase_scale =
            params.phase_ripple_deg.to_radians() / peak(&phase_terms).max(T::epsilon());
        let curves = freqs
            .iter()
            .map(|fs| {
                fs.iter()
                    .map(|&f| {
                        let db = mag_scale * eval(&mag_terms, f);
                        let mag = lit::<T>(10.0).powf(db / lit(20.0));
                        cis(phase_scale * eval(&phase_terms, f)) * mag
                    })
                    .collect()
            })
            .collect();
        Self::from_curves(curves)
    }

    pub fn curve(&self, k: usize) -> Option<&[Complex<T>]> {
        self.curves.get(k).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub(crate) fn matching_curve(&self, cfr: &Cfr<T>) -> Result<&[Complex<T>]> {
        match self.curve(cfr.subband) {
            Some(c) if c.len() == cfr.len() => Ok(c),
            Some(c) => invalid(format!(
                "hardware curve of subband {} has {} samples, CFR has {}",
                cfr.subband,
                c.len(),
                cfr.len()
            )),
            None => invalid(format!("no hardware curve for subband {}", cfr.subband)),
        }
    }
}

/// `H_hw H` for an ideal CFR.
pub fn apply_hardware<T: Real>(cfr: &Cfr<T>, hw: &HardwareResponse<T>) -> Result<Cfr<T>> {
    cfr.expect_state(CfrState::Ideal)?;
    let curve = hw.matching_curve(cfr)?;
    let samples = cfr.samples.iter().zip(curve).map(|(h, g)| h * g).collect();
    Ok(Cfr::new(cfr.subband, samples, CfrState::Measured))
}

/// Oscillator model.
///
/// Timing offset and normalized CFO cancel in a monostatic transceiver and
/// are carried only for completeness; they do not alter synthesized data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockModel<T> {
    /// White phase-noise floor alpha_0, dBc/Hz. `-inf` disables jitter.
    pub phase_noise_floor: T,
    /// Nominal LO frequency, Hz.
    pub lo_frequency: T,
    pub timing_offset: T,
    pub cfo: T,
}

impl<T: Real> ClockModel<T> {
    pub fn new(phase_noise_floor: T, lo_frequency: T) -> Result<Self> {
        if !(lo_frequency > T::zero()) {
            return invalid(format!("LO frequency must be > 0, got {lo_frequency}"));
        }
        Ok(Self {
            phase_noise_floor,
            lo_frequency,
            timing_offset: T::zero(),
            cfo: T::zero(),
        })
    }

    pub fn noiseless() -> Self {
        Self {
            phase_noise_floor: T::neg_infinity(),
            lo_frequency: lit(10e6),
            timing_offset: T::zero(),
            cfo: T::zero(),
        }
    }
}

/// `sqrt((f/nu)^2 2 10^(alpha_0/10) B)` in radians.
pub fn phase_noise_std<T: Real>(f_k: T, b_k: T, clock: &ClockModel<T>) -> T {
    let ratio = f_k / clock.lo_frequency;
    let floor = lit::<T>(10.0).powf(clock.phase_noise_floor / lit(10.0));
    (ratio * ratio * lit(2.0) * floor * b_k).sqrt()
}

/// Applies i.i.d. Gaussian phase jitter to a measured CFR.
pub fn perturb_clock<T: Real>(
    cfr: &Cfr<T>,
    plan: &SubbandPlan<T>,
    clock: &ClockModel<T>,
    seed: u64,
) -> Result<Cfr<T>> {
    cfr.expect_state(CfrState::Measured)?;
    let band = plan.subbands().get(cfr.subband).ok_or_else(|| {
        Error::InvalidArgument(format!("subband index {} not in plan", cfr.subband))
    })?;
    let std = phase_noise_std(band.carrier(), band.bandwidth(), clock);
    if std == T::zero() {
        return Ok(cfr.clone());
    }
    let mut s = rng::stream(seed, &[rng::TAG_CLOCK, cfr.subband as u64]);
    let samples = cfr
        .samples
        .iter()
        .map(|h| h * cis(std * lit::<T>(rng::standard_normal(&mut s))))
        .collect();
    Ok(Cfr::new(cfr.subband, samples, CfrState::Measured))
}

/// Additive noise; `snr_db = None` means noiseless.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    pub snr_db: Option<T>,
    pub seed: u64,
}

impl<T: Real> NoiseModel<T> {
    pub fn noiseless() -> Self {
        Self {
            snr_db: None,
            seed: 0,
        }
    }

    pub fn new(snr_db: T, seed: u64) -> Result<Self> {
        if !snr_db.is_finite() {
            return invalid("SNR must be finite; use a noiseless model instead");
        }
        Ok(Self {
            snr_db: Some(snr_db),
            seed,
        })
    }
}

/// Strongest target's CFR magnitude in subband `k`, `None` for an empty scene.
pub fn reference_magnitude<T: Real>(
    scene: &Scene<T>,
    plan: &SubbandPlan<T>,
    k: usize,
) -> Result<Option<T>> {
    let f_k = plan.subband(k).carrier();
    let mut best: Option<T> = None;
    for l in 0..scene.len() {
        let a = scene.path_amplitude(l, k, f_k)?;
        best = Some(best.map_or(a, |b| b.max(a)));
    }
    Ok(best)
}

/// Adds circular complex Gaussian noise with `|reference|^2 / sigma^2 = 10^(SNR/10)`.
pub fn add_noise<T: Real>(
    cfr: &Cfr<T>,
    reference: Option<T>,
    noise: &NoiseModel<T>,
) -> Result<Cfr<T>> {
    cfr.expect_state(CfrState::Measured)?;
    let Some(snr) = noise.snr_db else {
        return Ok(cfr.clone());
    };
    let Some(reference) = reference else {
        return invalid("finite SNR needs at least one target as reference level");
    };
    let sigma = reference / lit::<T>(10.0).powf(snr / lit(20.0));
    let per_component = sigma * T::FRAC_1_SQRT_2();
    let mut s = rng::stream(noise.seed, &[rng::TAG_NOISE, cfr.subband as u64]);
    let samples = cfr
        .samples
        .iter()
        .map(|h| {
            let re = lit::<T>(rng::standard_normal(&mut s));
            let im = lit::<T>(rng::standard_normal(&mut s));
            h + Complex::new(re, im) * per_component
        })
        .collect();
    Ok(Cfr::new(cfr.subband, samples, CfrState::Measured))
}

/// Simulates `n_snapshots` full sweeps of measured CFRs.
///
/// Snapshot `s` draws phase jitter and noise from streams derived from
/// `(noise.seed, s)`, so the output does not depend on thread count.
pub fn simulate_sweep<T: Real>(
    scene: &Scene<T>,
    plan: &SubbandPlan<T>,
    hw: &HardwareResponse<T>,
    clock: &ClockModel<T>,
    noise: &NoiseModel<T>,
    n_snapshots: usize,
) -> Result<Vec<Vec<Cfr<T>>>> {
    if n_snapshots == 0 {
        return invalid("need at least one snapshot");
    }
    let measured = (0..plan.len())
        .map(|k| apply_hardware(&ideal_cfr(scene, plan, k)?, hw))
        .collect::<Result<Vec<_>>>()?;
    let references = (0..plan.len())
        .map(|k| reference_magnitude(scene, plan, k))
        .collect::<Result<Vec<_>>>()?;
    if noise.snr_db.is_some() && scene.is_empty() {
        return invalid("finite SNR needs at least one target as reference level");
    }
    (0..n_snapshots)
        .into_par_iter()
        .map(|s| {
            let snap_seed = rng::derive_seed(noise.seed, &[rng::TAG_SNAPSHOT, s as u64]);
            let snap_noise = NoiseModel {
                snr_db: noise.snr_db,
                seed: snap_seed,
            };
            measured
                .iter()
                .zip(&references)
                .map(|(cfr, &reference)| {
                    let jittered = perturb_clock(cfr, plan, clock, snap_seed)?;
                    add_noise(&jittered, reference, &snap_noise)
                })
                .collect()
        })
        .collect()
}

/// Received pilot symbols `a_n H(n df)`.
pub fn modulate<T: Real>(pilots: &[Complex<T>], cfr: &Cfr<T>) -> Result<Vec<Complex<T>>> {
    if pilots.len() != cfr.len() {
        return invalid(format!(
            "{} pilots for a CFR of {} samples",
            pilots.len(),
            cfr.len()
        ));
    }
    Ok(pilots.iter().zip(&cfr.samples).map(|(a, h)| a * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{amplitude, AntennaGains, RcsModel, ScatteringCenter};
    use crate::subband::{make_contiguous_sweep, OfdmParams};

    const C: f64 = 299_792_458.0;

    fn plan(k: usize) -> SubbandPlan<f64> {
        let ofdm = OfdmParams::new(500e6 / 128.0, 1).unwrap();
        make_contiguous_sweep(6.5e9, 0.5e9, k, ofdm, 0.01).unwrap()
    }

    fn scene(ranges: &[f64]) -> Scene<f64> {
        let t = ranges
            .iter()
            .map(|&r| ScatteringCenter::new(r, RcsModel::isotropic(1.0)).unwrap())
            .collect();
        Scene::new(t, AntennaGains::unit()).unwrap()
    }

    #[test]
    fn empty_scene_is_zero() {
        let h = ideal_cfr(&Scene::empty(), &plan(2), 1).unwrap();
        assert_eq!(h.len(), 128);
        assert!(h.samples.iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn carrier_phase_at_center_subcarrier() {
        let p = plan(1);
        let s = scene(&[1.5]);
        let h = ideal_cfr(&s, &p, 0).unwrap();
        let rho = amplitude(&s.targets()[0], 6.5e9, (1.0, 1.0)).unwrap();
        let cycles = 6.5e9 * 3.0 / C;
        let expected = Complex::from_polar(rho, -2.0 * std::f64::consts::PI * cycles.fract());
        assert!((h.samples[64] - expected).norm() < 1e-9 * rho);
    }

    #[test]
    fn superposition() {
        let p = plan(3);
        let a = ideal_cfr(&scene(&[1.2]), &p, 2).unwrap();
        let b = ideal_cfr(&scene(&[1.4]), &p, 2).unwrap();
        let ab = ideal_cfr(&scene(&[1.2, 1.4]), &p, 2).unwrap();
        for i in 0..ab.len() {
            assert!((ab.samples[i] - a.samples[i] - b.samples[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_noise_figures() {
        let clock = ClockModel::new(-210.0, 10e6).unwrap();
        let s = phase_noise_std(22e9, 1e9, &clock);
        let oracle = ((22e9_f64 / 10e6).powi(2) * 2.0 * 1e-21 * 1e9).sqrt();
        assert!((s - oracle).abs() <= 1e-12 * oracle);
        assert!((s.to_degrees() - 0.178).abs() < 5e-4);
        assert!((phase_noise_std(10e9, 0.5e9, &clock) - 1e-3).abs() < 1e-15);
        assert_eq!(phase_noise_std(22e9, 1e9, &ClockModel::noiseless()), 0.0);
        assert!(ClockModel::new(-210.0, 0.0).is_err());
    }

    #[test]
    fn jitter_statistics_and_magnitude() {
        let p = plan(1);
        let h = Cfr::new(0, vec![Complex::new(2.0, 0.0); 128], CfrState::Measured);
        // Floor chosen so that sigma_phi = 0.2 deg at 6.5 GHz, 0.5 GHz.
        let target = 0.2_f64.to_radians();
        let floor = 10.0 * (target * target / ((6.5e9 / 10e6_f64).powi(2) * 2.0 * 0.5e9)).log10();
        let clock = ClockModel::new(floor, 10e6).unwrap();
        let mut phases = Vec::new();
        for seed in 0..100 {
            let j = perturb_clock(&h, &p, &clock, seed).unwrap();
            for s in &j.samples {
                assert!((s.norm() - 2.0).abs() < 1e-12);
                phases.push(s.arg());
            }
        }
        let n = phases.len() as f64;
        let mean = phases.iter().sum::<f64>() / n;
        let std = (phases.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std / target - 1.0).abs() < 0.1);
        assert_eq!(
            perturb_clock(&h, &p, &clock, 5).unwrap(),
            perturb_clock(&h, &p, &clock, 5).unwrap()
        );
        assert_eq!(perturb_clock(&h, &p, &ClockModel::noiseless(), 5).unwrap(), h);
    }

    #[test]
    fn noise_level() {
        let h = Cfr::new(0, vec![Complex::new(0.0, 0.0); 20_000], CfrState::Measured);
        let noisy = add_noise(&h, Some(1.0), &NoiseModel::new(20.0, 9).unwrap()).unwrap();
        let power = noisy.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / 20_000.0;
        assert!((power.sqrt() - 0.1).abs() < 0.003);
        assert_eq!(add_noise(&h, Some(1.0), &NoiseModel::noiseless()).unwrap(), h);
        assert!(add_noise(&h, None, &NoiseModel::new(20.0, 9).unwrap()).is_err());
    }

    #[test]
    fn state_transitions_are_enforced() {
        let h = Cfr::new(0, vec![Complex::new(1.0, 0.0); 128], CfrState::Measured);
        let hw = HardwareResponse::identity(&plan(1));
        assert!(matches!(
            apply_hardware(&h, &hw),
            Err(Error::StateMismatch { .. })
        ));
    }

    #[test]
    fn hardware_generator() {
        let p = plan(4);
        let hw = HardwareResponse::generate(&p, &HardwareParams::default()).unwrap();
        let max_phase = (0..4)
            .flat_map(|k| hw.curve(k).unwrap().iter().map(|h| h.arg().abs()))
            .fold(0.0, f64::max);
        assert!((max_phase.to_degrees() - 25.0).abs() < 1e-9);
        assert!(HardwareResponse::from_curves(vec![vec![Complex::new(0.0, 0.0)]]).is_err());
        let h = ideal_cfr(&scene(&[1.0]), &p, 0).unwrap();
        let mismatched = HardwareResponse::from_curves(vec![vec![Complex::new(1.0, 0.0); 3]]).unwrap();
        assert!(apply_hardware(&h, &mismatched).is_err());
    }

    #[test]
    fn noiseless_sweep_equals_ideal() {
        let p = plan(3);
        let s = scene(&[1.3]);
        let out = simulate_sweep(
            &s,
            &p,
            &HardwareResponse::identity(&p),
            &ClockModel::noiseless(),
            &NoiseModel::noiseless(),
            2,
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        for snap in &out {
            for (k, cfr) in snap.iter().enumerate() {
                assert_eq!(cfr.samples, ideal_cfr(&s, &p, k).unwrap().samples);
            }
        }
    }

    #[test]
    fn averaging_reduces_noise() {
        let p = plan(1);
        let s = scene(&[1.3]);
        let hw = HardwareResponse::identity(&p);
        let ideal = ideal_cfr(&s, &p, 0).unwrap();
        let noise = NoiseModel::new(10.0, 77).unwrap();
        let out = simulate_sweep(&s, &p, &hw, &ClockModel::noiseless(), &noise, 50).unwrap();
        let err_power = |v: &[Complex<f64>]| -> f64 {
            v.iter()
                .zip(&ideal.samples)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
        };
        let single: f64 = out.iter().map(|snap| err_power(&snap[0].samples)).sum::<f64>() / 50.0;
        let mut mean = vec![Complex::new(0.0, 0.0); 128];
        for snap in &out {
            for (m, x) in mean.iter_mut().zip(&snap[0].samples) {
                *m += x / 50.0;
            }
        }
        let gain = 10.0 * (single / err_power(&mean)).log10();
        assert!((gain - 10.0 * 50f64.log10()).abs() < 1.5, "gain {gain}");
    }
}
