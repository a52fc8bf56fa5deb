//! Scattering scenes.
//!
//! A scene is a list of static point scatterers. Each scatterer has a range
//! and an [`RcsModel`] describing how its complex reflectivity varies across
//! subbands; path amplitudes follow the monostatic radar equation.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scalar::{cis, lit, speed_of_light, Real};

/// Frequency behaviour of a scatterer's complex RCS.
#[derive(Debug, Clone, PartialEq)]
pub enum RcsModel<T> {
    /// Constant RCS `rcs` (m^2) and phase `phase` (rad) in every subband.
    Isotropic { rcs: T, phase: T },
    /// Phase `phase + rate (f_k - reference_frequency)`, rate in rad/Hz.
    PhaseDrift {
        rcs: T,
        phase: T,
        rate: T,
        reference_frequency: T,
    },
    /// Phase `phase + N(0, std^2)` drawn independently per subband.
    RandomPhase { rcs: T, phase: T, std: T, seed: u64 },
}

impl<T: Real> RcsModel<T> {
    pub fn isotropic(rcs: T) -> Self {
        RcsModel::Isotropic {
            rcs,
            phase: T::zero(),
        }
    }

    pub fn rcs(&self) -> T {
        match *self {
            RcsModel::Isotropic { rcs, .. }
            | RcsModel::PhaseDrift { rcs, .. }
            | RcsModel::RandomPhase { rcs, .. } => rcs,
        }
    }

    fn validate(&self) -> Result<()> {
        let rcs = self.rcs();
        if !(rcs >= T::zero()) || !rcs.is_finite() {
            return invalid(format!("RCS must be >= 0, got {rcs}"));
        }
        if let RcsModel::RandomPhase { std, .. } = *self {
            if !(std >= T::zero()) {
                return invalid(format!("phase std must be >= 0, got {std}"));
            }
        }
        Ok(())
    }

    /// Scattering phase in subband `k` with carrier `f_k`.
    pub fn phase(&self, k: usize, f_k: T) -> T {
        match *self {
            RcsModel::Isotropic { phase, .. } => phase,
            RcsModel::PhaseDrift {
                phase,
                rate,
                reference_frequency,
                ..
            } => phase + rate * (f_k - reference_frequency),
            RcsModel::RandomPhase {
                phase, std, seed, ..
            } => {
                let mut s = rng::stream(seed, &[rng::TAG_RCS, k as u64]);
                phase + std * lit::<T>(rng::standard_normal(&mut s))
            }
        }
    }
}

/// Point scatterer at range `range` (m).
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCenter<T> {
    range: T,
    rcs: RcsModel<T>,
}

impl<T: Real> ScatteringCenter<T> {
    pub fn new(range: T, rcs: RcsModel<T>) -> Result<Self> {
        if !(range > T::zero()) || !range.is_finite() {
            return invalid(format!("scatterer range must be > 0, got {range}"));
        }
        rcs.validate()?;
        Ok(Self { range, rcs })
    }

    pub fn range(&self) -> T {
        self.range
    }

    /// Round-trip delay `2 R / c`.
    pub fn delay(&self) -> T {
        lit::<T>(2.0) * self.range / speed_of_light()
    }

    pub fn rcs_model(&self) -> &RcsModel<T> {
        &self.rcs
    }
}

/// Linear antenna gains.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaGains<T> {
    Constant { tx: T, rx: T },
    /// One `(tx, rx)` pair per subband.
    PerSubband(Vec<(T, T)>),
}

impl<T: Real> AntennaGains<T> {
    pub fn unit() -> Self {
        AntennaGains::Constant {
            tx: T::one(),
            rx: T::one(),
        }
    }

    /// Gains in subband `k`.
    pub fn get(&self, k: usize) -> Result<(T, T)> {
        match self {
            AntennaGains::Constant { tx, rx } => Ok((*tx, *rx)),
            AntennaGains::PerSubband(g) => g.get(k).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no antenna gains for subband {k} ({} given)",
                    g.len()
                ))
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |(tx, rx): (T, T)| tx > T::zero() && rx > T::zero();
        let all = match self {
            AntennaGains::Constant { tx, rx } => ok((*tx, *rx)),
            AntennaGains::PerSubband(g) => g.iter().all(|&p| ok(p)),
        };
        if all {
            Ok(())
        } else {
            invalid("antenna gains must be > 0")
        }
    }
}

/// Static scene: scatterers plus antenna gains.
///
/// Path amplitudes follow the radar equation at each subband carrier unless
/// a reference frequency is set, in which case every subband uses the
/// amplitude at that frequency and isotropic targets are flat in frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    targets: Vec<ScatteringCenter<T>>,
    gains: AntennaGains<T>,
    reference_frequency: Option<T>,
}

impl<T: Real> Scene<T> {
    pub fn new(targets: Vec<ScatteringCenter<T>>, gains: AntennaGains<T>) -> Result<Self> {
        gains.validate()?;
        Ok(Self {
            targets,
            gains,
            reference_frequency: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            targets: Vec::new(),
            gains: AntennaGains::unit(),
            reference_frequency: None,
        }
    }

    /// Evaluates the radar equation at `f` for every subband.
    pub fn with_reference_frequency(mut self, f: T) -> Result<Self> {
        if !(f > T::zero()) {
            return invalid(format!("reference frequency must be > 0, got {f}"));
        }
        self.reference_frequency = Some(f);
        Ok(self)
    }

    pub fn reference_frequency(&self) -> Option<T> {
        self.reference_frequency
    }

    pub fn targets(&self) -> &[ScatteringCenter<T>] {
        &self.targets
    }

    pub fn gains(&self) -> &AntennaGains<T> {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `rho_{l,k}` for target `l` in subband `k` with carrier `f_k`.
    pub fn path_amplitude(&self, l: usize, k: usize, f_k: T) -> Result<T> {
        let f = self.reference_frequency.unwrap_or(f_k);
        amplitude(&self.targets[l], f, self.gains.get(k)?)
    }

    /// `rho_{l,k} e^{j theta_{l,k}}` for target `l` in subband `k`.
    pub fn path_gain(&self, l: usize, k: usize, f_k: T) -> Result<Complex<T>> {
        let rho = self.path_amplitude(l, k, f_k)?;
        Ok(cis(self.targets[l].rcs.phase(k, f_k)) * rho)
    }
}

/// Radar-equation amplitude `sqrt(c^2 G_tx G_rx sigma / (f^2 (4 pi)^3 R^4))`.
pub fn amplitude<T: Real>(center: &ScatteringCenter<T>, f_k: T, gains: (T, T)) -> Result<T> {
    let r = center.range;
    if r == T::zero() {
        return Err(Error::Singularity("target at zero range".into()));
    }
    if !(f_k > T::zero()) {
        return invalid(format!("frequency must be > 0, got {f_k}"));
    }
    let c = speed_of_light::<T>();
    let four_pi = lit::<T>(4.0) * T::PI();
    let num = c * c * gains.0 * gains.1 * center.rcs.rcs();
    let den = f_k * f_k * four_pi.powi(3) * r.powi(4);
    Ok((num / den).sqrt())
}

/// `sqrt(sigma) e^{j theta_k}`: the RCS-dependent part of the path gain.
pub fn scattering_coefficient<T: Real>(center: &ScatteringCenter<T>, k: usize, f_k: T) -> Complex<T> {
    cis(center.rcs.phase(k, f_k)) * center.rcs.rcs().sqrt()
}
