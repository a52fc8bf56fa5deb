//! On-grid orthogonal matching pursuit over a multiband dictionary.
//!
//! All subcarriers of all subbands are stacked into one observation `y`.
//! The atom for range `R` has entries `e^{-j 2 pi (f_k + n df) 2 R / c}`,
//! scaled to unit energy. The selected atoms are kept orthonormalized with
//! modified Gram-Schmidt, so each step costs one projection.

use num_complex::Complex;
use rayon::prelude::*;

use super::{ProfileKind, RangeGrid, RangeProfile};
use crate::error::{invalid, Result};
use crate::metrics::{Detection, DetectionSet};
use crate::scalar::{cis, from_usize, lit, speed_of_light, Real};
use crate::subband::SubbandPlan;
use crate::synth::{subcarrier_offset, Cfr, CfrState};

/// New atoms whose component orthogonal to the selected span is below this
/// norm are treated as linearly dependent and end the pursuit.
const DEPENDENT_ATOM_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OmpConfig<T> {
    pub grid: RangeGrid<T>,
    pub max_atoms: usize,
    /// Stop once `|r|^2 / |y|^2` falls below this value.
    pub residual_threshold: T,
}

impl<T: Real> OmpConfig<T> {
    /// Grid `[r_min, r_max]` with step `res / 4`, at most 10 atoms,
    /// residual threshold `1e-3`.
    pub fn for_plan(plan: &SubbandPlan<T>, r_min: T, r_max: T) -> Result<Self> {
        let step = plan.nominal_resolution() / lit(4.0);
        Ok(Self {
            grid: RangeGrid::new(r_min, r_max, step)?,
            max_atoms: 10,
            residual_threshold: lit(1e-3),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.max_atoms == 0 {
            return invalid("OMP needs max_atoms >= 1");
        }
        if !(self.residual_threshold >= T::zero()) || self.residual_threshold > T::one() {
            return invalid("OMP residual threshold must lie in [0, 1]");
        }
        if self.grid.is_empty() {
            return invalid("OMP grid is empty");
        }
        Ok(())
    }
}

/// One selected dictionary atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpAtom<T> {
    pub range: T,
    /// Least-squares path gain, in CFR units.
    pub amplitude: Complex<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult<T> {
    /// Atoms in selection order.
    pub atoms: Vec<OmpAtom<T>>,
    pub detections: DetectionSet<T>,
    /// Sparse profile: atom amplitudes at their grid points, zero elsewhere.
    pub profile: RangeProfile<T>,
    /// Final `|r|^2 / |y|^2`.
    pub residual_fraction: T,
    pub residual: Vec<Complex<T>>,
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

fn energy<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Stacked subcarrier frequencies of `plan`, subband by subband.
pub fn stacked_frequencies<T: Real>(plan: &SubbandPlan<T>) -> Vec<T> {
    let df = plan.ofdm().subcarrier_spacing();
    (0..plan.len())
        .flat_map(|k| {
            let n = plan.subcarrier_count(k);
            let f = plan.subband(k).carrier();
            (0..n).map(move |i| f + subcarrier_offset(i, n, df))
        })
        .collect()
}

/// Unit-energy dictionary atom for range `r`.
pub fn atom<T: Real>(freqs: &[T], r: T) -> Vec<Complex<T>> {
    let scale = T::one() / from_usize::<T>(freqs.len()).sqrt();
    let w = -lit::<T>(4.0) * T::PI() * r / speed_of_light::<T>();
    freqs.iter().map(|&f| cis(w * f) * scale).collect()
}

/// Runs OMP on one sweep of calibrated CFRs (one per subband, in plan order).
pub fn omp_combine<T: Real>(
    cfrs: &[Cfr<T>],
    plan: &SubbandPlan<T>,
    cfg: &OmpConfig<T>,
) -> Result<OmpResult<T>> {
    cfg.validate()?;
    if cfrs.len() != plan.len() {
        return invalid(format!("{} CFRs for a plan of {} subbands", cfrs.len(), plan.len()));
    }
    let mut y = Vec::with_capacity(plan.total_subcarriers());
    for (k, cfr) in cfrs.iter().enumerate() {
        cfr.expect_state(CfrState::Calibrated)?;
        if cfr.subband != k || cfr.len() != plan.subcarrier_count(k) {
            return invalid(format!("CFR {k} does not match subband {k} of the plan"));
        }
        y.extend_from_slice(&cfr.samples);
    }
    let freqs = stacked_frequencies(plan);
    let dictionary: Vec<Vec<Complex<T>>> = (0..cfg.grid.len())
        .into_par_iter()
        .map(|i| atom(&freqs, cfg.grid.at(i)))
        .collect();

    let y_energy = energy(&y);
    let mut residual = y.clone();
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    // Upper-triangular factor of the selected atoms: A = Q R.
    let mut r_cols: Vec<Vec<Complex<T>>> = Vec::new();
    let mut selected: Vec<usize> = Vec::new();
    let fraction = |res: &[Complex<T>]| {
        if y_energy > T::zero() {
            energy(res) / y_energy
        } else {
            T::zero()
        }
    };

    while selected.len() < cfg.max_atoms.min(cfg.grid.len()) {
        if y_energy == T::zero() || fraction(&residual) < cfg.residual_threshold {
            break;
        }
        let corr: Vec<T> = dictionary
            .par_iter()
            .map(|a| dot(a, &residual).norm())
            .collect();
        let mut best = None;
        for (i, &c) in corr.iter().enumerate() {
            if selected.contains(&i) {
                continue;
            }
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((i, c));
            }
        }
        let Some((idx, _)) = best else { break };
        let a = &dictionary[idx];
        let mut v = a.clone();
        let mut col = vec![Complex::new(T::zero(), T::zero()); basis.len() + 1];
        for _ in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let p = dot(q, &v);
                col[j] = col[j] + p;
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - qi * p;
                }
            }
        }
        let norm = energy(&v).sqrt();
        if norm < lit(DEPENDENT_ATOM_NORM) {
            break;
        }
        for vi in v.iter_mut() {
            *vi = *vi / norm;
        }
        col[basis.len()] = Complex::new(norm, T::zero());
        let p = dot(&v, &residual);
        for (ri, qi) in residual.iter_mut().zip(&v) {
            *ri = *ri - qi * p;
        }
        basis.push(v);
        r_cols.push(col);
        selected.push(idx);
    }

    // Back substitution of R x = Q^H y.
    let m = selected.len();
    let qy: Vec<Complex<T>> = basis.iter().map(|q| dot(q, &y)).collect();
    let mut x = vec![Complex::new(T::zero(), T::zero()); m];
    for i in (0..m).rev() {
        let mut s = qy[i];
        for j in i + 1..m {
            s = s - r_cols[j][i] * x[j];
        }
        x[i] = s / r_cols[i][i];
    }
    let atom_scale = T::one() / from_usize::<T>(y.len()).sqrt();
    let atoms: Vec<OmpAtom<T>> = selected
        .iter()
        .zip(&x)
        .map(|(&i, &c)| OmpAtom {
            range: cfg.grid.at(i),
            amplitude: c * atom_scale,
        })
        .collect();
    let mut samples = vec![Complex::new(T::zero(), T::zero()); cfg.grid.len()];
    for (&i, a) in selected.iter().zip(&atoms) {
        samples[i] = a.amplitude;
    }
    let detections = DetectionSet::new(
        atoms
            .iter()
            .map(|a| Detection {
                range: a.range,
                magnitude: a.amplitude.norm(),
            })
            .collect(),
        ProfileKind::Omp,
    );
    Ok(OmpResult {
        residual_fraction: fraction(&residual),
        atoms,
        detections,
        profile: RangeProfile::new(cfg.grid, samples, ProfileKind::Omp)?,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{amplitude, AntennaGains, RcsModel, ScatteringCenter, Scene};
    use crate::subband::{make_contiguous_sweep, OfdmParams};
    use crate::synth::ideal_cfr;

    fn plan() -> SubbandPlan<f64> {
        let ofdm = OfdmParams::new(500e6 / 16.0, 1).unwrap();
        make_contiguous_sweep(7e9, 0.5e9, 3, ofdm, 0.01).unwrap()
    }

    fn sweep(plan: &SubbandPlan<f64>, scene: &Scene<f64>) -> Vec<Cfr<f64>> {
        (0..plan.len())
            .map(|k| {
                let h = ideal_cfr(scene, plan, k).unwrap();
                Cfr::new(k, h.samples, CfrState::Calibrated)
            })
            .collect()
    }

    #[test]
    fn recovers_on_grid_target() {
        let p = plan();
        let cfg = OmpConfig::for_plan(&p, 0.5, 2.5).unwrap();
        let r = cfg.grid.at(57);
        let s = Scene::new(
            vec![ScatteringCenter::new(r, RcsModel::isotropic(1.0)).unwrap()],
            AntennaGains::unit(),
        )
        .unwrap()
        .with_reference_frequency(8e9)
        .unwrap();
        let out = omp_combine(&sweep(&p, &s), &p, &cfg).unwrap();
        assert_eq!(out.atoms.len(), 1);
        assert_eq!(out.atoms[0].range, r);
        assert!(out.residual_fraction < 1e-10);
        let rho = amplitude(&s.targets()[0], 8e9, (1.0, 1.0)).unwrap();
        assert!((out.atoms[0].amplitude.norm() / rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_dictionary_projection_is_orthogonal() {
        let p = plan();
        let mut cfg = OmpConfig::for_plan(&p, 1.0, 1.3).unwrap();
        cfg.max_atoms = cfg.grid.len();
        cfg.residual_threshold = 0.0;
        let s = Scene::new(
            vec![
                ScatteringCenter::new(1.1234, RcsModel::isotropic(1.0)).unwrap(),
                ScatteringCenter::new(1.2071, RcsModel::isotropic(0.5)).unwrap(),
            ],
            AntennaGains::unit(),
        )
        .unwrap();
        let cfrs = sweep(&p, &s);
        let out = omp_combine(&cfrs, &p, &cfg).unwrap();
        let freqs = stacked_frequencies(&p);
        let scale = energy(&out.residual).sqrt().max(1e-300);
        let y: Vec<Complex<f64>> = cfrs.iter().flat_map(|c| c.samples.clone()).collect();
        for i in 0..cfg.grid.len() {
            let c = dot(&atom(&freqs, cfg.grid.at(i)), &out.residual).norm();
            assert!(c < 1e-8 * energy(&y).sqrt().max(scale), "atom {i}: {c}");
        }
    }

    #[test]
    fn zero_observation_selects_nothing() {
        let p = plan();
        let cfg = OmpConfig::for_plan(&p, 0.5, 1.0).unwrap();
        let out = omp_combine(&sweep(&p, &Scene::empty()), &p, &cfg).unwrap();
        assert!(out.atoms.is_empty());
        assert_eq!(out.residual_fraction, 0.0);
    }

    #[test]
    fn rejects_uncalibrated_input() {
        let p = plan();
        let cfg = OmpConfig::for_plan(&p, 0.5, 1.0).unwrap();
        let cfrs: Vec<_> = (0..3).map(|k| ideal_cfr(&Scene::empty(), &p, k).unwrap()).collect();
        assert!(omp_combine(&cfrs, &p, &cfg).is_err());
    }
}
