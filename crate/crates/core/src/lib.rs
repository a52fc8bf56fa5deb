//! Coherent multiband ranging.
//!
//! The crate synthesizes per-subband OFDM channel measurements for scattering
//! scenes, turns them into calibrated range profiles, combines subbands with
//! backprojection (BP), subsets-product backprojection (SPBP) or orthogonal
//! matching pursuit (OMP), and scores the result with coherence metrics and
//! OSPA.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the precision.
//!
//! ```
//! use multiband::{subband, SubbandPlan64};
//!
//! let ofdm = subband::OfdmParams::new(500e6 / 128.0, 7).unwrap();
//! let plan: SubbandPlan64 = subband::make_contiguous_sweep(6.5e9, 0.5e9, 4, ofdm, 0.01).unwrap();
//! assert_eq!(plan.len(), 4);
//! assert!((plan.nominal_resolution() - 0.0749).abs() < 1e-4);
//! ```

pub mod combine;
pub mod error;
pub mod metrics;
pub mod preproc;
pub mod rng;
pub mod scalar;
pub mod scene;
pub mod subband;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::{Real, SPEED_OF_LIGHT};

pub type OfdmParams64 = subband::OfdmParams<f64>;
pub type Subband64 = subband::Subband<f64>;
pub type SubbandPlan64 = subband::SubbandPlan<f64>;
pub type Scene64 = scene::Scene<f64>;
pub type ScatteringCenter64 = scene::ScatteringCenter<f64>;
pub type Cfr64 = synth::Cfr<f64>;
pub type Cir64 = preproc::Cir<f64>;
pub type RangeGrid64 = combine::RangeGrid<f64>;
pub type RangeProfile64 = combine::RangeProfile<f64>;
pub type DetectionSet64 = metrics::DetectionSet<f64>;

pub type OfdmParams32 = subband::OfdmParams<f32>;
pub type Subband32 = subband::Subband<f32>;
pub type SubbandPlan32 = subband::SubbandPlan<f32>;
pub type Scene32 = scene::Scene<f32>;
pub type ScatteringCenter32 = scene::ScatteringCenter<f32>;
pub type Cfr32 = synth::Cfr<f32>;
pub type Cir32 = preproc::Cir<f32>;
pub type RangeGrid32 = combine::RangeGrid<f32>;
pub type RangeProfile32 = combine::RangeProfile<f32>;
pub type DetectionSet32 = metrics::DetectionSet<f32>;

