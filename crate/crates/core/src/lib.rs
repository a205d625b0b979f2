//! Mode-selective optical readout of mechanical resonators.
//!
//! Hermite-Gauss optics, mechanical modeshapes, mode-overlap integrals,
//! quantum measurement limits, receiver misalignment, synthetic noise spectra
//! and the calibration fits that turn measured records back into
//! coupling efficiencies.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the scalar.

pub mod calibration;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod hg;
pub mod io;
pub mod limits;
pub mod mech;
pub mod misalign;
pub mod overlap;
pub mod scalar;
pub mod spectra;

pub use diagnostics::{Flagged, Warning};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use hg::{inner_product, sample_mode, ComplexField, ModeSuperposition, OpticalMode, TransverseField};
pub use limits::{BeamParams, PhysicalConstants};
pub use mech::{MechanicalMode, ModeShape, RibbonGeometry};
pub use misalign::{EfficiencyResult, MisalignConfig};
pub use overlap::{CouplingResult, ScatteredMode, ScatteringState};
pub use scalar::Real;
pub use spectra::{NoiseModel, RingdownRecord, SpectrumRecord, Units};
pub use calibration::{CalibrationResult, FitReport};

pub type GridSpec64 = GridSpec<f64>;
pub type GridSpec32 = GridSpec<f32>;
pub type OpticalMode64 = OpticalMode<f64>;
pub type OpticalMode32 = OpticalMode<f32>;
pub type ComplexField64 = ComplexField<f64>;
pub type ComplexField32 = ComplexField<f32>;
pub type ModeShape64 = ModeShape<f64>;
pub type ModeShape32 = ModeShape<f32>;
pub type MechanicalMode64 = MechanicalMode<f64>;
pub type MechanicalMode32 = MechanicalMode<f32>;
pub type BeamParams64 = BeamParams<f64>;
pub type BeamParams32 = BeamParams<f32>;
pub type MisalignConfig64 = MisalignConfig<f64>;
pub type MisalignConfig32 = MisalignConfig<f32>;
pub type SpectrumRecord64 = SpectrumRecord<f64>;
pub type SpectrumRecord32 = SpectrumRecord<f32>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type NoiseModel32 = NoiseModel<f32>;
pub type FitReport64 = FitReport<f64>;
pub type FitReport32 = FitReport<f32>;
