//! Closed-form quantum limits: shot-noise imprecision, radiation-pressure
//! backaction, zero-point motion, phonon budget and feedback-cooling limits.
//!
//! All spectral densities are single-sided, in (quantity)^2/Hz.

use crate::error::{Error, Result};
use crate::mech::MechanicalMode;
use crate::scalar::{c, Real};

/// Fixed CODATA values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    pub hbar: T,
    pub h: T,
    pub c: T,
    pub k_b: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self { hbar: c(1.054571817e-34), h: c(6.62607015e-34), c: c(2.99792458e8), k_b: c(1.380649e-23) }
    }
}

/// Probe beam at the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    pub wavelength: T,
    /// Waist `w0` on the sample (m).
    pub waist: T,
    /// Reflected power (W).
    pub power: T,
}

impl<T: Real> BeamParams<T> {
    pub fn new(wavelength: T, waist: T, power: T) -> Result<Self> {
        for (name, v) in [("beam.wavelength", wavelength), ("beam.waist", waist), ("beam.power", power)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        Ok(Self { wavelength, waist, power })
    }

    /// Photon flux `P lambda / (h c)` in 1/s.
    pub fn photon_flux(&self) -> T {
        let k = PhysicalConstants::<T>::codata();
        self.power * self.wavelength / (k.h * k.c)
    }

    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// Diffraction angle `lambda / (pi w0)`.
    pub fn diffraction_angle(&self) -> T {
        self.wavelength / (T::PI() * self.waist)
    }
}

/// Shot-noise displacement imprecision `1 / (8 N k^2 beta_perp^2)` (m^2/Hz).
pub fn imprecision_displacement<T: Real>(flux: T, wavenumber: T, beta_perp: T) -> Result<T> {
    if beta_perp == T::zero() {
        return Err(Error::NoSignal);
    }
    if !(flux > T::zero()) || !(wavenumber > T::zero()) {
        return Err(Error::invalid("flux/wavenumber", "must be positive"));
    }
    Ok((c::<T>(8.0) * flux * wavenumber * wavenumber * beta_perp * beta_perp).recip())
}

/// Radiation-pressure force noise `8 hbar^2 N k^2 beta^2` (N^2/Hz).
pub fn backaction_force<T: Real>(flux: T, wavenumber: T, beta_sq: T) -> T {
    let hbar = PhysicalConstants::<T>::codata().hbar;
    c::<T>(8.0) * hbar * hbar * flux * wavenumber * wavenumber * beta_sq
}

/// Optical-lever angular imprecision `theta_D^2 / (8 N)` (rad^2/Hz).
pub fn imprecision_angle<T: Real>(beam: &BeamParams<T>) -> T {
    let td = beam.diffraction_angle();
    td * td / (c::<T>(8.0) * beam.photon_flux())
}

/// Optical-lever torque backaction `8 hbar^2 N / theta_D^2` (N^2 m^2/Hz), the
/// partner of [`imprecision_angle`] at the Heisenberg limit.
pub fn backaction_torque<T: Real>(beam: &BeamParams<T>) -> T {
    let hbar = PhysicalConstants::<T>::codata().hbar;
    let td = beam.diffraction_angle();
    c::<T>(8.0) * hbar * hbar * beam.photon_flux() / (td * td)
}

/// Resonant zero-point spectral density in two conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPoint<T> {
    /// `hbar Q / (2 I omega^2)`, the expression as usually quoted for this device.
    pub as_written: T,
    /// `8 x_zp^2 / Gamma = 4 hbar Q / (I omega^2)`, consistent with
    /// `n_imp = S_imp / (2 S_zp)`.
    pub resonant: T,
}

pub fn zero_point_psd<T: Real>(mode: &MechanicalMode<T>) -> ZeroPoint<T> {
    let hbar = PhysicalConstants::<T>::codata().hbar;
    let w = mode.angular_frequency();
    let base = hbar * mode.quality_factor / (mode.inertia * w * w);
    ZeroPoint { as_written: base / c(2.0), resonant: base * c(4.0) }
}

/// Bath occupation `k_B T / (hbar omega)`.
pub fn thermal_occupation<T: Real>(mode: &MechanicalMode<T>) -> T {
    let k = PhysicalConstants::<T>::codata();
    k.k_b * mode.temperature / (k.hbar * mode.angular_frequency())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononBudget<T> {
    pub n_imp: T,
    pub n_ba: T,
    pub n_th: T,
    pub s_zp: T,
}

/// `n_imp = S_imp / (2 S_zp)`, `n_BA = 1 / (16 n_imp eta)`, `n_th = k_B T / (hbar omega)`.
pub fn phonon_budget<T: Real>(s_imp: T, s_zp: T, efficiency: T, mode: &MechanicalMode<T>) -> Result<PhononBudget<T>> {
    if !(efficiency > T::zero()) || efficiency > T::one() {
        return Err(Error::invalid("eta", "must lie in (0, 1]"));
    }
    if !(s_imp > T::zero()) || !(s_zp > T::zero()) {
        return Err(Error::invalid("spectral density", "must be positive"));
    }
    let n_imp = s_imp / (c::<T>(2.0) * s_zp);
    Ok(PhononBudget {
        n_imp,
        n_ba: (c::<T>(16.0) * n_imp * efficiency).recip(),
        n_th: thermal_occupation(mode),
        s_zp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingLimit<T> {
    /// `2 sqrt(n_imp (n_BA + n_th)) - 1/2`.
    pub occupation: T,
    /// `(1/sqrt(eta) - 1) / 2`.
    pub efficiency_bound: T,
}

/// Final occupation under ideal derivative feedback.
pub fn cooling_limit<T: Real>(budget: &PhononBudget<T>, efficiency: T) -> CoolingLimit<T> {
    let half = c::<T>(0.5);
    CoolingLimit {
        occupation: c::<T>(2.0) * (budget.n_imp * (budget.n_ba + budget.n_th)).sqrt() - half,
        efficiency_bound: half * (efficiency.sqrt().recip() - T::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mech::{ModeShape, RibbonGeometry};
    use approx::assert_relative_eq;

    fn reference_beam() -> BeamParams<f64> {
        BeamParams::new(1550e-9, 150e-6, 2.5e-3).unwrap()
    }

    fn reference_mode() -> MechanicalMode<f64> {
        let shape = ModeShape::torsion(RibbonGeometry::new(380e-6, 7e-3, 75e-9).unwrap());
        MechanicalMode::new(shape, 52.5e3, 65e6, 2.8e-18, 295.0).unwrap()
    }

    #[test]
    fn beam_derived_quantities() {
        let b = reference_beam();
        assert_relative_eq!(b.diffraction_angle(), 3.289e-3, max_relative = 1e-3);
        assert_relative_eq!(b.photon_flux(), 1.9507e16, max_relative = 1e-3);
        assert_relative_eq!(imprecision_angle(&b), 6.93e-23, max_relative = 2e-3);
        assert!(BeamParams::new(1550e-9, 0.0, 2.5e-3).is_err());
    }

    #[test]
    fn displacement_imprecision() {
        let k = 2.0 * std::f64::consts::PI / 1550e-9;
        let s = imprecision_displacement(2e16, k, 1.0).unwrap();
        assert_relative_eq!(s, 1.0 / (8.0 * 2e16 * k * k), max_relative = 1e-15);
        assert_relative_eq!(s, 3.80e-30, max_relative = 2e-3);
        assert_eq!(imprecision_displacement(4e16, k, 1.0).unwrap(), s / 2.0);
        assert_eq!(imprecision_displacement(2e16, k, 0.0), Err(Error::NoSignal));
    }

    #[test]
    fn torsion_conversion_reproduces_lever_limit() {
        let b = reference_beam();
        let wr = 380e-6;
        let s_z = imprecision_displacement(b.photon_flux(), b.wavenumber(), b.waist / wr).unwrap();
        assert_relative_eq!((2.0 / wr).powi(2) * s_z, imprecision_angle(&b), max_relative = 1e-12);
    }

    #[test]
    fn torque_backaction_from_force() {
        // Torque noise about the axis equals (w_r/2)^2 times the generalized force
        // noise when theta = 2 z0 / w_r and beta = w0 / w_r.
        let b = reference_beam();
        let wr = 380e-6;
        let beta = b.waist / wr;
        let s_f = backaction_force(b.photon_flux(), b.wavenumber(), beta * beta);
        assert_relative_eq!((wr / 2.0).powi(2) * s_f, backaction_torque(&b), max_relative = 1e-12);
        let hbar = PhysicalConstants::<f64>::codata().hbar;
        assert_relative_eq!(imprecision_angle(&b) * backaction_torque(&b), hbar * hbar, max_relative = 1e-12);
        assert_eq!(backaction_force(1e16, 1e6, 0.0), 0.0);
    }

    #[test]
    fn zero_point_conventions() {
        let zp = zero_point_psd(&reference_mode());
        assert_relative_eq!(zp.as_written, 1.125e-20, max_relative = 2e-3);
        assert_relative_eq!(zp.resonant, 9.0e-20, max_relative = 5e-3);
        let mut heavier = reference_mode();
        heavier.inertia *= 2.0;
        assert_relative_eq!(zero_point_psd(&heavier).as_written, zp.as_written / 2.0, max_relative = 1e-14);
        // S_zp pinned so that n_imp = 0.003 at S_imp = 5e-22.
        assert_relative_eq!(5e-22 / (2.0 * 0.003), 8.33e-20, max_relative = 1e-3);
    }

    #[test]
    fn budget_and_cooling() {
        let b = phonon_budget(5e-22, 9e-20, 0.14, &reference_mode()).unwrap();
        assert_relative_eq!(b.n_imp, 5e-22 / 1.8e-19, max_relative = 1e-14);
        assert!((b.n_ba / 160.7 - 1.0).abs() < 1e-3);
        assert!((b.n_th / 1.2e8 - 1.0).abs() < 0.03);
        assert_relative_eq!(16.0 * b.n_imp * b.n_ba * 0.14, 1.0, max_relative = 1e-14);
        let cl = cooling_limit(&b, 0.14);
        assert!((cl.occupation / 1300.0 - 1.0).abs() < 0.2);
        assert_relative_eq!(cl.efficiency_bound, 0.8363, max_relative = 1e-3);
        assert!(phonon_budget(5e-22, 9e-20, 0.0, &reference_mode()).is_err());

        let ideal = phonon_budget(5e-22, 5e-22 * 8.0, 1.0, &reference_mode()).unwrap();
        assert_relative_eq!(ideal.n_ba, 1.0, max_relative = 1e-14);
        assert_eq!(cooling_limit(&ideal, 1.0).efficiency_bound, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn heisenberg_product(n in 1e10f64..1e20, k in 1e5f64..1e8, beta in 1e-4f64..1.0) {
                let hbar = PhysicalConstants::<f64>::codata().hbar;
                let prod = imprecision_displacement(n, k, beta).unwrap() * backaction_force(n, k, beta * beta);
                prop_assert!((prod / (hbar * hbar) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn lever_limit_scale_invariance(scale in 0.1f64..10.0) {
                let b = reference_beam();
                let s = BeamParams::new(b.wavelength * scale, b.waist * scale, b.power / scale).unwrap();
                prop_assert!((imprecision_angle(&s) / imprecision_angle(&b) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn budget_identity_and_cooling_bound(s_imp in 1e-24f64..1e-18, s_zp in 1e-21f64..1e-18, eta in 1e-3f64..1.0) {
                let b = phonon_budget(s_imp, s_zp, eta, &reference_mode()).unwrap();
                prop_assert!((16.0 * b.n_imp * b.n_ba * eta - 1.0).abs() < 1e-12);
                let cl = cooling_limit(&b, eta);
                prop_assert!(cl.occupation >= cl.efficiency_bound * (1.0 - 1e-12) - 1e-12);
            }
        }
    }
}
