//! Receiver misalignment: closed-form sensitivity penalty, waist-matched
//! channel couplings, explicitly constructed detection modes and the
//! numerically evaluated efficiency of a misaligned sorter port.
//!
//! The sorter is taken to sit in the Fourier plane of the sample, where
//! the reflected beam has waist `w`. A lateral shift `a` of a receiver mode
//! there is equivalent to a transverse wavevector `2a / (w0 w)` on the sample,
//! which is how detection modes are mapped before overlaps are taken.

use num_complex::Complex;
use rayon::prelude::*;

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hg::{ModeSuperposition, OpticalMode, TransverseField};
use crate::limits::{imprecision_angle, imprecision_displacement, BeamParams};
use crate::mech::ModeShape;
use crate::overlap::scattered_mode;
use crate::scalar::{c, Real};

/// Probe phase `2 k dz` used for numerical slopes.
pub const PROBE_PHASE: f64 = 1e-4;

/// Ports with less static flux than this fraction of the input are treated as dark.
const DARK_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignConfig<T> {
    /// Lateral receiver displacement `x_s` (m).
    pub shift: T,
    /// Beam waist at the receiver `w` (m).
    pub waist: T,
    /// Mode rotation `phi` of the receiver relative to the sample (rad).
    pub rotation: T,
    /// Direction `phi_x` of the lateral displacement (rad).
    pub shift_angle: T,
    /// Downstream efficiency `eta_d` (mode mismatch and detector).
    pub eta_d: T,
    pub eta00_0: T,
    pub eta10_0: T,
}

impl<T: Real> MisalignConfig<T> {
    pub fn new(shift: T, waist: T, rotation: T, shift_angle: T, eta_d: T) -> Result<Self> {
        Self { shift, waist, rotation, shift_angle, eta_d, eta00_0: T::one(), eta10_0: T::one() }.validated()
    }

    pub fn with_channel_losses(self, eta00_0: T, eta10_0: T) -> Result<Self> {
        Self { eta00_0, eta10_0, ..self }.validated()
    }

    pub fn with_shift(self, shift: T) -> Result<Self> {
        Self { shift, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.waist > T::zero()) || !self.waist.is_finite() {
            return Err(Error::invalid("misalign.waist", "must be positive"));
        }
        if !(self.shift >= T::zero()) || !self.shift.is_finite() {
            return Err(Error::invalid("misalign.shift", "must be non-negative"));
        }
        if !self.rotation.is_finite() || !self.shift_angle.is_finite() {
            return Err(Error::invalid("misalign.angle", "must be finite"));
        }
        for (name, v) in [("misalign.eta_d", self.eta_d), ("misalign.eta00_0", self.eta00_0), ("misalign.eta10_0", self.eta10_0)] {
            if !(v > T::zero()) || v > T::one() {
                return Err(Error::invalid(name, "must lie in (0, 1]"));
            }
        }
        Ok(self)
    }

    /// Receiver displacement vector `(x_s cos phi_x, x_s sin phi_x)`.
    pub fn offset(&self) -> (T, T) {
        let (s, co) = self.shift_angle.sin_cos();
        (self.shift * co, self.shift * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyResult<T> {
    pub efficiency: T,
    /// `theta_D^2 / (8 N eta)` in rad^2/Hz; infinite when `eta = 0`.
    pub imprecision: T,
    pub method: Method,
}

impl<T: Real> EfficiencyResult<T> {
    fn new(efficiency: T, beam: &BeamParams<T>, method: Method) -> Self {
        let imprecision = if efficiency > T::zero() { imprecision_angle(beam) / efficiency } else { T::infinity() };
        Self { efficiency, imprecision, method }
    }
}

/// Closed-form sensitivity penalty of a misaligned HG10 port:
/// `S = (theta_D^2/8N) / eta_d * exp(x_s^2/w^2) sec^2 phi / D^2` with
/// `D = 1 - (x_s^2 / 2w^2) (1 + cos(phi - 2 phi_x) / cos phi)`.
pub fn efficiency_closed_form<T: Real>(cfg: &MisalignConfig<T>, beam: &BeamParams<T>) -> Result<Flagged<EfficiencyResult<T>>> {
    let cos_phi = cfg.rotation.cos();
    if cos_phi.abs() < c(1e-15) {
        return Err(Error::invalid("misalign.rotation", "cos(phi) = 0"));
    }
    let r2 = (cfg.shift / cfg.waist).powi(2);
    let denom = T::one() - r2 / c(2.0) * (T::one() + (cfg.rotation - c::<T>(2.0) * cfg.shift_angle).cos() / cos_phi);
    if denom.abs() < c(1e-12) {
        return Ok(Flagged::new(EfficiencyResult::new(T::zero(), beam, Method::ClosedForm), vec![Warning::Singular]));
    }
    let efficiency = cfg.eta_d * denom * denom * cos_phi * cos_phi * (-r2).exp();
    Ok(Flagged::clean(EfficiencyResult::new(efficiency, beam, Method::ClosedForm)))
}

/// Waist-matched power coupling of the reflected beam into the HG00 and HG10
/// ports at lateral offset `x`.
pub fn coupling_efficiency<T: Real>(cfg: &MisalignConfig<T>, x: T) -> (T, T) {
    let r2 = (x / cfg.waist).powi(2);
    let g = (-r2).exp();
    let cphi = cfg.shift_angle.cos();
    (cfg.eta00_0 * g, cfg.eta10_0 * r2 * g * cphi * cphi)
}

/// Receiver-plane detection modes: the shifted HG00 and the shifted, rotated
/// first-order mode `cos(phi) u10 + sin(phi) u01`.
pub fn detection_modes<T: Real>(cfg: &MisalignConfig<T>, waist: T) -> Result<(OpticalMode<T>, ModeSuperposition<T>)> {
    let (ax, ay) = cfg.offset();
    let u00 = OpticalMode::hg00(waist)?.with_center(ax, ay);
    let (s, co) = cfg.rotation.sin_cos();
    let u10 = OpticalMode::new(1, 0, waist)?.with_center(ax, ay);
    let u01 = OpticalMode::new(0, 1, waist)?.with_center(ax, ay);
    let first = ModeSuperposition { terms: vec![(Complex::new(co, T::zero()), u10), (Complex::new(s, T::zero()), u01)] };
    Ok((u00, first))
}

/// Where the sorter sits relative to the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReceiverPlane {
    /// Fourier plane: receiver shifts become tilts on the sample.
    #[default]
    FarField,
    /// Image plane: receiver shifts map to scaled shifts on the sample.
    Image,
}

/// Express a receiver-plane mode (waist `w`) on the sample plane (waist `w0`).
pub fn to_sample_plane<T: Real>(mode: &ModeSuperposition<T>, receiver_waist: T, sample_waist: T, plane: ReceiverPlane) -> ModeSuperposition<T> {
    let terms = mode
        .terms
        .iter()
        .map(|(a, m)| {
            let mapped = match plane {
                ReceiverPlane::FarField => {
                    let kappa = c::<T>(2.0) / (sample_waist * receiver_waist);
                    OpticalMode { waist: sample_waist, center: (T::zero(), T::zero()), tilt: (kappa * m.center.0, kappa * m.center.1), ..*m }
                }
                ReceiverPlane::Image => {
                    let scale = sample_waist / receiver_waist;
                    OpticalMode { waist: sample_waist, center: (m.center.0 * scale, m.center.1 * scale), ..*m }
                }
            };
            (*a, mapped)
        })
        .collect();
    ModeSuperposition { terms }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    pub plane: ReceiverPlane,
    /// `2 k dz` of the slope stencil.
    pub probe_phase: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self { plane: ReceiverPlane::FarField, probe_phase: PROBE_PHASE }
    }
}

/// Detected-flux model `N_det(z0) = N |<u_det | u_in exp(2 i k z0 phi)>|^2`
/// with the overlap weights precomputed.
struct PortFlux<T> {
    weights: Vec<Complex<T>>,
    phase: Vec<T>,
    flux: T,
}

impl<T: Real> PortFlux<T> {
    fn new(det: &ModeSuperposition<T>, u_in: &OpticalMode<T>, shape: &ModeShape<T>, k: T, flux: T, grid: &GridSpec<T>) -> Self {
        let two_k = c::<T>(2.0) * k;
        let mut weights = Vec::with_capacity(grid.len());
        let mut phase = Vec::with_capacity(grid.len());
        let d = grid.sample(|x, y| det.eval(x, y).conj() * u_in.eval(x, y));
        let p = grid.sample(|x, y| two_k * shape.eval(x, y));
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let idx = grid.index(i, j);
                weights.push(d[idx] * grid.weight(i, j));
                phase.push(p[idx]);
            }
        }
        Self { weights, phase, flux }
    }

    fn at(&self, z: T) -> T {
        let amp = self
            .weights
            .par_iter()
            .zip(self.phase.par_iter())
            .map(|(w, p)| *w * Complex::from_polar(T::one(), *p * z))
            .reduce(|| Complex::new(T::zero(), T::zero()), |a, b| a + b);
        self.flux * amp.norm_sqr()
    }

    /// Shot-noise-limited displacement imprecision `2 N_det / (dN_det/dz)^2`.
    ///
    /// Bright ports are linearized about `z0 = 0`. Dark ports have no static
    /// flux, so the ratio is taken at an operating point one stencil step away,
    /// where it reaches its `z0 -> 0` limit.
    fn imprecision(&self, step: T) -> Option<T> {
        let two = c::<T>(2.0);
        let n0 = self.at(T::zero());
        if n0 > c::<T>(DARK_FRACTION) * self.flux {
            let slope = (self.at(step) - self.at(-step)) / (two * step);
            if slope.abs() * step <= c::<T>(1e-12) * n0 {
                return None;
            }
            Some(two * n0 / (slope * slope))
        } else {
            let z = two * step;
            let slope = (self.at(z + step) - self.at(z - step)) / (two * step);
            if slope == T::zero() {
                return None;
            }
            Some(two * self.at(z) / (slope * slope))
        }
    }
}

fn probe_step<T: Real>(beam: &BeamParams<T>, shape: &ModeShape<T>, phase: f64) -> T {
    c::<T>(phase) / (c::<T>(2.0) * beam.wavenumber() * shape.peak())
}

/// Quantum efficiency of the misaligned first-order port, from the numerical
/// slope of the detected flux compared with ideal detection of the scattered mode.
pub fn efficiency_numeric<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    grid: &GridSpec<T>,
) -> Result<Flagged<EfficiencyResult<T>>> {
    efficiency_numeric_with(cfg, beam, shape, grid, NumericOptions::default())
}

pub fn efficiency_numeric_with<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    grid: &GridSpec<T>,
    opts: NumericOptions,
) -> Result<Flagged<EfficiencyResult<T>>> {
    let u_in = OpticalMode::hg00(beam.waist)?;
    let perp = scattered_mode(&u_in, shape, grid)?;
    let mut warnings = perp.warnings.clone();
    let ideal = imprecision_displacement(beam.photon_flux(), beam.wavenumber(), perp.value.beta_perp)?;
    let (_, first) = detection_modes(cfg, cfg.waist)?;
    let det = to_sample_plane(&first, cfg.waist, beam.waist, opts.plane);
    let port = PortFlux::new(&det, &u_in, shape, beam.wavenumber(), beam.photon_flux(), grid);
    let efficiency = match port.imprecision(probe_step(beam, shape, opts.probe_phase)) {
        Some(s_det) => cfg.eta_d * ideal / s_det,
        None => {
            warnings.push(Warning::SignalNull);
            T::zero()
        }
    };
    Ok(Flagged::new(EfficiencyResult::new(efficiency, beam, Method::Numeric), warnings))
}

/// `eta_d |<u_det | u_perp>|^2` with `u_perp` the Gram-Schmidt scattered mode.
pub fn efficiency_overlap<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    grid: &GridSpec<T>,
    plane: ReceiverPlane,
) -> Result<T> {
    let u_in = OpticalMode::hg00(beam.waist)?;
    let perp = scattered_mode(&u_in, shape, grid)?.value;
    let (_, first) = detection_modes(cfg, cfg.waist)?;
    let det = to_sample_plane(&first, cfg.waist, beam.waist, plane).sample(grid).value;
    let ov = crate::hg::inner_product(&det, &perp.field)?;
    Ok(cfg.eta_d * ov.norm_sqr())
}

/// Angular imprecision when reading out the (shifted) HG00 port,
/// `(2/w_r)^2 (dN00/dz0)^-2 2 N00 / eta_d`. Infinite, with
/// [`Warning::SignalNull`], when the port carries no linear signal.
pub fn hg00_imprecision<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    ribbon_width: T,
    grid: &GridSpec<T>,
) -> Result<Flagged<T>> {
    hg00_imprecision_with(cfg, beam, shape, ribbon_width, grid, NumericOptions::default())
}

pub fn hg00_imprecision_with<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    ribbon_width: T,
    grid: &GridSpec<T>,
    opts: NumericOptions,
) -> Result<Flagged<T>> {
    let u_in = OpticalMode::hg00(beam.waist)?;
    let (u00, _) = detection_modes(cfg, cfg.waist)?;
    let det = to_sample_plane(&ModeSuperposition::single(u00), cfg.waist, beam.waist, opts.plane);
    let port = PortFlux::new(&det, &u_in, shape, beam.wavenumber(), beam.photon_flux(), grid);
    let mut warnings = Vec::new();
    if u_in.truncated_by(grid) {
        warnings.push(Warning::Truncation);
    }
    let value = match port.imprecision(probe_step(beam, shape, opts.probe_phase)) {
        Some(s_z) => (c::<T>(2.0) / ribbon_width).powi(2) * s_z / cfg.eta_d,
        None => {
            warnings.push(Warning::SignalNull);
            T::infinity()
        }
    };
    Ok(Flagged::new(value, warnings))
}

/// One row of a lateral-displacement sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub shift: T,
    pub eta_closed: T,
    pub eta_numeric: T,
    /// Closed-form HG10-port imprecision (rad^2/Hz).
    pub imprecision: T,
    /// HG00-port imprecision (rad^2/Hz).
    pub imprecision00: T,
}

/// Evaluate closed-form and numeric models over a set of receiver shifts.
pub fn misalignment_sweep<T: Real>(
    cfg: &MisalignConfig<T>,
    beam: &BeamParams<T>,
    shape: &ModeShape<T>,
    ribbon_width: T,
    grid: &GridSpec<T>,
    shifts: &[T],
) -> Result<Vec<SweepRow<T>>> {
    shifts
        .par_iter()
        .map(|&x| {
            let cfg = cfg.with_shift(x)?;
            let closed = efficiency_closed_form(&cfg, beam)?.value;
            let numeric = efficiency_numeric(&cfg, beam, shape, grid)?.value;
            let s00 = hg00_imprecision(&cfg, beam, shape, ribbon_width, grid)?.value;
            Ok(SweepRow {
                shift: x,
                eta_closed: closed.efficiency,
                eta_numeric: numeric.efficiency,
                imprecision: closed.imprecision,
                imprecision00: s00,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hg::inner_product;
    use crate::mech::RibbonGeometry;
    use approx::assert_relative_eq;

    const W0: f64 = 150e-6;
    const W: f64 = 300e-6;
    const DEG: f64 = std::f64::consts::PI / 180.0;

    fn beam() -> BeamParams<f64> {
        BeamParams::new(1550e-9, W0, 2.5e-3).unwrap()
    }

    fn grid() -> GridSpec<f64> {
        GridSpec::centered(4.0 * W0, 257).unwrap()
    }

    fn large_ribbon() -> ModeShape<f64> {
        ModeShape::torsion(RibbonGeometry::new(100.0 * W0, 100.0 * W0, 75e-9).unwrap())
    }

    fn cfg(shift: f64) -> MisalignConfig<f64> {
        MisalignConfig::new(shift, W, 0.0, 45.0 * DEG, 1.0).unwrap()
    }

    #[test]
    fn closed_form_reference_points() {
        let aligned = efficiency_closed_form(&cfg(0.0), &beam()).unwrap().value;
        assert_eq!(aligned.efficiency, 1.0);
        assert_relative_eq!(aligned.imprecision, imprecision_angle(&beam()), max_relative = 1e-15);
        let at_w = efficiency_closed_form(&cfg(W), &beam()).unwrap().value;
        assert_relative_eq!(at_w.efficiency, 0.25 / std::f64::consts::E, max_relative = 1e-14);
        assert_relative_eq!(at_w.efficiency, 0.0920, max_relative = 1e-3);
    }

    #[test]
    fn closed_form_singular_and_invalid() {
        let c0 = MisalignConfig::new(W, W, 0.0, 0.0, 1.0).unwrap();
        let r = efficiency_closed_form(&c0, &beam()).unwrap();
        assert!(r.has(|w| *w == Warning::Singular));
        assert_eq!(r.value.efficiency, 0.0);
        assert!(r.value.imprecision.is_infinite());
        let c1 = MisalignConfig::new(0.0, W, std::f64::consts::FRAC_PI_2, 0.0, 1.0).unwrap();
        assert!(efficiency_closed_form(&c1, &beam()).is_err());
        assert!(MisalignConfig::new(-1e-6, W, 0.0, 0.0, 1.0).is_err());
        assert!(MisalignConfig::new(0.0, W, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn overlay_is_monotone() {
        let base = MisalignConfig::new(0.0, W, 0.0, 45.0 * DEG, 0.19).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let x = i as f64 * 10e-6;
            let eta = efficiency_closed_form(&base.with_shift(x).unwrap(), &beam()).unwrap().value.efficiency;
            assert!(eta < prev || i == 0);
            prev = eta;
        }
    }

    #[test]
    fn channel_couplings() {
        let c = MisalignConfig::new(0.0, W, 0.0, 45.0 * DEG, 1.0).unwrap().with_channel_losses(0.5, 0.67).unwrap();
        assert_eq!(coupling_efficiency(&c, 0.0), (0.5, 0.0));
        let (a, b) = coupling_efficiency(&c, W);
        assert_relative_eq!(a, 0.5 / std::f64::consts::E, max_relative = 1e-14);
        assert_relative_eq!(b, 0.67 * 0.5 / std::f64::consts::E, max_relative = 1e-12);
        assert!((a - 0.184).abs() < 5e-4 && (b - 0.123).abs() < 5e-4);
        for x in [0.5 * W, 0.9 * W, 1.1 * W, 2.0 * W] {
            assert!(coupling_efficiency(&c, x).1 < b);
        }
    }

    #[test]
    fn detection_mode_construction() {
        let g = GridSpec::centered(6.0 * W, 257).unwrap();
        let (u00, u1) = detection_modes(&cfg(0.0), W).unwrap();
        assert_eq!(u00, OpticalMode::hg00(W).unwrap());
        assert_eq!(u1.terms[0].1, OpticalMode::new(1, 0, W).unwrap());
        let turned = MisalignConfig::new(50e-6, W, std::f64::consts::FRAC_PI_2, 0.3, 1.0).unwrap();
        let (_, u1) = detection_modes(&turned, W).unwrap();
        let shifted01 = OpticalMode::new(0, 1, W).unwrap().with_center(50e-6 * 0.3f64.cos(), 50e-6 * 0.3f64.sin());
        let a = u1.sample(&g).value;
        let b = shifted01.sample(&g).value;
        assert!((inner_product(&a, &b).unwrap().norm() - 1.0).abs() < 1e-6);
        for phi in [0.2, 1.0, 2.5] {
            let c = MisalignConfig::new(120e-6, W, phi, 0.7, 1.0).unwrap();
            let (_, u1) = detection_modes(&c, W).unwrap();
            assert!((u1.sample(&g).value.norm_sq() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn numeric_aligned_is_unity() {
        let r = efficiency_numeric(&cfg(0.0), &beam(), &large_ribbon(), &grid()).unwrap();
        assert!((r.value.efficiency - 1.0).abs() < 1e-3, "{}", r.value.efficiency);
    }

    #[test]
    fn numeric_matches_closed_form() {
        for x in [0.0, 50e-6, 150e-6, 250e-6, 300e-6] {
            let c = cfg(x);
            let closed = efficiency_closed_form(&c, &beam()).unwrap().value.efficiency;
            let numeric = efficiency_numeric(&c, &beam(), &large_ribbon(), &grid()).unwrap().value.efficiency;
            let overlap = efficiency_overlap(&c, &beam(), &large_ribbon(), &grid(), ReceiverPlane::FarField).unwrap();
            assert!((numeric / closed - 1.0).abs() < 1e-2, "x={x}: {numeric} vs {closed}");
            assert!((numeric - overlap).abs() < 1e-3, "x={x}: {numeric} vs {overlap}");
        }
    }

    #[test]
    fn rotated_port_matches_closed_form() {
        // A rotation that does not commute with the shift direction tells the
        // sign conventions apart.
        let c = MisalignConfig::new(150e-6, W, 0.2, 30.0 * DEG, 1.0).unwrap();
        let numeric = efficiency_numeric(&c, &beam(), &large_ribbon(), &grid()).unwrap().value.efficiency;
        let closed = efficiency_closed_form(&c, &beam()).unwrap().value.efficiency;
        let mirrored = efficiency_closed_form(&MisalignConfig { rotation: -0.2, ..c }, &beam()).unwrap().value.efficiency;
        assert!((numeric / closed - 1.0).abs() < 1e-2, "{numeric} vs {closed}");
        assert!((numeric / mirrored - 1.0).abs() > 5e-2);
    }

    #[test]
    fn orthogonal_port_sees_nothing() {
        let c = MisalignConfig::new(0.0, W, std::f64::consts::FRAC_PI_2, 0.0, 1.0).unwrap();
        let r = efficiency_numeric(&c, &beam(), &large_ribbon(), &grid()).unwrap();
        assert!(r.value.efficiency < 1e-6);
    }

    #[test]
    fn hg00_port() {
        let s = ModeShape::torsion(RibbonGeometry::new(380e-6, 7e-3, 75e-9).unwrap());
        let aligned = hg00_imprecision(&cfg(0.0), &beam(), &s, 380e-6, &grid()).unwrap();
        assert!(aligned.value.is_infinite());
        assert!(aligned.has(|w| *w == Warning::SignalNull));

        let ideal = large_ribbon();
        let wr = 100.0 * W0;
        for x in [50e-6, 100e-6, 200e-6, 250e-6] {
            let c = cfg(x);
            let s00 = hg00_imprecision(&c, &beam(), &ideal, wr, &grid()).unwrap().value;
            let s10 = efficiency_closed_form(&c, &beam()).unwrap().value.imprecision;
            assert!(s00 > s10, "x={x}");
            // HG00-port efficiency (a/w)^2 exp(-x^2/w^2) with a = x cos(phi_x).
            let a = x * (45.0 * DEG).cos();
            let eta00 = (a / W).powi(2) * (-(x / W).powi(2)).exp();
            assert!((imprecision_angle(&beam()) / eta00 / s00 - 1.0).abs() < 1e-2);
        }

        let bright = BeamParams::new(1550e-9, W0, 5e-3).unwrap();
        let a = hg00_imprecision(&cfg(100e-6), &beam(), &ideal, wr, &grid()).unwrap().value;
        let b = hg00_imprecision(&cfg(100e-6), &bright, &ideal, wr, &grid()).unwrap().value;
        assert_relative_eq!(b, a / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn image_plane_loses_coherent_gain() {
        let c = cfg(100e-6);
        let far = efficiency_numeric(&c, &beam(), &large_ribbon(), &grid()).unwrap().value.efficiency;
        let opts = NumericOptions { plane: ReceiverPlane::Image, ..Default::default() };
        let near = efficiency_numeric_with(&c, &beam(), &large_ribbon(), &grid(), opts).unwrap();
        assert!(near.value.efficiency < 1e-2 * far || near.has(|w| *w == Warning::SignalNull));
    }
}
