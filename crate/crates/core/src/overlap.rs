//! Optomechanical coupling overlaps and reflected-field construction.
//!
//! A surface displacement `z(x,y) = z0 phi(x,y)` imprints the phase
//! `exp(2 i k z)` on the incident field. To first order the reflected field is
//! `u_in + 2 i k z0 (beta_par u_in + beta_perp u_perp)`.

use num_complex::Complex;

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hg::{inner_product, ComplexField, OpticalMode, TransverseField};
use crate::mech::ModeShape;
use crate::scalar::{c, Real};

/// Threshold on `|2 k z0 max|phi||` above which the first-order expansion is flagged.
pub const LINEARIZATION_LIMIT: f64 = 0.1;

/// Overlap scalars between a modeshape-weighted incident mode and the optical basis.
///
/// Values are real parts of the overlaps, which are real for untilted HG modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult<T> {
    /// `<phi u_in | u_in>`.
    pub beta_parallel: T,
    /// `<phi u_in | u_perp>`.
    pub beta_perp: T,
    /// `<u_in phi | u_in phi>`.
    pub beta_sq: T,
    /// Largest one-level refinement difference among the three integrals.
    pub convergence: T,
}

impl<T: Real> CouplingResult<T> {
    /// Power scattered outside the `{u_in, u_perp}` pair: `beta^2 - beta_par^2 - beta_perp^2`.
    pub fn residual_power(&self) -> T {
        self.beta_sq - self.beta_parallel * self.beta_parallel - self.beta_perp * self.beta_perp
    }
}

/// Coupling overlaps by trapezoid quadrature on `grid`.
pub fn couplings<T: Real>(
    u_in: &OpticalMode<T>,
    u_perp: &OpticalMode<T>,
    shape: &ModeShape<T>,
    grid: &GridSpec<T>,
) -> Flagged<CouplingResult<T>> {
    let (par, e_par) = grid.integrate_with_estimate(|x, y| {
        let u = u_in.eval(x, y);
        Complex::new(shape.eval(x, y) * u.norm_sqr(), T::zero())
    });
    let (perp, e_perp) = grid.integrate_with_estimate(|x, y| {
        (u_in.eval(x, y) * shape.eval(x, y)).conj() * u_perp.eval(x, y)
    });
    let (sq, e_sq) = grid.integrate_with_estimate(|x, y| {
        let p = shape.eval(x, y);
        Complex::new(p * p * u_in.eval(x, y).norm_sqr(), T::zero())
    });
    let mut warnings = Vec::new();
    if u_in.truncated_by(grid) || u_perp.truncated_by(grid) {
        warnings.push(Warning::Truncation);
    }
    Flagged::new(
        CouplingResult {
            beta_parallel: par.re,
            beta_perp: perp.re,
            beta_sq: sq.re,
            convergence: e_par.max(e_perp).max(e_sq),
        },
        warnings,
    )
}

/// The scattered mode obtained by orthogonalizing `phi u_in` against `u_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredMode<T> {
    pub field: ComplexField<T>,
    pub beta_parallel: T,
    /// Norm of the orthogonal remainder; the largest `beta_perp` any single mode can reach.
    pub beta_perp: T,
}

/// Gram-Schmidt construction of `u_perp` from `phi u_in`.
pub fn scattered_mode<T: Real>(
    u_in: &OpticalMode<T>,
    shape: &ModeShape<T>,
    grid: &GridSpec<T>,
) -> Result<Flagged<ScatteredMode<T>>> {
    let incident = u_in.sample(grid);
    let weighted = incident.value.modulated(|x, y| Complex::new(shape.eval(x, y), T::zero()));
    let par = inner_product(&incident.value, &weighted)?;
    let remainder = weighted.axpy(-par, &incident.value)?;
    let norm = remainder.norm_sq().sqrt();
    if norm == T::zero() {
        return Err(Error::NoSignal);
    }
    let field = remainder.scaled(Complex::new(norm.recip(), T::zero()));
    Ok(Flagged::new(
        ScatteredMode { field, beta_parallel: par.re, beta_perp: norm },
        incident.warnings,
    ))
}

/// Mirror displacement state driving the reflected field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState<T> {
    pub incident: OpticalMode<T>,
    pub shape: ModeShape<T>,
    /// Displacement amplitude `z0` in m.
    pub amplitude: T,
    /// Optical wavenumber `2 pi / lambda` in rad/m.
    pub wavenumber: T,
}

impl<T: Real> ScatteringState<T> {
    pub fn new(incident: OpticalMode<T>, shape: ModeShape<T>, amplitude: T, wavenumber: T) -> Result<Self> {
        if !(wavenumber > T::zero()) || !wavenumber.is_finite() {
            return Err(Error::invalid("wavenumber", "must be positive"));
        }
        if !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        Ok(Self { incident, shape, amplitude, wavenumber })
    }

    /// `|2 k z0 max|phi||`.
    pub fn phase_depth(&self) -> T {
        (c::<T>(2.0) * self.wavenumber * self.amplitude * self.shape.peak()).abs()
    }

    pub fn with_amplitude(&self, amplitude: T) -> Self {
        Self { amplitude, ..self.clone() }
    }
}

/// Choice of the orthogonal scattered mode in the first-order field.
#[derive(Debug, Clone, PartialEq)]
pub enum PerpMode<T> {
    /// A prescribed mode, e.g. HG10 for the torsion specialization.
    Given(OpticalMode<T>),
    /// Orthogonalize `phi u_in` against `u_in`.
    GramSchmidt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expansion<T> {
    Exact,
    FirstOrder(PerpMode<T>),
}

/// Reflected field `u_in exp(2 i k z0 phi)` or its first-order truncation.
pub fn reflected_field<T: Real>(
    state: &ScatteringState<T>,
    grid: &GridSpec<T>,
    expansion: &Expansion<T>,
) -> Result<Flagged<ComplexField<T>>> {
    let incident = state.incident.sample(grid);
    let mut warnings = incident.warnings.clone();
    let depth = state.phase_depth();
    if depth > c(LINEARIZATION_LIMIT) {
        warnings.push(Warning::Linearization { phase: depth.as_f64() });
    }
    let two_k_z = c::<T>(2.0) * state.wavenumber * state.amplitude;
    let field = match expansion {
        Expansion::Exact => incident
            .value
            .modulated(|x, y| Complex::from_polar(T::one(), two_k_z * state.shape.eval(x, y))),
        Expansion::FirstOrder(perp) => {
            let (beta_par, beta_perp, u_perp) = match perp {
                PerpMode::Given(mode) => {
                    let cr = couplings(&state.incident, mode, &state.shape, grid);
                    (cr.value.beta_parallel, cr.value.beta_perp, mode.sample(grid).value)
                }
                PerpMode::GramSchmidt => {
                    let sm = scattered_mode(&state.incident, &state.shape, grid)?.value;
                    (sm.beta_parallel, sm.beta_perp, sm.field)
                }
            };
            let i2kz = Complex::new(T::zero(), two_k_z);
            incident
                .value
                .axpy(i2kz * beta_par, &incident.value)?
                .axpy(i2kz * beta_perp, &u_perp)?
        }
    };
    Ok(Flagged::new(field, warnings))
}

/// One row of a beam-position scan along the torsion axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow<T> {
    pub y0: T,
    pub beta10: T,
    pub beta01: T,
    pub dphi_dx: T,
    pub dphi_dy: T,
}

/// Translate the beam to `(x_c, y0)` along the ribbon and record
/// `beta10 = <u10 | phi u00>` and `beta01 = <u01 | phi u00>` together with the
/// modeshape gradient at the beam center.
///
/// `grid` is expressed relative to the beam center.
pub fn coupling_scan<T: Real>(
    u_in: &OpticalMode<T>,
    shape: &ModeShape<T>,
    positions: &[T],
    grid: &GridSpec<T>,
) -> Result<Flagged<Vec<ScanRow<T>>>> {
    let base = OpticalMode { center: (T::zero(), T::zero()), ..*u_in };
    let u00 = base.sibling(0, 0)?;
    let u10 = base.sibling(1, 0)?;
    let u01 = base.sibling(0, 1)?;
    let xc = u_in.center.0;
    let mut warnings = Vec::new();
    if u00.truncated_by(grid) {
        warnings.push(Warning::Truncation);
    }
    if u_in.waist > shape.feature_scale() / c(4.0) {
        warnings.push(Warning::LargeSpot);
    }
    let rows = positions
        .iter()
        .map(|&y0| {
            if !shape.contains(xc, y0) {
                warnings.push(Warning::OutsideDomain { y0: y0.as_f64() });
                return ScanRow { y0, beta10: T::zero(), beta01: T::zero(), dphi_dx: T::zero(), dphi_dy: T::zero() };
            }
            let weighted = |x: T, y: T| u00.eval(x, y) * shape.eval(x + xc, y + y0);
            let b10 = grid.integrate(|x, y| u10.eval(x, y).conj() * weighted(x, y)).re;
            let b01 = grid.integrate(|x, y| u01.eval(x, y).conj() * weighted(x, y)).re;
            let (gx, gy) = shape.grad(xc, y0);
            ScanRow { y0, beta10: b10, beta01: b01, dphi_dx: gx, dphi_dy: gy }
        })
        .collect();
    Ok(Flagged::new(rows, warnings))
}
