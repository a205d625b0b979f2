//! Fitting pipelines that turn measured (or synthesized) records into
//! calibrated physical quantities.

mod area;
mod bootstrap;
mod coupling;
mod knife;
mod ringdown;
mod shot;
pub mod simplex;
mod spectrum;

pub use area::{area_scan_model, AreaRow};
pub use bootstrap::{bootstrap, spread};
pub use coupling::{fit_coupling_model, CouplingOptions, CouplingPoint};
pub use knife::{fit_knife_edge, knife_edge_model};
pub use ringdown::{fit_ringdown, fit_ringdown_with, RingdownOptions};
pub use shot::{fit_shot_scaling, ShotFit};
pub use spectrum::{calibrate_spectrum, calibrate_spectrum_with, calibrated_spectrum, CalibrationOptions, CalibrationResult};

use crate::scalar::Real;

/// A fitted parameter with its bootstrap (or otherwise estimated) spread.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParam<T> {
    pub name: &'static str,
    pub value: T,
    pub uncertainty: Option<T>,
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub params: Vec<FitParam<T>>,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of the (possibly weighted) residual vector.
    pub residual_norm: T,
}

impl<T: Real> FitReport<T> {
    pub fn new(names: &[&'static str], values: &[T], iterations: usize, converged: bool, residual_norm: T) -> Self {
        let params = names
            .iter()
            .zip(values)
            .map(|(name, value)| FitParam { name, value: *value, uncertainty: None })
            .collect();
        Self { params, iterations, converged, residual_norm }
    }

    pub fn param(&self, name: &str) -> Option<&FitParam<T>> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter.
    pub fn get(&self, name: &str) -> Option<T> {
        self.param(name).map(|p| p.value)
    }

    pub fn uncertainty(&self, name: &str) -> Option<T> {
        self.param(name).and_then(|p| p.uncertainty)
    }

    pub(crate) fn set_uncertainty(&mut self, name: &str, sigma: T) {
        if let Some(p) = self.params.iter_mut().find(|p| p.name == name) {
            p.uncertainty = Some(sigma);
        }
    }

    pub(crate) fn push(&mut self, name: &'static str, value: T, uncertainty: Option<T>) {
        self.params.push(FitParam { name, value, uncertainty });
    }

    pub fn to_f64(&self) -> FitReport<f64> {
        FitReport {
            params: self
                .params
                .iter()
                .map(|p| FitParam { name: p.name, value: p.value.as_f64(), uncertainty: p.uncertainty.map(Real::as_f64) })
                .collect(),
            iterations: self.iterations,
            converged: self.converged,
            residual_norm: self.residual_norm.as_f64(),
        }
    }
}

/// Sum of squares of a residual vector.
pub(crate) fn ssr<T: Real>(r: impl Iterator<Item = T>) -> T {
    r.fold(T::zero(), |acc, x| acc + x * x)
}

pub(crate) fn non_convergence<T: Real>(reason: impl Into<String>, report: &FitReport<T>) -> crate::Error {
    crate::Error::NonConvergence { reason: reason.into(), best: Some(Box::new(report.to_f64())) }
}
