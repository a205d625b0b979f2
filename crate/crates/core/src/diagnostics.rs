//! Non-fatal conditions attached to results.

use std::fmt;

/// A condition worth surfacing that does not invalidate the result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The sampling window is narrower than ~2 waists around a mode center.
    Truncation,
    /// Modeshape grid is too coarse for accurate interpolation or derivatives.
    CoarseGrid { nx: usize, ny: usize },
    /// `|2 k z0 max|phi||` exceeds the linearization threshold.
    Linearization { phase: f64 },
    /// Probe beam is not small compared with the modeshape features.
    LargeSpot,
    /// Scan position falls outside the modeshape domain.
    OutsideDomain { y0: f64 },
    /// Sensitivity model denominator vanishes.
    Singular,
    /// No linear signal in the detected port.
    SignalNull,
    /// A fitted parameter collapsed below the sampling resolution.
    BelowResolution { parameter: &'static str },
    /// A parameter is not identifiable from the data.
    Degenerate { detail: String },
    /// Relative uncertainty of a parameter is large.
    PoorlyConstrained { parameter: &'static str, relative: f64 },
    /// Data do not cover the feature the fit relies on.
    IllConditioned { detail: String },
    /// Record violates a soft precondition.
    Precondition { detail: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Truncation => write!(f, "sampling window truncates the mode (< 2 waists)"),
            Warning::CoarseGrid { nx, ny } => write!(f, "coarse modeshape grid {nx}x{ny}"),
            Warning::Linearization { phase } => {
                write!(f, "linearization invalid: 2 k z0 max|phi| = {phase:.3e} > 0.1")
            }
            Warning::LargeSpot => write!(f, "spot size not small compared with the modeshape"),
            Warning::OutsideDomain { y0 } => write!(f, "scan position y0 = {y0:e} m outside the ribbon"),
            Warning::Singular => write!(f, "sensitivity model is singular (eta = 0)"),
            Warning::SignalNull => write!(f, "no linear signal in the detected port"),
            Warning::BelowResolution { parameter } => {
                write!(f, "`{parameter}` is below the sampling resolution")
            }
            Warning::Degenerate { detail } => write!(f, "degenerate parameters: {detail}"),
            Warning::PoorlyConstrained { parameter, relative } => {
                write!(f, "`{parameter}` poorly constrained (relative uncertainty {relative:.2})")
            }
            Warning::IllConditioned { detail } => write!(f, "ill-conditioned: {detail}"),
            Warning::Precondition { detail } => write!(f, "{detail}"),
        }
    }
}

/// A value together with the warnings raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<V> {
    pub value: V,
    pub warnings: Vec<Warning>,
}

impl<V> Flagged<V> {
    pub fn clean(value: V) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn new(value: V, warnings: Vec<Warning>) -> Self {
        Self { value, warnings }
    }

    pub fn has(&self, pred: impl Fn(&Warning) -> bool) -> bool {
        self.warnings.iter().any(pred)
    }

    pub fn map<U>(self, f: impl FnOnce(V) -> U) -> Flagged<U> {
        Flagged { value: f(self.value), warnings: self.warnings }
    }
}
