//! Thermal-wing calibration of a voltage noise spectrum.
//!
//! The off-resonant wings of a thermally driven Lorentzian have a known
//! angular PSD, so fitting them fixes the transduction gain `g`. The fitted
//! white floor, minus the detector contribution and divided by `g`, is the
//! measurement imprecision.

use rand::Rng;

use super::bootstrap::{bootstrap, spread};
use super::simplex::{minimize, SimplexOptions};
use super::{non_convergence, ssr, FitReport};
use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::limits::{imprecision_angle, BeamParams};
use crate::mech::MechanicalMode;
use crate::scalar::{c, Real};
use crate::spectra::{thermal_peak, SpectrumRecord, Units};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Half-width of the excluded core, in mechanical linewidths.
    pub core_linewidths: f64,
    /// Minimum half-width of the excluded core, in bins.
    pub core_bins: usize,
    /// Outer edge of the fit window (Hz from the peak); `None` uses the whole record.
    pub outer_hz: Option<f64>,
    /// Fit the linewidth instead of pinning it to `omega_m / Q`.
    pub free_linewidth: bool,
    /// Reweighting passes; each uses the previous model as the noise scale.
    pub irls_passes: usize,
    /// Residual bootstrap resamples for uncertainties (0 disables).
    pub bootstrap: usize,
    pub seed: u64,
    pub simplex: SimplexOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            core_linewidths: 2.0,
            core_bins: 2,
            outer_hz: None,
            free_linewidth: false,
            irls_passes: 3,
            bootstrap: 200,
            seed: 0,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult<T> {
    /// Transduction gain `g` (V^2/rad^2).
    pub gain: T,
    pub center_frequency: T,
    /// Full linewidth `Gamma / 2 pi` (Hz).
    pub linewidth: T,
    /// Thermal peak used to pin the amplitude (rad^2/Hz).
    pub thermal_peak: T,
    /// Fitted white floor in angle units, detector included (rad^2/Hz).
    pub floor: T,
    /// Floor minus detector contribution (rad^2/Hz).
    pub imprecision: T,
    pub efficiency: T,
    /// Mean detector floor over the fit window (V^2/Hz).
    pub detector_floor: T,
    pub residual_norm: T,
    /// Raw fit parameters plus derived quantities, with bootstrap spreads.
    pub report: FitReport<T>,
}

impl<T: Real> CalibrationResult<T> {
    pub fn uncertainty(&self, name: &str) -> Option<T> {
        self.report.uncertainty(name)
    }
}

pub fn calibrate_spectrum<T: Real>(
    raw: &SpectrumRecord<T>,
    detector: &SpectrumRecord<T>,
    mode: &MechanicalMode<T>,
    beam: &BeamParams<T>,
) -> Result<Flagged<CalibrationResult<T>>> {
    calibrate_spectrum_with(raw, detector, mode, beam, &CalibrationOptions::default())
}

/// Lorentzian-plus-floor wing model in offset coordinates.
struct Wings<T> {
    /// Frequency offsets from the initial center (Hz), window bins only.
    offset: Vec<T>,
    data: Vec<T>,
    free_linewidth: bool,
    linewidth: T,
}

impl<T: Real> Wings<T> {
    /// Parameters: `[ln A, df_c, ln B]` plus `ln gamma` when free.
    fn unpack(&self, p: &[T]) -> (T, T, T, T) {
        let gamma = if self.free_linewidth { p[3].exp() } else { self.linewidth };
        (p[0].exp(), p[1], p[2].exp(), gamma)
    }

    fn model_at(&self, p: &[T], offset: T) -> T {
        let (a, fc, b, gamma) = self.unpack(p);
        let x = c::<T>(2.0) * (offset - fc) / gamma;
        a / (T::one() + x * x) + b
    }

    fn model(&self, p: &[T]) -> Vec<T> {
        self.offset.iter().map(|o| self.model_at(p, *o)).collect()
    }

    fn objective(&self, p: &[T], data: &[T], weights: &[T]) -> T {
        ssr(self.offset.iter().zip(data).zip(weights).map(|((o, d), w)| (*d - self.model_at(p, *o)) / *w))
    }

    fn fit(&self, p0: &[T], data: &[T], passes: usize, weights0: Vec<T>, opts: &SimplexOptions, bin: T) -> (Vec<T>, usize, bool, T) {
        let mut weights = weights0;
        let mut p = p0.to_vec();
        let mut evaluations = 0;
        let mut converged = true;
        let mut value = T::infinity();
        let scale: Vec<T> = (0..p.len()).map(|i| if i == 1 { bin } else { c(0.1) }).collect();
        for _ in 0..passes.max(1) {
            let m = minimize(|q| self.objective(q, data, &weights), &p, &scale, opts);
            evaluations += m.evaluations;
            converged = m.converged;
            value = m.value;
            p = m.point;
            weights = self.model(&p);
        }
        (p, evaluations, converged, value.sqrt())
    }
}

pub fn calibrate_spectrum_with<T: Real>(
    raw: &SpectrumRecord<T>,
    detector: &SpectrumRecord<T>,
    mode: &MechanicalMode<T>,
    beam: &BeamParams<T>,
    opts: &CalibrationOptions,
) -> Result<Flagged<CalibrationResult<T>>> {
    if raw.freq != detector.freq {
        return Err(Error::GridMismatch);
    }
    if raw.units != Units::VoltsSq || detector.units != Units::VoltsSq {
        return Err(Error::invalid("units", "calibration expects V2/Hz spectra"));
    }
    let n = raw.len();
    if n < 16 {
        return Err(Error::InsufficientData(format!("{n} bins")));
    }
    let mut warnings = Vec::new();

    // Peak bin; ties resolve toward the lower frequency.
    let peak = (0..n).fold(0, |best, i| if raw.psd[i] > raw.psd[best] { i } else { best });
    let f0 = raw.freq[peak];
    let bin = (raw.freq[n - 1] - raw.freq[0]) / T::from_usize_lossy(n - 1);
    let gamma = mode.linewidth() / T::TAU();
    let core = (c::<T>(opts.core_linewidths) * gamma).max(T::from_usize_lossy(opts.core_bins) * bin);
    let outer = opts.outer_hz.map(c::<T>).unwrap_or(T::infinity());
    let window: Vec<usize> = (0..n)
        .filter(|&i| {
            let d = (raw.freq[i] - f0).abs();
            d > core && d <= outer
        })
        .collect();
    if window.len() < 8 {
        return Err(Error::InsufficientData(format!("only {} bins in the wing window", window.len())));
    }

    // Floor from the outer deciles, amplitude from the wings above it.
    let decile = (n / 10).max(1);
    let edge: Vec<T> = raw.psd[..decile].iter().chain(&raw.psd[n - decile..]).copied().collect();
    let b0 = edge.iter().fold(T::zero(), |s, v| s + *v) / T::from_usize_lossy(edge.len());
    let mut amp: Vec<T> = window
        .iter()
        .filter(|&&i| raw.psd[i] > c::<T>(2.0) * b0)
        .map(|&i| {
            let x = c::<T>(2.0) * (raw.freq[i] - f0) / gamma;
            (raw.psd[i] - b0) * (T::one() + x * x)
        })
        .collect();
    if amp.is_empty() || !(b0 > T::zero()) {
        return Err(Error::InsufficientData("no thermal wings above the floor".into()));
    }
    amp.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let a0 = amp[amp.len() / 2];

    let wings = Wings {
        offset: window.iter().map(|&i| raw.freq[i] - f0).collect(),
        data: window.iter().map(|&i| raw.psd[i]).collect(),
        free_linewidth: opts.free_linewidth,
        linewidth: gamma,
    };
    let mut p0 = vec![a0.ln(), T::zero(), b0.ln()];
    if opts.free_linewidth {
        p0.push(gamma.ln());
    }
    let tiny = T::min_positive_value();
    let weights0 = wings.data.iter().map(|d| d.max(tiny)).collect();
    let (p, evaluations, converged, residual_norm) = wings.fit(&p0, &wings.data, opts.irls_passes, weights0, &opts.simplex, bin);

    let (a, dfc, b, gamma_fit) = wings.unpack(&p);
    let names = ["amplitude", "center_frequency", "linewidth", "floor"];
    let mut report = FitReport::new(&names, &[a, f0 + dfc, gamma_fit, b], evaluations, converged, residual_norm);
    if !converged {
        return Err(non_convergence("wing fit exhausted its evaluation budget", &report));
    }

    let s_peak = thermal_peak(mode);
    let det_mean = window.iter().fold(T::zero(), |s, &i| s + detector.psd[i]) / T::from_usize_lossy(window.len());
    let derive = |a: T, b: T| -> (T, T, T) {
        let g = a / s_peak;
        let s_imp = (b - det_mean) / g;
        (g, s_imp, imprecision_angle(beam) / s_imp)
    };
    let (g, s_imp, eta) = derive(a, b);
    report.push("gain", g, None);
    report.push("imprecision", s_imp, None);
    report.push("efficiency", eta, None);
    if s_imp < T::zero() {
        return Err(Error::NegativeImprecision { value: s_imp.as_f64() });
    }

    let last = wings.offset.iter().fold(T::zero(), |m, o| m.max(o.abs()));
    if wings.model_at(&p, last) - b > b {
        warnings.push(Warning::IllConditioned { detail: "imprecision floor not reached inside the fit window".into() });
    }
    if opts.free_linewidth && core > gamma_fit {
        warnings.push(Warning::Degenerate { detail: "linewidth unresolved by the wing window; only amplitude x linewidth^2 is constrained".into() });
    }
    if eta > T::one() {
        warnings.push(Warning::Precondition { detail: format!("efficiency {eta:.3} exceeds 1") });
    }

    if opts.bootstrap > 1 {
        let best_model = wings.model(&p);
        let ratios: Vec<T> = wings.data.iter().zip(&best_model).map(|(d, m)| *d / *m).collect();
        let quick = SimplexOptions { restarts: 0, ..opts.simplex };
        let samples = bootstrap(opts.bootstrap, opts.seed, |rng| {
            let data: Vec<T> = best_model.iter().map(|m| *m * ratios[rng.gen_range(0..ratios.len())]).collect();
            let (q, _, ok, _) = wings.fit(&p, &data, 1, best_model.clone(), &quick, bin);
            if !ok {
                return None;
            }
            let (a, dfc, b, gw) = wings.unpack(&q);
            let (g, s, e) = derive(a, b);
            Some(vec![a, f0 + dfc, gw, b, g, s, e])
        });
        if let Some(sd) = spread(&samples) {
            let all = ["amplitude", "center_frequency", "linewidth", "floor", "gain", "imprecision", "efficiency"];
            for (name, s) in all.iter().zip(sd) {
                if *name == "linewidth" && !opts.free_linewidth {
                    continue;
                }
                report.set_uncertainty(name, s);
            }
        }
    }

    Ok(Flagged::new(
        CalibrationResult {
            gain: g,
            center_frequency: f0 + dfc,
            linewidth: gamma_fit,
            thermal_peak: s_peak,
            floor: b / g,
            imprecision: s_imp,
            efficiency: eta,
            detector_floor: det_mean,
            residual_norm,
            report,
        },
        warnings,
    ))
}

/// The raw spectrum divided by the fitted gain (rad^2/Hz, detector noise included).
pub fn calibrated_spectrum<T: Real>(raw: &SpectrumRecord<T>, result: &CalibrationResult<T>) -> Result<SpectrumRecord<T>> {
    let psd = raw.psd.iter().map(|v| *v / result.gain).collect();
    SpectrumRecord::new(raw.freq.clone(), psd, Units::RadSq, raw.n_avg)
}
