//! Shot-noise scaling regression of voltage noise floors against power.

use super::FitReport;
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Factor by which the quadratic model's residuals must exceed the linear
/// model's before a series counts as shot-noise limited.
pub const SHOT_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ShotFit<T> {
    /// `slope` (V^2/(Hz W)) and `intercept` (V^2/Hz) of `S_V = a P + b`.
    pub report: FitReport<T>,
    pub ssr_linear: T,
    pub ssr_quadratic: T,
    pub shot_consistent: bool,
}

/// Weighted fit of `y = a f(P) + b` with relative residuals `(y - model)/y`.
fn weighted_line<T: Real>(series: &[(T, T)], f: impl Fn(T) -> T) -> (T, T, T) {
    let mut s = [T::zero(); 5];
    for (p, y) in series {
        let w = (*y * *y).recip();
        let x = f(*p);
        s[0] = s[0] + w;
        s[1] = s[1] + w * x;
        s[2] = s[2] + w * x * x;
        s[3] = s[3] + w * *y;
        s[4] = s[4] + w * x * *y;
    }
    let det = s[0] * s[2] - s[1] * s[1];
    let a = (s[0] * s[4] - s[1] * s[3]) / det;
    let b = (s[2] * s[3] - s[1] * s[4]) / det;
    let r = series.iter().fold(T::zero(), |acc, (p, y)| acc + ((*y - a * f(*p) - b) / *y).powi(2));
    (a, b, r)
}

/// Linear regression of `(P, S_V)` plus a quadratic `c P^2 + b` alternative.
pub fn fit_shot_scaling<T: Real>(series: &[(T, T)]) -> Result<ShotFit<T>> {
    fit_shot_scaling_with(series, SHOT_MARGIN)
}

pub fn fit_shot_scaling_with<T: Real>(series: &[(T, T)], margin: f64) -> Result<ShotFit<T>> {
    let mut powers: Vec<T> = series.iter().map(|p| p.0).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    powers.dedup();
    if powers.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct powers, need 3", powers.len())));
    }
    if series.iter().any(|(p, y)| !(*y > T::zero()) || !p.is_finite()) {
        return Err(Error::invalid("series", "noise floors must be positive"));
    }
    let (a, b, lin) = weighted_line(series, |p| p);
    let (_, _, quad) = weighted_line(series, |p| p * p);
    let report = FitReport::new(&["slope", "intercept"], &[a, b], 1, true, lin.sqrt());
    Ok(ShotFit { report, ssr_linear: lin, ssr_quadratic: quad, shot_consistent: lin * c(margin) < quad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{shot_scaling_series, ShotNoiseParams};

    fn powers() -> Vec<f64> {
        (0..11).map(|i| 0.25e-3 * 10f64.powf(i as f64 / 10.0)).collect()
    }

    #[test]
    fn exact_linear() {
        let params = ShotNoiseParams { responsivity: 1.0, transimpedance: 1e5, floor: 1e-15, scatter: 0.0 };
        let s = shot_scaling_series(&powers(), &params, 0).unwrap();
        let f = fit_shot_scaling(&s).unwrap();
        assert!((f.report.get("slope").unwrap() / params.slope() - 1.0).abs() < 1e-10);
        assert!((f.report.get("intercept").unwrap() / 1e-15 - 1.0).abs() < 1e-10);
        assert!(f.ssr_linear < 1e-20);
        assert!(f.shot_consistent);
    }

    #[test]
    fn scattered_series() {
        let params = ShotNoiseParams { responsivity: 1.0, transimpedance: 1e5, floor: 1e-15, scatter: 0.02 };
        let s = shot_scaling_series(&powers(), &params, 8).unwrap();
        let f = fit_shot_scaling(&s).unwrap();
        assert!((f.report.get("slope").unwrap() / params.slope() - 1.0).abs() < 0.03);
        assert!(f.shot_consistent);
    }

    #[test]
    fn quadratic_is_not_shot_noise() {
        let s: Vec<(f64, f64)> = powers().iter().map(|p| (*p, 3e-9 * p * p + 1e-15)).collect();
        assert!(!fit_shot_scaling(&s).unwrap().shot_consistent);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_shot_scaling(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_shot_scaling(&[(1.0, 1.0), (1.0, 1.1), (2.0, 2.0)]).is_err());
    }
}
