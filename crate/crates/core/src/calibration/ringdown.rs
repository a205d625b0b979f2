//! Exponential ringdown fit for the mechanical quality factor.

use rand::Rng;

use super::bootstrap::{bootstrap, spread};
use super::simplex::{minimize, SimplexOptions};
use super::{non_convergence, ssr, FitReport};
use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use crate::spectra::RingdownRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingdownOptions {
    pub bootstrap: usize,
    pub seed: u64,
    /// Relative `Q` uncertainty above which the result is flagged.
    pub max_relative_uncertainty: f64,
}

impl Default for RingdownOptions {
    fn default() -> Self {
        Self { bootstrap: 200, seed: 0, max_relative_uncertainty: 0.1 }
    }
}

struct Decay<T> {
    t: Vec<T>,
    noise: T,
}

impl<T: Real> Decay<T> {
    /// Parameters `[ln A0, ln tau, floor]`; time is measured from the first
    /// sample and an envelope floor cannot be negative.
    fn model(&self, q: &[T], t: T) -> T {
        q[0].exp() * (-t / q[1].exp()).exp() + q[2].abs()
    }

    /// Two reweighting passes with `sigma_i ~ model_i + noise floor`.
    fn fit(&self, q0: &[T], data: &[T], opts: &SimplexOptions) -> (Vec<T>, usize, bool, T) {
        let scale = [c(0.1), c(0.1), q0[0].exp() * c(0.01) + self.noise];
        let tiny = T::min_positive_value();
        let mut q = q0.to_vec();
        let mut evaluations = 0;
        let mut out = (false, T::infinity());
        for _ in 0..2 {
            let w: Vec<T> = self.t.iter().map(|t| (self.model(&q, *t).abs() + self.noise).max(tiny)).collect();
            let m = minimize(|p| ssr(self.t.iter().zip(data).zip(&w).map(|((t, d), w)| (*d - self.model(p, *t)) / *w)), &q, &scale, opts);
            evaluations += m.evaluations;
            out = (m.converged, m.value.sqrt());
            q = m.point;
        }
        (q, evaluations, out.0, out.1)
    }
}

pub fn fit_ringdown<T: Real>(record: &RingdownRecord<T>, frequency: T) -> Result<Flagged<FitReport<T>>> {
    fit_ringdown_with(record, frequency, &RingdownOptions::default())
}

/// Fit `A0 exp(-t/tau) + floor` and report `Q = pi f_m tau` with `tau`,
/// `A0` and `floor`.
pub fn fit_ringdown_with<T: Real>(record: &RingdownRecord<T>, frequency: T, opts: &RingdownOptions) -> Result<Flagged<FitReport<T>>> {
    let n = record.time.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("{n} ringdown samples")));
    }
    if !(frequency > T::zero()) {
        return Err(Error::invalid("frequency", "must be positive"));
    }
    let t0 = record.time[0];
    let t: Vec<T> = record.time.iter().map(|t| *t - t0).collect();
    let a = &record.amplitude;
    let decile = (n / 10).max(1);
    let mean = |s: &[T]| s.iter().fold(T::zero(), |acc, v| acc + *v) / T::from_usize_lossy(s.len());
    let (first, last) = (mean(&a[..decile]), mean(&a[n - decile..]));
    let resolution = record.noise_floor.max(first.abs() * c(1e-9));
    if !(first - last > c::<T>(3.0) * resolution) {
        return Err(Error::InsufficientData("no decay detectable above the floor".into()));
    }

    // Log-linear initial guess over samples still well above the floor.
    let floor0 = record.noise_floor;
    let pts: Vec<(T, T)> = t
        .iter()
        .zip(a)
        .filter(|(_, v)| **v - floor0 > (first - floor0) * c(0.05))
        .map(|(t, v)| (*t, (*v - floor0).ln()))
        .collect();
    let tau0 = if pts.len() >= 2 {
        let k = T::from_usize_lossy(pts.len());
        let (mt, my) = pts.iter().fold((T::zero(), T::zero()), |s, p| (s.0 + p.0, s.1 + p.1));
        let (mt, my) = (mt / k, my / k);
        let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |s, p| (s.0 + (p.0 - mt) * (p.1 - my), s.1 + (p.0 - mt).powi(2)));
        let slope = sxy / sxx;
        if slope < T::zero() { -slope.recip() } else { t[n - 1] }
    } else {
        t[n - 1]
    };
    let decay = Decay { t, noise: record.noise_floor };
    let q0 = [(a[0] - floor0).max(first * c(0.5)).ln(), tau0.ln(), floor0];
    let simplex = SimplexOptions::default();
    let (q, evaluations, converged, residual) = decay.fit(&q0, a, &simplex);
    let tau = q[1].exp();
    let qf = T::PI() * frequency * tau;
    let mut report = FitReport::new(&["quality_factor", "tau", "amplitude", "floor"], &[qf, tau, q[0].exp(), q[2].abs()], evaluations, converged, residual);
    if !converged {
        return Err(non_convergence("ringdown fit exhausted its evaluation budget", &report));
    }

    let mut warnings = Vec::new();
    let best: Vec<T> = decay.t.iter().map(|t| decay.model(&q, *t)).collect();
    let resid: Vec<T> = a.iter().zip(&best).map(|(d, m)| *d - *m).collect();
    if opts.bootstrap > 1 {
        let quick = SimplexOptions { restarts: 0, ..simplex };
        let samples = bootstrap(opts.bootstrap, opts.seed, |rng| {
            let data: Vec<T> = best.iter().map(|m| *m + resid[rng.gen_range(0..resid.len())]).collect();
            let (s, _, ok, _) = decay.fit(&q, &data, &quick);
            ok.then(|| vec![T::PI() * frequency * s[1].exp(), s[1].exp(), s[0].exp(), s[2].abs()])
        });
        if let Some(sd) = spread(&samples) {
            for (name, s) in ["quality_factor", "tau", "amplitude", "floor"].iter().zip(&sd) {
                report.set_uncertainty(name, *s);
            }
            let rel = sd[0] / qf;
            if rel > c(opts.max_relative_uncertainty) {
                warnings.push(Warning::PoorlyConstrained { parameter: "quality_factor", relative: rel.as_f64() });
            }
        }
    }
    let span = decay.t[n - 1];
    if span < tau && last > first * c(std::f64::consts::FRAC_1_SQRT_2) {
        warnings.push(Warning::Precondition { detail: "record shorter than one decay time with less than 3 dB of decay".into() });
    }
    Ok(Flagged::new(report, warnings))
}
