//! Error-function fit of a knife-edge beam profile.

use rand::Rng;

use super::bootstrap::{bootstrap, spread};
use super::simplex::{minimize, SimplexOptions};
use super::{non_convergence, ssr, FitReport};
use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

const BOOTSTRAP: usize = 200;
const MIN_R2: f64 = 0.8;

/// `P0/2 (1 + s erf(sqrt(2)(x - x0)/w0)) + baseline`.
pub fn knife_edge_model<T: Real>(x: T, x0: T, w0: T, p0: T, baseline: T, direction: T) -> T {
    let arg = c::<T>(std::f64::consts::SQRT_2) * (x - x0) / w0;
    p0 / c(2.0) * (T::one() + direction * arg.erf()) + baseline
}

struct Profile<T> {
    x: Vec<T>,
    p: Vec<T>,
    direction: T,
}

impl<T: Real> Profile<T> {
    fn residuals<'a>(&'a self, q: &'a [T], data: &'a [T]) -> impl Iterator<Item = T> + 'a {
        self.x.iter().zip(data).map(move |(x, d)| *d - knife_edge_model(*x, q[0], q[1].exp(), q[2], q[3], self.direction))
    }

    fn fit(&self, q0: &[T], scale: &[T], data: &[T], opts: &SimplexOptions) -> (Vec<T>, usize, bool, T) {
        let m = minimize(|q| ssr(self.residuals(q, data)), q0, scale, opts);
        (m.point, m.evaluations, m.converged, m.value)
    }
}

/// Position where the normalized profile first crosses `level`, by linear interpolation.
fn crossing<T: Real>(x: &[T], level: &[T], target: T) -> Option<T> {
    (1..x.len()).find_map(|i| {
        let (a, b) = (level[i - 1], level[i]);
        if (a - target) * (b - target) <= T::zero() && a != b {
            Some(x[i - 1] + (target - a) / (b - a) * (x[i] - x[i - 1]))
        } else {
            None
        }
    })
}

/// Fit `(position, power)` samples. Reports `w0`, `x0`, `amplitude`,
/// `baseline` and the edge `direction` (+1 when power rises with position).
pub fn fit_knife_edge<T: Real>(profile: &[(T, T)]) -> Result<Flagged<FitReport<T>>> {
    if profile.len() < 6 {
        return Err(Error::InsufficientData(format!("{} knife-edge samples, need 6", profile.len())));
    }
    if profile.iter().any(|(x, p)| !x.is_finite() || !p.is_finite()) {
        return Err(Error::invalid("profile", "non-finite sample"));
    }
    let mut pts = profile.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let x: Vec<T> = pts.iter().map(|p| p.0).collect();
    let p: Vec<T> = pts.iter().map(|p| p.1).collect();
    let n = x.len();

    let decile = (n / 10).max(1);
    let mean = |s: &[T]| s.iter().fold(T::zero(), |a, v| a + *v) / T::from_usize_lossy(s.len());
    let (lo, hi) = (mean(&p[..decile]), mean(&p[n - decile..]));
    let direction = if hi >= lo { T::one() } else { -T::one() };
    let p0 = (hi - lo).abs();
    let range = p.iter().fold(T::neg_infinity(), |m, v| m.max(*v)) - p.iter().fold(T::infinity(), |m, v| m.min(*v));
    if !(p0 > T::zero()) || !(range > T::zero()) {
        return Err(Error::NonConvergence { reason: "profile has no edge transition".into(), best: None });
    }
    let baseline = lo.min(hi);
    let level: Vec<T> = p.iter().map(|v| (*v - baseline) / p0).map(|l| if direction > T::zero() { l } else { T::one() - l }).collect();
    let spacing = x.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > T::zero()).fold(T::infinity(), T::min);
    let span = x[n - 1] - x[0];
    let x0 = crossing(&x, &level, c(0.5)).unwrap_or(x[n / 2]);
    let w0 = match (crossing(&x, &level, c(0.1)), crossing(&x, &level, c(0.9))) {
        (Some(a), Some(b)) if b > a => (b - a) / c(1.2816),
        _ => span / c(10.0),
    }
    .max(spacing / c(4.0));

    let fit = Profile { x, p, direction };
    let q0 = [x0, w0.ln(), p0, baseline];
    let scale = [w0, c(0.1), p0 / c(10.0), p0 / c(10.0)];
    let opts = SimplexOptions::default();
    let (q, evaluations, converged, sse) = fit.fit(&q0, &scale, &fit.p, &opts);
    let values = [q[1].exp(), q[0], q[2], q[3], direction];
    let mut report = FitReport::new(&["w0", "x0", "amplitude", "baseline", "direction"], &values, evaluations, converged, sse.sqrt());
    if !converged {
        return Err(non_convergence("knife-edge fit exhausted its evaluation budget", &report));
    }
    let p_mean = mean(&fit.p);
    let sst = ssr(fit.p.iter().map(|v| *v - p_mean));
    let r2 = T::one() - sse / sst;
    if !(r2 >= c(MIN_R2)) {
        return Err(non_convergence(format!("profile is not edge-like (R^2 = {r2:.3})"), &report));
    }

    let mut warnings = Vec::new();
    if values[0] < spacing {
        warnings.push(Warning::BelowResolution { parameter: "w0" });
    }

    let best: Vec<T> = fit.x.iter().map(|x| knife_edge_model(*x, q[0], values[0], q[2], q[3], direction)).collect();
    let resid: Vec<T> = fit.p.iter().zip(&best).map(|(d, m)| *d - *m).collect();
    let quick = SimplexOptions { restarts: 0, ..opts };
    let samples = bootstrap(BOOTSTRAP, 0, |rng| {
        let data: Vec<T> = best.iter().map(|m| *m + resid[rng.gen_range(0..resid.len())]).collect();
        let (s, _, ok, _) = fit.fit(&q, &scale, &data, &quick);
        ok.then(|| vec![s[1].exp(), s[0], s[2], s[3]])
    });
    if let Some(sd) = spread(&samples) {
        for (name, s) in ["w0", "x0", "amplitude", "baseline"].iter().zip(sd) {
            report.set_uncertainty(name, s);
        }
    }
    Ok(Flagged::new(report, warnings))
}
