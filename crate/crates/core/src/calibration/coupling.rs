//! Joint fit of the HG00 and HG10 channel couplings versus receiver shift.
//!
//! With waist-matched modes the two curves are
//! `eta00(x) = eta00_0 exp(-x^2/w^2)` and
//! `eta10(x) = eta10_0 cos^2(phi_x) (x/w)^2 exp(-x^2/w^2)`.
//! Only the product `eta10_0 cos^2(phi_x)` is identifiable from them, so
//! `phi_x` and `eta10_0` are separated only when `phi_x` is supplied.

use rand::Rng;

use super::bootstrap::{bootstrap, spread};
use super::simplex::{minimize, SimplexOptions};
use super::{non_convergence, FitReport};
use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingPoint<T> {
    pub x: T,
    pub eta00: T,
    pub eta10: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingOptions {
    /// Known shift direction `phi_x` (rad); splits the HG10 product.
    pub shift_angle: Option<f64>,
    pub bootstrap: usize,
    pub seed: u64,
}

/// For a trial waist, the best `(eta00_0, product)` in closed form and the SSR.
fn profile<T: Real>(data: &[CouplingPoint<T>], w: T) -> (T, T, T) {
    let (mut g00, mut d00, mut g10, mut d10) = (T::zero(), T::zero(), T::zero(), T::zero());
    for p in data {
        let r2 = (p.x / w).powi(2);
        let e = (-r2).exp();
        g00 = g00 + e * e;
        d00 = d00 + e * p.eta00;
        g10 = g10 + (r2 * e).powi(2);
        d10 = d10 + r2 * e * p.eta10;
    }
    let a = if g00 > T::zero() { d00 / g00 } else { T::zero() };
    let b = if g10 > T::zero() { d10 / g10 } else { T::zero() };
    let ssr = data.iter().fold(T::zero(), |s, p| {
        let r2 = (p.x / w).powi(2);
        let e = (-r2).exp();
        s + (p.eta00 - a * e).powi(2) + (p.eta10 - b * r2 * e).powi(2)
    });
    (a, b, ssr)
}

fn fit_waist<T: Real>(data: &[CouplingPoint<T>], w0: T, opts: &SimplexOptions) -> (T, usize, bool) {
    let m = minimize(|q| profile(data, w0 * q[0].exp()).2, &[T::zero()], &[c(0.1)], opts);
    (w0 * m.point[0].exp(), m.evaluations, m.converged)
}

/// Reports `waist`, `eta00_0` and `eta10_cos2` (the identifiable product),
/// plus `shift_angle` and `eta10_0` when the angle is pinned.
pub fn fit_coupling_model<T: Real>(data: &[CouplingPoint<T>], opts: &CouplingOptions) -> Result<Flagged<FitReport<T>>> {
    let mut xs: Vec<T> = data.iter().map(|p| p.x.abs()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    xs.dedup();
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!("{} distinct positions, need 5", xs.len())));
    }
    if data.iter().any(|p| !p.x.is_finite() || !p.eta00.is_finite() || !p.eta10.is_finite()) {
        return Err(Error::invalid("data", "non-finite sample"));
    }

    // Start from the 1/e point of the HG00 curve, or the HG10 maximum.
    let peak10 = data.iter().fold(data[0], |b, p| if p.eta10 > b.eta10 { *p } else { b });
    let top00 = data.iter().fold(T::zero(), |m, p| m.max(p.eta00));
    let w_init = if peak10.eta10 > T::zero() && peak10.x.abs() > T::zero() {
        peak10.x.abs()
    } else {
        data.iter()
            .filter(|p| p.eta00 <= top00 / T::E() && p.x.abs() > T::zero())
            .map(|p| p.x.abs())
            .fold(T::infinity(), T::min)
    };
    let w_init = if w_init.is_finite() { w_init } else { xs[xs.len() - 1] };

    let simplex = SimplexOptions { tolerance: 1e-13, ..Default::default() };
    let (w, evaluations, converged) = fit_waist(data, w_init, &simplex);
    let (a, b, ssr) = profile(data, w);
    let mut report = FitReport::new(&["waist", "eta00_0", "eta10_cos2"], &[w, a, b], evaluations, converged, ssr.sqrt());
    if !converged {
        return Err(non_convergence("coupling fit exhausted its evaluation budget", &report));
    }

    let mut warnings = Vec::new();
    if !xs.iter().any(|x| *x > w) {
        warnings.push(Warning::IllConditioned { detail: "no position beyond the HG10 maximum at x = w".into() });
    }
    let all_zero10 = data.iter().all(|p| p.eta10 == T::zero());
    match opts.shift_angle {
        Some(phi) => {
            let cos2 = c::<T>(phi.cos().powi(2));
            if cos2 < c(1e-12) {
                return Err(Error::invalid("shift_angle", "cos(phi_x) = 0 leaves eta10_0 undetermined"));
            }
            report.push("shift_angle", c(phi), Some(T::zero()));
            report.push("eta10_0", b / cos2, None);
        }
        None if all_zero10 => warnings.push(Warning::Degenerate {
            detail: "eta10 vanishes everywhere: consistent with phi_x = 90 deg for any eta10_0".into(),
        }),
        None => warnings.push(Warning::Degenerate {
            detail: "phi_x and eta10_0 enter only as eta10_0 cos^2(phi_x); supply phi_x to separate them".into(),
        }),
    }

    if opts.bootstrap > 1 {
        let fitted: Vec<(T, T)> = data
            .iter()
            .map(|p| {
                let r2 = (p.x / w).powi(2);
                let e = (-r2).exp();
                (a * e, b * r2 * e)
            })
            .collect();
        let resid: Vec<(T, T)> = data.iter().zip(&fitted).map(|(p, f)| (p.eta00 - f.0, p.eta10 - f.1)).collect();
        let quick = SimplexOptions { restarts: 0, ..simplex };
        let samples = bootstrap(opts.bootstrap, opts.seed, |rng| {
            let resampled: Vec<CouplingPoint<T>> = data
                .iter()
                .zip(&fitted)
                .map(|(p, f)| {
                    let r = resid[rng.gen_range(0..resid.len())];
                    CouplingPoint { x: p.x, eta00: f.0 + r.0, eta10: f.1 + r.1 }
                })
                .collect();
            let (ws, _, ok) = fit_waist(&resampled, w, &quick);
            let (sa, sb, _) = profile(&resampled, ws);
            ok.then(|| vec![ws, sa, sb])
        });
        if let Some(sd) = spread(&samples) {
            for (name, s) in ["waist", "eta00_0", "eta10_cos2"].iter().zip(&sd) {
                report.set_uncertainty(name, *s);
            }
            if let Some(phi) = opts.shift_angle {
                report.set_uncertainty("eta10_0", sd[2] / c(phi.cos().powi(2)));
            }
        }
    }
    Ok(Flagged::new(report, warnings))
}
