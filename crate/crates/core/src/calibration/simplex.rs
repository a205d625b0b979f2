//! Derivative-free Nelder-Mead minimizer.
//!
//! Works on normalized coordinates `x = x0 + scale * u` so that a unit step
//! is meaningful for every parameter, and declares convergence when the
//! simplex diameter in `u` falls below the tolerance.

use crate::scalar::{c, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Simplex diameter in normalized units.
    pub tolerance: f64,
    pub max_evaluations: usize,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_evaluations: 10_000, restarts: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub point: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn minimize<T: Real, F: FnMut(&[T]) -> T>(mut f: F, x0: &[T], scale: &[T], opts: &SimplexOptions) -> Minimum<T> {
    assert_eq!(x0.len(), scale.len(), "one scale per parameter");
    let dim = x0.len();
    // Below ~sqrt(eps) the simplex stops shrinking in single precision.
    let tol = c::<T>(opts.tolerance).max(T::epsilon().sqrt() * c(1e-1));
    let mut eval = |u: &[T]| -> T {
        let x: Vec<T> = x0.iter().zip(scale).zip(u).map(|((a, s), v)| *a + *s * *v).collect();
        let v = f(&x);
        if v.is_finite() { v } else { T::infinity() }
    };

    let mut start = vec![T::zero(); dim];
    let mut evaluations = 0;
    let mut best = (start.clone(), T::infinity());
    let mut converged = false;
    for _ in 0..=opts.restarts {
        let budget = opts.max_evaluations.saturating_sub(evaluations);
        if budget <= dim + 1 {
            break;
        }
        let run = nelder_mead(&mut eval, &start, tol, budget);
        evaluations += run.evaluations;
        converged = run.converged;
        let improved = run.value < best.1;
        if improved || best.1.is_infinite() {
            best = (run.point.clone(), run.value);
        }
        start = best.0.clone();
        if !run.converged {
            break;
        }
    }
    let point = x0.iter().zip(scale).zip(&best.0).map(|((a, s), v)| *a + *s * *v).collect();
    Minimum { point, value: best.1, evaluations, converged }
}

fn nelder_mead<T: Real>(f: &mut impl FnMut(&[T]) -> T, start: &[T], tol: T, budget: usize) -> Minimum<T> {
    let dim = start.len();
    let half = c::<T>(0.5);
    let two = c::<T>(2.0);
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] = p[i] + T::one();
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evaluations = dim + 1;
    let mut converged = false;

    while evaluations < budget {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| p.iter().zip(&simplex[0].0).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
            .fold(T::zero(), T::max);
        if diameter < tol {
            converged = true;
            break;
        }

        let n = T::from_usize_lossy(dim);
        let centroid: Vec<T> = (0..dim)
            .map(|i| simplex[..dim].iter().fold(T::zero(), |s, (p, _)| s + p[i]) / n)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: T| -> Vec<T> { centroid.iter().zip(&worst.0).map(|(cc, w)| *cc + t * (*cc - *w)).collect() };

        let reflected = along(T::one());
        let fr = f(&reflected);
        evaluations += 1;
        if fr < simplex[0].1 {
            let expanded = along(two);
            let fe = f(&expanded);
            evaluations += 1;
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = along(half);
            let v = f(&p);
            (p, v)
        } else {
            let p = along(-half);
            let v = f(&p);
            (p, v)
        };
        evaluations += 1;
        if fc < worst.1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (p, v) in simplex.iter_mut().skip(1) {
            for (x, b) in p.iter_mut().zip(&best) {
                *x = *b + half * (*x - *b);
            }
            *v = f(p);
        }
        evaluations += dim;
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (point, value) = simplex.swap_remove(0);
    Minimum { point, value, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &SimplexOptions::default(),
        );
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-6 && (r.point[1] - 1.0).abs() < 1e-6, "{:?}", r.point);
    }

    #[test]
    fn respects_scale() {
        let r = minimize(|x: &[f64]| ((x[0] - 3e-6) / 1e-6).powi(2) + (x[1] - 5e4).powi(2) / 1e6, &[1e-6, 1e4], &[1e-6, 1e4], &SimplexOptions::default());
        assert!((r.point[0] / 3e-6 - 1.0).abs() < 1e-6);
        assert!((r.point[1] / 5e4 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = SimplexOptions { max_evaluations: 20, ..Default::default() };
        let r = minimize(|x: &[f64]| x.iter().map(|v| (v - 7.0).powi(2)).sum(), &[0.0; 4], &[1.0; 4], &opts);
        assert!(!r.converged);
        assert!(r.evaluations <= 24);
    }

    #[test]
    fn non_finite_objective_is_avoided() {
        let r = minimize(|x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) }, &[1.0], &[1.0], &SimplexOptions::default());
        assert!((r.point[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn single_precision() {
        let r = minimize(|x: &[f32]| (x[0] - 0.25).powi(2), &[0.0f32], &[1.0], &SimplexOptions::default());
        assert!(r.converged);
        assert!((r.point[0] - 0.25).abs() < 1e-3);
    }
}
