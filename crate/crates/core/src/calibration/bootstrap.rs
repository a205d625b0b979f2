//! Resampling utilities for uncertainty estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalar::Real;

/// Run `n` resamples in parallel. Resample `i` gets its own ChaCha stream
/// derived from `seed`, so the result is independent of thread scheduling.
/// Failed resamples (returning `None`) are dropped.
pub fn bootstrap<T, F>(n: usize, seed: u64, f: F) -> Vec<Vec<T>>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Option<Vec<T>> + Sync,
{
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            f(&mut rng)
        })
        .collect()
}

/// Per-column sample standard deviation; `None` with fewer than two samples.
pub fn spread<T: Real>(samples: &[Vec<T>]) -> Option<Vec<T>> {
    if samples.len() < 2 {
        return None;
    }
    let dim = samples[0].len();
    let n = T::from_usize_lossy(samples.len());
    Some(
        (0..dim)
            .map(|j| {
                let mean = samples.iter().fold(T::zero(), |s, v| s + v[j]) / n;
                let var = samples.iter().fold(T::zero(), |s, v| s + (v[j] - mean).powi(2)) / (n - T::one());
                var.sqrt()
            })
            .collect(),
    )
}
