//! Peak-area prediction for a coupling scan read out through a rotated port.

use crate::overlap::ScanRow;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaRow<T> {
    pub y0: T,
    /// `beta10^2 cos^2(phi) + beta01^2 sin^2(phi)`, normalized to the scan maximum.
    pub area: T,
}

/// Relative thermal peak area along a scan when the first-order port is
/// rotated by `phi` (`phi = 0` reads pure HG10).
pub fn area_scan_model<T: Real>(phi: T, scan: &[ScanRow<T>]) -> Vec<AreaRow<T>> {
    let (s, co) = phi.sin_cos();
    let raw: Vec<T> = scan.iter().map(|r| (r.beta10 * co).powi(2) + (r.beta01 * s).powi(2)).collect();
    let top = raw.iter().fold(T::zero(), |m, v| m.max(*v));
    scan.iter()
        .zip(raw)
        .map(|(r, a)| AreaRow { y0: r.y0, area: if top > T::zero() { a / top } else { T::zero() } })
        .collect()
}
