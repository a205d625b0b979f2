//! Hermite-Gauss transverse modes: evaluation, sampling and overlaps.
//!
//! Modes are normalized so that the continuum inner product of a mode with
//! itself is 1. A mode carries a lateral center, an in-plane rotation about
//! that center and an optional transverse wavevector (linear phase ramp),
//! which represents a lateral shift in the Fourier plane of the sample.

use num_complex::Complex;

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::{c, Real};

/// Largest supported total mode order `m + n`.
pub const MAX_ORDER: u32 = 10;

/// Physicists' Hermite polynomial `H_n(x)` by upward recurrence.
pub fn hermite<T: Real>(n: u32, x: T) -> T {
    let two = c::<T>(2.0);
    let mut h_prev = T::one();
    if n == 0 {
        return h_prev;
    }
    let mut h = two * x;
    for k in 1..n {
        let next = two * x * h - two * T::from_u32(k).unwrap() * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Normalized one-dimensional Hermite-Gauss function of order `n` and waist `w`.
pub fn hg_1d<T: Real>(n: u32, x: T, w: T) -> T {
    let mut fact = T::one();
    for k in 2..=n {
        fact = fact * T::from_u32(k).unwrap();
    }
    let two = c::<T>(2.0);
    let norm = (two / T::PI()).powf(c(0.25)) / (two.powi(n as i32) * fact * w).sqrt();
    let xi = x / w;
    norm * hermite(n, two.sqrt() * xi) * (-xi * xi).exp()
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut r = a % two_pi;
    if r <= -T::PI() {
        r = r + two_pi;
    } else if r > T::PI() {
        r = r - two_pi;
    }
    r
}

/// A single Hermite-Gauss basis element `u_mn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalMode<T> {
    pub m: u32,
    pub n: u32,
    pub waist: T,
    pub center: (T, T),
    /// In-plane rotation about `center`, in `(-pi, pi]`.
    pub rotation: T,
    /// Transverse wavevector `(k_x, k_y)` in rad/m.
    pub tilt: (T, T),
}

impl<T: Real> OpticalMode<T> {
    pub fn new(m: u32, n: u32, waist: T) -> Result<Self> {
        if !(waist > T::zero()) || !waist.is_finite() {
            return Err(Error::invalid("waist", "must be positive and finite"));
        }
        if m + n > MAX_ORDER {
            return Err(Error::invalid("order", format!("m + n = {} exceeds {MAX_ORDER}", m + n)));
        }
        Ok(Self {
            m,
            n,
            waist,
            center: (T::zero(), T::zero()),
            rotation: T::zero(),
            tilt: (T::zero(), T::zero()),
        })
    }

    pub fn hg00(waist: T) -> Result<Self> {
        Self::new(0, 0, waist)
    }

    pub fn with_center(mut self, x: T, y: T) -> Self {
        self.center = (x, y);
        self
    }

    pub fn with_rotation(mut self, angle: T) -> Self {
        self.rotation = wrap_angle(angle);
        self
    }

    pub fn with_tilt(mut self, kx: T, ky: T) -> Self {
        self.tilt = (kx, ky);
        self
    }

    pub fn order(&self) -> u32 {
        self.m + self.n
    }

    /// Same center, waist, rotation and tilt, different indices.
    pub fn sibling(&self, m: u32, n: u32) -> Result<Self> {
        let base = Self::new(m, n, self.waist)?;
        Ok(Self { center: self.center, rotation: self.rotation, tilt: self.tilt, ..base })
    }

    /// Complex amplitude at `(x, y)` in m^-1.
    pub fn eval(&self, x: T, y: T) -> Complex<T> {
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        let (s, co) = self.rotation.sin_cos();
        let u = co * dx + s * dy;
        let v = -s * dx + co * dy;
        let amp = hg_1d(self.m, u, self.waist) * hg_1d(self.n, v, self.waist);
        if self.tilt.0 == T::zero() && self.tilt.1 == T::zero() {
            Complex::new(amp, T::zero())
        } else {
            Complex::from_polar(amp, self.tilt.0 * x + self.tilt.1 * y)
        }
    }

    /// True when the window leaves less than two waists around the center.
    pub fn truncated_by(&self, grid: &GridSpec<T>) -> bool {
        let margin = c::<T>(2.0) * self.waist;
        let (xc, yc) = self.center;
        xc - grid.x_min < margin || grid.x_max - xc < margin || yc - grid.y_min < margin || grid.y_max - yc < margin
    }
}

/// Anything that can be evaluated pointwise as a transverse field.
pub trait TransverseField<T: Real>: Sync {
    fn eval(&self, x: T, y: T) -> Complex<T>;

    /// Modes whose footprint decides truncation warnings.
    fn components(&self) -> Vec<OpticalMode<T>>;

    fn sample(&self, grid: &GridSpec<T>) -> Flagged<ComplexField<T>> {
        let values = grid.sample(|x, y| self.eval(x, y));
        let mut warnings = Vec::new();
        if self.components().iter().any(|m| m.truncated_by(grid)) {
            warnings.push(Warning::Truncation);
        }
        Flagged::new(ComplexField { grid: *grid, values }, warnings)
    }
}

impl<T: Real> TransverseField<T> for OpticalMode<T> {
    fn eval(&self, x: T, y: T) -> Complex<T> {
        OpticalMode::eval(self, x, y)
    }

    fn components(&self) -> Vec<OpticalMode<T>> {
        vec![*self]
    }
}

/// Linear combination of HG modes, e.g. a rotated first-order detection mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSuperposition<T> {
    pub terms: Vec<(Complex<T>, OpticalMode<T>)>,
}

impl<T: Real> ModeSuperposition<T> {
    pub fn single(mode: OpticalMode<T>) -> Self {
        Self { terms: vec![(Complex::new(T::one(), T::zero()), mode)] }
    }

    /// Apply the same lateral center and tilt to every term.
    pub fn placed(mut self, center: (T, T), tilt: (T, T)) -> Self {
        for (_, m) in &mut self.terms {
            m.center = center;
            m.tilt = tilt;
        }
        self
    }
}

impl<T: Real> TransverseField<T> for ModeSuperposition<T> {
    fn eval(&self, x: T, y: T) -> Complex<T> {
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, m)| acc + *a * m.eval(x, y))
    }

    fn components(&self) -> Vec<OpticalMode<T>> {
        self.terms.iter().map(|(_, m)| *m).collect()
    }
}

/// Complex amplitudes sampled on a grid, in m^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("values", "non-finite sample"));
        }
        Ok(Self { grid, values })
    }

    pub fn norm_sq(&self) -> T {
        let v: Vec<Complex<T>> = self.values.iter().map(|z| Complex::new(z.norm_sqr(), T::zero())).collect();
        self.grid.integrate_values(&v).re
    }

    pub fn scaled(&self, a: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| *v * a).collect() }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: Complex<T>, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| *x + *y * a).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Pointwise product with a real function of position.
    pub fn modulated<F: Fn(T, T) -> Complex<T> + Sync>(&self, f: F) -> Self {
        let m = self.grid.sample(f);
        Self { grid: self.grid, values: self.values.iter().zip(m).map(|(a, b)| *a * b).collect() }
    }
}

/// Sample a mode on a grid; flags truncation when the window is narrower
/// than about two waists around the mode center.
pub fn sample_mode<T: Real>(mode: &OpticalMode<T>, grid: &GridSpec<T>) -> Flagged<ComplexField<T>> {
    mode.sample(grid)
}

/// `<f|g> = \iint conj(f) g dx dy` by trapezoid quadrature.
pub fn inner_product<T: Real>(f: &ComplexField<T>, g: &ComplexField<T>) -> Result<Complex<T>> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<Complex<T>> = f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).collect();
    Ok(f.grid.integrate_values(&prod))
}
