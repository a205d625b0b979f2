//! Uniform transverse grids and trapezoid quadrature over them.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Uniform rectangular sampling of the transverse plane. Nodes include both
/// endpoints of each axis; values are stored row-major with `y` as the outer
/// index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T, nx: usize, ny: usize) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("grid", "bounds must be finite"));
        }
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::invalid("grid", "max must exceed min on both axes"));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("grid", "need at least 2 nodes per axis"));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square window `[-half, half]^2` with `n` nodes per axis.
    pub fn centered(half: T, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    /// Same window translated by `(dx, dy)`.
    pub fn translated(&self, dx: T, dy: T) -> Self {
        Self {
            x_min: self.x_min + dx,
            x_max: self.x_max + dx,
            y_min: self.y_min + dy,
            y_max: self.y_max + dy,
            ..*self
        }
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize_lossy(self.nx - 1)
    }

    pub fn dy(&self) -> T {
        (self.y_max - self.y_min) / T::from_usize_lossy(self.ny - 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_min + self.dx() * T::from_usize_lossy(i)
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y_min + self.dy() * T::from_usize_lossy(j)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Grid with every other node removed (the next coarser level).
    pub fn coarsened(&self) -> Self {
        Self { nx: self.nx.div_ceil(2).max(2), ny: self.ny.div_ceil(2).max(2), ..*self }
    }

    /// Grid with the node spacing halved.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, ..*self }
    }

    /// Trapezoid weight of node `(i, j)`, including the cell area.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        let half = c::<T>(0.5);
        let wx = if i == 0 || i + 1 == self.nx { half } else { T::one() };
        let wy = if j == 0 || j + 1 == self.ny { half } else { T::one() };
        wx * wy * self.dx() * self.dy()
    }

    /// Evaluate `f` at every node, rows in parallel.
    pub fn sample<V, F>(&self, f: F) -> Vec<V>
    where
        V: Send,
        F: Fn(T, T) -> V + Sync,
    {
        let (dx, dy) = (self.dx(), self.dy());
        (0..self.ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let y = self.y_min + dy * T::from_usize_lossy(j);
                let f = &f;
                (0..self.nx).map(move |i| f(self.x_min + dx * T::from_usize_lossy(i), y))
            })
            .collect()
    }

    /// Trapezoid sum of node values laid out on this grid.
    pub fn integrate_values(&self, values: &[Complex<T>]) -> Complex<T> {
        debug_assert_eq!(values.len(), self.len());
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..self.ny {
            let mut row = Complex::new(T::zero(), T::zero());
            for i in 0..self.nx {
                let wx = if i == 0 || i + 1 == self.nx { c::<T>(0.5) } else { T::one() };
                row = row + values[self.index(i, j)] * wx;
            }
            let wy = if j == 0 || j + 1 == self.ny { c::<T>(0.5) } else { T::one() };
            acc = acc + row * wy;
        }
        acc * (self.dx() * self.dy())
    }

    /// Trapezoid integral of a pointwise function.
    pub fn integrate<F>(&self, f: F) -> Complex<T>
    where
        F: Fn(T, T) -> Complex<T> + Sync,
    {
        self.integrate_values(&self.sample(f))
    }

    /// Integral on this grid plus a convergence estimate from the next
    /// coarser level, floored at the rounding level of the sum.
    pub fn integrate_with_estimate<F>(&self, f: F) -> (Complex<T>, T)
    where
        F: Fn(T, T) -> Complex<T> + Sync,
    {
        let values = self.sample(&f);
        let fine = self.integrate_values(&values);
        let coarse = self.coarsened().integrate(&f);
        let abs_mass = self
            .integrate_values(&values.iter().map(|v| Complex::new(v.norm(), T::zero())).collect::<Vec<_>>())
            .re;
        let rounding = c::<T>(16.0) * T::epsilon() * abs_mass;
        ((fine), (fine - coarse).norm().max(rounding))
    }
}
