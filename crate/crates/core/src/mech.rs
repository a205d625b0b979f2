//! Mechanical modeshapes and resonator parameters.
//!
//! The ribbon is centered at the origin with its torsion axis along `x = 0`
//! and `y` spanning `[-L/2, L/2]`. Analytic shapes use the centered cosine
//! profile; outside the ribbon every shape evaluates to zero.

use std::io::{BufRead, Write};

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::{c, Real};

/// Grids with fewer nodes than this on either axis are reported as coarse.
pub const COARSE_GRID_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonGeometry<T> {
    pub width: T,
    pub length: T,
    /// Informational only.
    pub thickness: T,
}

impl<T: Real> RibbonGeometry<T> {
    pub fn new(width: T, length: T, thickness: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::invalid("ribbon.width", "must be positive"));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::invalid("ribbon.length", "must be positive"));
        }
        Ok(Self { width, length, thickness })
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        let half = c::<T>(0.5);
        x.abs() <= half * self.width && y.abs() <= half * self.length
    }
}

/// Modeshape sampled on a grid, normalized to unit peak magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedShape<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> GriddedShape<T> {
    /// Normalizes the samples so that `max |phi| = 1`.
    pub fn new(grid: GridSpec<T>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "non-finite sample"));
        }
        let peak = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if peak == T::zero() {
            return Err(Error::DegenerateShape);
        }
        for v in &mut values {
            *v = *v / peak;
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn bilinear(&self, x: T, y: T) -> T {
        let g = &self.grid;
        if !(x >= g.x_min && x <= g.x_max && y >= g.y_min && y <= g.y_max) {
            return T::zero();
        }
        let fx = (x - g.x_min) / g.dx();
        let fy = (y - g.y_min) / g.dy();
        let i = fx.floor().to_usize().unwrap_or(0).min(g.nx - 2);
        let j = fy.floor().to_usize().unwrap_or(0).min(g.ny - 2);
        let tx = fx - T::from_usize_lossy(i);
        let ty = fy - T::from_usize_lossy(j);
        let v = |a: usize, b: usize| self.values[g.index(a, b)];
        let one = T::one();
        (one - tx) * (one - ty) * v(i, j) + tx * (one - ty) * v(i + 1, j) + (one - tx) * ty * v(i, j + 1) + tx * ty * v(i + 1, j + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeShape<T> {
    /// `(2x/w_r) cos(pi y / L)`.
    TorsionFundamental(RibbonGeometry<T>),
    /// `cos(pi y / L)`.
    FlexuralFundamental(RibbonGeometry<T>),
    Gridded(GriddedShape<T>),
}

impl<T: Real> ModeShape<T> {
    pub fn torsion(geometry: RibbonGeometry<T>) -> Self {
        ModeShape::TorsionFundamental(geometry)
    }

    pub fn flexural(geometry: RibbonGeometry<T>) -> Self {
        ModeShape::FlexuralFundamental(geometry)
    }

    /// Dimensionless amplitude; zero outside the domain.
    pub fn eval(&self, x: T, y: T) -> T {
        match self {
            ModeShape::TorsionFundamental(g) => {
                if !g.contains(x, y) {
                    return T::zero();
                }
                c::<T>(2.0) * x / g.width * (T::PI() * y / g.length).cos()
            }
            ModeShape::FlexuralFundamental(g) => {
                if !g.contains(x, y) {
                    return T::zero();
                }
                (T::PI() * y / g.length).cos()
            }
            ModeShape::Gridded(s) => s.bilinear(x, y),
        }
    }

    /// `(d phi/dx, d phi/dy)` in 1/m; zero outside the domain.
    pub fn grad(&self, x: T, y: T) -> (T, T) {
        match self {
            ModeShape::TorsionFundamental(g) => {
                if !g.contains(x, y) {
                    return (T::zero(), T::zero());
                }
                let k = T::PI() / g.length;
                let two = c::<T>(2.0);
                ((two / g.width) * (k * y).cos(), -(two * x / g.width) * k * (k * y).sin())
            }
            ModeShape::FlexuralFundamental(g) => {
                if !g.contains(x, y) {
                    return (T::zero(), T::zero());
                }
                let k = T::PI() / g.length;
                (T::zero(), -k * (k * y).sin())
            }
            ModeShape::Gridded(s) => {
                let (hx, hy) = (s.grid.dx(), s.grid.dy());
                let two = c::<T>(2.0);
                (
                    (s.bilinear(x + hx, y) - s.bilinear(x - hx, y)) / (two * hx),
                    (s.bilinear(x, y + hy) - s.bilinear(x, y - hy)) / (two * hy),
                )
            }
        }
    }

    /// Maximum of `|phi|` over the domain (1 after construction).
    pub fn peak(&self) -> T {
        match self {
            ModeShape::Gridded(s) => s.values.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            _ => T::one(),
        }
    }

    /// Smallest feature scale, used to judge whether a probe spot is small.
    pub fn feature_scale(&self) -> T {
        match self {
            ModeShape::TorsionFundamental(g) | ModeShape::FlexuralFundamental(g) => g.width.min(g.length),
            ModeShape::Gridded(s) => (s.grid.x_max - s.grid.x_min).min(s.grid.y_max - s.grid.y_min),
        }
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        match self {
            ModeShape::TorsionFundamental(g) | ModeShape::FlexuralFundamental(g) => g.contains(x, y),
            ModeShape::Gridded(s) => {
                let g = &s.grid;
                x >= g.x_min && x <= g.x_max && y >= g.y_min && y <= g.y_max
            }
        }
    }
}

/// A mechanical resonance and its modeshape.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalMode<T> {
    pub shape: ModeShape<T>,
    pub frequency: T,
    pub quality_factor: T,
    /// Effective moment of inertia (kg m^2).
    pub inertia: T,
    pub temperature: T,
}

impl<T: Real> MechanicalMode<T> {
    pub fn new(shape: ModeShape<T>, frequency: T, quality_factor: T, inertia: T, temperature: T) -> Result<Self> {
        for (name, v) in [
            ("mode.frequency", frequency),
            ("mode.quality_factor", quality_factor),
            ("mode.inertia", inertia),
            ("mode.temperature", temperature),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        Ok(Self { shape, frequency, quality_factor, inertia, temperature })
    }

    pub fn angular_frequency(&self) -> T {
        T::TAU() * self.frequency
    }

    /// Energy damping rate `omega_m / Q` in rad/s.
    pub fn linewidth(&self) -> T {
        self.angular_frequency() / self.quality_factor
    }

    /// Amplitude decay time `2 Q / omega_m`.
    pub fn amplitude_decay_time(&self) -> T {
        c::<T>(2.0) * self.quality_factor / self.angular_frequency()
    }
}

/// Read a gridded modeshape: line 1 `nx ny`, line 2 `x_min x_max y_min y_max`,
/// then `nx*ny` values with `y` as the outer index.
pub fn load_grid_shape<T: Real, R: BufRead>(reader: R) -> Result<Flagged<ModeShape<T>>> {
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut values: Vec<T> = Vec::new();
    let mut expected = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if header.len() < 2 {
            header.push((lineno, trimmed.to_string()));
            if header.len() == 2 {
                let (nx, ny) = parse_dims(&header[0])?;
                expected = Some((nx, ny, parse_bounds::<T>(&header[1])?));
            }
            continue;
        }
        let (nx, ny, _) = expected.expect("header parsed");
        for tok in trimmed.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse { line: lineno, reason: format!("bad value `{tok}`") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: lineno, reason: format!("non-finite value `{tok}`") });
            }
            if values.len() == nx * ny {
                return Err(Error::Parse { line: lineno, reason: format!("more than {} values", nx * ny) });
            }
            values.push(T::lit(v));
        }
    }
    let Some((nx, ny, (x0, x1, y0, y1))) = expected else {
        return Err(Error::Parse { line: header.len() + 1, reason: "missing header".into() });
    };
    if values.len() != nx * ny {
        return Err(Error::Parse {
            line: 0,
            reason: format!("expected {} values, found {}", nx * ny, values.len()),
        });
    }
    let grid = GridSpec::new(x0, x1, y0, y1, nx, ny)
        .map_err(|e| Error::Parse { line: header[1].0, reason: e.to_string() })?;
    let shape = GriddedShape::new(grid, values)?;
    let mut warnings = Vec::new();
    if nx < COARSE_GRID_NODES || ny < COARSE_GRID_NODES {
        warnings.push(Warning::CoarseGrid { nx, ny });
    }
    Ok(Flagged::new(ModeShape::Gridded(shape), warnings))
}

fn parse_dims((line, text): &(usize, String)) -> Result<(usize, usize)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let bad = || Error::Parse { line: *line, reason: format!("expected `nx ny`, got `{text}`") };
    if toks.len() != 2 {
        return Err(bad());
    }
    let nx: usize = toks[0].parse().map_err(|_| bad())?;
    let ny: usize = toks[1].parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(Error::Parse { line: *line, reason: "need at least 2 nodes per axis".into() });
    }
    Ok((nx, ny))
}

fn parse_bounds<T: Real>((line, text): &(usize, String)) -> Result<(T, T, T, T)> {
    let bad = || Error::Parse { line: *line, reason: format!("expected `x_min x_max y_min y_max`, got `{text}`") };
    let v: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok((T::lit(v[0]), T::lit(v[1]), T::lit(v[2]), T::lit(v[3])))
}

/// Write a modeshape sampled on `grid` in the format read by [`load_grid_shape`].
pub fn write_grid_shape<T: Real, W: Write>(shape: &ModeShape<T>, grid: &GridSpec<T>, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", grid.nx, grid.ny)?;
    writeln!(out, "{:e} {:e} {:e} {:e}", grid.x_min, grid.x_max, grid.y_min, grid.y_max)?;
    for j in 0..grid.ny {
        let row: Vec<String> = (0..grid.nx).map(|i| format!("{:e}", shape.eval(grid.x(i), grid.y(j)))).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ribbon() -> RibbonGeometry<f64> {
        RibbonGeometry::new(380e-6, 7e-3, 75e-9).unwrap()
    }

    #[test]
    fn torsion_values() {
        let s = ModeShape::torsion(ribbon());
        assert_relative_eq!(s.eval(190e-6, 0.0), 1.0, epsilon = 1e-15);
        assert_eq!(s.eval(0.0, 1e-3), 0.0);
        assert_eq!(s.eval(200e-6, 0.0), 0.0);
        let (gx, _) = s.grad(0.0, 0.0);
        assert_relative_eq!(gx, 2.0 / 380e-6, max_relative = 1e-14);
        assert_eq!(s.grad(1e-4, 0.0).1, 0.0);
    }

    #[test]
    fn flexural_values() {
        let s = ModeShape::flexural(ribbon());
        assert!(s.eval(5e-5, 3.5e-3).abs() < 1e-15);
        assert!(s.eval(5e-5, -3.5e-3).abs() < 1e-15);
        assert_eq!(s.grad(5e-5, 0.0).1, 0.0);
        assert_eq!(s.grad(5e-5, 1e-3).0, 0.0);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let g = ribbon();
        for s in [ModeShape::torsion(g), ModeShape::flexural(g)] {
            let h = 1e-8 * g.width.min(g.length);
            for &(x, y) in &[(1e-5, 2e-4), (-1.2e-4, -2.5e-3), (1.5e-4, 3e-3)] {
                let (gx, gy) = s.grad(x, y);
                let fx = (s.eval(x + h, y) - s.eval(x - h, y)) / (2.0 * h);
                let fy = (s.eval(x, y + h) - s.eval(x, y - h)) / (2.0 * h);
                let scale = gx.abs().max(gy.abs());
                assert!((gx - fx).abs() <= 1e-6 * scale, "{gx} vs {fx}");
                assert!((gy - fy).abs() <= 1e-6 * scale, "{gy} vs {fy}");
            }
        }
    }

    #[test]
    fn gridded_round_trip_and_interpolation() {
        let src = ModeShape::torsion(ribbon());
        let grid = GridSpec::new(-190e-6, 190e-6, -3.5e-3, 3.5e-3, 41, 61).unwrap();
        let mut buf = Vec::new();
        write_grid_shape(&src, &grid, &mut buf).unwrap();
        let loaded = load_grid_shape::<f64, _>(buf.as_slice()).unwrap();
        assert!(loaded.warnings.is_empty());
        let s = loaded.value;
        assert!((s.peak() - 1.0).abs() < 1e-12);
        for j in [0, 17, 60] {
            for i in [0, 5, 40] {
                let (x, y) = (grid.x(i), grid.y(j));
                assert!((s.eval(x, y) - src.eval(x, y)).abs() < 1e-12);
            }
        }
        let (gx, _) = s.grad(0.0, 0.0);
        assert_relative_eq!(gx, 2.0 / 380e-6, max_relative = 1e-3);
        assert_eq!(s.eval(1.0, 0.0), 0.0);
    }

    #[test]
    fn gridded_is_normalized() {
        let grid = GridSpec::new(0.0, 1.0, 0.0, 1.0, 3, 2).unwrap();
        let s = GriddedShape::new(grid, vec![0.5, -2.0, 1.0, 0.0, 0.25, 1.5]).unwrap();
        assert_eq!(s.values().iter().fold(0.0_f64, |m: f64, v: &f64| m.max(v.abs())), 1.0);
        assert_eq!(s.values()[1], -1.0);
    }

    #[test]
    fn zero_file_rejected() {
        let text = "2 2\n0 1 0 1\n0 0\n0 0\n";
        assert_eq!(load_grid_shape::<f64, _>(text.as_bytes()), Err(Error::DegenerateShape));
    }

    #[test]
    fn minimal_grid_is_coarse() {
        let text = "2 2\n0 1e-3 0 1e-3\n1 2 3 4\n";
        let s = load_grid_shape::<f64, _>(text.as_bytes()).unwrap();
        assert!(s.has(|w| matches!(w, Warning::CoarseGrid { nx: 2, ny: 2 })));
        assert_relative_eq!(s.value.eval(1e-3, 1e-3), 1.0);
        assert_relative_eq!(s.value.eval(0.5e-3, 0.5e-3), 0.625);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("2\n0 1 0 1\n1 2 3 4\n", 1),
            ("2 2\n0 1 0\n1 2 3 4\n", 2),
            ("2 2\n0 1 0 1\n1 2\n3 x\n", 4),
            ("2 2\n0 1 0 1\n1 2\nnan 4\n", 4),
            ("2 2\n0 1 0 1\n1 2 3 4 5\n", 3),
        ];
        for (text, line) in cases {
            match load_grid_shape::<f64, _>(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(load_grid_shape::<f64, _>("2 2\n0 1 0 1\n1 2 3\n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn mode_derived_quantities() {
        let m = MechanicalMode::new(ModeShape::torsion(ribbon()), 52.5e3, 65e6, 2.8e-18, 295.0).unwrap();
        assert_relative_eq!(m.amplitude_decay_time(), 65e6 / (std::f64::consts::PI * 52.5e3), max_relative = 1e-12);
        assert_relative_eq!(m.amplitude_decay_time(), 394.1, max_relative = 1e-3);
        assert!(MechanicalMode::new(ModeShape::torsion(ribbon()), 0.0, 1.0, 1.0, 1.0).is_err());
    }
}
