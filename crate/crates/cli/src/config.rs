//! Experiment configuration: flat `section.key = value` lines (a subset of
//! TOML) with every field defaulting to the reference device.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use spade_core::calibration::simplex::SimplexOptions;
use spade_core::calibration::{CalibrationOptions, CouplingOptions};
use spade_core::mech::load_grid_shape;
use spade_core::{BeamParams, Flagged, GridSpec, MechanicalMode, MisalignConfig, ModeShape, RibbonGeometry};

/// A configuration problem tied to a key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError { key: key.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Torsion,
    Flexural,
}

/// Which modeshape the numeric misalignment column integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericShape {
    /// Torsion mode of a ribbon 100 waists wide and long (pure HG10 scattering).
    Ideal,
    /// The configured mechanical mode.
    Ribbon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub wavelength: f64,
    pub waist: f64,
    pub power: f64,

    pub ribbon_width: f64,
    pub ribbon_length: f64,
    pub thickness: f64,

    pub shape: ShapeKind,
    pub shape_file: Option<PathBuf>,
    pub frequency: f64,
    pub quality_factor: f64,
    pub inertia: f64,
    pub temperature: f64,

    pub shift: f64,
    pub receiver_waist: f64,
    pub rotation_deg: f64,
    pub shift_angle_deg: f64,
    pub eta_d: f64,
    pub eta00_0: f64,
    pub eta10_0: f64,
    pub numeric_shape: NumericShape,

    pub window_waists: f64,
    pub nodes: usize,
    pub fit_tolerance: f64,
    pub max_evaluations: usize,
    pub bootstrap: usize,
    pub seed: u64,

    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_points: usize,

    pub scan_points: usize,

    pub n_avg: usize,
    pub gain: f64,
    pub imprecision: f64,
    pub detector: f64,
    pub span_hz: f64,
    pub bins: usize,
    pub ringdown_duration: f64,
    pub ringdown_dt: f64,
    pub ringdown_noise: f64,
    pub knife_noise: f64,
    pub coupling_noise: f64,
    pub shot_scatter: f64,
    pub responsivity: f64,
    pub transimpedance: f64,
    pub shot_floor: f64,

    pub core_linewidths: f64,
    pub core_bins: usize,
    pub outer_hz: Option<f64>,
    pub free_linewidth: bool,
    pub pinned_shift_angle_deg: Option<f64>,

    pub cool_imprecision: f64,
    pub cool_zero_point: Option<f64>,
    pub cool_efficiency: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            wavelength: 1550e-9,
            waist: 150e-6,
            power: 2.5e-3,
            ribbon_width: 380e-6,
            ribbon_length: 7e-3,
            thickness: 75e-9,
            shape: ShapeKind::Torsion,
            shape_file: None,
            frequency: 52.5e3,
            quality_factor: 65e6,
            inertia: 2.8e-18,
            temperature: 295.0,
            shift: 50e-6,
            receiver_waist: 300e-6,
            rotation_deg: 0.0,
            shift_angle_deg: 45.0,
            eta_d: 0.19,
            eta00_0: 0.5,
            eta10_0: 0.67,
            numeric_shape: NumericShape::Ideal,
            window_waists: 4.0,
            nodes: 257,
            fit_tolerance: 1e-9,
            max_evaluations: 10_000,
            bootstrap: 200,
            seed: 0,
            sweep_start: 0.0,
            sweep_stop: 300e-6,
            sweep_points: 31,
            scan_points: 41,
            n_avg: 200,
            gain: 1e6,
            imprecision: 5e-22,
            detector: 1e-16,
            span_hz: 200.0,
            bins: 1601,
            ringdown_duration: 1500.0,
            ringdown_dt: 1.0,
            ringdown_noise: 0.0,
            knife_noise: 0.01,
            coupling_noise: 0.03,
            shot_scatter: 0.02,
            responsivity: 1.0,
            transimpedance: 1e4,
            shot_floor: 1e-16,
            core_linewidths: 2.0,
            core_bins: 2,
            outer_hz: None,
            free_linewidth: false,
            pinned_shift_angle_deg: None,
            cool_imprecision: 5e-22,
            cool_zero_point: None,
            cool_efficiency: 0.14,
        }
    }
}

/// Flattened `key -> value` view that tracks which keys were consumed.
struct Entries(BTreeMap<String, toml::Value>);

impl Entries {
    fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, toml::Value>) {
        for (k, v) in table {
            let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
            match v {
                toml::Value::Table(t) => Self::flatten(&key, t, out),
                other => {
                    out.insert(key, other);
                }
            }
        }
    }

    fn float(&mut self, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        match self.0.remove(key) {
            None => Ok(()),
            Some(toml::Value::Float(v)) => {
                *slot = v;
                Ok(())
            }
            Some(toml::Value::Integer(v)) => {
                *slot = v as f64;
                Ok(())
            }
            Some(other) => Err(err(key, format!("expected a number, found {}", other.type_str()))),
        }
    }

    fn opt_float(&mut self, key: &str, slot: &mut Option<f64>) -> Result<(), ConfigError> {
        if self.0.contains_key(key) {
            let mut v = 0.0;
            self.float(key, &mut v)?;
            *slot = Some(v);
        }
        Ok(())
    }

    fn count<N: TryFrom<i64>>(&mut self, key: &str, slot: &mut N) -> Result<(), ConfigError> {
        match self.0.remove(key) {
            None => Ok(()),
            Some(toml::Value::Integer(v)) => {
                *slot = N::try_from(v).map_err(|_| err(key, format!("{v} is out of range")))?;
                Ok(())
            }
            Some(other) => Err(err(key, format!("expected an integer, found {}", other.type_str()))),
        }
    }

    fn flag(&mut self, key: &str, slot: &mut bool) -> Result<(), ConfigError> {
        match self.0.remove(key) {
            None => Ok(()),
            Some(toml::Value::Boolean(b)) => {
                *slot = b;
                Ok(())
            }
            Some(other) => Err(err(key, format!("expected true or false, found {}", other.type_str()))),
        }
    }

    fn text(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(err(key, format!("expected a quoted string, found {}", other.type_str()))),
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(file) = &cfg.shape_file {
            if file.is_relative() {
                cfg.shape_file = Some(path.parent().unwrap_or(Path::new(".")).join(file));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0);
            err(&format!("line {line}"), e.message().trim().replace('\n', "; "))
        })?;
        let mut map = BTreeMap::new();
        Entries::flatten("", table, &mut map);
        let mut e = Entries(map);
        let mut c = Self::default();

        e.float("beam.wavelength_m", &mut c.wavelength)?;
        e.float("beam.waist_m", &mut c.waist)?;
        e.float("beam.power_w", &mut c.power)?;
        e.float("ribbon.width_m", &mut c.ribbon_width)?;
        e.float("ribbon.length_m", &mut c.ribbon_length)?;
        e.float("ribbon.thickness_m", &mut c.thickness)?;
        if let Some(kind) = e.text("mode.shape")? {
            c.shape = match kind.as_str() {
                "torsion" => ShapeKind::Torsion,
                "flexural" => ShapeKind::Flexural,
                other => return Err(err("mode.shape", format!("`{other}` is not torsion or flexural"))),
            };
        }
        c.shape_file = e.text("mode.shape_file")?.map(PathBuf::from);
        e.float("mode.frequency_hz", &mut c.frequency)?;
        e.float("mode.quality_factor", &mut c.quality_factor)?;
        e.float("mode.inertia_kg_m2", &mut c.inertia)?;
        e.float("mode.temperature_k", &mut c.temperature)?;
        e.float("misalign.shift_m", &mut c.shift)?;
        e.float("misalign.waist_m", &mut c.receiver_waist)?;
        e.float("misalign.rotation_deg", &mut c.rotation_deg)?;
        e.float("misalign.shift_angle_deg", &mut c.shift_angle_deg)?;
        e.float("misalign.eta_d", &mut c.eta_d)?;
        e.float("misalign.eta00_0", &mut c.eta00_0)?;
        e.float("misalign.eta10_0", &mut c.eta10_0)?;
        if let Some(kind) = e.text("misalign.numeric_shape")? {
            c.numeric_shape = match kind.as_str() {
                "ideal" => NumericShape::Ideal,
                "ribbon" => NumericShape::Ribbon,
                other => return Err(err("misalign.numeric_shape", format!("`{other}` is not ideal or ribbon"))),
            };
        }
        e.float("numerics.window_waists", &mut c.window_waists)?;
        e.count("numerics.nodes", &mut c.nodes)?;
        e.float("numerics.fit_tolerance", &mut c.fit_tolerance)?;
        e.count("numerics.max_evaluations", &mut c.max_evaluations)?;
        e.count("numerics.bootstrap", &mut c.bootstrap)?;
        e.count("numerics.seed", &mut c.seed)?;
        e.float("sweep.start_m", &mut c.sweep_start)?;
        e.float("sweep.stop_m", &mut c.sweep_stop)?;
        e.count("sweep.points", &mut c.sweep_points)?;
        e.count("scan.points", &mut c.scan_points)?;
        e.count("synth.n_avg", &mut c.n_avg)?;
        e.float("synth.gain_v2_per_rad2", &mut c.gain)?;
        e.float("synth.imprecision_rad2_per_hz", &mut c.imprecision)?;
        e.float("synth.detector_v2_per_hz", &mut c.detector)?;
        e.float("synth.span_hz", &mut c.span_hz)?;
        e.count("synth.bins", &mut c.bins)?;
        e.float("synth.ringdown_duration_s", &mut c.ringdown_duration)?;
        e.float("synth.ringdown_dt_s", &mut c.ringdown_dt)?;
        e.float("synth.ringdown_noise", &mut c.ringdown_noise)?;
        e.float("synth.knife_noise", &mut c.knife_noise)?;
        e.float("synth.coupling_noise", &mut c.coupling_noise)?;
        e.float("synth.shot_scatter", &mut c.shot_scatter)?;
        e.float("synth.responsivity_a_per_w", &mut c.responsivity)?;
        e.float("synth.transimpedance_v_per_a", &mut c.transimpedance)?;
        e.float("synth.shot_floor_v2_per_hz", &mut c.shot_floor)?;
        e.float("calibrate.core_linewidths", &mut c.core_linewidths)?;
        e.count("calibrate.core_bins", &mut c.core_bins)?;
        e.opt_float("calibrate.outer_hz", &mut c.outer_hz)?;
        e.flag("calibrate.free_linewidth", &mut c.free_linewidth)?;
        e.opt_float("coupling.shift_angle_deg", &mut c.pinned_shift_angle_deg)?;
        e.float("cool.imprecision_rad2_per_hz", &mut c.cool_imprecision)?;
        e.opt_float("cool.zero_point_rad2_per_hz", &mut c.cool_zero_point)?;
        e.float("cool.efficiency", &mut c.cool_efficiency)?;

        if let Some(key) = e.0.keys().next() {
            return Err(err(key, "unknown key"));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("beam.wavelength_m", self.wavelength),
            ("beam.waist_m", self.waist),
            ("beam.power_w", self.power),
            ("ribbon.width_m", self.ribbon_width),
            ("ribbon.length_m", self.ribbon_length),
            ("ribbon.thickness_m", self.thickness),
            ("mode.frequency_hz", self.frequency),
            ("mode.quality_factor", self.quality_factor),
            ("mode.inertia_kg_m2", self.inertia),
            ("mode.temperature_k", self.temperature),
            ("misalign.waist_m", self.receiver_waist),
            ("numerics.window_waists", self.window_waists),
            ("numerics.fit_tolerance", self.fit_tolerance),
            ("synth.gain_v2_per_rad2", self.gain),
            ("synth.span_hz", self.span_hz),
            ("synth.ringdown_duration_s", self.ringdown_duration),
            ("synth.ringdown_dt_s", self.ringdown_dt),
            ("synth.responsivity_a_per_w", self.responsivity),
            ("synth.transimpedance_v_per_a", self.transimpedance),
            ("calibrate.core_linewidths", self.core_linewidths),
            ("cool.imprecision_rad2_per_hz", self.cool_imprecision),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(err(key, format!("must be positive and finite, got {v}")));
            }
        }
        let non_negative = [
            ("misalign.shift_m", self.shift),
            ("synth.imprecision_rad2_per_hz", self.imprecision),
            ("synth.detector_v2_per_hz", self.detector),
            ("synth.ringdown_noise", self.ringdown_noise),
            ("synth.knife_noise", self.knife_noise),
            ("synth.coupling_noise", self.coupling_noise),
            ("synth.shot_scatter", self.shot_scatter),
            ("synth.shot_floor_v2_per_hz", self.shot_floor),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(err(key, format!("must be non-negative, got {v}")));
            }
        }
        for (key, v) in [
            ("misalign.eta_d", self.eta_d),
            ("misalign.eta00_0", self.eta00_0),
            ("misalign.eta10_0", self.eta10_0),
            ("cool.efficiency", self.cool_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(err(key, format!("must lie in (0, 1], got {v}")));
            }
        }
        for (key, v) in [("misalign.rotation_deg", self.rotation_deg), ("misalign.shift_angle_deg", self.shift_angle_deg)] {
            if !v.is_finite() {
                return Err(err(key, "must be finite"));
            }
        }
        if self.nodes < 9 {
            return Err(err("numerics.nodes", "need at least 9 nodes per axis"));
        }
        if self.n_avg == 0 {
            return Err(err("synth.n_avg", "must be at least 1"));
        }
        if self.bins < 16 {
            return Err(err("synth.bins", "need at least 16 bins"));
        }
        if self.scan_points < 2 {
            return Err(err("scan.points", "need at least 2 positions"));
        }
        if let Some(z) = self.cool_zero_point {
            if !(z > 0.0) {
                return Err(err("cool.zero_point_rad2_per_hz", "must be positive"));
            }
        }
        Ok(())
    }

    /// Sweep positions, checked here so bad bounds surface as config errors.
    pub fn sweep(&self) -> Result<Vec<f64>, ConfigError> {
        if !(self.sweep_start >= 0.0) || !self.sweep_start.is_finite() {
            return Err(err("sweep.start_m", "must be non-negative"));
        }
        if !(self.sweep_stop > self.sweep_start) || !self.sweep_stop.is_finite() {
            return Err(err("sweep.stop_m", "must exceed sweep.start_m"));
        }
        if self.sweep_points < 2 {
            return Err(err("sweep.points", "need at least 2 points"));
        }
        let step = (self.sweep_stop - self.sweep_start) / (self.sweep_points - 1) as f64;
        Ok((0..self.sweep_points).map(|i| self.sweep_start + step * i as f64).collect())
    }

    pub fn beam(&self) -> spade_core::Result<BeamParams<f64>> {
        BeamParams::new(self.wavelength, self.waist, self.power)
    }

    pub fn ribbon(&self) -> spade_core::Result<RibbonGeometry<f64>> {
        RibbonGeometry::new(self.ribbon_width, self.ribbon_length, self.thickness)
    }

    /// The configured modeshape, loaded from `mode.shape_file` when set.
    pub fn shape(&self) -> anyhow::Result<Flagged<ModeShape<f64>>> {
        if let Some(path) = &self.shape_file {
            let file = std::fs::File::open(path).map_err(|e| anyhow::Error::new(e).context(format!("opening {}", path.display())))?;
            let shape = load_grid_shape(std::io::BufReader::new(file)).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))?;
            return Ok(shape);
        }
        let g = self.ribbon()?;
        Ok(Flagged::clean(match self.shape {
            ShapeKind::Torsion => ModeShape::torsion(g),
            ShapeKind::Flexural => ModeShape::flexural(g),
        }))
    }

    pub fn mechanical_mode(&self, shape: ModeShape<f64>) -> spade_core::Result<MechanicalMode<f64>> {
        MechanicalMode::new(shape, self.frequency, self.quality_factor, self.inertia, self.temperature)
    }

    pub fn misalign(&self) -> spade_core::Result<MisalignConfig<f64>> {
        MisalignConfig::new(self.shift, self.receiver_waist, self.rotation_deg.to_radians(), self.shift_angle_deg.to_radians(), self.eta_d)?
            .with_channel_losses(self.eta00_0, self.eta10_0)
    }

    /// Quadrature grid centered on a mode of waist `w`.
    pub fn grid(&self, w: f64) -> spade_core::Result<GridSpec<f64>> {
        GridSpec::centered(self.window_waists * w, self.nodes)
    }

    pub fn simplex(&self) -> SimplexOptions {
        SimplexOptions { tolerance: self.fit_tolerance, max_evaluations: self.max_evaluations, ..Default::default() }
    }

    pub fn calibration(&self) -> CalibrationOptions {
        CalibrationOptions {
            core_linewidths: self.core_linewidths,
            core_bins: self.core_bins,
            outer_hz: self.outer_hz,
            free_linewidth: self.free_linewidth,
            bootstrap: self.bootstrap,
            seed: self.seed,
            simplex: self.simplex(),
            ..Default::default()
        }
    }

    pub fn coupling(&self) -> CouplingOptions {
        CouplingOptions { shift_angle: self.pinned_shift_angle_deg.map(f64::to_radians), bootstrap: self.bootstrap, seed: self.seed }
    }
}
