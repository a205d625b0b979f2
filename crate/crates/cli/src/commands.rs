//! One function per verb. Each prints a `key = value` report, saves it as
//! `<verb>_report.txt` and writes its tables into the output directory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use spade_core::calibration::{
    area_scan_model, calibrate_spectrum_with, calibrated_spectrum, fit_coupling_model, fit_knife_edge, fit_ringdown_with, fit_shot_scaling,
    knife_edge_model, CouplingPoint, RingdownOptions,
};
use spade_core::io::{self, COUPLING_COLUMNS, KNIFE_COLUMNS, RINGDOWN_COLUMNS, SCAN_COLUMNS, SHOT_COLUMNS, SPECTRUM_COLUMNS, SWEEP_COLUMNS};
use spade_core::limits::{
    backaction_force, backaction_torque, cooling_limit, imprecision_angle, imprecision_displacement, phonon_budget, thermal_occupation, zero_point_psd,
};
use spade_core::misalign::{coupling_efficiency, efficiency_closed_form, efficiency_numeric, hg00_imprecision, misalignment_sweep};
use spade_core::overlap::{coupling_scan, couplings, scattered_mode};
use spade_core::spectra::{
    shot_scaling_series, synth_periodogram, synth_ringdown, thermal_peak, thermal_peak_as_written, uniform_grid, ShotNoiseParams,
};
use spade_core::{FitReport, MechanicalMode, ModeShape, NoiseModel, OpticalMode, RibbonGeometry, Warning};

use crate::config::{ExperimentConfig, NumericShape};
use crate::plot::line_plot;

/// Highest HG order listed by `overlap`.
const OVERLAP_ORDER: u32 = 3;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub plot: bool,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Write a CSV through `write`, plus an SVG rendering when plotting is on.
    fn table(&self, name: &str, columns: &[&str], write: impl FnOnce(&mut BufWriter<File>) -> spade_core::Result<()>) -> anyhow::Result<()> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        write(&mut out).with_context(|| format!("writing {}", path.display()))?;
        out.flush().with_context(|| format!("writing {}", path.display()))?;
        drop(out);
        if self.plot {
            let table = io::read_table(open(&path)?, columns).with_context(|| format!("re-reading {}", path.display()))?;
            let svg = line_plot(name, columns, &table.rows);
            let svg_path = path.with_extension("svg");
            std::fs::write(&svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
        }
        Ok(())
    }

    fn finish(&self, verb: &str, report: Report) -> anyhow::Result<()> {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        let mut entries = report.entries;
        entries.extend(report.warnings.iter().map(|w| ("warning".to_string(), w.to_string())));
        let mut stdout = std::io::stdout().lock();
        io::write_report(&mut stdout, &entries)?;
        let path = self.path(&format!("{verb}_report.txt"));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        io::write_report(BufWriter::new(file), &entries).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

#[derive(Default)]
struct Report {
    entries: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Report {
    fn num(&mut self, key: &str, v: f64) {
        self.entries.push((key.to_string(), format!("{v:.6e}")));
    }

    fn text(&mut self, key: &str, v: impl ToString) {
        self.entries.push((key.to_string(), v.to_string()));
    }

    fn warn(&mut self, context: &str, warnings: &[Warning]) {
        self.warnings.extend(warnings.iter().map(|w| format!("{context}: {w}")));
    }

    /// Every fitted parameter under `prefix.<key>`, with `_sigma` spreads.
    fn fit(&mut self, prefix: &str, report: &FitReport<f64>, keys: &[(&str, &str)]) {
        for p in &report.params {
            let key = keys.iter().find(|(n, _)| *n == p.name).map_or(p.name, |(_, k)| *k);
            self.num(&format!("{prefix}.{key}"), p.value);
            if let Some(s) = p.uncertainty {
                self.num(&format!("{prefix}.{key}_sigma"), s);
            }
        }
        self.text(&format!("{prefix}.evaluations"), report.iterations);
        self.text(&format!("{prefix}.converged"), report.converged);
        self.num(&format!("{prefix}.residual_norm"), report.residual_norm);
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn mode(cfg: &ExperimentConfig, report: &mut Report) -> anyhow::Result<MechanicalMode<f64>> {
    let shape = cfg.shape()?;
    report.warn("modeshape", &shape.warnings);
    Ok(cfg.mechanical_mode(shape.value)?)
}

/// Resonant zero-point density unless the configuration pins one.
fn zero_point(cfg: &ExperimentConfig, mode: &MechanicalMode<f64>) -> f64 {
    cfg.cool_zero_point.unwrap_or_else(|| zero_point_psd(mode).resonant)
}

pub fn limits(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let beam = cfg.beam()?;
    let mode = mode(cfg, &mut r)?;
    r.num("theta_d_rad", beam.diffraction_angle());
    r.num("photon_flux_per_s", beam.photon_flux());
    r.num("wavenumber_per_m", beam.wavenumber());
    r.num("imprecision_ql_rad2_per_hz", imprecision_angle(&beam));
    r.num("backaction_torque_n2m2_per_hz", backaction_torque(&beam));
    r.num("imprecision_backaction_over_hbar2", imprecision_angle(&beam) * backaction_torque(&beam) / spade_core::PhysicalConstants::<f64>::codata().hbar.powi(2));
    let zp = zero_point_psd(&mode);
    r.num("zero_point_as_written_rad2_per_hz", zp.as_written);
    r.num("zero_point_resonant_rad2_per_hz", zp.resonant);
    r.num("thermal_occupation", thermal_occupation(&mode));
    r.num("thermal_peak_rad2_per_hz", thermal_peak(&mode));
    r.num("thermal_peak_as_written_note", thermal_peak_as_written(&mode));
    let s_zp = zero_point(cfg, &mode);
    let budget = phonon_budget(cfg.cool_imprecision, s_zp, cfg.cool_efficiency, &mode)?;
    r.num("budget.imprecision_rad2_per_hz", cfg.cool_imprecision);
    r.num("budget.zero_point_rad2_per_hz", s_zp);
    r.num("budget.efficiency", cfg.cool_efficiency);
    r.num("budget.n_imp", budget.n_imp);
    r.num("budget.n_ba", budget.n_ba);
    ctx.finish("limits", r)
}

pub fn misalign(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let shifts = cfg.sweep()?;
    let mut r = Report::default();
    let beam = cfg.beam()?;
    let mis = cfg.misalign()?;
    let (shape, width) = match cfg.numeric_shape {
        NumericShape::Ideal => {
            let size = 100.0 * beam.waist;
            (ModeShape::torsion(RibbonGeometry::new(size, size, cfg.thickness)?), size)
        }
        NumericShape::Ribbon => {
            let shape = cfg.shape()?;
            r.warn("modeshape", &shape.warnings);
            (shape.value, cfg.ribbon_width)
        }
    };
    let grid = cfg.grid(beam.waist)?;
    let rows = misalignment_sweep(&mis, &beam, &shape, width, &grid, &shifts)?;
    ctx.table("misalign.csv", &SWEEP_COLUMNS, |out| io::write_sweep(&rows, out))?;

    let closed = efficiency_closed_form(&mis, &beam)?;
    r.warn("closed form", &closed.warnings);
    let numeric = efficiency_numeric(&mis, &beam, &shape, &grid)?;
    r.warn("numeric", &numeric.warnings);
    let s00 = hg00_imprecision(&mis, &beam, &shape, width, &grid)?;
    r.warn("hg00 port", &s00.warnings);
    r.num("shift_m", mis.shift);
    r.num("eta_closed", closed.value.efficiency);
    r.num("imprecision_closed_rad2_per_hz", closed.value.imprecision);
    r.num("eta_numeric", numeric.value.efficiency);
    r.num("imprecision_numeric_rad2_per_hz", numeric.value.imprecision);
    r.num("imprecision_hg00_rad2_per_hz", s00.value);
    let worst = rows
        .iter()
        .filter(|row| row.eta_closed > 0.0)
        .map(|row| (row.eta_numeric / row.eta_closed - 1.0).abs())
        .fold(0.0, f64::max);
    r.num("sweep.max_relative_difference", worst);
    r.text("sweep.points", rows.len());
    ctx.finish("misalign", r)
}

pub fn overlap(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let beam = cfg.beam()?;
    let shape = cfg.shape()?;
    r.warn("modeshape", &shape.warnings);
    let shape = shape.value;
    let grid = cfg.grid(beam.waist)?;
    let u00 = OpticalMode::hg00(beam.waist)?;

    let mut rows = Vec::new();
    for order in 0..=OVERLAP_ORDER {
        for m in (0..=order).rev() {
            let target = OpticalMode::new(m, order - m, beam.waist)?;
            let c = couplings(&u00, &target, &shape, &grid);
            r.warn(&format!("HG{m}{}", order - m), &c.warnings);
            rows.push(vec![m as f64, (order - m) as f64, c.value.beta_perp, c.value.convergence]);
        }
    }
    ctx.table("overlap.csv", &["m", "n", "beta", "convergence"], |out| {
        io::write_table(out, &[("waist_m", io::fmt_float(beam.waist))], &["m", "n", "beta", "convergence"], rows)
    })?;

    let sm = scattered_mode(&u00, &shape, &grid)?;
    r.warn("scattered mode", &sm.warnings);
    let u10 = OpticalMode::new(1, 0, beam.waist)?;
    let c = couplings(&u00, &u10, &shape, &grid).value;
    let sm = sm.value;
    r.num("beta_parallel", sm.beta_parallel);
    r.num("beta_perp", sm.beta_perp);
    r.num("beta_sq", c.beta_sq);
    r.num("beta10", c.beta_perp);
    r.num("power_outside_hg10", c.residual_power());
    r.num("convergence", c.convergence);
    match imprecision_displacement(beam.photon_flux(), beam.wavenumber(), sm.beta_perp) {
        Ok(s) => r.num("imprecision_ql_m2_per_hz", s),
        Err(e) => r.warnings.push(format!("imprecision: {e}")),
    }
    r.num("backaction_force_n2_per_hz", backaction_force(beam.photon_flux(), beam.wavenumber(), c.beta_sq));
    ctx.finish("overlap", r)
}

pub fn scan(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let beam = cfg.beam()?;
    let shape = cfg.shape()?;
    r.warn("modeshape", &shape.warnings);
    let n = cfg.scan_points;
    let length = cfg.ribbon_length;
    let positions: Vec<f64> = (0..n).map(|i| -length / 2.0 + length * i as f64 / (n - 1) as f64).collect();
    let u = OpticalMode::hg00(beam.waist)?;
    let rows = coupling_scan(&u, &shape.value, &positions, &cfg.grid(beam.waist)?)?;
    r.warn("scan", &rows.warnings);
    let rows = rows.value;
    ctx.table("scan.csv", &SCAN_COLUMNS, |out| io::write_scan(&rows, out))?;

    let rotation = cfg.rotation_deg.to_radians();
    let area = area_scan_model(rotation, &rows);
    let area_cols = ["y0_m", "area_normalized"];
    ctx.table("area.csv", &area_cols, |out| io::write_table(out, &[("rotation_rad", io::fmt_float(rotation))], &area_cols, area.iter().map(|a| vec![a.y0, a.area])))?;

    let peak = rows.iter().max_by(|a, b| a.beta10.abs().total_cmp(&b.beta10.abs()));
    if let Some(p) = peak {
        r.num("peak_y0_m", p.y0);
        r.num("peak_beta10", p.beta10);
    }
    r.text("points", rows.len());
    ctx.finish("scan", r)
}

pub fn synth(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let seed = cfg.seed;
    let beam = cfg.beam()?;
    let mode = mode(cfg, &mut r)?;

    let freq = uniform_grid(cfg.frequency, cfg.span_hz, cfg.bins)?;
    let model = NoiseModel::single(mode.clone(), cfg.imprecision, cfg.detector, cfg.gain)?;
    let raw = synth_periodogram(&model, &freq, cfg.n_avg, seed)?;
    ctx.table("spectrum.csv", &SPECTRUM_COLUMNS, |out| io::write_spectrum(&raw, out))?;
    let det_model = NoiseModel::new(vec![], 0.0, cfg.detector, 1.0)?;
    let detector = synth_periodogram(&det_model, &freq, cfg.n_avg, seed.wrapping_add(1 << 32))?;
    ctx.table("detector.csv", &SPECTRUM_COLUMNS, |out| io::write_spectrum(&detector, out))?;

    let ring = synth_ringdown(&mode, cfg.ringdown_duration, cfg.ringdown_dt, 1.0, cfg.ringdown_noise, seed.wrapping_add(2))?;
    ctx.table("ringdown.csv", &RINGDOWN_COLUMNS, |out| io::write_ringdown(&ring, out))?;

    let mut rng = Noise::new(seed.wrapping_add(3));
    let profile: Vec<(f64, f64)> = (0..=80)
        .map(|i| {
            let x = beam.waist * (-4.0 + 0.1 * i as f64);
            (x, knife_edge_model(x, 0.0, beam.waist, beam.power, 0.0, 1.0) * (1.0 + cfg.knife_noise * rng.normal()))
        })
        .collect();
    ctx.table("knife.csv", &KNIFE_COLUMNS, |out| io::write_pairs(&profile, &KNIFE_COLUMNS, out))?;

    let params = ShotNoiseParams { responsivity: cfg.responsivity, transimpedance: cfg.transimpedance, floor: cfg.shot_floor, scatter: cfg.shot_scatter };
    let powers: Vec<f64> = (1..=10).map(|i| beam.power * i as f64 / 10.0).collect();
    let shot = shot_scaling_series(&powers, &params, seed.wrapping_add(4))?;
    ctx.table("shot.csv", &SHOT_COLUMNS, |out| io::write_pairs(&shot, &SHOT_COLUMNS, out))?;

    let truth = cfg.misalign()?;
    let mut rng = Noise::new(seed.wrapping_add(5));
    let coupling: Vec<CouplingPoint<f64>> = (0..25)
        .map(|i| {
            let x = truth.waist * 0.1 * i as f64;
            let (a, b) = coupling_efficiency(&truth, x);
            CouplingPoint { x, eta00: a * (1.0 + cfg.coupling_noise * rng.normal()), eta10: b * (1.0 + cfg.coupling_noise * rng.normal()) }
        })
        .collect();
    ctx.table("coupling.csv", &COUPLING_COLUMNS, |out| io::write_coupling(&coupling, out))?;

    r.text("seed", seed);
    r.num("gain_v2_per_rad2", cfg.gain);
    r.num("imprecision_rad2_per_hz", cfg.imprecision);
    r.num("detector_v2_per_hz", cfg.detector);
    r.num("thermal_peak_rad2_per_hz", thermal_peak(&mode));
    r.text("n_avg", cfg.n_avg);
    r.text("bins", cfg.bins);
    r.num("shot_slope_v2_per_hz_w", params.slope());
    ctx.finish("synth", r)
}

/// Seeded standard-normal source shared by the hand-built synthetic tables.
struct Noise(rand_chacha::ChaCha8Rng);

impl Noise {
    fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        Self(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    fn normal(&mut self) -> f64 {
        use rand::distributions::Distribution;
        rand_distr::StandardNormal.sample(&mut self.0)
    }
}

pub fn calibrate(ctx: &Context, spectrum: &Path, detector: &Path, shot: Option<&Path>, coupling: Option<&Path>) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let raw = io::read_spectrum::<f64, _>(open(spectrum)?).with_context(|| format!("in {}", spectrum.display()))?;
    let det = io::read_spectrum::<f64, _>(open(detector)?).with_context(|| format!("in {}", detector.display()))?;
    let beam = cfg.beam()?;
    let mode = mode(cfg, &mut r)?;
    let fit = calibrate_spectrum_with(&raw, &det, &mode, &beam, &cfg.calibration())?;
    r.warn("calibration", &fit.warnings);
    let res = fit.value;
    let sigma = |name: &str| res.uncertainty(name).unwrap_or(f64::NAN);
    r.num("gain_v2_per_rad2", res.gain);
    r.num("gain_sigma", sigma("gain"));
    r.num("center_frequency_hz", res.center_frequency);
    r.num("linewidth_hz", res.linewidth);
    r.num("thermal_peak_rad2_per_hz", res.thermal_peak);
    r.num("floor_rad2_per_hz", res.floor);
    r.num("detector_floor_v2_per_hz", res.detector_floor);
    r.num("imprecision_rad2_per_hz", res.imprecision);
    r.num("imprecision_sigma", sigma("imprecision"));
    r.num("efficiency", res.efficiency);
    r.num("efficiency_sigma", sigma("efficiency"));
    r.text("evaluations", res.report.iterations);
    r.num("residual_norm", res.residual_norm);
    let calibrated = calibrated_spectrum(&raw, &res)?;
    ctx.table("calibrated.csv", &io::CALIBRATED_COLUMNS, |out| io::write_spectrum(&calibrated, out))?;

    if let Some(path) = shot {
        let series = io::read_pairs::<f64, _>(open(path)?, &SHOT_COLUMNS).with_context(|| format!("in {}", path.display()))?;
        let sf = fit_shot_scaling(&series)?;
        r.fit("shot", &sf.report, &[("slope", "slope_v2_per_hz_w"), ("intercept", "intercept_v2_per_hz")]);
        r.num("shot.ssr_linear", sf.ssr_linear);
        r.num("shot.ssr_quadratic", sf.ssr_quadratic);
        r.text("shot.shot_consistent", sf.shot_consistent);
        if !sf.shot_consistent {
            r.warnings.push("shot: series is not distinguishably linear in power".into());
        }
    }
    if let Some(path) = coupling {
        let data = io::read_coupling::<f64, _>(open(path)?).with_context(|| format!("in {}", path.display()))?;
        let cf = fit_coupling_model(&data, &cfg.coupling())?;
        r.warn("coupling", &cf.warnings);
        r.fit("coupling", &cf.value, &[("waist", "waist_m"), ("shift_angle", "shift_angle_rad")]);
    }
    ctx.finish("calibrate", r)
}

pub fn knife(ctx: &Context, input: &Path) -> anyhow::Result<()> {
    let mut r = Report::default();
    let profile = io::read_pairs::<f64, _>(open(input)?, &KNIFE_COLUMNS).with_context(|| format!("in {}", input.display()))?;
    let fit = fit_knife_edge(&profile)?;
    r.warn("knife", &fit.warnings);
    r.fit("knife", &fit.value, &[("w0", "w0_m"), ("x0", "x0_m"), ("amplitude", "amplitude_w"), ("baseline", "baseline_w")]);
    ctx.finish("knife", r)
}

pub fn ringdown(ctx: &Context, input: &Path) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let rec = io::read_ringdown::<f64, _>(open(input)?).with_context(|| format!("in {}", input.display()))?;
    let opts = RingdownOptions { bootstrap: cfg.bootstrap, seed: cfg.seed, ..Default::default() };
    let fit = fit_ringdown_with(&rec, cfg.frequency, &opts)?;
    r.warn("ringdown", &fit.warnings);
    r.fit("ringdown", &fit.value, &[("tau", "tau_s")]);
    ctx.finish("ringdown", r)
}

pub fn cool(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.cfg;
    let mut r = Report::default();
    let mode = mode(cfg, &mut r)?;
    let s_zp = zero_point(cfg, &mode);
    let budget = phonon_budget(cfg.cool_imprecision, s_zp, cfg.cool_efficiency, &mode)?;
    let limit = cooling_limit(&budget, cfg.cool_efficiency);
    r.num("imprecision_rad2_per_hz", cfg.cool_imprecision);
    r.num("zero_point_rad2_per_hz", s_zp);
    r.num("efficiency", cfg.cool_efficiency);
    r.num("n_imp", budget.n_imp);
    r.num("n_ba", budget.n_ba);
    r.num("n_th", budget.n_th);
    r.num("n_m", limit.occupation);
    r.num("n_m_backaction_bound", limit.efficiency_bound);
    ctx.finish("cool", r)
}
