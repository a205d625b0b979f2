//! Model and synthetic noise spectra, ringdown envelopes and shot-noise
//! scaling series used to drive the calibration pipeline.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::limits::PhysicalConstants;
use crate::mech::MechanicalMode;
use crate::scalar::{c, Real};

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Physical units of a spectral density record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    VoltsSq,
    RadSq,
    MetersSq,
}

impl Units {
    pub fn tag(self) -> &'static str {
        match self {
            Units::VoltsSq => "V2/Hz",
            Units::RadSq => "rad2/Hz",
            Units::MetersSq => "m2/Hz",
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V2/Hz" => Ok(Units::VoltsSq),
            "rad2/Hz" => Ok(Units::RadSq),
            "m2/Hz" => Ok(Units::MetersSq),
            other => Err(Error::invalid("units", format!("unknown units tag `{other}`"))),
        }
    }
}

/// Power spectral density sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord<T> {
    pub freq: Vec<T>,
    pub psd: Vec<T>,
    pub units: Units,
    /// Number of averaged periodograms behind each bin.
    pub n_avg: usize,
}

impl<T: Real> SpectrumRecord<T> {
    pub fn new(freq: Vec<T>, psd: Vec<T>, units: Units, n_avg: usize) -> Result<Self> {
        if freq.len() != psd.len() {
            return Err(Error::invalid("psd", format!("{} frequencies but {} values", freq.len(), psd.len())));
        }
        if freq.is_empty() {
            return Err(Error::InsufficientData("empty spectrum".into()));
        }
        if n_avg == 0 {
            return Err(Error::invalid("n_avg", "must be at least 1"));
        }
        if freq.windows(2).any(|w| !(w[1] > w[0])) || freq.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("freq", "must be finite and strictly increasing"));
        }
        if psd.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("psd", "values must be finite and non-negative"));
        }
        Ok(Self { freq, psd, units, n_avg })
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Multiply every bin by `factor`, keeping units.
    pub fn scaled(&self, factor: T) -> Self {
        Self { psd: self.psd.iter().map(|v| *v * factor).collect(), ..self.clone() }
    }
}

/// Uniform grid `center +- half_span` with `n` points.
pub fn uniform_grid<T: Real>(center: T, half_span: T, n: usize) -> Result<Vec<T>> {
    if n < 2 || !(half_span > T::zero()) {
        return Err(Error::invalid("grid", "need n >= 2 and a positive span"));
    }
    let step = c::<T>(2.0) * half_span / T::from_usize_lossy(n - 1);
    Ok((0..n).map(|i| center - half_span + step * T::from_usize_lossy(i)).collect())
}

/// Amplitude envelope of a free decay.
#[derive(Debug, Clone, PartialEq)]
pub struct RingdownRecord<T> {
    pub time: Vec<T>,
    pub amplitude: Vec<T>,
    pub noise_floor: T,
}

impl<T: Real> RingdownRecord<T> {
    pub fn new(time: Vec<T>, amplitude: Vec<T>, noise_floor: T) -> Result<Self> {
        if time.len() != amplitude.len() {
            return Err(Error::invalid("amplitude", "length differs from time axis"));
        }
        if time.windows(2).any(|w| !(w[1] > w[0])) || time.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("time", "must be finite and strictly increasing"));
        }
        if amplitude.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("amplitude", "non-finite sample"));
        }
        if !(noise_floor >= T::zero()) {
            return Err(Error::invalid("noise_floor", "must be non-negative"));
        }
        Ok(Self { time, amplitude, noise_floor })
    }
}

/// A mechanical mode contributing to a spectrum, with the factor converting
/// its angular PSD to the readout's angle scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTerm<T> {
    pub mode: MechanicalMode<T>,
    pub conversion: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    pub modes: Vec<ModeTerm<T>>,
    /// Imprecision floor (rad^2/Hz).
    pub imprecision: T,
    /// Detector noise floor (V^2/Hz).
    pub detector: T,
    /// Transduction gain `g` (V^2/rad^2).
    pub gain: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(modes: Vec<ModeTerm<T>>, imprecision: T, detector: T, gain: T) -> Result<Self> {
        Self { modes, imprecision, detector, gain }.validated()
    }

    /// One mode with unit conversion.
    pub fn single(mode: MechanicalMode<T>, imprecision: T, detector: T, gain: T) -> Result<Self> {
        Self::new(vec![ModeTerm { mode, conversion: T::one() }], imprecision, detector, gain)
    }

    fn validated(self) -> Result<Self> {
        if !(self.gain > T::zero()) || !self.gain.is_finite() {
            return Err(Error::invalid("gain", "must be positive"));
        }
        if !(self.imprecision >= T::zero()) || !(self.detector >= T::zero()) {
            return Err(Error::invalid("floor", "noise floors must be non-negative"));
        }
        if self.modes.iter().any(|m| !(m.conversion >= T::zero())) {
            return Err(Error::invalid("conversion", "must be non-negative"));
        }
        Ok(self)
    }

    /// Expected PSD at one frequency (V^2/Hz).
    pub fn eval(&self, f: T) -> T {
        let thermal = self.modes.iter().fold(T::zero(), |acc, m| acc + m.conversion * thermal_psd(&m.mode, f));
        self.gain * (thermal + self.imprecision) + self.detector
    }
}

/// Resonant thermal angular PSD `4 k_B T Q / (I omega_m^3)` (rad^2/Hz).
pub fn thermal_peak<T: Real>(mode: &MechanicalMode<T>) -> T {
    let k_b = PhysicalConstants::<T>::codata().k_b;
    let w = mode.angular_frequency();
    c::<T>(4.0) * k_b * mode.temperature * mode.quality_factor / (mode.inertia * w * w * w)
}

/// The peak expression `4 k_B T Q / (I omega_m)` written without the
/// `omega_m^-2` factor. It carries units of 1/s rather than rad^2/Hz and is
/// kept only so reports can show the discrepancy next to [`thermal_peak`].
pub fn thermal_peak_as_written<T: Real>(mode: &MechanicalMode<T>) -> T {
    let k_b = PhysicalConstants::<T>::codata().k_b;
    c::<T>(4.0) * k_b * mode.temperature * mode.quality_factor / (mode.inertia * mode.angular_frequency())
}

/// Narrowband thermal PSD: a Lorentzian of full width `Gamma_m = omega_m / Q`.
pub fn thermal_psd<T: Real>(mode: &MechanicalMode<T>, f: T) -> T {
    let detuning = T::TAU() * f - mode.angular_frequency();
    let x = c::<T>(2.0) * detuning / mode.linewidth();
    thermal_peak(mode) / (T::one() + x * x)
}

/// Expected spectrum of `model` on `freq`.
pub fn model_psd<T: Real>(model: &NoiseModel<T>, freq: &[T]) -> Result<SpectrumRecord<T>> {
    let model = model.clone().validated()?;
    let psd = freq.iter().map(|f| model.eval(*f)).collect();
    SpectrumRecord::new(freq.to_vec(), psd, Units::VoltsSq, 1)
}

/// Averaged-periodogram realization of `model`: every bin is the model value
/// times an independent `chi^2_{2 n_avg} / (2 n_avg)` draw.
pub fn synth_periodogram<T: Real>(model: &NoiseModel<T>, freq: &[T], n_avg: usize, seed: u64) -> Result<SpectrumRecord<T>> {
    if n_avg == 0 {
        return Err(Error::invalid("n_avg", "must be at least 1"));
    }
    let expected = model_psd(model, freq)?;
    let n = n_avg as f64;
    let gamma = Gamma::new(n, 1.0 / n).map_err(|e| Error::invalid("n_avg", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psd = expected.psd.iter().map(|v| *v * c::<T>(gamma.sample(&mut rng))).collect();
    SpectrumRecord::new(expected.freq, psd, Units::VoltsSq, n_avg)
}

/// Envelope of a free decay, `|A0 exp(-t/tau) + sigma (n1 + i n2)|` with
/// `tau = 2Q/omega_m` and `sigma = floor / sqrt(2)`, so the noise has rms
/// amplitude `floor`. Sampled at `t = 0, dt, ...` up to `duration`.
pub fn synth_ringdown<T: Real>(
    mode: &MechanicalMode<T>,
    duration: T,
    dt: T,
    initial_amplitude: T,
    noise_floor: T,
    seed: u64,
) -> Result<RingdownRecord<T>> {
    if !(dt > T::zero()) || !(duration > dt) {
        return Err(Error::invalid("dt", "need 0 < dt < duration"));
    }
    if !(noise_floor >= T::zero()) {
        return Err(Error::invalid("noise_floor", "must be non-negative"));
    }
    let tau = mode.amplitude_decay_time().as_f64();
    let sigma = noise_floor.as_f64() / std::f64::consts::SQRT_2;
    let a0 = initial_amplitude.as_f64();
    let n = (duration / dt).floor().to_usize().unwrap_or(0) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut time = Vec::with_capacity(n);
    let mut amplitude = Vec::with_capacity(n);
    for i in 0..n {
        let t = dt.as_f64() * i as f64;
        let (n1, n2): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let re = a0 * (-t / tau).exp() + sigma * n1;
        let im = sigma * n2;
        time.push(c(t));
        amplitude.push(c(re.hypot(im)));
    }
    RingdownRecord::new(time, amplitude, noise_floor)
}

/// Photodetection chain for a shot-noise scaling series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseParams<T> {
    /// Photodiode responsivity (A/W).
    pub responsivity: T,
    /// Transimpedance gain (V/A).
    pub transimpedance: T,
    /// Power-independent detector floor `b` (V^2/Hz).
    pub floor: T,
    /// Fractional Gaussian scatter on each point.
    pub scatter: T,
}

impl<T: Real> ShotNoiseParams<T> {
    /// Shot-noise slope `a = 2 e R G^2` in V^2/(Hz W).
    pub fn slope(&self) -> T {
        c::<T>(2.0 * ELEMENTARY_CHARGE) * self.responsivity * self.transimpedance * self.transimpedance
    }
}

/// Voltage noise floors `S_V = (a P + b)(1 + scatter n)` at the given powers.
pub fn shot_scaling_series<T: Real>(powers: &[T], params: &ShotNoiseParams<T>, seed: u64) -> Result<Vec<(T, T)>> {
    if powers.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
        return Err(Error::invalid("power", "must be non-negative"));
    }
    if !(params.responsivity > T::zero()) || !(params.transimpedance > T::zero()) {
        return Err(Error::invalid("responsivity", "responsivity and gain must be positive"));
    }
    if !(params.floor >= T::zero()) || !(params.scatter >= T::zero()) {
        return Err(Error::invalid("floor", "floor and scatter must be non-negative"));
    }
    let a = params.slope();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(powers
        .iter()
        .map(|p| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (*p, (a * *p + params.floor) * (T::one() + params.scatter * c(n)))
        })
        .collect())
}
