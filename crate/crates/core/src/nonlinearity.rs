//! Homogeneous nonlinearities of critical degree `1 + 2/d`.
//!
//! A nonlinearity `F` with `F(λu) = λ^{1+2/d} F(u)` is determined by its
//! restriction to the unit circle, `g(θ) = F(e^{iθ})`. This module stores `g`
//! (closed form or uniform samples), extracts its Fourier coefficients, checks
//! the summability condition that makes the non-resonant remainder tractable,
//! and evaluates the resonant / non-resonant split
//!
//! ```text
//! F(u) = g_0 |u|^{1+2/d} + g_1 |u|^{2/d} u + Σ_{n≠0,1} g_n |u|^{1+2/d-n} u^n
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Zero-test tolerance for `g_0` and `Im g_1`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Minimum quadrature size for closed-form angular functions.
pub const MIN_SAMPLES: usize = 4096;

/// Coefficients below this fraction of `max |g_n|` are treated as zero when
/// fitting the tail.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Minimum number of nonzero coefficients needed for a trustworthy tail fit.
pub const MIN_TAIL_POINTS: usize = 8;

/// Named nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `μ |u|^{2/d} u`, any dimension.
    Gauge(f64),
    /// `|Re u| Re u`, d = 2.
    ReAbsRe,
    /// `|Re u|² Re u`, d = 1.
    Cos3,
    /// `u²`, d = 2.
    USquared,
    /// `|Re u| Re u − i |Im u| Im u`, d = 2.
    ReImMixed,
}

impl Preset {
    /// Dimension the preset is homogeneous of critical degree in, if fixed.
    pub fn natural_dimension(&self) -> Option<usize> {
        match self {
            Preset::Gauge(_) => None,
            Preset::Cos3 => Some(1),
            Preset::ReAbsRe | Preset::USquared | Preset::ReImMixed => Some(2),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Gauge(mu) => write!(f, "gauge{{{mu}}}"),
            Preset::ReAbsRe => f.write_str("re-abs-re"),
            Preset::Cos3 => f.write_str("cos3"),
            Preset::USquared => f.write_str("u-squared"),
            Preset::ReImMixed => f.write_str("re-im-mixed"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `gauge`, `gauge<mu>` and `gauge{<mu>}` besides the fixed names.
    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim();
        match name {
            "re-abs-re" => return Ok(Preset::ReAbsRe),
            "cos3" => return Ok(Preset::Cos3),
            "u-squared" => return Ok(Preset::USquared),
            "re-im-mixed" => return Ok(Preset::ReImMixed),
            _ => {}
        }
        let Some(rest) = name.strip_prefix("gauge") else {
            return Err(Error::UnknownPreset(name.to_string()));
        };
        let rest = match rest.strip_prefix('{') {
            Some(inner) => inner
                .strip_suffix('}')
                .ok_or_else(|| Error::UnknownPreset(name.to_string()))?,
            None => rest,
        };
        if rest.is_empty() {
            return Ok(Preset::Gauge(1.0));
        }
        let mu: f64 = rest
            .parse()
            .map_err(|_| Error::UnknownPreset(name.to_string()))?;
        if !mu.is_finite() {
            return Err(Error::UnknownPreset(name.to_string()));
        }
        Ok(Preset::Gauge(mu))
    }
}

#[derive(Clone)]
enum Form {
    Preset(Preset),
    Closed(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    Sampled(Arc<[Complex64]>),
}

/// The 2π-periodic function `g(θ) = F(e^{iθ})` together with the dimension.
#[derive(Clone)]
pub struct AngularFunction {
    dim: usize,
    form: Form,
    scale: f64,
    label: String,
}

impl fmt::Debug for AngularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("scale", &self.scale)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be 1 or 2, got {dim}")))
    }
}

impl AngularFunction {
    pub fn from_preset(preset: Preset, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if let Some(natural) = preset.natural_dimension() {
            if natural != dim {
                return Err(invalid(format!(
                    "preset `{preset}` is critical in d = {natural}, not d = {dim}"
                )));
            }
        }
        Ok(Self {
            dim,
            form: Form::Preset(preset),
            scale: 1.0,
            label: preset.to_string(),
        })
    }

    /// Looks a preset up by registry name.
    pub fn preset(name: &str, dim: usize) -> Result<Self> {
        Self::from_preset(name.parse()?, dim)
    }

    pub fn gauge(mu: f64, dim: usize) -> Result<Self> {
        Self::from_preset(Preset::Gauge(mu), dim)
    }

    /// A closed-form angular function. The evaluator must be 2π-periodic.
    pub fn closed_form<F>(dim: usize, label: impl Into<String>, g: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self {
            dim,
            form: Form::Closed(Arc::new(g)),
            scale: 1.0,
            label: label.into(),
        })
    }

    /// Uniform samples `g(2πk/M)`, `k = 0..M`; `M` must be a power of two.
    pub fn sampled(dim: usize, samples: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        let m = samples.len();
        if m < 4 || !m.is_power_of_two() {
            return Err(invalid(format!(
                "sample count must be a power of two >= 4, got {m}"
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("angular samples must be finite"));
        }
        Ok(Self {
            dim,
            form: Form::Sampled(samples.into()),
            scale: 1.0,
            label: format!("sampled[{m}]"),
        })
    }

    /// Samples read by [`parse_samples_csv`].
    pub fn from_samples_csv(dim: usize, text: &str) -> Result<Self> {
        Self::sampled(dim, parse_samples_csv(text)?)
    }

    /// `c · g`. A factor of zero yields the zero nonlinearity.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        match self.form {
            Form::Preset(p) => Some(p),
            _ => None,
        }
    }

    /// `2/d`, the power of `|u|` multiplying `u` in the resonant term.
    pub fn power(&self) -> f64 {
        2.0 / self.dim as f64
    }

    /// Number of samples when the function is given by samples.
    pub fn sample_count(&self) -> Option<usize> {
        match &self.form {
            Form::Sampled(s) => Some(s.len()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    /// True for the pure resonant preset `μ e^{iθ}`, whose pointwise flow
    /// `i u' = F(u)` is an exact phase rotation.
    pub fn gauge_coefficient(&self) -> Option<f64> {
        match self.form {
            Form::Preset(Preset::Gauge(mu)) => Some(mu * self.scale),
            _ => None,
        }
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.gauge_coefficient().is_some()
    }

    /// `g(θ)`.
    pub fn angular(&self, theta: f64) -> Complex64 {
        let raw = match &self.form {
            Form::Preset(p) => preset_angular(*p, theta),
            Form::Closed(g) => g(theta),
            Form::Sampled(s) => interpolate_periodic(s, theta),
        };
        raw * self.scale
    }

    /// `F(u) = |u|^{1+2/d} g(arg u)`, and `F(0) = 0`.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        if self.scale == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let raw = match &self.form {
            Form::Preset(p) => preset_eval(*p, self.dim, u),
            _ => {
                if u == Complex64::new(0.0, 0.0) {
                    return u;
                }
                let r = u.norm();
                let g = match &self.form {
                    Form::Closed(g) => g(u.arg()),
                    Form::Sampled(s) => interpolate_periodic(s, u.arg()),
                    Form::Preset(_) => unreachable!(),
                };
                g * r.powf(1.0 + self.power())
            }
        };
        raw * self.scale
    }
}

fn preset_angular(p: Preset, theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    match p {
        Preset::Gauge(mu) => Complex64::from_polar(mu, theta),
        Preset::ReAbsRe => Complex64::new(c.abs() * c, 0.0),
        Preset::Cos3 => Complex64::new(c * c * c, 0.0),
        Preset::USquared => Complex64::from_polar(1.0, 2.0 * theta),
        Preset::ReImMixed => Complex64::new(c.abs() * c, -(s.abs() * s)),
    }
}

fn preset_eval(p: Preset, dim: usize, u: Complex64) -> Complex64 {
    match p {
        Preset::Gauge(mu) => {
            let m = if dim == 1 { u.norm_sqr() } else { u.norm() };
            u * (mu * m)
        }
        Preset::ReAbsRe => Complex64::new(u.re.abs() * u.re, 0.0),
        Preset::Cos3 => Complex64::new(u.re * u.re * u.re, 0.0),
        Preset::USquared => u * u,
        Preset::ReImMixed => Complex64::new(u.re.abs() * u.re, -(u.im.abs() * u.im)),
    }
}

/// Periodic linear interpolation on the uniform angle grid.
fn interpolate_periodic(samples: &[Complex64], theta: f64) -> Complex64 {
    let m = samples.len();
    let pos = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * m as f64;
    let k = (pos.floor() as usize).min(m - 1);
    let frac = pos - k as f64;
    samples[k] * (1.0 - frac) + samples[(k + 1) % m] * frac
}

/// `F(u) = |u|^{1+2/d} g(arg u)`, exactly 0 at `u = 0`.
pub fn eval_f(nl: &AngularFunction, u: Complex64) -> Complex64 {
    nl.eval(u)
}

/// Reads angular samples, one `re,im` pair per line. Blank lines and `#`
/// comments are skipped, as is a leading `re,im` header.
pub fn parse_samples_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (out.is_empty() && line.replace(' ', "") == "re,im") {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        let mut cells = line.split(',').map(str::trim);
        let (Some(re), Some(im), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(bad(format!("expected `re,im`, got `{line}`")));
        };
        let parse = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("`{v}` is not a finite number")))
        };
        out.push(Complex64::new(parse(re)?, parse(im)?));
    }
    Ok(out)
}

/// Least-squares power-law fit `|g_n| ≈ C |n|^{-p}` over the last decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Fitted `p`; `None` when the window held no usable coefficients.
    pub exponent: Option<f64>,
    pub constant: f64,
    /// Nonzero coefficients that entered the fit.
    pub points: usize,
    pub window_start: usize,
    pub window_end: usize,
    /// Every coefficient in the window is below the noise floor.
    pub band_limited: bool,
}

/// Truncated Fourier coefficients `{g_n : |n| ≤ N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    order: usize,
    coefficients: Vec<Complex64>,
    pub tail: TailFit,
    /// Quadrature size used for extraction.
    pub samples: usize,
    /// `(1/2π) ∫ |g|² dθ`, from the same quadrature.
    pub mean_square: f64,
}

impl FourierSpectrum {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `g_n`, zero for `|n| > N`.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        let order = self.order as i64;
        if n.abs() > order {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(n + order) as usize]
        }
    }

    /// `(n, g_n)` for `n = −N..=N`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let order = self.order as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &g)| (i as i64 - order, g))
    }

    /// Truncated series `Σ_{|n|≤N} g_n e^{inθ}`.
    pub fn reconstruct(&self, theta: f64) -> Complex64 {
        self.iter()
            .map(|(n, g)| g * Complex64::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    /// Truncated weighted sum `Σ_{0<|n|≤N} |n|^{1+η} |g_n|`.
    pub fn weighted_partial_sum(&self, eta: f64) -> f64 {
        self.iter()
            .filter(|&(n, _)| n != 0)
            .map(|(n, g)| (n.abs() as f64).powf(1.0 + eta) * g.norm())
            .sum()
    }

    /// Spectrum export: header `n,re,im`, one row per stored coefficient.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (n, g) in self.iter() {
            out.push_str(&format!("{n},{:.17e},{:.17e}\n", g.re, g.im));
        }
        out
    }
}

/// Extracts `g_n = (1/2π) ∫ g(θ) e^{−inθ} dθ` for `|n| ≤ N` by the discrete
/// Fourier transform of uniform samples.
///
/// Closed forms are sampled at `M = max(4096, 8N)` (rounded up to a power of
/// two); sampled functions use their own `M`, which must satisfy `M ≥ 4N`.
pub fn fourier_coefficients(nl: &AngularFunction, order: usize) -> Result<FourierSpectrum> {
    if order < 1 {
        return Err(invalid("truncation order must be >= 1"));
    }
    let m = match nl.sample_count() {
        Some(m) => {
            if m < 4 * order {
                return Err(invalid(format!(
                    "truncation order {order} exceeds M/4 = {} for {m} samples",
                    m / 4
                )));
            }
            m
        }
        None => MIN_SAMPLES.max(8 * order).next_power_of_two(),
    };

    let mut buf: Vec<Complex64> = (0..m)
        .map(|k| nl.angular(2.0 * PI * k as f64 / m as f64))
        .collect();
    let mean_square = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);

    let inv = 1.0 / m as f64;
    let coefficients: Vec<Complex64> = (-(order as i64)..=order as i64)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * inv)
        .collect();

    let mut spectrum = FourierSpectrum {
        order,
        coefficients,
        tail: TailFit {
            exponent: None,
            constant: 0.0,
            points: 0,
            window_start: 0,
            window_end: 0,
            band_limited: true,
        },
        samples: m,
        mean_square,
    };
    spectrum.tail = fit_tail(&spectrum);
    Ok(spectrum)
}

fn fit_tail(spec: &FourierSpectrum) -> TailFit {
    let order = spec.order;
    let start = (order / 10).max(2);
    let peak = spec.iter().map(|(_, g)| g.norm()).fold(0.0, f64::max);
    let floor = NOISE_FLOOR * peak.max(f64::MIN_POSITIVE);

    let pts: Vec<(f64, f64)> = (start..=order)
        .filter_map(|m| {
            let a = spec.coefficient(m as i64).norm() + spec.coefficient(-(m as i64)).norm();
            (a > floor).then(|| ((m as f64).ln(), a.ln()))
        })
        .collect();

    let mut fit = TailFit {
        exponent: None,
        constant: 0.0,
        points: pts.len(),
        window_start: start,
        window_end: order,
        band_limited: pts.is_empty(),
    };
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let slope = sxy / sxx;
            fit.exponent = Some(-slope);
            fit.constant = (my - slope * mx).exp();
        }
    }
    fit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeType {
    LongRange,
    ShortRange,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub g0: Complex64,
    pub g1: Complex64,
    pub g0_is_zero: bool,
    pub g1_is_real: bool,
    pub eta_tested: f64,
    pub tol: f64,
    /// Raw `Σ_{0<|n|≤N} |n|^{1+η}|g_n|`, reported whatever the verdict.
    pub partial_sum: f64,
    /// Power-law extrapolation of the remainder; infinite when divergent.
    pub tail_estimate: f64,
    /// `partial_sum + tail_estimate`.
    pub weighted_sum: f64,
    pub converges: bool,
    pub range_type: RangeType,
    pub diagnostics: Vec<String>,
}

/// Checks `g_0 = 0`, `g_1 ∈ ℝ` and `Σ |n|^{1+η} |g_n| < ∞`, and classifies.
///
/// The tail is extrapolated from the fitted decay `|g_n| ~ C n^{-p}`: the sum
/// converges iff `1 + η − p < −1`. A spectrum with no coefficients above the
/// noise floor in the fit window is a finite trigonometric sum and converges
/// trivially. Fewer than [`MIN_TAIL_POINTS`] nonzero points make the verdict
/// inconclusive, reported as `Unsupported`.
pub fn check_assumption(spec: &FourierSpectrum, eta: f64, tol: f64) -> Result<ClassificationReport> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("eta must be positive, got {eta}")));
    }
    let g0 = spec.coefficient(0);
    let g1 = spec.coefficient(1);
    let g0_is_zero = g0.norm() <= tol;
    let g1_is_real = g1.im.abs() <= tol;
    let partial_sum = spec.weighted_partial_sum(eta);
    let mut diagnostics = Vec::new();

    let tail = &spec.tail;
    let mut inconclusive = false;
    let (converges, tail_estimate) = if tail.band_limited {
        (true, 0.0)
    } else if tail.points < MIN_TAIL_POINTS || tail.exponent.is_none() {
        inconclusive = true;
        diagnostics.push(format!(
            "inconclusive tail fit: {} nonzero coefficients in n = {}..={} (need {})",
            tail.points, tail.window_start, tail.window_end, MIN_TAIL_POINTS
        ));
        (false, f64::INFINITY)
    } else {
        let p = tail.exponent.unwrap_or(0.0);
        let q = 1.0 + eta - p;
        if q < -1.0 {
            // Sparse spectra (e.g. odd modes only) fill a fraction of the lattice.
            let density = tail.points as f64 / (tail.window_end - tail.window_start + 1) as f64;
            let n = spec.order() as f64;
            (true, density * tail.constant * n.powf(q + 1.0) / (-(q + 1.0)))
        } else {
            diagnostics.push(format!(
                "weighted sum diverges: fitted tail exponent {p:.4} gives 1 + eta - p = {q:.4} >= -1"
            ));
            (false, f64::INFINITY)
        }
    };

    if !g0_is_zero {
        diagnostics.push(format!("g0 = {g0} is not zero"));
    }
    if !g1_is_real {
        diagnostics.push(format!("g1 = {g1} is not real"));
    }

    let range_type = if inconclusive || !g0_is_zero || !converges {
        RangeType::Unsupported
    } else if g1.norm() <= tol {
        RangeType::ShortRange
    } else if g1_is_real {
        RangeType::LongRange
    } else {
        RangeType::Unsupported
    };

    Ok(ClassificationReport {
        g0,
        g1,
        g0_is_zero,
        g1_is_real,
        eta_tested: eta,
        tol,
        partial_sum,
        tail_estimate,
        weighted_sum: partial_sum + tail_estimate,
        converges,
        range_type,
        diagnostics,
    })
}

/// Resonant / non-resonant evaluator built from a truncated spectrum.
#[derive(Debug, Clone)]
pub struct Split {
    g1: Complex64,
    power: f64,
    order: usize,
    /// `g_n` for `n = 2..=N`.
    positive: Vec<Complex64>,
    /// `g_{−n}` for `n = 1..=N`.
    negative: Vec<Complex64>,
    trivial: bool,
}

impl Split {
    pub fn new(dim: usize, spec: &FourierSpectrum) -> Result<Self> {
        check_dim(dim)?;
        let order = spec.order();
        let peak = spec.iter().map(|(_, g)| g.norm()).fold(0.0, f64::max);
        // Quadrature round-off on vanishing modes is dropped so that a pure
        // resonant spectrum yields an exactly zero remainder.
        let clean = |n: i64| {
            let g = spec.coefficient(n);
            if g.norm() <= NOISE_FLOOR * peak {
                Complex64::new(0.0, 0.0)
            } else {
                g
            }
        };
        let positive: Vec<Complex64> = (2..=order as i64).map(clean).collect();
        let negative: Vec<Complex64> = (1..=order as i64).map(|n| clean(-n)).collect();
        let trivial = positive.iter().chain(&negative).all(|g| g.norm() == 0.0);
        Ok(Self {
            g1: spec.coefficient(1),
            power: 2.0 / dim as f64,
            order,
            positive,
            negative,
            trivial,
        })
    }

    pub fn g1(&self) -> Complex64 {
        self.g1
    }

    /// `g_1 |u|^{2/d} u`.
    pub fn resonant(&self, u: Complex64) -> Complex64 {
        self.g1 * u * u.norm().powf(self.power)
    }

    /// `Σ_{n≠0,1, |n|≤N} g_n |u|^{1+2/d−n} u^n`.
    pub fn nonresonant(&self, u: Complex64) -> Complex64 {
        let r = u.norm();
        if r == 0.0 || self.trivial {
            return Complex64::new(0.0, 0.0);
        }
        let z = u / r;
        let zc = z.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zp = z;
        for g in &self.positive {
            zp *= z;
            acc += g * zp;
        }
        let mut zn = Complex64::new(1.0, 0.0);
        for g in &self.negative {
            zn *= zc;
            acc += g * zn;
        }
        acc * r.powf(1.0 + self.power)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// True when no non-resonant mode survives the noise floor.
    pub fn is_purely_resonant(&self) -> bool {
        self.trivial
    }
}

/// `(g_1 |u|^{2/d} u, Σ_{n≠0,1} g_n |u|^{1+2/d−n} u^n)` from the truncated spectrum.
pub fn eval_split(nl: &AngularFunction, spec: &FourierSpectrum, u: Complex64) -> (Complex64, Complex64) {
    let split = Split::new(nl.dimension(), spec).expect("AngularFunction dimension is validated");
    (split.resonant(u), split.nonresonant(u))
}

/// `|F(u) − F(v)| / ((|u|^{2/d} + |v|^{2/d}) |u − v|)`, or `None` for `u = v`.
pub fn lipschitz_ratio(nl: &AngularFunction, u: Complex64, v: Complex64) -> Option<f64> {
    let diff = (u - v).norm();
    if diff == 0.0 {
        return None;
    }
    let p = nl.power();
    let denom = (u.norm().powf(p) + v.norm().powf(p)) * diff;
    Some((nl.eval(u) - nl.eval(v)).norm() / denom)
}

/// Empirical sup of [`lipschitz_ratio`] over `sample_count` seeded pairs.
///
/// Moduli are log-uniform in `[1e-3, 1e3]`, arguments uniform in `[0, 2π)`.
/// Coincident pairs are skipped; if every pair coincides the result is 0.
pub fn lipschitz_check(nl: &AngularFunction, sample_count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (1e-3f64.ln(), 1e3f64.ln());
    let draw = |rng: &mut ChaCha8Rng| {
        let r = rng.random_range(lo..hi).exp();
        let theta = rng.random_range(0.0..2.0 * PI);
        Complex64::from_polar(r, theta)
    };
    (0..sample_count)
        .filter_map(|_| {
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            lipschitz_ratio(nl, u, v)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn preset_names_round_trip() {
        for name in ["re-abs-re", "cos3", "u-squared", "re-im-mixed", "gauge{1.5}", "gauge{-2}"] {
            let p: Preset = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        assert_eq!("gauge".parse::<Preset>().unwrap(), Preset::Gauge(1.0));
        assert_eq!("gauge{0.25}".parse::<Preset>().unwrap(), Preset::Gauge(0.25));
        assert!("gauge{0.25".parse::<Preset>().is_err());
        assert!("gaugeNaN".parse::<Preset>().is_err());
        assert!("quartic".parse::<Preset>().is_err());
    }

    #[test]
    fn preset_dimension_is_enforced() {
        assert!(AngularFunction::preset("re-abs-re", 1).is_err());
        assert!(AngularFunction::preset("cos3", 2).is_err());
        assert!(AngularFunction::gauge(1.0, 3).is_err());
    }

    #[test]
    fn eval_at_zero_is_zero() {
        for name in ["gauge", "re-abs-re", "u-squared", "re-im-mixed"] {
            let nl = AngularFunction::preset(name, 2).unwrap();
            assert_eq!(nl.eval(c(0.0, 0.0)), c(0.0, 0.0));
        }
        let sampled = AngularFunction::sampled(1, vec![c(1.0, 0.0); 8]).unwrap();
        assert_eq!(sampled.eval(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn eval_examples() {
        let gauge = AngularFunction::gauge(1.0, 2).unwrap();
        assert_eq!(gauge.eval(c(2.0, 0.0)), c(4.0, 0.0));
        let rar = AngularFunction::preset("re-abs-re", 2).unwrap();
        assert!((rar.eval(c(1.0, 1.0)) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn preset_eval_matches_angular_definition() {
        let cases = [("gauge0.7", 1), ("gauge0.7", 2), ("re-abs-re", 2), ("cos3", 1), ("u-squared", 2), ("re-im-mixed", 2)];
        for (name, d) in cases {
            let nl = AngularFunction::preset(name, d).unwrap();
            for k in 0..50 {
                let u = Complex64::from_polar(0.3 + 0.1 * k as f64, 0.37 * k as f64 - 3.0);
                let generic = nl.angular(u.arg()) * u.norm().powf(1.0 + 2.0 / d as f64);
                assert!((nl.eval(u) - generic).norm() <= 1e-12 * generic.norm().max(1.0), "{name}");
            }
        }
    }

    #[test]
    fn sampled_input_requires_power_of_two() {
        assert!(AngularFunction::sampled(1, vec![c(0.0, 0.0); 12]).is_err());
        assert!(AngularFunction::sampled(1, vec![c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn sampled_order_limited_by_quarter_of_samples() {
        let nl = AngularFunction::sampled(2, vec![c(1.0, 0.0); 64]).unwrap();
        assert!(fourier_coefficients(&nl, 16).is_ok());
        assert!(fourier_coefficients(&nl, 17).is_err());
        assert!(fourier_coefficients(&nl, 0).is_err());
    }

    #[test]
    fn single_mode_spectrum() {
        let nl = AngularFunction::gauge(1.0, 2).unwrap();
        let spec = fourier_coefficients(&nl, 16).unwrap();
        for (n, g) in spec.iter() {
            let expect = if n == 1 { 1.0 } else { 0.0 };
            assert!((g - c(expect, 0.0)).norm() <= 1e-12, "n = {n}");
        }
        assert!(spec.tail.band_limited);
    }

    #[test]
    fn sampled_cos3_matches_closed_form() {
        let m = 256;
        let samples = (0..m)
            .map(|k| c((2.0 * PI * k as f64 / m as f64).cos().powi(3), 0.0))
            .collect();
        let nl = AngularFunction::sampled(1, samples).unwrap();
        let spec = fourier_coefficients(&nl, 64).unwrap();
        assert!((spec.coefficient(1).re - 0.375).abs() < 1e-14);
        assert!((spec.coefficient(-3).re - 0.125).abs() < 1e-14);
    }

    #[test]
    fn short_range_for_u_squared() {
        let nl = AngularFunction::preset("u-squared", 2).unwrap();
        let spec = fourier_coefficients(&nl, 64).unwrap();
        let rep = check_assumption(&spec, 0.5, DEFAULT_TOL).unwrap();
        assert!(rep.g0_is_zero);
        assert!(rep.g1.norm() < 1e-12);
        assert_eq!(rep.range_type, RangeType::ShortRange);
    }

    #[test]
    fn nonzero_mean_is_unsupported() {
        let nl = AngularFunction::closed_form(2, "abs", |t: f64| c(t.cos().abs(), 0.0)).unwrap();
        let spec = fourier_coefficients(&nl, 64).unwrap();
        let rep = check_assumption(&spec, 0.5, DEFAULT_TOL).unwrap();
        assert!(!rep.g0_is_zero);
        assert_eq!(rep.range_type, RangeType::Unsupported);
    }

    #[test]
    fn complex_g1_is_unsupported() {
        let nl = AngularFunction::closed_form(2, "complex gauge", |t: f64| Complex64::from_polar(1.0, t) * c(1.0, 1.0)).unwrap();
        let spec = fourier_coefficients(&nl, 32).unwrap();
        let rep = check_assumption(&spec, 0.5, DEFAULT_TOL).unwrap();
        assert!(!rep.g1_is_real);
        assert_eq!(rep.range_type, RangeType::Unsupported);
    }

    #[test]
    fn sparse_tail_is_inconclusive() {
        // Modes at 1, 20 and 40 only: three nonzero points in the fit window.
        let nl = AngularFunction::closed_form(2, "sparse", |t: f64| {
            Complex64::from_polar(1.0, t) + Complex64::from_polar(1e-3, 20.0 * t) + Complex64::from_polar(1e-4, 40.0 * t)
        })
        .unwrap();
        let spec = fourier_coefficients(&nl, 64).unwrap();
        let rep = check_assumption(&spec, 0.5, DEFAULT_TOL).unwrap();
        assert_eq!(rep.range_type, RangeType::Unsupported);
        assert!(rep.diagnostics.iter().any(|d| d.contains("inconclusive")));
        assert!(rep.partial_sum > 0.0);
    }

    #[test]
    fn eta_must_be_positive() {
        let nl = AngularFunction::gauge(1.0, 1).unwrap();
        let spec = fourier_coefficients(&nl, 8).unwrap();
        assert!(check_assumption(&spec, 0.0, DEFAULT_TOL).is_err());
        assert!(check_assumption(&spec, -1.0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn split_of_gauge_is_purely_resonant() {
        let nl = AngularFunction::gauge(0.8, 1).unwrap();
        let spec = fourier_coefficients(&nl, 32).unwrap();
        for k in 0..20 {
            let u = Complex64::from_polar(0.1 + k as f64, k as f64);
            let (res, non) = eval_split(&nl, &spec, u);
            assert!(non.norm() <= 1e-12 * u.norm().powi(3).max(1.0));
            assert!((res - nl.eval(u)).norm() <= 1e-12 * nl.eval(u).norm().max(1.0));
        }
        assert_eq!(eval_split(&nl, &spec, c(0.0, 0.0)), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn lipschitz_empty_max_is_zero() {
        let nl = AngularFunction::gauge(1.0, 1).unwrap();
        assert_eq!(lipschitz_check(&nl, 0, 1), 0.0);
        assert_eq!(lipschitz_ratio(&nl, c(1.0, 2.0), c(1.0, 2.0)), None);
    }

    #[test]
    fn lipschitz_check_is_deterministic() {
        let nl = AngularFunction::preset("re-abs-re", 2).unwrap();
        assert_eq!(lipschitz_check(&nl, 500, 7), lipschitz_check(&nl, 500, 7));
    }
}
