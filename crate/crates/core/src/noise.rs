//! Measurement-noise samplers: Poisson shot noise and zero-mean additive
//! noise of a fixed variance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Largest Poisson mean accepted by the samplers.
pub const MAX_POISSON_MEAN: f64 = 1e12;

/// Below this mean the sampler inverts the CDF by sequential search; at or
/// above it, it uses transformed rejection.
pub const INVERSION_CUTOFF: f64 = 10.0;

/// Distribution family of the additive noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AdditiveKind {
    #[default]
    Gaussian,
    /// Uniform on `[−std·√3, +std·√3]`, which has variance `std²`.
    Uniform,
    None,
}

impl std::str::FromStr for AdditiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "none" => Ok(Self::None),
            other => Err(format!("unknown additive noise kind '{other}'")),
        }
    }
}

impl std::fmt::Display for AdditiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
            Self::None => "none",
        })
    }
}

/// Noise configuration shared by all three architectures.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParams {
    /// Additive std of each compressive measurement.
    pub sigma: f64,
    /// Additive std of each pinhole/lens pixel sensor.
    pub rho: f64,
    pub additive_kind: AdditiveKind,
    /// Lens gain, `S_lens / S_sensor`.
    pub gain: f64,
    /// When set, Poisson means above this value are sampled from a rounded
    /// normal approximation. Approximate; off by default.
    pub poisson_approx_threshold: Option<f64>,
    /// Also put additive noise on the reserved dark pixel and padding of
    /// pinhole/lens captures, and count them as sensors.
    pub noise_on_reserved: bool,
    /// When false, Poisson draws are replaced by their means.
    pub shot_noise: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            rho: 0.0,
            additive_kind: AdditiveKind::Gaussian,
            gain: 1.0,
            poisson_approx_threshold: None,
            noise_on_reserved: false,
            shot_noise: true,
        }
    }
}

impl NoiseParams {
    pub fn shot_only() -> Self {
        Self {
            additive_kind: AdditiveKind::None,
            ..Self::default()
        }
    }

    /// Every noise source off: measurements equal their means.
    pub fn noiseless() -> Self {
        Self {
            additive_kind: AdditiveKind::None,
            shot_noise: false,
            ..Self::default()
        }
    }

    pub fn with_additive(sigma: f64, rho: f64) -> Self {
        Self {
            sigma,
            rho,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(invalid(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(invalid(format!("rho must be finite and >= 0, got {}", self.rho)));
        }
        if !(self.gain.is_finite() && self.gain >= 1.0) {
            return Err(invalid(format!("lens gain must be finite and >= 1, got {}", self.gain)));
        }
        if let Some(t) = self.poisson_approx_threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!("poisson approximation threshold must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    /// Additive std actually applied to compressive measurements.
    pub fn effective_sigma(&self) -> f64 {
        match self.additive_kind {
            AdditiveKind::None => 0.0,
            _ => self.sigma,
        }
    }

    /// Additive std actually applied to pixel sensors.
    pub fn effective_rho(&self) -> f64 {
        match self.additive_kind {
            AdditiveKind::None => 0.0,
            _ => self.rho,
        }
    }
}

const LOG_FACT_TABLE: usize = 256;

fn log_fact_table() -> &'static [f64; LOG_FACT_TABLE] {
    static TABLE: OnceLock<[f64; LOG_FACT_TABLE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; LOG_FACT_TABLE];
        for k in 1..LOG_FACT_TABLE {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// `ln P(K = k)` for `K ~ Poisson(lambda)`, `lambda > 0`.
///
/// Large `k` uses Stirling's series with the `k·ln(λ/k) + k − λ` part
/// written through `ln_1p`, which keeps the result accurate to ~1e-10 even
/// for means near 1e12.
pub(crate) fn poisson_log_pmf(k: f64, lambda: f64) -> f64 {
    if k < LOG_FACT_TABLE as f64 {
        return k * lambda.ln() - lambda - log_fact_table()[k as usize];
    }
    let d = k - lambda;
    let inv = 1.0 / k;
    let inv2 = inv * inv;
    let correction = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
    d - k * (d / lambda).ln_1p() - 0.5 * (2.0 * PI * k).ln() - correction
}

fn check_mean(mean: f64) -> Result<()> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(invalid(format!("Poisson mean must be finite and >= 0, got {mean}")));
    }
    if mean > MAX_POISSON_MEAN {
        return Err(invalid(format!("Poisson mean {mean} exceeds {MAX_POISSON_MEAN:e}")));
    }
    Ok(())
}

fn poisson_inversion(mean: f64, rng: &mut RngStream) -> u64 {
    let u = rng.unit();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        if p == 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

/// Hörmann's PTRS transformed rejection; exact for `mean >= 10`.
fn poisson_ptrs(mean: f64, rng: &mut RngStream) -> u64 {
    let slam = mean.sqrt();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.unit() - 0.5;
        let v = rng.unit();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if k.is_nan() || k < 0.0 {
            continue;
        }
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if us < 0.013 && v > us {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        if lhs <= poisson_log_pmf(k, mean) {
            return k as u64;
        }
    }
}

fn poisson_normal_approx(mean: f64, rng: &mut RngStream) -> u64 {
    let z: f64 = rng.sample(StandardNormal);
    (mean + mean.sqrt() * z).round().max(0.0) as u64
}

/// Exact draw from `Poisson(mean)`.
pub fn sample_poisson(mean: f64, rng: &mut RngStream) -> Result<u64> {
    sample_poisson_with(mean, rng, None)
}

/// Draw from `Poisson(mean)`, switching to the normal approximation above
/// `approx_threshold` when one is given.
pub fn sample_poisson_with(
    mean: f64,
    rng: &mut RngStream,
    approx_threshold: Option<f64>,
) -> Result<u64> {
    check_mean(mean)?;
    Ok(poisson_unchecked(mean, rng, approx_threshold))
}

#[inline]
fn poisson_unchecked(mean: f64, rng: &mut RngStream, approx_threshold: Option<f64>) -> u64 {
    if mean == 0.0 {
        0
    } else if mean < INVERSION_CUTOFF {
        poisson_inversion(mean, rng)
    } else if approx_threshold.is_some_and(|t| mean > t) {
        poisson_normal_approx(mean, rng)
    } else {
        poisson_ptrs(mean, rng)
    }
}

/// Zero-mean draw with variance `std²`.
pub fn sample_additive(std: f64, kind: AdditiveKind, rng: &mut RngStream) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    match kind {
        AdditiveKind::None => 0.0,
        AdditiveKind::Gaussian => std * rng.sample::<f64, _>(StandardNormal),
        AdditiveKind::Uniform => std * 3f64.sqrt() * (2.0 * rng.unit() - 1.0),
    }
}

/// Acquired measurements `z = ŷ + ε` from noise-free `y`.
///
/// The first entry is the all-open measurement of the dark-pixel
/// convention and is passed through untouched; every other entry gets an
/// independent Poisson draw plus additive noise of std `sigma`.
pub fn corrupt_measurements(
    y: &[f64],
    params: &NoiseParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let Some(&first) = y.first() else {
        return Ok(Vec::new());
    };
    // Rows whose open elements all see zero can come out a few ulps below
    // zero after the transform.
    let slack = 1e-9 * first.abs();
    let sigma = params.effective_sigma();
    let mut z = Vec::with_capacity(y.len());
    z.push(first);
    for (i, &yi) in y.iter().enumerate().skip(1) {
        if !yi.is_finite() || yi < -slack {
            return Err(invalid(format!("measurement {i} has invalid mean {yi}")));
        }
        let mean = yi.max(0.0);
        check_mean(mean)?;
        let shot = if params.shot_noise {
            poisson_unchecked(mean, rng, params.poisson_approx_threshold) as f64
        } else {
            mean
        };
        z.push(shot + sample_additive(sigma, params.additive_kind, rng));
    }
    Ok(z)
}
