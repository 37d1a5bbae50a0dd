//! Closed-form measurement-noise SNR for the three architectures.
//!
//! All SNRs are amplitude ratios (signal over noise standard deviation).

use crate::error::{invalid, Result};

/// Inputs of the closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticParams {
    /// Number of pixels N.
    pub order: usize,
    /// Scene brightness X⁰.
    pub x0: f64,
    pub sigma: f64,
    pub rho: f64,
    pub gain: f64,
}

impl AnalyticParams {
    pub fn new(order: usize, x0: f64, sigma: f64, rho: f64) -> Result<Self> {
        let p = Self {
            order,
            x0,
            sigma,
            rho,
            gain: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        self.gain = gain;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || !self.order.is_power_of_two() {
            return Err(invalid(format!("N must be a power of two >= 2, got {}", self.order)));
        }
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return Err(invalid(format!("X0 must be finite and > 0, got {}", self.x0)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0 && self.rho.is_finite() && self.rho >= 0.0) {
            return Err(invalid("sigma and rho must be finite and >= 0"));
        }
        if !(self.gain.is_finite() && self.gain >= 1.0) {
            return Err(invalid(format!("lens gain must be >= 1, got {}", self.gain)));
        }
        Ok(())
    }

    fn n(&self) -> f64 {
        self.order as f64
    }
}

/// Amplitude ratio in decibels, `20·log₁₀`.
pub fn to_db(linear: f64) -> f64 {
    20.0 * linear.log10()
}

/// Compressive-imaging SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LciSnr {
    params: AnalyticParams,
    /// Exact total SNR at this N.
    pub total_exact: f64,
    /// N-independent lower bound `X⁰/√(2X⁰ + 4σ²)`.
    pub total_lower_bound: f64,
}

impl LciSnr {
    /// Per-pixel noise variance, identical for every pixel:
    /// `(2N−4)/N²·X⁰ + 4(N−1)/N²·σ²`.
    pub fn pixel_noise_variance(&self) -> f64 {
        lci_pixel_noise_variance(self.params.order, self.params.x0, self.params.sigma)
    }

    /// Exact pixel SNR for a pixel of intensity `x_i`.
    pub fn pixel_snr(&self, x_i: f64) -> f64 {
        x_i / self.pixel_noise_variance().sqrt()
    }

    /// Lower bound on the pixel SNR.
    pub fn pixel_snr_lower_bound(&self, x_i: f64) -> f64 {
        let p = &self.params;
        p.n().sqrt() * x_i / (2.0 * p.x0 + 4.0 * p.sigma * p.sigma).sqrt()
    }
}

/// `(2N−4)/N²·X⁰ + 4(N−1)/N²·σ²`.
pub fn lci_pixel_noise_variance(order: usize, x0: f64, sigma: f64) -> f64 {
    let n = order as f64;
    (2.0 * n - 4.0) / (n * n) * x0 + 4.0 * (n - 1.0) / (n * n) * sigma * sigma
}

pub fn analytic_lci(params: &AnalyticParams) -> Result<LciSnr> {
    params.validate()?;
    if params.order < 4 {
        return Err(invalid("the compressive SNR forms need N >= 4"));
    }
    let n = params.n();
    let (x0, s2) = (params.x0, params.sigma * params.sigma);
    Ok(LciSnr {
        params: *params,
        total_exact: x0 / ((2.0 - 4.0 / n) * x0 + (4.0 - 4.0 / n) * s2).sqrt(),
        total_lower_bound: x0 / (2.0 * x0 + 4.0 * s2).sqrt(),
    })
}

/// Pinhole or lens SNR. The lens case is the pinhole case at brightness
/// `g·X⁰`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectSnr {
    gain: f64,
    rho: f64,
    pub total: f64,
}

impl DirectSnr {
    /// `g·x_i / √(g·x_i + ρ²)`; zero for a zero pixel.
    pub fn pixel_snr(&self, x_i: f64) -> f64 {
        let s = self.gain * x_i;
        if s == 0.0 {
            return 0.0;
        }
        s / (s + self.rho * self.rho).sqrt()
    }
}

fn direct(params: &AnalyticParams, gain: f64) -> DirectSnr {
    let s = gain * params.x0;
    DirectSnr {
        gain,
        rho: params.rho,
        total: s / (s + params.n() * params.rho * params.rho).sqrt(),
    }
}

pub fn analytic_pai(params: &AnalyticParams) -> Result<DirectSnr> {
    params.validate()?;
    Ok(direct(params, 1.0))
}

pub fn analytic_lai(params: &AnalyticParams) -> Result<DirectSnr> {
    params.validate()?;
    Ok(direct(params, params.gain))
}

/// Ratio of compressive SNR to a direct architecture's SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrRatio {
    /// Lower bound computed from the exact terms.
    pub exact_bound: f64,
    /// Same with the `2σ²/X⁰` term dropped.
    pub approx: f64,
}

/// `√(X⁰+Nρ²)/√(2X⁰+4σ²)` and `(1/√2)·√(1+Nρ²/X⁰)`.
pub fn ratio_lci_pai(params: &AnalyticParams) -> Result<SnrRatio> {
    params.validate()?;
    ratio(params, 1.0)
}

/// `√(gX⁰+Nρ²)/(g·√(2X⁰+4σ²))` and `(1/√(2g))·√(1+Nρ²/(gX⁰))`.
pub fn ratio_lci_lai(params: &AnalyticParams) -> Result<SnrRatio> {
    params.validate()?;
    ratio(params, params.gain)
}

fn ratio(p: &AnalyticParams, g: f64) -> Result<SnrRatio> {
    let additive = p.n() * p.rho * p.rho;
    Ok(SnrRatio {
        exact_bound: (g * p.x0 + additive).sqrt() / (g * (2.0 * p.x0 + 4.0 * p.sigma * p.sigma).sqrt()),
        approx: (1.0 + additive / (g * p.x0)).sqrt() / (2.0 * g).sqrt(),
    })
}

/// Approximate LCI/PAI ratio as a function of the ratio of total additive
/// to total shot noise in the pinhole image, `√N·ρ/√X⁰`.
pub fn ratio_from_noise_balance(balance: f64) -> f64 {
    (1.0 + balance * balance).sqrt() / 2f64.sqrt()
}

/// Pixel SNR advantage of LCI over PAI with no additive noise:
/// `√(x_i / (2X⁰/N))`.
pub fn pixel_ratio(x_i: f64, x0: f64, order: usize) -> Result<f64> {
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(invalid(format!("X0 must be > 0, got {x0}")));
    }
    if !(x_i.is_finite() && x_i >= 0.0) {
        return Err(invalid(format!("pixel value must be >= 0, got {x_i}")));
    }
    if order == 0 {
        return Err(invalid("N must be positive"));
    }
    Ok((x_i / (2.0 * x0 / order as f64)).sqrt())
}

/// Sensors × exposure time for each architecture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorTimeBudget {
    /// (sensors, exposure time) for compressive imaging.
    pub lci: (usize, f64),
    /// (sensors, exposure time) for pinhole and lens imaging.
    pub pai: (usize, f64),
}

impl SensorTimeBudget {
    pub fn lci_product(&self) -> f64 {
        self.lci.0 as f64 * self.lci.1
    }

    pub fn pai_product(&self) -> f64 {
        self.pai.0 as f64 * self.pai.1
    }
}

pub fn sensor_time_budget(order: usize, delta_t: f64) -> Result<SensorTimeBudget> {
    if order == 0 {
        return Err(invalid("N must be >= 1"));
    }
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return Err(invalid(format!("exposure interval must be > 0, got {delta_t}")));
    }
    Ok(SensorTimeBudget {
        lci: (1, order as f64 * delta_t),
        pai: (order, delta_t),
    })
}
