//! Monte Carlo SNR estimation.
//!
//! Each trial draws one capture on its own random stream, keyed by
//! `(base_seed, architecture, trial)`. Noise power at a pixel is the mean
//! squared deviation from the known truth (`x` for LCI/PAI, `g·x` for LAI).
//! Trials are reduced in ascending order, so results do not depend on how
//! they were scheduled.

use std::ops::Range;

use crate::error::{invalid, Result};
use crate::exec::{map_blocks, Execution};
use crate::hadamard::SensingOperator;
use crate::noise::NoiseParams;
use crate::pipeline::{capture, Architecture};
use crate::rng::{RngStream, StreamKey};
use crate::scene::Scene;

use super::analytic::{analytic_lai, analytic_lci, analytic_pai, to_db, AnalyticParams};

/// Stream domain for bootstrap resampling.
const BOOTSTRAP_DOMAIN: u64 = 0xB007;

/// Noise power below `(NOISE_FLOOR · signal)²` is floating-point
/// round-off from the transforms, not measurement noise.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Default number of bootstrap resamples for the standard error.
pub const DEFAULT_BOOTSTRAP: usize = 200;

/// An SNR that may be infinite because no noise was observed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SnrValue {
    Finite(f64),
    /// Positive signal with zero measured noise.
    Saturated,
}

impl SnrValue {
    pub fn from_power(signal: f64, noise_power: f64) -> Self {
        Self::from_power_with_floor(signal, noise_power, 0.0)
    }

    /// Like [`SnrValue::from_power`], treating noise power at or below
    /// `floor` as zero.
    pub fn from_power_with_floor(signal: f64, noise_power: f64, floor: f64) -> Self {
        if noise_power > floor {
            SnrValue::Finite(signal / noise_power.sqrt())
        } else if signal > 0.0 {
            SnrValue::Saturated
        } else {
            SnrValue::Finite(0.0)
        }
    }

    pub fn linear(self) -> Option<f64> {
        match self {
            SnrValue::Finite(v) => Some(v),
            SnrValue::Saturated => None,
        }
    }

    pub fn db(self) -> Option<f64> {
        self.linear().map(to_db)
    }

    pub fn is_saturated(self) -> bool {
        matches!(self, SnrValue::Saturated)
    }
}

impl std::fmt::Display for SnrValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnrValue::Finite(v) => write!(f, "{v}"),
            SnrValue::Saturated => f.write_str("saturated"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub bootstrap_resamples: usize,
    pub execution: Execution,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, base_seed: u64) -> Self {
        Self {
            trials,
            base_seed,
            bootstrap_resamples: DEFAULT_BOOTSTRAP,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Result of [`monte_carlo_snr`].
#[derive(Clone, Debug, PartialEq)]
pub struct SnrReport {
    pub architecture: Architecture,
    pub trials: usize,
    /// Total signal, `X⁰` or `g·X⁰`.
    pub signal: f64,
    /// Pixel indices that count as image/sensor pixels in the totals.
    pub accounted: Range<usize>,
    /// Sum of per-pixel noise power over the accounted pixels.
    pub total_noise_power: f64,
    pub total_snr: SnrValue,
    /// Bootstrap standard error of the linear total SNR.
    pub mc_standard_error: f64,
    /// Mean squared error per pixel (length N; zero outside `accounted`).
    pub per_pixel_noise_power: Vec<f64>,
    /// Mean signed error per pixel (length N).
    pub per_pixel_mean_error: Vec<f64>,
    /// Per-pixel SNR (length N).
    pub per_pixel_snr: Vec<SnrValue>,
    /// Matching closed-form total SNR, if the scene is not empty.
    pub analytic_total: Option<f64>,
    /// Resolution-independent lower bound (LCI only).
    pub analytic_lower_bound: Option<f64>,
}

impl SnrReport {
    pub fn total_snr_linear(&self) -> Option<f64> {
        self.total_snr.linear()
    }

    pub fn total_snr_db(&self) -> Option<f64> {
        self.total_snr.db()
    }

    /// Relative deviation of the Monte Carlo total from the closed form.
    pub fn relative_error(&self) -> Option<f64> {
        Some(self.total_snr_linear()? / self.analytic_total? - 1.0)
    }
}

struct BlockSums {
    sq: Vec<f64>,
    err: Vec<f64>,
    trial_totals: Vec<f64>,
}

fn accounted_range(architecture: Architecture, scene: &Scene, params: &NoiseParams) -> Range<usize> {
    match architecture {
        Architecture::Lci => 0..scene.order(),
        _ if params.noise_on_reserved => 0..scene.order(),
        _ => 1..scene.usable_len() + 1,
    }
}

/// Estimates per-pixel and total SNR of `architecture` over `config.trials`
/// independent trials.
pub fn monte_carlo_snr(
    architecture: Architecture,
    scene: &Scene,
    params: &NoiseParams,
    config: &MonteCarloConfig,
) -> Result<SnrReport> {
    if config.trials < 2 {
        return Err(invalid(format!("need at least 2 trials, got {}", config.trials)));
    }
    params.validate()?;
    let op = SensingOperator::new(scene.order())?;
    let gain = match architecture {
        Architecture::Lai => params.gain,
        _ => 1.0,
    };
    let truth: Vec<f64> = scene.values().iter().map(|x| gain * x).collect();
    let accounted = accounted_range(architecture, scene, params);
    let width = accounted.len();
    let domain = architecture.stream_domain();

    let blocks = map_blocks(config.execution, config.trials, |trials| -> Result<BlockSums> {
        let mut sums = BlockSums {
            sq: vec![0.0; width],
            err: vec![0.0; width],
            trial_totals: Vec::with_capacity(trials.len()),
        };
        for trial in trials {
            let mut rng = StreamKey::for_trial(config.base_seed, domain, trial as u64).stream();
            let img = capture(architecture, &op, scene, params, &mut rng)?;
            let mut total = 0.0;
            for (k, i) in accounted.clone().enumerate() {
                let d = img.values[i] - truth[i];
                sums.err[k] += d;
                sums.sq[k] += d * d;
                total += d * d;
            }
            sums.trial_totals.push(total);
        }
        Ok(sums)
    })?;

    let mut sq = vec![0.0; width];
    let mut err = vec![0.0; width];
    let mut trial_totals = Vec::with_capacity(config.trials);
    for b in blocks {
        for (acc, v) in sq.iter_mut().zip(&b.sq) {
            *acc += v;
        }
        for (acc, v) in err.iter_mut().zip(&b.err) {
            *acc += v;
        }
        trial_totals.extend(b.trial_totals);
    }

    let t = config.trials as f64;
    let signal = gain * scene.brightness();
    let total_noise_power = trial_totals.iter().sum::<f64>() / t;

    let n = scene.order();
    let mut per_pixel_noise_power = vec![0.0; n];
    let mut per_pixel_mean_error = vec![0.0; n];
    for (k, i) in accounted.clone().enumerate() {
        per_pixel_noise_power[i] = sq[k] / t;
        per_pixel_mean_error[i] = err[k] / t;
    }
    let floor = (NOISE_FLOOR * signal).powi(2);
    let per_pixel_snr = per_pixel_noise_power
        .iter()
        .zip(&truth)
        .map(|(&p, &s)| SnrValue::from_power_with_floor(s, p, floor))
        .collect();

    let (analytic_total, analytic_lower_bound) = analytic_reference(architecture, scene, params)?;

    Ok(SnrReport {
        architecture,
        trials: config.trials,
        signal,
        accounted,
        total_noise_power,
        total_snr: SnrValue::from_power_with_floor(signal, total_noise_power, floor),
        mc_standard_error: bootstrap_se(&trial_totals, signal, config),
        per_pixel_noise_power,
        per_pixel_mean_error,
        per_pixel_snr,
        analytic_total,
        analytic_lower_bound,
    })
}

fn analytic_reference(
    architecture: Architecture,
    scene: &Scene,
    params: &NoiseParams,
) -> Result<(Option<f64>, Option<f64>)> {
    if scene.brightness() <= 0.0 {
        return Ok((None, None));
    }
    let ap = AnalyticParams {
        order: scene.order(),
        x0: scene.brightness(),
        sigma: params.effective_sigma(),
        rho: params.effective_rho(),
        gain: params.gain,
    };
    Ok(match architecture {
        Architecture::Lci if scene.order() >= 4 => {
            let s = analytic_lci(&ap)?;
            (Some(s.total_exact), Some(s.total_lower_bound))
        }
        Architecture::Lci => (None, None),
        Architecture::Pai => (Some(analytic_pai(&ap)?.total), None),
        Architecture::Lai => (Some(analytic_lai(&ap)?.total), None),
    })
}

/// Standard deviation of the total SNR over bootstrap resamples of trials.
fn bootstrap_se(trial_totals: &[f64], signal: f64, config: &MonteCarloConfig) -> f64 {
    let t = trial_totals.len();
    if config.bootstrap_resamples < 2 || t == 0 {
        return 0.0;
    }
    let mut rng = RngStream::new(config.base_seed, StreamKey::for_trial(0, BOOTSTRAP_DOMAIN, 0).stream_id);
    let snrs: Vec<f64> = (0..config.bootstrap_resamples)
        .filter_map(|_| {
            let sum: f64 = (0..t)
                .map(|_| trial_totals[(rng.unit() * t as f64) as usize])
                .sum();
            SnrValue::from_power(signal, sum / t as f64).linear()
        })
        .collect();
    if snrs.len() < 2 {
        return 0.0;
    }
    let m = snrs.iter().sum::<f64>() / snrs.len() as f64;
    (snrs.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (snrs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::AdditiveKind;
    use crate::scene::{point_source_index, synth_point_source, synth_uniform_random};

    #[test]
    fn needs_two_trials() {
        let scene = synth_uniform_random(16, 100.0, 1).unwrap();
        let err = monte_carlo_snr(Architecture::Lci, &scene, &NoiseParams::default(), &MonteCarloConfig::new(1, 0));
        assert!(err.is_err());
    }

    #[test]
    fn saturated_when_noise_free() {
        assert_eq!(SnrValue::from_power(10.0, 0.0), SnrValue::Saturated);
        assert_eq!(SnrValue::from_power(0.0, 0.0), SnrValue::Finite(0.0));
        assert!(SnrValue::Saturated.db().is_none());
        let scene = synth_uniform_random(256, 1e6, 2).unwrap();
        for arch in Architecture::ALL {
            let r = monte_carlo_snr(arch, &scene, &NoiseParams::noiseless(), &MonteCarloConfig::new(4, 0)).unwrap();
            assert_eq!(r.total_snr, SnrValue::Saturated, "{arch}");
            assert!(r.total_snr_db().is_none());
        }
    }

    #[test]
    fn empty_scene_has_no_reference() {
        let scene = Scene::from_vector(vec![0.0; 16]).unwrap();
        let params = NoiseParams { additive_kind: AdditiveKind::None, ..NoiseParams::default() };
        let r = monte_carlo_snr(Architecture::Pai, &scene, &params, &MonteCarloConfig::new(4, 0)).unwrap();
        assert_eq!(r.total_noise_power, 0.0);
        assert_eq!(r.total_snr, SnrValue::Finite(0.0));
        assert_eq!(r.analytic_total, None);
    }

    #[test]
    fn lci_small_agrees_with_closed_form() {
        let scene = synth_uniform_random(64, 1e5, 3).unwrap();
        let params = NoiseParams::with_additive(20.0, 20.0);
        let r = monte_carlo_snr(Architecture::Lci, &scene, &params, &MonteCarloConfig::new(2000, 5)).unwrap();
        let rel = r.relative_error().unwrap();
        assert!(rel.abs() < 0.02, "rel {rel}");
        assert!(r.mc_standard_error > 0.0);
        assert_eq!(r.accounted, 0..64);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let scene = synth_uniform_random(128, 1e6, 4).unwrap();
        let params = NoiseParams::with_additive(5.0, 5.0);
        for arch in Architecture::ALL {
            let cfg = MonteCarloConfig::new(50, 9);
            let a = monte_carlo_snr(arch, &scene, &params, &cfg.with_execution(Execution::Sequential)).unwrap();
            let b = monte_carlo_snr(arch, &scene, &params, &cfg.with_execution(Execution::Parallel)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lai_doubling_gain_scales_total_by_sqrt_two() {
        let scene = synth_uniform_random(256, 1e5, 6).unwrap();
        let p1 = NoiseParams { gain: 2.0, ..NoiseParams::shot_only() };
        let p2 = NoiseParams { gain: 4.0, ..NoiseParams::shot_only() };
        let cfg = MonteCarloConfig::new(1000, 2);
        let a = monte_carlo_snr(Architecture::Lai, &scene, &p1, &cfg).unwrap();
        let b = monte_carlo_snr(Architecture::Lai, &scene, &p2, &cfg).unwrap();
        let ratio = b.total_snr_linear().unwrap() / a.total_snr_linear().unwrap();
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.02, "ratio {ratio}");
        assert!((a.signal - 2e5).abs() < 1e-9);
    }

    #[test]
    fn point_source_pixel_snr_grows_with_resolution() {
        // Shot noise only, fixed source and fixed total background.
        let peak = 5e4;
        let background_total = 2e4;
        let cfg = MonteCarloConfig::new(3000, 8);
        let mut snrs = Vec::new();
        for n in [128usize, 256] {
            let scene = synth_point_source(n, background_total / (n - 1) as f64, peak).unwrap();
            let r = monte_carlo_snr(Architecture::Lci, &scene, &NoiseParams::shot_only(), &cfg).unwrap();
            snrs.push(r.per_pixel_snr[point_source_index(n)].linear().unwrap());
        }
        let growth = snrs[1] / snrs[0];
        assert!((growth / 2f64.sqrt() - 1.0).abs() < 0.05, "growth {growth}");
    }
}
