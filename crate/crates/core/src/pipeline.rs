//! Acquisition for the three camera architectures and reconstruction for
//! the compressive one.

use crate::error::{invalid, Error, Result};
use crate::hadamard::SensingOperator;
use crate::noise::{corrupt_measurements, sample_additive, sample_poisson_with, NoiseParams};
use crate::rng::RngStream;
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Lensless compressive imaging: one sensor, N programmed apertures.
    Lci,
    /// Pinhole aperture imaging: one sensor per pixel.
    Pai,
    /// Lens aperture imaging: pinhole layout with lens gain `g`.
    Lai,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Lci, Architecture::Pai, Architecture::Lai];

    pub fn label(self) -> &'static str {
        match self {
            Architecture::Lci => "LCI",
            Architecture::Pai => "PAI",
            Architecture::Lai => "LAI",
        }
    }

    /// Domain tag mixed into per-trial stream ids.
    pub(crate) fn stream_domain(self) -> u64 {
        match self {
            Architecture::Lci => 1,
            Architecture::Pai => 2,
            Architecture::Lai => 3,
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lci" => Ok(Self::Lci),
            "pai" => Ok(Self::Pai),
            "lai" => Ok(Self::Lai),
            other => Err(format!("unknown architecture '{other}' (expected lci, pai or lai)")),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    NoiseFree,
    Acquired,
}

/// Sensor readings of one compressive acquisition.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector {
    pub values: Vec<f64>,
    pub stage: Stage,
}

impl MeasurementVector {
    pub fn order(&self) -> usize {
        self.values.len()
    }
}

/// An image produced by one of the architectures.
#[derive(Clone, Debug, PartialEq)]
pub struct CapturedImage {
    pub values: Vec<f64>,
    pub architecture: Architecture,
    /// Scale of the signal in `values`: `g` for LAI, 1 otherwise.
    pub gain_applied: f64,
}

fn check_order(op: &SensingOperator, scene: &Scene) -> Result<()> {
    if op.order() != scene.order() {
        return Err(Error::LengthMismatch {
            expected: op.order(),
            actual: scene.order(),
        });
    }
    Ok(())
}

/// `y = A·x` with no noise.
pub fn lci_measure(op: &SensingOperator, scene: &Scene) -> Result<MeasurementVector> {
    check_order(op, scene)?;
    Ok(MeasurementVector {
        values: op.apply_sensing(scene.values())?,
        stage: Stage::NoiseFree,
    })
}

/// Noisy compressive measurements `z`.
pub fn lci_acquire(
    op: &SensingOperator,
    scene: &Scene,
    params: &NoiseParams,
    rng: &mut RngStream,
) -> Result<MeasurementVector> {
    let y = lci_measure(op, scene)?;
    Ok(MeasurementVector {
        values: corrupt_measurements(&y.values, params, rng)?,
        stage: Stage::Acquired,
    })
}

/// `x̃ = A⁻¹·z`.
pub fn lci_reconstruct(op: &SensingOperator, z: &MeasurementVector) -> Result<CapturedImage> {
    Ok(CapturedImage {
        values: op.apply_inverse(&z.values)?,
        architecture: Architecture::Lci,
        gain_applied: 1.0,
    })
}

fn direct_capture(
    scene: &Scene,
    params: &NoiseParams,
    rng: &mut RngStream,
    gain: f64,
    architecture: Architecture,
) -> Result<CapturedImage> {
    let rho = params.effective_rho();
    let usable = 1..=scene.usable_len();
    let mut values = vec![0.0; scene.order()];
    for (i, (out, &x)) in values.iter_mut().zip(scene.values()).enumerate() {
        if usable.contains(&i) {
            let shot = if params.shot_noise {
                sample_poisson_with(gain * x, rng, params.poisson_approx_threshold)? as f64
            } else {
                gain * x
            };
            *out = shot + sample_additive(rho, params.additive_kind, rng);
        } else if params.noise_on_reserved {
            *out = sample_additive(rho, params.additive_kind, rng);
        }
    }
    Ok(CapturedImage {
        values,
        architecture,
        gain_applied: gain,
    })
}

/// Pinhole capture: each usable pixel gets `Poisson(x_i) + δ_i`.
pub fn pai_capture(scene: &Scene, params: &NoiseParams, rng: &mut RngStream) -> Result<CapturedImage> {
    direct_capture(scene, params, rng, 1.0, Architecture::Pai)
}

/// Lens capture: each usable pixel gets `Poisson(g·x_i) + δ_i`.
pub fn lai_capture(scene: &Scene, params: &NoiseParams, rng: &mut RngStream) -> Result<CapturedImage> {
    if !(params.gain.is_finite() && params.gain >= 1.0) {
        return Err(invalid(format!("lens gain must be >= 1, got {}", params.gain)));
    }
    direct_capture(scene, params, rng, params.gain, Architecture::Lai)
}

/// Runs one trial of `architecture` and returns the captured image.
pub fn capture(
    architecture: Architecture,
    op: &SensingOperator,
    scene: &Scene,
    params: &NoiseParams,
    rng: &mut RngStream,
) -> Result<CapturedImage> {
    match architecture {
        Architecture::Lci => lci_reconstruct(op, &lci_acquire(op, scene, params, rng)?),
        Architecture::Pai => pai_capture(scene, params, rng),
        Architecture::Lai => lai_capture(scene, params, rng),
    }
}
