//! Measurement-noise SNR of lensless compressive imaging (LCI) compared
//! with pinhole (PAI) and lens (LAI) aperture imaging.
//!
//! Scenes are acquired through the modified Hadamard sensing matrix under
//! Poisson shot noise and additive noise, reconstructed with the exact
//! inverse, and the Monte Carlo SNR is checked against the closed forms.
//!
//! Monte Carlo trials run on rayon when the `parallel` feature (default)
//! is enabled; [`Execution::Sequential`] forces a single thread. Both give
//! bit-identical results.

pub mod error;
pub mod exec;
pub mod hadamard;
pub mod noise;
pub mod pgm;
pub mod pipeline;
pub mod rng;
pub mod scene;
pub mod snr;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hadamard::{fwht, fwht_in_place, sylvester_hadamard, SensingOperator};
pub use noise::{AdditiveKind, NoiseParams};
pub use pipeline::{Architecture, CapturedImage, MeasurementVector};
pub use rng::{RngStream, StreamKey};
pub use scene::Scene;
pub use snr::{monte_carlo_snr, MonteCarloConfig, SnrReport, SnrValue};
