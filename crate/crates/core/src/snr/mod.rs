//! Closed-form and Monte Carlo SNR, plus the per-pixel advantage maps.

pub mod analytic;
pub mod maps;
pub mod monte_carlo;

pub use analytic::{
    analytic_lai, analytic_lci, analytic_pai, lci_pixel_noise_variance, pixel_ratio,
    ratio_from_noise_balance, ratio_lci_lai, ratio_lci_pai, sensor_time_budget, to_db,
    AnalyticParams, DirectSnr, LciSnr, SensorTimeBudget, SnrRatio,
};
pub use maps::{crossing_percent, pixel_db_map, sorted_ratio_curve, CurvePoint, DbMap};
pub use monte_carlo::{monte_carlo_snr, MonteCarloConfig, SnrReport, SnrValue};
