//! Disorder averaging and the fits built on top of it.

pub mod ensemble;
pub mod fit;
pub mod saturation;

pub use ensemble::{
    run_ensemble, EnsembleConfig, EnsembleResult, RealizationSeries, SeriesStats, TimePolicy,
};
pub use fit::{
    critical_time, fit_decay, fit_decay_in, log_grid, normalized, power_law_fit, scaling_exponent,
    CriticalTime, DecayModel, FitOutcome, FitWindow, PowerLawFit, RegimeFit, ScalingExponent,
};
pub use saturation::{
    accessible_states, porter_thomas_sample, run_saturation, saturation_stats, Estimate, PorterThomasSample,
    SaturationStats,
};
