//! Offline statistical learning: one fitted distribution per access point
//! and non-empty zone set, selected by the Kolmogorov-Smirnov statistic.

mod family;
mod ks;
mod model;

pub use family::{estimate_params, Distribution, DistributionFamily};
pub use ks::{check_alpha, ks_critical_value, ks_statistic, KS_TABLE_MAX_N, SUPPORTED_ALPHAS};
pub use model::{
    fit_observation_model, fit_observation_model_with, select_distribution, CellFit, FitConfig,
    FittedDistribution, ObservationModel, MODEL_VERSION,
};
