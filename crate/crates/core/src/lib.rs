//! Zone-level indoor localization from WiFi received signal strength.
//!
//! The offline phase fits a distribution to the RSS samples of every access
//! point over every non-empty set of zones, choosing among candidate families
//! with the Kolmogorov-Smirnov statistic ([`statfit`]). The online phase turns
//! each reading of a new observation into a mass function over the zone sets,
//! fuses them with Dempster's rule and reduces the result to per-zone
//! confidences with the pignistic transformation ([`belief`]).
//!
//! [`simulator`] produces synthetic fingerprint databases with known ground
//! truth, and [`par`] selects between rayon and sequential execution for the
//! data-parallel loops.

pub mod belief;
pub mod error;
pub mod fingerprints;
pub mod par;
pub mod simulator;
pub mod statfit;
pub mod zoneset;

pub use belief::{
    conjunctive_combine, dempster_normalize, localize, pignistic, ConfidenceMap, Localization,
    LocalizeOptions, MassFunction,
};
pub use error::{Error, Result};
pub use fingerprints::{FingerprintDatabase, Observation};
pub use par::Execution;
pub use simulator::{EvaluationReport, Scenario};
pub use statfit::{
    fit_observation_model, select_distribution, CellFit, Distribution, DistributionFamily,
    FitConfig, FittedDistribution, ObservationModel,
};
pub use zoneset::ZoneSet;
