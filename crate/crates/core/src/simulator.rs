//! Synthetic fingerprint databases and observations with known ground truth.
//!
//! Every (zone, AP) pair has a true Normal RSS distribution. Random streams
//! come from ChaCha8 seeded through `seed_from_u64`, so runs are reproducible
//! across platforms.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::belief::{localize_traced, LocalizeOptions};
use crate::error::{Error, Result};
use crate::fingerprints::{FingerprintDatabase, Observation};
use crate::par::{self, Execution};
use crate::statfit::ObservationModel;
use crate::zoneset::MAX_ZONES;

/// True RSS distribution of one (zone, AP) pair; indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub zone: usize,
    pub ap: usize,
    pub mean_dbm: f64,
    pub stdev_dbm: f64,
}

/// A synthetic environment. Zone `k` is named `Z{k+1}` and AP `n` is named
/// `AP{n+1}` in generated files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n_zones: usize,
    pub n_aps: usize,
    pub cells: Vec<CellSpec>,
    pub samples_per_cell: usize,
    pub seed: u64,
}

impl Scenario {
    /// Scenario whose `(zone, ap)` mean is `mean(zone, ap)` with a common
    /// standard deviation.
    pub fn from_fn(
        n_zones: usize,
        n_aps: usize,
        stdev_dbm: f64,
        samples_per_cell: usize,
        seed: u64,
        mean: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let cells = (0..n_zones)
            .flat_map(|zone| (0..n_aps).map(move |ap| (zone, ap)))
            .map(|(zone, ap)| CellSpec {
                zone,
                ap,
                mean_dbm: mean(zone, ap),
                stdev_dbm,
            })
            .collect();
        Scenario {
            n_zones,
            n_aps,
            cells,
            samples_per_cell,
            seed,
        }
    }

    /// Zone means stepped by `separation_dbm` from -40 dBm, rotated per AP so
    /// that every AP separates every pair of zones by at least the step.
    pub fn separable(
        n_zones: usize,
        n_aps: usize,
        separation_dbm: f64,
        stdev_dbm: f64,
        samples_per_cell: usize,
        seed: u64,
    ) -> Self {
        Self::from_fn(n_zones, n_aps, stdev_dbm, samples_per_cell, seed, |z, a| {
            -40.0 - separation_dbm * ((z + a) % n_zones) as f64
        })
    }

    /// Every zone shares the same distribution per AP.
    pub fn indistinguishable(
        n_zones: usize,
        n_aps: usize,
        stdev_dbm: f64,
        samples_per_cell: usize,
        seed: u64,
    ) -> Self {
        Self::from_fn(n_zones, n_aps, stdev_dbm, samples_per_cell, seed, |_, a| {
            -55.0 - 5.0 * a as f64
        })
    }

    pub fn zone_id(k: usize) -> String {
        format!("Z{}", k + 1)
    }

    pub fn ap_id(n: usize) -> String {
        format!("AP{}", n + 1)
    }

    pub fn zone_ids(&self) -> Vec<String> {
        (0..self.n_zones).map(Self::zone_id).collect()
    }

    pub fn ap_ids(&self) -> Vec<String> {
        (0..self.n_aps).map(Self::ap_id).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_ZONES).contains(&self.n_zones) {
            return Err(Error::Validation(format!(
                "n_zones {} outside [2, {MAX_ZONES}]",
                self.n_zones
            )));
        }
        if self.n_aps == 0 {
            return Err(Error::Validation("n_aps must be at least 1".into()));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::Validation(
                "samples_per_cell must be at least 1".into(),
            ));
        }
        let mut seen = vec![false; self.n_zones * self.n_aps];
        for c in &self.cells {
            if c.zone >= self.n_zones || c.ap >= self.n_aps {
                return Err(Error::Validation(format!(
                    "cell (zone {}, ap {}) out of range",
                    c.zone, c.ap
                )));
            }
            if !c.mean_dbm.is_finite() {
                return Err(Error::Validation(format!(
                    "cell (zone {}, ap {}): mean must be finite",
                    c.zone, c.ap
                )));
            }
            if !(c.stdev_dbm.is_finite() && c.stdev_dbm > 0.0) {
                return Err(Error::Validation(format!(
                    "cell (zone {}, ap {}): stdev must be positive, got {}",
                    c.zone, c.ap, c.stdev_dbm
                )));
            }
            let slot = &mut seen[c.zone * self.n_aps + c.ap];
            if *slot {
                return Err(Error::Validation(format!(
                    "cell (zone {}, ap {}) listed twice",
                    c.zone, c.ap
                )));
            }
            *slot = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!(
                "missing cell (zone {}, ap {})",
                i / self.n_aps,
                i % self.n_aps
            )));
        }
        Ok(())
    }

    /// True distribution of a (zone, AP) pair; assumes a validated scenario.
    pub fn truth(&self, zone: usize, ap: usize) -> (f64, f64) {
        let c = self
            .cells
            .iter()
            .find(|c| c.zone == zone && c.ap == ap)
            .expect("validated scenario covers every cell");
        (c.mean_dbm, c.stdev_dbm)
    }

    fn truth_table(&self) -> Vec<Normal<f64>> {
        let mut table = vec![Normal::new(0.0, 1.0).unwrap(); self.n_zones * self.n_aps];
        for c in &self.cells {
            table[c.zone * self.n_aps + c.ap] = Normal::new(c.mean_dbm, c.stdev_dbm).unwrap();
        }
        table
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Draws `samples_per_cell` fingerprints for every (zone, AP) pair, zone
/// by zone, from the scenario seed.
pub fn generate_db(scenario: &Scenario) -> Result<FingerprintDatabase> {
    scenario.validate()?;
    let truth = scenario.truth_table();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let zone_ids = scenario.zone_ids();
    let ap_ids = scenario.ap_ids();
    let mut rows = Vec::with_capacity(truth.len() * scenario.samples_per_cell);
    for (z, zone) in zone_ids.iter().enumerate() {
        for (a, ap) in ap_ids.iter().enumerate() {
            let dist = truth[z * scenario.n_aps + a];
            for _ in 0..scenario.samples_per_cell {
                rows.push((zone, ap, dist.sample(&mut rng)));
            }
        }
    }
    FingerprintDatabase::from_rows(rows)
}

/// One reading per AP drawn from the true distributions of `true_zone`.
pub fn generate_observation(
    scenario: &Scenario,
    true_zone: usize,
    seed: u64,
) -> Result<Observation> {
    scenario.validate()?;
    if true_zone >= scenario.n_zones {
        return Err(Error::Domain(format!(
            "true zone {true_zone} outside the {}-zone scenario",
            scenario.n_zones
        )));
    }
    Ok(draw_observation(
        scenario,
        &scenario.truth_table(),
        true_zone,
        seed,
    ))
}

fn draw_observation(
    scenario: &Scenario,
    truth: &[Normal<f64>],
    zone: usize,
    seed: u64,
) -> Observation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = Observation::new();
    for ap in 0..scenario.n_aps {
        let rss = truth[zone * scenario.n_aps + ap].sample(&mut rng);
        obs.insert(Scenario::ap_id(ap), rss)
            .expect("generated readings are unique and finite");
    }
    obs
}

/// True zone and observation seed of every trial, derived from one seed.
/// Zones index the scenario.
pub fn trial_plan(n_zones: usize, trials: usize, seed: u64) -> Vec<(usize, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| (rng.random_range(0..n_zones), rng.random::<u64>()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Fraction of trials decided correctly; `None` when there were none.
    pub accuracy: Option<f64>,
    /// `confusion[true][decided]`, zones in model order.
    pub confusion: Vec<Vec<u64>>,
    pub mean_true_zone_confidence: Option<f64>,
    pub trials: usize,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Trials whose true zone is `zone`.
    pub fn zone_trials(&self, zone: usize) -> u64 {
        self.confusion[zone].iter().sum()
    }
}

pub fn evaluate(
    model: &ObservationModel,
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate_with(model, scenario, trials, seed, Execution::default())
}

/// Localizes `trials` simulated observations with uniformly drawn true
/// zones and tallies the decisions.
pub fn evaluate_with(
    model: &ObservationModel,
    scenario: &Scenario,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<EvaluationReport> {
    scenario.validate()?;
    let zone_map = match_ids("zone", &scenario.zone_ids(), model.zones())?;
    match_ids("AP", &scenario.ap_ids(), model.aps())?;

    let truth = scenario.truth_table();
    let plan = trial_plan(scenario.n_zones, trials, seed);
    let options = LocalizeOptions {
        execution: Execution::Sequential,
        ..LocalizeOptions::default()
    };
    let outcomes = par::map_slice(exec, &plan, |&(zone, obs_seed)| {
        let obs = draw_observation(scenario, &truth, zone, obs_seed);
        let truth_ix = zone_map[zone];
        localize_traced(model, &obs, &options).map(|loc| {
            (
                truth_ix,
                loc.map.decided_zone,
                loc.map.confidences[truth_ix],
            )
        })
    });

    let n = model.n_zones();
    let mut confusion = vec![vec![0u64; n]; n];
    let (mut correct, mut conf_sum) = (0usize, 0.0);
    for outcome in outcomes {
        let (truth_ix, decided, conf) = outcome?;
        confusion[truth_ix][decided] += 1;
        correct += usize::from(truth_ix == decided);
        conf_sum += conf;
    }
    let (accuracy, mean_conf) = if trials == 0 {
        (None, None)
    } else {
        (
            Some(correct as f64 / trials as f64),
            Some(conf_sum / trials as f64),
        )
    };
    Ok(EvaluationReport {
        accuracy,
        confusion,
        mean_true_zone_confidence: mean_conf,
        trials,
    })
}

/// Maps each scenario identifier to its index in the model.
fn match_ids(what: &str, scenario: &[String], model: &[String]) -> Result<Vec<usize>> {
    let a: BTreeSet<&String> = scenario.iter().collect();
    let b: BTreeSet<&String> = model.iter().collect();
    if a != b {
        return Err(Error::Domain(format!(
            "{what} identifiers differ between scenario {scenario:?} and model {model:?}"
        )));
    }
    Ok(scenario
        .iter()
        .map(|id| model.iter().position(|m| m == id).unwrap())
        .collect())
}
