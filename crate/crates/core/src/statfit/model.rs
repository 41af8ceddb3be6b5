use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::family::{estimate_params, Distribution, DistributionFamily};
use super::ks::{check_alpha, ks_critical_value, ks_statistic};
use crate::error::{Error, Result};
use crate::fingerprints::FingerprintDatabase;
use crate::par::{self, Execution};
use crate::zoneset::{ZoneSet, MAX_ZONES, WARN_ZONES};

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Significance level of the K-S test; one of 0.10, 0.05, 0.01.
    pub alpha: f64,
    /// Candidate families, in tie-break order.
    pub families: Vec<DistributionFamily>,
    /// Pooled sets with fewer samples become degenerate cells.
    pub min_samples: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            alpha: 0.05,
            families: vec![DistributionFamily::Normal, DistributionFamily::Logistic],
            min_samples: 10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        check_alpha(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        if self.families.is_empty() {
            return Err(Error::Config("no distribution families configured".into()));
        }
        if self.min_samples < 3 {
            return Err(Error::Config(format!(
                "min_samples must be at least 3, got {}",
                self.min_samples
            )));
        }
        Ok(())
    }
}

/// The selected distribution of one cell together with its K-S verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedDistribution {
    pub dist: Distribution,
    pub ks_stat: f64,
    /// False when every family was rejected and this is the least-bad fit.
    pub accepted: bool,
    pub n: usize,
}

impl FittedDistribution {
    pub fn family(&self) -> DistributionFamily {
        self.dist.family()
    }

    pub fn params(&self) -> Vec<f64> {
        self.dist.params()
    }
}

/// A model cell: a fitted distribution, or a marker for a pooled set with
/// too few samples or zero spread. Degenerate cells have density 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellFit {
    Fitted(FittedDistribution),
    Degenerate { n: usize },
}

impl CellFit {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            CellFit::Fitted(f) => f.dist.pdf(x),
            CellFit::Degenerate { .. } => 0.0,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CellFit::Fitted(f) => f.n,
            CellFit::Degenerate { n } => *n,
        }
    }

    pub fn fitted(&self) -> Option<&FittedDistribution> {
        match self {
            CellFit::Fitted(f) => Some(f),
            CellFit::Degenerate { .. } => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, CellFit::Degenerate { .. })
    }
}

/// Fits every configured family, keeps those whose K-S statistic does not
/// exceed the critical value and returns the one with the smallest statistic
/// (ties go to the earlier family). When all are rejected the smallest
/// statistic is still returned, flagged `accepted = false`.
pub fn select_distribution(samples: &[f64], config: &FitConfig) -> Result<CellFit> {
    config.validate()?;
    if samples.len() < config.min_samples {
        return Err(Error::Domain(format!(
            "{} samples, need at least {}",
            samples.len(),
            config.min_samples
        )));
    }
    let n = samples.len();
    let critical = ks_critical_value(n, config.alpha)?;
    let mut best: Option<FittedDistribution> = None;
    for &family in &config.families {
        let dist = match estimate_params(family, samples) {
            Ok(d) => d,
            Err(Error::DegenerateFit(why)) => {
                log::debug!("{family} degenerate on {n} samples: {why}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let ks_stat = ks_statistic(samples, |x| dist.cdf(x));
        let candidate = FittedDistribution {
            dist,
            ks_stat,
            accepted: ks_stat <= critical,
            n,
        };
        let better = match &best {
            None => true,
            Some(b) => (candidate.accepted, -candidate.ks_stat) > (b.accepted, -b.ks_stat),
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.map_or(CellFit::Degenerate { n }, CellFit::Fitted))
}

/// The trained artifact: a fitted cell for every access point and every
/// non-empty zone set.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationModel {
    zones: Vec<String>,
    aps: Vec<String>,
    /// `cells[ap * (2^n_zones - 1) + (set_bits - 1)]`
    cells: Vec<CellFit>,
}

impl ObservationModel {
    /// Assembles a model from cells listed AP-major, zone sets ascending.
    pub fn from_cells(zones: Vec<String>, aps: Vec<String>, cells: Vec<CellFit>) -> Result<Self> {
        check_ids("zone", &zones)?;
        check_ids("AP", &aps)?;
        if zones.len() < 2 {
            return Err(Error::Validation("N_Z < 2".into()));
        }
        if zones.len() > MAX_ZONES {
            return Err(Error::Config(format!(
                "{} zones exceeds the cap of {MAX_ZONES}",
                zones.len()
            )));
        }
        let expected = aps.len() * ZoneSet::non_empty_count(zones.len());
        if cells.len() != expected {
            return Err(Error::Validation(format!(
                "model needs {expected} cells, got {}",
                cells.len()
            )));
        }
        for cell in &cells {
            if let CellFit::Fitted(f) = cell {
                f.dist.validate()?;
                if !(0.0..=1.0).contains(&f.ks_stat) {
                    return Err(Error::Validation(format!(
                        "K-S statistic {} outside [0, 1]",
                        f.ks_stat
                    )));
                }
            }
        }
        Ok(ObservationModel { zones, aps, cells })
    }

    pub fn zones(&self) -> &[String] {
        &self.zones
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn n_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn ap_index(&self, id: &str) -> Option<usize> {
        self.aps.iter().position(|a| a == id)
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z == id)
    }

    pub fn cells(&self) -> &[CellFit] {
        &self.cells
    }

    pub fn cell(&self, ap: usize, set: ZoneSet) -> &CellFit {
        debug_assert!(!set.is_empty() && set.fits_frame(self.n_zones()));
        let per_ap = ZoneSet::non_empty_count(self.n_zones());
        &self.cells[ap * per_ap + set.bits() as usize - 1]
    }

    /// Cells of one AP, indexed by `set_bits - 1`.
    pub fn ap_cells(&self, ap: usize) -> &[CellFit] {
        let per_ap = ZoneSet::non_empty_count(self.n_zones());
        &self.cells[ap * per_ap..(ap + 1) * per_ap]
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            version: MODEL_VERSION,
            zones: self.zones.clone(),
            aps: self.aps.clone(),
            cells: self.records(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        let per_ap = ZoneSet::non_empty_count(file.zones.len().min(MAX_ZONES));
        let mut cells = Vec::with_capacity(file.cells.len());
        for (i, rec) in file.cells.into_iter().enumerate() {
            let (ap, bits) = (i / per_ap, (i % per_ap + 1) as u32);
            if rec.ap != ap || rec.set_bits != bits {
                return Err(Error::Validation(format!(
                    "cell {i} is (ap {}, set {}), expected (ap {ap}, set {bits})",
                    rec.ap, rec.set_bits
                )));
            }
            cells.push(rec.into_cell()?);
        }
        Self::from_cells(file.zones, file.aps, cells)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn records(&self) -> Vec<CellRecord> {
        let per_ap = ZoneSet::non_empty_count(self.n_zones());
        self.cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let (ap, set_bits) = (i / per_ap, (i % per_ap + 1) as u32);
                match cell {
                    CellFit::Fitted(f) => CellRecord {
                        ap,
                        set_bits,
                        family: Some(f.family()),
                        params: f.params(),
                        ks_stat: Some(f.ks_stat),
                        accepted: f.accepted,
                        degenerate: false,
                        n: f.n,
                    },
                    CellFit::Degenerate { n } => CellRecord {
                        ap,
                        set_bits,
                        family: None,
                        params: Vec::new(),
                        ks_stat: None,
                        accepted: false,
                        degenerate: true,
                        n: *n,
                    },
                }
            })
            .collect()
    }
}

fn check_ids(what: &str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if id.is_empty() {
            return Err(Error::Validation(format!("empty {what} identifier")));
        }
        if !seen.insert(id) {
            return Err(Error::Validation(format!(
                "duplicate {what} identifier `{id}`"
            )));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    zones: Vec<String>,
    aps: Vec<String>,
    cells: Vec<CellRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellRecord {
    ap: usize,
    set_bits: u32,
    family: Option<DistributionFamily>,
    params: Vec<f64>,
    ks_stat: Option<f64>,
    accepted: bool,
    degenerate: bool,
    n: usize,
}

impl CellRecord {
    fn into_cell(self) -> Result<CellFit> {
        if self.degenerate {
            return Ok(CellFit::Degenerate { n: self.n });
        }
        let family = self.family.ok_or_else(|| {
            Error::Validation(format!(
                "cell (ap {}, set {}) has no family",
                self.ap, self.set_bits
            ))
        })?;
        let ks_stat = self.ks_stat.ok_or_else(|| {
            Error::Validation(format!(
                "cell (ap {}, set {}) has no ks_stat",
                self.ap, self.set_bits
            ))
        })?;
        Ok(CellFit::Fitted(FittedDistribution {
            dist: Distribution::from_params(family, &self.params)?,
            ks_stat,
            accepted: self.accepted,
            n: self.n,
        }))
    }
}

/// Fits the full observation model with the default execution strategy.
pub fn fit_observation_model(
    db: &FingerprintDatabase,
    config: &FitConfig,
) -> Result<ObservationModel> {
    fit_observation_model_with(db, config, Execution::default())
}

pub fn fit_observation_model_with(
    db: &FingerprintDatabase,
    config: &FitConfig,
    exec: Execution,
) -> Result<ObservationModel> {
    config.validate()?;
    let n_zones = db.n_zones();
    if n_zones > MAX_ZONES {
        return Err(Error::Config(format!(
            "{n_zones} zones exceeds the hard cap of {MAX_ZONES} (the model holds 2^N_Z - 1 cells per AP)"
        )));
    }
    if n_zones > WARN_ZONES {
        log::warn!(
            "{n_zones} zones: {} cells per AP, fusion cost grows as 4^N_Z",
            ZoneSet::non_empty_count(n_zones)
        );
    }
    let per_ap = ZoneSet::non_empty_count(n_zones);
    let cells = par::map_range(exec, db.n_aps() * per_ap, |i| {
        let (ap, set) = (i / per_ap, ZoneSet::from_bits((i % per_ap + 1) as u32));
        let pooled = db.pool_samples(ap, set)?;
        if pooled.len() < config.min_samples {
            return Ok(CellFit::Degenerate { n: pooled.len() });
        }
        select_distribution(&pooled, config)
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    ObservationModel::from_cells(db.zones().to_vec(), db.aps().to_vec(), cells)
}
