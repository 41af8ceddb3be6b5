//! Online localization with belief functions.
//!
//! Each detected access point turns its reading into a mass function over
//! the non-empty zone sets, weighting every set by the density of its fitted
//! distribution at the reading. The mass functions are fused with the
//! conjunctive rule, normalized once with Dempster's rule, and projected onto
//! single zones with the pignistic transformation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fingerprints::Observation;
use crate::par::{self, Execution};
use crate::statfit::ObservationModel;
use crate::zoneset::{ZoneSet, MAX_ZONES};

/// Tolerance on the total mass of a mass function.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// Default lower bound on the summed densities of one AP; below it the AP
/// abstains with a vacuous mass function.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-300;

/// Masses over subsets of a frame of `n_zones` zones, stored sparsely.
/// Sets with zero mass are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    n_zones: usize,
    masses: BTreeMap<ZoneSet, f64>,
}

impl MassFunction {
    /// Builds a mass function from explicit `(set, mass)` pairs; repeated
    /// sets accumulate. Masses must be finite, non-negative and sum to 1.
    pub fn new<I: IntoIterator<Item = (ZoneSet, f64)>>(n_zones: usize, masses: I) -> Result<Self> {
        check_frame(n_zones)?;
        let mut map = BTreeMap::new();
        for (set, m) in masses {
            if !set.fits_frame(n_zones) {
                return Err(Error::Domain(format!(
                    "set {set} outside the {n_zones}-zone frame"
                )));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Domain(format!("invalid mass {m} on {set}")));
            }
            if m > 0.0 {
                *map.entry(set).or_insert(0.0) += m;
            }
        }
        let mf = MassFunction {
            n_zones,
            masses: map,
        };
        let total = mf.total();
        if (total - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(Error::Domain(format!("masses sum to {total}, expected 1")));
        }
        Ok(mf)
    }

    /// Total ignorance: mass 1 on the whole frame.
    pub fn vacuous(n_zones: usize) -> Self {
        assert!(
            (2..=MAX_ZONES).contains(&n_zones),
            "frame of {n_zones} zones"
        );
        MassFunction {
            n_zones,
            masses: BTreeMap::from([(ZoneSet::full(n_zones), 1.0)]),
        }
    }

    /// Normalizes non-negative weights over the non-empty sets:
    /// `weights[i]` belongs to the set with bits `i + 1`. If the weights sum
    /// to less than `floor` the result is vacuous.
    pub fn from_weights(n_zones: usize, weights: &[f64], floor: f64) -> Result<Self> {
        check_frame(n_zones)?;
        if weights.len() != ZoneSet::non_empty_count(n_zones) {
            return Err(Error::Domain(format!(
                "{} weights for a {n_zones}-zone frame, expected {}",
                weights.len(),
                ZoneSet::non_empty_count(n_zones)
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Domain(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total < floor || total == 0.0 {
            return Ok(Self::vacuous(n_zones));
        }
        let masses = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (ZoneSet::from_bits(i as u32 + 1), w / total))
            .collect();
        Ok(MassFunction { n_zones, masses })
    }

    pub fn n_zones(&self) -> usize {
        self.n_zones
    }

    pub fn mass(&self, set: ZoneSet) -> f64 {
        self.masses.get(&set).copied().unwrap_or(0.0)
    }

    /// Mass on the empty set, i.e. the conflict.
    pub fn conflict(&self) -> f64 {
        self.mass(ZoneSet::EMPTY)
    }

    /// Focal elements in ascending bit order.
    pub fn focal(&self) -> impl Iterator<Item = (ZoneSet, f64)> + '_ {
        self.masses.iter().map(|(s, m)| (*s, *m))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Whether every focal element is a single zone.
    pub fn is_bayesian(&self) -> bool {
        self.masses.keys().all(|s| s.cardinality() == 1)
    }

    /// Dense vector indexed by set bits, including the empty set.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; 1 << self.n_zones];
        for (s, m) in self.focal() {
            dense[s.bits() as usize] = m;
        }
        dense
    }
}

fn check_frame(n_zones: usize) -> Result<()> {
    if !(2..=MAX_ZONES).contains(&n_zones) {
        return Err(Error::Domain(format!(
            "frame of {n_zones} zones outside [2, {MAX_ZONES}]"
        )));
    }
    Ok(())
}

/// Unnormalized conjunctive combination: each pair of focal elements sends
/// the product of its masses to their intersection. Mass may land on the
/// empty set.
pub fn conjunctive_combine(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    if m1.n_zones != m2.n_zones {
        return Err(Error::Domain(format!(
            "cannot combine mass functions over {} and {} zones",
            m1.n_zones, m2.n_zones
        )));
    }
    let mut acc = vec![0.0; 1 << m1.n_zones];
    for (b, mb) in m1.focal() {
        for (c, mc) in m2.focal() {
            acc[b.intersect(c).bits() as usize] += mb * mc;
        }
    }
    let masses = acc
        .into_iter()
        .enumerate()
        .filter(|(_, m)| *m > 0.0)
        .map(|(bits, m)| (ZoneSet::from_bits(bits as u32), m))
        .collect();
    Ok(MassFunction {
        n_zones: m1.n_zones,
        masses,
    })
}

/// Dempster normalization: drops the empty-set mass and rescales the rest
/// to sum to one.
pub fn dempster_normalize(m: &MassFunction) -> Result<MassFunction> {
    normalize_step(m, "Dempster normalization")
}

fn normalize_step(m: &MassFunction, step: &str) -> Result<MassFunction> {
    if m.conflict() == 0.0 {
        return Ok(m.clone());
    }
    let kept: f64 = m
        .focal()
        .filter(|(s, _)| !s.is_empty())
        .map(|(_, v)| v)
        .sum();
    if kept.is_nan() || kept <= 0.0 {
        return Err(Error::TotalConflict { step: step.into() });
    }
    let masses = m
        .focal()
        .filter(|(s, _)| !s.is_empty())
        .map(|(s, v)| (s, v / kept))
        .collect();
    Ok(MassFunction {
        n_zones: m.n_zones,
        masses,
    })
}

/// Pignistic probability of each single zone: every set shares its mass
/// equally among its members. Requires zero mass on the empty set.
pub fn pignistic(m: &MassFunction) -> Result<Vec<f64>> {
    if m.conflict() != 0.0 {
        return Err(Error::Domain(format!(
            "pignistic transformation needs m(empty) = 0, found {}; normalize first",
            m.conflict()
        )));
    }
    let mut bet = vec![0.0; m.n_zones];
    for (set, mass) in m.focal() {
        let share = mass / set.cardinality() as f64;
        for k in set.zones() {
            bet[k] += share;
        }
    }
    Ok(bet)
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizeOptions {
    pub density_floor: f64,
    pub execution: Execution,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        LocalizeOptions {
            density_floor: DEFAULT_DENSITY_FLOOR,
            execution: Execution::Sequential,
        }
    }
}

/// Mass function of one access point for one reading, with the default
/// density floor.
pub fn build_bba(model: &ObservationModel, ap: usize, rss: f64) -> Result<MassFunction> {
    build_bba_with_floor(model, ap, rss, DEFAULT_DENSITY_FLOOR)
}

pub fn build_bba_with_floor(
    model: &ObservationModel,
    ap: usize,
    rss: f64,
    density_floor: f64,
) -> Result<MassFunction> {
    if ap >= model.n_aps() {
        return Err(Error::Domain(format!("AP index {ap} out of range")));
    }
    if !rss.is_finite() {
        return Err(Error::Domain(format!("non-finite RSS {rss}")));
    }
    let weights: Vec<f64> = model.ap_cells(ap).iter().map(|c| c.pdf(rss)).collect();
    MassFunction::from_weights(model.n_zones(), &weights, density_floor)
}

/// Per-zone confidences and the decided zone.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceMap {
    pub zones: Vec<String>,
    pub confidences: Vec<f64>,
    /// Index into `zones`.
    pub decided_zone: usize,
}

impl ConfidenceMap {
    pub fn from_confidences(zones: Vec<String>, confidences: Vec<f64>) -> Self {
        let decided_zone = argmax_lowest(&confidences);
        ConfidenceMap {
            zones,
            confidences,
            decided_zone,
        }
    }

    pub fn decided_zone_id(&self) -> &str {
        &self.zones[self.decided_zone]
    }

    /// `{"zones":[...],"confidences":[...],"decided_zone":k}` with
    /// confidences printed to 6 decimal places.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"zones\":");
        out.push_str(&serde_json::to_string(&self.zones).expect("strings serialize"));
        out.push_str(",\"confidences\":[");
        for (i, c) in self.confidences.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{c:.6}").unwrap();
        }
        write!(out, "],\"decided_zone\":{}}}", self.decided_zone).unwrap();
        out
    }
}

/// Full result of one localization, including intermediate evidence.
#[derive(Clone, Debug)]
pub struct Localization {
    pub map: ConfidenceMap,
    /// Mass function of every detected, modeled AP, in model order.
    pub bbas: Vec<(String, MassFunction)>,
    /// Normalized fusion of `bbas`.
    pub fused: MassFunction,
    /// Unnormalized conflict before Dempster normalization.
    pub conflict: f64,
    /// Observation APs absent from the model.
    pub ignored_aps: Vec<String>,
}

pub fn localize(model: &ObservationModel, obs: &Observation) -> Result<ConfidenceMap> {
    localize_traced(model, obs, &LocalizeOptions::default()).map(|l| l.map)
}

/// Builds a mass function for every detected AP the model knows, fuses them
/// conjunctively in model AP order, normalizes once and takes the pignistic
/// confidences. Undetected APs are vacuous and therefore skipped.
pub fn localize_traced(
    model: &ObservationModel,
    obs: &Observation,
    options: &LocalizeOptions,
) -> Result<Localization> {
    let ignored_aps: Vec<String> = obs
        .iter()
        .filter(|(ap, _)| model.ap_index(ap).is_none())
        .map(|(ap, _)| ap.to_owned())
        .collect();
    if !ignored_aps.is_empty() {
        log::warn!(
            "{} observed AP(s) not in the model: {}",
            ignored_aps.len(),
            ignored_aps.join(", ")
        );
    }
    let detected: Vec<(usize, f64)> = model
        .aps()
        .iter()
        .enumerate()
        .filter_map(|(n, id)| obs.get(id).map(|rss| (n, rss)))
        .collect();
    if detected.is_empty() {
        return Err(Error::NoEvidence);
    }
    let bbas = par::map_slice(options.execution, &detected, |&(n, rss)| {
        build_bba_with_floor(model, n, rss, options.density_floor)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut joint = bbas[0].clone();
    for bba in &bbas[1..] {
        joint = conjunctive_combine(&joint, bba)?;
    }
    let conflict = joint.conflict();
    let fused = normalize_step(
        &joint,
        &format!("fusion of APs [{}]", fused_ids(model, &detected)),
    )?;
    let confidences = pignistic(&fused)?;
    Ok(Localization {
        map: ConfidenceMap::from_confidences(model.zones().to_vec(), confidences),
        bbas: detected
            .iter()
            .map(|&(n, _)| model.aps()[n].clone())
            .zip(bbas)
            .collect(),
        fused,
        conflict,
        ignored_aps,
    })
}

fn fused_ids(model: &ObservationModel, detected: &[(usize, f64)]) -> String {
    detected
        .iter()
        .map(|&(n, _)| model.aps()[n].as_str())
        .collect::<Vec<_>>()
        .join(", ")
}
