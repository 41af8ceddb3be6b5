//! Independent oracles shared by the integration and acceptance suites.
//! None of these route through the library's fusion or K-S code paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use zoneloc::{CellFit, Distribution, FittedDistribution, Observation, ObservationModel};

/// Density written out independently of `Distribution::pdf`.
pub fn oracle_pdf(dist: &Distribution, x: f64) -> f64 {
    match *dist {
        Distribution::Normal { mean, stdev } => {
            let z = (x - mean) / stdev;
            (-z * z / 2.0).exp() / (2.0 * PI * stdev * stdev).sqrt()
        }
        Distribution::Logistic { location, scale } => {
            let c = ((x - location) / (2.0 * scale)).cosh();
            1.0 / (4.0 * scale * c * c)
        }
        _ => panic!("oracle covers Normal and Logistic only"),
    }
}

/// Random model over Normal/Logistic cells, with occasional degenerate cells.
pub fn random_model<R: Rng>(rng: &mut R, n_zones: usize, n_aps: usize) -> ObservationModel {
    let per_ap = (1 << n_zones) - 1;
    let cells = (0..n_aps * per_ap)
        .map(|_| {
            if rng.random::<f64>() < 0.1 {
                return CellFit::Degenerate {
                    n: rng.random_range(0..10),
                };
            }
            let loc = rng.random_range(-80.0..-40.0);
            let spread = rng.random_range(2.0..15.0);
            let dist = if rng.random::<bool>() {
                Distribution::Normal {
                    mean: loc,
                    stdev: spread,
                }
            } else {
                Distribution::Logistic {
                    location: loc,
                    scale: spread * 0.55,
                }
            };
            CellFit::Fitted(FittedDistribution {
                dist,
                ks_stat: rng.random::<f64>(),
                accepted: rng.random::<bool>(),
                n: rng.random_range(10..500),
            })
        })
        .collect();
    ObservationModel::from_cells(
        (0..n_zones).map(|k| format!("Z{k}")).collect(),
        (0..n_aps).map(|n| format!("AP{n}")).collect(),
        cells,
    )
    .unwrap()
}

/// Observation detecting a random non-empty subset of the model's APs.
pub fn random_observation<R: Rng>(rng: &mut R, model: &ObservationModel) -> Observation {
    loop {
        let mut obs = Observation::new();
        for ap in model.aps() {
            if rng.random::<f64>() < 0.8 {
                obs.insert(ap.clone(), rng.random_range(-85.0..-35.0))
                    .unwrap();
            }
        }
        if !obs.is_empty() {
            return obs;
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum OracleFailure {
    NoEvidence,
    TotalConflict,
}

pub struct OracleResult {
    pub confidences: Vec<f64>,
    pub decided_zone: usize,
}

/// Dense mass vector (indexed by set bits) of one AP reading, computed from
/// the densities directly.
pub fn oracle_bba(model: &ObservationModel, ap: usize, rss: f64, floor: f64) -> Vec<f64> {
    let n_sets = 1usize << model.n_zones();
    let mut w = vec![0.0; n_sets];
    for (bits, slot) in w.iter_mut().enumerate().skip(1) {
        *slot = match &model.cells()[ap * (n_sets - 1) + bits - 1] {
            CellFit::Fitted(f) => oracle_pdf(&f.dist, rss),
            CellFit::Degenerate { .. } => 0.0,
        };
    }
    let total: f64 = w.iter().sum();
    if total < floor || total == 0.0 {
        let mut vac = vec![0.0; n_sets];
        vac[n_sets - 1] = 1.0;
        return vac;
    }
    w.iter().map(|x| x / total).collect()
}

/// Fusion by enumerating every tuple of focal sets (one per detected AP),
/// intersecting them and summing products, then Dempster normalization,
/// pignistic projection and argmax.
pub fn oracle_localize(
    model: &ObservationModel,
    obs: &Observation,
    floor: f64,
) -> Result<OracleResult, OracleFailure> {
    let n_zones = model.n_zones();
    let n_sets = 1usize << n_zones;
    let bbas: Vec<Vec<f64>> = model
        .aps()
        .iter()
        .enumerate()
        .filter_map(|(n, id)| obs.get(id).map(|rss| oracle_bba(model, n, rss, floor)))
        .collect();
    if bbas.is_empty() {
        return Err(OracleFailure::NoEvidence);
    }
    let mut joint = vec![0.0; n_sets];
    let mut idx = vec![1usize; bbas.len()];
    loop {
        let mut inter = n_sets - 1;
        let mut prod = 1.0;
        for (m, &a) in bbas.iter().zip(&idx) {
            inter &= a;
            prod *= m[a];
        }
        joint[inter] += prod;
        // odometer over non-empty sets
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return finish(joint, n_zones);
            }
            idx[pos] += 1;
            if idx[pos] < n_sets {
                break;
            }
            idx[pos] = 1;
            pos += 1;
        }
    }
}

fn finish(joint: Vec<f64>, n_zones: usize) -> Result<OracleResult, OracleFailure> {
    let kept: f64 = joint[1..].iter().sum();
    if kept == 0.0 {
        return Err(OracleFailure::TotalConflict);
    }
    let mut bet = vec![0.0; n_zones];
    for (bits, m) in joint.iter().enumerate().skip(1) {
        let members: Vec<usize> = (0..n_zones).filter(|k| bits & (1 << k) != 0).collect();
        for k in &members {
            bet[*k] += m / kept / members.len() as f64;
        }
    }
    let mut decided = 0;
    for k in 1..n_zones {
        if bet[k] > bet[decided] {
            decided = k;
        }
    }
    Ok(OracleResult {
        confidences: bet,
        decided_zone: decided,
    })
}

/// Sup of |ECDF - F| evaluated on a dense grid spanning the sample plus the
/// left and right limits at every sample point, with the ECDF counted
/// directly.
pub fn ks_grid_jump_oracle(samples: &[f64], cdf: impl Fn(f64) -> f64, grid_points: usize) -> f64 {
    let n = samples.len() as f64;
    let count_le = |x: f64| samples.iter().filter(|&&s| s <= x).count() as f64 / n;
    let count_lt = |x: f64| samples.iter().filter(|&&s| s < x).count() as f64 / n;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut d: f64 = 0.0;
    for i in 0..=grid_points {
        let x = lo + (hi - lo) * i as f64 / grid_points as f64;
        d = d.max((count_le(x) - cdf(x)).abs());
    }
    for &x in samples {
        let f = cdf(x);
        d = d.max((count_le(x) - f).abs()).max((count_lt(x) - f).abs());
    }
    d
}

/// Random mass function over `n_zones`, optionally with mass on the empty set.
pub fn random_mass<R: Rng>(
    rng: &mut R,
    n_zones: usize,
    allow_empty: bool,
) -> zoneloc::MassFunction {
    let n_sets = 1u32 << n_zones;
    let first = if allow_empty { 0 } else { 1 };
    let k = rng.random_range(1..=4.min((n_sets - first) as usize));
    let sets: Vec<u32> = (0..k).map(|_| rng.random_range(first..n_sets)).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    zoneloc::MassFunction::new(
        n_zones,
        sets.into_iter()
            .zip(w)
            .map(|(s, x)| (zoneloc::ZoneSet::from_bits(s), x / total)),
    )
    .unwrap()
}

/// Bayes classifier with the true Normal parameters and a uniform prior.
pub fn bayes_decide(scenario: &zoneloc::Scenario, obs: &Observation) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for zone in 0..scenario.n_zones {
        let ll: f64 = (0..scenario.n_aps)
            .map(|ap| {
                let (mu, sd) = scenario.truth(zone, ap);
                let x = obs.get(&zoneloc::Scenario::ap_id(ap)).unwrap();
                -((x - mu) / sd).powi(2) / 2.0 - sd.ln()
            })
            .sum();
        if ll > best.0 {
            best = (ll, zone);
        }
    }
    best.1
}
