//! Acceptance criteria. Run with `cargo test -p zoneloc --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use zoneloc::belief::{build_bba, localize_traced, LocalizeOptions, DEFAULT_DENSITY_FLOOR};
use zoneloc::simulator::{evaluate, generate_db, generate_observation, trial_plan};
use zoneloc::statfit::{ks_critical_value, ks_statistic};
use zoneloc::{
    conjunctive_combine, dempster_normalize, fit_observation_model, localize, pignistic,
    select_distribution, Distribution, DistributionFamily, FitConfig, MassFunction, Observation,
    ObservationModel, Scenario, ZoneSet,
};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &MassFunction, b: &MassFunction) -> f64 {
    a.to_dense()
        .iter()
        .zip(b.to_dense())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn within_time(start: Instant, limit: Duration) -> std::result::Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

/// 1. Belief algebra.
fn belief_algebra() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let n = [2, 3, 4][i % 3];
        let a = common::random_mass(&mut rng, n, false);
        let b = common::random_mass(&mut rng, n, false);
        let c = common::random_mass(&mut rng, n, false);
        let ab = conjunctive_combine(&a, &b).unwrap();
        let ba = conjunctive_combine(&b, &a).unwrap();
        worst = worst.max(max_abs_diff(&ab, &ba));
        let left = conjunctive_combine(&ab, &c).unwrap();
        let right = conjunctive_combine(&a, &conjunctive_combine(&b, &c).unwrap()).unwrap();
        worst = worst.max(max_abs_diff(&left, &right));
        ensure(
            conjunctive_combine(&a, &MassFunction::vacuous(n)).unwrap() == a,
            || format!("vacuous identity broken on case {i}"),
        )?;
        ensure(
            conjunctive_combine(&MassFunction::vacuous(n), &a).unwrap() == a,
            || format!("vacuous left identity broken on case {i}"),
        )?;
        if left.focal().all(|(s, _)| s.is_empty()) {
            ensure(dempster_normalize(&left).is_err(), || {
                format!("total conflict accepted on case {i}")
            })?;
        } else {
            let norm = dempster_normalize(&left).unwrap();
            ensure(norm.conflict() == 0.0, || {
                format!("m(empty) != 0 on case {i}")
            })?;
            ensure((norm.total() - 1.0).abs() <= 1e-9, || {
                format!("normalized sum {} on case {i}", norm.total())
            })?;
        }
    }
    ensure(worst <= 1e-9, || {
        format!("commutativity/associativity error {worst:e}")
    })?;
    let took = within_time(start, Duration::from_secs(5))?;
    Ok(format!("max algebra error {worst:.1e}, {took:.2?}"))
}

/// 2. Scale invariance of the mass construction.
fn scale_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(2..=4);
        let weights: Vec<f64> = (0..ZoneSet::non_empty_count(n))
            .map(|_| {
                if rng.random::<f64>() < 0.2 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let base = MassFunction::from_weights(n, &weights, DEFAULT_DENSITY_FLOOR).unwrap();
        for c in [1e-6, 1.0, 1e6] {
            let scaled: Vec<f64> = weights.iter().map(|w| w * c).collect();
            let m = MassFunction::from_weights(n, &scaled, DEFAULT_DENSITY_FLOOR).unwrap();
            worst = worst.max(max_abs_diff(&base, &m));
        }
    }
    ensure(worst <= 1e-12, || format!("componentwise error {worst:e}"))?;
    Ok(format!("max componentwise error {worst:.1e}"))
}

/// 3. Pignistic transformation.
fn pignistic_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let n = rng.random_range(2..=5);
        let m = common::random_mass(&mut rng, n, false);
        let bet = pignistic(&m).unwrap();
        let s: f64 = bet.iter().sum();
        ensure((s - 1.0).abs() <= 1e-9, || {
            format!("BetP sums to {s} on case {i}")
        })?;

        let singles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = singles.iter().sum();
        let bayes = MassFunction::new(
            n,
            singles
                .iter()
                .enumerate()
                .map(|(k, w)| (ZoneSet::singleton(k), w / total)),
        )
        .unwrap();
        let expected: Vec<f64> = (0..n).map(|k| bayes.mass(ZoneSet::singleton(k))).collect();
        ensure(pignistic(&bayes).unwrap() == expected, || {
            format!("Bayesian fixpoint broken on case {i}")
        })?;
    }

    // Worked example: m1 = {Z1}:0.6, Z:0.4; m2 = {Z2}:0.7, Z:0.3.
    let (z1, z2, all) = (
        ZoneSet::from_bits(1),
        ZoneSet::from_bits(2),
        ZoneSet::from_bits(3),
    );
    let m1 = MassFunction::new(2, [(z1, 0.6), (all, 0.4)]).unwrap();
    let m2 = MassFunction::new(2, [(z2, 0.7), (all, 0.3)]).unwrap();
    let bet =
        pignistic(&dempster_normalize(&conjunctive_combine(&m1, &m2).unwrap()).unwrap()).unwrap();
    // Enumeration oracle over the four focal pairs.
    let pairs = [
        (1u32, 0.6, 2u32, 0.7),
        (1, 0.6, 3, 0.3),
        (3, 0.4, 2, 0.7),
        (3, 0.4, 3, 0.3),
    ];
    let mut joint = [0.0f64; 4];
    for (b, mb, c, mc) in pairs {
        joint[(b & c) as usize] += mb * mc;
    }
    let kept = 1.0 - joint[0];
    let oracle = [
        (joint[1] + joint[3] / 2.0) / kept,
        (joint[2] + joint[3] / 2.0) / kept,
    ];
    for k in 0..2 {
        ensure((bet[k] - oracle[k]).abs() <= 1e-5, || {
            format!("BetP {bet:?} vs oracle {oracle:?}")
        })?;
    }
    ensure(
        (bet[0] - 0.41379).abs() <= 1e-5 && (bet[1] - 0.58621).abs() <= 1e-5,
        || format!("BetP {bet:?} vs (0.41379, 0.58621)"),
    )?;
    Ok(format!(
        "worked example BetP = ({:.5}, {:.5})",
        bet[0], bet[1]
    ))
}

/// 4. Pipeline against the tuple-enumeration oracle.
fn brute_force_pipeline() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let (mut cases, mut conflicts) = (0, 0);
    for n_zones in 2..=3 {
        for n_aps in 1..=3 {
            for i in 0..100 {
                let model = common::random_model(&mut rng, n_zones, n_aps);
                let obs = common::random_observation(&mut rng, &model);
                let got = localize(&model, &obs);
                let want = common::oracle_localize(&model, &obs, DEFAULT_DENSITY_FLOOR);
                let (got, want) = match (got, want) {
                    (Ok(g), Ok(w)) => (g, w),
                    (
                        Err(zoneloc::Error::TotalConflict { .. }),
                        Err(common::OracleFailure::TotalConflict),
                    ) => {
                        conflicts += 1;
                        cases += 1;
                        continue;
                    }
                    (g, w) => {
                        return Err(format!(
                            "({n_zones},{n_aps}) #{i}: pipeline {:?} vs oracle {:?}",
                            g.map(|m| m.confidences),
                            w.map(|r| r.confidences)
                        ))
                    }
                };
                for (g, w) in got.confidences.iter().zip(&want.confidences) {
                    worst = worst.max((g - w).abs());
                }
                ensure(got.decided_zone == want.decided_zone, || {
                    format!(
                        "({n_zones},{n_aps}) #{i}: decided {} vs oracle {}",
                        got.decided_zone, want.decided_zone
                    )
                })?;
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("confidence error {worst:e}"))?;
    Ok(format!(
        "{cases} cases ({conflicts} total-conflict agreements), max confidence error {worst:.1e}"
    ))
}

/// 5. K-S statistic and null rejection rate.
fn ks_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let n = rng.random_range(1..=150);
        let mean = rng.random_range(-80.0..-40.0);
        let sd = rng.random_range(1.0..10.0);
        let gen = Normal::new(mean, sd).unwrap();
        let ties = rng.random::<bool>();
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = gen.sample(&mut rng);
                if ties {
                    x.round()
                } else {
                    x
                }
            })
            .collect();
        let dist = Distribution::Normal {
            mean: mean + rng.random_range(-2.0..2.0),
            stdev: sd * rng.random_range(0.7..1.3),
        };
        let d = ks_statistic(&xs, |x| dist.cdf(x));
        let oracle = common::ks_grid_jump_oracle(&xs, |x| dist.cdf(x), 2000);
        ensure(d == oracle, || {
            format!("case {i}: D = {d} vs oracle {oracle}")
        })?;
        ensure((0.0..=1.0).contains(&d), || format!("case {i}: D = {d}"))?;
    }

    let n = 50;
    let crit = ks_critical_value(n, 0.05).unwrap();
    let truth = Distribution::Normal {
        mean: -60.0,
        stdev: 4.0,
    };
    let gen = Normal::new(-60.0, 4.0).unwrap();
    let trials = 2000;
    let rejected = (0..trials)
        .filter(|_| {
            let xs: Vec<f64> = (0..n).map(|_| gen.sample(&mut rng)).collect();
            ks_statistic(&xs, |x| truth.cdf(x)) > crit
        })
        .count();
    let rate = rejected as f64 / trials as f64;
    ensure((0.03..=0.07).contains(&rate), || {
        format!("null rejection rate {rate}")
    })?;
    let took = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "1000 oracle matches, null rejection rate {rate:.4}, {took:.2?}"
    ))
}

/// 6. Model selection frequency.
fn model_selection() -> Check {
    let config = FitConfig {
        families: vec![DistributionFamily::Normal, DistributionFamily::Logistic],
        ..FitConfig::default()
    };
    let gen = Normal::new(-60.0, 4.0).unwrap();
    let runs = 200;
    let normal_wins = (0..runs)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..500).map(|_| gen.sample(&mut rng)).collect();
            let fit = select_distribution(&xs, &config).unwrap();
            fit.fitted().map(|f| f.family()) == Some(DistributionFamily::Normal)
        })
        .count();
    let freq = normal_wins as f64 / runs as f64;
    ensure(freq >= 0.90, || {
        format!("Normal selected in {normal_wins}/{runs} runs")
    })?;
    Ok(format!("Normal selected in {normal_wins}/{runs} runs"))
}

/// 7. End-to-end simulation.
fn end_to_end() -> Check {
    let start = Instant::now();
    let config = FitConfig::default();

    let separable = Scenario::separable(4, 3, 15.0, 4.0, 200, 17);
    let model = fit_observation_model(&generate_db(&separable).unwrap(), &config).unwrap();
    let trials = 1000;
    let report = evaluate(&model, &separable, trials, 99).unwrap();
    let acc = report.accuracy.unwrap();
    let plan = trial_plan(separable.n_zones, trials, 99);
    let bayes_correct = plan
        .iter()
        .filter(|&&(zone, seed)| {
            let obs = generate_observation(&separable, zone, seed).unwrap();
            common::bayes_decide(&separable, &obs) == zone
        })
        .count();
    let bayes = bayes_correct as f64 / trials as f64;
    ensure(acc >= 0.95, || format!("separable accuracy {acc}"))?;
    ensure(bayes >= 0.97, || format!("Bayes oracle accuracy {bayes}"))?;
    ensure((acc - bayes).abs() <= 0.03, || {
        format!("accuracy {acc} vs Bayes {bayes}")
    })?;

    let flat = Scenario::indistinguishable(4, 3, 4.0, 200, 18);
    let flat_model = fit_observation_model(&generate_db(&flat).unwrap(), &config).unwrap();
    let flat_acc = evaluate(&flat_model, &flat, 2000, 100)
        .unwrap()
        .accuracy
        .unwrap();
    ensure((0.20..=0.30).contains(&flat_acc), || {
        format!("indistinguishable accuracy {flat_acc}")
    })?;
    let took = within_time(start, Duration::from_secs(20))?;
    Ok(format!(
        "separable {acc:.3} (Bayes {bayes:.3}), indistinguishable {flat_acc:.3}, {took:.2?}"
    ))
}

/// 8. Determinism and exact model round trip.
fn determinism() -> Check {
    let scenario = Scenario::separable(4, 3, 10.0, 4.0, 60, 21);
    let config = FitConfig::default();
    let run = || {
        let db = generate_db(&scenario).unwrap();
        let model = fit_observation_model(&db, &config).unwrap();
        let obs = generate_observation(&scenario, 2, 5).unwrap();
        let loc = localize_traced(&model, &obs, &LocalizeOptions::default()).unwrap();
        let report = evaluate(&model, &scenario, 300, 8).unwrap();
        (
            model.to_json().unwrap(),
            loc.map.to_json(),
            report.to_json().unwrap(),
            model,
        )
    };
    let (m1, l1, r1, model) = run();
    let (m2, l2, r2, _) = run();
    ensure(m1 == m2, || "model JSON differs between runs".into())?;
    ensure(l1 == l2, || "confidence map differs between runs".into())?;
    ensure(r1 == r2, || "evaluation report differs between runs".into())?;

    let back = ObservationModel::from_json(&m1).map_err(|e| e.to_string())?;
    ensure(back.to_json().unwrap() == m1, || {
        "model JSON does not re-serialize identically".into()
    })?;
    let bits = |m: &ObservationModel| -> Vec<u64> {
        m.cells()
            .iter()
            .filter_map(|c| c.fitted())
            .flat_map(|f| f.params().into_iter().chain([f.ks_stat]).map(f64::to_bits))
            .collect()
    };
    ensure(bits(&back) == bits(&model), || {
        "parameters changed bits across the round trip".into()
    })?;
    let obs = Observation::from_readings([("AP1", -52.25), ("AP3", -71.0)]).unwrap();
    ensure(
        localize(&back, &obs).unwrap() == localize(&model, &obs).unwrap(),
        || "reloaded model localizes differently".into(),
    )?;
    ensure(
        build_bba(&back, 1, -60.0).unwrap() == build_bba(&model, 1, -60.0).unwrap(),
        || "reloaded model builds different masses".into(),
    )?;
    Ok(format!("{} byte model, reruns identical", m1.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 belief algebra", belief_algebra),
        ("AC2 mass scale invariance", scale_invariance),
        ("AC3 pignistic suite", pignistic_suite),
        ("AC4 brute-force pipeline equivalence", brute_force_pipeline),
        ("AC5 K-S correctness", ks_correctness),
        ("AC6 model selection", model_selection),
        ("AC7 end-to-end simulator", end_to_end),
        ("AC8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
