mod common;

use zoneloc::simulator::{evaluate, generate_db, generate_observation, trial_plan};
use zoneloc::{fit_observation_model, FitConfig, Scenario};

fn accuracy(scenario: &Scenario, trials: usize, seed: u64) -> f64 {
    let model =
        fit_observation_model(&generate_db(scenario).unwrap(), &FitConfig::default()).unwrap();
    evaluate(&model, scenario, trials, seed)
        .unwrap()
        .accuracy
        .unwrap()
}

#[test]
fn chance_level_when_zones_are_identical() {
    let s = Scenario::indistinguishable(4, 2, 5.0, 150, 31);
    let acc = accuracy(&s, 2000, 4);
    assert!((0.20..=0.30).contains(&acc), "accuracy {acc}");
}

#[test]
fn separable_zones_beat_threshold_and_track_bayes() {
    let s = Scenario::separable(4, 3, 15.0, 4.0, 200, 12);
    let trials = 1000;
    let acc = accuracy(&s, trials, 6);
    let bayes = trial_plan(4, trials, 6)
        .into_iter()
        .filter(|&(z, seed)| {
            common::bayes_decide(&s, &generate_observation(&s, z, seed).unwrap()) == z
        })
        .count() as f64
        / trials as f64;
    assert!(acc >= 0.95, "accuracy {acc}");
    assert!(bayes >= 0.97, "Bayes {bayes}");
}

#[test]
fn accuracy_grows_with_separation() {
    let trials = 600;
    let mut prev: Option<f64> = None;
    for sep in [2.0, 5.0, 10.0, 15.0, 20.0] {
        let s = Scenario::separable(4, 2, sep, 4.0, 100, 40);
        let acc = accuracy(&s, trials, 41);
        if let Some(p) = prev {
            // 3 sigma of a binomial proportion at the worse of the two levels
            let sigma = (p * (1.0 - p) / trials as f64)
                .sqrt()
                .max(1.0 / trials as f64);
            assert!(acc >= p - 3.0 * sigma, "separation {sep}: {acc} after {p}");
        }
        prev = Some(acc);
    }
    assert!(prev.unwrap() > 0.95);
}

#[test]
fn confusion_rows_cover_all_trials() {
    let s = Scenario::separable(3, 2, 6.0, 4.0, 80, 2);
    let model = fit_observation_model(&generate_db(&s).unwrap(), &FitConfig::default()).unwrap();
    let r = evaluate(&model, &s, 777, 3).unwrap();
    let plan = trial_plan(3, 777, 3);
    for z in 0..3 {
        let expected = plan.iter().filter(|(t, _)| *t == z).count() as u64;
        assert_eq!(r.zone_trials(z), expected);
    }
    let correct: u64 = (0..3).map(|z| r.confusion[z][z]).sum();
    assert_eq!(r.accuracy.unwrap(), correct as f64 / 777.0);
    let m = r.mean_true_zone_confidence.unwrap();
    assert!((0.0..=1.0).contains(&m));
    assert_eq!(evaluate(&model, &s, 777, 3).unwrap(), r);
}
