//! `zoneloc` command-line tool: fit, localize, evaluate, simulate.
//!
//! Machine-readable output goes to stdout or `--out`; diagnostics go to
//! stderr. Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use zoneloc::belief::{localize_traced, LocalizeOptions};
use zoneloc::simulator::{evaluate, generate_db};
use zoneloc::{
    fit_observation_model, DistributionFamily, Error, FingerprintDatabase, FitConfig, MassFunction,
    Observation, ObservationModel, Scenario, ZoneSet,
};

const PLOT_POINTS: usize = 201;
const PLOT_MARGIN_DBM: f64 = 10.0;

#[derive(Parser)]
#[command(
    name = "zoneloc",
    version,
    about = "Zone-level indoor localization from WiFi RSS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an observation model from a fingerprint CSV.
    Fit(FitArgs),
    /// Assign per-zone confidences to one observation.
    Localize(LocalizeArgs),
    /// Score a model against simulated observations of a scenario.
    Evaluate(EvaluateArgs),
    /// Write a synthetic fingerprint CSV for a scenario.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_name = "CSV")]
    fingerprints: PathBuf,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "normal,logistic")]
    families: Vec<String>,
    #[arg(long, default_value_t = 10)]
    min_samples: usize,
    /// Also write `ap_id,zone_id,x,pdf` rows of every single-zone density.
    #[arg(long, value_name = "CSV")]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long, value_name = "JSON")]
    model: PathBuf,
    #[arg(long, value_name = "CSV")]
    observation: PathBuf,
    /// Include every per-AP mass function and the fused one.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "JSON")]
    model: PathBuf,
    #[arg(long, value_name = "JSON")]
    scenario: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_name = "JSON")]
    scenario: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fit(args) => fit(args),
        Command::Localize(args) => localize(args),
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_runtime() { 2 } else { 1 })
        }
    }
}

fn fit(args: FitArgs) -> zoneloc::Result<()> {
    let families = args
        .families
        .iter()
        .map(|f| f.parse::<DistributionFamily>())
        .collect::<zoneloc::Result<Vec<_>>>()?;
    let config = FitConfig {
        alpha: args.alpha,
        families,
        min_samples: args.min_samples,
    };
    config.validate()?;
    let db = FingerprintDatabase::load(&args.fingerprints)?;
    let model = fit_observation_model(&db, &config)?;
    model.save(&args.out)?;

    let degenerate = model.cells().iter().filter(|c| c.is_degenerate()).count();
    let rejected = model
        .cells()
        .iter()
        .filter_map(|c| c.fitted())
        .filter(|f| !f.accepted)
        .count();
    eprintln!(
        "fitted {} cells ({} zones x {} APs): {degenerate} degenerate, {rejected} rejected by K-S at alpha {}",
        model.cells().len(),
        model.n_zones(),
        model.n_aps(),
        config.alpha
    );
    if let Some(path) = &args.plot_data {
        write_plot_data(path, &db, &model)?;
    }
    Ok(())
}

fn write_plot_data(
    path: &Path,
    db: &FingerprintDatabase,
    model: &ObservationModel,
) -> zoneloc::Result<()> {
    let mut out = String::from("ap_id,zone_id,x,pdf\n");
    for (ap, ap_id) in model.aps().iter().enumerate() {
        let all = db.pool_samples(ap, ZoneSet::full(db.n_zones()))?;
        if all.is_empty() {
            continue;
        }
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min) - PLOT_MARGIN_DBM;
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max) + PLOT_MARGIN_DBM;
        for (zone, zone_id) in model.zones().iter().enumerate() {
            let cell = model.cell(ap, ZoneSet::singleton(zone));
            if cell.is_degenerate() {
                continue;
            }
            for i in 0..PLOT_POINTS {
                let x = lo + (hi - lo) * i as f64 / (PLOT_POINTS - 1) as f64;
                out.push_str(&format!("{ap_id},{zone_id},{x},{}\n", cell.pdf(x)));
            }
        }
    }
    write_file(path, &out)
}

fn localize(args: LocalizeArgs) -> zoneloc::Result<()> {
    let model = ObservationModel::load(&args.model)?;
    let obs = Observation::load(&args.observation)?;
    let loc = localize_traced(&model, &obs, &LocalizeOptions::default())?;
    if !loc.ignored_aps.is_empty() {
        eprintln!(
            "warning: ignored {} AP(s) absent from the model: {}",
            loc.ignored_aps.len(),
            loc.ignored_aps.join(", ")
        );
    }
    let mut text = loc.map.to_json();
    if args.trace {
        let trace = json!({
            "conflict": loc.conflict,
            "bbas": loc.bbas.iter().map(|(ap, m)| json!({
                "ap": ap,
                "masses": masses_json(model.zones(), m),
            })).collect::<Vec<_>>(),
            "fused": masses_json(model.zones(), &loc.fused),
        });
        text.pop();
        text.push_str(",\"trace\":");
        text.push_str(&trace.to_string());
        text.push('}');
    }
    print_line(&text)
}

fn masses_json(zones: &[String], m: &MassFunction) -> serde_json::Value {
    m.focal()
        .map(|(set, mass)| {
            json!({
                "set": set.zones().map(|k| zones[k].as_str()).collect::<Vec<_>>(),
                "bits": set.bits(),
                "mass": mass,
            })
        })
        .collect()
}

fn evaluate_cmd(args: EvaluateArgs) -> zoneloc::Result<()> {
    let model = ObservationModel::load(&args.model)?;
    let scenario = Scenario::load(&args.scenario)?;
    let report = evaluate(&model, &scenario, args.trials, args.seed)?;
    if report.accuracy.is_none() {
        eprintln!("warning: zero trials, accuracy undefined");
    }
    print_line(&report.to_json()?)
}

fn simulate(args: SimulateArgs) -> zoneloc::Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let db = generate_db(&scenario)?;
    db.save(&args.out)?;
    eprintln!(
        "wrote {} samples ({} zones x {} APs) to {}",
        db.total_samples(),
        db.n_zones(),
        db.n_aps(),
        args.out.display()
    );
    Ok(())
}

fn write_file(path: &Path, text: &str) -> zoneloc::Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn print_line(text: &str) -> zoneloc::Result<()> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}
