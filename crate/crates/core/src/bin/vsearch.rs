use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use vsearch::harness::dataset::load_manifest;
use vsearch::harness::evaluate::{render_table, write_report};
use vsearch::harness::run::{load_results, write_outputs, TrialError};
use vsearch::harness::saliency_eval::{available_maps, write_auc_table};
use vsearch::harness::{
    eval_saliency, evaluate, Aggregation, load_dataset, run_experiment, Dataset, LoadReport, PriorSpec, RankBucket, ReportBundle,
    RunConfig,
};
use vsearch::metrics::AucVariant;
use vsearch::synth::{generate, write_suite, SynthConfig};
use vsearch::{Error, Execution, Policy};

#[derive(Parser)]
#[command(name = "vsearch", version, about = "Bayesian visual search simulator and evaluation harness")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// ibs, cibs, greedy or saliency_ior.
    #[arg(long, global = true)]
    policy: Option<Policy>,
    /// flat, center, noise, human, or a saliency map name from the manifest.
    #[arg(long, global = true)]
    prior: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the model on every image and budget.
    Run,
    /// Compare model results with the human data.
    Evaluate {
        /// Model results; defaults to results.csv in the output directory.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Score saliency maps as fixation predictors.
    EvalSaliency {
        /// Comma-separated map names; all available maps when omitted.
        #[arg(long, value_delimiter = ',')]
        maps: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        variants: Vec<AucVariant>,
        /// Only this fixation rank bucket, e.g. 3 or 5-8.
        #[arg(long)]
        rank: Option<RankBucket>,
        /// One ROC over all images instead of the mean of per-image AUCs.
        #[arg(long)]
        pooled: bool,
    },
    /// Print the tables written by `evaluate` and `eval-saliency`.
    Report,
    /// Write a synthetic stimulus set with simulated participants.
    Synth {
        #[arg(long, default_value_t = 10)]
        images: usize,
        #[arg(long, default_value_t = 8)]
        subjects: usize,
        /// Target saliency within the distractor range, 0 to 1.
        #[arg(long, default_value_t = 0.25)]
        target_salience: f64,
        /// Uniform saliency floor; larger values give a flatter prior.
        #[arg(long, default_value_t = 200.0)]
        saliency_baseline: f64,
    },
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Shape { .. } => "shape",
        Error::Parse { .. } => "parse",
        Error::Io { .. } => "io",
        Error::File { .. } => "file",
        Error::Json(_) => "json",
    }
}

fn fail(errors: Vec<serde_json::Value>) -> ExitCode {
    eprintln!("{}", json!({ "errors": errors }));
    ExitCode::FAILURE
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = cli.policy {
        cfg.policy = p;
    }
    if let Some(p) = &cli.prior {
        cfg.prior = PriorSpec::from(p.clone());
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if cli.sequential {
        cfg.exec = Execution::Sequential;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dataset(cfg: &RunConfig, need_humans: bool) -> Result<Dataset, Error> {
    let manifest = cfg.manifest_path()?;
    match (&cfg.scanpaths, need_humans) {
        (Some(sp), _) => load_dataset(manifest, sp, &cfg.grid, &cfg.sorted_budgets()),
        (None, true) => Err(cfg.scanpaths_path().unwrap_err()),
        (None, false) => Ok(Dataset {
            grid: cfg.grid,
            images: load_manifest(manifest, &cfg.grid)?,
            trials: Vec::new(),
            report: LoadReport::default(),
        }),
    }
}

fn log_load_report(r: &LoadReport) {
    if !r.clamped.is_empty() {
        log::warn!("{} fixation(s) clamped into the image, first at {}", r.clamped.len(), r.clamped[0]);
    }
}

fn trial_error(e: &TrialError) -> serde_json::Value {
    json!({ "kind": "trial", "trial": e.trial, "message": e.message })
}

fn run(cli: &Cli) -> Result<Vec<serde_json::Value>, Error> {
    match &cli.command {
        Command::Synth { images, subjects, target_salience, saliency_baseline } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
            let cfg = SynthConfig {
                images: *images,
                subjects: *subjects,
                target_salience: *target_salience,
                saliency_baseline: *saliency_baseline,
                seed: cli.seed.unwrap_or(SynthConfig::default().seed),
                ..SynthConfig::default()
            };
            let path = write_suite(&generate(&cfg)?, &out)?;
            println!("wrote {}", path.display());
            Ok(Vec::new())
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let needs_humans = cfg.prior == PriorSpec::Human;
            let ds = dataset(&cfg, needs_humans)?;
            log_load_report(&ds.report);
            let out = run_experiment(&ds, &cfg)?;
            write_outputs(&out, &cfg.output_dir)?;
            let found = out.results.iter().filter(|r| r.found).count();
            println!(
                "{} trials, {} found, results in {}",
                out.results.len(),
                found,
                cfg.output_dir.display()
            );
            Ok(out.errors.iter().map(trial_error).collect())
        }
        Command::Evaluate { results } => {
            let cfg = load_config(cli)?;
            let ds = dataset(&cfg, true)?;
            log_load_report(&ds.report);
            let path = results.clone().unwrap_or_else(|| cfg.output_dir.join("results.csv"));
            let bundle = evaluate(&ds, &load_results(&path)?)?;
            write_report(&bundle, &cfg.output_dir)?;
            print!("{}", render_table(&bundle));
            Ok(Vec::new())
        }
        Command::EvalSaliency { maps, variants, rank, pooled } => {
            let cfg = load_config(cli)?;
            let ds = dataset(&cfg, true)?;
            let maps: Vec<PriorSpec> = if maps.is_empty() {
                available_maps(&ds)
            } else {
                maps.iter().map(|m| PriorSpec::from(m.clone())).collect()
            };
            let variants = if variants.is_empty() { AucVariant::ALL.to_vec() } else { variants.clone() };
            let aggregation = if *pooled { Aggregation::Pooled } else { Aggregation::PerImage };
            let rows = eval_saliency(&ds, &maps, &variants, *rank, aggregation, &cfg)?;
            write_auc_table(&rows, &cfg.output_dir.join("auc.csv"))?;
            print!("{}", render_auc(&cfg.output_dir.join("auc.csv"))?);
            Ok(Vec::new())
        }
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => load_config(cli)?.output_dir,
                (None, None) => PathBuf::from("out"),
            };
            let report = dir.join("report.json");
            let auc = dir.join("auc.csv");
            if !report.exists() && !auc.exists() {
                return Err(Error::File {
                    path: dir,
                    message: "no report.json or auc.csv; run evaluate or eval-saliency first".into(),
                });
            }
            if report.exists() {
                let text = std::fs::read_to_string(&report).map_err(|e| Error::Io { path: report.clone(), source: e })?;
                let bundle: ReportBundle = serde_json::from_str(&text)?;
                print!("{}", render_table(&bundle));
            }
            if auc.exists() {
                print!("{}", render_auc(&auc)?);
            }
            Ok(Vec::new())
        }
    }
}

fn render_auc(path: &Path) -> Result<String, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let mut out = String::new();
    for (n, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Parse { path: path.into(), line: n + 1, message: "expected 5 columns".into() });
        }
        let auc = match cols[3].parse::<f64>() {
            Ok(v) => format!("{v:.4}"),
            Err(_) if n == 0 => cols[3].to_string(),
            Err(_) => "n/a".into(),
        };
        out.push_str(&format!("{:<16} {:<11} {:>5} {:>8} {:>7}\n", cols[0], cols[1], cols[2], auc, cols[4]));
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(errors) if errors.is_empty() => ExitCode::SUCCESS,
        Ok(errors) => fail(errors),
        Err(e) => fail(vec![json!({ "kind": kind(&e), "message": e.to_string() })]),
    }
}
