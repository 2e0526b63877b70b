mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hwe_rms::alternatives::{
    common_allele_fitness, inbreeding_distribution, preset_theta, selection_distribution, FitnessMatrix,
};
use hwe_rms::analysis::{common_allele_sweep, discrepancy_profile, PowerStudy, ProfileKind, Scenario};
use hwe_rms::dataset::load_dataset;
use hwe_rms::genotype::cell_pair;
use hwe_rms::report::{to_record, write_records};
use hwe_rms::{hwe_distribution, Mode, MonteCarlo, PValueResult, StatisticKind, ThetaVector};

use config::{AlternativeConfig, RunConfig};

#[derive(Parser)]
#[command(name = "hwe-rms", version, about = "Monte-Carlo goodness-of-fit tests for Hardy-Weinberg equilibrium")]
struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: $HWE_RMS_WORKERS, then all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// p-values of every requested statistic for one dataset
    Test(TestArgs),
    /// Power and Type I error against an alternative
    Power(PowerArgs),
    /// p-values on the common-allele dataset as the number of alleles grows
    Asymptote(AsymptoteArgs),
    /// Discrepancy by model-count rank against simulated percentiles
    Profile(ProfileArgs),
}

#[derive(Args)]
struct Common {
    /// Comma-separated statistics (X2,G2,H2,L,F) or `all`
    #[arg(long)]
    stats: Option<String>,
    /// plain, conditional or both
    #[arg(long)]
    mode: Option<String>,
    /// Monte-Carlo trials per p-value
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write JSON-lines records here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// Benchmark name (example1, example2, example3) or dataset file
    #[arg(long)]
    data: Option<String>,
    /// Report (exceedances + 1) / (trials + 1)
    #[arg(long)]
    add_one: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PowerArgs {
    /// Comma-separated alternatives `model:preset`, model one of selection,
    /// inbreeding, null and preset 1-4
    #[arg(long)]
    alt: Option<String>,
    /// Fitness of genotypes carrying the first allele
    #[arg(long)]
    w1: Option<f64>,
    /// Inbreeding coefficient
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Datasets simulated per rate
    #[arg(long)]
    sims: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AsymptoteArgs {
    /// Comma-separated numbers of rare alleles
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<usize>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    data: Option<String>,
    /// rms or chi2
    #[arg(long)]
    kind: Option<String>,
    /// Number of simulated datasets
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Common settings after merging flags over the config file.
struct Settings {
    kinds: Vec<StatisticKind>,
    modes: Vec<Mode>,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
}

fn parse_modes(s: &str) -> anyhow::Result<Vec<Mode>> {
    if s.eq_ignore_ascii_case("both") {
        Ok(Mode::BOTH.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

fn settings(c: Common, cfg: &RunConfig, default_trials: u64, default_mode: &str) -> anyhow::Result<Settings> {
    let stats = c.stats.or_else(|| cfg.stats.clone()).unwrap_or_else(|| "all".into());
    let kinds = StatisticKind::parse_list(&stats)?;
    if kinds.is_empty() {
        bail!("no statistics requested");
    }
    let mode = c.mode.or_else(|| cfg.mode.clone()).unwrap_or_else(|| default_mode.into());
    let trials = c.trials.or(cfg.trials).unwrap_or(default_trials);
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    Ok(Settings {
        kinds,
        modes: parse_modes(&mode)?,
        trials,
        seed: c.seed.or(cfg.seed).unwrap_or(1),
        out: c.out.or_else(|| cfg.out.clone()),
    })
}

fn finish(out: Option<PathBuf>, lines: Vec<String>) -> anyhow::Result<()> {
    if let Some(path) = out {
        write_records(&path, &lines)?;
        println!("wrote {} record(s) to {}", lines.len(), path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct TestRecord<'a> {
    dataset: &'a str,
    alleles: usize,
    n: u64,
    #[serde(flatten)]
    result: &'a PValueResult,
}

fn run_test(args: TestArgs, cfg: &RunConfig, workers: Option<usize>) -> anyhow::Result<()> {
    let data = args
        .data
        .or_else(|| cfg.data.clone())
        .ok_or_else(|| anyhow!("--data is required"))?;
    let dataset = load_dataset(&data).with_context(|| format!("cannot load dataset `{data}`"))?;
    let s = settings(args.common, cfg, 100_000, "both")?;
    let table = &dataset.table;
    let mut mc = MonteCarlo::new(s.trials, s.seed).with_add_one(args.add_one || cfg.add_one.unwrap_or(false));
    mc.workers = workers;

    println!(
        "dataset {data}: r = {}, n = {}, trials = {}, seed = {}",
        table.alleles(),
        table.total_draws(),
        s.trials,
        s.seed
    );
    println!("{:<12} {:<4} {:>14} {:>9} {:>21}", "mode", "stat", "statistic", "p", "99% CI");
    let mut lines = Vec::new();
    for &mode in &s.modes {
        for r in mc.run(table, &s.kinds, mode)? {
            println!(
                "{:<12} {:<4} {:>14.6} {:>9.5} [{:.5}, {:.5}]",
                mode.name(),
                r.kind.symbol(),
                r.observed_statistic,
                r.p_value,
                r.ci99.0,
                r.ci99.1
            );
            lines.push(to_record(
                "pvalue",
                &TestRecord {
                    dataset: &data,
                    alleles: table.alleles(),
                    n: table.total_draws(),
                    result: &r,
                },
            )?);
        }
    }
    finish(s.out, lines)
}

fn scenario(spec: &str, alt: &AlternativeConfig, w1: f64, f: f64) -> anyhow::Result<Scenario> {
    let (model, preset) = match spec.split_once(':') {
        Some((m, p)) => (m.trim().to_ascii_lowercase(), Some(p.trim().parse::<u8>().with_context(|| format!("bad preset in `{spec}`"))?)),
        None => (spec.trim().to_ascii_lowercase(), None),
    };
    let (theta, n, origin) = match (preset.or(alt.preset), &alt.theta) {
        (Some(id), _) => {
            let (theta, n) = preset_theta(id)?;
            (theta, alt.n.unwrap_or(n), format!("{id}"))
        }
        (None, Some(theta)) => {
            let n = alt.n.ok_or_else(|| anyhow!("an explicit theta needs n"))?;
            (ThetaVector::new(theta.clone())?, n, "custom".to_string())
        }
        (None, None) => bail!("alternative `{spec}` needs a preset id (e.g. {model}:1) or an explicit theta"),
    };
    let (dist, label) = match model.as_str() {
        "selection" => {
            let w = match &alt.w {
                Some(w) => FitnessMatrix::new(theta.alleles(), w.clone())?,
                None => common_allele_fitness(theta.alleles(), w1)?,
            };
            let label = match alt.w {
                Some(_) => format!("selection:{origin} w=custom"),
                None => format!("selection:{origin} w1={w1}"),
            };
            (selection_distribution(&theta, &w)?, label)
        }
        "inbreeding" => (inbreeding_distribution(&theta, f)?, format!("inbreeding:{origin} f={f}")),
        "null" => (hwe_distribution(&theta), format!("null:{origin}")),
        other => bail!("unknown alternative model `{other}` (expected selection, inbreeding or null)"),
    };
    Ok(Scenario::new(label, theta, n, dist)?)
}

fn run_power(args: PowerArgs, cfg: &RunConfig, workers: Option<usize>) -> anyhow::Result<()> {
    let s = settings(args.common, cfg, 1000, "plain")?;
    let alt_cfg = cfg.alternative.clone().unwrap_or_default();
    let specs = args
        .alt
        .or_else(|| alt_cfg.model.clone())
        .unwrap_or_else(|| "selection:1".into());
    let w1 = args.w1.or(alt_cfg.w1).unwrap_or(1.5);
    let f = args.f.or(alt_cfg.f).unwrap_or(0.1);
    let alpha = args.alpha.or(cfg.alpha).unwrap_or(0.05);
    let sims = args.sims.or(cfg.sims).unwrap_or(1000);

    let mut lines = Vec::new();
    for spec in specs.split(',').filter(|s| !s.trim().is_empty()) {
        let scenario = scenario(spec, &alt_cfg, w1, f)?;
        for &mode in &s.modes {
            let mut study = PowerStudy::new(&s.kinds, alpha, sims, s.trials, mode, s.seed);
            study.workers = workers;
            let report = study.run(&scenario)?;
            println!(
                "{} (n = {}), {} mode, alpha = {}, {} sims x {} trials, seed = {}",
                report.alternative, report.n, mode, alpha, sims, s.trials, s.seed
            );
            println!("  {:<4} {:>7} {:>7}", "stat", "power", "type I");
            for r in &report.rates {
                println!("  {:<4} {:>7.3} {:>7.3}", r.kind.symbol(), r.power, r.type1);
            }
            lines.push(to_record("power", &report)?);
        }
    }
    finish(s.out, lines)
}

fn run_asymptote(args: AsymptoteArgs, cfg: &RunConfig, workers: Option<usize>) -> anyhow::Result<()> {
    let s = settings(args.common, cfg, 100_000, "plain")?;
    let r_values = args
        .r
        .or_else(|| cfg.r.clone())
        .unwrap_or_else(|| vec![8, 16, 32, 64, 128]);
    let mut lines = Vec::new();
    for &mode in &s.modes {
        let curve = common_allele_sweep(&r_values, &s.kinds, s.trials, mode, s.seed, workers)?;
        println!("common-allele sweep, {} mode, trials = {}, seed = {}", mode, s.trials, s.seed);
        print!("  {:>6}", "r");
        for series in &curve.series {
            print!(" {:>8}", series.kind.symbol());
        }
        println!();
        for (i, r) in curve.r_values.iter().enumerate() {
            print!("  {r:>6}");
            for series in &curve.series {
                print!(" {:>8.4}", series.p_values[i]);
            }
            println!();
        }
        lines.push(to_record("sweep", &curve)?);
    }
    finish(s.out, lines)
}

fn run_profile(args: ProfileArgs, cfg: &RunConfig, workers: Option<usize>) -> anyhow::Result<()> {
    let data = args
        .data
        .or_else(|| cfg.data.clone())
        .ok_or_else(|| anyhow!("--data is required"))?;
    let dataset = load_dataset(&data).with_context(|| format!("cannot load dataset `{data}`"))?;
    let kind: ProfileKind = args.kind.or_else(|| cfg.kind.clone()).unwrap_or_else(|| "rms".into()).parse()?;
    let k = args.k.or(cfg.k).unwrap_or(1000);
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    let profile = discrepancy_profile(&dataset.table, kind, k, seed, workers)?;

    let name = |allele: usize| match &dataset.labels {
        Some(labels) => labels[allele].clone(),
        None => format!("A{}", allele + 1),
    };
    println!("profile of {data}: {kind:?}, K = {k}, seed = {seed}");
    if profile.degenerate {
        println!("observed discrepancy is identically zero");
    }
    println!(
        "  {:>4} {:>12} {:>7} {:>10} {:>9}   {:>9} {:>9} {:>9} {:>9} {:>9}",
        "rank", "genotype", "n", "m", "observed", "p1", "p25", "p50", "p75", "p99"
    );
    for (rank, &cell) in profile.ordering.iter().enumerate() {
        let (j, kk) = cell_pair(cell);
        print!(
            "  {:>4} {:>12} {:>7} {:>10.3} {:>9.5}  ",
            rank + 1,
            format!("{{{},{}}}", name(j), name(kk)),
            profile.observed_counts[rank],
            profile.model_counts[rank],
            profile.observed[rank]
        );
        for q in profile.simulated_percentiles[rank] {
            print!(" {q:>9.5}");
        }
        println!();
    }
    let out = args.out.or_else(|| cfg.out.clone());
    finish(out, vec![to_record("profile", &profile)?])
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let workers = cli.workers.or(cfg.workers);
    if workers == Some(0) {
        bail!("workers must be at least 1");
    }
    match cli.command {
        Command::Test(a) => run_test(a, &cfg, workers),
        Command::Power(a) => run_power(a, &cfg, workers),
        Command::Asymptote(a) => run_asymptote(a, &cfg, workers),
        Command::Profile(a) => run_profile(a, &cfg, workers),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
