//! `svrt`: generate benchmark datasets, run the program-synthesis and
//! boosting classifiers, and reproduce the cross-protocol statistics.
//!
//! Exit codes: 0 success, 2 usage error, 3 runtime failure (partial
//! results are preserved).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ConfigMap;
use svrt::agents::{BoostAgent, ChanceAgent, OracleAgent, PsAgent};
use svrt::catalog::{self, GenOpts};
use svrt::parsing::{self, DegradationProfile};
use svrt::rng::Rng;
use svrt::stats::{self, GroupInput, PerfRecord, ProtocolConfig};
use svrt::synth::fit::FitConfig;
use svrt::synth::search::{synthesize, Budget};
use svrt::tables::{published_row, PUBLISHED};

#[derive(Parser)]
#[command(name = "svrt", version, about = "SVRT benchmark generator and classifiers")]
struct Cli {
    /// Worker threads for repetitions (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Experiment config file (key=value sections); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset: images, parsing files and a manifest.
    Gen(GenArgs),
    /// Validate parsing files and print their normalized form.
    Parse { files: Vec<PathBuf> },
    /// Apply a degradation profile to parsing files.
    Degrade(DegradeArgs),
    /// Synthesize a program from training parsing files.
    Synth(SynthArgs),
    /// Train per-category programs and classify test parsing files.
    Classify(ClassifyArgs),
    /// Train and evaluate the AdaBoost baseline on one problem.
    Boost(BoostArgs),
    /// Run classification experiments and write performance reports.
    #[command(alias = "run")]
    Eval(EvalArgs),
    /// Sweep the training-set size and write a learning-curve data file.
    Curve(CurveArgs),
    /// Print the published performance table and the problem-type grid.
    Tables(TablesArgs),
    /// Build a group report from previously written performance CSVs.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    problem: u32,
    #[arg(long)]
    train_pairs: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    canvas: Option<u32>,
    /// Degradation profile for the written parsings
    /// (none|reflection_blind|sasquatch).
    #[arg(long)]
    degrade: Option<String>,
    /// Allow the extension problem #101.
    #[arg(long)]
    ext: bool,
}

#[derive(Args)]
struct DegradeArgs {
    #[arg(long, default_value = "sasquatch")]
    profile: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Training parsing files (one category).
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 512.0)]
    budget_bits: f64,
    #[arg(long, default_value_t = 1000)]
    fit_limit_ms: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, required = true, num_args = 1..)]
    train_pos: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    train_neg: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    test: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    fit_limit_ms: u64,
}

#[derive(Args)]
struct BoostArgs {
    #[arg(long)]
    problem: u32,
    #[arg(long, default_value_t = 10)]
    train_pairs: usize,
    #[arg(long, default_value_t = 80)]
    test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    stumps: usize,
    #[arg(long, default_value = "none")]
    degrade: String,
    /// Write a trained stump model as CSV.
    #[arg(long)]
    dump_model: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// ps | adaboost | chance | oracle
    #[arg(long)]
    agent: Option<String>,
    /// Comma-separated problem ids.
    #[arg(long)]
    problems: Option<String>,
    #[arg(long)]
    train_pairs: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    degrade: Option<String>,
    #[arg(long)]
    stumps: Option<usize>,
    /// Multiply the per-fit time limit (the x10/x100 budget experiment).
    #[arg(long)]
    time_scale: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, default_value = "ps")]
    agent: String,
    #[arg(long)]
    problem: u32,
    /// Comma-separated training-pair counts.
    #[arg(long, default_value = "1,2,3,4,6")]
    t_values: String,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 40)]
    test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "none")]
    degrade: String,
    /// Keep the error bar only on the largest-stderr point, matching the
    /// published plot style.
    #[arg(long)]
    paper_style: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long)]
    problem: Option<u32>,
    /// Print the (SS, LR) type grid instead.
    #[arg(long = "type")]
    type_grid: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// perf.csv files written by `eval`.
    #[arg(long, required = true, num_args = 1..)]
    perf: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Usage errors exit 2, runtime failures exit 3.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigMap::load(path).map_err(usage)?,
        None => ConfigMap::default(),
    };
    match cli.command {
        Command::Gen(args) => cmd_gen(args, &mut cfg),
        Command::Parse { files } => cmd_parse(&files),
        Command::Degrade(args) => cmd_degrade(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Boost(args) => cmd_boost(args),
        Command::Eval(args) => cmd_eval(args, &mut cfg),
        Command::Curve(args) => cmd_curve(args),
        Command::Tables(args) => cmd_tables(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn profile_of(name: &str) -> Result<DegradationProfile, Failure> {
    DegradationProfile::preset(name)
        .ok_or_else(|| usage(anyhow!("unknown degradation profile `{name}`")))
}

fn external_solver() -> Option<PathBuf> {
    std::env::var_os("SVRT_SOLVER").map(PathBuf::from)
}

fn fit_config(limit_ms: u64) -> FitConfig {
    FitConfig {
        time_limit: Duration::from_millis(limit_ms),
        external_solver: external_solver(),
        ..FitConfig::default()
    }
}

/// Flag value if given, else the config file entry, else the default.
fn resolve<T: std::str::FromStr + ToString>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
    default: T,
) -> Result<T, Failure> {
    match flag {
        Some(v) => Ok(v),
        None => match cfg.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|_| usage(anyhow!("config {key}: cannot parse `{raw}`"))),
            None => Ok(default),
        },
    }
}

fn map_catalog_err(e: catalog::CatalogError) -> Failure {
    match e {
        catalog::CatalogError::UnknownProblem(_) | catalog::CatalogError::BadArgs(_) => {
            usage(anyhow!(e))
        }
        other => runtime(anyhow!(other)),
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(args: GenArgs, cfg: &mut ConfigMap) -> Result<(), Failure> {
    let train_pairs = resolve(args.train_pairs, cfg, "gen.train_pairs", 3)?;
    let test = resolve(args.test, cfg, "gen.test", 94)?;
    let seed = resolve(args.seed, cfg, "gen.seed", 1)?;
    let canvas = resolve(args.canvas, cfg, "gen.canvas", catalog::CANVAS_SIZE)?;
    let degrade = resolve(args.degrade, cfg, "gen.degrade", "none".to_string())?;
    for (k, v) in [
        ("gen.problem", args.problem.to_string()),
        ("gen.train_pairs", train_pairs.to_string()),
        ("gen.test", test.to_string()),
        ("gen.seed", seed.to_string()),
        ("gen.canvas", canvas.to_string()),
        ("gen.degrade", degrade.clone()),
    ] {
        cfg.set(k, v);
    }
    let stamp = cfg.stamp();
    let profile = profile_of(&degrade)?;
    let opts = GenOpts { canvas, extension: args.ext };
    let dataset = catalog::make_dataset_opts(args.problem, train_pairs, test, seed, &opts)
        .map_err(map_catalog_err)?;

    // build in a temporary sibling, then swap into place
    let tmp = args.out.with_extension("partial");
    if tmp.exists() {
        std::fs::remove_dir_all(&tmp).map_err(|e| runtime(anyhow!(e)))?;
    }
    let write_tree = || -> Result<()> {
        std::fs::create_dir_all(tmp.join("images"))?;
        std::fs::create_dir_all(tmp.join("parsings"))?;
        let mut manifest = format!("# svrt dataset problem={} {stamp}\n", args.problem);
        manifest.push_str("# file\tcategory\tsplit\tseed\n");
        let mut degrade_rng = Rng::new(seed).derive_str("cli-degrade");
        for (split, items) in [("train", &dataset.train), ("test", &dataset.test)] {
            for item in items {
                let name = format!("{split}_{:03}_{}", item.seed_tag, item.category.label());
                let img = format!("images/{name}.pgm");
                let mut file = std::fs::File::create(tmp.join(&img))?;
                item.canvas.write_pgm(&mut file, &[&stamp])?;
                let p = parsing::legacy_parsing(&item.canvas.truth, &profile, &mut degrade_rng);
                let text = format!("# {stamp}\n{}", parsing::serialize(&p));
                std::fs::write(tmp.join(format!("parsings/{name}.txt")), text)?;
                manifest.push_str(&format!(
                    "{img}\t{}\t{split}\t{}\n",
                    item.category.label(),
                    item.seed_tag
                ));
            }
        }
        std::fs::write(tmp.join("manifest.tsv"), manifest)?;
        Ok(())
    };
    write_tree().map_err(runtime)?;
    if args.out.exists() {
        std::fs::remove_dir_all(&args.out).map_err(|e| runtime(anyhow!(e)))?;
    }
    std::fs::rename(&tmp, &args.out).map_err(|e| runtime(anyhow!(e)))?;
    println!(
        "wrote {} images + parsings to {} ({stamp})",
        dataset.train.len() + dataset.test.len(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// parse / degrade / synth / classify
// ---------------------------------------------------------------------------

fn read_parsing(path: &Path) -> Result<parsing::Parsing, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    parsing::parse(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

fn cmd_parse(files: &[PathBuf]) -> Result<(), Failure> {
    if files.is_empty() {
        return Err(usage(anyhow!("no parsing files given")));
    }
    for path in files {
        let p = read_parsing(path)?;
        println!("# {} ({} shapes)", path.display(), p.len());
        print!("{}", parsing::serialize(&p));
    }
    Ok(())
}

fn cmd_degrade(args: DegradeArgs) -> Result<(), Failure> {
    if args.files.is_empty() {
        return Err(usage(anyhow!("no parsing files given")));
    }
    let profile = profile_of(&args.profile)?;
    std::fs::create_dir_all(&args.out).map_err(|e| runtime(anyhow!(e)))?;
    let mut rng = Rng::new(args.seed).derive_str("degrade");
    for path in &args.files {
        let p = read_parsing(path)?;
        let d = parsing::degrade_parsing(&p, &profile, &mut rng);
        let name = path.file_name().ok_or_else(|| usage(anyhow!("bad path")))?;
        std::fs::write(args.out.join(name), parsing::serialize(&d))
            .map_err(|e| runtime(anyhow!(e)))?;
    }
    println!("degraded {} parsings into {}", args.files.len(), args.out.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    if args.files.is_empty() {
        return Err(usage(anyhow!("no training parsings given")));
    }
    let parsings: Vec<parsing::Parsing> =
        args.files.iter().map(|p| read_parsing(p)).collect::<Result<_, _>>()?;
    let budget = Budget {
        max_cost_bits: args.budget_bits,
        per_fit_time_limit: Duration::from_millis(args.fit_limit_ms),
        ..Budget::default()
    };
    let program = synthesize(&parsings, &budget, &fit_config(args.fit_limit_ms))
        .map_err(|e| runtime(anyhow!(e)))?;
    println!("; cost_bits = {:.2}", program.cost_bits());
    println!("{}", program.sexpr());
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), Failure> {
    let load = |files: &[PathBuf]| -> Result<Vec<parsing::Parsing>, Failure> {
        files.iter().map(|p| read_parsing(p)).collect()
    };
    let pos = load(&args.train_pos)?;
    let neg = load(&args.train_neg)?;
    let cfg = fit_config(args.fit_limit_ms);
    let budget = Budget {
        per_fit_time_limit: Duration::from_millis(args.fit_limit_ms),
        ..Budget::default()
    };
    let synth_side = |ps: &[parsing::Parsing]| -> svrt::synth::Program {
        synthesize(ps, &budget, &cfg).unwrap_or_else(|_| svrt::synth::Program::trivial_accept_all())
    };
    let p_pos = synth_side(&pos);
    let p_neg = synth_side(&neg);
    let mut rng = Rng::new(args.seed).derive_str("classify");
    for path in &args.test {
        let test = read_parsing(path)?;
        let d = svrt::synth::classify(&test, &p_pos, &p_neg, &mut rng, &cfg)
            .map_err(|e| runtime(anyhow!(e)))?;
        println!("{}\t{}\t{:.3}", path.display(), d.category.label(), d.margin);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// boost / eval / curve
// ---------------------------------------------------------------------------

fn cmd_boost(args: BoostArgs) -> Result<(), Failure> {
    let profile = profile_of(&args.degrade)?;
    let cfg = ProtocolConfig {
        train_pairs: args.train_pairs,
        n_test: args.test,
        n_reps: args.reps,
        profile,
    };
    let rec = stats::run_protocol(args.problem, || BoostAgent::new(args.stumps), &cfg, args.seed)
        .map_err(map_stats_err)?;
    println!(
        "adaboost #{}: alpha={:.4} beta_star={:.4} stderr={:.4} ({} stumps, {} reps)",
        args.problem, rec.alpha, rec.beta_star, rec.stderr, args.stumps, args.reps
    );
    if let Some(path) = args.dump_model {
        // train once more on a fresh dataset to expose the model itself
        let ds = catalog::make_dataset(args.problem, args.train_pairs, args.test, args.seed)
            .map_err(map_catalog_err)?;
        let mut agent = BoostAgent::new(args.stumps);
        let mut rng = Rng::new(args.seed).derive_str("dump");
        let mut drng = rng.derive(1);
        let train: Vec<stats::TrainExample> = ds
            .train
            .iter()
            .map(|i| stats::TrainExample {
                parsing: parsing::legacy_parsing(&i.canvas.truth, &cfg.profile, &mut drng),
                category: i.category,
            })
            .collect();
        use svrt::stats::Agent as _;
        agent.train(&train, &mut rng).map_err(map_stats_err)?;
        let csv = agent.model_csv().ok_or_else(|| runtime(anyhow!("model missing")))?;
        let mut stamp_cfg = ConfigMap::default();
        stamp_cfg.set("boost.problem", args.problem);
        stamp_cfg.set("boost.seed", args.seed);
        stamp_cfg.set("boost.stumps", args.stumps);
        stamp_cfg.set("boost.degrade", &args.degrade);
        let text = format!("# {}\n{csv}", stamp_cfg.stamp());
        std::fs::write(&path, text).map_err(|e| runtime(anyhow!(e)))?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

fn map_stats_err(e: stats::StatsError) -> Failure {
    match e {
        stats::StatsError::BadArgs(_) | stats::StatsError::Domain(_) => usage(anyhow!(e)),
        stats::StatsError::Catalog(c) => map_catalog_err(c),
        other => runtime(anyhow!(other)),
    }
}

fn parse_id_list(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| usage(anyhow!("bad problem id `{t}`"))))
        .collect()
}

fn run_agent_protocol(
    agent: &str,
    problem: u32,
    cfg: &ProtocolConfig,
    seed: u64,
    stumps: usize,
    time_scale: u32,
) -> Result<PerfRecord, stats::StatsError> {
    match agent {
        "ps" => {
            let fit_cfg = fit_config(1000 * time_scale as u64);
            let budget = Budget {
                per_fit_time_limit: fit_cfg.time_limit,
                wall_clock: Duration::from_secs(120 * time_scale as u64),
                ..Budget::default()
            };
            stats::run_protocol(problem, || PsAgent::new(budget.clone(), fit_cfg.clone()), cfg, seed)
        }
        "adaboost" => stats::run_protocol(problem, || BoostAgent::new(stumps), cfg, seed),
        "chance" => stats::run_protocol(problem, ChanceAgent::new, cfg, seed),
        "oracle" => stats::run_protocol(problem, || OracleAgent::new(problem), cfg, seed),
        other => Err(stats::StatsError::BadArgs(format!("unknown agent `{other}`"))),
    }
}

fn cmd_eval(args: EvalArgs, cfg_map: &mut ConfigMap) -> Result<(), Failure> {
    let agent = resolve(args.agent, cfg_map, "eval.agent", "ps".to_string())?;
    let problems_raw = resolve(args.problems, cfg_map, "eval.problems", "1".to_string())?;
    let train_pairs = resolve(args.train_pairs, cfg_map, "eval.train_pairs", 3)?;
    let test = resolve(args.test, cfg_map, "eval.test", 94)?;
    let reps = resolve(args.reps, cfg_map, "eval.reps", 40)?;
    let seed = resolve(args.seed, cfg_map, "eval.seed", 1)?;
    let degrade = resolve(args.degrade, cfg_map, "eval.degrade", "none".to_string())?;
    let stumps = resolve(args.stumps, cfg_map, "eval.stumps", 10_000)?;
    let time_scale = resolve(args.time_scale, cfg_map, "eval.time_scale", 1)?;
    let problems = parse_id_list(&problems_raw)?;
    if problems.is_empty() {
        return Err(usage(anyhow!("no problems given")));
    }
    for (k, v) in [
        ("eval.agent", agent.clone()),
        ("eval.problems", problems_raw.clone()),
        ("eval.train_pairs", train_pairs.to_string()),
        ("eval.test", test.to_string()),
        ("eval.reps", reps.to_string()),
        ("eval.seed", seed.to_string()),
        ("eval.degrade", degrade.clone()),
        ("eval.stumps", stumps.to_string()),
        ("eval.time_scale", time_scale.to_string()),
    ] {
        cfg_map.set(k, v);
    }
    let stamp = cfg_map.stamp();
    let profile = profile_of(&degrade)?;
    let cfg = ProtocolConfig { train_pairs, n_test: test, n_reps: reps, profile };

    let mut records: Vec<PerfRecord> = Vec::new();
    let mut failure: Option<Failure> = None;
    for &problem in &problems {
        match run_agent_protocol(&agent, problem, &cfg, seed, stumps, time_scale) {
            Ok(rec) => {
                println!(
                    "{agent} #{problem}: alpha={:.4} beta_star={:.4} stderr={:.4}",
                    rec.alpha, rec.beta_star, rec.stderr
                );
                records.push(rec);
            }
            Err(stats::StatsError::BadArgs(m)) => return Err(usage(anyhow!(m))),
            Err(e) => {
                eprintln!("agent failed on #{problem}: {e}");
                failure = Some(runtime(anyhow!(e)));
                break;
            }
        }
    }

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| runtime(anyhow!(e)))?;
        let perf = format!("# {stamp}\n{}", stats::perf_csv(&records));
        std::fs::write(dir.join("perf.csv"), perf).map_err(|e| runtime(anyhow!(e)))?;
        let inputs: Vec<GroupInput> = records.iter().map(GroupInput::from).collect();
        let report = stats::group_report(&inputs, &stats::human_records());
        let group = format!("# {stamp}\n{}", report.to_csv());
        std::fs::write(dir.join("group.csv"), group).map_err(|e| runtime(anyhow!(e)))?;
        println!("reports written to {}", dir.display());
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn cmd_curve(args: CurveArgs) -> Result<(), Failure> {
    let t_values: Vec<usize> = args
        .t_values
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(anyhow!("bad t value `{t}`"))))
        .collect::<Result<_, _>>()?;
    let mut stamp_cfg = ConfigMap::default();
    for (k, v) in [
        ("curve.agent", args.agent.clone()),
        ("curve.problem", args.problem.to_string()),
        ("curve.t_values", args.t_values.clone()),
        ("curve.reps", args.reps.to_string()),
        ("curve.test", args.test.to_string()),
        ("curve.seed", args.seed.to_string()),
        ("curve.degrade", args.degrade.clone()),
    ] {
        stamp_cfg.set(k, v);
    }
    let profile = profile_of(&args.degrade)?;
    let cfg =
        ProtocolConfig { train_pairs: 3, n_test: args.test, n_reps: args.reps, profile };
    let points = match args.agent.as_str() {
        "ps" => {
            stats::learning_curve(args.problem, PsAgent::with_defaults, &t_values, &cfg, args.seed)
        }
        "adaboost" => stats::learning_curve(
            args.problem,
            || BoostAgent::new(1000),
            &t_values,
            &cfg,
            args.seed,
        ),
        "chance" => {
            stats::learning_curve(args.problem, ChanceAgent::new, &t_values, &cfg, args.seed)
        }
        "oracle" => stats::learning_curve(
            args.problem,
            || OracleAgent::new(args.problem),
            &t_values,
            &cfg,
            args.seed,
        ),
        other => return Err(usage(anyhow!("unknown agent `{other}`"))),
    }
    .map_err(map_stats_err)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| runtime(anyhow!(e)))?;
        }
    }
    let body = stats::curve_data_styled(args.problem, &args.agent, &points, args.paper_style);
    let text = format!("# {}\n{body}", stamp_cfg.stamp());
    std::fs::write(&args.out, text).map_err(|e| runtime(anyhow!(e)))?;
    println!("curve written to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// tables / report
// ---------------------------------------------------------------------------

fn cmd_tables(args: TablesArgs) -> Result<(), Failure> {
    if args.type_grid {
        println!("problem\tss\tlr");
        for &(id, ss, lr) in &catalog::PROBLEM_TYPES {
            println!("{id}\t{ss}\t{lr}");
        }
        return Ok(());
    }
    if let Some(id) = args.problem {
        let row = published_row(id)
            .ok_or_else(|| usage(anyhow!(catalog::CatalogError::UnknownProblem(id))))?;
        let t = catalog::ss_lr(id).map_err(map_catalog_err)?;
        println!("problem {id} (ss={}, lr={})", t.ss, t.lr);
        println!("  human beta        = {:.4}", row.human);
        println!("  ps sasquatch b*   = {:.4}", row.ps_sasquatch);
        println!("  ps corrected b*   = {:.4}", row.ps_corrected);
        println!("  best cnn b*       = {:.4}", row.cnn_best);
        println!("  lenet alpha       = {}", opt(row.lenet));
        println!("  googlenet alpha   = {}", opt(row.googlenet));
        println!("  vanilla cnn alpha = {:.3}", row.vanilla);
        return Ok(());
    }
    println!(
        "problem\thuman\tps_sasquatch\tps_corrected\tcnn_best\tlenet\tgooglenet\tvanilla\tss\tlr"
    );
    for row in &PUBLISHED {
        let t = catalog::ss_lr(row.problem_id).map_err(map_catalog_err)?;
        println!(
            "{}\t{:.2}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{:.3}\t{}\t{}",
            row.problem_id,
            row.human,
            row.ps_sasquatch,
            row.ps_corrected,
            row.cnn_best,
            opt(row.lenet),
            opt(row.googlenet),
            row.vanilla,
            t.ss,
            t.lr
        );
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.2}"),
        None => "N/A".into(),
    }
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let mut inputs: Vec<GroupInput> = Vec::new();
    for path in &args.perf {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(usage)?;
        let mut saw_header = false;
        for line in text.lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if !saw_header {
                saw_header = true; // column header row
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 4 {
                return Err(usage(anyhow!("{}: malformed row `{line}`", path.display())));
            }
            let problem_id: u32 =
                cols[0].parse().map_err(|_| usage(anyhow!("bad problem id `{}`", cols[0])))?;
            let beta_star: f64 =
                cols[3].parse().map_err(|_| usage(anyhow!("bad beta_star `{}`", cols[3])))?;
            inputs.push(GroupInput { problem_id, beta_star });
        }
    }
    let report = stats::group_report(&inputs, &stats::human_records());
    let mut stamp_cfg = ConfigMap::default();
    for (i, p) in args.perf.iter().enumerate() {
        stamp_cfg.set(&format!("report.perf{i}"), p.display());
    }
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| runtime(anyhow!(e)))?;
        }
    }
    let text = format!("# {}\n{}", stamp_cfg.stamp(), report.to_csv());
    std::fs::write(&args.out, text).map_err(|e| runtime(anyhow!(e)))?;
    println!("group report written to {}", args.out.display());
    Ok(())
}
