use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use txego::synth::{self, ArchetypeParams, CohortTally};
use txego::temporal::{life_cycle, phase_features, phase_windows, WindowMode};
use txego::tx::{ingest_labels, ingest_transactions, write_labels_csv, AccountLabel};
use txego::{
    analyze_cohort, build_ego_network, emit_reports, local_clustering_coefficient, TransactionSet,
};

/// Transaction ego network analytics.
#[derive(Parser)]
#[command(name = "txego", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a labeled cohort and write per-label reports
    Analyze(AnalyzeArgs),
    /// Generate a synthetic cohort with its ground-truth tally
    Generate(GenerateArgs),
    /// Print one account's ego network features as CSV
    Ego(EgoArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sliding,
    Incremental,
    Both,
}

/// Worker-count flag value: a positive integer or `auto`.
#[derive(Clone, Copy)]
enum WorkersArg {
    Auto,
    Count(NonZeroUsize),
}

impl std::str::FromStr for WorkersArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(WorkersArg::Auto);
        }
        s.parse()
            .map(WorkersArg::Count)
            .map_err(|_| format!("expected a positive integer or `auto`, got `{s}`"))
    }
}

impl ModeArg {
    fn modes(self) -> Vec<WindowMode> {
        match self {
            ModeArg::Sliding => vec![WindowMode::Sliding],
            ModeArg::Incremental => vec![WindowMode::Incremental],
            ModeArg::Both => vec![WindowMode::Sliding, WindowMode::Incremental],
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Transactions CSV (from,to,value,timestamp)
    #[arg(long, value_name = "FILE")]
    tx: PathBuf,
    /// Labels CSV (address,label)
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Directory for the report files
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Windowing scheme for the phase tables
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Keep zero-value transfers (the default)
    #[arg(long, conflicts_with = "drop_zero_value")]
    keep_zero_value: bool,
    /// Drop zero-value transfers before analysis
    #[arg(long)]
    drop_zero_value: bool,
    /// Worker threads: a count or `auto` (default: EGONET_WORKERS, then all cores)
    #[arg(long, value_name = "N")]
    workers: Option<WorkersArg>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory for transactions.csv, labels.csv, and tally.json
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Label preset to draw from
    #[arg(long)]
    label: AccountLabel,
    /// Number of egos in the cohort
    #[arg(long)]
    egos: u32,
    /// Base seed for the cohort
    #[arg(long)]
    seed: u64,
    /// Preset override, repeatable (e.g. --param n_alters=40)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    param: Vec<String>,
}

#[derive(Args)]
struct EgoArgs {
    /// Transactions CSV (from,to,value,timestamp)
    #[arg(long, value_name = "FILE")]
    tx: PathBuf,
    /// Account to report on
    #[arg(long)]
    address: String,
    /// Windowing scheme for the phase rows
    #[arg(long, value_enum, default_value_t = ModeArg::Sliding)]
    mode: ModeArg,
}

enum Failure {
    Usage(anyhow::Error),
    Input(anyhow::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, err) = match self {
            Failure::Usage(err) => (2, err),
            Failure::Input(err) => (1, err),
        };
        eprintln!("error: {err:#}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Ego(args) => cmd_ego(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}

fn read_transactions(path: &Path, drop_zero_value: bool) -> anyhow::Result<TransactionSet> {
    let file = File::open(path).with_context(|| format!("cannot open `{}`", path.display()))?;
    let txs = ingest_transactions(BufReader::new(file))
        .with_context(|| format!("cannot read `{}`", path.display()))?;
    Ok(if drop_zero_value {
        txs.without_zero_value()
    } else {
        txs
    })
}

fn read_labels(path: &Path) -> anyhow::Result<BTreeMap<String, AccountLabel>> {
    let file = File::open(path).with_context(|| format!("cannot open `{}`", path.display()))?;
    ingest_labels(BufReader::new(file)).with_context(|| format!("cannot read `{}`", path.display()))
}

/// `--workers` wins over `EGONET_WORKERS`; unset or `auto` means one
/// thread per core (rayon's zero).
fn resolve_workers(flag: Option<WorkersArg>) -> usize {
    match flag {
        Some(WorkersArg::Auto) => return 0,
        Some(WorkersArg::Count(n)) => return n.get(),
        None => {}
    }
    match std::env::var("EGONET_WORKERS") {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                log::warn!("ignoring EGONET_WORKERS=`{value}`: not a positive integer");
                0
            }
        },
        Err(_) => 0,
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(args.workers))
        .build()
        .map_err(|e| Failure::Input(anyhow!(e).context("cannot start worker pool")))?;
    let txs = read_transactions(&args.tx, args.drop_zero_value).map_err(Failure::Input)?;
    let labels = read_labels(&args.labels).map_err(Failure::Input)?;
    let summaries = pool
        .install(|| analyze_cohort(&txs, &labels, &args.mode.modes()))
        .map_err(|e| Failure::Input(anyhow!(e)))?;
    let written = emit_reports(&summaries, &args.out).map_err(|e| Failure::Input(anyhow!(e)))?;
    let mut stdout = io::stdout().lock();
    for path in &written {
        writeln!(stdout, "{}", path.display()).map_err(|e| Failure::Input(anyhow!(e)))?;
    }
    Ok(())
}

fn apply_param(params: &mut ArchetypeParams, spec: &str) -> anyhow::Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("expected KEY=VALUE, got `{spec}`"))?;
    macro_rules! set {
        ($field:ident) => {
            params.$field = value
                .parse()
                .map_err(|e| anyhow!("invalid value `{value}` for `{key}`: {e}"))?
        };
    }
    match key {
        "n_alters" => set!(n_alters),
        "n_transactions" => set!(n_transactions),
        "in_fraction" => set!(in_fraction),
        "alter_link_prob" => set!(alter_link_prob),
        "lifespan_days" => set!(lifespan_days),
        "amount_scale" => set!(amount_scale),
        "temporal_profile" => set!(temporal_profile),
        "start_time" => set!(start_time),
        other => return Err(anyhow!("unknown parameter `{other}`")),
    }
    Ok(())
}

fn create_output_file(dir: &Path, name: &str) -> anyhow::Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let file =
        File::create(&path).with_context(|| format!("cannot write `{}`", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut params = synth::preset(args.label).map_err(|e| Failure::Usage(anyhow!(e)))?;
    params.seed = args.seed;
    for spec in &args.param {
        apply_param(&mut params, spec).map_err(Failure::Usage)?;
    }
    let cohort =
        synth::generate_cohort(&params, args.egos).map_err(|e| Failure::Usage(anyhow!(e)))?;

    let mut records = Vec::new();
    let mut labels = BTreeMap::new();
    for trace in &cohort {
        records.extend(trace.records.iter().cloned());
        labels.insert(trace.ego.clone(), trace.label);
    }
    let set = TransactionSet::from_records(records);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create `{}`", args.out.display()))
        .map_err(Failure::Input)?;
    let write = |name: &str, contents: &dyn Fn(&mut BufWriter<File>) -> anyhow::Result<()>| {
        let (path, mut out) = create_output_file(&args.out, name).map_err(Failure::Input)?;
        contents(&mut out)
            .and_then(|()| out.flush().map_err(Into::into))
            .with_context(|| format!("cannot write `{}`", path.display()))
            .map_err(Failure::Input)?;
        Ok(path)
    };
    let tx_path = write("transactions.csv", &|out| Ok(set.write_csv(out)?))?;
    let labels_path = write("labels.csv", &|out| Ok(write_labels_csv(&labels, out)?))?;
    let tally = CohortTally::from_traces(args.label, args.seed, &cohort);
    let tally_path = write("tally.json", &|out| {
        serde_json::to_writer_pretty(&mut *out, &tally)?;
        Ok(writeln!(out)?)
    })?;

    let mut stdout = io::stdout().lock();
    for path in [&tx_path, &labels_path, &tally_path] {
        writeln!(stdout, "{}", path.display()).map_err(|e| Failure::Input(anyhow!(e)))?;
    }
    Ok(())
}

fn cmd_ego(args: EgoArgs) -> Result<(), Failure> {
    let txs = read_transactions(&args.tx, false).map_err(Failure::Input)?;
    let life = life_cycle(&args.address, &txs).map_err(|e| Failure::Input(anyhow!(e)))?;
    let net = build_ego_network(&args.address, &txs);
    let tau = local_clustering_coefficient(&net);

    let mut out = io::stdout().lock();
    let mut print = |line: String| -> Result<(), Failure> {
        writeln!(out, "{line}").map_err(|e| Failure::Input(anyhow!(e)))
    };
    print("field,value".to_owned())?;
    print(format!("address,{}", args.address))?;
    print(format!("alters,{}", net.alter_count()))?;
    print(format!("tau,{tau:.6}"))?;
    print(format!("first,{}", life.first()))?;
    print(format!("last,{}", life.last()))?;
    print(format!("span_days,{:.6}", life.span_days()))?;
    print(String::new())?;
    print("mode,phase,in_count,out_count,in_ratio,out_ratio,in_amount,out_amount".to_owned())?;
    for mode in args.mode.modes() {
        for f in phase_features(&net, &phase_windows(&life, mode)) {
            print(format!(
                "{mode},{},{},{},{:.6},{:.6},{},{}",
                f.index,
                f.in_count,
                f.out_count,
                f.in_ratio(),
                f.out_ratio(),
                f.in_amount,
                f.out_amount
            ))?;
        }
    }
    Ok(())
}
