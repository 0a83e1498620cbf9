//! `ideorec` command-line pipeline: synth → fit → recommend / evaluate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or input error, 3 numerical
//! failure of the ideology fit.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ideorec::graph::write_events;
use ideorec::{
    build_graph, diversify_recommend, evaluate, fit_ideology, holdout_split, parse_events,
    AnchorSet, DiversifyParams, FitOptions, InteractionEvent, ModelFile, SplitSpec, SynthParams,
    WalkParams,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ideorec", version, about = "Ideology-aware diversified recommendation over share graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a polarized synthetic event file with ground truth.
    Synth(SynthArgs),
    /// Fit user and item positions and write a model file.
    Fit(FitArgs),
    /// Recommend items for one user.
    Recommend(RecommendArgs),
    /// Hold out interactions, fit on the rest and report metrics.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    users: usize,
    #[arg(long, default_value_t = 400)]
    items: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    events: PathBuf,
    /// Abort on the first malformed event line instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    anchors: Option<PathBuf>,
    /// Power-iteration seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Model file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.6)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
    #[arg(long, default_value_t = 100)]
    pool: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
}

impl WalkArgs {
    fn walk(&self) -> Result<WalkParams, Failure> {
        let p = WalkParams {
            alpha: self.alpha,
            beta: self.beta,
        };
        p.validate().map_err(usage)?;
        Ok(p)
    }

    fn diversify(&self) -> Result<DiversifyParams, Failure> {
        let p = DiversifyParams {
            lambda: self.lambda,
            tau: self.tau,
            pool_size: self.pool,
            list_size: self.n,
        };
        p.validate().map_err(usage)?;
        Ok(p)
    }
}

#[derive(Args)]
struct RecommendArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    user: String,
    #[command(flatten)]
    walk: WalkArgs,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    anchors: Option<PathBuf>,
    #[arg(long = "holdout-k", default_value_t = 3)]
    holdout_k: usize,
    /// Holdout split seed.
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    diversify: Toggle,
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed run with its exit code and message.
struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

impl From<ideorec::Error> for Failure {
    fn from(e: ideorec::Error) -> Self {
        Failure {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_events(input: &InputArgs) -> Result<Vec<InteractionEvent>, Failure> {
    let parsed = parse_events(BufReader::new(open(&input.events)?), input.strict)?;
    if parsed.skipped > 0 {
        eprintln!("skipped {} malformed event line(s)", parsed.skipped);
    }
    Ok(parsed.events)
}

fn read_anchors(path: Option<&Path>) -> Result<Option<AnchorSet>, Failure> {
    path.map(|p| Ok(AnchorSet::from_csv(open(p)?)?)).transpose()
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let params = SynthParams {
        n_users: args.users,
        n_items: args.items,
        seed: args.seed,
        ..SynthParams::default()
    };
    params.validate().map_err(usage)?;
    let data = ideorec::generate(&params)?;
    let mut out = create(&args.out)?;
    write_events(&mut out, &data.events)?;
    out.flush()?;
    if let Some(path) = &args.truth {
        data.write_truth(create(path)?)?;
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let opts = FitOptions {
        seed: args.seed,
        ..FitOptions::default()
    };
    let events = read_events(&args.input)?;
    let anchors = read_anchors(args.anchors.as_deref())?;
    let graph = build_graph(&events)?;
    let model = fit_ideology(&graph, anchors.as_ref(), &opts)?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &model.to_file(&graph)).map_err(ideorec::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn recommend(args: RecommendArgs) -> Result<(), Failure> {
    let walk = args.walk.walk()?;
    let div = args.walk.diversify()?;
    let events = read_events(&args.input)?;
    let file: ModelFile = serde_json::from_reader(BufReader::new(open(&args.model)?))
        .map_err(ideorec::Error::from)?;
    let graph = build_graph(&events)?;
    let user = graph
        .user_ids()
        .get(&args.user)
        .ok_or_else(|| ideorec::Error::UnknownUser(args.user.clone()))?;
    let model = file.project(&graph);
    let recs = diversify_recommend(&graph, &model, user, &walk, &div)?;
    let mut out = output(args.out.as_deref())?;
    for (rank, r) in recs.iter().enumerate() {
        let record = json!({
            "rank": rank + 1,
            "item": graph.item_ids().id(r.item),
            "score": r.score,
            "phi": r.position.is_finite().then_some(r.position),
            "backfilled": r.backfilled,
        });
        writeln!(out, "{record}")?;
    }
    out.flush()?;
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<(), Failure> {
    let walk = args.walk.walk()?;
    let div = args.walk.diversify()?;
    let spec = SplitSpec {
        k: args.holdout_k,
        seed: args.seed,
    };
    if spec.k < 1 {
        return Err(usage("--holdout-k must be at least 1"));
    }
    let events = read_events(&args.input)?;
    let anchors = read_anchors(args.anchors.as_deref())?;
    let split = holdout_split(&events, &spec)?;
    let train = build_graph(&split.train)?;
    let model = fit_ideology(&train, anchors.as_ref(), &FitOptions::default())?;
    let report = evaluate(
        &train,
        &model,
        &split.test,
        &walk,
        &div,
        matches!(args.diversify, Toggle::On),
        args.walk.n,
    )?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(ideorec::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(args: impl IntoIterator<Item = String>) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(usage(e.render().to_string().trim_end())),
    };
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit(a),
        Command::Recommend(a) => recommend(a),
        Command::Evaluate(a) => evaluate_cmd(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.trim_start_matches("error: "));
            ExitCode::from(f.code)
        }
    }
}
