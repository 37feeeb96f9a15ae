//! Command-line front end for minimal-class model search.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::error::{exit, CliError, CliResult};

#[derive(Parser)]
#[command(name = "modelclass", version, about = "Search for minimal classes of near-optimal linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validated Lasso or Elastic Net fit.
    Fit(FitArgs),
    /// Predictor scores from the Lasso, the Elastic Net and the reduced-penalty path.
    Score(ScoreArgs),
    /// Multi-start annealing search; writes the model pool.
    Search(SearchArgs),
    /// Minimal classes, unique counts and co-occurrence from a pool.
    Report(ReportArgs),
    /// Recovery study on simulated data.
    Simulate(SimulateArgs),
    /// Score, search and report in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct Common {
    /// key=value settings file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; drawn from system entropy when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long)]
    response: Option<String>,
    /// Comma separated subset of log,sqrt,square,interactions.
    #[arg(long)]
    expand: Option<String>,
    /// unit-variance (divisor n-1) or unit-mean-square (divisor n).
    #[arg(long)]
    normalization: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// Fixed penalty level; cross-validated when omitted.
    #[arg(long)]
    lambda: Option<f64>,
    /// Mixing weight of the l1 term, 1 for the Lasso.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    cv_folds: Option<usize>,
}

#[derive(Args)]
struct ScoringFlags {
    /// Elastic Net mixing weight.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    cv_folds: Option<usize>,
    /// Number of equal steps in the reduced-penalty grid.
    #[arg(long)]
    delta_steps: Option<usize>,
}

#[derive(Args)]
struct SearchFlags {
    /// Model sizes, e.g. 4,5,6 or 1..10.
    #[arg(long)]
    kappa: Option<String>,
    /// Chains per size.
    #[arg(long)]
    starts: Option<usize>,
    /// Temperatures scale·ratio^k for k = 1..count, as scale:ratio:count.
    #[arg(long)]
    temps_geometric: Option<String>,
    /// Iterations per temperature.
    #[arg(long)]
    iters: Option<usize>,
    /// Record every proposed model (all) or only accepted ones (accepted).
    #[arg(long)]
    record: Option<String>,
}

#[derive(Args)]
struct ReportFlags {
    /// Class width; overrides the factor times the noise estimate.
    #[arg(long)]
    eta: Option<f64>,
    /// Class width as a multiple of the noise variance estimate.
    #[arg(long)]
    eta_factor: Option<f64>,
    /// Models listed per size: a count or "all".
    #[arg(long)]
    keep: Option<String>,
    /// Minimum share of class models for the co-occurrence matrix.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    scoring: ScoringFlags,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    scoring: ScoringFlags,
    #[command(flatten)]
    search: SearchFlags,
    /// Scores from `score`; computed from the data when omitted.
    #[arg(long)]
    gamma_file: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    report: ReportFlags,
    /// Pool written by `search`.
    #[arg(long)]
    pool: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[command(flatten)]
    search: SearchFlags,
    /// Output CSV; the text table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    scoring: ScoringFlags,
    #[command(flatten)]
    search: SearchFlags,
    #[command(flatten)]
    report: ReportFlags,
}

type Overrides = Vec<(&'static str, Option<String>)>;

fn s<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn path(v: &Option<PathBuf>) -> Option<String> {
    v.as_ref().map(|p| p.display().to_string())
}

impl Common {
    fn overrides(&self) -> Overrides {
        vec![("run.seed", s(&self.seed)), ("run.threads", s(&self.threads))]
    }
}

impl DataArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("io.input", path(&self.input)),
            ("io.response", self.response.clone()),
            ("core.expand", self.expand.clone()),
            ("core.normalization", self.normalization.clone()),
            ("io.out", path(&self.out)),
        ]
    }
}

impl ScoringFlags {
    fn overrides(&self) -> Overrides {
        vec![
            ("scoring.alpha", s(&self.alpha)),
            ("solver.cv_folds", s(&self.cv_folds)),
            ("scoring.delta_steps", s(&self.delta_steps)),
        ]
    }
}

impl SearchFlags {
    fn overrides(&self) -> Overrides {
        vec![
            ("search.kappa", self.kappa.clone()),
            ("search.starts", s(&self.starts)),
            ("search.temps", self.temps_geometric.clone()),
            ("search.iters", s(&self.iters)),
            ("search.record", self.record.clone()),
        ]
    }
}

impl ReportFlags {
    fn overrides(&self) -> Overrides {
        vec![
            ("minclass.eta", s(&self.eta)),
            ("minclass.eta_factor", s(&self.eta_factor)),
            ("minclass.keep", self.keep.clone()),
            ("minclass.threshold", s(&self.threshold)),
        ]
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Fit(_) => "fit",
            Command::Score(_) => "score",
            Command::Search(_) => "search",
            Command::Report(_) => "report",
            Command::Simulate(_) => "simulate",
            Command::Pipeline(_) => "pipeline",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Fit(a) => &a.common,
            Command::Score(a) => &a.common,
            Command::Search(a) => &a.common,
            Command::Report(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Pipeline(a) => &a.common,
        }
    }

    fn overrides(&self) -> Overrides {
        let mut o = self.common().overrides();
        match self {
            Command::Fit(a) => {
                o.extend(a.data.overrides());
                o.extend([
                    ("solver.lambda", s(&a.lambda)),
                    ("solver.alpha", s(&a.alpha)),
                    ("solver.cv_folds", s(&a.cv_folds)),
                ]);
            }
            Command::Score(a) => {
                o.extend(a.data.overrides());
                o.extend(a.scoring.overrides());
            }
            Command::Search(a) => {
                o.extend(a.data.overrides());
                o.extend(a.scoring.overrides());
                o.extend(a.search.overrides());
                o.push(("scoring.gamma_file", path(&a.gamma_file)));
            }
            Command::Report(a) => {
                o.extend(a.data.overrides());
                o.extend(a.report.overrides());
                o.push(("minclass.pool", path(&a.pool)));
            }
            Command::Simulate(a) => {
                o.extend([
                    ("simulation.p", a.p.clone()),
                    ("simulation.snr", a.snr.clone()),
                    ("simulation.n", s(&a.n)),
                    ("simulation.replicates", s(&a.replicates)),
                    ("io.out", path(&a.out)),
                ]);
                o.extend(a.search.overrides());
            }
            Command::Pipeline(a) => {
                o.extend(a.data.overrides());
                o.extend(a.scoring.overrides());
                o.extend(a.search.overrides());
                o.extend(a.report.overrides());
            }
        }
        o
    }

    fn settings(&self) -> CliResult<Settings> {
        let mut st = Settings::defaults();
        if self.name() == "simulate" {
            st.set("io.out", "recovery.csv")?;
        }
        if let Some(p) = &self.common().config {
            st.load_file(p, self.name())?;
        }
        for (k, v) in self.overrides() {
            if let Some(v) = v {
                st.set(k, v)?;
            }
        }
        if !st.is_set("run.seed") {
            st.set("run.seed", rand::random::<u64>().to_string())?;
        }
        Ok(st)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = cli.command.settings()?;
    if let Some(t) = settings.opt::<usize>("run.threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    commands::dispatch(cli.command.name(), &settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
