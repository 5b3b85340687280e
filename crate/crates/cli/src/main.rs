use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use datasel::commands::{self, CommandError, GeneratorSpec, Inputs, Method, RunConfig};
use datasel::corpus::Task;
use datasel::selection::{RepresentationKind, Strategy};
use datasel::similarity::Metric;

#[derive(Parser)]
#[command(name = "datasel", version, about = "Training-data selection for multi-domain sentiment classification")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a training set for one target domain.
    Select(RunArgs),
    /// Evaluate methods against the rand and all baselines.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Evaluate every strategy x representation combination.
        #[arg(long)]
        grid: bool,
    },
    /// Accuracy as a function of the training-set size.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated ascending training-set sizes.
        #[arg(long, value_delimiter = ',')]
        n_values: Vec<usize>,
    },
    /// Write synthetic corpora as JSONL, one file per domain.
    Generate {
        /// Write the built-in scenarios (graded and blended).
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        catalog: bool,
        /// TOML generator spec with a [target] table and [[sources]] tables.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Target domain (repeatable; "all" for every domain).
    #[arg(short, long)]
    target: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    representation: Option<RepresentationKind>,
    #[arg(long)]
    metric: Option<Metric>,
    /// Method as strategy[:representation[:metric]] (repeatable).
    #[arg(long = "method")]
    methods: Vec<Method>,
    #[arg(short, long)]
    n: Option<usize>,
    /// Subset size.
    #[arg(short, long)]
    s: Option<usize>,
    /// Candidate subsets per iteration.
    #[arg(short, long)]
    m: Option<usize>,
    #[arg(long)]
    proxy_subset: bool,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    ae_hidden: Option<usize>,
    #[arg(long)]
    ae_epochs: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CommandError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { c.$($field).+ = v.into(); })*
            };
        }
        set! {
            corpus => corpus,
            output => output,
            task => task,
            embeddings => embeddings,
            stopwords => stopwords,
            strategy => selection.strategy,
            representation => selection.representation,
            metric => selection.metric,
            n => selection.n,
            s => selection.s,
            m => selection.m,
            runs => runs,
            seed => seed,
            vocab_size => vocab_size,
            ae_hidden => autoencoder.hidden,
            ae_epochs => autoencoder.epochs,
        }
        if self.representation.is_some() && self.metric.is_none() {
            c.selection.metric = None;
        }
        if !self.target.is_empty() {
            c.targets = self.target;
        }
        if !self.methods.is_empty() {
            c.methods = self.methods;
        }
        if self.proxy_subset {
            c.selection.proxy_subset = true;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Select(args) => {
            let inputs = Inputs::load(args.into_config()?)?;
            let report = commands::cmd_select(&inputs)?;
            eprintln!(
                "selected {} documents for {} into {}",
                report.result.chosen.len(),
                report.target,
                inputs.config.output.display()
            );
        }
        Command::Evaluate { run, grid } => {
            let mut config = run.into_config()?;
            config.grid |= grid;
            let inputs = Inputs::load(config)?;
            let report = commands::cmd_evaluate(&inputs)?;
            let rows: usize = report.targets.iter().map(|t| t.rows.len()).sum();
            eprintln!("wrote {rows} result rows to {}", inputs.config.output.join("results.tsv").display());
        }
        Command::Sweep { run, n_values } => {
            let mut config = run.into_config()?;
            if !n_values.is_empty() {
                config.sweep_n = n_values;
            }
            let inputs = Inputs::load(config)?;
            let report = commands::cmd_sweep(&inputs)?;
            eprintln!("wrote {} sweep rows to {}", report.rows.len(), inputs.config.output.join("sweep.tsv").display());
        }
        Command::Generate { catalog, spec, output, seed } => {
            let written = if catalog {
                commands::cmd_generate_catalog(&output, seed.unwrap_or(0))?
            } else {
                let path = spec.expect("clap requires --spec without --catalog");
                let mut spec = GeneratorSpec::load(&path)?;
                if let Some(seed) = seed {
                    spec = spec.with_seed(seed);
                }
                commands::cmd_generate(&spec, &output)?
            };
            eprintln!("wrote {} corpus files under {}", written.len(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
