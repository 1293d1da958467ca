use std::path::PathBuf;
use std::process::ExitCode;

use bct_cli::{
    run, CliError, Command, Drafting, ErrorDocument, ExactMethod, GenOptions, Plan, RunConfig,
    Threads,
};
use clap::{Args, Parser, Subcommand};

/// Count 0-1 matrices with prescribed row and column sums.
#[derive(Parser)]
#[command(name = "bct", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Base seed; replication `i` uses stream `(seed, i)`.
    #[arg(long, global = true, env = "BCT_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads: `auto` or a positive integer.
    #[arg(long, global = true, default_value = "auto")]
    threads: Threads,

    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Sequential importance sampling estimate of the count.
    Estimate {
        instance: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Exact count.
    Exact {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ExactMethod::Dp)]
        method: ExactMethod,
    },
    /// Asymptotic approximation of the count.
    Approx { instance: PathBuf },
    /// Feasibility and regime diagnostics.
    Validate { instance: PathBuf },
    /// Generate a random feasible instance.
    Gen(Gen),
    /// Exact count, approximation and sampler side by side.
    Compare {
        instance: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Args)]
struct Sampling {
    /// Replications for `--plan fixed`.
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// Relative accuracy target for planned runs.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Failure probability for planned runs.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Plan::Fixed)]
    plan: Plan,
    /// Pilot replications used to plan the run.
    #[arg(long, default_value_t = 1000)]
    pilot: u64,
    /// Upper limit on planned replications.
    #[arg(long, default_value_t = 10_000_000)]
    max_reps: u64,
    /// Level of the reported confidence interval.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[arg(long, value_enum, default_value_t = Drafting::LeaveOneOut)]
    drafting: Drafting,
}

#[derive(Args)]
struct Gen {
    /// Number of rows.
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Row sums are uniform on `1..=r-max`.
    #[arg(long, default_value_t = 3)]
    r_max: usize,
    /// Column sums are capped at `ceil(d^cap-exponent)`.
    #[arg(long, default_value_t = 0.5)]
    cap_exponent: f64,
    /// Absolute column-sum cap.
    #[arg(long)]
    max_col: Option<usize>,
    /// Also write the instance file here.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let (command, instance, sampling, exact_method, gen) = match self.command {
            Sub::Estimate { instance, sampling } => (
                Command::Estimate,
                Some(instance),
                Some(sampling),
                None,
                None,
            ),
            Sub::Exact { instance, method } => {
                (Command::Exact, Some(instance), None, Some(method), None)
            }
            Sub::Approx { instance } => (Command::Approx, Some(instance), None, None, None),
            Sub::Validate { instance } => (Command::Validate, Some(instance), None, None, None),
            Sub::Gen(g) => (Command::Gen, None, None, None, Some(g)),
            Sub::Compare { instance, sampling } => {
                (Command::Compare, Some(instance), Some(sampling), None, None)
            }
        };
        let mut config = RunConfig::new(command);
        config.instance_path = instance;
        config.seed = self.seed;
        config.threads = self.threads;
        config.out_path = self.out;
        if let Some(s) = sampling {
            config.reps = s.reps;
            config.epsilon = s.epsilon;
            config.delta = s.delta;
            config.plan = s.plan;
            config.pilot = s.pilot;
            config.max_reps = s.max_reps;
            config.confidence = s.confidence;
            config.drafting = s.drafting;
        }
        if let Some(m) = exact_method {
            config.exact_method = m;
        }
        if let Some(g) = gen {
            config.gen = GenOptions {
                m: g.m,
                r_max: g.r_max,
                cap_exponent: g.cap_exponent,
                max_col: g.max_col,
                instance_out: g.instance_out,
            };
        }
        config
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(usage_message(&e))),
    };
    let config = cli.into_config();
    let doc = match run(&config) {
        Ok(doc) => doc,
        Err(e) => return report(&e),
    };
    let text = serde_json::to_string_pretty(&doc).expect("document serializes") + "\n";
    match &config.out_path {
        Some(path) => {
            if let Err(source) = std::fs::write(path, text) {
                return report(&CliError::Io {
                    path: path.display().to_string(),
                    source,
                });
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

/// clap's message without the usage block, on one line.
fn usage_message(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let body = rendered.split("\n\nUsage").next().unwrap_or_default();
    body.trim_start_matches("error: ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn report(e: &CliError) -> ExitCode {
    let doc = ErrorDocument {
        error: e.code(),
        message: e.to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("error serializes")
    );
    ExitCode::from(match e {
        CliError::Usage(_) => 2,
        _ => 1,
    })
}
