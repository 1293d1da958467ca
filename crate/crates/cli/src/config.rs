use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bct_core::cp::DraftingMethod;
use clap::ValueEnum;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Estimate,
    Exact,
    Approx,
    Validate,
    Gen,
    Compare,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Exact => "exact",
            Command::Approx => "approx",
            Command::Validate => "validate",
            Command::Gen => "gen",
            Command::Compare => "compare",
        }
    }

    fn needs_instance(self) -> bool {
        self != Command::Gen
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Plan {
    #[default]
    Fixed,
    Chebyshev,
    Chernoff,
}

impl Plan {
    pub fn as_str(self) -> &'static str {
        match self {
            Plan::Fixed => "fixed",
            Plan::Chebyshev => "chebyshev",
            Plan::Chernoff => "chernoff",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ExactMethod {
    #[default]
    Dp,
    BruteForce,
}

impl ExactMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ExactMethod::Dp => "dp",
            ExactMethod::BruteForce => "brute-force",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Drafting {
    Direct,
    #[default]
    LeaveOneOut,
}

impl Drafting {
    pub fn as_str(self) -> &'static str {
        match self {
            Drafting::Direct => "direct",
            Drafting::LeaveOneOut => "leave-one-out",
        }
    }

    pub fn method(self) -> DraftingMethod {
        match self {
            Drafting::Direct => DraftingMethod::Direct,
            Drafting::LeaveOneOut => DraftingMethod::LeaveOneOut,
        }
    }
}

/// Worker count: `auto` uses rayon's global pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected `auto` or a positive integer, got `{s}`")),
            Ok(n) => Ok(Threads::Count(n)),
        }
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Count(n) => write!(f, "{n}"),
        }
    }
}

/// Parameters of the `gen` subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct GenOptions {
    pub m: usize,
    pub r_max: usize,
    pub cap_exponent: f64,
    pub max_col: Option<usize>,
    pub instance_out: Option<PathBuf>,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            m: 20,
            r_max: 3,
            cap_exponent: 0.5,
            max_col: None,
            instance_out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub instance_path: Option<PathBuf>,
    pub reps: u64,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub plan: Plan,
    pub threads: Threads,
    pub out_path: Option<PathBuf>,
    pub pilot: u64,
    pub max_reps: u64,
    pub confidence: f64,
    pub drafting: Drafting,
    pub exact_method: ExactMethod,
    pub gen: GenOptions,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            instance_path: None,
            reps: 10_000,
            seed: 0,
            epsilon: 0.1,
            delta: 0.05,
            plan: Plan::Fixed,
            threads: Threads::Auto,
            out_path: None,
            pilot: 1000,
            max_reps: 10_000_000,
            confidence: 0.95,
            drafting: Drafting::LeaveOneOut,
            exact_method: ExactMethod::Dp,
            gen: GenOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.command.needs_instance() && self.instance_path.is_none() {
            return usage(format!(
                "`{}` needs an instance file",
                self.command.as_str()
            ));
        }
        if self.plan == Plan::Fixed {
            if self.reps < 2 {
                return usage(format!("--reps must be at least 2, got {}", self.reps));
            }
        } else {
            if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
                return usage(format!("--epsilon {} outside (0, 1)", self.epsilon));
            }
            if !(self.delta > 0.0 && self.delta < 1.0) {
                return usage(format!("--delta {} outside (0, 1)", self.delta));
            }
            if self.pilot < 2 {
                return usage(format!("--pilot must be at least 2, got {}", self.pilot));
            }
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return usage(format!("--confidence {} outside (0, 1)", self.confidence));
        }
        if self.threads == Threads::Count(0) {
            return usage("--threads must be positive".into());
        }
        Ok(())
    }
}
