use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "widthlab", version, about = "Orlicz width integrals of convex bodies")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one width functional.
    Compute(ComputeArgs),
    /// Build a width addition and sample it at the rule nodes.
    Add(AddArgs),
    /// Run every check on one given pair of bodies.
    Verify(VerifyArgs),
    /// Run a seeded campaign over random body pairs.
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalArg {
    /// A_i(K)
    #[value(name = "A_i")]
    WidthIntegral,
    /// A_i(K, L)
    #[value(name = "A_i_KL")]
    IthMixedWidth,
    /// A_{-p,i}(K, L)
    #[value(name = "A_pi")]
    LpMixedWidth,
    /// A_{phi,i}(K, L)
    #[value(name = "A_phi_i")]
    OrliczMixedWidth,
}

/// Quadrature and output options shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Ambient dimension; must agree with every body.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Rule resolution (n = 2: nodes, n = 3: Gauss–Legendre points,
    /// n ≥ 4: Monte Carlo samples).
    #[arg(long, env = "WIDTHLAB_DEFAULT_RESOLUTION")]
    pub resolution: Option<usize>,

    /// Seed for Monte Carlo rules and random ensembles.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Output file (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long, value_enum)]
    pub functional: FunctionalArg,

    /// Body K as inline JSON or a path to a JSON file.
    #[arg(long = "K", visible_alias = "body")]
    pub k: String,

    /// Body L (mixed functionals only).
    #[arg(long = "L")]
    pub l: Option<String>,

    #[arg(long, default_value_t = 0)]
    pub i: usize,

    /// Exponent for A_pi.
    #[arg(long)]
    pub p: Option<f64>,

    /// Orlicz function for A_phi_i.
    #[arg(long)]
    pub phi: Option<String>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AddArgs {
    /// Addition descriptor as inline JSON or a path.
    #[arg(long)]
    pub addition: String,

    #[command(flatten)]
    pub common: Common,
}

/// Overrides applied on top of an ensemble configuration.
#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Full ensemble configuration (inline JSON or path); flags override it.
    #[arg(long)]
    pub config: Option<String>,

    /// Mixed-width indices to sweep (default 0..n-1).
    #[arg(long, value_delimiter = ',')]
    pub i: Vec<usize>,

    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,

    /// Orlicz function (repeatable) replacing the default set.
    #[arg(long)]
    pub phi: Vec<String>,

    #[arg(long)]
    pub tol_ineq: Option<f64>,

    #[arg(long)]
    pub tol_id: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "K", visible_alias = "body")]
    pub k: String,

    #[arg(long = "L")]
    pub l: String,

    #[command(flatten)]
    pub campaign: CampaignArgs,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub trials: Option<usize>,

    #[command(flatten)]
    pub campaign: CampaignArgs,

    #[command(flatten)]
    pub common: Common,
}
