use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bartool",
    version,
    about = "Uniform bounds for bars on fans and uniform continuity moduli"
)]
pub struct Cli {
    /// Instance file (JSON). The builtin instance is used when absent.
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,

    /// Worker threads for level scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Least depth at which a monotone bar holds on every node of a fan.
    UniformBound(UniformBoundArgs),
    /// The block embedding into the binary fan: φ(n) or a transferred bound.
    Embed(EmbedArgs),
    /// Uniform continuity modulus near a fan or a compact metric space.
    Modulus(ModulusArgs),
    /// Translate a bar between the Π⁰₁ and c-set representations.
    Convert(ConvertArgs),
    /// List the ids declared by the instance.
    List,
}

#[derive(Debug, Clone, Args)]
pub struct Budgets {
    #[arg(long, default_value_t = 16)]
    pub max_depth: usize,

    /// Quantifier budget: family indices or extension codes up to this bound.
    #[arg(long, default_value_t = 200)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct UniformBoundArgs {
    #[arg(long)]
    pub fan: String,
    #[arg(long)]
    pub bar: String,
    #[command(flatten)]
    pub budgets: Budgets,
    /// Close a decidable bar under extension before searching.
    #[arg(long)]
    pub monotonize: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub fan: String,
    /// Compute φ(n).
    #[arg(required_unless_present = "transfer", conflicts_with = "transfer")]
    pub n: Option<usize>,
    /// Compute `M = max{|Ψ(c)| : c ∈ T′, |c| = N}`.
    #[arg(long, value_name = "N")]
    pub transfer: Option<usize>,
    /// With `--transfer`, also search `N` for this bar on the image and check `M` on the fan.
    #[arg(long, requires = "transfer")]
    pub bar: Option<String>,
    #[command(flatten)]
    pub budgets: Budgets,
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long, conflicts_with = "compact", required_unless_present = "compact")]
    pub fan: Option<String>,
    /// A metric id from the instance.
    #[arg(long)]
    pub compact: Option<String>,
    #[arg(long)]
    pub function: String,
    /// Required for rational-valued and metric functions, e.g. `1/10` or `0.25`.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Search on the binary image of the fan and transfer the bound back.
    #[arg(long, requires = "fan")]
    pub via_embedding: bool,
    #[command(flatten)]
    pub budgets: Budgets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Cbar,
    Pi01,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub bar: String,
    #[arg(long, value_enum)]
    pub to: Target,
    /// Fan for the Γ retraction (Π⁰₁ to c-set) and for the checked nodes.
    #[arg(long)]
    pub fan: Option<String>,
    /// Levels checked in the containment summary.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 200)]
    pub budget: u64,
}
