use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use closurelab::StageBudget;

const DEFAULT_HORIZON: u64 = 64;
const DEFAULT_ITERS: usize = 16;
const DEFAULT_CAP: u64 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "closurelab",
    version,
    about = "Closure queries, reductions, transforms and constructions over many-sorted structures",
    after_help = "Several commands can be chained with a lone `;` argument; a `construct` \
                  segment supplies the structure for the segments after it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a formula under a full assignment.
    Eval(QueryCmd),
    /// Count the right tuples satisfying φ(ā; ·).
    Count(QueryCmd),
    /// Algebraicity: at a tuple (--assign) or in a closure (--base/--target).
    Acl(MemberCmd),
    /// Definability: at a tuple (--assign) or in a closure (--base/--target).
    Dcl(MemberCmd),
    /// Iterate the closure operator from a base set.
    Closure(ClosureCmd),
    /// Print the reduction formulas, or recover a count through them.
    Reduce(ReduceCmd),
    /// Add one relation per formula.
    Morleyize(MorleyCmd),
    /// Encode limit-approximated relations over a copy of the naturals.
    LimitEncode(LimitCmd),
    /// Build one of the generated structures.
    Construct(ConstructCmd),
    /// Read the parity of each prime's chain off a chain graph.
    DecodeParities(DecodeCmd),
}

#[derive(Args, Debug, Default)]
pub struct StructureArg {
    /// Structure file.
    #[arg(long)]
    pub structure: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct BudgetArgs {
    /// Sets horizon, iterations and cap at once.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub cap: Option<u64>,
}

impl BudgetArgs {
    pub fn resolve(&self) -> closurelab::Result<StageBudget> {
        let horizon = self.horizon.or(self.budget).unwrap_or(DEFAULT_HORIZON);
        let iters = self
            .iters
            .or(self.budget.map(|b| b as usize))
            .unwrap_or(DEFAULT_ITERS);
        let cap = self.cap.or(self.budget).unwrap_or(DEFAULT_CAP);
        StageBudget::new(horizon, iters, cap)
    }
}

#[derive(Args, Debug)]
pub struct QueryCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long)]
    pub formula: String,
    /// `v=Sort#k,...` or construction names such as `a_0`.
    #[arg(long)]
    pub assign: Vec<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct MemberCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    /// Repeat for several formulas in set mode. Defaults to the formulas of
    /// a preceding construction.
    #[arg(long)]
    pub formula: Vec<String>,
    #[arg(long)]
    pub assign: Vec<String>,
    /// Comma-separated base set; switches to closure membership.
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    /// Admissible counts, overriding the command's default.
    #[arg(long = "S")]
    pub counts: Option<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct ClosureCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long)]
    pub formula: Vec<String>,
    #[arg(long, default_value = "")]
    pub base: String,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long = "S", default_value = "all-finite")]
    pub counts: String,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    Upsilon,
    Psi,
    /// Recover |φ(ā; ·)| from ACL and DCL answers of the engine.
    Count,
}

#[derive(Args, Debug)]
pub struct ReduceCmd {
    pub kind: ReduceKind,
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long)]
    pub formula: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub assign: Vec<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct MorleyCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long, required = true)]
    pub formula: Vec<String>,
    /// Highest Boolean-combination level accepted.
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    /// Write the expanded structure here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LimitCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// `table:<file>` with lines `R a l value`.
    #[arg(long = "limit-fn")]
    pub limit_fn: Option<String>,
    /// Quantifier-free formula over the base language to lift.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long)]
    pub assign: Vec<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructKind {
    SortedHalting,
    ChainGraph,
    PathWitness,
    Bipartite,
}

#[derive(Args, Debug)]
pub struct ConstructCmd {
    pub kind: ConstructKind,
    /// Halting pairs, `e:n,n,...;e:n`.
    #[arg(long, default_value = "")]
    pub source: String,
    /// Columns treated as infinite, comma-separated.
    #[arg(long, default_value = "")]
    pub infinite: String,
    /// Minimum number of columns.
    #[arg(long)]
    pub columns: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub stages: usize,
    /// `table:<file>` with lines `n s value`.
    #[arg(long = "limit-fn")]
    pub limit_fn: Option<String>,
    /// Which bipartite structure later segments use.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub side: u8,
}

#[derive(Args, Debug)]
pub struct DecodeCmd {
    #[command(flatten)]
    pub structure: StructureArg,
    #[arg(long = "limit-fn")]
    pub limit_fn: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub stages: usize,
    #[arg(long)]
    pub horizon: Option<u64>,
}
