use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kloosterman_core::coset::DEFAULT_BUDGET;

#[derive(Debug, Parser)]
#[command(
    name = "kloosterman",
    version,
    about = "Exact classical and long-word Kloosterman sums"
)]
pub struct Cli {
    /// Output document format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Maximum number of search nodes per enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,

    /// Append-only JSON-lines result cache.
    #[arg(long, global = true, env = "KLOOSTERMAN_CACHE")]
    pub cache: Option<PathBuf>,

    /// Ignore `--cache` and `KLOOSTERMAN_CACHE`.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Rank 5: weight `u_{4,5}` with the third character component.
    #[arg(long, global = true)]
    pub strict_paper_psi: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical sum S(m, n; c) and its Weil bound.
    Classical(ClassicalArgs),
    /// Bruhat factorization u_L · w0 · t · u_R of a long-word matrix.
    Decompose(DecomposeArgs),
    /// Rank-4 fine and coarse sums.
    Sl4 {
        #[command(subcommand)]
        command: Sl4Command,
    },
    /// Rank-5 fine sums.
    Sl5 {
        #[command(subcommand)]
        command: Sl5Command,
    },
    /// Sp(4) and SO(4) membership and relation residuals.
    Groups {
        #[command(subcommand)]
        command: GroupsCommand,
    },
    /// Property and cross-validation suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(short = 'm', long = "m", allow_hyphen_values = true)]
    pub m: i64,
    #[arg(short = 'n', long = "n", allow_hyphen_values = true)]
    pub n: i64,
    #[arg(short = 'c', long = "c")]
    pub c: i64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// JSON file `{"n": 4, "entries": [[...], ...]}`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Expected matrix size; the file's `n` must match.
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..=5))]
    pub rank: Option<u64>,
    /// Also report the reduced double-coset representative.
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Oracle,
    Closed,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Sl4Command {
    /// Fine sum over one cell d1,d2,d3,d4,d5,f.
    Fine {
        #[arg(long)]
        cell: String,
        #[arg(short = 'm', long = "m", allow_hyphen_values = true)]
        m: String,
        #[arg(short = 'n', long = "n", allow_hyphen_values = true)]
        n: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Oracle)]
        method: MethodArg,
    },
    /// Coarse sum over Ω(c1, c2, c3).
    Coarse {
        #[arg(long = "c")]
        c: String,
        #[arg(short = 'm', long = "m", allow_hyphen_values = true)]
        m: String,
        #[arg(short = 'n', long = "n", allow_hyphen_values = true)]
        n: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Oracle)]
        method: MethodArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum Sl5Command {
    /// Fine sum over Ω(D1, D2, D3, D4, f) read from d1..d9,f.
    Fine {
        #[arg(long)]
        cell: String,
        #[arg(short = 'm', long = "m", allow_hyphen_values = true)]
        m: String,
        #[arg(short = 'n', long = "n", allow_hyphen_values = true)]
        n: String,
        /// Only the enumeration oracle exists at rank 5.
        #[arg(long, value_enum, default_value_t = MethodArg::Oracle)]
        method: MethodArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupKind {
    Sp4,
    So4,
}

#[derive(Debug, Subcommand)]
pub enum GroupsCommand {
    Check {
        #[arg(long, value_enum)]
        kind: GroupKind,
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Classical,
    Weil,
    Longword,
    Bruhat,
    Lemmas,
    Congruences,
    Trivial,
    ClosedForm,
    Partition,
    Bound,
    Groups,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Required by every randomized suite.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest modulus (classical suites) or largest c_i (coarse suites).
    #[arg(long)]
    pub max_c: Option<u64>,
    /// Largest |m|, |n| component.
    #[arg(long)]
    pub max_mn: Option<i64>,
    /// Number of random samples.
    #[arg(long)]
    pub count: Option<usize>,
    /// Write discrepancy records here as JSON lines instead of inline.
    #[arg(long)]
    pub discrepancies: Option<PathBuf>,
}
