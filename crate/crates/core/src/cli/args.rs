use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::Domain;
use crate::metric::DEFAULT_TOL_DEG;

#[derive(Debug, Parser)]
#[command(name = "hpmetric", version, about = "Hitting-probability metrics on Markov chains and digraphs")]
pub struct Cli {
    /// Worker threads; overrides HPMETRIC_THREADS. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary distribution as `label,phi`.
    Stationary(StationaryArgs),
    /// Hitting probabilities Q, exact or by simulation.
    Hitprob(HitprobArgs),
    /// Distance matrix d^beta.
    Metric(MetricArgs),
    /// Collapse degenerate classes at beta = 1/2.
    Quotient(QuotientArgs),
    /// Symmetric matrix from a directed chain.
    Symmetrize(SymmetrizeArgs),
    /// Fiedler vector of a symmetrization.
    Fiedler(FiedlerArgs),
    /// Synthetic graph models.
    Generate(GenerateArgs),
    /// Cluster the nodes of a graph.
    Cluster(ClusterArgs),
    /// PCA coordinates of a node matrix.
    Embed(EmbedArgs),
    /// Run the built-in invariant checks.
    Verify(VerifyArgs),
    /// Time the fast hitting-probability solver.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Edge list CSV, Matrix Market file, or dense `label,...` matrix.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Keep only the largest strongly connected component.
    #[arg(long)]
    pub largest_scc: bool,
    /// Remove self-loops before normalizing.
    #[arg(long)]
    pub drop_self_loops: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HitprobArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Woodbury-updated solver (default).
    #[arg(long, conflicts_with = "reference")]
    pub fast: bool,
    /// One linear solve per target column.
    #[arg(long)]
    pub reference: bool,
    /// Estimate Q_ij for the labelled pair by simulation instead.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub mc: Option<Vec<String>>,
    #[arg(long, default_value_t = 100_000)]
    pub walks: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dense CSV (row = source), or JSON in simulation mode; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Distance matrix CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the symmetrized similarity matrix here.
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    /// Entries of Q this close to 1 count as exact ones.
    #[arg(long, default_value_t = DEFAULT_TOL_DEG)]
    pub tol_deg: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Quotient transition matrix CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `node,class` CSV.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL_DEG)]
    pub tol_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymMethod {
    Additive,
    Max,
    Chung,
    Hp,
}

#[derive(Debug, Args, Serialize)]
pub struct SymmetrizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: SymMethod,
    /// Exponent for `hp`; defaults to 1/2.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FiedlerArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: SymMethod,
    #[arg(long)]
    pub beta: Option<f64>,
    /// `label,value,sign` CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Glued,
    ErCycle,
    Planted,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainArg {
    FlatTorus,
    TorusWithHole,
    HDomain,
    Circle,
    Sphere,
    TorusLattice,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::FlatTorus => Domain::FlatTorus,
            DomainArg::TorusWithHole => Domain::TorusWithHole,
            DomainArg::HDomain => Domain::HDomain,
            DomainArg::Circle => Domain::Circle,
            DomainArg::Sphere => Domain::Sphere,
            DomainArg::TorusLattice => Domain::TorusLattice,
        }
    }
}

/// Parameters of the synthetic models; each model reads only its own.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Backbone length of the glued cycles.
    #[arg(long, default_value_t = 3)]
    pub nb: usize,
    /// Branch length of the glued cycles.
    #[arg(long, default_value_t = 4)]
    pub nc: usize,
    /// Number of branches of the glued cycles.
    #[arg(long = "C", default_value_t = 2)]
    pub c: usize,
    #[arg(long, default_value_t = 20)]
    pub n_er: usize,
    #[arg(long, default_value_t = 8)]
    pub n_cycle: usize,
    /// ER edge probability.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Weight of the edges into the cycle.
    #[arg(long, default_value_t = 3.0)]
    pub w: f64,
    /// Allow self-loops in the ER block.
    #[arg(long)]
    pub self_loops: bool,
    /// Node count for planted (default 300) and geometric (default 500).
    #[arg(long)]
    pub n: Option<usize>,
    /// Communities of the planted partition.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Mean edge density of the planted partition.
    #[arg(long, default_value_t = 0.40)]
    pub rho: f64,
    /// Within minus between community edge probability.
    #[arg(long, default_value_t = 0.06)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "circle")]
    pub domain: DomainArg,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `src,dst,weight` CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `node,community` CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// `label,x1,...` CSV for geometric models.
    #[arg(long)]
    pub coords: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = ["kmedoids-d12", "pca-kmeans-d12", "pca-kmeans-A"])]
    pub method: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `node,community` CSV; enables accuracy and p-value.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Random labelings for the p-value.
    #[arg(long, default_value_t = 4000)]
    pub trials: usize,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum EmbedMatrix {
    #[value(name = "d12")]
    #[serde(rename = "d12")]
    D12,
    #[value(name = "d1")]
    #[serde(rename = "d1")]
    D1,
    #[value(name = "A")]
    #[serde(rename = "A")]
    A,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub matrix: EmbedMatrix,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// `label,x1,...` CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Identity,
    Metric,
    Quotient,
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Chain to check; alternatively use `--model`.
    #[arg(long = "in", value_name = "PATH", conflicts_with = "model")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub largest_scc: bool,
    #[arg(long)]
    pub drop_self_loops: bool,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "identity,metric")]
    pub levels: Vec<Level>,
    /// Walks per pair for the simulation oracle.
    #[arg(long, default_value_t = 100_000)]
    pub walks: u64,
    /// Ordered pairs sampled by the oracle when the chain has more.
    #[arg(long, default_value_t = 12)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL_DEG)]
    pub tol_deg: f64,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
    pub sizes: Vec<usize>,
    /// Timed repetitions per size; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
