use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "smollision", version, about = "One-shot quantum divergences, smooth entropies and their bounds")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report information quantities in bits (default).
    #[arg(long, global = true, conflicts_with = "nats")]
    pub bits: bool,
    /// Report information quantities in nats.
    #[arg(long, global = true)]
    pub nats: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Interior-point stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Interior-point iteration cap.
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
}

impl Common {
    pub fn unit(&self) -> Unit {
        if self.nats {
            Unit::Nats
        } else {
            Unit::Bits
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Bits,
    Nats,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        }
    }

    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            Unit::Bits => v / std::f64::consts::LN_2,
            Unit::Nats => v,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a divergence between two operators.
    Divergence(DivergenceArgs),
    /// Evaluate a conditional entropy of a classical-quantum state.
    Entropy(EntropyArgs),
    /// Privacy-amplification bench on one classical-quantum state.
    PaSim(PaSimArgs),
    /// Decoupling bench on one state of A1 A2 E.
    DecoupleSim(DecoupleArgs),
    /// Run the randomized inequality harness.
    Verify(VerifyArgs),
    /// Smooth min-entropy of i.i.d. copies against the second-order curve.
    IidTrend(IidArgs),
    /// Solve a problem in sparse SDPA format.
    SdpSolve(SdpSolveArgs),
    /// Enumerate a hash family and check two-universality exactly.
    HashAudit(HashAuditArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergenceKind {
    Umegaki,
    Sandwiched,
    Petz,
    Dmax,
    DmaxSmoothMeasured,
    DmaxSmoothPurified,
    DmaxSmoothTrace,
    D2Measured,
    D2SmoothMeasured,
    Dh,
    DhSdp,
    MeasuredRenyiLb,
    HockeyStick,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideArg {
    Primal,
    Dual,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub kind: DivergenceKind,
    /// Order for the Rényi kinds.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Threshold for the hockey-stick divergence.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// First the state ρ, then the reference σ.
    #[arg(long = "state", num_args = 1, required = true)]
    pub states: Vec<PathBuf>,
    /// Which side of the program to solve, for the smoothed collision kind.
    #[arg(long, value_enum, default_value_t = SideArg::Dual)]
    pub side: SideArg,
    /// Local-search moves for the measured Rényi lower bound.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Write the semidefinite program in sparse SDPA format.
    #[arg(long)]
    pub export_sdpa: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKindArg {
    Dmax,
    DmaxSmoothMeasured,
    DmaxSmoothPurified,
    D2Measured,
    D2SmoothMeasured,
    H2Classicalized,
    Sandwiched,
    Petz,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    Up,
    Down,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[arg(long, value_enum)]
    pub kind: EntropyKindArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Down)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    Toeplitz,
    Exhaustive,
}

#[derive(Args, Debug)]
pub struct PaSimArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::Toeplitz)]
    pub family: FamilyArg,
    /// Output length in bits.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Smoothing parameters; repeat for several.
    #[arg(long, num_args = 1.., default_values_t = vec![0.1])]
    pub eps: Vec<f64>,
    /// μ as a fraction of ε.
    #[arg(long, default_value_t = 0.5)]
    pub mu_fraction: f64,
    /// δ as a fraction of ε.
    #[arg(long, default_value_t = 0.5)]
    pub delta_fraction: f64,
    /// Multiplier of the measured converse.
    #[arg(long, default_value_t = 2.0)]
    pub converse_k: f64,
    /// Orders for the Rényi achievability bound.
    #[arg(long, num_args = 1.., default_values_t = vec![1.25, 1.5, 2.0])]
    pub alpha: Vec<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleArg {
    Clifford1q,
    Clifford2q,
    Haar,
}

#[derive(Args, Debug)]
pub struct DecoupleArgs {
    /// Density operator on A1 ⊗ A2 ⊗ E.
    #[arg(long)]
    pub state: PathBuf,
    /// Dimensions of A1 and A2.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 1])]
    pub split: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Clifford1q)]
    pub ensemble: EnsembleArg,
    /// Haar samples.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Reference state on E; defaults to the marginal.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteArg {
    Pair,
    Cq,
    Decoupling,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<SuiteArg>,
    /// Instances per suite.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Experiment configuration: `{grid, seed}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write every report; JSON when the name ends in `.json`, CSV otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the summary JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IidArgs {
    /// Classical-quantum state; defaults to a correlated qubit source.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Angle of the built-in source.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Largest number of copies.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct SdpSolveArgs {
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct HashAuditArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Toeplitz)]
    pub family: FamilyArg,
    /// Input length in bits.
    #[arg(long)]
    pub m: u32,
    /// Output length in bits.
    #[arg(long)]
    pub k: u32,
    /// Include every member's table.
    #[arg(long)]
    pub dump: bool,
}
