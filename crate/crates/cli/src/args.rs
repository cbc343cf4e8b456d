use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuchskit::connection::Point;
use fuchskit::Scalar;

#[derive(Parser, Debug)]
#[command(name = "fuchskit", version, about = "Exact tools for Fuchsian operators and logarithmic connections")]
pub struct Cli {
    /// Where to write the report; `-` is standard output.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,

    #[command(subcommand)]
    pub command: Command,
}

/// An operator, connection or parameter document: a file path, inline JSON,
/// or `-` for standard input.
#[derive(Args, Debug, Clone)]
pub struct InputArg {
    #[arg(long)]
    pub input: String,
}

#[derive(Args, Debug, Clone)]
pub struct PointArg {
    /// A point in Q(i), e.g. `0`, `-1/2`, `1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Scalar,
}

#[derive(Args, Debug, Clone)]
pub struct TruncationArg {
    /// Series depth; raised automatically when the exponent gap needs more.
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ToleranceArg {
    #[arg(long, default_value_t = fuchskit::monodromy::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Affine,
    Infinity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlanArg {
    Quadratic,
    Cubic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Degree bounds and regularity at infinity.
    Validate(InputArg),
    /// The logarithmic connection of the companion system.
    Companion {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_enum, default_value = "affine")]
        chart: ChartArg,
    },
    /// Exponent matrices and eigenvalues at the singular points.
    Exponents {
        #[command(flatten)]
        input: InputArg,
        /// A single point (`infinity` allowed); all singular points when omitted.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<Point>,
    },
    /// Non-resonance and sum conditions on exponents, `{"exponents": [[..], ..]}`.
    Genericity(InputArg),
    /// Decide whether a point is an apparent singularity.
    Apparent {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        truncation: TruncationArg,
        /// Also run the series oracle and report agreement.
        #[arg(long)]
        cross_check: bool,
    },
    /// The reduced test for exponents m, m−2, ..., 1, 0.
    SpecialApparent {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        point: PointArg,
    },
    /// Frobenius series solutions and the first obstruction.
    Oracle {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        truncation: TruncationArg,
    },
    /// The operator annihilating a polynomial basis, `{"basis": [[..], ..]}`.
    Annihilate(InputArg),
    /// Recover a scalar equation from a connection through a cyclic vector.
    Cyclic {
        #[command(flatten)]
        input: InputArg,
        /// Gauge matrix applied first, rows of `{"num": [..], "den": [..]}`.
        #[arg(long)]
        gauge: Option<String>,
    },
    /// Parameter and condition counts.
    Dimensions {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Number of apparent singularities.
        #[arg(long = "N", visible_alias = "apparent", default_value_t = 0)]
        big_n: usize,
    },
    /// Linear constraints on the coefficients, `{"m":.., "points":[..], "apparent":[..], "targets"?:..}`.
    Constraints {
        #[command(flatten)]
        input: InputArg,
        /// Include the assembled block-diagonal matrix.
        #[arg(long)]
        matrix: bool,
    },
    /// Generalized Vandermonde matrix, its determinant and the closed form.
    Vandermonde {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        points: Vec<Scalar>,
        #[arg(long, value_enum, default_value = "quadratic")]
        plan: PlanArg,
    },
    /// Parabolic weights from exponents, `{"mu": [[..], ..], "m":.., "n":..}`.
    HodgeParams(InputArg),
    /// Numerical monodromy around one point.
    Monodromy {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<Point>,
        #[command(flatten)]
        tolerance: ToleranceArg,
        /// Compare against the identity (numeric apparent test).
        #[arg(long)]
        apparent: bool,
        /// Check the product of all local monodromies instead.
        #[arg(long, conflicts_with_all = ["point", "apparent"])]
        global: bool,
    },
    /// Monodromy along `base + t·delta`, `{"base":.., "delta":[..], "grid":[..]}`.
    Sweep {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, allow_hyphen_values = true)]
        point: Point,
        #[command(flatten)]
        tolerance: ToleranceArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Taylor table, indicial polynomial and exponents at a point.
    Local {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, default_value_t = 4)]
        truncation: usize,
    },
    /// Polynomial gauges between two companion connections.
    Rigidity {
        #[command(flatten)]
        input: InputArg,
        /// The second operator, in the same forms as `--input`.
        #[arg(long)]
        other: String,
    },
    /// Companion connection then cyclic vector e_1 returns the operator.
    Roundtrip(InputArg),
    /// Splitting degrees of the companion bundle.
    BundleType(InputArg),
    /// Apply a gauge matrix to the companion connection.
    Gauge {
        #[command(flatten)]
        input: InputArg,
        /// Rows of rational functions `{"num": [..], "den": [..]}`.
        #[arg(long)]
        matrix: String,
    },
    /// The diagonal gauge relating the affine frame to one regular at infinity.
    InfinityGauge {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Exact arithmetic primitives.
    #[command(subcommand)]
    Algebra(AlgebraCommand),
    /// Randomized self-check of the exact tests against the series oracle.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum AlgebraCommand {
    /// Determinant of a square matrix given as rows of scalars.
    Det(InputArg),
    /// Rank of a matrix given as rows of scalars.
    Rank(InputArg),
    /// Roots in Q(i) with multiplicity; coefficients low degree first.
    Roots {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coeffs: Vec<Scalar>,
    },
    /// Taylor coefficients of num/den about a centre.
    Series {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        num: Vec<Scalar>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        den: Vec<Scalar>,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        at: Scalar,
        #[arg(long)]
        order: usize,
    },
    /// The falling factorial `[ρ]_l`, as a value or as a polynomial in ρ.
    Falling {
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<Scalar>,
        #[arg(long)]
        l: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Companion { .. } => "companion",
            Command::Exponents { .. } => "exponents",
            Command::Genericity(_) => "genericity",
            Command::Apparent { .. } => "apparent",
            Command::SpecialApparent { .. } => "special-apparent",
            Command::Oracle { .. } => "oracle",
            Command::Annihilate(_) => "annihilate",
            Command::Cyclic { .. } => "cyclic",
            Command::Dimensions { .. } => "dimensions",
            Command::Constraints { .. } => "constraints",
            Command::Vandermonde { .. } => "vandermonde",
            Command::HodgeParams(_) => "hodge-params",
            Command::Monodromy { .. } => "monodromy",
            Command::Sweep { .. } => "sweep",
            Command::Local { .. } => "local",
            Command::Rigidity { .. } => "rigidity",
            Command::Roundtrip(_) => "roundtrip",
            Command::BundleType(_) => "bundle-type",
            Command::Gauge { .. } => "gauge",
            Command::InfinityGauge { .. } => "infinity-gauge",
            Command::Algebra(_) => "algebra",
            Command::Check { .. } => "check",
        }
    }
}

pub fn output_path(s: &str) -> Option<PathBuf> {
    (s != "-").then(|| PathBuf::from(s))
}
