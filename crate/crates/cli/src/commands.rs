//! Argument parsing and subcommand dispatch.

use crate::experiment::{run_experiment, ExperimentConfig};
use crate::io::{load_state, FileError, Loaded};
use crate::spec::parse_spec;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gme_core::measures::{distill_probability, k_gme_pure, nielsen_transformable, vidal_probability};
use gme_core::zoo::{canonical_mixed, canonical_pure, canonical_subspace, oracle_gme, OracleTarget};
use gme_core::{DensityMatrix, PureState, QError};
use gme_sdp::{
    evaluate_witness, mixed_fidelity_problem, ppt_min_eig, reduction_min_eig, solve_sdp, subspace_ppt_problem,
    subspace_reduction_problem, witness_from_pure, Relaxation, SdpSolution, Status,
};
use gme_var::{
    gme_mixed_multipartite, gme_mixed_partitioned, gme_subspace_multipartite, kgme_mixed, kgme_pure_multipartite,
    kgme_subspace, GmeEstimate, Method, OptimizerConfig,
};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: m.into() }
    }
    fn parse(m: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: m.into() }
    }
    fn numeric(m: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERIC, message: m.into() }
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        let code = match e {
            QError::ParameterOutOfRange(_)
            | QError::InvalidParty { .. }
            | QError::InvalidLayout(_)
            | QError::DimensionMismatch(_)
            | QError::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::parse(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "gme", version, about = "Geometric measure of entanglement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Named state or subspace, e.g. `isotropic:d=4,F=0.6`.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    state: Option<String>,
    /// JSON state file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Optimizer {
    Lbfgs,
    Momentum,
}

#[derive(Args, Debug)]
struct Optim {
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Gradient infinity-norm tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Optimizer::Lbfgs)]
    optimizer: Optimizer,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

impl Optim {
    fn config(&self) -> Result<OptimizerConfig, CliError> {
        if self.restarts == 0 || !(self.tol > 0.0) || self.max_iterations == 0 {
            return Err(CliError::usage("--restarts and --max-iterations must be positive and --tol > 0"));
        }
        Ok(OptimizerConfig {
            method: match self.optimizer {
                Optimizer::Lbfgs => Method::Lbfgs,
                Optimizer::Momentum => Method::Momentum,
            },
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            gradient_tolerance: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        })
    }

    fn method(&self) -> &'static str {
        match self.optimizer {
            Optimizer::Lbfgs => "variational-lbfgs",
            Optimizer::Momentum => "variational-momentum",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RelaxArg {
    Ppt,
    Reduction,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Test {
    Ppt,
    Reduction,
    Witness,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Variational k-GME of a pure state.
    Pure {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Exact value from the Schmidt spectrum (bipartite only).
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        optim: Optim,
    },
    /// Variational k-GME of a subspace.
    Subspace {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        optim: Optim,
    },
    /// Variational k-GME of a mixed state (convex roof).
    Mixed {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Decomposition size: `auto` or a positive integer.
        #[arg(long, default_value = "auto")]
        ansatz_terms: String,
        /// Party grouping such as `0|1,2`; parties within a group are merged.
        #[arg(long)]
        partition: Option<String>,
        #[command(flatten)]
        optim: Optim,
    },
    /// Certified SDP lower bound.
    Bound {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum)]
        relaxation: Option<RelaxArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Separability criteria.
    Criteria {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        test: Test,
        /// Parties acted on by the transpose or reduction map.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        parties: Vec<usize>,
        /// Schmidt number threshold of the reduction criterion.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Pure state whose witness is evaluated; defaults to the input.
        #[arg(long)]
        witness_state: Option<String>,
        #[command(flatten)]
        optim: Optim,
    },
    /// LOCC transformation and distillation probabilities.
    Transform {
        /// Source state (file path or spec string).
        #[arg(long)]
        from: String,
        /// Target state (file path or spec string).
        #[arg(long, required_unless_present = "distill")]
        to: Option<String>,
        /// Distill the maximally entangled state of this dimension instead.
        #[arg(long, conflicts_with = "to")]
        distill: Option<usize>,
        /// Parties on the first side of the cut.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        kept: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form reference values.
    Oracle {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Haar-random state statistics written as CSV.
    Haar {
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Orders with histograms; defaults to `d`.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Distillation target dimensions.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Output directory for `samples.csv` and `histogram.csv`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize, Debug)]
pub struct Record {
    pub value: f64,
    pub k: usize,
    pub method: String,
    pub converged: bool,
    pub seed: u64,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Record {
    fn new(value: f64, k: usize, method: &str, converged: bool, seed: u64) -> Self {
        Record { value, k, method: method.into(), converged, seed, extra: Map::new() }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.extra.insert(key.into(), v);
        self
    }
}

fn resolve(text: &str) -> Result<Loaded, CliError> {
    let path = std::path::Path::new(text);
    if path.is_file() {
        return Ok(load_state(path)?);
    }
    let target = parse_spec(text).map_err(|e| CliError::parse(e.0))?;
    Ok(match target {
        OracleTarget::State(s) if s.is_pure() => Loaded::Pure(canonical_pure(&s)?),
        OracleTarget::State(s) => Loaded::Mixed(canonical_mixed(&s)?),
        OracleTarget::Subspace(s) => Loaded::Subspace(canonical_subspace(&s)?),
    })
}

fn load(input: &Input) -> Result<Loaded, CliError> {
    match (&input.state, &input.file) {
        (Some(s), None) => resolve(s),
        (None, Some(f)) => Ok(load_state(f)?),
        _ => Err(CliError::usage("give exactly one of --state and --file")),
    }
}

fn as_pure(obj: Loaded) -> Result<PureState, CliError> {
    match obj {
        Loaded::Pure(p) => Ok(p),
        _ => Err(CliError::usage("this command needs a pure state")),
    }
}

fn as_mixed(obj: Loaded) -> Result<DensityMatrix, CliError> {
    match obj {
        Loaded::Pure(p) => Ok(p.projector()),
        Loaded::Mixed(r) => Ok(r),
        Loaded::Subspace(_) => Err(CliError::usage("this command needs a state, not a subspace")),
    }
}

fn estimate(e: GmeEstimate, k: usize, optim: &Optim) -> Record {
    Record::new(e.value, k, optim.method(), e.converged, optim.seed)
        .with("iterations", json!(e.iterations_used))
}

fn parse_partition(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split('|')
        .map(|g| {
            g.split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| CliError::usage(format!("bad partition `{s}`"))))
                .collect()
        })
        .collect()
}

fn sdp_record(sol: SdpSolution, value: f64, k: usize, method: &str, seed: u64) -> Result<Record, CliError> {
    if sol.status == Status::InfeasibleSuspected || !value.is_finite() {
        return Err(CliError::numeric(format!("SDP failed: status {:?}", sol.status)));
    }
    Ok(Record::new(value, k, method, sol.status == Status::Optimal, seed)
        .with("primal", json!(sol.primal_value))
        .with("gap", json!(sol.relative_gap())))
}

fn dispatch(cmd: Command) -> Result<Record, CliError> {
    match cmd {
        Command::Pure { input, k, exact, optim } => {
            let psi = as_pure(load(&input)?)?;
            if exact {
                if psi.layout().parties() != 2 {
                    return Err(CliError::usage("--exact needs a bipartite state"));
                }
                let v = k_gme_pure(&psi, &[0], k)?;
                return Ok(Record::new(v, k, "schmidt", true, optim.seed));
            }
            let e = kgme_pure_multipartite(&psi, k, &optim.config()?)?;
            Ok(estimate(e, k, &optim))
        }
        Command::Subspace { input, k, optim } => {
            let s = match load(&input)? {
                Loaded::Subspace(s) => s,
                _ => return Err(CliError::usage("this command needs a subspace")),
            };
            let cfg = optim.config()?;
            let e = if s.layout().parties() == 2 {
                kgme_subspace(&s, k, &cfg)?
            } else if k == 2 {
                gme_subspace_multipartite(&s, &cfg)?
            } else {
                return Err(CliError::usage("multipartite subspaces support k = 2 only"));
            };
            Ok(estimate(e, k, &optim))
        }
        Command::Mixed { input, k, ansatz_terms, partition, optim } => {
            let rho = as_mixed(load(&input)?)?;
            let n = match ansatz_terms.as_str() {
                "auto" => None,
                t => match t.parse::<usize>() {
                    Ok(n) if n > 0 => Some(n),
                    _ => return Err(CliError::usage(format!("--ansatz-terms must be `auto` or positive, got `{t}`"))),
                },
            };
            let cfg = optim.config()?;
            let e = match partition {
                Some(p) if k == 2 => gme_mixed_partitioned(&rho, &parse_partition(&p)?, n, &cfg)?,
                Some(_) => return Err(CliError::usage("--partition supports k = 2 only")),
                None if rho.layout().parties() == 2 => kgme_mixed(&rho, k, n, &cfg)?,
                None if k == 2 => gme_mixed_multipartite(&rho, n, &cfg)?,
                None => return Err(CliError::usage("multipartite states support k = 2 only")),
            };
            Ok(estimate(e, k, &optim))
        }
        Command::Bound { input, k, relaxation, seed } => {
            let relaxation = match relaxation {
                Some(RelaxArg::Ppt) => Relaxation::Ppt,
                Some(RelaxArg::Reduction) => Relaxation::Reduction,
                None => Relaxation::default_for(k),
            };
            if relaxation == Relaxation::Ppt && k != 2 {
                return Err(CliError::usage("the PPT relaxation applies to k = 2 only"));
            }
            let method = match relaxation {
                Relaxation::Ppt => "sdp-ppt",
                Relaxation::Reduction => "sdp-reduction",
            };
            match load(&input)? {
                Loaded::Subspace(s) => {
                    let p = match relaxation {
                        Relaxation::Ppt => subspace_ppt_problem(&s)?,
                        Relaxation::Reduction => subspace_reduction_problem(&s, k)?,
                    };
                    let sol = solve_sdp(&p, 1e-7, 100_000)?;
                    let v = sol.dual_value;
                    sdp_record(sol, v, k, method, seed)
                }
                other => {
                    let rho = as_mixed(other)?;
                    let sol = solve_sdp(&mixed_fidelity_problem(&rho, k, relaxation)?, 1e-7, 100_000)?;
                    let v = 1.0 - sol.dual_value * sol.dual_value;
                    sdp_record(sol, v, k, method, seed)
                }
            }
        }
        Command::Criteria { input, test, parties, k, witness_state, optim } => {
            let obj = load(&input)?;
            match test {
                Test::Ppt => {
                    let v = ppt_min_eig(&as_mixed(obj)?, &parties)?;
                    Ok(Record::new(v, 2, "ppt-min-eig", true, optim.seed).with("entangled", json!(v < -1e-10)))
                }
                Test::Reduction => {
                    let v = reduction_min_eig(&as_mixed(obj)?, &parties, k)?;
                    Ok(Record::new(v, k, "reduction-min-eig", true, optim.seed)
                        .with("schmidt_number_exceeds_k", json!(v < -1e-10)))
                }
                Test::Witness => {
                    let rho = as_mixed(obj.clone())?;
                    let psi = match witness_state {
                        Some(w) => as_pure(resolve(&w)?)?,
                        None => as_pure(obj)?,
                    };
                    let w = witness_from_pure(&psi, &optim.config()?)?;
                    let v = evaluate_witness(&w, &rho)?;
                    Ok(Record::new(v, 2, "witness", true, optim.seed)
                        .with("threshold", json!(w.threshold))
                        .with("entangled", json!(v < -1e-10)))
                }
            }
        }
        Command::Transform { from, to, distill, kept, seed } => {
            let psi = as_pure(resolve(&from)?)?;
            match (to, distill) {
                (_, Some(m)) => {
                    let r = distill_probability(&psi, m, &kept)?;
                    Ok(Record::new(r.optimal_probability, r.binding_index, "distill", true, seed)
                        .with("target_dimension", json!(m))
                        .with("deterministic", json!(r.deterministic_possible)))
                }
                (Some(to), None) => {
                    let phi = as_pure(resolve(&to)?)?;
                    let r = vidal_probability(&psi, &phi, &kept)?;
                    let nielsen = nielsen_transformable(&psi, &phi, &kept)?;
                    Ok(Record::new(r.optimal_probability, r.binding_index, "vidal", true, seed)
                        .with("nielsen", json!(nielsen))
                        .with("deterministic", json!(r.deterministic_possible)))
                }
                (None, None) => Err(CliError::usage("give --to or --distill")),
            }
        }
        Command::Oracle { state, k } => {
            let target = parse_spec(&state).map_err(|e| CliError::parse(e.0))?;
            Ok(Record::new(oracle_gme(&target, k)?, k, "oracle", true, 0))
        }
        Command::Haar { d, samples, seed, k, m, bins, out } => {
            let config = ExperimentConfig { n_samples: samples, d, seed, ks: if k.is_empty() { vec![d] } else { k }, ms: m, bins };
            let exp = run_experiment(&config)?;
            let io = |e: std::io::Error| CliError::usage(format!("{}: {e}", out.display()));
            std::fs::create_dir_all(&out).map_err(io)?;
            let create = |name: &str| std::fs::File::create(out.join(name)).map(std::io::BufWriter::new).map_err(io);
            exp.write_samples(create("samples.csv")?).map_err(io)?;
            exp.write_histograms(create("histogram.csv")?).map_err(io)?;
            let (mean, se) = exp.mean_smallest();
            Ok(Record::new(mean, d, "haar", true, seed)
                .with("standard_error", json!(se))
                .with("n_samples", json!(samples)))
        }
    }
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let text = e.render().to_string();
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(out, "{text}");
                0
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    match dispatch(cli.command) {
        Ok(record) => {
            if !record.value.is_finite() {
                let _ = writeln!(err, "error: non-finite result");
                return EXIT_NUMERIC;
            }
            let _ = writeln!(out, "{}", serde_json::to_string(&record).expect("records serialize"));
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
