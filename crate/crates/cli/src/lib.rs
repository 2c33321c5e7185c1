//! Command-line front end for `spinframe`.
//!
//! Every artifact embeds a `meta` block (tool, version, command, effective
//! configuration, seed and constellation hash where applicable) and contains
//! nothing run-dependent, so identical invocations produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use spinframe::frames::{
    points_hash, DEFAULT_RETRY_BUDGET, DEFAULT_SAMPLES_PER_RADIUS, DEFAULT_TAU,
};
use spinframe::io::{
    self, baseline_csv, grid_csv, sweep_csv, trace_csv, ConstellationDoc, Convention,
    GramDiagnostics, Meta, OperatorDoc, SymbolDoc,
};
use spinframe::reconstruction::tomography_sweep;
use spinframe::{
    baseline_sweep, build_nonsingular, det_landscape, discrete_p_symbol, discrete_q_symbol,
    fibonacci_constellation, optimize, q_symbol_grid, random_constellation, random_density_matrix,
    reconstruct, tetrahedron, Constellation, FrameSystem, HermitianOperator, Objective,
    OptimizationConfig, RepairOptions, SpinParameter,
};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const SINGULAR: i32 = 5;
    pub const BUDGET_EXHAUSTED: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: spinframe::Error,
    },
    #[error(transparent)]
    Core(#[from] spinframe::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } => exit::VALIDATION,
            CliError::Core(e) => match e {
                spinframe::Error::SingularFrame { .. } => exit::SINGULAR,
                spinframe::Error::BudgetExhausted { .. } => exit::BUDGET_EXHAUSTED,
                _ => exit::VALIDATION,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "spinframe",
    version,
    about = "Spin-coherent-state frames, duals and discrete-symbol tomography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated constellation as JSON.
    Generate(GenerateArgs),
    /// Gram spectrum, condition number, log|det| and singular flag.
    Gram(GramArgs),
    /// Make a constellation non-singular by perturbing points within epsilon.
    Repair(RepairArgs),
    /// Write a random density matrix as operator JSON.
    RandomState(RandomStateArgs),
    /// Discrete Q-symbol of an operator on a constellation.
    Qsymbol(QsymbolArgs),
    /// Discrete P-symbol (dual-basis coefficients) of an operator.
    Psymbol(PsymbolArgs),
    /// Rebuild an operator from its discrete Q-symbol.
    Reconstruct(ReconstructArgs),
    /// Simulated shot-noise tomography sweep (CSV).
    Tomo(TomoArgs),
    /// Continuous Q-symbol on a (theta, phi) grid (CSV).
    Qgrid(QgridArgs),
    /// det G(k) as a function of the next point, with k-1 points fixed (CSV).
    Landscape(LandscapeArgs),
    /// Anneal a constellation towards a well-conditioned frame.
    Optimize(OptimizeArgs),
    /// Condition-number statistics of random constellations (CSV).
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Random,
    Fibonacci,
    Tetrahedron,
}

/// Where a constellation comes from: a JSON file or a generator.
#[derive(Clone, Debug, Args, Serialize)]
pub struct SourceArgs {
    /// Constellation JSON file.
    #[arg(long, conflicts_with = "generate")]
    pub constellation: Option<PathBuf>,
    /// Generate instead of loading.
    #[arg(long, value_enum)]
    pub generate: Option<Generator>,
    /// 2s for generated constellations.
    #[arg(long, default_value_t = 1)]
    pub twice_s: u32,
    /// Seed of the random generator.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output path (written atomically); stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GramArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Singular iff lambda_min < tau * lambda_max.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RepairArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Bound on the total displacement (sum of chord distances).
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, default_value_t = DEFAULT_RETRY_BUDGET)]
    pub retry_budget: usize,
    /// Candidates drawn at each cap radius before halving it.
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_RADIUS)]
    pub samples_per_radius: usize,
    /// Seed for the perturbation sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RandomStateArgs {
    #[arg(long, default_value_t = 1)]
    pub twice_s: u32,
    /// Rank of the density matrix, 1..=2s+1.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct QsymbolArgs {
    /// Operator JSON file.
    #[arg(long)]
    pub operator: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PsymbolArgs {
    #[arg(long)]
    pub operator: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Write coefficients for A = (2s+1)^-1 sum_n A^n Q_n.
    #[arg(long)]
    pub paper_convention: bool,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReconstructArgs {
    /// Q-symbol JSON file.
    #[arg(long)]
    pub qsymbol: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TomoArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Density-matrix JSON file; a random state is drawn if omitted.
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Rank of the random state.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub state_seed: u64,
    /// Comma-separated shot counts per point; 0 means exact values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000u64, 10000, 100000, 1000000])]
    pub shots: Vec<u64>,
    /// Trials per shot count.
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Also score the reconstruction with negative eigenvalues clipped and
    /// the trace renormalized (not a linear estimator).
    #[arg(long)]
    pub psd_repair: bool,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GridArgs {
    /// Lattice size as THETAxPHI, e.g. 64x64.
    #[arg(long, default_value = "32x64")]
    pub grid: String,
}

impl GridArgs {
    fn dims(&self) -> CliResult<(usize, usize)> {
        let bad = || CliError::Usage(format!("--grid expects THETAxPHI, got {:?}", self.grid));
        let (t, p) = self.grid.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok((
            t.trim().parse().map_err(|_| bad())?,
            p.trim().parse().map_err(|_| bad())?,
        ))
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct QgridArgs {
    #[arg(long)]
    pub operator: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Use the first K points as the fixed ones (default: all points of a
    /// partial constellation file).
    #[arg(long)]
    pub fixed: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value = "condition_number")]
    pub objective: String,
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0.5)]
    pub initial_step: f64,
    #[arg(long, default_value_t = 0.998)]
    pub cooling: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Path for the best constellation JSON.
    #[arg(long)]
    pub best_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long, default_value_t = 1)]
    pub twice_s: u32,
    #[arg(long, default_value_t = 1000)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutArgs,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_doc<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> CliResult<T> {
    io::from_json(&read_text(path)?).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

/// Writes to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

fn emit(output: &OutArgs, contents: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn meta<T: Serialize>(command: &str, args: &T) -> Meta {
    Meta::new(
        command,
        serde_json::to_value(args).expect("arguments serialize"),
    )
}

fn load_points(source: &SourceArgs) -> CliResult<(SpinParameter, Vec<spinframe::UnitVector>)> {
    match (&source.constellation, source.generate) {
        (Some(path), _) => {
            let doc: ConstellationDoc = read_doc(path)?;
            let parse_error = |e| CliError::Parse {
                path: path.clone(),
                source: e,
            };
            let points = doc.unit_vectors().map_err(parse_error)?;
            if let Some(stored) = &doc.constellation_hash {
                let actual = points_hash(doc.spin(), &points);
                if *stored != actual {
                    return Err(parse_error(spinframe::Error::HashMismatch {
                        expected: actual,
                        found: stored.clone(),
                    }));
                }
            }
            Ok((doc.spin(), points))
        }
        (None, Some(generator)) => {
            let c = generate(
                generator,
                SpinParameter::from_twice(source.twice_s),
                source.gen_seed,
            )?;
            Ok((c.spin(), c.points().to_vec()))
        }
        (None, None) => Err(CliError::Usage(
            "give either --constellation FILE or --generate KIND".into(),
        )),
    }
}

fn load_constellation(source: &SourceArgs) -> CliResult<Constellation> {
    let (spin, points) = load_points(source)?;
    Constellation::new(spin, points).map_err(|e| match &source.constellation {
        Some(path) => CliError::Parse {
            path: path.clone(),
            source: e,
        },
        None => CliError::Core(e),
    })
}

fn generate(generator: Generator, spin: SpinParameter, seed: u64) -> CliResult<Constellation> {
    Ok(match generator {
        Generator::Random => random_constellation(spin, seed),
        Generator::Fibonacci => fibonacci_constellation(spin),
        Generator::Tetrahedron if spin == SpinParameter::HALF => tetrahedron(),
        Generator::Tetrahedron => {
            return Err(CliError::Usage(
                "the tetrahedron generator needs --twice-s 1".into(),
            ))
        }
    })
}

fn load_operator(path: &Path) -> CliResult<HermitianOperator> {
    let doc: OperatorDoc = read_doc(path)?;
    doc.to_operator().map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn check_operator_dim(op: &HermitianOperator, spin: SpinParameter) -> CliResult<()> {
    if op.dim() != spin.dim() {
        return Err(CliError::Core(spinframe::Error::DimensionMismatch {
            expected: spin.dim(),
            found: op.dim(),
        }));
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => {
            let c = load_constellation(&args.source)?;
            let mut doc = ConstellationDoc::from_constellation(&c);
            doc.meta = Some(
                meta("generate", &args)
                    .with_seed(args.source.gen_seed)
                    .with_hash(&c.hash()),
            );
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::Gram(args) => {
            let frame = FrameSystem::with_tau(load_constellation(&args.source)?, args.tau);
            let mut diag = GramDiagnostics::from_frame(&frame);
            diag.meta = Some(meta("gram", &args).with_hash(frame.hash()));
            emit(&args.output, &io::to_json(&diag)?)
        }
        Command::Repair(args) => {
            let target = load_constellation(&args.source)?;
            let opts = RepairOptions {
                epsilon: args.epsilon,
                tau: args.tau,
                retry_budget: args.retry_budget,
                samples_per_radius: args.samples_per_radius,
                seed: args.seed,
            };
            let (repaired, report) = build_nonsingular(&target, &opts)?;
            let mut doc = ConstellationDoc::from_constellation(&repaired);
            doc.report = Some(report);
            doc.meta = Some(
                meta("repair", &args)
                    .with_seed(args.seed)
                    .with_hash(&repaired.hash()),
            );
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::RandomState(args) => {
            let rho = random_density_matrix(
                SpinParameter::from_twice(args.twice_s),
                args.rank,
                args.seed,
            )?;
            let mut doc = OperatorDoc::from_operator(&rho);
            doc.meta = Some(meta("random-state", &args).with_seed(args.seed));
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::Qsymbol(args) => {
            let op = load_operator(&args.operator)?;
            let frame = FrameSystem::new(load_constellation(&args.source)?);
            check_operator_dim(&op, frame.spin())?;
            let q = discrete_q_symbol(&op, &frame)?;
            let mut doc = SymbolDoc::from_q(&q);
            doc.meta = Some(meta("qsymbol", &args).with_hash(frame.hash()));
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::Psymbol(args) => {
            let op = load_operator(&args.operator)?;
            let frame = FrameSystem::with_tau(load_constellation(&args.source)?, args.tau);
            check_operator_dim(&op, frame.spin())?;
            let p = discrete_p_symbol(&op, &frame)?;
            let convention = if args.paper_convention {
                Convention::DimensionScaled
            } else {
                Convention::PrefactorFree
            };
            let mut doc = SymbolDoc::from_p(&p, frame.spin(), convention);
            doc.meta = Some(meta("psymbol", &args).with_hash(frame.hash()));
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::Reconstruct(args) => {
            let symbol: SymbolDoc = read_doc(&args.qsymbol)?;
            let q = symbol.to_q().map_err(|source| CliError::Parse {
                path: args.qsymbol.clone(),
                source,
            })?;
            let frame = FrameSystem::with_tau(load_constellation(&args.source)?, args.tau);
            let op = reconstruct(&q, &frame)?;
            let mut doc = OperatorDoc::from_operator(&op);
            doc.condition_number = Some(frame.condition_number());
            doc.meta = Some(meta("reconstruct", &args).with_hash(frame.hash()));
            emit(&args.output, &io::to_json(&doc)?)
        }
        Command::Tomo(args) => {
            let frame = FrameSystem::with_tau(load_constellation(&args.source)?, args.tau);
            let rho = match &args.density {
                Some(path) => load_operator(path)?,
                None => random_density_matrix(frame.spin(), args.rank, args.state_seed)?,
            };
            check_operator_dim(&rho, frame.spin())?;
            let records = tomography_sweep(
                &rho,
                &frame,
                &args.shots,
                args.seeds,
                args.seed,
                args.psd_repair,
            )?;
            let m = meta("tomo", &args)
                .with_seed(args.seed)
                .with_hash(frame.hash());
            emit(&args.output, &sweep_csv(&m, &records))
        }
        Command::Qgrid(args) => {
            let (n_theta, n_phi) = args.grid.dims()?;
            let op = load_operator(&args.operator)?;
            let grid = q_symbol_grid(&op, n_theta, n_phi)?;
            emit(
                &args.output,
                &grid_csv(&meta("qgrid", &args), &grid, "q_value"),
            )
        }
        Command::Landscape(args) => {
            let (n_theta, n_phi) = args.grid.dims()?;
            let (spin, mut points) = load_points(&args.source)?;
            if let Some(k) = args.fixed {
                if k > points.len() {
                    return Err(CliError::Usage(format!(
                        "--fixed {k} exceeds the {} available points",
                        points.len()
                    )));
                }
                points.truncate(k);
            }
            let grid = det_landscape(&points, spin, n_theta, n_phi)?;
            let m = meta("landscape", &args).with_hash(&points_hash(spin, &points));
            emit(&args.output, &grid_csv(&m, &grid, "det"))
        }
        Command::Optimize(args) => {
            let initial = load_constellation(&args.source)?;
            let cfg = OptimizationConfig {
                objective: args.objective.parse::<Objective>()?,
                iterations: args.iterations,
                restarts: args.restarts,
                initial_step: args.initial_step,
                cooling: args.cooling,
                seed: args.seed,
            };
            let trace = optimize(&initial, &cfg)?;
            let m = meta("optimize", &args)
                .with_seed(args.seed)
                .with_hash(&initial.hash());
            if let Some(path) = &args.best_out {
                let mut doc = ConstellationDoc::from_constellation(&trace.best);
                doc.meta = Some(m.clone().with_hash(&trace.best.hash()));
                write_atomic(path, &io::to_json(&doc)?)?;
            }
            emit(&args.output, &trace_csv(&m, &trace))
        }
        Command::Baseline(args) => {
            let summary = baseline_sweep(
                SpinParameter::from_twice(args.twice_s),
                args.seeds,
                args.seed,
                args.tau,
            )?;
            let m = meta("baseline", &args).with_seed(args.seed);
            emit(&args.output, &baseline_csv(&m, &summary))
        }
    }
}
