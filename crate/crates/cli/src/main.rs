//! `geamtool`: build and check GEAMs, construct witnesses, run detection and
//! separability criteria on JSON inputs.
//!
//! Exit status is 0 on success, 2 on a domain or validation failure and 3 on
//! an I/O or parse failure.

mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use geam_core::criteria::{evaluate_batch, CriterionId, CRITERION_TOL};
use geam_core::geam::{
    build_geam_per_frame, check_conical_design, max_feasible_s, uniform_weights, Geam, Sign,
    DEFAULT_TOL,
};
use geam_core::io::{geam_from_json, geam_to_json, states_from_json, states_to_json, WitnessDoc};
use geam_core::maps_witness::{
    build_map, choi_witness, detect, make_rotation, mehta_ratio, min_product_expectation,
    random_generator, random_permutation, RotationMatrix, RotationSpec, Witness, DEFAULT_RESTARTS,
    DETECTION_TOL,
};
use geam_core::operator_basis::{gell_mann_basis, partition_basis, BasisPartition};
use geam_core::states::{
    canonical_state, mix_separable, random_separable_mixture, random_state_with, CanonicalKind,
    DensityMatrix, GaussianRng,
};

use parse::{Gamma, Rotation};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl From<geam_core::Error> for CliError {
    fn from(e: geam_core::Error) -> Self {
        match e {
            geam_core::Error::Json(_) | geam_core::Error::Schema(_) => CliError::Input(e.to_string()),
            geam_core::Error::Violations(ref list) => {
                let lines: Vec<String> = list.iter().map(|v| format!("  {v}")).collect();
                CliError::Domain(format!("{} violation(s):\n{}", list.len(), lines.join("\n")))
            }
            other => CliError::Domain(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "geamtool", version, about = "Generalized equiangular measurements and entanglement witnesses")]
struct Cli {
    /// Absolute tolerance; overrides GEAM_TOL and the per-command defaults.
    #[arg(long, global = true, value_parser = parse::real)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, validate and inspect GEAMs.
    #[command(subcommand)]
    Geam(GeamCommand),
    /// Construct the Choi witness of a positive map.
    Witness(WitnessArgs),
    /// Evaluate a witness on states.
    Detect(DetectArgs),
    /// Correlation-matrix separability criteria.
    Criteria(CriteriaArgs),
    /// Produce state files.
    #[command(subcommand)]
    State(StateCommand),
}

#[derive(Args)]
struct FrameConfig {
    /// Local dimension.
    #[arg(short = 'd', long = "dim")]
    dim: usize,
    /// Frame sizes, e.g. 2,2,2.
    #[arg(long, value_parser = parse::usize_list)]
    sizes: ::std::vec::Vec<usize>,
    /// `uniform` or a comma-separated list of frame weights.
    #[arg(long, default_value = "uniform", value_parser = parse::gamma)]
    gamma: Gamma,
    /// Comma-separated signs (+/-) of the operator expansion, one per frame.
    #[arg(long, value_parser = parse::signs)]
    signs: Option<::std::vec::Vec<Sign>>,
}

impl FrameConfig {
    fn partition(&self) -> CliResult<BasisPartition> {
        Ok(partition_basis(gell_mann_basis(self.dim)?, &self.sizes)?)
    }

    fn gamma(&self) -> Vec<f64> {
        match &self.gamma {
            Gamma::Uniform => uniform_weights(self.sizes.len()),
            Gamma::List(g) => g.clone(),
        }
    }

    fn signs(&self) -> CliResult<Vec<Sign>> {
        let n = self.sizes.len();
        match &self.signs {
            None => Ok(vec![Sign::Plus; n]),
            Some(s) if s.len() == 1 => Ok(vec![s[0]; n]),
            Some(s) if s.len() == n => Ok(s.clone()),
            Some(s) => Err(CliError::Domain(format!("{} signs given for {n} frames", s.len()))),
        }
    }
}

#[derive(Subcommand)]
enum GeamCommand {
    /// Build a GEAM from the Gell-Mann basis.
    Build {
        #[command(flatten)]
        frames: FrameConfig,
        /// Design constant; a fraction such as 1/9 is parsed exactly. A list
        /// gives one constant per frame.
        #[arg(long = "s", value_parser = parse::real_list)]
        s: ::std::vec::Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-validate a GEAM file and write it back in canonical form.
    Validate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute the conical-design certificate of a GEAM file.
    CheckDesign {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Largest design constant keeping every operator positive.
    MaxS {
        #[command(flatten)]
        frames: FrameConfig,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    geam: PathBuf,
    /// Number of frames entering with a minus sign.
    #[arg(short = 'l', long = "l")]
    negative: usize,
    /// Number of frames used; defaults to all.
    #[arg(short = 'k', long = "k")]
    total: Option<usize>,
    /// Rotation per frame (identity, perm:i,j,..., perm:random, exp:<scale>);
    /// a single value applies to every frame.
    #[arg(long = "rotation", value_parser = parse::rotation, default_value = "identity")]
    rotations: Vec<Rotation>,
    /// State file to run detection on.
    #[arg(long)]
    detect: Option<PathBuf>,
    /// Sample the positivity ratio and minimize over product states.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Random projectors sampled by --verify.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    witness: PathBuf,
    #[arg(long)]
    states: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CriteriaArgs {
    #[arg(long)]
    geam_a: PathBuf,
    /// Defaults to the GEAM on A.
    #[arg(long)]
    geam_b: Option<PathBuf>,
    #[arg(long)]
    states: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    MaxEntangled,
    Isotropic,
    MaxMixed,
}

#[derive(Subcommand)]
enum StateCommand {
    /// Maximally entangled, isotropic or maximally mixed states.
    Canonical {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        /// Isotropic mixing parameter.
        #[arg(short, long, value_parser = parse::real)]
        p: Option<f64>,
        /// For max-mixed: a single system instead of d x d.
        #[arg(long)]
        single: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random states of fixed rank, or random separable mixtures.
    Random {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        /// Rank of each state; defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit bipartite d x d separable mixtures with at most this many terms.
        #[arg(long)]
        separable: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn tolerance(flag: Option<f64>, default: f64) -> CliResult<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("GEAM_TOL") {
            Ok(v) => parse::real(&v).map_err(|e| CliError::Input(format!("GEAM_TOL: {e}")))?,
            Err(_) => default,
        },
    };
    if tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    let mut text = text.to_owned();
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    emit(output, &text)
}

fn load_geam(path: &Path, tol: f64) -> CliResult<Geam> {
    Ok(geam_from_json(&read(path)?, tol)?)
}

fn load_states(path: &Path) -> CliResult<Vec<DensityMatrix>> {
    Ok(states_from_json(&read(path)?)?)
}

fn run_geam(cmd: GeamCommand, tol_flag: Option<f64>) -> CliResult<()> {
    match cmd {
        GeamCommand::Build { frames, s, output } => {
            let n = frames.sizes.len();
            let constants = match s.len() {
                1 => vec![s[0]; n],
                m if m == n => s,
                m => return Err(CliError::Domain(format!("{m} design constants given for {n} frames"))),
            };
            let geam = build_geam_per_frame(&frames.partition()?, &frames.gamma(), &constants, &frames.signs()?)?;
            emit(output.as_deref(), &geam_to_json(&geam)?)
        }
        GeamCommand::Validate { input, output } => {
            let geam = load_geam(&input, tolerance(tol_flag, DEFAULT_TOL)?)?;
            emit(output.as_deref(), &geam_to_json(&geam)?)
        }
        GeamCommand::CheckDesign { input, output } => {
            let tol = tolerance(tol_flag, DEFAULT_TOL)?;
            let geam = load_geam(&input, tol)?;
            emit_json(output.as_deref(), &check_conical_design(&geam, tol))
        }
        GeamCommand::MaxS { frames, output } => {
            let partition = frames.partition()?;
            let gamma = frames.gamma();
            let s = max_feasible_s(&partition, &gamma, &frames.signs()?)?;
            let cap = partition
                .group_sizes()
                .iter()
                .zip(&gamma)
                .map(|(&m, &g)| geam_core::geam::frame_cap(frames.dim, m, g))
                .fold(f64::INFINITY, f64::min);
            emit_json(output.as_deref(), &json!({ "max_s": s, "cap": cap }))
        }
    }
}

fn rotation_for(request: &Rotation, size: usize, alpha: usize, seed: u64) -> CliResult<RotationMatrix> {
    let mut rng = GaussianRng::derive(seed, alpha as u64);
    let spec = match request {
        Rotation::Identity => RotationSpec::Identity { size },
        Rotation::Permutation(perm) => RotationSpec::Permutation { perm: perm.clone() },
        Rotation::RandomPermutation => RotationSpec::Permutation {
            perm: random_permutation(size, &mut rng),
        },
        Rotation::Exponential(scale) => RotationSpec::Exponential {
            generator: random_generator(size, *scale, &mut rng),
        },
    };
    Ok(make_rotation(size, spec)?)
}

fn detections(witness: &Witness, states: &[DensityMatrix], tol: f64) -> CliResult<Value> {
    let records = states
        .iter()
        .map(|rho| detect(witness, rho, tol))
        .collect::<geam_core::Result<Vec<_>>>()?;
    Ok(serde_json::to_value(records).expect("detections serialize"))
}

fn run_witness(args: WitnessArgs, tol_flag: Option<f64>) -> CliResult<()> {
    let geam = load_geam(&args.geam, tolerance(tol_flag, DEFAULT_TOL)?)?;
    let total = args.total.unwrap_or(geam.frame_count());
    if total > geam.frame_count() {
        return Err(CliError::Domain(format!(
            "K = {total} exceeds the {} frames of the GEAM",
            geam.frame_count()
        )));
    }
    let requests = match args.rotations.len() {
        1 => vec![args.rotations[0].clone(); total],
        m if m == total => args.rotations.clone(),
        m => return Err(CliError::Domain(format!("{m} rotations given for K = {total} frames"))),
    };
    let rotations = requests
        .iter()
        .enumerate()
        .map(|(alpha, r)| rotation_for(r, geam.frame(alpha).len(), alpha, args.seed))
        .collect::<CliResult<Vec<_>>>()?;
    let spec = build_map(&geam, args.negative, total, rotations)?;
    let witness = choi_witness(&spec)?;

    let mut doc = serde_json::to_value(WitnessDoc::from_witness(&witness)).expect("witness serializes");
    if let Some(path) = &args.detect {
        let states = load_states(path)?;
        doc["detections"] = detections(&witness, &states, tolerance(tol_flag, DETECTION_TOL)?)?;
    }
    if args.verify {
        let d = geam.dim();
        let mut rng = GaussianRng::derive(args.seed, u64::MAX);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..args.samples {
            let psi = rng.unit_vector(d);
            let projector = &psi * psi.adjoint();
            worst = worst.max(mehta_ratio(&spec, &projector)?);
        }
        let min = min_product_expectation(witness.matrix(), witness.dims(), args.restarts, args.seed)?;
        doc["verification"] = json!({
            "mehta_max_ratio": worst,
            "mehta_limit": 1.0 / (d as f64 - 1.0),
            "mehta_samples": args.samples,
            "min_product_expectation": min.value,
            "restarts": args.restarts,
            "seed": args.seed,
        });
    }
    emit_json(args.output.as_deref(), &doc)
}

fn run_detect(args: DetectArgs, tol_flag: Option<f64>) -> CliResult<()> {
    let doc: WitnessDoc = serde_json::from_str(&read(&args.witness)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.witness.display())))?;
    let witness = doc.into_witness()?;
    let states = load_states(&args.states)?;
    let records = detections(&witness, &states, tolerance(tol_flag, DETECTION_TOL)?)?;
    emit_json(args.output.as_deref(), &records)
}

fn run_criteria(args: CriteriaArgs, tol_flag: Option<f64>) -> CliResult<()> {
    let geam_tol = tolerance(tol_flag, DEFAULT_TOL)?;
    let geam_a = load_geam(&args.geam_a, geam_tol)?;
    let geam_b = match &args.geam_b {
        Some(path) => load_geam(path, geam_tol)?,
        None => geam_a.clone(),
    };
    let states = load_states(&args.states)?;
    let tol = tolerance(tol_flag, CRITERION_TOL)?;

    let ids = [CriterionId::Trace, CriterionId::TraceNorm, CriterionId::Enhanced];
    let mut violations = [0usize; 3];
    let mut errors = 0usize;
    let mut reports = Vec::with_capacity(states.len());
    for (index, outcome) in evaluate_batch(&geam_a, &geam_b, &states, tol).into_iter().enumerate() {
        let entries: Vec<Value> = match outcome {
            Err(e) => {
                errors += 1;
                vec![json!({ "error": e.to_string() })]
            }
            Ok(list) => list
                .into_iter()
                .zip(ids)
                .enumerate()
                .map(|(slot, (r, id))| match r {
                    Ok(report) => {
                        violations[slot] += usize::from(report.violated);
                        serde_json::to_value(report).expect("report serializes")
                    }
                    Err(e) => {
                        errors += 1;
                        json!({ "criterion": id, "error": e.to_string() })
                    }
                })
                .collect(),
        };
        reports.push(json!({ "state": index, "reports": entries }));
    }
    let summary = json!({
        "states": states.len(),
        "violations": {
            "TRACE": violations[0],
            "TRACE_NORM": violations[1],
            "ENHANCED": violations[2],
        },
        "errors": errors,
    });
    emit_json(args.output.as_deref(), &json!({ "reports": reports, "summary": summary }))
}

fn run_state(cmd: StateCommand) -> CliResult<()> {
    match cmd {
        StateCommand::Canonical { kind, dim, p, single, output } => {
            let kind = match kind {
                Kind::MaxEntangled => CanonicalKind::MaxEntangled,
                Kind::Isotropic => CanonicalKind::Isotropic {
                    p: p.ok_or_else(|| CliError::Domain("isotropic states need -p".into()))?,
                },
                Kind::MaxMixed => CanonicalKind::MaxMixed { bipartite: !single },
            };
            let rho = canonical_state(kind, dim)?;
            emit(output.as_deref(), &states_to_json(&[rho])?)
        }
        StateCommand::Random { dim, rank, count, seed, separable, output } => {
            let mut rng = GaussianRng::new(seed);
            let states = (0..count)
                .map(|_| match separable {
                    Some(max_terms) => {
                        let terms = 1 + (rng.next_u64() % max_terms.max(1) as u64) as usize;
                        mix_separable(&random_separable_mixture(dim, dim, terms, &mut rng)?)
                    }
                    None => random_state_with(dim, rank.unwrap_or(dim), &mut rng),
                })
                .collect::<geam_core::Result<Vec<_>>>()?;
            emit(output.as_deref(), &states_to_json(&states)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Geam(cmd) => run_geam(cmd, cli.tol),
        Command::Witness(args) => run_witness(args, cli.tol),
        Command::Detect(args) => run_detect(args, cli.tol),
        Command::Criteria(args) => run_criteria(args, cli.tol),
        Command::State(cmd) => run_state(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geamtool: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
