//! The `darwin` command line.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 for
//! numerical failures (non-convergence, singular systems, closed-form
//! deviations) and I/O errors.

pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::ModelError;
use crate::experiments::{
    mean_expected_state, run_delta_sweep, verify_closed_form, CLOSED_FORM_TOLERANCE,
    DEFAULT_GENERATIONS, DEFAULT_SWEEP_EPSILON, DEFAULT_SWEEP_STATES, SECTION_TRAITS,
};
use crate::markov::{
    build_random_transition, hessenberg_build, hessenberg_stationary_closed, stationary_direct,
    stationary_power, ChainSpec, PowerOptions, RandomSource, StationaryDistribution,
    DEFAULT_MAX_ITERATIONS, DEFAULT_POWER_TOLERANCE,
};
use crate::verhulst::{
    bound_report, extinction_condition_holds, simulate, MortalityTable, MutationKernel,
    PopulationVector, VerhulstParams, DEFAULT_BIRTH_RATE, DEFAULT_CAPACITY, DEFAULT_V_MAX,
};

use output::{write_csv, write_table, CsvTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(std::io::Error),
    #[error("cannot write csv: {0}")]
    Write(csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            },
            CliError::Input(_) => 1,
            CliError::Model(e) if e.is_numerical() => 2,
            CliError::Model(_) => 1,
            CliError::Io(_) | CliError::Write(_) | CliError::Failed(_) => 2,
        }
    }
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "darwin", version, about = "Selection-driven drift: population model and Markov chains")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Simulate the trait-structured population and write its trace.
    Verhulst(VerhulstArgs),
    /// Draw a random drift chain and write its transition matrix.
    MarkovGen(MarkovGenArgs),
    /// Stationary distribution of a transition matrix read from CSV.
    Stationary(StationaryArgs),
    /// Stationary distribution of the tridiagonal drift chain.
    Hessenberg(HessenbergArgs),
    /// Expected states of random chains over a grid of delta and seeds.
    Sweep(SweepArgs),
    /// Check the closed-form tridiagonal solution against a direct solve.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct OutputArgs {
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write SVG line charts named `<PREFIX>-<curve>.svg`.
    #[arg(long, value_name = "PREFIX")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerhulstArgs {
    #[arg(long, default_value_t = DEFAULT_GENERATIONS)]
    pub generations: usize,
    /// Birth rate.
    #[arg(long = "b", default_value_t = DEFAULT_BIRTH_RATE)]
    pub birth_rate: f64,
    /// Environmental capacity.
    #[arg(long = "K", default_value_t = DEFAULT_CAPACITY)]
    pub capacity: f64,
    #[arg(long, default_value_t = DEFAULT_V_MAX)]
    pub vmax: usize,
    /// `paper8` (0.9 stay, 0.05 each neighbour) or a CSV file `u,mass`.
    #[arg(long, default_value = "paper8")]
    pub kernel: KernelSource,
    /// `inverse-v`, `constant:<rate>` or a CSV file `v,f_mort`.
    #[arg(long, default_value = "inverse-v")]
    pub mortality: MortalitySource,
    /// Initial population: a count placed at trait 1, or one count per trait
    /// separated by commas.
    #[arg(long, default_value = "100")]
    pub p0: InitialPopulation,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct MarkovGenArgs {
    #[arg(long, default_value_t = DEFAULT_SWEEP_STATES)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEP_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, env = "DARWIN_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverMethod {
    Power,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct StationaryArgs {
    /// Matrix CSV: `n` on the first line, then `n` rows.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverMethod::Direct)]
    pub method: SolverMethod,
    /// Power-iteration stopping threshold on `||pi P - pi||_1`.
    #[arg(long, default_value_t = DEFAULT_POWER_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct HessenbergArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEP_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    /// Use the closed form instead of a direct linear solve.
    #[arg(long)]
    pub closed_form: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = DEFAULT_SWEEP_STATES)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEP_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
    pub deltas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    /// Inclusive state-count range `LO:HI`.
    #[arg(long, default_value = "4:12")]
    pub n_range: StateRange,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.25,0.4")]
    pub delta_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SWEEP_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = CLOSED_FORM_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    NearestNeighbour,
    File(PathBuf),
}

impl FromStr for KernelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "" => Err("empty kernel".into()),
            "paper8" => Ok(KernelSource::NearestNeighbour),
            path => Ok(KernelSource::File(path.into())),
        }
    }
}

impl fmt::Display for KernelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSource::NearestNeighbour => f.write_str("paper8"),
            KernelSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MortalitySource {
    InverseTrait,
    Constant(f64),
    File(PathBuf),
}

impl FromStr for MortalitySource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inverse-v" {
            return Ok(MortalitySource::InverseTrait);
        }
        if let Some(rate) = s.strip_prefix("constant:") {
            return rate
                .parse()
                .map(MortalitySource::Constant)
                .map_err(|_| format!("`{rate}` is not a rate"));
        }
        if s.is_empty() {
            return Err("empty mortality".into());
        }
        Ok(MortalitySource::File(s.into()))
    }
}

impl fmt::Display for MortalitySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MortalitySource::InverseTrait => f.write_str("inverse-v"),
            MortalitySource::Constant(r) => write!(f, "constant:{r}"),
            MortalitySource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPopulation {
    AtFirstTrait(f64),
    Counts(Vec<f64>),
}

fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

fn join_reals(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for InitialPopulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = parse_reals(s)?;
        Ok(match values.as_slice() {
            [single] => InitialPopulation::AtFirstTrait(*single),
            _ => InitialPopulation::Counts(values),
        })
    }
}

impl fmt::Display for InitialPopulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialPopulation::AtFirstTrait(x) => write!(f, "{x}"),
            InitialPopulation::Counts(xs) => f.write_str(&join_reals(xs)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateRange {
    pub lo: usize,
    pub hi: usize,
}

impl StateRange {
    pub fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }
}

impl FromStr for StateRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
        let lo = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
        let hi = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        if lo > hi {
            return Err(format!("empty range {lo}:{hi}"));
        }
        Ok(StateRange { lo, hi })
    }
}

impl fmt::Display for StateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

fn push_output(args: &mut Vec<String>, out: &OutputArgs) {
    if let Some(p) = &out.output {
        args.extend(["--output".into(), p.display().to_string()]);
    }
    if let Some(p) = &out.svg {
        args.extend(["--svg".into(), p.display().to_string()]);
    }
}

impl RunConfig {
    pub fn parse_args<I, T>(argv: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Ok(RunConfig::try_parse_from(argv)?)
    }

    /// Command-line arguments (program name first) that parse back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let mut a: Vec<String> = vec!["darwin".into()];
        match &self.command {
            Command::Verhulst(v) => {
                a.push("verhulst".into());
                a.extend([
                    "--generations".into(),
                    v.generations.to_string(),
                    "--b".into(),
                    v.birth_rate.to_string(),
                    "--K".into(),
                    v.capacity.to_string(),
                    "--vmax".into(),
                    v.vmax.to_string(),
                    "--kernel".into(),
                    v.kernel.to_string(),
                    "--mortality".into(),
                    v.mortality.to_string(),
                    "--p0".into(),
                    v.p0.to_string(),
                ]);
                push_output(&mut a, &v.out);
            }
            Command::MarkovGen(m) => {
                a.push("markov-gen".into());
                a.extend([
                    "--n".into(),
                    m.n.to_string(),
                    "--epsilon".into(),
                    m.epsilon.to_string(),
                    "--delta".into(),
                    m.delta.to_string(),
                    "--seed".into(),
                    m.seed.to_string(),
                ]);
                if let Some(p) = &m.output {
                    a.extend(["--output".into(), p.display().to_string()]);
                }
            }
            Command::Stationary(s) => {
                a.push("stationary".into());
                let method = match s.method {
                    SolverMethod::Power => "power",
                    SolverMethod::Direct => "direct",
                };
                a.extend([
                    "--input".into(),
                    s.input.display().to_string(),
                    "--method".into(),
                    method.into(),
                    "--tol".into(),
                    s.tol.to_string(),
                    "--max-iterations".into(),
                    s.max_iterations.to_string(),
                ]);
                push_output(&mut a, &s.out);
            }
            Command::Hessenberg(h) => {
                a.push("hessenberg".into());
                a.extend([
                    "--n".into(),
                    h.n.to_string(),
                    "--epsilon".into(),
                    h.epsilon.to_string(),
                    "--delta".into(),
                    h.delta.to_string(),
                ]);
                if h.closed_form {
                    a.push("--closed-form".into());
                }
                push_output(&mut a, &h.out);
            }
            Command::Sweep(s) => {
                a.push("sweep".into());
                let seeds: Vec<String> = s.seeds.iter().map(u64::to_string).collect();
                a.extend([
                    "--n".into(),
                    s.n.to_string(),
                    "--epsilon".into(),
                    s.epsilon.to_string(),
                    "--deltas".into(),
                    join_reals(&s.deltas),
                    "--seeds".into(),
                    seeds.join(","),
                ]);
                push_output(&mut a, &s.out);
            }
            Command::Verify(v) => {
                a.push("verify".into());
                a.extend([
                    "--n-range".into(),
                    v.n_range.to_string(),
                    "--delta-grid".into(),
                    join_reals(&v.delta_grid),
                    "--epsilon".into(),
                    v.epsilon.to_string(),
                    "--tolerance".into(),
                    v.tolerance.to_string(),
                ]);
                if let Some(p) = &v.output {
                    a.extend(["--output".into(), p.display().to_string()]);
                }
            }
        }
        a
    }
}

fn emit<T: CsvTable + ?Sized>(
    table: &T,
    path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match path {
        Some(p) => write_csv(table, p),
        None => write_table(table, stdout),
    }
}

fn write_svg(prefix: &Path, curve: &str, title: &str, series: &[(String, Vec<f64>)]) -> Result<(), CliError> {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("-{curve}.svg"));
    std::fs::write(PathBuf::from(name), svg::line_chart(title, series)).map_err(CliError::Io)
}

fn verhulst_params(args: &VerhulstArgs) -> Result<VerhulstParams, CliError> {
    let kernel = match &args.kernel {
        KernelSource::NearestNeighbour => MutationKernel::nearest_neighbour(args.vmax)?,
        KernelSource::File(p) => output::read_kernel_file(p, args.vmax)?,
    };
    let report = kernel.validate();
    if !report.is_ok() {
        let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Input(format!("mutation kernel: {}", lines.join("; "))));
    }
    let mortality = match &args.mortality {
        MortalitySource::InverseTrait => MortalityTable::inverse_trait(args.vmax)?,
        MortalitySource::Constant(r) => MortalityTable::constant(args.vmax, *r)?,
        MortalitySource::File(p) => output::read_mortality_file(p, args.vmax)?,
    };
    Ok(VerhulstParams::new(args.birth_rate, args.capacity, kernel, mortality)?)
}

fn initial_population(args: &VerhulstArgs) -> Result<PopulationVector, CliError> {
    Ok(match &args.p0 {
        InitialPopulation::AtFirstTrait(x) => PopulationVector::concentrated(args.vmax, 1, *x)?,
        InitialPopulation::Counts(xs) => {
            if xs.len() != args.vmax {
                return Err(ModelError::DimensionMismatch {
                    expected: args.vmax,
                    actual: xs.len(),
                }
                .into());
            }
            PopulationVector::new(xs.clone())?
        }
    })
}

fn run_verhulst(args: &VerhulstArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let params = verhulst_params(args)?;
    let p0 = initial_population(args)?;
    let report = bound_report(&params, &p0);
    let _ = writeln!(stderr, "population bound: {:.6}", report.bound);
    let _ = writeln!(
        stderr,
        "bound with ||1 - f_mut||_2 in place of ||1 - f_mort||_inf: {:.6}",
        report.literal_bound
    );
    if !report.certain_death_traits.is_empty() {
        let _ = writeln!(
            stderr,
            "note: f_mort = 1 at traits {:?} (no survivors there)",
            report.certain_death_traits
        );
    }
    let _ = writeln!(stderr, "extinction condition holds: {}", extinction_condition_holds(&params));

    let trace = simulate(&p0, &params, args.generations)?;
    emit(&trace, args.out.output.as_deref(), stdout)?;

    if let Some(prefix) = &args.out.svg {
        write_svg(prefix, "total", "total population", &[("total".into(), trace.totals.clone())])?;
        let mean: Vec<f64> = trace
            .expected_velocities
            .iter()
            .map(|e| e.unwrap_or(f64::NAN))
            .collect();
        write_svg(prefix, "expected-velocity", "expected trait", &[("E_n".into(), mean)])?;
        let sections: Vec<(String, Vec<f64>)> = SECTION_TRAITS
            .iter()
            .filter(|&&v| v <= params.v_max())
            .map(|&v| (format!("v={v}"), trace.section(v)))
            .collect();
        write_svg(prefix, "sections", "population by trait", &sections)?;
        let last = trace.last().counts().to_vec();
        write_svg(prefix, "histogram", "final generation by trait", &[("P".into(), last)])?;
    }
    Ok(())
}

fn report_distribution(
    dist: &StationaryDistribution,
    out: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    emit(dist, out.output.as_deref(), stdout)?;
    let _ = writeln!(stderr, "expected state: {}", output::format_real(dist.expected_state()));
    let _ = writeln!(stderr, "residual: {:e}", dist.residual);
    if let Some(prefix) = &out.svg {
        write_svg(prefix, "pi", "stationary distribution", &[("pi".into(), dist.pi.clone())])?;
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let results = run_delta_sweep(args.n, args.epsilon, &args.deltas, &args.seeds);
    emit(results.as_slice(), args.out.output.as_deref(), stdout)?;
    for (delta, mean) in mean_expected_state(&results, &args.deltas) {
        match mean {
            Some(m) => {
                let _ = writeln!(stderr, "delta {delta}: mean expected state {m:.6}");
            }
            None => {
                let _ = writeln!(stderr, "delta {delta}: no successful runs");
            }
        }
    }
    if let Some(prefix) = &args.out.svg {
        for &delta in &args.deltas {
            let series: Vec<(String, Vec<f64>)> = results
                .iter()
                .filter(|r| r.delta == delta)
                .filter_map(|r| {
                    let run = r.outcome.as_ref().ok()?;
                    Some((format!("seed {}", r.seed), run.distribution.pi.clone()))
                })
                .collect();
            write_svg(prefix, &format!("delta-{delta}"), &format!("delta = {delta}"), &series)?;
        }
    }
    let failed: Vec<String> = results
        .iter()
        .filter_map(|r| {
            r.outcome
                .as_ref()
                .err()
                .map(|e| format!("delta {} seed {}: {e}", r.delta, r.seed))
        })
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Failed(failed.join("\n")));
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let report = verify_closed_form(
        &args.n_range.values(),
        &args.delta_grid,
        args.epsilon,
        args.tolerance,
    )?;
    emit(&report, args.output.as_deref(), stdout)?;
    let _ = writeln!(
        stderr,
        "max distribution deviation {:e}, max expected-state deviation {:e} over {} pairs",
        report.max_distribution_deviation(),
        report.max_expected_state_deviation(),
        report.checks.len()
    );
    let flagged = report.flagged();
    if !flagged.is_empty() {
        let pairs: Vec<String> = flagged
            .iter()
            .map(|c| format!("(n={}, delta={}): {:e}", c.n, c.delta, c.max_deviation()))
            .collect();
        return Err(CliError::Failed(format!(
            "deviation above {:e} at {}",
            args.tolerance,
            pairs.join(", ")
        )));
    }
    Ok(())
}

pub fn execute(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &config.command {
        Command::Verhulst(args) => run_verhulst(args, stdout, stderr),
        Command::MarkovGen(args) => {
            let spec = ChainSpec::new(args.n, args.epsilon, args.delta)?;
            let matrix = build_random_transition(&spec, &mut RandomSource::new(args.seed));
            emit(&matrix, args.output.as_deref(), stdout)
        }
        Command::Stationary(args) => {
            let matrix = output::read_matrix_file(&args.input)?;
            let dist = match args.method {
                SolverMethod::Direct => stationary_direct(&matrix)?,
                SolverMethod::Power => stationary_power(
                    &matrix,
                    PowerOptions {
                        tolerance: args.tol,
                        max_iterations: args.max_iterations,
                    },
                )?,
            };
            report_distribution(&dist, &args.out, stdout, stderr)
        }
        Command::Hessenberg(args) => {
            let spec = ChainSpec::new(args.n, args.epsilon, args.delta)?;
            let dist = if args.closed_form {
                hessenberg_stationary_closed(&spec)?
            } else {
                stationary_direct(&hessenberg_build(&spec)?)?
            };
            report_distribution(&dist, &args.out, stdout, stderr)
        }
        Command::Sweep(args) => run_sweep(args, stdout, stderr),
        Command::Verify(args) => run_verify(args, stdout, stderr),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = RunConfig::parse_args(argv).and_then(|config| execute(&config, stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let text = e.render().to_string();
            let code = CliError::Usage(e).exit_code();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
