//! The `gsa` experiment runner.
//!
//! Three subcommands: `alloc` computes an allocation from an index table,
//! `toycase` sweeps the analytical toy cases, `estimate` runs an estimation
//! pipeline with replications. Every option can also come from a TOML file
//! given with `--config`; command-line flags take precedence.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 degenerate game,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::allocation::{
    pme_from_total_indices, proportional_values, proportional_values_extended, shapley_coalitional,
    Allocation, Method, ANALYTIC_ZERO_TOL, ESTIMATED_ZERO_TOL,
};
use crate::coalition::{format_value, GameTable};
use crate::error::{Error, ErrorClass, Result};
use crate::estimators::{
    replicate_with_ci, DataSet, EstimatorKind, IndexSource, McBudget, ReplicationScheme,
    ReplicationSummary,
};
use crate::gaussian::{rho_grid, write_sweep_csv, SweepRow, ToyCase, ToyCaseKind};
use crate::models::{
    sample_robot_inputs, GaussianSampler, InputLaw, Ishigami, IshigamiConfig, Model, RobotArm,
};
use crate::rng::{self, purpose};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "gsa",
    version,
    about = "Shapley effects and proportional marginal effects"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Index values at or below this threshold count as zero.
    #[arg(long, global = true)]
    zero_tol: Option<f64>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores when absent).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Allocate the grand value of an index table.
    Alloc(AllocArgs),
    /// Analytical Shapley effects and PME of a toy case over a parameter grid.
    Toycase(ToycaseArgs),
    /// Estimate indices, allocations and confidence intervals.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args, Default)]
struct AllocArgs {
    /// Index table CSV (`coalition,value`).
    #[arg(long)]
    table: Option<PathBuf>,
    /// shapley, pme, pv0 or pv.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args, Default)]
struct ToycaseArgs {
    /// exogenous, unbalanced, interaction or joke.
    #[arg(long)]
    case: Option<String>,
    /// Correlation values: `grid`, a list `a,b,c` or a range `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Coefficient values (unbalanced case).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Interaction values in [0, 1] (interaction case).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Also write the total index table; needs a single grid point.
    #[arg(long)]
    export_table: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct EstimateArgs {
    /// ishigami, robot or gaussian-linear.
    #[arg(long)]
    model: Option<String>,
    /// double-mc or knn.
    #[arg(long)]
    method: Option<String>,
    /// Toy case for the gaussian-linear model.
    #[arg(long)]
    case: Option<String>,
    /// Correlation value or grid (Ishigami and toy cases).
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Coefficient of the unbalanced toy case.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Interaction parameter of the interaction toy case.
    #[arg(long)]
    alpha: Option<f64>,
    /// Joint draws for the output variance.
    #[arg(long)]
    nv: Option<usize>,
    /// Outer draws per coalition.
    #[arg(long)]
    no: Option<usize>,
    /// Inner conditional draws per outer draw.
    #[arg(long)]
    ni: Option<usize>,
    /// Sample size for given-data estimation.
    #[arg(long)]
    n: Option<usize>,
    /// Neighbour count for given-data estimation.
    #[arg(long)]
    k: Option<usize>,
    /// Replications.
    #[arg(long)]
    reps: Option<usize>,
    /// independent-seeds, subsample80 or same-seed.
    #[arg(long)]
    scheme: Option<String>,
    /// Confidence level of the intervals.
    #[arg(long)]
    level: Option<f64>,
    /// Input/output sample (`x1,...,xd,y`) instead of a simulated one.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Write the simulated sample used for given-data estimation.
    #[arg(long)]
    export_data: Option<PathBuf>,
}

/// Configuration file schema. Top-level keys mirror the global flags; each
/// subcommand reads its own table.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    zero_tol: Option<f64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    #[serde(default)]
    alloc: FileAlloc,
    #[serde(default)]
    toycase: FileToycase,
    #[serde(default)]
    estimate: FileEstimate,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAlloc {
    table: Option<PathBuf>,
    method: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileToycase {
    case: Option<String>,
    rho: Option<GridSpec>,
    beta: Option<GridSpec>,
    alpha: Option<GridSpec>,
    export_table: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEstimate {
    model: Option<String>,
    method: Option<String>,
    case: Option<String>,
    rho: Option<GridSpec>,
    beta: Option<f64>,
    alpha: Option<f64>,
    nv: Option<usize>,
    no: Option<usize>,
    ni: Option<usize>,
    n: Option<usize>,
    k: Option<usize>,
    reps: Option<usize>,
    scheme: Option<String>,
    level: Option<f64>,
    data: Option<PathBuf>,
    export_data: Option<PathBuf>,
}

/// A grid given in a config file: a number, a list, or a string in flag syntax.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    One(f64),
    List(Vec<f64>),
    Text(String),
}

impl GridSpec {
    fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::One(v) => Ok(vec![*v]),
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Text(s) => parse_grid(s),
        }
    }
}

/// Parses `grid`, `a,b,c` or `start:stop:step`.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text == "grid" {
        return Ok(rho_grid());
    }
    let number = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::contract(format!("invalid number `{s}` in grid `{text}`")))
    };
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::contract(format!(
                "range `{text}` must be start:stop:step"
            )));
        }
        let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(Error::contract(format!(
                "range `{text}` is empty or has a nonpositive step"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(Error::contract("empty grid"));
    }
    Ok(values)
}

fn grid(flag: &Option<String>, file: &Option<GridSpec>, default: Vec<f64>) -> Result<Vec<f64>> {
    match (flag, file) {
        (Some(s), _) => parse_grid(s),
        (None, Some(g)) => g.values(),
        (None, None) => Ok(default),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Degenerate => 2,
                ErrorClass::Numerical => 3,
            }
        }
    }
}

/// Settings shared by all subcommands after merging flags and file.
#[derive(Debug)]
struct Common {
    seed: u64,
    zero_tol: Option<f64>,
    out: Option<PathBuf>,
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let file = match &cli.global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<FileConfig>(&text).map_err(|e| Error::Parse {
                line: 0,
                message: format!("{}: {e}", path.display()),
            })?
        }
        None => FileConfig::default(),
    };
    let common = Common {
        seed: cli.global.seed.or(file.seed).unwrap_or(0),
        zero_tol: cli.global.zero_tol.or(file.zero_tol),
        out: cli.global.out.clone().or(file.out.clone()),
    };
    let jobs = cli.global.jobs.or(file.jobs);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::contract("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::contract(format!("thread pool: {e}")))?;
    // Commands write to buffers so that they can run inside the pool.
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = pool.install(|| match cli.command {
        Command::Alloc(a) => cmd_alloc(&common, a, &file.alloc, &mut out, &mut err),
        Command::Toycase(t) => cmd_toycase(&common, t, &file.toycase, &mut out),
        Command::Estimate(e) => cmd_estimate(&common, e, &file.estimate, &mut out, &mut err),
    });
    stdout.write_all(&out)?;
    stderr.write_all(&err)?;
    result
}

fn config_hash(resolved: &str) -> String {
    let digest = Sha256::digest(resolved.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the output through `body`, prefixed with the provenance comment line.
fn emit(
    common: &Common,
    resolved: &str,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let header = format!(
        "# gsa {VERSION} seed={} config={}\n",
        common.seed,
        config_hash(resolved)
    );
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(header.as_bytes())?;
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            stdout.write_all(header.as_bytes())?;
            body(stdout)?;
        }
    }
    Ok(())
}

fn read_table(path: &Path) -> Result<GameTable> {
    GameTable::read_csv(BufReader::new(File::open(path)?))
}

fn cmd_alloc(
    common: &Common,
    args: AllocArgs,
    file: &FileAlloc,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let path = args
        .table
        .or(file.table.clone())
        .ok_or_else(|| Error::contract("alloc needs --table"))?;
    let method: Method = args
        .method
        .or(file.method.clone())
        .unwrap_or_else(|| "pme".into())
        .parse()?;
    let tau = common.zero_tol.unwrap_or(ANALYTIC_ZERO_TOL);
    let table = read_table(&path)?;
    let allocation = match method {
        Method::Shapley => shapley_coalitional(&table),
        Method::Pme => pme_from_total_indices(&table, tau)?,
        Method::Pv0 => proportional_values_extended(&table, tau)?,
        Method::Pv => proportional_values(&table)?,
        Method::RandomOrder => {
            return Err(Error::contract(
                "random-order allocations need an ordering pmf",
            ));
        }
    };
    for w in &allocation.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    if allocation.degenerate {
        writeln!(
            stderr,
            "error: degenerate game: grand value {} is not above {tau}",
            table.grand_value()
        )?;
        return Ok(2);
    }
    let resolved = format!(
        "alloc table={} method={method} tau={} values={:?}",
        path.display(),
        format_value(tau),
        table.values()
    );
    emit(common, &resolved, stdout, |w| allocation.write_csv(w))?;
    Ok(0)
}

fn toy_case(kind: ToyCaseKind, rho: f64, beta: f64, alpha: f64) -> ToyCase {
    match kind {
        ToyCaseKind::Exogenous => ToyCase::ExogenousLinear { rho },
        ToyCaseKind::Unbalanced => ToyCase::UnbalancedLinear { rho, beta },
        ToyCaseKind::Interaction => ToyCase::InteractionLinear { rho, alpha },
        ToyCaseKind::Joke => ToyCase::ShapleyJoke { rho },
    }
}

fn cmd_toycase(
    common: &Common,
    args: ToycaseArgs,
    file: &FileToycase,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let kind: ToyCaseKind = args
        .case
        .or(file.case.clone())
        .ok_or_else(|| Error::contract("toycase needs --case"))?
        .parse()?;
    let tau = common.zero_tol.unwrap_or(ANALYTIC_ZERO_TOL);
    let rhos = grid(&args.rho, &file.rho, rho_grid())?;
    let betas = grid(&args.beta, &file.beta, vec![2.0])?;
    let alphas = grid(&args.alpha, &file.alpha, vec![0.5])?;
    let mut axes: Vec<(&'static str, &Vec<f64>)> = vec![("rho", &rhos)];
    match kind {
        ToyCaseKind::Unbalanced => axes.push(("beta", &betas)),
        ToyCaseKind::Interaction => axes.push(("alpha", &alphas)),
        _ => {}
    }
    let swept: Vec<_> = axes.iter().filter(|(_, v)| v.len() > 1).collect();
    if swept.len() > 1 {
        return Err(Error::contract(
            "only one toy-case parameter may take several values",
        ));
    }
    let (param_name, values) = match swept.first() {
        Some((name, v)) => (*name, (*v).clone()),
        None => ("rho", rhos.clone()),
    };

    let mut rows = Vec::new();
    let mut last_table = None;
    for &value in &values {
        let pick = |name: &str, fixed: &Vec<f64>| if name == param_name { value } else { fixed[0] };
        let case = toy_case(
            kind,
            pick("rho", &rhos),
            pick("beta", &betas),
            pick("alpha", &alphas),
        );
        let (shapley, pme) = case.pipeline_allocations(tau)?;
        for player in 0..case.players() {
            rows.push(SweepRow {
                param_name,
                param_value: value,
                player,
                shapley: shapley.shares[player],
                pme: pme.shares[player],
            });
        }
        last_table = Some(case.total_table()?);
    }

    let export = args.export_table.or(file.export_table.clone());
    if let Some(path) = &export {
        if values.len() != 1 {
            return Err(Error::contract("--export-table needs a single grid point"));
        }
        let table = last_table.expect("one grid point");
        let mut w = BufWriter::new(File::create(path)?);
        table.write_csv(&mut w)?;
        w.flush()?;
    }

    let resolved = format!(
        "toycase case={kind} rho={rhos:?} beta={betas:?} alpha={alphas:?} tau={}",
        format_value(tau)
    );
    emit(common, &resolved, stdout, |w| write_sweep_csv(&rows, w))?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    Ishigami,
    Robot,
    GaussianLinear,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ishigami" => Ok(ModelKind::Ishigami),
            "robot" => Ok(ModelKind::Robot),
            "gaussian-linear" => Ok(ModelKind::GaussianLinear),
            other => Err(Error::contract(format!("unknown model `{other}`"))),
        }
    }
}

impl ModelKind {
    fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ishigami => "ishigami",
            ModelKind::Robot => "robot",
            ModelKind::GaussianLinear => "gaussian-linear",
        }
    }
}

/// Fully resolved `estimate` settings.
#[derive(Debug)]
struct EstimatePlan {
    model: ModelKind,
    method: EstimatorKind,
    case: ToyCaseKind,
    rhos: Vec<f64>,
    beta: f64,
    alpha: f64,
    nv: usize,
    no: usize,
    ni: usize,
    n: usize,
    k: usize,
    reps: usize,
    scheme: ReplicationScheme,
    level: f64,
    tau: f64,
    data: Option<PathBuf>,
}

impl EstimatePlan {
    fn resolve(
        common: &Common,
        a: EstimateArgs,
        f: &FileEstimate,
    ) -> Result<(Self, Option<PathBuf>)> {
        let model: ModelKind = a
            .model
            .or(f.model.clone())
            .ok_or_else(|| Error::contract("estimate needs --model"))?
            .parse()?;
        let default_method = match model {
            ModelKind::Robot => "knn",
            _ => "double-mc",
        };
        let method: EstimatorKind = a
            .method
            .or(f.method.clone())
            .unwrap_or_else(|| default_method.into())
            .parse()?;
        let data = a.data.or(f.data.clone());
        if model == ModelKind::Robot && method == EstimatorKind::DoubleMc {
            return Err(Error::contract(
                "the robot arm input law has no conditional sampler; use --method knn",
            ));
        }
        if data.is_some() && method != EstimatorKind::Knn {
            return Err(Error::contract("--data needs --method knn"));
        }
        let default_scheme = match method {
            EstimatorKind::DoubleMc => "independent-seeds",
            EstimatorKind::Knn => "subsample80",
        };
        let default_reps = match model {
            ModelKind::Robot => 100,
            _ => 20,
        };
        let case: ToyCaseKind = a
            .case
            .or(f.case.clone())
            .unwrap_or_else(|| "exogenous".into())
            .parse()?;
        let rhos = grid(&a.rho, &f.rho, vec![0.0])?;
        if model == ModelKind::Robot && rhos != [0.0] {
            return Err(Error::contract("the robot arm has no rho parameter"));
        }
        let plan = Self {
            model,
            method,
            case,
            rhos,
            beta: a.beta.or(f.beta).unwrap_or(2.0),
            alpha: a.alpha.or(f.alpha).unwrap_or(0.5),
            nv: a.nv.or(f.nv).unwrap_or(20_000),
            no: a.no.or(f.no).unwrap_or(500),
            ni: a.ni.or(f.ni).unwrap_or(100),
            n: a.n.or(f.n).unwrap_or(2000),
            k: a.k.or(f.k).unwrap_or(6),
            reps: a.reps.or(f.reps).unwrap_or(default_reps),
            scheme: a
                .scheme
                .or(f.scheme.clone())
                .unwrap_or_else(|| default_scheme.into())
                .parse()?,
            level: a.level.or(f.level).unwrap_or(0.9),
            tau: common.zero_tol.unwrap_or(ESTIMATED_ZERO_TOL),
            data,
        };
        Ok((plan, a.export_data.or(f.export_data.clone())))
    }

    fn input_names(&self, d: usize) -> Vec<String> {
        match self.model {
            ModelKind::Robot if self.data.is_none() => RobotArm::INPUT_NAMES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            _ => (1..=d).map(|j| format!("X{j}")).collect(),
        }
    }

    fn param_name(&self) -> &'static str {
        match self.model {
            ModelKind::Robot => "k",
            _ => "rho",
        }
    }
}

/// One report block: a parameter value with its replication summary.
struct ReportBlock {
    param_value: f64,
    summary: ReplicationSummary,
    analytic: Option<(Allocation, Allocation)>,
    names: Vec<String>,
}

fn cmd_estimate(
    common: &Common,
    args: EstimateArgs,
    file: &FileEstimate,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (plan, export) = EstimatePlan::resolve(common, args, file)?;
    let budget = McBudget::new(plan.nv, plan.no, plan.ni, common.seed)?;
    let start = std::time::Instant::now();
    let mut blocks = Vec::new();
    let mut exported = false;

    match plan.model {
        ModelKind::Robot => {
            let data = match &plan.data {
                Some(path) => DataSet::read_csv(BufReader::new(File::open(path)?))?,
                None => DataSet::from_model(sample_robot_inputs(plan.n, common.seed), &RobotArm)?,
            };
            if let Some(path) = &export {
                write_data(path, &data)?;
                exported = true;
            }
            let source = IndexSource::GivenData {
                data: &data,
                k: plan.k,
            };
            let summary = replicate_with_ci(
                &source,
                plan.reps,
                plan.scheme,
                plan.level,
                plan.tau,
                common.seed,
            )?;
            blocks.push(ReportBlock {
                param_value: plan.k as f64,
                summary,
                analytic: None,
                names: plan.input_names(data.dim()),
            });
        }
        ModelKind::Ishigami | ModelKind::GaussianLinear => {
            for (idx, &rho) in plan.rhos.iter().enumerate() {
                let (model, law, analytic): (Box<dyn Model>, GaussianSampler, _) = match plan.model
                {
                    ModelKind::Ishigami => {
                        let cfg = IshigamiConfig::new(rho)?;
                        (Box::new(Ishigami), cfg.input_law()?, None)
                    }
                    _ => {
                        let case = toy_case(plan.case, rho, plan.beta, plan.alpha);
                        let sigma = case.covariance()?;
                        let law =
                            GaussianSampler::new(nalgebra::DVector::zeros(case.players()), sigma)?;
                        let reference = case.pipeline_allocations(ANALYTIC_ZERO_TOL)?;
                        (Box::new(case), law, Some(reference))
                    }
                };
                let d = law.dim();
                let summary = match plan.method {
                    EstimatorKind::DoubleMc => {
                        let source = IndexSource::MonteCarlo {
                            model: model.as_ref(),
                            law: &law,
                            budget,
                        };
                        replicate_with_ci(
                            &source,
                            plan.reps,
                            plan.scheme,
                            plan.level,
                            plan.tau,
                            common.seed,
                        )?
                    }
                    EstimatorKind::Knn => {
                        let data = match &plan.data {
                            Some(path) => DataSet::read_csv(BufReader::new(File::open(path)?))?,
                            None => {
                                let mut stream =
                                    rng::stream(common.seed, purpose::DATASET, idx as u64, 0);
                                DataSet::from_model(
                                    law.sample_joint(plan.n, &mut stream),
                                    model.as_ref(),
                                )?
                            }
                        };
                        if data.dim() != d {
                            return Err(Error::contract(
                                "data set dimension does not match the model",
                            ));
                        }
                        if let Some(path) = &export {
                            if plan.rhos.len() > 1 {
                                return Err(Error::contract("--export-data needs a single rho"));
                            }
                            write_data(path, &data)?;
                            exported = true;
                        }
                        let source = IndexSource::GivenData {
                            data: &data,
                            k: plan.k,
                        };
                        replicate_with_ci(
                            &source,
                            plan.reps,
                            plan.scheme,
                            plan.level,
                            plan.tau,
                            common.seed,
                        )?
                    }
                };
                blocks.push(ReportBlock {
                    param_value: rho,
                    summary,
                    analytic,
                    names: plan.input_names(d),
                });
            }
        }
    }
    if export.is_some() && !exported {
        return Err(Error::contract(
            "--export-data applies to given-data estimation only",
        ));
    }

    let mut max_gap: Option<f64> = None;
    for b in &blocks {
        if let Some((sh, pme)) = &b.analytic {
            for i in 0..sh.players() {
                let g = (b.summary.shapley.mean[i] - sh.shares[i])
                    .abs()
                    .max((b.summary.pme.mean[i] - pme.shares[i]).abs());
                max_gap = Some(max_gap.map_or(g, |m: f64| m.max(g)));
            }
        }
    }

    let resolved = format!("estimate {plan:?} seed={}", common.seed);
    emit(common, &resolved, stdout, |w| {
        write_report(w, &plan, &budget, &blocks, max_gap)
    })?;
    writeln!(
        stderr,
        "{} via {}: {} replications, wall time {:.3} s",
        plan.model.as_str(),
        plan.method,
        plan.reps,
        start.elapsed().as_secs_f64()
    )?;
    for b in &blocks {
        if b.summary.clamped > 0 {
            writeln!(
                stderr,
                "note: {} raw index estimates clamped to [0, 1] at {}",
                b.summary.clamped, b.param_value
            )?;
        }
    }
    if let Some(g) = max_gap {
        writeln!(stderr, "max |estimate - analytic| = {g:.6}")?;
    }
    Ok(0)
}

fn write_data(path: &Path, data: &DataSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    data.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_report(
    w: &mut dyn Write,
    plan: &EstimatePlan,
    budget: &McBudget,
    blocks: &[ReportBlock],
    max_gap: Option<f64>,
) -> Result<()> {
    match plan.method {
        EstimatorKind::DoubleMc => writeln!(
            w,
            "# method={} nv={} no={} ni={} reps={} scheme={} level={} zero_tol={}",
            plan.method,
            budget.nv,
            budget.no,
            budget.ni,
            plan.reps,
            plan.scheme.as_str(),
            plan.level,
            plan.tau
        )?,
        EstimatorKind::Knn => writeln!(
            w,
            "# method={} n={} k={} reps={} scheme={} level={} zero_tol={}",
            plan.method,
            plan.n,
            plan.k,
            plan.reps,
            plan.scheme.as_str(),
            plan.level,
            plan.tau
        )?,
    }
    if let Some(g) = max_gap {
        writeln!(w, "# max_abs_gap={}", format_value(g))?;
    }
    writeln!(
        w,
        "model,param_name,param_value,player,index,mean,ci_low,ci_high,analytic"
    )?;
    for b in blocks {
        let parts = [("shapley", &b.summary.shapley), ("pme", &b.summary.pme)];
        for (which, (index, stats)) in parts.iter().enumerate() {
            for i in 0..stats.mean.len() {
                let analytic = match &b.analytic {
                    Some(pair) => {
                        let a = if which == 0 { &pair.0 } else { &pair.1 };
                        format_value(a.shares[i])
                    }
                    None => String::new(),
                };
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    plan.model.as_str(),
                    plan.param_name(),
                    format_value(b.param_value),
                    b.names[i],
                    index,
                    format_value(stats.mean[i]),
                    format_value(stats.low[i]),
                    format_value(stats.high[i]),
                    analytic
                )?;
            }
        }
    }
    Ok(())
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run(std::env::args_os(), &mut out, &mut err)
}
