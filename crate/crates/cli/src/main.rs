//! `cvxlsi`: command-line front end for the checkers.
//!
//! Measures and costs are given as directive tokens (`family gaussian 0 1
//! cost quadratic 1`) or config file paths. Exit status: 0 pass, 1 fail or
//! inconclusive, 2 usage or config error, 3 numerical divergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvxlsi::concentration::{concentration_report, ExperimentConfig, ZooFunction};
use cvxlsi::costs::{make_cost, CostSpec};
use cvxlsi::directives::{parse_cost, parse_tokens, read_table, Config};
use cvxlsi::inequalities::{
    constant_chain, convex_poincare_test, dual_ic_test, generate_tests, lsi_test, ChainDirection, ChainInputs, DualMode,
    InequalityReport, TestFunctionFamily,
};
use cvxlsi::infconv::{hopf_lax_residual, inf_convolution, Engine, Extension, GridFunction, HopfLaxOptions};
use cvxlsi::transport::{criterion_check_discretized, log_grid, CriterionOptions};
use cvxlsi::weak_ot::{random_tilts, weak_ot_solve, weak_transport_verify, SolverOptions, WeakDirection};
use cvxlsi::{CostFunction, Error, Measure1D, Report, Table, Verdict};

#[derive(Parser, Debug)]
#[command(name = "cvxlsi", version, about = "Numerical checks for convex log-Sobolev inequalities on the line")]
struct Cli {
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance for the inequality sweeps.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulus-of-continuity criterion for the transport map.
    CheckCriterion(CriterionArgs),
    /// Convex LSI over a test family.
    LsiTest(LsiArgs),
    /// Dual infimum-convolution inequality over a test family.
    DualIc(DualArgs),
    /// Convex Poincaré inequality over a test family.
    Poincare(PoincareArgs),
    /// Infimum convolution of a tabulated convex function.
    Infconv(InfconvArgs),
    /// Weak barycentric transport between two atomic measures.
    WeakOt(WeakOtArgs),
    /// Monte Carlo concentration of product measures.
    Concentration(ConcentrationArgs),
    /// One link of the explicit constant chain.
    Chain(ChainArgs),
    /// Invariant suite and the Gaussian end-to-end chain.
    Selftest,
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// Directive tokens or config file paths.
    #[arg(allow_negative_numbers = true, num_args = 0..)]
    spec: Vec<String>,
}

#[derive(Args, Debug)]
struct CriterionArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    h_min: f64,
    #[arg(long, default_value_t = 50.0)]
    h_max: f64,
    #[arg(long, default_value_t = 200)]
    h_count: usize,
    #[arg(long, default_value_t = 1e-6)]
    b_min: f64,
    /// Atoms used for non-atomic measures; 0 evaluates the modulus directly.
    #[arg(long, default_value_t = 10_000)]
    discretize: usize,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Lipschitz cap of the test functions.
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 6)]
    breakpoints: usize,
    /// Atoms used for non-atomic measures; 0 keeps the measure as given.
    #[arg(long, default_value_t = 0)]
    discretize: usize,
}

#[derive(Args, Debug)]
struct LsiArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    c: f64,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Minus,
    Plus,
    TwoSided,
}

#[derive(Args, Debug)]
struct DualArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "minus")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Cost scale: the check uses θ(a·).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
struct PoincareArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    a: f64,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Auto,
    Exhaustive,
    Quadratic,
    PiecewiseLinear,
}

#[derive(Args, Debug)]
struct InfconvArgs {
    /// Two-column table `x, f(x)` of a convex function.
    #[arg(long)]
    table: PathBuf,
    /// Cost directive tokens, e.g. `quadratic 1` (Hamiltonian `x²/4`).
    #[arg(long, num_args = 1..=3, default_values = ["quadratic", "1"])]
    cost: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Also compute the Hamilton–Jacobi residual at the interior nodes.
    #[arg(long)]
    residual: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Minus,
    Plus,
}

#[derive(Args, Debug)]
struct WeakOtArgs {
    /// Source measure (and optional cost) tokens.
    #[command(flatten)]
    spec: SpecArgs,
    /// Target measure tokens.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    target: Vec<String>,
    #[arg(long, value_enum, default_value = "minus")]
    direction: DirectionArg,
    /// Cost scale for the verification block.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Tilted samples in the verification block.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Atoms used for non-atomic measures.
    #[arg(long, default_value_t = 32)]
    discretize: usize,
}

#[derive(Args, Debug)]
struct ConcentrationArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Comma-separated zoo: norm, neg-norm, coordinate, normalized-sum,
    /// max-coordinate, max-affine, constant.
    #[arg(long, value_delimiter = ',', default_value = "norm")]
    zoo: Vec<String>,
    #[arg(long, default_value_t = 0.25)]
    t_step: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ChainArg {
    BToC,
    CToDelta,
    CToA,
    AToB,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[arg(value_enum)]
    direction: ChainArg,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    /// Cost directive tokens, e.g. `quadratic` or `hp 3`.
    #[arg(long, num_args = 1..=2, default_values = ["quadratic"])]
    cost: Vec<String>,
    /// Scaling constant `A`; defaults to the cost's declared value.
    #[arg(long = "scaling-a")]
    scaling_a: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    h_min: f64,
    #[arg(long, default_value_t = 50.0)]
    h_max: f64,
    #[arg(long, default_value_t = 20)]
    h_count: usize,
}

/// A failure mapped to an exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergent(_) | Error::EdgeAttained { .. } => 3,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn load(spec: &[String]) -> Result<Config, Failure> {
    Ok(parse_tokens(spec, Path::new("."))?)
}

fn measure_of(cfg: &Config) -> Result<Measure1D, Failure> {
    cfg.measure.clone().ok_or_else(|| usage("no measure given (use `atom`, `gridcdf`, `family` or a config file)"))
}

fn cost_of(cfg: &Config) -> Result<CostFunction, Failure> {
    Ok(make_cost(cfg.cost.as_ref().unwrap_or(&CostSpec::Quadratic { t0: 1.0 }))?)
}

fn maybe_discretize(mu: Measure1D, n: usize) -> Result<Measure1D, Failure> {
    if n == 0 || mu.is_atomic() {
        Ok(mu)
    } else {
        Ok(Measure1D::Atoms(mu.discretize(n)?))
    }
}

fn family(args: &FamilyArgs, seed: u64, mu: &Measure1D) -> Result<Vec<cvxlsi::inequalities::TestFunction>, Failure> {
    let fam = TestFunctionFamily {
        seed,
        count: args.count,
        lipschitz: args.lipschitz,
        max_breakpoints: args.breakpoints,
        specials: true,
    };
    Ok(generate_tests(&fam, mu)?)
}

fn finish(rep: InequalityReport, tol: Option<f64>) -> Report {
    match tol {
        Some(t) => rep.with_tolerance(t).to_report(),
        None => rep.to_report(),
    }
}

fn require_seed(seed: Option<u64>, cmd: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| usage(format!("{cmd} is stochastic and needs --seed")))
}

fn run(cli: &Cli) -> Result<Vec<Report>, Failure> {
    let seed = cli.seed;
    match &cli.command {
        Command::CheckCriterion(a) => {
            let cfg = load(&a.spec.spec)?;
            let mu = measure_of(&cfg)?;
            let cost = cost_of(&cfg)?;
            let t0 = a.t0.or(cost.t0).unwrap_or(1.0);
            let opts = CriterionOptions { h_grid: log_grid(a.h_min, a.h_max, a.h_count), b_min: a.b_min };
            let mut r = criterion_check_discretized(&mu, &cost.as_theta(), t0, &opts, a.discretize)?;
            r.note(format!("measure: {}; cost: {}", mu.describe(), cost.as_theta()));
            Ok(vec![r])
        }
        Command::LsiTest(a) => {
            let cfg = load(&a.spec.spec)?;
            let mu = maybe_discretize(measure_of(&cfg)?, a.family.discretize)?;
            let h = cost_of(&cfg)?.as_h();
            let fam = family(&a.family, seed.unwrap_or(0), &mu)?;
            Ok(vec![finish(lsi_test(&mu, &h, a.c, &fam)?, cli.tol)])
        }
        Command::DualIc(a) => {
            let cfg = load(&a.spec.spec)?;
            let mu = maybe_discretize(measure_of(&cfg)?, a.family.discretize)?;
            let theta = cost_of(&cfg)?.as_theta().scaled(a.a);
            let fam = family(&a.family, seed.unwrap_or(0), &mu)?;
            let mode = match a.mode {
                ModeArg::Minus => DualMode::Minus,
                ModeArg::Plus => DualMode::Plus,
                ModeArg::TwoSided => DualMode::TwoSided,
            };
            let mut r = finish(dual_ic_test(&mu, &theta, a.t, mode, &fam)?, cli.tol);
            r.set("a", a.a);
            Ok(vec![r])
        }
        Command::Poincare(a) => {
            let cfg = load(&a.spec.spec)?;
            let mu = maybe_discretize(measure_of(&cfg)?, a.family.discretize)?;
            let fam = family(&a.family, seed.unwrap_or(0), &mu)?;
            Ok(vec![finish(convex_poincare_test(&mu, a.a, &fam)?, cli.tol)])
        }
        Command::Infconv(a) => {
            let (xs, fs) = read_table(&a.table)?;
            let f = GridFunction::new(xs, fs, Extension::Linear)?;
            let h = make_cost(&parse_cost(&a.cost, Path::new("."))?)?.as_h();
            let theta = h.conjugate();
            let engine = match a.engine {
                EngineArg::Auto => Engine::Auto,
                EngineArg::Exhaustive => Engine::Exhaustive,
                EngineArg::Quadratic => Engine::Quadratic,
                EngineArg::PiecewiseLinear => Engine::PiecewiseLinear,
            };
            let q = inf_convolution(&f, &theta, a.t, f.nodes(), engine)?;
            let mut table = Table::new("infconv", &["x", "f", "q"]);
            for (k, (&x, &v)) in q.nodes().iter().zip(q.values()).enumerate() {
                table.push(vec![x, f.values()[k], v]);
            }
            let mut r = Report::new("infimum-convolution", Verdict::Pass).with_value("t", a.t).with_value("nodes", q.len() as f64);
            r.tables.push(table);
            if a.residual {
                let n = f.nodes();
                let interior: Vec<f64> = n[n.len() / 4..n.len() - n.len() / 4].to_vec();
                let res = hopf_lax_residual(&f, &h, &[a.t], &interior, &HopfLaxOptions::default())?;
                r.set("residual_max", res.max_abs);
                r.set("residual_mean", res.mean_abs);
                r.set("residual_skipped", res.skipped as f64);
                r.tables.push(res.table);
            }
            Ok(vec![r])
        }
        Command::WeakOt(a) => {
            let seed = require_seed(seed, "weak-ot")?;
            let src_cfg = load(&a.spec.spec)?;
            let dst_cfg = load(&a.target)?;
            let atoms = |cfg: &Config| -> Result<cvxlsi::Atoms, Failure> {
                let m = maybe_discretize(measure_of(cfg)?, a.discretize)?;
                Ok(m.as_atoms().expect("discretized").into_owned())
            };
            let (src, dst) = (atoms(&src_cfg)?, atoms(&dst_cfg)?);
            let theta = cost_of(&src_cfg)?.as_theta();
            let res = weak_ot_solve(&src, &dst, &theta, &SolverOptions::default())?;
            let mut r = Report::new("weak-transport-cost", Verdict::Pass)
                .with_value("value", res.value)
                .with_value("gap", res.gap)
                .with_value("iterations", res.iterations as f64)
                .with_value("converged", if res.converged { 1.0 } else { 0.0 });
            let names: Vec<String> = dst.positions().iter().map(|y| format!("y={y}")).collect();
            let mut kernel = Table::new("kernel", &names.iter().map(String::as_str).collect::<Vec<_>>());
            for i in 0..src.len() {
                kernel.push(res.coupling.row(i).to_vec());
            }
            r.tables.push(kernel);
            let direction = match a.direction {
                DirectionArg::Minus => WeakDirection::Minus,
                DirectionArg::Plus => WeakDirection::Plus,
            };
            let samples = random_tilts(&src, a.samples, 3.0, seed)?;
            let v = weak_transport_verify(&src, direction, &theta, a.a, &samples)?;
            Ok(vec![r, v])
        }
        Command::Concentration(a) => {
            let seed = require_seed(seed, "concentration")?;
            let cfg = load(&a.spec.spec)?;
            let base = measure_of(&cfg)?;
            let zoo = a.zoo.iter().map(|z| ZooFunction::parse(z, a.dim, seed)).collect::<Result<Vec<_>, _>>()?;
            if !(a.t_step > 0.0) {
                return Err(usage("--t-step must be positive"));
            }
            let steps = (a.t_max / a.t_step).floor() as usize;
            let t_grid: Vec<f64> = (1..=steps).map(|k| a.t_step * k as f64).collect();
            let exp = ExperimentConfig::new(base, a.dim, a.samples, zoo, t_grid, seed)?;
            Ok(vec![concentration_report(&exp)?])
        }
        Command::Chain(a) => {
            let cost = make_cost(&parse_cost(&a.cost, Path::new("."))?)?;
            let scaling = cost.as_h().scaling.map(|s| (s.a, s.alpha));
            let scaling = match (a.scaling_a, a.alpha, scaling) {
                (Some(x), Some(y), _) => Some((x, y)),
                (Some(x), None, Some((_, y))) => Some((x, y)),
                (None, Some(y), Some((x, _))) => Some((x, y)),
                (None, None, s) => s,
                _ => return Err(usage("give both --scaling-a and --alpha for a cost without declared scaling")),
            };
            let inputs = ChainInputs {
                b: a.b,
                c: a.c,
                a: a.a,
                t0: a.t0,
                theta: cost.as_theta(),
                scaling,
                h_grid: log_grid(a.h_min, a.h_max, a.h_count),
            };
            let direction = match a.direction {
                ChainArg::BToC => ChainDirection::BToC,
                ChainArg::CToDelta => ChainDirection::CToDelta,
                ChainArg::CToA => ChainDirection::CToA,
                ChainArg::AToB => ChainDirection::AToB,
            };
            Ok(vec![constant_chain(direction, &inputs)?])
        }
        Command::Selftest => Ok(cvxlsi::selftest::run(seed.unwrap_or(0))?),
    }
}

fn render(r: &Report) -> String {
    let mut s = r.to_string();
    for t in &r.tables {
        s.push_str(&format!("[table {}]\n", t.name));
        s.push_str(&t.to_csv());
    }
    s
}

fn write_out(dir: &Path, reports: &[Report]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for r in reports {
        fs::write(dir.join(format!("{}.txt", r.check)), r.to_string())?;
        for t in &r.tables {
            fs::write(dir.join(format!("{}.{}.csv", r.check, t.name)), t.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let reports = match run(&cli) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            return ExitCode::from(f.code);
        }
    };
    let quiet_tables = matches!(cli.command, Command::Selftest);
    for r in &reports {
        if quiet_tables {
            print!("{r}");
        } else {
            print!("{}", render(r));
        }
    }
    if let Some(dir) = &cli.out {
        if let Err(e) = write_out(dir, &reports) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    if reports.iter().all(Report::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
