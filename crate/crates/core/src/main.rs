//! Command-line front end: loads a model spec file, runs the requested
//! computation and writes deterministic JSON records (and optional CSV
//! curves). Exit codes: 0 success, 2 infinite/vacuous result, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sharpineq::catalog::{cross_multiplicity, weyl_ratio, CrossFamily, CrossSpace};
use sharpineq::config::{LoadedModel, ModelSpec};
use sharpineq::error::Error;
use sharpineq::mean_squared::{
    convergence_curve, random_violation_scan, random_violation_scan_hlp, taikov_constant,
};
use sharpineq::multiplicative::{
    mult_hlp_constant, mult_taikov_constant, mult_taikov_constant_rd, sharp_factor,
    ExponentVector, MultConstant,
};
use sharpineq::report::{csv_curve, csv_table, Report, Value};
use sharpineq::solyar::{hypothesis_satisfied, solyar_scan, Lp};
use sharpineq::spectral::{ExtendedSum, SeriesSum, WeightVector};
use sharpineq::stechkin::{
    g_mu_norm_sq, solve_budget, stechkin_lower_bound, BudgetConvention, StechkinProblem,
};

#[derive(Parser)]
#[command(name = "sharpineq", version, about = "Sharp constants for spectral operator inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON record here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a sharp constant for a model spec file.
    Constant(ConstantArgs),
    /// Solve the best-approximation budget problem.
    Stechkin(StechkinArgs),
    /// Empirical no-violation scans.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Catalog space information.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long)]
    model: PathBuf,
    /// Mean-squared sum constant (default).
    #[arg(long, conflicts_with_all = ["multiplicative", "hlp"])]
    mean_squared: bool,
    /// Multiplicative constant: sup over h of the λ-weighted objective.
    #[arg(long, requires = "lambda")]
    multiplicative: bool,
    /// Use the sup (HLP) form instead of the sum form.
    #[arg(long)]
    hlp: bool,
    /// Weight vector h as a comma list, e.g. --h 1,1.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Exponent vector λ as a comma list (must sum to 1).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Emit a convergence-curve CSV (mean-squared only).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Truncation level for the CSV curve.
    #[arg(long, default_value_t = 1_000)]
    curve_level: u64,
}

#[derive(Args)]
struct StechkinArgs {
    #[arg(long)]
    model: PathBuf,
    /// One or more budgets N.
    #[arg(long, value_delimiter = ',', required = true)]
    budget: Vec<f64>,
    #[arg(long, default_value = "as-displayed")]
    convention: String,
    /// Weights for the C-group (default all ones).
    #[arg(long, value_delimiter = ',')]
    h_c: Option<Vec<f64>>,
    /// Weights for the D-group (default all ones).
    #[arg(long, value_delimiter = ',')]
    h_d: Option<Vec<f64>>,
    /// Truncation level for the lower-bound certificate.
    #[arg(long, default_value_t = 10_000)]
    lower_bound_level: u64,
    /// Emit the (N, mu, E) table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Random-vector scan against the mean-squared sum constant.
    Taikov(ScanArgs),
    /// Random-vector scan against the sup constant.
    Hlp(ScanArgs),
    /// Interpolation-ratio scan over random trigonometric polynomials.
    Solyar(SolyarArgs),
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random vectors are supported inside M_level.
    #[arg(long, default_value_t = 50)]
    level: u64,
}

#[derive(Args)]
struct SolyarArgs {
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    modes: u32,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List the known space families.
    List,
    /// Show parameters of one space, e.g. S2, S3, CP2, HP1, CaP2.
    Show { name: String },
}

fn init_threads() {
    if let Ok(v) = std::env::var("SHARPINEQ_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn emit(output: &Option<PathBuf>, report: &Report) -> Result<(), Error> {
    let json = report.to_json();
    match output {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn default_h(len: usize, h: &Option<Vec<f64>>) -> Result<WeightVector, Error> {
    WeightVector::new(h.clone().unwrap_or_else(|| vec![1.0; len]))
}

fn series_fields(r: Report, s: &SeriesSum) -> Report {
    r.int("truncation_level", s.levels as i64)
        .float("tail_bound", s.tail_bound)
        .bool("converged", s.converged)
        .bool("certified", s.certified)
}

fn mult_fields(r: Report, m: &MultConstant) -> Report {
    r.push("argmax_h", Value::FloatList(m.argmax_h.clone()))
        .float("certificate_gap", m.certificate_gap)
}

fn exit_for(v: ExtendedSum) -> ExitCode {
    match v {
        ExtendedSum::Finite(_) => ExitCode::SUCCESS,
        ExtendedSum::Infinite => ExitCode::from(2),
    }
}

fn run_constant(args: &ConstantArgs, output: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let spec = ModelSpec::load(&args.model)?;
    let loaded = spec.build()?;
    let LoadedModel {
        spectral,
        rd,
        policy,
        ..
    } = loaded;

    if args.multiplicative {
        let lambda = ExponentVector::new(args.lambda.clone().ok_or_else(|| {
            Error::InvalidArgument("--multiplicative needs --lambda".into())
        })?)?;
        let result = if let Some(rd) = &rd {
            mult_taikov_constant_rd(rd, &lambda)?
        } else {
            let model = spectral.as_ref().expect("spectral model");
            if args.hlp {
                mult_hlp_constant(model, &lambda, &policy)?
            } else {
                mult_taikov_constant(model, &lambda, &policy)?
            }
        };
        let factor = sharp_factor(result.value, &lambda);
        let report = mult_fields(
            Report::new()
                .str("command", "constant-multiplicative")
                .str("form", if args.hlp { "hlp" } else { "taikov" })
                .extended("constant", result.value)
                .extended("sharp_factor", factor)
                .status_of(result.value),
            &result,
        );
        emit(output, &report)?;
        return Ok(exit_for(result.value));
    }

    let model = spectral.ok_or_else(|| {
        Error::InvalidArgument("mean-squared constants need a discrete model".into())
    })?;
    let h = default_h(model.m() + 1, &args.h)?;
    let s = if args.hlp {
        sharpineq::mean_squared::hlp_constant(&model, &h, &policy)?
    } else {
        taikov_constant(&model, &h, &policy)?
    };
    let report = series_fields(
        Report::new()
            .str("command", if args.hlp { "constant-hlp" } else { "constant-mean-squared" })
            .extended("constant_sq", s.value)
            .status_of(s.value),
        &s,
    );
    emit(output, &report)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, csv_curve(&convergence_curve(&model, &h, args.curve_level)?))?;
    }
    Ok(exit_for(s.value))
}

fn run_stechkin(args: &StechkinArgs, output: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let spec = ModelSpec::load(&args.model)?;
    let loaded = spec.build()?;
    let model = loaded.spectral.ok_or_else(|| {
        Error::InvalidArgument("the budget problem needs a discrete model".into())
    })?;
    let split = loaded.stechkin_split.ok_or_else(|| {
        Error::ModelSpec("the model file must carry a [stechkin] split".into())
    })?;
    let m1 = model.m() + 1;
    let convention = match args.convention.as_str() {
        "as-displayed" => BudgetConvention::AsDisplayed,
        "sqrt" => BudgetConvention::Sqrt,
        other => {
            return Err(Error::InvalidArgument(format!(
                "convention must be as-displayed or sqrt, got {other:?}"
            )))
        }
    };
    let problem = StechkinProblem::new(
        model,
        split,
        default_h(split, &args.h_c)?,
        default_h(m1 - split, &args.h_d)?,
        loaded.policy,
    )?
    .with_convention(convention);

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut any_infinite = false;
    for &budget in &args.budget {
        let sol = solve_budget(&problem, budget)?;
        let lower = if sol.mu.is_finite() {
            Some(stechkin_lower_bound(&problem, &sol, args.lower_bound_level)?)
        } else {
            None
        };
        any_infinite |= sol.error.is_infinite();
        let mut rec = Report::new()
            .float("budget", budget)
            .float("mu", sol.mu)
            .extended("error", sol.error)
            .extended("n_star", sol.n_star)
            .status_of(sol.error);
        if let Some(lb) = lower {
            rec = rec.float("lower_bound", lb);
        }
        records.push(rec);
        if let (ExtendedSum::Finite(e), true) = (sol.error, sol.mu.is_finite()) {
            rows.push(vec![budget, sol.mu, e]);
        }
    }
    let report = Report::new()
        .str("command", "stechkin")
        .str(
            "convention",
            match convention {
                BudgetConvention::AsDisplayed => "as-displayed",
                BudgetConvention::Sqrt => "sqrt",
            },
        )
        .extended("g0", g_mu_norm_sq(&problem, 0.0)?.value)
        .push("solutions", Value::RecordList(records));
    emit(output, &report)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, csv_table(&["N", "mu", "E"], &rows))?;
    }
    Ok(if any_infinite { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn run_scan(args: &ScanArgs, hlp: bool, output: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let spec = ModelSpec::load(&args.model)?;
    let loaded = spec.build()?;
    let model = loaded
        .spectral
        .ok_or_else(|| Error::InvalidArgument("scans need a discrete model".into()))?;
    let h = default_h(model.m() + 1, &args.h)?;
    let (constant, max_ratio) = if hlp {
        let s = sharpineq::mean_squared::hlp_constant(&model, &h, &loaded.policy)?;
        let max = random_violation_scan_hlp(&model, &h, args.level, args.trials, args.seed)?;
        (s, max)
    } else {
        let s = taikov_constant(&model, &h, &loaded.policy)?;
        let max = random_violation_scan(&model, &h, args.level, args.trials, args.seed)?;
        (s, max)
    };
    let violation = match constant.value {
        ExtendedSum::Finite(c) => max_ratio > c * (1.0 + 1e-10),
        ExtendedSum::Infinite => false,
    };
    let report = series_fields(
        Report::new()
            .str("command", if hlp { "verify-hlp" } else { "verify-taikov" })
            .extended("constant_sq", constant.value)
            .float("max_ratio", max_ratio)
            .int("trials", args.trials as i64)
            .int("seed", args.seed as i64)
            .bool("violation", violation)
            .status_of(constant.value),
        &constant,
    );
    emit(output, &report)?;
    if violation {
        return Ok(ExitCode::FAILURE);
    }
    Ok(exit_for(constant.value))
}

fn run_solyar(args: &SolyarArgs, output: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let p = match args.p.as_str() {
        "inf" | "infinity" => Lp::Infinity,
        s => Lp::Finite(s.parse::<f64>().map_err(|_| {
            Error::InvalidArgument(format!("--p must be a number or \"inf\", got {s:?}"))
        })?),
    };
    let scan = solyar_scan(args.k, p, args.trials, args.seed, args.modes)?;
    let violation = scan.max_ratio > 1.0 + 1e-8;
    let report = Report::new()
        .str("command", "verify-solyar")
        .str("p", &args.p)
        .float("k", args.k)
        .bool("hypothesis_satisfied", hypothesis_satisfied(args.k, p))
        .int("trials", args.trials as i64)
        .int("seed", args.seed as i64)
        .float("max_ratio", scan.max_ratio)
        .int("witness_trial", scan.witness_trial as i64)
        .bool("violation", violation)
        .str("status", "ok");
    emit(output, &report)?;
    Ok(if violation { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn parse_space(name: &str) -> Result<CrossSpace, Error> {
    let (fam, b) = if let Some(rest) = name.strip_prefix("CaP") {
        (CrossFamily::Cayley, rest.parse::<u32>().unwrap_or(2))
    } else if let Some(rest) = name.strip_prefix("RP") {
        (CrossFamily::RealProjective, rest.parse().map_err(|_| bad_space(name))?)
    } else if let Some(rest) = name.strip_prefix("CP") {
        (CrossFamily::ComplexProjective, rest.parse().map_err(|_| bad_space(name))?)
    } else if let Some(rest) = name.strip_prefix("HP") {
        (CrossFamily::Quaternionic, rest.parse().map_err(|_| bad_space(name))?)
    } else if let Some(rest) = name.strip_prefix('S') {
        (CrossFamily::Sphere, rest.parse().map_err(|_| bad_space(name))?)
    } else {
        return Err(bad_space(name));
    };
    CrossSpace::new(fam, b)
}

fn bad_space(name: &str) -> Error {
    Error::InvalidArgument(format!(
        "unknown space {name:?} (expected S<b>, RP<b>, CP<b>, HP<b> or CaP2)"
    ))
}

fn run_catalog(cmd: &CatalogCommand, output: &Option<PathBuf>) -> Result<ExitCode, Error> {
    match cmd {
        CatalogCommand::List => {
            let report = Report::new().str("command", "catalog-list").push(
                "families",
                Value::RecordList(vec![
                    Report::new().str("name", "S<b>").str("description", "sphere, d = b"),
                    Report::new()
                        .str("name", "RP<b>")
                        .str("description", "real projective space, d = b"),
                    Report::new()
                        .str("name", "CP<b>")
                        .str("description", "complex projective space, d = 2b"),
                    Report::new()
                        .str("name", "HP<b>")
                        .str("description", "quaternionic projective space, d = 4b"),
                    Report::new()
                        .str("name", "CaP2")
                        .str("description", "Cayley projective plane, d = 16"),
                    Report::new()
                        .str("name", "torus")
                        .str("description", "T^a with power weights over Z^a without zero coordinates"),
                    Report::new()
                        .str("name", "rd")
                        .str("description", "continuous Fourier model on R^d"),
                ]),
            );
            emit(output, &report)?;
        }
        CatalogCommand::Show { name } => {
            let space = parse_space(name)?;
            let mut bands = Vec::new();
            for j in 1..=5u64 {
                bands.push(
                    Report::new()
                        .int("j", j as i64)
                        .float("gamma_sq", space.gamma_sq(j))
                        .float("multiplicity", cross_multiplicity(&space, j)),
                );
            }
            let report = Report::new()
                .str("command", "catalog-show")
                .str("name", name)
                .int("dimension", space.dimension() as i64)
                .float("alpha", space.alpha())
                .float("beta", space.beta())
                .push("bands", Value::RecordList(bands))
                .float("weyl_ratio_1e3", weyl_ratio(&space, 1_000));
            emit(output, &report)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Constant(args) => run_constant(args, &cli.output),
        Command::Stechkin(args) => run_stechkin(args, &cli.output),
        Command::Verify(VerifyCommand::Taikov(args)) => run_scan(args, false, &cli.output),
        Command::Verify(VerifyCommand::Hlp(args)) => run_scan(args, true, &cli.output),
        Command::Verify(VerifyCommand::Solyar(args)) => run_solyar(args, &cli.output),
        Command::Catalog(cmd) => run_catalog(cmd, &cli.output),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
