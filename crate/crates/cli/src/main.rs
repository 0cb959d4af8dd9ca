use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdc_symmetry::calculus::{parse_affine, Assumptions, Bindings, Constraint, ConstraintKind};
use rdc_symmetry::classify::{coincidence_table, enumerate_special_cases};
use rdc_symmetry::determining::{
    check_operator, generate_determining_system, normalize_operator, system_json, EvolutionEq,
    Family, SymOperator,
};
use rdc_symmetry::fixtures::load;
use rdc_symmetry::numeric::{
    eval_expr, group_transform, group_transform_resampled, invariance_residual, sample_residuals,
    solve_pde, Boundary, Field, Grid, Instance, Point, ScalingFlow,
};
use rdc_symmetry::verify::{split_text, verify_all, Fault, VerifyOptions, SAMPLE_TOL};
use rdc_symmetry::{parse, AffineExponent, Error, Expr};

#[derive(Parser)]
#[command(
    name = "rdcsym",
    version,
    about = "Conditional-symmetry workbench for reaction-diffusion-convection equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Power,
    Exp,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Power => Family::Power,
            FamilyArg::Exp => Family::Exponential,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
    /// Write standard output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the four determining equations of a family.
    Derive {
        #[arg(long, value_enum, default_value = "power")]
        family: FamilyArg,
        #[command(flatten)]
        common: Common,
    },
    /// List parameter relations under which exponents merge.
    Coincide {
        /// Exponents to compare, e.g. "p+1, p, k".
        #[arg(long)]
        exponents: String,
        /// Exponents compared against all others; defaults to all of them.
        #[arg(long)]
        target: Option<String>,
        /// Relations already excluded, e.g. "k != 0, p != -1".
        #[arg(long, default_value = "")]
        forbidden: String,
        #[command(flatten)]
        common: Common,
    },
    /// Values of p at which a target exponent meets each column.
    Table {
        /// Equalities applied first, e.g. "k=p-1".
        #[arg(long)]
        case: String,
        #[arg(long)]
        target: String,
        /// Columns; defaults to the shipped table for the target.
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long, default_value = "")]
        forbidden: String,
        #[command(flatten)]
        common: Common,
    },
    /// Symbolic residuals of an operator in the determining equations.
    CheckOp {
        #[arg(long, value_enum, default_value = "power")]
        family: FamilyArg,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        /// Concrete source F(V); the generic F is kept when absent.
        #[arg(long, allow_hyphen_values = true)]
        source: Option<String>,
        /// Parameter values, e.g. "p=0, k=1".
        #[arg(long, default_value = "")]
        case: String,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled residuals of an operator for a numeric instance.
    CheckOpNumeric {
        /// Instance JSON file.
        #[arg(long)]
        equation: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Split an identity by powers of V and exponentials.
    Split {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, default_value = "")]
        forbidden: String,
        #[command(flatten)]
        common: Common,
    },
    /// Map a field through the scaling-translation flow of an instance.
    Transform {
        /// Instance JSON file with params k, A1, A2 and optionally grid, epsilon.
        #[arg(long)]
        equation: PathBuf,
        /// Input field CSV; solved from `--initial` on the instance grid when absent.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Initial row as an expression in x.
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        initial: String,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Resample onto the input lattice by bilinear interpolation.
        #[arg(long)]
        resample: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce every derivation and numeric check.
    VerifyPaper {
        #[arg(long)]
        keep_going: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownSymbol(_)
            | Error::Invalid(_)
            | Error::NonAffineExponent(_) => Failure::Usage(e.to_string()),
            other => Failure::Verification(other.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

fn list(text: &str) -> Vec<&str> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn exponents(text: &str) -> Result<Vec<AffineExponent>, Error> {
    list(text).into_iter().map(parse_affine).collect()
}

fn assumptions(text: &str) -> Result<Assumptions, Error> {
    Assumptions::new().with(&list(text))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn derive(family: FamilyArg, json: bool) -> Outcome {
    let family: Family = family.into();
    let sys = generate_determining_system(&EvolutionEq::of_family(family)?);
    let text = if json {
        pretty(&system_json(family, &sys))
    } else {
        sys.to_string()
    };
    Ok((text, true))
}

fn coincide(exps: &str, target: Option<&str>, forbidden: &str, json: bool) -> Outcome {
    let e = exponents(exps)?;
    let t = match target {
        Some(t) => exponents(t)?,
        None => e.clone(),
    };
    let cases = enumerate_special_cases(&e, &t, &assumptions(forbidden)?, &[]);
    let text = if json {
        let items: Vec<serde_json::Value> = cases
            .iter()
            .map(|c| {
                serde_json::json!({
                    "constraint": c.constraint.to_string(),
                    "provenance": c.provenance.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        pretty(&serde_json::Value::Array(items))
    } else {
        cases.iter().map(|c| format!("{c}\n")).collect()
    };
    Ok((text, true))
}

fn default_columns(target: &AffineExponent) -> Result<Vec<AffineExponent>, Error> {
    let fx = load("coincidence_tables")?;
    for suffix in ["2p_plus_3", "2p_plus_1"] {
        if fx.exponents(&format!("target_{suffix}"))?.first() == Some(target) {
            return fx.exponents(&format!("columns_{suffix}"));
        }
    }
    Err(Error::Invalid(format!(
        "no shipped columns for {target}; pass --exponents"
    )))
}

fn table(case: &str, target: &str, exps: Option<&str>, forbidden: &str, json: bool) -> Outcome {
    let case: Vec<Constraint> = list(case)
        .into_iter()
        .map(Constraint::parse)
        .collect::<Result<_, _>>()?;
    let target = parse_affine(target)?;
    let columns = match exps {
        Some(e) => exponents(e)?,
        None => default_columns(&target)?,
    };
    let t = coincidence_table(&target, &columns, &case, &assumptions(forbidden)?)?;
    let text = if json {
        pretty(&t.to_json())
    } else {
        t.to_string()
    };
    Ok((text, true))
}

fn param_bindings(case: &str) -> Result<Bindings, Error> {
    let mut b = Bindings::new();
    for c in list(case) {
        let c = Constraint::parse(c)?;
        let name = ["p", "k", "n"]
            .into_iter()
            .find(|n| c.lhs == parse_affine(n).unwrap())
            .filter(|_| c.kind == ConstraintKind::Equal);
        match (name, c.rhs.as_constant()) {
            (Some(n), Some(v)) => b = b.param_rat(n, v.clone()),
            _ => return Err(Error::Invalid(format!("expected `name = value`, got {c}"))),
        }
    }
    Ok(b)
}

struct CheckOpArgs<'a> {
    family: FamilyArg,
    tau: &'a str,
    xi: &'a str,
    eta: &'a str,
    source: Option<&'a str>,
    case: &'a str,
}

fn check_op(a: CheckOpArgs, json: bool) -> Outcome {
    let mut eq = EvolutionEq::of_family(a.family.into())?;
    if let Some(s) = a.source {
        eq = eq.with_source(parse(s)?);
    }
    let eq = eq.with_params(&param_bindings(a.case)?)?;
    let op = SymOperator::parse(a.tau, a.xi, a.eta)?;
    let res = check_operator(&eq, &op)?;
    let ok = res.iter().all(Expr::is_zero);
    let text = if json {
        pretty(&serde_json::json!({
            "symmetry": ok,
            "residuals": res.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        }))
    } else {
        let mut s = String::new();
        for (i, r) in res.iter().enumerate() {
            s.push_str(&format!("equation {}: {r}\n", i + 1));
        }
        s.push_str(if ok { "symmetry\n" } else { "not a symmetry\n" });
        s
    };
    Ok((text, ok))
}

fn load_instance(path: &PathBuf) -> Result<Instance, Failure> {
    Ok(Instance::from_json(&read(path)?)?)
}

fn check_op_numeric(
    path: &PathBuf,
    op: [Option<&str>; 3],
    seed: Option<u64>,
    samples: usize,
    json: bool,
) -> Outcome {
    let inst = load_instance(path)?;
    let base = inst.operator.clone();
    let pick = |given: Option<&str>, fallback: Option<&Expr>| -> Result<Expr, Failure> {
        match (given, fallback) {
            (Some(s), _) => Ok(parse(s)?),
            (None, Some(e)) => Ok(e.clone()),
            (None, None) => Err(Failure::Usage(
                "no operator in the instance; pass --xi and --eta".into(),
            )),
        }
    };
    let one = Expr::one();
    let op = SymOperator::new(
        pick(op[0], base.as_ref().map(|o| &o.tau).or(Some(&one)))?,
        pick(op[1], base.as_ref().map(|o| &o.xi))?,
        pick(op[2], base.as_ref().map(|o| &o.eta))?,
    );
    let op = normalize_operator(&op)?;
    let seed = seed.unwrap_or(inst.seed);
    let worst = sample_residuals(&inst, &op, samples, seed)?;
    let ok = worst < SAMPLE_TOL;
    let text = if json {
        pretty(&serde_json::json!({
            "max_residual": worst,
            "samples": samples,
            "seed": seed,
            "tolerance": SAMPLE_TOL,
            "pass": ok,
        }))
    } else {
        format!(
            "max residual {worst:.6e} over {samples} points (seed {seed}); {}\n",
            if ok { "pass" } else { "fail" }
        )
    };
    Ok((text, ok))
}

fn split_cmd(expr: &str, forbidden: &str, json: bool) -> Outcome {
    let sys = split_text(expr, &assumptions(forbidden)?)?;
    let text = if json {
        pretty(&serde_json::json!({
            "grading": sys.grading,
            "equations": sys.to_json_array(),
        }))
    } else {
        sys.to_string()
    };
    Ok((text, true))
}

struct TransformArgs<'a> {
    equation: &'a PathBuf,
    field: Option<&'a PathBuf>,
    initial: &'a str,
    epsilon: Option<f64>,
    resample: bool,
}

fn transform(a: TransformArgs, json: bool) -> Outcome {
    let inst = load_instance(a.equation)?;
    let eps = a
        .epsilon
        .or(inst.epsilon)
        .ok_or_else(|| Failure::Usage("pass --epsilon or set epsilon in the instance".into()))?;
    let field = match a.field {
        Some(p) => Field::from_csv(&read(p)?)?,
        None => {
            let g = inst
                .grid
                .clone()
                .ok_or_else(|| Failure::Usage("instance has no grid; pass --field".into()))?;
            let grid = Grid::spanning(g.x0, g.x1, g.nx, g.t0, g.dt, 1)?;
            let init = parse(a.initial)?;
            let mut row = Vec::with_capacity(grid.nx);
            for j in 0..grid.nx {
                let pt = Point::new(g.t0, grid.x(j), 1.0);
                row.push(eval_expr(&init, pt, &inst)?);
            }
            let init = Field::new(grid, row)?;
            solve_pde(&inst, &init, g.steps, &Boundary::Held)?
        }
    };
    let flow = ScalingFlow::new(inst.param("k"), inst.param("A1"), inst.param("A2"));
    let (moved, coverage) = if a.resample {
        group_transform_resampled(&field, &flow, eps)?
    } else {
        (group_transform(&field, &flow, eps)?, 1.0)
    };
    let text = if json {
        let residual = |f: &Field| invariance_residual(f, &inst).ok();
        pretty(&serde_json::json!({
            "epsilon": eps,
            "coverage": coverage,
            "residual_before": residual(&field),
            "residual_after": residual(&moved),
            "grid": {
                "t0": moved.grid.t0, "dt": moved.grid.dt, "nt": moved.grid.nt,
                "x0": moved.grid.x0, "dx": moved.grid.dx, "nx": moved.grid.nx,
            },
        }))
    } else {
        moved.to_csv()
    };
    Ok((text, true))
}

fn verify(keep_going: bool, seed: u64, fault: bool, json: bool) -> Outcome {
    let opts = VerifyOptions {
        keep_going,
        seed,
        fault: fault.then_some(Fault::PowerFixture),
    };
    let r = verify_all(&opts);
    let text = if json {
        pretty(&r.to_json())
    } else {
        r.to_string()
    };
    Ok((text, r.passed()))
}

fn run(cli: Cli) -> (Outcome, Option<PathBuf>) {
    match cli.command {
        Command::Derive { family, common } => (derive(family, common.json), common.out),
        Command::Coincide {
            exponents,
            target,
            forbidden,
            common,
        } => (
            coincide(&exponents, target.as_deref(), &forbidden, common.json),
            common.out,
        ),
        Command::Table {
            case,
            target,
            exponents,
            forbidden,
            common,
        } => (
            table(
                &case,
                &target,
                exponents.as_deref(),
                &forbidden,
                common.json,
            ),
            common.out,
        ),
        Command::CheckOp {
            family,
            tau,
            xi,
            eta,
            source,
            case,
            common,
        } => (
            check_op(
                CheckOpArgs {
                    family,
                    tau: &tau,
                    xi: &xi,
                    eta: &eta,
                    source: source.as_deref(),
                    case: &case,
                },
                common.json,
            ),
            common.out,
        ),
        Command::CheckOpNumeric {
            equation,
            tau,
            xi,
            eta,
            seed,
            samples,
            common,
        } => (
            check_op_numeric(
                &equation,
                [tau.as_deref(), xi.as_deref(), eta.as_deref()],
                seed,
                samples,
                common.json,
            ),
            common.out,
        ),
        Command::Split {
            expr,
            forbidden,
            common,
        } => (split_cmd(&expr, &forbidden, common.json), common.out),
        Command::Transform {
            equation,
            field,
            initial,
            epsilon,
            resample,
            common,
        } => (
            transform(
                TransformArgs {
                    equation: &equation,
                    field: field.as_ref(),
                    initial: &initial,
                    epsilon,
                    resample,
                },
                common.json,
            ),
            common.out,
        ),
        Command::VerifyPaper {
            keep_going,
            seed,
            inject_fault,
            common,
        } => (
            verify(keep_going, seed, inject_fault, common.json),
            common.out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = run(cli);
    match outcome {
        Ok((text, ok)) => {
            let written = match out {
                Some(p) => fs::write(&p, &text).map_err(|e| format!("{}: {e}", p.display())),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: rdcsym <COMMAND> [OPTIONS]; see rdcsym --help");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
