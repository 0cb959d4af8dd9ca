//! One line per acceptance criterion; the test fails if any criterion fails.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rdc_symmetry::calculus::{
    collect, diff, equal_up_to_constant, parse_affine, split, substitute, Assumptions, Bindings,
    Constraint, Var,
};
use rdc_symmetry::classify::{
    case_b_assumptions, case_c_chain_k1_p2, case_c_chain_p0, coincidence_table,
    enumerate_special_cases, extract_source, fifteen_powers, k1_p2_systems, solve_eta_case_b,
    source_back_substitution, Report,
};
use rdc_symmetry::determining::{
    check_operator, compare_systems, generate_determining_system, EvolutionEq, SymOperator,
};
use rdc_symmetry::fixtures::load;
use rdc_symmetry::numeric::{change_field, Direction, Field, Grid};
use rdc_symmetry::verify::{group_invariance_test, sampled_operator_residuals};
use rdc_symmetry::{parse, AffineExponent, Expr};

const REGENERATION_BUDGET: Duration = Duration::from_secs(5);
const SAMPLE_POINTS: usize = 1000;
const SAMPLE_SEED: u64 = 2024;
const SAMPLE_TOL: f64 = 1e-9;
const PERTURBED_MIN: f64 = 1e-3;
const GROUP_EPS: f64 = 0.1;
const WRONG_EPS: f64 = 0.2;
const GROUP_RATIO_MAX: f64 = 5.0;
const WRONG_RATIO_MIN: f64 = 10.0;
const ROUND_TRIP_TOL: f64 = 1e-12;
const PROPERTY_CASES: u32 = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn reference(name: &str) -> rdc_symmetry::calculus::DeterminingSystem {
    let fx = load(name).unwrap();
    let eqs: Vec<Expr> = ["vx3", "vx2", "vx1", "vx0"]
        .iter()
        .map(|l| fx.expr(l).unwrap())
        .collect();
    rdc_symmetry::calculus::DeterminingSystem {
        grading: vec!["Vx^3".into(), "Vx^2".into(), "Vx^1".into(), "Vx^0".into()],
        equations: eqs,
    }
}

fn c1_regeneration() -> Outcome {
    let start = Instant::now();
    let power = compare_systems(
        &generate_determining_system(&EvolutionEq::power()),
        &reference("determining_power"),
    );
    let exp = compare_systems(
        &generate_determining_system(&EvolutionEq::exponential()),
        &reference("determining_exp"),
    );
    let took = start.elapsed();
    ensure(
        power.iter().all(|m| *m)
            && exp.iter().all(|m| *m)
            && power.len() == 4
            && exp.len() == 4
            && took < REGENERATION_BUDGET,
        format!(
            "power {power:?}, exp {exp:?}, {:.3}s (< {}s)",
            took.as_secs_f64(),
            REGENERATION_BUDGET.as_secs()
        ),
    )
}

fn c2_eta() -> Outcome {
    let eta = solve_eta_case_b().map_err(err)?;
    let sys = generate_determining_system(&EvolutionEq::power());
    let b = Bindings::new()
        .func("xi", parse("a*V + f").unwrap())
        .func("eta", eta.clone());
    let r = substitute(&sys.equations[1], &b).map_err(err)?;
    ensure(
        r.is_zero(),
        format!("{} terms in eta, residual {r}", eta.len()),
    )
}

fn c3_source() -> Outcome {
    let eta = solve_eta_case_b().map_err(err)?;
    let src = extract_source(&eta).map_err(err)?;
    let want = load("case_b").unwrap().expr("source").unwrap();
    let back = source_back_substitution(&eta, &src).map_err(err)?;
    ensure(
        src == want && back.is_zero(),
        format!(
            "matches fixture: {}, back-substitution residual {back}",
            src == want
        ),
    )
}

fn relations(cs: &[Constraint]) -> Vec<AffineExponent> {
    let mut r: Vec<_> = cs.iter().map(Constraint::relation).collect();
    r.sort();
    r
}

fn c4_five_cases() -> Outcome {
    let e: Vec<_> = ["p+1", "p", "p-1", "k", "k-1", "0"]
        .iter()
        .map(|s| parse_affine(s).unwrap())
        .collect();
    let asm = Assumptions::new()
        .with(&["k != 0", "k != p", "k != p+1", "p != -1"])
        .unwrap();
    let got: Vec<Constraint> = enumerate_special_cases(&e, &e, &asm, &[])
        .into_iter()
        .map(|c| c.constraint)
        .collect();
    let want = load("special_cases")
        .unwrap()
        .constraints("frozen_remainder")
        .unwrap();
    let shown: Vec<String> = got.iter().map(|c| c.to_string()).collect();
    ensure(
        got.len() == 5 && relations(&got) == relations(&want),
        shown.join(", "),
    )
}

fn c5_thirteen_cases() -> Outcome {
    let keys = load("source_keys").unwrap().exponents("keys").unwrap();
    let targets = vec![parse_affine("2p+3").unwrap(), parse_affine("2p+1").unwrap()];
    let vanishing = vec![
        (targets[0].clone(), Constraint::parse("p = 2").unwrap()),
        (targets[1].clone(), Constraint::parse("p = 0").unwrap()),
    ];
    let got: Vec<Constraint> =
        enumerate_special_cases(&keys, &targets, &case_b_assumptions(), &vanishing)
            .into_iter()
            .map(|c| c.constraint)
            .collect();
    let want = load("special_cases")
        .unwrap()
        .constraints("source_leading_powers")
        .unwrap();
    let shown: Vec<String> = got.iter().map(|c| c.to_string()).collect();
    ensure(
        keys.len() == 15 && got.len() == 13 && relations(&got) == relations(&want),
        shown.join(", "),
    )
}

fn c6_tables() -> Outcome {
    let case = vec![Constraint::parse("k = p - 1").unwrap()];
    let t1 = coincidence_table(
        &parse_affine("2p+3").unwrap(),
        &[
            "2p+1", "2p", "2p+2", "p+2", "p+1", "p", "p-1", "p-2", "1", "0",
        ]
        .map(|s| parse_affine(s).unwrap()),
        &case,
        &Assumptions::new(),
    )
    .map_err(err)?;
    let t2 = coincidence_table(
        &parse_affine("2p+1").unwrap(),
        &["2p", "2p+2", "p+1", "p", "p-1", "p-2", "0"].map(|s| parse_affine(s).unwrap()),
        &case,
        &Assumptions::new(),
    )
    .map_err(err)?;
    let (c1, c2) = (t1.cells(), t2.cells());
    ensure(
        c1 == ["-", "-", "-", "-1", "-2", "-3", "-4", "-5", "-1", "-3/2"]
            && c2 == ["-", "-", "0", "-1", "-2", "-3", "-1/2"],
        format!("[{}] [{}]", c1.join(" "), c2.join(" ")),
    )
}

fn c7_fifteen() -> Outcome {
    let got = fifteen_powers().map_err(err)?;
    let want = [
        "2p+3", "2p+1", "2p+1", "2p", "2p+2", "p+2", "p+1", "p", "p-1", "p", "p-1", "p-2", "1",
        "0", "2p-1",
    ]
    .map(|s| parse_affine(s).unwrap());
    let shown: Vec<String> = got.iter().map(|e| e.to_string()).collect();
    ensure(got == want, shown.join(", "))
}

fn chain_summary(r: &Report) -> String {
    match r.failed_step() {
        Some(s) => format!("{} failed: {}", s.id, s.residual),
        None => format!("{} steps pass", r.steps.len()),
    }
}

fn c8_chain_p0() -> Outcome {
    let r = case_c_chain_p0();
    let fx = load("case_c_p0").unwrap();
    let eq = EvolutionEq::power()
        .with_source(fx.expr("equation_source").unwrap())
        .with_params(&Bindings::new().param_int("p", 0))
        .map_err(err)?;
    let op = SymOperator::new(
        fx.expr("operator_tau").unwrap(),
        fx.expr("operator_xi").unwrap(),
        fx.expr("operator_eta").unwrap(),
    );
    let res = check_operator(&eq, &op).map_err(err)?;
    let zero = res.len() == 4 && res.iter().all(Expr::is_zero);
    ensure(
        r.passed() && zero,
        format!("{}; operator residuals zero: {zero}", chain_summary(&r)),
    )
}

fn c9_chain_k1_p2() -> Outcome {
    let r = case_c_chain_k1_p2();
    let (three, four) = k1_p2_systems().map_err(err)?;
    let fx = load("case_c_k1_p2").unwrap();
    let first = parse("g_t + 2*(g + lambda3)*(g + f_x)").unwrap();
    let literal = four.first() == Some(&first) && fx.expr("cubic_1").unwrap() == first;
    let rest = (1..4)
        .all(|i| equal_up_to_constant(&four[i], &fx.expr(&format!("cubic_{}", i + 1)).unwrap()));
    ensure(
        r.passed() && three.len() == 3 && four.len() == 4 && literal && rest,
        format!(
            "{}; {} + {} equations, first literal: {literal}",
            chain_summary(&r),
            three.len(),
            four.len()
        ),
    )
}

fn c10_sampled() -> Outcome {
    let (good, bad) = sampled_operator_residuals(SAMPLE_POINTS, SAMPLE_SEED).map_err(err)?;
    ensure(
        good < SAMPLE_TOL && bad > PERTURBED_MIN,
        format!("max {good:.3e} (< {SAMPLE_TOL:e}), perturbed {bad:.3e} (> {PERTURBED_MIN:e})"),
    )
}

fn c11_group() -> Outcome {
    let g = group_invariance_test(GROUP_EPS, WRONG_EPS).map_err(err)?;
    ensure(
        g.symmetry_ratio() <= GROUP_RATIO_MAX && g.wrong_ratio() >= WRONG_RATIO_MIN,
        format!(
            "baseline {:.3e}, flow ratio {:.3} (<= {GROUP_RATIO_MAX}), wrong weight ratio {:.1} (>= {WRONG_RATIO_MIN})",
            g.baseline,
            g.symmetry_ratio(),
            g.wrong_ratio()
        ),
    )
}

fn c12_round_trip() -> Outcome {
    let g = Grid::spanning(0.0, 1.0, 50, 0.0, 0.02, 50).unwrap();
    let mut seed = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    let values: Vec<f64> = (0..g.nt * g.nx).map(|_| 0.1 + 9.9 * next()).collect();
    let u = Field::new(g, values).unwrap();
    let mut worst: f64 = 0.0;
    for m in [-1.0, 1.0, 2.0] {
        let v = change_field(Direction::UToV, m, &u).map_err(err)?;
        worst = worst.max(
            change_field(Direction::VToU, m, &v)
                .map_err(err)?
                .max_abs_diff(&u),
        );
    }
    ensure(
        worst < ROUND_TRIP_TOL,
        format!("max deviation {worst:.3e} (< {ROUND_TRIP_TOL:e})"),
    )
}

fn run_property<S: proptest::strategy::Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn check(ok: bool, what: &str) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

fn c13_properties() -> Outcome {
    use common::{expr_strategy, graded_strategy};
    run_property(
        "product rule",
        (expr_strategy(), expr_strategy()),
        |(a, b)| {
            for var in [Var::T, Var::X, Var::V] {
                let rhs = &(&diff(&a, var) * &b) + &(&a * &diff(&b, var));
                check(diff(&(&a * &b), var) == rhs, "product rule")?;
            }
            Ok(())
        },
    )?;
    run_property("collect-rebuild", expr_strategy(), |e| {
        let rebuilt = collect(&e)
            .into_iter()
            .fold(Expr::zero(), |acc, (k, c)| &acc + &(&k.to_expr() * &c));
        check(rebuilt == e, "collect-rebuild")
    })?;
    run_property("parser round trip", expr_strategy(), |e| {
        check(
            parse(&e.to_string()).ok() == Some(e.clone()),
            "parser round trip",
        )
    })?;
    run_property("split-resum", graded_strategy(), |e| {
        let keys: Vec<_> = collect(&e).into_keys().rev().collect();
        let sys = split(&e, &Assumptions::new()).map_err(|x| TestCaseError::fail(x.to_string()))?;
        let resum = keys
            .iter()
            .zip(&sys.equations)
            .fold(Expr::zero(), |acc, (k, c)| &acc + &(&k.to_expr() * c));
        check(sys.len() == keys.len() && resum == e, "split-resum")
    })?;
    Ok(format!("4 suites x {PROPERTY_CASES} cases, 0 failures"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 13] = [
        ("determining systems regenerate", c1_regeneration),
        ("eta solves the second equation", c2_eta),
        ("source extraction and back-substitution", c3_source),
        ("five frozen-remainder cases", c4_five_cases),
        ("thirteen leading-power cases", c5_thirteen_cases),
        ("coincidence tables", c6_tables),
        ("fifteen powers under k = p - 1", c7_fifteen),
        ("p = 0 chain and scaling operator", c8_chain_p0),
        ("k = 1, p = 2 chain", c9_chain_k1_p2),
        ("sampled operator residuals", c10_sampled),
        ("group flow on a solved field", c11_group),
        ("U/V substitution round trip", c12_round_trip),
        ("property suites", c13_properties),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed.push(i + 1);
                ("FAIL", d)
            }
        };
        writeln!(out, "acceptance {:>2} {tag}  {name}: {detail}", i + 1).unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
