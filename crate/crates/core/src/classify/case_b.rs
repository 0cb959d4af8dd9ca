//! `xi = a V + f` with `a != 0`.

use std::collections::BTreeSet;

use crate::calculus::{
    atom_pattern, collect, diff, freeze, integrate_v, isolate, split, substitute, Assumptions,
    Bindings, CollectKey, Var,
};
use crate::determining::{generate_determining_system, EvolutionEq};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, FnAtom};

/// Power-family assumptions plus `p != -2, -3`, `k != -1, -2` and `a != 0`.
pub fn case_b_assumptions() -> Assumptions {
    EvolutionEq::power()
        .assumptions
        .with(&["p != -2", "p != -3", "k != -1", "k != -2"])
        .unwrap()
        .nonzero_symbols(&["a"])
}

fn xi_b() -> Expr {
    parse("a*V + f").unwrap()
}

/// Integrates the second determining equation twice in V for `xi = a V + f`
/// and adds the integration terms `g V + h`.
pub fn solve_eta_case_b() -> Result<Expr> {
    let sys = generate_determining_system(&EvolutionEq::power());
    let eq2 = substitute(&sys.equations[1], &Bindings::new().func("xi", xi_b()))?;
    let eta_vv = isolate(&eq2, &atom_pattern("eta_VV")?)?;
    let asm = case_b_assumptions();
    let eta = integrate_v(&integrate_v(&eta_vv, &asm)?, &asm)?;
    Ok(&eta + &parse("g*V + h")?)
}

fn third_equation(eta: &Expr) -> Result<Expr> {
    let sys = generate_determining_system(&EvolutionEq::power());
    let b = Bindings::new().func("xi", xi_b()).func("eta", eta.clone());
    substitute(&sys.equations[2], &b)
}

/// Solves the third determining equation for F; its cofactor is `3 xi_V = 3a`.
pub fn extract_source(eta: &Expr) -> Result<Expr> {
    let eq3 = third_equation(eta)?;
    isolate(&eq3, &atom_pattern("F")?)
        .map_err(|_| Error::NotInvertible(format!("cofactor of F in {eq3}")))
}

/// Third determining equation with xi, eta and F all substituted.
pub fn source_back_substitution(eta: &Expr, source: &Expr) -> Result<Expr> {
    let eq3 = third_equation(eta)?;
    substitute(&eq3, &Bindings::new().func("F", source.clone()))
}

/// The source with `a` and `f` constant.
pub fn frozen_source(source: &Expr) -> Expr {
    freeze(source, &["a", "f"])
}

/// Requirement that one V-coefficient does not depend on t and x.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstancyConstraint {
    pub key: CollectKey,
    pub coefficient: Expr,
    pub dt: Expr,
    pub dx: Expr,
}

/// One requirement per grading key whose coefficient is not visibly
/// constant. Derivatives of the `frozen` functions are dropped.
pub fn constancy_constraints(
    e: &Expr,
    asm: &Assumptions,
    frozen: &[&str],
) -> Result<Vec<ConstancyConstraint>> {
    split(e, asm)?;
    let mut out = Vec::new();
    for (key, c) in collect(e).into_iter().rev() {
        let dt = freeze(&diff(&c, Var::T), frozen);
        let dx = freeze(&diff(&c, Var::X), frozen);
        if dt.is_zero() && dx.is_zero() {
            continue;
        }
        out.push(ConstancyConstraint {
            key,
            coefficient: c,
            dt,
            dx,
        });
    }
    Ok(out)
}

/// Derivative atoms forced to vanish, found by repeatedly reading off
/// single-term requirements `c * u_t = 0` with `c` provably nonzero.
pub fn constancy_consequences(cs: &[ConstancyConstraint], asm: &Assumptions) -> Vec<FnAtom> {
    let mut eqs: Vec<Expr> = cs
        .iter()
        .flat_map(|c| [c.dt.clone(), c.dx.clone()])
        .filter(|e| !e.is_zero())
        .collect();
    let mut vanishing: Vec<FnAtom> = Vec::new();
    loop {
        let found = eqs.iter().find_map(|e| single_vanishing_atom(e, asm));
        let Some(atom) = found else { break };
        let b = Bindings::new().func(&atom.base_name(), Expr::zero());
        eqs = eqs
            .iter()
            .filter_map(|e| substitute(e, &b).ok())
            .filter(|e| !e.is_zero())
            .collect();
        vanishing.push(atom);
    }
    vanishing.sort();
    vanishing
}

fn single_vanishing_atom(e: &Expr, asm: &Assumptions) -> Option<FnAtom> {
    if e.len() != 1 {
        return None;
    }
    let (sig, c) = e.terms().next()?;
    let derived: Vec<&FnAtom> = sig.fns.iter().filter(|a| a.is_derived()).collect();
    let [atom] = derived.as_slice() else {
        return None;
    };
    if atom.power < 1 || !asm.is_nonzero_coeff(c) {
        return None;
    }
    let rest_ok = sig
        .fns
        .iter()
        .filter(|a| !a.is_derived())
        .all(|a| asm.nonzero.contains(&a.name));
    rest_ok.then(|| FnAtom {
        power: 1,
        ..(*atom).clone()
    })
}

/// Functions whose first t- and x-derivatives both vanish.
pub fn constant_functions(vanishing: &[FnAtom]) -> BTreeSet<String> {
    let has = |name: &str, dt: u32, dx: u32| {
        vanishing
            .iter()
            .any(|a| a.name == name && a.dt == dt && a.dx == dx && a.dv == 0)
    };
    vanishing
        .iter()
        .map(|a| a.name.clone())
        .filter(|n| has(n, 1, 0) && has(n, 0, 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load;

    #[test]
    fn eta_matches_fixture() {
        let eta = solve_eta_case_b().unwrap();
        assert_eq!(eta, load("case_b").unwrap().expr("eta").unwrap());
        assert_eq!(eta.len(), 6);
    }

    #[test]
    fn source_matches_fixture() {
        let eta = solve_eta_case_b().unwrap();
        let src = extract_source(&eta).unwrap();
        let fx = load("case_b").unwrap().expr("source").unwrap();
        assert_eq!(src, fx, "\n{src}\n{fx}");
        assert!(source_back_substitution(&eta, &src).unwrap().is_zero());
    }

    #[test]
    fn a_zero_is_not_invertible() {
        let eta = substitute(
            &solve_eta_case_b().unwrap(),
            &Bindings::new().func("a", Expr::zero()),
        )
        .unwrap();
        assert_eq!(eta, parse("g*V + h").unwrap());
        let b = Bindings::new().func("a", Expr::zero());
        let sys = generate_determining_system(&EvolutionEq::power());
        let bx = Bindings::new()
            .func("xi", parse("f").unwrap())
            .func("eta", eta);
        let eq3 = substitute(&substitute(&sys.equations[2], &bx).unwrap(), &b).unwrap();
        assert!(isolate(&eq3, &atom_pattern("F").unwrap()).is_err());
    }

    #[test]
    fn frozen_generic_constancy() {
        let fx = load("case_b").unwrap();
        let rest = &fx.expr("frozen_rest").unwrap() * &parse("1/3*a^(-1)").unwrap();
        let asm = case_b_assumptions()
            .with(&[
                "k != p-1", "k != p+2", "p != 0", "p != 1", "k != 1", "p != 2",
            ])
            .unwrap();
        let cs = constancy_constraints(&rest, &asm, &["a", "f"]).unwrap();
        let v = constancy_consequences(&cs, &asm);
        let consts = constant_functions(&v);
        assert!(consts.contains("g") && consts.contains("h"), "{v:?}");
    }

    #[test]
    fn constant_input_has_no_constraints() {
        let cs = constancy_constraints(&parse("3*V^2 + lambda").unwrap(), &Assumptions::new(), &[])
            .unwrap();
        assert!(cs.is_empty());
    }
}
