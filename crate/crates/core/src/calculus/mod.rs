//! Differentiation and substitution over [`Expr`], plus grading and the
//! small solvers built on top of them.

mod grading;
mod solve;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{merge_fns, parse, AffineExponent, Expr, FnAtom, Signature, EXPONENT_PARAMS};
use crate::frac::CoeffFrac;
use crate::poly::Rat;

pub use grading::{
    collect, keys_distinct, parse_affine, split, split_coeff_var, Assumptions, CollectKey,
    Constraint, ConstraintKind, DeterminingSystem,
};
pub use solve::{euler_ode_solve, integrate_v, isolate};

/// Independent variable of differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
    V,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::V => "V",
        }
    }
}

pub fn diff(e: &Expr, var: Var) -> Expr {
    let mut out = Expr::zero();
    for (sig, coeff) in e.terms() {
        diff_term(sig, coeff, var, &mut out);
    }
    out
}

/// Mixed derivative of orders `(dt, dx, dv)`.
pub fn diff_n(e: &Expr, dt: u32, dx: u32, dv: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..dt {
        out = diff(&out, Var::T);
    }
    for _ in 0..dx {
        out = diff(&out, Var::X);
    }
    for _ in 0..dv {
        out = diff(&out, Var::V);
    }
    out
}

fn diff_term(sig: &Signature, coeff: &CoeffFrac, var: Var, out: &mut Expr) {
    match var {
        Var::T | Var::X => {
            let dc = coeff.derivative(var.name());
            out.add_term(sig.clone(), dc);
        }
        Var::V => {
            if !sig.vpow.is_zero() {
                let lowered = &sig.vpow - &AffineExponent::ints(0, 0, 0, 1);
                let c = coeff * &CoeffFrac::from_poly(sig.vpow.to_poly());
                out.add_term(
                    Signature {
                        vpow: lowered,
                        ..sig.clone()
                    },
                    c,
                );
            }
            if !sig.exp.is_zero() {
                let c = coeff * &CoeffFrac::from_poly(sig.exp.to_poly());
                out.add_term(sig.clone(), c);
            }
        }
    }
    for (i, atom) in sig.fns.iter().enumerate() {
        let depends = match var {
            Var::T => atom.deps.t,
            Var::X => atom.deps.x,
            Var::V => atom.deps.v,
        };
        if !depends {
            continue;
        }
        let (dt, dx, dv) = match var {
            Var::T => (1, 0, 0),
            Var::X => (0, 1, 0),
            Var::V => (0, 0, 1),
        };
        let mut rest: Vec<FnAtom> = sig
            .fns
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.clone())
            .collect();
        if atom.power != 1 {
            rest = merge_fns(
                &rest,
                &[FnAtom {
                    power: atom.power - 1,
                    ..atom.clone()
                }],
            );
        }
        let fns = merge_fns(&rest, &[atom.derived(dt, dx, dv)]);
        out.add_term(
            Signature {
                vpow: sig.vpow.clone(),
                exp: sig.exp.clone(),
                fns,
            },
            coeff * &CoeffFrac::int(atom.power as i64),
        );
    }
}

/// Replacement rules applied by [`substitute`].
///
/// Function rules fire simultaneously and also rewrite every derivative of
/// the bound atom; parameter rules are then applied in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    functions: Vec<(FnAtom, Expr)>,
    params: Vec<(String, CoeffFrac)>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    /// Binds a function atom given by name, possibly with a derivative
    /// suffix (`"g"`, `"f_x"`).
    pub fn func(mut self, atom: &str, value: Expr) -> Self {
        let pattern = atom_pattern(atom).unwrap_or_else(|e| panic!("{e}"));
        self.functions.push((pattern, value));
        self
    }

    pub fn func_str(self, atom: &str, value: &str) -> Result<Self> {
        let v = parse(value)?;
        Ok(self.func(atom, v))
    }

    pub fn param(mut self, name: &str, value: CoeffFrac) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn param_rat(self, name: &str, value: Rat) -> Self {
        self.param(name, CoeffFrac::rational(value))
    }

    pub fn param_int(self, name: &str, value: i64) -> Self {
        self.param(name, CoeffFrac::int(value))
    }

    pub fn param_str(self, name: &str, value: &str) -> Result<Self> {
        let e = parse(value)?;
        let c = e
            .as_coeff()
            .ok_or_else(|| Error::Invalid(format!("parameter value {value} must be scalar")))?;
        Ok(self.param(name, c))
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty() && self.params.is_empty()
    }
}

/// Reads `"f_x"` as the atom pattern f with one x-derivative.
pub fn atom_pattern(text: &str) -> Result<FnAtom> {
    let e = parse(text)?;
    let mut terms = e.terms();
    match (terms.next(), terms.next()) {
        (Some((sig, c)), None) if c.is_one() && sig.fns.len() == 1 && sig.vpow.is_zero() => {
            Ok(sig.fns[0].clone())
        }
        _ => Err(Error::Invalid(format!(
            "{text} is not a single function atom"
        ))),
    }
}

pub fn substitute(e: &Expr, b: &Bindings) -> Result<Expr> {
    let mut cur = if b.functions.is_empty() {
        e.clone()
    } else {
        substitute_functions(e, &b.functions)?
    };
    for (name, value) in &b.params {
        cur = substitute_param(&cur, name, value)?;
    }
    Ok(cur)
}

fn substitute_functions(e: &Expr, rules: &[(FnAtom, Expr)]) -> Result<Expr> {
    let mut out = Expr::zero();
    for (sig, coeff) in e.terms() {
        let mut kept = Vec::new();
        let mut factor = Expr::one();
        for atom in &sig.fns {
            let rule = rules
                .iter()
                .find_map(|(pat, val)| atom.derivative_excess(pat).map(|ex| (ex, val)));
            match rule {
                Some(((dt, dx, dv), val)) => {
                    let d = diff_n(val, dt, dx, dv);
                    factor = &factor * &d.pow(atom.power)?;
                }
                None => kept.push(atom.clone()),
            }
        }
        let base = Expr::from_parts(
            coeff.clone(),
            Signature {
                vpow: sig.vpow.clone(),
                exp: sig.exp.clone(),
                fns: kept,
            },
        );
        out = &out + &(&base * &factor);
    }
    Ok(out)
}

fn substitute_param(e: &Expr, name: &str, value: &CoeffFrac) -> Result<Expr> {
    let in_exponents = EXPONENT_PARAMS.contains(&name);
    let affine = if in_exponents {
        AffineExponent::from_frac(value)
    } else {
        None
    };
    let mut out = Expr::zero();
    for (sig, coeff) in e.terms() {
        let c = coeff
            .substitute(name, value)
            .map_err(|_| Error::DenominatorVanishes(format!("{name} = {value}")))?;
        let touches_exponent =
            in_exponents && (!sig.vpow.coeff(name).is_zero() || !sig.exp.coeff(name).is_zero());
        let new_sig = if touches_exponent {
            let aff = affine
                .as_ref()
                .ok_or_else(|| Error::NonAffineExponent(format!("{name} = {value}")))?;
            Signature {
                vpow: sig.vpow.substitute(name, aff),
                exp: sig.exp.substitute(name, aff),
                fns: sig.fns.clone(),
            }
        } else {
            sig.clone()
        };
        out.add_term(new_sig, c);
    }
    Ok(out)
}

/// Treats the named functions as constants: all their derivatives vanish.
pub fn freeze(e: &Expr, names: &[&str]) -> Expr {
    let mut out = Expr::zero();
    for (sig, coeff) in e.terms() {
        if sig
            .fns
            .iter()
            .any(|a| a.is_derived() && names.contains(&a.name.as_str()))
        {
            continue;
        }
        out.add_term(sig.clone(), coeff.clone());
    }
    out
}

/// Normalizes an equation `e = 0`: divides by the leading coefficient.
pub fn normalize_equation(e: &Expr) -> Expr {
    match e.leading() {
        None => Expr::zero(),
        Some((_, c)) => e.scale(&c.inv().expect("nonzero leading coefficient")),
    }
}

/// If `a = r * b` for a nonzero coefficient `r`, returns `r`.
pub fn proportionality(a: &Expr, b: &Expr) -> Option<CoeffFrac> {
    if a.is_zero() && b.is_zero() {
        return Some(CoeffFrac::one());
    }
    let (sig, ca) = a.leading()?;
    let cb = b.coefficient_of(sig)?;
    let r = ca * &cb.inv().ok()?;
    (a - &b.scale(&r)).is_zero().then_some(r)
}

/// Like [`proportionality`] but the factor must be a nonzero rational constant.
pub fn equal_up_to_constant(a: &Expr, b: &Expr) -> bool {
    proportionality(a, b)
        .and_then(|r| r.as_rational())
        .map(|r| !r.is_zero())
        .unwrap_or(false)
}

/// Exponent shorthand for tests and fixtures: `V^(e)` as an [`Expr`].
pub fn v_pow_str(e: &str) -> Result<Expr> {
    Ok(Expr::v_pow(parse_affine(e)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn derivative_of_power_in_v() {
        assert_eq!(diff(&p("V^(p+3)"), Var::V), p("(p+3)*V^(p+2)"));
    }

    #[test]
    fn derivative_of_exponential() {
        assert_eq!(diff(&p("exp((n+1)*V)"), Var::V), p("(n+1)*exp((n+1)*V)"));
    }

    #[test]
    fn derivative_of_function_power() {
        assert_eq!(diff(&p("a^2"), Var::T), p("2*a*a_t"));
        assert_eq!(diff(&p("a^(-1)"), Var::X), p("-a^(-2)*a_x"));
    }

    #[test]
    fn quotient_rule_on_coefficients() {
        assert_eq!(
            diff(&p("(k*x+A2)/(2*k*t+A1)"), Var::T),
            p("-2*k*(k*x+A2)/(2*k*t+A1)^2")
        );
    }

    #[test]
    fn derivative_respects_dependencies() {
        assert!(diff(&p("F"), Var::T).is_zero());
        assert_eq!(diff(&p("F"), Var::V), p("F_V"));
        assert!(diff(&p("alpha"), Var::X).is_zero());
    }

    #[test]
    fn substitute_param_into_exponent() {
        let b = Bindings::new().param_int("p", 3);
        assert_eq!(substitute(&p("V^(2*p+1)"), &b).unwrap(), p("V^7"));
    }

    #[test]
    fn substitute_param_vanishing_denominator() {
        let b = Bindings::new().param_int("p", -2);
        assert!(matches!(
            substitute(&p("a^2/((p+2)*(p+3))*V^(p+3)"), &b),
            Err(Error::DenominatorVanishes(_))
        ));
    }

    #[test]
    fn substitute_function_induces_derivatives() {
        let b = Bindings::new().func("g", p("A1*f_x"));
        assert_eq!(
            substitute(&p("g_x + g"), &b).unwrap(),
            p("A1*f_xx + A1*f_x")
        );
    }

    #[test]
    fn substitute_derivative_pattern() {
        let b = Bindings::new().func("f_x", p("-k*g"));
        assert_eq!(
            substitute(&p("f_xx + f_t + f_x"), &b).unwrap(),
            p("-k*g_x + f_t - k*g")
        );
    }

    #[test]
    fn freeze_drops_derivatives() {
        assert_eq!(freeze(&p("a*V + a_x*V^2 + f_t"), &["a"]), p("a*V + f_t"));
    }

    #[test]
    fn proportional_equations() {
        assert!(equal_up_to_constant(&p("2*g + 4*h"), &p("-g - 2*h")));
        assert!(!equal_up_to_constant(&p("k*g"), &p("g")));
        assert!(proportionality(&p("k*g"), &p("g")).is_some());
    }
}
