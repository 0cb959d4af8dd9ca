//! Determining equations for operators `d_t + xi d_x + eta d_V` of
//! `V_xx = F0(V) V_t + F1(V) V_x + F2(V)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    diff, equal_up_to_constant, substitute, Assumptions, Bindings, DeterminingSystem, Var,
};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Power,
    #[serde(rename = "exp")]
    Exponential,
    Concrete,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Power => "power",
            Family::Exponential => "exp",
            Family::Concrete => "concrete",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Family::Power),
            "exp" | "exponential" => Ok(Family::Exponential),
            "concrete" => Ok(Family::Concrete),
            _ => Err(Error::Invalid(format!("unknown family {s}"))),
        }
    }
}

/// `V_xx = f0 V_t + f1 V_x + f2`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEq {
    pub f0: Expr,
    pub f1: Expr,
    pub f2: Expr,
    pub family: Family,
    pub assumptions: Assumptions,
}

impl EvolutionEq {
    /// `F0 = V^p`, `F1 = -lambda V^k`, `F2 = F(V)`.
    pub fn power() -> Self {
        EvolutionEq {
            f0: parse("V^p").unwrap(),
            f1: parse("-lambda*V^k").unwrap(),
            f2: Expr::func("F"),
            family: Family::Power,
            assumptions: Assumptions::new()
                .with(&["p != -1", "k != 0", "k != p", "k != p+1"])
                .unwrap()
                .nonzero_symbols(&["lambda"]),
        }
    }

    /// `F0 = exp(V)`, `F1 = -lambda exp((n+1) V)`, `F2 = F(V)`.
    pub fn exponential() -> Self {
        EvolutionEq {
            f0: parse("exp(V)").unwrap(),
            f1: parse("-lambda*exp((n+1)*V)").unwrap(),
            f2: Expr::func("F"),
            family: Family::Exponential,
            assumptions: Assumptions::new()
                .with(&["n != 0", "n != -1"])
                .unwrap()
                .nonzero_symbols(&["lambda"]),
        }
    }

    pub fn concrete(f0: Expr, f1: Expr, f2: Expr) -> Self {
        EvolutionEq {
            f0,
            f1,
            f2,
            family: Family::Concrete,
            assumptions: Assumptions::new(),
        }
    }

    pub fn of_family(family: Family) -> Result<Self> {
        match family {
            Family::Power => Ok(EvolutionEq::power()),
            Family::Exponential => Ok(EvolutionEq::exponential()),
            Family::Concrete => Err(Error::Invalid(
                "a concrete equation needs explicit F0, F1, F2".into(),
            )),
        }
    }

    pub fn with_source(mut self, f2: Expr) -> Self {
        self.f2 = f2;
        self
    }

    /// Substitutes parameter values into F0, F1, F2.
    pub fn with_params(mut self, b: &Bindings) -> Result<Self> {
        self.f0 = substitute(&self.f0, b)?;
        self.f1 = substitute(&self.f1, b)?;
        self.f2 = substitute(&self.f2, b)?;
        Ok(self)
    }

    pub fn has_unknown_source(&self) -> bool {
        self.f2.contains_fn("F")
    }
}

impl fmt::Display for EvolutionEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V_xx = ({})*V_t + ({})*V_x + {}",
            self.f0, self.f1, self.f2
        )
    }
}

/// `tau d_t + xi d_x + eta d_V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymOperator {
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
}

impl SymOperator {
    pub fn new(tau: Expr, xi: Expr, eta: Expr) -> Self {
        SymOperator { tau, xi, eta }
    }

    pub fn parse(tau: &str, xi: &str, eta: &str) -> Result<Self> {
        Ok(SymOperator::new(parse(tau)?, parse(xi)?, parse(eta)?))
    }

    /// The generic ansatz `(1, xi(t,x,V), eta(t,x,V))`.
    pub fn general() -> Self {
        SymOperator::new(Expr::one(), Expr::func("xi"), Expr::func("eta"))
    }

    pub fn is_normalized(&self) -> bool {
        self.tau == Expr::one()
    }
}

impl fmt::Display for SymOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})*d_t + ({})*d_x + ({})*d_V",
            self.tau, self.xi, self.eta
        )
    }
}

/// Divides through by `tau`.
pub fn normalize_operator(op: &SymOperator) -> Result<SymOperator> {
    if op.tau.is_zero() {
        return Err(Error::TauZero);
    }
    if op.is_normalized() {
        return Ok(op.clone());
    }
    let inv = op.tau.inv()?;
    Ok(SymOperator::new(Expr::one(), &op.xi * &inv, &op.eta * &inv))
}

/// Polynomial in `q = V_x` with Expr coefficients, index = degree.
#[derive(Clone, Debug, Default)]
struct Jet(Vec<Expr>);

impl Jet {
    fn c(e: Expr) -> Jet {
        Jet(vec![e])
    }

    fn q(e: Expr) -> Jet {
        Jet(vec![Expr::zero(), e])
    }

    fn add(&self, o: &Jet) -> Jet {
        let n = self.0.len().max(o.0.len());
        let z = Expr::zero();
        Jet((0..n)
            .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
            .collect())
    }

    fn neg(&self) -> Jet {
        Jet(self.0.iter().map(|e| -e).collect())
    }

    fn sub(&self, o: &Jet) -> Jet {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Jet) -> Jet {
        if self.0.is_empty() || o.0.is_empty() {
            return Jet::default();
        }
        let mut out = vec![Expr::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Jet(out)
    }

    fn scale(&self, e: &Expr) -> Jet {
        Jet(self.0.iter().map(|x| x * e).collect())
    }

    fn shift(&self) -> Jet {
        let mut v = vec![Expr::zero()];
        v.extend(self.0.iter().cloned());
        Jet(v)
    }
}

/// Derives the four equations (coefficients of V_x^3, ..., V_x^0) for the
/// generic operator `d_t + xi d_x + eta d_V`.
pub fn generate_determining_system(eq: &EvolutionEq) -> DeterminingSystem {
    let xi = Expr::func("xi");
    let eta = Expr::func("eta");
    let d = |e: &Expr, v: Var| diff(e, v);

    // V_t and V_xx on the invariant surface.
    let ut = Jet(vec![eta.clone(), -&xi]);
    let uxx = ut
        .scale(&eq.f0)
        .add(&Jet::q(eq.f1.clone()))
        .add(&Jet::c(eq.f2.clone()));

    let dx = |phi: &Expr| Jet(vec![d(phi, Var::X), d(phi, Var::V)]);
    let dxx = |phi: &Expr| {
        let phi_v = d(phi, Var::V);
        Jet(vec![
            d(&d(phi, Var::X), Var::X),
            d(&d(phi, Var::X), Var::V).scale(&crate::frac::CoeffFrac::int(2)),
            d(&phi_v, Var::V),
        ])
        .add(&uxx.scale(&phi_v))
    };
    let dt = |phi: &Expr| Jet::c(d(phi, Var::T)).add(&ut.scale(&d(phi, Var::V)));

    let f0p = d(&eq.f0, Var::V);
    let f1p = d(&eq.f1, Var::V);
    let f2p = d(&eq.f2, Var::V);

    let r = dxx(&eta)
        .sub(&uxx.mul(&dx(&xi)).scale(&Expr::int(2)))
        .sub(&dxx(&xi).shift())
        .sub(&ut.scale(&(&f0p * &eta)))
        .sub(&dt(&eta).sub(&dt(&xi).shift()).scale(&eq.f0))
        .sub(&Jet::q(&f1p * &eta))
        .sub(&dx(&eta).sub(&dx(&xi).shift()).scale(&eq.f1))
        .sub(&Jet::c(&f2p * &eta));

    let mut coeffs = r.0;
    coeffs.resize(4, Expr::zero());
    let mut out = DeterminingSystem::default();
    for (i, e) in coeffs.into_iter().enumerate().rev() {
        out.grading.push(format!("Vx^{i}"));
        out.equations.push(e);
    }
    out
}

/// JSON form `{family, grading, equations}`.
pub fn system_json(family: Family, sys: &DeterminingSystem) -> serde_json::Value {
    serde_json::json!({
        "family": family.as_str(),
        "grading": sys.grading,
        "equations": sys.to_json_array(),
    })
}

/// Residuals of the four determining equations for a concrete operator.
pub fn check_operator(eq: &EvolutionEq, op: &SymOperator) -> Result<Vec<Expr>> {
    let op = normalize_operator(op)?;
    let sys = generate_determining_system(eq);
    let b = Bindings::new()
        .func("xi", op.xi.clone())
        .func("eta", op.eta.clone());
    sys.equations.iter().map(|e| substitute(e, &b)).collect()
}

pub fn is_symmetry(eq: &EvolutionEq, op: &SymOperator) -> Result<bool> {
    Ok(check_operator(eq, op)?.iter().all(Expr::is_zero))
}

/// Per-equation comparison up to a nonzero rational factor.
pub fn compare_systems(a: &DeterminingSystem, b: &DeterminingSystem) -> Vec<bool> {
    if a.len() != b.len() {
        return vec![false; a.len().max(b.len())];
    }
    a.equations
        .iter()
        .zip(&b.equations)
        .map(|(x, y)| equal_up_to_constant(x, y))
        .collect()
}


#[cfg(test)]
mod fixture_tests {
    use super::*;
    use crate::fixtures::load;

    fn fixture_system(name: &str) -> DeterminingSystem {
        let f = load(name).unwrap();
        DeterminingSystem {
            grading: f.blocks.iter().map(|b| b.label.clone()).collect(),
            equations: f.exprs().unwrap(),
        }
    }

    #[test]
    fn regenerates_power_family() {
        let sys = generate_determining_system(&EvolutionEq::power());
        let fx = fixture_system("determining_power");
        for (i, (a, b)) in sys.equations.iter().zip(&fx.equations).enumerate() {
            assert!(equal_up_to_constant(a, b), "eq {i}:\n  {a}\n  {b}");
        }
    }

    #[test]
    fn regenerates_exp_family() {
        let sys = generate_determining_system(&EvolutionEq::exponential());
        let fx = fixture_system("determining_exp");
        for (i, (a, b)) in sys.equations.iter().zip(&fx.equations).enumerate() {
            assert!(equal_up_to_constant(a, b), "eq {i}:\n  {a}\n  {b}");
        }
    }
}
