use num_traits::Zero;

use super::grading::Assumptions;
use crate::error::{Error, Result};
use crate::expr::{AffineExponent, Expr, FnAtom, Signature};
use crate::frac::CoeffFrac;

fn nonzero_affine(d: &AffineExponent, asm: &Assumptions) -> bool {
    match d.as_constant() {
        Some(c) => !c.is_zero(),
        None => asm.excludes(d),
    }
}

fn check_v_free_atoms(sig: &Signature, e: &Expr) -> Result<()> {
    if sig.fns.iter().any(|a| a.deps.v) {
        return Err(Error::Invalid(format!(
            "{e} contains a V-dependent function"
        )));
    }
    Ok(())
}

/// Antiderivative in V (no integration constant).
pub fn integrate_v(e: &Expr, asm: &Assumptions) -> Result<Expr> {
    let one = AffineExponent::ints(0, 0, 0, 1);
    let mut out = Expr::zero();
    for (sig, c) in e.terms() {
        check_v_free_atoms(sig, e)?;
        let new_sig;
        let divisor;
        if sig.exp.is_zero() {
            let d = &sig.vpow + &one;
            if !nonzero_affine(&d, asm) {
                return Err(Error::LogarithmicIntegral(format!("V^({})", sig.vpow)));
            }
            divisor = d.to_poly();
            new_sig = Signature {
                vpow: d,
                ..sig.clone()
            };
        } else if sig.vpow.is_zero() {
            if !nonzero_affine(&sig.exp, asm) {
                return Err(Error::Invalid(format!(
                    "exp coefficient {} may vanish",
                    sig.exp
                )));
            }
            divisor = sig.exp.to_poly();
            new_sig = sig.clone();
        } else {
            return Err(Error::Invalid(format!(
                "cannot integrate V^({})*exp(({})*V) in closed form",
                sig.vpow, sig.exp
            )));
        }
        let coeff = CoeffFrac::try_new(c.numer().clone(), c.denom() * &divisor)?;
        out = &out + &Expr::from_parts(coeff, new_sig);
    }
    Ok(out)
}

fn fresh_constant(target: &str, rhs: &Expr) -> String {
    if target == "F" && !rhs.contains_coeff_var("lambda1") {
        return "lambda1".to_string();
    }
    (1..)
        .map(|i| format!("C{i}"))
        .find(|c| !rhs.contains_coeff_var(c))
        .unwrap()
}

/// General solution of `Phi' - (s/V) Phi = rhs` for `rhs` a sum of
/// V-powers with V-free cofactors.
///
/// The homogeneous part is `C V^s` with a fresh constant: `lambda1` when
/// solving for `F`, otherwise the first unused `C1`, `C2`, ...
pub fn euler_ode_solve(
    s: &AffineExponent,
    rhs: &Expr,
    target: &str,
    asm: &Assumptions,
) -> Result<Expr> {
    let one = AffineExponent::ints(0, 0, 0, 1);
    let mut out = Expr::zero();
    for (sig, c) in rhs.terms() {
        check_v_free_atoms(sig, rhs)?;
        if !sig.exp.is_zero() {
            return Err(Error::Invalid(format!(
                "{rhs} contains an exponential in V"
            )));
        }
        let lifted = &sig.vpow + &one;
        let d = &lifted - s;
        if !nonzero_affine(&d, asm) {
            return Err(Error::Resonance(format!("V^({})", sig.vpow)));
        }
        let coeff = CoeffFrac::try_new(c.numer().clone(), c.denom() * &d.to_poly())?;
        out = &out
            + &Expr::from_parts(
                coeff,
                Signature {
                    vpow: lifted,
                    ..sig.clone()
                },
            );
    }
    let name = fresh_constant(target, rhs);
    Ok(&out + &(&Expr::symbol(&name) * &Expr::v_pow(s.clone())))
}

/// Solves `eq = 0` for `target`, which must occur linearly with an
/// invertible cofactor.
pub fn isolate(eq: &Expr, target: &FnAtom) -> Result<Expr> {
    let fail = || Error::NotIsolable {
        target: target.base_name(),
        expr: eq.to_string(),
    };
    let mut coeff = Expr::zero();
    let mut rest = Expr::zero();
    for (sig, c) in eq.terms() {
        let hits: Vec<&FnAtom> = sig
            .fns
            .iter()
            .filter(|a| a.derivative_excess(target).is_some())
            .collect();
        match hits.as_slice() {
            [] => rest = &rest + &Expr::from_parts(c.clone(), sig.clone()),
            [a] if a.same_base(target) && a.power == 1 => {
                let fns = sig
                    .fns
                    .iter()
                    .filter(|x| !x.same_base(target))
                    .cloned()
                    .collect();
                coeff = &coeff + &Expr::from_parts(c.clone(), Signature { fns, ..sig.clone() });
            }
            _ => return Err(fail()),
        }
    }
    if coeff.is_zero() {
        return Err(fail());
    }
    let inv = coeff.inv().map_err(|_| fail())?;
    Ok(-&(&rest * &inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{atom_pattern, diff, Var};
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn integrate_power_needs_exclusion() {
        let e = p("a^2*V^(p+2)");
        assert!(matches!(
            integrate_v(&e, &Assumptions::new()),
            Err(Error::LogarithmicIntegral(_))
        ));
        let asm = Assumptions::new().with(&["p != -3"]).unwrap();
        let i = integrate_v(&e, &asm).unwrap();
        assert_eq!(diff(&i, Var::V), e);
    }

    #[test]
    fn integrate_reciprocal_is_logarithmic() {
        assert!(matches!(
            integrate_v(&p("V^(-1)"), &Assumptions::new()),
            Err(Error::LogarithmicIntegral(_))
        ));
    }

    #[test]
    fn euler_back_substitution() {
        let s = AffineExponent::ints(0, 2, 0, 1);
        let rhs = p("lambda*g_x*g^(-1)*V^k + (g_xx + 2*k*g^2 - g_t)*g^(-1)");
        let asm = Assumptions::new().with(&["k != 0"]).unwrap();
        let phi = euler_ode_solve(&s, &rhs, "F", &asm).unwrap();
        let residual = &(&diff(&phi, Var::V) - &(&p("(2*k+1)*V^(-1)") * &phi)) - &rhs;
        assert!(residual.is_zero(), "{residual}");
        assert!(phi.to_string().contains("lambda1"));
    }

    #[test]
    fn euler_resonance() {
        let s = AffineExponent::ints(0, 2, 0, 1);
        let rhs = p("V^(2*k)");
        assert!(matches!(
            euler_ode_solve(&s, &rhs, "F", &Assumptions::new()),
            Err(Error::Resonance(_))
        ));
    }

    #[test]
    fn isolate_linear_atom() {
        let eq = p("lambda*f_x + lambda*k*g");
        let fx = atom_pattern("f_x").unwrap();
        assert_eq!(isolate(&eq, &fx).unwrap(), p("-k*g"));
        let bad = p("f_x^2 + g");
        assert!(matches!(isolate(&bad, &fx), Err(Error::NotIsolable { .. })));
    }
}
