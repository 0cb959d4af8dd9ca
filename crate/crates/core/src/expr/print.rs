//! Canonical text output; re-parses to the same [`Expr`].

use std::fmt;

use num_traits::{One, Signed};

use super::{AffineExponent, Expr, Signature};
use crate::frac::CoeffFrac;
use crate::poly::{fmt_rat, Poly};

fn fmt_vpow(e: &AffineExponent) -> Option<String> {
    if e.is_zero() {
        return None;
    }
    Some(match e.as_constant() {
        Some(c) if c.is_one() => "V".to_string(),
        Some(c) if c.is_integer() && c.is_positive() => format!("V^{}", c.numer()),
        _ => format!("V^({e})"),
    })
}

fn fmt_exp(c: &AffineExponent) -> Option<String> {
    if c.is_zero() {
        return None;
    }
    Some(match c.as_constant() {
        Some(r) if r.is_one() => "exp(V)".to_string(),
        Some(r) => format!("exp({}*V)", fmt_rat(r)),
        None => format!("exp(({c})*V)"),
    })
}

fn atoms(sig: &Signature) -> Vec<String> {
    let mut out = Vec::new();
    out.extend(fmt_vpow(&sig.vpow));
    out.extend(fmt_exp(&sig.exp));
    out.extend(sig.fns.iter().map(|a| a.to_string()));
    out
}

/// Sign and unsigned body of one term.
fn fmt_term(coeff: &CoeffFrac, sig: &Signature) -> (bool, String) {
    let atoms = atoms(sig);
    let mut factors = Vec::new();
    let mut neg = false;
    let single = coeff
        .as_poly()
        .filter(|p| p.len() == 1)
        .and_then(|p| p.terms().next().map(|(m, c)| (m.clone(), c.clone())));
    match single {
        Some((m, c)) => {
            neg = c.is_negative();
            let mag = c.abs();
            if !mag.is_one() || (m.is_one() && atoms.is_empty()) {
                factors.push(fmt_rat(&mag));
            }
            if !m.is_one() {
                factors.push(m.to_string());
            }
        }
        None => {
            let mut num = coeff.numer().clone();
            if num.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
                neg = true;
                num = -&num;
            }
            let den = coeff.denom();
            let body = if den.is_one() {
                paren(&num)
            } else {
                format!("{}/({den})", paren(&num))
            };
            factors.push(body);
        }
    }
    factors.extend(atoms);
    (neg, factors.join("*"))
}

fn paren(p: &Poly) -> String {
    if p.needs_parens_in_product() || p.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        format!("({p})")
    } else {
        p.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (sig, coeff)) in self.terms().enumerate() {
            let (neg, body) = fmt_term(coeff, sig);
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}
