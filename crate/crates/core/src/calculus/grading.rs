//! Collection by V-dependent atoms and splitting into coefficient equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, AffineExponent, Expr, FnAtom, Signature};
use crate::frac::CoeffFrac;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Forbidden,
    Equal,
}

/// `lhs != rhs` or `lhs = rhs` between affine exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: AffineExponent,
    pub rhs: AffineExponent,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn forbid(lhs: AffineExponent, rhs: AffineExponent) -> Self {
        Constraint {
            lhs,
            rhs,
            kind: ConstraintKind::Forbidden,
        }
    }

    pub fn equal(lhs: AffineExponent, rhs: AffineExponent) -> Self {
        Constraint {
            lhs,
            rhs,
            kind: ConstraintKind::Equal,
        }
    }

    /// `"k != p+1"`, `"k≠0"`, `"k = p - 1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (l, r, kind) = if let Some((l, r)) = text.split_once("!=") {
            (l, r, ConstraintKind::Forbidden)
        } else if let Some((l, r)) = text.split_once('≠') {
            (l, r, ConstraintKind::Forbidden)
        } else if let Some((l, r)) = text.split_once('=') {
            (l, r, ConstraintKind::Equal)
        } else {
            return Err(Error::Invalid(format!(
                "constraint {text} needs '=' or '!='"
            )));
        };
        Ok(Constraint {
            lhs: parse_affine(l)?,
            rhs: parse_affine(r)?,
            kind,
        })
    }

    pub fn relation(&self) -> AffineExponent {
        normalize_relation(&(&self.lhs - &self.rhs))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            ConstraintKind::Forbidden => "!=",
            ConstraintKind::Equal => "=",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

/// Scales `r` so the first nonzero of its k, p, n coefficients is 1.
pub(crate) fn normalize_relation(r: &AffineExponent) -> AffineExponent {
    for c in [&r.ck, &r.cp, &r.cn] {
        if !c.is_zero() {
            return r.scale(&c.recip());
        }
    }
    r.clone()
}

/// Affine exponent text such as `2p+3`, `k - 1/2`, `-p`.
pub fn parse_affine(text: &str) -> Result<AffineExponent> {
    let mut s = String::with_capacity(text.len() + 4);
    let mut prev_digit = false;
    for ch in text.chars() {
        if prev_digit && ch.is_ascii_alphabetic() {
            s.push('*');
        }
        prev_digit = ch.is_ascii_digit();
        s.push(ch);
    }
    let e = parse(&s)?;
    let c = e
        .as_coeff()
        .ok_or_else(|| Error::NonAffineExponent(text.to_string()))?;
    AffineExponent::from_frac(&c).ok_or_else(|| Error::NonAffineExponent(text.to_string()))
}

/// Parameter constraints plus the symbols known to be nonzero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assumptions {
    pub constraints: Vec<Constraint>,
    pub nonzero: BTreeSet<String>,
}

impl Assumptions {
    pub fn new() -> Self {
        Assumptions::default()
    }

    pub fn forbid(mut self, lhs: AffineExponent, rhs: AffineExponent) -> Self {
        self.constraints.push(Constraint::forbid(lhs, rhs));
        self
    }

    /// Adds constraints from text, e.g. `["k!=0", "p!=k+1"]`.
    pub fn with(mut self, items: &[&str]) -> Result<Self> {
        for s in items {
            self.constraints.push(Constraint::parse(s)?);
        }
        Ok(self)
    }

    pub fn nonzero_symbols(mut self, names: &[&str]) -> Self {
        self.nonzero.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn forbidden(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.kind == ConstraintKind::Forbidden)
    }

    /// Whether `rel = 0` is ruled out.
    pub fn excludes(&self, rel: &AffineExponent) -> bool {
        if let Some(c) = rel.as_constant() {
            return !c.is_zero();
        }
        let n = normalize_relation(rel);
        self.forbidden().any(|c| c.relation() == n)
    }

    pub fn is_nonzero_poly(&self, p: &Poly) -> bool {
        if p.is_zero() {
            return false;
        }
        let mut cur = p.clone();
        loop {
            if cur.is_constant() {
                return true;
            }
            if let Some(aff) = AffineExponent::from_poly(&cur) {
                if self.excludes(&aff) {
                    return true;
                }
            }
            let mut progressed = false;
            for s in &self.nonzero {
                if let Some(q) = cur.exact_div(&Poly::var(s)) {
                    cur = q;
                    progressed = true;
                }
            }
            for c in self.forbidden() {
                let f = c.relation().to_poly();
                if f.is_constant() {
                    continue;
                }
                if let Some(q) = cur.exact_div(&f) {
                    cur = q;
                    progressed = true;
                }
            }
            if !progressed {
                return false;
            }
        }
    }

    pub fn is_nonzero_coeff(&self, c: &CoeffFrac) -> bool {
        self.is_nonzero_poly(c.numer())
    }

    /// A single term with a nonzero coefficient and only invertible atoms.
    pub fn is_nonzero_expr(&self, e: &Expr) -> bool {
        if e.len() != 1 {
            return false;
        }
        let (sig, c) = e.terms().next().unwrap();
        self.is_nonzero_coeff(c)
            && sig
                .fns
                .iter()
                .all(|a| !a.is_derived() && self.nonzero.contains(&a.name))
    }
}

/// Grading key: power of V, exponential, and the V-dependent atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollectKey {
    pub vpow: AffineExponent,
    pub exp: AffineExponent,
    pub fpart: Vec<FnAtom>,
}

impl CollectKey {
    pub fn to_expr(&self) -> Expr {
        Expr::from_parts(
            CoeffFrac::one(),
            Signature {
                vpow: self.vpow.clone(),
                exp: self.exp.clone(),
                fns: self.fpart.clone(),
            },
        )
    }
}

impl fmt::Display for CollectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Groups terms by [`CollectKey`]; values are the V-free cofactors.
pub fn collect(e: &Expr) -> BTreeMap<CollectKey, Expr> {
    let mut out: BTreeMap<CollectKey, Expr> = BTreeMap::new();
    for (sig, c) in e.terms() {
        let (fpart, rest): (Vec<FnAtom>, Vec<FnAtom>) =
            sig.fns.iter().cloned().partition(|a| a.deps.v);
        let key = CollectKey {
            vpow: sig.vpow.clone(),
            exp: sig.exp.clone(),
            fpart,
        };
        let cof = Expr::from_parts(
            c.clone(),
            Signature {
                fns: rest,
                ..Default::default()
            },
        );
        let slot = out.entry(key).or_default();
        *slot = &*slot + &cof;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn provably_nonzero(d: &AffineExponent, asm: &Assumptions) -> bool {
    match d.as_constant() {
        Some(c) => !c.is_zero(),
        None => asm.excludes(d),
    }
}

/// Whether two keys stay distinct for every admissible parameter value.
pub fn keys_distinct(a: &CollectKey, b: &CollectKey, asm: &Assumptions) -> bool {
    if a.fpart != b.fpart {
        return true;
    }
    provably_nonzero(&(&a.exp - &b.exp), asm) || provably_nonzero(&(&a.vpow - &b.vpow), asm)
}

/// Ordered list of equations, each labelled by the grading key it came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeterminingSystem {
    pub grading: Vec<String>,
    pub equations: Vec<Expr>,
}

impl DeterminingSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// The equations as a JSON array of canonical strings.
    pub fn to_json_array(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.equations
                .iter()
                .map(|e| serde_json::Value::String(e.to_string()))
                .collect(),
        )
    }

    pub fn from_strings(items: &[&str]) -> Result<Self> {
        let equations = items.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        Ok(DeterminingSystem {
            grading: (0..equations.len())
                .map(|i| format!("eq{}", i + 1))
                .collect(),
            equations,
        })
    }
}

impl fmt::Display for DeterminingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, e) in self.grading.iter().zip(&self.equations) {
            writeln!(f, "[{g}] {e} = 0")?;
        }
        Ok(())
    }
}

/// Splits `e = 0` into one equation per grading key.
///
/// Fails with [`Error::AmbiguousGrading`] when two keys could coincide for
/// some admissible parameter values.
pub fn split(e: &Expr, asm: &Assumptions) -> Result<DeterminingSystem> {
    let groups = collect(e);
    let keys: Vec<&CollectKey> = groups.keys().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            if !keys_distinct(a, b, asm) {
                return Err(Error::AmbiguousGrading(a.to_string(), b.to_string()));
            }
        }
    }
    let mut out = DeterminingSystem::default();
    for (k, v) in groups.into_iter().rev() {
        out.grading.push(k.to_string());
        out.equations.push(v);
    }
    Ok(out)
}

/// Splits by powers of a coefficient variable such as `x`; highest first.
pub fn split_coeff_var(e: &Expr, var: &str) -> Result<Vec<(u32, Expr)>> {
    let mut parts: BTreeMap<u32, Expr> = BTreeMap::new();
    for (sig, c) in e.terms() {
        if c.denom().contains_var(var) {
            return Err(Error::Invalid(format!(
                "coefficient {c} is not polynomial in {var}"
            )));
        }
        let den = c.denom().clone();
        for (d, pc) in c.numer().coeffs_in(var).into_iter().enumerate() {
            if pc.is_zero() {
                continue;
            }
            let slot = parts.entry(d as u32).or_default();
            *slot = &*slot + &Expr::from_parts(CoeffFrac::new(pc, den.clone()), sig.clone());
        }
    }
    parts.retain(|_, v| !v.is_zero());
    Ok(parts.into_iter().rev().collect())
}
