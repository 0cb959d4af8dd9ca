//! Parameter relations under which grading exponents merge.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::calculus::{collect, Assumptions, Constraint, ConstraintKind};
use crate::error::{Error, Result};
use crate::expr::{AffineExponent, Expr};
use crate::fixtures::load;
use crate::poly::{fmt_rat, Rat};

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Collision(AffineExponent, AffineExponent),
    Vanishing(AffineExponent),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Collision(a, b) => write!(f, "{a} meets {b}"),
            Provenance::Vanishing(t) => write!(f, "leading factor of V^({t}) vanishes"),
        }
    }
}

/// An equal-kind constraint together with every way it was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialCase {
    pub constraint: Constraint,
    pub provenance: Vec<Provenance>,
}

impl fmt::Display for SpecialCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)
    }
}

fn var_exponent(name: &str) -> AffineExponent {
    match name {
        "p" => AffineExponent::ints(1, 0, 0, 0),
        "k" => AffineExponent::ints(0, 1, 0, 0),
        _ => AffineExponent::ints(0, 0, 1, 0),
    }
}

/// Writes `rel = 0` as `k = alpha p + beta`, `p = value` or `n = value`.
fn normal_form(rel: &AffineExponent) -> Option<Constraint> {
    for name in ["k", "p", "n"] {
        let c = rel.coeff(name).clone();
        if c.is_zero() {
            continue;
        }
        let lhs = var_exponent(name);
        let rest = rel - &lhs.scale(&c);
        let rhs = rest.scale(&(-c.recip()));
        return Some(Constraint::equal(lhs, rhs));
    }
    None
}

fn sort_key(c: &Constraint) -> (u8, Rat, Rat, Rat) {
    let group = if !c.lhs.cp.is_zero() {
        0
    } else if !c.lhs.ck.is_zero() {
        1
    } else {
        2
    };
    (group, c.rhs.cp.clone(), c.rhs.cn.clone(), c.rhs.c0.clone())
}

fn order(a: &Constraint, b: &Constraint) -> Ordering {
    sort_key(a).cmp(&sort_key(b))
}

/// Relations `target = e` for every target and every other exponent `e`,
/// plus the supplied vanishing roots, minus anything `forbidden` excludes.
///
/// Results are deduplicated by relation and ordered: `p = value` ascending,
/// then `k = alpha p + beta` by `(alpha, beta)`, then relations in `n`.
pub fn enumerate_special_cases(
    exponents: &[AffineExponent],
    targets: &[AffineExponent],
    forbidden: &Assumptions,
    vanishing: &[(AffineExponent, Constraint)],
) -> Vec<SpecialCase> {
    let mut found: BTreeMap<AffineExponent, SpecialCase> = BTreeMap::new();
    let mut record = |c: Constraint, prov: Provenance| {
        let rel = c.relation();
        if forbidden.excludes(&rel) {
            return;
        }
        found
            .entry(rel)
            .or_insert_with(|| SpecialCase {
                constraint: c,
                provenance: Vec::new(),
            })
            .provenance
            .push(prov);
    };
    for t in targets {
        for e in exponents {
            let rel = t - e;
            if rel.as_constant().is_some() {
                continue;
            }
            if let Some(c) = normal_form(&rel) {
                record(c, Provenance::Collision(t.clone(), e.clone()));
            }
        }
    }
    for (t, c) in vanishing {
        if let Some(nc) = normal_form(&c.relation()) {
            record(nc, Provenance::Vanishing(t.clone()));
        }
    }
    let mut out: Vec<SpecialCase> = found.into_values().collect();
    for c in &mut out {
        c.provenance.sort_by_key(|p| p.to_string());
        c.provenance.dedup();
    }
    out.sort_by(|a, b| order(&a.constraint, &b.constraint));
    out
}

/// One row of a coincidence table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseTable {
    pub target: AffineExponent,
    pub columns: Vec<AffineExponent>,
    /// `None` renders as `-`.
    pub values: Vec<Option<Rat>>,
    /// Cells whose value violates a forbidden constraint.
    pub excluded: Vec<bool>,
}

impl CaseTable {
    pub fn cells(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|v| v.as_ref().map(fmt_rat).unwrap_or_else(|| "-".into()))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct J {
            target: String,
            columns: Vec<String>,
            values: Vec<String>,
            excluded: Vec<bool>,
        }
        serde_json::to_value(J {
            target: self.target.to_string(),
            columns: self.columns.iter().map(|c| c.to_string()).collect(),
            values: self.cells(),
            excluded: self.excluded.clone(),
        })
        .unwrap()
    }
}

impl fmt::Display for CaseTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = std::iter::once(String::new())
            .chain(self.columns.iter().map(|c| c.to_string()))
            .collect();
        let row: Vec<String> = std::iter::once(self.target.to_string())
            .chain(self.cells())
            .collect();
        let widths: Vec<usize> = head
            .iter()
            .zip(&row)
            .map(|(a, b)| a.len().max(b.len()))
            .collect();
        for line in [&head, &row] {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            writeln!(f, "| {} |", cells.join(" | "))?;
        }
        Ok(())
    }
}

fn apply_equalities(e: &AffineExponent, case: &[Constraint]) -> AffineExponent {
    let mut out = e.clone();
    for c in case.iter().filter(|c| c.kind == ConstraintKind::Equal) {
        for name in ["k", "p", "n"] {
            if c.lhs == var_exponent(name) && c.rhs.coeff(name).is_zero() {
                out = out.substitute(name, &c.rhs);
            }
        }
    }
    out
}

fn p_only(e: &AffineExponent) -> bool {
    e.ck.is_zero() && e.cn.is_zero()
}

/// For each column, the unique `p` with `target = column` after applying the
/// case's equalities, or `-` when no value works.
pub fn coincidence_table(
    target: &AffineExponent,
    columns: &[AffineExponent],
    case: &[Constraint],
    forbidden: &Assumptions,
) -> Result<CaseTable> {
    let t = apply_equalities(target, case);
    if !p_only(&t) {
        return Err(Error::ColumnNotReducible(target.to_string()));
    }
    let mut values = Vec::new();
    let mut excluded = Vec::new();
    for col in columns {
        let c = apply_equalities(col, case);
        if !p_only(&c) {
            return Err(Error::ColumnNotReducible(col.to_string()));
        }
        let d = &t - &c;
        if d.is_zero() {
            return Err(Error::AlwaysCoincide(col.to_string()));
        }
        if d.cp.is_zero() {
            values.push(None);
            excluded.push(false);
            continue;
        }
        let v = -(&d.c0 / &d.cp);
        let rel = &var_exponent("p") - &AffineExponent::constant(v.clone());
        excluded.push(forbidden.excludes(&rel));
        values.push(Some(v));
    }
    Ok(CaseTable {
        target: target.clone(),
        columns: columns.to_vec(),
        values,
        excluded,
    })
}

/// Exponents of V in an expression, in canonical (descending) order.
pub fn source_keys(e: &Expr) -> Vec<AffineExponent> {
    collect(e).into_keys().rev().map(|k| k.vpow).collect()
}

/// The source exponents listed in reading order, with `k = p - 1` applied.
pub fn fifteen_powers() -> Result<Vec<AffineExponent>> {
    let keys = load("source_keys")?.exponents("keys")?;
    let k = AffineExponent::new(Rat::one(), Rat::zero(), Rat::zero(), -Rat::one());
    Ok(keys.iter().map(|e| e.substitute("k", &k)).collect())
}
