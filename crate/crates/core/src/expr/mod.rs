//! Canonical sums of graded terms.
//!
//! A term is `coeff * V^(affine) * exp(affine * V) * prod(function atoms)`,
//! where `coeff` is a rational function of `t`, `x` and the parameters.
//! Terms sharing the same atom signature are always merged, so structural
//! equality of [`Expr`] values is mathematical equality within this term
//! language.

mod parse;
mod print;
mod symbols;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::frac::CoeffFrac;
use crate::poly::{fmt_rat, rat, Poly, Rat};

pub use parse::{parse, parse_with};
pub use symbols::{Deps, Symbols};

/// Names of the parameters that may appear in exponents.
pub const EXPONENT_PARAMS: [&str; 3] = ["p", "k", "n"];

/// `cp*p + ck*k + cn*n + c0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AffineExponent {
    pub cp: Rat,
    pub ck: Rat,
    pub cn: Rat,
    pub c0: Rat,
}

impl AffineExponent {
    pub fn new(cp: Rat, ck: Rat, cn: Rat, c0: Rat) -> Self {
        AffineExponent { cp, ck, cn, c0 }
    }

    /// Integer-coefficient shorthand.
    pub fn ints(cp: i64, ck: i64, cn: i64, c0: i64) -> Self {
        AffineExponent::new(rat(cp), rat(ck), rat(cn), rat(c0))
    }

    pub fn zero() -> Self {
        AffineExponent::default()
    }

    pub fn constant(c: Rat) -> Self {
        AffineExponent {
            c0: c,
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cp.is_zero() && self.ck.is_zero() && self.cn.is_zero() && self.c0.is_zero()
    }

    pub fn as_constant(&self) -> Option<&Rat> {
        (self.cp.is_zero() && self.ck.is_zero() && self.cn.is_zero()).then_some(&self.c0)
    }

    pub fn coeff(&self, param: &str) -> &Rat {
        match param {
            "p" => &self.cp,
            "k" => &self.ck,
            "n" => &self.cn,
            _ => &self.c0,
        }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        AffineExponent::new(&self.cp * s, &self.ck * s, &self.cn * s, &self.c0 * s)
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::constant(self.c0.clone());
        for (name, c) in [("p", &self.cp), ("k", &self.ck), ("n", &self.cn)] {
            if !c.is_zero() {
                p = &p + &Poly::var(name).scale(c);
            }
        }
        p
    }

    /// Reads an affine polynomial in p, k, n.
    pub fn from_poly(p: &Poly) -> Option<Self> {
        let (c0, lin) = p.as_linear()?;
        let mut out = AffineExponent::constant(c0);
        for (v, c) in lin {
            match v.as_str() {
                "p" => out.cp = c,
                "k" => out.ck = c,
                "n" => out.cn = c,
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn from_frac(f: &CoeffFrac) -> Option<Self> {
        AffineExponent::from_poly(f.as_poly()?)
    }

    /// Replaces one of p, k, n by another affine exponent.
    pub fn substitute(&self, param: &str, value: &AffineExponent) -> Self {
        let c = self.coeff(param).clone();
        if c.is_zero() || !EXPONENT_PARAMS.contains(&param) {
            return self.clone();
        }
        let mut base = self.clone();
        match param {
            "p" => base.cp = Rat::zero(),
            "k" => base.ck = Rat::zero(),
            _ => base.cn = Rat::zero(),
        }
        &base + &value.scale(&c)
    }

    pub fn eval(&self, p: f64, k: f64, n: f64) -> f64 {
        use num_traits::ToPrimitive;
        let f = |r: &Rat| r.to_f64().unwrap_or(f64::NAN);
        f(&self.cp) * p + f(&self.ck) * k + f(&self.cn) * n + f(&self.c0)
    }
}

impl Add<&AffineExponent> for &AffineExponent {
    type Output = AffineExponent;
    fn add(self, o: &AffineExponent) -> AffineExponent {
        AffineExponent::new(
            &self.cp + &o.cp,
            &self.ck + &o.ck,
            &self.cn + &o.cn,
            &self.c0 + &o.c0,
        )
    }
}

impl Sub<&AffineExponent> for &AffineExponent {
    type Output = AffineExponent;
    fn sub(self, o: &AffineExponent) -> AffineExponent {
        self + &(-o)
    }
}

impl Neg for &AffineExponent {
    type Output = AffineExponent;
    fn neg(self) -> AffineExponent {
        self.scale(&rat(-1))
    }
}

impl fmt::Display for AffineExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (name, c) in [("p", &self.cp), ("k", &self.ck), ("n", &self.cn)] {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = if mag.is_one() {
                name.to_string()
            } else {
                format!("{}*{name}", fmt_rat(&mag))
            };
            parts.push((c.is_negative(), body));
        }
        if !self.c0.is_zero() || parts.is_empty() {
            parts.push((self.c0.is_negative(), fmt_rat(&self.c0.abs())));
        }
        for (i, (neg, body)) in parts.iter().enumerate() {
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

/// An unknown function, possibly differentiated, raised to a nonzero power.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnAtom {
    pub name: String,
    pub dt: u32,
    pub dx: u32,
    pub dv: u32,
    pub power: i32,
    pub deps: Deps,
}

impl FnAtom {
    pub fn new(name: &str, deps: Deps) -> Self {
        FnAtom {
            name: name.to_string(),
            dt: 0,
            dx: 0,
            dv: 0,
            power: 1,
            deps,
        }
    }

    pub fn derived(&self, dt: u32, dx: u32, dv: u32) -> Self {
        FnAtom {
            dt: self.dt + dt,
            dx: self.dx + dx,
            dv: self.dv + dv,
            power: 1,
            ..self.clone()
        }
    }

    pub fn is_derived(&self) -> bool {
        self.dt + self.dx + self.dv > 0
    }

    /// Same function and derivative indices, ignoring the power.
    pub fn same_base(&self, other: &FnAtom) -> bool {
        self.name == other.name && self.dt == other.dt && self.dx == other.dx && self.dv == other.dv
    }

    /// Whether this atom is a derivative of `pattern` (or equal to it).
    pub fn derivative_excess(&self, pattern: &FnAtom) -> Option<(u32, u32, u32)> {
        (self.name == pattern.name
            && self.dt >= pattern.dt
            && self.dx >= pattern.dx
            && self.dv >= pattern.dv)
            .then(|| {
                (
                    self.dt - pattern.dt,
                    self.dx - pattern.dx,
                    self.dv - pattern.dv,
                )
            })
    }

    pub fn base_name(&self) -> String {
        let mut s = self.name.clone();
        if self.is_derived() {
            s.push('_');
            s.push_str(&"t".repeat(self.dt as usize));
            s.push_str(&"x".repeat(self.dx as usize));
            s.push_str(&"V".repeat(self.dv as usize));
        }
        s
    }
}

impl fmt::Display for FnAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base_name())?;
        match self.power {
            1 => Ok(()),
            p if p < 0 => write!(f, "^({p})"),
            p => write!(f, "^{p}"),
        }
    }
}

/// Atom part of a term; canonical terms never share a signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature {
    pub vpow: AffineExponent,
    pub exp: AffineExponent,
    pub fns: Vec<FnAtom>,
}

impl Signature {
    pub fn is_scalar(&self) -> bool {
        self.vpow.is_zero() && self.exp.is_zero() && self.fns.is_empty()
    }

    pub fn mul(&self, other: &Signature) -> Signature {
        Signature {
            vpow: &self.vpow + &other.vpow,
            exp: &self.exp + &other.exp,
            fns: merge_fns(&self.fns, &other.fns),
        }
    }

    fn inverse(&self) -> Result<Signature> {
        let mut fns = Vec::with_capacity(self.fns.len());
        for a in &self.fns {
            if a.is_derived() {
                return Err(Error::NegativeDerivedPower(a.base_name()));
            }
            fns.push(FnAtom {
                power: -a.power,
                ..a.clone()
            });
        }
        Ok(Signature {
            vpow: -&self.vpow,
            exp: -&self.exp,
            fns,
        })
    }
}

pub(crate) fn merge_fns(a: &[FnAtom], b: &[FnAtom]) -> Vec<FnAtom> {
    let mut out: Vec<FnAtom> = a.to_vec();
    for atom in b {
        if let Some(existing) = out.iter_mut().find(|x| x.same_base(atom)) {
            existing.power += atom.power;
        } else {
            out.push(atom.clone());
        }
    }
    out.retain(|x| x.power != 0);
    out.sort();
    out
}

/// A single term in expanded form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: CoeffFrac,
    pub vpow: AffineExponent,
    pub exp: AffineExponent,
    pub fns: Vec<FnAtom>,
}

impl Term {
    pub fn signature(&self) -> Signature {
        Signature {
            vpow: self.vpow.clone(),
            exp: self.exp.clone(),
            fns: self.fns.clone(),
        }
    }
}

/// Canonical expression: a map from signature to nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    terms: BTreeMap<Signature, CoeffFrac>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::coeff(CoeffFrac::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::coeff(CoeffFrac::int(n))
    }

    pub fn rational(r: Rat) -> Self {
        Expr::coeff(CoeffFrac::rational(r))
    }

    pub fn coeff(c: CoeffFrac) -> Self {
        Expr::from_parts(c, Signature::default())
    }

    /// A parameter symbol or one of `t`, `x`.
    pub fn symbol(name: &str) -> Self {
        Expr::coeff(CoeffFrac::var(name))
    }

    pub fn v() -> Self {
        Expr::v_pow(AffineExponent::ints(0, 0, 0, 1))
    }

    pub fn v_pow(e: AffineExponent) -> Self {
        Expr::from_parts(
            CoeffFrac::one(),
            Signature {
                vpow: e,
                ..Default::default()
            },
        )
    }

    pub fn exp_atom(c: AffineExponent) -> Self {
        Expr::from_parts(
            CoeffFrac::one(),
            Signature {
                exp: c,
                ..Default::default()
            },
        )
    }

    pub fn atom(a: FnAtom) -> Self {
        Expr::from_parts(
            CoeffFrac::one(),
            Signature {
                fns: vec![a],
                ..Default::default()
            },
        )
    }

    /// Named function atom looked up in the default symbol table.
    pub fn func(name: &str) -> Self {
        let deps = Symbols::default_table()
            .function_deps(name)
            .unwrap_or_else(|| panic!("unknown function {name}"));
        Expr::atom(FnAtom::new(name, deps))
    }

    pub fn from_parts(c: CoeffFrac, sig: Signature) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(sig, c);
        }
        Expr { terms }
    }

    pub fn from_term(t: Term) -> Self {
        let sig = t.signature();
        Expr::from_parts(t.coeff, sig)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (descending) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Signature, &CoeffFrac)> {
        self.terms.iter().rev()
    }

    pub fn term_list(&self) -> Vec<Term> {
        self.terms()
            .map(|(s, c)| Term {
                coeff: c.clone(),
                vpow: s.vpow.clone(),
                exp: s.exp.clone(),
                fns: s.fns.clone(),
            })
            .collect()
    }

    pub fn coefficient_of(&self, sig: &Signature) -> Option<&CoeffFrac> {
        self.terms.get(sig)
    }

    pub fn leading(&self) -> Option<(&Signature, &CoeffFrac)> {
        self.terms.iter().next_back()
    }

    /// The coefficient, when the expression has no atoms.
    pub fn as_coeff(&self) -> Option<CoeffFrac> {
        match self.terms.len() {
            0 => Some(CoeffFrac::zero()),
            1 => self.terms.get(&Signature::default()).cloned(),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rat> {
        self.as_coeff()?.as_rational()
    }

    pub(crate) fn add_term(&mut self, sig: Signature, c: CoeffFrac) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(sig) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &CoeffFrac) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect(),
        }
    }

    pub fn mul_sig(&self, c: &CoeffFrac, sig: &Signature) -> Expr {
        let mut out = Expr::zero();
        for (s, v) in &self.terms {
            out.add_term(s.mul(sig), v * c);
        }
        out
    }

    /// Inverse of a single term whose function atoms are underived.
    pub fn inv(&self) -> Result<Expr> {
        if self.terms.len() != 1 {
            return Err(Error::NotInvertible(self.to_string()));
        }
        let (sig, c) = self.terms.iter().next().unwrap();
        let isig = sig.inverse()?;
        Ok(Expr::from_parts(c.inv()?, isig))
    }

    pub fn pow(&self, n: i32) -> Result<Expr> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut out = Expr::one();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    pub fn checked_div(&self, d: &Expr) -> Result<Expr> {
        Ok(self * &d.inv()?)
    }

    /// Names of all function atoms present.
    pub fn fn_names(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|s| s.fns.iter().map(|a| a.name.clone()))
            .collect()
    }

    pub fn contains_fn(&self, name: &str) -> bool {
        self.terms
            .keys()
            .any(|s| s.fns.iter().any(|a| a.name == name))
    }

    pub fn contains_atom(&self, atom: &FnAtom) -> bool {
        self.terms
            .keys()
            .any(|s| s.fns.iter().any(|a| a.same_base(atom)))
    }

    /// True when no term carries a V-power, an exponential or a V-dependent function.
    pub fn is_v_free(&self) -> bool {
        self.terms
            .keys()
            .all(|s| s.vpow.is_zero() && s.exp.is_zero() && s.fns.iter().all(|a| !a.deps.v))
    }

    pub fn contains_coeff_var(&self, var: &str) -> bool {
        self.terms.values().any(|c| c.contains_var(var))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&CoeffFrac) -> Result<CoeffFrac>) -> Result<Expr> {
        let mut out = Expr::zero();
        for (s, c) in &self.terms {
            out.add_term(s.clone(), f(c)?);
        }
        Ok(out)
    }
}

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (s, c) in &small.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), -c);
        }
        out
    }
}

impl Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &rhs.terms {
                out.add_term(sa.mul(sb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), -c)).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { (&self).$m(&rhs) }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { (&self).$m(rhs) }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { self.$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}
