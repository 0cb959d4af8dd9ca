//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are plain names (`t`, `x`, and the parameter symbols). Monomials
//! are ordered lexicographically with variables compared by name, which gives
//! every nonzero polynomial a well-defined leading term. GCDs are computed by
//! the recursive primitive polynomial remainder sequence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Product of variables raised to positive powers, sorted by variable name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(name.to_string(), exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn degree(&self, var: &str) -> u32 {
        self.0
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(String, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when every exponent of `other` is dominated.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *v {
                let oe = other.0[j].1;
                j += 1;
                match e.cmp(&oe) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v.clone(), e - oe)),
                }
            } else {
                out.push((v.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Splits off the power of `var`.
    fn without(&self, var: &str) -> (u32, Monomial) {
        let mut rest = self.0.clone();
        let mut exp = 0;
        rest.retain(|(v, e)| {
            if v == var {
                exp = *e;
                false
            } else {
                true
            }
        });
        (exp, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Lexicographic order, variables compared by name.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    v.clone()
                } else {
                    format!("{v}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms.iter().rev().cmp(other.terms.iter().rev())
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn var(name: &str) -> Self {
        Poly::monomial(Rat::one(), Monomial::var(name, 1))
    }

    pub fn monomial(c: Rat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.terms.keys().any(|m| m.degree(var) > 0)
    }

    pub fn degree(&self, var: &str) -> u32 {
        self.terms.keys().map(|m| m.degree(var)).max().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rat, mono: &Monomial) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.mul(mono), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Leading coefficient made one; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn derivative(&self, var: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.without(var);
            if e == 0 {
                continue;
            }
            let nm = rest.mul(&Monomial::var(var, e - 1));
            out.add_term(nm, c * rat(e as i64));
        }
        out
    }

    /// Coefficients of the univariate view in `var`, indexed by degree.
    pub fn coeffs_in(&self, var: &str) -> Vec<Poly> {
        let deg = self.degree(var) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.without(var);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    fn coeff_at(&self, var: &str, deg: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.without(var);
            if e == deg {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(dm)?;
            let qc = rc / dc;
            rem = &rem - &d.mul_monomial(&qc, &qm);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        if a == b {
            return a.monic();
        }
        let mut vars = a.vars();
        vars.extend(b.vars());
        let var = vars.into_iter().next_back().unwrap();
        let (da, db) = (a.degree(&var), b.degree(&var));
        if da == 0 {
            return Poly::gcd(a, &b.content(&var));
        }
        if db == 0 {
            return Poly::gcd(&a.content(&var), b);
        }
        let (ca, cb) = (a.content(&var), b.content(&var));
        let c = Poly::gcd(&ca, &cb);
        let pa = a.exact_div(&ca).expect("content divides");
        let pb = b.exact_div(&cb).expect("content divides");
        let (mut r0, mut r1) = if da >= db { (pa, pb) } else { (pb, pa) };
        while !r1.is_zero() {
            if r1.degree(&var) == 0 {
                r0 = Poly::one();
                break;
            }
            let r = r0.prem(&r1, &var);
            r0 = r1;
            r1 = if r.is_zero() { r } else { r.primitive(&var) };
        }
        let g = if r0.degree(&var) == 0 {
            Poly::one()
        } else {
            r0.primitive(&var)
        };
        (&c * &g).monic()
    }

    /// GCD of the coefficients in `var`.
    pub fn content(&self, var: &str) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(var).iter().rev() {
            if c.is_zero() {
                continue;
            }
            g = Poly::gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive(&self, var: &str) -> Poly {
        let c = self.content(var);
        self.exact_div(&c).expect("content divides")
    }

    /// Pseudo-remainder with respect to `var`.
    fn prem(&self, b: &Poly, var: &str) -> Poly {
        let n = b.degree(var);
        let lc = b.coeff_at(var, n);
        let mut r = self.clone();
        while !r.is_zero() && r.degree(var) >= n {
            let d = r.degree(var);
            let lr = r.coeff_at(var, d);
            let shift = Poly::monomial(Rat::one(), Monomial::var(var, d - n));
            r = &(&lc * &r) - &(&(&lr * &shift) * b);
        }
        r
    }

    /// Evaluates with the supplied variable values.
    pub fn eval_f64(
        &self,
        value: &dyn Fn(&str) -> Option<f64>,
    ) -> std::result::Result<f64, String> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (v, e) in &m.0 {
                let x = value(v).ok_or_else(|| v.clone())?;
                t *= x.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Affine view `c0 + sum ci * vi`, if the polynomial has total degree at most one.
    pub fn as_linear(&self) -> Option<(Rat, BTreeMap<String, Rat>)> {
        let mut c0 = Rat::zero();
        let mut lin = BTreeMap::new();
        for (m, c) in &self.terms {
            match m.0.as_slice() {
                [] => c0 = c.clone(),
                [(v, 1)] => {
                    lin.insert(v.clone(), c.clone());
                }
                _ => return None,
            }
        }
        Some((c0, lin))
    }

    pub(crate) fn needs_parens_in_product(&self) -> bool {
        self.terms.len() > 1
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", fmt_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rat(&mag))?;
            }
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                let f: fn(&Poly, &Poly) -> Poly = $body;
                f(self, rhs)
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, |a, b| {
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), c.clone());
    }
    out
});

poly_binop!(Sub, sub, |a, b| {
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), -c.clone());
    }
    out
});

poly_binop!(Mul, mul, |a, b| {
    let mut out = Poly::zero();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            out.add_term(ma.mul(mb), ca * cb);
        }
    }
    out
});

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&rat(-1))
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(n)
    }

    #[test]
    fn lex_order_leading_term() {
        let p = &(&v("k") * &v("k")) + &v("p");
        let (m, _) = p.leading().unwrap();
        assert_eq!(m.to_string(), "k^2");
    }

    #[test]
    fn exact_division_and_failure() {
        let a = &v("p") + &Poly::int(2);
        let b = &v("p") + &Poly::int(3);
        let ab = &a * &b;
        assert_eq!(ab.exact_div(&a).unwrap(), b);
        assert!(a.exact_div(&b).is_none());
    }

    #[test]
    fn gcd_of_products() {
        let a = &v("p") + &Poly::int(2);
        let b = &(&v("k") * &v("t")) + &v("A1");
        let c = &v("k") - &Poly::int(1);
        let g = Poly::gcd(&(&a * &b), &(&b * &c));
        assert_eq!(g, b.monic());
        assert!(Poly::gcd(&a, &c).is_one());
    }

    #[test]
    fn derivative_lowers_degree() {
        let p = (&v("t") * &v("t")).scale(&rat(3));
        assert_eq!(p.derivative("t"), v("t").scale(&rat(6)));
        assert!(p.derivative("x").is_zero());
    }

    #[test]
    fn display_signs() {
        let p = &(&v("k").scale(&rat(2)) * &v("t")) - &Poly::constant(ratio(1, 2));
        assert_eq!(p.to_string(), "2*k*t - 1/2");
    }
}
