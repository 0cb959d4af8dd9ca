//! Rational functions in `t`, `x` and the parameter symbols.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Poly, Rat};

/// Reduced fraction of polynomials with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffFrac {
    num: Poly,
    den: Poly,
}

impl Default for CoeffFrac {
    fn default() -> Self {
        CoeffFrac::zero()
    }
}

impl CoeffFrac {
    pub fn zero() -> Self {
        CoeffFrac {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        CoeffFrac::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        CoeffFrac::from_poly(Poly::int(n))
    }

    pub fn rational(r: Rat) -> Self {
        CoeffFrac::from_poly(Poly::constant(r))
    }

    pub fn var(name: &str) -> Self {
        CoeffFrac::from_poly(Poly::var(name))
    }

    pub fn from_poly(p: Poly) -> Self {
        CoeffFrac {
            num: p,
            den: Poly::one(),
        }
    }

    /// Builds `num / den` in canonical form. Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return CoeffFrac::zero();
        }
        if den.is_constant() {
            let c = den.as_constant().unwrap();
            return CoeffFrac {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = Poly::gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        let lc = d.leading().map(|(_, c)| c.clone()).unwrap();
        if !lc.is_one() {
            let inv = lc.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        CoeffFrac { num: n, den: d }
    }

    pub fn try_new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DenominatorVanishes(num.to_string()));
        }
        Ok(CoeffFrac::new(num, den))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.num.contains_var(var) || self.den.contains_var(var)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotInvertible("0".into()));
        }
        Ok(CoeffFrac::new(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, n: i32) -> Result<Self> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let e = n.unsigned_abs();
        Ok(CoeffFrac {
            num: base.num.pow(e),
            den: base.den.pow(e),
        })
    }

    pub fn derivative(&self, var: &str) -> Self {
        let dn = self.num.derivative(var);
        let dd = self.den.derivative(var);
        if dd.is_zero() {
            return CoeffFrac::new(dn, self.den.clone());
        }
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        CoeffFrac::new(num, self.den.pow(2))
    }

    /// Replaces `var` by `value`; fails if the denominator vanishes.
    pub fn substitute(&self, var: &str, value: &CoeffFrac) -> Result<Self> {
        if !self.contains_var(var) {
            return Ok(self.clone());
        }
        let n = eval_poly_at(&self.num, var, value);
        let d = eval_poly_at(&self.den, var, value);
        if d.is_zero() {
            return Err(Error::DenominatorVanishes(format!("{var} = {value}")));
        }
        Ok(&n / &d)
    }

    pub fn eval_f64(&self, value: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let n = self.num.eval_f64(value).map_err(Error::UnknownSymbol)?;
        let d = self.den.eval_f64(value).map_err(Error::UnknownSymbol)?;
        if d.abs() < 1e-300 {
            return Err(Error::Pole(d));
        }
        Ok(n / d)
    }
}

fn eval_poly_at(p: &Poly, var: &str, value: &CoeffFrac) -> CoeffFrac {
    let coeffs = p.coeffs_in(var);
    let mut acc = CoeffFrac::zero();
    for c in coeffs.into_iter().rev() {
        acc = &(&acc * value) + &CoeffFrac::from_poly(c);
    }
    acc
}

impl fmt::Display for CoeffFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Add<&CoeffFrac> for &CoeffFrac {
    type Output = CoeffFrac;
    fn add(self, rhs: &CoeffFrac) -> CoeffFrac {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return CoeffFrac::new(&self.num + &rhs.num, self.den.clone());
        }
        CoeffFrac::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub<&CoeffFrac> for &CoeffFrac {
    type Output = CoeffFrac;
    fn sub(self, rhs: &CoeffFrac) -> CoeffFrac {
        self + &(-rhs)
    }
}

impl Mul<&CoeffFrac> for &CoeffFrac {
    type Output = CoeffFrac;
    fn mul(self, rhs: &CoeffFrac) -> CoeffFrac {
        if self.is_zero() || rhs.is_zero() {
            return CoeffFrac::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return CoeffFrac::from_poly(&self.num * &rhs.num);
        }
        CoeffFrac::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div<&CoeffFrac> for &CoeffFrac {
    type Output = CoeffFrac;
    /// Panics when `rhs` is zero; use [`CoeffFrac::inv`] for a checked inverse.
    fn div(self, rhs: &CoeffFrac) -> CoeffFrac {
        self * &rhs.inv().expect("division by zero fraction")
    }
}

impl Neg for &CoeffFrac {
    type Output = CoeffFrac;
    fn neg(self) -> CoeffFrac {
        CoeffFrac {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl From<Rat> for CoeffFrac {
    fn from(r: Rat) -> Self {
        CoeffFrac::rational(r)
    }
}

impl Zero for CoeffFrac {
    fn zero() -> Self {
        CoeffFrac::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl Add for CoeffFrac {
    type Output = CoeffFrac;
    fn add(self, rhs: CoeffFrac) -> CoeffFrac {
        &self + &rhs
    }
}
