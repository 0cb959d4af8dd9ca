//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' ('-')? primary)?
//! primary := number | ident | 'exp' '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{AffineExponent, Expr, FnAtom, Signature, Symbols};
use crate::error::{Error, Result};
use crate::frac::CoeffFrac;
use crate::poly::Rat;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let int: BigInt = src[start..i].parse().unwrap();
            let mut value = Rat::from_integer(int);
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if fs == i {
                    return Err(Error::Syntax {
                        pos: i,
                        msg: "expected digits after '.'".into(),
                    });
                }
                let frac: BigInt = src[fs..i].parse().unwrap();
                let scale = num_traits::pow(BigInt::from(10), i - fs);
                value += Rat::new(frac, scale);
            }
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    symbols: &'a Symbols,
}

/// Parses with the default symbol table.
pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, Symbols::default_table())
}

pub fn parse_with(text: &str, symbols: &Symbols) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        symbols,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.err(format!("unexpected token {t:?}"))),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn at(&self) -> usize {
        self.toks[self.pos].0
    }

    fn err(&self, msg: String) -> Error {
        Error::Syntax {
            pos: self.at(),
            msg,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if *self.peek() == Tok::Op('/') {
                let pos = self.at();
                self.bump();
                let d = self.unary()?;
                acc = acc.checked_div(&d).map_err(|e| match e {
                    Error::NotInvertible(s) => Error::Syntax {
                        pos,
                        msg: format!("cannot divide by {s}"),
                    },
                    other => other,
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(-&self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.at();
        let neg = self.eat('-');
        let mut ex = self.primary()?;
        if neg {
            ex = -&ex;
        }
        raise(&base, &ex).map_err(|e| match e {
            Error::NonAffineExponent(m) | Error::Invalid(m) => Error::Syntax { pos, msg: m },
            other => other,
        })
    }

    fn primary(&mut self) -> Result<Expr> {
        let start = self.at();
        match self.bump() {
            Tok::Num(r) => Ok(Expr::rational(r)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(&name, start),
            t => Err(Error::Syntax {
                pos: start,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn ident(&mut self, name: &str, start: usize) -> Result<Expr> {
        if name == "exp" && *self.peek() == Tok::Op('(') {
            self.bump();
            let arg = self.expr()?;
            self.expect(')')?;
            return exp_of(&arg).map_err(|m| Error::Syntax { pos: start, msg: m });
        }
        if name == "V" {
            return Ok(Expr::v());
        }
        if name == "t" || name == "x" || self.symbols.is_param(name) {
            return Ok(Expr::symbol(name));
        }
        let (base, suffix) = match name.find('_') {
            Some(i) => (&name[..i], Some(&name[i + 1..])),
            None => (name, None),
        };
        let deps = self
            .symbols
            .function_deps(base)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let mut atom = FnAtom::new(base, deps);
        if let Some(s) = suffix {
            if s.is_empty() {
                return Err(Error::UnknownSymbol(name.to_string()));
            }
            for ch in s.chars() {
                match ch {
                    't' if deps.t => atom.dt += 1,
                    'x' if deps.x => atom.dx += 1,
                    'V' if deps.v => atom.dv += 1,
                    't' | 'x' | 'V' => return Ok(Expr::zero()),
                    _ => return Err(Error::UnknownSymbol(name.to_string())),
                }
            }
        }
        Ok(Expr::atom(atom))
    }
}

/// `exp(c*V)` with `c` affine in p, k, n.
fn exp_of(arg: &Expr) -> std::result::Result<Expr, String> {
    let unit = AffineExponent::ints(0, 0, 0, 1);
    let mut c = CoeffFrac::zero();
    for (sig, coeff) in arg.terms() {
        if sig.vpow != unit || !sig.exp.is_zero() || !sig.fns.is_empty() {
            return Err(format!("exp argument must be (affine)*V, got {arg}"));
        }
        c = &c + coeff;
    }
    let aff = AffineExponent::from_frac(&c)
        .ok_or_else(|| format!("exp coefficient {c} is not affine"))?;
    Ok(Expr::exp_atom(aff))
}

pub(crate) fn raise(base: &Expr, ex: &Expr) -> Result<Expr> {
    let c = ex
        .as_coeff()
        .ok_or_else(|| Error::Invalid(format!("exponent {ex} must be free of V and functions")))?;
    if let Some(r) = c.as_rational() {
        if r.is_integer() {
            let n: i32 = r
                .numer()
                .try_into()
                .map_err(|_| Error::Invalid(format!("exponent {r} too large")))?;
            return base.pow(n);
        }
    }
    let aff =
        AffineExponent::from_frac(&c).ok_or_else(|| Error::NonAffineExponent(c.to_string()))?;
    // Symbolic or fractional powers are only defined on pure powers of V.
    let pure = base.terms().next().and_then(|(sig, coeff)| {
        (base.len() == 1 && coeff.is_one() && sig.exp.is_zero() && sig.fns.is_empty())
            .then(|| sig.vpow.as_constant().cloned())
            .flatten()
    });
    match pure {
        Some(w) if !w.is_zero() => Ok(Expr::from_parts(
            CoeffFrac::one(),
            Signature {
                vpow: aff.scale(&w),
                ..Default::default()
            },
        )),
        _ if base.as_rational().map(|r| r.is_one()).unwrap_or(false) => Ok(Expr::one()),
        _ => Err(Error::Invalid(format!(
            "symbolic exponent {aff} applies only to powers of V, not {base}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_power_with_affine_exponent() {
        let e = parse("V^(2*p+3)").unwrap();
        let (sig, c) = e.terms().next().unwrap();
        assert_eq!(e.len(), 1);
        assert!(c.is_one());
        assert_eq!(sig.vpow, AffineExponent::ints(2, 0, 0, 3));
    }

    #[test]
    fn like_terms_merge() {
        let e = parse("a_t * V^p + a_t * V^p").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.terms().next().unwrap().1, &CoeffFrac::int(2));
    }

    #[test]
    fn exp_atom() {
        let e = parse("exp((n+1)*V)").unwrap();
        let (sig, _) = e.terms().next().unwrap();
        assert_eq!(sig.exp, AffineExponent::ints(0, 0, 1, 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("V^(2*p+"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("zeta + 1"), Err(Error::UnknownSymbol(_))));
        assert!(matches!(
            parse("f_x^(-1)"),
            Err(Error::NegativeDerivedPower(_))
        ));
        assert!(matches!(parse("1/(a + f)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("V^(p*k)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn decimal_literal_is_exact() {
        assert_eq!(parse("0.1").unwrap(), parse("1/10").unwrap());
    }

    #[test]
    fn derivative_of_independent_variable_vanishes() {
        // alpha depends on t only
        assert!(parse("alpha_x").unwrap().is_zero());
    }
}
