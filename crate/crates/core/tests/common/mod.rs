//! Random expression generators shared by the property and acceptance suites.
#![allow(dead_code)]

use proptest::prelude::*;
use rdc_symmetry::{parse, AffineExponent, CoeffFrac, Expr};

const SYMBOLS: [&str; 6] = ["1", "p", "k", "t", "x", "lambda"];
const ATOMS: [&str; 8] = ["1", "f", "g", "f_x", "eta_V", "xi_t", "F", "alpha"];

type TermSpec = (i64, usize, i64, i64, i64, usize, i32);

fn term(spec: &TermSpec, symbolic: bool) -> Expr {
    let &(c, sym, vp, vk, e, atom, pow) = spec;
    let mut out = &Expr::int(c) * &parse(SYMBOLS[sym]).unwrap();
    let vpow = if symbolic {
        AffineExponent::ints(vp, vk, 0, vp - vk)
    } else {
        AffineExponent::ints(0, 0, 0, 2 * vp + vk)
    };
    out = &out * &Expr::v_pow(vpow);
    if e != 0 {
        out = &out * &Expr::exp_atom(AffineExponent::ints(0, 0, 0, e));
    }
    let a = parse(ATOMS[atom]).unwrap();
    &out * &a.pow(pow).unwrap()
}

pub fn expr_strategy() -> impl Strategy<Value = Expr> {
    exprs(true)
}

/// Numeric exponents only, so grading keys never merge.
pub fn graded_strategy() -> impl Strategy<Value = Expr> {
    exprs(false)
}

fn exprs(symbolic: bool) -> impl Strategy<Value = Expr> {
    prop::collection::vec(
        (
            -5i64..=5,
            0usize..6,
            -2i64..=2,
            -1i64..=1,
            -2i64..=2,
            0usize..8,
            1i32..=2,
        ),
        0..5,
    )
    .prop_map(move |specs| {
        specs
            .iter()
            .fold(Expr::zero(), |acc, s| &acc + &term(s, symbolic))
    })
}

pub fn coeff_strategy() -> impl Strategy<Value = CoeffFrac> {
    (-6i64..=6, 0usize..6, -6i64..=6, 1i64..=4, 0usize..6).prop_map(|(a, s, b, d, s2)| {
        let num = parse(&format!("{a}*{} + {b}", SYMBOLS[s]))
            .unwrap()
            .as_coeff()
            .unwrap();
        let den = parse(&format!("{d} + {}", SYMBOLS[s2]))
            .unwrap()
            .as_coeff()
            .unwrap();
        match den.inv() {
            Ok(inv) => &num * &inv,
            Err(_) => num,
        }
    })
}
