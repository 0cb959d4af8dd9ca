use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{substitute, Bindings};
use crate::determining::{check_operator, normalize_operator, SymOperator};
use crate::error::{Error, Result};
use crate::expr::Expr;

use super::Instance;

/// Sampling box for `t`, `x` and `V`.
pub const SAMPLE_BOX: (f64, f64) = (0.1, 2.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

impl Point {
    pub fn new(t: f64, x: f64, v: f64) -> Self {
        Point { t, x, v }
    }
}

fn bind_functions(e: &Expr, inst: &Instance) -> Result<Expr> {
    if inst.functions.is_empty() {
        return Ok(e.clone());
    }
    let b = inst
        .functions
        .iter()
        .fold(Bindings::new(), |b, (name, v)| b.func(name, v.clone()));
    substitute(e, &b)
}

/// Evaluates an expression with no remaining function atoms.
pub(crate) fn eval_bound(e: &Expr, pt: Point, inst: &Instance) -> Result<f64> {
    let lookup = |name: &str| match name {
        "t" => Some(pt.t),
        "x" => Some(pt.x),
        _ => inst.params.get(name).copied(),
    };
    let (p, k, n) = (inst.param("p"), inst.param("k"), inst.param("n"));
    let mut acc = 0.0;
    for (sig, c) in e.terms() {
        if let Some(a) = sig.fns.first() {
            return Err(Error::UnboundFunction(a.base_name()));
        }
        let mut term = c.eval_f64(&lookup)?;
        if !sig.vpow.is_zero() {
            term *= pt.v.powf(sig.vpow.eval(p, k, n));
        }
        if !sig.exp.is_zero() {
            term *= (sig.exp.eval(p, k, n) * pt.v).exp();
        }
        acc += term;
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::NonFinite)
    }
}

/// Binds the instance's functions (derivatives symbolically), then
/// evaluates in floating point.
pub fn eval_expr(e: &Expr, pt: Point, inst: &Instance) -> Result<f64> {
    eval_bound(&bind_functions(e, inst)?, pt, inst)
}

/// Max absolute determining-equation residual of `op` over `n` seeded points
/// in the sampling box. Points hitting a pole are redrawn, up to `10 n`
/// draws in total.
pub fn sample_residuals(inst: &Instance, op: &SymOperator, n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Invalid("need at least one sample".into()));
    }
    let op = normalize_operator(op)?;
    let residuals: Vec<Expr> = check_operator(&inst.equation(), &op)?
        .iter()
        .map(|r| bind_functions(r, inst))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = SAMPLE_BOX;
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut last_pole = 0.0;
    for _ in 0..10 * n {
        if accepted == n {
            break;
        }
        let pt = Point::new(
            rng.gen_range(lo..=hi),
            rng.gen_range(lo..=hi),
            rng.gen_range(lo..=hi),
        );
        let vals: Result<Vec<f64>> = residuals.iter().map(|r| eval_bound(r, pt, inst)).collect();
        match vals {
            Ok(v) => {
                accepted += 1;
                worst = v.iter().fold(worst, |m, r| m.max(r.abs()));
            }
            Err(Error::Pole(d)) => last_pole = d,
            Err(e) => return Err(e),
        }
    }
    if accepted < n {
        return Err(Error::Pole(last_pole));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn cubic() -> Instance {
        Instance::power(0.0, 1.0, 1.0, parse("lambda1*V^(2*k+1)").unwrap())
            .unwrap()
            .with_param("lambda1", 2.0)
            .with_param("A1", 1.0)
            .with_param("A2", 0.0)
    }

    fn scaling() -> SymOperator {
        SymOperator::parse("2*k*t + A1", "k*x + A2", "-V").unwrap()
    }

    #[test]
    fn evaluates_affine_powers() {
        let inst = Instance::power(1.0, 2.0, 1.0, Expr::zero()).unwrap();
        let v = eval_expr(
            &parse("V^(2*p+3)").unwrap(),
            Point::new(0.0, 0.0, 2.0),
            &inst,
        )
        .unwrap();
        assert_eq!(v, 32.0);
    }

    #[test]
    fn normalized_xi_at_origin() {
        let op = normalize_operator(&scaling()).unwrap();
        let v = eval_expr(&op.xi, Point::new(0.0, 3.0, 1.0), &cubic()).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn unbound_and_pole() {
        let inst = cubic();
        let pt = Point::new(0.5, 0.5, 0.5);
        assert!(matches!(
            eval_expr(&parse("g_x").unwrap(), pt, &inst),
            Err(Error::UnboundFunction(_))
        ));
        assert!(matches!(
            eval_expr(&parse("1/(t - 1/2)").unwrap(), pt, &inst),
            Err(Error::Pole(_))
        ));
        let bound = inst.with_function("g", parse("x^2*t").unwrap());
        assert_eq!(eval_expr(&parse("g_x").unwrap(), pt, &bound).unwrap(), 0.5);
    }

    #[test]
    fn scaling_operator_residuals() {
        let inst = cubic();
        let r = sample_residuals(&inst, &scaling(), 1000, 1).unwrap();
        assert!(r < 1e-9, "{r}");
        assert_eq!(r, sample_residuals(&inst, &scaling(), 1000, 1).unwrap());
        let bad = {
            let n = normalize_operator(&scaling()).unwrap();
            SymOperator::new(n.tau, n.xi, &n.eta + &parse("1/10*V^2").unwrap())
        };
        assert!(sample_residuals(&inst, &bad, 1000, 1).unwrap() > 1e-3);
    }

    #[test]
    fn translation_is_exact() {
        let inst = Instance::power(0.0, 1.0, 1.0, Expr::zero()).unwrap();
        let op = SymOperator::parse("1", "1", "0").unwrap();
        assert_eq!(sample_residuals(&inst, &op, 200, 9).unwrap(), 0.0);
    }
}
