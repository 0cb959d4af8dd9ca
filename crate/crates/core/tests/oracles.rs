use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdc_symmetry::calculus::{substitute, Bindings};
use rdc_symmetry::classify::residual_check_candidate;
use rdc_symmetry::fixtures::load;
use rdc_symmetry::numeric::{eval_expr, Instance, Point};
use rdc_symmetry::poly::ratio;
use rdc_symmetry::{parse, Expr};

#[test]
fn source_prints_and_reparses() {
    let src = load("case_b").unwrap().expr("source").unwrap();
    let text = src.to_string();
    assert_eq!(parse(&text).unwrap(), src);
}

/// Closed interval widened by one ulp on each side after every operation.
#[derive(Clone, Copy, Debug)]
struct Iv(f64, f64);

impl Iv {
    fn point(x: f64) -> Iv {
        Iv(x.next_down(), x.next_up())
    }

    fn add(self, o: Iv) -> Iv {
        Iv((self.0 + o.0).next_down(), (self.1 + o.1).next_up())
    }

    fn mul(self, o: Iv) -> Iv {
        let c = [self.0 * o.0, self.0 * o.1, self.1 * o.0, self.1 * o.1];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Iv(lo.next_down(), hi.next_up())
    }

    /// `v^a` for `v > 0`, with a few ulps of slack for `powf`.
    fn pow(v: f64, a: f64) -> Iv {
        let y = v.powf(a);
        let slack = 4.0 * f64::EPSILON * y.abs();
        Iv(y - slack, y + slack)
    }

    fn contains(self, x: f64) -> bool {
        self.0 <= x && x <= self.1
    }
}

#[test]
fn constant_function_source_matches_interval_evaluation() {
    let src = load("case_b").unwrap().expr("source").unwrap();
    let consts = [("a", "13/10"), ("f", "7/10"), ("g", "-2/5"), ("h", "9/10")];
    let fb = consts
        .iter()
        .fold(Bindings::new(), |b, (n, v)| b.func(n, parse(v).unwrap()));
    let (p, k, lambda) = (ratio(1, 2), ratio(3, 2), ratio(2, 1));
    let exact = substitute(
        &substitute(&src, &fb).unwrap(),
        &Bindings::new()
            .param_rat("p", p.clone())
            .param_rat("k", k.clone())
            .param_rat("lambda", lambda.clone()),
    )
    .unwrap();
    assert!(!exact.is_zero());

    let inst = Instance::power(0.5, 1.5, 2.0, Expr::zero())
        .unwrap()
        .with_function("a", parse("13/10").unwrap())
        .with_function("f", parse("7/10").unwrap())
        .with_function("g", parse("-2/5").unwrap())
        .with_function("h", parse("9/10").unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let pt = Point::new(
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
        );
        let got = eval_expr(&src, pt, &inst).unwrap();
        let mut acc = Iv(0.0, 0.0);
        for (sig, c) in exact.terms() {
            assert!(sig.fns.is_empty());
            let c = c.as_rational().unwrap().to_f64().unwrap();
            let a = sig.vpow.as_constant().unwrap().to_f64().unwrap();
            acc = acc.add(Iv::point(c).mul(Iv::pow(pt.v, a)));
        }
        // Both sides round independently; allow the interval a relative margin.
        let margin = 1e-12 * acc.1.abs().max(acc.0.abs()).max(1.0);
        let widened = Iv(acc.0 - margin, acc.1 + margin);
        assert!(widened.contains(got), "{got} not in {acc:?}");
    }
}

#[test]
fn random_candidates_leave_a_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lam = Bindings::new()
        .param_int("lambda", 1)
        .param_int("lambda0", 1)
        .param_int("lambda1", -1)
        .param_int("lambda2", 2)
        .param_int("lambda3", 1);
    let poly = |rng: &mut ChaCha8Rng| {
        let c: Vec<i64> = (0..4).map(|_| rng.gen_range(-3..=3)).collect();
        parse(&format!(
            "{} + {}*t + {}*x + {}*t*x^2",
            c[0],
            c[1],
            c[2],
            c[3] + 4
        ))
        .unwrap()
    };
    for _ in 0..20 {
        let (f, g, h) = (poly(&mut rng), poly(&mut rng), poly(&mut rng));
        let r = residual_check_candidate(&f, &g, &h, &lam).unwrap();
        assert!(r.iter().any(|e| !e.is_zero()), "{f}, {g}, {h}");
    }
}
