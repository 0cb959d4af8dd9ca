use crate::error::{Error, Result};
use crate::expr::Expr;

use super::eval::eval_bound;
use super::{Field, Grid, Instance, Point};

const BLOW_UP: f64 = 1e6;
const CFL: f64 = 0.4;

/// `sum c V^a exp(b V)` with numeric coefficients, for fast evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Compiled {
    terms: Vec<(f64, f64, f64)>,
}

impl Compiled {
    pub fn new(e: &Expr, inst: &Instance) -> Result<Self> {
        let (p, k, n) = (inst.param("p"), inst.param("k"), inst.param("n"));
        let mut terms = Vec::new();
        for (sig, c) in e.terms() {
            if let Some(a) = sig.fns.first() {
                return Err(Error::UnboundFunction(a.base_name()));
            }
            if c.contains_var("t") || c.contains_var("x") {
                return Err(Error::Invalid(format!("{e} depends on t or x")));
            }
            let coeff = eval_bound(&Expr::coeff(c.clone()), Point::new(0.0, 0.0, 1.0), inst)?;
            terms.push((coeff, sig.vpow.eval(p, k, n), sig.exp.eval(p, k, n)));
        }
        Ok(Compiled { terms })
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, a, b)| {
                let mut t = c;
                if a != 0.0 {
                    t *= v.powf(a);
                }
                if b != 0.0 {
                    t *= (b * v).exp();
                }
                t
            })
            .sum()
    }

    /// True when some power of V is negative or fractional.
    pub fn needs_positive(&self) -> bool {
        self.terms
            .iter()
            .any(|&(_, a, _)| a < 0.0 || a.fract() != 0.0)
    }
}

/// Boundary values at the two ends of the x interval.
pub enum Boundary<'a> {
    /// Values of the initial row's end points, held fixed.
    Held,
    /// Values taken from `f(t, x)`.
    Exact(&'a dyn Fn(f64, f64) -> f64),
}

struct Rhs {
    f0: Compiled,
    f1: Compiled,
    f2: Compiled,
    positive: bool,
}

impl Rhs {
    fn new(inst: &Instance) -> Result<Self> {
        let eq = inst.equation();
        let f0 = Compiled::new(&eq.f0, inst)?;
        let f1 = Compiled::new(&eq.f1, inst)?;
        let f2 = Compiled::new(&eq.f2, inst)?;
        let positive = f0.needs_positive() || f1.needs_positive() || f2.needs_positive();
        Ok(Rhs {
            f0,
            f1,
            f2,
            positive,
        })
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        for &v in u {
            if !v.is_finite() || v.abs() > BLOW_UP {
                return Err(Error::Unstable(BLOW_UP));
            }
            if self.positive && v <= 0.0 {
                return Err(Error::Positivity(v));
            }
        }
        Ok(())
    }

    /// `V_t = (V_xx - f1 V_x - f2) / f0` at interior points.
    fn eval(&self, u: &[f64], dx: f64, out: &mut [f64]) {
        let n = u.len();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for j in 1..n - 1 {
            let v = u[j];
            let uxx = (u[j + 1] - 2.0 * v + u[j - 1]) / (dx * dx);
            let ux = (u[j + 1] - u[j - 1]) / (2.0 * dx);
            out[j] = (uxx - self.f1.eval(v) * ux - self.f2.eval(v)) / self.f0.eval(v);
        }
    }
}

fn set_ends(u: &mut [f64], t: f64, grid: &Grid, bc: &Boundary, held: (f64, f64)) {
    let n = u.len();
    match bc {
        Boundary::Held => {
            u[0] = held.0;
            u[n - 1] = held.1;
        }
        Boundary::Exact(f) => {
            u[0] = f(t, grid.x0);
            u[n - 1] = f(t, grid.x_end());
        }
    }
}

/// Method of lines from the first row of `initial`: central differences in
/// x, classical RK4 in t. Each output step of `initial.grid.dt` is split into
/// substeps obeying `h <= 0.4 dx^2 min f0(V)`.
pub fn solve_pde(inst: &Instance, initial: &Field, steps: usize, bc: &Boundary) -> Result<Field> {
    let g0 = initial.grid;
    if g0.nx < 3 {
        return Err(Error::Invalid("need at least three x points".into()));
    }
    let rhs = Rhs::new(inst)?;
    let grid = Grid::new(g0.t0, g0.dt, steps + 1, g0.x0, g0.dx, g0.nx)?;
    let n = grid.nx;
    let mut u = initial.row(0).to_vec();
    let held = (u[0], u[n - 1]);
    rhs.check(&u)?;
    let mut values = Vec::with_capacity(n * (steps + 1));
    values.extend_from_slice(&u);

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        let min_f0 = u
            .iter()
            .map(|&v| rhs.f0.eval(v))
            .fold(f64::INFINITY, f64::min);
        if min_f0.is_nan() || min_f0 <= 0.0 {
            let v = u.iter().copied().fold(f64::INFINITY, f64::min);
            return Err(Error::Positivity(v));
        }
        let bound = CFL * grid.dx * grid.dx * min_f0;
        let subs = (grid.dt / bound).ceil().max(1.0) as usize;
        let h = grid.dt / subs as f64;
        let mut t = grid.t(step);
        for _ in 0..subs {
            rhs.eval(&u, grid.dx, &mut k1);
            for j in 0..n {
                tmp[j] = u[j] + 0.5 * h * k1[j];
            }
            set_ends(&mut tmp, t + 0.5 * h, &grid, bc, held);
            rhs.eval(&tmp, grid.dx, &mut k2);
            for j in 0..n {
                tmp[j] = u[j] + 0.5 * h * k2[j];
            }
            set_ends(&mut tmp, t + 0.5 * h, &grid, bc, held);
            rhs.eval(&tmp, grid.dx, &mut k3);
            for j in 0..n {
                tmp[j] = u[j] + h * k3[j];
            }
            set_ends(&mut tmp, t + h, &grid, bc, held);
            rhs.eval(&tmp, grid.dx, &mut k4);
            for j in 0..n {
                u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            t += h;
            set_ends(&mut u, t, &grid, bc, held);
            rhs.check(&u)?;
        }
        values.extend_from_slice(&u);
    }
    Field::new(grid, values)
}

/// Max over interior points of `|V_xx - f0 V_t - f1 V_x - f2|`, all
/// derivatives by central differences.
pub fn invariance_residual(field: &Field, inst: &Instance) -> Result<f64> {
    let g = field.grid;
    if g.nt < 3 || g.nx < 3 {
        return Err(Error::Invalid("need at least 3 rows and 3 columns".into()));
    }
    let rhs = Rhs::new(inst)?;
    let mut worst: f64 = 0.0;
    for i in 1..g.nt - 1 {
        for j in 1..g.nx - 1 {
            let v = field.at(i, j);
            let vxx = (field.at(i, j + 1) - 2.0 * v + field.at(i, j - 1)) / (g.dx * g.dx);
            let vx = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * g.dx);
            let vt = (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * g.dt);
            let r = vxx - rhs.f0.eval(v) * vt - rhs.f1.eval(v) * vx - rhs.f2.eval(v);
            if !r.is_finite() {
                return Err(Error::NonFinite);
            }
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn burgers() -> Instance {
        Instance::power(0.0, 1.0, 1.0, Expr::zero()).unwrap()
    }

    /// `V = 2 e^(x+t) / (1 + e^(x+t))` solves `V_t = V_xx + V V_x`.
    fn front(t: f64, x: f64) -> f64 {
        let e = (x + t).exp();
        2.0 * e / (1.0 + e)
    }

    fn row(nx: usize, dt: f64, f: impl Fn(f64, f64) -> f64) -> Field {
        Field::from_fn(Grid::spanning(0.0, 1.0, nx, 0.0, dt, 1).unwrap(), f).unwrap()
    }

    #[test]
    fn constants_stay_constant() {
        let out = solve_pde(&burgers(), &row(21, 1e-3, |_, _| 0.7), 20, &Boundary::Held).unwrap();
        assert!(out.values.iter().all(|&v| v == 0.7));
        assert_eq!(out.grid.nt, 21);
    }

    #[test]
    fn zero_steps_returns_initial_row() {
        let init = row(11, 1e-3, |_, x| 1.0 + x);
        let out = solve_pde(&burgers(), &init, 0, &Boundary::Held).unwrap();
        assert_eq!(out, init);
    }

    #[test]
    fn linear_profile_follows_exact_solution() {
        let exact = |t: f64, x: f64| x / (1.0 - t);
        let init = row(21, 1e-3, exact);
        let out = solve_pde(&burgers(), &init, 50, &Boundary::Exact(&exact)).unwrap();
        let want = Field::from_fn(out.grid, exact).unwrap();
        let d = out.max_abs_diff(&want);
        assert!(d < 1e-6, "{d}");
        let r = invariance_residual(&out, &burgers()).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn second_order_in_space() {
        let err = |nx: usize| {
            let dx = 1.0 / (nx - 1) as f64;
            let dt = 0.2 * dx * dx;
            let steps = (0.05 / dt).round() as usize;
            let out = solve_pde(
                &burgers(),
                &row(nx, dt, front),
                steps,
                &Boundary::Exact(&front),
            )
            .unwrap();
            let want = Field::from_fn(out.grid, front).unwrap();
            out.max_abs_diff(&want)
        };
        let (e1, e2, e3) = (err(11), err(21), err(41));
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(o1 >= 1.9 && o2 >= 1.9, "{e1} {e2} {e3}");
    }

    #[test]
    fn residual_shrinks_under_refinement() {
        let res = |nx: usize| {
            let dx = 1.0 / (nx - 1) as f64;
            let dt = 0.2 * dx * dx;
            let steps = (0.05 / dt).round() as usize;
            let out = solve_pde(
                &burgers(),
                &row(nx, dt, front),
                steps,
                &Boundary::Exact(&front),
            )
            .unwrap();
            invariance_residual(&out, &burgers()).unwrap()
        };
        let (r1, r2) = (res(11), res(21));
        assert!(r1 / r2 >= 3.5, "{r1} {r2}");
        let dx: f64 = 0.05;
        assert!(r2 < 10.0 * (dx * dx + 0.2 * dx * dx));
    }

    #[test]
    fn negative_controls() {
        let inst = burgers();
        let g = Grid::spanning(0.0, 1.0, 21, 0.0, 1e-3, 5).unwrap();
        assert_eq!(
            invariance_residual(&Field::from_fn(g, |_, _| 3.0).unwrap(), &inst).unwrap(),
            0.0
        );
        let noisy = Field::from_fn(g, |t, x| 1.0 + 1e-3 * ((t * 1e4 + x * 1e3).sin())).unwrap();
        assert!(invariance_residual(&noisy, &inst).unwrap() > 0.1);

        let cubic = Instance::power(0.0, 1.0, 1.0, parse("-10*V^3").unwrap()).unwrap();
        let r = solve_pde(&cubic, &row(11, 1.0, |_, _| 5.0), 10, &Boundary::Held);
        assert!(matches!(r, Err(Error::Unstable(_))), "{r:?}");

        let frac = Instance::power(0.5, 1.0, 1.0, Expr::zero()).unwrap();
        let r = solve_pde(&frac, &row(11, 1e-3, |_, x| x - 0.5), 1, &Boundary::Held);
        assert!(matches!(r, Err(Error::Positivity(_))), "{r:?}");
    }
}
