use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Uniform `(t, x)` lattice: `nt` rows starting at `t0`, `nx` columns at `x0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
}

impl Grid {
    pub fn new(t0: f64, dt: f64, nt: usize, x0: f64, dx: f64, nx: usize) -> Result<Self> {
        let g = Grid {
            t0,
            dt,
            nt,
            x0,
            dx,
            nx,
        };
        g.check()?;
        Ok(g)
    }

    /// `nx` points spanning `[x0, x1]`.
    pub fn spanning(x0: f64, x1: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        if nx < 2 {
            return Err(Error::Invalid("need at least two x points".into()));
        }
        Grid::new(t0, dt, nt, x0, (x1 - x0) / (nx - 1) as f64, nx)
    }

    fn check(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dx > 0.0
            && [self.t0, self.dt, self.x0, self.dx]
                .iter()
                .all(|v| v.is_finite())
            && self.nt > 0
            && self.nx > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad grid {self:?}")))
        }
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.nt - 1)
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.nx - 1)
    }
}

/// Values over a [`Grid`], row-major by t then x.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check()?;
        if values.len() != grid.nt * grid.nx {
            return Err(Error::Invalid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nt,
                grid.nx
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.nt * grid.nx);
        for i in 0..grid.nt {
            for j in 0..grid.nx {
                values.push(f(grid.t(i), grid.x(j)));
            }
        }
        Field::new(grid, values)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.nx + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.grid.nx..(i + 1) * self.grid.nx]
    }

    pub fn last_row(&self) -> &[f64] {
        self.row(self.grid.nt - 1)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV with header `t,x,V` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,V\n");
        for i in 0..self.grid.nt {
            for j in 0..self.grid.nx {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    self.grid.t(i),
                    self.grid.x(j),
                    self.at(i, j)
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,x,V") => {}
            other => return Err(Error::Invalid(format!("bad CSV header {other:?}"))),
        }
        let mut rows: Vec<[f64; 3]> = Vec::new();
        for (n, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let [t, x, v] = cells.as_slice() else {
                return Err(Error::Invalid(format!("line {}: expected 3 cells", n + 2)));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Invalid(format!("line {}: {e}", n + 2)))
            };
            rows.push([num(t)?, num(x)?, num(v)?]);
        }
        let first = rows
            .first()
            .ok_or_else(|| Error::Invalid("empty field".into()))?;
        let (t0, x0) = (first[0], first[1]);
        let nx = rows.iter().take_while(|r| r[0] == t0).count();
        if nx == 0 || !rows.len().is_multiple_of(nx) {
            return Err(Error::Invalid("rows do not form a lattice".into()));
        }
        let nt = rows.len() / nx;
        let dx = if nx > 1 { rows[1][1] - x0 } else { 1.0 };
        let dt = if nt > 1 { rows[nx][0] - t0 } else { 1.0 };
        let grid = Grid::new(t0, dt, nt, x0, dx, nx)?;
        let tol = |scale: f64| 1e-9 * scale.abs().max(1.0);
        for (idx, r) in rows.iter().enumerate() {
            let (i, j) = (idx / nx, idx % nx);
            if (r[0] - grid.t(i)).abs() > tol(r[0]) || (r[1] - grid.x(j)).abs() > tol(r[1]) {
                return Err(Error::Invalid(format!(
                    "row {} is off the uniform lattice",
                    idx + 2
                )));
            }
        }
        Field::new(grid, rows.iter().map(|r| r[2]).collect())
    }
}
