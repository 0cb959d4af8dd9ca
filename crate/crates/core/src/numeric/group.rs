use crate::error::{Error, Result};

use super::{Field, Grid};

/// Flow of `(2k t + A1) d_t + (k x + A2) d_x - w V d_V`. The symmetry has
/// `w = 1`; other weights give non-symmetry controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFlow {
    pub k: f64,
    pub a1: f64,
    pub a2: f64,
    pub v_weight: f64,
}

impl ScalingFlow {
    pub fn new(k: f64, a1: f64, a2: f64) -> Self {
        ScalingFlow {
            k,
            a1,
            a2,
            v_weight: 1.0,
        }
    }

    pub fn with_v_weight(self, w: f64) -> Self {
        ScalingFlow {
            v_weight: w,
            ..self
        }
    }

    /// `(e^(c eps) - 1) / c`, continuous at `c = 0`.
    fn growth(c: f64, eps: f64) -> f64 {
        if c == 0.0 {
            eps
        } else {
            (c * eps).exp_m1() / c
        }
    }

    pub fn map_t(&self, t: f64, eps: f64) -> f64 {
        let c = 2.0 * self.k;
        (c * eps).exp() * t + self.a1 * Self::growth(c, eps)
    }

    pub fn map_x(&self, x: f64, eps: f64) -> f64 {
        (self.k * eps).exp() * x + self.a2 * Self::growth(self.k, eps)
    }

    pub fn map_v(&self, v: f64, eps: f64) -> f64 {
        (-self.v_weight * eps).exp() * v
    }
}

/// Pushes every lattice point through the flow. The flow is affine in `t`
/// and `x` separately, so the image is again a uniform lattice and no
/// interpolation is needed.
pub fn group_transform(field: &Field, flow: &ScalingFlow, eps: f64) -> Result<Field> {
    if eps == 0.0 {
        return Ok(field.clone());
    }
    let g = field.grid;
    let grid = Grid::new(
        flow.map_t(g.t0, eps),
        g.dt * (2.0 * flow.k * eps).exp(),
        g.nt,
        flow.map_x(g.x0, eps),
        g.dx * (flow.k * eps).exp(),
        g.nx,
    )?;
    let values = field.values.iter().map(|&v| flow.map_v(v, eps)).collect();
    Field::new(grid, values)
}

fn locate(pos: f64, origin: f64, step: f64, n: usize) -> Option<(usize, f64)> {
    let s = (pos - origin) / step;
    let tol = 1e-9;
    if s < -tol || s > (n - 1) as f64 + tol {
        return None;
    }
    let s = s.clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n.saturating_sub(2));
    Some((i, s - i as f64))
}

fn bilinear(field: &Field, t: f64, x: f64) -> Option<f64> {
    let g = field.grid;
    let (i, a) = locate(t, g.t0, g.dt, g.nt)?;
    let (j, b) = locate(x, g.x0, g.dx, g.nx)?;
    let at = |di: usize, dj: usize| {
        let (ii, jj) = ((i + di).min(g.nt - 1), (j + dj).min(g.nx - 1));
        field.at(ii, jj)
    };
    Some(
        (1.0 - a) * ((1.0 - b) * at(0, 0) + b * at(0, 1))
            + a * ((1.0 - b) * at(1, 0) + b * at(1, 1)),
    )
}

/// The transformed field sampled back on the input lattice by bilinear
/// interpolation. Lattice points whose preimage falls outside the input are
/// clipped; returns the covered block and its fraction of the lattice.
pub fn group_transform_resampled(
    field: &Field,
    flow: &ScalingFlow,
    eps: f64,
) -> Result<(Field, f64)> {
    if eps == 0.0 {
        return Ok((field.clone(), 1.0));
    }
    let g = field.grid;
    let covered = |n: usize, pos: &dyn Fn(usize) -> f64, origin: f64, step: f64, len: usize| {
        (0..n)
            .filter(|&i| locate(pos(i), origin, step, len).is_some())
            .collect::<Vec<_>>()
    };
    let rows = covered(g.nt, &|i| flow.map_t(g.t(i), -eps), g.t0, g.dt, g.nt);
    let cols = covered(g.nx, &|j| flow.map_x(g.x(j), -eps), g.x0, g.dx, g.nx);
    let (Some(&r0), Some(&c0)) = (rows.first(), cols.first()) else {
        return Err(Error::EmptyOverlap);
    };
    let grid = Grid::new(g.t(r0), g.dt, rows.len(), g.x(c0), g.dx, cols.len())?;
    let mut values = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            let v = bilinear(field, flow.map_t(g.t(i), -eps), flow.map_x(g.x(j), -eps))
                .ok_or(Error::EmptyOverlap)?;
            values.push(flow.map_v(v, eps));
        }
    }
    let coverage = (rows.len() * cols.len()) as f64 / (g.nt * g.nx) as f64;
    Ok((Field::new(grid, values)?, coverage))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth() -> Field {
        let g = Grid::spanning(0.0, 1.0, 41, 0.0, 0.01, 30).unwrap();
        Field::from_fn(g, |t, x| 1.0 + 0.3 * (2.0 * x + t).sin()).unwrap()
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let f = smooth();
        let flow = ScalingFlow::new(1.0, 1.0, 0.0);
        assert_eq!(group_transform(&f, &flow, 0.0).unwrap(), f);
        assert_eq!(group_transform_resampled(&f, &flow, 0.0).unwrap(), (f, 1.0));
    }

    #[test]
    fn flow_composes() {
        let f = smooth();
        let flow = ScalingFlow::new(1.0, 1.0, 0.5);
        let two = group_transform(&group_transform(&f, &flow, 0.05).unwrap(), &flow, 0.07).unwrap();
        let one = group_transform(&f, &flow, 0.12).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-12);
        for (a, b) in [
            (two.grid.t0, one.grid.t0),
            (two.grid.dt, one.grid.dt),
            (two.grid.x0, one.grid.x0),
            (two.grid.dx, one.grid.dx),
        ] {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resampled_flow_composes_on_bilinear_data() {
        let g = Grid::spanning(0.0, 1.0, 51, 0.0, 0.02, 51).unwrap();
        let f = Field::from_fn(g, |t, x| 2.0 + t - 0.5 * x + 0.25 * t * x).unwrap();
        let flow = ScalingFlow::new(1.0, 1.0, 0.5);
        let (a, _) = group_transform_resampled(&f, &flow, 0.02).unwrap();
        let (two, _) = group_transform_resampled(&a, &flow, 0.03).unwrap();
        let (one, cov) = group_transform_resampled(&f, &flow, 0.05).unwrap();
        assert!(cov > 0.5 && cov < 1.0);
        // Compare on the common block.
        let off_i = ((two.grid.t0 - one.grid.t0) / g.dt).round() as usize;
        let off_j = ((two.grid.x0 - one.grid.x0) / g.dx).round() as usize;
        let mut worst: f64 = 0.0;
        for i in 0..two.grid.nt {
            for j in 0..two.grid.nx {
                worst = worst.max((two.at(i, j) - one.at(i + off_i, j + off_j)).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn disjoint_image_is_an_error() {
        let flow = ScalingFlow::new(0.0, 0.0, 100.0);
        let r = group_transform_resampled(&smooth(), &flow, 1.0);
        assert!(matches!(r, Err(Error::EmptyOverlap)));
    }

    #[test]
    fn k_zero_is_a_translation() {
        let flow = ScalingFlow::new(0.0, 2.0, 3.0);
        assert_eq!(flow.map_t(1.0, 0.5), 2.0);
        assert_eq!(flow.map_x(1.0, 0.5), 2.5);
    }
}
