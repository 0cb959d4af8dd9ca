//! `V = U^(m+1)` for `m != -1` and `V = ln U` for `m = -1`.

use crate::error::{Error, Result};

use super::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    UToV,
    VToU,
}

fn is_integer(a: f64) -> bool {
    a.fract() == 0.0
}

pub fn change_value(dir: Direction, m: f64, value: f64) -> Result<f64> {
    if !value.is_finite() || !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let log_branch = m == -1.0;
    let out = match dir {
        Direction::UToV if log_branch => {
            if value <= 0.0 {
                return Err(Error::Domain(format!("ln U needs U > 0, got {value}")));
            }
            value.ln()
        }
        Direction::VToU if log_branch => value.exp(),
        Direction::UToV => {
            let a = m + 1.0;
            if value <= 0.0 && !is_integer(a) || value == 0.0 && a < 0.0 {
                return Err(Error::Domain(format!("U^({a}) at U = {value}")));
            }
            value.powf(a)
        }
        Direction::VToU => {
            let a = 1.0 / (m + 1.0);
            if value <= 0.0 && !is_integer(a) || value == 0.0 && a < 0.0 {
                return Err(Error::Domain(format!("V^({a}) at V = {value}")));
            }
            value.powf(a)
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::NonFinite)
    }
}

pub fn change_field(dir: Direction, m: f64, field: &Field) -> Result<Field> {
    let values = field
        .values
        .iter()
        .map(|&v| change_value(dir, m, v))
        .collect::<Result<Vec<_>>>()?;
    Field::new(field.grid, values)
}
