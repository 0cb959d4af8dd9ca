//! Concrete-instance verification: pointwise residuals, a method-of-lines
//! solver, the scaling-translation group flow and the U/V substitution.

mod change;
mod eval;
mod field;
mod group;
mod instance;
mod pde;

pub use change::{change_field, change_value, Direction};
pub use eval::{eval_expr, sample_residuals, Point, SAMPLE_BOX};
pub use field::{Field, Grid};
pub use group::{group_transform, group_transform_resampled, ScalingFlow};
pub use instance::{GridSpec, Instance};
pub use pde::{invariance_residual, solve_pde, Boundary, Compiled};
