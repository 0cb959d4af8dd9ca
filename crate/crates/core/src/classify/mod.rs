//! Case analysis: the `xi = a V + f` pipeline, exponent coincidences and
//! their tables, and the `xi = f, eta = g V + h` derivation chains.

mod case_b;
mod cases;
mod chains;
mod report;

pub use case_b::{
    case_b_assumptions, constancy_consequences, constancy_constraints, constant_functions,
    extract_source, frozen_source, solve_eta_case_b, source_back_substitution, ConstancyConstraint,
};
pub use cases::{
    coincidence_table, enumerate_special_cases, fifteen_powers, source_keys, CaseTable, Provenance,
    SpecialCase,
};
pub use chains::{
    case_c_bindings, case_c_chain_k1_p2, case_c_chain_p0, case_c_g_zero_branch, k1_p2_systems,
    residual_check_candidate,
};
pub use report::{Report, Status, Step};

use crate::calculus::{equal_up_to_constant, proportionality, Assumptions};
use crate::expr::Expr;

/// Zero when `a` and `b` agree up to a nonzero rational factor, else `a - b`.
pub(crate) fn constant_multiple_residual(a: &Expr, b: &Expr) -> Expr {
    if equal_up_to_constant(a, b) {
        Expr::zero()
    } else {
        a - b
    }
}

/// Zero when `a = r b` with `r` provably nonzero under `asm`, else `a - b`.
pub(crate) fn multiple_residual(a: &Expr, b: &Expr, asm: &Assumptions) -> Expr {
    match proportionality(a, b) {
        Some(r) if asm.is_nonzero_coeff(&r) => Expr::zero(),
        _ => a - b,
    }
}

/// Pairs each expected equation with a distinct generated one, up to
/// constant factors; returns the residual of the first unmatched one.
pub(crate) fn unordered_residual(generated: &[Expr], expected: &[Expr]) -> Expr {
    if generated.len() != expected.len() {
        return Expr::int((generated.len() as i64) - (expected.len() as i64));
    }
    let mut used = vec![false; generated.len()];
    for e in expected {
        let hit = generated
            .iter()
            .enumerate()
            .find(|(i, g)| !used[*i] && equal_up_to_constant(g, e));
        match hit {
            Some((i, _)) => used[i] = true,
            None => return e.clone(),
        }
    }
    Expr::zero()
}
