//! Order analysis through B-series: elementary weights, Runge-Kutta order,
//! SDC order against the underlying method, height order, and the order-jump
//! condition.

mod jump;
mod sdc;
mod table;
mod weights;

pub use jump::{
    internal_stage_errors, internal_stage_errors_at, jump_condition_at, jump_condition_check, jump_state,
    unique_diagonal_jump_eed, JumpCheck, SdcIterationState,
};
pub use sdc::{height_order, height_orders, sdc_order, sdc_orders, stage_height_order};
pub use table::{order_table, read_table_csv, OrderTable, TableMismatch};
pub use weights::{elementary_weight, elementary_weights, rk_order, stage_weights, ElementaryWeights};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Precision, Scalar};
use crate::trees::{TreeTable, MAX_TREE_SIZE};

/// Tree on which an order condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailingTree {
    pub tree: String,
    pub size: usize,
    pub height: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl FailingTree {
    pub(crate) fn new<T: Scalar>(table: &TreeTable, id: usize, lhs: &T, rhs: &T, residual: &T) -> Self {
        FailingTree {
            tree: table.tree(id).to_brackets(),
            size: table.size(id),
            height: table.height(id),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            residual: residual.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub order: usize,
    /// Trees violating the condition at the first failing size (or height).
    pub first_failing: Vec<FailingTree>,
    pub tolerance: f64,
    /// Largest order that was probed.
    pub pmax: usize,
    /// Largest tree size examined for height orders.
    pub size_cap: Option<usize>,
}

/// `10^-(digits/2)` for the given precision.
pub fn default_tol<T: Scalar>(prec: Precision) -> T {
    T::pow10_neg(prec.decimal_digits() / 2, prec)
}

pub(crate) fn probe_size(pmax: usize) -> Result<usize> {
    if pmax == 0 {
        return Err(Error::InvalidArgument("pmax must be positive".into()));
    }
    if pmax > MAX_TREE_SIZE {
        return Err(Error::ResourceLimit {
            what: "probed order",
            requested: pmax,
            cap: MAX_TREE_SIZE,
        });
    }
    Ok((pmax + 1).min(MAX_TREE_SIZE))
}

/// `|lhs - rhs| ≤ tol · max(1/γ, |rhs|)`.
pub(crate) fn agrees<T: Scalar>(lhs: &T, rhs: &T, gamma: u64, tol: &T) -> (bool, T) {
    let prec = lhs.precision();
    let inv_g = T::one(prec) / T::from_i64(gamma as i64, prec);
    let scale = T::max_of(inv_g, rhs.abs());
    let res = (lhs.clone() - rhs).abs() / scale;
    (res <= *tol, res)
}
