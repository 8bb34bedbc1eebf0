//! Elementary weights of Runge-Kutta methods.

use std::collections::HashMap;

use super::{default_tol, probe_size, FailingTree, OrderReport};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tableau::ButcherTableau;
use crate::trees::{RootedTree, TreeTable};

/// Elementwise product of the children's stage vectors; all ones for the leaf.
pub(crate) fn child_product<T: Scalar>(table: &TreeTable, id: usize, phi: &[Vec<T>], s: usize, one: &T) -> Vec<T> {
    let ch = table.children(id);
    match ch.split_first() {
        None => vec![one.clone(); s],
        Some((&first, rest)) => {
            let mut p = phi[first].clone();
            for &c in rest {
                for (x, y) in p.iter_mut().zip(&phi[c]) {
                    *x *= y;
                }
            }
            p
        }
    }
}

/// Stage vectors `Φ(τ) = A (Π_children Φ)` for every tree of the table up to
/// `max_size`, indexed by tree id.
pub fn stage_weights<T: Scalar>(table: &TreeTable, a: &Matrix<T>, max_size: usize) -> Vec<Vec<T>> {
    let s = a.rows();
    let one = T::one(a.precision());
    let ids = table.ids_up_to(max_size);
    let mut phi: Vec<Vec<T>> = Vec::with_capacity(ids.len());
    for id in ids {
        let p = child_product(table, id, &phi, s, &one);
        phi.push(a.matvec(&p));
    }
    phi
}

fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut acc = T::zero(u[0].precision());
    for (x, y) in u.iter().zip(v) {
        acc.mul_add_assign(x, y);
    }
    acc
}

/// `α(τ) = bᵀ Π_children Φ` for every tree of the table up to `max_size`.
pub fn elementary_weights<T: Scalar>(t: &ButcherTableau<T>, table: &TreeTable, max_size: usize) -> Vec<T> {
    let phi = stage_weights(table, &t.a, max_size);
    let one = T::one(t.precision());
    table
        .ids_up_to(max_size)
        .map(|id| dot(&t.b, &child_product(table, id, &phi, t.stages(), &one)))
        .collect()
}

/// Memoized elementary weights keyed by canonical tree.
#[derive(Debug, Clone)]
pub struct ElementaryWeights<T> {
    tableau: ButcherTableau<T>,
    memo: HashMap<RootedTree, Vec<T>>,
}

impl<T: Scalar> ElementaryWeights<T> {
    pub fn new(tableau: ButcherTableau<T>) -> Self {
        ElementaryWeights {
            tableau,
            memo: HashMap::new(),
        }
    }

    /// Stage vector `Φ(τ)`.
    pub fn stage(&mut self, tree: &RootedTree) -> Vec<T> {
        if let Some(v) = self.memo.get(tree) {
            return v.clone();
        }
        let p = self.product(tree);
        let v = self.tableau.a.matvec(&p);
        self.memo.insert(tree.clone(), v.clone());
        v
    }

    fn product(&mut self, tree: &RootedTree) -> Vec<T> {
        let s = self.tableau.stages();
        let mut p = vec![T::one(self.tableau.precision()); s];
        for c in tree.children() {
            let v = self.stage(c);
            for (x, y) in p.iter_mut().zip(&v) {
                *x *= y;
            }
        }
        p
    }

    /// `α(τ)`.
    pub fn weight(&mut self, tree: &RootedTree) -> T {
        let p = self.product(tree);
        dot(&self.tableau.b, &p)
    }
}

pub fn elementary_weight<T: Scalar>(t: &ButcherTableau<T>, tree: &RootedTree) -> T {
    ElementaryWeights::new(t.clone()).weight(tree)
}

/// Largest `p ≤ pmax` with `|α(τ) - 1/γ(τ)| γ(τ) ≤ tol` for all `|τ| ≤ p`.
pub fn rk_order<T: Scalar>(t: &ButcherTableau<T>, pmax: usize, tol: Option<T>) -> Result<OrderReport> {
    let prec = t.precision();
    let tol = tol.unwrap_or_else(|| default_tol(prec));
    let probe = probe_size(pmax)?;
    let table = TreeTable::new(probe)?;
    let alpha = elementary_weights(t, &table, probe);
    let mut failing = Vec::new();
    let mut order = probe;
    for n in 1..=probe {
        for id in table.ids_of_size(n) {
            let g = T::from_i64(table.gamma(id) as i64, prec);
            let exact = T::one(prec) / &g;
            let res = (alpha[id].clone() - &exact).abs() * &g;
            if res > tol {
                failing.push(FailingTree::new(&table, id, &alpha[id], &exact, &res));
            }
        }
        if !failing.is_empty() {
            order = n - 1;
            break;
        }
    }
    failing.truncate(8);
    Ok(OrderReport {
        order: order.min(pmax),
        first_failing: failing,
        tolerance: tol.to_f64(),
        pmax,
        size_cap: None,
    })
}
