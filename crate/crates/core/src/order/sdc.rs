//! SDC order by block recursion on the augmented tableau.
//!
//! The stage vectors of sweep `k` depend only on sweeps `k-1` and `k`:
//!
//! ```text
//! Φ^{[k]}(τ) = (A - A_Δ^k) Π Φ^{[k-1]}(children) + A_Δ^k Π Φ^{[k]}(children)
//! ```
//!
//! so a single pass over the sweeps yields the weights of every truncated
//! method `K = 0, 1, …` while holding only two blocks of stage vectors.

use super::weights::{child_product, stage_weights};
use super::{agrees, default_tol, FailingTree, OrderReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tableau::{EedMatrix, SdcMethod};
use crate::trees::{TreeTable, MAX_TREE_SIZE};

/// Calls `visit(k, Φ^{[k]})` for `k = 0..mats.len()`.
pub(crate) fn for_each_block<T: Scalar>(
    table: &TreeTable,
    max_size: usize,
    a: &Matrix<T>,
    mats: &[EedMatrix<T>],
    mut visit: impl FnMut(usize, &[Vec<T>]),
) {
    let s = a.rows();
    let one = T::one(a.precision());
    let ids = table.ids_up_to(max_size);
    let mut prev = stage_weights(table, &mats[0].m, max_size);
    visit(0, &prev);
    for (k, eed) in mats.iter().enumerate().skip(1) {
        let ad = &eed.m;
        let diff = a.sub(ad);
        let mut cur: Vec<Vec<T>> = Vec::with_capacity(ids.len());
        for id in ids.clone() {
            let p_prev = child_product(table, id, &prev, s, &one);
            let p_cur = child_product(table, id, &cur, s, &one);
            let mut v = diff.matvec(&p_prev);
            for (x, y) in v.iter_mut().zip(ad.matvec(&p_cur)) {
                *x += y;
            }
            cur.push(v);
        }
        visit(k, &cur);
        prev = cur;
    }
}

/// Turns stage vectors into the weight of the step result.
pub(crate) struct Finalizer<T> {
    b: Vec<T>,
    combination: Option<Vec<T>>,
}

impl<T: Scalar> Finalizer<T> {
    pub(crate) fn new(method: &SdcMethod<T>) -> Self {
        Finalizer {
            b: method.underlying.b.clone(),
            combination: method.stage_combination(),
        }
    }

    pub(crate) fn weight(&self, table: &TreeTable, id: usize, phi: &[Vec<T>]) -> T {
        let prec = self.b[0].precision();
        let mut acc = T::zero(prec);
        match &self.combination {
            None => {
                let p = child_product(table, id, phi, self.b.len(), &T::one(prec));
                for (x, y) in self.b.iter().zip(&p) {
                    acc.mul_add_assign(x, y);
                }
            }
            Some(w) => {
                for (x, y) in w.iter().zip(&phi[id]) {
                    if !x.is_zero() {
                        acc.mul_add_assign(x, y);
                    }
                }
            }
        }
        acc
    }
}

fn check_probe(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("probe size must be positive".into()));
    }
    if n > MAX_TREE_SIZE {
        return Err(Error::ResourceLimit {
            what: "tree size",
            requested: n,
            cap: MAX_TREE_SIZE,
        });
    }
    Ok(())
}

/// Orders of the truncated methods `K = 0..=method.sweeps()`, each measured
/// against the underlying tableau with the same final update, probing trees
/// up to size `pmax`.
pub fn sdc_orders<T: Scalar>(method: &SdcMethod<T>, pmax: usize, tol: Option<T>) -> Result<Vec<OrderReport>> {
    check_probe(pmax)?;
    let prec = method.underlying.precision();
    let tol = tol.unwrap_or_else(|| default_tol(prec));
    let table = TreeTable::new(pmax)?;
    let fin = Finalizer::new(method);
    let under = stage_weights(&table, &method.underlying.a, pmax);
    let beta: Vec<T> = table.ids_up_to(pmax).map(|id| fin.weight(&table, id, &under)).collect();
    let mut reports = Vec::with_capacity(method.sweeps() + 1);
    for_each_block(&table, pmax, &method.underlying.a, method.schedule.mats(), |_, phi| {
        let mut failing = Vec::new();
        let mut order = pmax;
        for n in 1..=pmax {
            for id in table.ids_of_size(n) {
                let alpha = fin.weight(&table, id, phi);
                let (ok, res) = agrees(&alpha, &beta[id], table.gamma(id), &tol);
                if !ok {
                    failing.push(FailingTree::new(&table, id, &alpha, &beta[id], &res));
                }
            }
            if !failing.is_empty() {
                order = n - 1;
                break;
            }
        }
        failing.truncate(8);
        reports.push(OrderReport {
            order,
            first_failing: failing,
            tolerance: tol.to_f64(),
            pmax,
            size_cap: None,
        });
    });
    Ok(reports)
}

/// Largest `p ≤ pmax` such that the SDC method agrees with its underlying
/// method on all trees of size at most `p`.
pub fn sdc_order<T: Scalar>(method: &SdcMethod<T>, pmax: usize, tol: Option<T>) -> Result<OrderReport> {
    Ok(sdc_orders(method, pmax, tol)?.pop().expect("at least one block"))
}

/// Height orders of the truncated methods `K = 0..=method.sweeps()`.
///
/// Only trees with at most `size_cap` vertices are examined, so the result is
/// an upper bound on the height order; the cap is recorded in each report.
pub fn height_orders<T: Scalar>(
    method: &SdcMethod<T>,
    hmax: usize,
    size_cap: Option<usize>,
    tol: Option<T>,
) -> Result<Vec<OrderReport>> {
    let cap = size_cap.unwrap_or(hmax + 4).min(MAX_TREE_SIZE);
    if cap < hmax {
        return Err(Error::InvalidArgument(format!("size cap {cap} is below the height {hmax}")));
    }
    check_probe(cap)?;
    let prec = method.underlying.precision();
    let tol = tol.unwrap_or_else(|| default_tol(prec));
    let table = TreeTable::new(cap)?;
    let fin = Finalizer::new(method);
    let under = stage_weights(&table, &method.underlying.a, cap);
    let beta: Vec<T> = table.ids_up_to(cap).map(|id| fin.weight(&table, id, &under)).collect();
    let mut reports = Vec::new();
    for_each_block(&table, cap, &method.underlying.a, method.schedule.mats(), |_, phi| {
        let mut failing: Vec<(usize, FailingTree)> = Vec::new();
        for id in table.ids_up_to(cap) {
            let h = table.height(id);
            if h > hmax {
                continue;
            }
            let alpha = fin.weight(&table, id, phi);
            let (ok, res) = agrees(&alpha, &beta[id], table.gamma(id), &tol);
            if !ok {
                failing.push((h, FailingTree::new(&table, id, &alpha, &beta[id], &res)));
            }
        }
        let hfail = failing.iter().map(|(h, _)| *h).min();
        let order = hfail.map(|h| h - 1).unwrap_or(hmax);
        let mut first: Vec<FailingTree> = failing
            .into_iter()
            .filter(|(h, _)| Some(*h) == hfail)
            .map(|(_, f)| f)
            .collect();
        first.truncate(8);
        reports.push(OrderReport {
            order,
            first_failing: first,
            tolerance: tol.to_f64(),
            pmax: hmax,
            size_cap: Some(cap),
        });
    });
    Ok(reports)
}

pub fn height_order<T: Scalar>(
    method: &SdcMethod<T>,
    hmax: usize,
    size_cap: Option<usize>,
    tol: Option<T>,
) -> Result<OrderReport> {
    Ok(height_orders(method, hmax, size_cap, tol)?.pop().expect("at least one block"))
}

/// Internal-stage height orders `h̃_k` for `k = 0..mats.len()`: the largest
/// `h` such that every stage agrees with the underlying stages on all trees
/// of height at most `h`, among trees of at most `size_cap` vertices.
pub(crate) fn stage_height_orders<T: Scalar>(
    a: &Matrix<T>,
    mats: &[EedMatrix<T>],
    size_cap: usize,
    tol: &T,
) -> Result<Vec<usize>> {
    check_probe(size_cap)?;
    let table = TreeTable::new(size_cap)?;
    let under = stage_weights(&table, a, size_cap);
    let mut out = Vec::new();
    for_each_block(&table, size_cap, a, mats, |_, phi| {
        let mut hfail = size_cap + 1;
        for id in table.ids_up_to(size_cap) {
            let h = table.height(id);
            if h >= hfail {
                continue;
            }
            let bad = phi[id]
                .iter()
                .zip(&under[id])
                .any(|(x, y)| !agrees(x, y, table.gamma(id), tol).0);
            if bad {
                hfail = h;
            }
        }
        out.push(hfail - 1);
    });
    Ok(out)
}

/// `h̃_k` of the method after `k` sweeps.
pub fn stage_height_order<T: Scalar>(
    method: &SdcMethod<T>,
    k: usize,
    size_cap: usize,
    tol: Option<T>,
) -> Result<usize> {
    let tol = tol.unwrap_or_else(|| default_tol(method.underlying.precision()));
    let mats = &method.schedule.mats()[..=k.min(method.sweeps())];
    Ok(*stage_height_orders(&method.underlying.a, mats, size_cap, &tol)?
        .last()
        .expect("at least one block"))
}
