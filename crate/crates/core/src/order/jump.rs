//! Internal stage errors and the order-jump condition.

use serde::Serialize;

use super::weights::ElementaryWeights;
use super::{agrees, default_tol};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tableau::{augmented_stage_matrix, ButcherTableau, EedKind, EedMatrix, SdcMethod};
use crate::trees::{bamboo, gamma, RootedTree, MAX_TREE_SIZE};

/// Per-stage coefficient errors `ε^{[k,i]}(τ) = β^{[i]}(τ) - α^{[k,i]}(τ)`
/// after `k` sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SdcIterationState<T> {
    pub sweeps: usize,
    pub trees: Vec<RootedTree>,
    /// `errors[t][i]` for tree `t` and stage `i`.
    pub errors: Vec<Vec<T>>,
    /// Linear stage order `m` when known; the first tree is then the bamboo
    /// of size `m + 1`.
    pub stage_order: Option<usize>,
}

pub fn internal_stage_errors<T: Scalar>(method: &SdcMethod<T>, trees: &[RootedTree]) -> Result<SdcIterationState<T>> {
    internal_stage_errors_at(method, method.sweeps(), trees)
}

/// Stage errors after the first `k` sweeps (`k = 0` is the initial guess).
pub fn internal_stage_errors_at<T: Scalar>(
    method: &SdcMethod<T>,
    k: usize,
    trees: &[RootedTree],
) -> Result<SdcIterationState<T>> {
    if k > method.sweeps() {
        return Err(Error::InvalidArgument(format!(
            "method has {} sweeps, asked for {k}",
            method.sweeps()
        )));
    }
    let s = method.stages();
    let prec = method.underlying.precision();
    let big = augmented_stage_matrix(&method.underlying.a, &method.schedule.mats()[..=k]);
    let n = big.rows();
    let aug = ButcherTableau::from_ab(big, vec![T::zero(prec); n])?;
    let mut sdc = ElementaryWeights::new(aug);
    let mut under = ElementaryWeights::new(method.underlying.clone());
    let errors = trees
        .iter()
        .map(|t| {
            let phi = sdc.stage(t);
            under
                .stage(t)
                .into_iter()
                .zip(&phi[k * s..])
                .map(|(b, a)| b - a)
                .collect()
        })
        .collect();
    Ok(SdcIterationState {
        sweeps: k,
        trees: trees.to_vec(),
        errors,
        stage_order: None,
    })
}

/// Stage errors on the first bamboo where the stages of sweep `k` deviate
/// from the underlying stages. The bamboo of size `m + 1` is used, where `m`
/// is the largest size with every bamboo up to `m` reproduced exactly; `m` is
/// the stage order on linear problems.
pub fn jump_state<T: Scalar>(
    method: &SdcMethod<T>,
    k: usize,
    size_cap: usize,
    tol: Option<T>,
) -> Result<SdcIterationState<T>> {
    let tol = tol.unwrap_or_else(|| default_tol(method.underlying.precision()));
    let k = k.min(method.sweeps());
    if size_cap == 0 || size_cap > MAX_TREE_SIZE {
        return Err(Error::ResourceLimit {
            what: "bamboo size",
            requested: size_cap,
            cap: MAX_TREE_SIZE,
        });
    }
    let trees: Vec<RootedTree> = (1..=size_cap).map(bamboo).collect();
    let mut under = ElementaryWeights::new(method.underlying.clone());
    let all = internal_stage_errors_at(method, k, &trees)?;
    for (n, (tree, eps)) in trees.iter().zip(&all.errors).enumerate() {
        let beta = under.stage(tree);
        let g = gamma(tree);
        let bad = eps
            .iter()
            .zip(&beta)
            .any(|(e, b)| !agrees(&(b.clone() - e), b, g, &tol).0);
        if bad {
            return Ok(SdcIterationState {
                sweeps: k,
                trees: vec![tree.clone()],
                errors: vec![eps.clone()],
                stage_order: Some(n),
            });
        }
    }
    Err(Error::Precision(format!(
        "stages reproduce every bamboo up to size {size_cap}; raise the size cap"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpCheck {
    pub holds: bool,
    /// Linear stage order before the candidate sweep.
    pub stage_order: usize,
    /// `Σ_j ã_ij ε_j` per stage.
    pub lhs: Vec<f64>,
    /// `Σ_j a_ij ε_j` per stage.
    pub rhs: Vec<f64>,
    pub residual: f64,
}

/// Whether sweeping once more with `eed` after the method's `K` sweeps
/// satisfies `A_Δ ε = A ε` on the first deviating bamboo, the sufficient
/// condition for an order jump.
pub fn jump_condition_check<T: Scalar>(
    method: &SdcMethod<T>,
    eed: &EedMatrix<T>,
    size_cap: Option<usize>,
    tol: Option<T>,
) -> Result<JumpCheck> {
    check_after(method, method.sweeps(), eed, size_cap, tol)
}

/// The jump condition for the method's own sweep `k ≥ 1`, evaluated on the
/// state after sweep `k - 1`.
pub fn jump_condition_at<T: Scalar>(
    method: &SdcMethod<T>,
    k: usize,
    size_cap: Option<usize>,
    tol: Option<T>,
) -> Result<JumpCheck> {
    if k == 0 || k > method.sweeps() {
        return Err(Error::InvalidArgument(format!(
            "sweep {k} is outside 1..={}",
            method.sweeps()
        )));
    }
    check_after(method, k - 1, method.schedule.get(k), size_cap, tol)
}

fn check_after<T: Scalar>(
    method: &SdcMethod<T>,
    done: usize,
    eed: &EedMatrix<T>,
    size_cap: Option<usize>,
    tol: Option<T>,
) -> Result<JumpCheck> {
    let prec = method.underlying.precision();
    let tol = tol.unwrap_or_else(|| default_tol(prec));
    let st = jump_state(method, done, size_cap.unwrap_or(12), Some(tol.clone()))?;
    let eps = &st.errors[0];
    let lhs = eed.m.matvec(eps);
    let rhs = method.underlying.a.matvec(eps);
    let mut scale = T::zero(prec);
    let mut worst = T::zero(prec);
    for ((l, r), e) in lhs.iter().zip(&rhs).zip(eps) {
        scale = T::max_of(scale, T::max_of(r.abs(), e.abs()));
        worst = T::max_of(worst, (l.clone() - r).abs());
    }
    let residual = if scale.is_zero() { worst.clone() } else { worst.clone() / &scale };
    Ok(JumpCheck {
        holds: residual <= tol,
        stage_order: st.stage_order.unwrap_or(0),
        lhs: lhs.iter().map(|x| x.to_f64()).collect(),
        rhs: rhs.iter().map(|x| x.to_f64()).collect(),
        residual: residual.to_f64(),
    })
}

/// The only diagonal EED meeting the jump condition for the state's first
/// tree: `ã_ii = Σ_j a_ij ε_j / ε_i`.
pub fn unique_diagonal_jump_eed<T: Scalar>(
    state: &SdcIterationState<T>,
    tableau: &ButcherTableau<T>,
) -> Result<EedMatrix<T>> {
    let eps = state
        .errors
        .first()
        .ok_or_else(|| Error::InvalidArgument("state holds no trees".into()))?;
    let prec = tableau.precision();
    let tol: T = default_tol(prec);
    let scale = eps.iter().fold(T::zero(prec), |m, e| T::max_of(m, e.abs()));
    let ae = tableau.a.matvec(eps);
    let mut d = Vec::with_capacity(eps.len());
    for (i, (num, e)) in ae.into_iter().zip(eps).enumerate() {
        if e.abs() <= tol.clone() * &scale || e.is_zero() {
            return Err(Error::ZeroStageError { stage: i });
        }
        d.push(num / e);
    }
    Ok(EedMatrix {
        m: Matrix::diagonal(&d),
        kind: EedKind::Custom,
    })
}
