//! Iteration matrices of the error recursion `e^k = B^k(z) e^{k-1}` and their
//! stiff limits.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{complexify, guarded_inverse, norm_inf, shifted, C64};
use crate::error::{Error, Result};
use crate::tableau::SdcMethod;

/// `B(z) = z (I - z A_Δ)^{-1} (A - A_Δ)`.
pub fn iteration_matrix(a: &DMatrix<f64>, ad: &DMatrix<f64>, z: C64) -> Result<DMatrix<C64>> {
    let inv = guarded_inverse(&shifted(ad, z)).ok_or(Error::Pole {
        re: z.re,
        im: z.im,
        context: None,
    })?;
    Ok(inv * complexify(&(a - ad)) * z)
}

/// `ρ̄_k(z) = ‖B^k(z) ⋯ B^1(z)‖_∞^{1/k}` over the method's first `k` sweeps.
pub fn growth_rate(method: &SdcMethod<f64>, z: C64, k: usize) -> Result<f64> {
    if k == 0 || k > method.sweeps() {
        return Err(Error::InvalidArgument(format!(
            "growth rate over {k} sweeps, method has {}",
            method.sweeps()
        )));
    }
    let a = method.underlying.a.to_f64();
    let s = a.nrows();
    let mut prod = DMatrix::<C64>::identity(s, s);
    for i in 1..=k {
        let b = iteration_matrix(&a, &method.schedule.get(i).m.to_f64(), z).map_err(|_| Error::Pole {
            re: z.re,
            im: z.im,
            context: Some(format!("sweep {i}")),
        })?;
        prod = b * prod;
    }
    Ok(norm_inf(&prod).powf(1.0 / k as f64))
}

/// `B_S = I - A_Δ^{-1} A`, the limit of `B(z)` as `|z| → ∞`.
pub fn stiff_limit_matrix(a: &DMatrix<f64>, ad: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = guarded_inverse(&complexify(ad))
        .ok_or_else(|| Error::Singular("EED is not invertible, so the stiff limit is undefined".into()))?;
    let n = a.nrows();
    let inv = inv.map(|x| x.re);
    Ok(DMatrix::identity(n, n) - inv * a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NilpotencyCertificate {
    /// `‖B_S^K ⋯ B_S^1‖_∞`.
    pub norm: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub sweeps: usize,
}

/// Checks that the stiff-limit error propagator of all sweeps vanishes.
pub fn certify_stiff_nilpotency(method: &SdcMethod<f64>, tol: f64) -> Result<NilpotencyCertificate> {
    let a = method.underlying.a.to_f64();
    let s = a.nrows();
    let mut prod = DMatrix::<f64>::identity(s, s);
    for k in 1..=method.sweeps() {
        let bs = stiff_limit_matrix(&a, &method.schedule.get(k).m.to_f64())
            .map_err(|e| Error::Singular(format!("sweep {k}: {e}")))?;
        prod = bs * prod;
    }
    let norm = (0..s).map(|i| prod.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(NilpotencyCertificate {
        norm,
        tolerance: tol,
        pass: norm < tol,
        sweeps: method.sweeps(),
    })
}
