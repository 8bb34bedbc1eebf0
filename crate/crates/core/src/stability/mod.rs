//! Linear stability on the Dahlquist equation `u' = λu`, `z = λΔt`.
//!
//! Everything here runs in `f64` complex arithmetic; a linear system is
//! treated as singular (a pole) once its 1-norm condition number exceeds
//! [`POLE_CONDITION`].

mod contour;
mod grid;
mod iteration;

pub use contour::{contour_segments, Segment};
pub use grid::{growth_rate_grid, stability_region, ComplexGrid, GridSpec};
pub use iteration::{
    certify_stiff_nilpotency, growth_rate, iteration_matrix, stiff_limit_matrix, NilpotencyCertificate,
};

use nalgebra::DMatrix;
pub use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::tableau::{ButcherTableau, SdcMethod};
use crate::Scalar;

pub type C64 = Complex<f64>;

pub const POLE_CONDITION: f64 = 1e14;

fn norm1(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn norm_inf(m: &DMatrix<C64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of `m`, or `None` when `m` is singular to working precision.
pub(crate) fn guarded_inverse(m: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let inv = m.clone().lu().try_inverse()?;
    let cond = norm1(m) * norm1(&inv);
    if cond.is_finite() && cond <= POLE_CONDITION {
        Some(inv)
    } else {
        None
    }
}

pub(crate) fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// `I - z M`.
pub(crate) fn shifted(m: &DMatrix<f64>, z: C64) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        C64::new(d, 0.0) - z * m[(i, j)]
    })
}

/// `R(z) = 1 + z bᵀ (I - zA)^{-1} 1`.
pub fn stability_function(t: &ButcherTableau<f64>, z: C64) -> Result<C64> {
    let a = t.a.to_f64();
    let m = shifted(&a, z);
    let inv = guarded_inverse(&m).ok_or(Error::Pole {
        re: z.re,
        im: z.im,
        context: None,
    })?;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..t.stages() {
        let row: C64 = inv.row(i).iter().sum();
        acc += row * t.b[i];
    }
    Ok(C64::new(1.0, 0.0) + z * acc)
}

/// Stability function of the assembled tableau of an SDC method.
pub fn sdc_stability_function<T: Scalar>(method: &SdcMethod<T>, z: C64) -> Result<C64> {
    stability_function(&method.assemble()?.to_f64(), z)
}

/// `|R(r e^{iθ})|` for each radius, `None` at poles; for estimating the
/// angle of `A(α)`-stability.
pub fn ray_samples(t: &ButcherTableau<f64>, theta: f64, radii: &[f64]) -> Vec<Option<f64>> {
    radii
        .iter()
        .map(|&r| stability_function(t, C64::from_polar(r, theta)).ok().map(|v| v.norm()))
        .collect()
}
