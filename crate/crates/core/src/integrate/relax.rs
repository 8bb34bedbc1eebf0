//! Relaxation: rescale the step so that a quadratic invariant `uᵀSu` is kept.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::tableau::ButcherTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelaxedTime {
    /// The relaxed value approximates `u(t_n + γ_n Δt)`.
    AtShiftedTime,
    /// The relaxed value is taken at `t_n + Δt`.
    AtNominalTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationConfig {
    pub s: DMatrix<f64>,
    pub time: RelaxedTime,
    /// Below this `|Σ b_i b_j ⟨Sf_i, f_j⟩|` the step falls back to `γ = 1`.
    pub guard: f64,
}

impl RelaxationConfig {
    pub fn new(s: DMatrix<f64>) -> Self {
        RelaxationConfig {
            s,
            time: RelaxedTime::AtShiftedTime,
            guard: 1e-300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedStep {
    pub u: DVector<f64>,
    pub gamma: f64,
    /// Time advanced by the step.
    pub advance: f64,
    /// The denominator was below the guard and `γ = 1` was used.
    pub fallback: bool,
}

/// `u_{n+1} = u_n + Δt γ_n Σ b_i f_i` with
/// `γ_n = 2 Σ b_i a_ij ⟨Sf_i, f_j⟩ / Σ b_i b_j ⟨Sf_i, f_j⟩`.
pub fn relaxed_update(
    u_n: &DVector<f64>,
    fs: &[DVector<f64>],
    dt: f64,
    t: &ButcherTableau<f64>,
    cfg: &RelaxationConfig,
) -> RelaxedStep {
    let n = t.stages();
    let sf: Vec<DVector<f64>> = fs.iter().map(|f| &cfg.s * f).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let bi = t.b[i];
        if bi == 0.0 {
            continue;
        }
        for j in 0..n {
            let m = sf[i].dot(&fs[j]);
            num += bi * t.a[(i, j)] * m;
            den += bi * t.b[j] * m;
        }
    }
    num *= 2.0;
    let fallback = !(den.abs() > cfg.guard) || !num.is_finite();
    let gamma = if fallback { 1.0 } else { num / den };
    let mut u = u_n.clone();
    for (bi, fi) in t.b.iter().zip(fs) {
        if *bi != 0.0 {
            u.axpy(dt * gamma * bi, fi, 1.0);
        }
    }
    let advance = match cfg.time {
        RelaxedTime::AtShiftedTime => gamma * dt,
        RelaxedTime::AtNominalTime => dt,
    };
    RelaxedStep { u, gamma, advance, fallback }
}
