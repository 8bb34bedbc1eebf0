//! Newton's method for stage equations.

use nalgebra::{ComplexField, DMatrix, DVector};

use super::problem::IvpProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Converged once `‖δ‖∞ ≤ atol + rtol ‖u‖∞` (or the residual is that small).
    pub atol: f64,
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            atol: 1e-12,
            rtol: 1e-12,
            max_iter: 50,
        }
    }
}

pub(crate) fn max_norm<F: ComplexField<RealField = f64> + Copy>(v: &DVector<F>) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// Analytic Jacobian if the problem has one, else forward differences with
/// step `√eps (1 + ‖u‖)`.
pub(crate) fn jacobian<F: ComplexField<RealField = f64> + Copy>(p: &IvpProblem<F>, u: &DVector<F>) -> DMatrix<F> {
    if let Some(j) = &p.jacobian {
        return j(u);
    }
    let d = u.len();
    let f0 = p.f(u);
    let h = f64::EPSILON.sqrt() * (1.0 + max_norm(u));
    let mut jac = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut up = u.clone();
        up[k] += F::from_real(h);
        let col = (p.f(&up) - &f0) / F::from_real(h);
        jac.set_column(k, &col);
    }
    jac
}

pub(crate) struct NewtonOutcome<F: ComplexField> {
    pub u: DVector<F>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Solves `G(u) = 0` with Jacobian `dg`, starting from `u`.
pub(crate) fn newton<F, G, J>(mut u: DVector<F>, g: G, dg: J, opts: &SolverOptions) -> NewtonOutcome<F>
where
    F: ComplexField<RealField = f64> + Copy,
    G: Fn(&DVector<F>) -> DVector<F>,
    J: Fn(&DVector<F>) -> DMatrix<F>,
{
    let mut r = g(&u);
    let mut res = max_norm(&r);
    for it in 0..opts.max_iter {
        let scale = opts.atol + opts.rtol * max_norm(&u);
        // small corrections between sweeps are real; at least one step is taken
        if res == 0.0 || (it > 0 && res <= scale * 1e-3) {
            return NewtonOutcome { u, iterations: it, residual: res, converged: true };
        }
        let Some(delta) = dg(&u).lu().solve(&r) else {
            return NewtonOutcome { u, iterations: it, residual: res, converged: false };
        };
        u -= &delta;
        r = g(&u);
        res = max_norm(&r);
        if max_norm(&delta) <= scale || res <= scale * 1e-3 {
            return NewtonOutcome { u, iterations: it + 1, residual: res, converged: true };
        }
    }
    NewtonOutcome { u, iterations: opts.max_iter, residual: res, converged: false }
}
