//! Single steps of SDC and of the underlying collocation method.

use nalgebra::{ComplexField, DMatrix, DVector};

use super::newton::{jacobian, max_norm, newton, SolverOptions};
use super::problem::IvpProblem;
use crate::error::{Error, Result};
use crate::tableau::{ButcherTableau, SdcMethod};

/// Everything an SDC step computed on the way.
#[derive(Debug, Clone)]
pub struct StepDiagnostics<F: ComplexField> {
    /// `stages[k][i]` is `u^{[k,i]}`, `k = 0` the initial guess.
    pub stages: Vec<Vec<DVector<F>>>,
    /// `f(u^{[k,i]})`, laid out like `stages`.
    pub derivatives: Vec<Vec<DVector<F>>>,
    /// Newton iterations per stage solve, zero for explicit stages.
    pub newton_iterations: Vec<Vec<usize>>,
    /// Relaxation parameter, when relaxation was applied.
    pub gamma: Option<f64>,
}

impl<F: ComplexField<RealField = f64> + Copy> StepDiagnostics<F> {
    /// `max_i ‖u^{[k,i]} - u_i‖∞` per sweep against reference stages.
    pub fn stage_errors(&self, reference: &[DVector<F>]) -> Vec<f64> {
        self.stages
            .iter()
            .map(|st| st.iter().zip(reference).map(|(a, b)| max_norm(&(a - b))).fold(0.0, f64::max))
            .collect()
    }

    /// All stage derivatives in the order of the assembled tableau.
    pub fn flat_derivatives(&self) -> Vec<DVector<F>> {
        self.derivatives.iter().flatten().cloned().collect()
    }
}

/// Rejects EEDs that cannot be swept stage by stage.
pub fn check_triangular(method: &SdcMethod<f64>) -> Result<()> {
    for (k, eed) in method.schedule.mats().iter().enumerate() {
        if let Some((row, col)) = eed.m.first_upper_nonzero() {
            return Err(Error::UnsupportedSchedule { sweep: k, row, col });
        }
    }
    Ok(())
}

fn real<F: ComplexField<RealField = f64>>(x: f64) -> F {
    F::from_real(x)
}

/// Solves stage `i` of one sweep: `u = r + Δt ã_ii f(u)`.
fn solve_stage<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    r: DVector<F>,
    h_diag: f64,
    guess: &DVector<F>,
    stage: usize,
    opts: &SolverOptions,
) -> Result<(DVector<F>, usize)> {
    if h_diag == 0.0 {
        return Ok((r, 0));
    }
    let d = r.len();
    let hd: F = real(h_diag);
    let out = newton(
        guess.clone(),
        |u| u - &r - p.f(u) * hd,
        |u| DMatrix::identity(d, d) - jacobian(p, u) * hd,
        opts,
    );
    if !out.converged {
        return Err(Error::NewtonFailure {
            stage,
            iterations: out.iterations,
            residual: out.residual,
        });
    }
    Ok((out.u, out.iterations))
}

/// One sweep `u^{[k,i]} = u_n + Δt Σ_j (a_ij - ã_ij) f(u^{[k-1,j]}) + Δt Σ_{j≤i} ã_ij f(u^{[k,j]})`
/// with `prev_f = None` for the initial solve `u^{[0]} = u_n + Δt A_Δ^0 f(u^{[0]})`.
#[allow(clippy::too_many_arguments)]
fn sweep<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    u_n: &DVector<F>,
    dt: f64,
    a: &DMatrix<f64>,
    ad: &DMatrix<f64>,
    prev: &[DVector<F>],
    prev_f: Option<&[DVector<F>]>,
    opts: &SolverOptions,
) -> Result<(Vec<DVector<F>>, Vec<DVector<F>>, Vec<usize>)> {
    let s = a.nrows();
    let mut us: Vec<DVector<F>> = Vec::with_capacity(s);
    let mut fs: Vec<DVector<F>> = Vec::with_capacity(s);
    let mut its = Vec::with_capacity(s);
    for i in 0..s {
        let mut r = u_n.clone();
        if let Some(pf) = prev_f {
            for j in 0..s {
                let w = a[(i, j)] - ad[(i, j)];
                if w != 0.0 {
                    r.axpy(real(dt * w), &pf[j], F::one());
                }
            }
        }
        for j in 0..i {
            if ad[(i, j)] != 0.0 {
                r.axpy(real(dt * ad[(i, j)]), &fs[j], F::one());
            }
        }
        let (u, it) = solve_stage(p, r, dt * ad[(i, i)], &prev[i], i, opts)?;
        fs.push(p.f(&u));
        us.push(u);
        its.push(it);
    }
    Ok((us, fs, its))
}

/// One SDC step from `u_n` with step `Δt`.
pub fn sdc_step<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    u_n: &DVector<F>,
    dt: f64,
    method: &SdcMethod<f64>,
    opts: &SolverOptions,
) -> Result<(DVector<F>, StepDiagnostics<F>)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size {dt} is not positive")));
    }
    check_triangular(method)?;
    let a = method.underlying.a.to_f64();
    let s = a.nrows();
    let guess = vec![u_n.clone(); s];
    let init = method.schedule.initial().m.to_f64();
    let (mut us, mut fs, its) = sweep(p, u_n, dt, &init, &init, &guess, None, opts)?;
    let mut diag = StepDiagnostics {
        stages: vec![us.clone()],
        derivatives: vec![fs.clone()],
        newton_iterations: vec![its],
        gamma: None,
    };
    for k in 1..=method.sweeps() {
        let ad = method.schedule.get(k).m.to_f64();
        let (nu, nf, its) = sweep(p, u_n, dt, &a, &ad, &us, Some(&fs), opts)?;
        us = nu;
        fs = nf;
        diag.stages.push(us.clone());
        diag.derivatives.push(fs.clone());
        diag.newton_iterations.push(its);
    }
    let next = match method.stage_combination() {
        None => {
            let mut u = u_n.clone();
            for (bj, fj) in method.underlying.b.iter().zip(&fs) {
                u.axpy(real(dt * bj), fj, F::one());
            }
            u
        }
        Some(w) => {
            let mut u = u_n.clone();
            for (wi, ui) in w.iter().zip(&us) {
                if *wi != 0.0 {
                    u.axpy(real(*wi), &(ui - u_n), F::one());
                }
            }
            u
        }
    };
    Ok((next, diag))
}

/// One step of the Runge-Kutta method `t`, solving all `s·d` stage equations
/// together. Returns the new state and the stages.
pub fn collocation_step<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    u_n: &DVector<F>,
    dt: f64,
    t: &ButcherTableau<f64>,
    opts: &SolverOptions,
) -> Result<(DVector<F>, Vec<DVector<F>>)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size {dt} is not positive")));
    }
    let a = t.a.to_f64();
    let s = t.stages();
    let d = u_n.len();
    let split = |x: &DVector<F>| -> Vec<DVector<F>> { (0..s).map(|i| x.rows(i * d, d).into_owned()).collect() };
    let g = |x: &DVector<F>| {
        let fs: Vec<DVector<F>> = split(x).iter().map(|u| p.f(u)).collect();
        let mut out = x.clone();
        for i in 0..s {
            let mut r = out.rows_mut(i * d, d);
            r -= u_n;
            for j in 0..s {
                if a[(i, j)] != 0.0 {
                    r -= &fs[j] * real::<F>(dt * a[(i, j)]);
                }
            }
        }
        out
    };
    let dg = |x: &DVector<F>| {
        let js: Vec<DMatrix<F>> = split(x).iter().map(|u| jacobian(p, u)).collect();
        let mut m = DMatrix::<F>::identity(s * d, s * d);
        for i in 0..s {
            for j in 0..s {
                if a[(i, j)] != 0.0 {
                    let mut blk = m.view_mut((i * d, j * d), (d, d));
                    blk -= &js[j] * real::<F>(dt * a[(i, j)]);
                }
            }
        }
        m
    };
    let x0 = DVector::from_iterator(s * d, (0..s).flat_map(|_| u_n.iter().copied()));
    let out = newton(x0, g, dg, opts);
    if !out.converged {
        return Err(Error::NewtonFailure {
            stage: 0,
            iterations: out.iterations,
            residual: out.residual,
        });
    }
    let stages = split(&out.u);
    let mut next = u_n.clone();
    for (bj, uj) in t.b.iter().zip(&stages) {
        next.axpy(real(dt * bj), &p.f(uj), F::one());
    }
    Ok((next, stages))
}
