//! Fixed-step drivers: whole-interval integration, convergence studies and
//! long-time invariant drift.

use std::fmt::Write as _;

use nalgebra::{ComplexField, DVector};
use serde::Serialize;

use super::newton::{max_norm, SolverOptions};
use super::problem::{quadratic_form, IvpProblem};
use super::relax::{relaxed_update, RelaxationConfig};
use super::step::{check_triangular, collocation_step, sdc_step};
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::tableau::{ButcherTableau, NodeFamily, NodeKind, SdcMethod};

/// A one-step method to drive.
#[derive(Debug, Clone)]
pub enum Scheme {
    Sdc(SdcMethod<f64>),
    RungeKutta(ButcherTableau<f64>),
}

impl Scheme {
    pub fn step<F: ComplexField<RealField = f64> + Copy>(
        &self,
        p: &IvpProblem<F>,
        u: &DVector<F>,
        dt: f64,
        opts: &SolverOptions,
    ) -> Result<DVector<F>> {
        match self {
            Scheme::Sdc(m) => Ok(sdc_step(p, u, dt, m, opts)?.0),
            Scheme::RungeKutta(t) => Ok(collocation_step(p, u, dt, t, opts)?.0),
        }
    }
}

/// Gauss-Legendre with 8 stages, the reference integrator.
pub fn reference_tableau() -> Result<ButcherTableau<f64>> {
    Ok(NodeFamily::new(NodeKind::GaussLegendre, 8).tableau::<Real>(Precision(128))?.to_f64())
}

fn step_count(span: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(span > 0.0) {
        return Err(Error::InvalidArgument(format!("step {dt} over span {span}")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span || n < 1.0 {
        return Err(Error::InvalidArgument(format!("step {dt} does not divide the span {span}")));
    }
    Ok(n as usize)
}

/// Approximation of `u(t_end)` with `(t_end - t0)/dt` steps.
pub fn integrate<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    scheme: &Scheme,
    dt: f64,
    opts: &SolverOptions,
) -> Result<DVector<F>> {
    let n = step_count(p.t_end - p.t0, dt)?;
    let mut u = p.u0.clone();
    for _ in 0..n {
        u = scheme.step(p, &u, dt, opts)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    /// `(Δt, ‖u_N - u(t_end)‖∞)`.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log Δt` over points above
    /// the floor; `None` when fewer than two remain.
    pub slope: Option<f64>,
    pub floor: f64,
    pub saturated: bool,
    /// Difference between two reference refinements when no exact solution
    /// is known.
    pub reference_check: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub solver: SolverOptions,
    /// Errors at or below this are excluded from the fit.
    pub floor: f64,
    /// Reference step is `Δt_min / reference_refine`.
    pub reference_refine: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            solver: SolverOptions::default(),
            floor: 50.0 * f64::EPSILON,
            reference_refine: 2,
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_study<F: ComplexField<RealField = f64> + Copy>(
    p: &IvpProblem<F>,
    scheme: &Scheme,
    dts: &[f64],
    opts: &StudyOptions,
) -> Result<ConvergenceStudy> {
    if dts.is_empty() {
        return Err(Error::InvalidArgument("no step sizes".into()));
    }
    let span = p.t_end - p.t0;
    let (reference, check) = match &p.exact {
        Some(e) => (e(span), None),
        None => {
            let gauss = Scheme::RungeKutta(reference_tableau()?);
            let dt_min = dts.iter().copied().fold(f64::INFINITY, f64::min);
            let r = opts.reference_refine.max(2);
            let fine = integrate(p, &gauss, dt_min / r as f64, &opts.solver)?;
            let coarse = integrate(p, &gauss, dt_min / (r / 2) as f64, &opts.solver)?;
            let diff = max_norm(&(&fine - &coarse));
            (fine, Some(diff))
        }
    };
    let mut points = Vec::with_capacity(dts.len());
    for &dt in dts {
        let u = integrate(p, scheme, dt, &opts.solver)?;
        points.push((dt, max_norm(&(u - &reference))));
    }
    let kept: Vec<&(f64, f64)> = points.iter().filter(|(_, e)| *e > opts.floor).collect();
    let lx: Vec<f64> = kept.iter().map(|(d, _)| d.ln()).collect();
    let ly: Vec<f64> = kept.iter().map(|(_, e)| e.ln()).collect();
    let slope = fit_slope(&lx, &ly);
    Ok(ConvergenceStudy {
        saturated: slope.is_none(),
        points,
        slope,
        floor: opts.floor,
        reference_check: check,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub u: Vec<f64>,
    /// `uᵀSu`.
    pub h: f64,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// `max_n |H(u_n) - H(u_0)|` over all steps, sampled or not.
    pub max_drift: f64,
    pub gamma_range: Option<(f64, f64)>,
    pub fallbacks: usize,
}

impl Trajectory {
    /// `t,u_1..u_d,H,error` with an empty error column when untracked.
    pub fn to_csv(&self) -> String {
        let d = self.samples.first().map_or(0, |s| s.u.len());
        let mut out = String::from("t");
        for i in 1..=d {
            write!(out, ",u_{i}").unwrap();
        }
        out.push_str(",H,error\n");
        for s in &self.samples {
            write!(out, "{}", s.t).unwrap();
            for x in &s.u {
                write!(out, ",{x}").unwrap();
            }
            match s.error {
                Some(e) => writeln!(out, ",{},{e}", s.h).unwrap(),
                None => writeln!(out, ",{},", s.h).unwrap(),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeOptions {
    pub solver: SolverOptions,
    /// Record every n-th step.
    pub sample_every: usize,
    /// Substeps of the Gauss reference per step; `None` skips the error trace
    /// for problems without exact solution.
    pub reference_substeps: Option<usize>,
}

impl Default for LongTimeOptions {
    fn default() -> Self {
        LongTimeOptions {
            solver: SolverOptions::default(),
            sample_every: 10,
            reference_substeps: Some(4),
        }
    }
}

/// Integrates to `t_end` with fixed `Δt` (relaxed steps advance the clock by
/// `γ_n Δt` when so configured) and records the drift of `uᵀSu` and the
/// global error.
pub fn long_time_error_growth(
    p: &IvpProblem<f64>,
    method: &SdcMethod<f64>,
    relax: Option<&RelaxationConfig>,
    t_end: f64,
    dt: f64,
    opts: &LongTimeOptions,
) -> Result<Trajectory> {
    let s = relax
        .map(|c| c.s.clone())
        .or_else(|| p.invariant.clone())
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no quadratic invariant", p.name)))?;
    check_triangular(method)?;
    let n = step_count(t_end - p.t0, dt)?;
    let assembled = method.assemble()?;
    let gauss = reference_tableau()?;
    let h0 = quadratic_form(&s, &p.u0);
    let mut u = p.u0.clone();
    let mut reference = p.u0.clone();
    let mut t = p.t0;
    let mut max_drift = 0.0f64;
    let mut gamma_range: Option<(f64, f64)> = None;
    let mut fallbacks = 0;
    let every = opts.sample_every.max(1);
    let sample = |t: f64, u: &DVector<f64>, r: Option<&DVector<f64>>| TrajectorySample {
        t,
        u: u.iter().copied().collect(),
        h: quadratic_form(&s, u),
        error: r.map(|r| max_norm(&(u - r))),
    };
    let tracked = p.exact.is_some() || opts.reference_substeps.is_some();
    let mut samples = vec![sample(t, &u, tracked.then_some(&reference))];
    for step in 1..=n {
        let (next, advance) = match relax {
            None => (sdc_step(p, &u, dt, method, &opts.solver)?.0, dt),
            Some(cfg) => {
                let (_, diag) = sdc_step(p, &u, dt, method, &opts.solver)?;
                let r = relaxed_update(&u, &diag.flat_derivatives(), dt, &assembled, cfg);
                fallbacks += usize::from(r.fallback);
                let (lo, hi) = gamma_range.unwrap_or((r.gamma, r.gamma));
                gamma_range = Some((lo.min(r.gamma), hi.max(r.gamma)));
                (r.u, r.advance)
            }
        };
        if let Some(e) = &p.exact {
            reference = e(t + advance - p.t0);
        } else if let Some(m) = opts.reference_substeps {
            let h = advance / m as f64;
            for _ in 0..m {
                reference = collocation_step(p, &reference, h, &gauss, &opts.solver)?.0;
            }
        }
        u = next;
        t += advance;
        max_drift = max_drift.max((quadratic_form(&s, &u) - h0).abs());
        if step % every == 0 || step == n {
            samples.push(sample(t, &u, tracked.then_some(&reference)));
        }
    }
    Ok(Trajectory {
        samples,
        max_drift,
        gamma_range,
        fallbacks,
    })
}
