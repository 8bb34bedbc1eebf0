use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::matrix::Matrix;
use crate::scalar::Precision;
use crate::stability::{stability_function, C64};
use crate::tableau::{parse_schedule, ButcherTableau, EedMatrix, EedSchedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};

const F: Precision = Precision::F64;

fn sdc(kind: NodeKind, s: usize, sched: &str, k: usize, mode: FinalUpdate) -> SdcMethod<f64> {
    let t = NodeFamily::new(kind, s).tableau::<f64>(F).unwrap();
    let sc = parse_schedule(sched).unwrap().build(&t, k).unwrap();
    SdcMethod::new(t, sc, mode).unwrap()
}

fn zero_problem() -> IvpProblem<f64> {
    IvpProblem {
        name: "zero".into(),
        rhs: Arc::new(|u: &DVector<f64>| DVector::zeros(u.len())),
        jacobian: None,
        exact: None,
        invariant: Some(DMatrix::identity(2, 2)),
        u0: DVector::from_vec(vec![0.3, -1.0]),
        t0: 0.0,
        t_end: 1.0,
    }
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn sweep_matches_stability_function() {
    let p = dahlquist_problem(C64::new(-1.0, 0.0));
    let m = sdc(NodeKind::RadauIIA, 3, "zero,jumper", 2, FinalUpdate::LastStage);
    let (u, diag) = sdc_step(&p, &p.u0, 0.1, &m, &opts()).unwrap();
    let r = stability_function(&m.assemble().unwrap(), C64::new(-0.1, 0.0)).unwrap();
    assert!((u[0] - r).norm() < 1e-13);
    assert_eq!(diag.stages.len(), 3);
    assert!(diag.newton_iterations[1].iter().all(|&n| n >= 1));
}

#[test]
fn zero_field_keeps_state() {
    let p = zero_problem();
    for sched in ["zero,jumper", "ie", "zero,ee", "trap"] {
        for mode in [FinalUpdate::Quadrature, FinalUpdate::LastStage] {
            let m = sdc(NodeKind::RadauIIA, 3, sched, 2, mode);
            assert_eq!(sdc_step(&p, &p.u0, 0.5, &m, &opts()).unwrap().0, p.u0);
        }
    }
    let rk = NodeFamily::new(NodeKind::GaussLegendre, 2).tableau::<f64>(F).unwrap();
    assert_eq!(collocation_step(&p, &p.u0, 0.5, &rk, &opts()).unwrap().0, p.u0);
    let cfg = RelaxationConfig::new(DMatrix::identity(2, 2));
    let r = relaxed_update(&p.u0, &[p.f(&p.u0), p.f(&p.u0)], 0.5, &rk, &cfg);
    assert!(r.fallback);
    assert_eq!(r.gamma, 1.0);
    assert_eq!(r.u, p.u0);
}

#[test]
fn converged_sweeps_reproduce_collocation_stages() {
    // the collocation stages are the fixed point of every sweep
    let p = rigid_body_problem();
    let m = sdc(NodeKind::GaussLegendre, 3, "zero,ie", 40, FinalUpdate::Quadrature);
    let (u, diag) = sdc_step(&p, &p.u0, 0.2, &m, &opts()).unwrap();
    let (uc, stages) = collocation_step(&p, &p.u0, 0.2, &m.underlying, &opts()).unwrap();
    let errs = diag.stage_errors(&stages);
    assert!(errs[40] < 1e-12, "{errs:?}");
    assert!(errs[1] > errs[10] && errs[10] > errs[20]);
    assert!((u - uc).amax() < 1e-12);
    let coll = sdc(NodeKind::GaussLegendre, 3, "zero,coll", 1, FinalUpdate::Quadrature);
    assert!(sdc_step(&p, &p.u0, 0.2, &coll, &opts()).is_err());
}

#[test]
fn collocation_on_dahlquist() {
    let p = dahlquist_problem(C64::new(-2.0, 1.0));
    for (kind, s) in [(NodeKind::GaussLegendre, 3), (NodeKind::RadauIIA, 2), (NodeKind::LobattoIIIA, 3)] {
        let t = NodeFamily::new(kind, s).tableau::<f64>(F).unwrap();
        let (u, _) = collocation_step(&p, &p.u0, 0.3, &t, &opts()).unwrap();
        let r = stability_function(&t, C64::new(-0.6, 0.3)).unwrap();
        assert!((u[0] - r).norm() < 1e-13);
    }
    let mid = NodeFamily::new(NodeKind::GaussLegendre, 1).tableau::<f64>(F).unwrap();
    let q = dahlquist_problem(C64::new(-1.0, 0.0));
    let (u, _) = collocation_step(&q, &q.u0, 0.5, &mid, &opts()).unwrap();
    assert!((u[0].re - (1.0 - 0.25) / (1.0 + 0.25)).abs() < 1e-15);
}

#[test]
fn dahlquist_exact_flow() {
    let p = dahlquist_problem(C64::new(-1.0, 0.0));
    assert!((p.exact.as_ref().unwrap()(1.0)[0].re - (-1f64).exp()).abs() < 1e-16);
    let rot = dahlquist_problem(C64::new(0.0, 1.0));
    for t in [0.3, 2.0, 17.0] {
        assert!((rot.exact.as_ref().unwrap()(t)[0].norm() - 1.0).abs() < 1e-15);
    }
    let flat = dahlquist_problem(C64::new(0.0, 0.0));
    assert_eq!(flat.exact.as_ref().unwrap()(5.0)[0], C64::new(1.0, 0.0));
}

#[test]
fn rigid_body_definition() {
    let p = rigid_body_problem();
    let s = p.invariant.clone().unwrap();
    assert!((quadratic_form(&s, &p.u0) - 2.0 / 3.0).abs() < 1e-15);
    let f0 = p.f(&p.u0);
    assert!(f0[0].abs() < 1e-16 && f0[1].abs() < 1e-16);
    assert!((f0[2] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let u = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
        let f = p.f(&u);
        assert!((&s * &u).dot(&f).abs() < 1e-14);
        // Casimir is conserved as well
        let grad = DVector::from_fn(3, |i, _| RIGID_BODY_N[i] * RIGID_BODY_D[i] * u[i]);
        assert!(grad.dot(&f).abs() < 1e-13);
    }
    assert!(rigid_body_casimir(&p.u0) > 0.0);
}

#[test]
fn finite_difference_jacobian_is_enough() {
    let mut p = rigid_body_problem();
    let t = NodeFamily::new(NodeKind::GaussLegendre, 3).tableau::<f64>(F).unwrap();
    let (a, _) = collocation_step(&p, &p.u0, 0.1, &t, &opts()).unwrap();
    p.jacobian = None;
    let (b, _) = collocation_step(&p, &p.u0, 0.1, &t, &opts()).unwrap();
    assert!((a - b).amax() < 1e-13);
}

#[test]
fn gauss_conserves_the_hamiltonian() {
    let p = rigid_body_problem();
    let s = p.invariant.clone().unwrap();
    let t = NodeFamily::new(NodeKind::GaussLegendre, 3).tableau::<f64>(F).unwrap();
    let mut u = p.u0.clone();
    for _ in 0..20 {
        let (next, stages) = collocation_step(&p, &u, 1e-4, &t, &opts()).unwrap();
        assert!((quadratic_form(&s, &next) - quadratic_form(&s, &u)).abs() < 1e-14);
        let fs: Vec<DVector<f64>> = stages.iter().map(|x| p.f(x)).collect();
        let r = relaxed_update(&u, &fs, 1e-4, &t, &RelaxationConfig::new(s.clone()));
        assert!((r.gamma - 1.0).abs() < 1e-10, "{}", r.gamma);
        u = next;
    }
}

#[test]
fn relaxed_sdc_step_conserves() {
    let p = rigid_body_problem();
    let s = p.invariant.clone().unwrap();
    let m = sdc(NodeKind::GaussLegendre, 3, "zero,ee", 2, FinalUpdate::Quadrature);
    let big = m.assemble().unwrap();
    let cfg = RelaxationConfig::new(s.clone());
    let mut u = p.u0.clone();
    for _ in 0..50 {
        let (plain, diag) = sdc_step(&p, &u, 0.1, &m, &opts()).unwrap();
        let r = relaxed_update(&u, &diag.flat_derivatives(), 0.1, &big, &cfg);
        assert!((quadratic_form(&s, &r.u) - quadratic_form(&s, &u)).abs() < 1e-13);
        // the assembled weights reproduce the plain step at γ = 1
        let one = RelaxationConfig { guard: f64::INFINITY, ..cfg.clone() };
        assert!((relaxed_update(&u, &diag.flat_derivatives(), 0.1, &big, &one).u - plain).amax() < 1e-14);
        assert!((r.advance - 0.1 * r.gamma).abs() < 1e-16);
        u = r.u;
    }
    let nominal = RelaxationConfig { time: RelaxedTime::AtNominalTime, ..cfg };
    let (_, diag) = sdc_step(&p, &u, 0.1, &m, &opts()).unwrap();
    assert_eq!(relaxed_update(&u, &diag.flat_derivatives(), 0.1, &big, &nominal).advance, 0.1);
}

#[test]
fn zero_start_plus_one_sweep_equals_direct_solve() {
    // valid when the EED rows sum to the nodes
    let p = rigid_body_problem();
    let a = sdc(NodeKind::RadauIIA, 3, "zero,ie", 1, FinalUpdate::LastStage);
    let b = sdc(NodeKind::RadauIIA, 3, "ie", 1, FinalUpdate::LastStage);
    let (_, da) = sdc_step(&p, &p.u0, 0.3, &a, &opts()).unwrap();
    let (_, db) = sdc_step(&p, &p.u0, 0.3, &b, &opts()).unwrap();
    for (x, y) in da.stages[1].iter().zip(&db.stages[0]) {
        assert!((x - y).amax() < 1e-12);
    }
}

#[test]
fn unsupported_and_failing_steps() {
    let p = rigid_body_problem();
    let t = NodeFamily::new(NodeKind::RadauIIA, 2).tableau::<f64>(F).unwrap();
    let upper = EedMatrix::custom(Matrix::from_rows(vec![vec![0.5, 0.1], vec![0.0, 0.5]]).unwrap());
    let m = SdcMethod::new(
        t.clone(),
        EedSchedule::new(vec![EedMatrix::zero(2, F), upper]).unwrap(),
        FinalUpdate::LastStage,
    )
    .unwrap();
    assert!(matches!(
        sdc_step(&p, &p.u0, 0.1, &m, &opts()),
        Err(crate::Error::UnsupportedSchedule { sweep: 1, row: 0, col: 1 })
    ));
    let ie = sdc(NodeKind::RadauIIA, 2, "zero,ie", 1, FinalUpdate::LastStage);
    let tight = SolverOptions { max_iter: 0, ..opts() };
    assert!(matches!(
        sdc_step(&p, &p.u0, 0.1, &ie, &tight),
        Err(crate::Error::NewtonFailure { stage: 0, .. })
    ));
    assert!(sdc_step(&p, &p.u0, 0.0, &ie, &opts()).is_err());
    let _ = ButcherTableau::<f64>::from_ab(t.a.clone(), t.b.clone()).unwrap();
}

#[test]
fn jumper_convergence_on_dahlquist() {
    let p = dahlquist_problem(C64::new(-1.0, 0.0));
    let m = sdc(NodeKind::RadauIIA, 6, "zero,jumper", 2, FinalUpdate::LastStage);
    let dts: Vec<f64> = (2..=6).map(|e| 0.5f64.powi(e)).collect();
    let st = convergence_study(&p, &Scheme::Sdc(m), &dts, &StudyOptions::default()).unwrap();
    let slope = st.slope.unwrap();
    assert!((slope - 4.0).abs() < 0.2, "{st:?}");
    assert!(st.reference_check.is_none());
    assert!(fit_slope(&[1.0], &[1.0]).is_none());
    assert!(integrate(&p, &Scheme::RungeKutta(reference_tableau().unwrap()), 0.3, &opts()).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let p = rigid_body_problem();
    let m = sdc(NodeKind::GaussLegendre, 2, "zero,ee", 1, FinalUpdate::Quadrature);
    let o = LongTimeOptions { sample_every: 5, ..LongTimeOptions::default() };
    let tr = long_time_error_growth(&p, &m, None, 1.0, 0.1, &o).unwrap();
    assert_eq!(tr.samples.len(), 3);
    let csv = tr.to_csv();
    assert!(csv.starts_with("t,u_1,u_2,u_3,H,error\n"));
    assert!(tr.samples[2].error.unwrap() > 0.0);
    assert!(tr.gamma_range.is_none());
}
