//! Initial value problems and the built-in test problems.

use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::stability::C64;

pub type Rhs<F> = Arc<dyn Fn(&DVector<F>) -> DVector<F> + Send + Sync>;
pub type Jacobian<F> = Arc<dyn Fn(&DVector<F>) -> DMatrix<F> + Send + Sync>;
/// `u(t)` for the problem's own initial value.
pub type Exact<F> = Arc<dyn Fn(f64) -> DVector<F> + Send + Sync>;

/// Autonomous IVP `u' = f(u)`, `u(t0) = u0`.
#[derive(Clone)]
pub struct IvpProblem<F: ComplexField> {
    pub name: String,
    pub rhs: Rhs<F>,
    pub jacobian: Option<Jacobian<F>>,
    pub exact: Option<Exact<F>>,
    /// Symmetric `S` with `⟨Su, f(u)⟩ = 0`, so `uᵀSu` is conserved.
    pub invariant: Option<DMatrix<f64>>,
    pub u0: DVector<F>,
    pub t0: f64,
    pub t_end: f64,
}

impl<F: ComplexField<RealField = f64> + Copy> IvpProblem<F> {
    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn f(&self, u: &DVector<F>) -> DVector<F> {
        (self.rhs)(u)
    }

    pub fn with_span(mut self, t0: f64, t_end: f64) -> Self {
        self.t0 = t0;
        self.t_end = t_end;
        self
    }
}

impl std::fmt::Debug for IvpProblem<f64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IvpProblem({}, d = {})", self.name, self.u0.len())
    }
}

impl std::fmt::Debug for IvpProblem<C64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IvpProblem({}, d = {})", self.name, self.u0.len())
    }
}

/// `uᵀSu` for real states.
pub fn quadratic_form(s: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    u.dot(&(s * u))
}

/// `u' = λu` on `[0, 1]`, `u(0) = 1`, as a complex scalar problem.
pub fn dahlquist_problem(lambda: C64) -> IvpProblem<C64> {
    IvpProblem {
        name: format!("dahlquist({lambda})"),
        rhs: Arc::new(move |u: &DVector<C64>| u * lambda),
        jacobian: Some(Arc::new(move |_: &DVector<C64>| DMatrix::from_element(1, 1, lambda))),
        exact: Some(Arc::new(move |t: f64| DVector::from_element(1, (lambda * t).exp()))),
        invariant: None,
        u0: DVector::from_element(1, C64::new(1.0, 0.0)),
        t0: 0.0,
        t_end: 1.0,
    }
}

/// Moments of inertia `N` used by [`rigid_body_problem`].
pub const RIGID_BODY_N: [f64; 3] = [1.0, 3.0, 2.0];
/// `D = (N2 - N3, N3 - N1, N2 - N1)`.
pub const RIGID_BODY_D: [f64; 3] = [1.0, 1.0, 2.0];

/// Euler's rigid body in normalised variables on `[0, 10]`:
/// `Y' = (Y2 Y3, Y1 Y3, -Y1 Y2)`, `Y(0) = (1/√3, 1, 0)`, with the
/// Hamiltonian `H = uᵀSu`, `S = diag(D)/2`.
pub fn rigid_body_problem() -> IvpProblem<f64> {
    let s = DMatrix::from_diagonal(&DVector::from_iterator(3, RIGID_BODY_D.iter().map(|d| d / 2.0)));
    IvpProblem {
        name: "rigid-body".into(),
        rhs: Arc::new(|y: &DVector<f64>| DVector::from_vec(vec![y[1] * y[2], y[0] * y[2], -y[0] * y[1]])),
        jacobian: Some(Arc::new(|y: &DVector<f64>| {
            DMatrix::from_row_slice(3, 3, &[0.0, y[2], y[1], y[2], 0.0, y[0], -y[1], -y[0], 0.0])
        })),
        exact: None,
        invariant: Some(s),
        u0: DVector::from_vec(vec![1.0 / 3f64.sqrt(), 1.0, 0.0]),
        t0: 0.0,
        t_end: 10.0,
    }
}

/// Casimir `C = (N1 D1 Y1² + N2 D2 Y2² + N3 D3 Y3²)/2` of the rigid body.
pub fn rigid_body_casimir(y: &DVector<f64>) -> f64 {
    0.5 * (0..3).map(|i| RIGID_BODY_N[i] * RIGID_BODY_D[i] * y[i] * y[i]).sum::<f64>()
}
