//! Simplifying assumptions `B(p)`, `C(η)`, `D(ζ)` and their EED analogues
//! `C_W(η)`, `D_Y(ζ)`.

use serde::Serialize;

use super::eed::EedMatrix;
use super::ButcherTableau;
use crate::scalar::{Precision, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub p_b: usize,
    pub eta_c: usize,
    pub zeta_d: usize,
    /// Largest `η` with `C_W(η)`, when an EED was supplied.
    pub eta_w: Option<usize>,
    /// Largest `ζ` with `D_Y(ζ)`, when an EED was supplied.
    pub zeta_y: Option<usize>,
    /// `W_1..W_{η_w}`.
    pub w: Vec<f64>,
    /// `Y_1..Y_{ζ_y}`.
    pub y: Vec<f64>,
    pub tolerance: f64,
    pub qmax: usize,
}

fn default_tol<T: Scalar>(prec: Precision) -> T {
    T::pow10_neg(prec.decimal_digits().saturating_sub(10).max(4), prec)
}

fn within<T: Scalar>(lhs: &T, rhs: &T, tol: &T) -> bool {
    let one = T::one(lhs.precision());
    let scale = T::max_of(one, rhs.abs());
    (lhs.clone() - rhs).abs() <= tol.clone() * scale
}

/// Largest `q ≤ qmax` such that `holds(1..=q)`.
fn longest(qmax: usize, mut holds: impl FnMut(u32) -> bool) -> usize {
    (1..=qmax as u32).take_while(|&q| holds(q)).count()
}

/// Checks the simplifying assumptions up to `qmax`. `tol = None` uses
/// `10^-(digits-10)` for the tableau's precision.
pub fn check_simplifying<T: Scalar>(
    t: &ButcherTableau<T>,
    eed: Option<&EedMatrix<T>>,
    qmax: usize,
    tol: Option<T>,
) -> AssumptionReport {
    let prec = t.precision();
    let tol = tol.unwrap_or_else(|| default_tol(prec));
    let s = t.stages();
    let (a, b, c) = (&t.a, &t.b, &t.c);
    let cpow = |i: usize, q: u32| c[i].powi(q);
    let qf = |q: u32| T::from_i64(q as i64, prec);

    let p_b = longest(qmax, |q| {
        let lhs: T = sum(prec, (0..s).map(|i| b[i].clone() * cpow(i, q - 1)));
        within(&lhs, &(T::one(prec) / qf(q)), &tol)
    });
    let eta_c = longest(qmax, |q| {
        (0..s).all(|i| {
            let lhs = sum(prec, (0..s).map(|j| a[(i, j)].clone() * cpow(j, q - 1)));
            within(&lhs, &(cpow(i, q) / qf(q)), &tol)
        })
    });
    let zeta_d = longest(qmax, |q| {
        (0..s).all(|j| {
            let lhs = sum(prec, (0..s).map(|i| b[i].clone() * cpow(i, q - 1) * &a[(i, j)]));
            let rhs = b[j].clone() * (T::one(prec) - cpow(j, q)) / qf(q);
            within(&lhs, &rhs, &tol)
        })
    });

    let (mut eta_w, mut zeta_y, mut w, mut y) = (None, None, Vec::new(), Vec::new());
    if let Some(e) = eed {
        let m = &e.m;
        let mut ws = Vec::new();
        let n = longest(qmax, |q| match w_constant(m, c, q, &tol) {
            Some(wq) => {
                ws.push(wq.to_f64());
                true
            }
            None => false,
        });
        ws.truncate(n);
        eta_w = Some(n);
        w = ws;

        let mut ys = Vec::new();
        let n = longest(qmax, |q| {
            let col = |j: usize| sum(prec, (0..s).map(|i| b[i].clone() * cpow(i, q - 1) * &m[(i, j)]));
            let first = col(0);
            if !(1..s).all(|j| within(&col(j), &first, &tol)) {
                return false;
            }
            let denom = sum(prec, (0..s).map(|j| b[j].clone() * cpow(j, q)));
            if denom.is_zero() {
                return false;
            }
            ys.push((first / denom).to_f64());
            true
        });
        ys.truncate(n);
        zeta_y = Some(n);
        y = ys;
    }

    AssumptionReport {
        p_b,
        eta_c,
        zeta_d,
        eta_w,
        zeta_y,
        w,
        y,
        tolerance: tol.to_f64(),
        qmax,
    }
}

// W_q with Σ_j ã_ij c_j^{q-1} = c_i^q W_q for every row, if one exists.
fn w_constant<T: Scalar>(m: &crate::Matrix<T>, c: &[T], q: u32, tol: &T) -> Option<T> {
    let prec = c[0].precision();
    let s = c.len();
    let rows: Vec<T> = (0..s)
        .map(|i| sum(prec, (0..s).map(|j| m[(i, j)].clone() * c[j].powi(q - 1))))
        .collect();
    let pivot = (0..s).max_by(|&i, &j| c[i].abs().partial_cmp(&c[j].abs()).unwrap())?;
    if c[pivot].is_zero() {
        return None;
    }
    let wq = rows[pivot].clone() / c[pivot].powi(q);
    (0..s)
        .all(|i| within(&rows[i], &(c[i].powi(q) * &wq), tol))
        .then_some(wq)
}

fn sum<T: Scalar>(prec: Precision, it: impl Iterator<Item = T>) -> T {
    let mut acc = T::zero(prec);
    for v in it {
        acc += v;
    }
    acc
}

/// True iff the last row of `A` equals `b` within `tol`.
pub fn is_stiffly_accurate<T: Scalar>(t: &ButcherTableau<T>, tol: f64) -> bool {
    let s = t.stages();
    let prec = t.precision();
    let tol = T::from_f64(tol, prec);
    (0..s).all(|j| (t.a[(s - 1, j)].clone() - &t.b[j]).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Real;
    use crate::tableau::{make_eed, EedKind, NodeFamily, NodeKind};

    fn report(kind: NodeKind, s: usize) -> AssumptionReport {
        let t: ButcherTableau<Real> = NodeFamily::new(kind, s).tableau(Precision(256)).unwrap();
        check_simplifying(&t, None, 3 * s, None)
    }

    #[test]
    fn collocation_families() {
        let g = report(NodeKind::GaussLegendre, 2);
        assert_eq!((g.p_b, g.eta_c, g.zeta_d), (4, 2, 2));
        let r = report(NodeKind::RadauIIA, 3);
        assert_eq!((r.p_b, r.eta_c, r.zeta_d), (5, 3, 2));
        let l = report(NodeKind::LobattoIIIA, 4);
        assert_eq!((l.p_b, l.eta_c, l.zeta_d), (6, 4, 2));
        for s in 1..=6 {
            let g = report(NodeKind::GaussLegendre, s);
            assert_eq!((g.p_b, g.eta_c, g.zeta_d), (2 * s, s, s));
        }
    }

    #[test]
    fn half_diagonal_has_constant_w() {
        let p = Precision(256);
        for kind in [NodeKind::GaussLegendre, NodeKind::RadauIIA, NodeKind::Equidistant] {
            let t: ButcherTableau<Real> = NodeFamily::new(kind, 4).tableau(p).unwrap();
            let e = make_eed(EedKind::Diagonal(crate::tableau::Ratio::new(1, 2)), &t).unwrap();
            let r = check_simplifying(&t, Some(&e), 7, None);
            assert_eq!(r.eta_w, Some(7));
            assert!(r.w.iter().all(|&w| (w - 0.5).abs() < 1e-15));
        }
    }

    #[test]
    fn collocation_as_eed_gives_w_one_over_q() {
        // A itself satisfies C_W(s) with W_q = 1/q
        let p = Precision(256);
        let t: ButcherTableau<Real> = NodeFamily::new(NodeKind::RadauIIA, 3).tableau(p).unwrap();
        let e = EedMatrix::custom(t.a.clone());
        let r = check_simplifying(&t, Some(&e), 5, None);
        assert_eq!(r.eta_w, Some(3));
        for (q, w) in r.w.iter().enumerate() {
            assert!((w - 1.0 / (q as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn stiff_accuracy() {
        let p = Precision::F64;
        let r = NodeFamily::new(NodeKind::RadauIIA, 2).tableau::<f64>(p).unwrap();
        assert!(is_stiffly_accurate(&r, 1e-14));
        let g = NodeFamily::new(NodeKind::GaussLegendre, 2).tableau::<f64>(p).unwrap();
        assert!(!is_stiffly_accurate(&g, 1e-14));
    }
}
