//! Collocation nodes on `[0, 1]` and the collocation tableau they define.

use serde::{Deserialize, Serialize};

use super::poly;
use super::ButcherTableau;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Precision, Scalar};

/// Largest stage count accepted by [`make_nodes`].
pub const MAX_STAGES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    GaussLegendre,
    RadauIIA,
    LobattoIIIA,
    /// `c_i = i / s`.
    Equidistant,
}

impl NodeKind {
    /// Classical order of the `s`-stage collocation method.
    pub fn order(self, s: usize) -> usize {
        match self {
            NodeKind::GaussLegendre => 2 * s,
            NodeKind::RadauIIA => 2 * s - 1,
            NodeKind::LobattoIIIA => 2 * s - 2,
            NodeKind::Equidistant => s,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::GaussLegendre => "gauss",
            NodeKind::RadauIIA => "radau",
            NodeKind::LobattoIIIA => "lobatto",
            NodeKind::Equidistant => "equid",
        }
    }

    pub fn parse(s: &str) -> Result<NodeKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gauss" | "gauss-legendre" | "legendre" => Ok(NodeKind::GaussLegendre),
            "radau" | "radau-iia" | "radauiia" | "radau-right" => Ok(NodeKind::RadauIIA),
            "lobatto" | "lobatto-iiia" | "lobattoiiia" => Ok(NodeKind::LobattoIIIA),
            "equid" | "equidistant" | "uniform" => Ok(NodeKind::Equidistant),
            other => Err(Error::InvalidArgument(format!("unknown node family {other:?}"))),
        }
    }

    /// True when the last node is `1`.
    pub fn ends_at_one(self) -> bool {
        !matches!(self, NodeKind::GaussLegendre)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeFamily {
    pub kind: NodeKind,
    pub s: usize,
}

impl NodeFamily {
    pub fn new(kind: NodeKind, s: usize) -> NodeFamily {
        NodeFamily { kind, s }
    }

    pub fn order(&self) -> usize {
        self.kind.order(self.s)
    }

    /// Nodes and collocation tableau in one call.
    pub fn tableau<T: Scalar>(&self, prec: Precision) -> Result<ButcherTableau<T>> {
        collocation_tableau(&make_nodes(*self, prec)?)
    }
}

/// Collocation nodes of the family, strictly increasing.
///
/// Interior nodes are the roots of the family's defining polynomial after the
/// endpoint roots have been divided out. Newton's method started to the right
/// of all roots of a real-rooted polynomial decreases monotonically to the
/// largest root, so roots are extracted from the right, each one deflated
/// away and then polished on the undeflated polynomial.
pub fn make_nodes<T: Scalar>(family: NodeFamily, prec: Precision) -> Result<Vec<T>> {
    let s = family.s;
    if s == 0 || s > MAX_STAGES {
        return Err(Error::ResourceLimit {
            what: "stage count",
            requested: s,
            cap: MAX_STAGES,
        });
    }
    let one = T::one(prec);
    let (poly_full, mut lower, mut upper): (Vec<T>, Vec<T>, Vec<T>) = match family.kind {
        NodeKind::Equidistant => {
            return Ok((1..=s as i64).map(|i| T::ratio(i, s as i64, prec)).collect());
        }
        NodeKind::GaussLegendre => (poly::shifted_legendre(s, prec), vec![], vec![]),
        NodeKind::RadauIIA => {
            let mut p = poly::shifted_legendre::<T>(s, prec);
            let q = poly::shifted_legendre::<T>(s - 1, prec);
            for (pk, qk) in p.iter_mut().zip(q) {
                *pk -= qk;
            }
            let interior = poly::deflate(&p, &one);
            (interior, vec![], vec![one.clone()])
        }
        NodeKind::LobattoIIIA => {
            if s < 2 {
                return Err(Error::InvalidArgument("Lobatto nodes need s >= 2".into()));
            }
            let p = poly::derivative(&poly::shifted_legendre::<T>(s - 1, prec));
            (p, vec![T::zero(prec)], vec![one.clone()])
        }
    };
    let mut interior = real_roots_descending(&poly_full)?;
    interior.reverse();
    if family.kind == NodeKind::GaussLegendre {
        symmetrize(&mut interior);
    }
    lower.append(&mut interior);
    lower.append(&mut upper);
    Ok(lower)
}

fn symmetrize<T: Scalar>(c: &mut [T]) {
    let n = c.len();
    let one = T::one(c[0].precision());
    let half = T::ratio(1, 2, c[0].precision());
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let lo = (c[i].clone() + (one.clone() - &c[j])) * &half;
        c[j] = one.clone() - &lo;
        c[i] = lo;
    }
    if n % 2 == 1 {
        c[n / 2] = half;
    }
}

fn real_roots_descending<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    let degree = p.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let prec = p[0].precision();
    let mut work = p.to_vec();
    let mut roots: Vec<T> = Vec::with_capacity(degree);
    let mut x = T::one(prec);
    for index in 0..degree {
        x = newton_from_right(&work, x, 4000);
        let polished = polish(p, x.clone(), index)?;
        work = poly::deflate(&work, &polished);
        roots.push(polished.clone());
        x = polished;
    }
    Ok(roots)
}

fn newton_from_right<T: Scalar>(p: &[T], mut x: T, cap: usize) -> T {
    for _ in 0..cap {
        let (v, d) = poly::eval_with_derivative(p, &x);
        if d.is_zero() || v.is_zero() {
            break;
        }
        let next = x.clone() - v / d;
        if next >= x {
            break;
        }
        x = next;
    }
    x
}

fn polish<T: Scalar>(p: &[T], mut x: T, index: usize) -> Result<T> {
    let prec = x.precision();
    let eps = T::epsilon(prec);
    for _ in 0..60 {
        let (v, d) = poly::eval_with_derivative(p, &x);
        if v.is_zero() || d.is_zero() {
            break;
        }
        let step = v / d;
        x -= &step;
        if step.abs() <= eps.clone() * &T::from_i64(4, prec) {
            break;
        }
    }
    let residual = poly::eval(p, &x).abs();
    let scale = poly::abs_scale(p, &x);
    if residual > scale * &eps * &T::from_i64(1 << 12, prec) {
        return Err(Error::RootFinding {
            index,
            residual: residual.to_f64(),
        });
    }
    Ok(x)
}

/// Monomial coefficients of the Lagrange basis polynomials for `c`.
fn lagrange_basis<T: Scalar>(c: &[T]) -> Vec<Vec<T>> {
    let prec = c[0].precision();
    let s = c.len();
    (0..s)
        .map(|j| {
            let mut p = vec![T::one(prec)];
            for m in 0..s {
                if m == j {
                    continue;
                }
                let d = c[j].clone() - &c[m];
                let lin = vec![-(c[m].clone() / &d), T::one(prec) / d];
                p = poly::mul(&p, &lin);
            }
            p
        })
        .collect()
}

fn check_gaps<T: Scalar>(c: &[T]) -> Result<()> {
    let prec = c[0].precision();
    // entries of A scale like gap^{-(s-1)}; a quarter of the mantissa is the
    // most cancellation tolerated
    let eps = T::epsilon(prec).to_f64().max(f64::MIN_POSITIVE);
    let threshold = eps.powf(0.25);
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let gap = (c[i].clone() - &c[j]).abs().to_f64();
            if gap < threshold {
                return Err(Error::IllConditioned { i, j, gap });
            }
        }
    }
    Ok(())
}

/// `a_ij = ∫_0^{c_i} ℓ_j`, `b_j = ∫_0^1 ℓ_j` for the Lagrange basis `ℓ_j`.
pub fn collocation_tableau<T: Scalar>(c: &[T]) -> Result<ButcherTableau<T>> {
    if c.is_empty() {
        return Err(Error::InvalidArgument("no nodes".into()));
    }
    check_gaps(c)?;
    let prec = c[0].precision();
    let basis = lagrange_basis(c);
    let s = c.len();
    let a = Matrix::from_fn(s, s, |i, j| poly::integrate_from_zero(&basis[j], &c[i]));
    let one = T::one(prec);
    let b = basis
        .iter()
        .map(|l| poly::integrate_from_zero(l, &one))
        .collect();
    ButcherTableau::new(a, b, c.to_vec())
}

/// `ℓ_i(1)` for every node, the weights of polynomial extrapolation to `1`.
pub fn lagrange_at_one<T: Scalar>(c: &[T]) -> Vec<T> {
    let one = T::one(c[0].precision());
    lagrange_basis(c).iter().map(|l| poly::eval(l, &one)).collect()
}
