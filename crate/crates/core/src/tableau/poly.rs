//! Dense polynomials in the monomial basis, coefficients in ascending order.

use crate::scalar::{Precision, Scalar};

pub(crate) fn eval<T: Scalar>(p: &[T], x: &T) -> T {
    let mut acc = p[p.len() - 1].clone();
    for c in p[..p.len() - 1].iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Value and first derivative by Horner's scheme.
pub(crate) fn eval_with_derivative<T: Scalar>(p: &[T], x: &T) -> (T, T) {
    let prec = x.precision();
    let mut v = p[p.len() - 1].clone();
    let mut d = T::zero(prec);
    for c in p[..p.len() - 1].iter().rev() {
        d = d * x + &v;
        v = v * x + c;
    }
    (v, d)
}

/// `Σ |p_k| |x|^k`, the natural scale for a residual `p(x)`.
pub(crate) fn abs_scale<T: Scalar>(p: &[T], x: &T) -> T {
    let ax = x.abs();
    let mut acc = p[p.len() - 1].abs();
    for c in p[..p.len() - 1].iter().rev() {
        acc = acc * &ax + c.abs();
    }
    acc
}

pub(crate) fn derivative<T: Scalar>(p: &[T]) -> Vec<T> {
    let prec = p[0].precision();
    if p.len() == 1 {
        return vec![T::zero(prec)];
    }
    p[1..]
        .iter()
        .enumerate()
        .map(|(k, c)| c.clone() * T::from_i64(k as i64 + 1, prec))
        .collect()
}

pub(crate) fn mul<T: Scalar>(p: &[T], q: &[T]) -> Vec<T> {
    let prec = p[0].precision();
    let mut out = vec![T::zero(prec); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            out[i + j].mul_add_assign(a, b);
        }
    }
    out
}

/// Divides by `(x - r)`, dropping the remainder.
pub(crate) fn deflate<T: Scalar>(p: &[T], r: &T) -> Vec<T> {
    let n = p.len() - 1;
    let mut q = vec![T::zero(r.precision()); n];
    let mut carry = p[n].clone();
    for k in (0..n).rev() {
        q[k] = carry.clone();
        carry = carry * r + &p[k];
    }
    q
}

/// `∫_0^x p`.
pub(crate) fn integrate_from_zero<T: Scalar>(p: &[T], x: &T) -> T {
    let prec = x.precision();
    let mut anti = Vec::with_capacity(p.len() + 1);
    anti.push(T::zero(prec));
    for (k, c) in p.iter().enumerate() {
        anti.push(c.clone() / T::from_i64(k as i64 + 1, prec));
    }
    eval(&anti, x)
}

fn binomial(n: i64, k: i64) -> i64 {
    let mut r = 1i64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Legendre polynomial of degree `n` shifted to `[0, 1]`; integer coefficients.
pub(crate) fn shifted_legendre<T: Scalar>(n: usize, prec: Precision) -> Vec<T> {
    let n = n as i64;
    (0..=n)
        .map(|k| {
            let sign = if (n + k) % 2 == 0 { 1 } else { -1 };
            T::from_i64(sign * binomial(n, k) * binomial(n + k, k), prec)
        })
        .collect()
}
