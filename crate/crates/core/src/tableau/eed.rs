//! Error equation discretizations, the lower-triangular matrices `A_Δ` used in
//! SDC sweeps.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ButcherTableau;
use crate::error::{Error, Result};
use crate::matrix::{lu_doolittle, Matrix};
use crate::scalar::{Precision, Scalar};

/// Exact rational coefficient, so `diag(c)/3` stays exact at any precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Ratio {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Ratio {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    pub fn to_scalar<T: Scalar>(self, prec: Precision) -> T {
        T::ratio(self.num, self.den, prec)
    }

    /// Accepts `3`, `-2/7` or a plain decimal like `0.125`.
    pub fn parse(s: &str) -> Result<Ratio> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Ratio::new(n, d));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            if fp.len() > 15 || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10i64.pow(fp.len() as u32);
            let neg = ip.trim_start().starts_with('-');
            let ip: i64 = if ip.is_empty() || ip == "-" { 0 } else { ip.parse().map_err(|_| bad())? };
            let fp: i64 = if fp.is_empty() { 0 } else { fp.parse().map_err(|_| bad())? };
            let num = ip.abs() * den + fp;
            return Ok(Ratio::new(if neg { -num } else { num }, den));
        }
        s.parse().map(Ratio::integer).map_err(|_| bad())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EedKind {
    ImplicitEuler,
    ExplicitEuler,
    /// `α · diag(c)`.
    Diagonal(Ratio),
    /// `diag(c) / s`.
    MinSrNs,
    /// `diag(c) / k`.
    MinSrFlex(usize),
    /// `diag(c) / (2k)`, the order-jump EED.
    Jumper(usize),
    /// `diag(c) / (2k - v)`, order jumps after `v` jump-free iterations.
    JumperShift { k: usize, v: usize },
    /// Diagonal minimizing the stiff-limit spectral radius (fixed precision).
    MinSrS,
    Trapezoid,
    LuTrick,
    Zero,
    Custom,
}

impl fmt::Display for EedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EedKind::ImplicitEuler => write!(f, "ie"),
            EedKind::ExplicitEuler => write!(f, "ee"),
            EedKind::Diagonal(r) => write!(f, "diag({r})"),
            EedKind::MinSrNs => write!(f, "minsrns"),
            EedKind::MinSrFlex(k) => write!(f, "minsrflex({k})"),
            EedKind::Jumper(k) => write!(f, "jumper({k})"),
            EedKind::JumperShift { k, v } => write!(f, "jshift({k},v={v})"),
            EedKind::MinSrS => write!(f, "minsrs"),
            EedKind::Trapezoid => write!(f, "trap"),
            EedKind::LuTrick => write!(f, "lu"),
            EedKind::Zero => write!(f, "zero"),
            EedKind::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EedMatrix<T> {
    pub m: Matrix<T>,
    pub kind: EedKind,
}

impl<T: Scalar> EedMatrix<T> {
    pub fn custom(m: Matrix<T>) -> EedMatrix<T> {
        EedMatrix {
            m,
            kind: EedKind::Custom,
        }
    }

    pub fn zero(s: usize, prec: Precision) -> EedMatrix<T> {
        EedMatrix {
            m: Matrix::zeros(s, s, prec),
            kind: EedKind::Zero,
        }
    }

    pub fn stages(&self) -> usize {
        self.m.rows()
    }

    /// Lower triangular with a zero on the diagonal, or not triangular and
    /// numerically singular.
    pub fn is_singular(&self) -> bool {
        if self.m.is_lower_triangular() {
            return self.m.diag().iter().any(|d| d.is_zero());
        }
        let m = self.m.to_f64();
        m.clone().lu().determinant().abs() < 1e-14 * m.norm().powi(self.stages() as i32)
    }

    pub fn is_diagonal(&self) -> bool {
        self.m.is_diagonal()
    }

    pub fn convert<U: Scalar>(&self, prec: Precision) -> EedMatrix<U> {
        EedMatrix {
            m: self.m.convert(prec),
            kind: self.kind,
        }
    }
}

fn delta_tau<T: Scalar>(c: &[T]) -> Vec<T> {
    let mut d = Vec::with_capacity(c.len());
    d.push(c[0].clone());
    for w in c.windows(2) {
        d.push(w[1].clone() - &w[0]);
    }
    d
}

fn scaled_diag<T: Scalar>(c: &[T], num: i64, den: i64) -> Matrix<T> {
    let prec = c[0].precision();
    let f = T::ratio(num, den, prec);
    Matrix::diagonal(&c.iter().map(|x| x.clone() * &f).collect::<Vec<_>>())
}

/// Builds the EED of the given kind for an underlying tableau.
///
/// `MinSrS` runs a fixed-precision optimization with the default seed; use
/// [`min_sr_s_eed`] for control over it. `Custom` has no canonical matrix and
/// is rejected here; construct it with [`EedMatrix::custom`].
pub fn make_eed<T: Scalar>(kind: EedKind, tableau: &ButcherTableau<T>) -> Result<EedMatrix<T>> {
    let c = &tableau.c;
    let s = c.len();
    let prec = tableau.precision();
    let needs_k = |k: usize| {
        if k == 0 {
            Err(Error::InvalidArgument(format!("{kind} needs an iteration index k >= 1")))
        } else {
            Ok(())
        }
    };
    let m = match kind {
        EedKind::Zero => Matrix::zeros(s, s, prec),
        EedKind::ImplicitEuler => {
            let dt = delta_tau(c);
            Matrix::from_fn(s, s, |i, j| if j <= i { dt[j].clone() } else { T::zero(prec) })
        }
        EedKind::ExplicitEuler => {
            let dt = delta_tau(c);
            Matrix::from_fn(s, s, |i, j| if j < i { dt[j + 1].clone() } else { T::zero(prec) })
        }
        EedKind::Trapezoid => {
            let dt = delta_tau(c);
            let half = T::ratio(1, 2, prec);
            Matrix::from_fn(s, s, |i, j| {
                if j < i {
                    (dt[j].clone() + &dt[j + 1]) * &half
                } else if j == i {
                    dt[i].clone() * &half
                } else {
                    T::zero(prec)
                }
            })
        }
        EedKind::Diagonal(r) => scaled_diag(c, r.num, r.den),
        EedKind::MinSrNs => scaled_diag(c, 1, s as i64),
        EedKind::MinSrFlex(k) => {
            needs_k(k)?;
            scaled_diag(c, 1, k as i64)
        }
        EedKind::Jumper(k) => {
            needs_k(k)?;
            scaled_diag(c, 1, 2 * k as i64)
        }
        EedKind::JumperShift { k, v } => {
            needs_k(k)?;
            let den = 2 * k as i64 - v as i64;
            if den <= 0 {
                return Err(Error::InvalidArgument(format!(
                    "shifted jumper needs 2k > v, got k = {k}, v = {v}"
                )));
            }
            scaled_diag(c, 1, den)
        }
        EedKind::LuTrick => {
            let (_, u) = lu_doolittle(&tableau.a.transpose())?;
            u.transpose()
        }
        EedKind::MinSrS => {
            let r = min_sr_s_eed(&tableau.to_f64(), None, 0)?;
            Matrix::diagonal(&r.diagonal.iter().map(|&d| T::from_f64(d, prec)).collect::<Vec<_>>())
        }
        EedKind::Custom => {
            return Err(Error::InvalidArgument(
                "custom EEDs are built from an explicit matrix".into(),
            ))
        }
    };
    Ok(EedMatrix { m, kind })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSrResult {
    pub diagonal: Vec<f64>,
    pub spectral_radius: f64,
    pub converged: bool,
}

fn stiff_radius(a: &DMatrix<f64>, d: &[f64]) -> f64 {
    if d.iter().any(|&x| x.abs() < 1e-300) {
        return f64::INFINITY;
    }
    let s = d.len();
    let ks = DMatrix::from_fn(s, s, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - a[(i, j)] / d[i]
    });
    ks.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Nelder-Mead search for a diagonal `A_Δ` minimizing the spectral radius of
/// `I - A_Δ^{-1} A`. The default starting point is `diag(c)/s`; restarts
/// perturb the best point with a seeded generator.
pub fn min_sr_s_eed(
    tableau: &ButcherTableau<f64>,
    initial: Option<&[f64]>,
    seed: u64,
) -> Result<MinSrResult> {
    let s = tableau.stages();
    if s > 8 {
        return Err(Error::ResourceLimit {
            what: "stage count for spectral radius optimization",
            requested: s,
            cap: 8,
        });
    }
    let a = tableau.a.to_f64();
    let x0: Vec<f64> = match initial {
        Some(v) if v.len() == s => v.to_vec(),
        Some(v) => {
            return Err(Error::Dimension(format!("initial guess has {} entries, need {s}", v.len())))
        }
        None => tableau.c.iter().map(|&c| c / s as f64).collect(),
    };
    let f = |x: &[f64]| stiff_radius(&a, x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut best, mut fbest, mut converged) = nelder_mead(&f, &x0, 0.1, 4000);
    for _ in 0..6 {
        let start: Vec<f64> = best
            .iter()
            .map(|&v| v * (1.0 + 0.2 * (rng.gen::<f64>() - 0.5)))
            .collect();
        let (x, fx, conv) = nelder_mead(&f, &start, 0.05, 4000);
        if fx < fbest {
            best = x;
            fbest = fx;
            converged = conv;
        }
    }
    Ok(MinSrResult {
        diagonal: best,
        spectral_radius: fbest,
        converged,
    })
}

fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], scale: f64, budget: usize) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { scale * v[i] } else { scale };
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() < 1e-13 * (1.0 + vals[0].abs()) {
            return (simplex[0].clone(), vals[0], true);
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n)
                        .map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]))
                        .collect();
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let i = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    (simplex[i].clone(), vals[i], false)
}
