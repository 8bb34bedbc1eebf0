//! SDC methods and their augmented Butcher tableau.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eed::EedMatrix;
use super::nodes::lagrange_at_one;
use super::ButcherTableau;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// How the step result is formed from the last sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinalUpdate {
    /// `u_n + Δt Σ b_j f(u^{[K,j]})`.
    Quadrature,
    /// The last stage `u^{[K,s]}`; requires `c_s = 1`.
    LastStage,
    /// Polynomial extrapolation of the last sweep's stages to the step end.
    Extrapolation,
}

impl FinalUpdate {
    pub fn name(self) -> &'static str {
        match self {
            FinalUpdate::Quadrature => "quadrature",
            FinalUpdate::LastStage => "last-stage",
            FinalUpdate::Extrapolation => "extrapolation",
        }
    }
}

impl fmt::Display for FinalUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FinalUpdate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quad" | "quadrature" => Ok(FinalUpdate::Quadrature),
            "last" | "laststage" | "last-stage" | "last_stage" => Ok(FinalUpdate::LastStage),
            "extrap" | "extrapolation" => Ok(FinalUpdate::Extrapolation),
            other => Err(Error::InvalidArgument(format!("unknown final update {other:?}"))),
        }
    }
}

/// `[A_Δ^0, A_Δ^1, …, A_Δ^K]`; the first matrix defines the initial stages.
#[derive(Debug, Clone, PartialEq)]
pub struct EedSchedule<T> {
    mats: Vec<EedMatrix<T>>,
}

impl<T: Scalar> EedSchedule<T> {
    pub fn new(mats: Vec<EedMatrix<T>>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::InvalidArgument(
                "a schedule needs an initial matrix and at least one sweep".into(),
            ));
        }
        let s = mats[0].stages();
        if let Some(bad) = mats.iter().find(|m| m.m.rows() != s || m.m.cols() != s) {
            return Err(Error::Dimension(format!(
                "schedule mixes {s}x{s} with {}x{} matrices",
                bad.m.rows(),
                bad.m.cols()
            )));
        }
        Ok(EedSchedule { mats })
    }

    /// Number of sweeps `K`.
    pub fn sweeps(&self) -> usize {
        self.mats.len() - 1
    }

    pub fn stages(&self) -> usize {
        self.mats[0].stages()
    }

    pub fn initial(&self) -> &EedMatrix<T> {
        &self.mats[0]
    }

    /// `A_Δ^k`, `k = 0..=K`.
    pub fn get(&self, k: usize) -> &EedMatrix<T> {
        &self.mats[k]
    }

    pub fn mats(&self) -> &[EedMatrix<T>] {
        &self.mats
    }

    /// The first `k` sweeps.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        EedSchedule::new(self.mats[..=k.min(self.sweeps())].to_vec())
    }

    pub fn convert<U: Scalar>(&self, prec: crate::Precision) -> EedSchedule<U> {
        EedSchedule {
            mats: self.mats.iter().map(|m| m.convert(prec)).collect(),
        }
    }
}

/// An SDC method `(A_Δ^0, …, A_Δ^K, A, b)` with a final-update rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SdcMethod<T> {
    pub underlying: ButcherTableau<T>,
    pub schedule: EedSchedule<T>,
    pub final_update: FinalUpdate,
}

impl<T: Scalar> SdcMethod<T> {
    pub fn new(
        underlying: ButcherTableau<T>,
        schedule: EedSchedule<T>,
        final_update: FinalUpdate,
    ) -> Result<Self> {
        if schedule.stages() != underlying.stages() {
            return Err(Error::Dimension(format!(
                "schedule has {} stages, tableau {}",
                schedule.stages(),
                underlying.stages()
            )));
        }
        let m = SdcMethod {
            underlying,
            schedule,
            final_update,
        };
        m.check_final_update()?;
        Ok(m)
    }

    fn check_final_update(&self) -> Result<()> {
        let c = &self.underlying.c;
        let prec = self.underlying.precision();
        match self.final_update {
            FinalUpdate::Quadrature => Ok(()),
            FinalUpdate::LastStage => {
                let dev = (c[c.len() - 1].clone() - T::one(prec)).abs();
                if dev > T::epsilon(prec) * T::from_i64(64, prec) {
                    Err(Error::FinalUpdate {
                        mode: "last-stage",
                        reason: format!("last node is {} instead of 1", c[c.len() - 1]),
                    })
                } else {
                    Ok(())
                }
            }
            FinalUpdate::Extrapolation => {
                for i in 0..c.len() {
                    for j in i + 1..c.len() {
                        if (c[i].clone() - &c[j]).abs() <= T::epsilon(prec) {
                            return Err(Error::FinalUpdate {
                                mode: "extrapolation",
                                reason: format!("nodes {i} and {j} coincide"),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn sweeps(&self) -> usize {
        self.schedule.sweeps()
    }

    pub fn stages(&self) -> usize {
        self.underlying.stages()
    }

    /// Same method stopped after `k` sweeps.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        SdcMethod::new(
            self.underlying.clone(),
            self.schedule.truncated(k)?,
            self.final_update,
        )
    }

    /// Weights applied to the last sweep's stage values (`LastStage`,
    /// `Extrapolation`), or `None` for `Quadrature`.
    pub fn stage_combination(&self) -> Option<Vec<T>> {
        let s = self.stages();
        let prec = self.underlying.precision();
        match self.final_update {
            FinalUpdate::Quadrature => None,
            FinalUpdate::LastStage => {
                let mut w = vec![T::zero(prec); s];
                w[s - 1] = T::one(prec);
                Some(w)
            }
            FinalUpdate::Extrapolation => Some(lagrange_at_one(&self.underlying.c)),
        }
    }

    pub fn assemble(&self) -> Result<ButcherTableau<T>> {
        assemble_sdc(self)
    }
}

/// Stage matrix of the augmented tableau for `[A_Δ^0, …, A_Δ^K]`; a single
/// matrix gives just the initial block.
pub fn augmented_stage_matrix<T: Scalar>(a: &Matrix<T>, mats: &[EedMatrix<T>]) -> Matrix<T> {
    let s = a.rows();
    let kk = mats.len() - 1;
    let n = (kk + 1) * s;
    let mut big = Matrix::zeros(n, n, a.precision());
    let init = &mats[0].m;
    for i in 0..s {
        for j in 0..s {
            big[(i, j)] = init[(i, j)].clone();
        }
    }
    for (k, eed) in mats.iter().enumerate().skip(1) {
        let ad = &eed.m;
        for i in 0..s {
            for j in 0..s {
                big[(k * s + i, (k - 1) * s + j)] = a[(i, j)].clone() - &ad[(i, j)];
                big[(k * s + i, k * s + j)] = ad[(i, j)].clone();
            }
        }
    }
    big
}

/// The `(K+1)s`-stage tableau equivalent to the SDC method.
pub fn assemble_sdc<T: Scalar>(method: &SdcMethod<T>) -> Result<ButcherTableau<T>> {
    method.check_final_update()?;
    let s = method.stages();
    let kk = method.sweeps();
    let n = (kk + 1) * s;
    let prec = method.underlying.precision();
    let big = augmented_stage_matrix(&method.underlying.a, method.schedule.mats());
    let init = &method.schedule.initial().m;
    let mut c = init.row_sums();
    for _ in 0..kk {
        c.extend(method.underlying.c.iter().cloned());
    }
    let b = match method.stage_combination() {
        None => {
            let mut b = vec![T::zero(prec); n];
            for j in 0..s {
                b[kk * s + j] = method.underlying.b[j].clone();
            }
            b
        }
        Some(w) => {
            let mut b = vec![T::zero(prec); n];
            for (i, wi) in w.iter().enumerate() {
                if wi.is_zero() {
                    continue;
                }
                for (j, bj) in b.iter_mut().enumerate() {
                    bj.mul_add_assign(wi, &big[(kk * s + i, j)]);
                }
            }
            b
        }
    };
    ButcherTableau::new(big, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Precision;
    use crate::tableau::{is_stiffly_accurate, make_eed, EedKind, NodeFamily, NodeKind};

    #[test]
    fn one_stage_one_sweep() {
        let p = Precision::F64;
        let t = ButcherTableau::new(Matrix::identity(1, p), vec![1.0], vec![1.0]).unwrap();
        let theta = 0.3;
        let sched = EedSchedule::new(vec![
            EedMatrix::zero(1, p),
            EedMatrix::custom(Matrix::from_rows(vec![vec![theta]]).unwrap()),
        ])
        .unwrap();
        let m = SdcMethod::new(t, sched, FinalUpdate::Quadrature).unwrap();
        let big = assemble_sdc(&m).unwrap();
        assert_eq!(big.a.to_rows(), vec![vec![0.0, 0.0], vec![1.0 - theta, theta]]);
        assert_eq!(big.b, vec![0.0, 1.0]);
        assert_eq!(big.c, vec![0.0, 1.0]);
    }

    #[test]
    fn final_update_modes() {
        let p = Precision::F64;
        let gauss = NodeFamily::new(NodeKind::GaussLegendre, 2).tableau::<f64>(p).unwrap();
        let sched = |t: &ButcherTableau<f64>| {
            EedSchedule::new(vec![
                EedMatrix::zero(t.stages(), p),
                make_eed(EedKind::ImplicitEuler, t).unwrap(),
            ])
            .unwrap()
        };
        let err = SdcMethod::new(gauss.clone(), sched(&gauss), FinalUpdate::LastStage).unwrap_err();
        assert!(matches!(err, Error::FinalUpdate { .. }));
        let q = SdcMethod::new(gauss.clone(), sched(&gauss), FinalUpdate::Quadrature).unwrap();
        let sum: f64 = q.assemble().unwrap().b.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);

        let radau = NodeFamily::new(NodeKind::RadauIIA, 3).tableau::<f64>(p).unwrap();
        let m = SdcMethod::new(radau.clone(), sched(&radau), FinalUpdate::LastStage).unwrap();
        assert!(is_stiffly_accurate(&m.assemble().unwrap(), 0.0));

        // extrapolation through c_s = 1 reduces to the last stage
        let e = SdcMethod::new(radau.clone(), sched(&radau), FinalUpdate::Extrapolation).unwrap();
        let (eb, mb) = (e.assemble().unwrap().b, m.assemble().unwrap().b);
        assert!(eb.iter().zip(&mb).all(|(x, y)| (x - y).abs() < 1e-13));
    }

    #[test]
    fn schedule_shape_checked() {
        let p = Precision::F64;
        assert!(EedSchedule::<f64>::new(vec![EedMatrix::zero(2, p)]).is_err());
        assert!(EedSchedule::<f64>::new(vec![EedMatrix::zero(2, p), EedMatrix::zero(3, p)]).is_err());
    }
}
