//! Butcher tableaux: collocation methods, error equation discretizations
//! (EEDs), SDC schedules and the augmented tableau of an SDC method.

mod assumptions;
mod eed;
mod nodes;
pub(crate) mod poly;
mod schedule;
mod sdc;

pub use assumptions::{check_simplifying, is_stiffly_accurate, AssumptionReport};
pub use eed::{make_eed, min_sr_s_eed, EedKind, EedMatrix, MinSrResult, Ratio};
pub use nodes::{collocation_tableau, lagrange_at_one, make_nodes, NodeFamily, NodeKind, MAX_STAGES};
pub use schedule::{parse_schedule, ScheduleItem, ScheduleTemplate};
pub use sdc::{assemble_sdc, augmented_stage_matrix, EedSchedule, FinalUpdate, SdcMethod};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Precision, Scalar};

/// Coefficients `(A, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct TableauJson {
    c: Vec<String>,
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    b: Vec<String>,
}

impl<T: Scalar> ButcherTableau<T> {
    pub fn new(a: Matrix<T>, b: Vec<T>, c: Vec<T>) -> Result<Self> {
        let s = b.len();
        if a.rows() != s || a.cols() != s || c.len() != s {
            return Err(Error::Dimension(format!(
                "A is {}x{}, b has {}, c has {} entries",
                a.rows(),
                a.cols(),
                s,
                c.len()
            )));
        }
        if s == 0 {
            return Err(Error::Dimension("empty tableau".into()));
        }
        Ok(ButcherTableau { a, b, c })
    }

    /// Tableau with `c` taken as the row sums of `A`.
    pub fn from_ab(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        let c = a.row_sums();
        ButcherTableau::new(a, b, c)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn precision(&self) -> Precision {
        self.b[0].precision()
    }

    pub fn to_f64(&self) -> ButcherTableau<f64> {
        self.convert(Precision::F64)
    }

    pub fn convert<U: Scalar>(&self, prec: Precision) -> ButcherTableau<U> {
        let conv = |v: &Vec<T>| -> Vec<U> {
            v.iter()
                .map(|x| crate::matrix::convert_scalar::<T, U>(x, prec))
                .collect()
        };
        ButcherTableau {
            a: self.a.convert(prec),
            b: conv(&self.b),
            c: conv(&self.c),
        }
    }

    /// JSON object `{"c": [...], "A": [[...]], "b": [...]}` with every entry
    /// written as a decimal string at full precision.
    pub fn to_json(&self) -> String {
        let j = TableauJson {
            c: self.c.iter().map(|x| x.to_full_string()).collect(),
            a: self
                .a
                .to_rows()
                .iter()
                .map(|r| r.iter().map(|x| x.to_full_string()).collect())
                .collect(),
            b: self.b.iter().map(|x| x.to_full_string()).collect(),
        };
        serde_json::to_string_pretty(&j).expect("tableau serializes")
    }

    pub fn from_json(s: &str, prec: Precision) -> Result<Self> {
        let j: TableauJson = serde_json::from_str(s)?;
        let parse = |v: &[String]| -> Result<Vec<T>> {
            v.iter().map(|x| T::parse_decimal(x, prec)).collect()
        };
        let rows = j.a.iter().map(|r| parse(r)).collect::<Result<Vec<_>>>()?;
        ButcherTableau::new(Matrix::from_rows(rows)?, parse(&j.b)?, parse(&j.c)?)
    }
}
