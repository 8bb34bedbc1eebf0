//! Order tables over a node family, a stage range and a sweep range.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::Serialize;

use super::sdc::sdc_orders;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::tableau::{FinalUpdate, NodeFamily, NodeKind, ScheduleTemplate, SdcMethod};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderTable {
    pub nodes: NodeKind,
    pub schedule: String,
    pub mode: FinalUpdate,
    pub precision_bits: u32,
    pub s_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// `orders[row][col]` for `s_values[row]`, `k_values[col]`.
    pub orders: Vec<Vec<usize>>,
    /// Order rose by at least two over the previous sweep.
    pub jumps: Vec<Vec<bool>>,
    pub underlying_order: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMismatch {
    pub s: usize,
    pub k: usize,
    pub expected: Option<usize>,
    pub got: usize,
}

/// Last node is `1` for Radau and Lobatto, so those tables use the last
/// stage; Gauss tables use the quadrature update.
fn default_mode(kind: NodeKind) -> FinalUpdate {
    if kind.ends_at_one() {
        FinalUpdate::LastStage
    } else {
        FinalUpdate::Quadrature
    }
}

fn row(
    kind: NodeKind,
    s: usize,
    kmax: usize,
    template: &ScheduleTemplate,
    mode: FinalUpdate,
    prec: Precision,
) -> Result<(Vec<usize>, usize)> {
    let family = NodeFamily::new(kind, s);
    let p = family.order();
    let tab = family.tableau::<Real>(prec)?;
    let sched = template.build(&tab, kmax)?;
    let method = SdcMethod::new(tab, sched, mode)?;
    let reports = sdc_orders(&method, p, None)?;
    Ok((reports.iter().map(|r| r.order.min(p)).collect(), p))
}

/// Order of SDC with the given schedule for every `s` and `k`, capped at the
/// order of the underlying collocation method. `mode = None` picks the last
/// stage when the nodes end at `1` and the quadrature update otherwise.
/// Rows are computed on separate threads.
pub fn order_table(
    kind: NodeKind,
    s_values: &[usize],
    k_values: RangeInclusive<usize>,
    template: &ScheduleTemplate,
    mode: Option<FinalUpdate>,
    prec: Precision,
) -> Result<OrderTable> {
    let (k0, k1) = (*k_values.start(), *k_values.end());
    if k0 == 0 || k1 < k0 {
        return Err(Error::InvalidArgument(format!("bad sweep range {k0}..{k1}")));
    }
    if s_values.is_empty() {
        return Err(Error::InvalidArgument("no stage counts given".into()));
    }
    let mode = mode.unwrap_or_else(|| default_mode(kind));
    let pmax = s_values.iter().map(|&s| kind.order(s)).max().unwrap_or(1);
    let digits = prec.decimal_digits() as usize;
    let mut warnings = Vec::new();
    if digits < 2 * pmax {
        return Err(Error::Precision(format!(
            "{digits} digits cannot resolve order {pmax}; use at least {} bits",
            ((2 * pmax) as f64 / std::f64::consts::LOG10_2).ceil() as u32 + 1
        )));
    }
    if digits < 3 * pmax {
        warnings.push(format!("{digits} digits is marginal for order {pmax}"));
    }

    let rows: Vec<Result<(Vec<usize>, usize)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = s_values
            .iter()
            .map(|&s| scope.spawn(move || row(kind, s, k1, template, mode, prec)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("order table worker")).collect()
    });

    let mut orders = Vec::new();
    let mut jumps = Vec::new();
    let mut underlying_order = Vec::new();
    for r in rows {
        let (all, p) = r?;
        // all[k] is the order after k sweeps, all[0] the initial guess
        orders.push((k0..=k1).map(|k| all[k]).collect());
        jumps.push((k0..=k1).map(|k| all[k] >= all[k - 1] + 2).collect());
        underlying_order.push(p);
    }
    Ok(OrderTable {
        nodes: kind,
        schedule: template.source().to_string(),
        mode,
        precision_bits: prec.bits(),
        s_values: s_values.to_vec(),
        k_values: (k0..=k1).collect(),
        orders,
        jumps,
        underlying_order,
        warnings,
    })
}

impl OrderTable {
    pub fn get(&self, s: usize, k: usize) -> Option<usize> {
        let r = self.s_values.iter().position(|&x| x == s)?;
        let c = self.k_values.iter().position(|&x| x == k)?;
        Some(self.orders[r][c])
    }

    /// `s,1,2,…` header, then one row per stage count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for k in &self.k_values {
            write!(out, ",{k}").unwrap();
        }
        out.push('\n');
        for (s, row) in self.s_values.iter().zip(&self.orders) {
            write!(out, "{s}").unwrap();
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Plain-text rendering with jumps marked by `*`.
    pub fn render(&self) -> String {
        let mut out = String::from("  s |");
        for k in &self.k_values {
            write!(out, "{k:>4}").unwrap();
        }
        out.push('\n');
        for (r, s) in self.s_values.iter().enumerate() {
            write!(out, "{s:>3} |").unwrap();
            for (c, v) in self.orders[r].iter().enumerate() {
                let mark = if self.jumps[r][c] { "*" } else { " " };
                write!(out, "{v:>3}{mark}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Cells that differ from (or are missing in) a golden table.
    pub fn compare(&self, golden: &BTreeMap<(usize, usize), usize>) -> Vec<TableMismatch> {
        let mut out = Vec::new();
        for (r, &s) in self.s_values.iter().enumerate() {
            for (c, &k) in self.k_values.iter().enumerate() {
                let got = self.orders[r][c];
                let expected = golden.get(&(s, k)).copied();
                if expected != Some(got) {
                    out.push(TableMismatch { s, k, expected, got });
                }
            }
        }
        out
    }
}

/// Reads a table in the format of [`OrderTable::to_csv`] into `(s, k) -> order`.
pub fn read_table_csv(text: &str) -> Result<BTreeMap<(usize, usize), usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let ks: Vec<usize> = headers
        .iter()
        .skip(1)
        .map(|h| h.trim().parse().map_err(|_| Error::Parse(format!("bad column {h:?}"))))
        .collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let s: usize = rec
            .get(0)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse("bad stage count".into()))?;
        for (k, v) in ks.iter().zip(rec.iter().skip(1)) {
            let v = v.trim();
            if v.is_empty() {
                continue;
            }
            let o = v.parse().map_err(|_| Error::Parse(format!("bad entry {v:?}")))?;
            out.insert((s, *k), o);
        }
    }
    Ok(out)
}
