//! Textual schedule descriptions.
//!
//! A schedule is a comma-separated list of items, each an EED name with
//! optional parenthesized arguments and an optional `*n` repetition:
//!
//! ```text
//! zero,jumper            constant initial guess, then diag(c)/(2k) at sweep k
//! zero,jumper*3,diag(1),diag(1/3)
//! flex*3,jshift(v=3)     three diag(c)/k sweeps, then diag(c)/(2k-3)
//! ie*4
//! ```
//!
//! The first expanded item is `A_Δ^0`, unless it is iteration-indexed
//! (`jumper`, `minsrflex`, `jshift` without an explicit index), in which case
//! the initial matrix is `zero` and the list starts at sweep 1. When more
//! sweeps are requested than listed, the last item is repeated, with
//! iteration-indexed kinds continuing to count.
//!
//! Names: `zero` (alias `picard`), `ie`, `ee`, `trap`, `lu`, `minsrns`,
//! `minsrflex` (alias `flex`), `minsrs`, `jumper`, `jshift`, `diag`, and
//! `coll` for `A_Δ = A`.

use std::fmt;

use super::eed::{make_eed, EedKind, EedMatrix, Ratio};
use super::sdc::EedSchedule;
use super::ButcherTableau;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleItem {
    Fixed(EedKind),
    Jumper,
    Flex,
    Shift { v: usize },
    Collocation,
}

impl ScheduleItem {
    fn indexed(self) -> bool {
        matches!(self, ScheduleItem::Jumper | ScheduleItem::Flex | ScheduleItem::Shift { .. })
    }

    fn at(self, k: usize) -> Option<EedKind> {
        let k = k.max(1);
        match self {
            ScheduleItem::Fixed(kind) => Some(kind),
            ScheduleItem::Jumper => Some(EedKind::Jumper(k)),
            ScheduleItem::Flex => Some(EedKind::MinSrFlex(k)),
            ScheduleItem::Shift { v } => Some(EedKind::JumperShift { k, v }),
            ScheduleItem::Collocation => None,
        }
    }
}

impl fmt::Display for ScheduleItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleItem::Fixed(k) => write!(f, "{k}"),
            ScheduleItem::Jumper => write!(f, "jumper"),
            ScheduleItem::Flex => write!(f, "minsrflex"),
            ScheduleItem::Shift { v } => write!(f, "jshift(v={v})"),
            ScheduleItem::Collocation => write!(f, "coll"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTemplate {
    /// `A_Δ^0` followed by the listed sweeps, repetitions expanded.
    items: Vec<ScheduleItem>,
    source: String,
}

impl ScheduleTemplate {
    /// Number of sweeps written out explicitly.
    pub fn listed_sweeps(&self) -> usize {
        self.items.len() - 1
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// The item used at sweep `k` (`k = 0` is the initial matrix).
    pub fn item(&self, k: usize) -> ScheduleItem {
        self.items[k.min(self.items.len() - 1)]
    }

    /// EED kind at sweep `k`; `None` for `coll`.
    pub fn kind_at(&self, k: usize) -> Option<EedKind> {
        self.item(k).at(k)
    }

    /// Concrete schedule with `sweeps` sweeps for the tableau.
    pub fn build<T: Scalar>(&self, t: &ButcherTableau<T>, sweeps: usize) -> Result<EedSchedule<T>> {
        if sweeps == 0 {
            return Err(Error::InvalidArgument("at least one sweep is required".into()));
        }
        let mats = (0..=sweeps)
            .map(|k| match self.kind_at(k) {
                Some(kind) => make_eed(kind, t),
                None => Ok(EedMatrix::custom(t.a.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        EedSchedule::new(mats)
    }
}

impl fmt::Display for ScheduleTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn parse_item(raw: &str) -> Result<(ScheduleItem, usize)> {
    let bad = |msg: &str| Error::Parse(format!("schedule item {raw:?}: {msg}"));
    let (body, count) = match raw.rsplit_once('*') {
        Some((b, n)) => {
            let n: usize = n.trim().parse().map_err(|_| bad("repetition is not a count"))?;
            if n == 0 {
                return Err(bad("repetition must be positive"));
            }
            (b.trim(), n)
        }
        None => (raw.trim(), 1),
    };
    let (name, args) = match body.find('(') {
        Some(open) => {
            let close = body.rfind(')').filter(|&c| c == body.len() - 1).ok_or_else(|| bad("missing ')'"))?;
            (body[..open].trim(), Some(body[open + 1..close].trim()))
        }
        None => (body, None),
    };
    let mut positional = Vec::new();
    let mut v_arg = None;
    for a in args.into_iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(v) = a.strip_prefix("v=") {
            v_arg = Some(v.trim().parse::<usize>().map_err(|_| bad("v must be an integer"))?);
        } else {
            positional.push(a);
        }
    }
    let index = |p: &[&str]| -> Result<Option<usize>> {
        match p {
            [] => Ok(None),
            [k] => k.parse::<usize>().map(Some).map_err(|_| bad("index must be an integer")),
            _ => Err(bad("too many arguments")),
        }
    };
    let no_args = |item: ScheduleItem| {
        if positional.is_empty() && v_arg.is_none() {
            Ok(item)
        } else {
            Err(bad("takes no arguments"))
        }
    };
    let item = match name.to_ascii_lowercase().as_str() {
        "zero" | "picard" => no_args(ScheduleItem::Fixed(EedKind::Zero))?,
        "ie" | "be" | "implicit-euler" => no_args(ScheduleItem::Fixed(EedKind::ImplicitEuler))?,
        "ee" | "fe" | "explicit-euler" => no_args(ScheduleItem::Fixed(EedKind::ExplicitEuler))?,
        "trap" | "trapezoid" => no_args(ScheduleItem::Fixed(EedKind::Trapezoid))?,
        "lu" => no_args(ScheduleItem::Fixed(EedKind::LuTrick))?,
        "minsrns" | "min-sr-ns" => no_args(ScheduleItem::Fixed(EedKind::MinSrNs))?,
        "minsrs" | "min-sr-s" => no_args(ScheduleItem::Fixed(EedKind::MinSrS))?,
        "coll" | "collocation" => no_args(ScheduleItem::Collocation)?,
        "jumper" => match index(&positional)? {
            Some(k) => ScheduleItem::Fixed(EedKind::Jumper(k)),
            None => ScheduleItem::Jumper,
        },
        "minsrflex" | "flex" | "min-sr-flex" => match index(&positional)? {
            Some(k) => ScheduleItem::Fixed(EedKind::MinSrFlex(k)),
            None => ScheduleItem::Flex,
        },
        "jshift" => {
            let v = v_arg.ok_or_else(|| bad("needs v=<count>"))?;
            match index(&positional)? {
                Some(k) => ScheduleItem::Fixed(EedKind::JumperShift { k, v }),
                None => ScheduleItem::Shift { v },
            }
        }
        "diag" => match positional.as_slice() {
            [] => ScheduleItem::Fixed(EedKind::Diagonal(Ratio::integer(1))),
            [r] => ScheduleItem::Fixed(EedKind::Diagonal(Ratio::parse(r)?)),
            _ => return Err(bad("too many arguments")),
        },
        other => return Err(bad(&format!("unknown EED {other:?}"))),
    };
    Ok((item, count))
}

pub fn parse_schedule(src: &str) -> Result<ScheduleTemplate> {
    let mut items = Vec::new();
    // split on commas outside parentheses
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut pieces = Vec::new();
    for (i, ch) in src.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                pieces.push(&src[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&src[start..]);
    for p in pieces {
        if p.trim().is_empty() {
            return Err(Error::Parse(format!("empty item in schedule {src:?}")));
        }
        let (item, n) = parse_item(p)?;
        items.extend(std::iter::repeat(item).take(n));
    }
    if items[0].indexed() {
        items.insert(0, ScheduleItem::Fixed(EedKind::Zero));
    }
    if items.len() < 2 {
        // a lone item is both the initial matrix and every sweep
        items.push(items[0]);
    }
    Ok(ScheduleTemplate {
        items,
        source: src.trim().to_string(),
    })
}
