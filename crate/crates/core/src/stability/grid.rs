//! Sampling on rectangular grids in the complex plane.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{growth_rate, stability_function, C64};
use crate::error::{Error, Result};
use crate::tableau::{ButcherTableau, SdcMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            re_min: -20.0,
            re_max: 5.0,
            im_min: -15.0,
            im_max: 15.0,
            n_re: 401,
            n_im: 401,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_re >= 2
            && self.n_im >= 2
            && self.re_min < self.re_max
            && self.im_min < self.im_max
            && [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad grid {self:?}")))
        }
    }

    pub fn re(&self, j: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * j as f64 / (self.n_re - 1) as f64
    }

    pub fn im(&self, i: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * i as f64 / (self.n_im - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re(j), self.im(i))
    }
}

/// Samples on a grid, row-major: row `i` holds `Im z = spec.im(i)` (rising
/// with `i`), column `j` holds `Re z = spec.re(j)`. Poles are stored as
/// infinity with their flag set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub poles: Vec<bool>,
}

impl ComplexGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n_re + j]
    }

    pub fn is_pole(&self, i: usize, j: usize) -> bool {
        self.poles[i * self.spec.n_re + j]
    }

    /// Grid spec as a comment line, then `re,im,value,flag` with flag `1` at
    /// poles.
    pub fn to_csv(&self) -> String {
        let g = &self.spec;
        let mut out = format!(
            "# re_min={},re_max={},im_min={},im_max={},n_re={},n_im={}\nre,im,value,flag\n",
            g.re_min, g.re_max, g.im_min, g.im_max, g.n_re, g.n_im
        );
        for i in 0..g.n_im {
            for j in 0..g.n_re {
                let k = i * g.n_re + j;
                writeln!(out, "{},{},{},{}", g.re(j), g.im(i), self.values[k], u8::from(self.poles[k])).unwrap();
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        // JSON has no infinity; poles become null
        let vals: Vec<Option<f64>> = self.values.iter().map(|v| v.is_finite().then_some(*v)).collect();
        serde_json::json!({ "spec": self.spec, "values": vals, "poles": self.poles }).to_string()
    }
}

/// Evaluates `f` on every grid point, rows split across threads.
fn sample(spec: &GridSpec, f: impl Fn(C64) -> Option<f64> + Sync) -> Result<ComplexGrid> {
    spec.validate()?;
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(spec.n_im);
    let per = spec.n_im.div_ceil(workers);
    let chunks: Vec<Vec<Option<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    let rows = (w * per)..((w + 1) * per).min(spec.n_im);
                    let mut out = Vec::with_capacity(rows.len() * spec.n_re);
                    for i in rows {
                        for j in 0..spec.n_re {
                            out.push(f(spec.point(i, j)));
                        }
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker")).collect()
    });
    let flat: Vec<Option<f64>> = chunks.into_iter().flatten().collect();
    Ok(ComplexGrid {
        spec: *spec,
        values: flat.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
        poles: flat.iter().map(Option::is_none).collect(),
    })
}

/// `|R(z)|` on the grid; the stability domain is where the value is `≤ 1`.
pub fn stability_region(t: &ButcherTableau<f64>, spec: &GridSpec) -> Result<ComplexGrid> {
    sample(spec, |z| stability_function(t, z).ok().map(|r| r.norm()))
}

/// Growth rate `ρ̄_k(z)` on the grid.
pub fn growth_rate_grid(method: &SdcMethod<f64>, spec: &GridSpec, k: usize) -> Result<ComplexGrid> {
    if k == 0 || k > method.sweeps() {
        return Err(Error::InvalidArgument(format!(
            "growth rate over {k} sweeps, method has {}",
            method.sweeps()
        )));
    }
    sample(spec, |z| growth_rate(method, z, k).ok())
}
