//! Marching squares on a [`ComplexGrid`].

use serde::Serialize;

use super::ComplexGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Line segments of the level set `value = level` in `(re, im)`
/// coordinates. Poles and non-finite samples count as above the level;
/// ambiguous cells are resolved by the cell average.
pub fn contour_segments(grid: &ComplexGrid, level: f64) -> Vec<Segment> {
    let g = &grid.spec;
    let val = |i: usize, j: usize| {
        let v = grid.get(i, j);
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    // crossing point on the edge between two corners
    let cross = |(i0, j0): (usize, usize), (i1, j1): (usize, usize)| {
        let (v0, v1) = (val(i0, j0), val(i1, j1));
        let t = if v1 == f64::MAX || v0 == f64::MAX || v1 == v0 {
            0.5
        } else {
            ((level - v0) / (v1 - v0)).clamp(0.0, 1.0)
        };
        let re = g.re(j0) + t * (g.re(j1) - g.re(j0));
        let im = g.im(i0) + t * (g.im(i1) - g.im(i0));
        (re, im)
    };
    let mut out = Vec::new();
    for i in 0..g.n_im - 1 {
        for j in 0..g.n_re - 1 {
            // corners counter-clockwise from bottom left
            let c = [(i, j), (i, j + 1), (i + 1, j + 1), (i + 1, j)];
            let above: Vec<bool> = c.iter().map(|&(a, b)| val(a, b) > level).collect();
            let code = above.iter().enumerate().fold(0u8, |m, (k, &x)| m | (u8::from(x) << k));
            if code == 0 || code == 15 {
                continue;
            }
            let edge = |k: usize| cross(c[k], c[(k + 1) % 4]);
            let crossed: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            if crossed.len() == 2 {
                out.push(Segment {
                    from: edge(crossed[0]),
                    to: edge(crossed[1]),
                });
                continue;
            }
            // saddle: pair edges so that the centre's side stays connected
            let centre = c.iter().map(|&(a, b)| val(a, b).min(1e300)).sum::<f64>() / 4.0;
            let join_0 = (centre > level) == above[0];
            let pairs = if join_0 { [(0, 1), (2, 3)] } else { [(3, 0), (1, 2)] };
            for (p, q) in pairs {
                out.push(Segment { from: edge(p), to: edge(q) });
            }
        }
    }
    out
}
