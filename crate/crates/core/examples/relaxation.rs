//! Euler's rigid body with Gauss nodes and two explicit sweeps, with and
//! without the relaxation step; prints the invariant drift of both.

use sdcrk::integrate::{long_time_error_growth, rigid_body_problem, LongTimeOptions, RelaxationConfig};
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::Precision;

fn main() -> sdcrk::Result<()> {
    let t_end: f64 = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(100.0);
    let tab = NodeFamily::new(NodeKind::GaussLegendre, 3).tableau::<f64>(Precision::F64)?;
    let m = SdcMethod::new(tab.clone(), parse_schedule("zero,ee")?.build(&tab, 2)?, FinalUpdate::Quadrature)?;
    let p = rigid_body_problem();
    let opts = LongTimeOptions { sample_every: 100, ..LongTimeOptions::default() };
    let cfg = RelaxationConfig::new(p.invariant.clone().unwrap());
    let plain = long_time_error_growth(&p, &m, None, t_end, 0.1, &opts)?;
    let relaxed = long_time_error_growth(&p, &m, Some(&cfg), t_end, 0.1, &opts)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "drift", "error", "drift(rel)", "error(rel)");
    let h0 = plain.samples[0].h;
    for (a, b) in plain.samples.iter().zip(&relaxed.samples) {
        println!(
            "{:>8.1} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            a.t,
            (a.h - h0).abs(),
            a.error.unwrap_or(f64::NAN),
            (b.h - h0).abs(),
            b.error.unwrap_or(f64::NAN)
        );
    }
    if let Some((lo, hi)) = relaxed.gamma_range {
        println!("gamma in [{lo:.12}, {hi:.12}], {} fallbacks", relaxed.fallbacks);
    }
    Ok(())
}
