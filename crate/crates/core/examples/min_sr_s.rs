//! Searches a diagonal EED of minimal stiff spectral radius and compares it
//! with the MinSrFlex sweeps.

use sdcrk::tableau::{min_sr_s_eed, NodeFamily, NodeKind};
use sdcrk::Precision;

fn main() -> sdcrk::Result<()> {
    let s: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(4);
    let tab = NodeFamily::new(NodeKind::RadauIIA, s).tableau::<f64>(Precision::F64)?;
    let r = min_sr_s_eed(&tab, None, 7)?;
    println!("nodes     {:?}", tab.c);
    println!("diagonal  {:?}", r.diagonal);
    println!("radius    {:.3e} (converged: {})", r.spectral_radius, r.converged);
    Ok(())
}
