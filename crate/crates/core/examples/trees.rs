//! Rooted trees up to a size with their density and symmetry, and the
//! elementary weight of each under a small SDC method next to `1/γ`.

use sdcrk::order::ElementaryWeights;
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::trees::{enumerate_trees, gamma, sigma};
use sdcrk::{Precision, Real, Scalar};

fn main() -> sdcrk::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let prec = Precision(128);
    let tab = NodeFamily::new(NodeKind::RadauIIA, 3).tableau::<Real>(prec)?;
    let sched = parse_schedule("zero,jumper")?.build(&tab, 2)?;
    let method = SdcMethod::new(tab, sched, FinalUpdate::LastStage)?;
    let mut w = ElementaryWeights::new(method.assemble()?);
    println!("{:<14} {:>4} {:>4} {:>6} {:>14}", "tree", "|t|", "h", "gamma", "Phi - 1/gamma");
    for t in enumerate_trees(n)? {
        let g = gamma(&t);
        let phi = w.weight(&t).to_f64();
        println!(
            "{:<14} {:>4} {:>4} {:>6} {:>14.3e}   sigma={}",
            t.to_brackets(),
            t.size(),
            t.height(),
            g,
            phi - 1.0 / g as f64,
            sigma(&t)
        );
    }
    Ok(())
}
