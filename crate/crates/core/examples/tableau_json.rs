//! Assembles an SDC method into one Runge-Kutta tableau and prints it as
//! JSON, e.g. `cargo run --example tableau_json -- gauss 2 zero,ie 2`.

use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::{Precision, Real};

fn main() -> sdcrk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind = NodeKind::parse(args.first().map_or("gauss", |s| s.as_str()))?;
    let s: usize = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(2);
    let sched = parse_schedule(args.get(2).map_or("zero,ie", |v| v.as_str()))?;
    let k: usize = args.get(3).and_then(|v| v.parse().ok()).unwrap_or(2);
    let tab = NodeFamily::new(kind, s).tableau::<Real>(Precision(128))?;
    let mode = if kind.ends_at_one() { FinalUpdate::LastStage } else { FinalUpdate::Quadrature };
    let method = SdcMethod::new(tab.clone(), sched.build(&tab, k)?, mode)?;
    println!("{}", method.assemble()?.to_json());
    Ok(())
}
