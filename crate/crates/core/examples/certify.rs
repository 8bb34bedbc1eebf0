//! Stiff-limit nilpotency and per-sweep jump conditions for a schedule.

use sdcrk::order::jump_condition_at;
use sdcrk::stability::certify_stiff_nilpotency;
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::{Precision, Real};

fn main() -> sdcrk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let src = args.first().map_or("flex", |s| s.as_str());
    let s: usize = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(5);
    let tab = NodeFamily::new(NodeKind::RadauIIA, s).tableau::<Real>(Precision(256))?;
    let m = SdcMethod::new(tab.clone(), parse_schedule(src)?.build(&tab, s)?, FinalUpdate::LastStage)?;
    let mf = SdcMethod::new(tab.to_f64(), m.schedule.convert(Precision::F64), FinalUpdate::LastStage)?;
    let cert = certify_stiff_nilpotency(&mf, 1e-10)?;
    println!("{src} on {s} Radau nodes: stiff propagator norm {:.3e} (nilpotent: {})", cert.norm, cert.pass);
    for k in 1..=m.sweeps() {
        match jump_condition_at(&m, k, None, None) {
            Ok(c) => println!("  sweep {k}: stage order {} before, jump condition {}", c.stage_order, c.holds),
            Err(e) => println!("  sweep {k}: {e}"),
        }
    }
    Ok(())
}
