//! Growth rate of the sweep error along the negative real axis for a few
//! schedules on Radau nodes.

use sdcrk::stability::{growth_rate, C64};
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::Precision;

fn main() -> sdcrk::Result<()> {
    let k = 10;
    let tab = NodeFamily::new(NodeKind::RadauIIA, 4).tableau::<f64>(Precision::F64)?;
    let zs = [-0.1, -1.0, -10.0, -100.0, -1e4];
    print!("{:<14}", "schedule");
    for z in zs {
        print!("{z:>12}");
    }
    println!();
    for src in ["zero,jumper", "picard", "ie", "lu", "flex"] {
        let m = SdcMethod::new(tab.clone(), parse_schedule(src)?.build(&tab, k)?, FinalUpdate::LastStage)?;
        print!("{src:<14}");
        for z in zs {
            match growth_rate(&m, C64::new(z, 0.0), k) {
                Ok(r) => print!("{r:>12.3e}"),
                Err(_) => print!("{:>12}", "pole"),
            }
        }
        println!();
    }
    Ok(())
}
