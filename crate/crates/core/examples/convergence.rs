//! Observed convergence orders on the Dahlquist problem `u' = -u` for
//! Radau nodes with the jumper schedule, one line per sweep count.

use sdcrk::integrate::{convergence_study, dahlquist_problem, Scheme, StudyOptions};
use sdcrk::stability::C64;
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::{Precision, Real};

fn main() -> sdcrk::Result<()> {
    let s: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(4);
    let tab = NodeFamily::new(NodeKind::RadauIIA, s).tableau::<Real>(Precision(128))?;
    let sched = parse_schedule("zero,jumper")?.build(&tab, 4)?;
    let full = SdcMethod::new(tab.to_f64(), sched.convert(Precision::F64), FinalUpdate::LastStage)?;
    let p = dahlquist_problem(C64::new(-1.0, 0.0));
    let dts: Vec<f64> = (2..=7).map(|l| 0.5f64.powi(l)).collect();
    for k in 1..=4 {
        let study = convergence_study(&p, &Scheme::Sdc(full.truncated(k)?), &dts, &StudyOptions::default())?;
        let errs: Vec<String> = study.points.iter().map(|(_, e)| format!("{e:.2e}")).collect();
        match study.slope {
            Some(sl) => println!("K={k}  slope {sl:5.2}  errors {}", errs.join(" ")),
            None => println!("K={k}  saturated      errors {}", errs.join(" ")),
        }
    }
    Ok(())
}
