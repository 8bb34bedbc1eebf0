//! Stability region of an assembled SDC method on a coarse grid, drawn as
//! characters: `#` where `|R(z)| <= 1`, `P` at poles.

use sdcrk::stability::{stability_region, GridSpec};
use sdcrk::tableau::{parse_schedule, FinalUpdate, NodeFamily, NodeKind, SdcMethod};
use sdcrk::{Precision, Real};

fn main() -> sdcrk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sched = parse_schedule(args.first().map_or("zero,jumper", |s| s.as_str()))?;
    let k: usize = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(3);
    let tab = NodeFamily::new(NodeKind::RadauIIA, 3).tableau::<Real>(Precision(128))?;
    let method = SdcMethod::new(tab.clone(), sched.build(&tab, k)?, FinalUpdate::LastStage)?;
    let spec = GridSpec { n_re: 76, n_im: 31, ..GridSpec::default() };
    let grid = stability_region(&method.assemble()?.to_f64(), &spec)?;
    for i in (0..spec.n_im).rev() {
        let line: String = (0..spec.n_re)
            .map(|j| match (grid.is_pole(i, j), grid.get(i, j) <= 1.0) {
                (true, _) => 'P',
                (false, true) => '#',
                _ => '.',
            })
            .collect();
        println!("{line}");
    }
    println!("re in [{}, {}], im in [{}, {}]", spec.re_min, spec.re_max, spec.im_min, spec.im_max);
    Ok(())
}
