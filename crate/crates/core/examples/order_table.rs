//! Prints the order table of a schedule, e.g.
//! `cargo run --release --example order_table -- radau zero,jumper 8 15`.

use sdcrk::order::order_table;
use sdcrk::tableau::{parse_schedule, NodeKind};
use sdcrk::Precision;

fn main() -> sdcrk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nodes = NodeKind::parse(args.first().map_or("radau", |s| s.as_str()))?;
    let sched = parse_schedule(args.get(1).map_or("zero,jumper", |s| s.as_str()))?;
    let smax: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(6);
    let kmax: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(8);
    let smin = if nodes == NodeKind::LobattoIIIA { 2 } else { 1 };
    let s: Vec<usize> = (smin..=smax).collect();
    let t = order_table(nodes, &s, 1..=kmax, &sched, None, Precision(256))?;
    print!("{}", t.render());
    Ok(())
}
