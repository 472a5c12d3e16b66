//! Prints the global power grid: E[N] in {25, 50, 100} x h in {1, 2, 3} x
//! {H1, H2, H3}.
//!
//!     cargo run --release -p markedk --example power_table -- [R] [B]

use markedk::experiments::timed;
use markedk::{default_rgrid, run_power, Hypothesis, ScenarioSpec, TestConfig, Window};

fn main() -> markedk::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let b: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(99);
    let grid = default_rgrid(&Window::unit_square(), 128)?;
    let mut cfg = TestConfig::new(grid, 0);
    cfg.replicates = b;

    println!("E[N],h,H1,H2,H3");
    for (ci, &n) in [25.0, 50.0, 100.0].iter().enumerate() {
        for h in 1..=3 {
            let mut row = format!("{n},{h}");
            for (hi, hyp) in Hypothesis::GLOBAL.iter().enumerate() {
                let seed = 1000 * ci as u64 + 10 * h as u64 + hi as u64;
                let scenario = ScenarioSpec::global_preset(*hyp, n, h as f64, seed);
                let (rep, secs) = timed(|| run_power(&scenario, *hyp, reps, &cfg, seed));
                let rep = rep?;
                row.push_str(&format!(",{:.2}", rep.power));
                eprintln!("{n} h={h} {hyp}: {:.2} ({secs:.1}s)", rep.power);
            }
            println!("{row}");
        }
    }
    Ok(())
}
