//! Prints the local classification grid: E[N] in {25, 50, 100} x
//! {TPR, FPR, ACC} x {H1L, H2L, H3L}, with counts pooled over replicates.
//!
//!     cargo run --release -p markedk --example classification_table -- [R] [B]

use markedk::experiments::timed;
use markedk::{default_rgrid, run_classification, Hypothesis, ScenarioSpec, TestConfig, Window};

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))
}

fn main() -> markedk::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let b: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(99);
    let grid = default_rgrid(&Window::unit_square(), 128)?;
    let mut cfg = TestConfig::new(grid, 0);
    cfg.replicates = b;

    println!("E[N],metric,H1L,H2L,H3L");
    for (ci, &n) in [25.0, 50.0, 100.0].iter().enumerate() {
        let mut rows = [format!("{n},TPR"), format!("{n},FPR"), format!("{n},ACC")];
        for (hi, hyp) in Hypothesis::LOCAL.iter().enumerate() {
            let seed = 5000 + 1000 * ci as u64 + hi as u64;
            let scenario = ScenarioSpec::local_preset(*hyp, n, seed);
            let (rep, secs) = timed(|| run_classification(&scenario, *hyp, reps, &cfg, seed));
            let rep = rep?;
            rows[0].push_str(&format!(",{}", fmt(rep.pooled.tpr)));
            rows[1].push_str(&format!(",{}", fmt(rep.pooled.fpr)));
            rows[2].push_str(&format!(",{}", fmt(rep.pooled.acc)));
            eprintln!("{n} {hyp}: {:?} ({secs:.1}s)", rep.counts);
        }
        for row in rows {
            println!("{row}");
        }
    }
    Ok(())
}
