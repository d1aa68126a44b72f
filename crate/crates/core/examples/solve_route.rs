//! Solves a builtin route for both objectives and prints the headline metrics.
//!
//! ```text
//! cargo run --release -p ecodrive --example solve_route -- route1
//! ```

use std::time::Instant;

use ecodrive::dp::{extract_trajectory, solve, Objective};
use ecodrive::evaluate::metrics;
use ecodrive::scenario::load_scenario;

fn main() -> ecodrive::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "route1".into());
    let eta: f64 = std::env::args()
        .nth(2)
        .map_or(0.0, |s| s.parse().expect("eta"));
    let mut s = load_scenario(&name)?;
    if let Some(tf) = std::env::args().nth(3) {
        s.route.deadline = tf.parse().expect("deadline");
    }
    for objective in [Objective::Time, Objective::Fuel] {
        let start = Instant::now();
        let sol = solve(&s.route, &s.vehicle, &s.grid, objective, eta)?;
        let traj = extract_trajectory(&sol, &s.route, &s.vehicle)?;
        let m = metrics(&traj)?;
        println!(
            "{:<8} arrival {:>7.2} s  fuel {:>7.2} g  bsfc {:>6.1}  stops {}  clocks {:?}  ({:.1?})",
            objective.label(),
            m.arrival_time,
            m.total_fuel,
            m.avg_bsfc.unwrap_or(f64::NAN),
            m.complete_stops,
            m.passing_clocks,
            start.elapsed()
        );
    }
    Ok(())
}
