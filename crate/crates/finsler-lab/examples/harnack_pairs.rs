//! Harnack comparison of a positive solution at two space-time points via the
//! Theta integral, including the exact closed form of the heat case.
//!
//! Run with: cargo run --release --example harnack_pairs

use finsler_lab::checks::{harnack_check, harnack_theta, CheckParams, HarnackPair};
use finsler_lab::grid::{ScalarGrid, TorusDomain};
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::solver::{solve, SolverConfig};
use finsler_lab::vec2::Vec2;
use std::f64::consts::PI;

fn main() -> finsler_lab::Result<()> {
    // Closed-form sanity: a = 0, b = 0, K = 0 gives
    // Theta = (N beta / 2) log(t2/t1) + beta d^2 / (4 (t2 - t1)).
    let heat_params = CheckParams::new(0.0, 0.0, 1.5, 4.0);
    let (d, t1, t2) = (0.8, 0.2, 0.9);
    let theta = harnack_theta(&heat_params, d, t1, t2)?;
    let exact = 4.0 * 1.5 / 2.0 * (t2 / t1).ln() + 1.5 * d * d / (4.0 * (t2 - t1));
    println!("theta quadrature = {theta:.10}");
    println!("heat closed form = {exact:.10}  (rel err {:.1e})", ((theta - exact) / exact).abs());

    // Pair checks on an actual run.
    let dom = TorusDomain::new(4.0, 4.0, 48, 48)?;
    let space = Space::new(dom, MetricSpec::Euclidean, MeasureSpec::lebesgue())?;
    let u0 = ScalarGrid::from_fn(dom, |p| 2.0 + (2.0 * PI * p.x / 4.0).sin());
    let cfg = SolverConfig::new(1e-6, 0.0, 1.0, vec![0.2, 0.5, 1.0]);
    println!("\nintegrating a near-heat run ...");
    let traj = solve(&space, &u0, &cfg)?;
    let params = CheckParams::new(1e-6, 0.0, 1.5, 4.0);

    let mut rng = space.rng(7);
    let mut pairs = Vec::new();
    for _ in 0..10 {
        pairs.push(HarnackPair {
            x1: dom.point_of(rng.usize_below(dom.nodes())),
            x2: dom.point_of(rng.usize_below(dom.nodes())),
            t1: 0.2,
            t2: if rng.next_f64() < 0.5 { 0.5 } else { 1.0 },
        });
    }
    // One degenerate pair: same point, nested times.
    pairs.push(HarnackPair { x1: Vec2::new(1.0, 1.0), x2: Vec2::new(1.0, 1.0), t1: 0.5, t2: 1.0 });

    let report = harnack_check(&space, &traj, &params, &pairs)?;
    println!("{}", report.verdict_line());
    println!("(log-margins <= 0 mean the inequality holds with room)");
    Ok(())
}
