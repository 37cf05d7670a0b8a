//! Pure heat flow (a = b = 0): exact mass conservation and the Fourier decay
//! law of a single mode.
//!
//! Run with: cargo run --release --example heat_flow

use finsler_lab::grid::{sine_mode_amplitude, ScalarGrid, TorusDomain};
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::solver::{integral_mu, solve, SolverConfig};
use std::f64::consts::PI;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 64, 64)?;
    let space = Space::new(dom, MetricSpec::Euclidean, MeasureSpec::lebesgue())?;
    let k = 2.0 * PI / dom.l1;
    let u0 = ScalarGrid::from_fn(dom, |p| 2.0 + (k * p.x).sin());

    let cfg = SolverConfig::new(0.0, 0.0, 0.5, vec![0.1, 0.2, 0.3, 0.4, 0.5]);
    let traj = solve(&space, &u0, &cfg)?;

    let m0 = integral_mu(&space, &u0);
    println!("t        amplitude   exp(-k^2 t)   mass drift");
    for snap in &traj.snapshots {
        let amp = sine_mode_amplitude(&snap.u, 1, 0);
        let law = (-k * k * snap.t).exp();
        let mass = integral_mu(&space, &snap.u);
        println!(
            "{:.2}   {:.6}     {:.6}      {:+.2e}",
            snap.t,
            amp,
            law,
            (mass - m0) / m0
        );
    }
    Ok(())
}
