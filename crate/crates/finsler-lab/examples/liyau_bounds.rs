//! Li-Yau gradient bounds on a positive solution: the compact-space estimate
//! with measured curvature bounds, and the localized estimate on a forward
//! ball with the cut-off constants.
//!
//! Run with: cargo run --release --example liyau_bounds

use finsler_lab::checks::{
    cutoff_profile, h_field, j_field, liyau_compact_check, liyau_local_check, CheckParams,
};
use finsler_lab::curvature::{bound_scan, Region, ReferenceTag};
use finsler_lab::grid::{ScalarGrid, TorusDomain};
use finsler_lab::metric::{FourierParam, MeasureSpec, MetricSpec, Space};
use finsler_lab::solver::{solve, SolverConfig};
use finsler_lab::vec2::Vec2;
use std::f64::consts::PI;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 48, 48)?;
    let space = Space::new(
        dom,
        MetricSpec::Randers {
            lambda: FourierParam::ZERO,
            b1: FourierParam::mode(0.2, 0.1, 1, 1),
            b2: FourierParam::ZERO,
        },
        MeasureSpec::lebesgue(),
    )?;
    let u0 = ScalarGrid::from_fn(dom, |p| {
        2.0 + 0.5 * (2.0 * PI * p.x / 4.0).sin() * (2.0 * PI * p.y / 4.0).sin()
    });
    let cfg = SolverConfig::new(-0.5, 0.0, 0.5, vec![0.05, 0.1, 0.25, 0.5]);
    println!("integrating the flow (a = -0.5, b = 0) ...");
    let traj = solve(&space, &u0, &cfg)?;

    // Hypothesis for the compact estimate: Ric^N >= -K, measured by scanning.
    let mut params = CheckParams::new(-0.5, 0.0, 1.5, 4.0);
    let scan = bound_scan(&space, Region::Whole, 4.0, ReferenceTag::Velocity, 16)?;
    params.k_curv = scan.k_lower;
    println!("measured curvature bound K = {:.4} over {} samples", scan.k_lower, scan.node_samples);

    let compact = liyau_compact_check(&traj, &params)?;
    println!("{}", compact.verdict_line());

    // The proof-side fields: H and the J-diagnostic at its argmax.
    let h = h_field(&traj, 0.5, &params)?;
    let j = j_field(&traj, 0.5, &params)?;
    let (mut hmax, mut arg) = (f64::NEG_INFINITY, 0usize);
    for (k, &v) in h.data.iter().enumerate() {
        if v > hmax {
            hmax = v;
            arg = k;
        }
    }
    println!("max H(.,0.5) = {hmax:.4}; J there = {:.4} (must be <= 0)", j.data[arg]);

    // Local estimate on a ball: K(2R), A(2R) measured against grad r.
    let mut local = params.clone();
    local.center = Vec2::new(2.0, 2.0);
    local.radius = 0.8;
    let scan2 = bound_scan(
        &space,
        Region::Ball { center: local.center, radius: 1.6 },
        4.0,
        ReferenceTag::GradDistance { p: local.center },
        16,
    )?;
    local.k_curv = scan2.k_lower;
    local.a_mis = scan2.a_upper;
    println!("ball scan: K(2R) = {:.4}, A(2R) = {:.6}", scan2.k_lower, scan2.a_upper);
    let cutoff = cutoff_profile()?;
    let report = liyau_local_check(&space, &traj, &local, &cutoff)?;
    println!("{}", report.verdict_line());
    for (k, v) in &report.details {
        println!("  {k} = {v:.6}");
    }
    Ok(())
}
