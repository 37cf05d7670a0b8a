//! The pointwise Bochner inequality on test functions and the Laplacian
//! comparison for the forward distance function.
//!
//! Run with: cargo run --release --example bochner_comparison

use finsler_lab::checks::{bochner_check, comparison_check, CheckParams};
use finsler_lab::grid::{ScalarGrid, TorusDomain};
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::vec2::Vec2;
use std::f64::consts::PI;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 64, 64)?;
    let conformal = Space::new(dom, MetricSpec::conformal(0.05, 1, 1), MeasureSpec::lebesgue())?;
    let params = CheckParams::new(-0.5, 0.0, 1.5, 4.0);

    println!("== Bochner inequality, conformal fixture");
    let k = 2.0 * PI / 4.0;
    for (label, u) in [
        ("sin(k x)", ScalarGrid::from_fn(dom, |p| (k * p.x).sin())),
        (
            "mixed modes",
            ScalarGrid::from_fn(dom, |p| {
                0.6 * (k * p.x).sin() * (k * p.y).sin() + 0.3 * (2.0 * k * p.y).cos()
            }),
        ),
    ] {
        let report = bochner_check(&conformal, &u, 4.0, &params, Some(1e-4))?;
        println!("  {label}: {}", report.verdict_line());
    }
    // N = infinity drops the (Lap u)^2 / N term.
    let u = ScalarGrid::from_fn(dom, |p| (k * p.x).sin());
    let inf = bochner_check(&conformal, &u, f64::INFINITY, &params, Some(1e-4))?;
    println!("  N = inf variant: {}", inf.verdict_line());

    println!("\n== Laplacian comparison, Lap^V r <= C(N,A) sqrt(l) coth(sqrt(l) r) + sqrt(A) K0");
    let mut cparams = params.clone();
    cparams.radius = 1.2;
    cparams.center = Vec2::new(2.0, 2.0);
    // Conformal curvature can dip negative: measure K over the ball first.
    let scan = finsler_lab::curvature::bound_scan(
        &conformal,
        finsler_lab::curvature::Region::Ball { center: cparams.center, radius: 1.9 },
        4.0,
        finsler_lab::curvature::ReferenceTag::GradDistance { p: cparams.center },
        16,
    )?;
    cparams.k_curv = scan.k_lower;
    cparams.a_mis = scan.a_upper;
    println!("  measured K = {:.4}, A = {:.4}", cparams.k_curv, cparams.a_mis);
    let report = comparison_check(&conformal, cparams.center, &cparams, None)?;
    println!("  {}", report.verdict_line());
    Ok(())
}
