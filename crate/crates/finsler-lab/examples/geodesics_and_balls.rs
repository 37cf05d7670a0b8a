//! Geodesic shooting, the exponential map, forward distance fields and the
//! asymmetry of geodesic balls under a drift.
//!
//! Run with: cargo run --release --example geodesics_and_balls

use finsler_lab::distance::{ball_mask, distance_field, forward_distance};
use finsler_lab::geodesics::{exp_map, geodesic_shoot};
use finsler_lab::grid::TorusDomain;
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::vec2::Vec2;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 64, 64)?;
    let space = Space::new(dom, MetricSpec::randers_const(0.3, 0.0), MeasureSpec::lebesgue())?;
    let p = Vec2::new(2.0, 2.0);

    // Constant-drift Randers metrics are locally Minkowski: straight geodesics.
    let path = geodesic_shoot(&space, p, Vec2::new(0.6, 0.3), 1.0, 128)?;
    let end = *path.points.last().unwrap();
    println!("geodesic endpoint: ({:.6}, {:.6})  (straight line expected)", end.x, end.y);
    let e = exp_map(&space, p, Vec2::new(0.5, 0.0))?;
    println!("exp_p(0.5 e1) = ({:.6}, {:.6})", e.x, e.y);

    // Forward distances are asymmetric: the drift helps +e1, hinders -e1.
    let q = Vec2::new(2.75, 2.0);
    let fwd = forward_distance(&space, p, q)?;
    let bwd = forward_distance(&space, q, p)?;
    println!("d(p, p + 0.75 e1) = {fwd:.4}  (1.3 * 0.75 = {:.4})", 1.3 * 0.75);
    println!("d(p + 0.75 e1, p) = {bwd:.4}  (0.7 * 0.75 = {:.4})", 0.7 * 0.75);

    // The unit forward ball bulges against the drift.
    let mask = ball_mask(&space, p, 1.0)?;
    let cell = dom.h1() * dom.h2();
    let area: f64 = mask.iter().filter(|&&b| b).count() as f64 * cell;
    let mut centroid = Vec2::ZERO;
    let mut count = 0usize;
    for (k, &inside) in mask.iter().enumerate() {
        if inside {
            centroid = centroid + dom.min_image(p, dom.point_of(k));
            count += 1;
        }
    }
    centroid = centroid.scale(1.0 / count as f64);
    println!("forward ball B+_p(1): area = {area:.4}, centroid offset = ({:.4}, {:.4})", centroid.x, centroid.y);

    // Cut-locus proxy: spike-detected nodes of the distance field.
    let field = distance_field(&space, p)?;
    let flagged = field.nonsmooth.iter().filter(|&&b| b).count();
    println!("nonsmooth mask flags {flagged} of {} nodes", dom.nodes());
    Ok(())
}
