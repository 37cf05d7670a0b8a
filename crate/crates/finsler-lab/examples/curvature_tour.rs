//! Spray, Chern connection, flag/Ricci/S-curvature and the weighted
//! curvatures, with the closed-form conformal oracles alongside.
//!
//! Run with: cargo run --release --example curvature_tour

use finsler_lab::curvature::{
    chern_coefficients, conformal_christoffel, conformal_gauss_curvature, flag_curvature,
    mixed_weighted_ricci, ricci, s_curvature, spray, weighted_ricci,
};
use finsler_lab::grid::TorusDomain;
use finsler_lab::metric::{FourierParam, MeasureSpec, MetricSpec, Space};
use finsler_lab::vec2::Vec2;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 32, 32)?;
    let conformal = Space::new(dom, MetricSpec::conformal(0.05, 1, 1), MeasureSpec::lebesgue())?;
    let x = Vec2::new(0.9, 1.7);
    let v = Vec2::new(0.8, 0.5);
    let u = Vec2::new(-0.4, 1.0);

    println!("== conformal metric (Riemannian reduction)");
    let g_spray = spray(&conformal, x, v)?;
    println!("  spray G = ({:.6e}, {:.6e})", g_spray.x, g_spray.y);
    let cc = chern_coefficients(&conformal, x, v)?;
    let chr = conformal_christoffel(&conformal, x).unwrap();
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                worst = worst.max((cc.gamma[i][j][k] - chr[i][j][k]).abs());
            }
        }
    }
    println!("  max |Chern - Christoffel| = {worst:.2e}");
    let kf = flag_curvature(&conformal, x, v, u)?;
    let kg = conformal_gauss_curvature(&conformal, x).unwrap();
    println!("  flag curvature {kf:.6} vs Gaussian curvature {kg:.6}");
    let ric = ricci(&conformal, x, v)?;
    println!("  Ricci = {ric:.6} (= F^2 K in dimension 2)");
    let (s, sdot) = s_curvature(&conformal, x, v)?;
    println!("  S-curvature = {s:.6}, S_dot = {sdot:.6} (Lebesgue measure)");

    println!("\n== randers metric with varying drift");
    let randers = Space::new(
        dom,
        MetricSpec::Randers {
            lambda: FourierParam::ZERO,
            b1: FourierParam::mode(0.2, 0.1, 1, 1),
            b2: FourierParam::ZERO,
        },
        MeasureSpec::lebesgue(),
    )?;
    let (s, sdot) = s_curvature(&randers, x, v)?;
    println!("  S = {s:.6}, S_dot = {sdot:.6}");
    for n_eff in [4.0, 8.0, f64::INFINITY] {
        let r = weighted_ricci(&randers, x, v, n_eff)?;
        println!("  Ric^{{{n_eff}}} = {r:.6}");
    }
    let w = Vec2::new(1.0, 0.0);
    let mixed = mixed_weighted_ricci(&randers, x, v, w, 4.0)?;
    let plain = weighted_ricci(&randers, x, v, 4.0)?;
    println!("  mixed Ric^4 against w = e1: {mixed:.6} (w = v gives {plain:.6})");
    let same = mixed_weighted_ricci(&randers, x, v, v, 4.0)?;
    println!("  reduction check |mRic^4_v - Ric^4| = {:.2e}", (same - plain).abs());
    Ok(())
}
