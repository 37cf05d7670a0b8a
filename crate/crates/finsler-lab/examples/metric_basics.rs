//! Norms, fundamental and Cartan tensors, Legendre duality and misalignment
//! across the three metric families.
//!
//! Run with: cargo run --release --example metric_basics

use finsler_lab::grid::TorusDomain;
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::vec2::Vec2;

fn main() -> finsler_lab::Result<()> {
    let dom = TorusDomain::new(4.0, 4.0, 32, 32)?;
    let families = [
        ("euclidean", MetricSpec::Euclidean),
        ("conformal (eps = 0.05)", MetricSpec::conformal(0.05, 1, 1)),
        ("randers (b = (0.3, 0))", MetricSpec::randers_const(0.3, 0.0)),
    ];
    let x = Vec2::new(0.7, 1.3);
    let v = Vec2::new(1.0, 0.0);
    let xi = Vec2::new(1.0, 0.0);

    for (name, metric) in families {
        let space = Space::new(dom, metric, MeasureSpec::lebesgue())?;
        println!("== {name}");
        println!("  F(x, +e1) = {:.6}", space.eval_f(x, v));
        println!("  F(x, -e1) = {:.6}  (asymmetric for randers)", space.eval_f(x, -v));

        let g = space.fundamental_tensor(x, v)?;
        println!("  g(x, e1)  = [{:.4} {:.4}; {:.4} {:.4}]", g.xx, g.xy, g.xy, g.yy);
        let (lo, hi) = g.eigenvalues();
        println!("  eigenvalues {lo:.4}, {hi:.4} (positive definite)");

        let c = space.cartan_tensor(x, Vec2::new(0.0, 1.0))?;
        println!("  |Cartan|  = {:.3e}  (zero iff Riemannian)", c.max_abs());

        // Legendre duality: xi(L* xi) = F*(xi)^2 and F(L* xi) = F*(xi).
        let fstar = space.dual_norm(x, xi);
        let back = space.legendre_transform(x, xi);
        println!(
            "  F*(xi) = {:.6}, pairing defect = {:.2e}, norm defect = {:.2e}",
            fstar,
            (xi.dot(back) - fstar * fstar).abs(),
            (space.eval_f(x, back) - fstar).abs()
        );

        println!("  misalignment alpha(x) = {:.8}", space.misalignment(x, 128));
    }
    Ok(())
}
