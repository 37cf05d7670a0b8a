//! Gap and boundedness of positive stationary solutions: the feasibility
//! window, the beta_0 roots, and the resulting bounds on min/max u.
//!
//! Run with: cargo run --release --example gap_theorem

use finsler_lab::checks::{beta0_roots, gap_check, gap_feasibility, CheckParams};
use finsler_lab::grid::{ScalarGrid, TorusDomain};
use finsler_lab::metric::{MeasureSpec, MetricSpec, Space};
use finsler_lab::solver::solve_stationary;

fn main() -> finsler_lab::Result<()> {
    // Parameter window: N = 4, a = -0.5 (alpha = 1/8), b = 1/2, AK = 0.
    let (n_eff, alpha, b) = (4.0, 0.125, 0.5);
    let (disc, roots) = beta0_roots(n_eff, alpha, b, 0.0);
    let (plus, minus) = roots.unwrap();
    println!("discriminant = {disc}, beta0+ = {plus}, beta0- = {minus}");
    match gap_feasibility(n_eff, alpha, b, 0.0) {
        Ok(_) => println!("feasibility window satisfied"),
        Err(e) => println!("infeasible: {e}"),
    }
    // Outside the window the conditions fail loudly.
    if let Err(e) = gap_feasibility(9.0, alpha, b, 0.0) {
        println!("N = 9 example: {e}");
    }

    let dom = TorusDomain::new(4.0, 4.0, 32, 32)?;
    let space = Space::new(dom, MetricSpec::Euclidean, MeasureSpec::lebesgue())?;
    let mut params = CheckParams::new(-0.5, b, 1.5, n_eff);
    params.k_curv = 0.0;
    params.a_mis = 1.0;

    // Case a < 0: solutions sit at or above 1 (here u = e^{-b/a} = sqrt(e) ... e).
    let fixed = (-b / -0.5f64).exp();
    println!("\nstationary solve from 1.1 * e^(-b/a) (a = -0.5, b = 0.5):");
    let u0 = ScalarGrid::constant(dom, 1.1 * fixed);
    let u_stat = solve_stationary(&space, &u0, -0.5, b, 1e-8, 2_000_000)?;
    println!("  converged to u = {:.9} (fixed point e^(-b/a) = {:.9})", u_stat.data[0], fixed);
    let report = gap_check(&space, &u_stat, &params)?;
    println!("  {}", report.verdict_line());
    for (k, v) in &report.details {
        println!("    {k} = {v:.6}");
    }

    // Case a > 0 with b = 0, K = 0: global solutions stay below e^{N/4}.
    let mut params = CheckParams::new(0.5, 0.0, 1.5, n_eff);
    params.k_curv = 0.0;
    params.a_mis = 1.0;
    let ones = ScalarGrid::constant(dom, 1.0);
    let u_stat = solve_stationary(&space, &ones, 0.5, 0.0, 1e-8, 10_000)?;
    let report = gap_check(&space, &u_stat, &params)?;
    println!("\nvacuum branch (a = 0.5, b = 0): {}", report.verdict_line());
    println!("  max u = {:.6} <= e^(N/4) = {:.6}", u_stat.max(), (n_eff / 4.0f64).exp());
    Ok(())
}
