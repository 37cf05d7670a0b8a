//! Gap and boundedness checks for positive stationary solutions of
//! Lap^{grad u} u + a u log u + b u = 0.
//!
//! Two branches:
//!
//! * b > 0 with curvature bound -K: feasibility window
//!   2 < N < 2b/alpha and 0 <= AK <= 4b/N + 2 alpha - 4 sqrt(2 b alpha / N),
//!   which makes the quadratic N alpha beta^2 - (4b + 2 N alpha - NAK)/4 ...
//!   admit roots beta_0^{+-} >= 1; substituting beta_0 forces
//!   F^2(grad f) + beta_0 a f <= 0 pointwise, hence u >= 1 (a < 0) or
//!   u <= 1 (a > 0).
//! * b = 0, K = 0: u >= e^{-N/8} (a < 0) or u <= e^{N/4} (a > 0).
//!
//! At AK = 0 the lower root is exactly 1 (the boundary of the admissible
//! window); the feasibility gate therefore requires beta_0^+ > 1.

use super::{CheckParams, CheckReport};
use crate::error::{Error, Result};
use crate::grid::ScalarGrid;
use crate::metric::Space;
use crate::solver::Discretization;

/// Discriminant and roots of the beta-quadratic:
/// beta_0^{+-} = [4b + 2 N alpha - NAK +- sqrt((NAK - 4b - 2 N alpha)^2 - 32 N b alpha)] / (4 N alpha).
pub fn beta0_roots(n_eff: f64, alpha: f64, b: f64, ak: f64) -> (f64, Option<(f64, f64)>) {
    let disc = (n_eff * ak - 4.0 * b - 2.0 * n_eff * alpha).powi(2) - 32.0 * n_eff * b * alpha;
    if disc < 0.0 || alpha <= 0.0 {
        return (disc, None);
    }
    let num = 4.0 * b + 2.0 * n_eff * alpha - n_eff * ak;
    let den = 4.0 * n_eff * alpha;
    let root = disc.sqrt();
    (disc, Some(((num + root) / den, (num - root) / den)))
}

/// Check the feasibility window; returns (discriminant, beta0_plus, beta0_minus).
pub fn gap_feasibility(n_eff: f64, alpha: f64, b: f64, ak: f64) -> Result<(f64, f64, f64)> {
    if !(n_eff > 2.0) {
        return Err(Error::ConditionsInfeasible {
            detail: format!("N = {n_eff} must exceed n = 2"),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::ConditionsInfeasible {
            detail: "alpha = max(a/2, -a/4) must be positive (a != 0)".into(),
        });
    }
    if !(n_eff < 2.0 * b / alpha) {
        return Err(Error::ConditionsInfeasible {
            detail: format!("N = {n_eff} >= 2b/alpha = {}", 2.0 * b / alpha),
        });
    }
    let cap = 4.0 * b / n_eff + 2.0 * alpha - 4.0 * (2.0 * b * alpha / n_eff).sqrt();
    if !(ak >= 0.0 && ak <= cap) {
        return Err(Error::ConditionsInfeasible {
            detail: format!("AK = {ak} outside [0, {cap}]"),
        });
    }
    let (disc, roots) = beta0_roots(n_eff, alpha, b, ak);
    let (plus, minus) = roots.ok_or(Error::ConditionsInfeasible {
        detail: format!("beta0 discriminant {disc} negative"),
    })?;
    if !(plus > 1.0) {
        return Err(Error::ConditionsInfeasible {
            detail: format!("beta0+ = {plus} not above 1"),
        });
    }
    Ok((disc, plus, minus))
}

/// Verify the gap/boundedness conclusion on a stationary solution.
pub fn gap_check(space: &Space, u_stat: &ScalarGrid, params: &CheckParams) -> Result<CheckReport> {
    if params.a == 0.0 {
        return Err(Error::Config { line: 0, detail: "gap check requires a != 0".into() });
    }
    let min_u = u_stat.min();
    if min_u <= 0.0 {
        return Err(Error::NonPositive { min: min_u });
    }
    let alpha = params.alpha();
    let ak = params.a_mis * params.k_curv;
    let n = params.n_eff;
    let vacuum_branch = params.b == 0.0 && params.k_curv == 0.0;

    let mut details: Vec<(String, f64)> = Vec::new();
    let beta0 = if vacuum_branch {
        details.push(("branch_b0_k0".into(), 1.0));
        1.0
    } else {
        let (disc, plus, minus) = gap_feasibility(n, alpha, params.b, ak)?;
        details.push(("discriminant".into(), disc));
        details.push(("beta0_plus".into(), plus));
        details.push(("beta0_minus".into(), minus));
        plus
    };

    let (bound, pass, margin) = if vacuum_branch {
        if params.a < 0.0 {
            let bound = (-n / 8.0).exp();
            (bound, u_stat.min() >= bound - params.tol.gap, bound - u_stat.min())
        } else {
            let bound = (n / 4.0).exp();
            (bound, u_stat.max() <= bound + params.tol.gap, u_stat.max() - bound)
        }
    } else if params.a < 0.0 {
        (1.0, u_stat.min() >= 1.0 - params.tol.gap, 1.0 - u_stat.min())
    } else {
        (1.0, u_stat.max() <= 1.0 + params.tol.gap, u_stat.max() - 1.0)
    };

    // Stationary-estimate diagnostic: F^2(grad f) + beta0 a f <= 0 pointwise
    // (with beta0 = 1 in the b = 0, K = 0 branch the slack N alpha / 2 applies).
    let disc_op = Discretization::new(space);
    let f = u_stat.map(f64::ln);
    let f2 = disc_op.grad_norm2(&f);
    let slack = if vacuum_branch { n * alpha / 2.0 } else { 0.0 };
    let mut diag_max = f64::NEG_INFINITY;
    for k in 0..u_stat.data.len() {
        diag_max = diag_max.max(f2.data[k] + beta0 * params.a * f.data[k] - slack);
    }
    details.push(("stationary_estimate_max".into(), diag_max));
    details.push(("bound".into(), bound));
    details.push(("min_u".into(), u_stat.min()));
    details.push(("max_u".into(), u_stat.max()));

    let mut report = CheckReport::new("check-gap", pass, margin);
    report.details = details;
    report.params_echo = format!(
        "N={} a={} b={} K={} A={} alpha={alpha}",
        n, params.a, params.b, params.k_curv, params.a_mis
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusDomain;
    use crate::metric::{MeasureSpec, MetricSpec, Space};

    fn euclid() -> Space {
        let dom = TorusDomain::new(4.0, 4.0, 16, 16).unwrap();
        Space::new(dom, MetricSpec::Euclidean, MeasureSpec::lebesgue()).unwrap()
    }

    #[test]
    fn frozen_fixture_roots() {
        // N = 4, a = -0.5 (alpha = 0.125), b = 0.5, AK = 0:
        // discriminant (0 - 2 - 1)^2 - 8 = 1, roots (3 +- 1)/2 = {2, 1}.
        let (disc, roots) = beta0_roots(4.0, 0.125, 0.5, 0.0);
        assert!((disc - 1.0).abs() < 1e-12);
        let (plus, minus) = roots.unwrap();
        assert!((plus - 2.0).abs() < 1e-12);
        assert!((minus - 1.0).abs() < 1e-12);
        let (d2, p2, m2) = gap_feasibility(4.0, 0.125, 0.5, 0.0).unwrap();
        assert_eq!((d2, p2, m2), (disc, plus, minus));
    }

    #[test]
    fn feasibility_window_is_enforced() {
        // N too large: N >= 2b/alpha.
        assert!(matches!(
            gap_feasibility(9.0, 0.125, 0.5, 0.0),
            Err(Error::ConditionsInfeasible { .. })
        ));
        // AK above the cap (cap ~ 0.0429 for the fixture).
        assert!(matches!(
            gap_feasibility(4.0, 0.125, 0.5, 0.1),
            Err(Error::ConditionsInfeasible { .. })
        ));
        // Inside the window with small AK > 0: both roots strictly above 1.
        let (_, plus, minus) = gap_feasibility(4.0, 0.125, 0.5, 0.02).unwrap();
        assert!(minus > 1.0 && plus > minus);
    }

    #[test]
    fn brute_force_beta_scan_agrees_with_the_roots() {
        // The roots bracket the set { beta > 1 : beta b >= (N beta^2/2)(alpha + AK/(2(beta-1))) }.
        let (n, alpha, b, ak) = (4.0, 0.125, 0.5, 0.02);
        let (_, plus, minus) = gap_feasibility(n, alpha, b, ak).unwrap();
        let g = |beta: f64| beta * b - n * beta * beta / 2.0 * (alpha + ak / (2.0 * (beta - 1.0)));
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut beta = 1.001;
        while beta <= 100.0 {
            if g(beta) >= 0.0 {
                lo = lo.min(beta);
                hi = hi.max(beta);
            }
            beta += 1e-3;
        }
        assert!((lo - minus).abs() < 2e-3, "scan lower {lo} vs root {minus}");
        assert!((hi - plus).abs() < 2e-3, "scan upper {hi} vs root {plus}");
    }

    #[test]
    fn constant_solution_passes_case_one() {
        let s = euclid();
        let mut params = CheckParams::new(-0.5, 0.5, 1.5, 4.0);
        params.k_curv = 0.0;
        params.a_mis = 1.0;
        // u = e^{-b/a} = e: min u = e >= 1.
        let u = ScalarGrid::constant(s.domain, std::f64::consts::E);
        let rep = gap_check(&s, &u, &params).unwrap();
        assert!(rep.pass, "margin {}", rep.margin);
        let diag = rep
            .details
            .iter()
            .find(|(k, _)| k == "stationary_estimate_max")
            .unwrap()
            .1;
        // F^2 = 0 and beta0 a f = 2 * (-0.5) * 1 = -1 < 0.
        assert!(diag < 0.0);
    }

    #[test]
    fn vacuum_branch_bounds() {
        let s = euclid();
        let mut params = CheckParams::new(0.5, 0.0, 1.5, 4.0);
        params.k_curv = 0.0;
        params.a_mis = 1.0;
        let u = ScalarGrid::constant(s.domain, 1.0);
        let rep = gap_check(&s, &u, &params).unwrap();
        assert!(rep.pass);
        // max u = 1 <= e^{N/4} = e.
        assert!((rep.details.iter().find(|(k, _)| k == "bound").unwrap().1
            - (4.0f64 / 4.0).exp())
        .abs()
            < 1e-12);
        // a < 0 branch with a violating field.
        params.a = -0.5;
        let low = ScalarGrid::constant(s.domain, 0.5 * (-1.0f64).exp());
        let rep = gap_check(&s, &low, &params).unwrap();
        assert!(!rep.pass, "u far below e^{{-N/8}} must fail");
    }

    #[test]
    fn preconditions() {
        let s = euclid();
        let params = CheckParams::new(0.0, 0.5, 1.5, 4.0);
        let u = ScalarGrid::constant(s.domain, 1.0);
        assert!(gap_check(&s, &u, &params).is_err());
        let params = CheckParams::new(-0.5, 0.5, 1.5, 4.0);
        let bad = ScalarGrid::constant(s.domain, -1.0);
        assert!(matches!(gap_check(&s, &bad, &params), Err(Error::NonPositive { .. })));
    }
}
