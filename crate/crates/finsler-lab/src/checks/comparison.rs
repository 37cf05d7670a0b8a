//! Laplacian comparison check on the forward distance function:
//!
//! ```text
//! Lap^V r <= C(N, A) sqrt(l) coth(sqrt(l) r) + sqrt(A) K0,   l = K / C(N, A)
//! ```
//!
//! wherever r is C^2. Excluded from the maximum: nodes within 2 meshes of the
//! center, the spike-detected cut locus (dilated by the stencil reach), and
//! the wrap-affected outer region.

use super::{CheckParams, CheckReport};
use crate::checks::liyau::comparison_constant;
use crate::distance;
use crate::error::{Error, Result};
use crate::grid::VecGrid;
use crate::metric::Space;
use crate::solver::Discretization;
use crate::vec2::Vec2;

/// Right side of the comparison inequality, stable for small l.
pub fn comparison_rhs(params: &CheckParams, r: f64) -> f64 {
    let c = comparison_constant(params.n_eff, params.a_mis);
    let l = params.k_curv / c;
    let base = if l * r * r < 1e-8 {
        // sqrt(l) coth(sqrt(l) r) -> 1/r + l r / 3 as l -> 0.
        c * (1.0 / r + l * r / 3.0)
    } else {
        let x = l.sqrt() * r;
        c * l.sqrt() / x.tanh()
    };
    base + params.a_mis.sqrt() * params.k0
}

/// Evaluate the comparison inequality with reference field V (defaults to
/// grad r when not supplied). Margin = max over included nodes of LHS - RHS;
/// pass when the margin stays below the absolute comparison tolerance.
pub fn comparison_check(
    space: &Space,
    p: Vec2,
    params: &CheckParams,
    v_override: Option<&VecGrid>,
) -> Result<CheckReport> {
    params.validate()?;
    let dom = space.domain;
    let limit = 0.5 * dom.l1.min(dom.l2);
    if params.radius >= limit {
        return Err(Error::BallWraps { r: params.radius, limit });
    }
    let df = distance::distance_field(space, p)?;
    let grad_r = df.gradient(space);
    let v_field = v_override.unwrap_or(&grad_r);

    // Lap^V r = div_mu of the g_V-raised differential of r.
    let disc = Discretization::new(space);
    let dr = disc.differential(&df.r);
    let mut raised = VecGrid::zeros(dom);
    for k in 0..dom.nodes() {
        let x = dom.point_of(k);
        let v = v_field.data[k];
        if space.eval_f(x, v) <= space.eta {
            continue;
        }
        let g_inv = space.metric_data(x).fundamental(v).inverse();
        raised.data[k] = g_inv.mul_vec(dr.data[k]);
    }
    let lap_r = disc.divergence_mu(&raised);

    // Exclusions: near-center, nonsmooth mask dilated by the stencil reach,
    // wrap-affected outer band, degenerate reference vectors.
    let reach = 4isize;
    let dilated: Vec<bool> = (0..dom.nodes())
        .map(|k| {
            let (i, j) = dom.ij(k);
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    if df.nonsmooth[dom.idx(i as isize + di, j as isize + dj)] {
                        return true;
                    }
                }
            }
            false
        })
        .collect();
    let h = dom.min_mesh();
    let mut margin = f64::NEG_INFINITY;
    let mut argmax = Vec2::ZERO;
    let mut excluded = 0usize;
    let mut included = 0usize;
    let mut rows = Vec::new();
    for k in 0..dom.nodes() {
        let r = df.r.data[k];
        let inside = r > 2.0 * h && r < params.radius;
        if !inside {
            continue;
        }
        let x = dom.point_of(k);
        if dilated[k] || space.eval_f(x, v_field.data[k]) <= space.eta {
            excluded += 1;
            continue;
        }
        included += 1;
        let rhs = comparison_rhs(params, r);
        let m = lap_r.data[k] - rhs;
        if m > margin {
            margin = m;
            argmax = x;
        }
        if included % 97 == 0 {
            rows.push(format!("{:.6},{:.6},{:.6},{:.9e},{:.9e},{:.9e}", x.x, x.y, r, lap_r.data[k], rhs, m));
        }
    }
    let pass = included > 0 && margin <= params.tol.comparison;
    let mut report = CheckReport::new("check-comparison", pass, margin);
    report.argmax_x = Some(argmax);
    report.excluded = excluded;
    report.params_echo = format!(
        "N={} K={} A={} K0={} R={} included={included}",
        params.n_eff, params.k_curv, params.a_mis, params.k0, params.radius
    );
    report.csv_header = Some("x1,x2,r,lap_r,rhs,margin".into());
    report.csv_rows = rows;
    Ok(report)
}
