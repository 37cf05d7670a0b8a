//! Li-Yau gradient-estimate checks, compact and local.
//!
//! The estimate bounds, for positive solutions u and f = log u,
//!
//! ```text
//! LHS = F^2(grad f) + beta a f + beta b - beta f_t
//! ```
//!
//! by `(N beta^2 / 2) { 1/t + alpha + K / (2(beta-1)) }` on a compact space
//! with Ric^N >= -K, and by the delta-weighted radius-corrected form on a
//! forward ball when only the mixed weighted Ricci and misalignment are
//! bounded. The local right side is assembled at proof fidelity through the
//! constant
//!
//! ```text
//! B = 2 c1^2 A / R^2 + c2 A / R^2 + (c1 / R^2)(C(N,A)(1 + R sqrt(l)) + c0 R)
//! ```
//!
//! with C(N, A) = N + (A-1) n - A, l = K / C(N, A), c0 = sqrt(A) K0.

use super::{CheckParams, CheckReport};
use crate::checks::cutoff::CutoffProfile;
use crate::distance;
use crate::error::{Error, Result};
use crate::grid::ScalarGrid;
use crate::metric::Space;
use crate::solver::Trajectory;

/// H(x, t) = t { F^2(grad f) + beta (a f + b - f_t) }; the b term carries the
/// reduction of the b != 0 equation to the b = 0 form.
pub fn h_field(traj: &Trajectory, t: f64, params: &CheckParams) -> Result<ScalarGrid> {
    let snap = traj.snapshot_at(t)?;
    let beta = params.beta;
    let (a, b) = (params.a, params.b);
    Ok(ScalarGrid {
        domain: snap.u.domain,
        data: (0..snap.u.data.len())
            .map(|k| {
                t * (snap.f2_grad_f.data[k]
                    + beta * (a * snap.f.data[k] + b - snap.f_t.data[k]))
            })
            .collect(),
    })
}

/// The proof's auxiliary field
/// J = t { (2/N)(-H/(beta t) - (1 - 1/beta) F^2)^2 + ((beta-1)a - 2K) F^2 } - aH - H/t.
/// At the space-time argmax of H it must be nonpositive.
pub fn j_field(traj: &Trajectory, t: f64, params: &CheckParams) -> Result<ScalarGrid> {
    let snap = traj.snapshot_at(t)?;
    let h = h_field(traj, t, params)?;
    let beta = params.beta;
    let n = params.n_eff;
    Ok(ScalarGrid {
        domain: snap.u.domain,
        data: (0..snap.u.data.len())
            .map(|k| {
                let f2 = snap.f2_grad_f.data[k];
                let hk = h.data[k];
                let q = -hk / (beta * t) - (1.0 - 1.0 / beta) * f2;
                t * ((2.0 / n) * q * q + ((beta - 1.0) * params.a - 2.0 * params.k_curv) * f2)
                    - params.a * hk
                    - hk / t
            })
            .collect(),
    })
}

/// Compact right side (N beta^2 / 2)(1/t + alpha + K/(2(beta-1))).
pub fn rhs_compact(params: &CheckParams, t: f64) -> f64 {
    let beta = params.beta;
    params.n_eff * beta * beta / 2.0
        * (1.0 / t + params.alpha() + params.k_curv / (2.0 * (beta - 1.0)))
}

/// C(N, A) = N + (A - 1) n - A with n = 2.
pub fn comparison_constant(n_eff: f64, a_mis: f64) -> f64 {
    n_eff + (a_mis - 1.0) * 2.0 - a_mis
}

/// The proof-level cut-off constant B.
pub fn proof_constant_b(params: &CheckParams, cutoff: &CutoffProfile) -> f64 {
    let (c1, c2) = (cutoff.c1, cutoff.c2);
    let (a_mis, r) = (params.a_mis, params.radius);
    let c_na = comparison_constant(params.n_eff, a_mis);
    let l = params.k_curv / c_na;
    let c0 = a_mis.sqrt() * params.k0;
    2.0 * c1 * c1 * a_mis / (r * r)
        + c2 * a_mis / (r * r)
        + c1 / (r * r) * (c_na * (1.0 + r * l.sqrt()) + c0 * r)
}

/// Local right side at proof fidelity:
/// (N b^2 / 2 delta){ 1/t + alpha + AK/(2(b-1)) + N b^2 c1^2/(16(1-delta)(b-1)R^2) + B/2 }.
pub fn rhs_local(params: &CheckParams, t: f64, cutoff: &CutoffProfile) -> f64 {
    let beta = params.beta;
    let n = params.n_eff;
    let b_const = proof_constant_b(params, cutoff);
    let c1 = cutoff.c1;
    n * beta * beta / (2.0 * params.delta)
        * (1.0 / t
            + params.alpha()
            + params.a_mis * params.k_curv / (2.0 * (beta - 1.0))
            + n * beta * beta * c1 * c1
                / (16.0 * (1.0 - params.delta) * (beta - 1.0) * params.radius * params.radius)
            + b_const / 2.0)
}

fn lhs_at(snap: &crate::solver::Snapshot, k: usize, params: &CheckParams) -> f64 {
    snap.f2_grad_f.data[k] + params.beta * (params.a * snap.f.data[k] + params.b)
        - params.beta * snap.f_t.data[k]
}

/// Compact-space check: no node/snapshot with t >= t_min may exceed the right
/// side by more than tol_liyau_rel * RHS. Margin reported is max(LHS - RHS).
pub fn liyau_compact_check(traj: &Trajectory, params: &CheckParams) -> Result<CheckReport> {
    params.validate()?;
    let eta2 = 0.0; // stored F^2(grad f) is already zero below the eta convention
    let mut margin = f64::NEG_INFINITY;
    let mut worst = (crate::vec2::Vec2::ZERO, 0.0);
    let mut pass = true;
    let mut excluded = 0usize;
    let mut rows = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.t >= params.t_min) {
        let rhs = rhs_compact(params, snap.t);
        let dom = snap.u.domain;
        let mut snap_worst = f64::NEG_INFINITY;
        let mut snap_arg = 0usize;
        for k in 0..dom.nodes() {
            if snap.f2_grad_f.data[k] <= eta2 && snap.f2_grad_f.data[k] == 0.0 {
                excluded += 1;
                continue;
            }
            let v = lhs_at(snap, k, params) - rhs;
            if v > snap_worst {
                snap_worst = v;
                snap_arg = k;
            }
        }
        if snap_worst > params.tol.liyau_rel * rhs {
            pass = false;
        }
        if snap_worst > margin {
            margin = snap_worst;
            worst = (dom.point_of(snap_arg), snap.t);
        }
        let p = dom.point_of(snap_arg);
        rows.push(format!(
            "{:.6},{:.6},{:.6},{:.9e},{:.9e},{:.9e}",
            snap.t,
            p.x,
            p.y,
            snap_worst + rhs,
            rhs,
            snap_worst
        ));
    }
    let mut report = CheckReport::new("check-liyau-compact", pass, margin);
    report.argmax_x = Some(worst.0);
    report.argmax_t = Some(worst.1);
    report.excluded = excluded;
    report.params_echo = format!(
        "beta={} N={} K={} a={} b={} t_min={}",
        params.beta, params.n_eff, params.k_curv, params.a, params.b, params.t_min
    );
    report.csv_header = Some("t,x1,x2,lhs_max,rhs,margin".into());
    report.csv_rows = rows;
    Ok(report)
}

/// Local check on the forward ball B_p(R) at proof fidelity. The caller
/// supplies K = K(2R), A = A(2R) (from a bound scan over B_p(2R)) and K0.
pub fn liyau_local_check(
    space: &Space,
    traj: &Trajectory,
    params: &CheckParams,
    cutoff: &CutoffProfile,
) -> Result<CheckReport> {
    params.validate()?;
    let limit = 0.5 * space.domain.l1.min(space.domain.l2);
    if 2.0 * params.radius >= limit {
        return Err(Error::BallWraps { r: 2.0 * params.radius, limit });
    }
    let df = distance::distance_field(space, params.center)?;
    let dom = space.domain;
    let inside: Vec<usize> =
        (0..dom.nodes()).filter(|&k| df.r.data[k] < params.radius).collect();
    let mut margin = f64::NEG_INFINITY;
    let mut worst = (crate::vec2::Vec2::ZERO, 0.0);
    let mut pass = true;
    let mut excluded = 0usize;
    let mut rows = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.t >= params.t_min) {
        let rhs = rhs_local(params, snap.t, cutoff);
        let mut snap_worst = f64::NEG_INFINITY;
        let mut snap_arg = 0usize;
        for &k in &inside {
            if snap.f2_grad_f.data[k] == 0.0 {
                excluded += 1;
                continue;
            }
            let v = lhs_at(snap, k, params) - rhs;
            if v > snap_worst {
                snap_worst = v;
                snap_arg = k;
            }
        }
        if snap_worst > params.tol.liyau_rel * rhs {
            pass = false;
        }
        if snap_worst > margin {
            margin = snap_worst;
            worst = (dom.point_of(snap_arg), snap.t);
        }
        let p = dom.point_of(snap_arg);
        rows.push(format!(
            "{:.6},{:.6},{:.6},{:.9e},{:.9e},{:.9e}",
            snap.t,
            p.x,
            p.y,
            snap_worst + rhs,
            rhs,
            snap_worst
        ));
    }
    let b_const = proof_constant_b(params, cutoff);
    let paper_slot = (2.0 * cutoff.c1 * cutoff.c1 + cutoff.c2) * params.a_mis
        / (2.0 * params.radius * params.radius);
    let mut report = CheckReport::new("check-liyau-local", pass, margin);
    report.argmax_x = Some(worst.0);
    report.argmax_t = Some(worst.1);
    report.excluded = excluded;
    report.params_echo = format!(
        "beta={} delta={} N={} K={} A={} K0={} R={} a={} b={} t_min={}",
        params.beta,
        params.delta,
        params.n_eff,
        params.k_curv,
        params.a_mis,
        params.k0,
        params.radius,
        params.a,
        params.b,
        params.t_min
    );
    report.details.push(("B_half".into(), b_const / 2.0));
    report.details.push(("paper_cutoff_slot".into(), paper_slot));
    report.details.push(("ball_nodes".into(), inside.len() as f64));
    report.csv_header = Some("t,x1,x2,lhs_max,rhs,margin".into());
    report.csv_rows = rows;
    Ok(report)
}
