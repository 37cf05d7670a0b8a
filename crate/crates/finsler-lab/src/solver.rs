//! Finslerian gradient, weighted divergence, nonlinear Laplacian, and the
//! explicit time stepper for du/dt = Lap^{grad u} u + a u log u + b u.
//!
//! Spatial operators are fourth-order central differences on the periodic
//! grid. The divergence is discretized in conservative form,
//! div_mu V = e^{-Phi} D_i(V^i e^{Phi}), which makes the discrete divergence
//! theorem (and hence mass conservation of the heat flow) exact to rounding.
//! Time stepping is the explicit midpoint rule under a diffusive CFL bound;
//! positivity is enforced by abort, never by clamping.

use crate::error::{Error, Result};
use crate::grid::{map_nodes, ScalarGrid, TorusDomain, VecGrid};
use crate::metric::{MetricData, Space};
use crate::sampling::fnv1a;
use crate::vec2::Vec2;
use rayon::prelude::*;

/// Solver parameters. `dt = None` selects the CFL-limited step.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub a: f64,
    pub b: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    /// CFL safety factor in (0, 1].
    pub cfl_sigma: f64,
    /// Positivity floor; stepping below it aborts the run.
    pub u_min: f64,
    /// Times at which snapshots are recorded (ascending, <= t_end).
    pub snapshot_times: Vec<f64>,
}

impl SolverConfig {
    pub fn new(a: f64, b: f64, t_end: f64, snapshot_times: Vec<f64>) -> Self {
        SolverConfig { a, b, dt: None, t_end, cfl_sigma: 0.2, u_min: 1e-12, snapshot_times }
    }
}

/// One stored time slice: u, f = log u, F^2(grad f), and f_t taken from the
/// PDE right side (f_t = rhs(u)/u); the centered time difference of f is the
/// cross-check, not the stored value.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: ScalarGrid,
    pub f: ScalarGrid,
    pub f2_grad_f: ScalarGrid,
    pub f_t: ScalarGrid,
}

/// Ordered snapshots plus provenance (hash of the space/solver parameters).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub a: f64,
    pub b: f64,
    pub provenance: u64,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Result<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0))
            .ok_or(Error::SnapshotMissing { t })
    }
}

/// Per-node caches reused across operator applications.
pub struct Discretization<'a> {
    pub space: &'a Space,
    data: Vec<MetricData>,
    exp_phi: ScalarGrid,
    inv_exp_phi: Vec<f64>,
}

impl<'a> Discretization<'a> {
    pub fn new(space: &'a Space) -> Self {
        let dom = space.domain;
        let data: Vec<MetricData> =
            (0..dom.nodes()).map(|k| space.metric_data(dom.point_of(k))).collect();
        let exp_phi = ScalarGrid::from_fn(dom, |p| space.phi(p).exp());
        let inv_exp_phi = exp_phi.data.iter().map(|v| 1.0 / v).collect();
        Discretization { space, data, exp_phi, inv_exp_phi }
    }

    pub fn domain(&self) -> TorusDomain {
        self.space.domain
    }

    /// Differential Du (a covector grid) by fourth-order central differences.
    pub fn differential(&self, u: &ScalarGrid) -> VecGrid {
        let d1 = u.deriv(0);
        let d2 = u.deriv(1);
        VecGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| Vec2::new(d1.data[k], d2.data[k])),
        }
    }

    /// Gradient field grad u = L*(Du), with the zero convention below eta.
    pub fn gradient_field(&self, u: &ScalarGrid) -> VecGrid {
        let du = self.differential(u);
        let eta = self.space.eta;
        VecGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| {
                let xi = du.data[k];
                if xi == Vec2::ZERO || self.data[k].dual_norm(xi) < eta {
                    Vec2::ZERO
                } else {
                    self.data[k].legendre(xi)
                }
            }),
        }
    }

    /// F*(Du)^2 per node (equals F^2(grad u) by Legendre duality).
    pub fn grad_norm2(&self, u: &ScalarGrid) -> ScalarGrid {
        let du = self.differential(u);
        ScalarGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| {
                let xi = du.data[k];
                if xi == Vec2::ZERO {
                    0.0
                } else {
                    let n = self.data[k].dual_norm(xi);
                    n * n
                }
            }),
        }
    }

    /// Conservative measure divergence div_mu V = e^{-Phi} D_i(V^i e^{Phi}).
    pub fn divergence_mu(&self, v: &VecGrid) -> ScalarGrid {
        let dom = v.domain;
        let mut w1 = ScalarGrid::zeros(dom);
        let mut w2 = ScalarGrid::zeros(dom);
        for k in 0..dom.nodes() {
            let e = self.exp_phi.data[k];
            w1.data[k] = v.data[k].x * e;
            w2.data[k] = v.data[k].y * e;
        }
        let d1 = w1.deriv(0);
        let d2 = w2.deriv(1);
        ScalarGrid {
            domain: dom,
            data: map_nodes(dom.nodes(), |k| (d1.data[k] + d2.data[k]) * self.inv_exp_phi[k]),
        }
    }

    /// Nonlinear Finslerian Laplacian: div_mu(grad u).
    pub fn laplacian(&self, u: &ScalarGrid) -> ScalarGrid {
        self.divergence_mu(&self.gradient_field(u))
    }

    /// Right side of the evolution equation. Requires u > 0 everywhere.
    pub fn rhs(&self, u: &ScalarGrid, a: f64, b: f64) -> Result<ScalarGrid> {
        let min = u.min();
        if min <= 0.0 {
            return Err(Error::NonPositive { min });
        }
        let lap = self.laplacian(u);
        Ok(ScalarGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| {
                let uu = u.data[k];
                lap.data[k] + a * uu * uu.ln() + b * uu
            }),
        })
    }

    /// Integral of u against d mu.
    pub fn integral_mu(&self, u: &ScalarGrid) -> f64 {
        u.integral_weighted(&self.exp_phi)
    }

    pub fn exp_phi(&self) -> &ScalarGrid {
        &self.exp_phi
    }

    /// Largest sampled eigenvalue of g^{-1} over nodes and directions; the
    /// diffusive scale entering the CFL bound.
    pub fn diffusion_scale(&self) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        self.data
            .par_iter()
            .map(|md| {
                let mut worst = 0.0f64;
                for k in 0..16 {
                    let v = Vec2::from_angle(tau * k as f64 / 16.0);
                    let (lo, _) = md.fundamental(v).eigenvalues();
                    worst = worst.max(1.0 / lo);
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// CFL-limited time step for safety factor sigma.
    pub fn cfl_bound(&self, sigma: f64) -> f64 {
        let h = self.domain().min_mesh();
        sigma * h * h / (4.0 * self.diffusion_scale())
    }

    /// One explicit midpoint step.
    pub fn step(&self, u: &ScalarGrid, a: f64, b: f64, dt: f64, u_min: f64, t: f64) -> Result<ScalarGrid> {
        let k1 = self.rhs(u, a, b)?;
        let mid = ScalarGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| u.data[k] + 0.5 * dt * k1.data[k]),
        };
        if mid.min() <= u_min {
            return Err(Error::PositivityLost { t, min: mid.min() });
        }
        let k2 = self.rhs(&mid, a, b)?;
        let next = ScalarGrid {
            domain: u.domain,
            data: map_nodes(u.data.len(), |k| u.data[k] + dt * k2.data[k]),
        };
        if next.min() <= u_min {
            return Err(Error::PositivityLost { t: t + dt, min: next.min() });
        }
        Ok(next)
    }
}

/// Free-function forms of the operators (building the per-node caches on the
/// fly); the solver itself reuses one [`Discretization`] across all steps.
pub fn differential(space: &Space, u: &ScalarGrid) -> VecGrid {
    Discretization::new(space).differential(u)
}

pub fn gradient_field(space: &Space, u: &ScalarGrid) -> VecGrid {
    Discretization::new(space).gradient_field(u)
}

pub fn divergence_mu(space: &Space, v: &VecGrid) -> ScalarGrid {
    Discretization::new(space).divergence_mu(v)
}

pub fn laplacian(space: &Space, u: &ScalarGrid) -> ScalarGrid {
    Discretization::new(space).laplacian(u)
}

pub fn rhs(space: &Space, u: &ScalarGrid, a: f64, b: f64) -> Result<ScalarGrid> {
    Discretization::new(space).rhs(u, a, b)
}

pub fn integral_mu(space: &Space, u: &ScalarGrid) -> f64 {
    Discretization::new(space).integral_mu(u)
}

fn snapshot(disc: &Discretization, t: f64, u: &ScalarGrid, a: f64, b: f64) -> Result<Snapshot> {
    let f = u.map(f64::ln);
    let f2 = disc.grad_norm2(&f);
    let r = disc.rhs(u, a, b)?;
    let f_t = ScalarGrid {
        domain: u.domain,
        data: r.data.iter().zip(&u.data).map(|(&rr, &uu)| rr / uu).collect(),
    };
    Ok(Snapshot { t, u: u.clone(), f, f2_grad_f: f2, f_t })
}

/// March the evolution equation from u0 and record the requested snapshots.
pub fn solve(space: &Space, u0: &ScalarGrid, cfg: &SolverConfig) -> Result<Trajectory> {
    if u0.min() <= 0.0 {
        return Err(Error::NonPositive { min: u0.min() });
    }
    let disc = Discretization::new(space);
    let bound = disc.cfl_bound(cfg.cfl_sigma);
    let dt = match cfg.dt {
        Some(dt) => {
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, bound });
            }
            dt
        }
        None => bound,
    };
    let mut times = cfg.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    if times.iter().any(|&t| t < 0.0 || t > cfg.t_end + 1e-12) {
        return Err(Error::Config {
            line: 0,
            detail: "snapshot times must lie in [0, t_end]".into(),
        });
    }
    let provenance = fnv1a(
        format!(
            "{:?}|{:?}|{:?}|a={};b={};dt={};t_end={}",
            space.metric, space.measure, space.domain, cfg.a, cfg.b, dt, cfg.t_end
        )
        .as_bytes(),
    );

    let mut traj = Trajectory { snapshots: Vec::new(), a: cfg.a, b: cfg.b, provenance };
    let mut u = u0.clone();
    let mut t = 0.0f64;
    for &target in &times {
        while t < target - 1e-13 {
            let step_dt = dt.min(target - t);
            u = disc.step(&u, cfg.a, cfg.b, step_dt, cfg.u_min, t)?;
            t += step_dt;
            if target - t < 1e-13 {
                t = target;
            }
        }
        traj.snapshots.push(snapshot(&disc, target, &u, cfg.a, cfg.b)?);
    }
    Ok(traj)
}

/// Pseudo-time marching to a stationary solution of
/// Lap^{grad u} u + a u log u + b u = 0. Returns the first iterate whose
/// sup-norm residual drops below `tol_res * ||u||_inf`; keeps the best iterate
/// and reports NoConvergence if the tolerance is never met.
pub fn solve_stationary(
    space: &Space,
    u0: &ScalarGrid,
    a: f64,
    b: f64,
    tol_res: f64,
    max_steps: usize,
) -> Result<ScalarGrid> {
    if a == 0.0 {
        return Err(Error::Config { line: 0, detail: "stationary solve requires a != 0".into() });
    }
    if u0.min() <= 0.0 {
        return Err(Error::NonPositive { min: u0.min() });
    }
    let disc = Discretization::new(space);
    let dt = disc.cfl_bound(0.5);
    let mut u = u0.clone();
    let mut best_res = f64::INFINITY;
    let mut steps = 0usize;
    let mut stalled_checks = 0usize;
    loop {
        let r = disc.rhs(&u, a, b)?;
        let res = r.max_abs() / u.max_abs();
        if res < 0.995 * best_res {
            stalled_checks = 0;
        } else {
            stalled_checks += 1;
        }
        best_res = best_res.min(res);
        if res <= tol_res {
            return Ok(u);
        }
        // A residual that stopped improving will not reach the tolerance:
        // report instead of burning the step budget.
        if steps >= max_steps || stalled_checks >= 30 {
            return Err(Error::NoConvergence { residual: best_res, steps });
        }
        // Advance several steps between residual checks.
        for _ in 0..16 {
            u = disc.step(&u, a, b, dt, 1e-12, steps as f64 * dt)?;
            steps += 1;
            if steps >= max_steps {
                break;
            }
        }
    }
}

/// Initial-data descriptors supported by the run configs.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant(f64),
    /// base + height exp(-d^2 / (2 width^2)) with d the periodic distance to center.
    Gaussian { base: f64, height: f64, width: f64, center: Vec2 },
    /// c0 + sum of amp * sin(2 pi k1 x/L1) * sin(2 pi k2 y/L2) modes.
    Fourier { c0: f64, modes: Vec<(f64, u32, u32)> },
}

impl InitialData {
    pub fn build(&self, domain: TorusDomain) -> ScalarGrid {
        match self {
            InitialData::Constant(c) => ScalarGrid::constant(domain, *c),
            InitialData::Gaussian { base, height, width, center } => {
                ScalarGrid::from_fn(domain, |p| {
                    let d = domain.min_image(*center, p).norm();
                    base + height * (-d * d / (2.0 * width * width)).exp()
                })
            }
            InitialData::Fourier { c0, modes } => ScalarGrid::from_fn(domain, |p| {
                let tau = 2.0 * std::f64::consts::PI;
                let mut v = *c0;
                for (amp, k1, k2) in modes {
                    let s1 = if *k1 > 0 { (tau * *k1 as f64 * p.x / domain.l1).sin() } else { 1.0 };
                    let s2 = if *k2 > 0 { (tau * *k2 as f64 * p.y / domain.l2).sin() } else { 1.0 };
                    v += amp * s1 * s2;
                }
                v
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sine_mode_amplitude, TorusDomain};
    use crate::metric::{FourierParam, MeasureSpec, MetricSpec, Space};
    use std::f64::consts::PI;

    fn euclid(n: usize) -> Space {
        let dom = TorusDomain::new(4.0, 4.0, n, n).unwrap();
        Space::new(dom, MetricSpec::Euclidean, MeasureSpec::lebesgue()).unwrap()
    }

    #[test]
    fn differential_of_constant_vanishes() {
        let s = euclid(32);
        let u = ScalarGrid::constant(s.domain, 2.5);
        let du = differential(&s, &u);
        assert!(du.data.iter().all(|v| *v == Vec2::ZERO));
    }

    #[test]
    fn gradient_euclidean_equals_componentwise_differential() {
        let s = euclid(64);
        let u = ScalarGrid::from_fn(s.domain, |p| (2.0 * PI * p.x / 4.0).sin() + 0.3 * p.y.cos());
        let du = differential(&s, &u);
        let gu = gradient_field(&s, &u);
        for k in 0..s.domain.nodes() {
            assert!((du.data[k].x - gu.data[k].x).abs() < 1e-13);
            assert!((du.data[k].y - gu.data[k].y).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_satisfies_duality_identity_on_randers() {
        let dom = TorusDomain::new(4.0, 4.0, 32, 32).unwrap();
        let s = Space::new(dom, MetricSpec::randers_const(0.3, 0.1), MeasureSpec::lebesgue())
            .unwrap();
        let u = ScalarGrid::from_fn(dom, |p| (2.0 * PI * p.x / 4.0).sin());
        let du = differential(&s, &u);
        let gu = gradient_field(&s, &u);
        for k in 0..dom.nodes() {
            let xi = du.data[k];
            if xi.norm() < 1e-8 {
                continue;
            }
            let fstar = s.dual_norm(dom.point_of(k), xi);
            let pairing = xi.dot(gu.data[k]);
            assert!((pairing - fstar * fstar).abs() <= 1e-8 * fstar * fstar);
        }
    }

    #[test]
    fn divergence_theorem_is_exact() {
        let dom = TorusDomain::new(4.0, 4.0, 48, 48).unwrap();
        let s = Space::new(
            dom,
            MetricSpec::Euclidean,
            MeasureSpec { phi: FourierParam::mode(0.1, 0.2, 1, 1) },
        )
        .unwrap();
        let v = VecGrid::from_fn(dom, |p| {
            Vec2::new((2.0 * PI * p.y / 4.0).sin() + 0.2, (2.0 * PI * p.x / 4.0).cos())
        });
        let disc = Discretization::new(&s);
        let div = disc.divergence_mu(&v);
        let total = div.integral_weighted(disc.exp_phi());
        assert!(total.abs() < 1e-10, "divergence integral {total:.3e}");
    }

    #[test]
    fn divergence_of_constant_field_matches_v_dot_dphi() {
        let dom = TorusDomain::new(4.0, 4.0, 128, 128).unwrap();
        let phi = FourierParam::mode(0.0, 0.2, 1, 1);
        let s = Space::new(dom, MetricSpec::Euclidean, MeasureSpec { phi }).unwrap();
        let vconst = Vec2::new(0.7, -0.4);
        let v = VecGrid::from_fn(dom, |_| vconst);
        let div = divergence_mu(&s, &v);
        let mut worst = 0.0f64;
        for k in 0..dom.nodes() {
            let p = dom.point_of(k);
            let exact = vconst.x * s.phi_deriv(p, 0) + vconst.y * s.phi_deriv(p, 1);
            worst = worst.max((div.data[k] - exact).abs());
        }
        assert!(worst < 5e-7, "max deviation {worst:.3e}");
    }

    #[test]
    fn laplacian_of_sine_euclidean() {
        let s = euclid(128);
        let k = 2.0 * PI / 4.0;
        let u = ScalarGrid::from_fn(s.domain, |p| (k * p.x).sin());
        let lap = laplacian(&s, &u);
        let mut worst = 0.0f64;
        for idx in 0..s.domain.nodes() {
            worst = worst.max((lap.data[idx] + k * k * u.data[idx]).abs());
        }
        assert!(worst < 1e-6, "worst {worst:.3e}");
    }

    #[test]
    fn laplacian_conformal_with_volume_measure() {
        let dom = TorusDomain::new(4.0, 4.0, 128, 128).unwrap();
        let lambda = FourierParam::mode(0.0, 0.05, 1, 1);
        // Phi = 2 lambda: the Riemannian volume of e^{2 lambda} delta.
        let phi = FourierParam::mode(0.0, 0.10, 1, 1);
        let s = Space::new(dom, MetricSpec::Conformal { lambda }, MeasureSpec { phi }).unwrap();
        let k = 2.0 * PI / 4.0;
        let u = ScalarGrid::from_fn(dom, |p| (k * p.x).sin() + 0.5 * (k * p.y).cos());
        let lap = laplacian(&s, &u);
        let u11 = u.deriv2(0);
        let u22 = u.deriv2(1);
        let mut worst = 0.0f64;
        for idx in 0..dom.nodes() {
            let p = dom.point_of(idx);
            let expect = (-2.0 * lambda.eval(&dom, p)).exp() * (u11.data[idx] + u22.data[idx]);
            worst = worst.max((lap.data[idx] - expect).abs());
        }
        assert!(worst < 1e-4, "worst {worst:.3e}");
    }

    #[test]
    fn laplacian_with_measure_splits_into_parts() {
        let dom = TorusDomain::new(4.0, 4.0, 128, 128).unwrap();
        let phi = FourierParam::mode(0.0, 0.1, 1, 1);
        let s = Space::new(dom, MetricSpec::Euclidean, MeasureSpec { phi }).unwrap();
        let k = 2.0 * PI / 4.0;
        let u = ScalarGrid::from_fn(dom, |p| (k * p.x).sin());
        let lap_mu = laplacian(&s, &u);
        let u11 = u.deriv2(0);
        let u22 = u.deriv2(1);
        let du = differential(&s, &u);
        let mut worst = 0.0f64;
        for idx in 0..dom.nodes() {
            let p = dom.point_of(idx);
            let expect = u11.data[idx]
                + u22.data[idx]
                + s.phi_deriv(p, 0) * du.data[idx].x
                + s.phi_deriv(p, 1) * du.data[idx].y;
            worst = worst.max((lap_mu.data[idx] - expect).abs());
        }
        // The conservative divergence carries the e^{Phi} product harmonic in
        // its truncation, slightly above the bare-splitting O(h^4) level.
        assert!(worst < 5e-6, "worst {worst:.3e}");
    }

    #[test]
    fn rhs_on_special_constants() {
        let s = euclid(32);
        let ones = ScalarGrid::constant(s.domain, 1.0);
        let r = rhs(&s, &ones, -0.5, 0.25).unwrap();
        assert!(r.data.iter().all(|&v| (v - 0.25).abs() < 1e-14));
        // u = e^{-b/a} kills the source exactly.
        let (a, b) = (-0.5, 0.5);
        let u = ScalarGrid::constant(s.domain, (-b / a as f64).exp());
        let r = rhs(&s, &u, a, b).unwrap();
        assert!(r.max_abs() < 1e-13, "residual {:.3e}", r.max_abs());
        // Nonpositive data rejected.
        let bad = ScalarGrid::constant(s.domain, -1.0);
        assert!(matches!(rhs(&s, &bad, 1.0, 0.0), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn cfl_violation_detected() {
        let s = euclid(64);
        let disc = Discretization::new(&s);
        let bound = disc.cfl_bound(0.2);
        let cfg = SolverConfig {
            dt: Some(bound * 10.0),
            ..SolverConfig::new(0.0, 0.0, 0.1, vec![0.1])
        };
        let u0 = ScalarGrid::constant(s.domain, 1.0);
        assert!(matches!(solve(&s, &u0, &cfg), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn constant_data_follows_the_ode() {
        // u' = a u log u + b u has u(t) = exp(e^{at}(log u0 + b/a) - b/a).
        let s = euclid(32);
        let (a, b, u0val) = (-0.5, 0.25, 2.0);
        let cfg = SolverConfig {
            dt: Some(1e-4),
            ..SolverConfig::new(a, b, 1.0, vec![0.5, 1.0])
        };
        let u0 = ScalarGrid::constant(s.domain, u0val);
        let traj = solve(&s, &u0, &cfg).unwrap();
        for snap in &traj.snapshots {
            let expect = ((a * snap.t).exp() * (u0val.ln() + b / a) - b / a).exp();
            let got = snap.u.data[0];
            assert!(
                ((got - expect) / expect).abs() < 1e-6,
                "t = {}: {} vs {}",
                snap.t,
                got,
                expect
            );
            // Spatial variance stays at rounding level.
            assert!(snap.u.max() - snap.u.min() < 1e-12);
        }
    }

    #[test]
    fn heat_flow_conserves_mass_and_obeys_max_principle() {
        let s = euclid(64);
        let u0 = ScalarGrid::from_fn(s.domain, |p| 2.0 + (2.0 * PI * p.x / 4.0).sin());
        let cfg = SolverConfig::new(0.0, 0.0, 0.5, vec![0.1, 0.3, 0.5]);
        let disc = Discretization::new(&s);
        let m0 = disc.integral_mu(&u0);
        let traj = solve(&s, &u0, &cfg).unwrap();
        let mut prev_max = u0.max();
        let mut prev_min = u0.min();
        for snap in &traj.snapshots {
            let m = disc.integral_mu(&snap.u);
            assert!(((m - m0) / m0).abs() < 1e-10, "mass drift {:e}", (m - m0) / m0);
            assert!(snap.u.max() <= prev_max + 1e-12);
            assert!(snap.u.min() >= prev_min - 1e-12);
            prev_max = snap.u.max();
            prev_min = snap.u.min();
        }
    }

    #[test]
    fn heat_mode_decays_at_the_fourier_rate() {
        let s = euclid(64);
        let k = 2.0 * PI / 4.0;
        let u0 = ScalarGrid::from_fn(s.domain, |p| 2.0 + (k * p.x).sin());
        let t_end = 0.5;
        let cfg = SolverConfig::new(0.0, 0.0, t_end, vec![t_end]);
        let traj = solve(&s, &u0, &cfg).unwrap();
        let amp = sine_mode_amplitude(&traj.snapshots[0].u, 1, 0);
        let expect = (-k * k * t_end).exp();
        assert!(
            ((amp - expect) / expect).abs() < 0.01,
            "decay {amp:.6} vs {expect:.6}"
        );
    }

    #[test]
    fn b_reduction_agrees_with_direct_stepping() {
        // w = e^{b/a} u solves the b = 0 equation; both routes must agree.
        let s = euclid(32);
        let (a, b) = (-0.5, 0.3);
        let u0 = ScalarGrid::from_fn(s.domain, |p| 1.5 + 0.3 * (2.0 * PI * p.x / 4.0).sin());
        let cfg = SolverConfig { dt: Some(2e-4), ..SolverConfig::new(a, b, 0.2, vec![0.2]) };
        let direct = solve(&s, &u0, &cfg).unwrap();

        let scale = (b / a as f64).exp();
        let w0 = u0.map(|v| v * scale);
        let cfg0 = SolverConfig { dt: Some(2e-4), ..SolverConfig::new(a, 0.0, 0.2, vec![0.2]) };
        let reduced = solve(&s, &w0, &cfg0).unwrap();
        let mut worst = 0.0f64;
        for k in 0..s.domain.nodes() {
            let back = reduced.snapshots[0].u.data[k] / scale;
            worst = worst.max((back - direct.snapshots[0].u.data[k]).abs());
        }
        assert!(worst < 1e-8, "paths differ by {worst:.3e}");
    }

    #[test]
    fn stored_ft_matches_time_difference() {
        let s = euclid(64);
        let u0 = ScalarGrid::from_fn(s.domain, |p| 2.0 + (2.0 * PI * p.x / 4.0).sin());
        let delta = 0.01;
        let cfg = SolverConfig::new(0.0, 0.0, 0.2 + delta, vec![0.2 - delta, 0.2, 0.2 + delta]);
        let traj = solve(&s, &u0, &cfg).unwrap();
        let (before, at, after) =
            (&traj.snapshots[0], &traj.snapshots[1], &traj.snapshots[2]);
        let mut rng = s.rng(11);
        for _ in 0..10 {
            let k = rng.usize_below(s.domain.nodes());
            let fd = (after.f.data[k] - before.f.data[k]) / (2.0 * delta);
            assert!(
                (fd - at.f_t.data[k]).abs() < 1e-3 * (1.0 + fd.abs()),
                "f_t {} vs centered {}",
                at.f_t.data[k],
                fd
            );
        }
    }

    #[test]
    fn missing_snapshot_lookup_fails() {
        let s = euclid(32);
        let u0 = ScalarGrid::constant(s.domain, 1.0);
        let cfg = SolverConfig::new(0.0, 0.0, 0.1, vec![0.1]);
        let traj = solve(&s, &u0, &cfg).unwrap();
        assert!(matches!(traj.snapshot_at(0.05), Err(Error::SnapshotMissing { .. })));
        assert!(traj.snapshot_at(0.1).is_ok());
    }

    #[test]
    fn stationary_solve_converges_for_negative_a() {
        let s = euclid(32);
        let (a, b) = (-0.5, 0.5);
        let fixed = (-b / a as f64).exp(); // = e
        // Exact constant solution: residual at rounding level immediately.
        let exact = ScalarGrid::constant(s.domain, fixed);
        let out = solve_stationary(&s, &exact, a, b, 1e-10, 10_000).unwrap();
        assert!((out.data[0] - fixed).abs() < 1e-12);
        // Perturbed start converges back.
        let u0 = ScalarGrid::constant(s.domain, 1.1 * fixed);
        let out = solve_stationary(&s, &u0, a, b, 1e-8, 2_000_000).unwrap();
        assert!((out.data[0] - fixed).abs() < 1e-6, "converged to {}", out.data[0]);
        // a = 0 is a precondition error.
        assert!(solve_stationary(&s, &exact, 0.0, 0.0, 1e-8, 10).is_err());
    }

    #[test]
    fn lemma_identity_minus_lap_f() {
        // -Lap f = a f + F^2(grad f) - f_t pointwise for b = 0 runs.
        let dom = TorusDomain::new(4.0, 4.0, 64, 64).unwrap();
        let s = Space::new(dom, MetricSpec::randers_const(0.2, 0.1), MeasureSpec::lebesgue())
            .unwrap();
        let u0 = ScalarGrid::from_fn(dom, |p| {
            2.0 + 0.5 * (2.0 * PI * p.x / 4.0).sin() * (2.0 * PI * p.y / 4.0).sin()
        });
        let a = -0.5;
        let cfg = SolverConfig::new(a, 0.0, 0.1, vec![0.05, 0.1]);
        let traj = solve(&s, &u0, &cfg).unwrap();
        let disc = Discretization::new(&s);
        for snap in &traj.snapshots {
            let lap_f = disc.laplacian(&snap.f);
            let mut worst = 0.0f64;
            for k in 0..dom.nodes() {
                let lhs = -lap_f.data[k];
                let rhs_v = a * snap.f.data[k] + snap.f2_grad_f.data[k] - snap.f_t.data[k];
                let scale = 1.0f64
                    .max(lhs.abs())
                    .max((a * snap.f.data[k]).abs())
                    .max(snap.f2_grad_f.data[k])
                    .max(snap.f_t.data[k].abs());
                worst = worst.max((lhs - rhs_v).abs() / scale);
            }
            assert!(worst < 5e-3, "identity residual {worst:.3e} at t = {}", snap.t);
        }
    }
}
