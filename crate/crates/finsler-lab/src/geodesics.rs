//! Geodesic shooting and the exponential map.
//!
//! Geodesics solve x'' = -2 G(x, x') with the spray of the Chern connection;
//! classical RK4 with a fixed step. The Finsler speed F(gamma, gamma_dot) is a
//! first integral and its drift is the integration-quality monitor.

use crate::curvature::spray;
use crate::error::{Error, Result};
use crate::metric::Space;
use crate::vec2::Vec2;

/// Sampled geodesic: times, base points and velocities.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub points: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

#[derive(Clone, Copy)]
struct State {
    x: Vec2,
    v: Vec2,
}

fn rhs(space: &Space, s: State) -> Result<State> {
    let g = spray(space, s.x, s.v)?;
    Ok(State { x: s.v, v: g.scale(-2.0) })
}

fn rk4_step(space: &Space, s: State, dt: f64) -> Result<State> {
    let k1 = rhs(space, s)?;
    let k2 = rhs(space, State { x: s.x + k1.x.scale(dt * 0.5), v: s.v + k1.v.scale(dt * 0.5) })?;
    let k3 = rhs(space, State { x: s.x + k2.x.scale(dt * 0.5), v: s.v + k2.v.scale(dt * 0.5) })?;
    let k4 = rhs(space, State { x: s.x + k3.x.scale(dt), v: s.v + k3.v.scale(dt) })?;
    Ok(State {
        x: s.x + (k1.x + (k2.x + k3.x).scale(2.0) + k4.x).scale(dt / 6.0),
        v: s.v + (k1.v + (k2.v + k3.v).scale(2.0) + k4.v).scale(dt / 6.0),
    })
}

/// Integrate to time `t` (may be negative) and return the end state only.
pub fn shoot_state(space: &Space, x0: Vec2, v0: Vec2, t: f64, steps: usize) -> Result<(Vec2, Vec2)> {
    let f0 = space.eval_f(x0, v0);
    if f0 <= space.eta {
        return Err(Error::ZeroVector { f: f0 });
    }
    let dt = t / steps as f64;
    let mut s = State { x: x0, v: v0 };
    for _ in 0..steps {
        s = rk4_step(space, s, dt)?;
    }
    let drift = (space.eval_f(s.x, s.v) - f0).abs() / f0;
    if drift > 1e-4 {
        return Err(Error::GeodesicFailure { drift });
    }
    Ok((s.x, s.v))
}

/// Step count satisfying the resolution floor 16 T F(v0) / min-mesh.
pub fn default_steps(space: &Space, t: f64, f0: f64) -> usize {
    ((16.0 * t.abs() * f0 / space.domain.min_mesh()).ceil() as usize).max(16)
}

/// Shoot the geodesic from (x0, v0) over [0, T], sampling every step.
pub fn geodesic_shoot(
    space: &Space,
    x0: Vec2,
    v0: Vec2,
    t_end: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    let f0 = space.eval_f(x0, v0);
    if f0 <= space.eta {
        return Err(Error::ZeroVector { f: f0 });
    }
    let dt = t_end / steps as f64;
    let mut path = GeodesicPath {
        times: Vec::with_capacity(steps + 1),
        points: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
    };
    let mut s = State { x: x0, v: v0 };
    path.times.push(0.0);
    path.points.push(s.x);
    path.velocities.push(s.v);
    for k in 1..=steps {
        s = rk4_step(space, s, dt)?;
        let drift = (space.eval_f(s.x, s.v) - f0).abs() / f0;
        if drift > 1e-4 {
            return Err(Error::GeodesicFailure { drift });
        }
        path.times.push(k as f64 * dt);
        path.points.push(s.x);
        path.velocities.push(s.v);
    }
    Ok(path)
}

/// Exponential map: endpoint of the unit-time geodesic with initial velocity v.
/// exp(x, 0) = x.
pub fn exp_map(space: &Space, x: Vec2, v: Vec2) -> Result<Vec2> {
    let f0 = space.eval_f(x, v);
    if f0 <= space.eta {
        return Ok(x);
    }
    let steps = default_steps(space, 1.0, f0);
    let (end, _) = shoot_state(space, x, v, 1.0, steps)?;
    Ok(end)
}
