//! Nested central finite differences of F^2.
//!
//! Generic derivative engine that only touches the norm itself: it recovers
//! the fundamental and Cartan tensors from F^2 without using any closed-form
//! family knowledge, so it serves as the independent route against which the
//! analytic tensors in [`crate::metric`] are validated. The connection layer
//! reuses the scalar stencils for its horizontal derivatives.

use crate::metric::Space;
use crate::vec2::{Cartan3, SymMatrix2, Vec2};

/// Fourth-order central first derivative of a scalar path t -> f(t) at t = 0.
#[inline]
pub fn central4(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative at t = 0.
#[inline]
pub fn central4_2nd(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
}

fn e(dir: usize) -> Vec2 {
    if dir == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(0.0, 1.0)
    }
}

/// First v-derivative of a function of the velocity.
pub fn dv(f: &impl Fn(Vec2) -> f64, v: Vec2, dir: usize, h: f64) -> f64 {
    central4(|t| f(v + e(dir).scale(t)), h)
}

/// Fundamental tensor from 1/2 d^2(F^2)/dv^i dv^j by fourth-order stencils.
pub fn fundamental_fd(space: &Space, x: Vec2, v: Vec2, h: f64) -> SymMatrix2 {
    let f2 = |u: Vec2| {
        let f = space.eval_f(x, u);
        f * f
    };
    let gxx = 0.5 * central4_2nd(|t| f2(v + e(0).scale(t)), h);
    let gyy = 0.5 * central4_2nd(|t| f2(v + e(1).scale(t)), h);
    let gxy = 0.5 * dv(&|u| dv(&f2, u, 1, h), v, 0, h);
    SymMatrix2::new(gxx, gxy, gyy)
}

/// Third v-derivative of F^2 by triple nesting.
fn d3_f2(space: &Space, x: Vec2, v: Vec2, dirs: [usize; 3], h: f64) -> f64 {
    let f2 = |u: Vec2| {
        let f = space.eval_f(x, u);
        f * f
    };
    dv(&|a| dv(&|b| dv(&f2, b, dirs[2], h), a, dirs[1], h), v, dirs[0], h)
}

/// Cartan tensor 1/4 d^3(F^2)/dv^3 with two step sizes and Richardson
/// extrapolation of the leading h^4 truncation term.
pub fn cartan_fd_richardson(space: &Space, x: Vec2, v: Vec2) -> Cartan3 {
    let comp = |dirs: [usize; 3]| {
        let coarse = 0.25 * d3_f2(space, x, v, dirs, 2e-2);
        let fine = 0.25 * d3_f2(space, x, v, dirs, 1e-2);
        (16.0 * fine - coarse) / 15.0
    };
    Cartan3 {
        c111: comp([0, 0, 0]),
        c112: comp([0, 0, 1]),
        c122: comp([0, 1, 1]),
        c222: comp([1, 1, 1]),
    }
}
