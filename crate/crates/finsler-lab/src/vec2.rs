//! Small fixed-size linear algebra for the two-dimensional tangent/cotangent spaces.

use std::ops::{Add, Mul, Neg, Sub};

/// A vector in R^2. Used both for tangent vectors (components `v^i`) and
/// covectors (components `xi_i`); the calling convention makes the role clear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Euclidean dot product; also the natural covector-vector pairing xi(v).
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, c: f64) -> Vec2 {
        Vec2::new(c * self.x, c * self.y)
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn comp(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => panic!("Vec2 index out of range"),
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, c: f64) -> Vec2 {
        self.scale(c)
    }
}

/// Symmetric 2x2 matrix, e.g. the fundamental tensor g_{ij}(x, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMatrix2 { xx, xy, yy }
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(self) -> SymMatrix2 {
        let d = self.det();
        SymMatrix2::new(self.yy / d, -self.xy / d, self.xx / d)
    }

    /// Matrix-vector product (lowers an index: v^j -> g_{ij} v^j).
    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Bilinear form g(u, w).
    pub fn quad(self, u: Vec2, w: Vec2) -> f64 {
        u.dot(self.mul_vec(w))
    }

    /// Eigenvalues, ascending. Both positive iff the matrix is positive definite.
    pub fn eigenvalues(self) -> (f64, f64) {
        let tr = self.xx + self.yy;
        let disc = ((self.xx - self.yy) * 0.5).hypot(self.xy);
        (tr * 0.5 - disc, tr * 0.5 + disc)
    }

    pub fn get(self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (0, 1) | (1, 0) => self.xy,
            _ => panic!("SymMatrix2 index out of range"),
        }
    }

    pub fn scale(self, c: f64) -> SymMatrix2 {
        SymMatrix2::new(c * self.xx, c * self.xy, c * self.yy)
    }

    pub fn add(self, o: SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

/// Totally symmetric 3-tensor on R^2 (the Cartan tensor C_{ijk}).
///
/// Only the four independent components are stored; `get` routes any index
/// permutation to the right slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cartan3 {
    pub c111: f64,
    pub c112: f64,
    pub c122: f64,
    pub c222: f64,
}

impl Cartan3 {
    pub const ZERO: Cartan3 = Cartan3 { c111: 0.0, c112: 0.0, c122: 0.0, c222: 0.0 };

    pub fn get(self, i: usize, j: usize, k: usize) -> f64 {
        match i + j + k {
            0 => self.c111,
            1 => self.c112,
            2 => self.c122,
            3 => self.c222,
            _ => panic!("Cartan3 index out of range"),
        }
    }

    /// Contraction C_{ijk} v^k -> symmetric matrix. Vanishes at v by the Euler identity.
    pub fn contract(self, v: Vec2) -> SymMatrix2 {
        SymMatrix2::new(
            self.c111 * v.x + self.c112 * v.y,
            self.c112 * v.x + self.c122 * v.y,
            self.c122 * v.x + self.c222 * v.y,
        )
    }

    pub fn max_abs(self) -> f64 {
        self.c111
            .abs()
            .max(self.c112.abs())
            .max(self.c122.abs())
            .max(self.c222.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_identity() {
        let (a, b) = SymMatrix2::IDENTITY.eigenvalues();
        assert_eq!((a, b), (1.0, 1.0));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = SymMatrix2::new(2.0, 0.3, 1.5);
        let inv = m.inverse();
        let v = Vec2::new(0.7, -1.2);
        let w = inv.mul_vec(m.mul_vec(v));
        assert!((w.x - v.x).abs() < 1e-14);
        assert!((w.y - v.y).abs() < 1e-14);
    }

    #[test]
    fn cartan_symmetry_routing() {
        let c = Cartan3 { c111: 1.0, c112: 2.0, c122: 3.0, c222: 4.0 };
        assert_eq!(c.get(0, 1, 0), 2.0);
        assert_eq!(c.get(1, 0, 1), 3.0);
        assert_eq!(c.get(1, 1, 1), 4.0);
    }
}
