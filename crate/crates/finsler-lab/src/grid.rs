//! Periodic grids on the flat 2-torus and fourth-order finite-difference stencils.

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use rayon::prelude::*;

/// Node count above which grid kernels fan out to rayon; below it the
/// dispatch overhead dwarfs the arithmetic.
pub(crate) const PAR_THRESHOLD: usize = 16_384;

/// Map over node indices, parallel only for large grids.
pub(crate) fn map_nodes<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// The flat 2-torus [0, L1) x [0, L2) with an n1 x n2 node lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusDomain {
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl TorusDomain {
    pub fn new(l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0) {
            return Err(Error::Config { line: 0, detail: format!("periods must be positive, got {l1}, {l2}") });
        }
        if n1 < 16 || n2 < 16 || n1 % 2 != 0 || n2 % 2 != 0 {
            return Err(Error::Config {
                line: 0,
                detail: format!("grid sizes must be even and >= 16, got {n1} x {n2}"),
            });
        }
        Ok(TorusDomain { l1, l2, n1, n2 })
    }

    pub fn h1(&self) -> f64 {
        self.l1 / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / self.n2 as f64
    }

    pub fn min_mesh(&self) -> f64 {
        self.h1().min(self.h2())
    }

    pub fn nodes(&self) -> usize {
        self.n1 * self.n2
    }

    /// Flat index of node (i, j), with periodic wrap of the indices.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.n1 as isize) as usize;
        let j = j.rem_euclid(self.n2 as isize) as usize;
        j * self.n1 + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n1, idx / self.n1)
    }

    #[inline]
    pub fn node_point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(i as f64 * self.h1(), j as f64 * self.h2())
    }

    pub fn point_of(&self, idx: usize) -> Vec2 {
        let (i, j) = self.ij(idx);
        self.node_point(i, j)
    }

    /// Reduce a point into the fundamental domain [0, L1) x [0, L2).
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.rem_euclid(self.l1), p.y.rem_euclid(self.l2))
    }

    /// Minimal-image displacement from `a` to `b` (each component in [-L/2, L/2)).
    pub fn min_image(&self, a: Vec2, b: Vec2) -> Vec2 {
        let mut dx = (b.x - a.x).rem_euclid(self.l1);
        let mut dy = (b.y - a.y).rem_euclid(self.l2);
        if dx >= self.l1 * 0.5 {
            dx -= self.l1;
        }
        if dy >= self.l2 * 0.5 {
            dy -= self.l2;
        }
        Vec2::new(dx, dy)
    }

    /// Grid node nearest to a point.
    pub fn nearest_node(&self, p: Vec2) -> usize {
        let p = self.wrap(p);
        let i = (p.x / self.h1()).round() as isize;
        let j = (p.y / self.h2()).round() as isize;
        self.idx(i, j)
    }
}

/// Scalar field sampled at the torus nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub domain: TorusDomain,
    pub data: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(domain: TorusDomain) -> Self {
        ScalarGrid { domain, data: vec![0.0; domain.nodes()] }
    }

    pub fn constant(domain: TorusDomain, c: f64) -> Self {
        ScalarGrid { domain, data: vec![c; domain.nodes()] }
    }

    pub fn from_fn(domain: TorusDomain, f: impl Fn(Vec2) -> f64 + Sync) -> Self {
        let data = map_nodes(domain.nodes(), |k| f(domain.point_of(k)));
        ScalarGrid { domain, data }
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[self.domain.idx(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> ScalarGrid {
        ScalarGrid { domain: self.domain, data: map_nodes(self.data.len(), |k| f(self.data[k])) }
    }

    /// Deterministic sum: sequential per row, rows combined in index order.
    /// The result is independent of the rayon worker count.
    pub fn sum(&self) -> f64 {
        let n1 = self.domain.n1;
        let rows: Vec<f64> = self
            .data
            .par_chunks(n1)
            .map(|row| row.iter().sum::<f64>())
            .collect();
        rows.iter().sum()
    }

    /// Trapezoidal quadrature of this field against the weight grid `w`
    /// (on a periodic uniform grid the trapezoid rule is the plain weighted sum).
    pub fn integral_weighted(&self, w: &ScalarGrid) -> f64 {
        debug_assert_eq!(self.domain, w.domain);
        let n1 = self.domain.n1;
        let rows: Vec<f64> = self
            .data
            .par_chunks(n1)
            .zip(w.data.par_chunks(n1))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .collect();
        rows.iter().sum::<f64>() * self.domain.h1() * self.domain.h2()
    }

    /// Apply a 5-point centered stencil with weights (w[0]..w[4]) for offsets
    /// (-2..=2) along `axis`, divided by `scale`. Interior nodes use direct
    /// indexing; only the two boundary strips pay for the periodic wrap.
    fn stencil5(&self, axis: usize, w: [f64; 5], scale: f64) -> ScalarGrid {
        let d = self.domain;
        let (n1, n2) = (d.n1, d.n2);
        let src = &self.data;
        let inv = 1.0 / scale;
        let row = |j: usize, out: &mut [f64]| {
            if axis == 0 {
                let base = j * n1;
                let r = &src[base..base + n1];
                for i in 2..n1 - 2 {
                    out[i] = (w[0] * r[i - 2]
                        + w[1] * r[i - 1]
                        + w[2] * r[i]
                        + w[3] * r[i + 1]
                        + w[4] * r[i + 2])
                        * inv;
                }
                for i in [0, 1, n1 - 2, n1 - 1] {
                    let f = |s: isize| r[(i as isize + s).rem_euclid(n1 as isize) as usize];
                    out[i] = (w[0] * f(-2) + w[1] * f(-1) + w[2] * f(0) + w[3] * f(1)
                        + w[4] * f(2))
                        * inv;
                }
            } else {
                let jm2 = ((j + n2 - 2) % n2) * n1;
                let jm1 = ((j + n2 - 1) % n2) * n1;
                let j0 = j * n1;
                let jp1 = ((j + 1) % n2) * n1;
                let jp2 = ((j + 2) % n2) * n1;
                for i in 0..n1 {
                    out[i] = (w[0] * src[jm2 + i]
                        + w[1] * src[jm1 + i]
                        + w[2] * src[j0 + i]
                        + w[3] * src[jp1 + i]
                        + w[4] * src[jp2 + i])
                        * inv;
                }
            }
        };
        let mut data = vec![0.0f64; d.nodes()];
        if d.nodes() >= PAR_THRESHOLD {
            data.par_chunks_mut(n1).enumerate().for_each(|(j, out)| row(j, out));
        } else {
            for (j, out) in data.chunks_mut(n1).enumerate() {
                row(j, out);
            }
        }
        ScalarGrid { domain: d, data }
    }

    /// Fourth-order central first derivative in direction `axis` (0 or 1).
    pub fn deriv(&self, axis: usize) -> ScalarGrid {
        let h = if axis == 0 { self.domain.h1() } else { self.domain.h2() };
        self.stencil5(axis, [1.0, -8.0, 0.0, 8.0, -1.0], 12.0 * h)
    }

    /// Fourth-order central second derivative in direction `axis`.
    pub fn deriv2(&self, axis: usize) -> ScalarGrid {
        let h = if axis == 0 { self.domain.h1() } else { self.domain.h2() };
        self.stencil5(axis, [-1.0, 16.0, -30.0, 16.0, -1.0], 12.0 * h * h)
    }

    /// Second-order 5-point Laplacian (used by the cut-locus spike detector,
    /// where robustness matters more than order).
    pub fn laplacian_5pt(&self) -> ScalarGrid {
        let d = self.domain;
        let (h1, h2) = (d.h1(), d.h2());
        let data = map_nodes(d.nodes(), |k| {
                let (i, j) = d.ij(k);
                let (i, j) = (i as isize, j as isize);
                (self.at(i + 1, j) - 2.0 * self.at(i, j) + self.at(i - 1, j)) / (h1 * h1)
                    + (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / (h2 * h2)
        });
        ScalarGrid { domain: d, data }
    }
}

/// Vector field (tangent components per node).
#[derive(Debug, Clone, PartialEq)]
pub struct VecGrid {
    pub domain: TorusDomain,
    pub data: Vec<Vec2>,
}

/// Covector field (differential components per node).
pub type CovecGrid = VecGrid;

impl VecGrid {
    pub fn zeros(domain: TorusDomain) -> Self {
        VecGrid { domain, data: vec![Vec2::ZERO; domain.nodes()] }
    }

    pub fn from_fn(domain: TorusDomain, f: impl Fn(Vec2) -> Vec2 + Sync) -> Self {
        let data = map_nodes(domain.nodes(), |k| f(domain.point_of(k)));
        VecGrid { domain, data }
    }

    pub fn component(&self, axis: usize) -> ScalarGrid {
        ScalarGrid {
            domain: self.domain,
            data: self.data.iter().map(|v| v.comp(axis)).collect(),
        }
    }
}

/// First eight (1,1)-fourier coefficient of a scalar grid for mode (k1, k2):
/// the coefficient of sin(2 pi k1 x / L1) * ... is recovered exactly for
/// band-limited data by discrete orthogonality.
pub fn sine_mode_amplitude(g: &ScalarGrid, k1: usize, k2: usize) -> f64 {
    let d = g.domain;
    let mut acc = 0.0;
    for idx in 0..d.nodes() {
        let p = d.point_of(idx);
        let s = if k2 == 0 {
            (2.0 * std::f64::consts::PI * k1 as f64 * p.x / d.l1).sin()
        } else if k1 == 0 {
            (2.0 * std::f64::consts::PI * k2 as f64 * p.y / d.l2).sin()
        } else {
            (2.0 * std::f64::consts::PI * k1 as f64 * p.x / d.l1).sin()
                * (2.0 * std::f64::consts::PI * k2 as f64 * p.y / d.l2).sin()
        };
        acc += g.data[idx] * s;
    }
    let norm = if k1 == 0 || k2 == 0 { 2.0 } else { 4.0 };
    acc * norm / d.nodes() as f64
}
