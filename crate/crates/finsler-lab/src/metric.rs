//! Metric and measure families on the flat 2-torus.
//!
//! Three families are supported, all strongly convex for validated parameters:
//!
//! * `euclidean`            F(x, v) = |v|
//! * `conformal`            F(x, v) = e^{lambda(x)} |v|
//! * `randers`              F(x, v) = sqrt(a_ij v^i v^j) + b_i(x) v^i,  a = e^{2 lambda} delta
//!
//! with `lambda` and the drift coefficients given as constant-plus-single-
//! Fourier-mode expressions. For these families the fundamental tensor, the
//! Cartan tensor, the dual norm and the Legendre transform all have closed
//! forms, which this module evaluates directly; the nested finite-difference
//! engine in [`crate::fd`] provides an independent route used for validation.

use crate::error::{Error, Result};
use crate::grid::TorusDomain;
use crate::sampling::SplitMix64;
use crate::vec2::{Cartan3, SymMatrix2, Vec2};

/// `c0 + amp * s1(x1) * s2(x2)` where `s_i = sin(2 pi k_i x_i / L_i)` for
/// `k_i > 0` and `s_i = 1` for `k_i = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierParam {
    pub c0: f64,
    pub amp: f64,
    pub k1: u32,
    pub k2: u32,
}

impl FourierParam {
    pub const ZERO: FourierParam = FourierParam { c0: 0.0, amp: 0.0, k1: 0, k2: 0 };

    pub fn constant(c0: f64) -> Self {
        FourierParam { c0, amp: 0.0, k1: 0, k2: 0 }
    }

    pub fn mode(c0: f64, amp: f64, k1: u32, k2: u32) -> Self {
        FourierParam { c0, amp, k1, k2 }
    }

    #[inline]
    fn factors(&self, dom: &TorusDomain, p: Vec2) -> (f64, f64, f64, f64) {
        let tau = 2.0 * std::f64::consts::PI;
        let (s1, c1) = if self.k1 > 0 {
            let a = tau * self.k1 as f64 * p.x / dom.l1;
            (a.sin(), a.cos())
        } else {
            (1.0, 0.0)
        };
        let (s2, c2) = if self.k2 > 0 {
            let a = tau * self.k2 as f64 * p.y / dom.l2;
            (a.sin(), a.cos())
        } else {
            (1.0, 0.0)
        };
        (s1, c1, s2, c2)
    }

    pub fn eval(&self, dom: &TorusDomain, p: Vec2) -> f64 {
        if self.amp == 0.0 {
            return self.c0;
        }
        let (s1, _, s2, _) = self.factors(dom, p);
        self.c0 + self.amp * s1 * s2
    }

    /// Analytic first derivative in direction `axis`.
    pub fn deriv(&self, dom: &TorusDomain, p: Vec2, axis: usize) -> f64 {
        if self.amp == 0.0 {
            return 0.0;
        }
        let tau = 2.0 * std::f64::consts::PI;
        let (s1, c1, s2, c2) = self.factors(dom, p);
        match axis {
            0 => self.amp * (tau * self.k1 as f64 / dom.l1) * c1 * s2,
            _ => self.amp * (tau * self.k2 as f64 / dom.l2) * s1 * c2,
        }
    }

    /// Analytic pure second derivative in direction `axis`.
    pub fn deriv2(&self, dom: &TorusDomain, p: Vec2, axis: usize) -> f64 {
        if self.amp == 0.0 {
            return 0.0;
        }
        let tau = 2.0 * std::f64::consts::PI;
        let (s1, _, s2, _) = self.factors(dom, p);
        match axis {
            0 => {
                let k = tau * self.k1 as f64 / dom.l1;
                -self.amp * k * k * s1 * s2
            }
            _ => {
                let k = tau * self.k2 as f64 / dom.l2;
                -self.amp * k * k * s1 * s2
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.amp == 0.0 || (self.k1 == 0 && self.k2 == 0)
    }
}

/// Metric family on the torus.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Euclidean,
    /// F = e^{lambda} |v| with lambda = eps sin sin.
    Conformal { lambda: FourierParam },
    /// F = e^{lambda} |v| + b(x) . v.
    Randers { lambda: FourierParam, b1: FourierParam, b2: FourierParam },
}

impl MetricSpec {
    pub fn conformal(eps: f64, k1: u32, k2: u32) -> Self {
        MetricSpec::Conformal { lambda: FourierParam::mode(0.0, eps, k1, k2) }
    }

    /// Randers over a euclidean base with constant drift.
    pub fn randers_const(b1: f64, b2: f64) -> Self {
        MetricSpec::Randers {
            lambda: FourierParam::ZERO,
            b1: FourierParam::constant(b1),
            b2: FourierParam::constant(b2),
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self, MetricSpec::Euclidean | MetricSpec::Conformal { .. })
    }

    /// True when F does not depend on the base point (locally Minkowski).
    pub fn is_x_independent(&self) -> bool {
        match self {
            MetricSpec::Euclidean => true,
            MetricSpec::Conformal { lambda } => lambda.is_constant(),
            MetricSpec::Randers { lambda, b1, b2 } => {
                lambda.is_constant() && b1.is_constant() && b2.is_constant()
            }
        }
    }
}

/// Smooth positive measure d mu = e^{Phi} dx^1 dx^2.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub phi: FourierParam,
}

impl MeasureSpec {
    pub fn lebesgue() -> Self {
        MeasureSpec { phi: FourierParam::ZERO }
    }
}

/// Pointwise metric data: conformal factor w = e^{lambda(x)} and drift b(x).
/// Everything the closed forms need at a fixed base point.
#[derive(Debug, Clone, Copy)]
pub struct MetricData {
    pub w: f64,
    pub b: Vec2,
}

impl MetricData {
    pub const EUCLIDEAN: MetricData = MetricData { w: 1.0, b: Vec2::ZERO };

    /// Finsler norm F(v) = w |v| + b . v.
    #[inline]
    pub fn norm(&self, v: Vec2) -> f64 {
        self.w * v.norm() + self.b.dot(v)
    }

    /// Riemannian-base norm of the drift, ||b||_a^2 = (b.b) / w^2.
    #[inline]
    pub fn drift_norm2(&self) -> f64 {
        self.b.dot(self.b) / (self.w * self.w)
    }

    /// Fundamental tensor g_{ij}(v) = l_i l_j + (F / alpha) w^2 P_ij with
    /// l = dF/dv and P the euclidean projector orthogonal to v.
    pub fn fundamental(&self, v: Vec2) -> SymMatrix2 {
        let r = v.norm();
        let unit = v.scale(1.0 / r);
        let l = Vec2::new(self.w * unit.x + self.b.x, self.w * unit.y + self.b.y);
        let alpha = self.w * r;
        let ff = self.norm(v) / alpha * self.w * self.w;
        // P_ij = delta_ij - unit_i unit_j
        SymMatrix2::new(
            l.x * l.x + ff * (1.0 - unit.x * unit.x),
            l.x * l.y + ff * (-unit.x * unit.y),
            l.y * l.y + ff * (1.0 - unit.y * unit.y),
        )
    }

    /// Cartan tensor C_{ijk}(v) = (h_ij m_k + h_ik m_j + h_jk m_i) / (2 alpha)
    /// with h = w^2 P and m = b - (b.v / |v|^2) v.
    pub fn cartan(&self, v: Vec2) -> Cartan3 {
        if self.b == Vec2::ZERO {
            return Cartan3::ZERO;
        }
        let r2 = v.dot(v);
        let r = r2.sqrt();
        let unit = v.scale(1.0 / r);
        let alpha = self.w * r;
        let m = self.b - v.scale(self.b.dot(v) / r2);
        let h = |i: usize, j: usize| {
            self.w * self.w * ((i == j) as u8 as f64 - unit.comp(i) * unit.comp(j))
        };
        let c = |i: usize, j: usize, k: usize| {
            (h(i, j) * m.comp(k) + h(i, k) * m.comp(j) + h(j, k) * m.comp(i)) / (2.0 * alpha)
        };
        Cartan3 { c111: c(0, 0, 0), c112: c(0, 0, 1), c122: c(0, 1, 1), c222: c(1, 1, 1) }
    }

    /// Dual norm F*(xi) = sup { xi(v) : F(v) = 1 } via the Randers co-metric.
    pub fn dual_norm(&self, xi: Vec2) -> f64 {
        let w2 = self.w * self.w;
        let rho = 1.0 - self.drift_norm2();
        let s = self.b.dot(xi) / w2; // <b, xi>_a
        let xi2 = xi.dot(xi) / w2; // |xi|_a^2
        ((rho * xi2 + s * s).sqrt() - s) / rho
    }

    /// Legendre transform: the unique v with xi(v) = F*(xi)^2 and F(v) = F*(xi).
    /// Computed as one half the xi-gradient of F*^2.
    pub fn legendre(&self, xi: Vec2) -> Vec2 {
        if xi == Vec2::ZERO {
            return Vec2::ZERO;
        }
        let w2 = self.w * self.w;
        let rho = 1.0 - self.drift_norm2();
        let s = self.b.dot(xi) / w2;
        let xi2 = xi.dot(xi) / w2;
        let q = (rho * xi2 + s * s).sqrt();
        let fstar = (q - s) / rho;
        // dF*/d xi_i = [ (rho xi_i + s b_i) / (w^2 q) - b_i / w^2 ] / rho
        let grad = Vec2::new(
            ((rho * xi.x + s * self.b.x) / (w2 * q) - self.b.x / w2) / rho,
            ((rho * xi.y + s * self.b.y) / (w2 * q) - self.b.y / w2) / rho,
        );
        grad.scale(fstar)
    }

    /// Inverse Legendre map v -> g_v(v, .) = F dF/dv (a covector).
    pub fn lower(&self, v: Vec2) -> Vec2 {
        let r = v.norm();
        if r == 0.0 {
            return Vec2::ZERO;
        }
        let f = self.norm(v);
        let l = Vec2::new(self.w * v.x / r + self.b.x, self.w * v.y / r + self.b.y);
        l.scale(f)
    }
}

/// A validated Finsler metric measure space (M, F, mu) on the torus, plus the
/// numerical policy constants shared by every module.
#[derive(Debug, Clone)]
pub struct Space {
    pub domain: TorusDomain,
    pub metric: MetricSpec,
    pub measure: MeasureSpec,
    /// Finite-difference step in velocity, used by the connection layer.
    pub h_v: f64,
    /// Finite-difference step in position for pointwise (off-grid) derivatives.
    pub h_x: f64,
    /// Zero-gradient threshold: covectors with F*(xi) below this are treated as zero.
    pub eta: f64,
    pub seed: u64,
}

/// Strong-convexity margin enforced on the Randers drift.
pub const DRIFT_LIMIT: f64 = 0.95;
/// Amplitude cap for the conformal exponent.
pub const CONFORMAL_LIMIT: f64 = 0.5;

impl Space {
    pub fn new(domain: TorusDomain, metric: MetricSpec, measure: MeasureSpec) -> Result<Self> {
        Space::with_policy(domain, metric, measure, 1e-3, 1e-3, 1e-10, 42)
    }

    pub fn with_policy(
        domain: TorusDomain,
        metric: MetricSpec,
        measure: MeasureSpec,
        h_v: f64,
        h_x: f64,
        eta: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(h_v > 0.0 && h_v < domain.min_mesh() && h_x > 0.0 && h_x < domain.min_mesh()) {
            return Err(Error::Config {
                line: 0,
                detail: format!("derivative steps must lie in (0, {}), got {h_v}, {h_x}", domain.min_mesh()),
            });
        }
        if !(eta > 0.0) {
            return Err(Error::Config { line: 0, detail: "eta must be positive".into() });
        }
        let space = Space { domain, metric, measure, h_v, h_x, eta, seed };
        space.validate_metric()?;
        Ok(space)
    }

    /// Scan a refined lattice for convexity violations. The drift bound is the
    /// sup of ||b||_a over the torus; sampling at 2x grid resolution is exact
    /// for single-mode coefficients to well below the 0.95 margin.
    fn validate_metric(&self) -> Result<()> {
        if let MetricSpec::Conformal { lambda } | MetricSpec::Randers { lambda, .. } = &self.metric {
            if lambda.amp.abs() > CONFORMAL_LIMIT {
                return Err(Error::Config {
                    line: 0,
                    detail: format!("conformal amplitude {} exceeds {}", lambda.amp, CONFORMAL_LIMIT),
                });
            }
        }
        if let MetricSpec::Randers { .. } = &self.metric {
            let (n1, n2) = (2 * self.domain.n1, 2 * self.domain.n2);
            let (mut worst, mut worst_p) = (0.0f64, Vec2::ZERO);
            for j in 0..n2 {
                for i in 0..n1 {
                    let p = Vec2::new(
                        i as f64 * self.domain.l1 / n1 as f64,
                        j as f64 * self.domain.l2 / n2 as f64,
                    );
                    let norm2 = self.metric_data(p).drift_norm2();
                    if norm2 > worst {
                        worst = norm2;
                        worst_p = p;
                    }
                }
            }
            if worst.sqrt() > DRIFT_LIMIT {
                return Err(Error::InvalidSpec {
                    x1: worst_p.x,
                    x2: worst_p.y,
                    norm: worst.sqrt(),
                    limit: DRIFT_LIMIT,
                });
            }
        }
        Ok(())
    }

    /// Pointwise metric data (w, b) at an arbitrary point.
    #[inline]
    pub fn metric_data(&self, p: Vec2) -> MetricData {
        match &self.metric {
            MetricSpec::Euclidean => MetricData::EUCLIDEAN,
            MetricSpec::Conformal { lambda } => {
                MetricData { w: lambda.eval(&self.domain, p).exp(), b: Vec2::ZERO }
            }
            MetricSpec::Randers { lambda, b1, b2 } => MetricData {
                w: lambda.eval(&self.domain, p).exp(),
                b: Vec2::new(b1.eval(&self.domain, p), b2.eval(&self.domain, p)),
            },
        }
    }

    /// Measure exponent Phi(x).
    #[inline]
    pub fn phi(&self, p: Vec2) -> f64 {
        self.measure.phi.eval(&self.domain, p)
    }

    pub fn phi_deriv(&self, p: Vec2, axis: usize) -> f64 {
        self.measure.phi.deriv(&self.domain, p, axis)
    }

    /// Finsler norm F(x, v). Zero vectors are allowed and map to zero.
    pub fn eval_f(&self, x: Vec2, v: Vec2) -> f64 {
        self.metric_data(x).norm(v)
    }

    fn require_nonzero(&self, x: Vec2, v: Vec2) -> Result<()> {
        let f = self.eval_f(x, v);
        if f <= self.eta {
            return Err(Error::ZeroVector { f });
        }
        Ok(())
    }

    /// Fundamental tensor g_{ij}(x, v) = 1/2 d^2(F^2)/dv^i dv^j.
    pub fn fundamental_tensor(&self, x: Vec2, v: Vec2) -> Result<SymMatrix2> {
        self.require_nonzero(x, v)?;
        Ok(self.metric_data(x).fundamental(v))
    }

    /// Cartan tensor C_{ijk}(x, v) = 1/4 d^3(F^2)/dv^i dv^j dv^k.
    pub fn cartan_tensor(&self, x: Vec2, v: Vec2) -> Result<Cartan3> {
        self.require_nonzero(x, v)?;
        Ok(self.metric_data(x).cartan(v))
    }

    /// Dual norm F*(xi).
    pub fn dual_norm(&self, x: Vec2, xi: Vec2) -> f64 {
        if xi == Vec2::ZERO {
            return 0.0;
        }
        self.metric_data(x).dual_norm(xi)
    }

    /// Legendre transform L*(xi); covectors with F*(xi) < eta map to zero.
    pub fn legendre_transform(&self, x: Vec2, xi: Vec2) -> Vec2 {
        let data = self.metric_data(x);
        if xi == Vec2::ZERO || data.dual_norm(xi) < self.eta {
            return Vec2::ZERO;
        }
        data.legendre(xi)
    }

    /// Pointwise misalignment alpha(x): the largest ratio g_V(Y,Y) / g_W(Y,Y)
    /// over unit V, W, Y, sampled on an m-point angular lattice per slot and
    /// polished by coordinate golden-section ascent. The result is a certified
    /// lower bound of the supremum and is nondecreasing under grid refinement
    /// m -> 2m.
    pub fn misalignment(&self, x: Vec2, m: usize) -> f64 {
        assert!(m >= 64, "misalignment needs an angular resolution of at least 64");
        let data = self.metric_data(x);
        if data.b == Vec2::ZERO {
            // g is v-independent: every ratio is exactly 1.
            return 1.0;
        }
        let tau = 2.0 * std::f64::consts::PI;
        let gs: Vec<SymMatrix2> =
            (0..m).map(|t| data.fundamental(Vec2::from_angle(tau * t as f64 / m as f64))).collect();
        let mut best = 1.0f64;
        let mut arg = (0usize, 0usize, 0usize);
        for s in 0..m {
            let y = Vec2::from_angle(tau * s as f64 / m as f64);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut arg_lo, mut arg_hi) = (0usize, 0usize);
            for (t, g) in gs.iter().enumerate() {
                let q = g.quad(y, y);
                if q < lo {
                    lo = q;
                    arg_lo = t;
                }
                if q > hi {
                    hi = q;
                    arg_hi = t;
                }
            }
            if hi / lo > best {
                best = hi / lo;
                arg = (arg_hi, arg_lo, s);
            }
        }
        // Local ascent from the best lattice triple.
        let ratio = |tv: f64, tw: f64, ty: f64| {
            let y = Vec2::from_angle(ty);
            data.fundamental(Vec2::from_angle(tv)).quad(y, y)
                / data.fundamental(Vec2::from_angle(tw)).quad(y, y)
        };
        let step = tau / m as f64;
        let mut t = (arg.0 as f64 * step, arg.1 as f64 * step, arg.2 as f64 * step);
        for _ in 0..4 {
            t.0 = golden_max(|a| ratio(a, t.1, t.2), t.0 - step, t.0 + step);
            t.1 = golden_max(|a| -ratio(t.0, a, t.2), t.1 - step, t.1 + step);
            t.2 = golden_max(|a| ratio(t.0, t.1, a), t.2 - step, t.2 + step);
        }
        best.max(ratio(t.0, t.1, t.2))
    }

    /// Global misalignment: max of the pointwise misalignment over grid nodes.
    pub fn global_misalignment(&self, m: usize) -> f64 {
        self.misalignment_over(0..self.domain.nodes(), m)
    }

    /// Misalignment maximized over a node subset.
    pub fn misalignment_over(&self, nodes: impl IntoIterator<Item = usize>, m: usize) -> f64 {
        use rayon::prelude::*;
        if self.metric.is_riemannian() {
            return 1.0;
        }
        let nodes: Vec<usize> = nodes.into_iter().collect();
        nodes
            .par_iter()
            .map(|&k| self.misalignment(self.domain.point_of(k), m))
            .reduce(|| 1.0, f64::max)
    }

    /// Deterministic RNG derived from the space seed and a stream tag.
    pub fn rng(&self, tag: u64) -> SplitMix64 {
        SplitMix64::new(self.seed ^ tag.wrapping_mul(0x9E3779B97F4A7C15))
    }
}

/// Golden-section search for the maximum of `f` on [lo, hi].
/// Returns the abscissa of the maximum (tolerance 1e-12 of the bracket).
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        c
    } else {
        d
    }
}

/// Maximize xi(v)/F(v) over unit directions by Newton iteration on the angle.
///
/// This is the generic support-function route; the closed-form dual norm is
/// exact for the shipped families, so this solver serves as the independent
/// cross-check (and would become the production path for families without a
/// closed-form co-metric).
pub fn angular_support_maximizer(data: &MetricData, xi: Vec2, max_iters: usize) -> Result<(f64, Vec2)> {
    if xi == Vec2::ZERO {
        return Ok((0.0, Vec2::ZERO));
    }
    let phi = |t: f64| {
        let e = Vec2::from_angle(t);
        xi.dot(e) / data.norm(e)
    };
    // d/dt [xi(e)/F(e)] with dF/dv = l evaluated analytically.
    let dphi = |t: f64| {
        let e = Vec2::from_angle(t);
        let ep = e.perp();
        let f = data.norm(e);
        let l = Vec2::new(data.w * e.x + data.b.x, data.w * e.y + data.b.y);
        (xi.dot(ep) * f - xi.dot(e) * l.dot(ep)) / (f * f)
    };
    // Coarse scan to land in the right basin.
    let m = 64;
    let tau = 2.0 * std::f64::consts::PI;
    let mut t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..m {
        let tk = tau * k as f64 / m as f64;
        let p = phi(tk);
        if p > best {
            best = p;
            t = tk;
        }
    }
    let h = 1e-6;
    for iter in 0..max_iters {
        let d = dphi(t);
        let dd = (dphi(t + h) - dphi(t - h)) / (2.0 * h);
        if dd.abs() < 1e-300 {
            return Err(Error::NonConvergence { iters: iter });
        }
        let step = d / dd;
        let t_new = t - step;
        // Keep Newton inside the basin; fall back to a damped step otherwise.
        let t_new = if phi(t_new) + 1e-15 >= phi(t) { t_new } else { t - 0.25 * step };
        if (t_new - t).abs() < 1e-13 {
            let e = Vec2::from_angle(t_new);
            let unit = e.scale(1.0 / data.norm(e));
            return Ok((xi.dot(unit), unit));
        }
        t = t_new;
    }
    Err(Error::NonConvergence { iters: max_iters })
}
