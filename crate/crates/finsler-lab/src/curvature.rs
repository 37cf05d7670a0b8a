//! Spray, Chern connection, curvatures and region-wide curvature bounds.
//!
//! All quantities are assembled from the closed-form fundamental tensor with
//! fourth-order finite differences for the base-point derivatives:
//!
//! * spray           G^i = 1/4 g^{il} { (F^2)_{x^k v^l} v^k - (F^2)_{x^l} }
//! * connection      Gamma^i_jk = 1/2 g^{il} ( dg_lj/dx^k + dg_lk/dx^j - dg_jk/dx^l ),
//!                   with horizontal derivatives d/dx^i = d/dx^i - N^m_i d/dv^m
//! * curvature       R^i_jkl = d Gamma^i_jl / dx^k - d Gamma^i_jk / dx^l
//!                            + Gamma^i_km Gamma^m_jl - Gamma^i_lm Gamma^m_jk
//!
//! Velocity arguments are normalized to F(v) = 1 internally and results are
//! rescaled by the appropriate homogeneity degree.

use crate::error::{Error, Result};
use crate::fd::central4;
use crate::geodesics;
use crate::grid::VecGrid;
use crate::metric::Space;
use crate::vec2::Vec2;

const DIM: usize = 2;

fn unit(dir: usize) -> Vec2 {
    if dir == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(0.0, 1.0)
    }
}

/// Chern connection data at a point: coefficients, nonlinear connection and spray.
#[derive(Debug, Clone, Copy)]
pub struct ConnectionCoeffs {
    /// Gamma^i_{jk}, symmetric in (j, k).
    pub gamma: [[[f64; 2]; 2]; 2],
    /// Nonlinear connection N^i_j = dG^i/dv^j.
    pub n_coeff: [[f64; 2]; 2],
    /// Spray coefficients G^i.
    pub spray: Vec2,
}

/// Pointwise curvature record used by the `curvature` CSV emitter.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureSample {
    pub x: Vec2,
    pub v: Vec2,
    pub flag: f64,
    pub ricci: f64,
    pub distortion: f64,
    pub s_curv: f64,
    pub s_dot: f64,
    pub weighted_ricci: f64,
    pub mixed_weighted_ricci: f64,
    pub misalignment: f64,
}

/// Sampled curvature/misalignment bounds over a region, feeding the
/// hypotheses of the gradient-estimate checks (Ric^N >= -K, alpha <= A).
#[derive(Debug, Clone)]
pub struct BoundScan {
    pub region: Region,
    pub n_eff: f64,
    pub reference: ReferenceTag,
    /// K >= 0 such that the sampled (mixed) weighted Ricci satisfies
    /// Ric >= -K F^2(v) over all samples.
    pub k_lower: f64,
    /// Sampled misalignment bound over the region (>= 1).
    pub a_upper: f64,
    pub node_samples: usize,
    pub angle_samples: usize,
    pub excluded_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Whole,
    Ball { center: Vec2, radius: f64 },
}

/// Which reference vector the mixed weighted Ricci is traced against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceTag {
    /// w = v: plain weighted Ricci Ric^N (the compact-theorem hypothesis).
    Velocity,
    /// w = grad r with r the forward distance from `p` (the local-theorem hypothesis).
    GradDistance { p: Vec2 },
}

fn normalized(space: &Space, x: Vec2, v: Vec2) -> Result<(Vec2, f64)> {
    let f = space.eval_f(x, v);
    if f <= space.eta {
        return Err(Error::ZeroVector { f });
    }
    Ok((v.scale(1.0 / f), f))
}

/// Spray coefficients G^i(x, v); positively 2-homogeneous in v.
pub fn spray(space: &Space, x: Vec2, v: Vec2) -> Result<Vec2> {
    let (vh, f) = normalized(space, x, v)?;
    Ok(spray_unit(space, x, vh).scale(f * f))
}

/// Spray at a (not necessarily normalized) velocity without rescaling.
fn spray_unit(space: &Space, x: Vec2, v: Vec2) -> Vec2 {
    if space.metric.is_x_independent() {
        return Vec2::ZERO;
    }
    let h = space.h_x;
    let g_inv = space.metric_data(x).fundamental(v).inverse();
    // (F^2)_{x^l} and (F^2)_{x^k v^l} = d/dx^k of 2 y_l, with y = g_v(v, .).
    let mut rhs = [0.0f64; 2];
    for l in 0..DIM {
        let mut mixed = 0.0;
        for k in 0..DIM {
            let dy_l = central4(
                |t| space.metric_data(x + unit(k).scale(t)).lower(v).comp(l),
                h,
            );
            mixed += 2.0 * dy_l * v.comp(k);
        }
        let fx_l = central4(
            |t| {
                let f = space.metric_data(x + unit(l).scale(t)).norm(v);
                f * f
            },
            h,
        );
        rhs[l] = mixed - fx_l;
    }
    Vec2::new(
        0.25 * (g_inv.get(0, 0) * rhs[0] + g_inv.get(0, 1) * rhs[1]),
        0.25 * (g_inv.get(1, 0) * rhs[0] + g_inv.get(1, 1) * rhs[1]),
    )
}

/// Nonlinear connection N^i_j = dG^i/dv^j at a normalized velocity.
fn nonlinear_connection(space: &Space, x: Vec2, vh: Vec2) -> [[f64; 2]; 2] {
    let h = space.h_v;
    let mut n = [[0.0f64; 2]; 2];
    for j in 0..DIM {
        let gplus2 = spray_unit(space, x, vh + unit(j).scale(2.0 * h));
        let gplus = spray_unit(space, x, vh + unit(j).scale(h));
        let gminus = spray_unit(space, x, vh + unit(j).scale(-h));
        let gminus2 = spray_unit(space, x, vh + unit(j).scale(-2.0 * h));
        for i in 0..DIM {
            n[i][j] = (gminus2.comp(i) - 8.0 * gminus.comp(i) + 8.0 * gplus.comp(i)
                - gplus2.comp(i))
                / (12.0 * h);
        }
    }
    n
}

/// Chern connection coefficients (with the nonlinear connection and spray).
pub fn chern_coefficients(space: &Space, x: Vec2, v: Vec2) -> Result<ConnectionCoeffs> {
    let (vh, f) = normalized(space, x, v)?;
    let coeffs = chern_unit(space, x, vh);
    let mut scaled = coeffs;
    // Gamma is 0-homogeneous; N is 1-homogeneous; G is 2-homogeneous.
    for i in 0..DIM {
        for j in 0..DIM {
            scaled.n_coeff[i][j] *= f;
        }
    }
    scaled.spray = coeffs.spray.scale(f * f);
    Ok(scaled)
}

fn chern_unit(space: &Space, x: Vec2, vh: Vec2) -> ConnectionCoeffs {
    let h = space.h_x;
    let n = nonlinear_connection(space, x, vh);
    // Horizontal derivative of g: dg_ij/dx^k (v fixed) - N^m_k * 2 C_ijm.
    let cartan = space.metric_data(x).cartan(vh);
    let mut dg = [[[0.0f64; 2]; 2]; 2]; // dg[k][i][j] = delta g_ij / delta x^k
    for k in 0..DIM {
        let gp2 = space.metric_data(x + unit(k).scale(2.0 * h)).fundamental(vh);
        let gp1 = space.metric_data(x + unit(k).scale(h)).fundamental(vh);
        let gm1 = space.metric_data(x + unit(k).scale(-h)).fundamental(vh);
        let gm2 = space.metric_data(x + unit(k).scale(-2.0 * h)).fundamental(vh);
        for i in 0..DIM {
            for j in 0..DIM {
                let dx = (gm2.get(i, j) - 8.0 * gm1.get(i, j) + 8.0 * gp1.get(i, j)
                    - gp2.get(i, j))
                    / (12.0 * h);
                let dv: f64 = (0..DIM).map(|m| n[m][k] * 2.0 * cartan.get(i, j, m)).sum();
                dg[k][i][j] = dx - dv;
            }
        }
    }
    let g_inv = space.metric_data(x).fundamental(vh).inverse();
    let mut gamma = [[[0.0f64; 2]; 2]; 2];
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let mut acc = 0.0;
                for l in 0..DIM {
                    acc += g_inv.get(i, l) * (dg[k][l][j] + dg[j][l][k] - dg[l][j][k]);
                }
                gamma[i][j][k] = 0.5 * acc;
            }
        }
    }
    ConnectionCoeffs { gamma, n_coeff: n, spray: spray_unit(space, x, vh) }
}

/// Chern Riemannian curvature R^i_{jkl}(x, v); 0-homogeneous in v.
pub fn chern_riemann(space: &Space, x: Vec2, v: Vec2) -> Result<[[[[f64; 2]; 2]; 2]; 2]> {
    let (vh, _) = normalized(space, x, v)?;
    Ok(chern_riemann_unit(space, x, vh))
}

fn chern_riemann_unit(space: &Space, x: Vec2, vh: Vec2) -> [[[[f64; 2]; 2]; 2]; 2] {
    let hx = space.h_x;
    let hv = space.h_v;
    let base = chern_unit(space, x, vh);
    let n = base.n_coeff;

    // delta Gamma / delta x^k = d/dx^k (v fixed) - N^m_k d/dv^m.
    let gamma_at_x = |t: f64, k: usize| chern_unit(space, x + unit(k).scale(t), vh).gamma;
    let gamma_at_v = |t: f64, m: usize| chern_unit(space, x, vh + unit(m).scale(t)).gamma;

    let mut dgamma_x = [[[[0.0f64; 2]; 2]; 2]; 2]; // [k][i][j][l]
    for k in 0..DIM {
        let p2 = gamma_at_x(2.0 * hx, k);
        let p1 = gamma_at_x(hx, k);
        let m1 = gamma_at_x(-hx, k);
        let m2 = gamma_at_x(-2.0 * hx, k);
        for i in 0..DIM {
            for j in 0..DIM {
                for l in 0..DIM {
                    dgamma_x[k][i][j][l] =
                        (m2[i][j][l] - 8.0 * m1[i][j][l] + 8.0 * p1[i][j][l] - p2[i][j][l])
                            / (12.0 * hx);
                }
            }
        }
    }
    let mut dgamma_v = [[[[0.0f64; 2]; 2]; 2]; 2]; // [m][i][j][l]
    for m in 0..DIM {
        let p2 = gamma_at_v(2.0 * hv, m);
        let p1 = gamma_at_v(hv, m);
        let m1 = gamma_at_v(-hv, m);
        let m2 = gamma_at_v(-2.0 * hv, m);
        for i in 0..DIM {
            for j in 0..DIM {
                for l in 0..DIM {
                    dgamma_v[m][i][j][l] =
                        (m2[i][j][l] - 8.0 * m1[i][j][l] + 8.0 * p1[i][j][l] - p2[i][j][l])
                            / (12.0 * hv);
                }
            }
        }
    }
    let delta_gamma = |k: usize, i: usize, j: usize, l: usize| {
        let mut d = dgamma_x[k][i][j][l];
        for m in 0..DIM {
            d -= n[m][k] * dgamma_v[m][i][j][l];
        }
        d
    };

    let mut riem = [[[[0.0f64; 2]; 2]; 2]; 2];
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let mut r = delta_gamma(k, i, j, l) - delta_gamma(l, i, j, k);
                    for m in 0..DIM {
                        r += base.gamma[i][k][m] * base.gamma[m][j][l]
                            - base.gamma[i][l][m] * base.gamma[m][j][k];
                    }
                    riem[i][j][k][l] = r;
                }
            }
        }
    }
    riem
}

/// Flag curvature K(u, v) of the plane span{u, v} with pole v.
pub fn flag_curvature(space: &Space, x: Vec2, v: Vec2, u: Vec2) -> Result<f64> {
    let (vh, _) = normalized(space, x, v)?;
    let g = space.metric_data(x).fundamental(vh);
    let uh = u.scale(1.0 / u.norm().max(1e-300));
    let gram = g.quad(uh, uh) * g.quad(vh, vh) - g.quad(uh, vh) * g.quad(uh, vh);
    if gram.abs() < 1e-12 {
        return Err(Error::DegenerateFlag { gram });
    }
    let riem = chern_riemann_unit(space, x, vh);
    // R_{ijkl} = g_{sj} R^s_{ikl}; numerator -R_{ijkl} u^i v^j u^k v^l.
    let mut num = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let mut r_low = 0.0;
                    for s in 0..DIM {
                        r_low += g.get(s, j) * riem[s][i][k][l];
                    }
                    num -= r_low * uh.comp(i) * vh.comp(j) * uh.comp(k) * vh.comp(l);
                }
            }
        }
    }
    Ok(num / gram)
}

/// Bilinear form B(X, Y) = g_v(R_v(X), Y) of the Jacobi operator at a
/// normalized pole, in coordinates.
fn jacobi_form(space: &Space, x: Vec2, vh: Vec2) -> [[f64; 2]; 2] {
    let g = space.metric_data(x).fundamental(vh);
    let riem = chern_riemann_unit(space, x, vh);
    let mut b = [[0.0f64; 2]; 2];
    for kk in 0..DIM {
        // (R_v(e_k))^i = R^i_{jkl} v^j e_k^k v^l
        let mut rv = [0.0f64; 2];
        for i in 0..DIM {
            for j in 0..DIM {
                for l in 0..DIM {
                    rv[i] += riem[i][j][kk][l] * vh.comp(j) * vh.comp(l);
                }
            }
        }
        for s in 0..DIM {
            let mut acc = 0.0;
            for i in 0..DIM {
                acc += g.get(i, s) * rv[i];
            }
            b[kk][s] = acc;
        }
    }
    b
}

/// Finslerian Ricci curvature Ric(x, v) = F^2(v) sum K(e_i, v);
/// 2-homogeneous in v. Computed as the g_v-trace of the Jacobi form.
pub fn ricci(space: &Space, x: Vec2, v: Vec2) -> Result<f64> {
    let (vh, f) = normalized(space, x, v)?;
    let b = jacobi_form(space, x, vh);
    let g_inv = space.metric_data(x).fundamental(vh).inverse();
    let mut tr = 0.0;
    for k in 0..DIM {
        for s in 0..DIM {
            tr += g_inv.get(k, s) * b[k][s];
        }
    }
    Ok(tr * f * f)
}

/// Distortion tau(x, v) = log sqrt(det g(x, v)) - Phi(x).
pub fn distortion(space: &Space, x: Vec2, v: Vec2) -> Result<f64> {
    let (vh, _) = normalized(space, x, v)?;
    let g = space.metric_data(x).fundamental(vh);
    Ok(g.det().sqrt().ln() - space.phi(x))
}

/// S-curvature and its geodesic derivative: S = d tau / dt along the geodesic
/// with gamma_dot(0) = v, S_dot the second derivative. Central differences at
/// eps and eps/2 with Richardson extrapolation.
pub fn s_curvature(space: &Space, x: Vec2, v: Vec2) -> Result<(f64, f64)> {
    let (vh, f) = normalized(space, x, v)?;
    let eps = 1e-3;
    let tau_along = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return distortion(space, x, vh);
        }
        let (xt, vt) = geodesics::shoot_state(space, x, vh, t, 8)?;
        distortion(space, xt, vt)
    };
    let stencil = |e: f64| -> Result<(f64, f64)> {
        let tp = tau_along(e)?;
        let t0 = tau_along(0.0)?;
        let tm = tau_along(-e)?;
        Ok(((tp - tm) / (2.0 * e), (tp - 2.0 * t0 + tm) / (e * e)))
    };
    let (s_c, sd_c) = stencil(eps)?;
    let (s_f, sd_f) = stencil(eps * 0.5)?;
    let s = (4.0 * s_f - s_c) / 3.0;
    let sdot = (4.0 * sd_f - sd_c) / 3.0;
    Ok((s * f, sdot * f * f))
}

fn check_n_eff(n_eff: f64) -> Result<()> {
    if n_eff.is_nan() || (n_eff.is_finite() && n_eff <= 2.0) {
        return Err(Error::BadN { n: n_eff });
    }
    Ok(())
}

/// Weighted Ricci curvature Ric^N = Ric + S_dot - S^2/(N - n); N = inf drops
/// the last term. Requires N > n = 2 (the N = n branch is not implemented).
pub fn weighted_ricci(space: &Space, x: Vec2, v: Vec2, n_eff: f64) -> Result<f64> {
    check_n_eff(n_eff)?;
    let ric = ricci(space, x, v)?;
    let (s, sdot) = s_curvature(space, x, v)?;
    if n_eff.is_infinite() {
        Ok(ric + sdot)
    } else {
        Ok(ric + sdot - s * s / (n_eff - 2.0))
    }
}

/// Weighted flag curvature K^k(v, w) with pole v and transverse w.
pub fn weighted_flag(space: &Space, x: Vec2, v: Vec2, w: Vec2, k_eff: f64) -> Result<f64> {
    check_n_eff(k_eff)?;
    let flag = flag_curvature(space, x, v, w)?;
    let (s, sdot) = s_curvature(space, x, v)?;
    let f2 = {
        let f = space.eval_f(x, v);
        f * f
    };
    // n = 2, so (n - 1) = 1.
    if k_eff.is_infinite() {
        Ok(flag + sdot / f2)
    } else {
        Ok(flag + sdot / f2 - s * s / ((k_eff - 2.0) * f2))
    }
}

/// Mixed weighted Ricci ^mRic^N_w(x, v) = tr_w R_v(v) + S_dot - S^2/(N - n),
/// where the Jacobi-operator trace is taken against g_w. Reduces to the
/// weighted Ricci for w = v.
pub fn mixed_weighted_ricci(space: &Space, x: Vec2, v: Vec2, w: Vec2, n_eff: f64) -> Result<f64> {
    check_n_eff(n_eff)?;
    let (vh, f) = normalized(space, x, v)?;
    let (wh, _) = normalized(space, x, w)?;
    let b = jacobi_form(space, x, vh);
    let gw_inv = space.metric_data(x).fundamental(wh).inverse();
    let mut tr = 0.0;
    for k in 0..DIM {
        for s in 0..DIM {
            tr += gw_inv.get(k, s) * b[k][s];
        }
    }
    let tr = tr * f * f;
    let (s, sdot) = s_curvature(space, x, v)?;
    if n_eff.is_infinite() {
        Ok(tr + sdot)
    } else {
        Ok(tr + sdot - s * s / (n_eff - 2.0))
    }
}

/// The same trace computed through an explicit g_v-orthonormal basis built by
/// Gram-Schmidt from a seed direction; used to verify basis independence.
pub fn mixed_trace_gram_schmidt(
    space: &Space,
    x: Vec2,
    v: Vec2,
    w: Vec2,
    seed_angle: f64,
) -> Result<f64> {
    let (vh, f) = normalized(space, x, v)?;
    let (wh, _) = normalized(space, x, w)?;
    let gv = space.metric_data(x).fundamental(vh);
    let gw = space.metric_data(x).fundamental(wh);
    // Orthonormalize {e(seed), e(seed)+90deg} under g_v.
    let a0 = Vec2::from_angle(seed_angle);
    let e1 = a0.scale(1.0 / gv.quad(a0, a0).sqrt());
    let a1 = Vec2::from_angle(seed_angle + std::f64::consts::FRAC_PI_2);
    let raw = a1 - e1.scale(gv.quad(a1, e1));
    let e2 = raw.scale(1.0 / gv.quad(raw, raw).sqrt());
    let b = jacobi_form(space, x, vh);
    let form = |u: Vec2, z: Vec2| {
        let mut acc = 0.0;
        for k in 0..DIM {
            for s in 0..DIM {
                acc += b[k][s] * u.comp(k) * z.comp(s);
            }
        }
        acc
    };
    // Contract with the inverse of (g_w restricted to the basis).
    let gw11 = gw.quad(e1, e1);
    let gw12 = gw.quad(e1, e2);
    let gw22 = gw.quad(e2, e2);
    let det = gw11 * gw22 - gw12 * gw12;
    let tr = (gw22 * form(e1, e1) - gw12 * (form(e1, e2) + form(e2, e1)) + gw11 * form(e2, e2))
        / det;
    Ok(tr * f * f)
}

/// The non-Riemannian tensor T(V, W) = grad^V tau(V) - grad^W tau(W) over a
/// pair of vector-field grids: per node, the g_V- and g_W-raised differentials
/// of x -> tau(x, V(x)) resp. tau(x, W(x)) are subtracted; the difference is
/// lowered with g_V and returned with its dual norm. Nodes where either field
/// is below the zero threshold are flagged invalid.
pub struct TauTensorField {
    pub covector: VecGrid,
    pub dual_norm: Vec<f64>,
    pub valid: Vec<bool>,
}

pub fn tau_tensor_field(space: &Space, v_field: &VecGrid, w_field: &VecGrid) -> TauTensorField {
    let dom = v_field.domain;
    let valid: Vec<bool> = (0..dom.nodes())
        .map(|k| {
            let p = dom.point_of(k);
            space.eval_f(p, v_field.data[k]) > space.eta
                && space.eval_f(p, w_field.data[k]) > space.eta
        })
        .collect();
    let tau_of = |field: &VecGrid| {
        let mut g = crate::grid::ScalarGrid::zeros(dom);
        for k in 0..dom.nodes() {
            let p = dom.point_of(k);
            g.data[k] = if valid[k] {
                distortion(space, p, field.data[k]).unwrap_or(0.0)
            } else {
                0.0
            };
        }
        g
    };
    let tau_v = tau_of(v_field);
    let tau_w = tau_of(w_field);
    let (dv1, dv2) = (tau_v.deriv(0), tau_v.deriv(1));
    let (dw1, dw2) = (tau_w.deriv(0), tau_w.deriv(1));
    let mut cov = VecGrid::zeros(dom);
    let mut norms = vec![0.0f64; dom.nodes()];
    for k in 0..dom.nodes() {
        if !valid[k] {
            continue;
        }
        let p = dom.point_of(k);
        let data = space.metric_data(p);
        let gv = data.fundamental(v_field.data[k]);
        let gw = data.fundamental(w_field.data[k]);
        let grad_v = gv.inverse().mul_vec(Vec2::new(dv1.data[k], dv2.data[k]));
        let grad_w = gw.inverse().mul_vec(Vec2::new(dw1.data[k], dw2.data[k]));
        let diff = grad_v - grad_w;
        let xi = gv.mul_vec(diff);
        cov.data[k] = xi;
        norms[k] = space.dual_norm(p, xi);
    }
    TauTensorField { covector: cov, dual_norm: norms, valid }
}

/// Pointwise T(V, W) at a node of the pair of field grids.
pub fn tau_tensor(
    space: &Space,
    v_field: &VecGrid,
    w_field: &VecGrid,
    node: usize,
) -> Result<(Vec2, f64)> {
    let field = tau_tensor_field(space, v_field, w_field);
    if !field.valid[node] {
        return Err(Error::ZeroVector { f: 0.0 });
    }
    Ok((field.covector.data[node], field.dual_norm[node]))
}

/// Scan curvature and misalignment bounds over a region.
///
/// `k_lower = max(0, -min mRic^N_w(x, v)/F^2(v))` over a deterministic node
/// subsample and nested angular set; `a_upper` from the misalignment over the
/// region. Nodes where the reference field is degenerate (cut locus, ball
/// center) are excluded and counted.
pub fn bound_scan(
    space: &Space,
    region: Region,
    n_eff: f64,
    reference: ReferenceTag,
    angle_samples: usize,
) -> Result<BoundScan> {
    check_n_eff(n_eff)?;
    let dom = space.domain;
    let (node_set, mut excluded): (Vec<usize>, usize) = match region {
        Region::Whole => ((0..dom.nodes()).collect(), 0),
        Region::Ball { center, radius } => {
            let df = crate::distance::distance_field(space, center)?;
            let nodes: Vec<usize> =
                (0..dom.nodes()).filter(|&k| df.r.data[k] < radius).collect();
            (nodes, 0)
        }
    };
    // Reference vectors per node (None = excluded).
    let reference_at: Vec<Option<Vec2>> = match reference {
        ReferenceTag::Velocity => vec![None; dom.nodes()],
        ReferenceTag::GradDistance { p } => {
            let df = crate::distance::distance_field(space, p)?;
            let grad = df.gradient(space);
            (0..dom.nodes())
                .map(|k| {
                    let ok = !df.nonsmooth[k]
                        && df.r.data[k] > 2.0 * dom.min_mesh()
                        && space.eval_f(dom.point_of(k), grad.data[k]) > space.eta;
                    if ok {
                        Some(grad.data[k])
                    } else {
                        None
                    }
                })
                .collect()
        }
    };
    // Subsample nodes to a bounded budget, deterministically by stride.
    let budget = 512usize;
    let stride = (node_set.len() / budget).max(1);
    let sampled: Vec<usize> = node_set.iter().copied().step_by(stride).collect();

    use rayon::prelude::*;
    let tau = 2.0 * std::f64::consts::PI;
    let results: Vec<Option<f64>> = sampled
        .par_iter()
        .map(|&k| {
            let x = dom.point_of(k);
            let w_ref = match reference {
                ReferenceTag::Velocity => None,
                ReferenceTag::GradDistance { .. } => match reference_at[k] {
                    Some(w) => Some(w),
                    None => return None,
                },
            };
            let mut worst = f64::INFINITY;
            for a in 0..angle_samples {
                let v = Vec2::from_angle(tau * a as f64 / angle_samples as f64);
                let val = match w_ref {
                    None => weighted_ricci(space, x, v, n_eff),
                    Some(w) => mixed_weighted_ricci(space, x, v, w, n_eff),
                };
                if let Ok(r) = val {
                    let f = space.eval_f(x, v);
                    worst = worst.min(r / (f * f));
                }
            }
            Some(worst)
        })
        .collect();

    let mut min_curv = f64::INFINITY;
    let mut used = 0usize;
    for r in &results {
        match r {
            Some(v) => {
                min_curv = min_curv.min(*v);
                used += 1;
            }
            None => excluded += 1,
        }
    }
    let k_lower = if min_curv.is_finite() { (-min_curv).max(0.0) } else { 0.0 };
    let a_upper = space.misalignment_over(node_set.iter().copied().step_by(stride), 64);
    Ok(BoundScan {
        region,
        n_eff,
        reference,
        k_lower,
        a_upper,
        node_samples: used,
        angle_samples,
        excluded_nodes: excluded,
    })
}

/// Full pointwise record for CSV emission.
pub fn curvature_sample(
    space: &Space,
    x: Vec2,
    v: Vec2,
    w: Vec2,
    n_eff: f64,
) -> Result<CurvatureSample> {
    let g = space.fundamental_tensor(x, v)?;
    // g_v-orthonormal complement of v for the flag section.
    let perp_raw = v.perp();
    let perp = perp_raw - v.scale(g.quad(perp_raw, v) / g.quad(v, v));
    let flag = flag_curvature(space, x, v, perp)?;
    let ric = ricci(space, x, v)?;
    let tau_v = distortion(space, x, v)?;
    let (s, sdot) = s_curvature(space, x, v)?;
    let ric_n = weighted_ricci(space, x, v, n_eff)?;
    let mixed = mixed_weighted_ricci(space, x, v, w, n_eff)?;
    Ok(CurvatureSample {
        x,
        v,
        flag,
        ricci: ric,
        distortion: tau_v,
        s_curv: s,
        s_dot: sdot,
        weighted_ricci: ric_n,
        mixed_weighted_ricci: mixed,
        misalignment: space.misalignment(x, 64),
    })
}

/// Closed-form Christoffel symbols of the conformal metric e^{2 lambda} delta;
/// the Riemannian reduction oracle for the Chern coefficients.
pub fn conformal_christoffel(space: &Space, x: Vec2) -> Option<[[[f64; 2]; 2]; 2]> {
    let lam = match &space.metric {
        crate::metric::MetricSpec::Conformal { lambda } => lambda,
        _ => return None,
    };
    let l1 = lam.deriv(&space.domain, x, 0);
    let l2 = lam.deriv(&space.domain, x, 1);
    let lam_d = [l1, l2];
    let mut gamma = [[[0.0f64; 2]; 2]; 2];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut v = 0.0;
                if k == i {
                    v += lam_d[j];
                }
                if k == j {
                    v += lam_d[i];
                }
                if i == j {
                    v -= lam_d[k];
                }
                gamma[k][i][j] = v;
            }
        }
    }
    Some(gamma)
}

/// Closed-form Gaussian curvature of the conformal metric: -e^{-2 lambda} (Laplacian lambda).
pub fn conformal_gauss_curvature(space: &Space, x: Vec2) -> Option<f64> {
    let lam = match &space.metric {
        crate::metric::MetricSpec::Conformal { lambda } => lambda,
        _ => return None,
    };
    let lap = lam.deriv2(&space.domain, x, 0) + lam.deriv2(&space.domain, x, 1);
    let l = lam.eval(&space.domain, x);
    Some(-(-2.0 * l).exp() * lap)
}
