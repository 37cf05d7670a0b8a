//! Verification of the gradient-estimate machinery on solver output.
//!
//! One submodule per estimate family; each checker consumes a trajectory or
//! field, evaluates the inequality pointwise, and returns a [`CheckReport`]
//! with the worst signed margin (LHS - RHS, positive = violation), the
//! location of the worst point, and the number of excluded nodes.

pub mod bochner;
pub mod comparison;
pub mod cutoff;
pub mod gap;
pub mod harnack;
pub mod liyau;
pub mod logsobolev;

pub use bochner::bochner_check;
pub use comparison::comparison_check;
pub use cutoff::{cutoff_profile, CutoffProfile};
pub use gap::{beta0_roots, gap_check, gap_feasibility};
pub use harnack::{harnack_check, harnack_theta, harnack_theta_local, HarnackPair};
pub use liyau::{h_field, j_field, liyau_compact_check, liyau_local_check, rhs_compact, rhs_local};
pub use logsobolev::{cfls_search, euler_lagrange_residual, logsobolev_energy};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Parameters shared by the estimate checks.
#[derive(Debug, Clone)]
pub struct CheckParams {
    /// Estimate sharpening parameter, strictly > 1.
    pub beta: f64,
    /// Localization parameter in (0, 1).
    pub delta: f64,
    /// Effective dimension N in (2, inf).
    pub n_eff: f64,
    /// Curvature lower-bound constant K >= 0 (Ric >= -K F^2).
    pub k_curv: f64,
    /// Misalignment upper bound A >= 1.
    pub a_mis: f64,
    /// Norm bound on the non-Riemannian tensors entering the comparison theorem.
    pub k0: f64,
    /// Ball radius for the local estimates.
    pub radius: f64,
    /// Ball center.
    pub center: Vec2,
    /// Equation coefficients.
    pub a: f64,
    pub b: f64,
    /// Snapshots earlier than this are skipped (1/t blow-up region).
    pub t_min: f64,
    pub tol: Tolerances,
}

/// Check tolerances, pinned to the scheme accuracy.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Li-Yau checks: pointwise slack as a fraction of the RHS.
    pub liyau_rel: f64,
    /// Harnack: slack on the log-margin.
    pub harnack_log: f64,
    /// Bochner: residual floor as a fraction of the local term scale.
    pub bochner: f64,
    /// Laplacian comparison: absolute slack on the margin.
    pub comparison: f64,
    /// Gap theorems: slack on the min/max bound.
    pub gap: f64,
    /// Stationary solve target residual (relative to ||u||).
    pub stationary_res: f64,
    /// Log-Sobolev Euler-Lagrange sup-residual target.
    pub logsobolev_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            liyau_rel: 1e-2,
            harnack_log: 1e-2,
            bochner: 1e-3,
            comparison: 5e-2,
            gap: 1e-3,
            stationary_res: 1e-8,
            logsobolev_residual: 1e-3,
        }
    }
}

impl CheckParams {
    pub fn new(a: f64, b: f64, beta: f64, n_eff: f64) -> Self {
        CheckParams {
            beta,
            delta: 0.9,
            n_eff,
            k_curv: 0.0,
            a_mis: 1.0,
            k0: 0.0,
            radius: 1.0,
            center: Vec2::ZERO,
            a,
            b,
            t_min: 0.05,
            tol: Tolerances::default(),
        }
    }

    /// alpha = max{a/2, -a/4} from the equation coefficient.
    pub fn alpha(&self) -> f64 {
        (self.a / 2.0).max(-self.a / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0) {
            return Err(Error::BetaOutOfRange { beta: self.beta });
        }
        if self.n_eff.is_nan() || self.n_eff <= 2.0 {
            return Err(Error::BadN { n: self.n_eff });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config {
                line: 0,
                detail: format!("delta = {} must lie in (0, 1)", self.delta),
            });
        }
        if self.k_curv < 0.0 || self.a_mis < 1.0 || self.k0 < 0.0 {
            return Err(Error::Config {
                line: 0,
                detail: "bounds must satisfy K >= 0, A >= 1, K0 >= 0".into(),
            });
        }
        if !(self.t_min > 0.0) {
            return Err(Error::Config { line: 0, detail: "t_min must be positive".into() });
        }
        Ok(())
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// Worst signed violation; interpretation is per check (see each module).
    pub margin: f64,
    /// Location of the worst point, when applicable.
    pub argmax_x: Option<Vec2>,
    pub argmax_t: Option<f64>,
    /// Nodes excluded from the maxima (degenerate gradient, cut locus, ...).
    pub excluded: usize,
    /// Human-readable parameter echo.
    pub params_echo: String,
    /// Named auxiliary values for the report file.
    pub details: Vec<(String, f64)>,
    /// Per-point CSV payload (header + rows), when the check produces one.
    pub csv_header: Option<String>,
    pub csv_rows: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, pass: bool, margin: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            pass,
            margin,
            argmax_x: None,
            argmax_t: None,
            excluded: 0,
            params_echo: String::new(),
            details: Vec::new(),
            csv_header: None,
            csv_rows: Vec::new(),
        }
    }

    /// One-line machine-readable verdict.
    pub fn verdict_line(&self) -> String {
        let (x1, x2) = match self.argmax_x {
            Some(p) => (p.x, p.y),
            None => (f64::NAN, f64::NAN),
        };
        format!(
            "{} pass={} margin={:.6e} argmax=({:.6},{:.6},{:.6}) excluded={}",
            self.name,
            self.pass,
            self.margin,
            x1,
            x2,
            self.argmax_t.unwrap_or(f64::NAN),
            self.excluded
        )
    }
}
