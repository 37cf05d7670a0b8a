//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by metric evaluation, geometry, the PDE solver and the
/// estimate checkers.
#[derive(Debug, Error)]
pub enum Error {
    /// A direction-dependent quantity was requested at (numerically) zero velocity.
    #[error("zero or sub-threshold vector where F(v) > eta is required (F = {f:.3e})")]
    ZeroVector { f: f64 },

    /// Metric specification violates strong convexity at some point.
    #[error("invalid metric spec: drift norm {norm:.6} >= {limit} at x = ({x1:.6}, {x2:.6})")]
    InvalidSpec { x1: f64, x2: f64, norm: f64, limit: f64 },

    /// An iterative one-dimensional maximizer failed to settle.
    #[error("angular Newton iteration did not converge after {iters} steps")]
    NonConvergence { iters: usize },

    /// Flag plane is degenerate (u, v nearly parallel).
    #[error("degenerate flag: Gram determinant {gram:.3e} below 1e-12")]
    DegenerateFlag { gram: f64 },

    /// Effective dimension outside (2, inf].
    #[error("effective dimension N = {n} must be finite > 2 or infinity")]
    BadN { n: f64 },

    /// Geodesic integration lost the first integral F(gamma, gamma_dot).
    #[error("geodesic speed drift {drift:.3e} exceeds 1e-4 (step too large or metric pathology)")]
    GeodesicFailure { drift: f64 },

    /// Requested forward ball does not fit in a fundamental domain.
    #[error("ball of radius {r:.4} wraps the torus (limit {limit:.4})")]
    BallWraps { r: f64, limit: f64 },

    /// Trajectory does not contain the requested snapshot time.
    #[error("no snapshot at t = {t:.6}")]
    SnapshotMissing { t: f64 },

    /// Gradient-estimate parameter beta must exceed 1.
    #[error("beta = {beta} out of range (must be > 1)")]
    BetaOutOfRange { beta: f64 },

    /// Harnack pair with a non-increasing time interval.
    #[error("bad time interval: t1 = {t1}, t2 = {t2} (need 0 < t1 < t2)")]
    BadInterval { t1: f64, t2: f64 },

    /// Gap-theorem hypothesis (feasibility of the quadratic in beta) fails.
    #[error("gap-theorem conditions infeasible: {detail}")]
    ConditionsInfeasible { detail: String },

    /// Cut-off profile violates its derivative constraints.
    #[error("cut-off profile invalid: {detail}")]
    ProfileInvalid { detail: String },

    /// Operation requires a strictly positive field.
    #[error("field not strictly positive (min = {min:.3e})")]
    NonPositive { min: f64 },

    /// Time stepping drove the solution below the positivity floor.
    #[error("positivity lost at t = {t:.6} (min u = {min:.3e})")]
    PositivityLost { t: f64, min: f64 },

    /// Requested time step violates the diffusive stability bound.
    #[error("dt = {dt:.3e} exceeds CFL bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    /// Pseudo-time marching stalled above the residual tolerance.
    #[error("stationary solve did not converge: residual {residual:.3e} after {steps} steps")]
    NoConvergence { residual: f64, steps: usize },

    /// The log-energy denominator vanished (|f| constant on the constraint set).
    #[error("log-energy denominator is zero (|f| = 1 on the constraint sphere)")]
    DenominatorZero,

    /// Run-configuration parse or validation failure.
    #[error("config error (line {line}): {detail}")]
    Config { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
