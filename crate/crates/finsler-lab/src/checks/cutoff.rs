//! Radial cut-off profile for the local estimates.
//!
//! phi(d) = 1 on [0, 1], cos^2(pi (d - 1) / 2) on [1, 2], 0 beyond, which
//! gives the derivative constants c1 = pi (bound on -phi'/sqrt(phi)) and
//! c2 = pi^2 / 2 (bound on -phi'').

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CutoffProfile {
    pub c1: f64,
    pub c2: f64,
    /// Tabulated (d, phi, phi', phi'') rows on [0, 2].
    pub table: Vec<(f64, f64, f64, f64)>,
}

pub fn phi(d: f64) -> f64 {
    if d <= 1.0 {
        1.0
    } else if d >= 2.0 {
        0.0
    } else {
        let c = (std::f64::consts::FRAC_PI_2 * (d - 1.0)).cos();
        c * c
    }
}

pub fn phi_prime(d: f64) -> f64 {
    if !(1.0..2.0).contains(&d) {
        0.0
    } else {
        -std::f64::consts::FRAC_PI_2 * (std::f64::consts::PI * (d - 1.0)).sin()
    }
}

pub fn phi_second(d: f64) -> f64 {
    if !(1.0..2.0).contains(&d) {
        0.0
    } else {
        -(std::f64::consts::PI * std::f64::consts::FRAC_PI_2)
            * (std::f64::consts::PI * (d - 1.0)).cos()
    }
}

/// Build and verify the profile on a 10^4-point grid.
pub fn cutoff_profile() -> Result<CutoffProfile> {
    let c1 = std::f64::consts::PI;
    let c2 = std::f64::consts::PI * std::f64::consts::PI / 2.0;
    let n = 10_000;
    let mut table = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let d = 2.0 * k as f64 / n as f64;
        let (p, dp, ddp) = (phi(d), phi_prime(d), phi_second(d));
        if !(0.0..=1.0 + 1e-12).contains(&p) {
            return Err(Error::ProfileInvalid { detail: format!("phi({d}) = {p} out of [0,1]") });
        }
        if p > 0.0 {
            let ratio = dp / p.sqrt();
            if ratio > 1e-12 || ratio < -c1 - 1e-9 {
                return Err(Error::ProfileInvalid {
                    detail: format!("phi'/sqrt(phi) = {ratio} at d = {d} outside [-c1, 0]"),
                });
            }
        }
        if ddp < -c2 - 1e-9 {
            return Err(Error::ProfileInvalid {
                detail: format!("phi'' = {ddp} at d = {d} below -c2"),
            });
        }
        table.push((d, p, dp, ddp));
    }
    Ok(CutoffProfile { c1, c2, table })
}
