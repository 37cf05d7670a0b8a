//! File-driven experiment orchestration behind the CLI.
//!
//! Each subcommand reads a [`RunConfig`], produces its artifacts in the
//! output directory, prints one machine-readable verdict line per check to
//! stdout, and returns the process exit code: 0 all pass, 1 a check was
//! violated, 2 config or precondition error. Runs are deterministic: the same
//! config file yields byte-identical CSVs.

use crate::checks::{self, CheckParams, CheckReport, HarnackPair};
use crate::config::RunConfig;
use crate::curvature::{self, Region, ReferenceTag};
use crate::distance;
use crate::error::{Error, Result};

use crate::solver::{self, Trajectory};
use crate::vec2::Vec2;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subcommand {
    Curvature,
    Distance,
    Solve,
    CheckLiyau,
    CheckHarnack,
    CheckGap,
    CheckBochner,
    CheckComparison,
    LogSobolev,
    All,
}

impl Subcommand {
    pub fn parse(name: &str) -> Option<Subcommand> {
        Some(match name {
            "curvature" => Subcommand::Curvature,
            "distance" => Subcommand::Distance,
            "solve" => Subcommand::Solve,
            "check-liyau" => Subcommand::CheckLiyau,
            "check-harnack" => Subcommand::CheckHarnack,
            "check-gap" => Subcommand::CheckGap,
            "check-bochner" => Subcommand::CheckBochner,
            "check-comparison" => Subcommand::CheckComparison,
            "logsobolev" => Subcommand::LogSobolev,
            "all" => Subcommand::All,
            _ => return None,
        })
    }

    pub const ALL_NAMES: &'static str = "curvature | distance | solve | check-liyau | \
        check-harnack | check-gap | check-bochner | check-comparison | logsobolev | all";
}

/// Execution context carrying lazily computed shared state.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    trajectory: Option<Trajectory>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig, out_override: Option<&str>) -> Result<Self> {
        let out = PathBuf::from(out_override.unwrap_or(&cfg.out_dir));
        fs::create_dir_all(&out)?;
        Ok(Ctx { cfg, out, trajectory: None })
    }

    fn provenance(&self) -> String {
        format!(
            "# config_hash={:016x} seed={}",
            self.cfg.config_hash, self.cfg.space.seed
        )
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut f = fs::File::create(self.out.join(name))?;
        writeln!(f, "{}", self.provenance())?;
        writeln!(f, "{header}")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }

    fn trajectory(&mut self) -> Result<&Trajectory> {
        if self.trajectory.is_none() {
            let u0 = self.cfg.u0.build(self.cfg.space.domain);
            self.trajectory = Some(solver::solve(&self.cfg.space, &u0, &self.cfg.solver)?);
        }
        Ok(self.trajectory.as_ref().unwrap())
    }

    /// Check parameters with the `auto` bounds resolved for the compact
    /// (whole-torus, Ric^N) hypotheses.
    fn params_compact(&self) -> Result<CheckParams> {
        let mut p = self.cfg.checks.clone();
        if self.cfg.k_auto {
            let scan = curvature::bound_scan(
                &self.cfg.space,
                Region::Whole,
                p.n_eff,
                ReferenceTag::Velocity,
                16,
            )?;
            p.k_curv = scan.k_lower;
        }
        if self.cfg.a_auto {
            p.a_mis = 1.0; // the compact estimate does not use A
        }
        Ok(p)
    }

    /// Parameters for the local (ball) hypotheses: K(2R), A(2R) over B_p(2R)
    /// against grad r, and the measured tau-tensor proxy for K0.
    fn params_local(&mut self) -> Result<CheckParams> {
        let mut p = self.cfg.checks.clone();
        let region = Region::Ball { center: p.center, radius: 2.0 * p.radius };
        if self.cfg.k_auto || self.cfg.a_auto {
            let scan = curvature::bound_scan(
                &self.cfg.space,
                region,
                p.n_eff,
                ReferenceTag::GradDistance { p: p.center },
                16,
            )?;
            if self.cfg.k_auto {
                p.k_curv = scan.k_lower;
            }
            if self.cfg.a_auto {
                p.a_mis = scan.a_upper;
            }
        }
        if self.cfg.k0_auto {
            p.k0 = if self.cfg.space.metric.is_riemannian() {
                0.0
            } else {
                // Measured F*(T(grad r, grad u)) proxy plus 10% slack.
                let center = p.center;
                let df = distance::distance_field(&self.cfg.space, center)?;
                let grad_r = df.gradient(&self.cfg.space);
                let space = &self.cfg.space;
                let t_min = p.t_min;
                let traj = self.trajectory()?;
                let snap = traj
                    .snapshots
                    .iter()
                    .find(|s| s.t >= t_min)
                    .ok_or(Error::SnapshotMissing { t: t_min })?;
                let disc = solver::Discretization::new(space);
                let grad_u = disc.gradient_field(&snap.u);
                let field = curvature::tau_tensor_field(space, &grad_r, &grad_u);
                let max = field
                    .dual_norm
                    .iter()
                    .zip(&field.valid)
                    .filter(|(_, &ok)| ok)
                    .map(|(&v, _)| v)
                    .fold(0.0f64, f64::max);
                max * 1.1
            };
        }
        Ok(p)
    }
}

fn emit(report: &CheckReport, ctx: &Ctx) -> Result<bool> {
    println!("{}", report.verdict_line());
    let mut lines = vec![format!("# {}", report.params_echo)];
    for (k, v) in &report.details {
        lines.push(format!("# {k} = {v:.9e}"));
    }
    let rows: Vec<String> = lines.into_iter().chain(report.csv_rows.iter().cloned()).collect();
    let header = report.csv_header.clone().unwrap_or_else(|| "key,value".into());
    ctx.write_csv(&format!("{}.csv", report.name), &header, &rows)?;
    Ok(report.pass)
}

fn run_curvature(ctx: &mut Ctx) -> Result<bool> {
    let space = &ctx.cfg.space;
    let dom = space.domain;
    let n_eff = ctx.cfg.checks.n_eff;
    let stride = (dom.n1 / 16).max(1);
    let mut rows = Vec::new();
    let angles = 8;
    for j in (0..dom.n2).step_by(stride) {
        for i in (0..dom.n1).step_by(stride) {
            let x = dom.node_point(i, j);
            for a in 0..angles {
                let ang = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
                let v = Vec2::from_angle(ang);
                let w = Vec2::new(1.0, 0.0);
                let s = curvature::curvature_sample(space, x, v, w, n_eff)?;
                rows.push(format!(
                    "{:.6},{:.6},{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                    x.x,
                    x.y,
                    ang,
                    s.flag,
                    s.ricci,
                    s.s_curv,
                    s.s_dot,
                    s.weighted_ricci,
                    s.mixed_weighted_ricci,
                    s.distortion,
                    s.misalignment
                ));
            }
        }
    }
    ctx.write_csv(
        "curvature.csv",
        "x1,x2,v_angle,K_flag,Ric,S,Sdot,RicN,mRicN,tau,misalignment",
        &rows,
    )?;
    println!("curvature pass=true rows={}", rows.len());
    Ok(true)
}

fn run_distance(ctx: &mut Ctx) -> Result<bool> {
    let space = &ctx.cfg.space;
    let field = distance::distance_field(space, ctx.cfg.checks.center)?;
    let dom = space.domain;
    let rows: Vec<String> = (0..dom.nodes())
        .map(|k| {
            let p = dom.point_of(k);
            format!(
                "{:.6},{:.6},{:.9e},{}",
                p.x,
                p.y,
                field.r.data[k],
                field.nonsmooth[k] as u8
            )
        })
        .collect();
    ctx.write_csv("distance.csv", "x1,x2,r,nonsmooth", &rows)?;
    println!("distance pass=true nodes={}", rows.len());
    Ok(true)
}

fn run_solve(ctx: &mut Ctx) -> Result<bool> {
    let traj = ctx.trajectory()?;
    let snapshots: Vec<(String, Vec<String>)> = traj
        .snapshots
        .iter()
        .map(|snap| {
            let dom = snap.u.domain;
            let rows = (0..dom.nodes())
                .map(|k| {
                    let p = dom.point_of(k);
                    format!(
                        "{:.6},{:.6},{:.12e},{:.12e},{:.12e},{:.12e}",
                        p.x,
                        p.y,
                        snap.u.data[k],
                        snap.f.data[k],
                        snap.f2_grad_f.data[k],
                        snap.f_t.data[k]
                    )
                })
                .collect();
            (format!("snap_{:.6}.csv", snap.t), rows)
        })
        .collect();
    for (name, rows) in &snapshots {
        ctx.write_csv(name, "x1,x2,u,f,F2gradf,ft", rows)?;
    }
    println!("solve pass=true snapshots={}", snapshots.len());
    Ok(true)
}

fn run_liyau(ctx: &mut Ctx) -> Result<bool> {
    let compact_params = ctx.params_compact()?;
    let local_params = ctx.params_local()?;
    let traj = ctx.trajectory()?.clone();
    let compact = checks::liyau_compact_check(&traj, &compact_params)?;
    let cutoff = checks::cutoff_profile()?;
    let local = checks::liyau_local_check(&ctx.cfg.space, &traj, &local_params, &cutoff)?;
    let ok1 = emit(&compact, ctx)?;
    let ok2 = emit(&local, ctx)?;
    Ok(ok1 && ok2)
}

fn run_harnack(ctx: &mut Ctx) -> Result<bool> {
    let params = ctx.params_compact()?;
    let traj = ctx.trajectory()?.clone();
    let space = &ctx.cfg.space;
    let times: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| s.t)
        .filter(|&t| t >= params.t_min)
        .collect();
    if times.len() < 2 {
        return Err(Error::Config {
            line: 0,
            detail: "harnack check needs at least two snapshots at t >= t_min".into(),
        });
    }
    let mut rng = space.rng(0x48_41_52_4e);
    let dom = space.domain;
    let mut pairs = Vec::with_capacity(ctx.cfg.harnack_pairs);
    for _ in 0..ctx.cfg.harnack_pairs {
        let x1 = dom.point_of(rng.usize_below(dom.nodes()));
        let x2 = dom.point_of(rng.usize_below(dom.nodes()));
        let i = rng.usize_below(times.len() - 1);
        let j = i + 1 + rng.usize_below(times.len() - 1 - i);
        pairs.push(HarnackPair { x1, x2, t1: times[i], t2: times[j] });
    }
    let report = checks::harnack_check(space, &traj, &params, &pairs)?;
    emit(&report, ctx)
}

fn run_gap(ctx: &mut Ctx) -> Result<bool> {
    let params = ctx.params_compact()?;
    let space = &ctx.cfg.space;
    let u0 = ctx.cfg.u0.build(space.domain);
    match solver::solve_stationary(space, &u0, params.a, params.b, params.tol.stationary_res, 2_000_000)
    {
        Ok(u_stat) => {
            let report = checks::gap_check(space, &u_stat, &params)?;
            emit(&report, ctx)
        }
        // A stalled pseudo-time march is reported, not fatal.
        Err(Error::NoConvergence { residual, steps }) => {
            println!(
                "check-gap skipped=stationary-no-convergence residual={residual:.6e} steps={steps}"
            );
            ctx.write_csv(
                "check-gap.csv",
                "key,value",
                &[format!("no_convergence_residual,{residual:.9e}"), format!("steps,{steps}")],
            )?;
            Ok(true)
        }
        Err(e) => Err(e),
    }
}

fn run_bochner(ctx: &mut Ctx) -> Result<bool> {
    let params = ctx.params_compact()?;
    let space = &ctx.cfg.space;
    let dom = space.domain;
    let mut rng = space.rng(0x42_4f_43_48);
    let mut all_pass = true;
    let mut rows = Vec::new();
    for trial in 0..5 {
        let mut modes = Vec::new();
        for _ in 0..3 {
            modes.push((
                rng.range(0.2, 0.6),
                1 + rng.usize_below(2) as u32,
                rng.usize_below(3) as u32,
            ));
        }
        let u = solver::InitialData::Fourier { c0: 0.0, modes }.build(dom);
        let threshold = match ctx.cfg.bochner_exclusion {
            Some(t) => Some(t),
            None if space.metric.is_riemannian() => None,
            None => {
                let disc = solver::Discretization::new(space);
                let peak = disc.grad_norm2(&u).max().sqrt();
                Some(0.02 * peak)
            }
        };
        let report = checks::bochner_check(space, &u, params.n_eff, &params, threshold)?;
        all_pass &= report.pass;
        rows.push(format!(
            "{trial},{},{:.9e},{}",
            report.pass, report.margin, report.excluded
        ));
        println!("{} trial={} {}", report.name, trial, report.verdict_line());
    }
    ctx.write_csv("check-bochner.csv", "trial,pass,margin,excluded", &rows)?;
    Ok(all_pass)
}

fn run_comparison(ctx: &mut Ctx) -> Result<bool> {
    let params = ctx.params_local()?;
    let report = checks::comparison_check(&ctx.cfg.space, params.center, &params, None)?;
    emit(&report, ctx)
}

fn run_logsobolev(ctx: &mut Ctx) -> Result<bool> {
    let space = &ctx.cfg.space;
    let dom = space.domain;
    let f0 = match &ctx.cfg.u0 {
        solver::InitialData::Fourier { .. } => ctx.cfg.u0.build(dom),
        _ => solver::InitialData::Fourier { c0: 1.0, modes: vec![(0.5, 1, 0)] }.build(dom),
    };
    let report =
        checks::logsobolev::logsobolev_report(space, &f0, &ctx.cfg.checks, ctx.cfg.logsobolev_iters)?;
    emit(&report, ctx)
}

/// Execute a subcommand. Returns the process exit code.
pub fn run(cfg: &RunConfig, cmd: Subcommand, out_override: Option<&str>) -> i32 {
    match run_inner(cfg, cmd, out_override) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run_inner(cfg: &RunConfig, cmd: Subcommand, out_override: Option<&str>) -> Result<bool> {
    let mut ctx = Ctx::new(cfg, out_override)?;
    match cmd {
        Subcommand::Curvature => run_curvature(&mut ctx),
        Subcommand::Distance => run_distance(&mut ctx),
        Subcommand::Solve => run_solve(&mut ctx),
        Subcommand::CheckLiyau => run_liyau(&mut ctx),
        Subcommand::CheckHarnack => run_harnack(&mut ctx),
        Subcommand::CheckGap => run_gap(&mut ctx),
        Subcommand::CheckBochner => run_bochner(&mut ctx),
        Subcommand::CheckComparison => run_comparison(&mut ctx),
        Subcommand::LogSobolev => run_logsobolev(&mut ctx),
        Subcommand::All => {
            let mut pass = run_curvature(&mut ctx)?;
            pass &= run_distance(&mut ctx)?;
            pass &= run_solve(&mut ctx)?;
            pass &= run_liyau(&mut ctx)?;
            pass &= run_harnack(&mut ctx)?;
            pass &= run_gap(&mut ctx)?;
            pass &= run_bochner(&mut ctx)?;
            pass &= run_comparison(&mut ctx)?;
            pass &= run_logsobolev(&mut ctx)?;
            Ok(pass)
        }
    }
}

/// Read a config file and run; convenience for the binary and tests.
pub fn run_file(config_path: &Path, cmd: Subcommand, out_override: Option<&str>) -> i32 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let cfg = match crate::config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    run(&cfg, cmd, out_override)
}
