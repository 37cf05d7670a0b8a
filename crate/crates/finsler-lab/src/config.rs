//! Run-configuration files: `[section]` headers, `key = value` lines, `#`
//! comments. Unknown keys are errors; every error carries the line number.

use crate::checks::CheckParams;
use crate::error::{Error, Result};
use crate::grid::TorusDomain;
use crate::metric::{FourierParam, MeasureSpec, MetricSpec, Space};
use crate::sampling::fnv1a;
use crate::solver::{InitialData, SolverConfig};
use crate::vec2::Vec2;
use std::collections::BTreeMap;

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub space: Space,
    pub solver: SolverConfig,
    pub u0: InitialData,
    pub checks: CheckParams,
    /// Bounds marked `auto` are measured by a bound scan before checking.
    pub k_auto: bool,
    pub a_auto: bool,
    pub k0_auto: bool,
    /// Gradient-exclusion threshold for the Bochner check (`auto`: eta for
    /// Riemannian families, 2% of the peak gradient otherwise).
    pub bochner_exclusion: Option<f64>,
    pub harnack_pairs: usize,
    pub logsobolev_iters: usize,
    pub out_dir: String,
    pub config_hash: u64,
}

struct Entry {
    line: usize,
    value: String,
    used: std::cell::Cell<bool>,
}

struct Sections {
    map: BTreeMap<String, BTreeMap<String, Entry>>,
    section_lines: BTreeMap<String, usize>,
}

impl Sections {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        let e = self.map.get(section)?.get(key)?;
        e.used.set(true);
        Some(e)
    }

    fn f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.trim().parse().map_err(|_| Error::Config {
                line: e.line,
                detail: format!("{section}.{key}: expected a number, got '{}'", e.value),
            }),
        }
    }

    fn usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.trim().parse().map_err(|_| Error::Config {
                line: e.line,
                detail: format!("{section}.{key}: expected an integer, got '{}'", e.value),
            }),
        }
    }

    fn string(&self, section: &str, key: &str, default: &str) -> String {
        match self.get(section, key) {
            None => default.to_string(),
            Some(e) => e.value.trim().to_string(),
        }
    }

    /// `auto` or a number.
    fn auto_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) if e.value.trim() == "auto" => Ok(None),
            Some(e) => e.value.trim().parse().map(Some).map_err(|_| Error::Config {
                line: e.line,
                detail: format!("{section}.{key}: expected 'auto' or a number"),
            }),
        }
    }

    fn numbers(&self, section: &str, key: &str) -> Result<Option<(usize, Vec<f64>)>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for tok in e.value.split_whitespace() {
                    out.push(tok.parse().map_err(|_| Error::Config {
                        line: e.line,
                        detail: format!("{section}.{key}: bad number '{tok}'"),
                    })?);
                }
                Ok(Some((e.line, out)))
            }
        }
    }

    fn fourier(&self, section: &str, key: &str, default: FourierParam) -> Result<FourierParam> {
        match self.numbers(section, key)? {
            None => Ok(default),
            Some((_line, v)) if v.len() == 4 => Ok(FourierParam::mode(
                v[0],
                v[1],
                v[2] as u32,
                v[3] as u32,
            )),
            Some((line, v)) if v.len() == 1 => {
                let _ = line;
                Ok(FourierParam::constant(v[0]))
            }
            Some((line, _)) => Err(Error::Config {
                line,
                detail: format!("{section}.{key}: expected 'c0' or 'c0 amp k1 k2'"),
            }),
        }
    }
}

fn parse_sections(text: &str) -> Result<Sections> {
    let mut map: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
    let mut section_lines = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config { line: line_no, detail: "unterminated section header".into() });
            }
            let name = line[1..line.len() - 1].trim().to_string();
            section_lines.insert(name.clone(), line_no);
            map.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let section = current.clone().ok_or(Error::Config {
            line: line_no,
            detail: "key outside any [section]".into(),
        })?;
        let (key, value) = line.split_once('=').ok_or(Error::Config {
            line: line_no,
            detail: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim().to_string();
        let entry = Entry { line: line_no, value: value.trim().to_string(), used: std::cell::Cell::new(false) };
        if map.get_mut(&section).unwrap().insert(key.clone(), entry).is_some() {
            return Err(Error::Config { line: line_no, detail: format!("duplicate key '{key}'") });
        }
    }
    Ok(Sections { map, section_lines })
}

const KNOWN_SECTIONS: [&str; 7] =
    ["domain", "metric", "measure", "space", "solver", "checks", "output"];

/// Parse and validate a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let sections = parse_sections(text)?;
    for (name, &line) in &sections.section_lines {
        if !KNOWN_SECTIONS.contains(&name.as_str()) {
            return Err(Error::Config { line, detail: format!("unknown section [{name}]") });
        }
    }

    let domain = TorusDomain::new(
        sections.f64("domain", "l1", 4.0)?,
        sections.f64("domain", "l2", 4.0)?,
        sections.usize("domain", "n1", 64)?,
        sections.usize("domain", "n2", 64)?,
    )?;

    let family = sections.string("metric", "family", "euclidean");
    let lambda = {
        let eps = sections.f64("metric", "epsilon", 0.0)?;
        let ks = sections.numbers("metric", "lambda_k")?.map(|(_, v)| v).unwrap_or(vec![1.0, 1.0]);
        FourierParam::mode(0.0, eps, ks[0] as u32, ks.get(1).copied().unwrap_or(1.0) as u32)
    };
    let metric = match family.as_str() {
        "euclidean" => MetricSpec::Euclidean,
        "conformal" => MetricSpec::Conformal { lambda },
        "randers" => MetricSpec::Randers {
            lambda,
            b1: sections.fourier("metric", "b1", FourierParam::ZERO)?,
            b2: sections.fourier("metric", "b2", FourierParam::ZERO)?,
        },
        other => {
            let line = sections.section_lines.get("metric").copied().unwrap_or(0);
            return Err(Error::Config {
                line,
                detail: format!("unknown metric family '{other}' (euclidean | conformal | randers)"),
            });
        }
    };
    let measure = MeasureSpec { phi: sections.fourier("measure", "phi", FourierParam::ZERO)? };
    let space = Space::with_policy(
        domain,
        metric,
        measure,
        sections.f64("space", "h_v", 1e-3)?,
        sections.f64("space", "h_x", 1e-3)?,
        sections.f64("space", "eta", 1e-10)?,
        sections.usize("space", "seed", 42)? as u64,
    )?;

    let t_end = sections.f64("solver", "t_end", 1.0)?;
    let snapshots = sections
        .numbers("solver", "snapshots")?
        .map(|(_, v)| v)
        .unwrap_or_else(|| vec![t_end]);
    let solver = SolverConfig {
        a: sections.f64("solver", "a", 0.0)?,
        b: sections.f64("solver", "b", 0.0)?,
        dt: sections.auto_f64("solver", "dt")?,
        t_end,
        cfl_sigma: sections.f64("solver", "cfl_sigma", 0.2)?,
        u_min: 1e-12,
        snapshot_times: snapshots,
    };

    let u0 = match sections.get("solver", "u0") {
        None => InitialData::Constant(2.0),
        Some(e) => parse_u0(&e.value, e.line)?,
    };

    let mut checks = CheckParams::new(solver.a, solver.b, sections.f64("checks", "beta", 1.5)?,
        sections.f64("checks", "n_eff", 4.0)?);
    checks.delta = sections.f64("checks", "delta", 0.9)?;
    let k_bound = sections.auto_f64("checks", "k_bound")?;
    let a_bound = sections.auto_f64("checks", "a_bound")?;
    let k0 = sections.auto_f64("checks", "k0")?;
    checks.k_curv = k_bound.unwrap_or(0.0);
    checks.a_mis = a_bound.unwrap_or(1.0);
    checks.k0 = k0.unwrap_or(0.0);
    checks.radius = sections.f64("checks", "radius", domain.l1.min(domain.l2) / 5.0)?;
    let center = sections
        .numbers("checks", "center")?
        .map(|(_, v)| Vec2::new(v[0], v.get(1).copied().unwrap_or(0.0)))
        .unwrap_or(Vec2::new(domain.l1 / 2.0, domain.l2 / 2.0));
    checks.center = center;
    checks.t_min = sections.f64("checks", "t_min", 0.05)?;
    checks.tol.liyau_rel = sections.f64("checks", "tol_liyau", 1e-2)?;
    checks.tol.harnack_log = sections.f64("checks", "tol_harnack", 1e-2)?;
    checks.tol.bochner = sections.f64("checks", "tol_bochner", 1e-3)?;
    checks.tol.comparison = sections.f64("checks", "tol_comparison", 5e-2)?;
    checks.tol.gap = sections.f64("checks", "tol_gap", 1e-3)?;
    checks.tol.stationary_res = sections.f64("checks", "tol_stationary", 1e-8)?;
    checks.tol.logsobolev_residual = sections.f64("checks", "tol_logsobolev", 1e-3)?;
    checks.validate()?;

    let bochner_exclusion = sections.auto_f64("checks", "bochner_exclusion")?;
    let harnack_pairs = sections.usize("checks", "harnack_pairs", 20)?;
    let logsobolev_iters = sections.usize("checks", "logsobolev_iters", 400)?;
    let out_dir = sections.string("output", "dir", "out");

    // Reject unknown keys, reporting the first by line number.
    let mut unknown: Vec<(usize, String, String)> = Vec::new();
    for (sec, keys) in &sections.map {
        for (key, entry) in keys {
            if !entry.used.get() {
                unknown.push((entry.line, sec.clone(), key.clone()));
            }
        }
    }
    unknown.sort();
    if let Some((line, sec, key)) = unknown.first() {
        return Err(Error::Config { line: *line, detail: format!("unknown key '{key}' in [{sec}]") });
    }

    Ok(RunConfig {
        space,
        solver,
        u0,
        checks,
        k_auto: k_bound.is_none(),
        a_auto: a_bound.is_none(),
        k0_auto: k0.is_none(),
        bochner_exclusion,
        harnack_pairs,
        logsobolev_iters,
        out_dir,
        config_hash: fnv1a(text.as_bytes()),
    })
}

fn parse_u0(value: &str, line: usize) -> Result<InitialData> {
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let bad = |detail: String| Error::Config { line, detail };
    let num = |tok: &str| -> Result<f64> {
        tok.parse().map_err(|_| bad(format!("u0: bad number '{tok}'")))
    };
    match tokens.first() {
        Some(&"constant") if tokens.len() == 2 => Ok(InitialData::Constant(num(tokens[1])?)),
        Some(&"gaussian") if tokens.len() == 6 => Ok(InitialData::Gaussian {
            base: num(tokens[1])?,
            height: num(tokens[2])?,
            width: num(tokens[3])?,
            center: Vec2::new(num(tokens[4])?, num(tokens[5])?),
        }),
        Some(&"fourier") if tokens.len() >= 2 && (tokens.len() - 2) % 3 == 0 => {
            let c0 = num(tokens[1])?;
            let mut modes = Vec::new();
            for chunk in tokens[2..].chunks(3) {
                modes.push((num(chunk[0])?, num(chunk[1])? as u32, num(chunk[2])? as u32));
            }
            Ok(InitialData::Fourier { c0, modes })
        }
        _ => Err(bad(format!(
            "u0: expected 'constant c' | 'gaussian base height width cx cy' | 'fourier c0 (amp k1 k2)...', got '{value}'"
        ))),
    }
}
