//! Config-driven sweeps over (eps, seed).

use std::path::PathBuf;

use bmstab_core::num::{parse_q, Q};
use bmstab_core::stability::{check_main_theorem, StabilityReport};
use bmstab_core::Result;
use rayon::prelude::*;

use crate::scenario::{generate, Family, ScenarioSpec};

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: Family,
    pub n: usize,
    pub m: u64,
    pub t: Q,
    pub tau: Q,
    pub eps_list: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub n_exp: Option<f64>,
    pub l: i64,
}

fn parse_seeds(v: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range '{part}'"))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range '{part}'"))?;
            if b < a {
                return Err(format!("empty seed range '{part}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad seed '{part}'"))?);
        }
    }
    Ok(out)
}

impl SweepConfig {
    /// Parses `key=value` lines; `#` starts a comment. Seeds accept
    /// comma lists and inclusive ranges `a..b`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let (mut family, mut n, mut m, mut t, mut tau) = (None, None, None, None, None);
        let (mut eps_list, mut seeds, mut out, mut n_exp, mut l) = (None, None, None, None, 4i64);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| format!("line {}: bad {what} '{v}'", i + 1);
            match k {
                "family" => family = Some(v.parse::<Family>()?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| bad("n"))?),
                "m" => m = Some(v.parse::<u64>().map_err(|_| bad("m"))?),
                "t" => t = Some(parse_q(v).map_err(|_| bad("t"))?),
                "tau" => tau = Some(parse_q(v).map_err(|_| bad("tau"))?),
                "eps_list" => {
                    let xs: std::result::Result<Vec<f64>, _> =
                        v.split(',').map(|x| x.trim().parse::<f64>()).collect();
                    eps_list = Some(xs.map_err(|_| bad("eps_list"))?);
                }
                "seeds" => seeds = Some(parse_seeds(v)?),
                "out" => out = Some(PathBuf::from(v)),
                "n_exp" => n_exp = Some(v.parse::<f64>().map_err(|_| bad("n_exp"))?),
                "l" => l = v.parse::<i64>().map_err(|_| bad("l"))?,
                _ => return Err(format!("line {}: unknown key '{k}'", i + 1)),
            }
        }
        let need = |what: &str| format!("missing key '{what}'");
        let cfg = SweepConfig {
            family: family.ok_or_else(|| need("family"))?,
            n: n.ok_or_else(|| need("n"))?,
            m: m.ok_or_else(|| need("m"))?,
            t: t.ok_or_else(|| need("t"))?,
            tau: tau.ok_or_else(|| need("tau"))?,
            eps_list: eps_list.ok_or_else(|| need("eps_list"))?,
            seeds: seeds.ok_or_else(|| need("seeds"))?,
            out,
            n_exp,
            l,
        };
        if cfg.eps_list.is_empty() || cfg.seeds.is_empty() {
            return Err("eps_list and seeds must be non-empty".into());
        }
        if cfg.eps_list.iter().any(|e| !(0.0..1.0).contains(e)) {
            return Err("eps values must lie in [0, 1)".into());
        }
        Ok(cfg)
    }

    /// Specs in output order: sorted by eps, then seed.
    pub fn specs(&self) -> Vec<ScenarioSpec> {
        let mut eps = self.eps_list.clone();
        eps.sort_by(f64::total_cmp);
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        let mut out = Vec::new();
        for &e in &eps {
            for &s in &seeds {
                let mut spec = ScenarioSpec::new(self.family, self.n, self.m, e, s);
                spec.t = self.t.clone();
                spec.tau = self.tau.clone();
                spec.l = self.l;
                out.push(spec);
            }
        }
        out
    }
}

/// Row id used in sweep output.
pub fn row_id(spec: &ScenarioSpec) -> String {
    format!("{}-e{}-s{}", spec.family, spec.eps, spec.seed)
}

fn run_one(cfg: &SweepConfig, spec: &ScenarioSpec) -> Result<StabilityReport> {
    let (a, b) = generate(spec)?.lattice(spec.m)?;
    check_main_theorem(&row_id(spec), &a, &b, &spec.t, &spec.tau, cfg.n_exp)
}

/// Thread count from `BMSTAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("BMSTAB_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
}

/// Runs every item; results come back in config order.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<StabilityReport>> {
    let specs = cfg.specs();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| bmstab_core::Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| specs.par_iter().map(|s| run_one(cfg, s)).collect())
}

pub fn to_csv(rows: &[StabilityReport]) -> String {
    let mut s = String::from(StabilityReport::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors() {
        assert!(SweepConfig::parse("family=boundary-bites\n").is_err());
        assert!(SweepConfig::parse("bogus=1").is_err());
        let ok = "family=boundary-bites\nn=2\nm=8\nt=1/2\ntau=1/2\neps_list=0.1,0.05\nseeds=3..4\n";
        let c = SweepConfig::parse(ok).unwrap();
        let specs = c.specs();
        assert_eq!(specs.len(), 4);
        assert_eq!((specs[0].eps, specs[0].seed), (0.05, 3));
        assert_eq!((specs[3].eps, specs[3].seed), (0.1, 4));
    }
}
