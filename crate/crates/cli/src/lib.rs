//! Command-line surface: scenario generation, checks, sweeps and plots.

pub mod plot;
pub mod scenario;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bmstab_core::convexity::{concavity_fit, GridFunction, LevelIndex, Polytope};
use bmstab_core::minkowski::{
    deficit, exhaustive_kemperman, kemperman_stability, DeficitRecord, IntervalSet,
};
use bmstab_core::num::{fmt_q, parse_q, to_f64, Q};
use bmstab_core::stability::{
    check_main_theorem, constants, contains_shifted, cos_pipeline, StabilityReport, Verdict,
};
use bmstab_core::symmetry::{describe, natural_with, schwarz_with, steiner, DEFAULT_REFINEMENT};
use bmstab_core::transport::slice_deficit;
use bmstab_core::LatticeSet;
use clap::{Parser, Subcommand, ValueEnum};

use crate::scenario::{generate, Family, Pair, ScenarioSpec};
use crate::sweep::{run_sweep, thread_cap, SweepConfig};

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: a check found a property violation.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status: bad usage or unreadable input.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "bmstab",
    version,
    about = "Exact lattice-set tools for Brunn-Minkowski stability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn q_arg(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SymKind {
    Natural,
    Steiner,
    Schwarz,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convex combination S = tA + (1-t)B and its deficits.
    Deficit {
        /// One or two `.vset` files; B defaults to A.
        #[arg(long = "in", required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = q_arg, default_value = "1/2")]
        t: Q,
        /// Writes S as `.vset`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Natural, Steiner or Schwarz symmetrization.
    Symmetrize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "natural")]
        kind: SymKind,
        /// Refinement factor for bracketed results.
        #[arg(long, default_value_t = DEFAULT_REFINEMENT)]
        refine: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slice densities, monotone transport and the slice inequality.
    Transport {
        #[arg(long = "in", required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = q_arg, default_value = "1/2")]
        t: Q,
        /// Writes the per-piece integrand as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated concave-envelope fit of a grid function.
    ConcavityFit {
        /// CSV with header `y1,value` or `y1,y2,value` (integer grid indices).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        denom: u64,
        #[arg(long, value_parser = q_arg, default_value = "1/2")]
        tau: Q,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        varsigma: f64,
        #[arg(long, value_parser = q_arg, default_value = "1/2")]
        t_prime: Q,
        /// Normalization; defaults to sup |psi| (or 1 if psi = 0).
        #[arg(long)]
        m_hat: Option<f64>,
        /// Writes the fitted grid function as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-dimensional stability check on `.iset` files, or the exhaustive sweep.
    Kemperman {
        #[arg(long = "in", num_args = 1)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        exhaustive: bool,
        /// Grid denominator of the exhaustive sweep.
        #[arg(long, default_value_t = 16)]
        denom: u64,
        /// Right end of the exhaustive range.
        #[arg(long, default_value_t = 4)]
        length: u64,
        #[arg(long, default_value_t = 3)]
        components: usize,
        /// Time budget in seconds for the exhaustive sweep.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Convex hulls, barycenter alignment and the common inflated body.
    CosPipeline {
        #[arg(long = "in", required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        /// `.vset` whose hull is K_A (defaults to A).
        #[arg(long)]
        ka: Option<PathBuf>,
        /// `.vset` whose hull is K_B (defaults to B).
        #[arg(long)]
        kb: Option<PathBuf>,
    },
    /// Deficit, optimal-translation hull distance and the stability bound.
    StabilityCheck {
        #[arg(long = "in", required = true, num_args = 1)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = q_arg, default_value = "1/2")]
        t: Q,
        #[arg(long, value_parser = q_arg)]
        tau: Option<Q>,
        #[arg(long)]
        n_exp: Option<f64>,
        #[arg(long, default_value = "input")]
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability constants for dimension n.
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = q_arg)]
        tau: Q,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generates a scenario pair.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        denom: u64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance parameter of the counterexample family.
        #[arg(long, default_value_t = 4)]
        l: i64,
        /// Output prefix; writes `<prefix>_a` and `<prefix>_b`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a sweep config and writes the report CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-log SVG of two CSV columns with a fitted slope.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "delta_norm")]
        x: String,
        #[arg(long, default_value = "D_star")]
        y: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input or usage failure; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome = Result<i32, UsageError>;

fn read(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), UsageError> {
    std::fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_vset(path: &Path) -> Result<LatticeSet, UsageError> {
    LatticeSet::parse_vset(&read(path)?).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn read_pair(inputs: &[PathBuf]) -> Result<(LatticeSet, LatticeSet), UsageError> {
    match inputs {
        [a] => {
            let a = read_vset(a)?;
            Ok((a.clone(), a))
        }
        [a, b] => Ok((read_vset(a)?, read_vset(b)?)),
        _ => Err(UsageError("expected one or two --in files".into())),
    }
}

pub fn deficit_text(rec: &DeficitRecord) -> String {
    format!(
        "n={}\nt={}\ntau={}\nvol_a={}\nvol_b={}\nvol_s={}\ndelta_norm={}\ndelta_raw_lo={:e}\ndelta_raw_hi={:e}\nsign={:?}\nbm_holds={}\n",
        rec.n,
        fmt_q(&rec.t),
        fmt_q(&rec.tau),
        fmt_q(&rec.vol_a),
        fmt_q(&rec.vol_b),
        fmt_q(&rec.vol_s),
        fmt_q(&rec.delta_norm),
        rec.delta_raw.lo,
        rec.delta_raw.hi,
        rec.sign,
        rec.bm_holds()
    )
}

fn cmd_deficit(inputs: &[PathBuf], t: &Q, out: &Option<PathBuf>) -> Outcome {
    let (a, b) = read_pair(inputs)?;
    let (rec, s) = deficit(&a, &b, t)?;
    print!("{}", deficit_text(&rec));
    if let Some(p) = out {
        write(p, &s.to_vset())?;
    }
    Ok(if rec.bm_holds() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_symmetrize(input: &Path, kind: SymKind, refine: u64, out: &Option<PathBuf>) -> Outcome {
    let e = read_vset(input)?;
    let body = match kind {
        SymKind::Natural => natural_with(&e, refine)?,
        SymKind::Steiner => steiner(&e)?,
        SymKind::Schwarz => schwarz_with(&e, refine)?,
    };
    match out {
        Some(p) => {
            write(p, &body.to_tagged())?;
            print!("{}", describe(&body));
        }
        None => print!("{}", body.to_tagged()),
    }
    let (lo, hi) = body.measure_bounds();
    let m = e.measure();
    Ok(if lo <= m && m <= hi {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_transport(inputs: &[PathBuf], t: &Q, out: &Option<PathBuf>) -> Outcome {
    let (a, b) = read_pair(inputs)?;
    let rep = slice_deficit(&a, &b, t)?;
    let monotone = rep.map.is_monotone();
    let ok = rep.holds() && rep.min_e() >= -1e-9 && rep.mu_identity_holds() && monotone;
    println!("n={}", rep.n);
    println!("t={}", fmt_q(&rep.t));
    println!("vol_s={}", fmt_q(&rep.vol_s));
    println!("integral_lo={:e}", rep.integral.lo);
    println!("integral_hi={:e}", rep.integral.hi);
    println!("deficit_lo={:e}", rep.deficit.lo);
    println!("deficit_hi={:e}", rep.deficit.hi);
    println!("quad_error={:e}", rep.quad_error);
    println!("min_e={:e}", rep.min_e());
    println!("change_of_variables={}", fmt_q(&rep.change_of_variables));
    println!("ratio_integral={}", fmt_q(&rep.ratio_integral));
    println!("map_monotone={monotone}");
    println!("mu_identity={}", rep.mu_identity_holds());
    println!("holds={}", rep.holds());
    if let Some(p) = out {
        write(p, &rep.e_profile_csv())?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

#[allow(clippy::too_many_arguments)]
fn cmd_concavity_fit(
    input: &Path,
    denom: u64,
    tau: &Q,
    sigma: f64,
    varsigma: f64,
    t_prime: &Q,
    m_hat: Option<f64>,
    out: &Option<PathBuf>,
) -> Outcome {
    let psi = GridFunction::from_csv(&read(input)?, denom)?;
    let m_hat = m_hat.unwrap_or_else(|| {
        let s = psi.sup_abs();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    });
    let fit = concavity_fit(
        &psi,
        m_hat,
        sigma,
        varsigma,
        to_f64(tau),
        t_prime,
        &LevelIndex::default(),
    )?;
    print!("{}", fit.report());
    if let Some(p) = out {
        let g = GridFunction::new(
            psi.base_dim,
            psi.denom,
            fit.omega.clone(),
            fit.psi_fit.clone(),
        )?;
        write(p, &g.to_csv())?;
    }
    Ok(EXIT_OK)
}

fn cmd_kemperman(
    inputs: &[PathBuf],
    exhaustive: bool,
    denom: u64,
    length: u64,
    comps: usize,
    budget: Option<u64>,
) -> Outcome {
    if exhaustive {
        let max = i32::try_from(denom * length).map_err(|_| UsageError("grid too large".into()))?;
        let rep = exhaustive_kemperman(max, comps, budget.map(Duration::from_secs));
        println!("sets={}", rep.sets);
        println!("total_pairs={}", rep.total_pairs);
        println!("checked_pairs={}", rep.checked_pairs);
        println!("applicable={}", rep.applicable);
        println!("failures={}", rep.failures.len());
        println!("elapsed_s={:.3}", rep.elapsed.as_secs_f64());
        println!(
            "projected_total_s={:.0}",
            rep.projected_total().as_secs_f64()
        );
        println!("complete={}", rep.complete);
        return Ok(if rep.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        });
    }
    let parse = |p: &PathBuf| {
        IntervalSet::parse_iset(&read(p)?).map_err(|e| UsageError(format!("{}: {e}", p.display())))
    };
    let (a, b) = match inputs {
        [a] => {
            let a = parse(a)?;
            (a.clone(), a)
        }
        [a, b] => (parse(a)?, parse(b)?),
        _ => {
            return Err(UsageError(
                "expected one or two --in files, or --exhaustive".into(),
            ))
        }
    };
    let v = kemperman_stability(&a, &b)?;
    println!("applicable={}", v.applicable);
    println!("delta={}", fmt_q(&v.delta));
    println!("hull_a={} {}", fmt_q(&v.hull_a.0), fmt_q(&v.hull_a.1));
    println!("hull_b={} {}", fmt_q(&v.hull_b.0), fmt_q(&v.hull_b.1));
    println!("excess_a={}", fmt_q(&v.excess_a));
    println!("excess_b={}", fmt_q(&v.excess_b));
    println!("pass={}", v.pass);
    Ok(if v.pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn fmt_point(p: &[Q; 3], dim: usize) -> String {
    p[..dim].iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

fn cmd_cos(inputs: &[PathBuf], ka: &Option<PathBuf>, kb: &Option<PathBuf>) -> Outcome {
    let (a, b) = read_pair(inputs)?;
    let hull = |p: &Option<PathBuf>, e: &LatticeSet| -> Result<Polytope, UsageError> {
        Ok(match p {
            Some(p) => Polytope::hull_of(&read_vset(p)?)?,
            None => Polytope::hull_of(e)?,
        })
    };
    let (ka, kb) = (hull(ka, &a)?, hull(kb, &b)?);
    let rep = cos_pipeline(&a, &b, &ka, &kb)?;
    let dim = a.dim();
    let ok =
        contains_shifted(&rep.k, &a, &rep.shift_a) && contains_shifted(&rep.k, &b, &rep.shift_b);
    let mut s = String::new();
    let _ = writeln!(s, "zeta={}", fmt_q(&rep.zeta));
    let _ = writeln!(s, "shift_a={}", fmt_point(&rep.shift_a, dim));
    let _ = writeln!(s, "shift_b={}", fmt_point(&rep.shift_b, dim));
    let _ = writeln!(s, "vol_k0={}", fmt_q(rep.k0.volume()));
    let _ = writeln!(s, "vol_k={}", fmt_q(rep.k.volume()));
    let _ = writeln!(s, "scale={}", fmt_q(&rep.scale));
    let _ = writeln!(s, "c={}", fmt_q(&rep.c));
    let _ = writeln!(s, "sym_diff={}", fmt_q(&rep.sym_diff));
    let _ = writeln!(s, "sym_diff_ratio={:e}", rep.sym_diff_ratio);
    let _ = writeln!(s, "excess_a={}", fmt_q(&rep.excess_a));
    let _ = writeln!(s, "excess_b={}", fmt_q(&rep.excess_b));
    let _ = writeln!(s, "contains={ok}");
    print!("{s}");
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_stability(
    inputs: &[PathBuf],
    t: &Q,
    tau: &Option<Q>,
    n_exp: Option<f64>,
    id: &str,
    out: &Option<PathBuf>,
) -> Outcome {
    let (a, b) = read_pair(inputs)?;
    let tau = tau
        .clone()
        .unwrap_or_else(|| bmstab_core::minkowski::tau_of(t));
    let rep = check_main_theorem(id, &a, &b, t, &tau, n_exp)?;
    emit(
        out,
        &format!("{}\n{}\n", StabilityReport::CSV_HEADER, rep.csv_row()),
    )?;
    Ok(if rep.verdict == Verdict::Fail {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn cmd_constants(n: usize, tau: &Q, out: &Option<PathBuf>) -> Outcome {
    let c = constants(n, tau)?;
    emit(out, &c.to_text())?;
    Ok(if c.eps_bound_holds() && c.m_bound_holds() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn with_suffix(prefix: &Path, tail: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(tail);
    PathBuf::from(s)
}

fn cmd_generate(spec: &ScenarioSpec, out: &Path) -> Outcome {
    let pair = generate(spec)?;
    let (pa, pb, ta, tb) = match &pair {
        Pair::Lattice(a, b) => (
            with_suffix(out, "_a.vset"),
            with_suffix(out, "_b.vset"),
            a.to_vset(),
            b.to_vset(),
        ),
        Pair::Intervals(a, b) => (
            with_suffix(out, "_a.iset"),
            with_suffix(out, "_b.iset"),
            a.to_iset(),
            b.to_iset(),
        ),
    };
    write(&pa, &ta)?;
    write(&pb, &tb)?;
    println!("{}", spec.describe());
    println!("{}", pa.display());
    println!("{}", pb.display());
    Ok(EXIT_OK)
}

fn cmd_sweep(config: &Path, out: &Option<PathBuf>) -> Outcome {
    let cfg = SweepConfig::parse(&read(config)?)
        .map_err(|e| UsageError(format!("{}: {e}", config.display())))?;
    let rows = run_sweep(&cfg, thread_cap())?;
    let csv = sweep::to_csv(&rows);
    let target = out.clone().or_else(|| cfg.out.clone());
    emit(&target, &csv)?;
    let fails = rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
    eprintln!("rows={} fail={fails}", rows.len());
    Ok(if fails == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_plot(input: &Path, x: &str, y: &str, out: &Path) -> Outcome {
    let p = plot::plot(&read(input)?, x, y)?;
    write(out, &p.svg)?;
    println!("points={}", p.points);
    println!("slope={}", p.slope);
    println!("intercept={}", p.intercept);
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns its exit status.
pub fn execute(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Deficit { inputs, t, out } => cmd_deficit(&inputs, &t, &out),
        Command::Symmetrize {
            input,
            kind,
            refine,
            out,
        } => cmd_symmetrize(&input, kind, refine, &out),
        Command::Transport { inputs, t, out } => cmd_transport(&inputs, &t, &out),
        Command::ConcavityFit {
            input,
            denom,
            tau,
            sigma,
            varsigma,
            t_prime,
            m_hat,
            out,
        } => cmd_concavity_fit(&input, denom, &tau, sigma, varsigma, &t_prime, m_hat, &out),
        Command::Kemperman {
            inputs,
            exhaustive,
            denom,
            length,
            components,
            budget,
        } => cmd_kemperman(&inputs, exhaustive, denom, length, components, budget),
        Command::CosPipeline { inputs, ka, kb } => cmd_cos(&inputs, &ka, &kb),
        Command::StabilityCheck {
            inputs,
            t,
            tau,
            n_exp,
            id,
            out,
        } => cmd_stability(&inputs, &t, &tau, n_exp, &id, &out),
        Command::Constants { n, tau, out } => cmd_constants(n, &tau, &out),
        Command::Generate {
            family,
            n,
            denom,
            eps,
            seed,
            l,
            out,
        } => {
            let mut spec = ScenarioSpec::new(family, n, denom, eps, seed);
            spec.l = l;
            cmd_generate(&spec, &out)
        }
        Command::Sweep { config, out } => cmd_sweep(&config, &out),
        Command::Plot { input, x, y, out } => cmd_plot(&input, &x, &y, &out),
    };
    match res {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Parses arguments and runs; help and version exit 0, parse errors 2.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
