//! Stability pipelines: the constants of the inductive bound, the
//! common-convex-set construction from nearby convex sets, the
//! translation-optimized hull distance and the main-theorem verdict.

use std::collections::HashMap;
use std::fmt::Write as _;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::convexity::{hull2, hull3, orient2, volume6, Polytope};
use crate::error::{Error, Result};
use crate::minkowski::{deficit, DeficitRecord};
use crate::num::{fmt_q, from_f64, qi, to_f64, Q};
use crate::vset::{translated_overlap, LatticeSet};

/// Working precision of the constants table, in bits.
pub const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

struct Hp {
    cc: Consts,
}

impl Hp {
    fn new() -> Self {
        Hp {
            cc: Consts::new().expect("astro-float constants"),
        }
    }

    fn int(&mut self, x: &BigInt) -> BigFloat {
        BigFloat::parse(&x.to_string(), Radix::Dec, PRECISION, RM, &mut self.cc)
    }

    fn q(&mut self, x: &Q) -> BigFloat {
        let n = self.int(x.numer());
        let d = self.int(x.denom());
        n.div(&d, PRECISION, RM)
    }

    fn u(&mut self, x: u64) -> BigFloat {
        self.int(&BigInt::from(x))
    }

    fn abs_ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PRECISION, RM, &mut self.cc).abs()
    }
}

/// Lossy conversion (underflow to 0, overflow to infinity).
pub fn big_to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

/// Seven significant digits in scientific notation, any exponent.
pub fn big_short(x: &BigFloat) -> String {
    let s = x.to_string();
    match s.split_once('e') {
        Some((m, e)) => {
            let keep: String = m.chars().take(if m.starts_with('-') { 9 } else { 8 }).collect();
            let e = e.trim_start_matches('+');
            format!("{keep}e{e}")
        }
        None => s,
    }
}

/// Constants of the inductive bound at one `(n, τ)`.
#[derive(Clone, Debug)]
pub struct ConstantsTable {
    pub n: usize,
    pub tau: Q,
    /// `τ / (16 (n-1) |log τ|)`; absent for `n = 1`.
    pub beta: Option<BigFloat>,
    /// `β / (8n)`.
    pub alpha_bar: Option<BigFloat>,
    /// `ᾱ / n²`.
    pub eta: Option<BigFloat>,
    /// `(ε_{n-1}(τ)/3) η`.
    pub zeta: Option<BigFloat>,
    pub eps: BigFloat,
    pub m: BigFloat,
    /// `τ^{3ⁿ} / (2^{3ⁿ⁺¹} n^{3ⁿ} |log τ|^{3ⁿ})`.
    pub eps_lower: BigFloat,
    /// `2^{3ⁿ⁺²} n^{3ⁿ} |log τ|^{3ⁿ} / τ^{3ⁿ}`.
    pub m_upper: BigFloat,
}

impl ConstantsTable {
    pub fn eps_bound_holds(&self) -> bool {
        self.eps >= self.eps_lower
    }

    pub fn m_bound_holds(&self) -> bool {
        self.m <= self.m_upper
    }

    pub fn eps_f64(&self) -> f64 {
        big_to_f64(&self.eps)
    }

    pub fn m_f64(&self) -> f64 {
        big_to_f64(&self.m)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "tau={}", fmt_q(&self.tau));
        let _ = writeln!(s, "precision_bits={PRECISION}");
        let opt = |x: &Option<BigFloat>| x.as_ref().map(big_short).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "beta={}", opt(&self.beta));
        let _ = writeln!(s, "alpha_bar={}", opt(&self.alpha_bar));
        let _ = writeln!(s, "eta={}", opt(&self.eta));
        let _ = writeln!(s, "zeta={}", opt(&self.zeta));
        let _ = writeln!(s, "eps={}", big_short(&self.eps));
        let _ = writeln!(s, "M={}", big_short(&self.m));
        let _ = writeln!(s, "eps_closed_lower={}", big_short(&self.eps_lower));
        let _ = writeln!(s, "M_closed_upper={}", big_short(&self.m_upper));
        let _ = writeln!(s, "eps_bound_holds={}", self.eps_bound_holds());
        let _ = writeln!(s, "M_bound_holds={}", self.m_bound_holds());
        s
    }
}

struct Recurrence {
    hp: Hp,
    memo: HashMap<(usize, Q), (BigFloat, BigFloat)>,
}

impl Recurrence {
    fn beta(&mut self, n: usize, tau: &Q) -> BigFloat {
        let t = self.hp.q(tau);
        let l = self.hp.abs_ln(&t);
        let den = self.hp.u(16 * (n as u64 - 1)).mul(&l, PRECISION, RM);
        t.div(&den, PRECISION, RM)
    }

    /// `(β, ᾱ, η, ζ)` at `(n, τ)`, `n >= 2`.
    fn chain(&mut self, n: usize, tau: &Q) -> [BigFloat; 4] {
        let beta = self.beta(n, tau);
        let nn = n as u64;
        let alpha = beta.div(&self.hp.u(8 * nn), PRECISION, RM);
        let eta = alpha.div(&self.hp.u(nn * nn), PRECISION, RM);
        let (e_prev, _) = self.get(n - 1, tau);
        let zeta = e_prev.div(&self.hp.u(3), PRECISION, RM).mul(&eta, PRECISION, RM);
        [beta, alpha, eta, zeta]
    }

    fn get(&mut self, n: usize, tau: &Q) -> (BigFloat, BigFloat) {
        if let Some(v) = self.memo.get(&(n, tau.clone())) {
            return v.clone();
        }
        let v = if n == 1 {
            let t3 = tau / qi(3);
            let t = self.hp.q(&t3);
            (self.hp.u(1), self.hp.abs_ln(&t))
        } else {
            let [beta, _, _, zeta] = self.chain(n, tau);
            let half = tau / qi(2);
            let (e_half, m_half) = self.get(n - 1, &half);
            let nn = n as u64;
            let eps = zeta
                .mul(&beta, PRECISION, RM)
                .div(&self.hp.u(8 * nn * nn), PRECISION, RM)
                .mul(&e_half, PRECISION, RM);
            let m = self.hp.u(4).div(&zeta, PRECISION, RM).mul(&m_half, PRECISION, RM);
            (eps, m)
        };
        self.memo.insert((n, tau.clone()), v.clone());
        v
    }
}

/// Builds the table for `n >= 1`, `0 < τ <= 1/2`.
pub fn constants(n: usize, tau: &Q) -> Result<ConstantsTable> {
    if n == 0 {
        return Err(Error::BadDimension(n));
    }
    if !tau.is_positive() || *tau > Q::new(1.into(), 2.into()) {
        return Err(Error::BadTau(fmt_q(tau)));
    }
    let mut r = Recurrence {
        hp: Hp::new(),
        memo: HashMap::new(),
    };
    let (eps, m) = r.get(n, tau);
    let (beta, alpha_bar, eta, zeta) = if n >= 2 {
        let [b, a, e, z] = r.chain(n, tau);
        (Some(b), Some(a), Some(e), Some(z))
    } else {
        (None, None, None, None)
    };
    let hp = &mut r.hp;
    let k = 3usize.pow(n as u32);
    let t = hp.q(tau);
    let l = hp.abs_ln(&t);
    let two = hp.u(2);
    let nb = hp.u(n as u64);
    let tk = t.powi(k, PRECISION, RM);
    let nk = nb.powi(k, PRECISION, RM);
    let lk = l.powi(k, PRECISION, RM);
    let core = nk.mul(&lk, PRECISION, RM);
    let eps_lower = tk.div(&two.powi(3 * k, PRECISION, RM).mul(&core, PRECISION, RM), PRECISION, RM);
    let m_upper = two.powi(9 * k, PRECISION, RM).mul(&core, PRECISION, RM).div(&tk, PRECISION, RM);
    Ok(ConstantsTable {
        n,
        tau: tau.clone(),
        beta,
        alpha_bar,
        eta,
        zeta,
        eps,
        m,
        eps_lower,
        m_upper,
    })
}

/// Outcome of the common-convex-set construction.
#[derive(Clone, Debug)]
pub struct CosReport {
    /// `|A Δ K_A| + |B Δ K_B|`.
    pub zeta: Q,
    /// Translations applied to `(A, K_A)` and `(B, K_B)`.
    pub shift_a: [Q; 3],
    pub shift_b: [Q; 3],
    pub k_a: Polytope,
    pub k_b: Polytope,
    /// `co(K_A ∪ K_B)` after alignment.
    pub k0: Polytope,
    /// Final `𝒦 = (1 + c ζ^{1/(2n³)}) 𝒦₀`.
    pub k: Polytope,
    pub scale: Q,
    /// First sufficient `c` (a power of two; 0 when no inflation was needed).
    pub c: Q,
    /// `|A Δ B|` after alignment.
    pub sym_diff: Q,
    /// `|A Δ B| / ζ^{1/(2n)}`.
    pub sym_diff_ratio: f64,
    /// `|𝒦 ∖ A|` and `|𝒦 ∖ B|`.
    pub excess_a: Q,
    pub excess_b: Q,
}

fn cell_points(e: &LatticeSet, shift: &[Q; 3]) -> Vec<[Q; 3]> {
    let m = BigInt::from(e.denom());
    e.hull_candidates()
        .iter()
        .map(|c| {
            let mut p = c.map(|x| Q::new(BigInt::from(x), m.clone()));
            for i in 0..3 {
                p[i] += &shift[i];
            }
            p
        })
        .collect()
}

/// `E + shift ⊆ K`, decided on the extreme cell corners.
pub fn contains_shifted(k: &Polytope, e: &LatticeSet, shift: &[Q; 3]) -> bool {
    cell_points(e, shift).iter().all(|p| k.contains(p))
}

fn neg3(v: &[Q; 3]) -> [Q; 3] {
    [-&v[0], -&v[1], -&v[2]]
}

/// Aligns `K_A`, `K_B` at a common barycenter (the origin), forms
/// `𝒦₀ = co(K_A ∪ K_B)` and inflates it by `1 + c ζ^{1/(2n³)}`, doubling `c`
/// from 1 until `A ∪ B ⊆ 𝒦`.
pub fn cos_pipeline(a: &LatticeSet, b: &LatticeSet, k_a: &Polytope, k_b: &Polytope) -> Result<CosReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = a.dim();
    if b.dim() != n || k_a.dim != n || k_b.dim != n {
        return Err(Error::DimensionMismatch(n, b.dim()));
    }
    if k_a.is_degenerate() || k_b.is_degenerate() {
        return Err(Error::DegenerateDomain);
    }
    let zeta = k_a.symmetric_difference_measure(a) + k_b.symmetric_difference_measure(b);
    let shift_a = neg3(&k_a.barycenter());
    let shift_b = neg3(&k_b.barycenter());
    let ka = k_a.affine(&Q::one(), &shift_a);
    let kb = k_b.affine(&Q::one(), &shift_b);
    let mut pts = ka.vertices.clone();
    pts.extend(kb.vertices.iter().cloned());
    let k0 = Polytope::from_points(n, &pts)?;
    let covered = |k: &Polytope| contains_shifted(k, a, &shift_a) && contains_shifted(k, b, &shift_b);
    let zero = [Q::zero(), Q::zero(), Q::zero()];
    let (k, scale, c) = if covered(&k0) {
        (k0.clone(), Q::one(), Q::zero())
    } else if zeta.is_zero() {
        return Err(Error::Inconsistent("zeta = 0 but a set is not inside its convex set".into()));
    } else {
        let z = from_f64(to_f64(&zeta).powf(1.0 / (2.0 * (n as f64).powi(3))));
        let mut c = Q::one();
        let mut found = None;
        for _ in 0..80 {
            let scale = Q::one() + &c * &z;
            let k = k0.affine(&scale, &zero);
            if covered(&k) {
                found = Some((k, scale, c.clone()));
                break;
            }
            c *= qi(2);
        }
        found.ok_or_else(|| Error::Invalid("inflation did not cover the sets".into()))?
    };
    // |(A + sa) Δ (B + sb)| = |A| + |B| - 2 |A ∩ (B + sb - sa)|
    let rel = [&shift_b[0] - &shift_a[0], &shift_b[1] - &shift_a[1], &shift_b[2] - &shift_a[2]];
    let sym_diff = a.measure() + b.measure() - qi(2) * translated_overlap(a, b, &rel)?;
    let zf = to_f64(&zeta);
    let sym_diff_ratio = if zf > 0.0 {
        to_f64(&sym_diff) / zf.powf(1.0 / (2.0 * n as f64))
    } else if sym_diff.is_zero() {
        0.0
    } else {
        f64::INFINITY
    };
    let excess_a = k.volume() - a.measure();
    let excess_b = k.volume() - b.measure();
    Ok(CosReport {
        zeta,
        shift_a,
        shift_b,
        k_a: ka,
        k_b: kb,
        k0,
        k,
        scale,
        c,
        sym_diff,
        sym_diff_ratio,
        excess_a,
        excess_b,
    })
}

/// Result of the translation search.
#[derive(Clone, Debug)]
pub struct HullDistance {
    /// Optimal translation of `B`, in cells of side `1/denom`.
    pub v: [i64; 3],
    pub denom: u64,
    /// `|𝒦 ∖ A| + |𝒦 ∖ (B + v)|` with `𝒦 = co(A ∪ (B + v))`.
    pub d_star: Q,
    /// Objective at `v = 0`.
    pub d_zero: Q,
    pub evaluations: usize,
}

impl HullDistance {
    pub fn v_real(&self) -> [Q; 3] {
        let m = BigInt::from(self.denom);
        self.v.map(|x| Q::new(BigInt::from(x), m.clone()))
    }

    /// `co(A ∪ (B + v*))` as a rational polytope.
    pub fn hull(&self, a: &LatticeSet, b: &LatticeSet) -> Result<Polytope> {
        let (a, b) = LatticeSet::reconcile(a, b)?;
        let mut pts = cell_points(&a, &[Q::zero(), Q::zero(), Q::zero()]);
        pts.extend(cell_points(&b, &self.v_real()));
        Polytope::from_points(a.dim(), &pts)
    }
}

/// Extreme points of a lattice set's hull, in cell units.
fn extreme_points(e: &LatticeSet) -> Vec<[i128; 3]> {
    let pts: Vec<[i128; 3]> = e.hull_candidates().iter().map(|p| p.map(|x| x as i128)).collect();
    match e.dim() {
        1 => {
            let lo = *pts.iter().min().unwrap();
            let hi = *pts.iter().max().unwrap();
            vec![lo, hi]
        }
        2 => {
            let p2: Vec<[i128; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
            hull2(&p2).into_iter().map(|i| pts[i]).collect()
        }
        _ => match hull3(&pts) {
            Some(f) => {
                let mut used: Vec<usize> = f.iter().flatten().copied().collect();
                used.sort_unstable();
                used.dedup();
                used.into_iter().map(|i| pts[i]).collect()
            }
            None => pts,
        },
    }
}

/// `n!` times the volume of the hull, in cell units.
fn hull_volume_scaled(dim: usize, pts: &[[i128; 3]]) -> i128 {
    match dim {
        1 => {
            let lo = pts.iter().map(|p| p[0]).min().unwrap();
            let hi = pts.iter().map(|p| p[0]).max().unwrap();
            hi - lo
        }
        2 => {
            let p2: Vec<[i128; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
            let ring = hull2(&p2);
            if ring.len() < 3 {
                return 0;
            }
            let mut s = 0;
            for k in 1..ring.len() - 1 {
                s += orient2(&p2[ring[0]], &p2[ring[k]], &p2[ring[k + 1]]);
            }
            s
        }
        _ => match hull3(pts) {
            Some(f) => volume6(pts, &f),
            None => 0,
        },
    }
}

struct Objective {
    dim: usize,
    va: Vec<[i128; 3]>,
    vb: Vec<[i128; 3]>,
    /// `n! (|A| + |B|)` in cell units.
    base: i128,
    evals: usize,
    cache: HashMap<[i64; 3], i128>,
}

impl Objective {
    /// `n! D(v)` in cell units.
    fn eval(&mut self, v: [i64; 3]) -> i128 {
        if let Some(x) = self.cache.get(&v) {
            return *x;
        }
        let mut pts = self.va.clone();
        pts.extend(self.vb.iter().map(|p| [p[0] + v[0] as i128, p[1] + v[1] as i128, p[2] + v[2] as i128]));
        let d = 2 * hull_volume_scaled(self.dim, &pts) - self.base;
        self.evals += 1;
        self.cache.insert(v, d);
        d
    }
}

/// Minimizes `D(v) = |co(A∪(B+v)) ∖ A| + |co(A∪(B+v)) ∖ (B+v)|` over lattice
/// translations: a stride `m/4` scan on a window of half-width the larger
/// diameter, centred where the bounding boxes align, then a descent with
/// stride halving down to one cell.
pub fn hull_distance(a: &LatticeSet, b: &LatticeSet) -> Result<HullDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (a, b) = LatticeSet::reconcile(a, b)?;
    let dim = a.dim();
    let m = a.denom();
    let fact: i128 = [1, 1, 2, 6][dim];
    let base = fact * (a.cell_count() as i128 + b.cell_count() as i128);
    let mut obj = Objective {
        dim,
        va: extreme_points(&a),
        vb: extreme_points(&b),
        base,
        evals: 0,
        cache: HashMap::new(),
    };
    let (alo, ahi) = a.bounding_box().unwrap();
    let (blo, bhi) = b.bounding_box().unwrap();
    let mut centre = [0i64; 3];
    let mut diam = 0i64;
    for i in 0..dim {
        centre[i] = ((alo[i] + ahi[i]) - (blo[i] + bhi[i])).div_euclid(2);
        diam = diam.max(ahi[i] - alo[i]).max(bhi[i] - blo[i]);
    }
    let stride = ((m / 4) as i64).max(1);
    let steps = diam / stride + 1;
    let d_zero = obj.eval([0, 0, 0]);
    let mut best = ([0i64; 3], d_zero);
    let consider = |v: [i64; 3], obj: &mut Objective, best: &mut ([i64; 3], i128)| {
        let d = obj.eval(v);
        if d < best.1 {
            *best = (v, d);
        }
    };
    consider(centre, &mut obj, &mut best);
    let range = |i: usize| if i < dim { -steps..=steps } else { 0..=0 };
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                let v = [centre[0] + i * stride, centre[1] + j * stride, centre[2] + k * stride];
                consider(v, &mut obj, &mut best);
            }
        }
    }
    let mut step = stride;
    loop {
        let mut improved = false;
        let r = |i: usize| if i < dim { -1..=1 } else { 0..=0 };
        for i in r(0) {
            for j in r(1) {
                for k in r(2) {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let v = [best.0[0] + i * step, best.0[1] + j * step, best.0[2] + k * step];
                    let before = best.1;
                    consider(v, &mut obj, &mut best);
                    improved |= best.1 < before;
                }
            }
        }
        if !improved {
            if step == 1 {
                break;
            }
            step /= 2;
        }
    }
    let scale = Q::new(BigInt::one(), BigInt::from(fact) * BigInt::from(m).pow(dim as u32));
    Ok(HullDistance {
        v: best.0,
        denom: m,
        d_star: Q::from_integer(BigInt::from(best.1)) * &scale,
        d_zero: Q::from_integer(BigInt::from(d_zero)) * &scale,
        evaluations: obj.evals,
    })
}

/// Verdict of the main-theorem check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Vacuous,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Vacuous => "vacuous",
            Verdict::Fail => "fail",
        }
    }
}

/// One evaluated instance.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub id: String,
    pub n: usize,
    pub t: Q,
    pub tau: Q,
    pub deficit: DeficitRecord,
    pub distance: HullDistance,
    pub k: Polytope,
    pub n_exp: f64,
    pub eps: f64,
    pub m: f64,
    /// `τ^{-N} δ^{ε}`.
    pub bound: f64,
    pub verdict: Verdict,
}

impl StabilityReport {
    pub const CSV_HEADER: &'static str = "id,n,t,tau,delta_norm,delta_raw,vx,vy,vz,D_star,bound,verdict";

    pub fn csv_row(&self) -> String {
        let v = self.distance.v_real();
        format!(
            "{},{},{},{},{:e},{:e},{},{},{},{:e},{:e},{}",
            self.id,
            self.n,
            fmt_q(&self.t),
            fmt_q(&self.tau),
            to_f64(&self.deficit.delta_norm),
            self.deficit.delta_raw.lo,
            fmt_q(&v[0]),
            fmt_q(&v[1]),
            fmt_q(&v[2]),
            to_f64(&self.distance.d_star),
            self.bound,
            self.verdict.as_str()
        )
    }
}

/// Default reporting exponent `N_n = 5n`.
pub fn default_n_exp(n: usize) -> f64 {
    5.0 * n as f64
}

/// Deficit, hull distance and constants for one pair.
pub fn check_main_theorem(
    id: &str,
    a: &LatticeSet,
    b: &LatticeSet,
    t: &Q,
    tau: &Q,
    n_exp: Option<f64>,
) -> Result<StabilityReport> {
    let n = a.dim();
    let (rec, _) = deficit(a, b, t)?;
    let distance = hull_distance(a, b)?;
    let k = distance.hull(a, b)?;
    let table = constants(n, tau)?;
    let n_exp = n_exp.unwrap_or_else(|| default_n_exp(n));
    let eps = table.eps_f64();
    let m = table.m_f64();
    let delta = to_f64(&rec.delta_norm);
    let ln_tau = to_f64(tau).ln();
    let bound = if delta == 0.0 {
        0.0
    } else {
        (-n_exp * ln_tau + eps * delta.ln()).exp()
    };
    let d = to_f64(&distance.d_star);
    let verdict = if delta > 0.0 && delta.ln() > -m {
        Verdict::Vacuous
    } else if (rec.delta_norm.is_zero() && distance.d_star.is_zero()) || (delta > 0.0 && d <= bound) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(StabilityReport {
        id: id.to_string(),
        n,
        t: t.clone(),
        tau: tau.clone(),
        deficit: rec,
        distance,
        k,
        n_exp,
        eps,
        m,
        bound,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qf;

    #[test]
    fn first_level_constants() {
        for tau in [qf(1, 2), qf(1, 4), qf(1, 10), qf(1, 100)] {
            let c = constants(1, &tau).unwrap();
            assert_eq!(big_to_f64(&c.eps), 1.0);
            let want = (to_f64(&tau) / 3.0).ln().abs();
            assert!((c.m_f64() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_at_two_half() {
        let c = constants(2, &qf(1, 2)).unwrap();
        let b = big_to_f64(c.beta.as_ref().unwrap());
        assert!((b - 1.0 / (32.0 * 2f64.ln())).abs() < 1e-16);
        assert!((c.eps_f64() - 3.3082e-7).abs() < 1e-10);
        assert!((c.m_f64() - 42330.0).abs() < 1.0);
        assert!(c.eps_bound_holds() && c.m_bound_holds());
    }

    #[test]
    fn tau_out_of_range() {
        assert!(constants(2, &qf(3, 4)).is_err());
        assert!(constants(2, &qi(0)).is_err());
    }

    #[test]
    fn convex_pair_has_zero_distance() {
        let a = LatticeSet::boxed(2, 4, [0, 0, 0], [4, 3, 0]).unwrap();
        let h = hull_distance(&a, &a).unwrap();
        assert_eq!(h.v, [0, 0, 0]);
        assert!(h.d_star.is_zero());
        let b = a.translate([9, -5, 0]);
        let h = hull_distance(&a, &b).unwrap();
        assert_eq!(h.v, [-9, 5, 0]);
        assert!(h.d_star.is_zero());
    }

    #[test]
    fn cube_pipeline_is_trivial() {
        let a = LatticeSet::unit_cube(2, 4).unwrap();
        let k = Polytope::hull_of(&a).unwrap();
        let r = cos_pipeline(&a, &a, &k, &k).unwrap();
        assert!(r.zeta.is_zero());
        assert!(r.excess_a.is_zero() && r.excess_b.is_zero());
        assert_eq!(r.k.volume(), &qi(1));
        assert_eq!(r.k_a.barycenter(), r.k_b.barycenter());
    }

    #[test]
    fn equality_case_passes() {
        let a = LatticeSet::unit_cube(2, 4).unwrap();
        let r = check_main_theorem("sq", &a, &a, &qf(1, 2), &qf(1, 2), None).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.distance.d_star.is_zero());
    }
}
