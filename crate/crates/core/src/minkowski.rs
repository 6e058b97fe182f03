//! Minkowski convex combinations of lattice sets, Brunn-Minkowski deficits,
//! and exact one-dimensional interval unions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{compare_with_mean_power, f64_below, fmt_q, from_f64, nth_root_bracket, parse_q, Bracket, Q};
use crate::vset::{normalize_runs, Key, LatticeSet, Run};

/// Largest fine denominator `m q` accepted by [`convex_combination`].
pub const FINE_DENOM_LIMIT: u64 = 1 << 20;

/// `t` as `(p, q)` in lowest terms, checking `0 < t < 1`.
pub fn split_t(t: &Q) -> Result<(u64, u64)> {
    if !(t.is_positive() && *t < Q::one()) {
        return Err(Error::BadT(fmt_q(t)));
    }
    let p = t.numer().to_u64().ok_or_else(|| Error::BadT(fmt_q(t)))?;
    let q = t.denom().to_u64().ok_or_else(|| Error::BadT(fmt_q(t)))?;
    Ok((p, q))
}

/// `τ = min{t, 1-t}`.
pub fn tau_of(t: &Q) -> Q {
    let s = Q::one() - t;
    if *t < s {
        t.clone()
    } else {
        s
    }
}

/// Exact `tA + (1-t)B` for `t = p/q`.
///
/// With both operands at denominator `m`, the cube pair `(i, j)` contributes
/// the cube of side `1/m` with corner `p i + (q-p) j` on the lattice
/// `1/(mq)`. A pair of column runs `[s0, s1)`, `[u0, u1)` therefore covers
/// the single fine run from `p s0 + (q-p) u0` to `p (s1-1) + (q-p)(u1-1) + q`
/// (consecutive corners are at most `max(p, q-p) < q` apart).
pub fn convex_combination(a: &LatticeSet, b: &LatticeSet, t: &Q) -> Result<LatticeSet> {
    let (p, q) = split_t(t)?;
    let (a, b) = LatticeSet::reconcile(a, b)?;
    let fine = (a.denom() as u128) * (q as u128);
    if fine > FINE_DENOM_LIMIT as u128 {
        return Err(Error::DenominatorOverflow(fine));
    }
    let dim = a.dim();
    let (pi, ri, qi) = (p as i64, (q - p) as i64, q as i64);
    let mut acc: HashMap<Key, Vec<Run>> = HashMap::new();
    for (ka, runs_a) in a.columns() {
        for (kb, runs_b) in b.columns() {
            let corner = [pi * ka[0] + ri * kb[0], pi * ka[1] + ri * kb[1]];
            let mut runs = Vec::with_capacity(runs_a.len() * runs_b.len());
            for &(s0, s1) in runs_a {
                for &(u0, u1) in runs_b {
                    runs.push((pi * s0 + ri * u0, pi * (s1 - 1) + ri * (u1 - 1) + qi));
                }
            }
            let ext0 = if dim >= 2 { qi } else { 1 };
            let ext1 = if dim == 3 { qi } else { 1 };
            for d0 in 0..ext0 {
                for d1 in 0..ext1 {
                    let slot = acc.entry([corner[0] + d0, corner[1] + d1]).or_default();
                    slot.extend_from_slice(&runs);
                    if slot.len() > 256 {
                        normalize_runs(slot);
                    }
                }
            }
        }
    }
    LatticeSet::from_runs(dim, a.denom() * q, acc.into_iter().collect())
}

/// `tE + (1-t)x` for a lattice point `x` (units of `1/m`), at the fine
/// denominator `m q`: cell `k` becomes the `p^n` block at `p k + (q-p) x`.
fn scaled_translate(e: &LatticeSet, p: i64, q: i64, x: [i64; 3], weight_x: i64) -> Result<LatticeSet> {
    let dim = e.dim();
    let mut cols: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
    let (kx, sx) = crate::vset::key_of(dim, &x);
    for (k, runs) in e.columns() {
        let scaled: Vec<Run> = runs
            .iter()
            .map(|&(lo, hi)| (p * lo + weight_x * sx, p * hi + weight_x * sx))
            .collect();
        let e0 = if dim >= 2 { p } else { 1 };
        let e1 = if dim == 3 { p } else { 1 };
        for d0 in 0..e0 {
            for d1 in 0..e1 {
                let key = [p * k[0] + weight_x * kx[0] + d0, p * k[1] + weight_x * kx[1] + d1];
                cols.entry(key).or_default().extend_from_slice(&scaled);
            }
        }
    }
    LatticeSet::from_runs(dim, e.denom() * q as u64, cols)
}

/// `tA' + (1-t)B'` where `A' = A ∪ atoms_a` and `B' = B ∪ atoms_b` carry
/// extra isolated lattice points (units of `1/m`, after reconciliation at
/// the larger of the two denominators when they agree). The point-point
/// sums have measure zero and are omitted, so the result is contained in the
/// true combination and has the same measure.
pub fn convex_combination_with_atoms(
    a: &LatticeSet,
    atoms_a: &[[i64; 3]],
    b: &LatticeSet,
    atoms_b: &[[i64; 3]],
    t: &Q,
) -> Result<LatticeSet> {
    if a.denom() != b.denom() {
        return Err(Error::Invalid("atoms require a common denominator".into()));
    }
    let (p, q) = split_t(t)?;
    let (pi, qi) = (p as i64, q as i64);
    let mut s = convex_combination(a, b, t)?;
    for &x in atoms_b {
        s = s.union(&scaled_translate(a, pi, qi, x, qi - pi)?)?;
    }
    for &x in atoms_a {
        s = s.union(&scaled_translate(b, qi - pi, qi, x, pi)?)?;
    }
    Ok(s)
}

/// Deficits of a pair and its convex combination.
#[derive(Clone, Debug)]
pub struct DeficitRecord {
    pub n: usize,
    pub t: Q,
    pub tau: Q,
    pub vol_a: Q,
    pub vol_b: Q,
    pub vol_s: Q,
    /// `||A|-1| + ||B|-1| + ||S|-1|`
    pub delta_norm: Q,
    /// Certified enclosure of `|S|^{1/n} - (t|A|^{1/n} + (1-t)|B|^{1/n})`.
    pub delta_raw: Bracket,
    /// Exact sign of `|S| - (t|A|^{1/n} + (1-t)|B|^{1/n})^n`.
    pub sign: Ordering,
}

impl DeficitRecord {
    pub fn from_volumes(n: usize, t: &Q, vol_a: Q, vol_b: Q, vol_s: Q) -> Self {
        let one = Q::one();
        let delta_norm = (&vol_a - &one).abs() + (&vol_b - &one).abs() + (&vol_s - &one).abs();
        let n32 = n as u32;
        let ra = nth_root_bracket(&vol_a, n32);
        let rb = nth_root_bracket(&vol_b, n32);
        let rs = nth_root_bracket(&vol_s, n32);
        let s = &one - t;
        let lo_q = from_f64(rs.lo) - t * from_f64(ra.hi) - &s * from_f64(rb.hi);
        let hi_q = from_f64(rs.hi) - t * from_f64(ra.lo) - &s * from_f64(rb.lo);
        let sign = compare_with_mean_power(&vol_s, &vol_a, &vol_b, t, n32);
        let mut lo = f64_below(&lo_q);
        let mut hi = crate::num::f64_above(&hi_q);
        match sign {
            Ordering::Equal => {
                lo = 0.0;
                hi = 0.0;
            }
            Ordering::Greater => lo = lo.max(0.0),
            Ordering::Less => hi = hi.min(0.0),
        }
        DeficitRecord {
            n,
            t: t.clone(),
            tau: tau_of(t),
            vol_a,
            vol_b,
            vol_s,
            delta_norm,
            delta_raw: Bracket { lo, hi },
            sign,
        }
    }

    /// Brunn-Minkowski holds for this record, decided exactly.
    pub fn bm_holds(&self) -> bool {
        self.sign != Ordering::Less && self.delta_raw.lo >= 0.0
    }
}

/// Computes `S = tA + (1-t)B` and both deficit flavors.
pub fn deficit(a: &LatticeSet, b: &LatticeSet, t: &Q) -> Result<(DeficitRecord, LatticeSet)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let s = convex_combination(a, b, t)?;
    let rec = DeficitRecord::from_volumes(a.dim(), t, a.measure(), b.measure(), s.measure());
    Ok((rec, s))
}

/// Finite union of closed intervals with rational endpoints, kept sorted
/// and disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    comps: Vec<(Q, Q)>,
}

impl IntervalSet {
    /// Normalizes arbitrary closed intervals into disjoint sorted form.
    pub fn new(mut comps: Vec<(Q, Q)>) -> Result<Self> {
        if comps.iter().any(|(a, b)| a > b) {
            return Err(Error::Invalid("interval with a > b".into()));
        }
        comps.sort();
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(comps.len());
        for (a, b) in comps {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        Ok(IntervalSet { comps: out })
    }

    pub fn components(&self) -> &[(Q, Q)] {
        &self.comps
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.comps.iter().map(|(a, b)| b - a).sum()
    }

    pub fn hull(&self) -> Option<(Q, Q)> {
        Some((self.comps.first()?.0.clone(), self.comps.last()?.1.clone()))
    }

    /// `|co(E) \ E|`.
    pub fn hull_excess(&self) -> Q {
        match self.hull() {
            Some((a, b)) => b - a - self.measure(),
            None => Q::zero(),
        }
    }

    pub fn sumset(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.comps.len() * other.comps.len());
        for (a0, a1) in &self.comps {
            for (b0, b1) in &other.comps {
                v.push((a0 + b0, a1 + b1));
            }
        }
        IntervalSet::new(v).expect("sums of valid intervals are valid")
    }

    pub fn to_iset(&self) -> String {
        let mut s = format!("iset {}\n", self.comps.len());
        for (a, b) in &self.comps {
            s.push_str(&format!("{} {}\n", fmt_q(a), fmt_q(b)));
        }
        s
    }

    pub fn parse_iset(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let (i, head) = lines.next().ok_or_else(|| perr(0, "missing header".into()))?;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 2 || h[0] != "iset" {
            return Err(perr(i, "expected `iset <count>`".into()));
        }
        let count: usize = h[1].parse().map_err(|_| perr(i, "bad count".into()))?;
        let mut comps = Vec::with_capacity(count);
        for (i, l) in lines.by_ref().take(count) {
            let w: Vec<&str> = l.split_whitespace().collect();
            if w.len() != 2 {
                return Err(perr(i, "expected two endpoints".into()));
            }
            let a = parse_q(w[0]).map_err(|e| perr(i, e.to_string()))?;
            let b = parse_q(w[1]).map_err(|e| perr(i, e.to_string()))?;
            if a > b {
                return Err(perr(i, "left endpoint exceeds right".into()));
            }
            comps.push((a, b));
        }
        if comps.len() != count {
            return Err(perr(i, "fewer intervals than declared".into()));
        }
        if let Some((i, _)) = lines.next() {
            return Err(perr(i, "trailing data".into()));
        }
        IntervalSet::new(comps)
    }
}

/// `A + B` for interval unions.
pub fn interval_sumset(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    a.sumset(b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KempermanVerdict {
    pub applicable: bool,
    pub delta: Q,
    pub hull_a: (Q, Q),
    pub hull_b: (Q, Q),
    pub excess_a: Q,
    pub excess_b: Q,
    pub pass: bool,
}

/// One-dimensional stability check with hulls as the candidate intervals.
///
/// With `δ0 = |A+B| - |A| - |B|`, the hypothesis `|A+B| < |A|+|B|+δ` for
/// some `δ <= min{|A|,|B|}` holds iff `δ0 < min{|A|,|B|}`; the conclusion
/// for every admissible `δ > δ0` is equivalent to excesses `<= δ0`.
pub fn kemperman_stability(a: &IntervalSet, b: &IntervalSet) -> Result<KempermanVerdict> {
    let (ha, hb) = match (a.hull(), b.hull()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::EmptySet),
    };
    let (ma, mb) = (a.measure(), b.measure());
    let delta = a.sumset(b).measure() - &ma - &mb;
    let applicable = delta < ma.clone().min(mb);
    let excess_a = a.hull_excess();
    let excess_b = b.hull_excess();
    let pass = !applicable || (excess_a <= delta && excess_b <= delta);
    Ok(KempermanVerdict {
        applicable,
        delta,
        hull_a: ha,
        hull_b: hb,
        excess_a,
        excess_b,
        pass,
    })
}

/// Integer interval union used by the exhaustive sweep: up to three closed
/// components `[a, b]` in grid units, sorted with gaps.
pub type GridSet = Vec<(i32, i32)>;

/// All unions of at most `max_comp` closed intervals with endpoints in
/// `{0, .., max}` and smallest endpoint 0 (one representative per
/// translation class). Degenerate components `[a, a]` are included.
pub fn enumerate_grid_sets(max: i32, max_comp: usize) -> Vec<GridSet> {
    fn rec(cur: &mut GridSet, from: i32, max: i32, left: usize, out: &mut Vec<GridSet>) {
        for a in from..=max {
            for b in a..=max {
                cur.push((a, b));
                out.push(cur.clone());
                if left > 1 {
                    rec(cur, b + 1, max, left - 1, out);
                }
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if max_comp == 0 {
        return out;
    }
    let mut cur = Vec::new();
    for b in 0..=max {
        cur.push((0, b));
        out.push(cur.clone());
        if max_comp > 1 {
            rec(&mut cur, b + 1, max, max_comp - 1, &mut out);
        }
        cur.pop();
    }
    out
}

/// Number of sets produced by [`enumerate_grid_sets`], without building them.
pub fn count_grid_sets(max: i32, max_comp: usize) -> u128 {
    if max_comp == 0 {
        return 0;
    }
    let w = max as usize + 2;
    // n[x]: sequences of at most k further components starting at >= x
    let mut n = vec![1u128; w];
    for _ in 1..max_comp {
        let mut next = vec![1u128; w];
        for (x, slot) in next.iter_mut().enumerate().take(max as usize + 1) {
            let mut s = 1u128;
            for a in x..=max as usize {
                for b in a..=max as usize {
                    s += n[b + 1];
                }
            }
            *slot = s;
        }
        n = next;
    }
    (0..=max as usize).map(|b| n[b + 1]).sum()
}

fn grid_measure(a: &[(i32, i32)]) -> i64 {
    a.iter().map(|&(x, y)| (y - x) as i64).sum()
}

fn grid_sum_measure(a: &[(i32, i32)], b: &[(i32, i32)]) -> i64 {
    let mut v = [(0i32, 0i32); 9];
    let mut n = 0;
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            v[n] = (a0 + b0, a1 + b1);
            n += 1;
        }
    }
    let v = &mut v[..n];
    v.sort_unstable();
    let mut total = 0i64;
    let (mut lo, mut hi) = v[0];
    for &(x, y) in v.iter().skip(1) {
        if x <= hi {
            hi = hi.max(y);
        } else {
            total += (hi - lo) as i64;
            lo = x;
            hi = y;
        }
    }
    total + (hi - lo) as i64
}

/// Kemperman check on grid sets, all quantities in grid units.
/// Returns `(applicable, pass)`.
pub fn grid_kemperman(a: &[(i32, i32)], b: &[(i32, i32)]) -> (bool, bool) {
    let (ma, mb) = (grid_measure(a), grid_measure(b));
    let delta = grid_sum_measure(a, b) - ma - mb;
    let applicable = delta < ma.min(mb);
    if !applicable {
        return (false, true);
    }
    let ea = (a[a.len() - 1].1 - a[0].0) as i64 - ma;
    let eb = (b[b.len() - 1].1 - b[0].0) as i64 - mb;
    (true, ea <= delta && eb <= delta)
}

#[derive(Clone, Debug)]
pub struct ExhaustiveReport {
    pub sets: usize,
    pub total_pairs: u128,
    pub checked_pairs: u128,
    pub applicable: u128,
    pub failures: Vec<(GridSet, GridSet)>,
    pub elapsed: Duration,
    pub complete: bool,
}

impl ExhaustiveReport {
    /// Projected wall time for the full sweep at the observed rate.
    pub fn projected_total(&self) -> Duration {
        if self.checked_pairs == 0 {
            return Duration::MAX;
        }
        let per = self.elapsed.as_secs_f64() / self.checked_pairs as f64;
        Duration::from_secs_f64(per * self.total_pairs as f64)
    }
}

/// Checks every pair of grid sets (endpoints in `{0..max}`, at most
/// `max_comp` components, translation-pinned), stopping early when the time
/// budget runs out.
pub fn exhaustive_kemperman(max: i32, max_comp: usize, budget: Option<Duration>) -> ExhaustiveReport {
    let start = Instant::now();
    let sets = enumerate_grid_sets(max, max_comp);
    let total_pairs = (sets.len() as u128) * (sets.len() as u128);
    let mut checked = 0u128;
    let mut applicable = 0u128;
    let mut failures = Vec::new();
    let mut complete = true;
    'outer: for a in &sets {
        for b in &sets {
            let (app, pass) = grid_kemperman(a, b);
            applicable += app as u128;
            if !pass {
                failures.push((a.clone(), b.clone()));
            }
        }
        checked += sets.len() as u128;
        if let Some(lim) = budget {
            if start.elapsed() > lim {
                complete = checked == total_pairs;
                break 'outer;
            }
        }
    }
    ExhaustiveReport {
        sets: sets.len(),
        total_pairs,
        checked_pairs: checked,
        applicable,
        failures,
        elapsed: start.elapsed(),
        complete,
    }
}

/// Converts a grid set with unit `1/d` into an [`IntervalSet`].
pub fn grid_to_intervals(g: &[(i32, i32)], d: i64) -> IntervalSet {
    IntervalSet::new(
        g.iter()
            .map(|&(a, b)| (Q::new(BigInt::from(a), BigInt::from(d)), Q::new(BigInt::from(b), BigInt::from(d))))
            .collect(),
    )
    .expect("grid sets are valid")
}
