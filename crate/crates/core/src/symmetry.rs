//! Steiner, Schwarz and natural symmetrizations of lattice sets, plus the
//! sup-slice comparison for near-equality pairs.
//!
//! Steiner centering and two-dimensional Schwarz centering are exact on the
//! doubled lattice. Disks (Schwarz in three dimensions, counterexample balls)
//! are delivered as certified inner/outer cell brackets, using rational
//! enclosures of pi.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::minkowski::{convex_combination, convex_combination_with_atoms};
use crate::num::{fmt_q, to_f64, Q};
use crate::vset::{Key, LatticeSet, Run};

/// `PI_LO_N / PI_LO_D < pi < PI_HI_N / PI_HI_D`.
pub const PI_LO: (i128, i128) = (103_993, 33_102);
pub const PI_HI: (i128, i128) = (104_348, 33_215);

/// Default disk refinement factor relative to the input denominator.
pub const DEFAULT_REFINEMENT: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Schwarz,
    Steiner,
    Natural,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Schwarz => "schwarz",
            Kind::Steiner => "steiner",
            Kind::Natural => "natural",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SymmetrizedBody {
    pub kind: Kind,
    pub exact: Option<LatticeSet>,
    /// `(inner, outer)` with `inner ⊆ body ⊆ outer`.
    pub bracket: Option<(LatticeSet, LatticeSet)>,
}

impl SymmetrizedBody {
    /// Lower and upper bounds on the body's measure.
    pub fn measure_bounds(&self) -> (Q, Q) {
        match (&self.exact, &self.bracket) {
            (Some(e), _) => (e.measure(), e.measure()),
            (None, Some((i, o))) => (i.measure(), o.measure()),
            _ => unreachable!("symmetrized body without payload"),
        }
    }

    pub fn gap(&self) -> Q {
        let (lo, hi) = self.measure_bounds();
        hi - lo
    }

    /// The exact body, or the inner bracket.
    pub fn inner(&self) -> &LatticeSet {
        match (&self.exact, &self.bracket) {
            (Some(e), _) => e,
            (None, Some((i, _))) => i,
            _ => unreachable!(),
        }
    }

    /// The exact body, or the outer bracket.
    pub fn outer(&self) -> &LatticeSet {
        match (&self.exact, &self.bracket) {
            (Some(e), _) => e,
            (None, Some((_, o))) => o,
            _ => unreachable!(),
        }
    }

    /// One or two `.vset` payloads, each preceded by its tag line.
    pub fn to_tagged(&self) -> String {
        let mut s = String::new();
        if let Some(e) = &self.exact {
            s.push_str("exact\n");
            s.push_str(&e.to_vset());
        }
        if let Some((i, o)) = &self.bracket {
            s.push_str("inner\n");
            s.push_str(&i.to_vset());
            s.push_str("outer\n");
            s.push_str(&o.to_vset());
        }
        s
    }

    pub fn parse_tagged(kind: Kind, text: &str) -> Result<Self> {
        let mut parts: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            match line.trim() {
                t @ ("exact" | "inner" | "outer") => parts.push((t.to_string(), String::new())),
                _ => {
                    let last = parts.last_mut().ok_or(Error::Parse {
                        line: 1,
                        msg: "missing tag".into(),
                    })?;
                    last.1.push_str(line);
                    last.1.push('\n');
                }
            }
        }
        let mut exact = None;
        let mut inner = None;
        let mut outer = None;
        for (tag, body) in parts {
            let set = LatticeSet::parse_vset(&body)?;
            match tag.as_str() {
                "exact" => exact = Some(set),
                "inner" => inner = Some(set),
                _ => outer = Some(set),
            }
        }
        let bracket = match (inner, outer) {
            (Some(i), Some(o)) => Some((i, o)),
            (None, None) => None,
            _ => return Err(Error::Inconsistent("bracket needs both inner and outer".into())),
        };
        if exact.is_none() && bracket.is_none() {
            return Err(Error::Inconsistent("no payload".into()));
        }
        Ok(SymmetrizedBody { kind, exact, bracket })
    }
}

fn require_fibers(e: &LatticeSet) -> Result<()> {
    if e.dim() < 2 {
        Err(Error::NeedsFibers)
    } else {
        Ok(())
    }
}

/// Steiner symmetrization: every fiber of `c` cells becomes the centered
/// interval `[-c/(2m), c/(2m)]`, on the lattice `1/(2m)`.
pub fn steiner_set(e: &LatticeSet) -> Result<LatticeSet> {
    require_fibers(e)?;
    let dim = e.dim();
    let mut cols: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
    for (k, runs) in e.columns() {
        let c: i64 = runs.iter().map(|r| r.1 - r.0).sum();
        let ys1 = [2 * k[0], 2 * k[0] + 1];
        let ys2: Vec<i64> = if dim == 3 { vec![2 * k[1], 2 * k[1] + 1] } else { vec![0] };
        for &a in &ys1 {
            for &b in &ys2 {
                cols.insert([a, b], vec![(-c, c)]);
            }
        }
    }
    LatticeSet::from_runs(dim, e.denom() * 2, cols)
}

pub fn steiner(e: &LatticeSet) -> Result<SymmetrizedBody> {
    Ok(SymmetrizedBody {
        kind: Kind::Steiner,
        exact: Some(steiner_set(e)?),
        bracket: None,
    })
}

/// Two-dimensional Schwarz symmetrization: every row of `c` cells becomes
/// the centered interval of length `c/m`, on the lattice `1/(2m)`.
fn schwarz_2d(e: &LatticeSet) -> Result<LatticeSet> {
    let mut cols: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
    for (row, c) in e.slice_counts()? {
        let c = c as i64;
        for y in -c..c {
            cols.entry([y, 0]).or_default().push((2 * row, 2 * row + 2));
        }
    }
    LatticeSet::from_runs(2, e.denom() * 2, cols)
}

/// Inner and outer cell lists of a disk.
pub type DiskCells = (Vec<(i64, i64)>, Vec<(i64, i64)>);

/// Cells `(i, j)` of the lattice `1/big` inside (resp. meeting) the closed
/// disk of area `num/den` centered at the origin.
///
/// A cell is inside when its farthest corner lies in the disk computed with
/// the upper bound for pi, and meets the disk when its nearest point lies in
/// the disk computed with the lower bound.
pub fn disk_cells(num: i128, den: i128, big: i64) -> DiskCells {
    // |p|^2 <= area / pi with |p|^2 = D / big^2
    let b2 = (big as i128) * (big as i128);
    let inside = |d: i128| d * PI_HI.0 * den <= num * b2 * PI_HI.1;
    let meets = |d: i128| d * PI_LO.0 * den <= num * b2 * PI_LO.1;
    // radius bound in cells
    let rmax = ((to_f64_ratio(num, den) / std::f64::consts::PI).sqrt() * big as f64).ceil() as i64 + 2;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for i in -rmax..rmax {
        for j in -rmax..rmax {
            let far = far_sq(i) + far_sq(j);
            let near = near_sq(i) + near_sq(j);
            if inside(far) {
                inner.push((i, j));
            }
            if meets(near) {
                outer.push((i, j));
            }
        }
    }
    (inner, outer)
}

fn to_f64_ratio(n: i128, d: i128) -> f64 {
    n as f64 / d as f64
}

/// Squared distance from 0 to the farthest point of `[i, i+1]`.
fn far_sq(i: i64) -> i128 {
    let f = (i.abs()).max((i + 1).abs()) as i128;
    f * f
}

/// Squared distance from 0 to the nearest point of `[i, i+1]`.
fn near_sq(i: i64) -> i128 {
    if i <= 0 && 0 <= i + 1 {
        0
    } else {
        let f = (i.abs()).min((i + 1).abs()) as i128;
        f * f
    }
}

/// Three-dimensional Schwarz symmetrization at fine denominator
/// `refine * m`, as a certified bracket.
fn schwarz_3d(e: &LatticeSet, refine: u64) -> Result<(LatticeSet, LatticeSet)> {
    let m = e.denom();
    let big = m * refine;
    let k = refine as i64;
    let mut cache: BTreeMap<u64, DiskCells> = BTreeMap::new();
    let mut ci: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
    let mut co: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
    for (row, c) in e.slice_counts()? {
        // row area c / m^2
        let disk = cache
            .entry(c)
            .or_insert_with(|| disk_cells(c as i128, (m as i128) * (m as i128), big as i64));
        let run = (row * k, row * k + k);
        for &(i, j) in &disk.0 {
            ci.entry([i, j]).or_default().push(run);
        }
        for &(i, j) in &disk.1 {
            co.entry([i, j]).or_default().push(run);
        }
    }
    Ok((LatticeSet::from_runs(3, big, ci)?, LatticeSet::from_runs(3, big, co)?))
}

pub fn schwarz(e: &LatticeSet) -> Result<SymmetrizedBody> {
    schwarz_with(e, DEFAULT_REFINEMENT)
}

pub fn schwarz_with(e: &LatticeSet, refine: u64) -> Result<SymmetrizedBody> {
    require_fibers(e)?;
    if e.dim() == 2 {
        Ok(SymmetrizedBody {
            kind: Kind::Schwarz,
            exact: Some(schwarz_2d(e)?),
            bracket: None,
        })
    } else {
        Ok(SymmetrizedBody {
            kind: Kind::Schwarz,
            exact: None,
            bracket: Some(schwarz_3d(e, refine)?),
        })
    }
}

/// `E♮ = (E★)*`.
pub fn natural(e: &LatticeSet) -> Result<SymmetrizedBody> {
    natural_with(e, DEFAULT_REFINEMENT)
}

pub fn natural_with(e: &LatticeSet, refine: u64) -> Result<SymmetrizedBody> {
    let st = steiner_set(e)?;
    let mut body = schwarz_with(&st, refine)?;
    body.kind = Kind::Natural;
    Ok(body)
}

/// Outcome of the sup-slice comparison.
#[derive(Clone, Debug)]
pub struct SupSliceCheck {
    pub sup_a: Q,
    pub sup_b: Q,
    /// `γ <= 1` after possibly exchanging the sets.
    pub gamma: f64,
    /// `|γ - 1|`
    pub lhs: f64,
    /// `sqrt(8 δ / τ)`
    pub bound: f64,
    pub pass: bool,
}

/// Computes `γ = (sup_s H(A(s)) / sup_s H(B(s)))^{1-t}` (exchanging the
/// roles of the sets, and `t` with `1-t`, when the ratio exceeds one) and
/// checks `4δ >= (τ/2)|γ-1|^2`.
pub fn sup_slice_ratio_check(a: &LatticeSet, b: &LatticeSet, t: &Q, delta: &Q) -> Result<SupSliceCheck> {
    let sup = |e: &LatticeSet| -> Result<Q> {
        let c = e.slice_counts()?.values().copied().max().unwrap_or(0);
        Ok(Q::new(BigInt::from(c), BigInt::from(e.denom()).pow(e.dim() as u32 - 1)))
    };
    let (sa, sb) = (sup(a)?, sup(b)?);
    if sa == Q::from_integer(0.into()) || sb == Q::from_integer(0.into()) {
        return Err(Error::ZeroSupSlice);
    }
    let tf = to_f64(t);
    let r = &sa / &sb;
    let gamma = if r <= Q::one() {
        to_f64(&r).powf(1.0 - tf)
    } else {
        to_f64(&r.recip()).powf(tf)
    };
    let tau = tf.min(1.0 - tf);
    let lhs = (gamma - 1.0).abs();
    let bound = (8.0 * to_f64(delta) / tau).sqrt();
    // slack covers the rounding of powf and sqrt
    let pass = lhs <= bound * (1.0 + 1e-12) + 1e-15;
    Ok(SupSliceCheck {
        sup_a: sa,
        sup_b: sb,
        gamma,
        lhs,
        bound,
        pass,
    })
}

/// The family `B_ρ(0) ∪ {2L e_1}` with `|B_ρ| = 1`, bracketed on the lattice
/// `1/m`: `inner` holds the cells inside the ball, `outer` the cells meeting
/// it; [`Self::outer_set`] adds the cell `[2L, 2L + 1/m] × [0, 1/m]^{n-1}`.
#[derive(Clone, Debug)]
pub struct CounterexampleBracket {
    pub n: usize,
    pub m: u64,
    pub l: i64,
    pub ball_inner: LatticeSet,
    pub ball_outer: LatticeSet,
    /// `2L e_1` in units of `1/m`.
    pub atom: [i64; 3],
}

impl CounterexampleBracket {
    /// Outer ball bracket plus the cell with lower corner at the atom.
    pub fn outer_set(&self) -> Result<LatticeSet> {
        let cell = LatticeSet::from_cells(self.n, self.m, [self.atom])?;
        self.ball_outer.union(&cell)
    }

    /// Certified bounds on `|tA + (1-t)A|` for `A = B_ρ ∪ {2L e_1}`.
    pub fn sum_bounds(&self, t: &Q) -> Result<(Q, Q)> {
        let lo = convex_combination_with_atoms(&self.ball_inner, &[self.atom], &self.ball_inner, &[self.atom], t)?;
        let out = self.outer_set()?;
        let hi = convex_combination(&out, &out, t)?;
        Ok((lo.measure(), hi.measure()))
    }
}

/// Cells inside / meeting the centered ball of unit volume in dimension `n`.
pub fn unit_ball_bracket(n: usize, m: u64) -> Result<(LatticeSet, LatticeSet)> {
    let mi = m as i64;
    match n {
        1 => {
            // [-1/2, 1/2]; exact when m is even
            let h = mi / 2;
            let inner = LatticeSet::boxed(1, m, [-h, 0, 0], [h, 0, 0])?;
            let outer = LatticeSet::boxed(1, m, [-(mi - h), 0, 0], [mi - h, 0, 0])?;
            Ok((inner, outer))
        }
        2 => {
            let (i, o) = disk_cells(1, 1, mi);
            let inner = LatticeSet::from_cells(2, m, i.into_iter().map(|(a, b)| [a, b, 0]))?;
            let outer = LatticeSet::from_cells(2, m, o.into_iter().map(|(a, b)| [a, b, 0]))?;
            Ok((inner, outer))
        }
        3 => {
            // |p|^2 <= r^2 with r^3 = 3/(4 pi):  |p|^6 (4 pi)^2 <= 9
            let m2 = (mi as i128) * (mi as i128);
            let m6 = m2 * m2 * m2;
            let inside = |d: i128| 16 * d * d * d * PI_HI.0 * PI_HI.0 <= 9 * m6 * PI_HI.1 * PI_HI.1;
            let meets = |d: i128| 16 * d * d * d * PI_LO.0 * PI_LO.0 <= 9 * m6 * PI_LO.1 * PI_LO.1;
            let r = ((3.0 / (4.0 * std::f64::consts::PI)).cbrt() * m as f64).ceil() as i64 + 2;
            let mut inner = Vec::new();
            let mut outer = Vec::new();
            for i in -r..r {
                for j in -r..r {
                    for k in -r..r {
                        if inside(far_sq(i) + far_sq(j) + far_sq(k)) {
                            inner.push([i, j, k]);
                        }
                        if meets(near_sq(i) + near_sq(j) + near_sq(k)) {
                            outer.push([i, j, k]);
                        }
                    }
                }
            }
            Ok((LatticeSet::from_cells(3, m, inner)?, LatticeSet::from_cells(3, m, outer)?))
        }
        d => Err(Error::BadDimension(d)),
    }
}

pub fn counterexample(n: usize, m: u64, l: i64) -> Result<CounterexampleBracket> {
    let (ball_inner, ball_outer) = unit_ball_bracket(n, m)?;
    let mut atom = [0i64; 3];
    atom[0] = 2 * l * m as i64;
    Ok(CounterexampleBracket {
        n,
        m,
        l,
        ball_inner,
        ball_outer,
        atom,
    })
}

/// Fiber lengths of `E` as a multiset, for comparing fiber distributions.
pub fn fiber_distribution(e: &LatticeSet) -> Result<BTreeMap<Q, Q>> {
    let f = e.fiber_profile()?;
    let base_cell = Q::new(BigInt::one(), BigInt::from(f.denom).pow(f.base_dim as u32));
    let mut out: BTreeMap<Q, Q> = BTreeMap::new();
    for c in f.counts.values() {
        let len = Q::new(BigInt::from(*c), BigInt::from(f.denom));
        *out.entry(len).or_insert_with(|| Q::from_integer(0.into())) += &base_cell;
    }
    Ok(out)
}

/// Midpoints between consecutive attained fiber lengths (and below the
/// smallest), which avoid ties in level-set comparisons.
pub fn tie_free_levels(e: &LatticeSet) -> Result<Vec<Q>> {
    let lens: Vec<Q> = fiber_distribution(e)?.into_keys().collect();
    let mut out = Vec::new();
    let mut prev = Q::from_integer(0.into());
    for l in lens {
        out.push((&prev + &l) / Q::from_integer(2.into()));
        prev = l;
    }
    Ok(out)
}

/// `|E \ π^{-1}(𝓔(λ))|`.
pub fn mass_outside_level(e: &LatticeSet, lambda: &Q) -> Result<Q> {
    let f = e.fiber_profile()?;
    let m = Q::from_integer(BigInt::from(e.denom()));
    let mut n = 0u64;
    for c in f.counts.values() {
        if Q::from_integer(BigInt::from(*c)) <= lambda * &m {
            n += c;
        }
    }
    Ok(Q::from_integer(BigInt::from(n)) * e.cell_volume())
}

pub fn describe(b: &SymmetrizedBody) -> String {
    let (lo, hi) = b.measure_bounds();
    format!(
        "kind={}\nmeasure_lo={}\nmeasure_hi={}\ngap={}\n",
        b.kind,
        fmt_q(&lo),
        fmt_q(&hi),
        b.gap().to_f64().unwrap_or(f64::NAN)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{qf, qi};

    #[test]
    fn steiner_centers_fibers() {
        let e = LatticeSet::from_cells(2, 2, [[0, 3, 0], [0, 4, 0], [1, 7, 0]]).unwrap();
        let s = steiner_set(&e).unwrap();
        assert_eq!(s.measure(), e.measure());
        let f = s.fiber_profile().unwrap();
        assert_eq!(f.length(&[0, 0]), qi(1));
        assert_eq!(f.length(&[2, 0]), qf(1, 2));
        assert_eq!(s.columns()[&[0, 0]], vec![(-2, 2)]);
    }

    #[test]
    fn schwarz_of_unit_square_is_centered_slab() {
        let sq = LatticeSet::unit_cube(2, 4).unwrap();
        let s = schwarz(&sq).unwrap();
        let slab = LatticeSet::boxed(2, 2, [-1, 0, 0], [1, 2, 0]).unwrap();
        assert!(s.exact.unwrap().same_set(&slab).unwrap());
    }

    #[test]
    fn natural_of_centered_square() {
        let sq = LatticeSet::boxed(2, 2, [-1, -1, 0], [1, 1, 0]).unwrap();
        let n = natural(&sq).unwrap();
        assert!(n.exact.unwrap().same_set(&sq).unwrap());
    }

    #[test]
    fn schwarz_3d_bracket_shrinks() {
        let cube = LatticeSet::unit_cube(3, 2).unwrap();
        let mut prev = f64::INFINITY;
        for r in [2, 4, 8] {
            let b = schwarz_with(&cube, r).unwrap();
            let (lo, hi) = b.measure_bounds();
            assert!(lo <= cube.measure() && cube.measure() <= hi);
            let g = to_f64(&b.gap());
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn disk_bracket_encloses_area() {
        for m in [8, 32, 128] {
            let (i, o) = unit_ball_bracket(2, m).unwrap();
            assert!(i.measure() <= qi(1) && qi(1) <= o.measure());
            assert!(i.is_subset(&o).unwrap());
        }
        let (i, o) = unit_ball_bracket(3, 16).unwrap();
        assert!(i.measure() <= qi(1) && qi(1) <= o.measure());
    }

    #[test]
    fn tagged_round_trip() {
        let b = schwarz_with(&LatticeSet::unit_cube(3, 1).unwrap(), 2).unwrap();
        let text = b.to_tagged();
        let back = SymmetrizedBody::parse_tagged(Kind::Schwarz, &text).unwrap();
        assert_eq!(back.bracket, b.bracket);
    }

    #[test]
    fn identical_sets_have_gamma_one() {
        let e = LatticeSet::unit_cube(2, 3).unwrap();
        let c = sup_slice_ratio_check(&e, &e, &qf(1, 3), &qi(0)).unwrap();
        assert_eq!(c.gamma, 1.0);
        assert!(c.pass);
    }
}
