//! Slice densities, the monotone rearrangement between them, and the slice
//! decomposition of the Brunn-Minkowski deficit.
//!
//! All densities are piecewise constant with rational breakpoints, so the
//! rearrangement `T = G_B^{-1} ∘ G_A` is piecewise linear with rational data.
//! `G_B^{-1}(r) = inf{s : G_B(s) > r}` (right-continuous quantile), hence `T`
//! jumps across zero-density gaps of `ρ_B`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::minkowski::{convex_combination, split_t};
use crate::num::{f64_above, f64_below, from_f64, nth_root_bracket, pow_q, to_f64, Bracket, Q};
use crate::vset::LatticeSet;

/// Piecewise-constant density on disjoint sorted pieces `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityProfile {
    pub pieces: Vec<(Q, Q, Q)>,
}

impl DensityProfile {
    /// Builds a profile, checking ordering and non-negativity.
    pub fn new(pieces: Vec<(Q, Q, Q)>) -> Result<Self> {
        for w in pieces.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::Invalid("density pieces overlap or are unsorted".into()));
            }
        }
        if pieces.iter().any(|(a, b, v)| a >= b || v.is_negative()) {
            return Err(Error::Invalid("bad density piece".into()));
        }
        Ok(DensityProfile { pieces })
    }

    /// The uniform probability density on `[a, b]`.
    pub fn uniform(a: Q, b: Q) -> Result<Self> {
        let v = (&b - &a).recip();
        Self::new(vec![(a, b, v)])
    }

    pub fn mass(&self) -> Q {
        self.pieces.iter().map(|(a, b, v)| (b - a) * v).sum()
    }

    /// Density value at `s` (0 outside the pieces).
    pub fn value(&self, s: &Q) -> Q {
        for (a, b, v) in &self.pieces {
            if a <= s && s < b {
                return v.clone();
            }
        }
        Q::zero()
    }

    /// `G(s) = ∫_{-∞}^s ρ`.
    pub fn cdf(&self, s: &Q) -> Q {
        let mut acc = Q::zero();
        for (a, b, v) in &self.pieces {
            if s <= a {
                break;
            }
            let hi = if s < b { s } else { b };
            acc += (hi - a) * v;
        }
        acc
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("piece_lo,piece_hi,value\n");
        for (a, b, v) in &self.pieces {
            let _ = writeln!(s, "{},{},{}", to_f64(a), to_f64(b), to_f64(v));
        }
        s
    }
}

/// `ρ_E(s) = H^{n-1}(E(s)) / |E|`, one piece per occupied row.
pub fn slice_density(e: &LatticeSet) -> Result<DensityProfile> {
    if e.dim() < 2 {
        return Err(Error::NeedsFibers);
    }
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = BigInt::from(e.denom());
    let total = e.cell_count();
    let mut pieces = Vec::new();
    for (row, c) in e.slice_counts()? {
        // value = (c / m^{n-1}) / (total / m^n) = c m / total
        let v = Q::new(BigInt::from(c) * &m, BigInt::from(total));
        pieces.push((Q::new(BigInt::from(row), m.clone()), Q::new(BigInt::from(row + 1), m.clone()), v));
    }
    DensityProfile::new(pieces)
}

/// One linear piece of `T`: `[s0, s1) -> [t0, t1)` with slope `ρ_a / ρ_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportPiece {
    pub s0: Q,
    pub s1: Q,
    pub t0: Q,
    pub t1: Q,
    pub rho_a: Q,
    pub rho_b: Q,
}

impl TransportPiece {
    /// `T'` on the piece.
    pub fn slope(&self) -> Q {
        &self.rho_a / &self.rho_b
    }

    pub fn eval(&self, s: &Q) -> Q {
        &self.t0 + (s - &self.s0) * self.slope()
    }

    pub fn mass(&self) -> Q {
        (&self.s1 - &self.s0) * &self.rho_a
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportMap {
    pub pieces: Vec<TransportPiece>,
}

impl TransportMap {
    /// `T(s)` for `s` in the support of `ρ_A`.
    pub fn eval(&self, s: &Q) -> Option<Q> {
        let i = self.pieces.partition_point(|p| p.s1 <= *s);
        let p = self.pieces.get(i)?;
        (p.s0 <= *s).then(|| p.eval(s))
    }

    pub fn is_monotone(&self) -> bool {
        self.pieces.iter().all(|p| p.t0 <= p.t1 && p.s0 < p.s1)
            && self.pieces.windows(2).all(|w| w[0].t1 <= w[1].t0 && w[0].s1 <= w[1].s0)
    }

    /// Mass balance `ρ_a (s1 - s0) = ρ_b (t1 - t0)` on every piece, and for
    /// every piece of `ρ_B` the preimage carries exactly its mass.
    pub fn verify_pushforward(&self, rho_b: &DensityProfile) -> bool {
        if !self
            .pieces
            .iter()
            .all(|p| (&p.s1 - &p.s0) * &p.rho_a == (&p.t1 - &p.t0) * &p.rho_b)
        {
            return false;
        }
        rho_b.pieces.iter().all(|(b0, b1, v)| {
            let target = (b1 - b0) * v;
            let got: Q = self
                .pieces
                .iter()
                .filter(|p| p.t0 >= *b0 && p.t1 <= *b1)
                .map(|p| p.mass())
                .sum();
            got == target
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("piece_lo,piece_hi,value\n");
        for p in &self.pieces {
            let _ = writeln!(s, "{},{},{}", to_f64(&p.s0), to_f64(&p.s1), to_f64(&p.t0));
        }
        s
    }
}

/// `T = G_B^{-1} ∘ G_A`, built by merging the two mass distributions.
pub fn monotone_rearrangement(rho_a: &DensityProfile, rho_b: &DensityProfile) -> Result<TransportMap> {
    if rho_a.mass() != Q::one() || rho_b.mass() != Q::one() {
        return Err(Error::NotNormalized);
    }
    let pa: Vec<_> = rho_a.pieces.iter().filter(|p| p.2.is_positive()).cloned().collect();
    let pb: Vec<_> = rho_b.pieces.iter().filter(|p| p.2.is_positive()).cloned().collect();
    let (mut i, mut j) = (0, 0);
    let mut sa = pa[0].0.clone();
    let mut sb = pb[0].0.clone();
    let mut out = Vec::new();
    while i < pa.len() && j < pb.len() {
        let (_, a1, va) = &pa[i];
        let (_, b1, vb) = &pb[j];
        let left_a = (a1 - &sa) * va;
        let left_b = (b1 - &sb) * vb;
        let chunk = if left_a < left_b { left_a.clone() } else { left_b.clone() };
        let na = if chunk == left_a { a1.clone() } else { &sa + &chunk / va };
        let nb = if chunk == left_b { b1.clone() } else { &sb + &chunk / vb };
        out.push(TransportPiece {
            s0: sa.clone(),
            s1: na.clone(),
            t0: sb.clone(),
            t1: nb.clone(),
            rho_a: va.clone(),
            rho_b: vb.clone(),
        });
        sa = na;
        sb = nb;
        if chunk == left_a {
            i += 1;
            if i < pa.len() {
                sa = pa[i].0.clone();
            }
        }
        if chunk == left_b {
            j += 1;
            if j < pb.len() {
                sb = pb[j].0.clone();
            }
        }
    }
    Ok(TransportMap { pieces: out })
}

/// `∫ |ρ_A(s) / ρ_B(T(s)) - 1| ρ_A(s) ds`, exact.
pub fn transport_ratio_integral(map: &TransportMap) -> Q {
    map.pieces
        .iter()
        .map(|p| (p.slope() - Q::one()).abs() * p.mass())
        .sum()
}

/// Data on one sub-piece where the slice deficit integrand is constant.
#[derive(Clone, Debug)]
pub struct DeficitPiece {
    pub s0: Q,
    pub s1: Q,
    /// `H^{n-1}(S(T_t(s)))`
    pub h_s: Q,
    /// `H^{n-1}(A(s))`
    pub h_a: Q,
    /// `H^{n-1}(B(T(s)))`
    pub h_b: Q,
    /// `t + (1-t) T'(s)`
    pub weight: Q,
    /// Enclosure of `e_{n-1}(s)`.
    pub e: Bracket,
    pub e_lo_q: Q,
    pub e_hi_q: Q,
}

/// The μ-factors on one transport piece.
#[derive(Clone, Debug)]
pub struct MuPiece {
    pub s0: Q,
    pub s1: Q,
    /// `μ_1 = .. = μ_{n-1}`
    pub mu1: f64,
    /// `μ_1^{n-1}`, exact.
    pub mu1_pow: Q,
    pub mu_n: Q,
}

#[derive(Clone, Debug)]
pub struct SliceDeficitReport {
    pub n: usize,
    pub t: Q,
    pub vol_a: Q,
    pub vol_b: Q,
    pub vol_s: Q,
    pub pieces: Vec<DeficitPiece>,
    /// Enclosure of `∫ e_{n-1}(s) (t + (1-t) T'(s)) ds`.
    pub integral: Bracket,
    /// Enclosure of `|S| - (t|A|^{1/n} + (1-t)|B|^{1/n})^n`.
    pub deficit: Bracket,
    /// Width of the integral enclosure (the certified quadrature error).
    pub quad_error: f64,
    /// `∫ H^{n-1}(S(T_t(s))) (t + (1-t)T') ds`, exact; bounded by `|S|`.
    pub change_of_variables: Q,
    pub mu: Vec<MuPiece>,
    pub ratio_integral: Q,
    pub map: TransportMap,
}

impl SliceDeficitReport {
    /// The slice inequality is consistent with the certified enclosures.
    pub fn holds(&self) -> bool {
        self.deficit.hi >= self.integral.lo
    }

    /// Smallest certified lower bound of `e_{n-1}` over the pieces.
    pub fn min_e(&self) -> f64 {
        self.pieces.iter().map(|p| p.e.lo).fold(f64::INFINITY, f64::min)
    }

    /// `μ_n μ_1^{n-1} = ((1-t)/t)^n |B| / |A|` on every piece.
    pub fn mu_identity_holds(&self) -> bool {
        let r = (Q::one() - &self.t) / &self.t;
        let target = pow_q(&r, self.n as u32) * &self.vol_b / &self.vol_a;
        self.mu.iter().all(|m| &m.mu_n * &m.mu1_pow == target)
    }

    pub fn e_profile_csv(&self) -> String {
        let mut s = String::from("piece_lo,piece_hi,value\n");
        for p in &self.pieces {
            let _ = writeln!(s, "{},{},{}", to_f64(&p.s0), to_f64(&p.s1), p.e.mid());
        }
        s
    }
}

/// `(t x^{1/k} + (1-t) y^{1/k})^k` enclosed in rationals, `k` in 1..=2.
fn mean_power_bracket(x: &Q, y: &Q, t: &Q, k: u32) -> (Q, Q) {
    let s = Q::one() - t;
    if k == 1 {
        let v = t * x + &s * y;
        return (v.clone(), v);
    }
    let rx = nth_root_bracket(x, k);
    let ry = nth_root_bracket(y, k);
    let lo = t * from_f64(rx.lo) + &s * from_f64(ry.lo);
    let hi = t * from_f64(rx.hi) + &s * from_f64(ry.hi);
    (pow_q(&lo, k), pow_q(&hi, k))
}

/// Evaluates the slice decomposition of the deficit for `n` in {2, 3}.
pub fn slice_deficit(a: &LatticeSet, b: &LatticeSet, t: &Q) -> Result<SliceDeficitReport> {
    let (a, b) = LatticeSet::reconcile(a, b)?;
    let n = a.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::NeedsFibers);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateSupport);
    }
    let (_, q) = split_t(t)?;
    let s_set = convex_combination(&a, &b, t)?;
    let rho_a = slice_density(&a)?;
    let rho_b = slice_density(&b)?;
    let map = monotone_rearrangement(&rho_a, &rho_b)?;
    let (vol_a, vol_b, vol_s) = (a.measure(), b.measure(), s_set.measure());
    let one_t = Q::one() - t;
    let fine = a.denom() * q;
    let fine_q = Q::from_integer(BigInt::from(fine));
    let s_rows = s_set.slice_counts()?;
    let fine_base = Q::from_integer(BigInt::from(fine).pow(n as u32 - 1));
    let k = n as u32 - 1;

    let mut pieces = Vec::new();
    let mut mu = Vec::new();
    let (mut int_lo, mut int_hi) = (Q::zero(), Q::zero());
    let mut cov = Q::zero();
    let ratio = &one_t / t;
    for p in &map.pieces {
        let slope = p.slope();
        let h_a = &vol_a * &p.rho_a;
        let h_b = &vol_b * &p.rho_b;
        let weight = t + &one_t * &slope;
        let mu1_pow = pow_q(&ratio, k) * &h_b / &h_a;
        let mu1 = if k == 1 { to_f64(&mu1_pow) } else { to_f64(&mu1_pow).sqrt() };
        mu.push(MuPiece {
            s0: p.s0.clone(),
            s1: p.s1.clone(),
            mu1,
            mu1_pow,
            mu_n: &ratio * &slope,
        });
        let (m_lo, m_hi) = mean_power_bracket(&h_a, &h_b, t, k);
        // T_t(s) = u0 + weight (s - s0)
        let u0 = t * &p.s0 + &one_t * &p.t0;
        let u1 = t * &p.s1 + &one_t * &p.t1;
        let mut cuts = vec![p.s0.clone()];
        let k0: BigInt = (&u0 * &fine_q).floor().to_integer() + 1;
        let k1 = (&u1 * &fine_q).ceil().to_integer();
        let mut kk = k0;
        while kk < k1 {
            let u = Q::new(kk.clone(), BigInt::from(fine));
            cuts.push(&p.s0 + (&u - &u0) / &weight);
            kk += 1;
        }
        cuts.push(p.s1.clone());
        for w in cuts.windows(2) {
            let (c0, c1) = (&w[0], &w[1]);
            if c0 >= c1 {
                continue;
            }
            let mid_u = &u0 + (((c0 + c1) / Q::from_integer(2.into())) - &p.s0) * &weight;
            let row = (mid_u * &fine_q).floor().to_integer().to_i64().unwrap_or(i64::MAX);
            let h_s = Q::from_integer(BigInt::from(s_rows.get(&row).copied().unwrap_or(0))) / &fine_base;
            let e_lo_q = &h_s - &m_hi;
            let e_hi_q = &h_s - &m_lo;
            let len = c1 - c0;
            int_lo += &e_lo_q * &weight * &len;
            int_hi += &e_hi_q * &weight * &len;
            cov += &h_s * &weight * &len;
            pieces.push(DeficitPiece {
                s0: c0.clone(),
                s1: c1.clone(),
                h_s,
                h_a: h_a.clone(),
                h_b: h_b.clone(),
                weight: weight.clone(),
                e: Bracket {
                    lo: f64_below(&e_lo_q),
                    hi: f64_above(&e_hi_q),
                },
                e_lo_q,
                e_hi_q,
            });
        }
    }
    let integral = Bracket {
        lo: f64_below(&int_lo),
        hi: f64_above(&int_hi),
    };
    let (d_lo, d_hi) = deficit_power_bracket(&vol_s, &vol_a, &vol_b, t, n as u32);
    let deficit = Bracket {
        lo: f64_below(&d_lo),
        hi: f64_above(&d_hi),
    };
    let ratio_integral = transport_ratio_integral(&map);
    Ok(SliceDeficitReport {
        n,
        t: t.clone(),
        vol_a,
        vol_b,
        vol_s,
        pieces,
        quad_error: integral.hi - integral.lo,
        integral,
        deficit,
        change_of_variables: cov,
        mu,
        ratio_integral,
        map,
    })
}

/// Rational enclosure of `|S| - (t|A|^{1/n} + (1-t)|B|^{1/n})^n`.
fn deficit_power_bracket(vs: &Q, va: &Q, vb: &Q, t: &Q, n: u32) -> (Q, Q) {
    let s = Q::one() - t;
    let ra = nth_root_bracket(va, n);
    let rb = nth_root_bracket(vb, n);
    let lo = t * from_f64(ra.lo) + &s * from_f64(rb.lo);
    let hi = t * from_f64(ra.hi) + &s * from_f64(rb.hi);
    let (mut dlo, mut dhi) = (vs - pow_q(&hi, n), vs - pow_q(&lo, n));
    match crate::num::compare_with_mean_power(vs, va, vb, t, n) {
        std::cmp::Ordering::Equal => {
            dlo = Q::zero();
            dhi = Q::zero();
        }
        std::cmp::Ordering::Greater => {
            if dlo.is_negative() {
                dlo = Q::zero();
            }
        }
        std::cmp::Ordering::Less => {
            if dhi.is_positive() {
                dhi = Q::zero();
            }
        }
    }
    (dlo, dhi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{qf, qi};

    #[test]
    fn uniform_to_half_interval() {
        let a = DensityProfile::uniform(qi(0), qi(1)).unwrap();
        let b = DensityProfile::uniform(qi(0), qf(1, 2)).unwrap();
        let t = monotone_rearrangement(&a, &b).unwrap();
        assert_eq!(t.pieces.len(), 1);
        assert_eq!(t.pieces[0].slope(), qf(1, 2));
        assert_eq!(t.eval(&qf(3, 5)), Some(qf(3, 10)));
        assert_eq!(transport_ratio_integral(&t), qf(1, 2));
        assert!(t.verify_pushforward(&b));
    }

    #[test]
    fn identical_densities_give_identity() {
        let e = LatticeSet::from_cells(2, 2, [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 3, 0]]).unwrap();
        let r = slice_density(&e).unwrap();
        assert_eq!(r.mass(), qi(1));
        let t = monotone_rearrangement(&r, &r).unwrap();
        for p in &t.pieces {
            assert_eq!(p.s0, p.t0);
            assert_eq!(p.s1, p.t1);
        }
        assert_eq!(transport_ratio_integral(&t), qi(0));
    }

    #[test]
    fn jumps_across_gaps() {
        let a = DensityProfile::uniform(qi(0), qi(2)).unwrap();
        let b = DensityProfile::new(vec![(qi(0), qi(1), qf(1, 2)), (qi(3), qi(4), qf(1, 2))]).unwrap();
        let t = monotone_rearrangement(&a, &b).unwrap();
        assert_eq!(t.eval(&qf(1, 2)), Some(qf(1, 2)));
        assert_eq!(t.eval(&qi(1)), Some(qi(3)));
        assert!(t.is_monotone());
        assert!(t.verify_pushforward(&b));
    }

    #[test]
    fn cube_has_zero_slice_deficit() {
        for n in [2, 3] {
            let c = LatticeSet::unit_cube(n, 2).unwrap();
            let r = slice_deficit(&c, &c, &qf(1, 3)).unwrap();
            assert_eq!(r.integral, Bracket { lo: 0.0, hi: 0.0 });
            assert_eq!(r.deficit, Bracket { lo: 0.0, hi: 0.0 });
            assert!(r.holds());
            assert!(r.mu_identity_holds());
        }
    }

    #[test]
    fn staircase_density() {
        let e = LatticeSet::from_cells(2, 2, [[0, 0, 0], [1, 0, 0], [1, 1, 0]]).unwrap();
        let r = slice_density(&e).unwrap();
        // rows of 2 and 1 cells, |E| = 3/4: values (2/2)/(3/4), (1/2)/(3/4)
        assert_eq!(r.pieces[0].2, qf(4, 3));
        assert_eq!(r.pieces[1].2, qf(2, 3));
    }
}
