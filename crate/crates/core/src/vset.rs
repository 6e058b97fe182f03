//! Compact sets in R^n (n = 1, 2, 3) as finite unions of closed lattice cells.
//!
//! A point is written `x = (y, s)` with `s` the last coordinate. Cells are
//! stored column by column: for every base index `y` the set of occupied
//! `s`-indices is kept as sorted, disjoint, non-adjacent half-open runs. This
//! form is canonical, so structural equality is set equality at a fixed
//! denominator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{best_rational, fmt_q, nth_root_bracket, pow_q, to_f64, Q};

/// Cell index padded to three coordinates; unused trailing entries are 0.
pub type Cell = [i64; 3];
/// Base index of a column (first `dim - 1` coordinates, padded).
pub type Key = [i64; 2];
/// Half-open run `[lo, hi)` of cell indices along the last axis.
pub type Run = (i64, i64);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSet {
    dim: usize,
    denom: u64,
    cols: BTreeMap<Key, Vec<Run>>,
}

pub(crate) fn key_of(dim: usize, c: &Cell) -> (Key, i64) {
    match dim {
        1 => ([0, 0], c[0]),
        2 => ([c[0], 0], c[1]),
        _ => ([c[0], c[1]], c[2]),
    }
}

pub(crate) fn cell_of(dim: usize, k: &Key, s: i64) -> Cell {
    match dim {
        1 => [s, 0, 0],
        2 => [k[0], s, 0],
        _ => [k[0], k[1], s],
    }
}

/// Sorts and coalesces runs in place into canonical form.
pub(crate) fn normalize_runs(runs: &mut Vec<Run>) {
    runs.retain(|r| r.0 < r.1);
    runs.sort_unstable();
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for &(lo, hi) in runs.iter() {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    *runs = out;
}

fn runs_len(runs: &[Run]) -> u64 {
    runs.iter().map(|r| (r.1 - r.0) as u64).sum()
}

fn runs_intersect(a: &[Run], b: &[Run]) -> Vec<Run> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn runs_difference(a: &[Run], b: &[Run]) -> Vec<Run> {
    let mut out = Vec::new();
    let mut j = 0;
    for &(lo, hi) in a {
        let mut cur = lo;
        while j < b.len() && b[j].1 <= cur {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].0 < hi {
            if b[k].0 > cur {
                out.push((cur, b[k].0));
            }
            cur = cur.max(b[k].1);
            k += 1;
        }
        if cur < hi {
            out.push((cur, hi));
        }
    }
    out
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

impl LatticeSet {
    pub fn empty(dim: usize, denom: u64) -> Result<Self> {
        check_dim(dim)?;
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(LatticeSet {
            dim,
            denom,
            cols: BTreeMap::new(),
        })
    }

    /// Builds a set from cells; duplicates are merged silently.
    pub fn from_cells<I: IntoIterator<Item = Cell>>(dim: usize, denom: u64, cells: I) -> Result<Self> {
        let mut cols: BTreeMap<Key, Vec<Run>> = BTreeMap::new();
        let mut e = Self::empty(dim, denom)?;
        for c in cells {
            let (k, s) = key_of(dim, &c);
            cols.entry(k).or_default().push((s, s + 1));
        }
        for runs in cols.values_mut() {
            normalize_runs(runs);
        }
        e.cols = cols;
        Ok(e)
    }

    /// Builds a set from per-column runs (any order, overlaps allowed).
    pub fn from_runs(dim: usize, denom: u64, mut cols: BTreeMap<Key, Vec<Run>>) -> Result<Self> {
        let mut e = Self::empty(dim, denom)?;
        cols.retain(|_, runs| {
            normalize_runs(runs);
            !runs.is_empty()
        });
        e.cols = cols;
        Ok(e)
    }

    /// Axis-aligned box of cells `lo[i] <= k[i] < hi[i]`.
    pub fn boxed(dim: usize, denom: u64, lo: Cell, hi: Cell) -> Result<Self> {
        let mut cols = BTreeMap::new();
        let (klo, slo) = key_of(dim, &lo);
        let (khi, shi) = key_of(dim, &hi);
        if slo < shi {
            let y1 = if dim >= 2 { klo[0]..khi[0] } else { 0..1 };
            for a in y1 {
                let y2 = if dim == 3 { klo[1]..khi[1] } else { 0..1 };
                for b in y2 {
                    cols.insert([a, b], vec![(slo, shi)]);
                }
            }
        }
        Self::from_runs(dim, denom, cols)
    }

    /// The unit cube `[0,1]^dim` at denominator `m`.
    pub fn unit_cube(dim: usize, m: u64) -> Result<Self> {
        let m = m as i64;
        Self::boxed(dim, m as u64, [0, 0, 0], [m, m, m])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn columns(&self) -> &BTreeMap<Key, Vec<Run>> {
        &self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn cell_count(&self) -> u64 {
        self.cols.values().map(|r| runs_len(r)).sum()
    }

    pub fn contains_cell(&self, c: &Cell) -> bool {
        let (k, s) = key_of(self.dim, c);
        self.cols
            .get(&k)
            .is_some_and(|runs| runs.iter().any(|&(lo, hi)| lo <= s && s < hi))
    }

    /// Cells in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let dim = self.dim;
        self.cols
            .iter()
            .flat_map(move |(k, runs)| runs.iter().flat_map(move |&(lo, hi)| (lo..hi).map(move |s| cell_of(dim, k, s))))
    }

    /// Volume of one cell, `m^-dim`.
    pub fn cell_volume(&self) -> Q {
        Q::new(BigInt::one(), BigInt::from(self.denom).pow(self.dim as u32))
    }

    /// Exact Lebesgue measure `|cells| / m^dim`.
    pub fn measure(&self) -> Q {
        Q::from_integer(BigInt::from(self.cell_count())) * self.cell_volume()
    }

    /// Same set at denominator `k * m`.
    pub fn refine(&self, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroDenominator);
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let ki = k as i64;
        let mut cols = BTreeMap::new();
        for (key, runs) in &self.cols {
            let scaled: Vec<Run> = runs.iter().map(|&(lo, hi)| (lo * ki, hi * ki)).collect();
            let ra = if self.dim >= 2 { key[0] * ki..key[0] * ki + ki } else { 0..1 };
            for a in ra {
                let rb = if self.dim == 3 { key[1] * ki..key[1] * ki + ki } else { 0..1 };
                for b in rb {
                    cols.insert([a, b], scaled.clone());
                }
            }
        }
        Ok(LatticeSet {
            dim: self.dim,
            denom: self.denom * k,
            cols,
        })
    }

    /// Refines to the given multiple of the current denominator.
    pub fn refine_to(&self, denom: u64) -> Result<Self> {
        if !denom.is_multiple_of(self.denom) {
            return Err(Error::Invalid(format!("{denom} is not a multiple of {}", self.denom)));
        }
        self.refine(denom / self.denom)
    }

    /// Brings two sets to the lcm of their denominators.
    pub fn reconcile(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch(a.dim, b.dim));
        }
        let l = a.denom.lcm(&b.denom);
        Ok((a.refine_to(l)?, b.refine_to(l)?))
    }

    fn combine(&self, other: &Self, op: fn(&[Run], &[Run]) -> Vec<Run>, keep_left_only: bool, keep_right_only: bool) -> Result<Self> {
        let (a, b) = Self::reconcile(self, other)?;
        let mut cols = BTreeMap::new();
        for (k, ra) in &a.cols {
            match b.cols.get(k) {
                Some(rb) => {
                    let r = op(ra, rb);
                    if !r.is_empty() {
                        cols.insert(*k, r);
                    }
                }
                None if keep_left_only => {
                    cols.insert(*k, ra.clone());
                }
                None => {}
            }
        }
        if keep_right_only {
            for (k, rb) in &b.cols {
                if !a.cols.contains_key(k) {
                    cols.insert(*k, rb.clone());
                }
            }
        }
        Ok(LatticeSet {
            dim: a.dim,
            denom: a.denom,
            cols,
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        fn u(a: &[Run], b: &[Run]) -> Vec<Run> {
            let mut v: Vec<Run> = a.iter().chain(b).copied().collect();
            normalize_runs(&mut v);
            v
        }
        self.combine(other, u, true, true)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.combine(other, runs_intersect, false, false)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.combine(other, runs_difference, true, false)
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Set equality regardless of denominator.
    pub fn same_set(&self, other: &Self) -> Result<bool> {
        let (a, b) = Self::reconcile(self, other)?;
        Ok(a == b)
    }

    /// `|E Δ F|`, exact.
    pub fn symmetric_difference_measure(&self, other: &Self) -> Result<Q> {
        let (a, b) = Self::reconcile(self, other)?;
        let n = a.difference(&b)?.cell_count() + b.difference(&a)?.cell_count();
        Ok(Q::from_integer(BigInt::from(n)) * a.cell_volume())
    }

    /// Shift by a lattice vector (in cells).
    pub fn translate(&self, v: Cell) -> Self {
        let (dk, ds) = key_of(self.dim, &v);
        let cols = self
            .cols
            .iter()
            .map(|(k, runs)| {
                (
                    [k[0] + dk[0], k[1] + dk[1]],
                    runs.iter().map(|&(lo, hi)| (lo + ds, hi + ds)).collect(),
                )
            })
            .collect();
        LatticeSet {
            dim: self.dim,
            denom: self.denom,
            cols,
        }
    }

    /// Inclusive-exclusive bounding box of cell indices, `None` when empty.
    pub fn bounding_box(&self) -> Option<(Cell, Cell)> {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for (k, runs) in &self.cols {
            let first = cell_of(self.dim, k, runs[0].0);
            let last = cell_of(self.dim, k, runs[runs.len() - 1].1 - 1);
            for i in 0..self.dim {
                lo[i] = lo[i].min(first[i]);
                hi[i] = hi[i].max(last[i] + 1);
            }
        }
        if self.cols.is_empty() {
            return None;
        }
        for i in self.dim..3 {
            lo[i] = 0;
            hi[i] = 0;
        }
        Some((lo, hi))
    }

    /// Corner points of the cells (in units of `1/m`) that can be extreme
    /// for the convex hull: per column, the base corners at the lowest and
    /// highest `s`.
    pub fn hull_candidates(&self) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for (k, runs) in &self.cols {
            let s0 = runs[0].0;
            let s1 = runs[runs.len() - 1].1;
            match self.dim {
                1 => {
                    out.push([s0, 0, 0]);
                    out.push([s1, 0, 0]);
                }
                2 => {
                    for a in [k[0], k[0] + 1] {
                        out.push([a, s0, 0]);
                        out.push([a, s1, 0]);
                    }
                }
                _ => {
                    for a in [k[0], k[0] + 1] {
                        for b in [k[1], k[1] + 1] {
                            out.push([a, b, s0]);
                            out.push([a, b, s1]);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All cell corners (in units of `1/m`).
    pub fn corners(&self) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for c in self.cells() {
            for mask in 0..(1usize << self.dim) {
                let mut p = c;
                for (i, pi) in p.iter_mut().enumerate().take(self.dim) {
                    *pi += ((mask >> i) & 1) as i64;
                }
                out.push(p);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn need_fibers(&self) -> Result<()> {
        if self.dim < 2 {
            Err(Error::NeedsFibers)
        } else {
            Ok(())
        }
    }

    /// Fiber lengths `H^1(E_y)` over the base.
    pub fn fiber_profile(&self) -> Result<FiberProfile> {
        self.need_fibers()?;
        Ok(FiberProfile {
            base_dim: self.dim - 1,
            denom: self.denom,
            counts: self.cols.iter().map(|(k, r)| (*k, runs_len(r))).collect(),
        })
    }

    /// Cells per horizontal row: `H^{n-1}(E(s)) = count * m^{1-n}` for
    /// `s` in row `r`. Rows with no cells are omitted.
    pub fn slice_counts(&self) -> Result<BTreeMap<i64, u64>> {
        self.need_fibers()?;
        let mut diff: BTreeMap<i64, i64> = BTreeMap::new();
        for runs in self.cols.values() {
            for &(lo, hi) in runs {
                *diff.entry(lo).or_default() += 1;
                *diff.entry(hi).or_default() -= 1;
            }
        }
        let mut out = BTreeMap::new();
        let mut acc = 0i64;
        let mut prev: Option<i64> = None;
        for (&r, &d) in &diff {
            if let Some(p) = prev {
                if acc > 0 {
                    for row in p..r {
                        out.insert(row, acc as u64);
                    }
                }
            }
            acc += d;
            prev = Some(r);
        }
        Ok(out)
    }

    /// Exact `H^{n-1}(E(s))` for `s` in the open row `r`.
    pub fn slice_measure(&self, row: i64) -> Result<Q> {
        self.need_fibers()?;
        let n = self
            .cols
            .values()
            .filter(|runs| runs.iter().any(|&(lo, hi)| lo <= row && row < hi))
            .count();
        Ok(Q::new(BigInt::from(n), BigInt::from(self.denom).pow(self.dim as u32 - 1)))
    }

    /// The horizontal slice at row `r` as an `(n-1)`-dimensional set.
    pub fn slice(&self, row: i64) -> Result<Self> {
        self.need_fibers()?;
        let cells = self
            .cols
            .iter()
            .filter(|(_, runs)| runs.iter().any(|&(lo, hi)| lo <= row && row < hi))
            .map(|(k, _)| [k[0], k[1], 0]);
        Self::from_cells(self.dim - 1, self.denom, cells)
    }

    /// `π(E)`: the base points with a nonempty fiber.
    pub fn projection(&self) -> Result<Self> {
        self.need_fibers()?;
        Self::from_cells(self.dim - 1, self.denom, self.cols.keys().map(|k| [k[0], k[1], 0]))
    }

    /// `{y : H^1(E_y) > λ}` at the same denominator.
    pub fn superlevel_set(&self, lambda: &Q) -> Result<Self> {
        self.need_fibers()?;
        let m = Q::from_integer(BigInt::from(self.denom));
        let thresh = lambda * m;
        let cells = self
            .cols
            .iter()
            .filter(|(_, r)| Q::from_integer(BigInt::from(runs_len(r))) > thresh)
            .map(|(k, _)| [k[0], k[1], 0]);
        Self::from_cells(self.dim - 1, self.denom, cells)
    }

    pub fn to_vset(&self) -> String {
        let mut s = format!("vset {} {}\ncells {}\n", self.dim, self.denom, self.cell_count());
        for c in self.cells() {
            let parts: Vec<String> = c[..self.dim].iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        s
    }

    pub fn parse_vset(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (i, head) = lines.next().ok_or_else(|| perr(0, "missing header"))?;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 3 || h[0] != "vset" {
            return Err(perr(i, "expected `vset <dim> <denom>`"));
        }
        let dim: usize = h[1].parse().map_err(|_| perr(i, "bad dim"))?;
        let denom: u64 = h[2].parse().map_err(|_| perr(i, "bad denom"))?;
        check_dim(dim)?;
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        let (i, cl) = lines.next().ok_or_else(|| perr(i + 1, "missing cell count"))?;
        let c: Vec<&str> = cl.split_whitespace().collect();
        if c.len() != 2 || c[0] != "cells" {
            return Err(perr(i, "expected `cells <count>`"));
        }
        let count: usize = c[1].parse().map_err(|_| perr(i, "bad count"))?;
        let mut seen = std::collections::BTreeSet::new();
        for (i, l) in lines.by_ref().take(count) {
            let v: Vec<i64> = l
                .split_whitespace()
                .map(|x| x.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(i, "bad integer"))?;
            if v.len() != dim {
                return Err(perr(i, "wrong arity"));
            }
            let mut cell = [0i64; 3];
            cell[..dim].copy_from_slice(&v);
            if !seen.insert(cell) {
                return Err(perr(i, "duplicate cell"));
            }
        }
        if seen.len() != count {
            return Err(perr(i, "fewer cells than declared"));
        }
        if let Some((i, _)) = lines.next() {
            return Err(perr(i, "trailing data"));
        }
        Self::from_cells(dim, denom, seen)
    }
}

/// Fiber lengths of a set, stored as cell counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberProfile {
    pub base_dim: usize,
    pub denom: u64,
    pub counts: BTreeMap<Key, u64>,
}

impl FiberProfile {
    /// `H^1(E_y)` for base cell `y` (zero outside the support).
    pub fn length(&self, y: &Key) -> Q {
        Q::new(BigInt::from(self.counts.get(y).copied().unwrap_or(0)), BigInt::from(self.denom))
    }

    pub fn sup_length(&self) -> Q {
        Q::new(BigInt::from(self.counts.values().copied().max().unwrap_or(0)), BigInt::from(self.denom))
    }

    /// `Σ_y H^1(E_y) m^{-(n-1)}`, which equals `|E|`.
    pub fn integral(&self) -> Q {
        let total: u64 = self.counts.values().sum();
        Q::new(BigInt::from(total), BigInt::from(self.denom).pow(self.base_dim as u32 + 1))
    }
}

/// A lattice set under the volume-preserving map `(y, s) -> (λ y, λ^{1-n} s)`.
#[derive(Clone, Debug)]
pub struct ScaledPair {
    pub a: LatticeSet,
    pub b: LatticeSet,
    /// Snapped rational λ actually applied.
    pub lambda: Q,
    /// `|λ_snap - λ_exact|` (upper bound, exact when λ_exact is rational).
    pub snap_error: f64,
    pub y_scale: Q,
    pub s_scale: Q,
}

/// The four quantities of the normalization lemma, on the scaled pair.
#[derive(Clone, Debug)]
pub struct ProductBounds {
    pub sup_a: Q,
    pub sup_b: Q,
    pub proj_a: Q,
    pub proj_b: Q,
}

impl ProductBounds {
    /// `sup_y H^1(A_y) · H^{n-1}(π(A))`
    pub fn own_a(&self) -> Q {
        &self.sup_a * &self.proj_a
    }
    pub fn own_b(&self) -> Q {
        &self.sup_b * &self.proj_b
    }
    /// `sup_y H^1(A_y) · H^{n-1}(π(B))`
    pub fn cross_a(&self) -> Q {
        &self.sup_a * &self.proj_b
    }
    pub fn cross_b(&self) -> Q {
        &self.sup_b * &self.proj_a
    }
    /// Left side of the normalization inequality.
    pub fn total(&self) -> Q {
        &self.sup_a + &self.sup_b + &self.proj_a + &self.proj_b
    }
    /// Cross products must not exceed `|S| / (t (1-t)^{n-1})`; own products
    /// must be at least the respective volumes.
    pub fn check(&self, vol_a: &Q, vol_b: &Q, vol_s: &Q, t: &Q, n: u32) -> bool {
        let cap = vol_s / (t * pow_q(&(Q::one() - t), n - 1));
        let cap_swapped = vol_s / ((Q::one() - t) * pow_q(t, n - 1));
        self.cross_a() <= cap && self.cross_b() <= cap_swapped && self.own_a() >= *vol_a && self.own_b() >= *vol_b
    }
}

impl ScaledPair {
    pub fn measure_a(&self) -> Q {
        self.a.measure() * pow_q(&self.y_scale, self.a.dim() as u32 - 1) * &self.s_scale
    }

    pub fn measure_b(&self) -> Q {
        self.b.measure() * pow_q(&self.y_scale, self.b.dim() as u32 - 1) * &self.s_scale
    }

    pub fn product_bounds(&self) -> Result<ProductBounds> {
        let n = self.a.dim() as u32;
        let py = pow_q(&self.y_scale, n - 1);
        let fa = self.a.fiber_profile()?;
        let fb = self.b.fiber_profile()?;
        Ok(ProductBounds {
            sup_a: fa.sup_length() * &self.s_scale,
            sup_b: fb.sup_length() * &self.s_scale,
            proj_a: self.a.projection()?.measure() * &py,
            proj_b: self.b.projection()?.measure() * &py,
        })
    }
}

/// Applies the normalizing axis scaling with `λ^{n-1} H^{n-1}(π(A)) = τ^{-n}`,
/// λ snapped to a rational with denominator at most `2^16`.
pub fn normalize_m_tau(a: &LatticeSet, b: &LatticeSet, t: &Q, tau: &Q) -> Result<ScaledPair> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let n = a.dim() as u32;
    if n < 2 {
        return Err(Error::NeedsFibers);
    }
    if !(t.is_positive() && *t < Q::one()) {
        return Err(Error::BadT(fmt_q(t)));
    }
    let half = Q::new(BigInt::one(), BigInt::from(2));
    if !(tau.is_positive() && *tau <= half) {
        return Err(Error::BadTau(fmt_q(tau)));
    }
    let pa = a.projection()?.measure();
    if pa.is_zero() {
        return Err(Error::EmptyProjection);
    }
    let target = (pow_q(tau, n) * &pa).recip();
    let (lambda, snap_error) = if n == 2 {
        (target, 0.0)
    } else {
        let br = nth_root_bracket(&target, n - 1);
        let snap = best_rational(br.mid(), 1 << 16);
        let err = (to_f64(&snap) - br.lo).abs().max((to_f64(&snap) - br.hi).abs());
        let err = if pow_q(&snap, n - 1) == target { 0.0 } else { err };
        (snap, err)
    };
    let s_scale = pow_q(&lambda, n - 1).recip();
    Ok(ScaledPair {
        a: a.clone(),
        b: b.clone(),
        y_scale: lambda.clone(),
        s_scale,
        lambda,
        snap_error,
    })
}

/// Exact measure of `A ∩ (B + v)` for a translation `v` with rational
/// coordinates; `A`, `B` must share the denominator.
pub fn translated_overlap(a: &LatticeSet, b: &LatticeSet, v: &[Q; 3]) -> Result<Q> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (a, b) = LatticeSet::reconcile(a, b)?;
    let dim = a.dim();
    let m = BigInt::from(a.denom());
    // v in cell units: integer part plus fractional part in [0,1)
    let mut ip = [0i64; 3];
    let mut fp: [Q; 3] = [Q::zero(), Q::zero(), Q::zero()];
    for i in 0..dim {
        let w = &v[i] * Q::from_integer(m.clone());
        let fl = w.floor();
        ip[i] = fl.to_integer().to_i64().ok_or_else(|| Error::Invalid("translation too large".into()))?;
        fp[i] = w - fl;
    }
    // a shifted unit cube meets at most 2^dim lattice cells; overlap with
    // cell (c + e) has length (1 - f) on e = 0 and f on e = 1 per axis
    let mut total = Q::zero();
    for mask in 0..(1usize << dim) {
        let mut w = Q::one();
        let mut off = [0i64; 3];
        for i in 0..dim {
            let bit = (mask >> i) & 1;
            off[i] = ip[i] + bit as i64;
            w *= if bit == 0 { Q::one() - &fp[i] } else { fp[i].clone() };
        }
        if w.is_zero() {
            continue;
        }
        let shifted = b.translate(off);
        let n = a.intersection(&shifted)?.cell_count();
        total += w * Q::from_integer(BigInt::from(n));
    }
    Ok(total * a.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qf;

    fn staircase() -> LatticeSet {
        LatticeSet::from_cells(2, 2, [[0, 0, 0], [1, 0, 0], [1, 1, 0]]).unwrap()
    }

    #[test]
    fn measures() {
        assert_eq!(LatticeSet::unit_cube(2, 4).unwrap().measure(), qf(1, 1));
        assert_eq!(staircase().measure(), qf(3, 4));
        assert_eq!(LatticeSet::unit_cube(3, 3).unwrap().cell_count(), 27);
    }

    #[test]
    fn fibers_and_superlevels() {
        let e = staircase();
        let f = e.fiber_profile().unwrap();
        assert_eq!(f.length(&[0, 0]), qf(1, 2));
        assert_eq!(f.length(&[1, 0]), qf(1, 1));
        assert_eq!(f.length(&[5, 0]), qf(0, 1));
        assert_eq!(f.integral(), e.measure());
        let lvl = e.superlevel_set(&qf(3, 4)).unwrap();
        assert_eq!(lvl.cells().collect::<Vec<_>>(), vec![[1, 0, 0]]);
        let sq = LatticeSet::unit_cube(2, 4).unwrap();
        assert_eq!(sq.superlevel_set(&qf(1, 2)).unwrap().measure(), qf(1, 1));
        assert!(sq.superlevel_set(&qf(1, 1)).unwrap().is_empty());
        assert!(LatticeSet::unit_cube(1, 4).unwrap().fiber_profile().is_err());
    }

    #[test]
    fn slices() {
        let e = staircase();
        let sc = e.slice_counts().unwrap();
        assert_eq!(sc.get(&0), Some(&2));
        assert_eq!(sc.get(&1), Some(&1));
        assert_eq!(e.slice_measure(0).unwrap(), qf(1, 1));
        assert_eq!(e.slice(1).unwrap().measure(), qf(1, 2));
    }

    #[test]
    fn set_ops_and_refine() {
        let a = LatticeSet::boxed(2, 4, [0, 0, 0], [3, 3, 0]).unwrap();
        let b = LatticeSet::boxed(2, 2, [1, 1, 0], [2, 2, 0]).unwrap();
        let d = a.symmetric_difference_measure(&b).unwrap();
        assert_eq!(d, a.measure() + b.measure() - qf(2, 1) * a.intersection(&b).unwrap().measure());
        assert_eq!(a.refine(3).unwrap().measure(), a.measure());
        assert!(a.refine(2).unwrap().same_set(&a).unwrap());
        assert_eq!(a.symmetric_difference_measure(&a).unwrap(), qf(0, 1));
    }

    #[test]
    fn vset_round_trip_and_errors() {
        let e = staircase();
        let text = e.to_vset();
        assert_eq!(text, "vset 2 2\ncells 3\n0 0\n1 0\n1 1\n");
        let back = LatticeSet::parse_vset(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_vset(), text);
        assert!(LatticeSet::parse_vset("vset 2 2\ncells 2\n0 0\n0 0\n").is_err());
        assert!(LatticeSet::parse_vset("vset 2 2\ncells 1\n0 0 0\n").is_err());
        assert!(LatticeSet::parse_vset("vset 4 2\ncells 0\n").is_err());
    }

    #[test]
    fn normalization_choice_of_lambda() {
        // projection of measure 2, tau = 1/2: λ · 2 = 4
        let a = LatticeSet::boxed(2, 2, [0, 0, 0], [4, 1, 0]).unwrap();
        let p = normalize_m_tau(&a, &a, &qf(1, 2), &qf(1, 2)).unwrap();
        assert_eq!(p.lambda, qf(2, 1));
        assert_eq!(p.measure_a(), a.measure());
        let pb = p.product_bounds().unwrap();
        assert_eq!(pb.proj_a, qf(4, 1));
    }

    #[test]
    fn overlap_under_fractional_shift() {
        let a = LatticeSet::unit_cube(2, 1).unwrap();
        let v = [qf(1, 3), qf(1, 4), Q::zero()];
        let o = translated_overlap(&a, &a, &v).unwrap();
        assert_eq!(o, qf(2, 3) * qf(3, 4));
    }
}
