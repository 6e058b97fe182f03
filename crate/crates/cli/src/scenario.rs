//! Scenario families and the random stream that drives them.
//!
//! The stream is ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed with the 64-bit
//! seed in little-endian order followed by 24 zero bytes, nonce and stream
//! 0. Draws are consumed as 64-bit words `w`:
//!
//! * integer in `[0, n)`: `floor(w * n / 2^64)`
//! * real in `[0, 1)`: `(w >> 11) * 2^-53`
//!
//! Any implementation of ChaCha8 with the same key reproduces the sets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use bmstab_core::minkowski::IntervalSet;
use bmstab_core::num::{fmt_q, qf, Q};
use bmstab_core::symmetry::counterexample;
use bmstab_core::{Error, LatticeSet, Result};
use num_bigint::BigInt;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic word stream.
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Stream(ChaCha8Rng::from_seed(key))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Integer in `[lo, hi]`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    /// Real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    HomotheticConvex,
    PerturbedSquare,
    BoundaryBites,
    RandomBoxes,
    Counterexample,
    IntervalUnions,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::HomotheticConvex,
        Family::PerturbedSquare,
        Family::BoundaryBites,
        Family::RandomBoxes,
        Family::Counterexample,
        Family::IntervalUnions,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::HomotheticConvex => "homothetic-convex",
            Family::PerturbedSquare => "perturbed-square",
            Family::BoundaryBites => "boundary-bites",
            Family::RandomBoxes => "random-boxes",
            Family::Counterexample => "counterexample",
            Family::IntervalUnions => "interval-unions",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Family::ALL
            .iter()
            .find(|f| f.to_string() == s)
            .copied()
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

/// Everything that determines a generated pair.
#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub family: Family,
    pub n: usize,
    /// Lattice denominator `m`.
    pub m: u64,
    pub t: Q,
    pub tau: Q,
    /// Perturbation size.
    pub eps: f64,
    pub seed: u64,
    /// Distance parameter of the counterexample family.
    pub l: i64,
}

impl ScenarioSpec {
    pub fn new(family: Family, n: usize, m: u64, eps: f64, seed: u64) -> Self {
        ScenarioSpec {
            family,
            n,
            m,
            t: qf(1, 2),
            tau: qf(1, 2),
            eps,
            seed,
            l: 4,
        }
    }

    pub fn id(&self) -> String {
        format!(
            "{}-n{}-m{}-e{:e}-s{}",
            self.family, self.n, self.m, self.eps, self.seed
        )
    }

    pub fn describe(&self) -> String {
        format!(
            "family={} n={} m={} t={} tau={} eps={} seed={} l={}",
            self.family,
            self.n,
            self.m,
            fmt_q(&self.t),
            fmt_q(&self.tau),
            self.eps,
            self.seed,
            self.l
        )
    }
}

/// A generated pair.
#[derive(Clone, Debug)]
pub enum Pair {
    Lattice(LatticeSet, LatticeSet),
    Intervals(IntervalSet, IntervalSet),
}

impl Pair {
    /// Lattice form; interval unions become one-dimensional lattice sets
    /// on `1/m`.
    pub fn lattice(&self, m: u64) -> Result<(LatticeSet, LatticeSet)> {
        match self {
            Pair::Lattice(a, b) => Ok((a.clone(), b.clone())),
            Pair::Intervals(a, b) => Ok((intervals_to_lattice(a, m)?, intervals_to_lattice(b, m)?)),
        }
    }
}

fn intervals_to_lattice(e: &IntervalSet, m: u64) -> Result<LatticeSet> {
    let mq = Q::from_integer(BigInt::from(m));
    let mut cells = Vec::new();
    for (a, b) in e.components() {
        let (a, b) = (a * &mq, b * &mq);
        if !a.is_integer() || !b.is_integer() {
            return Err(Error::Invalid("interval endpoint off the lattice".into()));
        }
        let (a, b): (i64, i64) = (
            a.to_integer()
                .try_into()
                .map_err(|_| Error::Invalid("endpoint too large".into()))?,
            b.to_integer()
                .try_into()
                .map_err(|_| Error::Invalid("endpoint too large".into()))?,
        );
        cells.extend((a..b).map(|x| [x, 0, 0]));
    }
    LatticeSet::from_cells(1, m, cells)
}

fn cube_cells(n: usize, lo: i64, hi: i64) -> Vec<[i64; 3]> {
    let r = |i: usize| if i < n { lo..hi } else { 0..1 };
    let mut out = Vec::new();
    for x in r(0) {
        for y in r(1) {
            for z in r(2) {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Draws `k` distinct items, in draw order.
fn sample<T: Clone>(s: &mut Stream, pool: &[T], k: usize) -> Vec<T> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(pool.len()) {
        let j = s.below(idx.len() as u64) as usize;
        out.push(pool[idx.swap_remove(j)].clone());
    }
    out
}

/// Generates the pair described by `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<Pair> {
    if !(spec.eps >= 0.0 && spec.eps < 1.0) {
        return Err(Error::Invalid(format!(
            "eps must lie in [0, 1), got {}",
            spec.eps
        )));
    }
    if !(1..=3).contains(&spec.n) {
        return Err(Error::BadDimension(spec.n));
    }
    if spec.m == 0 {
        return Err(Error::ZeroDenominator);
    }
    let n = spec.n;
    let m = spec.m as i64;
    let vol_cells = (m as f64).powi(n as i32);
    let mut s = Stream::new(spec.seed);
    let cube = || LatticeSet::from_cells(n, spec.m, cube_cells(n, 0, m));
    match spec.family {
        Family::HomotheticConvex => {
            let mut k = (m as f64 * (1.0 + spec.eps).powf(1.0 / n as f64)).floor() as i64;
            // guard against rounding above 1 + eps
            while ((k as f64) / m as f64).powi(n as i32) > 1.0 + spec.eps {
                k -= 1;
            }
            Ok(Pair::Lattice(
                cube()?,
                LatticeSet::from_cells(n, spec.m, cube_cells(n, 0, k.max(m)))?,
            ))
        }
        Family::PerturbedSquare => {
            let k = (spec.eps * vol_cells / 2.0).floor() as usize;
            let inner: Vec<[i64; 3]> = cube_cells(n, 0, m)
                .into_iter()
                .filter(|c| (0..n).any(|i| c[i] == 0 || c[i] == m - 1))
                .collect();
            let outer: Vec<[i64; 3]> = cube_cells(n, -1, m + 1)
                .into_iter()
                .filter(|c| (0..n).filter(|&i| c[i] == -1 || c[i] == m).count() == 1)
                .collect();
            let removed: HashSet<[i64; 3]> = sample(&mut s, &inner, k).into_iter().collect();
            let added = sample(&mut s, &outer, k);
            let cells = cube_cells(n, 0, m)
                .into_iter()
                .filter(|c| !removed.contains(c))
                .chain(added);
            Ok(Pair::Lattice(
                cube()?,
                LatticeSet::from_cells(n, spec.m, cells)?,
            ))
        }
        Family::BoundaryBites => {
            let total = (spec.eps * vol_cells).floor() as usize;
            let mut removed: HashSet<[i64; 3]> = HashSet::new();
            let bites = 1 + s.below(3) as usize;
            for b in 0..bites {
                let want = total / bites + usize::from(b < total % bites);
                bite(&mut s, n, m, want, &mut removed);
            }
            let cells = cube_cells(n, 0, m)
                .into_iter()
                .filter(|c| !removed.contains(c));
            Ok(Pair::Lattice(
                cube()?,
                LatticeSet::from_cells(n, spec.m, cells)?,
            ))
        }
        Family::RandomBoxes => {
            let mut boxes = || -> Result<LatticeSet> {
                let mut cells = HashSet::new();
                for _ in 0..1 + s.below(3) {
                    let mut lo = [0i64; 3];
                    let mut hi = [1i64; 3];
                    for i in 0..n {
                        let side = s.range((m / 4).max(1), m);
                        lo[i] = s.range(0, m);
                        hi[i] = lo[i] + side;
                    }
                    for x in lo[0]..hi[0] {
                        for y in lo[1]..hi[1] {
                            for z in lo[2]..hi[2] {
                                cells.insert([x, y, z]);
                            }
                        }
                    }
                }
                LatticeSet::from_cells(n, spec.m, cells)
            };
            let a = boxes()?;
            let b = boxes()?;
            Ok(Pair::Lattice(a, b))
        }
        Family::Counterexample => {
            let c = counterexample(n, spec.m, spec.l)?;
            let a = c.outer_set()?;
            Ok(Pair::Lattice(a.clone(), a))
        }
        Family::IntervalUnions => {
            if n != 1 {
                return Err(Error::Invalid("interval-unions needs n = 1".into()));
            }
            let h = (spec.eps * m as f64).floor() as i64;
            let mut holed = || -> Result<IntervalSet> {
                if h == 0 {
                    return IntervalSet::new(vec![(qf(0, 1), qf(1, 1))]);
                }
                let at = s.range(1, (m - h - 1).max(1));
                let q = |x: i64| Q::new(BigInt::from(x), BigInt::from(m));
                IntervalSet::new(vec![(q(0), q(at)), (q(at + h), q(m))])
            };
            let a = holed()?;
            let b = holed()?;
            Ok(Pair::Intervals(a, b))
        }
    }
}

/// Removes `want` new cells from the cube `[0, m)^n`, growing a block
/// inward from a random face.
fn bite(s: &mut Stream, n: usize, m: i64, want: usize, removed: &mut HashSet<[i64; 3]>) {
    if want == 0 {
        return;
    }
    let axis = s.below(n as u64) as usize;
    let from_low = s.below(2) == 0;
    let width = if n == 1 {
        1
    } else {
        let w = (want as f64).powf(1.0 / (n as f64)).ceil() as i64;
        w.clamp(1, m)
    };
    let others: Vec<usize> = (0..n).filter(|&i| i != axis).collect();
    let offs: Vec<i64> = others.iter().map(|_| s.range(0, m - width)).collect();
    let mut got = 0usize;
    for depth in 0..m {
        let coord = if from_low { depth } else { m - 1 - depth };
        let mut layer: Vec<[i64; 3]> = Vec::new();
        let span = |k: usize| {
            if k < others.len() {
                offs[k]..offs[k] + width
            } else {
                0..1
            }
        };
        for u in span(0) {
            for v in span(1) {
                let mut c = [0i64; 3];
                c[axis] = coord;
                if !others.is_empty() {
                    c[others[0]] = u;
                }
                if others.len() > 1 {
                    c[others[1]] = v;
                }
                layer.push(c);
            }
        }
        for c in layer {
            if got == want {
                return;
            }
            if removed.insert(c) {
                got += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let mut a = Stream::new(7);
        let mut b = Stream::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let u = Stream::new(1).unit();
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn families_respect_eps() {
        for fam in [
            Family::HomotheticConvex,
            Family::PerturbedSquare,
            Family::BoundaryBites,
        ] {
            for n in 1..=3 {
                let spec = ScenarioSpec::new(fam, n, 8, 0.05, 3);
                let (a, b) = generate(&spec).unwrap().lattice(8).unwrap();
                let one = qf(1, 1);
                let da = bmstab_core::num::to_f64(&(a.measure() - &one)).abs();
                let db = bmstab_core::num::to_f64(&(b.measure() - &one)).abs();
                assert!(da <= 0.05 && db <= 0.05, "{fam} n={n}");
            }
        }
    }

    #[test]
    fn eps_one_is_infeasible() {
        assert!(generate(&ScenarioSpec::new(Family::BoundaryBites, 2, 8, 1.0, 0)).is_err());
    }

    #[test]
    fn zero_eps_homothetic_is_equal() {
        let (a, b) = generate(&ScenarioSpec::new(Family::HomotheticConvex, 2, 8, 0.0, 0))
            .unwrap()
            .lattice(8)
            .unwrap();
        assert!(a.same_set(&b).unwrap());
    }
}
