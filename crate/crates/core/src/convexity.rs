//! Convex hulls and volumes in dimension at most three, concave envelopes,
//! the concavity fit on lattice grids, the four-point residual and the
//! endpoint-anchored linear fit.
//!
//! Hulls are computed with exact predicates over any integer-like scalar
//! (`i128`, `BigInt`, `BigRational`). Envelope values start as `f64` but are
//! lifted exactly (every `f64` is a dyadic rational), so the envelope is the
//! exact upper hull of the data rounded once at the end.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{from_f64, to_f64, Q};
use crate::vset::LatticeSet;

/// Scalar with exact ring arithmetic and a total order.
pub trait Exact: Clone + Ord + Num + Signed {}
impl<T: Clone + Ord + Num + Signed> Exact for T {}

fn sub<T: Exact>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone(), a[2].clone() - b[2].clone()]
}

fn cross<T: Exact>(u: &[T; 3], v: &[T; 3]) -> [T; 3] {
    [
        u[1].clone() * v[2].clone() - u[2].clone() * v[1].clone(),
        u[2].clone() * v[0].clone() - u[0].clone() * v[2].clone(),
        u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone(),
    ]
}

fn dot<T: Exact>(u: &[T; 3], v: &[T; 3]) -> T {
    u[0].clone() * v[0].clone() + u[1].clone() * v[1].clone() + u[2].clone() * v[2].clone()
}

/// Six times the signed volume of `(a, b, c, d)`; positive when `d` lies on
/// the side of `(b - a) × (c - a)`.
pub fn orient3<T: Exact>(a: &[T; 3], b: &[T; 3], c: &[T; 3], d: &[T; 3]) -> T {
    dot(&cross(&sub(b, a), &sub(c, a)), &sub(d, a))
}

/// Twice the signed area of `(o, a, b)`.
pub fn orient2<T: Exact>(o: &[T; 2], a: &[T; 2], b: &[T; 2]) -> T {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

/// Strictly convex hull vertices in counter-clockwise order (indices into
/// `pts`). Fewer than three indices means a degenerate hull.
pub fn hull2<T: Exact>(pts: &[[T; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i].cmp(&pts[j]));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && orient2(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]) <= T::zero() {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && orient2(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]) <= T::zero() {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Twice the area of a counter-clockwise polygon.
pub fn area2<T: Exact>(pts: &[[T; 2]], ring: &[usize]) -> T {
    let mut s = T::zero();
    for k in 0..ring.len() {
        let a = &pts[ring[k]];
        let b = &pts[ring[(k + 1) % ring.len()]];
        s = s + a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone();
    }
    s
}

/// Triangulated convex hull with outward orientation, or `None` when all
/// points are coplanar. Points on the boundary that are not vertices are
/// skipped; coplanar neighbouring triangles are allowed.
pub fn hull3<T: Exact>(pts: &[[T; 3]]) -> Option<Vec<[usize; 3]>> {
    let n = pts.len();
    let i0 = 0;
    let i1 = (1..n).find(|&i| pts[i] != pts[i0])?;
    let d01 = sub(&pts[i1], &pts[i0]);
    let i2 = (1..n).find(|&i| {
        let c = cross(&d01, &sub(&pts[i], &pts[i0]));
        !(c[0].is_zero() && c[1].is_zero() && c[2].is_zero())
    })?;
    let i3 = (1..n).find(|&i| !orient3(&pts[i0], &pts[i1], &pts[i2], &pts[i]).is_zero())?;
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (f, other) in [([i0, i1, i2], i3), ([i0, i1, i3], i2), ([i0, i2, i3], i1), ([i1, i2, i3], i0)] {
        let f = if orient3(&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[other]) > T::zero() {
            [f[0], f[2], f[1]]
        } else {
            f
        };
        faces.push(f);
    }
    let mut alive = vec![true; 4];
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for p in 0..n {
        if p == i0 || p == i1 || p == i2 || p == i3 {
            continue;
        }
        let mut visible = Vec::new();
        for (k, f) in faces.iter().enumerate() {
            if alive[k] && orient3(&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[p]) > T::zero() {
                visible.push(k);
            }
        }
        if visible.is_empty() {
            continue;
        }
        edges.clear();
        for &k in &visible {
            let f = faces[k];
            edges.insert((f[0], f[1]));
            edges.insert((f[1], f[2]));
            edges.insert((f[2], f[0]));
            alive[k] = false;
        }
        let mut horizon = Vec::new();
        for &k in &visible {
            let f = faces[k];
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if !edges.contains(&(b, a)) {
                    horizon.push((a, b));
                }
            }
        }
        for (a, b) in horizon {
            faces.push([a, b, p]);
            alive.push(true);
        }
        if faces.len() > 64 && alive.iter().filter(|x| !**x).count() * 2 > faces.len() {
            let kept: Vec<[usize; 3]> = faces.iter().zip(&alive).filter(|(_, a)| **a).map(|(f, _)| *f).collect();
            faces = kept;
            alive = vec![true; faces.len()];
        }
    }
    Some(faces.into_iter().zip(alive).filter(|(_, a)| *a).map(|(f, _)| f).collect())
}

/// Six times the volume enclosed by outward triangles.
pub fn volume6<T: Exact>(pts: &[[T; 3]], faces: &[[usize; 3]]) -> T {
    let o = &pts[faces[0][0]];
    let mut s = T::zero();
    for f in faces {
        s = s + orient3(&pts[f[0]], &pts[f[1]], &pts[f[2]], o);
    }
    -s
}

/// Convex polytope with rational vertices in dimension 1, 2 or 3.
#[derive(Clone, Debug)]
pub struct Polytope {
    pub dim: usize,
    /// Vertices; in 2D in counter-clockwise order.
    pub vertices: Vec<[Q; 3]>,
    /// Outward triangles (3D only).
    pub faces: Vec<[usize; 3]>,
    volume: Q,
}

impl Polytope {
    /// Hull of rational points; degenerate hulls get volume 0.
    pub fn from_points(dim: usize, pts: &[[Q; 3]]) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptySet);
        }
        match dim {
            1 => {
                let lo = pts.iter().map(|p| p[0].clone()).min().unwrap();
                let hi = pts.iter().map(|p| p[0].clone()).max().unwrap();
                let z = Q::zero();
                Ok(Polytope {
                    dim,
                    volume: &hi - &lo,
                    vertices: vec![[lo, z.clone(), z.clone()], [hi, z.clone(), z]],
                    faces: vec![],
                })
            }
            2 => {
                let p2: Vec<[Q; 2]> = pts.iter().map(|p| [p[0].clone(), p[1].clone()]).collect();
                let ring = hull2(&p2);
                let volume = if ring.len() >= 3 {
                    area2(&p2, &ring) / Q::from_integer(2.into())
                } else {
                    Q::zero()
                };
                Ok(Polytope {
                    dim,
                    vertices: ring.iter().map(|&i| pts[i].clone()).collect(),
                    faces: vec![],
                    volume,
                })
            }
            3 => match hull3(pts) {
                Some(faces) => {
                    let mut map: HashMap<usize, usize> = HashMap::new();
                    let mut vertices = Vec::new();
                    let faces: Vec<[usize; 3]> = faces
                        .iter()
                        .map(|f| {
                            f.map(|i| {
                                *map.entry(i).or_insert_with(|| {
                                    vertices.push(pts[i].clone());
                                    vertices.len() - 1
                                })
                            })
                        })
                        .collect();
                    let volume = volume6(&vertices, &faces) / Q::from_integer(6.into());
                    Ok(Polytope {
                        dim,
                        vertices,
                        faces,
                        volume,
                    })
                }
                None => {
                    let mut v = pts.to_vec();
                    v.sort();
                    v.dedup();
                    Ok(Polytope {
                        dim,
                        vertices: v,
                        faces: vec![],
                        volume: Q::zero(),
                    })
                }
            },
            d => Err(Error::BadDimension(d)),
        }
    }

    /// `co(E)` for a lattice set, from its cell corners.
    pub fn hull_of(e: &LatticeSet) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::EmptySet);
        }
        let m = BigInt::from(e.denom());
        let pts: Vec<[Q; 3]> = e
            .hull_candidates()
            .iter()
            .map(|c| c.map(|x| Q::new(BigInt::from(x), m.clone())))
            .collect();
        Self::from_points(e.dim(), &pts)
    }

    pub fn volume(&self) -> &Q {
        &self.volume
    }

    pub fn is_degenerate(&self) -> bool {
        self.volume.is_zero()
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[Q; 3]) -> bool {
        match self.dim {
            1 => self.vertices[0][0] <= x[0] && x[0] <= self.vertices[1][0],
            2 => {
                let v = &self.vertices;
                if v.len() < 3 {
                    return false;
                }
                let p = [x[0].clone(), x[1].clone()];
                (0..v.len()).all(|k| {
                    let a = [v[k][0].clone(), v[k][1].clone()];
                    let b = [v[(k + 1) % v.len()][0].clone(), v[(k + 1) % v.len()][1].clone()];
                    !orient2(&a, &b, &p).is_negative()
                })
            }
            _ => {
                !self.faces.is_empty()
                    && self.faces.iter().all(|f| {
                        !orient3(&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]], x).is_positive()
                    })
            }
        }
    }

    /// Exact barycenter (the vertex average for degenerate hulls).
    pub fn barycenter(&self) -> [Q; 3] {
        let z = || Q::zero();
        if self.is_degenerate() {
            let n = Q::from_integer(BigInt::from(self.vertices.len()));
            let mut c = [z(), z(), z()];
            for v in &self.vertices {
                for i in 0..3 {
                    c[i] += &v[i];
                }
            }
            return c.map(|x| x / &n);
        }
        match self.dim {
            1 => [(&self.vertices[0][0] + &self.vertices[1][0]) / Q::from_integer(2.into()), z(), z()],
            2 => {
                let v = &self.vertices;
                let (mut cx, mut cy, mut a6) = (z(), z(), z());
                for k in 0..v.len() {
                    let (p, q) = (&v[k], &v[(k + 1) % v.len()]);
                    let cr = &p[0] * &q[1] - &q[0] * &p[1];
                    cx += (&p[0] + &q[0]) * &cr;
                    cy += (&p[1] + &q[1]) * &cr;
                    a6 += cr;
                }
                a6 *= Q::from_integer(3.into());
                [cx / &a6, cy / &a6, z()]
            }
            _ => {
                let o = self.vertices[self.faces[0][0]].clone();
                let mut c = [z(), z(), z()];
                let mut tot = z();
                for f in &self.faces {
                    let (a, b, d) = (&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]]);
                    let w = -orient3(a, b, d, &o);
                    for i in 0..3 {
                        c[i] += &w * (&a[i] + &b[i] + &d[i] + &o[i]);
                    }
                    tot += w;
                }
                let den = tot * Q::from_integer(4.into());
                c.map(|x| x / &den)
            }
        }
    }

    /// Image under `x -> c x + v`, `c > 0`.
    pub fn affine(&self, c: &Q, v: &[Q; 3]) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|p| [c * &p[0] + &v[0], c * &p[1] + &v[1], c * &p[2] + &v[2]])
            .collect();
        let d = crate::num::pow_q(c, self.dim as u32);
        Polytope {
            dim: self.dim,
            vertices,
            faces: self.faces.clone(),
            volume: &self.volume * d,
        }
    }

    /// Edges as vertex pairs.
    fn edges(&self) -> Vec<(usize, usize)> {
        match self.dim {
            2 => (0..self.vertices.len()).map(|k| (k, (k + 1) % self.vertices.len())).collect(),
            3 => {
                let mut set = HashSet::new();
                for f in &self.faces {
                    for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                        set.insert((a.min(b), a.max(b)));
                    }
                }
                let mut v: Vec<_> = set.into_iter().collect();
                v.sort_unstable();
                v
            }
            _ => vec![(0, 1)],
        }
    }

    /// Supporting hyperplanes `n · x <= d`.
    fn halfspaces(&self) -> Vec<([Q; 3], Q)> {
        match self.dim {
            2 => {
                let v = &self.vertices;
                (0..v.len())
                    .map(|k| {
                        let (a, b) = (&v[k], &v[(k + 1) % v.len()]);
                        // inside is to the left of a -> b
                        let n = [&b[1] - &a[1], &a[0] - &b[0], Q::zero()];
                        let d = &n[0] * &a[0] + &n[1] * &a[1];
                        (n, d)
                    })
                    .collect()
            }
            _ => self
                .faces
                .iter()
                .map(|f| {
                    let (a, b, c) = (&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]]);
                    let n = cross(&sub(b, a), &sub(c, a));
                    let d = dot(&n, a);
                    (n, d)
                })
                .collect(),
        }
    }

    /// Exact volume of `self ∩ [lo, hi]` (axis-aligned box).
    pub fn box_intersection_volume(&self, lo: &[Q; 3], hi: &[Q; 3]) -> Q {
        let dim = self.dim;
        if self.is_degenerate() {
            return Q::zero();
        }
        if dim == 1 {
            let a = if self.vertices[0][0] > lo[0] { &self.vertices[0][0] } else { &lo[0] };
            let b = if self.vertices[1][0] < hi[0] { &self.vertices[1][0] } else { &hi[0] };
            return if a < b { b - a } else { Q::zero() };
        }
        let in_box = |p: &[Q; 3]| (0..dim).all(|i| lo[i] <= p[i] && p[i] <= hi[i]);
        let corners: Vec<[Q; 3]> = (0..(1usize << dim))
            .map(|mask| {
                let mut p = [Q::zero(), Q::zero(), Q::zero()];
                for i in 0..dim {
                    p[i] = if (mask >> i) & 1 == 1 { hi[i].clone() } else { lo[i].clone() };
                }
                p
            })
            .collect();
        let inside: Vec<bool> = corners.iter().map(|c| self.contains(c)).collect();
        if inside.iter().all(|x| *x) {
            return (0..dim).map(|i| &hi[i] - &lo[i]).product();
        }
        let mut cand: Vec<[Q; 3]> = corners.iter().zip(&inside).filter(|(_, i)| **i).map(|(c, _)| c.clone()).collect();
        cand.extend(self.vertices.iter().filter(|v| in_box(v)).cloned());
        // polytope edges against box facets
        for (a, b) in self.edges() {
            let (pa, pb) = (&self.vertices[a], &self.vertices[b]);
            for i in 0..dim {
                for wall in [&lo[i], &hi[i]] {
                    let da = &pa[i] - wall;
                    let db = &pb[i] - wall;
                    if (da.is_positive() && db.is_negative()) || (da.is_negative() && db.is_positive()) {
                        let s = &da / (&da - &db);
                        let p = [0, 1, 2].map(|k| &pa[k] + (&pb[k] - &pa[k]) * &s);
                        if in_box(&p) {
                            cand.push(p);
                        }
                    }
                }
            }
        }
        // box edges against polytope facets
        let hs = self.halfspaces();
        for (ci, c) in corners.iter().enumerate() {
            for i in 0..dim {
                if (ci >> i) & 1 == 1 {
                    continue;
                }
                let e = &corners[ci | (1 << i)];
                for (nrm, d) in &hs {
                    let fa = dot(nrm, c) - d;
                    let fb = dot(nrm, e) - d;
                    if (fa.is_positive() && fb.is_negative()) || (fa.is_negative() && fb.is_positive()) {
                        let s = &fa / (&fa - &fb);
                        let mut p = c.clone();
                        p[i] = &c[i] + (&e[i] - &c[i]) * &s;
                        if self.contains(&p) {
                            cand.push(p);
                        }
                    }
                }
            }
        }
        if cand.len() <= dim {
            return Q::zero();
        }
        cand.sort();
        cand.dedup();
        Polytope::from_points(dim, &cand).map(|p| p.volume).unwrap_or_else(|_| Q::zero())
    }

    /// `|E ∩ K|` for a lattice set `E`, exactly.
    pub fn lattice_intersection_measure(&self, e: &LatticeSet) -> Q {
        let m = BigInt::from(e.denom());
        let side = Q::new(BigInt::one(), m.clone());
        let mut total = Q::zero();
        let mut full = 0u64;
        for c in e.cells() {
            let lo = c.map(|x| Q::new(BigInt::from(x), m.clone()));
            let hi = [&lo[0] + &side, &lo[1] + &side, &lo[2] + &side];
            let v = self.box_intersection_volume(&lo, &hi);
            if v == e.cell_volume() {
                full += 1;
            } else {
                total += v;
            }
        }
        total + Q::from_integer(BigInt::from(full)) * e.cell_volume()
    }

    /// `|E Δ K|`.
    pub fn symmetric_difference_measure(&self, e: &LatticeSet) -> Q {
        e.measure() + &self.volume - Q::from_integer(2.into()) * self.lattice_intersection_measure(e)
    }
}

/// `|co(E)| - |E|` with the hull volume exact.
pub fn hull_excess(e: &LatticeSet) -> Result<Q> {
    Ok(Polytope::hull_of(e)?.volume().clone() - e.measure())
}

/// Real-valued function on a finite set of lattice points `k / denom` in
/// dimension 1 or 2.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub base_dim: usize,
    pub denom: u64,
    pub points: Vec<[i64; 2]>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(base_dim: usize, denom: u64, points: Vec<[i64; 2]>, values: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&base_dim) {
            return Err(Error::BadDimension(base_dim + 1));
        }
        if points.len() != values.len() {
            return Err(Error::Invalid("points and values differ in length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite value".into()));
        }
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(*p) {
                return Err(Error::Invalid("duplicate grid point".into()));
            }
        }
        Ok(GridFunction {
            base_dim,
            denom,
            points,
            values,
        })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Measure attached to each grid point, `denom^{-(n-1)}`.
    pub fn cell_measure(&self) -> f64 {
        (self.denom as f64).powi(-(self.base_dim as i32))
    }

    pub fn coord(&self, p: &[i64; 2]) -> [f64; 2] {
        [p[0] as f64 / self.denom as f64, p[1] as f64 / self.denom as f64]
    }

    fn index(&self) -> HashMap<[i64; 2], usize> {
        self.points.iter().enumerate().map(|(i, p)| (*p, i)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = if self.base_dim == 1 {
            String::from("y1,value\n")
        } else {
            String::from("y1,y2,value\n")
        };
        for (p, v) in self.points.iter().zip(&self.values) {
            let c = self.coord(p);
            if self.base_dim == 1 {
                let _ = writeln!(s, "{},{}", c[0], v);
            } else {
                let _ = writeln!(s, "{},{},{}", c[0], c[1], v);
            }
        }
        s
    }

    /// Reads `y1[,y2],value` rows; coordinates are snapped to `k / denom`.
    pub fn from_csv(text: &str, denom: u64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty csv".into(),
        })?;
        let cols = head.split(',').count();
        let base_dim = cols.checked_sub(1).filter(|d| (1..=2).contains(d)).ok_or(Error::Parse {
            line: 1,
            msg: "expected y1[,y2],value".into(),
        })?;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (i, l) in lines {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: "bad number".into(),
                })?;
            if v.len() != cols {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "wrong column count".into(),
                });
            }
            let snap = |x: f64| (x * denom as f64).round() as i64;
            let p = if base_dim == 1 { [snap(v[0]), 0] } else { [snap(v[0]), snap(v[1])] };
            points.push(p);
            values.push(v[cols - 1]);
        }
        Self::new(base_dim, denom, points, values)
    }
}

/// Common dyadic scale for a list of `f64`: returns integers `z_i` and `e`
/// with `v_i = z_i 2^{-e}`.
fn dyadic_lift(values: &[f64]) -> (Vec<BigInt>, u32) {
    let qs: Vec<Q> = values.iter().map(|v| from_f64(*v)).collect();
    let mut e = 0u32;
    for q in &qs {
        // denominators of f64 rationals are powers of two
        let bits = q.denom().bits() as u32 - 1;
        e = e.max(bits);
    }
    let scale = BigInt::one() << e;
    let zs = qs.iter().map(|q| (q * Q::from_integer(scale.clone())).to_integer()).collect();
    (zs, e)
}

fn ratio_to_f64(num: BigInt, den: BigInt) -> f64 {
    Q::new(num, den).to_f64().unwrap_or(f64::NAN)
}

/// Upper concave envelope on the points of `f`'s own domain (1D base or
/// collinear data).
fn envelope_1d(xs: &[i64], zs: &[BigInt], e: u32) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by_key(|&i| (xs[i], std::cmp::Reverse(zs[i].clone())));
    order.dedup_by_key(|i| xs[*i]);
    // upper hull, left to right
    let mut hull: Vec<usize> = Vec::new();
    for &i in &order {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let o = orient2(
                &[BigInt::from(xs[a]), zs[a].clone()],
                &[BigInt::from(xs[b]), zs[b].clone()],
                &[BigInt::from(xs[i]), zs[i].clone()],
            );
            if o >= BigInt::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let scale = BigInt::one() << e;
    xs.iter()
        .map(|&x| {
            let k = hull.partition_point(|&h| xs[h] <= x);
            if k == 0 {
                return ratio_to_f64(zs[hull[0]].clone(), scale.clone());
            }
            let a = hull[k - 1];
            if xs[a] == x || k == hull.len() {
                return ratio_to_f64(zs[a].clone(), scale.clone());
            }
            let b = hull[k];
            let dx = BigInt::from(xs[b] - xs[a]);
            let num = &zs[a] * &dx + (&zs[b] - &zs[a]) * BigInt::from(x - xs[a]);
            ratio_to_f64(num, dx * &scale)
        })
        .collect()
}

/// Envelope over a 2D base via the upper facets of the lifted hull.
fn envelope_2d<T: Lift>(pts: &[[i64; 2]], zs: &[T], e: u32) -> Option<Vec<f64>> {
    let lifted: Vec<[T; 3]> = pts
        .iter()
        .zip(zs)
        .map(|(p, z)| [T::from_i64(p[0]), T::from_i64(p[1]), z.clone()])
        .collect();
    let faces = hull3(&lifted)?;
    let scale = BigInt::one() << e;
    let upper: Vec<([T; 3], T, [usize; 3])> = faces
        .iter()
        .filter_map(|f| {
            let n = cross(&sub(&lifted[f[1]], &lifted[f[0]]), &sub(&lifted[f[2]], &lifted[f[0]]));
            n[2].is_positive().then(|| {
                let d = dot(&n, &lifted[f[0]]);
                (n, d, *f)
            })
        })
        .collect();
    let index: HashMap<[i64; 2], usize> = pts.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut out: Vec<Option<f64>> = vec![None; pts.len()];
    let eval = |n: &[T; 3], d: &T, p: &[i64; 2]| -> f64 {
        let num: BigInt = (d.clone() - n[0].clone() * T::from_i64(p[0]) - n[1].clone() * T::from_i64(p[1])).into();
        let den: BigInt = n[2].clone().into();
        ratio_to_f64(num, den * &scale)
    };
    for (n, d, f) in &upper {
        let (a, b, c) = (pts[f[0]], pts[f[1]], pts[f[2]]);
        let x0 = a[0].min(b[0]).min(c[0]);
        let x1 = a[0].max(b[0]).max(c[0]);
        let y0 = a[1].min(b[1]).min(c[1]);
        let y1 = a[1].max(b[1]).max(c[1]);
        let o = orient2(&a.map(|x| x as i128), &b.map(|x| x as i128), &c.map(|x| x as i128)).signum();
        for x in x0..=x1 {
            for y in y0..=y1 {
                let p = [x, y];
                let Some(&i) = index.get(&p) else { continue };
                if out[i].is_some() {
                    continue;
                }
                let pi = p.map(|v| v as i128);
                let inside = [(a, b), (b, c), (c, a)].iter().all(|(u, v)| {
                    orient2(&u.map(|x| x as i128), &v.map(|x| x as i128), &pi) * o >= 0
                });
                if inside {
                    out[i] = Some(eval(n, d, &p));
                }
            }
        }
    }
    Some(
        out.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.unwrap_or_else(|| {
                    upper
                        .iter()
                        .map(|(n, d, _)| eval(n, d, &pts[i]))
                        .fold(f64::INFINITY, f64::min)
                })
            })
            .collect(),
    )
}

trait FromI64 {
    fn from_i64(x: i64) -> Self;
}
impl FromI64 for i128 {
    fn from_i64(x: i64) -> Self {
        x as i128
    }
}
impl FromI64 for BigInt {
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
}
trait Lift: Exact + FromI64 + Into<BigInt> {}
impl<T: Exact + FromI64 + Into<BigInt>> Lift for T {}


/// Upper concave envelope of `f` over its own points:
/// `Φ(y) = inf{ℓ(y) : ℓ affine, ℓ >= f on the points}` for `y` in the
/// convex hull of the domain.
pub fn concave_envelope(f: &GridFunction) -> Result<GridFunction> {
    if f.points.is_empty() {
        return Err(Error::EmptySet);
    }
    let (zs, e) = dyadic_lift(&f.values);
    let values = if f.base_dim == 1 {
        let xs: Vec<i64> = f.points.iter().map(|p| p[0]).collect();
        envelope_1d(&xs, &zs, e)
    } else {
        envelope_2d_any(&f.points, &zs, e, &f.values)
    };
    Ok(GridFunction {
        base_dim: f.base_dim,
        denom: f.denom,
        points: f.points.clone(),
        values,
    })
}

fn envelope_2d_any(pts: &[[i64; 2]], zs: &[BigInt], e: u32, raw: &[f64]) -> Vec<f64> {
    let p2: Vec<[i128; 2]> = pts.iter().map(|p| [p[0] as i128, p[1] as i128]).collect();
    if hull2(&p2).len() < 3 {
        // collinear base: parametrize along the line
        let (o, d) = line_param(pts);
        let xs: Vec<i64> = pts.iter().map(|p| (p[0] - o[0]) * d[0] + (p[1] - o[1]) * d[1]).collect();
        return envelope_1d(&xs, zs, e);
    }
    let fits = zs.iter().all(|z| z.bits() <= 80);
    let r = if fits {
        let zi: Vec<i128> = zs.iter().map(|z| z.to_i128().unwrap()).collect();
        envelope_2d(pts, &zi, e)
    } else {
        envelope_2d(pts, zs, e)
    };
    // coplanar lifted points: the data is affine and is its own envelope
    r.unwrap_or_else(|| raw.to_vec())
}

fn line_param(pts: &[[i64; 2]]) -> ([i64; 2], [i64; 2]) {
    let o = pts[0];
    let far = pts.iter().max_by_key(|p| (p[0] - o[0]).abs() + (p[1] - o[1]).abs()).unwrap();
    let (dx, dy) = (far[0] - o[0], far[1] - o[1]);
    let g = num_integer::gcd(dx, dy).max(1);
    (o, [dx / g, dy / g])
}

/// All lattice points in the convex hull of `pts` (1D or 2D base).
pub fn lattice_points_in_hull(base_dim: usize, pts: &[[i64; 2]]) -> Vec<[i64; 2]> {
    if base_dim == 1 {
        let lo = pts.iter().map(|p| p[0]).min().unwrap_or(0);
        let hi = pts.iter().map(|p| p[0]).max().unwrap_or(-1);
        return (lo..=hi).map(|x| [x, 0]).collect();
    }
    let p2: Vec<[i128; 2]> = pts.iter().map(|p| [p[0] as i128, p[1] as i128]).collect();
    let ring = hull2(&p2);
    if ring.len() < 3 {
        let mut v = pts.to_vec();
        if ring.len() == 2 {
            let (a, b) = (pts[ring[0]], pts[ring[1]]);
            let g = num_integer::gcd(b[0] - a[0], b[1] - a[1]).max(1);
            let d = [(b[0] - a[0]) / g, (b[1] - a[1]) / g];
            v = (0..=g).map(|k| [a[0] + k * d[0], a[1] + k * d[1]]).collect();
        }
        v.sort_unstable();
        v.dedup();
        return v;
    }
    let (x0, x1) = (pts.iter().map(|p| p[0]).min().unwrap(), pts.iter().map(|p| p[0]).max().unwrap());
    let (y0, y1) = (pts.iter().map(|p| p[1]).min().unwrap(), pts.iter().map(|p| p[1]).max().unwrap());
    let mut out = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            let q = [x as i128, y as i128];
            if (0..ring.len()).all(|k| orient2(&p2[ring[k]], &p2[ring[(k + 1) % ring.len()]], &q) >= 0) {
                out.push([x, y]);
            }
        }
    }
    out
}

/// Result of the concavity fit.
#[derive(Clone, Debug)]
pub struct EnvelopeFit {
    pub sigma: f64,
    pub varsigma: f64,
    pub tau: f64,
    pub t_prime: f64,
    pub m_hat: f64,
    /// Target exponent `τ / (16 (n-1) |log τ|)`.
    pub beta_target: f64,
    /// Exponent used in the construction.
    pub beta: f64,
    pub gamma: f64,
    /// Truncation level (on the `M̂ = 1` scale).
    pub h: f64,
    /// Points of `Ω` (lattice points of `co(F)`).
    pub omega: Vec<[i64; 2]>,
    /// `Ψ = M̂ (Φ - 2)` on `omega`.
    pub psi_fit: Vec<f64>,
    /// `Φ` on `omega` (unit scale).
    pub phi_env: Vec<f64>,
    /// `φ̄` on `omega` (unit scale).
    pub phi_bar: Vec<f64>,
    /// `∫_F |Ψ - ψ|`.
    pub l1_error: f64,
    /// Fraction of `Ω` points with `Φ = φ̄`.
    pub contact_fraction: f64,
    /// Largest distance from an `Ω` point to the contact set.
    pub contact_gap: f64,
    /// Maximal four-point violation of `ψ` with the given `t'` (unit scale).
    pub residual4: f64,
    /// Level-set integral of hull excesses over `H` and level measures
    /// off `H`, over `s ∈ [-M̂, M̂]` (original scale).
    pub level_excess: f64,
    /// `Ω ∖ F` measure.
    pub hole_measure: f64,
    /// Inner and outer radii of `Ω` about the origin.
    pub r_in: f64,
    pub r_out: f64,
    pub round_ok: bool,
    /// `L1 / (M̂ (σ+ς)^{β_target})`.
    pub calibrated_constant: f64,
}

impl EnvelopeFit {
    /// Compares the error with `C M̂ (σ+ς)^{β_target}`.
    pub fn pass_with(&self, c: f64) -> bool {
        self.l1_error <= c * self.m_hat * (self.sigma + self.varsigma).powf(self.beta_target)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("sigma", self.sigma),
            ("varsigma", self.varsigma),
            ("tau", self.tau),
            ("t_prime", self.t_prime),
            ("m_hat", self.m_hat),
            ("beta_target", self.beta_target),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("h", self.h),
            ("l1_error", self.l1_error),
            ("contact_fraction", self.contact_fraction),
            ("contact_gap", self.contact_gap),
            ("residual4", self.residual4),
            ("level_excess", self.level_excess),
            ("hole_measure", self.hole_measure),
            ("r_in", self.r_in),
            ("r_out", self.r_out),
            ("calibrated_constant", self.calibrated_constant),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "round_ok={}", self.round_ok);
        s
    }
}

/// `τ / (16 (n-1) |log τ|)`.
pub fn beta_target(n: usize, tau: f64) -> f64 {
    tau / (16.0 * (n as f64 - 1.0) * tau.ln().abs())
}

/// `(1/((n-1)|log(τ/2)|)) min{log 2 / 3, |log(1-τ/2)| / 4}`.
pub fn beta_internal(n: usize, tau: f64) -> f64 {
    let a = (2f64).ln() / 3.0;
    let b = (1.0 - tau / 2.0).ln().abs() / 4.0;
    a.min(b) / ((n as f64 - 1.0) * (tau / 2.0).ln().abs())
}

/// Levels `s` in which the hull-excess term is used; the complement uses
/// the level measure.
#[derive(Clone, Debug, Default)]
pub struct LevelIndex {
    /// Closed-open intervals `[a, b)`; empty means all of ℝ.
    pub intervals: Vec<(f64, f64)>,
}

impl LevelIndex {
    pub fn contains(&self, s: f64) -> bool {
        self.intervals.is_empty() || self.intervals.iter().any(|(a, b)| *a <= s && s < *b)
    }
}

/// Lattice set of the cells indexed by the given grid points.
fn cells_of(base_dim: usize, denom: u64, pts: &[[i64; 2]]) -> Result<LatticeSet> {
    LatticeSet::from_cells(base_dim, denom, pts.iter().map(|p| [p[0], p[1], 0]))
}

/// Runs the truncated-envelope construction on `ψ` over `F = ψ.points`.
#[allow(clippy::too_many_arguments)]
pub fn concavity_fit(
    psi: &GridFunction,
    m_hat: f64,
    sigma: f64,
    varsigma: f64,
    tau: f64,
    t_prime: &Q,
    levels: &LevelIndex,
) -> Result<EnvelopeFit> {
    if psi.points.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(tau > 0.0 && tau <= 0.5) {
        return Err(Error::BadTau(tau.to_string()));
    }
    let n = psi.base_dim + 1;
    let omega = lattice_points_in_hull(psi.base_dim, &psi.points);
    if psi.base_dim == 2 {
        let p2: Vec<[i128; 2]> = psi.points.iter().map(|p| [p[0] as i128, p[1] as i128]).collect();
        if hull2(&p2).len() < 3 && omega.len() < 2 {
            return Err(Error::DegenerateDomain);
        }
    } else if omega.len() < 2 {
        return Err(Error::DegenerateDomain);
    }
    let w = psi.cell_measure();
    let idx = psi.index();
    let eps = sigma + varsigma;
    let beta = beta_internal(n, tau);
    let gamma = beta / 2.0;
    let pow_b = if eps > 0.0 { eps.powf(beta) } else { 0.0 };
    let pow_g = if eps > 0.0 { eps.powf(gamma) } else { 0.0 };
    // lift with a quadratic cap, zero off F
    let phi: Vec<f64> = omega
        .iter()
        .map(|p| match idx.get(p) {
            Some(&i) => {
                let y = psi.coord(p);
                let r2 = y[0] * y[0] + y[1] * y[1];
                psi.values[i] / m_hat + 2.0 - 20.0 * pow_b * r2
            }
            None => 0.0,
        })
        .collect();
    // truncation height h = inf{t > 0 : |{φ > t}| <= (σ+ς)^γ}
    let mut sorted = phi.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = (pow_g / w).floor();
    let h = if k >= sorted.len() as f64 {
        0.0
    } else {
        sorted[k as usize].max(0.0)
    };
    let phi_bar: Vec<f64> = phi.iter().map(|v| v.min(h)).collect();
    let env = concave_envelope(&GridFunction {
        base_dim: psi.base_dim,
        denom: psi.denom,
        points: omega.clone(),
        values: phi_bar.clone(),
    })?;
    let phi_env = env.values;
    // undo the lift
    let psi_fit: Vec<f64> = phi_env.iter().map(|v| m_hat * (v - 2.0)).collect();
    let mut l1 = 0.0;
    for (p, v) in psi.points.iter().zip(&psi.values) {
        let j = omega.binary_search(p).expect("F lies in its hull");
        l1 += (psi_fit[j] - v).abs() * w;
    }
    // diagnostics
    let contact: Vec<usize> = (0..omega.len())
        .filter(|&i| (phi_env[i] - phi_bar[i]).abs() <= 1e-12 * (1.0 + phi_bar[i].abs()))
        .collect();
    let contact_fraction = contact.len() as f64 / omega.len() as f64;
    let mut contact_gap: f64 = 0.0;
    for p in &omega {
        let y = psi.coord(p);
        let d = contact
            .iter()
            .map(|&j| {
                let z = psi.coord(&omega[j]);
                ((y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        contact_gap = contact_gap.max(d);
    }
    let unit = GridFunction {
        base_dim: psi.base_dim,
        denom: psi.denom,
        points: psi.points.clone(),
        values: psi.values.iter().map(|v| v / m_hat).collect(),
    };
    let residual4 = four_point_max(&unit, t_prime);
    let level_excess = level_set_excess(psi, m_hat, levels)?;
    let hole_measure = (omega.len() - psi.points.len()) as f64 * w;
    let (r_in, r_out) = radii(psi.base_dim, psi.denom, &omega);
    let nf = n as f64;
    let round_ok = {
        // need r with r_out / (n-1) <= r <= r_in and 1/n < r < n
        let lo = (r_out / (nf - 1.0)).max(1.0 / nf);
        let hi = r_in.min(nf);
        lo <= hi && !(lo == hi && (lo <= 1.0 / nf || hi >= nf))
    };
    let bt = beta_target(n, tau);
    let calibrated_constant = if l1 == 0.0 {
        0.0
    } else if eps == 0.0 {
        f64::INFINITY
    } else {
        l1 / (m_hat * eps.powf(bt))
    };
    Ok(EnvelopeFit {
        sigma,
        varsigma,
        tau,
        t_prime: to_f64(t_prime),
        m_hat,
        beta_target: bt,
        beta,
        gamma,
        h,
        omega,
        psi_fit,
        phi_env,
        phi_bar,
        l1_error: l1,
        contact_fraction,
        contact_gap,
        residual4,
        level_excess,
        hole_measure,
        r_in,
        r_out,
        round_ok,
        calibrated_constant,
    })
}

/// Inradius and circumradius of the hull of grid points about the origin.
fn radii(base_dim: usize, denom: u64, omega: &[[i64; 2]]) -> (f64, f64) {
    let d = denom as f64;
    let r_out = omega
        .iter()
        .map(|p| ((p[0] as f64).powi(2) + (p[1] as f64).powi(2)).sqrt() / d)
        .fold(0.0, f64::max);
    let r_in = if base_dim == 1 {
        let lo = omega.iter().map(|p| p[0]).min().unwrap() as f64 / d;
        let hi = omega.iter().map(|p| p[0]).max().unwrap() as f64 / d;
        if lo <= 0.0 && hi >= 0.0 {
            (-lo).min(hi)
        } else {
            0.0
        }
    } else {
        let p2: Vec<[i128; 2]> = omega.iter().map(|p| [p[0] as i128, p[1] as i128]).collect();
        let ring = hull2(&p2);
        if ring.len() < 3 {
            0.0
        } else {
            let mut r = f64::INFINITY;
            for k in 0..ring.len() {
                let a = p2[ring[k]];
                let b = p2[ring[(k + 1) % ring.len()]];
                let o = orient2(&a, &b, &[0, 0]);
                if o < 0 {
                    return (0.0, r_out);
                }
                let len = (((b[0] - a[0]) as f64).powi(2) + ((b[1] - a[1]) as f64).powi(2)).sqrt();
                r = r.min(o as f64 / len / d);
            }
            r
        }
    };
    (r_in, r_out)
}

/// `∫_H |co({ψ>s}) ∖ {ψ>s}| ds + ∫_{ℝ∖H} |{ψ>s}| ds` over `s ∈ [-M̂, M̂]`,
/// level sets taken as unions of grid cells.
pub fn level_set_excess(psi: &GridFunction, m_hat: f64, levels: &LevelIndex) -> Result<f64> {
    let mut vals: Vec<f64> = psi.values.clone();
    vals.push(-m_hat);
    vals.push(m_hat);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.dedup();
    let mut total = 0.0;
    for w in vals.windows(2) {
        let (s0, s1) = (w[0].max(-m_hat), w[1].min(m_hat));
        if s0 >= s1 {
            continue;
        }
        // for s in [s0, s1): {ψ > s} = {ψ >= s1}
        let pts: Vec<[i64; 2]> = psi
            .points
            .iter()
            .zip(&psi.values)
            .filter(|(_, v)| **v >= w[1])
            .map(|(p, _)| *p)
            .collect();
        if pts.is_empty() {
            continue;
        }
        let cells = cells_of(psi.base_dim, psi.denom, &pts)?;
        // split [s0, s1) by the interval endpoints of H
        let mut cuts = vec![s0, s1];
        for (a, b) in &levels.intervals {
            for c in [*a, *b] {
                if s0 < c && c < s1 {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let excess = to_f64(&hull_excess(&cells)?);
        let meas = to_f64(&cells.measure());
        for c in cuts.windows(2) {
            let mid = 0.5 * (c[0] + c[1]);
            let len = c[1] - c[0];
            total += len * if levels.contains(mid) { excess } else { meas };
        }
    }
    Ok(total)
}

/// Max of `f(y1) + f(y2) - f(y12') - f(y12'')` over quadruples in the
/// domain, exact, with `t'` rational; 0 if no quadruple exists.
fn four_point_max(f: &GridFunction, t_prime: &Q) -> f64 {
    let qs: Vec<Q> = f.values.iter().map(|v| from_f64(*v)).collect();
    match four_point_exact(f, &qs, t_prime) {
        Some(q) => to_f64(&q),
        None => 0.0,
    }
}

/// Grid index of `a y1 + (1-a) y2` when it is a lattice point.
fn combo(a: &Q, y1: &[i64; 2], y2: &[i64; 2]) -> Option<[i64; 2]> {
    let b = Q::one() - a;
    let mut out = [0i64; 2];
    for i in 0..2 {
        let v = a * Q::from_integer(y1[i].into()) + &b * Q::from_integer(y2[i].into());
        if !v.is_integer() {
            return None;
        }
        out[i] = v.to_integer().to_i64()?;
    }
    Some(out)
}

fn four_point_exact(f: &GridFunction, qs: &[Q], t_prime: &Q) -> Option<Q> {
    let idx = f.index();
    let tpp = Q::one() - t_prime;
    let mut best: Option<Q> = None;
    for (i, y1) in f.points.iter().enumerate() {
        for (j, y2) in f.points.iter().enumerate() {
            let (Some(a), Some(b)) = (combo(t_prime, y1, y2), combo(&tpp, y1, y2)) else {
                continue;
            };
            let (Some(&ia), Some(&ib)) = (idx.get(&a), idx.get(&b)) else { continue };
            let v = &qs[i] + &qs[j] - &qs[ia] - &qs[ib];
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    best
}

/// Three- and four-point residuals of a pair of grid functions on a common
/// domain.
#[derive(Clone, Debug)]
pub struct Residuals {
    /// `max(0, max t f(y') + (1-t) g(y'') - [t f + (1-t) g](y))`.
    pub res3: Q,
    /// Four-point violation of `f` with `t' = 1/(2-t)`.
    pub res4_f: Q,
    /// Four-point violation of `g` with `t' = 1/(1+t)`.
    pub res4_g: Q,
}

impl Residuals {
    /// `res4_f <= (2/t) res3`.
    pub fn f_bound_holds(&self, t: &Q) -> bool {
        self.res4_f <= Q::from_integer(2.into()) / t * &self.res3
    }

    /// `res4_g <= (2/(1-t)) res3`.
    pub fn g_bound_holds(&self, t: &Q) -> bool {
        self.res4_g <= Q::from_integer(2.into()) / (Q::one() - t) * &self.res3
    }
}

/// Exhaustive residual scan; values are taken as exact rationals.
pub fn four_point_residual(f: &GridFunction, g: &GridFunction, t: &Q) -> Result<Residuals> {
    if f.points != g.points {
        return Err(Error::Inconsistent("f and g must share the domain".into()));
    }
    if !(t.is_positive() && *t < Q::one()) {
        return Err(Error::BadT(crate::num::fmt_q(t)));
    }
    let fq: Vec<Q> = f.values.iter().map(|v| from_f64(*v)).collect();
    let gq: Vec<Q> = g.values.iter().map(|v| from_f64(*v)).collect();
    let idx = f.index();
    let s = Q::one() - t;
    let mut res3 = Q::zero();
    for (i, y1) in f.points.iter().enumerate() {
        for (j, y2) in f.points.iter().enumerate() {
            let Some(y) = combo(t, y1, y2) else { continue };
            let Some(&k) = idx.get(&y) else { continue };
            let v = t * &fq[i] + &s * &gq[j] - t * &fq[k] - &s * &gq[k];
            if v > res3 {
                res3 = v;
            }
        }
    }
    let two = Q::from_integer(2.into());
    let tf = Q::one() / (&two - t);
    let tg = Q::one() / (Q::one() + t);
    let res4_f = four_point_exact(f, &fq, &tf).unwrap_or_else(Q::zero).max(Q::zero());
    let res4_g = four_point_exact(g, &gq, &tg).unwrap_or_else(Q::zero).max(Q::zero());
    Ok(Residuals { res3, res4_f, res4_g })
}

/// Endpoint-anchored linear fit on a 1D grid function.
#[derive(Clone, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub sup_deviation: f64,
}

impl LinearFit {
    pub fn eval(&self, m: f64) -> f64 {
        self.slope * m + self.intercept
    }
}

/// `ℓ` through `(m̄1, f(m̄1))` and `(m̄2, f(m̄2))`, and `sup |f - ℓ|` over the
/// points of `f` inside `[m̄1, m̄2]`. Endpoints are grid indices.
pub fn linear_fit(f: &GridFunction, m1: i64, m2: i64) -> Result<LinearFit> {
    if f.base_dim != 1 {
        return Err(Error::BadDimension(f.base_dim + 1));
    }
    let idx = f.index();
    let i1 = *idx.get(&[m1, 0]).ok_or_else(|| Error::MissingEndpoint(m1.to_string()))?;
    let i2 = *idx.get(&[m2, 0]).ok_or_else(|| Error::MissingEndpoint(m2.to_string()))?;
    if m1 == m2 {
        return Err(Error::DegenerateDomain);
    }
    let d = f.denom as f64;
    let (x1, x2) = (m1 as f64 / d, m2 as f64 / d);
    let (f1, f2) = (f.values[i1], f.values[i2]);
    let slope = (f2 - f1) / (x2 - x1);
    let intercept = f1 - slope * x1;
    let fit = LinearFit {
        slope,
        intercept,
        sup_deviation: 0.0,
    };
    let (lo, hi) = (m1.min(m2), m1.max(m2));
    let dev = f
        .points
        .iter()
        .zip(&f.values)
        .filter(|(p, _)| lo <= p[0] && p[0] <= hi)
        .map(|(p, v)| (v - fit.eval(p[0] as f64 / d)).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit {
        sup_deviation: dev,
        ..fit
    })
}
