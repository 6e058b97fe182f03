#![allow(dead_code)]

use std::collections::HashSet;

use bmstab_core::LatticeSet;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Union of a few random boxes inside `[0, side)^dim`.
pub fn random_set(r: &mut StdRng, dim: usize, denom: u64, side: i64, boxes: usize) -> LatticeSet {
    let mut cells = HashSet::new();
    for _ in 0..boxes.max(1) {
        let mut lo = [0i64; 3];
        let mut hi = [1i64; 3];
        for i in 0..dim {
            let a = r.gen_range(0..side);
            let b = r.gen_range(0..side);
            lo[i] = a.min(b);
            hi[i] = a.max(b) + 1;
        }
        for x in lo[0]..hi[0] {
            for y in lo[1]..hi[1] {
                for z in lo[2]..hi[2] {
                    let mut c = [x, y, z];
                    for v in c.iter_mut().skip(dim) {
                        *v = 0;
                    }
                    cells.insert(c);
                }
            }
        }
    }
    LatticeSet::from_cells(dim, denom, cells).unwrap()
}

/// Random cells, each present with probability `p`.
pub fn random_scatter(r: &mut StdRng, dim: usize, denom: u64, side: i64, p: f64) -> LatticeSet {
    let mut cells = Vec::new();
    let ext = |i: usize| if i < dim { side } else { 1 };
    for x in 0..ext(0) {
        for y in 0..ext(1) {
            for z in 0..ext(2) {
                if r.gen_bool(p) {
                    cells.push([x, y, z]);
                }
            }
        }
    }
    if cells.is_empty() {
        cells.push([0, 0, 0]);
    }
    LatticeSet::from_cells(dim, denom, cells).unwrap()
}

/// Brute-force `tA + (1-t)B` for `t = p/q`: each pair of cells contributes a
/// box of side `1/(qm)`-cells `q`, starting at `p a + (q-p) b`.
pub fn brute_combination(a: &LatticeSet, b: &LatticeSet, p: i64, q: i64) -> LatticeSet {
    assert_eq!(a.denom(), b.denom());
    let dim = a.dim();
    let mut out = HashSet::new();
    let bc: Vec<[i64; 3]> = b.cells().collect();
    for ca in a.cells() {
        for cb in &bc {
            let base: Vec<i64> = (0..3).map(|i| p * ca[i] + (q - p) * cb[i]).collect();
            let ext = |i: usize| if i < dim { q } else { 1 };
            for x in 0..ext(0) {
                for y in 0..ext(1) {
                    for z in 0..ext(2) {
                        let mut c = [base[0] + x, base[1] + y, base[2] + z];
                        for v in c.iter_mut().skip(dim) {
                            *v = 0;
                        }
                        out.insert(c);
                    }
                }
            }
        }
    }
    LatticeSet::from_cells(dim, a.denom() * q as u64, out).unwrap()
}
