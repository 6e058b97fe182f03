//! Exact rational helpers and certified real brackets.
//!
//! Everything measure-related in this crate is a [`Q`] (an arbitrary
//! precision rational). Real numbers only appear where fractional powers do;
//! there we carry `f64` brackets whose endpoints are verified against the
//! exact rational value.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, `p`, or a plain decimal such as `0.25`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(Q::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(p))
}

pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Largest `f64` not above `q`.
pub fn f64_below(q: &Q) -> f64 {
    let mut x = to_f64(q);
    while from_f64(x) > *q {
        x = x.next_down();
    }
    x
}

/// Smallest `f64` not below `q`.
pub fn f64_above(q: &Q) -> f64 {
    let mut x = to_f64(q);
    while from_f64(x) < *q {
        x = x.next_up();
    }
    x
}

pub fn pow_q(q: &Q, n: u32) -> Q {
    num_traits::pow(q.clone(), n as usize)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn best_rational(x: f64, max_den: u64) -> Q {
    assert!(x.is_finite());
    let target = from_f64(x);
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = target.clone();
    let max = BigInt::from(max_den);
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > max {
            // largest semiconvergent that still fits
            let m = (&max - &k0) / &k1;
            let hs = &m * &h1 + &h0;
            let ks = &m * &k1 + &k0;
            let conv = Q::new(h1.clone(), k1.clone());
            if ks.is_positive() {
                let semi = Q::new(hs, ks);
                if (&semi - &target).abs() < (&conv - &target).abs() {
                    return semi;
                }
            }
            return conv;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &rest - Q::from_integer(a);
        if frac.is_zero() {
            return Q::new(h1, k1);
        }
        rest = frac.recip();
    }
}

/// `q^(1/n)` when it is rational.
pub fn exact_nth_root(q: &Q, n: u32) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer().nth_root(n);
    let den = q.denom().nth_root(n);
    let r = Q::new(num, den);
    (pow_q(&r, n) == *q).then_some(r)
}

/// Closed real interval with `f64` endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn point(x: f64) -> Self {
        Bracket { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Certified bracket of `q^(1/n)` for `q >= 0`, `n` in 1..=3: both endpoints
/// are checked by exact rational powering.
pub fn nth_root_bracket(q: &Q, n: u32) -> Bracket {
    assert!(!q.is_negative(), "root of a negative number");
    if let Some(r) = exact_nth_root(q, n) {
        return Bracket {
            lo: f64_below(&r),
            hi: f64_above(&r),
        };
    }
    let x = to_f64(q);
    let guess = match n {
        1 => x,
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ => x.powf(1.0 / n as f64),
    };
    let mut lo = guess;
    while pow_q(&from_f64(lo), n) > *q {
        lo = lo.next_down();
    }
    let mut hi = guess;
    while pow_q(&from_f64(hi), n) < *q {
        hi = hi.next_up();
    }
    Bracket { lo, hi }
}

/// Exact comparison of `c` with `(t a^(1/n) + (1-t) b^(1/n))^n` for
/// `a, b >= 0`, `0 < t < 1` and `n` in 1..=3.
///
/// For `n = 2` the square root is isolated and squared away. For `n = 3`
/// the irrational part `w = u (a^2 b)^(1/3) + v (a b^2)^(1/3)` is the unique
/// positive root of `x^3 - 3uv ab x - (u^3 a^2 b + v^3 a b^2)`, so comparing
/// a positive rational with `w` reduces to the sign of that cubic.
pub fn compare_with_mean_power(c: &Q, a: &Q, b: &Q, t: &Q, n: u32) -> Ordering {
    let s = Q::one() - t;
    match n {
        1 => c.cmp(&(t * a + &s * b)),
        2 => {
            let d = c - t * t * a - &s * &s * b;
            let e = qi(2) * t * &s;
            if d.is_negative() {
                return Ordering::Less;
            }
            (&d * &d).cmp(&(&e * &e * a * b))
        }
        3 => {
            let d = c - pow_q(t, 3) * a - pow_q(&s, 3) * b;
            let ab = a * b;
            if ab.is_zero() {
                return d.cmp(&Q::zero());
            }
            let u = qi(3) * t * t * &s;
            let v = qi(3) * t * &s * &s;
            let k = qi(3) * &u * &v * &ab;
            let l = pow_q(&u, 3) * a * &ab + pow_q(&v, 3) * &ab * b;
            if !d.is_positive() {
                return Ordering::Less;
            }
            let f = pow_q(&d, 3) - &k * &d - l;
            f.cmp(&Q::zero())
        }
        _ => panic!("mean power comparison only implemented for n <= 3"),
    }
}

/// Rational enclosure of pi, good to 35 digits.
pub fn pi_bounds() -> (Q, Q) {
    let den: BigInt = num_traits::pow(BigInt::from(10), 35);
    let lo: BigInt = "314159265358979323846264338327950288".parse().unwrap();
    let hi = &lo + 1;
    (Q::new(lo, den.clone()), Q::new(hi, den))
}
