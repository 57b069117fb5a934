//! Certified numeric evaluation of cyclotomic numbers.
//!
//! Values are computed in binary fixed point with guard bits; every result carries a
//! radius that bounds the accumulated truncation error, so sign decisions made from
//! the interval are sound.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{CyclotomicNumber, GaloisEmbedding};

const GUARD_BITS: u32 = 32;
/// Bound, in units of the last place, on the error of one cached cosine or sine.
const TRIG_ULPS: i64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// A complex value `re + i·im` known to within `radius` in each coordinate.
#[derive(Debug, Clone)]
pub struct ComplexInterval {
    /// Fixed-point scale: stored integers are values times `2^bits`.
    pub bits: u32,
    pub re_fixed: BigInt,
    pub im_fixed: BigInt,
    pub radius_fixed: BigInt,
}

impl ComplexInterval {
    fn to_f64(&self, v: &BigInt) -> f64 {
        // shift down so the conversion never overflows
        let shift = self.bits.saturating_sub(60);
        let small = v >> shift;
        small.to_f64().unwrap_or(f64::NAN) / 2f64.powi((self.bits - shift) as i32)
    }

    pub fn re(&self) -> f64 {
        self.to_f64(&self.re_fixed)
    }

    pub fn im(&self) -> f64 {
        self.to_f64(&self.im_fixed)
    }

    pub fn radius(&self) -> f64 {
        // round the radius up by one unit so the f64 view stays conservative
        self.to_f64(&(&self.radius_fixed + 1)).max(f64::MIN_POSITIVE)
    }

    pub fn contains(&self, re: f64, im: f64, slack: f64) -> bool {
        let r = self.radius() + slack;
        (self.re() - re).abs() <= r && (self.im() - im).abs() <= r
    }
}

/// Sign of the real part, or `None` when zero lies inside the interval.
pub fn real_sign(v: &ComplexInterval) -> Option<Sign> {
    if v.re_fixed.abs() <= v.radius_fixed {
        None
    } else if v.re_fixed.is_positive() {
        Some(Sign::Positive)
    } else {
        Some(Sign::Negative)
    }
}

fn digits_to_bits(digits: u32) -> u32 {
    // log2(10) < 3.33
    (digits.max(15) * 333).div_ceil(100)
}

/// `π · 2^w` by Machin's formula, truncated.
fn pi_fixed(w: u32) -> BigInt {
    fn arctan_inv(x: u64, w: u32) -> BigInt {
        let one = BigInt::from(1) << w;
        let x2 = BigInt::from(x * x);
        let mut term = one / x;
        let mut sum = term.clone();
        let mut k: u64 = 1;
        loop {
            term = &term / &x2;
            if term.is_zero() {
                break;
            }
            let t = &term / (2 * k + 1);
            if k % 2 == 1 {
                sum -= t;
            } else {
                sum += t;
            }
            k += 1;
        }
        sum
    }
    (arctan_inv(5, w) * 4 - arctan_inv(239, w)) * 4
}

/// `(cos θ, sin θ)·2^w` with `θ = 2π m / n`.
fn cos_sin_fixed(m: u64, n: u64, w: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, u32), (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let m = m % n;
    if let Some(v) = cache.lock().unwrap().get(&(m, n, w)) {
        return v.clone();
    }
    let pi = pi_fixed(w);
    // θ in (−π, π]
    let mut num = 2 * m as i64;
    if num > n as i64 {
        num -= 2 * n as i64;
    }
    let theta = &pi * num / n as i64;
    let one = BigInt::from(1) << w;
    let x2 = (&theta * &theta) >> w;

    let mut cos = one.clone();
    let mut term = one;
    let mut k: i64 = 1;
    loop {
        term = -((&term * &x2) >> w) / ((2 * k - 1) * (2 * k));
        if term.is_zero() {
            break;
        }
        cos += &term;
        k += 1;
    }
    let mut sin = theta.clone();
    let mut term = theta;
    let mut k: i64 = 1;
    loop {
        term = -((&term * &x2) >> w) / ((2 * k) * (2 * k + 1));
        if term.is_zero() {
            break;
        }
        sin += &term;
        k += 1;
    }
    cache.lock().unwrap().insert((m, n, w), (cos.clone(), sin.clone()));
    (cos, sin)
}

/// Evaluates `x` at the complex embedding `ζ_n ↦ exp(2πi k/n)` to at least `precision`
/// decimal digits (values below 15 are raised to 15).
pub fn embed_numeric(x: &CyclotomicNumber, sigma: &GaloisEmbedding, precision: u32) -> ComplexInterval {
    assert_eq!(x.order(), sigma.order, "embedding order does not match the field");
    let bits = digits_to_bits(precision);
    let w = bits + GUARD_BITS;
    let n = x.order() as u64;
    let k = sigma.exponent as u64;
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let mut abs_sum = BigInt::zero();
    for (j, c) in x.numerators().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (cs, sn) = cos_sin_fixed(j as u64 * k, n, w);
        re += c * cs;
        im += c * sn;
        abs_sum += c.abs();
    }
    let den = x.denominator();
    // truncating division adds at most one unit
    let radius_w = (abs_sum * TRIG_ULPS).div_ceil_pos(den) + 1;
    // drop the guard bits, widening the radius by the discarded part
    let re_b = (&re / den) >> GUARD_BITS;
    let im_b = (&im / den) >> GUARD_BITS;
    let radius = (radius_w >> GUARD_BITS) + 2;
    ComplexInterval { bits, re_fixed: re_b, im_fixed: im_b, radius_fixed: radius }
}

trait DivCeilPos {
    fn div_ceil_pos(&self, d: &BigInt) -> BigInt;
}

impl DivCeilPos for BigInt {
    fn div_ceil_pos(&self, d: &BigInt) -> BigInt {
        (self + d - 1) / d
    }
}
