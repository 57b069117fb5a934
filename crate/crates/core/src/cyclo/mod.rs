//! Exact arithmetic in cyclotomic fields `Q(ζ_n)`.
//!
//! An element is stored in the power basis `1, ζ, …, ζ^{φ(n)-1}` as a vector of
//! integer numerators over one shared positive denominator. The per-order tables
//! (cyclotomic polynomial, reductions of `ζ^m` for `0 ≤ m < n`) are built once and
//! shared through an `Arc`.

mod embed;
mod residue;

pub use embed::{embed_numeric, real_sign, ComplexInterval, Sign};
pub use residue::{
    is_prime, residue_contexts, ResidueContext, ResidueError, ResidueRing, RingElem,
};

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("exponent {k} is not coprime to the field order {n}")]
    NotCoprime { n: u32, k: i64 },
    #[error("field order must be positive")]
    ZeroOrder,
    #[error("mismatched field orders {0} and {1}")]
    OrderMismatch(u32, u32),
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Euler's totient.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Integer coefficients (constant term first) of the `n`-th cyclotomic polynomial,
/// by dividing `x^n - 1` by `Φ_d` for every proper divisor `d`.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_polynomial(d);
            poly = exact_divide_monic(&poly, &div);
        }
    }
    cache.lock().unwrap().insert(n, poly.clone());
    poly
}

fn exact_divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qlen = num.len() - dn;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, &dc) in den.iter().enumerate() {
                rem[i + j] -= c * dc;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// Shared tables for one cyclotomic field.
#[derive(Debug)]
pub struct Field {
    n: u32,
    phi: usize,
    /// `powers[m]` is the power-basis vector of `ζ^m`, `0 ≤ m < n`.
    powers: Vec<Vec<i64>>,
}

impl Field {
    fn build(n: u32) -> Field {
        let cyc = cyclotomic_polynomial(n);
        let phi = cyc.len() - 1;
        let mut powers = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..n {
            powers.push(cur.clone());
            // multiply by ζ, then reduce ζ^phi = -(c_0 + … + c_{phi-1} ζ^{phi-1})
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for i in 0..phi {
                    cur[i] -= top * cyc[i];
                }
            }
        }
        Field { n, phi, powers }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.phi
    }
}

/// Returns the shared table for `Q(ζ_n)`.
pub fn field(n: u32) -> Arc<Field> {
    static FIELDS: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    let fields = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = fields.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(Field::build(n)))
        .clone()
}

/// Exact element of `Q(ζ_n)`.
#[derive(Clone)]
pub struct CyclotomicNumber {
    field: Arc<Field>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.field.n == other.field.n && self.den == other.den && self.num == other.num
    }
}

impl Eq for CyclotomicNumber {}

impl std::hash::Hash for CyclotomicNumber {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.n.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl CyclotomicNumber {
    fn from_parts(field: Arc<Field>, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut x = CyclotomicNumber { field, num, den };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.abs();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if self.den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in self.num.iter_mut() {
                *c = &*c / &g;
            }
            self.den = &self.den / &g;
        }
    }

    pub fn zero(n: u32) -> Self {
        let f = field(n);
        let phi = f.phi;
        CyclotomicNumber { field: f, num: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    pub fn one(n: u32) -> Self {
        Self::from_int(n, 1)
    }

    pub fn from_int(n: u32, v: i64) -> Self {
        let mut x = Self::zero(n);
        x.num[0] = BigInt::from(v);
        x
    }

    pub fn from_rational(n: u32, v: &BigRational) -> Self {
        let mut x = Self::zero(n);
        x.num[0] = v.numer().clone();
        x.den = v.denom().clone();
        x.normalize();
        x
    }

    /// Builds `Σ coeffs[i] ζ^i` for any number of coefficients (reduced modulo `Φ_n`).
    pub fn from_power_coeffs(n: u32, coeffs: &[BigRational]) -> Self {
        let f = field(n);
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut acc = vec![BigInt::zero(); f.phi];
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            let pw = &f.powers[i % f.n as usize];
            for (a, &b) in acc.iter_mut().zip(pw) {
                if b != 0 {
                    *a += &scaled * b;
                }
            }
        }
        Self::from_parts(f, acc, den)
    }

    /// `ζ_n^k` for `k` coprime to `n` (a primitive `n`-th root of unity).
    pub fn make_root(n: u32, k: i64) -> Result<Self, CycloError> {
        if n == 0 {
            return Err(CycloError::ZeroOrder);
        }
        if (k.rem_euclid(n as i64) as u64).gcd(&(n as u64)) != 1 && n != 1 {
            return Err(CycloError::NotCoprime { n, k });
        }
        Ok(Self::zeta_pow(n, k))
    }

    /// `ζ_n^k` for arbitrary integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let f = field(n);
        let m = k.rem_euclid(n as i64) as usize;
        let num = f.powers[m].iter().map(|&c| BigInt::from(c)).collect();
        CyclotomicNumber { field: f, num, den: BigInt::one() }
    }

    pub fn order(&self) -> u32 {
        self.field.n
    }

    pub fn degree(&self) -> usize {
        self.field.phi
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|c| c.is_zero())
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// Power-basis coordinates as rationals.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    /// Rational value when the element lies in `Q`.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.num[0].clone(), self.den.clone()))
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.field.n, other.field.n,
            "cyclotomic arithmetic across fields of different order"
        );
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        self.check_same(other);
        let (l, r) = (&self.den, &other.den);
        let num = if l == r {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| if negate { a - b } else { a + b })
                .collect()
        } else {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| {
                    let (x, y) = (a * r, b * l);
                    if negate {
                        x - y
                    } else {
                        x + y
                    }
                })
                .collect()
        };
        let den = if l == r { l.clone() } else { l * r };
        Self::from_parts(self.field.clone(), num, den)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_same(other);
        let f = &self.field;
        let n = f.n as usize;
        let mut acc = vec![BigInt::zero(); n.max(f.phi)];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                acc[(i + j) % n] += a * b;
            }
        }
        let mut out = vec![BigInt::zero(); f.phi];
        for (m, c) in acc.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if m < f.phi {
                out[m] += c;
            } else {
                for (o, &pc) in out.iter_mut().zip(&f.powers[m]) {
                    if pc != 0 {
                        *o += &c * pc;
                    }
                }
            }
        }
        Self::from_parts(self.field.clone(), out, &self.den * &other.den)
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        Self::from_parts(
            self.field.clone(),
            self.num.iter().map(|c| c * &k).collect(),
            self.den.clone(),
        )
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        Self::from_parts(
            self.field.clone(),
            self.num.iter().map(|c| c * r.numer()).collect(),
            &self.den * r.denom(),
        )
    }

    /// Image under the field automorphism `ζ ↦ ζ^k` (`k` coprime to `n`).
    pub fn galois(&self, k: i64) -> Self {
        let f = &self.field;
        let n = f.n as i64;
        let mut out = vec![BigInt::zero(); f.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = (i as i64 * k).rem_euclid(n) as usize;
            for (o, &pc) in out.iter_mut().zip(&f.powers[m]) {
                if pc != 0 {
                    *o += c * pc;
                }
            }
        }
        Self::from_parts(self.field.clone(), out, self.den.clone())
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Field norm to `Q`.
    pub fn norm(&self) -> BigRational {
        let p = self.other_conjugates_product();
        (self * &p).to_rational().expect("norm lies in Q")
    }

    fn other_conjugates_product(&self) -> Self {
        let n = self.field.n as u64;
        let mut prod = Self::one(self.field.n);
        for k in 2..n.max(2) {
            if k.gcd(&n) == 1 {
                prod = &prod * &self.galois(k as i64);
            }
        }
        prod
    }

    /// Multiplicative inverse, `None` for zero. Uses `x^{-1} = Π_{σ≠1} σ(x) / N(x)`.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.is_rational() {
            let r = self.to_rational().unwrap();
            return Some(Self::from_rational(self.field.n, &r.recip()));
        }
        let p = self.other_conjugates_product();
        let nrm = (self * &p).to_rational().expect("norm lies in Q");
        Some(p.scale_rational(&nrm.recip()))
    }

    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut base = self.clone();
        let mut acc = Self::one(self.field.n);
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Embeds into `Q(ζ_m)` for a multiple `m` of the current order.
    pub fn lift_to(&self, m: u32) -> Result<Self, CycloError> {
        let n = self.field.n;
        if m % n != 0 {
            return Err(CycloError::OrderMismatch(n, m));
        }
        let step = (m / n) as usize;
        let mut coeffs = vec![BigRational::zero(); step * self.field.phi];
        for (i, c) in self.coeffs().into_iter().enumerate() {
            coeffs[i * step] = c;
        }
        Ok(Self::from_power_coeffs(m, &coeffs))
    }

    /// If this element is a root of unity, returns `(order, exponent)` with the element
    /// equal to `ζ_N^exponent` where `N = lcm(2, n)`.
    pub fn as_root_of_unity(&self) -> Option<RootOfUnity> {
        let n = self.field.n;
        let big = if n % 2 == 0 { n } else { 2 * n };
        let step = big / n;
        for e in 0..n {
            let z = Self::zeta_pow(n, e as i64);
            for (sign, extra) in [(1i64, 0u32), (-1, big / 2)] {
                let cand = if sign == 1 { z.clone() } else { -&z };
                if &cand == self {
                    let exp = (e * step + extra) % big;
                    return Some(RootOfUnity { modulus: big, exponent: exp });
                }
            }
        }
        None
    }

    /// Smallest `m` such that the element lies in the subfield `Q(ζ_m)` generated by a
    /// root-of-unity power, when the element is itself a root of unity.
    pub fn minimal_root_field(&self) -> Option<Self> {
        let r = self.as_root_of_unity()?;
        Some(r.materialize())
    }

    pub fn to_f64_parts(&self, exponent: i64) -> (f64, f64) {
        let n = self.field.n as f64;
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        let (mut re, mut im) = (0.0, 0.0);
        for (i, c) in self.num.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * ((i as i64 * exponent) as f64) / n;
            let c = c.to_f64().unwrap_or(f64::NAN) / den;
            re += c * theta.cos();
            im += c * theta.sin();
        }
        (re, im)
    }
}

/// A root of unity `ζ_modulus^exponent`, kept symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub modulus: u32,
    pub exponent: u32,
}

impl RootOfUnity {
    pub fn new(modulus: u32, exponent: i64) -> Self {
        RootOfUnity { modulus, exponent: exponent.rem_euclid(modulus as i64) as u32 }
    }

    pub fn multiplicative_order(&self) -> u32 {
        let g = (self.exponent as u64).gcd(&(self.modulus as u64)) as u32;
        self.modulus / g
    }

    pub fn pow(&self, e: i64) -> Self {
        Self::new(self.modulus, self.exponent as i64 * e)
    }

    /// The same root of unity as an element of `Q(ζ_m)`, `m` its multiplicative order.
    pub fn materialize(&self) -> CyclotomicNumber {
        let m = self.multiplicative_order();
        let k = self.exponent / (self.modulus / m);
        CyclotomicNumber::zeta_pow(m, k as i64)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b CyclotomicNumber> for &'a CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: &'b CyclotomicNumber) -> CyclotomicNumber {
                let f: fn(&CyclotomicNumber, &CyclotomicNumber) -> CyclotomicNumber = $body;
                f(self, rhs)
            }
        }
        impl $tr<CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: CyclotomicNumber) -> CyclotomicNumber {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $tr<&'b CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: &'b CyclotomicNumber) -> CyclotomicNumber {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, false));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, true));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        -&self
    }
}

impl fmt::Debug for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => format!("z{}", self.field.n),
                _ => format!("z{}^{}", self.field.n, i),
            };
            let coef = if mono.is_empty() {
                c.to_string()
            } else if c.is_one() {
                String::new()
            } else if *c == -BigInt::one() {
                "-".to_string()
            } else {
                format!("{}*", c)
            };
            terms.push(format!("{}{}", coef, mono));
        }
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.den.is_one() {
            write!(f, "{}", body)
        } else {
            write!(f, "({})/{}", body, self.den)
        }
    }
}

/// A field embedding `ζ_n ↦ exp(2πi k/n)`, equivalently the automorphism `ζ ↦ ζ^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GaloisEmbedding {
    pub order: u32,
    pub exponent: u32,
}

impl GaloisEmbedding {
    pub fn new(order: u32, exponent: i64) -> Result<Self, CycloError> {
        if order == 0 {
            return Err(CycloError::ZeroOrder);
        }
        let k = exponent.rem_euclid(order as i64) as u32;
        if order > 1 && (k as u64).gcd(&(order as u64)) != 1 {
            return Err(CycloError::NotCoprime { n: order, k: exponent });
        }
        Ok(GaloisEmbedding { order, exponent: if order == 1 { 0 } else { k } })
    }

    pub fn identity(order: u32) -> Self {
        GaloisEmbedding { order, exponent: if order == 1 { 0 } else { 1 } }
    }

    /// `self ∘ other`: exponents multiply.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        let k = (self.exponent as u64 * other.exponent as u64) % self.order as u64;
        GaloisEmbedding { order: self.order, exponent: k as u32 }
    }

    pub fn conjugate(&self) -> Self {
        let k = (self.order - self.exponent) % self.order.max(1);
        GaloisEmbedding { order: self.order, exponent: k }
    }

    pub fn apply(&self, x: &CyclotomicNumber) -> CyclotomicNumber {
        assert_eq!(x.order(), self.order);
        x.galois(self.exponent as i64)
    }
}
