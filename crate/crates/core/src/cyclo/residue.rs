//! Reduction of cyclotomic numbers modulo a prime `q` (and `q^k`).
//!
//! `Φ_n` splits mod `q` into `φ(n)/d` irreducible factors of degree `d = ord_n(q)`.
//! Each factor `f` gives the residue field `F_q[x]/(f)` with `ζ ↦ x`. For the prime-power
//! ring we use the Galois ring `(Z/q^k)[x]/(f̃)`, `f̃` the monic lift with coefficients in
//! `[0, q)`, and send `ζ` to the Teichmüller lift `x^{s^{k-1}}` (`s = q^d`), which is a
//! genuine root of `Φ_n` there.
//!
//! Ring elements are coded as integers `Σ c_i m^i` with `m = q^k`, `0 ≤ c_i < m`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{cyclotomic_polynomial, euler_phi, CyclotomicNumber};

/// A residue ring element in packed form.
pub type RingElem = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {q} divides the field order {n}")]
    Ramified { n: u32, q: u64 },
    #[error("denominator is divisible by {q}")]
    DenominatorNotInvertible { q: u64 },
    #[error("element of Q(zeta_{got}) cannot be reduced in a context for Q(zeta_{want})")]
    FieldMismatch { want: u32, got: u32 },
    #[error("residue ring of size {q}^({k}*{d}) is too large to encode")]
    TooLarge { q: u64, k: u32, d: usize },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Multiplicative order of `q` modulo `n` (`gcd(q, n) = 1`).
pub fn multiplicative_order(q: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let mut x = q % n;
    let mut d = 1;
    while x != 1 {
        x = mulmod(x, q, n);
        d += 1;
    }
    d
}

/// Dense polynomials over `F_q`, constant term first, no trailing zeros.
mod fq {
    use super::{mulmod, powmod};

    pub type Poly = Vec<u64>;

    pub fn trim(a: &mut Poly) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv(a: u64, q: u64) -> u64 {
        powmod(a, q - 2, q)
    }

    pub fn sub(a: &Poly, b: &Poly, q: u64) -> Poly {
        let mut r = vec![0; a.len().max(b.len())];
        for (i, v) in r.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *v = (x + q - y) % q;
        }
        trim(&mut r);
        r
    }

    pub fn add(a: &Poly, b: &Poly, q: u64) -> Poly {
        let mut r = vec![0; a.len().max(b.len())];
        for (i, v) in r.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *v = (x + y) % q;
        }
        trim(&mut r);
        r
    }

    pub fn mul(a: &Poly, b: &Poly, q: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + mulmod(x, y, q)) % q;
            }
        }
        trim(&mut r);
        r
    }

    /// Returns `(quotient, remainder)`.
    pub fn divrem(a: &Poly, b: &Poly, q: u64) -> (Poly, Poly) {
        let mut r = a.clone();
        trim(&mut r);
        if r.len() < b.len() {
            return (vec![], r);
        }
        let lead_inv = inv(*b.last().unwrap(), q);
        let db = b.len() - 1;
        let mut quot = vec![0u64; r.len() - db];
        while r.len() > db && !r.is_empty() {
            let shift = r.len() - 1 - db;
            let c = mulmod(*r.last().unwrap(), lead_inv, q);
            quot[shift] = c;
            for (j, &bj) in b.iter().enumerate() {
                let t = mulmod(c, bj, q);
                r[shift + j] = (r[shift + j] + q - t) % q;
            }
            trim(&mut r);
        }
        trim(&mut quot);
        (quot, r)
    }

    pub fn rem(a: &Poly, b: &Poly, q: u64) -> Poly {
        divrem(a, b, q).1
    }

    pub fn monic(a: &Poly, q: u64) -> Poly {
        let l = inv(*a.last().unwrap(), q);
        a.iter().map(|&c| mulmod(c, l, q)).collect()
    }

    pub fn gcd(a: &Poly, b: &Poly, q: u64) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, q);
            a = b;
            b = r;
        }
        if a.is_empty() {
            a
        } else {
            monic(&a, q)
        }
    }

    pub fn powmod_poly(base: &Poly, mut e: u128, m: &Poly, q: u64) -> Poly {
        let mut result: Poly = vec![1];
        let mut b = rem(base, m, q);
        while e > 0 {
            if e & 1 == 1 {
                result = rem(&mul(&result, &b, q), m, q);
            }
            e >>= 1;
            if e > 0 {
                b = rem(&mul(&b, &b, q), m, q);
            }
        }
        result
    }
}

/// Equal-degree factorization (Cantor–Zassenhaus) of a squarefree monic `f` whose
/// irreducible factors all have degree `d`.
fn equal_degree_factor(f: &fq::Poly, d: usize, q: u64, rng: &mut ChaCha8Rng) -> Vec<fq::Poly> {
    let deg = f.len() - 1;
    if deg == d {
        return vec![f.clone()];
    }
    let s: u128 = (q as u128).pow(d as u32);
    loop {
        let mut a: fq::Poly = (0..deg).map(|_| rng.gen_range(0..q)).collect();
        fq::trim(&mut a);
        if a.len() < 2 {
            continue;
        }
        let probe = if q == 2 {
            // absolute trace to F_2: a + a^2 + … + a^{2^{d-1}}
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..d {
                t = fq::rem(&fq::mul(&t, &t, q), f, q);
                acc = fq::add(&acc, &t, q);
            }
            acc
        } else {
            let h = fq::powmod_poly(&a, (s - 1) / 2, f, q);
            fq::sub(&h, &vec![1], q)
        };
        let g = fq::gcd(f, &probe, q);
        if g.len() > 1 && g.len() < f.len() {
            let (other, _) = fq::divrem(f, &g, q);
            let other = fq::monic(&other, q);
            let mut out = equal_degree_factor(&g, d, q, rng);
            out.extend(equal_degree_factor(&other, d, q, rng));
            return out;
        }
    }
}

/// Data for one irreducible factor of `Φ_n` modulo `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueContext {
    pub order: u32,
    pub prime: u64,
    /// Monic factor over `F_q`, constant term first.
    pub factor: Vec<u64>,
    pub degree: usize,
    pub field_size: u64,
    pub conjugation_descends: bool,
}

/// One context per irreducible factor of `Φ_n mod q`, in a canonical order.
pub fn residue_contexts(n: u32, q: u64) -> Result<Vec<ResidueContext>, ResidueError> {
    if !is_prime(q) {
        return Err(ResidueError::NotPrime(q));
    }
    if n as u64 % q == 0 {
        return Err(ResidueError::Ramified { n, q });
    }
    let d = multiplicative_order(q, n as u64) as usize;
    let field_size = (q as u128).pow(d as u32);
    if field_size > u64::MAX as u128 {
        return Err(ResidueError::TooLarge { q, k: 1, d });
    }
    let descends = n > 2
        && d % 2 == 0
        && powmod(q, d as u64 / 2, n as u64) == n as u64 - 1;
    let phi: fq::Poly = cyclotomic_polynomial(n)
        .iter()
        .map(|&c| c.rem_euclid(q as i64) as u64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (n as u64) ^ (q << 16));
    let mut factors = equal_degree_factor(&phi, d, q, &mut rng);
    factors.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    debug_assert_eq!(factors.len() as u64, euler_phi(n as u64) / d as u64);
    Ok(factors
        .into_iter()
        .map(|factor| ResidueContext {
            order: n,
            prime: q,
            factor,
            degree: d,
            field_size: field_size as u64,
            conjugation_descends: descends,
        })
        .collect())
}

impl ResidueContext {
    /// The residue ring modulo `q^k` over this factor.
    pub fn ring(&self, k: u32) -> Result<Arc<ResidueRing>, ResidueError> {
        ResidueRing::new(self, k).map(Arc::new)
    }

    /// Reduction into the residue field (`k = 1`).
    pub fn reduce(&self, x: &CyclotomicNumber) -> Result<RingElem, ResidueError> {
        self.ring(1)?.reduce(x)
    }
}

const TABLE_LIMIT: u64 = 1 << 16;
/// `size` fits in a `u64` and `modulus ≥ 2`, so the degree never exceeds 64.
const MAX_DEGREE: usize = 64;

/// `(Z/q^k)[x]/(f̃)` with packed elements.
#[derive(Debug, Clone)]
pub struct ResidueRing {
    pub prime: u64,
    pub k: u32,
    pub degree: usize,
    /// `q^k`
    pub modulus: u64,
    /// Number of ring elements, `modulus^degree`.
    pub size: u64,
    /// Size of the residue field, `q^degree`.
    pub field_size: u64,
    pub order: u32,
    /// `f̃` without its leading 1.
    poly: Vec<u64>,
    /// Images of `ζ^j`, `0 ≤ j < order`.
    zeta_powers: Vec<RingElem>,
    /// Discrete log/exp tables over the field when `k = 1` and the field is small.
    log: Vec<u32>,
    exp: Vec<RingElem>,
}

impl ResidueRing {
    fn new(ctx: &ResidueContext, k: u32) -> Result<Self, ResidueError> {
        assert!(k >= 1);
        let q = ctx.prime;
        let d = ctx.degree;
        let modulus = (q as u128).pow(k);
        let size = modulus.checked_pow(d as u32);
        match size {
            Some(s) if modulus <= u32::MAX as u128 && s <= u64::MAX as u128 => {}
            _ => return Err(ResidueError::TooLarge { q, k, d }),
        }
        let modulus = modulus as u64;
        let size = size.unwrap() as u64;
        let mut ring = ResidueRing {
            prime: q,
            k,
            degree: d,
            modulus,
            size,
            field_size: ctx.field_size,
            order: ctx.order,
            poly: ctx.factor[..d].to_vec(),
            zeta_powers: vec![],
            log: vec![],
            exp: vec![],
        };
        let x = if d == 1 {
            // the factor is x - r, so x ≡ r
            (modulus - ring.poly[0]) % modulus
        } else {
            modulus
        };
        let teich = ring.pow(x, (ctx.field_size as u128).pow(k - 1));
        let mut zp = Vec::with_capacity(ctx.order as usize);
        let mut cur = ring.one();
        for _ in 0..ctx.order {
            zp.push(cur);
            cur = ring.mul(cur, teich);
        }
        debug_assert_eq!(cur, ring.one());
        ring.zeta_powers = zp;
        if k == 1 && size <= TABLE_LIMIT {
            ring.build_tables();
        }
        Ok(ring)
    }

    fn build_tables(&mut self) {
        let s = self.size;
        let x = if self.degree == 1 { None } else { Some(self.modulus) };
        // find a generator of the multiplicative group
        let gen = (2..s)
            .chain(x)
            .find(|&g| self.slow_order(g) == s - 1)
            .unwrap_or(1);
        let mut log = vec![u32::MAX; s as usize];
        let mut exp = vec![0; (s - 1) as usize];
        let mut cur = 1;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = cur;
            log[cur as usize] = i as u32;
            cur = self.mul_direct(cur, gen);
        }
        self.log = log;
        self.exp = exp;
    }

    fn slow_order(&self, g: RingElem) -> u64 {
        if g == 0 {
            return 0;
        }
        let mut cur = g;
        let mut o = 1;
        while cur != 1 {
            cur = self.mul_direct(cur, g);
            o += 1;
            if o > self.size {
                return 0;
            }
        }
        o
    }

    pub fn zero(&self) -> RingElem {
        0
    }

    pub fn one(&self) -> RingElem {
        1
    }

    pub fn digits(&self, a: RingElem) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.degree);
        let mut a = a;
        for _ in 0..self.degree {
            out.push(a % self.modulus);
            a /= self.modulus;
        }
        out
    }

    pub fn from_digits(&self, c: &[u64]) -> RingElem {
        c.iter().rev().fold(0, |acc, &v| acc * self.modulus + v % self.modulus)
    }

    pub fn from_int(&self, v: i64) -> RingElem {
        v.rem_euclid(self.modulus as i64) as u64
    }

    fn unpack(&self, mut a: RingElem, out: &mut [u64]) {
        for c in out.iter_mut() {
            *c = a % self.modulus;
            a /= self.modulus;
        }
    }

    fn pack(&self, c: &[u64]) -> RingElem {
        c.iter().rev().fold(0, |acc, &v| acc * self.modulus + v)
    }

    pub fn add(&self, a: RingElem, b: RingElem) -> RingElem {
        if self.degree == 1 {
            return (a + b) % self.modulus;
        }
        let d = self.degree;
        let (mut x, mut y) = ([0u64; MAX_DEGREE], [0u64; MAX_DEGREE]);
        self.unpack(a, &mut x[..d]);
        self.unpack(b, &mut y[..d]);
        for i in 0..d {
            x[i] = (x[i] + y[i]) % self.modulus;
        }
        self.pack(&x[..d])
    }

    pub fn neg(&self, a: RingElem) -> RingElem {
        if self.degree == 1 {
            return (self.modulus - a) % self.modulus;
        }
        let d = self.degree;
        let mut x = [0u64; MAX_DEGREE];
        self.unpack(a, &mut x[..d]);
        for c in &mut x[..d] {
            *c = (self.modulus - *c) % self.modulus;
        }
        self.pack(&x[..d])
    }

    pub fn sub(&self, a: RingElem, b: RingElem) -> RingElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: RingElem, b: RingElem) -> RingElem {
        if !self.log.is_empty() {
            if a == 0 || b == 0 {
                return 0;
            }
            let s1 = self.size - 1;
            let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % s1;
            return self.exp[e as usize];
        }
        self.mul_direct(a, b)
    }

    fn mul_direct(&self, a: RingElem, b: RingElem) -> RingElem {
        let m = self.modulus as u128;
        if self.degree == 1 {
            return ((a as u128 * b as u128) % m) as u64;
        }
        let d = self.degree;
        let (mut x, mut y) = ([0u64; MAX_DEGREE], [0u64; MAX_DEGREE]);
        self.unpack(a, &mut x[..d]);
        self.unpack(b, &mut y[..d]);
        let mut prod = [0u128; 2 * MAX_DEGREE];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                prod[i + j] = (prod[i + j] + x[i] as u128 * y[j] as u128) % m;
            }
        }
        // x^d = -(poly[0] + … + poly[d-1] x^{d-1})
        for top in (d..2 * d - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &pc) in self.poly.iter().enumerate() {
                let t = c * pc as u128 % m;
                let slot = &mut prod[top - d + i];
                *slot = (*slot + m - t) % m;
            }
        }
        for i in 0..d {
            x[i] = prod[i] as u64;
        }
        self.pack(&x[..d])
    }

    pub fn pow(&self, a: RingElem, mut e: u128) -> RingElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    /// Units are exactly the elements with nonzero reduction mod `q`.
    pub fn is_unit(&self, a: RingElem) -> bool {
        self.digits(a).iter().any(|&c| c % self.prime != 0)
    }

    /// Order of the unit group, `s^{k-1}(s-1)`.
    pub fn unit_count(&self) -> u128 {
        (self.field_size as u128).pow(self.k - 1) * (self.field_size as u128 - 1)
    }

    pub fn inv(&self, a: RingElem) -> Option<RingElem> {
        if !self.is_unit(a) {
            return None;
        }
        if !self.log.is_empty() {
            let s1 = self.size - 1;
            let e = (s1 - self.log[a as usize] as u64) % s1;
            return Some(self.exp[e as usize]);
        }
        Some(self.pow(a, self.unit_count() - 1))
    }

    /// `a^{q^times}`; an automorphism when `k = 1`.
    pub fn frobenius(&self, a: RingElem, times: u32) -> RingElem {
        let mut r = a;
        for _ in 0..times {
            r = self.pow(r, self.prime as u128);
        }
        r
    }

    /// Image of `ζ^j`.
    pub fn zeta_pow(&self, j: i64) -> RingElem {
        self.zeta_powers[j.rem_euclid(self.order as i64) as usize]
    }

    fn reduce_int(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }

    /// Ring homomorphism from `Z_(q)[ζ_n]`; elements of subfields `Q(ζ_m)`, `m | n`,
    /// are lifted first.
    pub fn reduce(&self, x: &CyclotomicNumber) -> Result<RingElem, ResidueError> {
        let x = if x.order() == self.order {
            x.clone()
        } else if self.order % x.order() == 0 {
            x.lift_to(self.order).expect("order divides")
        } else {
            return Err(ResidueError::FieldMismatch { want: self.order, got: x.order() });
        };
        let den = self.reduce_int(x.denominator());
        if den % self.prime == 0 {
            return Err(ResidueError::DenominatorNotInvertible { q: self.prime });
        }
        let den_inv = self.inv(den).expect("unit");
        let mut acc = 0;
        for (j, c) in x.numerators().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = self.reduce_int(c);
            acc = self.add(acc, self.mul(c, self.zeta_powers[j]));
        }
        Ok(self.mul(acc, den_inv))
    }
}
