//! Reduced Burau matrices at roots of unity and the parameter maps `p ↦ A_p`,
//! `A ↦ q_p(A)`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

use crate::cyclo::{CyclotomicNumber, RootOfUnity};
use crate::linalg::RepMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BurauError {
    #[error("p must be at least 3, got {0}")]
    BadP(u32),
    #[error("A is not a primitive {0}-th root of unity")]
    NotPrimitive(u32),
    #[error("need at least 3 strands, got {0}")]
    TooFewStrands(usize),
    #[error("generator index {index} out of range for {strands} strands")]
    BadGenerator { index: i32, strands: usize },
    #[error("cannot parse braid word {0:?}")]
    BadWord(String),
}

/// `A_p`: `−exp(2πi/2p)` for even `p`, `−exp((p+1)πi/p)` for odd `p`, as an element of
/// `Q(ζ_{2p})`.
pub fn standard_root(p: u32) -> Result<CyclotomicNumber, BurauError> {
    Ok(standard_root_of_unity(p)?.materialize_in(2 * p))
}

/// `A_p` as a symbolic root of unity `ζ_{2p}^e`.
pub fn standard_root_of_unity(p: u32) -> Result<RootOfUnity, BurauError> {
    if p < 3 {
        return Err(BurauError::BadP(p));
    }
    // the leading minus sign is ζ_{2p}^p
    let e = if p % 2 == 0 { 1 + p } else { (p + 1) + p };
    Ok(RootOfUnity::new(2 * p, e as i64))
}

trait MaterializeIn {
    fn materialize_in(&self, m: u32) -> CyclotomicNumber;
}

impl MaterializeIn for RootOfUnity {
    fn materialize_in(&self, m: u32) -> CyclotomicNumber {
        assert_eq!(m % self.modulus, 0);
        CyclotomicNumber::zeta_pow(m, (self.exponent * (m / self.modulus)) as i64)
    }
}

/// The exponents `k` for which `ζ_{2p}^k` is a primitive `2p`-th root.
pub fn primitive_exponents(p: u32) -> Vec<u32> {
    (1..2 * p).filter(|k| k.gcd(&(2 * p)) == 1).collect()
}

fn q_exponent(p: u32) -> i64 {
    if p == 5 || p % 2 == 0 {
        -4
    } else {
        -8
    }
}

/// `q_p(A) = A^{-4}` if `p = 5` or `p` even, `A^{-8}` otherwise, returned in the smallest
/// cyclotomic field containing it.
pub fn q_of(p: u32, a: &CyclotomicNumber) -> Result<CyclotomicNumber, BurauError> {
    let r = a.as_root_of_unity().ok_or(BurauError::NotPrimitive(2 * p))?;
    if r.multiplicative_order() != 2 * p {
        return Err(BurauError::NotPrimitive(2 * p));
    }
    Ok(r.pow(q_exponent(p)).materialize())
}

/// `q_p(ζ_{2p}^k)` as a symbolic root of unity.
pub fn q_root(p: u32, k: u32) -> RootOfUnity {
    RootOfUnity::new(2 * p, k as i64).pow(q_exponent(p))
}

/// A Burau instance: `p`, the exponent `k` of `A = ζ_{2p}^k`, and `q = q_p(A)`.
#[derive(Clone, Debug)]
pub struct BurauParams {
    pub p: u32,
    pub a_exponent: u32,
    pub a: CyclotomicNumber,
    pub q: CyclotomicNumber,
    pub strands: usize,
}

impl BurauParams {
    pub fn new(p: u32, a_exponent: u32, strands: usize) -> Result<Self, BurauError> {
        if p < 3 {
            return Err(BurauError::BadP(p));
        }
        if strands < 3 {
            return Err(BurauError::TooFewStrands(strands));
        }
        let a = CyclotomicNumber::make_root(2 * p, a_exponent as i64)
            .map_err(|_| BurauError::NotPrimitive(2 * p))?;
        let q = q_of(p, &a)?;
        Ok(BurauParams { p, a_exponent: a_exponent % (2 * p), a, q, strands })
    }

    /// `A = A_p`.
    pub fn standard(p: u32, strands: usize) -> Result<Self, BurauError> {
        let e = standard_root_of_unity(p)?.exponent;
        Self::new(p, e, strands)
    }

    pub fn generators(&self) -> Vec<RepMatrix> {
        burau_generators(self.strands, &self.q).expect("validated strand count")
    }

    pub fn pure_generators(&self) -> Vec<RepMatrix> {
        pure_braid_generators(self.strands, &self.q).expect("validated strand count")
    }
}

/// `β_q(g_1), …, β_q(g_{n-1})`, each of dimension `n − 1`.
pub fn burau_generators(n: usize, q: &CyclotomicNumber) -> Result<Vec<RepMatrix>, BurauError> {
    if n < 3 {
        return Err(BurauError::TooFewStrands(n));
    }
    let ord = q.order();
    let d = n - 1;
    let one = CyclotomicNumber::one(ord);
    let mq = -q;
    let mut out = Vec::with_capacity(d);
    for j in 1..n {
        let mut m = RepMatrix::identity(d, ord);
        if j == 1 {
            m.set(0, 0, mq.clone());
            m.set(0, 1, one.clone());
        } else if j == n - 1 {
            m.set(d - 1, d - 2, q.clone());
            m.set(d - 1, d - 1, mq.clone());
        } else {
            // rows/cols j-2, j-1, j; only the middle row differs from the identity
            let r = j - 1;
            m.set(r, r - 1, q.clone());
            m.set(r, r, mq.clone());
            m.set(r, r + 1, one.clone());
        }
        out.push(m);
    }
    Ok(out)
}

/// Artin generators `A_{ij} = w g_i² w^{-1}` with `w = g_{j-1} ⋯ g_{i+1}`, for
/// `1 ≤ i < j ≤ n` in lexicographic order.
pub fn pure_braid_generators(n: usize, q: &CyclotomicNumber) -> Result<Vec<RepMatrix>, BurauError> {
    let gens = burau_generators(n, q)?;
    let invs: Vec<RepMatrix> = gens.iter().map(|g| g.inverse().expect("det = -q")).collect();
    let mut out = Vec::new();
    for i in 1..n {
        for j in i + 1..=n {
            let mut w = RepMatrix::identity(n - 1, q.order());
            let mut w_inv = w.clone();
            for t in (i + 1..j).rev() {
                w = w.mul(&gens[t - 1]);
                w_inv = invs[t - 1].mul(&w_inv);
            }
            let sq = gens[i - 1].mul(&gens[i - 1]);
            out.push(w.mul(&sq).mul(&w_inv));
        }
    }
    Ok(out)
}

/// The first word (shortest first, then lexicographic in signed letters) in `gens` whose
/// image has infinite order, searched up to `max_len` letters. Letters are 1-based
/// generator indices, negative for inverses.
pub fn infinite_order_witness(gens: &[RepMatrix], max_len: usize) -> Option<(Vec<i32>, RepMatrix)> {
    let m = gens.len() as i32;
    let letters: Vec<i32> = (1..=m).chain((1..=m).map(|v| -v)).collect();
    let invs: Vec<RepMatrix> = gens.iter().map(|g| g.inverse().expect("invertible")).collect();
    let image = |v: i32| {
        if v > 0 {
            &gens[v as usize - 1]
        } else {
            &invs[(-v) as usize - 1]
        }
    };
    let mut level: Vec<(Vec<i32>, RepMatrix)> =
        vec![(vec![], RepMatrix::identity(gens[0].dim(), gens[0].order()))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, mat) in &level {
            for &l in &letters {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(l);
                let m2 = mat.mul(image(l));
                if !crate::linalg::finite_order_test(&m2).finite {
                    return Some((w2, m2));
                }
                next.push((w2, m2));
            }
        }
        level = next;
    }
    None
}

/// Labels `(i, j)` matching [`pure_braid_generators`].
pub fn pure_braid_labels(n: usize) -> Vec<(usize, usize)> {
    (1..n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

/// A braid word: signed 1-based generator indices, written `"1.2.-1.2"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BraidWord(pub Vec<i32>);

impl FromStr for BraidWord {
    type Err = BurauError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(BraidWord(vec![]));
        }
        s.split('.')
            .map(|t| match t.trim().parse::<i32>() {
                Ok(0) | Err(_) => Err(BurauError::BadWord(s.to_string())),
                Ok(v) => Ok(v),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BraidWord)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl BraidWord {
    pub fn inverse(&self) -> Self {
        BraidWord(self.0.iter().rev().map(|&v| -v).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        BraidWord(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn check(&self, strands: usize) -> Result<(), BurauError> {
        for &v in &self.0 {
            if v.unsigned_abs() as usize >= strands {
                return Err(BurauError::BadGenerator { index: v, strands });
            }
        }
        Ok(())
    }

    /// Product of generator images, leftmost letter first.
    pub fn evaluate(&self, gens: &[RepMatrix]) -> Result<RepMatrix, BurauError> {
        self.check(gens.len() + 1)?;
        let d = gens[0].dim();
        let mut acc = RepMatrix::identity(d, gens[0].order());
        let mut invs: Vec<Option<RepMatrix>> = vec![None; gens.len()];
        for &v in &self.0 {
            let i = v.unsigned_abs() as usize - 1;
            let m = if v > 0 {
                gens[i].clone()
            } else {
                invs[i].get_or_insert_with(|| gens[i].inverse().expect("invertible")).clone()
            };
            acc = acc.mul(&m);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_roots() {
        let a5 = standard_root(5).unwrap();
        assert_eq!(a5, -CyclotomicNumber::zeta_pow(5, 3).lift_to(10).unwrap());
        assert_eq!(standard_root(6).unwrap(), -CyclotomicNumber::zeta_pow(12, 1));
        assert_eq!(standard_root(7).unwrap().as_root_of_unity().unwrap().multiplicative_order(), 14);
    }

    #[test]
    fn q_table() {
        let q = q_of(5, &CyclotomicNumber::zeta_pow(10, 1)).unwrap();
        assert_eq!(q, CyclotomicNumber::zeta_pow(5, -2));
        let q = q_of(7, &CyclotomicNumber::zeta_pow(14, 1)).unwrap();
        assert_eq!(q, CyclotomicNumber::zeta_pow(7, -4));
        let q = q_of(6, &CyclotomicNumber::zeta_pow(12, 1)).unwrap();
        assert_eq!(q, CyclotomicNumber::zeta_pow(3, -1));
        assert!(q_of(7, &CyclotomicNumber::zeta_pow(14, 2)).is_err());
    }

    #[test]
    fn three_strand_matrices() {
        let q = CyclotomicNumber::zeta_pow(7, 3);
        let g = burau_generators(3, &q).unwrap();
        let n = 7;
        let one = CyclotomicNumber::one(n);
        let zero = CyclotomicNumber::zero(n);
        assert_eq!(g[0], RepMatrix::from_rows(vec![vec![-&q, one.clone()], vec![zero.clone(), one.clone()]]).unwrap());
        assert_eq!(g[1], RepMatrix::from_rows(vec![vec![one, zero], vec![q.clone(), -&q]]).unwrap());
    }

    #[test]
    fn pure_generators_have_finite_order_but_products_do_not() {
        let b = BurauParams::standard(7, 4).unwrap();
        let pb = b.pure_generators();
        assert!(pb.iter().all(|m| crate::linalg::finite_order_test(m).finite));
        let (w, _) = infinite_order_witness(&pb, 2).unwrap();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn middle_block_placement() {
        let q = CyclotomicNumber::zeta_pow(5, 1);
        let g = burau_generators(5, &q).unwrap();
        // g_2 acts on rows/cols 0..=2 with its nontrivial row in the middle
        assert_eq!(g[1].get(1, 0), &q);
        assert_eq!(g[1].get(1, 1), &-&q);
        assert!(g[1].get(1, 2).is_one());
        assert!(g[1].get(3, 3).is_one());
    }

    #[test]
    fn pure_braids_at_q_one_are_trivial() {
        let one = CyclotomicNumber::one(1);
        for n in 3..=6 {
            let pb = pure_braid_generators(n, &one).unwrap();
            assert_eq!(pb.len(), n * (n - 1) / 2);
            assert!(pb.iter().all(|m| m.is_identity()), "n={n}");
        }
    }

    #[test]
    fn a12_is_g1_squared() {
        let q = CyclotomicNumber::zeta_pow(7, 2);
        for n in 3..=5 {
            let g = burau_generators(n, &q).unwrap();
            let pb = pure_braid_generators(n, &q).unwrap();
            assert_eq!(pb[0], g[0].mul(&g[0]));
        }
    }

    #[test]
    fn word_grammar() {
        let w: BraidWord = "1.2.-1.2".parse().unwrap();
        assert_eq!(w, BraidWord(vec![1, 2, -1, 2]));
        assert_eq!(w.to_string(), "1.2.-1.2");
        assert!("1..2".parse::<BraidWord>().is_err());
        assert!("1.0".parse::<BraidWord>().is_err());
        assert_eq!("".parse::<BraidWord>().unwrap(), BraidWord(vec![]));
        let q = CyclotomicNumber::zeta_pow(7, 2);
        let g = burau_generators(4, &q).unwrap();
        let m = w.evaluate(&g).unwrap();
        assert!(m.mul(&w.inverse().evaluate(&g).unwrap()).is_identity());
        assert!(BraidWord(vec![4]).evaluate(&g).is_err());
    }
}
