//! Colors, admissibility, conformal-block dimensions, Dehn-twist eigenvalues and the
//! decision procedure for equivalence of the representations at two roots.
//!
//! Odd `p = 2r + 1` uses the even colors `0, 2, …, 2r − 2` with level bound
//! `a + b + c ≤ 2(p − 2)`; even `p = 2r + 2` uses `0, 1, …, r − 1` with
//! `a + b + c ≤ 2(r − 1) = p − 4`.

mod graph;
mod verlinde;

pub use graph::{
    balanced, caterpillar, caterpillar_with_order, count_colorings, edge_support, ring,
    standard_graphs, theta, BlockSpec, TrivalentGraph,
};
pub use verlinde::verlinde_dimension;

use serde::Serialize;
use thiserror::Error;

use crate::cyclo::{CyclotomicNumber, RootOfUnity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("{0} is not a color of this theory")]
    NotAColor(u32),
    #[error("p must be at least 3, got {0}")]
    BadP(u32),
    #[error("A is not a primitive {0}-th root of unity")]
    NotPrimitive(u32),
    #[error("the equivalence argument needs r ≥ 3 for even p = 2r + 2, got p = {0}")]
    UnsupportedLevel(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorSystem {
    pub p: u32,
    pub parity: Parity,
    pub colors: Vec<u32>,
    /// Largest allowed `a + b + c` at a vertex.
    pub level_bound: u32,
}

impl ColorSystem {
    pub fn new(p: u32) -> Result<Self, BlockError> {
        if p < 3 {
            return Err(BlockError::BadP(p));
        }
        Ok(if p % 2 == 1 {
            let r = (p - 1) / 2;
            ColorSystem {
                p,
                parity: Parity::Odd,
                colors: (0..r).map(|i| 2 * i).collect(),
                level_bound: 2 * (p - 2),
            }
        } else {
            let r = (p - 2) / 2;
            ColorSystem {
                p,
                parity: Parity::Even,
                colors: (0..r).collect(),
                level_bound: 2 * r.saturating_sub(1),
            }
        })
    }

    pub fn contains(&self, c: u32) -> bool {
        self.colors.binary_search(&c).is_ok()
    }

    /// Parity, triangle inequality and level bound. Non-colors are never admissible.
    pub fn admissible(&self, a: u32, b: u32, c: u32) -> bool {
        self.contains(a)
            && self.contains(b)
            && self.contains(c)
            && (a + b + c) % 2 == 0
            && a.abs_diff(b) <= c
            && c <= a + b
            && a + b + c <= self.level_bound
    }
}

/// Convenience: dimension of `Σ_{g,n}` with the given labels on the canonical graph.
pub fn block_dimension_of_surface(genus: usize, labels: &[u32], sys: &ColorSystem) -> Result<u64, BlockError> {
    let graph = caterpillar(genus, labels.len())?;
    block_dimension(&BlockSpec::new(genus, labels.to_vec(), graph)?, sys)
}

pub fn block_dimension(spec: &BlockSpec, sys: &ColorSystem) -> Result<u64, BlockError> {
    count_colorings(spec, sys)
}

/// Dehn-twist eigenvalue per color: `A^{i(i+2)}` for odd `p`, `(−1)^i A^{i(i+2)}` for even `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueMultiset {
    pub values: Vec<(u32, CyclotomicNumber)>,
}

fn root_exponent(p: u32, a: &CyclotomicNumber) -> Result<u32, BlockError> {
    let r = a.as_root_of_unity().ok_or(BlockError::NotPrimitive(2 * p))?;
    if r.multiplicative_order() != 2 * p {
        return Err(BlockError::NotPrimitive(2 * p));
    }
    Ok(RootOfUnity::new(2 * p, (r.exponent * (2 * p) / r.modulus) as i64).exponent)
}

/// Exponent `e` with eigenvalue `ζ_{2p}^e` for color `i` at `A = ζ_{2p}^k`.
fn eigen_exponent(sys: &ColorSystem, k: u32, i: u32) -> u32 {
    let m = 2 * sys.p as u64;
    let mut e = k as u64 * (i as u64 * (i as u64 + 2)) % m;
    if sys.parity == Parity::Even && i % 2 == 1 {
        e = (e + sys.p as u64) % m;
    }
    e as u32
}

pub fn twist_eigenvalues(sys: &ColorSystem, a: &CyclotomicNumber) -> Result<EigenvalueMultiset, BlockError> {
    root_exponent(sys.p, a)?;
    let values = sys
        .colors
        .iter()
        .map(|&i| {
            let base = a.pow(i as i64 * (i as i64 + 2));
            let v = if sys.parity == Parity::Even && i % 2 == 1 { -base } else { base };
            (i, v)
        })
        .collect();
    Ok(EigenvalueMultiset { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    Same,
    Conjugate,
    Inequivalent,
}

/// Searches for a bijection `f` of the colors with `f(0) = 0` that matches twist
/// eigenvalues (`E_A(i) = E_B(f(i))`, or its complex conjugate for the anti-linear
/// case) and preserves the block structure: the dimension of every pair of pants
/// `(a, b, c)` and of every four-holed sphere with all labels equal.
pub fn equivalent_roots(p: u32, a: &CyclotomicNumber, b: &CyclotomicNumber) -> Result<Equivalence, BlockError> {
    let sys = ColorSystem::new(p)?;
    let ka = root_exponent(p, a)?;
    let kb = root_exponent(p, b)?;
    equivalent_exponents(&sys, ka, kb)
}

/// As [`equivalent_roots`] with `A = ζ_{2p}^{ka}`, `B = ζ_{2p}^{kb}`.
pub fn equivalent_exponents(sys: &ColorSystem, ka: u32, kb: u32) -> Result<Equivalence, BlockError> {
    let p = sys.p;
    if sys.parity == Parity::Even && p < 8 {
        return Err(BlockError::UnsupportedLevel(p));
    }
    let m = 2 * p;
    let ea: Vec<u32> = sys.colors.iter().map(|&i| eigen_exponent(sys, ka, i)).collect();
    let eb: Vec<u32> = sys.colors.iter().map(|&i| eigen_exponent(sys, kb, i)).collect();
    let conj_eb: Vec<u32> = eb.iter().map(|&e| (m - e) % m).collect();
    let compat = Compat::new(sys);
    if compat.find(&ea, &eb) {
        Ok(Equivalence::Same)
    } else if compat.find(&ea, &conj_eb) {
        Ok(Equivalence::Conjugate)
    } else {
        Ok(Equivalence::Inequivalent)
    }
}

struct Compat<'a> {
    sys: &'a ColorSystem,
    /// `quad[i]` = dimension of the four-holed sphere with all labels `colors[i]`.
    quad: Vec<usize>,
}

impl<'a> Compat<'a> {
    fn new(sys: &'a ColorSystem) -> Self {
        let quad = sys
            .colors
            .iter()
            .map(|&a| sys.colors.iter().filter(|&&c| sys.admissible(a, a, c)).count())
            .collect();
        Compat { sys, quad }
    }

    fn find(&self, ea: &[u32], eb: &[u32]) -> bool {
        let m = self.sys.colors.len();
        let mut f = vec![usize::MAX; m];
        let mut used = vec![false; m];
        self.extend(0, &mut f, &mut used, ea, eb)
    }

    fn extend(&self, i: usize, f: &mut [usize], used: &mut [bool], ea: &[u32], eb: &[u32]) -> bool {
        let m = f.len();
        if i == m {
            return true;
        }
        let c = &self.sys.colors;
        for j in 0..m {
            if used[j] || ea[i] != eb[j] || self.quad[i] != self.quad[j] || (i == 0) != (j == 0) {
                continue;
            }
            f[i] = j;
            // pants dimensions among the colors assigned so far
            let ok = (0..=i).all(|x| {
                (0..=i).all(|y| {
                    (0..=i).all(|z| {
                        self.sys.admissible(c[x], c[y], c[z])
                            == self.sys.admissible(c[f[x]], c[f[y]], c[f[z]])
                    })
                })
            });
            if ok {
                used[j] = true;
                if self.extend(i + 1, f, used, ea, eb) {
                    return true;
                }
                used[j] = false;
            }
        }
        f[i] = usize::MAX;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_sets() {
        assert_eq!(ColorSystem::new(7).unwrap().colors, vec![0, 2, 4]);
        assert_eq!(ColorSystem::new(5).unwrap().colors, vec![0, 2]);
        assert_eq!(ColorSystem::new(10).unwrap().colors, vec![0, 1, 2, 3]);
        assert!(ColorSystem::new(2).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let even = ColorSystem::new(8).unwrap();
        assert!(even.admissible(1, 1, 2));
        assert!(!even.admissible(1, 1, 1));
        let odd = ColorSystem::new(5).unwrap();
        assert!(!odd.admissible(2, 2, 4));
        assert!(odd.admissible(2, 2, 2));
        assert!(odd.admissible(0, 2, 2));
    }

    #[test]
    fn eigenvalue_formulas() {
        let sys = ColorSystem::new(5).unwrap();
        let a = CyclotomicNumber::zeta_pow(10, 3);
        let e = twist_eigenvalues(&sys, &a).unwrap();
        assert!(e.values[0].1.is_one());
        assert_eq!(e.values[1].1, a.pow(8));
        let sys = ColorSystem::new(8).unwrap();
        let a = CyclotomicNumber::zeta_pow(16, 3);
        let e = twist_eigenvalues(&sys, &a).unwrap();
        assert_eq!(e.values[1].1, -a.pow(3));
    }

    #[test]
    fn equivalence_small_cases() {
        let a = CyclotomicNumber::zeta_pow(14, 1);
        let b = CyclotomicNumber::zeta_pow(14, 3);
        assert_eq!(equivalent_roots(7, &a, &a).unwrap(), Equivalence::Same);
        assert_eq!(equivalent_roots(7, &a, &a.conj()).unwrap(), Equivalence::Conjugate);
        assert_eq!(equivalent_roots(7, &a, &b).unwrap(), Equivalence::Inequivalent);
        let c = CyclotomicNumber::zeta_pow(12, 1);
        assert_eq!(equivalent_roots(6, &c, &c), Err(BlockError::UnsupportedLevel(6)));
    }
}
