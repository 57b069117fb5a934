//! Signatures of the invariant Hermitian form across the complex embeddings of its
//! field, and the resulting list of real factors.
//!
//! Signatures are read off the characteristic polynomial: its coefficients are exact
//! elements of the real subfield, their signs at an embedding are decided with
//! certified intervals, and Descartes' rule of signs is exact because a Hermitian
//! matrix has only real eigenvalues.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::burau::{BurauError, BurauParams};
use crate::cyclo::{embed_numeric, is_prime, real_sign, CycloError, GaloisEmbedding, Sign};
use crate::linalg::{invariant_hermitian_form, HermitianForm, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("unsupported p = {0}: need p = 5 or a prime p ≥ 7 with p ≡ 3 (mod 4)")]
    UnsupportedP(u32),
    #[error("sign undecidable at {digits} digits")]
    PrecisionExhausted { digits: u32 },
    #[error("embedding of order {got} does not match the form's field order {want}")]
    FieldMismatch { want: u32, got: u32 },
    #[error(transparent)]
    Burau(#[from] BurauError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cyclo(#[from] CycloError),
}

pub const DEFAULT_PRECISION: u32 = 30;
/// Precision doublings attempted before giving up.
pub const MAX_DOUBLINGS: u32 = 6;

pub fn check_supported(p: u32) -> Result<(), ProfileError> {
    if p == 5 || (p >= 7 && is_prime(p as u64) && p % 4 == 3) {
        Ok(())
    } else {
        Err(ProfileError::UnsupportedP(p))
    }
}

/// One embedding `ζ_m ↦ exp(2πik/m)` per complex-conjugate pair: `1 ≤ k ≤ m/2`,
/// `gcd(k, m) = 1`.
pub fn embedding_classes_for_order(m: u32) -> Vec<GaloisEmbedding> {
    (1..=m / 2)
        .filter(|k| k.gcd(&m) == 1)
        .map(|k| GaloisEmbedding { order: m, exponent: k })
        .collect()
}

/// Embedding classes of the field generated by the Burau parameter `q_p(A)`, which is
/// `Q(ζ_p)` for every supported `p`.
pub fn embedding_classes(p: u32) -> Result<Vec<GaloisEmbedding>, ProfileError> {
    check_supported(p)?;
    let field = BurauParams::standard(p, 4)?.q.order();
    Ok(embedding_classes_for_order(field))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn is_definite(&self) -> bool {
        self.n_zero == 0 && (self.n_plus == 0 || self.n_minus == 0)
    }
}

fn sign_changes(signs: &[Sign]) -> usize {
    let nonzero: Vec<Sign> = signs.iter().copied().filter(|s| *s != Sign::Zero).collect();
    nonzero.windows(2).filter(|w| w[0] != w[1]).count()
}

fn flip(s: Sign) -> Sign {
    match s {
        Sign::Positive => Sign::Negative,
        Sign::Negative => Sign::Positive,
        Sign::Zero => Sign::Zero,
    }
}

/// Signature of `σ(H)`, with signs certified at `precision` digits and retried at doubled
/// precision when an interval straddles zero.
pub fn signature_of(h: &HermitianForm, sigma: &GaloisEmbedding, precision: u32) -> Result<Signature, ProfileError> {
    let order = h.matrix().order();
    let sigma = if sigma.order == order {
        *sigma
    } else {
        return Err(ProfileError::FieldMismatch { want: order, got: sigma.order });
    };
    let chi = h.matrix().charpoly();
    let mut signs = Vec::with_capacity(chi.coeffs().len());
    for c in chi.coeffs() {
        if c.is_zero() {
            signs.push(Sign::Zero);
            continue;
        }
        let mut digits = precision.max(15);
        let mut decided = None;
        for _ in 0..=MAX_DOUBLINGS {
            if let Some(s) = real_sign(&embed_numeric(c, &sigma, digits)) {
                decided = Some(s);
                break;
            }
            digits *= 2;
        }
        signs.push(decided.ok_or(ProfileError::PrecisionExhausted { digits: digits / 2 })?);
    }
    let d = h.dim();
    let n_zero = signs.iter().take_while(|s| **s == Sign::Zero).count();
    let n_plus = sign_changes(&signs);
    // χ(−x): flip the signs of odd-degree coefficients
    let neg: Vec<Sign> = signs
        .iter()
        .enumerate()
        .map(|(i, &s)| if i % 2 == 1 { flip(s) } else { s })
        .collect();
    let n_minus = sign_changes(&neg);
    debug_assert_eq!(n_plus + n_minus + n_zero, d);
    Ok(Signature { n_plus, n_minus, n_zero })
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorDescriptor {
    pub embedding: GaloisEmbedding,
    pub signature: (usize, usize),
    pub compact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RepresentationTag {
    /// The reduced Burau representation of the pure braid group `PB_4`.
    BurauPb4,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupProfile {
    pub p: u32,
    pub representation: RepresentationTag,
    /// Exponent `k` of the root `A = ζ_{2p}^k` used to build the form.
    pub a_exponent: u32,
    pub field_order: u32,
    pub solution_space_dim: usize,
    pub factors: Vec<FactorDescriptor>,
    /// Number of non-compact factors.
    pub noncompact: usize,
}

/// Profile at the standard root `A_p`; every embedding class is visited, so the choice
/// of `A` only fixes the labelling of the classes.
pub fn group_profile(p: u32, tag: RepresentationTag, precision: u32) -> Result<GroupProfile, ProfileError> {
    check_supported(p)?;
    let a = crate::burau::standard_root_of_unity(p)?.exponent;
    group_profile_at(p, a, tag, precision)
}

pub fn group_profile_at(
    p: u32,
    a_exponent: u32,
    tag: RepresentationTag,
    precision: u32,
) -> Result<GroupProfile, ProfileError> {
    check_supported(p)?;
    let RepresentationTag::BurauPb4 = tag;
    let params = BurauParams::new(p, a_exponent, 4)?;
    let gens = params.pure_generators();
    let inv = invariant_hermitian_form(&gens)?;
    let field_order = gens[0].order();
    let mut factors = Vec::new();
    for sigma in embedding_classes_for_order(field_order) {
        let s = signature_of(&inv.form, &sigma, precision)?;
        factors.push(FactorDescriptor {
            embedding: sigma,
            signature: (s.n_plus, s.n_minus),
            compact: s.is_definite(),
        });
    }
    let noncompact = factors.iter().filter(|f| !f.compact).count();
    Ok(GroupProfile {
        p,
        representation: tag,
        a_exponent: params.a_exponent,
        field_order,
        solution_space_dim: inv.solution_space_dim,
        factors,
        noncompact,
    })
}
