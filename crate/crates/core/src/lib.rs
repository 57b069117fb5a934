//! Exact cyclotomic arithmetic, Burau and conformal-block data, finite-quotient
//! enumeration and complex-hyperbolic quasimorphisms for quantum representations
//! at roots of unity.

pub mod cyclo;
pub mod linalg;
pub mod burau;
pub mod blocks;
pub mod profile;
pub mod quotients;
pub mod quasi;
