//! The Dupont cocycle of the `SU(2,1)` Burau factor, evaluated through the Cartan angular
//! invariant on complex hyperbolic 2-space, and the homogeneous quasimorphism
//! (rotation number) it induces on the 4-strand braid group.
//!
//! With `⟨x, y⟩ = x† H y`, the cocycle is `c(g, h) = (κ/4π) · A(x₀, g x₀, gh x₀)` where
//! `A(x, y, z) = arg(−⟨x,y⟩⟨y,z⟩⟨z,x⟩) ∈ (−π/2, π/2)`, so `|c| ≤ κ/8`.
//!
//! `H²(B_4; ℝ) = 0`, so `c = δψ` for a function `ψ` on the braid group,
//! `ψ(gh) = ψ(g) + ψ(h) − c(g, h)`. The braid relations fix the values of `ψ` on the
//! generators up to a homomorphism, which is chosen so that the homogenization vanishes on
//! the central full twist. The rotation number is that homogenization,
//! `r(g) = ψ(g) − lim_n (1/n) Σ_{k=1}^{n−1} c(g, g^k)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::burau::{BraidWord, BurauError, BurauParams};
use crate::cyclo::{CyclotomicNumber, GaloisEmbedding};
use crate::linalg::{invariant_hermitian_form, LinalgError, RepMatrix};
use crate::profile::{signature_of, ProfileError, DEFAULT_PRECISION};

pub type CMat = Matrix3<Complex64>;
pub type CVec = Vector3<Complex64>;

/// Default area normalization: the Kähler area of a triangle is twice its Cartan invariant.
pub const DEFAULT_KAPPA: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasiError {
    #[error("the form is definite at this embedding: no indefinite model")]
    DefiniteClass,
    #[error("the model needs a 3-dimensional representation, got {0}")]
    WrongDimension(usize),
    #[error("vector is not negative: ⟨v, v⟩ = {0}")]
    NotNegative(f64),
    #[error("a pairing vanishes within tolerance")]
    DegenerateTriple,
    #[error("matrix does not preserve the form (relative residual {0:.3e})")]
    NotUnitary(f64),
    #[error("n_max must be at least 16, got {0}")]
    SmallN(usize),
    #[error("rotation estimates did not settle: last delta {0:.3e}")]
    NonConvergent(f64),
    #[error(transparent)]
    Burau(#[from] BurauError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Relative tolerance for the unitarity check.
const UNITARY_TOL: f64 = 1e-9;
/// Pairings smaller than this, relative to the vector norms, count as vanishing.
const DEGENERATE_TOL: f64 = 1e-14;
/// Largest acceptable final delta of the rotation estimates.
const CONVERGENCE_TOL: f64 = 1e-4;

fn embed(x: &CyclotomicNumber, sigma: &GaloisEmbedding) -> Complex64 {
    let (re, im) = x.to_f64_parts(sigma.exponent as i64);
    Complex64::new(re, im)
}

fn embed_matrix(m: &RepMatrix, sigma: &GaloisEmbedding) -> CMat {
    CMat::from_fn(|i, j| embed(m.get(i, j), sigma))
}

pub fn pairing(h: &CMat, x: &CVec, y: &CVec) -> Complex64 {
    (x.adjoint() * h * y)[(0, 0)]
}

fn triple_arg(h: &CMat, x: &CVec, y: &CVec, z: &CVec) -> f64 {
    let t = -(pairing(h, x, y) * pairing(h, y, z) * pairing(h, z, x));
    t.im.atan2(t.re)
}

/// `arg(−⟨x,y⟩⟨y,z⟩⟨z,x⟩)` for negative vectors.
pub fn cartan_arg(x: &CVec, y: &CVec, z: &CVec, h: &CMat) -> Result<f64, QuasiError> {
    for v in [x, y, z] {
        let n = pairing(h, v, v).re;
        if !(n < 0.0) {
            return Err(QuasiError::NotNegative(n));
        }
    }
    let scale = h.norm();
    for (a, b) in [(x, y), (y, z), (z, x)] {
        if pairing(h, a, b).norm() <= DEGENERATE_TOL * scale * a.norm() * b.norm() {
            return Err(QuasiError::DegenerateTriple);
        }
    }
    Ok(triple_arg(h, x, y, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CocycleValue {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct IndefiniteModel {
    pub p: u32,
    pub a_exponent: u32,
    pub embedding: GaloisEmbedding,
    /// Embedded invariant form, negated if needed so that it has signature `(2, 1)`.
    pub h: CMat,
    pub basepoint: CVec,
    /// Embedded `β(g_1), β(g_2), β(g_3)`.
    pub generators: Vec<CMat>,
    pub kappa: f64,
    /// `ψ(g_1), ψ(g_2), ψ(g_3)`.
    psi: Vec<f64>,
}

/// Embedding classes where the 4-strand Burau form at `A = ζ_{2p}^a` is indefinite.
pub fn indefinite_classes(p: u32, a_exponent: u32) -> Result<Vec<GaloisEmbedding>, QuasiError> {
    let profile = crate::profile::group_profile_at(
        p,
        a_exponent,
        crate::profile::RepresentationTag::BurauPb4,
        DEFAULT_PRECISION,
    )?;
    Ok(profile.factors.iter().filter(|f| !f.compact).map(|f| f.embedding).collect())
}

impl IndefiniteModel {
    pub fn new(p: u32, a_exponent: u32, embedding: GaloisEmbedding, kappa: f64) -> Result<Self, QuasiError> {
        let params = BurauParams::new(p, a_exponent, 4)?;
        let gens = params.generators();
        let dim = gens[0].dim();
        if dim != 3 {
            return Err(QuasiError::WrongDimension(dim));
        }
        let form = invariant_hermitian_form(&gens)?.form;
        let sig = signature_of(&form, &embedding, DEFAULT_PRECISION)?;
        if sig.n_plus == 0 || sig.n_minus == 0 {
            return Err(QuasiError::DefiniteClass);
        }
        let mut h = embed_matrix(form.matrix(), &embedding);
        if sig.n_minus == 2 {
            h = -h;
        }
        // symmetrize away rounding so the eigensolver sees an exactly Hermitian matrix
        h = (h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(h);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let v: CVec = eig.eigenvectors.column(idx).into_owned();
        let basepoint = v.unscale((-pairing(&h, &v, &v).re).sqrt());
        let generators = gens.iter().map(|g| embed_matrix(g, &embedding)).collect();
        let mut model = IndefiniteModel {
            p,
            a_exponent: params.a_exponent,
            embedding,
            h,
            basepoint,
            generators,
            kappa,
            psi: vec![0.0; 3],
        };
        model.solve_primitive();
        Ok(model)
    }

    /// As [`IndefiniteModel::new`] with a different basepoint.
    pub fn with_basepoint(mut self, v: CVec) -> Result<Self, QuasiError> {
        let n = pairing(&self.h, &v, &v).re;
        if !(n < 0.0) {
            return Err(QuasiError::NotNegative(n));
        }
        self.basepoint = v.unscale((-n).sqrt());
        self.solve_primitive();
        Ok(self)
    }

    pub fn word_matrix(&self, w: &BraidWord) -> Result<CMat, QuasiError> {
        w.check(4)?;
        let mut acc = CMat::identity();
        for &l in &w.0 {
            acc *= self.letter(l);
        }
        Ok(acc)
    }

    fn letter(&self, l: i32) -> CMat {
        let g = self.generators[l.unsigned_abs() as usize - 1];
        if l > 0 {
            g
        } else {
            self.inverse(&g)
        }
    }

    /// `g^{-1} = H^{-1} g† H` for `g` preserving `H`.
    fn inverse(&self, g: &CMat) -> CMat {
        self.h.try_inverse().expect("nondegenerate form") * g.adjoint() * self.h
    }

    /// Relative residual `‖g†Hg − H‖ / (‖g‖² ‖H‖)`.
    pub fn unitarity_residual(&self, g: &CMat) -> f64 {
        (g.adjoint() * self.h * g - self.h).norm() / (g.norm_squared() * self.h.norm())
    }

    fn check_unitary(&self, g: &CMat) -> Result<(), QuasiError> {
        let r = self.unitarity_residual(g);
        if r < UNITARY_TOL {
            Ok(())
        } else {
            Err(QuasiError::NotUnitary(r))
        }
    }

    fn scale(&self) -> f64 {
        self.kappa / (4.0 * PI)
    }

    /// Cocycle without validation: points `x₀, g x₀, g h x₀`.
    fn raw_cocycle(&self, g: &CMat, gh: &CMat) -> f64 {
        let x = self.basepoint;
        self.scale() * triple_arg(&self.h, &x, &(g * x), &(gh * x))
    }

    pub fn dupont_cocycle(&self, g1: &CMat, g2: &CMat) -> Result<CocycleValue, QuasiError> {
        self.check_unitary(g1)?;
        self.check_unitary(g2)?;
        let x = self.basepoint;
        let (y, z) = (g1 * x, g1 * g2 * x);
        let h = &self.h;
        let arg = if (y - x).norm() <= 1e-12 * x.norm() || (z - x).norm() <= 1e-12 * x.norm() {
            // a repeated point: the triangle is degenerate
            0.0
        } else {
            cartan_arg(&x, &y, &z, h)?
        };
        // first-order rounding bound on the argument of the triple product
        let cond: f64 = [(&x, &y), (&y, &z), (&z, &x)]
            .iter()
            .map(|(a, b)| h.norm() * a.norm() * b.norm() / pairing(h, a, b).norm().max(f64::MIN_POSITIVE))
            .sum();
        Ok(CocycleValue {
            value: self.scale() * arg,
            error_estimate: self.scale() * 8.0 * f64::EPSILON * cond,
        })
    }

    /// `|c| ≤ κ/8`.
    pub fn cocycle_bound(&self) -> f64 {
        self.kappa / 8.0
    }

    /// `ψ` on a word, via `ψ(w s) = ψ(w) + ψ(s) − c(w, s)` and `ψ(s^{-1}) = −ψ(s)`.
    pub fn primitive(&self, w: &BraidWord) -> Result<f64, QuasiError> {
        w.check(4)?;
        let mut acc = CMat::identity();
        let mut value = 0.0;
        for &l in &w.0 {
            let s = self.letter(l);
            let next = acc * s;
            let ps = self.psi[l.unsigned_abs() as usize - 1] * l.signum() as f64;
            value += ps - self.raw_cocycle(&acc, &next);
            acc = next;
        }
        Ok(value)
    }

    /// Generator values of `ψ` from the braid relations
    /// `ψ(g_i g_{i+1} g_i) = ψ(g_{i+1} g_i g_{i+1})`, then shifted by a multiple of the
    /// exponent sum so that the homogenization vanishes on the full twist.
    fn solve_primitive(&mut self) {
        self.psi = vec![0.0; 3];
        let g = self.generators.clone();
        for i in 0..2 {
            let (a, b) = (g[i], g[i + 1]);
            let lhs = self.raw_cocycle(&a, &(a * b)) + self.raw_cocycle(&(a * b), &(a * b * a));
            let rhs = self.raw_cocycle(&b, &(b * a)) + self.raw_cocycle(&(b * a), &(b * a * b));
            // ψ_i − ψ_{i+1} = lhs − rhs
            self.psi[i + 1] = self.psi[i] - (lhs - rhs);
        }
        // the full twist acts by a scalar, so its homogenization is ψ itself
        let twist = BraidWord([1, 2, 3].repeat(4));
        let t = self.primitive(&twist).expect("valid word") / 12.0;
        for v in &mut self.psi {
            *v -= t;
        }
    }

    pub fn generator_primitive(&self) -> &[f64] {
        &self.psi
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RotationReport {
    pub value: f64,
    /// `(n, ψ(g) − F(n)/n)` for `n = 16, 32, …`.
    pub estimates: Vec<(usize, f64)>,
    pub deltas: Vec<f64>,
    /// Whether the reported value is the Richardson-extrapolated sequence.
    pub extrapolated: bool,
}

/// Rotation number of a braid word, with estimates at doubling `n` up to the largest power
/// of two not above `n_max`.
pub fn rotation_number(word: &BraidWord, model: &IndefiniteModel, n_max: usize) -> Result<RotationReport, QuasiError> {
    if n_max < 16 {
        return Err(QuasiError::SmallN(n_max));
    }
    let g = model.word_matrix(word)?;
    model.check_unitary(&g)?;
    let psi = model.primitive(word)?;
    let h = &model.h;
    let x0 = model.basepoint;
    let x1 = g * x0;
    let mut xk = x1;
    let mut sum = 0.0;
    let mut estimates = Vec::new();
    let mut next = 16;
    for k in 1..n_max {
        // x_{k+1} = g^{k+1} x₀, rescaled to stay finite
        xk = g * xk;
        xk.unscale_mut(xk.norm());
        sum += triple_arg(h, &x0, &x1, &xk);
        if k + 1 == next {
            estimates.push((next, psi - model.scale() * sum / next as f64));
            next *= 2;
        }
    }
    let raw: Vec<f64> = estimates.iter().map(|e| e.1).collect();
    let rich: Vec<f64> = raw.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let last_delta = |v: &[f64]| match v {
        [.., a, b] => (b - a).abs(),
        _ => f64::INFINITY,
    };
    let (dr, dx) = (last_delta(&raw), last_delta(&rich));
    let extrapolated = dx < dr;
    let seq = if extrapolated { &rich } else { &raw };
    let deltas: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let value = *seq.last().unwrap();
    let delta = dr.min(dx);
    if !value.is_finite() || (raw.len() > 1 && delta > CONVERGENCE_TOL) {
        return Err(QuasiError::NonConvergent(delta));
    }
    Ok(RotationReport { value, estimates, deltas, extrapolated })
}
