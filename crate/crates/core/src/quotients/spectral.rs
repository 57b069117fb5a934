//! Second eigenvalue of the normalized adjacency operator of a regular graph, by
//! Lanczos with full reorthogonalization on the complement of the constant vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Closure, QuotientError, ReducedGenSet, Stepper};

const MAX_ITER: usize = 300;
const TOL: f64 = 1e-12;
const CHECK_EVERY: usize = 5;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralResult {
    pub lambda2: f64,
    /// Lanczos residual bound `|β_j s_j|` of the reported Ritz value.
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
}

fn largest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let j = alpha.len();
    let t = DMatrix::from_fn(j, j, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let last = eig.eigenvectors[(j - 1, idx)];
    (theta, (beta[j - 1] * last).abs())
}

/// `neighbors[i * degree + s]` is the `s`-th neighbor of vertex `i`; the graph must be
/// undirected as a multigraph. Returns the largest eigenvalue of `A/degree` on the
/// orthogonal complement of the constant vector. A single vertex gives `0`.
pub fn normalized_lambda2(neighbors: &[u32], degree: usize, seed: u64) -> SpectralResult {
    let n = neighbors.len() / degree;
    if n <= 1 {
        return SpectralResult { lambda2: 0.0, residual: 0.0, iterations: 0 };
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        let inv = 1.0 / degree as f64;
        for (i, out) in y.iter_mut().enumerate() {
            let row = &neighbors[i * degree..(i + 1) * degree];
            *out = row.iter().map(|&j| x[j as usize]).sum::<f64>() * inv;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    remove_mean(&mut v);
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let max_iter = MAX_ITER.min(n - 1);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best = (0.0, f64::INFINITY);
    for j in 0..max_iter {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        // two passes of classical Gram–Schmidt against the basis and the constant vector
        for _ in 0..2 {
            remove_mean(&mut w);
            for b in &basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
        }
        let bnorm = dot(&w, &w).sqrt();
        beta.push(bnorm);
        let done = bnorm < TOL || j + 1 == max_iter;
        if done || (j + 1) % CHECK_EVERY == 0 {
            best = largest_ritz(&alpha, &beta);
            if done || best.1 < TOL {
                return SpectralResult { lambda2: best.0, residual: best.1, iterations: j + 1 };
            }
        }
        basis.push(w.iter().map(|x| x / bnorm).collect());
    }
    SpectralResult { lambda2: best.0, residual: best.1, iterations: max_iter }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub group_order: u64,
    /// Size of the symmetric generating multiset (generators and their inverses).
    pub generator_count: usize,
    pub lambda2: f64,
    pub gap: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Spectral gap of the Cayley graph of a complete closure with respect to the
/// generators and their inverses.
pub fn cayley_gap(
    rgs: &ReducedGenSet,
    closure: &Closure,
    spectral_budget: u64,
    seed: u64,
) -> Result<GapReport, QuotientError> {
    if closure.report.truncated {
        return Err(QuotientError::IncompleteClosure);
    }
    let order = closure.elements.len() as u64;
    if order > spectral_budget {
        return Err(QuotientError::SpectralBudgetExceeded { order, budget: spectral_budget });
    }
    let mut sorted = closure.elements.clone();
    sorted.sort_unstable();
    let stepper = Stepper::new(rgs);
    let degree = rgs.generators.len();
    let mut neighbors = Vec::with_capacity(sorted.len() * degree);
    for &x in &sorted {
        for g in 0..degree {
            let y = stepper.step(x, g);
            let idx = sorted.binary_search(&y).map_err(|_| QuotientError::IncompleteClosure)?;
            neighbors.push(idx as u32);
        }
    }
    let s = normalized_lambda2(&neighbors, degree, seed);
    Ok(GapReport {
        group_order: order,
        generator_count: degree,
        lambda2: s.lambda2,
        gap: 1.0 - s.lambda2,
        residual: s.residual,
        iterations: s.iterations,
    })
}
