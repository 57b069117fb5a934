//! Block dimensions from fusion matrices, independent of the coloring search.
//!
//! With `N_a[b][c] = 1` iff `(a, b, c)` is admissible and the handle operator
//! `K = Σ_b N_b²`, the dimension for `Σ_{g,n}` with labels `a_1, …, a_n` is
//! `(K^g N_{a_1} ⋯ N_{a_n})_{00}`.

use super::{BlockError, ColorSystem};

type Mat = Vec<Vec<u128>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![0u128; n]; n];
    for i in 0..n {
        for t in 0..n {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

fn fusion_matrix(sys: &ColorSystem, a: u32) -> Mat {
    sys.colors
        .iter()
        .map(|&b| sys.colors.iter().map(|&c| sys.admissible(a, b, c) as u128).collect())
        .collect()
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u128).collect()).collect()
}

pub fn verlinde_dimension(genus: usize, labels: &[u32], sys: &ColorSystem) -> Result<u128, BlockError> {
    for &l in labels {
        if !sys.contains(l) {
            return Err(BlockError::NotAColor(l));
        }
    }
    let m = sys.colors.len();
    let mut handle = vec![vec![0u128; m]; m];
    for &b in &sys.colors {
        let nb = fusion_matrix(sys, b);
        let sq = mat_mul(&nb, &nb);
        for i in 0..m {
            for j in 0..m {
                handle[i][j] += sq[i][j];
            }
        }
    }
    let mut acc = identity(m);
    for _ in 0..genus {
        acc = mat_mul(&acc, &handle);
    }
    for &a in labels {
        acc = mat_mul(&acc, &fusion_matrix(sys, a));
    }
    // color 0 is always first
    Ok(acc[0][0])
}
