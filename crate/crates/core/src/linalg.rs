//! Matrices and polynomials over a cyclotomic field, invariant Hermitian forms,
//! Burnside spans and the finite-order decision procedure.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cyclo::{cyclotomic_polynomial, euler_phi, CyclotomicNumber};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("no nonzero invariant Hermitian form exists")]
    NoInvariantForm,
    #[error("matrices have inconsistent dimensions or field orders")]
    DimensionMismatch,
    #[error("matrix is singular")]
    Singular,
    #[error("empty generator list")]
    NoGenerators,
}

type K = CyclotomicNumber;

/// Square matrix over `Q(ζ_n)`, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RepMatrix {
    dim: usize,
    order: u32,
    entries: Vec<K>,
}

impl fmt::Debug for RepMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RepMatrix over Q(z{}) [", self.order)?;
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RepMatrix {
    pub fn from_rows(rows: Vec<Vec<K>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::DimensionMismatch);
        }
        let order = rows[0][0].order();
        let entries: Vec<K> = rows.into_iter().flatten().collect();
        if entries.iter().any(|x| x.order() != order) {
            return Err(LinalgError::DimensionMismatch);
        }
        Ok(RepMatrix { dim, order, entries })
    }

    pub fn from_fn(dim: usize, order: u32, f: impl Fn(usize, usize) -> K) -> Self {
        let entries = (0..dim * dim).map(|t| f(t / dim, t % dim)).collect::<Vec<_>>();
        debug_assert!(entries.iter().all(|x| x.order() == order));
        RepMatrix { dim, order, entries }
    }

    pub fn identity(dim: usize, order: u32) -> Self {
        Self::from_fn(dim, order, |i, j| K::from_int(order, (i == j) as i64))
    }

    pub fn zero(dim: usize, order: u32) -> Self {
        Self::from_fn(dim, order, |_, _| K::zero(order))
    }

    pub fn diagonal(diag: &[K]) -> Self {
        let order = diag[0].order();
        Self::from_fn(diag.len(), order, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                K::zero(order)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &K {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: K) {
        assert_eq!(v.order(), self.order);
        self.entries[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[K] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[K] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        Self::from_fn(d, self.order, |i, j| {
            let mut acc = K::zero(self.order);
            for t in 0..d {
                let a = self.get(i, t);
                let b = other.get(t, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, self.order, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, self.order, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, c: &K) -> Self {
        Self::from_fn(self.dim, self.order, |i, j| self.get(i, j) * c)
    }

    pub fn map(&self, f: impl Fn(&K) -> K) -> Self {
        let entries: Vec<K> = self.entries.iter().map(f).collect();
        let order = entries[0].order();
        RepMatrix { dim: self.dim, order, entries }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, self.order, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, self.order, |i, j| self.get(j, i).conj())
    }

    pub fn galois(&self, k: i64) -> Self {
        self.map(|x| x.galois(k))
    }

    pub fn lift_to(&self, m: u32) -> Result<Self, LinalgError> {
        let entries = self
            .entries
            .iter()
            .map(|x| x.lift_to(m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| LinalgError::DimensionMismatch)?;
        Ok(RepMatrix { dim: self.dim, order: m, entries })
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let x = self.get(i, j);
                if i == j {
                    x.is_one()
                } else {
                    x.is_zero()
                }
            })
        })
    }

    pub fn trace(&self) -> K {
        (0..self.dim).fold(K::zero(self.order), |acc, i| &acc + self.get(i, i))
    }

    pub fn det(&self) -> K {
        let d = self.dim;
        let mut a: Vec<Vec<K>> = (0..d).map(|i| self.row(i).to_vec()).collect();
        let mut det = K::one(self.order);
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !a[r][col].is_zero()) else {
                return K::zero(self.order);
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det = &det * &a[col][col];
            let inv = a[col][col].inv().unwrap();
            for r in col + 1..d {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] * &inv;
                for c in col..d {
                    let t = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let d = self.dim;
        let one = K::one(self.order);
        let zero = K::zero(self.order);
        let mut a: Vec<Vec<K>> = (0..d)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..d).map(|j| if i == j { one.clone() } else { zero.clone() }));
                r
            })
            .collect();
        for col in 0..d {
            let piv = (col..d).find(|&r| !a[r][col].is_zero()).ok_or(LinalgError::Singular)?;
            a.swap(piv, col);
            let inv = a[col][col].inv().unwrap();
            for c in 0..2 * d {
                a[col][c] = &a[col][c] * &inv;
            }
            for r in 0..d {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..2 * d {
                    let t = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
        }
        Ok(Self::from_fn(d, self.order, |i, j| a[i][d + j].clone()))
    }

    /// `self^e` for any integer `e` (negative powers need an invertible matrix).
    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            return self.inverse().expect("negative power of singular matrix").pow(-e);
        }
        let mut acc = Self::identity(self.dim, self.order);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Characteristic polynomial `det(xI - M)` by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> KPoly {
        let d = self.dim;
        let n = self.order;
        let mut coeffs = vec![K::zero(n); d + 1];
        coeffs[d] = K::one(n);
        let ident = Self::identity(d, n);
        let mut m = Self::zero(d, n);
        for k in 1..=d {
            m = self.mul(&m).add(&ident.scale(&coeffs[d - k + 1]));
            let am = self.mul(&m);
            let c = am.trace().scale_rational(&BigRational::new((-1).into(), (k as i64).into()));
            coeffs[d - k] = c;
        }
        KPoly::new(n, coeffs)
    }

    /// Entries flattened row-major.
    pub fn to_vector(&self) -> Vec<K> {
        self.entries.clone()
    }
}

/// Polynomial over `Q(ζ_n)`, constant term first.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KPoly {
    order: u32,
    coeffs: Vec<K>,
}

impl KPoly {
    pub fn new(order: u32, mut coeffs: Vec<K>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        KPoly { order, coeffs }
    }

    pub fn from_ints(order: u32, c: &[i64]) -> Self {
        Self::new(order, c.iter().map(|&v| K::from_int(order, v)).collect())
    }

    pub fn coeffs(&self) -> &[K] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn monic(&self) -> Self {
        let lead = self.coeffs.last().expect("zero polynomial").inv().unwrap();
        Self::new(self.order, self.coeffs.iter().map(|c| c * &lead).collect())
    }

    pub fn divrem(&self, b: &Self) -> (Self, Self) {
        let db = b.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Self::new(self.order, vec![]), self.clone());
        }
        let lead_inv = b.coeffs[db].inv().unwrap();
        let mut q = vec![K::zero(self.order); r.len() - db];
        for i in (0..q.len()).rev() {
            let c = &r[i + db] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                let t = &c * bj;
                r[i + j] = &r[i + j] - &t;
            }
            q[i] = c;
        }
        r.truncate(db);
        (Self::new(self.order, q), Self::new(self.order, r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }
}

/// Multiplies a vector by a nonzero rational so its coordinates become integral with
/// content one. The zero vector is left alone.
fn primitive_part(v: &mut [K]) {
    let mut den = BigInt::one();
    for x in v.iter() {
        den = den.lcm(x.denominator());
    }
    let mut g = BigInt::zero();
    for x in v.iter() {
        let scale = &den / x.denominator();
        for c in x.numerators() {
            if !c.is_zero() {
                g = g.gcd(&(c * &scale));
            }
        }
    }
    if g.is_zero() {
        return;
    }
    let r = BigRational::new(den, g.abs());
    if !r.is_one() {
        for x in v.iter_mut() {
            *x = x.scale_rational(&r);
        }
    }
}

/// Rank by fraction-free elimination; each updated row is rescaled to its primitive
/// part so integer sizes stay bounded.
pub fn rank(rows: &[Vec<K>]) -> usize {
    let mut a: Vec<Vec<K>> = rows.to_vec();
    for r in a.iter_mut() {
        primitive_part(r);
    }
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv, rank);
        let p = a[rank][col].clone();
        for r in rank + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            let new: Vec<K> = (0..ncols)
                .map(|c| &(&p * &a[r][c]) - &(&f * &a[rank][c]))
                .collect();
            a[r] = new;
            primitive_part(&mut a[r]);
        }
        rank += 1;
    }
    rank
}

/// Incrementally maintained row-echelon basis of a subspace of `K^len`, pivots scaled to 1.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, Vec<K>)>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        EchelonBasis { len, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[K]) -> Vec<K> {
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            if v[*piv].is_zero() {
                continue;
            }
            let f = v[*piv].clone();
            for c in *piv..self.len {
                if !row[c].is_zero() {
                    v[c] = &v[c] - &(&f * &row[c]);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[K]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v` if it is independent; returns whether it was added.
    pub fn insert(&mut self, v: &[K]) -> bool {
        assert_eq!(v.len(), self.len);
        let mut r = self.reduce(v);
        let Some(piv) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        primitive_part(&mut r);
        let inv = r[piv].inv().unwrap();
        for x in r.iter_mut().skip(piv) {
            *x = &*x * &inv;
        }
        let pos = self.rows.partition_point(|(p, _)| *p < piv);
        self.rows.insert(pos, (piv, r));
        true
    }
}

/// Basis of the right kernel `{x : A x = 0}` of a `rows × ncols` matrix, via reduced
/// row echelon form.
pub fn kernel(rows: &[Vec<K>], ncols: usize, order: u32) -> Vec<Vec<K>> {
    let mut a: Vec<Vec<K>> = rows.to_vec();
    for r in a.iter_mut() {
        primitive_part(r);
    }
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv, rank);
        let inv = a[rank][col].inv().unwrap();
        for c in 0..ncols {
            a[rank][c] = &a[rank][c] * &inv;
        }
        for r in 0..a.len() {
            if r == rank || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..ncols {
                if !a[rank][c].is_zero() {
                    let t = &f * &a[rank][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![K::zero(order); ncols];
            v[f] = K::one(order);
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[i][f];
            }
            v
        })
        .collect()
}

/// A Hermitian matrix `H† = H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianForm {
    matrix: RepMatrix,
}

impl HermitianForm {
    pub fn new(matrix: RepMatrix) -> Option<Self> {
        (matrix.dagger() == matrix).then_some(HermitianForm { matrix })
    }

    pub fn matrix(&self) -> &RepMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.matrix.det().is_zero()
    }

    /// `g† H g = H`.
    pub fn is_invariant_under(&self, g: &RepMatrix) -> bool {
        g.dagger().mul(&self.matrix).mul(g) == self.matrix
    }
}

#[derive(Clone, Debug)]
pub struct InvariantForm {
    pub form: HermitianForm,
    /// Dimension over the real subfield of the space of invariant Hermitian forms.
    pub solution_space_dim: usize,
    pub nondegenerate: bool,
}

/// Solves `g† H g = H` for all generators. The solution space `V` is a `K`-subspace of
/// matrices stable under `H ↦ H†`; its Hermitian part has real-subfield dimension
/// `dim_K V` (or the symmetric part's dimension when `K` is real) and is spanned by
/// `B + B†` and `t(B − B†)`, `t = ζ − ζ^{-1}`, over a `K`-basis `B` of `V`.
pub fn invariant_hermitian_form(gens: &[RepMatrix]) -> Result<InvariantForm, LinalgError> {
    let first = gens.first().ok_or(LinalgError::NoGenerators)?;
    let (d, n) = (first.dim, first.order);
    if gens.iter().any(|g| g.dim != d || g.order != n) {
        return Err(LinalgError::DimensionMismatch);
    }
    let nv = d * d;
    let mut eqs: Vec<Vec<K>> = Vec::new();
    for g in gens {
        let gd = g.dagger();
        // (g† H g)_{ij} = Σ_{a,b} gd[i][a] H[a][b] g[b][j]
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![K::zero(n); nv];
                for a in 0..d {
                    if gd.get(i, a).is_zero() {
                        continue;
                    }
                    for b in 0..d {
                        if g.get(b, j).is_zero() {
                            continue;
                        }
                        let c = gd.get(i, a) * g.get(b, j);
                        row[a * d + b] = &row[a * d + b] + &c;
                    }
                }
                row[i * d + j] = &row[i * d + j] - &K::one(n);
                if row.iter().any(|x| !x.is_zero()) {
                    eqs.push(row);
                }
            }
        }
    }
    let basis = kernel(&eqs, nv, n);
    let t = &K::zeta_pow(n, 1) - &K::zeta_pow(n, -1);
    let mut herm = EchelonBasis::new(nv);
    let mut forms: Vec<RepMatrix> = Vec::new();
    for b in &basis {
        let bm = RepMatrix { dim: d, order: n, entries: b.clone() };
        let bd = bm.dagger();
        for cand in [bm.add(&bd), bm.sub(&bd).scale(&t)] {
            if herm.insert(&cand.entries) {
                forms.push(cand);
            }
        }
    }
    if forms.is_empty() {
        return Err(LinalgError::NoInvariantForm);
    }
    for f in forms.iter_mut() {
        primitive_part(&mut f.entries);
    }
    let dim = forms.len();
    let chosen = search_nondegenerate(&forms);
    let nondegenerate = chosen.is_some();
    let matrix = chosen.unwrap_or_else(|| forms[0].clone());
    let form = HermitianForm::new(matrix).expect("candidate is Hermitian");
    for g in gens {
        assert!(form.is_invariant_under(g), "invariant form failed exact verification");
    }
    Ok(InvariantForm { form, solution_space_dim: dim, nondegenerate })
}

fn search_nondegenerate(forms: &[RepMatrix]) -> Option<RepMatrix> {
    for f in forms {
        if !f.det().is_zero() {
            return Some(f.clone());
        }
    }
    if forms.len() == 1 {
        return None;
    }
    // small integer combinations, in a fixed order
    const COEFFS: [i64; 4] = [1, -1, 2, -2];
    const MAX_TRIES: usize = 4096;
    let m = forms.len();
    let mut idx = vec![0usize; m];
    for _ in 0..MAX_TRIES {
        let mut acc = RepMatrix::zero(forms[0].dim, forms[0].order);
        for (f, &i) in forms.iter().zip(&idx) {
            acc = acc.add(&f.scale(&K::from_int(f.order, COEFFS[i])));
        }
        if !acc.det().is_zero() {
            return Some(acc);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == m {
                return None;
            }
            idx[pos] += 1;
            if idx[pos] < COEFFS.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanReport {
    pub span_dim: usize,
    pub irreducible: bool,
}

/// Dimension of the span of all words of length `≤ max_word_len` (the empty word
/// included) and the Burnside criterion `span = M_d(K)`.
pub fn burnside_span(gens: &[RepMatrix], max_word_len: usize) -> Result<SpanReport, LinalgError> {
    let first = gens.first().ok_or(LinalgError::NoGenerators)?;
    let (d, n) = (first.dim, first.order);
    let mut basis = EchelonBasis::new(d * d);
    let id = RepMatrix::identity(d, n);
    basis.insert(&id.entries);
    let mut frontier = vec![id];
    for _ in 0..max_word_len {
        if basis.dim() == d * d || frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let m = g.mul(w);
                if basis.insert(&m.entries) {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    let span_dim = basis.dim();
    Ok(SpanReport { span_dim, irreducible: span_dim == d * d })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteOrderReport {
    pub finite: bool,
    pub order: Option<u64>,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All `m` with `φ(m) ≤ bound`.
pub fn orders_with_phi_at_most(bound: u64) -> Vec<u64> {
    // φ(m) ≥ sqrt(m/2), so m ≤ 2·bound²
    (1..=2 * bound * bound + 2).filter(|&m| euler_phi(m) <= bound).collect()
}

/// Decides whether `g` has finite order. Eigenvalues of a finite-order `g` are roots of
/// unity of orders `m` with `φ(m) ≤ d·φ(n)`; we strip every such `Φ_m` from the
/// characteristic polynomial. If something remains the order is infinite; otherwise
/// `g` has finite order iff `g^e = 1` for `e` the lcm of the orders found.
pub fn finite_order_test(g: &RepMatrix) -> FiniteOrderReport {
    let n = g.order;
    let bound = g.dim as u64 * euler_phi(n as u64);
    let mut chi = g.charpoly();
    let mut e: u64 = 1;
    for m in orders_with_phi_at_most(bound) {
        if chi.degree() == Some(0) {
            break;
        }
        let phi_m = KPoly::from_ints(n, &cyclotomic_polynomial(m as u32));
        loop {
            let h = chi.gcd(&phi_m);
            if h.degree().unwrap_or(0) == 0 {
                break;
            }
            e = e.lcm(&m);
            chi = chi.divrem(&h).0;
        }
    }
    if chi.degree() != Some(0) {
        return FiniteOrderReport { finite: false, order: None };
    }
    if !g.pow(e as i64).is_identity() {
        // a finite-order matrix in characteristic zero is diagonalizable
        return FiniteOrderReport { finite: false, order: None };
    }
    let mut order = e;
    for p in prime_factors(e) {
        while order % p == 0 && g.pow((order / p) as i64).is_identity() {
            order /= p;
        }
    }
    FiniteOrderReport { finite: true, order: Some(order) }
}
