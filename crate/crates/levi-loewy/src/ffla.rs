//! Exact dense and sparse linear algebra over small prime fields.
//!
//! Entries live in fixed-width bit lanes of `u64` words (8-bit lanes for
//! p <= 11, 16-bit lanes up to p = 64).  Row operations are SWAR: one
//! multiply-add per word followed by a branch-free lane-wise reduction.
//!
//! Convention used across the crate: vectors are rows and a matrix acts on
//! the right, `v -> v * A`.  Row `i` of an action matrix is the image of the
//! `i`-th basis vector.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FflaError {
    #[error("unsupported modulus {0}: need a prime 2 <= p <= 64")]
    BadPrime(u32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("subspace is not invariant under generator {0}")]
    NotInvariant(usize),
    #[error("cache decode failed: {0}")]
    Decode(String),
    #[error("cache version mismatch: found {found}, expected {expected}")]
    Version { found: u16, expected: u16 },
}

pub type Result<T> = std::result::Result<T, FflaError>;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Deterministic RNG used by every randomized routine.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Field descriptor with the SWAR constants for its lane width.
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    p: u32,
    bits: u32,
    lanes: usize,
    lane_mask: u64,
    ones: u64,
    high: u64,
    steps: usize,
    // (bias, subtrahend) per reduction step, largest multiple first
    red: [(u64, u64); 7],
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}
impl Eq for Fp {}

impl Fp {
    pub fn new(p: u32) -> Result<Fp> {
        if !is_prime(p) || p > 64 {
            return Err(FflaError::BadPrime(p));
        }
        let bits: u32 = if p * p - p < 128 { 8 } else { 16 };
        let lanes = (64 / bits) as usize;
        let lane_mask = (1u64 << bits) - 1;
        let mut ones = 0u64;
        for l in 0..lanes {
            ones |= 1u64 << (l as u32 * bits);
        }
        let high = ones << (bits - 1);
        // after one multiply-add a lane holds at most p^2 - p; long division
        // by p needs multiples p*2^k for k = floor(log2(p-1)) .. 0
        let mut k = 0u32;
        while (p << (k + 1)) <= p * p - p {
            k += 1;
        }
        let mut red = [(0u64, 0u64); 7];
        let mut steps = 0;
        for kk in (0..=k).rev() {
            let m = (p << kk) as u64;
            let half = 1u64 << (bits - 1);
            red[steps] = ((half - m) * ones, m * ones);
            steps += 1;
        }
        Ok(Fp { p, bits, lanes, lane_mask, ones, high, steps, red })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }
    #[inline]
    pub fn lanes(&self) -> usize {
        self.lanes
    }
    #[inline]
    pub fn words(&self, n: usize) -> usize {
        n.div_ceil(self.lanes)
    }

    #[inline]
    fn reduce_word(&self, mut x: u64) -> u64 {
        let sh = self.bits - 1;
        for s in 0..self.steps {
            let (bias, m) = self.red[s];
            let t = x.wrapping_add(bias) & self.high;
            let mask = (t >> sh).wrapping_mul(self.lane_mask);
            x -= m & mask;
        }
        x
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }
    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }
    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a * b) % self.p
    }
    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }
    pub fn pow(&self, a: u32, mut e: u32) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    /// Reduce a signed integer into `[0, p)`.
    pub fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    // ---- packed row primitives -------------------------------------------

    #[inline]
    pub fn get(&self, row: &[u64], j: usize) -> u32 {
        let w = j / self.lanes;
        let s = (j % self.lanes) as u32 * self.bits;
        ((row[w] >> s) & self.lane_mask) as u32
    }

    #[inline]
    pub fn set(&self, row: &mut [u64], j: usize, v: u32) {
        let w = j / self.lanes;
        let s = (j % self.lanes) as u32 * self.bits;
        row[w] = (row[w] & !(self.lane_mask << s)) | (((v % self.p) as u64) << s);
    }

    /// `dst += c * src`, lane-wise mod p.
    #[inline]
    pub fn axpy(&self, dst: &mut [u64], src: &[u64], c: u32) {
        if c == 0 {
            return;
        }
        let c = c as u64;
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if *s != 0 {
                *d = self.reduce_word(*d + c * *s);
            }
        }
    }

    /// `row *= c`.
    #[inline]
    pub fn scale(&self, row: &mut [u64], c: u32) {
        let c = c as u64;
        for d in row.iter_mut() {
            *d = self.reduce_word(*d * c);
        }
    }

    pub fn neg_row(&self, row: &mut [u64]) {
        self.scale(row, self.p - 1)
    }

    pub fn zero_row(&self, n: usize) -> Vec<u64> {
        vec![0u64; self.words(n)]
    }

    pub fn pack(&self, entries: &[u32]) -> Vec<u64> {
        let mut r = self.zero_row(entries.len());
        for (j, &v) in entries.iter().enumerate() {
            if v % self.p != 0 {
                self.set(&mut r, j, v);
            }
        }
        r
    }

    pub fn unpack(&self, row: &[u64], n: usize) -> Vec<u32> {
        (0..n).map(|j| self.get(row, j)).collect()
    }

    /// First nonzero position of a packed row of logical length n.
    pub fn leading(&self, row: &[u64], n: usize) -> Option<usize> {
        for (w, &x) in row.iter().enumerate() {
            if x != 0 {
                let lane = x.trailing_zeros() / self.bits;
                let j = w * self.lanes + lane as usize;
                return if j < n { Some(j) } else { None };
            }
        }
        None
    }

    pub fn is_zero_row(row: &[u64]) -> bool {
        row.iter().all(|&x| x == 0)
    }

    /// `v * A` for a packed row vector.
    pub fn vec_mat(&self, v: &[u64], a: &FMatrix) -> Vec<u64> {
        let mut out = self.zero_row(a.cols);
        self.vec_mat_into(v, a, &mut out);
        out
    }

    pub fn vec_mat_into(&self, v: &[u64], a: &FMatrix, out: &mut [u64]) {
        for (w, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for l in 0..self.lanes {
                let c = ((x >> (l as u32 * self.bits)) & self.lane_mask) as u32;
                if c != 0 {
                    let j = w * self.lanes + l;
                    self.axpy(out, a.row(j), c);
                }
            }
        }
    }

    pub fn random_row<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<u64> {
        let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..self.p)).collect();
        self.pack(&e)
    }

    pub fn ones_word(&self) -> u64 {
        self.ones
    }
}

/// Dense packed matrix.
#[derive(Clone, Debug)]
pub struct FMatrix {
    fp: Fp,
    rows: usize,
    cols: usize,
    wpr: usize,
    data: Vec<u64>,
}

impl PartialEq for FMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.fp == other.fp && self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}
impl Eq for FMatrix {}

impl FMatrix {
    pub fn zeros(fp: Fp, rows: usize, cols: usize) -> FMatrix {
        let wpr = fp.words(cols);
        FMatrix { fp, rows, cols, wpr, data: vec![0; rows * wpr] }
    }

    pub fn identity(fp: Fp, n: usize) -> FMatrix {
        let mut m = FMatrix::zeros(fp, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_fn(fp: Fp, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> FMatrix {
        let mut m = FMatrix::zeros(fp, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j) % fp.p;
                if v != 0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn from_rows(fp: Fp, cols: usize, rows: &[Vec<u32>]) -> FMatrix {
        FMatrix::from_fn(fp, rows.len(), cols, |i, j| rows[i][j])
    }

    /// Build from already-packed rows of logical length `cols`.
    pub fn from_packed(fp: Fp, cols: usize, rows: Vec<Vec<u64>>) -> FMatrix {
        let mut m = FMatrix::zeros(fp, rows.len(), cols);
        for (i, r) in rows.into_iter().enumerate() {
            let w = m.wpr;
            m.row_mut(i).copy_from_slice(&r[..w]);
        }
        m
    }

    pub fn random<R: Rng>(fp: Fp, rows: usize, cols: usize, rng: &mut R) -> FMatrix {
        FMatrix::from_fn(fp, rows, cols, |_, _| rng.gen_range(0..fp.p))
    }

    #[inline]
    pub fn fp(&self) -> Fp {
        self.fp
    }
    #[inline]
    pub fn p(&self) -> u32 {
        self.fp.p
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.fp.get(self.row(i), j)
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        let fp = self.fp;
        fp.set(self.row_mut(i), j, v)
    }
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.wpr..(i + 1) * self.wpr]
    }
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.wpr..(i + 1) * self.wpr]
    }

    pub fn row_vec(&self, i: usize) -> Vec<u64> {
        self.row(i).to_vec()
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.fp.unpack(self.row(i), self.cols)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn nnz(&self) -> usize {
        let mut n = 0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != 0 {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.wpr {
            self.data.swap(a * self.wpr + w, b * self.wpr + w);
        }
    }

    /// `row[dst] += c * row[src]`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: u32) {
        assert_ne!(dst, src);
        let wpr = self.wpr;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * wpr);
            (&mut lo[dst * wpr..(dst + 1) * wpr], &hi[..wpr])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * wpr);
            (&mut hi[..wpr], &lo[src * wpr..(src + 1) * wpr])
        };
        self.fp.axpy(a, b, c);
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.fp, self.cols, self.rows);
        for i in 0..self.rows {
            let r = self.row(i);
            for (w, &x) in r.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for l in 0..self.fp.lanes {
                    let j = w * self.fp.lanes + l;
                    if j >= self.cols {
                        break;
                    }
                    let v = ((x >> (l as u32 * self.fp.bits)) & self.fp.lane_mask) as u32;
                    if v != 0 {
                        t.set(j, i, v);
                    }
                }
            }
        }
        t
    }

    /// `self * other`.
    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = FMatrix::zeros(self.fp, self.rows, other.cols);
        for i in 0..self.rows {
            let (fp, src) = (self.fp, self.row(i));
            let dst = &mut out.data[i * out.wpr..(i + 1) * out.wpr];
            fp.vec_mat_into(src, other, dst);
        }
        out
    }

    pub fn add(&self, other: &FMatrix) -> FMatrix {
        self.lin(other, 1)
    }

    pub fn sub(&self, other: &FMatrix) -> FMatrix {
        self.lin(other, self.fp.p - 1)
    }

    /// `self + c * other`.
    pub fn lin(&self, other: &FMatrix, c: u32) -> FMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        self.fp.axpy(&mut out.data, &other.data, c);
        out
    }

    pub fn scaled(&self, c: u32) -> FMatrix {
        let mut out = self.clone();
        self.fp.scale(&mut out.data, c % self.fp.p);
        out
    }

    pub fn add_scalar_identity(&self, c: u32) -> FMatrix {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            let v = self.fp.add(out.get(i, i), c);
            out.set(i, i, v);
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> FMatrix {
        assert_eq!(self.rows, self.cols);
        let mut acc = FMatrix::identity(self.fp, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> FMatrix {
        FMatrix::from_fn(self.fp, r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn select_rows(&self, idx: &[usize]) -> FMatrix {
        let mut out = FMatrix::zeros(self.fp, idx.len(), self.cols);
        for (k, &i) in idx.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> FMatrix {
        FMatrix::from_fn(self.fp, self.rows, idx.len(), |i, k| self.get(i, idx[k]))
    }

    pub fn vstack(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.cols);
        let mut out = FMatrix::zeros(self.fp, self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        out
    }

    pub fn hstack(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.rows, other.rows);
        FMatrix::from_fn(self.fp, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn insert_row(&mut self, pos: usize, row: &[u64]) {
        let at = pos * self.wpr;
        self.data.splice(at..at, row[..self.wpr].iter().copied());
        self.rows += 1;
    }

    pub fn push_row(&mut self, row: &[u64]) {
        self.data.extend_from_slice(&row[..self.wpr]);
        self.rows += 1;
    }

    /// In-place reduced row echelon form; returns pivot columns (rank = len).
    pub fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        let lanes = self.fp.lanes;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let w = c / lanes;
            let mut found = None;
            for i in r..self.rows {
                if self.get(i, c) != 0 {
                    found = Some(i);
                    break;
                }
            }
            let Some(i) = found else { continue };
            self.swap_rows(r, i);
            let inv = self.fp.inv(self.get(r, c));
            let fp = self.fp;
            fp.scale(&mut self.row_mut(r)[w..], inv);
            let wpr = self.wpr;
            let (before, rest) = self.data.split_at_mut(r * wpr);
            let (prow, after) = rest.split_at_mut(wpr);
            let prow = &prow[w..];
            for chunk in before.chunks_mut(wpr).chain(after.chunks_mut(wpr)) {
                let v = fp.get(chunk, c);
                if v != 0 {
                    fp.axpy(&mut chunk[w..], prow, fp.p - v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }

    /// Right kernel `{x : A x^T = 0}` as a subspace of F_p^cols.
    pub fn nullspace(&self) -> Subspace {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let mut is_piv = vec![false; self.cols];
        for &c in &pivots {
            is_piv[c] = true;
        }
        let fp = self.fp;
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_piv[f] {
                continue;
            }
            let mut v = fp.zero_row(self.cols);
            fp.set(&mut v, f, 1);
            for (i, &c) in pivots.iter().enumerate() {
                let a = m.get(i, f);
                if a != 0 {
                    fp.set(&mut v, c, fp.neg(a));
                }
            }
            basis.push(v);
        }
        Subspace::from_packed(fp, self.cols, basis)
    }

    /// Left kernel `{x : x A = 0}`.
    pub fn left_nullspace(&self) -> Subspace {
        self.transpose().nullspace()
    }

    /// Some `x` with `A x^T = b^T`, if consistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let aug = FMatrix::from_fn(self.fp, self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                b[i]
            }
        });
        let mut m = aug;
        let pivots = m.echelonize();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = m.get(i, self.cols);
        }
        Some(x)
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<FMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = self.hstack(&FMatrix::identity(self.fp, n));
        let piv = aug.echelonize();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(aug.submatrix(0, n, n, 2 * n))
    }

    pub fn data_words(&self) -> &[u64] {
        &self.data
    }
}

/// A subspace of F_p^n stored as a reduced echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    fp: Fp,
    ambient: usize,
    basis: FMatrix,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.pivots == other.pivots && self.basis == other.basis
    }
}
impl Eq for Subspace {}

impl Subspace {
    pub fn zero(fp: Fp, ambient: usize) -> Subspace {
        Subspace { fp, ambient, basis: FMatrix::zeros(fp, 0, ambient), pivots: Vec::new() }
    }

    pub fn full(fp: Fp, ambient: usize) -> Subspace {
        Subspace { fp, ambient, basis: FMatrix::identity(fp, ambient), pivots: (0..ambient).collect() }
    }

    pub fn from_matrix(m: &FMatrix) -> Subspace {
        let mut b = m.clone();
        let pivots = b.echelonize();
        let basis = b.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        Subspace { fp: m.fp, ambient: m.cols, basis, pivots }
    }

    pub fn from_packed(fp: Fp, ambient: usize, rows: Vec<Vec<u64>>) -> Subspace {
        Subspace::from_matrix(&FMatrix::from_packed(fp, ambient, rows))
    }

    pub fn fp(&self) -> Fp {
        self.fp
    }
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn basis(&self) -> &FMatrix {
        &self.basis
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Subtract the components along the basis; result is zero iff `v` is inside.
    pub fn reduce(&self, v: &mut [u64]) {
        for (i, &c) in self.pivots.iter().enumerate() {
            let a = self.fp.get(v, c);
            if a != 0 {
                self.fp.axpy(v, self.basis.row(i), self.fp.p - a);
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        Fp::is_zero_row(&w)
    }

    /// Coordinates of a member vector with respect to the echelon basis.
    pub fn coords(&self, v: &[u64]) -> Vec<u32> {
        self.pivots.iter().map(|&c| self.fp.get(v, c)).collect()
    }

    /// Insert a vector, keeping reduced echelon form; returns true if the span grew.
    pub fn add_vector(&mut self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(c) = self.fp.leading(&w, self.ambient) else { return false };
        let inv = self.fp.inv(self.fp.get(&w, c));
        self.fp.scale(&mut w, inv);
        for i in 0..self.basis.rows {
            let a = self.basis.get(i, c);
            if a != 0 {
                let fp = self.fp;
                fp.axpy(self.basis.row_mut(i), &w, fp.p - a);
            }
        }
        let pos = self.pivots.partition_point(|&q| q < c);
        self.pivots.insert(pos, c);
        self.basis.insert_row(pos, &w);
        true
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::from_matrix(&self.basis.vstack(&other.basis))
    }

    /// `{x : x . b = 0 for all basis vectors b}`.
    pub fn annihilator(&self) -> Subspace {
        self.basis.nullspace()
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.annihilator().sum(&other.annihilator()).annihilator()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        (0..self.dim()).all(|i| other.contains(self.basis.row(i)))
    }

    /// Coordinates not used as pivots: a basis of a complement.
    pub fn complement_coords(&self) -> Vec<usize> {
        let mut is_piv = vec![false; self.ambient];
        for &c in &self.pivots {
            is_piv[c] = true;
        }
        (0..self.ambient).filter(|&j| !is_piv[j]).collect()
    }

    pub fn is_invariant(&self, gens: &[FMatrix]) -> bool {
        gens.iter().all(|g| (0..self.dim()).all(|i| self.contains(&self.fp.vec_mat(self.basis.row(i), g))))
    }
}

/// Smallest subspace containing the seeds and stable under every generator.
pub fn spin(fp: Fp, ambient: usize, seeds: &[Vec<u64>], gens: &[FMatrix]) -> Subspace {
    let mut space = Subspace::zero(fp, ambient);
    let mut queue: Vec<Vec<u64>> = Vec::new();
    for s in seeds {
        if space.add_vector(s) {
            queue.push(s.clone());
        }
        if space.is_full() {
            return space;
        }
    }
    while let Some(v) = queue.pop() {
        for g in gens {
            let w = fp.vec_mat(&v, g);
            if space.add_vector(&w) {
                if space.is_full() {
                    return space;
                }
                queue.push(w);
            }
        }
    }
    space
}

/// Action of each generator restricted to an invariant subspace, in echelon-basis coordinates.
pub fn submodule_action(gens: &[FMatrix], s: &Subspace) -> Result<Vec<FMatrix>> {
    let fp = s.fp();
    let mut out = Vec::with_capacity(gens.len());
    for (gi, g) in gens.iter().enumerate() {
        let mut m = FMatrix::zeros(fp, s.dim(), s.dim());
        for i in 0..s.dim() {
            let img = fp.vec_mat(s.basis().row(i), g);
            if !s.contains(&img) {
                return Err(FflaError::NotInvariant(gi));
            }
            for (k, &c) in s.coords(&img).iter().enumerate() {
                if c != 0 {
                    m.set(i, k, c);
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Induced action on `ambient / s`, using the non-pivot coordinates as basis.
pub fn quotient_action(gens: &[FMatrix], s: &Subspace) -> Result<Vec<FMatrix>> {
    let fp = s.fp();
    for (gi, g) in gens.iter().enumerate() {
        for i in 0..s.dim() {
            if !s.contains(&fp.vec_mat(s.basis().row(i), g)) {
                return Err(FflaError::NotInvariant(gi));
            }
        }
    }
    let comp = s.complement_coords();
    let mut out = Vec::with_capacity(gens.len());
    for g in gens {
        let mut m = FMatrix::zeros(fp, comp.len(), comp.len());
        for (k, &c) in comp.iter().enumerate() {
            let mut img = g.row(c).to_vec();
            s.reduce(&mut img);
            for (l, &d) in comp.iter().enumerate() {
                let v = fp.get(&img, d);
                if v != 0 {
                    m.set(k, l, v);
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Row-wise sparse matrix: row `i` lists the nonzero entries of the image of basis vector `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<(u32, u32)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> SparseMatrix {
        SparseMatrix { rows, cols, entries: vec![Vec::new(); rows] }
    }

    pub fn from_dense(m: &FMatrix) -> SparseMatrix {
        let mut s = SparseMatrix::new(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m.get(i, j);
                if v != 0 {
                    s.entries[i].push((j as u32, v));
                }
            }
        }
        s
    }

    pub fn to_dense(&self, fp: Fp) -> FMatrix {
        let mut m = FMatrix::zeros(fp, self.rows, self.cols);
        for (i, r) in self.entries.iter().enumerate() {
            for &(j, v) in r {
                let cur = m.get(i, j as usize);
                m.set(i, j as usize, fp.add(cur, v));
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(|r| r.len()).sum()
    }

    /// `v * A` with unpacked coefficient vectors.
    pub fn apply(&self, fp: Fp, v: &[u32]) -> Vec<u32> {
        let p = fp.p() as u64;
        let mut acc = vec![0u64; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(j, a) in &self.entries[i] {
                acc[j as usize] += c as u64 * a as u64;
            }
        }
        acc.into_iter().map(|x| (x % p) as u32).collect()
    }

    /// `v * A` on packed vectors.
    pub fn apply_packed(&self, fp: Fp, v: &[u64]) -> Vec<u64> {
        let dense = fp.unpack(v, self.rows);
        fp.pack(&self.apply(fp, &dense))
    }
}

/// Spin using sparse generators; preferred for large ambient dimension.
pub fn spin_sparse(fp: Fp, ambient: usize, seeds: &[Vec<u64>], gens: &[SparseMatrix]) -> Subspace {
    let mut space = Subspace::zero(fp, ambient);
    let mut queue = Vec::new();
    for s in seeds {
        if space.add_vector(s) {
            queue.push(s.clone());
        }
    }
    while let Some(v) = queue.pop() {
        if space.is_full() {
            break;
        }
        for g in gens {
            let w = g.apply_packed(fp, &v);
            if space.add_vector(&w) {
                queue.push(w);
            }
        }
    }
    space
}

/// Sparse row `(column, value)` with strictly increasing columns and nonzero values.
pub type SparseRow = Vec<(u32, u32)>;

/// Sort by column, combine repeated columns and drop zeros.
pub fn normalize_sparse(fp: Fp, mut row: Vec<(u32, u32)>) -> SparseRow {
    row.sort_unstable_by_key(|e| e.0);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 = fp.add(last.1, v),
            _ => out.push((c, v)),
        }
        if out.last().is_some_and(|e| e.1 == 0) {
            out.pop();
        }
    }
    out
}

/// `a + c * b` for normalized sparse rows.
fn sparse_axpy(fp: Fp, a: &[(u32, u32)], b: &[(u32, u32)], c: u32) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, fp.mul(c, b[j].1)));
            j += 1;
        } else {
            let v = fp.add(a[i].1, fp.mul(c, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row echelon form grown one sparse row at a time; each stored row has leading entry 1.
#[derive(Clone, Debug)]
pub struct SparseEchelon {
    fp: Fp,
    ambient: usize,
    pivots: std::collections::HashMap<u32, SparseRow>,
    nnz: usize,
}

impl SparseEchelon {
    pub fn new(fp: Fp, ambient: usize) -> SparseEchelon {
        SparseEchelon { fp, ambient, pivots: std::collections::HashMap::new(), nnz: 0 }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Stored entries, a measure of fill-in.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Reduce a normalized row against the stored rows; true if it was independent.
    pub fn add_row(&mut self, mut row: SparseRow) -> bool {
        let fp = self.fp;
        loop {
            let Some(&(c, v)) = row.first() else { return false };
            match self.pivots.get(&c) {
                Some(piv) => row = sparse_axpy(fp, &row, piv, fp.neg(v)),
                None => {
                    let inv = fp.inv(v);
                    for e in row.iter_mut() {
                        e.1 = fp.mul(e.1, inv);
                    }
                    self.nnz += row.len();
                    self.pivots.insert(c, row);
                    return true;
                }
            }
        }
    }

    /// Stored rows as a dense subspace.
    pub fn to_subspace(&self) -> Subspace {
        let fp = self.fp;
        let mut s = Subspace::zero(fp, self.ambient);
        let mut keys: Vec<&u32> = self.pivots.keys().collect();
        keys.sort();
        for k in keys {
            let mut v = fp.zero_row(self.ambient);
            for &(c, x) in &self.pivots[k] {
                fp.set(&mut v, c as usize, x);
            }
            s.add_vector(&v);
        }
        s
    }
}

// ---- binary cache ------------------------------------------------------------

pub const CACHE_MAGIC: &[u8; 4] = b"LLWY";
pub const CACHE_VERSION: u16 = 1;

fn digit_bits(p: u32) -> u32 {
    32 - (p - 1).leading_zeros()
}

/// Header `LLWY`, version u16, p u16, rows u32, cols u32 (little endian), then
/// the entries column-major as fixed-width digits packed into u64 words.
pub fn encode(m: &FMatrix) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.p() as u16).to_le_bytes());
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    let b = digit_bits(m.p()) as u64;
    let per = 64 / b;
    let mut word = 0u64;
    let mut k = 0u64;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            word |= (m.get(i, j) as u64) << (k * b);
            k += 1;
            if k == per {
                out.extend_from_slice(&word.to_le_bytes());
                word = 0;
                k = 0;
            }
        }
    }
    if k > 0 {
        out.extend_from_slice(&word.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FMatrix> {
    if bytes.len() < 16 || &bytes[0..4] != CACHE_MAGIC {
        return Err(FflaError::Decode("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CACHE_VERSION {
        return Err(FflaError::Version { found: version, expected: CACHE_VERSION });
    }
    let p = u16::from_le_bytes([bytes[6], bytes[7]]) as u32;
    let fp = Fp::new(p).map_err(|_| FflaError::Decode(format!("bad prime {p}")))?;
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let b = digit_bits(p) as u64;
    let per = (64 / b) as usize;
    let n = rows * cols;
    let words = n.div_ceil(per);
    if bytes.len() != 16 + 8 * words {
        return Err(FflaError::Decode(format!("payload length {} != {}", bytes.len() - 16, 8 * words)));
    }
    let mut m = FMatrix::zeros(fp, rows, cols);
    let mask = (1u64 << b) - 1;
    for idx in 0..n {
        let w = idx / per;
        let off = (idx % per) as u64 * b;
        let word = u64::from_le_bytes(bytes[16 + 8 * w..24 + 8 * w].try_into().unwrap());
        let v = ((word >> off) & mask) as u32;
        if v >= p {
            return Err(FflaError::Decode(format!("digit {v} out of range")));
        }
        let (j, i) = (idx / rows.max(1), idx % rows.max(1));
        if v != 0 {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    #[test]
    fn sparse_echelon_matches_dense_rank() {
        let fp = Fp::new(5).unwrap();
        let mut rng = seeded_rng(3);
        let m = FMatrix::random(fp, 12, 9, &mut rng);
        let mut e = SparseEchelon::new(fp, 9);
        for i in 0..12 {
            let row: Vec<(u32, u32)> = (0..9).map(|j| (j as u32, m.get(i, j))).collect();
            e.add_row(normalize_sparse(fp, row));
        }
        assert_eq!(e.rank(), m.rank());
        assert_eq!(e.to_subspace().dim(), m.rank());
    }

    use super::*;

    #[test]
    fn lane_reduction_exhaustive() {
        for p in [2u32, 3, 5, 7, 11, 13, 31, 61] {
            let fp = Fp::new(p).unwrap();
            for a in 0..p {
                for b in 0..p {
                    for c in 0..p {
                        let mut d = fp.pack(&[a; 9]);
                        let s = fp.pack(&[b; 9]);
                        fp.axpy(&mut d, &s, c);
                        assert_eq!(fp.get(&d, 4), (a + b * c) % p, "p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn identity_and_zero() {
        let fp = Fp::new(5).unwrap();
        let mut i = FMatrix::identity(fp, 7);
        assert_eq!(i.echelonize().len(), 7);
        assert_eq!(i, FMatrix::identity(fp, 7));
        let z = FMatrix::zeros(fp, 4, 6);
        assert_eq!(z.rank(), 0);
        assert_eq!(z.nullspace().dim(), 6);
        assert_eq!(FMatrix::identity(fp, 5).nullspace().dim(), 0);
    }

    #[test]
    fn bad_prime_rejected() {
        assert_eq!(Fp::new(9).unwrap_err(), FflaError::BadPrime(9));
        assert!(Fp::new(67).is_err());
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let fp = Fp::new(7).unwrap();
        let mut rng = seeded_rng(3);
        let m = FMatrix::random(fp, 13, 29, &mut rng);
        let bytes = encode(&m);
        assert_eq!(decode(&bytes).unwrap(), m);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(FflaError::Version { .. })));
    }
}
