//! Root data, finite Weyl groups, dot actions and the X(T)/ZI grading lattice.
//!
//! Weights are integer vectors in the fundamental-weight basis.  The Cartan
//! matrix is stored as `cartan[i][j] = <alpha_i, alpha_j^vee>`, so row `i` is
//! the simple root alpha_i written in fundamental weights.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeylError {
    #[error("unsupported root system {0}")]
    Unsupported(String),
    #[error("levi subset index {0} out of range")]
    BadLevi(usize),
    #[error("weight has {found} coordinates, rank is {rank}")]
    BadWeight { found: usize, rank: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
}

impl CartanType {
    /// Parse labels such as `A2`, `b2`, `D4`.
    pub fn parse(label: &str) -> Result<(CartanType, usize), WeylError> {
        let label = label.trim();
        let bad = || WeylError::Unsupported(label.to_string());
        let mut chars = label.chars();
        let t = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => CartanType::A,
            Some('B') => CartanType::B,
            Some('C') => CartanType::C,
            Some('D') => CartanType::D,
            _ => return Err(bad()),
        };
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        Ok((t, rank))
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CartanType::A => "A",
            CartanType::B => "B",
            CartanType::C => "C",
            CartanType::D => "D",
        };
        f.write_str(s)
    }
}

/// An integral weight in fundamental-weight coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Weight {
        Weight(vec![0; rank])
    }
    pub fn add(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    pub fn sub(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
    pub fn scale(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * k).collect())
    }
    pub fn neg(&self) -> Weight {
        self.scale(-1)
    }
    /// Coordinates reduced into `[0, p)`.
    pub fn mod_p(&self, p: u32) -> Vec<u32> {
        self.0.iter().map(|a| a.rem_euclid(p as i64) as u32).collect()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A Weyl group element: ShortLex reduced word plus its matrix on weight coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub word: Vec<usize>,
    /// `w(lambda)_i = sum_j matrix[i][j] * lambda_j`
    pub matrix: Vec<Vec<i64>>,
}

impl WeylElement {
    pub fn len(&self) -> usize {
        self.word.len()
    }
    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
    pub fn apply(&self, w: &Weight) -> Weight {
        Weight(self.matrix.iter().map(|row| row.iter().zip(&w.0).map(|(a, b)| a * b).sum()).collect())
    }
}

/// A positive root with its coroot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Root {
    /// coefficients in the simple roots
    pub simple: Vec<i64>,
    /// the root as a weight
    pub weight: Weight,
    /// coefficients of the coroot in the simple coroots
    pub coroot: Vec<i64>,
    pub height: i64,
}

/// Canonical representative of `lambda + L` for an integral lattice `L`,
/// via a Hermite normal form of its generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeReducer {
    rows: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

impl LatticeReducer {
    pub fn new(gens: Vec<Vec<i64>>, n: usize) -> LatticeReducer {
        let rows = hermite(gens, n);
        let pivots = rows.iter().map(|r| r.iter().position(|&x| x != 0).unwrap()).collect();
        LatticeReducer { rows, pivots }
    }
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = v[c].div_euclid(row[c]);
            if q != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= q * r;
                }
            }
        }
        v
    }
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Row-style Hermite normal form (positive pivots, entries above a pivot reduced into `[0, pivot)`).
fn hermite(mut m: Vec<Vec<i64>>, n: usize) -> Vec<Vec<i64>> {
    let mut r = 0;
    for c in 0..n {
        loop {
            let piv = (r..m.len()).filter(|&i| m[i][c] != 0).min_by_key(|&i| m[i][c].abs());
            let Some(pi) = piv else { break };
            m.swap(r, pi);
            let mut clean = true;
            for i in r + 1..m.len() {
                let q = m[i][c] / m[r][c];
                if q != 0 {
                    let pr = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(&pr) {
                        *x -= q * y;
                    }
                }
                if m[i][c] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r < m.len() && m[r][c] != 0 {
            if m[r][c] < 0 {
                for x in m[r].iter_mut() {
                    *x = -*x;
                }
            }
            let pr = m[r].clone();
            for i in 0..r {
                let q = m[i][c].div_euclid(pr[c]);
                if q != 0 {
                    for (x, y) in m[i].iter_mut().zip(&pr) {
                        *x -= q * y;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m.retain(|row| row.iter().any(|&x| x != 0));
    m
}

/// Class of a weight in X(T)/ZI, stored as its canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeClass(pub Vec<i64>);

impl fmt::Display for DegreeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", Weight(self.0.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub cartan_type: CartanType,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    /// positive roots sorted by (height, simple coefficients)
    pub positive_roots: Vec<Root>,
    pub rho: Weight,
    /// all elements, ShortLex order
    pub weyl: Vec<WeylElement>,
    pub levi: Vec<usize>,
    /// indices into `weyl` of the elements of W_I
    pub levi_weyl: Vec<usize>,
    pub w0: usize,
    pub w_levi: usize,
    pub w_upper: usize,
    det: i64,
    adj_t: Vec<Vec<i64>>,
    zi: LatticeReducer,
    root_lookup: HashMap<Vec<i64>, usize>,
    matrix_lookup: HashMap<Vec<Vec<i64>>, usize>,
}

fn cartan_matrix(t: CartanType, n: usize) -> Result<Vec<Vec<i64>>, WeylError> {
    let ok = match t {
        CartanType::A => (1..=7).contains(&n),
        CartanType::B | CartanType::C => (2..=6).contains(&n),
        CartanType::D => (3..=6).contains(&n),
    };
    if !ok {
        return Err(WeylError::Unsupported(format!("{t}{n}")));
    }
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        a[i][i] = 2;
    }
    let link = |a: &mut Vec<Vec<i64>>, i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match t {
        CartanType::A => (0..n - 1).for_each(|i| link(&mut a, i, i + 1)),
        CartanType::B | CartanType::C => {
            (0..n - 2).for_each(|i| link(&mut a, i, i + 1));
            // alpha_n short in B, long in C
            let (long_to_short, short_to_long) = if t == CartanType::B { (-2, -1) } else { (-1, -2) };
            a[n - 2][n - 1] = long_to_short;
            a[n - 1][n - 2] = short_to_long;
        }
        CartanType::D => {
            (0..n - 2).for_each(|i| link(&mut a, i, i + 1));
            link(&mut a, n - 3, n - 1);
        }
    }
    Ok(a)
}

fn det_adj(m: &[Vec<i64>]) -> (i64, Vec<Vec<i64>>) {
    let n = m.len();
    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[0][0];
        }
        let mut s = 0;
        for j in 0..n {
            if m[0][j] == 0 {
                continue;
            }
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            s += sign * m[0][j] * det(&minor);
        }
        s
    }
    let d = det(m);
    let mut adj = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = m.iter().enumerate().filter(|&(r, _)| r != i).map(|(_, row)| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            // adjugate is the transpose of the cofactor matrix
            adj[j][i] = sign * det(&minor);
        }
    }
    (d, adj)
}

impl RootDatum {
    pub fn new(cartan_type: CartanType, rank: usize, levi: &[usize]) -> Result<RootDatum, WeylError> {
        let cartan = cartan_matrix(cartan_type, rank)?;
        let mut levi: Vec<usize> = levi.to_vec();
        levi.sort_unstable();
        levi.dedup();
        if let Some(&bad) = levi.iter().find(|&&i| i >= rank) {
            return Err(WeylError::BadLevi(bad));
        }
        let n = rank;
        // roots and coroots generated together by simple reflections
        let mut seen: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
        let mut queue = VecDeque::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            seen.insert(e.clone(), e.clone());
            queue.push_back((e.clone(), e));
        }
        while let Some((b, bc)) = queue.pop_front() {
            for i in 0..n {
                let pair: i64 = (0..n).map(|j| b[j] * cartan[j][i]).sum();
                let copair: i64 = (0..n).map(|j| bc[j] * cartan[i][j]).sum();
                let mut nb = b.clone();
                nb[i] -= pair;
                let mut nbc = bc.clone();
                nbc[i] -= copair;
                if !seen.contains_key(&nb) {
                    seen.insert(nb.clone(), nbc.clone());
                    queue.push_back((nb, nbc));
                }
            }
        }
        let mut positive_roots: Vec<Root> = seen
            .into_iter()
            .filter(|(b, _)| b.iter().all(|&x| x >= 0))
            .map(|(simple, coroot)| {
                let weight = Weight((0..n).map(|j| (0..n).map(|i| simple[i] * cartan[i][j]).sum()).collect());
                let height = simple.iter().sum();
                Root { simple, weight, coroot, height }
            })
            .collect();
        // simple roots first, in index order
        positive_roots.sort_by(|a, b| a.height.cmp(&b.height).then_with(|| b.simple.cmp(&a.simple)));
        let root_lookup = positive_roots.iter().enumerate().map(|(k, r)| (r.simple.clone(), k)).collect();

        let weyl = enumerate_weyl(&cartan, &(0..n).collect::<Vec<_>>());
        let matrix_lookup: HashMap<Vec<Vec<i64>>, usize> = weyl.iter().enumerate().map(|(k, w)| (w.matrix.clone(), k)).collect();
        let levi_weyl: Vec<usize> = enumerate_weyl(&cartan, &levi).iter().map(|w| matrix_lookup[&w.matrix]).collect();
        let w0 = (0..weyl.len()).max_by_key(|&k| weyl[k].len()).unwrap();
        let w_levi = *levi_weyl.iter().max_by_key(|&&k| weyl[k].len()).unwrap();
        let ct: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| cartan[j][i]).collect()).collect();
        let (det, adj_t) = det_adj(&ct);
        let zi = LatticeReducer::new(levi.iter().map(|&i| cartan[i].clone()).collect(), n);
        let mut rd = RootDatum {
            cartan_type,
            rank,
            cartan,
            positive_roots,
            rho: Weight(vec![1; n]),
            weyl,
            levi,
            levi_weyl,
            w0,
            w_levi,
            w_upper: 0,
            det,
            adj_t,
            zi,
            root_lookup,
            matrix_lookup,
        };
        rd.w_upper = rd.multiply(w_levi, w0);
        Ok(rd)
    }

    pub fn from_label(label: &str, levi: &[usize]) -> Result<RootDatum, WeylError> {
        let (t, n) = CartanType::parse(label)?;
        RootDatum::new(t, n, levi)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.cartan_type, self.rank)
    }

    pub fn simple_root(&self, i: usize) -> Weight {
        Weight(self.cartan[i].clone())
    }

    /// `<lambda, beta^vee>` for the positive root with index `k`.
    pub fn pairing(&self, lambda: &Weight, k: usize) -> i64 {
        self.positive_roots[k].coroot.iter().zip(&lambda.0).map(|(c, l)| c * l).sum()
    }

    pub fn is_levi_root(&self, k: usize) -> bool {
        let s = &self.positive_roots[k].simple;
        (0..self.rank).all(|i| s[i] == 0 || self.levi.contains(&i))
    }

    pub fn levi_positive(&self) -> Vec<usize> {
        (0..self.positive_roots.len()).filter(|&k| self.is_levi_root(k)).collect()
    }

    pub fn unipotent_positive(&self) -> Vec<usize> {
        (0..self.positive_roots.len()).filter(|&k| !self.is_levi_root(k)).collect()
    }

    /// Index of a positive root from its simple coefficients.
    pub fn positive_index(&self, simple: &[i64]) -> Option<usize> {
        self.root_lookup.get(simple).copied()
    }

    /// Signed root lookup: `(index, true)` for positive, `(index, false)` for negative roots.
    pub fn signed_index(&self, simple: &[i64]) -> Option<(usize, bool)> {
        if let Some(k) = self.positive_index(simple) {
            return Some((k, true));
        }
        let neg: Vec<i64> = simple.iter().map(|x| -x).collect();
        self.positive_index(&neg).map(|k| (k, false))
    }

    /// Simple-root coefficients of a weight in the root lattice.
    pub fn to_simple(&self, w: &Weight) -> Option<Vec<i64>> {
        let n = self.rank;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let s: i64 = (0..n).map(|j| self.adj_t[i][j] * w.0[j]).sum();
            if s % self.det != 0 {
                return None;
            }
            out.push(s / self.det);
        }
        Some(out)
    }

    pub fn from_simple(&self, c: &[i64]) -> Weight {
        Weight((0..self.rank).map(|j| (0..self.rank).map(|i| c[i] * self.cartan[i][j]).sum()).collect())
    }

    pub fn element(&self, k: usize) -> &WeylElement {
        &self.weyl[k]
    }

    pub fn find(&self, matrix: &[Vec<i64>]) -> usize {
        self.matrix_lookup[matrix]
    }

    /// Index of the product `weyl[a] * weyl[b]`.
    pub fn multiply(&self, a: usize, b: usize) -> usize {
        let ma = &self.weyl[a].matrix;
        let mb = &self.weyl[b].matrix;
        let n = self.rank;
        let prod: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| ma[i][k] * mb[k][j]).sum()).collect()).collect();
        self.find(&prod)
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.weyl.len()).find(|&b| self.multiply(a, b) == 0).unwrap()
    }

    pub fn from_word(&self, word: &[usize]) -> usize {
        let mut acc = 0;
        for &i in word {
            let s = self.simple_reflection(i);
            acc = self.multiply(acc, s);
        }
        acc
    }

    pub fn simple_reflection(&self, i: usize) -> usize {
        self.weyl.iter().position(|w| w.word == [i]).unwrap()
    }

    pub fn length(&self, k: usize) -> usize {
        self.weyl[k].len()
    }

    /// Image of a root (simple coefficients) under a Weyl element.
    pub fn act_on_root(&self, k: usize, simple: &[i64]) -> Vec<i64> {
        let w = self.weyl[k].apply(&self.from_simple(simple));
        self.to_simple(&w).expect("Weyl image of a root lies in the root lattice")
    }

    /// `w.lambda = w(lambda + rho) - rho`
    pub fn dot(&self, k: usize, lambda: &Weight) -> Weight {
        self.weyl[k].apply(&lambda.add(&self.rho)).sub(&self.rho)
    }

    /// `lambda - (p - 1)(rho - w rho)`
    pub fn lambda_twist(&self, lambda: &Weight, k: usize, p: u32) -> Weight {
        let wr = self.weyl[k].apply(&self.rho);
        lambda.sub(&self.rho.sub(&wr).scale(p as i64 - 1))
    }

    pub fn is_p_regular(&self, lambda: &Weight, p: u32) -> bool {
        let lr = lambda.add(&self.rho);
        (0..self.positive_roots.len()).all(|k| self.pairing(&lr, k).rem_euclid(p as i64) != 0)
    }

    /// Canonical representative of `lambda + ZI`.
    pub fn degree_class(&self, lambda: &Weight) -> DegreeClass {
        DegreeClass(self.zi.reduce(&lambda.0))
    }

    /// Number of distinct `w.lambda mod p` for `w` in W_I.
    pub fn levi_dot_orbit_size(&self, lambda: &Weight, p: u32) -> usize {
        let mut seen: Vec<Vec<u32>> = self.levi_weyl.iter().map(|&k| self.dot(k, lambda).mod_p(p)).collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }

    /// Canonical representative of the W_{I,p} dot orbit of `lambda`.
    pub fn linkage_rep(&self, lambda: &Weight, p: u32) -> Weight {
        let pzi = self.p_levi_lattice(p);
        self.levi_weyl.iter().map(|&k| Weight(pzi.reduce(&self.dot(k, lambda).0))).min().unwrap()
    }

    pub fn p_levi_lattice(&self, p: u32) -> LatticeReducer {
        LatticeReducer::new(self.levi.iter().map(|&i| self.cartan[i].iter().map(|x| x * p as i64).collect()).collect(), self.rank)
    }

    pub fn linked(&self, lambda: &Weight, mu: &Weight, p: u32) -> bool {
        self.linkage_rep(lambda, p) == self.linkage_rep(mu, p)
    }

    /// Compare degree classes in the order generated by the simple roots outside I:
    /// `Less` means `nu - mu` is a nonzero nonnegative combination of them (mod ZI).
    pub fn order_cmp(&self, mu: &DegreeClass, nu: &DegreeClass) -> Option<Ordering> {
        let d = Weight(nu.0.iter().zip(&mu.0).map(|(a, b)| a - b).collect());
        let c = self.to_simple(&d)?;
        let outside: Vec<i64> = (0..self.rank).filter(|i| !self.levi.contains(i)).map(|i| c[i]).collect();
        if outside.iter().all(|&x| x == 0) {
            Some(Ordering::Equal)
        } else if outside.iter().all(|&x| x >= 0) {
            Some(Ordering::Less)
        } else if outside.iter().all(|&x| x <= 0) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Sum of the coefficients of the simple roots outside I: a height function on degree classes.
    pub fn levi_height(&self, d: &DegreeClass) -> Option<i64> {
        let c = self.to_simple(&Weight(d.0.clone()))?;
        Some((0..self.rank).filter(|i| !self.levi.contains(i)).map(|i| c[i]).sum())
    }

    pub fn summary(&self) -> DatumSummary {
        DatumSummary {
            cartan_type: self.label(),
            levi: self.levi.clone(),
            positive_roots: self.positive_roots.len(),
            weyl_order: self.weyl.len(),
            len_w0: self.length(self.w0),
            len_w_levi: self.length(self.w_levi),
            len_w_upper: self.length(self.w_upper),
            w_upper_word: self.weyl[self.w_upper].word.iter().map(|i| i + 1).collect(),
        }
    }
}

/// JSON-friendly digest of a root datum.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DatumSummary {
    pub cartan_type: String,
    pub levi: Vec<usize>,
    pub positive_roots: usize,
    pub weyl_order: usize,
    pub len_w0: usize,
    pub len_w_levi: usize,
    pub len_w_upper: usize,
    /// 1-based simple reflection word
    pub w_upper_word: Vec<usize>,
}

fn reflection_matrix(cartan: &[Vec<i64>], i: usize) -> Vec<Vec<i64>> {
    let n = cartan.len();
    // s_i(lambda)_j = lambda_j - lambda_i * a_ij
    let mut m = vec![vec![0; n]; n];
    for j in 0..n {
        m[j][j] = 1;
        m[j][i] -= cartan[i][j];
    }
    m
}

/// Breadth-first enumeration of the subgroup generated by the given simple
/// reflections, each element labelled by its ShortLex-least reduced word.
fn enumerate_weyl(cartan: &[Vec<i64>], gens: &[usize]) -> Vec<WeylElement> {
    let n = cartan.len();
    let id: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let refl: Vec<(usize, Vec<Vec<i64>>)> = gens.iter().map(|&i| (i, reflection_matrix(cartan, i))).collect();
    let mut out = vec![WeylElement { word: vec![], matrix: id.clone() }];
    let mut seen: HashMap<Vec<Vec<i64>>, ()> = HashMap::new();
    seen.insert(id, ());
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        head += 1;
        for (i, s) in &refl {
            // matrix of w * s_i
            let m: Vec<Vec<i64>> = (0..n).map(|r| (0..n).map(|c| (0..n).map(|k| cur.matrix[r][k] * s[k][c]).sum()).collect()).collect();
            if seen.insert(m.clone(), ()).is_none() {
                let mut word = cur.word.clone();
                word.push(*i);
                out.push(WeylElement { word, matrix: m });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_counts() {
        for (t, n, np, w) in [("A1", 1, 1, 2), ("A2", 2, 3, 6), ("A3", 3, 6, 24), ("B2", 2, 4, 8), ("C3", 3, 9, 48), ("D4", 4, 12, 192)] {
            let rd = RootDatum::from_label(t, &[]).unwrap();
            assert_eq!(rd.rank, n);
            assert_eq!(rd.positive_roots.len(), np, "{t}");
            assert_eq!(rd.weyl.len(), w, "{t}");
            assert_eq!(rd.length(rd.w0), np);
            for k in 0..n {
                assert_eq!(rd.pairing(&rd.simple_root(k), k), 2);
            }
        }
    }

    #[test]
    fn unsupported_rejected() {
        assert!(RootDatum::from_label("G2", &[]).is_err());
        assert!(RootDatum::from_label("B1", &[]).is_err());
        assert!(matches!(RootDatum::from_label("A2", &[5]), Err(WeylError::BadLevi(5))));
    }

    #[test]
    fn upper_element() {
        let a2 = RootDatum::from_label("A2", &[0]).unwrap();
        assert_eq!(a2.length(a2.w_levi), 1);
        assert_eq!(a2.weyl[a2.w_upper].word, vec![1, 0]);
        let b2 = RootDatum::from_label("B2", &[1]).unwrap();
        assert_eq!(b2.length(b2.w_upper), 3);
        assert_eq!(b2.weyl[b2.w_upper].word, vec![0, 1, 0]);
        let a1 = RootDatum::from_label("A1", &[0]).unwrap();
        assert_eq!((a1.length(a1.w_levi), a1.length(a1.w_upper)), (1, 0));
    }

    #[test]
    fn degree_classes() {
        let rd = RootDatum::from_label("A2", &[0]).unwrap();
        let l = Weight(vec![3, -1]);
        assert_eq!(rd.degree_class(&l), rd.degree_class(&l.add(&rd.simple_root(0))));
        assert_ne!(rd.degree_class(&l), rd.degree_class(&l.add(&rd.simple_root(1))));
        let full = RootDatum::from_label("A2", &[0, 1]).unwrap();
        assert_eq!(full.degree_class(&l), full.degree_class(&l.sub(&full.simple_root(1))));
        let none = RootDatum::from_label("A2", &[]).unwrap();
        assert_eq!(none.degree_class(&l).0, l.0);
    }
}
