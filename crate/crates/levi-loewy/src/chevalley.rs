//! Chevalley bases with integral structure constants, p-characters of
//! standard Levi form, distinguished subalgebras and the twisting automorphism.
//!
//! Structure constants are obtained from a classical matrix realization:
//! simple root vectors are written down, higher root vectors are normalized
//! brackets along extraspecial pairs, and every bracket is read back as an
//! integer combination.  The realization is computed modulo a large prime and
//! lifted to the symmetric range, which is exact because all constants are
//! tiny integers.

use crate::ffla::{FMatrix, Fp};
use crate::weyl::{CartanType, RootDatum, Weight};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChevalleyError {
    #[error("prime {p} rejected: {reason}")]
    BadPrime { p: u32, reason: String },
    #[error("structure constant check failed: {0}")]
    Structure(String),
}

const BIG: i64 = 2_147_483_647;

fn md(x: i64) -> i64 {
    x.rem_euclid(BIG)
}
fn mul(a: i64, b: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(BIG as i128)) as i64
}
fn inv(a: i64) -> i64 {
    let mut e = BIG - 2;
    let mut b = md(a);
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    acc
}
fn lift(x: i64) -> i64 {
    let x = md(x);
    if x > BIG / 2 {
        x - BIG
    } else {
        x
    }
}

type Mat = Vec<Vec<i64>>;

fn zero(m: usize) -> Mat {
    vec![vec![0; m]; m]
}
fn unit(m: usize, entries: &[(usize, usize, i64)]) -> Mat {
    let mut a = zero(m);
    for &(i, j, v) in entries {
        a[i][j] = md(a[i][j] + v);
    }
    a
}
fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let m = a.len();
    let mut c = zero(m);
    for i in 0..m {
        for k in 0..m {
            if a[i][k] != 0 {
                for j in 0..m {
                    if b[k][j] != 0 {
                        c[i][j] = md(c[i][j] + mul(a[i][k], b[k][j]));
                    }
                }
            }
        }
    }
    c
}
fn comm(a: &Mat, b: &Mat) -> Mat {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| md(x - y)).collect()).collect()
}
fn scale(a: &Mat, c: i64) -> Mat {
    a.iter().map(|r| r.iter().map(|&x| mul(x, c)).collect()).collect()
}
fn lin(a: &Mat, b: &Mat, c: i64) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(&x, &y)| md(x + mul(c, y))).collect()).collect()
}
fn is_zero(a: &Mat) -> bool {
    a.iter().all(|r| r.iter().all(|&x| x == 0))
}

/// Simple root vectors `(e_i, f_i)` of the classical realization.
fn simple_vectors(t: CartanType, n: usize) -> (usize, Vec<(Mat, Mat)>) {
    let tr = |a: &Mat| -> Mat { (0..a.len()).map(|i| (0..a.len()).map(|j| a[j][i]).collect()).collect() };
    let mut out = Vec::new();
    let size = match t {
        CartanType::A => n + 1,
        CartanType::B => 2 * n + 1,
        CartanType::C | CartanType::D => 2 * n,
    };
    for i in 0..n {
        let e = match t {
            CartanType::A => unit(size, &[(i, i + 1, 1)]),
            CartanType::B if i + 1 < n => unit(size, &[(1 + i, 2 + i, 1), (n + 2 + i, n + 1 + i, -1)]),
            CartanType::B => unit(size, &[(n, 0, 2), (0, 2 * n, -1)]),
            CartanType::C if i + 1 < n => unit(size, &[(i, i + 1, 1), (n + i + 1, n + i, -1)]),
            CartanType::C => unit(size, &[(n - 1, 2 * n - 1, 1)]),
            CartanType::D if i + 1 < n => unit(size, &[(i, i + 1, 1), (n + i + 1, n + i, -1)]),
            CartanType::D => unit(size, &[(n - 2, 2 * n - 1, 1), (n - 1, 2 * n - 2, -1)]),
        };
        let f = match t {
            CartanType::B if i + 1 == n => unit(size, &[(0, n, 1), (2 * n, 0, -2)]),
            _ => tr(&e),
        };
        out.push((e, f));
    }
    (size, out)
}

/// Which part of the Chevalley basis an index refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// x_{-beta} for positive root index
    Neg(usize),
    /// h_i
    Cartan(usize),
    /// x_{beta}
    Pos(usize),
}

/// Sparse integer combination of basis elements.
pub type IntVec = Vec<(usize, i64)>;

fn add_into(acc: &mut Vec<i64>, v: &IntVec, c: i64) {
    for &(k, x) in v {
        acc[k] += c * x;
    }
}
fn sparsify(v: &[i64]) -> IntVec {
    v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(k, &x)| (k, x)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SubalgebraTag {
    BorelPlus,
    Levi,
    ParabolicI,
    ParabolicIPrime,
    UPlus,
    UMinus,
}

#[derive(Debug)]
pub struct LieAlgebra {
    pub rd: Arc<RootDatum>,
    pub p: u32,
    pub fp: Fp,
    /// `bracket[a][b] = [b_a, b_b]` as an integer combination
    bracket: Vec<Vec<IntVec>>,
    /// value of the p-character on each basis element
    pub chi: Vec<u32>,
    tau: Vec<IntVec>,
    tau_inv: Vec<IntVec>,
}

impl LieAlgebra {
    pub fn new(rd: Arc<RootDatum>, p: u32) -> Result<LieAlgebra, ChevalleyError> {
        let bad = |reason: &str| ChevalleyError::BadPrime { p, reason: reason.to_string() };
        if p == 2 {
            return Err(bad("p = 2 is excluded for every type"));
        }
        if rd.cartan_type == CartanType::A && (rd.rank as u32 + 1) % p == 0 {
            return Err(bad(&format!("p divides n+1 = {} for type A{}", rd.rank + 1, rd.rank)));
        }
        let fp = Fp::new(p).map_err(|e| bad(&e.to_string()))?;
        let n = rd.rank;
        let np = rd.positive_roots.len();
        let dim = 2 * np + n;
        let (size, simple) = simple_vectors(rd.cartan_type, n);

        // normalize f_i so that [h_i, e_i] = 2 e_i
        let mut e_mat = Vec::new();
        let mut f_mat = Vec::new();
        let mut h_mat = Vec::new();
        for (e, f) in simple {
            let h = comm(&e, &f);
            let he = comm(&h, &e);
            let (r, c) = first_nonzero(&e);
            let ratio = mul(he[r][c], inv(e[r][c]));
            let f = scale(&f, mul(2, inv(ratio)));
            h_mat.push(comm(&e, &f));
            e_mat.push(e);
            f_mat.push(f);
        }
        let h_of = |coroot: &[i64]| -> Mat {
            let mut acc = zero(size);
            for (j, &c) in coroot.iter().enumerate() {
                acc = lin(&acc, &h_mat[j], md(c));
            }
            acc
        };

        let mut pos: Vec<Mat> = vec![zero(size); np];
        let mut neg: Vec<Mat> = vec![zero(size); np];
        for k in 0..np {
            let root = &rd.positive_roots[k];
            if root.height == 1 {
                let i = root.simple.iter().position(|&x| x == 1).unwrap();
                pos[k] = e_mat[i].clone();
                neg[k] = f_mat[i].clone();
                continue;
            }
            let (i, b) = extraspecial(&rd, k);
            let r = string_below(&rd, b, i);
            let c = inv(r + 1);
            pos[k] = scale(&comm(&e_mat[i], &pos[b]), c);
            let mut y = scale(&comm(&f_mat[i], &neg[b]), c);
            let hx = comm(&pos[k], &y);
            let target = h_of(&root.coroot);
            let (rr, cc) = first_nonzero(&target);
            let t = mul(hx[rr][cc], inv(target[rr][cc]));
            if lift(t).abs() != 1 {
                return Err(ChevalleyError::Structure(format!("normalization {} for root {:?}", lift(t), root.simple)));
            }
            y = scale(&y, inv(t));
            neg[k] = y;
        }
        let mut basis: Vec<Mat> = Vec::with_capacity(dim);
        basis.extend(neg.iter().cloned());
        basis.extend(h_mat.iter().cloned());
        basis.extend(pos.iter().cloned());

        let mut lie = LieAlgebra { rd: rd.clone(), p, fp, bracket: Vec::new(), chi: vec![0; dim], tau: Vec::new(), tau_inv: Vec::new() };
        let mut bracket = vec![vec![Vec::new(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let m = comm(&basis[a], &basis[b]);
                bracket[a][b] = lie.decompose(&m, &basis, &lie.root_of(a), &lie.root_of(b), &h_mat)?;
            }
        }
        lie.bracket = bracket;
        for &i in &rd.levi {
            let f = lie.neg(i);
            lie.chi[f] = 1;
        }
        lie.build_tau()?;
        Ok(lie)
    }

    pub fn from_label(label: &str, levi: &[usize], p: u32) -> Result<LieAlgebra, Box<dyn std::error::Error + Send + Sync>> {
        let rd = Arc::new(RootDatum::from_label(label, levi)?);
        Ok(LieAlgebra::new(rd, p)?)
    }

    fn decompose(&self, m: &Mat, basis: &[Mat], ra: &[i64], rb: &[i64], h_mat: &[Mat]) -> Result<IntVec, ChevalleyError> {
        if is_zero(m) {
            return Ok(Vec::new());
        }
        let sum: Vec<i64> = ra.iter().zip(rb).map(|(x, y)| x + y).collect();
        let n = self.rd.rank;
        if sum.iter().all(|&x| x == 0) {
            // Cartan part: solve on the diagonal
            let cols: Vec<Vec<i64>> = h_mat.iter().map(|h| (0..h.len()).map(|i| h[i][i]).collect()).collect();
            let diag: Vec<i64> = (0..m.len()).map(|i| m[i][i]).collect();
            let coef = solve_big(&cols, &diag).ok_or_else(|| ChevalleyError::Structure("Cartan decomposition".into()))?;
            let mut rebuilt = zero(m.len());
            for (j, &c) in coef.iter().enumerate() {
                rebuilt = lin(&rebuilt, &h_mat[j], c);
            }
            if &rebuilt != m {
                return Err(ChevalleyError::Structure("bracket not in Cartan subalgebra".into()));
            }
            return Ok(coef.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| (self.cartan(j), lift(c))).collect());
        }
        let Some((k, positive)) = self.rd.signed_index(&sum) else {
            return Err(ChevalleyError::Structure(format!("nonzero bracket of weight {sum:?}")));
        };
        let idx = if positive { self.pos(k) } else { self.neg(k) };
        let target = &basis[idx];
        let (r, c) = first_nonzero(target);
        let coef = mul(m[r][c], inv(target[r][c]));
        if scale(target, coef) != *m {
            return Err(ChevalleyError::Structure("bracket not proportional to a root vector".into()));
        }
        let _ = n;
        Ok(vec![(idx, lift(coef))])
    }

    fn build_tau(&mut self) -> Result<(), ChevalleyError> {
        let rd = self.rd.clone();
        let n = rd.rank;
        let np = rd.positive_roots.len();
        let dim = self.dim();
        let mut tau: Vec<Option<IntVec>> = vec![None; dim];
        for i in 0..n {
            let mut ai = vec![0; n];
            ai[i] = 1;
            // gamma = -w_I alpha_i
            let gamma: Vec<i64> = rd.act_on_root(rd.w_levi, &ai).iter().map(|x| -x).collect();
            let (k, positive) = rd.signed_index(&gamma).expect("image of a simple root");
            let (xg, xmg) = if positive { (self.pos(k), self.neg(k)) } else { (self.neg(k), self.pos(k)) };
            tau[self.pos(i)] = Some(vec![(xg, -1)]);
            tau[self.neg(i)] = Some(vec![(xmg, -1)]);
        }
        for i in 0..n {
            let v = self.bracket_int(tau[self.pos(i)].as_ref().unwrap(), tau[self.neg(i)].as_ref().unwrap());
            tau[self.cartan(i)] = Some(v);
        }
        for k in 0..np {
            if rd.positive_roots[k].height == 1 {
                continue;
            }
            let (i, b) = extraspecial(&rd, k);
            let r = string_below(&rd, b, i);
            for (xi, xb, x) in [(self.pos(i), self.pos(b), self.pos(k)), (self.neg(i), self.neg(b), self.neg(k))] {
                // x = c [x_i, x_b] with c read off the structure constants
                let c = self.bracket[xi][xb].iter().find(|(j, _)| *j == x).map(|&(_, c)| c).unwrap();
                let v = self.bracket_int(tau[xi].as_ref().unwrap(), tau[xb].as_ref().unwrap());
                if v.iter().any(|(_, y)| y % c != 0) {
                    return Err(ChevalleyError::Structure(format!("twist not integral at root {k}, r = {r}")));
                }
                tau[x] = Some(v.into_iter().map(|(j, y)| (j, y / c)).collect());
            }
        }
        let tau: Vec<IntVec> = tau.into_iter().map(|t| t.unwrap()).collect();
        self.tau = tau;
        for a in 0..dim {
            for b in 0..dim {
                let lhs = self.apply_tau(&self.bracket[a][b].clone());
                let rhs = self.bracket_int(&self.tau[a], &self.tau[b]);
                if normalize(&lhs) != normalize(&rhs) {
                    return Err(ChevalleyError::Structure(format!("twist is not a homomorphism on ({a},{b})")));
                }
            }
        }
        // inverse = tau^(m-1) where tau^m = id
        let mut power: Vec<IntVec> = (0..dim).map(|a| vec![(a, 1)]).collect();
        let mut prev = power.clone();
        for _ in 0..12 {
            prev = power.clone();
            power = power.iter().map(|v| self.apply_tau(v)).collect();
            if (0..dim).all(|a| normalize(&power[a]) == vec![(a, 1)]) {
                self.tau_inv = prev;
                return Ok(());
            }
        }
        let _ = prev;
        Err(ChevalleyError::Structure("twist has no small finite order".into()))
    }

    // ---- basis bookkeeping ------------------------------------------------

    pub fn dim(&self) -> usize {
        2 * self.rd.positive_roots.len() + self.rd.rank
    }
    pub fn n_pos(&self) -> usize {
        self.rd.positive_roots.len()
    }
    pub fn rank(&self) -> usize {
        self.rd.rank
    }
    pub fn neg(&self, k: usize) -> usize {
        k
    }
    pub fn cartan(&self, i: usize) -> usize {
        self.n_pos() + i
    }
    pub fn pos(&self, k: usize) -> usize {
        self.n_pos() + self.rd.rank + k
    }
    pub fn kind(&self, a: usize) -> BasisKind {
        let np = self.n_pos();
        let n = self.rd.rank;
        if a < np {
            BasisKind::Neg(a)
        } else if a < np + n {
            BasisKind::Cartan(a - np)
        } else {
            BasisKind::Pos(a - np - n)
        }
    }
    /// Root of a basis element in simple-root coordinates (zero for the Cartan part).
    pub fn root_of(&self, a: usize) -> Vec<i64> {
        match self.kind(a) {
            BasisKind::Neg(k) => self.rd.positive_roots[k].simple.iter().map(|x| -x).collect(),
            BasisKind::Cartan(_) => vec![0; self.rd.rank],
            BasisKind::Pos(k) => self.rd.positive_roots[k].simple.clone(),
        }
    }
    /// Root of a basis element as a weight.
    pub fn weight_of(&self, a: usize) -> Weight {
        match self.kind(a) {
            BasisKind::Neg(k) => self.rd.positive_roots[k].weight.neg(),
            BasisKind::Cartan(_) => Weight::zero(self.rd.rank),
            BasisKind::Pos(k) => self.rd.positive_roots[k].weight.clone(),
        }
    }
    pub fn is_root_vector(&self, a: usize) -> bool {
        !matches!(self.kind(a), BasisKind::Cartan(_))
    }
    pub fn name(&self, a: usize) -> String {
        let fmt = |s: &[i64]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("");
        match self.kind(a) {
            BasisKind::Neg(k) => format!("f{}", fmt(&self.rd.positive_roots[k].simple)),
            BasisKind::Cartan(i) => format!("h{}", i + 1),
            BasisKind::Pos(k) => format!("e{}", fmt(&self.rd.positive_roots[k].simple)),
        }
    }

    /// Simple generators `e_i, f_i` (these generate the algebra).
    pub fn simple_generators(&self) -> Vec<usize> {
        (0..self.rd.rank).flat_map(|i| [self.pos(i), self.neg(i)]).collect()
    }

    pub fn bracket(&self, a: usize, b: usize) -> &IntVec {
        &self.bracket[a][b]
    }

    pub fn bracket_int(&self, u: &IntVec, v: &IntVec) -> IntVec {
        let mut acc = vec![0i64; self.dim()];
        for &(a, x) in u {
            for &(b, y) in v {
                add_into(&mut acc, &self.bracket[a][b], x * y);
            }
        }
        sparsify(&acc)
    }

    /// `x^{[p]}`: root vectors map to zero, the Cartan part is fixed.
    pub fn p_power(&self, a: usize) -> Option<usize> {
        match self.kind(a) {
            BasisKind::Cartan(_) => Some(a),
            _ => None,
        }
    }

    pub fn tau(&self, a: usize) -> &IntVec {
        &self.tau[a]
    }
    pub fn tau_inverse(&self, a: usize) -> &IntVec {
        &self.tau_inv[a]
    }
    pub fn apply_tau(&self, v: &IntVec) -> IntVec {
        let mut acc = vec![0i64; self.dim()];
        for &(a, x) in v {
            add_into(&mut acc, &self.tau[a], x);
        }
        sparsify(&acc)
    }
    pub fn apply_tau_inverse(&self, v: &IntVec) -> IntVec {
        let mut acc = vec![0i64; self.dim()];
        for &(a, x) in v {
            add_into(&mut acc, &self.tau_inv[a], x);
        }
        sparsify(&acc)
    }

    /// Value of the p-character on an integer combination.
    pub fn chi_of(&self, v: &IntVec) -> u32 {
        let mut s = 0i64;
        for &(a, x) in v {
            s += x * self.chi[a] as i64;
        }
        self.fp.from_i64(s)
    }

    /// Adjoint matrices in the row convention: row `b` of `ad(a)` is `[a, b]`.
    pub fn ad(&self, a: usize) -> FMatrix {
        let dim = self.dim();
        let mut m = FMatrix::zeros(self.fp, dim, dim);
        for b in 0..dim {
            for &(c, x) in &self.bracket[a][b] {
                m.set(b, c, self.fp.from_i64(x));
            }
        }
        m
    }

    /// Jacobi identity over the integers for all basis triples.
    pub fn jacobi_holds(&self) -> bool {
        let dim = self.dim();
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let mut acc = vec![0i64; dim];
                    for &(d, x) in &self.bracket[a][b] {
                        add_into(&mut acc, &self.bracket[d][c], x);
                    }
                    for &(d, x) in &self.bracket[b][c] {
                        add_into(&mut acc, &self.bracket[d][a], x);
                    }
                    for &(d, x) in &self.bracket[c][a] {
                        add_into(&mut acc, &self.bracket[d][b], x);
                    }
                    if acc.iter().any(|&x| x != 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `ad(x)^p = ad(x^{[p]})` mod p for every basis element.
    pub fn restricted_holds(&self) -> bool {
        (0..self.dim()).all(|a| {
            let lhs = self.ad(a).pow(self.p);
            match self.p_power(a) {
                Some(b) => lhs == self.ad(b),
                None => lhs.is_zero(),
            }
        })
    }

    pub fn subalgebra(&self, tag: SubalgebraTag) -> Vec<usize> {
        let np = self.n_pos();
        let levi = |k: usize| self.rd.is_levi_root(k);
        let mut out = Vec::new();
        for a in 0..self.dim() {
            let keep = match (tag, self.kind(a)) {
                (_, BasisKind::Cartan(_)) => !matches!(tag, SubalgebraTag::UPlus | SubalgebraTag::UMinus),
                (SubalgebraTag::BorelPlus, BasisKind::Pos(_)) => true,
                (SubalgebraTag::BorelPlus, BasisKind::Neg(_)) => false,
                (SubalgebraTag::Levi, BasisKind::Pos(k) | BasisKind::Neg(k)) => levi(k),
                (SubalgebraTag::ParabolicI, BasisKind::Pos(_)) => true,
                (SubalgebraTag::ParabolicI, BasisKind::Neg(k)) => levi(k),
                (SubalgebraTag::ParabolicIPrime, BasisKind::Neg(_)) => true,
                (SubalgebraTag::ParabolicIPrime, BasisKind::Pos(k)) => levi(k),
                (SubalgebraTag::UPlus, BasisKind::Pos(k)) => !levi(k),
                (SubalgebraTag::UMinus, BasisKind::Neg(k)) => !levi(k),
                (SubalgebraTag::UPlus, BasisKind::Neg(_)) | (SubalgebraTag::UMinus, BasisKind::Pos(_)) => false,
            };
            if keep {
                out.push(a);
            }
        }
        let _ = np;
        out
    }

    /// Basis of `h + sum_{beta > 0} g_{w beta}` for the Weyl element with index `w`.
    pub fn twisted_borel(&self, w: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.rd.rank).map(|i| self.cartan(i)).collect();
        for k in 0..self.n_pos() {
            let img = self.rd.act_on_root(w, &self.rd.positive_roots[k].simple);
            let (j, positive) = self.rd.signed_index(&img).unwrap();
            out.push(if positive { self.pos(j) } else { self.neg(j) });
        }
        out.sort_unstable();
        out
    }

    pub fn is_closed(&self, set: &[usize]) -> bool {
        set.iter().all(|&a| set.iter().all(|&b| self.bracket[a][b].iter().all(|(c, _)| set.contains(c))))
    }

    pub fn structure_dump(&self) -> StructureDump {
        let mut brackets = Vec::new();
        for a in 0..self.dim() {
            for b in a + 1..self.dim() {
                if !self.bracket[a][b].is_empty() {
                    let terms = self.bracket[a][b].iter().map(|&(c, x)| (self.name(c), x)).collect();
                    brackets.push((self.name(a), self.name(b), terms));
                }
            }
        }
        StructureDump { cartan_type: self.rd.label(), p: self.p, basis: (0..self.dim()).map(|a| self.name(a)).collect(), brackets }
    }
}

#[derive(Debug, Serialize)]
pub struct StructureDump {
    pub cartan_type: String,
    pub p: u32,
    pub basis: Vec<String>,
    pub brackets: Vec<(String, String, Vec<(String, i64)>)>,
}

fn normalize(v: &IntVec) -> IntVec {
    let mut v: IntVec = v.iter().copied().filter(|&(_, x)| x != 0).collect();
    v.sort_unstable();
    v
}

fn first_nonzero(a: &Mat) -> (usize, usize) {
    for (i, r) in a.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            if x != 0 {
                return (i, j);
            }
        }
    }
    panic!("zero matrix has no leading entry")
}

/// Extraspecial decomposition of a non-simple positive root: the least simple
/// index `i` with `root - alpha_i` a root, and that root's index.
fn extraspecial(rd: &RootDatum, k: usize) -> (usize, usize) {
    let s = &rd.positive_roots[k].simple;
    for i in 0..rd.rank {
        let mut t = s.clone();
        t[i] -= 1;
        if let Some(b) = rd.positive_index(&t) {
            return (i, b);
        }
    }
    unreachable!("non-simple positive root has a simple predecessor")
}

/// Largest `r` with `beta - r alpha_i` a root.
fn string_below(rd: &RootDatum, b: usize, i: usize) -> i64 {
    let mut r = 0;
    let mut t = rd.positive_roots[b].simple.clone();
    loop {
        t[i] -= 1;
        if rd.signed_index(&t).is_none() {
            return r;
        }
        r += 1;
    }
}

/// Solve `sum_j c_j cols[j] = target` modulo the auxiliary prime.
fn solve_big(cols: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    let n = cols.len();
    let m = target.len();
    let mut a: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| md(cols[j][i])).chain(std::iter::once(md(target[i]))).collect()).collect();
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(i) = (r..m).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, i);
        let iv = inv(a[r][c]);
        for x in a[r].iter_mut() {
            *x = mul(*x, iv);
        }
        for i in 0..m {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                let row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&row) {
                    *x = md(*x - mul(f, *y));
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| row[n] != 0) {
        return None;
    }
    let mut x = vec![0; n];
    for (i, &c) in piv.iter().enumerate() {
        x[c] = a[i][n];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(label: &str, levi: &[usize], p: u32) -> LieAlgebra {
        LieAlgebra::from_label(label, levi, p).unwrap()
    }

    #[test]
    fn sl2_brackets() {
        let g = build("A1", &[0], 5);
        let (f, h, e) = (g.neg(0), g.cartan(0), g.pos(0));
        assert_eq!(g.bracket(e, f), &vec![(h, 1)]);
        assert_eq!(g.bracket(h, e), &vec![(e, 2)]);
        assert_eq!(g.bracket(h, f), &vec![(f, -2)]);
        assert_eq!(g.chi[f], 1);
        assert_eq!(g.tau(e), &vec![(e, -1)]);
        assert_eq!(g.tau(f), &vec![(f, -1)]);
        assert_eq!(g.tau(h), &vec![(h, 1)]);
    }

    #[test]
    fn jacobi_and_restricted() {
        for (label, p) in [("A2", 5), ("A3", 5), ("B2", 5), ("C3", 5), ("D4", 3)] {
            let g = build(label, &[], p);
            assert!(g.jacobi_holds(), "{label}");
            assert!(g.restricted_holds(), "{label}");
            // structure constants are +-(r+1)
            for a in 0..g.dim() {
                for b in 0..g.dim() {
                    if g.is_root_vector(a) && g.is_root_vector(b) {
                        for &(c, x) in g.bracket(a, b) {
                            if g.is_root_vector(c) {
                                assert!((1..=3).contains(&x.abs()), "{label}: {x}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn prime_gates() {
        assert!(LieAlgebra::from_label("A2", &[0], 3).is_err());
        assert!(LieAlgebra::from_label("B2", &[1], 2).is_err());
        assert!(LieAlgebra::from_label("A3", &[0], 2).is_err());
        assert!(LieAlgebra::from_label("A2", &[0], 5).is_ok());
    }

    #[test]
    fn twist_negates_character() {
        for (label, levi) in [("A2", vec![0]), ("B2", vec![1]), ("A3", vec![0, 1]), ("A1", vec![0])] {
            let g = build(label, &levi, 5);
            for a in 0..g.dim() {
                let lhs = g.chi_of(g.tau_inverse(a));
                assert_eq!(lhs, g.fp.neg(g.chi[a]), "{label} basis {a}");
            }
        }
    }

    #[test]
    fn subalgebras_closed() {
        let g = build("B2", &[1], 5);
        for tag in [SubalgebraTag::BorelPlus, SubalgebraTag::Levi, SubalgebraTag::ParabolicI, SubalgebraTag::ParabolicIPrime, SubalgebraTag::UPlus, SubalgebraTag::UMinus] {
            assert!(g.is_closed(&g.subalgebra(tag)), "{tag:?}");
        }
        assert!(g.is_closed(&g.twisted_borel(g.rd.w_upper)));
    }
}
