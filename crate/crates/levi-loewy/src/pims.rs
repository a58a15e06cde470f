//! Projective indecomposables of U_chi(g_I) from its regular module:
//! Wedderburn projection onto the simples, idempotent lifting, and spinning `A e`.

use crate::chevalley::{BasisKind, LieAlgebra, SubalgebraTag};
use crate::ffla::{spin_sparse, FMatrix, Fp, SparseMatrix, Subspace};
use crate::modules::{GradedModule, Key, Workbench};
use crate::pbw::{Induction, InnerModule, PbwError};
use crate::weyl::Weight;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PimError {
    #[error(transparent)]
    Pbw(#[from] PbwError),
    #[error("algebra of dimension {dim} exceeds the budget {budget}")]
    Budget { dim: usize, budget: usize },
    #[error("idempotent lifting did not converge")]
    NotConverged,
    #[error("no simple module with weight {0:?}")]
    NoSimple(Vec<u32>),
    #[error("the simple with weight {0:?} has no rank-one preimage")]
    NoPreimage(Vec<u32>),
}

pub type Result<T> = std::result::Result<T, PimError>;

/// Default bound on the dimension of the regular module.
pub const DEFAULT_BUDGET: usize = 7_000;

/// A module for the Levi algebra given by dense generator matrices.
#[derive(Clone, Debug)]
pub struct RawModule {
    /// highest weight mod p (linkage representative)
    pub weight: Vec<u32>,
    pub dim: usize,
    pub action: HashMap<usize, FMatrix>,
}

/// The reduced enveloping algebra of g_I as its own left regular module on PBW monomials.
pub struct MatAlgebra {
    pub lie: Arc<LieAlgebra>,
    /// ordered PBW letters (the basis of g_I)
    pub letters: Vec<usize>,
    pub dim: usize,
    left: HashMap<usize, SparseMatrix>,
    pow: Vec<usize>,
}

impl MatAlgebra {
    /// `U_chi(g_I)` with left multiplication by each basis element of g_I.
    pub fn levi(lie: &Arc<LieAlgebra>, budget: usize) -> Result<MatAlgebra> {
        let letters = lie.subalgebra(SubalgebraTag::Levi);
        let dim = (lie.p as usize).pow(letters.len() as u32);
        if dim > budget {
            return Err(PimError::Budget { dim, budget });
        }
        let outside: Vec<usize> = (0..lie.dim()).filter(|a| !letters.contains(a)).collect();
        let inner = InnerModule::character(lie, &outside, &Weight::zero(lie.rank()));
        let mut ind = Induction::new(lie, &outside, &inner)?;
        let mut left = HashMap::new();
        for &a in &letters {
            let rows = ind.raw_rows(a)?;
            left.insert(a, SparseMatrix { rows: dim, cols: dim, entries: rows });
        }
        let mut pow = vec![1usize];
        for _ in 0..letters.len() {
            pow.push(pow.last().unwrap() * lie.p as usize);
        }
        Ok(MatAlgebra { lie: lie.clone(), letters, dim, left, pow })
    }

    pub fn fp(&self) -> Fp {
        self.lie.fp
    }

    pub fn unit(&self) -> Vec<u64> {
        let mut v = self.fp().zero_row(self.dim);
        self.fp().set(&mut v, 0, 1);
        v
    }

    /// Leftmost letter of a monomial and the monomial with that letter removed.
    fn split(&self, code: usize) -> Option<(usize, usize)> {
        let p = self.lie.p as usize;
        (0..self.letters.len()).find(|&j| (code / self.pow[j]) % p != 0).map(|j| (j, code - self.pow[j]))
    }

    pub fn left_matrix(&self, a: usize) -> &SparseMatrix {
        &self.left[&a]
    }

    /// `m b` for every basis monomial `m`.
    pub fn left_products(&self, b: &[u64]) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = Vec::with_capacity(self.dim);
        out.push(b.to_vec());
        for code in 1..self.dim {
            let (j, rest) = self.split(code).unwrap();
            let v = self.left[&self.letters[j]].apply_packed(self.fp(), &out[rest]);
            out.push(v);
        }
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let fp = self.fp();
        let prods = self.left_products(b);
        let mut acc = fp.zero_row(self.dim);
        for (m, v) in prods.iter().enumerate() {
            let c = fp.get(a, m);
            if c != 0 {
                fp.axpy(&mut acc, v, c);
            }
        }
        acc
    }

    /// Matrices of every basis monomial on a module (row convention).
    pub fn represent(&self, s: &RawModule) -> Vec<FMatrix> {
        let fp = self.fp();
        let mut out = Vec::with_capacity(self.dim);
        out.push(FMatrix::identity(fp, s.dim));
        for code in 1..self.dim {
            let (j, rest) = self.split(code).unwrap();
            let m = out[rest].mul(&s.action[&self.letters[j]]);
            out.push(m);
        }
        out
    }
}

/// Weight mod p of a linkage representative for the Levi dot action.
pub fn levi_class(wb: &Workbench, mu: &[u32]) -> Vec<u32> {
    let rd = wb.rd();
    let p = wb.p();
    let w = Weight(mu.iter().map(|&x| x as i64).collect());
    rd.levi_weyl.iter().map(|&k| rd.dot(k, &w).mod_p(p)).min().unwrap()
}

/// The Levi baby Verma module of a weight, as raw matrices on g_I.
pub fn levi_verma(lie: &Arc<LieAlgebra>, mu: &Weight) -> Result<RawModule> {
    let levi = lie.subalgebra(SubalgebraTag::Levi);
    let levi_pos: Vec<usize> = levi.iter().copied().filter(|&a| matches!(lie.kind(a), BasisKind::Pos(_))).collect();
    let sub: Vec<usize> = (0..lie.dim()).filter(|a| !levi.contains(a) || matches!(lie.kind(*a), BasisKind::Cartan(_)) || levi_pos.contains(a)).collect();
    let inner = InnerModule::character(lie, &sub, mu);
    let mut ind = Induction::new(lie, &sub, &inner)?;
    let dim = ind.monomial_count() as usize;
    let mut action = HashMap::new();
    for &a in &levi {
        let rows = ind.raw_rows(a)?;
        action.insert(a, SparseMatrix { rows: dim, cols: dim, entries: rows }.to_dense(lie.fp));
    }
    Ok(RawModule { weight: mu.mod_p(lie.p), dim, action })
}

/// All simple U_chi(g_I)-modules: Levi baby Verma modules, one per linkage class of weights mod p.
pub fn levi_simples(wb: &Workbench) -> Result<Vec<RawModule>> {
    let p = wb.p() as usize;
    let n = wb.rd().rank;
    let mut reps: Vec<Vec<u32>> = Vec::new();
    for code in 0..p.pow(n as u32) {
        let mu: Vec<u32> = (0..n).map(|i| ((code / p.pow(i as u32)) % p) as u32).collect();
        reps.push(levi_class(wb, &mu));
    }
    reps.sort();
    reps.dedup();
    reps.iter().map(|mu| levi_verma(&wb.lie, &Weight(mu.iter().map(|&x| x as i64).collect()))).collect()
}

/// The regular module with its simples and Wedderburn projection.
pub struct LeviAlgebra {
    pub alg: MatAlgebra,
    pub simples: Vec<RawModule>,
    /// rows: basis monomials; columns: the flattened images in each End(S)
    pub wedderburn: FMatrix,
    offsets: Vec<usize>,
    pub radical: Subspace,
}

impl LeviAlgebra {
    pub fn new(wb: &Workbench, budget: usize) -> Result<LeviAlgebra> {
        let alg = MatAlgebra::levi(&wb.lie, budget)?;
        let simples = levi_simples(wb)?;
        let fp = alg.fp();
        let mut offsets = Vec::new();
        let mut cols = 0;
        for s in &simples {
            offsets.push(cols);
            cols += s.dim * s.dim;
        }
        let mut w = FMatrix::zeros(fp, alg.dim, cols);
        for (si, s) in simples.iter().enumerate() {
            for (m, mat) in alg.represent(s).iter().enumerate() {
                for i in 0..s.dim {
                    for j in 0..s.dim {
                        let v = mat.get(i, j);
                        if v != 0 {
                            w.set(m, offsets[si] + i * s.dim + j, v);
                        }
                    }
                }
            }
        }
        let radical = w.left_nullspace();
        Ok(LeviAlgebra { alg, simples, wedderburn: w, offsets, radical })
    }

    /// `dim A - sum (dim S)^2`, which must equal the dimension of the radical.
    pub fn wedderburn_defect(&self) -> usize {
        self.alg.dim - self.simples.iter().map(|s| s.dim * s.dim).sum::<usize>()
    }

    pub fn simple_index(&self, wb: &Workbench, mu: &Weight) -> Result<usize> {
        let class = levi_class(wb, &mu.mod_p(wb.p()));
        self.simples.iter().position(|s| s.weight == class).ok_or(PimError::NoSimple(class))
    }

    /// An element acting on simple `si` as the projection onto its highest weight line and by zero on the others.
    pub fn rank_one_preimage(&self, si: usize) -> Result<Vec<u64>> {
        let fp = self.alg.fp();
        let mut t = vec![0u32; self.wedderburn.cols()];
        t[self.offsets[si]] = 1;
        let x = self.wedderburn.transpose().solve(&t).ok_or_else(|| PimError::NoPreimage(self.simples[si].weight.clone()))?;
        Ok(fp.pack(&x))
    }

    /// `e <- 3e^2 - 2e^3` until idempotent.
    pub fn lift_idempotent(&self, e0: &[u64]) -> Result<(Vec<u64>, usize)> {
        let fp = self.alg.fp();
        let mut e = e0.to_vec();
        for it in 0..64 {
            let e2 = self.alg.mul(&e, &e);
            if e2 == e {
                return Ok((e, it));
            }
            let e3 = self.alg.mul(&e2, &e);
            let mut next = fp.zero_row(self.alg.dim);
            fp.axpy(&mut next, &e2, 3 % fp.p());
            fp.axpy(&mut next, &e3, fp.neg(2));
            e = next;
        }
        Err(PimError::NotConverged)
    }

    /// The left ideal `A e` as a subspace of the regular module.
    pub fn left_ideal(&self, e: &[u64]) -> Subspace {
        let gens: Vec<SparseMatrix> = self.alg.letters.iter().map(|&a| self.alg.left_matrix(a).clone()).collect();
        spin_sparse(self.alg.fp(), self.alg.dim, &[e.to_vec()], &gens)
    }

    /// Radical layer dimensions of a left ideal: `J^k P / J^{k+1} P` until zero.
    pub fn radical_layers(&self, ideal: &Subspace) -> Vec<usize> {
        let fp = self.alg.fp();
        let jac: Vec<Vec<u32>> = (0..self.radical.dim()).map(|i| fp.unpack(self.radical.basis().row(i), self.alg.dim)).collect();
        let mut cur = ideal.clone();
        let mut layers = Vec::new();
        while cur.dim() > 0 {
            let mut next = Subspace::zero(fp, self.alg.dim);
            for i in 0..cur.dim() {
                let prods = self.alg.left_products(cur.basis().row(i));
                for j in &jac {
                    let mut acc = fp.zero_row(self.alg.dim);
                    for (m, &c) in j.iter().enumerate() {
                        if c != 0 {
                            fp.axpy(&mut acc, &prods[m], c);
                        }
                    }
                    next.add_vector(&acc);
                }
            }
            layers.push(cur.dim() - next.dim());
            cur = next;
        }
        layers
    }

    /// Projective cover of simple `si` as a raw module on g_I (weight basis).
    pub fn pim_raw(&self, si: usize) -> Result<(Subspace, RawModule, Vec<Vec<u32>>)> {
        let e0 = self.rank_one_preimage(si)?;
        let (e, _) = self.lift_idempotent(&e0)?;
        let ideal = self.left_ideal(&e);
        let (raw, weights) = weight_basis(&self.alg, &ideal, &self.simples[si].weight);
        Ok((ideal, raw, weights))
    }
}

/// Restrict the left action to a left ideal and pass to a joint eigenbasis of the Cartan part.
fn weight_basis(alg: &MatAlgebra, ideal: &Subspace, top: &[u32]) -> (RawModule, Vec<Vec<u32>>) {
    let fp = alg.fp();
    let d = ideal.dim();
    let mut local: HashMap<usize, FMatrix> = HashMap::new();
    for &a in &alg.letters {
        let mut m = FMatrix::zeros(fp, d, d);
        for i in 0..d {
            let w = alg.left_matrix(a).apply_packed(fp, ideal.basis().row(i));
            for (j, c) in ideal.coords(&w).into_iter().enumerate() {
                m.set(i, j, c);
            }
        }
        local.insert(a, m);
    }
    let rank = alg.lie.rank();
    let mut spaces: Vec<(Vec<u32>, Subspace)> = vec![(Vec::new(), Subspace::full(fp, d))];
    for i in 0..rank {
        let h = &local[&alg.lie.cartan(i)];
        let mut next = Vec::new();
        for (lab, sp) in spaces {
            for c in 0..fp.p() {
                let k = h.add_scalar_identity(fp.neg(c)).left_nullspace().intersect(&sp);
                if k.dim() > 0 {
                    let mut l = lab.clone();
                    l.push(c);
                    next.push((l, k));
                }
            }
        }
        spaces = next;
    }
    // the top weight first, then the rest in label order
    spaces.sort_by_key(|(l, _)| (l.as_slice() != top, l.clone()));
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for (l, sp) in &spaces {
        for i in 0..sp.dim() {
            rows.push(sp.basis().row_vec(i));
            weights.push(l.clone());
        }
    }
    let change = FMatrix::from_packed(fp, d, rows);
    let inv = change.inverse().expect("weight spaces span the module");
    let action = local.into_iter().map(|(a, m)| (a, change.mul(&m).mul(&inv))).collect();
    (RawModule { weight: top.to_vec(), dim: d, action }, weights)
}

/// Turn a raw Levi module with weight labels into a graded Levi module in the degree of `lambda`.
pub fn graded_levi_module(lie: &Arc<LieAlgebra>, raw: &RawModule, weights: &[Vec<u32>], lambda: &Weight, label: String) -> GradedModule {
    let levi = lie.subalgebra(SubalgebraTag::Levi);
    let mut support = vec![false; lie.dim()];
    for &a in &levi {
        support[a] = true;
    }
    let degree = lie.rd.degree_class(lambda);
    let keys: Vec<Key> = weights.iter().map(|w| Key { degree: degree.clone(), weight: w.clone() }).collect();
    let rows: Vec<Vec<Vec<(u32, u32)>>> = (0..lie.dim())
        .map(|a| match raw.action.get(&a) {
            Some(m) => SparseMatrix::from_dense(m).entries,
            None => vec![Vec::new(); raw.dim],
        })
        .collect();
    GradedModule::from_sparse_supported(lie.clone(), label, keys, &rows, support)
}

/// Loewy length of the Levi projective cover of `lambda`, from the radical of the Levi algebra.
pub fn levi_pim_loewy_length(wb: &Workbench, lambda: &Weight) -> Result<usize> {
    let la = wb.levi_algebra()?;
    let si = la.simple_index(wb, lambda)?;
    let (ideal, _, _) = la.pim_raw(si)?;
    Ok(la.radical_layers(&ideal).len())
}

/// Projective cover of the graded Levi simple of `lambda`.
pub fn levi_projective_cover(wb: &Workbench, lambda: &Weight) -> Result<GradedModule> {
    let la = wb.levi_algebra()?;
    let si = la.simple_index(wb, lambda)?;
    let (_, raw, weights) = la.pim_raw(si)?;
    // the highest weight line must carry lambda's weight
    let top = lambda.mod_p(wb.p());
    let raw = RawModule { weight: top, ..raw };
    Ok(graded_levi_module(&wb.lie, &raw, &weights, lambda, format!("QI{lambda}")))
}

/// Dimensions of all projective covers and the accounting `dim A = sum dim P(S) dim S`.
pub struct Accounting {
    pub algebra_dim: usize,
    pub radical_dim: usize,
    /// (simple weight, dim S, dim P(S))
    pub rows: Vec<(Vec<u32>, usize, usize)>,
}

impl Accounting {
    pub fn balanced(&self) -> bool {
        self.rows.iter().map(|(_, s, p)| s * p).sum::<usize>() == self.algebra_dim
    }
}

pub fn regular_accounting(wb: &Workbench) -> Result<Accounting> {
    let la = wb.levi_algebra()?;
    let mut rows = Vec::new();
    for si in 0..la.simples.len() {
        let (ideal, _, _) = la.pim_raw(si)?;
        rows.push((la.simples[si].weight.clone(), la.simples[si].dim, ideal.dim()));
    }
    Ok(Accounting { algebra_dim: la.alg.dim, radical_dim: la.radical.dim(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_p3_regular_algebra() {
        let wb = Workbench::from_label("A1", &[0], 3, 1).unwrap();
        let la = wb.levi_algebra().unwrap();
        assert_eq!(la.alg.dim, 27);
        assert_eq!(la.simples.len(), 2);
        assert_eq!(la.radical.dim(), 9);
        assert_eq!(la.wedderburn_defect(), la.radical.dim());
        let acc = regular_accounting(&wb).unwrap();
        assert!(acc.balanced());
    }

    #[test]
    fn idempotent_is_exact() {
        let wb = Workbench::from_label("A1", &[0], 5, 1).unwrap();
        let la = wb.levi_algebra().unwrap();
        let si = la.simple_index(&wb, &Weight(vec![1])).unwrap();
        let (e, _) = la.lift_idempotent(&la.rank_one_preimage(si).unwrap()).unwrap();
        assert_eq!(la.alg.mul(&e, &e), e);
        assert_eq!(la.left_ideal(&e).dim(), 10);
    }

    #[test]
    fn levi_pim_layers_match_the_series() {
        let wb = Workbench::from_label("A1", &[0], 5, 1).unwrap();
        let lam = Weight(vec![1]);
        let la = wb.levi_algebra().unwrap();
        let (ideal, _, _) = la.pim_raw(la.simple_index(&wb, &lam).unwrap()).unwrap();
        assert_eq!(la.radical_layers(&ideal), vec![5, 5]);
        let q = wb.levi_pim(&lam).unwrap();
        assert_eq!(crate::series::loewy_length(&wb, &q).unwrap(), 2);
        let wb = Workbench::from_label("A2", &[0], 5, 1).unwrap();
        assert_eq!(levi_pim_loewy_length(&wb, &Weight(vec![0, 1])).unwrap(), 2);
    }
}
