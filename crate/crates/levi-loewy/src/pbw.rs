//! PBW straightening for U_chi(g) and induced-module assembly.
//!
//! Basis elements of g are ordered negative roots, Cartan, positive roots
//! (the basis index order of [`LieAlgebra`]).  An induced module
//! `U_chi(g) (x)_{U(P)} V` has basis `c_1^{a_1} ... c_m^{a_m} (x) v` over the
//! ordered complement `c_1 < ... < c_m` of P, with `0 <= a_j < p`.
//! Monomials are encoded in mixed radix: `sum_j a_j p^j`.

use crate::chevalley::LieAlgebra;
use crate::modules::{GradedModule, Key};
use crate::weyl::Weight;
use std::collections::HashMap;
use std::sync::Arc;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PbwError {
    #[error("straightening exceeded depth {0}")]
    Depth(usize),
    #[error("basis element {0} is neither in the inducing subalgebra nor its complement")]
    Uncovered(usize),
    #[error("induced module too large: {0} basis vectors")]
    TooLarge(u64),
}

/// (monomial code, inner index, coefficient)
pub type Terms = Vec<(u64, u32, u32)>;

/// A module for the inducing subalgebra: sparse action rows for each of its basis elements.
#[derive(Clone, Debug)]
pub struct InnerModule {
    pub dim: usize,
    /// `action[a][v]` = image of inner basis vector `v` under g-basis element `a`
    pub action: HashMap<usize, Vec<Vec<(u32, u32)>>>,
    pub keys: Vec<Key>,
}

impl InnerModule {
    /// One-dimensional module `k_lambda` for a subalgebra containing the Cartan part, on which every root vector acts by zero.
    pub fn character(lie: &LieAlgebra, subalgebra: &[usize], lambda: &Weight) -> InnerModule {
        let fp = lie.fp;
        let mut action = HashMap::new();
        for &a in subalgebra {
            let row = match lie.kind(a) {
                crate::chevalley::BasisKind::Cartan(i) => {
                    let c = fp.from_i64(lambda.0[i]);
                    if c == 0 {
                        vec![]
                    } else {
                        vec![(0u32, c)]
                    }
                }
                _ => vec![],
            };
            action.insert(a, vec![row]);
        }
        InnerModule { dim: 1, action, keys: vec![Key::of_weight(&lie.rd, lie.p, lambda)] }
    }

    /// Restrict a graded module to the given subalgebra; elements outside its support act by zero.
    pub fn from_module(m: &GradedModule, subalgebra: &[usize]) -> InnerModule {
        let mut action = HashMap::new();
        for &a in subalgebra {
            action.insert(a, m.sparse_rows(a));
        }
        InnerModule { dim: m.dim(), action, keys: m.vector_keys() }
    }
}

/// Straightening context for one induction datum.
pub struct Induction<'a> {
    lie: Arc<LieAlgebra>,
    complement: Vec<usize>,
    slot: Vec<Option<usize>>,
    in_sub: Vec<bool>,
    inner: &'a InnerModule,
    p: u64,
    pow: Vec<u64>,
    memo: HashMap<(usize, u64, u32), Rc<Terms>>,
    depth: usize,
    max_depth: usize,
}

impl<'a> Induction<'a> {
    pub fn new(lie: &Arc<LieAlgebra>, subalgebra: &[usize], inner: &'a InnerModule) -> Result<Induction<'a>, PbwError> {
        let lie = lie.clone();
        let dim = lie.dim();
        let mut in_sub = vec![false; dim];
        for &a in subalgebra {
            in_sub[a] = true;
        }
        let complement: Vec<usize> = (0..dim).filter(|&a| !in_sub[a]).collect();
        let mut slot = vec![None; dim];
        for (j, &c) in complement.iter().enumerate() {
            slot[c] = Some(j);
        }
        let p = lie.p as u64;
        let mut pow = vec![1u64];
        for _ in 0..complement.len() {
            let last = *pow.last().unwrap();
            pow.push(last.checked_mul(p).ok_or(PbwError::TooLarge(u64::MAX))?);
        }
        for &a in subalgebra {
            if !inner.action.contains_key(&a) {
                return Err(PbwError::Uncovered(a));
            }
        }
        Ok(Induction { lie, complement, slot, in_sub, inner, p, pow, memo: HashMap::new(), depth: 0, max_depth: 4096 })
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn monomial_count(&self) -> u64 {
        self.pow[self.complement.len()]
    }

    pub fn exponent(&self, mono: u64, j: usize) -> u64 {
        (mono / self.pow[j]) % self.p
    }

    pub fn exponents(&self, mono: u64) -> Vec<u64> {
        (0..self.complement.len()).map(|j| self.exponent(mono, j)).collect()
    }

    pub fn encode(&self, exps: &[u64]) -> u64 {
        exps.iter().enumerate().map(|(j, &a)| a * self.pow[j]).sum()
    }

    /// `z . (monomial (x) v)` expanded in the induced basis.
    pub fn act(&mut self, z: usize, mono: u64, v: u32) -> Result<Rc<Terms>, PbwError> {
        if let Some(r) = self.memo.get(&(z, mono, v)) {
            return Ok(r.clone());
        }
        self.depth += 1;
        if self.depth > self.max_depth {
            return Err(PbwError::Depth(self.max_depth));
        }
        let res = self.act_uncached(z, mono, v);
        self.depth -= 1;
        let res = Rc::new(res?);
        self.memo.insert((z, mono, v), res.clone());
        Ok(res)
    }

    fn act_uncached(&mut self, z: usize, mono: u64, v: u32) -> Result<Terms, PbwError> {
        let p = self.p;
        let fp = self.lie.fp;
        if mono == 0 {
            if self.in_sub[z] {
                let rows = &self.inner.action[&z];
                return Ok(rows[v as usize].iter().map(|&(w, c)| (0, w, c)).collect());
            }
            let j = self.slot[z].ok_or(PbwError::Uncovered(z))?;
            return Ok(vec![(self.pow[j], v, 1)]);
        }
        let j = (0..self.complement.len()).find(|&j| self.exponent(mono, j) != 0).unwrap();
        let cj = self.complement[j];
        match self.slot[z] {
            Some(k) if k < j => return Ok(vec![(mono + self.pow[k], v, 1)]),
            Some(k) if k == j => {
                let a = self.exponent(mono, j);
                if a + 1 < p {
                    return Ok(vec![(mono + self.pow[j], v, 1)]);
                }
                // c^p = c^{[p]} + chi(c)^p, and chi(c)^p = chi(c) in F_p
                let rest = mono - a * self.pow[j];
                let mut acc: Terms = Vec::new();
                let chi = self.lie.chi[cj];
                if chi != 0 {
                    acc.push((rest, v, chi));
                }
                if let Some(q) = self.lie.p_power(cj) {
                    acc.extend(self.act(q, rest, v)?.iter().copied());
                }
                return Ok(merge(acc, p as u32));
            }
            _ => {}
        }
        // z c_j rest = c_j (z rest) + [z, c_j] rest
        let rest = mono - self.pow[j];
        let mut acc: Terms = Vec::new();
        let inner = self.act(z, rest, v)?;
        for &(m, w, c) in inner.iter() {
            let t = self.act(cj, m, w)?;
            acc.extend(t.iter().map(|&(m2, w2, c2)| (m2, w2, fp.mul(c, c2))));
        }
        let br: Vec<(usize, i64)> = self.lie.bracket(z, cj).clone();
        for (b, x) in br {
            let s = fp.from_i64(x);
            if s == 0 {
                continue;
            }
            let t = self.act(b, rest, v)?;
            acc.extend(t.iter().map(|&(m2, w2, c2)| (m2, w2, fp.mul(s, c2))));
        }
        Ok(merge(acc, p as u32))
    }

    /// Degree/weight key of an induced basis vector.
    pub fn key_of(&self, mono: u64, v: u32) -> Key {
        let mut shift = Weight::zero(self.lie.rank());
        for j in 0..self.complement.len() {
            let a = self.exponent(mono, j);
            if a != 0 {
                shift = shift.add(&self.lie.weight_of(self.complement[j]).scale(a as i64));
            }
        }
        self.inner.keys[v as usize].shift(&self.lie.rd, self.lie.p, &shift)
    }

    /// Sparse rows of the action of `a` on the whole induced basis.
    pub fn raw_rows(&mut self, a: usize) -> Result<Vec<Vec<(u32, u32)>>, PbwError> {
        let dv = self.inner.dim as u64;
        let total = self.monomial_count() * dv;
        if total > 5_000_000 {
            return Err(PbwError::TooLarge(total));
        }
        (0..total)
            .map(|i| {
                let t = self.act(a, i / dv, (i % dv) as u32)?;
                Ok(t.iter().map(|&(m, w, c)| ((m * dv + w as u64) as u32, c)).collect())
            })
            .collect()
    }

    /// Assemble the full induced module; basis index = `mono * dim V + v`.
    pub fn build(&mut self, label: String) -> Result<GradedModule, PbwError> {
        let n_mono = self.monomial_count();
        let dv = self.inner.dim as u64;
        let total = n_mono * dv;
        if total > 5_000_000 {
            return Err(PbwError::TooLarge(total));
        }
        let keys: Vec<Key> = (0..total).map(|i| self.key_of(i / dv, (i % dv) as u32)).collect();
        let rows = (0..self.lie.dim()).map(|a| self.raw_rows(a)).collect::<Result<Vec<_>, _>>()?;
        Ok(GradedModule::from_sparse(self.lie.clone(), label, keys, &rows))
    }
}

/// Combine duplicate terms and drop zeros.
pub fn merge(mut t: Terms, p: u32) -> Terms {
    t.sort_unstable_by_key(|&(m, v, _)| (m, v));
    let mut out: Terms = Vec::with_capacity(t.len());
    for (m, v, c) in t {
        match out.last_mut() {
            Some(last) if last.0 == m && last.1 == v => last.2 = (last.2 + c) % p,
            _ => out.push((m, v, c % p)),
        }
    }
    out.retain(|&(_, _, c)| c != 0);
    out
}

/// Elements of U_chi(g) as combinations of ordered PBW monomials.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PbwElement {
    /// monomial code -> coefficient; codes use the full ordered basis of g
    pub terms: Vec<(u64, u32)>,
}

/// Multiplication in U_chi(g) via the left regular action on PBW monomials.
pub struct PbwAlgebra<'a> {
    engine: Induction<'a>,
}

impl<'a> PbwAlgebra<'a> {
    pub fn new(lie: &Arc<LieAlgebra>, trivial: &'a InnerModule) -> Result<PbwAlgebra<'a>, PbwError> {
        Ok(PbwAlgebra { engine: Induction::new(lie, &[], trivial)? })
    }

    /// Inner module for the empty subalgebra (one vector, key of weight 0).
    pub fn trivial_inner(lie: &LieAlgebra) -> InnerModule {
        InnerModule { dim: 1, action: HashMap::new(), keys: vec![Key::of_weight(&lie.rd, lie.p, &Weight::zero(lie.rank()))] }
    }

    pub fn generator(&self, a: usize) -> PbwElement {
        PbwElement { terms: vec![(self.engine.pow[a], 1)] }
    }

    pub fn scalar(&self, c: u32) -> PbwElement {
        let c = c % self.engine.lie.p;
        PbwElement { terms: if c == 0 { vec![] } else { vec![(0, c)] } }
    }

    pub fn monomial(&self, exps: &[u64]) -> PbwElement {
        PbwElement { terms: vec![(self.engine.encode(exps), 1)] }
    }

    pub fn exponents(&self, code: u64) -> Vec<u64> {
        self.engine.exponents(code)
    }

    pub fn add(&self, a: &PbwElement, b: &PbwElement) -> PbwElement {
        let p = self.engine.lie.p;
        let t: Terms = a.terms.iter().chain(&b.terms).map(|&(m, c)| (m, 0, c)).collect();
        PbwElement { terms: merge(t, p).into_iter().map(|(m, _, c)| (m, c)).collect() }
    }

    pub fn scale(&self, a: &PbwElement, c: u32) -> PbwElement {
        let fp = self.engine.lie.fp;
        let t: Terms = a.terms.iter().map(|&(m, x)| (m, 0, fp.mul(x, c))).collect();
        PbwElement { terms: merge(t, fp.p()).into_iter().map(|(m, _, c)| (m, c)).collect() }
    }

    /// `a * b`, straightened.
    pub fn multiply(&mut self, a: &PbwElement, b: &PbwElement) -> Result<PbwElement, PbwError> {
        let fp = self.engine.lie.fp;
        let mut acc: Terms = Vec::new();
        for &(ma, ca) in &a.terms {
            // apply the factors of the monomial right to left
            let exps = self.engine.exponents(ma);
            let mut cur: Terms = b.terms.iter().map(|&(m, c)| (m, 0, fp.mul(c, ca))).collect();
            for j in (0..exps.len()).rev() {
                let g = self.engine.complement[j];
                for _ in 0..exps[j] {
                    let mut next = Vec::new();
                    for &(m, v, c) in &cur {
                        let t = self.engine.act(g, m, v)?;
                        next.extend(t.iter().map(|&(m2, v2, c2)| (m2, v2, fp.mul(c, c2))));
                    }
                    cur = merge(next, fp.p());
                }
            }
            acc.extend(cur);
        }
        Ok(PbwElement { terms: merge(acc, fp.p()).into_iter().map(|(m, _, c)| (m, c)).collect() })
    }
}
