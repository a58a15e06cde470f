//! Brute-force reference implementations shared by the integration tests.
//! Everything here uses plain `Vec<u32>` arithmetic and never calls the packed kernels.
#![allow(dead_code)]

use levi_loewy::modules::{GradedModule, Submodule};
use std::collections::BTreeSet;

/// A subspace in canonical form: reduced row echelon rows, sorted by pivot.
pub type Canon = Vec<Vec<u32>>;

fn inv(p: u32, a: u32) -> u32 {
    (1..p).find(|&x| (x as u64 * a as u64) % p as u64 == 1).expect("nonzero")
}

/// Reduced row echelon form of the span of `rows` by textbook elimination.
pub fn rref(p: u32, mut rows: Vec<Vec<u32>>) -> Canon {
    let n = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, piv);
        let c = inv(p, rows[rank][col]);
        for x in rows[rank].iter_mut() {
            *x = (*x as u64 * c as u64 % p as u64) as u32;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col] as u64;
                for j in 0..n {
                    let sub = f * rows[rank][j] as u64 % p as u64;
                    rows[i][j] = ((rows[i][j] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

pub fn sum(p: u32, a: &Canon, b: &Canon) -> Canon {
    rref(p, a.iter().chain(b).cloned().collect())
}

pub fn contains(p: u32, big: &Canon, small: &Canon) -> bool {
    sum(p, big, small).len() == big.len()
}

/// A module as explicit matrices acting on row vectors, plus its homogeneous pieces.
pub struct Explicit {
    pub p: u32,
    pub dim: usize,
    pub mats: Vec<Vec<Vec<u32>>>,
    /// (offset, size) of each graded block
    pub blocks: Vec<(usize, usize)>,
}

impl Explicit {
    pub fn of(m: &GradedModule) -> Explicit {
        let p = m.fp().p();
        let mats = (0..m.lie.dim()).filter(|&a| m.support()[a]).map(|a| m.action_matrix(a).to_dense()).collect();
        let blocks = (0..m.n_blocks()).map(|b| (m.offset(b), m.block_dim(b))).collect();
        Explicit { p, dim: m.dim(), mats, blocks }
    }

    fn act(&self, v: &[u32], a: usize) -> Vec<u32> {
        let mut out = vec![0u64; self.dim];
        for (i, &x) in v.iter().enumerate() {
            if x != 0 {
                for (j, &y) in self.mats[a][i].iter().enumerate() {
                    out[j] += x as u64 * y as u64;
                }
            }
        }
        out.into_iter().map(|x| (x % self.p as u64) as u32).collect()
    }

    /// Span of all words in the action applied to `v`.
    pub fn spin(&self, v: Vec<u32>) -> Canon {
        let mut span = rref(self.p, vec![v.clone()]);
        let mut frontier = vec![v];
        while let Some(w) = frontier.pop() {
            for a in 0..self.mats.len() {
                let x = self.act(&w, a);
                let bigger = sum(self.p, &span, &vec![x.clone()]);
                if bigger.len() > span.len() {
                    span = bigger;
                    frontier.push(x);
                }
            }
        }
        span
    }

    /// Every nonzero homogeneous vector, up to scalars.
    pub fn homogeneous_vectors(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for &(off, n) in &self.blocks {
            let total = (self.p as usize).pow(n as u32);
            for code in 1..total {
                let mut digits = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    digits.push((c % self.p as usize) as u32);
                    c /= self.p as usize;
                }
                // leading nonzero digit equal to 1 picks one vector per line
                if digits.iter().rev().find(|&&d| d != 0) != Some(&1) {
                    continue;
                }
                let mut v = vec![0; self.dim];
                v[off..off + n].copy_from_slice(&digits);
                out.push(v);
            }
        }
        out
    }

    /// All graded submodules: sums of cyclic submodules of homogeneous vectors.
    pub fn lattice(&self) -> BTreeSet<Canon> {
        let cyclic: BTreeSet<Canon> = self.homogeneous_vectors().into_iter().map(|v| self.spin(v)).collect();
        let mut all: BTreeSet<Canon> = BTreeSet::new();
        all.insert(Vec::new());
        let mut frontier: Vec<Canon> = vec![Vec::new()];
        while let Some(s) = frontier.pop() {
            for c in &cyclic {
                let t = sum(self.p, &s, c);
                if all.insert(t.clone()) {
                    frontier.push(t);
                }
            }
        }
        all
    }
}

/// Oracle series computed purely from the lattice.
pub struct LatticeSeries {
    pub radical: Vec<Canon>,
    pub socle: Vec<Canon>,
    /// dimensions of the factors of one maximal chain
    pub chain_factor_dims: Vec<usize>,
}

pub fn lattice_series(p: u32, lattice: &BTreeSet<Canon>) -> LatticeSeries {
    let top = lattice.iter().max_by_key(|s| s.len()).unwrap().clone();
    let below = |x: &Canon| -> Vec<&Canon> { lattice.iter().filter(|s| s.len() < x.len() && contains(p, x, s)).collect() };
    let above = |x: &Canon| -> Vec<&Canon> { lattice.iter().filter(|s| s.len() > x.len() && contains(p, s, x)).collect() };

    let mut radical = vec![top.clone()];
    let mut cur = top.clone();
    while !cur.is_empty() {
        let under = below(&cur);
        let maximal: Vec<&Canon> = under.iter().copied().filter(|s| !under.iter().any(|t| t.len() > s.len() && contains(p, t, s))).collect();
        // largest submodule inside every maximal one
        cur = lattice.iter().filter(|s| maximal.iter().all(|m| contains(p, m, s))).max_by_key(|s| s.len()).unwrap().clone();
        radical.push(cur.clone());
    }

    let mut socle = vec![Vec::new()];
    let mut cur: Canon = Vec::new();
    while cur.len() < top.len() {
        let over = above(&cur);
        let minimal: Vec<&Canon> = over.iter().copied().filter(|s| !over.iter().any(|t| t.len() < s.len() && contains(p, s, t))).collect();
        cur = minimal.iter().fold(cur.clone(), |acc, m| sum(p, &acc, m));
        socle.push(cur.clone());
    }

    let mut chain_factor_dims = Vec::new();
    let mut cur: Canon = Vec::new();
    while cur.len() < top.len() {
        let next = above(&cur).into_iter().min_by_key(|s| s.len()).unwrap().clone();
        chain_factor_dims.push(next.len() - cur.len());
        cur = next;
    }
    chain_factor_dims.sort();
    LatticeSeries { radical, socle, chain_factor_dims }
}

/// A library submodule in the oracle's canonical form.
pub fn canon_of(m: &GradedModule, s: &Submodule) -> Canon {
    let p = m.fp().p();
    let mut rows = Vec::new();
    for (b, space) in s.spaces.iter().enumerate() {
        let basis = space.basis();
        for i in 0..space.dim() {
            let mut v = vec![0; m.dim()];
            for j in 0..m.block_dim(b) {
                v[m.offset(b) + j] = basis.get(i, j);
            }
            rows.push(v);
        }
    }
    rref(p, rows)
}

/// Library lattice: closure under sums of the library's own cyclic submodules.
pub fn library_lattice(m: &GradedModule, ex: &Explicit) -> BTreeSet<Canon> {
    let fp = m.fp();
    let mut cyclic = Vec::new();
    for v in ex.homogeneous_vectors() {
        let b = ex.blocks.iter().position(|&(off, n)| v[off..off + n].iter().any(|&x| x != 0)).unwrap();
        let (off, n) = ex.blocks[b];
        cyclic.push(m.spin(&[(b, fp.pack(&v[off..off + n]))]));
    }
    let mut all = vec![m.zero_submodule()];
    let mut seen: BTreeSet<Canon> = BTreeSet::new();
    seen.insert(Vec::new());
    let mut i = 0;
    while i < all.len() {
        for c in &cyclic {
            let t = all[i].sum(c);
            if seen.insert(canon_of(m, &t)) {
                assert!(m.is_submodule(&t));
                all.push(t);
            }
        }
        i += 1;
    }
    seen
}

use levi_loewy::harness::{CaseSpec, ModuleKind, Session, WeightChoice};
use levi_loewy::series;

/// Session for an explicit `lambda + rho`.
pub fn session(cartan: &str, levi: &str, p: u32, shifted: &[i64]) -> Session {
    let spec = CaseSpec { cartan: cartan.into(), levi: levi.into(), p, weight: WeightChoice::Shifted(shifted.to_vec()), seed: 1, budget_mb: None };
    Session::new(&spec, None).expect("valid case")
}

pub const SL2_KINDS: [ModuleKind; 5] = [ModuleKind::Verma, ModuleKind::TwistedVerma, ModuleKind::Standard, ModuleKind::Costandard, ModuleKind::Quasi];

/// Compare lattice, radical and socle series and chop of one module against the oracle;
/// returns a description of every disagreement.
pub fn oracle_disagreements(s: &Session, m: &GradedModule) -> Vec<String> {
    let p = s.p();
    let mut bad = Vec::new();
    let ex = Explicit::of(m);
    let lat = ex.lattice();
    if library_lattice(m, &ex) != lat {
        bad.push(format!("{}: submodule lattice", m.label));
    }
    let ls = lattice_series(p, &lat);
    let rad: Vec<Canon> = series::radical_series(&s.wb, m).unwrap().iter().map(|x| canon_of(m, x)).collect();
    if rad != ls.radical {
        bad.push(format!("{}: radical series", m.label));
    }
    let mut soc: Vec<Canon> = vec![Vec::new()];
    soc.extend(series::socle_series(&s.wb, m).unwrap().iter().map(|x| canon_of(m, x)));
    if soc != ls.socle {
        bad.push(format!("{}: socle series", m.label));
    }
    let ch = series::chop(&s.wb, m, s.spec.seed).unwrap();
    let mut dims: Vec<usize> = ch.factors.iter().flat_map(|(_, k, d)| std::iter::repeat_n(*d, *k)).collect();
    dims.sort();
    if dims != ls.chain_factor_dims {
        bad.push(format!("{}: chop dims {:?} vs {:?}", m.label, dims, ls.chain_factor_dims));
    }
    bad
}

/// All sl2 modules with I = all simple roots for one prime, checked against the oracle.
pub fn sl2_oracle_sweep(p: u32) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for shifted in 1..=p as i64 {
        let s = session("A1", "all", p, &[shifted]);
        for kind in SL2_KINDS {
            let m = s.module(kind).unwrap();
            checked += 1;
            bad.extend(oracle_disagreements(&s, &m));
        }
    }
    (checked, bad)
}
