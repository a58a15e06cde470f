//! Ext¹ between explicit modules via cocycles on the root vectors, extension
//! assembly and splitting tests.
//!
//! An extension `0 -> N -> E -> M -> 0` is `M ⊕ N` with every root vector acting
//! by `[[R_M(x), theta(x)], [0, R_N(x)]]` (row vectors, so `R_xy = R_y R_x`).
//! The Cartan part acts by block weights on both sides, hence `theta(h) = 0`.

use crate::ffla::{normalize_sparse, FMatrix, Fp, SparseEchelon, SparseRow, Subspace};
use crate::modules::{hom_space, GradedModule, Submodule};
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

/// Default bound on the number of cocycle unknowns for the dense cocycle-basis path.
pub const DEFAULT_UNKNOWN_BUDGET: usize = 20_000;

/// Past the dense budget, the sparse rank path accepts this many times the dense budget
/// as unknowns and `SPARSE_FACTOR * budget` stored entries of fill-in.
pub const SPARSE_FACTOR: usize = 64;

/// Echelon span of incoming sparse rows: dense when small, sparse with a fill-in cap otherwise.
enum RowSpan {
    Dense(Subspace),
    Sparse { rows: SparseEchelon, cap: usize },
}

impl RowSpan {
    fn new(fp: Fp, ambient: usize, budget: usize) -> RowSpan {
        if ambient <= budget {
            RowSpan::Dense(Subspace::zero(fp, ambient))
        } else {
            RowSpan::Sparse { rows: SparseEchelon::new(fp, ambient), cap: budget.saturating_mul(SPARSE_FACTOR) }
        }
    }

    fn add(&mut self, row: SparseRow) -> Result<(), ExtError> {
        match self {
            RowSpan::Dense(space) => {
                let fp = space.fp();
                let mut v = fp.zero_row(space.ambient());
                for (c, x) in row {
                    fp.set(&mut v, c as usize, x);
                }
                space.add_vector(&v);
            }
            RowSpan::Sparse { rows, cap } => {
                rows.add_row(row);
                if rows.nnz() > *cap {
                    return Err(ExtError::Budget { unknowns: rows.ambient(), budget: *cap });
                }
            }
        }
        Ok(())
    }

    fn rank(&self) -> usize {
        match self {
            RowSpan::Dense(space) => space.dim(),
            RowSpan::Sparse { rows, .. } => rows.rank(),
        }
    }

    fn into_subspace(self) -> Subspace {
        match self {
            RowSpan::Dense(space) => space,
            RowSpan::Sparse { rows, .. } => rows.to_subspace(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExtError {
    #[error("cocycle system has {unknowns} unknowns, budget {budget}")]
    Budget { unknowns: usize, budget: usize },
    #[error("modules must be defined over the same Lie algebra with full support")]
    Incompatible,
    #[error("only graded cocycles assemble to graded modules")]
    Ungraded,
}

/// One unknown block: `theta(root)` restricted to M-block `src`, landing in N-block `dst`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CocycleSlot {
    pub root: usize,
    pub src: usize,
    pub dst: usize,
}

#[derive(Clone, Debug)]
pub struct Cocycle {
    pub blocks: Vec<(CocycleSlot, FMatrix)>,
}

#[derive(Clone, Debug)]
pub struct ExtSpace {
    pub dim: usize,
    pub graded: bool,
    pub cocycles: Vec<Cocycle>,
    pub unknowns: usize,
    pub cocycle_dim: usize,
    pub coboundary_dim: usize,
}

/// Coordinates of all cocycle unknowns.
struct Layout {
    slots: Vec<CocycleSlot>,
    offsets: Vec<usize>,
    at: HashMap<(usize, usize, usize), usize>,
    unknowns: usize,
}

impl Layout {
    fn new(m: &GradedModule, n: &GradedModule, roots: &[usize], graded: bool) -> Layout {
        let lie = &m.lie;
        let mut slots = Vec::new();
        let mut offsets = Vec::new();
        let mut at = HashMap::new();
        let mut u = 0;
        for &a in roots {
            let shift = lie.weight_of(a);
            for b in 0..m.n_blocks() {
                for t in targets(m, n, b, &shift, graded) {
                    let size = m.block_dim(b) * n.block_dim(t);
                    if size == 0 {
                        continue;
                    }
                    at.insert((a, b, t), slots.len());
                    slots.push(CocycleSlot { root: a, src: b, dst: t });
                    offsets.push(u);
                    u += size;
                }
            }
        }
        Layout { slots, offsets, at, unknowns: u }
    }

    fn slot(&self, a: usize, b: usize, t: usize) -> Option<usize> {
        self.at.get(&(a, b, t)).copied()
    }

    fn cocycle(&self, m: &GradedModule, n: &GradedModule, fp: Fp, v: &[u64]) -> Cocycle {
        let mut blocks = Vec::new();
        for (s, slot) in self.slots.iter().enumerate() {
            let (rows, cols) = (m.block_dim(slot.src), n.block_dim(slot.dst));
            let off = self.offsets[s];
            let mat = FMatrix::from_fn(fp, rows, cols, |r, c| fp.get(v, off + r * cols + c));
            if !mat.is_zero() {
                blocks.push((slot.clone(), mat));
            }
        }
        Cocycle { blocks }
    }
}

/// N-blocks compatible with M-block `b` shifted by `shift`.
fn targets(m: &GradedModule, n: &GradedModule, b: usize, shift: &crate::weyl::Weight, graded: bool) -> Vec<usize> {
    let lie = &m.lie;
    let want = m.key(b).shift(&lie.rd, lie.p, shift);
    if graded {
        n.block_of(&want).into_iter().collect()
    } else {
        (0..n.n_blocks()).filter(|&t| n.key(t).weight == want.weight).collect()
    }
}

/// Linear equations `sum A theta B = 0` for one (M-block, N-block) output, one row per entry.
struct EqBlock {
    rows: usize,
    cols: usize,
    eqs: Vec<Vec<(u32, u32)>>,
}

impl EqBlock {
    fn new(rows: usize, cols: usize) -> EqBlock {
        EqBlock { rows, cols, eqs: vec![Vec::new(); rows * cols] }
    }

    /// Add `coef * A * theta[slot] * B`; `None` stands for the identity.
    fn term(&mut self, fp: Fp, layout: &Layout, slot: usize, slot_shape: (usize, usize), a: Option<&FMatrix>, b: Option<&FMatrix>, coef: u32) {
        if coef == 0 {
            return;
        }
        let off = layout.offsets[slot];
        let (sr, sc) = slot_shape;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let row = &mut self.eqs[r * self.cols + c];
                for k in 0..sr {
                    let ak = match a {
                        Some(a) => a.get(r, k),
                        None => u32::from(k == r),
                    };
                    if ak == 0 {
                        continue;
                    }
                    for l in 0..sc {
                        let bl = match b {
                            Some(b) => b.get(l, c),
                            None => u32::from(l == c),
                        };
                        if bl == 0 {
                            continue;
                        }
                        row.push(((off + k * sc + l) as u32, fp.mul(coef, fp.mul(ak, bl))));
                    }
                }
            }
        }
    }
}

fn root_vectors(m: &GradedModule) -> Vec<usize> {
    (0..m.lie.dim()).filter(|&a| m.lie.is_root_vector(a)).collect()
}

/// Ext¹(M, N): extensions with sub N and quotient M.
pub fn ext1(m: &GradedModule, n: &GradedModule, graded: bool) -> Result<ExtSpace, ExtError> {
    ext1_with_budget(m, n, graded, DEFAULT_UNKNOWN_BUDGET)
}

pub fn ext1_with_budget(m: &GradedModule, n: &GradedModule, graded: bool, budget: usize) -> Result<ExtSpace, ExtError> {
    if !std::sync::Arc::ptr_eq(&m.lie, &n.lie) && (m.lie.rd.label() != n.lie.rd.label() || m.lie.p != n.lie.p) {
        return Err(ExtError::Incompatible);
    }
    if !m.is_full_support() || !n.is_full_support() {
        return Err(ExtError::Incompatible);
    }
    let lie = m.lie.clone();
    let fp = lie.fp;
    let p = lie.p;
    let roots = root_vectors(m);
    let layout = Layout::new(m, n, &roots, graded);
    let u = layout.unknowns;
    if u > budget.saturating_mul(SPARSE_FACTOR) {
        return Err(ExtError::Budget { unknowns: u, budget: budget.saturating_mul(SPARSE_FACTOR) });
    }
    let shape = |s: usize| (m.block_dim(layout.slots[s].src), n.block_dim(layout.slots[s].dst));
    let mut system = RowSpan::new(fp, u, budget);
    let flush = |groups: HashMap<usize, EqBlock>, system: &mut RowSpan| -> Result<(), ExtError> {
        for (_, g) in groups {
            for e in g.eqs {
                let e = normalize_sparse(fp, e);
                if !e.is_empty() {
                    system.add(e)?;
                }
            }
        }
        Ok(())
    };

    // brackets: theta([x,y]) = R_M(y) theta(x) + theta(y) R_N(x) - R_M(x) theta(y) - theta(x) R_N(y)
    for (ix, &x) in roots.iter().enumerate() {
        for &y in &roots[ix + 1..] {
            let br: Vec<(usize, u32)> = lie.bracket(x, y).iter().filter(|(z, _)| lie.is_root_vector(*z)).map(|&(z, c)| (z, fp.from_i64(c))).collect();
            let shift = lie.weight_of(x).add(&lie.weight_of(y));
            for b in 0..m.n_blocks() {
                if m.block_dim(b) == 0 {
                    continue;
                }
                let mut groups: HashMap<usize, EqBlock> = HashMap::new();
                for t in targets(m, n, b, &shift, graded) {
                    if n.block_dim(t) > 0 {
                        groups.insert(t, EqBlock::new(m.block_dim(b), n.block_dim(t)));
                    }
                }
                if groups.is_empty() {
                    continue;
                }
                // (first, second, sign): R_M(second) theta(first) and theta(second) R_N(first)
                for &(first, second, sign) in &[(x, y, 1u32), (y, x, p - 1)] {
                    if let Some((b2, am)) = m.block_action(second, b) {
                        for (&t, g) in groups.iter_mut() {
                            if let Some(s) = layout.slot(first, *b2, t) {
                                g.term(fp, &layout, s, shape(s), Some(am), None, sign);
                            }
                        }
                    }
                    for t_mid in targets(m, n, b, &lie.weight_of(second), graded) {
                        let Some(s) = layout.slot(second, b, t_mid) else { continue };
                        let Some((t, bn)) = n.block_action(first, t_mid) else { continue };
                        if let Some(g) = groups.get_mut(t) {
                            g.term(fp, &layout, s, shape(s), None, Some(bn), sign);
                        }
                    }
                }
                for &(z, c) in &br {
                    for (&t, g) in groups.iter_mut() {
                        if let Some(s) = layout.slot(z, b, t) {
                            g.term(fp, &layout, s, shape(s), None, None, fp.neg(c));
                        }
                    }
                }
                flush(groups, &mut system)?;
            }
        }
    }

    // p-powers: sum_i R_M(x)^i theta(x) R_N(x)^{p-1-i} = 0
    for &x in &roots {
        let shift = lie.weight_of(x).scale(p as i64);
        for b in 0..m.n_blocks() {
            if m.block_dim(b) == 0 {
                continue;
            }
            let mut groups: HashMap<usize, EqBlock> = HashMap::new();
            for t in targets(m, n, b, &shift, graded) {
                if n.block_dim(t) > 0 {
                    groups.insert(t, EqBlock::new(m.block_dim(b), n.block_dim(t)));
                }
            }
            if groups.is_empty() {
                continue;
            }
            for i in 0..p as usize {
                let left = if i == 0 { Some((b, None)) } else { m.compose(&vec![x; i], b).map(|(bi, a)| (bi, Some(a))) };
                let Some((bi, a)) = left else { continue };
                for t_mid in targets(m, n, bi, &lie.weight_of(x), graded) {
                    let Some(s) = layout.slot(x, bi, t_mid) else { continue };
                    let right = if i == p as usize - 1 { Some((t_mid, None)) } else { n.compose(&vec![x; p as usize - 1 - i], t_mid).map(|(t, r)| (t, Some(r))) };
                    let Some((t, r)) = right else { continue };
                    if let Some(g) = groups.get_mut(&t) {
                        g.term(fp, &layout, s, shape(s), a.as_ref(), r.as_ref(), 1);
                    }
                }
            }
            flush(groups, &mut system)?;
        }
    }

    // dim Z = u - rank(constraints); B embeds in Z
    let coboundary_rows = coboundary_space(m, n, &layout, &roots, graded, budget)?;
    let cocycle_dim = u - system.rank();
    let coboundary_dim = coboundary_rows.rank();
    let dim = cocycle_dim - coboundary_dim;
    if dim == 0 {
        return Ok(ExtSpace { dim, graded, cocycles: Vec::new(), unknowns: u, cocycle_dim, coboundary_dim });
    }
    if u > budget {
        return Err(ExtError::Budget { unknowns: u, budget });
    }
    let cocycles = system.into_subspace().annihilator();
    let coboundaries = coboundary_rows.into_subspace();
    debug_assert!(coboundaries.is_subspace_of(&cocycles));
    let mut quotient = coboundaries.clone();
    let mut reps = Vec::new();
    for i in 0..cocycles.dim() {
        let v = cocycles.basis().row_vec(i);
        if quotient.add_vector(&v) {
            reps.push(layout.cocycle(m, n, fp, &v));
        }
    }
    Ok(ExtSpace { dim: reps.len(), graded, cocycles: reps, unknowns: u, cocycle_dim: cocycles.dim(), coboundary_dim: coboundaries.dim() })
}

/// Span of `theta_f(x) = R_M(x) f - f R_N(x)` over degree-preserving linear maps f.
fn coboundary_space(m: &GradedModule, n: &GradedModule, layout: &Layout, roots: &[usize], graded: bool, budget: usize) -> Result<RowSpan, ExtError> {
    let fp = m.fp();
    let zero = crate::weyl::Weight::zero(m.lie.rank());
    let mut space = RowSpan::new(fp, layout.unknowns, budget);
    // M-blocks feeding each block under each root
    let mut preimages: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for &x in roots {
        for s in 0..m.n_blocks() {
            if let Some((b, _)) = m.block_action(x, s) {
                preimages.entry((x, *b)).or_default().push(s);
            }
        }
    }
    for b in 0..m.n_blocks() {
        for t in targets(m, n, b, &zero, graded) {
            for k in 0..m.block_dim(b) {
                for l in 0..n.block_dim(t) {
                    let mut v: SparseRow = Vec::new();
                    for &x in roots {
                        // R_M(x) f: sources s with x: s -> b, entry [r, l] += R[r, k]
                        for &s in preimages.get(&(x, b)).map(|v| v.as_slice()).unwrap_or(&[]) {
                            let (_, a) = m.block_action(x, s).expect("preimage");
                            if let Some(slot) = layout.slot(x, s, t) {
                                let cols = n.block_dim(t);
                                for r in 0..m.block_dim(s) {
                                    let c = a.get(r, k);
                                    if c != 0 {
                                        v.push(((layout.offsets[slot] + r * cols + l) as u32, c));
                                    }
                                }
                            }
                        }
                        // - f R_N(x): entry [k, c] -= R[l, c]
                        if let Some((t2, bn)) = n.block_action(x, t) {
                            if let Some(slot) = layout.slot(x, b, *t2) {
                                let cols = n.block_dim(*t2);
                                for c in 0..cols {
                                    let e = bn.get(l, c);
                                    if e != 0 {
                                        v.push(((layout.offsets[slot] + k * cols + c) as u32, fp.neg(e)));
                                    }
                                }
                            }
                        }
                    }
                    let v = normalize_sparse(fp, v);
                    if !v.is_empty() {
                        space.add(v)?;
                    }
                }
            }
        }
    }
    Ok(space)
}

/// Module `E` with submodule N (second summand) and quotient M, twisted by a graded cocycle.
pub fn assemble(m: &GradedModule, n: &GradedModule, theta: &Cocycle, label: &str) -> Result<GradedModule, ExtError> {
    let fp = m.fp();
    let base = m.direct_sum(n, label);
    let mut act: Vec<Vec<_>> = base.actions().to_vec();
    for (slot, mat) in &theta.blocks {
        let eb = base.block_of(m.key(slot.src)).expect("summand block");
        let et = base.block_of(n.key(slot.dst)).expect("summand block");
        let want = m.key(slot.src).shift(&m.lie.rd, m.lie.p, &m.lie.weight_of(slot.root));
        if &want != n.key(slot.dst) {
            return Err(ExtError::Ungraded);
        }
        let m_rows = m.block_of(base.key(et)).map_or(0, |b| m.block_dim(b));
        let entry = act[slot.root][eb].get_or_insert_with(|| (et, FMatrix::zeros(fp, base.block_dim(eb), base.block_dim(et))));
        debug_assert_eq!(entry.0, et);
        for r in 0..mat.rows() {
            for c in 0..mat.cols() {
                let v = mat.get(r, c);
                if v != 0 {
                    let cur = entry.1.get(r, m_rows + c);
                    entry.1.set(r, m_rows + c, fp.add(cur, v));
                }
            }
        }
    }
    Ok(GradedModule::from_blocks(
        m.lie.clone(),
        label.to_string(),
        base.keys().to_vec(),
        base.dims().to_vec(),
        act,
        base.support().to_vec(),
    ))
}

/// The copy of N inside an assembled extension.
pub fn assembled_sub(e: &GradedModule, m: &GradedModule) -> Submodule {
    let fp = e.fp();
    let spaces = (0..e.n_blocks())
        .map(|b| {
            let skip = m.block_of(e.key(b)).map_or(0, |mb| m.block_dim(mb));
            let rows: Vec<Vec<u64>> = (skip..e.block_dim(b))
                .map(|i| {
                    let mut v = fp.zero_row(e.block_dim(b));
                    fp.set(&mut v, i, 1);
                    v
                })
                .collect();
            Subspace::from_packed(fp, e.block_dim(b), rows)
        })
        .collect();
    Submodule { spaces }
}

/// Whether `0 -> sub -> e -> e/sub -> 0` splits: the identity of the quotient lifts
/// iff `dim Hom(Q, E) = dim Hom(Q, sub) + dim End(Q)`.
pub fn split_test(e: &GradedModule, sub: &Submodule) -> bool {
    let q = e.quotient(sub, "quotient");
    let s = e.submodule(sub, "sub");
    let into_e = hom_space(&q, e, None).len();
    let into_sub = hom_space(&q, &s, None).len();
    let end = hom_space(&q, &q, None).len();
    into_e == into_sub + end
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::Workbench;

    #[test]
    fn sl2_self_extension_is_the_projective_cover() {
        let wb = Workbench::from_label("A1", &[0], 3, 1).unwrap();
        let lam = wb.from_shifted(&[1]);
        let l = wb.simple(&lam).unwrap();
        let ext = ext1(&l, &l, true).unwrap();
        assert_eq!(ext.dim, 1);
        let e = assemble(&l, &l, &ext.cocycles[0], "E").unwrap();
        e.check_invariants().unwrap();
        assert!(!split_test(&e, &assembled_sub(&e, &l)));
        let q = wb.standard(&lam).unwrap();
        assert!(crate::modules::iso_test(&e, &q, None));
        let d = l.direct_sum(&l, "D");
        assert!(split_test(&d, &assembled_sub(&d, &l)));
    }

    #[test]
    fn sl2_steinberg_is_projective() {
        let wb = Workbench::from_label("A1", &[0], 5, 1).unwrap();
        let st = wb.simple(&wb.from_shifted(&[5])).unwrap();
        assert_eq!(ext1(&st, &st, true).unwrap().dim, 0);
        assert_eq!(ext1(&st, &st, false).unwrap().dim, 0);
    }
}
