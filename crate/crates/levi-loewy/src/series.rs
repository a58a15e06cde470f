//! Composition factors (graded MeatAxe), socle and radical series, Loewy
//! layers, simple identification, quasi-simple filtrations and structure diagrams.

use crate::ffla::{seeded_rng, FMatrix, Subspace};
use crate::modules::{hom_space, image, iso_test, GradedModule, ModuleError, Morphism, Submodule, Workbench};
use crate::weyl::Weight;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("layer of dimension {dim} is not covered by its simples (covered {covered})")]
    IncompleteSimples { dim: usize, covered: usize },
    #[error("irreducibility could not be certified over F_p: {0}")]
    SplitFieldNeeded(String),
    #[error("simple module could not be identified: {0}")]
    Unidentified(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Multiplicities of graded simples, keyed by linkage representative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub dim: usize,
    pub factors: Vec<(Weight, usize)>,
}

impl Layer {
    pub fn total(&self) -> usize {
        self.factors.iter().map(|(_, m)| m).sum()
    }
    pub fn multiplicity(&self, w: &Weight) -> usize {
        self.factors.iter().find(|(x, _)| x == w).map_or(0, |(_, m)| *m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoewyReport {
    pub dim: usize,
    /// radical layers from the head down
    pub radical: Vec<Layer>,
    /// socle layers from the socle up
    pub socle: Vec<Layer>,
    pub loewy_length: usize,
    /// radical and socle series coincide
    pub rigid: bool,
}

/// Weights attached to the highest-vector blocks of `m`, one per linkage class.
pub fn simple_candidates(wb: &Workbench, m: &GradedModule) -> Vec<Weight> {
    let rd = wb.rd();
    let p = wb.p();
    let mut out: Vec<Weight> = Vec::new();
    for b in 0..m.n_blocks() {
        if m.block_dim(b) == 0 || m.highest_vectors(b).dim() == 0 {
            continue;
        }
        if let Some(l) = m.key(b).lift(rd, p) {
            let rep = rd.linkage_rep(&l, p);
            if !out.contains(&rep) {
                out.push(rep);
            }
        }
    }
    out.sort();
    out
}

/// Sum of all simple submodules.
pub fn socle(wb: &Workbench, m: &GradedModule) -> Result<Submodule> {
    let mut s = m.zero_submodule();
    for lam in simple_candidates(wb, m) {
        let l = wb.simple(&lam)?;
        for f in hom_space(&l, m, None) {
            s = s.sum(&image(m, &f));
        }
    }
    Ok(s)
}

/// Smallest submodule with semisimple quotient: the annihilator of the socle of the twisted dual.
pub fn radical(wb: &Workbench, m: &GradedModule) -> Result<Submodule> {
    Ok(socle(wb, &m.tau_dual())?.annihilator())
}

/// `soc^1 M ⊂ soc^2 M ⊂ ... ⊂ M`.
pub fn socle_series(wb: &Workbench, m: &GradedModule) -> Result<Vec<Submodule>> {
    let mut out = Vec::new();
    let mut cur = m.zero_submodule();
    while cur.dim() < m.dim() {
        let q = m.quotient(&cur, "q");
        let s = socle(wb, &q)?;
        if s.is_zero() {
            return Err(SeriesError::IncompleteSimples { dim: q.dim(), covered: 0 });
        }
        cur = m.preimage(&cur, &s);
        out.push(cur.clone());
    }
    Ok(out)
}

/// `M ⊃ rad M ⊃ rad^2 M ⊃ ... ⊃ 0`, via annihilators of the socle series of the twisted dual.
pub fn radical_series(wb: &Workbench, m: &GradedModule) -> Result<Vec<Submodule>> {
    let soc = socle_series(wb, &m.tau_dual())?;
    let mut out = vec![m.full_submodule()];
    out.extend(soc.iter().map(|s| s.annihilator()));
    Ok(out)
}

/// Radical series computed directly by iterating the radical on submodules.
pub fn radical_series_direct(wb: &Workbench, m: &GradedModule) -> Result<Vec<Submodule>> {
    let mut out = vec![m.full_submodule()];
    let mut cur = m.full_submodule();
    while !cur.is_zero() {
        let sub = m.submodule(&cur, "r");
        let r = radical(wb, &sub)?;
        cur = m.embed(&cur, &r);
        out.push(cur.clone());
    }
    Ok(out)
}

/// `upper / lower` for submodules `lower ⊂ upper` of `m`.
pub fn subquotient(m: &GradedModule, upper: &Submodule, lower: &Submodule, label: &str) -> GradedModule {
    let sub = m.submodule(upper, label);
    let fp = m.fp();
    let inner = Submodule {
        spaces: (0..m.n_blocks())
            .map(|b| {
                let rows: Vec<Vec<u64>> = (0..lower.spaces[b].dim()).map(|i| fp.pack(&upper.spaces[b].coords(lower.spaces[b].basis().row(i)))).collect();
                Subspace::from_packed(fp, upper.spaces[b].dim(), rows)
            })
            .collect(),
    };
    sub.quotient(&inner, label)
}

/// Multiplicities of the simples in a semisimple module.
pub fn semisimple_layer(wb: &Workbench, layer: &GradedModule) -> Result<Layer> {
    let mut factors = Vec::new();
    let mut covered = 0;
    for lam in simple_candidates(wb, layer) {
        let l = wb.simple(&lam)?;
        let mult = hom_space(&l, layer, None).len();
        if mult > 0 {
            covered += mult * l.dim();
            factors.push((lam, mult));
        }
    }
    if covered != layer.dim() {
        return Err(SeriesError::IncompleteSimples { dim: layer.dim(), covered });
    }
    Ok(Layer { dim: layer.dim(), factors })
}

fn layers_of(wb: &Workbench, m: &GradedModule, chain: &[Submodule], descending: bool) -> Result<Vec<Layer>> {
    let mut out = Vec::new();
    for w in chain.windows(2) {
        let (upper, lower) = if descending { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
        out.push(semisimple_layer(wb, &subquotient(m, upper, lower, "layer"))?);
    }
    Ok(out)
}

/// Radical and socle series with identified layers.
pub fn loewy(wb: &Workbench, m: &GradedModule) -> Result<LoewyReport> {
    let rad = radical_series(wb, m)?;
    let soc = socle_series(wb, m)?;
    let mut soc_chain = vec![m.zero_submodule()];
    soc_chain.extend(soc.iter().cloned());
    let radical = layers_of(wb, m, &rad, true)?;
    let socle = layers_of(wb, m, &soc_chain, false)?;
    let n = soc.len();
    let rigid = rad.len() == n + 1 && (0..=n).all(|j| rad[n - j] == soc_chain[j]);
    Ok(LoewyReport { dim: m.dim(), loewy_length: n, radical, socle, rigid })
}

pub fn loewy_length(wb: &Workbench, m: &GradedModule) -> Result<usize> {
    Ok(socle_series(wb, m)?.len())
}

// ---- MeatAxe ------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ChopResult {
    /// (linkage representative, multiplicity, dimension of the simple)
    pub factors: Vec<(Weight, usize, usize)>,
    /// irreducible factors in the order found
    pub modules: Vec<GradedModule>,
}

impl ChopResult {
    pub fn multiplicity(&self, w: &Weight) -> usize {
        self.factors.iter().find(|(x, _, _)| x == w).map_or(0, |f| f.1)
    }
    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, m, d)| m * d).sum()
    }
}

/// A proper nonzero submodule, or `None` with a certificate that `m` is irreducible.
pub fn split(m: &GradedModule, seed: u64) -> Result<Option<Submodule>> {
    let fp = m.fp();
    let dim = m.dim();
    let Some(k) = (0..m.n_blocks()).filter(|&b| m.block_dim(b) > 0).min_by_key(|&b| (m.block_dim(b), m.key(b).clone())) else {
        return Ok(None);
    };
    let dk = m.block_dim(k);
    let dual = m.tau_dual();
    let test = |v: Vec<u64>, w: Vec<u64>| -> Option<Option<Submodule>> {
        let s = m.spin(&[(k, v)]);
        if s.dim() < dim {
            return Some(Some(s));
        }
        let t = dual.spin(&[(k, w)]);
        if t.dim() < dim {
            return Some(Some(t.annihilator()));
        }
        // both spins are everything: Norton's criterion certifies irreducibility
        Some(None)
    };
    if dk == 1 {
        let e = fp.pack(&[1]);
        return Ok(test(e.clone(), e).unwrap());
    }
    let roots: Vec<usize> = (0..m.lie.dim()).filter(|&a| m.lie.is_root_vector(a) && m.support()[a]).collect();
    let mut rng = seeded_rng(seed);
    for _attempt in 0..64 {
        // a random element of the algebra preserving block k
        let mut acc = FMatrix::zeros(fp, dk, dk);
        for _ in 0..4 {
            let len = rng.gen_range(1..=3);
            let mut word: Vec<usize> = (0..len).map(|_| *roots.choose(&mut rng).unwrap()).collect();
            let mut back: Vec<usize> = word.iter().map(|&a| opposite(m, a)).collect();
            back.shuffle(&mut rng);
            word.extend(back);
            if let Some((t, mat)) = m.compose(&word, k) {
                if t == k {
                    acc = acc.lin(&mat, rng.gen_range(1..fp.p()));
                }
            }
        }
        for c in 0..fp.p() {
            let a = acc.add_scalar_identity(fp.neg(c));
            let left = a.left_nullspace();
            if left.dim() == 0 {
                continue;
            }
            if left.dim() > 1 {
                let s = m.spin(&[(k, left.basis().row_vec(0))]);
                if s.dim() < dim {
                    return Ok(Some(s));
                }
                continue;
            }
            let right = a.nullspace();
            return Ok(test(left.basis().row_vec(0), right.basis().row_vec(0)).unwrap());
        }
    }
    Err(SeriesError::SplitFieldNeeded(format!("{}: no kernel of nullity one on a block of dimension {dk}", m.label)))
}

fn opposite(m: &GradedModule, a: usize) -> usize {
    let lie = &m.lie;
    match lie.kind(a) {
        crate::chevalley::BasisKind::Pos(k) => lie.neg(k),
        crate::chevalley::BasisKind::Neg(k) => lie.pos(k),
        _ => a,
    }
}

/// Full composition series by repeated splitting, with every factor identified.
pub fn chop(wb: &Workbench, m: &GradedModule, seed: u64) -> Result<ChopResult> {
    let mut stack = vec![m.compact()];
    let mut modules = Vec::new();
    let mut round = 0u64;
    while let Some(x) = stack.pop() {
        if x.dim() == 0 {
            continue;
        }
        round += 1;
        match split(&x, seed.wrapping_add(round))? {
            Some(s) => {
                stack.push(x.submodule(&s, "sub").compact());
                stack.push(x.quotient(&s, "quo").compact());
            }
            None => modules.push(x),
        }
    }
    let mut factors: Vec<(Weight, usize, usize)> = Vec::new();
    for l in &modules {
        let w = identify_simple(wb, l)?;
        match factors.iter_mut().find(|f| f.0 == w) {
            Some(f) => f.1 += 1,
            None => factors.push((w, 1, l.dim())),
        }
    }
    factors.sort();
    Ok(ChopResult { factors, modules })
}

/// Linkage representative of the highest weight of a graded simple module.
pub fn identify_simple(wb: &Workbench, l: &GradedModule) -> Result<Weight> {
    let cands = simple_candidates(wb, l);
    for c in &cands {
        let s = wb.simple(c)?;
        if s.dim() == l.dim() && iso_test(&s, l, None) {
            return Ok(c.clone());
        }
    }
    Err(SeriesError::Unidentified(format!("{} (candidates {:?})", l.label, cands)))
}

// ---- quasi-simple filtrations ---------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationReport {
    pub found: bool,
    /// factor weights from the bottom up
    pub order: Vec<Weight>,
    pub note: String,
}

/// Search for a chain of submodules whose subquotients are the given quasi-simples,
/// peeling an embedded copy off the bottom at each step.
pub fn l_filtration_verify(wb: &Workbench, m: &GradedModule, expected: &[(Weight, GradedModule)]) -> Result<FiltrationReport> {
    let total: usize = expected.iter().map(|(_, q)| q.dim()).sum();
    if total != m.dim() {
        return Ok(FiltrationReport { found: false, order: vec![], note: format!("dimensions differ: {} expected, {} present", total, m.dim()) });
    }
    let rd = wb.rd();
    let mut items: Vec<usize> = (0..expected.len()).collect();
    // smaller degrees first
    items.sort_by(|&a, &b| {
        let (da, db) = (rd.degree_class(&expected[a].0), rd.degree_class(&expected[b].0));
        match rd.order_cmp(&da, &db) {
            Some(Ordering::Less) => Ordering::Greater,
            Some(Ordering::Greater) => Ordering::Less,
            _ => expected[a].0.cmp(&expected[b].0),
        }
    });
    let mut order = Vec::new();
    let found = peel(wb, m, expected, &items, &mut order, 0)?;
    let note = if found { "filtration found".into() } else { "no ordering of the expected factors embeds".into() };
    Ok(FiltrationReport { found, order, note })
}

fn peel(wb: &Workbench, q: &GradedModule, expected: &[(Weight, GradedModule)], remaining: &[usize], order: &mut Vec<Weight>, depth: usize) -> Result<bool> {
    if remaining.is_empty() {
        return Ok(q.dim() == 0);
    }
    let mut tried: Vec<&Weight> = Vec::new();
    for (pos, &i) in remaining.iter().enumerate() {
        let (w, l) = &expected[i];
        if tried.contains(&w) {
            continue;
        }
        tried.push(w);
        let homs = hom_space(l, q, None);
        let Some(f) = crate::modules::find_morphism(&homs, wb.seed ^ depth as u64, 16, |f| is_injective(l, f)) else { continue };
        let im = image(q, &f);
        let next = q.quotient(&im, "peel").compact();
        order.push(w.clone());
        let rest: Vec<usize> = remaining.iter().enumerate().filter(|&(k, _)| k != pos).map(|(_, &x)| x).collect();
        if peel(wb, &next, expected, &rest, order, depth + 1)? {
            return Ok(true);
        }
        order.pop();
    }
    Ok(false)
}

pub fn is_injective(m: &GradedModule, f: &Morphism) -> bool {
    (0..m.n_blocks()).all(|b| {
        let d = m.block_dim(b);
        d == 0 || f.maps[b].as_ref().is_some_and(|(_, x)| x.rank() == d)
    })
}

// ---- diagrams ---------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagram {
    pub layers: Vec<Vec<String>>,
    /// (layer, index, layer + 1, index)
    pub edges: Vec<(usize, usize, usize, usize)>,
}

/// Radical layers as named factors, with an edge wherever a length-two subquotient is non-split.
pub fn diagram(wb: &Workbench, m: &GradedModule, name: &dyn Fn(&Weight) -> String) -> Result<Diagram> {
    let rad = radical_series(wb, m)?;
    let layers = layers_of(wb, m, &rad, true)?;
    let mut names: Vec<Vec<String>> = Vec::new();
    let mut ids: Vec<Vec<Weight>> = Vec::new();
    for l in &layers {
        let mut row = Vec::new();
        let mut wrow = Vec::new();
        for (w, mult) in &l.factors {
            for _ in 0..*mult {
                row.push(name(w));
                wrow.push(w.clone());
            }
        }
        names.push(row);
        ids.push(wrow);
    }
    let mut edges = Vec::new();
    for j in 0..layers.len().saturating_sub(1) {
        let n = subquotient(m, &rad[j], &rad[j + 2], "pair");
        let r = relative(m, &rad[j], &rad[j + 2], &rad[j + 1]);
        for (ia, a) in ids[j].iter().enumerate() {
            for (ib, bw) in ids[j + 1].iter().enumerate() {
                if witness(wb, &n, &r, a, bw)? {
                    edges.push((j, ia, j + 1, ib));
                }
            }
        }
    }
    Ok(Diagram { layers: names, edges })
}

/// `mid / lower` as a submodule of `upper / lower`.
fn relative(m: &GradedModule, upper: &Submodule, lower: &Submodule, mid: &Submodule) -> Submodule {
    let fp = m.fp();
    let in_upper = |s: &Submodule, b: usize| -> Vec<Vec<u64>> { (0..s.spaces[b].dim()).map(|i| fp.pack(&upper.spaces[b].coords(s.spaces[b].basis().row(i)))).collect() };
    Submodule {
        spaces: (0..m.n_blocks())
            .map(|b| {
                let low = Subspace::from_packed(fp, upper.spaces[b].dim(), in_upper(lower, b));
                let comp = low.complement_coords();
                let rows = in_upper(mid, b)
                    .into_iter()
                    .map(|mut c| {
                        low.reduce(&mut c);
                        let mut v = fp.zero_row(comp.len());
                        for (k, &x) in comp.iter().enumerate() {
                            fp.set(&mut v, k, fp.get(&c, x));
                        }
                        v
                    })
                    .collect();
                Subspace::from_packed(fp, comp.len(), rows)
            })
            .collect(),
    }
}

/// Is there a non-split extension of `a` by `b` inside `n` (Loewy length two, radical `r`)?
fn witness(wb: &Workbench, n: &GradedModule, r: &Submodule, a: &Weight, b: &Weight) -> Result<bool> {
    // kill the part of the radical not isotypic of type b
    let mut others = n.zero_submodule();
    let rmod = n.submodule(r, "rad");
    for c in simple_candidates(wb, &rmod) {
        if &c == b {
            continue;
        }
        let l = wb.simple(&c)?;
        for f in hom_space(&l, &rmod, None) {
            others = others.sum(&n.embed(r, &image(&rmod, &f)));
        }
    }
    let nb = n.quotient(&others, "nb");
    let rb = n.project(&others, r);
    let la = wb.simple(a)?;
    let key = crate::modules::Key::of_weight(wb.rd(), wb.p(), a);
    let Some(blk) = nb.block_of(&key) else { return Ok(false) };
    let h = nb.highest_vectors(blk);
    for i in 0..h.dim() {
        let v = h.basis().row_vec(i);
        if rb.spaces[blk].contains(&v) {
            continue;
        }
        let s = nb.spin(&[(blk, v)]);
        if s.dim() > la.dim() {
            return Ok(true);
        }
    }
    Ok(false)
}

impl Diagram {
    pub fn ascii(&self) -> String {
        let width = self.layers.iter().map(|l| l.join("  ").len()).max().unwrap_or(0);
        let mut s = String::new();
        for l in &self.layers {
            let row = l.join("  ");
            let pad = (width - row.len()) / 2;
            let _ = writeln!(s, "{}{}", " ".repeat(pad), row);
        }
        s
    }

    pub fn dot(&self) -> String {
        let mut s = String::from("digraph loewy {\n  rankdir=TB;\n");
        for (j, l) in self.layers.iter().enumerate() {
            for (i, n) in l.iter().enumerate() {
                let _ = writeln!(s, "  n{j}_{i} [label=\"{n}\"];");
            }
        }
        for (j, i, k, l) in &self.edges {
            let _ = writeln!(s, "  n{j}_{i} -> n{k}_{l};");
        }
        s.push_str("}\n");
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("diagram serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_simple_verma() {
        let wb = Workbench::from_label("A1", &[0], 5, 7).unwrap();
        let z = wb.baby_verma(&Weight(vec![1])).unwrap();
        let c = chop(&wb, &z, 1).unwrap();
        assert_eq!(c.factors.len(), 1);
        assert_eq!(loewy_length(&wb, &z).unwrap(), 1);
    }

    #[test]
    fn direct_sum_multiplicity() {
        let wb = Workbench::from_label("A1", &[0], 3, 7).unwrap();
        let l = wb.simple(&Weight(vec![0])).unwrap();
        let s = l.direct_sum(&l, "LL");
        let c = chop(&wb, &s, 3).unwrap();
        assert_eq!(c.factors, vec![(wb.linkage_rep(&Weight(vec![0])), 2, 3)]);
        assert_eq!(loewy_length(&wb, &s).unwrap(), 1);
    }
}
