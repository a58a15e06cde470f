mod common;

use common::*;

#[test]
fn sl2_p3_agrees_with_lattice_oracle() {
    let (checked, bad) = sl2_oracle_sweep(3);
    assert_eq!(checked, 15);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn sl2_p5_agrees_with_lattice_oracle() {
    let (checked, bad) = sl2_oracle_sweep(5);
    assert_eq!(checked, 25);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn sl2_restricted_vermas_agree_with_lattice_oracle() {
    // chi = 0: baby Verma modules have two composition factors off the Steinberg weight
    for p in [3, 5] {
        for shifted in 1..=p as i64 {
            let s = session("A1", "none", p, &[shifted]);
            for kind in [levi_loewy::harness::ModuleKind::Verma, levi_loewy::harness::ModuleKind::TwistedVerma] {
                let m = s.module(kind).unwrap();
                let bad = oracle_disagreements(&s, &m);
                assert!(bad.is_empty(), "p={p} lambda+rho={shifted}: {bad:?}");
            }
        }
    }
}

#[test]
fn rref_is_canonical() {
    let a = rref(5, vec![vec![2, 4, 0], vec![1, 2, 3]]);
    let b = rref(5, vec![vec![1, 2, 3], vec![3, 1, 0]]);
    assert_eq!(a, vec![vec![1, 2, 0], vec![0, 0, 1]]);
    assert_eq!(b.len(), 2);
    assert!(contains(5, &b, &vec![vec![4, 3, 2]]));
}
