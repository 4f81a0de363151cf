use std::collections::BTreeSet;

use gzlef::group::{class_product, compose, conjugacy_classes, generate_group, Perm};
use gzlef::props::{self, EvalMode, Statement};
use gzlef::FiniteGroup;
use proptest::prelude::*;

fn cycle(degree: usize, c: &[usize]) -> Perm {
    Perm::from_cycles(degree, &[c]).unwrap()
}

// Image chasing done by hand: apply p, then q.
fn chase(p: &[usize], q: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..p.len() {
        let mid = p[i];
        out.push(q[mid]);
    }
    out
}

#[test]
fn compose_matches_image_chasing() {
    let p = cycle(5, &[0, 1, 2, 3, 4]);
    let q = cycle(5, &[0, 1, 2]);
    let r = compose(&p, &q).unwrap();
    assert_eq!(r.images(), chase(p.images(), q.images()).as_slice());
    assert_eq!(r.images(), &[2, 0, 3, 4, 1]);
    let id = Perm::identity(5);
    assert_eq!(compose(&id, &p).unwrap(), p);
    assert!(compose(&p, &p.inverse()).unwrap().is_identity());
    assert!(compose(&p, &Perm::identity(4)).is_err());
}

#[test]
fn generated_orders() {
    assert_eq!(generate_group(&[cycle(5, &[0, 1, 2, 3, 4]), cycle(5, &[0, 1, 2])]).unwrap().order(), 60);
    assert_eq!(generate_group(&[Perm::identity(4)]).unwrap().order(), 1);
    assert_eq!(generate_group(&[cycle(2, &[0, 1])]).unwrap().order(), 2);
}

#[test]
fn class_tables() {
    let sizes = |name: &str| {
        let mut s = conjugacy_classes(&FiniteGroup::builtin(name).unwrap()).sizes();
        s.sort();
        s
    };
    assert_eq!(sizes("A5"), vec![1, 12, 12, 15, 20]);
    assert_eq!(sizes("S3"), vec![1, 2, 3]);
    let triv = generate_group(&[Perm::identity(3)]).unwrap();
    assert_eq!(conjugacy_classes(&triv).class_count(), 1);
}

#[test]
fn class_products_by_enumeration() {
    let g = FiniteGroup::builtin("A5").unwrap();
    let five: Vec<usize> = (0..g.classes().class_count()).filter(|&c| members_of(&g, c).len() == 12).collect();
    assert_eq!(five.len(), 2);
    let pairwise: BTreeSet<usize> = members_of(&g, five[0])
        .iter()
        .flat_map(|&a| members_of(&g, five[1]).into_iter().map(move |b| (a, b)))
        .map(|(a, b)| g.mul(a, b))
        .collect();
    assert_eq!(class_product(&g, five[0], five[1]), pairwise);
    let by_pred: BTreeSet<usize> =
        (0..g.order()).filter(|&x| g.class_product_contains(five[0], five[1], g.class_of(x))).collect();
    assert_eq!(by_pred, pairwise);

    let s3 = FiniteGroup::builtin("S3").unwrap();
    let trans = s3.class_of(s3.index_of(&cycle(3, &[0, 1])).unwrap());
    let expect: BTreeSet<usize> = (0..6).filter(|&x| s3.product(&[x, x, x]) == 0).collect();
    assert_eq!(expect.len(), 3);
    assert_eq!(class_product(&s3, trans, trans), expect);
    assert_eq!(class_product(&s3, s3.class_of(0), trans), members_of(&s3, trans));
}

fn members_of(g: &FiniteGroup, c: usize) -> BTreeSet<usize> {
    (0..g.order()).filter(|&x| g.class_of(x) == c).collect()
}

#[test]
fn a5_statements_hold_with_witness() {
    let g = FiniteGroup::builtin("A5").unwrap();
    for r in props::check_all(&g) {
        assert!(r.holds, "{:?}", r.property);
        assert!(props::verify_report(&g, &r));
    }
    let s4 = props::check(&g, Statement::S4);
    let w = s4.witness.unwrap();
    assert!(!props::xi(&g, w[0], w[1], w[2]));
}

#[test]
fn xi_counterexample() {
    let g = FiniteGroup::builtin("A5").unwrap();
    let u1 = g.index_of(&Perm::from_cycles(5, &[&[0, 1], &[2, 3]]).unwrap()).unwrap();
    let u2 = g.index_of(&cycle(5, &[0, 1, 2, 3, 4])).unwrap();
    assert!(!props::xi(&g, u1, u2, u2));
    assert!(!props::xi_search(&g, u1, u2, u2));
}

#[test]
fn xi_two_implementations_agree_on_reps() {
    let g = FiniteGroup::builtin("A5").unwrap();
    let reps = g.classes().representatives();
    for &a in &reps {
        for &b in &reps {
            for &c in &reps {
                assert_eq!(props::xi(&g, a, b, c), props::xi_search(&g, a, b, c));
            }
        }
    }
}

#[test]
fn abelian_fails_s1() {
    let z3 = FiniteGroup::builtin("Z3").unwrap();
    let r = props::check(&z3, Statement::S1);
    assert!(!r.holds);
    assert!(props::solve_s1(&z3, 1, 1).is_err());
    assert_eq!(props::solve_s1(&z3, 1, 2).map(|_| ()), Ok(()));
}

#[test]
fn s3_class_reduction_matches_raw_loops() {
    for name in ["S3", "A4"] {
        let g = FiniteGroup::builtin(name).unwrap();
        let fast = props::check_with(&g, Statement::S3, EvalMode::Reduced);
        let raw = props::check_s3_raw(&g);
        assert_eq!(fast.holds, raw.holds, "{}", name);
        assert_eq!(props::check_with(&g, Statement::S3, EvalMode::Raw).holds, raw.holds);
    }
}

#[test]
fn s3_solver_total_on_a5_reps() {
    let g = FiniteGroup::builtin("A5").unwrap();
    let reps = g.classes().representatives();
    for &u1 in &reps[1..] {
        for &u2 in &reps[1..] {
            for &u3 in &reps[1..] {
                for u4 in 1..g.order() {
                    let (x, y, z) = props::solve_s3(&g, u1, u2, u3, u4).unwrap();
                    assert_eq!(g.product(&[g.conj(u1, x), g.conj(u2, y), g.conj(u3, z)]), u4);
                }
            }
        }
    }
}

fn a5() -> &'static FiniteGroup {
    use std::sync::OnceLock;
    static G: OnceLock<FiniteGroup> = OnceLock::new();
    G.get_or_init(|| FiniteGroup::builtin("A5").unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compose_associative(p in 0usize..60, q in 0usize..60, r in 0usize..60) {
        let g = a5();
        let (p, q, r) = (g.element(p), g.element(q), g.element(r));
        prop_assert_eq!(compose(&compose(p, q).unwrap(), r).unwrap(), compose(p, &compose(q, r).unwrap()).unwrap());
    }

    #[test]
    fn same_class_has_conjugator(a in 0usize..60, x in 0usize..60) {
        let g = a5();
        let b = g.conj(a, x);
        prop_assert_eq!(g.class_of(a), g.class_of(b));
        prop_assert!((0..60).any(|y| g.conj(a, y) == b));
    }

    #[test]
    fn xi_conjugation_invariant(u in (1usize..60, 1usize..60, 1usize..60), c in (0usize..60, 0usize..60, 0usize..60)) {
        let g = a5();
        prop_assert_eq!(props::xi(g, u.0, u.1, u.2), props::xi(g, g.conj(u.0, c.0), g.conj(u.1, c.1), g.conj(u.2, c.2)));
    }

    #[test]
    fn xi_trivial_solution(u1 in 0usize..60, u2 in 0usize..60) {
        let g = a5();
        prop_assert!(props::xi(g, u1, u2, g.mul(g.inv(u2), g.inv(u1))));
    }

    #[test]
    fn s1_solutions_verify(a1 in 1usize..60, a2 in 0usize..60) {
        let g = a5();
        let (x, y) = props::solve_s1(g, a1, a2).unwrap();
        prop_assert_eq!(g.product(&[g.inv(x), g.inv(a1), y, x, g.inv(y)]), a2);
    }

    #[test]
    fn s2_solutions_verify(a1 in 0usize..60, a2 in 0usize..60, a3 in 0usize..60) {
        let g = a5();
        let (z, u, v) = props::solve_s2(g, a1, a2, a3).unwrap();
        prop_assert_eq!(a1, g.product(&[g.inv(a3), z, a3, u]));
        prop_assert_eq!(a2, g.product(&[g.inv(z), v, g.inv(u), g.inv(v)]));
        // the unmodified shape
        prop_assert_eq!(a2, g.product(&[a3, u, g.inv(a1), g.inv(a3), v, g.inv(u), g.inv(v)]));
    }

    #[test]
    fn s3_solutions_verify(u1 in 1usize..60, u2 in 1usize..60, u3 in 1usize..60, u4 in 1usize..60) {
        let g = a5();
        let (x, y, z) = props::solve_s3(g, u1, u2, u3, u4).unwrap();
        prop_assert_eq!(g.product(&[g.conj(u1, x), g.conj(u2, y), g.conj(u3, z)]), u4);
    }
}
