use std::sync::{Arc, OnceLock};

use gzlef::gz_norm::{verify_geodesic, verify_kq_almost_hom, FormulaMode, GzNorm};
use gzlef::oracle::{
    bfs_norms, bounded_norm, enumerate_sbar, read_binary, set_power_norms, write_binary, BfsConfig, BfsTable,
};
use gzlef::sample::{self, rng};
use gzlef::{FiniteGroup, Lamp, LampElem, Perm, Rational};
use proptest::prelude::*;
use rand::Rng;

fn a5() -> &'static GzNorm {
    static G: OnceLock<GzNorm> = OnceLock::new();
    G.get_or_init(|| GzNorm::new(Arc::new(FiniteGroup::builtin("A5").unwrap())).unwrap())
}

fn a5_table() -> &'static (Lamp, BfsTable) {
    static T: OnceLock<(Lamp, BfsTable)> = OnceLock::new();
    T.get_or_init(|| {
        let l = a5().truncated_lamp(1).unwrap();
        let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
        (l, t)
    })
}

fn random_elem(l: &Lamp, g: &mut sample::SampleRng) -> LampElem {
    let w = g.gen_range(0..6);
    sample::element(l, g, w, -5, 5, 4)
}

#[test]
fn norm_examples() {
    let g = a5();
    let l = g.lamp();
    let b = l.base();
    let u = b.index_of(&Perm::from_cycles(5, &[&[0, 1], &[2, 3]]).unwrap()).unwrap();
    let c = b.index_of(&Perm::from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap()).unwrap();
    assert_eq!(g.norm(&l.t_pow(-4)).unwrap(), 4);
    assert_eq!(g.norm(&l.elem(0, [(-2, u), (0, c), (3, c)])).unwrap(), 3);
    assert_eq!(g.norm(&l.elem(0, [(-2, u), (9, c)])).unwrap(), 2);
    assert_eq!(g.norm(&l.elem(0, [(0, c), (1, b.inv(c))])).unwrap(), 2);
    assert_eq!(g.norm(&l.elem(1, [(0, c), (1, b.inv(c))])).unwrap(), 1);
    assert_eq!(g.norm(&l.elem(1, [(0, c), (4, c)])).unwrap(), 2);
    assert_eq!(g.norm(&l.elem(-3, [(0, c), (4, c), (7, u)])).unwrap(), 3);
    assert!(g.norm(&a5_table().0.t()).is_err());
}

#[test]
fn strict_context_rejects_s3() {
    let s3 = Arc::new(FiniteGroup::builtin("S3").unwrap());
    assert!(GzNorm::new(s3.clone()).is_err());
    let adv = GzNorm::advisory(s3);
    let l = adv.truncated_lamp(5).unwrap();
    assert_eq!(adv.norm_truncated(&l.t()).unwrap().mode, FormulaMode::Advisory);
}

#[test]
fn random_geodesics_verify() {
    let g = a5();
    let l = g.lamp();
    let mut r = rng(21);
    for _ in 0..1000 {
        let x = random_elem(l, &mut r);
        let geo = g.geodesic(&x).unwrap();
        assert!(verify_geodesic(l, &x, &geo, g.norm(&x).unwrap()), "{:?}", x);
    }
}

#[test]
fn a5_formula_matches_bfs() {
    let (l, t) = a5_table();
    assert_eq!(t.summary.states, 648_000);
    assert_eq!(t.summary.layer_sizes.iter().sum::<u64>(), 648_000);
    let ctx = a5();
    for c in 0..t.code.states() {
        let x = t.code.decode(l, c);
        assert_eq!(ctx.norm_truncated(&x).unwrap().value, t.dist[c as usize] as u64, "{:?}", x);
    }
}

#[test]
fn bfs_matches_set_powers_and_is_deterministic() {
    for (name, n) in [("S3", 1), ("Z3", 1), ("A4", 1)] {
        let p = Arc::new(FiniteGroup::builtin(name).unwrap());
        let l = Lamp::truncated(p, n).unwrap();
        let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
        let top = bfs_norms(&l, &BfsConfig { direction_optimizing: false, ..Default::default() }).unwrap();
        assert_eq!(t.dist, top.dist);
        assert_eq!(t.summary.layer_sizes, top.summary.layer_sizes);
        if name == "A4" {
            continue;
        }
        let powers = set_power_norms(&l, 1 << 20).unwrap();
        assert_eq!(powers.len() as u64, t.code.states());
        for (x, d) in powers {
            assert_eq!(t.distance(&t.code, &x) as u32, d);
        }
    }
}

#[test]
fn bounded_search_agrees() {
    let p = Arc::new(FiniteGroup::builtin("S3").unwrap());
    let l = Lamp::truncated(p, 1).unwrap();
    let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
    let sbar = enumerate_sbar(&l).unwrap();
    for c in 0..t.code.states() {
        let x = t.code.decode(&l, c);
        assert_eq!(bounded_norm(&l, &sbar, &x, 3).unwrap(), Some(t.dist[c as usize] as u32));
    }

    let (l, t) = a5_table();
    let sbar = enumerate_sbar(l).unwrap();
    let mut r = rng(8);
    for _ in 0..1000 {
        let c = r.gen_range(0..t.code.states());
        let x = t.code.decode(l, c);
        let d = t.dist[c as usize] as u32;
        assert_eq!(bounded_norm(l, &sbar, &x, 2).unwrap(), (d <= 2).then_some(d));
    }
    assert!(bounded_norm(l, &sbar, &l.t(), 4).is_err());
}

#[test]
fn binary_table_round_trip() {
    let l = Lamp::truncated(Arc::new(FiniteGroup::builtin("S3").unwrap()), 1).unwrap();
    let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_binary(&t, &mut buf).unwrap();
    assert_eq!(buf.len(), 32 + 648);
    let (code, diam, dist) = read_binary(buf.as_slice()).unwrap();
    assert_eq!((code.n, code.order, diam as u32), (1, 6, t.summary.diameter));
    assert_eq!(dist, t.dist);
    buf.truncate(100);
    assert!(read_binary(buf.as_slice()).is_err());
}

#[test]
fn phi_on_random_sets() {
    let g = a5();
    let l = g.lamp();
    let mut r = rng(31);
    for _ in 0..40 {
        let mut k = vec![l.identity()];
        for _ in 0..4 {
            let x = random_elem(l, &mut r);
            k.push(l.inverse(&x));
            k.push(x);
        }
        let extra: Vec<LampElem> = k.iter().take(5).flat_map(|a| k.iter().take(5).map(move |b| (a, b))).map(|(a, b)| l.mul(a, b)).collect();
        k.extend(extra);
        k.sort_by_key(|x| format!("{:?}", x));
        k.dedup();
        let q: Vec<Rational> = (0..6).map(|i| Rational::new(i, 2)).collect();
        let rep = g.verify_phi(&k, &q).unwrap();
        assert!(rep.ok, "{:?}", rep.failures);
        assert!(rep.triples_checked > 0);
    }
}

#[test]
fn undersized_window_breaks_the_norm() {
    let g = a5();
    let l = g.lamp();
    for big_n in 2..6i64 {
        let k = vec![l.identity(), l.t_pow(big_n)];
        let q = vec![Rational::from_integer(0), Rational::from_integer(big_n - 1)];
        let ok_rep = g.verify_phi(&k, &q).unwrap();
        assert!(ok_rep.ok);
        let small = g.truncated_lamp(big_n - 1).unwrap();
        let rep = verify_kq_almost_hom(
            &k,
            &q,
            |x| l.reinterpret(x, &small),
            |x| g.norm(x).unwrap(),
            |x| g.norm_truncated(x).unwrap().value,
            |a, b| l.mul(a, b),
            |a, b| small.mul(a, b),
        );
        assert!(!rep.ok);
        assert!(rep.norm_agreements.iter().any(|a| !a.agree && a.q == (big_n - 1).to_string()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shift_is_a_lower_bound(seed in any::<u64>()) {
        let g = a5();
        let x = random_elem(g.lamp(), &mut rng(seed));
        prop_assert!(g.norm(&x).unwrap() >= x.shift.unsigned_abs());
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let g = a5();
        let l = g.lamp();
        let mut r = rng(seed);
        let (a, b) = (random_elem(l, &mut r), random_elem(l, &mut r));
        prop_assert!(g.norm(&l.mul(&a, &b)).unwrap() <= g.norm(&a).unwrap() + g.norm(&b).unwrap());
        prop_assert_eq!(g.norm(&l.inverse(&a)).unwrap(), g.norm(&a).unwrap());
    }

    #[test]
    fn conjugation_invariance(seed in any::<u64>()) {
        let g = a5();
        let l = g.lamp();
        let mut r = rng(seed);
        let (x, y) = (random_elem(l, &mut r), random_elem(l, &mut r));
        prop_assert_eq!(g.norm(&l.conjugate(&x, &y)).unwrap(), g.norm(&x).unwrap());
    }

    #[test]
    fn geodesic_length_is_norm(seed in any::<u64>()) {
        let g = a5();
        let x = random_elem(g.lamp(), &mut rng(seed));
        let geo = g.geodesic(&x).unwrap();
        prop_assert_eq!(geo.len() as u64, g.norm(&x).unwrap());
        prop_assert_eq!(g.lamp().product(&geo.factors), x);
    }

    #[test]
    fn phi_preserves_norm_inside_window(seed in any::<u64>()) {
        let g = a5();
        let x = random_elem(g.lamp(), &mut rng(seed));
        let n = x.stats().n_value;
        let y = g.phi(&x, n).unwrap();
        prop_assert_eq!(g.norm_truncated(&y).unwrap().value, g.norm(&x).unwrap());
        prop_assert_eq!(g.norm_truncated(&y).unwrap().mode, FormulaMode::Theory);
    }
}
