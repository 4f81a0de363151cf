use std::sync::Arc;

use gzlef::commutators::{
    build_2_commutator, build_pm1_decomposition, evaluate, extend_witness, is_pm1_commutator, transport,
    verify_witness, xi_variant, PmOrder, PmSolver, WitnessKind, XiVariant, RESOLVED_XI_VARIANT,
};
use gzlef::group::{compose, generate_group, Perm};
use gzlef::oracle::{exists_pm_on_window, telescope_image};
use gzlef::sample::{self, rng};
use gzlef::{FiniteGroup, Lamp, LampElem, Mode};
use proptest::prelude::*;

fn lamp(name: &str) -> Lamp {
    Lamp::infinite(Arc::new(FiniteGroup::builtin(name).unwrap()))
}

fn a5() -> Lamp {
    lamp("A5")
}

fn el(l: &Lamp, cycles: &[&[usize]]) -> usize {
    l.base().index_of(&Perm::from_cycles(l.base().degree(), cycles).unwrap()).unwrap()
}

#[test]
fn product_examples() {
    let l = a5();
    let g = l.elem(0, [(-1, 5), (3, 17)]);
    assert_eq!(l.mul(&g, &l.identity()), g);
    // t · ḡt⁻¹ = α(ḡ)
    let gt = l.mul(&g, &l.t_pow(-1));
    assert_eq!(l.mul(&l.t(), &gt), l.alpha_pow(&g, 1).unwrap());
    assert_eq!(l.alpha_pow(&l.single(0, 9), 1).unwrap(), l.single(-1, 9));
    assert_eq!(l.alpha_pow(&l.alpha_pow(&g, 1).unwrap(), -1).unwrap(), g);
    let tr = Lamp::truncated(l.base().clone(), 1).unwrap();
    assert_eq!(tr.alpha_pow(&tr.single(-1, 9), 1).unwrap(), tr.single(1, 9));
    let x = l.elem(4, [(0, 3)]);
    assert_eq!(l.inverse(&x).shift, -4);
    assert_eq!(l.conjugate(&g, &x).shift, 0);
}

#[test]
fn stats_examples() {
    let l = a5();
    let s = l.t_pow(3).stats();
    assert_eq!((s.weight, s.n_value), (0, 3));
    let s = l.elem(1, [(-2, 4), (5, 8)]).stats();
    assert_eq!((s.i_min, s.i_max, s.weight, s.n_value), (Some(-2), Some(5), 2, 5));
}

#[test]
fn tplus_examples() {
    let l = a5();
    assert!(l.in_tplus(&l.t()));
    for g in 0..60 {
        assert!(l.in_tplus(&l.elem(1, [(0, g), (1, l.base().inv(g))])));
    }
}

// Faithful action of P ≀ Z_W on W·|P| points: (i, x) ↦ (i + k, x·h_i).
fn as_perm(l: &Lamp, x: &LampElem) -> Perm {
    let (p, n) = (l.base().order(), match l.mode() {
        Mode::Truncated(n) => n,
        Mode::Infinite => unreachable!(),
    });
    let w = (2 * n + 1) as usize;
    let k = x.shift.rem_euclid(w as i64) as usize;
    let mut images = vec![0; w * p];
    for i in 0..w {
        let h = x.at(i as i64 - n);
        for y in 0..p {
            images[i * p + y] = ((i + k) % w) * p + l.base().mul(y, h);
        }
    }
    Perm::new(images).unwrap()
}

#[test]
fn truncated_product_matches_permutation_model() {
    let l = Lamp::truncated(Arc::new(FiniteGroup::builtin("S3").unwrap()), 1).unwrap();
    let gens: Vec<Perm> = l
        .base()
        .generators()
        .iter()
        .map(|&s| as_perm(&l, &l.single(0, s)))
        .chain([as_perm(&l, &l.t())])
        .collect();
    let g = generate_group(&gens).unwrap();
    assert_eq!(g.order(), 648);
    let code = gzlef::oracle::DenseCode::for_lamp(&l).unwrap();
    let all: Vec<LampElem> = (0..code.states()).map(|c| code.decode(&l, c)).collect();
    for a in all.iter().step_by(5) {
        for b in &all {
            let lhs = as_perm(&l, &l.mul(a, b));
            assert_eq!(lhs, compose(&as_perm(&l, a), &as_perm(&l, b)).unwrap());
        }
    }
}

#[test]
fn telescoping_equals_existential_search() {
    for name in ["S3", "A5"] {
        let l = lamp(name);
        let p = l.base().order();
        for sign in [1, -1] {
            let image = telescope_image(&l, sign, 0, 2);
            assert!(image.iter().all(|x| is_pm1_commutator(&l, x, sign)));
            // every vector on a window of size 3
            let mut d = vec![0usize; 3];
            loop {
                let x = l.from_run(0, &d);
                assert_eq!(is_pm1_commutator(&l, &x, sign), image.contains(&x), "{} {:?}", name, x);
                let mut k = 2;
                loop {
                    d[k] += 1;
                    if d[k] < p {
                        break;
                    }
                    d[k] = 0;
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                }
                if d.iter().all(|&v| v == 0) {
                    break;
                }
            }
        }
    }
}

fn oracle_pm(l: &Lamp, x: &LampElem) -> bool {
    let (lo, hi) = (x.i_min().unwrap_or(0) - 2, x.i_max().unwrap_or(0) + 2);
    [PmOrder::PlusMinus, PmOrder::MinusPlus].iter().any(|&o| exists_pm_on_window(l.base(), x, o, lo, hi))
}

#[test]
fn pm_decision_matches_search_on_s3_window() {
    let l = lamp("S3");
    let s = PmSolver::new(l.base().clone());
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                let x = l.from_run(0, &[a, b, c]);
                assert_eq!(s.is_pm_commutator(&l, &x), oracle_pm(&l, &x), "{:?}", x);
            }
        }
    }
}

#[test]
fn pm_decision_matches_search_on_a5_class_reps() {
    let l = a5();
    let s = PmSolver::new(l.base().clone());
    let reps = l.base().classes().representatives();
    for &a in &reps {
        for &b in &reps {
            for &c in &reps {
                for x in [l.from_run(0, &[a, b, c]), l.elem(0, [(-3, a), (1, b), (4, c)])] {
                    assert_eq!(s.is_pm_commutator(&l, &x), oracle_pm(&l, &x), "{:?}", x);
                }
            }
        }
    }
}

#[test]
fn statement_reading_of_xi_is_the_correct_one() {
    assert_eq!(RESOLVED_XI_VARIANT, XiVariant::Statement);
    let mut proof_usage_misses = 0;
    for name in ["A4", "Z3", "S3"] {
        let l = lamp(name);
        let p = l.base();
        for a in 1..p.order() {
            for b in 1..p.order() {
                for c in 1..p.order() {
                    let truth = oracle_pm(&l, &l.from_run(1, &[a, b, c]));
                    assert_eq!(xi_variant(p, XiVariant::Statement, a, b, c), truth);
                    proof_usage_misses += (xi_variant(p, XiVariant::ProofUsage, a, b, c) != truth) as usize;
                }
            }
        }
    }
    assert!(proof_usage_misses > 0);
}

#[test]
fn random_pm1_decompositions() {
    let l = a5();
    let mut g = rng(3);
    for _ in 0..1000 {
        let w = rand::Rng::gen_range(&mut g, 0..=6);
        let h = sample::vector_with_weight(&l, &mut g, w, -4, 4);
        for sign in [1, -1] {
            let (wit, rest) = build_pm1_decomposition(&l, &h, sign).unwrap();
            assert!(rest.weight() <= 1);
            assert!(verify_witness(&l, &l.mul(&h, &l.inverse(&rest)), &wit));
            assert_eq!(l.mul(&evaluate(&l, &wit), &rest), h);
        }
    }
}

#[test]
fn random_two_commutators_and_monotonicity() {
    let l = a5();
    let mut g = rng(4);
    for _ in 0..300 {
        let h = sample::vector_with_weight(&l, &mut g, 7, -5, 5);
        for sign in [1, -1] {
            let w = build_2_commutator(&l, &h, sign).unwrap();
            assert_eq!(w.kind, WitnessKind::K(2 * sign));
            assert!(verify_witness(&l, &h, &w));
            let w3 = extend_witness(&l, &w).unwrap();
            assert_eq!(w3.kind, WitnessKind::K(3 * sign));
            assert!(verify_witness(&l, &h, &w3));
        }
    }
}

#[test]
fn weight_at_least_four_is_always_pm() {
    let l = a5();
    let s = PmSolver::new(l.base().clone());
    let mut g = rng(5);
    for w in [4, 5, 6, 7] {
        for _ in 0..100 {
            let h = sample::vector_with_weight(&l, &mut g, w, -6, 6);
            assert!(s.is_pm_commutator(&l, &h));
            let wit = s.build_pm_commutator(&l, &h).unwrap();
            assert!(verify_witness(&l, &h, &wit));
        }
    }
}

#[test]
fn xi_counterexample_fails_pm() {
    let l = a5();
    let s = PmSolver::new(l.base().clone());
    let u = el(&l, &[&[0, 1], &[2, 3]]);
    let c = el(&l, &[&[0, 1, 2, 3, 4]]);
    let h = l.elem(0, [(-2, u), (0, c), (3, c)]);
    assert!(!s.is_pm_commutator(&l, &h));
    assert!(!oracle_pm(&l, &h));
}

#[test]
fn transport_spreads_and_compresses() {
    let l = a5();
    let s = PmSolver::new(l.base().clone());
    let mut g = rng(6);
    for _ in 0..50 {
        let vals: Vec<usize> = (0..3).map(|_| sample::nontrivial(&l, &mut g)).collect();
        let h = l.from_run(1, &vals);
        let Ok(w) = s.build_pm_commutator(&l, &h) else { continue };
        let spread = transport(&l, &w, &[1, 2, 3], &[-5, 0, 7]).unwrap();
        let target = l.elem(0, [(-5, vals[0]), (0, vals[1]), (7, vals[2])]);
        assert!(verify_witness(&l, &target, &spread));
        let back = transport(&l, &spread, &[-5, 0, 7], &[1, 2, 3]).unwrap();
        assert!(verify_witness(&l, &h, &back));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn associativity_and_shift_homomorphism(seed in any::<u64>(), n in 1i64..4) {
        let inf = a5();
        let mut g = rng(seed);
        let tr = Lamp::truncated(inf.base().clone(), n).unwrap();
        for l in [&inf, &tr] {
            let (lo, hi) = if l.mode() == Mode::Infinite { (-6, 6) } else { (-n, n) };
            let a = sample::element(l, &mut g, 4, lo, hi, 3);
            let b = sample::element(l, &mut g, 4, lo, hi, 3);
            let c = sample::element(l, &mut g, 4, lo, hi, 3);
            prop_assert_eq!(l.mul(&l.mul(&a, &b), &c), l.mul(&a, &l.mul(&b, &c)));
            prop_assert_eq!(l.mul(&a, &b).shift, l.mode().reduce(a.shift + b.shift));
            prop_assert_eq!(l.inverse(&l.inverse(&a)), a.clone());
            prop_assert_eq!(l.mul(&a, &l.inverse(&a)), l.identity());
        }
    }

    #[test]
    fn sbar_is_conjugation_invariant(seed in any::<u64>()) {
        let l = a5();
        let mut g = rng(seed);
        let y = sample::element(&l, &mut g, 3, -4, 4, 2);
        let singles = l.single(rand::Rng::gen_range(&mut g, -3..3), sample::nontrivial(&l, &mut g));
        let h = sample::vector_with_weight(&l, &mut g, 4, -3, 3);
        for x in [singles, l.with_shift(&l.plus_comm(&h), 1), l.with_shift(&l.minus_comm(&h), -1), sample::element(&l, &mut g, 3, -3, 3, 1)] {
            prop_assert_eq!(l.in_sbar(&x), l.in_sbar(&l.conjugate(&x, &y)));
        }
    }

    #[test]
    fn shift_zero_inverse_keeps_support(seed in any::<u64>()) {
        let l = a5();
        let h = sample::vector_with_weight(&l, &mut rng(seed), 5, -5, 5);
        prop_assert_eq!(l.inverse(&h).stats().n_value, h.stats().n_value);
        prop_assert_eq!(l.inverse(&h).indices(), h.indices());
    }
}
