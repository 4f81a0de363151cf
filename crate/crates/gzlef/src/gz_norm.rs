//! The closed-form invariant word norm on `G_Z` and its truncations,
//! geodesic factorizations over `S̄`, the truncation map `φ`, and the
//! almost-homomorphism checker.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::commutators::{self, CommWitness, PmOrder, PmSolver, WitnessKind};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lamp::{Lamp, LampElem, Mode};
use crate::props::{self, PropReport};
use crate::Rational;

/// Smallest truncation width `2n+1` for which the formula is trusted.
pub const THEORY_MIN_WIDTH: i64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaMode {
    /// Window wide enough and the base passes S1 to S4.
    Theory,
    /// Small window or failing base: breadth-first search is authoritative.
    Advisory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedNorm {
    pub value: u64,
    pub mode: FormulaMode,
}

/// Norm context over a fixed base group.
#[derive(Debug)]
pub struct GzNorm {
    lamp: Lamp,
    props: Vec<PropReport>,
    pm: PmSolver,
}

impl GzNorm {
    /// Checks S1 to S4 and rejects a base that fails one, naming it.
    pub fn new(base: Arc<FiniteGroup>) -> Result<GzNorm> {
        let g = GzNorm::advisory(base);
        if let Some(r) = g.props.iter().find(|r| !r.holds) {
            return Err(Error::BaseRejected(r.property.id().to_string()));
        }
        Ok(g)
    }

    /// Same context without rejecting the base; truncated values are then
    /// always advisory.
    pub fn advisory(base: Arc<FiniteGroup>) -> GzNorm {
        let props = props::check_all(&base);
        let pm = PmSolver::new(base.clone());
        GzNorm { lamp: Lamp::infinite(base), props, pm }
    }

    pub fn base(&self) -> &Arc<FiniteGroup> {
        self.lamp.base()
    }

    pub fn lamp(&self) -> &Lamp {
        &self.lamp
    }

    pub fn props(&self) -> &[PropReport] {
        &self.props
    }

    pub fn base_ok(&self) -> bool {
        self.props.iter().all(|r| r.holds)
    }

    pub fn pm_solver(&self) -> &PmSolver {
        &self.pm
    }

    pub fn truncated_lamp(&self, n: i64) -> Result<Lamp> {
        self.lamp.with_mode(Mode::Truncated(n))
    }

    fn formula(&self, lamp: &Lamp, g: &LampElem) -> u64 {
        let k = g.shift;
        match k {
            0 => match g.weight() {
                0 => 0,
                1 => 1,
                2 => 2,
                _ if self.pm.is_pm_commutator(lamp, g) => 2,
                _ => 3,
            },
            1 | -1 => {
                if commutators::is_pm1_commutator(lamp, &lamp.torsion(g), k) {
                    1
                } else {
                    2
                }
            }
            _ => k.unsigned_abs(),
        }
    }

    /// Word norm over `S̄` in `G_Z`.
    pub fn norm(&self, g: &LampElem) -> Result<u64> {
        if g.mode != Mode::Infinite {
            return Err(Error::ModeMismatch);
        }
        Ok(self.formula(&self.lamp, g))
    }

    /// The same case table in `G_[-n,n]` with cyclic predicates.
    pub fn norm_truncated(&self, g: &LampElem) -> Result<TruncatedNorm> {
        let n = match g.mode {
            Mode::Truncated(n) => n,
            Mode::Infinite => return Err(Error::ModeMismatch),
        };
        let lamp = self.truncated_lamp(n)?;
        let mode = if 2 * n + 1 >= THEORY_MIN_WIDTH && self.base_ok() { FormulaMode::Theory } else { FormulaMode::Advisory };
        Ok(TruncatedNorm { value: self.formula(&lamp, g), mode })
    }

    /// `φ(h̄tᵐ) = h̄tᵐ` in `G_[-2N-3, 2N+3]` when `N(h̄tᵐ) ≤ 2N+2`, else `1`.
    pub fn phi(&self, g: &LampElem, big_n: u64) -> Result<LampElem> {
        let target = self.truncated_lamp(2 * big_n as i64 + 3)?;
        Ok(if g.stats().n_value <= 2 * big_n + 2 { self.lamp.reinterpret(g, &target) } else { target.identity() })
    }

    /// A geodesic `S̄`-factorization of `g` in its own mode.
    pub fn geodesic(&self, g: &LampElem) -> Result<Geodesic> {
        match g.mode {
            Mode::Infinite => self.geodesic_infinite(g),
            Mode::Truncated(n) => {
                let (lo, hi) = (g.i_min().unwrap_or(0) - 2, g.i_max().unwrap_or(0) + 2);
                if lo < -n || hi > n {
                    return Err(Error::Unsupported(format!("support plus margin [{}, {}] leaves the window", lo, hi)));
                }
                let target = self.truncated_lamp(n)?;
                let lifted = target.reinterpret(g, &self.lamp);
                let geo = self.geodesic_infinite(&lifted)?;
                let factors: Vec<LampElem> = geo.factors.iter().map(|s| self.lamp.reinterpret(s, &target)).collect();
                let out = Geodesic { factors };
                let claimed = self.norm_truncated(g)?.value;
                if !verify_geodesic(&target, g, &out, claimed) {
                    return Err(Error::NoSolution("lifted factorization is not geodesic in the truncation".into()));
                }
                Ok(out)
            }
        }
    }

    fn singles(&self, g: &LampElem) -> Vec<LampElem> {
        g.support.iter().map(|(&i, &v)| self.lamp.single(i, v)).collect()
    }

    fn geodesic_infinite(&self, g: &LampElem) -> Result<Geodesic> {
        let l = &self.lamp;
        let k = g.shift;
        let h = l.torsion(g);
        let factors = match k {
            0 => match g.weight() {
                0 => vec![],
                1 | 2 => self.singles(g),
                _ if self.pm.is_pm_commutator(l, &h) => {
                    let w = self.pm.build_pm_commutator(l, &h)?;
                    pm_factors(l, &w)?
                }
                _ => self.singles(g),
            },
            1 | -1 => {
                if commutators::is_pm1_commutator(l, &h, k) {
                    vec![g.clone()]
                } else {
                    let (w, rest) = commutators::build_pm1_decomposition(l, &h, k)?;
                    let c = commutators::evaluate(l, &w);
                    vec![l.with_shift(&c, k), l.alpha_pow(&rest, -k)?]
                }
            }
            _ => {
                let s = k.signum();
                let w = commutators::build_2_commutator(l, &h, s)?;
                let e = |v: &LampElem| if s > 0 { l.plus_comm(v) } else { l.minus_comm(v) };
                let mut f = vec![
                    l.with_shift(&e(&w.vectors[0]), s),
                    l.with_shift(&l.alpha_pow(&e(&w.vectors[1]), -s)?, s),
                ];
                f.extend((2..k.abs()).map(|_| l.t_pow(s)));
                f
            }
        };
        Ok(Geodesic { factors })
    }
}

// A shift-0 [±,t]-commutator as a product of one T₋ and one T₊ element.
fn pm_factors(l: &Lamp, w: &CommWitness) -> Result<Vec<LampElem>> {
    let (a, b) = (&w.vectors[0], &w.vectors[1]);
    Ok(match w.kind {
        WitnessKind::Pm(PmOrder::MinusPlus) => {
            vec![l.with_shift(&l.minus_comm(a), -1), l.with_shift(&l.alpha_pow(&l.plus_comm(b), 1)?, 1)]
        }
        WitnessKind::Pm(PmOrder::PlusMinus) => {
            vec![l.with_shift(&l.plus_comm(a), 1), l.with_shift(&l.alpha_pow(&l.minus_comm(b), -1)?, -1)]
        }
        WitnessKind::K(_) => return Err(Error::Unsupported("expected a [±,t] witness".into())),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geodesic {
    pub factors: Vec<LampElem>,
}

impl Geodesic {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Factors lie in `S̄`, multiply to `g`, number `claimed`, and stay within
/// two places of the support of `g`.
pub fn verify_geodesic(lamp: &Lamp, g: &LampElem, geo: &Geodesic, claimed: u64) -> bool {
    if geo.factors.len() as u64 != claimed || !geo.factors.iter().all(|s| lamp.in_sbar(s)) {
        return false;
    }
    if lamp.product(&geo.factors) != *g {
        return false;
    }
    support_bounds_hold(g, geo)
}

pub fn support_bounds_hold(g: &LampElem, geo: &Geodesic) -> bool {
    geo.factors.iter().all(|s| match (s.i_min(), s.i_max(), g.i_min(), g.i_max()) {
        (None, _, _, _) => true,
        (Some(a), Some(b), Some(lo), Some(hi)) => a >= lo - 2 && b <= hi + 2,
        _ => false,
    })
}

/// One `(element, threshold)` comparison in both norms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub element: usize,
    pub q: String,
    pub source: char,
    pub target: char,
    pub agree: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlmostHomReport {
    pub ok: bool,
    pub injective_on_k: bool,
    pub multiplicative_triples_ok: bool,
    pub triples_checked: usize,
    pub norm_agreements: Vec<Agreement>,
    pub failures: Vec<String>,
}

pub fn sign_char(o: Ordering) -> char {
    match o {
        Ordering::Less => '<',
        Ordering::Equal => '=',
        Ordering::Greater => '>',
    }
}

fn compare(v: u64, q: &Rational) -> Ordering {
    Rational::from_integer(v as i64).cmp(q)
}

/// Checks that `map` is a `K`-`Q`-almost-homomorphism: injective on `K`,
/// multiplicative on triples `h, g, hg ∈ K`, and preserving every
/// comparison of the norm against each `q ∈ Q`.
#[allow(clippy::too_many_arguments)]
pub fn verify_kq_almost_hom<S, T>(
    k: &[S],
    q: &[Rational],
    map: impl Fn(&S) -> T,
    source_norm: impl Fn(&S) -> u64,
    target_norm: impl Fn(&T) -> u64,
    source_mul: impl Fn(&S, &S) -> S,
    target_mul: impl Fn(&T, &T) -> T,
) -> AlmostHomReport
where
    S: PartialEq + std::fmt::Debug,
    T: PartialEq + std::fmt::Debug,
{
    let mut r = AlmostHomReport { injective_on_k: true, multiplicative_triples_ok: true, ..Default::default() };
    if !q.contains(&Rational::from_integer(0)) {
        r.failures.push("threshold set must contain 0".into());
    }
    let images: Vec<T> = k.iter().map(&map).collect();
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            if k[i] != k[j] && images[i] == images[j] {
                r.injective_on_k = false;
                r.failures.push(format!("not injective: K[{}] and K[{}] share an image", i, j));
            }
        }
    }
    for (a, ia) in k.iter().zip(&images) {
        for (b, ib) in k.iter().zip(&images) {
            let ab = source_mul(a, b);
            if let Some(c) = k.iter().position(|x| *x == ab) {
                r.triples_checked += 1;
                if target_mul(ia, ib) != images[c] {
                    r.multiplicative_triples_ok = false;
                    r.failures.push(format!("not multiplicative on {:?} * {:?}", a, b));
                }
            }
        }
    }
    for (e, (g, img)) in k.iter().zip(&images).enumerate() {
        let (vs, vt) = (source_norm(g), target_norm(img));
        for qq in q {
            let (s, t) = (sign_char(compare(vs, qq)), sign_char(compare(vt, qq)));
            if s != t {
                r.failures.push(format!("K[{}]: source {} {} {} but target {} {} {}", e, vs, s, qq, vt, t, qq));
            }
            r.norm_agreements.push(Agreement { element: e, q: qq.to_string(), source: s, target: t, agree: s == t });
        }
    }
    r.ok = r.failures.is_empty();
    r
}

/// `N := max N(g)` over `K`.
pub fn window_for(k: &[LampElem]) -> u64 {
    k.iter().map(|g| g.stats().n_value).max().unwrap_or(0)
}

impl GzNorm {
    /// Runs [`verify_kq_almost_hom`] on `φ` with `N` computed from `K`.
    pub fn verify_phi(&self, k: &[LampElem], q: &[Rational]) -> Result<AlmostHomReport> {
        let big_n = window_for(k);
        let target = self.truncated_lamp(2 * big_n as i64 + 3)?;
        let map = |g: &LampElem| self.phi(g, big_n).expect("window is valid");
        Ok(verify_kq_almost_hom(
            k,
            q,
            map,
            |g| self.formula(&self.lamp, g),
            |g| self.formula(&target, g),
            |a, b| self.lamp.mul(a, b),
            |a, b| target.mul(a, b),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> GzNorm {
        GzNorm::new(Arc::new(FiniteGroup::builtin("A5").unwrap())).unwrap()
    }

    #[test]
    fn rejects_abelian_base() {
        let e = GzNorm::new(Arc::new(FiniteGroup::builtin("Z3").unwrap())).unwrap_err();
        assert_eq!(e, Error::BaseRejected("S1".into()));
    }

    #[test]
    fn table_rows() {
        let g = ctx();
        let l = g.lamp();
        assert_eq!(g.norm(&l.identity()).unwrap(), 0);
        assert_eq!(g.norm(&l.t_pow(5)).unwrap(), 5);
        assert_eq!(g.norm(&l.single(0, 7)).unwrap(), 1);
        assert_eq!(g.norm(&l.from_run(0, &[3, 9, 14, 22])).unwrap(), 2);
        assert_eq!(g.norm(&l.t()).unwrap(), 1);
    }

    #[test]
    fn truncated_rows() {
        let g = ctx();
        let l = g.truncated_lamp(3).unwrap();
        let r = g.norm_truncated(&l.t()).unwrap();
        assert_eq!((r.value, r.mode), (1, FormulaMode::Theory));
        assert_eq!(g.norm_truncated(&l.t_pow(7)).unwrap().value, 0);
        assert_eq!(g.norm_truncated(&g.truncated_lamp(1).unwrap().t()).unwrap().mode, FormulaMode::Advisory);
    }

    #[test]
    fn t_cubed_geodesic() {
        let g = ctx();
        let l = g.lamp();
        let geo = g.geodesic(&l.t_pow(3)).unwrap();
        assert_eq!(geo.factors, vec![l.t(), l.t(), l.t()]);
    }

    #[test]
    fn phi_rows() {
        let g = ctx();
        let l = g.lamp();
        let x = l.elem(1, [(-3, 4), (2, 8)]);
        let y = g.phi(&x, 1).unwrap();
        assert_eq!(y.mode, Mode::Truncated(5));
        assert_eq!(y.support, x.support);
        assert!(g.phi(&l.t_pow(5), 1).unwrap().support.is_empty());
        assert_eq!(g.phi(&l.t_pow(5), 1).unwrap().shift, 0);
        assert_eq!(g.phi(&l.identity(), 2).unwrap(), g.truncated_lamp(7).unwrap().identity());
    }

    #[test]
    fn identity_map_is_almost_hom() {
        let g = ctx();
        let l = g.lamp();
        let k = vec![l.identity(), l.t(), l.single(0, 3), l.mul(&l.t(), &l.single(0, 3))];
        let q: Vec<Rational> = (0..4).map(Rational::from_integer).collect();
        let r = verify_kq_almost_hom(&k, &q, |x| x.clone(), |x| g.norm(x).unwrap(), |x| g.norm(x).unwrap(), |a, b| l.mul(a, b), |a, b| l.mul(a, b));
        assert!(r.ok && r.triples_checked > 0);
    }
}
