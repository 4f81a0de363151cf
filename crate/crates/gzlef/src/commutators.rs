//! `[k,t]`- and `[±,t]`-commutators: witnesses, verification, deciders and
//! builders.
//!
//! Notation: `ḡα(ḡ⁻¹)` is [`Lamp::plus_comm`] and `α(ḡ)ḡ⁻¹` is
//! [`Lamp::minus_comm`]. A `[k,t]` witness multiplies `|k|` such factors of
//! the sign of `k`; a `[±,t]` witness multiplies one of each, in the order
//! given by [`PmOrder`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lamp::{Lamp, LampElem, Mode};
use crate::props::{self, xi, Statement};

/// Which reading of the three-coordinate criterion is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiVariant {
    /// `Ξ(h1, h2, h3)`
    Statement,
    /// `Ξ(h1⁻¹, h2⁻¹, h3)`
    ProofUsage,
}

/// The variant that agrees with exhaustive search (see the oracle tests).
pub const RESOLVED_XI_VARIANT: XiVariant = XiVariant::Statement;

pub fn xi_variant(g: &FiniteGroup, v: XiVariant, h1: usize, h2: usize, h3: usize) -> bool {
    match v {
        XiVariant::Statement => xi(g, h1, h2, h3),
        XiVariant::ProofUsage => xi(g, g.inv(h1), g.inv(h2), h3),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PmOrder {
    /// `ḡ1α(ḡ1⁻¹) · α(ḡ2)ḡ2⁻¹`
    #[serde(rename = "+-")]
    PlusMinus,
    /// `α(ḡ1)ḡ1⁻¹ · ḡ2α(ḡ2⁻¹)`
    #[serde(rename = "-+")]
    MinusPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    K(i64),
    Pm(PmOrder),
}

impl WitnessKind {
    pub fn arity(self) -> usize {
        match self {
            WitnessKind::K(k) => k.unsigned_abs() as usize,
            WitnessKind::Pm(_) => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommWitness {
    pub kind: WitnessKind,
    pub vectors: Vec<LampElem>,
}

impl CommWitness {
    pub fn to_json(&self, lamp: &Lamp) -> Value {
        json!({"kind": self.kind, "vectors": self.vectors.iter().map(|v| lamp.to_json(v)).collect::<Vec<_>>()})
    }

    pub fn from_json(lamp: &Lamp, v: &Value) -> Result<CommWitness> {
        let kind: WitnessKind =
            serde_json::from_value(v["kind"].clone()).map_err(|e| Error::Parse(format!("kind: {}", e)))?;
        let vectors = v["vectors"]
            .as_array()
            .ok_or_else(|| Error::Parse("vectors must be an array".into()))?
            .iter()
            .map(|x| lamp.from_json(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(CommWitness { kind, vectors })
    }
}

/// Multiplies out a witness per the definition.
pub fn evaluate(lamp: &Lamp, w: &CommWitness) -> LampElem {
    let factors: Vec<LampElem> = match w.kind {
        WitnessKind::K(k) if k > 0 => w.vectors.iter().map(|g| lamp.plus_comm(g)).collect(),
        WitnessKind::K(_) => w.vectors.iter().map(|g| lamp.minus_comm(g)).collect(),
        WitnessKind::Pm(PmOrder::PlusMinus) => {
            vec![lamp.plus_comm(&w.vectors[0]), lamp.minus_comm(&w.vectors[1])]
        }
        WitnessKind::Pm(PmOrder::MinusPlus) => {
            vec![lamp.minus_comm(&w.vectors[0]), lamp.plus_comm(&w.vectors[1])]
        }
    };
    lamp.product(&factors)
}

pub fn verify_witness(lamp: &Lamp, h: &LampElem, w: &CommWitness) -> bool {
    let arity_ok = match w.kind {
        WitnessKind::K(0) => false,
        k => w.vectors.len() == k.arity(),
    };
    arity_ok
        && h.shift == 0
        && w.vectors.iter().all(|v| v.shift == 0 && v.mode == lamp.mode())
        && evaluate(lamp, w) == *h
}

/// A `[k+1,t]` (or `[k-1,t]`) witness from a `[k,t]` one.
pub fn extend_witness(lamp: &Lamp, w: &CommWitness) -> Result<CommWitness> {
    match w.kind {
        WitnessKind::K(k) if k != 0 => {
            let mut vectors = w.vectors.clone();
            vectors.push(lamp.identity());
            Ok(CommWitness { kind: WitnessKind::K(k + k.signum()), vectors })
        }
        _ => Err(Error::Unsupported("only [k,t] witnesses extend".into())),
    }
}

fn require_shift_zero(h: &LampElem) -> Result<()> {
    if h.shift != 0 {
        return Err(Error::NonzeroShift);
    }
    Ok(())
}

/// `h = (commutator part) · residual`, the residual supported at
/// `i_max(h)` (the identity when `h` is).
pub fn build_pm1_decomposition(lamp: &Lamp, h: &LampElem, sign: i64) -> Result<(CommWitness, LampElem)> {
    require_shift_zero(h)?;
    let p = lamp.base();
    let kind = WitnessKind::K(if sign >= 0 { 1 } else { -1 });
    let (lo, hi) = match (h.i_min(), h.i_max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Ok((CommWitness { kind, vectors: vec![lamp.identity()] }, lamp.identity())),
    };
    let mut coords = Vec::new();
    let mut g = 0;
    for j in lo..hi {
        g = if sign >= 0 { p.mul(p.inv(h.at(j)), g) } else { p.mul(h.at(j), g) };
        coords.push((j + 1, g));
    }
    let last = if sign >= 0 { p.mul(p.inv(g), h.at(hi)) } else { p.mul(g, h.at(hi)) };
    let g_vec = lamp.elem(0, coords);
    Ok((CommWitness { kind, vectors: vec![g_vec] }, lamp.single(hi, last)))
}

/// Whether `h` is a `[1,t]`- (`sign > 0`) or `[-1,t]`-commutator.
pub fn is_pm1_commutator(lamp: &Lamp, h: &LampElem, sign: i64) -> bool {
    h.shift == 0 && if sign > 0 { lamp.is_plus1_comm(h) } else { lamp.is_minus1_comm(h) }
}

pub fn build_pm1_commutator(lamp: &Lamp, h: &LampElem, sign: i64) -> Result<CommWitness> {
    require_shift_zero(h)?;
    let g = if sign > 0 { lamp.solve_plus(h) } else { lamp.solve_minus(h) };
    let g = g.ok_or_else(|| Error::NoSolution(format!("not a [{},t]-commutator", sign.signum())))?;
    Ok(CommWitness { kind: WitnessKind::K(sign.signum()), vectors: vec![g] })
}

fn infinite_only(lamp: &Lamp) -> Result<()> {
    if lamp.mode() != Mode::Infinite {
        return Err(Error::Unsupported("builder needs the infinite group; lift the element first".into()));
    }
    Ok(())
}

/// Witness with two vectors for `[2,t]` (`sign > 0`) or `[-2,t]`.
pub fn build_2_commutator(lamp: &Lamp, h: &LampElem, sign: i64) -> Result<CommWitness> {
    require_shift_zero(h)?;
    infinite_only(lamp)?;
    if sign < 0 {
        // α(f)f⁻¹ = (fα(f⁻¹))⁻¹, so h⁻¹ = f1α(f1⁻¹)·f2α(f2⁻¹) gives h with the
        // vectors swapped.
        let w = build_2_commutator(lamp, &lamp.inverse(h), 1)?;
        let vectors = vec![w.vectors[1].clone(), w.vectors[0].clone()];
        return Ok(CommWitness { kind: WitnessKind::K(-2), vectors });
    }
    let p = lamp.base();
    let (lo, hi) = match (h.i_min(), h.i_max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Ok(CommWitness { kind: WitnessKind::K(2), vectors: vec![lamp.identity(), lamp.identity()] }),
    };
    // Odd lengths get a trivial entry on the left so pairs line up and the
    // vectors never reach past i_max + 1.
    let start = if (hi - lo + 1) % 2 == 1 { lo - 1 } else { lo };
    let vals: Vec<usize> = (start..=hi).map(|i| h.at(i)).collect();
    let (x, y) = props::solve_s1(p, vals[0], vals[1])?;
    let mut g1 = vec![(start + 1, p.mul(p.inv(x), p.inv(vals[0]))), (start + 2, p.inv(y))];
    let mut g2 = vec![(start + 1, x), (start + 2, y)];
    let mut w = y;
    let mut pos = start + 2;
    for pair in vals[2..].chunks(2) {
        let (z, u, v) = props::solve_s2(p, pair[0], pair[1], w)?;
        g1.push((pos + 1, p.inv(z)));
        g1.push((pos + 2, p.inv(v)));
        g2.push((pos + 1, p.inv(u)));
        g2.push((pos + 2, v));
        w = v;
        pos += 2;
    }
    Ok(CommWitness { kind: WitnessKind::K(2), vectors: vec![lamp.elem(0, g1), lamp.elem(0, g2)] })
}

/// `1 ∈ C(h_1) C(h_2) ⋯ C(h_ω)`: the class-product form of the `[±,t]`
/// criterion, valid for every base group. Trivial coordinates contribute
/// nothing.
pub fn pm_class_criterion(p: &FiniteGroup, values: &[usize]) -> bool {
    let k = p.classes().class_count();
    let mut reach = vec![false; k];
    reach[p.class_of(p.identity())] = true;
    for &h in values {
        let c = p.class_of(h);
        let mut next = vec![false; k];
        for d in (0..k).filter(|&d| reach[d]) {
            for (e, slot) in next.iter_mut().enumerate() {
                *slot |= p.class_product_contains(d, c, e);
            }
        }
        reach = next;
    }
    reach[p.class_of(p.identity())]
}

/// Decides and builds `[±,t]`-commutators over a fixed base group.
#[derive(Debug)]
pub struct PmSolver {
    base: Arc<FiniteGroup>,
    s3: bool,
    variant: XiVariant,
}

impl PmSolver {
    pub fn new(base: Arc<FiniteGroup>) -> PmSolver {
        PmSolver::with_variant(base, RESOLVED_XI_VARIANT)
    }

    pub fn with_variant(base: Arc<FiniteGroup>, variant: XiVariant) -> PmSolver {
        let s3 = props::check(&base, Statement::S3).holds;
        PmSolver { base, s3, variant }
    }

    pub fn variant(&self) -> XiVariant {
        self.variant
    }

    pub fn is_pm_commutator(&self, lamp: &Lamp, h: &LampElem) -> bool {
        if h.shift != 0 {
            return false;
        }
        let vals = h.values();
        match vals.len() {
            0 => true,
            1 => false,
            2 => pm_class_criterion(&self.base, &vals),
            3 => xi_variant(&self.base, self.variant, vals[0], vals[1], vals[2]),
            _ if self.s3 && lamp.mode() == Mode::Infinite => true,
            _ => pm_class_criterion(&self.base, &vals),
        }
    }

    /// A verified `[±,t]` witness for `h`.
    pub fn build_pm_commutator(&self, lamp: &Lamp, h: &LampElem) -> Result<CommWitness> {
        require_shift_zero(h)?;
        infinite_only(lamp)?;
        let vals = h.values();
        let compact = Lamp::infinite(self.base.clone());
        let w = match vals.len() {
            0 => CommWitness { kind: WitnessKind::Pm(PmOrder::MinusPlus), vectors: vec![lamp.identity(), lamp.identity()] },
            1 => return Err(Error::NoSolution("a nontrivial single coordinate is never a [±,t]-commutator".into())),
            2 => self
                .search_small(&vals)
                .ok_or_else(|| Error::NoSolution("not a [±,t]-commutator".into()))?,
            3 => self.build_weight3(&compact, &vals)?,
            _ => match self.build_long(&compact, &vals) {
                Ok(w) => w,
                Err(_) => self.build_by_classes(&compact, &vals)?,
            },
        };
        let old: Vec<i64> = (1..=vals.len() as i64).collect();
        let w = transport(&compact, &w, &old, &h.indices())?;
        if !verify_witness(lamp, h, &w) {
            return Err(Error::NoSolution("constructed witness failed verification".into()));
        }
        Ok(w)
    }

    // Vectors a on positions 2..=ℓ with a⁻¹-conjugates of h telescoping to
    // h_ℓ; then the plus vector b follows from b_2 = h_1⁻¹a_2 and
    // b_{i+1} = h_i⁻¹ a_{i+1} a_i⁻¹ b_i.
    fn finish_minus_plus(&self, lamp: &Lamp, vals: &[usize], a: &[usize]) -> CommWitness {
        let p = &self.base;
        let l = vals.len();
        let mut b = vec![p.mul(p.inv(vals[0]), a[0])];
        for i in 1..l - 1 {
            let next = p.product(&[p.inv(vals[i]), a[i], p.inv(a[i - 1]), b[i - 1]]);
            b.push(next);
        }
        let g1 = lamp.from_run(2, a);
        let g2 = lamp.from_run(2, &b);
        CommWitness { kind: WitnessKind::Pm(PmOrder::MinusPlus), vectors: vec![g1, g2] }
    }

    fn build_weight3(&self, lamp: &Lamp, vals: &[usize]) -> Result<CommWitness> {
        let (x, y) = props::xi_witness(&self.base, vals[0], vals[1], vals[2])
            .ok_or_else(|| Error::NoSolution("three-coordinate criterion fails".into()))?;
        Ok(self.finish_minus_plus(lamp, vals, &[y, x]))
    }

    fn build_long(&self, lamp: &Lamp, vals: &[usize]) -> Result<CommWitness> {
        let p = &self.base;
        let l = vals.len();
        let mut a = vec![0usize; l - 1];
        let mut r = vals[l - 1];
        for j in (5..=l).rev() {
            let h = vals[j - 2];
            let x = (0..p.order())
                .find(|&x| p.mul(p.conj(h, x), r) != p.identity())
                .ok_or_else(|| Error::NoSolution("no conjugate keeps the remainder nontrivial".into()))?;
            r = p.mul(p.conj(h, x), r);
            a[j - 2] = x;
        }
        let (a4, a3, a2) = props::solve_s3(p, p.inv(vals[2]), p.inv(vals[1]), p.inv(vals[0]), r)?;
        a[0] = a2;
        a[1] = a3;
        a[2] = a4;
        Ok(self.finish_minus_plus(lamp, vals, &a))
    }

    // Dynamic programming over partial products of conjugates; works for any
    // base group where the class criterion holds.
    fn build_by_classes(&self, lamp: &Lamp, vals: &[usize]) -> Result<CommWitness> {
        let p = &self.base;
        let n = p.order();
        let l = vals.len();
        let cls = p.classes();
        // reach[m][r]: r is a product c_{m+2} ⋯ c_2 with c_j ∈ C(h_{j-1}⁻¹)
        let mut reach = vec![vec![false; n]; l - 1];
        for &c in &cls.classes[p.class_of(p.inv(vals[0]))] {
            reach[0][c] = true;
        }
        for m in 1..l - 1 {
            let class = &cls.classes[p.class_of(p.inv(vals[m]))];
            let (done, rest) = reach.split_at_mut(m);
            for r in (0..n).filter(|&r| done[m - 1][r]) {
                for &c in class {
                    rest[0][p.mul(c, r)] = true;
                }
            }
        }
        let mut target = vals[l - 1];
        if !reach[l - 2][target] {
            return Err(Error::NoSolution("class criterion fails".into()));
        }
        let mut a = vec![0usize; l - 1];
        for m in (0..l - 1).rev() {
            let hinv = p.inv(vals[m]);
            let c = if m == 0 {
                target
            } else {
                *cls.classes[p.class_of(hinv)]
                    .iter()
                    .find(|&&c| reach[m - 1][p.mul(p.inv(c), target)])
                    .expect("reachable by construction")
            };
            a[m] = p.first_conjugator(hinv, c).expect("same class");
            target = p.mul(p.inv(c), target);
        }
        Ok(self.finish_minus_plus(lamp, vals, &a))
    }

    /// Exhaustive search for `ω ≤ 2` on compressed coordinates `1..=ω`, with
    /// the first vector ranging over the window `1..=ω+1` in both orders.
    pub fn search_small(&self, vals: &[usize]) -> Option<CommWitness> {
        let lamp = Lamp::infinite(self.base.clone());
        let h = lamp.from_run(1, vals);
        search_window(&lamp, &h, 1, vals.len() as i64 + 1)
    }
}

/// Exhaustive `[±,t]` search with the first vector supported in `lo..=hi`;
/// the second vector is solved by telescoping.
pub fn search_window(lamp: &Lamp, h: &LampElem, lo: i64, hi: i64) -> Option<CommWitness> {
    let p = lamp.base();
    let n = p.order();
    let width = (hi - lo + 1) as u32;
    let total = n.checked_pow(width)?;
    for order in [PmOrder::PlusMinus, PmOrder::MinusPlus] {
        for code in 0..total {
            let mut c = code;
            let coords: Vec<(i64, usize)> = (lo..=hi)
                .map(|i| {
                    let d = c % n;
                    c /= n;
                    (i, d)
                })
                .collect();
            let g1 = lamp.elem(0, coords);
            let w = match order {
                PmOrder::PlusMinus => {
                    let rest = lamp.mul(&lamp.inverse(&lamp.plus_comm(&g1)), h);
                    lamp.solve_minus(&rest).map(|g2| vec![g1, g2])
                }
                PmOrder::MinusPlus => {
                    let rest = lamp.mul(&lamp.inverse(&lamp.minus_comm(&g1)), h);
                    lamp.solve_plus(&rest).map(|g2| vec![g1, g2])
                }
            };
            if let Some(vectors) = w {
                return Some(CommWitness { kind: WitnessKind::Pm(order), vectors });
            }
        }
    }
    None
}

fn check_indices(old: &[i64], new: &[i64]) -> Result<()> {
    if old.len() != new.len() {
        return Err(Error::BadIndices(format!("lengths {} and {}", old.len(), new.len())));
    }
    for s in [old, new] {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadIndices(format!("{:?} is not strictly increasing", s)));
        }
    }
    Ok(())
}

/// `β_{i,s}`: repeats coordinate `i` into `i+1..=i+s` and moves everything
/// above `i` up by `s`. On commutators this moves coordinates `≥ i` up by
/// `s` and leaves the rest.
pub fn beta(lamp: &Lamp, g: &LampElem, i: i64, s: i64) -> LampElem {
    let fill = g.at(i);
    let coords = g
        .support
        .iter()
        .map(|(&j, &v)| (if j > i { j + s } else { j }, v))
        .chain((i + 1..=i + s).map(|j| (j, fill)));
    lamp.elem(0, coords)
}

fn constant_run(g: &LampElem, i: i64, s: i64) -> bool {
    (i + 1..=i + s).all(|j| g.at(j) == g.at(i))
}

/// Moves a witness for coordinates at `old` to one for the same values at
/// `new`. Gaps widen through `β`; gaps narrow by deleting repeated
/// coordinates when every vector allows it, and otherwise the witness is
/// rebuilt for the target.
pub fn transport(lamp: &Lamp, w: &CommWitness, old: &[i64], new: &[i64]) -> Result<CommWitness> {
    infinite_only(lamp)?;
    check_indices(old, new)?;
    if old.is_empty() || old == new {
        return Ok(w.clone());
    }
    let d = old[0] - new[0];
    let mut vectors: Vec<LampElem> = w.vectors.iter().map(|g| lamp.alpha_pow(g, d)).collect::<Result<_>>()?;
    let mut cur: Vec<i64> = old.iter().map(|&i| i - d).collect();
    for m in (0..cur.len() - 1).rev() {
        let (have, want) = (cur[m + 1] - cur[m], new[m + 1] - new[m]);
        let at = cur[m] + 1;
        if want > have {
            vectors = vectors.iter().map(|g| beta(lamp, g, at, want - have)).collect();
        } else if want < have {
            let s = have - want;
            if !vectors.iter().all(|g| constant_run(g, at, s)) {
                return rebuild(lamp, w, old, new);
            }
            vectors = vectors
                .iter()
                .map(|g| {
                    let coords = g
                        .support
                        .iter()
                        .filter(|(&j, _)| j <= at || j > at + s)
                        .map(|(&j, &v)| (if j > at + s { j - s } else { j }, v));
                    lamp.elem(0, coords)
                })
                .collect();
        }
        for c in cur.iter_mut().skip(m + 1) {
            *c += want - have;
        }
    }
    Ok(CommWitness { kind: w.kind, vectors })
}

fn rebuild(lamp: &Lamp, w: &CommWitness, old: &[i64], new: &[i64]) -> Result<CommWitness> {
    let h_old = evaluate(lamp, w);
    let target = lamp.elem(0, new.iter().zip(old).map(|(&j, &i)| (j, h_old.at(i))));
    match w.kind {
        WitnessKind::K(k) if k.abs() == 1 => build_pm1_commutator(lamp, &target, k),
        WitnessKind::K(k) => {
            let mut out = build_2_commutator(lamp, &target, k)?;
            while out.vectors.len() < w.vectors.len() {
                out = extend_witness(lamp, &out)?;
            }
            Ok(out)
        }
        WitnessKind::Pm(_) => PmSolver::new(lamp.base().clone()).build_pm_commutator(lamp, &target),
    }
}
