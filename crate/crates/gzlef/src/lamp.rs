//! Elements of `G_Z = H ⋊ Z` with `H = ⊕_Z P`, and of the truncations
//! `G_[-n,n]` where indices and shifts live in `Z_{2n+1}` represented on
//! `{-n, …, n}`.
//!
//! An element `h̄ tᵏ` is stored as its support map and shift. The product
//! is `(h̄, k)(ḡ, l) = h̄ αᵏ(ḡ) t^{k+l}` with `α(ḡ)_i = g_{i+1}`, so the
//! coordinate of `ḡ` at `j` lands at `j - k`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Infinite,
    Truncated(i64),
}

impl Mode {
    /// Window width `2n+1`, or `None` for the infinite group.
    pub fn width(self) -> Option<i64> {
        match self {
            Mode::Infinite => None,
            Mode::Truncated(n) => Some(2 * n + 1),
        }
    }

    /// Reduces an index or shift into `{-n, …, n}`.
    pub fn reduce(self, i: i64) -> i64 {
        match self {
            Mode::Infinite => i,
            Mode::Truncated(n) => (i + n).rem_euclid(2 * n + 1) - n,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampElem {
    pub mode: Mode,
    pub shift: i64,
    /// Nontrivial coordinates only, as element indices of the base group.
    pub support: BTreeMap<i64, usize>,
}

impl fmt::Debug for LampElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}t^{}", self.support, self.shift)
    }
}

impl LampElem {
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_shift_zero(&self) -> bool {
        self.shift == 0
    }

    pub fn i_min(&self) -> Option<i64> {
        self.support.keys().next().copied()
    }

    pub fn i_max(&self) -> Option<i64> {
        self.support.keys().next_back().copied()
    }

    /// Coordinate at `i`, with `0` (the identity of `P`) off the support.
    pub fn at(&self, i: i64) -> usize {
        self.support.get(&i).copied().unwrap_or(0)
    }

    pub fn indices(&self) -> Vec<i64> {
        self.support.keys().copied().collect()
    }

    pub fn values(&self) -> Vec<usize> {
        self.support.values().copied().collect()
    }

    pub fn stats(&self) -> SupportStats {
        let (i_min, i_max) = (self.i_min(), self.i_max());
        let n_value = [i_min.unwrap_or(0).abs(), i_max.unwrap_or(0).abs(), self.shift.abs()]
            .into_iter()
            .max()
            .unwrap_or(0) as u64;
        SupportStats { i_min, i_max, weight: self.support.len(), n_value }
    }
}

/// `i_min`, `i_max`, weight `ω` and `N(h̄tᵐ) = max{|i_min|, |i_max|, |m|}`.
/// The bounds are `None` when the support is empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupportStats {
    pub i_min: Option<i64>,
    pub i_max: Option<i64>,
    pub weight: usize,
    pub n_value: u64,
}

/// Arithmetic context: a base group and a mode.
#[derive(Clone, Debug)]
pub struct Lamp {
    base: Arc<FiniteGroup>,
    mode: Mode,
}

impl Lamp {
    pub fn new(base: Arc<FiniteGroup>, mode: Mode) -> Result<Lamp> {
        if let Mode::Truncated(n) = mode {
            if n < 1 {
                return Err(Error::Unsupported(format!("truncation window n = {} (need n >= 1)", n)));
            }
        }
        Ok(Lamp { base, mode })
    }

    pub fn infinite(base: Arc<FiniteGroup>) -> Lamp {
        Lamp { base, mode: Mode::Infinite }
    }

    pub fn truncated(base: Arc<FiniteGroup>, n: i64) -> Result<Lamp> {
        Lamp::new(base, Mode::Truncated(n))
    }

    pub fn base(&self) -> &Arc<FiniteGroup> {
        &self.base
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The same base group in another mode.
    pub fn with_mode(&self, mode: Mode) -> Result<Lamp> {
        Lamp::new(self.base.clone(), mode)
    }

    pub fn identity(&self) -> LampElem {
        LampElem { mode: self.mode, shift: 0, support: BTreeMap::new() }
    }

    pub fn t_pow(&self, k: i64) -> LampElem {
        LampElem { mode: self.mode, shift: self.mode.reduce(k), support: BTreeMap::new() }
    }

    pub fn t(&self) -> LampElem {
        self.t_pow(1)
    }

    /// Builds an element from coordinates; identity entries are dropped and
    /// later entries at the same (reduced) index multiply on the right.
    pub fn elem<I: IntoIterator<Item = (i64, usize)>>(&self, shift: i64, coords: I) -> LampElem {
        let mut support = BTreeMap::new();
        for (i, g) in coords {
            self.put(&mut support, self.mode.reduce(i), g);
        }
        LampElem { mode: self.mode, shift: self.mode.reduce(shift), support }
    }

    /// Shift-0 element with consecutive values starting at index `start`.
    pub fn from_run(&self, start: i64, values: &[usize]) -> LampElem {
        self.elem(0, values.iter().enumerate().map(|(k, &g)| (start + k as i64, g)))
    }

    pub fn single(&self, i: i64, g: usize) -> LampElem {
        self.elem(0, [(i, g)])
    }

    /// The element `h̄ tᵏ` with the same support as `x`.
    pub fn with_shift(&self, x: &LampElem, k: i64) -> LampElem {
        LampElem { mode: self.mode, shift: self.mode.reduce(k), support: x.support.clone() }
    }

    /// The `H`-part of `x` (shift dropped).
    pub fn torsion(&self, x: &LampElem) -> LampElem {
        self.with_shift(x, 0)
    }

    fn put(&self, support: &mut BTreeMap<i64, usize>, i: i64, g: usize) {
        let cur = support.get(&i).copied().unwrap_or(0);
        let v = self.base.mul(cur, g);
        if v == 0 {
            support.remove(&i);
        } else {
            support.insert(i, v);
        }
    }

    fn check(&self, x: &LampElem) -> Result<()> {
        if x.mode != self.mode {
            return Err(Error::ModeMismatch);
        }
        Ok(())
    }

    pub fn try_mul(&self, a: &LampElem, b: &LampElem) -> Result<LampElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    /// `(h̄, k)(ḡ, l) = h̄ αᵏ(ḡ) t^{k+l}`. Panics on a mode mismatch; see
    /// [`Lamp::try_mul`] for the checked form.
    pub fn mul(&self, a: &LampElem, b: &LampElem) -> LampElem {
        assert!(a.mode == self.mode && b.mode == self.mode, "mode mismatch");
        let mut support = a.support.clone();
        for (&j, &g) in &b.support {
            self.put(&mut support, self.mode.reduce(j - a.shift), g);
        }
        LampElem { mode: self.mode, shift: self.mode.reduce(a.shift + b.shift), support }
    }

    pub fn product<'a, I: IntoIterator<Item = &'a LampElem>>(&self, xs: I) -> LampElem {
        xs.into_iter().fold(self.identity(), |acc, x| self.mul(&acc, x))
    }

    /// `(h̄, k)⁻¹ = (α⁻ᵏ(h̄⁻¹), -k)`
    pub fn inverse(&self, x: &LampElem) -> LampElem {
        let support = x
            .support
            .iter()
            .map(|(&j, &g)| (self.mode.reduce(j + x.shift), self.base.inv(g)))
            .collect();
        LampElem { mode: self.mode, shift: self.mode.reduce(-x.shift), support }
    }

    /// `y⁻¹ x y`
    pub fn conjugate(&self, x: &LampElem, y: &LampElem) -> LampElem {
        self.mul(&self.mul(&self.inverse(y), x), y)
    }

    /// `αᵏ` on `H`: indices decrease by `k`.
    pub fn alpha_pow(&self, x: &LampElem, k: i64) -> Result<LampElem> {
        self.check(x)?;
        if x.shift != 0 {
            return Err(Error::NonzeroShift);
        }
        Ok(self.alpha_unchecked(x, k))
    }

    fn alpha_unchecked(&self, x: &LampElem, k: i64) -> LampElem {
        let support = x.support.iter().map(|(&j, &g)| (self.mode.reduce(j - k), g)).collect();
        LampElem { mode: self.mode, shift: 0, support }
    }

    /// `ḡ α(ḡ⁻¹)`, coordinate `g_i g_{i+1}⁻¹` at `i`.
    pub fn plus_comm(&self, g: &LampElem) -> LampElem {
        let gi = self.inverse(&self.torsion(g));
        self.mul(&self.torsion(g), &self.alpha_unchecked(&gi, 1))
    }

    /// `α(ḡ) ḡ⁻¹`, coordinate `g_{i+1} g_i⁻¹` at `i`.
    pub fn minus_comm(&self, g: &LampElem) -> LampElem {
        let g0 = self.torsion(g);
        self.mul(&self.alpha_unchecked(&g0, 1), &self.inverse(&g0))
    }

    /// Product of the support values in increasing index order.
    pub fn ordered_product(&self, x: &LampElem) -> usize {
        x.support.values().fold(0, |acc, &g| self.base.mul(acc, g))
    }

    /// Product of the support values in decreasing index order.
    pub fn reverse_product(&self, x: &LampElem) -> usize {
        x.support.values().rev().fold(0, |acc, &g| self.base.mul(acc, g))
    }

    /// Whether the `H`-part of `x` is a `[1,t]`-commutator (telescoping).
    pub fn is_plus1_comm(&self, x: &LampElem) -> bool {
        self.ordered_product(x) == 0
    }

    pub fn is_minus1_comm(&self, x: &LampElem) -> bool {
        self.reverse_product(x) == 0
    }

    pub fn in_single_support(&self, x: &LampElem) -> bool {
        x.shift == 0 && x.support.len() == 1
    }

    pub fn in_tplus(&self, x: &LampElem) -> bool {
        x.shift == self.mode.reduce(1) && self.is_plus1_comm(x)
    }

    pub fn in_tminus(&self, x: &LampElem) -> bool {
        x.shift == self.mode.reduce(-1) && self.is_minus1_comm(x)
    }

    pub fn in_sbar(&self, x: &LampElem) -> bool {
        self.in_single_support(x) || self.in_tplus(x) || self.in_tminus(x)
    }

    /// A vector `ḡ` with `ḡ α(ḡ⁻¹) = c`, supported strictly inside
    /// `(i_min(c), i_max(c)]`, if `c` telescopes.
    pub fn solve_plus(&self, c: &LampElem) -> Option<LampElem> {
        if !self.is_plus1_comm(c) {
            return None;
        }
        let (lo, hi) = match (c.i_min(), c.i_max()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Some(self.identity()),
        };
        let mut prefix = 0;
        let mut coords = Vec::new();
        for j in lo + 1..=hi {
            prefix = self.base.mul(prefix, c.at(j - 1));
            coords.push((j, self.base.inv(prefix)));
        }
        Some(self.elem(0, coords))
    }

    /// A vector `ḡ` with `α(ḡ) ḡ⁻¹ = c`, if `c` telescopes in decreasing order.
    pub fn solve_minus(&self, c: &LampElem) -> Option<LampElem> {
        if !self.is_minus1_comm(c) {
            return None;
        }
        let (lo, hi) = match (c.i_min(), c.i_max()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Some(self.identity()),
        };
        let mut prefix = 0;
        let mut coords = Vec::new();
        for j in lo + 1..=hi {
            prefix = self.base.mul(c.at(j - 1), prefix);
            coords.push((j, prefix));
        }
        Some(self.elem(0, coords))
    }

    /// `{"mode": ..., "shift": k, "support": {"<idx>": [images...]}}`
    pub fn to_json(&self, x: &LampElem) -> Value {
        let support: Map<String, Value> = x
            .support
            .iter()
            .map(|(i, &g)| (i.to_string(), json!(self.base.element(g).images())))
            .collect();
        json!({"mode": x.mode, "shift": x.shift, "support": support})
    }

    /// Parses an element; a missing `mode` means this context's mode.
    pub fn from_json(&self, v: &Value) -> Result<LampElem> {
        #[derive(Deserialize)]
        struct Raw {
            mode: Option<Mode>,
            #[serde(default)]
            shift: i64,
            #[serde(default)]
            support: BTreeMap<String, Vec<usize>>,
        }
        let raw: Raw = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.mode.is_some_and(|m| m != self.mode) {
            return Err(Error::ModeMismatch);
        }
        let mut coords = Vec::new();
        for (k, images) in raw.support {
            let i: i64 = k.trim().parse().map_err(|_| Error::Parse(format!("bad index {:?}", k)))?;
            if let Mode::Truncated(n) = self.mode {
                if i.abs() > n {
                    return Err(Error::Parse(format!("index {} outside [-{}, {}]", i, n, n)));
                }
            }
            coords.push((i, self.base.index_of_images(&images)?));
        }
        Ok(self.elem(raw.shift, coords))
    }

    /// Re-reads an element in another mode with the same coordinates.
    pub fn reinterpret(&self, x: &LampElem, target: &Lamp) -> LampElem {
        target.elem(x.shift, x.support.iter().map(|(&i, &g)| (i, g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> Lamp {
        Lamp::infinite(Arc::new(FiniteGroup::builtin("S3").unwrap()))
    }

    #[test]
    fn t_conjugation_is_alpha() {
        let l = s3();
        let g = l.from_run(0, &[1, 2, 3]);
        let lhs = l.mul(&l.mul(&l.t(), &g), &l.t_pow(-1));
        assert_eq!(lhs, l.alpha_pow(&g, 1).unwrap());
    }

    #[test]
    fn alpha_moves_support_down() {
        let l = s3();
        let x = l.single(0, 1);
        assert_eq!(l.alpha_pow(&x, 1).unwrap().i_min(), Some(-1));
        let back = l.alpha_pow(&l.alpha_pow(&x, 1).unwrap(), -1).unwrap();
        assert_eq!(back, x);
        assert_eq!(l.alpha_pow(&l.t(), 1), Err(Error::NonzeroShift));
    }

    #[test]
    fn truncated_alpha_wraps() {
        let l = Lamp::truncated(Arc::new(FiniteGroup::builtin("S3").unwrap()), 1).unwrap();
        let x = l.single(-1, 1);
        assert_eq!(l.alpha_pow(&x, 1).unwrap().indices(), vec![1]);
        assert_eq!(l.t_pow(3), l.identity());
    }

    #[test]
    fn stats_examples() {
        let l = s3();
        let s = l.t_pow(3).stats();
        assert_eq!((s.weight, s.n_value, s.i_min), (0, 3, None));
        let x = l.elem(1, [(-2, 1), (5, 2)]);
        let s = x.stats();
        assert_eq!((s.i_min, s.i_max, s.weight, s.n_value), (Some(-2), Some(5), 2, 5));
    }

    #[test]
    fn tplus_examples() {
        let l = s3();
        assert!(l.in_tplus(&l.t()));
        let g = 4;
        let x = l.elem(1, [(0, g), (1, l.base().inv(g))]);
        assert!(l.in_tplus(&x));
        assert!(!l.in_tminus(&x));
        assert!(!l.in_sbar(&l.identity()));
    }

    #[test]
    fn solvers_reproduce_commutators() {
        let l = s3();
        let g = l.from_run(-2, &[1, 3, 0, 5]);
        let c = l.plus_comm(&g);
        assert_eq!(l.plus_comm(&l.solve_plus(&c).unwrap()), c);
        let c = l.minus_comm(&g);
        assert_eq!(l.minus_comm(&l.solve_minus(&c).unwrap()), c);
    }

    #[test]
    fn json_round_trip() {
        let l = s3();
        let x = l.elem(-2, [(-1, 1), (4, 5)]);
        let j = l.to_json(&x);
        assert_eq!(j["mode"], "infinite");
        assert_eq!(l.from_json(&j).unwrap(), x);
        let lt = l.with_mode(Mode::Truncated(2)).unwrap();
        let jt = lt.to_json(&lt.t());
        assert_eq!(jt["mode"]["truncated"], 2);
        assert_eq!(l.from_json(&jt), Err(Error::ModeMismatch));
    }

    #[test]
    fn window_zero_rejected() {
        assert!(Lamp::truncated(Arc::new(FiniteGroup::builtin("S3").unwrap()), 0).is_err());
    }
}
