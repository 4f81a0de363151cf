//! Pseudo-norms on finite groups: tables, axiom validators, transforms and
//! breadth-first word norms.
//!
//! Tables are generic over the value type. [`crate::Rational`] is the exact
//! default; `f64` and plain integers are also supported where it makes sense.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{generate_group, FiniteGroup, GroupOps, Perm};
use crate::Rational;

pub const AXIOM_IDENTITY: &str = "N1";
pub const AXIOM_SYMMETRY: &str = "N2";
pub const AXIOM_TRIANGLE: &str = "N3";
pub const AXIOM_DEFINITE: &str = "N1'";
pub const AXIOM_INVARIANCE: &str = "INV";

// At most this many violations keep their witnesses; the rest are counted.
const MAX_RECORDED: usize = 64;

/// Minimal bound for values the validators can inspect.
pub trait CheckValue:
    Clone + PartialOrd + Zero + One + Add<Output = Self> + fmt::Display + Send + Sync
{
}

impl<T> CheckValue for T where
    T: Clone + PartialOrd + Zero + One + Add<Output = T> + fmt::Display + Send + Sync
{
}

/// Values that the norm transforms can produce.
pub trait NormValue: CheckValue + Sub<Output = Self> + fmt::Debug {
    fn from_ratio(numer: i64, denom: i64) -> Self;
    /// Smallest integer `>=` self.
    fn ceil_value(&self) -> Self;
    fn to_text(&self) -> String;
    fn parse_text(s: &str) -> Option<Self>;
}

impl NormValue for Rational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(numer, denom)
    }
    fn ceil_value(&self) -> Self {
        self.ceil()
    }
    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let q: i64 = q.trim().parse().ok()?;
                let p: i64 = p.trim().parse().ok()?;
                (q != 0).then(|| Rational::new(p, q))
            }
            None => Some(Rational::from_integer(s.parse().ok()?)),
        }
    }
}

impl NormValue for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn ceil_value(&self) -> Self {
        self.ceil()
    }
    fn to_text(&self) -> String {
        format!("{}", self)
    }
    fn parse_text(s: &str) -> Option<Self> {
        match s.split_once('/') {
            Some((p, q)) => Some(p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?),
            None => s.trim().parse().ok(),
        }
    }
}

/// One value per group element.
#[derive(Clone, Debug)]
pub struct NormTable<V> {
    group: Arc<FiniteGroup>,
    values: Vec<V>,
}

impl<V: NormValue> NormTable<V> {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<V>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::BadTable(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        if let Some(v) = values.iter().find(|v| **v < V::zero()) {
            return Err(Error::BadTable(format!("negative value {}", v.to_text())));
        }
        Ok(NormTable { group, values })
    }

    /// The {0,1} norm: 0 at the identity, 1 elsewhere.
    pub fn discrete(group: Arc<FiniteGroup>) -> Self {
        let values = (0..group.order()).map(|i| if i == 0 { V::zero() } else { V::one() }).collect();
        NormTable { group, values }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &V {
        &self.values[i]
    }

    pub fn value_of_perm(&self, p: &Perm) -> Option<&V> {
        self.group.index_of(p).map(|i| &self.values[i])
    }

    /// `d(g, h) = ℓ(g h⁻¹)`
    pub fn distance(&self, g: usize, h: usize) -> &V {
        &self.values[self.group.mul(g, self.group.inv(h))]
    }

    /// `[{"element": i, "value": "p/q"}, ...]`
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| json!({"element": i, "value": v.to_text()}))
                .collect(),
        )
    }

    pub fn from_json(group: Arc<FiniteGroup>, value: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            element: usize,
            value: String,
        }
        let entries: Vec<Entry> =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut values: Vec<Option<V>> = vec![None; group.order()];
        for e in entries {
            let v = V::parse_text(&e.value).ok_or_else(|| Error::Parse(format!("bad value {:?}", e.value)))?;
            let slot = values
                .get_mut(e.element)
                .ok_or_else(|| Error::BadTable(format!("element {} out of range", e.element)))?;
            *slot = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::BadTable(format!("missing element {}", i))))
            .collect::<Result<Vec<_>>>()?;
        NormTable::new(group, values)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub witnesses: Vec<usize>,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub notices: Vec<String>,
}

impl ValidationReport {
    fn new() -> Self {
        ValidationReport { ok: true, ..Default::default() }
    }

    fn push(&mut self, axiom: &str, witnesses: Vec<usize>, values: Vec<String>) {
        self.ok = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED {
            self.violations.push(Violation { axiom: axiom.to_string(), witnesses, values });
        }
    }

    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.ok &= other.ok;
        self.violation_count += other.violation_count;
        for v in other.violations {
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(v);
            }
        }
        self.notices.extend(other.notices);
        self
    }

    pub fn has(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

fn check_identity_symmetry<G: GroupOps, V: CheckValue>(g: &G, values: &[V], r: &mut ValidationReport) {
    let e = g.identity();
    if !values[e].is_zero() {
        r.push(AXIOM_IDENTITY, vec![e], vec![values[e].to_string()]);
    }
    for a in 0..g.order() {
        let b = g.inv(a);
        if a < b && values[a] != values[b] {
            r.push(AXIOM_SYMMETRY, vec![a, b], vec![values[a].to_string(), values[b].to_string()]);
        }
    }
}

fn check_definite<G: GroupOps, V: CheckValue>(g: &G, values: &[V], r: &mut ValidationReport) {
    for a in 0..g.order() {
        if a != g.identity() && values[a].is_zero() {
            r.push(AXIOM_DEFINITE, vec![a], vec![values[a].to_string()]);
        }
    }
}

/// Exhaustive check of `ℓ(1) = 0`, `ℓ(g) = ℓ(g⁻¹)` and `ℓ(gh) ≤ ℓ(g) + ℓ(h)`.
pub fn validate_pseudo_norm_on<G: GroupOps, V: CheckValue>(g: &G, values: &[V]) -> ValidationReport {
    let mut r = ValidationReport::new();
    check_identity_symmetry(g, values, &mut r);
    for a in 0..g.order() {
        for b in 0..g.order() {
            let c = g.mul(a, b);
            if values[c] > values[a].clone() + values[b].clone() {
                r.push(
                    AXIOM_TRIANGLE,
                    vec![a, b],
                    vec![values[a].to_string(), values[b].to_string(), values[c].to_string()],
                );
            }
        }
    }
    r
}

/// Pseudo-norm axioms plus `ℓ(g) = 0 ⇒ g = 1`.
pub fn validate_norm_on<G: GroupOps, V: CheckValue>(g: &G, values: &[V]) -> ValidationReport {
    let mut r = validate_pseudo_norm_on(g, values);
    check_definite(g, values, &mut r);
    r
}

/// Exhaustive check of `ℓ(h⁻¹gh) = ℓ(g)`.
pub fn validate_invariance_on<G: GroupOps, V: CheckValue>(g: &G, values: &[V]) -> ValidationReport {
    let all: Vec<usize> = (0..g.order()).collect();
    let mut r = validate_invariance_by_conjugators(g, values, &all);
    r.notices.clear();
    r
}

/// Invariance under conjugation by the listed elements. If they generate the
/// group this is equivalent to full invariance.
pub fn validate_invariance_by_conjugators<G: GroupOps, V: CheckValue>(
    g: &G,
    values: &[V],
    conjugators: &[usize],
) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.notices.push(format!("invariance checked against {} conjugators", conjugators.len()));
    for a in 0..g.order() {
        for &h in conjugators {
            let c = g.conj(a, h);
            if values[c] != values[a] {
                r.push(AXIOM_INVARIANCE, vec![a, h], vec![values[a].to_string(), values[c].to_string()]);
            }
        }
    }
    r
}

/// Norm check for tables too large for the quadratic triangle scan.
///
/// `N1`, `N2` and `N1'` are checked exhaustively. `N3` is certified by
/// showing the table is the word metric over the symmetric set `gens`:
/// every non-identity element has a neighbour one step closer, and no edge
/// increases the value by more than one.
pub fn validate_norm_certified<G: GroupOps>(g: &G, values: &[u32], gens: &[usize]) -> ValidationReport {
    let mut r = ValidationReport::new();
    check_identity_symmetry(g, values, &mut r);
    check_definite(g, values, &mut r);
    r.notices.push(format!("triangle inequality certified as word metric over {} generators", gens.len()));
    let gen_set: BTreeSet<usize> = gens.iter().copied().collect();
    if let Some(&s) = gens.iter().find(|&&s| !gen_set.contains(&g.inv(s))) {
        r.push(AXIOM_TRIANGLE, vec![s], vec!["generating set not symmetric".into()]);
        return r;
    }
    let max = values.iter().copied().max().unwrap_or(0);
    let found: Vec<(Vec<usize>, Vec<String>)> = (0..g.order())
        .into_par_iter()
        .flat_map_iter(|a| {
            let va = values[a];
            let mut bad = Vec::new();
            if a != g.identity() && !gens.iter().any(|&s| values[g.mul(a, s)] + 1 == va) {
                bad.push((vec![a], vec![va.to_string(), "no descending edge".into()]));
            }
            if va + 1 < max {
                for &s in gens {
                    let b = g.mul(a, s);
                    if values[b] > va + 1 {
                        bad.push((vec![a, s], vec![va.to_string(), "1".into(), values[b].to_string()]));
                    }
                }
            }
            bad
        })
        .collect();
    for (w, v) in found {
        r.push(AXIOM_TRIANGLE, w, v);
    }
    r
}

pub fn validate_pseudo_norm<V: NormValue>(t: &NormTable<V>) -> ValidationReport {
    validate_pseudo_norm_on(t.group.as_ref(), &t.values)
}

pub fn validate_norm<V: NormValue>(t: &NormTable<V>) -> ValidationReport {
    validate_norm_on(t.group.as_ref(), &t.values)
}

pub fn validate_invariance<V: NormValue>(t: &NormTable<V>) -> ValidationReport {
    validate_invariance_by_conjugators(t.group.as_ref(), &t.values, t.group.generators())
}

/// The same values on a subgroup, re-enumerated as a group of its own.
pub fn restrict_norm<V: NormValue>(t: &NormTable<V>, h: &BTreeSet<usize>) -> Result<NormTable<V>> {
    let (sub, embed) = t.group.subgroup(h)?;
    let values = embed.iter().map(|&i| t.values[i].clone()).collect();
    NormTable::new(Arc::new(sub), values)
}

/// The quotient `G/N` as a permutation group on cosets.
#[derive(Debug)]
pub struct Quotient {
    pub group: Arc<FiniteGroup>,
    /// Image of each element of `G` in the quotient.
    pub projection: Vec<usize>,
}

pub fn quotient_group(g: &FiniteGroup, n: &BTreeSet<usize>) -> Result<Quotient> {
    if !g.is_normal(n) {
        return Err(if g.is_subgroup(n) { Error::NotNormal } else { Error::NotSubgroup });
    }
    let order = g.order();
    let mut coset = vec![usize::MAX; order];
    let mut reps = Vec::new();
    for x in 0..order {
        if coset[x] == usize::MAX {
            let id = reps.len();
            reps.push(x);
            for &m in n {
                coset[g.mul(x, m)] = id;
            }
        }
    }
    // right multiplication on cosets
    let action = |y: usize| -> Result<Perm> { Perm::new(reps.iter().map(|&r| coset[g.mul(r, y)]).collect()) };
    let gens = g.generators().iter().map(|&s| action(s)).collect::<Result<Vec<_>>>()?;
    let q = generate_group(&gens)?;
    let projection = (0..order)
        .map(|x| {
            let p = action(x)?;
            q.index_of(&p).ok_or_else(|| Error::NotInGroup(p.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Quotient { group: Arc::new(q), projection })
}

/// Coset value = minimum over the coset.
pub fn quotient_norm<V: NormValue>(t: &NormTable<V>, n: &BTreeSet<usize>) -> Result<(NormTable<V>, Quotient)> {
    let q = quotient_group(&t.group, n)?;
    let mut values: Vec<Option<V>> = vec![None; q.group.order()];
    for (x, &c) in q.projection.iter().enumerate() {
        let v = &t.values[x];
        match &values[c] {
            Some(cur) if cur <= v => {}
            _ => values[c] = Some(v.clone()),
        }
    }
    let values = values.into_iter().map(|v| v.expect("projection is onto")).collect();
    Ok((NormTable::new(q.group.clone(), values)?, q))
}

/// Replaces the zero values off the identity by `eps`.
pub fn plus_epsilon<V: NormValue>(t: &NormTable<V>, eps: V) -> Result<NormTable<V>> {
    let min_nonzero = t.values.iter().filter(|v| !v.is_zero()).fold(None::<&V>, |m, v| match m {
        Some(m) if m <= v => Some(m),
        _ => Some(v),
    });
    let too_big = min_nonzero.map(|m| eps >= *m).unwrap_or(false);
    if eps <= V::zero() || too_big {
        return Err(Error::EpsilonOutOfRange(eps.to_text()));
    }
    let values = t
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| if i != t.group.identity() && v.is_zero() { eps.clone() } else { v.clone() })
        .collect();
    NormTable::new(t.group.clone(), values)
}

/// Rounds every value up: a value in `(n, n+1]` becomes `n + 1`.
pub fn integer_round<V: NormValue>(t: &NormTable<V>) -> NormTable<V> {
    NormTable { group: t.group.clone(), values: t.values.iter().map(|v| v.ceil_value()).collect() }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `ℓ_p(g) = max { 1/p^s : g ∉ N_s }` for the chain `N_0 > N_1 > … > N_k = {1}`,
/// indexed from 0 in list order.
pub fn profinite_norm<V: NormValue>(g: Arc<FiniteGroup>, chain: &[BTreeSet<usize>], p: u64) -> Result<NormTable<V>> {
    if !is_prime(p) {
        return Err(Error::BadChain(format!("{} is not prime", p)));
    }
    let last = chain.last().ok_or_else(|| Error::BadChain("empty chain".into()))?;
    if last.len() != 1 || !last.contains(&g.identity()) {
        return Err(Error::BadChain("last subgroup must be trivial".into()));
    }
    for (s, n) in chain.iter().enumerate() {
        if !g.is_normal(n) {
            return Err(Error::BadChain(format!("member {} is not a normal subgroup", s)));
        }
        if s > 0 && !(n.is_subset(&chain[s - 1]) && n.len() < chain[s - 1].len()) {
            return Err(Error::BadChain(format!("member {} does not strictly descend", s)));
        }
    }
    let values = (0..g.order())
        .map(|x| match chain.iter().position(|n| !n.contains(&x)) {
            None => V::zero(),
            Some(s) => V::from_ratio(1, (p as i64).pow(s as u32)),
        })
        .collect();
    NormTable::new(g, values)
}

/// Closes `s ∪ s⁻¹` under conjugation and drops the identity.
pub fn conjugacy_closure(g: &FiniteGroup, s: &[usize]) -> BTreeSet<usize> {
    let cls = g.classes();
    let mut out = BTreeSet::new();
    for &x in s {
        for y in [x, g.inv(x)] {
            out.extend(cls.classes[cls.class_of[y]].iter().copied());
        }
    }
    out.remove(&g.identity());
    out
}

/// Symmetrizes a generating set and strips the identity, noting each change.
pub fn normalize_generators(g: &FiniteGroup, gens: &[usize]) -> (Vec<usize>, Vec<String>) {
    let mut notes = Vec::new();
    let mut set: BTreeSet<usize> = gens.iter().copied().collect();
    if set.remove(&g.identity()) {
        notes.push("identity removed from generating set".to_string());
    }
    let before = set.len();
    let inverses: Vec<usize> = set.iter().map(|&x| g.inv(x)).collect();
    set.extend(inverses);
    if set.len() != before {
        notes.push(format!("generating set symmetrized ({} -> {} elements)", before, set.len()));
    }
    (set.into_iter().collect(), notes)
}

/// Breadth-first word lengths, plus any normalization notices.
pub fn word_norm_bfs_with_notes<V: NormValue>(g: &Arc<FiniteGroup>, gens: &[usize]) -> Result<(NormTable<V>, Vec<String>)> {
    let (gens, notes) = normalize_generators(g, gens);
    let order = g.order();
    let mut dist = vec![u64::MAX; order];
    dist[g.identity()] = 0;
    let mut queue = VecDeque::from([g.identity()]);
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for &s in &gens {
            let y = g.mul(x, s);
            if dist[y] == u64::MAX {
                dist[y] = dist[x] + 1;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    if reached != order {
        return Err(Error::NotGenerating { reached, order });
    }
    let values = dist.into_iter().map(|d| V::from_ratio(d as i64, 1)).collect();
    Ok((NormTable::new(g.clone(), values)?, notes))
}

pub fn word_norm_bfs<V: NormValue>(g: &Arc<FiniteGroup>, gens: &[usize]) -> Result<NormTable<V>> {
    word_norm_bfs_with_notes(g, gens).map(|(t, _)| t)
}

/// Weighted word norm: the cheapest product of generators, each `s` costing
/// `weight(s)`. The weights should be symmetric under `s ↦ s⁻¹`; elements
/// the generators do not reach are an error.
pub fn weighted_word_norm<V: NormValue>(g: &Arc<FiniteGroup>, weights: &[(usize, V)]) -> Result<NormTable<V>> {
    let n = g.order();
    let mut dist: Vec<Option<V>> = vec![None; n];
    let mut done = vec![false; n];
    dist[g.identity()] = Some(V::zero());
    // dense Dijkstra; groups here are small
    while let Some(a) = (0..n)
        .filter(|&i| !done[i] && dist[i].is_some())
        .min_by(|&i, &j| dist[i].partial_cmp(&dist[j]).unwrap_or(std::cmp::Ordering::Equal))
    {
        done[a] = true;
        let da = dist[a].clone().expect("selected vertices are reached");
        for (s, w) in weights {
            let b = g.mul(a, *s);
            let cand = da.clone() + w.clone();
            if dist[b].as_ref().map_or(true, |cur| cand < *cur) {
                dist[b] = Some(cand);
            }
        }
    }
    let reached = dist.iter().filter(|d| d.is_some()).count();
    if reached < n {
        return Err(Error::NotGenerating { reached, order: n });
    }
    NormTable::new(g.clone(), dist.into_iter().map(|d| d.expect("checked above")).collect())
}

/// Elements within distance `r` of the identity.
pub fn ball<V: NormValue>(t: &NormTable<V>, r: &V) -> BTreeSet<usize> {
    (0..t.values.len()).filter(|&i| t.values[i] <= *r).collect()
}
