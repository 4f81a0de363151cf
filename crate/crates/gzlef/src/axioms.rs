//! Weight functions `f : G × Q → {<, =, >}` and evaluators for the
//! universal theories `T_W`, `T_IPMG` and `T_IMG` on the finite fragment
//! over a threshold set `Q`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::norm::{NormTable, NormValue};
use crate::Rational;

const MAX_RECORDED: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
}

impl Sign {
    pub fn of(o: std::cmp::Ordering) -> Sign {
        match o {
            std::cmp::Ordering::Less => Sign::Lt,
            std::cmp::Ordering::Equal => Sign::Eq,
            std::cmp::Ordering::Greater => Sign::Gt,
        }
    }

    /// `<` or `=`.
    pub fn at_most(self) -> bool {
        self != Sign::Gt
    }

    pub fn at_least(self) -> bool {
        self != Sign::Lt
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Lt => "<",
            Sign::Eq => "=",
            Sign::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "<" => Some(Sign::Lt),
            "=" => Some(Sign::Eq),
            ">" => Some(Sign::Gt),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `w_f(g)`: a threshold, or the marker for "above every threshold".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Finite(Rational),
    AboveAll,
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Weight::Finite(q) => s.serialize_str(&q.to_text()),
            Weight::AboveAll => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightFn {
    group: Arc<FiniteGroup>,
    thresholds: Vec<Rational>,
    rows: Vec<Vec<Sign>>,
}

fn normalize_thresholds(q: &[Rational]) -> Result<Vec<Rational>> {
    let mut q = q.to_vec();
    q.sort();
    q.dedup();
    if q.first() != Some(&Rational::from_integer(0)) {
        return Err(Error::BadTable("thresholds must be nonnegative and contain 0".into()));
    }
    Ok(q)
}

impl WeightFn {
    /// Takes rows in the order of the given thresholds; the thresholds are
    /// then sorted together with the columns.
    pub fn new(group: Arc<FiniteGroup>, thresholds: Vec<Rational>, rows: Vec<Vec<Sign>>) -> Result<WeightFn> {
        if rows.len() != group.order() || rows.iter().any(|r| r.len() != thresholds.len()) {
            return Err(Error::BadTable("row shape does not match group order and thresholds".into()));
        }
        let sorted = normalize_thresholds(&thresholds)?;
        if sorted.len() != thresholds.len() {
            return Err(Error::BadTable("duplicate thresholds".into()));
        }
        let perm: Vec<usize> = sorted.iter().map(|q| thresholds.iter().position(|x| x == q).unwrap()).collect();
        let rows = rows.into_iter().map(|r| perm.iter().map(|&k| r[k]).collect()).collect();
        Ok(WeightFn { group, thresholds: sorted, rows })
    }

    /// `f_ℓ(g, q) = □ ⇔ ℓ(g) □ q`.
    pub fn from_norm(t: &NormTable<Rational>, q: &[Rational]) -> Result<WeightFn> {
        let thresholds = normalize_thresholds(q)?;
        let rows = t.values().iter().map(|v| thresholds.iter().map(|q| Sign::of(v.cmp(q))).collect()).collect();
        Ok(WeightFn { group: t.group().clone(), thresholds, rows })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn thresholds(&self) -> &[Rational] {
        &self.thresholds
    }

    pub fn sign(&self, g: usize, k: usize) -> Sign {
        self.rows[g][k]
    }

    pub fn set(&mut self, g: usize, k: usize, s: Sign) {
        self.rows[g][k] = s;
    }

    /// Smallest threshold with sign `<` or `=`. Values strictly between
    /// thresholds come out as the next threshold up.
    pub fn w_of(&self) -> Vec<Weight> {
        self.rows
            .iter()
            .map(|r| match r.iter().position(|s| s.at_most()) {
                Some(k) => Weight::Finite(self.thresholds[k]),
                None => Weight::AboveAll,
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let rows: Map<String, Value> =
            self.rows.iter().enumerate().map(|(g, r)| (g.to_string(), json!(r))).collect();
        json!({
            "thresholds": self.thresholds.iter().map(|q| q.to_text()).collect::<Vec<_>>(),
            "rows": rows,
        })
    }

    pub fn from_json(group: Arc<FiniteGroup>, v: &Value) -> Result<WeightFn> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let thresholds = v["thresholds"]
            .as_array()
            .ok_or_else(|| bad("missing \"thresholds\" array"))?
            .iter()
            .map(|q| match q {
                Value::String(s) => Rational::parse_text(s),
                Value::Number(n) => n.as_i64().map(Rational::from_integer),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("thresholds must be integers or \"p/q\" strings"))?;
        let obj = v["rows"].as_object().ok_or_else(|| bad("missing \"rows\" object"))?;
        let mut rows = vec![None; group.order()];
        for (k, r) in obj {
            let g: usize = k.parse().map_err(|_| bad("row keys must be element indices"))?;
            let signs = r
                .as_array()
                .and_then(|a| a.iter().map(|s| s.as_str().and_then(Sign::parse)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| bad("rows must be arrays of \"<\", \"=\", \">\""))?;
            *rows.get_mut(g).ok_or_else(|| bad("row index out of range"))? = Some(signs);
        }
        let rows = rows.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| bad("missing rows"))?;
        WeightFn::new(group, thresholds, rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theory {
    #[serde(rename = "T_W")]
    W,
    #[serde(rename = "T_IPMG")]
    Ipmg,
    #[serde(rename = "T_IMG")]
    Img,
}

impl Theory {
    pub fn id(self) -> &'static str {
        match self {
            Theory::W => "T_W",
            Theory::Ipmg => "T_IPMG",
            Theory::Img => "T_IMG",
        }
    }

    pub fn parse(s: &str) -> Option<Theory> {
        [Theory::W, Theory::Ipmg, Theory::Img].into_iter().find(|t| t.id().eq_ignore_ascii_case(s))
    }
}

pub const AX_MONOTONE_DOWN: &str = "W1";
pub const AX_MONOTONE_UP: &str = "W2";
pub const AX_ZERO: &str = "W3";
pub const AX_SYMMETRY: &str = "W4";
pub const AX_TRIANGLE: &str = "TRIANGLE";
pub const AX_INVARIANCE: &str = "INVARIANCE";
pub const AX_DEFINITE: &str = "NORM";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: String,
    pub elements: Vec<usize>,
    pub thresholds: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub theory: Theory,
    pub ok: bool,
    pub violations: Vec<AxiomViolation>,
    pub violation_count: usize,
    /// Instances evaluated per axiom.
    pub instances: BTreeMap<String, u64>,
    /// Triangle instances skipped because `q + q′ ∉ Q`.
    pub vacuous_instances: u64,
}

#[derive(Default)]
struct Acc {
    violations: Vec<AxiomViolation>,
    count: usize,
    checked: u64,
}

impl Acc {
    fn push(&mut self, axiom: &str, elements: Vec<usize>, thresholds: Vec<Rational>) {
        self.count += 1;
        if self.violations.len() < MAX_RECORDED {
            let thresholds = thresholds.iter().map(|q| q.to_text()).collect();
            self.violations.push(AxiomViolation { axiom: axiom.to_string(), elements, thresholds });
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.count += o.count;
        self.checked += o.checked;
        let room = MAX_RECORDED - self.violations.len().min(MAX_RECORDED);
        self.violations.extend(o.violations.into_iter().take(room));
        self
    }
}

// Runs `body` for every element in parallel and merges in element order.
fn per_element(order: usize, body: impl Fn(usize, &mut Acc) + Sync) -> Acc {
    (0..order)
        .into_par_iter()
        .map(|x| {
            let mut a = Acc::default();
            body(x, &mut a);
            a
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Acc::default(), Acc::merge)
}

/// Evaluates every axiom instance of `theory` expressible over `Q`.
pub fn check_axioms(f: &WeightFn, theory: Theory) -> AxiomReport {
    let g = f.group.as_ref();
    let q = &f.thresholds;
    let nq = q.len();
    let mut sections: Vec<(&str, Acc)> = Vec::new();

    sections.push((
        AX_MONOTONE_DOWN,
        per_element(g.order(), |x, a| {
            for i in 0..nq {
                for j in i..nq {
                    a.checked += 1;
                    if f.sign(x, i).at_most() && !f.sign(x, j).at_most() {
                        a.push(AX_MONOTONE_DOWN, vec![x], vec![q[i], q[j]]);
                    }
                }
            }
        }),
    ));
    sections.push((
        AX_MONOTONE_UP,
        per_element(g.order(), |x, a| {
            for i in 0..nq {
                for j in i..nq {
                    a.checked += 1;
                    if f.sign(x, j).at_least() && !f.sign(x, i).at_least() {
                        a.push(AX_MONOTONE_UP, vec![x], vec![q[i], q[j]]);
                    }
                }
            }
        }),
    ));
    sections.push((
        AX_ZERO,
        per_element(g.order(), |x, a| {
            a.checked += 1;
            let s = f.sign(x, 0);
            if (x == g.identity() && s != Sign::Eq) || s == Sign::Lt {
                a.push(AX_ZERO, vec![x], vec![q[0]]);
            }
        }),
    ));
    sections.push((
        AX_SYMMETRY,
        per_element(g.order(), |x, a| {
            let y = g.inv(x);
            for k in 0..nq {
                a.checked += 1;
                if f.sign(x, k) != f.sign(y, k) {
                    a.push(AX_SYMMETRY, vec![x, y], vec![q[k]]);
                }
            }
        }),
    ));

    let mut vacuous = 0u64;
    if theory != Theory::W {
        // (i, j) -> index of q_i + q_j in Q
        let mut sums = Vec::new();
        for i in 0..nq {
            for j in 0..nq {
                match q.binary_search(&(q[i] + q[j])) {
                    Ok(k) => sums.push((i, j, k)),
                    Err(_) => vacuous += (g.order() * g.order()) as u64,
                }
            }
        }
        sections.push((
            AX_TRIANGLE,
            per_element(g.order(), |x, a| {
                for y in 0..g.order() {
                    let xy = g.mul(x, y);
                    for &(i, j, k) in &sums {
                        a.checked += 1;
                        if f.sign(x, i).at_most() && f.sign(y, j).at_most() && !f.sign(xy, k).at_most() {
                            a.push(AX_TRIANGLE, vec![x, y], vec![q[i], q[j]]);
                        }
                    }
                }
            }),
        ));
        sections.push((
            AX_INVARIANCE,
            per_element(g.order(), |x, a| {
                for y in 0..g.order() {
                    // y x y⁻¹ is conj(x, y⁻¹)
                    let c = g.conj(x, g.inv(y));
                    for k in 0..nq {
                        a.checked += 1;
                        if f.sign(x, k) != f.sign(c, k) {
                            a.push(AX_INVARIANCE, vec![x, y], vec![q[k]]);
                        }
                    }
                }
            }),
        ));
    }
    if theory == Theory::Img {
        sections.push((
            AX_DEFINITE,
            per_element(g.order(), |x, a| {
                a.checked += 1;
                if x != g.identity() && f.sign(x, 0).at_most() {
                    a.push(AX_DEFINITE, vec![x], vec![q[0]]);
                }
            }),
        ));
    }

    let mut instances = BTreeMap::new();
    let mut all = Acc::default();
    for (name, acc) in sections {
        instances.insert(name.to_string(), acc.checked);
        all = all.merge(acc);
    }
    AxiomReport {
        theory,
        ok: all.count == 0,
        violations: all.violations,
        violation_count: all.count,
        instances,
        vacuous_instances: vacuous,
    }
}

/// `Q = range(ℓ) ∪ {a + b : a, b ∈ range(ℓ)}`, which makes every triangle
/// instance `ℓ(xy) ≤ ℓ(x) + ℓ(y)` expressible.
pub fn closure_thresholds(t: &NormTable<Rational>) -> Vec<Rational> {
    let mut range: Vec<Rational> = t.values().to_vec();
    range.push(Rational::from_integer(0));
    range.sort();
    range.dedup();
    let mut q = range.clone();
    for a in &range {
        for b in &range {
            q.push(a + b);
        }
    }
    q.sort();
    q.dedup();
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::word_norm_bfs;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn s3_word() -> NormTable<Rational> {
        let g = Arc::new(FiniteGroup::builtin("S3").unwrap());
        let gens = g.generators().to_vec();
        let all = crate::norm::conjugacy_closure(&g, &gens).into_iter().collect::<Vec<_>>();
        word_norm_bfs(&g, &all).unwrap()
    }

    #[test]
    fn discrete_table() {
        let g = Arc::new(FiniteGroup::builtin("S3").unwrap());
        let t = NormTable::<Rational>::discrete(g);
        let f = WeightFn::from_norm(&t, &[r(0, 1), r(1, 2), r(1, 1)]).unwrap();
        assert_eq!(f.rows[0], vec![Sign::Eq, Sign::Lt, Sign::Lt]);
        assert_eq!(f.rows[1], vec![Sign::Gt, Sign::Gt, Sign::Eq]);
        assert!(WeightFn::from_norm(&t, &[r(1, 1)]).is_err());
    }

    #[test]
    fn round_trip_and_coarsening() {
        let t = s3_word();
        let q = closure_thresholds(&t);
        let w = WeightFn::from_norm(&t, &q).unwrap().w_of();
        assert!(w.iter().zip(t.values()).all(|(a, b)| *a == Weight::Finite(*b)));
        let coarse = WeightFn::from_norm(&t, &[r(0, 1), r(3, 2)]).unwrap().w_of();
        assert_eq!(coarse[1], Weight::Finite(r(3, 2)));
        let low = WeightFn::from_norm(&t, &[r(0, 1)]).unwrap().w_of();
        assert_eq!(low[1], Weight::AboveAll);
    }

    #[test]
    fn theories_on_word_norm() {
        let t = s3_word();
        let f = WeightFn::from_norm(&t, &closure_thresholds(&t)).unwrap();
        for th in [Theory::W, Theory::Ipmg, Theory::Img] {
            assert!(check_axioms(&f, th).ok, "{:?}", th);
        }
    }

    #[test]
    fn kernel_breaks_norm_axiom() {
        let g = Arc::new(FiniteGroup::builtin("S3").unwrap());
        // sign pseudo-norm: 0 on A3, 1 on the transpositions
        let vals: Vec<Rational> = g.elements().iter().map(|p| if perm_parity(p.images()) { r(0, 1) } else { r(1, 1) }).collect();
        let t = NormTable::new(g, vals).unwrap();
        let f = WeightFn::from_norm(&t, &closure_thresholds(&t)).unwrap();
        assert!(check_axioms(&f, Theory::Ipmg).ok);
        let rep = check_axioms(&f, Theory::Img);
        assert!(!rep.ok && rep.violations.iter().all(|v| v.axiom == AX_DEFINITE));
    }

    fn perm_parity(images: &[usize]) -> bool {
        let mut even = true;
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if images[i] > images[j] {
                    even = !even;
                }
            }
        }
        even
    }

    #[test]
    fn planted_monotonicity_failure() {
        let t = s3_word();
        let mut f = WeightFn::from_norm(&t, &[r(0, 1), r(1, 1), r(2, 1)]).unwrap();
        f.set(1, 1, Sign::Lt);
        f.set(1, 2, Sign::Gt);
        let rep = check_axioms(&f, Theory::W);
        assert!(rep.violations.iter().any(|v| v.axiom == AX_MONOTONE_DOWN && v.elements == vec![1]));
    }

    #[test]
    fn json_round_trip() {
        let t = s3_word();
        let f = WeightFn::from_norm(&t, &[r(0, 1), r(1, 2), r(2, 1)]).unwrap();
        let g = WeightFn::from_json(t.group().clone(), &f.to_json()).unwrap();
        assert_eq!(g.rows, f.rows);
        assert_eq!(g.thresholds, f.thresholds);
    }
}
