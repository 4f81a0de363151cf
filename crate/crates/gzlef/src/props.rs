//! The base-group statements S1 to S4, the predicate Ξ, and instance
//! solvers for the equations the commutator constructions need.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Statement {
    S1,
    S2,
    S3,
    S4,
}

impl Statement {
    pub const ALL: [Statement; 4] = [Statement::S1, Statement::S2, Statement::S3, Statement::S4];

    pub fn id(self) -> &'static str {
        match self {
            Statement::S1 => "S1",
            Statement::S2 => "S2",
            Statement::S3 => "S3",
            Statement::S4 => "S4",
        }
    }
}

/// Outcome of a statement check. The witness is a failing tuple for S1 to
/// S3 and the realizing triple for S4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropReport {
    pub property: Statement,
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
}

/// How the universally quantified variables are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// One representative per conjugacy class where the statement allows it.
    #[default]
    Reduced,
    /// Every tuple. Slow; kept as an oracle.
    Raw,
}

/// `Ξ(u1, u2, u3)`: `u3 ∈ C(u2⁻¹) C(u1⁻¹)`.
pub fn xi(g: &FiniteGroup, u1: usize, u2: usize, u3: usize) -> bool {
    g.class_product_contains(g.class_of(g.inv(u2)), g.class_of(g.inv(u1)), g.class_of(u3))
}

/// `Ξ` by direct search for `x, y` with `u3 = x⁻¹u2⁻¹x y⁻¹u1⁻¹y`.
pub fn xi_search(g: &FiniteGroup, u1: usize, u2: usize, u3: usize) -> bool {
    xi_witness(g, u1, u2, u3).is_some()
}

/// The first `(x, y)` realizing `Ξ(u1, u2, u3)`.
pub fn xi_witness(g: &FiniteGroup, u1: usize, u2: usize, u3: usize) -> Option<(usize, usize)> {
    let (u1i, u2i) = (g.inv(u1), g.inv(u2));
    (0..g.order()).find_map(|x| {
        let a = g.conj(u2i, x);
        g.first_conjugator(u1i, g.mul(g.inv(a), u3)).map(|y| (x, y))
    })
}

fn s1_value(g: &FiniteGroup, a1: usize, x: usize, y: usize) -> usize {
    // x⁻¹ a1⁻¹ y x y⁻¹
    g.product(&[g.inv(x), g.inv(a1), y, x, g.inv(y)])
}

fn s2_value(g: &FiniteGroup, a1: usize, a3: usize, u: usize, v: usize) -> usize {
    // a3 u a1⁻¹ a3⁻¹ v u⁻¹ v⁻¹
    g.product(&[a3, u, g.inv(a1), g.inv(a3), v, g.inv(u), g.inv(v)])
}

fn outer_range(g: &FiniteGroup, mode: EvalMode) -> Vec<usize> {
    match mode {
        EvalMode::Reduced => g.classes().representatives(),
        EvalMode::Raw => (0..g.order()).collect(),
    }
}

pub fn check(g: &FiniteGroup, s: Statement) -> PropReport {
    check_with(g, s, EvalMode::Reduced)
}

pub fn check_with(g: &FiniteGroup, s: Statement, mode: EvalMode) -> PropReport {
    match s {
        Statement::S1 => check_s1(g, mode),
        Statement::S2 => check_s2(g, mode),
        Statement::S3 => match mode {
            EvalMode::Reduced => check_s3(g),
            EvalMode::Raw => check_s3_raw(g),
        },
        Statement::S4 => check_s4(g, mode),
    }
}

pub fn check_all(g: &FiniteGroup) -> Vec<PropReport> {
    Statement::ALL.iter().map(|&s| check(g, s)).collect()
}

fn report(property: Statement, witness: Option<Vec<usize>>, holds_when_some: bool) -> PropReport {
    PropReport { property, holds: witness.is_some() == holds_when_some, witness }
}

// Both sides of S1 transform together under simultaneous conjugation, so
// `a1` ranges over class representatives.
fn check_s1(g: &FiniteGroup, mode: EvalMode) -> PropReport {
    let n = g.order();
    for a1 in outer_range(g, mode) {
        let mut hit = vec![false; n];
        for x in 0..n {
            for y in 0..n {
                hit[s1_value(g, a1, x, y)] = true;
            }
        }
        if let Some(a2) = hit.iter().position(|&h| !h) {
            return report(Statement::S1, Some(vec![a1, a2]), false);
        }
    }
    report(Statement::S1, None, false)
}

fn check_s2(g: &FiniteGroup, mode: EvalMode) -> PropReport {
    let n = g.order();
    for a3 in outer_range(g, mode) {
        for a1 in 0..n {
            let mut hit = vec![false; n];
            for u in 0..n {
                for v in 0..n {
                    hit[s2_value(g, a1, a3, u, v)] = true;
                }
            }
            if let Some(a2) = hit.iter().position(|&h| !h) {
                return report(Statement::S2, Some(vec![a1, a2, a3]), false);
            }
        }
    }
    report(Statement::S2, None, false)
}

fn check_s3(g: &FiniteGroup) -> PropReport {
    let cls = g.classes();
    let k = cls.class_count();
    let reps = cls.representatives();
    let e = g.class_of(g.identity());
    for c1 in (0..k).filter(|&c| c != e) {
        for c2 in (0..k).filter(|&c| c != e) {
            let mid: Vec<usize> = (0..k).filter(|&d| g.class_product_contains(c1, c2, d)).collect();
            for c3 in (0..k).filter(|&c| c != e) {
                let missing = (0..k)
                    .filter(|&c4| c4 != e)
                    .find(|&c4| !mid.iter().any(|&d| g.class_product_contains(d, c3, c4)));
                if let Some(c4) = missing {
                    let w = vec![reps[c1], reps[c2], reps[c3], reps[c4]];
                    return report(Statement::S3, Some(w), false);
                }
            }
        }
    }
    report(Statement::S3, None, false)
}

/// S3 over every nontrivial triple, conjugating each factor explicitly.
/// Cost grows like `|P|⁶`; intended for groups of order at most 24.
pub fn check_s3_raw(g: &FiniteGroup) -> PropReport {
    let n = g.order();
    let e = g.identity();
    for u1 in (0..n).filter(|&u| u != e) {
        for u2 in (0..n).filter(|&u| u != e) {
            for u3 in (0..n).filter(|&u| u != e) {
                let mut hit = vec![false; n];
                for x in 0..n {
                    let a = g.conj(u1, x);
                    for y in 0..n {
                        let b = g.mul(a, g.conj(u2, y));
                        for z in 0..n {
                            hit[g.mul(b, g.conj(u3, z))] = true;
                        }
                    }
                }
                if let Some(u4) = (0..n).find(|&u| u != e && !hit[u]) {
                    return report(Statement::S3, Some(vec![u1, u2, u3, u4]), false);
                }
            }
        }
    }
    report(Statement::S3, None, false)
}

fn check_s4(g: &FiniteGroup, mode: EvalMode) -> PropReport {
    let e = g.identity();
    let range: Vec<usize> = outer_range(g, mode).into_iter().filter(|&u| u != e).collect();
    let found = range.iter().find_map(|&u1| {
        range.iter().find_map(|&u2| {
            range.iter().find(|&&u3| {
                let holds = match mode {
                    EvalMode::Reduced => xi(g, u1, u2, u3),
                    EvalMode::Raw => xi_search(g, u1, u2, u3),
                };
                !holds
            })
            .map(|&u3| vec![u1, u2, u3])
        })
    });
    report(Statement::S4, found, true)
}

/// Re-checks a report's witness by direct evaluation.
pub fn verify_report(g: &FiniteGroup, r: &PropReport) -> bool {
    let n = g.order();
    match (&r.property, &r.witness) {
        (Statement::S4, Some(w)) => w.len() == 3 && w.iter().all(|&u| u != g.identity()) && !xi_search(g, w[0], w[1], w[2]),
        (Statement::S1, Some(w)) => w.len() == 2 && solve_s1(g, w[0], w[1]).is_err(),
        (Statement::S2, Some(w)) => {
            w.len() == 3 && !(0..n).any(|u| (0..n).any(|v| s2_value(g, w[0], w[2], u, v) == w[1]))
        }
        (Statement::S3, Some(w)) => w.len() == 4 && solve_s3(g, w[0], w[1], w[2], w[3]).is_err(),
        (_, None) => r.holds != (r.property == Statement::S4),
    }
}

/// The first `(x, y)` with `a2 = x⁻¹ a1⁻¹ y x y⁻¹`.
pub fn solve_s1(g: &FiniteGroup, a1: usize, a2: usize) -> Result<(usize, usize)> {
    let n = g.order();
    (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .find(|&(x, y)| s1_value(g, a1, x, y) == a2)
        .ok_or_else(|| Error::NoSolution(format!("S1 instance ({}, {})", a1, a2)))
}

/// The first `(z, u, v)` with `a1 = a3⁻¹ z a3 u` and `a2 = z⁻¹ v u⁻¹ v⁻¹`.
pub fn solve_s2(g: &FiniteGroup, a1: usize, a2: usize, a3: usize) -> Result<(usize, usize, usize)> {
    for z in 0..g.order() {
        let u = g.mul(g.inv(g.conj(z, a3)), a1);
        let target = g.mul(z, a2);
        let ui = g.inv(u);
        if g.class_of(ui) != g.class_of(target) {
            continue;
        }
        // v u⁻¹ v⁻¹ = z a2
        if let Some(v) = (0..g.order()).find(|&v| g.conj(ui, g.inv(v)) == target) {
            return Ok((z, u, v));
        }
    }
    Err(Error::NoSolution(format!("S2 instance ({}, {}, {})", a1, a2, a3)))
}

/// The first `(x, y, z)` with `u4 = x⁻¹u1x y⁻¹u2y z⁻¹u3z`.
pub fn solve_s3(g: &FiniteGroup, u1: usize, u2: usize, u3: usize, u4: usize) -> Result<(usize, usize, usize)> {
    let n = g.order();
    for x in 0..n {
        let a = g.conj(u1, x);
        for y in 0..n {
            let t = g.mul(g.inv(g.mul(a, g.conj(u2, y))), u4);
            if let Some(z) = g.first_conjugator(u3, t) {
                return Ok((x, y, z));
            }
        }
    }
    Err(Error::NoSolution(format!("S3 instance ({}, {}, {}, {})", u1, u2, u3, u4)))
}
