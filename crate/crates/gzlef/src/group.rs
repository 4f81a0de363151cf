//! Finite permutation groups.
//!
//! Composition acts left to right: `compose(p, q)` applies `p` first and
//! then `q`, so `compose(p, q)(i) = q(p(i))`. The group product `a * b` is
//! `compose(a, b)` everywhere in this crate, and conjugation is
//! `conj(g, h) = h⁻¹ g h`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default cap on the number of elements `generate_group` will enumerate.
pub const DEFAULT_SIZE_CAP: usize = 10_000_000;

// Cayley tables are kept only for groups up to this order.
const TABLE_LIMIT: usize = 2048;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(degree: usize) -> Perm {
        Perm { images: (0..degree).collect() }
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1], &[2, 3]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Perm> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                let b = cycle[(k + 1) % cycle.len()];
                if a >= degree || b >= degree || touched[a] {
                    return Err(Error::NotAPermutation(cycle.to_vec()));
                }
                touched[a] = true;
                images[a] = b;
            }
        }
        Perm::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Perm { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Cycle notation; the identity prints as `()`.
impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.images.len()];
        let mut any = false;
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}", i)?;
                first = false;
                i = self.images[i];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// `compose(p, q)(i) = q(p(i))`: apply `p`, then `q`.
pub fn compose(p: &Perm, q: &Perm) -> Result<Perm> {
    if p.degree() != q.degree() {
        return Err(Error::DegreeMismatch(p.degree(), q.degree()));
    }
    Ok(Perm { images: p.images.iter().map(|&i| q.images[i]).collect() })
}

/// `conj(g, h) = h⁻¹ g h`.
pub fn conj(g: &Perm, h: &Perm) -> Result<Perm> {
    compose(&compose(&h.inverse(), g)?, h)
}

/// Minimal group interface used by the validators, so that they also run
/// over groups that are not stored as explicit permutation lists.
pub trait GroupOps: Sync {
    fn order(&self) -> usize;
    fn identity(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;

    /// `h⁻¹ g h`
    fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inv(h), g), h)
    }
}

/// JSON group description: `{"degree": n, "generators": [[images...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
}

impl GroupSpec {
    pub fn builtin(name: &str) -> Result<GroupSpec> {
        let (degree, generators): (usize, Vec<Vec<usize>>) = match name {
            "A5" => (5, vec![vec![1, 2, 3, 4, 0], vec![1, 2, 0, 3, 4]]),
            "S3" => (3, vec![vec![1, 0, 2], vec![1, 2, 0]]),
            "S4" => (4, vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]]),
            "A4" => (4, vec![vec![1, 2, 0, 3], vec![0, 2, 3, 1]]),
            "Z2" => (2, vec![vec![1, 0]]),
            "Z3" => (3, vec![vec![1, 2, 0]]),
            "Z4" => (4, vec![vec![1, 2, 3, 0]]),
            _ => return Err(Error::UnknownGroup(name.to_string())),
        };
        Ok(GroupSpec { degree, generators })
    }

    /// Accepts a built-in name or a JSON object.
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let t = text.trim();
        if t.starts_with('{') {
            serde_json::from_str(t).map_err(|e| {
                Error::Parse(format!("group spec at line {} column {}: {}", e.line(), e.column(), e))
            })
        } else {
            GroupSpec::builtin(t)
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn content_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{:02x}", b)).collect()
    }

    pub fn generate(&self) -> Result<FiniteGroup> {
        let gens = self
            .generators
            .iter()
            .map(|g| {
                if g.len() != self.degree {
                    return Err(Error::DegreeMismatch(self.degree, g.len()));
                }
                Perm::new(g.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        generate_group(&gens)
    }
}

/// Partition of a group into conjugacy classes. Class 0 is `{identity}`;
/// classes are numbered by their smallest element index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjClassTable {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

impl ConjClassTable {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }

    /// The smallest element index of each class.
    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

/// An enumerated permutation group. Elements are numbered in breadth-first
/// order from the identity (index 0), expanding generators in input order.
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Perm>,
    index_of: HashMap<Perm, usize>,
    generators: Vec<usize>,
    inverses: Vec<usize>,
    table: Option<Vec<u32>>,
    classes: OnceLock<ConjClassTable>,
    conjugators: OnceLock<Vec<u32>>,
    class_cover: OnceLock<Vec<bool>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("degree", &self.degree)
            .field("order", &self.elements.len())
            .field("generators", &self.generators)
            .finish()
    }
}

/// Closure of `gens` under composition, with the default size cap.
pub fn generate_group(gens: &[Perm]) -> Result<FiniteGroup> {
    generate_group_with_cap(gens, DEFAULT_SIZE_CAP)
}

pub fn generate_group_with_cap(gens: &[Perm], cap: usize) -> Result<FiniteGroup> {
    let first = gens.first().ok_or(Error::NoGenerators)?;
    let degree = first.degree();
    for g in gens {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
    }
    let id = Perm::identity(degree);
    let mut elements = vec![id.clone()];
    let mut index_of = HashMap::new();
    index_of.insert(id, 0usize);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for s in gens {
            let y = compose(&elements[x], s)?;
            if !index_of.contains_key(&y) {
                if elements.len() >= cap {
                    return Err(Error::SizeCap { cap });
                }
                index_of.insert(y.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(y);
            }
        }
    }
    let generators = gens.iter().map(|g| index_of[g]).collect();
    let inverses = elements.iter().map(|p| index_of[&p.inverse()]).collect();
    let n = elements.len();
    let table = (n <= TABLE_LIMIT).then(|| {
        let mut t = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let c = compose(&elements[a], &elements[b]).expect("same degree");
                t[a * n + b] = index_of[&c] as u32;
            }
        }
        t
    });
    Ok(FiniteGroup {
        degree,
        elements,
        index_of,
        generators,
        inverses,
        table,
        classes: OnceLock::new(),
        conjugators: OnceLock::new(),
        class_cover: OnceLock::new(),
    })
}

impl FiniteGroup {
    pub fn builtin(name: &str) -> Result<FiniteGroup> {
        GroupSpec::builtin(name)?.generate()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index_of.get(p).copied()
    }

    pub fn index_of_images(&self, images: &[usize]) -> Result<usize> {
        let p = Perm::new(images.to_vec())?;
        self.index_of(&p).ok_or_else(|| Error::NotInGroup(p.to_string()))
    }

    /// Element indices of the input generators, in input order.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => {
                let c = compose(&self.elements[a], &self.elements[b]).expect("same degree");
                self.index_of[&c]
            }
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `h⁻¹ g h`
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inv(h), g), h)
    }

    /// Product of a sequence, left to right.
    pub fn product(&self, xs: &[usize]) -> usize {
        xs.iter().fold(0, |acc, &x| self.mul(acc, x))
    }

    pub fn classes(&self) -> &ConjClassTable {
        self.classes.get_or_init(|| conjugacy_classes(self))
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.classes().class_of[g]
    }

    /// The first `x` in element order with `x⁻¹ g x = h`, if any.
    pub fn first_conjugator(&self, g: usize, h: usize) -> Option<usize> {
        let n = self.order();
        if n > TABLE_LIMIT {
            return (0..n).find(|&x| self.conj(g, x) == h);
        }
        let t = self.conjugators.get_or_init(|| {
            let mut t = vec![u32::MAX; n * n];
            for g in 0..n {
                for x in 0..n {
                    let h = self.conj(g, x);
                    if t[g * n + h] == u32::MAX {
                        t[g * n + h] = x as u32;
                    }
                }
            }
            t
        });
        let x = t[g * n + h];
        (x != u32::MAX).then_some(x as usize)
    }

    /// Whether class `c3` lies in the product of classes `c1` and `c2`.
    /// Class products are unions of classes, so one representative of `c1`
    /// against all of `c2` decides every entry.
    pub fn class_product_contains(&self, c1: usize, c2: usize, c3: usize) -> bool {
        let cls = self.classes();
        let k = cls.class_count();
        let cover = self.class_cover.get_or_init(|| {
            let mut t = vec![false; k * k * k];
            for (i, ci) in cls.classes.iter().enumerate() {
                let a = ci[0];
                for (j, cj) in cls.classes.iter().enumerate() {
                    for &b in cj {
                        t[(i * k + j) * k + cls.class_of[self.mul(a, b)]] = true;
                    }
                }
            }
            t
        });
        cover[(c1 * k + c2) * k + c3]
    }

    /// The subgroup generated by the given elements, as a sorted index set.
    pub fn subgroup_generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut set = BTreeSet::from([self.identity()]);
        let mut queue = VecDeque::from([self.identity()]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// The normal closure of the given elements.
    pub fn normal_closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut all: BTreeSet<usize> = BTreeSet::new();
        for &g in gens {
            for &x in &self.classes().classes[self.class_of(g)] {
                all.insert(x);
            }
        }
        let v: Vec<usize> = all.into_iter().collect();
        self.subgroup_generated(&v)
    }

    pub fn is_subgroup(&self, set: &BTreeSet<usize>) -> bool {
        if !set.contains(&self.identity()) || set.iter().any(|&x| x >= self.order()) {
            return false;
        }
        set.iter().all(|&a| set.contains(&self.inv(a)) && set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    pub fn is_normal(&self, set: &BTreeSet<usize>) -> bool {
        self.is_subgroup(set)
            && set.iter().all(|&n| self.generators.iter().all(|&g| set.contains(&self.conj(n, g))))
    }

    /// A permutation group isomorphic to the subgroup `set`, with the
    /// element map from the new indices back into `self`.
    pub fn subgroup(&self, set: &BTreeSet<usize>) -> Result<(FiniteGroup, Vec<usize>)> {
        if !self.is_subgroup(set) {
            return Err(Error::NotSubgroup);
        }
        let gens: Vec<Perm> = set.iter().map(|&i| self.elements[i].clone()).collect();
        let sub = generate_group(&gens)?;
        let embed = sub.elements().iter().map(|p| self.index_of[p]).collect();
        Ok((sub, embed))
    }
}

impl GroupOps for FiniteGroup {
    fn order(&self) -> usize {
        FiniteGroup::order(self)
    }
    fn identity(&self) -> usize {
        0
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        FiniteGroup::mul(self, a, b)
    }
    fn inv(&self, a: usize) -> usize {
        FiniteGroup::inv(self, a)
    }
}

/// Conjugacy classes by orbit search under conjugation by the generators.
pub fn conjugacy_classes(g: &FiniteGroup) -> ConjClassTable {
    let n = g.order();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        class_of[start] = id;
        let mut k = 0;
        while k < members.len() {
            let x = members[k];
            k += 1;
            for &s in g.generators() {
                let y = g.conj(x, s);
                if class_of[y] == usize::MAX {
                    class_of[y] = id;
                    members.push(y);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    ConjClassTable { class_of, classes }
}

/// `{ a b : a ∈ C1, b ∈ C2 }`
pub fn class_product(g: &FiniteGroup, c1: usize, c2: usize) -> BTreeSet<usize> {
    let cls = &g.classes().classes;
    let mut out = BTreeSet::new();
    for &a in &cls[c1] {
        for &b in &cls[c2] {
            out.insert(g.mul(a, b));
        }
    }
    out
}
