//! Brute-force ground truth on finite truncations: dense state codes, the
//! generating set `S̄`, breadth-first word norms, a set-power ball oracle,
//! bounded norm search and exhaustive existential searches.
//!
//! # Binary distance format
//!
//! Little-endian throughout.
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 8 | magic `GZLEFBFS` |
//! | 8 | 4 | format version, `1` |
//! | 12 | 4 | base group order `|P|` |
//! | 16 | 4 | half-width `n` |
//! | 20 | 8 | state count `|P|^(2n+1)·(2n+1)` |
//! | 28 | 1 | diameter |
//! | 29 | 3 | zero |
//! | 32 | state count | one distance byte per state in [`DenseCode`] order, `255` = unreached |

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::sync::atomic::{AtomicU8, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::commutators::PmOrder;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps};
use crate::lamp::{Lamp, LampElem, Mode};

pub const UNREACHED: u8 = 255;
pub const DEFAULT_STATE_CAP: u64 = 1_000_000_000;
pub const DEFAULT_SBAR_CAP: u64 = 10_000_000;
const MAGIC: &[u8; 8] = b"GZLEFBFS";
const HEADER_LEN: usize = 32;

/// Mixed-radix code of `G_[-n,n]`: digit `i+n` holds the coordinate at
/// `i`, and the shift `k` contributes `(k+n)·|P|^(2n+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DenseCode {
    pub order: usize,
    pub n: i64,
    pub width: usize,
    pub digit_space: u64,
}

impl DenseCode {
    pub fn new(order: usize, n: i64) -> Result<DenseCode> {
        if n < 1 {
            return Err(Error::BadIndices(format!("truncation half-width must be at least 1, got {}", n)));
        }
        let width = (2 * n + 1) as usize;
        let digit_space = (order as u64)
            .checked_pow(width as u32)
            .filter(|d| d.checked_mul(width as u64).is_some())
            .ok_or(Error::StateCap { states: (order as u128).pow(width as u32) * width as u128, cap: u64::MAX as u128 })?;
        Ok(DenseCode { order, n, width, digit_space })
    }

    pub fn for_lamp(lamp: &Lamp) -> Result<DenseCode> {
        match lamp.mode() {
            Mode::Truncated(n) => DenseCode::new(lamp.base().order(), n),
            Mode::Infinite => Err(Error::ModeMismatch),
        }
    }

    pub fn states(&self) -> u64 {
        self.digit_space * self.width as u64
    }

    pub fn encode_digits(&self, digits: &[u32], shift_slot: usize) -> u64 {
        let mut c = 0u64;
        for &d in digits.iter().rev() {
            c = c * self.order as u64 + d as u64;
        }
        c + shift_slot as u64 * self.digit_space
    }

    /// Fills `digits` and returns the shift slot `k+n`.
    pub fn decode_digits(&self, code: u64, digits: &mut [u32]) -> usize {
        let mut c = code % self.digit_space;
        for d in digits.iter_mut() {
            *d = (c % self.order as u64) as u32;
            c /= self.order as u64;
        }
        (code / self.digit_space) as usize
    }

    pub fn encode(&self, x: &LampElem) -> u64 {
        let mut digits = vec![0u32; self.width];
        for (&i, &v) in &x.support {
            digits[(i + self.n) as usize] = v as u32;
        }
        self.encode_digits(&digits, (x.shift + self.n) as usize)
    }

    pub fn decode(&self, lamp: &Lamp, code: u64) -> LampElem {
        let mut digits = vec![0u32; self.width];
        let slot = self.decode_digits(code, &mut digits);
        let coords = digits.iter().enumerate().map(|(p, &d)| (p as i64 - self.n, d as usize));
        lamp.elem(slot as i64 - self.n, coords)
    }
}

/// A truncation addressed by dense codes, with flat base multiplication.
#[derive(Clone, Debug)]
pub struct DenseGroup {
    pub code: DenseCode,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl DenseGroup {
    pub fn new(base: &FiniteGroup, n: i64) -> Result<DenseGroup> {
        let code = DenseCode::new(base.order(), n)?;
        let p = base.order();
        let mut mul = vec![0u32; p * p];
        for a in 0..p {
            for b in 0..p {
                mul[a * p + b] = base.mul(a, b) as u32;
            }
        }
        let inv = (0..p).map(|a| base.inv(a) as u32).collect();
        Ok(DenseGroup { code, mul, inv })
    }

    #[inline]
    fn m(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.code.order + b as usize]
    }

    /// `(x̄, k)(ḡ, l)` on digit arrays; returns the shift slot of the product.
    #[inline]
    pub fn mul_digits(&self, x: &[u32], xs: usize, g: &[u32], gs: usize, out: &mut [u32]) -> usize {
        let w = self.code.width;
        let n = self.code.n as usize;
        let k = (xs + w - n) % w;
        for p in 0..w {
            let q = if p + k >= w { p + k - w } else { p + k };
            out[p] = self.m(x[p], g[q]);
        }
        (xs + gs + w - n) % w
    }

    fn inv_digits(&self, x: &[u32], xs: usize, out: &mut [u32]) -> usize {
        // (x̄, k)⁻¹ = (α^{-k}(x̄⁻¹), -k): coordinate at p moves to p + k.
        let w = self.code.width;
        let n = self.code.n as usize;
        let k = (xs + w - n) % w;
        for p in 0..w {
            out[(p + k) % w] = self.inv[x[p] as usize];
        }
        (2 * n + w - xs) % w
    }
}

impl GroupOps for DenseGroup {
    fn order(&self) -> usize {
        self.code.states() as usize
    }

    fn identity(&self) -> usize {
        self.code.encode_digits(&vec![0; self.code.width], self.code.n as usize) as usize
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let w = self.code.width;
        let (mut x, mut g, mut o) = (vec![0; w], vec![0; w], vec![0; w]);
        let xs = self.code.decode_digits(a as u64, &mut x);
        let gs = self.code.decode_digits(b as u64, &mut g);
        let s = self.mul_digits(&x, xs, &g, gs, &mut o);
        self.code.encode_digits(&o, s) as usize
    }

    fn inv(&self, a: usize) -> usize {
        let w = self.code.width;
        let (mut x, mut o) = (vec![0; w], vec![0; w]);
        let xs = self.code.decode_digits(a as u64, &mut x);
        let s = self.inv_digits(&x, xs, &mut o);
        self.code.encode_digits(&o, s) as usize
    }
}

/// `S̄` of a truncation: all single-support elements, then `T₊`, then `T₋`.
pub fn enumerate_sbar(lamp: &Lamp) -> Result<Vec<LampElem>> {
    enumerate_sbar_with_cap(lamp, DEFAULT_SBAR_CAP)
}

pub fn enumerate_sbar_with_cap(lamp: &Lamp, cap: u64) -> Result<Vec<LampElem>> {
    let code = DenseCode::for_lamp(lamp)?;
    let (p, n, w) = (code.order, code.n, code.width);
    let tele = code.digit_space / p as u64;
    let total = (w * (p - 1)) as u64 + 2 * tele;
    if total > cap {
        return Err(Error::StateCap { states: total.into(), cap: cap.into() });
    }
    let base = lamp.base();
    let mut out = Vec::with_capacity(total as usize);
    for i in -n..=n {
        for v in 1..p {
            out.push(lamp.single(i, v));
        }
    }
    // W-1 free coordinates; the remaining one makes the ordered product trivial.
    let mut free = vec![0usize; w - 1];
    for sign in [1i64, -1] {
        free.iter_mut().for_each(|d| *d = 0);
        loop {
            let prod = base.product(&free);
            let last = base.inv(prod);
            let coords: Vec<(i64, usize)> = if sign > 0 {
                (0..w - 1).map(|k| (k as i64 - n, free[k])).chain([(n, last)]).collect()
            } else {
                // decreasing order: positions n, n-1, …, -n+1 free, -n fixed
                (0..w - 1).map(|k| (n - k as i64, free[k])).chain([(-n, last)]).collect()
            };
            out.push(lamp.elem(sign, coords));
            if !odometer(&mut free, p) {
                break;
            }
        }
    }
    Ok(out)
}

fn odometer(d: &mut [usize], radix: usize) -> bool {
    for x in d.iter_mut().rev() {
        *x += 1;
        if *x < radix {
            return true;
        }
        *x = 0;
    }
    false
}

#[derive(Clone, Copy, Debug)]
pub struct BfsConfig {
    pub state_cap: u64,
    pub sbar_cap: u64,
    /// Switch to bottom-up sweeps when the frontier is large.
    pub direction_optimizing: bool,
}

impl Default for BfsConfig {
    fn default() -> Self {
        BfsConfig { state_cap: DEFAULT_STATE_CAP, sbar_cap: DEFAULT_SBAR_CAP, direction_optimizing: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BfsSummary {
    pub order: usize,
    pub n: i64,
    pub states: u64,
    pub generators: usize,
    pub layer_sizes: Vec<u64>,
    pub diameter: u32,
    pub wall_ms: u128,
}

#[derive(Clone, Debug)]
pub struct BfsTable {
    pub code: DenseCode,
    pub dist: Vec<u8>,
    pub summary: BfsSummary,
}

impl BfsTable {
    pub fn distance(&self, code: &DenseCode, x: &LampElem) -> u8 {
        self.dist[code.encode(x) as usize]
    }
}

/// Exact distances from the identity in the Cayley graph of a truncation
/// over [`enumerate_sbar`]. Levels are expanded one at a time so the labels
/// do not depend on scheduling.
pub fn bfs_norms(lamp: &Lamp, cfg: &BfsConfig) -> Result<BfsTable> {
    let start = Instant::now();
    let code = DenseCode::for_lamp(lamp)?;
    let states = code.states();
    if states > cfg.state_cap {
        return Err(Error::StateCap { states: states.into(), cap: cfg.state_cap.into() });
    }
    let dg = DenseGroup::new(lamp.base(), code.n)?;
    let sbar = enumerate_sbar_with_cap(lamp, cfg.sbar_cap)?;
    let w = code.width;
    let mut gd = vec![0u32; sbar.len() * w];
    let mut gs = vec![0usize; sbar.len()];
    for (j, s) in sbar.iter().enumerate() {
        gs[j] = code.decode_digits(code.encode(s), &mut gd[j * w..(j + 1) * w]);
    }
    let nsg = sbar.len();
    let dist: Vec<AtomicU8> = (0..states).map(|_| AtomicU8::new(UNREACHED)).collect();
    let id = GroupOps::identity(&dg) as u64;
    dist[id as usize].store(0, Ordering::Relaxed);
    let mut frontier = vec![id];
    let mut layers = vec![1u64];
    let mut unvisited = states - 1;
    let mut level = 0u8;
    while !frontier.is_empty() {
        if level == UNREACHED - 1 {
            return Err(Error::Unsupported("distance exceeds the byte range".into()));
        }
        let bottom_up = cfg.direction_optimizing && (frontier.len() as u64) * 14 > unvisited;
        let next: Vec<u64> = if bottom_up {
            (0..states)
                .into_par_iter()
                .filter(|&y| dist[y as usize].load(Ordering::Relaxed) == UNREACHED)
                .map_init(
                    || (vec![0u32; w], vec![0u32; w]),
                    |(x, o), y| {
                        let ys = code.decode_digits(y, x);
                        let hit = (0..nsg).any(|j| {
                            let s = dg.mul_digits(x, ys, &gd[j * w..(j + 1) * w], gs[j], o);
                            dist[code.encode_digits(o, s) as usize].load(Ordering::Relaxed) == level
                        });
                        (y, hit)
                    },
                )
                .filter(|&(_, hit)| hit)
                .map(|(y, _)| y)
                .collect()
        } else {
            let mut v: Vec<u64> = frontier
                .par_iter()
                .map_init(
                    || (vec![0u32; w], vec![0u32; w]),
                    |(x, o), &f| {
                        let xs = code.decode_digits(f, x);
                        let mut found = Vec::new();
                        for j in 0..nsg {
                            let s = dg.mul_digits(x, xs, &gd[j * w..(j + 1) * w], gs[j], o);
                            let c = code.encode_digits(o, s);
                            if dist[c as usize]
                                .compare_exchange(UNREACHED, level + 1, Ordering::Relaxed, Ordering::Relaxed)
                                .is_ok()
                            {
                                found.push(c);
                            }
                        }
                        found
                    },
                )
                .flatten()
                .collect();
            v.par_sort_unstable();
            v
        };
        if bottom_up {
            for &y in &next {
                dist[y as usize].store(level + 1, Ordering::Relaxed);
            }
        }
        if next.is_empty() {
            break;
        }
        unvisited -= next.len() as u64;
        layers.push(next.len() as u64);
        frontier = next;
        level += 1;
    }
    let dist: Vec<u8> = dist.into_iter().map(AtomicU8::into_inner).collect();
    if unvisited > 0 {
        return Err(Error::NotGenerating { reached: (states - unvisited) as usize, order: states as usize });
    }
    let summary = BfsSummary {
        order: code.order,
        n: code.n,
        states,
        generators: nsg,
        diameter: layers.len() as u32 - 1,
        layer_sizes: layers,
        wall_ms: start.elapsed().as_millis(),
    };
    Ok(BfsTable { code, dist, summary })
}

/// Independent ball growth `B_{m+1} = B_m · S̄` in element arithmetic.
pub fn set_power_norms(lamp: &Lamp, state_cap: u64) -> Result<HashMap<LampElem, u32>> {
    let code = DenseCode::for_lamp(lamp)?;
    if code.states() > state_cap {
        return Err(Error::StateCap { states: code.states().into(), cap: state_cap.into() });
    }
    let sbar = enumerate_sbar(lamp)?;
    let mut seen: HashMap<LampElem, u32> = HashMap::from([(lamp.identity(), 0)]);
    let mut ball: Vec<LampElem> = vec![lamp.identity()];
    let mut m = 0;
    loop {
        m += 1;
        let mut grown = Vec::new();
        for b in &ball {
            for s in &sbar {
                let x = lamp.mul(b, s);
                if !seen.contains_key(&x) {
                    seen.insert(x.clone(), m);
                    grown.push(x);
                }
            }
        }
        if grown.is_empty() {
            break;
        }
        ball.extend(grown);
    }
    Ok(seen)
}

/// Norm by membership search when it is at most `r_max`, else `None`.
pub fn bounded_norm(lamp: &Lamp, sbar: &[LampElem], g: &LampElem, r_max: u32) -> Result<Option<u32>> {
    if r_max > 3 {
        return Err(Error::Unsupported(format!("bounded_norm supports r_max <= 3, got {}", r_max)));
    }
    if g.support.is_empty() && g.shift == 0 {
        return Ok(Some(0));
    }
    if r_max >= 1 && lamp.in_sbar(g) {
        return Ok(Some(1));
    }
    let within2 = |x: &LampElem| sbar.iter().any(|s| lamp.in_sbar(&lamp.mul(&lamp.inverse(s), x)));
    if r_max >= 2 && within2(g) {
        return Ok(Some(2));
    }
    if r_max >= 3 && sbar.iter().any(|s| within2(&lamp.mul(&lamp.inverse(s), g))) {
        return Ok(Some(3));
    }
    Ok(None)
}

pub fn write_binary<W: Write>(t: &BfsTable, mut out: W) -> std::io::Result<()> {
    let mut h = [0u8; HEADER_LEN];
    h[..8].copy_from_slice(MAGIC);
    h[8..12].copy_from_slice(&1u32.to_le_bytes());
    h[12..16].copy_from_slice(&(t.code.order as u32).to_le_bytes());
    h[16..20].copy_from_slice(&(t.code.n as u32).to_le_bytes());
    h[20..28].copy_from_slice(&t.code.states().to_le_bytes());
    h[28] = t.summary.diameter.min(254) as u8;
    out.write_all(&h)?;
    out.write_all(&t.dist)
}

/// Reads a distance file back as `(code, diameter, distances)`.
pub fn read_binary<R: Read>(mut inp: R) -> Result<(DenseCode, u8, Vec<u8>)> {
    let mut h = [0u8; HEADER_LEN];
    inp.read_exact(&mut h).map_err(|e| Error::Parse(e.to_string()))?;
    if &h[..8] != MAGIC || u32::from_le_bytes(h[8..12].try_into().unwrap()) != 1 {
        return Err(Error::Parse("not a version 1 distance file".into()));
    }
    let order = u32::from_le_bytes(h[12..16].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(h[16..20].try_into().unwrap()) as i64;
    let states = u64::from_le_bytes(h[20..28].try_into().unwrap());
    let code = DenseCode::new(order, n)?;
    if code.states() != states {
        return Err(Error::Parse("state count does not match parameters".into()));
    }
    let mut dist = Vec::with_capacity(states as usize);
    inp.read_to_end(&mut dist).map_err(|e| Error::Parse(e.to_string()))?;
    if dist.len() as u64 != states {
        return Err(Error::Parse(format!("expected {} distance bytes, found {}", states, dist.len())));
    }
    Ok((code, h[28], dist))
}

/// Every `ḡα(ḡ⁻¹)` (sign `+1`) or `α(ḡ)ḡ⁻¹` (sign `-1`) with `ḡ` ranging
/// over all vectors supported in `[lo, hi]`.
pub fn telescope_image(lamp: &Lamp, sign: i64, lo: i64, hi: i64) -> HashSet<LampElem> {
    let p = lamp.base().order();
    let mut d = vec![0usize; (hi - lo + 1) as usize];
    let mut out = HashSet::new();
    loop {
        let g = lamp.from_run(lo, &d);
        out.insert(if sign > 0 { lamp.plus_comm(&g) } else { lamp.minus_comm(&g) });
        if !odometer(&mut d, p) {
            return out;
        }
    }
}

/// Decides whether `x = ḡ₁α(ḡ₁⁻¹)α(ḡ₂)ḡ₂⁻¹` (`+-`) or
/// `x = α(ḡ₁)ḡ₁⁻¹ḡ₂α(ḡ₂⁻¹)` (`-+`) for some `ḡ₁, ḡ₂` supported in
/// `[lo, hi]`. Each coordinate equation only couples neighbouring pairs
/// `(g₁ᵢ, g₂ᵢ)`, so all pairs are covered by a sweep over reachable pairs.
pub fn exists_pm_on_window(p: &FiniteGroup, x: &LampElem, order: PmOrder, lo: i64, hi: i64) -> bool {
    if x.support.keys().any(|&i| i < lo - 1 || i > hi) {
        return false;
    }
    let q = p.order();
    let mut reach = vec![false; q * q];
    reach[0] = true;
    for i in lo - 1..=hi {
        let xi = x.at(i);
        let mut next = vec![false; q * q];
        let choices: Vec<usize> = if i < hi { (0..q).collect() } else { vec![0] };
        // The next pair is (a₂, a₂c) or (a₂, xᵢ⁻¹a₂c), so only the set of
        // middles c matters.
        let mut middles = vec![false; q];
        for (s, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
            let (a, b) = (s / q, s % q);
            let c = match order {
                PmOrder::PlusMinus => p.product(&[p.inv(a), xi, b]),
                PmOrder::MinusPlus => p.mul(p.inv(a), b),
            };
            middles[c] = true;
        }
        for c in (0..q).filter(|&c| middles[c]) {
            for &a2 in &choices {
                let b2 = match order {
                    PmOrder::PlusMinus => p.mul(a2, c),
                    PmOrder::MinusPlus => p.product(&[p.inv(xi), a2, c]),
                };
                if i < hi || b2 == 0 {
                    next[a2 * q + b2] = true;
                }
            }
        }
        reach = next;
    }
    reach[0]
}

/// Literal enumeration of all vector pairs on `[lo, hi]`; only for tiny cases.
pub fn exists_pm_enumerate(lamp: &Lamp, x: &LampElem, order: PmOrder, lo: i64, hi: i64) -> bool {
    let plus = telescope_image(lamp, 1, lo, hi);
    let minus = telescope_image(lamp, -1, lo, hi);
    let (first, second) = match order {
        PmOrder::PlusMinus => (&plus, &minus),
        PmOrder::MinusPlus => (&minus, &plus),
    };
    first.iter().any(|a| second.contains(&lamp.mul(&lamp.inverse(a), x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn lamp(name: &str, n: i64) -> Lamp {
        Lamp::truncated(Arc::new(FiniteGroup::builtin(name).unwrap()), n).unwrap()
    }

    #[test]
    fn code_round_trip() {
        let l = lamp("S3", 2);
        let c = DenseCode::for_lamp(&l).unwrap();
        assert_eq!(c.states(), 6u64.pow(5) * 5);
        for code in (0..c.states()).step_by(97) {
            assert_eq!(c.encode(&c.decode(&l, code)), code);
        }
    }

    #[test]
    fn sbar_counts() {
        let l = lamp("S3", 1);
        let s = enumerate_sbar(&l).unwrap();
        assert_eq!(s.len(), 87);
        assert!(s.iter().all(|x| l.in_sbar(x)));
        assert_eq!(s.iter().collect::<HashSet<_>>().len(), 87);
        assert!(DenseCode::new(6, 0).is_err());
    }

    #[test]
    fn dense_mul_matches_lamp() {
        let l = lamp("S3", 1);
        let dg = DenseGroup::new(l.base(), 1).unwrap();
        for a in (0..dg.code.states()).step_by(37) {
            for b in (0..dg.code.states()).step_by(53) {
                let (x, y) = (dg.code.decode(&l, a), dg.code.decode(&l, b));
                assert_eq!(GroupOps::mul(&dg, a as usize, b as usize) as u64, dg.code.encode(&l.mul(&x, &y)));
            }
            assert_eq!(GroupOps::inv(&dg, a as usize) as u64, dg.code.encode(&l.inverse(&dg.code.decode(&l, a))));
        }
    }

    #[test]
    fn bfs_matches_ball_growth_on_s3() {
        let l = lamp("S3", 1);
        let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
        let balls = set_power_norms(&l, 1 << 20).unwrap();
        assert_eq!(balls.len(), 648);
        for (x, d) in balls {
            assert_eq!(t.distance(&t.code, &x) as u32, d);
        }
        let top = bfs_norms(&l, &BfsConfig { direction_optimizing: false, ..Default::default() }).unwrap();
        assert_eq!(top.dist, t.dist);
    }

    #[test]
    fn binary_round_trip() {
        let l = lamp("S3", 1);
        let t = bfs_norms(&l, &BfsConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_binary(&t, &mut buf).unwrap();
        let (c, d, dist) = read_binary(buf.as_slice()).unwrap();
        assert_eq!((c, d as u32, dist), (t.code, t.summary.diameter, t.dist.clone()));
        assert!(read_binary(&buf[..40]).is_err());
    }

    #[test]
    fn pair_sweep_matches_enumeration() {
        let l = Lamp::infinite(Arc::new(FiniteGroup::builtin("S3").unwrap()));
        for a in 0..6 {
            for b in 0..6 {
                let x = l.from_run(1, &[a, 1, b]);
                for o in [PmOrder::PlusMinus, PmOrder::MinusPlus] {
                    assert_eq!(exists_pm_on_window(l.base(), &x, o, 1, 3), exists_pm_enumerate(&l, &x, o, 1, 3));
                }
            }
        }
    }

    #[test]
    fn bounded_norm_limits() {
        let l = lamp("S3", 1);
        let s = enumerate_sbar(&l).unwrap();
        assert_eq!(bounded_norm(&l, &s, &l.identity(), 3).unwrap(), Some(0));
        assert_eq!(bounded_norm(&l, &s, &l.t(), 1).unwrap(), Some(1));
        assert!(bounded_norm(&l, &s, &l.t(), 4).is_err());
    }
}
