//! A graph that is a union of chains, one finite chain per prime whose
//! exponent parity tracks a limit-computable function.
//!
//! Vertex layout: ordinal 3q is the q-th element of F, 3q+1 is vertex j of
//! the ℕ-chain N_i and 3q+2 is vertex z of the ℤ-chain Z_i, where
//! q = ⟨i, j⟩ (Cantor pairing) and z runs 0, −1, 1, −2, … along j.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::pairing::{nth_prime, pair, prime_index, prime_power, unpair};
use crate::error::{Error, Result};
use crate::signature::{RelId, Signature, SortId};
use crate::structure::{RelationRule, RuleBased, SortRule, StructureSpec, Support};

/// f(n, s), expected to take values in {0, 1}.
#[derive(Clone)]
pub struct LimitFunction(Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>);

impl fmt::Debug for LimitFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LimitFunction")
    }
}

impl LimitFunction {
    pub fn new(f: impl Fn(u64, u64) -> u64 + Send + Sync + 'static) -> Self {
        LimitFunction(Arc::new(f))
    }

    /// Step tables with lines `n s value`: f(n, ·) takes `value` from stage
    /// `s` until the next listed stage for the same n. Unlisted values are 0.
    pub fn table(text: &str) -> Result<Self> {
        let mut steps: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
        let mut offset = 0;
        for line in text.lines() {
            let here = offset;
            offset += line.len() + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Result<Vec<u64>> = content
                .split_whitespace()
                .map(|x| {
                    x.parse().map_err(|_| Error::Syntax {
                        offset: here,
                        message: format!("bad number `{x}`"),
                    })
                })
                .collect();
            match fields?.as_slice() {
                [n, s, v] => {
                    steps.entry(*n).or_default().insert(*s, *v);
                }
                _ => {
                    return Err(Error::Syntax {
                        offset: here,
                        message: "expected `n s value`".into(),
                    })
                }
            }
        }
        Ok(LimitFunction::new(move |n, s| {
            steps
                .get(&n)
                .and_then(|m| m.range(..=s).next_back().map(|(_, v)| *v))
                .unwrap_or(0)
        }))
    }

    pub fn eval(&self, n: u64, s: u64) -> Result<u64> {
        match (self.0)(n, s) {
            v @ (0 | 1) => Ok(v),
            value => Err(Error::NonBoolean { n, s, value }),
        }
    }
}

/// The finite chain of F whose order is a power of pₙ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeChain {
    pub n: usize,
    pub prime: u64,
    /// (stage, exponent) after creation and after every extension.
    pub exponents: Vec<(usize, u32)>,
    /// Runs of consecutive F indices, in chain order.
    pub segments: Vec<(u64, u64)>,
}

impl PrimeChain {
    pub fn exponent(&self) -> u32 {
        self.exponents.last().map_or(0, |e| e.1)
    }

    pub fn order(&self) -> u64 {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// F indices in chain order.
    pub fn vertices(&self) -> impl Iterator<Item = u64> + '_ {
        self.segments.iter().flat_map(|(start, len)| *start..start + len)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainInventory {
    pub chains: Vec<PrimeChain>,
    /// F indices `0..f_used` are in some chain.
    pub f_used: u64,
    /// Last completed stage.
    pub stage: usize,
}

impl ChainInventory {
    /// Number of ℕ-chains with their initial vertex below `horizon`.
    pub fn nat_chains_below(&self, horizon: u64) -> u64 {
        (0..).take_while(|i| family_ordinal(1, *i, 0).is_some_and(|m| m < horizon)).count() as u64
    }

    /// Number of ℤ-chains with their vertex 0 below `horizon`.
    pub fn int_chains_below(&self, horizon: u64) -> u64 {
        (0..).take_while(|i| family_ordinal(2, *i, 0).is_some_and(|m| m < horizon)).count() as u64
    }

    /// Lines `prime=3 order=27 parity=1`.
    pub fn export(&self) -> Vec<String> {
        self.chains
            .iter()
            .map(|c| format!("prime={} order={} parity={}", c.prime, c.order(), c.exponent() % 2))
            .collect()
    }

    /// Ordinal bound covering every F vertex used so far.
    pub fn horizon(&self) -> u64 {
        self.f_used.saturating_mul(3)
    }
}

fn family_ordinal(class: u64, i: u64, j: u64) -> Option<u64> {
    pair(i, j)?.checked_mul(3)?.checked_add(class)
}

fn zig(w: u64) -> i64 {
    if w % 2 == 0 {
        (w / 2) as i64
    } else {
        -(w.div_ceil(2) as i64)
    }
}

fn unzig(z: i64) -> u64 {
    if z >= 0 {
        2 * z as u64
    } else {
        2 * z.unsigned_abs() - 1
    }
}

/// Runs the stage construction one stage at a time.
pub struct ChainBuilder {
    f: LimitFunction,
    inventory: ChainInventory,
}

impl ChainBuilder {
    pub fn new(f: LimitFunction) -> Self {
        ChainBuilder {
            f,
            inventory: ChainInventory::default(),
        }
    }

    pub fn inventory(&self) -> &ChainInventory {
        &self.inventory
    }

    fn take(&mut self, len: u64) -> Result<(u64, u64)> {
        let start = self.inventory.f_used;
        self.inventory.f_used = start.checked_add(len).ok_or(Error::Overflow("F vertices"))?;
        Ok((start, len))
    }

    /// Performs the next stage: 2s+1 creates the chain for pₛ, 2s+2 extends
    /// the chains whose column changed between s and s+1.
    pub fn step(&mut self) -> Result<()> {
        let t = self.inventory.stage + 1;
        if t % 2 == 1 {
            let s = (t - 1) / 2;
            let exp = 2 + self.f.eval(s as u64, s as u64)? as u32;
            let prime = nth_prime(s);
            let order = prime.checked_pow(exp).ok_or(Error::Overflow("chain order"))?;
            let seg = self.take(order)?;
            self.inventory.chains.push(PrimeChain {
                n: s,
                prime,
                exponents: vec![(t, exp)],
                segments: vec![seg],
            });
        } else {
            let s = (t - 2) / 2;
            for n in 0..=s {
                if self.f.eval(n as u64, s as u64)? == self.f.eval(n as u64, s as u64 + 1)? {
                    continue;
                }
                let (prime, k) = {
                    let c = &self.inventory.chains[n];
                    (c.prime, c.exponent())
                };
                let old = prime.checked_pow(k).ok_or(Error::Overflow("chain order"))?;
                let new = prime.checked_pow(k + 1).ok_or(Error::Overflow("chain order"))?;
                let seg = self.take(new - old)?;
                let c = &mut self.inventory.chains[n];
                c.segments.push(seg);
                c.exponents.push((t, k + 1));
            }
        }
        self.inventory.stage = t;
        Ok(())
    }

    pub fn run_to(&mut self, stages: usize) -> Result<()> {
        while self.inventory.stage < stages {
            self.step()?;
        }
        Ok(())
    }

    /// The graph as built so far, over sort `V` with edge relation `E`.
    pub fn structure(&self) -> Result<StructureSpec> {
        chain_structure(&self.inventory)
    }
}

/// Position lookup for F vertices.
struct FIndex {
    /// (start, len, chain, offset of the segment within its chain)
    segments: Vec<(u64, u64, usize, u64)>,
    /// per chain: (offset, start) for each segment
    chains: Vec<Vec<(u64, u64)>>,
    orders: Vec<u64>,
}

impl FIndex {
    fn new(inv: &ChainInventory) -> Self {
        let mut segments = Vec::new();
        let mut chains = Vec::new();
        let mut orders = Vec::new();
        for (ci, c) in inv.chains.iter().enumerate() {
            let mut offset = 0;
            let mut own = Vec::new();
            for (start, len) in &c.segments {
                segments.push((*start, *len, ci, offset));
                own.push((offset, *start));
                offset += len;
            }
            chains.push(own);
            orders.push(offset);
        }
        segments.sort();
        FIndex {
            segments,
            chains,
            orders,
        }
    }

    fn locate(&self, idx: u64) -> Option<(usize, u64)> {
        let i = self.segments.partition_point(|s| s.0 <= idx).checked_sub(1)?;
        let (start, len, chain, offset) = self.segments[i];
        (idx < start + len).then_some((chain, offset + idx - start))
    }

    fn at(&self, chain: usize, position: u64) -> u64 {
        let segs = &self.chains[chain];
        let i = segs.partition_point(|s| s.0 <= position) - 1;
        segs[i].1 + position - segs[i].0
    }

    fn neighbors(&self, idx: u64) -> Vec<u64> {
        let Some((chain, p)) = self.locate(idx) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(2);
        if p > 0 {
            out.push(self.at(chain, p - 1));
        }
        if p + 1 < self.orders[chain] {
            out.push(self.at(chain, p + 1));
        }
        out
    }
}

fn neighbors(index: &FIndex, m: u64) -> Vec<u64> {
    let q = m / 3;
    match m % 3 {
        0 => index.neighbors(q).into_iter().filter_map(|x| x.checked_mul(3)).collect(),
        1 => {
            let (i, j) = unpair(q);
            let mut out = Vec::with_capacity(2);
            if j > 0 {
                out.extend(family_ordinal(1, i, j - 1));
            }
            out.extend(family_ordinal(1, i, j + 1));
            out
        }
        _ => {
            let (i, w) = unpair(q);
            let z = zig(w);
            [z - 1, z + 1]
                .into_iter()
                .filter_map(|z| family_ordinal(2, i, unzig(z)))
                .collect()
        }
    }
}

fn chain_structure(inv: &ChainInventory) -> Result<StructureSpec> {
    let mut sig = Signature::new();
    let v = sig.add_sort("V")?;
    sig.add_relation("E", vec![v, v])?;
    let index = Arc::new(FIndex::new(inv));
    let used = inv.f_used;
    let decide_index = index.clone();
    let support_index = index;
    let rules = RuleBased {
        sorts: vec![SortRule {
            member: Arc::new(move |m| m % 3 != 0 || m / 3 < used),
            bound: None,
        }],
        relations: vec![RelationRule {
            decide: Arc::new(move |t| neighbors(&decide_index, t[0]).contains(&t[1])),
            support: Arc::new(move |b| match (b[0], b[1]) {
                (Some(x), y) => Support::Finite(
                    neighbors(&support_index, x)
                        .into_iter()
                        .filter(|n| y.is_none_or(|y| y == *n))
                        .map(|n| vec![x, n])
                        .collect(),
                ),
                (None, Some(y)) => Support::Finite(
                    neighbors(&support_index, y).into_iter().map(|n| vec![n, y]).collect(),
                ),
                (None, None) => Support::Unbounded,
            }),
        }],
    };
    StructureSpec::rule_based(sig, rules)
}

/// Runs stages `1..=stages`.
pub fn build_chain_graph(f: &LimitFunction, stages: usize) -> Result<(StructureSpec, ChainInventory)> {
    let mut b = ChainBuilder::new(f.clone());
    b.run_to(stages)?;
    Ok((b.structure()?, b.inventory))
}

/// A finite chain found below a horizon: its two ends and its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoundChain {
    pub ends: (u64, u64),
    pub order: u64,
}

/// Finite chains whose vertices all lie below `horizon`, found by walking
/// from degree-1 vertices. Chains reaching the horizon are left out.
pub fn finite_chains(s: &StructureSpec, horizon: u64) -> Result<Vec<FoundChain>> {
    let e = s
        .sig
        .relation_id("E")
        .ok_or_else(|| Error::UnknownRelation("E".into()))?;
    let ty = s.sig.relation(e).ty.clone();
    if ty.len() != 2 || ty.sorts()[0] != ty.sorts()[1] {
        return Err(Error::TypeMismatch("E must be a binary relation on one sort".into()));
    }
    let sort: SortId = ty.sorts()[0];
    let nbrs = |x: u64| -> Option<Vec<u64>> {
        match s.support(e, &[Some(x), None]) {
            Support::Finite(c) => Some(c.into_iter().map(|t| t[1]).collect()),
            Support::Unbounded => None,
        }
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in s.domain(sort, horizon).0 {
        if seen.contains(&v) {
            continue;
        }
        let first = match nbrs(v).as_deref() {
            Some([w]) => *w,
            _ => continue,
        };
        let (mut prev, mut cur, mut order) = (v, first, 2u64);
        let end = loop {
            if cur >= horizon {
                break None;
            }
            match nbrs(cur).as_deref() {
                Some([_]) => break Some(cur),
                Some([a, b]) => {
                    let next = if *a == prev { *b } else { *a };
                    prev = cur;
                    cur = next;
                    order += 1;
                }
                _ => break None,
            }
        };
        if let Some(w) = end {
            seen.insert(v);
            seen.insert(w);
            out.push(FoundChain { ends: (v, w), order });
        }
    }
    Ok(out)
}

/// Exponent parities j_n mod 2 of the finite chains of order pₙ^{j_n}
/// found below `horizon`.
pub fn decode_parities(s: &StructureSpec, horizon: u64) -> Result<BTreeMap<usize, u32>> {
    let mut out = BTreeMap::new();
    for c in finite_chains(s, horizon)? {
        let (p, j) = prime_power(c.order).ok_or(Error::NotPrimePower(c.order))?;
        let n = prime_index(p).expect("prime_power returns a prime");
        if out.insert(n, j % 2).is_some() {
            return Err(Error::InvalidArgument(format!(
                "two finite chains with orders a power of {p}"
            )));
        }
    }
    Ok(out)
}

/// Relation id of `E` in structures built here.
pub const EDGE: RelId = RelId(0);
