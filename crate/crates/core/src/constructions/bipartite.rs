//! Two structures Z(G₀), Z(G₁) over the path-witness universe that differ
//! only in the F-triples (u₂, a, b) encoding a bipartite graph G on A × B.
//!
//! u₀ and u₁ are the C elements with ordinals 4 and 8, u₂ is ⋆ (ordinal 0).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::pairing::{pair, unpair};
use super::path_witness::{e_rule, k_signature, parse_vertex, unary_rule, Vertex, UNARY};
use super::source::EnumerationSource;
use crate::error::{Error, Result};
use crate::formula::{Formula, PartitionedFormula, Var};
use crate::signature::{RelId, Signature, SortId};
use crate::structure::{
    Cardinality, CardinalityOracle, Element, RelationRule, RuleBased, SortRule, StructureSpec, Support,
};

pub const U0: u64 = 4;
pub const U1: u64 = 8;
pub const U2: u64 = 0;
const U: [u64; 3] = [U0, U1, U2];

/// Relation ids in the bipartite language.
pub const U_REL: RelId = RelId(6);
pub const F_REL: RelId = RelId(7);

/// A bipartite graph between A (indices i of a_i) and B (indices j of b_j).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    edges: BTreeSet<(u64, u64)>,
    /// a_e is adjacent to b_⟨e,n⟩ for every n.
    dense: BTreeSet<u64>,
}

impl BipartiteGraph {
    /// Edges given as ordinals of the universe, each from an A vertex to a
    /// B vertex.
    pub fn from_edges(edges: &[(u64, u64)]) -> Result<Self> {
        let mut out = BipartiteGraph::default();
        for (s, t) in edges {
            match (Vertex::classify(*s), Vertex::classify(*t)) {
                (Vertex::A(i), Vertex::B(j)) => {
                    out.edges.insert((i, j));
                }
                _ => return Err(Error::NonBipartiteEdge(format!("({s},{t})"))),
            }
        }
        Ok(out)
    }

    /// a_e has |W_e| neighbours b_⟨e,n⟩, one per n ∈ W_e.
    pub fn degree_graph(src: &EnumerationSource) -> Result<Self> {
        let mut out = BipartiteGraph {
            dense: src.infinite_columns().clone(),
            ..Default::default()
        };
        for (e, n) in src.pairs() {
            out.edges.insert((*e, pair(*e, *n).ok_or(Error::Overflow("pairing"))?));
        }
        Ok(out)
    }

    /// a_e has the single neighbour b_⟨e,0⟩ when {e}(0)↓ and none otherwise.
    pub fn halting_graph(src: &EnumerationSource) -> Result<Self> {
        let mut out = BipartiteGraph::default();
        for e in 0..src.columns() {
            if src.halts(e, 0) {
                out.edges.insert((e, pair(e, 0).ok_or(Error::Overflow("pairing"))?));
            }
        }
        Ok(out)
    }

    /// Neighbours of a_i, or `None` when there are infinitely many.
    pub fn neighbors_of_a(&self, i: u64) -> Option<Vec<u64>> {
        if self.dense.contains(&i) {
            return None;
        }
        Some(self.edges.range((i, 0)..=(i, u64::MAX)).map(|e| e.1).collect())
    }

    pub fn neighbors_of_b(&self, j: u64) -> Vec<u64> {
        let mut out: BTreeSet<u64> = self.edges.iter().filter(|e| e.1 == j).map(|e| e.0).collect();
        let (e, _) = unpair(j);
        if self.dense.contains(&e) {
            out.insert(e);
        }
        out.into_iter().collect()
    }

    pub fn has_edge(&self, i: u64, j: u64) -> bool {
        self.edges.contains(&(i, j)) || (self.dense.contains(&i) && unpair(j).0 == i)
    }

    pub fn degree(&self, i: u64) -> Cardinality {
        match self.neighbors_of_a(i) {
            Some(n) => Cardinality::Finite(n.len() as u64),
            None => Cardinality::Infinite,
        }
    }
}

fn in_u(m: u64) -> bool {
    U.contains(&m)
}

/// ℱ₀ runs through Y ∖ U in increasing order.
fn next(s: u64) -> Option<u64> {
    (s.checked_add(1)?..).find(|x| !in_u(*x))
}

fn prev(t: u64) -> Option<u64> {
    (0..t).rev().find(|x| !in_u(*x))
}

fn ordinal_a(i: u64) -> Option<u64> {
    Vertex::A(i).ordinal()
}

fn ordinal_b(j: u64) -> Option<u64> {
    Vertex::B(j).ordinal()
}

fn holds_f(g: &BipartiteGraph, r: u64, s: u64, t: u64) -> bool {
    match r {
        U0 => (s, t) == (U0, U1) || (!in_u(s) && !in_u(t) && next(s) == Some(t)),
        U1 => (s, t) == (U1, U2) || (!in_u(s) && !in_u(t) && next(t) == Some(s)),
        U2 => {
            (s, t) == (U2, U0)
                || match (Vertex::classify(s), Vertex::classify(t)) {
                    (Vertex::A(i), Vertex::B(j)) => g.has_edge(i, j),
                    _ => false,
                }
        }
        _ => false,
    }
}

/// Candidates (s, t) of ℱ_r for a fixed r ∈ U; `None` when unbounded.
fn support_fixed_r(g: &BipartiteGraph, r: u64, s: Option<u64>, t: Option<u64>) -> Option<Vec<(u64, u64)>> {
    let own = match r {
        U0 => (U0, U1),
        U1 => (U1, U2),
        _ => (U2, U0),
    };
    let mut out = Vec::new();
    match (s, t) {
        (Some(s), _) if s == own.0 => out.push(own),
        (Some(s), _) if in_u(s) => {}
        (Some(s), _) => match r {
            U0 => out.extend(next(s).map(|t| (s, t))),
            U1 => out.extend(prev(s).map(|t| (s, t))),
            _ => {
                if let Vertex::A(i) = Vertex::classify(s) {
                    out.extend(g.neighbors_of_a(i)?.into_iter().filter_map(ordinal_b).map(|t| (s, t)));
                }
            }
        },
        (None, Some(t)) if t == own.1 => out.push(own),
        (None, Some(t)) if in_u(t) => {}
        (None, Some(t)) => match r {
            U0 => out.extend(prev(t).map(|s| (s, t))),
            U1 => out.extend(next(t).map(|s| (s, t))),
            _ => {
                if let Vertex::B(j) = Vertex::classify(t) {
                    out.extend(g.neighbors_of_b(j).into_iter().filter_map(ordinal_a).map(|s| (s, t)));
                }
            }
        },
        (None, None) => return None,
    }
    Some(out)
}

fn support_f(g: &BipartiteGraph, b: &[Option<u64>]) -> Support {
    let rs: Vec<u64> = match b[0] {
        Some(r) if in_u(r) => vec![r],
        Some(_) => return Support::Finite(Vec::new()),
        None => U.to_vec(),
    };
    let mut out = Vec::new();
    for r in rs {
        match support_fixed_r(g, r, b[1], b[2]) {
            None => return Support::Unbounded,
            Some(c) => out.extend(
                c.into_iter()
                    .filter(|(s, t)| b[1].is_none_or(|x| x == *s) && b[2].is_none_or(|x| x == *t))
                    .map(|(s, t)| vec![r, s, t]),
            ),
        }
    }
    Support::Finite(out)
}

/// Recognises ψ(x,y;z) := F(x,y,z) & !F(x,z,y) and answers at (u₂, a_e).
struct DegreeOracle {
    graph: Arc<BipartiteGraph>,
}

fn is_psi(pf: &PartitionedFormula) -> bool {
    let (x, y, z) = match (pf.left.as_slice(), pf.right.as_slice()) {
        ([x, y], [z]) => (x, y, z),
        _ => return false,
    };
    let expected = Formula::and(
        Formula::Atom(F_REL, vec![x.clone(), y.clone(), z.clone()]),
        Formula::not(Formula::Atom(F_REL, vec![x.clone(), z.clone(), y.clone()])),
    );
    pf.formula == expected
}

impl CardinalityOracle for DegreeOracle {
    fn cardinality(&self, pf: &PartitionedFormula, a: &[Element]) -> Option<Cardinality> {
        if !is_psi(pf) || a[0].index != U2 {
            return None;
        }
        match Vertex::classify(a[1].index) {
            Vertex::A(i) => Some(self.graph.degree(i)),
            _ => None,
        }
    }
}

/// Signature: sort `Y`; unary A, B, C, D, H; binary E; unary U; ternary F.
pub fn bipartite_signature() -> Result<Signature> {
    let mut sig = k_signature()?;
    let y = SortId(0);
    sig.add_relation("U", vec![y])?;
    sig.add_relation("F", vec![y, y, y])?;
    Ok(sig)
}

/// Z(G).
pub fn build_z(g: &BipartiteGraph) -> Result<StructureSpec> {
    let sig = bipartite_signature()?;
    let g = Arc::new(g.clone());
    let mut relations: Vec<RelationRule> = UNARY.iter().map(|n| unary_rule(n)).collect();
    relations.push(e_rule());
    relations.push(RelationRule {
        decide: Arc::new(|t| in_u(t[0])),
        support: Arc::new(|b| match b[0] {
            Some(x) if !in_u(x) => Support::Finite(Vec::new()),
            Some(x) => Support::Finite(vec![vec![x]]),
            None => Support::Finite(U.iter().map(|u| vec![*u]).collect()),
        }),
    });
    let (gd, gs) = (g.clone(), g.clone());
    relations.push(RelationRule {
        decide: Arc::new(move |t| holds_f(&gd, t[0], t[1], t[2])),
        support: Arc::new(move |b| support_f(&gs, b)),
    });
    let rules = RuleBased {
        sorts: vec![SortRule {
            member: Arc::new(|_| true),
            bound: None,
        }],
        relations,
    };
    Ok(StructureSpec::rule_based(sig, rules)?.with_oracle(Arc::new(DegreeOracle { graph: g })))
}

pub struct BipartitePair {
    pub z0: StructureSpec,
    pub z1: StructureSpec,
    pub g0: BipartiteGraph,
    pub g1: BipartiteGraph,
}

pub fn build_bipartite_pair(g0: &BipartiteGraph, g1: &BipartiteGraph) -> Result<BipartitePair> {
    Ok(BipartitePair {
        z0: build_z(g0)?,
        z1: build_z(g1)?,
        g0: g0.clone(),
        g1: g1.clone(),
    })
}

/// G₀ and G₁ derived from an enumeration source.
pub fn bipartite_from_source(src: &EnumerationSource) -> Result<BipartitePair> {
    build_bipartite_pair(&BipartiteGraph::degree_graph(src)?, &BipartiteGraph::halting_graph(src)?)
}

/// ψ(x,y;z) := F(x,y,z) & !F(x,z,y).
pub fn psi_formula(sig: &Signature) -> Result<PartitionedFormula> {
    let y = SortId(0);
    let f = sig
        .relation_id("F")
        .ok_or_else(|| Error::UnknownRelation("F".into()))?;
    let (a, b, c) = (Var::new("x", y), Var::new("y", y), Var::new("z", y));
    let body = Formula::and(
        Formula::atom(sig, f, vec![a.clone(), b.clone(), c.clone()])?,
        Formula::not(Formula::atom(sig, f, vec![a.clone(), c.clone(), b.clone()])?),
    );
    PartitionedFormula::new(sig, body, vec![a, b], vec![c])
}

/// `u0`, `u1`, `u2`, and the path-witness names (`a_i`, `b_i`, …).
pub fn named(name: &str) -> Option<Element> {
    let m = match name {
        "u0" => U0,
        "u1" => U1,
        "u2" => U2,
        _ => parse_vertex(name)?.ordinal()?,
    };
    Some(Element::new(SortId(0), m))
}

/// Recovers the chain indexing of a graph isomorphic to a finite part of
/// (A ∪ B ∪ H, E): the component of order i+2 yields (a_i, b_i), with a_i
/// its end in `a_vertices`.
pub fn decode_chain_indexing(
    edges: &[(u64, u64)],
    a_vertices: &BTreeSet<u64>,
) -> Result<BTreeMap<u64, (u64, u64)>> {
    let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for (s, t) in edges {
        if s == t {
            return Err(Error::InvalidArgument(format!("loop at {s}")));
        }
        adj.entry(*s).or_default().insert(*t);
        adj.entry(*t).or_default().insert(*s);
    }
    let mut seen = BTreeSet::new();
    let mut out = BTreeMap::new();
    for (v, n) in &adj {
        if seen.contains(v) || n.len() != 1 || !a_vertices.contains(v) {
            continue;
        }
        let (mut prev, mut cur, mut order) = (*v, *n.iter().next().expect("degree 1"), 2u64);
        seen.insert(*v);
        loop {
            seen.insert(cur);
            let ns = &adj[&cur];
            match ns.len() {
                1 => break,
                2 => {
                    let next = *ns.iter().find(|x| **x != prev).expect("degree 2");
                    prev = cur;
                    cur = next;
                    order += 1;
                    if order > adj.len() as u64 {
                        return Err(Error::InvalidArgument("component is a cycle".into()));
                    }
                }
                _ => return Err(Error::InvalidArgument(format!("vertex {cur} has degree {}", ns.len()))),
            }
        }
        if out.insert(order - 2, (*v, cur)).is_some() {
            return Err(Error::InvalidArgument(format!("two chains of order {order}")));
        }
    }
    if seen.len() != adj.len() {
        return Err(Error::InvalidArgument("some component has no end in A".into()));
    }
    Ok(out)
}
