//! A one-sorted structure in which b_e ∈ dcl_Γ({a_e}) for Γ = {F(x,y;z)}
//! exactly when column e of the source is finite.
//!
//! Layout of the universe Y = ℕ: ordinal 0 is ⋆. For m = 1 + 4q + c:
//! c = 0 is a_q, c = 1 is b_q, c = 2 is the q-th H vertex h(i, j) with
//! q = tri(i, j), and c = 3 is in C: for even q = 2⟨i, j⟩ the element
//! r_{i,∞,j}, for odd q = 2⟨i, tri(k, j)⟩ + 1 the j-th element of P_{i,k}.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::pairing::{pair, tri, unpair, untri};
use super::source::EnumerationSource;
use crate::error::Result;
use crate::signature::{RelId, Signature, SortId};
use crate::structure::{Element, RelationRule, RuleBased, SortRule, StructureSpec, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Vertex {
    Star,
    A(u64),
    B(u64),
    /// interior vertex j of the chain L_i
    H(u64, u64),
    /// r_{i,∞,j}
    R(u64, u64),
    /// element j of P_{i,k}
    P(u64, u64, u64),
}

impl Vertex {
    pub fn classify(m: u64) -> Vertex {
        if m == 0 {
            return Vertex::Star;
        }
        let t = m - 1;
        let q = t / 4;
        match t % 4 {
            0 => Vertex::A(q),
            1 => Vertex::B(q),
            2 => {
                let (i, j) = untri(q);
                Vertex::H(i, j)
            }
            _ if q % 2 == 0 => {
                let (i, j) = unpair(q / 2);
                Vertex::R(i, j)
            }
            _ => {
                let (i, w) = unpair(q / 2);
                let (k, j) = untri(w);
                Vertex::P(i, k, j)
            }
        }
    }

    /// `None` when the ordinal overflows u64.
    pub fn ordinal(self) -> Option<u64> {
        let at = |c: u64, q: u64| q.checked_mul(4)?.checked_add(1 + c);
        match self {
            Vertex::Star => Some(0),
            Vertex::A(i) => at(0, i),
            Vertex::B(i) => at(1, i),
            Vertex::H(i, j) if j < i => at(2, tri(i, j)?),
            Vertex::R(i, j) => at(3, pair(i, j)?.checked_mul(2)?),
            Vertex::P(i, k, j) if j < k => at(3, pair(i, tri(k, j)?)?.checked_mul(2)?.checked_add(1)?),
            _ => None,
        }
    }
}

fn ord(v: Vertex) -> Option<u64> {
    v.ordinal()
}

/// Everything F and E need to know about the source.
struct Layout {
    /// sup of each finite listed column; absent columns are empty
    sup: BTreeMap<u64, u64>,
    infinite: std::collections::BTreeSet<u64>,
}

impl Layout {
    /// Does the ⋆-triple (r_{e,∞,k}, a_e, ⋆) belong to F?
    fn spoiled(&self, e: u64, k: u64) -> bool {
        self.infinite.contains(&e) || self.sup.get(&e).is_some_and(|n| k <= *n)
    }

    /// Vertices of ℱ_{r_{i,∞,k}} in path order: a_i, P_{i,k}, b_i.
    fn witness_path(&self, i: u64, k: u64) -> Vec<Vertex> {
        let mut out = vec![Vertex::A(i)];
        out.extend((0..k).map(|j| Vertex::P(i, k, j)));
        out.push(Vertex::B(i));
        out
    }

    /// ℱ_r as a list when it is finite.
    fn finite_edges(&self, r: Vertex) -> Option<Vec<(Vertex, Vertex)>> {
        match r {
            Vertex::R(i, k) => {
                let path = self.witness_path(i, k);
                let mut out: Vec<(Vertex, Vertex)> = path.windows(2).map(|w| (w[0], w[1])).collect();
                if self.spoiled(i, k) {
                    out.push((Vertex::A(i), Vertex::Star));
                }
                Some(out)
            }
            Vertex::A(_) => None,
            _ => Some(Vec::new()),
        }
    }

    fn holds_f(&self, r: Vertex, s: Vertex, t: Vertex) -> bool {
        match r {
            Vertex::A(i) => match (s, t) {
                (Vertex::A(x), Vertex::R(y, 0)) => x == i && y == i,
                (Vertex::R(x, j), Vertex::R(y, j2)) => x == i && y == i && j2 == j + 1,
                _ => false,
            },
            Vertex::R(i, k) => {
                (s == Vertex::A(i) && t == Vertex::Star && self.spoiled(i, k))
                    || self.successor_on_path(i, k, s) == Some(t)
            }
            _ => false,
        }
    }

    /// Next vertex after s on ℱ_{r_{i,∞,k}}'s path.
    fn successor_on_path(&self, i: u64, k: u64, s: Vertex) -> Option<Vertex> {
        let first = if k == 0 { Vertex::B(i) } else { Vertex::P(i, k, 0) };
        match s {
            Vertex::A(x) if x == i => Some(first),
            Vertex::P(x, k2, j) if x == i && k2 == k => Some(if j + 1 == k {
                Vertex::B(i)
            } else {
                Vertex::P(i, k, j + 1)
            }),
            _ => None,
        }
    }

    /// Candidate F-triples agreeing with the bound coordinates.
    fn support_f(&self, b: [Option<Vertex>; 3]) -> Option<Vec<[Vertex; 3]>> {
        let mut cands: Vec<[Vertex; 3]> = Vec::new();
        match b {
            [Some(r), s, t] => match self.finite_edges(r) {
                Some(edges) => cands.extend(edges.into_iter().map(|(s, t)| [r, s, t])),
                None => {
                    let Vertex::A(i) = r else { unreachable!() };
                    match (s, t) {
                        (Some(Vertex::A(x)), _) if x == i => cands.push([r, Vertex::A(i), Vertex::R(i, 0)]),
                        (Some(Vertex::R(x, j)), _) if x == i => {
                            cands.push([r, Vertex::R(i, j), Vertex::R(i, j + 1)])
                        }
                        (Some(_), _) => {}
                        (None, Some(Vertex::R(x, 0))) if x == i => cands.push([r, Vertex::A(i), Vertex::R(i, 0)]),
                        (None, Some(Vertex::R(x, j))) if x == i => {
                            cands.push([r, Vertex::R(i, j - 1), Vertex::R(i, j)])
                        }
                        (None, Some(_)) => {}
                        (None, None) => return None,
                    }
                }
            },
            [None, Some(s), t] => match s {
                Vertex::A(i) => match t {
                    Some(Vertex::R(x, 0)) if x == i => cands.push([Vertex::A(i), s, Vertex::R(i, 0)]),
                    Some(Vertex::P(x, k, 0)) if x == i => cands.push([Vertex::R(i, k), s, Vertex::P(i, k, 0)]),
                    Some(Vertex::B(x)) if x == i => cands.push([Vertex::R(i, 0), s, Vertex::B(i)]),
                    Some(Vertex::Star) => {
                        if self.infinite.contains(&i) {
                            return None;
                        }
                        if let Some(n) = self.sup.get(&i) {
                            cands.extend((0..=*n).map(|k| [Vertex::R(i, k), s, Vertex::Star]));
                        }
                    }
                    Some(_) => {}
                    None => return None,
                },
                Vertex::R(i, j) => cands.push([Vertex::A(i), s, Vertex::R(i, j + 1)]),
                Vertex::P(i, k, _) => {
                    if let Some(t) = self.successor_on_path(i, k, s) {
                        cands.push([Vertex::R(i, k), s, t]);
                    }
                }
                _ => {}
            },
            [None, None, Some(t)] => match t {
                Vertex::R(i, 0) => cands.push([Vertex::A(i), Vertex::A(i), t]),
                Vertex::R(i, j) => cands.push([Vertex::A(i), Vertex::R(i, j - 1), t]),
                Vertex::P(i, k, 0) => cands.push([Vertex::R(i, k), Vertex::A(i), t]),
                Vertex::P(i, k, j) => cands.push([Vertex::R(i, k), Vertex::P(i, k, j - 1), t]),
                Vertex::B(_) | Vertex::Star => return None,
                _ => {}
            },
            [None, None, None] => return None,
        }
        Some(
            cands
                .into_iter()
                .filter(|c| c.iter().zip(&b).all(|(v, want)| want.is_none_or(|w| w == *v)))
                .collect(),
        )
    }
}

/// E-neighbours: L_i is a_i, h(i,0), …, h(i,i−1), b_i.
fn e_neighbors(v: Vertex) -> Vec<Vertex> {
    let chain = |i: u64, p: u64| -> Vertex {
        if p == 0 {
            Vertex::A(i)
        } else if p == i + 1 {
            Vertex::B(i)
        } else {
            Vertex::H(i, p - 1)
        }
    };
    let (i, p) = match v {
        Vertex::A(i) => (i, 0),
        Vertex::B(i) => (i, i + 1),
        Vertex::H(i, j) => (i, j + 1),
        _ => return Vec::new(),
    };
    let mut out = Vec::with_capacity(2);
    if p > 0 {
        out.push(chain(i, p - 1));
    }
    if p < i + 1 {
        out.push(chain(i, p + 1));
    }
    out
}

/// Unary relations of the K-reduct, in signature order.
pub const UNARY: [&str; 5] = ["A", "B", "C", "D", "H"];

pub(crate) fn unary_holds(name: &str, v: Vertex) -> bool {
    matches!(
        (name, v),
        ("A", Vertex::A(_))
            | ("B", Vertex::B(_))
            | ("C", Vertex::R(..) | Vertex::P(..))
            | ("D", Vertex::Star)
            | ("H", Vertex::H(..))
    )
}

pub(crate) fn unary_rule(name: &'static str) -> RelationRule {
    RelationRule {
        decide: Arc::new(move |t| unary_holds(name, Vertex::classify(t[0]))),
        support: Arc::new(move |b| match b[0] {
            Some(x) if !unary_holds(name, Vertex::classify(x)) => Support::Finite(Vec::new()),
            Some(x) => Support::Finite(vec![vec![x]]),
            None if name == "D" => Support::Finite(vec![vec![0]]),
            None => Support::Unbounded,
        }),
    }
}

pub(crate) fn e_rule() -> RelationRule {
    let nbrs = |x: u64| -> Vec<u64> { e_neighbors(Vertex::classify(x)).into_iter().filter_map(ord).collect() };
    RelationRule {
        decide: Arc::new(move |t| nbrs(t[0]).contains(&t[1])),
        support: Arc::new(move |b| match (b[0], b[1]) {
            (Some(x), y) => Support::Finite(
                nbrs(x)
                    .into_iter()
                    .filter(|n| y.is_none_or(|y| y == *n))
                    .map(|n| vec![x, n])
                    .collect(),
            ),
            (None, Some(y)) => Support::Finite(nbrs(y).into_iter().map(|n| vec![n, y]).collect()),
            (None, None) => Support::Unbounded,
        }),
    }
}

pub struct PathWitness {
    pub structure: StructureSpec,
    pub source: EnumerationSource,
}

impl PathWitness {
    pub fn element(v: Vertex) -> Option<Element> {
        v.ordinal().map(|m| Element::new(SortId(0), m))
    }

    /// Least k with P_{e,k} unspoiled, i.e. sup W_e + 1; `None` when the
    /// column is infinite.
    pub fn least_witness(&self, e: u64) -> Option<u64> {
        self.source.sup(e).map(|s| s.map_or(0, |n| n + 1))
    }

    /// Analytic answer to b_e ∈ dcl_Γ({a_e}).
    pub fn in_dcl(&self, e: u64) -> bool {
        self.least_witness(e).is_some()
    }

    /// `star`, `a_i`, `b_i`, `h_i_j`, `r_i_j`, `p_i_k_j`.
    pub fn named(&self, name: &str) -> Option<Element> {
        parse_vertex(name).and_then(Self::element)
    }
}

pub(crate) fn parse_vertex(name: &str) -> Option<Vertex> {
    if name == "star" {
        return Some(Vertex::Star);
    }
    let mut parts = name.split('_');
    let kind = parts.next()?;
    let nums: Vec<u64> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
    match (kind, nums.as_slice()) {
        ("a", [i]) => Some(Vertex::A(*i)),
        ("b", [i]) => Some(Vertex::B(*i)),
        ("h", [i, j]) if j < i => Some(Vertex::H(*i, *j)),
        ("r", [i, j]) => Some(Vertex::R(*i, *j)),
        ("p", [i, k, j]) if j < k => Some(Vertex::P(*i, *k, *j)),
        _ => None,
    }
}

/// The K-reduct signature: sort `Y`, unary A, B, C, D, H, binary E.
pub(crate) fn k_signature() -> Result<Signature> {
    let mut sig = Signature::new();
    let y = sig.add_sort("Y")?;
    for name in UNARY {
        sig.add_relation(name, vec![y])?;
    }
    sig.add_relation("E", vec![y, y])?;
    Ok(sig)
}

/// Relation id of F in the path-witness language.
pub const F_REL: RelId = RelId(6);

pub fn build_path_witness(src: &EnumerationSource) -> Result<PathWitness> {
    let mut sig = k_signature()?;
    let y = SortId(0);
    sig.add_relation("F", vec![y, y, y])?;
    let layout = Arc::new(Layout {
        sup: src
            .table()
            .into_iter()
            .filter(|(e, _)| !src.is_infinite(*e))
            .filter_map(|(e, ns)| ns.into_iter().max().map(|n| (e, n)))
            .collect(),
        infinite: src.infinite_columns().clone(),
    });
    let mut relations: Vec<RelationRule> = UNARY.iter().map(|n| unary_rule(n)).collect();
    relations.push(e_rule());
    let decide_layout = layout.clone();
    relations.push(RelationRule {
        decide: Arc::new(move |t| {
            decide_layout.holds_f(Vertex::classify(t[0]), Vertex::classify(t[1]), Vertex::classify(t[2]))
        }),
        support: Arc::new(move |b| {
            let bound = [b[0], b[1], b[2]].map(|x| x.map(Vertex::classify));
            match layout.support_f(bound) {
                None => Support::Unbounded,
                Some(c) => Support::Finite(
                    c.into_iter()
                        .filter_map(|t| t.iter().map(|v| v.ordinal()).collect::<Option<Vec<u64>>>())
                        .collect(),
                ),
            }
        }),
    });
    let rules = RuleBased {
        sorts: vec![SortRule {
            member: Arc::new(|_| true),
            bound: None,
        }],
        relations,
    };
    Ok(PathWitness {
        structure: StructureSpec::rule_based(sig, rules)?,
        source: src.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{cl_fixpoint, count_solutions, CountVerdict, MembershipVerdict, SolutionCountSet};
    use crate::closure::set_membership;
    use crate::parser::parse_formula;
    use crate::structure::StageBudget;
    use std::collections::BTreeSet;

    fn el(v: Vertex) -> Element {
        PathWitness::element(v).unwrap()
    }

    #[test]
    fn layout_roundtrip() {
        for m in 0..5000 {
            assert_eq!(Vertex::classify(m).ordinal(), Some(m));
        }
    }

    #[test]
    fn chains_have_order_i_plus_two() {
        for i in 0..6 {
            let mut prev = Vertex::A(i);
            let mut cur = e_neighbors(prev)[0];
            let mut order = 2;
            while e_neighbors(cur).len() == 2 {
                let n = e_neighbors(cur);
                let next = if n[0] == prev { n[1] } else { n[0] };
                prev = cur;
                cur = next;
                order += 1;
            }
            assert_eq!(cur, Vertex::B(i));
            assert_eq!(order, i + 2);
        }
    }

    fn gamma(pw: &PathWitness) -> Vec<crate::formula::PartitionedFormula> {
        vec![parse_formula("F(x,y;z)", &pw.structure.sig).unwrap()]
    }

    #[test]
    fn empty_source_witnessed_by_first_path() {
        let pw = build_path_witness(&EnumerationSource::default()).unwrap();
        let b = StageBudget::new(100, 4, 8).unwrap();
        for e in 0..4 {
            let base = [el(Vertex::A(e))].into();
            let r = set_membership(
                &pw.structure,
                &gamma(&pw),
                &base,
                &SolutionCountSet::singleton(),
                el(Vertex::B(e)),
                &b,
            )
            .unwrap();
            assert_eq!(r.verdict, MembershipVerdict::Member);
            assert_eq!(pw.least_witness(e), Some(0));
        }
    }

    #[test]
    fn spoiled_paths_are_skipped() {
        let src = EnumerationSource::parse("2:0,1,2", &[]).unwrap();
        let pw = build_path_witness(&src).unwrap();
        let pf = &gamma(&pw)[0];
        let b = StageBudget::new(100, 20, 8).unwrap();
        for k in 0..5 {
            let count = count_solutions(&pw.structure, pf, &[el(Vertex::R(2, k)), el(Vertex::A(2))], &b).unwrap();
            assert_eq!(count, CountVerdict::Exact(if k <= 2 { 2 } else { 1 }));
        }
        let base = [el(Vertex::A(2))].into();
        let r = cl_fixpoint(&pw.structure, &gamma(&pw), &base, &SolutionCountSet::singleton(), &b).unwrap();
        assert!(r.elements.contains(&el(Vertex::B(2))));
        let via: BTreeSet<Element> = r
            .witness(el(Vertex::B(2)))
            .iter()
            .flat_map(|t| t.tuple.clone())
            .collect();
        assert!(via.contains(&el(Vertex::R(2, 3))));
        for k in 1..3 {
            assert!(!r.elements.contains(&el(Vertex::P(2, k, 0))));
        }
        assert!(r.elements.contains(&el(Vertex::P(2, 3, 0))));
        assert_eq!(pw.least_witness(2), Some(3));
    }

    #[test]
    fn infinite_column_stays_unknown() {
        let src = EnumerationSource::parse("", &[1]).unwrap();
        let pw = build_path_witness(&src).unwrap();
        for iters in [2, 6, 12] {
            let b = StageBudget::new(100, iters, 8).unwrap();
            let base = [el(Vertex::A(1))].into();
            let r = set_membership(
                &pw.structure,
                &gamma(&pw),
                &base,
                &SolutionCountSet::singleton(),
                el(Vertex::B(1)),
                &b,
            )
            .unwrap();
            assert_eq!(r.verdict, MembershipVerdict::Unknown);
        }
        assert!(!pw.in_dcl(1));
    }

    #[test]
    fn names() {
        let pw = build_path_witness(&EnumerationSource::default()).unwrap();
        assert_eq!(pw.named("a_0"), Some(el(Vertex::A(0))));
        assert_eq!(pw.named("star"), Some(Element::new(SortId(0), 0)));
        assert_eq!(pw.named("h_1_1"), None);
    }
}
