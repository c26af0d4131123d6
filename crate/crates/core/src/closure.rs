//! Solution counting, ACL/DCL membership verdicts and the closure operator
//! `cl^i_{Φ,N}(B, S)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{Formula, PartitionedFormula};
use crate::signature::{Signature, SortId};
use crate::structure::{
    for_each_tuple, tuple_string, Cardinality, Element, Evaluator, StageBudget, StructureSpec,
    Support, TruthVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountVerdict {
    /// The search space was exhausted.
    Exact(u64),
    AtLeast(u64),
    Unknown,
}

impl fmt::Display for CountVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountVerdict::Exact(k) => write!(f, "verdict=Exact k={k}"),
            CountVerdict::AtLeast(k) => write!(f, "verdict=AtLeast k={k}"),
            CountVerdict::Unknown => write!(f, "verdict=Unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipVerdict {
    Member,
    NonMember,
    Unknown,
}

impl fmt::Display for MembershipVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MembershipVerdict::Member => "Member",
            MembershipVerdict::NonMember => "NonMember",
            MembershipVerdict::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// The outcome of a staged solution search, with the solutions found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solutions {
    pub verdict: CountVerdict,
    /// Right tuples satisfying the formula, in ascending order. Complete
    /// when the verdict is `Exact`.
    pub found: Vec<Vec<Element>>,
}

type Binding = Vec<Option<u64>>;

const JOIN_LIMIT: usize = 1 << 16;

struct Cover<'a> {
    s: &'a StructureSpec,
    pf: &'a PartitionedFormula,
    left: BTreeMap<&'a str, u64>,
}

impl Cover<'_> {
    fn right_index(&self, name: &str) -> Option<usize> {
        self.pf.right.iter().position(|v| v.name == name)
    }

    fn trivial(&self) -> Vec<Binding> {
        vec![vec![None; self.pf.right.len()]]
    }

    fn is_trivial(c: &[Binding]) -> bool {
        c.iter().any(|b| b.iter().all(Option::is_none))
    }

    /// Partial right-tuples such that every satisfying right tuple agrees
    /// with at least one of them.
    fn cover(&self, f: &Formula) -> Vec<Binding> {
        match f {
            Formula::Const(false) => Vec::new(),
            Formula::Const(true) | Formula::Not(_) | Formula::Forall(..) => self.trivial(),
            Formula::Atom(r, args) => {
                let query: Vec<Option<u64>> = args
                    .iter()
                    .map(|v| self.left.get(v.name.as_str()).copied())
                    .collect();
                let cands = match self.s.support(*r, &query) {
                    Support::Finite(c) => c,
                    Support::Unbounded => return self.trivial(),
                };
                let mut out = BTreeSet::new();
                'cand: for t in cands {
                    if t.len() != args.len() {
                        continue;
                    }
                    let mut binding = vec![None; self.pf.right.len()];
                    for (v, val) in args.iter().zip(&t) {
                        if let Some(known) = self.left.get(v.name.as_str()) {
                            if known != val {
                                continue 'cand;
                            }
                        } else if let Some(i) = self.right_index(&v.name) {
                            match binding[i] {
                                Some(prev) if prev != *val => continue 'cand,
                                _ => binding[i] = Some(*val),
                            }
                        }
                    }
                    out.insert(binding);
                }
                out.into_iter().collect()
            }
            Formula::Eq(a, b) => {
                let mut binding = vec![None; self.pf.right.len()];
                match (
                    self.right_index(&a.name),
                    self.right_index(&b.name),
                    self.left.get(a.name.as_str()),
                    self.left.get(b.name.as_str()),
                ) {
                    (Some(i), _, _, Some(v)) | (_, Some(i), Some(v), _) => {
                        binding[i] = Some(*v);
                        vec![binding]
                    }
                    _ => self.trivial(),
                }
            }
            Formula::And(a, b) => {
                let ca = self.cover(a);
                let cb = self.cover(b);
                if ca.is_empty() || cb.is_empty() {
                    return Vec::new();
                }
                if Self::is_trivial(&ca) {
                    return cb;
                }
                if Self::is_trivial(&cb) {
                    return ca;
                }
                if ca.len().saturating_mul(cb.len()) > JOIN_LIMIT {
                    return if ca.len() <= cb.len() { ca } else { cb };
                }
                let mut out = BTreeSet::new();
                for x in &ca {
                    'pair: for y in &cb {
                        let mut m = x.clone();
                        for (slot, v) in m.iter_mut().zip(y) {
                            match (*slot, v) {
                                (Some(p), Some(q)) if p != *q => continue 'pair,
                                (None, Some(q)) => *slot = Some(*q),
                                _ => {}
                            }
                        }
                        out.insert(m);
                    }
                }
                out.into_iter().collect()
            }
            Formula::Or(a, b) => {
                let ca = self.cover(a);
                let cb = self.cover(b);
                if Self::is_trivial(&ca) || Self::is_trivial(&cb) {
                    return self.trivial();
                }
                let set: BTreeSet<Binding> = ca.into_iter().chain(cb).collect();
                set.into_iter().collect()
            }
            Formula::Exists(_, body) => self.cover(body),
        }
    }
}

/// Searches for right tuples satisfying `pf` at `a`.
pub fn solve(
    s: &StructureSpec,
    pf: &PartitionedFormula,
    a: &[Element],
    b: &StageBudget,
) -> Result<Solutions> {
    b.validate()?;
    s.check_tuple(&pf.left_type(), a)?;
    let cover = Cover {
        s,
        pf,
        left: pf
            .left
            .iter()
            .zip(a)
            .map(|(v, e)| (v.name.as_str(), e.index))
            .collect(),
    };
    let bindings = cover.cover(&pf.formula);
    let mut ev = Evaluator::new(s, b.domain_horizon);
    let mut exhaustive = true;
    let mut candidates: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut budget_hit = false;
    for binding in &bindings {
        let mut domains = Vec::with_capacity(binding.len());
        let mut valid = true;
        for (slot, v) in binding.iter().zip(&pf.right) {
            match slot {
                Some(x) => {
                    if !s.contains(Element::new(v.sort, *x)) {
                        valid = false;
                    }
                    domains.push(vec![*x]);
                }
                None => {
                    let (d, ex) = ev.domain(v.sort);
                    exhaustive &= ex;
                    domains.push(d);
                }
            }
        }
        if !valid {
            continue;
        }
        for_each_tuple(&domains, &mut |t| {
            candidates.insert(t.to_vec());
            if candidates.len() > JOIN_LIMIT * 16 {
                budget_hit = true;
                return false;
            }
            true
        });
        if budget_hit {
            break;
        }
    }
    if budget_hit {
        exhaustive = false;
    }
    let mut env: Vec<(String, Element)> = pf
        .left
        .iter()
        .zip(a)
        .map(|(v, e)| (v.name.clone(), *e))
        .collect();
    let mut found = Vec::new();
    let mut unknown = false;
    let mut capped = false;
    for t in &candidates {
        let mark = env.len();
        let tuple: Vec<Element> = pf
            .right
            .iter()
            .zip(t)
            .map(|(v, x)| Element::new(v.sort, *x))
            .collect();
        for (v, e) in pf.right.iter().zip(&tuple) {
            env.push((v.name.clone(), *e));
        }
        let r = ev.eval(&pf.formula, &mut env);
        env.truncate(mark);
        match r {
            TruthVerdict::True => {
                found.push(tuple);
                if found.len() as u64 > b.solution_cap {
                    capped = true;
                    break;
                }
            }
            TruthVerdict::Unknown => unknown = true,
            TruthVerdict::False => {}
        }
    }
    let k = found.len() as u64;
    let verdict = if capped {
        CountVerdict::AtLeast(k)
    } else if exhaustive && !unknown {
        CountVerdict::Exact(k)
    } else if k > 0 {
        CountVerdict::AtLeast(k)
    } else {
        CountVerdict::Unknown
    };
    Ok(Solutions { verdict, found })
}

pub fn count_solutions(
    s: &StructureSpec,
    pf: &PartitionedFormula,
    a: &[Element],
    b: &StageBudget,
) -> Result<CountVerdict> {
    Ok(solve(s, pf, a, b)?.verdict)
}

fn oracle(s: &StructureSpec, pf: &PartitionedFormula, a: &[Element]) -> Option<Cardinality> {
    s.oracle.as_ref().and_then(|o| o.cardinality(pf, a))
}

/// ACL verdict from a staged count and optional analytic knowledge.
pub fn acl0_verdict(count: CountVerdict, analytic: Option<Cardinality>) -> MembershipVerdict {
    match (count, analytic) {
        (CountVerdict::Exact(_), _) => MembershipVerdict::Member,
        (_, Some(Cardinality::Infinite)) => MembershipVerdict::NonMember,
        _ => MembershipVerdict::Unknown,
    }
}

/// DCL verdict from a staged count and optional analytic knowledge.
pub fn dcl0_verdict(count: CountVerdict, analytic: Option<Cardinality>) -> MembershipVerdict {
    match (count, analytic) {
        (CountVerdict::Exact(1), _) => MembershipVerdict::Member,
        (CountVerdict::Exact(_), _) => MembershipVerdict::NonMember,
        (CountVerdict::AtLeast(k), _) if k >= 2 => MembershipVerdict::NonMember,
        (_, Some(Cardinality::Infinite)) => MembershipVerdict::NonMember,
        (_, Some(Cardinality::Finite(k))) if k != 1 => MembershipVerdict::NonMember,
        _ => MembershipVerdict::Unknown,
    }
}

/// Is `{b̄ : φ(ā; b̄)}` finite?
pub fn in_acl0(
    s: &StructureSpec,
    pf: &PartitionedFormula,
    a: &[Element],
    b: &StageBudget,
) -> Result<MembershipVerdict> {
    let count = count_solutions(s, pf, a, b)?;
    Ok(acl0_verdict(count, oracle(s, pf, a)))
}

/// Is `{b̄ : φ(ā; b̄)}` a singleton?
pub fn in_dcl0(
    s: &StructureSpec,
    pf: &PartitionedFormula,
    a: &[Element],
    b: &StageBudget,
) -> Result<MembershipVerdict> {
    let count = count_solutions(s, pf, a, b)?;
    Ok(dcl0_verdict(count, oracle(s, pf, a)))
}

/// Admissible solution counts `S`: a nonempty finite set, or all naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionCountSet {
    Finite(BTreeSet<u64>),
    AllOfN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Firing {
    Fires,
    Blocked,
    Uncertain,
}

impl SolutionCountSet {
    pub fn finite(values: impl IntoIterator<Item = u64>) -> Result<Self> {
        let set: BTreeSet<u64> = values.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidArgument("solution count set is empty".into()));
        }
        Ok(SolutionCountSet::Finite(set))
    }

    pub fn singleton() -> Self {
        SolutionCountSet::Finite([1].into())
    }

    /// Parses `{1}`, `{0,1}`, `1` or `all-finite`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "all-finite" || t == "all" {
            return Ok(SolutionCountSet::AllOfN);
        }
        let inner = t.trim_start_matches('{').trim_end_matches('}');
        let values = inner
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad count `{p}` in S")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::finite(values)
    }

    pub fn classify(&self, count: CountVerdict, analytic: Option<Cardinality>) -> Firing {
        match (self, count) {
            (SolutionCountSet::AllOfN, CountVerdict::Exact(_)) => Firing::Fires,
            (SolutionCountSet::Finite(set), CountVerdict::Exact(k)) => {
                if set.contains(&k) {
                    Firing::Fires
                } else {
                    Firing::Blocked
                }
            }
            (SolutionCountSet::Finite(set), CountVerdict::AtLeast(k))
                if set.iter().next_back().is_some_and(|m| k > *m) =>
            {
                Firing::Blocked
            }
            _ => match analytic {
                Some(Cardinality::Infinite) => Firing::Blocked,
                Some(Cardinality::Finite(k)) => match self {
                    SolutionCountSet::Finite(set) if !set.contains(&k) => Firing::Blocked,
                    _ => Firing::Uncertain,
                },
                None => Firing::Uncertain,
            },
        }
    }
}

impl fmt::Display for SolutionCountSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionCountSet::AllOfN => f.write_str("all-finite"),
            SolutionCountSet::Finite(set) => {
                let parts: Vec<String> = set.iter().map(u64::to_string).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

/// One justification: `element` was added at `iteration` because formula
/// number `formula` at `tuple` had an admissible solution count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub element: Element,
    pub formula: usize,
    pub tuple: Vec<Element>,
}

/// A firing that could not be certified within budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suppressed {
    pub iteration: usize,
    pub formula: usize,
    pub tuple: Vec<Element>,
    pub count: CountVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    pub elements: BTreeSet<Element>,
    pub iterations_used: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
    pub suppressed: Vec<Suppressed>,
}

impl ClosureResult {
    /// Trace entries needed to justify `target`, in the order they fired.
    pub fn witness(&self, target: Element) -> Vec<&TraceEntry> {
        let by_element: BTreeMap<Element, &TraceEntry> =
            self.trace.iter().map(|t| (t.element, t)).collect();
        let mut needed = BTreeSet::new();
        let mut stack = vec![target];
        while let Some(e) = stack.pop() {
            if let Some(t) = by_element.get(&e) {
                if needed.insert((t.iteration, t.element)) {
                    stack.extend(t.tuple.iter().copied());
                }
            }
        }
        let mut out: Vec<&TraceEntry> = needed.iter().map(|(_, e)| by_element[e]).collect();
        out.sort_by_key(|t| (t.iteration, t.element));
        out
    }

    pub fn trace_lines(&self, sig: &Signature) -> Vec<String> {
        self.trace.iter().map(|t| trace_line(sig, t)).collect()
    }

    pub fn suppressed_lines(&self, sig: &Signature) -> Vec<String> {
        self.suppressed
            .iter()
            .map(|t| {
                format!(
                    "iter={} suppressed via=phi{} a={} count={}",
                    t.iteration,
                    t.formula,
                    tuple_string(sig, &t.tuple),
                    match t.count {
                        CountVerdict::Exact(k) => format!("Exact({k})"),
                        CountVerdict::AtLeast(k) => format!("AtLeast({k})"),
                        CountVerdict::Unknown => "Unknown".into(),
                    }
                )
            })
            .collect()
    }
}

/// `iter=2 add=X#5 via=phi3 a=(X#1,X#2)`.
pub fn trace_line(sig: &Signature, t: &TraceEntry) -> String {
    format!(
        "iter={} add={} via=phi{} a={}",
        t.iteration,
        t.element.display(sig),
        t.formula,
        tuple_string(sig, &t.tuple)
    )
}

fn check_base(s: &StructureSpec, base: &BTreeSet<Element>) -> Result<()> {
    for e in base {
        if !s.contains(*e) {
            return Err(Error::NotInStructure(e.display(&s.sig).to_string()));
        }
    }
    Ok(())
}

fn by_sort(set: &BTreeSet<Element>) -> BTreeMap<SortId, Vec<Element>> {
    let mut out: BTreeMap<SortId, Vec<Element>> = BTreeMap::new();
    for e in set {
        out.entry(e.sort).or_default().push(*e);
    }
    out
}

/// Left tuples over `current` that use at least one element of `delta`;
/// positions before the first delta position come from `old`.
fn semi_naive_tuples(
    sorts: &[SortId],
    old: &BTreeSet<Element>,
    delta: &BTreeSet<Element>,
    current: &BTreeSet<Element>,
) -> Vec<Vec<Element>> {
    let (old, delta, current) = (by_sort(old), by_sort(delta), by_sort(current));
    let pick = |m: &BTreeMap<SortId, Vec<Element>>, s: SortId| m.get(&s).cloned().unwrap_or_default();
    let mut out = Vec::new();
    for p in 0..sorts.len() {
        let pools: Vec<Vec<Element>> = sorts
            .iter()
            .enumerate()
            .map(|(i, s)| match i.cmp(&p) {
                std::cmp::Ordering::Less => pick(&old, *s),
                std::cmp::Ordering::Equal => pick(&delta, *s),
                std::cmp::Ordering::Greater => pick(&current, *s),
            })
            .collect();
        let index_pools: Vec<Vec<u64>> = pools.iter().map(|p| (0..p.len() as u64).collect()).collect();
        for_each_tuple(&index_pools, &mut |idx| {
            out.push(
                idx.iter()
                    .zip(&pools)
                    .map(|(i, pool)| pool[*i as usize])
                    .collect(),
            );
            true
        });
    }
    out.sort();
    out
}

/// Iterates `cl^1` up to `closure_iterations` times, semi-naively.
pub fn cl_fixpoint(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    counts: &SolutionCountSet,
    b: &StageBudget,
) -> Result<ClosureResult> {
    b.validate()?;
    check_base(s, base)?;
    for pf in phis {
        pf.formula.check(&s.sig)?;
    }
    let mut current = base.clone();
    let mut old: BTreeSet<Element> = BTreeSet::new();
    let mut delta = base.clone();
    let mut trace = Vec::new();
    let mut suppressed = Vec::new();
    let mut converged = false;
    let mut iterations_used = 0;
    for iteration in 1..=b.closure_iterations {
        iterations_used = iteration;
        let mut added: BTreeMap<Element, TraceEntry> = BTreeMap::new();
        for (fi, pf) in phis.iter().enumerate() {
            let sorts = pf.left_type().0;
            let tuples = if sorts.is_empty() {
                if iteration == 1 {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            } else {
                semi_naive_tuples(&sorts, &old, &delta, &current)
            };
            for a in tuples {
                let sol = solve(s, pf, &a, b)?;
                match counts.classify(sol.verdict, oracle(s, pf, &a)) {
                    Firing::Fires => {
                        for e in sol.found.iter().flatten() {
                            if !current.contains(e) {
                                added.entry(*e).or_insert_with(|| TraceEntry {
                                    iteration,
                                    element: *e,
                                    formula: fi,
                                    tuple: a.clone(),
                                });
                            }
                        }
                    }
                    Firing::Blocked => {}
                    Firing::Uncertain => suppressed.push(Suppressed {
                        iteration,
                        formula: fi,
                        tuple: a.clone(),
                        count: sol.verdict,
                    }),
                }
            }
        }
        if added.is_empty() {
            converged = true;
            break;
        }
        old = current.clone();
        delta = added.keys().copied().collect();
        current.extend(delta.iter().copied());
        trace.extend(added.into_values());
    }
    Ok(ClosureResult {
        elements: current,
        iterations_used,
        converged,
        trace,
        suppressed,
    })
}

/// `cl^1_{Φ,N}(B, S)`.
pub fn cl_step(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    counts: &SolutionCountSet,
    b: &StageBudget,
) -> Result<BTreeSet<Element>> {
    let one = StageBudget {
        closure_iterations: 1,
        ..*b
    };
    Ok(cl_fixpoint(s, phis, base, counts, &one)?.elements)
}

/// Membership of `target` in `cl_{Φ}(A, S)` together with the closure run.
#[derive(Debug, Clone)]
pub struct SetMembership {
    pub verdict: MembershipVerdict,
    pub closure: ClosureResult,
}

pub fn set_membership(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    counts: &SolutionCountSet,
    target: Element,
    b: &StageBudget,
) -> Result<SetMembership> {
    if !s.contains(target) {
        return Err(Error::NotInStructure(target.display(&s.sig).to_string()));
    }
    let closure = cl_fixpoint(s, phis, base, counts, b)?;
    let verdict = if closure.elements.contains(&target) {
        MembershipVerdict::Member
    } else if closure.converged && closure.suppressed.is_empty() {
        MembershipVerdict::NonMember
    } else {
        MembershipVerdict::Unknown
    };
    Ok(SetMembership { verdict, closure })
}

/// Is `target ∈ acl_Φ(A)`?
pub fn acl_set_member(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    target: Element,
    b: &StageBudget,
) -> Result<MembershipVerdict> {
    Ok(set_membership(s, phis, base, &SolutionCountSet::AllOfN, target, b)?.verdict)
}

/// Is `target ∈ dcl_Φ(A)`?
pub fn dcl_set_member(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    target: Element,
    b: &StageBudget,
) -> Result<MembershipVerdict> {
    Ok(set_membership(s, phis, base, &SolutionCountSet::singleton(), target, b)?.verdict)
}

/// Closure for formula sets with one left and one right variable each:
/// forward reachability from `base` along the edges `a → b` for which
/// `φ(a; ·)` has an admissible, certified solution set containing `b`.
/// Searches to depth `closure_iterations`.
pub fn closure_via_reachability(
    s: &StructureSpec,
    phis: &[PartitionedFormula],
    base: &BTreeSet<Element>,
    counts: &SolutionCountSet,
    b: &StageBudget,
) -> Result<BTreeSet<Element>> {
    b.validate()?;
    check_base(s, base)?;
    for (i, pf) in phis.iter().enumerate() {
        if pf.left.len() != 1 || pf.right.len() != 1 {
            return Err(Error::NonBinaryFormula(i));
        }
    }
    let mut seen = base.clone();
    let mut queue: VecDeque<(Element, usize)> = base.iter().map(|e| (*e, 0)).collect();
    while let Some((v, depth)) = queue.pop_front() {
        if depth >= b.closure_iterations {
            continue;
        }
        for pf in phis {
            if pf.left[0].sort != v.sort {
                continue;
            }
            let sol = solve(s, pf, &[v], b)?;
            let analytic = s.oracle.as_ref().and_then(|o| o.cardinality(pf, &[v]));
            if counts.classify(sol.verdict, analytic) == Firing::Fires {
                for t in sol.found {
                    if seen.insert(t[0]) {
                        queue.push_back((t[0], depth + 1));
                    }
                }
            }
        }
    }
    Ok(seen)
}
