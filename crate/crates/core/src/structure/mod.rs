//! Finite and rule-based structures, budgeted evaluation and the exhaustive
//! counting oracle.

mod text;

pub use text::{parse_structure, print_structure};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{Formula, PartitionedFormula, Var};
use crate::signature::{RelId, Signature, SortId, TupleType};

/// An element: a sort plus an ordinal inside that sort, printed `Sort#k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub sort: SortId,
    pub index: u64,
}

impl Element {
    pub fn new(sort: SortId, index: u64) -> Self {
        Element { sort, index }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        ElementDisplay { e: *self, sig }
    }

    /// Parses `Sort#k`.
    pub fn parse(sig: &Signature, text: &str) -> Result<Element> {
        let (sort, idx) = text
            .trim()
            .rsplit_once('#')
            .ok_or_else(|| Error::InvalidArgument(format!("expected Sort#k, got `{text}`")))?;
        let sort = sig
            .sort_id(sort)
            .ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
        let index = idx
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad element index in `{text}`")))?;
        Ok(Element { sort, index })
    }
}

struct ElementDisplay<'a> {
    e: Element,
    sig: &'a Signature,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.sig.sort_name(self.e.sort), self.e.index)
    }
}

/// `(X#1,X#2)`.
pub fn tuple_string(sig: &Signature, tuple: &[Element]) -> String {
    let parts: Vec<String> = tuple.iter().map(|e| e.display(sig).to_string()).collect();
    format!("({})", parts.join(","))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

/// Analytic knowledge about solution-set sizes that staged search cannot
/// establish on its own.
pub trait CardinalityOracle: Send + Sync {
    fn cardinality(&self, pf: &PartitionedFormula, a: &[Element]) -> Option<Cardinality>;
}

/// Candidate tuples for a partially bound relation query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Support {
    /// Full tuples containing every satisfying tuple that agrees with the
    /// binding (possibly more).
    Finite(Vec<Vec<u64>>),
    Unbounded,
}

pub type MemberFn = Arc<dyn Fn(u64) -> bool + Send + Sync>;
pub type DecideFn = Arc<dyn Fn(&[u64]) -> bool + Send + Sync>;
pub type SupportFn = Arc<dyn Fn(&[Option<u64>]) -> Support + Send + Sync>;

#[derive(Clone)]
pub struct SortRule {
    pub member: MemberFn,
    /// Certified: every member is below this ordinal.
    pub bound: Option<u64>,
}

#[derive(Clone)]
pub struct RelationRule {
    pub decide: DecideFn,
    pub support: SupportFn,
}

impl RelationRule {
    pub fn unbounded(decide: DecideFn) -> Self {
        RelationRule {
            decide,
            support: Arc::new(|_| Support::Unbounded),
        }
    }
}

#[derive(Clone)]
pub struct RuleBased {
    pub sorts: Vec<SortRule>,
    pub relations: Vec<RelationRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteTables {
    pub elements: Vec<BTreeSet<u64>>,
    pub relations: Vec<BTreeSet<Vec<u64>>>,
}

#[derive(Clone)]
pub enum Body {
    Finite(FiniteTables),
    Rule(RuleBased),
}

#[derive(Clone)]
pub struct StructureSpec {
    pub sig: Signature,
    pub body: Body,
    pub oracle: Option<Arc<dyn CardinalityOracle>>,
}

impl fmt::Debug for StructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Finite(t) => f
                .debug_struct("StructureSpec")
                .field("sig", &self.sig)
                .field("tables", t)
                .finish(),
            Body::Rule(_) => f
                .debug_struct("StructureSpec")
                .field("sig", &self.sig)
                .field("body", &"rule-based")
                .finish(),
        }
    }
}

/// Search limits for staged evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageBudget {
    pub domain_horizon: u64,
    pub closure_iterations: usize,
    pub solution_cap: u64,
}

impl StageBudget {
    pub fn new(domain_horizon: u64, closure_iterations: usize, solution_cap: u64) -> Result<Self> {
        let b = StageBudget {
            domain_horizon,
            closure_iterations,
            solution_cap,
        };
        b.validate()?;
        Ok(b)
    }

    /// Same value for every field.
    pub fn uniform(n: u64) -> Result<Self> {
        Self::new(n, n as usize, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain_horizon == 0 {
            return Err(Error::ZeroBudget("domain_horizon"));
        }
        if self.closure_iterations == 0 {
            return Err(Error::ZeroBudget("closure_iterations"));
        }
        if self.solution_cap == 0 {
            return Err(Error::ZeroBudget("solution_cap"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthVerdict {
    True,
    False,
    Unknown,
}

impl TruthVerdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TruthVerdict::True
        } else {
            TruthVerdict::False
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            TruthVerdict::True => TruthVerdict::False,
            TruthVerdict::False => TruthVerdict::True,
            TruthVerdict::Unknown => TruthVerdict::Unknown,
        }
    }

    pub fn and(self, other: Self) -> Self {
        use TruthVerdict::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unknown,
        }
    }

    pub fn or(self, other: Self) -> Self {
        self.not().and(other.not()).not()
    }
}

pub type Assignment = BTreeMap<String, Element>;

impl StructureSpec {
    pub fn finite(sig: Signature, tables: FiniteTables) -> Result<Self> {
        if tables.elements.len() != sig.num_sorts() || tables.relations.len() != sig.num_relations()
        {
            return Err(Error::TypeMismatch(
                "table counts do not match the signature".into(),
            ));
        }
        for r in sig.relation_ids() {
            let ty = &sig.relation(r).ty;
            for t in &tables.relations[r.0] {
                if t.len() != ty.len() {
                    return Err(Error::TypeMismatch(format!(
                        "tuple of length {} in {}",
                        t.len(),
                        sig.relation(r).name
                    )));
                }
                for (v, s) in t.iter().zip(ty.sorts()) {
                    if !tables.elements[s.0].contains(v) {
                        return Err(Error::NotInStructure(format!("{}#{}", sig.sort_name(*s), v)));
                    }
                }
            }
        }
        Ok(StructureSpec {
            sig,
            body: Body::Finite(tables),
            oracle: None,
        })
    }

    pub fn rule_based(sig: Signature, rules: RuleBased) -> Result<Self> {
        if rules.sorts.len() != sig.num_sorts() || rules.relations.len() != sig.num_relations() {
            return Err(Error::TypeMismatch(
                "rule counts do not match the signature".into(),
            ));
        }
        Ok(StructureSpec {
            sig,
            body: Body::Rule(rules),
            oracle: None,
        })
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn CardinalityOracle>) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.body, Body::Finite(_))
    }

    pub fn tables(&self) -> Option<&FiniteTables> {
        match &self.body {
            Body::Finite(t) => Some(t),
            Body::Rule(_) => None,
        }
    }

    pub fn contains(&self, e: Element) -> bool {
        if e.sort.0 >= self.sig.num_sorts() {
            return false;
        }
        match &self.body {
            Body::Finite(t) => t.elements[e.sort.0].contains(&e.index),
            Body::Rule(r) => {
                let rule = &r.sorts[e.sort.0];
                rule.bound.map_or(true, |b| e.index < b) && (rule.member)(e.index)
            }
        }
    }

    /// Relation lookup; arguments are assumed to be members of their sorts.
    pub fn holds(&self, rel: RelId, args: &[u64]) -> bool {
        match &self.body {
            Body::Finite(t) => t.relations[rel.0].contains(args),
            Body::Rule(r) => (r.relations[rel.0].decide)(args),
        }
    }

    pub fn support(&self, rel: RelId, binding: &[Option<u64>]) -> Support {
        match &self.body {
            Body::Finite(t) => Support::Finite(
                t.relations[rel.0]
                    .iter()
                    .filter(|tuple| {
                        tuple
                            .iter()
                            .zip(binding)
                            .all(|(v, b)| b.map_or(true, |b| b == *v))
                    })
                    .cloned()
                    .collect(),
            ),
            Body::Rule(r) => (r.relations[rel.0].support)(binding),
        }
    }

    /// Ordinals of `sort` searched under `horizon`, and whether that list is
    /// the whole sort.
    pub fn domain(&self, sort: SortId, horizon: u64) -> (Vec<u64>, bool) {
        match &self.body {
            Body::Finite(t) => (t.elements[sort.0].iter().copied().collect(), true),
            Body::Rule(r) => {
                let rule = &r.sorts[sort.0];
                let limit = rule.bound.map_or(horizon, |b| b.min(horizon));
                let members = (0..limit).filter(|i| (rule.member)(*i)).collect();
                (members, rule.bound.is_some_and(|b| b <= horizon))
            }
        }
    }

    /// Size of a sort when it is certified finite and fits under `horizon`.
    pub fn certified_sort_size(&self, sort: SortId, horizon: u64) -> Option<u64> {
        let (d, exhaustive) = self.domain(sort, horizon);
        exhaustive.then_some(d.len() as u64)
    }

    pub fn check_tuple(&self, ty: &TupleType, tuple: &[Element]) -> Result<()> {
        if ty.len() != tuple.len() {
            return Err(Error::TypeMismatch(format!(
                "expected {} elements, got {}",
                ty.len(),
                tuple.len()
            )));
        }
        for (e, s) in tuple.iter().zip(ty.sorts()) {
            if e.sort != *s {
                return Err(Error::TypeMismatch(format!(
                    "{} is not of sort {}",
                    e.display(&self.sig),
                    self.sig.sort_name(*s)
                )));
            }
            if !self.contains(*e) {
                return Err(Error::NotInStructure(e.display(&self.sig).to_string()));
            }
        }
        Ok(())
    }

    /// Converts finite tables into the equivalent rule-based description,
    /// with every sort certified.
    pub fn to_rule_based(&self) -> StructureSpec {
        let tables = match &self.body {
            Body::Finite(t) => t.clone(),
            Body::Rule(_) => return self.clone(),
        };
        let tables = Arc::new(tables);
        let sorts = (0..self.sig.num_sorts())
            .map(|i| {
                let t = tables.clone();
                SortRule {
                    bound: Some(t.elements[i].iter().next_back().map_or(0, |m| m + 1)),
                    member: Arc::new(move |k| t.elements[i].contains(&k)),
                }
            })
            .collect();
        let relations = (0..self.sig.num_relations())
            .map(|i| {
                let t1 = tables.clone();
                let t2 = tables.clone();
                RelationRule {
                    decide: Arc::new(move |args| t1.relations[i].contains(args)),
                    support: Arc::new(move |binding| {
                        Support::Finite(
                            t2.relations[i]
                                .iter()
                                .filter(|tuple| {
                                    tuple
                                        .iter()
                                        .zip(binding)
                                        .all(|(v, b)| b.map_or(true, |b| b == *v))
                                })
                                .cloned()
                                .collect(),
                        )
                    }),
                }
            })
            .collect();
        StructureSpec {
            sig: self.sig.clone(),
            body: Body::Rule(RuleBased { sorts, relations }),
            oracle: self.oracle.clone(),
        }
    }

    /// The same structure with only the first `relations` relation symbols.
    pub fn reduct(&self, relations: usize) -> StructureSpec {
        let sig = self.sig.truncated(relations);
        let body = match &self.body {
            Body::Finite(t) => Body::Finite(FiniteTables {
                elements: t.elements.clone(),
                relations: t.relations[..relations].to_vec(),
            }),
            Body::Rule(r) => Body::Rule(RuleBased {
                sorts: r.sorts.clone(),
                relations: r.relations[..relations].to_vec(),
            }),
        };
        StructureSpec {
            sig,
            body,
            oracle: None,
        }
    }
}

/// Checks that `assignment` covers exactly the free variables of `f` with
/// elements of the right sorts.
fn check_assignment(s: &StructureSpec, f: &Formula, assignment: &Assignment) -> Result<()> {
    let free = f.free_vars();
    for v in &free {
        let e = assignment
            .get(&v.name)
            .ok_or_else(|| Error::BadAssignment(format!("variable {} is unassigned", v.name)))?;
        if e.sort != v.sort {
            return Err(Error::BadAssignment(format!(
                "{} is assigned {} but has sort {}",
                v.name,
                e.display(&s.sig),
                s.sig.sort_name(v.sort)
            )));
        }
        if !s.contains(*e) {
            return Err(Error::NotInStructure(e.display(&s.sig).to_string()));
        }
    }
    if let Some(extra) = assignment.keys().find(|k| !free.iter().any(|v| &v.name == *k)) {
        return Err(Error::BadAssignment(format!(
            "variable {extra} is not free in the formula"
        )));
    }
    Ok(())
}

/// Three-valued satisfaction. Finite structures are decided exactly; on
/// rule-based structures quantifiers only range below the horizon.
pub fn eval(
    s: &StructureSpec,
    f: &Formula,
    assignment: &Assignment,
    b: &StageBudget,
) -> Result<TruthVerdict> {
    b.validate()?;
    f.check(&s.sig)?;
    check_assignment(s, f, assignment)?;
    let mut env: Vec<(String, Element)> = assignment
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    Ok(Evaluator {
        s,
        horizon: b.domain_horizon,
        domains: BTreeMap::new(),
    }
    .eval(f, &mut env))
}

pub(crate) struct Evaluator<'a> {
    pub s: &'a StructureSpec,
    pub horizon: u64,
    pub domains: BTreeMap<SortId, (Vec<u64>, bool)>,
}

impl Evaluator<'_> {
    pub fn new(s: &StructureSpec, horizon: u64) -> Evaluator<'_> {
        Evaluator {
            s,
            horizon,
            domains: BTreeMap::new(),
        }
    }

    pub fn domain(&mut self, sort: SortId) -> (Vec<u64>, bool) {
        let (s, h) = (self.s, self.horizon);
        self.domains
            .entry(sort)
            .or_insert_with(|| s.domain(sort, h))
            .clone()
    }

    fn lookup(env: &[(String, Element)], v: &Var) -> u64 {
        env.iter()
            .rev()
            .find(|(n, _)| *n == v.name)
            .map(|(_, e)| e.index)
            .expect("assignment checked before evaluation")
    }

    pub fn eval(&mut self, f: &Formula, env: &mut Vec<(String, Element)>) -> TruthVerdict {
        match f {
            Formula::Const(b) => TruthVerdict::from_bool(*b),
            Formula::Atom(r, args) => {
                let vals: Vec<u64> = args.iter().map(|v| Self::lookup(env, v)).collect();
                TruthVerdict::from_bool(self.s.holds(*r, &vals))
            }
            Formula::Eq(a, b) => TruthVerdict::from_bool(Self::lookup(env, a) == Self::lookup(env, b)),
            Formula::Not(x) => self.eval(x, env).not(),
            Formula::And(a, b) => {
                let l = self.eval(a, env);
                if l == TruthVerdict::False {
                    return l;
                }
                l.and(self.eval(b, env))
            }
            Formula::Or(a, b) => {
                let l = self.eval(a, env);
                if l == TruthVerdict::True {
                    return l;
                }
                l.or(self.eval(b, env))
            }
            Formula::Exists(vs, body) => self.quantify(vs, body, env, true),
            Formula::Forall(vs, body) => self.quantify(vs, body, env, false),
        }
    }

    fn quantify(
        &mut self,
        vs: &[Var],
        body: &Formula,
        env: &mut Vec<(String, Element)>,
        exists: bool,
    ) -> TruthVerdict {
        let decisive = TruthVerdict::from_bool(exists);
        let mut exhaustive = true;
        let mut domains = Vec::with_capacity(vs.len());
        for v in vs {
            let (d, ex) = self.domain(v.sort);
            exhaustive &= ex;
            domains.push(d);
        }
        let mut unknown = false;
        let mut found = false;
        for_each_tuple(&domains, &mut |tuple| {
            let mark = env.len();
            for (v, x) in vs.iter().zip(tuple) {
                env.push((v.name.clone(), Element::new(v.sort, *x)));
            }
            let r = self.eval(body, env);
            env.truncate(mark);
            if r == decisive {
                found = true;
                return false;
            }
            if r == TruthVerdict::Unknown {
                unknown = true;
            }
            true
        });
        if found {
            decisive
        } else if unknown || !exhaustive {
            TruthVerdict::Unknown
        } else {
            decisive.not()
        }
    }
}

/// Calls `visit` on every tuple of the product, in lexicographic order,
/// until it returns false.
pub(crate) fn for_each_tuple(domains: &[Vec<u64>], visit: &mut dyn FnMut(&[u64]) -> bool) {
    if domains.iter().any(|d| d.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut cur: Vec<u64> = domains.iter().map(|d| d[0]).collect();
    loop {
        if !visit(&cur) {
            return;
        }
        let mut k = domains.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                cur[k] = domains[k][idx[k]];
                break;
            }
            idx[k] = 0;
            cur[k] = domains[k][0];
        }
    }
}

/// Induced finite substructure on the ordinals below `horizon`.
pub fn truncate(s: &StructureSpec, horizon: u64) -> Result<StructureSpec> {
    let rules = match &s.body {
        Body::Rule(r) => r,
        Body::Finite(_) => {
            return Err(Error::WrongStructureKind {
                expected: "rule-based",
            })
        }
    };
    if horizon == 0 {
        return Err(Error::InvalidArgument("truncation horizon must be positive".into()));
    }
    let elements: Vec<BTreeSet<u64>> = s
        .sig
        .sort_ids()
        .map(|sort| s.domain(sort, horizon).0.into_iter().collect())
        .collect();
    let mut relations = Vec::with_capacity(s.sig.num_relations());
    for r in s.sig.relation_ids() {
        let ty = s.sig.relation(r).ty.clone();
        let rule = &rules.relations[r.0];
        let inside = |t: &[u64]| {
            t.iter()
                .zip(ty.sorts())
                .all(|(v, sort)| elements[sort.0].contains(v))
        };
        let mut table = BTreeSet::new();
        if ty.is_empty() {
            if (rule.decide)(&[]) {
                table.insert(Vec::new());
            }
            relations.push(table);
            continue;
        }
        for first in &elements[ty.sorts()[0].0] {
            let mut binding = vec![None; ty.len()];
            binding[0] = Some(*first);
            match (rule.support)(&binding) {
                Support::Finite(cands) => {
                    for t in cands {
                        if t.len() == ty.len() && t[0] == *first && inside(&t) && (rule.decide)(&t) {
                            table.insert(t);
                        }
                    }
                }
                Support::Unbounded => {
                    let rest: Vec<Vec<u64>> = ty.sorts()[1..]
                        .iter()
                        .map(|sort| elements[sort.0].iter().copied().collect())
                        .collect();
                    let mut t = vec![*first];
                    for_each_tuple(&rest, &mut |tail| {
                        t.truncate(1);
                        t.extend_from_slice(tail);
                        if (rule.decide)(&t) {
                            table.insert(t.clone());
                        }
                        true
                    });
                }
            }
        }
        relations.push(table);
    }
    StructureSpec::finite(s.sig.clone(), FiniteTables { elements, relations })
}

/// Exact solution count on a finite structure by enumerating every tuple of
/// the right type.
pub fn brute_force_count(s: &StructureSpec, pf: &PartitionedFormula, a: &[Element]) -> Result<u64> {
    if !s.is_finite() {
        return Err(Error::WrongStructureKind { expected: "finite" });
    }
    s.check_tuple(&pf.left_type(), a)?;
    let mut ev = Evaluator::new(s, 1);
    let mut env: Vec<(String, Element)> = pf
        .left
        .iter()
        .zip(a)
        .map(|(v, e)| (v.name.clone(), *e))
        .collect();
    let domains: Vec<Vec<u64>> = pf.right.iter().map(|v| ev.domain(v.sort).0).collect();
    let mut count = 0u64;
    for_each_tuple(&domains, &mut |tuple| {
        let mark = env.len();
        for (v, x) in pf.right.iter().zip(tuple) {
            env.push((v.name.clone(), Element::new(v.sort, *x)));
        }
        if ev.eval(&pf.formula, &mut env) == TruthVerdict::True {
            count += 1;
        }
        env.truncate(mark);
        true
    });
    Ok(count)
}

/// Structures indexed by code.
#[derive(Default, Clone)]
pub struct StructureRegistry {
    entries: BTreeMap<u64, StructureSpec>,
}

impl StructureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, code: u64, s: StructureSpec) -> Result<()> {
        if self.entries.contains_key(&code) {
            return Err(Error::DuplicateCode(code));
        }
        self.entries.insert(code, s);
        Ok(())
    }

    pub fn get(&self, code: u64) -> Option<&StructureSpec> {
        self.entries.get(&code)
    }

    pub fn codes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn digraph(n: u64, edges: &[(u64, u64)]) -> StructureSpec {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("E", vec![x, x]).unwrap();
        StructureSpec::finite(
            sig,
            FiniteTables {
                elements: vec![(0..n).collect()],
                relations: vec![edges.iter().map(|(a, b)| vec![*a, *b]).collect()],
            },
        )
        .unwrap()
    }

    fn nat() -> StructureSpec {
        let mut sig = Signature::new();
        let n = sig.add_sort("N").unwrap();
        sig.add_relation("S", vec![n, n]).unwrap();
        StructureSpec::rule_based(
            sig,
            RuleBased {
                sorts: vec![SortRule {
                    member: Arc::new(|_| true),
                    bound: None,
                }],
                relations: vec![RelationRule {
                    decide: Arc::new(|t| t[1] == t[0] + 1),
                    support: Arc::new(|b| match (b[0], b[1]) {
                        (Some(y), _) => Support::Finite(vec![vec![y, y + 1]]),
                        (None, Some(z)) if z > 0 => Support::Finite(vec![vec![z - 1, z]]),
                        (None, Some(_)) => Support::Finite(vec![]),
                        _ => Support::Unbounded,
                    }),
                }],
            },
        )
        .unwrap()
    }

    fn assign(pairs: &[(&str, Element)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    const B: StageBudget = StageBudget {
        domain_horizon: 10,
        closure_iterations: 4,
        solution_cap: 10,
    };

    #[test]
    fn finite_lookups_and_search() {
        let g = digraph(2, &[(0, 1)]);
        let x = SortId(0);
        let f = parse_formula("E(x;y)", &g.sig).unwrap();
        let a = assign(&[("x", Element::new(x, 0)), ("y", Element::new(x, 1))]);
        assert_eq!(eval(&g, &f.formula, &a, &B).unwrap(), TruthVerdict::True);
        let f = parse_formula("E z : X . E(y,z)", &g.sig).unwrap();
        let a = assign(&[("y", Element::new(x, 1))]);
        assert_eq!(eval(&g, &f.formula, &a, &B).unwrap(), TruthVerdict::False);
    }

    #[test]
    fn universal_over_infinite_sort_is_unknown() {
        let n = nat();
        let f = parse_formula("A y : N . E z : N . S(y,z)", &n.sig).unwrap();
        assert_eq!(
            eval(&n, &f.formula, &Assignment::new(), &B).unwrap(),
            TruthVerdict::Unknown
        );
    }

    #[test]
    fn ill_sorted_assignment_is_rejected() {
        let g = digraph(2, &[(0, 1)]);
        let f = parse_formula("E(x;y)", &g.sig).unwrap();
        let a = assign(&[("x", Element::new(SortId(0), 0))]);
        assert!(matches!(
            eval(&g, &f.formula, &a, &B),
            Err(Error::BadAssignment(_))
        ));
    }

    #[test]
    fn truncating_the_naturals() {
        let t = truncate(&nat(), 4).unwrap();
        let tables = t.tables().unwrap();
        assert_eq!(tables.elements[0], (0..4).collect());
        let expected: BTreeSet<Vec<u64>> = [vec![0, 1], vec![1, 2], vec![2, 3]].into();
        assert_eq!(tables.relations[0], expected);
        assert!(truncate(&t, 4).is_err());
        assert!(truncate(&nat(), 0).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let g = digraph(3, &[(0, 1), (0, 2)]);
        let x = SortId(0);
        let pf = parse_formula("E(x;y)", &g.sig).unwrap();
        assert_eq!(brute_force_count(&g, &pf, &[Element::new(x, 0)]).unwrap(), 2);
        let pf = parse_formula("phi(x ; y) := y = y", &g.sig).unwrap();
        assert_eq!(brute_force_count(&g, &pf, &[Element::new(x, 0)]).unwrap(), 3);
    }

    #[test]
    fn registry_rejects_duplicate_codes() {
        let mut reg = StructureRegistry::new();
        reg.insert(7, digraph(1, &[])).unwrap();
        assert_eq!(reg.insert(7, digraph(1, &[])), Err(Error::DuplicateCode(7)));
    }

    #[test]
    fn zero_budget_rejected() {
        assert_eq!(StageBudget::new(0, 1, 1), Err(Error::ZeroBudget("domain_horizon")));
    }

    #[test]
    fn element_round_trip() {
        let g = digraph(3, &[]);
        let e = Element::parse(&g.sig, "X#2").unwrap();
        assert_eq!(e.display(&g.sig).to_string(), "X#2");
    }
}
