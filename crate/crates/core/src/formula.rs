//! First-order formulas over a relational signature, with a designated split
//! of the free variables into a left (parameter) part and a right (solution)
//! part.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::{RelId, Signature, SortId, TupleType};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: SortId,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: SortId) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom(RelId, Vec<Var>),
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    /// Atom with arity and sort checking against `sig`.
    pub fn atom(sig: &Signature, rel: RelId, args: Vec<Var>) -> Result<Formula> {
        let symbol = sig.relation(rel);
        if symbol.ty.len() != args.len() {
            return Err(Error::SortMismatch {
                context: format!("atom {}", symbol.name),
                message: format!("expected {} arguments, got {}", symbol.ty.len(), args.len()),
            });
        }
        for (v, s) in args.iter().zip(symbol.ty.sorts()) {
            if v.sort != *s {
                return Err(Error::SortMismatch {
                    context: format!("atom {}", symbol.name),
                    message: format!(
                        "variable {} has sort {}, expected {}",
                        v.name,
                        sig.sort_name(v.sort),
                        sig.sort_name(*s)
                    ),
                });
            }
        }
        Ok(Formula::Atom(rel, args))
    }

    pub fn equal(a: Var, b: Var) -> Result<Formula> {
        if a.sort != b.sort {
            return Err(Error::SortMismatch {
                context: format!("equality {} = {}", a.name, b.name),
                message: "sides have different sorts".into(),
            });
        }
        Ok(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            return body;
        }
        Formula::Exists(vars, Box::new(body))
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            return body;
        }
        Formula::Forall(vars, Box::new(body))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Const(true))
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Const(false))
    }

    /// Componentwise equality of two equally-typed variable tuples.
    pub fn tuple_eq(a: &[Var], b: &[Var]) -> Result<Formula> {
        if a.len() != b.len() {
            return Err(Error::TypeMismatch("tuple equality of unequal lengths".into()));
        }
        let parts = a
            .iter()
            .zip(b)
            .map(|(x, y)| Formula::equal(x.clone(), y.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Formula::and_all(parts))
    }

    /// Quantifier rank, counting each variable of a quantified tuple.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => vs.len() + f.quantifier_rank(),
        }
    }

    /// Least `n` for which the formula is syntactically certified to be a
    /// Boolean combination of Σn formulas. Each quantifier block over a
    /// level-m body yields level m+1.
    pub fn bc_sigma_level(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.bc_sigma_level(),
            Formula::And(a, b) | Formula::Or(a, b) => a.bc_sigma_level().max(b.bc_sigma_level()),
            Formula::Exists(_, f) | Formula::Forall(_, f) => f.bc_sigma_level() + 1,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<Var>) {
        let push = |v: &Var, bound: &Vec<String>, out: &mut Vec<Var>| {
            if !bound.contains(&v.name) && !out.iter().any(|o| o.name == v.name) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::Const(_) => {}
            Formula::Atom(_, args) => args.iter().for_each(|v| push(v, bound, out)),
            Formula::Eq(a, b) => {
                push(a, bound, out);
                push(b, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mark = bound.len();
                bound.extend(vs.iter().map(|v| v.name.clone()));
                f.collect_free(bound, out);
                bound.truncate(mark);
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_vars(&mut |v| {
            out.insert(v.name.clone());
        });
        out
    }

    fn walk_vars(&self, visit: &mut dyn FnMut(&Var)) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(_, args) => args.iter().for_each(|v| visit(v)),
            Formula::Eq(a, b) => {
                visit(a);
                visit(b);
            }
            Formula::Not(f) => f.walk_vars(visit),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk_vars(visit);
                b.walk_vars(visit);
            }
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                vs.iter().for_each(|v| visit(v));
                f.walk_vars(visit);
            }
        }
    }

    /// Checks that atoms match their relation types, equalities relate
    /// same-sort variables and every name is used at a single sort in scope.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        let mut scope: Vec<Var> = Vec::new();
        let mut free: BTreeMap<String, SortId> = BTreeMap::new();
        self.check_in(sig, &mut scope, &mut free)
    }

    fn check_in(
        &self,
        sig: &Signature,
        scope: &mut Vec<Var>,
        free: &mut BTreeMap<String, SortId>,
    ) -> Result<()> {
        let mut note = |v: &Var, scope: &Vec<Var>, context: &dyn Fn() -> String| -> Result<()> {
            if v.sort.0 >= sig.num_sorts() {
                return Err(Error::SortOutOfRange(v.sort.0));
            }
            let expected = match scope.iter().rev().find(|b| b.name == v.name) {
                Some(b) => b.sort,
                None => *free.entry(v.name.clone()).or_insert(v.sort),
            };
            if expected != v.sort {
                return Err(Error::SortMismatch {
                    context: context(),
                    message: format!("variable {} used at two sorts", v.name),
                });
            }
            Ok(())
        };
        match self {
            Formula::Const(_) => Ok(()),
            Formula::Atom(rel, args) => {
                if rel.0 >= sig.num_relations() {
                    return Err(Error::UnknownRelation(format!("#{}", rel.0)));
                }
                Formula::atom(sig, *rel, args.clone())?;
                let ctx = || format!("atom {}", sig.relation(*rel).name);
                args.iter().try_for_each(|v| note(v, scope, &ctx))
            }
            Formula::Eq(a, b) => {
                Formula::equal(a.clone(), b.clone())?;
                let ctx = || format!("equality {} = {}", a.name, b.name);
                note(a, scope, &ctx)?;
                note(b, scope, &ctx)
            }
            Formula::Not(f) => f.check_in(sig, scope, free),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check_in(sig, scope, free)?;
                b.check_in(sig, scope, free)
            }
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mark = scope.len();
                scope.extend(vs.iter().cloned());
                let r = f.check_in(sig, scope, free);
                scope.truncate(mark);
                r
            }
        }
    }

    /// Capture-avoiding substitution of free variables by variables.
    pub fn rename_free(&self, map: &BTreeMap<String, Var>) -> Formula {
        let mut avoid = self.all_names();
        avoid.extend(map.values().map(|v| v.name.clone()));
        self.rename_in(map, &mut avoid)
    }

    fn rename_in(&self, map: &BTreeMap<String, Var>, avoid: &mut BTreeSet<String>) -> Formula {
        let sub = |v: &Var| map.get(&v.name).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom(r, args) => Formula::Atom(*r, args.iter().map(sub).collect()),
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::Not(f) => Formula::not(f.rename_in(map, avoid)),
            Formula::And(a, b) => Formula::and(a.rename_in(map, avoid), b.rename_in(map, avoid)),
            Formula::Or(a, b) => Formula::or(a.rename_in(map, avoid), b.rename_in(map, avoid)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mut inner = map.clone();
                let targets: BTreeSet<&str> = map.values().map(|v| v.name.as_str()).collect();
                let mut new_vars = Vec::with_capacity(vs.len());
                let mut capture = BTreeMap::new();
                for v in vs {
                    inner.remove(&v.name);
                    if targets.contains(v.name.as_str()) {
                        let fresh = fresh_name(&v.name, avoid);
                        let nv = Var::new(fresh, v.sort);
                        capture.insert(v.name.clone(), nv.clone());
                        new_vars.push(nv);
                    } else {
                        new_vars.push(v.clone());
                    }
                }
                let body = if capture.is_empty() {
                    f.rename_in(&inner, avoid)
                } else {
                    f.rename_in(&capture, avoid).rename_in(&inner, avoid)
                };
                match self {
                    Formula::Exists(..) => Formula::Exists(new_vars, Box::new(body)),
                    _ => Formula::Forall(new_vars, Box::new(body)),
                }
            }
        }
    }

    /// Renames bound variables so that no binder reuses a name already in
    /// scope (the given outer names or an enclosing binder).
    pub fn alpha_normalize(&self, outer: &[String]) -> Formula {
        let mut avoid = self.all_names();
        avoid.extend(outer.iter().cloned());
        let mut scope: Vec<String> = outer.to_vec();
        self.normalize_in(&mut scope, &mut avoid)
    }

    fn normalize_in(&self, scope: &mut Vec<String>, avoid: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::Const(_) | Formula::Atom(..) | Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.normalize_in(scope, avoid)),
            Formula::And(a, b) => {
                Formula::and(a.normalize_in(scope, avoid), b.normalize_in(scope, avoid))
            }
            Formula::Or(a, b) => Formula::or(a.normalize_in(scope, avoid), b.normalize_in(scope, avoid)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mut renames = BTreeMap::new();
                let mut new_vars = Vec::with_capacity(vs.len());
                for v in vs {
                    let clash = scope.contains(&v.name)
                        || new_vars.iter().any(|n: &Var| n.name == v.name);
                    if clash {
                        let nv = Var::new(fresh_name(&v.name, avoid), v.sort);
                        renames.insert(v.name.clone(), nv.clone());
                        new_vars.push(nv);
                    } else {
                        new_vars.push(v.clone());
                    }
                }
                let body = if renames.is_empty() {
                    (**f).clone()
                } else {
                    f.rename_in(&renames, avoid)
                };
                let mark = scope.len();
                scope.extend(new_vars.iter().map(|v| v.name.clone()));
                let body = body.normalize_in(scope, avoid);
                scope.truncate(mark);
                match self {
                    Formula::Exists(..) => Formula::Exists(new_vars, Box::new(body)),
                    _ => Formula::Forall(new_vars, Box::new(body)),
                }
            }
        }
    }

    /// Replaces every atom by the formula returned from `f`.
    pub fn map_atoms(&self, f: &mut dyn FnMut(RelId, &[Var]) -> Formula) -> Formula {
        match self {
            Formula::Atom(r, args) => f(*r, args),
            Formula::Const(_) | Formula::Eq(..) => self.clone(),
            Formula::Not(x) => Formula::not(x.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Exists(vs, x) => Formula::Exists(vs.clone(), Box::new(x.map_atoms(f))),
            Formula::Forall(vs, x) => Formula::Forall(vs.clone(), Box::new(x.map_atoms(f))),
        }
    }

    /// Relations mentioned by the formula.
    pub fn relations(&self) -> BTreeSet<RelId> {
        let mut out = BTreeSet::new();
        self.map_atoms(&mut |r, args| {
            out.insert(r);
            Formula::Atom(r, args.to_vec())
        });
        out
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, sig }
    }
}

/// `base_1`, `base_2`, ... skipping anything in `avoid`; the result is added
/// to `avoid`.
pub fn fresh_name(base: &str, avoid: &mut BTreeSet<String>) -> String {
    let mut i = 1usize;
    loop {
        let candidate = format!("{base}_{i}");
        if !avoid.contains(&candidate) {
            avoid.insert(candidate.clone());
            return candidate;
        }
        i += 1;
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    sig: &'a Signature,
}

impl FormulaDisplay<'_> {
    fn level(f: &Formula) -> u8 {
        match f {
            Formula::Exists(..) | Formula::Forall(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }

    fn write(&self, out: &mut fmt::Formatter<'_>, f: &Formula, ctx: u8) -> fmt::Result {
        let paren = Self::level(f) < ctx;
        if paren {
            out.write_str("(")?;
        }
        match f {
            Formula::Const(true) => out.write_str("true")?,
            Formula::Const(false) => out.write_str("false")?,
            Formula::Atom(r, args) => {
                write!(out, "{}(", self.sig.relation(*r).name)?;
                write_names(out, args)?;
                out.write_str(")")?;
            }
            Formula::Eq(a, b) => write!(out, "{} = {}", a.name, b.name)?,
            Formula::Not(x) => {
                out.write_str("!")?;
                if matches!(**x, Formula::Eq(..)) {
                    write!(out, "(")?;
                    self.write(out, x, 3)?;
                    write!(out, ")")?;
                } else {
                    self.write(out, x, 3)?;
                }
            }
            Formula::And(a, b) => {
                self.write(out, a, 2)?;
                out.write_str(" & ")?;
                self.write(out, b, 3)?;
            }
            Formula::Or(a, b) => {
                self.write(out, a, 1)?;
                out.write_str(" | ")?;
                self.write(out, b, 2)?;
            }
            Formula::Exists(vs, x) | Formula::Forall(vs, x) => {
                let q = if matches!(f, Formula::Exists(..)) { "E" } else { "A" };
                write!(out, "{q} ")?;
                write_names(out, vs)?;
                out.write_str(" : ")?;
                let sorts: Vec<&str> = vs.iter().map(|v| self.sig.sort_name(v.sort)).collect();
                out.write_str(&sorts.join(","))?;
                out.write_str(" . ")?;
                self.write(out, x, 0)?;
            }
        }
        if paren {
            out.write_str(")")?;
        }
        Ok(())
    }
}

fn write_names(out: &mut fmt::Formatter<'_>, vs: &[Var]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.write_str(",")?;
        }
        out.write_str(&v.name)?;
    }
    Ok(())
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(out, self.f, 0)
    }
}

/// A formula φ(x̄; ȳ) with its declared variable split. The declared
/// variables cover every free variable; a declared variable need not occur.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionedFormula {
    pub formula: Formula,
    pub left: Vec<Var>,
    pub right: Vec<Var>,
}

impl PartitionedFormula {
    /// Validates the split and well-sortedness, then α-renames bound
    /// variables away from the declared ones.
    pub fn new(sig: &Signature, formula: Formula, left: Vec<Var>, right: Vec<Var>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in left.iter().chain(&right) {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::DuplicateName(v.name.clone()));
            }
            if v.sort.0 >= sig.num_sorts() {
                return Err(Error::SortOutOfRange(v.sort.0));
            }
        }
        formula.check(sig)?;
        for fv in formula.free_vars() {
            match left.iter().chain(&right).find(|d| d.name == fv.name) {
                None => return Err(Error::UnknownVariable(fv.name)),
                Some(d) if d.sort != fv.sort => {
                    return Err(Error::SortMismatch {
                        context: format!("declaration of {}", fv.name),
                        message: "declared sort differs from use".into(),
                    })
                }
                Some(_) => {}
            }
        }
        let outer: Vec<String> = left.iter().chain(&right).map(|v| v.name.clone()).collect();
        let formula = formula.alpha_normalize(&outer);
        Ok(PartitionedFormula {
            formula,
            left,
            right,
        })
    }

    pub fn left_type(&self) -> TupleType {
        TupleType(self.left.iter().map(|v| v.sort).collect())
    }

    pub fn right_type(&self) -> TupleType {
        TupleType(self.right.iter().map(|v| v.sort).collect())
    }

    /// Declared variables, left part first.
    pub fn declared(&self) -> impl Iterator<Item = &Var> {
        self.left.iter().chain(&self.right)
    }

    /// Same formula with `new_left` as the left part; every other declared
    /// variable moves to the right in its original declared order.
    pub fn repartition(&self, new_left: &[&str]) -> Result<PartitionedFormula> {
        let mut left = Vec::with_capacity(new_left.len());
        for name in new_left {
            let v = self
                .declared()
                .find(|v| v.name == *name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            if left.iter().any(|l: &Var| l.name == v.name) {
                return Err(Error::DuplicateName(v.name.clone()));
            }
            left.push(v.clone());
        }
        let right = self
            .declared()
            .filter(|v| !new_left.contains(&v.name.as_str()))
            .cloned()
            .collect();
        Ok(PartitionedFormula {
            formula: self.formula.clone(),
            left,
            right,
        })
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> PartitionedDisplay<'a> {
        PartitionedDisplay { pf: self, sig }
    }
}

pub struct PartitionedDisplay<'a> {
    pf: &'a PartitionedFormula,
    sig: &'a Signature,
}

impl fmt::Display for PartitionedDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decl = |vs: &[Var]| {
            vs.iter()
                .map(|v| format!("{}:{}", v.name, self.sig.sort_name(v.sort)))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            out,
            "phi({} ; {}) := {}",
            decl(&self.pf.left),
            decl(&self.pf.right),
            self.pf.formula.display(self.sig)
        )
    }
}
