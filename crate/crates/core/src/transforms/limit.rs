//! Relations given as iterated limits along a copy of ℕ, and the formulas
//! that define them from their approximations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::nat::{NAT_RELATION, NAT_SORT};
use crate::error::{Error, Result};
use crate::formula::{fresh_name, Formula, PartitionedFormula, Var};
use crate::signature::{RelId, Signature, SortId};
use crate::structure::{
    for_each_tuple, tuple_string, Body, Element, RelationRule, RuleBased, StructureSpec,
};

/// `f(ā, ℓ₀, …, ℓ_{n−1})`, with ā given as ordinals.
pub type LimitFn = Arc<dyn Fn(&[u64], &[u64]) -> bool + Send + Sync>;

/// A structure containing a copy of ℕ (sort `N`, successor `S`, ordinal k
/// standing for k̂) together with depth-n approximations of its other
/// relations. Relations without an entry in `limits` use their base
/// interpretation at every ℓ̄.
#[derive(Clone)]
pub struct LimitPresentation {
    pub base: StructureSpec,
    pub depth: usize,
    pub limits: BTreeMap<RelId, LimitFn>,
    /// Flip uniqueness is checked for ā and ℓ̄ below this ordinal; deeper
    /// limits are approximated at `scan_horizon − 1`.
    pub scan_horizon: u64,
}

pub struct LimitEncoding {
    /// A⁺: every relation R other than `S` replaced, at the same id, by R⁺
    /// of type X × Nⁿ.
    pub structure: StructureSpec,
    /// φ_R(x̄) for every relation other than `S`, keyed by the base id.
    pub phi: BTreeMap<RelId, PartitionedFormula>,
}

fn nat_ids(sig: &Signature) -> Result<(SortId, RelId)> {
    let n = sig
        .sort_id(NAT_SORT)
        .ok_or_else(|| Error::InvalidArgument(format!("signature has no sort {NAT_SORT}")))?;
    let s = sig
        .relation_id(NAT_RELATION)
        .ok_or_else(|| Error::InvalidArgument(format!("signature has no relation {NAT_RELATION}")))?;
    if sig.relation(s).ty.sorts() != [n, n] {
        return Err(Error::TypeMismatch(format!(
            "{NAT_RELATION} must have type {NAT_SORT}*{NAT_SORT}"
        )));
    }
    Ok((n, s))
}

/// γ′(x̄) := [∀y:N γ(x̄,y)] ∨ [∃y,z:N (S(y,z) ∧ ¬γ(x̄,y) ∧ γ(x̄,z))], where
/// y is the last declared variable of γ.
pub fn gamma_prime(sig: &Signature, gamma: &PartitionedFormula) -> Result<Formula> {
    let (n, s) = nat_ids(sig)?;
    let y = gamma
        .right
        .last()
        .or(gamma.left.last())
        .ok_or_else(|| Error::InvalidArgument("γ has no declared variables".into()))?
        .clone();
    if y.sort != n {
        return Err(Error::TypeMismatch(format!(
            "last variable {} of γ is not of sort {NAT_SORT}",
            y.name
        )));
    }
    let mut taken: BTreeSet<String> = gamma.formula.all_names();
    taken.extend(gamma.declared().map(|v| v.name.clone()));
    let base = format!("{}#next", y.name);
    let z_name = if taken.insert(base.clone()) {
        base
    } else {
        fresh_name(&base, &mut taken)
    };
    let z = Var::new(z_name, n);
    let g = gamma.formula.clone();
    let gz = g.rename_free(&[(y.name.clone(), z.clone())].into());
    let step = Formula::and(
        Formula::and(Formula::Atom(s, vec![y.clone(), z.clone()]), Formula::not(g.clone())),
        gz,
    );
    Ok(Formula::or(
        Formula::Forall(vec![y.clone()], Box::new(g)),
        Formula::Exists(vec![y, z], Box::new(step)),
    ))
}

fn prefix_string(prefix: &[u64]) -> String {
    format!(
        "({})",
        prefix.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    )
}

/// At most one flip in the last coordinate, for every level and prefix
/// below the scan horizon.
fn check_flips(lp: &LimitPresentation, rel: RelId, f: &LimitFn) -> Result<()> {
    let h = lp.scan_horizon;
    let sig = &lp.base.sig;
    let ty = sig.relation(rel).ty.clone();
    let domains: Vec<Vec<u64>> = ty.sorts().iter().map(|s| lp.base.domain(*s, h).0).collect();
    let mut err = None;
    for_each_tuple(&domains, &mut |a| {
        for level in 1..=lp.depth {
            let prefix_domains = vec![(0..h).collect::<Vec<u64>>(); level - 1];
            let tail = vec![h - 1; lp.depth - level];
            for_each_tuple(&prefix_domains, &mut |prefix| {
                let value = |l: u64| {
                    let mut ls = prefix.to_vec();
                    ls.push(l);
                    ls.extend_from_slice(&tail);
                    f(a, &ls)
                };
                let flips = (0..h - 1).filter(|l| value(*l) != value(l + 1)).count();
                if flips > 1 {
                    let elems: Vec<Element> = a
                        .iter()
                        .zip(ty.sorts())
                        .map(|(x, s)| Element::new(*s, *x))
                        .collect();
                    err = Some(Error::FlipViolation {
                        relation: sig.relation(rel).name.clone(),
                        tuple: tuple_string(sig, &elems),
                        prefix: prefix_string(prefix),
                    });
                    return false;
                }
                true
            });
            if err.is_some() {
                return false;
            }
        }
        true
    });
    err.map_or(Ok(()), Err)
}

/// Builds A⁺ and the formulas φ_R with R^A = φ_R^{A⁺}, obtained by applying
/// [`gamma_prime`] once per limit coordinate, last coordinate first.
pub fn limit_encode(lp: &LimitPresentation) -> Result<LimitEncoding> {
    let sig = &lp.base.sig;
    let (n, s) = nat_ids(sig)?;
    if lp.scan_horizon < 2 {
        return Err(Error::InvalidArgument("scan horizon must be at least 2".into()));
    }
    for (rel, f) in &lp.limits {
        if rel.0 >= sig.num_relations() || *rel == s {
            return Err(Error::InvalidArgument(format!(
                "no approximable relation with id {}",
                rel.0
            )));
        }
        check_flips(lp, *rel, f)?;
    }
    let base_rules = match lp.base.to_rule_based().body {
        Body::Rule(r) => r,
        Body::Finite(_) => unreachable!("to_rule_based returns rule-based structures"),
    };
    let mut plus = Signature::new();
    for sort in sig.sort_ids() {
        plus.add_sort(sig.sort_name(sort))?;
    }
    let mut relations = Vec::with_capacity(sig.num_relations());
    for rel in sig.relation_ids() {
        let symbol = sig.relation(rel);
        if rel == s || (lp.depth == 0 && !lp.limits.contains_key(&rel)) {
            plus.add_relation(symbol.name.clone(), symbol.ty.0.clone())?;
            relations.push(base_rules.relations[rel.0].clone());
            continue;
        }
        let name = if lp.depth == 0 {
            symbol.name.clone()
        } else {
            format!("{}_plus", symbol.name)
        };
        let mut ty = symbol.ty.0.clone();
        ty.extend(std::iter::repeat(n).take(lp.depth));
        plus.add_relation(name, ty)?;
        let m = symbol.ty.len();
        let f: LimitFn = match lp.limits.get(&rel) {
            Some(f) => f.clone(),
            None => {
                let decide = base_rules.relations[rel.0].decide.clone();
                Arc::new(move |a, _| decide(a))
            }
        };
        relations.push(RelationRule::unbounded(Arc::new(move |t| f(&t[..m], &t[m..]))));
    }
    let structure = StructureSpec::rule_based(
        plus.clone(),
        RuleBased {
            sorts: base_rules.sorts,
            relations,
        },
    )?;
    let mut phi = BTreeMap::new();
    for rel in sig.relation_ids().filter(|r| *r != s) {
        let ty = sig.relation(rel).ty.clone();
        let xs: Vec<Var> = ty
            .sorts()
            .iter()
            .enumerate()
            .map(|(i, st)| Var::new(format!("x{i}"), *st))
            .collect();
        let ls: Vec<Var> = (0..lp.depth).map(|i| Var::new(format!("l{i}"), n)).collect();
        let mut args = xs.clone();
        args.extend(ls.iter().cloned());
        let mut current = PartitionedFormula::new(&plus, Formula::Atom(rel, args), xs.clone(), ls.clone())?;
        for k in (0..lp.depth).rev() {
            let f = gamma_prime(&plus, &current)?;
            current = PartitionedFormula::new(&plus, f, xs.clone(), ls[..k].to_vec())?;
        }
        phi.insert(rel, current);
    }
    Ok(LimitEncoding { structure, phi })
}

/// φ_η for a quantifier-free η without `S`: each atom R(v̄) becomes φ_R(v̄).
pub fn lift_qf(enc: &LimitEncoding, base: &Signature, eta: &Formula) -> Result<Formula> {
    let (_, s) = nat_ids(base)?;
    if !eta.is_quantifier_free() {
        return Err(Error::InvalidArgument("η must be quantifier-free".into()));
    }
    if eta.relations().contains(&s) {
        return Err(Error::InvalidArgument(format!("η must not mention {NAT_RELATION}")));
    }
    let mut missing = None;
    let out = eta.map_atoms(&mut |rel, args| match enc.phi.get(&rel) {
        Some(pf) => {
            let map = pf
                .left
                .iter()
                .zip(args)
                .map(|(x, v)| (x.name.clone(), v.clone()))
                .collect();
            pf.formula.rename_free(&map)
        }
        None => {
            missing = Some(rel);
            Formula::Const(false)
        }
    });
    match missing {
        Some(rel) => Err(Error::UnknownRelation(base.relation(rel).name.clone())),
        None => Ok(out),
    }
}

/// Reads step tables with lines `R a l value`: from ordinal `l` on (until
/// the next listed `l` for the same tuple) f(ā, l) = value. `a` may be a
/// comma-separated tuple; only the first limit coordinate is consulted.
/// Before the first listed `l`, and for unlisted tuples, the value is false.
pub fn parse_limit_table(text: &str, sig: &Signature) -> Result<BTreeMap<RelId, LimitFn>> {
    type Table = BTreeMap<Vec<u64>, BTreeMap<u64, bool>>;
    let mut tables: BTreeMap<RelId, Table> = BTreeMap::new();
    let mut offset = 0;
    for line in text.lines() {
        let here = offset;
        offset += line.len() + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Syntax {
            offset: here,
            message: m.to_string(),
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad("expected `R a l value`"));
        }
        let rel = sig
            .relation_id(fields[0])
            .ok_or_else(|| Error::UnknownRelation(fields[0].to_string()))?;
        let a = fields[1]
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| bad("bad tuple")))
            .collect::<Result<Vec<_>>>()?;
        if a.len() != sig.relation(rel).ty.len() {
            return Err(bad("tuple length does not match the relation"));
        }
        let l: u64 = fields[2].parse().map_err(|_| bad("bad limit coordinate"))?;
        let v = match fields[3] {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(bad("value must be 0 or 1")),
        };
        tables.entry(rel).or_default().entry(a).or_default().insert(l, v);
    }
    Ok(tables
        .into_iter()
        .map(|(rel, table)| {
            let table = Arc::new(table);
            let f: LimitFn = Arc::new(move |a, ls| {
                let l = ls.first().copied().unwrap_or(u64::MAX);
                table
                    .get(a)
                    .and_then(|steps| steps.range(..=l).next_back().map(|(_, v)| *v))
                    .unwrap_or(false)
            });
            (rel, f)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{eval, truncate, FiniteTables, StageBudget, TruthVerdict};
    use crate::transforms::augment_with_nat;

    fn base() -> StructureSpec {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("R", vec![x]).unwrap();
        let s = StructureSpec::finite(
            sig,
            FiniteTables {
                elements: vec![[0, 1].into()],
                relations: vec![[vec![0]].into()],
            },
        )
        .unwrap();
        augment_with_nat(&s).unwrap()
    }

    fn lp(depth: usize, f: LimitFn) -> LimitPresentation {
        LimitPresentation {
            base: base(),
            depth,
            limits: [(RelId(0), f)].into(),
            scan_horizon: 12,
        }
    }

    fn value_on_truncation(enc: &LimitEncoding, a: u64, h: u64) -> TruthVerdict {
        let t = truncate(&enc.structure, h).unwrap();
        let pf = &enc.phi[&RelId(0)];
        let asg = [("x0".to_string(), Element::new(SortId(0), a))].into();
        eval(&t, &pf.formula, &asg, &StageBudget::uniform(h).unwrap()).unwrap()
    }

    #[test]
    fn depth_zero_is_identity() {
        let l = LimitPresentation {
            base: base(),
            depth: 0,
            limits: BTreeMap::new(),
            scan_horizon: 4,
        };
        let enc = limit_encode(&l).unwrap();
        assert_eq!(enc.structure.sig, l.base.sig);
        let sig = &enc.structure.sig;
        assert_eq!(enc.phi[&RelId(0)].formula.display(sig).to_string(), "R(x0)");
    }

    #[test]
    fn gamma_prime_adds_one_level() {
        let enc = limit_encode(&lp(1, Arc::new(|_, l| l[0] >= 3))).unwrap();
        let pf = &enc.phi[&RelId(0)];
        assert_eq!(pf.formula.bc_sigma_level(), 1);
        assert_eq!(
            pf.formula.display(&enc.structure.sig).to_string(),
            "(A l0 : N . R_plus(x0,l0)) | (E l0,l0#next : N,N . S(l0,l0#next) & !R_plus(x0,l0) & R_plus(x0,l0#next))"
        );
    }

    #[test]
    fn depth_one_limits_on_truncations() {
        let enc = limit_encode(&lp(1, Arc::new(|_, l| l[0] >= 3))).unwrap();
        for h in 5..12 {
            assert_eq!(value_on_truncation(&enc, 0, h), TruthVerdict::True);
        }
        let enc = limit_encode(&lp(1, Arc::new(|_, l| l[0] < 5))).unwrap();
        for h in 7..12 {
            assert_eq!(value_on_truncation(&enc, 1, h), TruthVerdict::False);
        }
    }

    #[test]
    fn double_flip_is_reported() {
        let err = limit_encode(&lp(1, Arc::new(|a, l| a[0] == 1 && (2..4).contains(&l[0])))).err();
        match err {
            Some(Error::FlipViolation { relation, tuple, prefix }) => {
                assert_eq!(relation, "R");
                assert_eq!(tuple, "(X#1)");
                assert_eq!(prefix, "()");
            }
            _ => panic!("expected a flip violation"),
        }
    }

    #[test]
    fn step_table_parsing() {
        let sig = base().sig;
        let t = parse_limit_table("R 0 0 1\nR 0 4 0\n# comment\nR 1 2 1\n", &sig).unwrap();
        let f = &t[&RelId(0)];
        assert!(f(&[0], &[3]));
        assert!(!f(&[0], &[4]));
        assert!(!f(&[1], &[1]));
        assert!(f(&[1], &[9]));
        assert!(parse_limit_table("R 0 0 2", &sig).is_err());
    }

    #[test]
    fn lift_rejects_successor() {
        let enc = limit_encode(&lp(1, Arc::new(|_, l| l[0] >= 3))).unwrap();
        let sig = base().sig;
        let s = sig.relation_id("S").unwrap();
        let n = sig.sort_id("N").unwrap();
        let eta = Formula::Atom(s, vec![Var::new("a", n), Var::new("b", n)]);
        assert!(lift_qf(&enc, &sig, &eta).is_err());
    }
}
