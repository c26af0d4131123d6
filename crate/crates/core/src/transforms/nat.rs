use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::{Body, RelationRule, SortRule, StructureSpec, Support};

pub const NAT_SORT: &str = "N";
pub const NAT_RELATION: &str = "S";

/// Adds a sort `N` whose ordinal `k` plays the role of k̂, and the successor
/// relation `S` on it. The result is rule-based; existing ids are kept.
pub fn augment_with_nat(s: &StructureSpec) -> Result<StructureSpec> {
    for name in [NAT_SORT, NAT_RELATION] {
        if s.sig.has_name(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
    }
    let mut sig = s.sig.clone();
    let n = sig.add_sort(NAT_SORT)?;
    sig.add_relation(NAT_RELATION, vec![n, n])?;
    let mut rules = match s.to_rule_based().body {
        Body::Rule(r) => r,
        Body::Finite(_) => unreachable!("to_rule_based returns rule-based structures"),
    };
    rules.sorts.push(SortRule {
        member: Arc::new(|_| true),
        bound: None,
    });
    rules.relations.push(RelationRule {
        decide: Arc::new(|t| t[0].checked_add(1) == Some(t[1])),
        support: Arc::new(|b| match (b[0], b[1]) {
            (Some(y), _) => Support::Finite(y.checked_add(1).map(|z| vec![y, z]).into_iter().collect()),
            (None, Some(z)) => Support::Finite(z.checked_sub(1).map(|y| vec![y, z]).into_iter().collect()),
            (None, None) => Support::Unbounded,
        }),
    });
    let mut out = StructureSpec::rule_based(sig, rules)?;
    out.oracle = s.oracle.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{count_solutions, CountVerdict};
    use crate::parser::parse_formula;
    use crate::signature::Signature;
    use crate::structure::{eval, truncate, Assignment, Element, FiniteTables, StageBudget, TruthVerdict};

    fn base() -> StructureSpec {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("P", vec![x]).unwrap();
        StructureSpec::finite(
            sig,
            FiniteTables {
                elements: vec![[0, 1].into()],
                relations: vec![[vec![1]].into()],
            },
        )
        .unwrap()
    }

    #[test]
    fn truncation_shows_successor() {
        let a = augment_with_nat(&base()).unwrap();
        let t = truncate(&a, 4).unwrap();
        let n = a.sig.sort_id("N").unwrap();
        let s = a.sig.relation_id("S").unwrap();
        let tables = t.tables().unwrap();
        assert_eq!(tables.elements[n.0].len(), 4);
        assert_eq!(tables.relations[s.0], [vec![0, 1], vec![1, 2], vec![2, 3]].into());
        assert_eq!(tables.relations[0], [vec![1]].into());
    }

    #[test]
    fn successor_is_asymmetric_and_unique() {
        let a = augment_with_nat(&base()).unwrap();
        let n = a.sig.sort_id("N").unwrap();
        let b = StageBudget::uniform(10).unwrap();
        let f = parse_formula("S(y;z)", &a.sig).unwrap();
        let at = |y, z| -> Assignment {
            [("y".to_string(), Element::new(n, y)), ("z".to_string(), Element::new(n, z))].into()
        };
        assert_eq!(eval(&a, &f.formula, &at(2, 3), &b).unwrap(), TruthVerdict::True);
        assert_eq!(eval(&a, &f.formula, &at(3, 2), &b).unwrap(), TruthVerdict::False);
        for k in 0..10 {
            assert_eq!(
                count_solutions(&a, &f, &[Element::new(n, k)], &b).unwrap(),
                CountVerdict::Exact(1)
            );
        }
    }

    #[test]
    fn name_clash_rejected() {
        let a = augment_with_nat(&base()).unwrap();
        assert_eq!(
            augment_with_nat(&a).unwrap_err(),
            Error::DuplicateName("N".into())
        );
    }
}
