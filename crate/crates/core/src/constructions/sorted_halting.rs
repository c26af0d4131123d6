//! Sorts X_e holding one element per halting input of column e, plus two
//! constants C_e and D_e.
//!
//! Ordinals in X_e: 0 is the C_e element, 1 the D_e element, 2 + j the j-th
//! enumerated input of column e.

use std::sync::Arc;

use super::source::EnumerationSource;
use crate::error::{Error, Result};
use crate::formula::{Formula, PartitionedFormula, Var};
use crate::signature::{Signature, SortId};
use crate::structure::{
    Cardinality, CardinalityOracle, Element, RelationRule, RuleBased, SortRule, StructureSpec, Support,
};

pub struct SortedHalting {
    pub structure: StructureSpec,
    pub source: EnumerationSource,
}

impl SortedHalting {
    /// |X_e| = |W_e| + 2.
    pub fn sort_size(&self, e: u64) -> Cardinality {
        match self.source.column_size(e) {
            Cardinality::Finite(k) => Cardinality::Finite(k + 2),
            Cardinality::Infinite => Cardinality::Infinite,
        }
    }

    pub fn c_element(&self, e: u64) -> Element {
        Element::new(SortId(e as usize), 0)
    }

    pub fn d_element(&self, e: u64) -> Element {
        Element::new(SortId(e as usize), 1)
    }

    /// `c_e` and `d_e`.
    pub fn named(&self, name: &str) -> Option<Element> {
        let (kind, e) = name.split_once('_')?;
        let e: u64 = e.parse().ok()?;
        if e >= self.source.columns() {
            return None;
        }
        match kind {
            "c" => Some(self.c_element(e)),
            "d" => Some(self.d_element(e)),
            _ => None,
        }
    }
}

struct XiOracle {
    sizes: Vec<Cardinality>,
}

/// Recognises ξ_e, namely `x = x & y = y` with x, y of sort X_e.
fn xi_sort(pf: &PartitionedFormula) -> Option<SortId> {
    let (x, y) = match (pf.left.as_slice(), pf.right.as_slice()) {
        ([x], [y]) if x.sort == y.sort => (x, y),
        _ => return None,
    };
    let expected = Formula::and(Formula::Eq(x.clone(), x.clone()), Formula::Eq(y.clone(), y.clone()));
    (pf.formula == expected).then_some(x.sort)
}

impl CardinalityOracle for XiOracle {
    fn cardinality(&self, pf: &PartitionedFormula, _a: &[Element]) -> Option<Cardinality> {
        xi_sort(pf).and_then(|s| self.sizes.get(s.0).copied())
    }
}

/// Sorts `X0 … X{m−1}` for the source's columns, and unary `C<e>`, `D<e>`.
pub fn build_sorted_halting(src: &EnumerationSource) -> Result<SortedHalting> {
    let m = src.columns().max(1);
    let mut sig = Signature::new();
    let mut sorts = Vec::new();
    let mut relations = Vec::new();
    for e in 0..m {
        let x = sig.add_sort(format!("X{e}"))?;
        let bound = match src.column_size(e) {
            Cardinality::Finite(k) => Some(k.checked_add(2).ok_or(Error::Overflow("sort size"))?),
            Cardinality::Infinite => None,
        };
        sorts.push(SortRule {
            member: Arc::new(move |i| bound.is_none_or(|b| i < b)),
            bound,
        });
        for (name, ordinal) in [("C", 0u64), ("D", 1u64)] {
            sig.add_relation(format!("{name}{e}"), vec![x])?;
            relations.push(RelationRule {
                decide: Arc::new(move |t| t[0] == ordinal),
                support: Arc::new(move |b| match b[0] {
                    Some(v) if v != ordinal => Support::Finite(Vec::new()),
                    _ => Support::Finite(vec![vec![ordinal]]),
                }),
            });
        }
    }
    let sizes = (0..m)
        .map(|e| match src.column_size(e) {
            Cardinality::Finite(k) => Cardinality::Finite(k + 2),
            Cardinality::Infinite => Cardinality::Infinite,
        })
        .collect();
    let structure = StructureSpec::rule_based(sig, RuleBased { sorts, relations })?
        .with_oracle(Arc::new(XiOracle { sizes }));
    Ok(SortedHalting {
        structure,
        source: src.clone().with_columns(m),
    })
}

/// ξ_e(x;y) := x = x & y = y over sort X_e, for every sort of `sig`.
pub fn xi_formulas(sig: &Signature) -> Result<Vec<PartitionedFormula>> {
    sig.sort_ids()
        .map(|s| {
            let x = Var::new("x", s);
            let y = Var::new("y", s);
            let f = Formula::and(Formula::equal(x.clone(), x.clone())?, Formula::equal(y.clone(), y.clone())?);
            PartitionedFormula::new(sig, f, vec![x], vec![y])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{acl_set_member, count_solutions, in_acl0, CountVerdict, MembershipVerdict};
    use crate::structure::{eval, StageBudget, TruthVerdict};

    #[test]
    fn empty_source_has_constants_only() {
        let sh = build_sorted_halting(&EnumerationSource::default().with_columns(3)).unwrap();
        let xi = xi_formulas(&sh.structure.sig).unwrap();
        let b = StageBudget::uniform(50).unwrap();
        for e in 0..3 {
            assert_eq!(
                count_solutions(&sh.structure, &xi[e as usize], &[sh.c_element(e)], &b).unwrap(),
                CountVerdict::Exact(2)
            );
        }
    }

    #[test]
    fn column_sizes_plus_two() {
        let src = EnumerationSource::parse("3:0;3:1;5:0", &[]).unwrap();
        let sh = build_sorted_halting(&src).unwrap();
        let xi = xi_formulas(&sh.structure.sig).unwrap();
        let b = StageBudget::uniform(50).unwrap();
        let count = |e: u64| count_solutions(&sh.structure, &xi[e as usize], &[sh.c_element(e)], &b).unwrap();
        assert_eq!(count(3), CountVerdict::Exact(4));
        assert_eq!(count(5), CountVerdict::Exact(3));
        assert_eq!(sh.sort_size(3), Cardinality::Finite(4));
    }

    #[test]
    fn xi_is_a_sort_check() {
        let sh = build_sorted_halting(&EnumerationSource::default().with_columns(2)).unwrap();
        let xi = xi_formulas(&sh.structure.sig).unwrap();
        let b = StageBudget::uniform(10).unwrap();
        let asg = [
            ("x".to_string(), sh.c_element(0)),
            ("y".to_string(), sh.d_element(0)),
        ]
        .into();
        assert_eq!(eval(&sh.structure, &xi[0].formula, &asg, &b).unwrap(), TruthVerdict::True);
        // a cross-sort pair cannot even be assigned to ξ_0
        let cross = [
            ("x".to_string(), sh.c_element(0)),
            ("y".to_string(), sh.d_element(1)),
        ]
        .into();
        assert!(eval(&sh.structure, &xi[0].formula, &cross, &b).is_err());
    }

    #[test]
    fn infinite_column_is_not_algebraic() {
        let src = EnumerationSource::parse("1:4", &[2]).unwrap();
        let sh = build_sorted_halting(&src).unwrap();
        let xi = xi_formulas(&sh.structure.sig).unwrap();
        let b = StageBudget::uniform(20).unwrap();
        assert_eq!(
            in_acl0(&sh.structure, &xi[2], &[sh.c_element(2)], &b).unwrap(),
            MembershipVerdict::NonMember
        );
        assert_eq!(
            in_acl0(&sh.structure, &xi[1], &[sh.c_element(1)], &b).unwrap(),
            MembershipVerdict::Member
        );
        let base = [sh.c_element(2)].into();
        assert_eq!(
            acl_set_member(&sh.structure, &xi, &base, sh.d_element(2), &b).unwrap(),
            MembershipVerdict::NonMember
        );
        let base = [sh.c_element(1)].into();
        assert_eq!(
            acl_set_member(&sh.structure, &xi, &base, sh.d_element(1), &b).unwrap(),
            MembershipVerdict::Member
        );
    }

    #[test]
    fn names_resolve() {
        let sh = build_sorted_halting(&EnumerationSource::default().with_columns(2)).unwrap();
        assert_eq!(sh.named("d_1"), Some(sh.d_element(1)));
        assert_eq!(sh.named("d_2"), None);
    }
}
