//! Reductions between counting, algebraicity and definability queries:
//! the k-distinct-realizations formula Υ, the disjunction Ψ, and exact
//! counts recovered from ACL and DCL answers.

use std::collections::{BTreeMap, BTreeSet};

use crate::closure::{CountVerdict, MembershipVerdict};
use crate::error::{Error, Result};
use crate::formula::{fresh_name, Formula, PartitionedFormula, Var};
use crate::signature::Signature;
use crate::structure::{for_each_tuple, Element, StageBudget, StructureSpec};

/// Υ_{φ,k} with its k partitions τ_j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpsilonBundle {
    pub k: usize,
    pub formula: Formula,
    /// Fresh right-type variable blocks z̄⁰ … z̄^{k−1}.
    pub blocks: Vec<Vec<Var>>,
    /// τ_j: left part x̄ followed by every block except z̄^j; right part z̄^j.
    pub partitions: Vec<PartitionedFormula>,
}

fn taken_names(pf: &PartitionedFormula) -> BTreeSet<String> {
    let mut names = pf.formula.all_names();
    names.extend(pf.declared().map(|v| v.name.clone()));
    names
}

fn fresh_block(vars: &[Var], suffix: &str, taken: &mut BTreeSet<String>) -> Vec<Var> {
    vars.iter()
        .map(|v| {
            let base = format!("{}#{suffix}", v.name);
            let name = if taken.insert(base.clone()) {
                base
            } else {
                fresh_name(&base, taken)
            };
            Var::new(name, v.sort)
        })
        .collect()
}

fn substitute(pf: &PartitionedFormula, block: &[Var]) -> Formula {
    let map: BTreeMap<String, Var> = pf
        .right
        .iter()
        .zip(block)
        .map(|(y, z)| (y.name.clone(), z.clone()))
        .collect();
    pf.formula.rename_free(&map)
}

/// Υ := ⋀_{i<j<k} ¬(z̄^i = z̄^j) ∧ ⋀_{j<k} φ(x̄, z̄^j).
pub fn build_upsilon(sig: &Signature, pf: &PartitionedFormula, k: usize) -> Result<UpsilonBundle> {
    if k == 0 {
        return Err(Error::InvalidArgument("Υ needs k ≥ 1".into()));
    }
    let mut taken = taken_names(pf);
    let blocks: Vec<Vec<Var>> = (0..k)
        .map(|j| fresh_block(&pf.right, &format!("upsilon_{j}"), &mut taken))
        .collect();
    let mut parts = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            parts.push(Formula::not(Formula::tuple_eq(&blocks[i], &blocks[j])?));
        }
    }
    for block in &blocks {
        parts.push(substitute(pf, block));
    }
    let formula = Formula::and_all(parts);
    let partitions = (0..k)
        .map(|j| {
            let mut left = pf.left.clone();
            for (i, block) in blocks.iter().enumerate() {
                if i != j {
                    left.extend(block.iter().cloned());
                }
            }
            PartitionedFormula::new(sig, formula.clone(), left, blocks[j].clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UpsilonBundle {
        k,
        formula,
        blocks,
        partitions,
    })
}

/// Ψ(x̄ z̄; ȳ) := φ(x̄, ȳ) ∨ (ȳ = z̄).
pub fn build_psi(sig: &Signature, pf: &PartitionedFormula) -> Result<PartitionedFormula> {
    let mut taken = taken_names(pf);
    let z = fresh_block(&pf.right, "psi", &mut taken);
    let formula = Formula::or(pf.formula.clone(), Formula::tuple_eq(&pf.right, &z)?);
    let mut left = pf.left.clone();
    left.extend(z);
    PartitionedFormula::new(sig, formula, left, pf.right.clone())
}

/// A count recovered through the reductions. When the ACL answer says the
/// solution set is infinite, no natural number is reported and the flag
/// is set instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCount {
    pub verdict: CountVerdict,
    pub infinite_per_oracle: bool,
}

pub type MembershipOracle<'a> =
    &'a dyn Fn(&PartitionedFormula, &[Element]) -> Result<MembershipVerdict>;

fn right_tuples(s: &StructureSpec, pf: &PartitionedFormula, b: &StageBudget) -> (Vec<Vec<Element>>, bool) {
    let mut exhaustive = true;
    let domains: Vec<Vec<u64>> = pf
        .right
        .iter()
        .map(|v| {
            let (d, ex) = s.domain(v.sort, b.domain_horizon);
            exhaustive &= ex;
            d
        })
        .collect();
    let mut out = Vec::new();
    for_each_tuple(&domains, &mut |t| {
        out.push(
            pf.right
                .iter()
                .zip(t)
                .map(|(v, x)| Element::new(v.sort, *x))
                .collect(),
        );
        true
    });
    (out, exhaustive)
}

/// Strictly increasing index combinations of size `r` from `0..n`.
fn combinations(n: usize, r: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Computes |{b̄ : φ(ā; b̄)}| using only ACL and DCL answers: the k = 0
/// case through Ψ, each k ≥ 1 through the partitions of Υ_{φ,k}, trying
/// k = 0, 1, … up to the solution cap.
pub fn cl_from_acl_dcl(
    s: &StructureSpec,
    pf: &PartitionedFormula,
    a: &[Element],
    acl: MembershipOracle<'_>,
    dcl: MembershipOracle<'_>,
    b: &StageBudget,
) -> Result<ReducedCount> {
    b.validate()?;
    s.check_tuple(&pf.left_type(), a)?;
    let unknown = ReducedCount {
        verdict: CountVerdict::Unknown,
        infinite_per_oracle: false,
    };
    let exact = |k: u64| {
        Ok(ReducedCount {
            verdict: CountVerdict::Exact(k),
            infinite_per_oracle: false,
        })
    };
    match acl(pf, a)? {
        MembershipVerdict::NonMember => {
            return Ok(ReducedCount {
                verdict: CountVerdict::Unknown,
                infinite_per_oracle: true,
            })
        }
        MembershipVerdict::Unknown => return Ok(unknown),
        MembershipVerdict::Member => {}
    }
    let (tuples, exhaustive) = right_tuples(s, pf, b);
    let mut saw_unknown = false;

    // k = 0
    if tuples.len() >= 2 {
        let psi = build_psi(&s.sig, pf)?;
        let mut all = true;
        for t in &tuples[..2] {
            let params: Vec<Element> = a.iter().chain(t).copied().collect();
            match dcl(&psi, &params)? {
                MembershipVerdict::Member => {}
                MembershipVerdict::NonMember => all = false,
                MembershipVerdict::Unknown => return Ok(unknown),
            }
        }
        if all {
            return exact(0);
        }
    } else if exhaustive {
        if tuples.is_empty() {
            return exact(0);
        }
        return match dcl(pf, a)? {
            MembershipVerdict::Member => exact(1),
            MembershipVerdict::NonMember => exact(0),
            MembershipVerdict::Unknown => Ok(unknown),
        };
    } else {
        return Ok(unknown);
    }

    for k in 1..=b.solution_cap as usize {
        if k > tuples.len() && exhaustive {
            break;
        }
        let ups = build_upsilon(&s.sig, pf, k)?;
        for tau in &ups.partitions {
            let mut hit = false;
            let mut err = None;
            combinations(tuples.len(), k - 1, &mut |idx| {
                let mut params: Vec<Element> = a.to_vec();
                for i in idx {
                    params.extend(tuples[*i].iter().copied());
                }
                match dcl(tau, &params) {
                    Ok(MembershipVerdict::Member) => {
                        hit = true;
                        false
                    }
                    Ok(MembershipVerdict::NonMember) => true,
                    Ok(MembershipVerdict::Unknown) => {
                        saw_unknown = true;
                        true
                    }
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            if hit {
                return exact(k as u64);
            }
        }
    }
    if saw_unknown || !exhaustive {
        return Ok(unknown);
    }
    Ok(ReducedCount {
        verdict: CountVerdict::AtLeast(b.solution_cap + 1),
        infinite_per_oracle: false,
    })
}
