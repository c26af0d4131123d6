use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formula::{fresh_name, Formula, PartitionedFormula, Var};
use crate::signature::{RelId, Signature};
use crate::structure::{for_each_tuple, Element, Evaluator, StructureSpec, TruthVerdict};

pub struct MorleyizationResult {
    /// K_n: the input language plus one relation per input formula.
    pub sig: Signature,
    /// A_n, whose reduct to the input language is the input structure.
    pub structure: StructureSpec,
    /// φ_ψ for each input ψ, in input order: the new atom over ψ's declared
    /// variables, with the same split.
    pub phi_of_psi: Vec<PartitionedFormula>,
    /// ψ for each new relation symbol.
    pub psi_of_phi: BTreeMap<RelId, PartitionedFormula>,
    /// Number of relations of the input language.
    pub base_relations: usize,
}

impl MorleyizationResult {
    /// Replaces every new atom in a K_n-formula by its defining input formula.
    pub fn unfold(&self, f: &Formula) -> Formula {
        f.map_atoms(&mut |rel, args| match self.psi_of_phi.get(&rel) {
            Some(pf) => {
                let map = pf
                    .declared()
                    .zip(args)
                    .map(|(x, v)| (x.name.clone(), v.clone()))
                    .collect();
                pf.formula.rename_free(&map)
            }
            None => Formula::Atom(rel, args.to_vec()),
        })
    }

    /// A_n with the new symbols dropped.
    pub fn reduct(&self) -> StructureSpec {
        self.structure.reduct(self.base_relations)
    }
}

/// Adds a relation `Phi<i>` for the i-th formula, typed by its declared
/// variables (left then right), interpreted as its solution set in `s`.
pub fn morleyize(s: &StructureSpec, formulas: &[PartitionedFormula], n: usize) -> Result<MorleyizationResult> {
    let tables = s.tables().ok_or(Error::WrongStructureKind { expected: "finite" })?;
    for pf in formulas {
        pf.formula.check(&s.sig)?;
        let level = pf.formula.bc_sigma_level();
        if level > n {
            return Err(Error::LevelTooHigh { level, allowed: n });
        }
    }
    let mut sig = s.sig.clone();
    let mut taken: BTreeSet<String> = s
        .sig
        .sort_ids()
        .map(|x| s.sig.sort_name(x).to_string())
        .chain(s.sig.relation_ids().map(|r| s.sig.relation(r).name.clone()))
        .collect();
    let mut new_tables = tables.clone();
    let mut phi_of_psi = Vec::with_capacity(formulas.len());
    let mut psi_of_phi = BTreeMap::new();
    let mut ev = Evaluator::new(s, 1);
    for (i, pf) in formulas.iter().enumerate() {
        let base = format!("Phi{i}");
        let name = if taken.insert(base.clone()) {
            base
        } else {
            fresh_name(&base, &mut taken)
        };
        let vars: Vec<Var> = pf.declared().cloned().collect();
        let rel = sig.add_relation(name, vars.iter().map(|v| v.sort).collect())?;
        let domains: Vec<Vec<u64>> = vars.iter().map(|v| ev.domain(v.sort).0).collect();
        let mut rows = BTreeSet::new();
        for_each_tuple(&domains, &mut |tuple| {
            let mut env: Vec<(String, Element)> = vars
                .iter()
                .zip(tuple)
                .map(|(v, x)| (v.name.clone(), Element::new(v.sort, *x)))
                .collect();
            if ev.eval(&pf.formula, &mut env) == TruthVerdict::True {
                rows.insert(tuple.to_vec());
            }
            true
        });
        new_tables.relations.push(rows);
        psi_of_phi.insert(rel, pf.clone());
        phi_of_psi.push((rel, vars, pf.left.len()));
    }
    let phi_of_psi = phi_of_psi
        .into_iter()
        .map(|(rel, vars, m)| {
            let (left, right) = vars.split_at(m);
            PartitionedFormula::new(&sig, Formula::Atom(rel, vars.clone()), left.to_vec(), right.to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let structure = StructureSpec::finite(sig.clone(), new_tables)?;
    Ok(MorleyizationResult {
        sig,
        structure,
        phi_of_psi,
        psi_of_phi,
        base_relations: s.sig.num_relations(),
    })
}
