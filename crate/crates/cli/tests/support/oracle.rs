//! Reference semantics for finite structures, written against the formula
//! AST only: a direct recursive evaluator, exhaustive counting and a naive
//! closure fixpoint. Also the random generators the acceptance suite uses.

use std::collections::{BTreeMap, BTreeSet};

use closurelab::{
    Formula, FiniteTables, PartitionedFormula, RelId, Signature, SortId, SolutionCountSet, StructureSpec, Var,
};
use rand::Rng;

/// A finite structure as plain sets.
#[derive(Debug, Clone)]
pub struct Tiny {
    pub sig: Signature,
    pub domains: Vec<Vec<u64>>,
    pub rels: Vec<BTreeSet<Vec<u64>>>,
}

pub type Env = BTreeMap<String, u64>;

impl Tiny {
    pub fn spec(&self) -> StructureSpec {
        StructureSpec::finite(
            self.sig.clone(),
            FiniteTables {
                elements: self.domains.iter().map(|d| d.iter().copied().collect()).collect(),
                relations: self.rels.clone(),
            },
        )
        .expect("generated structure is well formed")
    }

    pub fn holds(&self, f: &Formula, env: &mut Env) -> bool {
        match f {
            Formula::Const(b) => *b,
            Formula::Atom(r, args) => {
                let t: Vec<u64> = args.iter().map(|v| env[&v.name]).collect();
                self.rels[r.0].contains(&t)
            }
            Formula::Eq(a, b) => env[&a.name] == env[&b.name],
            Formula::Not(g) => !self.holds(g, env),
            Formula::And(a, b) => self.holds(a, env) && self.holds(b, env),
            Formula::Or(a, b) => self.holds(a, env) || self.holds(b, env),
            Formula::Exists(vs, g) => self.exists(vs, g, env),
            Formula::Forall(vs, g) => !self.exists(vs, &Formula::Not(g.clone()), env),
        }
    }

    fn exists(&self, vs: &[Var], g: &Formula, env: &mut Env) -> bool {
        let Some((v, rest)) = vs.split_first() else {
            return self.holds(g, env);
        };
        let saved = env.get(&v.name).copied();
        let mut found = false;
        for x in &self.domains[v.sort.0] {
            env.insert(v.name.clone(), *x);
            if self.exists(rest, g, env) {
                found = true;
                break;
            }
        }
        match saved {
            Some(x) => env.insert(v.name.clone(), x),
            None => env.remove(&v.name),
        };
        found
    }

    /// Every assignment of `vars`, in lexicographic order.
    pub fn tuples(&self, vars: &[Var]) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|t| {
                    self.domains[v.sort.0].iter().map(move |x| {
                        let mut t = t.clone();
                        t.push(*x);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// The solution set {b̄ : φ(ā; b̄)}.
    pub fn solutions(&self, pf: &PartitionedFormula, a: &[u64]) -> Vec<Vec<u64>> {
        let mut env: Env = pf.left.iter().map(|v| v.name.clone()).zip(a.iter().copied()).collect();
        self.tuples(&pf.right)
            .into_iter()
            .filter(|b| {
                for (v, x) in pf.right.iter().zip(b) {
                    env.insert(v.name.clone(), *x);
                }
                self.holds(&pf.formula, &mut env)
            })
            .collect()
    }

    /// Naive closure: re-scan every left tuple over the current set until
    /// nothing changes. Single-sorted.
    pub fn closure(&self, phis: &[PartitionedFormula], base: &BTreeSet<u64>, counts: &SolutionCountSet) -> BTreeSet<u64> {
        let mut current = base.clone();
        loop {
            let mut next = current.clone();
            for pf in phis {
                let pool: Vec<u64> = current.iter().copied().collect();
                let mut left = vec![Vec::new()];
                for _ in &pf.left {
                    left = left
                        .into_iter()
                        .flat_map(|t: Vec<u64>| {
                            pool.iter().map(move |x| {
                                let mut t = t.clone();
                                t.push(*x);
                                t
                            })
                        })
                        .collect();
                }
                for a in left {
                    let sol = self.solutions(pf, &a);
                    let admissible = match counts {
                        SolutionCountSet::AllOfN => true,
                        SolutionCountSet::Finite(set) => set.contains(&(sol.len() as u64)),
                    };
                    if admissible {
                        next.extend(sol.into_iter().flatten());
                    }
                }
            }
            if next == current {
                return current;
            }
            current = next;
        }
    }
}

/// One sort `X`, binary relations named by `rels`.
pub fn binary_signature(rels: &[&str]) -> Signature {
    let mut sig = Signature::new();
    let x = sig.add_sort("X").unwrap();
    for r in rels {
        sig.add_relation(*r, vec![x, x]).unwrap();
    }
    sig
}

pub fn random_tiny(rng: &mut impl Rng, sig: &Signature, max_universe: u64) -> Tiny {
    let n = rng.gen_range(1..=max_universe);
    let density: f64 = rng.gen_range(0.15..0.7);
    let rels = sig
        .relation_ids()
        .map(|r| {
            let arity = sig.relation(r).ty.len();
            let mut all = vec![Vec::new()];
            for _ in 0..arity {
                all = all
                    .into_iter()
                    .flat_map(|t: Vec<u64>| {
                        (0..n).map(move |x| {
                            let mut t = t.clone();
                            t.push(x);
                            t
                        })
                    })
                    .collect();
            }
            all.into_iter().filter(|_| rng.gen_bool(density)).collect()
        })
        .collect();
    Tiny {
        sig: sig.clone(),
        domains: vec![(0..n).collect(); sig.num_sorts()],
        rels,
    }
}

/// Every structure on {0..n-1} with a single binary relation.
pub fn all_binary_graphs(sig: &Signature, n: u64) -> Vec<Tiny> {
    let cells: Vec<Vec<u64>> = (0..n).flat_map(|a| (0..n).map(move |b| vec![a, b])).collect();
    (0u64..1 << cells.len())
        .map(|mask| Tiny {
            sig: sig.clone(),
            domains: vec![(0..n).collect()],
            rels: vec![cells
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, c)| c.clone())
                .collect()],
        })
        .collect()
}

/// Random formula over `vars` with binary atoms from `rels`; `quantifiers`
/// bounds the nesting of fresh `w<i>` quantifiers.
pub fn random_formula(rng: &mut impl Rng, sig: &Signature, vars: &[Var], depth: u32, quantifiers: u32) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let pick = |rng: &mut _| vars[Rng::gen_range(rng, 0..vars.len())].clone();
        return match rng.gen_range(0..10) {
            0 => Formula::Const(rng.gen_bool(0.5)),
            1 | 2 => {
                let (a, b) = (pick(rng), pick(rng));
                if a.sort == b.sort {
                    Formula::Eq(a, b)
                } else {
                    Formula::Const(true)
                }
            }
            _ => {
                let rels: Vec<RelId> = sig.relation_ids().collect();
                let r = rels[rng.gen_range(0..rels.len())];
                let ty = sig.relation(r).ty.clone();
                let args: Option<Vec<Var>> = ty
                    .sorts()
                    .iter()
                    .map(|s| {
                        let of_sort: Vec<&Var> = vars.iter().filter(|v| v.sort == *s).collect();
                        (!of_sort.is_empty()).then(|| of_sort[rng.gen_range(0..of_sort.len())].clone())
                    })
                    .collect();
                match args {
                    Some(args) => Formula::Atom(r, args),
                    None => Formula::Const(false),
                }
            }
        };
    }
    let choices = if quantifiers > 0 { 5 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => Formula::Not(Box::new(random_formula(rng, sig, vars, depth - 1, quantifiers))),
        1 => Formula::And(
            Box::new(random_formula(rng, sig, vars, depth - 1, quantifiers)),
            Box::new(random_formula(rng, sig, vars, depth - 1, quantifiers)),
        ),
        2 => Formula::Or(
            Box::new(random_formula(rng, sig, vars, depth - 1, quantifiers)),
            Box::new(random_formula(rng, sig, vars, depth - 1, quantifiers)),
        ),
        k => {
            let sort = vars[rng.gen_range(0..vars.len())].sort;
            let w = Var::new(format!("w{quantifiers}"), sort);
            let mut inner = vars.to_vec();
            inner.push(w.clone());
            let body = Box::new(random_formula(rng, sig, &inner, depth - 1, quantifiers - 1));
            if k == 3 {
                Formula::Exists(vec![w], body)
            } else {
                Formula::Forall(vec![w], body)
            }
        }
    }
}

/// All 2^|vars| left/right splits, keeping declared order.
pub fn all_partitions(sig: &Signature, f: &Formula, vars: &[Var]) -> Vec<PartitionedFormula> {
    (0u32..1 << vars.len())
        .map(|mask| {
            let (left, right): (Vec<(usize, &Var)>, Vec<(usize, &Var)>) =
                vars.iter().enumerate().partition(|(i, _)| mask >> i & 1 == 1);
            PartitionedFormula::new(
                sig,
                f.clone(),
                left.into_iter().map(|(_, v)| v.clone()).collect(),
                right.into_iter().map(|(_, v)| v.clone()).collect(),
            )
            .expect("generated formula is well formed")
        })
        .collect()
}

pub fn xyz(sort: SortId) -> Vec<Var> {
    ["x", "y", "z"].iter().map(|n| Var::new(*n, sort)).collect()
}
