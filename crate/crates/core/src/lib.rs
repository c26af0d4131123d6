//! Algebraic and definable closure over many-sorted relational structures.

pub mod closure;
pub mod constructions;
pub mod error;
pub mod formula;
pub mod parser;
pub mod reductions;
pub mod signature;
pub mod structure;
pub mod transforms;

pub use error::{Error, Result};
pub use formula::{Formula, PartitionedFormula, Var};
pub use parser::{parse_formula, print_formula};
pub use signature::{RelId, RelationSymbol, Signature, SortId, TupleType};
pub use structure::{
    brute_force_count, eval, parse_structure, print_structure, truncate, Assignment, Cardinality,
    CardinalityOracle, Element, FiniteTables, StageBudget, StructureRegistry, StructureSpec,
    Support, TruthVerdict,
};
pub use closure::{
    acl_set_member, cl_fixpoint, cl_step, closure_via_reachability, count_solutions,
    dcl_set_member, in_acl0, in_dcl0, set_membership, solve, ClosureResult, CountVerdict,
    MembershipVerdict, SolutionCountSet, TraceEntry,
};
pub use reductions::{build_psi, build_upsilon, cl_from_acl_dcl, MembershipOracle, ReducedCount, UpsilonBundle};
pub use transforms::{augment_with_nat, gamma_prime, lift_qf, limit_encode, morleyize, parse_limit_table, LimitEncoding, LimitFn, LimitPresentation, MorleyizationResult};
