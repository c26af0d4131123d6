//! Generators for the lower-bound structures, each with an analytic oracle
//! derived from its enumeration source.

mod bipartite;
mod chain_graph;
mod machine;
pub mod pairing;
mod path_witness;
mod sorted_halting;
mod source;

pub use bipartite::{
    bipartite_from_source, bipartite_signature, build_bipartite_pair, build_z, decode_chain_indexing, named as bipartite_named,
    psi_formula, BipartiteGraph, BipartitePair, F_REL as BIPARTITE_F, U0, U1, U2, U_REL,
};
pub use chain_graph::{
    build_chain_graph, decode_parities, finite_chains, ChainBuilder, ChainInventory, FoundChain, LimitFunction, PrimeChain,
    EDGE,
};
pub use machine::{source_from_machines, Machine};
pub use path_witness::{build_path_witness, PathWitness, Vertex, F_REL as PATH_WITNESS_F};
pub use sorted_halting::{build_sorted_halting, xi_formulas, SortedHalting};
pub use source::EnumerationSource;
