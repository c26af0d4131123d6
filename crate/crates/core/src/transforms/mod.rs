//! Structure and formula transforms: adjoining a copy of ℕ, the limit
//! formula γ′, limit encodings of relations and Morleyization.

mod limit;
mod morley;
mod nat;

pub use limit::{
    gamma_prime, lift_qf, limit_encode, parse_limit_table, LimitEncoding, LimitFn,
    LimitPresentation,
};
pub use morley::{morleyize, MorleyizationResult};
pub use nat::{augment_with_nat, NAT_RELATION, NAT_SORT};
