//! Benchmark fixtures shared by the criterion targets.

use closurelab::{FiniteTables, Signature, StructureSpec};

/// One sort `X` on {0..n-1} with binary relations `E` and `R` given as
/// edge lists.
pub fn graph(n: u64, e: &[(u64, u64)], r: &[(u64, u64)]) -> StructureSpec {
    let mut sig = Signature::new();
    let x = sig.add_sort("X").expect("fresh signature");
    sig.add_relation("E", vec![x, x]).expect("fresh signature");
    sig.add_relation("R", vec![x, x]).expect("fresh signature");
    let rel = |pairs: &[(u64, u64)]| pairs.iter().map(|(a, b)| vec![*a, *b]).collect();
    StructureSpec::finite(
        sig,
        FiniteTables {
            elements: vec![(0..n).collect()],
            relations: vec![rel(e), rel(r)],
        },
    )
    .expect("edges lie in the universe")
}
