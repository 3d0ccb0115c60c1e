//! Fixed inputs shared by the benchmarks.

use csent::qmat::seeded_rng;
use csent::states::random_mixed_state;
use csent::MultipartiteState;

/// Seeded two-qubit state of the given rank.
pub fn two_qubit_state(rank: usize) -> MultipartiteState {
    random_mixed_state(2, 2, rank, &mut seeded_rng(17)).expect("rank is at most 4")
}
