//! Set partitions, pairings, permutations by cycles and hierarchies: exact
//! counting, lazy enumeration and the Möbius calculus of the partition lattice.

mod cycles;
mod hierarchy;
mod numbers;
mod pairing;
mod partition;
mod profile;

pub use cycles::{enumerate_cycle_permutations, CyclePermutation, CyclePermutations};
pub use hierarchy::{
    enumerate_hierarchies, enumerate_hierarchies_with_limit, HNode, Hierarchies, Hierarchy, HIERARCHY_GUARD,
};
pub use numbers::{
    bell, bell_numbers, binomial, factorial, hierarchy_count, hierarchy_counts, pairing_count, stirling_first,
    stirling_first_table, stirling_second, stirling_second_explicit, stirling_second_table,
};
pub use pairing::{enumerate_pair_partitions, for_each_pairing, PairPartition, PairPartitions};
pub use partition::{
    block_mobius, block_mobius_f64, enumerate_partitions, enumerate_partitions_with_limit, mobius_factor,
    Partitions, RestrictedGrowth, SetPartition, PARTITION_GUARD,
};
pub use profile::{bell_polynomial, occupation_stats, profiles, rho_multiplicity, OccupationProfile};
