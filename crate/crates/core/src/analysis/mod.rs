//! Coherence measurements and the recovery guarantees built on them.
//!
//! Quantities are measured on a realization in dictionary coordinates, so
//! under exact column normalization the guarantees apply as stated; under
//! statistical normalization they are evaluated on the same formulas.

mod bounds;
mod coherence;
mod info;
mod report;

pub use bounds::{
    error_and_ser_bounds, gram_margin, lemma1_predicate, theorem1_predicate, theorem2_predicates,
    ErrorBounds, Failure, PredicateOutcome, Theorem2Outcome,
};
pub use coherence::{
    active_block_norms, block_coherence, coherence_profile, iteration_profile, max_correlation,
    sub_coherence, CoherenceOptions, CoherenceProfile,
};
pub use info::{
    binary_entropy, capacity_bits, log2_binomial, noise_tail_prob, theorem3_report, throughput,
    Theorem3Report, CAPACITY_DIM_CAP,
};
pub use report::{analyze, theorem2_trace, GuaranteeReport, IterationGuarantee};
