//! Regular-language inference from example sets.

mod automaton;
mod infer;
mod partition;
mod sample;
mod sufficiency;

pub use automaton::{lex_cmp, lex_less, show, shortlex_cmp, Dfa, DfaError};
pub use infer::{build_dfa, equiv_closure, infer, right_completion, right_completion_shuffled, InferError};
pub use partition::{PartitionError, StringPartition};
pub use sample::{prefix_closure, regular_signature, RegularExample, RegularExampleSet, SampleError};
pub use sufficiency::{
    admissible_instance, check_sufficient, generate_sufficient, regular_template, Condition, Failure,
    SufficiencyReport,
};
