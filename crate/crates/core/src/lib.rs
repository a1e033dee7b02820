//! Template algebras over typed terms, with three learning engines:
//! regular-language inference, collage-operator fitting and fuzzy scene
//! grounding.

pub mod algebra;
pub mod collage;
pub mod dfa;
pub mod grammar;
pub mod io;
pub mod scene;
pub mod term;

pub use algebra::{
    enumerate_groundings, AlgebraError, CandidateFamily, Combine, Domain, EvalError, Example, GroundingAssignment,
    ObjectId, Operation, Opt, Payload, PayloadKind, TemplateAlgebra, Value,
};
pub use grammar::{rtg_generate, GenerationMode, GrammarError, RegularTreeGrammar};
pub use term::{typecheck_term, Alphabet, Term, TypeError, TypeName, TypedSymbol, VariableContext};
