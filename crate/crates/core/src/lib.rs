//! Justification theory for nested justification systems.

pub mod branches;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod facts;
pub mod fixpoint;
pub mod frames;
pub mod justify;
pub mod nested;
pub mod random;
pub mod syntax;

pub use branches::{evaluate_branch, project_branch, Branch, EvalKind, Evaluation, LocalityContext};
pub use error::{Error, Result};
pub use facts::{default_sign, Fact, FactSpace, Interpretation, Name, Sign, Truth};
pub use frames::{complementation, validate_frame, Frame, FrameViolation, Rule};
pub use justify::{
    best_justification, branch_values, enumerate_justifications, enumerate_models, is_model, jval, supported_value,
    Caps, Child, JNode, Justification, Semantics, System,
};
pub use nested::{
    check_equivalence, compress, expand, flatten, merge, shrink, unfold, unfold_rule, validate_nested, Compression,
    EquivalenceReport, NestedSystem, Provenance, Sampling,
};
pub use fixpoint::{
    decompose_formula, gamma_step, solve_direct, solve_via_translation, translate_to_nested, Assignment,
    FixpointDefinition, Formula, Polarity,
};
pub use syntax::{parse_definition, parse_system, print_flat, print_system};
