//! A workbench for the finite π-calculus: parsing, early semantics, labelled
//! transition systems, strong and weak bisimilarity, stutter-free
//! normalisation and decomposition into parallel primes.

pub mod decompose;
pub mod demo;
pub mod enumerate;
pub mod equivalence;
pub mod error;
pub mod lts;
pub mod normalize;
pub mod parser;
pub mod random;
pub mod semantics;
pub mod syntax;

pub use decompose::{
    decomposition, find_split, multiset_eq_mod_bisim, scope_narrow, sweep_upd, verify_upd,
    Classifier, Decomposer, Decomposition, Split, SweepReport, Verdict,
};
pub use demo::{run_demo, DemoReport, Fact, DEMOS};
pub use enumerate::TermUniverse;
pub use equivalence::{
    bisimilar, bisimilar_in, bisimilar_to_nil, naive_bisim_oracle, refine, strong_bisim,
    weak_bisim, Mode, Partition,
};
pub use error::{Error, Result};
pub use lts::{depth_of, norm_of, Lts, State, StateId};
pub use normalize::{
    expand_hnf, has_stuttering, normalize_with_report, stutter_free, weak_depth, GuardedPrefix,
    HeadNormalForm, Normalized, StutterReport,
};
pub use parser::{parse, pretty, SourceSpan, SyntaxError};
pub use random::{GenConfig, TermGenerator};
pub use semantics::{transitions, weak_transitions, InputMode, NameUniverse, Transition};
pub use syntax::{Action, Name, Prefix, Process};
