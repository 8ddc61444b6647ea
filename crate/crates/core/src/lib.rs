//! Dynamic file-safety checking for a small While language with file
//! operations (`open`, `close`, `read`) and fork-style threads.
//!
//! Programs run on a small-step rewriting machine. A program is file safe
//! when every normal form it can reach is final; a stuck normal form is an
//! unsafe file access (double open, double close, read of a closed file) or
//! another runtime error. The [`explorer`] decides this by bounded
//! exhaustive search and returns counterexample traces.

pub mod corpus;
pub mod explorer;
pub mod fs_spec;
pub mod machine;
pub mod semantics;
pub mod syntax;

pub use explorer::{
    embed_trace, explore, explore_graph, is_stuck, oracle_explore, relax_program, run_single,
    Bounds, Exhausted, Exploration, ExploreError, Policy, Run, RunEnd, Trace, Verdict, VerdictKind,
};
pub use fs_spec::{FsSpec, SpecError};
pub use machine::{
    canonical_key, classify, initial_config, CanonicalKey, Class, Configuration, Control, Env,
    FileData, FileStatus, FileStatusTable, FileStore, Frame, MachineError,
};
pub use semantics::{
    enumerate_interleavings, eval_phi, step, Choice, Options, ReadMode, Rule, RuleInstance,
};
pub use syntax::{
    atoms_of, parse_program, pretty_print, Atom, BinOp, Mode, ParseError, Program, Stmt,
};
