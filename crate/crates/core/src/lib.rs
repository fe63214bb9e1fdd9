//! Unbind/rebind lambda calculus.
//!
//! Pure core: terms and substitution, canonical intersection types with
//! certificate-producing subtyping, a bidirectional type checker, and a
//! deterministic small-step evaluator. No I/O; only `alloc` is required.

#![no_std]

extern crate alloc;

pub mod cert;
pub mod deriv;
pub mod eval;
pub mod oracle;
pub mod parse;
pub mod print;
pub mod syntax;
pub mod typeck;
pub mod types;

pub use eval::{
    run, step, step_cbn, step_cbv, Outcome, RuleName, RunResult, Status, Strategy, StuckReason,
};
pub use parse::{parse_term, parse_type, ParseError, SourceSpan};
pub use syntax::{Ident, Level, PrimKind, RawType, Term, TypeCtx, TypedSubst, UntypedSubst};
pub use typeck::{check, check_subst_ok, synth, Synth, TypeError, TypeErrorCode};
pub use types::{normalize, subtype, CanonAtom, CanonType};
