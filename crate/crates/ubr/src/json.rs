//! JSON shapes for traces, diagnostics and canonical types.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ubr_core::{CanonAtom, CanonType, RuleName, Term};

/// One line of `run --json` output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: String,
    pub term: String,
}

impl TraceEntry {
    pub fn new(step: usize, rule: &RuleName, term: &Term) -> TraceEntry {
        TraceEntry {
            step,
            rule: rule.name(),
            term: term.to_string(),
        }
    }
}

/// Final line of `run --json` output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: String,
    pub steps: usize,
    pub term: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub span: Span,
    pub message: String,
}

pub fn canon_type(t: &CanonType) -> Value {
    json!({
        "kind": "inter",
        "atoms": t.atoms().iter().map(canon_atom).collect::<Vec<_>>(),
    })
}

fn canon_atom(a: &CanonAtom) -> Value {
    match a {
        CanonAtom::Int(l) => json!({ "kind": "int", "level": l }),
        CanonAtom::Code(l) => json!({ "kind": "code", "level": l }),
        CanonAtom::Arrow(d, c) => json!({
            "kind": "arrow",
            "level": 0,
            "dom": canon_type(d),
            "cod": canon_atom(c),
        }),
    }
}
