//! The regression corpus shipped under `examples/`: `.ubr` sources with
//! `.expected.json` sidecars recording the outcome each example must have.

use serde::Deserialize;
use ubr_core::{parse_term, Term};

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    /// Canonical synthesized type.
    pub r#type: Option<String>,
    pub value_type: Option<bool>,
    /// Name of the type error code.
    pub type_error: Option<String>,
    pub cbv: Option<ExpectedRun>,
    pub cbn: Option<ExpectedRun>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedRun {
    /// `value`, `error`, `stuck` or `fuel`.
    pub status: String,
    pub r#final: Option<String>,
    pub rules: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Example {
    pub name: &'static str,
    pub source: &'static str,
    pub expected: Expected,
}

impl Example {
    pub fn term(&self) -> Term {
        parse_term(self.source).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

macro_rules! corpus {
    ($($name:literal),* $(,)?) => {
        [$((
            $name,
            include_str!(concat!("../examples/", $name, ".ubr")),
            include_str!(concat!("../examples/", $name, ".expected.json")),
        )),*]
    };
}

const FILES: [(&str, &str, &str); 21] = corpus![
    "first_example",
    "two_rebinds",
    "missing_rebinder",
    "mismatched_annotation",
    "rebind_under_lambda",
    "static_binder",
    "rebind_variable",
    "cbv_ill_typed",
    "strategy_contrast",
    "strategy_agree",
    "double_unbind",
    "nested_code",
    "staged_lambda",
    "staged_lambda_rebound",
    "applied_code",
    "stuck_candidate",
    "one_rebind_stuck",
    "sum_of_unbind",
    "capture_stuck",
    "unbinder_not_renamed",
    "binders_block_rebind",
];

pub fn examples() -> Vec<Example> {
    FILES
        .iter()
        .map(|(name, source, sidecar)| Example {
            name,
            source,
            expected: serde_json::from_str(sidecar)
                .unwrap_or_else(|e| panic!("{name}.expected.json: {e}")),
        })
        .collect()
}

pub fn example(name: &str) -> Option<Example> {
    examples().into_iter().find(|e| e.name == name)
}
