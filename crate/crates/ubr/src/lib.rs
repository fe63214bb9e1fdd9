//! Command-line front end, file formats and the property harness for the
//! unbind/rebind calculus.

pub mod cli;
pub mod corpus;
pub mod harness;
pub mod json;
