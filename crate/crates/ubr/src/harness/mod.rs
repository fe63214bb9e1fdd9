//! Generators, properties, shrinking and the subtyping oracle comparison.

pub mod gen;
pub mod props;
pub mod shrink;
pub mod universe;
