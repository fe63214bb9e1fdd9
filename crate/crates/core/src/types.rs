//! Canonical intersection types.
//!
//! A canonical type is a nonempty sorted set of atoms. Arrow atoms carry no
//! level: every arrow sits at level 0 and the level is pushed along the
//! codomain spine to the `int`/`code` leaf. Codomains are single atoms, so
//! an arrow into an intersection is stored as one atom per conjunct.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::syntax::{Level, PrimKind, RawType};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonAtom {
    Int(Level),
    Code(Level),
    Arrow(CanonType, Box<CanonAtom>),
}

/// Nonempty, duplicate-free, sorted set of atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonType(Vec<CanonAtom>);

impl CanonAtom {
    pub fn arrow(dom: CanonType, cod: CanonAtom) -> CanonAtom {
        CanonAtom::Arrow(dom, Box::new(cod))
    }

    /// Level of the `int`/`code` leaf at the end of the codomain spine.
    pub fn leaf_level(&self) -> Level {
        match self {
            CanonAtom::Int(l) | CanonAtom::Code(l) => *l,
            CanonAtom::Arrow(_, c) => c.leaf_level(),
        }
    }

    pub fn lift(&self, k: Level) -> CanonAtom {
        match self {
            CanonAtom::Int(l) => CanonAtom::Int(l.saturating_add(k)),
            CanonAtom::Code(l) => CanonAtom::Code(l.saturating_add(k)),
            CanonAtom::Arrow(d, c) => CanonAtom::arrow(d.clone(), c.lift(k)),
        }
    }

    fn decrement(&self) -> Option<CanonAtom> {
        match self {
            CanonAtom::Int(l) => Some(CanonAtom::Int(l.saturating_sub(1))),
            CanonAtom::Code(0) => None,
            CanonAtom::Code(l) => Some(CanonAtom::Code(l - 1)),
            CanonAtom::Arrow(d, c) => c.decrement().map(|c| CanonAtom::arrow(d.clone(), c)),
        }
    }

    /// Whether the single atom `self` is a subtype of the atom `goal`.
    pub fn covers(&self, goal: &CanonAtom) -> bool {
        match (self, goal) {
            (CanonAtom::Int(k), CanonAtom::Int(l)) => k <= l,
            (CanonAtom::Code(k), CanonAtom::Code(l)) => k == l,
            (CanonAtom::Arrow(d1, c1), CanonAtom::Arrow(d2, c2)) => {
                d2.is_subtype_of(d1) && c1.covers(c2)
            }
            _ => false,
        }
    }

    /// The raw type this atom stands for, arrows rendered at level 0.
    pub fn to_raw(&self) -> RawType {
        match self {
            CanonAtom::Int(l) => RawType::int(*l),
            CanonAtom::Code(l) => RawType::code(*l),
            CanonAtom::Arrow(d, c) => RawType::arrow(d.to_raw(), c.to_raw(), 0),
        }
    }
}

impl CanonType {
    /// Builds a canonical type from arbitrary atoms; `None` if empty.
    pub fn from_atoms(atoms: impl IntoIterator<Item = CanonAtom>) -> Option<CanonType> {
        let set: BTreeSet<CanonAtom> = atoms.into_iter().collect();
        if set.is_empty() {
            None
        } else {
            Some(CanonType(set.into_iter().collect()))
        }
    }

    pub fn single(atom: CanonAtom) -> CanonType {
        CanonType(alloc::vec![atom])
    }

    pub fn int(level: Level) -> CanonType {
        CanonType::single(CanonAtom::Int(level))
    }

    pub fn code(level: Level) -> CanonType {
        CanonType::single(CanonAtom::Code(level))
    }

    pub fn atoms(&self) -> &[CanonAtom] {
        &self.0
    }

    pub fn contains(&self, atom: &CanonAtom) -> bool {
        self.0.binary_search(atom).is_ok()
    }

    pub fn union(&self, other: &CanonType) -> CanonType {
        CanonType::from_atoms(self.0.iter().chain(other.0.iter()).cloned())
            .expect("union of nonempty types")
    }

    /// `S↑k`.
    pub fn lift(&self, k: Level) -> CanonType {
        CanonType::from_atoms(self.0.iter().map(|a| a.lift(k))).expect("nonempty")
    }

    /// Largest expressible `T` with `self ≤ T↑1`, or `None` when no atom
    /// survives (only `code^0` atoms or arrows ending in `code^0`).
    pub fn decrement(&self) -> Option<CanonType> {
        CanonType::from_atoms(self.0.iter().filter_map(CanonAtom::decrement))
    }

    /// Algorithmic subtyping: every atom of `other` is covered by one atom
    /// of `self`.
    pub fn is_subtype_of(&self, other: &CanonType) -> bool {
        other
            .0
            .iter()
            .all(|goal| self.covering_atom(goal).is_some())
    }

    /// First atom of `self` covering `goal`.
    pub fn covering_atom(&self, goal: &CanonAtom) -> Option<&CanonAtom> {
        self.0.iter().find(|a| a.covers(goal))
    }

    /// Some conjunct is a primitive type at level 0.
    pub fn is_value_type(&self) -> bool {
        self.0.iter().any(|a| {
            matches!(
                a,
                CanonAtom::Int(0) | CanonAtom::Code(0) | CanonAtom::Arrow(..)
            )
        })
    }

    pub fn min_int_level(&self) -> Option<Level> {
        self.0
            .iter()
            .filter_map(|a| match a {
                CanonAtom::Int(l) => Some(*l),
                _ => None,
            })
            .min()
    }

    pub fn has_arrow(&self) -> bool {
        self.0.iter().any(|a| matches!(a, CanonAtom::Arrow(..)))
    }

    /// Right-nested intersection of the rendered atoms, in canonical order.
    pub fn to_raw(&self) -> RawType {
        render_list(&self.0)
    }
}

pub(crate) fn render_list(atoms: &[CanonAtom]) -> RawType {
    match atoms {
        [] => unreachable!("canonical types are nonempty"),
        [a] => a.to_raw(),
        [a, rest @ ..] => RawType::inter(a.to_raw(), render_list(rest)),
    }
}

/// Canonical form of a raw type.
pub fn normalize(t: &RawType) -> CanonType {
    match t {
        RawType::Inter(a, b) => normalize(a).union(&normalize(b)),
        RawType::Prim(PrimKind::Int, l) => CanonType::int(*l),
        RawType::Prim(PrimKind::Code, l) => CanonType::code(*l),
        RawType::Prim(PrimKind::Arrow(d, c), l) => {
            let dom = normalize(d);
            let cod = normalize(c).lift(*l);
            CanonType::from_atoms(
                cod.atoms()
                    .iter()
                    .map(|a| CanonAtom::arrow(dom.clone(), a.clone())),
            )
            .expect("nonempty")
        }
    }
}

/// `normalize(s) ≤ normalize(t)` by the algorithm.
pub fn subtype(s: &RawType, t: &RawType) -> bool {
    normalize(s).is_subtype_of(&normalize(t))
}
