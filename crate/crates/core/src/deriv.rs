//! Declarative typing derivations.
//!
//! A [`Derivation`] is a tree of typing rules over raw types, with explicit
//! intersection introduction and subsumption steps. [`replay`] checks it
//! rule by rule against a term without consulting the algorithmic checker;
//! [`derive`] builds one from a successful synthesis.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cert::{subtype_cert, SubtypeCert};
use crate::syntax::{Ident, Level, PrimKind, RawType, Term, TypeCtx};
use crate::typeck::{extend_ctx, is_bare_fn, synth_rooted, Synth};
use crate::types::{normalize, CanonAtom, CanonType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Var(Ident),
    Num,
    /// `error` at the given type.
    Error(RawType),
    Sum(Level, Box<Derivation>, Box<Derivation>),
    /// Binder type and the body's derivation.
    Abs(RawType, Box<Derivation>),
    App(Box<Derivation>, Box<Derivation>),
    /// Unbound code at `code^0`; the body derivation shows it is typable.
    Unbind0(Box<Derivation>),
    /// Unbound code at the body's type lifted by one.
    Unbind(Box<Derivation>),
    /// Concluded type, target derivation at that type lifted by one, and per
    /// entry a derivation at a value type with its subtyping certificate.
    Rebind(RawType, Box<Derivation>, Vec<(Derivation, SubtypeCert)>),
    Inter(Box<Derivation>, Box<Derivation>),
    Sub(Box<Derivation>, SubtypeCert),
}

impl Derivation {
    pub fn rule_name(&self) -> &'static str {
        match self {
            Derivation::Var(_) => "T-Var",
            Derivation::Num => "T-Num",
            Derivation::Error(_) => "T-Error",
            Derivation::Sum(..) => "T-Sum",
            Derivation::Abs(..) => "T-Abs",
            Derivation::App(..) => "T-App",
            Derivation::Unbind0(_) => "T-Unbind-0",
            Derivation::Unbind(_) => "T-Unbind",
            Derivation::Rebind(..) => "T-Rebind",
            Derivation::Inter(..) => "T-Inter",
            Derivation::Sub(..) => "T-Sub",
        }
    }

    /// Number of rule applications, not counting subtyping certificates.
    pub fn size(&self) -> usize {
        1 + match self {
            Derivation::Var(_) | Derivation::Num | Derivation::Error(_) => 0,
            Derivation::Sum(_, a, b) | Derivation::App(a, b) | Derivation::Inter(a, b) => {
                a.size() + b.size()
            }
            Derivation::Abs(_, d)
            | Derivation::Unbind0(d)
            | Derivation::Unbind(d)
            | Derivation::Sub(d, _) => d.size(),
            Derivation::Rebind(_, d, es) => {
                d.size() + es.iter().map(|(e, _)| e.size()).sum::<usize>()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationError {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for DerivationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

fn bad<T>(d: &Derivation, message: String) -> Result<T, DerivationError> {
    Err(DerivationError {
        rule: d.rule_name(),
        message,
    })
}

/// Checks `d` as a derivation of `ctx ⊢ t : T` and returns `T`.
pub fn replay(ctx: &TypeCtx, t: &Term, d: &Derivation) -> Result<RawType, DerivationError> {
    match (d, t) {
        (Derivation::Inter(a, b), _) => Ok(RawType::inter(replay(ctx, t, a)?, replay(ctx, t, b)?)),
        (Derivation::Sub(inner, cert), _) => {
            let have = replay(ctx, t, inner)?;
            let (lhs, rhs) = cert.replay().map_err(|e| DerivationError {
                rule: "T-Sub",
                message: format!("{e:?}"),
            })?;
            if lhs != have {
                return bad(
                    d,
                    format!("certificate starts at {lhs}, derivation ends at {have}"),
                );
            }
            Ok(rhs)
        }
        (Derivation::Var(x), Term::Var(y)) if x == y => match ctx.get(x) {
            Some(ty) => Ok(ty.clone()),
            None => bad(d, format!("`{x}` is not in the context")),
        },
        (Derivation::Num, Term::Num(_)) => Ok(RawType::int(0)),
        (Derivation::Error(ty), Term::Error) => Ok(ty.clone()),
        (Derivation::Sum(l, da, db), Term::Sum(a, b)) => {
            let want = RawType::int(*l);
            for (sub, dsub) in [(a, da), (b, db)] {
                let have = replay(ctx, sub, dsub)?;
                if have != want {
                    return bad(d, format!("operand has {have}, expected {want}"));
                }
            }
            Ok(want)
        }
        (Derivation::Abs(bound, body_d), Term::Lam(x, annot, body)) => {
            if let Some(a) = annot {
                if a != bound {
                    return bad(d, format!("binder annotated {a}, derivation uses {bound}"));
                }
            }
            let cod = replay(&ctx.update(x.clone(), bound.clone()), body, body_d)?;
            Ok(RawType::arrow(bound.clone(), cod, 0))
        }
        (Derivation::App(df, da), Term::App(f, a)) => {
            let fun = replay(ctx, f, df)?;
            let arg = replay(ctx, a, da)?;
            match fun {
                RawType::Prim(PrimKind::Arrow(dom, cod), 0) => {
                    if *dom != arg {
                        return bad(d, format!("function expects {dom}, argument has {arg}"));
                    }
                    if !arg.is_value_type() {
                        return bad(d, format!("argument type {arg} is not a value type"));
                    }
                    Ok(*cod)
                }
                other => bad(d, format!("function has {other}, not an arrow at level 0")),
            }
        }
        (Derivation::Unbind0(body_d), Term::Unbind(entries, body)) => {
            replay(&extend_ctx(ctx, entries), body, body_d)?;
            Ok(RawType::code(0))
        }
        (Derivation::Unbind(body_d), Term::Unbind(entries, body)) => {
            Ok(replay(&extend_ctx(ctx, entries), body, body_d)?.lifted(1))
        }
        (Derivation::Rebind(ty, target_d, entry_ds), Term::Rebind(target, r)) => {
            let want = ty.lifted(1);
            let have = replay(ctx, target, target_d)?;
            if have != want {
                return bad(d, format!("target has {have}, expected {want}"));
            }
            if entry_ds.len() != r.len() {
                return bad(d, String::from("entry count mismatch"));
            }
            for ((x, annot, u), (ud, cert)) in r.entries().iter().zip(entry_ds) {
                let v = replay(ctx, u, ud)?;
                if !v.is_value_type() {
                    return bad(d, format!("rebinder `{x}` has {v}, not a value type"));
                }
                if !cert.proves(&v, annot) {
                    return bad(d, format!("no certificate for {v} <= {annot} at `{x}`"));
                }
            }
            Ok(ty.clone())
        }
        _ => bad(d, String::from("rule does not match the term")),
    }
}

/// Builds a derivation of `ctx ⊢ t : T` where `T` is the rendering of the
/// synthesized type. `None` when `t` is ill typed, synthesizes bottom, or
/// needs a case the builder does not cover.
pub fn derive(ctx: &TypeCtx, t: &Term) -> Option<(Derivation, RawType)> {
    let b = Builder { root: ctx.domain() };
    let s = b.synth(ctx, t)?;
    let ty = s.as_type()?.to_raw();
    Some((b.derive(ctx, t)?, ty))
}

struct Builder {
    root: BTreeSet<Ident>,
}

fn coerce(d: Derivation, from: &RawType, to: &RawType) -> Option<Derivation> {
    if from == to {
        Some(d)
    } else {
        Some(Derivation::Sub(Box::new(d), subtype_cert(from, to)?))
    }
}

impl Builder {
    fn synth(&self, ctx: &TypeCtx, t: &Term) -> Option<Synth> {
        synth_rooted(&self.root, ctx, t).ok()
    }

    /// Derivation concluding exactly the rendering of the synthesized type.
    fn derive(&self, ctx: &TypeCtx, t: &Term) -> Option<Derivation> {
        let out = self.synth(ctx, t)?.as_type()?.to_raw();
        match t {
            Term::Var(x) => coerce(Derivation::Var(x.clone()), ctx.get(x)?, &out),
            Term::Num(_) => Some(Derivation::Num),
            Term::Error => None,
            Term::Sum(a, b) => {
                let RawType::Prim(PrimKind::Int, l) = out else {
                    return None;
                };
                let da = self.derive_at(ctx, a, &out)?;
                let db = self.derive_at(ctx, b, &out)?;
                Some(Derivation::Sum(l, Box::new(da), Box::new(db)))
            }
            Term::Lam(x, Some(annot), body) => {
                let inner = ctx.update(x.clone(), annot.clone());
                let (bd, bty) = match self.synth(&inner, body)? {
                    Synth::Type(c) => (self.derive(&inner, body)?, c.to_raw()),
                    Synth::Bottom => (
                        self.derive_at(&inner, body, &RawType::int(0))?,
                        RawType::int(0),
                    ),
                };
                let have = RawType::arrow(annot.clone(), bty, 0);
                coerce(Derivation::Abs(annot.clone(), Box::new(bd)), &have, &out)
            }
            Term::Lam(_, None, _) => None,
            Term::App(f, a) => {
                if let Term::Lam(x, None, body) = &**f {
                    let v = self.synth(ctx, a)?.as_type()?.to_raw();
                    let da = self.derive(ctx, a)?;
                    let inner = ctx.update(x.clone(), v.clone());
                    let bd = self.derive(&inner, body)?;
                    let df = Derivation::Abs(v, Box::new(bd));
                    return Some(Derivation::App(Box::new(df), Box::new(da)));
                }
                if is_bare_fn(f) {
                    let v = self.synth(ctx, a)?.as_type()?.to_raw();
                    let da = self.derive(ctx, a)?;
                    let (df, fty) = self.derive_bare_fn(ctx, f, &v)?;
                    let df = coerce(df, &fty, &RawType::arrow(v, out.clone(), 0))?;
                    return Some(Derivation::App(Box::new(df), Box::new(da)));
                }
                let fun = self.synth(ctx, f)?.as_type()?.clone();
                let (v, da) = match self.synth(ctx, a)? {
                    Synth::Type(v) => (v.to_raw(), self.derive(ctx, a)?),
                    Synth::Bottom => {
                        let v = value_below_domains(&fun).to_raw();
                        let da = self.derive_at(ctx, a, &v)?;
                        (v, da)
                    }
                };
                let want = RawType::arrow(v, out.clone(), 0);
                let df = coerce(self.derive(ctx, f)?, &fun.to_raw(), &want)?;
                Some(Derivation::App(Box::new(df), Box::new(da)))
            }
            Term::Unbind(entries, body) => {
                let inner = extend_ctx(ctx, entries);
                match self.synth(&inner, body)? {
                    Synth::Type(b) => {
                        let bd = self.derive(&inner, body)?;
                        let have = RawType::inter(RawType::code(0), b.to_raw().lifted(1));
                        let d = Derivation::Inter(
                            Box::new(Derivation::Unbind0(Box::new(bd.clone()))),
                            Box::new(Derivation::Unbind(Box::new(bd))),
                        );
                        coerce(d, &have, &out)
                    }
                    Synth::Bottom => {
                        let bd = self.derive_at(&inner, body, &RawType::int(0))?;
                        Some(Derivation::Unbind0(Box::new(bd)))
                    }
                }
            }
            Term::Rebind(target, r) => {
                let tty = self.synth(ctx, target)?.as_type()?.to_raw();
                let td = coerce(self.derive(ctx, target)?, &tty, &out.lifted(1))?;
                let entries = self.entries(ctx, r)?;
                Some(Derivation::Rebind(out, Box::new(td), entries))
            }
        }
    }

    /// Derivation for a chain of rebinds around an unannotated lambda whose
    /// binder is given type `dom`, with the type it concludes.
    fn derive_bare_fn(
        &self,
        ctx: &TypeCtx,
        f: &Term,
        dom: &RawType,
    ) -> Option<(Derivation, RawType)> {
        match f {
            Term::Lam(x, None, body) => {
                let inner = ctx.update(x.clone(), dom.clone());
                let (bd, bty) = match self.synth(&inner, body)? {
                    Synth::Type(c) => (self.derive(&inner, body)?, c.to_raw()),
                    Synth::Bottom => (
                        self.derive_at(&inner, body, &RawType::int(0))?,
                        RawType::int(0),
                    ),
                };
                let ty = RawType::arrow(dom.clone(), bty, 0);
                Some((Derivation::Abs(dom.clone(), Box::new(bd)), ty))
            }
            Term::Rebind(target, r) => {
                let (td, tty) = self.derive_bare_fn(ctx, target, dom)?;
                let out = normalize(&tty).decrement()?.to_raw();
                let td = coerce(td, &tty, &out.lifted(1))?;
                let entries = self.entries(ctx, r)?;
                Some((Derivation::Rebind(out.clone(), Box::new(td), entries), out))
            }
            _ => None,
        }
    }

    fn entries(
        &self,
        ctx: &TypeCtx,
        r: &crate::syntax::TypedSubst,
    ) -> Option<Vec<(Derivation, SubtypeCert)>> {
        r.entries()
            .iter()
            .map(|(_, annot, u)| {
                let v = match self.synth(ctx, u)? {
                    Synth::Type(v) => v.to_raw(),
                    Synth::Bottom => RawType::inter(annot.clone(), RawType::int(0)),
                };
                let d = self.derive_at(ctx, u, &v)?;
                Some((d, subtype_cert(&v, annot)?))
            })
            .collect()
    }

    /// Derivation of `ctx ⊢ t : want`, for `want` above the synthesized type.
    fn derive_at(&self, ctx: &TypeCtx, t: &Term, want: &RawType) -> Option<Derivation> {
        match self.synth(ctx, t)? {
            Synth::Type(s) => coerce(self.derive(ctx, t)?, &s.to_raw(), want),
            Synth::Bottom => match t {
                Term::Error => Some(Derivation::Error(want.clone())),
                Term::App(f, a) => {
                    let (v, da) = match self.synth(ctx, a)? {
                        Synth::Type(v) => (v.to_raw(), self.derive(ctx, a)?),
                        Synth::Bottom => {
                            (RawType::int(0), self.derive_at(ctx, a, &RawType::int(0))?)
                        }
                    };
                    let df = self.derive_at(ctx, f, &RawType::arrow(v, want.clone(), 0))?;
                    Some(Derivation::App(Box::new(df), Box::new(da)))
                }
                Term::Rebind(target, r) => {
                    let td = self.derive_at(ctx, target, &want.lifted(1))?;
                    let entries = self.entries(ctx, r)?;
                    Some(Derivation::Rebind(want.clone(), Box::new(td), entries))
                }
                _ => None,
            },
        }
    }
}

/// A value type below every arrow domain of `fun`.
fn value_below_domains(fun: &CanonType) -> CanonType {
    let doms = fun.atoms().iter().flat_map(|a| match a {
        CanonAtom::Arrow(d, _) => d.atoms().to_vec(),
        _ => Vec::new(),
    });
    CanonType::from_atoms(doms.chain([CanonAtom::Int(0)])).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::types::normalize;

    fn roundtrip(src: &str) {
        let t = parse_term(src).unwrap();
        let ctx = TypeCtx::empty();
        let (d, ty) = derive(&ctx, &t).unwrap_or_else(|| panic!("no derivation for {src}"));
        assert_eq!(replay(&ctx, &t, &d), Ok(ty.clone()), "{src}");
        let synthesized = crate::typeck::synth(&ctx, &t).unwrap();
        assert_eq!(Some(&normalize(&ty)), synthesized.as_type(), "{src}");
    }

    #[test]
    fn examples_have_replaying_derivations() {
        for src in [
            "3",
            "1 + 2",
            "<x:int | x + <x:int | x>>",
            "<x:int | <y:int | x + y>>",
            "\\x:int. x + <y:int | y + <z:int | z>>",
            "(\\x:int. x + <y:int | y + <z:int | z>>)[y:int := 5]",
            "(\\x:(code^0 & int^1). 2 + x[y:int := 3]) <y:int | y>",
            "<x:int, y:int | x + y>[x:int := 1, y:int := 2]",
            "<x:int | \\y:int. \\z:int. z> 3",
            "(\\y. y[x:int := 2]) <x:int | 1 + x>",
            "(\\x:int. x) error",
            "error + 1",
            "<x:int | error>",
            "\\x:int. error",
            "3[x:int := error]",
            "(\\f:(int -> int). f) (\\x:int. x) 4",
            "(\\y. y)[z:int := 8] 2",
            "(\\y. <x:int | y + x>)[z:int := 1][x:int := 2] 3",
        ] {
            roundtrip(src);
        }
    }

    #[test]
    fn tampered_derivations_fail() {
        let t = parse_term("1 + 2").unwrap();
        let d = Derivation::Sum(1, Box::new(Derivation::Num), Box::new(Derivation::Num));
        assert!(replay(&TypeCtx::empty(), &t, &d).is_err());
        let t = parse_term("<x:int | x>").unwrap();
        let d = Derivation::Unbind(Box::new(Derivation::Num));
        assert!(replay(&TypeCtx::empty(), &t, &d).is_err());
    }

    #[test]
    fn app_requires_value_type_argument() {
        let t = parse_term("(\\y:int^1. y) (1 + <x:int | x>)").unwrap();
        assert!(derive(&TypeCtx::empty(), &t).is_none());
        let arg = parse_term("1 + <x:int | x>").unwrap();
        let (da, aty) = derive(&TypeCtx::empty(), &arg).unwrap();
        assert_eq!(aty, RawType::int(1));
        let y = Ident::new("y").unwrap();
        let fd = Derivation::Abs(RawType::int(1), Box::new(Derivation::Var(y)));
        let d = Derivation::App(Box::new(fd), Box::new(da));
        let err = replay(&TypeCtx::empty(), &t, &d).unwrap_err();
        assert_eq!(err.rule, "T-App");
    }
}
