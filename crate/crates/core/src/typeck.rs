//! Bidirectional type checking over canonical types.
//!
//! `error` synthesizes [`Synth::Bottom`], which is below every type. Binder
//! names introduced inside the term (lambda binders and unbinders) shadow
//! earlier ones; an unbinder may not reuse a name of the context the check
//! was started in.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Ident, RawType, Term, TypeCtx, TypedSubst};
use crate::types::{normalize, CanonAtom, CanonType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeErrorCode {
    UnboundVariable,
    NotAnInt,
    NotAFunction,
    ArgumentNotValueType,
    RebindTargetLevelZero,
    SubstEntryIllTyped,
    UnbinderClash,
    AnnotationRequired,
    CheckFailed,
}

impl TypeErrorCode {
    pub fn name(self) -> &'static str {
        match self {
            TypeErrorCode::UnboundVariable => "UnboundVariable",
            TypeErrorCode::NotAnInt => "NotAnInt",
            TypeErrorCode::NotAFunction => "NotAFunction",
            TypeErrorCode::ArgumentNotValueType => "ArgumentNotValueType",
            TypeErrorCode::RebindTargetLevelZero => "RebindTargetLevelZero",
            TypeErrorCode::SubstEntryIllTyped => "SubstEntryIllTyped",
            TypeErrorCode::UnbinderClash => "UnbinderClash",
            TypeErrorCode::AnnotationRequired => "AnnotationRequired",
            TypeErrorCode::CheckFailed => "CheckFailed",
        }
    }
}

impl fmt::Display for TypeErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A type error located by a path of [`Term::children`] indices from the
/// checked term down to the offending node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub code: TypeErrorCode,
    pub path: Vec<usize>,
    pub message: String,
}

impl TypeError {
    fn new(code: TypeErrorCode, message: String) -> TypeError {
        TypeError {
            code,
            path: Vec::new(),
            message,
        }
    }

    fn under(mut self, child: usize) -> TypeError {
        self.path.insert(0, child);
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Result of synthesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Synth {
    /// Only `error` and terms that can only reduce to it.
    Bottom,
    Type(CanonType),
}

impl Synth {
    pub fn as_type(&self) -> Option<&CanonType> {
        match self {
            Synth::Bottom => None,
            Synth::Type(t) => Some(t),
        }
    }

    pub fn is_subtype_of(&self, other: &Synth) -> bool {
        match (self, other) {
            (Synth::Bottom, _) => true,
            (Synth::Type(_), Synth::Bottom) => false,
            (Synth::Type(s), Synth::Type(t)) => s.is_subtype_of(t),
        }
    }

    pub fn is_subtype_of_type(&self, t: &CanonType) -> bool {
        match self {
            Synth::Bottom => true,
            Synth::Type(s) => s.is_subtype_of(t),
        }
    }

    /// Bottom counts as a value type: it is below every type.
    pub fn is_value_type(&self) -> bool {
        self.as_type().is_none_or(CanonType::is_value_type)
    }
}

impl fmt::Display for Synth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Synth::Bottom => f.write_str("bottom"),
            Synth::Type(t) => write!(f, "{t}"),
        }
    }
}

type TResult<T> = Result<T, TypeError>;

struct Checker {
    /// Names of the starting context; unbinders may not reuse them.
    root: BTreeSet<Ident>,
}

pub fn synth(ctx: &TypeCtx, t: &Term) -> TResult<Synth> {
    Checker { root: ctx.domain() }.synth(ctx, t)
}

/// Synthesizes and expects a proper type (not bottom).
pub fn synth_type(ctx: &TypeCtx, t: &Term) -> TResult<Option<CanonType>> {
    synth(ctx, t).map(|s| s.as_type().cloned())
}

/// Synthesis inside a term whose check started from a context with domain
/// `root`.
pub(crate) fn synth_rooted(root: &BTreeSet<Ident>, ctx: &TypeCtx, t: &Term) -> TResult<Synth> {
    Checker { root: root.clone() }.synth(ctx, t)
}

pub(crate) fn extend_ctx(ctx: &TypeCtx, entries: &TypeCtx) -> TypeCtx {
    extend(ctx, entries)
}

pub fn check(ctx: &TypeCtx, t: &Term, ty: &CanonType) -> TResult<()> {
    Checker { root: ctx.domain() }.check(ctx, t, ty)
}

/// Checks every entry of `r`. Error paths index the entries from 1, as in
/// [`Term::children`] of the enclosing rebind.
pub fn check_subst_ok(ctx: &TypeCtx, r: &TypedSubst) -> TResult<()> {
    Checker { root: ctx.domain() }.subst_ok(ctx, r)
}

fn extend(ctx: &TypeCtx, entries: &TypeCtx) -> TypeCtx {
    entries
        .entries()
        .iter()
        .fold(ctx.clone(), |c, (x, t)| c.update(x.clone(), t.clone()))
}

/// Strictly lowers the leaf level by one; `None` at level 0.
fn lower(a: &CanonAtom) -> Option<CanonAtom> {
    match a {
        CanonAtom::Int(0) | CanonAtom::Code(0) => None,
        CanonAtom::Int(l) => Some(CanonAtom::Int(l - 1)),
        CanonAtom::Code(l) => Some(CanonAtom::Code(l - 1)),
        CanonAtom::Arrow(d, c) => lower(c).map(|c| CanonAtom::arrow(d.clone(), c)),
    }
}

impl Checker {
    fn clash(&self, ctx: &TypeCtx) -> TResult<()> {
        match ctx.entries().iter().find(|(x, _)| self.root.contains(x)) {
            Some((x, _)) => Err(TypeError::new(
                TypeErrorCode::UnbinderClash,
                format!("unbinder `{x}` is already bound in the context"),
            )),
            None => Ok(()),
        }
    }

    fn synth(&self, ctx: &TypeCtx, t: &Term) -> TResult<Synth> {
        match t {
            Term::Var(x) => match ctx.get(x) {
                Some(ty) => Ok(Synth::Type(normalize(ty))),
                None => Err(TypeError::new(
                    TypeErrorCode::UnboundVariable,
                    format!("variable `{x}` is not bound"),
                )),
            },
            Term::Num(_) => Ok(Synth::Type(CanonType::int(0))),
            Term::Error => Ok(Synth::Bottom),
            Term::Sum(a, b) => {
                let mut level = 0;
                for (i, operand) in [a, b].into_iter().enumerate() {
                    if let Synth::Type(s) = self.synth(ctx, operand).map_err(|e| e.under(i))? {
                        match s.min_int_level() {
                            Some(l) => level = level.max(l),
                            None => {
                                return Err(TypeError::new(
                                    TypeErrorCode::NotAnInt,
                                    format!(
                                        "operand of `+` has type {s}, which has no int conjunct"
                                    ),
                                )
                                .under(i))
                            }
                        }
                    }
                }
                Ok(Synth::Type(CanonType::int(level)))
            }
            Term::Lam(x, Some(annot), body) => {
                let inner = ctx.update(x.clone(), annot.clone());
                let dom = normalize(annot);
                match self.synth(&inner, body).map_err(|e| e.under(0))? {
                    Synth::Type(cod) => Ok(Synth::Type(arrows(&dom, &cod))),
                    // A body that can only fail may be given any codomain.
                    Synth::Bottom => Ok(Synth::Type(arrows(&dom, &CanonType::int(0)))),
                }
            }
            Term::Lam(x, None, _) => Err(TypeError::new(
                TypeErrorCode::AnnotationRequired,
                format!("cannot synthesize a type for `\\{x}` without an annotation"),
            )),
            Term::App(f, a) => self.synth_app(ctx, f, a),
            Term::Unbind(entries, body) => {
                self.clash(entries)?;
                let inner = extend(ctx, entries);
                let code = CanonType::code(0);
                match self.synth(&inner, body).map_err(|e| e.under(0))? {
                    Synth::Type(s) => Ok(Synth::Type(code.union(&s.lift(1)))),
                    Synth::Bottom => Ok(Synth::Type(code)),
                }
            }
            Term::Rebind(target, r) => {
                let s = self.synth(ctx, target).map_err(|e| e.under(0))?;
                self.subst_ok(ctx, r)?;
                rebound(s)
            }
        }
    }

    /// Synthesis for a chain of rebinds around an unannotated lambda whose
    /// binder takes `dom`.
    fn synth_bare_fn(&self, ctx: &TypeCtx, f: &Term, dom: &CanonType) -> TResult<Synth> {
        match f {
            Term::Lam(x, None, body) => {
                let inner = ctx.update(x.clone(), dom.to_raw());
                match self.synth(&inner, body).map_err(|e| e.under(0))? {
                    Synth::Type(cod) => Ok(Synth::Type(arrows(dom, &cod))),
                    Synth::Bottom => Ok(Synth::Type(arrows(dom, &CanonType::int(0)))),
                }
            }
            Term::Rebind(target, r) => {
                let s = self
                    .synth_bare_fn(ctx, target, dom)
                    .map_err(|e| e.under(0))?;
                self.subst_ok(ctx, r)?;
                rebound(s)
            }
            _ => self.synth(ctx, f),
        }
    }

    fn synth_app(&self, ctx: &TypeCtx, f: &Term, a: &Term) -> TResult<Synth> {
        if let Term::Lam(x, None, body) = f {
            let v = match self.synth(ctx, a).map_err(|e| e.under(1))? {
                Synth::Bottom => {
                    let inner = ctx.update(x.clone(), RawType::int(0));
                    self.synth(&inner, body).map_err(|e| e.under(0).under(0))?;
                    return Ok(Synth::Bottom);
                }
                Synth::Type(v) => v,
            };
            if !v.is_value_type() {
                return Err(not_value_type(&v));
            }
            let inner = ctx.update(x.clone(), v.to_raw());
            return self.synth(&inner, body).map_err(|e| e.under(0).under(0));
        }
        if is_bare_fn(f) {
            let v = match self.synth(ctx, a).map_err(|e| e.under(1))? {
                Synth::Bottom => {
                    self.synth_bare_fn(ctx, f, &CanonType::int(0))
                        .map_err(|e| e.under(0))?;
                    return Ok(Synth::Bottom);
                }
                Synth::Type(v) => v,
            };
            if !v.is_value_type() {
                return Err(not_value_type(&v));
            }
            let fun = self.synth_bare_fn(ctx, f, &v).map_err(|e| e.under(0))?;
            return apply(fun, Synth::Type(v));
        }
        let fun = self.synth(ctx, f).map_err(|e| e.under(0))?;
        let arg = self.synth(ctx, a).map_err(|e| e.under(1))?;
        if let Synth::Type(v) = &arg {
            if !v.is_value_type() {
                return Err(not_value_type(v));
            }
        }
        apply(fun, arg)
    }

    fn subst_ok(&self, ctx: &TypeCtx, r: &TypedSubst) -> TResult<()> {
        for (i, (x, ty, u)) in r.entries().iter().enumerate() {
            let s = self.synth(ctx, u).map_err(|e| e.under(i + 1))?;
            let want = normalize(ty);
            let ok = match &s {
                Synth::Bottom => true,
                Synth::Type(v) => v.is_value_type() && v.is_subtype_of(&want),
            };
            if !ok {
                return Err(TypeError::new(
                    TypeErrorCode::SubstEntryIllTyped,
                    format!("rebinder `{x}` has type {s}, expected a value type below {want}"),
                )
                .under(i + 1));
            }
        }
        Ok(())
    }

    fn check(&self, ctx: &TypeCtx, t: &Term, ty: &CanonType) -> TResult<()> {
        match t {
            Term::Error => Ok(()),
            Term::Lam(x, annot, body) => {
                let dom_annot = annot.as_ref().map(normalize);
                for atom in ty.atoms() {
                    let CanonAtom::Arrow(d, c) = atom else {
                        return Err(check_failed(ty, "a function has only arrow types"));
                    };
                    let bound = match (annot, &dom_annot) {
                        (Some(a), Some(da)) => {
                            if !d.is_subtype_of(da) {
                                return Err(check_failed(
                                    ty,
                                    "the binder annotation is too narrow",
                                ));
                            }
                            a.clone()
                        }
                        _ => d.to_raw(),
                    };
                    let inner = ctx.update(x.clone(), bound);
                    self.check(&inner, body, &CanonType::single((**c).clone()))
                        .map_err(|e| e.under(0))?;
                }
                Ok(())
            }
            Term::Unbind(entries, body) => {
                self.clash(entries)?;
                let mut lowered = Vec::new();
                for atom in ty.atoms() {
                    if *atom == CanonAtom::Code(0) {
                        continue;
                    }
                    match lower(atom) {
                        Some(a) => lowered.push(a),
                        None => return Err(check_failed(ty, "unbound code is never at level 0")),
                    }
                }
                match CanonType::from_atoms(lowered) {
                    Some(want) => {
                        let inner = extend(ctx, entries);
                        self.check(&inner, body, &want).map_err(|e| e.under(0))
                    }
                    None => self
                        .synth(&extend(ctx, entries), body)
                        .map(|_| ())
                        .map_err(|e| e.under(0)),
                }
            }
            Term::Rebind(target, r) => {
                self.check(ctx, target, &ty.lift(1))
                    .map_err(|e| e.under(0))?;
                self.subst_ok(ctx, r)
            }
            Term::Sum(a, b) => {
                let level = ty
                    .atoms()
                    .iter()
                    .map(|atom| match atom {
                        CanonAtom::Int(l) => Some(*l),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
                    .and_then(|ls| ls.into_iter().min());
                let Some(level) = level else {
                    return Err(check_failed(ty, "a sum has only int types"));
                };
                let want = CanonType::int(level);
                self.check(ctx, a, &want).map_err(|e| e.under(0))?;
                self.check(ctx, b, &want).map_err(|e| e.under(1))
            }
            _ => {
                let s = self.synth(ctx, t)?;
                if s.is_subtype_of_type(ty) {
                    Ok(())
                } else {
                    Err(check_failed(ty, &format!("its type is {s}")))
                }
            }
        }
    }
}

/// `{D → c | c ∈ cod}`
/// A function type applied to an argument type: the codomains of every arrow
/// accepting the argument.
fn apply(fun: Synth, arg: Synth) -> TResult<Synth> {
    let fun = match fun {
        Synth::Bottom => return Ok(Synth::Bottom),
        Synth::Type(fun) => fun,
    };
    let codomains = fun.atoms().iter().filter_map(|atom| match atom {
        CanonAtom::Arrow(d, c) if arg.is_subtype_of_type(d) => Some((**c).clone()),
        _ => None,
    });
    match CanonType::from_atoms(codomains) {
        Some(r) => Ok(Synth::Type(r)),
        None => Err(TypeError::new(
            TypeErrorCode::NotAFunction,
            format!("no arrow of {fun} accepts an argument of type {arg}"),
        )),
    }
}

/// Type of a rebind whose target has type `s`.
fn rebound(s: Synth) -> TResult<Synth> {
    match s {
        Synth::Bottom => Ok(Synth::Bottom),
        Synth::Type(s) => match s.decrement() {
            Some(d) => Ok(Synth::Type(d)),
            None => Err(TypeError::new(
                TypeErrorCode::RebindTargetLevelZero,
                format!("rebound term has type {s}, which needs no further rebind"),
            )
            .under(0)),
        },
    }
}

/// An unannotated lambda under zero or more rebinds.
pub(crate) fn is_bare_fn(f: &Term) -> bool {
    match f {
        Term::Lam(_, None, _) => true,
        Term::Rebind(t, _) => is_bare_fn(t),
        _ => false,
    }
}

fn arrows(dom: &CanonType, cod: &CanonType) -> CanonType {
    CanonType::from_atoms(
        cod.atoms()
            .iter()
            .map(|c| CanonAtom::arrow(dom.clone(), c.clone())),
    )
    .expect("nonempty")
}

fn not_value_type(v: &CanonType) -> TypeError {
    TypeError::new(
        TypeErrorCode::ArgumentNotValueType,
        format!("argument has type {v}, which is not a value type"),
    )
    .under(1)
}

fn check_failed(ty: &CanonType, why: &str) -> TypeError {
    TypeError::new(
        TypeErrorCode::CheckFailed,
        format!("term does not have type {ty}: {why}"),
    )
}
