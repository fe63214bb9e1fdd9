//! Terms, raw types, contexts and substitutions.
//!
//! Substitution is partial: it refuses to go under a lambda or an unbind
//! whose binder would capture a free variable of the substituted terms.
//! Nothing is ever alpha-renamed.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Rebind/unbind nesting level.
pub type Level = u32;

const RESERVED: [&str; 3] = ["error", "int", "code"];

/// A variable name: `[a-zA-Z][a-zA-Z0-9_]*`, not a reserved word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidIdent(pub String);

impl fmt::Display for InvalidIdent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid identifier `{}`", self.0)
    }
}

impl Ident {
    pub fn new(name: &str) -> Result<Ident, InvalidIdent> {
        let mut chars = name.chars();
        let ok_head = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic());
        let ok_tail = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok_head && ok_tail && !RESERVED.contains(&name) {
            Ok(Ident(String::from(name)))
        } else {
            Err(InvalidIdent(String::from(name)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shape of a primitive type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimKind {
    Int,
    Code,
    Arrow(Box<RawType>, Box<RawType>),
}

/// Types as written: level-decorated primitives and binary intersections.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RawType {
    Prim(PrimKind, Level),
    Inter(Box<RawType>, Box<RawType>),
}

impl RawType {
    pub fn int(level: Level) -> RawType {
        RawType::Prim(PrimKind::Int, level)
    }

    pub fn code(level: Level) -> RawType {
        RawType::Prim(PrimKind::Code, level)
    }

    pub fn arrow(dom: RawType, cod: RawType, level: Level) -> RawType {
        RawType::Prim(PrimKind::Arrow(Box::new(dom), Box::new(cod)), level)
    }

    pub fn inter(left: RawType, right: RawType) -> RawType {
        RawType::Inter(Box::new(left), Box::new(right))
    }

    /// `T↑k`: adds `k` to the outer level of every conjunct.
    pub fn lifted(&self, k: Level) -> RawType {
        match self {
            RawType::Prim(kind, l) => RawType::Prim(kind.clone(), l.saturating_add(k)),
            RawType::Inter(a, b) => RawType::inter(a.lifted(k), b.lifted(k)),
        }
    }

    /// Top-level conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&RawType> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a RawType, out: &mut Vec<&'a RawType>) {
            match t {
                RawType::Inter(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                p => out.push(p),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Value type in the raw grammar: some conjunct sits at level 0.
    pub fn is_value_type(&self) -> bool {
        self.conjuncts()
            .iter()
            .any(|c| matches!(c, RawType::Prim(_, 0)))
    }

    /// Number of primitive nodes, counting nested ones.
    pub fn size(&self) -> usize {
        match self {
            RawType::Prim(PrimKind::Arrow(d, c), _) => 1 + d.size() + c.size(),
            RawType::Prim(_, _) => 1,
            RawType::Inter(a, b) => a.size() + b.size(),
        }
    }

    /// Nesting depth of primitive constructors (`int` is 1).
    pub fn depth(&self) -> usize {
        match self {
            RawType::Prim(PrimKind::Arrow(d, c), _) => 1 + d.depth().max(c.depth()),
            RawType::Prim(_, _) => 1,
            RawType::Inter(a, b) => a.depth().max(b.depth()),
        }
    }
}

/// Raised when a context or substitution would bind a name twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuplicateName(pub Ident);

impl fmt::Display for DuplicateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is bound twice", self.0)
    }
}

fn check_distinct<'a>(names: impl Iterator<Item = &'a Ident>) -> Result<(), DuplicateName> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// A type context: source-ordered, duplicate-free. Equality ignores order.
#[derive(Clone, Debug, Default)]
pub struct TypeCtx {
    entries: Vec<(Ident, RawType)>,
}

impl TypeCtx {
    pub fn new(entries: Vec<(Ident, RawType)>) -> Result<TypeCtx, DuplicateName> {
        check_distinct(entries.iter().map(|(x, _)| x))?;
        Ok(TypeCtx { entries })
    }

    pub fn empty() -> TypeCtx {
        TypeCtx::default()
    }

    pub fn entries(&self) -> &[(Ident, RawType)] {
        &self.entries
    }

    pub fn get(&self, x: &Ident) -> Option<&RawType> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &Ident) -> bool {
        self.get(x).is_some()
    }

    pub fn domain(&self) -> BTreeSet<Ident> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Γ[x:T]`: binds `x`, replacing an earlier binding of the same name.
    pub fn update(&self, x: Ident, ty: RawType) -> TypeCtx {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .filter(|(y, _)| *y != x)
            .cloned()
            .collect();
        entries.push((x, ty));
        TypeCtx { entries }
    }
}

impl PartialEq for TypeCtx {
    fn eq(&self, other: &TypeCtx) -> bool {
        self.len() == other.len() && self.entries.iter().all(|(x, t)| other.get(x) == Some(t))
    }
}

impl Eq for TypeCtx {}

/// A typed substitution `x1:T1 := t1, ...`. Equality ignores order.
#[derive(Clone, Debug, Default)]
pub struct TypedSubst {
    entries: Vec<(Ident, RawType, Term)>,
}

impl TypedSubst {
    pub fn new(entries: Vec<(Ident, RawType, Term)>) -> Result<TypedSubst, DuplicateName> {
        check_distinct(entries.iter().map(|(x, _, _)| x))?;
        Ok(TypedSubst { entries })
    }

    pub fn empty() -> TypedSubst {
        TypedSubst::default()
    }

    pub fn entries(&self) -> &[(Ident, RawType, Term)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: &Ident) -> Option<(&RawType, &Term)> {
        self.entries
            .iter()
            .find(|(y, _, _)| y == x)
            .map(|(_, t, v)| (t, v))
    }

    /// Same names and annotations, new terms (in order).
    pub fn with_terms(&self, terms: Vec<Term>) -> TypedSubst {
        debug_assert_eq!(terms.len(), self.entries.len());
        TypedSubst {
            entries: self
                .entries
                .iter()
                .zip(terms)
                .map(|((x, ty, _), t)| (x.clone(), ty.clone(), t))
                .collect(),
        }
    }

    /// A value substitution: every mapped term is a value.
    pub fn is_value_subst(&self) -> bool {
        self.entries.iter().all(|(_, _, t)| t.is_value())
    }

    /// The type context and the untyped substitution carried by `self`.
    pub fn parts(&self) -> (TypeCtx, UntypedSubst) {
        let ctx = TypeCtx {
            entries: self
                .entries
                .iter()
                .map(|(x, t, _)| (x.clone(), t.clone()))
                .collect(),
        };
        let sub = UntypedSubst {
            entries: self
                .entries
                .iter()
                .map(|(x, _, v)| (x.clone(), v.clone()))
                .collect(),
        };
        (ctx, sub)
    }

    /// Inverse of [`TypedSubst::parts`]; `None` when the domains differ.
    pub fn from_parts(ctx: &TypeCtx, sub: &UntypedSubst) -> Option<TypedSubst> {
        if ctx.len() != sub.len() {
            return None;
        }
        let entries = ctx
            .entries()
            .iter()
            .zip(sub.entries())
            .map(|((x, ty), (y, t))| (x == y).then(|| (x.clone(), ty.clone(), t.clone())))
            .collect::<Option<Vec<_>>>()?;
        Some(TypedSubst { entries })
    }
}

impl PartialEq for TypedSubst {
    fn eq(&self, other: &TypedSubst) -> bool {
        self.len() == other.len()
            && self
                .entries
                .iter()
                .all(|(x, ty, t)| other.get(x) == Some((ty, t)))
    }
}

impl Eq for TypedSubst {}

/// An untyped substitution `x1 ↦ t1, ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UntypedSubst {
    entries: Vec<(Ident, Term)>,
}

impl UntypedSubst {
    pub fn new(entries: Vec<(Ident, Term)>) -> Result<UntypedSubst, DuplicateName> {
        check_distinct(entries.iter().map(|(x, _)| x))?;
        Ok(UntypedSubst { entries })
    }

    pub fn empty() -> UntypedSubst {
        UntypedSubst::default()
    }

    pub fn single(x: Ident, t: Term) -> UntypedSubst {
        UntypedSubst {
            entries: alloc::vec![(x, t)],
        }
    }

    pub fn entries(&self) -> &[(Ident, Term)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: &Ident) -> Option<&Term> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn domain(&self) -> BTreeSet<Ident> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    /// Keeps only the entries whose name is in `names`.
    pub fn restrict(&self, names: &BTreeSet<Ident>) -> UntypedSubst {
        UntypedSubst {
            entries: self
                .entries
                .iter()
                .filter(|(x, _)| names.contains(x))
                .cloned()
                .collect(),
        }
    }

    /// Drops the entries whose name is in `names`.
    pub fn remove(&self, names: &BTreeSet<Ident>) -> UntypedSubst {
        UntypedSubst {
            entries: self
                .entries
                .iter()
                .filter(|(x, _)| !names.contains(x))
                .cloned()
                .collect(),
        }
    }

    /// Union of the free variables of the mapped terms.
    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        for (_, t) in &self.entries {
            t.collect_free(&mut BTreeSet::new(), &mut out);
        }
        out
    }
}

/// Abstract syntax of the calculus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(Ident),
    Num(i64),
    Sum(Box<Term>, Box<Term>),
    /// Lambda with an optional binder annotation.
    Lam(Ident, Option<RawType>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Unbind(TypeCtx, Box<Term>),
    Rebind(Box<Term>, TypedSubst),
    Error,
}

impl Term {
    pub fn var(x: Ident) -> Term {
        Term::Var(x)
    }

    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }

    pub fn lam(x: Ident, annot: Option<RawType>, body: Term) -> Term {
        Term::Lam(x, annot, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn unbind(ctx: TypeCtx, body: Term) -> Term {
        Term::Unbind(ctx, Box::new(body))
    }

    pub fn rebind(t: Term, r: TypedSubst) -> Term {
        Term::Rebind(Box::new(t), r)
    }

    /// `v ::= λx.t | ⟨Γ|t⟩ | n`
    pub fn is_value(&self) -> bool {
        matches!(self, Term::Lam(..) | Term::Unbind(..) | Term::Num(_))
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<Ident>, out: &mut BTreeSet<Ident>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Num(_) | Term::Error => {}
            Term::Sum(a, b) | Term::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Lam(x, _, body) => with_bound(bound, core::iter::once(x), |bound| {
                body.collect_free(bound, out)
            }),
            Term::Unbind(ctx, body) => {
                with_bound(bound, ctx.entries().iter().map(|(x, _)| x), |bound| {
                    body.collect_free(bound, out)
                })
            }
            Term::Rebind(t, r) => {
                t.collect_free(bound, out);
                for (_, _, u) in r.entries() {
                    u.collect_free(bound, out);
                }
            }
        }
    }

    /// Immediate subterms in a fixed order: sum/app operands left to right,
    /// binder bodies, rebind target followed by the substitution terms.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Num(_) | Term::Error => Vec::new(),
            Term::Sum(a, b) | Term::App(a, b) => alloc::vec![&**a, &**b],
            Term::Lam(_, _, b) | Term::Unbind(_, b) => alloc::vec![&**b],
            Term::Rebind(t, r) => {
                let mut v = alloc::vec![&**t];
                v.extend(r.entries().iter().map(|(_, _, u)| u));
                v
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Every subterm in pre-order, including `self`.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            let mut cs = t.children();
            cs.reverse();
            stack.extend(cs);
        }
        out
    }

    /// Applies `s`, or `None` when a binder or unbinder would capture one of
    /// the free variables of `s`.
    pub fn apply_subst(&self, s: &UntypedSubst) -> Option<Term> {
        if s.is_empty() {
            return Some(self.clone());
        }
        let fv = s.free_vars();
        self.subst_with(s, &fv)
    }

    fn subst_with(&self, s: &UntypedSubst, fv: &BTreeSet<Ident>) -> Option<Term> {
        Some(match self {
            Term::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Num(_) | Term::Error => self.clone(),
            Term::Sum(a, b) => Term::sum(a.subst_with(s, fv)?, b.subst_with(s, fv)?),
            Term::App(a, b) => Term::app(a.subst_with(s, fv)?, b.subst_with(s, fv)?),
            Term::Lam(x, ann, body) => {
                if fv.contains(x) {
                    return None;
                }
                let names = BTreeSet::from([x.clone()]);
                let inner = s.remove(&names);
                Term::lam(x.clone(), ann.clone(), body.subst_narrowed(&inner)?)
            }
            Term::Unbind(ctx, body) => {
                if ctx.entries().iter().any(|(x, _)| fv.contains(x)) {
                    return None;
                }
                let inner = s.remove(&ctx.domain());
                Term::unbind(ctx.clone(), body.subst_narrowed(&inner)?)
            }
            Term::Rebind(t, r) => {
                let terms = r
                    .entries()
                    .iter()
                    .map(|(_, _, u)| u.subst_with(s, fv))
                    .collect::<Option<Vec<_>>>()?;
                Term::rebind(t.subst_with(s, fv)?, r.with_terms(terms))
            }
        })
    }

    // The side conditions test the substitution that reaches the binder,
    // i.e. after outer binders have removed their own names.
    fn subst_narrowed(&self, s: &UntypedSubst) -> Option<Term> {
        if s.is_empty() {
            return Some(self.clone());
        }
        let fv = s.free_vars();
        self.subst_with(s, &fv)
    }
}

fn with_bound<'a, R>(
    bound: &mut BTreeSet<Ident>,
    names: impl Iterator<Item = &'a Ident>,
    f: impl FnOnce(&mut BTreeSet<Ident>) -> R,
) -> R {
    let added: Vec<Ident> = names
        .filter(|x| bound.insert((*x).clone()))
        .cloned()
        .collect();
    let r = f(bound);
    for x in added {
        bound.remove(&x);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn id(s: &str) -> Ident {
        Ident::new(s).unwrap()
    }

    fn v(s: &str) -> Term {
        Term::Var(id(s))
    }

    fn ub(names: &[&str], body: Term) -> Term {
        let ctx = TypeCtx::new(names.iter().map(|n| (id(n), RawType::int(0))).collect()).unwrap();
        Term::unbind(ctx, body)
    }

    #[test]
    fn ident_rules() {
        assert!(Ident::new("x_1").is_ok());
        assert!(Ident::new("1x").is_err());
        assert!(Ident::new("").is_err());
        assert!(Ident::new("code").is_err());
        assert!(Ident::new("error").is_err());
    }

    #[test]
    fn free_vars_examples() {
        let t = Term::lam(id("x"), None, Term::sum(v("x"), ub(&["x"], v("x"))));
        assert!(t.free_vars().is_empty());
        assert_eq!(ub(&["x"], v("y")).free_vars(), BTreeSet::from([id("y")]));
        let r = TypedSubst::new(vec![(id("x"), RawType::int(0), v("z"))]).unwrap();
        assert_eq!(
            Term::rebind(v("y"), r).free_vars(),
            BTreeSet::from([id("y"), id("z")])
        );
    }

    #[test]
    fn substitution_under_unbinder_is_refused_on_capture() {
        let t = ub(&["x"], v("y"));
        let s = UntypedSubst::single(id("y"), Term::lam(id("z"), None, v("x")));
        assert_eq!(t.apply_subst(&s), None);
        let s = UntypedSubst::single(id("y"), Term::Num(2));
        assert_eq!(t.apply_subst(&s), Some(ub(&["x"], Term::Num(2))));
    }

    #[test]
    fn substitution_stops_at_binders_of_the_same_name() {
        // x + (\x. x + y) + <x:int | x + y>
        let body = Term::sum(
            Term::sum(v("x"), Term::lam(id("x"), None, Term::sum(v("x"), v("y")))),
            ub(&["x"], Term::sum(v("x"), v("y"))),
        );
        let s = UntypedSubst::new(vec![(id("x"), Term::Num(2)), (id("y"), Term::Num(3))]).unwrap();
        let expected = Term::sum(
            Term::sum(
                Term::Num(2),
                Term::lam(id("x"), None, Term::sum(v("x"), Term::Num(3))),
            ),
            ub(&["x"], Term::sum(v("x"), Term::Num(3))),
        );
        assert_eq!(body.apply_subst(&s), Some(expected));
    }

    #[test]
    fn lambda_capture_is_refused() {
        let t = Term::lam(id("x"), None, v("y"));
        let s = UntypedSubst::single(id("y"), v("x"));
        assert_eq!(t.apply_subst(&s), None);
    }

    #[test]
    fn values() {
        assert!(ub(&["x"], Term::sum(v("x"), ub(&["x"], v("x")))).is_value());
        assert!(!Term::sum(Term::Num(1), Term::Num(2)).is_value());
        assert!(!Term::Error.is_value());
    }

    #[test]
    fn parts_and_restriction() {
        let r = TypedSubst::new(vec![
            (id("x"), RawType::int(0), Term::Num(1)),
            (id("y"), RawType::int(0), Term::Num(2)),
        ])
        .unwrap();
        let (ctx, s) = r.parts();
        assert_eq!(ctx.domain(), BTreeSet::from([id("x"), id("y")]));
        assert_eq!(s.get(&id("y")), Some(&Term::Num(2)));
        assert_eq!(TypedSubst::from_parts(&ctx, &s), Some(r));
        let (c0, s0) = TypedSubst::empty().parts();
        assert!(c0.is_empty() && s0.is_empty());

        let only_x = s.restrict(&BTreeSet::from([id("x")]));
        assert_eq!(only_x.entries(), &[(id("x"), Term::Num(1))]);
        assert!(s.restrict(&BTreeSet::new()).is_empty());
        assert_eq!(s.restrict(&BTreeSet::from([id("x"), id("y"), id("z")])), s);
        assert_eq!(
            s.remove(&BTreeSet::from([id("x")])).entries(),
            &[(id("y"), Term::Num(2))]
        );
    }

    #[test]
    fn duplicates_rejected() {
        assert!(TypeCtx::new(vec![
            (id("x"), RawType::int(0)),
            (id("x"), RawType::code(0))
        ])
        .is_err());
    }

    #[test]
    fn context_equality_ignores_order() {
        let a = TypeCtx::new(vec![
            (id("x"), RawType::int(0)),
            (id("y"), RawType::code(0)),
        ])
        .unwrap();
        let b = TypeCtx::new(vec![
            (id("y"), RawType::code(0)),
            (id("x"), RawType::int(0)),
        ])
        .unwrap();
        assert_eq!(a, b);
    }
}
