//! Small-step reduction.
//!
//! Evaluation contexts are left implicit: each step decomposes the term by
//! recursion, left operand before right, function before argument, rebind
//! entries left to right. A redex that reduces to `error` inside a nonempty
//! context, or a literal `error` in a context hole, makes the whole term
//! `error`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Term, TypedSubst, UntypedSubst};
use crate::types::normalize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleName {
    Sum,
    App,
    RebindUnbindYes,
    RebindUnbindNo,
    RebindNum,
    RebindSum,
    RebindAbs,
    RebindApp,
    RebindRebind,
    RebindError,
    /// A rule applied inside a nonempty context. Never nested.
    Ctx(Box<RuleName>),
    CtxError,
}

impl RuleName {
    /// The rule applied at the redex, without the context wrapper.
    pub fn base(&self) -> &RuleName {
        match self {
            RuleName::Ctx(r) => r,
            r => r,
        }
    }

    fn in_context(self) -> RuleName {
        match self {
            RuleName::Ctx(_) | RuleName::CtxError => self,
            r => RuleName::Ctx(Box::new(r)),
        }
    }

    pub fn name(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::Sum => "Sum",
            RuleName::App => "App",
            RuleName::RebindUnbindYes => "RebindUnbindYes",
            RuleName::RebindUnbindNo => "RebindUnbindNo",
            RuleName::RebindNum => "RebindNum",
            RuleName::RebindSum => "RebindSum",
            RuleName::RebindAbs => "RebindAbs",
            RuleName::RebindApp => "RebindApp",
            RuleName::RebindRebind => "RebindRebind",
            RuleName::RebindError => "RebindError",
            RuleName::CtxError => "CtxError",
            RuleName::Ctx(r) => return write!(f, "Ctx({r})"),
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StuckReason {
    FreeVariable,
    AppNonFunction,
    IllFormedSum,
    RebindVariable,
    SubstUndefined,
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StuckReason::FreeVariable => "FreeVariable",
            StuckReason::AppNonFunction => "AppNonFunction",
            StuckReason::IllFormedSum => "IllFormedSum",
            StuckReason::RebindVariable => "RebindVariable",
            StuckReason::SubstUndefined => "SubstUndefined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Stepped(Term, RuleName),
    IsValue,
    IsError,
    Stuck(StuckReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    CallByValue,
    /// Arguments and rebind entries are passed unevaluated.
    CallByName,
}

pub fn step_cbv(t: &Term) -> Outcome {
    step(t, Strategy::CallByValue)
}

pub fn step_cbn(t: &Term) -> Outcome {
    step(t, Strategy::CallByName)
}

pub fn step(t: &Term, strategy: Strategy) -> Outcome {
    match t {
        Term::Error => Outcome::IsError,
        _ if t.is_value() => Outcome::IsValue,
        Term::Var(_) => Outcome::Stuck(StuckReason::FreeVariable),
        Term::Sum(a, b) => {
            if !matches!(**a, Term::Num(_)) {
                if a.is_value() {
                    return Outcome::Stuck(StuckReason::IllFormedSum);
                }
                return in_hole(a, strategy, |a| Term::Sum(Box::new(a), b.clone()));
            }
            if !matches!(**b, Term::Num(_)) {
                if b.is_value() {
                    return Outcome::Stuck(StuckReason::IllFormedSum);
                }
                return in_hole(b, strategy, |b| Term::Sum(a.clone(), Box::new(b)));
            }
            let (Term::Num(m), Term::Num(n)) = (&**a, &**b) else {
                unreachable!()
            };
            let next = m.checked_add(*n).map_or(Term::Error, Term::Num);
            Outcome::Stepped(next, RuleName::Sum)
        }
        Term::App(f, a) => {
            if !f.is_value() {
                return in_hole(f, strategy, |f| Term::App(Box::new(f), a.clone()));
            }
            if strategy == Strategy::CallByValue && !a.is_value() {
                return in_hole(a, strategy, |a| Term::App(f.clone(), Box::new(a)));
            }
            match &**f {
                Term::Lam(x, _, body) => {
                    match body.apply_subst(&UntypedSubst::single(x.clone(), (**a).clone())) {
                        Some(next) => Outcome::Stepped(next, RuleName::App),
                        None => Outcome::Stuck(StuckReason::SubstUndefined),
                    }
                }
                _ => Outcome::Stuck(StuckReason::AppNonFunction),
            }
        }
        Term::Rebind(target, r) => {
            if strategy == Strategy::CallByValue {
                if let Some(i) = r.entries().iter().position(|(_, _, u)| !u.is_value()) {
                    let entry = &r.entries()[i].2;
                    return in_hole(entry, strategy, |u| {
                        let mut terms: Vec<Term> =
                            r.entries().iter().map(|(_, _, u)| u.clone()).collect();
                        terms[i] = u;
                        Term::Rebind(target.clone(), r.with_terms(terms))
                    });
                }
            }
            rebind(target, r, strategy)
        }
        Term::Num(_) | Term::Lam(..) | Term::Unbind(..) => unreachable!("values handled above"),
    }
}

/// Steps `sub`, which sits in a context hole, and rebuilds the term.
fn in_hole(sub: &Term, strategy: Strategy, rebuild: impl FnOnce(Term) -> Term) -> Outcome {
    match step(sub, strategy) {
        Outcome::IsError | Outcome::Stepped(Term::Error, _) => {
            Outcome::Stepped(Term::Error, RuleName::CtxError)
        }
        Outcome::Stepped(next, rule) => Outcome::Stepped(rebuild(next), rule.in_context()),
        Outcome::Stuck(reason) => Outcome::Stuck(reason),
        Outcome::IsValue => unreachable!("context holes are never filled by values"),
    }
}

/// Dispatch on the target once the entries are ready.
fn rebind(target: &Term, r: &TypedSubst, strategy: Strategy) -> Outcome {
    let under = |t: &Term| Term::Rebind(Box::new(t.clone()), r.clone());
    let (rule, next) = match target {
        Term::Unbind(ctx, body) => {
            let present = ctx.entries().iter().all(|(x, ty)| {
                r.get(x)
                    .is_some_and(|(rty, _)| normalize(rty) == normalize(ty))
            });
            if !present {
                return Outcome::Stepped(Term::Error, RuleName::RebindUnbindNo);
            }
            let (_, sub) = r.parts();
            match body.apply_subst(&sub.restrict(&ctx.domain())) {
                Some(next) => (RuleName::RebindUnbindYes, next),
                None => return Outcome::Stuck(StuckReason::SubstUndefined),
            }
        }
        Term::Num(n) => (RuleName::RebindNum, Term::Num(*n)),
        Term::Sum(a, b) => (RuleName::RebindSum, Term::sum(under(a), under(b))),
        Term::Lam(x, ann, body) => (
            RuleName::RebindAbs,
            Term::lam(x.clone(), ann.clone(), under(body)),
        ),
        Term::App(a, b) => (RuleName::RebindApp, Term::app(under(a), under(b))),
        Term::Rebind(..) => match step(target, strategy) {
            Outcome::Stepped(inner, _) => (RuleName::RebindRebind, under(&inner)),
            Outcome::Stuck(reason) => return Outcome::Stuck(reason),
            Outcome::IsValue | Outcome::IsError => unreachable!("a rebind is never terminal"),
        },
        Term::Error => (RuleName::RebindError, Term::Error),
        Term::Var(_) => return Outcome::Stuck(StuckReason::RebindVariable),
    };
    Outcome::Stepped(next, rule)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Value,
    Error,
    Stuck(StuckReason),
    FuelExhausted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Value => f.write_str("value"),
            Status::Error => f.write_str("error"),
            Status::Stuck(r) => write!(f, "stuck ({r})"),
            Status::FuelExhausted => f.write_str("fuel exhausted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub final_term: Term,
    pub status: Status,
    pub steps: usize,
    /// Rule and resulting term of every step.
    pub trace: Vec<(RuleName, Term)>,
}

/// Steps until a terminal outcome or until `fuel` steps have been taken.
pub fn run(t: &Term, strategy: Strategy, fuel: usize) -> RunResult {
    let mut current = t.clone();
    let mut trace = Vec::new();
    let status = loop {
        if trace.len() >= fuel {
            break match step(&current, strategy) {
                Outcome::IsValue => Status::Value,
                Outcome::IsError => Status::Error,
                Outcome::Stuck(r) => Status::Stuck(r),
                Outcome::Stepped(..) => Status::FuelExhausted,
            };
        }
        match step(&current, strategy) {
            Outcome::Stepped(next, rule) => {
                trace.push((rule, next.clone()));
                current = next;
            }
            Outcome::IsValue => break Status::Value,
            Outcome::IsError => break Status::Error,
            Outcome::Stuck(r) => break Status::Stuck(r),
        }
    };
    RunResult {
        steps: trace.len(),
        final_term: current,
        status,
        trace,
    }
}

/// Every call-by-value rule instance applicable to `t`, found by
/// enumerating all decompositions into a context and a redex. A
/// deterministic semantics yields exactly one for non-terminal terms that
/// are not stuck, and none otherwise.
pub fn applicable_rules(t: &Term) -> Vec<RuleName> {
    let mut out = Vec::new();
    collect(t, true, &mut out);
    out
}

fn collect(t: &Term, at_root: bool, out: &mut Vec<RuleName>) {
    if !at_root && *t == Term::Error {
        out.push(RuleName::CtxError);
    }
    for (rule, to_error) in redex_rules(t) {
        out.push(match (at_root, to_error) {
            (true, _) => rule,
            (false, true) => RuleName::CtxError,
            (false, false) => RuleName::Ctx(Box::new(rule)),
        });
    }
    match t {
        Term::Sum(a, b) => {
            collect(a, false, out);
            if matches!(**a, Term::Num(_)) {
                collect(b, false, out);
            }
        }
        Term::App(f, a) => {
            collect(f, false, out);
            if f.is_value() {
                collect(a, false, out);
            }
        }
        Term::Rebind(_, r) => {
            for (_, _, u) in r.entries() {
                collect(u, false, out);
                if !u.is_value() {
                    break;
                }
            }
        }
        _ => {}
    }
}

/// Rules whose left-hand side matches `t` itself, with whether the result
/// is `error`.
fn redex_rules(t: &Term) -> Vec<(RuleName, bool)> {
    let mut out = Vec::new();
    match t {
        Term::Sum(a, b) => {
            if let (Term::Num(m), Term::Num(n)) = (&**a, &**b) {
                out.push((RuleName::Sum, m.checked_add(*n).is_none()));
            }
        }
        Term::App(f, a) => {
            if let Term::Lam(x, _, body) = &**f {
                let next = body.apply_subst(&UntypedSubst::single(x.clone(), (**a).clone()));
                if let (true, Some(next)) = (a.is_value(), next) {
                    out.push((RuleName::App, next == Term::Error));
                }
            }
        }
        Term::Rebind(target, r) if r.is_value_subst() => {
            let rules: &[(RuleName, bool)] = match &**target {
                Term::Unbind(ctx, body) => {
                    let included = ctx.entries().iter().all(|(x, ty)| {
                        r.entries()
                            .iter()
                            .any(|(y, ry, _)| x == y && normalize(ry) == normalize(ty))
                    });
                    let (_, sub) = r.parts();
                    if let (true, Some(next)) =
                        (included, body.apply_subst(&sub.restrict(&ctx.domain())))
                    {
                        out.push((RuleName::RebindUnbindYes, next == Term::Error));
                    }
                    if !included {
                        out.push((RuleName::RebindUnbindNo, true));
                    }
                    &[]
                }
                Term::Num(_) => &[(RuleName::RebindNum, false)],
                Term::Sum(..) => &[(RuleName::RebindSum, false)],
                Term::Lam(..) => &[(RuleName::RebindAbs, false)],
                Term::App(..) => &[(RuleName::RebindApp, false)],
                Term::Error => &[(RuleName::RebindError, true)],
                Term::Rebind(..) => {
                    for _ in applicable_rules(target) {
                        out.push((RuleName::RebindRebind, false));
                    }
                    &[]
                }
                Term::Var(_) => &[],
            };
            out.extend(rules.iter().cloned());
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn stepped(src: &str) -> (Term, RuleName) {
        match step_cbv(&p(src)) {
            Outcome::Stepped(t, r) => (t, r),
            other => panic!("{src}: {other:?}"),
        }
    }

    #[test]
    fn single_steps() {
        assert_eq!(
            stepped("<x:int, y:int | x + y>[x:int := 1, y:int := 2]"),
            (p("1 + 2"), RuleName::RebindUnbindYes)
        );
        assert_eq!(
            stepped("<x:int, y:int | x + y>[x:int := 1]"),
            (Term::Error, RuleName::RebindUnbindNo)
        );
        assert_eq!(
            stepped("<x:int | x + 1>[x:(int -> int) := \\y:int. y + 1]"),
            (Term::Error, RuleName::RebindUnbindNo)
        );
        assert_eq!(
            stepped("(1 + <x:int | x>)[x:int := 2]"),
            (
                p("1[x:int := 2] + <x:int | x>[x:int := 2]"),
                RuleName::RebindSum
            )
        );
    }

    #[test]
    fn cbv_ill_typed_application_is_stuck() {
        let t = p("(\\y:int^1. y[x:int := 2]) (1 + <x:int | x>)");
        assert_eq!(step_cbv(&t), Outcome::Stuck(StuckReason::IllFormedSum));
    }

    #[test]
    fn cbn_contrast() {
        let t = p("(\\y. y[x:int := 2]) (1 + <x:int | x>)");
        assert_eq!(
            step_cbn(&t),
            Outcome::Stepped(p("(1 + <x:int | x>)[x:int := 2]"), RuleName::App)
        );
        let r = run(&t, Strategy::CallByName, 100);
        assert_eq!((r.final_term, r.status), (Term::Num(3), Status::Value));
        let r = run(&t, Strategy::CallByValue, 100);
        assert_eq!(r.status, Status::Stuck(StuckReason::IllFormedSum));

        let t = p("(\\y. y[x:int := 2]) <x:int | 1 + x>");
        assert_eq!(
            step_cbn(&t),
            Outcome::Stepped(p("<x:int | 1 + x>[x:int := 2]"), RuleName::App)
        );
        for s in [Strategy::CallByValue, Strategy::CallByName] {
            let r = run(&t, s, 100);
            assert_eq!((r.final_term, r.status), (Term::Num(3), Status::Value));
        }
    }

    #[test]
    fn golden_runs() {
        for src in [
            "<x:int | x + <x:int | x>>[x:int := 1][x:int := 2]",
            "(\\x. x + <x:int | x>)[x:int := 1] 2",
            "(\\y:(code^0 & int^1). y[x:int := 2]) <x:int | x + 1>",
        ] {
            let r = run(&p(src), Strategy::CallByValue, 100);
            assert_eq!(
                (r.final_term, r.status),
                (Term::Num(3), Status::Value),
                "{src}"
            );
        }
        let r = run(
            &p("((\\x:int. \\y:(code^0 & int^1). (y[x:int := x]) + x) 1) <x:int | x + 2>"),
            Strategy::CallByValue,
            100,
        );
        assert_eq!((r.final_term, r.status), (Term::Num(4), Status::Value));
    }

    #[test]
    fn two_rebind_chain_rules() {
        let r = run(
            &p("<x:int | x + <x:int | x>>[x:int := 1][x:int := 2]"),
            Strategy::CallByValue,
            100,
        );
        let rules: Vec<String> = r.trace.iter().map(|(rule, _)| rule.name()).collect();
        assert_eq!(
            rules,
            [
                "RebindRebind",
                "RebindSum",
                "Ctx(RebindNum)",
                "Ctx(RebindUnbindYes)",
                "Sum"
            ]
        );
        assert_eq!(r.trace[0].1, p("(1 + <x:int | x>)[x:int := 2]"));
    }

    #[test]
    fn terminal_and_stuck() {
        assert_eq!(step_cbv(&p("<x:int | x + <x:int | x>>")), Outcome::IsValue);
        assert_eq!(step_cbv(&Term::Error), Outcome::IsError);
        assert_eq!(step_cbv(&p("x")), Outcome::Stuck(StuckReason::FreeVariable));
        assert_eq!(
            step_cbv(&p("x[y:int := 1]")),
            Outcome::Stuck(StuckReason::RebindVariable)
        );
        assert_eq!(
            step_cbv(&p("3 4")),
            Outcome::Stuck(StuckReason::AppNonFunction)
        );
        assert_eq!(
            step_cbv(&p("<y:int | 1>[y:(int -> int) := \\z:int. x]")),
            Outcome::Stepped(Term::Error, RuleName::RebindUnbindNo)
        );
        assert_eq!(
            step_cbv(&p("<x:int | y>[y:(int -> int) := \\z:int. x]")),
            Outcome::Stepped(Term::Error, RuleName::RebindUnbindNo)
        );
        assert_eq!(
            step_cbv(&p("(\\y. <x:int | y>) (\\z. x)")),
            Outcome::Stuck(StuckReason::SubstUndefined)
        );
        assert_eq!(
            step_cbv(&p("<x:int | \\y:int. \\z:int. z> 3")),
            Outcome::Stuck(StuckReason::AppNonFunction)
        );
    }

    #[test]
    fn errors_propagate() {
        assert_eq!(
            step_cbv(&p("error + 1")),
            Outcome::Stepped(Term::Error, RuleName::CtxError)
        );
        assert_eq!(
            step_cbv(&p("1 + <x:int | x>[y:int := 1]")),
            Outcome::Stepped(Term::Error, RuleName::CtxError)
        );
        assert_eq!(
            step_cbv(&p("error[x:int := 1]")),
            Outcome::Stepped(Term::Error, RuleName::RebindError)
        );
        let max = alloc::format!("{} + 1", i64::MAX);
        assert_eq!(
            step_cbv(&p(&max)),
            Outcome::Stepped(Term::Error, RuleName::Sum)
        );
    }

    #[test]
    fn entries_step_left_to_right() {
        let (t, r) = stepped("0[x:int := 1 + 1, y:int := 2 + 2]");
        assert_eq!(t, p("0[x:int := 2, y:int := 2 + 2]"));
        assert_eq!(r, RuleName::Ctx(Box::new(RuleName::Sum)));
        assert_eq!(
            applicable_rules(&p("0[x:int := 1 + 1, y:int := 2 + 2]")).len(),
            1
        );
    }

    #[test]
    fn fuel() {
        let r = run(&p("1 + 2 + 3"), Strategy::CallByValue, 1);
        assert_eq!((r.status, r.steps), (Status::FuelExhausted, 1));
        let r = run(&p("1 + 2 + 3"), Strategy::CallByValue, 2);
        assert_eq!((r.status, r.steps), (Status::Value, 2));
    }

    #[test]
    fn applicability_agrees_with_step() {
        for src in [
            "<x:int | x + <x:int | x>>[x:int := 1][x:int := 2]",
            "(\\x. x + <x:int | x>)[x:int := 1] 2",
            "((\\x:int. \\y:(code^0 & int^1). (y[x:int := x]) + x) 1) <x:int | x + 2>",
            "<x:int, y:int | x + y>[x:int := 1]",
            "(1 + error) + 2",
            "(\\x. error) 0 0",
            "(<x:int | error>[x:int := 1]) + 1",
        ] {
            let mut t = p(src);
            loop {
                let rules = applicable_rules(&t);
                match step_cbv(&t) {
                    Outcome::Stepped(next, rule) => {
                        assert_eq!(rules, [rule], "{t}");
                        t = next;
                    }
                    _ => {
                        assert!(rules.is_empty(), "{t}");
                        break;
                    }
                }
            }
        }
    }
}
