use std::collections::BTreeSet;

use proptest::prelude::*;
use ubr_core::eval::applicable_rules;
use ubr_core::parse::parse_term_spanned;
use ubr_core::{
    check, normalize, parse_term, step_cbv, synth, Ident, Outcome, RawType, Synth, Term, TypeCtx,
    TypeErrorCode, TypedSubst, UntypedSubst,
};

fn name() -> impl Strategy<Value = Ident> {
    prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(|s| Ident::new(s).unwrap())
}

fn small_type() -> impl Strategy<Value = RawType> {
    let leaf = prop_oneof![
        3 => (0u32..=2).prop_map(RawType::int),
        1 => (0u32..=2).prop_map(RawType::code),
    ];
    leaf.prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0u32..=1).prop_map(|(d, c, l)| RawType::arrow(d, c, l)),
            (inner.clone(), inner).prop_map(|(a, b)| RawType::inter(a, b)),
        ]
    })
}

fn ctx() -> impl Strategy<Value = TypeCtx> {
    prop::collection::btree_map(name(), small_type(), 1..=2)
        .prop_map(|m| TypeCtx::new(m.into_iter().collect()).unwrap())
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name().prop_map(Term::Var),
        (0i64..5).prop_map(Term::Num),
        Just(Term::Error),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let entries = prop::collection::btree_map(name(), (small_type(), inner.clone()), 1..=2);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)),
            (
                name(),
                prop::option::weighted(0.7, small_type()),
                inner.clone()
            )
                .prop_map(|(x, a, b)| Term::lam(x, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (ctx(), inner.clone()).prop_map(|(g, b)| Term::unbind(g, b)),
            (inner, entries).prop_map(|(t, m)| {
                let r = m.into_iter().map(|(x, (ty, u))| (x, ty, u)).collect();
                Term::rebind(t, TypedSubst::new(r).unwrap())
            }),
        ]
    })
}

fn closed_term() -> impl Strategy<Value = Term> {
    term().prop_filter("closed", Term::is_closed)
}

fn subst() -> impl Strategy<Value = UntypedSubst> {
    prop::collection::btree_map(name(), term(), 0..=2)
        .prop_map(|m| UntypedSubst::new(m.into_iter().collect()).unwrap())
}

fn closed_subst() -> impl Strategy<Value = UntypedSubst> {
    prop::collection::btree_map(name(), closed_term(), 0..=2)
        .prop_map(|m| UntypedSubst::new(m.into_iter().collect()).unwrap())
}

fn subst_free_vars(s: &UntypedSubst) -> BTreeSet<Ident> {
    s.entries()
        .iter()
        .flat_map(|(_, t)| t.free_vars())
        .collect()
}

/// Every unbinder name in `t`, in order of appearance.
fn unbinders(t: &Term) -> Vec<Ident> {
    t.subterms()
        .into_iter()
        .filter_map(|s| match s {
            Term::Unbind(g, _) => Some(g.entries().iter().map(|(x, _)| x.clone())),
            _ => None,
        })
        .flatten()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn empty_substitution_is_identity(t in term()) {
        prop_assert_eq!(t.apply_subst(&UntypedSubst::empty()), Some(t));
    }

    #[test]
    fn closed_substitution_is_total(t in term(), s in closed_subst()) {
        prop_assert!(t.apply_subst(&s).is_some());
    }

    #[test]
    fn substitution_bounds_free_variables(t in term(), s in subst()) {
        if let Some(u) = t.apply_subst(&s) {
            let mut allowed: BTreeSet<Ident> =
                t.free_vars().difference(&s.domain()).cloned().collect();
            allowed.extend(subst_free_vars(&s));
            prop_assert!(u.free_vars().is_subset(&allowed), "{} -> {}", t, u);
        }
    }

    #[test]
    fn substitution_never_renames_unbinders(t in term(), s in subst()) {
        if let Some(u) = t.apply_subst(&s) {
            let before = unbinders(&t);
            let after = unbinders(&u);
            // Unbinders of t survive in order; substituted terms may add more.
            let mut it = after.iter();
            prop_assert!(before.iter().all(|x| it.any(|y| y == x)), "{} -> {}", t, u);
        }
    }

    #[test]
    fn subst_parts_recompose(
        entries in prop::collection::btree_map(name(), (small_type(), term()), 0..=3)
    ) {
        let r = TypedSubst::new(entries.into_iter().map(|(x, (ty, t))| (x, ty, t)).collect()).unwrap();
        let (g, s) = r.parts();
        let names: Vec<&Ident> = g.entries().iter().map(|(x, _)| x).collect();
        let names2: Vec<&Ident> = s.entries().iter().map(|(x, _)| x).collect();
        prop_assert_eq!(names, names2);
        prop_assert_eq!(TypedSubst::from_parts(&g, &s), Some(r));
    }

    #[test]
    fn restrict_and_remove_partition(s in subst(), keep in prop::collection::btree_set(name(), 0..=3)) {
        let kept = s.restrict(&keep);
        let dropped = s.remove(&keep);
        prop_assert!(kept.domain().is_subset(&keep));
        prop_assert!(dropped.domain().is_disjoint(&keep));
        prop_assert_eq!(kept.len() + dropped.len(), s.len());
    }

    #[test]
    fn typed_terms_mention_only_context_names(g in ctx(), t in term()) {
        if synth(&g, &t).is_ok() {
            prop_assert!(t.free_vars().is_subset(&g.domain()), "{}", t);
        }
    }

    #[test]
    fn synthesized_types_check(g in ctx(), t in term()) {
        if let Ok(Synth::Type(s)) = synth(&g, &t) {
            prop_assert_eq!(check(&g, &t, &s), Ok(()));
        }
    }

    #[test]
    fn checking_is_closed_under_subsumption(g in ctx(), t in term(), ty in small_type()) {
        if let Ok(Synth::Type(s)) = synth(&g, &t) {
            let target = normalize(&ty);
            if s.is_subtype_of(&target) {
                prop_assert_eq!(check(&g, &t, &target), Ok(()));
            }
        }
    }

    #[test]
    fn error_checks_against_anything(g in ctx(), ty in small_type()) {
        prop_assert_eq!(check(&g, &Term::Error, &normalize(&ty)), Ok(()));
    }

    #[test]
    fn capture_through_an_unbinder_is_rejected(ty in small_type()) {
        let t = Term::app(
            Term::lam(
                Ident::new("y").unwrap(),
                Some(ty),
                parse_term("<x:int | y>").unwrap(),
            ),
            parse_term("\\z:int. x").unwrap(),
        );
        prop_assert!(synth(&TypeCtx::empty(), &t).is_err());
    }

    #[test]
    fn steps_preserve_closedness(t in closed_term()) {
        if let Outcome::Stepped(u, _) = step_cbv(&t) {
            prop_assert!(u.is_closed(), "{} -> {}", t, u);
        }
    }

    #[test]
    fn values_and_error_are_terminal(t in closed_term()) {
        let out = step_cbv(&t);
        if t.is_value() {
            prop_assert_eq!(out, Outcome::IsValue);
        } else if t == Term::Error {
            prop_assert_eq!(out, Outcome::IsError);
        }
    }

    #[test]
    fn at_most_one_rule_applies(t in closed_term()) {
        let rules = applicable_rules(&t);
        match step_cbv(&t) {
            Outcome::Stepped(_, rule) => prop_assert_eq!(rules, vec![rule]),
            _ => prop_assert!(rules.is_empty(), "{}: {:?}", t, rules),
        }
    }

    #[test]
    fn parse_inverts_print(t in term()) {
        prop_assert_eq!(parse_term(&t.to_string()), Ok(t));
    }

    #[test]
    fn parse_inverts_print_on_types(ty in small_type()) {
        prop_assert_eq!(ubr_core::parse_type(&ty.to_string()), Ok(ty));
    }

    #[test]
    fn parsing_is_deterministic(src in "[ a-z0-9<>|:.\\\\+()\\[\\]=&^,-]{0,24}") {
        let a = parse_term_spanned(&src);
        let b = parse_term_spanned(&src);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        match (a, b) {
            (Ok((t1, _)), Ok((t2, _))) => prop_assert_eq!(t1, t2),
            (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
            _ => unreachable!(),
        }
    }
}

#[test]
fn capture_example_reports_the_escaping_variable() {
    let t = parse_term("(\\y:code. <x:int | y>) (\\z:int. x)").unwrap();
    let e = synth(&TypeCtx::empty(), &t).unwrap_err();
    assert_eq!(e.code, TypeErrorCode::UnboundVariable);
}
