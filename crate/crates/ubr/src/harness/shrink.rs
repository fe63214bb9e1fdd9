//! Greedy shrinking of failing terms.

use ubr_core::{synth, RawType, Term, TypeCtx, TypedSubst};

/// Shrinks `t` while `fails` keeps holding. Candidates are closed, well-typed
/// strict subterms, then the term with one node replaced by one of its
/// children or by `0`. Smallest candidates are tried first. The result has
/// no closed, well-typed strict subterm for which `fails` holds.
pub fn shrink(t: &Term, fails: impl Fn(&Term) -> bool) -> Term {
    let mut current = t.clone();
    'outer: loop {
        let mut subterms: Vec<&Term> = current
            .subterms()
            .into_iter()
            .skip(1)
            .filter(|s| s.is_closed() && synth(&TypeCtx::empty(), s).is_ok())
            .collect();
        subterms.sort_by_key(|s| s.size());
        if let Some(s) = subterms.into_iter().find(|s| fails(s)) {
            current = s.clone();
            continue;
        }
        let mut edits = edits(&current);
        edits.sort_by_key(weight);
        for e in edits {
            if weight(&e) < weight(&current) && fails(&e) {
                current = e;
                continue 'outer;
            }
        }
        return current;
    }
}

fn weight(t: &Term) -> (usize, usize, i128) {
    let numerals = t
        .subterms()
        .into_iter()
        .map(|s| match s {
            Term::Num(n) => i128::from(*n),
            _ => 0,
        })
        .sum();
    (t.size(), t.to_string().len(), numerals)
}

/// Every term obtained by one local simplification: a node replaced by a
/// child or by `0`, an unbinder or rebinder dropped, or an annotation
/// narrowed to one of its conjuncts.
fn edits(t: &Term) -> Vec<Term> {
    let mut out: Vec<Term> = t.children().into_iter().cloned().collect();
    if *t != Term::Num(0) {
        out.push(Term::Num(0));
    }
    match t {
        Term::Lam(x, Some(annot), body) => {
            for a in smaller_types(annot) {
                out.push(Term::lam(x.clone(), Some(a), (**body).clone()));
            }
        }
        Term::Unbind(ctx, body) => {
            for i in 0..ctx.len() {
                let mut entries = ctx.entries().to_vec();
                if entries.len() > 1 {
                    entries.remove(i);
                    out.push(Term::unbind(
                        TypeCtx::new(entries).unwrap(),
                        (**body).clone(),
                    ));
                }
                let (x, ty) = &ctx.entries()[i];
                for a in smaller_types(ty) {
                    let mut entries = ctx.entries().to_vec();
                    entries[i] = (x.clone(), a);
                    out.push(Term::unbind(
                        TypeCtx::new(entries).unwrap(),
                        (**body).clone(),
                    ));
                }
            }
        }
        Term::Rebind(target, r) => {
            for i in 0..r.len() {
                let mut entries = r.entries().to_vec();
                if entries.len() > 1 {
                    entries.remove(i);
                    out.push(Term::rebind(
                        (**target).clone(),
                        TypedSubst::new(entries).unwrap(),
                    ));
                }
                let (x, ty, u) = &r.entries()[i];
                for a in smaller_types(ty) {
                    let mut entries = r.entries().to_vec();
                    entries[i] = (x.clone(), a, u.clone());
                    out.push(Term::rebind(
                        (**target).clone(),
                        TypedSubst::new(entries).unwrap(),
                    ));
                }
            }
        }
        _ => {}
    }
    for (i, c) in t.children().into_iter().enumerate() {
        for e in edits(c) {
            out.push(with_child(t, i, e));
        }
    }
    out
}

/// The conjuncts of an intersection type.
fn smaller_types(t: &RawType) -> Vec<RawType> {
    match t {
        RawType::Inter(a, b) => vec![(**a).clone(), (**b).clone()],
        _ => Vec::new(),
    }
}

/// `t` with its `i`-th child (in [`Term::children`] order) replaced.
fn with_child(t: &Term, i: usize, new: Term) -> Term {
    match (t, i) {
        (Term::Sum(_, b), 0) => Term::sum(new, (**b).clone()),
        (Term::Sum(a, _), 1) => Term::sum((**a).clone(), new),
        (Term::App(_, b), 0) => Term::app(new, (**b).clone()),
        (Term::App(a, _), 1) => Term::app((**a).clone(), new),
        (Term::Lam(x, annot, _), 0) => Term::lam(x.clone(), annot.clone(), new),
        (Term::Unbind(ctx, _), 0) => Term::unbind(ctx.clone(), new),
        (Term::Rebind(_, r), 0) => Term::rebind(new, r.clone()),
        (Term::Rebind(target, r), i) => {
            let mut terms: Vec<Term> = r.entries().iter().map(|(_, _, u)| u.clone()).collect();
            terms[i - 1] = new;
            Term::rebind((**target).clone(), TypedSubst::with_terms(r, terms))
        }
        _ => unreachable!("child index {i} out of range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ubr_core::parse_term;

    #[test]
    fn shrinks_to_the_smallest_failing_subterm() {
        let t = parse_term("(\\x:int. x + 3) (4 + 5)").unwrap();
        let has_five = |s: &Term| s.subterms().contains(&&Term::Num(5));
        assert_eq!(shrink(&t, has_five), Term::Num(5));
    }

    #[test]
    fn keeps_the_term_when_nothing_smaller_fails() {
        let t = parse_term("1 + 2").unwrap();
        assert_eq!(
            shrink(&t, |s| matches!(s, Term::Sum(..))),
            parse_term("0 + 0").unwrap()
        );
        let t = parse_term("0 + 0").unwrap();
        assert_eq!(shrink(&t, |s| matches!(s, Term::Sum(..))), t);
        let t = parse_term("<x:int & code, y:int | 1>").unwrap();
        let unbind = |s: &Term| matches!(s, Term::Unbind(..));
        assert_eq!(shrink(&t, unbind), parse_term("<y:int | 0>").unwrap());
    }

    #[test]
    fn edits_reach_every_child_slot() {
        let t = parse_term("<x:int | x>[x:int := 1 + 2]").unwrap();
        let e = edits(&t);
        assert!(e.contains(&parse_term("<x:int | x>[x:int := 1]").unwrap()));
        assert!(e.contains(&parse_term("<x:int | 0>[x:int := 1 + 2]").unwrap()));
        assert!(e.contains(&parse_term("<x:int | x>").unwrap()));
    }
}
