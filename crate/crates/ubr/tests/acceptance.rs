//! The acceptance suite. Runs every criterion in order, prints one line per
//! criterion, and fails at the end if any criterion failed.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ubr::harness::gen::{arbitrary_term, arbitrary_type, var_names, Gen, GenConfig};
use ubr::harness::props::{
    run_properties, run_regression, verdict, Property, PropertyReport, Verdict,
};
use ubr::harness::universe::{enumerate, normalization_sound, oracle_agreement, UniverseCaps};
use ubr_core::{
    parse_term, parse_type, run, synth, CanonAtom, CanonType, Status, Strategy, StuckReason, Synth,
    Term, TypeCtx, TypeErrorCode,
};

const SEED: u64 = 20_240_601;
const GENERATED: usize = 10_000;
const FUEL: usize = 100_000;

/// The rule names of the reduction relation; context rules print as `Ctx(..)`.
const RULES: &[&str] = &[
    "Sum",
    "App",
    "RebindNum",
    "RebindError",
    "RebindAbs",
    "RebindApp",
    "RebindSum",
    "RebindRebind",
    "RebindUnbindYes",
    "RebindUnbindNo",
    "CtxError",
];

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    elapsed: Duration,
    outcome: Outcome,
}

fn timed(name: &'static str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Criterion {
    let start = Instant::now();
    let outcome = f();
    Criterion {
        name,
        limit,
        elapsed: start.elapsed(),
        outcome,
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn term(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn label_ok(label: &str) -> bool {
    let mut inner = label;
    while let Some(rest) = inner.strip_prefix("Ctx(").and_then(|r| r.strip_suffix(')')) {
        inner = rest;
    }
    RULES.contains(&inner)
}

fn golden_reductions() -> Outcome {
    let cases: &[(&str, &str, Option<&[&str]>)] = &[
        (
            "<x:int | x + <x:int | x>>[x:int := 1][x:int := 2]",
            "3",
            Some(&[
                "RebindRebind",
                "RebindSum",
                "Ctx(RebindNum)",
                "Ctx(RebindUnbindYes)",
                "Sum",
            ]),
        ),
        (
            "<x:int, y:int | x + y>[x:int := 1]",
            "error",
            Some(&["RebindUnbindNo"]),
        ),
        (
            "<x:int | x + 1>[x:(int -> int) := \\y:int. y + 1]",
            "error",
            Some(&["RebindUnbindNo"]),
        ),
        (
            "(\\x. x + <x:int | x>)[x:int := 1] 2",
            "3",
            Some(&[
                "Ctx(RebindAbs)",
                "App",
                "RebindSum",
                "Ctx(RebindNum)",
                "Ctx(RebindUnbindYes)",
                "Sum",
            ]),
        ),
        (
            "((\\x:int. \\y:(code & int^1). y[x:int := x] + x) 1) <x:int | x + 2>",
            "4",
            Some(&["Ctx(App)", "App", "Ctx(RebindUnbindYes)", "Ctx(Sum)", "Sum"]),
        ),
        (
            "(\\y:(code & int^1). y[x:int := 2]) <x:int | x + 1>",
            "3",
            Some(&["App", "RebindUnbindYes", "Sum"]),
        ),
    ];
    for (src, expected, rules) in cases {
        let r = run(&term(src), Strategy::CallByValue, FUEL);
        let status = if *expected == "error" {
            Status::Error
        } else {
            Status::Value
        };
        ensure(r.status == status, || {
            format!("{src}: status {:?}", r.status)
        })?;
        ensure(r.final_term == term(expected), || {
            format!("{src}: ended at {}", r.final_term)
        })?;
        let labels: Vec<String> = r.trace.iter().map(|(rule, _)| rule.name()).collect();
        ensure(labels.iter().all(|l| label_ok(l)), || {
            format!("{src}: unknown rule in {labels:?}")
        })?;
        if let Some(rules) = rules {
            ensure(labels == *rules, || format!("{src}: rules {labels:?}"))?;
        }
    }
    Ok(format!("{} programs", cases.len()))
}

fn golden_typings() -> Outcome {
    use CanonAtom::{Code, Int};
    let inter = |atoms: Vec<CanonAtom>| CanonType::from_atoms(atoms).expect("non-empty");
    let staged = |l| inter(vec![CanonAtom::arrow(CanonType::int(0), Int(l))]);
    let cases = [
        ("<x:int | x + <x:int | x>>", inter(vec![Code(0), Int(2)])),
        (
            "<x:int | <y:int | x + y>>",
            inter(vec![Code(0), Code(1), Int(2)]),
        ),
        ("\\x:int. x + <y:int | y + <z:int | z>>", staged(2)),
        (
            "(\\x:int. x + <y:int | y + <z:int | z>>)[y:int := 5]",
            staged(1),
        ),
        (
            "(\\x:(code & int^1). 2 + x[y:int := 3]) <y:int | y>",
            CanonType::int(0),
        ),
    ];
    for (src, expected) in &cases {
        match synth(&TypeCtx::empty(), &term(src)) {
            Ok(Synth::Type(t)) if t == *expected => {}
            other => return Err(format!("{src}: got {other:?}, expected {expected}")),
        }
    }
    let src = "(\\y:int^1. y[x:int := 2]) (1 + <x:int | x>)";
    match synth(&TypeCtx::empty(), &term(src)) {
        Err(e) if e.code == TypeErrorCode::ArgumentNotValueType => {}
        other => return Err(format!("{src}: got {other:?}")),
    }
    Ok(format!("{} programs", cases.len() + 1))
}

fn strategy_contrast() -> Outcome {
    let contrast = term("(\\y. y[x:int := 2]) (1 + <x:int | x>)");
    let cbv = run(&contrast, Strategy::CallByValue, FUEL);
    ensure(matches!(cbv.status, Status::Stuck(_)), || {
        format!("cbv: {:?}", cbv.status)
    })?;
    ensure(cbv.final_term == contrast, || {
        format!("cbv stuck at {}", cbv.final_term)
    })?;
    let cbn = run(&contrast, Strategy::CallByName, FUEL);
    ensure(
        cbn.status == Status::Value && cbn.final_term == Term::Num(3),
        || format!("cbn: {:?} {}", cbn.status, cbn.final_term),
    )?;
    let agree = term("(\\y. y[x:int := 2]) <x:int | 1 + x>");
    for s in [Strategy::CallByValue, Strategy::CallByName] {
        let r = run(&agree, s, FUEL);
        ensure(
            r.status == Status::Value && r.final_term == Term::Num(3),
            || format!("{s:?}: {:?} {}", r.status, r.final_term),
        )?;
    }
    Ok(format!(
        "cbv stuck ({}), cbn 3; both 3",
        match cbv.status {
            Status::Stuck(r) => r.to_string(),
            _ => unreachable!(),
        }
    ))
}

fn property_report() -> PropertyReport {
    let mut report = run_regression();
    report.merge(run_properties(&GenConfig::with_seed(SEED), GENERATED));
    report
}

fn subject_reduction(report: &PropertyReport) -> Outcome {
    let stats = report.stats(Property::SubjectReduction);
    for f in &stats.failures {
        if f.triage.is_none() {
            return Err(format!("untriaged failure on {}: {}", f.witness, f.detail));
        }
        ensure(f.refails(), || {
            format!("witness {} does not fail again", f.witness)
        })?;
        let witness = term(&f.witness);
        let original = term(&f.original);
        ensure(witness.size() <= original.size(), || {
            format!("{} grew while shrinking", f.witness)
        })?;
        let smaller_fails = witness.subterms().into_iter().skip(1).any(|s| {
            s.is_closed()
                && synth(&TypeCtx::empty(), s).is_ok()
                && matches!(
                    verdict(Property::SubjectReduction, s, None),
                    Verdict::Fail(_)
                )
        });
        ensure(!smaller_fails, || {
            format!("{} has a failing subterm", f.witness)
        })?;
    }
    let triages: std::collections::BTreeSet<String> = stats
        .failures
        .iter()
        .filter_map(|f| f.triage)
        .map(|t| format!("{t:?}"))
        .collect();
    Ok(format!(
        "{} terms, {} steps checked, {} failures (all shrunk and triaged: {:?}), {} fuel exhausted",
        stats.cases,
        report.steps,
        stats.failures.len(),
        triages,
        report.fuel_exhausted
    ))
}

fn progress(report: &PropertyReport) -> Outcome {
    let stats = report.stats(Property::Progress);
    if let Some(f) = stats.failures.first() {
        return Err(format!(
            "uncertified stuck term {}: {}",
            f.witness, f.detail
        ));
    }
    let candidate = term("<x:int | \\y:int. \\z:int. z> 3").to_string();
    let entry = report
        .progress_audit
        .iter()
        .find(|a| a.term == candidate)
        .ok_or_else(|| "candidate missing from the audit".to_string())?;
    ensure(entry.certified(), || {
        "candidate certificate does not replay".into()
    })?;
    ensure(report.progress_audit.iter().all(|a| a.certified()), || {
        "uncertified audit entry".into()
    })?;
    ensure(
        entry.stuck_reason == StuckReason::AppNonFunction.to_string(),
        || entry.stuck_reason.clone(),
    )?;
    Ok(format!(
        "{} value-typed terms, {} certified stuck witnesses including the candidate ({})",
        stats.cases,
        report.progress_audit.len(),
        entry.synthesized
    ))
}

fn determinism(report: &PropertyReport) -> Outcome {
    let stats = report.stats(Property::Determinism);
    if let Some(f) = stats.failures.first() {
        return Err(format!(
            "{} violations, first {}: {}",
            stats.failures.len(),
            f.witness,
            f.detail
        ));
    }
    Ok(format!("{} terms, 0 violations", stats.cases))
}

fn agreement() -> Outcome {
    let r = oracle_agreement(&UniverseCaps::default());
    ensure(r.pairs >= 10_000, || format!("only {} pairs", r.pairs))?;
    ensure(r.truncated == 0, || {
        format!("{} truncated explorations", r.truncated)
    })?;
    if let Some(m) = r.mismatches.first() {
        return Err(format!(
            "{} mismatches, first {} <= {}: {}",
            r.mismatches.len(),
            m.lhs,
            m.rhs,
            m.problem
        ));
    }
    Ok(format!(
        "{} types, {} pairs, {} algorithm-true, {} oracle-proved, 0 mismatches",
        r.types, r.pairs, r.algorithm_true, r.oracle_proved
    ))
}

fn normalization() -> Outcome {
    let universe = enumerate(&UniverseCaps::default());
    let failures: Vec<String> = universe
        .iter()
        .filter_map(|t| normalization_sound(t).err())
        .collect();
    if let Some(f) = failures.first() {
        return Err(format!("{} failures, first: {f}", failures.len()));
    }
    Ok(format!("{} types", universe.len()))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let names = var_names(3);
    let mut gen = Gen::new(&GenConfig::with_seed(SEED));
    for i in 0..GENERATED {
        let t = if i % 2 == 0 {
            gen.typed_term().0
        } else {
            arbitrary_term(&mut rng, &names, 5)
        };
        let printed = t.to_string();
        match parse_term(&printed) {
            Ok(back) if back == t => {}
            other => return Err(format!("term {printed}: {other:?}")),
        }
    }
    for _ in 0..GENERATED {
        let t = arbitrary_type(&mut rng, 4, 3);
        let printed = t.to_string();
        match parse_type(&printed) {
            Ok(back) if back == t => {}
            other => return Err(format!("type {printed}: {other:?}")),
        }
    }
    Ok(format!("{GENERATED} terms, {GENERATED} types"))
}

#[test]
fn acceptance() {
    let second = Some(Duration::from_secs(1));
    let five_minutes = Some(Duration::from_secs(300));
    let mut results = vec![
        timed("1 golden reductions", second, golden_reductions),
        timed("2 golden typings", second, golden_typings),
        timed("3 cbv/cbn contrast", None, strategy_contrast),
    ];
    let start = Instant::now();
    let report = property_report();
    let shared = start.elapsed();
    for (name, f) in [
        (
            "4 subject reduction",
            subject_reduction as fn(&PropertyReport) -> Outcome,
        ),
        ("5 progress audit", progress),
        ("6 determinism", determinism),
    ] {
        let mut c = timed(name, five_minutes, || f(&report));
        c.elapsed += shared;
        results.push(c);
    }
    results.push(timed(
        "7 oracle agreement",
        Some(Duration::from_secs(120)),
        agreement,
    ));
    results.push(timed("8 normalization", None, normalization));
    results.push(timed("9 round-trip", None, round_trip));

    let mut failed = 0;
    // Written to the process stdout so the lines show without --nocapture.
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for c in &results {
        let over = c.limit.is_some_and(|l| c.elapsed > l);
        let ok = c.outcome.is_ok() && !over;
        failed += usize::from(!ok);
        let detail = match &c.outcome {
            Ok(d) if over => format!("{d}; over the {:?} limit", c.limit.unwrap()),
            Ok(d) => d.clone(),
            Err(e) => e.clone(),
        };
        writeln!(
            out,
            "{} {:<22} {:>8.2}s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.elapsed.as_secs_f64()
        )
        .unwrap();
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
