use ubr::corpus::{examples, ExpectedRun};
use ubr_core::{parse_term, run, synth, Status, Strategy, Synth, Term, TypeCtx};

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Value => "value",
        Status::Error => "error",
        Status::Stuck(_) => "stuck",
        Status::FuelExhausted => "fuel",
    }
}

fn check_run(name: &str, t: &Term, strategy: Strategy, want: &ExpectedRun) {
    let r = run(t, strategy, 100_000);
    assert_eq!(status_name(r.status), want.status, "{name} {strategy:?}");
    if let Some(fin) = &want.r#final {
        assert_eq!(
            r.final_term,
            parse_term(fin).unwrap(),
            "{name} {strategy:?}"
        );
        assert_eq!(
            &r.final_term.to_string(),
            fin,
            "{name}: final term prints differently"
        );
    }
    if let Some(rules) = &want.rules {
        let got: Vec<String> = r.trace.iter().map(|(rule, _)| rule.name()).collect();
        assert_eq!(&got, rules, "{name} {strategy:?}");
    }
}

#[test]
fn every_example_matches_its_sidecar() {
    let all = examples();
    assert_eq!(all.len(), 21);
    for e in &all {
        let t = e.term();
        let typed = synth(&TypeCtx::empty(), &t);
        let x = &e.expected;
        if let Some(ty) = &x.r#type {
            match &typed {
                Ok(Synth::Type(s)) => assert_eq!(&s.to_string(), ty, "{}", e.name),
                other => panic!("{}: {other:?}", e.name),
            }
        }
        if let Some(v) = x.value_type {
            assert_eq!(
                typed.as_ref().map(Synth::is_value_type),
                Ok(v),
                "{}",
                e.name
            );
        }
        if let Some(code) = &x.type_error {
            match &typed {
                Err(err) => assert_eq!(err.code.name(), code, "{}", e.name),
                Ok(s) => panic!("{}: expected {code}, synthesized {s}", e.name),
            }
        }
        if let Some(want) = &x.cbv {
            check_run(e.name, &t, Strategy::CallByValue, want);
        }
        if let Some(want) = &x.cbn {
            check_run(e.name, &t, Strategy::CallByName, want);
        }
    }
}

#[test]
fn every_example_has_an_expectation() {
    for e in examples() {
        let x = &e.expected;
        assert!(
            x.r#type.is_some() || x.type_error.is_some() || x.cbv.is_some() || x.cbn.is_some(),
            "{} checks nothing",
            e.name
        );
    }
}
