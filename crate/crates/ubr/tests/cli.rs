use std::path::PathBuf;
use std::process::Command;

use ubr::cli::run_cli;
use ubr::json::{Diagnostic, RunSummary, TraceEntry};

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn ubr(args: &[&str]) -> Output {
    ubr_with_input(args, "")
}

fn ubr_with_input(args: &[&str], input: &str) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut input = input.as_bytes();
    let argv = std::iter::once("ubr").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err, &mut input);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn example(name: &str) -> String {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "examples",
        &format!("{name}.ubr"),
    ]
    .iter()
    .collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn two_rebinds_traces_to_three() {
    let o = ubr(&["run", &example("two_rebinds"), "--trace"]);
    assert_eq!(o.code, 0, "{}", o.err);
    let rules: Vec<&str> = o
        .out
        .lines()
        .filter(|l| l.starts_with("->"))
        .filter_map(|l| l.rsplit_once('[').map(|(_, r)| r.trim_end_matches(']')))
        .collect();
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
    assert_eq!(o.out.lines().last(), Some("3"));
}

#[test]
fn ill_typed_argument_is_rejected_with_a_located_diagnostic() {
    let o = ubr(&["check", &example("cbv_ill_typed")]);
    assert_eq!(o.code, 6);
    assert!(o.err.contains("error[ArgumentNotValueType]"), "{}", o.err);

    let o = ubr(&["check", &example("cbv_ill_typed"), "--json"]);
    assert_eq!(o.code, 6);
    let d: Diagnostic = serde_json::from_str(o.err.trim()).unwrap();
    assert_eq!(d.code, "ArgumentNotValueType");
    let src = std::fs::read_to_string(example("cbv_ill_typed")).unwrap();
    assert_eq!(&src[d.span.start..d.span.end], "(1 + <x:int | x>)");
}

#[test]
fn missing_rebinder_evaluates_to_error() {
    let o = ubr(&["run", &example("missing_rebinder")]);
    assert_eq!(o.code, 2);
    assert_eq!(o.out.trim(), "error");
}

#[test]
fn strategies_differ_on_the_contrast_example() {
    let cbv = ubr(&["run", &example("strategy_contrast")]);
    assert_eq!(cbv.code, 3);
    assert!(cbv.err.starts_with("stuck"));
    let cbn = ubr(&["run", &example("strategy_contrast"), "--strategy", "cbn"]);
    assert_eq!(cbn.code, 0);
    assert_eq!(cbn.out.trim(), "3");
}

#[test]
fn fuel_exhaustion_has_its_own_exit_code() {
    let o = ubr(&["run", &example("two_rebinds"), "--fuel", "2"]);
    assert_eq!(o.code, 4);
}

#[test]
fn json_trace_is_deterministic_and_well_formed() {
    let args = ["run", &example("two_rebinds"), "--json"];
    let a = ubr(&args);
    let b = ubr(&args);
    assert_eq!(a.out, b.out);
    let lines: Vec<&str> = a.out.lines().collect();
    for (i, l) in lines[..lines.len() - 1].iter().enumerate() {
        let e: TraceEntry = serde_json::from_str(l).unwrap();
        assert_eq!(e.step, i + 1);
    }
    let s: RunSummary = serde_json::from_str(lines[lines.len() - 1]).unwrap();
    assert_eq!(
        s,
        RunSummary {
            status: "value".into(),
            steps: 5,
            term: "3".into()
        }
    );
}

#[test]
fn parse_errors_exit_five() {
    let o = ubr(&["type", "(1 +"]);
    assert_eq!(o.code, 5);
    assert!(o.err.contains("error[ParseError]"));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.ubr");
    std::fs::write(&f, "<x:int | x").unwrap();
    assert_eq!(ubr(&["check", f.to_str().unwrap()]).code, 5);
    assert_eq!(ubr(&["run", f.to_str().unwrap()]).code, 5);
}

#[test]
fn type_prints_the_canonical_type() {
    let o = ubr(&["type", "<x:int | <y:code | x>>"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.trim(), "code^0 & code^1 & int^2");
}

#[test]
fn check_reports_value_types() {
    let o = ubr(&["check", &example("stuck_candidate")]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out, "type: int -> int^1\nvalue type: yes\n");
}

#[test]
fn missing_file_and_bad_usage() {
    assert_eq!(ubr(&["check", "/nonexistent/x.ubr"]).code, 74);
    assert_eq!(ubr(&["frobnicate"]).code, 64);
    assert_eq!(ubr(&["--help"]).code, 0);
}

#[test]
fn repl_continues_incomplete_input() {
    let o = ubr_with_input(
        &["repl"],
        "1 +\n2\n:type <x:int | x>\n:strategy cbn\n(\\y. y[x:int := 2]) (1 + <x:int | x>)\n:quit\n",
    );
    assert_eq!(o.code, 0);
    assert!(o.out.contains("type: int^0\n3\n"), "{}", o.out);
    assert!(o.out.contains("code^0 & int^1"));
    assert!(o.out.ends_with("3\nubr> "), "{}", o.out);
}

#[test]
fn fuzz_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = ubr(&[
        "fuzz",
        "--seed",
        "7",
        "--count",
        "50",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.err);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(o.out.contains("subject-reduction"));
}

#[test]
fn binary_exit_code_matches() {
    let st = Command::new(env!("CARGO_BIN_EXE_ubr"))
        .args(["run", &example("missing_rebinder")])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&st.stdout).trim(), "error");
}

#[test]
fn equal_seeds_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let o = ubr(&[
            "fuzz",
            "--seed",
            "3",
            "--count",
            "150",
            "--report",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.code, 0, "{}", o.err);
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let other = dir.path().join("c.json");
    ubr(&[
        "fuzz",
        "--seed",
        "4",
        "--count",
        "150",
        "--report",
        other.to_str().unwrap(),
    ]);
    assert_ne!(a, std::fs::read(&other).unwrap());
}
