//! Executable metatheory over generated and corpus terms.

use serde::{Deserialize, Serialize};
use ubr_core::deriv::{derive, replay, Derivation};
use ubr_core::eval::applicable_rules;
use ubr_core::{
    normalize, parse_term, parse_type, run, step_cbv, synth, CanonType, Outcome, RuleName,
    RunResult, Status, Strategy, StuckReason, Synth, Term, TypeCtx,
};

use super::gen::{Gen, GenConfig};
use super::shrink::shrink;

/// Steps allowed per case before it counts as fuel-exhausted.
pub const CASE_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Generator,
    SubjectReduction,
    Progress,
    Determinism,
    CanonicalForms,
    RebindSteps,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Generator,
        Property::SubjectReduction,
        Property::Progress,
        Property::Determinism,
        Property::CanonicalForms,
        Property::RebindSteps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Generator => "generator",
            Property::SubjectReduction => "subject-reduction",
            Property::Progress => "progress",
            Property::Determinism => "determinism",
            Property::CanonicalForms => "canonical-forms",
            Property::RebindSteps => "rebind-steps",
        }
    }
}

/// A typing derivation rendered for a report, with the result of replaying it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub derivation: String,
    pub concluded: String,
    pub replayed: bool,
}

impl Certificate {
    pub fn for_term(t: &Term) -> Option<Certificate> {
        let (d, ty) = derive(&TypeCtx::empty(), t)?;
        let replayed = replay(&TypeCtx::empty(), t, &d).is_ok_and(|r| r == ty);
        Some(Certificate {
            derivation: render(&d),
            concluded: ty.to_string(),
            replayed,
        })
    }
}

fn render(d: &Derivation) -> String {
    let kids: Vec<String> = match d {
        Derivation::Var(_) | Derivation::Num | Derivation::Error(_) => Vec::new(),
        Derivation::Sum(_, a, b) | Derivation::App(a, b) | Derivation::Inter(a, b) => {
            vec![render(a), render(b)]
        }
        Derivation::Abs(_, x)
        | Derivation::Unbind0(x)
        | Derivation::Unbind(x)
        | Derivation::Sub(x, _) => {
            vec![render(x)]
        }
        Derivation::Rebind(_, t, es) => std::iter::once(render(t))
            .chain(es.iter().map(|(e, _)| render(e)))
            .collect(),
    };
    if kids.is_empty() {
        d.rule_name().to_string()
    } else {
        format!("{}({})", d.rule_name(), kids.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub property: Property,
    /// Minimized witness in concrete syntax.
    pub witness: String,
    pub original: String,
    /// Type the generator announced for the original term.
    pub announced: Option<String>,
    pub detail: String,
    pub certificate: Option<Certificate>,
    /// Rule names of the witness's call-by-value run.
    pub trace: Vec<String>,
    /// Known cause, when the witness matches one.
    pub triage: Option<Triage>,
}

/// Known causes of property failures that the checks confirm on the witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Triage {
    /// `RebindApp` pushes a rebind into an argument whose type only met the
    /// function's domain through a level-0 conjunct the rebind removes. The
    /// term before the step carries a replaying derivation.
    RebindIntoArgument,
    /// Evaluation stops at unbound code applied to a value, a term that has
    /// a replaying derivation at a value type.
    UnbindApplied,
}

impl Failure {
    /// Re-evaluates the property on the stored witness alone.
    pub fn refails(&self) -> bool {
        let Ok(t) = parse_term(&self.witness) else {
            return false;
        };
        let announced = match self.announced.as_deref().map(parse_type) {
            Some(Ok(ty)) => Some(normalize(&ty)),
            Some(Err(_)) => return false,
            None => None,
        };
        matches!(
            verdict(self.property, &t, announced.as_ref()),
            Verdict::Fail(_)
        )
    }
}

/// A value-typed term the evaluator leaves stuck.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub term: String,
    pub synthesized: String,
    pub stuck_reason: String,
    /// The value-typed trace term the run started from.
    pub source: String,
    pub certificate: Option<Certificate>,
}

impl AuditEntry {
    pub fn certified(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.replayed)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub property: String,
    pub cases: usize,
    pub passes: usize,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: Option<u64>,
    pub terms: usize,
    pub steps: usize,
    pub fuel_exhausted: usize,
    pub properties: Vec<PropertyStats>,
    pub progress_audit: Vec<AuditEntry>,
}

impl PropertyReport {
    fn new(seed: Option<u64>) -> PropertyReport {
        PropertyReport {
            seed,
            properties: Property::ALL
                .iter()
                .map(|p| PropertyStats {
                    property: p.name().to_string(),
                    ..Default::default()
                })
                .collect(),
            ..Default::default()
        }
    }

    pub fn stats(&self, p: Property) -> &PropertyStats {
        self.properties
            .iter()
            .find(|s| s.property == p.name())
            .unwrap()
    }

    fn stats_mut(&mut self, p: Property) -> &mut PropertyStats {
        self.properties
            .iter_mut()
            .find(|s| s.property == p.name())
            .unwrap()
    }

    pub fn failure_count(&self) -> usize {
        self.properties.iter().map(|s| s.failures.len()).sum()
    }

    /// Failures with no known cause.
    pub fn untriaged(&self) -> impl Iterator<Item = &Failure> {
        self.properties
            .iter()
            .flat_map(|s| &s.failures)
            .filter(|f| f.triage.is_none())
    }

    /// Appends another report's counts, failures and audit entries.
    pub fn merge(&mut self, other: PropertyReport) {
        self.terms += other.terms;
        self.steps += other.steps;
        self.fuel_exhausted += other.fuel_exhausted;
        for s in other.properties {
            let mine = self
                .properties
                .iter_mut()
                .find(|m| m.property == s.property)
                .unwrap();
            mine.cases += s.cases;
            mine.passes += s.passes;
            mine.failures.extend(s.failures);
        }
        self.progress_audit.extend(other.progress_audit);
    }

    fn add_case(&mut self, t: &Term, announced: Option<&CanonType>) {
        self.terms += 1;
        let result = run(t, Strategy::CallByValue, CASE_FUEL);
        self.steps += result.steps;
        if result.status == Status::FuelExhausted {
            self.fuel_exhausted += 1;
        }
        for p in Property::ALL {
            match verdict_on(p, t, announced, &result) {
                Verdict::Skip => {}
                Verdict::Pass => self.pass(p),
                Verdict::Audit(entry) => {
                    self.pass(p);
                    self.progress_audit.push(*entry);
                }
                Verdict::Fail(detail) => {
                    let failure = failure(p, t, announced, detail);
                    self.stats_mut(p).cases += 1;
                    self.stats_mut(p).failures.push(failure);
                }
            }
        }
    }

    fn pass(&mut self, p: Property) {
        let s = self.stats_mut(p);
        s.cases += 1;
        s.passes += 1;
    }
}

fn failure(p: Property, t: &Term, announced: Option<&CanonType>, detail: String) -> Failure {
    let witness = if p == Property::Generator {
        t.clone()
    } else {
        shrink(t, |c| matches!(verdict(p, c, None), Verdict::Fail(_)))
    };
    let detail = if witness == *t {
        detail
    } else {
        match verdict(p, &witness, None) {
            Verdict::Fail(d) => d,
            _ => detail,
        }
    };
    Failure {
        property: p,
        witness: witness.to_string(),
        original: t.to_string(),
        announced: announced
            .filter(|_| p == Property::Generator)
            .map(|g| g.to_string()),
        detail,
        certificate: Certificate::for_term(&witness),
        trace: run(&witness, Strategy::CallByValue, CASE_FUEL)
            .trace
            .iter()
            .map(|(r, _)| r.name())
            .collect(),
        triage: triage(p, &witness),
    }
}

fn triage(p: Property, w: &Term) -> Option<Triage> {
    let r = run(w, Strategy::CallByValue, CASE_FUEL);
    match p {
        Property::SubjectReduction => {
            let mut prev_term = w;
            let mut prev = synth(&TypeCtx::empty(), w).ok()?;
            for (rule, u) in &r.trace {
                match synth(&TypeCtx::empty(), u) {
                    Ok(next) if next.is_subtype_of(&prev) => {
                        prev = next;
                        prev_term = u;
                    }
                    _ => {
                        let certified =
                            Certificate::for_term(prev_term).is_some_and(|c| c.replayed);
                        return (*rule.base() == RuleName::RebindApp && certified)
                            .then_some(Triage::RebindIntoArgument);
                    }
                }
            }
            None
        }
        Property::RebindSteps => w
            .subterms()
            .into_iter()
            .find(|s| rebind_steps(s).is_err())
            .and_then(|s| stuck_on_unbind_app(&run(s, Strategy::CallByValue, CASE_FUEL))),
        Property::Progress => stuck_on_unbind_app(&r),
        _ => None,
    }
}

/// The run ends stuck on a value-typed application of unbound code to a value.
fn stuck_on_unbind_app(r: &RunResult) -> Option<Triage> {
    if r.status != Status::Stuck(StuckReason::AppNonFunction) {
        return None;
    }
    r.final_term
        .subterms()
        .into_iter()
        .any(|s| match s {
            Term::App(f, a) if matches!(**f, Term::Unbind(..)) && a.is_value() => {
                synth(&TypeCtx::empty(), s).is_ok_and(|t| t.is_value_type())
                    && Certificate::for_term(s).is_some_and(|c| c.replayed)
            }
            _ => false,
        })
        .then_some(Triage::UnbindApplied)
}

pub enum Verdict {
    Skip,
    Pass,
    Audit(Box<AuditEntry>),
    Fail(String),
}

/// Evaluates one property on a closed term.
pub fn verdict(p: Property, t: &Term, announced: Option<&CanonType>) -> Verdict {
    let result = run(t, Strategy::CallByValue, CASE_FUEL);
    verdict_on(p, t, announced, &result)
}

fn verdict_on(p: Property, t: &Term, announced: Option<&CanonType>, r: &RunResult) -> Verdict {
    let start = synth(&TypeCtx::empty(), t);
    if p == Property::Generator {
        let Some(goal) = announced else {
            return Verdict::Skip;
        };
        return match start {
            _ if !t.is_closed() => Verdict::Fail("not closed".into()),
            Err(e) => Verdict::Fail(format!("ill-typed: {e}")),
            Ok(s) if !s.is_subtype_of_type(goal) => {
                Verdict::Fail(format!("synthesized {s}, announced {goal}"))
            }
            Ok(_) => Verdict::Pass,
        };
    }
    if !t.is_closed() {
        return Verdict::Skip;
    }
    if p == Property::Determinism {
        return determinism(t, r);
    }
    let Ok(start) = start else {
        return Verdict::Skip;
    };
    let terms = || std::iter::once(t).chain(r.trace.iter().map(|(_, u)| u));
    match p {
        Property::Generator => unreachable!(),
        Property::SubjectReduction => subject_reduction(&start, r),
        Property::Progress => progress(t, &start, r),
        Property::Determinism => unreachable!(),
        Property::CanonicalForms => terms()
            .filter(|u| u.is_value())
            .find_map(|u| canonical_form(u).err())
            .map_or(Verdict::Pass, Verdict::Fail),
        Property::RebindSteps => terms()
            .flat_map(|u| u.subterms())
            .find_map(|s| rebind_steps(s).err())
            .map_or(Verdict::Pass, Verdict::Fail),
    }
}

fn subject_reduction(start: &Synth, r: &RunResult) -> Verdict {
    let mut prev = start.clone();
    for (i, (rule, u)) in r.trace.iter().enumerate() {
        match synth(&TypeCtx::empty(), u) {
            Err(e) => return Verdict::Fail(format!("step {} ({rule}) is ill-typed: {e}", i + 1)),
            Ok(next) if !next.is_subtype_of(&prev) => {
                return Verdict::Fail(format!(
                    "step {} ({rule}): {next} is not below {prev}",
                    i + 1
                ))
            }
            Ok(next) => prev = next,
        }
    }
    Verdict::Pass
}

fn progress(t: &Term, start: &Synth, r: &RunResult) -> Verdict {
    if !start.is_value_type() {
        return Verdict::Skip;
    }
    let Status::Stuck(reason) = r.status else {
        return Verdict::Pass;
    };
    let stuck = &r.final_term;
    let synthesized = match synth(&TypeCtx::empty(), stuck) {
        Ok(s) => s,
        Err(e) => return Verdict::Fail(format!("stuck term {stuck} is ill-typed: {e}")),
    };
    let entry = AuditEntry {
        term: stuck.to_string(),
        synthesized: synthesized.to_string(),
        stuck_reason: reason.to_string(),
        source: t.to_string(),
        certificate: Certificate::for_term(stuck),
    };
    if entry.certified() {
        Verdict::Audit(Box::new(entry))
    } else {
        Verdict::Fail(format!(
            "stuck ({reason}) at {stuck} without a replaying derivation"
        ))
    }
}

fn determinism(t: &Term, r: &RunResult) -> Verdict {
    let mut current = t;
    for (i, (rule, next)) in r.trace.iter().enumerate() {
        let found = applicable_rules(current);
        if found != [rule.clone()] {
            return Verdict::Fail(format!(
                "step {}: stepped by {rule}, applicable {found:?}",
                i + 1
            ));
        }
        current = next;
    }
    if r.status != Status::FuelExhausted {
        let found = applicable_rules(current);
        if !found.is_empty() {
            return Verdict::Fail(format!("terminal term {current} has applicable {found:?}"));
        }
    }
    Verdict::Pass
}

fn canonical_form(v: &Term) -> Result<(), String> {
    let Ok(Synth::Type(s)) = synth(&TypeCtx::empty(), v) else {
        return Ok(());
    };
    if s.is_subtype_of(&CanonType::int(0)) && !matches!(v, Term::Num(_)) {
        return Err(format!("value {v} of type {s} is not a numeral"));
    }
    if s.is_subtype_of(&CanonType::code(0)) && !matches!(v, Term::Unbind(..)) {
        return Err(format!("value {v} of type {s} is not unbound code"));
    }
    Ok(())
}

fn rebind_steps(s: &Term) -> Result<(), String> {
    match s {
        Term::Rebind(_, r) if r.is_value_subst() && s.is_closed() => match step_cbv(s) {
            Outcome::Stepped(..) => Ok(()),
            other => Err(format!("{s} does not step: {other:?}")),
        },
        _ => Ok(()),
    }
}

/// Runs every property on `count` generated terms.
pub fn run_properties(cfg: &GenConfig, count: usize) -> PropertyReport {
    let mut report = PropertyReport::new(Some(cfg.seed));
    let mut gen = Gen::new(cfg);
    for _ in 0..count {
        let (t, goal) = gen.typed_term();
        report.add_case(&t, Some(&goal));
    }
    report
}

/// Runs every property on the given closed terms.
pub fn run_on_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> PropertyReport {
    let mut report = PropertyReport::new(None);
    for t in terms {
        report.add_case(t, None);
    }
    report
}

/// Runs every property on the shipped regression corpus.
pub fn run_regression() -> PropertyReport {
    let terms: Vec<Term> = crate::corpus::examples().iter().map(|e| e.term()).collect();
    run_on_terms(&terms)
}
