//! Bounded declarative proof search for `S ≤ T`.
//!
//! The search walks single rewrite steps from `S`: any congruence clause in
//! either direction, int lifting and intersection elimination at covariant
//! positions, and their duals at contravariant positions (arrow domains).
//! Every step carries a certificate, so a found path is replayable. Failing
//! to reach `T` within the bounds is not a refutation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::cert::{EqCert, SubtypeCert};
use crate::syntax::{Level, PrimKind, RawType};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBounds {
    /// Maximum number of rewrite steps.
    pub depth: usize,
    /// Maximum number of primitive nodes in any intermediate type.
    pub max_size: usize,
    /// Maximum level anywhere in an intermediate type.
    pub max_level: Level,
    /// Hard cap on explored types.
    pub max_states: usize,
}

pub const DEFAULT_DEPTH: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Proved(SubtypeCert),
    NotWithinBound,
}

impl OracleOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, OracleOutcome::Proved(_))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

fn max_level(t: &RawType) -> Level {
    match t {
        RawType::Prim(PrimKind::Arrow(d, c), l) => (*l).max(max_level(d)).max(max_level(c)),
        RawType::Prim(_, l) => *l,
        RawType::Inter(a, b) => max_level(a).max(max_level(b)),
    }
}

/// Every primitive subterm of `t`.
pub fn prim_subterms(t: &RawType, out: &mut BTreeSet<RawType>) {
    match t {
        RawType::Inter(a, b) => {
            prim_subterms(a, out);
            prim_subterms(b, out);
        }
        RawType::Prim(kind, _) => {
            out.insert(t.clone());
            if let PrimKind::Arrow(d, c) = kind {
                prim_subterms(d, out);
                prim_subterms(c, out);
            }
        }
    }
}

fn lower(t: &RawType) -> Option<RawType> {
    match t {
        RawType::Prim(kind, l) if *l > 0 => Some(RawType::Prim(kind.clone(), l - 1)),
        RawType::Prim(..) => None,
        RawType::Inter(a, b) => Some(RawType::inter(lower(a)?, lower(b)?)),
    }
}

struct Stepper<'a> {
    pool: &'a [RawType],
    max_level: Level,
    certs: bool,
    /// Growth in size still allowed to the whole type; larger rewrites are
    /// not generated.
    room: usize,
}

type Step = (RawType, Option<SubtypeCert>);

impl Stepper<'_> {
    fn eq(&self, pol: Polarity, out: &mut Vec<Step>, new: RawType, e: impl FnOnce() -> EqCert) {
        let cert = self.certs.then(|| {
            let e = e();
            match pol {
                Polarity::Pos => SubtypeCert::Equiv(e),
                Polarity::Neg => SubtypeCert::Equiv(EqCert::Sym(alloc::boxed::Box::new(e))),
            }
        });
        out.push((new, cert));
    }

    fn local(&self, t: &RawType, pol: Polarity, out: &mut Vec<Step>) {
        use RawType as R;
        if let R::Inter(a, b) = t {
            self.eq(pol, out, R::inter((**b).clone(), (**a).clone()), || {
                EqCert::Comm((**a).clone(), (**b).clone())
            });
            if let R::Inter(b1, b2) = &**b {
                let new = R::inter(R::inter((**a).clone(), (**b1).clone()), (**b2).clone());
                self.eq(pol, out, new, || {
                    EqCert::Assoc((**a).clone(), (**b1).clone(), (**b2).clone())
                });
            }
            if let R::Inter(a1, a2) = &**a {
                let new = R::inter((**a1).clone(), R::inter((**a2).clone(), (**b).clone()));
                self.eq(pol, out, new, || {
                    EqCert::Sym(alloc::boxed::Box::new(EqCert::Assoc(
                        (**a1).clone(),
                        (**a2).clone(),
                        (**b).clone(),
                    )))
                });
            }
            if a == b {
                self.eq(pol, out, (**a).clone(), || {
                    EqCert::Sym(alloc::boxed::Box::new(EqCert::Idem((**a).clone())))
                });
            }
            if let (R::Prim(PrimKind::Arrow(d1, c1), l1), R::Prim(PrimKind::Arrow(d2, c2), l2)) =
                (&**a, &**b)
            {
                if d1 == d2 && l1 == l2 {
                    let new = R::arrow(
                        (**d1).clone(),
                        R::inter((**c1).clone(), (**c2).clone()),
                        *l1,
                    );
                    self.eq(pol, out, new, || EqCert::Dist {
                        dom: (**d1).clone(),
                        left: (**c1).clone(),
                        right: (**c2).clone(),
                        level: *l1,
                    });
                }
            }
        }
        if t.size() <= self.room {
            self.eq(pol, out, R::inter(t.clone(), t.clone()), || {
                EqCert::Idem(t.clone())
            });
        }
        if let R::Prim(PrimKind::Arrow(d, c), l) = t {
            if let (R::Inter(c1, c2), true) = (&**c, d.size() <= self.room) {
                let new = R::inter(
                    R::arrow((**d).clone(), (**c1).clone(), *l),
                    R::arrow((**d).clone(), (**c2).clone(), *l),
                );
                self.eq(pol, out, new, || {
                    EqCert::Sym(alloc::boxed::Box::new(EqCert::Dist {
                        dom: (**d).clone(),
                        left: (**c1).clone(),
                        right: (**c2).clone(),
                        level: *l,
                    }))
                });
            }
            if *l > 0 {
                let new = R::arrow((**d).clone(), c.lifted(1), l - 1);
                self.eq(pol, out, new, || EqCert::Shift {
                    dom: (**d).clone(),
                    cod: (**c).clone(),
                    level: l - 1,
                });
            }
            if *l < self.max_level {
                if let Some(lc) = lower(c) {
                    let new = R::arrow((**d).clone(), lc.clone(), l + 1);
                    self.eq(pol, out, new, || {
                        EqCert::Sym(alloc::boxed::Box::new(EqCert::Shift {
                            dom: (**d).clone(),
                            cod: lc,
                            level: *l,
                        }))
                    });
                }
            }
        }
        match pol {
            Polarity::Pos => {
                if let R::Prim(PrimKind::Int, l) = t {
                    if *l < self.max_level {
                        out.push((
                            R::int(l + 1),
                            self.certs.then_some(SubtypeCert::IntLift(*l)),
                        ));
                    }
                }
                if let R::Inter(a, b) = t {
                    let cert = self
                        .certs
                        .then(|| SubtypeCert::InterElim((**a).clone(), (**b).clone()));
                    out.push(((**a).clone(), cert));
                }
            }
            Polarity::Neg => {
                if let R::Prim(PrimKind::Int, l) = t {
                    if *l > 0 {
                        out.push((
                            R::int(l - 1),
                            self.certs.then(|| SubtypeCert::IntLift(l - 1)),
                        ));
                    }
                }
                for y in self.pool.iter().filter(|y| y.size() <= self.room) {
                    let cert = self
                        .certs
                        .then(|| SubtypeCert::InterElim(t.clone(), y.clone()));
                    out.push((R::inter(t.clone(), y.clone()), cert));
                }
            }
        }
    }

    /// All one-step rewrites of `t` at polarity `pol`. With certificates on,
    /// each certificate proves `t ≤ new` (Pos) or `new ≤ t` (Neg).
    fn steps(&self, t: &RawType, pol: Polarity) -> Vec<Step> {
        use RawType as R;
        let mut out = Vec::new();
        self.local(t, pol, &mut out);
        match t {
            R::Inter(a, b) => {
                for (a2, c) in self.steps(a, pol) {
                    let cert = c.map(|c| {
                        SubtypeCert::Inter(
                            alloc::boxed::Box::new(c),
                            alloc::boxed::Box::new(SubtypeCert::refl((**b).clone())),
                        )
                    });
                    out.push((R::inter(a2, (**b).clone()), cert));
                }
                for (b2, c) in self.steps(b, pol) {
                    let cert = c.map(|c| {
                        SubtypeCert::Inter(
                            alloc::boxed::Box::new(SubtypeCert::refl((**a).clone())),
                            alloc::boxed::Box::new(c),
                        )
                    });
                    out.push((R::inter((**a).clone(), b2), cert));
                }
            }
            R::Prim(PrimKind::Arrow(d, c), l) => {
                for (d2, cert) in self.steps(d, pol.flip()) {
                    let cert = cert.map(|p| {
                        SubtypeCert::Arrow(
                            alloc::boxed::Box::new(p),
                            alloc::boxed::Box::new(SubtypeCert::refl((**c).clone())),
                            *l,
                        )
                    });
                    out.push((R::arrow(d2, (**c).clone(), *l), cert));
                }
                for (c2, cert) in self.steps(c, pol) {
                    let cert = cert.map(|p| {
                        SubtypeCert::Arrow(
                            alloc::boxed::Box::new(SubtypeCert::refl((**d).clone())),
                            alloc::boxed::Box::new(p),
                            *l,
                        )
                    });
                    out.push((R::arrow((**d).clone(), c2, *l), cert));
                }
            }
            R::Prim(..) => {}
        }
        out
    }
}

/// Breadth-first exploration of everything reachable from a source type.
pub struct Exploration {
    source: RawType,
    pool: Vec<RawType>,
    bounds: OracleBounds,
    // (type, parent index)
    states: Vec<(RawType, usize)>,
    index: BTreeMap<RawType, usize>,
    truncated: bool,
}

impl Exploration {
    /// Explores from `source`. When `stop_at` is reached the search halts early.
    pub fn run(
        source: &RawType,
        pool: Vec<RawType>,
        bounds: OracleBounds,
        stop_at: Option<&RawType>,
    ) -> Exploration {
        let mut ex = Exploration {
            source: source.clone(),
            pool,
            bounds,
            states: alloc::vec![(source.clone(), 0)],
            index: BTreeMap::new(),
            truncated: false,
        };
        ex.index.insert(source.clone(), 0);
        if stop_at == Some(source) {
            return ex;
        }
        let mut stepper = Stepper {
            pool: &ex.pool,
            max_level: bounds.max_level,
            certs: false,
            room: 0,
        };
        let mut frontier = alloc::vec![0usize];
        'outer: for _ in 0..bounds.depth {
            let mut next = Vec::new();
            for &i in &frontier {
                let cur = ex.states[i].0.clone();
                stepper.room = bounds.max_size.saturating_sub(cur.size());
                for (t, _) in stepper.steps(&cur, Polarity::Pos) {
                    if t.size() > bounds.max_size
                        || max_level(&t) > bounds.max_level
                        || ex.index.contains_key(&t)
                    {
                        continue;
                    }
                    if ex.states.len() >= bounds.max_states {
                        ex.truncated = true;
                        break 'outer;
                    }
                    let id = ex.states.len();
                    ex.index.insert(t.clone(), id);
                    let found = stop_at == Some(&t);
                    ex.states.push((t, i));
                    next.push(id);
                    if found {
                        break 'outer;
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        ex
    }

    pub fn source(&self) -> &RawType {
        &self.source
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Whether the state cap cut the search short.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn reaches(&self, target: &RawType) -> bool {
        self.index.contains_key(target)
    }

    /// Certificate for `source ≤ target` along the discovered path.
    pub fn prove(&self, target: &RawType) -> Option<SubtypeCert> {
        let mut at = *self.index.get(target)?;
        let mut path = alloc::vec![at];
        while at != 0 {
            at = self.states[at].1;
            path.push(at);
        }
        path.reverse();
        let stepper = Stepper {
            pool: &self.pool,
            max_level: self.bounds.max_level,
            certs: true,
            room: usize::MAX,
        };
        let mut cert = SubtypeCert::refl(self.source.clone());
        for w in path.windows(2) {
            let (from, to) = (&self.states[w[0]].0, &self.states[w[1]].0);
            let step = stepper
                .steps(from, Polarity::Pos)
                .into_iter()
                .find(|(t, _)| t == to)
                .and_then(|(_, c)| c)
                .expect("recorded step is reproducible");
            cert = if w[0] == 0 {
                step
            } else {
                SubtypeCert::trans(cert, step)
            };
        }
        Some(cert)
    }
}

/// Bounds used by [`oracle_subtype`]: sizes up to two beyond the larger
/// input, levels up to one beyond the largest input level.
pub fn default_bounds(s: &RawType, t: &RawType, depth: usize) -> OracleBounds {
    OracleBounds {
        depth,
        max_size: s.size().max(t.size()) + 2,
        max_level: max_level(s).max(max_level(t)) + 1,
        max_states: 200_000,
    }
}

/// Bounded search for a declarative derivation of `s ≤ t`.
pub fn oracle_subtype(s: &RawType, t: &RawType, depth: usize) -> OracleOutcome {
    let mut pool = BTreeSet::new();
    prim_subterms(s, &mut pool);
    prim_subterms(t, &mut pool);
    let ex = Exploration::run(
        s,
        pool.into_iter().collect(),
        default_bounds(s, t, depth),
        Some(t),
    );
    match ex.prove(t) {
        Some(c) => OracleOutcome::Proved(c),
        None => OracleOutcome::NotWithinBound,
    }
}
