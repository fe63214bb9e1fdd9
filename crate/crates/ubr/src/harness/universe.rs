//! Agreement between the algorithmic subtype check and the bounded
//! declarative search, over every raw type within small caps.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use ubr_core::cert::{normalization_certs, subtype_cert};
use ubr_core::oracle::{prim_subterms, Exploration, OracleBounds, DEFAULT_DEPTH};
use ubr_core::{normalize, subtype, Level, PrimKind, RawType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseCaps {
    /// Maximum nesting of primitive types (a base type has nesting 1).
    pub nesting: usize,
    pub max_level: Level,
    /// Maximum number of primitive nodes.
    pub max_prims: usize,
    /// Rewrite steps allowed to the declarative search.
    pub oracle_depth: usize,
}

impl Default for UniverseCaps {
    fn default() -> Self {
        UniverseCaps {
            nesting: 2,
            max_level: 2,
            max_prims: 3,
            oracle_depth: DEFAULT_DEPTH,
        }
    }
}

/// Every raw type within the caps, each intersection shape and operand order
/// counted separately.
pub fn enumerate(caps: &UniverseCaps) -> Vec<RawType> {
    // types[n - 1][k]: types with k primitive nodes and nesting at most n.
    let mut types: Vec<Vec<Vec<RawType>>> = Vec::new();
    for n in 1..=caps.nesting {
        let mut p = vec![Vec::new(); caps.max_prims + 1];
        for l in 0..=caps.max_level {
            p[1].push(RawType::int(l));
            p[1].push(RawType::code(l));
        }
        if n > 1 {
            let inner: &Vec<Vec<RawType>> = &types[n - 2];
            for (size, slot) in p.iter_mut().enumerate().skip(3) {
                for ds in 1..size - 1 {
                    let cs = size - 1 - ds;
                    for d in &inner[ds] {
                        for c in &inner[cs] {
                            for l in 0..=caps.max_level {
                                slot.push(RawType::arrow(d.clone(), c.clone(), l));
                            }
                        }
                    }
                }
            }
        }
        let mut t: Vec<Vec<RawType>> = vec![Vec::new(); caps.max_prims + 1];
        for size in 1..=caps.max_prims {
            let mut here = p[size].clone();
            for ls in 1..size {
                for a in &t[ls] {
                    for b in &t[size - ls] {
                        here.push(RawType::inter(a.clone(), b.clone()));
                    }
                }
            }
            t[size] = here;
        }
        types.push(t);
    }
    types
        .pop()
        .unwrap_or_default()
        .into_iter()
        .flatten()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub lhs: String,
    pub rhs: String,
    pub algorithm: bool,
    pub oracle_proved: bool,
    pub problem: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub types: usize,
    pub pairs: usize,
    pub algorithm_true: usize,
    pub oracle_proved: usize,
    /// Explorations that hit the state cap.
    pub truncated: usize,
    pub largest_exploration: usize,
    pub mismatches: Vec<Mismatch>,
    /// Types whose normalization certificates fail, with the reason.
    pub normalization_failures: Vec<(String, String)>,
}

/// Search bounds shared by every exploration over the universe.
pub fn universe_bounds(caps: &UniverseCaps) -> OracleBounds {
    OracleBounds {
        depth: caps.oracle_depth,
        max_size: caps.max_prims + 2,
        max_level: caps.max_level + 1,
        max_states: 200_000,
    }
}

/// Compares both subtype routes on every ordered pair of the universe, and
/// checks normalization certificates for every type.
pub fn oracle_agreement(caps: &UniverseCaps) -> AgreementReport {
    let universe = enumerate(caps);
    let bounds = universe_bounds(caps);
    let mut report = AgreementReport {
        types: universe.len(),
        ..Default::default()
    };
    let mut base = BTreeSet::new();
    for l in 0..=caps.max_level {
        base.insert(RawType::int(l));
        base.insert(RawType::code(l));
    }
    let rows: Vec<Row> = parallel_map(&universe, |s| {
        let mut pool = base.clone();
        prim_subterms(s, &mut pool);
        let ex = Exploration::run(s, pool.into_iter().collect(), bounds, None);
        compare_row(s, &universe, &ex)
    });
    for row in rows {
        report.pairs += row.pairs;
        report.algorithm_true += row.algorithm_true;
        report.oracle_proved += row.oracle_proved;
        report.truncated += usize::from(row.truncated);
        report.largest_exploration = report.largest_exploration.max(row.states);
        report.mismatches.extend(row.mismatches);
    }
    for t in &universe {
        if let Err(why) = normalization_sound(t) {
            report.normalization_failures.push((t.to_string(), why));
        }
    }
    report
}

struct Row {
    pairs: usize,
    algorithm_true: usize,
    oracle_proved: usize,
    truncated: bool,
    states: usize,
    mismatches: Vec<Mismatch>,
}

fn compare_row(s: &RawType, universe: &[RawType], ex: &Exploration) -> Row {
    let mut row = Row {
        pairs: 0,
        algorithm_true: 0,
        oracle_proved: 0,
        truncated: ex.truncated(),
        states: ex.state_count(),
        mismatches: Vec::new(),
    };
    for t in universe {
        row.pairs += 1;
        let algorithm = subtype(s, t);
        let proved = ex.reaches(t);
        row.algorithm_true += usize::from(algorithm);
        row.oracle_proved += usize::from(proved);
        let mut problem = None;
        if proved {
            if !algorithm {
                problem = Some("oracle proved a pair the algorithm rejects".to_string());
            } else if !ex.prove(t).is_some_and(|c| c.proves(s, t)) {
                problem = Some("oracle certificate does not replay".to_string());
            }
        }
        if algorithm && problem.is_none() {
            match subtype_cert(s, t) {
                None => problem = Some("algorithm gave no certificate".to_string()),
                Some(c) if !c.proves(s, t) => {
                    problem = Some("algorithm certificate does not replay".to_string())
                }
                Some(_) => {}
            }
        }
        if let Some(problem) = problem {
            row.mismatches.push(Mismatch {
                lhs: s.to_string(),
                rhs: t.to_string(),
                algorithm,
                oracle_proved: proved,
                problem,
            });
        }
    }
    row
}

/// `t` and its canonical form are subtypes of each other, with replaying
/// certificates in both directions.
pub fn normalization_sound(t: &RawType) -> Result<(), String> {
    let n = normalize(t).to_raw();
    let (down, up) = normalization_certs(t);
    if !down.proves(t, &n) {
        return Err(format!("certificate for {t} <= {n} does not replay"));
    }
    if !up.proves(&n, t) {
        return Err(format!("certificate for {n} <= {t} does not replay"));
    }
    if !(subtype(t, &n) && subtype(&n, t)) {
        return Err(format!("algorithm does not relate {t} and {n} both ways"));
    }
    Ok(())
}

/// Maps `f` over `items` on all available cores, keeping input order.
pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Nesting depth of primitive types.
pub fn nesting(t: &RawType) -> usize {
    match t {
        RawType::Prim(PrimKind::Arrow(d, c), _) => 1 + nesting(d).max(nesting(c)),
        RawType::Prim(..) => 1,
        RawType::Inter(a, b) => nesting(a).max(nesting(b)),
    }
}
