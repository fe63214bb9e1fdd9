//! Derivation certificates for congruence (`≡`) and subtyping (`≤`).
//!
//! A certificate is a tree of rule applications over raw types. Replaying
//! it recomputes the judgment bottom-up using only syntactic checks, so it
//! never consults [`normalize`](crate::types::normalize) or the algorithmic
//! subtype test.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Level, PrimKind, RawType};
use crate::types::{render_list, CanonAtom, CanonType};

/// Congruence derivation: proves `lhs ≡ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqCert {
    Refl(RawType),
    Sym(Box<EqCert>),
    Trans(Box<EqCert>, Box<EqCert>),
    /// `T ≡ T ∧ T`
    Idem(RawType),
    /// `A ∧ B ≡ B ∧ A`
    Comm(RawType, RawType),
    /// `A ∧ (B ∧ C) ≡ (A ∧ B) ∧ C`
    Assoc(RawType, RawType, RawType),
    /// `(D → A)^ℓ ∧ (D → B)^ℓ ≡ (D → A ∧ B)^ℓ`
    Dist {
        dom: RawType,
        left: RawType,
        right: RawType,
        level: Level,
    },
    /// `(D → C)^(ℓ+1) ≡ (D → C↑1)^ℓ`
    Shift {
        dom: RawType,
        cod: RawType,
        level: Level,
    },
    InterCong(Box<EqCert>, Box<EqCert>),
    ArrowCong(Box<EqCert>, Box<EqCert>, Level),
}

/// Subtyping derivation: proves `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubtypeCert {
    /// Congruent types are subtypes.
    Equiv(EqCert),
    /// `int^ℓ ≤ int^(ℓ+1)`
    IntLift(Level),
    /// `A ∧ B ≤ A`
    InterElim(RawType, RawType),
    /// Contravariant domain premise, covariant codomain premise.
    Arrow(Box<SubtypeCert>, Box<SubtypeCert>, Level),
    /// `A ≤ A'`, `B ≤ B'` gives `A ∧ B ≤ A' ∧ B'`.
    Inter(Box<SubtypeCert>, Box<SubtypeCert>),
    Trans(Box<SubtypeCert>, Box<SubtypeCert>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayError {
    /// Transitivity with mismatched middle types.
    BrokenChain { rule: &'static str },
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::BrokenChain { rule } => write!(f, "{rule}: premises do not chain"),
        }
    }
}

impl EqCert {
    pub fn rule_name(&self) -> &'static str {
        match self {
            EqCert::Refl(_) => "Refl",
            EqCert::Sym(_) => "Sym",
            EqCert::Trans(..) => "EqTrans",
            EqCert::Idem(_) => "Idem",
            EqCert::Comm(..) => "Comm",
            EqCert::Assoc(..) => "Assoc",
            EqCert::Dist { .. } => "Dist",
            EqCert::Shift { .. } => "Shift",
            EqCert::InterCong(..) => "InterCong",
            EqCert::ArrowCong(..) => "ArrowCong",
        }
    }

    /// Recomputes `(lhs, rhs)` of the derived congruence.
    pub fn replay(&self) -> Result<(RawType, RawType), ReplayError> {
        use RawType as R;
        Ok(match self {
            EqCert::Refl(t) => (t.clone(), t.clone()),
            EqCert::Sym(p) => {
                let (a, b) = p.replay()?;
                (b, a)
            }
            EqCert::Trans(p, q) => {
                let (a, b) = p.replay()?;
                let (b2, c) = q.replay()?;
                if b != b2 {
                    return Err(ReplayError::BrokenChain { rule: "EqTrans" });
                }
                (a, c)
            }
            EqCert::Idem(t) => (t.clone(), R::inter(t.clone(), t.clone())),
            EqCert::Comm(a, b) => (
                R::inter(a.clone(), b.clone()),
                R::inter(b.clone(), a.clone()),
            ),
            EqCert::Assoc(a, b, c) => (
                R::inter(a.clone(), R::inter(b.clone(), c.clone())),
                R::inter(R::inter(a.clone(), b.clone()), c.clone()),
            ),
            EqCert::Dist {
                dom,
                left,
                right,
                level,
            } => (
                R::inter(
                    R::arrow(dom.clone(), left.clone(), *level),
                    R::arrow(dom.clone(), right.clone(), *level),
                ),
                R::arrow(dom.clone(), R::inter(left.clone(), right.clone()), *level),
            ),
            EqCert::Shift { dom, cod, level } => (
                R::arrow(dom.clone(), cod.clone(), level + 1),
                R::arrow(dom.clone(), cod.lifted(1), *level),
            ),
            EqCert::InterCong(p, q) => {
                let (a, a2) = p.replay()?;
                let (b, b2) = q.replay()?;
                (R::inter(a, b), R::inter(a2, b2))
            }
            EqCert::ArrowCong(p, q, l) => {
                let (d, d2) = p.replay()?;
                let (c, c2) = q.replay()?;
                (R::arrow(d, c, *l), R::arrow(d2, c2, *l))
            }
        })
    }

    pub fn proves(&self, lhs: &RawType, rhs: &RawType) -> bool {
        matches!(self.replay(), Ok((a, b)) if a == *lhs && b == *rhs)
    }

    /// Number of rule applications.
    pub fn size(&self) -> usize {
        match self {
            EqCert::Sym(p) => 1 + p.size(),
            EqCert::Trans(p, q) | EqCert::InterCong(p, q) | EqCert::ArrowCong(p, q, _) => {
                1 + p.size() + q.size()
            }
            _ => 1,
        }
    }
}

impl SubtypeCert {
    pub fn rule_name(&self) -> &'static str {
        match self {
            SubtypeCert::Equiv(_) => "Equiv",
            SubtypeCert::IntLift(_) => "IntLift",
            SubtypeCert::InterElim(..) => "InterElim",
            SubtypeCert::Arrow(..) => "Arrow",
            SubtypeCert::Inter(..) => "Inter",
            SubtypeCert::Trans(..) => "Trans",
        }
    }

    pub fn refl(t: RawType) -> SubtypeCert {
        SubtypeCert::Equiv(EqCert::Refl(t))
    }

    pub fn trans(a: SubtypeCert, b: SubtypeCert) -> SubtypeCert {
        SubtypeCert::Trans(Box::new(a), Box::new(b))
    }

    /// Recomputes `(lhs, rhs)` of the derived subtyping judgment.
    pub fn replay(&self) -> Result<(RawType, RawType), ReplayError> {
        use RawType as R;
        Ok(match self {
            SubtypeCert::Equiv(e) => e.replay()?,
            SubtypeCert::IntLift(l) => (R::int(*l), R::int(l + 1)),
            SubtypeCert::InterElim(a, b) => (R::inter(a.clone(), b.clone()), a.clone()),
            SubtypeCert::Arrow(dom, cod, l) => {
                // dom proves T2 ≤ T1, cod proves T1' ≤ T2'
                let (t2, t1) = dom.replay()?;
                let (c1, c2) = cod.replay()?;
                (R::arrow(t1, c1, *l), R::arrow(t2, c2, *l))
            }
            SubtypeCert::Inter(p, q) => {
                let (a, a2) = p.replay()?;
                let (b, b2) = q.replay()?;
                (R::inter(a, b), R::inter(a2, b2))
            }
            SubtypeCert::Trans(p, q) => {
                let (a, b) = p.replay()?;
                let (b2, c) = q.replay()?;
                if b != b2 {
                    return Err(ReplayError::BrokenChain { rule: "Trans" });
                }
                (a, c)
            }
        })
    }

    pub fn proves(&self, lhs: &RawType, rhs: &RawType) -> bool {
        matches!(self.replay(), Ok((a, b)) if a == *lhs && b == *rhs)
    }

    pub fn size(&self) -> usize {
        match self {
            SubtypeCert::Equiv(e) => e.size(),
            SubtypeCert::Arrow(p, q, _) | SubtypeCert::Inter(p, q) | SubtypeCert::Trans(p, q) => {
                1 + p.size() + q.size()
            }
            _ => 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Construction from the canonical algorithm.

fn sym(e: EqCert) -> EqCert {
    match e {
        EqCert::Refl(t) => EqCert::Refl(t),
        e => EqCert::Sym(Box::new(e)),
    }
}

fn eq_trans(a: EqCert, b: EqCert) -> EqCert {
    match (a, b) {
        (EqCert::Refl(_), b) => b,
        (a, EqCert::Refl(_)) => a,
        (a, b) => EqCert::Trans(Box::new(a), Box::new(b)),
    }
}

fn inter_cong(a: EqCert, b: EqCert) -> EqCert {
    match (a, b) {
        (EqCert::Refl(x), EqCert::Refl(y)) => EqCert::Refl(RawType::inter(x, y)),
        (a, b) => EqCert::InterCong(Box::new(a), Box::new(b)),
    }
}

fn arrow_cong(a: EqCert, b: EqCert, level: Level) -> EqCert {
    match (a, b) {
        (EqCert::Refl(x), EqCert::Refl(y)) => EqCert::Refl(RawType::arrow(x, y, level)),
        (a, b) => EqCert::ArrowCong(Box::new(a), Box::new(b), level),
    }
}

fn raw_list(atoms: &[CanonAtom]) -> RawType {
    render_list(atoms)
}

/// `list(xs) ∧ list(ys) ≡ list(xs ++ ys)`
fn append_proof(xs: &[CanonAtom], ys: &[CanonAtom]) -> EqCert {
    let tail = raw_list(ys);
    match xs {
        [] => unreachable!(),
        [a] => EqCert::Refl(RawType::inter(a.to_raw(), tail)),
        [a, rest @ ..] => {
            let reassoc = sym(EqCert::Assoc(a.to_raw(), raw_list(rest), tail));
            eq_trans(
                reassoc,
                inter_cong(EqCert::Refl(a.to_raw()), append_proof(rest, ys)),
            )
        }
    }
}

/// `a ∧ list(sorted) ≡ list(insert(a, sorted))` with `sorted` strictly
/// increasing. Returns the new list alongside the proof.
fn insert_proof(a: &CanonAtom, sorted: &[CanonAtom]) -> (Vec<CanonAtom>, EqCert) {
    let ar = a.to_raw();
    match sorted {
        [] => unreachable!(),
        [b, ..] if a < b => {
            let mut out = alloc::vec![a.clone()];
            out.extend_from_slice(sorted);
            (out, EqCert::Refl(RawType::inter(ar, raw_list(sorted))))
        }
        [b] if a == b => (alloc::vec![a.clone()], sym(EqCert::Idem(ar))),
        [b, rest @ ..] if a == b => {
            let r = raw_list(rest);
            let p = eq_trans(
                EqCert::Assoc(ar.clone(), ar.clone(), r.clone()),
                inter_cong(sym(EqCert::Idem(ar)), EqCert::Refl(r)),
            );
            (sorted.to_vec(), p)
        }
        [b] => (
            alloc::vec![b.clone(), a.clone()],
            EqCert::Comm(ar, b.to_raw()),
        ),
        [b, rest @ ..] => {
            let br = b.to_raw();
            let r = raw_list(rest);
            let (inserted, inner) = insert_proof(a, rest);
            let p = eq_trans(
                EqCert::Assoc(ar.clone(), br.clone(), r.clone()),
                eq_trans(
                    inter_cong(
                        EqCert::Comm(ar.clone(), br.clone()),
                        EqCert::Refl(r.clone()),
                    ),
                    eq_trans(
                        sym(EqCert::Assoc(br.clone(), ar, r)),
                        inter_cong(EqCert::Refl(br), inner),
                    ),
                ),
            );
            let mut out = alloc::vec![b.clone()];
            out.extend(inserted);
            (out, p)
        }
    }
}

/// `list(xs) ≡ list(sort_dedup(xs))`
fn sort_proof(xs: &[CanonAtom]) -> (Vec<CanonAtom>, EqCert) {
    match xs {
        [] => unreachable!(),
        [a] => (alloc::vec![a.clone()], EqCert::Refl(a.to_raw())),
        [a, rest @ ..] => {
            let (sorted, p) = sort_proof(rest);
            let (out, q) = insert_proof(a, &sorted);
            (out, eq_trans(inter_cong(EqCert::Refl(a.to_raw()), p), q))
        }
    }
}

/// `(a.to_raw())↑k ≡ a.lift(k).to_raw()`
fn atom_lift_proof(a: &CanonAtom, k: Level) -> EqCert {
    match a {
        CanonAtom::Int(_) | CanonAtom::Code(_) => EqCert::Refl(a.lift(k).to_raw()),
        CanonAtom::Arrow(d, c) => {
            let dr = d.to_raw();
            let (down, _) = shift_down(&dr, &c.to_raw(), k);
            eq_trans(down, arrow_cong(EqCert::Refl(dr), atom_lift_proof(c, k), 0))
        }
    }
}

/// `(D → C)^k ≡ (D → C↑k)^0` by `k` shift steps; returns the proof and `C↑k`.
fn shift_down(dom: &RawType, cod: &RawType, k: Level) -> (EqCert, RawType) {
    let mut proof = EqCert::Refl(RawType::arrow(dom.clone(), cod.clone(), k));
    let mut cur = cod.clone();
    for level in (0..k).rev() {
        let step = EqCert::Shift {
            dom: dom.clone(),
            cod: cur.clone(),
            level,
        };
        cur = cur.lifted(1);
        proof = eq_trans(proof, step);
    }
    (proof, cur)
}

/// `(D → list(cs))^0 ≡ list([(D → c)^0 | c ∈ cs])`
fn distribute_proof(dom: &RawType, cods: &[CanonAtom]) -> EqCert {
    match cods {
        [] => unreachable!(),
        [c] => EqCert::Refl(RawType::arrow(dom.clone(), c.to_raw(), 0)),
        [c, rest @ ..] => {
            let split = sym(EqCert::Dist {
                dom: dom.clone(),
                left: c.to_raw(),
                right: raw_list(rest),
                level: 0,
            });
            let head = EqCert::Refl(RawType::arrow(dom.clone(), c.to_raw(), 0));
            eq_trans(split, inter_cong(head, distribute_proof(dom, rest)))
        }
    }
}

/// Canonical form together with a congruence proof `t ≡ canon.to_raw()`.
pub fn normalize_with_proof(t: &RawType) -> (CanonType, EqCert) {
    match t {
        RawType::Prim(PrimKind::Int, _) | RawType::Prim(PrimKind::Code, _) => {
            let c = crate::types::normalize(t);
            (c, EqCert::Refl(t.clone()))
        }
        RawType::Inter(a, b) => {
            let (ca, pa) = normalize_with_proof(a);
            let (cb, pb) = normalize_with_proof(b);
            let mut all = ca.atoms().to_vec();
            all.extend_from_slice(cb.atoms());
            let glued = append_proof(ca.atoms(), cb.atoms());
            let (sorted, sp) = sort_proof(&all);
            let canon = CanonType::from_atoms(sorted).expect("nonempty");
            (canon, eq_trans(inter_cong(pa, pb), eq_trans(glued, sp)))
        }
        RawType::Prim(PrimKind::Arrow(d, c), l) => {
            let (cd, pd) = normalize_with_proof(d);
            let (cc, pc) = normalize_with_proof(c);
            let dr = cd.to_raw();
            let cong = arrow_cong(pd, pc, *l);
            let (shifted, lifted_cod) = shift_down(&dr, &cc.to_raw(), *l);
            let lifted = cc.lift(*l);
            let atom_proofs = list_cong(cc.atoms(), *l);
            debug_assert!(atom_proofs.proves(&lifted_cod, &lifted.to_raw()));
            let fix_cod = arrow_cong(EqCert::Refl(dr.clone()), atom_proofs, 0);
            let dist = distribute_proof(&dr, lifted.atoms());
            let canon = CanonType::from_atoms(
                lifted
                    .atoms()
                    .iter()
                    .map(|a| CanonAtom::arrow(cd.clone(), a.clone())),
            )
            .expect("nonempty");
            let proof = eq_trans(cong, eq_trans(shifted, eq_trans(fix_cod, dist)));
            (canon, proof)
        }
    }
}

/// `list(cs)↑k ≡ list(cs.lift(k))`, conjunct by conjunct.
fn list_cong(cs: &[CanonAtom], k: Level) -> EqCert {
    match cs {
        [] => unreachable!(),
        [a] => atom_lift_proof(a, k),
        [a, rest @ ..] => inter_cong(atom_lift_proof(a, k), list_cong(rest, k)),
    }
}

/// `list(atoms) ≤ atoms[j]`
fn project(atoms: &[CanonAtom], j: usize) -> SubtypeCert {
    match (atoms, j) {
        ([a], 0) => SubtypeCert::refl(a.to_raw()),
        ([a, rest @ ..], 0) => SubtypeCert::InterElim(a.to_raw(), raw_list(rest)),
        ([a, rest @ ..], j) => {
            let r = raw_list(rest);
            let drop_head = SubtypeCert::trans(
                SubtypeCert::Equiv(EqCert::Comm(a.to_raw(), r.clone())),
                SubtypeCert::InterElim(r, a.to_raw()),
            );
            SubtypeCert::trans(drop_head, project(rest, j - 1))
        }
        _ => unreachable!(),
    }
}

/// Proof that atom `x` is a subtype of atom `y`, when `x.covers(y)`.
fn atom_cert(x: &CanonAtom, y: &CanonAtom) -> Option<SubtypeCert> {
    match (x, y) {
        (CanonAtom::Int(k), CanonAtom::Int(l)) if k <= l => {
            let mut cert = SubtypeCert::refl(RawType::int(*k));
            for m in *k..*l {
                cert = if m == *k {
                    SubtypeCert::IntLift(m)
                } else {
                    SubtypeCert::trans(cert, SubtypeCert::IntLift(m))
                };
            }
            Some(cert)
        }
        (CanonAtom::Code(k), CanonAtom::Code(l)) if k == l => {
            Some(SubtypeCert::refl(RawType::code(*k)))
        }
        (CanonAtom::Arrow(d1, c1), CanonAtom::Arrow(d2, c2)) => {
            let dom = canonical_cert(d2, d1)?;
            let cod = atom_cert(c1, c2)?;
            Some(SubtypeCert::Arrow(Box::new(dom), Box::new(cod), 0))
        }
        _ => None,
    }
}

/// Certificate for `s.to_raw() ≤ t.to_raw()`, or `None` when the algorithm
/// says no.
pub fn canonical_cert(s: &CanonType, t: &CanonType) -> Option<SubtypeCert> {
    let sa = s.atoms();
    let one = |goal: &CanonAtom| -> Option<SubtypeCert> {
        let j = sa.iter().position(|a| a.covers(goal))?;
        let step = atom_cert(&sa[j], goal)?;
        Some(match (project(sa, j), step) {
            (SubtypeCert::Equiv(EqCert::Refl(_)), step) => step,
            (p, SubtypeCert::Equiv(EqCert::Refl(_))) => p,
            (p, step) => SubtypeCert::trans(p, step),
        })
    };
    fn go(
        s: &CanonType,
        goals: &[CanonAtom],
        one: &dyn Fn(&CanonAtom) -> Option<SubtypeCert>,
    ) -> Option<SubtypeCert> {
        match goals {
            [] => unreachable!(),
            [g] => one(g),
            [g, rest @ ..] => {
                let head = one(g)?;
                let tail = go(s, rest, one)?;
                Some(SubtypeCert::trans(
                    SubtypeCert::Equiv(EqCert::Idem(s.to_raw())),
                    SubtypeCert::Inter(Box::new(head), Box::new(tail)),
                ))
            }
        }
    }
    go(s, t.atoms(), &one)
}

/// Decides `s ≤ t` and returns a replayable certificate when it holds.
pub fn subtype_cert(s: &RawType, t: &RawType) -> Option<SubtypeCert> {
    let (cs, ps) = normalize_with_proof(s);
    let (ct, pt) = normalize_with_proof(t);
    let mid = canonical_cert(&cs, &ct)?;
    Some(SubtypeCert::trans(
        SubtypeCert::Equiv(ps),
        SubtypeCert::trans(mid, SubtypeCert::Equiv(sym(pt))),
    ))
}

/// Certificate for `t ≡ normalize(t)` read as two subtyping judgments.
pub fn normalization_certs(t: &RawType) -> (SubtypeCert, SubtypeCert) {
    let (_, p) = normalize_with_proof(t);
    (SubtypeCert::Equiv(p.clone()), SubtypeCert::Equiv(sym(p)))
}
