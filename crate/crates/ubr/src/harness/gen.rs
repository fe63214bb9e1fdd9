//! Random generation of well-typed closed terms, plus unconstrained terms
//! and types for syntax round-trips.
//!
//! Well-typed generation works backwards from a goal type: a rule is picked
//! whose conclusion can sit below the goal, and its premises become new
//! goals. Goals are kept to shapes some closed term can inhabit: all-int
//! sets, sets of arrows sharing one domain, and sets whose atoms are
//! `code^0` or sit at a positive level (the image of an unbind).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ubr_core::{normalize, CanonAtom, CanonType, Ident, Level, RawType, Term, TypeCtx, TypedSubst};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: usize,
    pub max_level: Level,
    /// Numerals are drawn from `0..=max_numeral`.
    pub max_numeral: i64,
    /// Number of distinct variable names in use.
    pub var_pool: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 5,
            max_level: 3,
            max_numeral: 9,
            var_pool: 3,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }
}

const NAMES: [&str; 8] = ["x", "y", "z", "u", "v", "w", "p", "q"];

pub fn var_names(pool: usize) -> Vec<Ident> {
    (0..pool.max(1))
        .map(|i| match NAMES.get(i) {
            Some(n) => Ident::new(n).unwrap(),
            None => Ident::new(&format!("x{i}")).unwrap(),
        })
        .collect()
}

/// One term with its announced type from a fresh generator.
pub fn gen_typed_term(cfg: &GenConfig) -> (Term, CanonType) {
    Gen::new(cfg).typed_term()
}

/// Deterministic stream of generated terms.
pub struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    names: Vec<Ident>,
}

enum Shape {
    /// Every atom is an int; the smallest level.
    Int(Level),
    /// Every atom is `code^0` or can be lowered; the lowered atoms.
    Unbind(Option<CanonType>),
    /// Every atom is an arrow from the same domain; domain and codomains.
    Arrow(CanonType, CanonType),
}

fn shapes(goal: &CanonType) -> Vec<Shape> {
    let atoms = goal.atoms();
    let mut out = Vec::new();
    if let Some(l) = atoms
        .iter()
        .map(|a| match a {
            CanonAtom::Int(l) => Some(*l),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()
        .and_then(|ls| ls.into_iter().min())
    {
        out.push(Shape::Int(l));
    }
    let lowered: Option<Vec<CanonAtom>> = atoms
        .iter()
        .filter(|a| **a != CanonAtom::Code(0))
        .map(lower)
        .collect();
    if let Some(lowered) = lowered {
        out.push(Shape::Unbind(CanonType::from_atoms(lowered)));
    }
    if let Some(CanonAtom::Arrow(d, _)) = atoms.first() {
        let cods: Option<Vec<CanonAtom>> = atoms
            .iter()
            .map(|a| match a {
                CanonAtom::Arrow(d2, c) if d2 == d => Some((**c).clone()),
                _ => None,
            })
            .collect();
        if let Some(cods) = cods {
            out.push(Shape::Arrow(
                d.clone(),
                CanonType::from_atoms(cods).unwrap(),
            ));
        }
    }
    out
}

fn lower(a: &CanonAtom) -> Option<CanonAtom> {
    match a {
        CanonAtom::Int(0) | CanonAtom::Code(0) => None,
        CanonAtom::Int(l) => Some(CanonAtom::Int(l - 1)),
        CanonAtom::Code(l) => Some(CanonAtom::Code(l - 1)),
        CanonAtom::Arrow(d, c) => lower(c).map(|c| CanonAtom::arrow(d.clone(), c)),
    }
}

fn max_level(t: &CanonType) -> Level {
    fn atom(a: &CanonAtom) -> Level {
        match a {
            CanonAtom::Int(l) | CanonAtom::Code(l) => *l,
            CanonAtom::Arrow(d, c) => max_level(d).max(atom(c)),
        }
    }
    t.atoms().iter().map(atom).max().unwrap_or(0)
}

fn arrows(dom: &CanonType, cod: &CanonType) -> CanonType {
    CanonType::from_atoms(
        cod.atoms()
            .iter()
            .map(|c| CanonAtom::arrow(dom.clone(), c.clone())),
    )
    .unwrap()
}

impl Gen {
    pub fn new(cfg: &GenConfig) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg: cfg.clone(),
            names: var_names(cfg.var_pool),
        }
    }

    pub fn typed_term(&mut self) -> (Term, CanonType) {
        if self.cfg.max_depth == 0 {
            return (Term::Num(0), CanonType::int(0));
        }
        let goal = self.goal(2);
        let t = self.term_at(&TypeCtx::empty(), &goal, self.cfg.max_depth);
        (t, goal)
    }

    fn name(&mut self) -> Ident {
        self.names.choose(&mut self.rng).unwrap().clone()
    }

    fn level(&mut self) -> Level {
        self.rng.gen_range(0..=self.cfg.max_level)
    }

    /// A goal type some closed term inhabits.
    pub fn goal(&mut self, depth: usize) -> CanonType {
        let pick = if depth == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..5)
        };
        let g = match pick {
            0 => CanonType::int(self.level()),
            1 => CanonType::code(self.level()),
            2 | 3 => CanonType::code(0).union(&self.goal(depth - 1).lift(1)),
            _ => {
                let dom = self.value_goal(depth - 1);
                let cod = self.goal(depth - 1);
                arrows(&dom, &cod)
            }
        };
        if max_level(&g) > self.cfg.max_level {
            CanonType::int(self.level())
        } else {
            g
        }
    }

    /// A goal that is also a value type.
    fn value_goal(&mut self, depth: usize) -> CanonType {
        let pick = if depth == 0 {
            self.rng.gen_range(0..3)
        } else {
            self.rng.gen_range(0..5)
        };
        let g = match pick {
            0 | 1 => CanonType::int(0),
            2 => CanonType::code(0),
            3 => CanonType::code(0).union(&self.goal(depth - 1).lift(1)),
            _ => {
                let dom = self.value_goal(depth - 1);
                let cod = self.goal(depth - 1);
                arrows(&dom, &cod)
            }
        };
        if max_level(&g) > self.cfg.max_level {
            CanonType::int(0)
        } else {
            g
        }
    }

    /// A raw type above `t`: a subset of its atoms, some int levels raised,
    /// in a congruent but not necessarily canonical rendering.
    fn weaken(&mut self, t: &CanonType) -> RawType {
        let mut atoms: Vec<CanonAtom> = t.atoms().to_vec();
        if atoms.len() > 1 && self.rng.gen_bool(0.3) {
            let keep = self.rng.gen_range(1..=atoms.len());
            atoms.shuffle(&mut self.rng);
            atoms.truncate(keep);
        }
        for a in atoms.iter_mut() {
            if let CanonAtom::Int(l) = a {
                if *l < self.cfg.max_level && self.rng.gen_bool(0.2) {
                    *l += 1;
                }
            }
        }
        let c = CanonType::from_atoms(atoms).unwrap();
        self.variant(&c.to_raw())
    }

    /// A raw type congruent to `t`.
    fn variant(&mut self, t: &RawType) -> RawType {
        match self.rng.gen_range(0..6) {
            0 => match t {
                RawType::Inter(a, b) => RawType::inter((**b).clone(), (**a).clone()),
                _ => t.clone(),
            },
            1 => RawType::inter(t.clone(), t.clone()),
            2 => shift_up(t),
            _ => t.clone(),
        }
    }

    /// A term whose synthesized type lies below `goal`.
    pub fn term_at(&mut self, env: &TypeCtx, goal: &CanonType, depth: usize) -> Term {
        let vars: Vec<Ident> = env
            .entries()
            .iter()
            .filter(|(_, t)| normalize(t).is_subtype_of(goal))
            .map(|(x, _)| x.clone())
            .collect();
        if !vars.is_empty() && self.rng.gen_bool(if depth == 0 { 0.8 } else { 0.25 }) {
            return Term::Var(vars.choose(&mut self.rng).unwrap().clone());
        }
        let mut shapes = shapes(goal);
        if shapes.is_empty() {
            return Term::Num(0);
        }
        let shape = shapes.swap_remove(self.rng.gen_range(0..shapes.len()));
        let d = depth.saturating_sub(1);
        if depth > 0 {
            match self.rng.gen_range(0..10) {
                0 | 1 => return self.app_at(env, goal, d),
                2 | 3 => return self.rebind_at(env, goal, d),
                _ => {}
            }
        }
        match shape {
            Shape::Int(l) => {
                if depth == 0 || self.rng.gen_bool(0.4) {
                    Term::Num(self.rng.gen_range(0..=self.cfg.max_numeral))
                } else {
                    let want = CanonType::int(l);
                    Term::sum(self.term_at(env, &want, d), self.term_at(env, &want, d))
                }
            }
            Shape::Unbind(body_goal) => {
                let ctx = self.unbinders();
                let inner = ctx
                    .entries()
                    .iter()
                    .fold(env.clone(), |c, (x, t)| c.update(x.clone(), t.clone()));
                let body_goal = match body_goal {
                    Some(g) => g,
                    None => self.goal(1),
                };
                Term::unbind(ctx, self.term_at(&inner, &body_goal, d))
            }
            Shape::Arrow(dom, cods) => {
                let x = self.name();
                let annot = self.weaken(&dom);
                let body = self.term_at(&env.update(x.clone(), annot.clone()), &cods, d);
                Term::lam(x, Some(annot), body)
            }
        }
    }

    fn unbinders(&mut self) -> TypeCtx {
        let n = self.rng.gen_range(1..=2.min(self.names.len()));
        let mut names = self.names.clone();
        names.shuffle(&mut self.rng);
        let entries = names
            .into_iter()
            .take(n)
            .map(|x| {
                let v = self.value_goal(1);
                (x, v.to_raw())
            })
            .collect();
        TypeCtx::new(entries).unwrap()
    }

    fn app_at(&mut self, env: &TypeCtx, goal: &CanonType, d: usize) -> Term {
        let v = self.value_goal(1);
        let annot = self.weaken(&v);
        let arg = self.term_at(env, &v, d);
        if self.rng.gen_bool(0.7) {
            let x = self.name();
            let body = self.term_at(&env.update(x.clone(), annot.clone()), goal, d);
            let bare = self.rng.gen_bool(0.15);
            Term::app(Term::lam(x, (!bare).then_some(annot), body), arg)
        } else {
            let fun = self.term_at(env, &arrows(&normalize(&annot), goal), d);
            Term::app(fun, arg)
        }
    }

    fn rebind_at(&mut self, env: &TypeCtx, goal: &CanonType, d: usize) -> Term {
        let target = self.term_at(env, &goal.lift(1), d);
        let mut entries: Vec<(Ident, RawType, Term)> = Vec::new();
        if let (Term::Unbind(ctx, _), true) = (&target, self.rng.gen_bool(0.8)) {
            for (x, t) in ctx.entries() {
                let annot = self.variant(t);
                let u = self.term_at(env, &normalize(t), d);
                entries.push((x.clone(), annot, u));
            }
            entries.shuffle(&mut self.rng);
        }
        if entries.is_empty() || self.rng.gen_bool(0.2) {
            let x = self.name();
            if !entries.iter().any(|(y, _, _)| *y == x) {
                let v = self.value_goal(1);
                let u = self.term_at(env, &v, d);
                entries.push((x, self.weaken_value(&v), u));
            }
        }
        Term::rebind(target, TypedSubst::new(entries).unwrap())
    }

    /// An annotation above the value type `v` that is itself a value type.
    fn weaken_value(&mut self, v: &CanonType) -> RawType {
        loop {
            let t = self.weaken(v);
            if normalize(&t).is_value_type() {
                return t;
            }
        }
    }
}

/// Moves one unit of level from an arrow's codomain leaf to the arrow.
fn shift_up(t: &RawType) -> RawType {
    use ubr_core::PrimKind;
    match t {
        RawType::Prim(PrimKind::Arrow(d, c), l) => match &**c {
            RawType::Prim(k @ (PrimKind::Int | PrimKind::Code), cl) if *cl > 0 => {
                RawType::arrow((**d).clone(), RawType::Prim(k.clone(), cl - 1), l + 1)
            }
            _ => t.clone(),
        },
        _ => t.clone(),
    }
}

/// Unconstrained raw types.
pub fn arbitrary_type(rng: &mut impl Rng, depth: usize, max_level: Level) -> RawType {
    let pick = if depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..4)
    };
    match pick {
        0 => RawType::int(rng.gen_range(0..=max_level)),
        1 => RawType::code(rng.gen_range(0..=max_level)),
        2 => RawType::arrow(
            arbitrary_type(rng, depth - 1, max_level),
            arbitrary_type(rng, depth - 1, max_level),
            rng.gen_range(0..=max_level),
        ),
        _ => RawType::inter(
            arbitrary_type(rng, depth - 1, max_level),
            arbitrary_type(rng, depth - 1, max_level),
        ),
    }
}

/// Unconstrained terms over the given names; numerals are non-negative.
pub fn arbitrary_term(rng: &mut impl Rng, names: &[Ident], depth: usize) -> Term {
    let pick = if depth == 0 {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..8)
    };
    let d = depth.saturating_sub(1);
    match pick {
        0 => Term::Var(names.choose(rng).unwrap().clone()),
        1 => Term::Num(if rng.gen_bool(0.05) {
            i64::MAX
        } else {
            rng.gen_range(0..1000)
        }),
        2 => Term::Error,
        3 => Term::sum(arbitrary_term(rng, names, d), arbitrary_term(rng, names, d)),
        4 => {
            let annot = rng.gen_bool(0.6).then(|| arbitrary_type(rng, 2, 3));
            Term::lam(
                names.choose(rng).unwrap().clone(),
                annot,
                arbitrary_term(rng, names, d),
            )
        }
        5 => Term::app(arbitrary_term(rng, names, d), arbitrary_term(rng, names, d)),
        6 => {
            let n = rng.gen_range(1..=names.len().min(3));
            let entries = names
                .choose_multiple(rng, n)
                .map(|x| (x.clone(), arbitrary_type(rng, 2, 3)))
                .collect::<Vec<_>>();
            Term::unbind(
                TypeCtx::new(entries).unwrap(),
                arbitrary_term(rng, names, d),
            )
        }
        _ => {
            let n = rng.gen_range(1..=names.len().min(3));
            let chosen: Vec<Ident> = names.choose_multiple(rng, n).cloned().collect();
            let entries = chosen
                .into_iter()
                .map(|x| (x, arbitrary_type(rng, 2, 3), arbitrary_term(rng, names, d)))
                .collect();
            Term::rebind(
                arbitrary_term(rng, names, d),
                TypedSubst::new(entries).unwrap(),
            )
        }
    }
}
