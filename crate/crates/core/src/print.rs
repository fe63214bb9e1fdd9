//! Printing in the concrete syntax accepted by [`crate::parse`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::syntax::{PrimKind, RawType, Term};
use crate::types::{CanonAtom, CanonType};

impl fmt::Display for RawType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        inter(self, f)
    }
}

fn inter(t: &RawType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        RawType::Inter(a, b) => {
            inter(a, f)?;
            f.write_str(" & ")?;
            match **b {
                RawType::Inter(..) => paren(b, f),
                _ => arrow(b, f),
            }
        }
        _ => arrow(t, f),
    }
}

fn arrow(t: &RawType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        RawType::Prim(PrimKind::Arrow(d, c), 0) => {
            leveled(d, f)?;
            f.write_str(" -> ")?;
            match **c {
                RawType::Inter(..) => paren(c, f),
                _ => arrow(c, f),
            }
        }
        _ => leveled(t, f),
    }
}

fn leveled(t: &RawType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        RawType::Prim(PrimKind::Int, l) => base("int", *l, f),
        RawType::Prim(PrimKind::Code, l) => base("code", *l, f),
        RawType::Prim(PrimKind::Arrow(..), 0) | RawType::Inter(..) => paren(t, f),
        RawType::Prim(PrimKind::Arrow(d, c), l) => {
            let inner = RawType::Prim(PrimKind::Arrow(d.clone(), c.clone()), 0);
            write!(f, "({inner})^{l}")
        }
    }
}

fn base(name: &str, l: u32, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if l == 0 {
        f.write_str(name)
    } else {
        write!(f, "{name}^{l}")
    }
}

fn paren(t: &RawType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_char('(')?;
    inter(t, f)?;
    f.write_char(')')
}

/// Annotation position: anything but a bare base type is parenthesized.
fn annot(t: &RawType) -> String {
    match t {
        RawType::Prim(PrimKind::Int | PrimKind::Code, _) => t.to_string(),
        _ => alloc::format!("({t})"),
    }
}

fn print_atom(a: &CanonAtom) -> String {
    match a {
        CanonAtom::Int(l) => alloc::format!("int^{l}"),
        CanonAtom::Code(l) => alloc::format!("code^{l}"),
        CanonAtom::Arrow(..) => a.to_raw().to_string(),
    }
}

impl fmt::Display for CanonType {
    /// Top-level conjuncts carry explicit levels and are listed in
    /// lexicographic order of their rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.atoms().iter().map(print_atom).collect();
        parts.sort();
        f.write_str(&parts.join(" & "))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        term(self, f)
    }
}

fn term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Lam(x, ty, body) => {
            write!(f, "\\{x}")?;
            if let Some(ty) = ty {
                write!(f, ":{}", annot(ty))?;
            }
            f.write_str(". ")?;
            term(body, f)
        }
        _ => sum(t, f),
    }
}

fn sum(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Sum(a, b) => {
            sum(a, f)?;
            f.write_str(" + ")?;
            app(b, f)
        }
        _ => app(t, f),
    }
}

fn app(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::App(g, a) => {
            app(g, f)?;
            f.write_char(' ')?;
            postfix(a, f)
        }
        _ => postfix(t, f),
    }
}

fn postfix(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Rebind(target, r) => {
            postfix(target, f)?;
            f.write_char('[')?;
            for (i, (x, ty, u)) in r.entries().iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}:{} := ", annot(ty))?;
                term(u, f)?;
            }
            f.write_char(']')
        }
        _ => atom(t, f),
    }
}

fn atom(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Num(n) => write!(f, "{n}"),
        Term::Error => f.write_str("error"),
        Term::Unbind(ctx, body) => {
            f.write_char('<')?;
            for (i, (x, ty)) in ctx.entries().iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}:{ty}")?;
            }
            f.write_str(" | ")?;
            term(body, f)?;
            f.write_char('>')
        }
        _ => {
            f.write_char('(')?;
            term(t, f)?;
            f.write_char(')')
        }
    }
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

pub fn print_raw_type(t: &RawType) -> String {
    t.to_string()
}

pub fn print_canon(t: &CanonType) -> String {
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_term, parse_type};
    use crate::types::normalize;

    #[test]
    fn canonical_examples() {
        let t = CanonType::from_atoms([CanonAtom::Code(0), CanonAtom::Int(2)]).unwrap();
        assert_eq!(print_canon(&t), "code^0 & int^2");
        let f = CanonType::single(CanonAtom::arrow(CanonType::int(0), CanonAtom::Int(2)));
        assert_eq!(print_canon(&f), "int -> int^2");
    }

    #[test]
    fn canonical_printing_reparses() {
        for src in [
            "(int -> int^1)^1",
            "(int -> (int^1 & code^0))^1",
            "(code^0 & int^1) -> int & code^3",
            "((int -> int) -> code^1)^2 & int",
        ] {
            let c = normalize(&parse_type(src).unwrap());
            assert_eq!(
                normalize(&parse_type(&print_canon(&c)).unwrap()),
                c,
                "{src}"
            );
        }
    }

    #[test]
    fn raw_types_round_trip() {
        for src in [
            "int",
            "code^3",
            "int -> int -> int",
            "(int -> int) -> int",
            "int -> (int & code)",
            "int & (code & int^2)",
            "(int -> int^1)^1",
            "((int -> int)^2 -> code)^1",
        ] {
            let t = parse_type(src).unwrap();
            assert_eq!(print_raw_type(&t), src);
            assert_eq!(parse_type(&print_raw_type(&t)).unwrap(), t);
        }
    }

    #[test]
    fn terms_round_trip() {
        for src in [
            "<x:int, y:int | x + y>[x:int := 1, y:int := 2]",
            "(\\y:int^1. y[x:int := 2]) (1 + <x:int | x>)",
            "\\x. x + <x:int | x>",
            "f x[y:(int -> int) := \\z:int. z]",
            "1 + (2 + 3)",
            "(\\x. x) (\\y. y) 3",
            "f (g x)",
            "(1 + 2)[x:int := 1]",
            "(\\x. x)[x:int := 1] 2",
            "<x:int -> int | x> error",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(print_term(&t), src);
        }
    }
}
