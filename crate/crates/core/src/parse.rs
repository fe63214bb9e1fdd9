//! Lexer and recursive-descent parser for the concrete syntax.
//!
//! ```text
//! term     := lambda | sum
//! lambda   := '\' IDENT (':' type)? '.' term
//! sum      := app ('+' app)*
//! app      := postfix postfix*
//! postfix  := atom ('[' rebinds ']')*
//! atom     := NAT | IDENT | 'error' | '(' term ')' | '<' ctx '|' term '>'
//! ctx      := IDENT ':' type (',' IDENT ':' type)*
//! rebinds  := IDENT ':' type ':=' term (',' IDENT ':' type ':=' term)*
//!
//! type     := arrow ('&' arrow)*
//! arrow    := lev ('->' arrow)?
//! lev      := prim ('^' NAT)?
//! prim     := 'int' | 'code' | '(' type ')'
//! ```
//!
//! `--` starts a line comment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Ident, Level, RawType, Term, TypeCtx, TypedSubst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    /// 1-based line of `start`.
    pub line: usize,
    /// 1-based column (in characters) of `start`.
    pub column: usize,
}

impl SourceSpan {
    fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            end: other.end,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.span.line,
            self.span.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

/// Spans of a parsed term, shaped like [`Term::children`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub span: SourceSpan,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: SourceSpan) -> SpanTree {
        SpanTree {
            span,
            children: Vec::new(),
        }
    }

    /// Span of the node reached by following child indices.
    pub fn locate(&self, path: &[usize]) -> SourceSpan {
        let mut node = self;
        for &i in path {
            match node.children.get(i) {
                Some(c) => node = c,
                None => break,
            }
        }
        node.span
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Backslash,
    Dot,
    Colon,
    Assign,
    Plus,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Pipe,
    LBracket,
    RBracket,
    Comma,
    Caret,
    Arrow,
    Amp,
    Nat(String),
    Name(String),
    KwError,
    KwInt,
    KwCode,
    Bad(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Backslash => "`\\`",
            Tok::Dot => "`.`",
            Tok::Colon => "`:`",
            Tok::Assign => "`:=`",
            Tok::Plus => "`+`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LAngle => "`<`",
            Tok::RAngle => "`>`",
            Tok::Pipe => "`|`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Caret => "`^`",
            Tok::Arrow => "`->`",
            Tok::Amp => "`&`",
            Tok::Nat(n) => return write!(f, "number `{n}`"),
            Tok::Name(n) => return write!(f, "identifier `{n}`"),
            Tok::KwError => "`error`",
            Tok::KwInt => "`int`",
            Tok::KwCode => "`code`",
            Tok::Bad(c) => return write!(f, "character `{c}`"),
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(src: &str) -> Vec<(Tok, SourceSpan)> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&(i, c)) = chars.peek() {
        let here = SourceSpan {
            start: i,
            end: i + c.len_utf8(),
            line,
            column: col,
        };
        let mut bump = |chars: &mut core::iter::Peekable<core::str::CharIndices>| {
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let rest = &src[i..];
        if rest.starts_with("--") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        let two = |t: Tok| (t, SourceSpan { end: i + 2, ..here });
        if rest.starts_with("->") {
            out.push(two(Tok::Arrow));
            bump(&mut chars);
            bump(&mut chars);
            continue;
        }
        if rest.starts_with(":=") {
            out.push(two(Tok::Assign));
            bump(&mut chars);
            bump(&mut chars);
            continue;
        }
        if c.is_ascii_digit() || c.is_ascii_alphabetic() {
            let mut end = i;
            let word = c.is_ascii_alphabetic();
            while let Some(&(j, d)) = chars.peek() {
                let more = if word {
                    d.is_ascii_alphanumeric() || d == '_'
                } else {
                    d.is_ascii_digit()
                };
                if !more {
                    break;
                }
                end = j + d.len_utf8();
                bump(&mut chars);
            }
            let text = &src[i..end];
            let tok = if !word {
                Tok::Nat(text.to_string())
            } else {
                match text {
                    "error" => Tok::KwError,
                    "int" => Tok::KwInt,
                    "code" => Tok::KwCode,
                    _ => Tok::Name(text.to_string()),
                }
            };
            out.push((tok, SourceSpan { end, ..here }));
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => Tok::Backslash,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '<' => Tok::LAngle,
            '>' => Tok::RAngle,
            '|' => Tok::Pipe,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '^' => Tok::Caret,
            '&' => Tok::Amp,
            other => Tok::Bad(other),
        };
        out.push((tok, here));
        bump(&mut chars);
    }
    let end = src.len();
    out.push((
        Tok::Eof,
        SourceSpan {
            start: end,
            end,
            line,
            column: col,
        },
    ));
    out
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn advance(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            let want = tok.to_string();
            self.fail(&[want.as_str()])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.advance();
                Ok(Ident::new(&n).expect("lexer produces valid names"))
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn nat<N: core::str::FromStr>(&mut self, what: &str) -> PResult<N> {
        match self.peek().clone() {
            Tok::Nat(n) => match n.parse::<N>() {
                Ok(v) => {
                    self.advance();
                    Ok(v)
                }
                Err(_) => Err(ParseError {
                    span: self.span(),
                    expected: alloc::vec![format!("{what} in range")],
                    found: format!("number `{n}`"),
                }),
            },
            _ => self.fail(&[what]),
        }
    }

    // ---- types

    fn ty(&mut self) -> PResult<RawType> {
        let mut t = self.arrow_ty()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            let r = self.arrow_ty()?;
            t = RawType::inter(t, r);
        }
        Ok(t)
    }

    fn arrow_ty(&mut self) -> PResult<RawType> {
        let dom = self.lev_ty()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let cod = self.arrow_ty()?;
            return Ok(RawType::arrow(dom, cod, 0));
        }
        Ok(dom)
    }

    fn lev_ty(&mut self) -> PResult<RawType> {
        let start = self.span();
        let (prim, parenthesized) = match self.peek() {
            Tok::KwInt => {
                self.advance();
                (RawType::int(0), false)
            }
            Tok::KwCode => {
                self.advance();
                (RawType::code(0), false)
            }
            Tok::LParen => {
                self.advance();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                (t, true)
            }
            _ => return self.fail(&["`int`", "`code`", "`(`"]),
        };
        if *self.peek() != Tok::Caret {
            return Ok(prim);
        }
        self.advance();
        let level: Level = self.nat("level")?;
        match prim {
            RawType::Prim(kind, 0) => Ok(RawType::Prim(kind, level)),
            _ => {
                debug_assert!(parenthesized);
                Err(ParseError {
                    span: start.to(self.prev_span()),
                    expected: alloc::vec![String::from("a primitive type before `^`")],
                    found: String::from("an intersection or an already leveled type"),
                })
            }
        }
    }

    // ---- terms

    fn term(&mut self) -> PResult<(Term, SpanTree)> {
        if *self.peek() == Tok::Backslash {
            let start = self.advance().1;
            let x = self.ident()?;
            let annot = if *self.peek() == Tok::Colon {
                self.advance();
                Some(self.ty()?)
            } else {
                None
            };
            self.expect(Tok::Dot)?;
            let (body, bs) = self.term()?;
            let span = start.to(bs.span);
            return Ok((
                Term::lam(x, annot, body),
                SpanTree {
                    span,
                    children: alloc::vec![bs],
                },
            ));
        }
        self.sum()
    }

    fn sum(&mut self) -> PResult<(Term, SpanTree)> {
        let (mut t, mut s) = self.app()?;
        while *self.peek() == Tok::Plus {
            self.advance();
            let (r, rs) = self.app()?;
            let span = s.span.to(rs.span);
            t = Term::sum(t, r);
            s = SpanTree {
                span,
                children: alloc::vec![s, rs],
            };
        }
        Ok((t, s))
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Nat(_) | Tok::Name(_) | Tok::KwError | Tok::LParen | Tok::LAngle
        )
    }

    fn app(&mut self) -> PResult<(Term, SpanTree)> {
        let (mut t, mut s) = self.postfix()?;
        while self.starts_atom() {
            let (a, as_) = self.postfix()?;
            let span = s.span.to(as_.span);
            t = Term::app(t, a);
            s = SpanTree {
                span,
                children: alloc::vec![s, as_],
            };
        }
        Ok((t, s))
    }

    fn postfix(&mut self) -> PResult<(Term, SpanTree)> {
        let (mut t, mut s) = self.atom()?;
        while *self.peek() == Tok::LBracket {
            self.advance();
            let mut entries = Vec::new();
            let mut spans = alloc::vec![s];
            if *self.peek() != Tok::RBracket {
                loop {
                    let at = self.span();
                    let x = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let ty = self.ty()?;
                    self.expect(Tok::Assign)?;
                    let (u, us) = self.term()?;
                    if entries.iter().any(|(y, _, _)| *y == x) {
                        return Err(ParseError {
                            span: at,
                            expected: alloc::vec![String::from("a rebinder not already listed")],
                            found: format!("duplicate `{x}`"),
                        });
                    }
                    entries.push((x, ty, u));
                    spans.push(us);
                    if *self.peek() == Tok::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            let end = self.expect(Tok::RBracket)?;
            let span = spans[0].span.to(end);
            t = Term::rebind(t, TypedSubst::new(entries).expect("checked above"));
            s = SpanTree {
                span,
                children: spans,
            };
        }
        Ok((t, s))
    }

    fn atom(&mut self) -> PResult<(Term, SpanTree)> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Nat(_) => {
                let n: i64 = self.nat("numeral")?;
                Ok((Term::Num(n), SpanTree::leaf(start)))
            }
            Tok::Name(_) => {
                let x = self.ident()?;
                Ok((Term::Var(x), SpanTree::leaf(start)))
            }
            Tok::KwError => {
                self.advance();
                Ok((Term::Error, SpanTree::leaf(start)))
            }
            Tok::LParen => {
                self.advance();
                let (t, s) = self.term()?;
                let end = self.expect(Tok::RParen)?;
                Ok((
                    t,
                    SpanTree {
                        span: start.to(end),
                        children: s.children,
                    },
                ))
            }
            Tok::LAngle => {
                self.advance();
                let mut entries: Vec<(Ident, RawType)> = Vec::new();
                if *self.peek() != Tok::Pipe {
                    loop {
                        let at = self.span();
                        let x = self.ident()?;
                        self.expect(Tok::Colon)?;
                        let ty = self.ty()?;
                        if entries.iter().any(|(y, _)| *y == x) {
                            return Err(ParseError {
                                span: at,
                                expected: alloc::vec![String::from(
                                    "an unbinder not already listed"
                                )],
                                found: format!("duplicate `{x}`"),
                            });
                        }
                        entries.push((x, ty));
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::Pipe)?;
                let (body, bs) = self.term()?;
                let end = self.expect(Tok::RAngle)?;
                let ctx = TypeCtx::new(entries).expect("checked above");
                Ok((
                    Term::unbind(ctx, body),
                    SpanTree {
                        span: start.to(end),
                        children: alloc::vec![bs],
                    },
                ))
            }
            _ => self.fail(&["numeral", "identifier", "`error`", "`(`", "`<`"]),
        }
    }
}

/// Parses a complete term and returns it with its span tree.
pub fn parse_term_spanned(src: &str) -> Result<(Term, SpanTree), ParseError> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
    };
    let out = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.fail(&["end of input"]);
    }
    Ok(out)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    parse_term_spanned(src).map(|(t, _)| t)
}

pub fn parse_type(src: &str) -> Result<RawType, ParseError> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.fail(&["end of input"]);
    }
    Ok(t)
}

/// Whether an unfinished REPL line could still become a term.
pub fn is_incomplete(err: &ParseError, src: &str) -> bool {
    err.span.start >= src.trim_end().len()
}
