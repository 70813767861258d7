use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::Aggregator;
use crate::{Error, Result};

/// A term: a symbol (variable or constant) or a unary function application.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Symbol(String),
    Apply { function: String, arg: Box<Term> },
}

impl Term {
    pub fn symbol(name: &str) -> Self {
        Term::Symbol(name.to_string())
    }

    pub fn apply(function: &str, arg: Term) -> Self {
        Term::Apply {
            function: function.to_string(),
            arg: Box::new(arg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    /// Binary predicate application such as `eq(F(x), y)`.
    Atom { predicate: String, args: [Term; 2] },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Universal quantification over the aligned pairs of `x` and `y`.
    Forall {
        x: String,
        y: String,
        aggregator: Aggregator,
        body: Box<Formula>,
    },
}

impl Formula {
    /// `forall diag(x,y): eq(F(x), y)`.
    pub fn axiom(aggregator: Aggregator) -> Self {
        Formula::Forall {
            x: "x".into(),
            y: "y".into(),
            aggregator,
            body: Box::new(Formula::Atom {
                predicate: "eq".into(),
                args: [Term::apply("F", Term::symbol("x")), Term::symbol("y")],
            }),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => f.write_str(s),
            Term::Apply { function, arg } => write!(f, "{function}({arg})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom { predicate, args } => write!(f, "{predicate}({}, {})", args[0], args[1]),
            Formula::Not(a) => write!(f, "~({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Forall { x, y, body, .. } => write!(f, "forall diag({x},{y}): {body}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Not,
    And,
    Or,
    Implies,
    Forall,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '~' | '¬' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            _ => None,
        };
        if let Some(t) = simple {
            chars.next();
            out.push((pos, t));
            continue;
        }
        if c == '-' {
            chars.next();
            match chars.next() {
                Some((_, '>')) => out.push((pos, Tok::Implies)),
                _ => return Err(parse_err(pos, "expected `->`")),
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(i, ch)) = chars.peek() {
                if ch.is_alphanumeric() || ch == '_' || ch == '.' {
                    end = i + ch.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &src[pos..end];
            out.push((
                pos,
                match word {
                    "forall" => Tok::Forall,
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "implies" => Tok::Implies,
                    _ => Tok::Ident(word.to_string()),
                },
            ));
            continue;
        }
        return Err(parse_err(pos, alloc::format!("unexpected character {c:?}")));
    }
    Ok(out)
}

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    aggregator: Aggregator,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(parse_err(self.pos(), alloc::format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(parse_err(self.pos(), "expected identifier")),
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Forall) {
            let pos = self.pos();
            let q = self.ident()?;
            if q != "diag" && q != "lcnr.diag" {
                return Err(parse_err(pos, "only `diag(x,y)` quantification is supported"));
            }
            self.expect(Tok::LParen, "`(`")?;
            let x = self.ident()?;
            self.expect(Tok::Comma, "`,`")?;
            let y = self.ident()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Colon, "`:`")?;
            let body = self.implication()?;
            return Ok(Formula::Forall {
                x,
                y,
                aggregator: self.aggregator,
                body: Box::new(body),
            });
        }
        if self.eat(&Tok::LParen) {
            let f = self.implication()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        let predicate = self.ident()?;
        self.expect(Tok::LParen, "`(` after predicate name")?;
        let a = self.term()?;
        self.expect(Tok::Comma, "`,` between predicate arguments")?;
        let b = self.term()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Formula::Atom {
            predicate,
            args: [a, b],
        })
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident()?;
        if self.eat(&Tok::LParen) {
            let arg = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Term::Apply {
                function: name,
                arg: Box::new(arg),
            });
        }
        Ok(Term::Symbol(name))
    }
}

/// Parses the formula notation.
///
/// ```text
/// formula := unary (('&' | 'and') unary)* ...   precedence: ~ > & > | > ->
/// unary   := ('~' | 'not') unary
///          | 'forall' 'diag' '(' var ',' var ')' ':' formula
///          | '(' formula ')'
///          | pred '(' term ',' term ')'
/// term    := name | func '(' term ')'
/// ```
///
/// `->` is right associative. Every `forall` uses `aggregator`.
pub fn parse_formula(src: &str, aggregator: Aggregator) -> Result<Formula> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(parse_err(0, "empty formula"));
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
        aggregator,
    };
    let f = p.implication()?;
    if p.at != p.toks.len() {
        return Err(parse_err(p.pos(), "unexpected trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_axiom() {
        let agg = Aggregator::default();
        let f = parse_formula("forall diag(x,y): eq(F(x), y)", agg).unwrap();
        assert_eq!(f, Formula::axiom(agg));
        let g = parse_formula("forall lcnr.diag(x, y) : eq(F(x),y)", agg).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn precedence_and_keywords() {
        let agg = Aggregator::default();
        let f = parse_formula("p(a,b) | ~q(a,b) & r(a,b) -> s(a,b) -> t(a,b)", agg).unwrap();
        let words = parse_formula("p(a,b) or not q(a,b) and r(a,b) implies s(a,b) implies t(a,b)", agg).unwrap();
        assert_eq!(f, words);
        assert_eq!(f.to_string(), "((p(a, b) | (~(q(a, b)) & r(a, b))) -> (s(a, b) -> t(a, b)))");
    }

    #[test]
    fn display_round_trips() {
        let agg = Aggregator::default();
        for src in [
            "forall diag(x,y): eq(F(x), y)",
            "forall diag(x,y): ~eq(F(x), y) | eq(G(F(x)), y)",
            "eq(a, b) & eq(c, d)",
        ] {
            let f = parse_formula(src, agg).unwrap();
            assert_eq!(parse_formula(&f.to_string(), agg).unwrap(), f);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let agg = Aggregator::default();
        for (src, at) in [
            ("", 0),
            ("forall prod(x,y): eq(x,y)", 7),
            ("eq(x y)", 5),
            ("eq(x,y) $", 8),
            ("eq(x,y) -", 8),
            ("eq(x,y))", 7),
        ] {
            match parse_formula(src, agg) {
                Err(Error::Parse { position, .. }) => assert_eq!(position, at, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
