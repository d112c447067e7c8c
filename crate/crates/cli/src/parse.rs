//! Recursive-descent parser for group and graph expressions.
//!
//! Group grammar (operators have equal precedence and associate to the left;
//! a chain mixing operators needs parentheses):
//!
//! ```text
//! expr    := operand (op operand)*
//! op      := "pwr" | "wr" | "box"
//! operand := atom | "(" expr ")" ["@" radius]
//! atom    := ("S" | "A" | "C" | "D") "(" int ")" | "V4" | "F20"
//!          | "perm" "[" int (";" cycles)* "]"
//! ```
//!
//! Graph grammar: `K<n>`, `P<n>`, `C<n>`, `gamma(G, m)@r`, `cart(G, H)`.

use std::fmt;

use permbox::decompose::{Atom, GroupExpr};
use permbox::{Error, Permutation, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    At,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = s[start..i].parse().map_err(|_| parse_err(start, "integer too large"))?;
            out.push((start, Tok::Int(n)));
            continue;
        }
        let t = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '@' => Tok::At,
            _ => return Err(parse_err(start, format!("unexpected character {c:?}"))),
        };
        out.push((start, t));
        i += c.len_utf8();
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
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(s: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(s)?,
            pos: 0,
            end: s.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let at = self.offset();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(parse_err(at, format!("expected {what}"))),
        }
    }

    fn int(&mut self, what: &str) -> Result<usize> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            _ => Err(parse_err(at, format!("expected {what}"))),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return Err(parse_err(self.offset(), "unexpected trailing input"));
        }
        Ok(())
    }

    fn radius_suffix(&mut self) -> Result<Option<usize>> {
        if self.peek() != Some(&Tok::At) {
            return Ok(None);
        }
        self.next();
        let at = self.offset();
        let r = self.int("a radius after '@'")?;
        if r < 2 {
            return Err(parse_err(at, "radius must be at least 2"));
        }
        Ok(Some(r))
    }

    fn expr(&mut self) -> Result<GroupExpr> {
        let mut lhs = self.operand()?;
        let mut chain_op: Option<String> = None;
        while let Some(Tok::Ident(op)) = self.peek().cloned() {
            if !matches!(op.as_str(), "pwr" | "wr" | "box") {
                break;
            }
            let at = self.offset();
            if chain_op.as_ref().is_some_and(|c| *c != op) {
                return Err(parse_err(at, "ambiguous chain requires parentheses"));
            }
            chain_op = Some(op.clone());
            self.next();
            let rhs = self.operand()?;
            lhs = match op.as_str() {
                "pwr" => GroupExpr::pwr(lhs, rhs),
                "wr" => GroupExpr::wr(lhs, rhs),
                _ => GroupExpr::boxed(lhs, rhs, None),
            };
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<GroupExpr> {
        let at = self.offset();
        match self.next() {
            Some(Tok::LParen) => {
                let mut e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let suffix_at = self.offset();
                if let Some(r) = self.radius_suffix()? {
                    match &mut e {
                        GroupExpr::Box { radius, .. } => *radius = Some(r),
                        _ => return Err(parse_err(suffix_at, "a radius suffix needs a box product")),
                    }
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.atom(at, &name),
            _ => Err(parse_err(at, "expected an atom or '('")),
        }
    }

    fn atom(&mut self, at: usize, name: &str) -> Result<GroupExpr> {
        let atom = match name {
            "S" | "A" | "C" | "D" => {
                self.expect(Tok::LParen, "'('")?;
                let n = self.int("an integer")?;
                self.expect(Tok::RParen, "')'")?;
                match name {
                    "S" => Atom::Symmetric(n),
                    "A" => Atom::Alternating(n),
                    "C" => Atom::Cyclic(n),
                    _ => Atom::Dihedral(n),
                }
            }
            "V4" => Atom::KleinFour,
            "F20" => Atom::Frobenius20,
            "perm" => self.perm()?,
            _ => return Err(parse_err(at, format!("unknown atom {name}"))),
        };
        atom.group().map_err(|e| parse_err(at, e.to_string()))?;
        Ok(GroupExpr::atom(atom))
    }

    fn perm(&mut self) -> Result<Atom> {
        self.expect(Tok::LBracket, "'['")?;
        let degree = self.int("a degree")?;
        let mut generators = Vec::new();
        while self.peek() == Some(&Tok::Semi) {
            self.next();
            let at = self.offset();
            let mut cycles = Vec::new();
            while self.peek() == Some(&Tok::LParen) {
                self.next();
                let mut cycle = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    cycle.push(self.int("a point")?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.next();
                        cycle.push(self.int("a point")?);
                    }
                }
                self.expect(Tok::RParen, "')'")?;
                if !cycle.is_empty() {
                    cycles.push(cycle);
                }
            }
            let g = Permutation::from_cycles(degree, &cycles).map_err(|e| parse_err(at, e.to_string()))?;
            generators.push(g);
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(Atom::Perm { degree, generators })
    }

    fn graph(&mut self) -> Result<GraphExpr> {
        let at = self.offset();
        let name = match self.next() {
            Some(Tok::Ident(n)) => n,
            _ => return Err(parse_err(at, "expected a graph")),
        };
        match name.as_str() {
            "gamma" => {
                self.expect(Tok::LParen, "'('")?;
                let lambda = self.graph()?;
                self.expect(Tok::Comma, "','")?;
                let m = self.int("a multiplicity")?;
                self.expect(Tok::RParen, "')'")?;
                let generations = match self.peek() {
                    Some(Tok::At) => {
                        self.next();
                        let gat = self.offset();
                        let r = self.int("a radius after '@'")?;
                        if r == 0 {
                            return Err(parse_err(gat, "radius must be positive"));
                        }
                        Some(r)
                    }
                    _ => None,
                };
                Ok(GraphExpr::Gamma {
                    lambda: Box::new(lambda),
                    m,
                    generations,
                })
            }
            "cart" => {
                self.expect(Tok::LParen, "'('")?;
                let a = self.graph()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.graph()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(GraphExpr::Cart(Box::new(a), Box::new(b)))
            }
            _ => basic_graph(&name).ok_or_else(|| parse_err(at, format!("unknown graph {name}"))),
        }
    }
}

fn basic_graph(name: &str) -> Option<GraphExpr> {
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n = digits.parse().ok()?;
    match head {
        "K" => Some(GraphExpr::Complete(n)),
        "P" => Some(GraphExpr::Path(n)),
        "C" => Some(GraphExpr::Cycle(n)),
        _ => None,
    }
}

/// Graph constructions accepted by `ends` and `render`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphExpr {
    Complete(usize),
    Path(usize),
    Cycle(usize),
    Gamma {
        lambda: Box<GraphExpr>,
        m: usize,
        generations: Option<usize>,
    },
    Cart(Box<GraphExpr>, Box<GraphExpr>),
}

impl fmt::Display for GraphExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphExpr::Complete(n) => write!(f, "K{n}"),
            GraphExpr::Path(n) => write!(f, "P{n}"),
            GraphExpr::Cycle(n) => write!(f, "C{n}"),
            GraphExpr::Gamma { lambda, m, generations } => {
                write!(f, "gamma({lambda},{m})")?;
                if let Some(r) = generations {
                    write!(f, "@{r}")?;
                }
                Ok(())
            }
            GraphExpr::Cart(a, b) => write!(f, "cart({a},{b})"),
        }
    }
}

/// Parses a group expression.
pub fn parse_expr(s: &str) -> Result<GroupExpr> {
    let mut p = Parser::new(s)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_graph_expr(s: &str) -> Result<GraphExpr> {
    let mut p = Parser::new(s)?;
    let g = p.graph()?;
    p.finish()?;
    Ok(g)
}

/// A parsed command-line expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Group(GroupExpr),
    Graph(GraphExpr),
}

/// Graph syntax is recognised by its leading token (`K5`, `gamma(`, ...);
/// anything else is a group expression.
pub fn parse_input(s: &str) -> Result<Input> {
    let toks = lex(s)?;
    match toks.first() {
        Some((_, Tok::Ident(name))) if name == "gamma" || name == "cart" || basic_graph(name).is_some() => {
            parse_graph_expr(s).map(Input::Graph)
        }
        _ => parse_expr(s).map(Input::Group),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize) -> GroupExpr {
        GroupExpr::atom(Atom::Symmetric(n))
    }

    #[test]
    fn examples() {
        assert_eq!(parse_expr("(S(3) box S(2))@3").unwrap(), GroupExpr::boxed(s(3), s(2), Some(3)));
        assert_eq!(
            parse_expr("((S(3) box S(2))@2 pwr S(2))").unwrap(),
            GroupExpr::pwr(GroupExpr::boxed(s(3), s(2), Some(2)), s(2))
        );
        let err = parse_expr("S(3) box S(2) pwr S(2)").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                position: 14,
                message: "ambiguous chain requires parentheses".into()
            }
        );
        assert_eq!(parse_expr("S(2) pwr S(2) pwr S(2)").unwrap(), GroupExpr::pwr(GroupExpr::pwr(s(2), s(2)), s(2)));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_expr("Q(3)"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_expr("(S(3) box S(2))@1"), Err(Error::Parse { position: 16, .. })));
        assert!(matches!(parse_expr("(S(3) pwr S(2))@3"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("S(3) pwr"), Err(Error::Parse { position: 8, .. })));
        assert!(matches!(parse_expr("D(7)"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_expr("S(3) $"), Err(Error::Parse { position: 5, .. })));
        assert!(matches!(parse_expr("perm[3; (0,3)]"), Err(Error::Parse { .. })));
    }

    #[test]
    fn perm_atoms() {
        let e = parse_expr("perm[4; (0,1,2,3); (0,2)]").unwrap();
        let g = match &e {
            GroupExpr::Atom(a) => a.group().unwrap(),
            _ => unreachable!(),
        };
        assert_eq!(g.order(), 8);
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        assert_eq!(parse_expr("perm[3; ()]").unwrap().to_string(), "perm[3; ()]");
    }

    #[test]
    fn graphs() {
        assert_eq!(
            parse_input("gamma(K4,3)@2").unwrap(),
            Input::Graph(GraphExpr::Gamma {
                lambda: Box::new(GraphExpr::Complete(4)),
                m: 3,
                generations: Some(2)
            })
        );
        assert_eq!(parse_input("cart(P20, P20)").unwrap().clone(), parse_input("cart(P20,P20)").unwrap());
        assert!(matches!(parse_input("C(4)").unwrap(), Input::Group(_)));
        assert!(matches!(parse_input("C4").unwrap(), Input::Graph(GraphExpr::Cycle(4))));
        assert!(parse_input("gamma(K4,3)@0").is_err());
    }
}
