//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula  := ("exists" | "forall") IDENT "<=" NAT "." formula
//!           | disjunct
//! disjunct := conjunct ("or" conjunct)*
//! conjunct := negation ("and" negation)*
//! negation := "not" negation | "(" formula ")" | atom
//! atom     := term ("<=" | "=" | ">=") term
//! term     := factor (("+" | "monus") factor)*
//! factor   := primary ("*" primary)*
//! primary  := NAT | IDENT | "half" "(" term ")" | "pow2" "(" IDENT ")"
//!           | "(" term ")"
//! ```
//!
//! `pow2` arguments must be variables bound by an enclosing quantifier.
//! Parenthesized formulas and parenthesized terms are disambiguated by
//! backtracking: `(x monus u) = 0` parses the parenthesis as a term.

use super::ast::{FormulaAst, FormulaNode, QuantifierKind, Term};
use super::FormulaError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Nat(u64),
    Ident(String),
    Keyword(&'static str),
    Symbol(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

const KEYWORDS: [&str; 7] = ["exists", "forall", "and", "or", "not", "monus", "half"];

fn tokenize(src: &str) -> Result<Vec<Spanned>, FormulaError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let value = text.parse::<u64>().map_err(|_| FormulaError::Syntax {
                position: pos,
                message: format!("numeral {text} does not fit 64 bits"),
            })?;
            out.push(Spanned { tok: Tok::Nat(value), pos });
            continue;
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if word == "pow2" {
                out.push(Spanned { tok: Tok::Keyword("pow2"), pos });
            } else if let Some(&kw) = KEYWORDS.iter().find(|&&k| k == word) {
                out.push(Spanned { tok: Tok::Keyword(kw), pos });
            } else {
                out.push(Spanned { tok: Tok::Ident(word.to_owned()), pos });
            }
            continue;
        }
        let sym: &'static str = match b {
            b'(' => "(",
            b')' => ")",
            b'+' => "+",
            b'*' => "*",
            b'.' => ".",
            b'<' | b'>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    i += 1;
                    if b == b'<' { "<=" } else { ">=" }
                } else {
                    return Err(FormulaError::Syntax {
                        position: pos,
                        message: format!("expected '=' after '{}'", b as char),
                    });
                }
            }
            b'=' => "=",
            other => {
                return Err(FormulaError::Syntax {
                    position: pos,
                    message: format!("unexpected character {:?}", other as char),
                })
            }
        };
        i += 1;
        out.push(Spanned { tok: Tok::Symbol(sym), pos });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    src_len: usize,
    quantified: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map(|s| s.pos).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Spanned { tok: Tok::Symbol(s), .. }) if *s == sym) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Spanned { tok: Tok::Keyword(k), .. }) if *k == kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, message: impl Into<String>) -> FormulaError {
        FormulaError::Syntax { position: self.pos(), message: message.into() }
    }

    fn formula(&mut self) -> Result<FormulaNode, FormulaError> {
        for kind in [QuantifierKind::Exists, QuantifierKind::Forall] {
            let kw = match kind {
                QuantifierKind::Exists => "exists",
                QuantifierKind::Forall => "forall",
            };
            if self.eat_keyword(kw) {
                let var_pos = self.pos();
                let var = match self.bump() {
                    Some(Spanned { tok: Tok::Ident(name), .. }) => name,
                    _ => return Err(self.err("expected a variable name after the quantifier")),
                };
                if !self.eat_symbol("<=") {
                    return Err(FormulaError::UnboundedQuantifier { name: var, position: var_pos });
                }
                let bound = match self.bump() {
                    Some(Spanned { tok: Tok::Nat(b), .. }) => b,
                    _ => return Err(FormulaError::UnboundedQuantifier { name: var, position: var_pos }),
                };
                if !self.eat_symbol(".") {
                    return Err(self.err("expected '.' after the quantifier bound"));
                }
                self.quantified.push(var.clone());
                let body = self.formula()?;
                self.quantified.pop();
                return Ok(FormulaNode::Quant { kind, var, bound, body: Box::new(body) });
            }
        }
        self.disjunct()
    }

    fn disjunct(&mut self) -> Result<FormulaNode, FormulaError> {
        let mut node = self.conjunct()?;
        while self.eat_keyword("or") {
            let rhs = self.conjunct()?;
            node = FormulaNode::Or(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn conjunct(&mut self) -> Result<FormulaNode, FormulaError> {
        let mut node = self.negation()?;
        while self.eat_keyword("and") {
            let rhs = self.negation()?;
            node = FormulaNode::And(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn negation(&mut self) -> Result<FormulaNode, FormulaError> {
        if self.eat_keyword("not") {
            let inner = self.negation()?;
            return Ok(FormulaNode::Not(Box::new(inner)));
        }
        if matches!(self.peek(), Some(Spanned { tok: Tok::Symbol("("), .. })) {
            // Could be a parenthesized formula or a parenthesized term that
            // starts an atom; try the formula reading first and back off.
            let save = self.at;
            self.at += 1;
            if let Ok(inner) = self.formula() {
                if self.eat_symbol(")") && !self.at_comparison() {
                    return Ok(inner);
                }
            }
            self.at = save;
        }
        self.atom()
    }

    fn at_comparison(&self) -> bool {
        matches!(
            self.peek(),
            Some(Spanned { tok: Tok::Symbol(s), .. }) if matches!(*s, "<=" | "=" | ">=")
        )
    }

    fn atom(&mut self) -> Result<FormulaNode, FormulaError> {
        let lhs = self.term()?;
        let op = match self.bump() {
            Some(Spanned { tok: Tok::Symbol(s), .. }) if matches!(s, "<=" | "=" | ">=") => s,
            _ => return Err(self.err("expected a comparison (<=, =, >=)")),
        };
        let rhs = self.term()?;
        Ok(match op {
            "<=" => FormulaNode::Le(lhs, rhs),
            "=" => FormulaNode::Eq(lhs, rhs),
            _ => FormulaNode::Ge(lhs, rhs),
        })
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let mut node = self.factor()?;
        loop {
            if self.eat_symbol("+") {
                let rhs = self.factor()?;
                node = Term::Add(Box::new(node), Box::new(rhs));
            } else if self.eat_keyword("monus") {
                let rhs = self.factor()?;
                node = Term::Monus(Box::new(node), Box::new(rhs));
            } else {
                return Ok(node);
            }
        }
    }

    fn factor(&mut self) -> Result<Term, FormulaError> {
        let mut node = self.primary()?;
        while self.eat_symbol("*") {
            let rhs = self.primary()?;
            node = Term::Mul(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<Term, FormulaError> {
        let pos = self.pos();
        match self.bump() {
            Some(Spanned { tok: Tok::Nat(v), .. }) => Ok(Term::Const(v)),
            Some(Spanned { tok: Tok::Ident(name), .. }) => Ok(Term::Var(name)),
            Some(Spanned { tok: Tok::Keyword("half"), .. }) => {
                if !self.eat_symbol("(") {
                    return Err(self.err("expected '(' after half"));
                }
                let inner = self.term()?;
                if !self.eat_symbol(")") {
                    return Err(self.err("expected ')' to close half"));
                }
                Ok(Term::Half(Box::new(inner)))
            }
            Some(Spanned { tok: Tok::Keyword("pow2"), .. }) => {
                if !self.eat_symbol("(") {
                    return Err(self.err("expected '(' after pow2"));
                }
                let arg_pos = self.pos();
                let name = match self.bump() {
                    Some(Spanned { tok: Tok::Ident(name), .. }) => name,
                    _ => return Err(self.err("pow2 takes a single variable")),
                };
                if !self.eat_symbol(")") {
                    return Err(self.err("expected ')' to close pow2"));
                }
                if !self.quantified.contains(&name) {
                    return Err(FormulaError::UnboundVariable { name, position: arg_pos });
                }
                Ok(Term::Pow2(name))
            }
            Some(Spanned { tok: Tok::Symbol("("), .. }) => {
                let inner = self.term()?;
                if !self.eat_symbol(")") {
                    return Err(self.err("expected ')' to close the term"));
                }
                Ok(inner)
            }
            _ => Err(FormulaError::Syntax { position: pos, message: "expected a term".into() }),
        }
    }
}

/// Parses a formula from source text. Free variables are declared implicitly
/// in order of first occurrence; `pow2` arguments must be quantified.
pub fn parse(src: &str) -> Result<FormulaAst, FormulaError> {
    let toks = tokenize(src)?;
    let mut parser = Parser { toks, at: 0, src_len: src.len(), quantified: Vec::new() };
    let root = parser.formula()?;
    if let Some(extra) = parser.peek() {
        return Err(FormulaError::Syntax {
            position: extra.pos,
            message: "trailing input after the formula".into(),
        });
    }
    Ok(FormulaAst::new(root))
}
