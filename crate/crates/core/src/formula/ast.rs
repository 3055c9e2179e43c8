//! Abstract syntax and direct evaluation over the naturals.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::ExactInt;

/// Terms over naturals: constants, variables, `+`, `*`, truncated subtraction,
/// halving, and powers of two of a quantified variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    Const(u64),
    Var(String),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Truncated subtraction: `a monus b = max(a - b, 0)`.
    Monus(Box<Term>, Box<Term>),
    /// `half(t) = floor(t / 2)`.
    Half(Box<Term>),
    /// `pow2(u) = 2^u`; the argument must be a quantified variable.
    Pow2(String),
}

impl Term {
    /// Maximum nesting depth of `half` in the term.
    pub fn floor_depth(&self) -> u32 {
        match self {
            Term::Const(_) | Term::Var(_) | Term::Pow2(_) => 0,
            Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => {
                a.floor_depth().max(b.floor_depth())
            }
            Term::Half(t) => t.floor_depth() + 1,
        }
    }

    /// Number of `monus` occurrences.
    pub fn monus_count(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) | Term::Pow2(_) => 0,
            Term::Add(a, b) | Term::Mul(a, b) => a.monus_count() + b.monus_count(),
            Term::Monus(a, b) => a.monus_count() + b.monus_count() + 1,
            Term::Half(t) => t.monus_count(),
        }
    }

    /// Variables in order of first occurrence (including `pow2` arguments).
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(name) | Term::Pow2(name) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Half(t) => t.collect_vars(out),
        }
    }

    /// Evaluates the term at a natural-number assignment.
    pub fn eval(&self, env: &HashMap<String, ExactInt>) -> ExactInt {
        match self {
            Term::Const(c) => ExactInt::from(*c as i64),
            Term::Var(name) => env
                .get(name)
                .unwrap_or_else(|| panic!("unassigned variable {name}"))
                .clone(),
            Term::Add(a, b) => a.eval(env) + b.eval(env),
            Term::Mul(a, b) => a.eval(env) * b.eval(env),
            Term::Monus(a, b) => {
                let diff = a.eval(env) - b.eval(env);
                if diff.is_negative() { ExactInt::zero() } else { diff }
            }
            Term::Half(t) => {
                let (q, _) = t.eval(env).div_rem_floor(&ExactInt::from(2));
                q
            }
            Term::Pow2(name) => {
                let e = env
                    .get(name)
                    .unwrap_or_else(|| panic!("unassigned variable {name}"))
                    .to_usize()
                    .expect("pow2 exponent must fit a machine word");
                ExactInt::two_pow(e as u64)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantifierKind {
    Exists,
    Forall,
}

/// Atoms compare terms with `<=`, `=`, or `>=`; connectives are `not`, `and`,
/// `or`; quantifiers carry an explicit concrete bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaNode {
    Le(Term, Term),
    Eq(Term, Term),
    Ge(Term, Term),
    Not(Box<FormulaNode>),
    And(Box<FormulaNode>, Box<FormulaNode>),
    Or(Box<FormulaNode>, Box<FormulaNode>),
    Quant { kind: QuantifierKind, var: String, bound: u64, body: Box<FormulaNode> },
}

impl FormulaNode {
    pub fn floor_depth(&self) -> u32 {
        match self {
            FormulaNode::Le(a, b) | FormulaNode::Eq(a, b) | FormulaNode::Ge(a, b) => {
                a.floor_depth().max(b.floor_depth())
            }
            FormulaNode::Not(inner) => inner.floor_depth(),
            FormulaNode::And(a, b) | FormulaNode::Or(a, b) => a.floor_depth().max(b.floor_depth()),
            FormulaNode::Quant { body, .. } => body.floor_depth(),
        }
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            FormulaNode::Le(a, b) | FormulaNode::Eq(a, b) | FormulaNode::Ge(a, b) => {
                for name in a.variables().into_iter().chain(b.variables()) {
                    if !bound.contains(&name) && !out.contains(&name) {
                        out.push(name);
                    }
                }
            }
            FormulaNode::Not(inner) => inner.collect_free(bound, out),
            FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FormulaNode::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }
}

/// A parsed open or sharply bounded formula with its free variables declared
/// in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaAst {
    pub free_vars: Vec<String>,
    pub root: FormulaNode,
}

impl FormulaAst {
    pub fn new(root: FormulaNode) -> Self {
        let mut free = Vec::new();
        root.collect_free(&mut Vec::new(), &mut free);
        FormulaAst { free_vars: free, root }
    }

    pub fn floor_depth(&self) -> u32 {
        self.root.floor_depth()
    }

    /// Brute-force evaluation at a natural-number assignment of the free
    /// variables; bounded quantifiers are expanded by enumeration. This is the
    /// reference semantics every normal form is checked against.
    pub fn eval(&self, assignment: &HashMap<String, ExactInt>) -> bool {
        self.eval_node(&self.root, &mut assignment.clone())
    }

    fn eval_node(&self, node: &FormulaNode, env: &mut HashMap<String, ExactInt>) -> bool {
        match node {
            FormulaNode::Le(a, b) => a.eval(env) <= b.eval(env),
            FormulaNode::Eq(a, b) => a.eval(env) == b.eval(env),
            FormulaNode::Ge(a, b) => a.eval(env) >= b.eval(env),
            FormulaNode::Not(inner) => !self.eval_node(inner, env),
            FormulaNode::And(a, b) => self.eval_node(a, env) && self.eval_node(b, env),
            FormulaNode::Or(a, b) => self.eval_node(a, env) || self.eval_node(b, env),
            FormulaNode::Quant { kind, var, bound, body } => {
                let saved = env.get(var).cloned();
                let mut result = matches!(kind, QuantifierKind::Forall);
                for value in 0..=*bound {
                    env.insert(var.clone(), ExactInt::from(value as i64));
                    let truth = self.eval_node(body, env);
                    match kind {
                        QuantifierKind::Exists if truth => {
                            result = true;
                            break;
                        }
                        QuantifierKind::Forall if !truth => {
                            result = false;
                            break;
                        }
                        _ => {}
                    }
                }
                match saved {
                    Some(v) => env.insert(var.clone(), v),
                    None => env.remove(var),
                };
                result
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Mul(a, b) => write!(f, "({a} * {b})"),
            Term::Monus(a, b) => write!(f, "({a} monus {b})"),
            Term::Half(t) => write!(f, "half({t})"),
            Term::Pow2(v) => write!(f, "pow2({v})"),
        }
    }
}

impl fmt::Display for FormulaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaNode::Le(a, b) => write!(f, "{a} <= {b}"),
            FormulaNode::Eq(a, b) => write!(f, "{a} = {b}"),
            FormulaNode::Ge(a, b) => write!(f, "{a} >= {b}"),
            FormulaNode::Not(inner) => write!(f, "not ({inner})"),
            FormulaNode::And(a, b) => write!(f, "({a}) and ({b})"),
            FormulaNode::Or(a, b) => write!(f, "({a}) or ({b})"),
            FormulaNode::Quant { kind, var, bound, body } => {
                let kw = match kind {
                    QuantifierKind::Exists => "exists",
                    QuantifierKind::Forall => "forall",
                };
                write!(f, "{kw} {var} <= {bound} . ({body})")
            }
        }
    }
}
