//! Open formulas over naturals with truncated subtraction and halving:
//! parsing, residue-class polynomial normal forms, sign-invariant
//! decomposition of integer polynomials, and minimization of the satisfying
//! assignment.

mod ast;
mod decompose;
mod minsat;
mod mvpoly;
mod normalize;
mod parser;

pub use ast::{FormulaAst, FormulaNode, QuantifierKind, Term};
pub use decompose::{sign_decompose, SignDecomposition};
pub use minsat::{min_sat, min_sat_with, MinSatOptions};
pub use mvpoly::MultiPoly;
pub use normalize::{
    normalize_formula, normalize_formula_with, normalize_term, BoolComb, GuardedCase,
    GuardedTable, GuardedTree, NormalizeOptions, QuantifierSpec, ResidueBranch,
    ResidueNormalForm,
};
pub use parser::parse;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound variable {name:?} at byte {position}")]
    UnboundVariable { name: String, position: usize },
    #[error("quantifier over {name:?} at byte {position} has no concrete bound")]
    UnboundedQuantifier { name: String, position: usize },
    #[error("residue vector entry {got} is not below the modulus 2^{modulus_log2}")]
    InvalidResidue { got: u64, modulus_log2: u32 },
    #[error("residue vector has {got} entries for {expected} variables")]
    ResidueArity { expected: usize, got: usize },
    #[error("halving a power-of-two atom is not supported by the normal form")]
    HalfOfPow2,
    #[error("expected exactly one free variable, found {0:?}")]
    FreeVariableCount(Vec<String>),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}
