//! Residue-class polynomial normal forms.
//!
//! Splitting each variable `x` into `2^c * X + sigma` with `c` the halving
//! depth turns every `half` into an exact coefficient division and every
//! `monus` into a sign-guarded case split, leaving pure integer polynomials.
//! A formula then becomes, per residue vector, a (prenexed) quantifier prefix
//! over quotient variables and a Boolean combination of polynomial
//! inequalities `p >= 0`. Bounded quantifiers are decomposed the same way:
//! `u = 2^c * v + tau` with the residue folded into the matrix and the bound
//! carried by an explicit range guard.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::{FormulaAst, FormulaNode, QuantifierKind, Term};
use super::mvpoly::MultiPoly;
use super::FormulaError;
use crate::exact::ExactInt;

/// Cap on guarded-table leaves and on residue-branch counts.
const LEAF_BUDGET: usize = 1 << 12;
const BRANCH_BITS_BUDGET: u32 = 14;

/// A binary decision tree over monus guards: each split tests a guard
/// polynomial for `>= 0`, each leaf carries the value polynomial valid under
/// the decided signs. The flat guard/value table of a term is the list of
/// root-to-leaf paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardedTree {
    Leaf(MultiPoly),
    Split { guard: MultiPoly, if_nonneg: Box<GuardedTree>, if_neg: Box<GuardedTree> },
}

impl GuardedTree {
    fn leaf_count(&self) -> usize {
        match self {
            GuardedTree::Leaf(_) => 1,
            GuardedTree::Split { if_nonneg, if_neg, .. } => {
                if_nonneg.leaf_count() + if_neg.leaf_count()
            }
        }
    }

    fn combine(
        &self,
        other: &GuardedTree,
        op: &impl Fn(&MultiPoly, &MultiPoly) -> GuardedTree,
    ) -> GuardedTree {
        match self {
            GuardedTree::Leaf(a) => match other {
                GuardedTree::Leaf(b) => op(a, b),
                GuardedTree::Split { guard, if_nonneg, if_neg } => GuardedTree::Split {
                    guard: guard.clone(),
                    if_nonneg: Box::new(self.combine(if_nonneg, op)),
                    if_neg: Box::new(self.combine(if_neg, op)),
                },
            },
            GuardedTree::Split { guard, if_nonneg, if_neg } => GuardedTree::Split {
                guard: guard.clone(),
                if_nonneg: Box::new(if_nonneg.combine(other, op)),
                if_neg: Box::new(if_neg.combine(other, op)),
            },
        }
    }

    fn map_leaves(
        &self,
        f: &mut impl FnMut(&MultiPoly) -> Result<GuardedTree, FormulaError>,
    ) -> Result<GuardedTree, FormulaError> {
        match self {
            GuardedTree::Leaf(p) => f(p),
            GuardedTree::Split { guard, if_nonneg, if_neg } => Ok(GuardedTree::Split {
                guard: guard.clone(),
                if_nonneg: Box::new(if_nonneg.map_leaves(f)?),
                if_neg: Box::new(if_neg.map_leaves(f)?),
            }),
        }
    }

    fn eval(&self, values: &[ExactInt]) -> ExactInt {
        match self {
            GuardedTree::Leaf(p) => p.eval(values),
            GuardedTree::Split { guard, if_nonneg, if_neg } => {
                if guard.eval(values).is_negative() {
                    if_neg.eval(values)
                } else {
                    if_nonneg.eval(values)
                }
            }
        }
    }
}

/// One root-to-leaf path of a guarded tree: the guard polynomials with their
/// decided signs (`true` meaning `>= 0`), and the value polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedCase {
    pub constraints: Vec<(MultiPoly, bool)>,
    pub value: MultiPoly,
}

/// Normal form of a term under a fixed residue vector: guards from monus case
/// splits, polynomial values elsewhere. Evaluation takes quotient values,
/// i.e. `eval(X)` equals the term at `2^c * X + sigma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedTable {
    pub modulus_log2: u32,
    pub vars: Vec<String>,
    pub residues: Vec<u64>,
    pub tree: GuardedTree,
}

impl GuardedTable {
    pub fn cases(&self) -> Vec<GuardedCase> {
        let mut out = Vec::new();
        collect_cases(&self.tree, &mut Vec::new(), &mut out);
        out
    }

    pub fn eval(&self, quotients: &[ExactInt]) -> ExactInt {
        self.tree.eval(quotients)
    }

    /// Number of distinct monus guards along the deepest path.
    pub fn guard_depth(&self) -> usize {
        fn depth(t: &GuardedTree) -> usize {
            match t {
                GuardedTree::Leaf(_) => 0,
                GuardedTree::Split { if_nonneg, if_neg, .. } => {
                    1 + depth(if_nonneg).max(depth(if_neg))
                }
            }
        }
        depth(&self.tree)
    }
}

fn collect_cases(
    tree: &GuardedTree,
    path: &mut Vec<(MultiPoly, bool)>,
    out: &mut Vec<GuardedCase>,
) {
    match tree {
        GuardedTree::Leaf(p) => out.push(GuardedCase { constraints: path.clone(), value: p.clone() }),
        GuardedTree::Split { guard, if_nonneg, if_neg } => {
            path.push((guard.clone(), true));
            collect_cases(if_nonneg, path, out);
            path.pop();
            path.push((guard.clone(), false));
            collect_cases(if_neg, path, out);
            path.pop();
        }
    }
}

/// How a source variable appears inside the polynomials.
#[derive(Clone, Debug)]
enum Binding {
    /// Value is `2^c * var(index) + residue`.
    Quotient { index: usize, residue: u64 },
}

struct TermCtx<'a> {
    modulus_log2: u32,
    n_vars: usize,
    bindings: &'a HashMap<String, Binding>,
    /// For quantified `u` with `pow2(u)` in scope: (atom var index, residue of u).
    pow_atoms: &'a HashMap<String, (usize, u64)>,
}

fn normalize_term_node(term: &Term, ctx: &TermCtx<'_>) -> Result<GuardedTree, FormulaError> {
    let tree = match term {
        Term::Const(c) => {
            GuardedTree::Leaf(MultiPoly::constant(ctx.n_vars, ExactInt::from(*c as i64)))
        }
        Term::Var(name) => {
            let Binding::Quotient { index, residue } = ctx
                .bindings
                .get(name)
                .unwrap_or_else(|| panic!("unbound variable {name} reached normalization"));
            GuardedTree::Leaf(
                MultiPoly::var(ctx.n_vars, *index)
                    .scale(&ExactInt::two_pow(ctx.modulus_log2 as u64))
                    .add_constant(&ExactInt::from(*residue as i64)),
            )
        }
        Term::Pow2(name) => {
            let (atom_index, residue) = ctx
                .pow_atoms
                .get(name)
                .unwrap_or_else(|| panic!("pow2 argument {name} has no atom"));
            // 2^u with u = 2^c v + tau is 2^tau * A^(2^c) for the atom A = 2^v.
            let exp = 1u32 << ctx.modulus_log2;
            let atom = MultiPoly::var(ctx.n_vars, *atom_index).pow(exp);
            GuardedTree::Leaf(atom.scale(&ExactInt::two_pow(*residue)))
        }
        Term::Add(a, b) => {
            let left = normalize_term_node(a, ctx)?;
            let right = normalize_term_node(b, ctx)?;
            left.combine(&right, &|p, q| GuardedTree::Leaf(p.add(q)))
        }
        Term::Mul(a, b) => {
            let left = normalize_term_node(a, ctx)?;
            let right = normalize_term_node(b, ctx)?;
            left.combine(&right, &|p, q| GuardedTree::Leaf(p.mul(q)))
        }
        Term::Monus(a, b) => {
            let left = normalize_term_node(a, ctx)?;
            let right = normalize_term_node(b, ctx)?;
            left.combine(&right, &|p, q| {
                let diff = p.sub(q);
                match diff.as_constant() {
                    Some(c) if !c.is_negative() => GuardedTree::Leaf(diff),
                    Some(_) => GuardedTree::Leaf(MultiPoly::zero(p.n_vars())),
                    None => GuardedTree::Split {
                        guard: diff.clone(),
                        if_nonneg: Box::new(GuardedTree::Leaf(diff)),
                        if_neg: Box::new(GuardedTree::Leaf(MultiPoly::zero(p.n_vars()))),
                    },
                }
            })
        }
        Term::Half(inner) => {
            let child = normalize_term_node(inner, ctx)?;
            let atom_indices: Vec<usize> =
                ctx.pow_atoms.values().map(|(idx, _)| *idx).collect();
            child.map_leaves(&mut |p| {
                if atom_indices.iter().any(|&idx| p.uses_var(idx)) {
                    return Err(FormulaError::HalfOfPow2);
                }
                let parity = {
                    let (_, r) = p.constant_term().div_rem_floor(&ExactInt::from(2));
                    r
                };
                let halved = p.halve(&parity).expect(
                    "halving invariant violated: residue substitution must leave even coefficients",
                );
                Ok(GuardedTree::Leaf(halved))
            })?
        }
    };
    if tree.leaf_count() > LEAF_BUDGET {
        return Err(FormulaError::BudgetExceeded(format!(
            "guarded table grew past {LEAF_BUDGET} cases"
        )));
    }
    Ok(tree)
}

/// Normalizes a quantifier-free term over its free variables at the residue
/// vector `residues` (one entry per variable, in order of first occurrence,
/// each below `2^c` where `c` is the term's halving depth).
pub fn normalize_term(term: &Term, residues: &[u64]) -> Result<GuardedTable, FormulaError> {
    let vars = term.variables();
    if has_pow2(term) {
        let name = first_pow2_name(term).unwrap_or_default();
        return Err(FormulaError::UnboundVariable { name, position: 0 });
    }
    if residues.len() != vars.len() {
        return Err(FormulaError::ResidueArity { expected: vars.len(), got: residues.len() });
    }
    let modulus_log2 = term.floor_depth();
    let modulus = 1u64 << modulus_log2;
    for &r in residues {
        if r >= modulus {
            return Err(FormulaError::InvalidResidue { got: r, modulus_log2 });
        }
    }
    let bindings: HashMap<String, Binding> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), Binding::Quotient { index: i, residue: residues[i] }))
        .collect();
    let pow_atoms = HashMap::new();
    let ctx = TermCtx { modulus_log2, n_vars: vars.len(), bindings: &bindings, pow_atoms: &pow_atoms };
    let tree = normalize_term_node(term, &ctx)?;
    Ok(GuardedTable { modulus_log2, vars, residues: residues.to_vec(), tree })
}

fn has_pow2(term: &Term) -> bool {
    match term {
        Term::Const(_) | Term::Var(_) => false,
        Term::Pow2(_) => true,
        Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => has_pow2(a) || has_pow2(b),
        Term::Half(t) => has_pow2(t),
    }
}

fn first_pow2_name(term: &Term) -> Option<String> {
    match term {
        Term::Const(_) | Term::Var(_) => None,
        Term::Pow2(name) => Some(name.clone()),
        Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => {
            first_pow2_name(a).or_else(|| first_pow2_name(b))
        }
        Term::Half(t) => first_pow2_name(t),
    }
}

/// Boolean combinations of integer polynomial inequalities `p >= 0`.
/// Negation is absorbed into the polynomials (`not (p >= 0)` is
/// `-p - 1 >= 0`), so no negation node is needed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoolComb {
    True,
    False,
    /// The inequality `poly >= 0`.
    Ineq(MultiPoly),
    And(Vec<BoolComb>),
    Or(Vec<BoolComb>),
}

impl BoolComb {
    fn ineq(poly: MultiPoly) -> BoolComb {
        match poly.as_constant() {
            Some(c) => {
                if c.is_negative() {
                    BoolComb::False
                } else {
                    BoolComb::True
                }
            }
            None => BoolComb::Ineq(poly),
        }
    }

    fn and_all(items: Vec<BoolComb>) -> BoolComb {
        let mut flat: Vec<BoolComb> = Vec::new();
        for item in items {
            match item {
                BoolComb::True => {}
                BoolComb::False => return BoolComb::False,
                BoolComb::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut seen: Vec<BoolComb> = Vec::new();
        flat.retain(|item| {
            if seen.contains(item) {
                false
            } else {
                seen.push(item.clone());
                true
            }
        });
        match flat.len() {
            0 => BoolComb::True,
            1 => flat.pop().unwrap(),
            _ => BoolComb::And(flat),
        }
    }

    fn or_all(items: Vec<BoolComb>) -> BoolComb {
        let mut flat: Vec<BoolComb> = Vec::new();
        for item in items {
            match item {
                BoolComb::False => {}
                BoolComb::True => return BoolComb::True,
                BoolComb::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut seen: Vec<BoolComb> = Vec::new();
        flat.retain(|item| {
            if seen.contains(item) {
                false
            } else {
                seen.push(item.clone());
                true
            }
        });
        match flat.len() {
            0 => BoolComb::False,
            1 => flat.pop().unwrap(),
            _ => BoolComb::Or(flat),
        }
    }

    /// Negation in place, using `-p - 1 >= 0` for `not (p >= 0)`.
    fn negate(&self) -> BoolComb {
        match self {
            BoolComb::True => BoolComb::False,
            BoolComb::False => BoolComb::True,
            BoolComb::Ineq(p) => {
                BoolComb::ineq(p.neg().add_constant(&-ExactInt::one()))
            }
            BoolComb::And(items) => BoolComb::or_all(items.iter().map(|i| i.negate()).collect()),
            BoolComb::Or(items) => BoolComb::and_all(items.iter().map(|i| i.negate()).collect()),
        }
    }

    pub fn eval(&self, values: &[ExactInt]) -> bool {
        match self {
            BoolComb::True => true,
            BoolComb::False => false,
            BoolComb::Ineq(p) => !p.eval(values).is_negative(),
            BoolComb::And(items) => items.iter().all(|i| i.eval(values)),
            BoolComb::Or(items) => items.iter().any(|i| i.eval(values)),
        }
    }

    /// All inequality polynomials, in deterministic traversal order.
    pub fn polynomials(&self) -> Vec<&MultiPoly> {
        let mut out = Vec::new();
        self.collect_polys(&mut out);
        out
    }

    fn collect_polys<'a>(&'a self, out: &mut Vec<&'a MultiPoly>) {
        match self {
            BoolComb::True | BoolComb::False => {}
            BoolComb::Ineq(p) => out.push(p),
            BoolComb::And(items) | BoolComb::Or(items) => {
                for item in items {
                    item.collect_polys(out);
                }
            }
        }
    }

    fn render(&self, names: &[String]) -> String {
        match self {
            BoolComb::True => "true".to_owned(),
            BoolComb::False => "false".to_owned(),
            BoolComb::Ineq(p) => format!("{} >= 0", p.render(names)),
            BoolComb::And(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.render(names)).collect();
                format!("({})", parts.join(" and "))
            }
            BoolComb::Or(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.render(names)).collect();
                format!("({})", parts.join(" or "))
            }
        }
    }
}

/// One entry of a residue branch's quantifier prefix, ranging over a quotient
/// variable `v <= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantifierSpec {
    pub kind: QuantifierKind,
    pub name: String,
    pub bound: u64,
    /// Position of this quantifier's variable in the polynomial registry.
    pub var_index: usize,
    /// Position of the `2^v` atom variable, when `pow2` of the original
    /// variable occurs in the matrix.
    pub pow_atom_index: Option<usize>,
}

/// The normal form restricted to one residue vector of the free variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueBranch {
    pub residues: Vec<u64>,
    /// Names of all polynomial variables: free quotients first, then
    /// quantifier quotients and power atoms.
    pub var_names: Vec<String>,
    pub quantifiers: Vec<QuantifierSpec>,
    pub matrix: BoolComb,
}

/// Residue-class polynomial normal form of a formula: for inputs with
/// `x_i = 2^c * X_i + sigma_i`, the branch for `sigma` holds exactly when the
/// prenex prefix over quotient variables satisfies its matrix of polynomial
/// inequalities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueNormalForm {
    pub modulus_log2: u32,
    pub free_vars: Vec<String>,
    pub branches: Vec<ResidueBranch>,
}

#[derive(Clone, Debug, Default)]
pub struct NormalizeOptions {
    /// Collapse each branch matrix to a single inequality behind extra
    /// bound-1 quantifiers. Off by default: it inflates degrees and exists to
    /// match the strictest normal-form shape.
    pub collapse_single_inequality: bool,
}

struct PrefixEntry {
    kind: QuantifierKind,
    name: String,
    original_bound: u64,
    var_index: usize,
    pow_atom_index: Option<usize>,
}

/// Normalizes with default options.
pub fn normalize_formula(phi: &FormulaAst) -> Result<ResidueNormalForm, FormulaError> {
    normalize_formula_with(phi, &NormalizeOptions::default())
}

pub fn normalize_formula_with(
    phi: &FormulaAst,
    options: &NormalizeOptions,
) -> Result<ResidueNormalForm, FormulaError> {
    let modulus_log2 = phi.floor_depth();
    let free_vars = phi.free_vars.clone();
    let k = free_vars.len();

    // Prenex: rename quantified variables apart and hoist them to a prefix.
    let mut prefix_raw: Vec<(QuantifierKind, String, u64)> = Vec::new();
    let mut taken: Vec<String> = free_vars.clone();
    let matrix_ast = hoist(&phi.root, true, &mut HashMap::new(), &mut prefix_raw, &mut taken);

    let branch_bits = modulus_log2 as u64 * (k + prefix_raw.len()) as u64;
    if branch_bits > BRANCH_BITS_BUDGET as u64 {
        return Err(FormulaError::BudgetExceeded(format!(
            "2^{branch_bits} residue combinations exceed the branch budget"
        )));
    }

    // Variable registry: free quotients, quantifier quotients, power atoms.
    // Quotient variables are rendered primed when the modulus is nontrivial:
    // x = 2^c * x' + sigma.
    let quotient_name = |name: &str| {
        if modulus_log2 == 0 { name.to_owned() } else { format!("{name}'") }
    };
    let mut var_names: Vec<String> = free_vars.iter().map(|v| quotient_name(v)).collect();
    let mut prefix: Vec<PrefixEntry> = Vec::new();
    for (kind, name, bound) in &prefix_raw {
        prefix.push(PrefixEntry {
            kind: *kind,
            name: name.clone(),
            original_bound: *bound,
            var_index: var_names.len(),
            pow_atom_index: None,
        });
        var_names.push(quotient_name(name));
    }
    for entry in &mut prefix {
        if matrix_uses_pow2(&matrix_ast, &entry.name) {
            entry.pow_atom_index = Some(var_names.len());
            var_names.push(format!("2^{}", quotient_name(&entry.name)));
        }
    }
    let n_vars = var_names.len();

    let modulus = 1u64 << modulus_log2;
    let mut branches = Vec::new();
    let mut residues = vec![0u64; k];
    loop {
        let bindings: HashMap<String, Binding> = free_vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), Binding::Quotient { index: i, residue: residues[i] }))
            .collect();
        let matrix = fold_quantifiers(
            &matrix_ast,
            &prefix,
            0,
            modulus_log2,
            n_vars,
            &bindings,
            &mut Vec::new(),
        )?;
        let quantifiers: Vec<QuantifierSpec> = prefix
            .iter()
            .map(|e| QuantifierSpec {
                kind: e.kind,
                name: quotient_name(&e.name),
                bound: e.original_bound >> modulus_log2,
                var_index: e.var_index,
                pow_atom_index: e.pow_atom_index,
            })
            .collect();
        let mut branch = ResidueBranch {
            residues: residues.clone(),
            var_names: var_names.clone(),
            quantifiers,
            matrix,
        };
        if options.collapse_single_inequality {
            collapse_branch(&mut branch);
        }
        branches.push(branch);
        // Next residue vector in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(ResidueNormalForm { modulus_log2, free_vars, branches });
            }
            i -= 1;
            residues[i] += 1;
            if residues[i] < modulus {
                break;
            }
            residues[i] = 0;
        }
        if k == 0 {
            return Ok(ResidueNormalForm { modulus_log2, free_vars, branches });
        }
    }
}

/// Matrix of a prenexed formula: atoms with polarity, conjunction,
/// disjunction.
enum MatrixAst {
    Atom { negated: bool, node: FormulaNode },
    And(Vec<MatrixAst>),
    Or(Vec<MatrixAst>),
}

fn hoist(
    node: &FormulaNode,
    positive: bool,
    rename: &mut HashMap<String, Vec<String>>,
    prefix: &mut Vec<(QuantifierKind, String, u64)>,
    taken: &mut Vec<String>,
) -> MatrixAst {
    match node {
        FormulaNode::Le(a, b) => MatrixAst::Atom {
            negated: !positive,
            node: FormulaNode::Le(rename_term(a, rename), rename_term(b, rename)),
        },
        FormulaNode::Eq(a, b) => MatrixAst::Atom {
            negated: !positive,
            node: FormulaNode::Eq(rename_term(a, rename), rename_term(b, rename)),
        },
        FormulaNode::Ge(a, b) => MatrixAst::Atom {
            negated: !positive,
            node: FormulaNode::Ge(rename_term(a, rename), rename_term(b, rename)),
        },
        FormulaNode::Not(inner) => hoist(inner, !positive, rename, prefix, taken),
        FormulaNode::And(a, b) => {
            let left = hoist(a, positive, rename, prefix, taken);
            let right = hoist(b, positive, rename, prefix, taken);
            if positive {
                MatrixAst::And(vec![left, right])
            } else {
                MatrixAst::Or(vec![left, right])
            }
        }
        FormulaNode::Or(a, b) => {
            let left = hoist(a, positive, rename, prefix, taken);
            let right = hoist(b, positive, rename, prefix, taken);
            if positive {
                MatrixAst::Or(vec![left, right])
            } else {
                MatrixAst::And(vec![left, right])
            }
        }
        FormulaNode::Quant { kind, var, bound, body } => {
            let effective = match (kind, positive) {
                (QuantifierKind::Exists, true) | (QuantifierKind::Forall, false) => {
                    QuantifierKind::Exists
                }
                _ => QuantifierKind::Forall,
            };
            // Rename apart from every free variable and every quantifier seen
            // so far, so the prenex prefix never captures.
            let fresh = if taken.iter().any(|n| n == var) {
                let mut i = 1usize;
                loop {
                    let candidate = format!("{var}_{i}");
                    if !taken.iter().any(|n| n == &candidate) {
                        break candidate;
                    }
                    i += 1;
                }
            } else {
                var.clone()
            };
            taken.push(fresh.clone());
            prefix.push((effective, fresh.clone(), *bound));
            rename.entry(var.clone()).or_default().push(fresh);
            let matrix = hoist(body, positive, rename, prefix, taken);
            rename.get_mut(var).unwrap().pop();
            matrix
        }
    }
}

fn rename_term(term: &Term, rename: &HashMap<String, Vec<String>>) -> Term {
    match term {
        Term::Const(c) => Term::Const(*c),
        Term::Var(name) => Term::Var(current_name(name, rename)),
        Term::Pow2(name) => Term::Pow2(current_name(name, rename)),
        Term::Add(a, b) => {
            Term::Add(Box::new(rename_term(a, rename)), Box::new(rename_term(b, rename)))
        }
        Term::Mul(a, b) => {
            Term::Mul(Box::new(rename_term(a, rename)), Box::new(rename_term(b, rename)))
        }
        Term::Monus(a, b) => {
            Term::Monus(Box::new(rename_term(a, rename)), Box::new(rename_term(b, rename)))
        }
        Term::Half(t) => Term::Half(Box::new(rename_term(t, rename))),
    }
}

fn current_name(name: &str, rename: &HashMap<String, Vec<String>>) -> String {
    rename
        .get(name)
        .and_then(|stack| stack.last())
        .cloned()
        .unwrap_or_else(|| name.to_owned())
}

fn matrix_uses_pow2(matrix: &MatrixAst, var: &str) -> bool {
    match matrix {
        MatrixAst::Atom { node, .. } => match node {
            FormulaNode::Le(a, b) | FormulaNode::Eq(a, b) | FormulaNode::Ge(a, b) => {
                term_uses_pow2(a, var) || term_uses_pow2(b, var)
            }
            _ => unreachable!("matrix atoms are comparisons"),
        },
        MatrixAst::And(items) | MatrixAst::Or(items) => {
            items.iter().any(|i| matrix_uses_pow2(i, var))
        }
    }
}

fn term_uses_pow2(term: &Term, var: &str) -> bool {
    match term {
        Term::Const(_) | Term::Var(_) => false,
        Term::Pow2(name) => name == var,
        Term::Add(a, b) | Term::Mul(a, b) | Term::Monus(a, b) => {
            term_uses_pow2(a, var) || term_uses_pow2(b, var)
        }
        Term::Half(t) => term_uses_pow2(t, var),
    }
}

// Builds the branch matrix by choosing a residue for each quantifier in turn,
// outermost first; an existential arms into a disjunction over residues, a
// universal into a conjunction, each guarded by the original range condition.
fn fold_quantifiers(
    matrix: &MatrixAst,
    prefix: &[PrefixEntry],
    level: usize,
    modulus_log2: u32,
    n_vars: usize,
    bindings: &HashMap<String, Binding>,
    chosen: &mut Vec<u64>,
) -> Result<BoolComb, FormulaError> {
    if level == prefix.len() {
        let mut full_bindings = bindings.clone();
        let mut pow_atoms = HashMap::new();
        for (entry, &tau) in prefix.iter().zip(chosen.iter()) {
            full_bindings.insert(
                entry.name.clone(),
                Binding::Quotient { index: entry.var_index, residue: tau },
            );
            if let Some(atom) = entry.pow_atom_index {
                pow_atoms.insert(entry.name.clone(), (atom, tau));
            }
        }
        let ctx = TermCtx { modulus_log2, n_vars, bindings: &full_bindings, pow_atoms: &pow_atoms };
        return build_matrix(matrix, &ctx);
    }
    let entry = &prefix[level];
    let modulus = 1u64 << modulus_log2;
    if modulus == 1 {
        chosen.push(0);
        let inner =
            fold_quantifiers(matrix, prefix, level + 1, modulus_log2, n_vars, bindings, chosen)?;
        chosen.pop();
        return Ok(inner);
    }
    let mut arms = Vec::new();
    for tau in 0..modulus {
        chosen.push(tau);
        let inner =
            fold_quantifiers(matrix, prefix, level + 1, modulus_log2, n_vars, bindings, chosen)?;
        chosen.pop();
        // Range condition: 2^c v + tau <= original bound.
        let range = MultiPoly::var(n_vars, entry.var_index)
            .scale(&-ExactInt::two_pow(modulus_log2 as u64))
            .add_constant(&ExactInt::from(entry.original_bound as i64))
            .add_constant(&-ExactInt::from(tau as i64));
        let range = BoolComb::ineq(range);
        arms.push(match entry.kind {
            QuantifierKind::Exists => BoolComb::and_all(vec![range, inner]),
            QuantifierKind::Forall => BoolComb::or_all(vec![range.negate(), inner]),
        });
    }
    Ok(match entry.kind {
        QuantifierKind::Exists => BoolComb::or_all(arms),
        QuantifierKind::Forall => BoolComb::and_all(arms),
    })
}

fn build_matrix(matrix: &MatrixAst, ctx: &TermCtx<'_>) -> Result<BoolComb, FormulaError> {
    match matrix {
        MatrixAst::And(items) => {
            let parts = items.iter().map(|i| build_matrix(i, ctx)).collect::<Result<_, _>>()?;
            Ok(BoolComb::and_all(parts))
        }
        MatrixAst::Or(items) => {
            let parts = items.iter().map(|i| build_matrix(i, ctx)).collect::<Result<_, _>>()?;
            Ok(BoolComb::or_all(parts))
        }
        MatrixAst::Atom { negated, node } => {
            let (lhs, rhs) = match node {
                FormulaNode::Le(a, b) | FormulaNode::Eq(a, b) | FormulaNode::Ge(a, b) => (a, b),
                _ => unreachable!("matrix atoms are comparisons"),
            };
            let left = normalize_term_node(lhs, ctx)?;
            let right = normalize_term_node(rhs, ctx)?;
            let mut left_cases = Vec::new();
            collect_cases(&left, &mut Vec::new(), &mut left_cases);
            let mut right_cases = Vec::new();
            collect_cases(&right, &mut Vec::new(), &mut right_cases);
            let mut alternatives = Vec::new();
            for lc in &left_cases {
                for rc in &right_cases {
                    let mut clauses = Vec::new();
                    for (guard, nonneg) in lc.constraints.iter().chain(&rc.constraints) {
                        let cond = BoolComb::ineq(guard.clone());
                        clauses.push(if *nonneg { cond } else { cond.negate() });
                    }
                    clauses.push(comparison(node, *negated, &lc.value, &rc.value));
                    alternatives.push(BoolComb::and_all(clauses));
                }
            }
            Ok(BoolComb::or_all(alternatives))
        }
    }
}

// The comparison `lhs op rhs` (or its negation) as polynomial inequalities.
fn comparison(node: &FormulaNode, negated: bool, lhs: &MultiPoly, rhs: &MultiPoly) -> BoolComb {
    let minus_one = -ExactInt::one();
    match (node, negated) {
        (FormulaNode::Le(..), false) => BoolComb::ineq(rhs.sub(lhs)),
        (FormulaNode::Le(..), true) => BoolComb::ineq(lhs.sub(rhs).add_constant(&minus_one)),
        (FormulaNode::Ge(..), false) => BoolComb::ineq(lhs.sub(rhs)),
        (FormulaNode::Ge(..), true) => BoolComb::ineq(rhs.sub(lhs).add_constant(&minus_one)),
        (FormulaNode::Eq(..), false) => BoolComb::and_all(vec![
            BoolComb::ineq(rhs.sub(lhs)),
            BoolComb::ineq(lhs.sub(rhs)),
        ]),
        (FormulaNode::Eq(..), true) => BoolComb::or_all(vec![
            BoolComb::ineq(lhs.sub(rhs).add_constant(&minus_one)),
            BoolComb::ineq(rhs.sub(lhs).add_constant(&minus_one)),
        ]),
        _ => unreachable!("matrix atoms are comparisons"),
    }
}

// Rewrites the branch matrix into a single inequality behind extra bound-1
// quantifiers: `p and q` becomes `forall t <= 1 . t*p + (1-t)^2 * q >= 0`,
// disjunction dualizes through negation.
fn collapse_branch(branch: &mut ResidueBranch) {
    let base = branch.var_names.len();
    let mut fresh = 0usize;
    let (prefix, poly) = collapse_to_poly(&branch.matrix, base, &mut fresh);
    assert_eq!(prefix.len(), fresh);
    for (i, kind) in prefix.iter().enumerate() {
        let name = format!("t{i}");
        branch.var_names.push(name.clone());
        branch.quantifiers.push(QuantifierSpec {
            kind: *kind,
            name,
            bound: 1,
            var_index: base + i,
            pow_atom_index: None,
        });
    }
    branch.matrix = BoolComb::ineq(widen(&poly, base + fresh));
}

// Collapses to (quantifier kinds for fresh bound-1 variables in allocation
// order, polynomial). Fresh variable i lives at registry index base + i.
fn collapse_to_poly(
    comb: &BoolComb,
    base: usize,
    fresh: &mut usize,
) -> (Vec<QuantifierKind>, MultiPoly) {
    match comb {
        BoolComb::True => (vec![], MultiPoly::zero(base)),
        BoolComb::False => (vec![], MultiPoly::constant(base, -ExactInt::one())),
        BoolComb::Ineq(p) => (vec![], p.clone()),
        BoolComb::And(items) => {
            let mut iter = items.iter();
            let first = iter.next().expect("nonempty conjunction");
            let (mut prefix, mut poly) = collapse_to_poly(first, base, fresh);
            for item in iter {
                let (pre2, p2) = collapse_to_poly(item, base, fresh);
                let t_index = base + *fresh;
                *fresh += 1;
                let n = poly.n_vars().max(p2.n_vars()).max(t_index + 1);
                let a = widen(&poly, n);
                let b = widen(&p2, n);
                let t = MultiPoly::var(n, t_index);
                let one_minus_t = t.neg().add_constant(&ExactInt::one());
                let combined = t.mul(&a).add(&one_minus_t.mul(&one_minus_t).mul(&b));
                prefix.extend(pre2);
                prefix.push(QuantifierKind::Forall);
                poly = combined;
            }
            (prefix, poly)
        }
        BoolComb::Or(items) => {
            // p or q  ==  not (not p and not q); negation flips quantifiers.
            let negated = BoolComb::And(items.iter().map(|i| i.negate()).collect());
            let (prefix, poly) = collapse_to_poly(&negated, base, fresh);
            let flipped = prefix
                .into_iter()
                .map(|k| match k {
                    QuantifierKind::Exists => QuantifierKind::Forall,
                    QuantifierKind::Forall => QuantifierKind::Exists,
                })
                .collect();
            (flipped, poly.neg().add_constant(&-ExactInt::one()))
        }
    }
}

fn widen(p: &MultiPoly, n: usize) -> MultiPoly {
    if p.n_vars() == n {
        return p.clone();
    }
    let pairs: Vec<(Vec<u32>, ExactInt)> = p.clone().into();
    let mut out = MultiPoly::zero(n);
    for (mut exps, c) in pairs {
        exps.resize(n, 0);
        out = out.add(&MultiPoly::from(vec![(exps, c)]));
    }
    out
}

impl ResidueNormalForm {
    /// Evaluates the normal form at natural values of the free variables by
    /// selecting the residue branch and enumerating the quantifier prefix.
    pub fn eval(&self, free_values: &[ExactInt]) -> bool {
        assert_eq!(free_values.len(), self.free_vars.len());
        let modulus = ExactInt::two_pow(self.modulus_log2 as u64);
        let mut residues = Vec::with_capacity(free_values.len());
        let mut quotients = Vec::with_capacity(free_values.len());
        for v in free_values {
            assert!(!v.is_negative(), "inputs are naturals");
            let (q, r) = v.div_rem_floor(&modulus);
            residues.push(r.to_usize().unwrap() as u64);
            quotients.push(q);
        }
        let branch = self
            .branches
            .iter()
            .find(|b| b.residues == residues)
            .expect("every residue vector has a branch");
        let mut values = vec![ExactInt::zero(); branch.var_names.len()];
        values[..quotients.len()].clone_from_slice(&quotients);
        Self::eval_prefix(branch, 0, &mut values)
    }

    fn eval_prefix(branch: &ResidueBranch, level: usize, values: &mut Vec<ExactInt>) -> bool {
        if level == branch.quantifiers.len() {
            return branch.matrix.eval(values);
        }
        let q = &branch.quantifiers[level];
        for v in 0..=q.bound {
            values[q.var_index] = ExactInt::from(v as i64);
            if let Some(atom) = q.pow_atom_index {
                values[atom] = ExactInt::two_pow(v);
            }
            let truth = Self::eval_prefix(branch, level + 1, values);
            match q.kind {
                QuantifierKind::Exists if truth => return true,
                QuantifierKind::Forall if !truth => return false,
                _ => {}
            }
        }
        matches!(q.kind, QuantifierKind::Forall)
    }

    /// Structured text rendering, one branch per paragraph.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("modulus 2^{}\n", self.modulus_log2));
        for branch in &self.branches {
            let residue_desc: Vec<String> = self
                .free_vars
                .iter()
                .zip(&branch.residues)
                .zip(&branch.var_names)
                .map(|((v, r), q)| {
                    if self.modulus_log2 == 0 {
                        format!("all {v}")
                    } else {
                        format!("{v} = {}*{q} + {r}", 1u64 << self.modulus_log2)
                    }
                })
                .collect();
            out.push_str(&format!("branch [{}]:\n", residue_desc.join(", ")));
            for q in &branch.quantifiers {
                let kw = match q.kind {
                    QuantifierKind::Exists => "exists",
                    QuantifierKind::Forall => "forall",
                };
                out.push_str(&format!("  {kw} {} <= {}\n", q.name, q.bound));
            }
            out.push_str(&format!("  {}\n", branch.matrix.render(&branch.var_names)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::parser::parse;
    use crate::exact::int;
    use std::collections::HashMap as Map;

    fn eval_term(term: &Term, x: i64) -> ExactInt {
        term.eval(&Map::from([("x".to_owned(), int(x))]))
    }

    #[test]
    fn half_of_variable_both_residues() {
        let t = Term::Half(Box::new(Term::Var("x".into())));
        for sigma in [0u64, 1] {
            let table = normalize_term(&t, &[sigma]).unwrap();
            assert_eq!(table.guard_depth(), 0);
            // floor((2X + sigma)/2) = X for sigma in {0, 1}.
            for x in 0..8i64 {
                assert_eq!(table.eval(&[int(x)]), int(x));
            }
        }
    }

    #[test]
    fn monus_times_half_matches_direct_evaluation() {
        let t = Term::Mul(
            Box::new(Term::Monus(Box::new(Term::Var("x".into())), Box::new(Term::Const(3)))),
            Box::new(Term::Half(Box::new(Term::Var("x".into())))),
        );
        for x in 0..1024i64 {
            let sigma = (x % 2) as u64;
            let table = normalize_term(&t, &[sigma]).unwrap();
            let quotient = int(x / 2);
            assert_eq!(table.eval(&[quotient]), eval_term(&t, x), "x = {x}");
        }
    }

    #[test]
    fn guarded_table_growth_is_budgeted() {
        // A variable-dependent subtrahend splits every existing case, so each
        // monus doubles the table (the first one folds to a constant);
        // fourteen of them exceed the cap.
        let mut t = Term::Var("x".into());
        for k in 1..=14u64 {
            let sub = Term::Add(Box::new(Term::Var("x".into())), Box::new(Term::Const(k)));
            t = Term::Monus(Box::new(t), Box::new(sub));
        }
        assert!(matches!(normalize_term(&t, &[0]), Err(FormulaError::BudgetExceeded(_))));
    }

    #[test]
    fn residue_validation() {
        let t = Term::Half(Box::new(Term::Var("x".into())));
        assert!(matches!(
            normalize_term(&t, &[2]),
            Err(FormulaError::InvalidResidue { got: 2, modulus_log2: 1 })
        ));
        assert!(matches!(
            normalize_term(&t, &[0, 1]),
            Err(FormulaError::ResidueArity { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn evenness_normal_form() {
        let phi = parse("x = 2 * half(x)").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        assert_eq!(rnf.modulus_log2, 1);
        assert_eq!(rnf.branches.len(), 2);
        assert_eq!(rnf.branches[0].matrix, BoolComb::True);
        assert_eq!(rnf.branches[1].matrix, BoolComb::False);
    }

    #[test]
    fn monus_atom_agrees_exhaustively() {
        let phi = parse("(x monus 5) >= 1").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        for x in 0..4096i64 {
            assert_eq!(rnf.eval(&[int(x)]), phi.eval(&Map::from([("x".to_owned(), int(x))])));
        }
    }

    #[test]
    fn quantified_formula_with_depth_two() {
        let phi = parse("exists u <= 9 . half(half(x + u)) = u").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        assert_eq!(rnf.modulus_log2, 2);
        assert_eq!(rnf.branches.len(), 4);
        for x in 0..4096i64 {
            assert_eq!(
                rnf.eval(&[int(x)]),
                phi.eval(&Map::from([("x".to_owned(), int(x))])),
                "x = {x}"
            );
        }
    }

    #[test]
    fn pow2_atom_in_matrix() {
        let phi = parse("exists u <= 10 . x = pow2(u)").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        for x in 0..2048i64 {
            assert_eq!(
                rnf.eval(&[int(x)]),
                phi.eval(&Map::from([("x".to_owned(), int(x))])),
                "x = {x}"
            );
        }
    }

    #[test]
    fn collapse_produces_single_inequality_and_preserves_semantics() {
        let phi = parse("(x monus 5) >= 1 and x <= 20 or x = 2").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        let collapsed = normalize_formula_with(
            &phi,
            &NormalizeOptions { collapse_single_inequality: true },
        )
        .unwrap();
        for branch in &collapsed.branches {
            assert!(matches!(branch.matrix, BoolComb::Ineq(_) | BoolComb::True | BoolComb::False));
        }
        for x in 0..512i64 {
            assert_eq!(rnf.eval(&[int(x)]), collapsed.eval(&[int(x)]), "x = {x}");
        }
    }

    #[test]
    fn pow2_atom_under_nonzero_modulus() {
        // half forces modulus 2, so 2^u becomes 2^tau * A^2 for the atom A = 2^u'.
        let phi = parse("exists u <= 6 . half(x) = pow2(u)").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        assert_eq!(rnf.modulus_log2, 1);
        for x in 0..512i64 {
            assert_eq!(
                rnf.eval(&[int(x)]),
                phi.eval(&Map::from([("x".to_owned(), int(x))])),
                "x = {x}"
            );
        }
    }

    #[test]
    fn half_of_pow2_is_rejected() {
        let phi = parse("exists u <= 4 . half(pow2(u)) = x").unwrap();
        assert!(matches!(normalize_formula(&phi), Err(FormulaError::HalfOfPow2)));
    }

    #[test]
    fn prenex_renames_shadowed_variables() {
        let phi = parse("(exists u <= 3 . x = u * u) and (exists u <= 5 . x + u = 7)").unwrap();
        let rnf = normalize_formula(&phi).unwrap();
        assert_eq!(rnf.branches[0].quantifiers.len(), 2);
        for x in 0..64i64 {
            assert_eq!(rnf.eval(&[int(x)]), phi.eval(&Map::from([("x".to_owned(), int(x))])));
        }
    }

    #[test]
    fn quantifier_shadowing_a_free_variable_is_renamed_apart() {
        // The inner x is bound; the outer x is free in the second conjunct.
        let phi = parse("(exists x <= 3 . x = 2) and x >= 5").unwrap();
        assert_eq!(phi.free_vars, vec!["x".to_owned()]);
        let rnf = normalize_formula(&phi).unwrap();
        for x in 0..16i64 {
            assert_eq!(
                rnf.eval(&[int(x)]),
                phi.eval(&Map::from([("x".to_owned(), int(x))])),
                "x = {x}"
            );
        }
    }
}
