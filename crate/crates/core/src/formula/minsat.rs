//! Least satisfying assignment of a one-variable formula on `[0, a)`.
//!
//! The route goes through the residue normal form: per residue class, the
//! matrix polynomials are instantiated at every quantifier assignment,
//! sign-decomposed over the quotient domain, and their breakpoints merged and
//! sorted; the truth value of the formula is constant between consecutive
//! breakpoints, so only breakpoints need to be evaluated, and evaluation uses
//! the original formula's semantics.

use std::collections::HashMap;

use crate::exact::ExactInt;
use crate::poly::Polynomial;

use super::ast::FormulaAst;
use super::decompose::integer_flip_points;
use super::normalize::{normalize_formula_with, NormalizeOptions, ResidueBranch};
use super::FormulaError;

#[derive(Clone, Debug)]
pub struct MinSatOptions {
    /// Cap on the number of quantifier assignments enumerated per residue
    /// branch (the assignment space is the product of the quotient bounds).
    pub assignment_budget: u64,
    pub normalize: NormalizeOptions,
}

impl Default for MinSatOptions {
    fn default() -> Self {
        MinSatOptions { assignment_budget: 1 << 20, normalize: NormalizeOptions::default() }
    }
}

/// Least `x` in `[0, a)` satisfying `phi`, or `None`; `phi` must have exactly
/// one free variable.
pub fn min_sat(phi: &FormulaAst, a: &ExactInt) -> Result<Option<ExactInt>, FormulaError> {
    min_sat_with(phi, a, &MinSatOptions::default())
}

pub fn min_sat_with(
    phi: &FormulaAst,
    a: &ExactInt,
    options: &MinSatOptions,
) -> Result<Option<ExactInt>, FormulaError> {
    if phi.free_vars.len() != 1 {
        return Err(FormulaError::FreeVariableCount(phi.free_vars.clone()));
    }
    if !a.is_positive() {
        return Ok(None);
    }
    let var = phi.free_vars[0].clone();
    let rnf = normalize_formula_with(phi, &options.normalize)?;
    let step = ExactInt::two_pow(rnf.modulus_log2 as u64);

    let mut best: Option<ExactInt> = None;
    for branch in &rnf.branches {
        let sigma = ExactInt::from(branch.residues[0] as i64);
        if &sigma >= a {
            continue;
        }
        // x = step * y + sigma < a, so y ranges over [0, quotient_domain).
        let quotient_domain = {
            let (q, _) = (a - &sigma - ExactInt::one()).div_rem_floor(&step);
            q + ExactInt::one()
        };
        let candidates = branch_candidates(branch, &quotient_domain, options)?;
        // Candidates ascend, so the first satisfying one is this branch's
        // minimum, and anything at or past the running best is irrelevant.
        for y in candidates {
            let x = &step * &y + &sigma;
            debug_assert!(&x < a);
            if matches!(&best, Some(current) if &x >= current) {
                break;
            }
            if phi.eval(&HashMap::from([(var.clone(), x.clone())])) {
                best = Some(x);
                break;
            }
        }
    }
    Ok(best)
}

/// Ascending quotient values at which the branch's truth value can change:
/// zero plus every sign flip of every instantiated matrix polynomial. The
/// minimum over the branch is always attained at one of these.
fn branch_candidates(
    branch: &ResidueBranch,
    quotient_domain: &ExactInt,
    options: &MinSatOptions,
) -> Result<Vec<ExactInt>, FormulaError> {
    if !quotient_domain.is_positive() {
        return Ok(vec![]);
    }
    let mut assignments = 1u64;
    for q in &branch.quantifiers {
        assignments = assignments
            .checked_mul(q.bound + 1)
            .filter(|&n| n <= options.assignment_budget)
            .ok_or_else(|| {
                FormulaError::BudgetExceeded(format!(
                    "quantifier assignment space exceeds {}",
                    options.assignment_budget
                ))
            })?;
    }

    // Small domains are cheaper to scan than to decompose.
    let scan_threshold = ExactInt::from(16);
    let max_degree = branch
        .matrix
        .polynomials()
        .iter()
        .map(|p| univariate_degree_bound(p))
        .max()
        .unwrap_or(0);
    if quotient_domain <= &scan_threshold
        || quotient_domain <= &ExactInt::from(max_degree as i64 + 1)
    {
        let mut all = Vec::new();
        let mut y = ExactInt::zero();
        while &y < quotient_domain {
            all.push(y.clone());
            y = y + ExactInt::one();
        }
        return Ok(all);
    }

    // Instantiate every matrix polynomial at every quantifier assignment.
    let mut instantiated: Vec<Polynomial> = Vec::new();
    let mut values = vec![ExactInt::zero(); branch.var_names.len()];
    enumerate_assignments(branch, 0, &mut values, &mut |vals| {
        for poly in branch.matrix.polynomials() {
            instantiated.push(poly.to_univariate(0, vals));
        }
    });
    instantiated.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
    instantiated.dedup();

    let mut candidates = vec![ExactInt::zero()];
    for f in &instantiated {
        candidates.extend(integer_flip_points(f, quotient_domain));
    }
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}

fn univariate_degree_bound(p: &super::mvpoly::MultiPoly) -> usize {
    // Degree in the quotient variable (index 0).
    Vec::<(Vec<u32>, ExactInt)>::from(p.clone())
        .iter()
        .map(|(exps, _)| exps[0] as usize)
        .max()
        .unwrap_or(0)
}

fn enumerate_assignments(
    branch: &ResidueBranch,
    level: usize,
    values: &mut Vec<ExactInt>,
    visit: &mut impl FnMut(&[ExactInt]),
) {
    if level == branch.quantifiers.len() {
        visit(values);
        return;
    }
    let q = &branch.quantifiers[level];
    for v in 0..=q.bound {
        values[q.var_index] = ExactInt::from(v as i64);
        if let Some(atom) = q.pow_atom_index {
            values[atom] = ExactInt::two_pow(v);
        }
        enumerate_assignments(branch, level + 1, values, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use super::super::parser::parse;

    fn scan_oracle(phi: &FormulaAst, a: i64) -> Option<ExactInt> {
        let var = phi.free_vars[0].clone();
        (0..a)
            .map(int)
            .find(|x| phi.eval(&HashMap::from([(var.clone(), x.clone())])))
    }

    #[test]
    fn square_threshold() {
        let phi = parse("x * x >= 10").unwrap();
        assert_eq!(min_sat(&phi, &int(100)).unwrap(), Some(int(4)));
    }

    #[test]
    fn half_equation_matches_scan() {
        let phi = parse("half(x) * 3 = x + 2").unwrap();
        let a = 1 << 10;
        assert_eq!(min_sat(&phi, &int(a)).unwrap(), scan_oracle(&phi, a));
        assert_eq!(min_sat(&phi, &int(a)).unwrap(), Some(int(4)));
    }

    #[test]
    fn quantified_formula_matches_scan() {
        let phi = parse("exists u <= 8 . x = u * u + u").unwrap();
        let a = 1 << 12;
        assert_eq!(min_sat(&phi, &int(a)).unwrap(), scan_oracle(&phi, a));
    }

    #[test]
    fn unsatisfiable_returns_none() {
        let phi = parse("x = x + 1").unwrap();
        assert_eq!(min_sat(&phi, &int(1 << 12)).unwrap(), None);
    }

    #[test]
    fn empty_domain_returns_none() {
        let phi = parse("x = 0").unwrap();
        assert_eq!(min_sat(&phi, &int(0)).unwrap(), None);
    }

    #[test]
    fn requires_single_free_variable() {
        let phi = parse("x + y = 3").unwrap();
        assert!(matches!(min_sat(&phi, &int(8)), Err(FormulaError::FreeVariableCount(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let phi = parse("exists u <= 4000 . exists v <= 4000 . x = u + v").unwrap();
        let tight = MinSatOptions { assignment_budget: 1000, ..Default::default() };
        assert!(matches!(
            min_sat_with(&phi, &int(1 << 12), &tight),
            Err(FormulaError::BudgetExceeded(_))
        ));
    }

    /// Redundant extra breakpoints cannot change the computed minimum.
    #[test]
    fn stable_under_redundant_breakpoints() {
        let phi = parse("(x monus 20) * half(x) >= 9").unwrap();
        let a = int(1 << 12);
        let baseline = min_sat(&phi, &a).unwrap();
        // Simulate a superset of breakpoints by scanning everything.
        let scan = scan_oracle(&phi, 1 << 12);
        assert_eq!(baseline, scan);
    }
}
