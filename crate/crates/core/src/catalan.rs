//! Generalized Catalan numbers indexed by degree vectors, the coupled
//! identities they satisfy, and an independent tree-enumeration oracle.
//!
//! A degree vector `m = (m_2, ..., m_d)` prescribes how many internal nodes of
//! each out-degree an ordered rooted tree has; `catalan(m)` counts such trees
//! through a factorial closed form, and [`count_trees`] recounts them by
//! exhaustive generation of preorder out-degree strings. The two routes are
//! kept strictly independent so they can check each other.

use std::collections::HashMap;

use thiserror::Error;

use crate::exact::{factorial, ExactInt};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalanError {
    #[error("degree vectors must have matching degree, got d={0} and d={1}")]
    DegreeMismatch(usize, usize),
    #[error("identity requires a nonzero degree vector")]
    ZeroVector,
    #[error("tuple arity k={k} out of range 1..={d}")]
    ArityRange { k: usize, d: usize },
    #[error("tree enumeration budget exceeded: edge count {0} > {1}")]
    EnumerationBudget(usize, usize),
}

/// Vector `(m_2, ..., m_d)` of node counts per out-degree, for a fixed
/// polynomial degree `d >= 1`. The entry for out-degree `i` lives at
/// `entries[i - 2]`, so the vector has length `d - 1`.
///
/// `Ord` is the lexicographic order on the entries and is used for
/// deterministic enumeration; the componentwise partial order of the
/// identities is exposed as [`component_le`](Self::component_le).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DegreeVector {
    entries: Vec<usize>,
}

impl DegreeVector {
    /// Builds a vector from the entries `(m_2, ..., m_d)`; the degree is
    /// implied by the length.
    pub fn new(entries: Vec<usize>) -> Self {
        DegreeVector { entries }
    }

    /// The zero vector for a given degree `d >= 1`.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "degree must be at least 1");
        DegreeVector { entries: vec![0; d - 1] }
    }

    /// The polynomial degree `d` this vector is indexed against.
    pub fn degree(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Count of nodes with out-degree `i` (for `2 <= i <= d`).
    pub fn count(&self, i: usize) -> usize {
        self.entries[i - 2]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&m| m == 0)
    }

    /// Total number of internal nodes.
    pub fn node_sum(&self) -> usize {
        self.entries.iter().sum()
    }

    /// Total number of edges of any tree with this profile: sum of i * m_i.
    pub fn edge_count(&self) -> usize {
        self.entries.iter().enumerate().map(|(k, &m)| (k + 2) * m).sum()
    }

    /// Sum of (i - 1) * m_i; one less than the leaf count.
    pub fn weight(&self) -> usize {
        self.entries.iter().enumerate().map(|(k, &m)| (k + 1) * m).sum()
    }

    /// Number of leaves of any tree with this profile.
    pub fn leaf_count(&self) -> usize {
        self.weight() + 1
    }

    /// Componentwise `<=`.
    pub fn component_le(&self, other: &DegreeVector) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    /// Componentwise `<=` with at least one strict coordinate.
    pub fn component_lt(&self, other: &DegreeVector) -> bool {
        self.component_le(other) && self != other
    }

    pub fn add(&self, other: &DegreeVector) -> Result<DegreeVector, CatalanError> {
        if self.degree() != other.degree() {
            return Err(CatalanError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(DegreeVector::new(
            self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Componentwise subtraction, defined only when `other <= self`.
    pub fn checked_sub(&self, other: &DegreeVector) -> Option<DegreeVector> {
        if !other.component_le(self) {
            return None;
        }
        Some(DegreeVector::new(
            self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Unit vector with a single node of out-degree `i`.
    pub fn unit(d: usize, i: usize) -> DegreeVector {
        assert!((2..=d).contains(&i));
        let mut entries = vec![0; d - 1];
        entries[i - 2] = 1;
        DegreeVector { entries }
    }
}

/// The generalized Catalan number of a degree vector:
/// `(edge count)! / (leaf count)! / prod(m_i!)`. The quotient is always an
/// integer; divisibility is asserted on every construction.
pub fn catalan(m: &DegreeVector) -> ExactInt {
    let num = factorial(m.edge_count());
    let mut den = factorial(m.leaf_count());
    for &mi in m.entries() {
        den = den * factorial(mi);
    }
    let (q, r) = num.div_rem_floor(&den);
    assert!(r.is_zero(), "catalan closed form must divide exactly for {m:?}");
    q
}

/// All degree vectors of degree `d` with weight `n - 1`, in lexicographic
/// order, each exactly once. Requires `n >= 1`; the count is at most
/// `n^(d-1)`.
pub fn compositions_with_weight(d: usize, n: usize) -> Vec<DegreeVector> {
    assert!(d >= 1, "degree must be at least 1");
    assert!(n >= 1, "weight parameter must be at least 1");
    let mut out = Vec::new();
    let mut entries = vec![0usize; d - 1];
    fill_weight(&mut entries, 0, n - 1, &mut out);
    out
}

// Lexicographic recursion: entry for out-degree i = idx + 2 contributes
// (i - 1) * m_i to the remaining weight.
fn fill_weight(entries: &mut Vec<usize>, idx: usize, remaining: usize, out: &mut Vec<DegreeVector>) {
    if idx == entries.len() {
        if remaining == 0 {
            out.push(DegreeVector::new(entries.clone()));
        }
        return;
    }
    let step = idx + 1;
    for m in 0..=remaining / step {
        entries[idx] = m;
        fill_weight(entries, idx + 1, remaining - m * step, out);
    }
    entries[idx] = 0;
}

/// All degree vectors of degree `d` with node sum at most `max_nodes`, in
/// lexicographic order. Used by the identity sweeps.
pub fn vectors_with_node_sum_at_most(d: usize, max_nodes: usize) -> Vec<DegreeVector> {
    assert!(d >= 1);
    let mut out = Vec::new();
    let mut entries = vec![0usize; d - 1];
    fill_nodes(&mut entries, 0, max_nodes, &mut out);
    out
}

fn fill_nodes(entries: &mut Vec<usize>, idx: usize, budget: usize, out: &mut Vec<DegreeVector>) {
    if idx == entries.len() {
        out.push(DegreeVector::new(entries.clone()));
        return;
    }
    for m in 0..=budget {
        entries[idx] = m;
        fill_nodes(entries, idx + 1, budget - m, out);
    }
    entries[idx] = 0;
}

/// Enumerates all ordered `k`-tuples of degree vectors summing to `m`
/// componentwise, invoking `visit` on each tuple.
fn for_each_tuple_sum(m: &DegreeVector, k: usize, visit: &mut impl FnMut(&[DegreeVector])) {
    let mut tuple: Vec<DegreeVector> = Vec::with_capacity(k);
    split_tuple(m, k, &mut tuple, visit);
}

fn split_tuple(
    remaining: &DegreeVector,
    k: usize,
    tuple: &mut Vec<DegreeVector>,
    visit: &mut impl FnMut(&[DegreeVector]),
) {
    if k == 1 {
        tuple.push(remaining.clone());
        visit(tuple);
        tuple.pop();
        return;
    }
    for part in parts_below(remaining) {
        let rest = remaining.checked_sub(&part).expect("part enumerated below remaining");
        tuple.push(part);
        split_tuple(&rest, k - 1, tuple, visit);
        tuple.pop();
    }
}

// All vectors componentwise <= m, lexicographic.
fn parts_below(m: &DegreeVector) -> Vec<DegreeVector> {
    let mut out = Vec::new();
    let mut entries = vec![0usize; m.entries().len()];
    fill_below(m.entries(), &mut entries, 0, &mut out);
    out
}

fn fill_below(bound: &[usize], entries: &mut Vec<usize>, idx: usize, out: &mut Vec<DegreeVector>) {
    if idx == bound.len() {
        out.push(DegreeVector::new(entries.clone()));
        return;
    }
    for m in 0..=bound[idx] {
        entries[idx] = m;
        fill_below(bound, entries, idx + 1, out);
    }
    entries[idx] = 0;
}

/// Memo table for Catalan values inside a sweep.
#[derive(Default)]
pub struct CatalanTable {
    memo: HashMap<Vec<usize>, ExactInt>,
}

impl CatalanTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, m: &DegreeVector) -> ExactInt {
        self.memo
            .entry(m.entries().to_vec())
            .or_insert_with(|| catalan(m))
            .clone()
    }
}

/// Checks the decomposition identity: `C_m` equals the sum over root
/// out-degrees `k` of products `C_{m^1} ... C_{m^k}` over all tuples with
/// `m^1 + ... + m^k = m - unit(k)`. Errors on the zero vector, where the
/// identity is not defined.
pub fn check_identity_cm(m: &DegreeVector) -> Result<bool, CatalanError> {
    if m.is_zero() {
        return Err(CatalanError::ZeroVector);
    }
    let d = m.degree();
    let mut table = CatalanTable::new();
    let mut rhs = ExactInt::zero();
    for k in 2..=d {
        let Some(rest) = m.checked_sub(&DegreeVector::unit(d, k)) else {
            continue;
        };
        for_each_tuple_sum(&rest, k, &mut |tuple| {
            let mut prod = ExactInt::one();
            for part in tuple {
                prod = prod * table.get(part);
            }
            rhs = &rhs + &prod;
        });
    }
    Ok(catalan(m) == rhs)
}

/// Checks the convolution identity: the sum over splits `m' + m'' = m` of
/// `(weight(m') + 1) * C_{m'} * C_{m''}` equals `(edge_count(m) + 1) * C_m`.
pub fn check_identity_bin(m: &DegreeVector) -> bool {
    let mut table = CatalanTable::new();
    let mut lhs = ExactInt::zero();
    for part in parts_below(m) {
        let rest = m.checked_sub(&part).expect("part below m");
        let factor = ExactInt::from(part.weight() + 1);
        lhs = lhs + factor * table.get(&part) * table.get(&rest);
    }
    let rhs = ExactInt::from(m.edge_count() + 1) * catalan(m);
    lhs == rhs
}

/// Checks the k-tuple counting identity: the number of ordered `k`-tuples of
/// trees with combined profile `m` equals
/// `(edge_count + k - 1)! * k / ((weight + k)! * prod(m_i!))`.
pub fn check_identity_k(m: &DegreeVector, k: usize) -> Result<bool, CatalanError> {
    let d = m.degree();
    if k == 0 || k > d {
        return Err(CatalanError::ArityRange { k, d });
    }
    let mut table = CatalanTable::new();
    let mut lhs = ExactInt::zero();
    for_each_tuple_sum(m, k, &mut |tuple| {
        let mut prod = ExactInt::one();
        for part in tuple {
            prod = prod * table.get(part);
        }
        lhs = &lhs + &prod;
    });
    // Compare as integers after checking exact divisibility of the closed form.
    let num = factorial(m.edge_count() + k - 1) * ExactInt::from(k);
    let mut den = factorial(m.weight() + k);
    for &mi in m.entries() {
        den = den * factorial(mi);
    }
    let (q, r) = num.div_rem_floor(&den);
    Ok(r.is_zero() && lhs == q)
}

/// Default edge-count budget for [`count_trees`].
pub const TREE_ENUMERATION_BUDGET: usize = 14;

/// Counts ordered rooted trees with the given out-degree profile by exhaustive
/// generation of preorder out-degree strings, accepting exactly the valid tree
/// encodings. Independent of the closed form on purpose.
pub fn count_trees(m: &DegreeVector) -> Result<ExactInt, CatalanError> {
    let edges = m.edge_count();
    if edges > TREE_ENUMERATION_BUDGET {
        return Err(CatalanError::EnumerationBudget(edges, TREE_ENUMERATION_BUDGET));
    }
    // counts[deg] = remaining symbols of that out-degree (leaves are degree 0).
    let mut counts = vec![0usize; m.degree() + 1];
    counts[0] = m.leaf_count();
    for i in 2..=m.degree() {
        counts[i] = m.count(i);
    }
    let total: usize = counts.iter().sum();
    let mut found = 0u64;
    // A preorder out-degree string encodes a tree iff the number of open
    // slots stays positive at every proper prefix and hits zero at the end.
    fn walk(counts: &mut Vec<usize>, placed: usize, total: usize, open: usize, found: &mut u64) {
        if placed == total {
            if open == 0 {
                *found += 1;
            }
            return;
        }
        if open == 0 {
            return;
        }
        for deg in 0..counts.len() {
            if counts[deg] == 0 {
                continue;
            }
            counts[deg] -= 1;
            walk(counts, placed + 1, total, open - 1 + deg, found);
            counts[deg] += 1;
        }
    }
    walk(&mut counts, 0, total, 1, &mut found);
    Ok(ExactInt::from(found as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn dv(entries: &[usize]) -> DegreeVector {
        DegreeVector::new(entries.to_vec())
    }

    #[test]
    fn catalan_of_zero_vector_is_one() {
        for d in 1..=5 {
            assert_eq!(catalan(&DegreeVector::zero(d)), int(1));
        }
    }

    #[test]
    fn classical_catalan_numbers_at_degree_two() {
        // C_(m2) with d=2 is the classical Catalan number of index m2.
        let classical = [1i64, 1, 2, 5, 14, 42, 132, 429, 1430];
        for (i, &c) in classical.iter().enumerate() {
            assert_eq!(catalan(&dv(&[i])), int(c));
        }
    }

    #[test]
    fn mixed_degree_matches_tree_count() {
        // One binary and one ternary node.
        let m = dv(&[1, 1]);
        assert_eq!(catalan(&m), count_trees(&m).unwrap());
    }

    #[test]
    fn compositions_examples() {
        assert_eq!(compositions_with_weight(2, 4), vec![dv(&[3])]);
        assert_eq!(compositions_with_weight(3, 4), vec![dv(&[1, 1]), dv(&[3, 0])]);
        assert_eq!(compositions_with_weight(4, 1), vec![dv(&[0, 0, 0])]);
        // d=1: only n=1 has the empty solution.
        assert_eq!(compositions_with_weight(1, 1), vec![DegreeVector::zero(1)]);
        assert_eq!(compositions_with_weight(1, 2), Vec::<DegreeVector>::new());
    }

    #[test]
    fn compositions_count_is_bounded_and_duplicate_free() {
        for d in 1..=4 {
            for n in 1..=9 {
                let all = compositions_with_weight(d, n);
                let mut seen = all.clone();
                seen.dedup();
                assert_eq!(seen.len(), all.len(), "duplicates at d={d}, n={n}");
                assert!(all.len() <= n.pow(d as u32 - 1), "count bound at d={d}, n={n}");
                for m in &all {
                    assert_eq!(m.weight(), n - 1);
                }
                let mut sorted = all.clone();
                sorted.sort();
                assert_eq!(sorted, all, "lexicographic order at d={d}, n={n}");
            }
        }
    }

    #[test]
    fn identity_cm_worked_example() {
        // d=2, m=(4): 14 = 1*5 + 1*2 + 2*1 + 5*1.
        assert!(check_identity_cm(&dv(&[4])).unwrap());
        assert_eq!(check_identity_cm(&dv(&[0])), Err(CatalanError::ZeroVector));
    }

    #[test]
    fn identity_bin_examples() {
        assert!(check_identity_bin(&DegreeVector::zero(2)));
        assert!(check_identity_bin(&dv(&[2])));
        assert!(check_identity_bin(&dv(&[2, 1])));
    }

    #[test]
    fn identity_k_examples() {
        // k=1 reduces to the closed form itself.
        assert!(check_identity_k(&dv(&[3]), 1).unwrap());
        assert!(check_identity_k(&dv(&[2]), 2).unwrap());
        assert!(check_identity_k(&dv(&[1, 1]), 3).unwrap());
        assert!(matches!(
            check_identity_k(&dv(&[1, 1]), 4),
            Err(CatalanError::ArityRange { k: 4, d: 3 })
        ));
    }

    #[test]
    fn tree_oracle_small_cases() {
        assert_eq!(count_trees(&DegreeVector::zero(3)).unwrap(), int(1));
        assert_eq!(count_trees(&dv(&[3])).unwrap(), int(5));
        assert!(matches!(
            count_trees(&dv(&[8])),
            Err(CatalanError::EnumerationBudget(16, _))
        ));
    }

    #[test]
    fn componentwise_order_is_partial() {
        assert!(dv(&[1, 0]).component_le(&dv(&[1, 1])));
        assert!(dv(&[1, 0]).component_lt(&dv(&[1, 1])));
        assert!(!dv(&[2, 0]).component_le(&dv(&[1, 1])));
        assert!(!dv(&[1, 1]).component_lt(&dv(&[1, 1])));
        assert_eq!(dv(&[2, 1]).checked_sub(&dv(&[1, 2])), None);
        assert_eq!(dv(&[2, 1]).checked_sub(&dv(&[1, 1])), Some(dv(&[1, 0])));
    }
}
