//! Sparse multivariate integer polynomials for the residue normal form.
//!
//! Variables are positional; the normalization context owns the registry that
//! names them. Zero coefficients are never stored, so structural equality is
//! canonical equality.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::{ExactInt, ExactRat};
use crate::poly::Polynomial;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<(Vec<u32>, ExactInt)>", into = "Vec<(Vec<u32>, ExactInt)>")]
pub struct MultiPoly {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, ExactInt>,
}

impl MultiPoly {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: ExactInt) -> Self {
        let mut p = MultiPoly::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n_vars], c);
        }
        p
    }

    pub fn var(n_vars: usize, idx: usize) -> Self {
        assert!(idx < n_vars);
        let mut exps = vec![0u32; n_vars];
        exps[idx] = 1;
        let mut p = MultiPoly::zero(n_vars);
        p.terms.insert(exps, ExactInt::one());
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if no variable occurs.
    pub fn as_constant(&self) -> Option<ExactInt> {
        if self.terms.is_empty() {
            return Some(ExactInt::zero());
        }
        if self.terms.len() == 1 {
            let (exps, c) = self.terms.iter().next().unwrap();
            if exps.iter().all(|&e| e == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn uses_var(&self, idx: usize) -> bool {
        self.terms.keys().any(|exps| exps[idx] > 0)
    }

    fn insert_term(&mut self, exps: Vec<u32>, c: ExactInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.insert_term(exps.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n_vars);
        for (exps, c) in &self.terms {
            out.terms.insert(exps.clone(), -c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = MultiPoly::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &ExactInt) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n_vars);
        for (exps, a) in &self.terms {
            out.insert_term(exps.clone(), a * c);
        }
        out
    }

    pub fn add_constant(&self, c: &ExactInt) -> MultiPoly {
        let mut out = self.clone();
        out.insert_term(vec![0; self.n_vars], c.clone());
        out
    }

    /// Substitutes `var(idx) := 2^shift_log2 * var(idx) + offset` — the
    /// residue substitution for one variable.
    pub fn substitute_residue(&self, idx: usize, shift_log2: u32, offset: &ExactInt) -> MultiPoly {
        let base = MultiPoly::var(self.n_vars, idx)
            .scale(&ExactInt::two_pow(shift_log2 as u64))
            .add_constant(offset);
        self.substitute(idx, &base)
    }

    /// Substitutes a polynomial for one variable.
    pub fn substitute(&self, idx: usize, value: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, value.n_vars);
        let mut out = MultiPoly::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let mut term = MultiPoly::constant(self.n_vars, c.clone());
            let mut rest = exps.clone();
            let e = rest[idx];
            rest[idx] = 0;
            let mut mono = MultiPoly::zero(self.n_vars);
            mono.terms.insert(rest, ExactInt::one());
            term = term.mul(&mono);
            for _ in 0..e {
                term = term.mul(value);
            }
            out = out.add(&term);
        }
        out
    }

    /// `self^exp` by repeated multiplication.
    pub fn pow(&self, exp: u32) -> MultiPoly {
        let mut out = MultiPoly::constant(self.n_vars, ExactInt::one());
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Halves the polynomial given that it is congruent to `parity` mod 2 as a
    /// function, i.e. every non-constant coefficient is even and the constant
    /// is `parity` mod 2. Returns `None` when the divisibility fails.
    pub fn halve(&self, parity: &ExactInt) -> Option<MultiPoly> {
        let adjusted = self.add_constant(&-parity);
        let two = ExactInt::from(2);
        let mut out = MultiPoly::zero(self.n_vars);
        for (exps, c) in &adjusted.terms {
            let (q, r) = c.div_rem_floor(&two);
            if !r.is_zero() {
                return None;
            }
            out.insert_term(exps.clone(), q);
        }
        Some(out)
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> ExactInt {
        self.terms
            .iter()
            .find(|(exps, _)| exps.iter().all(|&e| e == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(ExactInt::zero)
    }

    pub fn eval(&self, values: &[ExactInt]) -> ExactInt {
        assert_eq!(values.len(), self.n_vars);
        let mut acc = ExactInt::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for (idx, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    term = &term * &values[idx];
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Collapses to a univariate polynomial in `keep`, with every other
    /// variable fixed to the given values (`values[keep]` is ignored).
    pub fn to_univariate(&self, keep: usize, values: &[ExactInt]) -> Polynomial {
        assert_eq!(values.len(), self.n_vars);
        let mut coeffs: Vec<ExactInt> = vec![];
        for (exps, c) in &self.terms {
            let mut coeff = c.clone();
            for (idx, &e) in exps.iter().enumerate() {
                if idx == keep {
                    continue;
                }
                for _ in 0..e {
                    coeff = &coeff * &values[idx];
                }
            }
            let deg = exps[keep] as usize;
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, ExactInt::zero());
            }
            coeffs[deg] = &coeffs[deg] + &coeff;
        }
        if coeffs.is_empty() {
            coeffs.push(ExactInt::zero());
        }
        Polynomial::new(coeffs.into_iter().map(ExactRat::from_int).collect())
    }

    /// Renders the polynomial with the supplied variable names.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_owned();
        }
        let mut parts = Vec::new();
        for (exps, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            if exps.iter().all(|&e| e == 0) {
                factors.push(c.to_string());
            } else {
                if !c.is_one() {
                    factors.push(c.to_string());
                }
                for (idx, &e) in exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(names[idx].clone()),
                        _ => factors.push(format!("{}^{}", names[idx], e)),
                    }
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl From<Vec<(Vec<u32>, ExactInt)>> for MultiPoly {
    fn from(pairs: Vec<(Vec<u32>, ExactInt)>) -> Self {
        let n_vars = pairs.first().map(|(e, _)| e.len()).unwrap_or(0);
        let mut p = MultiPoly::zero(n_vars);
        for (exps, c) in pairs {
            p.insert_term(exps, c);
        }
        p
    }
}

impl From<MultiPoly> for Vec<(Vec<u32>, ExactInt)> {
    fn from(p: MultiPoly) -> Self {
        p.terms.into_iter().collect()
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n_vars).map(|i| format!("v{i}")).collect();
        write!(f, "MultiPoly[{}]", self.render(&names))
    }
}
