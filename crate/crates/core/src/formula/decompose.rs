//! Sign-invariant interval decomposition of integer polynomials on `[0, a)`.
//!
//! Each polynomial gets breakpoints `0 = w_0 < w_1 < ... < w_{d+1} = a` such
//! that the predicate `f(x) >= 0` is constant on every integer interval
//! `[w_i, w_{i+1})`. Real roots are covered by narrow rational zones found by
//! recursing on the derivative (a polynomial is strictly monotone between the
//! zones of its derivative) and certified with
//! [`refine_sign_change`](crate::roots::refine_sign_change); rounding the
//! zones to nearby integers and testing exactly yields the flip points, with
//! dummy breakpoints inserted to pad every row to the same length.

use serde::{Deserialize, Serialize};

use crate::exact::{ExactInt, ExactRat};
use crate::poly::Polynomial;
use crate::roots::{refine_sign_change, SignChangeInterval};

/// One decomposed polynomial: padded breakpoints and the predicate value on
/// each cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionRow {
    /// `d + 2` strictly increasing values from 0 to the domain bound.
    pub breakpoints: Vec<ExactInt>,
    /// `signs[i]` is the truth of `f(x) >= 0` on `[breakpoints[i], breakpoints[i+1])`.
    pub signs: Vec<bool>,
}

/// Sign-invariant decomposition of a batch of integer polynomials over `[0, a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignDecomposition {
    /// Shared row degree d; every row has d + 2 breakpoints.
    pub degree: usize,
    pub domain: ExactInt,
    pub rows: Vec<DecompositionRow>,
}

/// Decomposes each polynomial of the batch. Requires integer coefficients and
/// `a` greater than the largest effective degree; degenerate (constant or
/// zero) polynomials get the trivial decomposition.
pub fn sign_decompose(polys: &[Polynomial], a: &ExactInt) -> SignDecomposition {
    assert!(a.is_positive(), "domain bound must be positive");
    let degree = polys
        .iter()
        .map(|f| f.effective_degree().unwrap_or(0))
        .max()
        .unwrap_or(0);
    assert!(
        a > &ExactInt::from(degree),
        "domain bound {a} must exceed the maximum degree {degree}"
    );
    let rows = polys
        .iter()
        .map(|f| {
            assert!(f.has_integer_coeffs(), "decomposition expects integer coefficients");
            let flips = integer_flip_points(f, a);
            let breakpoints = pad_breakpoints(flips, a, degree);
            let signs = breakpoints
                .iter()
                .take(breakpoints.len() - 1)
                .map(|w| !f.eval_int(w).is_negative())
                .collect();
            DecompositionRow { breakpoints, signs }
        })
        .collect();
    SignDecomposition { degree, domain: a.clone(), rows }
}

impl SignDecomposition {
    /// Exhaustively re-checks the defining property on a full scan of the
    /// domain; intended for tests with small `a`.
    pub fn verify_exhaustive(&self, polys: &[Polynomial]) -> bool {
        let mut x = ExactInt::zero();
        while x < self.domain {
            if !self.verify_at(polys, &x) {
                return false;
            }
            x = x + ExactInt::one();
        }
        true
    }

    /// Checks the property at a single point.
    pub fn verify_at(&self, polys: &[Polynomial], x: &ExactInt) -> bool {
        self.rows.iter().zip(polys).all(|(row, f)| {
            let cell = match row.breakpoints.iter().rposition(|w| w <= x) {
                Some(i) if i < row.signs.len() => i,
                _ => return true, // outside [0, a)
            };
            let expected = row.signs[cell];
            !f.eval_int(x).is_negative() == expected
        })
    }
}

/// All integers `w` in `(0, a)` where the predicate `f(x) >= 0` differs
/// between `w - 1` and `w`, sorted ascending. Exposed within the crate for the
/// minimization routine.
pub(crate) fn integer_flip_points(f: &Polynomial, a: &ExactInt) -> Vec<ExactInt> {
    if f.effective_degree().unwrap_or(0) == 0 {
        return vec![];
    }
    let lo = ExactRat::zero();
    let hi = ExactRat::from_int(a.clone());
    let zones = cover_root_zones(f, &lo, &hi);
    let mut candidates: Vec<ExactInt> = Vec::new();
    for (zlo, zhi) in &zones {
        // A flip at w needs a root in (w-1, w]; a zone [lo, hi] can therefore
        // only produce flips in [floor(lo), floor(hi) + 1].
        let mut w = zlo.floor();
        let stop = zhi.floor() + ExactInt::one();
        while w <= stop {
            candidates.push(w.clone());
            w = w + ExactInt::one();
        }
    }
    candidates.sort();
    candidates.dedup();
    let one = ExactInt::one();
    candidates
        .into_iter()
        .filter(|w| w >= &one && w < a)
        .filter(|w| {
            let before = !f.eval_int(&(w - &one)).is_negative();
            let here = !f.eval_int(w).is_negative();
            before != here
        })
        .collect()
}

// Narrow rational intervals covering every real root of f in [lo, hi].
// Recursion on the derivative: between (and outside) the derivative's root
// zones the polynomial is strictly monotone, so each piece holds at most one
// root, found by certified bisection. Zone width stays below 1/2 (before
// merging) so each zone meets only a few integer candidates.
fn cover_root_zones(f: &Polynomial, lo: &ExactRat, hi: &ExactRat) -> Vec<(ExactRat, ExactRat)> {
    let degree = match f.effective_degree() {
        None | Some(0) => return vec![],
        Some(d) => d,
    };
    let critical = if degree > 1 {
        merge_zones(cover_root_zones(&f.derivative(), lo, hi))
    } else {
        vec![]
    };
    let mut edges = vec![lo.clone()];
    for (zlo, zhi) in &critical {
        edges.push(zlo.clone());
        edges.push(zhi.clone());
    }
    edges.push(hi.clone());
    // The derivative's zones may themselves hold roots of f.
    let mut zones = critical;
    let width = crate::exact::rat(1, 2);
    for pair in edges.chunks(2) {
        let (p, q) = (&pair[0], &pair[1]);
        if p >= q {
            continue;
        }
        let sp = f.eval(p).signum();
        let sq = f.eval(q).signum();
        if sp == 0 {
            zones.push((p.clone(), p.clone()));
        }
        if sq == 0 {
            zones.push((q.clone(), q.clone()));
        }
        if sp * sq < 0 {
            // Strictly monotone piece with a sign change: one root inside.
            let oriented = if sp < 0 { f.clone() } else { f.negate() };
            let iv = SignChangeInterval::new(oriented, p.clone(), q.clone())
                .expect("piece endpoints have strict opposite signs");
            let cert = refine_sign_change(&iv, &width)
                .expect("bisection on a strict sign change cannot fail");
            zones.push((cert.z_minus, cert.z_plus));
        }
    }
    merge_zones(zones)
}

// Sorts and merges overlapping or touching zones so the gaps between them are
// genuinely root-free pieces.
fn merge_zones(mut zones: Vec<(ExactRat, ExactRat)>) -> Vec<(ExactRat, ExactRat)> {
    zones.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut merged: Vec<(ExactRat, ExactRat)> = Vec::with_capacity(zones.len());
    for (zlo, zhi) in zones {
        match merged.last_mut() {
            Some((_, last_hi)) if zlo <= *last_hi => {
                if zhi > *last_hi {
                    *last_hi = zhi;
                }
            }
            _ => merged.push((zlo, zhi)),
        }
    }
    merged
}

// Pads the flip list to exactly degree + 2 strictly increasing breakpoints
// from 0 to a, inserting dummies into gaps; splitting a constant-sign cell
// keeps it constant-sign.
fn pad_breakpoints(flips: Vec<ExactInt>, a: &ExactInt, degree: usize) -> Vec<ExactInt> {
    let mut points = Vec::with_capacity(degree + 2);
    points.push(ExactInt::zero());
    points.extend(flips);
    points.push(a.clone());
    let want = degree + 2;
    'grow: while points.len() < want {
        for i in 0..points.len() - 1 {
            if &points[i] + &ExactInt::one() < points[i + 1] {
                points.insert(i + 1, &points[i] + &ExactInt::one());
                continue 'grow;
            }
        }
        unreachable!("domain bound exceeds degree, so padding space exists");
    }
    points
}
