//! Certified root bracketing: bisection refinement of a sign change with an
//! exact-width certificate, and an affine normalization that reduces a
//! bracketed simple root to the small-constant form the inverse-series
//! machinery accepts.
//!
//! The normalization replaces a proper valuation-theoretic scaling argument
//! with bisect-until-admissible, which terminates for simple roots at exact
//! rational scale; near-multiple roots exhaust the iteration budget and the
//! caller falls back to pure bisection, which needs only sign changes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::ExactRat;
use crate::lif::{self, LifError};
use crate::poly::Polynomial;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootError {
    #[error("not a sign-change interval: need lo < hi and f(lo) < 0 < f(hi)")]
    InvalidInterval,
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(ExactRat),
    #[error("normalization did not reach an admissible form within {0} bisection steps")]
    NormalizationBudget(usize),
    #[error(transparent)]
    Series(#[from] LifError),
}

/// An interval on which a polynomial provably changes sign:
/// `lo < hi` and `f(lo) < 0 < f(hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChangeInterval {
    f: Polynomial,
    lo: ExactRat,
    hi: ExactRat,
}

impl SignChangeInterval {
    pub fn new(f: Polynomial, lo: ExactRat, hi: ExactRat) -> Result<Self, RootError> {
        if lo >= hi || !f.eval(&lo).is_negative() || !f.eval(&hi).is_positive() {
            return Err(RootError::InvalidInterval);
        }
        Ok(SignChangeInterval { f, lo, hi })
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn lo(&self) -> &ExactRat {
        &self.lo
    }

    pub fn hi(&self) -> &ExactRat {
        &self.hi
    }
}

/// An exact rational bracket around a root: `z_minus < z_plus`, the width is
/// their difference, and the polynomial it was issued for satisfies
/// `f(z_minus) < 0 < f(z_plus)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCertificate {
    pub z_minus: ExactRat,
    pub z_plus: ExactRat,
    pub width: ExactRat,
}

impl RootCertificate {
    fn issue(f: &Polynomial, z_minus: ExactRat, z_plus: ExactRat) -> Self {
        let cert = RootCertificate { width: &z_plus - &z_minus, z_minus, z_plus };
        assert!(cert.verify(f), "constructed certificate failed exact re-evaluation");
        cert
    }

    /// Re-checks every certificate invariant by exact evaluation.
    pub fn verify(&self, f: &Polynomial) -> bool {
        self.z_minus < self.z_plus
            && self.width == &self.z_plus - &self.z_minus
            && f.eval(&self.z_minus).is_negative()
            && f.eval(&self.z_plus).is_positive()
    }

    pub fn midpoint(&self) -> ExactRat {
        (&self.z_minus + &self.z_plus) / ExactRat::from(2)
    }
}

/// Shrinks a sign-change interval to a certificate of width below `eps`,
/// strictly interior to the input interval, by exact bisection.
///
/// A probed midpoint where `f` vanishes exactly is never used as an endpoint:
/// the bracket is perturbed to `mid +- delta` with verified strict signs, and
/// when the signs show the sign-change root lies elsewhere (an even-order
/// touch), bisection continues on the half that still changes sign.
pub fn refine_sign_change(
    iv: &SignChangeInterval,
    eps: &ExactRat,
) -> Result<RootCertificate, RootError> {
    if !eps.is_positive() {
        return Err(RootError::NonPositiveTolerance(eps.clone()));
    }
    let f = &iv.f;
    let mut lo = iv.lo.clone();
    let mut hi = iv.hi.clone();
    let two = ExactRat::from(2);
    let four = ExactRat::from(4);
    loop {
        if &(&hi - &lo) < eps && lo > iv.lo && hi < iv.hi {
            return Ok(RootCertificate::issue(f, lo, hi));
        }
        let mid = (&lo + &hi) / &two;
        let value = f.eval(&mid);
        if value.is_negative() {
            lo = mid;
        } else if value.is_positive() {
            hi = mid;
        } else {
            // Exact root at mid. Try to certify a strict bracket around it.
            let mut delta = min_rat(eps, &min_rat(&(&mid - &lo), &(&hi - &mid))) / &four;
            loop {
                let left = &mid - &delta;
                let right = &mid + &delta;
                let sl = f.eval(&left).signum();
                let sr = f.eval(&right).signum();
                if sl < 0 && sr > 0 {
                    return Ok(RootCertificate::issue(f, left, right));
                }
                if sl == 0 || sr == 0 {
                    delta = delta / &two;
                    continue;
                }
                // The crossing root is not at mid; drop the touching side.
                if sl > 0 {
                    hi = left;
                } else {
                    lo = right;
                }
                break;
            }
        }
    }
}

fn min_rat(a: &ExactRat, b: &ExactRat) -> ExactRat {
    if a <= b { a.clone() } else { b.clone() }
}

/// The affine change of variable `x = scale * y + shift` mapping the
/// normalized polynomial's small root back to the original coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub scale: ExactRat,
    pub shift: ExactRat,
}

impl AffineTransform {
    pub fn identity() -> Self {
        AffineTransform { scale: ExactRat::one(), shift: ExactRat::zero() }
    }

    pub fn apply(&self, y: &ExactRat) -> ExactRat {
        &self.scale * y + &self.shift
    }
}

/// Default bisection budget for [`hensel_normalize`].
pub const NORMALIZE_BUDGET: usize = 64;

/// Is `|h_0| < tighten / (4 * max(1, sum |h_k|, k >= 2))`? With `tighten = 1`
/// this is exactly the admissibility condition of
/// [`lif::partial_sum_root`]; smaller values force a smaller geometric ratio.
fn admissible(h: &Polynomial, tighten: &ExactRat) -> bool {
    let mut tail = ExactRat::zero();
    for k in 2..=h.degree_bound() {
        tail = tail + h.coeff(k).abs();
    }
    let majorant = if tail < ExactRat::one() { ExactRat::one() } else { tail };
    h.coeff(0).abs() * ExactRat::from(4) * majorant < *tighten
}

// Builds h(y) = f(scale * y + shift) / (f'(shift) * scale) with unit linear
// coefficient, choosing the scale so the coefficient tail sums to at most 1.
// Returns None when f'(shift) = 0.
fn normalized_at(f: &Polynomial, shift: &ExactRat) -> Option<(Polynomial, AffineTransform)> {
    let g = f.compose_affine(&ExactRat::one(), shift);
    let g1 = g.coeff(1);
    if g1.is_zero() {
        return None;
    }
    let mut tail = ExactRat::zero();
    for k in 2..=g.degree_bound() {
        tail = tail + (g.coeff(k) / &g1).abs();
    }
    let scale = if tail <= ExactRat::one() { ExactRat::one() } else { tail.recip() };
    let scaled = g.compose_affine(&scale, &ExactRat::zero());
    let h = scaled.scale_values(&(&g1 * &scale).recip());
    debug_assert_eq!(h.coeff(1), ExactRat::one());
    Some((h, AffineTransform { scale, shift: shift.clone() }))
}

fn hensel_normalize_to(
    f: &Polynomial,
    bracket: &SignChangeInterval,
    tighten: &ExactRat,
    budget: usize,
) -> Result<(Polynomial, AffineTransform, SignChangeInterval), RootError> {
    // The input may already be admissible as given.
    if f.coeff(1) == ExactRat::one() && admissible(f, tighten) {
        return Ok((f.clone(), AffineTransform::identity(), bracket.clone()));
    }
    let mut lo = bracket.lo().clone();
    let mut hi = bracket.hi().clone();
    let two = ExactRat::from(2);
    let four = ExactRat::from(4);
    for _ in 0..budget {
        let mid = (&lo + &hi) / &two;
        if let Some((h, transform)) = normalized_at(f, &mid) {
            if admissible(&h, tighten) {
                let refined = SignChangeInterval { f: f.clone(), lo, hi };
                return Ok((h, transform, refined));
            }
        }
        let value = f.eval(&mid);
        if value.is_negative() {
            lo = mid;
        } else if value.is_positive() {
            hi = mid;
        } else {
            // Exact root probed but f'(mid) = 0 or the form is inadmissible;
            // sidestep the root so bisection can continue.
            let mut delta = min_rat(&(&mid - &lo), &(&hi - &mid)) / &four;
            loop {
                let left = &mid - &delta;
                let right = &mid + &delta;
                let sl = f.eval(&left).signum();
                let sr = f.eval(&right).signum();
                if sl < 0 && sr > 0 {
                    lo = left;
                    hi = right;
                    break;
                }
                if sl == 0 || sr == 0 {
                    delta = delta / &two;
                    continue;
                }
                if sl > 0 {
                    hi = left;
                } else {
                    lo = right;
                }
                break;
            }
        }
    }
    Err(RootError::NormalizationBudget(budget))
}

/// Reduces `f` over the bracket to a polynomial `h` with unit linear
/// coefficient and constant term small enough for the inverse-series
/// expansion, i.e. `|h_0| < 1/(4 a_h)`, together with the affine transform
/// mapping `h`'s small root back into the bracket.
///
/// Fails with [`RootError::NormalizationBudget`] when the form is unreachable
/// within the step budget, which signals a near-multiple root; callers fall
/// back to [`refine_sign_change`] alone.
pub fn hensel_normalize(
    f: &Polynomial,
    bracket: &SignChangeInterval,
) -> Result<(Polynomial, AffineTransform), RootError> {
    let (h, transform, _) = hensel_normalize_to(f, bracket, &ExactRat::one(), NORMALIZE_BUDGET)?;
    Ok((h, transform))
}

/// Tuning for [`approx_root_with`].
#[derive(Clone, Debug)]
pub struct ApproxOptions {
    /// Cap on the number of partial-sum terms; beyond it the routine falls
    /// back to pure bisection.
    pub max_terms: usize,
    /// Bisection budget for the normalization step.
    pub normalize_budget: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions { max_terms: 64, normalize_budget: NORMALIZE_BUDGET }
    }
}

/// How an [`approx_root`] certificate was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxMethod {
    /// Partial sums of the inverse series supplied the estimate; bisection
    /// only finished the certificate.
    SeriesAccelerated { terms: usize, transform: AffineTransform, estimate: ExactRat },
    /// Pure bisection (normalization failed or was not worthwhile).
    BisectionOnly,
}

/// Composes normalization, partial-sum root approximation, and a final
/// sign-change refinement into a certificate of width below `eps`.
pub fn approx_root(
    f: &Polynomial,
    bracket: &SignChangeInterval,
    eps: &ExactRat,
) -> Result<RootCertificate, RootError> {
    approx_root_with(f, bracket, eps, &ApproxOptions::default()).map(|(cert, _)| cert)
}

/// As [`approx_root`], also reporting how the certificate was produced.
pub fn approx_root_with(
    f: &Polynomial,
    bracket: &SignChangeInterval,
    eps: &ExactRat,
    options: &ApproxOptions,
) -> Result<(RootCertificate, ApproxMethod), RootError> {
    if !eps.is_positive() {
        return Err(RootError::NonPositiveTolerance(eps.clone()));
    }
    // Target ratio 1/4 keeps the number of series terms near log2(1/eps)/2.
    let tighten = ExactRat::one() / ExactRat::from(4);
    if let Ok((h, transform, refined)) =
        hensel_normalize_to(f, bracket, &tighten, options.normalize_budget)
    {
        if let Some(result) = try_series_route(f, bracket, &refined, &h, &transform, eps, options)? {
            return Ok(result);
        }
    }
    let cert = refine_sign_change(bracket, eps)?;
    Ok((cert, ApproxMethod::BisectionOnly))
}

fn try_series_route(
    f: &Polynomial,
    bracket: &SignChangeInterval,
    refined: &SignChangeInterval,
    h: &Polynomial,
    transform: &AffineTransform,
    eps: &ExactRat,
    options: &ApproxOptions,
) -> Result<Option<(RootCertificate, ApproxMethod)>, RootError> {
    let four = ExactRat::from(4);
    let target = eps / &four;
    let a0 = h.coeff(0);
    let mut terms = 0usize;
    let estimate = if a0.is_zero() {
        // The shift itself is an exact root of f.
        transform.shift.clone()
    } else {
        let majorant = {
            let mut tail = ExactRat::zero();
            for k in 2..=h.degree_bound() {
                tail = tail + h.coeff(k).abs();
            }
            if tail < ExactRat::one() { ExactRat::one() } else { tail }
        };
        let ratio = &four * &majorant * a0.abs();
        // Least N with scale * |a0| * ratio^(N-1) / (1 - ratio) < eps/4; the
        // tail bound of the certificate guarantees the estimate is that close
        // to the root of h, and `scale` converts to original coordinates.
        let mut n = 1usize;
        let mut tail_bound = &transform.scale * a0.abs() / (ExactRat::one() - &ratio);
        while tail_bound >= target {
            n += 1;
            tail_bound = tail_bound * &ratio;
            if n > options.max_terms {
                return Ok(None);
            }
        }
        terms = n;
        let partial = lif::partial_sum_root(h, n)?;
        transform.apply(&partial.value)
    };

    // Certify around the estimate. The true root is within eps/4 of it, so a
    // window of eps/2 on each side still contains a sign change unless the
    // bracket holds additional roots; any sign mismatch falls back to
    // bisection on the full bracket.
    let method = ApproxMethod::SeriesAccelerated {
        terms,
        transform: transform.clone(),
        estimate: estimate.clone(),
    };
    if f.eval(&estimate).is_zero() {
        let pad = eps / &four;
        let z_minus = &estimate - &pad;
        let z_plus = &estimate + &pad;
        if &z_minus > bracket.lo()
            && &z_plus < bracket.hi()
            && f.eval(&z_minus).is_negative()
            && f.eval(&z_plus).is_positive()
        {
            return Ok(Some((RootCertificate::issue(f, z_minus, z_plus), method)));
        }
        return Ok(None);
    }
    let half = eps / &ExactRat::from(2);
    let l = max_rat(&(&estimate - &half), refined.lo());
    let r = min_rat(&(&estimate + &half), refined.hi());
    if l >= r || !f.eval(&l).is_negative() || !f.eval(&r).is_positive() {
        return Ok(None);
    }
    let window = SignChangeInterval { f: f.clone(), lo: l, hi: r };
    let cert = refine_sign_change(&window, eps)?;
    Ok(Some((cert, method)))
}

fn max_rat(a: &ExactRat, b: &ExactRat) -> ExactRat {
    if a >= b { a.clone() } else { b.clone() }
}
