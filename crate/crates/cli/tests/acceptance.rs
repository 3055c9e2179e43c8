//! Acceptance suite: one test per criterion, each printing a pass line with
//! its timing (run with `--nocapture` to see them). Every tolerance is exact
//! rational arithmetic; there is no floating point anywhere.

use std::collections::HashMap;
use std::io::Write as _;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ratcert_core::catalan::{
    catalan, check_identity_bin, check_identity_cm, check_identity_k, count_trees,
    vectors_with_node_sum_at_most, DegreeVector,
};
use ratcert_core::divpow::{divide_via_powers, powers_via_division};
use ratcert_core::exact::{int, rat, ExactInt, ExactRat};
use ratcert_core::formula::{min_sat, normalize_formula, parse};
use ratcert_core::lif::{coefficients, partial_sum_root};
use ratcert_core::poly::Polynomial;
use ratcert_core::roots::{approx_root, refine_sign_change, RootCertificate, SignChangeInterval};

fn finish(criterion: usize, name: &str, started: Instant, limit: Option<Duration>) {
    let elapsed = started.elapsed();
    println!("[acceptance] criterion {criterion} ({name}): PASS in {elapsed:.2?}");
    if let Some(limit) = limit {
        assert!(
            elapsed < limit,
            "criterion {criterion} exceeded its time limit: {elapsed:.2?} > {limit:.2?}"
        );
    }
}

/// Criterion 1: the three coupled identities hold for every degree vector
/// with node sum <= 8 at d in {2, 3} and <= 5 at d = 4, with exact equality.
#[test]
fn criterion_01_catalan_identities() {
    let started = Instant::now();
    for (d, node_max) in [(2usize, 8usize), (3, 8), (4, 5)] {
        for m in vectors_with_node_sum_at_most(d, node_max) {
            if !m.is_zero() {
                assert!(check_identity_cm(&m).unwrap(), "cm failed at {m:?}");
            }
            assert!(check_identity_bin(&m), "bin failed at {m:?}");
            for k in 1..=d {
                assert!(check_identity_k(&m, k).unwrap(), "k={k} failed at {m:?}");
            }
        }
    }
    finish(1, "catalan identities", started, Some(Duration::from_secs(60)));
}

/// Criterion 2: the closed form agrees with the exhaustive tree enumeration
/// for every profile with edge count <= 12.
#[test]
fn criterion_02_tree_oracle() {
    let started = Instant::now();
    let mut checked = 0usize;
    for m in profiles_with_edge_count_at_most(12) {
        assert_eq!(catalan(&m), count_trees(&m).unwrap(), "mismatch at {m:?}");
        checked += 1;
    }
    assert!(checked >= 70, "expected a substantial sweep, got {checked} profiles");
    finish(2, "tree enumeration oracle", started, Some(Duration::from_secs(120)));
}

fn profiles_with_edge_count_at_most(budget: usize) -> Vec<DegreeVector> {
    fn fill(entries: &mut Vec<usize>, idx: usize, budget: usize, out: &mut Vec<DegreeVector>) {
        if idx == entries.len() {
            out.push(DegreeVector::new(entries.clone()));
            return;
        }
        let degree = idx + 2;
        for m in 0..=budget / degree {
            entries[idx] = m;
            fill(entries, idx + 1, budget - m * degree, out);
        }
        entries[idx] = 0;
    }
    let mut out = Vec::new();
    fill(&mut vec![0usize; budget.max(2) - 1], 0, budget, &mut out);
    out
}

fn random_series_corpus(count: usize, seed: u64) -> Vec<Polynomial> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.gen_range(1..=4usize);
            let mut coeffs = vec![ExactRat::zero(), ExactRat::one()];
            for _ in 2..=d {
                coeffs.push(rat(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=4)));
            }
            Polynomial::new(coeffs)
        })
        .collect()
}

/// Criterion 3: closed-form coefficients equal the recurrence for 50 random
/// polynomials of degree <= 4, through 20 terms, with exact equality.
#[test]
fn criterion_03_lif_consistency() {
    let started = Instant::now();
    for f in random_series_corpus(50, 0xacc_0003) {
        let series = coefficients(&f, 20).unwrap();
        assert!(series.satisfies_recurrence(), "recurrence mismatch for {f:?}");
    }
    finish(3, "inverse-series closed form vs recurrence", started, None);
}

/// Criterion 4: the coefficient bound |b_n| <= (4a)^(n-1) on the same corpus,
/// and the quadratic case reproduces the classical Catalan numbers.
#[test]
fn criterion_04_coefficient_bound() {
    let started = Instant::now();
    for f in random_series_corpus(50, 0xacc_0003) {
        let series = coefficients(&f, 20).unwrap();
        assert!(series.bound_holds(), "bound failed for {f:?}");
    }
    let quadratic: Polynomial = "0,1,-1".parse().unwrap();
    let series = coefficients(&quadratic, 20).unwrap();
    let mut classical = ExactRat::one();
    for n in 1..=20usize {
        if n > 1 {
            let k = (n - 1) as i64;
            classical = classical * rat(2 * (2 * k - 1), k + 1);
        }
        assert_eq!(series.coeff(n), &classical, "classical Catalan mismatch at {n}");
    }
    finish(4, "coefficient bound and classical case", started, None);
}

/// Plain exact bisection, independent of the library's refinement code.
fn bisect_oracle(f: &Polynomial, mut lo: ExactRat, mut hi: ExactRat, eps: &ExactRat) -> ExactRat {
    assert!(f.eval(&lo).is_negative() && f.eval(&hi).is_positive(), "oracle bracket invalid");
    let two = ExactRat::from(2);
    while &(&hi - &lo) >= eps {
        let mid = (&lo + &hi) / &two;
        let v = f.eval(&mid);
        if v.is_zero() {
            return mid;
        } else if v.is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (&lo + &hi) / &two
}

fn pow2_inv(k: usize) -> ExactRat {
    ExactRat::one() / ExactRat::from_int(int(2).pow(k))
}

/// Criterion 5: the three partial-sum bounds hold as exact inequalities for
/// 20 admissible polynomials through N <= 30, and the partial sums stay
/// within the limit-form bound of the 2^-80 bisection-oracle root.
#[test]
fn criterion_05_partial_sum_error_bounds() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xacc_0005);
    for case in 0..20 {
        let d = rng.gen_range(1..=4usize);
        let mut coeffs = vec![ExactRat::zero(), ExactRat::one()];
        for _ in 2..=d {
            coeffs.push(rat(rng.gen_range(-2i64..=2), rng.gen_range(1i64..=3)));
        }
        let mut h = Polynomial::new(coeffs);
        // Pick a0 with |a0| < 1/(4a): a0 = sign / (4a * k) for k in 2..=5.
        let majorant = {
            let mut tail = ExactRat::zero();
            for i in 2..=h.degree_bound() {
                tail = tail + h.coeff(i).abs();
            }
            if tail < ExactRat::one() { ExactRat::one() } else { tail }
        };
        let k = rat(rng.gen_range(2i64..=5), if rng.gen_bool(0.5) { 1 } else { -1 });
        let a0 = (ExactRat::from(4) * &majorant * k).recip();
        h = h.with_constant(a0.clone());

        // Oracle root: h is strictly increasing on [-1/(4a), 1/(4a)], and its
        // unique root there lies inside +-|a0|/(1-alpha).
        let ratio = ExactRat::from(4) * &majorant * a0.abs();
        let sup = a0.abs() / (ExactRat::one() - &ratio);
        let edge = (&sup + (ExactRat::from(4) * &majorant).recip()) / ExactRat::from(2);
        let oracle = bisect_oracle(&h, -&edge, edge.clone(), &pow2_inv(80));

        for n in 1..=30usize {
            let root = partial_sum_root(&h, n).unwrap();
            let c = &root.certificate;
            assert!(c.sup_attained <= c.sup_bound, "case {case}: sup bound failed at N={n}");
            assert!(c.step_attained <= c.step_bound, "case {case}: step bound failed at N={n}");
            assert!(
                c.residual_attained <= c.residual_bound,
                "case {case}: residual bound failed at N={n}"
            );
            let distance = (&root.value - &oracle).abs();
            assert!(
                distance <= &c.tail_bound + &pow2_inv(80),
                "case {case}: limit-form bound failed at N={n}"
            );
        }
    }
    finish(5, "partial-sum error bounds", started, None);
}

/// Criterion 6: the division reduction agrees with schoolbook long division
/// on 500 random pairs with up-to-512-bit operands, and the powers reduction
/// agrees with repeated multiplication on 200 cases.
#[test]
fn criterion_06_division_reduction() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xacc_0006);
    for case in 0..500 {
        let y_bits = rng.gen_range(1..=512u64);
        let x_bits = rng.gen_range(1..=512u64);
        let y = random_uint(&mut rng, y_bits);
        let x = random_uint(&mut rng, x_bits) + int(1);
        let got = divide_via_powers(&y, &x).unwrap();
        let want = schoolbook_divide(&y, &x);
        assert_eq!(got, want, "division mismatch on case {case}");
    }
    for case in 0..200 {
        let x_bits = rng.gen_range(0..=64u64);
        let x = random_uint(&mut rng, x_bits);
        let n = rng.gen_range(0..=32usize);
        let got = powers_via_division(&x, n).unwrap();
        let mut acc = int(1);
        for (j, p) in got.iter().enumerate() {
            assert_eq!(p, &acc, "powers mismatch on case {case} at exponent {j}");
            acc = &acc * &x;
        }
    }
    finish(6, "division and powering reductions", started, Some(Duration::from_secs(30)));
}

fn random_uint(rng: &mut StdRng, bits: u64) -> ExactInt {
    let mut v = ExactInt::zero();
    let mut remaining = bits;
    while remaining > 0 {
        let take = remaining.min(32);
        let chunk = rng.gen_range(0..(1u64 << take)) as i64;
        v = &(&v << take) + &int(chunk);
        remaining -= take;
    }
    v
}

fn schoolbook_divide(y: &ExactInt, x: &ExactInt) -> (ExactInt, ExactInt) {
    let mut q = ExactInt::zero();
    let mut r = ExactInt::zero();
    for i in (0..y.bit_length()).rev() {
        r = &(&r << 1) + &int(y.bit(i) as i64);
        q = &q << 1;
        if &r >= x {
            r = &r - x;
            q = q + int(1);
        }
    }
    (q, r)
}

/// The 30-polynomial bracketing corpus: square roots, cubics, quintics, a
/// linear exact root, and near-degenerate brackets.
fn root_corpus() -> Vec<(Polynomial, ExactRat, ExactRat, ExactRat)> {
    let mut corpus: Vec<(Polynomial, ExactRat, ExactRat, ExactRat)> = Vec::new();
    let eps_cycle = [pow2_inv(16), pow2_inv(48), pow2_inv(64)];
    // Square roots of 2, 3, 5, 6, 7, 8, 10 via x^2 - k.
    for (i, k) in [2i64, 3, 5, 6, 7, 8, 10].iter().enumerate() {
        let bracket_hi = if *k <= 3 { rat(2, 1) } else { rat(4, 1) };
        corpus.push((
            Polynomial::from_ints(&[-k, 0, 1]),
            rat(1, 1),
            bracket_hi,
            eps_cycle[i % 3].clone(),
        ));
    }
    // Cube roots via x^3 - k.
    for (i, k) in [2i64, 3, 9].iter().enumerate() {
        corpus.push((
            Polynomial::from_ints(&[-k, 0, 0, 1]),
            rat(1, 1),
            rat(3, 1),
            eps_cycle[i % 3].clone(),
        ));
    }
    // The cubic x^3 - 5x + 1 on [0, 1] (negated for orientation) and on [2, 3].
    let cubic = Polynomial::from_ints(&[1, -5, 0, 1]);
    corpus.push((cubic.negate(), rat(0, 1), rat(1, 1), pow2_inv(48)));
    corpus.push((cubic.clone(), rat(2, 1), rat(3, 1), pow2_inv(64)));
    // Quintics.
    corpus.push((Polynomial::from_ints(&[-1, -1, 0, 0, 0, 1]), rat(1, 1), rat(2, 1), pow2_inv(40)));
    corpus.push((Polynomial::from_ints(&[-2, 0, 0, 0, 0, 1]), rat(1, 1), rat(2, 1), pow2_inv(64)));
    // Exact rational roots.
    corpus.push((Polynomial::from_ints(&[-1, 3]), rat(0, 1), rat(1, 1), pow2_inv(20)));
    corpus.push((Polynomial::from_ints(&[0, 1]), rat(-1, 1), rat(1, 1), rat(1, 4)));
    corpus.push((Polynomial::from_ints(&[-6, 0, 0, 2]), rat(0, 1), rat(2, 1), pow2_inv(32)));
    // Near-degenerate: (x-1)^2 - 2^-2j keeps a root pair 2^(1-j) apart.
    for j in [6u32, 10, 14] {
        let eps_small = ExactRat::one() / ExactRat::from_int(int(2).pow(2 * j as usize));
        let shifted = Polynomial::new(vec![
            ExactRat::one() - &eps_small,
            ExactRat::from(-2),
            ExactRat::one(),
        ]);
        corpus.push((shifted, rat(1, 1), rat(2, 1), pow2_inv(40)));
    }
    // Narrow brackets hugging the root.
    corpus.push((Polynomial::from_ints(&[-2, 0, 1]), rat(181, 128), rat(182, 128), pow2_inv(48)));
    corpus.push((Polynomial::from_ints(&[-2, 0, 1]), rat(1414213, 1000000), rat(2, 1), pow2_inv(48)));
    // Wide, lopsided brackets.
    corpus.push((Polynomial::from_ints(&[-2, 0, 1]), rat(1, 1), rat(1000, 1), pow2_inv(24)));
    corpus.push((Polynomial::from_ints(&[-7, 2, 0, 1]), rat(0, 1), rat(50, 1), pow2_inv(32)));
    // Dense sign structure: (x-1)(x-2)(x-3) + 1/64 wiggles near three roots.
    let wiggly = Polynomial::new(vec![
        rat(-6, 1) + rat(1, 64),
        rat(11, 1),
        rat(-6, 1),
        rat(1, 1),
    ]);
    corpus.push((wiggly.clone(), rat(0, 1), rat(3, 2), pow2_inv(40)));
    corpus.push((wiggly.negate(), rat(3, 2), rat(11, 4), pow2_inv(40)));
    // Rational-coefficient entries.
    corpus.push(("-1/3,1,1/2".parse().unwrap(), rat(0, 1), rat(1, 1), pow2_inv(44)));
    corpus.push(("-5/7,0,0,1".parse().unwrap(), rat(0, 1), rat(2, 1), pow2_inv(44)));
    corpus.push(("-11/13,1/5,1".parse().unwrap(), rat(0, 1), rat(1, 1), pow2_inv(52)));
    // A quartic for degree coverage.
    corpus.push((Polynomial::from_ints(&[-5, 0, 0, 0, 1]), rat(1, 1), rat(2, 1), pow2_inv(56)));
    assert_eq!(corpus.len(), 30);
    corpus
}

/// Criterion 7: every certificate from both the bisection route and the
/// accelerated route satisfies its invariants under exact re-evaluation, on
/// the 30-polynomial corpus.
#[test]
fn criterion_07_root_certificates() {
    let started = Instant::now();
    for (i, (f, lo, hi, eps)) in root_corpus().into_iter().enumerate() {
        let iv = SignChangeInterval::new(f.clone(), lo.clone(), hi.clone())
            .unwrap_or_else(|e| panic!("corpus entry {i} has a bad bracket: {e}"));
        let refined = refine_sign_change(&iv, &eps).unwrap();
        let accelerated = approx_root(&f, &iv, &eps).unwrap();
        for (label, cert) in [("refine", &refined), ("approx", &accelerated)] {
            assert!(cert.z_minus < cert.z_plus, "entry {i} {label}: ordering");
            assert!(cert.width < eps, "entry {i} {label}: width");
            assert!(cert.verify(&f), "entry {i} {label}: exact re-evaluation");
            assert!(cert.z_minus > lo && cert.z_plus < hi, "entry {i} {label}: containment");
        }
        // Both routes bracket the same sign-change root.
        assert!(
            refined.z_minus < accelerated.z_plus && accelerated.z_minus < refined.z_plus,
            "entry {i}: routes disagree"
        );
    }
    finish(7, "root certificates", started, None);
}

fn corpus_formulas() -> Vec<String> {
    let raw = include_str!("../../core/testdata/formulas.txt");
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

/// Criterion 8: the residue normal form evaluates identically to the source
/// formula for every x < 2^12 across the 25-formula corpus.
#[test]
fn criterion_08_formula_semantics() {
    let started = Instant::now();
    let formulas = corpus_formulas();
    assert_eq!(formulas.len(), 25);
    for src in &formulas {
        let phi = parse(src).unwrap_or_else(|e| panic!("corpus formula {src:?}: {e}"));
        let rnf = normalize_formula(&phi).unwrap();
        let var = phi.free_vars[0].clone();
        for x in 0..(1i64 << 12) {
            let direct = phi.eval(&HashMap::from([(var.clone(), int(x))]));
            assert_eq!(rnf.eval(&[int(x)]), direct, "mismatch for {src:?} at x = {x}");
        }
    }
    finish(8, "formula semantic preservation", started, None);
}

/// Criterion 9: the breakpoint-driven minimization equals the exhaustive scan
/// on the same corpus with bound 2^12.
#[test]
fn criterion_09_minimization() {
    let started = Instant::now();
    let bound = 1i64 << 12;
    for src in corpus_formulas() {
        let phi = parse(&src).unwrap();
        let var = phi.free_vars[0].clone();
        let fast = min_sat(&phi, &int(bound)).unwrap();
        let scan = (0..bound)
            .map(int)
            .find(|x| phi.eval(&HashMap::from([(var.clone(), x.clone())])));
        assert_eq!(fast, scan, "minimum mismatch for {src:?}");
    }
    finish(9, "minimization vs exhaustive scan", started, Some(Duration::from_secs(120)));
}

/// Criterion 10: two runs of the full CLI script produce byte-identical JSON.
#[test]
fn criterion_10_cli_determinism() {
    let started = Instant::now();
    let mut formula_file = tempfile::NamedTempFile::new().unwrap();
    writeln!(formula_file, "exists u <= 8 . (x monus u) * half(x) >= 9").unwrap();
    let path = formula_file.path().to_str().unwrap().to_owned();
    let script: Vec<Vec<String>> = vec![
        svec(&["--json", "catalan", "--d", "3", "--m", "2,1"]),
        svec(&["--json", "catalan", "verify", "--d", "3", "--weight-max", "5"]),
        svec(&["--json", "lif", "coeffs", "--poly", "0,1,-1", "--n", "12"]),
        svec(&["--json", "lif", "check", "--poly", "0,1,1/2,-1/3", "--n", "10"]),
        svec(&["--json", "root", "approx", "--poly", "-2,0,1", "--lo", "1", "--hi", "2", "--eps", "1/1048576"]),
        svec(&["--json", "root", "approx", "--poly", "1,-5,0,1", "--lo", "0", "--hi", "1", "--eps", "1/65536"]),
        svec(&["--json", "divide", "--y", "123456789123456789", "--x", "987654321", "--via-powers"]),
        svec(&["--json", "divide", "--y", "123456789123456789", "--x", "987654321"]),
        svec(&["--json", "powers", "--x", "12", "--n", "16", "--via-division"]),
        svec(&["--json", "powers", "--x", "12", "--n", "16"]),
        svec(&["--json", "formula", "normalize", "--file", &path]),
        svec(&["--json", "formula", "normalize", "--collapse", "--file", &path]),
        svec(&["--json", "formula", "minsat", "--file", &path, "--bound", "4096"]),
    ];
    let run_script = || -> Vec<u8> {
        let mut all = Vec::new();
        for args in &script {
            let out = Command::new(env!("CARGO_BIN_EXE_ratcert"))
                .args(args)
                .output()
                .expect("binary runs");
            assert!(out.status.success(), "script step {args:?} failed");
            all.extend_from_slice(&out.stdout);
        }
        all
    };
    let first = run_script();
    let second = run_script();
    assert_eq!(first, second, "CLI output differed between identical runs");
    // Each emitted line is valid JSON.
    for line in String::from_utf8(first).unwrap().lines() {
        let value: serde_json::Value = serde_json::from_str(line).expect("valid JSON line");
        assert!(value.get("command").is_some());
    }
    finish(10, "CLI determinism", started, None);
}

fn svec(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

/// The certificates embedded in criterion 7 also deserialize from their JSON
/// form, closing the loop with the CLI surface.
#[test]
fn certificates_round_trip_through_json() {
    let f = Polynomial::from_ints(&[-2, 0, 1]);
    let iv = SignChangeInterval::new(f.clone(), rat(1, 1), rat(2, 1)).unwrap();
    let cert = refine_sign_change(&iv, &pow2_inv(20)).unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    let back: RootCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(cert, back);
}
