//! Semantic preservation of the residue normal form, term tables against
//! brute-force evaluation, sign decomposition soundness, and minimization
//! against exhaustive scans, over the shared formula corpus.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ratcert_core::exact::{int, ExactInt};
use ratcert_core::formula::{
    min_sat, normalize_formula, normalize_formula_with, normalize_term, parse, sign_decompose,
    NormalizeOptions, Term,
};
use ratcert_core::poly::Polynomial;

fn corpus() -> Vec<String> {
    let raw = include_str!("../testdata/formulas.txt");
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[test]
fn corpus_has_twenty_five_formulas() {
    assert_eq!(corpus().len(), 25);
}

#[test]
fn normal_form_preserves_semantics_on_sampled_domain() {
    // The full exhaustive x < 2^12 sweep lives in the acceptance suite; this
    // covers every formula on a coarser grid plus the small prefix.
    let mut rng = StdRng::seed_from_u64(0xf0_0001);
    for src in corpus() {
        let phi = parse(&src).unwrap_or_else(|e| panic!("corpus formula {src:?}: {e}"));
        let rnf = normalize_formula(&phi).unwrap();
        let var = phi.free_vars[0].clone();
        let mut points: Vec<i64> = (0..64).collect();
        points.extend((0..64).map(|_| rng.gen_range(64..4096)));
        for x in points {
            let direct = phi.eval(&HashMap::from([(var.clone(), int(x))]));
            let normalized = rnf.eval(&[int(x)]);
            assert_eq!(direct, normalized, "mismatch for {src:?} at x = {x}");
        }
    }
}

#[test]
fn collapsed_normal_form_agrees_with_plain_one() {
    let options = NormalizeOptions { collapse_single_inequality: true };
    for src in corpus().into_iter().take(8) {
        let phi = parse(&src).unwrap();
        let plain = normalize_formula(&phi).unwrap();
        let collapsed = normalize_formula_with(&phi, &options).unwrap();
        for x in 0..256i64 {
            assert_eq!(
                plain.eval(&[int(x)]),
                collapsed.eval(&[int(x)]),
                "collapse changed semantics of {src:?} at x = {x}"
            );
        }
    }
}

#[test]
fn guarded_tables_match_brute_force_evaluation() {
    let samples = [
        Term::Mul(
            Box::new(Term::Monus(Box::new(Term::Var("x".into())), Box::new(Term::Const(3)))),
            Box::new(Term::Half(Box::new(Term::Var("x".into())))),
        ),
        Term::Monus(
            Box::new(Term::Half(Box::new(Term::Mul(
                Box::new(Term::Var("x".into())),
                Box::new(Term::Var("x".into())),
            )))),
            Box::new(Term::Var("x".into())),
        ),
        Term::Half(Box::new(Term::Half(Box::new(Term::Add(
            Box::new(Term::Var("x".into())),
            Box::new(Term::Monus(Box::new(Term::Const(9)), Box::new(Term::Var("x".into())))),
        ))))),
    ];
    for term in &samples {
        let c = term.floor_depth();
        let modulus = 1i64 << c;
        for x in 0..1024i64 {
            let sigma = (x % modulus) as u64;
            let table = normalize_term(term, &[sigma]).unwrap();
            let direct = term.eval(&HashMap::from([("x".to_owned(), int(x))]));
            assert_eq!(table.eval(&[int(x / modulus)]), direct, "term {term} at x = {x}");
        }
    }
}

#[test]
fn sign_decomposition_of_random_cubics_is_sound() {
    let mut rng = StdRng::seed_from_u64(0xf0_0002);
    let domain = int(1 << 16);
    for case in 0..20 {
        let f = Polynomial::from_ints(&[
            rng.gen_range(-40i64..=40),
            rng.gen_range(-12i64..=12),
            rng.gen_range(-6i64..=6),
            rng.gen_range(-3i64..=3),
        ]);
        let decomposition = sign_decompose(std::slice::from_ref(&f), &domain);
        // Probe every breakpoint, its neighbours, and a random sample.
        let mut probes: Vec<ExactInt> = Vec::new();
        for w in &decomposition.rows[0].breakpoints {
            probes.push(w.clone());
            probes.push(w + &int(1));
            if w.is_positive() {
                probes.push(w - &int(1));
            }
        }
        for _ in 0..200 {
            probes.push(int(rng.gen_range(0..(1 << 16))));
        }
        for x in probes {
            if x.is_negative() || x >= domain {
                continue;
            }
            assert!(
                decomposition.verify_at(std::slice::from_ref(&f), &x),
                "case {case}: decomposition of {f:?} wrong at {x}"
            );
        }
    }
}

// Random-formula generator for differential testing: terms over the free
// variable and the in-scope quantified variables, depth-bounded.
fn random_term(rng: &mut StdRng, depth: u32, scope: &[String]) -> ratcert_core::formula::Term {
    use ratcert_core::formula::Term;
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Term::Const(rng.gen_range(0..12)),
            1 => Term::Var("x".to_owned()),
            _ => {
                let pick = rng.gen_range(0..scope.len() + 1);
                if pick == scope.len() {
                    Term::Var("x".to_owned())
                } else {
                    Term::Var(scope[pick].clone())
                }
            }
        };
    }
    match rng.gen_range(0..5) {
        0 => Term::Add(
            Box::new(random_term(rng, depth - 1, scope)),
            Box::new(random_term(rng, depth - 1, scope)),
        ),
        1 => Term::Mul(
            Box::new(random_term(rng, depth - 1, scope)),
            Box::new(random_term(rng, depth - 1, scope)),
        ),
        2 => Term::Monus(
            Box::new(random_term(rng, depth - 1, scope)),
            Box::new(random_term(rng, depth - 1, scope)),
        ),
        _ => Term::Half(Box::new(random_term(rng, depth - 1, scope))),
    }
}

fn random_node(
    rng: &mut StdRng,
    depth: u32,
    quantifiers_left: u32,
    scope: &mut Vec<String>,
) -> ratcert_core::formula::FormulaNode {
    use ratcert_core::formula::{FormulaNode, QuantifierKind};
    if quantifiers_left > 0 && depth > 0 && rng.gen_bool(0.35) {
        let var = format!("u{}", scope.len());
        let bound = rng.gen_range(0..=4u64);
        let kind = if rng.gen_bool(0.5) { QuantifierKind::Exists } else { QuantifierKind::Forall };
        scope.push(var.clone());
        let body = random_node(rng, depth - 1, quantifiers_left - 1, scope);
        scope.pop();
        return FormulaNode::Quant { kind, var, bound, body: Box::new(body) };
    }
    if depth == 0 || rng.gen_bool(0.4) {
        let lhs = random_term(rng, 2, scope);
        let rhs = random_term(rng, 2, scope);
        return match rng.gen_range(0..3) {
            0 => FormulaNode::Le(lhs, rhs),
            1 => FormulaNode::Eq(lhs, rhs),
            _ => FormulaNode::Ge(lhs, rhs),
        };
    }
    match rng.gen_range(0..3) {
        0 => FormulaNode::Not(Box::new(random_node(rng, depth - 1, quantifiers_left, scope))),
        1 => FormulaNode::And(
            Box::new(random_node(rng, depth - 1, quantifiers_left, scope)),
            Box::new(random_node(rng, depth - 1, quantifiers_left, scope)),
        ),
        _ => FormulaNode::Or(
            Box::new(random_node(rng, depth - 1, quantifiers_left, scope)),
            Box::new(random_node(rng, depth - 1, quantifiers_left, scope)),
        ),
    }
}

/// Differential test on random formulas: the normal form and the direct
/// semantics must agree everywhere sampled, and the minimization must agree
/// with a scan.
#[test]
fn random_formulas_preserve_semantics_and_minima() {
    use ratcert_core::formula::FormulaAst;
    let mut rng = StdRng::seed_from_u64(0xd1ff_0001);
    let mut tested = 0;
    while tested < 40 {
        let root = random_node(&mut rng, 3, 2, &mut Vec::new());
        let phi = FormulaAst::new(root);
        if phi.free_vars != vec!["x".to_owned()] {
            continue; // need exactly the designated free variable
        }
        tested += 1;
        let rnf = match normalize_formula(&phi) {
            Ok(rnf) => rnf,
            Err(e) => panic!("normalization failed for {}: {e}", phi.root),
        };
        let bound = 256i64;
        for x in 0..bound {
            let direct = phi.eval(&HashMap::from([("x".to_owned(), int(x))]));
            assert_eq!(
                rnf.eval(&[int(x)]),
                direct,
                "normal form diverged for {} at x = {x}",
                phi.root
            );
        }
        let fast = min_sat(&phi, &int(bound)).unwrap();
        let scan = (0..bound)
            .map(int)
            .find(|x| phi.eval(&HashMap::from([("x".to_owned(), x.clone())])));
        assert_eq!(fast, scan, "minimum diverged for {}", phi.root);
    }
}

#[test]
fn sign_decomposition_is_exhaustively_sound_at_small_domain() {
    let domain = int(1 << 12);
    let polys = vec![
        Polynomial::from_ints(&[10, -7, 1]),
        Polynomial::from_ints(&[-4000, 1]),
        Polynomial::from_ints(&[1000, -600, 90, -2]),
        Polynomial::from_ints(&[-1, 0, 0, 0, 1]).negate(),
    ];
    let decomposition = sign_decompose(&polys, &domain);
    assert!(decomposition.verify_exhaustive(&polys));
}

#[test]
fn min_sat_matches_exhaustive_scan_on_sampled_corpus() {
    // Three representative formulas at full domain here; the whole corpus
    // runs in the acceptance suite.
    let picks = [1usize, 5, 11];
    let all = corpus();
    let bound = 1i64 << 12;
    for &i in &picks {
        let phi = parse(&all[i]).unwrap();
        let var = phi.free_vars[0].clone();
        let fast = min_sat(&phi, &int(bound)).unwrap();
        let scan = (0..bound)
            .map(int)
            .find(|x| phi.eval(&HashMap::from([(var.clone(), x.clone())])));
        assert_eq!(fast, scan, "minimum mismatch for {:?}", all[i]);
    }
}
