//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Every expected value here comes from a small oracle written in this file
//! (direct coefficient arithmetic, brute-force enumeration, step-wise σ), never
//! from the routine under test.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;

use ovsa_core::amalg::{amalgamate_orders, AmalgamationProblem, OrderWithAction};
use ovsa_core::extend::{adjoin_degree1_solution, Case, Element, Model, ModelCut};
use ovsa_core::formulas::{
    alt_count, default_term_bank, ip_pattern_search, is_qf_indiscernible, Formula, GTerm, Letter, OrderAtom,
    OvsaAtom, QFFormula, QFTerm, Relation,
};
use ovsa_core::hahn::{HahnModel, HahnVector};
use ovsa_core::sigmapoly::{monotonicity_counterexample, sp_eval, MonotoneClass, Ovsa, SigmaPoly};
use ovsa_core::solve::{check_not_flanking_subgroup, solve_exact, FlankCheck, GreedySolver, SolveOutcome, DEFAULT_K_BOUND};
use ovsa_core::testkit::{self, TestRng};
use ovsa_core::{Index, Rational};

type Verdict = Result<String, String>;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `Σ α_k σ^k(v)` by stepping σ or σ⁻¹ one application at a time.
fn oracle_eval<M: Ovsa>(m: &M, f: &SigmaPoly, v: &M::Elem) -> M::Elem {
    let mut acc = m.zero();
    for (k, c) in f.terms() {
        let mut w = v.clone();
        for _ in 0..k.unsigned_abs() {
            w = m.sigma_pow(&w, k.signum());
        }
        acc = m.add(&acc, &m.scale(&w, c));
    }
    acc
}

/// `Σ α_k c^k` by repeated multiplication.
fn oracle_scalar(f: &SigmaPoly, c: &Rational) -> Rational {
    let mut total = Rational::zero();
    for (k, a) in f.terms() {
        let mut p = Rational::one();
        for _ in 0..k.unsigned_abs() {
            p = if k > 0 { p * c } else { p / c };
        }
        total = total + p * a;
    }
    total
}

// criterion 1

/// `(side, n)` for `ℤ⌢ℤ`, compared lexicographically.
fn opposed_key(i: &Index) -> (u8, i64) {
    match i {
        Index::Left(b) => match **b {
            Index::Int(n) => (0, n),
            _ => unreachable!(),
        },
        Index::Right(b) => match **b {
            Index::Int(n) => (1, n),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn oracle_sigma_opposed(v: &HahnVector) -> BTreeMap<(u8, i64), Rational> {
    v.terms()
        .map(|(i, c)| {
            let (s, n) = opposed_key(i);
            ((s, if s == 0 { n - 1 } else { n + 1 }), c.clone())
        })
        .collect()
}

fn as_map(v: &HahnVector) -> BTreeMap<(u8, i64), Rational> {
    v.terms().map(|(i, c)| (opposed_key(i), c.clone())).collect()
}

fn oracle_sign(v: &BTreeMap<(u8, i64), Rational>) -> Ordering {
    v.iter()
        .find(|(_, c)| !c.is_zero())
        .map_or(Ordering::Equal, |(_, c)| c.sign())
}

fn map_sub(a: &BTreeMap<(u8, i64), Rational>, b: &BTreeMap<(u8, i64), Rational>) -> BTreeMap<(u8, i64), Rational> {
    let mut out = a.clone();
    for (k, c) in b {
        let e = out.entry(*k).or_insert_with(Rational::zero);
        *e = &*e - c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn criterion_1() -> Verdict {
    let m = testkit::opposed_shifts_model();
    let a = HahnVector::basis(Index::right(Index::Int(0)));
    let b = HahnVector::basis(Index::left(Index::Int(0)));
    let (sa, sb) = (oracle_sigma_opposed(&a), oracle_sigma_opposed(&b));
    ensure(as_map(&m.sigma_apply(&a, 1).unwrap()) == sa, || "σ(a) differs from the shift oracle".into())?;
    ensure(as_map(&m.sigma_apply(&b, 1).unwrap()) == sb, || "σ(b) differs from the shift oracle".into())?;
    let (am, bm) = (as_map(&a), as_map(&b));
    let chain = [&sa, &am, &bm, &sb];
    for w in chain.windows(2) {
        ensure(oracle_sign(&map_sub(w[1], w[0])) == Ordering::Greater, || "σ(a) < a < b < σ(b) fails".into())?;
    }
    let lib_chain = [m.sigma_apply(&a, 1).unwrap(), a.clone(), b.clone(), m.sigma_apply(&b, 1).unwrap()];
    for w in lib_chain.windows(2) {
        ensure(m.vec_compare(&w[0], &w[1]).unwrap() == Ordering::Less, || "library order disagrees".into())?;
    }
    let f = SigmaPoly::from_ints(&[-1, 1]);
    let mut rng = testkit::rng(61);
    let mut ok = 0;
    for _ in 0..100 {
        let c = testkit::nonzero_vector(&mut rng, &m, 5, 6);
        let (cm, scm) = (as_map(&c), oracle_sigma_opposed(&c));
        let supports_differ = cm.keys().collect::<BTreeSet<_>>() != scm.keys().collect::<BTreeSet<_>>();
        let fc = map_sub(&scm, &cm);
        let lib = sp_eval(&m, &f, &c).unwrap();
        if supports_differ && !fc.is_empty() && as_map(&lib) == fc {
            ok += 1;
        }
    }
    ensure(ok == 100, || format!("{ok}/100 random c with supp(c) ≠ supp(σc) and f(c) ≠ 0"))?;
    Ok("σ(a) < a < b < σ(b); 100/100 random c have no fixed point".into())
}

// criterion 2

fn corpus(rng: &mut TestRng) -> Vec<SigmaPoly> {
    let roots = [q(1), Rational::new(1, 2), q(2), q(3)];
    (0..200)
        .map(|i| {
            if i % 2 == 0 {
                let lo = rng.random_range(-1..=1);
                let deg = rng.random_range(0..=5);
                testkit::sigma_poly(rng, lo, deg.max(lo), 5)
            } else {
                let n = rng.random_range(1..=2);
                let mut f = SigmaPoly::one();
                for _ in 0..n {
                    let c = roots[rng.random_range(0..roots.len())].clone();
                    f = f.mul(&SigmaPoly::from_terms([(0, -c), (1, q(1))]));
                }
                let deg = rng.random_range(0..=5 - n);
                f.mul(&testkit::sigma_poly(rng, 0, deg, 4))
            }
        })
        .filter(|f| !f.is_zero())
        .collect()
}

fn criterion_2() -> Verdict {
    let mut rng = testkit::rng(57);
    let polys = corpus(&mut rng);
    let shapes = testkit::model_shapes();
    let (mut mono, mut witnessed, mut irrational) = (0, 0, 0);
    for f in &polys {
        match f.classify_monotone().map_err(|e| e.to_string())? {
            MonotoneClass::AbsIncreasing | MonotoneClass::AbsDecreasing => {
                mono += 1;
                let inc = f.classify_monotone().unwrap() == MonotoneClass::AbsIncreasing;
                let mut pairs = 0;
                while pairs < 500 {
                    let (_, m) = &shapes[pairs % shapes.len()];
                    let v = testkit::vector(&mut rng, m, 3, 4);
                    let w = testkit::vector(&mut rng, m, 3, 4);
                    let (lo, hi) = match m.compare_unchecked(&v, &w) {
                        Ordering::Less => (v, w),
                        Ordering::Greater => (w, v),
                        Ordering::Equal => continue,
                    };
                    pairs += 1;
                    let d = m.sub(&oracle_eval(m, f, &hi), &oracle_eval(m, f, &lo));
                    let want = if inc { Ordering::Greater } else { Ordering::Less };
                    ensure(m.sign(&d) == want, || format!("{f} violates its verdict at {lo:?} < {hi:?}"))?;
                }
            }
            MonotoneClass::NotAbsMonotone(n) => {
                ensure(n > 0, || format!("{f}: NotAbsMonotone(0)"))?;
                match monotonicity_counterexample(f, &shapes[0].1) {
                    Err(ovsa_core::Error::UnsupportedScalarField(_)) => irrational += 1,
                    Err(e) => return Err(format!("{f}: {e}")),
                    Ok(_) => {
                        witnessed += 1;
                        for (name, base) in &shapes {
                            let w = monotonicity_counterexample(f, base).map_err(|e| e.to_string())?;
                            ensure(oracle_scalar(f, &w.root).is_zero(), || format!("{f}: {} is not a root", w.root))?;
                            ensure(!w.zero.is_zero(), || "zero witness".into())?;
                            ensure(oracle_eval(&w.model, f, &w.zero).is_zero(), || format!("{f}: f(z) ≠ 0 on {name}"))?;
                            for _ in 0..20 {
                                let v = testkit::vector(&mut rng, base, 4, 6).scale(&q(1000));
                                let lifted = HahnModel::embed_right(&v);
                                ensure(
                                    w.model.compare_unchecked(&w.zero, &lifted) == Ordering::Greater,
                                    || format!("{f}: z not above the base on {name}"),
                                )?;
                            }
                        }
                    }
                }
            }
        }
    }
    ensure(mono > 0 && witnessed > 0, || "corpus does not exercise both verdicts".into())?;
    Ok(format!(
        "{} polys: {mono} monotone with 0 violations in 500 pairs each, {witnessed} counterexamples verified, {irrational} with only irrational roots",
        polys.len()
    ))
}

// criterion 3

fn criterion_3() -> Verdict {
    let mut rng = testkit::rng(53);
    let mut n = 0;
    for (p, r) in testkit::SCALES {
        let c = Rational::new(p, r);
        let m = HahnModel::singleton(c.clone()).unwrap();
        for _ in 0..50 {
            let f = testkit::sigma_poly(&mut rng, -2, 3, 5);
            let a = HahnVector::term(Index::Pos(0), testkit::nonzero_rational(&mut rng, 9, 4));
            let expected = a.scale(&oracle_scalar(&f, &c));
            let got = sp_eval(&m, &f, &a).unwrap();
            ensure(got == expected, || format!("c = {c}, f = {f}: {got:?} ≠ {expected:?}"))?;
            if !f.is_zero() {
                let (shift, p0) = f.associated_poly().unwrap();
                let corrected = a.scale(&(c.pow(shift) * p0.eval(&c)));
                ensure(corrected == expected, || format!("c = {c}, f = {f}: shift-corrected f̃ disagrees"))?;
            }
            n += 1;
        }
    }
    Ok(format!("{n}/200 exact matches"))
}

// criterion 4

fn criterion_4() -> Verdict {
    let mut rng = testkit::rng(47);
    let mut solved = 0;
    let mut total = 0;
    while total < 300 {
        let t = testkit::solve_triple(&mut rng);
        if t.f.is_zero() {
            continue;
        }
        total += 1;
        let span = (t.f.degree().unwrap() - t.f.order().unwrap()) as usize;
        let cap = t.x.support_len() * (span + 1) + 8;
        let d = oracle_eval(&t.model, &t.f, &t.x);
        if let Ok(SolveOutcome::Solved { x }) = solve_exact(&t.f, &d, &t.model, cap) {
            if oracle_eval(&t.model, &t.f, &x) == d {
                solved += 1;
            }
        }
    }
    ensure(solved == 300, || format!("{solved}/300 round trips verified"))?;

    let m = HahnModel::int_shift();
    let f = SigmaPoly::from_ints(&[1, 1]);
    let e = |n: i64| HahnVector::basis(Index::Int(n));
    let d = e(0);
    let mut s = GreedySolver::new(&m, &f, &d).unwrap();
    for step in 1..=10 {
        s.step();
        let lhs = oracle_eval(&m, &f, s.partial()).add(s.remainder());
        ensure(lhs == d, || format!("bookkeeping broken at step {step}"))?;
    }
    // f(Σ_{i<n} (−1)^i e_i) = e₀ + (−1)^{n−1} e_n, so the remainder is (−1)^n e_n
    let partial: HahnVector = HahnVector::from_terms((0..10).map(|i| (Index::Int(i), q(if i % 2 == 0 { 1 } else { -1 }))));
    let out = solve_exact(&f, &d, &m, 10).unwrap();
    ensure(
        out == SolveOutcome::Residual {
            partial,
            remainder: e(10),
            steps: 10,
        },
        || format!("1+σ, e₀: {out:?}"),
    )?;
    for cap in [1, 5, 25, 64] {
        let out = solve_exact(&f, &d, &m, cap).unwrap();
        ensure(!out.is_solved(), || format!("false Solved at cap {cap}"))?;
    }
    Ok("300/300 verified; 1+σ = e₀ stays Residual with exact bookkeeping".into())
}

// criterion 5

/// Order, vector space and σ laws on `pairs` random pairs from `samples`.
fn laws<M: Ovsa>(m: &M, samples: &[M::Elem], pairs: usize, rng: &mut TestRng) -> Result<(), String> {
    let pick = |rng: &mut TestRng| samples[rng.random_range(0..samples.len())].clone();
    for _ in 0..pairs {
        let (x, y, z) = (pick(rng), pick(rng), pick(rng));
        let r = Rational::new(rng.random_range(1..=9), rng.random_range(1..=5));
        let xy = m.cmp(&x, &y);
        let fail = |what: &str| format!("{what} at x = {x:?}, y = {y:?}");
        ensure(m.cmp(&y, &x) == xy.reverse(), || fail("antisymmetry"))?;
        ensure((xy == Ordering::Equal) == (x == y), || fail("totality"))?;
        if xy == Ordering::Less && m.cmp(&y, &z) == Ordering::Less {
            ensure(m.cmp(&x, &z) == Ordering::Less, || fail("transitivity"))?;
        }
        ensure(m.cmp(&m.add(&x, &z), &m.add(&y, &z)) == xy, || fail("translation"))?;
        ensure(m.cmp(&m.scale(&x, &r), &m.scale(&y, &r)) == xy, || fail("scaling"))?;
        let (sx, sy) = (m.sigma_pow(&x, 1), m.sigma_pow(&y, 1));
        ensure(m.cmp(&sx, &sy) == xy, || fail("σ order"))?;
        ensure(m.cmp(&m.sigma_pow(&x, -1), &m.sigma_pow(&y, -1)) == xy, || fail("σ⁻¹ order"))?;
        ensure(m.sigma_pow(&sx, -1) == x, || fail("σ⁻¹σ"))?;
        ensure(m.sigma_pow(&m.sigma_pow(&x, -1), 1) == x, || fail("σσ⁻¹"))?;
        ensure(m.sigma_pow(&m.add(&x, &y), 1) == m.add(&sx, &sy), || fail("σ additive"))?;
    }
    Ok(())
}

fn criterion_5() -> Verdict {
    let mut rng = testkit::rng(73);
    for n in 0..20 {
        let c = testkit::degree1_config(&mut rng);
        let base = Model::Hahn(c.base.clone());
        let rhs = Element::Hahn(c.rhs.clone());
        let cut = ModelCut::SignOf {
            poly: c.poly.clone(),
            rhs: rhs.clone(),
            direction: c.direction,
        };
        let ext = adjoin_degree1_solution(base, c.poly.clone(), rhs.clone(), cut, Case::Case1)
            .map_err(|e| format!("config {n}: {e}"))?;
        let m = Model::Ext(Box::new(ext.clone()));
        let b = ext.generator();
        let residual = m.sub(&oracle_eval(&m, &c.poly, &b), &ext.embed(rhs));
        ensure(residual.is_zero(), || format!("config {n}: f(b') = {residual:?}"))?;

        let mut samples: Vec<Element> = (0..40).map(|_| testkit::element(&mut rng, &m, 3, 4)).collect();
        samples.push(b.clone());
        samples.push(m.scale(&b, &q(-2)));
        laws(&m, &samples, 500, &mut rng).map_err(|e| format!("config {n}: {e}"))?;

        // orientation of the cut from the bracket itself
        let bm = &c.base;
        ensure(bm.compare_unchecked(&c.lo, &c.hi) == Ordering::Less, || format!("config {n}: lo ≥ hi"))?;
        let (flo, fhi) = (oracle_eval(bm, &c.poly, &c.lo), oracle_eval(bm, &c.poly, &c.hi));
        let orient = bm.compare_unchecked(&fhi, &flo);
        for j in 0..20 {
            let t = Rational::new(j, 19);
            let x = c.lo.add(&c.hi.sub(&c.lo).scale(&t));
            let s = bm.compare_unchecked(&oracle_eval(bm, &c.poly, &x), &c.rhs);
            ensure(s != Ordering::Equal, || format!("config {n}: sample solves the equation"))?;
            let below_cut = s == orient.reverse();
            let got = m.cmp(&ext.embed(Element::Hahn(x.clone())), &b);
            let want = if below_cut { Ordering::Less } else { Ordering::Greater };
            ensure(got == want, || format!("config {n}: b' on the wrong side of {x:?}"))?;
        }
    }
    Ok("20/20 extensions: laws on 500 pairs, f(b') = 0, 20 bracketing samples on the cut side".into())
}

// criterion 6

/// All orders of `B ∪ C` restricting to the orders of `B` and `C`.
fn oracle_amalgams(prob: &AmalgamationProblem) -> Vec<Vec<String>> {
    let mut pts: Vec<String> = prob.b.points.clone();
    pts.extend(prob.c.points.iter().filter(|p| !prob.b.points.contains(p)).cloned());
    let mut out = Vec::new();
    permute(&mut pts, 0, &mut |perm| {
        let pos: BTreeMap<&String, usize> = perm.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let keeps = |o: &OrderWithAction| o.points.windows(2).all(|w| pos[&w[0]] < pos[&w[1]]);
        if keeps(&prob.b) && keeps(&prob.c) {
            out.push(perm.to_vec());
        }
    });
    out
}

fn permute(v: &mut Vec<String>, k: usize, visit: &mut impl FnMut(&[String])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Checks the amalgam is a strict total order extending `B` and `C` with
/// matching generator actions.
fn valid_amalgam(prob: &AmalgamationProblem, d: &OrderWithAction) -> Result<(), String> {
    let mut want: BTreeSet<&String> = prob.b.points.iter().collect();
    want.extend(prob.c.points.iter());
    let have: BTreeSet<&String> = d.points.iter().collect();
    ensure(want == have && have.len() == d.points.len(), || "carrier is not B ∪ C".into())?;
    let pos = |p: &String| d.points.iter().position(|x| x == p).unwrap();
    for i in 0..d.points.len() {
        for j in 0..d.points.len() {
            for k in 0..d.points.len() {
                let (a, b, c) = (&d.points[i], &d.points[j], &d.points[k]);
                let lt = |x: &str, y: &str| d.compare(x, y) == Some(Ordering::Less);
                if lt(a, b) && lt(b, c) {
                    ensure(lt(a, c), || format!("not transitive at {a}, {b}, {c}"))?;
                }
                ensure((i == j) == (d.compare(a, b) == Some(Ordering::Equal)), || "not total".into())?;
            }
        }
    }
    for src in [&prob.b, &prob.c] {
        ensure(src.points.windows(2).all(|w| pos(&w[0]) < pos(&w[1])), || "embedding breaks order".into())?;
        for (g, map) in src.generators.iter().enumerate() {
            for (p, img) in map {
                ensure(d.generators[g].get(p) == Some(img), || format!("generator {g} differs at {p}"))?;
            }
        }
    }
    Ok(())
}

fn criterion_6() -> Verdict {
    let problems = testkit::all_order_problems(6);
    for prob in &problems {
        let am = amalgamate_orders(prob).map_err(|e| format!("{prob:?}: {e}"))?;
        valid_amalgam(prob, &am.d).map_err(|e| format!("{prob:?}: {e}"))?;
        ensure(oracle_amalgams(prob).contains(&am.d.points), || format!("{prob:?}: not among the amalgams"))?;
    }
    let mut rng = testkit::rng(43);
    for _ in 0..100 {
        let prob = testkit::random_order_problem(&mut rng, 12);
        let am = amalgamate_orders(&prob).map_err(|e| format!("{prob:?}: {e}"))?;
        valid_amalgam(&prob, &am.d).map_err(|e| format!("{prob:?}: {e}"))?;
    }
    Ok(format!("{} exhaustive problems match the oracle; 100 random problems ≤ 12 valid", problems.len()))
}

// criterion 7

/// Longest `φ ψ φ …` subsequence by dynamic programming, minus one.
fn oracle_alt(truth: &[(bool, bool)]) -> Option<usize> {
    // best[i][p]: longest alternation ending at i whose last term is φ (p = 0) or ψ (p = 1)
    let mut best = vec![[0usize; 2]; truth.len()];
    let mut longest = 0;
    for i in 0..truth.len() {
        let (p, s) = truth[i];
        if p {
            let prev = (0..i).map(|j| best[j][1]).filter(|&l| l > 0).max().unwrap_or(0);
            best[i][0] = if prev > 0 { prev + 1 } else { 1 };
        }
        if s {
            let prev = (0..i).map(|j| best[j][0]).max().unwrap_or(0);
            best[i][1] = if prev > 0 { prev + 1 } else { 0 };
        }
        longest = longest.max(best[i][0]).max(best[i][1]);
    }
    longest.checked_sub(1)
}

fn order_atoms(generators: usize) -> Vec<(GTerm, GTerm)> {
    let mut words = vec![Vec::new()];
    if generators > 0 {
        words.push(vec![Letter { gen: 0, inverse: false }]);
        words.push(vec![Letter { gen: 0, inverse: true }]);
    }
    let mut terms = Vec::new();
    for var in 0..2 {
        for w in &words {
            terms.push(GTerm { var, word: w.clone() });
        }
    }
    let mut out = Vec::new();
    for l in &terms {
        for r in &terms {
            out.push((l.clone(), r.clone()));
        }
    }
    out
}

fn rel_holds(rel: Relation, o: Ordering) -> bool {
    matches!(
        (rel, o),
        (Relation::Lt, Ordering::Less) | (Relation::Gt, Ordering::Greater) | (Relation::Eq, Ordering::Equal)
    )
}

fn criterion_7() -> Verdict {
    let rels = [Relation::Lt, Relation::Gt, Relation::Eq];
    let mut checked = 0usize;
    for n in 1..=8usize {
        let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        // order-indiscernible 1-sequences: increasing, decreasing or constant
        let mut seqs: Vec<Vec<usize>> = Vec::new();
        for mask in 1u32..(1 << n) {
            let inc: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if inc.len() > 1 {
                seqs.push(inc.iter().rev().copied().collect());
            }
            seqs.push(inc);
        }
        for p in 0..n {
            for len in 2..=n {
                seqs.push(vec![p; len]);
            }
        }
        for generators in 0..=1 {
            let s = OrderWithAction {
                points: points.clone(),
                generators: (0..generators)
                    .map(|_| points.iter().map(|p| (p.clone(), p.clone())).collect())
                    .collect(),
            };
            for (l, r) in order_atoms(generators) {
                for &r1 in &rels {
                    for &r2 in &rels {
                        if r1 == r2 {
                            continue;
                        }
                        let atom = |rel| {
                            QFFormula::new(1, Formula::Atom(OrderAtom { left: l.clone(), rel, right: r.clone() }))
                        };
                        let (phi, psi) = (atom(r1), atom(r2));
                        for b in 0..n {
                            for seq in &seqs {
                                // the action is trivial on a finite chain, so g·x is x
                                let val = |t: &GTerm, x: usize| if t.var == 0 { x } else { b };
                                let truth: Vec<(bool, bool)> = seq
                                    .iter()
                                    .map(|&x| {
                                        let o = val(&l, x).cmp(&val(&r, x));
                                        (rel_holds(r1, o), rel_holds(r2, o))
                                    })
                                    .collect();
                                let want = oracle_alt(&truth);
                                let tuples: Vec<Vec<String>> = seq.iter().map(|&x| vec![points[x].clone()]).collect();
                                let got = alt_count(&s, &phi, &psi, &tuples, &[points[b].clone()])
                                    .map_err(|e| e.to_string())?;
                                ensure(got.value() == want.unwrap_or(0), || {
                                    format!("alt {got:?} vs oracle {want:?} on {seq:?}, b = {b}")
                                })?;
                                ensure(got.value() <= 1, || format!("alt = {} on {seq:?}", got.value()))?;
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut rng = testkit::rng(71);
    for n in 0..100 {
        let (m, seq) = testkit::indiscernible_sequence(&mut rng, 6, 3);
        let model = Model::Hahn(m.clone());
        let fail = is_qf_indiscernible(&model, &seq, 3, &default_term_bank()).map_err(|e| e.to_string())?;
        ensure(fail.is_none(), || format!("sequence {n} is not qf-indiscernible: {fail:?}"))?;
        let deg = rng.random_range(0..=3);
        let p = testkit::sigma_poly(&mut rng, 0, deg, 4);
        let vals: Vec<HahnVector> = seq.iter().map(|a| oracle_eval(&m, &p, a.as_hahn().unwrap())).collect();
        let mut signs = BTreeSet::new();
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                signs.insert(m.compare_unchecked(&vals[i], &vals[j]));
            }
        }
        ensure(signs.len() == 1, || format!("sequence {n}: ({p})(aᵢ) is neither monotone nor constant"))?;
    }
    Ok(format!("{checked} atomic alternations ≤ 1 and equal to the oracle; 100/100 OVSA sequences monotone or constant"))
}

// criterion 8

fn criterion_8() -> Verdict {
    let mut rng = testkit::rng(83);
    for n in 0..20 {
        let c = testkit::flank_config(&mut rng);
        let out = check_not_flanking_subgroup(&c.f, &c.d, &c.model, &c.subgroup, DEFAULT_K_BOUND)
            .map_err(|e| format!("config {n}: {e}"))?;
        let r = match out {
            FlankCheck::Separated(r) => r,
            FlankCheck::KBoundExceeded { .. } => return Err(format!("config {n}: k bound exceeded")),
        };
        ensure(r.separates(), || format!("config {n}: report does not separate"))?;
        let k = q(r.k as i64);
        ensure(r.lower == r.witness.scale(&k.recip()) && r.upper == r.witness.scale(&k), || {
            format!("config {n}: bracket is not w/k, k·w")
        })?;
        let m = &c.model;
        let lo = m.compare_unchecked(&oracle_eval(m, &c.f, &r.lower), &c.d);
        let hi = m.compare_unchecked(&oracle_eval(m, &c.f, &r.upper), &c.d);
        ensure(lo != Ordering::Equal && hi != Ordering::Equal && lo != hi, || {
            format!("config {n}: f(w/k), f(k·w) do not straddle d")
        })?;
        // w/k and k·w share sign and support, so no convex subgroup separates them
        ensure(
            m.sign(&r.lower) == m.sign(&r.upper) && r.lower.support().eq(r.upper.support()),
            || format!("config {n}: bracket leaves an Archimedean class"),
        )?;
    }
    Ok("20/20 configurations separated".into())
}

// criterion 9

/// `φ = (t₁ r₁ 0) ∧ (t₂ s₁ 0)` and `ψ = (t₁ r₂ 0) ∨ (t₂ s₂ 0)` with `r₁ ≠ r₂`,
/// `s₁ ≠ s₂`, for `tᵢ = pᵢ(x) − qᵢ(y)`; disjoint by construction.
#[derive(Debug, Clone)]
struct PairSpec {
    terms: [(SigmaPoly, SigmaPoly); 2],
    phi: [Relation; 2],
    psi: [Relation; 2],
    single: bool,
}

impl PairSpec {
    fn random(rng: &mut TestRng) -> Self {
        let rels = [Relation::Lt, Relation::Gt, Relation::Eq];
        let poly = |rng: &mut TestRng| {
            let d = rng.random_range(0..=1);
            let p = testkit::sigma_poly(rng, 0, d, 3);
            if p.is_zero() {
                SigmaPoly::one()
            } else {
                p
            }
        };
        let terms = [(poly(rng), poly(rng)), (poly(rng), poly(rng))];
        let pair = |rng: &mut TestRng| {
            let a = rng.random_range(0..3);
            let b = (a + rng.random_range(1..3)) % 3;
            (rels[a], rels[b])
        };
        let ((p0, s0), (p1, s1)) = (pair(rng), pair(rng));
        PairSpec {
            terms,
            phi: [p0, p1],
            psi: [s0, s1],
            single: rng.random_bool(0.3),
        }
    }

    fn term(&self, i: usize) -> QFTerm {
        QFTerm::poly(0, self.terms[i].0.clone()).sub(&QFTerm::poly(1, self.terms[i].1.clone()))
    }

    fn formulas(&self) -> (QFFormula<OvsaAtom>, QFFormula<OvsaAtom>) {
        let atom = |i: usize, rel| Formula::Atom(OvsaAtom { term: self.term(i), rel });
        if self.single {
            return (QFFormula::new(1, atom(0, self.phi[0])), QFFormula::new(1, atom(0, self.psi[0])));
        }
        (
            QFFormula::new(1, Formula::And(vec![atom(0, self.phi[0]), atom(1, self.phi[1])])),
            QFFormula::new(1, Formula::Or(vec![atom(0, self.psi[0]), atom(1, self.psi[1])])),
        )
    }

    /// `Some(true)` for φ, `Some(false)` for ψ, evaluated from the coefficients.
    fn oracle(&self, m: &HahnModel, x: &HahnVector, y: &HahnVector) -> Option<bool> {
        let sign = |i: usize| {
            let (p, q) = &self.terms[i];
            m.sign(&oracle_eval(m, p, x).sub(&oracle_eval(m, q, y)))
        };
        let (s0, s1) = (sign(0), sign(1));
        let (phi, psi) = if self.single {
            (rel_holds(self.phi[0], s0), rel_holds(self.psi[0], s0))
        } else {
            (
                rel_holds(self.phi[0], s0) && rel_holds(self.phi[1], s1),
                rel_holds(self.psi[0], s0) || rel_holds(self.psi[1], s1),
            )
        };
        assert!(!(phi && psi));
        if phi {
            Some(true)
        } else if psi {
            Some(false)
        } else {
            None
        }
    }
}

/// The `2ⁿ` pattern is realized iff some `n`-tuple from the pool has every
/// trace set `{i : φ(aᵢ; b)}` among its fully decided parameters.
fn oracle_ip(table: &[Vec<Option<bool>>], n: usize) -> bool {
    let na = table.len();
    if na == 0 {
        return n == 0;
    }
    let mut tuple = vec![0usize; n];
    loop {
        let mut traces = BTreeSet::new();
        for j in 0..table.first().map_or(0, Vec::len) {
            let row: Option<Vec<bool>> = tuple.iter().map(|&a| table[a][j]).collect();
            if let Some(row) = row {
                traces.insert(row);
            }
        }
        if traces.len() == 1 << n {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            tuple[i] += 1;
            if tuple[i] < na {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

fn criterion_9() -> Verdict {
    let mut rng = testkit::rng(97);
    let shapes = testkit::model_shapes();
    let (mut searches, mut found) = (0, 0);
    for _ in 0..50 {
        let pair = PairSpec::random(&mut rng);
        let (phi, psi) = pair.formulas();
        let (_, m) = &shapes[rng.random_range(0..shapes.len())];
        let model = Model::Hahn(m.clone());
        let a_univ: Vec<HahnVector> = (0..5).map(|_| testkit::vector(&mut rng, m, 2, 2)).collect();
        let b_univ: Vec<HahnVector> = (0..5).map(|_| testkit::vector(&mut rng, m, 2, 2)).collect();
        let full: Vec<Vec<Option<bool>>> =
            a_univ.iter().map(|a| b_univ.iter().map(|b| pair.oracle(m, a, b)).collect()).collect();
        let subset = |mask: usize| -> Vec<usize> { (0..5).filter(|i| mask >> i & 1 == 1).collect() };
        // every nonempty sub-pool of both universes
        for am in 1..32usize {
            for bm in 1..32usize {
                let (ia, ib) = (subset(am), subset(bm));
                let a_pool: Vec<Vec<Element>> = ia.iter().map(|&i| vec![Element::Hahn(a_univ[i].clone())]).collect();
                let b_pool: Vec<Vec<Element>> = ib.iter().map(|&j| vec![Element::Hahn(b_univ[j].clone())]).collect();
                let table: Vec<Vec<Option<bool>>> = ia.iter().map(|&i| ib.iter().map(|&j| full[i][j]).collect()).collect();
                for n in 1..=2 {
                    let got = ip_pattern_search(&model, &phi, &psi, n, &a_pool, &b_pool).map_err(|e| e.to_string())?;
                    let want = oracle_ip(&table, n);
                    ensure(got.is_found() == want, || format!("{pair:?}, n = {n}: search {got:?}, oracle {want}"))?;
                    searches += 1;
                    found += usize::from(want);
                }
            }
        }
    }

    // canonical pairs x < y against x > y: no 2-pattern in any linear data
    let lt = |rel| QFFormula::new(1, Formula::Atom(OrderAtom { left: GTerm::var(0), rel, right: GTerm::var(1) }));
    let points: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
    let chain = OrderWithAction::chain(points.clone());
    let pool: Vec<Vec<String>> = points.iter().map(|p| vec![p.clone()]).collect();
    let out = ip_pattern_search(&chain, &lt(Relation::Lt), &lt(Relation::Gt), 2, &pool, &pool).map_err(|e| e.to_string())?;
    ensure(!out.is_found(), || "order atoms realize a 2-pattern".into())?;
    let m = HahnModel::int_shift();
    let model = Model::Hahn(m.clone());
    let x_lt_y = |rel| QFFormula::new(1, Formula::Atom(OvsaAtom::compare(QFTerm::var(0), rel, QFTerm::var(1))));
    let pool: Vec<Vec<Element>> = (0..5).map(|_| vec![Element::Hahn(testkit::vector(&mut rng, &m, 2, 3))]).collect();
    let out = ip_pattern_search(&model, &x_lt_y(Relation::Lt), &x_lt_y(Relation::Gt), 2, &pool, &pool)
        .map_err(|e| e.to_string())?;
    ensure(!out.is_found(), || "x < y, x > y realize a 2-pattern".into())?;
    Ok(format!("{searches} searches agree with the oracle ({found} found); canonical pairs notFound"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("opposed shifts reproduction", criterion_1),
        ("monotonicity classifier vs probe", criterion_2),
        ("singleton scaling instances", criterion_3),
        ("solver round trip", criterion_4),
        ("degree-1 adjunction", criterion_5),
        ("order amalgamation", criterion_6),
        ("alternation bounds", criterion_7),
        ("flank separation", criterion_8),
        ("IP search soundness", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS ({name}, {secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL ({name}, {secs:.2}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
