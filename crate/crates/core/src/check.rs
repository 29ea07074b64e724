//! Sampled law checks for ordered vector spaces with an automorphism.

use std::cmp::Ordering;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amalg::{amalgamate_orders, is_embedding};
use crate::error::{Error, Result};
use crate::extend::{adjoin_degree1_solution, adjoin_shift_orbit, Case, Element, Model, ModelCut, Placement};
use crate::formulas::{alt_count, Formula, GTerm, Letter, OrderAtom, QFFormula, Relation};
use crate::scalars::{Rational, UniPoly};
use crate::sigmapoly::{sp_eval_unchecked, Ovsa, SigmaPoly};
use crate::solve::{solve_exact, SolveOutcome};
use crate::testkit::{self, TestRng};

/// Outcome of one family of checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub name: String,
    pub cases: usize,
    pub failed: usize,
    /// The first few failure messages.
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn new(name: impl Into<String>) -> Self {
        LawReport {
            name: name.into(),
            cases: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// `verified/cases`.
    pub fn tally(&self) -> String {
        format!("{}/{}", self.cases - self.failed, self.cases)
    }

    /// Records one case; keeps at most a handful of failure messages.
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        self.failed += usize::from(!ok);
        if !ok && self.failures.len() < 8 {
            self.failures.push(what());
        }
    }

    pub fn merge(&mut self, other: LawReport) {
        self.cases += other.cases;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < 8 {
                self.failures.push(format!("{}: {f}", other.name));
            }
        }
    }
}

/// Checks order, vector space and automorphism laws on `pairs` random pairs
/// (with a random third element) drawn from `samples`.
pub fn ovsa_laws<M: Ovsa>(model: &M, samples: &[M::Elem], pairs: usize, rng: &mut TestRng) -> LawReport {
    let mut report = LawReport::new("ovsa-laws");
    if samples.is_empty() {
        return report;
    }
    for _ in 0..pairs {
        let x = samples.choose(rng).unwrap();
        let y = samples.choose(rng).unwrap();
        let z = samples.choose(rng).unwrap();
        let r = Rational::new(rng.random_range(1..=7), rng.random_range(1..=4));
        let xy = model.cmp(x, y);
        let dbg = || format!("x = {x:?}, y = {y:?}, z = {z:?}");

        report.record(xy == model.cmp(y, x).reverse(), || format!("antisymmetry: {}", dbg()));
        report.record((xy == Ordering::Equal) == (x == y), || format!("equality: {}", dbg()));
        let (xz, yz) = (model.add(x, z), model.add(y, z));
        report.record(model.cmp(&xz, &yz) == xy, || format!("translation: {}", dbg()));
        let (rx, ry) = (model.scale(x, &r), model.scale(y, &r));
        report.record(model.cmp(&rx, &ry) == xy, || format!("positive scaling by {r}: {}", dbg()));
        if xy == Ordering::Less && model.cmp(y, z) == Ordering::Less {
            report.record(model.cmp(x, z) == Ordering::Less, || format!("transitivity: {}", dbg()));
        }

        let (sx, sy) = (model.sigma_pow(x, 1), model.sigma_pow(y, 1));
        report.record(model.cmp(&sx, &sy) == xy, || format!("σ preserves order: {}", dbg()));
        let (ix, iy) = (model.sigma_pow(x, -1), model.sigma_pow(y, -1));
        report.record(model.cmp(&ix, &iy) == xy, || format!("σ⁻¹ preserves order: {}", dbg()));
        report.record(model.sigma_pow(&sx, -1) == *x, || format!("σ⁻¹σ = id: {}", dbg()));
        report.record(model.sigma_pow(&ix, 1) == *x, || format!("σσ⁻¹ = id: {}", dbg()));
        report.record(
            model.sigma_pow(&model.add(x, y), 1) == model.add(&sx, &sy),
            || format!("σ additive: {}", dbg()),
        );
        report.record(
            model.sigma_pow(&rx, 1) == model.scale(&sx, &r),
            || format!("σ linear: {}", dbg()),
        );
    }
    report
}

/// Registered suite names, in the order `all` runs them.
pub const SUITES: [&str; 9] = [
    "scalars",
    "orders",
    "hahn",
    "sigmapoly",
    "solve-roundtrip",
    "extend",
    "amalg",
    "formulas",
    "all",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub reports: Vec<LawReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(LawReport::passed)
    }

    pub fn cases(&self) -> usize {
        self.reports.iter().map(|r| r.cases).sum()
    }
}

/// Runs a named suite deterministically from `seed`.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let mut rng = testkit::rng(seed);
    let reports = match name {
        "scalars" => vec![scalars_suite(&mut rng)],
        "orders" => vec![orders_suite(&mut rng)],
        "hahn" => vec![hahn_suite(&mut rng)],
        "sigmapoly" => vec![sigmapoly_suite(&mut rng)],
        "solve-roundtrip" => vec![solve_roundtrip_suite(&mut rng)],
        "extend" => vec![extend_suite(&mut rng)],
        "amalg" => vec![amalg_suite(&mut rng)],
        "formulas" => vec![formulas_suite(&mut rng)],
        "all" => {
            let mut all = Vec::new();
            for s in &SUITES[..SUITES.len() - 1] {
                all.extend(run_suite(s, seed)?.reports);
            }
            all
        }
        _ => return Err(Error::UnknownSuite(name.to_owned())),
    };
    Ok(SuiteReport {
        suite: name.to_owned(),
        seed,
        reports,
    })
}

fn random_uni(rng: &mut TestRng, max_degree: usize) -> UniPoly {
    let d = rng.random_range(0..=max_degree);
    UniPoly::new((0..=d).map(|_| testkit::rational(rng, 5, 3)).collect())
}

fn scalars_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("scalars");
    for _ in 0..200 {
        let (p, q) = (random_uni(rng, 6), random_uni(rng, 6));
        let x = testkit::rational(rng, 6, 4);
        r.record(p.add(&q).eval(&x) == p.eval(&x) + q.eval(&x), || format!("eval(p+q) at {x}: {p}, {q}"));
        r.record(p.mul(&q).eval(&x) == p.eval(&x) * q.eval(&x), || format!("eval(p·q) at {x}: {p}, {q}"));
        if p.is_zero() {
            continue;
        }
        let (roots, cofactor) = p.extract_positive_rational_roots().expect("nonzero");
        let rebuilt = roots.iter().fold(cofactor.clone(), |acc, (c, m)| {
            (0..*m).fold(acc, |acc, _| acc.mul(&UniPoly::linear_root(c)))
        });
        r.record(rebuilt == p, || format!("root extraction does not rebuild {p}"));
        let rational_roots: usize = roots.len();
        r.record(
            p.count_positive_roots().expect("nonzero") >= rational_roots,
            || format!("fewer positive roots than rational ones in {p}"),
        );
    }
    r
}

fn orders_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("orders");
    for _ in 0..10 {
        let m = testkit::model(rng);
        let (order, tau) = (m.order(), m.tau());
        for _ in 0..500 {
            let (Some(i), Some(j), Some(k)) = (
                testkit::index(rng, order, 6),
                testkit::index(rng, order, 6),
                testkit::index(rng, order, 6),
            ) else {
                continue;
            };
            let ij = order.compare_unchecked(&i, &j);
            r.record(ij == order.compare_unchecked(&j, &i).reverse(), || format!("antisymmetry at {i:?}, {j:?}"));
            r.record((ij == Ordering::Equal) == (i == j), || format!("equality at {i:?}, {j:?}"));
            if ij == Ordering::Less && order.compare_unchecked(&j, &k) == Ordering::Less {
                r.record(order.compare_unchecked(&i, &k) == Ordering::Less, || {
                    format!("transitivity at {i:?}, {j:?}, {k:?}")
                });
            }
            let (ti, tj) = (tau.apply_power_unchecked(&i, 1), tau.apply_power_unchecked(&j, 1));
            r.record(order.compare_unchecked(&ti, &tj) == ij, || format!("τ order at {i:?}, {j:?}"));
            r.record(tau.apply_power_unchecked(&ti, -1) == i, || format!("τ⁻¹τ at {i:?}"));
        }
    }
    r
}

fn hahn_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("hahn");
    for _ in 0..10 {
        let m = testkit::model(rng);
        let samples: Vec<_> = (0..40).map(|_| testkit::vector(rng, &m, 4, 5)).collect();
        r.merge(ovsa_laws(&m, &samples, 500, rng));
        for _ in 0..50 {
            let v = testkit::nonzero_vector(rng, &m, 3, 4);
            let w = testkit::nonzero_vector(rng, &m, 3, 4);
            let (av, aw) = (abs(&m, &v), abs(&m, &w));
            let archimedean = (1..=64).all(|n| m.compare_unchecked(&av.scale(&Rational::from_int(n)), &aw) == Ordering::Less);
            let valuation = m.rel_much_smaller(&v, &w).expect("nonzero");
            r.record(archimedean == valuation, || format!("≪ at {v:?}, {w:?}"));
        }
    }
    r
}

fn abs(m: &crate::hahn::HahnModel, v: &crate::hahn::HahnVector) -> crate::hahn::HahnVector {
    if m.sign(v) == Ordering::Less {
        v.neg()
    } else {
        v.clone()
    }
}

fn sigmapoly_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("sigmapoly");
    let shapes = testkit::model_shapes();
    for _ in 0..100 {
        let deg_f = rng.random_range(0..=4);
        let f = testkit::sigma_poly(rng, -1, deg_f, 4);
        let deg_g = rng.random_range(0..=3);
        let g = testkit::sigma_poly(rng, -1, deg_g, 4);
        let (_, m) = shapes.choose(rng).unwrap();
        let v = testkit::vector(rng, m, 3, 4);
        let fv = sp_eval_unchecked(m, &f, &v);
        let gv = sp_eval_unchecked(m, &g, &v);
        r.record(sp_eval_unchecked(m, &f.add(&g), &v) == fv.add(&gv), || format!("(f+g)(v): {f}, {g}"));
        r.record(
            sp_eval_unchecked(m, &f.mul(&g), &v) == sp_eval_unchecked(m, &f, &gv),
            || format!("(f·g)(v): {f}, {g}"),
        );
        let beta = testkit::rational(rng, 5, 3);
        r.record(sp_eval_unchecked(m, &f, &v.scale(&beta)) == fv.scale(&beta), || format!("β·f(a): {f}"));
        if f.is_zero() {
            continue;
        }
        let Some(dir) = f.classify_monotone().expect("nonzero").direction() else {
            continue;
        };
        for (name, m) in &shapes {
            for _ in 0..5 {
                let (v, w) = (testkit::vector(rng, m, 3, 4), testkit::vector(rng, m, 3, 4));
                let vw = m.compare_unchecked(&v, &w);
                if vw == Ordering::Equal {
                    continue;
                }
                let fvw = m.compare_unchecked(&sp_eval_unchecked(m, &f, &v), &sp_eval_unchecked(m, &f, &w));
                let expected = if dir.as_sign() == Ordering::Greater { vw } else { vw.reverse() };
                r.record(fvw == expected, || format!("{f} not monotone on {name}"));
            }
        }
    }
    r
}

/// The round-trip cap `|supp(x)|·(span + 1) + 8`.
pub fn roundtrip_cap(f: &SigmaPoly, x: &crate::hahn::HahnVector) -> usize {
    let span = match (f.degree(), f.order()) {
        (Some(d), Some(o)) => (d - o) as usize,
        _ => 0,
    };
    x.support_len() * (span + 1) + 8
}

fn solve_roundtrip_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("solve-roundtrip");
    let mut done = 0;
    while done < 300 {
        let t = testkit::solve_triple(rng);
        if t.f.is_zero() {
            continue;
        }
        done += 1;
        let d = sp_eval_unchecked(&t.model, &t.f, &t.x);
        let out = solve_exact(&t.f, &d, &t.model, roundtrip_cap(&t.f, &t.x));
        let ok = match &out {
            Ok(SolveOutcome::Solved { x }) => sp_eval_unchecked(&t.model, &t.f, x) == d,
            _ => false,
        };
        r.record(ok, || format!("f = {}, x = {:?}: {out:?}", t.f, t.x));
    }
    r
}

fn extend_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("extend");
    for _ in 0..20 {
        let c = testkit::degree1_config(rng);
        let base = Model::Hahn(c.base.clone());
        let cut = ModelCut::SignOf {
            poly: c.poly.clone(),
            rhs: Element::Hahn(c.rhs.clone()),
            direction: c.direction,
        };
        let ext = match adjoin_degree1_solution(base.clone(), c.poly.clone(), Element::Hahn(c.rhs.clone()), cut.clone(), Case::Case1) {
            Ok(e) => e,
            Err(e) => {
                r.record(false, || format!("adjunction failed for {}: {e}", c.poly));
                continue;
            }
        };
        let m = Model::Ext(Box::new(ext.clone()));
        let b = ext.generator();
        r.record(
            sp_eval_unchecked(&m, &c.poly, &b) == ext.embed(Element::Hahn(c.rhs.clone())),
            || format!("f(b') ≠ a for {}", c.poly),
        );
        let mut samples: Vec<Element> = (0..40).map(|_| testkit::element(rng, &m, 3, 4)).collect();
        samples.push(b.clone());
        r.merge(ovsa_laws(&m, &samples, 500, rng));
        for _ in 0..20 {
            let t = Rational::new(rng.random_range(0..=16), 16);
            let x = c.lo.add(&c.hi.sub(&c.lo).scale(&t));
            let side = cut.placement(&base, &Element::Hahn(x.clone())).expect("base element");
            let bx = m.cmp(&b, &ext.embed(Element::Hahn(x.clone())));
            let ok = match side {
                Placement::Left => bx == Ordering::Greater,
                Placement::Right => bx == Ordering::Less,
                Placement::On => false,
            };
            r.record(ok, || format!("b' misplaced against {x:?} for {}", c.poly));
        }
    }
    for _ in 0..5 {
        let base = testkit::model(rng);
        let (m, orbit) = adjoin_shift_orbit(&base);
        let mut samples: Vec<_> = (0..30).map(|_| testkit::vector(rng, &m, 3, 4)).collect();
        samples.extend((-3..=3).map(|i| orbit.element(i)));
        r.merge(ovsa_laws(&m, &samples, 200, rng));
    }
    r
}

fn amalg_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("amalg");
    let mut problems = testkit::all_order_problems(6);
    problems.extend((0..100).map(|_| testkit::random_order_problem(rng, 12)));
    for prob in &problems {
        let ok = match amalgamate_orders(prob) {
            Ok(am) => is_embedding(&prob.b, &am.d, &am.emb_b) && is_embedding(&prob.c, &am.d, &am.emb_c),
            Err(_) => false,
        };
        r.record(ok, || format!("amalgamation failed for {prob:?}"));
    }
    r
}

fn formulas_suite(rng: &mut TestRng) -> LawReport {
    let mut r = LawReport::new("formulas");
    // g·x < y against g·x > y on increasing chains with a nontrivial automorphism
    for n in 1..=8usize {
        let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let shift: std::collections::BTreeMap<String, String> =
            points.iter().map(|p| (p.clone(), p.clone())).collect();
        let s = crate::amalg::OrderWithAction {
            points: points.clone(),
            generators: vec![shift],
        };
        let atom = |rel| {
            QFFormula::new(
                1,
                Formula::Atom(OrderAtom {
                    left: GTerm {
                        var: 0,
                        word: vec![Letter { gen: 0, inverse: false }],
                    },
                    rel,
                    right: GTerm::var(1),
                }),
            )
        };
        let (phi, psi) = (atom(Relation::Lt), atom(Relation::Gt));
        let seq: Vec<Vec<String>> = points.iter().map(|p| vec![p.clone()]).collect();
        for b in &points {
            let alt = alt_count(&s, &phi, &psi, &seq, &[b.clone()]).map(|a| a.value());
            r.record(alt.as_ref().is_ok_and(|a| *a <= 1), || format!("alt = {alt:?} on {n} points"));
        }
    }
    for _ in 0..20 {
        let (m, seq) = testkit::indiscernible_sequence(rng, 6, 3);
        let deg_f = rng.random_range(0..=3);
        let f = testkit::sigma_poly(rng, 0, deg_f, 4);
        let vals: Vec<_> = seq.iter().map(|a| sp_eval_unchecked(&m, &f, a.as_hahn().unwrap())).collect();
        let signs: Vec<Ordering> = vals.windows(2).map(|w| m.compare_unchecked(&w[0], &w[1])).collect();
        r.record(signs.windows(2).all(|w| w[0] == w[1]), || format!("{f} not monotone or constant"));
    }
    r
}
