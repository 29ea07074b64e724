//! Seeded generators for models, vectors, elements and σ-polynomials.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amalg::{AmalgamationProblem, OrderWithAction};
use crate::extend::{Element, Model};
use crate::hahn::{BlockScaling, ConvexSubgroup, HahnModel, HahnVector, Scaling};
use crate::orders::{Cut, Index, IndexOrder, OrderAuto};
use crate::scalars::Rational;
use crate::sigmapoly::{Monotone, Ovsa, SigmaPoly};
use crate::solve::{cut_of_zero, solve_exact, unbounded_image_witness, SolveOutcome, DEFAULT_SOLVE_CAP};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| ≤ max_num` and `1 ≤ q ≤ max_den`.
pub fn rational(rng: &mut TestRng, max_num: i64, max_den: i64) -> Rational {
    let p = rng.random_range(-max_num..=max_num);
    let q = rng.random_range(1..=max_den);
    Rational::new(p, q)
}

pub fn nonzero_rational(rng: &mut TestRng, max_num: i64, max_den: i64) -> Rational {
    loop {
        let r = rational(rng, max_num.max(1), max_den);
        if !r.is_zero() {
            return r;
        }
    }
}

pub fn positive_rational(rng: &mut TestRng, max_num: i64, max_den: i64) -> Rational {
    nonzero_rational(rng, max_num, max_den).abs()
}

/// A random index; integer labels are drawn from `[-radius, radius]`.
pub fn index(rng: &mut TestRng, order: &IndexOrder, radius: i64) -> Option<Index> {
    match order {
        IndexOrder::Finite { n: 0 } => None,
        IndexOrder::Finite { n } => Some(Index::Pos(rng.random_range(0..*n))),
        IndexOrder::Int | IndexOrder::IntReversed => {
            Some(Index::Int(rng.random_range(-radius..=radius)))
        }
        IndexOrder::Concat { left, right } => {
            if rng.random_bool(0.5) {
                index(rng, left, radius)
                    .map(Index::left)
                    .or_else(|| index(rng, right, radius).map(Index::right))
            } else {
                index(rng, right, radius)
                    .map(Index::right)
                    .or_else(|| index(rng, left, radius).map(Index::left))
            }
        }
    }
}

/// A vector with up to `max_terms` terms and small rational coefficients.
pub fn vector(rng: &mut TestRng, model: &HahnModel, max_terms: usize, radius: i64) -> HahnVector {
    let n = rng.random_range(0..=max_terms);
    let mut v = HahnVector::zero();
    for _ in 0..n {
        if let Some(i) = index(rng, model.order(), radius) {
            v.add_term(i, &nonzero_rational(rng, 5, 3));
        }
    }
    v
}

pub fn nonzero_vector(rng: &mut TestRng, model: &HahnModel, max_terms: usize, radius: i64) -> HahnVector {
    assert!(!model.order().is_empty(), "the zero model has no nonzero vectors");
    loop {
        let v = vector(rng, model, max_terms.max(1), radius);
        if !v.is_zero() {
            return v;
        }
    }
}

/// A random element; extension layers get a random generator coefficient.
pub fn element(rng: &mut TestRng, model: &Model, max_terms: usize, radius: i64) -> Element {
    match model {
        Model::Hahn(m) => Element::Hahn(vector(rng, m, max_terms, radius)),
        Model::Ext(e) => {
            let base = element(rng, e.base(), max_terms, radius);
            let gen = if rng.random_bool(0.7) {
                rational(rng, 4, 3)
            } else {
                Rational::zero()
            };
            Element::ext(base, gen)
        }
    }
}

/// A nonzero σ-polynomial with exponents in `[min_exp, min_exp + degree]`.
pub fn sigma_poly(rng: &mut TestRng, min_exp: i64, degree: i64, coeff_bound: i64) -> SigmaPoly {
    loop {
        let f = SigmaPoly::from_terms((min_exp..=min_exp + degree).map(|k| {
            let c = if rng.random_bool(0.75) {
                Rational::from_int(rng.random_range(-coeff_bound..=coeff_bound))
            } else {
                Rational::zero()
            };
            (k, c)
        }));
        if !f.is_zero() {
            return f;
        }
    }
}

pub const SCALES: [(i64, i64); 4] = [(1, 2), (1, 1), (2, 1), (3, 1)];

fn scale(rng: &mut TestRng) -> Rational {
    let (p, q) = *SCALES.choose(rng).unwrap();
    Rational::new(p, q)
}

/// A single random block: a shifted copy of ℤ or a short finite chain.
pub fn block(rng: &mut TestRng) -> HahnModel {
    match rng.random_range(0..4) {
        0 | 1 => {
            let k = *[-2i64, -1, 1, 2].choose(rng).unwrap();
            HahnModel::new(IndexOrder::Int, OrderAuto::shift(k), Scaling::constant(scale(rng))).unwrap()
        }
        2 => {
            let k = *[-1i64, 1].choose(rng).unwrap();
            HahnModel::new(IndexOrder::IntReversed, OrderAuto::shift(k), Scaling::constant(scale(rng)))
                .unwrap()
        }
        _ => {
            let n = rng.random_range(1..=3);
            let values = (0..n).map(|_| scale(rng)).collect();
            HahnModel::new(IndexOrder::finite(n), OrderAuto::Identity, Scaling::Table { values }).unwrap()
        }
    }
}

/// A lexicographic product of one to three random blocks.
pub fn model(rng: &mut TestRng) -> HahnModel {
    let n = rng.random_range(1..=3);
    let mut m = block(rng);
    for _ in 1..n {
        m = HahnModel::lex_product(&m, &block(rng));
    }
    m
}

/// `ℚ((ℤ⌢ℤ))` with the backward shift on the left copy and the forward shift on the right.
pub fn opposed_shifts_model() -> HahnModel {
    HahnModel::new(
        IndexOrder::concat(IndexOrder::Int, IndexOrder::Int),
        OrderAuto::concat(OrderAuto::shift(-1), OrderAuto::shift(1)),
        Scaling::one(),
    )
    .unwrap()
}

/// Four fixed model shapes covering shifts, scalings, finite blocks and mixed blocks.
pub fn model_shapes() -> Vec<(&'static str, HahnModel)> {
    let q = Rational::new;
    vec![
        ("int-shift", HahnModel::int_shift()),
        ("singleton-2", HahnModel::singleton(q(2, 1)).unwrap()),
        ("example-6-1", opposed_shifts_model()),
        (
            "mixed",
            HahnModel::lex_product(
                &HahnModel::new(IndexOrder::finite(2), OrderAuto::Identity, Scaling::Table {
                    values: vec![q(1, 2), q(3, 1)],
                })
                .unwrap(),
                &HahnModel::new(IndexOrder::Int, OrderAuto::shift(-1), Scaling::constant(q(2, 1))).unwrap(),
            ),
        ),
    ]
}

/// A solver round-trip instance: `d = f(x)` for random `f`, `x`, model.
#[derive(Debug, Clone)]
pub struct SolveTriple {
    pub model: HahnModel,
    pub f: SigmaPoly,
    pub x: HahnVector,
}

pub fn solve_triple(rng: &mut TestRng) -> SolveTriple {
    let model = model(rng);
    let min_exp = rng.random_range(-1..=1);
    let degree = rng.random_range(0..=3);
    let f = sigma_poly(rng, min_exp, degree, 4);
    let x = vector(rng, &model, 4, 5);
    SolveTriple { model, f, x }
}

/// A degree-1 extension instance: `poly = r₀ + r₁σ` with `r₀r₁ < 0`, strictly
/// monotone on `base` in `direction`, `poly(x) = rhs` not solved by the greedy
/// solver, and base points `lo`, `hi` with `poly(lo) < rhs < poly(hi)` after
/// orienting by `direction`.
#[derive(Debug, Clone)]
pub struct Degree1Config {
    pub base: HahnModel,
    pub poly: SigmaPoly,
    pub rhs: HahnVector,
    pub direction: Monotone,
    pub lo: HahnVector,
    pub hi: HahnVector,
}

pub fn degree1_config(rng: &mut TestRng) -> Degree1Config {
    loop {
        let base = model(rng);
        let r0 = positive_rational(rng, 4, 3);
        let r1 = -positive_rational(rng, 4, 3);
        let (r0, r1) = if rng.random_bool(0.5) { (r0, r1) } else { (-r0, -r1) };
        let poly = SigmaPoly::from_terms([(0, r0), (1, r1)]);
        let Some(direction) = base.monotonicity(&poly) else {
            continue;
        };
        let rhs = nonzero_vector(rng, &base, 3, 4);
        let g = match direction {
            Monotone::Increasing => poly.clone(),
            Monotone::Decreasing => poly.neg(),
        };
        let oriented = match direction {
            Monotone::Increasing => rhs.clone(),
            Monotone::Decreasing => rhs.neg(),
        };
        let (Ok(up), Ok(down)) = (
            unbounded_image_witness(&g, &base, &oriented),
            unbounded_image_witness(&g.neg(), &base, &oriented.neg()),
        ) else {
            continue;
        };
        if up.extended || down.extended {
            continue;
        }
        if let Ok(SolveOutcome::Solved { .. }) = solve_exact(&poly, &rhs, &base, DEFAULT_SOLVE_CAP) {
            continue;
        }
        return Degree1Config {
            base,
            poly,
            rhs,
            direction,
            lo: down.x,
            hi: up.x,
        };
    }
}

/// An instance for the flank check: `f` absolutely monotone, `f(x) = d` not
/// solved by the greedy solver, and a convex subgroup.
#[derive(Debug, Clone)]
pub struct FlankConfig {
    pub model: HahnModel,
    pub f: SigmaPoly,
    pub d: HahnVector,
    pub subgroup: ConvexSubgroup,
}

pub fn flank_config(rng: &mut TestRng) -> FlankConfig {
    loop {
        let model = model(rng);
        let min_exp = rng.random_range(-1..=1);
        let degree = rng.random_range(1..=3);
        let f = sigma_poly(rng, min_exp, degree, 3);
        let d = nonzero_vector(rng, &model, 2, 4);
        if cut_of_zero(&f, &d, &model).is_err() {
            continue;
        }
        match solve_exact(&f, &d, &model, DEFAULT_SOLVE_CAP) {
            Ok(SolveOutcome::Solved { .. }) | Err(_) => continue,
            Ok(_) => {}
        }
        let cut = match rng.random_range(0..4) {
            0 => Cut::AtMinusInfinity,
            1 => Cut::AtPlusInfinity,
            2 => Cut::BelowElement {
                index: index(rng, model.order(), 4).unwrap(),
            },
            _ => Cut::AboveElement {
                index: index(rng, model.order(), 4).unwrap(),
            },
        };
        let subgroup = ConvexSubgroup::new(&model, cut).expect("cut of the model's order");
        return FlankConfig { model, f, d, subgroup };
    }
}

/// `A = a0 < … < a(k−1)`; new points of `B` (resp. `C`) are placed in the
/// gaps listed by `b_gaps` (resp. `c_gaps`), gap `t` lying just below `a_t`.
pub fn order_problem(k: usize, b_gaps: &[usize], c_gaps: &[usize], generators: usize) -> AmalgamationProblem {
    let a: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
    let place = |prefix: &str, gaps: &[usize]| {
        let mut gaps: Vec<(usize, usize)> = gaps.iter().copied().enumerate().map(|(j, g)| (g, j)).collect();
        gaps.sort();
        let mut out = Vec::new();
        let mut it = gaps.into_iter().peekable();
        for t in 0..=k {
            while let Some(&(g, j)) = it.peek() {
                if g != t {
                    break;
                }
                out.push(format!("{prefix}{j}"));
                it.next();
            }
            if t < k {
                out.push(a[t].clone());
            }
        }
        out
    };
    let with_identity = |points: Vec<String>| {
        let gens = (0..generators)
            .map(|_| points.iter().map(|p| (p.clone(), p.clone())).collect())
            .collect();
        OrderWithAction { points, generators: gens }
    };
    AmalgamationProblem {
        a: with_identity(a.clone()),
        b: with_identity(place("b", b_gaps)),
        c: with_identity(place("c", c_gaps)),
    }
}

/// Every problem with `|A| + |B∖A| + |C∖A| ≤ max_total` and at most one
/// generator, one per isomorphism type.
pub fn all_order_problems(max_total: usize) -> Vec<AmalgamationProblem> {
    let mut out = Vec::new();
    for k in 0..=max_total {
        for m in 0..=max_total - k {
            for n in 0..=max_total - k - m {
                for bg in gap_multisets(m, k + 1) {
                    for cg in gap_multisets(n, k + 1) {
                        for generators in 0..=1 {
                            out.push(order_problem(k, &bg, &cg, generators));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Nondecreasing sequences of length `m` over `0..gaps`.
fn gap_multisets(m: usize, gaps: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in gap_multisets(m - 1, gaps) {
        let start = rest.last().copied().unwrap_or(0);
        for g in start..gaps {
            let mut v = rest.clone();
            v.push(g);
            out.push(v);
        }
    }
    out
}

pub fn random_order_problem(rng: &mut TestRng, max_total: usize) -> AmalgamationProblem {
    let k = rng.random_range(0..=max_total / 2);
    let m = rng.random_range(0..=max_total - k);
    let n = rng.random_range(0..=max_total - k - m);
    let b: Vec<usize> = (0..m).map(|_| rng.random_range(0..=k)).collect();
    let c: Vec<usize> = (0..n).map(|_| rng.random_range(0..=k)).collect();
    order_problem(k, &b, &c, rng.random_range(0..=1))
}

/// A sequence `aᵢ = u + r·e_{N·i}` inside a shifted integer block, `u` supported
/// off that block, with the
/// spacing `N` large against `span`, so that `p(aᵢ) − p(aⱼ)` has an
/// index-independent sign for every `p` whose exponents span at most `span`.
pub fn indiscernible_sequence(rng: &mut TestRng, len: usize, span: i64) -> (HahnModel, Vec<Element>) {
    loop {
        let m = model(rng);
        let Some(block) = m
            .blocks()
            .into_iter()
            .find(|b| matches!(b.order, IndexOrder::Int | IndexOrder::IntReversed))
        else {
            continue;
        };
        let shift = block.shift.abs();
        if shift == 0 || !matches!(block.scaling, BlockScaling::Constant(_)) {
            continue;
        }
        let spacing = 4 * (span + 1) * shift;
        // an offset inside the sequence's own block would break indiscernibility
        let u = vector(rng, &m, 3, 3);
        let u = u.sub(&u.restrict(&block.prefix).under(&block.prefix));
        let r = nonzero_rational(rng, 5, 3);
        let seq = (0..len as i64)
            .map(|i| {
                let e = HahnVector::term(Index::Int(spacing * i).under(&block.prefix), r.clone());
                Element::Hahn(u.add(&e))
            })
            .collect();
        return (m, seq);
    }
}
