//! Amalgamation: finite linear orders with a group action, and the σ-algebraic
//! pipeline that embeds a one-generator extension `B = ⟨A, b⟩` into an extension of `C`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::check::{ovsa_laws, LawReport};
use crate::error::{Error, Result};
use crate::extend::{adjoin_degree1_solution, decompose, BlockCut, Case, Element, ExtModel, Model, ModelCut};
use crate::hahn::{HahnModel, HahnVector};
use crate::orders::Side;
use crate::scalars::Rational;
use crate::sigmapoly::{sp_eval_unchecked, Factorization, Monotone, Ovsa, SigmaPoly};
use crate::solve::{solve_exact, SolveOutcome, DEFAULT_SOLVE_CAP};
use crate::testkit;

/// A finite linear order (points listed in increasing order) with a finitely
/// generated group acting by order-automorphisms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderWithAction {
    pub points: Vec<String>,
    #[serde(default)]
    pub generators: Vec<BTreeMap<String, String>>,
}

impl OrderWithAction {
    pub fn new(points: Vec<String>, generators: Vec<BTreeMap<String, String>>) -> Result<Self> {
        let o = OrderWithAction { points, generators };
        o.validate()?;
        Ok(o)
    }

    /// A chain with no generators.
    pub fn chain<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Self {
        OrderWithAction {
            points: points.into_iter().map(Into::into).collect(),
            generators: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, p: &str) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    pub fn contains(&self, p: &str) -> bool {
        self.position(p).is_some()
    }

    pub fn compare(&self, x: &str, y: &str) -> Option<Ordering> {
        Some(self.position(x)?.cmp(&self.position(y)?))
    }

    pub fn apply(&self, generator: usize, p: &str) -> Option<&str> {
        self.generators.get(generator)?.get(p).map(String::as_str)
    }

    /// The inverse permutation of a generator.
    pub fn inverse(&self, generator: usize) -> BTreeMap<String, String> {
        self.generators[generator]
            .iter()
            .map(|(x, y)| (y.clone(), x.clone()))
            .collect()
    }

    /// Points distinct, every generator a permutation preserving the order.
    pub fn validate(&self) -> Result<()> {
        let names: BTreeSet<&String> = self.points.iter().collect();
        if names.len() != self.points.len() {
            return Err(Error::InvalidModel("repeated point name".into()));
        }
        for (j, g) in self.generators.iter().enumerate() {
            let domain: BTreeSet<&String> = g.keys().collect();
            let image: BTreeSet<&String> = g.values().collect();
            if domain != names || image != names {
                return Err(Error::InvalidModel(format!(
                    "generator {j} is not a permutation of the carrier"
                )));
            }
            for w in self.points.windows(2) {
                if self.compare(&g[&w[0]], &g[&w[1]]) != Some(Ordering::Less) {
                    return Err(Error::ActionNotOrderPreserving(format!(
                        "generator {j} reverses {} < {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether `sub` is a substructure: its points occur here in the same
    /// order and every generator restricts to the corresponding one of `sub`.
    pub fn check_substructure(&self, sub: &OrderWithAction) -> Result<()> {
        if sub.generators.len() != self.generators.len() {
            return Err(Error::NotASubstructure(format!(
                "{} generators versus {}",
                sub.generators.len(),
                self.generators.len()
            )));
        }
        let mut last = None;
        for p in &sub.points {
            let pos = self
                .position(p)
                .ok_or_else(|| Error::NotASubstructure(format!("point {p} is missing")))?;
            if last.is_some_and(|l| l >= pos) {
                return Err(Error::NotASubstructure(format!("order disagrees at {p}")));
            }
            last = Some(pos);
        }
        for (j, g) in sub.generators.iter().enumerate() {
            for (x, y) in g {
                if self.apply(j, x) != Some(y.as_str()) {
                    return Err(Error::NotASubstructure(format!(
                        "generator {j} disagrees at {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A span `B ⊇ A ⊆ C`; inclusions are by point name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamationProblem {
    pub a: OrderWithAction,
    pub b: OrderWithAction,
    pub c: OrderWithAction,
}

impl AmalgamationProblem {
    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()?;
        self.c.validate()?;
        self.b.check_substructure(&self.a)?;
        self.c.check_substructure(&self.a)?;
        for p in &self.b.points {
            if !self.a.contains(p) && self.c.contains(p) {
                return Err(Error::NotASubstructure(format!(
                    "{p} lies in both B and C but not in A"
                )));
            }
        }
        Ok(())
    }
}

/// The amalgam and the two embeddings (as point maps).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amalgam {
    pub d: OrderWithAction,
    pub emb_b: BTreeMap<String, String>,
    pub emb_c: BTreeMap<String, String>,
}

/// Which rule decided a cross pair `b ∈ B∖A`, `c ∈ C∖A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Some `a` with `b < a < c`.
    BelowWitness,
    /// Some `a` with `b > a > c`.
    AboveWitness,
    /// No witness either way: `b < c`.
    Default,
}

/// Decides a cross pair `x ∈ B∖A`, `y ∈ C∖A`.
pub fn cross_rule(prob: &AmalgamationProblem, x: &str, y: &str) -> Rule {
    let lt_b = |p: &str, q: &str| prob.b.compare(p, q) == Some(Ordering::Less);
    let lt_c = |p: &str, q: &str| prob.c.compare(p, q) == Some(Ordering::Less);
    if prob.a.points.iter().any(|a| lt_b(x, a) && lt_c(a, y)) {
        Rule::BelowWitness
    } else if prob.a.points.iter().any(|a| lt_b(a, x) && lt_c(y, a)) {
        Rule::AboveWitness
    } else {
        Rule::Default
    }
}

fn compare_in_amalgam(prob: &AmalgamationProblem, x: &str, y: &str) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    if let Some(o) = prob.b.compare(x, y) {
        return o;
    }
    if let Some(o) = prob.c.compare(x, y) {
        return o;
    }
    let (first, second, flip) = if prob.b.contains(x) { (x, y, false) } else { (y, x, true) };
    let o = match cross_rule(prob, first, second) {
        Rule::BelowWitness | Rule::Default => Ordering::Less,
        Rule::AboveWitness => Ordering::Greater,
    };
    if flip {
        o.reverse()
    } else {
        o
    }
}

/// Orders `B ∪ C` by the three rules and lets each generator act through
/// `B` or `C`; the result is re-checked to be a linear order with an action.
pub fn amalgamate_orders(prob: &AmalgamationProblem) -> Result<Amalgam> {
    prob.validate()?;
    let mut points: Vec<String> = prob.b.points.clone();
    points.extend(prob.c.points.iter().filter(|p| !prob.a.contains(p)).cloned());
    points.sort_by(|x, y| compare_in_amalgam(prob, x, y));
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            if compare_in_amalgam(prob, x, y) != Ordering::Less {
                return Err(Error::InvalidModel(format!(
                    "the rules do not give a linear order at {x}, {y}"
                )));
            }
        }
    }
    let generators = (0..prob.a.generators.len())
        .map(|j| {
            points
                .iter()
                .map(|p| {
                    let img = prob.b.apply(j, p).or_else(|| prob.c.apply(j, p)).unwrap();
                    (p.clone(), img.to_owned())
                })
                .collect()
        })
        .collect();
    let d = OrderWithAction::new(points, generators)?;
    let identity = |o: &OrderWithAction| o.points.iter().map(|p| (p.clone(), p.clone())).collect();
    Ok(Amalgam {
        emb_b: identity(&prob.b),
        emb_c: identity(&prob.c),
        d,
    })
}

/// Checks that `emb` is an order- and action-preserving injection of `src` into `dst`.
pub fn is_embedding(src: &OrderWithAction, dst: &OrderWithAction, emb: &BTreeMap<String, String>) -> bool {
    let img = |p: &str| emb.get(p).map(String::as_str);
    let injective = emb.values().collect::<BTreeSet<_>>().len() == emb.len();
    injective
        && src.points.iter().all(|p| img(p).is_some_and(|q| dst.contains(q)))
        && src.points.windows(2).all(|w| {
            dst.compare(img(&w[0]).unwrap(), img(&w[1]).unwrap()) == Some(Ordering::Less)
        })
        && src.generators.len() == dst.generators.len()
        && (0..src.generators.len()).all(|j| {
            src.points.iter().all(|p| {
                let lhs = img(src.apply(j, p).unwrap());
                let rhs = dst.apply(j, img(p).unwrap());
                lhs == rhs
            })
        })
}

pub const DEFAULT_TEST_DEGREE: usize = 4;

/// Coefficients used for the affine combinations of the embedding check.
pub fn test_coefficients() -> Vec<Rational> {
    [(-2, 1), (-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1), (2, 1)]
        .into_iter()
        .map(|(p, q)| Rational::new(p, q))
        .collect()
}

/// Verification that `b ↦ d` preserves the order type of
/// `h(x, σx, …, σᵏx)` against test elements of `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub degree: usize,
    pub combinations: usize,
    pub test_elements: usize,
    pub failures: Vec<String>,
}

impl EmbeddingCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares `sign(h(b,…,σᵏb) − e)` in `B` with `sign(h(d,…,σᵏd) − e)` in `D`
/// for every coefficient vector `h` and every test element `e`.
pub fn embedding_check(
    b_model: &Model,
    b: &Element,
    b_tests: &[Element],
    d_model: &Model,
    d: &Element,
    d_tests: &[Element],
    degree: usize,
) -> EmbeddingCheck {
    let coeffs = test_coefficients();
    let orbit = |m: &Model, x: &Element| -> Vec<Element> {
        (0..=degree as i64).map(|k| m.sigma_pow(x, k)).collect()
    };
    let (ob, od) = (orbit(b_model, b), orbit(d_model, d));
    let mut failures = Vec::new();
    let mut digits = vec![0usize; degree + 1];
    let mut combinations = 0;
    loop {
        combinations += 1;
        let h = |m: &Model, o: &[Element]| {
            digits
                .iter()
                .zip(o)
                .fold(m.zero(), |acc, (&i, x)| m.add(&acc, &m.scale(x, &coeffs[i])))
        };
        let (hb, hd) = (h(b_model, &ob), h(d_model, &od));
        for (eb, ed) in b_tests.iter().zip(d_tests) {
            let (sb, sd) = (b_model.cmp(&hb, eb), d_model.cmp(&hd, ed));
            if sb != sd && failures.len() < 8 {
                let h: Vec<String> = digits.iter().map(|&i| coeffs[i].to_string()).collect();
                failures.push(format!("h = ({}) against {eb:?}: {sb:?} in B, {sd:?} in D", h.join(", ")));
            }
        }
        let mut pos = 0;
        loop {
            if pos > degree {
                return EmbeddingCheck {
                    degree,
                    combinations,
                    test_elements: b_tests.len(),
                    failures,
                };
            }
            digits[pos] += 1;
            if digits[pos] < coeffs.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// A span over a Hahn model `A` that sits at `b_prefix` in the root of `B`
/// and at `c_prefix` in `C`, with a generator `b ∈ B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaProblem {
    pub a: HahnModel,
    pub b: Model,
    #[serde(default)]
    pub b_prefix: Vec<Side>,
    pub b_elem: Element,
    pub c: HahnModel,
    #[serde(default)]
    pub c_prefix: Vec<Side>,
}

impl SigmaProblem {
    pub fn validate(&self) -> Result<()> {
        if !self.b.root().embeds_at(&self.a, &self.b_prefix) {
            return Err(Error::NotASubstructure("A does not sit in B at the given prefix".into()));
        }
        if !self.c.embeds_at(&self.a, &self.c_prefix) {
            return Err(Error::NotASubstructure("A does not sit in C at the given prefix".into()));
        }
        if !self.b.contains(&self.b_elem) {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }

    /// The `A`-coordinates of an element of `B`, if it lies in `A`.
    pub fn in_a(&self, x: &Element) -> Option<HahnVector> {
        let v = x.as_hahn()?;
        let (before, inside, after) = decompose(v, &self.b_prefix);
        (before.is_zero() && after.is_zero()).then_some(inside)
    }

    /// Test elements of `A`: zero, `±x`, `2x`, and `± e` for the origin basis vector.
    fn test_vectors(&self, x: &HahnVector) -> Vec<HahnVector> {
        let two = Rational::from_int(2);
        let mut out = vec![HahnVector::zero(), x.clone(), x.neg(), x.scale(&two)];
        if let Some(o) = self.a.order().origin() {
            let e = HahnVector::basis(o);
            out.push(e.neg());
            out.push(e);
        }
        let mut seen = HashSet::new();
        out.retain(|v| seen.insert(v.clone()));
        out
    }
}

/// Result of [`embed_via_monotone`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneEmbedding {
    pub model: Model,
    pub d: Element,
    /// Whether `d` was found in `C` itself.
    pub solved_in_c: bool,
    pub check: EmbeddingCheck,
}

/// Finds `D ⊇ C` and `d ∈ D` with `f(d) = f(x)` for `x ∈ B` where `f(x) ∈ A`,
/// and checks that `x ↦ d` preserves the order type over `A`.
///
/// `f` must be absolutely monotone, or strictly monotone in the same direction
/// on `B` and `C` with the equation solvable in `C`; a missing solution is
/// adjoined only for absolutely monotone `f` of degree 1.
pub fn embed_via_monotone(
    prob: &SigmaProblem,
    x: &Element,
    f: &SigmaPoly,
    test_degree: usize,
    cap: usize,
) -> Result<MonotoneEmbedding> {
    let absolute = f.classify_monotone()?.direction();
    let on_b = prob.b.monotonicity(f);
    let on_c = prob.c.monotonicity(f);
    if absolute.is_none() && (on_b.is_none() || on_b != on_c) {
        return Err(Error::NotMonotone);
    }
    let fx = sp_eval_unchecked(&prob.b, f, x);
    let a = prob
        .in_a(&fx)
        .ok_or_else(|| Error::NotApplicable("f(b) does not lie in A".into()))?;
    let a_c = a.under(&prob.c_prefix);
    let (model, d, solved_in_c) = match solve_exact(f, &a_c, &prob.c, cap)? {
        SolveOutcome::Solved { x } => (Model::Hahn(prob.c.clone()), Element::Hahn(x), true),
        outcome => {
            let Some(direction) = absolute else {
                return Err(Error::SolveIncomplete(format!(
                    "{f} is only monotone on these models and f(x) = a is not solved in C ({})",
                    outcome_name(&outcome)
                )));
            };
            let ext = adjoin_monotone_solution(&prob.c, f, &a_c, direction)?;
            let d = ext.generator();
            (Model::Ext(Box::new(ext)), d, false)
        }
    };
    let tests = prob.test_vectors(&a);
    let b_tests: Vec<Element> = tests.iter().map(|v| prob.b.embed_block(&prob.b_prefix, v)).collect();
    let d_tests: Vec<Element> = tests.iter().map(|v| model.embed_block(&prob.c_prefix, v)).collect();
    let check = embedding_check(&prob.b, x, &b_tests, &model, &d, &d_tests, test_degree);
    Ok(MonotoneEmbedding {
        model,
        d,
        solved_in_c,
        check,
    })
}

fn outcome_name(o: &SolveOutcome) -> &'static str {
    match o {
        SolveOutcome::Solved { .. } => "solved",
        SolveOutcome::Residual { .. } => "residual",
        SolveOutcome::Stuck { .. } => "stuck",
    }
}

/// Adjoins a zero of `f(x) = a` for absolutely monotone `f = σ^m(r₀ + r₁σ)`.
fn adjoin_monotone_solution(c: &HahnModel, f: &SigmaPoly, a: &HahnVector, direction: Monotone) -> Result<ExtModel> {
    let m = f.order().ok_or(Error::ZeroSigmaPoly)?;
    let f0 = f.shifted(-m);
    if f0.degree() != Some(1) {
        return Err(Error::SolveIncomplete(format!(
            "no supported extension adjoins a zero of {f}, which has degree above 1"
        )));
    }
    let rhs = Element::Hahn(c.sigma_unchecked(a, -m));
    let cut = ModelCut::SignOf {
        poly: f0.clone(),
        rhs: rhs.clone(),
        direction,
    };
    ExtModel::new(Model::Hahn(c.clone()), f0, rhs, cut, Case::Case1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Monotone,
    Degree1,
}

/// How a stage produced its image element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Route {
    SolvedInC,
    Adjoined { case: Case },
    /// The preimage already lies in `A`.
    InA,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub index: usize,
    pub kind: StageKind,
    pub factor: SigmaPoly,
    pub route: Route,
    pub equation_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_realized: Option<LawReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laws: Option<LawReport>,
}

impl StageReport {
    pub fn passed(&self) -> bool {
        self.equation_holds
            && self.embedding.as_ref().is_none_or(EmbeddingCheck::passed)
            && self.cut_realized.as_ref().is_none_or(LawReport::passed)
            && self.laws.as_ref().is_none_or(LawReport::passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub test_degree: usize,
    pub cap: usize,
    pub seed: u64,
    pub law_pairs: usize,
    pub cut_samples: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            test_degree: DEFAULT_TEST_DEGREE,
            cap: DEFAULT_SOLVE_CAP,
            seed: 0,
            law_pairs: 500,
            cut_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub f: SigmaPoly,
    pub factorization: Factorization,
    pub stages: Vec<StageReport>,
    pub model: Model,
    /// The image of `b`.
    pub image: Element,
    pub final_check: EmbeddingCheck,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(StageReport::passed) && self.final_check.passed()
    }
}

/// Embeds `B = ⟨A, b⟩` with `f(b) ∈ A` into an extension of `C` over `A`.
///
/// With `f = σ^m·g·L₀⋯L_{n−1}` (`g` absolutely monotone, `Lᵢ = σ − cᵢ`) and
/// `βₙ = b`, `βᵢ = Lᵢ(βᵢ₊₁)`, the monotone stage maps `β₀` into `C`, then stage
/// `i + 1` adjoins a zero of `Lᵢ(x) = dᵢ` realizing the cut of `βᵢ₊₁` over `A`.
pub fn amalgamate_sigma_algebraic(prob: &SigmaProblem, f: &SigmaPoly, opts: &PipelineOptions) -> Result<PipelineReport> {
    prob.validate()?;
    let fac = f.factor_pipeline()?;
    let n = fac.degree1.len();
    let mut betas = vec![prob.b_elem.clone(); n + 1];
    for i in (0..n).rev() {
        betas[i] = sp_eval_unchecked(&prob.b, &fac.degree1[i], &betas[i + 1]);
    }

    let monotone = fac.monotone.shifted(fac.shift);
    let first = embed_via_monotone(prob, &betas[0], &monotone, opts.test_degree, opts.cap).map_err(|e| e.at_stage(0))?;
    let fa = prob.in_a(&sp_eval_unchecked(&prob.b, f, &prob.b_elem)).expect("checked by the monotone stage");
    let target0 = first.model.embed_block(&prob.c_prefix, &fa);
    let mut stages = vec![StageReport {
        index: 0,
        kind: StageKind::Monotone,
        factor: monotone.clone(),
        route: if first.solved_in_c {
            Route::SolvedInC
        } else {
            Route::Adjoined { case: Case::Case1 }
        },
        equation_holds: sp_eval_unchecked(&first.model, &monotone, &first.d) == target0,
        embedding: Some(first.check),
        cut_realized: None,
        laws: None,
    }];
    let (mut model, mut d) = (first.model, first.d);

    let mut rng = testkit::rng(opts.seed);
    for i in 0..n {
        let stage = i + 1;
        let factor = &fac.degree1[i];
        let beta = &betas[i + 1];
        let beta_h = beta.as_hahn().ok_or_else(|| {
            Error::CutQueryUndecidable("the cut over A of a formal solution in B is not computed".into())
                .at_stage(stage)
        })?;
        let Some(cut) = BlockCut::of_element(prob.b.root(), &prob.b_prefix, beta_h) else {
            let in_a = prob.in_a(beta).unwrap();
            let next = model.embed_block(&prob.c_prefix, &in_a);
            stages.push(StageReport {
                index: stage,
                kind: StageKind::Degree1,
                factor: factor.clone(),
                route: Route::InA,
                equation_holds: sp_eval_unchecked(&model, factor, &next) == d,
                embedding: None,
                cut_realized: None,
                laws: None,
            });
            d = next;
            continue;
        };
        let mcut = ModelCut::OverBlock {
            prefix: prob.c_prefix.clone(),
            cut,
        };
        let mut chosen = None;
        for case in [Case::Case1, Case::Case2] {
            let ext = adjoin_degree1_solution(model.clone(), factor.clone(), d.clone(), mcut.clone(), case)
                .map_err(|e| e.at_stage(stage))?;
            let report = verify_degree1_stage(prob, &ext, beta, factor, opts, &mut rng);
            let ok = report.passed();
            if chosen.is_none() || ok {
                chosen = Some((ext, report));
            }
            if ok {
                break;
            }
        }
        let (ext, mut report) = chosen.unwrap();
        report.index = stage;
        stages.push(report);
        d = ext.generator();
        model = Model::Ext(Box::new(ext));
    }

    let tests = prob.test_vectors(&fa);
    let b_tests: Vec<Element> = tests.iter().map(|v| prob.b.embed_block(&prob.b_prefix, v)).collect();
    let d_tests: Vec<Element> = tests.iter().map(|v| model.embed_block(&prob.c_prefix, v)).collect();
    let final_check = embedding_check(&prob.b, &prob.b_elem, &b_tests, &model, &d, &d_tests, opts.test_degree);
    Ok(PipelineReport {
        f: f.clone(),
        factorization: fac,
        stages,
        model,
        image: d,
        final_check,
    })
}

fn verify_degree1_stage(
    prob: &SigmaProblem,
    ext: &ExtModel,
    beta: &Element,
    factor: &SigmaPoly,
    opts: &PipelineOptions,
    rng: &mut testkit::TestRng,
) -> StageReport {
    let m = Model::Ext(Box::new(ext.clone()));
    let g = ext.generator();
    let equation_holds = sp_eval_unchecked(&m, factor, &g) == ext.embed(ext.rhs().clone());

    let mut cut_realized = LawReport::new("cut-realized");
    let beta_h = beta.as_hahn().unwrap();
    let (_, beta_a, _) = decompose(beta_h, &prob.b_prefix);
    let mut samples_a: Vec<HahnVector> = (0..opts.cut_samples)
        .map(|_| testkit::vector(rng, &prob.a, 3, 4))
        .collect();
    samples_a.push(beta_a.clone());
    for a in &samples_a {
        let in_b = prob.b.cmp(beta, &prob.b.embed_block(&prob.b_prefix, a));
        let in_d = m.cmp(&g, &m.embed_block(&prob.c_prefix, a));
        cut_realized.record(in_b == in_d, || format!("against {a}: {in_b:?} in B, {in_d:?} in D"));
    }

    let base = ext.base();
    let mut samples: Vec<Element> = (0..40).map(|_| testkit::element(rng, &m, 3, 4)).collect();
    samples.push(g.clone());
    samples.push(ext.embed(ext.rhs().clone()));
    for a in samples_a.iter().take(5) {
        let ea = ext.embed(base.embed_block(&prob.c_prefix, a));
        samples.push(m.add(&g, &ea));
        samples.push(m.sub(&ea, &g));
    }
    let laws = ovsa_laws(&m, &samples, opts.law_pairs, rng);

    StageReport {
        index: 0,
        kind: StageKind::Degree1,
        factor: factor.clone(),
        route: Route::Adjoined { case: ext.case() },
        equation_holds,
        embedding: None,
        cut_realized: Some(cut_realized),
        laws: Some(laws),
    }
}

/// All linear orders of `B ∪ C` restricting to the orders of `B` and `C`
/// (exhaustive; intended for small carriers). Used as an amalgam-existence oracle.
pub fn all_amalgam_orders(prob: &AmalgamationProblem) -> Vec<Vec<String>> {
    let mut points: Vec<String> = prob.b.points.clone();
    points.extend(prob.c.points.iter().filter(|p| !prob.a.contains(p)).cloned());
    let index: HashMap<&str, usize> = points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let mut constraints = Vec::new();
    for o in [&prob.b, &prob.c] {
        for w in o.points.windows(2) {
            constraints.push((index[w[0].as_str()], index[w[1].as_str()]));
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; points.len()];
    extend_orders(&points, &constraints, &mut used, &mut current, &mut out);
    out
}

fn extend_orders(
    points: &[String],
    constraints: &[(usize, usize)],
    used: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<String>>,
) {
    if current.len() == points.len() {
        out.push(current.iter().map(|&i| points[i].clone()).collect());
        return;
    }
    for i in 0..points.len() {
        let ready = !used[i] && constraints.iter().all(|&(lo, hi)| hi != i || used[lo]);
        if ready {
            used[i] = true;
            current.push(i);
            extend_orders(points, constraints, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::Index;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn problem(a: &[&str], b: &[&str], c: &[&str]) -> AmalgamationProblem {
        AmalgamationProblem {
            a: OrderWithAction::chain(a.iter().copied()),
            b: OrderWithAction::chain(b.iter().copied()),
            c: OrderWithAction::chain(c.iter().copied()),
        }
    }

    #[test]
    fn order_examples() {
        let d = amalgamate_orders(&problem(&["0"], &["-1", "0"], &["0", "1"])).unwrap().d;
        assert_eq!(d.points, ["-1", "0", "1"]);
        let p = problem(&[], &["b"], &["c"]);
        assert_eq!(cross_rule(&p, "b", "c"), Rule::Default);
        assert_eq!(amalgamate_orders(&p).unwrap().d.points, ["b", "c"]);
        let p = problem(&["a1", "a2"], &["a1", "b", "a2"], &["a1", "c", "a2"]);
        assert_eq!(cross_rule(&p, "b", "c"), Rule::Default);
        assert_eq!(amalgamate_orders(&p).unwrap().d.points, ["a1", "b", "c", "a2"]);
    }

    #[test]
    fn order_errors() {
        let p = problem(&["x", "y"], &["y", "x"], &["x", "y"]);
        assert!(matches!(amalgamate_orders(&p), Err(Error::NotASubstructure(_))));
        let flip: BTreeMap<String, String> = [("x", "y"), ("y", "x")]
            .into_iter()
            .map(|(a, b)| (a.to_owned(), b.to_owned()))
            .collect();
        let bad = OrderWithAction::new(vec!["x".into(), "y".into()], vec![flip]);
        assert!(matches!(bad, Err(Error::ActionNotOrderPreserving(_))));
    }

    fn singleton_problem(s: i64, x: HahnVector) -> SigmaProblem {
        let m = HahnModel::singleton(q(s)).unwrap();
        SigmaProblem {
            a: m.clone(),
            b: Model::Hahn(m.clone()),
            b_prefix: vec![],
            b_elem: Element::Hahn(x),
            c: m,
            c_prefix: vec![],
        }
    }

    #[test]
    fn monotone_examples() {
        let e = HahnVector::basis(Index::Pos(0));
        let a = e.scale(&q(3));
        let p = singleton_problem(2, a.scale(&Rational::new(1, 2)));
        let r = embed_via_monotone(&p, &p.b_elem, &SigmaPoly::constant(q(2)), 4, 64).unwrap();
        assert_eq!(r.d, Element::Hahn(a.scale(&Rational::new(1, 2))));
        assert!(r.check.passed());

        let p = singleton_problem(2, a.neg());
        let r = embed_via_monotone(&p, &p.b_elem, &SigmaPoly::from_ints(&[-3, 1]), 4, 64).unwrap();
        assert_eq!(r.d, Element::Hahn(a.neg()));
        assert!(r.check.passed());

        let p = singleton_problem(1, e);
        let r = embed_via_monotone(&p, &p.b_elem, &SigmaPoly::from_ints(&[-1, 1]), 4, 64);
        assert_eq!(r, Err(Error::NotMonotone));
    }

    /// `A = C = ℚ((ℤ))`, `B = ℚℓ ×_lex A` with `σℓ = ℓ`, `b = ℓ + x`.
    fn line_problem(x: HahnVector) -> SigmaProblem {
        let a = HahnModel::int_shift();
        let b = a.prepend_scaled_line(q(1)).unwrap();
        SigmaProblem {
            b_elem: Element::Hahn(HahnModel::prepended_unit().add(&HahnModel::embed_right(&x))),
            a: a.clone(),
            b: Model::Hahn(b),
            b_prefix: vec![Side::Right],
            c: a,
            c_prefix: vec![],
        }
    }

    #[test]
    fn pipeline_examples() {
        let e0 = HahnVector::basis(Index::Int(0));
        let p = line_problem(HahnVector::zero());
        let p = SigmaProblem {
            b: Model::Hahn(p.a.clone()),
            b_prefix: vec![],
            b_elem: Element::Hahn(e0.clone()),
            ..p
        };
        let r = amalgamate_sigma_algebraic(&p, &SigmaPoly::from_ints(&[1, 1]), &PipelineOptions::default()).unwrap();
        assert_eq!(r.stages.len(), 1);
        assert_eq!(r.stages[0].kind, StageKind::Monotone);
        assert!(r.passed(), "{r:#?}");

        let p = line_problem(e0);
        let f = SigmaPoly::from_ints(&[-1, 0, 1]);
        let r = amalgamate_sigma_algebraic(&p, &f, &PipelineOptions::default()).unwrap();
        let kinds: Vec<_> = r.stages.iter().map(|s| (s.kind, s.factor.clone())).collect();
        assert_eq!(
            kinds,
            [
                (StageKind::Monotone, SigmaPoly::from_ints(&[1, 1])),
                (StageKind::Degree1, SigmaPoly::from_ints(&[-1, 1]))
            ]
        );
        assert!(r.passed(), "{r:#?}");

        let r = amalgamate_sigma_algebraic(&p, &SigmaPoly::from_ints(&[-2, 0, 1]), &PipelineOptions::default());
        assert!(matches!(r, Err(Error::UnsupportedScalarField(_))));
    }
}
