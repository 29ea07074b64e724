//! Named reproductions of concrete configurations, each a list of exact claims.

use std::cmp::Ordering;

use serde::Serialize;

use crate::amalg::{amalgamate_orders, cross_rule, AmalgamationProblem, OrderWithAction, Rule};
use crate::check::ovsa_laws;
use crate::error::{Error, Result};
use crate::extend::{adjoin_degree1_solution, adjoin_shift_orbit, Case, Element, Model, ModelCut};
use crate::hahn::{HahnModel, HahnVector};
use crate::orders::Index;
use crate::scalars::Rational;
use crate::sigmapoly::{monotonicity_counterexample, sp_eval_unchecked, Monotone, Ovsa, SigmaPoly};
use crate::solve::unbounded_image_witness;
use crate::testkit;

pub const GALLERY: [&str; 5] = [
    "example-6-1",
    "monotone-witness",
    "degree1-adjunction",
    "order-amalgam-rule3",
    "lemma-6-6-orbit",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub claim: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GalleryReport {
    pub name: String,
    pub claims: Vec<Claim>,
}

impl GalleryReport {
    fn new(name: &str) -> Self {
        GalleryReport {
            name: name.to_owned(),
            claims: Vec::new(),
        }
    }

    fn claim(&mut self, claim: impl Into<String>, holds: bool) {
        self.claims.push(Claim {
            claim: claim.into(),
            holds,
        });
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.holds)
    }

    pub fn first_failure(&self) -> Option<&Claim> {
        self.claims.iter().find(|c| !c.holds)
    }
}

pub fn run_gallery(name: &str, seed: u64) -> Result<GalleryReport> {
    match name {
        "example-6-1" => Ok(opposed_shifts_entry(seed)),
        "monotone-witness" => monotone_witness(seed),
        "degree1-adjunction" => degree1_adjunction(seed),
        "order-amalgam-rule3" => default_rule_entry(),
        "lemma-6-6-orbit" => shift_orbit_entry(seed),
        _ => Err(Error::NotApplicable(format!(
            "unknown gallery entry {name}; known: {}",
            GALLERY.join(", ")
        ))),
    }
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn opposed_shifts_entry(seed: u64) -> GalleryReport {
    let mut r = GalleryReport::new("example-6-1");
    let m = testkit::opposed_shifts_model();
    let a = HahnVector::basis(Index::right(Index::Int(0)));
    let b = HahnVector::basis(Index::left(Index::Int(0)));
    let (sa, sb) = (m.sigma_unchecked(&a, 1), m.sigma_unchecked(&b, 1));
    let lt = |x: &HahnVector, y: &HahnVector| m.compare_unchecked(x, y) == Ordering::Less;
    r.claim("σ(a) < a", lt(&sa, &a));
    r.claim("a < b", lt(&a, &b));
    r.claim("b < σ(b)", lt(&b, &sb));
    let f = SigmaPoly::from_ints(&[-1, 1]);
    let fa = sp_eval_unchecked(&m, &f, &a);
    let fb = sp_eval_unchecked(&m, &f, &b);
    r.claim("f(a) < 0 < f(b) for f = σ − 1", m.sign(&fa) == Ordering::Less && m.sign(&fb) == Ordering::Greater);

    let mut rng = testkit::rng(seed);
    let (mut mismatch, mut nonzero) = (0, 0);
    for _ in 0..100 {
        let c = testkit::nonzero_vector(&mut rng, &m, 5, 6);
        let sc = m.sigma_unchecked(&c, 1);
        let supp: Vec<&Index> = c.support().collect();
        let supp_s: Vec<&Index> = sc.support().collect();
        mismatch += usize::from(supp != supp_s);
        nonzero += usize::from(!sp_eval_unchecked(&m, &f, &c).is_zero());
    }
    r.claim(format!("supp(c) ≠ supp(σ(c)) for {mismatch}/100 random c ≠ 0"), mismatch == 100);
    r.claim(format!("σ(c) − c ≠ 0 for {nonzero}/100 random c ≠ 0"), nonzero == 100);
    r
}

fn monotone_witness(seed: u64) -> Result<GalleryReport> {
    let mut r = GalleryReport::new("monotone-witness");
    let base = HahnModel::int_shift();
    let f = SigmaPoly::from_ints(&[-1, 1]);
    let w = monotonicity_counterexample(&f, &base)?;
    r.claim("the witness line has σ(ℓ) = ℓ", w.root == Rational::one());
    let fl = sp_eval_unchecked(&w.model, &f, &w.zero);
    r.claim("f(ℓ) = 0", fl.is_zero());
    r.claim("ℓ ≠ 0", !w.zero.is_zero());
    let mut rng = testkit::rng(seed);
    let above = (0..100).all(|_| {
        let v = testkit::vector(&mut rng, &base, 5, 8).scale(&q(1000));
        w.model.compare_unchecked(&w.zero, &HahnModel::embed_right(&v)) == Ordering::Greater
    });
    r.claim("ℓ > 100 random base vectors", above);
    Ok(r)
}

fn degree1_adjunction(seed: u64) -> Result<GalleryReport> {
    let mut r = GalleryReport::new("degree1-adjunction");
    let base = HahnModel::int_shift();
    let poly = SigmaPoly::from_ints(&[1, -1]);
    let a = Element::Hahn(HahnVector::basis(Index::Int(0)));
    let cut = ModelCut::SignOf {
        poly: poly.clone(),
        rhs: a.clone(),
        direction: Monotone::Increasing,
    };
    let ext = adjoin_degree1_solution(Model::Hahn(base.clone()), poly.clone(), a.clone(), cut, Case::Case1)?;
    let m = Model::Ext(Box::new(ext.clone()));
    let b = ext.generator();
    r.claim("b' − σ(b') = e₀", sp_eval_unchecked(&m, &poly, &b) == ext.embed(a.clone()));
    r.claim("σ(b') = b' − e₀", m.sigma_pow(&b, 1) == m.sub(&b, &ext.embed(a.clone())));
    let mut partial = HahnVector::zero();
    let mut above = true;
    for n in 0..50 {
        partial.add_term(Index::Int(n), &Rational::one());
        above &= m.cmp(&b, &ext.embed(Element::Hahn(partial.clone()))) == Ordering::Greater;
    }
    r.claim("b' > e₀ + e₁ + … + eₙ for n < 50", above);
    let two = ext.embed(a.scale(&q(2)));
    r.claim("b' < 2e₀", m.cmp(&b, &two) == Ordering::Less);
    let mut rng = testkit::rng(seed);
    let mut samples: Vec<Element> = (0..60).map(|_| testkit::element(&mut rng, &m, 3, 5)).collect();
    samples.push(b);
    let laws = ovsa_laws(&m, &samples, 500, &mut rng);
    r.claim(format!("order and σ laws on {} sampled cases", laws.cases), laws.passed());
    Ok(r)
}

fn default_rule_entry() -> Result<GalleryReport> {
    let mut r = GalleryReport::new("order-amalgam-rule3");
    let prob = AmalgamationProblem {
        a: OrderWithAction::chain(Vec::<String>::new()),
        b: OrderWithAction::chain(["b"]),
        c: OrderWithAction::chain(["c"]),
    };
    r.claim("neither witness rule applies to (b, c)", cross_rule(&prob, "b", "c") == Rule::Default);
    let d = amalgamate_orders(&prob)?.d;
    r.claim("b < c in the amalgam", d.compare("b", "c") == Some(Ordering::Less));
    Ok(r)
}

fn shift_orbit_entry(seed: u64) -> Result<GalleryReport> {
    let mut r = GalleryReport::new("lemma-6-6-orbit");
    let base = HahnModel::singleton(Rational::one())?;
    let f = SigmaPoly::from_ints(&[-1, 1]);
    let mut rng = testkit::rng(seed);
    let samples: Vec<HahnVector> = (0..50).map(|_| testkit::vector(&mut rng, &base, 2, 1)).collect();
    r.claim(
        "f = σ − 1 vanishes on the base, so its image there is bounded",
        samples.iter().all(|v| sp_eval_unchecked(&base, &f, v).is_zero()),
    );
    let (ext, orbit) = adjoin_shift_orbit(&base);
    r.claim(
        "σ(e'ᵢ) = e'ᵢ₊₁ and e'ᵢ < e'ᵢ₊₁ for |i| ≤ 5",
        (-5..=5).all(|i| {
            ext.sigma_unchecked(&orbit.element(i), 1) == orbit.element(i + 1)
                && ext.compare_unchecked(&orbit.element(i), &orbit.element(i + 1)) == Ordering::Less
        }),
    );
    r.claim(
        "e'₀ lies above the sampled base vectors",
        samples.iter().all(|v| {
            ext.compare_unchecked(&orbit.element(0), &HahnModel::embed_right(&v.scale(&q(1000)))) == Ordering::Greater
        }),
    );
    let bound = HahnVector::basis(Index::Pos(0)).scale(&q(5));
    let w = unbounded_image_witness(&f, &base, &bound)?;
    let fx = sp_eval_unchecked(&w.model, &f, &w.x);
    r.claim("the witness needs the extension", w.extended);
    r.claim("f(x) > 5e₀ in the extension", w.model.compare_unchecked(&fx, &w.bound) == Ordering::Greater);
    Ok(r)
}
