//! Laurent polynomials in σ, their associated ordinary polynomials, and the
//! absolute-monotonicity classifier.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hahn::{BlockScaling, HahnModel, HahnVector};
use crate::orders::{Index, IndexOrder};
use crate::scalars::{Rational, UniPoly};

/// `Σ α_k σ^k` with finitely many nonzero `α_k`, `k ∈ ℤ`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SigmaPoly {
    terms: BTreeMap<i64, Rational>,
}

impl SigmaPoly {
    pub fn zero() -> Self {
        SigmaPoly::default()
    }

    pub fn one() -> Self {
        SigmaPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        SigmaPoly::monomial(0, c)
    }

    pub fn monomial(k: i64, c: Rational) -> Self {
        SigmaPoly::from_terms([(k, c)])
    }

    /// `σ^k`
    pub fn sigma(k: i64) -> Self {
        SigmaPoly::monomial(k, Rational::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Rational)>) -> Self {
        let mut map: BTreeMap<i64, Rational> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Rational::zero) += &c;
        }
        map.retain(|_, c| !c.is_zero());
        SigmaPoly { terms: map }
    }

    /// Coefficients `α_0, α_1, …` of an ordinary polynomial in σ.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        SigmaPoly::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as i64, Rational::from_int(c))),
        )
    }

    /// `σ^shift · p(σ)`.
    pub fn from_uni(shift: i64, p: &UniPoly) -> Self {
        SigmaPoly::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| (shift + k as i64, c.clone())),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn exponents(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied()
    }

    pub fn coeff(&self, k: i64) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest exponent.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest exponent.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    pub fn trailing_coeff(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn add(&self, other: &SigmaPoly) -> SigmaPoly {
        SigmaPoly::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(k, c)| (*k, c.clone())),
        )
    }

    pub fn neg(&self) -> SigmaPoly {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &SigmaPoly) -> SigmaPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> SigmaPoly {
        SigmaPoly::from_terms(self.terms.iter().map(|(k, c)| (*k, c * r)))
    }

    pub fn mul(&self, other: &SigmaPoly) -> SigmaPoly {
        SigmaPoly::from_terms(self.terms.iter().flat_map(|(k, a)| {
            other.terms.iter().map(move |(j, b)| (k + j, a * b))
        }))
    }

    /// `σ^k · self`
    pub fn shifted(&self, k: i64) -> SigmaPoly {
        SigmaPoly {
            terms: self.terms.iter().map(|(j, c)| (j + k, c.clone())).collect(),
        }
    }

    /// The scalar `Σ α_k c^k` by which `f` acts on a vector with `σ(v) = c·v`.
    pub fn scalar_action(&self, c: &Rational) -> Rational {
        self.terms.iter().map(|(k, a)| a * c.pow(*k)).sum()
    }

    /// `f = σ^shift · f₀` with `f₀ ∈ ℚ[σ]` having nonzero constant term; returns `(shift, f̃₀)`.
    pub fn associated_poly(&self) -> Result<(i64, UniPoly)> {
        let shift = self.order().ok_or(Error::ZeroSigmaPoly)?;
        let deg = self.degree().unwrap();
        let coeffs = (shift..=deg).map(|k| self.coeff(k)).collect();
        Ok((shift, UniPoly::new(coeffs)))
    }

    pub fn classify_monotone(&self) -> Result<MonotoneClass> {
        let (_, p) = self.associated_poly()?;
        let roots = p.count_positive_roots()?;
        if roots > 0 {
            return Ok(MonotoneClass::NotAbsMonotone(roots));
        }
        if self.leading_coeff().unwrap().is_positive() {
            Ok(MonotoneClass::AbsIncreasing)
        } else {
            Ok(MonotoneClass::AbsDecreasing)
        }
    }

    /// Splits `f = σ^shift · monotone · ∏ (σ − c)` over ℚ.
    pub fn factor_pipeline(&self) -> Result<Factorization> {
        let (shift, p) = self.associated_poly()?;
        let (roots, cofactor) = p.extract_positive_rational_roots()?;
        if cofactor.count_positive_roots()? > 0 {
            return Err(Error::UnsupportedScalarField(format!(
                "{cofactor} has a positive irrational root"
            )));
        }
        let degree1 = roots
            .iter()
            .flat_map(|(c, m)| {
                std::iter::repeat_n(
                    SigmaPoly::from_terms([(1, Rational::one()), (0, -c)]),
                    *m,
                )
            })
            .collect();
        Ok(Factorization {
            shift,
            monotone: SigmaPoly::from_uni(0, &cofactor),
            degree1,
        })
    }
}

/// Result of the absolute-monotonicity classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class", content = "positive_roots", rename_all = "snake_case")]
pub enum MonotoneClass {
    AbsIncreasing,
    AbsDecreasing,
    NotAbsMonotone(usize),
}

impl MonotoneClass {
    pub fn direction(self) -> Option<Monotone> {
        match self {
            MonotoneClass::AbsIncreasing => Some(Monotone::Increasing),
            MonotoneClass::AbsDecreasing => Some(Monotone::Decreasing),
            MonotoneClass::NotAbsMonotone(_) => None,
        }
    }
}

/// Strict monotonicity direction of a map on one particular model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

impl Monotone {
    /// `Greater` for increasing maps, `Less` for decreasing ones.
    pub fn as_sign(self) -> Ordering {
        match self {
            Monotone::Increasing => Ordering::Greater,
            Monotone::Decreasing => Ordering::Less,
        }
    }
}

/// Output of [`SigmaPoly::factor_pipeline`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub shift: i64,
    pub monotone: SigmaPoly,
    pub degree1: Vec<SigmaPoly>,
}

impl Factorization {
    pub fn product(&self) -> SigmaPoly {
        self.degree1
            .iter()
            .fold(self.monotone.shifted(self.shift), |acc, g| acc.mul(g))
    }
}

impl fmt::Display for SigmaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (*k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "σ")?,
                (1, false) => write!(f, "{mag}σ")?,
                (_, true) => write!(f, "σ^{k}")?,
                (_, false) => write!(f, "{mag}σ^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SigmaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SigmaPoly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: i64,
    coef: Rational,
}

#[derive(Serialize, Deserialize)]
struct SigmaPolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for SigmaPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SigmaPolyJson {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson {
                    exp: *k,
                    coef: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SigmaPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SigmaPolyJson::deserialize(d)?;
        Ok(SigmaPoly::from_terms(
            raw.terms.into_iter().map(|t| (t.exp, t.coef)),
        ))
    }
}

/// An ordered ℚ-vector space with an order-automorphism σ.
pub trait Ovsa {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, r: &Rational) -> Self::Elem;
    /// Sign of `a` relative to zero.
    fn sign(&self, a: &Self::Elem) -> Ordering;
    fn sigma_pow(&self, a: &Self::Elem, k: i64) -> Self::Elem;
    fn contains(&self, a: &Self::Elem) -> bool;
    /// Strict monotonicity of `x ↦ f(x)` on this particular model, when known.
    fn monotonicity(&self, f: &SigmaPoly) -> Option<Monotone>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn cmp(&self, a: &Self::Elem, b: &Self::Elem) -> Ordering {
        self.sign(&self.sub(a, b))
    }
}

/// `f(v) = Σ α_k σ^k(v)`.
pub fn sp_eval<M: Ovsa>(model: &M, f: &SigmaPoly, v: &M::Elem) -> Result<M::Elem> {
    if !model.contains(v) {
        return Err(Error::ModelMismatch);
    }
    Ok(sp_eval_unchecked(model, f, v))
}

pub fn sp_eval_unchecked<M: Ovsa>(model: &M, f: &SigmaPoly, v: &M::Elem) -> M::Elem {
    f.terms().fold(model.zero(), |acc, (k, c)| {
        model.add(&acc, &model.scale(&model.sigma_pow(v, k), c))
    })
}

impl Ovsa for HahnModel {
    type Elem = HahnVector;

    fn zero(&self) -> HahnVector {
        HahnVector::zero()
    }

    fn add(&self, a: &HahnVector, b: &HahnVector) -> HahnVector {
        a.add(b)
    }

    fn neg(&self, a: &HahnVector) -> HahnVector {
        a.neg()
    }

    fn scale(&self, a: &HahnVector, r: &Rational) -> HahnVector {
        a.scale(r)
    }

    fn sign(&self, a: &HahnVector) -> Ordering {
        HahnModel::sign(self, a)
    }

    fn sigma_pow(&self, a: &HahnVector, k: i64) -> HahnVector {
        self.sigma_unchecked(a, k)
    }

    fn contains(&self, a: &HahnVector) -> bool {
        HahnModel::contains(self, a)
    }

    fn monotonicity(&self, f: &SigmaPoly) -> Option<Monotone> {
        hahn_monotonicity(self, f)
    }
}

/// Leading index and coefficient of `f(e_i)`: the minimum `m` of `τ^k(i)` over
/// the exponents of `f`, with `Σ_{k : τ^k(i) = m} α_k s(i)^k`.
pub fn leading_image(model: &HahnModel, f: &SigmaPoly, i: &Index) -> Option<(Index, Rational)> {
    let images: Vec<(Index, i64)> = f
        .exponents()
        .map(|k| (model.tau().apply_power_unchecked(i, k), k))
        .collect();
    let m = model.order().min_of(images.iter().map(|(j, _)| j))?.clone();
    let s = model.scaling_at(i);
    let coef: Rational = images
        .iter()
        .filter(|(j, _)| *j == m)
        .map(|(_, k)| f.coeff(*k) * s.pow(*k))
        .sum();
    Some((m, coef))
}

/// Exact monotonicity of `f` on a Hahn model.
///
/// For `x` with valuation `i`, the leading term of `f(x)` sits at the index given
/// by [`leading_image`] with coefficient `x_i` times the aggregated coefficient,
/// so `f` is increasing iff every aggregated coefficient is positive. Within an
/// integer block the sign does not depend on `i`, so one representative suffices.
fn hahn_monotonicity(model: &HahnModel, f: &SigmaPoly) -> Option<Monotone> {
    if f.is_zero() {
        return None;
    }
    let mut signs = Vec::new();
    for block in model.blocks() {
        let reps: Vec<Index> = match (&block.order, &block.scaling) {
            (IndexOrder::Finite { n }, BlockScaling::Table(_) | BlockScaling::Constant(_)) => {
                (0..*n).map(Index::Pos).collect()
            }
            _ => vec![Index::Int(0)],
        };
        for r in reps {
            let (_, coef) = leading_image(model, f, &r.under(&block.prefix))?;
            signs.push(coef.sign());
        }
    }
    if signs.iter().all(|s| *s == Ordering::Greater) {
        Some(Monotone::Increasing)
    } else if signs.iter().all(|s| *s == Ordering::Less) {
        Some(Monotone::Decreasing)
    } else {
        None
    }
}

/// A zero of `f` above every vector of the base model, in `ℚ ×_lex M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub root: Rational,
    pub model: HahnModel,
    pub zero: HahnVector,
}

/// Builds a nonzero zero of a non-absolutely-monotone `f` by prepending a line on
/// which σ acts as multiplication by the smallest positive rational root of `f̃₀`.
pub fn monotonicity_counterexample(f: &SigmaPoly, model: &HahnModel) -> Result<Counterexample> {
    if f.classify_monotone()?.direction().is_some() {
        return Err(Error::NotApplicable(format!("{f} is absolutely monotone")));
    }
    let (_, p) = f.associated_poly()?;
    let (roots, _) = p.extract_positive_rational_roots()?;
    let (root, _) = roots.into_iter().next().ok_or_else(|| {
        Error::UnsupportedScalarField(format!("{p} has only irrational positive roots"))
    })?;
    Ok(Counterexample {
        model: model.prepend_scaled_line(root.clone())?,
        zero: HahnModel::prepended_unit(),
        root,
    })
}
