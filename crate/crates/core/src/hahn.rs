//! Finite-support Hahn models ℚ((I)) with an automorphism induced by an index
//! automorphism and a positive scaling.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::orders::{Cut, CutSide, Index, IndexOrder, OrderAuto, Side};
use crate::scalars::Rational;

/// The scaling map `s: I → ℚ_{>0}` in descriptor form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    Constant { value: Rational },
    /// One value per position of a finite block.
    Table { values: Vec<Rational> },
    Concat {
        left: Box<Scaling>,
        right: Box<Scaling>,
    },
}

impl Scaling {
    pub fn constant(value: Rational) -> Self {
        Scaling::Constant { value }
    }

    pub fn one() -> Self {
        Scaling::constant(Rational::one())
    }

    pub fn concat(left: Scaling, right: Scaling) -> Self {
        Scaling::Concat {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn validate(&self, order: &IndexOrder) -> Result<()> {
        match (self, order) {
            (Scaling::Constant { value }, _) => positive(value),
            (Scaling::Table { values }, IndexOrder::Finite { n }) => {
                if values.len() as u64 != *n {
                    return Err(Error::InvalidModel(format!(
                        "scaling table has {} entries for a block of size {n}",
                        values.len()
                    )));
                }
                values.iter().try_for_each(positive)
            }
            (Scaling::Table { .. }, _) => Err(Error::InvalidModel(
                "scaling tables are only allowed on finite blocks".into(),
            )),
            (Scaling::Concat { left, right }, IndexOrder::Concat { left: l, right: r }) => {
                left.validate(l)?;
                right.validate(r)
            }
            (Scaling::Concat { .. }, _) => Err(Error::InvalidModel(
                "concatenated scaling on a non-concatenated order".into(),
            )),
        }
    }

    /// `s(i)` for an element of a validated order.
    pub fn at(&self, i: &Index) -> &Rational {
        match (self, i) {
            (Scaling::Constant { value }, _) => value,
            (Scaling::Table { values }, Index::Pos(p)) => &values[*p as usize],
            (Scaling::Concat { left, .. }, Index::Left(x)) => left.at(x),
            (Scaling::Concat { right, .. }, Index::Right(x)) => right.at(x),
            _ => panic!("scaling queried at an element of the wrong shape"),
        }
    }

    pub fn subtree(&self, prefix: &[Side]) -> Option<&Scaling> {
        let mut cur = self;
        for side in prefix {
            cur = match (side, cur) {
                (_, Scaling::Constant { .. }) => return Some(cur),
                (Side::Left, Scaling::Concat { left, .. }) => left,
                (Side::Right, Scaling::Concat { right, .. }) => right,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Equality of the induced maps on a given order.
    pub fn equivalent(&self, other: &Scaling, order: &IndexOrder) -> bool {
        match order {
            IndexOrder::Concat { left, right } => {
                let sub = |s: &Scaling, side| s.subtree(&[side]).cloned();
                match (
                    sub(self, Side::Left),
                    sub(other, Side::Left),
                    sub(self, Side::Right),
                    sub(other, Side::Right),
                ) {
                    (Some(a), Some(b), Some(c), Some(d)) => {
                        a.equivalent(&b, left) && c.equivalent(&d, right)
                    }
                    _ => false,
                }
            }
            IndexOrder::Finite { n } => {
                (0..*n).all(|p| self.at(&Index::Pos(p)) == other.at(&Index::Pos(p)))
            }
            IndexOrder::Int | IndexOrder::IntReversed => match (self, other) {
                (Scaling::Constant { value: a }, Scaling::Constant { value: b }) => a == b,
                _ => false,
            },
        }
    }
}

fn positive(r: &Rational) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(r.clone()))
    }
}

/// Scaling data of a leaf block of the index tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockScaling {
    Constant(Rational),
    Table(Vec<Rational>),
}

/// A maximal non-concatenated piece of the index order together with the
/// restriction of `τ` (as a label shift) and `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub prefix: Vec<Side>,
    pub order: IndexOrder,
    pub shift: i64,
    pub scaling: BlockScaling,
}

/// A finite-support Hahn vector `Σ c_i e_i`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct HahnVector {
    coeffs: BTreeMap<Index, Rational>,
}

impl HahnVector {
    pub fn zero() -> Self {
        HahnVector::default()
    }

    pub fn basis(i: Index) -> Self {
        HahnVector::term(i, Rational::one())
    }

    pub fn term(i: Index, c: Rational) -> Self {
        HahnVector::from_terms([(i, c)])
    }

    /// Sums the given terms, so repeated indices accumulate.
    pub fn from_terms(terms: impl IntoIterator<Item = (Index, Rational)>) -> Self {
        let mut v = HahnVector::zero();
        for (i, c) in terms {
            v.add_term(i, &c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: &Index) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, &Rational)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Index> {
        self.coeffs.keys()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn add_term(&mut self, i: Index, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(i) {
            Entry::Vacant(slot) => {
                slot.insert(c.clone());
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &HahnVector) -> HahnVector {
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(i.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &HahnVector) -> HahnVector {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HahnVector {
        HahnVector {
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> HahnVector {
        if r.is_zero() {
            return HahnVector::zero();
        }
        HahnVector {
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), c * r)).collect(),
        }
    }

    /// Re-indexes every term under `prefix` (embedding into a larger order).
    pub fn under(&self, prefix: &[Side]) -> HahnVector {
        HahnVector {
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (i.clone().under(prefix), c.clone()))
                .collect(),
        }
    }

    /// Splits off the part supported under `prefix`, re-indexed to the subtree.
    pub fn restrict(&self, prefix: &[Side]) -> HahnVector {
        HahnVector {
            coeffs: self
                .coeffs
                .iter()
                .filter_map(|(i, c)| i.strip(prefix).map(|j| (j.clone(), c.clone())))
                .collect(),
        }
    }

    pub fn map_indices(&self, f: impl Fn(&Index) -> Index) -> HahnVector {
        HahnVector::from_terms(self.coeffs.iter().map(|(i, c)| (f(i), c.clone())))
    }
}

impl fmt::Display for HahnVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (i, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·e[{i}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for HahnVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HahnVector({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    index: Index,
    value: Rational,
}

#[derive(Serialize, Deserialize)]
struct VectorJson {
    coeffs: Vec<TermJson>,
}

impl Serialize for HahnVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson {
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| TermJson {
                    index: i.clone(),
                    value: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HahnVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = VectorJson::deserialize(d)?;
        Ok(HahnVector::from_terms(
            raw.coeffs.into_iter().map(|t| (t.index, t.value)),
        ))
    }
}

/// A model ℚ((I)) with `σ(Σ c_i e_i) = Σ s(i) c_i e_{τ(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModelJson")]
pub struct HahnModel {
    order: IndexOrder,
    tau: OrderAuto,
    scaling: Scaling,
}

#[derive(Deserialize)]
struct ModelJson {
    order: IndexOrder,
    tau: OrderAuto,
    scaling: Scaling,
}

impl TryFrom<ModelJson> for HahnModel {
    type Error = Error;
    fn try_from(m: ModelJson) -> Result<Self> {
        HahnModel::new(m.order, m.tau, m.scaling)
    }
}

impl HahnModel {
    /// Validates that `τ` and `s` fit the order. Because tables only live on
    /// finite blocks (where `τ` is the identity), `s` is constant on `τ`-orbits.
    pub fn new(order: IndexOrder, tau: OrderAuto, scaling: Scaling) -> Result<Self> {
        tau.validate(&order)?;
        scaling.validate(&order)?;
        Ok(HahnModel {
            order,
            tau,
            scaling,
        })
    }

    /// ℚ((ℤ)) with `σ(e_i) = e_{i+1}`.
    pub fn int_shift() -> Self {
        HahnModel::new(IndexOrder::Int, OrderAuto::shift(1), Scaling::one()).unwrap()
    }

    /// The one-dimensional model with `σ(x) = c·x`.
    pub fn singleton(c: Rational) -> Result<Self> {
        HahnModel::new(
            IndexOrder::finite(1),
            OrderAuto::Identity,
            Scaling::constant(c),
        )
    }

    pub fn order(&self) -> &IndexOrder {
        &self.order
    }

    pub fn tau(&self) -> &OrderAuto {
        &self.tau
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    pub fn contains(&self, v: &HahnVector) -> bool {
        v.support().all(|i| self.order.contains(i))
    }

    pub fn check(&self, v: &HahnVector) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    pub fn basis(&self, i: Index) -> Result<HahnVector> {
        self.order.check(&i)?;
        Ok(HahnVector::basis(i))
    }

    pub fn vec_add(&self, v: &HahnVector, w: &HahnVector) -> Result<HahnVector> {
        self.check(v)?;
        self.check(w)?;
        Ok(v.add(w))
    }

    pub fn vec_neg(&self, v: &HahnVector) -> Result<HahnVector> {
        self.check(v)?;
        Ok(v.neg())
    }

    pub fn vec_scale(&self, v: &HahnVector, r: &Rational) -> Result<HahnVector> {
        self.check(v)?;
        Ok(v.scale(r))
    }

    /// Minimal support index and its coefficient.
    pub fn leading<'a>(&self, v: &'a HahnVector) -> Option<(&'a Index, &'a Rational)> {
        v.terms()
            .min_by(|(a, _), (b, _)| self.order.compare_unchecked(a, b))
    }

    pub fn sign(&self, v: &HahnVector) -> Ordering {
        self.leading(v).map_or(Ordering::Equal, |(_, c)| c.sign())
    }

    pub fn vec_compare(&self, v: &HahnVector, w: &HahnVector) -> Result<Ordering> {
        self.check(v)?;
        self.check(w)?;
        Ok(self.sign(&v.sub(w)))
    }

    pub fn compare_unchecked(&self, v: &HahnVector, w: &HahnVector) -> Ordering {
        self.sign(&v.sub(w))
    }

    pub fn valuation(&self, v: &HahnVector) -> Result<Index> {
        self.check(v)?;
        self.leading(v)
            .map(|(i, _)| i.clone())
            .ok_or(Error::ZeroVector)
    }

    /// `v ≪ w`: `n|v| < |w|` for every positive integer `n`.
    pub fn rel_much_smaller(&self, v: &HahnVector, w: &HahnVector) -> Result<bool> {
        let (a, b) = (self.valuation(v)?, self.valuation(w)?);
        Ok(self.order.compare_unchecked(&a, &b) == Ordering::Greater)
    }

    /// `v ≍ w`: same Archimedean class.
    pub fn rel_asymp(&self, v: &HahnVector, w: &HahnVector) -> Result<bool> {
        Ok(self.valuation(v)? == self.valuation(w)?)
    }

    /// `v ∼ w`: `v = w` or `v − w ≪ w`.
    pub fn rel_sim(&self, v: &HahnVector, w: &HahnVector) -> Result<bool> {
        self.valuation(v)?;
        self.valuation(w)?;
        let d = v.sub(w);
        if d.is_zero() {
            return Ok(true);
        }
        self.rel_much_smaller(&d, w)
    }

    pub fn scaling_at(&self, i: &Index) -> &Rational {
        self.scaling.at(i)
    }

    /// `σ^k(v)`. Since `s` is constant along `τ`-orbits, the orbit product is `s(i)^k`.
    pub fn sigma_apply(&self, v: &HahnVector, k: i64) -> Result<HahnVector> {
        self.check(v)?;
        Ok(self.sigma_unchecked(v, k))
    }

    pub fn sigma_unchecked(&self, v: &HahnVector, k: i64) -> HahnVector {
        if k == 0 {
            return v.clone();
        }
        HahnVector {
            coeffs: v
                .terms()
                .map(|(i, c)| {
                    (
                        self.tau.apply_power_unchecked(i, k),
                        c * self.scaling.at(i).pow(k),
                    )
                })
                .collect(),
        }
    }

    /// Leaf blocks of the index tree, left to right.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        collect_blocks(
            &self.order,
            &self.tau,
            &self.scaling,
            &mut Vec::new(),
            &mut out,
        );
        out
    }

    /// The leaf block containing `i`.
    pub fn block_of(&self, i: &Index) -> Block {
        self.blocks()
            .into_iter()
            .find(|b| i.strip(&b.prefix).is_some_and(|j| b.order.contains(j)))
            .expect("index outside the model")
    }

    /// The restriction of the model to the subtree at `prefix`.
    pub fn submodel(&self, prefix: &[Side]) -> Option<HahnModel> {
        let order = self.order.subtree(prefix)?.clone();
        let tau = self.tau.subtree(prefix)?.clone();
        let scaling = self.scaling.subtree(prefix)?.clone();
        HahnModel::new(order, tau, scaling).ok()
    }

    /// Whether the subtree of `self` at `prefix` carries exactly the structure of `other`.
    pub fn embeds_at(&self, other: &HahnModel, prefix: &[Side]) -> bool {
        self.submodel(prefix).is_some_and(|sub| {
            sub.order == other.order
                && sub.tau.equivalent(&other.tau)
                && sub.scaling.equivalent(&other.scaling, &other.order)
        })
    }

    /// `ℚ ×_lex M`: a new top position `ℓ` with `σ(ℓ) = c·ℓ`, above every old vector.
    pub fn prepend_scaled_line(&self, c: Rational) -> Result<HahnModel> {
        positive(&c)?;
        HahnModel::new(
            IndexOrder::concat(IndexOrder::finite(1), self.order.clone()),
            OrderAuto::concat(OrderAuto::Identity, self.tau.clone()),
            Scaling::concat(Scaling::Table { values: vec![c] }, self.scaling.clone()),
        )
    }

    /// The unit `ℓ` of [`HahnModel::prepend_scaled_line`].
    pub fn prepended_unit() -> HahnVector {
        HahnVector::basis(Index::left(Index::Pos(0)))
    }

    pub fn lex_product(m1: &HahnModel, m2: &HahnModel) -> HahnModel {
        HahnModel::new(
            IndexOrder::concat(m1.order.clone(), m2.order.clone()),
            OrderAuto::concat(m1.tau.clone(), m2.tau.clone()),
            Scaling::concat(m1.scaling.clone(), m2.scaling.clone()),
        )
        .expect("blockwise data of valid models is valid")
    }

    pub fn embed_left(v: &HahnVector) -> HahnVector {
        v.under(&[Side::Left])
    }

    pub fn embed_right(v: &HahnVector) -> HahnVector {
        v.under(&[Side::Right])
    }
}

fn collect_blocks(
    order: &IndexOrder,
    tau: &OrderAuto,
    scaling: &Scaling,
    prefix: &mut Vec<Side>,
    out: &mut Vec<Block>,
) {
    if let IndexOrder::Concat { left, right } = order {
        for (side, sub) in [(Side::Left, left), (Side::Right, right)] {
            let t = tau.subtree(&[side]).expect("validated automorphism");
            let s = scaling.subtree(&[side]).expect("validated scaling");
            prefix.push(side);
            collect_blocks(sub, t, s, prefix, out);
            prefix.pop();
        }
        return;
    }
    let shift = match tau {
        OrderAuto::Shift { k } => *k,
        _ => 0,
    };
    let scaling = match scaling {
        Scaling::Constant { value } => BlockScaling::Constant(value.clone()),
        Scaling::Table { values } => BlockScaling::Table(values.clone()),
        Scaling::Concat { .. } => unreachable!("validated scaling"),
    };
    out.push(Block {
        prefix: prefix.clone(),
        order: order.clone(),
        shift,
        scaling,
    });
}

/// A convex subgroup: the vectors supported in the right part of an index cut.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConvexSubgroup {
    pub final_segment: Cut,
}

/// Which flank of a convex subgroup a cut sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flank {
    /// Immediately below the subgroup: left part `{x < C}`.
    Left,
    /// Immediately above the subgroup: left part `{x : x ≤ c for some c ∈ C}`.
    Right,
}

impl ConvexSubgroup {
    pub fn new(model: &HahnModel, final_segment: Cut) -> Result<Self> {
        final_segment.validate(model.order())?;
        Ok(ConvexSubgroup { final_segment })
    }

    /// The trivial subgroup `{0}`.
    pub fn trivial() -> Self {
        ConvexSubgroup {
            final_segment: Cut::AtPlusInfinity,
        }
    }

    pub fn contains(&self, model: &HahnModel, v: &HahnVector) -> bool {
        v.support().all(|i| {
            self.final_segment.side(model.order(), i) == Ok(CutSide::Right)
        })
    }

    /// Whether `σ(C) = C`.
    pub fn is_sigma_invariant(&self, model: &HahnModel, samples: &[Index]) -> bool {
        samples.iter().all(|i| {
            let side = |j: &Index| self.final_segment.side(model.order(), j).ok();
            let s = side(i);
            s == side(&model.tau().apply_power_unchecked(i, 1))
                && s == side(&model.tau().apply_power_unchecked(i, -1))
        })
    }

    /// Side of `x` relative to the cut flanking the subgroup on `flank`.
    pub fn flank_side(&self, model: &HahnModel, flank: Flank, x: &HahnVector) -> CutSide {
        let inside = self.contains(model, x);
        match flank {
            Flank::Right => {
                if inside || model.sign(x) == Ordering::Less {
                    CutSide::Left
                } else {
                    CutSide::Right
                }
            }
            Flank::Left => {
                if inside || model.sign(x) == Ordering::Greater {
                    CutSide::Right
                } else {
                    CutSide::Left
                }
            }
        }
    }
}
