//! Explicit model extensions: a shift orbit above a model, lexicographic
//! prepending, and formal adjunction of a solution of a degree-1 equation.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hahn::{ConvexSubgroup, Flank, HahnModel, HahnVector, Scaling};
use crate::orders::{CutSide, Index, IndexOrder, OrderAuto, Side};
use crate::scalars::Rational;
use crate::sigmapoly::{sp_eval_unchecked, Monotone, Ovsa, SigmaPoly};

/// The orbit `(e'_i)_{i∈ℤ}` adjoined by [`adjoin_shift_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftOrbit;

impl ShiftOrbit {
    pub fn element(&self, i: i64) -> HahnVector {
        HahnVector::basis(Index::left(Index::Int(i)))
    }
}

/// Adjoins `(e'_i)_{i∈ℤ}` above every vector of `model`, with `σ(e'_i) = e'_{i+1}`
/// and `e'_i < e'_{i+1}`. Old vectors embed under the right tag.
pub fn adjoin_shift_orbit(model: &HahnModel) -> (HahnModel, ShiftOrbit) {
    let m = HahnModel::new(
        IndexOrder::concat(IndexOrder::IntReversed, model.order().clone()),
        OrderAuto::concat(OrderAuto::shift(1), model.tau().clone()),
        Scaling::concat(Scaling::one(), model.scaling().clone()),
    )
    .expect("valid model extended by a valid block");
    (m, ShiftOrbit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// `ℚ((ℤ)) ×_lex M` with the forward or backward shift on the new block.
pub fn lex_prepend(model: &HahnModel, direction: Direction) -> HahnModel {
    let k = match direction {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    HahnModel::lex_product(
        &HahnModel::new(IndexOrder::Int, OrderAuto::shift(k), Scaling::one()).unwrap(),
        model,
    )
}

/// A model: either a Hahn model or a formal degree-1 extension of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Hahn(HahnModel),
    Ext(Box<ExtModel>),
}

/// An element of a [`Model`]; extension elements are `base + gen·b'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    Hahn(HahnVector),
    Ext { base: Box<Element>, gen: Rational },
}

impl Element {
    pub fn ext(base: Element, gen: Rational) -> Element {
        Element::Ext {
            base: Box::new(base),
            gen,
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        match (self, other) {
            (Element::Hahn(a), Element::Hahn(b)) => Element::Hahn(a.add(b)),
            (Element::Ext { base: a, gen: r }, Element::Ext { base: b, gen: s }) => {
                Element::ext(a.add(b), r + s)
            }
            _ => panic!("adding elements of different models"),
        }
    }

    pub fn neg(&self) -> Element {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Element {
        match self {
            Element::Hahn(a) => Element::Hahn(a.scale(r)),
            Element::Ext { base, gen } => Element::ext(base.scale(r), gen * r),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Element::Hahn(a) => a.is_zero(),
            Element::Ext { base, gen } => gen.is_zero() && base.is_zero(),
        }
    }

    /// The Hahn vector of an element with no formal generator components.
    pub fn as_hahn(&self) -> Option<&HahnVector> {
        match self {
            Element::Hahn(v) => Some(v),
            Element::Ext { base, gen } if gen.is_zero() => base.as_hahn(),
            Element::Ext { .. } => None,
        }
    }
}

impl Model {
    pub fn root(&self) -> &HahnModel {
        match self {
            Model::Hahn(m) => m,
            Model::Ext(e) => e.base.root(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Model::Hahn(_) => 0,
            Model::Ext(e) => 1 + e.base.depth(),
        }
    }

    /// Lifts a vector of the root Hahn model through every extension layer.
    pub fn lift(&self, v: HahnVector) -> Element {
        match self {
            Model::Hahn(_) => Element::Hahn(v),
            Model::Ext(e) => Element::ext(e.base.lift(v), Rational::zero()),
        }
    }

    /// Lifts an element of the base of the outermost layer.
    pub fn lift_from_base(&self, x: Element) -> Element {
        match self {
            Model::Hahn(_) => x,
            Model::Ext(_) => Element::ext(x, Rational::zero()),
        }
    }

    /// Embeds a vector of a block model sitting under `prefix` in the root.
    pub fn embed_block(&self, prefix: &[Side], v: &HahnVector) -> Element {
        self.lift(v.under(prefix))
    }
}

impl Ovsa for Model {
    type Elem = Element;

    fn zero(&self) -> Element {
        self.lift(HahnVector::zero())
    }

    fn add(&self, a: &Element, b: &Element) -> Element {
        a.add(b)
    }

    fn neg(&self, a: &Element) -> Element {
        a.neg()
    }

    fn scale(&self, a: &Element, r: &Rational) -> Element {
        a.scale(r)
    }

    fn sign(&self, a: &Element) -> Ordering {
        match (self, a) {
            (Model::Hahn(m), Element::Hahn(v)) => m.sign(v),
            (Model::Ext(e), Element::Ext { base, gen }) => e.sign(base, gen),
            _ => panic!("element does not belong to the model"),
        }
    }

    fn sigma_pow(&self, a: &Element, k: i64) -> Element {
        match (self, a) {
            (Model::Hahn(m), Element::Hahn(v)) => Element::Hahn(m.sigma_unchecked(v, k)),
            (Model::Ext(e), _) => e.sigma_pow(a, k),
            _ => panic!("element does not belong to the model"),
        }
    }

    fn contains(&self, a: &Element) -> bool {
        match (self, a) {
            (Model::Hahn(m), Element::Hahn(v)) => m.contains(v),
            (Model::Ext(e), Element::Ext { base, .. }) => e.base.contains(base),
            _ => false,
        }
    }

    /// Exact on Hahn models; on extensions only absolute monotonicity is used.
    fn monotonicity(&self, f: &SigmaPoly) -> Option<Monotone> {
        match self {
            Model::Hahn(m) => m.monotonicity(f),
            Model::Ext(_) => f.classify_monotone().ok()?.direction(),
        }
    }
}

/// Where an element of the base sits relative to a model cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Left,
    /// The element realizes the cut (it is the point, or solves the equation).
    On,
    Right,
}

impl From<CutSide> for Placement {
    fn from(s: CutSide) -> Self {
        match s {
            CutSide::Left => Placement::Left,
            CutSide::Right => Placement::Right,
        }
    }
}

/// A cut of a Hahn block `A` sitting at a prefix of a larger Hahn model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockCut {
    MinusInfinity,
    PlusInfinity,
    /// Left part `{a ≤ point}`.
    Above { point: HahnVector },
    /// Left part `{a < point}`.
    Below { point: HahnVector },
}

impl BlockCut {
    /// The cut over the block at `prefix` realized by `b ∈ model`, or `None`
    /// when `b` lies in the block itself.
    pub fn of_element(model: &HahnModel, prefix: &[Side], b: &HahnVector) -> Option<BlockCut> {
        let (before, inside, after) = decompose(b, prefix);
        match model.sign(&before) {
            Ordering::Greater => return Some(BlockCut::PlusInfinity),
            Ordering::Less => return Some(BlockCut::MinusInfinity),
            Ordering::Equal => {}
        }
        match model.sign(&after) {
            Ordering::Greater => Some(BlockCut::Above { point: inside }),
            Ordering::Less => Some(BlockCut::Below { point: inside }),
            Ordering::Equal => None,
        }
    }

    fn side(&self, block: &HahnModel, x: &HahnVector) -> CutSide {
        let left = match self {
            BlockCut::MinusInfinity => false,
            BlockCut::PlusInfinity => true,
            BlockCut::Above { point } => block.compare_unchecked(x, point) != Ordering::Greater,
            BlockCut::Below { point } => block.compare_unchecked(x, point) == Ordering::Less,
        };
        if left {
            CutSide::Left
        } else {
            CutSide::Right
        }
    }
}

/// Splits `v` into the parts supported before, inside (re-indexed), and after
/// the subtree at `prefix`, which is a convex piece of the index order.
pub fn decompose(v: &HahnVector, prefix: &[Side]) -> (HahnVector, HahnVector, HahnVector) {
    let mut before = HahnVector::zero();
    let mut after = HahnVector::zero();
    for (i, c) in v.terms() {
        if i.strip(prefix).is_some() {
            continue;
        }
        let mut cur = i;
        for side in prefix {
            match (side, cur) {
                (Side::Left, Index::Left(x)) | (Side::Right, Index::Right(x)) => cur = x,
                (Side::Left, _) => {
                    after.add_term(i.clone(), c);
                    break;
                }
                (Side::Right, _) => {
                    before.add_term(i.clone(), c);
                    break;
                }
            }
        }
    }
    (before, v.restrict(prefix), after)
}

/// A cut of the base of an extension, from a closed grammar whose
/// existential side-queries are decidable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelCut {
    MinusInfinity,
    PlusInfinity,
    At {
        point: Element,
    },
    /// The cut of a zero of `poly(x) = rhs`, with `poly` monotone on the base.
    SignOf {
        poly: SigmaPoly,
        rhs: Element,
        direction: Monotone,
    },
    /// A flank of a convex subgroup of a Hahn base.
    Flank {
        subgroup: ConvexSubgroup,
        flank: Flank,
    },
    /// A cut of the block at `prefix` of a Hahn base, extended to the whole
    /// base through the existential side-queries.
    OverBlock {
        prefix: Vec<Side>,
        cut: BlockCut,
    },
}

impl ModelCut {
    pub fn validate(&self, base: &Model) -> Result<()> {
        match self {
            ModelCut::MinusInfinity | ModelCut::PlusInfinity => Ok(()),
            ModelCut::At { point } => check_in(base, point),
            ModelCut::SignOf {
                poly,
                rhs,
                direction,
            } => {
                check_in(base, rhs)?;
                if base.monotonicity(poly) == Some(*direction) {
                    Ok(())
                } else {
                    Err(Error::CutQueryUndecidable(format!(
                        "{poly} is not known to be {direction:?} on the base"
                    )))
                }
            }
            ModelCut::Flank { subgroup, .. } => {
                let Model::Hahn(m) = base else {
                    return Err(Error::CutQueryUndecidable(
                        "flank cuts need a Hahn base".into(),
                    ));
                };
                subgroup.final_segment.validate(m.order())
            }
            ModelCut::OverBlock { prefix, cut } => {
                let Model::Hahn(m) = base else {
                    return Err(Error::CutQueryUndecidable(
                        "block cuts are only decidable over a Hahn base".into(),
                    ));
                };
                let block = m.submodel(prefix).ok_or_else(|| {
                    Error::InvalidModel("block prefix is not a subtree of the base".into())
                })?;
                match cut {
                    BlockCut::Above { point } | BlockCut::Below { point } => block.check(point),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Placement of a base element. Block cuts only place elements of their block.
    pub fn placement(&self, base: &Model, x: &Element) -> Result<Placement> {
        check_in(base, x)?;
        Ok(match self {
            ModelCut::MinusInfinity => Placement::Right,
            ModelCut::PlusInfinity => Placement::Left,
            ModelCut::At { point } => match base.cmp(x, point) {
                Ordering::Less => Placement::Left,
                Ordering::Equal => Placement::On,
                Ordering::Greater => Placement::Right,
            },
            ModelCut::SignOf {
                poly,
                rhs,
                direction,
            } => {
                let v = sp_eval_unchecked(base, poly, x);
                match (base.cmp(&v, rhs), direction) {
                    (Ordering::Equal, _) => Placement::On,
                    (Ordering::Less, Monotone::Increasing)
                    | (Ordering::Greater, Monotone::Decreasing) => Placement::Left,
                    _ => Placement::Right,
                }
            }
            ModelCut::Flank { subgroup, flank } => {
                let m = base.root();
                let v = x.as_hahn().ok_or(Error::ModelMismatch)?;
                subgroup.flank_side(m, *flank, v).into()
            }
            ModelCut::OverBlock { prefix, cut } => {
                let m = base.root();
                let v = x.as_hahn().ok_or(Error::ModelMismatch)?;
                let (before, inside, after) = decompose(v, prefix);
                if !before.is_zero() || !after.is_zero() {
                    return Err(Error::NotApplicable(
                        "element lies outside the block of the cut".into(),
                    ));
                }
                cut.side(&m.submodel(prefix).unwrap(), &inside).into()
            }
        })
    }

    /// Whether some right-part element is `≤ w`.
    pub fn exists_right_below(&self, base: &Model, w: &Element) -> bool {
        match self {
            ModelCut::OverBlock { prefix, cut } => block_query(base, prefix, cut, w, true),
            _ => self.placement(base, w).expect("validated cut") == Placement::Right,
        }
    }

    /// Whether some left-part element is `≥ w`.
    pub fn exists_left_above(&self, base: &Model, w: &Element) -> bool {
        match self {
            ModelCut::OverBlock { prefix, cut } => block_query(base, prefix, cut, w, false),
            _ => self.placement(base, w).expect("validated cut") == Placement::Left,
        }
    }
}

fn check_in(base: &Model, x: &Element) -> Result<()> {
    if base.contains(x) {
        Ok(())
    } else {
        Err(Error::ModelMismatch)
    }
}

/// Existential queries of a block cut against an arbitrary base element `w`,
/// by splitting `w = w_P + w_A + w_Q` around the block `A`.
fn block_query(base: &Model, prefix: &[Side], cut: &BlockCut, w: &Element, right_below: bool) -> bool {
    let m = base.root();
    let v = w.as_hahn().expect("block cuts live over Hahn bases");
    let block = m.submodel(prefix).expect("validated prefix");
    let nontrivial = !block.order().is_empty();
    let (before, inside, after) = decompose(v, prefix);
    let cmp_pt = |pt: &HahnVector| block.compare_unchecked(&inside, pt);
    let s_after = m.sign(&after);
    if right_below {
        let right_nonempty = match cut {
            BlockCut::MinusInfinity | BlockCut::Below { .. } => true,
            BlockCut::PlusInfinity => false,
            BlockCut::Above { .. } => nontrivial,
        };
        match m.sign(&before) {
            Ordering::Greater => right_nonempty,
            Ordering::Less => false,
            Ordering::Equal => match cut {
                BlockCut::MinusInfinity => nontrivial || s_after != Ordering::Less,
                BlockCut::PlusInfinity => false,
                BlockCut::Above { point } => cmp_pt(point) == Ordering::Greater,
                BlockCut::Below { point } => match cmp_pt(point) {
                    Ordering::Greater => true,
                    Ordering::Equal => s_after != Ordering::Less,
                    Ordering::Less => false,
                },
            },
        }
    } else {
        let left_nonempty = match cut {
            BlockCut::PlusInfinity | BlockCut::Above { .. } => true,
            BlockCut::MinusInfinity => false,
            BlockCut::Below { .. } => nontrivial,
        };
        match m.sign(&before) {
            Ordering::Less => left_nonempty,
            Ordering::Greater => false,
            Ordering::Equal => match cut {
                BlockCut::PlusInfinity => nontrivial || s_after != Ordering::Greater,
                BlockCut::MinusInfinity => false,
                BlockCut::Below { point } => cmp_pt(point) == Ordering::Less,
                BlockCut::Above { point } => match cmp_pt(point) {
                    Ordering::Less => true,
                    Ordering::Equal => s_after != Ordering::Greater,
                    Ordering::Greater => false,
                },
            },
        }
    }
}

/// Which ordering rule places the formal generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// `b' < c` iff some right-part element is `≤ c`.
    Case1,
    /// `b' > c` iff some left-part element is `≥ c`.
    Case2,
}

impl Serialize for Case {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(match self {
            Case::Case1 => 1,
            Case::Case2 => 2,
        })
    }
}

impl<'de> Deserialize<'de> for Case {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            1 => Ok(Case::Case1),
            2 => Ok(Case::Case2),
            n => Err(serde::de::Error::custom(format!("case must be 1 or 2, got {n}"))),
        }
    }
}

/// `base ⊕ ℚb'` where `b'` solves `r₀x + r₁σ(x) = a` and realizes a cut of the base.
///
/// σ extends by `σ(b') = μb' + t` with `μ = −r₀/r₁` and `t = a/r₁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtModel {
    base: Model,
    poly: SigmaPoly,
    rhs: Element,
    cut: ModelCut,
    case: Case,
    mu: Rational,
    t: Element,
}

#[derive(Serialize, Deserialize)]
struct ExtJson {
    base: Model,
    cut: ModelCut,
    a: Element,
    case: Case,
    #[serde(default = "normalized_poly", skip_serializing_if = "is_normalized")]
    poly: SigmaPoly,
}

fn normalized_poly() -> SigmaPoly {
    SigmaPoly::from_ints(&[1, -1])
}

fn is_normalized(p: &SigmaPoly) -> bool {
    *p == normalized_poly()
}

impl Serialize for ExtModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtJson {
            base: self.base.clone(),
            cut: self.cut.clone(),
            a: self.rhs.clone(),
            case: self.case,
            poly: self.poly.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ExtJson::deserialize(d)?;
        ExtModel::new(raw.base, raw.poly, raw.a, raw.cut, raw.case)
            .map_err(serde::de::Error::custom)
    }
}

/// `(r₀, r₁)` of a polynomial `r₀ + r₁σ` with both coefficients nonzero.
fn degree1_coeffs(poly: &SigmaPoly) -> Result<(Rational, Rational)> {
    let (r0, r1) = (poly.coeff(0), poly.coeff(1));
    if r0.is_zero() || r1.is_zero() || poly.exponents().any(|k| k != 0 && k != 1) {
        return Err(Error::NotNormalized(format!(
            "{poly} is not of the form r₀ + r₁σ with r₀, r₁ ≠ 0"
        )));
    }
    Ok((r0, r1))
}

impl ExtModel {
    /// Adjoins `b'` with `poly(b') = rhs` for any `poly = r₀ + r₁σ` with nonzero
    /// coefficients. The caller is responsible for the cut being compatible with σ.
    pub fn new(base: Model, poly: SigmaPoly, rhs: Element, cut: ModelCut, case: Case) -> Result<Self> {
        let (r0, r1) = degree1_coeffs(&poly)?;
        check_in(&base, &rhs)?;
        cut.validate(&base)?;
        let mu = -(&r0 / &r1);
        let t = rhs.scale(&r1.recip());
        Ok(ExtModel {
            base,
            poly,
            rhs,
            cut,
            case,
            mu,
            t,
        })
    }

    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn poly(&self) -> &SigmaPoly {
        &self.poly
    }

    pub fn rhs(&self) -> &Element {
        &self.rhs
    }

    pub fn cut(&self) -> &ModelCut {
        &self.cut
    }

    pub fn case(&self) -> Case {
        self.case
    }

    /// The formal solution `b'`.
    pub fn generator(&self) -> Element {
        Element::ext(self.base.zero(), Rational::one())
    }

    /// Embeds a base element.
    pub fn embed(&self, c: Element) -> Element {
        Element::ext(c, Rational::zero())
    }

    fn gen_above(&self, w: &Element) -> bool {
        match self.case {
            Case::Case1 => !self.cut.exists_right_below(&self.base, w),
            Case::Case2 => self.cut.exists_left_above(&self.base, w),
        }
    }

    /// Sign of `c + r·b'`: for `r ≠ 0` it is the sign of `r` times the side of
    /// `b'` relative to `−c/r`.
    fn sign(&self, c: &Element, r: &Rational) -> Ordering {
        if r.is_zero() {
            return self.base.sign(c);
        }
        let w = c.scale(&-r.recip());
        match (r.is_positive(), self.gen_above(&w)) {
            (true, true) | (false, false) => Ordering::Greater,
            _ => Ordering::Less,
        }
    }

    fn sigma_once(&self, x: &Element, inverse: bool) -> Element {
        let Element::Ext { base: c, gen: r } = x else {
            panic!("element does not belong to the extension");
        };
        if inverse {
            let r2 = r / &self.mu;
            let c_shift = self.base.sub(c, &self.t.scale(&r2));
            Element::ext(self.base.sigma_pow(&c_shift, -1), r2)
        } else {
            let c2 = self.base.add(&self.base.sigma_pow(c, 1), &self.t.scale(r));
            Element::ext(c2, r * &self.mu)
        }
    }

    fn sigma_pow(&self, x: &Element, k: i64) -> Element {
        (0..k.unsigned_abs()).fold(x.clone(), |acc, _| self.sigma_once(&acc, k < 0))
    }
}

/// Adjoins a solution of `r₀x + r₁σ(x) = a` with `r₀r₁ < 0` realizing `cut`.
///
/// Such an equation is `x − σ'(x) = a/r₀` for the rescaled automorphism
/// `σ' = (−r₁/r₀)σ`; since the factor is rational the extension is built directly
/// with `σ(b') = μb' + a/r₁`, `μ = −r₀/r₁ > 0`.
pub fn adjoin_degree1_solution(
    base: Model,
    poly: SigmaPoly,
    a: Element,
    cut: ModelCut,
    case: Case,
) -> Result<ExtModel> {
    let (r0, r1) = degree1_coeffs(&poly)?;
    if (&r0 * &r1).is_positive() {
        return Err(Error::NotNormalized(format!(
            "{poly} has coefficients of equal sign"
        )));
    }
    ExtModel::new(base, poly, a, cut, case)
}
