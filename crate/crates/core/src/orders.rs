//! Composable linear orders used as Hahn index sets, their automorphisms, and cuts.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear order built from finite chains, copies of ℤ and concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexOrder {
    Finite { n: u64 },
    Int,
    /// ℤ with the reversed order: larger labels come first.
    IntReversed,
    Concat {
        left: Box<IndexOrder>,
        right: Box<IndexOrder>,
    },
}

/// Which half of a concatenation an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// An element of an [`IndexOrder`], addressed by its path through the tree.
///
/// The derived `Ord` is structural (used for canonical storage), not the order
/// of the index set; use [`IndexOrder::compare`] for that.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Index {
    Pos(u64),
    Int(i64),
    Left(Box<Index>),
    Right(Box<Index>),
}

impl Index {
    pub fn left(i: Index) -> Index {
        Index::Left(Box::new(i))
    }

    pub fn right(i: Index) -> Index {
        Index::Right(Box::new(i))
    }

    /// Wraps `self` under a path of concatenation tags, outermost first.
    pub fn under(self, prefix: &[Side]) -> Index {
        prefix.iter().rev().fold(self, |acc, side| match side {
            Side::Left => Index::left(acc),
            Side::Right => Index::right(acc),
        })
    }

    /// Inverse of [`Index::under`]; `None` if the element is outside that subtree.
    pub fn strip(&self, prefix: &[Side]) -> Option<&Index> {
        let mut cur = self;
        for side in prefix {
            cur = match (side, cur) {
                (Side::Left, Index::Left(inner)) | (Side::Right, Index::Right(inner)) => inner,
                _ => return None,
            };
        }
        Some(cur)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Pos(p) => write!(f, "#{p}"),
            Index::Int(n) => write!(f, "{n}"),
            Index::Left(i) => write!(f, "L({i})"),
            Index::Right(i) => write!(f, "R({i})"),
        }
    }
}

impl IndexOrder {
    pub fn finite(n: u64) -> Self {
        IndexOrder::Finite { n }
    }

    pub fn concat(left: IndexOrder, right: IndexOrder) -> Self {
        IndexOrder::Concat {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn contains(&self, i: &Index) -> bool {
        match (self, i) {
            (IndexOrder::Finite { n }, Index::Pos(p)) => p < n,
            (IndexOrder::Int | IndexOrder::IntReversed, Index::Int(_)) => true,
            (IndexOrder::Concat { left, .. }, Index::Left(x)) => left.contains(x),
            (IndexOrder::Concat { right, .. }, Index::Right(x)) => right.contains(x),
            _ => false,
        }
    }

    pub fn check(&self, i: &Index) -> Result<()> {
        if self.contains(i) {
            Ok(())
        } else {
            Err(Error::ElementNotInOrder(i.to_string()))
        }
    }

    pub fn compare(&self, i: &Index, j: &Index) -> Result<Ordering> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.compare_unchecked(i, j))
    }

    /// Comparison for elements already known to belong to the order.
    pub fn compare_unchecked(&self, i: &Index, j: &Index) -> Ordering {
        match (self, i, j) {
            (IndexOrder::Finite { .. }, Index::Pos(a), Index::Pos(b)) => a.cmp(b),
            (IndexOrder::Int, Index::Int(a), Index::Int(b)) => a.cmp(b),
            (IndexOrder::IntReversed, Index::Int(a), Index::Int(b)) => b.cmp(a),
            (IndexOrder::Concat { left, .. }, Index::Left(a), Index::Left(b)) => {
                left.compare_unchecked(a, b)
            }
            (IndexOrder::Concat { right, .. }, Index::Right(a), Index::Right(b)) => {
                right.compare_unchecked(a, b)
            }
            (IndexOrder::Concat { .. }, Index::Left(_), Index::Right(_)) => Ordering::Less,
            (IndexOrder::Concat { .. }, Index::Right(_), Index::Left(_)) => Ordering::Greater,
            _ => panic!("compare_unchecked on elements outside the order"),
        }
    }

    /// The subtree reached by following `prefix`.
    pub fn subtree(&self, prefix: &[Side]) -> Option<&IndexOrder> {
        let mut cur = self;
        for side in prefix {
            cur = match (side, cur) {
                (Side::Left, IndexOrder::Concat { left, .. }) => left,
                (Side::Right, IndexOrder::Concat { right, .. }) => right,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn is_empty(&self) -> bool {
        match self {
            IndexOrder::Finite { n } => *n == 0,
            IndexOrder::Int | IndexOrder::IntReversed => false,
            IndexOrder::Concat { left, right } => left.is_empty() && right.is_empty(),
        }
    }

    /// A distinguished element: label 0, position 0, or the origin of the
    /// leftmost nonempty half.
    pub fn origin(&self) -> Option<Index> {
        match self {
            IndexOrder::Finite { n } => (*n > 0).then_some(Index::Pos(0)),
            IndexOrder::Int | IndexOrder::IntReversed => Some(Index::Int(0)),
            IndexOrder::Concat { left, right } => left
                .origin()
                .map(Index::left)
                .or_else(|| right.origin().map(Index::right)),
        }
    }

    pub fn min_of<'a>(&self, items: impl IntoIterator<Item = &'a Index>) -> Option<&'a Index> {
        items
            .into_iter()
            .min_by(|a, b| self.compare_unchecked(a, b))
    }
}

/// An order-automorphism of an [`IndexOrder`], mirroring its tree shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderAuto {
    Identity,
    /// Translation of integer labels by `k` on an `Int` or `IntReversed` block.
    Shift { k: i64 },
    Concat {
        left: Box<OrderAuto>,
        right: Box<OrderAuto>,
    },
}

impl OrderAuto {
    pub fn shift(k: i64) -> Self {
        OrderAuto::Shift { k }
    }

    pub fn concat(left: OrderAuto, right: OrderAuto) -> Self {
        OrderAuto::Concat {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Checks that the automorphism fits the shape of `order`.
    pub fn validate(&self, order: &IndexOrder) -> Result<()> {
        match (self, order) {
            (OrderAuto::Identity, _) => Ok(()),
            (OrderAuto::Shift { .. }, IndexOrder::Int | IndexOrder::IntReversed) => Ok(()),
            (OrderAuto::Shift { k }, _) => Err(Error::IncompatibleAuto(format!(
                "shift by {k} needs an integer block"
            ))),
            (OrderAuto::Concat { left, right }, IndexOrder::Concat { left: l, right: r }) => {
                left.validate(l)?;
                right.validate(r)
            }
            (OrderAuto::Concat { .. }, _) => Err(Error::IncompatibleAuto(
                "concatenated automorphism on a non-concatenated order".into(),
            )),
        }
    }

    pub fn inverse(&self) -> Self {
        self.power(-1)
    }

    pub fn power(&self, p: i64) -> Self {
        match self {
            OrderAuto::Identity => OrderAuto::Identity,
            OrderAuto::Shift { k } => OrderAuto::Shift { k: k * p },
            OrderAuto::Concat { left, right } => OrderAuto::concat(left.power(p), right.power(p)),
        }
    }

    pub fn apply(&self, order: &IndexOrder, i: &Index) -> Result<Index> {
        self.apply_power(order, i, 1)
    }

    pub fn apply_power(&self, order: &IndexOrder, i: &Index, p: i64) -> Result<Index> {
        order.check(i)?;
        Ok(self.apply_power_unchecked(i, p))
    }

    /// `τ^p(i)` for an element known to belong to a validated order.
    pub fn apply_power_unchecked(&self, i: &Index, p: i64) -> Index {
        match (self, i) {
            (OrderAuto::Identity, _) => i.clone(),
            (OrderAuto::Shift { k }, Index::Int(n)) => Index::Int(n + k * p),
            (OrderAuto::Concat { left, .. }, Index::Left(x)) => {
                Index::left(left.apply_power_unchecked(x, p))
            }
            (OrderAuto::Concat { right, .. }, Index::Right(x)) => {
                Index::right(right.apply_power_unchecked(x, p))
            }
            _ => panic!("automorphism applied to an element of the wrong shape"),
        }
    }

    pub fn subtree(&self, prefix: &[Side]) -> Option<&OrderAuto> {
        let mut cur = self;
        for side in prefix {
            cur = match (side, cur) {
                (_, OrderAuto::Identity) => return Some(cur),
                (Side::Left, OrderAuto::Concat { left, .. }) => left,
                (Side::Right, OrderAuto::Concat { right, .. }) => right,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Structural equality after expanding `Identity` over concatenations.
    pub fn equivalent(&self, other: &OrderAuto) -> bool {
        match (self, other) {
            (OrderAuto::Identity, OrderAuto::Identity) => true,
            (OrderAuto::Shift { k }, OrderAuto::Shift { k: j }) => k == j,
            (OrderAuto::Identity, OrderAuto::Shift { k }) | (OrderAuto::Shift { k }, OrderAuto::Identity) => *k == 0,
            (OrderAuto::Concat { left, right }, OrderAuto::Concat { left: l, right: r }) => {
                left.equivalent(l) && right.equivalent(r)
            }
            (OrderAuto::Identity, OrderAuto::Concat { left, right })
            | (OrderAuto::Concat { left, right }, OrderAuto::Identity) => {
                left.equivalent(&OrderAuto::Identity) && right.equivalent(&OrderAuto::Identity)
            }
            _ => false,
        }
    }
}

/// Which part of a cut an element falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutSide {
    Left,
    Right,
}

/// A cut of an index order: a partition into a downward closed left part and
/// an upward closed right part.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cut {
    /// Everything is on the right.
    AtMinusInfinity,
    /// Everything is on the left.
    AtPlusInfinity,
    /// Left part `{j : j < index}`.
    BelowElement { index: Index },
    /// Left part `{j : j ≤ index}`.
    AboveElement { index: Index },
    /// The boundary between the two halves of a top-level concatenation.
    ConcatSeam,
    /// The image of `cut` under `auto^power`.
    ImageUnderAuto {
        cut: Box<Cut>,
        auto: OrderAuto,
        power: i64,
    },
}

impl Cut {
    pub fn validate(&self, order: &IndexOrder) -> Result<()> {
        match self {
            Cut::AtMinusInfinity | Cut::AtPlusInfinity => Ok(()),
            Cut::BelowElement { index } | Cut::AboveElement { index } => order.check(index),
            Cut::ConcatSeam => match order {
                IndexOrder::Concat { .. } => Ok(()),
                _ => Err(Error::InvalidModel("seam cut on a non-concatenated order".into())),
            },
            Cut::ImageUnderAuto { cut, auto, .. } => {
                auto.validate(order)?;
                cut.validate(order)
            }
        }
    }

    /// Side of `i`; the cut must have been validated against `order`.
    pub fn side(&self, order: &IndexOrder, i: &Index) -> Result<CutSide> {
        order.check(i)?;
        Ok(self.side_unchecked(order, i))
    }

    fn side_unchecked(&self, order: &IndexOrder, i: &Index) -> CutSide {
        let left_if = |b: bool| if b { CutSide::Left } else { CutSide::Right };
        match self {
            Cut::AtMinusInfinity => CutSide::Right,
            Cut::AtPlusInfinity => CutSide::Left,
            Cut::BelowElement { index } => {
                left_if(order.compare_unchecked(i, index) == Ordering::Less)
            }
            Cut::AboveElement { index } => {
                left_if(order.compare_unchecked(i, index) != Ordering::Greater)
            }
            Cut::ConcatSeam => left_if(matches!(i, Index::Left(_))),
            Cut::ImageUnderAuto { cut, auto, power } => {
                cut.side_unchecked(order, &auto.apply_power_unchecked(i, -power))
            }
        }
    }

    /// Some right-part element `≤ bound`, if there is one.
    ///
    /// The right part is upward closed, so one exists iff `bound` itself is on
    /// the right.
    pub fn exists_right_below(&self, order: &IndexOrder, bound: &Index) -> Result<Option<Index>> {
        Ok((self.side(order, bound)? == CutSide::Right).then(|| bound.clone()))
    }

    /// Some left-part element `≥ bound`, if there is one.
    pub fn exists_left_above(&self, order: &IndexOrder, bound: &Index) -> Result<Option<Index>> {
        Ok((self.side(order, bound)? == CutSide::Left).then(|| bound.clone()))
    }
}
