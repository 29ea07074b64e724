//! Solving `f(x) = d` in Hahn models, sign-change search, cuts of zeros, and
//! the witnesses used to separate such cuts from convex subgroups.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extend::adjoin_shift_orbit;
use crate::hahn::{ConvexSubgroup, Flank, HahnModel, HahnVector};
use crate::orders::{CutSide, Index, Side};
use crate::scalars::Rational;
use crate::sigmapoly::{leading_image, sp_eval, sp_eval_unchecked, Monotone, Ovsa, SigmaPoly};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SolveOutcome {
    Solved {
        x: HahnVector,
    },
    /// The step cap was reached; `f(partial) + remainder = d`.
    Residual {
        partial: HahnVector,
        remainder: HahnVector,
        steps: usize,
    },
    /// No source index can produce the leading term of the remainder.
    Stuck {
        partial: HahnVector,
        remainder: HahnVector,
        reason: String,
    },
}

impl SolveOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, SolveOutcome::Solved { .. })
    }

    /// Independent re-check of the outcome's claim against `f` and `d`.
    pub fn verify(&self, model: &HahnModel, f: &SigmaPoly, d: &HahnVector) -> bool {
        let holds = |x: &HahnVector, rem: &HahnVector| {
            model.contains(x) && sp_eval_unchecked(model, f, x).add(rem) == *d
        };
        match self {
            SolveOutcome::Solved { x } => holds(x, &HahnVector::zero()),
            SolveOutcome::Residual {
                partial, remainder, ..
            }
            | SolveOutcome::Stuck {
                partial, remainder, ..
            } => !remainder.is_zero() && holds(partial, remainder),
        }
    }
}

/// What a single elimination step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Eliminated { source: Index, coefficient: Rational },
    Done,
    Stuck(String),
}

/// Greedy leading-term elimination for `f(x) = d`.
///
/// Each step looks at the leading index `i₀` of the remainder and picks a source
/// `j = τ^{-k}(i₀)` whose image `f(e_j)` leads exactly at `i₀`.
#[derive(Debug, Clone)]
pub struct GreedySolver<'a> {
    model: &'a HahnModel,
    f: &'a SigmaPoly,
    partial: HahnVector,
    remainder: HahnVector,
    steps: usize,
}

impl<'a> GreedySolver<'a> {
    pub fn new(model: &'a HahnModel, f: &'a SigmaPoly, d: &HahnVector) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::ZeroSigmaPoly);
        }
        model.check(d)?;
        Ok(GreedySolver {
            model,
            f,
            partial: HahnVector::zero(),
            remainder: d.clone(),
            steps: 0,
        })
    }

    pub fn partial(&self) -> &HahnVector {
        &self.partial
    }

    pub fn remainder(&self) -> &HahnVector {
        &self.remainder
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn candidate(&self, i0: &Index) -> Option<(i64, Index, Rational)> {
        let mut best: Option<(i64, Index, Rational)> = None;
        for k in self.f.exponents() {
            let j = self.model.tau().apply_power_unchecked(i0, -k);
            let Some((m, coef)) = leading_image(self.model, self.f, &j) else {
                continue;
            };
            if m != *i0 || coef.is_zero() {
                continue;
            }
            let better = best
                .as_ref()
                .is_none_or(|(bk, _, _)| (k.abs(), k) < (bk.abs(), *bk));
            if better {
                best = Some((k, j, coef));
            }
        }
        best
    }

    pub fn step(&mut self) -> Step {
        let Some((i0, lead)) = self
            .model
            .leading(&self.remainder)
            .map(|(i, c)| (i.clone(), c.clone()))
        else {
            return Step::Done;
        };
        let Some((_, j, coef)) = self.candidate(&i0) else {
            return Step::Stuck(format!(
                "no source index maps onto the leading index {i0} with a nonzero coefficient"
            ));
        };
        let c = lead / coef;
        let term = HahnVector::term(j.clone(), c.clone());
        self.remainder = self
            .remainder
            .sub(&sp_eval_unchecked(self.model, self.f, &term));
        self.partial = self.partial.add(&term);
        self.steps += 1;
        Step::Eliminated {
            source: j,
            coefficient: c,
        }
    }

    pub fn run(mut self, cap: usize) -> SolveOutcome {
        loop {
            if self.remainder.is_zero() {
                return SolveOutcome::Solved { x: self.partial };
            }
            if self.steps >= cap {
                return SolveOutcome::Residual {
                    partial: self.partial,
                    remainder: self.remainder,
                    steps: self.steps,
                };
            }
            if let Step::Stuck(reason) = self.step() {
                return SolveOutcome::Stuck {
                    partial: self.partial,
                    remainder: self.remainder,
                    reason,
                };
            }
        }
    }
}

/// Runs the greedy solver for at most `cap` steps.
pub fn solve_exact(
    f: &SigmaPoly,
    d: &HahnVector,
    model: &HahnModel,
    cap: usize,
) -> Result<SolveOutcome> {
    Ok(GreedySolver::new(model, f, d)?.run(cap))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BracketOutcome<E> {
    ZeroFound { x: E },
    /// `f − d` has opposite signs at `a` and `b`.
    Bracket { a: E, b: E },
    NoSignChange,
}

pub const DEFAULT_BISECTION_STEPS: usize = 64;

/// Bisection by exact midpoints for a sign change of `f(x) − d` on `[a, b]`.
pub fn sign_change_bracket<M: Ovsa>(
    model: &M,
    f: &SigmaPoly,
    d: &M::Elem,
    a: &M::Elem,
    b: &M::Elem,
    iterations: usize,
) -> Result<BracketOutcome<M::Elem>> {
    if ![d, a, b].iter().all(|v| model.contains(v)) {
        return Err(Error::ModelMismatch);
    }
    if model.cmp(a, b) != Ordering::Less {
        return Err(Error::InvalidInterval);
    }
    let g = |x: &M::Elem| model.sign(&model.sub(&sp_eval_unchecked(model, f, x), d));
    let (mut lo, mut hi) = (a.clone(), b.clone());
    let (g_lo, g_hi) = (g(&lo), g(&hi));
    if g_lo == Ordering::Equal {
        return Ok(BracketOutcome::ZeroFound { x: lo });
    }
    if g_hi == Ordering::Equal {
        return Ok(BracketOutcome::ZeroFound { x: hi });
    }
    if g_lo == g_hi {
        return Ok(BracketOutcome::NoSignChange);
    }
    let half = Rational::new(1, 2);
    for _ in 0..iterations {
        let mid = model.scale(&model.add(&lo, &hi), &half);
        match g(&mid) {
            Ordering::Equal => return Ok(BracketOutcome::ZeroFound { x: mid }),
            s if s == g_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(BracketOutcome::Bracket { a: lo, b: hi })
}

/// The cut of a zero of `f(x) = d` for absolutely monotone `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCut {
    pub f: SigmaPoly,
    pub d: HahnVector,
    pub direction: Monotone,
}

pub fn cut_of_zero(f: &SigmaPoly, d: &HahnVector, model: &HahnModel) -> Result<ZeroCut> {
    model.check(d)?;
    let direction = f.classify_monotone()?.direction().ok_or(Error::NotMonotone)?;
    Ok(ZeroCut {
        f: f.clone(),
        d: d.clone(),
        direction,
    })
}

impl ZeroCut {
    /// Side of `x`; an exact solution has no side and is reported as `Solvable`.
    pub fn side(&self, model: &HahnModel, x: &HahnVector) -> Result<CutSide> {
        let v = sp_eval(model, &self.f, x)?;
        match (model.compare_unchecked(&v, &self.d), self.direction) {
            (Ordering::Equal, _) => Err(Error::Solvable(format!("x = {x}"))),
            (Ordering::Less, Monotone::Increasing) | (Ordering::Greater, Monotone::Decreasing) => {
                Ok(CutSide::Left)
            }
            _ => Ok(CutSide::Right),
        }
    }
}

/// Which case of the valuation comparison between `a` and `σ(a)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlankCase {
    /// `σ(a) ≍ a` or `a ≪ σ(a)`: the witness is `a` itself.
    Case1,
    /// `σ(a) ≪ a`: the witness is `σ^{deg}(a)`.
    Case2,
}

/// Certificate that the cut of a zero of `f(x) = d` differs from both flanks of a
/// convex subgroup: `w/k` and `k·w` lie in one Archimedean class (hence on one
/// side of each flank) but on opposite sides of the zero cut.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlankReport {
    /// `σ^{-deg}(d)` after normalizing `f` to an increasing polynomial with nonzero constant term.
    pub a: HahnVector,
    pub case: FlankCase,
    pub witness: HahnVector,
    pub k: u64,
    pub lower: HahnVector,
    pub upper: HahnVector,
    pub lower_side: CutSide,
    pub upper_side: CutSide,
    pub right_flank_sides: (CutSide, CutSide),
    pub left_flank_sides: (CutSide, CutSide),
}

impl FlankReport {
    pub fn separates(&self) -> bool {
        self.lower_side != self.upper_side
            && self.right_flank_sides.0 == self.right_flank_sides.1
            && self.left_flank_sides.0 == self.left_flank_sides.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FlankCheck {
    Separated(FlankReport),
    KBoundExceeded {
        a: HahnVector,
        case: FlankCase,
        bound: u64,
    },
}

pub const DEFAULT_K_BOUND: u64 = 1 << 16;
pub const DEFAULT_SOLVE_CAP: usize = 64;

/// Checks on one instance that the cut of a zero of `f(x) = d` is not a flank of `subgroup`.
pub fn check_not_flanking_subgroup(
    f: &SigmaPoly,
    d: &HahnVector,
    model: &HahnModel,
    subgroup: &ConvexSubgroup,
    k_bound: u64,
) -> Result<FlankCheck> {
    let cut = cut_of_zero(f, d, model)?;
    if let SolveOutcome::Solved { x } = solve_exact(f, d, model, DEFAULT_SOLVE_CAP)? {
        return Err(Error::Solvable(format!("x = {x}")));
    }
    if d.is_zero() {
        return Err(Error::Solvable("x = 0".into()));
    }
    let (f_inc, d_inc) = match cut.direction {
        Monotone::Increasing => (f.clone(), d.clone()),
        Monotone::Decreasing => (f.neg(), d.neg()),
    };
    let shift = f_inc.order().unwrap();
    let f0 = f_inc.shifted(-shift);
    let d0 = model.sigma_unchecked(&d_inc, -shift);
    let deg = f0.degree().unwrap();
    let a = model.sigma_unchecked(&d0, -deg);
    let sa = model.sigma_unchecked(&a, 1);
    let case = if model.rel_much_smaller(&sa, &a)? {
        FlankCase::Case2
    } else {
        FlankCase::Case1
    };
    let w = match case {
        FlankCase::Case1 => a.clone(),
        FlankCase::Case2 => d0.clone(),
    };
    let fw = sp_eval_unchecked(model, &f0, &w);
    let straddles = |k: u64| {
        let kq = Rational::from_int(k as i64);
        let lo = model.compare_unchecked(&fw.scale(&kq.recip()), &d0);
        let hi = model.compare_unchecked(&fw.scale(&kq), &d0);
        lo != Ordering::Equal && hi != Ordering::Equal && lo != hi
    };
    // straddling is monotone in k, so double until it holds and then bisect down
    let mut hi = 1u64;
    while !straddles(hi) {
        if hi >= k_bound {
            return Ok(FlankCheck::KBoundExceeded {
                a,
                case,
                bound: k_bound,
            });
        }
        hi = (hi * 2).min(k_bound);
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if straddles(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = hi;
    let kq = Rational::from_int(k as i64);
    let lower = w.scale(&kq.recip());
    let upper = w.scale(&kq);
    let side = |x: &HahnVector| cut.side(model, x);
    let flank = |fl: Flank| {
        (
            subgroup.flank_side(model, fl, &lower),
            subgroup.flank_side(model, fl, &upper),
        )
    };
    Ok(FlankCheck::Separated(FlankReport {
        lower_side: side(&lower)?,
        upper_side: side(&upper)?,
        right_flank_sides: flank(Flank::Right),
        left_flank_sides: flank(Flank::Left),
        a,
        case,
        witness: w,
        k,
        lower,
        upper,
    }))
}

/// A point whose image under `f` exceeds a bound, possibly in an extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageWitness {
    pub model: HahnModel,
    /// The bound, re-indexed into `model` when an extension was needed.
    pub bound: HahnVector,
    pub x: HahnVector,
    pub extended: bool,
}

/// Finds `x` with `f(x) > bound`, by scaling a basis vector when possible and
/// otherwise after adjoining a shift orbit above the model.
pub fn unbounded_image_witness(
    f: &SigmaPoly,
    model: &HahnModel,
    bound: &HahnVector,
) -> Result<ImageWitness> {
    if f.is_zero() {
        return Err(Error::ZeroSigmaPoly);
    }
    model.check(bound)?;
    if let Some(x) = scaled_witness(f, model, bound) {
        return Ok(ImageWitness {
            model: model.clone(),
            bound: bound.clone(),
            x,
            extended: false,
        });
    }
    let (ext, _) = adjoin_shift_orbit(model);
    let lifted = bound.under(&[Side::Right]);
    let x = scaled_witness(f, &ext, &lifted)
        .expect("the adjoined orbit dominates every old vector");
    Ok(ImageWitness {
        model: ext,
        bound: lifted,
        x,
        extended: true,
    })
}

fn scaled_witness(f: &SigmaPoly, model: &HahnModel, bound: &HahnVector) -> Option<HahnVector> {
    if model.sign(bound) == Ordering::Less {
        return Some(HahnVector::zero());
    }
    let mut candidates: Vec<Index> = model.order().origin().into_iter().collect();
    if let Some((vb, _)) = model.leading(bound) {
        candidates.extend(
            f.exponents()
                .map(|k| model.tau().apply_power_unchecked(vb, -k)),
        );
    }
    for j in candidates {
        let u = sp_eval_unchecked(model, f, &HahnVector::basis(j.clone()));
        let Some((vu, lu)) = model.leading(&u) else {
            continue;
        };
        let beta = match model.leading(bound) {
            None => Rational::from_int(lu.sign() as i64),
            Some((vb, lb)) => match model.order().compare_unchecked(vu, vb) {
                Ordering::Less => Rational::from_int(lu.sign() as i64),
                Ordering::Equal => {
                    let m = Rational::from_bigint((lb.abs() / lu.abs()).floor()) + Rational::one();
                    m * Rational::from_int(lu.sign() as i64)
                }
                Ordering::Greater => continue,
            },
        };
        let x = HahnVector::term(j, beta);
        if model.compare_unchecked(&sp_eval_unchecked(model, f, &x), bound) == Ordering::Greater {
            return Some(x);
        }
    }
    None
}
