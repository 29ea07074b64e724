//! Positive quantifier-free formulas, alternation numbers, indiscernibility
//! checks and finite independence-pattern search.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amalg::OrderWithAction;
use crate::error::{Error, Result};
use crate::extend::{Element, Model};
use crate::sigmapoly::{sp_eval_unchecked, Ovsa, SigmaPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Lt,
    Gt,
    Eq,
}

impl Relation {
    pub fn holds(self, o: Ordering) -> bool {
        matches!(
            (self, o),
            (Relation::Lt, Ordering::Less) | (Relation::Gt, Ordering::Greater) | (Relation::Eq, Ordering::Equal)
        )
    }
}

/// A positive quantifier-free formula over atoms of type `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula<A> {
    Atom(A),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
    Top,
    Bottom,
}

/// A formula with its variables split as `x₀ … x_{k−1}` (the object block)
/// followed by the parameter block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QFFormula<A> {
    pub x_arity: usize,
    pub body: Formula<A>,
}

impl<A> QFFormula<A> {
    pub fn new(x_arity: usize, body: Formula<A>) -> Self {
        QFFormula { x_arity, body }
    }

    pub fn atom(x_arity: usize, atom: A) -> Self {
        QFFormula::new(x_arity, Formula::Atom(atom))
    }
}

/// A structure in which atoms of some signature can be evaluated.
pub trait Structure {
    type Elem: Clone + fmt::Debug;
    type Atom;

    fn eval_atom(&self, atom: &Self::Atom, env: &[Self::Elem]) -> Result<bool>;
}

pub fn eval_formula<S: Structure>(s: &S, f: &Formula<S::Atom>, env: &[S::Elem]) -> Result<bool> {
    Ok(match f {
        Formula::Atom(a) => s.eval_atom(a, env)?,
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::And(fs) => {
            for g in fs {
                if !eval_formula(s, g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_formula(s, g, env)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// `φ(x; y)` at `x = a`, `y = b`.
pub fn holds<S: Structure>(s: &S, phi: &QFFormula<S::Atom>, a: &[S::Elem], b: &[S::Elem]) -> Result<bool> {
    if a.len() != phi.x_arity {
        return Err(Error::NotApplicable(format!(
            "object tuple has length {}, formula expects {}",
            a.len(),
            phi.x_arity
        )));
    }
    let env: Vec<S::Elem> = a.iter().chain(b).cloned().collect();
    eval_formula(s, &phi.body, &env)
}

fn bound<T>(env: &[T], var: usize) -> Result<&T> {
    env.get(var).ok_or(Error::UnboundVariable(var))
}

/// `Σⱼ fⱼ(x_{vⱼ}) + c` over an ordered vector space with σ.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QFTerm {
    pub parts: BTreeMap<usize, SigmaPoly>,
    pub constant: Option<Element>,
}

#[derive(Serialize, Deserialize)]
struct TermPart {
    var: usize,
    poly: SigmaPoly,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    parts: Vec<TermPart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<Element>,
}

impl Serialize for QFTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TermJson {
            parts: self
                .parts
                .iter()
                .map(|(&var, poly)| TermPart { var, poly: poly.clone() })
                .collect(),
            constant: self.constant.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QFTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TermJson::deserialize(d)?;
        let mut t = QFTerm {
            parts: BTreeMap::new(),
            constant: raw.constant,
        };
        for p in raw.parts {
            t = t.add(&QFTerm::poly(p.var, p.poly));
        }
        Ok(t)
    }
}

impl QFTerm {
    pub fn var(v: usize) -> Self {
        QFTerm::poly(v, SigmaPoly::one())
    }

    pub fn poly(v: usize, f: SigmaPoly) -> Self {
        let mut parts = BTreeMap::new();
        if !f.is_zero() {
            parts.insert(v, f);
        }
        QFTerm { parts, constant: None }
    }

    pub fn constant(c: Element) -> Self {
        QFTerm {
            parts: BTreeMap::new(),
            constant: Some(c),
        }
    }

    pub fn add(&self, other: &QFTerm) -> QFTerm {
        let mut parts = self.parts.clone();
        for (v, f) in &other.parts {
            let g = parts.get(v).map_or_else(|| f.clone(), |h| h.add(f));
            if g.is_zero() {
                parts.remove(v);
            } else {
                parts.insert(*v, g);
            }
        }
        let constant = match (&self.constant, &other.constant) {
            (Some(a), Some(b)) => Some(a.add(b)),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        QFTerm { parts, constant }
    }

    pub fn neg(&self) -> QFTerm {
        QFTerm {
            parts: self.parts.iter().map(|(v, f)| (*v, f.neg())).collect(),
            constant: self.constant.as_ref().map(Element::neg),
        }
    }

    pub fn sub(&self, other: &QFTerm) -> QFTerm {
        self.add(&other.neg())
    }

    /// One more than the largest variable used.
    pub fn arity(&self) -> usize {
        self.parts.keys().next_back().map_or(0, |v| v + 1)
    }

    pub fn eval(&self, model: &Model, env: &[Element]) -> Result<Element> {
        let mut acc = match &self.constant {
            Some(c) if !model.contains(c) => return Err(Error::ModelMismatch),
            Some(c) => c.clone(),
            None => model.zero(),
        };
        for (v, f) in &self.parts {
            let x = bound(env, *v)?;
            if !model.contains(x) {
                return Err(Error::ModelMismatch);
            }
            acc = model.add(&acc, &sp_eval_unchecked(model, f, x));
        }
        Ok(acc)
    }
}

impl fmt::Display for QFTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, p) in &self.parts {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p})(x{v})")?;
        }
        if let Some(c) = &self.constant {
            write!(f, "{}{c:?}", if first { "" } else { " + " })?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `term □ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvsaAtom {
    pub term: QFTerm,
    pub rel: Relation,
}

impl OvsaAtom {
    /// `lhs □ rhs`.
    pub fn compare(lhs: QFTerm, rel: Relation, rhs: QFTerm) -> Self {
        OvsaAtom {
            term: lhs.sub(&rhs),
            rel,
        }
    }
}

impl Structure for Model {
    type Elem = Element;
    type Atom = OvsaAtom;

    fn eval_atom(&self, atom: &OvsaAtom, env: &[Element]) -> Result<bool> {
        let v = atom.term.eval(self, env)?;
        Ok(atom.rel.holds(self.sign(&v)))
    }
}

/// One letter of a group word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    #[serde(default)]
    pub inverse: bool,
}

/// `g·x` for a word `g = w₁⋯w_k`, acting right to left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GTerm {
    pub var: usize,
    #[serde(default)]
    pub word: Vec<Letter>,
}

impl GTerm {
    pub fn var(var: usize) -> Self {
        GTerm { var, word: Vec::new() }
    }
}

/// `g·x □ h·y` in a linear order with a group action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderAtom {
    pub left: GTerm,
    pub rel: Relation,
    pub right: GTerm,
}

impl OrderWithAction {
    fn act(&self, t: &GTerm, env: &[String]) -> Result<String> {
        let mut p = bound(env, t.var)?.clone();
        if !self.contains(&p) {
            return Err(Error::NotApplicable(format!("{p} is not a point of the order")));
        }
        for l in t.word.iter().rev() {
            if l.gen >= self.generators.len() {
                return Err(Error::NotApplicable(format!("no generator {}", l.gen)));
            }
            p = if l.inverse {
                let g = &self.generators[l.gen];
                g.iter().find(|(_, img)| **img == p).map(|(src, _)| src.clone()).unwrap()
            } else {
                self.generators[l.gen][&p].clone()
            };
        }
        Ok(p)
    }
}

impl Structure for OrderWithAction {
    type Elem = String;
    type Atom = OrderAtom;

    fn eval_atom(&self, atom: &OrderAtom, env: &[String]) -> Result<bool> {
        let (l, r) = (self.act(&atom.left, env)?, self.act(&atom.right, env)?);
        Ok(atom.rel.holds(self.compare(&l, &r).unwrap()))
    }
}

/// Alternation of `φ`/`ψ` along a sequence against a fixed parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Alternation {
    /// Longest `φ, ψ, φ, …` subsequence has `n + 1` terms.
    Count(usize),
    /// No position satisfies `φ`; counts as 0.
    NoAlternation,
}

impl Alternation {
    pub fn value(self) -> usize {
        match self {
            Alternation::Count(n) => n,
            Alternation::NoAlternation => 0,
        }
    }
}

/// The largest `n` with `i₀ < … < iₙ`, `φ` at even and `ψ` at odd `j`.
/// Fails if some position satisfies both formulas.
pub fn alt_count<S: Structure>(
    s: &S,
    phi: &QFFormula<S::Atom>,
    psi: &QFFormula<S::Atom>,
    seq: &[Vec<S::Elem>],
    b: &[S::Elem],
) -> Result<Alternation> {
    let mut len = 0usize;
    for (i, a) in seq.iter().enumerate() {
        let (p, q) = (holds(s, phi, a, b)?, holds(s, psi, a, b)?);
        if p && q {
            return Err(Error::DisjointnessViolated(i));
        }
        let want_phi = len % 2 == 0;
        if (want_phi && p) || (!want_phi && q) {
            len += 1;
        }
    }
    Ok(if len == 0 {
        Alternation::NoAlternation
    } else {
        Alternation::Count(len - 1)
    })
}

/// Two increasing index tuples on which an atom changes truth value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndiscernibilityFailure {
    pub term: QFTerm,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    /// Signs of the term as −1, 0 or 1.
    pub first_sign: i8,
    pub second_sign: i8,
}

/// Checks that every term of the bank has the same sign on all increasing
/// index tuples of its arity (up to `max_arity`); then every atom `t □ 0`
/// has order-invariant truth value.
pub fn is_qf_indiscernible(
    model: &Model,
    seq: &[Element],
    max_arity: usize,
    bank: &[QFTerm],
) -> Result<Option<IndiscernibilityFailure>> {
    for term in bank {
        let k = term.arity();
        if k > max_arity || k > seq.len() {
            continue;
        }
        let mut reference: Option<(Vec<usize>, Ordering)> = None;
        let mut tuple: Vec<usize> = (0..k).collect();
        loop {
            let env: Vec<Element> = tuple.iter().map(|&i| seq[i].clone()).collect();
            let sign = model.sign(&term.eval(model, &env)?);
            match &reference {
                None => reference = Some((tuple.clone(), sign)),
                Some((t0, s0)) if *s0 != sign => {
                    return Ok(Some(IndiscernibilityFailure {
                        term: term.clone(),
                        first: t0.clone(),
                        second: tuple,
                        first_sign: *s0 as i8,
                        second_sign: sign as i8,
                    }));
                }
                Some(_) => {}
            }
            if !next_increasing(&mut tuple, seq.len()) {
                break;
            }
        }
    }
    Ok(None)
}

/// Advances to the next increasing tuple over `0..n` in lexicographic order.
fn next_increasing(t: &mut [usize], n: usize) -> bool {
    let k = t.len();
    for i in (0..k).rev() {
        if t[i] < n - (k - i) {
            t[i] += 1;
            for j in i + 1..k {
                t[j] = t[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The default term bank: `x₀`, `x₀ − x₁`, `σ(x₀) − x₀`, `x₀ − σ(x₁)`,
/// `x₀ + x₁`, `x₀ − 2x₁` and `x₀ − x₁ − x₂`.
pub fn default_term_bank() -> Vec<QFTerm> {
    let x = QFTerm::var;
    let s = |v| QFTerm::poly(v, SigmaPoly::sigma(1));
    let two = |v| QFTerm::poly(v, SigmaPoly::from_ints(&[2]));
    vec![
        x(0),
        x(0).sub(&x(1)),
        s(0).sub(&x(0)),
        x(0).sub(&s(1)),
        x(0).add(&x(1)),
        x(0).sub(&two(1)),
        x(0).sub(&x(1)).sub(&x(2)),
    ]
}

/// A realized independence pattern: `a[i]` indexes the object pool and
/// `b[W]` the parameter pool, for every subset `W ⊆ n` given as a bit mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IpSearch {
    Found { a: Vec<usize>, b: Vec<usize> },
    NotFound,
}

impl IpSearch {
    pub fn is_found(&self) -> bool {
        matches!(self, IpSearch::Found { .. })
    }
}

/// Exhaustive search for `(aᵢ)_{i<n}` and `(b_W)_{W⊆n}` with `φ(aᵢ; b_W)`
/// for `i ∈ W` and `ψ(aᵢ; b_W)` for `i ∉ W`.
pub fn ip_pattern_search<S: Structure>(
    s: &S,
    phi: &QFFormula<S::Atom>,
    psi: &QFFormula<S::Atom>,
    n: usize,
    a_pool: &[Vec<S::Elem>],
    b_pool: &[Vec<S::Elem>],
) -> Result<IpSearch> {
    // table[a][b]: Some(true) for φ, Some(false) for ψ, None for neither
    let mut table = vec![vec![None; b_pool.len()]; a_pool.len()];
    for (i, a) in a_pool.iter().enumerate() {
        for (j, b) in b_pool.iter().enumerate() {
            let (p, q) = (holds(s, phi, a, b)?, holds(s, psi, a, b)?);
            if p && q {
                return Err(Error::DisjointnessViolated(i));
            }
            table[i][j] = if p { Some(true) } else if q { Some(false) } else { None };
        }
    }
    if a_pool.is_empty() && n > 0 {
        return Ok(IpSearch::NotFound);
    }
    let mut choice = vec![0usize; n];
    loop {
        let mut witnesses = Vec::with_capacity(1 << n);
        for w in 0..(1usize << n) {
            let found = (0..b_pool.len()).find(|&j| {
                (0..n).all(|i| table[choice[i]][j] == Some(w >> i & 1 == 1))
            });
            match found {
                Some(j) => witnesses.push(j),
                None => break,
            }
        }
        if witnesses.len() == 1 << n {
            return Ok(IpSearch::Found {
                a: choice,
                b: witnesses,
            });
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(IpSearch::NotFound);
            }
            choice[pos] += 1;
            if choice[pos] < a_pool.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
