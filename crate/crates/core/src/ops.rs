//! Bosonic ladder-operator words, polynomials over them, and symbolic normal
//! ordering under `[a_j, a_k†] = δ_jk`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Real;

/// A single creation or annihilation operator on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub const fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub const fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub const fn adjoint(self) -> Self {
        Self { mode: self.mode, dagger: !self.dagger }
    }

    // Creation operators sort first, then by mode.
    fn order_key(self) -> (bool, usize) {
        (!self.dagger, self.mode)
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a{}†", self.mode)
        } else {
            write!(f, "a{}", self.mode)
        }
    }
}

/// An ordered product of ladder operators, read left to right as written.
/// The rightmost operator acts first on a ket.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<Ladder>);

impl Monomial {
    pub fn new(ops: impl IntoIterator<Item = Ladder>) -> Self {
        Self(ops.into_iter().collect())
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// `a_mode† a_mode`.
    pub fn number(mode: usize) -> Self {
        Self(vec![Ladder::create(mode), Ladder::annihilate(mode)])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn ops(&self) -> &[Ladder] {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.adjoint()).collect())
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.0.iter().map(|l| l.mode).max()
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0].order_key() <= w[1].order_key())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Normal-ordered expansion of a word: canonical words with integer weights.
pub type NormalForm = BTreeMap<Monomial, i64>;

/// Cache for [`normal_order_with`]. Local to the caller; nothing is shared
/// across threads.
pub type NormalOrderMemo = HashMap<Vec<Ladder>, NormalForm>;

/// Rewrites an operator word as a sum of canonical normal-ordered words
/// (creators left, annihilators right, each group sorted by mode).
pub fn normal_order(word: &[Ladder]) -> NormalForm {
    normal_order_with(word, &mut HashMap::new())
}

pub fn normal_order_with(word: &[Ladder], memo: &mut NormalOrderMemo) -> NormalForm {
    if let Some(hit) = memo.get(word) {
        return hit.clone();
    }
    let swap_at = word
        .windows(2)
        .position(|w| w[0].order_key() > w[1].order_key());
    let result = match swap_at {
        None => BTreeMap::from([(Monomial(word.to_vec()), 1)]),
        Some(i) => {
            let (x, y) = (word[i], word[i + 1]);
            let mut swapped = word.to_vec();
            swapped.swap(i, i + 1);
            let mut out = normal_order_with(&swapped, memo);
            // a_k a_k† = a_k† a_k + 1
            if !x.dagger && y.dagger && x.mode == y.mode {
                let mut contracted = word[..i].to_vec();
                contracted.extend_from_slice(&word[i + 2..]);
                for (w, c) in normal_order_with(&contracted, memo) {
                    *out.entry(w).or_insert(0) += c;
                }
                out.retain(|_, c| *c != 0);
            }
            out
        }
    };
    memo.insert(word.to_vec(), result.clone());
    result
}

/// A finite linear combination of monomials with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPoly<T: Real> {
    terms: BTreeMap<Monomial, Complex<T>>,
}

impl<T: Real> Default for OperatorPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> OperatorPoly<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::scalar(Complex::new(T::one(), T::zero()))
    }

    pub fn scalar(c: Complex<T>) -> Self {
        Self::term(c, Monomial::identity())
    }

    pub fn term(c: Complex<T>, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(c, m);
        p
    }

    pub fn ladder(l: Ladder) -> Self {
        Self::term(Complex::new(T::one(), T::zero()), Monomial(vec![l]))
    }

    pub fn create(mode: usize) -> Self {
        Self::ladder(Ladder::create(mode))
    }

    pub fn annihilate(mode: usize) -> Self {
        Self::ladder(Ladder::annihilate(mode))
    }

    pub fn number(mode: usize) -> Self {
        Self::term(Complex::new(T::one(), T::zero()), Monomial::number(mode))
    }

    pub fn add_term(&mut self, c: Complex<T>, m: Monomial) {
        let slot = self.terms.entry(m).or_default();
        *slot += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.keys().filter_map(Monomial::max_mode).max()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), *v * c)).collect() }
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(c.conj(), m.adjoint());
        }
        out
    }

    pub fn pow(&self, p: u32) -> Self {
        (0..p).fold(Self::identity(), |acc, _| &acc * self)
    }

    /// Drops terms whose coefficient magnitude is at most `tol`.
    pub fn pruned(mut self, tol: T) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Equivalent polynomial in which every word is normal ordered.
    pub fn normal_ordered(&self) -> Self {
        let mut memo = NormalOrderMemo::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (w, k) in normal_order_with(&m.0, &mut memo) {
                out.add_term(*c * T::lit(k as f64), w);
            }
        }
        out.pruned(T::zero())
    }
}

impl<T: Real> Add for &OperatorPoly<T> {
    type Output = OperatorPoly<T>;
    fn add(self, rhs: Self) -> OperatorPoly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*c, m.clone());
        }
        out
    }
}

impl<T: Real> Sub for &OperatorPoly<T> {
    type Output = OperatorPoly<T>;
    fn sub(self, rhs: Self) -> OperatorPoly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(-*c, m.clone());
        }
        out
    }
}

impl<T: Real> Mul for &OperatorPoly<T> {
    type Output = OperatorPoly<T>;
    fn mul(self, rhs: Self) -> OperatorPoly<T> {
        let mut out = OperatorPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(*ca * *cb, ma.concat(mb));
            }
        }
        out
    }
}

impl<T: Real> Neg for &OperatorPoly<T> {
    type Output = OperatorPoly<T>;
    fn neg(self) -> OperatorPoly<T> {
        self.scale_real(-T::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Real> $tr for OperatorPoly<T> {
            type Output = OperatorPoly<T>;
            fn $f(self, rhs: Self) -> OperatorPoly<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
