//! Exact ordered weight domains.
//!
//! Solvers for energy games only ever add, subtract and compare weights, so
//! they are written against [`GroupWeight`]. The discounted solver also needs
//! to scale by the discount factor and works on [`Rational`] directly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Builds a rational from machine integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integral rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// An element of a totally ordered abelian group.
///
/// Implementations must keep the order compatible with addition:
/// `a < b` implies `a + c < b + c`.
pub trait GroupWeight: Clone + Ord + fmt::Debug + Send + Sync + 'static {
    fn identity() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;

    /// An upper bound on both `self` and `-self`.
    ///
    /// For plain numbers this is the absolute value. For lexicographic pairs
    /// it is the componentwise absolute value, which dominates the group
    /// absolute value.
    fn magnitude(&self) -> Self;

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn below_zero(&self) -> bool {
        *self < Self::identity()
    }

    fn above_zero(&self) -> bool {
        *self > Self::identity()
    }
}

impl GroupWeight for Rational {
    fn identity() -> Self {
        Zero::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn is_identity(&self) -> bool {
        Zero::is_zero(self)
    }
    fn below_zero(&self) -> bool {
        Signed::is_negative(self)
    }
    fn above_zero(&self) -> bool {
        Signed::is_positive(self)
    }
}

/// Machine integers as an exact group. Overflow is a bug and panics.
impl GroupWeight for i64 {
    fn identity() -> Self {
        0
    }
    fn plus(&self, other: &Self) -> Self {
        self.checked_add(*other).expect("i64 weight overflow")
    }
    fn minus(&self, other: &Self) -> Self {
        self.checked_sub(*other).expect("i64 weight overflow")
    }
    fn negated(&self) -> Self {
        self.checked_neg().expect("i64 weight overflow")
    }
    fn magnitude(&self) -> Self {
        self.checked_abs().expect("i64 weight overflow")
    }
}

/// `base + rho * ρ` for a formal infinitesimal `ρ > 0`, ordered
/// lexicographically. Only addition and comparison are defined.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexWeight<T = Rational> {
    pub base: T,
    pub rho: T,
}

impl<T> LexWeight<T> {
    pub fn new(base: T, rho: T) -> Self {
        Self { base, rho }
    }
}

impl<T: GroupWeight> LexWeight<T> {
    /// Embeds a plain weight with a zero perturbation coefficient.
    pub fn lift(base: T) -> Self {
        Self { base, rho: T::identity() }
    }
}

impl<T: Ord> PartialOrd for LexWeight<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> Ord for LexWeight<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then_with(|| self.rho.cmp(&other.rho))
    }
}

impl<T: GroupWeight> GroupWeight for LexWeight<T> {
    fn identity() -> Self {
        Self { base: T::identity(), rho: T::identity() }
    }
    fn plus(&self, other: &Self) -> Self {
        Self { base: self.base.plus(&other.base), rho: self.rho.plus(&other.rho) }
    }
    fn minus(&self, other: &Self) -> Self {
        Self { base: self.base.minus(&other.base), rho: self.rho.minus(&other.rho) }
    }
    fn negated(&self) -> Self {
        Self { base: self.base.negated(), rho: self.rho.negated() }
    }
    fn magnitude(&self) -> Self {
        Self { base: self.base.magnitude(), rho: self.rho.magnitude() }
    }
}

impl<T: fmt::Display> fmt::Display for LexWeight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}ρ)", self.base, self.rho)
    }
}

/// A weight as it appears in a [`GameSpec`](crate::game::GameSpec).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WeightValue {
    Rational(Rational),
    Lex(LexWeight),
}

impl WeightValue {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            WeightValue::Rational(r) => Some(r),
            WeightValue::Lex(_) => None,
        }
    }

    /// The weight viewed in the lexicographic group; rationals get `ρ`
    /// coefficient zero.
    pub fn to_lex(&self) -> LexWeight {
        match self {
            WeightValue::Rational(r) => LexWeight::lift(r.clone()),
            WeightValue::Lex(l) => l.clone(),
        }
    }

    pub fn is_lex(&self) -> bool {
        matches!(self, WeightValue::Lex(_))
    }
}

impl From<Rational> for WeightValue {
    fn from(r: Rational) -> Self {
        WeightValue::Rational(r)
    }
}

impl From<LexWeight> for WeightValue {
    fn from(l: LexWeight) -> Self {
        WeightValue::Lex(l)
    }
}

impl fmt::Display for WeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightValue::Rational(r) => write!(f, "{r}"),
            WeightValue::Lex(l) => write!(f, "{l}"),
        }
    }
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..12).prop_map(|(n, d)| rat(n, d))
    }

    fn small_lex() -> impl Strategy<Value = LexWeight> {
        (small_rat(), small_rat()).prop_map(|(b, r)| LexWeight::new(b, r))
    }

    #[test]
    fn rationals_are_reduced() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn lex_order_is_lexicographic() {
        let a = LexWeight::new(int(0), int(1));
        let b = LexWeight::new(int(1), int(-5));
        assert!(a < b);
        assert!(LexWeight::new(int(-1), int(1)) < LexWeight::identity());
        assert!(LexWeight::new(int(0), int(2)) > LexWeight::identity());
    }

    #[test]
    fn lex_magnitude_is_componentwise() {
        let w = LexWeight::new(int(-2), int(1));
        assert_eq!(w.magnitude(), LexWeight::new(int(2), int(1)));
    }

    proptest! {
        #[test]
        fn rational_add_sub_roundtrip(a in small_rat(), b in small_rat()) {
            prop_assert_eq!(a.plus(&b).minus(&b), a);
        }

        #[test]
        fn lex_order_compatible_with_addition(a in small_lex(), b in small_lex(), c in small_lex()) {
            if a < b {
                prop_assert!(a.plus(&c) < b.plus(&c));
            }
            prop_assert_eq!(a.plus(&c).minus(&c), a.clone());
            prop_assert!(a.magnitude() >= a && a.magnitude() >= a.negated());
        }
    }
}
