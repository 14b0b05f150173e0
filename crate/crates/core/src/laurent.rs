//! Exact Laurent polynomials in a formal variable with half-integer exponents.
//!
//! Elements are finite sums `sum_k c_k v^k` with `c_k` rational and
//! `k in (1/2)Z`. Exponents are stored doubled so that all arithmetic is
//! integer arithmetic. The same ring serves as coefficients in `q^{1/2}`
//! for Hecke-side quantities and as the `t`-coefficient ring of the
//! symmetric-function oracles.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `sum c_k v^k`, `k` a half-integer. Keys of `terms` are `2k`.
/// Invariant: no stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct HalfLaurent {
    terms: BTreeMap<i64, BigRational>,
}

impl HalfLaurent {
    pub fn zero() -> Self {
        HalfLaurent::default()
    }

    pub fn one() -> Self {
        HalfLaurent::monomial_doubled(0, BigRational::one())
    }

    /// `c * v^(double/2)`.
    pub fn monomial_doubled(double: i64, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(double, c);
        }
        HalfLaurent { terms }
    }

    /// `c * v^k` with integer exponent `k`.
    pub fn monomial_int(k: i64, c: BigRational) -> Self {
        Self::monomial_doubled(2 * k, c)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial_doubled(0, c)
    }

    pub fn from_i64(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term_doubled(&mut self, double: i64, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(double).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&double);
        }
    }

    pub fn add_assign(&mut self, other: &HalfLaurent) {
        for (k, c) in &other.terms {
            self.add_term_doubled(*k, c);
        }
    }

    pub fn sub_assign(&mut self, other: &HalfLaurent) {
        for (k, c) in &other.terms {
            self.add_term_doubled(*k, &(-c.clone()));
        }
    }

    pub fn add(&self, other: &HalfLaurent) -> HalfLaurent {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn sub(&self, other: &HalfLaurent) -> HalfLaurent {
        let mut r = self.clone();
        r.sub_assign(other);
        r
    }

    pub fn neg(&self) -> HalfLaurent {
        let mut r = HalfLaurent::zero();
        for (k, c) in &self.terms {
            r.terms.insert(*k, -c.clone());
        }
        r
    }

    pub fn mul(&self, other: &HalfLaurent) -> HalfLaurent {
        let mut r = HalfLaurent::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                r.add_term_doubled(ka + kb, &(ca * cb));
            }
        }
        r
    }

    pub fn scale(&self, c: &BigRational) -> HalfLaurent {
        if c.is_zero() {
            return HalfLaurent::zero();
        }
        let mut r = HalfLaurent::zero();
        for (k, v) in &self.terms {
            r.terms.insert(*k, v * c);
        }
        r
    }

    /// Multiply by `v^(double/2)`.
    pub fn shift_doubled(&self, double: i64) -> HalfLaurent {
        let mut r = HalfLaurent::zero();
        for (k, c) in &self.terms {
            r.terms.insert(k + double, c.clone());
        }
        r
    }

    /// Exact division by a single-term element.
    pub fn div_monomial(&self, double: i64, c: &BigRational) -> HalfLaurent {
        assert!(!c.is_zero(), "division by zero monomial");
        let mut r = HalfLaurent::zero();
        for (k, v) in &self.terms {
            r.terms.insert(k - double, v / c);
        }
        r
    }

    /// Coefficient of `v^(double/2)`.
    pub fn coeff_doubled(&self, double: i64) -> BigRational {
        self.terms.get(&double).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Constant coefficient (exponent 0).
    pub fn constant_term(&self) -> BigRational {
        self.coeff_doubled(0)
    }

    /// Doubled exponents in increasing order with their coefficients.
    pub fn iter_doubled(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn min_doubled_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_doubled_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// True when every exponent is an integer (all doubled keys even).
    pub fn has_integer_exponents(&self) -> bool {
        self.terms.keys().all(|k| k % 2 == 0)
    }

    /// Substitute `v = t^2`. Used to pass between the `q`- and
    /// `q^{1/2}`-graded pictures.
    pub fn substitute_square(&self) -> HalfLaurent {
        let mut r = HalfLaurent::zero();
        for (k, c) in &self.terms {
            r.terms.insert(2 * k, c.clone());
        }
        r
    }

    /// Exact evaluation at a rational point. Fails when a genuine
    /// half-integer power is present.
    pub fn eval_rational(&self, v: &BigRational) -> Result<BigRational> {
        if !self.has_integer_exponents() {
            return Err(Error::Invalid(
                "half-integer exponent present; use eval_sqrt".into(),
            ));
        }
        let mut acc = BigRational::zero();
        for (k, c) in &self.terms {
            acc += c * rational_pow(v, k / 2);
        }
        Ok(acc)
    }

    /// Exact evaluation at `v` with `v^{1/2}` kept as a formal square root:
    /// returns `(a, b)` with value `a + b*sqrt(v)`.
    pub fn eval_sqrt(&self, v: &BigRational) -> (BigRational, BigRational) {
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        for (k, c) in &self.terms {
            let q = k.div_euclid(2);
            if k % 2 == 0 {
                a += c * rational_pow(v, q);
            } else {
                b += c * rational_pow(v, q);
            }
        }
        (a, b)
    }

    /// Floating-point evaluation (`v > 0`).
    pub fn eval_f64(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for (k, c) in &self.terms {
            acc += c.to_f64().unwrap_or(f64::NAN) * v.powf(*k as f64 / 2.0);
        }
        acc
    }

    /// |value| at rational `v > 0`, exact, as a comparison against a rational
    /// bound: returns true iff |self(v)| <= bound.
    pub fn abs_at_most(&self, v: &BigRational, bound: &BigRational) -> bool {
        let (a, b) = self.eval_sqrt(v);
        // |a + b sqrt(v)| <= bound  <=>  bound - (a+b sqrt v) >= 0 and bound + (a+b sqrt v) >= 0
        quad_nonneg(&(bound - &a), &-b.clone(), v) && quad_nonneg(&(bound + &a), &b, v)
    }
}

/// Sign test for `r + s*sqrt(v)` with `v > 0` rational: true iff >= 0.
fn quad_nonneg(r: &BigRational, s: &BigRational, v: &BigRational) -> bool {
    if s.is_zero() {
        return !r.is_negative();
    }
    if r.is_zero() {
        return !s.is_negative();
    }
    let r_pos = r.is_positive();
    let s_pos = s.is_positive();
    match (r_pos, s_pos) {
        (true, true) => true,
        (false, false) => false,
        (true, false) => r * r >= s * s * v,
        (false, true) => s * s * v >= r * r,
    }
}

pub fn rational_pow(v: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let base = if e > 0 { v.clone() } else { v.recip() };
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &base;
    }
    acc
}

impl fmt::Debug for HalfLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *k == 0 {
                write!(f, "{}", c)?;
            } else if k % 2 == 0 {
                write!(f, "({})*q^{}", c, k / 2)?;
            } else {
                write!(f, "({})*q^({}/2)", c, k)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ring_ops_are_exact() {
        // (q^{1/2} + 1)(q^{1/2} - 1) = q - 1
        let a = HalfLaurent::monomial_doubled(1, rat(1, 1)).add(&HalfLaurent::one());
        let b = HalfLaurent::monomial_doubled(1, rat(1, 1)).sub(&HalfLaurent::one());
        let p = a.mul(&b);
        let expect = HalfLaurent::monomial_int(1, rat(1, 1)).sub(&HalfLaurent::one());
        assert_eq!(p, expect);
    }

    #[test]
    fn eval_sqrt_splits_parity() {
        // 3*q^{-1/2} + 2*q at q = 4: 3/2 + 8
        let mut x = HalfLaurent::monomial_doubled(-1, rat(3, 1));
        x.add_assign(&HalfLaurent::monomial_int(1, rat(2, 1)));
        let (a, b) = x.eval_sqrt(&rat(4, 1));
        assert_eq!(a, rat(8, 1));
        assert_eq!(b, rat(3, 4)); // 3 * q^{-1} * sqrt(q) at q=4: b = 3/4, b*2 = 3/2
        assert!((x.eval_f64(4.0) - 9.5).abs() < 1e-12);
    }

    #[test]
    fn abs_bound_is_exact() {
        // q^{-1/2} at q=2 has |.| = 0.7071... <= 3/4, > 0.7
        let x = HalfLaurent::monomial_doubled(-1, rat(1, 1));
        assert!(x.abs_at_most(&rat(2, 1), &rat(3, 4)));
        assert!(!x.abs_at_most(&rat(2, 1), &rat(7, 10)));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut x = HalfLaurent::monomial_int(3, rat(5, 2));
        x.add_assign(&HalfLaurent::monomial_int(3, rat(-5, 2)));
        assert!(x.is_zero());
        assert_eq!(x.eval_rational(&BigRational::from_f64(7.0).unwrap()).unwrap(), rat(0, 1));
    }
}
