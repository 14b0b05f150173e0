//! Hall-Littlewood polynomials `P_lambda(x_1..x_n; t)` for GL_n, by the
//! symmetric-group summation formula. This is an independent verification
//! oracle for the Satake engine and shares none of its code paths:
//!
//! `P_lambda = (1/v_lambda(t)) sum_{w in S_n} w( x^lambda prod_{i<j} (x_i - t x_j)/(x_i - x_j) )`
//!
//! computed without rational functions by clearing the Vandermonde:
//! the alternating sum `sum_w sgn(w) w(x^lambda prod_{i<j}(x_i - t x_j))`
//! is exactly divisible by `prod_{i<j}(x_i - x_j)` and then by `v_lambda(t)`.

use std::collections::BTreeMap;

use num::{BigRational, One};

use crate::error::{Error, Result};
use crate::laurent::HalfLaurent;

/// Multivariate polynomial in x_1..x_n with coefficients in Q[t^{±1}].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct XPoly {
    pub terms: BTreeMap<Vec<i64>, HalfLaurent>,
}

impl XPoly {
    pub fn zero() -> Self {
        XPoly::default()
    }

    pub fn monomial(exp: Vec<i64>, c: HalfLaurent) -> Self {
        let mut p = XPoly::zero();
        p.add_term(exp, c);
        p
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: HalfLaurent) {
        if c.is_zero() {
            return;
        }
        let drop = {
            let slot = self.terms.entry(exp.clone()).or_insert_with(HalfLaurent::zero);
            slot.add_assign(&c);
            slot.is_zero()
        };
        if drop {
            self.terms.remove(&exp);
        }
    }

    pub fn add_assign(&mut self, other: &XPoly) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn mul(&self, other: &XPoly) -> XPoly {
        let mut out = XPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact division by `x_i - x_j`; panics if not divisible.
    fn div_xi_minus_xj(&self, i: usize, j: usize) -> XPoly {
        let mut rem = self.clone();
        let mut quot = XPoly::zero();
        while !rem.is_zero() {
            // take a term of maximal x_i-degree
            let (e, c) = rem
                .terms
                .iter()
                .max_by_key(|(e, _)| (e[i], (*e).clone()))
                .map(|(e, c)| (e.clone(), c.clone()))
                .unwrap();
            assert!(e[i] > 0, "polynomial not divisible by x_{i} - x_{j}");
            let mut qe = e.clone();
            qe[i] -= 1;
            quot.add_term(qe.clone(), c.clone());
            // rem -= (x_i - x_j) * c x^qe
            let mut minus = XPoly::zero();
            let mut t1 = qe.clone();
            t1[i] += 1;
            minus.add_term(t1, c.neg());
            let mut t2 = qe;
            t2[j] += 1;
            minus.add_term(t2, c);
            rem.add_assign(&minus);
        }
        quot
    }
}

/// `[m]_t! = prod_{k=1..m} (1 + t + ... + t^{k-1})`.
fn t_factorial(m: usize) -> HalfLaurent {
    let mut acc = HalfLaurent::one();
    for k in 1..=m {
        let mut f = HalfLaurent::zero();
        for j in 0..k {
            f.add_assign(&HalfLaurent::monomial_int(j as i64, BigRational::one()));
        }
        acc = acc.mul(&f);
    }
    acc
}

/// Exact division of univariate Laurent polynomials in t.
fn t_div_exact(num: &HalfLaurent, den: &HalfLaurent) -> HalfLaurent {
    assert!(!den.is_zero());
    let mut rem = num.clone();
    let mut quot = HalfLaurent::zero();
    let (dk, dc) = {
        let k = den.max_doubled_exponent().unwrap();
        (k, den.coeff_doubled(k))
    };
    while !rem.is_zero() {
        let k = rem.max_doubled_exponent().unwrap();
        let c = rem.coeff_doubled(k);
        let q = HalfLaurent::monomial_doubled(k - dk, c / &dc);
        quot.add_assign(&q);
        rem.sub_assign(&q.mul(den));
    }
    quot
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if k == 1 {
            out.push((cur.clone(), perm_sign(cur)));
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

fn perm_sign(p: &[usize]) -> i64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1i64;
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// `P_lambda(x_1..x_n; t)` as a multivariate polynomial with t-coefficients.
/// Supported for `n <= 4`, `|lambda| <= 4`.
pub fn hall_littlewood(n: usize, lambda: &[i64], ) -> Result<XPoly> {
    if n == 0 || n > 4 {
        return Err(Error::Invalid(format!("n = {n} out of supported range 1..=4")));
    }
    let weight: i64 = lambda.iter().sum();
    if !(0..=4).contains(&weight) || lambda.iter().any(|&p| p < 0) || lambda.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Invalid(format!("lambda = {lambda:?} must be a partition of size <= 4")));
    }
    if lambda.len() > n {
        return Err(Error::Invalid("lambda has more parts than variables".into()));
    }
    let mut lam = lambda.to_vec();
    lam.resize(n, 0);

    // numerator: sum_w sgn(w) w( x^lambda prod_{i<j} (x_i - t x_j) )
    let mut numerator = XPoly::zero();
    let t = HalfLaurent::monomial_int(1, BigRational::one());
    for (perm, sign) in permutations(n) {
        // build w(x^lambda * prod)
        let mut term = XPoly::monomial(
            {
                let mut e = vec![0i64; n];
                for (i, l) in lam.iter().enumerate() {
                    e[perm[i]] = *l;
                }
                e
            },
            HalfLaurent::from_i64(sign),
        );
        for i in 0..n {
            for j in (i + 1)..n {
                // w(x_i - t x_j) = x_{perm(i)} - t x_{perm(j)}
                let mut f = XPoly::zero();
                let mut e1 = vec![0i64; n];
                e1[perm[i]] = 1;
                f.add_term(e1, HalfLaurent::one());
                let mut e2 = vec![0i64; n];
                e2[perm[j]] = 1;
                f.add_term(e2, t.neg());
                term = term.mul(&f);
            }
        }
        numerator.add_assign(&term);
    }

    // divide by the Vandermonde
    let mut quot = numerator;
    for i in 0..n {
        for j in (i + 1)..n {
            quot = quot.div_xi_minus_xj(i, j);
        }
    }

    // divide by v_lambda(t) = prod over part-multiplicities of [m]_t!
    let mut mult_of_part: BTreeMap<i64, usize> = BTreeMap::new();
    for p in &lam {
        *mult_of_part.entry(*p).or_insert(0) += 1;
    }
    let mut v = HalfLaurent::one();
    for m in mult_of_part.values() {
        v = v.mul(&t_factorial(*m));
    }
    let mut out = XPoly::zero();
    for (e, c) in &quot.terms {
        out.add_term(e.clone(), t_div_exact(c, &v));
    }
    Ok(out)
}

/// Specialize the t-coefficients at `t = q^{-1}` and collect coefficients of
/// dominant (sorted-decreasing) exponents: the orbit-sum expansion.
pub fn hl_orbit_sum_coeffs(p: &XPoly) -> BTreeMap<Vec<i64>, HalfLaurent> {
    let mut out = BTreeMap::new();
    for (e, c) in &p.terms {
        let mut sorted = e.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        if sorted == *e {
            let mut at_qinv = HalfLaurent::zero();
            for (dk, cc) in c.iter_doubled() {
                at_qinv.add_term_doubled(-dk, cc);
            }
            out.insert(e.clone(), at_qinv);
        }
    }
    out
}
