//! The generalized Sato-Tate measure in the split case, via the Weyl
//! integration formula: on the compact dual torus the density is
//! `(1/|W|) prod_{alpha in Phi(dual)} (1 - e^alpha)`, which is the
//! `q -> infinity` limit of the Macdonald Plancherel density.
//!
//! All moments here are computed exactly as constant terms of Laurent
//! polynomials on the (co)weight lattice; quadrature exists only as an
//! independent numeric check. Total mass is exactly 1, an identity of
//! Laurent polynomials rather than a tolerance statement.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hecke::RepSpec;
use crate::plancherel::{pairwise_sum, plancherel_moment_exact_poly, TorusGrid};
use crate::root_data::{RootDatum, Weight};

/// Laurent polynomial on the ambient lattice: finitely many integer
/// exponent vectors with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LatticePoly {
    pub terms: BTreeMap<Vec<i64>, BigRational>,
}

impl LatticePoly {
    pub fn zero() -> Self {
        LatticePoly::default()
    }

    pub fn one(dim: usize) -> Self {
        LatticePoly::monomial(vec![0; dim], BigRational::one())
    }

    pub fn monomial(exp: Vec<i64>, c: BigRational) -> Self {
        let mut p = LatticePoly::zero();
        p.add_term(exp, c);
        p
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let drop = {
            let slot = self.terms.entry(exp.clone()).or_insert_with(BigRational::zero);
            *slot += c;
            slot.is_zero()
        };
        if drop {
            self.terms.remove(&exp);
        }
    }

    pub fn add_assign(&mut self, other: &LatticePoly) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn mul(&self, other: &LatticePoly) -> LatticePoly {
        let mut out = LatticePoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> LatticePoly {
        let mut out = LatticePoly::zero();
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, k: u32, dim: usize) -> LatticePoly {
        let mut acc = LatticePoly::one(dim);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .iter()
            .find(|(e, _)| e.iter().all(|x| *x == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }
}

fn weight_to_exp(w: &Weight) -> Result<Vec<i64>> {
    w.to_i64().ok_or_else(|| Error::Invalid("weight is not integral".into()))
}

/// `prod_{alpha in Phi} (1 - e^alpha)` over all roots, divided by |W|.
pub fn st_density_poly(dual: &RootDatum) -> Result<LatticePoly> {
    let dim = dual.ambient_dim;
    let mut acc = LatticePoly::one(dim);
    for alpha in &dual.positive_roots {
        for a in [alpha.clone(), alpha.neg()] {
            let mut f = LatticePoly::one(dim);
            f.add_term(weight_to_exp(&a)?, -BigRational::one());
            acc = acc.mul(&f);
        }
    }
    let order = BigRational::from_integer(BigInt::from(dual.weyl_elements.len() as i64));
    Ok(acc.scale(&order.recip()))
}

/// Trace of the representation as a lattice Laurent polynomial, with the
/// exponents scaled by `nu` (the nu-th power-sum pushforward).
pub fn trace_poly(dual: &RootDatum, r: &RepSpec, nu: i64) -> Result<LatticePoly> {
    let mut p = LatticePoly::zero();
    for (mu, m) in r.weights(dual)? {
        p.add_term(weight_to_exp(&mu.scale_int(nu))?, BigRational::from_integer(BigInt::from(m)));
    }
    Ok(p)
}

/// Exact Sato-Tate moment: the constant term of the scaled trace against
/// the density. An integer for every representation.
pub fn st_moment_exact(dual: &RootDatum, r: &RepSpec, nu: u32) -> Result<BigRational> {
    let density = st_density_poly(dual)?;
    let tr = trace_poly(dual, r, nu as i64)?;
    let ct = tr.mul(&density).constant_term();
    debug_assert!(ct.is_integer());
    Ok(ct)
}

/// Exact total mass: the constant term of the density. Since the negative
/// half of the root product is the reflection of the positive half, the
/// constant term of the full product is the coefficient self-convolution
/// `sum_kappa c_kappa^2` of the positive-only product, which avoids
/// expanding the square for the larger type-A data.
pub fn st_mass_exact(dual: &RootDatum) -> Result<BigRational> {
    let dim = dual.ambient_dim;
    let mut pos = LatticePoly::one(dim);
    for alpha in &dual.positive_roots {
        let mut f = LatticePoly::one(dim);
        f.add_term(weight_to_exp(alpha)?, -BigRational::one());
        pos = pos.mul(&f);
    }
    let mut acc = BigRational::zero();
    for c in pos.terms.values() {
        acc += c * c;
    }
    let order = BigRational::from_integer(BigInt::from(dual.weyl_elements.len() as i64));
    Ok(acc / order)
}

/// Quadrature analogue of `st_moment_exact` on a uniform grid.
pub fn st_moment_numeric(dual: &RootDatum, r: &RepSpec, nu: u32, grid: TorusGrid) -> Result<f64> {
    let roots: Vec<Vec<f64>> = dual
        .positive_roots
        .iter()
        .map(|a| a.0.iter().map(|c| c.to_f64().unwrap()).collect())
        .collect();
    let weights: Vec<(Vec<f64>, f64)> = r
        .weights(dual)?
        .into_iter()
        .map(|(w, m)| (w.0.iter().map(|c| c.to_f64().unwrap()).collect(), m as f64))
        .collect();
    let wsize = dual.weyl_elements.len() as f64;
    let vals: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let mut dens = 1.0;
            for alpha in &roots {
                let theta =
                    2.0 * std::f64::consts::PI * alpha.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                dens *= 2.0 - 2.0 * theta.cos();
            }
            dens /= wsize;
            let mut re = 0.0;
            let mut im = 0.0;
            for (mu, m) in &weights {
                let theta = nu as f64
                    * 2.0
                    * std::f64::consts::PI
                    * mu.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                re += m * theta.cos();
                im += m * theta.sin();
            }
            (re * dens, im * dens)
        })
        .collect();
    let re: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let n = grid.len() as f64;
    let re = pairwise_sum(&re) / n;
    let im = pairwise_sum(&im) / n;
    if im.abs() > 1e-9 {
        return Err(Error::ImaginaryResidue(im.abs()));
    }
    Ok(re)
}

/// k-th moment of the trace itself: the multiplicity of the trivial
/// representation in the k-th tensor power.
pub fn trace_power_moment_exact(dual: &RootDatum, r: &RepSpec, k: u32) -> Result<BigInt> {
    if k > 8 {
        return Err(Error::Invalid(format!("tensor power {k} out of supported range 0..=8")));
    }
    let density = st_density_poly(dual)?;
    let tr = trace_poly(dual, r, 1)?;
    let ct = tr.pow(k, dual.ambient_dim).mul(&density).constant_term();
    debug_assert!(ct.is_integer());
    Ok(ct.to_integer())
}

/// One row of the Plancherel -> Sato-Tate convergence table.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub q: f64,
    pub beta_pl: f64,
    pub beta_st: f64,
    pub abs_diff: f64,
    pub q_times_diff: f64,
}

/// For each q in ascending order, the exact Plancherel moment, the exact
/// Sato-Tate moment, their difference, and `q * |difference|`. The
/// difference is O(q^{-1}), so the last column stays bounded.
pub fn convergence_report(
    dual: &RootDatum,
    r: &RepSpec,
    nu: u32,
    q_list: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let st = st_moment_exact(dual, r, nu)?.to_f64().unwrap();
    let poly = plancherel_moment_exact_poly(dual, r, nu)?;
    let mut rows = Vec::new();
    for &q in q_list {
        let pl = poly.eval_f64(q);
        let d = (pl - st).abs();
        rows.push(ConvergenceRow { q, beta_pl: pl, beta_st: st, abs_diff: d, q_times_diff: q * d });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{build_root_datum, CartanType};

    #[test]
    fn mass_is_exactly_one() {
        for (t, n) in [
            (CartanType::A, 1),
            (CartanType::A, 2),
            (CartanType::A, 3),
            (CartanType::B, 2),
            (CartanType::B, 3),
            (CartanType::C, 2),
            (CartanType::D, 2),
            (CartanType::D, 3),
        ] {
            let d = build_root_datum(t, n).unwrap();
            assert!(st_mass_exact(&d).unwrap().is_one(), "{t:?}{n}");
        }
    }

    #[test]
    fn trivial_rep_has_all_moments_one() {
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let r = RepSpec::trivial(&b2);
        for nu in 1..=3 {
            assert!(st_moment_exact(&b2, &r, nu).unwrap().is_one());
        }
    }

    #[test]
    fn sl2_standard_second_moment() {
        // SL2 standard (rank-1 symplectic datum: weights +-1, roots +-2):
        // CT[(x^2 + x^{-2}) * (1/2)(2 - x^2 - x^{-2})] = -1
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        let r = RepSpec::std(&c1);
        let m2 = st_moment_exact(&c1, &r, 2).unwrap();
        assert_eq!(m2, BigRational::from_integer(BigInt::from(-1)));
        let m1 = st_moment_exact(&c1, &r, 1).unwrap();
        assert!(m1.is_zero());
        // the GL2-flavored standard is not self-dual: its second moment
        // vanishes by central character
        let a1 = build_root_datum(CartanType::A, 1).unwrap();
        assert!(st_moment_exact(&a1, &RepSpec::std(&a1), 2).unwrap().is_zero());
    }

    #[test]
    fn b2_standard_first_moment_vanishes() {
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let r = RepSpec::std(&b2);
        assert!(st_moment_exact(&b2, &r, 1).unwrap().is_zero());
    }

    #[test]
    fn numeric_matches_exact() {
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        let r = RepSpec::std(&c1);
        let n = st_moment_numeric(&c1, &r, 2, TorusGrid::new(1, 64)).unwrap();
        assert!((n - (-1.0)).abs() < 1e-9, "{n}");
        let t = RepSpec::trivial(&c1);
        let n = st_moment_numeric(&c1, &t, 1, TorusGrid::new(1, 32)).unwrap();
        assert!((n - 1.0).abs() < 1e-9);
    }

    #[test]
    fn su2_catalan_moments() {
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        let r = RepSpec::std(&c1);
        assert_eq!(trace_power_moment_exact(&c1, &r, 0).unwrap(), BigInt::from(1));
        assert_eq!(trace_power_moment_exact(&c1, &r, 2).unwrap(), BigInt::from(1));
        assert_eq!(trace_power_moment_exact(&c1, &r, 4).unwrap(), BigInt::from(2));
        assert_eq!(trace_power_moment_exact(&c1, &r, 6).unwrap(), BigInt::from(5));
        assert!(trace_power_moment_exact(&c1, &r, 9).is_err());
    }

    #[test]
    fn b2_std_tensor_square_contains_trivial_once() {
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let r = RepSpec::std(&b2);
        assert_eq!(trace_power_moment_exact(&b2, &r, 2).unwrap(), BigInt::from(1));
    }

    #[test]
    fn sl2_char_square_pairing() {
        // chi x chi = chi_(2) + chi_0 contains the trivial exactly once:
        // E[chi^2] = 1 under the Sato-Tate measure.
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        let r = RepSpec::std(&c1);
        assert_eq!(trace_power_moment_exact(&c1, &r, 2).unwrap(), BigInt::from(1));
    }

    #[test]
    fn convergence_rows_decrease_for_builtins() {
        for (t, n) in [(CartanType::B, 2), (CartanType::C, 2), (CartanType::D, 3)] {
            let d = build_root_datum(t, n).unwrap();
            let r = RepSpec::std(&d);
            for nu in 1..=2 {
                let rows = convergence_report(&d, &r, nu, &[2.0, 3.0, 5.0, 25.0, 121.0]).unwrap();
                for w in rows.windows(2) {
                    assert!(
                        w[1].abs_diff <= w[0].abs_diff + 1e-15,
                        "{t:?}{n} nu={nu}: {} then {}",
                        w[0].abs_diff,
                        w[1].abs_diff
                    );
                }
                let bound = rows.iter().map(|r| r.q_times_diff).fold(0.0, f64::max);
                assert!(bound <= (2 * n + 2) as f64, "q*diff bounded, got {bound}");
            }
        }
    }
}
