//! The exact Satake transform between the unramified Hecke algebra in the
//! double-coset basis `tau_lambda` and Weyl-invariant functions on the dual
//! torus in the orbit-sum and character bases.
//!
//! All combinatorics are driven by the root datum of the dual group, whose
//! weight lattice is the cocharacter lattice of the p-adic group. Writing
//! `rho` for the half-sum of the dual datum's positive roots and `rho_check`
//! for the half-sum of its positive coroots, the inverse transform of an
//! irreducible character is
//!
//! `S^{-1}(chi_lambda) = sum_{mu <= lambda} s_{lambda,mu} tau_mu`,
//! `s_{lambda,mu} = q^{-<rho_check,mu>} K_{lambda,mu}(q^{-1})`,
//! `K_{lambda,mu}(t) = sum_w sgn(w) P_t(w(lambda+rho) - (mu+rho))`,
//!
//! where `P_t` is the length-graded partition function over the dual
//! datum's positive roots (the group's positive coroots). The normalization
//! is pinned by the GL_d identities
//! `S^{-1}(sum Y_i) = q^{(1-d)/2} tau_{(1,0,...)}` and
//! `S^{-1}(sum Y_i^2) = q^{1-d}(tau_{(2,0,...)} + (1-q) tau_{(1,1,0,...)})`
//! and cross-checked against the Plancherel formula: the coefficient of
//! `tau_0` in `S^{-1}(f)` equals the integral of `f` against the
//! mass-one Macdonald density, for every Weyl-invariant `f`.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, ToPrimitive};

use crate::error::{Error, Result};
use crate::laurent::HalfLaurent;
use crate::root_data::{dominant_weights_below, weyl_character, weyl_dim, RootDatum, Weight};

/// Finitely supported element `sum c_lambda tau_lambda`, keys dominant.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct HeckeElement {
    pub coeffs: BTreeMap<Weight, HalfLaurent>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SphericalBasis {
    OrbitSum,
    Character,
}

/// Weyl-invariant function on the dual torus, expanded either in orbit sums
/// `m_lambda` or in irreducible characters `chi_lambda`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SphericalFunction {
    pub basis: SphericalBasis,
    pub coeffs: BTreeMap<Weight, HalfLaurent>,
}

impl HeckeElement {
    pub fn zero() -> Self {
        HeckeElement::default()
    }

    pub fn unit(dim: usize) -> Self {
        let mut h = HeckeElement::zero();
        h.add_term(Weight::zero(dim), HalfLaurent::one());
        h
    }

    pub fn add_term(&mut self, lambda: Weight, c: HalfLaurent) {
        if c.is_zero() {
            return;
        }
        let drop = {
            let slot = self.coeffs.entry(lambda.clone()).or_insert_with(HalfLaurent::zero);
            slot.add_assign(&c);
            slot.is_zero()
        };
        if drop {
            self.coeffs.remove(&lambda);
        }
    }

    pub fn add_scaled(&mut self, other: &HeckeElement, factor: &HalfLaurent) {
        for (w, c) in &other.coeffs {
            self.add_term(w.clone(), c.mul(factor));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The coefficient of `tau_0`: the value of the function at the
    /// identity of the group.
    pub fn evaluate_at_identity(&self) -> HalfLaurent {
        self.coeffs
            .iter()
            .find(|(w, _)| w.is_zero())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(HalfLaurent::zero)
    }
}

impl SphericalFunction {
    pub fn zero(basis: SphericalBasis) -> Self {
        SphericalFunction { basis, coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, lambda: Weight, c: HalfLaurent) {
        if c.is_zero() {
            return;
        }
        let drop = {
            let slot = self.coeffs.entry(lambda.clone()).or_insert_with(HalfLaurent::zero);
            slot.add_assign(&c);
            slot.is_zero()
        };
        if drop {
            self.coeffs.remove(&lambda);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// A finite-dimensional representation of the dual group, given by dominant
/// highest weights with multiplicities.
#[derive(Clone, Debug)]
pub struct RepSpec {
    pub summands: Vec<(Weight, u32)>,
}

impl RepSpec {
    /// Standard representation: highest weight `(1,0,...,0)`.
    pub fn std(dual: &RootDatum) -> Self {
        let mut c = vec![0i64; dual.ambient_dim];
        c[0] = 1;
        RepSpec { summands: vec![(Weight::from_i64(&c), 1)] }
    }

    pub fn trivial(dual: &RootDatum) -> Self {
        RepSpec { summands: vec![(Weight::zero(dual.ambient_dim), 1)] }
    }

    pub fn from_highest_weights(summands: Vec<(Weight, u32)>) -> Self {
        RepSpec { summands }
    }

    pub fn is_irreducible(&self) -> bool {
        self.summands.len() == 1 && self.summands[0].1 == 1
    }

    /// Any direct summand equal to the trivial representation?
    pub fn has_trivial_summand(&self) -> bool {
        self.summands.iter().any(|(w, _)| w.is_zero())
    }

    /// Dual representation: negate and re-dominate every highest weight is
    /// wrong in general, so the dual is formed on the weight multiset level;
    /// for an irreducible V_lambda the dual is V_{-w0(lambda)}, realized here
    /// as the dominant representative of `-lambda`.
    pub fn dual_rep(&self, dual: &RootDatum) -> RepSpec {
        let summands = self
            .summands
            .iter()
            .map(|(w, m)| (dual.dominant_representative(&w.neg()), *m))
            .collect();
        RepSpec { summands }
    }

    pub fn dim(&self, dual: &RootDatum) -> Result<BigInt> {
        let mut d = BigInt::from(0);
        for (w, m) in &self.summands {
            d += weyl_dim(dual, w)? * BigInt::from(*m);
        }
        Ok(d)
    }

    /// Full weight multiset, as dominant-orbit data: `(mu, multiplicity)`
    /// with `mu` running over all weights (not just dominant ones).
    pub fn weights(&self, dual: &RootDatum) -> Result<Vec<(Weight, u64)>> {
        let mut acc: BTreeMap<Weight, u64> = BTreeMap::new();
        for (hw, mult) in &self.summands {
            for (dom, m) in weyl_character(dual, hw)? {
                for w in dual.orbit(&dom) {
                    *acc.entry(w).or_insert(0) += m * (*mult as u64);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }
}

/// `2 * <a, b>` as an integer, for half-integral pairings.
fn doubled_pairing(a: &Weight, b: &Weight) -> i64 {
    let two = BigRational::from_integer(BigInt::from(2));
    let d = a.dot(b) * two;
    assert!(d.is_integer(), "pairing is not half-integral");
    d.to_integer().to_i64().expect("pairing fits i64")
}

type CoeffKey = (crate::root_data::CartanType, usize, Vec<i64>, Vec<i64>);

static COEFF_MEMO: std::sync::Mutex<Option<std::collections::HashMap<CoeffKey, HalfLaurent>>> =
    std::sync::Mutex::new(None);
static PARTITION_MEMO: std::sync::Mutex<
    Option<
        std::collections::HashMap<
            (crate::root_data::CartanType, usize),
            std::collections::HashMap<(usize, Vec<i64>), HalfLaurent>,
        >,
    >,
> = std::sync::Mutex::new(None);

fn doubled_key(w: &Weight) -> Vec<i64> {
    w.0.iter()
        .map(|c| {
            let d = c * BigRational::from_integer(BigInt::from(2));
            assert!(d.is_integer());
            d.to_integer().to_i64().expect("coordinate fits i64")
        })
        .collect()
}

/// Kato-Lusztig coefficient `s_{lambda,mu}` for the dual datum; zero unless
/// `mu <= lambda` in the dominance order, and a pure monomial
/// `q^{-<rho_check,lambda>}` on the diagonal. Memoized process-wide.
pub fn satake_coeff(dual: &RootDatum, lambda: &Weight, mu: &Weight) -> Result<HalfLaurent> {
    if !dual.is_dominant(lambda) {
        return Err(Error::NonDominant(format!("{lambda:?}")));
    }
    if !dual.is_dominant(mu) {
        return Err(Error::NonDominant(format!("{mu:?}")));
    }
    let key: CoeffKey = (dual.cartan_type, dual.rank, doubled_key(lambda), doubled_key(mu));
    if let Some(hit) = COEFF_MEMO.lock().unwrap().as_ref().and_then(|m| m.get(&key).cloned()) {
        return Ok(hit);
    }
    let lam_rho = lambda.add(&dual.rho);
    let mu_rho = mu.add(&dual.rho);
    let mut k_poly = HalfLaurent::zero();
    {
        let mut part_guard = PARTITION_MEMO.lock().unwrap();
        let memo = part_guard
            .get_or_insert_with(std::collections::HashMap::new)
            .entry((dual.cartan_type, dual.rank))
            .or_default();
        for w in &dual.weyl_elements {
            let kappa = w.apply(&lam_rho).sub(&mu_rho);
            let p = crate::root_data::q_graded_partition_cached(
                &dual.positive_roots,
                &dual.simple_roots,
                &kappa,
                memo,
            );
            if p.is_zero() {
                continue;
            }
            if w.det() == 1 {
                k_poly.add_assign(&p);
            } else {
                k_poly.sub_assign(&p);
            }
        }
    }
    // t -> q^{-1}
    let mut k_at_qinv = HalfLaurent::zero();
    for (dk, c) in k_poly.iter_doubled() {
        k_at_qinv.add_term_doubled(-dk, c);
    }
    // delta_B^{1/2} prefactor
    let result = k_at_qinv.shift_doubled(-doubled_pairing(&dual.rho_check, mu));
    COEFF_MEMO
        .lock()
        .unwrap()
        .get_or_insert_with(std::collections::HashMap::new)
        .insert(key, result.clone());
    Ok(result)
}

/// `S^{-1}(chi_lambda)` expanded in the `tau` basis.
pub fn satake_inverse_char(dual: &RootDatum, lambda: &Weight) -> Result<HeckeElement> {
    let mut h = HeckeElement::zero();
    for mu in dominant_weights_below(dual, lambda) {
        let s = satake_coeff(dual, lambda, &mu)?;
        h.add_term(mu, s);
    }
    Ok(h)
}

/// Forward Satake transform: invert the triangular system, landing in the
/// character basis. Round-trips exactly with `satake_inverse_char`.
pub fn satake_forward(dual: &RootDatum, h: &HeckeElement) -> Result<SphericalFunction> {
    let mut rem = h.clone();
    let mut out = SphericalFunction::zero(SphericalBasis::Character);
    while let Some((mu, c)) = rem.coeffs.iter().next_back().map(|(w, c)| (w.clone(), c.clone())) {
        // Lex-max support element is dominance-maximal; the diagonal
        // coefficient is the monomial q^{-<rho_check,mu>}.
        let diag_exp = -doubled_pairing(&dual.rho_check, &mu);
        let a = c.shift_doubled(-diag_exp);
        let inv = satake_inverse_char(dual, &mu)?;
        let mut scaled = HeckeElement::zero();
        scaled.add_scaled(&inv, &a);
        for (w, cc) in &scaled.coeffs {
            rem.add_term(w.clone(), cc.neg());
        }
        out.add_term(mu, a);
    }
    Ok(out)
}

/// Expand a character-basis function into orbit sums using the weight
/// multiplicities `chi_lambda = sum_mu mult_lambda(mu) m_mu`.
pub fn characters_to_orbit_sums(dual: &RootDatum, f: &SphericalFunction) -> Result<SphericalFunction> {
    assert_eq!(f.basis, SphericalBasis::Character);
    let mut out = SphericalFunction::zero(SphericalBasis::OrbitSum);
    for (lambda, c) in &f.coeffs {
        for (mu, m) in weyl_character(dual, lambda)? {
            let mc = c.scale(&BigRational::from_integer(BigInt::from(m)));
            out.add_term(mu, mc);
        }
    }
    Ok(out)
}

/// Inverse of `characters_to_orbit_sums`: triangular elimination along the
/// dominance order with lexicographic tie-break.
pub fn expand_in_characters(dual: &RootDatum, f: &SphericalFunction) -> Result<SphericalFunction> {
    assert_eq!(f.basis, SphericalBasis::OrbitSum);
    let mut rem = f.clone();
    let mut out = SphericalFunction::zero(SphericalBasis::Character);
    while let Some((mu, c)) = rem.coeffs.iter().next_back().map(|(w, c)| (w.clone(), c.clone())) {
        // chi_mu = m_mu + lower, so the leading orbit-sum coefficient is 1.
        for (nu, m) in weyl_character(dual, &mu)? {
            let mc = c.scale(&BigRational::from_integer(BigInt::from(m)));
            rem.add_term(nu, mc.neg());
        }
        out.add_term(mu, c);
    }
    Ok(out)
}

/// Pullback of the GL_d power sum `Y_1^nu + ... + Y_d^nu` along the
/// representation `r` of the dual group: the trace function
/// `t -> sum_mu mult(mu) t^{nu*mu}`, expanded in orbit sums.
pub fn power_sum_pullback(dual: &RootDatum, r: &RepSpec, nu: u32) -> Result<SphericalFunction> {
    assert!(nu >= 1, "power sum index must be >= 1");
    let mut out = SphericalFunction::zero(SphericalBasis::OrbitSum);
    let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
    for (mu, m) in r.weights(dual)? {
        let scaled = mu.scale_int(nu as i64);
        *acc.entry(scaled).or_insert(0) += m as i64;
    }
    // Collect dominant representatives only; the function is W-invariant.
    for (mu, m) in acc {
        if dual.is_dominant(&mu) {
            out.add_term(mu, HalfLaurent::from_i64(m));
        }
    }
    Ok(out)
}

/// The explicit test function `phi^{(nu)} = S^{-1}(r^*(Y_1^nu+...+Y_d^nu))`.
pub fn phi_nu(dual: &RootDatum, r: &RepSpec, nu: u32) -> Result<HeckeElement> {
    let p = power_sum_pullback(dual, r, nu)?;
    let chars = expand_in_characters(dual, &p)?;
    let mut h = HeckeElement::zero();
    for (lambda, a) in &chars.coeffs {
        let inv = satake_inverse_char(dual, lambda)?;
        h.add_scaled(&inv, a);
    }
    Ok(h)
}

/// Value of a Hecke element at the identity: the `tau_0` coefficient.
pub fn evaluate_at_identity(h: &HeckeElement) -> HalfLaurent {
    h.evaluate_at_identity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{build_root_datum, CartanType};

    fn gl(d: usize) -> RootDatum {
        build_root_datum(CartanType::A, d - 1).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gl2_standard_coefficient() {
        let d = gl(2);
        let lam = Weight::from_i64(&[1, 0]);
        let s = satake_coeff(&d, &lam, &lam).unwrap();
        assert_eq!(s, HalfLaurent::monomial_doubled(-1, rat(1, 1)));
    }

    #[test]
    fn triangularity_vanishing() {
        let d = gl(3);
        let lam = Weight::from_i64(&[1, 1, 0]);
        let mu = Weight::from_i64(&[2, 0, 0]);
        // mu not <= lam
        let s = satake_coeff(&d, &lam, &mu).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn gl3_kostka_coefficient() {
        let d = gl(3);
        let s = satake_coeff(&d, &Weight::from_i64(&[2, 0, 0]), &Weight::from_i64(&[1, 1, 0])).unwrap();
        assert_eq!(s, HalfLaurent::monomial_int(-2, rat(1, 1)));
    }

    #[test]
    fn gl_first_power_sum_identities() {
        for d in 2..=5usize {
            let datum = gl(d);
            let r = RepSpec::std(&datum);
            let h = phi_nu(&datum, &r, 1).unwrap();
            let mut c0 = vec![0i64; d];
            c0[0] = 1;
            let expect_support = Weight::from_i64(&c0);
            assert_eq!(h.coeffs.len(), 1, "GL_{d} phi1 single coset");
            let c = h.coeffs.get(&expect_support).unwrap();
            assert_eq!(*c, HalfLaurent::monomial_doubled(1 - d as i64, rat(1, 1)));
        }
    }

    #[test]
    fn gl_second_power_sum_identities() {
        for d in 2..=5usize {
            let datum = gl(d);
            let r = RepSpec::std(&datum);
            let h = phi_nu(&datum, &r, 2).unwrap();
            let mut c2 = vec![0i64; d];
            c2[0] = 2;
            let mut c11 = vec![0i64; d];
            c11[0] = 1;
            c11[1] = 1;
            let q_pow = HalfLaurent::monomial_int(1 - d as i64, rat(1, 1));
            let one_minus_q = HalfLaurent::one().sub(&HalfLaurent::monomial_int(1, rat(1, 1)));
            let mut expect = HeckeElement::zero();
            expect.add_term(Weight::from_i64(&c2), q_pow.clone());
            expect.add_term(Weight::from_i64(&c11), q_pow.mul(&one_minus_q));
            assert_eq!(h, expect, "GL_{d} phi2 closed form");
        }
    }

    #[test]
    fn unit_maps_to_unit() {
        let d = gl(3);
        let h = satake_inverse_char(&d, &Weight::zero(3)).unwrap();
        assert_eq!(h, HeckeElement::unit(3));
        let f = satake_forward(&d, &HeckeElement::unit(3)).unwrap();
        assert_eq!(f.coeffs.len(), 1);
        assert_eq!(f.coeffs.get(&Weight::zero(3)).unwrap(), &HalfLaurent::one());
    }

    #[test]
    fn forward_of_tau_std_gl() {
        // tau_{(1,0,...,0)} -> q^{(d-1)/2} chi_{(1,0,...,0)}
        for d in 2..=4usize {
            let datum = gl(d);
            let mut h = HeckeElement::zero();
            let mut c = vec![0i64; d];
            c[0] = 1;
            h.add_term(Weight::from_i64(&c), HalfLaurent::one());
            let f = satake_forward(&datum, &h).unwrap();
            assert_eq!(f.coeffs.len(), 1);
            let got = f.coeffs.get(&Weight::from_i64(&c)).unwrap();
            assert_eq!(*got, HalfLaurent::monomial_doubled(d as i64 - 1, rat(1, 1)));
        }
    }

    #[test]
    fn round_trip_small() {
        for (t, n) in [(CartanType::A, 2), (CartanType::B, 2), (CartanType::C, 2)] {
            let d = build_root_datum(t, n).unwrap();
            for lam in [Weight::from_i64(&vec![1; d.ambient_dim]), {
                let mut c = vec![0i64; d.ambient_dim];
                c[0] = 2;
                Weight::from_i64(&c)
            }] {
                if !d.is_dominant(&lam) {
                    continue;
                }
                let inv = satake_inverse_char(&d, &lam).unwrap();
                let f = satake_forward(&d, &inv).unwrap();
                assert_eq!(f.coeffs.len(), 1, "{t:?} round trip support");
                assert_eq!(f.coeffs.get(&lam).unwrap(), &HalfLaurent::one());
            }
        }
    }

    #[test]
    fn orbit_character_round_trip() {
        let d = build_root_datum(CartanType::B, 2).unwrap();
        let mut f = SphericalFunction::zero(SphericalBasis::OrbitSum);
        f.add_term(Weight::from_i64(&[2, 1]), HalfLaurent::from_i64(3));
        f.add_term(Weight::from_i64(&[1, 0]), HalfLaurent::monomial_doubled(-3, rat(2, 5)));
        f.add_term(Weight::zero(2), HalfLaurent::from_i64(-1));
        let chars = expand_in_characters(&d, &f).unwrap();
        let back = characters_to_orbit_sums(&d, &chars).unwrap();
        assert_eq!(back.coeffs, f.coeffs);
    }

    #[test]
    fn a1_orbit_sum_expansion() {
        // m_{(2)} = chi_{(2)} - chi_0 on SL2 (A1 in 2 coordinates: m_{(1,-1)}).
        let d = build_root_datum(CartanType::A, 1).unwrap();
        let mut f = SphericalFunction::zero(SphericalBasis::OrbitSum);
        f.add_term(Weight::from_i64(&[1, -1]), HalfLaurent::one());
        let chars = expand_in_characters(&d, &f).unwrap();
        let mut expect = SphericalFunction::zero(SphericalBasis::Character);
        expect.add_term(Weight::from_i64(&[1, -1]), HalfLaurent::one());
        expect.add_term(Weight::zero(2), HalfLaurent::from_i64(-1));
        assert_eq!(chars.coeffs, expect.coeffs);
    }

    #[test]
    fn power_sum_pullback_std_so5() {
        // five weights: +-e1, +-e2, 0 -> m_{(1,0)} + m_0
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let r = RepSpec::std(&b2);
        let p = power_sum_pullback(&b2, &r, 1).unwrap();
        assert_eq!(p.coeffs.len(), 2);
        assert_eq!(p.coeffs.get(&Weight::from_i64(&[1, 0])).unwrap(), &HalfLaurent::one());
        assert_eq!(p.coeffs.get(&Weight::zero(2)).unwrap(), &HalfLaurent::one());
        // trivial rep, any nu -> constant 1
        let t = RepSpec::trivial(&b2);
        let p1 = power_sum_pullback(&b2, &t, 3).unwrap();
        assert_eq!(p1.coeffs.len(), 1);
        assert_eq!(p1.coeffs.get(&Weight::zero(2)).unwrap(), &HalfLaurent::one());
    }

    #[test]
    fn so5_second_pullback_in_characters() {
        // character basis: chi_0 + chi_{(2,0)} - chi_{(1,1)}
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let r = RepSpec::std(&b2);
        let p = power_sum_pullback(&b2, &r, 2).unwrap();
        let chars = expand_in_characters(&b2, &p).unwrap();
        let mut expect = SphericalFunction::zero(SphericalBasis::Character);
        expect.add_term(Weight::zero(2), HalfLaurent::one());
        expect.add_term(Weight::from_i64(&[2, 0]), HalfLaurent::one());
        expect.add_term(Weight::from_i64(&[1, 1]), HalfLaurent::from_i64(-1));
        assert_eq!(chars.coeffs, expect.coeffs);
    }

    #[test]
    fn dual_rep_of_std_gl3_is_negated() {
        let d = gl(3);
        let r = RepSpec::std(&d);
        let rd = r.dual_rep(&d);
        assert_eq!(rd.summands[0].0, Weight::from_i64(&[0, 0, -1]));
    }
}
