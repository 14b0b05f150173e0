//! Frobenius-Schur indicator and symmetry-type classification.
//!
//! For an irreducible representation `r` of the compact form, the indicator
//! `s(r) = integral of chi(g^2)` takes values in {-1, 0, 1} and equals the
//! multiplicity of the trivial representation in `Sym^2 V` minus that in
//! `Wedge^2 V`. The classification: s = 0 means not self-dual (Unitary
//! symmetry, U ensemble); s = +1 means a symmetric invariant form
//! (Symplectic symmetry, USp ensemble); s = -1 means an alternating form
//! (Orthogonal symmetry, SO-even ensemble).
//!
//! Everything here is computed exactly as constant terms against the
//! Weyl-integration density; no numeric Haar integration.

use num::{BigInt, BigRational, One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::hecke::RepSpec;
use crate::laurent::HalfLaurent;
use crate::plancherel::plancherel_moment_exact_poly;
use crate::root_data::RootDatum;
use crate::sato_tate::{st_density_poly, trace_poly};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SymmetryType {
    Unitary,
    Symplectic,
    Orthogonal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ensemble {
    U,
    USp,
    SOeven,
}

impl std::fmt::Display for SymmetryType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SymmetryType::Unitary => "Unitary",
            SymmetryType::Symplectic => "Symplectic",
            SymmetryType::Orthogonal => "Orthogonal",
        };
        write!(f, "{s}")
    }
}

impl std::fmt::Display for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Ensemble::U => "U",
            Ensemble::USp => "USp",
            Ensemble::SOeven => "SOeven",
        };
        write!(f, "{s}")
    }
}

/// Indicator, trivial-multiplicities in the symmetric and alternating
/// squares, and the induced classification.
#[derive(Clone, Debug)]
pub struct SymmetryVerdict {
    pub s: i64,
    pub sym_mult: i64,
    pub wedge_mult: i64,
    pub symmetry_type: SymmetryType,
    pub ensemble: Ensemble,
    /// Set when the representation is not a single irreducible summand; the
    /// indicator is then the virtual difference and may leave {-1,0,1}.
    pub reducible: bool,
}

/// `s(r)` as the constant term of `chi(t^2)` against the Weyl-integration
/// density. For reducible input this is the virtual difference of
/// multiplicities, reported as-is.
pub fn frobenius_schur(dual: &RootDatum, r: &RepSpec) -> Result<i64> {
    let density = st_density_poly(dual)?;
    let chi_sq = trace_poly(dual, r, 2)?;
    let ct = chi_sq.mul(&density).constant_term();
    debug_assert!(ct.is_integer());
    Ok(ct.to_integer().to_i64().expect("indicator fits i64"))
}

/// Trivial multiplicities in `Sym^2 V` and `Wedge^2 V`, via the character
/// identities `chi_Sym2(t) = (chi(t)^2 + chi(t^2))/2` and
/// `chi_Wedge2(t) = (chi(t)^2 - chi(t^2))/2`.
pub fn sym2_wedge2_mults(dual: &RootDatum, r: &RepSpec) -> Result<(i64, i64)> {
    let density = st_density_poly(dual)?;
    let chi = trace_poly(dual, r, 1)?;
    let chi2 = chi.mul(&chi);
    let chi_sq = trace_poly(dual, r, 2)?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut sym = chi2.clone();
    sym.add_assign(&chi_sq);
    let sym_ct = sym.scale(&half).mul(&density).constant_term();
    let mut wedge = chi2;
    wedge.add_assign(&chi_sq.scale(&-BigRational::one()));
    let wedge_ct = wedge.scale(&half).mul(&density).constant_term();
    debug_assert!(sym_ct.is_integer() && wedge_ct.is_integer());
    Ok((
        sym_ct.to_integer().to_i64().expect("fits"),
        wedge_ct.to_integer().to_i64().expect("fits"),
    ))
}

/// The fixed bijection from the indicator to the symmetry type and the
/// random-matrix ensemble. Errors outside {-1,0,1}.
pub fn classify(s: i64) -> Result<(SymmetryType, Ensemble)> {
    match s {
        0 => Ok((SymmetryType::Unitary, Ensemble::U)),
        1 => Ok((SymmetryType::Symplectic, Ensemble::USp)),
        -1 => Ok((SymmetryType::Orthogonal, Ensemble::SOeven)),
        other => Err(Error::IndicatorOutOfRange(other)),
    }
}

/// Full verdict for a representation of the dual datum.
pub fn symmetry_verdict(dual: &RootDatum, r: &RepSpec) -> Result<SymmetryVerdict> {
    let s = frobenius_schur(dual, r)?;
    let (sym_mult, wedge_mult) = sym2_wedge2_mults(dual, r)?;
    assert_eq!(s, sym_mult - wedge_mult, "indicator identity violated");
    let reducible = !r.is_irreducible();
    let (symmetry_type, ensemble) = classify(s.clamp(-1, 1))?;
    if !reducible {
        assert!(sym_mult + wedge_mult <= 1, "Schur bound violated for irreducible input");
        assert!((-1..=1).contains(&s));
    }
    Ok(SymmetryVerdict { s, sym_mult, wedge_mult, symmetry_type, ensemble, reducible })
}

/// Class-weighted average `sum |theta| s_theta / sum |theta|`.
pub fn cebotarev_average(classes: &[(u64, i64)]) -> Result<BigRational> {
    if classes.is_empty() {
        return Err(Error::EmptyInput("class list".into()));
    }
    if classes.iter().any(|(size, _)| *size == 0) {
        return Err(Error::Invalid("class sizes must be positive".into()));
    }
    let total: BigInt = classes.iter().map(|(size, _)| BigInt::from(*size)).sum();
    let weighted: BigInt = classes.iter().map(|(size, s)| BigInt::from(*size) * BigInt::from(*s)).sum();
    Ok(BigRational::new(weighted, total))
}

/// The full Laurent expansion of `phi^(2)(1)` in `q^{-1}` together with its
/// constant term. The expansion must have no positive q-powers and all
/// non-constant exponents at most -1; a violation signals a transform bug.
pub fn second_moment_expansion(dual: &RootDatum, r: &RepSpec) -> Result<(HalfLaurent, BigRational)> {
    let poly = plancherel_moment_exact_poly(dual, r, 2)?;
    if let Some(max) = poly.max_doubled_exponent() {
        if max > 0 {
            return Err(Error::PositivePower(format!("{poly:?}")));
        }
    }
    for (dk, _) in poly.iter_doubled() {
        if dk != 0 && dk > -2 {
            return Err(Error::PositivePower(format!(
                "exponent {}/2 lies strictly between -1 and 0: {poly:?}",
                dk
            )));
        }
    }
    let ct = poly.constant_term();
    Ok((poly, ct))
}

/// True iff `phi^(1)(1)` has only exponents <= -1 (in particular no constant
/// term). Errors when the restriction to the dual group contains the
/// trivial representation, for which the first-moment bound fails.
pub fn first_moment_check(dual: &RootDatum, r: &RepSpec) -> Result<bool> {
    let density = st_density_poly(dual)?;
    let chi = trace_poly(dual, r, 1)?;
    let trivial_mult = chi.mul(&density).constant_term();
    if trivial_mult.is_positive() {
        return Err(Error::TrivialSummand);
    }
    let poly = plancherel_moment_exact_poly(dual, r, 1)?;
    Ok(poly.max_doubled_exponent().map_or(true, |k| k <= -2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::{build_root_datum, CartanType, Weight};
    use num::Zero;

    #[test]
    fn standard_reps_classify_by_form() {
        // odd orthogonal: symmetric form -> +1
        for n in 1..=3usize {
            let b = build_root_datum(CartanType::B, n).unwrap();
            assert_eq!(frobenius_schur(&b, &RepSpec::std(&b)).unwrap(), 1, "B{n}");
        }
        // symplectic: alternating form -> -1
        for n in 1..=3usize {
            let c = build_root_datum(CartanType::C, n).unwrap();
            assert_eq!(frobenius_schur(&c, &RepSpec::std(&c)).unwrap(), -1, "C{n}");
        }
        // even orthogonal: +1
        for n in 2..=3usize {
            let d = build_root_datum(CartanType::D, n).unwrap();
            assert_eq!(frobenius_schur(&d, &RepSpec::std(&d)).unwrap(), 1, "D{n}");
        }
        // special linear standard (rank 2): not self-dual -> 0
        let a2 = build_root_datum(CartanType::A, 2).unwrap();
        assert_eq!(frobenius_schur(&a2, &RepSpec::std(&a2)).unwrap(), 0);
    }

    #[test]
    fn sym_wedge_examples() {
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        assert_eq!(sym2_wedge2_mults(&b2, &RepSpec::trivial(&b2)).unwrap(), (1, 0));
        assert_eq!(sym2_wedge2_mults(&b2, &RepSpec::std(&b2)).unwrap(), (1, 0));
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        assert_eq!(sym2_wedge2_mults(&c1, &RepSpec::std(&c1)).unwrap(), (0, 1));
    }

    #[test]
    fn classify_is_total_bijection_on_indicators() {
        assert_eq!(classify(0).unwrap(), (SymmetryType::Unitary, Ensemble::U));
        assert_eq!(classify(1).unwrap(), (SymmetryType::Symplectic, Ensemble::USp));
        assert_eq!(classify(-1).unwrap(), (SymmetryType::Orthogonal, Ensemble::SOeven));
        assert!(classify(2).is_err());
    }

    #[test]
    fn cebotarev_arithmetic() {
        assert!(cebotarev_average(&[]).is_err());
        assert_eq!(cebotarev_average(&[(1, 1)]).unwrap(), BigRational::one());
        assert!(cebotarev_average(&[(1, 1), (3, -1), (2, 1)]).unwrap().is_zero());
        for s in [-1i64, 0, 1] {
            assert_eq!(
                cebotarev_average(&[(1, s), (1, s)]).unwrap(),
                BigRational::from_integer(BigInt::from(s))
            );
        }
    }

    #[test]
    fn duality_preserves_indicator() {
        for (t, n) in [(CartanType::A, 2), (CartanType::B, 2), (CartanType::C, 2)] {
            let d = build_root_datum(t, n).unwrap();
            let r = RepSpec::std(&d);
            let rd = r.dual_rep(&d);
            assert_eq!(
                frobenius_schur(&d, &r).unwrap(),
                frobenius_schur(&d, &rd).unwrap(),
                "{t:?}{n}"
            );
        }
    }

    #[test]
    fn second_moment_constant_terms_match_indicator() {
        for (t, n) in [(CartanType::B, 2), (CartanType::C, 2), (CartanType::D, 2), (CartanType::A, 2)]
        {
            let d = build_root_datum(t, n).unwrap();
            let r = RepSpec::std(&d);
            let (_, ct) = second_moment_expansion(&d, &r).unwrap();
            let s = frobenius_schur(&d, &r).unwrap();
            assert_eq!(ct, BigRational::from_integer(BigInt::from(s)), "{t:?}{n}");
        }
    }

    #[test]
    fn adjoint_of_sl2_is_orthogonal_with_clean_expansion() {
        let a1 = build_root_datum(CartanType::A, 1).unwrap();
        let adjoint = RepSpec::from_highest_weights(vec![(Weight::from_i64(&[1, -1]), 1)]);
        assert_eq!(frobenius_schur(&a1, &adjoint).unwrap(), 1);
        let (poly, ct) = second_moment_expansion(&a1, &adjoint).unwrap();
        assert_eq!(ct, BigRational::one());
        for (dk, _) in poly.iter_doubled() {
            assert!(dk == 0 || dk <= -2, "remainder exponents <= -1: {poly:?}");
        }
        assert!(first_moment_check(&a1, &adjoint).unwrap());
    }

    #[test]
    fn first_moment_check_on_builtins() {
        let c2 = build_root_datum(CartanType::C, 2).unwrap();
        assert!(first_moment_check(&c2, &RepSpec::std(&c2)).unwrap());
        let d3 = build_root_datum(CartanType::D, 3).unwrap();
        assert!(first_moment_check(&d3, &RepSpec::std(&d3)).unwrap());
        // the odd-orthogonal tower has a nonzero O(q^{-1}) first moment but
        // still no constant term
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        assert!(first_moment_check(&b2, &RepSpec::std(&b2)).unwrap());
    }

    #[test]
    fn trivial_summand_rejected_by_first_moment_check() {
        let b2 = build_root_datum(CartanType::B, 2).unwrap();
        let bad = RepSpec::from_highest_weights(vec![
            (Weight::from_i64(&[1, 0]), 1),
            (Weight::zero(2), 1),
        ]);
        assert!(matches!(first_moment_check(&b2, &bad), Err(Error::TrivialSummand)));
    }

    #[test]
    fn reducible_rep_flagged() {
        let c1 = build_root_datum(CartanType::C, 1).unwrap();
        // std + std: virtual indicator -2, outside {-1,0,1}
        let r = RepSpec::from_highest_weights(vec![(Weight::from_i64(&[1]), 2)]);
        let v = symmetry_verdict(&c1, &r).unwrap();
        assert!(v.reducible);
        assert_eq!(v.s, -2);
        assert_eq!(v.s, v.sym_mult - v.wedge_mult);
    }
}
