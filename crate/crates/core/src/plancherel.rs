//! Macdonald's unramified Plancherel density on the compact dual torus at a
//! numeric `q > 1`, normalized to total mass one, with trapezoid-rule
//! quadrature on a uniform tensor grid. For smooth periodic integrands the
//! trapezoid rule is spectrally accurate, which the grid-doubling check in
//! the self-test suite exercises.
//!
//! Density at `x in [0,1)^r` (split case):
//!
//! `prod_{alpha in Phi(dual)} (1 - e(<alpha,x>)) / (1 - q^{-1} e(<alpha,x>))`
//!
//! Roots pair `alpha, -alpha` into `|.|^2` factors, so the density is real
//! and nonnegative. Moments of trace functions of dual-group representations
//! against this density reproduce the `tau_0` coefficient of the exact
//! Satake inverse; that identity is enforced to 1e-8 by the acceptance gate.

use num::{BigRational, FromPrimitive, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hecke::{evaluate_at_identity, phi_nu, RepSpec};
use crate::laurent::HalfLaurent;
use crate::root_data::RootDatum;

/// Uniform tensor grid on `[0,1)^rank` with `points_per_dim` nodes per axis.
/// Trapezoid weights are the constant `1/points_per_dim^rank`.
#[derive(Clone, Copy, Debug)]
pub struct TorusGrid {
    pub rank: usize,
    pub points_per_dim: usize,
}

impl TorusGrid {
    pub fn new(rank: usize, points_per_dim: usize) -> Self {
        TorusGrid { rank, points_per_dim }
    }

    /// Default resolution per axis. Long roots step the density's Fourier
    /// modes by 2, so the trapezoid error decays like q^{-M/2}; at q = 2 a
    /// rank-2 grid needs M = 72 to sit below 1e-10. Higher ranks trade
    /// resolution for node count, and their root systems decay faster.
    pub fn default_for_rank(rank: usize) -> Self {
        let m = match rank {
            0 | 1 => 128,
            2 => 72,
            3 => 48,
            _ => 24,
        };
        TorusGrid::new(rank, m)
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.rank as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, mut index: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.rank];
        for slot in x.iter_mut() {
            *slot = (index % self.points_per_dim) as f64 / self.points_per_dim as f64;
            index /= self.points_per_dim;
        }
        x
    }
}

/// Normalized density with its mass-one constant.
#[derive(Clone, Debug)]
pub struct PlancherelDensity {
    pub datum: RootDatum,
    pub q: f64,
    pub normalization: f64,
    pub grid: TorusGrid,
}

fn roots_f64(datum: &RootDatum) -> Vec<Vec<f64>> {
    datum
        .positive_roots
        .iter()
        .map(|a| a.0.iter().map(|c| c.to_f64().unwrap()).collect())
        .collect()
}

/// Unnormalized Macdonald density at one point.
pub fn macdonald_density_unnorm(datum: &RootDatum, q: f64, x: &[f64]) -> Result<f64> {
    if q <= 1.0 {
        return Err(Error::QOutOfRange(q));
    }
    Ok(density_from_roots(&roots_f64(datum), q, x))
}

fn density_from_roots(pos_roots: &[Vec<f64>], q: f64, x: &[f64]) -> f64 {
    let qinv = 1.0 / q;
    let mut val = 1.0;
    for alpha in pos_roots {
        let theta = two_pi_dot(alpha, x);
        let (s, c) = theta.sin_cos();
        // |1 - e(theta)|^2 / |1 - e(theta)/q|^2
        let num = (1.0 - c) * (1.0 - c) + s * s;
        let den = (1.0 - qinv * c) * (1.0 - qinv * c) + (qinv * s) * (qinv * s);
        val *= num / den;
    }
    val
}

fn two_pi_dot(alpha: &[f64], x: &[f64]) -> f64 {
    2.0 * std::f64::consts::PI * alpha.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

/// Deterministic pairwise summation; result independent of chunking.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// Mass-one normalization constant `C = 1 / trapezoid(density)`.
pub fn normalize(datum: &RootDatum, q: f64, grid: TorusGrid) -> Result<PlancherelDensity> {
    if q <= 1.0 {
        return Err(Error::QOutOfRange(q));
    }
    let roots = roots_f64(datum);
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| density_from_roots(&roots, q, &grid.node(i)))
        .collect();
    let mass = pairwise_sum(&values) / grid.len() as f64;
    Ok(PlancherelDensity { datum: datum.clone(), q, normalization: 1.0 / mass, grid })
}

/// `beta^(nu)` by quadrature: the normalized integral of
/// `sum_weights mult * e(nu <mu,x>)` against the density.
pub fn plancherel_moment_numeric(
    datum: &RootDatum,
    r: &RepSpec,
    nu: u32,
    q: f64,
    grid: TorusGrid,
) -> Result<f64> {
    let density = normalize(datum, q, grid)?;
    let weights: Vec<(Vec<f64>, f64)> = r
        .weights(datum)?
        .into_iter()
        .map(|(w, m)| (w.0.iter().map(|c| c.to_f64().unwrap()).collect(), m as f64))
        .collect();
    let roots = roots_f64(datum);
    let (re, im) = moment_sums(&roots, &weights, nu, q, grid);
    let scale = density.normalization / grid.len() as f64;
    let re = re * scale;
    let im = im * scale;
    if im.abs() > 1e-10 {
        return Err(Error::ImaginaryResidue(im.abs()));
    }
    Ok(re)
}

fn moment_sums(
    pos_roots: &[Vec<f64>],
    weights: &[(Vec<f64>, f64)],
    nu: u32,
    q: f64,
    grid: TorusGrid,
) -> (f64, f64) {
    let vals: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let d = density_from_roots(pos_roots, q, &x);
            let mut re = 0.0;
            let mut im = 0.0;
            for (mu, m) in weights {
                let theta = nu as f64 * two_pi_dot(mu, &x);
                re += m * theta.cos();
                im += m * theta.sin();
            }
            (re * d, im * d)
        })
        .collect();
    let re: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.1).collect();
    (pairwise_sum(&re), pairwise_sum(&im))
}

/// Exact moment via the Plancherel formula: the value of `phi^(nu)` at the
/// identity, evaluated at rational `q`. Integer q-powers only, so the result
/// is an exact rational.
pub fn plancherel_moment_exact(
    datum: &RootDatum,
    r: &RepSpec,
    nu: u32,
    q: &BigRational,
) -> Result<BigRational> {
    let value = plancherel_moment_exact_poly(datum, r, nu)?;
    value
        .eval_rational(q)
        .map_err(|_| Error::Invalid("moment has a half-integer q-power".into()))
}

/// The exact moment as a Laurent polynomial in q.
pub fn plancherel_moment_exact_poly(datum: &RootDatum, r: &RepSpec, nu: u32) -> Result<HalfLaurent> {
    let phi = phi_nu(datum, r, nu)?;
    Ok(evaluate_at_identity(&phi))
}

/// Convenience: exact moment as f64 at real q.
pub fn plancherel_moment_exact_f64(datum: &RootDatum, r: &RepSpec, nu: u32, q: f64) -> Result<f64> {
    let poly = plancherel_moment_exact_poly(datum, r, nu)?;
    Ok(poly.eval_f64(q))
}

/// One row of the moment table: exact vs quadrature at a given (q, nu).
#[derive(Clone, Debug)]
pub struct MomentRecord {
    pub q: f64,
    pub nu: u32,
    pub beta_exact: f64,
    pub beta_exact_rational: Option<(String, String)>,
    pub beta_numeric: f64,
    pub abs_err: f64,
}

/// Moment table over a q-list and `nu <= nu_max`.
pub fn moment_table(
    datum: &RootDatum,
    r: &RepSpec,
    nu_max: u32,
    qs: &[f64],
    grid: TorusGrid,
) -> Result<Vec<MomentRecord>> {
    let mut rows = Vec::new();
    for &q in qs {
        for nu in 1..=nu_max {
            let numeric = plancherel_moment_numeric(datum, r, nu, q, grid)?;
            let poly = plancherel_moment_exact_poly(datum, r, nu)?;
            let exact = poly.eval_f64(q);
            let rational = BigRational::from_f64(q)
                .filter(|qr| qr.is_integer())
                .and_then(|qr| poly.eval_rational(&qr).ok())
                .map(|v| (v.numer().to_string(), v.denom().to_string()));
            rows.push(MomentRecord {
                q,
                nu,
                beta_exact: exact,
                beta_exact_rational: rational,
                beta_numeric: numeric,
                abs_err: (exact - numeric).abs(),
            });
        }
    }
    Ok(rows)
}

/// Positivity scan of the density over the grid: smallest node value.
pub fn density_minimum(datum: &RootDatum, q: f64, grid: TorusGrid) -> Result<f64> {
    if q <= 1.0 {
        return Err(Error::QOutOfRange(q));
    }
    let roots = roots_f64(datum);
    let min = (0..grid.len())
        .into_par_iter()
        .map(|i| density_from_roots(&roots, q, &grid.node(i)))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min)
}
