//! The explicit-formula prime side and the main-term pipeline for one-level
//! densities.
//!
//! The model assembles
//!
//! `D_model(C; Phi) = Phihat(0) + sum_{p} sum_{nu>=1} -(log p/log C) p^{-nu/2} * 2 beta^(nu)_pl(p) * Phihat(nu log p/log C)`
//!
//! where `beta^(nu)_pl(p)` is the exact Plancherel moment at `q = p`. The
//! compactly supported `Phihat` truncates the sum at `p <= C^(delta/nu)`;
//! as `C` grows the value converges to `Phihat(0) - s(r)/2 * Phi(0)` with
//! `s(r)` the Frobenius-Schur indicator. The `nu >= 3` tail is dropped and
//! an explicit bound on it is reported alongside.

use num::complex::Complex64;
use num::ToPrimitive;

use crate::error::{Error, Result};
use crate::hecke::RepSpec;
use crate::laurent::HalfLaurent;
use crate::plancherel::plancherel_moment_exact_poly;
use crate::root_data::RootDatum;
use crate::sato_tate::{st_density_poly, trace_poly};
use crate::symmetry::frobenius_schur;

/// A test-function pair `(Phi, Phihat)`: triangular compactly supported
/// Fourier transform `Phihat(y) = max(0, 1 - |y|/delta)` and nonnegative
/// `Phi(x) = delta * (sin(pi delta x)/(pi delta x))^2`. So `Phihat(0) = 1`
/// and `Phi(0) = delta`.
#[derive(Clone, Copy, Debug)]
pub struct TestFunctionPair {
    pub delta: f64,
}

impl TestFunctionPair {
    pub fn fejer(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        Ok(TestFunctionPair { delta })
    }

    pub fn phi(&self, x: f64) -> f64 {
        let z = std::f64::consts::PI * self.delta * x;
        if z.abs() < 1e-8 {
            // sinc^2 = 1 - z^2/3 + O(z^4)
            self.delta * (1.0 - z * z / 3.0)
        } else {
            let s = z.sin() / z;
            self.delta * s * s
        }
    }

    pub fn phi_hat(&self, y: f64) -> f64 {
        (1.0 - y.abs() / self.delta).max(0.0)
    }

    pub fn phi_at_zero(&self) -> f64 {
        self.delta
    }

    pub fn phi_hat_at_zero(&self) -> f64 {
        1.0
    }
}

/// Pipeline inputs. `conductor` plays the role of the family conductor; the
/// prime cutoff is `min(ceil(C^delta), prime_cap)`.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub dual: RootDatum,
    pub rep: RepSpec,
    pub conductor: f64,
    pub pair: TestFunctionPair,
    pub nu_max: u32,
    /// Bound towards Ramanujan for user-supplied Satake data: |alpha| <= p^theta.
    pub theta: f64,
    pub prime_cap: u64,
}

impl PipelineConfig {
    pub fn new(dual: RootDatum, rep: RepSpec, conductor: f64, pair: TestFunctionPair) -> Result<Self> {
        if conductor < 100.0 {
            return Err(Error::Invalid(format!("conductor {conductor} < 100")));
        }
        Ok(PipelineConfig {
            dual,
            rep,
            conductor,
            pair,
            nu_max: 2,
            theta: 0.5 - 1e-9,
            prime_cap: 100_000_000,
        })
    }

    pub fn prime_limit(&self) -> u64 {
        let raw = self.conductor.powf(self.pair.delta).ceil();
        (raw as u64).clamp(2, self.prime_cap)
    }
}

/// Primes up to `limit` by the sieve of Eratosthenes (odd-only storage).
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if !(2..=100_000_000).contains(&limit) {
        return Err(Error::SieveLimitOutOfRange(limit));
    }
    let n = limit as usize;
    let mut primes = vec![2u64];
    if n < 3 {
        return Ok(primes);
    }
    // index i <-> odd number 2i+3
    let m = (n - 1) / 2;
    let mut composite = vec![false; m];
    let mut i = 0usize;
    while (2 * i + 3) * (2 * i + 3) <= n {
        if !composite[i] {
            let p = 2 * i + 3;
            let mut j = (p * p - 3) / 2;
            while j < m {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    for (i, c) in composite.iter().enumerate() {
        if !c {
            primes.push((2 * i + 3) as u64);
        }
    }
    Ok(primes)
}

/// One local term of the prime-side sum, with its conjugate already folded
/// in: `-(log p/log C) p^{-nu/2} * 2 Re(beta) * Phihat(nu log p / log C)`.
/// Exactly zero outside the support of `Phihat`.
pub fn local_prime_term(p: u64, nu: u32, c: f64, pair: &TestFunctionPair, beta: Complex64) -> f64 {
    let lp = (p as f64).ln();
    let lc = c.ln();
    let y = nu as f64 * lp / lc;
    if y >= pair.delta {
        return 0.0;
    }
    -(lp / lc) * (p as f64).powf(-(nu as f64) / 2.0) * 2.0 * beta.re * pair.phi_hat(y)
}

/// Output of the main-term pipeline.
#[derive(Clone, Debug)]
pub struct ModelDensity {
    pub d_model: f64,
    /// Per-nu contributions of the prime sum, indexed 1..=nu_max.
    pub nu_contributions: Vec<f64>,
    /// Explicit bound on the dropped nu > nu_max part, using |beta| <= d.
    pub tail_bound: f64,
    pub primes_used: usize,
}

/// Assemble `D_model` from exact Plancherel moments.
pub fn model_one_level_density(config: &PipelineConfig) -> Result<ModelDensity> {
    let betas: Vec<HalfLaurent> = (1..=config.nu_max)
        .map(|nu| plancherel_moment_exact_poly(&config.dual, &config.rep, nu))
        .collect::<Result<_>>()?;
    model_density_from_polys(config, &betas)
}

/// The same pipeline with Cebotarev class weighting: each class carries a
/// positive size and its own moment polynomials (indexed by nu-1). With a
/// single class this reduces exactly to the unweighted pipeline.
pub fn model_one_level_density_weighted(
    config: &PipelineConfig,
    classes: &[(u64, Vec<HalfLaurent>)],
) -> Result<ModelDensity> {
    if classes.is_empty() {
        return Err(Error::EmptyInput("class list".into()));
    }
    let total: f64 = classes.iter().map(|(s, _)| *s as f64).sum();
    let mut averaged: Vec<HalfLaurent> = Vec::new();
    for nu_idx in 0..config.nu_max as usize {
        let mut acc = HalfLaurent::zero();
        for (size, polys) in classes {
            let poly = polys.get(nu_idx).ok_or_else(|| {
                Error::Invalid("class moment table shorter than nu_max".into())
            })?;
            acc.add_assign(&poly.scale(
                &num::BigRational::from_float(*size as f64 / total)
                    .ok_or_else(|| Error::Invalid("bad class weight".into()))?,
            ));
        }
        averaged.push(acc);
    }
    model_density_from_polys(config, &averaged)
}

fn model_density_from_polys(config: &PipelineConfig, betas: &[HalfLaurent]) -> Result<ModelDensity> {
    let c = config.conductor;
    let pair = &config.pair;
    let primes = sieve_primes(config.prime_limit())?;
    let d = config
        .rep
        .dim(&config.dual)?
        .to_f64()
        .ok_or_else(|| Error::Invalid("dimension overflow".into()))?;

    let mut nu_contributions = vec![0.0; config.nu_max as usize];
    for &p in &primes {
        for nu in 1..=config.nu_max {
            let beta = betas[nu as usize - 1].eval_f64(p as f64);
            nu_contributions[nu as usize - 1] +=
                local_prime_term(p, nu, c, pair, Complex64::new(beta, 0.0));
        }
    }

    // nu > nu_max remainder: |beta| <= d and |Phihat| <= 1 give
    // sum_p (log p/log C) 2d sum_{nu>nu_max} p^{-nu/2}.
    let lc = c.ln();
    let mut tail_bound = 0.0;
    let start = (config.nu_max + 1) as f64;
    for &p in &primes {
        let pf = p as f64;
        let lp = pf.ln();
        if start * lp >= pair.delta * lc {
            // outside the support for every nu > nu_max
            continue;
        }
        let geo = pf.powf(-start / 2.0) / (1.0 - pf.powf(-0.5));
        tail_bound += (lp / lc) * 2.0 * d * geo;
    }

    let d_model = pair.phi_hat_at_zero() + nu_contributions.iter().sum::<f64>();
    Ok(ModelDensity { d_model, nu_contributions, tail_bound, primes_used: primes.len() })
}

/// The predicted limit `Phihat(0) - s(r)/2 * Phi(0)`. Requires an
/// irreducible representation whose restriction to the dual group is
/// nontrivial; both conditions are sharp for the symmetry classification.
pub fn predicted_limit(config: &PipelineConfig) -> Result<f64> {
    if !config.rep.is_irreducible() {
        return Err(Error::Invalid(
            "predicted limit needs an irreducible representation; reducible input would \
             superpose independent families"
                .into(),
        ));
    }
    let density = st_density_poly(&config.dual)?;
    let chi = trace_poly(&config.dual, &config.rep, 1)?;
    if chi.mul(&density).constant_term().to_f64().unwrap_or(0.0) > 0.0 {
        return Err(Error::TrivialSummand);
    }
    let s = frobenius_schur(&config.dual, &config.rep)? as f64;
    Ok(config.pair.phi_hat_at_zero() - s / 2.0 * config.pair.phi_at_zero())
}

/// Satake data of one local factor: a prime and its `d` parameters.
#[derive(Clone, Debug)]
pub struct LocalSatakeData {
    pub p: u64,
    pub alphas: Vec<Complex64>,
}

/// Prime side of the explicit formula for a user-supplied finite Euler
/// product: the conductor term `Phihat(0) log q / log C` plus local terms
/// with `beta^(nu) = sum_i alpha_i^nu`, truncated where
/// `nu (1/2 - theta) log p > 40` (tail below e^{-40}).
pub fn explicit_formula_prime_side(
    data: &[LocalSatakeData],
    q_conductor: u64,
    pair: &TestFunctionPair,
    c_scale: f64,
    theta: f64,
) -> Result<f64> {
    if c_scale < 100.0 {
        return Err(Error::Invalid(format!("conductor scale {c_scale} < 100")));
    }
    let lc = c_scale.ln();
    let mut total = pair.phi_hat_at_zero() * (q_conductor as f64).ln() / lc;
    for local in data {
        let pf = local.p as f64;
        let bound = pf.powf(theta);
        for a in &local.alphas {
            if a.norm() > bound * (1.0 + 1e-12) {
                return Err(Error::RamanujanViolation { alpha: a.norm(), bound });
            }
        }
        let lp = pf.ln();
        let mut nu = 1u32;
        loop {
            let cut = nu as f64 * (0.5 - theta) * lp;
            if cut > 40.0 {
                break;
            }
            if nu as f64 * lp >= pair.delta * lc {
                break; // outside the support of Phihat for all larger nu
            }
            let beta: Complex64 = local.alphas.iter().map(|a| a.powu(nu)).sum();
            total += local_prime_term(local.p, nu, c_scale, pair, beta);
            nu += 1;
        }
    }
    Ok(total)
}

/// Complex digamma by upward recurrence to |z| >= 12 and the Bernoulli
/// asymptotic series. Requires Re z > 0.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if z.re <= 0.0 {
        return Err(Error::DigammaPole(z.re));
    }
    const BERNOULLI_OVER_2N: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 12.0 {
        acc -= 1.0 / w;
        w += 1.0;
    }
    let mut val = w.ln() - 0.5 / w;
    let w2inv = 1.0 / (w * w);
    let mut pow = w2inv;
    for b in BERNOULLI_OVER_2N {
        val -= b * pow;
        pow *= w2inv;
    }
    Ok(val + acc)
}

/// Archimedean factor probe: quadrature of `psi(1/2 - mu + ix) Psi(x)` vs
/// the leading approximation `Psihat(0) log(1/2 - mu)`, with the L1 norms
/// of `Psi` and `x Psi` (over the quadrature window) for the error budget.
/// `Psi(x) = Phi(x log C / (2 pi))` is the zero-scaled test function.
#[derive(Clone, Debug)]
pub struct ArchTerm {
    pub quadrature: Complex64,
    pub leading: Complex64,
    pub difference: f64,
    pub psi_l1: f64,
    pub x_psi_l1: f64,
}

pub fn archimedean_term(mu_list: &[Complex64], pair: &TestFunctionPair, c: f64) -> Result<ArchTerm> {
    let scale = c.ln() / (2.0 * std::f64::consts::PI);
    let psi_fn = |x: f64| pair.phi(x * scale);
    // Psi decays like 1/x^2 at scale 1/(delta*scale); integrate far enough
    // that the tail of x*Psi is below 1e-8.
    let window = 1e4 / (pair.delta * scale);
    let mut quadrature = Complex64::new(0.0, 0.0);
    let mut leading = Complex64::new(0.0, 0.0);
    let mut psi_l1 = 0.0;
    let mut x_psi_l1 = 0.0;
    let steps = 400_000usize;
    let h = 2.0 * window / steps as f64;
    for mu in mu_list {
        let half_minus_mu = Complex64::new(0.5, 0.0) - mu;
        if half_minus_mu.re <= 0.0 {
            return Err(Error::DigammaPole(half_minus_mu.re));
        }
        // composite Simpson
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=steps {
            let x = -window + k as f64 * h;
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let val = digamma(half_minus_mu + Complex64::new(0.0, x))? * psi_fn(x);
            acc += w * val;
        }
        quadrature += acc * (h / 3.0);
        // Psihat(0) = integral of Psi = Phihat(0)/scale
        let psihat0 = pair.phi_hat_at_zero() / scale;
        leading += psihat0 * half_minus_mu.ln();
    }
    // norms once (independent of mu)
    for k in 0..=steps {
        let x = -window + k as f64 * h;
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let v = psi_fn(x);
        psi_l1 += w * v.abs();
        x_psi_l1 += w * (x * v).abs();
    }
    psi_l1 *= h / 3.0;
    x_psi_l1 *= h / 3.0;
    let difference = (quadrature - leading).norm();
    Ok(ArchTerm { quadrature, leading, difference, psi_l1, x_psi_l1 })
}

/// One row of the conductor-ladder study.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub conductor: f64,
    pub d_model: f64,
    pub predicted: f64,
    pub abs_error: f64,
}

/// Run the pipeline along an ascending conductor ladder.
pub fn convergence_study(config: &PipelineConfig, c_list: &[f64]) -> Result<Vec<StudyRow>> {
    if c_list.len() < 3 {
        return Err(Error::Invalid("conductor ladder needs at least 3 entries".into()));
    }
    if c_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("conductor ladder must be ascending".into()));
    }
    let predicted = predicted_limit(config)?;
    let mut rows = Vec::new();
    for &c in c_list {
        let mut cfg = config.clone();
        cfg.conductor = c;
        let m = model_one_level_density(&cfg)?;
        rows.push(StudyRow {
            conductor: c,
            d_model: m.d_model,
            predicted,
            abs_error: (m.d_model - predicted).abs(),
        });
    }
    Ok(rows)
}
