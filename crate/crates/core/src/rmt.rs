//! Haar sampling from U(N), SO(2N), USp(2N), normalized eigenangle
//! extraction, Monte Carlo one-level densities, and the closed-form
//! limiting densities of the three symmetry types.
//!
//! Sampling: Gaussian matrices orthonormalized by modified Gram-Schmidt.
//! Because the triangular factor then has a positive (real) diagonal, the
//! factorization is the canonical one and the orthogonal factor is
//! distribution-exact Haar; no phase correction is needed beyond that. For
//! the even orthogonal group, a draw landing in the negative component is
//! mapped onto SO(2N) by flipping the sign of the last column, which
//! carries Haar measure on one component to Haar measure on the other.
//! Quaternion draws are orthonormalized in quaternion arithmetic and then
//! embedded as 2x2 complex blocks, landing in USp(2N).
//!
//! Angles: for U(N) the Hermitian part (A + A*)/2 is diagonalized by cyclic
//! Jacobi rotations and each phase is recovered as arg(v* A v), which is
//! exact for normal A and resolves degenerate cosines. For SO(2N) and
//! USp(2N) the eigenvalues come in conjugate pairs, so the spectrum of the
//! Hermitian part is the multiset {cos theta_j} each doubled; the angles
//! are read off the eigenvalues alone (Householder tridiagonalization plus
//! implicit-shift QL), keeping one representative per pair.

use num::complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::one_level::TestFunctionPair;
use crate::plancherel::pairwise_sum;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EnsembleTag {
    U,
    SOeven,
    USp,
}

impl EnsembleTag {
    /// Dyson repulsion index of the joint eigenangle density.
    pub fn dyson_beta(&self) -> u8 {
        match self {
            EnsembleTag::SOeven => 1,
            EnsembleTag::U => 2,
            EnsembleTag::USp => 4,
        }
    }
}

impl std::fmt::Display for EnsembleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EnsembleTag::U => "U",
            EnsembleTag::SOeven => "SOeven",
            EnsembleTag::USp => "USp",
        };
        write!(f, "{s}")
    }
}

/// Sorted normalized angles `0 <= v_1 <= ... <= v_N <= N` of one sample.
#[derive(Clone, Debug)]
pub struct EigenangleSample {
    pub ensemble: EnsembleTag,
    pub n: usize,
    pub angles: Vec<f64>,
}

/// Stated seed-derivation: sample k of a run with master seed s uses
/// `splitmix64(s xor golden*(k+1))`, which decorrelates parallel streams
/// deterministically.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; consume two uniforms per call for determinism
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------------------
// small dense matrix helpers (row-major)

#[derive(Clone)]
pub struct CMat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    fn zero(n: usize) -> Self {
        CMat { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    /// max |(A* A - I)_{ij}|
    pub fn unitarity_drift(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.at(k, i).conj() * self.at(k, j);
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Modified Gram-Schmidt on columns, two passes. The diagonal of the
/// implicit triangular factor is positive real.
fn mgs_complex(m: &mut CMat) {
    let n = m.n;
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    proj += m.at(k, i).conj() * m.at(k, j);
                }
                for k in 0..n {
                    let v = m.at(k, j) - proj * m.at(k, i);
                    m.set(k, j, v);
                }
            }
        }
        let mut norm = 0.0;
        for k in 0..n {
            norm += m.at(k, j).norm_sqr();
        }
        let norm = norm.sqrt();
        for k in 0..n {
            let v = m.at(k, j) / norm;
            m.set(k, j, v);
        }
    }
}

fn sample_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zero(n);
    for i in 0..n {
        for j in 0..n {
            let re = standard_normal(rng);
            let im = standard_normal(rng);
            m.set(i, j, Complex64::new(re, im) / std::f64::consts::SQRT_2);
        }
    }
    mgs_complex(&mut m);
    m
}

fn sample_orthogonal_special(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // real Gaussian, MGS, then map O^- to SO by flipping the last column
    let mut a = vec![0.0f64; n * n];
    for v in a.iter_mut() {
        *v = standard_normal(rng);
    }
    // MGS on columns (two passes)
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let mut proj = 0.0;
                for k in 0..n {
                    proj += a[k * n + i] * a[k * n + j];
                }
                for k in 0..n {
                    a[k * n + j] -= proj * a[k * n + i];
                }
            }
        }
        let mut norm = 0.0;
        for k in 0..n {
            norm += a[k * n + j] * a[k * n + j];
        }
        let norm = norm.sqrt();
        for k in 0..n {
            a[k * n + j] /= norm;
        }
    }
    if det_sign(&a, n) < 0.0 {
        for k in 0..n {
            a[k * n + (n - 1)] = -a[k * n + (n - 1)];
        }
    }
    a
}

/// Sign of the determinant by Gaussian elimination with partial pivoting.
fn det_sign(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut sign = 1.0f64;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            sign = -sign;
        }
        if m[col * n + col] < 0.0 {
            sign = -sign;
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
        }
    }
    sign
}

/// Quaternion as a pair (w, z) of complex numbers, embedded as the 2x2
/// block [[w, z], [-conj(z), conj(w)]].
#[derive(Clone, Copy, Debug)]
struct Quat {
    w: Complex64,
    z: Complex64,
}

impl Quat {
    fn zero() -> Self {
        Quat { w: Complex64::new(0.0, 0.0), z: Complex64::new(0.0, 0.0) }
    }

    fn conj(&self) -> Quat {
        Quat { w: self.w.conj(), z: -self.z }
    }

    fn mul(&self, o: &Quat) -> Quat {
        Quat { w: self.w * o.w - self.z * o.z.conj(), z: self.w * o.z + self.z * o.w.conj() }
    }

    fn add(&self, o: &Quat) -> Quat {
        Quat { w: self.w + o.w, z: self.z + o.z }
    }

    fn sub(&self, o: &Quat) -> Quat {
        Quat { w: self.w - o.w, z: self.z - o.z }
    }

    fn scale(&self, s: f64) -> Quat {
        Quat { w: self.w * s, z: self.z * s }
    }

    fn norm_sqr(&self) -> f64 {
        self.w.norm_sqr() + self.z.norm_sqr()
    }
}

/// Quaternion-unitary Haar sample embedded as a 2n x 2n complex matrix.
fn sample_symplectic(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut q = vec![Quat::zero(); n * n];
    for v in q.iter_mut() {
        *v = Quat {
            w: Complex64::new(standard_normal(rng), standard_normal(rng)),
            z: Complex64::new(standard_normal(rng), standard_normal(rng)),
        };
    }
    // MGS over the right quaternion module: v_j <- v_j - u_i <u_i, v_j>
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let mut proj = Quat::zero();
                for k in 0..n {
                    proj = proj.add(&q[k * n + i].conj().mul(&q[k * n + j]));
                }
                for k in 0..n {
                    let upd = q[k * n + i].mul(&proj);
                    q[k * n + j] = q[k * n + j].sub(&upd);
                }
            }
        }
        let mut norm = 0.0;
        for k in 0..n {
            norm += q[k * n + j].norm_sqr();
        }
        let norm = norm.sqrt();
        for k in 0..n {
            q[k * n + j] = q[k * n + j].scale(1.0 / norm);
        }
    }
    // embed
    let mut m = CMat::zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            let Quat { w, z } = q[i * n + j];
            m.set(2 * i, 2 * j, w);
            m.set(2 * i, 2 * j + 1, z);
            m.set(2 * i + 1, 2 * j, -z.conj());
            m.set(2 * i + 1, 2 * j + 1, w.conj());
        }
    }
    m
}

// ---------------------------------------------------------------------------
// eigen machinery

/// Cyclic Jacobi for a complex Hermitian matrix, with eigenvectors.
/// Returns (eigenvalues, columns).
pub fn jacobi_hermitian(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.n;
    let mut a = h.clone();
    let mut v = CMat::zero(n);
    for i in 0..n {
        v.set(i, i, Complex64::new(1.0, 0.0));
    }
    let norm: f64 = a.a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-14 * norm.max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.at(p, q).norm_sqr();
            }
        }
        if off.sqrt() < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                if apq.norm() < tol / (n as f64) {
                    continue;
                }
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                // unitary 2x2: diagonalize [[app, apq],[conj(apq), aqq]]
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rows/cols update with G: columns p,q
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, akp * c - akq * (s * phase.conj()));
                    a.set(k, q, akp * (s * phase) + akq * c);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, apk * c - aqk * (s * phase));
                    a.set(q, k, apk * (s * phase.conj()) + aqk * c);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, vkp * c - vkq * (s * phase.conj()));
                    v.set(k, q, vkp * (s * phase) + vkq * c);
                }
            }
        }
    }
    let evals: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    (evals, v)
}

/// Eigenvalues of a complex Hermitian matrix via Householder
/// tridiagonalization and implicit-shift QL. Values only, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.n;
    let mut a = h.clone();
    let mut diag = vec![0.0f64; n];
    let mut off = vec![0.0f64; n];

    // Householder reduction to real tridiagonal form.
    for k in 0..n.saturating_sub(1) {
        // annihilate column k below row k+1, and make the subdiagonal real
        let mut scale = 0.0;
        for i in (k + 1)..n {
            scale += a.at(i, k).norm();
        }
        if scale < 1e-300 {
            off[k + 1] = 0.0;
            diag[k] = a.at(k, k).re;
            continue;
        }
        let mut h2 = 0.0;
        for i in (k + 1)..n {
            h2 += a.at(i, k).norm_sqr();
        }
        let x = a.at(k + 1, k);
        let alpha = if x.norm() > 0.0 { -(x / x.norm()) * h2.sqrt() } else { Complex64::new(-h2.sqrt(), 0.0) };
        // v = x - alpha e1 (in the trailing block), H = I - 2 vv*/|v|^2
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k + 1] = x - alpha;
        for i in (k + 2)..n {
            v[i] = a.at(i, k);
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 < 1e-300 {
            off[k + 1] = alpha.norm();
            diag[k] = a.at(k, k).re;
            continue;
        }
        // apply H A H
        // w = A v
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                acc += a.at(i, j) * v[j];
            }
            w[i] = acc * (2.0 / vnorm2);
        }
        // K = v* w / 2 * (2/vnorm2) already folded; standard update:
        let mut kappa = Complex64::new(0.0, 0.0);
        for i in (k + 1)..n {
            kappa += v[i].conj() * w[i];
        }
        kappa /= 2.0;
        for i in (k + 1)..n {
            w[i] -= kappa * v[i] * (2.0 / vnorm2);
        }
        // A <- A - v w* - w v*
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                let cur = a.at(i, j);
                a.set(i, j, cur - upd);
            }
        }
        diag[k] = a.at(k, k).re;
        // the new subdiagonal entry is alpha up to the Householder action;
        // read it back for robustness
        off[k + 1] = a.at(k + 1, k).norm();
        // store the phase so the remaining block stays Hermitian with real
        // subdiagonal: rotate row/column k+1
        let sub = a.at(k + 1, k);
        if sub.norm() > 0.0 {
            let ph = sub / sub.norm();
            // scale row k+1 by conj(ph) and column k+1 by ph
            for j in 0..n {
                let r = a.at(k + 1, j);
                a.set(k + 1, j, r * ph.conj());
            }
            for i in 0..n {
                let cst = a.at(i, k + 1);
                a.set(i, k + 1, cst * ph);
            }
        }
    }
    if n >= 1 {
        diag[n - 1] = a.at(n - 1, n - 1).re;
        if n >= 2 {
            // ensure earlier diag entries are the final ones
            for i in 0..n - 1 {
                diag[i] = a.at(i, i).re;
            }
        }
    }

    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap());
    diag
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (diag, off with
/// off[0] unused). In-place on diag.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    // shift so e[i] couples diag[i], diag[i+1]
    let mut e = vec![0.0f64; n];
    for i in 1..n {
        e[i - 1] = off[i];
    }
    let sign = |a: f64, b: f64| if b >= 0.0 { a.abs() } else { -a.abs() };
    for l in 0..n {
        let mut iter = 0;
        loop {
            // find the first decoupled block boundary
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 128, "QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + sign(r, g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

// ---------------------------------------------------------------------------
// sampling API

/// One Haar sample with normalized angles. `n = 1` is allowed for the
/// paired ensembles (SO(2) is a single uniform rotation).
pub fn sample_haar(ensemble: EnsembleTag, n: usize, seed: u64) -> Result<EigenangleSample> {
    let lower = if ensemble == EnsembleTag::U { 2 } else { 1 };
    if !(lower..=128).contains(&n) {
        return Err(Error::MatrixSizeOutOfRange(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = match ensemble {
        EnsembleTag::U => {
            let m = sample_unitary(n, &mut rng);
            let herm = hermitian_part(&m);
            let (_evals, vecs) = jacobi_hermitian(&herm);
            let mut angles = Vec::with_capacity(n);
            for j in 0..n {
                // Rayleigh phase arg(v* A v)
                let mut av = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += m.at(i, k) * vecs.at(k, j);
                    }
                    av[i] = acc;
                }
                let mut ray = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    ray += vecs.at(i, j).conj() * av[i];
                }
                let theta = ray.arg(); // (-pi, pi]
                let frac = (theta / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
                angles.push(frac * n as f64);
            }
            angles
        }
        EnsembleTag::SOeven => {
            let a = sample_orthogonal_special(2 * n, &mut rng);
            // Hermitian part is real symmetric; reuse the complex path
            let mut h = CMat::zero(2 * n);
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let v = 0.5 * (a[i * 2 * n + j] + a[j * 2 * n + i]);
                    h.set(i, j, Complex64::new(v, 0.0));
                }
            }
            cosine_pairs_to_angles(&hermitian_eigenvalues(&h), n)
        }
        EnsembleTag::USp => {
            let m = sample_symplectic(n, &mut rng);
            let h = hermitian_part(&m);
            cosine_pairs_to_angles(&hermitian_eigenvalues(&h), n)
        }
    };
    let mut angles = angles;
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(EigenangleSample { ensemble, n, angles })
}

fn hermitian_part(m: &CMat) -> CMat {
    let n = m.n;
    let mut h = CMat::zero(n);
    for i in 0..n {
        for j in 0..n {
            let v = 0.5 * (m.at(i, j) + m.at(j, i).conj());
            h.set(i, j, v);
        }
    }
    h
}

/// From the doubled cosine spectrum to normalized angles in [0, N]:
/// ascending eigenvalues pair up; take one per pair, theta = arccos,
/// normalize by N/pi.
fn cosine_pairs_to_angles(evals_ascending: &[f64], n: usize) -> Vec<f64> {
    let mut angles = Vec::with_capacity(n);
    for j in 0..n {
        let c = evals_ascending[2 * j].clamp(-1.0, 1.0);
        let theta = c.acos(); // [0, pi], descending over j
        angles.push(theta * n as f64 / std::f64::consts::PI);
    }
    angles
}

/// Expose the raw sampled matrix for drift checks.
pub fn sample_matrix_for_test(ensemble: EnsembleTag, n: usize, seed: u64) -> Result<CMat> {
    if !(2..=128).contains(&n) {
        return Err(Error::MatrixSizeOutOfRange(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match ensemble {
        EnsembleTag::U => sample_unitary(n, &mut rng),
        EnsembleTag::SOeven => {
            let a = sample_orthogonal_special(2 * n, &mut rng);
            let mut m = CMat::zero(2 * n);
            for i in 0..2 * n {
                for j in 0..2 * n {
                    m.set(i, j, Complex64::new(a[i * 2 * n + j], 0.0));
                }
            }
            m
        }
        EnsembleTag::USp => sample_symplectic(n, &mut rng),
    })
}

/// The one-level statistic of one sample, summed over the full normalized
/// spectrum so that it converges to the full-line pairing against the
/// limiting density (the same convention under which zeros of both signs
/// are counted): for the paired ensembles every stored angle contributes
/// both pair members `Phi(+v) + Phi(-v)`, and for U(N) each angle on the
/// circle contributes its two nearest periodic images `Phi(v) + Phi(v-N)`.
pub fn one_level_statistic(sample: &EigenangleSample, pair: &TestFunctionPair) -> f64 {
    let n = sample.n as f64;
    match sample.ensemble {
        EnsembleTag::U => sample.angles.iter().map(|&v| pair.phi(v) + pair.phi(v - n)).sum(),
        EnsembleTag::SOeven | EnsembleTag::USp => {
            sample.angles.iter().map(|&v| pair.phi(v) + pair.phi(-v)).sum()
        }
    }
}

/// Monte Carlo estimate of the expected one-level statistic with the
/// standard error of the mean. Per-sample seeds are derived from the master
/// seed by `derive_seed`; the reduction is deterministic pairwise summation
/// in sample order, so the result is independent of the worker count.
pub fn empirical_one_level(
    ensemble: EnsembleTag,
    n: usize,
    samples: usize,
    pair: &TestFunctionPair,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 100 {
        return Err(Error::TooFewSamples { need: 100, got: samples });
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let sample = sample_haar(ensemble, n, s)?;
            Ok(one_level_statistic(&sample, pair))
        })
        .collect::<Result<_>>()?;
    let mean = pairwise_sum(&values) / samples as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (samples as f64 - 1.0);
    let stderr = (var / samples as f64).sqrt();
    Ok((mean, stderr))
}

/// Limiting one-level density of the ensemble, extended evenly to x < 0.
pub fn limit_density(ensemble: EnsembleTag, x: f64) -> f64 {
    let sinc = |z: f64| {
        if z.abs() < 1e-8 {
            1.0 - z * z / 6.0
        } else {
            z.sin() / z
        }
    };
    let s = sinc(2.0 * std::f64::consts::PI * x);
    match ensemble {
        EnsembleTag::U => 1.0,
        EnsembleTag::SOeven => 1.0 + s,
        EnsembleTag::USp => 1.0 - s,
    }
}

/// Closed-form pairing against the limiting density, valid for Fourier
/// support inside (-1, 1): `Phihat(0)` for U, `Phihat(0) - Phi(0)/2` for
/// USp, `Phihat(0) + Phi(0)/2` for SO(even).
pub fn limit_pairing(ensemble: EnsembleTag, pair: &TestFunctionPair) -> Result<f64> {
    if pair.delta >= 1.0 {
        return Err(Error::DeltaOutOfRange(pair.delta));
    }
    let base = pair.phi_hat_at_zero();
    Ok(match ensemble {
        EnsembleTag::U => base,
        EnsembleTag::USp => base - 0.5 * pair.phi_at_zero(),
        EnsembleTag::SOeven => base + 0.5 * pair.phi_at_zero(),
    })
}

/// Independent numeric check of `limit_pairing`: `Phihat(0)` plus the
/// quadrature of `Phi(x) (W(x) - 1)`, whose integrand decays like x^{-3};
/// the window `|x| <= 200/delta` puts the truncation error below 1e-6.
pub fn quadrature_pairing(ensemble: EnsembleTag, pair: &TestFunctionPair) -> f64 {
    let window = 200.0 / pair.delta;
    let f = |x: f64| pair.phi(x) * (limit_density(ensemble, x) - 1.0);
    pair.phi_hat_at_zero() + adaptive_simpson(&f, -window, window, 1e-9, 28)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson_rec(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
            + simpson_rec(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
    }
}

/// Histogram of sampled normalized angles against the limiting density.
pub fn histogram(
    ensemble: EnsembleTag,
    n: usize,
    samples: usize,
    bins: usize,
    x_max: f64,
    seed: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    if samples < 100 {
        return Err(Error::TooFewSamples { need: 100, got: samples });
    }
    let width = x_max / bins as f64;
    let counts: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let sample = sample_haar(ensemble, n, s)?;
            let mut local = vec![0usize; bins];
            for &v in &sample.angles {
                if v < x_max {
                    local[(v / width) as usize] += 1;
                }
            }
            Ok(local)
        })
        .try_reduce(
            || vec![0usize; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok((0..bins)
        .map(|i| {
            let center = (i as f64 + 0.5) * width;
            let empirical = counts[i] as f64 / (samples as f64 * width);
            (center, empirical, limit_density(ensemble, center))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_and_shape() {
        let s1 = sample_haar(EnsembleTag::U, 30, 7).unwrap();
        let s2 = sample_haar(EnsembleTag::U, 30, 7).unwrap();
        assert_eq!(s1.angles, s2.angles);
        assert_eq!(s1.angles.len(), 30);
        for w in s1.angles.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(*s1.angles.last().unwrap() <= 30.0);
        assert!(s1.angles[0] >= 0.0);
        let s3 = sample_haar(EnsembleTag::U, 30, 8).unwrap();
        assert_ne!(s1.angles, s3.angles);
    }

    #[test]
    fn size_bounds() {
        assert!(sample_haar(EnsembleTag::U, 1, 0).is_err());
        assert!(sample_haar(EnsembleTag::U, 129, 0).is_err());
    }

    #[test]
    fn unitarity_drift_small() {
        for (ens, n) in [
            (EnsembleTag::U, 24),
            (EnsembleTag::U, 64),
            (EnsembleTag::SOeven, 12),
            (EnsembleTag::SOeven, 48),
            (EnsembleTag::USp, 12),
            (EnsembleTag::USp, 48),
        ] {
            let m = sample_matrix_for_test(ens, n, 42).unwrap();
            let drift = m.unitarity_drift();
            assert!(drift <= 1e-10, "{ens} N={n} drift {drift}");
        }
    }

    #[test]
    fn angles_within_range_for_paired_ensembles() {
        for ens in [EnsembleTag::SOeven, EnsembleTag::USp] {
            let s = sample_haar(ens, 16, 3).unwrap();
            assert_eq!(s.angles.len(), 16);
            for &a in &s.angles {
                assert!((0.0..=16.0).contains(&a));
            }
        }
    }

    #[test]
    fn jacobi_matches_ql_on_hermitian_part() {
        let m = sample_matrix_for_test(EnsembleTag::USp, 6, 5).unwrap();
        let h = super::hermitian_part(&m);
        let (mut ev_j, _) = jacobi_hermitian(&h);
        ev_j.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ev_q = hermitian_eigenvalues(&h);
        for (a, b) in ev_j.iter().zip(&ev_q) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn so2_angle_is_uniform() {
        // SO(2): the single normalized angle is uniform on [0,1]; the mean
        // over k samples is 0.5 within 3 sigma = 3/(sqrt(12 k)).
        let k = 20_000u64;
        let mut acc = 0.0;
        for i in 0..k {
            let s = sample_haar(EnsembleTag::SOeven, 1, derive_seed(11, i)).unwrap();
            assert_eq!(s.angles.len(), 1);
            assert!((0.0..=1.0).contains(&s.angles[0]));
            acc += s.angles[0];
        }
        let mean = acc / k as f64;
        let three_sigma = 3.0 / (12.0f64 * k as f64).sqrt();
        assert!((mean - 0.5).abs() <= three_sigma, "mean {mean}, 3s {three_sigma}");
    }

    #[test]
    fn limit_density_values() {
        assert_eq!(limit_density(EnsembleTag::U, 3.3), 1.0);
        assert!(limit_density(EnsembleTag::USp, 0.0).abs() < 1e-12);
        assert!((limit_density(EnsembleTag::SOeven, 0.0) - 2.0).abs() < 1e-12);
        let expect = 1.0 + (std::f64::consts::PI / 2.0).sin() / (std::f64::consts::PI / 2.0);
        assert!((limit_density(EnsembleTag::SOeven, 0.25) - expect).abs() < 1e-12);
        // even extension
        assert_eq!(
            limit_density(EnsembleTag::USp, -1.3),
            limit_density(EnsembleTag::USp, 1.3)
        );
    }

    #[test]
    fn pairing_closed_forms() {
        let pair = TestFunctionPair::fejer(0.5).unwrap();
        assert!((limit_pairing(EnsembleTag::U, &pair).unwrap() - 1.0).abs() < 1e-15);
        assert!((limit_pairing(EnsembleTag::USp, &pair).unwrap() - 0.75).abs() < 1e-15);
        assert!((limit_pairing(EnsembleTag::SOeven, &pair).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn pairing_matches_quadrature() {
        for delta in [0.3, 0.5, 0.9] {
            let pair = TestFunctionPair::fejer(delta).unwrap();
            for ens in [EnsembleTag::U, EnsembleTag::SOeven, EnsembleTag::USp] {
                let closed = limit_pairing(ens, &pair).unwrap();
                let quad = quadrature_pairing(ens, &pair);
                assert!(
                    (closed - quad).abs() < 1e-6,
                    "{ens} delta={delta}: closed {closed} vs quad {quad}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_consistency_small() {
        // small but meaningful: N=20, 400 samples
        let pair = TestFunctionPair::fejer(0.9).unwrap();
        for ens in [EnsembleTag::U, EnsembleTag::SOeven, EnsembleTag::USp] {
            let (est, err) = empirical_one_level(ens, 20, 400, &pair, 123).unwrap();
            let limit = limit_pairing(ens, &pair).unwrap();
            assert!(
                (est - limit).abs() <= 3.0 * err + 0.1,
                "{ens}: est {est} +- {err} vs {limit}"
            );
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let pair = TestFunctionPair::fejer(0.5).unwrap();
        assert!(empirical_one_level(EnsembleTag::U, 10, 50, &pair, 1).is_err());
    }
}
