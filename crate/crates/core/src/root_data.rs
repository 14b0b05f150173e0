//! Classical root systems in epsilon-coordinates with exact rational
//! arithmetic: roots, coroots, Weyl groups as signed permutations,
//! dominance order, Kostant partition functions and their t-analogue,
//! and Weyl characters via the Freudenthal recursion.
//!
//! Coordinates: types B/C/D of rank n live in Q^n; type A of rank n is
//! realized inside GL_{n+1}, so the ambient dimension is n+1. All module
//! values are immutable after construction and all operations are pure.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::laurent::HalfLaurent;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CartanType {
    A,
    B,
    C,
    D,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CartanType::A => "A",
            CartanType::B => "B",
            CartanType::C => "C",
            CartanType::D => "D",
        };
        write!(f, "{}", s)
    }
}

/// Exact-rational vector in epsilon-coordinates.
pub type Vector = Vec<BigRational>;

/// A weight (or coweight) of the ambient lattice. The derived order is
/// lexicographic on coordinates, which refines the dominance order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Weight(pub Vec<BigRational>);

impl Weight {
    pub fn from_i64(v: &[i64]) -> Self {
        Weight(v.iter().map(|x| BigRational::from_integer(BigInt::from(*x))).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Weight(vec![BigRational::zero(); dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Weight {
        Weight(self.0.iter().map(|a| -a.clone()).collect())
    }

    pub fn scale_int(&self, k: i64) -> Weight {
        let k = BigRational::from_integer(BigInt::from(k));
        Weight(self.0.iter().map(|a| a * &k).collect())
    }

    /// Euclidean pairing in epsilon-coordinates.
    pub fn dot(&self, other: &Weight) -> BigRational {
        self.0
            .iter()
            .zip(&other.0)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect()
    }

    /// Deterministic key for hash maps (doubled coordinates must be integral).
    fn doubled_key(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|c| {
                let d = c * BigRational::from_integer(BigInt::from(2));
                if d.is_integer() {
                    d.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Signed permutation `w(e_j) = signs[j] * e_{perm[j]}` acting on the
/// ambient space. Type A uses the identity signs.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SignedPerm {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn apply(&self, v: &Weight) -> Weight {
        let mut out = vec![BigRational::zero(); v.0.len()];
        for (j, c) in v.0.iter().enumerate() {
            let s = BigRational::from_integer(BigInt::from(self.signs[j] as i64));
            out[self.perm[j]] = c * s;
        }
        Weight(out)
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let n = self.perm.len();
        let mut perm = vec![0usize; n];
        let mut signs = vec![1i8; n];
        for j in 0..n {
            perm[j] = self.perm[other.perm[j]];
            signs[j] = other.signs[j] * self.signs[other.perm[j]];
        }
        SignedPerm { perm, signs }
    }

    pub fn inverse(&self) -> SignedPerm {
        let n = self.perm.len();
        let mut perm = vec![0usize; n];
        let mut signs = vec![1i8; n];
        for j in 0..n {
            perm[self.perm[j]] = j;
            signs[self.perm[j]] = self.signs[j];
        }
        SignedPerm { perm, signs }
    }

    /// Determinant of the matrix: parity of the permutation times the
    /// product of signs.
    pub fn det(&self) -> i64 {
        let mut seen = vec![false; self.perm.len()];
        let mut parity = 1i64;
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                parity = -parity;
            }
        }
        let sign_prod: i64 = self.signs.iter().map(|s| *s as i64).product();
        parity * sign_prod
    }
}

/// A classical root datum: roots, coroots, rho, and the full Weyl group.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub cartan_type: CartanType,
    pub rank: usize,
    pub ambient_dim: usize,
    pub simple_roots: Vec<Weight>,
    pub positive_roots: Vec<Weight>,
    pub positive_coroots: Vec<Weight>,
    pub simple_coroots: Vec<Weight>,
    /// Half the sum of the positive roots.
    pub rho: Weight,
    /// Half the sum of the positive coroots.
    pub rho_check: Weight,
    pub weyl_elements: Vec<SignedPerm>,
}

fn coroot(alpha: &Weight) -> Weight {
    let norm2 = alpha.dot(alpha);
    let two = BigRational::from_integer(BigInt::from(2));
    Weight(alpha.0.iter().map(|c| c * &two / &norm2).collect())
}

fn e(i: usize, n: usize) -> Weight {
    let mut v = vec![BigRational::zero(); n];
    v[i] = BigRational::one();
    Weight(v)
}

/// Build the datum for a classical type at the given rank.
///
/// Supported: A with 1 <= rank <= 6 (inside GL_{rank+1}), B/C with
/// 1 <= rank <= 4, D with 2 <= rank <= 4. The Weyl group is generated from
/// the simple reflections to closure.
pub fn build_root_datum(cartan_type: CartanType, rank: usize) -> Result<RootDatum> {
    match cartan_type {
        CartanType::A => {
            if !(1..=6).contains(&rank) {
                return Err(Error::RankOutOfRange(format!("A{rank}: rank out of supported range 1..=6")));
            }
        }
        CartanType::B | CartanType::C => {
            if !(1..=4).contains(&rank) {
                return Err(Error::RankOutOfRange(format!(
                    "{cartan_type}{rank}: rank out of supported range 1..=4"
                )));
            }
        }
        CartanType::D => {
            if !(2..=4).contains(&rank) {
                return Err(Error::RankOutOfRange(format!("D{rank}: rank out of supported range 2..=4")));
            }
        }
    }
    let n = rank;
    let dim = if cartan_type == CartanType::A { n + 1 } else { n };

    let mut positive_roots: Vec<Weight> = Vec::new();
    let mut simple_roots: Vec<Weight> = Vec::new();
    match cartan_type {
        CartanType::A => {
            for i in 0..dim {
                for j in (i + 1)..dim {
                    positive_roots.push(e(i, dim).sub(&e(j, dim)));
                }
            }
            for i in 0..n {
                simple_roots.push(e(i, dim).sub(&e(i + 1, dim)));
            }
        }
        CartanType::B => {
            for i in 0..n {
                for j in (i + 1)..n {
                    positive_roots.push(e(i, dim).sub(&e(j, dim)));
                    positive_roots.push(e(i, dim).add(&e(j, dim)));
                }
            }
            for i in 0..n {
                positive_roots.push(e(i, dim));
            }
            for i in 0..n - 1 {
                simple_roots.push(e(i, dim).sub(&e(i + 1, dim)));
            }
            simple_roots.push(e(n - 1, dim));
        }
        CartanType::C => {
            for i in 0..n {
                for j in (i + 1)..n {
                    positive_roots.push(e(i, dim).sub(&e(j, dim)));
                    positive_roots.push(e(i, dim).add(&e(j, dim)));
                }
            }
            for i in 0..n {
                positive_roots.push(e(i, dim).scale_int(2));
            }
            for i in 0..n - 1 {
                simple_roots.push(e(i, dim).sub(&e(i + 1, dim)));
            }
            simple_roots.push(e(n - 1, dim).scale_int(2));
        }
        CartanType::D => {
            for i in 0..n {
                for j in (i + 1)..n {
                    positive_roots.push(e(i, dim).sub(&e(j, dim)));
                    positive_roots.push(e(i, dim).add(&e(j, dim)));
                }
            }
            for i in 0..n - 1 {
                simple_roots.push(e(i, dim).sub(&e(i + 1, dim)));
            }
            simple_roots.push(e(n - 2, dim).add(&e(n - 1, dim)));
        }
    }

    let positive_coroots: Vec<Weight> = positive_roots.iter().map(coroot).collect();
    let simple_coroots: Vec<Weight> = simple_roots.iter().map(coroot).collect();

    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut rho = Weight::zero(dim);
    for a in &positive_roots {
        rho = rho.add(a);
    }
    rho = Weight(rho.0.iter().map(|c| c * &half).collect());
    let mut rho_check = Weight::zero(dim);
    for a in &positive_coroots {
        rho_check = rho_check.add(a);
    }
    rho_check = Weight(rho_check.0.iter().map(|c| c * &half).collect());

    let weyl_elements = generate_weyl(&simple_roots, dim);

    Ok(RootDatum {
        cartan_type,
        rank,
        ambient_dim: dim,
        simple_roots,
        positive_roots,
        positive_coroots,
        simple_coroots,
        rho,
        rho_check,
        weyl_elements,
    })
}

/// The Langlands-dual datum: coroots become roots. A and D are self-dual,
/// B and C swap.
pub fn dual_datum(d: &RootDatum) -> Result<RootDatum> {
    let t = match d.cartan_type {
        CartanType::A => CartanType::A,
        CartanType::B => CartanType::C,
        CartanType::C => CartanType::B,
        CartanType::D => CartanType::D,
    };
    build_root_datum(t, d.rank)
}

/// Reflection in a root, as a signed permutation. Classical reflections in
/// epsilon-coordinates permute coordinates and flip signs, so the matrix is
/// recovered from images of the basis vectors.
fn reflection_as_signed_perm(alpha: &Weight, dim: usize) -> SignedPerm {
    let alpha_check = coroot(alpha);
    let mut perm = vec![0usize; dim];
    let mut signs = vec![1i8; dim];
    for j in 0..dim {
        let ej = e(j, dim);
        let c = ej.dot(&alpha_check);
        let img = ej.sub(&Weight(alpha.0.iter().map(|a| a * &c).collect()));
        // img must be +-e_k for a signed permutation
        let mut found = None;
        for (k, coord) in img.0.iter().enumerate() {
            if !coord.is_zero() {
                assert!(found.is_none(), "reflection image is not a signed basis vector");
                assert!(coord.abs().is_one());
                found = Some((k, if coord.is_positive() { 1i8 } else { -1i8 }));
            }
        }
        let (k, s) = found.expect("reflection image is zero");
        perm[j] = k;
        signs[j] = s;
    }
    SignedPerm { perm, signs }
}

/// Breadth-first closure under the simple reflections.
fn generate_weyl(simple_roots: &[Weight], dim: usize) -> Vec<SignedPerm> {
    let gens: Vec<SignedPerm> =
        simple_roots.iter().map(|a| reflection_as_signed_perm(a, dim)).collect();
    let mut seen: HashMap<SignedPerm, ()> = HashMap::new();
    let id = SignedPerm::identity(dim);
    let mut queue = vec![id.clone()];
    seen.insert(id, ());
    while let Some(w) = queue.pop() {
        for g in &gens {
            let wg = g.compose(&w);
            if !seen.contains_key(&wg) {
                seen.insert(wg.clone(), ());
                queue.push(wg);
            }
        }
    }
    let mut all: Vec<SignedPerm> = seen.into_keys().collect();
    all.sort_by(|a, b| (&a.perm, &a.signs).cmp(&(&b.perm, &b.signs)));
    all
}

impl RootDatum {
    /// The classical order of the Weyl group for this type and rank.
    pub fn expected_weyl_order(&self) -> u64 {
        let n = self.rank as u32;
        let fact = |m: u32| -> u64 { (1..=m as u64).product::<u64>().max(1) };
        match self.cartan_type {
            CartanType::A => fact(n + 1),
            CartanType::B | CartanType::C => 2u64.pow(n) * fact(n),
            CartanType::D => 2u64.pow(n - 1) * fact(n),
        }
    }

    /// `<lambda, alpha^vee> >= 0` for all simple coroots.
    pub fn is_dominant(&self, lambda: &Weight) -> bool {
        self.simple_coroots.iter().all(|ac| !lambda.dot(ac).is_negative())
    }

    /// Unique dominant element of the Weyl orbit.
    pub fn dominant_representative(&self, mu: &Weight) -> Weight {
        match self.cartan_type {
            CartanType::A => {
                let mut v = mu.0.clone();
                v.sort_by(|a, b| b.cmp(a));
                Weight(v)
            }
            CartanType::B | CartanType::C => {
                let mut v: Vec<BigRational> = mu.0.iter().map(|c| c.abs()).collect();
                v.sort_by(|a, b| b.cmp(a));
                Weight(v)
            }
            CartanType::D => {
                let neg = mu.0.iter().filter(|c| c.is_negative()).count();
                let mut v: Vec<BigRational> = mu.0.iter().map(|c| c.abs()).collect();
                v.sort_by(|a, b| b.cmp(a));
                if neg % 2 == 1 {
                    let last = v.len() - 1;
                    v[last] = -v[last].clone();
                }
                Weight(v)
            }
        }
    }

    /// Full Weyl orbit of a weight, deduplicated.
    pub fn orbit(&self, mu: &Weight) -> Vec<Weight> {
        let mut seen: HashMap<Vec<i64>, Weight> = HashMap::new();
        for w in &self.weyl_elements {
            let img = w.apply(mu);
            if let Some(key) = img.doubled_key() {
                seen.entry(key).or_insert(img);
            } else {
                panic!("orbit: weight coordinates are not half-integral");
            }
        }
        let mut v: Vec<Weight> = seen.into_values().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Coefficients of `v` on the simple coroots, when `v` lies in their
    /// rational span; `None` otherwise.
    pub fn simple_coroot_coordinates(&self, v: &Weight) -> Option<Vec<BigRational>> {
        solve_in_span(&self.simple_coroots, v)
    }

    /// Coefficients of `v` on the simple roots, when in their span.
    pub fn simple_root_coordinates(&self, v: &Weight) -> Option<Vec<BigRational>> {
        solve_in_span(&self.simple_roots, v)
    }

    /// Dominance order on the coweight lattice: `mu <= lambda` iff
    /// `lambda - mu` is a nonnegative combination of simple coroots.
    pub fn dominance_leq(&self, mu: &Weight, lambda: &Weight) -> bool {
        match self.simple_coroot_coordinates(&lambda.sub(mu)) {
            Some(coords) => coords.iter().all(|c| !c.is_negative()),
            None => false,
        }
    }
}

/// Solve `v = sum c_i basis_i` exactly; `None` if `v` is outside the span.
fn solve_in_span(basis: &[Weight], v: &Weight) -> Option<Vec<BigRational>> {
    let dim = v.dim();
    let k = basis.len();
    // Augmented matrix, columns = basis vectors.
    let mut m: Vec<Vec<BigRational>> = (0..dim)
        .map(|r| {
            let mut row: Vec<BigRational> = basis.iter().map(|b| b.0[r].clone()).collect();
            row.push(v.0[r].clone());
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..k {
        if let Some(p) = (row..dim).find(|&r| !m[r][col].is_zero()) {
            m.swap(row, p);
            let inv = m[row][col].recip();
            for c in col..=k {
                m[row][c] = &m[row][c] * &inv;
            }
            for r in 0..dim {
                if r != row && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in col..=k {
                        let sub = &m[row][c] * &f;
                        m[r][c] = &m[r][c] - sub;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
    }
    // Consistency: residual rows must have zero RHS.
    for r in row..dim {
        if !m[r][k].is_zero() {
            return None;
        }
    }
    let mut coords = vec![BigRational::zero(); k];
    for (i, &col) in pivot_cols.iter().enumerate() {
        coords[col] = m[i][k].clone();
    }
    Some(coords)
}

/// Number of ways to write `kappa` as a nonnegative-integer combination of
/// the positive coroots of `d`. Returns 0 off the cone.
pub fn kostant_partition(d: &RootDatum, kappa: &Weight) -> u64 {
    let p = q_kostant(d, kappa);
    p.eval_rational(&BigRational::one())
        .expect("t-polynomial has integer exponents")
        .to_integer()
        .to_u64()
        .expect("partition count fits in u64")
}

/// The t-analogue: `sum over decompositions t^(total number of coroots used)`.
/// Zero polynomial iff `kappa` is infeasible; the unit for `kappa = 0`.
pub fn q_kostant(d: &RootDatum, kappa: &Weight) -> HalfLaurent {
    q_graded_partition(&d.positive_coroots, &d.simple_coroots, kappa)
}

/// Length-graded vector partition function over an arbitrary positive
/// system, by dynamic programming in a fixed order. `simple` must be a
/// basis of the span with every `positives` entry a nonnegative integer
/// combination; height (coefficient sum) strictly decreases along the
/// recursion, which bounds it.
pub fn q_graded_partition(positives: &[Weight], simple: &[Weight], kappa: &Weight) -> HalfLaurent {
    let mut memo = HashMap::new();
    q_graded_partition_cached(positives, simple, kappa, &mut memo)
}

/// As `q_graded_partition`, with a caller-owned memo table shared across
/// queries over the same positive system.
pub fn q_graded_partition_cached(
    positives: &[Weight],
    simple: &[Weight],
    kappa: &Weight,
    memo: &mut HashMap<(usize, Vec<i64>), HalfLaurent>,
) -> HalfLaurent {
    // Height functional: sum of simple coordinates.
    let coords = match solve_in_span(simple, kappa) {
        Some(c) => c,
        None => return HalfLaurent::zero(),
    };
    if coords.iter().any(|c| !c.is_integer() || c.is_negative()) {
        return HalfLaurent::zero();
    }
    let heights: Vec<u64> = positives
        .iter()
        .map(|p| {
            let c = solve_in_span(simple, p).expect("positive vector outside simple span");
            let h: BigRational = c.iter().fold(BigRational::zero(), |acc, x| acc + x);
            h.to_integer().to_u64().expect("positive height")
        })
        .collect();
    fn rec(
        positives: &[Weight],
        heights: &[u64],
        simple: &[Weight],
        idx: usize,
        kappa: &Weight,
        memo: &mut HashMap<(usize, Vec<i64>), HalfLaurent>,
    ) -> HalfLaurent {
        if kappa.is_zero() {
            return HalfLaurent::one();
        }
        if idx == positives.len() {
            return HalfLaurent::zero();
        }
        let key = (idx, kappa.doubled_key().expect("half-integral kappa"));
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        // Remaining height bound on the multiplicity of this coroot.
        let coords = solve_in_span(simple, kappa);
        let result = match coords {
            None => HalfLaurent::zero(),
            Some(c) => {
                if c.iter().any(|x| x.is_negative() || !x.is_integer()) {
                    HalfLaurent::zero()
                } else {
                    let total: BigRational = c.iter().fold(BigRational::zero(), |acc, x| acc + x);
                    let total = total.to_integer().to_u64().unwrap_or(0);
                    let cmax = total / heights[idx].max(1);
                    let mut acc = HalfLaurent::zero();
                    let mut residue = kappa.clone();
                    for mult in 0..=cmax {
                        let sub = rec(positives, heights, simple, idx + 1, &residue, memo);
                        if !sub.is_zero() {
                            acc.add_assign(&sub.shift_doubled(2 * mult as i64));
                        }
                        residue = residue.sub(&positives[idx]);
                    }
                    acc
                }
            }
        };
        memo.insert(key, result.clone());
        result
    }
    rec(positives, &heights, simple, 0, kappa, memo)
}

/// Dominant weights `mu <= lambda` (coroot dominance order), `lambda` itself
/// included. Enumerates the W-invariant sup-norm box, which contains the
/// convex hull of the orbit of `lambda`.
pub fn dominant_weights_below(d: &RootDatum, lambda: &Weight) -> Vec<Weight> {
    let bound = lambda
        .0
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigRational::zero);
    let bound = bound.ceil().to_integer().to_i64().expect("small bound");
    let dim = d.ambient_dim;
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    enumerate_box(&mut cur, 0, bound, &mut |coords| {
        let mu = Weight::from_i64(coords);
        if d.is_dominant(&mu) && d.dominance_leq(&mu, lambda) {
            out.push(mu);
        }
    });
    // Deterministic order: decreasing height of lambda - mu, then lex.
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

fn enumerate_box(cur: &mut Vec<i64>, idx: usize, bound: i64, f: &mut impl FnMut(&[i64])) {
    if idx == cur.len() {
        f(cur);
        return;
    }
    for v in -bound..=bound {
        cur[idx] = v;
        enumerate_box(cur, idx + 1, bound, f);
    }
}

/// Key for the weight-multiplicity memo table.
type CharKey = (CartanType, usize, Vec<i64>);

static CHAR_MEMO: Mutex<Option<HashMap<CharKey, Vec<(Vec<i64>, u64)>>>> = Mutex::new(None);

/// Weight multiplicities of the irreducible highest-weight representation,
/// by the Freudenthal recursion:
///
/// `(|lambda+rho|^2 - |mu+rho|^2) m(mu) = 2 sum_{a>0} sum_{k>=1} m(mu+ka) <mu+ka, a>`
///
/// Only dominant weights are tabulated; a general multiplicity is read off
/// the dominant representative. Results are memoized process-wide; the table
/// is only ever extended, so concurrent readers see identical values.
pub fn weyl_character(d: &RootDatum, lambda: &Weight) -> Result<Vec<(Weight, u64)>> {
    if !d.is_dominant(lambda) {
        return Err(Error::NonDominant(format!("{:?}", lambda)));
    }
    let key: CharKey = (
        d.cartan_type,
        d.rank,
        lambda.doubled_key().ok_or_else(|| Error::Invalid("non half-integral weight".into()))?,
    );
    {
        let guard = CHAR_MEMO.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(hit) = map.get(&key) {
                return Ok(hit
                    .iter()
                    .map(|(v, m)| (Weight(v.iter().map(|x| BigRational::new(BigInt::from(*x), BigInt::from(2))).collect()), *m))
                    .collect());
            }
        }
    }

    let candidates = dominant_weights_in_rep(d, lambda);
    let lr = lambda.add(&d.rho);
    let lr2 = lr.dot(&lr);
    let two = BigRational::from_integer(BigInt::from(2));

    // Sorted by decreasing height of lambda - mu is not needed; we iterate
    // candidates ordered so that higher weights come first.
    let mut mults: HashMap<Vec<i64>, BigRational> = HashMap::new();
    let lambda_key = lambda.doubled_key().unwrap();
    for mu in &candidates {
        let mu_key = mu.doubled_key().unwrap();
        if mu_key == lambda_key {
            mults.insert(mu_key, BigRational::one());
            continue;
        }
        let mr = mu.add(&d.rho);
        let denom = &lr2 - mr.dot(&mr);
        if denom.is_zero() {
            mults.insert(mu_key, BigRational::zero());
            continue;
        }
        let mut rhs = BigRational::zero();
        for alpha in &d.positive_roots {
            let mut nu = mu.add(alpha);
            let mut k = 1u64;
            loop {
                let dom = d.dominant_representative(&nu);
                let dom_key = dom.doubled_key().unwrap();
                match mults.get(&dom_key) {
                    Some(m) if !m.is_zero() => {
                        rhs += m * nu.dot(alpha);
                    }
                    _ => {
                        // Outside the support once we leave the orbit box.
                        if !in_hull_bound(lambda, &dom) {
                            break;
                        }
                    }
                }
                nu = nu.add(alpha);
                k += 1;
                if k > 512 {
                    break; // defensive; supports here are tiny
                }
            }
        }
        let m = rhs * &two / denom;
        mults.insert(mu_key, m);
    }

    let mut out: Vec<(Weight, u64)> = Vec::new();
    let mut stored: Vec<(Vec<i64>, u64)> = Vec::new();
    for mu in &candidates {
        let mu_key = mu.doubled_key().unwrap();
        let m = mults.get(&mu_key).cloned().unwrap_or_else(BigRational::zero);
        if m.is_zero() {
            continue;
        }
        assert!(m.is_integer() && m.is_positive(), "Freudenthal produced a non-positive-integer multiplicity");
        let mu64 = m.to_integer().to_u64().unwrap();
        out.push((mu.clone(), mu64));
        stored.push((mu_key, mu64));
    }

    let mut guard = CHAR_MEMO.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(key, stored);
    Ok(out)
}

/// Sup-norm containment test for the convex hull of the orbit of lambda.
fn in_hull_bound(lambda: &Weight, mu: &Weight) -> bool {
    let lm = lambda.0.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero);
    let mm = mu.0.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero);
    mm <= lm
}

/// Dominant candidates for the support of V_lambda, highest first:
/// dominant mu with `lambda - mu` a nonnegative-integer combination of
/// simple roots, ordered by increasing depth below lambda.
fn dominant_weights_in_rep(d: &RootDatum, lambda: &Weight) -> Vec<Weight> {
    let bound = lambda
        .0
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigRational::zero)
        .ceil()
        .to_integer()
        .to_i64()
        .expect("small bound");
    let dim = d.ambient_dim;
    let mut out: Vec<(BigRational, Weight)> = Vec::new();
    let mut cur = vec![0i64; dim];
    let half_grid = lambda.0.iter().any(|c| !c.is_integer());
    // Weights of V_lambda lie in lambda + root lattice; for half-integral
    // lambda shift the integer box by lambda.
    enumerate_box(&mut cur, 0, bound + 1, &mut |coords| {
        let mu = if half_grid {
            Weight(
                coords
                    .iter()
                    .zip(&lambda.0)
                    .map(|(c, l)| BigRational::from_integer(BigInt::from(*c)) + (l - l.floor()))
                    .collect(),
            )
        } else {
            Weight::from_i64(coords)
        };
        if !in_hull_bound(lambda, &mu) || !d.is_dominant(&mu) {
            return;
        }
        if let Some(cs) = d.simple_root_coordinates(&lambda.sub(&mu)) {
            if cs.iter().all(|c| c.is_integer() && !c.is_negative()) {
                let depth: BigRational = cs.iter().fold(BigRational::zero(), |a, b| a + b);
                out.push((depth, mu));
            }
        }
    });
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1 .0.cmp(&b.1 .0)));
    out.into_iter().map(|(_, w)| w).collect()
}

/// Dimension by the Weyl product formula
/// `prod_{a>0} <lambda+rho, a^vee> / <rho, a^vee>`.
pub fn weyl_dim(d: &RootDatum, lambda: &Weight) -> Result<BigInt> {
    if !d.is_dominant(lambda) {
        return Err(Error::NonDominant(format!("{:?}", lambda)));
    }
    let lr = lambda.add(&d.rho);
    let mut num = BigRational::one();
    let mut den = BigRational::one();
    for ac in &d.positive_coroots {
        num *= lr.dot(ac);
        den *= d.rho.dot(ac);
    }
    let v = num / den;
    assert!(v.is_integer(), "Weyl dimension is not an integer");
    Ok(v.to_integer())
}

/// `max_i |a_i(lambda)|` over the coordinates in the given basis, maximized
/// over the Weyl orbit. Errors on a degenerate basis.
pub fn truncation_norm(d: &RootDatum, basis: &[Weight], lambda: &Weight) -> Result<BigRational> {
    if basis.len() != d.ambient_dim {
        return Err(Error::DegenerateBasis);
    }
    let mut best = BigRational::zero();
    for w in &d.weyl_elements {
        let img = w.apply(lambda);
        let coords = solve_full_basis(basis, &img)?;
        for c in coords {
            let a = c.abs();
            if a > best {
                best = a;
            }
        }
    }
    Ok(best)
}

fn solve_full_basis(basis: &[Weight], v: &Weight) -> Result<Vec<BigRational>> {
    match solve_in_span(basis, v) {
        Some(c) => {
            // span must be full: check reconstruction
            let mut rec = Weight::zero(v.dim());
            for (ci, b) in c.iter().zip(basis) {
                rec = rec.add(&Weight(b.0.iter().map(|x| x * ci).collect()));
            }
            if &rec == v {
                Ok(c)
            } else {
                Err(Error::DegenerateBasis)
            }
        }
        None => Err(Error::DegenerateBasis),
    }
}

/// Standard epsilon-basis of the ambient space.
pub fn standard_basis(dim: usize) -> Vec<Weight> {
    (0..dim).map(|i| e(i, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(t: CartanType, n: usize) -> RootDatum {
        build_root_datum(t, n).unwrap()
    }

    #[test]
    fn smallest_type_a() {
        let d = datum(CartanType::A, 1);
        assert_eq!(d.positive_roots.len(), 1);
        assert_eq!(d.weyl_elements.len(), 2);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(d.rho.0, vec![half.clone(), -half]);
    }

    #[test]
    fn b2_and_d4_counts() {
        let b2 = datum(CartanType::B, 2);
        assert_eq!(b2.positive_roots.len(), 4);
        assert_eq!(b2.weyl_elements.len(), 8);
        let d4 = datum(CartanType::D, 4);
        assert_eq!(d4.positive_roots.len(), 12);
        assert_eq!(d4.weyl_elements.len(), 192);
    }

    #[test]
    fn weyl_orders_match_closure() {
        for (t, n) in [
            (CartanType::A, 2),
            (CartanType::A, 3),
            (CartanType::B, 3),
            (CartanType::C, 2),
            (CartanType::C, 3),
            (CartanType::D, 2),
            (CartanType::D, 3),
        ] {
            let d = datum(t, n);
            assert_eq!(d.weyl_elements.len() as u64, d.expected_weyl_order(), "{t}{n}");
        }
    }

    #[test]
    fn rank_bounds_error() {
        assert!(build_root_datum(CartanType::B, 5).is_err());
        assert!(build_root_datum(CartanType::D, 1).is_err());
        assert!(build_root_datum(CartanType::A, 7).is_err());
    }

    #[test]
    fn weyl_group_closed_and_permutes_roots() {
        for (t, n) in [(CartanType::B, 2), (CartanType::C, 2), (CartanType::A, 2), (CartanType::D, 3)] {
            let d = datum(t, n);
            let mut all_roots: Vec<Weight> =
                d.positive_roots.iter().cloned().chain(d.positive_roots.iter().map(|a| a.neg())).collect();
            all_roots.sort_by(|a, b| a.0.cmp(&b.0));
            for w in &d.weyl_elements {
                for a in &d.positive_roots {
                    let img = w.apply(a);
                    assert!(all_roots.binary_search_by(|x| x.0.cmp(&img.0)).is_ok());
                }
                // inverse closure
                let wi = w.inverse();
                assert!(d.weyl_elements.contains(&wi));
            }
            // pairwise closure for moderate orders
            if d.weyl_elements.len() <= 64 {
                for u in &d.weyl_elements {
                    for v in &d.weyl_elements {
                        assert!(d.weyl_elements.contains(&u.compose(v)));
                    }
                }
            }
        }
    }

    #[test]
    fn rho_pairs_to_one_with_simple_coroots() {
        for (t, n) in [
            (CartanType::A, 3),
            (CartanType::B, 3),
            (CartanType::C, 3),
            (CartanType::D, 4),
        ] {
            let d = datum(t, n);
            for ac in &d.simple_coroots {
                assert!(d.rho.dot(ac).is_one());
            }
        }
    }

    #[test]
    fn positive_roots_are_nonneg_simple_combinations() {
        for (t, n) in [(CartanType::B, 4), (CartanType::C, 4), (CartanType::D, 4), (CartanType::A, 4)] {
            let d = datum(t, n);
            for a in &d.positive_roots {
                let c = d.simple_root_coordinates(a).expect("in span");
                assert!(c.iter().all(|x| x.is_integer() && !x.is_negative()));
            }
            for ac in &d.positive_coroots {
                let c = d.simple_coroot_coordinates(ac).expect("in span");
                assert!(c.iter().all(|x| x.is_integer() && !x.is_negative()));
            }
        }
    }

    #[test]
    fn kostant_examples() {
        let a2 = datum(CartanType::A, 2);
        // kappa = alpha1^vee + alpha2^vee = (1,0,-1): two decompositions.
        let kappa = Weight::from_i64(&[1, 0, -1]);
        assert_eq!(kostant_partition(&a2, &kappa), 2);
        let q = q_kostant(&a2, &kappa);
        // t + t^2
        let mut expect = HalfLaurent::monomial_int(1, BigRational::one());
        expect.add_assign(&HalfLaurent::monomial_int(2, BigRational::one()));
        assert_eq!(q, expect);

        assert_eq!(kostant_partition(&a2, &Weight::zero(3)), 1);
        let neg = Weight::from_i64(&[-1, 1, 0]);
        assert_eq!(kostant_partition(&a2, &neg), 0);
    }

    #[test]
    fn q_kostant_matches_count_at_one() {
        let b2 = datum(CartanType::B, 2);
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                let kappa = Weight::from_i64(&[x, y]);
                let q = q_kostant(&b2, &kappa);
                let total = q.eval_rational(&BigRational::one()).unwrap();
                assert_eq!(total.to_integer().to_u64().unwrap(), kostant_partition(&b2, &kappa));
                if !kappa.is_zero() && !q.is_zero() {
                    assert!(q.min_doubled_exponent().unwrap() >= 2, "lowest power >= 1 when kappa != 0");
                }
            }
        }
    }

    #[test]
    fn q_kostant_supported_exactly_on_cone() {
        // brute-force support check on a box
        let c2 = datum(CartanType::C, 2);
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                let kappa = Weight::from_i64(&[x, y]);
                let coords = c2.simple_coroot_coordinates(&kappa);
                let feasible = matches!(coords, Some(c) if c.iter().all(|v| v.is_integer() && !v.is_negative()));
                assert_eq!(kostant_partition(&c2, &kappa) > 0 || kappa.is_zero(), feasible || kappa.is_zero());
                if !feasible {
                    assert_eq!(kostant_partition(&c2, &kappa), 0);
                }
            }
        }
    }

    #[test]
    fn character_of_zero_weight_is_trivial() {
        let b2 = datum(CartanType::B, 2);
        let ch = weyl_character(&b2, &Weight::zero(2)).unwrap();
        assert_eq!(ch.len(), 1);
        assert!(ch[0].0.is_zero());
        assert_eq!(ch[0].1, 1);
    }

    #[test]
    fn a1_fundamental_weights() {
        let a1 = datum(CartanType::A, 1);
        let lam = Weight::from_i64(&[1, 0]);
        let ch = weyl_character(&a1, &lam).unwrap();
        // single dominant orbit {(1,0),(0,1)} of multiplicity 1
        assert_eq!(ch.len(), 1);
        let total: u64 = ch.iter().map(|(w, m)| m * a1.orbit(w).len() as u64).sum();
        assert_eq!(total, 2);
        assert_eq!(weyl_dim(&a1, &lam).unwrap(), BigInt::from(2));
        // dim of n * fundamental is n+1
        for n in 1..=5i64 {
            let lam = Weight::from_i64(&[n, 0]);
            assert_eq!(weyl_dim(&a1, &lam).unwrap(), BigInt::from(n + 1));
        }
    }

    #[test]
    fn standard_reps_of_rank_two() {
        let b2 = datum(CartanType::B, 2);
        let ch = weyl_character(&b2, &Weight::from_i64(&[1, 0])).unwrap();
        let total: u64 = ch.iter().flat_map(|(w, m)| std::iter::repeat(*m).take(b2.orbit(w).len() as usize)).sum();
        // 5 weights, each multiplicity 1
        let size: u64 = ch.iter().map(|(w, m)| m * b2.orbit(w).len() as u64).sum();
        assert_eq!(size, 5);
        assert_eq!(total, 5);
        assert_eq!(weyl_dim(&b2, &Weight::from_i64(&[1, 0])).unwrap(), BigInt::from(5));
        let c2 = datum(CartanType::C, 2);
        assert_eq!(weyl_dim(&c2, &Weight::from_i64(&[1, 0])).unwrap(), BigInt::from(4));
    }

    #[test]
    fn freudenthal_matches_alternating_sum_division() {
        // rank <= 2 exhaustive oracle: dim check against the product formula
        // plus Weyl-invariance of multiplicities.
        for (t, n) in [(CartanType::A, 2), (CartanType::B, 2), (CartanType::C, 2)] {
            let d = datum(t, n);
            for a in 0..=2i64 {
                for b in 0..=a {
                    let mut coords = vec![0i64; d.ambient_dim];
                    coords[0] = a;
                    coords[1] = b;
                    let lam = Weight::from_i64(&coords);
                    if !d.is_dominant(&lam) {
                        continue;
                    }
                    let ch = weyl_character(&d, &lam).unwrap();
                    let size: BigInt = ch
                        .iter()
                        .map(|(w, m)| BigInt::from(m * d.orbit(w).len() as u64))
                        .sum();
                    assert_eq!(size, weyl_dim(&d, &lam).unwrap(), "{t}{n} lambda={:?}", lam);
                }
            }
        }
    }

    #[test]
    fn truncation_norm_examples() {
        let a1 = datum(CartanType::A, 1);
        let basis = standard_basis(2);
        let lam = Weight::from_i64(&[3, -3]);
        assert_eq!(truncation_norm(&a1, &basis, &lam).unwrap(), BigRational::from_integer(BigInt::from(3)));
        assert!(truncation_norm(&a1, &basis, &Weight::zero(2)).unwrap().is_zero());

        let b2 = datum(CartanType::B, 2);
        let lam = Weight::from_i64(&[2, 1]);
        assert_eq!(
            truncation_norm(&b2, &standard_basis(2), &lam).unwrap(),
            BigRational::from_integer(BigInt::from(2))
        );
    }

    #[test]
    fn truncation_norm_weyl_invariant_and_subadditive() {
        let b2 = datum(CartanType::B, 2);
        let basis = standard_basis(2);
        let lam = Weight::from_i64(&[2, 1]);
        let mu = Weight::from_i64(&[1, 1]);
        let nl = truncation_norm(&b2, &basis, &lam).unwrap();
        for w in &b2.weyl_elements {
            assert_eq!(truncation_norm(&b2, &basis, &w.apply(&lam)).unwrap(), nl);
        }
        let nm = truncation_norm(&b2, &basis, &mu).unwrap();
        let ns = truncation_norm(&b2, &basis, &lam.add(&mu)).unwrap();
        assert!(ns <= nl + nm);
    }

    #[test]
    fn degenerate_basis_errors() {
        let b2 = datum(CartanType::B, 2);
        let bad = vec![Weight::from_i64(&[1, 0]), Weight::from_i64(&[2, 0])];
        assert!(truncation_norm(&b2, &bad, &Weight::from_i64(&[1, 1])).is_err());
    }

    #[test]
    fn non_dominant_rejected() {
        let b2 = datum(CartanType::B, 2);
        assert!(weyl_character(&b2, &Weight::from_i64(&[0, 1])).is_err());
        assert!(weyl_dim(&b2, &Weight::from_i64(&[-1, 0])).is_err());
    }
}
