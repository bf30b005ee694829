// SPDX-License-Identifier: Apache-2.0

//! Tangent-space sampling on secant varieties of `ℚ^m ⊗ ℚ^m ⊗ ℚ^m` and the
//! spaces 𝒫, 𝒬, 𝒬′, ℛ, ℒ built from a sample point and three fixed matrices.
//!
//! Vectors of `(ℚ^m)^{⊗3}` use the index `(i·m + j)·m + k`.

use crate::error::{Error, Result};
use crate::linalg::{self, SparseSpan, SparseVec};
use crate::rational::{q, Q};
use crate::tensor_core::{MatrixQ, Tensor3};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Affine dimension `min{r(3m−2), m³}` of the r-th secant of the Segre variety.
pub fn secant_dim_formula(m: u64, r: u64) -> u64 {
    (r * (3 * m - 2)).min(m * m * m)
}

/// The formula is quoted for `m ≥ 4` only.
pub fn secant_formula_in_stated_range(m: u64) -> bool {
    m >= 4
}

fn random_int_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<i64> {
    (0..m).map(|_| rng.gen_range(-10..=10)).collect()
}

/// Rank of the `3rm × m³` matrix spanned by `q⊗y⊗z`, `x⊗q⊗z`, `x⊗y⊗q` at one random point.
fn terracini_trial(m: usize, r: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[Vec<i64>; 3]> = (0..r)
        .map(|_| [random_int_vec(&mut rng, m), random_int_vec(&mut rng, m), random_int_vec(&mut rng, m)])
        .collect();
    let n = m * m * m;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(3 * r * m);
    for [x, y, z] in &pts {
        for s in 0..m {
            for slot in 0..3 {
                let mut row = vec![BigInt::zero(); n];
                for i in 0..m {
                    for j in 0..m {
                        for k in 0..m {
                            let f = |v: &Vec<i64>, idx: usize, which: usize| {
                                if which == slot {
                                    i64::from(idx == s)
                                } else {
                                    v[idx]
                                }
                            };
                            let val = f(x, i, 0) * f(y, j, 1) * f(z, k, 2);
                            if val != 0 {
                                row[(i * m + j) * m + k] = BigInt::from(val);
                            }
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    linalg::bareiss_rank(rows)
}

/// Largest sampled tangent-span rank over `trials` seeded points.
pub fn terracini_dimension(m: usize, r: usize, trials: usize, seed: u64) -> Result<usize> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let formula = secant_dim_formula(m as u64, r as u64) as usize;
    let mut best = 0;
    for t in 0..trials {
        best = best.max(terracini_trial(m, r, seed.wrapping_add(t as u64)));
        if best >= formula {
            break;
        }
    }
    Ok(best)
}

/// `p = (x^α, y^α, z^α, ξ^α, η^α, τ^α)_{α<r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePoint {
    pub m: usize,
    pub r: usize,
    pub x: Vec<Vec<Q>>,
    pub y: Vec<Vec<Q>>,
    pub z: Vec<Vec<Q>>,
    pub xi: Vec<Vec<Q>>,
    pub eta: Vec<Vec<Q>>,
    pub tau: Vec<Vec<Q>>,
}

impl SamplePoint {
    pub fn new(
        m: usize,
        x: Vec<Vec<Q>>,
        y: Vec<Vec<Q>>,
        z: Vec<Vec<Q>>,
        xi: Vec<Vec<Q>>,
        eta: Vec<Vec<Q>>,
        tau: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let r = x.len();
        for part in [&x, &y, &z, &xi, &eta, &tau] {
            if part.len() != r || part.iter().any(|v| v.len() != m) {
                return Err(Error::DimMismatch(format!("expected {r} vectors of length {m}")));
            }
        }
        Ok(Self { m, r, x, y, z, xi, eta, tau })
    }

    /// Integer coordinates drawn uniformly from `[−10, 10]`.
    pub fn random(m: usize, r: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut draw = || -> Vec<Vec<Q>> {
            (0..r).map(|_| random_int_vec(rng, m).into_iter().map(q).collect()).collect()
        };
        let (x, y, z, xi, eta, tau) = (draw(), draw(), draw(), draw(), draw(), draw());
        Self { m, r, x, y, z, xi, eta, tau }
    }
}

/// The matrices `Ψ_A, Ψ_B, Ψ_C` with their rank ratios and coordinate complements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceProfile {
    pub m: usize,
    pub psi: [MatrixQ; 3],
    pub delta: [Q; 3],
    pub big_delta: Q,
    /// A basis of each column space.
    pub images: [Vec<Vec<Q>>; 3],
    /// Coordinate indices spanning a complement of each column space.
    pub complements: [Vec<usize>; 3],
}

fn big_delta(d: &[Q; 3]) -> Q {
    let [a, b, c] = d;
    Q::one() - a * b - a * c - b * c + q(2) * a * b * c
}

fn column_basis(psi: &MatrixQ) -> Vec<Vec<Q>> {
    let t = psi.transpose();
    let cols = t.row_vectors();
    linalg::independent_rows(&cols)
        .into_iter()
        .map(|j| (0..psi.rows()).map(|i| psi.get(i, j)).collect())
        .collect()
}

impl SubspaceProfile {
    pub fn new(psi_a: MatrixQ, psi_b: MatrixQ, psi_c: MatrixQ) -> Result<Self> {
        let m = psi_a.rows();
        for p in [&psi_a, &psi_b, &psi_c] {
            if p.dims() != [m, m] {
                return Err(Error::DimMismatch(format!("Ψ must be {m}×{m}, got {:?}", p.dims())));
            }
        }
        let psi = [psi_a, psi_b, psi_c];
        let images = psi.clone().map(|p| column_basis(&p));
        let delta = images.clone().map(|b| Q::new(BigInt::from(b.len()), BigInt::from(m.max(1))));
        let complements = images.clone().map(|basis| {
            let mut span = SparseSpan::new();
            for v in &basis {
                span.insert(&linalg::to_sparse(v));
            }
            (0..m)
                .filter(|&i| span.insert(&SparseVec::from([(i, Q::one())])))
                .collect()
        });
        let big_delta = big_delta(&delta);
        Ok(Self { m, psi, delta, big_delta, images, complements })
    }

    pub fn zero(m: usize) -> Self {
        Self::new(MatrixQ::zeros(m, m), MatrixQ::zeros(m, m), MatrixQ::zeros(m, m)).expect("square")
    }

    pub fn identity(m: usize) -> Self {
        Self::new(MatrixQ::identity(m), MatrixQ::identity(m), MatrixQ::identity(m)).expect("square")
    }

    /// Random integer matrices `U·V` with inner dimensions `ranks`, redrawn until the rank is met.
    pub fn random_with_ranks(m: usize, ranks: [usize; 3], rng: &mut ChaCha8Rng) -> Result<Self> {
        if ranks.iter().any(|&k| k > m) {
            return Err(Error::Precondition(format!("ranks {ranks:?} exceed m = {m}")));
        }
        let mut mats = Vec::with_capacity(3);
        for &k in &ranks {
            loop {
                let u: Vec<Vec<i64>> = (0..m).map(|_| (0..k).map(|_| rng.gen_range(-3..=3)).collect()).collect();
                let v: Vec<Vec<i64>> = (0..k).map(|_| (0..m).map(|_| rng.gen_range(-3..=3)).collect()).collect();
                let entries = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| {
                    ((i, j), q((0..k).map(|l| u[i][l] * v[l][j]).sum()))
                });
                let p = MatrixQ::from_entries(m, m, entries)?;
                if p.rank() == k {
                    mats.push(p);
                    break;
                }
            }
        }
        let [a, b, c]: [MatrixQ; 3] = mats.try_into().expect("three matrices");
        Self::new(a, b, c)
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.images.clone().map(|b| b.len())
    }

    /// Recomputes every derived field and checks complements meet images only at zero.
    pub fn verify(&self) -> bool {
        let m = self.m;
        let ranks_ok = (0..3).all(|i| self.psi[i].rank() == self.images[i].len());
        let delta_ok = (0..3).all(|i| {
            self.delta[i] == Q::new(BigInt::from(self.images[i].len()), BigInt::from(m.max(1)))
        });
        let big_ok = self.big_delta == big_delta(&self.delta);
        let comp_ok = (0..3).all(|i| {
            let mut span = SparseSpan::new();
            let mut gens: Vec<SparseVec> = self.images[i].iter().map(|v| linalg::to_sparse(v)).collect();
            gens.extend(self.complements[i].iter().map(|&c| SparseVec::from([(c, Q::one())])));
            let independent = gens.iter().all(|g| span.insert(g));
            independent && span.dim() == m && self.complements[i].len() == m - self.images[i].len()
        });
        ranks_ok && delta_ok && big_ok && comp_ok
    }
}

fn add_triple(t: &mut Tensor3, x: &[Q], y: &[Q], z: &[Q]) {
    *t = t.add(&Tensor3::rank_one(x, y, z)).expect("same dims");
}

fn vsum(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `T¹` (side 1) or `T²` (side 2) of the point under the maps `Ψ`.
pub fn modified_tensor(p: &SamplePoint, profile: &SubspaceProfile, side: u8) -> Result<Tensor3> {
    let m = p.m;
    if profile.m != m {
        return Err(Error::DimMismatch(format!("point has m = {m}, profile {}", profile.m)));
    }
    let [pa, pb, pc] = &profile.psi;
    let (base, other) = match side {
        1 => ([&p.x, &p.y, &p.z], [&p.xi, &p.eta, &p.tau]),
        2 => ([&p.xi, &p.eta, &p.tau], [&p.x, &p.y, &p.z]),
        _ => return Err(Error::Precondition(format!("side must be 1 or 2, got {side}"))),
    };
    let mut t = Tensor3::zeros([m, m, m]);
    for a in 0..p.r {
        let (x, y, z) = (&base[0][a], &base[1][a], &base[2][a]);
        add_triple(&mut t, x, y, z);
        add_triple(&mut t, &pa.mul_vec(&other[0][a]), y, z);
        add_triple(&mut t, x, &pb.mul_vec(&other[1][a]), z);
        add_triple(&mut t, x, y, &pc.mul_vec(&other[2][a]));
    }
    Ok(t)
}

/// `Σ (x, ξ) ⊗ (y, η) ⊗ (z, τ)` in `ℚ^{2m}` per mode, the `x` part first.
pub fn assemble_w(p: &SamplePoint) -> Tensor3 {
    let cat = |a: &[Q], b: &[Q]| -> Vec<Q> { a.iter().chain(b).cloned().collect() };
    let mut t = Tensor3::zeros([2 * p.m; 3]);
    for a in 0..p.r {
        add_triple(&mut t, &cat(&p.x[a], &p.xi[a]), &cat(&p.y[a], &p.eta[a]), &cat(&p.z[a], &p.tau[a]));
    }
    t
}

fn triple(m: usize, x: &[Q], y: &[Q], z: &[Q]) -> SparseVec {
    let mut v = SparseVec::new();
    for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
        for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
            let ab = a * b;
            for (k, c) in z.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                v.insert((i * m + j) * m + k, &ab * c);
            }
        }
    }
    v
}

fn unit(m: usize, s: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); m];
    v[s] = Q::one();
    v
}

fn place3<'a>(slot: usize, own: &'a [Q], a: &'a [Q], b: &'a [Q]) -> [&'a [Q]; 3] {
    match slot {
        0 => [own, a, b],
        1 => [a, own, b],
        _ => [a, b, own],
    }
}

/// Generator lists of 𝒫, 𝒬 and 𝒬′.
#[derive(Clone, Debug)]
pub struct TangentSpaces {
    pub p: Vec<SparseVec>,
    pub q: Vec<SparseVec>,
    pub q_prime: Vec<SparseVec>,
}

pub fn build_tangent_spaces(p: &SamplePoint, profile: &SubspaceProfile) -> Result<TangentSpaces> {
    let m = p.m;
    if profile.m != m {
        return Err(Error::DimMismatch(format!("point has m = {m}, profile {}", profile.m)));
    }
    let [pa, pb, pc] = &profile.psi;
    let mut gp = Vec::new();
    let mut gq = Vec::new();
    let mut gq2 = Vec::new();
    for a in 0..p.r {
        let xyz = [&p.x[a], &p.y[a], &p.z[a]];
        let moved = [pa.mul_vec(&p.xi[a]), pb.mul_vec(&p.eta[a]), pc.mul_vec(&p.tau[a])];
        let shifted: Vec<Vec<Q>> = (0..3).map(|s| vsum(xyz[s], &moved[s])).collect();
        for slot in 0..3 {
            let (o1, o2) = match slot {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for img in &profile.images[slot] {
                let [x, y, z] = place3(slot, img, xyz[o1], xyz[o2]);
                gp.push(triple(m, x, y, z));
            }
            for s in 0..m {
                let e = unit(m, s);
                let mut v = SparseVec::new();
                for (u1, u2) in [(xyz[o1].as_slice(), xyz[o2].as_slice()), (&moved[o1], xyz[o2]), (xyz[o1], &moved[o2])] {
                    let [x, y, z] = place3(slot, &e, u1, u2);
                    linalg::add_scaled(&mut v, &triple(m, x, y, z), &Q::one());
                }
                gq.push(v);
                let [x, y, z] = place3(slot, &e, &shifted[o1], &shifted[o2]);
                gq2.push(triple(m, x, y, z));
            }
        }
    }
    Ok(TangentSpaces { p: gp, q: gq, q_prime: gq2 })
}

/// Dimension of the span; integral generators go through fraction-free elimination.
pub fn span_dim(gens: &[SparseVec]) -> usize {
    if gens.iter().all(|g| g.values().all(|v| v.is_integer())) {
        let width = gens.iter().filter_map(|g| g.keys().next_back()).max().map_or(0, |&k| k + 1);
        let rows = gens
            .iter()
            .map(|g| {
                let mut row = vec![BigInt::zero(); width];
                for (&k, v) in g {
                    row[k] = v.to_integer();
                }
                row
            })
            .collect();
        return linalg::bareiss_rank(rows);
    }
    let mut span = SparseSpan::new();
    for g in gens {
        span.insert(g);
    }
    span.dim()
}

/// Every generator of `small` lies in the span of `big`.
pub fn span_contains(big: &[SparseVec], small: &[SparseVec]) -> bool {
    let mut span = SparseSpan::new();
    for g in big {
        span.insert(g);
    }
    small.iter().all(|g| span.contains(g))
}

/// Exact `dim 𝒫` against `m³ − r(3m − rank Ψ_A − rank Ψ_B − rank Ψ_C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBoundReport {
    pub dim_p: usize,
    pub bound: i64,
    pub holds: bool,
    /// `⟨q⊗y⊗z, x⊗q⊗z, x⊗y⊗q⟩` fills `(ℚ^m)^{⊗3}` at this point.
    pub tangent_spans_space: bool,
}

impl PBoundReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "dim_p": self.dim_p,
            "bound": self.bound,
            "holds": self.holds,
            "tangent_spans_space": self.tangent_spans_space,
        })
    }
}

pub fn check_p_lower_bound(p: &SamplePoint, profile: &SubspaceProfile, r: usize) -> Result<PBoundReport> {
    let spaces = build_tangent_spaces(p, profile)?;
    let m = p.m as i64;
    let rank_sum: i64 = profile.ranks().iter().map(|&k| k as i64).sum();
    let bound = m * m * m - r as i64 * (3 * m - rank_sum);
    let dim_p = span_dim(&spaces.p);
    let o = build_tangent_spaces(p, &SubspaceProfile::zero(p.m))?.q;
    Ok(PBoundReport {
        dim_p,
        bound,
        holds: dim_p as i64 >= bound,
        tangent_spans_space: span_dim(&o) == p.m.pow(3),
    })
}

/// `dim(𝒫 + 𝒬)` next to `m²(mμ − max{3k, mε})`; diagnostic only.
#[derive(Clone, Debug, PartialEq)]
pub struct PqReport {
    pub dim_p: usize,
    pub dim_q: usize,
    pub dim_sum: usize,
    pub rhs: f64,
    pub rhs_satisfied: bool,
}

impl PqReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "dim_p": self.dim_p,
            "dim_q": self.dim_q,
            "dim_p_plus_q": self.dim_sum,
            "rhs": self.rhs,
            "rhs_satisfied": self.rhs_satisfied,
        })
    }
}

pub fn check_pq_report(p: &SamplePoint, profile: &SubspaceProfile, k: usize, eps: &Q, mu: &Q) -> Result<PqReport> {
    let spaces = build_tangent_spaces(p, profile)?;
    let mut all = spaces.p.clone();
    all.extend(spaces.q.iter().cloned());
    let m = Q::from_integer(BigInt::from(p.m));
    let three_k = Q::from_integer(BigInt::from(3 * k));
    let me = &m * eps;
    let rhs = &m * &m * (&m * mu - if three_k > me { three_k } else { me });
    let dim_sum = span_dim(&all);
    Ok(PqReport {
        dim_p: span_dim(&spaces.p),
        dim_q: span_dim(&spaces.q),
        dim_sum,
        rhs: rhs.to_f64().unwrap_or(f64::NAN),
        rhs_satisfied: Q::from_integer(BigInt::from(dim_sum)) >= rhs,
    })
}

/// Span of `Ψ_A(ξ'_α)⊗y^α⊗z^α + x^α⊗Ψ_B(η'_α)⊗z^α + x^α⊗y^α⊗Ψ_C(τ'_α)` against `(δ_A+δ_B+δ_C)·m·r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageBoundReport {
    pub dim: usize,
    pub cap: usize,
    pub holds: bool,
}

impl ImageBoundReport {
    pub fn to_json_value(&self) -> Value {
        json!({"dim": self.dim, "cap": self.cap, "holds": self.holds})
    }
}

pub fn check_image_bound(p: &SamplePoint, profile: &SubspaceProfile) -> Result<ImageBoundReport> {
    let m = p.m;
    if profile.m != m {
        return Err(Error::DimMismatch(format!("point has m = {m}, profile {}", profile.m)));
    }
    // The map is linear in (ξ', η', τ'), so its image is spanned by the images of unit inputs.
    let mut gens = Vec::with_capacity(3 * m * p.r);
    for a in 0..p.r {
        let xyz = [&p.x[a], &p.y[a], &p.z[a]];
        for slot in 0..3 {
            let (o1, o2) = match slot {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for s in 0..m {
                let img = profile.psi[slot].mul_vec(&unit(m, s));
                let [x, y, z] = place3(slot, &img, xyz[o1], xyz[o2]);
                gens.push(triple(m, x, y, z));
            }
        }
    }
    let dim = span_dim(&gens);
    let cap = profile.ranks().iter().sum::<usize>() * p.r;
    Ok(ImageBoundReport { dim, cap, holds: dim <= cap })
}

/// The eight blocks `X_A ⊗ X_B ⊗ X_C` with each `X_I` the image (`true`) or the complement (`false`).
pub fn block_generators(profile: &SubspaceProfile, pattern: [bool; 3]) -> Vec<SparseVec> {
    let m = profile.m;
    let side = |i: usize| -> Vec<Vec<Q>> {
        if pattern[i] {
            profile.images[i].clone()
        } else {
            profile.complements[i].iter().map(|&c| unit(m, c)).collect()
        }
    };
    let (a, b, c) = (side(0), side(1), side(2));
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for x in &a {
        for y in &b {
            for z in &c {
                out.push(triple(m, x, y, z));
            }
        }
    }
    out
}

/// Patterns of ℛ: at least two complements.
pub const R_PATTERNS: [[bool; 3]; 4] = [
    [true, false, false],
    [false, true, false],
    [false, false, true],
    [false, false, false],
];

/// Patterns of ℒ: `D_A, D_B, D_C` and the three blocks with one image factor.
pub const L_PATTERNS: [[bool; 3]; 6] = [
    [false, true, true],
    [true, false, true],
    [true, true, false],
    [true, false, false],
    [false, true, false],
    [false, false, true],
];

pub fn r_space(profile: &SubspaceProfile) -> Vec<SparseVec> {
    R_PATTERNS.iter().flat_map(|&pat| block_generators(profile, pat)).collect()
}

pub fn l_space(profile: &SubspaceProfile) -> Vec<SparseVec> {
    L_PATTERNS.iter().flat_map(|&pat| block_generators(profile, pat)).collect()
}

/// Runs `terracini_dimension` over a table of `(m, r)` in parallel; rows keep input order.
pub fn terracini_table(cases: &[(usize, usize)], trials: usize, seed: u64) -> Result<Vec<(usize, usize, usize, usize)>> {
    cases
        .par_iter()
        .map(|&(m, r)| {
            let sampled = terracini_dimension(m, r, trials, seed.wrapping_add((m * 1000 + r) as u64))?;
            Ok((m, r, secant_dim_formula(m as u64, r as u64) as usize, sampled))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn formula_values() {
        assert_eq!(secant_dim_formula(4, 2), 20);
        assert_eq!(secant_dim_formula(4, 7), 64);
        assert_eq!(secant_dim_formula(5, 10), 125);
    }

    #[test]
    fn terracini_small() {
        assert_eq!(terracini_dimension(4, 2, 3, 1).unwrap(), 20);
        assert_eq!(terracini_dimension(2, 1, 1, 1).unwrap(), 4);
        assert_eq!(terracini_dimension(4, 7, 3, 1).unwrap(), 64);
        assert!(terracini_dimension(4, 2, 0, 1).is_err());
    }

    fn point_r1_m2() -> SamplePoint {
        SamplePoint::new(
            2,
            vec![v(&[1, 2])],
            vec![v(&[1, -1])],
            vec![v(&[3, 1])],
            vec![v(&[0, 1])],
            vec![v(&[1, 0])],
            vec![v(&[1, 1])],
        )
        .unwrap()
    }

    #[test]
    fn modified_tensor_cases() {
        let p = point_r1_m2();
        let plain = Tensor3::rank_one(&p.x[0], &p.y[0], &p.z[0]);
        assert_eq!(modified_tensor(&p, &SubspaceProfile::zero(2), 1).unwrap(), plain);

        let only_a = SubspaceProfile::new(MatrixQ::identity(2), MatrixQ::zeros(2, 2), MatrixQ::zeros(2, 2)).unwrap();
        let shifted = Tensor3::rank_one(&vsum(&p.x[0], &p.xi[0]), &p.y[0], &p.z[0]);
        assert_eq!(modified_tensor(&p, &only_a, 1).unwrap(), shifted);

        // Hand expansion with all three maps equal to the identity.
        let t = modified_tensor(&p, &SubspaceProfile::identity(2), 1).unwrap();
        let mut want = Tensor3::zeros([2, 2, 2]);
        let (x, y, z) = ([1, 2], [1, -1], [3, 1]);
        let (xi, eta, tau) = ([0, 1], [1, 0], [1, 1]);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let val = x[i] * y[j] * z[k] + xi[i] * y[j] * z[k] + x[i] * eta[j] * z[k] + x[i] * y[j] * tau[k];
                    want.add_at([i, j, k], &q(val)).unwrap();
                }
            }
        }
        assert_eq!(t, want);
        assert_eq!(t.nnz(), 8);
    }

    #[test]
    fn side_two_swaps_roles() {
        let p = point_r1_m2();
        let t = modified_tensor(&p, &SubspaceProfile::zero(2), 2).unwrap();
        assert_eq!(t, Tensor3::rank_one(&p.xi[0], &p.eta[0], &p.tau[0]));
    }

    #[test]
    fn tangent_space_degenerate_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = SamplePoint::random(3, 4, &mut rng);
        let s = build_tangent_spaces(&p, &SubspaceProfile::zero(3)).unwrap();
        assert!(s.p.is_empty());
        assert_eq!(s.q, s.q_prime);
        assert_eq!(s.q.len(), 3 * 4 * 3);

        let full = build_tangent_spaces(&p, &SubspaceProfile::identity(3)).unwrap();
        assert_eq!(span_dim(&full.p), span_dim(&s.q));
    }

    #[test]
    fn q_prime_inside_q_plus_p_with_one_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = SamplePoint::random(3, 3, &mut rng);
        let prof = SubspaceProfile::new(MatrixQ::zeros(3, 3), MatrixQ::identity(3), MatrixQ::zeros(3, 3)).unwrap();
        let s = build_tangent_spaces(&p, &prof).unwrap();
        let mut big = s.q.clone();
        big.extend(s.p.iter().cloned());
        assert!(span_contains(&big, &s.q_prime));
    }

    #[test]
    fn profile_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let prof = SubspaceProfile::random_with_ranks(4, [1, 2, 4], &mut rng).unwrap();
        assert!(prof.verify());
        assert_eq!(prof.ranks(), [1, 2, 4]);
        assert_eq!(prof.complements[2].len(), 0);
        assert_eq!(prof.delta[1], Q::new(1.into(), 2.into()));
    }

    #[test]
    fn image_bound_examples() {
        let p = point_r1_m2();
        assert_eq!(check_image_bound(&p, &SubspaceProfile::zero(2)).unwrap(), ImageBoundReport { dim: 0, cap: 0, holds: true });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p2 = SamplePoint::random(2, 2, &mut rng);
        let prof = SubspaceProfile::new(MatrixQ::unit(2, 2, 0, 1), MatrixQ::zeros(2, 2), MatrixQ::zeros(2, 2)).unwrap();
        let rep = check_image_bound(&p2, &prof).unwrap();
        assert!(rep.holds && rep.dim <= 2);
    }

    #[test]
    fn p_bound_with_identity_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = SamplePoint::random(3, 7, &mut rng);
        let rep = check_p_lower_bound(&p, &SubspaceProfile::identity(3), 7).unwrap();
        assert_eq!(rep.bound, 27);
        assert!(rep.holds && rep.tangent_spans_space);
    }

    #[test]
    fn blocks_partition_the_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prof = SubspaceProfile::random_with_ranks(3, [1, 2, 0], &mut rng).unwrap();
        let mut all = Vec::new();
        for a in [true, false] {
            for b in [true, false] {
                for c in [true, false] {
                    all.extend(block_generators(&prof, [a, b, c]));
                }
            }
        }
        assert_eq!(all.len(), 27);
        assert_eq!(span_dim(&all), 27);
    }

    #[test]
    fn assemble_w_layout() {
        let p = point_r1_m2();
        let w = assemble_w(&p);
        assert_eq!(w.dims(), [4, 4, 4]);
        // (x, ξ) = (1, 2, 0, 1), (y, η) = (1, −1, 1, 0), (z, τ) = (3, 1, 1, 1).
        assert_eq!(w.get([1, 0, 0]), q(6));
        assert_eq!(w.get([3, 2, 3]), q(1));
        assert_eq!(w.get([2, 0, 0]), q(0));
    }
}
