// SPDX-License-Identifier: Apache-2.0

//! Φ-tensors: rank-one matrices routed by base-σ digits, the off-diagonal
//! unit set, and exact checks of the structure of their span.
//!
//! A matrix in `A ⊗ (ℚ^σ)^{⊗θ} ⊗ B ⊗ (ℚ^σ)^{⊗θ}` is stored with row
//! `i·σ^θ + α` and column `j·σ^θ + β`, where a multi-index is flattened with
//! the first digit most significant.

use crate::error::{Error, Result};
use crate::linalg::{SparseSpan, SparseVec};
use crate::rational::{q, Q};
use crate::tensor_core::MatrixQ;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// `(ρ, θ, σ) = (2abc+1, ⌈log₂ r⌉, 2ρ²r)`.
pub fn derive_parameters(a: u64, b: u64, c: u64, r: u64) -> Result<(u64, u32, u64)> {
    if a == 0 || b == 0 || c == 0 || r == 0 {
        return Err(Error::Precondition("a, b, c, r must be positive".into()));
    }
    let rho = 2 * a * b * c + 1;
    let theta = r.next_power_of_two().trailing_zeros();
    Ok((rho, theta, 2 * rho * rho * r))
}

/// The 1-based pair `(u1, u2)` with `s = (u1−1)σ + (u2−1)`.
pub fn digits(s: u64, sigma: u64) -> Result<(u64, u64)> {
    if sigma == 0 || s >= sigma.saturating_mul(sigma) {
        return Err(Error::Precondition(format!("{s} is not below σ² for σ = {sigma}")));
    }
    Ok((s / sigma + 1, s % sigma + 1))
}

/// Decimal digits grouped by thousands with commas.
pub fn with_commas(n: &BigUint) -> String {
    let s = n.to_string();
    let mut out = String::with_capacity(s.len() + s.len() / 3);
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiParams {
    r: usize,
    theta: usize,
    sigma: usize,
    /// `pi[i][γ] ∈ {1, 2}`.
    pi: Vec<Vec<u8>>,
}

impl PhiParams {
    /// Uses the first `r` functions `{1..θ} → {1,2}` in binary order.
    pub fn new(r: usize, theta: usize, sigma: usize) -> Result<Self> {
        if theta >= usize::BITS as usize || r > 1usize << theta {
            return Err(Error::Precondition(format!("2^θ = 2^{theta} is below r = {r}")));
        }
        let pi = (0..r)
            .map(|t| {
                (0..theta)
                    .map(|g| 1 + ((t >> (theta - 1 - g)) & 1) as u8)
                    .collect()
            })
            .collect();
        Self::with_pi(r, theta, sigma, pi)
    }

    pub fn with_pi(r: usize, theta: usize, sigma: usize, pi: Vec<Vec<u8>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::Precondition("r must be positive".into()));
        }
        if sigma == 0 {
            return Err(Error::Precondition("σ must be positive".into()));
        }
        if pi.len() != r {
            return Err(Error::Precondition(format!("{} π functions for r = {r}", pi.len())));
        }
        for (i, p) in pi.iter().enumerate() {
            if p.len() != theta || p.iter().any(|&x| x != 1 && x != 2) {
                return Err(Error::Precondition(format!(
                    "π_{} must map 1..{theta} into {{1, 2}}",
                    i + 1
                )));
            }
        }
        let distinct: BTreeSet<&Vec<u8>> = pi.iter().collect();
        if distinct.len() != r {
            return Err(Error::Precondition("π functions must be pairwise distinct".into()));
        }
        let side = (sigma as u128).checked_pow(theta as u32);
        if side.is_none_or(|s| s > usize::MAX as u128 / r as u128) {
            return Err(Error::Precondition("σ^θ overflows".into()));
        }
        Ok(Self { r, theta, sigma, pi })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn pi(&self) -> &[Vec<u8>] {
        &self.pi
    }

    /// `σ^θ`, the side of one block.
    pub fn block(&self) -> usize {
        self.sigma.pow(self.theta as u32)
    }

    /// `(σ²)^θ`.
    pub fn family_size(&self) -> BigUint {
        BigUint::from(self.sigma).pow(2 * self.theta as u32)
    }

    /// Number of positions where `π_i` and `π_j` differ.
    pub fn disagreement(&self, i: usize, j: usize) -> usize {
        (0..self.theta).filter(|&g| self.pi[i][g] != self.pi[j][g]).count()
    }

    /// First `γ` (0-based) with `π_i(γ) ≠ π_j(γ)`.
    pub fn witness(&self, i: usize, j: usize) -> Option<usize> {
        (0..self.theta).find(|&g| self.pi[i][g] != self.pi[j][g])
    }

    /// 0-based digits of a flattened multi-index, most significant first.
    pub fn split(&self, mut flat: usize) -> Vec<usize> {
        let mut d = vec![0; self.theta];
        for g in (0..self.theta).rev() {
            d[g] = flat % self.sigma;
            flat /= self.sigma;
        }
        d
    }

    pub fn join(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.sigma + d)
    }
}

/// `Φ: {1..θ} → {0..σ²−1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PhiFunction {
    values: Vec<usize>,
}

impl PhiFunction {
    pub fn new(params: &PhiParams, values: Vec<usize>) -> Result<Self> {
        let top = params.sigma * params.sigma;
        if values.len() != params.theta || values.iter().any(|&v| v >= top) {
            return Err(Error::Precondition(format!(
                "Φ needs {} values below {top}",
                params.theta
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

/// The rank-one matrix `left · rightᵀ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredMatrix {
    pub rows: usize,
    pub cols: usize,
    pub left: SparseVec,
    pub right: SparseVec,
}

impl FactoredMatrix {
    pub fn to_matrix(&self) -> MatrixQ {
        let mut m = MatrixQ::zeros(self.rows, self.cols);
        for (&i, x) in &self.left {
            for (&j, y) in &self.right {
                m.add_at((i, j), &(x * y)).expect("factor indices are in range");
            }
        }
        m
    }

    /// Row-major vectorisation.
    pub fn to_sparse_vec(&self) -> SparseVec {
        let mut v = SparseVec::new();
        for (&i, x) in &self.left {
            for (&j, y) in &self.right {
                v.insert(i * self.cols + j, x * y);
            }
        }
        v
    }
}

/// Multi-index of `u(Φ(γ), side(γ))` over all γ, as 0-based digits.
fn routed(params: &PhiParams, phi: &PhiFunction, pick: impl Fn(usize) -> u8) -> usize {
    let s = params.sigma;
    let digits: Vec<usize> = (0..params.theta)
        .map(|g| {
            let v = phi.values[g];
            if pick(g) == 1 {
                v / s
            } else {
                v % s
            }
        })
        .collect();
    params.join(&digits)
}

/// `M^Φ` as a factored rank-one matrix of shape `(a·σ^θ) × (b·σ^θ)`.
pub fn phi_tensor(
    params: &PhiParams,
    phi: &PhiFunction,
    a_dim: usize,
    b_dim: usize,
) -> Result<FactoredMatrix> {
    if params.r > a_dim.min(b_dim) {
        return Err(Error::Precondition(format!(
            "r = {} exceeds min(a, b) = {}",
            params.r,
            a_dim.min(b_dim)
        )));
    }
    let n = params.block();
    let mut left = SparseVec::new();
    let mut right = SparseVec::new();
    for i in 0..params.r {
        left.insert(i * n + routed(params, phi, |g| params.pi[i][g]), Q::one());
        right.insert(i * n + routed(params, phi, |g| 3 - params.pi[i][g]), Q::one());
    }
    Ok(FactoredMatrix {
        rows: a_dim * n,
        cols: b_dim * n,
        left,
        right,
    })
}

fn check_budget(params: &PhiParams, budget: u64) -> Result<usize> {
    let count = params.family_size();
    if count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            count: with_commas(&count),
            budget: with_commas(&BigUint::from(budget)),
        });
    }
    Ok(count.to_usize().expect("count is within a u64 budget"))
}

/// All `Φ` in lexicographic order, `Φ(1)` most significant.
pub fn enumerate_family(params: &PhiParams, budget: u64) -> Result<Vec<PhiFunction>> {
    let count = check_budget(params, budget)?;
    let base = params.sigma * params.sigma;
    Ok((0..count)
        .map(|mut t| {
            let mut values = vec![0; params.theta];
            for g in (0..params.theta).rev() {
                values[g] = t % base;
                t /= base;
            }
            PhiFunction { values }
        })
        .collect())
}

/// An off-diagonal unit `a_i ⊗ φ ⊗ b_j ⊗ ψ`, multi-indices flattened.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitPos {
    pub i: usize,
    pub phi: usize,
    pub j: usize,
    pub psi: usize,
}

impl UnitPos {
    pub fn row(&self, block: usize) -> usize {
        self.i * block + self.phi
    }

    pub fn col(&self, block: usize) -> usize {
        self.j * block + self.psi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitMethod {
    ClosedForm,
    BruteForce,
}

/// Positions in off-diagonal blocks that some `M^Φ` touches.
pub fn unit_set(
    params: &PhiParams,
    a_dim: usize,
    b_dim: usize,
    method: UnitMethod,
    budget: u64,
) -> Result<BTreeSet<UnitPos>> {
    if params.r > a_dim.min(b_dim) {
        return Err(Error::Precondition("r exceeds min(a, b)".into()));
    }
    let n = params.block();
    let mut out = BTreeSet::new();
    match method {
        UnitMethod::ClosedForm => {
            for i in 0..params.r {
                for j in (0..params.r).filter(|&j| j != i) {
                    let tied: Vec<usize> =
                        (0..params.theta).filter(|&g| params.pi[i][g] != params.pi[j][g]).collect();
                    for phi in 0..n {
                        let pd = params.split(phi);
                        for psi in 0..n {
                            let sd = params.split(psi);
                            if tied.iter().all(|&g| pd[g] == sd[g]) {
                                out.insert(UnitPos { i, phi, j, psi });
                            }
                        }
                    }
                }
            }
        }
        UnitMethod::BruteForce => {
            for phi in enumerate_family(params, budget)? {
                let m = phi_tensor(params, &phi, a_dim, b_dim)?;
                for &row in m.left.keys() {
                    for &col in m.right.keys() {
                        let (i, j) = (row / n, col / n);
                        if i != j {
                            out.insert(UnitPos {
                                i,
                                phi: row % n,
                                j,
                                psi: col % n,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `w^{Σ_θ}` for `w = Σ_{i<r} a_i ⊗ b_i`, i.e. `w ⊗ 1_{σ^θ×σ^θ}`.
pub fn clone_of_identity(params: &PhiParams, a_dim: usize, b_dim: usize) -> MatrixQ {
    let n = params.block();
    let mut m = MatrixQ::zeros(a_dim * n, b_dim * n);
    for i in 0..params.r {
        for x in 0..n {
            for y in 0..n {
                m.add_at((i * n + x, i * n + y), &Q::one()).expect("in range");
            }
        }
    }
    m
}

/// The generators of ℳ: every `M^Φ` in enumeration order, then every unit of 𝒰 in sorted order.
pub struct Generators {
    pub family: Vec<FactoredMatrix>,
    pub units: Vec<UnitPos>,
    pub rows: usize,
    pub cols: usize,
    pub block: usize,
}

impl Generators {
    pub fn build(params: &PhiParams, a_dim: usize, b_dim: usize, budget: u64) -> Result<Self> {
        let family = enumerate_family(params, budget)?
            .iter()
            .map(|phi| phi_tensor(params, phi, a_dim, b_dim))
            .collect::<Result<Vec<_>>>()?;
        let units = unit_set(params, a_dim, b_dim, UnitMethod::ClosedForm, budget)?
            .into_iter()
            .collect();
        let n = params.block();
        Ok(Self {
            family,
            units,
            rows: a_dim * n,
            cols: b_dim * n,
            block: n,
        })
    }

    pub fn len(&self) -> usize {
        self.family.len() + self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, idx: usize) -> SparseVec {
        if idx < self.family.len() {
            self.family[idx].to_sparse_vec()
        } else {
            let u = self.units[idx - self.family.len()];
            SparseVec::from([(u.row(self.block) * self.cols + u.col(self.block), Q::one())])
        }
    }

    pub fn span(&self) -> SparseSpan {
        let mut span = SparseSpan::new();
        for idx in 0..self.len() {
            span.insert_tagged(&self.vector(idx), idx);
        }
        span
    }

    /// `Σ c_idx · generator_idx`.
    pub fn combine(&self, coeffs: &[Q]) -> SparseVec {
        let mut out = SparseVec::new();
        for (idx, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            crate::linalg::add_scaled(&mut out, &self.vector(idx), c);
        }
        out
    }
}

/// Coefficients over [`Generators`] expressing `target`, or `None` outside ℳ.
pub fn membership_in_m(
    params: &PhiParams,
    a_dim: usize,
    b_dim: usize,
    target: &MatrixQ,
    budget: u64,
) -> Result<Option<Vec<Q>>> {
    let gens = Generators::build(params, a_dim, b_dim, budget)?;
    if target.dims() != [gens.rows, gens.cols] {
        return Err(Error::DimMismatch(format!(
            "target {:?}, expected {:?}",
            target.dims(),
            [gens.rows, gens.cols]
        )));
    }
    let goal = target.to_sparse_vec();
    let Some(sol) = gens.span().solve(&goal) else {
        return Ok(None);
    };
    let coeffs: Vec<Q> = (0..gens.len())
        .map(|k| sol.get(&k).cloned().unwrap_or_else(Q::zero))
        .collect();
    debug_assert_eq!(gens.combine(&coeffs), goal);
    Ok(Some(coeffs))
}

/// The explicit combination `Σ_Φ M^Φ − Σ_{u∈𝒰} σ^{d(i,j)} u` for `w^{Σ_θ}`.
///
/// An off-diagonal unit in block `(i, j)` is hit by `σ^{d(i,j)}` functions Φ,
/// where `d(i, j)` counts the positions where `π_i` and `π_j` differ.
pub fn clone_coefficients(params: &PhiParams, gens: &Generators) -> Vec<Q> {
    let mut c = vec![Q::one(); gens.family.len()];
    let sigma = BigUint::from(params.sigma);
    c.extend(gens.units.iter().map(|u| {
        let mult = sigma.pow(params.disagreement(u.i, u.j) as u32);
        -Q::from_integer(mult.into())
    }));
    c
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyReport {
    pub assertions: Vec<Assertion>,
    pub witnesses: Vec<Value>,
}

impl FamilyReport {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "assertions": self.assertions.iter().map(|a| json!({
                "name": a.name,
                "passed": a.passed,
                "detail": a.detail,
            })).collect::<Vec<_>>(),
            "witnesses": self.witnesses,
        })
    }
}

/// Runs the five structural checks with `a = b = r`.
///
/// `samples` random integer combinations of the generators feed the
/// block-diagonality check.
pub fn verify_family_structure(
    params: &PhiParams,
    budget: u64,
    samples: usize,
    seed: u64,
) -> Result<FamilyReport> {
    let r = params.r;
    let n = params.block();
    let gens = Generators::build(params, r, r, budget)?;
    let mut report = FamilyReport::default();

    // Diagonal coverage: each (i, φ, ψ) hit by exactly one Φ.
    let mut cover: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for m in &gens.family {
        for &row in m.left.keys() {
            for &col in m.right.keys() {
                if row / n == col / n {
                    *cover.entry((row, col)).or_default() += 1;
                }
            }
        }
    }
    let expected = r * n * n;
    let bad: Vec<_> = cover.iter().filter(|(_, &c)| c != 1).take(5).collect();
    let ok = bad.is_empty() && cover.len() == expected;
    for ((row, col), c) in &bad {
        report.witnesses.push(json!({"check": "diagonal_coverage", "row": row, "col": col, "count": c}));
    }
    report.push(
        "diagonal_coverage",
        ok,
        format!("{} of {expected} diagonal-block entries covered exactly once", cover.values().filter(|&&c| c == 1).count()),
    );

    // Every M^Φ has rank one, computed exactly.
    let ranks: Vec<usize> = gens.family.par_iter().map(|m| m.to_matrix().rank()).collect();
    let bad: Vec<usize> = ranks.iter().enumerate().filter(|(_, &k)| k != 1).map(|(i, _)| i).collect();
    for &i in bad.iter().take(5) {
        report.witnesses.push(json!({"check": "rank_one", "phi_index": i, "rank": ranks[i]}));
    }
    report.push(
        "rank_one",
        bad.is_empty(),
        format!("{} matrices checked", ranks.len()),
    );

    // Off-diagonal blocks of random span elements are block diagonal at the witness digit.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for s in 0..samples {
        let coeffs: Vec<Q> = (0..gens.len()).map(|_| q(rng.gen_range(-5..=5))).collect();
        let m = gens.combine(&coeffs);
        for &flat in m.keys() {
            let (row, col) = (flat / gens.cols, flat % gens.cols);
            let (i, j) = (row / n, col / n);
            if i == j {
                continue;
            }
            let tau = params.witness(i, j).expect("distinct π");
            if params.split(row % n)[tau] != params.split(col % n)[tau] {
                violations += 1;
                if violations <= 5 {
                    report.witnesses.push(json!({
                        "check": "block_diagonal", "sample": s, "row": row, "col": col, "tau": tau + 1,
                    }));
                }
            }
        }
    }
    report.push(
        "block_diagonal",
        violations == 0,
        format!("{samples} random combinations, {violations} violating entries"),
    );

    // Closed form for 𝒰 against brute force.
    let closed = unit_set(params, r, r, UnitMethod::ClosedForm, budget)?;
    let brute = unit_set(params, r, r, UnitMethod::BruteForce, budget)?;
    for u in closed.symmetric_difference(&brute).take(5) {
        report.witnesses.push(json!({"check": "unit_set", "i": u.i, "phi": u.phi, "j": u.j, "psi": u.psi}));
    }
    report.push(
        "unit_set",
        closed == brute,
        format!("|U| = {} closed form, {} brute force", closed.len(), brute.len()),
    );

    // The clone of the identity block lies in ℳ, both by solving and by the explicit combination.
    let target = clone_of_identity(params, r, r).to_sparse_vec();
    let solved = gens.span().solve(&target).is_some();
    let explicit = gens.combine(&clone_coefficients(params, &gens)) == target;
    report.push(
        "clone_membership",
        solved && explicit,
        format!("exact solve {solved}, explicit combination {explicit}"),
    );
    Ok(report)
}

/// First class `D_δ` (0-based) disjoint from every `Z_α`.
pub fn find_clear_class(
    sets: &[BTreeSet<u64>],
    partition: &[BTreeSet<u64>],
    excluded: &[BTreeSet<u64>],
) -> Result<usize> {
    let r = sets.len();
    if r == 0 {
        return Err(Error::Precondition("no sets".into()));
    }
    let omega = sets[0].len();
    let mut union = BTreeSet::new();
    for (a, s) in sets.iter().enumerate() {
        if s.len() != omega {
            return Err(Error::Precondition(format!("S_{} has size {}, expected {omega}", a + 1, s.len())));
        }
        for &x in s {
            if !union.insert(x) {
                return Err(Error::Precondition(format!("S sets overlap at {x}")));
            }
        }
    }
    if partition.len() != omega {
        return Err(Error::Precondition(format!("{} classes, expected ω = {omega}", partition.len())));
    }
    let mut covered = BTreeSet::new();
    for d in partition {
        for &x in d {
            if !covered.insert(x) {
                return Err(Error::Precondition(format!("classes overlap at {x}")));
            }
        }
    }
    if covered != union {
        return Err(Error::Precondition("classes do not partition the union".into()));
    }
    if excluded.len() != r {
        return Err(Error::Precondition(format!("{} excluded sets for r = {r}", excluded.len())));
    }
    for (a, z) in excluded.iter().enumerate() {
        if !z.is_subset(&sets[a]) {
            return Err(Error::Precondition(format!("Z_{} is not inside S_{}", a + 1, a + 1)));
        }
        if z.len() * r >= omega {
            return Err(Error::Precondition(format!(
                "|Z_{}| = {} is not below ω/r = {omega}/{r}",
                a + 1,
                z.len()
            )));
        }
    }
    let blocked: BTreeSet<u64> = excluded.iter().flatten().copied().collect();
    let found = partition.iter().position(|d| d.is_disjoint(&blocked));
    assert!(found.is_some(), "counting argument failed");
    Ok(found.unwrap())
}
