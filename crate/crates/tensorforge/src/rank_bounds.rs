// SPDX-License-Identifier: Apache-2.0

//! Certified rank sandwiches: flattening and substitution lower bounds, and
//! exactly verified decompositions for the upper side.

use crate::constructions::{flattening_image, MatrixSubspace};
use crate::error::{Error, Result};
use crate::linalg::{SparseSpan, SparseVec};
use crate::rational::{q, rationalize, Q};
use crate::tensor_core::{
    flatten, flattening_ranks, independent_coordinates, matmul_tensor, restrict, Decomposition,
    MatrixQ, Mode, RankOneTerm, Tensor3,
};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Search budget for the floating-point proposals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Effort {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for Effort {
    fn default() -> Self {
        Self {
            restarts: 6,
            iterations: 600,
            seed: 0,
        }
    }
}

/// Lower bound `max(r_X, dim W + max_Y q_Y)` for `W ⊆ T(X*)`.
///
/// `q_Y` is the rank of the `Y`-flattening modulo the `Y`-side images of
/// `W ⊗ X`, which every modification of `T` by `W` leaves unchanged.
pub fn substitution_lower_bound(t: &Tensor3, w: &MatrixSubspace, mode: Mode) -> Result<usize> {
    let image = flattening_image(t, mode);
    if w.ambient() != image.ambient() {
        return Err(Error::DimMismatch(format!(
            "W lives in {:?}, mode {} slices are {:?}",
            w.ambient(),
            mode.letter(),
            image.ambient()
        )));
    }
    if !w.basis().iter().all(|m| image.contains(m)) {
        return Err(Error::NotInFlatteningImage(format!("W ⊄ T({}*)", mode.letter())));
    }
    let r_x = image.dim();
    if w.dim() == 0 {
        return Ok(flattening_ranks(t).ranks.into_iter().max().unwrap_or(0));
    }
    let mut best_q = 0;
    for other in mode.others() {
        let mut lifted = SparseSpan::new();
        for m in w.basis() {
            for x in 0..t.dim(mode) {
                let mut piece = Tensor3::zeros(t.dims());
                piece.add_slice(mode, x, m, &Q::one())?;
                for row in flatten(&piece, other).row_vectors() {
                    if !row.is_empty() {
                        lifted.insert(&row);
                    }
                }
            }
        }
        let base = lifted.dim();
        for row in flatten(t, other).row_vectors() {
            lifted.insert(&row);
        }
        best_q = best_q.max(lifted.dim() - base);
    }
    Ok(r_x.max(w.dim() + best_q))
}

/// `⌈m³ / (3m − 2)⌉`.
pub fn generic_rank(m: u64) -> u64 {
    assert!(m >= 1, "generic rank needs m >= 1");
    (m * m * m).div_ceil(3 * m - 2)
}

/// The closed form is quoted for `m ≥ 4` only.
pub fn generic_rank_in_stated_range(m: u64) -> bool {
    m >= 4
}

/// Each term `x⊗y⊗z` becomes `(x⊗1_v)⊗(y⊗1_v)⊗(z⊗1_v)`.
pub fn transfer_clone_decomposition(d: &Decomposition, v: usize) -> Result<Decomposition> {
    if v == 0 {
        return Err(Error::Precondition("clone factor must be at least 1".into()));
    }
    let rep = |x: &[Q]| -> Vec<Q> { x.iter().flat_map(|e| std::iter::repeat_n(e.clone(), v)).collect() };
    Ok(Decomposition {
        target_dims: d.target_dims.map(|n| n * v),
        terms: d
            .terms
            .iter()
            .map(|t| RankOneTerm {
                x: rep(&t.x),
                y: rep(&t.y),
                z: rep(&t.z),
            })
            .collect(),
    })
}

/// The 7-term Strassen scheme for the `(2,2,2)` structure tensor of [`matmul_tensor`].
pub fn strassen_decomposition() -> Decomposition {
    // Entries 11, 12, 21, 22 map to 0, 1, 2, 3 in every factor.
    let v = |xs: [i64; 4]| xs.iter().map(|&x| q(x)).collect::<Vec<_>>();
    let rows: [([i64; 4], [i64; 4], [i64; 4]); 7] = [
        ([1, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 1]),
        ([0, 0, 1, 1], [1, 0, 0, 0], [0, 0, 1, -1]),
        ([1, 0, 0, 0], [0, 1, 0, -1], [0, 1, 0, 1]),
        ([0, 0, 0, 1], [-1, 0, 1, 0], [1, 0, 1, 0]),
        ([1, 1, 0, 0], [0, 0, 0, 1], [-1, 1, 0, 0]),
        ([-1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]),
        ([0, 1, 0, -1], [0, 0, 1, 1], [1, 0, 0, 0]),
    ];
    Decomposition {
        target_dims: [4, 4, 4],
        terms: rows
            .iter()
            .map(|&(x, y, z)| RankOneTerm {
                x: v(x),
                y: v(y),
                z: v(z),
            })
            .collect(),
    }
}

/// Splits a matrix into rank-one pieces: connected blocks of its support
/// when they have rank one, single rows otherwise.
fn rank_one_pieces(m: &MatrixQ) -> Vec<MatrixQ> {
    let [rows, cols] = m.dims();
    let mut parent: Vec<usize> = (0..rows + cols).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in m.entries().keys() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, rows + j));
        parent[a] = b;
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<((usize, usize), Q)>> = Default::default();
    for (&(i, j), v) in m.entries() {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().push(((i, j), v.clone()));
    }
    let mut out = Vec::new();
    for entries in blocks.into_values() {
        let block = MatrixQ::from_entries(rows, cols, entries).expect("in range");
        if block.rank() == 1 {
            out.push(block);
        } else {
            for (i, row) in block.row_vectors().into_iter().enumerate() {
                if !row.is_empty() {
                    out.push(MatrixQ::from_entries(rows, cols, row.into_iter().map(|(j, v)| ((i, j), v))).expect("in range"));
                }
            }
        }
    }
    out
}

/// Factors a rank-one matrix as `u vᵀ`.
fn factor_rank_one(m: &MatrixQ) -> (Vec<Q>, Vec<Q>) {
    let [rows, cols] = m.dims();
    let (&(r0, c0), pivot) = m.entries().iter().next().expect("nonzero");
    let mut u = vec![Q::zero(); rows];
    let mut v = vec![Q::zero(); cols];
    for j in 0..cols {
        v[j] = m.get(r0, j);
    }
    for (i, ui) in u.iter_mut().enumerate() {
        *ui = m.get(i, c0) / pivot;
    }
    (u, v)
}

fn place(mode: Mode, x: Vec<Q>, u: Vec<Q>, v: Vec<Q>) -> RankOneTerm {
    match mode {
        Mode::A => RankOneTerm { x, y: u, z: v },
        Mode::B => RankOneTerm { x: u, y: x, z: v },
        Mode::C => RankOneTerm { x: u, y: v, z: x },
    }
}

/// Writes every slice of one mode in a basis of rank-one pieces.
fn slice_decomposition(t: &Tensor3, mode: Mode) -> Decomposition {
    let n = t.dim(mode);
    let slices: Vec<MatrixQ> = (0..n).map(|i| t.slice(mode, i)).collect();
    let pieces: Vec<MatrixQ> = slices.iter().flat_map(rank_one_pieces).collect();
    let mut span = SparseSpan::new();
    let mut basis = Vec::new();
    for p in &pieces {
        if span.insert_tagged(&p.to_sparse_vec(), basis.len()) {
            basis.push(p.clone());
        }
    }
    let mut coeff = vec![vec![Q::zero(); n]; basis.len()];
    for (i, s) in slices.iter().enumerate() {
        let sol = span.solve(&s.to_sparse_vec()).expect("slices lie in the span of their pieces");
        for (tag, c) in sol {
            coeff[tag][i] = c;
        }
    }
    let terms = basis
        .iter()
        .zip(coeff)
        .filter(|(_, x)| x.iter().any(|c| !c.is_zero()))
        .map(|(p, x)| {
            let (u, v) = factor_rank_one(p);
            place(mode, x, u, v)
        })
        .collect();
    Decomposition {
        target_dims: t.dims(),
        terms,
    }
}

/// Strips rank-one slices, scanning modes in `order`, then decomposes the rest by slices.
fn peel_decomposition(t: &Tensor3, order: [Mode; 3]) -> Decomposition {
    let mut rest = t.clone();
    let mut terms = Vec::new();
    let mut progress = true;
    while progress {
        progress = false;
        for mode in order {
            for i in 0..rest.dim(mode) {
                let m = rest.slice(mode, i);
                if m.is_zero() || m.rank() != 1 {
                    continue;
                }
                let (u, v) = factor_rank_one(&m);
                let mut x = vec![Q::zero(); rest.dim(mode)];
                x[i] = Q::one();
                terms.push(place(mode, x, u, v));
                rest.add_slice(mode, i, &m, &-Q::one()).expect("slice in range");
                progress = true;
            }
        }
    }
    if !rest.is_zero() {
        let tail = Mode::ALL
            .iter()
            .map(|&m| slice_decomposition(&rest, m))
            .min_by_key(Decomposition::len)
            .expect("three modes");
        terms.extend(tail.terms);
    }
    Decomposition {
        target_dims: t.dims(),
        terms,
    }
}

/// Shortest structured decomposition: known schemes, slice bases per mode, and rank-one peeling.
fn structured_decomposition(t: &Tensor3) -> Decomposition {
    if t.is_zero() {
        return Decomposition {
            target_dims: t.dims(),
            terms: Vec::new(),
        };
    }
    let mut best: Option<Decomposition> = None;
    if t.dims() == [4, 4, 4] && *t == matmul_tensor(2, 2, 2).expect("valid") {
        best = Some(strassen_decomposition());
    }
    for mode in Mode::ALL {
        let d = slice_decomposition(t, mode);
        if best.as_ref().is_none_or(|b| d.len() < b.len()) {
            best = Some(d);
        }
    }
    use Mode::{A, B, C};
    for order in [[A, B, C], [A, C, B], [B, A, C], [B, C, A], [C, A, B], [C, B, A]] {
        let d = peel_decomposition(t, order);
        if best.as_ref().is_none_or(|b| d.len() < b.len()) {
            best = Some(d);
        }
    }
    let best = best.expect("at least one mode");
    debug_assert!(best.certifies(t));
    best
}

fn dense(t: &Tensor3) -> Vec<f64> {
    let [_, b, c] = t.dims();
    let mut out = vec![0.0; t.dims().iter().product()];
    for (&[i, j, k], v) in t.entries() {
        out[(i * b + j) * c + k] = v.to_f64().unwrap_or(f64::NAN);
    }
    out
}

/// Solves the symmetric positive definite system `g x = rhs` in place.
fn spd_solve(g: &mut [f64], rhs: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let Some(piv) = (col..n).max_by(|&a, &b| g[a * n + col].abs().total_cmp(&g[b * n + col].abs())) else {
            return false;
        };
        if g[piv * n + col].abs() < 1e-300 {
            return false;
        }
        if piv != col {
            for k in 0..n {
                g.swap(piv * n + k, col * n + k);
            }
            rhs.swap(piv, col);
        }
        for row in 0..n {
            if row != col {
                let f = g[row * n + col] / g[col * n + col];
                if f != 0.0 {
                    for k in col..n {
                        g[row * n + k] -= f * g[col * n + k];
                    }
                    rhs[row] -= f * rhs[col];
                }
            }
        }
    }
    for i in 0..n {
        rhs[i] /= g[i * n + i];
    }
    true
}

/// One ALS sweep for the factor of `mode`; factors are stored row-major `dim × r`.
fn als_update(t: &[f64], dims: [usize; 3], f: &mut [Vec<f64>; 3], mode: usize, r: usize) -> bool {
    let (p, s) = match mode {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut g = vec![0.0; r * r];
    for a in 0..r {
        for b in 0..r {
            let gp: f64 = (0..dims[p]).map(|i| f[p][i * r + a] * f[p][i * r + b]).sum();
            let gs: f64 = (0..dims[s]).map(|i| f[s][i * r + a] * f[s][i * r + b]).sum();
            g[a * r + b] = gp * gs;
        }
        g[a * r + a] += 1e-12;
    }
    let [da, db, dc] = dims;
    let mut rhs = vec![0.0; dims[mode] * r];
    for i in 0..da {
        for j in 0..db {
            for k in 0..dc {
                let v = t[(i * db + j) * dc + k];
                if v == 0.0 {
                    continue;
                }
                let idx = [i, j, k];
                let (own, ip, is) = (idx[mode], idx[p], idx[s]);
                for a in 0..r {
                    rhs[own * r + a] += v * f[p][ip * r + a] * f[s][is * r + a];
                }
            }
        }
    }
    for row in 0..dims[mode] {
        let mut gg = g.clone();
        let mut x = rhs[row * r..(row + 1) * r].to_vec();
        if !spd_solve(&mut gg, &mut x, r) {
            return false;
        }
        f[mode][row * r..(row + 1) * r].copy_from_slice(&x);
    }
    true
}

fn residual(t: &[f64], dims: [usize; 3], f: &[Vec<f64>; 3], r: usize) -> f64 {
    let [da, db, dc] = dims;
    let mut err = 0.0;
    for i in 0..da {
        for j in 0..db {
            for k in 0..dc {
                let approx: f64 = (0..r).map(|a| f[0][i * r + a] * f[1][j * r + a] * f[2][k * r + a]).sum();
                let d = t[(i * db + j) * dc + k] - approx;
                err += d * d;
            }
        }
    }
    err.sqrt()
}

/// Rationalises the two leading factors and solves the third exactly.
fn exact_from_float(t: &Tensor3, f: &[Vec<f64>; 3], r: usize) -> Option<Decomposition> {
    let [da, db, dc] = t.dims();
    let mut xs = Vec::with_capacity(r);
    let mut ys = Vec::with_capacity(r);
    for a in 0..r {
        let col = |m: usize, n: usize| -> Option<Vec<Q>> {
            let raw: Vec<f64> = (0..n).map(|i| f[m][i * r + a]).collect();
            let peak = raw.iter().copied().max_by(|x, y| x.abs().total_cmp(&y.abs()))?;
            if peak.abs() < 1e-9 {
                return None;
            }
            raw.iter()
                .map(|&v| {
                    let s = v / peak;
                    if s.abs() < 1e-9 {
                        Some(Q::zero())
                    } else {
                        rationalize(s, 1_000_000)
                    }
                })
                .collect()
        };
        xs.push(col(0, da)?);
        ys.push(col(1, db)?);
    }
    let mut span = SparseSpan::new();
    for a in 0..r {
        let mut v = SparseVec::new();
        for (i, x) in xs[a].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in ys[a].iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                v.insert(i * db + j, x * y);
            }
        }
        span.insert_tagged(&v, a);
    }
    let mut zs = vec![vec![Q::zero(); dc]; r];
    for k in 0..dc {
        let target = flatten(t, Mode::C).row_vectors()[k].clone();
        let sol = span.solve(&target)?;
        for (a, c) in sol {
            zs[a][k] = c;
        }
    }
    let terms: Vec<RankOneTerm> = (0..r)
        .filter(|&a| zs[a].iter().any(|z| !z.is_zero()))
        .map(|a| RankOneTerm {
            x: xs[a].clone(),
            y: ys[a].clone(),
            z: zs[a].clone(),
        })
        .collect();
    let d = Decomposition {
        target_dims: t.dims(),
        terms,
    };
    d.certifies(t).then_some(d)
}

/// Alternating least squares with restarts, verified exactly.
fn als_search(t: &Tensor3, r: usize, effort: &Effort) -> Option<Decomposition> {
    if r == 0 {
        return None;
    }
    let dims = t.dims();
    let tf = dense(t);
    let norm = tf.iter().map(|x| x * x).sum::<f64>().sqrt();
    for restart in 0..effort.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(effort.seed.wrapping_add(1_000_003 * restart as u64 + r as u64));
        let mut f: [Vec<f64>; 3] = dims.map(|n| (0..n * r).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut ok = true;
        for it in 0..effort.iterations {
            for m in 0..3 {
                ok &= als_update(&tf, dims, &mut f, m, r);
            }
            if !ok {
                break;
            }
            if it % 20 == 19 && residual(&tf, dims, &f, r) < 1e-11 * norm.max(1.0) {
                break;
            }
        }
        if ok && residual(&tf, dims, &f, r) < 1e-7 * norm.max(1.0) {
            if let Some(d) = exact_from_float(t, &f, r) {
                return Some(d);
            }
        }
    }
    None
}

/// An exact decomposition with at most `target_r` terms, or `None`.
pub fn decomposition_search(t: &Tensor3, target_r: usize, effort: &Effort) -> Option<Decomposition> {
    let structured = structured_decomposition(t);
    if structured.len() <= target_r {
        return Some(structured);
    }
    als_search(t, target_r, effort).filter(|d| d.certifies(t) && d.len() <= target_r)
}

/// A concise restriction `S` with maps `L_X` such that `T = (L_A ⊗ L_B ⊗ L_C) S`.
struct SupportLift {
    support: Tensor3,
    lift: [Vec<Vec<Q>>; 3],
}

impl SupportLift {
    fn new(t: &Tensor3) -> Self {
        let kept = Mode::ALL.map(|m| independent_coordinates(t, m));
        let support = restrict(t, &kept[0], &kept[1], &kept[2]).expect("coordinates in range");
        let lift = Mode::ALL.map(|m| {
            let rows = flatten(t, m).row_vectors();
            let idx = &kept[m.index()];
            let mut span = SparseSpan::new();
            for (p, &i) in idx.iter().enumerate() {
                span.insert_tagged(&rows[i], p);
            }
            // lift[p][i]: coefficient of kept slice p in original slice i.
            let mut l = vec![vec![Q::zero(); t.dim(m)]; idx.len()];
            for (i, row) in rows.iter().enumerate() {
                for (p, c) in span.solve(row).expect("kept slices span the flattening") {
                    l[p][i] = c;
                }
            }
            l
        });
        Self { support, lift }
    }

    fn map(&self, mode: usize, v: &[Q]) -> Vec<Q> {
        let n = self.lift[mode].first().map_or(0, |r| r.len());
        let mut out = vec![Q::zero(); n];
        for (p, c) in v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (o, l) in out.iter_mut().zip(&self.lift[mode][p]) {
                if !l.is_zero() {
                    *o += c * l;
                }
            }
        }
        out
    }

    fn lift_decomposition(&self, d: &Decomposition, dims: [usize; 3]) -> Decomposition {
        Decomposition {
            target_dims: dims,
            terms: d
                .terms
                .iter()
                .map(|t| RankOneTerm {
                    x: self.map(0, &t.x),
                    y: self.map(1, &t.y),
                    z: self.map(2, &t.z),
                })
                .collect(),
        }
    }
}

/// Certified interval for the rank with witnesses on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub lower: usize,
    pub lower_witness: String,
    pub upper: usize,
    pub upper_witness: Option<Decomposition>,
    pub exact: bool,
}

impl RankCertificate {
    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "lower_witness": self.lower_witness,
        });
        if let Some(d) = &self.upper_witness {
            v["witness"] = d.to_json_value();
        }
        v
    }
}

/// The affine family `t + span(dirs)` of tensors reachable by modifications.
struct Family {
    t: Tensor3,
    dirs: Vec<Tensor3>,
}

impl Family {
    /// `max_Y` of the `Y`-flattening rank of `t` modulo the `Y`-rows of every direction,
    /// a lower bound on the rank of each member.
    fn flattening_bound(&self) -> usize {
        Mode::ALL
            .iter()
            .map(|&y| {
                let mut span = SparseSpan::new();
                for d in &self.dirs {
                    for row in flatten(d, y).row_vectors() {
                        span.insert(&row);
                    }
                }
                let base = span.dim();
                for row in flatten(&self.t, y).row_vectors() {
                    span.insert(&row);
                }
                span.dim() - base
            })
            .max()
            .unwrap_or(0)
    }

    /// Removes a maximal independent set of mode slices that no direction touches.
    /// Returns the family of modifications and the number of removed slices.
    fn peel(&self, mode: Mode, rank_one_only: bool) -> Result<Option<(Family, usize)>> {
        let n = self.t.dim(mode);
        let touched: Vec<bool> = (0..n).map(|i| self.dirs.iter().any(|d| !d.slice(mode, i).is_zero())).collect();
        let mut span = SparseSpan::new();
        let mut removed = Vec::new();
        for (i, &hit) in touched.iter().enumerate() {
            let m = self.t.slice(mode, i);
            if hit || m.is_zero() || (rank_one_only && m.rank() != 1) {
                continue;
            }
            if span.insert(&m.to_sparse_vec()) {
                removed.push(i);
            }
        }
        if removed.is_empty() {
            return Ok(None);
        }
        let kept: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
        let cut = |x: &Tensor3| -> Result<Tensor3> {
            let lists: Vec<Vec<usize>> = Mode::ALL
                .iter()
                .map(|&m| if m == mode { kept.clone() } else { (0..x.dim(m)).collect() })
                .collect();
            restrict(x, &lists[0], &lists[1], &lists[2])
        };
        let t = cut(&self.t)?;
        let mut dirs = self.dirs.iter().map(cut).collect::<Result<Vec<_>>>()?;
        for &i in &removed {
            let w = self.t.slice(mode, i);
            for pos in 0..kept.len() {
                let mut d = Tensor3::zeros(t.dims());
                d.add_slice(mode, pos, &w, &Q::one())?;
                dirs.push(d);
            }
        }
        dirs.retain(|d| !d.is_zero());
        Ok(Some((Family { t, dirs }, removed.len())))
    }
}

/// Iterated substitution: each peel removes `w` slices and contributes `w`.
fn chain_bound(f: &Family, used: [bool; 3]) -> Result<(usize, String)> {
    let base = f.flattening_bound();
    let mut best = (base, format!("flattening {base}"));
    for mode in Mode::ALL {
        if used[mode.index()] {
            continue;
        }
        for rank_one_only in [true, false] {
            let Some((g, w)) = f.peel(mode, rank_one_only)? else {
                continue;
            };
            let mut next = used;
            next[mode.index()] = true;
            let (sub, why) = chain_bound(&g, next)?;
            if w + sub > best.0 {
                best = (w + sub, format!("{}({w}) {why}", mode.letter()));
            }
        }
    }
    Ok(best)
}

/// Best lower bound from flattenings and substitution over rank-one coordinate slices.
fn lower_bound_scan(s: &Tensor3) -> Result<(usize, String)> {
    let ranks = flattening_ranks(s).ranks;
    let (mut best, mut why) = (0, String::new());
    for m in Mode::ALL {
        if ranks[m.index()] > best {
            best = ranks[m.index()];
            why = format!("flattening {}", m.letter());
        }
    }
    for mode in Mode::ALL {
        let slices: Vec<MatrixQ> = (0..s.dim(mode))
            .map(|i| s.slice(mode, i))
            .filter(|m| m.rank() == 1)
            .collect();
        if slices.is_empty() {
            continue;
        }
        let ambient = slices[0].dims();
        let mut candidates: Vec<MatrixSubspace> = vec![MatrixSubspace::spanned_by(ambient, &slices)?];
        for m in &slices {
            candidates.push(MatrixSubspace::spanned_by(ambient, std::slice::from_ref(m))?);
        }
        for w in candidates {
            let b = substitution_lower_bound(s, &w, mode)?;
            if b > best {
                best = b;
                why = format!("substitution in mode {} with dim W = {}", mode.letter(), w.dim());
            }
        }
    }
    let (chain, steps) = chain_bound(&Family { t: s.clone(), dirs: Vec::new() }, [false; 3])?;
    if chain > best {
        best = chain;
        why = format!("substitution chain {steps}");
    }
    Ok((best, why))
}

/// Lower bound by flattening and substitution, upper bound by exact
/// decompositions; both are computed on the support and lifted back.
pub fn certified_rank(t: &Tensor3, effort: &Effort) -> Result<RankCertificate> {
    if t.is_zero() {
        return Ok(RankCertificate {
            lower: 0,
            lower_witness: "zero tensor".into(),
            upper: 0,
            upper_witness: Some(Decomposition {
                target_dims: t.dims(),
                terms: Vec::new(),
            }),
            exact: true,
        });
    }
    let lift = SupportLift::new(t);
    let s = &lift.support;
    let (lower, lower_witness) = lower_bound_scan(s)?;
    let mut best = structured_decomposition(s);
    for r in lower..best.len() {
        if let Some(d) = als_search(s, r, effort) {
            best = d;
            break;
        }
    }
    let witness = lift.lift_decomposition(&best, t.dims());
    if !witness.certifies(t) {
        return Err(Error::Precondition("lifted decomposition failed exact re-summation".into()));
    }
    let upper = witness.len();
    assert!(lower <= upper, "lower bound {lower} exceeds certified upper bound {upper}");
    Ok(RankCertificate {
        lower,
        lower_witness,
        upper,
        upper_witness: Some(witness),
        exact: lower == upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{augment, clone_tensor};

    fn w_state() -> Tensor3 {
        Tensor3::from_entries([2, 2, 2], [([0, 0, 1], q(1)), ([0, 1, 0], q(1)), ([1, 0, 0], q(1))]).unwrap()
    }

    fn e11(r: usize, c: usize) -> MatrixSubspace {
        MatrixSubspace::new([r, c], vec![MatrixQ::unit(r, c, 0, 0)]).unwrap()
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitution_lower_bound(&Tensor3::diag(4), &e11(4, 4), Mode::C).unwrap(), 4);
        assert_eq!(substitution_lower_bound(&w_state(), &e11(2, 2), Mode::C).unwrap(), 2);
        let zero = MatrixSubspace::zero([2, 2]);
        assert_eq!(substitution_lower_bound(&w_state(), &zero, Mode::C).unwrap(), 2);
        let outside = MatrixSubspace::new([2, 2], vec![MatrixQ::unit(2, 2, 1, 1)]).unwrap();
        let err = substitution_lower_bound(&w_state(), &outside, Mode::C).unwrap_err();
        assert_eq!(err.to_string(), "W ⊄ T(C*)");
    }

    #[test]
    fn strassen_resums() {
        let d = strassen_decomposition();
        assert_eq!(d.len(), 7);
        assert!(d.certifies(&matmul_tensor(2, 2, 2).unwrap()));
    }

    #[test]
    fn search_fast_paths() {
        let e = Effort::default();
        assert_eq!(decomposition_search(&Tensor3::diag(5), 5, &e).unwrap().len(), 5);
        let r1 = Tensor3::rank_one(&[q(1), q(-2)], &[q(3), q(0), q(1)], &[q(1), q(1)]);
        assert_eq!(decomposition_search(&r1, 1, &e).unwrap().len(), 1);
        let m = matmul_tensor(2, 2, 2).unwrap();
        assert!(decomposition_search(&m, 7, &e).unwrap().certifies(&m));
    }

    #[test]
    fn als_recovers_rational_rank_two() {
        // Rank 2 but no slice of any mode has rank one.
        let a = Tensor3::rank_one(&[q(1), q(2)], &[q(1), q(1)], &[q(3), q(1)]);
        let b = Tensor3::rank_one(&[q(1), q(-1)], &[q(2), q(-1)], &[q(1), q(1)]);
        let t = a.add(&b).unwrap();
        let d = als_search(&t, 2, &Effort::default()).expect("found");
        assert!(d.certifies(&t));
    }

    #[test]
    fn generic_rank_values() {
        assert_eq!(generic_rank(4), 7);
        assert_eq!(generic_rank(5), 10);
        assert_eq!(generic_rank(2), 2);
        assert!(!generic_rank_in_stated_range(2));
    }

    #[test]
    fn clone_transfer() {
        let one = Decomposition {
            target_dims: [1, 1, 1],
            terms: vec![RankOneTerm::new(vec![q(2)], vec![q(1)], vec![q(1)]).unwrap()],
        };
        let t = transfer_clone_decomposition(&one, 3).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.to_tensor().unwrap().nnz(), 27);

        let d = structured_decomposition(&Tensor3::diag(2));
        let c = transfer_clone_decomposition(&d, 2).unwrap();
        assert!(c.certifies(&clone_tensor(&Tensor3::diag(2), 2).unwrap()));
    }

    #[test]
    fn certified_small_cases() {
        let e = Effort::default();
        for n in 1..=4 {
            let c = certified_rank(&Tensor3::diag(n), &e).unwrap();
            assert!(c.exact && c.lower == n, "{c:?}");
        }
        let c = certified_rank(&clone_tensor(&Tensor3::diag(3), 2).unwrap(), &e).unwrap();
        assert!(c.exact && c.lower == 3);
        let c = certified_rank(&w_state(), &e).unwrap();
        assert!(c.exact && c.lower == 3, "{c:?}");
        let z = certified_rank(&Tensor3::zeros([2, 2, 2]), &e).unwrap();
        assert!(z.exact && z.upper == 0);
    }

    #[test]
    fn augmented_zero_is_exact() {
        let ua = MatrixSubspace::new([3, 3], vec![MatrixQ::unit(3, 3, 0, 1), MatrixQ::unit(3, 3, 2, 2)]).unwrap();
        let ub = MatrixSubspace::new([3, 3], vec![MatrixQ::unit(3, 3, 0, 0)]).unwrap();
        let uc = MatrixSubspace::new([3, 3], vec![MatrixQ::unit(3, 3, 1, 2)]).unwrap();
        let t = augment(&Tensor3::zeros([3, 3, 3]), &ua, &ub, &uc).unwrap();
        let c = certified_rank(&t, &Effort::default()).unwrap();
        assert!(c.exact && c.lower == 4, "{c:?}");
    }

    #[test]
    fn augmented_zero_with_full_subspaces() {
        let o = |x: [i64; 2], y: [i64; 2]| MatrixQ::outer(&x.map(q), &y.map(q));
        let ua = MatrixSubspace::new([2, 2], vec![o([1, -2], [2, 1])]).unwrap();
        let ub = MatrixSubspace::new([2, 2], vec![o([1, 1], [1, 2]), o([0, 1], [1, -1])]).unwrap();
        let uc = MatrixSubspace::new([2, 2], vec![o([2, 1], [1, 1]), o([1, 0], [-1, 1])]).unwrap();
        let t = augment(&Tensor3::zeros([2, 2, 2]), &ua, &ub, &uc).unwrap();
        let c = certified_rank(&t, &Effort::default()).unwrap();
        assert!(c.exact && c.lower == 5, "{c:?}");
    }
}
