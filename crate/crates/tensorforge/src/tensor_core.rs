// SPDX-License-Identifier: Apache-2.0

//! Sparse order-3 tensors and matrices over exact rationals.

use crate::error::{Error, Result};
use crate::linalg::{self, SparseVec};
use crate::rational::{format_q, parse_q, Q};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::A, Mode::B, Mode::C];

    pub fn index(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
            Mode::C => 2,
        }
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C'][self.index()]
    }

    /// The two remaining modes, in order.
    pub fn others(self) -> [Mode; 2] {
        match self {
            Mode::A => [Mode::B, Mode::C],
            Mode::B => [Mode::A, Mode::C],
            Mode::C => [Mode::A, Mode::B],
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "A" | "a" => Ok(Mode::A),
            "B" | "b" => Ok(Mode::B),
            "C" | "c" => Ok(Mode::C),
            _ => Err(Error::Malformed(format!("unknown mode {s:?}"))),
        }
    }
}

/// Sparse rational matrix with no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixQ {
    dims: [usize; 2],
    entries: BTreeMap<(usize, usize), Q>,
}

impl MatrixQ {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            dims: [rows, cols],
            entries: BTreeMap::new(),
        }
    }

    /// Builds a matrix, summing repeated positions and dropping zeros.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = ((usize, usize), Q)>,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols);
        for (idx, v) in entries {
            m.add_at(idx, &v)?;
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i), Q::one());
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.entries.insert((i, j), Q::one());
            }
        }
        m
    }

    /// The unit matrix `e_i ⊗ e_j`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.entries.insert((i, j), Q::one());
        m
    }

    pub fn outer(x: &[Q], y: &[Q]) -> Self {
        let mut m = Self::zeros(x.len(), y.len());
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                m.entries.insert((i, j), a * b);
            }
        }
        m
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    pub fn cols(&self) -> usize {
        self.dims[1]
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Q> {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_at(&mut self, (i, j): (usize, usize), v: &Q) -> Result<()> {
        if i >= self.dims[0] || j >= self.dims[1] {
            return Err(Error::IndexOutOfRange(format!(
                "({i}, {j}) in {}x{}",
                self.dims[0], self.dims[1]
            )));
        }
        if v.is_zero() {
            return Ok(());
        }
        let e = self.entries.entry((i, j)).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixQ) -> Result<MatrixQ> {
        self.add_scaled(other, &Q::one())
    }

    pub fn add_scaled(&self, other: &MatrixQ, c: &Q) -> Result<MatrixQ> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let mut out = self.clone();
        for (&idx, v) in &other.entries {
            out.add_at(idx, &(v * c))?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> MatrixQ {
        if c.is_zero() {
            return Self::zeros(self.dims[0], self.dims[1]);
        }
        MatrixQ {
            dims: self.dims,
            entries: self.entries.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn transpose(&self) -> MatrixQ {
        MatrixQ {
            dims: [self.dims[1], self.dims[0]],
            entries: self.entries.iter().map(|(&(i, j), v)| ((j, i), v.clone())).collect(),
        }
    }

    /// Row-major vectorisation, index `i·cols + j`.
    pub fn to_sparse_vec(&self) -> SparseVec {
        let c = self.dims[1];
        self.entries
            .iter()
            .map(|(&(i, j), v)| (i * c + j, v.clone()))
            .collect()
    }

    pub fn from_sparse_vec(rows: usize, cols: usize, v: &SparseVec) -> Result<MatrixQ> {
        if cols == 0 && !v.is_empty() {
            return Err(Error::IndexOutOfRange("vector in empty matrix".into()));
        }
        MatrixQ::from_entries(rows, cols, v.iter().map(|(&k, x)| ((k / cols, k % cols), x.clone())))
    }

    pub fn row_vectors(&self) -> Vec<SparseVec> {
        let mut rows = vec![SparseVec::new(); self.dims[0]];
        for (&(i, j), v) in &self.entries {
            rows[i].insert(j, v.clone());
        }
        rows
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut out = vec![vec![Q::zero(); self.dims[1]]; self.dims[0]];
        for (&(i, j), v) in &self.entries {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn mul_vec(&self, x: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dims[0]];
        for (&(i, j), v) in &self.entries {
            if !x[j].is_zero() {
                out[i] += v * &x[j];
            }
        }
        out
    }

    /// Kronecker product; entry `((i1·r2+i2), (j1·c2+j2))`.
    pub fn kron(&self, other: &MatrixQ) -> MatrixQ {
        let [r2, c2] = other.dims;
        let mut out = MatrixQ::zeros(self.dims[0] * r2, self.dims[1] * c2);
        for (&(i1, j1), v1) in &self.entries {
            for (&(i2, j2), v2) in &other.entries {
                out.entries.insert((i1 * r2 + i2, j1 * c2 + j2), v1 * v2);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        matrix_rank(self)
    }
}

/// Sparse order-3 tensor with 0-based indices and no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor3 {
    dims: [usize; 3],
    entries: BTreeMap<[usize; 3], Q>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a tensor, summing repeated indices and dropping zeros.
    pub fn from_entries(
        dims: [usize; 3],
        entries: impl IntoIterator<Item = ([usize; 3], Q)>,
    ) -> Result<Self> {
        let mut t = Self::zeros(dims);
        for (idx, v) in entries {
            t.add_at(idx, &v)?;
        }
        Ok(t)
    }

    /// `Σ_{i<n} e_i ⊗ e_i ⊗ e_i`.
    pub fn diag(n: usize) -> Self {
        let mut t = Self::zeros([n, n, n]);
        for i in 0..n {
            t.entries.insert([i, i, i], Q::one());
        }
        t
    }

    pub fn ones(dims: [usize; 3]) -> Self {
        let mut t = Self::zeros(dims);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    t.entries.insert([i, j, k], Q::one());
                }
            }
        }
        t
    }

    pub fn unit(dims: [usize; 3], idx: [usize; 3]) -> Result<Self> {
        Self::from_entries(dims, [(idx, Q::one())])
    }

    pub fn rank_one(x: &[Q], y: &[Q], z: &[Q]) -> Self {
        let mut t = Self::zeros([x.len(), y.len(), z.len()]);
        t.add_rank_one(x, y, z, &Q::one());
        t
    }

    fn add_rank_one(&mut self, x: &[Q], y: &[Q], z: &[Q], c: &Q) {
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a * b * c;
                for (k, g) in z.iter().enumerate().filter(|(_, g)| !g.is_zero()) {
                    self.add_unchecked([i, j, k], &(&ab * g));
                }
            }
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.index()]
    }

    pub fn entries(&self) -> &BTreeMap<[usize; 3], Q> {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: [usize; 3]) -> Q {
        self.entries.get(&idx).cloned().unwrap_or_else(Q::zero)
    }

    fn add_unchecked(&mut self, idx: [usize; 3], v: &Q) {
        if v.is_zero() {
            return;
        }
        let e = self.entries.entry(idx).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&idx);
        }
    }

    pub fn add_at(&mut self, idx: [usize; 3], v: &Q) -> Result<()> {
        if (0..3).any(|m| idx[m] >= self.dims[m]) {
            return Err(Error::IndexOutOfRange(format!(
                "{idx:?} in {:?}",
                self.dims
            )));
        }
        self.add_unchecked(idx, v);
        Ok(())
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.add_scaled(other, &Q::one())
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.add_scaled(other, &-Q::one())
    }

    pub fn add_scaled(&self, other: &Tensor3, c: &Q) -> Result<Tensor3> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let mut out = self.clone();
        for (&idx, v) in &other.entries {
            out.add_unchecked(idx, &(v * c));
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Tensor3 {
        if c.is_zero() {
            return Tensor3::zeros(self.dims);
        }
        Tensor3 {
            dims: self.dims,
            entries: self.entries.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Relabels the coordinates of one mode: index `i` moves to `perm[i]`.
    pub fn relabel(&self, mode: Mode, perm: &[usize]) -> Result<Tensor3> {
        let m = mode.index();
        let n = self.dims[m];
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        if perm.len() != n || distinct.len() != n || perm.iter().any(|&p| p >= n) {
            return Err(Error::Precondition(format!("not a permutation of 0..{n}")));
        }
        let mut out = Tensor3::zeros(self.dims);
        for (idx, v) in &self.entries {
            let mut j = *idx;
            j[m] = perm[idx[m]];
            out.entries.insert(j, v.clone());
        }
        Ok(out)
    }

    /// The slice `T(e_idx*)` as a matrix: mode A gives b×c, B gives a×c, C gives a×b.
    pub fn slice(&self, mode: Mode, idx: usize) -> MatrixQ {
        let [a, b, c] = self.dims;
        let (rows, cols) = match mode {
            Mode::A => (b, c),
            Mode::B => (a, c),
            Mode::C => (a, b),
        };
        let mut m = MatrixQ::zeros(rows, cols);
        for (&[i, j, k], v) in &self.entries {
            let pos = match mode {
                Mode::A if i == idx => (j, k),
                Mode::B if j == idx => (i, k),
                Mode::C if k == idx => (i, j),
                _ => continue,
            };
            m.entries.insert(pos, v.clone());
        }
        m
    }

    /// Places matrix `m` at coordinate `idx` of `mode`, the inverse of [`Tensor3::slice`].
    pub fn add_slice(&mut self, mode: Mode, idx: usize, m: &MatrixQ, c: &Q) -> Result<()> {
        for (&(p, q), v) in m.entries() {
            let pos = match mode {
                Mode::A => [idx, p, q],
                Mode::B => [p, idx, q],
                Mode::C => [p, q, idx],
            };
            self.add_at(pos, &(v * c))?;
        }
        Ok(())
    }
}

/// One simple tensor `x ⊗ y ⊗ z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneTerm {
    pub x: Vec<Q>,
    pub y: Vec<Q>,
    pub z: Vec<Q>,
}

impl RankOneTerm {
    pub fn new(x: Vec<Q>, y: Vec<Q>, z: Vec<Q>) -> Result<Self> {
        for (name, v) in [("x", &x), ("y", &y), ("z", &z)] {
            if v.iter().all(|e| e.is_zero()) {
                return Err(Error::Precondition(format!("rank-one factor {name} is zero")));
            }
        }
        Ok(Self { x, y, z })
    }

    pub fn to_tensor(&self) -> Tensor3 {
        Tensor3::rank_one(&self.x, &self.y, &self.z)
    }
}

/// A list of rank-one terms claimed to sum to a tensor of shape `target_dims`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub target_dims: [usize; 3],
    pub terms: Vec<RankOneTerm>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact re-summation of all terms.
    pub fn to_tensor(&self) -> Result<Tensor3> {
        let mut t = Tensor3::zeros(self.target_dims);
        for term in &self.terms {
            let [a, b, c] = self.target_dims;
            if term.x.len() != a || term.y.len() != b || term.z.len() != c {
                return Err(Error::DimMismatch(format!(
                    "term of shape ({}, {}, {}) in {:?}",
                    term.x.len(),
                    term.y.len(),
                    term.z.len(),
                    self.target_dims
                )));
            }
            t.add_rank_one(&term.x, &term.y, &term.z, &Q::one());
        }
        Ok(t)
    }

    /// True iff the terms re-sum to `t` exactly.
    pub fn certifies(&self, t: &Tensor3) -> bool {
        self.target_dims == t.dims() && self.to_tensor().is_ok_and(|s| &s == t)
    }

    pub fn to_json_value(&self) -> Value {
        let vec = |v: &[Q]| Value::Array(v.iter().map(|x| Value::String(format_q(x))).collect());
        json!({
            "dims": self.target_dims,
            "terms": self.terms.iter().map(|t| json!({
                "x": vec(&t.x),
                "y": vec(&t.y),
                "z": vec(&t.z),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Flattening matrix: mode A is a×(b·c) with column `j·c + k`; B is b×(a·c)
/// with column `i·c + k`; C is c×(a·b) with column `i·b + j`.
pub fn flatten(t: &Tensor3, mode: Mode) -> MatrixQ {
    let [a, b, c] = t.dims;
    let (rows, cols) = match mode {
        Mode::A => (a, b * c),
        Mode::B => (b, a * c),
        Mode::C => (c, a * b),
    };
    let mut m = MatrixQ::zeros(rows, cols);
    for (&[i, j, k], v) in &t.entries {
        let pos = match mode {
            Mode::A => (i, j * c + k),
            Mode::B => (j, i * c + k),
            Mode::C => (k, i * b + j),
        };
        m.entries.insert(pos, v.clone());
    }
    m
}

/// Exact rank over the rationals.
pub fn matrix_rank(m: &MatrixQ) -> usize {
    linalg::rank_sparse(&m.row_vectors(), m.cols())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatteningRanks {
    pub ranks: [usize; 3],
    pub dims: [usize; 3],
}

impl FlatteningRanks {
    pub fn get(&self, mode: Mode) -> usize {
        self.ranks[mode.index()]
    }

    /// Rank equals the mode's dimension.
    pub fn is_concise_in(&self, mode: Mode) -> bool {
        self.ranks[mode.index()] == self.dims[mode.index()]
    }

    pub fn is_concise(&self) -> bool {
        Mode::ALL.iter().all(|&m| self.is_concise_in(m))
    }
}

pub fn flattening_ranks(t: &Tensor3) -> FlatteningRanks {
    FlatteningRanks {
        ranks: Mode::ALL.map(|m| matrix_rank(&flatten(t, m))),
        dims: t.dims,
    }
}

/// Coordinates of the lexicographically first independent rows of a flattening.
pub fn independent_coordinates(t: &Tensor3, mode: Mode) -> Vec<usize> {
    linalg::independent_rows(&flatten(t, mode).row_vectors())
}

/// Restriction to coordinate subspaces that map isomorphically onto the three coimages.
pub fn support(t: &Tensor3) -> Result<Tensor3> {
    if t.is_zero() {
        return Err(Error::NoSupport);
    }
    let [ra, rb, rc] = Mode::ALL.map(|m| independent_coordinates(t, m));
    restrict(t, &ra, &rb, &rc)
}

pub fn direct_sum(t1: &Tensor3, t2: &Tensor3) -> Tensor3 {
    let [a1, b1, c1] = t1.dims;
    let mut out = Tensor3::zeros([a1 + t2.dims[0], b1 + t2.dims[1], c1 + t2.dims[2]]);
    out.entries = t1.entries.clone();
    for (&[i, j, k], v) in &t2.entries {
        out.entries.insert([a1 + i, b1 + j, c1 + k], v.clone());
    }
    out
}

/// Entry `((i1·a2+i2), (j1·b2+j2), (k1·c2+k2))` equals `T1(i1,j1,k1)·T2(i2,j2,k2)`.
pub fn kronecker(t1: &Tensor3, t2: &Tensor3) -> Tensor3 {
    let [a2, b2, c2] = t2.dims;
    let mut out = Tensor3::zeros([t1.dims[0] * a2, t1.dims[1] * b2, t1.dims[2] * c2]);
    for (&[i1, j1, k1], v1) in &t1.entries {
        for (&[i2, j2, k2], v2) in &t2.entries {
            out.entries
                .insert([i1 * a2 + i2, j1 * b2 + j2, k1 * c2 + k2], v1 * v2);
        }
    }
    out
}

/// Subtensor on the selected coordinates; output index is the position in each list.
pub fn restrict(t: &Tensor3, rows_a: &[usize], rows_b: &[usize], rows_c: &[usize]) -> Result<Tensor3> {
    let lists = [rows_a, rows_b, rows_c];
    let mut maps: Vec<BTreeMap<usize, usize>> = Vec::with_capacity(3);
    for (m, list) in lists.iter().enumerate() {
        let mut map = BTreeMap::new();
        for (pos, &i) in list.iter().enumerate() {
            if i >= t.dims[m] {
                return Err(Error::IndexOutOfRange(format!(
                    "coordinate {i} in mode {} of size {}",
                    Mode::ALL[m].letter(),
                    t.dims[m]
                )));
            }
            if map.insert(i, pos).is_some() {
                return Err(Error::Precondition(format!(
                    "duplicate coordinate {i} in mode {}",
                    Mode::ALL[m].letter()
                )));
            }
        }
        maps.push(map);
    }
    let mut out = Tensor3::zeros([rows_a.len(), rows_b.len(), rows_c.len()]);
    for (&[i, j, k], v) in &t.entries {
        if let (Some(&p), Some(&q), Some(&r)) = (maps[0].get(&i), maps[1].get(&j), maps[2].get(&k)) {
            out.entries.insert([p, q, r], v.clone());
        }
    }
    Ok(out)
}

/// `(max{rA, rB, rC}, min{rA·rB, rA·rC, rB·rC})`.
pub fn trivial_rank_bounds(t: &Tensor3) -> (usize, usize) {
    let [ra, rb, rc] = flattening_ranks(t).ranks;
    (ra.max(rb).max(rc), (ra * rb).min(ra * rc).min(rb * rc))
}

/// Structure tensor of `(i×j)·(j×k)` matrix multiplication with dims `(ij, jk, ik)`.
/// The unit `x_{pq} ⊗ y_{qs} ⊗ z_{ps}` sits at `(p·j+q, q·k+s, p·k+s)`.
pub fn matmul_tensor(i: usize, j: usize, k: usize) -> Result<Tensor3> {
    if i == 0 || j == 0 || k == 0 {
        return Err(Error::Precondition("matmul_tensor needs i, j, k >= 1".into()));
    }
    let mut t = Tensor3::zeros([i * j, j * k, i * k]);
    for p in 0..i {
        for q in 0..j {
            for s in 0..k {
                t.entries.insert([p * j + q, q * k + s, p * k + s], Q::one());
            }
        }
    }
    Ok(t)
}

// ---- JSON ----

fn index_of(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Malformed(format!("{what} must be a non-negative integer")))
}

fn object_with_keys<'a>(v: &'a Value, keys: &[&str]) -> Result<&'a serde_json::Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Malformed("expected a JSON object".into()))?;
    for k in obj.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(Error::Malformed(format!("unexpected key {k:?}")));
        }
    }
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(Error::Malformed(format!("missing key {k:?}")));
        }
    }
    Ok(obj)
}

fn dims_of<const N: usize>(v: &Value) -> Result<[usize; N]> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == N)
        .ok_or_else(|| Error::Malformed(format!("dims must be an array of {N} integers")))?;
    let mut out = [0usize; N];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = index_of(x, "dimension")?;
    }
    Ok(out)
}

fn entry_value(v: &Value) -> Result<Q> {
    let s = v
        .as_str()
        .ok_or_else(|| Error::Malformed("entry value must be a \"p/q\" string".into()))?;
    parse_q(s)
}

pub fn tensor_to_value(t: &Tensor3) -> Value {
    let entries: Vec<Value> = t
        .entries
        .iter()
        .map(|(&[i, j, k], v)| json!([i, j, k, format_q(v)]))
        .collect();
    json!({ "dims": t.dims, "entries": entries })
}

pub fn tensor_from_value(v: &Value) -> Result<Tensor3> {
    let obj = object_with_keys(v, &["dims", "entries"])?;
    let dims: [usize; 3] = dims_of(&obj["dims"])?;
    let list = obj["entries"]
        .as_array()
        .ok_or_else(|| Error::Malformed("entries must be an array".into()))?;
    let mut t = Tensor3::zeros(dims);
    for e in list {
        let e = e
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::Malformed("entry must be [i, j, k, \"p/q\"]".into()))?;
        let idx = [index_of(&e[0], "i")?, index_of(&e[1], "j")?, index_of(&e[2], "k")?];
        if (0..3).any(|m| idx[m] >= dims[m]) {
            return Err(Error::IndexOutOfRange(format!("{idx:?} in {dims:?}")));
        }
        let x = entry_value(&e[3])?;
        if x.is_zero() {
            return Err(Error::ZeroEntry(format!("{idx:?}")));
        }
        if t.entries.insert(idx, x).is_some() {
            return Err(Error::DuplicateEntry(format!("{idx:?}")));
        }
    }
    Ok(t)
}

pub fn tensor_to_json(t: &Tensor3) -> String {
    tensor_to_value(t).to_string()
}

pub fn tensor_from_json(s: &str) -> Result<Tensor3> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
    tensor_from_value(&v)
}

pub fn matrix_to_value(m: &MatrixQ) -> Value {
    let entries: Vec<Value> = m
        .entries
        .iter()
        .map(|(&(i, j), v)| json!([i, j, format_q(v)]))
        .collect();
    json!({ "dims": m.dims, "entries": entries })
}

pub fn matrix_from_value(v: &Value) -> Result<MatrixQ> {
    let obj = object_with_keys(v, &["dims", "entries"])?;
    let [rows, cols]: [usize; 2] = dims_of(&obj["dims"])?;
    let list = obj["entries"]
        .as_array()
        .ok_or_else(|| Error::Malformed("entries must be an array".into()))?;
    let mut m = MatrixQ::zeros(rows, cols);
    for e in list {
        let e = e
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::Malformed("entry must be [i, j, \"p/q\"]".into()))?;
        let (i, j) = (index_of(&e[0], "i")?, index_of(&e[1], "j")?);
        if i >= rows || j >= cols {
            return Err(Error::IndexOutOfRange(format!("({i}, {j}) in {rows}x{cols}")));
        }
        let x = entry_value(&e[2])?;
        if x.is_zero() {
            return Err(Error::ZeroEntry(format!("({i}, {j})")));
        }
        if m.entries.insert((i, j), x).is_some() {
            return Err(Error::DuplicateEntry(format!("({i}, {j})")));
        }
    }
    Ok(m)
}

pub fn matrix_to_json(m: &MatrixQ) -> String {
    matrix_to_value(m).to_string()
}

pub fn matrix_from_json(s: &str) -> Result<MatrixQ> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
    matrix_from_value(&v)
}
