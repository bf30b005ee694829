// SPDX-License-Identifier: Apache-2.0

//! Tensor builders: corresponding tensors, clones, modifications and augmented tensors.

use crate::error::{Error, Result};
use crate::linalg::{self, SparseSpan};
use crate::rational::Q;
use crate::tensor_core::{
    flatten, kronecker, matrix_from_value, matrix_to_value, MatrixQ, Mode, Tensor3,
};
use num_traits::Zero;
use serde_json::{json, Value};

/// A linear space of `rows × cols` matrices given by an independent basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSubspace {
    ambient: [usize; 2],
    basis: Vec<MatrixQ>,
}

impl MatrixSubspace {
    pub fn new(ambient: [usize; 2], basis: Vec<MatrixQ>) -> Result<Self> {
        let mut span = SparseSpan::new();
        for (l, m) in basis.iter().enumerate() {
            if m.dims() != ambient {
                return Err(Error::DimMismatch(format!(
                    "basis matrix {l} is {:?}, ambient {ambient:?}",
                    m.dims()
                )));
            }
            if !span.insert(&m.to_sparse_vec()) {
                return Err(Error::Precondition(format!(
                    "basis matrix {l} depends on the previous ones"
                )));
            }
        }
        Ok(Self { ambient, basis })
    }

    /// Span of arbitrary generators, keeping the first independent ones.
    pub fn spanned_by(ambient: [usize; 2], generators: &[MatrixQ]) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.dims() != ambient) {
            return Err(Error::DimMismatch(format!("{:?} in {ambient:?}", g.dims())));
        }
        let vecs: Vec<_> = generators.iter().map(|g| g.to_sparse_vec()).collect();
        let keep = linalg::independent_rows(&vecs);
        Ok(Self {
            ambient,
            basis: keep.into_iter().map(|i| generators[i].clone()).collect(),
        })
    }

    pub fn zero(ambient: [usize; 2]) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn ambient(&self) -> [usize; 2] {
        self.ambient
    }

    pub fn basis(&self) -> &[MatrixQ] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn span(&self) -> SparseSpan {
        let mut span = SparseSpan::new();
        for (l, m) in self.basis.iter().enumerate() {
            span.insert_tagged(&m.to_sparse_vec(), l);
        }
        span
    }

    /// Coordinates of `m` in the basis, or `None` when `m` lies outside.
    pub fn coordinates(&self, m: &MatrixQ) -> Option<Vec<Q>> {
        if m.dims() != self.ambient {
            return None;
        }
        let sol = self.span().solve(&m.to_sparse_vec())?;
        Some(
            (0..self.dim())
                .map(|l| sol.get(&l).cloned().unwrap_or_else(Q::zero))
                .collect(),
        )
    }

    pub fn contains(&self, m: &MatrixQ) -> bool {
        m.dims() == self.ambient && self.span().contains(&m.to_sparse_vec())
    }

    /// Same span, possibly different bases.
    pub fn same_span(&self, other: &MatrixSubspace) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|m| self.contains(m))
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "ambient": self.ambient,
            "basis": self.basis.iter().map(matrix_to_value).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed("subspace must be an object".into()))?;
        if let Some(k) = obj.keys().find(|k| *k != "ambient" && *k != "basis") {
            return Err(Error::Malformed(format!("unexpected key {k:?}")));
        }
        let amb = obj
            .get("ambient")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .and_then(|a| Some([a[0].as_u64()? as usize, a[1].as_u64()? as usize]))
            .ok_or_else(|| Error::Malformed("ambient must be [rows, cols]".into()))?;
        let basis = obj
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("basis must be an array".into()))?
            .iter()
            .map(matrix_from_value)
            .collect::<Result<Vec<_>>>()?;
        Self::new(amb, basis)
    }
}

/// `T_U = Σ_j e_j ⊗ u_j` with dims `(dim U, rows, cols)`.
pub fn corresponding_tensor(u: &MatrixSubspace) -> Result<Tensor3> {
    if u.dim() == 0 {
        return Err(Error::Precondition("corresponding tensor of the zero space".into()));
    }
    let [r, c] = u.ambient;
    let mut t = Tensor3::zeros([u.dim(), r, c]);
    for (j, m) in u.basis.iter().enumerate() {
        t.add_slice(Mode::A, j, m, &Q::from_integer(1.into()))?;
    }
    Ok(t)
}

fn check_clone_factor(v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::Precondition("clone factor must be at least 1".into()));
    }
    Ok(())
}

/// `T ⊠ 1_{v×v×v}`.
pub fn clone_tensor(t: &Tensor3, v: usize) -> Result<Tensor3> {
    check_clone_factor(v)?;
    Ok(kronecker(t, &Tensor3::ones([v, v, v])))
}

/// `M ⊗ 1_{v×v}` on the Kronecker index layout.
pub fn clone_matrix(m: &MatrixQ, v: usize) -> Result<MatrixQ> {
    check_clone_factor(v)?;
    Ok(m.kron(&MatrixQ::ones(v, v)))
}

/// Image of the A-flattening of the clone of `T_U`.
pub fn clone_subspace(u: &MatrixSubspace, v: usize) -> Result<MatrixSubspace> {
    check_clone_factor(v)?;
    let [r, c] = u.ambient;
    if u.dim() == 0 {
        return Ok(MatrixSubspace::zero([r * v, c * v]));
    }
    let cl = clone_tensor(&corresponding_tensor(u)?, v)?;
    let slices: Vec<MatrixQ> = (0..cl.dim(Mode::A)).map(|i| cl.slice(Mode::A, i)).collect();
    MatrixSubspace::spanned_by([r * v, c * v], &slices)
}

/// Coefficients `c(l, i)` add `c(l, i) · e_i ⊗ w_l` with `e_i` in `mode`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModificationPlan {
    pub mode: Mode,
    pub subspace: MatrixSubspace,
    pub coefficients: MatrixQ,
}

impl ModificationPlan {
    pub fn new(mode: Mode, subspace: MatrixSubspace, coefficients: MatrixQ) -> Result<Self> {
        if coefficients.rows() != subspace.dim() {
            return Err(Error::DimMismatch(format!(
                "{} coefficient rows for a subspace of dimension {}",
                coefficients.rows(),
                subspace.dim()
            )));
        }
        Ok(Self {
            mode,
            subspace,
            coefficients,
        })
    }

    /// The plan with all coefficients negated.
    pub fn negated(&self) -> Self {
        Self {
            coefficients: self.coefficients.scale(&-Q::from_integer(1.into())),
            ..self.clone()
        }
    }

    fn check_against(&self, dims: [usize; 3]) -> Result<()> {
        let [a, b, c] = dims;
        let expected = match self.mode {
            Mode::A => [b, c],
            Mode::B => [a, c],
            Mode::C => [a, b],
        };
        if self.subspace.ambient() != expected {
            return Err(Error::DimMismatch(format!(
                "mode {} subspace lives in {:?}, tensor needs {expected:?}",
                self.mode.letter(),
                self.subspace.ambient()
            )));
        }
        if self.coefficients.cols() != dims[self.mode.index()] {
            return Err(Error::DimMismatch(format!(
                "{} coefficient columns for mode {} of size {}",
                self.coefficients.cols(),
                self.mode.letter(),
                dims[self.mode.index()]
            )));
        }
        Ok(())
    }
}

/// Applies the plans in the order C, B, A; at most one plan per mode.
pub fn modify(t: &Tensor3, plans: &[ModificationPlan]) -> Result<Tensor3> {
    let mut out = t.clone();
    for mode in [Mode::C, Mode::B, Mode::A] {
        let mut selected = plans.iter().filter(|p| p.mode == mode);
        let Some(plan) = selected.next() else { continue };
        if selected.next().is_some() {
            return Err(Error::Precondition(format!(
                "more than one plan for mode {}",
                mode.letter()
            )));
        }
        plan.check_against(t.dims())?;
        for (&(l, i), c) in plan.coefficients.entries() {
            out.add_slice(mode, i, &plan.subspace.basis()[l], c)?;
        }
    }
    Ok(out)
}

/// `T + T_{U_A} + T_{U_B} + T_{U_C}` in `(a+uA) × (b+uB) × (c+uC)`.
pub fn augment(
    t: &Tensor3,
    ua: &MatrixSubspace,
    ub: &MatrixSubspace,
    uc: &MatrixSubspace,
) -> Result<Tensor3> {
    let [a, b, c] = t.dims();
    for (name, u, want) in [("U_A", ua, [b, c]), ("U_B", ub, [a, c]), ("U_C", uc, [a, b])] {
        if u.ambient() != want {
            return Err(Error::DimMismatch(format!(
                "{name} lives in {:?}, expected {want:?}",
                u.ambient()
            )));
        }
    }
    let mut out = Tensor3::zeros([a + ua.dim(), b + ub.dim(), c + uc.dim()]);
    for (&idx, v) in t.entries() {
        out.add_at(idx, v)?;
    }
    for (l, m) in ua.basis().iter().enumerate() {
        for (&(j, k), v) in m.entries() {
            out.add_at([a + l, j, k], v)?;
        }
    }
    for (l, m) in ub.basis().iter().enumerate() {
        for (&(i, k), v) in m.entries() {
            out.add_at([i, b + l, k], v)?;
        }
    }
    for (l, m) in uc.basis().iter().enumerate() {
        for (&(i, j), v) in m.entries() {
            out.add_at([i, j, c + l], v)?;
        }
    }
    Ok(out)
}

/// Span of the mode slices `T(e_i*)`, as a matrix subspace.
pub fn flattening_image(t: &Tensor3, mode: Mode) -> MatrixSubspace {
    let [a, b, c] = t.dims();
    let ambient = match mode {
        Mode::A => [b, c],
        Mode::B => [a, c],
        Mode::C => [a, b],
    };
    let slices: Vec<MatrixQ> = (0..t.dim(mode)).map(|i| t.slice(mode, i)).collect();
    let rows = flatten(t, mode).row_vectors();
    let keep = linalg::independent_rows(&rows);
    MatrixSubspace {
        ambient,
        basis: keep.into_iter().map(|i| slices[i].clone()).collect(),
    }
}
