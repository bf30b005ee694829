// SPDX-License-Identifier: Apache-2.0

//! Exact linear algebra: fraction-free rank and incremental sparse spans.

use crate::rational::{common_denominator, Q};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub type SparseVec = BTreeMap<usize, Q>;

/// Rank of an integer matrix by Bareiss elimination. Every division is exact.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let pivot = pivot_row[col].clone();
        for row in tail.iter_mut() {
            let factor = std::mem::take(&mut row[col]);
            for j in col + 1..ncols {
                let mut v = &pivot * &row[j];
                if !factor.is_zero() && !pivot_row[j].is_zero() {
                    v -= &factor * &pivot_row[j];
                }
                if !prev.is_one() {
                    v /= &prev;
                }
                row[j] = v;
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

fn integer_row(row: &[Q]) -> Vec<BigInt> {
    let d = common_denominator(row.iter());
    row.iter()
        .map(|x| (x * Q::from_integer(d.clone())).to_integer())
        .collect()
}

/// Rank of a dense rational matrix given by rows.
pub fn rank_dense(rows: &[Vec<Q>]) -> usize {
    bareiss_rank(rows.iter().map(|r| integer_row(r)).collect())
}

/// Rank of sparse rational rows living in a space of dimension `ncols`.
pub fn rank_sparse(rows: &[SparseVec], ncols: usize) -> usize {
    let rows: Vec<&SparseVec> = rows.iter().filter(|r| !r.is_empty()).collect();
    if rows.is_empty() {
        return 0;
    }
    // Keep only columns that actually occur; rank is unchanged.
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &rows {
        for &k in r.keys() {
            debug_assert!(k < ncols);
            let n = used.len();
            used.entry(k).or_insert(n);
        }
    }
    let width = used.len();
    let dense: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let d = common_denominator(r.values());
            let mut out = vec![BigInt::zero(); width];
            for (k, v) in r.iter() {
                out[used[k]] = (v * Q::from_integer(d.clone())).to_integer();
            }
            out
        })
        .collect();
    if width < dense.len() {
        bareiss_rank(transpose(&dense))
    } else {
        bareiss_rank(dense)
    }
}

fn transpose(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// `dst += c * src`, dropping cancelled entries.
pub fn add_scaled(dst: &mut SparseVec, src: &SparseVec, c: &Q) {
    if c.is_zero() {
        return;
    }
    for (k, v) in src {
        let e = dst.entry(*k).or_insert_with(Q::zero);
        *e += v * c;
        if e.is_zero() {
            dst.remove(k);
        }
    }
}

#[derive(Clone, Debug)]
struct EchelonRow {
    v: SparseVec,
    comb: SparseVec,
}

/// Incrementally built echelon basis of a span of sparse vectors.
///
/// Each stored row remembers how it was formed from the tagged inputs, so a
/// membership query can also return coefficients.
#[derive(Clone, Debug, Default)]
pub struct SparseSpan {
    rows: BTreeMap<usize, EchelonRow>,
}

impl SparseSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce_tracked(&self, v: &SparseVec, mut comb: SparseVec) -> (SparseVec, SparseVec) {
        let mut v = v.clone();
        let mut cursor = 0usize;
        loop {
            let next = v
                .range(cursor..)
                .map(|(k, _)| *k)
                .find(|k| self.rows.contains_key(k));
            let Some(k) = next else { break };
            let c = -v[&k].clone();
            let row = &self.rows[&k];
            add_scaled(&mut v, &row.v, &c);
            add_scaled(&mut comb, &row.comb, &c);
            cursor = k + 1;
        }
        (v, comb)
    }

    /// Remainder of `v` after elimination against the basis.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        self.reduce_tracked(v, SparseVec::new()).0
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v` with identifier `tag`; returns false when `v` is already in the span.
    pub fn insert_tagged(&mut self, v: &SparseVec, tag: usize) -> bool {
        let mut start = SparseVec::new();
        start.insert(tag, Q::one());
        let (rem, comb) = self.reduce_tracked(v, start);
        let Some((&pivot, lead)) = rem.iter().next() else {
            return false;
        };
        let inv = lead.recip();
        let scale = |s: SparseVec| -> SparseVec {
            s.into_iter().map(|(k, x)| (k, x * &inv)).collect()
        };
        self.rows.insert(
            pivot,
            EchelonRow {
                v: scale(rem),
                comb: scale(comb),
            },
        );
        true
    }

    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let tag = self.rows.len();
        self.insert_tagged(v, tag)
    }

    /// Coefficients `c` (keyed by tag) with `Σ c_tag · input_tag = target`, if any.
    pub fn solve(&self, target: &SparseVec) -> Option<SparseVec> {
        let (rem, comb) = self.reduce_tracked(target, SparseVec::new());
        if !rem.is_empty() {
            return None;
        }
        Some(comb.into_iter().map(|(k, x)| (k, -x)).collect())
    }
}

/// Indices of the lexicographically first maximal independent subset of `rows`.
pub fn independent_rows(rows: &[SparseVec]) -> Vec<usize> {
    let mut span = SparseSpan::new();
    rows.iter()
        .enumerate()
        .filter(|(i, r)| span.insert_tagged(r, *i))
        .map(|(i, _)| i)
        .collect()
}

pub fn to_sparse(dense: &[Q]) -> SparseVec {
    dense
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn bareiss_small_cases() {
        assert_eq!(bareiss_rank(ints(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(bareiss_rank(ints(&[&[0, 1], &[1, 0]])), 2);
        assert_eq!(bareiss_rank(ints(&[&[0, 0, 0]])), 0);
        assert_eq!(bareiss_rank(ints(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), 2);
        assert_eq!(bareiss_rank(ints(&[&[0, 1, 2], &[0, 2, 4], &[1, 0, 0]])), 2);
    }

    #[test]
    fn span_solves_with_coefficients() {
        let mut s = SparseSpan::new();
        let a = to_sparse(&[q(1), q(1), q(0)]);
        let b = to_sparse(&[q(0), q(1), q(1)]);
        assert!(s.insert_tagged(&a, 10));
        assert!(s.insert_tagged(&b, 20));
        let t = to_sparse(&[q(2), frac(1, 2), frac(-3, 2)]);
        let c = s.solve(&t).unwrap();
        assert_eq!(c[&10], q(2));
        assert_eq!(c[&20], frac(-3, 2));
        assert!(s.solve(&to_sparse(&[q(0), q(0), q(1)])).is_none());
        assert!(!s.insert(&to_sparse(&[q(1), q(2), q(1)])));
    }

    #[test]
    fn independent_rows_is_greedy() {
        let rows = vec![
            to_sparse(&[q(1), q(0)]),
            to_sparse(&[q(2), q(0)]),
            to_sparse(&[q(0), q(3)]),
            to_sparse(&[q(1), q(1)]),
        ];
        assert_eq!(independent_rows(&rows), vec![0, 2]);
    }
}
