// SPDX-License-Identifier: Apache-2.0

//! Exact evaluation of `L⁻_{k,m}`, `L⁺_{k,m}`, `r_{m,ε} = ⌈(1+ε)m²/3⌉` and the
//! search for the smallest `m` with a nonempty window `L⁻ ≤ ε < L⁺`.

use crate::error::{Error, Result};
use crate::rational::{ceil_q, format_q, frac, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Reported alongside `r_hi` so the endpoint semantics are explicit.
pub const R_HI_CONVENTION: &str =
    "r_hi = max of r_of(m, eps) over eps in [eps_lo, eps_hi): ceil((1+eps_hi)m^2/3), minus 1 when (1+eps_hi)m^2/3 is an integer";

/// Default `μ = 52733/100000`.
pub fn default_mu() -> Q {
    frac(52733, 100000)
}

fn qi(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `⌈(1+ε)m²/3⌉`.
pub fn r_of(m: u64, eps: &Q) -> Result<BigInt> {
    if eps.is_negative() {
        return Err(Error::Precondition(format!("eps must be nonnegative, got {}", format_q(eps))));
    }
    Ok(ceil_q(&((Q::one() + eps) * qi(m) * qi(m) / qi(3))))
}

fn check_km(k: u64, m: u64) -> Result<()> {
    if k == 0 || k + 1 > m {
        return Err(Error::Precondition(format!("need 1 ≤ k ≤ m−1, got k = {k}, m = {m}")));
    }
    Ok(())
}

/// `(L⁻_{k,m}, L⁺_{k,m})` as exact rationals.
pub fn l_bounds(k: u64, m: u64, mu: &Q) -> Result<(Q, Q)> {
    check_km(k, m)?;
    let (kq, mq) = (qi(k), qi(m));
    let m2 = &mq * &mq;
    let c = |n: i64| Q::from_integer(BigInt::from(n));
    let lm1 = c(9) / (&kq + c(1))
        - ((c(6) * &kq - c(2)) * &m2 - (c(9) * &kq * &kq + c(9)) * &mq + (c(3) * &kq * &kq * &kq + c(9) * &kq + c(6)))
            / (&m2 * (c(3) * &mq - c(3) * &kq - c(2)));
    let lm2 = (c(2) * &m2 + c(9) * &mq - c(6)) / (&m2 * (c(3) * &mq - c(2)));
    let t = c(2) * mu - c(1);
    let lp1 = &t + (c(2) * (&t - c(9) * &kq - c(8)) * &m2 - c(9) * &mq + c(6)) / (&m2 * (c(3) * &mq - c(2)));
    let lp2 = &t / c(3) + (c(2) * (&t - c(24)) * &m2 - c(27) * &mq + c(18)) / (c(3) * &m2 * (c(9) * &mq - c(2)));
    Ok((lm1.max(lm2), lp1.min(lp2)))
}

/// `[L⁻, L⁺)` when nonempty.
pub fn feasibility_window(k: u64, m: u64, mu: &Q) -> Result<Option<(Q, Q)>> {
    let (lo, hi) = l_bounds(k, m, mu)?;
    Ok((lo < hi).then_some((lo, hi)))
}

/// `L⁺ − L⁻` in double precision, for the prefilter.
#[inline]
fn float_gap(k: f64, m: f64, t: f64) -> f64 {
    let m2 = m * m;
    let lm1 = 9.0 / (k + 1.0)
        - ((6.0 * k - 2.0) * m2 - (9.0 * k * k + 9.0) * m + (3.0 * k * k * k + 9.0 * k + 6.0))
            / (m2 * (3.0 * m - 3.0 * k - 2.0));
    let lm2 = (2.0 * m2 + 9.0 * m - 6.0) / (m2 * (3.0 * m - 2.0));
    let lp1 = t + (2.0 * (t - 9.0 * k - 8.0) * m2 - 9.0 * m + 6.0) / (m2 * (3.0 * m - 2.0));
    let lp2 = t / 3.0 + (2.0 * (t - 24.0) * m2 - 27.0 * m + 18.0) / (3.0 * m2 * (9.0 * m - 2.0));
    lp1.min(lp2) - lm1.max(lm2)
}

/// Prefilter margin: candidates whose float gap exceeds `−MARGIN` are decided exactly.
pub const MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub k: u64,
    pub m: u64,
    pub mu: Q,
    pub eps_lo: Q,
    pub eps_hi: Q,
    pub r_lo: BigInt,
    pub r_hi: BigInt,
}

impl BoundParams {
    pub fn new(k: u64, m: u64, mu: &Q) -> Result<Option<Self>> {
        let Some((eps_lo, eps_hi)) = feasibility_window(k, m, mu)? else {
            return Ok(None);
        };
        let r_lo = r_of(m, &eps_lo)?;
        let top = (Q::one() + &eps_hi) * qi(m) * qi(m) / qi(3);
        let r_hi = if top.is_integer() { top.to_integer() - 1 } else { ceil_q(&top) };
        Ok(Some(Self { k, m, mu: mu.clone(), eps_lo, eps_hi, r_lo, r_hi }))
    }
}

/// A JSON number when it fits in `u64`, a decimal string otherwise.
fn int_value(n: &BigInt) -> Value {
    n.to_u64().map_or_else(|| json!(n.to_string()), |v| json!(v))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub params: Option<BoundParams>,
    pub m_max: u64,
    /// `(k, m)` pairs examined.
    pub scanned: u64,
    /// Pairs decided in rational arithmetic.
    pub exact_checks: u64,
}

impl SearchReport {
    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "m_max": self.m_max,
            "scanned": self.scanned,
            "exact_checks": self.exact_checks,
            "r_hi_convention": R_HI_CONVENTION,
        });
        if let Some(p) = &self.params {
            let obj = v.as_object_mut().expect("object");
            obj.insert("m".into(), json!(p.m));
            obj.insert("k".into(), json!(p.k));
            obj.insert("mu".into(), json!(format_q(&p.mu)));
            obj.insert("eps_lo".into(), json!(format_q(&p.eps_lo)));
            obj.insert("eps_hi".into(), json!(format_q(&p.eps_hi)));
            obj.insert("r_lo".into(), int_value(&p.r_lo));
            obj.insert("r_hi".into(), int_value(&p.r_hi));
        }
        v
    }
}

/// Smallest feasible `k` at this `m`, with pair counts `(scanned, exact)`.
fn scan_m(m: u64, mu: &Q, t: f64, k_max: u64, use_prefilter: bool) -> Result<(Option<u64>, u64, u64)> {
    let top = k_max.min(m - 1);
    let mut exact = 0;
    for k in 1..=top {
        if use_prefilter && float_gap(k as f64, m as f64, t) <= -MARGIN {
            continue;
        }
        exact += 1;
        if feasibility_window(k, m, mu)?.is_some() {
            return Ok((Some(k), k, exact));
        }
    }
    Ok((None, top, exact))
}

fn search(mu: &Q, m_max: u64, k_max: Option<u64>, use_prefilter: bool) -> Result<SearchReport> {
    if m_max < 2 {
        return Err(Error::Precondition(format!("m_max must be at least 2, got {m_max}")));
    }
    let t = (frac(2, 1) * mu - Q::one()).to_f64().unwrap_or(f64::NAN);
    let k_max = k_max.unwrap_or(u64::MAX);
    const BLOCK: u64 = 4096;
    let mut scanned = 0;
    let mut exact_checks = 0;
    let mut start = 2;
    while start <= m_max {
        let end = (start + BLOCK - 1).min(m_max);
        let results: Vec<(u64, Option<u64>, u64, u64)> = (start..=end)
            .into_par_iter()
            .map(|m| scan_m(m, mu, t, k_max, use_prefilter).map(|(k, s, e)| (m, k, s, e)))
            .collect::<Result<_>>()?;
        // Counts cover every m up to the first hit so they do not depend on scheduling.
        for (m, k, s, e) in results {
            scanned += s;
            exact_checks += e;
            if let Some(k) = k {
                let params = BoundParams::new(k, m, mu)?;
                return Ok(SearchReport { params, m_max, scanned, exact_checks });
            }
        }
        start = end + 1;
    }
    Ok(SearchReport { params: None, m_max, scanned, exact_checks })
}

/// Smallest `m ≤ m_max` with some `k` giving a nonempty window, and the smallest such `k`.
pub fn find_min_m(mu: &Q, m_max: u64, k_max: Option<u64>) -> Result<SearchReport> {
    search(mu, m_max, k_max, true)
}

/// Same scan with every pair decided exactly.
pub fn find_min_m_exact(mu: &Q, m_max: u64, k_max: Option<u64>) -> Result<SearchReport> {
    search(mu, m_max, k_max, false)
}

/// `⌈a/b⌉` for positive `b`.
fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// `r ≥ 3m²/(k+1) + ⌈(m−k)³/(3(m−k)−2)⌉`.
pub fn tail_bound_holds(k: u64, m: u64, r: &BigInt) -> bool {
    let d = BigInt::from(m - k);
    let tail = ceil_div(&(&d * &d * &d), &(BigInt::from(3) * &d - 2));
    Q::from_integer(r.clone()) >= qi(3 * m * m) / qi(k + 1) + Q::from_integer(tail)
}

/// `r ≥ ⌈m³/(3m−2)⌉`.
pub fn generic_bound_holds(m: u64, r: &BigInt) -> bool {
    let mb = BigInt::from(m);
    *r >= ceil_div(&(&mb * &mb * &mb), &(BigInt::from(3) * &mb - 2))
}

/// `(3m−2)r/2 < m²(mμ − max{3k, mε} − 3)`.
pub fn dimension_gap_holds(k: u64, m: u64, mu: &Q, eps: &Q, r: &BigInt) -> bool {
    let mq = qi(m);
    let lhs = qi(3 * m - 2) * Q::from_integer(r.clone()) / qi(2);
    let cap = qi(3 * k).max(&mq * eps);
    lhs < &mq * &mq * (&mq * mu - cap - qi(3))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub predicate: &'static str,
    pub k: u64,
    pub m: u64,
    pub eps: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixReport {
    pub samples: usize,
    pub tail_bound_checked: usize,
    pub generic_bound_checked: usize,
    pub dimension_gap_checked: usize,
    pub violations: Vec<Violation>,
}

impl AppendixReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "samples": self.samples,
            "tail_bound_checked": self.tail_bound_checked,
            "generic_bound_checked": self.generic_bound_checked,
            "dimension_gap_checked": self.dimension_gap_checked,
            "violations": self.violations.iter().map(|v| json!({
                "predicate": v.predicate,
                "k": v.k,
                "m": v.m,
                "eps": format_q(&v.eps),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Checks the three lower/upper predicates at one `(k, m)`.
pub fn check_pair(k: u64, m: u64, mu: &Q) -> Result<(Vec<Violation>, bool)> {
    let (lo, hi) = l_bounds(k, m, mu)?;
    let mut out = Vec::new();
    let r = r_of(m, &lo)?;
    if !tail_bound_holds(k, m, &r) {
        out.push(Violation { predicate: "tail_bound", k, m, eps: lo.clone() });
    }
    if !generic_bound_holds(m, &r) {
        out.push(Violation { predicate: "generic_bound", k, m, eps: lo.clone() });
    }
    let feasible = lo < hi;
    if feasible {
        let mid = (&lo + &hi) / qi(2);
        if !dimension_gap_holds(k, m, mu, &mid, &r_of(m, &mid)?) {
            out.push(Violation { predicate: "dimension_gap", k, m, eps: mid });
        }
    }
    Ok((out, feasible))
}

/// Samples `(k, m)` uniformly with `2 ≤ m ≤ m_max`, `1 ≤ k ≤ m−1`; `extra` pairs are always included.
pub fn verify_appendix(m_max: u64, samples: usize, seed: u64, mu: &Q, extra: &[(u64, u64)]) -> Result<AppendixReport> {
    if m_max < 2 {
        return Err(Error::Precondition(format!("m_max must be at least 2, got {m_max}")));
    }
    for &(k, m) in extra {
        check_km(k, m)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u64, u64)> = (0..samples)
        .map(|_| {
            let m = rng.gen_range(2..=m_max);
            (rng.gen_range(1..m), m)
        })
        .collect();
    pairs.extend_from_slice(extra);
    let results: Vec<(Vec<Violation>, bool)> = pairs.par_iter().map(|&(k, m)| check_pair(k, m, mu)).collect::<Result<_>>()?;
    let dimension_gap_checked = results.iter().filter(|(_, f)| *f).count();
    Ok(AppendixReport {
        samples: pairs.len(),
        tail_bound_checked: pairs.len(),
        generic_bound_checked: pairs.len(),
        dimension_gap_checked,
        violations: results.into_iter().flat_map(|(v, _)| v).collect(),
    })
}
