// SPDX-License-Identifier: Apache-2.0

//! `μ = min over [0,1]³ of max{μ₁, μ₂}` by symmetric grid search with local refinement.

use crate::error::{Error, Result};
use crate::rational::{frac, q, Q};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub objective: f64,
}

impl MuPoint {
    pub fn at(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let (mu1, mu2, objective) = mu_values(alpha, beta, gamma)?;
        Ok(Self { alpha, beta, gamma, mu1, mu2, objective })
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Orders by objective, then coordinates; the smallest key wins ties.
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.objective
            .total_cmp(&other.objective)
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.beta.total_cmp(&other.beta))
            .then(self.gamma.total_cmp(&other.gamma))
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "argmin": [self.alpha, self.beta, self.gamma],
            "mu1": self.mu1,
            "mu2": self.mu2,
            "objective": self.objective,
        })
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("coordinate {x} outside [0, 1]")))
    }
}

#[inline]
fn raw_values(a: f64, b: f64, g: f64) -> (f64, f64) {
    let (na, nb, ng) = (1.0 - a, 1.0 - b, 1.0 - g);
    let all = na * nb * ng;
    let mu1 = (a + b + g) / 3.0 + all;
    let pair = |x: f64, y: f64, rest: f64| (x * y * rest - 2.0 / 3.0 * x.min(y)).max(0.0);
    let mu2 = all + a * nb * ng + b * na * ng + g * na * nb + pair(a, b, ng) + pair(a, g, nb) + pair(b, g, na);
    (mu1, mu2)
}

/// `(μ₁, μ₂, max{μ₁, μ₂})` in double precision.
pub fn mu_values(alpha: f64, beta: f64, gamma: f64) -> Result<(f64, f64, f64)> {
    for x in [alpha, beta, gamma] {
        check_unit(x)?;
    }
    let (mu1, mu2) = raw_values(alpha, beta, gamma);
    Ok((mu1, mu2, mu1.max(mu2)))
}

/// Rational evaluation of the same formulas.
pub fn mu_values_exact(alpha: &Q, beta: &Q, gamma: &Q) -> Result<(Q, Q, Q)> {
    let one = q(1);
    for x in [alpha, beta, gamma] {
        if *x < Q::zero() || *x > one {
            return Err(Error::Precondition(format!("coordinate {x} outside [0, 1]")));
        }
    }
    let (na, nb, ng) = (&one - alpha, &one - beta, &one - gamma);
    let all = &na * &nb * &ng;
    let mu1 = (alpha + beta + gamma) / q(3) + &all;
    let two_thirds = frac(2, 3);
    let pair = |x: &Q, y: &Q, rest: &Q| {
        let v = x * y * rest - &two_thirds * x.min(y);
        if v > Q::zero() {
            v
        } else {
            Q::zero()
        }
    };
    let mu2 = &all
        + alpha * &nb * &ng
        + beta * &na * &ng
        + gamma * &na * &nb
        + pair(alpha, beta, &ng)
        + pair(alpha, gamma, &nb)
        + pair(beta, gamma, &na);
    let obj = if mu1 > mu2 { mu1.clone() } else { mu2.clone() };
    Ok((mu1, mu2, obj))
}

/// Number of subintervals per axis, requiring `1/step` to be an integer up to rounding.
fn subdivisions(step: f64) -> Result<u64> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Precondition(format!("step must lie in (0, 0.5], got {step}")));
    }
    let n = (1.0 / step).round();
    if ((n * step) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("1/step must be an integer, got step {step}")));
    }
    Ok(n as u64)
}

/// Minimum over `i ≤ j ≤ k` of the objective at `(i, j, k)/n`.
fn grid_min(n: u64) -> (MuPoint, u64) {
    let nf = n as f64;
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let a = i as f64 / nf;
            let mut best: Option<MuPoint> = None;
            for j in i..=n {
                let b = j as f64 / nf;
                for k in j..=n {
                    let g = k as f64 / nf;
                    let (mu1, mu2) = raw_values(a, b, g);
                    let p = MuPoint { alpha: a, beta: b, gamma: g, mu1, mu2, objective: mu1.max(mu2) };
                    if best.as_ref().is_none_or(|cur| p.key_cmp(cur) == Ordering::Less) {
                        best = Some(p);
                    }
                }
            }
            best.expect("nonempty row")
        })
        .min_by(|x, y| x.key_cmp(y))
        .expect("nonempty grid");
    let points = (n + 1) * (n + 2) * (n + 3) / 6;
    (best, points)
}

/// One refinement round: a `21³` grid of spacing `h` centered on `center`, clipped to the cube.
fn refine_once(center: &MuPoint, h: f64) -> MuPoint {
    let axis = |c: f64| -> Vec<f64> {
        (-10i32..=10)
            .map(|t| c + f64::from(t) * h)
            .filter(|x| (0.0..=1.0).contains(x))
            .collect()
    };
    let (xs, ys, zs) = (axis(center.alpha), axis(center.beta), axis(center.gamma));
    let local = xs
        .par_iter()
        .flat_map_iter(|&a| {
            let zs = &zs;
            ys.iter().flat_map(move |&b| {
                zs.iter().map(move |&g| {
                    let (mu1, mu2) = raw_values(a, b, g);
                    MuPoint { alpha: a, beta: b, gamma: g, mu1, mu2, objective: mu1.max(mu2) }
                })
            })
        })
        .min_by(|x, y| x.key_cmp(y))
        .expect("center lies in the cube");
    if local.key_cmp(center) == Ordering::Less {
        local
    } else {
        *center
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuReport {
    pub step: f64,
    pub grid_points: u64,
    /// Incumbent of the raw grid.
    pub grid: MuPoint,
    /// Incumbent after each refinement level, starting from the raw grid.
    pub levels: Vec<MuPoint>,
}

impl MuReport {
    pub fn best(&self) -> &MuPoint {
        self.levels.last().unwrap_or(&self.grid)
    }

    pub fn mu(&self) -> f64 {
        self.best().objective
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "mu": self.grid.objective,
            "argmin": self.grid.coords(),
            "refined_mu": self.mu(),
            "refined_argmin": self.best().coords(),
            "refine_levels": self.levels.len().saturating_sub(1),
            "grid_points": self.grid_points,
            "step": self.step,
        })
    }
}

pub fn minimize_mu(step: f64, refine_levels: u32) -> Result<MuReport> {
    let n = subdivisions(step)?;
    let (grid, grid_points) = grid_min(n);
    let mut levels = vec![grid];
    let mut h = 1.0 / n as f64;
    for _ in 0..refine_levels {
        h /= 10.0;
        let next = refine_once(levels.last().expect("nonempty"), h);
        levels.push(next);
    }
    Ok(MuReport { step, grid_points, grid, levels })
}

/// Largest gap between the float objective and the rational objective at grid points `(i, j, k)/n`.
pub fn exact_discrepancy(n: u64, points: &[[u64; 3]]) -> Result<f64> {
    let nf = n as f64;
    let mut worst = 0.0f64;
    for p in points {
        if p.iter().any(|&c| c > n) {
            return Err(Error::IndexOutOfRange(format!("grid point {p:?} beyond {n}")));
        }
        let (_, _, fo) = mu_values(p[0] as f64 / nf, p[1] as f64 / nf, p[2] as f64 / nf)?;
        let den = n as i64;
        let e = |c: u64| frac(c as i64, den);
        let (_, _, eo) = mu_values_exact(&e(p[0]), &e(p[1]), &e(p[2]))?;
        worst = worst.max((fo - eo.to_f64().unwrap_or(f64::NAN)).abs());
    }
    Ok(worst)
}

/// `exact_discrepancy` over `count` grid points drawn with `seed`.
pub fn sampled_exact_discrepancy(n: u64, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[u64; 3]> = (0..count).map(|_| [0; 3].map(|_: u64| rng.gen_range(0..=n))).collect();
    exact_discrepancy(n, &pts)
}

/// Grid subdivisions for `step`, exposed for callers that sample the same grid.
pub fn grid_subdivisions(step: f64) -> Result<u64> {
    subdivisions(step)
}

/// Every objective value on the grid of spacing `step` exceeds `1/2`.
pub fn check_positive_gap(step: f64) -> Result<bool> {
    let n = subdivisions(step)?;
    Ok(grid_min(n).0.objective > 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_values() {
        assert_eq!(mu_values(0.0, 0.0, 0.0).unwrap(), (1.0, 1.0, 1.0));
        assert_eq!(mu_values(1.0, 1.0, 1.0).unwrap(), (1.0, 0.0, 1.0));
        let (_, mu2, _) = mu_values_exact(&q(0), &frac(1, 2), &q(1)).unwrap();
        assert_eq!(mu2, frac(2, 3));
        assert!(mu_values(1.5, 0.0, 0.0).is_err());
        assert!(mu_values_exact(&frac(-1, 2), &q(0), &q(0)).is_err());
    }

    #[test]
    fn coarse_grid() {
        let rep = minimize_mu(0.5, 0).unwrap();
        assert_eq!(rep.mu(), 0.625);
        assert_eq!(rep.grid.coords(), [0.5, 0.5, 0.5]);
        assert_eq!(rep.grid_points, 10);
    }

    #[test]
    fn refinement_is_monotone() {
        let rep = minimize_mu(0.1, 3).unwrap();
        assert_eq!(rep.levels.len(), 4);
        for w in rep.levels.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
    }

    #[test]
    fn step_preconditions() {
        assert!(minimize_mu(0.0, 0).is_err());
        assert!(minimize_mu(0.3, 0).is_err());
        assert!(check_positive_gap(1.0).is_err());
        assert!(check_positive_gap(0.5).unwrap());
        assert!(check_positive_gap(0.01).unwrap());
    }

    #[test]
    fn float_matches_rational() {
        let pts: Vec<[u64; 3]> = (0..=20).flat_map(|i| [[i, 20 - i, i / 2], [i, i, i]]).collect();
        assert!(exact_discrepancy(20, &pts).unwrap() < 1e-12);
    }
}
