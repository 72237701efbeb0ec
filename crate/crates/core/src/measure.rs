//! Discrete probability measures and the energies defined on them.
//!
//! A [`DiscreteMeasure`] is a list of `N` atoms `x_i` in `R^n` with weights
//! `w_i >= 0` summing to one. Interaction energies use the off-diagonal
//! particle convention
//!
//! ```text
//! E(mu) = sum_{i != j} w_i w_j K(|x_i - x_j|)
//! ```
//!
//! since the self-interaction of an atom is infinite for singular kernels.
//! Pair sums are accumulated row by row (`i` ascending, `j > i` ascending)
//! and the row totals are reduced in index order, so results do not depend
//! on whether rows were evaluated in parallel.

use crate::error::{Error, Result};
use crate::kernel::{riesz_terms, KernelParams};
use crate::math;
use alloc::format;
use alloc::vec::Vec;

/// Slack on the diameter constraint of the limit functional.
pub const DEFAULT_DIAM_TOL: f64 = 1e-9;

/// Tolerance on `sum w_i = 1`.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from row-major `points` (`N * dim` values).
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dimension("dimension must be at least 1"));
        }
        if weights.is_empty() {
            return Err(Error::dimension("a measure needs at least one atom"));
        }
        if points.len() != dim * weights.len() {
            return Err(Error::dimension(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate {x}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::domain(format!("invalid weight {w}")));
        }
        let mass = weights.iter().fold(0.0, |acc, w| acc + w);
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("total mass {mass} is not 1")));
        }
        Ok(DiscreteMeasure {
            dim,
            points,
            weights,
        })
    }

    /// Equal weights `1/N` on the given atoms.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return Err(Error::dimension("points do not form whole atoms"));
        }
        let n = points.len() / dim;
        Self::new(dim, points, alloc::vec![1.0 / n as f64; n])
    }

    pub fn from_rows(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dimension("ragged point rows"));
        }
        Self::new(dim, rows.concat(), weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_parts(self) -> (usize, Vec<f64>, Vec<f64>) {
        (self.dim, self.points, self.weights)
    }

    /// Atoms carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.weights[i] > 0.0)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = alloc::vec![0.0; self.dim];
        for i in 0..self.len() {
            for (ck, xk) in c.iter_mut().zip(self.point(i)) {
                *ck += self.weights[i] * xk;
            }
        }
        c
    }

    /// Applies `f` to every atom, keeping the weights.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut points = alloc::vec![0.0; self.points.len()];
        for (src, dst) in self
            .points
            .chunks_exact(self.dim)
            .zip(points.chunks_exact_mut(self.dim))
        {
            f(src, dst);
        }
        Self::new(self.dim, points, self.weights.clone())
    }

    /// Replaces the weights, keeping the atoms.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.points.clone(), weights)
    }

    /// `sum_{i != j} w_i w_j K(|x_i - x_j|)`.
    pub fn energy(&self, kernel: &KernelParams) -> Result<f64> {
        if kernel.dim != self.dim {
            return Err(Error::dimension(format!(
                "kernel dimension {} for a measure in dimension {}",
                kernel.dim, self.dim
            )));
        }
        let half = self.weighted_pair_sum(kernel.min_radius, |r2| kernel.pair_terms(r2).0)?;
        Ok(2.0 * half)
    }

    /// Riesz energy `I_l(mu) = sum_{i != j} w_i w_j |x_i - x_j|^-l`.
    pub fn riesz_energy(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let half = self.weighted_pair_sum(crate::kernel::DEFAULT_MIN_RADIUS, |r2| {
            riesz_terms(lambda, r2)
        })?;
        Ok(2.0 * half)
    }

    /// The strong-attraction limit functional: the Riesz energy when the
    /// support has diameter at most `1 + DEFAULT_DIAM_TOL`, `f64::INFINITY`
    /// otherwise.
    pub fn limit_energy(&self, lambda: f64) -> Result<f64> {
        self.limit_energy_with_tol(lambda, DEFAULT_DIAM_TOL)
    }

    pub fn limit_energy_with_tol(&self, lambda: f64, diam_tol: f64) -> Result<f64> {
        check_lambda(lambda)?;
        if self.diameter() > 1.0 + diam_tol {
            return Ok(f64::INFINITY);
        }
        self.riesz_energy(lambda)
    }

    /// Largest distance between two atoms of positive weight.
    pub fn diameter(&self) -> f64 {
        let support: Vec<usize> = self.support().collect();
        let mut best = 0.0f64;
        for (a, &i) in support.iter().enumerate() {
            let xi = self.point(i);
            for &j in &support[a + 1..] {
                best = best.max(math::dist2(xi, self.point(j)));
            }
        }
        math::sqrt(best)
    }

    /// The measure `A -> mu(beta A)`: atoms move to `x_i / beta`.
    pub fn dilate(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!(
                "dilation factor must be positive, got {beta}"
            )));
        }
        let inv = 1.0 / beta;
        self.map_points(|src, dst| {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s * inv;
            }
        })
    }

    /// Riesz potential `sum_i w_i |x - x_i|^-l`; `f64::INFINITY` when `x`
    /// sits on an atom of positive weight.
    pub fn potential_at(&self, lambda: f64, x: &[f64]) -> Result<f64> {
        check_lambda(lambda)?;
        self.check_probe(x)?;
        let mut phi = 0.0;
        for i in self.support() {
            let r2 = math::dist2(x, self.point(i));
            if r2 == 0.0 {
                return Ok(f64::INFINITY);
            }
            phi += self.weights[i] * riesz_terms(lambda, r2);
        }
        Ok(phi)
    }

    /// Compares a centered second-difference Laplacian of the potential
    /// with the closed form `l (l + 2 - n) sum_i w_i |x - x_i|^(-l-2)`.
    ///
    /// Returns `(finite_difference, analytic)`.
    pub fn laplacian_probe(&self, lambda: f64, x: &[f64], h: f64) -> Result<(f64, f64)> {
        check_lambda(lambda)?;
        self.check_probe(x)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("step must be positive, got {h}")));
        }
        let gap = math::sqrt(self.min_dist2_to_support(x));
        if gap < 10.0 * h {
            return Err(Error::domain(format!(
                "probe at distance {gap:e} from the support is closer than 10 h = {:e}",
                10.0 * h
            )));
        }
        let center = self.potential_at(lambda, x)?;
        let mut probe = x.to_vec();
        let mut fd = 0.0;
        for k in 0..self.dim {
            probe[k] = x[k] + h;
            let plus = self.potential_at(lambda, &probe)?;
            probe[k] = x[k] - h;
            let minus = self.potential_at(lambda, &probe)?;
            probe[k] = x[k];
            fd += (plus - 2.0 * center + minus) / (h * h);
        }
        let n = self.dim as f64;
        let mut moment = 0.0;
        for i in self.support() {
            moment += self.weights[i] * riesz_terms(lambda + 2.0, math::dist2(x, self.point(i)));
        }
        Ok((fd, lambda * (lambda + 2.0 - n) * moment))
    }

    /// Squared distance from `x` to the nearest atom of positive weight.
    pub fn min_dist2_to_support(&self, x: &[f64]) -> f64 {
        self.support()
            .map(|i| math::dist2(x, self.point(i)))
            .fold(f64::INFINITY, f64::min)
    }

    fn check_probe(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::dimension(format!(
                "probe of length {} in dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `sum_{i < j} w_i w_j f(|x_i - x_j|^2)` over pairs with positive
    /// weights; coincident pairs are a domain error.
    fn weighted_pair_sum<F>(&self, min_radius: f64, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let min_r2 = min_radius * min_radius;
        let n = self.len();
        let row = |i: usize| -> Result<f64> {
            let wi = self.weights[i];
            if wi == 0.0 {
                return Ok(0.0);
            }
            let xi = self.point(i);
            let mut acc = 0.0;
            for j in i + 1..n {
                let wj = self.weights[j];
                if wj == 0.0 {
                    continue;
                }
                let r2 = math::dist2(xi, self.point(j));
                if !(r2 >= min_r2) {
                    return Err(Error::domain(format!(
                        "atoms {i} and {j} coincide (distance {:e})",
                        math::sqrt(r2)
                    )));
                }
                acc += wj * f(r2);
            }
            Ok(wi * acc)
        };
        crate::reduce::ordered_row_sum(n, row)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Dilation factor `exp(1 / sqrt(alpha))` of the recovery sequence.
pub fn recovery_beta(alpha: f64) -> f64 {
    math::exp(1.0 / math::sqrt(alpha))
}

/// Right-hand side of the recovery inequality,
/// `exp(-sqrt(alpha)) + exp(l / sqrt(alpha)) * limit_energy`.
pub fn recovery_bound(alpha: f64, lambda: f64, limit_energy: f64) -> f64 {
    let s = math::sqrt(alpha);
    math::exp(-s) + math::exp(lambda / s) * limit_energy
}
