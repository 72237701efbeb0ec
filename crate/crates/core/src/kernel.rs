//! Interaction kernels `K(x - y)` and their gradients.
//!
//! Three variants are supported:
//!
//! | variant        | `K(r)`                  |
//! |----------------|-------------------------|
//! | `Power`        | `r^a + r^-l`            |
//! | `Normalized`   | `r^a / a + r^-l / l`    |
//! | `LogRepulsion` | `r^a - ln r`            |
//!
//! with attraction exponent `a > 0` and repulsion exponent `0 < l < n`.
//! The normalized kernel has its minimum at `r = 1`. The logarithmic kernel
//! plays the role of the Newtonian repulsion in the plane.
//!
//! There is no mollification of the singularity at the origin: distances
//! below [`KernelParams::min_radius`] are a [`Error::Domain`].

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

/// Distances below this are treated as coincident points.
pub const DEFAULT_MIN_RADIUS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelVariant {
    Power,
    Normalized,
    LogRepulsion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    pub alpha: f64,
    /// Repulsion exponent; ignored by [`KernelVariant::LogRepulsion`].
    pub lambda: f64,
    pub dim: usize,
    pub variant: KernelVariant,
    pub min_radius: f64,
}

impl KernelParams {
    pub fn new(variant: KernelVariant, alpha: f64, lambda: f64, dim: usize) -> Result<Self> {
        let params = KernelParams {
            alpha,
            lambda,
            dim,
            variant,
            min_radius: DEFAULT_MIN_RADIUS,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn power(alpha: f64, lambda: f64, dim: usize) -> Result<Self> {
        Self::new(KernelVariant::Power, alpha, lambda, dim)
    }

    pub fn normalized(alpha: f64, lambda: f64, dim: usize) -> Result<Self> {
        Self::new(KernelVariant::Normalized, alpha, lambda, dim)
    }

    pub fn log_repulsion(alpha: f64, dim: usize) -> Result<Self> {
        Self::new(KernelVariant::LogRepulsion, alpha, 0.0, dim)
    }

    pub fn with_min_radius(mut self, min_radius: f64) -> Result<Self> {
        if !(min_radius > 0.0 && min_radius.is_finite()) {
            return Err(Error::domain(format!(
                "min_radius must be positive, got {min_radius}"
            )));
        }
        self.min_radius = min_radius;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.min_radius > 0.0) {
            return Err(Error::domain("min_radius must be positive"));
        }
        match self.variant {
            KernelVariant::Power | KernelVariant::Normalized => {
                if !(self.lambda > 0.0 && self.lambda < self.dim as f64) {
                    return Err(Error::domain(format!(
                        "lambda must lie in (0, {}), got {}",
                        self.dim, self.lambda
                    )));
                }
            }
            KernelVariant::LogRepulsion => {
                if self.dim != 2 {
                    log::warn!(
                        "logarithmic repulsion is the Newtonian kernel only in the plane (dim = {})",
                        self.dim
                    );
                }
            }
        }
        Ok(())
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= self.min_radius) {
            return Err(Error::domain(format!(
                "kernel evaluated at distance {r:e} (minimum {:e})",
                self.min_radius
            )));
        }
        Ok(())
    }

    /// `K(r)` for a distance `r > 0`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.pair_terms(r * r).0)
    }

    /// Radial derivative `K'(r)`.
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.pair_terms(r * r).1 * r)
    }

    /// Gradient of `K` at displacement `v`, written into `out`.
    pub fn grad_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != out.len() {
            return Err(Error::dimension(format!("{} vs {}", v.len(), out.len())));
        }
        let r2 = math::norm2(v);
        self.check_radius(math::sqrt(r2))?;
        let coef = self.pair_terms(r2).1;
        for (o, x) in out.iter_mut().zip(v) {
            *o = coef * x;
        }
        Ok(())
    }

    pub fn grad(&self, v: &[f64]) -> Result<alloc::vec::Vec<f64>> {
        let mut out = alloc::vec![0.0; v.len()];
        self.grad_into(v, &mut out)?;
        Ok(out)
    }

    /// Value and gradient coefficient from a squared distance: returns
    /// `(K(r), c)` with `grad K(v) = c * v`. Callers check the minimum radius.
    #[inline]
    pub(crate) fn pair_terms(&self, r2: f64) -> (f64, f64) {
        let attract = pow_from_r2(r2, self.alpha);
        match self.variant {
            KernelVariant::Power => {
                let repel = 1.0 / pow_from_r2(r2, self.lambda);
                (
                    attract + repel,
                    (self.alpha * attract - self.lambda * repel) / r2,
                )
            }
            KernelVariant::Normalized => {
                let repel = 1.0 / pow_from_r2(r2, self.lambda);
                (
                    attract / self.alpha + repel / self.lambda,
                    (attract - repel) / r2,
                )
            }
            KernelVariant::LogRepulsion => (
                attract - 0.5 * math::ln(r2),
                (self.alpha * attract - 1.0) / r2,
            ),
        }
    }

    /// Distance at which the pair force vanishes (the kernel's minimum).
    pub fn zero_force_radius(&self) -> f64 {
        match self.variant {
            KernelVariant::Power => {
                math::powf(self.lambda / self.alpha, 1.0 / (self.alpha + self.lambda))
            }
            KernelVariant::Normalized => 1.0,
            KernelVariant::LogRepulsion => math::powf(1.0 / self.alpha, 1.0 / self.alpha),
        }
    }
}

/// The Riesz kernel `r^-l` evaluated from `r^2`.
#[inline]
pub(crate) fn riesz_terms(lambda: f64, r2: f64) -> f64 {
    1.0 / pow_from_r2(r2, lambda)
}

/// `r^e` for `e > 0` given `r^2`. Even integer exponents and `e` in
/// `{1/2, 1, 3/2}` avoid the logarithm; the pair loops are dominated by
/// this call.
#[inline]
pub(crate) fn pow_from_r2(r2: f64, e: f64) -> f64 {
    let half = 0.5 * e;
    if half == math::floor(half) && half <= 1024.0 {
        return powi(r2, half as u32);
    }
    if e == 1.0 {
        math::sqrt(r2)
    } else if e == 0.5 {
        math::sqrt(math::sqrt(r2))
    } else if e == 1.5 {
        r2 / math::sqrt(math::sqrt(r2))
    } else {
        math::exp(half * math::ln(r2))
    }
}

#[inline]
fn powi(mut base: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_values() {
        let k = KernelParams::power(5.0, 1.0, 3).unwrap();
        assert_eq!(k.eval(1.0).unwrap(), 2.0);
        let k = KernelParams::power(2.0, 1.0, 3).unwrap();
        assert!(close(k.eval(2.0).unwrap(), 4.5, 1e-14));
    }

    #[test]
    fn normalized_minimum_at_one() {
        let k = KernelParams::normalized(3.0, 2.0, 3).unwrap();
        let at_one = k.eval(1.0).unwrap();
        assert!(close(at_one, 1.0 / 3.0 + 0.5, 1e-15));
        for i in 1..400 {
            let r = i as f64 * 0.01;
            assert!(k.eval(r).unwrap() >= at_one - 1e-15, "r = {r}");
        }
        assert_eq!(k.zero_force_radius(), 1.0);
        assert!(k.radial_derivative(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn log_value_at_one() {
        let k = KernelParams::log_repulsion(2.0, 2).unwrap();
        assert_eq!(k.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn radial_gradient() {
        let (a, l, d) = (3.0, 1.5, 0.7);
        let k = KernelParams::power(a, l, 2).unwrap();
        let g = k.grad(&[d, 0.0]).unwrap();
        let expect = a * libm::pow(d, a - 1.0) - l * libm::pow(d, -l - 1.0);
        assert!(close(g[0], expect, 1e-13));
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn power_zero_force_radius() {
        // a r^(a-1) = l r^(-l-1)  =>  r = (l/a)^(1/(a+l))
        for &(a, l) in &[(2.0, 1.0), (20.0, 0.5), (200.0, 1.0), (3.0, 2.5)] {
            let k = KernelParams::power(a, l, 3).unwrap();
            let r = k.zero_force_radius();
            let lhs = a * libm::pow(r, a - 1.0);
            let rhs = l * libm::pow(r, -l - 1.0);
            assert!(close(lhs, rhs, 1e-12), "a={a} l={l}");
            assert!(k.radial_derivative(r).unwrap().abs() < 1e-12 * rhs);
        }
        let k = KernelParams::power(2.0, 1.0, 3).unwrap();
        assert!(close(k.zero_force_radius(), 0.5f64.powf(1.0 / 3.0), 1e-15));
    }

    #[test]
    fn log_zero_force_radius() {
        let k = KernelParams::log_repulsion(4.0, 2).unwrap();
        assert!(k.radial_derivative(k.zero_force_radius()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn singular_distance_is_domain_error() {
        let k = KernelParams::power(2.0, 1.0, 2).unwrap();
        assert!(matches!(k.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(k.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(k.eval(1e-13), Err(Error::Domain(_))));
        assert!(matches!(k.grad(&[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(k.eval(f64::NAN).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelParams::power(0.0, 1.0, 2).is_err());
        assert!(KernelParams::power(2.0, 0.0, 2).is_err());
        assert!(KernelParams::power(2.0, 2.0, 2).is_err());
        assert!(KernelParams::normalized(2.0, 3.5, 3).is_err());
        assert!(KernelParams::power(2.0, 1.0, 0).is_err());
        // permitted with a warning
        assert!(KernelParams::log_repulsion(2.0, 3).is_ok());
    }

    #[test]
    fn fast_powers_match_exp_ln() {
        for &e in &[0.5, 1.0, 1.5, 2.0, 4.0, 20.0, 200.0, 0.3, 2.7] {
            for &r in &[1e-3, 0.3, 0.99, 1.0, 1.7, 5.0] {
                let fast = pow_from_r2(r * r, e);
                let slow = libm::exp(e * libm::log(r));
                assert!((fast - slow).abs() <= 1e-12 * slow, "e={e} r={r}");
            }
        }
    }

    #[test]
    fn blows_up_at_both_ends() {
        for k in [
            KernelParams::power(2.0, 1.0, 2).unwrap(),
            KernelParams::normalized(2.0, 1.0, 2).unwrap(),
            KernelParams::log_repulsion(2.0, 2).unwrap(),
        ] {
            assert!(k.eval(1e-8).unwrap() > 18.0);
            assert!(k.eval(1e-8).unwrap() > k.eval(1e-4).unwrap());
            assert!(k.eval(1e4).unwrap() > 1e7);
        }
    }
}
