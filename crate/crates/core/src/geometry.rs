//! Shape statistics of particle configurations: planar convex hulls,
//! least-squares sphere fits, radial histograms and covariance spectra.

use crate::error::{Error, Result};
use crate::math;
use alloc::vec::Vec;

/// Convex hull of planar points (Andrew's monotone chain), counterclockwise,
/// without collinear points.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Distance from `p` to the boundary polygon `hull`.
pub fn distance_to_polygon_boundary(p: [f64; 2], hull: &[[f64; 2]]) -> f64 {
    let n = hull.len();
    if n == 0 {
        return f64::INFINITY;
    }
    if n == 1 {
        return math::sqrt(math::dist2(&p, &hull[0]));
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len2 = ex * ex + ey * ey;
        let s = if len2 > 0.0 {
            (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = [a[0] + s * ex, a[1] + s * ey];
        best = best.min(math::dist2(&p, &q));
    }
    math::sqrt(best)
}

/// Fraction of planar points within `delta` of their convex hull boundary.
pub fn hull_boundary_fraction(points: &[f64], delta: f64) -> f64 {
    let pts: Vec<[f64; 2]> = points.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
    if pts.is_empty() {
        return 0.0;
    }
    let hull = convex_hull_2d(&pts);
    let near = pts
        .iter()
        .filter(|&&p| distance_to_polygon_boundary(p, &hull) <= delta)
        .count();
    near as f64 / pts.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SphereFit {
    pub fn distance(&self, p: &[f64]) -> f64 {
        (math::sqrt(math::dist2(p, &self.center)) - self.radius).abs()
    }

    /// Fraction of points within `delta` of the fitted sphere.
    pub fn shell_fraction(&self, points: &[f64], delta: f64) -> f64 {
        let dim = self.center.len();
        let total = points.len() / dim;
        if total == 0 {
            return 0.0;
        }
        let near = points
            .chunks_exact(dim)
            .filter(|p| self.distance(p) <= delta)
            .count();
        near as f64 / total as f64
    }
}

/// Algebraic least-squares sphere: minimizes
/// `sum_i (|x_i|^2 - 2 c . x_i - d)^2` over `(c, d)`, `r^2 = d + |c|^2`.
pub fn fit_sphere(points: &[f64], dim: usize) -> Result<SphereFit> {
    let n = points.len() / dim;
    if n < dim + 1 {
        return Err(Error::dimension("too few points for a sphere fit"));
    }
    // center the data first for conditioning
    let mut mean = alloc::vec![0.0; dim];
    for p in points.chunks_exact(dim) {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / n as f64;
        }
    }
    let m = dim + 1;
    let mut ata = alloc::vec![0.0; m * m];
    let mut atb = alloc::vec![0.0; m];
    let mut row = alloc::vec![0.0; m];
    for p in points.chunks_exact(dim) {
        let mut r2 = 0.0;
        for k in 0..dim {
            let y = p[k] - mean[k];
            row[k] = 2.0 * y;
            r2 += y * y;
        }
        row[dim] = 1.0;
        for a in 0..m {
            atb[a] += row[a] * r2;
            for b in 0..m {
                ata[a * m + b] += row[a] * row[b];
            }
        }
    }
    let sol = solve_linear(&mut ata, &mut atb, m)?;
    let mut center = alloc::vec![0.0; dim];
    let mut c2 = 0.0;
    for k in 0..dim {
        center[k] = sol[k] + mean[k];
        c2 += sol[k] * sol[k];
    }
    let r2 = sol[dim] + c2;
    if !(r2 > 0.0) {
        return Err(Error::domain("degenerate sphere fit"));
    }
    Ok(SphereFit {
        center,
        radius: math::sqrt(r2),
    })
}

/// Gaussian elimination with partial pivoting on a dense `m x m` system.
fn solve_linear(a: &mut [f64], b: &mut [f64], m: usize) -> Result<Vec<f64>> {
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
            .unwrap_or(col);
        if a[pivot * m + col].abs() < 1e-300 {
            return Err(Error::domain("singular linear system"));
        }
        if pivot != col {
            for k in 0..m {
                a.swap(col * m + k, pivot * m + k);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..m {
            let factor = a[r * m + col] / a[col * m + col];
            for k in col..m {
                a[r * m + k] -= factor * a[col * m + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; m];
    for r in (0..m).rev() {
        let mut s = b[r];
        for k in r + 1..m {
            s -= a[r * m + k] * x[k];
        }
        x[r] = s / a[r * m + r];
    }
    Ok(x)
}

/// Histogram of distances from `center`, bins `[k w, (k+1) w)`.
pub fn radial_histogram(points: &[f64], dim: usize, center: &[f64], bin_width: f64) -> Vec<usize> {
    let mut bins: Vec<usize> = Vec::new();
    for p in points.chunks_exact(dim) {
        let r = math::sqrt(math::dist2(p, center));
        let k = math::floor(r / bin_width) as usize;
        if bins.len() <= k {
            bins.resize(k + 1, 0);
        }
        bins[k] += 1;
    }
    bins
}

/// Smallest distance from `center` to any point.
pub fn min_radius_from(points: &[f64], dim: usize, center: &[f64]) -> f64 {
    let best = points
        .chunks_exact(dim)
        .map(|p| math::dist2(p, center))
        .fold(f64::INFINITY, f64::min);
    math::sqrt(best)
}

/// Unweighted mean of row-major points.
pub fn mean(points: &[f64], dim: usize) -> Vec<f64> {
    let n = (points.len() / dim).max(1) as f64;
    let mut c = alloc::vec![0.0; dim];
    for p in points.chunks_exact(dim) {
        for (ck, x) in c.iter_mut().zip(p) {
            *ck += x;
        }
    }
    c.iter_mut().for_each(|x| *x /= n);
    c
}

/// Eigenvalues (descending) of the sample covariance, by cyclic Jacobi.
pub fn covariance_eigenvalues(points: &[f64], dim: usize) -> Vec<f64> {
    let n = points.len() / dim;
    let c = mean(points, dim);
    let mut cov = alloc::vec![0.0; dim * dim];
    for p in points.chunks_exact(dim) {
        for a in 0..dim {
            for b in 0..dim {
                cov[a * dim + b] += (p[a] - c[a]) * (p[b] - c[b]) / n.max(1) as f64;
            }
        }
    }
    let mut eig = symmetric_eigenvalues(cov, dim);
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * math::atan2(2.0 * apq, a[q * n + q] - a[p * n + p]);
                let (s, c) = (math::sin(theta), math::cos(theta));
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// `(s_max - s_min) / s_max` over covariance eigenvalues; 0 for isotropic
/// clouds.
pub fn asymmetry(points: &[f64], dim: usize) -> f64 {
    let eig = covariance_eigenvalues(points, dim);
    match (eig.first(), eig.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => (hi - lo) / hi,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn square_hull() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.5, 0.0],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
        assert!((distance_to_polygon_boundary([0.5, 0.5], &hull) - 0.5).abs() < 1e-15);
        assert!((distance_to_polygon_boundary([0.5, 0.1], &hull) - 0.1).abs() < 1e-15);
        let flat: Vec<f64> = pts.iter().flatten().copied().collect();
        assert!((hull_boundary_fraction(&flat, 0.01) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn circle_fit() {
        let pts: Vec<f64> = (0..40)
            .flat_map(|k| {
                let t = 2.0 * PI * k as f64 / 40.0;
                [0.3 + 0.7 * math::cos(t), -0.2 + 0.7 * math::sin(t)]
            })
            .collect();
        let fit = fit_sphere(&pts, 2).unwrap();
        assert!((fit.radius - 0.7).abs() < 1e-12);
        assert!((fit.center[0] - 0.3).abs() < 1e-12 && (fit.center[1] + 0.2).abs() < 1e-12);
        assert_eq!(fit.shell_fraction(&pts, 1e-9), 1.0);
    }

    #[test]
    fn histogram_and_min_radius() {
        let pts = [0.01, 0.0, 0.07, 0.0, 0.0, 0.26];
        assert_eq!(
            radial_histogram(&pts, 2, &[0.0, 0.0], 0.05),
            alloc::vec![1, 1, 0, 0, 0, 1]
        );
        assert!((min_radius_from(&pts, 2, &[0.0, 0.0]) - 0.01).abs() < 1e-16);
    }

    #[test]
    fn covariance_spectrum() {
        // axis-aligned cross: variances 4 and 1 along rotated axes
        let (c, s) = (math::cos(0.3), math::sin(0.3));
        let mut pts = Vec::new();
        for &(a, b) in &[(2.0, 0.0), (-2.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            pts.push(c * a - s * b);
            pts.push(s * a + c * b);
        }
        let eig = covariance_eigenvalues(&pts, 2);
        assert!((eig[0] - 2.0).abs() < 1e-12 && (eig[1] - 0.5).abs() < 1e-12);
        assert!((asymmetry(&pts, 2) - 0.75).abs() < 1e-12);
    }
}
