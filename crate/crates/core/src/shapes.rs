//! Seeded samplers for diameter-one sets and the product-union
//! construction on spheres of radius `sqrt(2)/2`.

use crate::error::{Error, Result};
use crate::math;
use crate::measure::DiscreteMeasure;
use crate::rng::{self, SimRng};
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, SQRT_2};

/// Radius of the sphere carrying spherical caps; orthogonal points on it
/// are exactly distance one apart.
pub const CAP_SPHERE_RADIUS: f64 = SQRT_2 / 2.0;

/// Angular radius of a cap of chord diameter one on that sphere.
pub const CAP_HALF_ANGLE: f64 = FRAC_PI_4;

/// Trial budget for rejection samplers.
pub const MAX_REJECTION_TRIALS: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShapeKind {
    Ball {
        dim: usize,
        radius: f64,
    },
    Sphere {
        dim: usize,
        radius: f64,
    },
    /// Intersection of the unit disks centered at the vertices of a unit
    /// equilateral triangle, translated so the triangle's centroid is at 0.
    ReuleauxTriangle,
    /// The `dim + 1` vertices of a regular simplex with unit edges.
    SimplexVertices {
        dim: usize,
    },
    /// Cap of angular radius `pi/4` on the sphere of radius `sqrt(2)/2`.
    SphericalCap {
        dim: usize,
    },
    /// `left x {0}` union `{0} x right` with masses `1 - t` and `t`.
    ProductUnion {
        left: Box<ShapeSpec>,
        right: Box<ShapeSpec>,
        t: f64,
    },
}

impl ShapeKind {
    pub fn dim(&self) -> usize {
        match self {
            ShapeKind::Ball { dim, .. }
            | ShapeKind::Sphere { dim, .. }
            | ShapeKind::SimplexVertices { dim }
            | ShapeKind::SphericalCap { dim } => *dim,
            ShapeKind::ReuleauxTriangle => 2,
            ShapeKind::ProductUnion { left, right, .. } => left.kind.dim() + right.kind.dim(),
        }
    }

    /// Upper bound on the diameter of any sample.
    pub fn diameter_bound(&self) -> f64 {
        match self {
            ShapeKind::Ball { radius, .. } | ShapeKind::Sphere { radius, .. } => 2.0 * radius,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub n_samples: usize,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, n_samples: usize, seed: u64) -> Self {
        ShapeSpec {
            kind,
            n_samples,
            seed,
        }
    }

    pub fn sample(&self) -> Result<DiscreteMeasure> {
        sample(self)
    }
}

/// Draws the atoms of `spec`; weights are uniform except for product unions.
pub fn sample(spec: &ShapeSpec) -> Result<DiscreteMeasure> {
    if spec.n_samples == 0 {
        return Err(Error::domain("n_samples must be at least 1"));
    }
    let mut rng = rng::seeded(spec.seed);
    let n = spec.n_samples;
    match &spec.kind {
        ShapeKind::Ball { dim, radius } => {
            check_dim_radius(*dim, *radius)?;
            DiscreteMeasure::uniform(*dim, ball_points(&mut rng, *dim, *radius, n))
        }
        ShapeKind::Sphere { dim, radius } => {
            check_dim_radius(*dim, *radius)?;
            DiscreteMeasure::uniform(*dim, sphere_points(&mut rng, *dim, *radius, n))
        }
        ShapeKind::ReuleauxTriangle => {
            let (pts, _) = reuleaux_points(&mut rng, n)?;
            DiscreteMeasure::uniform(2, pts)
        }
        ShapeKind::SimplexVertices { dim } => {
            if *dim == 0 {
                return Err(Error::dimension("simplex dimension must be at least 1"));
            }
            DiscreteMeasure::uniform(*dim, simplex_vertices(*dim))
        }
        ShapeKind::SphericalCap { dim } => {
            if *dim < 2 {
                return Err(Error::dimension("spherical caps need dimension at least 2"));
            }
            DiscreteMeasure::uniform(*dim, cap_points(&mut rng, *dim, n)?)
        }
        ShapeKind::ProductUnion { left, right, t } => {
            let l = sample(left)?;
            let r = sample(right)?;
            product_union(&l, &r, *t)
        }
    }
}

fn check_dim_radius(dim: usize, radius: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::dimension("dimension must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(())
}

/// Uniform points on the sphere of radius `radius` (normalized Gaussians).
pub fn sphere_points(rng: &mut SimRng, dim: usize, radius: f64, n: usize) -> Vec<f64> {
    let mut pts = alloc::vec![0.0; n * dim];
    for p in pts.chunks_exact_mut(dim) {
        rng::unit_vector(rng, p);
        for x in p.iter_mut() {
            *x *= radius;
        }
    }
    pts
}

/// Uniform points in the ball of radius `radius`.
pub fn ball_points(rng: &mut SimRng, dim: usize, radius: f64, n: usize) -> Vec<f64> {
    let mut pts = alloc::vec![0.0; n * dim];
    for p in pts.chunks_exact_mut(dim) {
        rng::unit_vector(rng, p);
        let s = radius * math::powf(rng::uniform(rng), 1.0 / dim as f64);
        for x in p.iter_mut() {
            *x *= s;
        }
    }
    pts
}

/// Isotropic Gaussian points with standard deviation `sigma` per axis.
pub fn gaussian_points(rng: &mut SimRng, dim: usize, sigma: f64, n: usize) -> Vec<f64> {
    (0..n * dim).map(|_| sigma * rng::gaussian(rng)).collect()
}

const REULEAUX_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];
const REULEAUX_CENTROID: [f64; 2] = [0.5, 0.288_675_134_594_812_9];

/// Membership in the Reuleaux triangle (centroid-centered coordinates).
pub fn in_reuleaux(p: [f64; 2]) -> bool {
    let x = p[0] + REULEAUX_CENTROID[0];
    let y = p[1] + REULEAUX_CENTROID[1];
    REULEAUX_CENTERS
        .iter()
        .all(|c| (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) <= 1.0)
}

/// Bounding box `[x0, x1] x [y0, y1]` of the centered Reuleaux triangle.
pub fn reuleaux_bbox() -> [f64; 4] {
    let top = REULEAUX_CENTERS[2][1];
    [
        -REULEAUX_CENTROID[0],
        1.0 - REULEAUX_CENTROID[0],
        top - 1.0 - REULEAUX_CENTROID[1],
        top - REULEAUX_CENTROID[1],
    ]
}

/// Rejection-samples `n` points; also returns the number of trials used.
pub fn reuleaux_points(rng: &mut SimRng, n: usize) -> Result<(Vec<f64>, u64)> {
    let [x0, x1, y0, y1] = reuleaux_bbox();
    let mut pts = Vec::with_capacity(2 * n);
    let mut trials = 0u64;
    while pts.len() < 2 * n {
        if trials >= MAX_REJECTION_TRIALS {
            return Err(Error::SamplerExhausted { trials });
        }
        trials += 1;
        let p = [
            x0 + (x1 - x0) * rng::uniform(rng),
            y0 + (y1 - y0) * rng::uniform(rng),
        ];
        if in_reuleaux(p) {
            pts.extend_from_slice(&p);
        }
    }
    Ok((pts, trials))
}

/// Monte-Carlo area of the Reuleaux triangle from the acceptance ratio of
/// the rejection sampler.
pub fn reuleaux_area_estimate(seed: u64, accepted: usize) -> Result<f64> {
    let mut rng = rng::seeded(seed);
    let (_, trials) = reuleaux_points(&mut rng, accepted)?;
    let [x0, x1, y0, y1] = reuleaux_bbox();
    Ok(accepted as f64 / trials as f64 * (x1 - x0) * (y1 - y0))
}

/// Vertices of a regular simplex with unit edges in `R^dim`, centered at
/// the origin.
pub fn simplex_vertices(dim: usize) -> Vec<f64> {
    let count = dim + 1;
    let mut v = alloc::vec![0.0; count * dim];
    // Vertex k sits above the centroid of vertices 0..k at the height that
    // puts it at unit distance from each of them.
    let mut centroid = alloc::vec![0.0; dim];
    for k in 1..count {
        let kf = k as f64;
        let circumradius2 = (kf - 1.0) / (2.0 * kf);
        let row = &mut v[k * dim..(k + 1) * dim];
        row[..k - 1].copy_from_slice(&centroid[..k - 1]);
        row[k - 1] = math::sqrt(1.0 - circumradius2);
        for (c, x) in centroid.iter_mut().zip(v[k * dim..(k + 1) * dim].iter()) {
            *c = (*c * kf + x) / (kf + 1.0);
        }
    }
    for p in v.chunks_exact_mut(dim) {
        for (x, c) in p.iter_mut().zip(&centroid) {
            *x -= c;
        }
    }
    v
}

/// Points of the `pi/4` cap around `e_1` on the sphere of radius
/// `sqrt(2)/2`, uniform with respect to surface measure.
pub fn cap_points(rng: &mut SimRng, dim: usize, n: usize) -> Result<Vec<f64>> {
    let mut pts = alloc::vec![0.0; n * dim];
    let mut dir = alloc::vec![0.0; dim - 1];
    let rim = math::sin(CAP_HALF_ANGLE);
    let mut trials = 0u64;
    for p in pts.chunks_exact_mut(dim) {
        // polar angle has density proportional to sin^(dim-2)
        let theta = loop {
            if trials >= MAX_REJECTION_TRIALS {
                return Err(Error::SamplerExhausted { trials });
            }
            trials += 1;
            let theta = CAP_HALF_ANGLE * rng::uniform(rng);
            let accept = math::powf(math::sin(theta) / rim, (dim - 2) as f64);
            if rng::uniform(rng) < accept {
                break theta;
            }
        };
        p[0] = math::cos(theta);
        if dim == 2 {
            p[1] = if rng::uniform(rng) < 0.5 { -1.0 } else { 1.0 } * math::sin(theta);
        } else {
            rng::unit_vector(rng, &mut dir);
            let s = math::sin(theta);
            for (x, d) in p[1..].iter_mut().zip(&dir) {
                *x = s * d;
            }
        }
        let scale = CAP_SPHERE_RADIUS / math::sqrt(math::norm2(p));
        for x in p.iter_mut() {
            *x *= scale;
        }
    }
    Ok(pts)
}

/// `(1 - t) (left x delta_0) + t (delta_0 x right)` in `R^(m + k)`.
pub fn product_union(
    left: &DiscreteMeasure,
    right: &DiscreteMeasure,
    t: f64,
) -> Result<DiscreteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!(
            "mixing weight must lie in [0, 1], got {t}"
        )));
    }
    let (m, k) = (left.dim(), right.dim());
    let dim = m + k;
    let mut points = Vec::with_capacity((left.len() + right.len()) * dim);
    let mut weights = Vec::with_capacity(left.len() + right.len());
    for i in 0..left.len() {
        points.extend_from_slice(left.point(i));
        points.extend(core::iter::repeat(0.0).take(k));
        weights.push((1.0 - t) * left.weights()[i]);
    }
    for i in 0..right.len() {
        points.extend(core::iter::repeat(0.0).take(m));
        points.extend_from_slice(right.point(i));
        weights.push(t * right.weights()[i]);
    }
    DiscreteMeasure::new(dim, points, weights)
}

/// Minimizes `(1 - t)^2 a + t^2 b` over `t`: returns `(t*, value)` with
/// `t* = a / (a + b)` and `value = a b / (a + b)`.
pub fn optimal_mix(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "mixing coefficients must be positive, got {a} and {b}"
        )));
    }
    Ok((a / (a + b), a * b / (a + b)))
}
