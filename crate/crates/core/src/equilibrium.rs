//! Discrete equilibrium measures and Riesz capacities of point clouds.
//!
//! On a cloud `x_1..x_N` we minimize
//!
//! ```text
//! f(w) = sum_{i != j} w_i w_j |x_i - x_j|^-l
//! ```
//!
//! over the capped simplex `{0 <= w_i <= cap, sum w_i = 1}` by projected
//! gradient descent with Barzilai-Borwein steps and a nonmonotone
//! line search. The capacity is `1 / min f`.
//!
//! The cap excludes the spurious minimizer of the off-diagonal energy that
//! puts all mass on a single atom. Because `f` is indefinite, the solver
//! certifies a stationary point through the discrete Frostman (KKT)
//! conditions on the potential `phi = M w`:
//!
//! * `phi_i = mu*` where `0 < w_i < cap`,
//! * `phi_i >= mu*` where `w_i = 0`,
//! * `phi_i <= mu*` where `w_i = cap`,
//!
//! with `mu*` the `w`-weighted mean of `phi` over interior coordinates.

use crate::error::{Error, Result};
use crate::kernel::riesz_terms;
use crate::measure::{check_lambda, DiscreteMeasure};
use crate::quadrature::tanh_sinh;
use crate::{math, rng};
use alloc::format;
use alloc::vec::Vec;

/// Weights at or below this count as zero.
pub const WEIGHT_FLOOR: f64 = 1e-10;

/// Above this many points the kernel matrix is applied without storing it.
pub const DENSE_LIMIT: usize = 8192;

/// Default cap is `CAP_FACTOR / N`.
pub const CAP_FACTOR: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Upper bound on each weight; `None` means `CAP_FACTOR / N`.
    pub cap: Option<f64>,
    /// Target relative KKT residual.
    pub tol: f64,
    /// Random simplex starts in addition to the uniform start.
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Store the kernel matrix; `None` decides by `DENSE_LIMIT`.
    pub dense: Option<bool>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cap: None,
            tol: 1e-7,
            restarts: 3,
            max_iter: 50_000,
            seed: 0,
            dense: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult {
    pub lambda: f64,
    pub cap: f64,
    pub weights: Vec<f64>,
    pub energy: f64,
    pub capacity: f64,
    /// Largest violation of the KKT conditions relative to `mu*`.
    pub kkt_residual: f64,
    /// The common potential value `mu*` on the interior support.
    pub potential_level: f64,
    pub support_mask: Vec<bool>,
    /// Iterations of the start that produced the result.
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

impl EquilibriumResult {
    pub fn measure(&self, dim: usize, cloud: &[f64]) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(dim, cloud.to_vec(), self.weights.clone())
    }

    pub fn support_size(&self) -> usize {
        self.support_mask.iter().filter(|&&s| s).count()
    }
}

/// The off-diagonal Riesz matrix `M_ij = |x_i - x_j|^-l`, `M_ii = 0`.
pub enum RieszOperator<'a> {
    Dense {
        n: usize,
        matrix: Vec<f64>,
    },
    Implicit {
        dim: usize,
        cloud: &'a [f64],
        lambda: f64,
    },
}

impl<'a> RieszOperator<'a> {
    pub fn new(dim: usize, cloud: &'a [f64], lambda: f64, dense: bool) -> Result<Self> {
        check_lambda(lambda)?;
        let n = check_cloud(dim, cloud)?;
        if !dense {
            return Ok(RieszOperator::Implicit { dim, cloud, lambda });
        }
        let mut matrix = alloc::vec![0.0; n * n];
        for i in 0..n {
            let xi = &cloud[i * dim..(i + 1) * dim];
            for j in i + 1..n {
                let v = riesz_terms(lambda, math::dist2(xi, &cloud[j * dim..(j + 1) * dim]));
                matrix[i * n + j] = v;
                matrix[j * n + i] = v;
            }
        }
        Ok(RieszOperator::Dense { n, matrix })
    }

    pub fn len(&self) -> usize {
        match self {
            RieszOperator::Dense { n, .. } => *n,
            RieszOperator::Implicit { dim, cloud, .. } => cloud.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = M w`, each row summed in index order.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        let row = |i: usize| -> f64 {
            match self {
                RieszOperator::Dense { n, matrix } => matrix[i * n..(i + 1) * n]
                    .iter()
                    .zip(w)
                    .fold(0.0, |acc, (m, x)| acc + m * x),
                RieszOperator::Implicit { dim, cloud, lambda } => {
                    let xi = &cloud[i * dim..(i + 1) * dim];
                    let mut acc = 0.0;
                    for (j, wj) in w.iter().enumerate() {
                        if j != i && *wj != 0.0 {
                            let d2 = math::dist2(xi, &cloud[j * dim..(j + 1) * dim]);
                            acc += wj * riesz_terms(*lambda, d2);
                        }
                    }
                    acc
                }
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if out.len() >= 256 && rayon::current_num_threads() > 1 {
                out.par_iter_mut()
                    .enumerate()
                    .for_each(|(i, o)| *o = row(i));
                return;
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = row(i);
        }
    }
}

fn check_cloud(dim: usize, cloud: &[f64]) -> Result<usize> {
    if dim == 0 || cloud.len() % dim != 0 {
        return Err(Error::dimension("cloud does not form whole points"));
    }
    let n = cloud.len() / dim;
    if n < 2 {
        return Err(Error::domain("an equilibrium needs at least two points"));
    }
    if cloud.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("non-finite cloud coordinate"));
    }
    Ok(n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Euclidean projection of `v` onto `{0 <= w <= cap, sum w = 1}`.
///
/// `g(tau) = sum_i clamp(v_i - tau, 0, cap)` is piecewise linear and
/// nonincreasing with breakpoints `v_i - cap` and `v_i`; the projection is
/// `clamp(v - tau*, 0, cap)` for the root of `g(tau) = 1`, located exactly
/// by sweeping the sorted breakpoints.
pub fn project_capped_simplex(v: &[f64], cap: f64) -> Result<Vec<f64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::dimension("empty vector"));
    }
    if !(cap > 0.0 && cap * n as f64 >= 1.0) {
        return Err(Error::Infeasible(format!(
            "cap {cap} admits no probability vector of length {n}"
        )));
    }
    // (position, slope change): entering the linear regime at v - cap
    // decreases the slope, leaving it at v restores it
    let mut breaks: Vec<(f64, i64)> = Vec::with_capacity(2 * n);
    for &x in v {
        breaks.push((x - cap, 1));
        breaks.push((x, -1));
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut g = cap * n as f64;
    let mut active: i64 = 0;
    let mut tau = breaks[0].0;
    let mut found = g <= 1.0;
    for k in 0..if found { 0 } else { breaks.len() } {
        let (pos, delta) = breaks[k];
        if k > 0 {
            let next = g - active as f64 * (pos - breaks[k - 1].0);
            if next <= 1.0 {
                tau = if active > 0 {
                    breaks[k - 1].0 + (g - 1.0) / active as f64
                } else {
                    breaks[k - 1].0
                };
                found = true;
                break;
            }
            g = next;
        }
        active += delta;
    }
    if !found {
        // only reachable through rounding at the last breakpoint
        tau = breaks[breaks.len() - 1].0;
    }
    Ok(v.iter().map(|x| (x - tau).clamp(0.0, cap)).collect())
}

/// Relative KKT residual of `w` with potential `phi = M w`; returns
/// `(residual, mu*)`.
pub fn kkt_residual(w: &[f64], phi: &[f64], cap: f64) -> (f64, f64) {
    let is_zero = |x: f64| x <= WEIGHT_FLOOR;
    let is_cap = |x: f64| x >= cap - WEIGHT_FLOOR;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, p) in w.iter().zip(phi) {
        if !is_zero(*x) && !is_cap(*x) {
            num += x * p;
            den += x;
        }
    }
    let level = if den > 0.0 {
        num / den
    } else {
        // every coordinate is at a bound: any level between the largest
        // capped potential and the smallest zero-weight potential certifies
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (x, p) in w.iter().zip(phi) {
            if is_cap(*x) {
                lo = lo.max(*p);
            } else {
                hi = hi.min(*p);
            }
        }
        if hi.is_infinite() {
            lo
        } else if lo.is_infinite() {
            hi
        } else {
            0.5 * (lo + hi)
        }
    };
    let mut worst = 0.0f64;
    for (x, p) in w.iter().zip(phi) {
        let violation = if is_zero(*x) {
            (level - p).max(0.0)
        } else if is_cap(*x) {
            (p - level).max(0.0)
        } else {
            (p - level).abs()
        };
        worst = worst.max(violation);
    }
    (worst / level.abs().max(f64::MIN_POSITIVE), level)
}

struct Descent {
    weights: Vec<f64>,
    energy: f64,
    kkt: f64,
    level: f64,
    iterations: usize,
}

/// Nonmonotone projected gradient from `start`.
fn descend(
    op: &RieszOperator<'_>,
    start: &[f64],
    cap: f64,
    opts: &SolverOptions,
) -> Result<Descent> {
    const MEMORY: usize = 10;
    const SUFFICIENT: f64 = 1e-4;
    const REFRESH: usize = 50;
    let n = op.len();
    let mut w = project_capped_simplex(start, cap)?;
    let mut mw = alloc::vec![0.0; n];
    op.apply(&w, &mut mw);
    let mut f = dot(&w, &mw);
    let mut recent = alloc::vec![f; 1];
    let mut md = alloc::vec![0.0; n];
    let mut trial = alloc::vec![0.0; n];
    let max_row = mw.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    // 1 / (2 ||M||) scale for the first step, then Barzilai-Borwein
    let mut step = 1.0 / (2.0 * max_row * n as f64);
    let mut kkt = kkt_residual(&w, &mw, cap).0;
    let mut it = 0;
    while it < opts.max_iter && kkt > opts.tol {
        it += 1;
        for i in 0..n {
            trial[i] = w[i] - step * 2.0 * mw[i];
        }
        let proj = project_capped_simplex(&trial, cap)?;
        let d: Vec<f64> = proj.iter().zip(&w).map(|(p, x)| p - x).collect();
        let gd = 2.0 * dot(&d, &mw);
        if gd >= 0.0 {
            // projected step made no progress at this step length
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
            continue;
        }
        op.apply(&d, &mut md);
        let dmd = dot(&d, &md);
        let reference = recent.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut t = 1.0;
        loop {
            let candidate = f + t * gd + t * t * dmd;
            if candidate <= reference + SUFFICIENT * t * gd || t < 1e-12 {
                break;
            }
            t *= 0.5;
        }
        for i in 0..n {
            w[i] += t * d[i];
            mw[i] += t * md[i];
        }
        if it % REFRESH == 0 {
            // incremental updates drift off the constraint set and M w
            w = project_capped_simplex(&w, cap)?;
            op.apply(&w, &mut mw);
        }
        f = dot(&w, &mw);
        recent.push(f);
        if recent.len() > MEMORY {
            recent.remove(0);
        }
        // s = t d, y = 2 t M d
        let sy = 2.0 * t * t * dmd;
        let ss = t * t * dot(&d, &d);
        step = if sy > 0.0 { ss / sy } else { step * 2.0 };
        step = step.clamp(1e-12 / max_row, 1e12 / max_row);
        kkt = kkt_residual(&w, &mw, cap).0;
    }
    let w = project_capped_simplex(&w, cap)?;
    op.apply(&w, &mut mw);
    let energy = dot(&w, &mw);
    let (kkt, level) = kkt_residual(&w, &mw, cap);
    Ok(Descent {
        weights: w,
        energy,
        kkt,
        level,
        iterations: it,
    })
}

/// Equilibrium weights and capacity of the cloud `cloud` (row-major,
/// `N * dim` values) for the Riesz exponent `lambda`.
pub fn solve(
    dim: usize,
    cloud: &[f64],
    lambda: f64,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    solve_impl(dim, cloud, lambda, opts, None)
}

/// As [`solve`], with `start` as an extra starting point. The returned
/// energy never exceeds that of `start` projected onto the capped simplex.
pub fn solve_from(
    dim: usize,
    cloud: &[f64],
    lambda: f64,
    opts: &SolverOptions,
    start: &[f64],
) -> Result<EquilibriumResult> {
    solve_impl(dim, cloud, lambda, opts, Some(start))
}

fn solve_impl(
    dim: usize,
    cloud: &[f64],
    lambda: f64,
    opts: &SolverOptions,
    extra_start: Option<&[f64]>,
) -> Result<EquilibriumResult> {
    check_lambda(lambda)?;
    if lambda >= dim as f64 {
        return Err(Error::domain(format!(
            "capacity needs lambda < n, got lambda = {lambda} in dimension {dim}"
        )));
    }
    let n = check_cloud(dim, cloud)?;
    let cap = opts.cap.unwrap_or(CAP_FACTOR / n as f64).min(1.0);
    if !(cap * n as f64 > 1.0) {
        return Err(Error::Infeasible(format!(
            "cap {cap} with {n} points: need cap * N > 1"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if math::dist2(
                &cloud[i * dim..(i + 1) * dim],
                &cloud[j * dim..(j + 1) * dim],
            ) == 0.0
            {
                return Err(Error::domain(format!("cloud points {i} and {j} coincide")));
            }
        }
    }
    let dense = opts.dense.unwrap_or(n <= DENSE_LIMIT);
    let op = RieszOperator::new(dim, cloud, lambda, dense)?;

    let uniform = alloc::vec![1.0 / n as f64; n];
    let mut best = descend(&op, &uniform, cap, opts)?;
    if let Some(start) = extra_start {
        if start.len() != n {
            return Err(Error::dimension(format!(
                "{} start weights for {n} points",
                start.len()
            )));
        }
        let run = descend(&op, start, cap, opts)?;
        if run.energy < best.energy {
            best = run;
        }
    }
    let mut rng = rng::seeded(opts.seed);
    for _ in 0..opts.restarts {
        // Dirichlet(1, ..., 1) start
        let mut start: Vec<f64> = (0..n)
            .map(|_| -math::ln(1.0 - rng::uniform(&mut rng)))
            .collect();
        let total: f64 = start.iter().sum();
        start.iter_mut().for_each(|x| *x /= total);
        let run = descend(&op, &start, cap, opts)?;
        if run.energy < best.energy {
            best = run;
        }
    }
    Ok(EquilibriumResult {
        lambda,
        cap,
        support_mask: best.weights.iter().map(|&x| x > WEIGHT_FLOOR).collect(),
        capacity: 1.0 / best.energy,
        energy: best.energy,
        kkt_residual: best.kkt,
        potential_level: best.level,
        converged: best.kkt <= opts.tol,
        weights: best.weights,
        iterations: best.iterations,
        restarts_used: opts.restarts,
    })
}

/// Riesz energy of the uniform measure on the sphere of radius `r` in
/// `R^n`, by quadrature over the chord-length distribution:
///
/// ```text
/// r^-l * int_0^pi (2 sin(t/2))^-l sin^(n-2) t dt / int_0^pi sin^(n-2) t dt
/// ```
///
/// Finite only for `l < n - 1`. For `l <= n - 2` this uniform measure is the
/// equilibrium measure of the ball of radius `r`.
pub fn sphere_energy_oracle(n: usize, r: f64, lambda: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("sphere oracle needs n >= 2"));
    }
    check_lambda(lambda)?;
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    if lambda >= n as f64 - 1.0 {
        return Err(Error::domain(format!(
            "sphere energy diverges for lambda = {lambda} >= n - 1 = {}",
            n - 1
        )));
    }
    let p = (n - 2) as f64;
    let pi = core::f64::consts::PI;
    // sin t from the nearer endpoint keeps full relative accuracy near 0, pi
    let sin_t = |x: f64, da: f64, db: f64| {
        if x < 0.5 * pi {
            math::sin(da)
        } else {
            math::sin(db)
        }
    };
    let weighted = tanh_sinh(0.0, pi, 1e-14, |x, da, db| {
        let chord = 2.0 * math::sin(0.5 * da);
        math::powf(chord, -lambda) * math::powf(sin_t(x, da, db), p)
    });
    let normal = tanh_sinh(0.0, pi, 1e-14, |x, da, db| math::powf(sin_t(x, da, db), p));
    Ok(math::powf(r, -lambda) * weighted.value / normal.value)
}

/// Capacity `1 / I` of the ball of radius `r` from the sphere oracle
/// (valid for `l <= n - 2`).
pub fn ball_capacity_oracle(n: usize, r: f64, lambda: f64) -> Result<f64> {
    Ok(1.0 / sphere_energy_oracle(n, r, lambda)?)
}

/// `max_p phi(p) - I` over `probes` for the equilibrium `res` on `cloud`.
///
/// The potential of an equilibrium measure never exceeds its energy when
/// `l >= n - 2`; the check is refused below that range.
pub fn potential_bound_check(
    res: &EquilibriumResult,
    dim: usize,
    cloud: &[f64],
    lambda: f64,
    probes: &[f64],
) -> Result<f64> {
    if lambda < dim as f64 - 2.0 {
        return Err(Error::domain(format!(
            "potential bound holds only for lambda >= n - 2 = {}",
            dim as f64 - 2.0
        )));
    }
    if probes.len() % dim != 0 {
        return Err(Error::dimension("probes do not form whole points"));
    }
    let mu = res.measure(dim, cloud)?;
    let mut worst = f64::NEG_INFINITY;
    for p in probes.chunks_exact(dim) {
        let phi = mu.potential_at(lambda, p)?;
        if !phi.is_finite() {
            return Err(Error::domain("probe coincides with a cloud point"));
        }
        worst = worst.max(phi - res.energy);
    }
    Ok(worst)
}
