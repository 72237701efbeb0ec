//! Particle gradient flow
//!
//! ```text
//! dX_i/dt = -(1/N) sum_j grad K(X_i - X_j)
//! ```
//!
//! integrated with forward Euler under energy-monitored step control: a step
//! is accepted only if the equal-weight discrete energy does not increase by
//! more than `ENERGY_SLACK * |E|`. Rejected steps halve `dt`; fifty accepted
//! steps in a row double it, within `[DT_MIN, DT_MAX]`. The run stops once
//! the largest particle speed falls below `tol_velocity`.

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::measure::DiscreteMeasure;
use crate::{math, rng, shapes};
use alloc::format;
use alloc::vec::Vec;

pub const DT_MIN: f64 = 1e-12;
pub const DT_MAX: f64 = 1e-1;
pub const GROWTH_STREAK: u32 = 50;
pub const ENERGY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Init {
    UniformBall {
        radius: f64,
    },
    UniformSphere {
        radius: f64,
    },
    Gaussian {
        sigma: f64,
    },
    /// Row-major initial positions, `n_particles * dim` values.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub kernel: KernelParams,
    pub n_particles: usize,
    pub dt0: f64,
    pub tol_velocity: f64,
    pub max_steps: u64,
    pub seed: u64,
    pub init: Init,
    /// Record `(t, E)` every this many accepted steps (the first and last
    /// states are always recorded).
    pub history_every: u64,
}

impl SimConfig {
    pub fn new(kernel: KernelParams, n_particles: usize, seed: u64) -> Self {
        SimConfig {
            kernel,
            n_particles,
            dt0: 1e-3,
            tol_velocity: 1e-7,
            max_steps: 5_000_000,
            seed,
            init: Init::UniformBall { radius: 1.0 },
            history_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.n_particles < 2 {
            return Err(Error::domain("at least two particles are required"));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(Error::domain(format!(
                "dt0 must be positive, got {}",
                self.dt0
            )));
        }
        if !(self.tol_velocity > 0.0) {
            return Err(Error::domain("tol_velocity must be positive"));
        }
        if self.history_every == 0 {
            return Err(Error::domain("history_every must be at least 1"));
        }
        match &self.init {
            Init::UniformBall { radius } | Init::UniformSphere { radius } if !(*radius > 0.0) => {
                Err(Error::domain("initial radius must be positive"))
            }
            Init::Gaussian { sigma } if !(*sigma > 0.0) => {
                Err(Error::domain("initial sigma must be positive"))
            }
            Init::Explicit(p) if p.len() != self.n_particles * self.kernel.dim => {
                Err(Error::dimension(format!(
                    "{} coordinates for {} particles in dimension {}",
                    p.len(),
                    self.n_particles,
                    self.kernel.dim
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    /// Final positions with equal weights `1/N`.
    pub final_measure: DiscreteMeasure,
    pub energy_history: Vec<(f64, f64)>,
    pub converged: bool,
    /// Attempted steps, accepted or not.
    pub steps: u64,
    pub rejected_steps: u64,
    pub final_diameter: f64,
    pub final_energy: f64,
    pub final_max_speed: f64,
    pub final_time: f64,
    pub final_dt: f64,
}

/// Energy and velocity field of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub energy: f64,
    pub velocity: Vec<f64>,
    pub max_speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub positions: Vec<f64>,
    pub accepted: bool,
    pub energy_change: f64,
}

/// A view of the trajectory handed to observers after each accepted step.
pub struct Snapshot<'a> {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    pub dim: usize,
    pub positions: &'a [f64],
}

/// Seeded initial positions for `cfg`.
pub fn initial_positions(cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dim = cfg.kernel.dim;
    let n = cfg.n_particles;
    let mut rng = rng::seeded(cfg.seed);
    Ok(match &cfg.init {
        Init::UniformBall { radius } => shapes::ball_points(&mut rng, dim, *radius, n),
        Init::UniformSphere { radius } => shapes::sphere_points(&mut rng, dim, *radius, n),
        Init::Gaussian { sigma } => shapes::gaussian_points(&mut rng, dim, *sigma, n),
        Init::Explicit(p) => p.clone(),
    })
}

/// Equal-weight energy `(1/N^2) sum_{i != j} K` and the velocities
/// `-(1/N) sum_j grad K(X_i - X_j)`.
pub fn evaluate(positions: &[f64], kernel: &KernelParams) -> Result<FlowState> {
    let dim = kernel.dim;
    if dim == 0 || positions.len() % dim != 0 {
        return Err(Error::dimension("positions do not form whole particles"));
    }
    let n = positions.len() / dim;
    let mut velocity = alloc::vec![0.0; positions.len()];
    let energy = pair_forces(positions, kernel, &mut velocity)?;
    let nf = n as f64;
    let mut max_speed2 = 0.0f64;
    for v in velocity.chunks_exact_mut(dim) {
        let mut s2 = 0.0;
        for x in v.iter_mut() {
            *x /= nf;
            s2 += *x * *x;
        }
        max_speed2 = max_speed2.max(s2);
    }
    Ok(FlowState {
        energy: 2.0 * energy / (nf * nf),
        velocity,
        max_speed: math::sqrt(max_speed2),
    })
}

// Accumulates `-sum_j grad K` into `force` and returns `sum_{i<j} K`.
fn pair_forces(x: &[f64], kernel: &KernelParams, force: &mut [f64]) -> Result<f64> {
    let dim = kernel.dim;
    let n = x.len() / dim;
    let min_r2 = kernel.min_radius * kernel.min_radius;
    let mut diff = alloc::vec![0.0; dim];
    let mut fi = alloc::vec![0.0; dim];
    let mut energy = 0.0;
    for i in 0..n {
        let xi = &x[i * dim..(i + 1) * dim];
        fi.iter_mut().for_each(|f| *f = 0.0);
        let mut row_energy = 0.0;
        for j in i + 1..n {
            let mut r2 = 0.0;
            for k in 0..dim {
                diff[k] = xi[k] - x[j * dim + k];
                r2 += diff[k] * diff[k];
            }
            if !(r2 >= min_r2) {
                return Err(collision(i, j, r2));
            }
            let (value, coef) = kernel.pair_terms(r2);
            row_energy += value;
            for k in 0..dim {
                let f = coef * diff[k];
                fi[k] -= f;
                force[j * dim + k] += f;
            }
        }
        for k in 0..dim {
            force[i * dim + k] += fi[k];
        }
        energy += row_energy;
    }
    Ok(energy)
}

fn collision(i: usize, j: usize, r2: f64) -> Error {
    Error::Collision {
        i,
        j,
        distance: math::sqrt(r2),
    }
}

fn euler_update(positions: &[f64], velocity: &[f64], dt: f64) -> Vec<f64> {
    positions
        .iter()
        .zip(velocity)
        .map(|(x, v)| x + dt * v)
        .collect()
}

fn accepts(before: f64, after: f64) -> bool {
    after <= before + ENERGY_SLACK * before.abs()
}

/// One forward-Euler trial step of size `dt` from `positions`.
///
/// The step is accepted iff the energy did not increase beyond the slack;
/// on rejection the caller is expected to halve `dt`.
pub fn step(positions: &[f64], cfg: &SimConfig, dt: f64) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let current = evaluate(positions, &cfg.kernel)?;
    let trial = euler_update(positions, &current.velocity, dt);
    let next = evaluate(&trial, &cfg.kernel)?;
    Ok(StepOutcome {
        positions: trial,
        accepted: accepts(current.energy, next.energy),
        energy_change: next.energy - current.energy,
    })
}

pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    run_with_observer(cfg, |_| {})
}

/// Runs the flow, calling `observer` after every accepted step.
pub fn run_with_observer<F>(cfg: &SimConfig, mut observer: F) -> Result<SimResult>
where
    F: FnMut(&Snapshot<'_>),
{
    let dim = cfg.kernel.dim;
    let mut x = initial_positions(cfg)?;
    let mut state = evaluate(&x, &cfg.kernel)?;
    let mut history = alloc::vec![(0.0, state.energy)];
    let mut t = 0.0;
    let mut dt = cfg.dt0.clamp(DT_MIN, DT_MAX);
    let mut streak = 0u32;
    let mut steps = 0u64;
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut converged = false;

    observer(&Snapshot {
        step: 0,
        time: t,
        energy: state.energy,
        dim,
        positions: &x,
    });
    loop {
        if state.max_speed < cfg.tol_velocity {
            converged = true;
            break;
        }
        if steps >= cfg.max_steps {
            break;
        }
        steps += 1;
        let trial = euler_update(&x, &state.velocity, dt);
        let next = evaluate(&trial, &cfg.kernel)?;
        if accepts(state.energy, next.energy) {
            x = trial;
            state = next;
            t += dt;
            accepted += 1;
            streak += 1;
            if streak >= GROWTH_STREAK {
                dt = (2.0 * dt).min(DT_MAX);
                streak = 0;
            }
            if accepted % cfg.history_every == 0 {
                history.push((t, state.energy));
            }
            observer(&Snapshot {
                step: steps,
                time: t,
                energy: state.energy,
                dim,
                positions: &x,
            });
        } else {
            rejected += 1;
            streak = 0;
            dt *= 0.5;
            if dt < DT_MIN {
                // energy can no longer be decreased at any admissible step
                log::warn!("step size fell below {DT_MIN:e} at t = {t}; stopping");
                dt = DT_MIN;
                break;
            }
        }
    }
    if history.last().map(|h| h.0) != Some(t) {
        history.push((t, state.energy));
    }
    let final_measure = DiscreteMeasure::uniform(dim, x)?;
    Ok(SimResult {
        final_diameter: final_measure.diameter(),
        final_measure,
        energy_history: history,
        converged,
        steps,
        rejected_steps: rejected,
        final_energy: state.energy,
        final_max_speed: state.max_speed,
        final_time: t,
        final_dt: dt,
    })
}
