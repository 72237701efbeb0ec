use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use riesz_swarm::experiments;
use riesz_swarm::io::{self, Format, TrajectoryWriter};
use riesz_swarm::report::ExperimentReport;
use riesz_swarm_core::dynamics::{self, Init};
use riesz_swarm_core::{
    DiscreteMeasure, KernelParams, KernelVariant, ShapeKind, ShapeSpec, SimConfig, SolverOptions,
};
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Particle simulations, equilibrium measures and capacity experiments for
/// attractive-repulsive power-law interaction energies.
#[derive(Parser)]
#[command(name = "riesz-swarm", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Riesz repulsion exponent.
    #[arg(long, global = true, default_value_t = 1.0)]
    lambda: f64,
    /// Attraction exponent.
    #[arg(long, global = true, default_value_t = 200.0)]
    alpha: f64,
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    #[arg(long, global = true, value_enum, default_value_t = KernelArg::Power)]
    kernel: KernelArg,
    /// Particles or sample points; each subcommand has its own default.
    #[arg(long, global = true)]
    particles: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Velocity tolerance for simulations, relative KKT tolerance for solves.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Step budget for simulations, iteration budget for solves.
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    /// Per-atom weight cap for equilibrium solves.
    #[arg(long, global = true)]
    cap: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format; guessed from the output extension when absent.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Power,
    Log,
    Normalized,
}

impl From<KernelArg> for KernelVariant {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Power => KernelVariant::Power,
            KernelArg::Log => KernelVariant::LogRepulsion,
            KernelArg::Normalized => KernelVariant::Normalized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Ball,
    Sphere,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Ball,
    Sphere,
    Reuleaux,
    Simplex,
    Cap,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, value_enum, default_value_t = InitArg::Ball)]
    init: InitArg,
    /// Radius (or standard deviation) of the initial cloud.
    #[arg(long, default_value_t = 0.5)]
    init_radius: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt0: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the particle flow and write the final configuration.
    Simulate {
        #[command(flatten)]
        flow: FlowArgs,
        /// Write trajectory frames as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Accepted steps between trajectory frames.
        #[arg(long, default_value_t = 100)]
        every: u64,
    },
    /// Solve for the equilibrium weights of a point cloud.
    Equilibrium {
        /// Measure file whose points form the cloud (weights are ignored).
        #[arg(long, conflicts_with = "shape")]
        input: Option<PathBuf>,
        /// ShapeSpec JSON to sample the cloud from.
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
    },
    /// Sample a shape and write the measure.
    Shape {
        /// ShapeSpec JSON; overrides the other shape flags.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ShapeArg::Ball)]
        kind: ShapeArg,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
    },
    /// Simulate for increasing alpha and judge the limit trends.
    AlphaSweep {
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 20.0, 200.0])]
        alphas: Vec<f64>,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Sphere-sample capacities against the quadrature oracle.
    CapacityTable {
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6])]
        dims: Vec<usize>,
    },
    /// Product unions of spherical caps against the ball.
    SymmetryBreak {
        /// Factor dimension pairs such as `4x4,8x8`.
        #[arg(long, value_delimiter = ',', default_values_t = ["4x4".to_string(), "8x8".to_string()])]
        pairs: Vec<String>,
    },
    /// Check the recovery-sequence bound for dilations of a measure.
    RecoveryCheck {
        /// Measure file; a Reuleaux sample when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0, 1000.0])]
        alphas: Vec<f64>,
    },
    /// KKT, exterior potential and Laplacian checks on an equilibrium.
    FrostmanCheck {
        /// ShapeSpec JSON; the sphere of radius 1/2 in `--dim` when absent.
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        probes: usize,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
    },
}

impl Global {
    fn format(&self) -> Format {
        self.format.unwrap_or_else(|| {
            self.output
                .as_deref()
                .map_or(Format::Json, Format::from_path)
        })
    }

    fn kernel(&self) -> riesz_swarm_core::Result<KernelParams> {
        KernelParams::new(self.kernel.into(), self.alpha, self.lambda, self.dim)
    }

    fn sim_config(&self, flow: &FlowArgs, default_particles: usize) -> anyhow::Result<SimConfig> {
        let mut cfg = SimConfig::new(
            self.kernel()?,
            self.particles.unwrap_or(default_particles),
            self.seed,
        );
        cfg.dt0 = flow.dt0;
        cfg.init = match flow.init {
            InitArg::Ball => Init::UniformBall {
                radius: flow.init_radius,
            },
            InitArg::Sphere => Init::UniformSphere {
                radius: flow.init_radius,
            },
            InitArg::Gaussian => Init::Gaussian {
                sigma: flow.init_radius,
            },
        };
        if let Some(tol) = self.tol {
            cfg.tol_velocity = tol;
        }
        if let Some(steps) = self.max_steps {
            cfg.max_steps = steps;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn solver(&self, restarts: usize) -> SolverOptions {
        let mut opts = SolverOptions {
            cap: self.cap,
            restarts,
            seed: self.seed,
            ..SolverOptions::default()
        };
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(steps) = self.max_steps {
            opts.max_iter = steps as usize;
        }
        opts
    }

    fn sink(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        })
    }

    fn write_measure(&self, mu: &DiscreteMeasure) -> anyhow::Result<()> {
        let mut out = self.sink()?;
        match self.format() {
            Format::Json => writeln!(out, "{}", io::measure_to_json(mu)?)?,
            Format::Csv => io::write_measure_csv(mu, &mut out)?,
        }
        out.flush()?;
        Ok(())
    }

    fn write_report(&self, report: &mut ExperimentReport) -> anyhow::Result<ExitCode> {
        report.param("threads", rayon::current_num_threads());
        let mut out = self.sink()?;
        match self.format() {
            Format::Json => writeln!(out, "{}", report.to_json()?)?,
            Format::Csv => report.write_series_csv(&mut out)?,
        }
        out.flush()?;
        for v in &report.verdicts {
            log::info!("{}: {:?} (measured {})", v.criterion, v.outcome, v.measured);
        }
        Ok(ExitCode::from(report.exit_code() as u8))
    }
}

fn read_spec(path: &Path) -> anyhow::Result<ShapeSpec> {
    io::read_shape_spec(path).with_context(|| format!("reading shape spec {}", path.display()))
}

fn parse_pair(s: &str) -> anyhow::Result<(usize, usize)> {
    let (m, k) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("pair `{s}` is not of the form MxK"))?;
    Ok((m.trim().parse()?, k.trim().parse()?))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate {
            flow,
            trajectory,
            every,
        } => {
            let cfg = g.sim_config(flow, 400)?;
            let dim = cfg.kernel.dim;
            let mut writer = match trajectory {
                Some(path) => Some(TrajectoryWriter::new(
                    BufWriter::new(File::create(path)?),
                    dim,
                )?),
                None => None,
            };
            let every = (*every).max(1);
            let mut failure = None;
            let res = dynamics::run_with_observer(&cfg, |snap| {
                if let Some(w) = writer.as_mut() {
                    if failure.is_none() && snap.step % every == 0 {
                        failure = w
                            .frame(snap.step, snap.time, snap.dim, snap.positions)
                            .err();
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e.into());
            }
            if let Some(w) = writer {
                w.finish()?;
            }
            g.write_measure(&res.final_measure)?;
            let summary = json!({
                "converged": res.converged,
                "steps": res.steps,
                "rejected_steps": res.rejected_steps,
                "final_time": res.final_time,
                "final_energy": res.final_energy,
                "final_diameter": res.final_diameter,
                "final_max_speed": res.final_max_speed,
            });
            eprintln!("{summary}");
            Ok(ExitCode::from(if res.converged { 0 } else { 3 }))
        }
        Command::Equilibrium {
            input,
            shape,
            restarts,
        } => {
            let cloud = match (input, shape) {
                (Some(path), _) => io::read_measure(path)?,
                (None, Some(path)) => read_spec(path)?.sample()?,
                (None, None) => bail!("equilibrium needs --input or --shape"),
            };
            let res = riesz_swarm_core::equilibrium::solve(
                cloud.dim(),
                cloud.points(),
                g.lambda,
                &g.solver(*restarts),
            )?;
            let mut out = g.sink()?;
            match g.format() {
                Format::Json => writeln!(out, "{}", io::equilibrium_to_json(&res)?)?,
                Format::Csv => {
                    io::write_measure_csv(&res.measure(cloud.dim(), cloud.points())?, &mut out)?
                }
            }
            out.flush()?;
            Ok(ExitCode::from(if res.converged { 0 } else { 3 }))
        }
        Command::Shape { spec, kind, radius } => {
            let spec = match spec {
                Some(path) => read_spec(path)?,
                None => {
                    let (dim, radius) = (g.dim, *radius);
                    let kind = match kind {
                        ShapeArg::Ball => ShapeKind::Ball { dim, radius },
                        ShapeArg::Sphere => ShapeKind::Sphere { dim, radius },
                        ShapeArg::Reuleaux => ShapeKind::ReuleauxTriangle,
                        ShapeArg::Simplex => ShapeKind::SimplexVertices { dim },
                        ShapeArg::Cap => ShapeKind::SphericalCap { dim },
                    };
                    ShapeSpec::new(kind, g.particles.unwrap_or(1000), g.seed)
                }
            };
            g.write_measure(&spec.sample()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::AlphaSweep { alphas, flow } => {
            let cfg = g.sim_config(flow, 400)?;
            let mut report =
                experiments::alpha_sweep(g.kernel.into(), g.lambda, g.dim, alphas, &cfg)?;
            g.write_report(&mut report)
        }
        Command::CapacityTable { dims } => {
            let mut report =
                experiments::capacity_table(g.lambda, dims, g.particles.unwrap_or(2000), g.seed)?;
            g.write_report(&mut report)
        }
        Command::SymmetryBreak { pairs } => {
            let pairs = pairs
                .iter()
                .map(|p| parse_pair(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut report =
                experiments::symmetry_break(g.lambda, &pairs, g.particles.unwrap_or(400), g.seed)?;
            g.write_report(&mut report)
        }
        Command::RecoveryCheck { input, alphas } => {
            let mu = match input {
                Some(path) => io::read_measure(path)?,
                None => ShapeSpec::new(
                    ShapeKind::ReuleauxTriangle,
                    g.particles.unwrap_or(200),
                    g.seed,
                )
                .sample()?,
            };
            let mut report = experiments::recovery_check(g.lambda, alphas, &mu)?;
            g.write_report(&mut report)
        }
        Command::FrostmanCheck {
            shape,
            probes,
            restarts,
        } => {
            let spec = match shape {
                Some(path) => read_spec(path)?,
                None => ShapeSpec::new(
                    ShapeKind::Sphere {
                        dim: g.dim,
                        radius: 0.5,
                    },
                    g.particles.unwrap_or(1000),
                    g.seed,
                ),
            };
            let mut report =
                experiments::frostman_check(&spec, g.lambda, *probes, &g.solver(*restarts))?;
            g.write_report(&mut report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors exit 1 so that 2 keeps meaning "a verdict failed"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
