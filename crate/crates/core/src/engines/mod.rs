//! Growth engines for exponential first-passage percolation from the origin.
//!
//! All engines share one driver: a [`GrowthProcess`] adds one vertex per
//! step and reports the boundary count it saw and the elapsed time, and
//! [`drive`] runs it until a target joins (or for a fixed number of steps),
//! accumulating the conditional moments on the fly.

mod dijkstra;
mod eden;
mod richardson;

pub use dijkstra::Dijkstra;
pub use eden::{eden_step, Eden};
pub use richardson::Richardson;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::MomentAccumulator;
use crate::lattice::{integer_part_vector, Cluster, LatticeError, StripRegion, Vertex};
use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("target coincides with the origin")]
    TargetAtOrigin,
    #[error("step cap of {cap} exceeded before the target was reached")]
    MaxStepsExceeded { cap: u64 },
    #[error("cluster boundary is empty")]
    EmptyBoundary,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Eden,
    Dijkstra,
    Richardson,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Eden => "eden",
            EngineKind::Dijkstra => "dijkstra",
            EngineKind::Richardson => "richardson",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eden" => Ok(EngineKind::Eden),
            "dijkstra" => Ok(EngineKind::Dijkstra),
            "richardson" => Ok(EngineKind::Richardson),
            other => Err(format!(
                "unknown engine `{other}` (expected eden, dijkstra or richardson)"
            )),
        }
    }
}

/// Clock law for the Richardson engine.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClockDistribution {
    /// Exp(1).
    Exponential,
    /// Uniform on (0, 2).
    Uniform,
    /// Constant 1.
    Deterministic,
}

impl ClockDistribution {
    #[inline]
    pub fn sample(self, rng: &mut RngStream) -> f64 {
        match self {
            ClockDistribution::Exponential => rng.exp1(),
            ClockDistribution::Uniform => 2.0 * rng.uniform01(),
            ClockDistribution::Deterministic => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClockDistribution::Exponential => "exponential",
            ClockDistribution::Uniform => "uniform",
            ClockDistribution::Deterministic => "deterministic",
        }
    }
}

impl fmt::Display for ClockDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClockDistribution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exponential" => Ok(ClockDistribution::Exponential),
            "uniform" => Ok(ClockDistribution::Uniform),
            "deterministic" => Ok(ClockDistribution::Deterministic),
            other => Err(format!(
                "unknown clock `{other}` (expected exponential, uniform or deterministic)"
            )),
        }
    }
}

/// Strip restriction: half-width is `constant * n^alpha / 2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StripSpec {
    pub alpha: f64,
    pub constant: f64,
}

pub const DEFAULT_STRIP_CONSTANT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Unit direction vector.
    pub direction: (f64, f64),
    /// Target index; the target vertex is the integer part of `n * direction`.
    pub n: u64,
    pub engine: EngineKind,
    pub clock: ClockDistribution,
    pub strip: Option<StripSpec>,
    /// Step cap; `None` means `8 n^2 + 10^4`.
    pub max_steps: Option<u64>,
    pub master_seed: u64,
    pub replicates: u64,
    pub retain_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            direction: (1.0, 0.0),
            n: 1,
            engine: EngineKind::Eden,
            clock: ClockDistribution::Exponential,
            strip: None,
            max_steps: None,
            master_seed: 1,
            replicates: 1000,
            retain_trace: false,
        }
    }
}

impl SimConfig {
    /// Axis-direction config for target `(n, 0)`.
    pub fn axis(n: u64) -> Self {
        SimConfig {
            n,
            ..Default::default()
        }
    }

    pub fn with_engine(mut self, engine: EngineKind) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_clock(mut self, clock: ClockDistribution) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_strip(mut self, alpha: f64, constant: f64) -> Self {
        self.strip = Some(StripSpec { alpha, constant });
        self
    }

    pub fn retaining_trace(mut self) -> Self {
        self.retain_trace = true;
        self
    }

    pub fn target(&self) -> Result<Vertex, EngineError> {
        let t = integer_part_vector(self.direction, self.n)?;
        if t == Vertex::ORIGIN {
            return Err(EngineError::TargetAtOrigin);
        }
        Ok(t)
    }

    pub fn step_cap(&self) -> u64 {
        self.max_steps.unwrap_or_else(|| default_step_cap(self.n))
    }

    /// The strip region, when a strip is configured.
    pub fn strip_region(&self) -> Result<Option<StripRegion>, EngineError> {
        let Some(spec) = self.strip else {
            return Ok(None);
        };
        if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
            return Err(EngineError::InvalidConfig(format!(
                "strip alpha {} not in (0,1)",
                spec.alpha
            )));
        }
        if !(spec.constant > 0.0 && spec.constant.is_finite()) {
            return Err(EngineError::InvalidConfig(format!(
                "strip constant {} not positive",
                spec.constant
            )));
        }
        let half_width = spec.constant * (self.n as f64).powf(spec.alpha) / 2.0;
        Ok(Some(StripRegion::new(
            Vertex::ORIGIN,
            self.target()?,
            half_width,
        )?))
    }
}

pub fn default_step_cap(n: u64) -> u64 {
    8u64.saturating_mul(n.saturating_mul(n))
        .saturating_add(10_000)
}

/// Reach-ordered record of a run. `y_counts[j - 1]` is the boundary count
/// just before vertex `j` was added and `times[j]` is its passage time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GrowthTrace {
    pub vertices: Vec<Vertex>,
    pub y_counts: Vec<u32>,
    pub times: Vec<f64>,
}

impl GrowthTrace {
    fn start(origin: Vertex) -> Self {
        GrowthTrace {
            vertices: vec![origin],
            y_counts: Vec::new(),
            times: vec![0.0],
        }
    }

    /// Number of growth steps recorded.
    pub fn steps(&self) -> usize {
        self.y_counts.len()
    }

    /// Structural invariants: lengths, monotone times, distinct vertices
    /// each adjacent to an earlier one.
    pub fn check(&self) -> Result<(), String> {
        if self.vertices.len() != self.times.len() || self.vertices.len() != self.y_counts.len() + 1
        {
            return Err("length mismatch".into());
        }
        if self.times[0] != 0.0 {
            return Err("times[0] != 0".into());
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err("times decrease".into());
        }
        if self.y_counts.first().is_some_and(|&y| y != 4) {
            return Err("Y_1 != 4".into());
        }
        let mut seen = std::collections::HashSet::with_capacity(self.vertices.len());
        for (j, &v) in self.vertices.iter().enumerate() {
            if !seen.insert(v) {
                return Err(format!("vertex {v} repeated at {j}"));
            }
            if j > 0 && !v.neighbors().iter().any(|n| seen.contains(n)) {
                return Err(format!("vertex {v} at {j} not adjacent to the cluster"));
            }
        }
        Ok(())
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct HitResult {
    /// Passage time of the last vertex added (the target, for hit runs).
    pub passage_time: f64,
    /// Index at which the run stopped: M(n) for hit runs.
    pub hit_index: u64,
    /// Sum of `1/Y_j` up to `hit_index`.
    pub mu: f64,
    /// Sum of `1/Y_j^2` up to `hit_index`.
    pub sigma_sq: f64,
    pub trace: Option<GrowthTrace>,
}

/// One vertex added by a growth process.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Step {
    pub vertex: Vertex,
    /// Boundary count just before the step.
    pub y_count: u32,
    pub increment: f64,
}

pub trait GrowthProcess {
    fn cluster(&self) -> &Cluster;
    /// Time at which the most recent vertex was reached.
    fn elapsed(&self) -> f64;
    fn step(&mut self, rng: &mut RngStream) -> Result<Step, EngineError>;
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Stop {
    /// Until this vertex joins the cluster.
    Target(Vertex),
    /// After exactly this many steps.
    Steps(u64),
}

pub fn drive<P: GrowthProcess>(
    process: &mut P,
    stop: Stop,
    cap: u64,
    retain: bool,
    rng: &mut RngStream,
) -> Result<HitResult, EngineError> {
    let origin = *process
        .cluster()
        .members()
        .first()
        .expect("process starts from a singleton");
    let mut trace = retain.then(|| GrowthTrace::start(origin));
    let mut moments = MomentAccumulator::default();
    let mut steps = 0u64;
    loop {
        let done = match stop {
            Stop::Target(t) => process.cluster().contains(t),
            Stop::Steps(k) => steps >= k,
        };
        if done {
            break;
        }
        if steps >= cap {
            return Err(EngineError::MaxStepsExceeded { cap });
        }
        let s = process.step(rng)?;
        steps += 1;
        moments.push(s.y_count);
        if let Some(t) = trace.as_mut() {
            t.vertices.push(s.vertex);
            t.y_counts.push(s.y_count);
            t.times.push(process.elapsed());
        }
    }
    Ok(HitResult {
        passage_time: process.elapsed(),
        hit_index: steps,
        mu: moments.mu(),
        sigma_sq: moments.sigma_sq(),
        trace,
    })
}

fn hit_run<P: GrowthProcess>(
    mut p: P,
    config: &SimConfig,
    rng: &mut RngStream,
) -> Result<HitResult, EngineError> {
    let target = config.target()?;
    drive(
        &mut p,
        Stop::Target(target),
        config.step_cap(),
        config.retain_trace,
        rng,
    )
}

fn start_cluster(region: Option<StripRegion>) -> Result<Cluster, EngineError> {
    Ok(match region {
        Some(r) => Cluster::singleton_in(Vertex::ORIGIN, r)?,
        None => Cluster::singleton(Vertex::ORIGIN),
    })
}

fn run_engine(
    engine: EngineKind,
    region: Option<StripRegion>,
    config: &SimConfig,
    rng: &mut RngStream,
) -> Result<HitResult, EngineError> {
    let cluster = start_cluster(region)?;
    match engine {
        EngineKind::Eden => hit_run(Eden::new(cluster), config, rng),
        EngineKind::Dijkstra => {
            let p = Dijkstra::new(cluster, rng);
            hit_run(p, config, rng)
        }
        EngineKind::Richardson => hit_run(Richardson::new(cluster, config.clock), config, rng),
    }
}

/// Eden growth until the target joins; ignores any strip setting.
pub fn run_eden(config: &SimConfig, rng: &mut RngStream) -> Result<HitResult, EngineError> {
    run_engine(EngineKind::Eden, None, config, rng)
}

/// Lazy-weight Dijkstra from the origin; ignores any strip setting.
pub fn run_dijkstra(config: &SimConfig, rng: &mut RngStream) -> Result<HitResult, EngineError> {
    run_engine(EngineKind::Dijkstra, None, config, rng)
}

/// Restart-all-clocks growth with `config.clock`; ignores any strip setting.
pub fn run_richardson(config: &SimConfig, rng: &mut RngStream) -> Result<HitResult, EngineError> {
    run_engine(EngineKind::Richardson, None, config, rng)
}

/// The configured engine, confined to the strip around origin -> target.
pub fn run_strip(config: &SimConfig, rng: &mut RngStream) -> Result<HitResult, EngineError> {
    let region = config
        .strip_region()?
        .ok_or_else(|| EngineError::InvalidConfig("strip run without strip parameters".into()))?;
    run_engine(config.engine, Some(region), config, rng)
}

/// Run whatever `config` describes: strip-restricted when a strip is set.
pub fn run(config: &SimConfig, rng: &mut RngStream) -> Result<HitResult, EngineError> {
    if config.strip.is_some() {
        run_strip(config, rng)
    } else {
        run_engine(config.engine, None, config, rng)
    }
}

/// Hit results for the targets of several scales from a single unrestricted
/// run. Growth never looks at the target, so entry `i` is exactly what
/// [`run`] returns for `n = ns[i]` on the same stream.
pub fn run_scales(
    config: &SimConfig,
    ns: &[u64],
    rng: &mut RngStream,
) -> Result<Vec<HitResult>, EngineError> {
    if config.strip.is_some() {
        return Err(EngineError::InvalidConfig(
            "multi-scale runs do not support strips".into(),
        ));
    }
    let cluster = Cluster::singleton(Vertex::ORIGIN);
    match config.engine {
        EngineKind::Eden => drive_scales(&mut Eden::new(cluster), config, ns, rng),
        EngineKind::Dijkstra => {
            let mut p = Dijkstra::new(cluster, rng);
            drive_scales(&mut p, config, ns, rng)
        }
        EngineKind::Richardson => {
            drive_scales(&mut Richardson::new(cluster, config.clock), config, ns, rng)
        }
    }
}

fn drive_scales<P: GrowthProcess>(
    process: &mut P,
    config: &SimConfig,
    ns: &[u64],
    rng: &mut RngStream,
) -> Result<Vec<HitResult>, EngineError> {
    let mut pending = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let c = SimConfig {
            n,
            ..config.clone()
        };
        pending.push((c.target()?, c.step_cap(), i));
    }
    let mut out: Vec<Option<HitResult>> = vec![None; ns.len()];
    let mut moments = MomentAccumulator::default();
    let mut steps = 0u64;
    while !pending.is_empty() {
        if let Some(&(_, cap, _)) = pending.iter().find(|p| steps >= p.1) {
            return Err(EngineError::MaxStepsExceeded { cap });
        }
        let s = process.step(rng)?;
        steps += 1;
        moments.push(s.y_count);
        if pending.iter().any(|p| p.0 == s.vertex) {
            let hit = HitResult {
                passage_time: process.elapsed(),
                hit_index: steps,
                mu: moments.mu(),
                sigma_sq: moments.sigma_sq(),
                trace: None,
            };
            for p in pending.iter().filter(|p| p.0 == s.vertex) {
                out[p.2] = Some(hit.clone());
            }
            pending.retain(|p| p.0 != s.vertex);
        }
    }
    Ok(out
        .into_iter()
        .map(|h| h.expect("every target hit"))
        .collect())
}

/// Unrestricted growth for exactly `steps` steps.
pub fn grow(
    engine: EngineKind,
    clock: ClockDistribution,
    steps: u64,
    retain: bool,
    rng: &mut RngStream,
) -> Result<HitResult, EngineError> {
    let cluster = Cluster::singleton(Vertex::ORIGIN);
    let stop = Stop::Steps(steps);
    match engine {
        EngineKind::Eden => drive(&mut Eden::new(cluster), stop, steps, retain, rng),
        EngineKind::Dijkstra => {
            let mut p = Dijkstra::new(cluster, rng);
            drive(&mut p, stop, steps, retain, rng)
        }
        EngineKind::Richardson => drive(
            &mut Richardson::new(cluster, clock),
            stop,
            steps,
            retain,
            rng,
        ),
    }
}
