//! Shared population-iteration machinery.
//!
//! Every optimizer in this crate advances a population one generation at a
//! time behind the same [`Optimizer`] trait, draws randomness from an
//! [`RngStream`], evaluates activations through an [`EvalContext`] and is
//! driven by [`run`], which owns termination and convergence tracing.
//!
//! Two contracts hold across all implementations: the population size never
//! changes, and the best solution found so far is never lost (elitism), so
//! traces are monotone by construction rather than by tendency.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::coverage::{ControlVector, CoverageModel, FitnessReport};
use crate::error::{CoreError, Result};
use crate::rng::RngStream;
use rand::Rng;

/// A candidate genome: activation bits for discrete optimizers, a point in
/// `[0,1]^N` for continuous ones (binarised before evaluation).
#[derive(Clone, Debug, PartialEq)]
pub enum Genome {
    Bits(ControlVector),
    Reals(Vec<f64>),
}

impl Genome {
    pub fn dimension(&self) -> usize {
        match self {
            Genome::Bits(cv) => cv.len(),
            Genome::Reals(v) => v.len(),
        }
    }
}

/// One population member with its cached fitness, when evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub genome: Genome,
    pub fitness: Option<FitnessReport>,
}

impl Candidate {
    pub fn from_bits(bits: ControlVector) -> Self {
        Self {
            genome: Genome::Bits(bits),
            fitness: None,
        }
    }

    pub fn evaluated(bits: ControlVector, report: FitnessReport) -> Self {
        Self {
            genome: Genome::Bits(bits),
            fitness: Some(report),
        }
    }

    pub fn combined(&self) -> Option<f64> {
        self.fitness.map(|f| f.combined)
    }
}

/// Ordered, fixed-size set of candidates at one generation.
#[derive(Clone, Debug)]
pub struct Population {
    pub members: Vec<Candidate>,
    pub generation: u32,
}

impl Population {
    pub fn new(members: Vec<Candidate>, generation: u32) -> Result<Self> {
        if members.is_empty() {
            return Err(CoreError::InvalidArgument(
                "population must not be empty".into(),
            ));
        }
        let dim = members[0].genome.dimension();
        if let Some(m) = members.iter().find(|m| m.genome.dimension() != dim) {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: m.genome.dimension(),
            });
        }
        Ok(Self {
            members,
            generation,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.members[0].genome.dimension()
    }

    /// Index of the member with the highest combined fitness (first on
    /// ties). Errors if any member is unevaluated.
    pub fn best_index(&self) -> Result<usize> {
        let mut best = None;
        for (i, m) in self.members.iter().enumerate() {
            let f = m.combined().ok_or_else(|| {
                CoreError::InvalidState(format!("member {i} has no cached fitness"))
            })?;
            best = match best {
                None => Some((i, f)),
                Some((_, bf)) if f > bf => Some((i, f)),
                keep => keep,
            };
        }
        Ok(best.expect("population is never empty").0)
    }
}

/// Best activation found so far, with its fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Incumbent {
    pub bits: ControlVector,
    pub report: FitnessReport,
}

impl Incumbent {
    /// Replace `self` if `other` strictly improves the combined fitness.
    pub fn offer(&mut self, bits: &ControlVector, report: FitnessReport) {
        if report.combined > self.report.combined {
            self.bits = bits.clone();
            self.report = report;
        }
    }
}

/// Evaluation context for one run: the coverage model plus a fitness cache
/// keyed by activation bits (evaluation is pure, so entries never expire)
/// and a running record of the best coverage rate seen by any evaluation.
pub struct EvalContext {
    model: CoverageModel,
    cache: Mutex<HashMap<ControlVector, FitnessReport>>,
    best_f1_seen: Mutex<f64>,
}

impl EvalContext {
    pub fn new(model: CoverageModel) -> Self {
        Self {
            model,
            cache: Mutex::new(HashMap::new()),
            best_f1_seen: Mutex::new(0.0),
        }
    }

    pub fn model(&self) -> &CoverageModel {
        &self.model
    }

    pub fn n_bits(&self) -> usize {
        self.model.n_sensors()
    }

    /// Highest `f1` among all activations evaluated through this context.
    pub fn best_f1_seen(&self) -> f64 {
        *self.best_f1_seen.lock().unwrap()
    }

    pub fn evaluate(&self, cv: &ControlVector) -> Result<FitnessReport> {
        if let Some(hit) = self.cache.lock().unwrap().get(cv) {
            return Ok(*hit);
        }
        let report = self.model.evaluate(cv)?;
        self.cache.lock().unwrap().insert(cv.clone(), report);
        let mut best = self.best_f1_seen.lock().unwrap();
        if report.f1 > *best {
            *best = report.f1;
        }
        Ok(report)
    }

    /// Evaluate a batch in parallel, preserving input order so callers stay
    /// deterministic regardless of thread count.
    pub fn evaluate_batch(&self, cvs: &[ControlVector]) -> Result<Vec<FitnessReport>> {
        cvs.par_iter().map(|cv| self.evaluate(cv)).collect()
    }

    /// Fill in missing fitness for every bit-genome member.
    pub fn ensure_evaluated(&self, pop: &mut Population) -> Result<()> {
        let pending: Vec<(usize, ControlVector)> = pop
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.fitness.is_none())
            .map(|(i, m)| match &m.genome {
                Genome::Bits(cv) => Ok((i, cv.clone())),
                Genome::Reals(_) => Err(CoreError::InvalidState(
                    "real-vector genomes must be binarised by their optimizer".into(),
                )),
            })
            .collect::<Result<_>>()?;
        let bits: Vec<ControlVector> = pending.iter().map(|(_, cv)| cv.clone()).collect();
        let reports = self.evaluate_batch(&bits)?;
        for ((i, _), report) in pending.into_iter().zip(reports) {
            pop.members[i].fitness = Some(report);
        }
        Ok(())
    }
}

/// When a run stops: after `max_generations`, or as soon as the best
/// combined fitness reaches `target_combined`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Termination {
    pub max_generations: u32,
    pub target_combined: Option<f64>,
}

impl Termination {
    pub fn new(max_generations: u32) -> Result<Self> {
        if max_generations == 0 {
            return Err(CoreError::InvalidArgument(
                "max_generations must be at least 1".into(),
            ));
        }
        Ok(Self {
            max_generations,
            target_combined: None,
        })
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target_combined = Some(target);
        self
    }
}

/// One row of a convergence trace.
///
/// `best_combined` and `best_active` describe the incumbent (the solution a
/// run would return); `best_f1` is the highest coverage rate any evaluated
/// activation has achieved so far, so both series are monotone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub generation: u32,
    pub best_combined: f64,
    pub best_f1: f64,
    pub best_active: usize,
    pub wallclock_ms: u64,
}

/// Best-so-far progress per generation.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceTrace {
    records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Record at an exact generation, if present.
    pub fn at_generation(&self, generation: u32) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.generation == generation)
    }

    fn push(&mut self, record: TraceRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.generation <= last.generation {
                return Err(CoreError::InvalidState(format!(
                    "trace generations must increase: {} after {}",
                    record.generation, last.generation
                )));
            }
            if record.best_combined < last.best_combined {
                return Err(CoreError::InvalidState(format!(
                    "best-so-far regressed: {} after {}",
                    record.best_combined, last.best_combined
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    /// CSV export: fixed header, one row per generation, '.' decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_combined,best_f1,best_active,wallclock_ms\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.generation, r.best_combined, r.best_f1, r.best_active, r.wallclock_ms
            ));
        }
        out
    }
}

/// Wallclock source for trace records. When disabled it reports zero, so
/// artifacts are byte-reproducible run to run.
#[derive(Clone, Copy, Debug)]
pub struct RunClock {
    start: Instant,
    enabled: bool,
}

impl RunClock {
    pub fn new(enabled: bool) -> Self {
        Self {
            start: Instant::now(),
            enabled,
        }
    }

    pub fn elapsed_ms(&self) -> u64 {
        if self.enabled {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }
}

/// Uniform state-advance interface all optimizers implement.
pub trait Optimizer {
    /// Short algorithm tag used in traces and comparison tables.
    fn name(&self) -> &'static str;

    /// Current population size; constant across steps.
    fn population_len(&self) -> usize;

    /// Generations advanced so far.
    fn generation(&self) -> u32;

    /// Best solution found so far. Never regresses.
    fn best(&self) -> &Incumbent;

    /// Advance one generation.
    fn step(&mut self, ctx: &EvalContext, rng: &mut RngStream) -> Result<()>;

    /// Owned copy of the current population for inspection and tests.
    fn snapshot_population(&self) -> Population;
}

/// Drive an optimizer for up to `budget` generations, appending one record
/// per generation to `trace`. Returns true when a fitness target stopped
/// the run early.
pub fn run_phase(
    opt: &mut dyn Optimizer,
    budget: u32,
    termination: &Termination,
    ctx: &EvalContext,
    rng: &mut RngStream,
    clock: &RunClock,
    trace: &mut ConvergenceTrace,
) -> Result<bool> {
    let size_before = opt.population_len();
    for _ in 0..budget {
        opt.step(ctx, rng)?;
        if opt.population_len() != size_before {
            return Err(CoreError::InvalidState(format!(
                "{} changed population size {} -> {}",
                opt.name(),
                size_before,
                opt.population_len()
            )));
        }
        let best = opt.best();
        trace.push(TraceRecord {
            generation: opt.generation(),
            best_combined: best.report.combined,
            best_f1: ctx.best_f1_seen(),
            best_active: best.report.active_count,
            wallclock_ms: clock.elapsed_ms(),
        })?;
        if let Some(target) = termination.target_combined {
            if best.report.combined >= target {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Run an optimizer to termination and return the best solution with its
/// convergence trace. Identical `(seed, config)` pairs produce identical
/// traces.
pub fn run(
    opt: &mut dyn Optimizer,
    termination: &Termination,
    ctx: &EvalContext,
    rng: &mut RngStream,
    record_wallclock: bool,
) -> Result<(Incumbent, ConvergenceTrace)> {
    let clock = RunClock::new(record_wallclock);
    let mut trace = ConvergenceTrace::default();
    run_phase(
        opt,
        termination.max_generations,
        termination,
        ctx,
        rng,
        &clock,
        &mut trace,
    )?;
    Ok((opt.best().clone(), trace))
}

/// Activation-share ladder used to seed initial populations: member `k`
/// of `n` targets an expected active fraction evenly spaced across
/// `[INIT_SHARE_LO, INIT_SHARE_HI]`, so the starting population samples
/// the whole coverage/energy trade-off instead of clustering at half the
/// nodes.
pub const INIT_SHARE_LO: f64 = 0.15;
pub const INIT_SHARE_HI: f64 = 0.85;

/// Target activation share for ladder position `k` of `n`.
pub fn activation_ladder(k: usize, n: usize) -> f64 {
    if n <= 1 {
        return 0.5 * (INIT_SHARE_LO + INIT_SHARE_HI);
    }
    INIT_SHARE_LO + (INIT_SHARE_HI - INIT_SHARE_LO) * k as f64 / (n - 1) as f64
}

/// Skew a uniform draw `u` so that `P(result >= 0.5)` equals `share`,
/// keeping the result spread over `[0, 1]`.
pub fn share_skewed(u: f64, share: f64) -> f64 {
    let s = share.clamp(1e-6, 1.0 - 1e-6);
    let g = 0.5f64.ln() / (1.0 - s).ln();
    u.powf(g)
}

/// Roulette-wheel index selection: probability `weights[i] / sum`.
/// All-zero (or all non-positive) weights fall back to a uniform pick.
pub fn roulette_pick(weights: &[f64], rng: &mut RngStream) -> usize {
    debug_assert!(!weights.is_empty());
    debug_assert!(weights.iter().all(|w| *w >= 0.0 && w.is_finite()));
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return rng.gen_range(0..weights.len());
    }
    let mut ticket = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        ticket -= w;
        if ticket < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Elitism repair: if every member is worse than the incumbent, overwrite
/// the worst member with a copy of it.
pub fn reinstate_best(pop: &mut Population, incumbent: &Incumbent) -> Result<()> {
    let mut worst = 0usize;
    let mut worst_f = f64::INFINITY;
    let mut best_f = f64::NEG_INFINITY;
    for (i, m) in pop.members.iter().enumerate() {
        let f = m
            .combined()
            .ok_or_else(|| CoreError::InvalidState("unevaluated member in elitism pass".into()))?;
        if f < worst_f {
            worst_f = f;
            worst = i;
        }
        best_f = best_f.max(f);
    }
    if best_f < incumbent.report.combined {
        pop.members[worst] = Candidate::evaluated(incumbent.bits.clone(), incumbent.report);
    }
    Ok(())
}
