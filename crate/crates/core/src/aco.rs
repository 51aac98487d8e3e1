//! Binary ant colony over a two-branch-per-bit digraph.
//!
//! Each activation bit is a fork with a 0-branch and a 1-branch carrying
//! trail intensity. Ants build whole activation vectors by sampling every
//! fork from the trail/visibility transition rule; after each generation
//! one elite offspring (chosen fitness-proportionally) deposits trail along
//! its path while all trails decay, bounded above and below (Max-Min rule).
//!
//! The module also provides the combined pipeline that runs the adaptive GA
//! first and seeds the trail table from its final population.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::ControlVector;
use crate::error::{CoreError, Result};
use crate::framework::{
    reinstate_best, roulette_pick, run_phase, Candidate, ConvergenceTrace, EvalContext, Genome,
    Incumbent, Optimizer, Population, RunClock, Termination,
};
use crate::ga::{AdaptiveGa, AdaptiveGaParams};
use crate::rng::RngStream;

/// How much trail the elite path receives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepositRule {
    /// Deposit the elite's fitness value (default: higher fitness, more
    /// trail, matching a maximisation objective).
    #[default]
    Proportional,
    /// Deposit the reciprocal of the elite's fitness, the convention for
    /// cost minimisation. Kept selectable for comparison.
    Reciprocal,
}

/// Ant colony parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoParams {
    /// Trail exponent, `>= 1`.
    pub alpha: f64,
    /// Visibility exponent, `>= 1`.
    pub beta: f64,
    /// Trail persistence per generation, in `(0, 1)`.
    pub rho: f64,
    /// Ants (solutions constructed) per generation.
    pub n_ants: usize,
    /// Initial trail on every branch.
    pub initial_trail: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub deposit: DepositRule,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 6.0,
            rho: 0.8,
            n_ants: 40,
            initial_trail: 10.0,
            tau_min: 0.01,
            tau_max: 10.0,
            deposit: DepositRule::Proportional,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1.0 {
            return Err(CoreError::InvalidArgument(format!(
                "alpha must be >= 1, got {}",
                self.alpha
            )));
        }
        if self.beta < 1.0 {
            return Err(CoreError::InvalidArgument(format!(
                "beta must be >= 1, got {}",
                self.beta
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if self.n_ants == 0 {
            return Err(CoreError::InvalidArgument("need at least one ant".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_max) {
            return Err(CoreError::InvalidArgument(format!(
                "need 0 < tau_min <= tau_max, got ({}, {})",
                self.tau_min, self.tau_max
            )));
        }
        if !(self.initial_trail > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "initial trail must be positive, got {}",
                self.initial_trail
            )));
        }
        Ok(())
    }
}

/// Trail intensities: row 0 is the bit-value-0 branch, row 1 the
/// bit-value-1 branch. Entries always lie inside `[tau_min, tau_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PheromoneTable {
    rows: [Vec<f64>; 2],
    tau_min: f64,
    tau_max: f64,
}

impl PheromoneTable {
    pub fn n_bits(&self) -> usize {
        self.rows[0].len()
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// Trail on the branch for bit value `branch` at bit `j`.
    pub fn trail(&self, branch: bool, j: usize) -> f64 {
        self.rows[branch as usize][j]
    }

    fn set_trail(&mut self, branch: bool, j: usize, value: f64) {
        self.rows[branch as usize][j] = value.clamp(self.tau_min, self.tau_max);
    }
}

/// Uniform trail table: every branch starts at the same intensity, clamped
/// into the Max-Min bounds.
pub fn init_pheromones(n_bits: usize, p: &AcoParams) -> Result<PheromoneTable> {
    if n_bits == 0 {
        return Err(CoreError::InvalidArgument(
            "pheromone table needs at least one bit".into(),
        ));
    }
    p.validate()?;
    let c = p.initial_trail.clamp(p.tau_min, p.tau_max);
    Ok(PheromoneTable {
        rows: [vec![c; n_bits], vec![c; n_bits]],
        tau_min: p.tau_min,
        tau_max: p.tau_max,
    })
}

/// Branch probabilities at one fork: `p_b` proportional to
/// `tau_b^alpha * eta_b^beta`, normalised over both branches.
pub fn transition_probability(
    tau0: f64,
    tau1: f64,
    eta0: f64,
    eta1: f64,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    let w0 = tau0.powf(alpha) * eta0.powf(beta);
    let w1 = tau1.powf(alpha) * eta1.powf(beta);
    let total = w0 + w1;
    if !(total > 0.0) || !total.is_finite() {
        return Err(CoreError::InvalidState(format!(
            "degenerate branch weights ({w0}, {w1})"
        )));
    }
    Ok((w0 / total, w1 / total))
}

/// Sample one activation vector from the trail table with uniform
/// visibility (`eta = 1` on both branches).
pub fn construct_solution(
    ph: &PheromoneTable,
    p: &AcoParams,
    rng: &mut RngStream,
) -> Result<ControlVector> {
    construct_solution_with_visibility(ph, None, p, rng)
}

/// As [`construct_solution`], with an optional per-bit `(eta0, eta1)`
/// visibility table. Hook for coverage-gain heuristics; the default colony
/// runs on pure trail guidance.
pub fn construct_solution_with_visibility(
    ph: &PheromoneTable,
    visibility: Option<&[(f64, f64)]>,
    p: &AcoParams,
    rng: &mut RngStream,
) -> Result<ControlVector> {
    if let Some(eta) = visibility {
        if eta.len() != ph.n_bits() {
            return Err(CoreError::DimensionMismatch {
                expected: ph.n_bits(),
                actual: eta.len(),
            });
        }
    }
    let bits = (0..ph.n_bits())
        .map(|j| {
            let (eta0, eta1) = visibility.map_or((1.0, 1.0), |v| v[j]);
            let (_, p1) = transition_probability(
                ph.trail(false, j),
                ph.trail(true, j),
                eta0,
                eta1,
                p.alpha,
                p.beta,
            )?;
            Ok(rng.gen::<f64>() < p1)
        })
        .collect::<Result<Vec<bool>>>()?;
    ControlVector::from_bits(bits)
}

/// Decay every trail by `rho` and deposit along the elite path, clamping
/// everything back into the Max-Min bounds.
pub fn update_pheromones(
    ph: &PheromoneTable,
    elite: &ControlVector,
    elite_fitness: f64,
    p: &AcoParams,
) -> Result<PheromoneTable> {
    if elite.len() != ph.n_bits() {
        return Err(CoreError::DimensionMismatch {
            expected: ph.n_bits(),
            actual: elite.len(),
        });
    }
    if !(elite_fitness > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "elite fitness must be positive, got {elite_fitness}"
        )));
    }
    let delta = match p.deposit {
        DepositRule::Proportional => elite_fitness,
        DepositRule::Reciprocal => 1.0 / elite_fitness,
    };
    let mut next = ph.clone();
    for j in 0..ph.n_bits() {
        for branch in [false, true] {
            let decayed = p.rho * ph.trail(branch, j);
            let deposited = if elite.bit(j) == branch { delta } else { 0.0 };
            next.set_trail(branch, j, decayed + deposited);
        }
    }
    Ok(next)
}

/// Decay-only trail update, used when no positive-fitness elite exists.
pub fn decay_pheromones(ph: &PheromoneTable, p: &AcoParams) -> PheromoneTable {
    let mut next = ph.clone();
    for j in 0..ph.n_bits() {
        for branch in [false, true] {
            next.set_trail(branch, j, p.rho * ph.trail(branch, j));
        }
    }
    next
}

/// Pick the offspring that deposits trail: member `i` with probability
/// `f(i) / sum f`. All-zero fitness falls back to a uniform pick.
pub fn select_elite(offspring: &Population, rng: &mut RngStream) -> Result<Candidate> {
    let weights: Vec<f64> = offspring
        .members
        .iter()
        .map(|m| {
            m.combined()
                .ok_or_else(|| CoreError::InvalidState("unevaluated offspring".into()))
        })
        .collect::<Result<_>>()?;
    Ok(offspring.members[roulette_pick(&weights, rng)].clone())
}

/// Initialise trails from the fitness-weighted bit frequencies of an
/// evaluated population: branch (b, j) gets the share of total fitness
/// carried by members whose bit j equals b, rescaled into the Max-Min
/// bounds.
pub fn seed_from_population(pop: &Population, p: &AcoParams) -> Result<PheromoneTable> {
    p.validate()?;
    if pop.is_empty() {
        return Err(CoreError::InvalidArgument("empty population".into()));
    }
    let n_bits = pop.dimension();
    let mut weight1 = vec![0.0f64; n_bits];
    let mut total = 0.0f64;
    for m in &pop.members {
        let f = m
            .combined()
            .ok_or_else(|| CoreError::InvalidState("unevaluated member".into()))?;
        let bits = match &m.genome {
            Genome::Bits(cv) => cv,
            Genome::Reals(_) => {
                return Err(CoreError::InvalidArgument(
                    "trail seeding needs bit genomes".into(),
                ))
            }
        };
        total += f;
        for j in 0..n_bits {
            if bits.bit(j) {
                weight1[j] += f;
            }
        }
    }
    let mut table = init_pheromones(n_bits, p)?;
    let span = p.tau_max - p.tau_min;
    for j in 0..n_bits {
        // Zero total fitness carries no signal; both branches sit mid-band.
        let share1 = if total > 0.0 { weight1[j] / total } else { 0.5 };
        table.set_trail(true, j, p.tau_min + span * share1);
        table.set_trail(false, j, p.tau_min + span * (1.0 - share1));
    }
    Ok(table)
}

/// Binary ant colony optimizer.
pub struct BinaryAntColony {
    params: AcoParams,
    table: PheromoneTable,
    pop: Population,
    best: Incumbent,
}

impl BinaryAntColony {
    /// Fresh colony: uniform trails, first generation constructed from
    /// them.
    pub fn new(params: AcoParams, ctx: &EvalContext, rng: &mut RngStream) -> Result<Self> {
        let table = init_pheromones(ctx.n_bits(), &params)?;
        let bits: Vec<ControlVector> = (0..params.n_ants)
            .map(|_| construct_solution(&table, &params, rng))
            .collect::<Result<_>>()?;
        let reports = ctx.evaluate_batch(&bits)?;
        let members = bits
            .into_iter()
            .zip(reports)
            .map(|(cv, rep)| Candidate::evaluated(cv, rep))
            .collect();
        let pop = Population::new(members, 0)?;
        let idx = pop.best_index()?;
        let best = match &pop.members[idx].genome {
            Genome::Bits(cv) => Incumbent {
                bits: cv.clone(),
                report: pop.members[idx].fitness.unwrap(),
            },
            Genome::Reals(_) => unreachable!("colony constructs bit genomes"),
        };
        Ok(Self {
            params,
            table,
            pop,
            best,
        })
    }

    /// Colony seeded from an existing population's bit statistics. The
    /// population itself carries over as the starting generation, and the
    /// incumbent carries across the hand-off.
    pub fn from_population(
        params: AcoParams,
        mut pop: Population,
        incumbent: Option<Incumbent>,
        ctx: &EvalContext,
    ) -> Result<Self> {
        params.validate()?;
        ctx.ensure_evaluated(&mut pop)?;
        if pop.dimension() != ctx.n_bits() {
            return Err(CoreError::DimensionMismatch {
                expected: ctx.n_bits(),
                actual: pop.dimension(),
            });
        }
        let table = seed_from_population(&pop, &params)?;
        let idx = pop.best_index()?;
        let pop_best = match &pop.members[idx].genome {
            Genome::Bits(cv) => Incumbent {
                bits: cv.clone(),
                report: pop.members[idx].fitness.unwrap(),
            },
            Genome::Reals(_) => {
                return Err(CoreError::InvalidArgument(
                    "colony populations use bit genomes".into(),
                ))
            }
        };
        let best = match incumbent {
            Some(inc) if inc.report.combined >= pop_best.report.combined => inc,
            _ => pop_best,
        };
        Ok(Self {
            params,
            table,
            pop,
            best,
        })
    }

    pub fn params(&self) -> &AcoParams {
        &self.params
    }

    pub fn table(&self) -> &PheromoneTable {
        &self.table
    }
}

impl Optimizer for BinaryAntColony {
    fn name(&self) -> &'static str {
        "baca"
    }

    fn population_len(&self) -> usize {
        self.pop.len()
    }

    fn generation(&self) -> u32 {
        self.pop.generation
    }

    fn best(&self) -> &Incumbent {
        &self.best
    }

    fn step(&mut self, ctx: &EvalContext, rng: &mut RngStream) -> Result<()> {
        // Ants construct against an immutable snapshot of the trails.
        let bits: Vec<ControlVector> = (0..self.params.n_ants)
            .map(|_| construct_solution(&self.table, &self.params, rng))
            .collect::<Result<_>>()?;
        let reports = ctx.evaluate_batch(&bits)?;
        let members: Vec<Candidate> = bits
            .into_iter()
            .zip(reports)
            .map(|(cv, rep)| Candidate::evaluated(cv, rep))
            .collect();
        let mut next = Population::new(members, self.pop.generation + 1)?;

        let elite = select_elite(&next, rng)?;
        let elite_fit = elite.fitness.unwrap();
        if elite_fit.combined > 0.0 {
            if let Genome::Bits(path) = &elite.genome {
                self.table = update_pheromones(&self.table, path, elite_fit.combined, &self.params)?;
            }
        } else {
            self.table = decay_pheromones(&self.table, &self.params);
        }

        reinstate_best(&mut next, &self.best)?;
        for m in &next.members {
            if let (Genome::Bits(b), Some(rep)) = (&m.genome, m.fitness) {
                self.best.offer(b, rep);
            }
        }
        self.pop = next;
        Ok(())
    }

    fn snapshot_population(&self) -> Population {
        self.pop.clone()
    }
}

/// Phase lengths for the combined GA-then-colony pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IgaBacaSchedule {
    pub ga_generations: u32,
    pub baca_generations: u32,
    pub outer_loops: u32,
}

impl Default for IgaBacaSchedule {
    fn default() -> Self {
        Self {
            ga_generations: 0,
            baca_generations: 0,
            outer_loops: 1,
        }
    }
}

impl IgaBacaSchedule {
    /// Split a generation budget into equal GA and colony halves (the GA
    /// half takes the odd generation).
    pub fn split_budget(total: u32) -> Result<Self> {
        if total < 2 {
            return Err(CoreError::InvalidArgument(
                "combined pipeline needs at least 2 generations".into(),
            ));
        }
        Ok(Self {
            ga_generations: total.div_ceil(2),
            baca_generations: total / 2,
            outer_loops: 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.ga_generations == 0 || self.baca_generations == 0 {
            return Err(CoreError::InvalidArgument(
                "both pipeline phases need at least one generation".into(),
            ));
        }
        if self.outer_loops == 0 {
            return Err(CoreError::InvalidArgument(
                "pipeline needs at least one outer loop".into(),
            ));
        }
        Ok(())
    }
}

/// Run the adaptive GA, seed the colony trails from its final population,
/// run the colony, and repeat for the configured number of outer loops.
/// The trace spans all phases with continuous generation numbering and a
/// single monotone best-so-far series.
#[allow(clippy::too_many_arguments)]
pub fn iga_baca_run(
    ga_params: AdaptiveGaParams,
    aco_params: AcoParams,
    schedule: IgaBacaSchedule,
    pop_size: usize,
    target_combined: Option<f64>,
    ctx: &EvalContext,
    rng: &mut RngStream,
    record_wallclock: bool,
) -> Result<(Incumbent, ConvergenceTrace)> {
    schedule.validate()?;
    let clock = RunClock::new(record_wallclock);
    let mut trace = ConvergenceTrace::default();
    let mut termination = Termination::new(schedule.ga_generations)?;
    termination.target_combined = target_combined;

    // Generation numbering carries in the population across phase
    // hand-offs, so the merged trace counts continuously.
    let mut carried: Option<(Population, Incumbent)> = None;
    for _ in 0..schedule.outer_loops {
        let mut ga = match carried.take() {
            None => AdaptiveGa::new(ga_params, pop_size, ctx, rng)?,
            Some((pop, inc)) => AdaptiveGa::from_population(ga_params, pop, Some(inc), ctx)?,
        };
        let stopped = run_phase(
            &mut ga,
            schedule.ga_generations,
            &termination,
            ctx,
            rng,
            &clock,
            &mut trace,
        )?;
        let ga_best = ga.best().clone();
        if stopped {
            return Ok((ga_best, trace));
        }

        let mut colony =
            BinaryAntColony::from_population(aco_params, ga.into_population(), Some(ga_best), ctx)?;
        let stopped = run_phase(
            &mut colony,
            schedule.baca_generations,
            &termination,
            ctx,
            rng,
            &clock,
            &mut trace,
        )?;
        let colony_best = colony.best().clone();
        if stopped {
            return Ok((colony_best, trace));
        }
        carried = Some((colony.snapshot_population(), colony_best));
    }
    let (_, incumbent) = carried.expect("at least one outer loop ran");
    Ok((incumbent, trace))
}
