//! Binary particle swarm optimization.
//!
//! Particles carry continuous positions in `[0,1]^N` and velocities;
//! velocity blends inertia with attraction toward the particle's own best
//! and the swarm's global best, positions integrate the velocity, and a
//! transfer step binarises positions for fitness evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::ControlVector;
use crate::error::{CoreError, Result};
use crate::framework::{Candidate, EvalContext, Genome, Incumbent, Optimizer, Population};
use crate::rng::RngStream;

/// How a continuous position becomes an activation vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinarizeMode {
    /// Deterministic threshold at 0.5 (default).
    #[default]
    Threshold,
    /// Bit `j` is 1 with probability `x[j]`.
    Stochastic,
}

/// Swarm parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    /// Inertia weight.
    pub w: f64,
    /// Cognitive confidence factor (pull toward the particle's own best).
    pub c1: f64,
    /// Social confidence factor (pull toward the global best).
    pub c2: f64,
    /// Componentwise velocity clamp.
    pub v_max: f64,
    /// Swarm size.
    pub swarm: usize,
    pub binarize: BinarizeMode,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            w: 0.7,
            c1: 1.5,
            c2: 1.5,
            v_max: 0.5,
            swarm: 40,
            binarize: BinarizeMode::Threshold,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.w < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "inertia weight must be non-negative, got {}",
                self.w
            )));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "confidence factors must be non-negative, got ({}, {})",
                self.c1, self.c2
            )));
        }
        if !(self.v_max > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "v_max must be positive, got {}",
                self.v_max
            )));
        }
        if self.swarm == 0 {
            return Err(CoreError::InvalidArgument("swarm must not be empty".into()));
        }
        Ok(())
    }
}

fn check_same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(CoreError::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

/// Velocity update with the two random factors supplied by the caller:
/// `w*v + c1*r1*(x_best - x) + c2*r2*(x_gbest - x)`, clamped to
/// `[-v_max, v_max]` per component.
pub fn update_velocity_with(
    v: &[f64],
    x: &[f64],
    x_best: &[f64],
    x_gbest: &[f64],
    p: &PsoParams,
    r1: f64,
    r2: f64,
) -> Result<Vec<f64>> {
    check_same_len(v.len(), x.len())?;
    check_same_len(v.len(), x_best.len())?;
    check_same_len(v.len(), x_gbest.len())?;
    Ok((0..v.len())
        .map(|d| {
            let vel = p.w * v[d] + p.c1 * r1 * (x_best[d] - x[d]) + p.c2 * r2 * (x_gbest[d] - x[d]);
            vel.clamp(-p.v_max, p.v_max)
        })
        .collect())
}

/// Velocity update with fresh `r1, r2 ~ U[0,1)` drawn per call.
pub fn update_velocity(
    v: &[f64],
    x: &[f64],
    x_best: &[f64],
    x_gbest: &[f64],
    p: &PsoParams,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let r1 = rng.gen::<f64>();
    let r2 = rng.gen::<f64>();
    update_velocity_with(v, x, x_best, x_gbest, p, r1, r2)
}

/// Position integration: `x + v`, clamped into `[0,1]` per component.
pub fn update_position(x: &[f64], v_new: &[f64]) -> Result<Vec<f64>> {
    check_same_len(x.len(), v_new.len())?;
    Ok(x.iter()
        .zip(v_new)
        .map(|(x, v)| (x + v).clamp(0.0, 1.0))
        .collect())
}

/// Transfer a position to activation bits.
pub fn binarize_particle(
    x: &[f64],
    mode: BinarizeMode,
    rng: &mut RngStream,
) -> Result<ControlVector> {
    if let Some(c) = x.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(CoreError::InvalidArgument(format!(
            "position component {c} outside [0, 1]"
        )));
    }
    let bits = x
        .iter()
        .map(|&c| match mode {
            BinarizeMode::Threshold => c >= 0.5,
            BinarizeMode::Stochastic => rng.gen::<f64>() < c,
        })
        .collect();
    ControlVector::from_bits(bits)
}

#[derive(Clone, Debug)]
struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_fitness: crate::coverage::FitnessReport,
    fitness: crate::coverage::FitnessReport,
}

/// Binary PSO optimizer.
pub struct BinaryPso {
    params: PsoParams,
    particles: Vec<Particle>,
    gbest_x: Vec<f64>,
    best: Incumbent,
    generation: u32,
}

impl BinaryPso {
    pub fn new(params: PsoParams, ctx: &EvalContext, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let n = ctx.n_bits();
        let positions: Vec<Vec<f64>> = (0..params.swarm)
            .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let bits = positions
            .iter()
            .map(|x| binarize_particle(x, params.binarize, rng))
            .collect::<Result<Vec<_>>>()?;
        let reports = ctx.evaluate_batch(&bits)?;
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(&reports)
            .map(|(x, &report)| Particle {
                v: vec![0.0; x.len()],
                best_x: x.clone(),
                best_fitness: report,
                fitness: report,
                x,
            })
            .collect();
        let best_idx = (0..particles.len())
            .max_by(|&a, &b| {
                particles[a]
                    .fitness
                    .combined
                    .total_cmp(&particles[b].fitness.combined)
            })
            .expect("swarm is non-empty");
        let best = Incumbent {
            bits: bits[best_idx].clone(),
            report: reports[best_idx],
        };
        Ok(Self {
            gbest_x: particles[best_idx].x.clone(),
            params,
            particles,
            best,
            generation: 0,
        })
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }
}

impl Optimizer for BinaryPso {
    fn name(&self) -> &'static str {
        "pso"
    }

    fn population_len(&self) -> usize {
        self.particles.len()
    }

    fn generation(&self) -> u32 {
        self.generation
    }

    fn best(&self) -> &Incumbent {
        &self.best
    }

    fn step(&mut self, ctx: &EvalContext, rng: &mut RngStream) -> Result<()> {
        // Synchronous update: every particle sees the generation-start
        // global best.
        let gbest = self.gbest_x.clone();
        let mut moved_bits = Vec::with_capacity(self.particles.len());
        for particle in self.particles.iter_mut() {
            let v = update_velocity(
                &particle.v,
                &particle.x,
                &particle.best_x,
                &gbest,
                &self.params,
                rng,
            )?;
            let x = update_position(&particle.x, &v)?;
            moved_bits.push(binarize_particle(&x, self.params.binarize, rng)?);
            particle.v = v;
            particle.x = x;
        }
        let reports = ctx.evaluate_batch(&moved_bits)?;
        for ((particle, bits), report) in self
            .particles
            .iter_mut()
            .zip(&moved_bits)
            .zip(reports)
        {
            particle.fitness = report;
            if report.combined > particle.best_fitness.combined {
                particle.best_fitness = report;
                particle.best_x = particle.x.clone();
            }
            if report.combined > self.best.report.combined {
                self.best = Incumbent {
                    bits: bits.clone(),
                    report,
                };
                self.gbest_x = particle.x.clone();
            }
        }
        self.generation += 1;
        Ok(())
    }

    fn snapshot_population(&self) -> Population {
        let members = self
            .particles
            .iter()
            .map(|p| Candidate {
                genome: Genome::Reals(p.x.clone()),
                fitness: Some(p.fitness),
            })
            .collect();
        Population::new(members, self.generation).expect("swarm is never empty")
    }
}
