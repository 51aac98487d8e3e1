//! Lion optimization over continuous positions in `[0,1]^N`.
//!
//! Lions live either in prides or as nomads. Each generation every pride
//! hunts: the group's mean position acts as prey, the fitter third of the
//! group encircles it directly while the wings flank through the opposed
//! position, and any hunter that improves drives the prey further away.
//! Mating blends pride females with the best nomad male, then the whole
//! population is sorted and the weakest nomads are culled back to size.
//!
//! Positions binarise at a threshold for fitness evaluation, so the search
//! is a continuous relaxation of the activation problem.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::ControlVector;
use crate::error::{CoreError, Result};
use crate::framework::{Candidate, EvalContext, Genome, Incumbent, Optimizer, Population};
use crate::rng::RngStream;

/// Lion population shape and variation rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LionParams {
    pub population: usize,
    /// Share of the population roaming as nomads, in (0, 1).
    pub nomad_fraction: f64,
    pub prides: usize,
    /// Share of pride members that are female, in (0, 1).
    pub female_fraction: f64,
    /// Probability that a pride female mates in a generation.
    pub mating_prob: f64,
    /// Per-coordinate reset probability applied to offspring.
    pub mutation_rate: f64,
    /// Coordinates at or above this value activate the sensor.
    pub binarize_threshold: f64,
}

impl Default for LionParams {
    fn default() -> Self {
        Self {
            population: 40,
            nomad_fraction: 0.2,
            prides: 4,
            female_fraction: 0.8,
            mating_prob: 0.3,
            mutation_rate: 0.05,
            binarize_threshold: 0.5,
        }
    }
}

impl LionParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(CoreError::InvalidArgument(format!(
                "lion population must be at least 4, got {}",
                self.population
            )));
        }
        if self.prides == 0 {
            return Err(CoreError::InvalidArgument("need at least one pride".into()));
        }
        for (name, v) in [
            ("nomad_fraction", self.nomad_fraction),
            ("female_fraction", self.female_fraction),
            ("binarize_threshold", self.binarize_threshold),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        for (name, v) in [
            ("mating_prob", self.mating_prob),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    fn nomad_count(&self) -> usize {
        ((self.population as f64 * self.nomad_fraction).round() as usize)
            .clamp(1, self.population - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sex {
    Male,
    Female,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Resident of the pride with this index.
    Pride(usize),
    Nomad,
}

/// One lion: a continuous position plus its binarised activation and
/// fitness, which are kept in sync with the position.
#[derive(Clone, Debug)]
pub struct Lion {
    pub coords: Vec<f64>,
    pub role: Role,
    pub sex: Sex,
    pub bits: ControlVector,
    pub fitness: crate::coverage::FitnessReport,
}

/// Threshold binarisation: bit `j` is 1 iff `coords[j] >= threshold`.
pub fn binarize(coords: &[f64], threshold: f64) -> Result<ControlVector> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if let Some(c) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(CoreError::InvalidArgument(format!(
            "coordinate {c} outside [0, 1]"
        )));
    }
    ControlVector::from_bits(coords.iter().map(|&c| c >= threshold).collect())
}

/// Prey flight with the random factor supplied by the caller:
/// `prey + u * pi * (prey - hunter)` per component, clamped into `[0,1]`.
pub fn prey_escape_with(prey: &[f64], hunter: &[f64], pi: f64, u: f64) -> Result<Vec<f64>> {
    if prey.len() != hunter.len() {
        return Err(CoreError::DimensionMismatch {
            expected: prey.len(),
            actual: hunter.len(),
        });
    }
    if pi < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "improvement fraction must be non-negative, got {pi}"
        )));
    }
    Ok(prey
        .iter()
        .zip(hunter)
        .map(|(p, h)| (p + u * pi * (p - h)).clamp(0.0, 1.0))
        .collect())
}

/// Prey flight away from an improving hunter. One random factor is drawn
/// for the whole vector.
pub fn prey_escape(prey: &[f64], hunter: &[f64], pi: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    let u = rng.gen::<f64>();
    prey_escape_with(prey, hunter, pi, u)
}

/// Wing-hunter move with the draw supplied: sample between the prey and
/// the position opposed through it (`2 * prey - hunter`), clamped.
pub fn encircle_wing_with(hunter: f64, prey: f64, u: f64) -> f64 {
    let opposed = 2.0 * prey - hunter;
    let (lo, hi) = if opposed < prey {
        (opposed, prey)
    } else {
        (prey, opposed)
    };
    (lo + u * (hi - lo)).clamp(0.0, 1.0)
}

pub fn encircle_wing(hunter: f64, prey: f64, rng: &mut RngStream) -> f64 {
    let u = rng.gen::<f64>();
    encircle_wing_with(hunter, prey, u)
}

/// Center-hunter move with the draw supplied: sample between hunter and
/// prey.
pub fn encircle_center_with(hunter: f64, prey: f64, u: f64) -> f64 {
    let (lo, hi) = if hunter < prey {
        (hunter, prey)
    } else {
        (prey, hunter)
    };
    lo + u * (hi - lo)
}

pub fn encircle_center(hunter: f64, prey: f64, rng: &mut RngStream) -> f64 {
    let u = rng.gen::<f64>();
    encircle_center_with(hunter, prey, u)
}

/// One cooperative hunt. Hunters are partitioned by fitness rank: the best
/// third encircles the prey directly, the rest flank it. Every hunter
/// moves; a hunter whose fitness improves scares the prey into flight
/// scaled by its relative improvement.
pub fn hunt(
    hunters: &mut [Lion],
    prey: &mut Vec<f64>,
    threshold: f64,
    ctx: &EvalContext,
    rng: &mut RngStream,
) -> Result<()> {
    if hunters.is_empty() {
        return Err(CoreError::InvalidArgument("hunt needs hunters".into()));
    }
    let mut ranked: Vec<usize> = (0..hunters.len()).collect();
    ranked.sort_by(|&a, &b| {
        hunters[b]
            .fitness
            .combined
            .total_cmp(&hunters[a].fitness.combined)
    });
    let center_count = hunters.len().div_ceil(3);
    let mut is_center = vec![false; hunters.len()];
    for &i in ranked.iter().take(center_count) {
        is_center[i] = true;
    }

    for i in 0..hunters.len() {
        let moved: Vec<f64> = hunters[i]
            .coords
            .iter()
            .zip(prey.iter())
            .map(|(&h, &p)| {
                if is_center[i] {
                    encircle_center(h, p, rng)
                } else {
                    encircle_wing(h, p, rng)
                }
            })
            .collect();
        let bits = binarize(&moved, threshold)?;
        let report = ctx.evaluate(&bits)?;
        let old = hunters[i].fitness.combined;
        if report.combined > old {
            let pi = if old > 0.0 {
                (report.combined - old) / old
            } else {
                1.0
            };
            *prey = prey_escape(prey, &moved, pi, rng)?;
        }
        hunters[i].coords = moved;
        hunters[i].bits = bits;
        hunters[i].fitness = report;
    }
    Ok(())
}

/// Mate pride females with the best nomad male, sort everything by
/// fitness, and cull the weakest nomads back to the configured size.
pub fn mate_sort_eliminate(
    lions: &mut Vec<Lion>,
    params: &LionParams,
    ctx: &EvalContext,
    rng: &mut RngStream,
) -> Result<()> {
    if lions.len() < 4 {
        return Err(CoreError::InvalidArgument(format!(
            "population of {} is too small to mate",
            lions.len()
        )));
    }

    let sire = lions
        .iter()
        .filter(|l| l.role == Role::Nomad && l.sex == Sex::Male)
        .max_by(|a, b| a.fitness.combined.total_cmp(&b.fitness.combined))
        .or_else(|| {
            lions
                .iter()
                .filter(|l| l.role == Role::Nomad)
                .max_by(|a, b| a.fitness.combined.total_cmp(&b.fitness.combined))
        })
        .cloned();

    let mut offspring_coords: Vec<Vec<f64>> = Vec::new();
    if let Some(sire) = sire {
        for lion in lions.iter() {
            let in_pride = matches!(lion.role, Role::Pride(_));
            if !(in_pride && lion.sex == Sex::Female) {
                continue;
            }
            if !rng.gen_bool(params.mating_prob) {
                continue;
            }
            let blend = rng.gen::<f64>();
            for share in [blend, 1.0 - blend] {
                let mut child: Vec<f64> = lion
                    .coords
                    .iter()
                    .zip(&sire.coords)
                    .map(|(f, m)| share * f + (1.0 - share) * m)
                    .collect();
                for c in child.iter_mut() {
                    if rng.gen_bool(params.mutation_rate) {
                        *c = rng.gen::<f64>();
                    }
                }
                offspring_coords.push(child);
            }
        }
    }

    let offspring_bits = offspring_coords
        .iter()
        .map(|c| binarize(c, params.binarize_threshold))
        .collect::<Result<Vec<_>>>()?;
    let reports = ctx.evaluate_batch(&offspring_bits)?;
    for (k, ((coords, bits), report)) in offspring_coords
        .into_iter()
        .zip(offspring_bits)
        .zip(reports)
        .enumerate()
    {
        lions.push(Lion {
            coords,
            role: Role::Nomad,
            sex: if k % 2 == 0 { Sex::Female } else { Sex::Male },
            bits,
            fitness: report,
        });
    }

    lions.sort_by(|a, b| b.fitness.combined.total_cmp(&a.fitness.combined));

    let mut to_remove = lions.len().saturating_sub(params.population);
    if to_remove > 0 {
        let mut keep = vec![true; lions.len()];
        for i in (0..lions.len()).rev() {
            if to_remove == 0 {
                break;
            }
            if lions[i].role == Role::Nomad {
                keep[i] = false;
                to_remove -= 1;
            }
        }
        if to_remove > 0 {
            return Err(CoreError::InvalidState(
                "not enough nomads to restore the population size".into(),
            ));
        }
        let mut it = keep.iter();
        lions.retain(|_| *it.next().unwrap());
    }
    Ok(())
}

/// Lion optimizer over binarised continuous positions.
pub struct LionOptimizer {
    params: LionParams,
    lions: Vec<Lion>,
    best: Incumbent,
    generation: u32,
}

impl LionOptimizer {
    pub fn new(params: LionParams, ctx: &EvalContext, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let n_bits = ctx.n_bits();
        let nomads = params.nomad_count();
        let residents = params.population - nomads;

        // Round-robin pride assignment, then per-pride female quotas.
        let mut roles = Vec::with_capacity(params.population);
        let mut sexes = Vec::with_capacity(params.population);
        let mut pride_sizes = vec![0usize; params.prides];
        for i in 0..residents {
            let pride = i % params.prides;
            roles.push(Role::Pride(pride));
            pride_sizes[pride] += 1;
        }
        let mut female_quota: Vec<usize> = pride_sizes
            .iter()
            .map(|&n| (n as f64 * params.female_fraction).round() as usize)
            .collect();
        for role in roles.iter() {
            let Role::Pride(p) = role else { unreachable!() };
            if female_quota[*p] > 0 {
                female_quota[*p] -= 1;
                sexes.push(Sex::Female);
            } else {
                sexes.push(Sex::Male);
            }
        }
        for k in 0..nomads {
            roles.push(Role::Nomad);
            sexes.push(if k % 2 == 0 { Sex::Male } else { Sex::Female });
        }

        let coords: Vec<Vec<f64>> = (0..params.population)
            .map(|_| (0..n_bits).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let bits = coords
            .iter()
            .map(|c| binarize(c, params.binarize_threshold))
            .collect::<Result<Vec<_>>>()?;
        let reports = ctx.evaluate_batch(&bits)?;

        let lions: Vec<Lion> = coords
            .into_iter()
            .zip(bits)
            .zip(reports)
            .zip(roles.into_iter().zip(sexes))
            .map(|(((coords, bits), fitness), (role, sex))| Lion {
                coords,
                role,
                sex,
                bits,
                fitness,
            })
            .collect();

        let best_lion = lions
            .iter()
            .max_by(|a, b| a.fitness.combined.total_cmp(&b.fitness.combined))
            .expect("population is non-empty");
        let best = Incumbent {
            bits: best_lion.bits.clone(),
            report: best_lion.fitness,
        };
        Ok(Self {
            params,
            lions,
            best,
            generation: 0,
        })
    }

    pub fn params(&self) -> &LionParams {
        &self.params
    }

    pub fn lions(&self) -> &[Lion] {
        &self.lions
    }
}

impl Optimizer for LionOptimizer {
    fn name(&self) -> &'static str {
        "lo"
    }

    fn population_len(&self) -> usize {
        self.lions.len()
    }

    fn generation(&self) -> u32 {
        self.generation
    }

    fn best(&self) -> &Incumbent {
        &self.best
    }

    fn step(&mut self, ctx: &EvalContext, rng: &mut RngStream) -> Result<()> {
        for pride in 0..self.params.prides {
            let idx: Vec<usize> = (0..self.lions.len())
                .filter(|&i| self.lions[i].role == Role::Pride(pride))
                .collect();
            if idx.is_empty() {
                continue;
            }
            let mut group: Vec<Lion> = idx.iter().map(|&i| self.lions[i].clone()).collect();
            let dim = group[0].coords.len();
            let mut prey: Vec<f64> = (0..dim)
                .map(|d| group.iter().map(|l| l.coords[d]).sum::<f64>() / group.len() as f64)
                .collect();
            hunt(
                &mut group,
                &mut prey,
                self.params.binarize_threshold,
                ctx,
                rng,
            )?;
            for (k, &i) in idx.iter().enumerate() {
                self.lions[i] = group[k].clone();
            }
        }

        mate_sort_eliminate(&mut self.lions, &self.params, ctx, rng)?;

        for lion in &self.lions {
            self.best.offer(&lion.bits, lion.fitness);
        }
        self.generation += 1;
        Ok(())
    }

    fn snapshot_population(&self) -> Population {
        let members = self
            .lions
            .iter()
            .map(|l| Candidate {
                genome: Genome::Reals(l.coords.clone()),
                fitness: Some(l.fitness),
            })
            .collect();
        Population::new(members, self.generation).expect("lion population is never empty")
    }
}
