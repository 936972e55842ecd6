//! Comparator optimizers sharing the evaluation contract and the budget
//! accounting: random search, grid search, and a conventional generational
//! GA that fully evaluates every individual (no fast screen).
//!
//! All three report honest counters — every evaluation performed is charged
//! to the returned budget — and draw their randomness from the same seed
//! derivation scheme as the hierarchical GA, so equal-seed comparisons are
//! reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::eval::{full_evaluate_or_sentinel, EvalBudget, FullScore, Objective};
use crate::ga::{
    frac_count, produce_offspring, BestCandidate, EliteArchive, GenerationRecord, Individual,
    PopScore,
};
use crate::par;
use crate::seeds;
use crate::space::{Genome, SearchSpace, DEFAULT_ENUMERATION_LIMIT};
use crate::Result;

/// Winner plus accounting of a memoryless baseline (random or grid search).
#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub best: BestCandidate,
    pub budget: EvalBudget,
}

/// Winner, per-generation history, and accounting of the traditional GA.
#[derive(Debug, Clone)]
pub struct TraditionalGaOutcome {
    pub best: BestCandidate,
    pub history: Vec<GenerationRecord>,
    pub budget: EvalBudget,
}

/// Largest number of full evaluations whose training cost fits under an
/// epoch-unit cap — the knob that puts baselines on an equal budget with a
/// measured run.
pub fn full_evals_within_budget(epoch_units_cap: u64, n_e: usize) -> u64 {
    epoch_units_cap / n_e as u64
}

/// Fully evaluates `budget_full_evals` i.i.d. uniform genomes (repeats
/// allowed) and returns the minimum RMSE, ties going to the lower genome.
/// The returned budget reports exactly `budget_full_evals` full
/// evaluations.
pub fn random_search<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    n_e: usize,
    budget_full_evals: usize,
    seed: u64,
) -> Result<BaselineOutcome> {
    if budget_full_evals == 0 {
        return Err(Error::invalid_config(
            "budget_full_evals",
            "must be at least 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(&[seed, seeds::SELECTION_TAG]));
    let genomes: Vec<Genome> = (0..budget_full_evals)
        .map(|_| space.random_genome(&mut rng))
        .collect();
    best_of_batch(space, objective, n_e, &genomes, seed)
}

/// Fully evaluates every genome whose low `stride_bits[i]` bits are zero in
/// each gene — a regular subgrid that stays exactly on the encodable
/// lattice. Stride 0 everywhere is exhaustive search.
pub fn grid_search<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    n_e: usize,
    stride_bits: &[u32],
    seed: u64,
) -> Result<BaselineOutcome> {
    if stride_bits.len() != space.dims().len() {
        return Err(Error::invalid_config(
            "stride_bits",
            format!(
                "expected one stride per dimension ({}), got {}",
                space.dims().len(),
                stride_bits.len()
            ),
        ));
    }
    let mut free_bits_total: u32 = 0;
    for (dim, &stride) in space.dims().iter().zip(stride_bits) {
        if stride > dim.bits {
            return Err(Error::invalid_config(
                "stride_bits",
                format!(
                    "stride {stride} exceeds the {} bits of dimension {}",
                    dim.bits, dim.name
                ),
            ));
        }
        free_bits_total += dim.bits - stride;
    }
    if u64::from(free_bits_total) >= 64 || (1u64 << free_bits_total) > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            total_bits: free_bits_total as usize,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }

    // Odometer over the free (high) bits of each gene; the low stride bits
    // stay zero. First dimension varies slowest, matching enumeration order.
    let widths: Vec<u32> = space.dims().iter().map(|d| d.bits).collect();
    let frees: Vec<u32> = widths
        .iter()
        .zip(stride_bits)
        .map(|(w, s)| w - s)
        .collect();
    let count = 1u64 << free_bits_total;
    let mut genomes = Vec::with_capacity(count as usize);
    let mut counters = vec![0u64; widths.len()];
    loop {
        let mut bits = Vec::with_capacity(space.total_bits());
        for ((&counter, &width), &stride) in counters.iter().zip(&widths).zip(stride_bits) {
            let gene = counter << stride;
            for b in (0..width).rev() {
                bits.push(gene >> b & 1 == 1);
            }
        }
        genomes.push(Genome::from_bits(bits));
        // Increment, last dimension fastest.
        let mut dim = widths.len();
        loop {
            if dim == 0 {
                break;
            }
            dim -= 1;
            if frees[dim] == 0 {
                continue;
            }
            counters[dim] += 1;
            if counters[dim] < 1u64 << frees[dim] {
                break;
            }
            counters[dim] = 0;
        }
        if counters.iter().all(|&c| c == 0) {
            break;
        }
    }
    debug_assert_eq!(genomes.len() as u64, count);
    best_of_batch(space, objective, n_e, &genomes, seed)
}

/// Full-evaluates a fixed genome list in parallel and picks the minimum
/// RMSE (ties to the lower genome).
fn best_of_batch<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    n_e: usize,
    genomes: &[Genome],
    seed: u64,
) -> Result<BaselineOutcome> {
    let scored: Vec<(FullScore, EvalBudget)> = par::map_indexed(genomes, |i, genome| {
        let assignment = space.decode(genome)?;
        let mut local = EvalBudget::default();
        let eval_seed = seeds::eval_seed(seed, 0, i as u64, seeds::FULL_EVAL_TAG, 0);
        let score = full_evaluate_or_sentinel(objective, &assignment, n_e, eval_seed, &mut local)?;
        Ok((score, local))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut budget = EvalBudget::default();
    for (_, local) in &scored {
        budget.merge(local);
    }
    let best_index = (0..genomes.len())
        .min_by(|&i, &j| {
            scored[i]
                .0
                .rmse
                .total_cmp(&scored[j].0.rmse)
                .then_with(|| genomes[i].cmp(&genomes[j]))
        })
        .expect("batch is nonempty");
    let genome = genomes[best_index].clone();
    let assignment = space.decode(&genome)?;
    Ok(BaselineOutcome {
        best: BestCandidate {
            genome,
            assignment,
            score: scored[best_index].0,
        },
        budget,
    })
}

/// Parameters of the conventional GA: the hierarchical config minus the
/// fidelity knobs (no p_f, no r_c — every individual is fully evaluated).
#[derive(Debug, Clone, PartialEq)]
pub struct TraditionalGaConfig {
    pub n_pop: usize,
    pub maxgen: usize,
    pub r_e: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub n_e: usize,
    pub k_repeats: usize,
    pub master_seed: u64,
}

impl TraditionalGaConfig {
    /// Config with the default rates (r_e = 0.1, p_c = 0.8, p_m = 0.2).
    pub fn new(n_pop: usize, maxgen: usize, n_e: usize, master_seed: u64) -> Self {
        TraditionalGaConfig {
            n_pop,
            maxgen,
            r_e: 0.1,
            p_c: 0.8,
            p_m: 0.2,
            n_e,
            k_repeats: 1,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pop < 2 {
            return Err(Error::invalid_config("n_pop", "must be at least 2"));
        }
        if self.maxgen < 1 {
            return Err(Error::invalid_config("maxgen", "must be at least 1"));
        }
        if !self.r_e.is_finite() || self.r_e <= 0.0 || self.r_e > 1.0 {
            return Err(Error::invalid_config("r_e", "must lie in (0, 1]"));
        }
        for (field, value) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid_config(field, "must lie in [0, 1]"));
            }
        }
        if self.n_e < 1 {
            return Err(Error::invalid_config("n_e", "must be at least 1"));
        }
        if self.k_repeats < 1 {
            return Err(Error::invalid_config("k_repeats", "must be at least 1"));
        }
        Ok(())
    }

    pub fn archive_capacity(&self) -> usize {
        frac_count(self.n_pop, self.r_e)
    }

    /// Exact epoch units a run of this config charges:
    /// k·n_e·n_pop·(maxgen + 1).
    pub fn exact_epoch_units(&self) -> u64 {
        (self.k_repeats * self.n_e * self.n_pop * (self.maxgen + 1)) as u64
    }
}

/// Closed-form training cost of a traditional GA run:
/// `(maxgen + 1) × n_pop × n_e` single-epoch units.
pub fn traditional_cost_in_epoch_units(cfg: &TraditionalGaConfig) -> f64 {
    (cfg.maxgen as f64 + 1.0) * cfg.n_pop as f64 * cfg.n_e as f64
}

/// The conventional generational GA: identical operators and archive to the
/// hierarchical search, but every individual of every generation gets a
/// full evaluation. Counters come out at ev_full == n_pop × (maxgen + 1)
/// (times k_repeats) and ev_fast == 0.
pub fn traditional_ga<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    cfg: &TraditionalGaConfig,
) -> Result<TraditionalGaOutcome> {
    cfg.validate()?;
    let mut sel_rng =
        ChaCha8Rng::seed_from_u64(seeds::derive(&[cfg.master_seed, seeds::SELECTION_TAG]));
    let mut budget = EvalBudget::default();
    let mut archive = EliteArchive::new(cfg.archive_capacity());
    let mut history = Vec::with_capacity(cfg.maxgen);

    let full_generation = |genomes: &[Genome],
                           gen: usize,
                           budget: &mut EvalBudget,
                           archive: &mut EliteArchive|
     -> Result<Vec<Individual>> {
        let scored: Vec<(FullScore, EvalBudget)> = par::map_indexed(genomes, |i, genome| {
            let assignment = space.decode(genome)?;
            let mut local = EvalBudget::default();
            let mut sum = 0.0;
            for repeat in 0..cfg.k_repeats {
                let seed = seeds::eval_seed(
                    cfg.master_seed,
                    gen as u64,
                    i as u64,
                    seeds::FULL_EVAL_TAG,
                    repeat as u64,
                );
                sum +=
                    full_evaluate_or_sentinel(objective, &assignment, cfg.n_e, seed, &mut local)?
                        .rmse;
            }
            Ok((
                FullScore {
                    rmse: sum / cfg.k_repeats as f64,
                },
                local,
            ))
        })
        .into_iter()
        .collect::<Result<_>>()?;

        for (_, local) in &scored {
            budget.merge(local);
        }
        // Archive offers in (RMSE, genome) ascending order for reproducible
        // tie handling.
        let mut order: Vec<usize> = (0..genomes.len()).collect();
        order.sort_by(|&i, &j| {
            scored[i]
                .0
                .rmse
                .total_cmp(&scored[j].0.rmse)
                .then_with(|| genomes[i].cmp(&genomes[j]))
        });
        for i in order {
            archive.update(genomes[i].clone(), scored[i].0);
        }
        Ok(genomes
            .iter()
            .zip(&scored)
            .map(|(g, (s, _))| Individual {
                genome: g.clone(),
                score: PopScore::Full(*s),
            })
            .collect())
    };

    let initial: Vec<Genome> = (0..cfg.n_pop)
        .map(|_| space.random_genome(&mut sel_rng))
        .collect();
    let mut population = full_generation(&initial, 0, &mut budget, &mut archive)?;

    for gen in 1..=cfg.maxgen {
        let offspring = produce_offspring(
            &archive,
            &population,
            cfg.p_c,
            cfg.p_m,
            cfg.n_pop,
            &mut sel_rng,
        )?;
        population = full_generation(&offspring, gen, &mut budget, &mut archive)?;
        history.push(GenerationRecord {
            gen,
            best_rmse: archive.best_rmse().expect("archive nonempty"),
            ev_fast: budget.ev_fast,
            ev_full: budget.ev_full,
            epoch_units: budget.epoch_units,
            // Every offspring received a full evaluation.
            promoted: offspring,
        });
    }

    let (genome, score) = archive.best().cloned().expect("archive nonempty");
    let assignment = space.decode(&genome)?;
    Ok(TraditionalGaOutcome {
        best: BestCandidate {
            genome,
            assignment,
            score,
        },
        history,
        budget,
    })
}
