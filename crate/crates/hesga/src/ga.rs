//! Hierarchical-evaluation genetic algorithm.
//!
//! The search keeps a small elite archive of fully evaluated genomes next to
//! the working population. Each generation mates one parent drawn from the
//! archive (by final RMSE) with one drawn from the population (by its own
//! score kind), fast-screens all offspring, promotes only the top slice of
//! the screen to full evaluation, and lets those promotions compete for
//! archive membership. Full training effort therefore concentrates on the
//! candidates the cheap screen singles out, which is where the cost savings
//! over a conventional generational GA come from.
//!
//! Reproducibility: selection decisions come from one sequential stream
//! seeded off the master seed, and every evaluation's seed is derived from
//! (master seed, generation, individual index, fidelity, repeat) before
//! dispatch — so results are bit-identical however the evaluation batches
//! are scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::eval::{
    fast_evaluate_or_sentinel, full_evaluate_or_sentinel, EvalBudget, FastScore, FullScore,
    Objective,
};
use crate::par;
use crate::seeds;
use crate::space::{Assignment, Genome, SearchSpace};
use crate::Result;

/// Run parameters. Rates default to the reference setting
/// (r_e = r_c = 0.1, p_c = 0.8, p_m = 0.2, p_f = 0.1, k_repeats = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct HesgaConfig {
    /// Population size (≥ 2).
    pub n_pop: usize,
    /// Number of generations after initialization (≥ 1).
    pub maxgen: usize,
    /// Elite-archive proportion; capacity = ceil(n_pop × r_e).
    pub r_e: f64,
    /// Candidate proportion; promotions per generation = ceil(n_pop × r_c).
    pub r_c: f64,
    /// Crossover probability per mating.
    pub p_c: f64,
    /// Mutation probability per child (one uniformly chosen bit).
    pub p_m: f64,
    /// Fast-evaluation epoch fraction (0 < p_f ≤ 0.5).
    pub p_f: f64,
    /// Training epochs per full evaluation (≥ 2).
    pub n_e: usize,
    /// Full evaluations averaged per individual (≥ 1; each repeat counts).
    pub k_repeats: usize,
    /// Root of every random decision in the run.
    pub master_seed: u64,
}

impl HesgaConfig {
    /// Config with the default rates.
    pub fn new(n_pop: usize, maxgen: usize, n_e: usize, master_seed: u64) -> Self {
        HesgaConfig {
            n_pop,
            maxgen,
            r_e: 0.1,
            r_c: 0.1,
            p_c: 0.8,
            p_m: 0.2,
            p_f: 0.1,
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
        for (field, value) in [("r_e", self.r_e), ("r_c", self.r_c)] {
            if !value.is_finite() || value <= 0.0 || value > 1.0 {
                return Err(Error::invalid_config(field, "must lie in (0, 1]"));
            }
        }
        for (field, value) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid_config(field, "must lie in [0, 1]"));
            }
        }
        if !self.p_f.is_finite() || self.p_f <= 0.0 || self.p_f > 0.5 {
            return Err(Error::invalid_config("p_f", "must lie in (0, 0.5]"));
        }
        if self.n_e < 2 {
            return Err(Error::invalid_config(
                "n_e",
                "must be at least 2 (the fast fidelity needs two epochs)",
            ));
        }
        if self.k_repeats < 1 {
            return Err(Error::invalid_config("k_repeats", "must be at least 1"));
        }
        Ok(())
    }

    /// Elite-archive capacity, ceil(n_pop × r_e).
    pub fn archive_capacity(&self) -> usize {
        frac_count(self.n_pop, self.r_e)
    }

    /// Promotions per generation, ceil(n_pop × r_c).
    pub fn candidate_count(&self) -> usize {
        frac_count(self.n_pop, self.r_c)
    }

    /// Exact epoch units a run of this config charges: the counter sum
    /// k·n_e·(n_pop + maxgen·ceil(n_pop·r_c)) plus the fast-screen term
    /// maxgen·n_pop·max(2, round(p_f·n_e)). Agrees with
    /// [`cost_in_epoch_units`] whenever that formula's roundings are exact.
    pub fn exact_epoch_units(&self) -> u64 {
        let full = (self.k_repeats * self.n_e * (self.n_pop + self.maxgen * self.candidate_count()))
            as u64;
        let fast =
            (self.maxgen * self.n_pop * crate::eval::fast_epochs(self.p_f, self.n_e)) as u64;
        full + fast
    }
}

/// ceil(n × r), snapping products that land within 1e−9 of an integer so
/// decimal rates like 0.1 × 30 do not round up an extra count.
pub fn frac_count(n: usize, r: f64) -> usize {
    let product = n as f64 * r;
    let snapped = if (product - product.round()).abs() < 1e-9 {
        product.round()
    } else {
        product.ceil()
    };
    (snapped as usize).max(1)
}

/// Predicted total single-epoch training units of one run:
/// `[(p_f + r_c) × maxgen + 1] × n_pop × n_e`.
///
/// This is the idealized closed form; the measured `epoch_units` matches it
/// exactly when `round(p_f × n_e) ≥ 2` and `n_pop × r_c` is an integer, and
/// otherwise differs only by the flooring and ceiling in those two places.
pub fn cost_in_epoch_units(cfg: &HesgaConfig) -> f64 {
    ((cfg.p_f + cfg.r_c) * cfg.maxgen as f64 + 1.0) * cfg.n_pop as f64 * cfg.n_e as f64
}

/// Capacity-bounded set of the best fully evaluated genomes seen so far.
#[derive(Debug, Clone)]
pub struct EliteArchive {
    capacity: usize,
    entries: Vec<(Genome, FullScore)>,
}

impl EliteArchive {
    pub fn new(capacity: usize) -> Self {
        debug_assert!(capacity >= 1);
        EliteArchive {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Entries sorted ascending by RMSE (ties keep insertion order).
    pub fn entries(&self) -> &[(Genome, FullScore)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&(Genome, FullScore)> {
        self.entries.first()
    }

    pub fn best_rmse(&self) -> Option<f64> {
        self.entries.first().map(|(_, s)| s.rmse)
    }

    /// Offers a fully evaluated genome. Duplicates are rejected; once the
    /// archive is full, only a strict improvement over the current worst
    /// displaces it. Returns whether the genome entered.
    pub fn update(&mut self, genome: Genome, score: FullScore) -> bool {
        if self.entries.iter().any(|(g, _)| *g == genome) {
            return false;
        }
        let full = self.entries.len() == self.capacity;
        if full && score.rmse >= self.entries[self.capacity - 1].1.rmse {
            return false;
        }
        if full {
            self.entries.pop();
        }
        let at = self.entries.partition_point(|(_, s)| s.rmse <= score.rmse);
        self.entries.insert(at, (genome, score));
        true
    }
}

/// Score attached to a population member: full at generation 0 (the whole
/// initial population is fully evaluated), fast from then on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopScore {
    Full(FullScore),
    Fast(FastScore),
}

/// One population member.
#[derive(Debug, Clone)]
pub struct Individual {
    pub genome: Genome,
    pub score: PopScore,
}

/// Which end of the score scale wins a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Better {
    Lower,
    Higher,
}

/// Linear-rank roulette selection: the best score gets weight n, the worst
/// weight 1, and tied scores share the average of the weights their ranks
/// span. Rank weighting keeps sentinel scores from swamping the wheel the
/// way raw 1/RMSE or raw ΔF would.
pub fn roulette_select<R: RngCore>(scores: &[f64], better: Better, rng: &mut R) -> Result<usize> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::EmptySelection);
    }
    let mut order: Vec<usize> = (0..n).collect();
    match better {
        Better::Lower => order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j])),
        Better::Higher => order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i])),
    }
    // Weight by rank, averaging across runs of equal scores.
    let mut weights = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Sorted positions start..end carry base weights n−start .. n−end+1.
        let avg = (n - start + n - end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            weights[idx] = avg;
        }
        start = end;
    }
    let total = (n * (n + 1)) as f64 / 2.0;
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return Ok(i);
        }
        u -= w;
    }
    Ok(n - 1) // float accumulation landed on the upper edge
}

/// Splices two equal-length genomes at `cut` (bits kept from the left
/// parent), returning both children.
pub fn single_point_crossover(a: &Genome, b: &Genome, cut: usize) -> Result<(Genome, Genome)> {
    if a.len() != b.len() {
        return Err(Error::Encoding {
            expected: a.len(),
            got: b.len(),
        });
    }
    if cut < 1 || cut >= a.len() {
        return Err(Error::PositionOutOfRange {
            position: cut,
            len: a.len(),
        });
    }
    let splice = |left: &Genome, right: &Genome| {
        let mut bits = left.bits()[..cut].to_vec();
        bits.extend_from_slice(&right.bits()[cut..]);
        Genome::from_bits(bits)
    };
    Ok((splice(a, b), splice(b, a)))
}

/// Flips exactly the bit at 1-based `position`.
pub fn mutate(g: &Genome, position: usize) -> Result<Genome> {
    if position < 1 || position > g.len() {
        return Err(Error::PositionOutOfRange {
            position,
            len: g.len(),
        });
    }
    let mut bits = g.bits().to_vec();
    bits[position - 1] = !bits[position - 1];
    Ok(Genome::from_bits(bits))
}

/// Scores and direction the population contributes to parent-B selection:
/// RMSE ascending while it carries full scores (generation 0), early
/// improvement descending once it carries fast scores.
fn population_selection(population: &[Individual]) -> (Vec<f64>, Better) {
    let direction = match population.first().map(|i| &i.score) {
        Some(PopScore::Fast(_)) => Better::Higher,
        _ => Better::Lower,
    };
    let scores = population
        .iter()
        .map(|i| match i.score {
            PopScore::Full(s) => s.rmse,
            PopScore::Fast(s) => s.delta,
        })
        .collect();
    (scores, direction)
}

/// Breeds the next generation: ceil(n_pop / 2) matings, each pairing an
/// archive parent (roulette by RMSE) with a population parent (roulette by
/// the population's own score kind), crossover with probability `p_c`,
/// then an independent one-bit mutation per child with probability `p_m`.
/// The child list is truncated to exactly `n_pop`.
pub fn produce_offspring<R: RngCore>(
    archive: &EliteArchive,
    population: &[Individual],
    p_c: f64,
    p_m: f64,
    n_pop: usize,
    rng: &mut R,
) -> Result<Vec<Genome>> {
    let archive_scores: Vec<f64> = archive.entries().iter().map(|(_, s)| s.rmse).collect();
    let (pop_scores, pop_better) = population_selection(population);
    let pairs = n_pop.div_ceil(2);
    let mut children = Vec::with_capacity(pairs * 2);
    for _ in 0..pairs {
        let a = &archive.entries()[roulette_select(&archive_scores, Better::Lower, rng)?].0;
        let b = &population[roulette_select(&pop_scores, pop_better, rng)?].genome;
        let (mut c1, mut c2) = if a.len() >= 2 && rng.random::<f64>() < p_c {
            let cut = rng.random_range(1..a.len());
            single_point_crossover(a, b, cut)?
        } else {
            (a.clone(), b.clone())
        };
        if rng.random::<f64>() < p_m {
            c1 = mutate(&c1, rng.random_range(1..=c1.len()))?;
        }
        if rng.random::<f64>() < p_m {
            c2 = mutate(&c2, rng.random_range(1..=c2.len()))?;
        }
        children.push(c1);
        children.push(c2);
    }
    children.truncate(n_pop);
    Ok(children)
}

/// Everything a run accumulates.
#[derive(Debug, Clone)]
pub struct RunState {
    pub gen: usize,
    pub population: Vec<Individual>,
    pub archive: EliteArchive,
    pub budget: EvalBudget,
    pub history: Vec<GenerationRecord>,
    sel_rng: ChaCha8Rng,
}

/// Snapshot taken at the end of one generation.
#[derive(Debug, Clone)]
pub struct GenerationRecord {
    pub gen: usize,
    /// Archive minimum after this generation's promotions.
    pub best_rmse: f64,
    pub ev_fast: u64,
    pub ev_full: u64,
    pub epoch_units: u64,
    /// Candidates promoted to full evaluation, in fast-screen rank order.
    pub promoted: Vec<Genome>,
}

/// Winner of a run.
#[derive(Debug, Clone)]
pub struct BestCandidate {
    pub genome: Genome,
    pub assignment: Assignment,
    pub score: FullScore,
}

/// Final result of a run.
#[derive(Debug, Clone)]
pub struct HesgaOutcome {
    pub best: BestCandidate,
    pub history: Vec<GenerationRecord>,
    pub budget: EvalBudget,
}

/// Driver owning the run state; see the module docs for the loop shape.
pub struct Hesga<'a, O: Objective + ?Sized> {
    cfg: HesgaConfig,
    space: &'a SearchSpace,
    objective: &'a O,
    state: RunState,
}

impl<'a, O: Objective + ?Sized> Hesga<'a, O> {
    pub fn new(cfg: HesgaConfig, space: &'a SearchSpace, objective: &'a O) -> Result<Self> {
        cfg.validate()?;
        let sel_rng =
            ChaCha8Rng::seed_from_u64(seeds::derive(&[cfg.master_seed, seeds::SELECTION_TAG]));
        let state = RunState {
            gen: 0,
            population: Vec::new(),
            archive: EliteArchive::new(cfg.archive_capacity()),
            budget: EvalBudget::default(),
            history: Vec::new(),
            sel_rng,
        };
        Ok(Hesga {
            cfg,
            space,
            objective,
            state,
        })
    }

    pub fn config(&self) -> &HesgaConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    /// Draws the initial population and fully evaluates all of it
    /// (ev_full += n_pop), seeding the archive with the best distinct
    /// genomes. Call exactly once, before stepping.
    pub fn initialize(&mut self) -> Result<()> {
        if !self.state.population.is_empty() {
            return Err(Error::invalid_config("state", "already initialized"));
        }
        let genomes: Vec<Genome> = (0..self.cfg.n_pop)
            .map(|_| self.space.random_genome(&mut self.state.sel_rng))
            .collect();
        let jobs: Vec<(usize, Genome)> = genomes.into_iter().enumerate().collect();
        let scored = self.full_scores(&jobs, 0)?;
        for (_, local) in &scored {
            self.state.budget.merge(local);
        }
        self.state.population = jobs
            .iter()
            .zip(&scored)
            .map(|((_, g), (s, _))| Individual {
                genome: g.clone(),
                score: PopScore::Full(*s),
            })
            .collect();
        self.update_archive(&jobs, &scored);
        Ok(())
    }

    /// Runs one generation: breed, fast-screen every offspring
    /// (ev_fast += n_pop), promote the top ceil(n_pop × r_c) of the screen
    /// to full evaluation (ev_full += that count), update the archive, and
    /// replace the population with the offspring carrying fast scores.
    pub fn step_generation(&mut self) -> Result<GenerationRecord> {
        if self.state.population.is_empty() {
            return Err(Error::invalid_config("state", "initialize before stepping"));
        }
        if self.state.gen >= self.cfg.maxgen {
            return Err(Error::invalid_config("state", "maxgen already reached"));
        }
        let next_gen = self.state.gen + 1;
        let offspring = produce_offspring(
            &self.state.archive,
            &self.state.population,
            self.cfg.p_c,
            self.cfg.p_m,
            self.cfg.n_pop,
            &mut self.state.sel_rng,
        )?;

        let fast = self.fast_scores(&offspring, next_gen)?;
        for (_, local) in &fast {
            self.state.budget.merge(local);
        }

        // Fast-screen ranking: ΔF descending, ties by genome ascending.
        let mut rank: Vec<usize> = (0..offspring.len()).collect();
        rank.sort_by(|&i, &j| {
            fast[j]
                .0
                .delta
                .total_cmp(&fast[i].0.delta)
                .then_with(|| offspring[i].cmp(&offspring[j]))
        });
        let promoted: Vec<(usize, Genome)> = rank[..self.cfg.candidate_count()]
            .iter()
            .map(|&i| (i, offspring[i].clone()))
            .collect();

        let full = self.full_scores(&promoted, next_gen)?;
        for (_, local) in &full {
            self.state.budget.merge(local);
        }
        self.update_archive(&promoted, &full);

        self.state.population = offspring
            .iter()
            .zip(&fast)
            .map(|(g, (s, _))| Individual {
                genome: g.clone(),
                score: PopScore::Fast(*s),
            })
            .collect();
        self.state.gen = next_gen;

        let record = GenerationRecord {
            gen: next_gen,
            best_rmse: self.state.archive.best_rmse().expect("archive nonempty"),
            ev_fast: self.state.budget.ev_fast,
            ev_full: self.state.budget.ev_full,
            epoch_units: self.state.budget.epoch_units,
            promoted: promoted.into_iter().map(|(_, g)| g).collect(),
        };
        self.state.history.push(record.clone());
        Ok(record)
    }

    /// Initializes, steps `maxgen` generations, and reports the archive
    /// minimum as the winner.
    pub fn run(mut self) -> Result<HesgaOutcome> {
        self.initialize()?;
        for _ in 0..self.cfg.maxgen {
            self.step_generation()?;
        }
        let (genome, score) = self
            .state
            .archive
            .best()
            .cloned()
            .expect("archive nonempty after initialization");
        let assignment = self.space.decode(&genome)?;
        Ok(HesgaOutcome {
            best: BestCandidate {
                genome,
                assignment,
                score,
            },
            history: self.state.history,
            budget: self.state.budget,
        })
    }

    /// Full-evaluates `jobs` (population index, genome) for generation
    /// `gen`, averaging `k_repeats` seeded repeats per genome. Runs through
    /// the data-parallel kernel; per-worker budgets come back for merging in
    /// index order.
    fn full_scores(
        &self,
        jobs: &[(usize, Genome)],
        gen: usize,
    ) -> Result<Vec<(FullScore, EvalBudget)>> {
        let cfg = &self.cfg;
        let space = self.space;
        let obj = self.objective;
        par::map_indexed(jobs, |_, (individual, genome)| {
            let assignment = space.decode(genome)?;
            let mut local = EvalBudget::default();
            let mut sum = 0.0;
            for repeat in 0..cfg.k_repeats {
                let seed = seeds::eval_seed(
                    cfg.master_seed,
                    gen as u64,
                    *individual as u64,
                    seeds::FULL_EVAL_TAG,
                    repeat as u64,
                );
                sum += full_evaluate_or_sentinel(obj, &assignment, cfg.n_e, seed, &mut local)?.rmse;
            }
            Ok((
                FullScore {
                    rmse: sum / cfg.k_repeats as f64,
                },
                local,
            ))
        })
        .into_iter()
        .collect()
    }

    /// Fast-evaluates a whole offspring population for generation `gen`.
    fn fast_scores(&self, offspring: &[Genome], gen: usize) -> Result<Vec<(FastScore, EvalBudget)>> {
        let cfg = &self.cfg;
        let space = self.space;
        let obj = self.objective;
        par::map_indexed(offspring, |individual, genome| {
            let assignment = space.decode(genome)?;
            let mut local = EvalBudget::default();
            let seed = seeds::eval_seed(
                cfg.master_seed,
                gen as u64,
                individual as u64,
                seeds::FAST_EVAL_TAG,
                0,
            );
            let score =
                fast_evaluate_or_sentinel(obj, &assignment, cfg.n_e, cfg.p_f, seed, &mut local)?;
            Ok((score, local))
        })
        .into_iter()
        .collect()
    }

    /// Offers scored genomes to the archive in (RMSE, genome) ascending
    /// order, the canonical order that makes tie handling reproducible.
    fn update_archive(&mut self, jobs: &[(usize, Genome)], scored: &[(FullScore, EvalBudget)]) {
        let mut order: Vec<usize> = (0..jobs.len()).collect();
        order.sort_by(|&i, &j| {
            scored[i]
                .0
                .rmse
                .total_cmp(&scored[j].0.rmse)
                .then_with(|| jobs[i].1.cmp(&jobs[j].1))
        });
        for i in order {
            self.state.archive.update(jobs[i].1.clone(), scored[i].0);
        }
    }
}
