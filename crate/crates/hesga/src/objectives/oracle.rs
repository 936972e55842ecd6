//! Exhaustive ground truth for small spaces.
//!
//! Every genome of an enumerable space is decoded and fully evaluated once,
//! and the results are kept sorted by ascending RMSE (ties broken by genome)
//! so the global optimum is simply the first row. Optimality tests for the
//! search algorithms check their answers against this table.

use crate::eval::{full_evaluate_or_sentinel, EvalBudget, FullScore, Objective};
use crate::par;
use crate::seeds;
use crate::space::{Assignment, Genome, SearchSpace};
use crate::Result;

/// How the oracle seeds each genome's single full evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPolicy {
    /// Seed derived from the genome's own bits plus a salt, so the table is
    /// reproducible and independent of enumeration order.
    PerGenomeHash { salt: u64 },
    /// One shared seed for every genome.
    Constant(u64),
}

impl SeedPolicy {
    pub fn seed_for(&self, genome: &Genome) -> u64 {
        match *self {
            SeedPolicy::PerGenomeHash { salt } => seeds::derive(&[
                seeds::ORACLE_TAG,
                salt,
                seeds::genome_hash(genome.bits()),
            ]),
            SeedPolicy::Constant(seed) => seed,
        }
    }
}

/// One table row: a genome, its decoded values, and its full score.
#[derive(Debug, Clone)]
pub struct OracleRow {
    pub genome: Genome,
    pub assignment: Assignment,
    pub score: FullScore,
}

/// Full evaluation of every genome in a space, sorted ascending by RMSE.
#[derive(Debug, Clone)]
pub struct OracleTable {
    dim_names: Vec<String>,
    rows: Vec<OracleRow>,
}

impl OracleTable {
    pub fn rows(&self) -> &[OracleRow] {
        &self.rows
    }

    /// The global optimum.
    pub fn best(&self) -> &OracleRow {
        &self.rows[0]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Renders the table as CSV: `genome_bits, <one column per dimension>, rmse`.
    pub fn to_csv_string(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["genome_bits".to_string()];
        header.extend(self.dim_names.iter().cloned());
        header.push("rmse".to_string());
        writer.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut record = vec![row.genome.to_string()];
            record.extend(row.assignment.entries().iter().map(|(_, v)| v.to_string()));
            record.push(row.score.rmse.to_string());
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

/// Fully evaluates every genome of `space` under `seed_policy`.
///
/// Rows are computed through the data-parallel kernel and then sorted, so the
/// result does not depend on the degree of parallelism. Divergent evaluations
/// land in the table with the sentinel worst score rather than aborting the
/// sweep.
pub fn exhaustive_oracle<O: Objective + ?Sized>(
    space: &SearchSpace,
    obj: &O,
    n_e: usize,
    seed_policy: SeedPolicy,
    limit: u64,
) -> Result<OracleTable> {
    let genomes: Vec<Genome> = space.enumerate(limit)?.collect();
    let results = par::map_indexed(&genomes, |_, genome| -> Result<OracleRow> {
        let assignment = space.decode(genome)?;
        let seed = seed_policy.seed_for(genome);
        let mut budget = EvalBudget::default();
        let score = full_evaluate_or_sentinel(obj, &assignment, n_e, seed, &mut budget)?;
        Ok(OracleRow {
            genome: genome.clone(),
            assignment,
            score,
        })
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.score
            .rmse
            .total_cmp(&b.score.rmse)
            .then_with(|| a.genome.cmp(&b.genome))
    });
    Ok(OracleTable {
        dim_names: space.dims().iter().map(|d| d.name.clone()).collect(),
        rows,
    })
}
