//! Growth tables: run the engine over instance families and write CSV.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::{
    edges, gen_cross_polytope, gen_packing_family, gen_perturbed_cross, gen_tsp_subtour, CrossSpec, InstanceError,
    Mode, PackingSpec, PerturbedSpec, TspSpec,
};
use crate::io::{self, IoError};
use crate::lp::Polytope;
use crate::rational::{self, Rational};
use crate::search::{run_bb, BranchStrategy, RunReport, SearchBudget, SearchError};

pub const CSV_HEADER: [&str; 8] = ["family", "n", "k", "strategy", "seed", "nodes", "leaves", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Cross-polytope `P_n`; no objective.
    Cross,
    /// Packing polytope with the cover row; no objective.
    Packing,
    /// Perturbed cross-polytope, one instance per seed; no objective.
    PerturbedCross,
    /// Subtour relaxation with seeded edge weights, minimized.
    Tsp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Cross => "cross",
            Family::Packing => "packing",
            Family::PerturbedCross => "perturbed-cross",
            Family::Tsp => "tsp",
        }
    }

    fn randomized(self) -> bool {
        matches!(self, Family::PerturbedCross | Family::Tsp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySweep {
    pub family: Family,
    pub n: Vec<usize>,
    /// Only read by the packing family.
    #[serde(default)]
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub families: Vec<FamilySweep>,
    pub strategies: Vec<BranchStrategy>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub budget: SearchBudget,
    /// Where to write the CSV; standard output when absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory receiving one tree file per row, named by [`tree_file_name`].
    #[serde(default)]
    pub trees_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let err = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.families.is_empty() {
            return err("no families");
        }
        if self.strategies.is_empty() {
            return err("empty strategy list");
        }
        if self.seeds.is_empty() {
            if self.families.iter().any(|f| f.family.randomized()) {
                return err("missing seed list for a randomized family");
            }
            if self
                .strategies
                .iter()
                .any(|s| matches!(s, BranchStrategy::RandomGeneral { .. }))
            {
                return err("missing seed list for a randomized strategy");
            }
        }
        for f in &self.families {
            if f.n.is_empty() {
                return err(&format!("{}: empty n range", f.family.name()));
            }
            if f.family == Family::Packing && f.k.is_empty() {
                return err("packing: empty k range");
            }
        }
        if self.budget.max_nodes == 0 || self.budget.max_leaves == 0 {
            return err("budget limits must be positive");
        }
        Ok(())
    }

    fn jobs(&self) -> Vec<Job> {
        let seeds: Vec<u64> = if self.seeds.is_empty() {
            vec![0]
        } else {
            self.seeds.clone()
        };
        let mut out = Vec::new();
        for f in &self.families {
            let ks: Vec<Option<usize>> = if f.family == Family::Packing {
                f.k.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for &n in &f.n {
                for &k in &ks {
                    for s in &self.strategies {
                        for &seed in &seeds {
                            out.push(Job {
                                family: f.family,
                                n,
                                k,
                                strategy: s.clone(),
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Job {
    family: Family,
    n: usize,
    k: Option<usize>,
    strategy: BranchStrategy,
    seed: u64,
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub family: String,
    pub n: usize,
    pub k: Option<usize>,
    pub strategy: String,
    pub seed: u64,
    pub nodes: usize,
    pub leaves: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub total: usize,
    pub interrupted: bool,
}

/// `{family}-n{n}[-k{k}]-{strategy}-s{seed}.json`.
pub fn tree_file_name(row: &ExperimentRow) -> String {
    let k = row.k.map(|k| format!("-k{k}")).unwrap_or_default();
    format!("{}-n{}{}-{}-s{}.json", row.family, row.n, k, row.strategy, row.seed)
}

/// Edge weights in `{1..100} / {1..10}`, reproducible from the seed.
pub fn tsp_weights(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges(n)
        .iter()
        .map(|_| rational::ratio(rng.random_range(1..=100), rng.random_range(1..=10)))
        .collect()
}

/// Instance and objective (maximized) for one table row.
pub fn instance(
    family: Family,
    n: usize,
    k: Option<usize>,
    seed: u64,
) -> Result<(Polytope, Option<Vec<Rational>>), ExperimentError> {
    Ok(match family {
        Family::Cross => (
            gen_cross_polytope(CrossSpec {
                n,
                mode: Mode::Explicit,
            })?,
            None,
        ),
        Family::Packing => {
            let k = k.ok_or_else(|| ExperimentError::Config("packing needs k".into()))?;
            (
                gen_packing_family(PackingSpec {
                    n,
                    k,
                    with_cover: true,
                    mode: Mode::Explicit,
                })?,
                None,
            )
        }
        Family::PerturbedCross => (gen_perturbed_cross(PerturbedSpec { n, seed })?, None),
        Family::Tsp => {
            let c = tsp_weights(n, seed).into_iter().map(|w| -w).collect();
            (gen_tsp_subtour(TspSpec { n })?, Some(c))
        }
    })
}

fn run_job(job: &Job, budget: &SearchBudget) -> Result<(ExperimentRow, RunReport), ExperimentError> {
    let (p, c) = instance(job.family, job.n, job.k, job.seed)?;
    let strategy = match &job.strategy {
        BranchStrategy::RandomGeneral { m, .. } => BranchStrategy::RandomGeneral { m: *m, seed: job.seed },
        s => s.clone(),
    };
    let report = run_bb(&p, &strategy, c.as_deref(), budget)?;
    let row = ExperimentRow {
        family: job.family.name().into(),
        n: job.n,
        k: job.k,
        strategy: job.strategy.label(),
        seed: job.seed,
        nodes: report.nodes,
        leaves: report.leaves,
        status: report.status.label().into(),
    };
    Ok((row, report))
}

/// Runs every (instance, strategy, seed) combination, in parallel.
///
/// Rows are sorted before returning, so the output does not depend on
/// scheduling. Once `stop` is set no further rows start; the rows that
/// finished are returned with `interrupted` set.
pub fn run_experiment(config: &ExperimentConfig, stop: &AtomicBool) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let jobs = config.jobs();
    let results: Vec<Option<Result<(ExperimentRow, RunReport), ExperimentError>>> = jobs
        .par_iter()
        .map(|job| {
            if stop.load(Ordering::Relaxed) {
                None
            } else {
                Some(run_job(job, &config.budget))
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results.into_iter().flatten() {
        let (row, report) = r?;
        if let Some(dir) = &config.trees_dir {
            let json = serde_json::to_string_pretty(&report.tree).map_err(IoError::from)?;
            io::write_file(&dir.join(tree_file_name(&row)), &json)?;
        }
        rows.push(row);
    }
    rows.sort();
    let interrupted = rows.len() < jobs.len();
    Ok(ExperimentOutput {
        rows,
        total: jobs.len(),
        interrupted,
    })
}

/// CSV text for `out`; an interrupted run ends with a `# interrupted` line.
pub fn to_csv(out: &ExperimentOutput) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &out.rows {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.strategy.clone(),
            r.seed.to_string(),
            r.nodes.to_string(),
            r.leaves.to_string(),
            r.status.clone(),
        ])?;
    }
    let mut s =
        String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv writes UTF-8");
    if out.interrupted {
        s.push_str(&format!(
            "# interrupted after {} of {} rows\n",
            out.rows.len(),
            out.total
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(families: Vec<FamilySweep>, strategies: Vec<BranchStrategy>) -> ExperimentConfig {
        ExperimentConfig {
            families,
            strategies,
            seeds: vec![],
            budget: SearchBudget::default(),
            out: None,
            trees_dir: None,
        }
    }

    #[test]
    fn cross_growth() {
        let c = config(
            vec![FamilySweep {
                family: Family::Cross,
                n: vec![4, 2, 3],
                k: vec![],
            }],
            vec![BranchStrategy::MostFractional],
        );
        let out = run_experiment(&c, &AtomicBool::new(false)).unwrap();
        let nodes: Vec<usize> = out.rows.iter().map(|r| r.nodes).collect();
        assert_eq!(nodes, vec![7, 15, 31]);
        let csv = to_csv(&out).unwrap();
        assert!(csv.starts_with(
            "family,n,k,strategy,seed,nodes,leaves,status\ncross,2,,most-fractional,0,7,4,ProvedInfeasible\n"
        ));
        assert_eq!(
            csv,
            to_csv(&run_experiment(&c, &AtomicBool::new(false)).unwrap()).unwrap()
        );
    }

    #[test]
    fn config_errors_and_interrupt() {
        let bad = config(
            vec![FamilySweep {
                family: Family::Cross,
                n: vec![2],
                k: vec![],
            }],
            vec![],
        );
        assert!(matches!(bad.validate(), Err(ExperimentError::Config(_))));
        let unseeded = config(
            vec![FamilySweep {
                family: Family::PerturbedCross,
                n: vec![4],
                k: vec![],
            }],
            vec![BranchStrategy::MostFractional],
        );
        assert!(matches!(unseeded.validate(), Err(ExperimentError::Config(_))));
        let c = config(
            vec![FamilySweep {
                family: Family::Cross,
                n: vec![2],
                k: vec![],
            }],
            vec![BranchStrategy::MostFractional],
        );
        let out = run_experiment(&c, &AtomicBool::new(true)).unwrap();
        assert!(out.interrupted);
        assert!(to_csv(&out).unwrap().ends_with("# interrupted after 0 of 1 rows\n"));
    }
}
