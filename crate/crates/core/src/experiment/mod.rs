//! The full comparison grid: every front, shuffle, policy and schedule,
//! scored by IGD and persisted as CSV.

mod config;
mod output;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::ExperimentConfig;
pub use output::{
    export_plot_data, read_plot_data, read_results, render_summary_table, write_failures,
    write_raw_results, write_summary_csv, write_timings, PlotData,
};

use crate::error::{Error, Result};
use crate::indicators::{igd, IgdReferenceSet};
use crate::pareto::Solution;
use crate::policies::{PolicyContext, PolicyId};
use crate::refsets::{base_solutions, reference_front, sample_front, sequence_from_base, BatchSize, FrontKind, InputSequence};
use crate::scheduler::{run_archiving, EventDiagnostics, Schedule};
use crate::stats::{self, SampleGroup};

/// One grid cell: a policy under a schedule on one front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub front: FrontKind,
    pub policy: PolicyId,
    pub schedule: Schedule,
}

impl Cell {
    /// `<front>_<policy>_<schedule>`, used for per-cell file names.
    pub fn file_stem(&self) -> String {
        format!("{}_{}_{}", self.front.name(), self.policy.slug(), self.schedule.name())
    }
}

/// IGD and wall-clock time of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub front: FrontKind,
    pub policy: PolicyId,
    pub schedule: Schedule,
    pub shuffle: usize,
    pub igd: f64,
    pub duration_ms: f64,
}

impl ResultRecord {
    pub fn cell(&self) -> Cell {
        Cell {
            front: self.front,
            policy: self.policy,
            schedule: self.schedule,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub cell: Cell,
    pub shuffle: usize,
    pub message: String,
}

/// Final state of one successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: ResultRecord,
    pub archive: Vec<Solution>,
    pub truncation_events: usize,
}

/// Statistics of one cell over its shuffles.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    /// Significance letters among the schedules of the same front and policy.
    pub letters: String,
    pub median_shuffle: usize,
    pub median_igd: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub runs: Vec<RunOutput>,
    pub failures: Vec<FailureRecord>,
    pub cells: Vec<CellSummary>,
}

impl ExperimentOutcome {
    pub fn records(&self) -> Vec<ResultRecord> {
        self.runs.iter().map(|r| r.record.clone()).collect()
    }

    pub fn cell(&self, front: FrontKind, policy: PolicyId, schedule: Schedule) -> Option<&CellSummary> {
        let key = Cell { front, policy, schedule };
        self.cells.iter().find(|c| c.cell == key)
    }

    pub fn run(&self, cell: Cell, shuffle: usize) -> Option<&RunOutput> {
        self.runs
            .iter()
            .find(|r| r.record.cell() == cell && r.record.shuffle == shuffle)
    }
}

/// Shuffle index of the median IGD among `(shuffle, igd)` pairs. Even
/// counts take the lower middle value; when several runs share the median
/// value the lowest shuffle index wins.
pub fn select_median_run(records: &[(usize, f64)]) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::EmptyInput("median selection"));
    }
    let mut values: Vec<f64> = records.iter().map(|r| r.1).collect();
    values.sort_by(f64::total_cmp);
    let median = values[(values.len() - 1) / 2];
    Ok(records
        .iter()
        .filter(|r| r.1 == median)
        .map(|r| r.0)
        .min()
        .expect("median is a member"))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn position<T: PartialEq>(all: &[T], v: &T) -> u64 {
    all.iter().position(|x| x == v).expect("member of ALL") as u64
}

/// Seed of the NSGA-III niching stream for one run.
pub fn run_seed(base: u64, cell: Cell, shuffle: usize) -> u64 {
    let mut h = splitmix(base);
    for part in [
        position(&FrontKind::ALL, &cell.front),
        shuffle as u64,
        position(&PolicyId::ALL, &cell.policy),
        position(&Schedule::ALL, &cell.schedule),
    ] {
        h = splitmix(h ^ part);
    }
    h
}

/// Canonical ordering of cells: front, policy, schedule as listed in the
/// enums.
fn cell_rank(cell: &Cell) -> (u64, u64, u64) {
    (
        position(&FrontKind::ALL, &cell.front),
        position(&PolicyId::ALL, &cell.policy),
        position(&Schedule::ALL, &cell.schedule),
    )
}

pub(crate) fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| {
        cell_rank(&a.cell())
            .cmp(&cell_rank(&b.cell()))
            .then(a.shuffle.cmp(&b.shuffle))
    });
}

/// Per-cell mean, standard deviation, letters and median run. Letters
/// compare the schedules of each front and policy.
pub fn summarize_records(records: &[ResultRecord], alpha: f64) -> Result<Vec<CellSummary>> {
    let mut by_cell: BTreeMap<(u64, u64, u64), (Cell, Vec<(usize, f64)>)> = BTreeMap::new();
    for r in records {
        by_cell
            .entry(cell_rank(&r.cell()))
            .or_insert_with(|| (r.cell(), Vec::new()))
            .1
            .push((r.shuffle, r.igd));
    }
    let mut rows: BTreeMap<(u64, u64), Vec<(Cell, Vec<(usize, f64)>)>> = BTreeMap::new();
    for ((f, p, _), entry) in by_cell {
        rows.entry((f, p)).or_default().push(entry);
    }

    let mut out = Vec::new();
    for (_, row) in rows {
        let groups: Vec<SampleGroup> = row
            .iter()
            .map(|(cell, runs)| SampleGroup {
                label: cell.schedule.name().to_string(),
                values: runs.iter().map(|r| r.1).collect(),
            })
            .collect();
        let letters: Vec<String> = if groups.len() >= 2 {
            stats::summarize(&groups, alpha)?
                .groups
                .into_iter()
                .map(|g| g.letters)
                .collect()
        } else {
            vec!["a".to_string(); groups.len()]
        };
        for ((cell, runs), letters) in row.into_iter().zip(letters) {
            let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
            let median_shuffle = select_median_run(&runs)?;
            let median_igd = runs
                .iter()
                .find(|r| r.0 == median_shuffle)
                .expect("median is a member")
                .1;
            out.push(CellSummary {
                cell,
                runs: values.len(),
                mean: stats::mean(&values),
                std: stats::std_dev(&values),
                letters,
                median_shuffle,
                median_igd,
            });
        }
    }
    Ok(out)
}

struct Job {
    cell: Cell,
    shuffle: usize,
}

enum JobResult {
    Done(RunOutput, Option<Vec<EventDiagnostics>>),
    Failed(FailureRecord),
}

fn run_job(
    job: &Job,
    seq: &InputSequence,
    refset: &IgdReferenceSet,
    ctx: &PolicyContext,
    config: &ExperimentConfig,
) -> Result<(RunOutput, Option<Vec<EventDiagnostics>>)> {
    let mut ctx = ctx.clone();
    ctx.seed = run_seed(config.seed, job.cell, job.shuffle);
    let diagnostics = config.diagnostics && job.cell.policy == PolicyId::Nsga3;
    let start = Instant::now();
    let trace = run_archiving(seq, job.cell.policy, job.cell.schedule, config.mu, &ctx, diagnostics)?;
    let duration_ms = start.elapsed().as_secs_f64() * 1e3;
    let archive = trace.final_archive.into_members();
    let value = igd(&archive, refset)?;
    Ok((
        RunOutput {
            record: ResultRecord {
                front: job.cell.front,
                policy: job.cell.policy,
                schedule: job.cell.schedule,
                shuffle: job.shuffle,
                igd: value,
                duration_ms,
            },
            archive,
            truncation_events: trace.truncation_event_count,
        },
        trace.diagnostics,
    ))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the whole grid and writes every output file into
/// `config.output_dir`. Failed runs are reported in the outcome and in
/// `failures.csv`; they do not stop the other runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let ctx = config.policy_context()?;
    let dir = config.output_dir.clone();
    create_dir(&dir)?;

    let mut sequences = BTreeMap::new();
    let mut refsets = BTreeMap::new();
    for &front in &config.fronts {
        let base = base_solutions(sample_front(front, config.m, config.n_solutions, config.seed)?)?;
        for k in 0..config.n_shuffles {
            let seq = sequence_from_base(front, &base, config.seed, config.seed.wrapping_add(k as u64), BatchSize::All)?;
            sequences.insert((front, k), seq);
        }
        refsets.insert(front, IgdReferenceSet::new(reference_front(front, config.m, config.igd_divisions)?)?);
    }

    let mut jobs = Vec::with_capacity(config.grid_size());
    for &front in &config.fronts {
        for &policy in &config.policies {
            for &schedule in &config.schedules {
                for shuffle in 0..config.n_shuffles {
                    jobs.push(Job {
                        cell: Cell { front, policy, schedule },
                        shuffle,
                    });
                }
            }
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let results: Vec<JobResult> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let seq = &sequences[&(job.cell.front, job.shuffle)];
                let refset = &refsets[&job.cell.front];
                let outcome = catch_unwind(AssertUnwindSafe(|| run_job(job, seq, refset, &ctx, config)))
                    .unwrap_or_else(|panic| {
                        let msg = panic
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "run panicked".into());
                        Err(Error::InvalidParameter(msg))
                    });
                match outcome {
                    Ok((run, diag)) => JobResult::Done(run, diag),
                    Err(e) => JobResult::Failed(FailureRecord {
                        cell: job.cell,
                        shuffle: job.shuffle,
                        message: e.to_string(),
                    }),
                }
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut traces = Vec::new();
    for r in results {
        match r {
            JobResult::Done(run, diag) => {
                if let Some(d) = diag {
                    traces.push((run.record.cell(), run.record.shuffle, d));
                }
                runs.push(run);
            }
            JobResult::Failed(f) => failures.push(f),
        }
    }
    runs.sort_by(|a, b| {
        cell_rank(&a.record.cell())
            .cmp(&cell_rank(&b.record.cell()))
            .then(a.record.shuffle.cmp(&b.record.shuffle))
    });
    let records: Vec<ResultRecord> = runs.iter().map(|r| r.record.clone()).collect();

    write_raw_results(&dir.join("raw_results.csv"), &records)?;
    write_timings(&dir.join("timings.csv"), &records)?;
    write_failures(&dir.join("failures.csv"), &failures)?;
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, config.to_json()).map_err(|e| Error::io(&config_path, e))?;

    let cells = summarize_records(&records, config.alpha)?;
    write_summary_csv(&dir.join("summary.csv"), &cells)?;
    let table_path = dir.join("summary.txt");
    std::fs::write(&table_path, render_summary_table(&cells)).map_err(|e| Error::io(&table_path, e))?;

    create_dir(&dir.join("archives"))?;
    create_dir(&dir.join("plotdata"))?;
    for c in &cells {
        let run = runs
            .iter()
            .find(|r| r.record.cell() == c.cell && r.record.shuffle == c.median_shuffle)
            .expect("median run exists");
        let stem = c.cell.file_stem();
        crate::refsets::write_sequence(&dir.join("archives").join(format!("{stem}.csv")), &[run.archive.clone()])?;
        export_plot_data(
            &dir.join("plotdata").join(format!("{stem}.csv")),
            c.cell.front,
            &run.archive,
            c.median_igd,
        )?;
    }

    if !traces.is_empty() {
        create_dir(&dir.join("traces"))?;
        for (cell, shuffle, diag) in &traces {
            let path = dir.join("traces").join(format!("{}_{shuffle}.csv", cell.file_stem()));
            output::write_trace(&path, diag)?;
        }
    }

    Ok(ExperimentOutcome {
        output_dir: dir,
        runs,
        failures,
        cells,
    })
}

/// Recomputes `summary.csv` and `summary.txt` from `raw_results.csv`.
pub fn rebuild_summary(dir: &Path, alpha: f64) -> Result<Vec<CellSummary>> {
    let records = read_results(dir)?;
    let cells = summarize_records(&records, alpha)?;
    write_summary_csv(&dir.join("summary.csv"), &cells)?;
    let table_path = dir.join("summary.txt");
    std::fs::write(&table_path, render_summary_table(&cells)).map_err(|e| Error::io(&table_path, e))?;
    Ok(cells)
}

/// Rewrites every plot-data file from `raw_results.csv` and the stored
/// median archives. Returns the number of files written.
pub fn rebuild_plot_data(dir: &Path, alpha: f64) -> Result<usize> {
    let records = read_results(dir)?;
    let cells = summarize_records(&records, alpha)?;
    let plot_dir = dir.join("plotdata");
    create_dir(&plot_dir)?;
    for c in &cells {
        let stem = c.cell.file_stem();
        let archive: Vec<Solution> = crate::refsets::read_sequence(&dir.join("archives").join(format!("{stem}.csv")))?
            .into_iter()
            .flatten()
            .collect();
        export_plot_data(&plot_dir.join(format!("{stem}.csv")), c.cell.front, &archive, c.median_igd)?;
    }
    Ok(cells.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn median_examples() {
        assert_eq!(select_median_run(&[(0, 0.3), (1, 0.1), (2, 0.2)]).unwrap(), 2);
        assert_eq!(select_median_run(&[(0, 0.5), (1, 0.5), (2, 0.5)]).unwrap(), 0);
        assert_eq!(select_median_run(&[(0, 0.4), (1, 0.1), (2, 0.3), (3, 0.2)]).unwrap(), 3);
        assert!(select_median_run(&[]).is_err());
    }

    #[test]
    fn median_matches_sorting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let values: Vec<(usize, f64)> = (0..31).map(|k| (k, rng.gen::<f64>())).collect();
        let mut sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
        sorted.sort_by(f64::total_cmp);
        let pick = select_median_run(&values).unwrap();
        assert_eq!(values[pick].1, sorted[15]);
    }

    #[test]
    fn run_seeds_differ_per_run() {
        let cell = Cell {
            front: FrontKind::Simplex,
            policy: PolicyId::Nsga3,
            schedule: Schedule::Batch,
        };
        let other = Cell {
            schedule: Schedule::Immediate,
            ..cell
        };
        assert_ne!(run_seed(1, cell, 0), run_seed(1, cell, 1));
        assert_ne!(run_seed(1, cell, 0), run_seed(1, other, 0));
        assert_eq!(run_seed(1, cell, 0), run_seed(1, cell, 0));
    }

    #[test]
    fn summary_letters_per_row() {
        let mut records = Vec::new();
        for (schedule, base) in [(Schedule::Immediate, 0.04), (Schedule::Batch, 0.05), (Schedule::Unbounded, 0.04)] {
            for k in 0..10 {
                records.push(ResultRecord {
                    front: FrontKind::Simplex,
                    policy: PolicyId::Ibea,
                    schedule,
                    shuffle: k,
                    igd: base + k as f64 * 1e-4,
                    duration_ms: 0.0,
                });
            }
        }
        let cells = summarize_records(&records, 0.05).unwrap();
        let letters: Vec<&str> = cells.iter().map(|c| c.letters.as_str()).collect();
        assert_eq!(letters, vec!["a", "b", "a"]);
        assert_eq!(cells[0].median_shuffle, 4);
    }
}
