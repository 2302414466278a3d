//! Summary JSON, per-run CSV files and best-genotype matrix files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::campaign::{BatchResult, CellResult, Metadata, ReferenceCheck, RunRecord};
use super::stats::{mann_whitney_u, MannWhitney};
use crate::code::ProblemInstance;
use crate::es::{TracePoint, Variant};
use crate::gf2::write_matrix;

pub const ALPHA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantiles of a non-empty sample.
fn quantiles(values: &[u64]) -> Option<Quantiles> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quantiles {
        min: v[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: v[v.len() - 1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub classes: usize,
    pub sizes: Vec<usize>,
    pub undecided: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanPoint {
    pub generation: u64,
    pub avg_fitness: f64,
    pub avg_pairwise_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversitySummary {
    pub initial_avg_distance: f64,
    pub final_avg_distance: f64,
    pub final_avg_fitness: f64,
    /// Runs whose final average distance is below their initial one.
    pub runs_with_decrease: usize,
    pub mean_trace: Vec<MeanPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub variant: Variant,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub verified_successes: usize,
    /// Per run, in run order; `null` for failures.
    pub evaluations_to_success: Vec<Option<u64>>,
    /// Quantiles of `evaluations_to_success` over successful runs.
    pub success_evaluation_quantiles: Option<Quantiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<ClassSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diversity: Option<DiversitySummary>,
}

/// Mann–Whitney comparison of two variants on one instance, over the
/// evaluations each run used (to success, or the whole run on failure).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub a: Variant,
    pub b: Variant,
    pub test: MannWhitney,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metadata: Metadata,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
}

fn diversity_summary(runs: &[RunRecord]) -> Option<DiversitySummary> {
    let traced: Vec<&Vec<TracePoint>> = runs.iter().map(|r| &r.trace).filter(|t| !t.is_empty()).collect();
    if traced.is_empty() {
        return None;
    }
    let len = traced.iter().map(|t| t.len()).min().unwrap_or(0);
    let count = traced.len() as f64;
    let mean_trace: Vec<MeanPoint> = (0..len)
        .map(|i| MeanPoint {
            generation: traced[0][i].generation,
            avg_fitness: traced.iter().map(|t| t[i].avg_fitness).sum::<f64>() / count,
            avg_pairwise_distance: traced.iter().map(|t| t[i].avg_pairwise_distance).sum::<f64>()
                / count,
        })
        .collect();
    let first = mean_trace.first()?;
    let last = mean_trace.last()?;
    Some(DiversitySummary {
        initial_avg_distance: first.avg_pairwise_distance,
        final_avg_distance: last.avg_pairwise_distance,
        final_avg_fitness: last.avg_fitness,
        runs_with_decrease: traced
            .iter()
            .filter(|t| t[t.len() - 1].avg_pairwise_distance < t[0].avg_pairwise_distance)
            .count(),
        mean_trace,
    })
}

fn cell_summary(cell: &CellResult) -> CellSummary {
    let ProblemInstance { n, k, d } = cell.key.instance;
    let successes = cell.success_count();
    let to_success: Vec<Option<u64>> = cell.runs.iter().map(|r| r.evaluations_to_success).collect();
    let ok: Vec<u64> = cell
        .runs
        .iter()
        .filter(|r| r.success)
        .filter_map(|r| r.evaluations_to_success)
        .collect();
    CellSummary {
        n,
        k,
        d,
        variant: cell.key.variant,
        runs: cell.runs.len(),
        successes,
        success_rate: successes as f64 / cell.runs.len() as f64,
        verified_successes: cell.verified_successes(),
        evaluations_to_success: to_success,
        success_evaluation_quantiles: quantiles(&ok),
        classes: cell.partition.as_ref().map(|p| ClassSummary {
            classes: p.len(),
            sizes: p.classes.iter().map(Vec::len).collect(),
            undecided: p.undecided.len(),
        }),
        reference: cell.reference.clone(),
        diversity: diversity_summary(&cell.runs),
    }
}

fn comparisons(batch: &BatchResult) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (i, a) in batch.cells.iter().enumerate() {
        for b in &batch.cells[i + 1..] {
            if a.key.instance != b.key.instance {
                continue;
            }
            let xa: Vec<f64> = a.runs.iter().map(|r| r.evaluations_used() as f64).collect();
            let xb: Vec<f64> = b.runs.iter().map(|r| r.evaluations_used() as f64).collect();
            let test = mann_whitney_u(&xa, &xb).expect("cells hold at least one run");
            let ProblemInstance { n, k, d } = a.key.instance;
            out.push(Comparison {
                n,
                k,
                d,
                a: a.key.variant,
                b: b.key.variant,
                significant: !test.degenerate && test.p_value < ALPHA,
                test,
            });
        }
    }
    out
}

impl Summary {
    pub fn from_batch(batch: &BatchResult) -> Self {
        Summary {
            metadata: batch.metadata.clone(),
            cells: batch.cells.iter().map(cell_summary).collect(),
            comparisons: comparisons(batch),
        }
    }
}

/// Pretty-printed summary JSON; identical inputs give identical bytes.
pub fn summary_json(batch: &BatchResult) -> String {
    let mut s = serde_json::to_string_pretty(&Summary::from_batch(batch)).expect("summary serializes");
    s.push('\n');
    s
}

/// `<n>_<k>_<d>_<variant>_<run>`
pub fn matrix_file_name(instance: &ProblemInstance, variant: Variant, run: usize) -> String {
    format!("{}_{}_{}_{}_{}.txt", instance.n, instance.k, instance.d, variant, run)
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("generation,best_fitness,avg_fitness,avg_pairwise_distance,evaluations\n");
    for p in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.generation, p.best_fitness, p.avg_fitness, p.avg_pairwise_distance, p.evaluations
        );
    }
    out
}

fn runs_csv(batch: &BatchResult) -> String {
    let mut out = String::from(
        "n,k,d,variant,run,seed,success,evaluations_to_success,evaluations,generations,best_fitness,verified\n",
    );
    for cell in &batch.cells {
        let ProblemInstance { n, k, d } = cell.key.instance;
        for r in &cell.runs {
            let _ = writeln!(
                out,
                "{n},{k},{d},{},{},{},{},{},{},{},{},{}",
                cell.key.variant,
                r.run,
                r.seed,
                r.success,
                r.evaluations_to_success.map(|e| e.to_string()).unwrap_or_default(),
                r.evaluations,
                r.generations_used,
                r.best_fitness,
                r.verified.map(|v| v.to_string()).unwrap_or_default(),
            );
        }
    }
    out
}

/// Writes `summary.json`, `runs.csv`, `matrices/*.txt` and, for traced
/// runs, `traces/*.csv` under `dir`.
pub fn write_outputs(batch: &BatchResult, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir.join("matrices"))?;
    fs::write(dir.join("summary.json"), summary_json(batch))?;
    fs::write(dir.join("runs.csv"), runs_csv(batch))?;
    let traced = batch.cells.iter().any(|c| c.runs.iter().any(|r| !r.trace.is_empty()));
    if traced {
        fs::create_dir_all(dir.join("traces"))?;
    }
    for cell in &batch.cells {
        for r in &cell.runs {
            let name = matrix_file_name(&cell.key.instance, cell.key.variant, r.run);
            fs::write(dir.join("matrices").join(&name), write_matrix(r.best_genotype.matrix()))?;
            if !r.trace.is_empty() {
                let csv = name.trim_end_matches(".txt").to_string() + ".csv";
                fs::write(dir.join("traces").join(csv), trace_csv(&r.trace))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_campaign, Campaign};

    #[test]
    fn quantile_interpolation() {
        let q = quantiles(&[1, 2, 3, 4]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert!(quantiles(&[]).is_none());
    }

    #[test]
    fn outputs_are_deterministic_and_complete() {
        let inst = ProblemInstance::new(8, 3, 4).unwrap();
        let mut c = Campaign::new(vec![inst], vec![Variant::ALL[0], Variant::ALL[3]], 3, 42);
        c.budget = 80;
        c.trace_diversity = true;
        c.equivalence = true;
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(summary_json(&a), summary_json(&b));

        let dir = tempfile::tempdir().unwrap();
        write_outputs(&a, dir.path()).unwrap();
        let summary: Summary =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary.cells.len(), 2);
        assert_eq!(summary.comparisons.len(), 1);
        let name = matrix_file_name(&inst, Variant::ALL[3], 2);
        assert_eq!(name, "8_3_4_plus+xo_2.txt");
        let text = fs::read_to_string(dir.path().join("matrices").join(&name)).unwrap();
        crate::gf2::parse_generator(&text).unwrap();
        let trace = fs::read_to_string(dir.path().join("traces/8_3_4_comma_0.csv")).unwrap();
        assert_eq!(trace.lines().count(), 1 + 3);
    }
}
