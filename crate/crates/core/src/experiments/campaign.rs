use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{min_distance_bruteforce, validate_instance, ProblemInstance};
use crate::equivalence::{is_equivalent, partition_classes, Partition, DEFAULT_EFFORT_CAP};
use crate::error::{Error, Result};
use crate::es::{
    run, EsConfig, TieBreak, TracePoint, Variant, DEFAULT_DIVERSITY_EVERY, DEFAULT_GENERATIONS,
};
use crate::gf2::{parse_generator, GeneratorMatrix};

pub const SEED_RULE: &str = "seed = fold(splitmix64(h ^ x)) over x in [n, k, d, variant_index, run_index] starting from h = master_seed; variant_index follows [comma, comma+xo, plus, plus+xo]";

pub const EVALUATION_CONVENTION: &str = "evaluations count every fitness evaluation including the lambda initial ones; evaluations_to_success is the 1-based ordinal of the evaluation that first scored an optimal genotype";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignInstance {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Optional reference generator matrix (matrix text format) that evolved
    /// codes are compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

impl CampaignInstance {
    pub fn instance(&self) -> ProblemInstance {
        ProblemInstance {
            n: self.n,
            k: self.k,
            d: self.d,
        }
    }
}

fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

fn default_budget() -> u64 {
    DEFAULT_GENERATIONS
}

fn default_diversity_every() -> u64 {
    DEFAULT_DIVERSITY_EVERY
}

fn default_cap() -> u64 {
    DEFAULT_EFFORT_CAP
}

/// Campaign configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub instances: Vec<CampaignInstance>,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_diversity_every")]
    pub diversity_every: u64,
    /// Record diversity snapshots (and run the whole budget).
    #[serde(default)]
    pub trace_diversity: bool,
    /// Partition the successful codes of each cell into equivalence classes.
    #[serde(default)]
    pub equivalence: bool,
    #[serde(default = "default_cap")]
    pub effort_cap: u64,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Campaign {
    pub fn new(instances: Vec<ProblemInstance>, variants: Vec<Variant>, runs: usize, seed: u64) -> Self {
        Campaign {
            instances: instances
                .into_iter()
                .map(|i| CampaignInstance {
                    n: i.n,
                    k: i.k,
                    d: i.d,
                    reference: None,
                })
                .collect(),
            variants,
            runs,
            seed,
            budget: DEFAULT_GENERATIONS,
            diversity_every: DEFAULT_DIVERSITY_EVERY,
            trace_diversity: false,
            equivalence: false,
            effort_cap: DEFAULT_EFFORT_CAP,
            tie_break: TieBreak::default(),
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Campaign =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        if self.diversity_every == 0 {
            return Err(Error::InvalidConfig("diversity_every must be >= 1".into()));
        }
        if self.variants.is_empty() || self.instances.is_empty() {
            return Err(Error::InvalidConfig("need at least one instance and one variant".into()));
        }
        for ci in &self.instances {
            validate_instance(&ci.instance())?;
        }
        for ci in &self.instances {
            for &v in &self.variants {
                self.es_config(ci.instance(), v, 0).validate()?;
            }
        }
        Ok(())
    }

    fn es_config(&self, instance: ProblemInstance, variant: Variant, seed: u64) -> EsConfig {
        EsConfig {
            max_generations: self.budget,
            diversity_every: self.trace_diversity.then_some(self.diversity_every),
            tie_break: self.tie_break,
            ..EsConfig::with_defaults(instance, variant, seed)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub instance: ProblemInstance,
    pub variant: Variant,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one run; depends only on the master seed, the cell and the run
/// index.
pub fn derive_seed(master: u64, key: &CellKey, run_index: usize) -> u64 {
    let variant_index = Variant::ALL
        .iter()
        .position(|v| *v == key.variant)
        .expect("variant listed in ALL") as u64;
    let ProblemInstance { n, k, d } = key.instance;
    [n as u64, k as u64, d as u64, variant_index, run_index as u64]
        .iter()
        .fold(master, |h, &x| splitmix64(h ^ x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub success: bool,
    pub evaluations_to_success: Option<u64>,
    pub evaluations: u64,
    pub generations_used: u64,
    pub best_fitness: u64,
    pub best_genotype: GeneratorMatrix,
    /// For successes: whether the brute-force distance reaches `d`.
    pub verified: Option<bool>,
    pub trace: Vec<TracePoint>,
}

impl RunRecord {
    /// Evaluations until success, or the whole run's count on failure.
    pub fn evaluations_used(&self) -> u64 {
        self.evaluations_to_success.unwrap_or(self.evaluations)
    }
}

/// Reference comparison for the successful codes of a cell.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub equivalent: usize,
    pub non_equivalent: usize,
    pub undecided: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    pub runs: Vec<RunRecord>,
    pub partition: Option<Partition>,
    pub reference: Option<ReferenceCheck>,
}

impl CellResult {
    pub fn success_count(&self) -> usize {
        self.runs.iter().filter(|r| r.success).count()
    }

    pub fn verified_successes(&self) -> usize {
        self.runs.iter().filter(|r| r.verified == Some(true)).count()
    }

    pub fn successful_codes(&self) -> Vec<&GeneratorMatrix> {
        self.runs
            .iter()
            .filter(|r| r.success)
            .map(|r| &r.best_genotype)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub master_seed: u64,
    pub runs_per_cell: usize,
    pub budget: u64,
    pub diversity_every: Option<u64>,
    pub effort_cap: u64,
    pub tie_break: TieBreak,
    pub seed_rule: String,
    pub evaluation_convention: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchResult {
    pub metadata: Metadata,
    pub cells: Vec<CellResult>,
}

impl BatchResult {
    pub fn cell(&self, instance: ProblemInstance, variant: Variant) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.key.instance == instance && c.key.variant == variant)
    }
}

fn execute(c: &Campaign, key: CellKey, run_index: usize) -> Result<RunRecord> {
    let seed = derive_seed(c.seed, &key, run_index);
    let r = run(&c.es_config(key.instance, key.variant, seed))?;
    let verified = if r.success {
        Some(min_distance_bruteforce(&r.best.genotype.span())? >= key.instance.d)
    } else {
        None
    };
    Ok(RunRecord {
        run: run_index,
        seed,
        success: r.success,
        evaluations_to_success: r.evaluations_to_success,
        evaluations: r.evaluations,
        generations_used: r.generations_used,
        best_fitness: r.best.fitness,
        best_genotype: r.best.genotype,
        verified,
        trace: r.trace,
    })
}

fn analyse_cell(c: &Campaign, key: CellKey, runs: Vec<RunRecord>, reference: Option<&GeneratorMatrix>) -> Result<CellResult> {
    let mut cell = CellResult {
        key,
        runs,
        partition: None,
        reference: None,
    };
    let codes: Vec<_> = cell.successful_codes().into_iter().map(|g| g.span()).collect();
    if c.equivalence {
        cell.partition = Some(partition_classes(&codes, c.effort_cap)?);
    }
    if let Some(r) = reference {
        let rc = r.span();
        let mut check = ReferenceCheck::default();
        for code in &codes {
            let rep = is_equivalent(&rc, code, c.effort_cap)?;
            if rep.is_equivalent() {
                check.equivalent += 1;
            } else if rep.is_undecided() {
                check.undecided += 1;
            } else {
                check.non_equivalent += 1;
            }
        }
        cell.reference = Some(check);
    }
    Ok(cell)
}

/// Runs every `(instance, variant, run)` job, in parallel, and aggregates
/// the cells in configuration order. Results do not depend on scheduling.
pub fn run_campaign(c: &Campaign) -> Result<BatchResult> {
    c.validate()?;
    let mut references = Vec::with_capacity(c.instances.len());
    for ci in &c.instances {
        let reference = match &ci.reference {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
                })?;
                let g = parse_generator(&text)?;
                if g.n() != ci.n || g.k() != ci.k {
                    return Err(Error::InvalidConfig(format!(
                        "reference {} is not a ({}, {}) code",
                        path.display(),
                        ci.n,
                        ci.k
                    )));
                }
                Some(g)
            }
            None => None,
        };
        references.push(reference);
    }

    let keys: Vec<(CellKey, usize)> = c
        .instances
        .iter()
        .enumerate()
        .flat_map(|(i, ci)| {
            c.variants.iter().map(move |&variant| {
                (
                    CellKey {
                        instance: ci.instance(),
                        variant,
                    },
                    i,
                )
            })
        })
        .collect();
    let jobs: Vec<(usize, CellKey, usize)> = keys
        .iter()
        .enumerate()
        .flat_map(|(cell, &(key, _))| (0..c.runs).map(move |r| (cell, key, r)))
        .collect();

    let work = || -> Result<Vec<RunRecord>> {
        jobs.par_iter()
            .map(|&(_, key, r)| execute(c, key, r))
            .collect()
    };
    let records = match c.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut per_cell: Vec<Vec<RunRecord>> = vec![Vec::with_capacity(c.runs); keys.len()];
    for (&(cell, _, _), rec) in jobs.iter().zip(records) {
        per_cell[cell].push(rec);
    }
    let cells = keys
        .par_iter()
        .zip(per_cell)
        .map(|(&(key, inst_idx), runs)| analyse_cell(c, key, runs, references[inst_idx].as_ref()))
        .collect::<Result<Vec<_>>>()?;

    Ok(BatchResult {
        metadata: Metadata {
            master_seed: c.seed,
            runs_per_cell: c.runs,
            budget: c.budget,
            diversity_every: c.trace_diversity.then_some(c.diversity_every),
            effort_cap: c.effort_cap,
            tie_break: c.tie_break,
            seed_rule: SEED_RULE.to_string(),
            evaluation_convention: EVALUATION_CONVENTION.to_string(),
        },
        cells,
    })
}
