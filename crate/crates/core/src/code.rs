//! Linear codes, the ANF-based fitness and brute-force reference checks.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfun::{count_masked, low_degree_mask, mobius_in_place, set_bit};
use crate::error::{Error, Result};
use crate::gf2::{BinMatrix, GeneratorMatrix};

/// The `2^k` codewords spanned by a generator matrix.
#[derive(Clone, Debug)]
pub struct LinearCode {
    n: usize,
    k: usize,
    codewords: Vec<u32>,
    generator: GeneratorMatrix,
}

impl LinearCode {
    pub fn from_generator(g: &GeneratorMatrix) -> Self {
        LinearCode {
            n: g.n(),
            k: g.k(),
            codewords: g.codewords(),
            generator: g.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Codewords indexed by message, zero first.
    pub fn codewords(&self) -> &[u32] {
        &self.codewords
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn rref(&self) -> BinMatrix {
        self.generator.rref()
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }
}

/// Two codes are equal when they are the same subspace.
impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k && self.rref() == other.rref()
    }
}

impl Eq for LinearCode {}

/// An `(n, k, d)` target: find a `k`-dimensional code of length `n` with
/// minimum distance at least `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl ProblemInstance {
    /// Builds and validates an instance.
    pub fn new(n: usize, k: usize, d: usize) -> std::result::Result<Self, InstanceViolation> {
        let inst = ProblemInstance { n, k, d };
        validate_instance(&inst)?;
        Ok(inst)
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.k, self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstanceViolation {
    #[error("length n = {0} outside 1..=32")]
    Length(usize),
    #[error("dimension k = {k} must satisfy 1 <= k <= n = {n}")]
    Dimension { n: usize, k: usize },
    #[error("target distance d must be at least 1")]
    ZeroDistance,
    #[error("Singleton bound violated: d = {d} > n - k + 1 = {bound}")]
    Singleton { d: usize, bound: usize },
}

/// Checks `k <= n`, `d >= 1` and the Singleton bound `d <= n - k + 1`.
pub fn validate_instance(inst: &ProblemInstance) -> std::result::Result<(), InstanceViolation> {
    let ProblemInstance { n, k, d } = *inst;
    if n == 0 || n > 32 {
        return Err(InstanceViolation::Length(n));
    }
    if k == 0 || k > n {
        return Err(InstanceViolation::Dimension { n, k });
    }
    if d == 0 {
        return Err(InstanceViolation::ZeroDistance);
    }
    if d > n - k + 1 {
        return Err(InstanceViolation::Singleton {
            d,
            bound: n - k + 1,
        });
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Best attainable fitness: `sum_{i < d} C(n, i)`.
pub fn optimal_fitness(inst: &ProblemInstance) -> u64 {
    (0..inst.d as u64).map(|i| binomial(inst.n as u64, i)).sum()
}

/// Scores generator matrices for one instance, reusing its table buffers.
///
/// Steps: span the code, write its indicator truth table, run the fast
/// Möbius transform in place and count the nonzero coefficients of degree
/// below `d`.
#[derive(Clone, Debug)]
pub struct FitnessEvaluator {
    inst: ProblemInstance,
    mask: Vec<u64>,
    table: Vec<u64>,
    codewords: Vec<u32>,
    optimum: u64,
}

impl FitnessEvaluator {
    pub fn new(inst: ProblemInstance) -> Result<Self> {
        validate_instance(&inst)?;
        if inst.n > crate::boolfun::MAX_VARS {
            return Err(Error::UnsupportedLength(inst.n));
        }
        let mask = low_degree_mask(inst.n, inst.d);
        Ok(FitnessEvaluator {
            table: vec![0; mask.len()],
            codewords: vec![0; 1 << inst.k],
            optimum: optimal_fitness(&inst),
            inst,
            mask,
        })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.inst
    }

    pub fn optimum(&self) -> u64 {
        self.optimum
    }

    pub fn evaluate(&mut self, g: &GeneratorMatrix) -> Result<u64> {
        if g.n() != self.inst.n || g.k() != self.inst.k {
            return Err(Error::DimensionMismatch {
                n_a: self.inst.n,
                k_a: self.inst.k,
                n_b: g.n(),
                k_b: g.k(),
            });
        }
        g.fill_codewords(&mut self.codewords);
        self.table.fill(0);
        for &c in &self.codewords {
            set_bit(&mut self.table, c as usize);
        }
        mobius_in_place(&mut self.table, self.inst.n);
        Ok(count_masked(&self.table, &self.mask) as u64)
    }
}

/// One-off fitness evaluation; see [`FitnessEvaluator`] for repeated use.
pub fn fitness(g: &GeneratorMatrix, inst: &ProblemInstance) -> Result<u64> {
    FitnessEvaluator::new(*inst)?.evaluate(g)
}

/// Minimum weight over nonzero codewords, by direct scan.
pub fn min_distance_bruteforce(c: &LinearCode) -> Result<usize> {
    c.codewords()
        .iter()
        .filter(|&&w| w != 0)
        .map(|w| w.count_ones() as usize)
        .min()
        .ok_or(Error::TrivialCode)
}

/// Minimum distance through the ANF of the indicator function.
pub fn min_distance_anf(c: &LinearCode) -> Result<usize> {
    let t = crate::boolfun::TruthTable::indicator(c.n(), c.codewords())?;
    crate::boolfun::min_absent_degree(&crate::boolfun::mobius_transform(&t))
}

/// `counts[w]` is the number of codewords of Hamming weight `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightEnumerator {
    pub counts: Vec<u64>,
}

pub fn weight_enumerator(c: &LinearCode) -> WeightEnumerator {
    let mut counts = vec![0u64; c.n() + 1];
    for &w in c.codewords() {
        counts[w.count_ones() as usize] += 1;
    }
    WeightEnumerator { counts }
}
