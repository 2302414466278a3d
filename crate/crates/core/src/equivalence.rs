//! Permutation equivalence of binary linear codes.
//!
//! Two codes are equivalent when some permutation of the coordinates maps
//! one codeword set onto the other. The test first compares weight
//! enumerators, then per-coordinate signatures, and finally runs a
//! backtracking search over signature-compatible column assignments.
//!
//! Partial assignments are pruned with two necessary conditions:
//! - for every pair of assigned coordinates, the number of codewords of each
//!   weight covering both must agree in the two codes;
//! - every codeword of `a` supported on assigned coordinates must map to a
//!   codeword of `b`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::code::{weight_enumerator, LinearCode};
use crate::error::{Error, Result};
use crate::gf2::{permute_word, EchelonBasis};

pub const DEFAULT_EFFORT_CAP: u64 = 10_000_000;

/// Bijection on coordinates: coordinate `j` (0-based, `x_1` is 0) goes to
/// `mapping[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoordinatePermutation {
    mapping: Vec<usize>,
}

impl CoordinatePermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidShape(format!(
                    "{mapping:?} is not a permutation"
                )));
            }
        }
        Ok(CoordinatePermutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        CoordinatePermutation {
            mapping: (0..n).collect(),
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// Image of a packed word.
    pub fn apply(&self, word: u32) -> u32 {
        permute_word(word, self.mapping.len(), &self.mapping)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &CoordinatePermutation) -> CoordinatePermutation {
        CoordinatePermutation {
            mapping: self.mapping.iter().map(|&m| other.mapping[m]).collect(),
        }
    }

    pub fn inverse(&self) -> CoordinatePermutation {
        let mut inv = vec![0; self.mapping.len()];
        for (j, &m) in self.mapping.iter().enumerate() {
            inv[m] = j;
        }
        CoordinatePermutation { mapping: inv }
    }

    /// Whether the permutation maps every codeword of `a` into `b`.
    pub fn maps(&self, a: &LinearCode, b: &LinearCode) -> bool {
        if a.n() != b.n() || a.k() != b.k() || a.n() != self.len() {
            return false;
        }
        let target = EchelonBasis::from_rows(b.n(), b.generator().rows());
        a.generator()
            .rows()
            .iter()
            .all(|&r| target.contains(self.apply(r)))
    }
}

/// Written 1-based, as the images of coordinates `1..n`.
impl fmt::Display for CoordinatePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mapping.iter().map(|m| (m + 1).to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrunedBy {
    WeightEnumerator,
    Signature,
    /// The search finished without finding a witness.
    SearchComplete,
    /// The node budget ran out; the question is undecided.
    SearchExhausted,
}

impl fmt::Display for PrunedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrunedBy::WeightEnumerator => "weight-enumerator",
            PrunedBy::Signature => "signature",
            PrunedBy::SearchComplete => "search-complete",
            PrunedBy::SearchExhausted => "search-exhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceReport {
    Equivalent {
        witness: CoordinatePermutation,
        nodes: u64,
    },
    NotEquivalent {
        pruned_by: PrunedBy,
        nodes: u64,
    },
    Undecided {
        nodes: u64,
    },
}

impl EquivalenceReport {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceReport::Equivalent { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, EquivalenceReport::Undecided { .. })
    }

    pub fn witness(&self) -> Option<&CoordinatePermutation> {
        match self {
            EquivalenceReport::Equivalent { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn pruned_by(&self) -> Option<PrunedBy> {
        match self {
            EquivalenceReport::Equivalent { .. } => None,
            EquivalenceReport::NotEquivalent { pruned_by, .. } => Some(*pruned_by),
            EquivalenceReport::Undecided { .. } => Some(PrunedBy::SearchExhausted),
        }
    }

    pub fn nodes(&self) -> u64 {
        match self {
            EquivalenceReport::Equivalent { nodes, .. }
            | EquivalenceReport::NotEquivalent { nodes, .. }
            | EquivalenceReport::Undecided { nodes } => *nodes,
        }
    }
}

/// Invariants of one code used by the search.
struct Profile<'a> {
    code: &'a LinearCode,
    n: usize,
    /// `col_sig[j][w]`: weight-`w` codewords with a 1 at coordinate `j`.
    col_sig: Vec<Vec<u32>>,
    /// `pair[(i * n + j) * (n + 1) + w]`: weight-`w` codewords covering both
    /// `i` and `j`.
    pair: Vec<u32>,
}

#[inline]
fn bit_of(j: usize, n: usize) -> u32 {
    1 << (n - 1 - j)
}

impl<'a> Profile<'a> {
    fn new(code: &'a LinearCode) -> Self {
        let n = code.n();
        let stride = n + 1;
        let mut col_sig = vec![vec![0u32; stride]; n];
        let mut pair = vec![0u32; n * n * stride];
        let mut support = Vec::with_capacity(n);
        for &c in code.codewords() {
            let w = c.count_ones() as usize;
            support.clear();
            support.extend((0..n).filter(|&j| c & bit_of(j, n) != 0));
            for &i in &support {
                col_sig[i][w] += 1;
                for &j in &support {
                    pair[(i * n + j) * stride + w] += 1;
                }
            }
        }
        Profile {
            code,
            n,
            col_sig,
            pair,
        }
    }

    #[inline]
    fn pair(&self, i: usize, j: usize) -> &[u32] {
        let s = self.n + 1;
        let at = (i * self.n + j) * s;
        &self.pair[at..at + s]
    }
}

struct Search<'a> {
    a: Profile<'a>,
    b: Profile<'a>,
    target: EchelonBasis,
    /// Columns of `a` in assignment order.
    order: Vec<usize>,
    /// Codewords of `a` whose support is first fully assigned at each depth.
    buckets: Vec<Vec<u32>>,
    /// Candidate `b` columns for each `a` column.
    candidates: Vec<Vec<usize>>,
    image: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    cap: u64,
}

enum Outcome {
    Found,
    Exhausted,
    CapHit,
}

impl Search<'_> {
    fn partial_image(&self, word: u32) -> u32 {
        let n = self.a.n;
        let mut out = 0;
        for j in 0..n {
            if word & bit_of(j, n) != 0 {
                out |= bit_of(self.image[j], n);
            }
        }
        out
    }

    fn consistent(&self, depth: usize, col: usize, t: usize) -> bool {
        if self.a.pair(col, col) != self.b.pair(t, t) {
            return false;
        }
        for &prev in &self.order[..depth] {
            if self.a.pair(prev, col) != self.b.pair(self.image[prev], t) {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, depth: usize) -> Outcome {
        if depth == self.a.n {
            return Outcome::Found;
        }
        let col = self.order[depth];
        for ci in 0..self.candidates[col].len() {
            let t = self.candidates[col][ci];
            if self.used[t] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.cap {
                return Outcome::CapHit;
            }
            if !self.consistent(depth, col, t) {
                continue;
            }
            self.image[col] = t;
            let closed = self.buckets[depth]
                .iter()
                .all(|&c| self.target.contains(self.partial_image(c)));
            if !closed {
                continue;
            }
            self.used[t] = true;
            match self.dfs(depth + 1) {
                Outcome::Exhausted => {}
                other => return other,
            }
            self.used[t] = false;
        }
        Outcome::Exhausted
    }
}

fn sorted_signatures(p: &Profile) -> Vec<Vec<u32>> {
    let mut v = p.col_sig.clone();
    v.sort();
    v
}

/// Decides whether some coordinate permutation maps `a` onto `b`, visiting at
/// most `effort_cap` search nodes.
pub fn is_equivalent(a: &LinearCode, b: &LinearCode, effort_cap: u64) -> Result<EquivalenceReport> {
    if a.n() != b.n() || a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            n_a: a.n(),
            k_a: a.k(),
            n_b: b.n(),
            k_b: b.k(),
        });
    }
    if weight_enumerator(a) != weight_enumerator(b) {
        return Ok(EquivalenceReport::NotEquivalent {
            pruned_by: PrunedBy::WeightEnumerator,
            nodes: 0,
        });
    }
    let pa = Profile::new(a);
    let pb = Profile::new(b);
    if sorted_signatures(&pa) != sorted_signatures(&pb) {
        return Ok(EquivalenceReport::NotEquivalent {
            pruned_by: PrunedBy::Signature,
            nodes: 0,
        });
    }
    let n = a.n();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&t| pb.col_sig[t] == pa.col_sig[j]).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (candidates[j].len(), j));

    let mut depth_of = vec![0usize; n];
    for (d, &j) in order.iter().enumerate() {
        depth_of[j] = d;
    }
    let mut buckets = vec![Vec::new(); n];
    for &c in a.codewords() {
        if let Some(last) = (0..n).filter(|&j| c & bit_of(j, n) != 0).map(|j| depth_of[j]).max() {
            buckets[last].push(c);
        }
    }

    let mut search = Search {
        target: EchelonBasis::from_rows(n, b.generator().rows()),
        a: pa,
        b: pb,
        order,
        buckets,
        candidates,
        image: vec![0; n],
        used: vec![false; n],
        nodes: 0,
        cap: effort_cap,
    };
    let outcome = search.dfs(0);
    let nodes = search.nodes.min(effort_cap);
    Ok(match outcome {
        Outcome::Found => {
            let witness = CoordinatePermutation::new(search.image.clone())?;
            debug_assert!(witness.maps(search.a.code, search.b.code));
            EquivalenceReport::Equivalent { witness, nodes }
        }
        Outcome::Exhausted => EquivalenceReport::NotEquivalent {
            pruned_by: PrunedBy::SearchComplete,
            nodes,
        },
        Outcome::CapHit => EquivalenceReport::Undecided { nodes },
    })
}

/// Grouping of codes into equivalence classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Indices into the input list; the first entry of each class is its
    /// representative.
    pub classes: Vec<Vec<usize>>,
    /// Codes that founded a class after at least one undecided comparison.
    pub undecided: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Greedy partition: each code joins the first class whose representative
/// it is equivalent to, or founds a new class.
pub fn partition_classes(codes: &[LinearCode], effort_cap: u64) -> Result<Partition> {
    let mut part = Partition::default();
    for (i, code) in codes.iter().enumerate() {
        let mut joined = false;
        let mut unsure = false;
        for class in part.classes.iter_mut() {
            let report = is_equivalent(&codes[class[0]], code, effort_cap)?;
            if report.is_equivalent() {
                class.push(i);
                joined = true;
                break;
            }
            unsure |= report.is_undecided();
        }
        if !joined {
            part.classes.push(vec![i]);
            if unsure {
                part.undecided.push(i);
            }
        }
    }
    Ok(part)
}
