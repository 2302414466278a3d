//! Bit-packed linear algebra over F_2.
//!
//! Vectors of length `n <= 32` live in a single `u32`. Coordinate `x_1` is the
//! most significant *used* bit (bit `n - 1`) and `x_n` is bit 0, so the
//! integer value of a vector is also its lexicographic index `idx(x)` in a
//! truth table.

mod basis;
mod count;
mod text;

pub use basis::EchelonBasis;
pub use count::{gaussian_binomial, round_significant};
pub use text::{parse_matrix, parse_generator, write_matrix};

use std::fmt;

use rand::Rng;

use crate::code::LinearCode;
use crate::error::{Error, Result};

pub const MAX_LEN: usize = 32;

#[inline]
pub(crate) fn len_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_LEN {
        Err(Error::UnsupportedLength(n))
    } else {
        Ok(())
    }
}

/// A vector of `n` binary coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    word: u32,
    n: u8,
}

impl BitVec {
    pub fn zero(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(BitVec { word: 0, n: n as u8 })
    }

    /// Builds a vector from its packed word; bits above `n` must be clear.
    pub fn from_word(word: u32, n: usize) -> Result<Self> {
        check_len(n)?;
        if word & !len_mask(n) != 0 {
            return Err(Error::InvalidShape(format!(
                "word {word:#x} has bits beyond length {n}"
            )));
        }
        Ok(BitVec { word, n: n as u8 })
    }

    /// Builds a vector from coordinates `x_1..x_n`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_len(bits.len())?;
        let word = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(BitVec {
            word,
            n: bits.len() as u8,
        })
    }

    #[inline]
    pub fn word(&self) -> u32 {
        self.word
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate `x_i`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len(), "coordinate {i} out of range");
        (self.word >> (self.len() - i)) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.word.count_ones()
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(BitVec {
            word: self.word ^ other.word,
            n: self.n,
        })
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_to_string(self.word, self.len()))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

pub(crate) fn word_to_string(word: u32, n: usize) -> String {
    (1..=n)
        .map(|i| if (word >> (n - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A binary matrix with rows of common length `n`. The row count is free
/// (rref may drop rows, stacking may exceed `n`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    n: usize,
    rows: Vec<u32>,
}

impl BinMatrix {
    pub fn new(n: usize, rows: Vec<u32>) -> Result<Self> {
        check_len(n)?;
        let mask = !len_mask(n);
        if let Some(r) = rows.iter().find(|&&r| r & mask != 0) {
            return Err(Error::InvalidShape(format!(
                "row {r:#x} has bits beyond length {n}"
            )));
        }
        Ok(BinMatrix { n, rows })
    }

    pub fn from_rows(rows: &[BitVec]) -> Result<Self> {
        let n = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| Error::InvalidShape("matrix needs at least one row".into()))?;
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Ok(BinMatrix {
            n,
            rows: rows.iter().map(|r| r.word).collect(),
        })
    }

    /// Parses rows written as `'0'/'1'` strings, e.g. `["100", "011"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        check_len(n)?;
        let mut words = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            words.push(text::parse_row(r, i + 1)?);
        }
        Ok(BinMatrix { n, rows: words })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(BinMatrix {
            n,
            rows: (0..n).map(|i| 1u32 << (n - 1 - i)).collect(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> BitVec {
        BitVec {
            word: self.rows[i],
            n: self.n as u8,
        }
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        EchelonBasis::from_rows(self.n, &self.rows).dim()
    }

    /// Reduced row-echelon form with zero rows removed.
    pub fn rref(&self) -> BinMatrix {
        EchelonBasis::from_rows(self.n, &self.rows).to_rref()
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &BinMatrix) -> Result<BinMatrix> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Ok(BinMatrix { n: self.n, rows })
    }
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.rows.iter().map(|&r| word_to_string(r, self.n)))
            .finish()
    }
}

/// Tests whether `v` lies in the row space of `basis_rref`, which must be in
/// reduced row-echelon form.
pub fn contains(basis_rref: &BinMatrix, v: &BitVec) -> Result<bool> {
    if basis_rref.n != v.len() {
        return Err(Error::LengthMismatch {
            expected: basis_rref.n,
            found: v.len(),
        });
    }
    let mut w = v.word;
    for &row in &basis_rref.rows {
        let pivot = 31 - row.leading_zeros();
        if (w >> pivot) & 1 == 1 {
            w ^= row;
        }
    }
    Ok(w == 0)
}

/// A `k x n` matrix of full rank `k`: the genotype of a candidate code.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GeneratorMatrix(BinMatrix);

impl GeneratorMatrix {
    pub fn new(matrix: BinMatrix) -> Result<Self> {
        let k = matrix.k();
        if k == 0 || k > matrix.n() {
            return Err(Error::InvalidShape(format!(
                "generator matrix needs 1 <= k <= n, got k = {k}, n = {}",
                matrix.n()
            )));
        }
        let rank = matrix.rank();
        if rank != k {
            return Err(Error::RankDeficient { rows: k, rank });
        }
        Ok(GeneratorMatrix(matrix))
    }

    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        Self::new(BinMatrix::from_strs(rows)?)
    }

    /// Wraps rows already known to be independent.
    pub(crate) fn from_independent_rows(n: usize, rows: Vec<u32>) -> Self {
        debug_assert_eq!(EchelonBasis::from_rows(n, &rows).dim(), rows.len());
        GeneratorMatrix(BinMatrix { n, rows })
    }

    #[inline]
    pub fn matrix(&self) -> &BinMatrix {
        &self.0
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.0.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[u32] {
        &self.0.rows
    }

    pub fn rref(&self) -> BinMatrix {
        self.0.rref()
    }

    /// All `2^k` codewords `x . G`, indexed by the message `x` (x_1 most
    /// significant).
    pub fn codewords(&self) -> Vec<u32> {
        let k = self.k();
        let mut out = vec![0u32; 1 << k];
        self.fill_codewords(&mut out);
        out
    }

    /// Writes the codewords into `out`, which must hold `2^k` entries.
    pub(crate) fn fill_codewords(&self, out: &mut [u32]) {
        let k = self.k();
        let rows = &self.0.rows;
        debug_assert_eq!(out.len(), 1 << k);
        out[0] = 0;
        for x in 1usize..(1 << k) {
            let low = x.trailing_zeros() as usize;
            out[x] = out[x & (x - 1)] ^ rows[k - 1 - low];
        }
    }

    /// The phenotype: the code spanned by the rows.
    pub fn span(&self) -> LinearCode {
        LinearCode::from_generator(self)
    }

    /// Uniformly random full-rank `k x n` matrix. Rows are drawn one at a
    /// time and redrawn while they fall in the span of the rows already
    /// accepted, so every ordered basis of every subspace is equally likely.
    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Self> {
        check_len(n)?;
        if k == 0 || k > n {
            return Err(Error::InvalidShape(format!("need 1 <= k <= n, got ({k}, {n})")));
        }
        let mask = len_mask(n);
        let mut basis = EchelonBasis::new(n);
        let mut rows = Vec::with_capacity(k);
        while rows.len() < k {
            let v = rng.gen::<u32>() & mask;
            if basis.insert(v) {
                rows.push(v);
            }
        }
        Ok(GeneratorMatrix(BinMatrix { n, rows }))
    }

    /// Applies a coordinate permutation: coordinate `j` (0-based, x_1 = 0)
    /// moves to `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<GeneratorMatrix> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let rows = self
            .rows()
            .iter()
            .map(|&r| permute_word(r, n, perm))
            .collect();
        GeneratorMatrix::new(BinMatrix { n, rows })
    }
}

/// Moves coordinate `j` of `word` (0-based from x_1) to position `perm[j]`.
pub(crate) fn permute_word(word: u32, n: usize, perm: &[usize]) -> u32 {
    let mut out = 0u32;
    for (j, &target) in perm.iter().enumerate() {
        if (word >> (n - 1 - j)) & 1 == 1 {
            out |= 1 << (n - 1 - target);
        }
    }
    out
}

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratorMatrix{:?}", self.0)
    }
}

/// Free-function form of [`GeneratorMatrix::random`].
pub fn random_full_rank<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<GeneratorMatrix> {
    GeneratorMatrix::random(k, n, rng)
}

/// Free-function form of [`GeneratorMatrix::span`].
pub fn span(g: &GeneratorMatrix) -> LinearCode {
    g.span()
}

/// Subspace distance `2 (k - dim(A ∩ B))` between two row spaces of equal
/// dimension.
pub fn subspace_distance(a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<usize> {
    if a.n() != b.n() || a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            n_a: a.n(),
            k_a: a.k(),
            n_b: b.n(),
            k_b: b.k(),
        });
    }
    let mut basis = EchelonBasis::from_rows(a.n(), a.rows());
    for &r in b.rows() {
        basis.insert(r);
    }
    // dim(A + B) = k + (k - dim(A ∩ B))
    Ok(2 * (basis.dim() - a.k()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, HashMap};

    fn m(rows: &[&str]) -> BinMatrix {
        BinMatrix::from_strs(rows).unwrap()
    }

    fn g(rows: &[&str]) -> GeneratorMatrix {
        GeneratorMatrix::from_strs(rows).unwrap()
    }

    // Row space by brute force over all 2^k combinations.
    fn enumerate_span(mat: &BinMatrix) -> BTreeSet<u32> {
        let k = mat.k();
        (0u32..(1 << k))
            .map(|x| {
                (0..k)
                    .filter(|i| (x >> i) & 1 == 1)
                    .fold(0, |acc, i| acc ^ mat.rows()[i])
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BinMatrix::identity(5).unwrap().rank(), 5);
        assert_eq!(m(&["101", "101"]).rank(), 1);
        let three = m(&["100", "010", "110"]);
        assert_eq!(three.rank(), 2);
        assert_eq!(enumerate_span(&three).len(), 4);
    }

    #[test]
    fn rref_examples() {
        let id = BinMatrix::identity(4).unwrap();
        assert_eq!(id.rref(), id);
        assert_eq!(m(&["110", "010"]).rref(), m(&["100", "010"]));
    }

    #[test]
    fn rref_preserves_span_of_rank_three_matrix() {
        // row 4 = row 1 ^ row 3
        let a = m(&["10110010", "01101100", "00011011", "10101001"]);
        assert_eq!(a.rank(), 3);
        let r = a.rref();
        assert_eq!(r.k(), 3);
        assert_eq!(enumerate_span(&a), enumerate_span(&r));
        assert_eq!(r.rref(), r);
    }

    #[test]
    fn contains_examples() {
        let b = m(&["100"]).rref();
        assert!(contains(&b, &BitVec::zero(3).unwrap()).unwrap());
        assert!(!contains(&b, &BitVec::from_word(0b010, 3).unwrap()).unwrap());
        let b2 = m(&["100", "011"]).rref();
        assert!(contains(&b2, &BitVec::from_word(0b111, 3).unwrap()).unwrap());
        assert!(matches!(
            contains(&b2, &BitVec::zero(4).unwrap()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn span_examples() {
        let c = g(&["111"]).span();
        assert_eq!(c.codewords(), &[0b000, 0b111]);
        let full = GeneratorMatrix::new(BinMatrix::identity(3).unwrap()).unwrap().span();
        let set: BTreeSet<u32> = full.codewords().iter().copied().collect();
        assert_eq!(set, (0..8).collect());
        let c2 = g(&["100", "011"]).span();
        let set: BTreeSet<u32> = c2.codewords().iter().copied().collect();
        assert_eq!(set, BTreeSet::from([0b000, 0b100, 0b011, 0b111]));
    }

    #[test]
    fn generator_rejects_rank_deficiency() {
        assert!(matches!(
            GeneratorMatrix::from_strs(&["110", "110"]),
            Err(Error::RankDeficient { rows: 2, rank: 1 })
        ));
    }

    #[test]
    fn subspace_distance_examples() {
        let a = g(&["1000", "0100"]);
        assert_eq!(subspace_distance(&a, &a).unwrap(), 0);
        assert_eq!(subspace_distance(&g(&["100"]), &g(&["010"])).unwrap(), 2);
        assert_eq!(subspace_distance(&a, &g(&["1000", "0010"])).unwrap(), 2);
        assert!(subspace_distance(&a, &g(&["1000"])).is_err());
    }

    #[test]
    fn subspace_distance_is_metric_on_lines_of_f2_cubed() {
        let lines: Vec<GeneratorMatrix> = (1u32..8)
            .map(|w| GeneratorMatrix::new(BinMatrix::new(3, vec![w]).unwrap()).unwrap())
            .collect();
        for a in &lines {
            for b in &lines {
                let dab = subspace_distance(a, b).unwrap();
                assert_eq!(dab, subspace_distance(b, a).unwrap());
                assert_eq!(dab == 0, a.rref() == b.rref());
                assert_eq!(dab % 2, 0);
                for c in &lines {
                    let dac = subspace_distance(a, c).unwrap();
                    let dcb = subspace_distance(c, b).unwrap();
                    assert!(dab <= dac + dcb);
                }
            }
        }
    }

    #[test]
    fn random_full_rank_trivial_and_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let one = GeneratorMatrix::random(1, 1, &mut rng).unwrap();
        assert_eq!(one.rows(), &[1]);
        for _ in 0..200 {
            let k = rng.gen_range(1..=10);
            let n = rng.gen_range(k..=16);
            let gm = GeneratorMatrix::random(k, n, &mut rng).unwrap();
            assert_eq!(gm.matrix().rank(), k);
        }
    }

    #[test]
    fn random_full_rank_is_uniform_on_lines_of_f2_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for _ in 0..trials {
            let gm = GeneratorMatrix::random(1, 2, &mut rng).unwrap();
            *counts.entry(gm.rows()[0]).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let mut chi2 = 0.0;
        for &c in counts.values() {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "frequency {freq}");
            let e = trials as f64 / 3.0;
            chi2 += (c as f64 - e).powi(2) / e;
        }
        // 2 degrees of freedom, 0.999 quantile
        assert!(chi2 < 13.82, "chi2 = {chi2}");
    }

    #[test]
    fn permute_columns_swaps_coordinates() {
        let a = g(&["1100", "0011"]);
        let p = a.permute_columns(&[0, 2, 1, 3]).unwrap();
        assert_eq!(p.rows(), &[0b1010, 0b0101]);
    }
}
