//! Truth tables, algebraic normal forms and the fast Möbius transform.
//!
//! Both tables are packed `2^n`-bit arrays. Entry `i` lives in word `i / 64`
//! at bit `i % 64`; the index of an input `x` is its integer value with `x_1`
//! as the most significant bit. An ANF coefficient `a_I` sits at the index of
//! the characteristic vector of `I`, so its degree is `popcount(index)`.

use crate::error::{Error, Result};

/// Masks selecting positions whose bit `b` is clear, for the six axes that
/// fit inside one `u64`.
const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

pub const MAX_VARS: usize = 24;

fn words_for(n: usize) -> usize {
    (1usize << n).div_ceil(64)
}

fn check_vars(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VARS {
        Err(Error::UnsupportedLength(n))
    } else {
        Ok(())
    }
}

/// In-place Möbius butterfly over `n` variables: for each axis, XOR every
/// entry whose axis bit is 0 into its partner with the bit set.
pub(crate) fn mobius_in_place(words: &mut [u64], n: usize) {
    debug_assert_eq!(words.len(), words_for(n));
    for (axis, &mask) in LOW_HALF.iter().enumerate().take(n.min(6)) {
        let shift = 1u32 << axis;
        for w in words.iter_mut() {
            *w ^= (*w & mask) << shift;
        }
    }
    for axis in 6..n {
        let stride = 1usize << (axis - 6);
        for block in words.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h ^= *l;
            }
        }
    }
}

#[inline]
fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1u64 << (i & 63);
}

macro_rules! bit_table {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, Hash, Debug)]
        pub struct $name {
            n: usize,
            words: Vec<u64>,
        }

        impl $name {
            pub fn zeros(n: usize) -> Result<Self> {
                check_vars(n)?;
                Ok($name {
                    n,
                    words: vec![0; words_for(n)],
                })
            }

            /// Builds a table from `2^n` entries in index order.
            pub fn from_bits(bits: &[bool]) -> Result<Self> {
                let n = bits.len().trailing_zeros() as usize;
                if !bits.len().is_power_of_two() {
                    return Err(Error::InvalidShape(format!(
                        "table length {} is not a power of two",
                        bits.len()
                    )));
                }
                let mut t = Self::zeros(n)?;
                for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
                    set_bit(&mut t.words, i);
                }
                Ok(t)
            }

            pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Self {
                debug_assert_eq!(words.len(), words_for(n));
                $name { n, words }
            }

            #[inline]
            pub fn n(&self) -> usize {
                self.n
            }

            #[inline]
            pub fn len(&self) -> usize {
                1 << self.n
            }

            pub fn is_empty(&self) -> bool {
                false
            }

            #[inline]
            pub fn get(&self, idx: usize) -> bool {
                assert!(idx < self.len());
                get_bit(&self.words, idx)
            }

            pub fn set(&mut self, idx: usize, value: bool) {
                assert!(idx < self.len());
                let bit = 1u64 << (idx & 63);
                if value {
                    self.words[idx >> 6] |= bit;
                } else {
                    self.words[idx >> 6] &= !bit;
                }
            }

            pub fn words(&self) -> &[u64] {
                &self.words
            }

            pub fn count_ones(&self) -> usize {
                self.words.iter().map(|w| w.count_ones() as usize).sum()
            }
        }
    };
}

bit_table!(TruthTable);
bit_table!(AnfTable);

impl TruthTable {
    /// Indicator function of a set of inputs.
    pub fn indicator(n: usize, support: &[u32]) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for &x in support {
            let x = x as usize;
            if x >= t.len() {
                return Err(Error::InvalidShape(format!("input {x} outside F_2^{n}")));
            }
            set_bit(&mut t.words, x);
        }
        Ok(t)
    }
}

/// ANF coefficients: `a_I` is the XOR of `f(x)` over all `x` with
/// `supp(x) ⊆ I`.
pub fn mobius_transform(t: &TruthTable) -> AnfTable {
    let mut words = t.words.clone();
    mobius_in_place(&mut words, t.n);
    AnfTable::from_words(t.n, words)
}

/// Truth table of an ANF; the transform over F_2 is its own inverse.
pub fn inverse_mobius(a: &AnfTable) -> TruthTable {
    let mut words = a.words.clone();
    mobius_in_place(&mut words, a.n);
    TruthTable::from_words(a.n, words)
}

/// Packed mask of the indices whose popcount is `< d`.
pub fn low_degree_mask(n: usize, d: usize) -> Vec<u64> {
    let mut mask = vec![0u64; words_for(n)];
    for i in 0..(1usize << n) {
        if (i.count_ones() as usize) < d {
            set_bit(&mut mask, i);
        }
    }
    mask
}

#[inline]
pub(crate) fn count_masked(words: &[u64], mask: &[u64]) -> usize {
    words
        .iter()
        .zip(mask)
        .map(|(w, m)| (w & m).count_ones() as usize)
        .sum()
}

/// Number of nonzero coefficients of degree strictly less than `d`.
pub fn count_coeffs_below(a: &AnfTable, d: usize) -> usize {
    count_masked(&a.words, &low_degree_mask(a.n, d))
}

/// Indices of `0..2^n` grouped by popcount.
pub fn indices_by_degree(n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); n + 1];
    for i in 0..(1u32 << n) {
        out[i.count_ones() as usize].push(i);
    }
    out
}

/// Smallest `|I|` with `a_I = 0`, or `n + 1` when every coefficient is set.
/// For the indicator of a linear code this is the minimum distance.
pub fn min_absent_degree(a: &AnfTable) -> Result<usize> {
    if !a.get(0) {
        return Err(Error::NotLinearIndicator);
    }
    let schedule = indices_by_degree(a.n);
    Ok(schedule
        .iter()
        .position(|level| level.iter().any(|&i| !a.get(i as usize)))
        .unwrap_or(a.n + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::GeneratorMatrix;
    use proptest::prelude::*;

    // Direct evaluation of a_I = XOR_{supp(x) ⊆ I} f(x).
    fn naive_anf(t: &TruthTable) -> AnfTable {
        let mut a = AnfTable::zeros(t.n()).unwrap();
        for i in 0..t.len() {
            let mut acc = false;
            for x in 0..t.len() {
                if x & !i == 0 {
                    acc ^= t.get(x);
                }
            }
            a.set(i, acc);
        }
        a
    }

    fn table_strategy(max_n: usize) -> impl Strategy<Value = TruthTable> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), 1 << n)
                .prop_map(|bits| TruthTable::from_bits(&bits).unwrap())
        })
    }

    #[test]
    fn zero_and_constant_tables() {
        let z = TruthTable::zeros(5).unwrap();
        assert_eq!(mobius_transform(&z).count_ones(), 0);
        let one = TruthTable::from_bits(&[true; 32]).unwrap();
        let a = mobius_transform(&one);
        assert!(a.get(0));
        assert_eq!(a.count_ones(), 1);
        assert_eq!(inverse_mobius(&a), one);
        assert_eq!(inverse_mobius(&mobius_transform(&z)), z);
    }

    #[test]
    fn repetition_code_indicator() {
        let t = TruthTable::indicator(3, &[0b000, 0b111]).unwrap();
        let a = mobius_transform(&t);
        assert_eq!(a, naive_anf(&t));
        for i in 0..8usize {
            assert_eq!(a.get(i), i.count_ones() <= 2, "a_{i:03b}");
        }
        assert_eq!(count_coeffs_below(&a, 3), 7);
        assert_eq!(min_absent_degree(&a).unwrap(), 3);
    }

    #[test]
    fn single_point_at_zero_gives_all_coefficients() {
        for n in 1..=12 {
            let t = TruthTable::indicator(n, &[0]).unwrap();
            assert_eq!(mobius_transform(&t).count_ones(), 1 << n);
        }
    }

    #[test]
    fn full_space_has_distance_one() {
        let t = TruthTable::from_bits(&[true; 16]).unwrap();
        assert_eq!(min_absent_degree(&mobius_transform(&t)).unwrap(), 1);
    }

    #[test]
    fn hamming_code_distance_three() {
        let g = GeneratorMatrix::from_strs(&["1000110", "0100101", "0010011", "0001111"]).unwrap();
        let t = TruthTable::indicator(7, &g.codewords()).unwrap();
        let a = mobius_transform(&t);
        assert_eq!(min_absent_degree(&a).unwrap(), 3);
        let brute = g.codewords().iter().filter(|&&c| c != 0).map(|c| c.count_ones()).min();
        assert_eq!(brute, Some(3));
    }

    #[test]
    fn count_below_edge_cases() {
        let z = AnfTable::zeros(4).unwrap();
        for d in 1..=5 {
            assert_eq!(count_coeffs_below(&z, d), 0);
        }
        let mut a = AnfTable::zeros(4).unwrap();
        assert_eq!(count_coeffs_below(&a, 1), 0);
        a.set(0, true);
        a.set(3, true);
        assert_eq!(count_coeffs_below(&a, 1), 1);
    }

    #[test]
    fn rejects_non_indicator() {
        let a = AnfTable::zeros(3).unwrap();
        assert_eq!(min_absent_degree(&a), Err(Error::NotLinearIndicator));
    }

    proptest! {
        #[test]
        fn fast_transform_matches_definition(t in table_strategy(8)) {
            prop_assert_eq!(mobius_transform(&t), naive_anf(&t));
        }

        #[test]
        fn involution(t in table_strategy(12)) {
            let a = mobius_transform(&t);
            prop_assert_eq!(inverse_mobius(&a), t);
        }

        #[test]
        fn coefficient_counts_partition_table(t in table_strategy(10)) {
            let a = mobius_transform(&t);
            let n = a.n();
            let zeros = a.len() - a.count_ones();
            prop_assert_eq!(count_coeffs_below(&a, n + 1) + zeros, 1 << n);
        }
    }
}
