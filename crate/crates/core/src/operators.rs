//! Rank-preserving variation operators on generator matrices.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{len_mask, EchelonBasis, GeneratorMatrix};

/// Replaces row `i` with a vector drawn uniformly from the complement of the
/// span of the remaining rows. Returns the new matrix and the inserted row.
///
/// The complement is sampled by rejection: draw from F_2^n until the draw
/// falls outside the span (at most half of the space is rejected).
pub fn replace_row<R: Rng + ?Sized>(
    g: &GeneratorMatrix,
    i: usize,
    rng: &mut R,
) -> (GeneratorMatrix, u32) {
    let n = g.n();
    let mut rows = g.rows().to_vec();
    let mut rest = EchelonBasis::new(n);
    for (j, &r) in rows.iter().enumerate() {
        if j != i {
            rest.insert(r);
        }
    }
    let mask = len_mask(n);
    let v = loop {
        let v = rng.gen::<u32>() & mask;
        if !rest.contains(v) {
            break v;
        }
    };
    rows[i] = v;
    (GeneratorMatrix::from_independent_rows(n, rows), v)
}

/// Row-wise mutation: each row in turn is replaced, with probability
/// `p_mut`, by a random vector outside the span of the other rows. Later
/// rows see the earlier replacements.
pub fn mutate<R: Rng + ?Sized>(g: &GeneratorMatrix, p_mut: f64, rng: &mut R) -> GeneratorMatrix {
    mutate_counted(g, p_mut, rng).0
}

/// [`mutate`], also returning how many rows were replaced.
pub fn mutate_counted<R: Rng + ?Sized>(
    g: &GeneratorMatrix,
    p_mut: f64,
    rng: &mut R,
) -> (GeneratorMatrix, usize) {
    let mut current = g.clone();
    let mut triggered = 0;
    for i in 0..g.k() {
        if rng.gen::<f64>() < p_mut {
            current = replace_row(&current, i, rng).0;
            triggered += 1;
        }
    }
    (current, triggered)
}

/// Shuffles the `2k` parent rows together and keeps the first `k` that are
/// linearly independent of the rows kept before them.
pub fn crossover<R: Rng + ?Sized>(
    g1: &GeneratorMatrix,
    g2: &GeneratorMatrix,
    rng: &mut R,
) -> Result<GeneratorMatrix> {
    if g1.n() != g2.n() || g1.k() != g2.k() {
        return Err(Error::DimensionMismatch {
            n_a: g1.n(),
            k_a: g1.k(),
            n_b: g2.n(),
            k_b: g2.k(),
        });
    }
    let (n, k) = (g1.n(), g1.k());
    let mut pool: Vec<u32> = g1.rows().iter().chain(g2.rows()).copied().collect();
    pool.shuffle(rng);
    let mut basis = EchelonBasis::new(n);
    let mut rows = Vec::with_capacity(k);
    for v in pool {
        if basis.insert(v) {
            rows.push(v);
            if rows.len() == k {
                break;
            }
        }
    }
    // either parent alone already has k independent rows
    debug_assert_eq!(rows.len(), k);
    Ok(GeneratorMatrix::from_independent_rows(n, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{subspace_distance, BinMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn replacing_second_row_keeps_rank() {
        let g = GeneratorMatrix::from_strs(&["100", "010"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (h, v) = replace_row(&g, 1, &mut rng);
            assert!(v != 0b000 && v != 0b100);
            assert_eq!(h.rows()[0], 0b100);
            assert_eq!(h.matrix().rank(), 2);
        }
    }

    #[test]
    fn zero_probability_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = GeneratorMatrix::random(4, 8, &mut rng).unwrap();
        let (h, t) = mutate_counted(&g, 0.0, &mut rng);
        assert_eq!(t, 0);
        assert_eq!(h, g);
    }

    #[test]
    fn single_row_mutation_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut zero, mut two) = (0, 0);
        for _ in 0..10_000 {
            let g = GeneratorMatrix::random(4, 8, &mut rng).unwrap();
            let i = rng.gen_range(0..4);
            let (h, v) = replace_row(&g, i, &mut rng);
            let dist = subspace_distance(&g, &h).unwrap();
            let in_old = EchelonBasis::from_rows(8, g.rows()).contains(v);
            match dist {
                0 => {
                    assert!(in_old);
                    zero += 1;
                }
                2 => {
                    assert!(!in_old);
                    two += 1;
                }
                other => panic!("distance {other}"),
            }
        }
        assert!(zero > 0 && two > 0);
    }

    #[test]
    fn mutation_distance_bounded_by_triggered_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let g = GeneratorMatrix::random(6, 12, &mut rng).unwrap();
            let (h, t) = mutate_counted(&g, 0.3, &mut rng);
            assert_eq!(h.matrix().rank(), 6);
            assert!(subspace_distance(&g, &h).unwrap() <= 2 * t);
        }
    }

    #[test]
    fn crossover_of_same_subspace_stays_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let g1 = GeneratorMatrix::random(5, 10, &mut rng).unwrap();
            // another basis of the same space
            let g2 = GeneratorMatrix::new(g1.rref()).unwrap();
            let child = crossover(&g1, &g2, &mut rng).unwrap();
            assert_eq!(child.rref(), g1.rref());
        }
        let id = GeneratorMatrix::new(BinMatrix::identity(6).unwrap()).unwrap();
        let child = crossover(&id, &id, &mut rng).unwrap();
        assert_eq!(child.rref(), *id.matrix());
    }

    #[test]
    fn crossover_rows_come_from_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let g1 = GeneratorMatrix::random(5, 10, &mut rng).unwrap();
            let g2 = GeneratorMatrix::random(5, 10, &mut rng).unwrap();
            let child = crossover(&g1, &g2, &mut rng).unwrap();
            assert_eq!(child.matrix().rank(), 5);
            assert!(child
                .rows()
                .iter()
                .all(|r| g1.rows().contains(r) || g2.rows().contains(r)));
            let sum = EchelonBasis::from_rows(10, &[g1.rows(), g2.rows()].concat());
            assert!(child.rows().iter().all(|&r| sum.contains(r)));
        }
    }

    #[test]
    fn crossover_rejects_mismatched_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = GeneratorMatrix::random(3, 8, &mut rng).unwrap();
        let b = GeneratorMatrix::random(4, 8, &mut rng).unwrap();
        assert!(crossover(&a, &b, &mut rng).is_err());
    }
}
