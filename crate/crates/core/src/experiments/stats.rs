//! Two-sample Mann–Whitney U test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Below this smaller-sample size the p-value comes from the exact
/// permutation distribution of the rank sum.
pub const EXACT_THRESHOLD: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// `U` of the first sample: pairs `(x, y)` with `x > y`, ties counting
    /// one half.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: PMethod,
    /// Every observation equal; `p_value` is 1 by convention.
    pub degenerate: bool,
}

/// Pooled midranks, doubled so they stay integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end+1, doubled mean
        let r2 = (start + 1 + end + 1) as u64;
        for &i in &order[start..=end] {
            ranks[i] = r2;
        }
        start = end + 1;
    }
    ranks
}

fn tie_term(pooled: &[f64]) -> f64 {
    let mut sorted = pooled.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut acc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        acc += t * t * t - t;
        i = j + 1;
    }
    acc
}

/// Counts of subsets of size `m` by the sum of their doubled ranks.
fn rank_sum_distribution(ranks: &[u64], m: usize) -> Vec<u128> {
    let max_sum: u64 = {
        let mut r = ranks.to_vec();
        r.sort_unstable_by(|a, b| b.cmp(a));
        r.iter().take(m).sum()
    };
    let width = max_sum as usize + 1;
    let mut dp = vec![vec![0u128; width]; m + 1];
    dp[0][0] = 1;
    for (taken, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        for j in (1..=m.min(taken + 1)).rev() {
            let (lo, hi) = dp.split_at_mut(j);
            let (prev, cur) = (&lo[j - 1], &mut hi[0]);
            for s in (r..width).rev() {
                if prev[s - r] != 0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    dp.swap_remove(m)
}

/// Two-sided Mann–Whitney U test of `a` against `b`.
///
/// Uses the exact rank-sum distribution (with midranks for ties) when the
/// smaller sample has fewer than [`EXACT_THRESHOLD`] observations, otherwise
/// the normal approximation with tie-corrected variance and continuity
/// correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let r2_a: u64 = ranks[..m].iter().sum();
    // 2U = 2R - m(m+1)
    let u = (r2_a as f64 - (m * (m + 1)) as f64) / 2.0;
    let big_n = m + n;
    let exact = m.min(n) < EXACT_THRESHOLD;
    let method = if exact { PMethod::Exact } else { PMethod::Normal };

    if pooled.iter().all(|&x| x == pooled[0]) {
        return Ok(MannWhitney {
            u,
            p_value: 1.0,
            method,
            degenerate: true,
        });
    }

    let p_value = if exact {
        let dist = rank_sum_distribution(&ranks, m);
        let total: u128 = dist.iter().sum();
        let obs = r2_a as usize;
        let lower: u128 = dist[..=obs].iter().sum();
        let upper: u128 = dist[obs..].iter().sum();
        let tail = lower.min(upper) as f64 / total as f64;
        (2.0 * tail).min(1.0)
    } else {
        let (mf, nf, nn) = (m as f64, n as f64, big_n as f64);
        let var = mf * nf / 12.0 * ((nn + 1.0) - tie_term(&pooled) / (nn * (nn - 1.0)));
        let z = ((u - mf * nf / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(MannWhitney {
        u,
        p_value,
        method,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // U by direct pair counting.
    fn pair_u(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for &x in a {
            for &y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    // Two-sided p from every relabelling of the pooled data.
    fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let (m, total) = (a.len(), pooled.len());
        let obs = pair_u(a, b);
        let (mut le, mut ge, mut count) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = {
                let mut x = Vec::new();
                let mut y = Vec::new();
                for (i, &v) in pooled.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        x.push(v)
                    } else {
                        y.push(v)
                    }
                }
                (x, y)
            };
            let u = pair_u(&x, &y);
            count += 1;
            if u <= obs + 1e-9 {
                le += 1;
            }
            if u >= obs - 1e-9 {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / count as f64).min(1.0)
    }

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 50.0);
        assert!(r.p_value >= 0.99);
        let small = mann_whitney_u(&a[..4], &a[..4]).unwrap();
        assert_eq!(small.u, 8.0);
        assert!(small.p_value >= 0.99);
    }

    #[test]
    fn degenerate_and_empty() {
        let r = mann_whitney_u(&[2.0; 9], &[2.0; 12]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(Error::EmptySample));
    }

    #[test]
    fn exact_path_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in 1..=7 {
            for n in 1..=7 {
                for _ in 0..3 {
                    let a: Vec<f64> = (0..m).map(|_| rng.gen_range(0..6) as f64).collect();
                    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
                    let r = mann_whitney_u(&a, &b).unwrap();
                    assert_eq!(r.u, pair_u(&a, &b));
                    if !r.degenerate {
                        assert!((r.p_value - enumerate_p(&a, &b)).abs() < 1e-12, "{a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn complement_identity_and_normal_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let m = rng.gen_range(1..40);
            let n = rng.gen_range(1..40);
            let a: Vec<f64> = (0..m).map(|_| rng.gen_range(0..20) as f64).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0..20) as f64).collect();
            let ab = mann_whitney_u(&a, &b).unwrap();
            let ba = mann_whitney_u(&b, &a).unwrap();
            assert_eq!(ab.u + ba.u, (m * n) as f64);
            assert!((0.0..=1.0).contains(&ab.p_value));
            assert!((ab.p_value - ba.p_value).abs() < 1e-9 || ab.method == PMethod::Exact);
        }
        // shifted samples are clearly separated
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 25.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.method, PMethod::Normal);
        assert!(r.p_value < 1e-6);
    }
}
