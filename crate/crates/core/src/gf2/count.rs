use num_bigint::BigUint;

/// Number of `k`-dimensional subspaces of F_2^n.
///
/// The numerator `(2^n - 1)(2^{n-1} - 1)...(2^{n-k+1} - 1)` is built first and
/// then divided by `(2^k - 1)...(2^1 - 1)`; the division is exact.
pub fn gaussian_binomial(n: u32, k: u32) -> BigUint {
    assert!(k <= n && n <= 64, "gaussian_binomial needs 0 <= k <= n <= 64");
    let one = BigUint::from(1u32);
    let mersenne = |e: u32| (&one << e) - &one;
    let num = (0..k).fold(one.clone(), |acc, i| acc * mersenne(n - i));
    let den = (1..=k).fold(one.clone(), |acc, i| acc * mersenne(i));
    debug_assert!((&num % &den) == BigUint::from(0u32));
    num / den
}

/// Rounds a non-negative integer to `digits` significant digits and renders
/// it as `m.mmm·10^e` in the form `"2.31e11"`. Rounds half up.
pub fn round_significant(x: &BigUint, digits: usize) -> String {
    assert!(digits >= 1);
    let s = x.to_str_radix(10);
    if s.len() <= digits {
        let mut mant = s.clone();
        while mant.len() < digits {
            mant.push('0');
        }
        return format_mantissa(&mant, s.len() - 1);
    }
    let head: BigUint = s[..digits].parse().expect("decimal digits");
    let round_up = s.as_bytes()[digits] >= b'5';
    let mut head = if round_up { head + 1u32 } else { head };
    let mut exponent = s.len() - 1;
    let mut mant = head.to_str_radix(10);
    if mant.len() > digits {
        // 9.99 -> 10.0
        head /= 10u32;
        mant = head.to_str_radix(10);
        exponent += 1;
    }
    format_mantissa(&mant, exponent)
}

fn format_mantissa(mant: &str, exponent: usize) -> String {
    if mant.len() == 1 {
        format!("{mant}e{exponent}")
    } else {
        format!("{}.{}e{}", &mant[..1], &mant[1..], exponent)
    }
}
