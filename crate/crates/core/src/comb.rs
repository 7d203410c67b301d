//! Exact integer combinatorics converted to floating point once per value.

/// Binomial coefficient `C(n, k)` computed by a cancellation-free
/// multiplicative loop in 128-bit integers, then converted to `f64`.
///
/// Panics on 128-bit overflow; the orders supported elsewhere in this crate
/// stay far below that limit.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // exact at every step: acc holds C(n - k + i, i) after iteration i
        acc = acc
            .checked_mul((n - k + i) as u128)
            .expect("binomial overflow")
            / i as u128;
    }
    acc as f64
}

/// Falling factorial ratio `prod_{i=0}^{len-1} (num - i) / (den - i)`.
///
/// Evaluated factor by factor so that intermediate values never overflow and
/// a zero numerator factor short-circuits to an exact zero.
pub fn falling_ratio(num: i64, den: i64, len: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..len as i64 {
        if num - i == 0 {
            return 0.0;
        }
        acc *= (num - i) as f64 / (den - i) as f64;
    }
    acc
}
