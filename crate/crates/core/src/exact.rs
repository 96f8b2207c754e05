//! Exact arithmetic helpers: fixed-precision exponentials, deterministic
//! logarithm thresholds and integer roots.
//!
//! All derandomization math in this crate is exact rational arithmetic.
//! The only irrational quantities are exponentials `e^x`; those are
//! evaluated once per needed exponent, rounded to a fixed dyadic grid,
//! and treated as exact constants from then on. Every comparison the
//! potential arguments rely on has slack far above the grid resolution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational value used throughout the crate.
pub type Rat = BigRational;

/// Fractional bits used when rounding exponentials to the dyadic grid.
pub const EXP_FRAC_BITS: u32 = 128;

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn rat_uint(v: u64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: u64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// 2^k as a rational, k may be negative.
pub fn pow2(k: i64) -> Rat {
    let one = BigInt::one();
    if k >= 0 {
        Rat::from_integer(one << k as usize)
    } else {
        Rat::new(one.clone(), one << (-k) as usize)
    }
}

/// Rounds `v` to the nearest multiple of 2^-frac_bits (ties toward even).
pub fn round_to_grid(v: &Rat, frac_bits: u32) -> Rat {
    let scale = BigInt::one() << frac_bits as usize;
    let scaled = v * Rat::from_integer(scale.clone());
    let rounded = scaled.round();
    Rat::new(rounded.to_integer(), scale)
}

/// e^x rounded to the 2^-EXP_FRAC_BITS grid. Deterministic: exact Taylor
/// summation with a tail cutoff far below the grid, then one rounding.
///
/// Negative arguments are computed as the reciprocal of e^|x| evaluated at
/// extended precision, so the relative error stays below the grid.
pub fn fixed_exp(x: &Rat) -> Rat {
    if x.is_zero() {
        return Rat::one();
    }
    if x.is_negative() {
        let pos = exp_series(&(-x), EXP_FRAC_BITS + 64);
        let inv = Rat::one() / pos;
        return round_to_grid(&inv, EXP_FRAC_BITS);
    }
    let v = exp_series(x, EXP_FRAC_BITS + 64);
    round_to_grid(&v, EXP_FRAC_BITS)
}

/// Exact partial Taylor sum of e^x for x >= 0, truncated once the term
/// drops below 2^-(frac_bits + 16). The partial sum underestimates e^x by
/// less than twice the last term (once terms decay geometrically).
fn exp_series(x: &Rat, frac_bits: u32) -> Rat {
    debug_assert!(!x.is_negative());
    let cutoff = pow2(-((frac_bits + 16) as i64));
    let mut sum = Rat::one();
    let mut term = Rat::one();
    let mut j: u64 = 1;
    loop {
        term = &term * x / rat_uint(j);
        sum += term.clone();
        // only trust the cutoff once the series is decaying
        if term < cutoff && rat_uint(j) > x.clone() {
            break;
        }
        j += 1;
        assert!(j < 100_000, "exp series failed to converge");
    }
    sum
}

/// Table of e^(x/10) for x = 0..=max_x, rounded once each.
pub fn exp_tenth_table(max_x: usize) -> Vec<Rat> {
    (0..=max_x).map(|x| fixed_exp(&ratio(x as i64, 10))).collect()
}

/// Smallest r >= 0 with r^k >= x.
pub fn ceil_nth_root(x: u64, k: u32) -> u64 {
    assert!(k >= 1);
    if x <= 1 || k == 1 {
        return x;
    }
    let mut lo: u64 = 1;
    let mut hi: u64 = x;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pow_at_least(mid, k, x) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn pow_at_least(base: u64, k: u32, target: u64) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.saturating_mul(base as u128);
        if acc >= target as u128 {
            return true;
        }
    }
    acc >= target as u128
}

/// Natural-log coverage threshold: the smallest integer L >= 1 with
/// L * p >= 10 ln N, decided exactly via e^(L p) >= N^10.
///
/// The Taylor partial sum underestimates e^x, so the predicate is
/// conservative; the boundary case cannot occur (e^(Lp) is transcendental
/// for rational Lp != 0 while N^10 is an integer).
pub fn coverage_threshold_nat(n_sets: u64, p: &Rat) -> u64 {
    assert!(p.is_positive());
    if n_sets <= 1 {
        return 1;
    }
    let target = Rat::from_integer(BigInt::from(n_sets).pow(10));
    let pred = |l: u64| -> bool {
        let x = rat_uint(l) * p;
        exp_series(&x, 32) >= target
    };
    let mut hi: u64 = 1;
    while !pred(hi) {
        hi *= 2;
        assert!(hi < 1 << 40, "coverage threshold out of range");
    }
    let mut lo = hi / 2 + 1;
    let mut hi = hi;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo.max(1)
}

/// Base-2 coverage threshold: smallest L >= 1 with L * p >= 10 log2 N.
/// Exact integer comparison: N^(10 p_den) <= 2^(L p_num).
pub fn coverage_threshold_log2(n_sets: u64, p: &Rat) -> u64 {
    assert!(p.is_positive());
    if n_sets <= 1 {
        return 1;
    }
    let p_num = p.numer().clone();
    let p_den = p.denom().clone();
    let den: u64 = (&p_den).try_into().expect("p denominator too large");
    let num: u64 = (&p_num).try_into().expect("p numerator too large");
    let lhs = BigInt::from(n_sets).pow(10 * den as u32);
    let pred = |l: u64| -> bool {
        let rhs = BigInt::one() << (l * num) as usize;
        lhs <= rhs
    };
    let mut hi: u64 = 1;
    while !pred(hi) {
        hi *= 2;
        assert!(hi < 1 << 40, "coverage threshold out of range");
    }
    let mut lo = hi / 2 + 1;
    let mut hi = hi;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo.max(1)
}

/// Smallest integer L with L >= c * s^(1/k) * ln n. Used for the distance
/// oracle's nearest-set size. Decided via exp comparisons on a dyadic
/// upper bound of s^(1/k), keeping the result deterministic.
pub fn scaled_log_threshold(c: u64, s: u64, k: u32, n: u64) -> u64 {
    assert!(k >= 1 && s >= 1);
    if n <= 1 {
        return 1;
    }
    // dyadic upper bound r/2^20 >= s^(1/k), tight to one ulp
    let shift = 20u32;
    let mut lo: u64 = 1 << shift;
    let mut hi: u64 = (ceil_nth_root(s, k) + 1) << shift;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        // mid/2^20 >= s^(1/k)  <=>  mid^k >= s * 2^(20k)
        let lhs = BigInt::from(mid).pow(k);
        let rhs = BigInt::from(s) << (shift * k) as usize;
        if lhs >= rhs {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let root_upper = Rat::new(BigInt::from(lo), BigInt::one() << shift as usize);
    // smallest L with L >= c * root_upper * ln n, via e^(L / (c*root_upper)) >= n
    let target = Rat::from_integer(BigInt::from(n));
    let coeff = rat_uint(c) * root_upper;
    let pred = |l: u64| -> bool {
        let x = rat_uint(l) / coeff.clone();
        exp_series(&x, 32) >= target
    };
    let mut hi: u64 = 1;
    while !pred(hi) {
        hi *= 2;
        assert!(hi < 1 << 40, "log threshold out of range");
    }
    let mut lo = hi / 2 + 1;
    let mut hi = hi;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo.max(1)
}

/// Deterministic decimal rendering of a rational with the given number of
/// fractional digits, rounding half away from zero. Used by reports
/// and traces.
pub fn decimal(v: &Rat, digits: u32) -> String {
    let neg = v.is_negative();
    let a = v.abs();
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = &a * Rat::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let ip = &rounded / &scale;
    let fp = &rounded % &scale;
    let sign = if neg && (!ip.is_zero() || !fp.is_zero()) { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{ip}");
    }
    format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits as usize)
}
