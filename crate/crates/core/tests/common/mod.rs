//! Shared test oracles, independent of the library's computation paths:
//! exact rational arithmetic for the burst-probability formula and a
//! brute-force free-distance search over encoded words.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use convbounds::codec::{encode, Trellis};

/// C(n, k) as an exact integer; zero when k > n.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn big(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact probability of the error class: C(w,e1) * C(ns-w, e_all-e1) *
/// p^e_all * (1-p)^(ns-e_all).
pub fn rational_class_prob(
    e_all: u32,
    e1: u32,
    s: u32,
    w: u32,
    n: u32,
    p: &BigRational,
) -> BigRational {
    let bits = n * s;
    if e1 > e_all {
        return BigRational::zero();
    }
    let q = BigRational::one() - p;
    big(binomial(w, e1))
        * big(binomial(bits - w, e_all - e1))
        * p.pow(e_all as i32)
        * q.pow((bits - e_all) as i32)
}

/// Exact rational transcription of the burst-probability double sum with
/// its even-weight tie term. Impossible classes contribute zero through
/// vanishing binomials rather than being skipped.
pub fn rational_p_burst(s: u32, w: u32, n: u32, p: &BigRational) -> BigRational {
    let bits = n * s;
    let half = w / 2;
    let mut total = BigRational::zero();
    for i in half + 1..=bits {
        for i1 in half + 1..=w.min(i) {
            total += rational_class_prob(i, i1, s, w, n, p);
        }
    }
    if w.is_multiple_of(2) {
        let mut tie = BigRational::zero();
        for i in w / 2..=bits - w / 2 {
            tie += rational_class_prob(i, w / 2, s, w, n, p);
        }
        total += tie / big(BigUint::from(2u32));
    }
    total
}

/// True when `value` is within `tol` relative error of the exact rational,
/// compared entirely in rational arithmetic.
pub fn within_rel(value: f64, exact: &BigRational, tol: f64) -> bool {
    if exact.is_zero() {
        return value == 0.0;
    }
    let v = BigRational::from_float(value).expect("finite value");
    let tol = BigRational::from_float(tol).expect("finite tolerance");
    (v - exact).abs() <= tol * exact.abs()
}

/// Minimum Hamming weight over all zero-terminated codewords of nonzero
/// information sequences up to `max_info_len` bits.
pub fn brute_force_free_distance(trellis: &Trellis, max_info_len: usize) -> u32 {
    let mut best = u32::MAX;
    for len in 1..=max_info_len {
        for mask in 1u64..(1u64 << len) {
            let info: Vec<bool> = (0..len).map(|i| (mask >> i) & 1 == 1).collect();
            best = best.min(encode(&info, trellis).weight());
        }
    }
    best
}
