//! Exact binomial counting, grouped binomial sums over arithmetic
//! progressions, and the trigonometric closed form for those sums.

use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact nonnegative configuration count.
pub type BigCount = BigUint;

/// `C(n, r)`, zero outside `0..=n`.
pub fn binomial(n: u64, r: i64) -> BigCount {
    if r < 0 || r as u64 > n {
        return BigCount::zero();
    }
    let r = (r as u64).min(n - r as u64);
    let mut acc = BigCount::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Row `n` of Pascal's triangle.
pub fn binomial_row(n: u64) -> Vec<BigCount> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut cur = BigCount::one();
    row.push(cur.clone());
    for i in 0..n {
        cur = cur * (n - i) / (i + 1);
        row.push(cur.clone());
    }
    row
}

/// `n! / (c_1! c_2! ...)` for parts summing to `n`.
pub fn multinomial(parts: &[u64]) -> BigCount {
    let mut total = 0u64;
    let mut acc = BigCount::one();
    for &c in parts {
        total += c;
        acc *= binomial(total, c as i64);
    }
    acc
}

/// The progression sum `(n; q, q+p, q+2p, ...)`, i.e. `Σ_i C(n, q + i p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupedSumSpec {
    pub n: u64,
    pub q: u64,
    pub p: u64,
}

impl GroupedSumSpec {
    pub fn new(n: u64, q: u64, p: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument(
                "progression step must be at least 1".into(),
            ));
        }
        Ok(Self { n, q, p })
    }

    /// Lower indices actually reached, i.e. `q, q+p, ...` not exceeding `n`.
    pub fn indices(&self) -> impl Iterator<Item = u64> {
        let GroupedSumSpec { n, q, p } = *self;
        (q..=n).step_by(p.max(1) as usize)
    }
}

pub fn grouped_sum(spec: GroupedSumSpec) -> BigCount {
    spec.indices().map(|r| binomial(spec.n, r as i64)).sum()
}

/// Primed variant: equal to [`grouped_sum`] for `n > 0` and to 1 for `n == 0`.
pub fn grouped_sum_primed(spec: GroupedSumSpec) -> BigCount {
    if spec.n == 0 {
        BigCount::one()
    } else {
        grouped_sum(spec)
    }
}

/// Closed form `(1/p) Σ_{0≤i<p} (2 cos(iπ/p))^n cos(i(n−2q)π/p)` in double precision.
pub fn ramus(spec: GroupedSumSpec) -> f64 {
    let GroupedSumSpec { n, q, p } = spec;
    let pf = p as f64;
    let shift = n as f64 - 2.0 * q as f64;
    let total: f64 = (0..p)
        .map(|i| {
            let theta = i as f64 * PI / pf;
            (2.0 * theta.cos()).powi(n as i32) * (i as f64 * shift * PI / pf).cos()
        })
        .sum();
    total / pf
}

/// The same closed form evaluated with `precision` mantissa bits and rounded
/// to the nearest integer. Double precision cannot resolve integers past 2^53,
/// so this is the path for exact comparison against [`grouped_sum`].
pub fn ramus_rounded(spec: GroupedSumSpec, precision: usize) -> Result<BigCount> {
    let GroupedSumSpec { n, q, p } = spec;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().map_err(|e| Error::Numeric(format!("{e:?}")))?;
    let pi = cc.pi(precision, rm);
    let pf = BigFloat::from_u64(p, precision);
    let two = BigFloat::from_u64(2, precision);
    let shift = n as i64 - 2 * q as i64;

    let mut total = BigFloat::from_u64(0, precision);
    for i in 0..p {
        let theta = pi
            .mul(&BigFloat::from_u64(i, precision), precision, rm)
            .div(&pf, precision, rm);
        let base = two.mul(&theta.cos(precision, rm, &mut cc), precision, rm);
        let power = base.powi(n as usize, precision, rm);
        let phase = pi
            .mul(
                &BigFloat::from_i64(i as i64 * shift, precision),
                precision,
                rm,
            )
            .div(&pf, precision, rm)
            .cos(precision, rm, &mut cc);
        total = total.add(&power.mul(&phase, precision, rm), precision, rm);
    }
    let value = total.div(&pf, precision, rm);
    nearest_nonnegative_integer(&value)
}

fn nearest_nonnegative_integer(x: &BigFloat) -> Result<BigCount> {
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return Err(Error::Numeric("non-finite closed-form value".into()));
    };
    if x.is_zero() {
        return Ok(BigCount::zero());
    }
    // value = M * 2^(exponent - 64 * len) with M the little-endian word string
    let mantissa = BigCount::from_slice(
        &words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect::<Vec<_>>(),
    );
    let shift = exponent as i64 - 64 * words.len() as i64;
    let rounded = if shift >= 0 {
        mantissa << shift as usize
    } else {
        let down = (-shift) as usize;
        (mantissa + (BigCount::one() << (down - 1))) >> down
    };
    if sign == Sign::Neg && !rounded.is_zero() {
        return Err(Error::Numeric(
            "closed form rounded to a negative integer".into(),
        ));
    }
    Ok(rounded)
}

/// Sum of trits modulo 3.
pub fn trit_add(values: &[u8]) -> u8 {
    (values.iter().map(|&v| v as u32).sum::<u32>() % 3) as u8
}
