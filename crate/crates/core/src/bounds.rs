//! Upper-bound quotients for groups of `3j + 1` parties sharing one division,
//! and tables of their distance to 1/3.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{
    binomial_row, grouped_sum, grouped_sum_primed, BigCount, GroupedSumSpec,
};
use crate::error::{Error, Result};
use crate::rational::{render_f64, Probability};

/// `+(z)`: `z` when positive, else 0.
pub fn plus_op(z: i64) -> u64 {
    z.max(0) as u64
}

/// How the residue `i_m` is chosen for each zero-count offset `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ImRule {
    /// Worst case: the largest term over the three residues, separately for each `m`.
    #[default]
    Max,
    Fixed(u8),
}

impl ImRule {
    fn residues(&self) -> Vec<u64> {
        match self {
            ImRule::Max => vec![0, 1, 2],
            ImRule::Fixed(r) => vec![*r as u64],
        }
    }
}

impl fmt::Display for ImRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImRule::Max => f.write_str("max"),
            ImRule::Fixed(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for ImRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max" => Ok(ImRule::Max),
            "0" => Ok(ImRule::Fixed(0)),
            "1" => Ok(ImRule::Fixed(1)),
            "2" => Ok(ImRule::Fixed(2)),
            other => Err(Error::Parse(format!("unknown i_m rule {other:?}"))),
        }
    }
}

impl Serialize for ImRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    A,
    F,
    L,
    N,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "F" => Ok(Family::F),
            "L" => Ok(Family::L),
            "N" => Ok(Family::N),
            other => Err(Error::Parse(format!("unknown bound family {other:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Parameter point for one bound quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    pub j: u64,
    /// A-family offset in {0, 1}.
    pub i: u8,
    /// A-family offset in {0, 3, 6}.
    pub m: u8,
    /// F/L/N residue in {0, 1, 2}.
    pub a: u8,
    pub im_rule: ImRule,
}

impl BoundParams {
    pub fn new(j: u64) -> Self {
        Self {
            j,
            i: 0,
            m: 0,
            a: 0,
            im_rule: ImRule::Max,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return Err(Error::InvalidArgument("j must be positive".into()));
        }
        if self.i > 1 || !matches!(self.m, 0 | 3 | 6) || self.a > 2 {
            return Err(Error::InvalidArgument(format!(
                "bound parameters out of range: {self:?}"
            )));
        }
        if let ImRule::Fixed(r) = self.im_rule {
            if r > 2 {
                return Err(Error::InvalidArgument(format!(
                    "i_m residue {r} out of range"
                )));
            }
        }
        Ok(())
    }

    fn group_size(&self) -> u64 {
        3 * self.j + 1
    }
}

fn gs(n: u64, q: u64, p: u64) -> BigCount {
    grouped_sum(GroupedSumSpec { n, q, p })
}

fn gs_primed(n: u64, q: u64, p: u64) -> BigCount {
    grouped_sum_primed(GroupedSumSpec { n, q, p })
}

/// `A^{i,m} = (3j+1; 1+i+m, 10+i+m, …) / (3j+1; 1+i, 4+i, …)`.
pub fn bound_a(params: &BoundParams) -> Result<Probability> {
    params.validate()?;
    let n = params.group_size();
    let (i, m) = (params.i as u64, params.m as u64);
    Ok(Probability::from_counts(
        gs(n, 1 + i + m, 9),
        gs(n, 1 + i, 3),
    ))
}

/// `F^a`: numerator `2·C(n,a) + Σ_{m≥3} C(n,a+m)·(a+m; i_m step 3)`,
/// denominator `Σ_{m≥0} C(n,a+m)·2^{a+m}`, with `n = 3j+1`.
pub fn bound_f(params: &BoundParams) -> Result<Probability> {
    params.validate()?;
    let n = params.group_size();
    let row = binomial_row(n);
    let a = params.a as u64;
    let mut num = BigCount::zero();
    let mut den = BigCount::zero();
    for r in (a..=n).step_by(3) {
        let c = &row[r as usize];
        den += c * (BigCount::one() << r as usize);
        if r == a {
            num += c * 2u32;
        } else {
            let inner = params
                .im_rule
                .residues()
                .into_iter()
                .map(|q| gs(r, q, 3))
                .max();
            num += c * inner.unwrap_or_default();
        }
    }
    Ok(Probability::from_counts(num, den))
}

/// `L^a`: numerator `Σ_m C(n,a+m)·Σ_{b+c≡i_m} (a+m; b step 3)′·(n−a−m; c step 3)′`,
/// denominator `Σ_m C(n,a+m)·2^n`.
pub fn bound_l(params: &BoundParams) -> Result<Probability> {
    params.validate()?;
    let n = params.group_size();
    let row = binomial_row(n);
    let a = params.a as u64;
    let mut num = BigCount::zero();
    let mut den = BigCount::zero();
    for r in (a..=n).step_by(3) {
        let c = &row[r as usize];
        den += c << n as usize;
        let inner = params
            .im_rule
            .residues()
            .into_iter()
            .map(|target| {
                (0..3u64)
                    .map(|b| gs_primed(r, b, 3) * gs_primed(n - r, (target + 3 - b) % 3, 3))
                    .sum::<BigCount>()
            })
            .max();
        num += c * inner.unwrap_or_default();
    }
    Ok(Probability::from_counts(num, den))
}

/// `N^a = Σ_m C(n,m+a)·3^{+(m+a−1)} / Σ_m C(n,m+a)·3^{m+a}`.
pub fn bound_n(params: &BoundParams) -> Result<Probability> {
    params.validate()?;
    let n = params.group_size();
    let row = binomial_row(n);
    let three = BigCount::from(3u32);
    let mut num = BigCount::zero();
    let mut den = BigCount::zero();
    for r in (params.a as u64..=n).step_by(3) {
        let c = &row[r as usize];
        num += c * three.pow(plus_op(r as i64 - 1) as u32);
        den += c * three.pow(r as u32);
    }
    Ok(Probability::from_counts(num, den))
}

pub fn bound(family: Family, params: &BoundParams) -> Result<Probability> {
    match family {
        Family::A => bound_a(params),
        Family::F => bound_f(params),
        Family::L => bound_l(params),
        Family::N => bound_n(params),
    }
}

/// Parameter grid a family ranges over at fixed `j`.
pub fn default_grid(family: Family, j: u64, im_rule: ImRule) -> Vec<BoundParams> {
    match family {
        Family::A => (0..2u8)
            .flat_map(|i| {
                [0u8, 3, 6].map(|m| BoundParams {
                    j,
                    i,
                    m,
                    a: 0,
                    im_rule,
                })
            })
            .collect(),
        _ => (0..3u8)
            .map(|a| BoundParams {
                j,
                i: 0,
                m: 0,
                a,
                im_rule,
            })
            .collect(),
    }
}

/// Largest value over the family's grid at `j`.
pub fn headline(family: Family, j: u64, im_rule: ImRule) -> Result<Probability> {
    default_grid(family, j, im_rule)
        .iter()
        .map(|p| bound(family, p))
        .try_fold(None, |best: Option<Probability>, v| {
            let v = v?;
            Ok(Some(match best {
                Some(b) if b >= v => b,
                _ => v,
            }))
        })?
        .ok_or_else(|| Error::InvalidArgument("empty parameter grid".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub family: Family,
    pub j: u64,
    pub i: u8,
    pub m: u8,
    pub a: u8,
    pub im_rule: ImRule,
    pub value_num: String,
    pub value_den: String,
    pub value_float: String,
    pub gap_float: String,
    #[serde(skip)]
    pub value: Probability,
}

/// One row per `(j, grid point)`, `j`-major.
pub fn convergence_table(
    family: Family,
    js: &[u64],
    grid: impl Fn(u64) -> Vec<BoundParams> + Sync,
) -> Result<Vec<BoundRow>> {
    let points: Vec<BoundParams> = js.iter().flat_map(|&j| grid(j)).collect();
    points
        .par_iter()
        .map(|p| {
            let value = bound(family, p)?;
            Ok(BoundRow {
                family,
                j: p.j,
                i: p.i,
                m: p.m,
                a: p.a,
                im_rule: p.im_rule,
                value_num: value.numer().to_string(),
                value_den: value.denom().to_string(),
                value_float: render_f64(value.to_f64()),
                gap_float: render_f64(value.gap_to_third_f64()),
                value,
            })
        })
        .collect()
}
