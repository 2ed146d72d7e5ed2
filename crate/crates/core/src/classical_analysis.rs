//! Classical one-trit strategies and the exact success probability of the
//! best referee.
//!
//! Each party maps its register value `(y, x)` to a sent trit. The referee sees
//! the `k`-trit transcript and answers, per transcript, the value of `G` that is
//! consistent with the most admissible inputs (uniform prior, ties to the
//! smallest trit). Two independent evaluators compute the resulting success
//! probability: brute-force enumeration and a collapsed residue count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::combinatorics::{binomial, grouped_sum, multinomial, BigCount, GroupedSumSpec};
use crate::error::{Error, Result};
use crate::quantum_protocol::validate_party_count;
use crate::rational::Probability;

/// Register values in serialization order.
pub const REGISTER_VALUES: [(u8, u8); 6] = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)];

/// Party counts beyond this need the long-run override for brute force.
pub const EXHAUSTIVE_LIMIT: usize = 7;
pub const LONG_RUN_LIMIT: usize = 10;

fn register_index(y: u8, x: u8) -> usize {
    2 * y as usize + x as usize
}

/// Per-party map from register value to sent trit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy([u8; 6]);

impl Strategy {
    pub fn new(table: [u8; 6]) -> Result<Self> {
        if table.iter().any(|&t| t > 2) {
            return Err(Error::InvalidArgument(format!(
                "{table:?} sends a non-trit"
            )));
        }
        Ok(Self(table))
    }

    pub fn table(&self) -> [u8; 6] {
        self.0
    }

    pub fn send(&self, y: u8, x: u8) -> u8 {
        self.0[register_index(y, x)]
    }

    /// Register values mapped to `t`.
    pub fn cell(&self, t: u8) -> Vec<(u8, u8)> {
        REGISTER_VALUES
            .iter()
            .copied()
            .filter(|&(y, x)| self.send(y, x) == t)
            .collect()
    }

    /// Renames sent trits through `perm`.
    pub fn relabel(&self, perm: [u8; 3]) -> Strategy {
        Strategy(self.0.map(|t| perm[t as usize]))
    }

    /// Representative of the relabeling class: labels numbered by first appearance.
    pub fn canonical(&self) -> Strategy {
        let mut map = [u8::MAX; 3];
        let mut next = 0;
        Strategy(self.0.map(|t| {
            if map[t as usize] == u8::MAX {
                map[t as usize] = next;
                next += 1;
            }
            map[t as usize]
        }))
    }

    /// All 729 tables in lexicographic order.
    pub fn all() -> impl Iterator<Item = Strategy> {
        (0..729u32).map(|mut i| {
            let mut t = [0u8; 6];
            for slot in t.iter_mut().rev() {
                *slot = (i % 3) as u8;
                i /= 3;
            }
            Strategy(t)
        })
    }

    /// One table per relabeling class (122 of them).
    pub fn canonical_all() -> Vec<Strategy> {
        Strategy::all().filter(|s| s.canonical() == *s).collect()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|t| write!(f, "{t}"))
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes();
        if bytes.len() != 6 || bytes.iter().any(|b| !(b'0'..=b'2').contains(b)) {
            return Err(Error::Parse(format!(
                "{s:?} is not a 6-character trit string"
            )));
        }
        let mut table = [0u8; 6];
        for (slot, b) in table.iter_mut().zip(bytes) {
            *slot = b - b'0';
        }
        Ok(Strategy(table))
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sorted cell sizes of a division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisionType(pub [u8; 3]);

impl fmt::Display for DivisionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a},{b},{c})")
    }
}

impl Serialize for DivisionType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn division_type(s: &Strategy) -> DivisionType {
    let mut sizes = [0u8; 3];
    for t in s.0 {
        sizes[t as usize] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    DivisionType(sizes)
}

/// Named divisions, identified by the cell sent as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivisionName {
    A,
    B,
    C,
    D,
    E,
    F,
    H,
    I,
    J,
    K,
    L,
    M,
    N,
    O,
}

impl DivisionName {
    pub const ALL: [DivisionName; 14] = [
        Self::A,
        Self::B,
        Self::C,
        Self::D,
        Self::E,
        Self::F,
        Self::H,
        Self::I,
        Self::J,
        Self::K,
        Self::L,
        Self::M,
        Self::N,
        Self::O,
    ];

    /// Number of free trit slots (α, β, γ, δ in order).
    pub fn slot_count(&self) -> usize {
        use DivisionName::*;
        match self {
            A | B | C | D | E | F | L => 0,
            N | O => 1,
            H | I | J | K => 3,
            M => 4,
        }
    }

    /// The 0-cell, given slot values `[α, β, γ, δ]`.
    fn zero_cell(&self, s: &[u8]) -> Vec<(u8, u8)> {
        use DivisionName::*;
        match self {
            A => vec![(0, 0), (0, 1)],
            B => vec![(1, 0), (0, 1)],
            C => vec![(1, 1), (0, 1)],
            D => vec![(2, 0), (0, 1)],
            E => vec![(2, 1), (0, 1)],
            F => vec![(1, 0), (1, 1), (0, 1)],
            H => vec![(s[2], 0), (s[1], 1), (s[0], 1)],
            I => vec![(s[2], 1), (s[1], 0), (s[0], 0)],
            J => vec![(s[2], 1), (s[1], 1), (s[0], 1)],
            K => vec![(s[2], 0), (s[1], 0), (s[0], 0)],
            L => vec![(1, 0), (0, 0), (1, 1), (0, 1)],
            M => vec![(s[3], 0), (s[2], 0), (s[1], 1), (s[0], 1)],
            N => vec![(s[0], 0), (2, 1), (1, 1), (0, 1)],
            O => vec![(s[0], 1), (2, 0), (1, 0), (0, 0)],
        }
    }
}

impl FromStr for DivisionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DivisionName::ALL
            .into_iter()
            .find(|d| format!("{d:?}").eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown division {s:?}")))
    }
}

/// Completes a 0-cell into a strategy: leftover values, in register order,
/// fill cell 1 with the first half (rounded up) and cell 2 with the rest.
pub fn division_from_zero_cell(cell: &[(u8, u8)]) -> Result<Strategy> {
    let mut table = [u8::MAX; 6];
    for &(y, x) in cell {
        if y > 2 || x > 1 {
            return Err(Error::InvalidArgument(format!(
                "({y},{x}) is not a register value"
            )));
        }
        let slot = &mut table[register_index(y, x)];
        if *slot == 0 {
            return Err(Error::InvalidArgument(format!(
                "({y},{x}) appears twice in the 0-cell"
            )));
        }
        *slot = 0;
    }
    let leftover: Vec<usize> = (0..6).filter(|&i| table[i] != 0).collect();
    let first = leftover.len().div_ceil(2);
    for (n, &i) in leftover.iter().enumerate() {
        table[i] = if n < first { 1 } else { 2 };
    }
    Ok(Strategy(table))
}

/// Named division with explicit slot values, or the lexicographically smallest
/// valid slots when `slots` is `None`.
pub fn canonical_division(name: DivisionName, slots: Option<&[u8]>) -> Result<Strategy> {
    let n = name.slot_count();
    match slots {
        Some(s) => {
            if s.len() != n || s.iter().any(|&t| t > 2) {
                return Err(Error::InvalidArgument(format!(
                    "{name:?} takes {n} trit slot values"
                )));
            }
            division_from_zero_cell(&name.zero_cell(s))
        }
        None => (0..3usize.pow(n as u32))
            .map(|mut i| {
                let mut s = vec![0u8; n];
                for slot in s.iter_mut().rev() {
                    *slot = (i % 3) as u8;
                    i /= 3;
                }
                s
            })
            .find_map(|s| division_from_zero_cell(&name.zero_cell(&s)).ok())
            .ok_or_else(|| Error::InvalidArgument(format!("{name:?} has no valid slot values"))),
    }
}

/// One strategy per party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyProfile {
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Result<Self> {
        validate_party_count(strategies.len())?;
        Ok(Self { strategies })
    }

    pub fn homogeneous(strategy: Strategy, k: usize) -> Result<Self> {
        Self::new(vec![strategy; k])
    }

    pub fn parties(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Distinct strategies with their multiplicities, in table order.
    pub fn groups(&self) -> Vec<(Strategy, usize)> {
        let mut map = BTreeMap::new();
        for s in &self.strategies {
            *map.entry(*s).or_insert(0usize) += 1;
        }
        map.into_iter().collect()
    }

    /// Same profile with party `i` swapped to `s`.
    pub fn with_party(&self, i: usize, s: Strategy) -> Self {
        let mut strategies = self.strategies.clone();
        strategies[i] = s;
        Self { strategies }
    }
}

/// Total number of admissible inputs for `k` parties.
pub fn admissible_count(k: usize) -> BigCount {
    grouped_sum(GroupedSumSpec {
        n: k as u64,
        q: 0,
        p: 3,
    }) * BigCount::from(3u32).pow(k as u32)
}

/// Brute force over all admissible inputs.
pub fn evaluate_exhaustive(profile: &StrategyProfile, long_run: bool) -> Result<Probability> {
    let k = profile.parties();
    let limit = if long_run {
        LONG_RUN_LIMIT
    } else {
        EXHAUSTIVE_LIMIT
    };
    if k > limit {
        return Err(Error::EnumerationBound { parties: k, limit });
    }
    let strategies = profile.strategies();
    let mut counts = vec![[0u64; 3]; 3usize.pow(k as u32)];
    let mut regs = vec![0usize; k];
    loop {
        let mut zeros = 0;
        let mut ysum = 0;
        let mut transcript = 0;
        for (s, &v) in strategies.iter().zip(&regs) {
            let (y, x) = REGISTER_VALUES[v];
            zeros += (x == 0) as usize;
            ysum += y as usize;
            transcript = transcript * 3 + s.0[v] as usize;
        }
        if zeros % 3 == 0 {
            counts[transcript][(ysum + zeros / 3) % 3] += 1;
        }
        // odometer over 6^k register assignments
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(referee_success(&counts));
            }
            i -= 1;
            regs[i] += 1;
            if regs[i] < 6 {
                break;
            }
            regs[i] = 0;
        }
    }
}

fn referee_success(counts: &[[u64; 3]]) -> Probability {
    let (best, total) = counts.iter().fold((0u64, 0u64), |(b, t), c| {
        (b + c.iter().max().unwrap(), t + c.iter().sum::<u64>())
    });
    Probability::from_ratio(best, total)
}

/// Counts over the residue `w = 3·ΣY + #zeros (mod 9)`. The input is admissible
/// iff `3 | w`, and then `G = w / 3`.
type Residues = [BigCount; 9];

fn residue_of(y: u8, x: u8) -> usize {
    (3 * y as usize + (x == 0) as usize) % 9
}

fn zero_residues() -> Residues {
    std::array::from_fn(|_| BigCount::zero())
}

fn unit_residues() -> Residues {
    let mut r = zero_residues();
    r[0] = BigCount::from(1u32);
    r
}

fn convolve(a: &Residues, b: &Residues) -> Residues {
    let mut out = zero_residues();
    for (i, ai) in a.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
        for (j, bj) in b.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            out[(i + j) % 9] += ai * bj;
        }
    }
    out
}

/// Per-G counts of a residue vector.
fn project(a: &Residues) -> [BigCount; 3] {
    [a[0].clone(), a[3].clone(), a[6].clone()]
}

/// Counts for one transcript class of the whole profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptClassStats {
    /// Per strategy group, how many of its parties sent 0, 1, 2.
    pub class: Vec<[usize; 3]>,
    /// Admissible inputs behind any single transcript of the class, per value of `G`.
    #[serde(serialize_with = "serialize_counts")]
    pub counts: [BigCount; 3],
    /// Number of transcripts in the class.
    #[serde(serialize_with = "serialize_count")]
    pub multiplicity: BigCount,
}

fn serialize_counts<S: Serializer>(
    c: &[BigCount; 3],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|v| v.to_string()))
}

fn serialize_count<S: Serializer>(c: &BigCount, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(c)
}

struct GroupClass {
    sent: [usize; 3],
    residues: Residues,
    multiplicity: BigCount,
}

/// Every transcript class of one group of `n` parties sharing `strategy`.
fn group_classes(strategy: &Strategy, n: usize) -> Vec<GroupClass> {
    let cells: [Residues; 3] = std::array::from_fn(|t| {
        let mut r = zero_residues();
        for (y, x) in strategy.cell(t as u8) {
            r[residue_of(y, x)] += 1u32;
        }
        r
    });
    let powers: Vec<Vec<Residues>> = cells
        .iter()
        .map(|cell| {
            let mut p = vec![unit_residues()];
            for c in 1..=n {
                let next = convolve(&p[c - 1], cell);
                p.push(next);
            }
            p
        })
        .collect();
    let mut out = Vec::new();
    for c0 in 0..=n {
        for c1 in 0..=n - c0 {
            let c2 = n - c0 - c1;
            let sent = [c0, c1, c2];
            if (0..3).any(|t| sent[t] > 0 && cells[t].iter().all(Zero::is_zero)) {
                continue;
            }
            let residues = convolve(&convolve(&powers[0][c0], &powers[1][c1]), &powers[2][c2]);
            let multiplicity = multinomial(&[c0 as u64, c1 as u64, c2 as u64]);
            out.push(GroupClass {
                sent,
                residues,
                multiplicity,
            });
        }
    }
    out
}

type ClassVisitor<'a> = dyn FnMut(&[[usize; 3]], [BigCount; 3], &BigCount) + 'a;

/// Walks the product of group classes, calling `visit(class, counts, multiplicity)`.
fn for_each_class(
    profile: &StrategyProfile,
    mut visit: impl FnMut(&[[usize; 3]], [BigCount; 3], &BigCount),
) {
    let groups: Vec<Vec<GroupClass>> = profile
        .groups()
        .iter()
        .map(|(s, n)| group_classes(s, *n))
        .collect();
    fn walk(
        groups: &[Vec<GroupClass>],
        acc: &Residues,
        mult: &BigCount,
        class: &mut Vec<[usize; 3]>,
        visit: &mut ClassVisitor,
    ) {
        let Some((head, rest)) = groups.split_first() else {
            visit(class, project(acc), mult);
            return;
        };
        for g in head {
            class.push(g.sent);
            walk(
                rest,
                &convolve(acc, &g.residues),
                &(mult * &g.multiplicity),
                class,
                visit,
            );
            class.pop();
        }
    }
    walk(
        &groups,
        &unit_residues(),
        &BigCount::from(1u32),
        &mut Vec::new(),
        &mut visit,
    );
}

/// All transcript classes of the profile.
pub fn transcript_classes(profile: &StrategyProfile) -> Vec<TranscriptClassStats> {
    let mut out = Vec::new();
    for_each_class(profile, |class, counts, mult| {
        out.push(TranscriptClassStats {
            class: class.to_vec(),
            counts,
            multiplicity: mult.clone(),
        });
    });
    out
}

/// Exact referee success by grouping identical strategies and counting residues.
pub fn evaluate_collapsed(profile: &StrategyProfile) -> Probability {
    let mut best = BigCount::zero();
    let mut total = BigCount::zero();
    for_each_class(profile, |_, counts, mult| {
        let [a, b, c] = &counts;
        best += mult * a.max(b).max(c);
        total += mult * (a + b + c);
    });
    Probability::from_counts(best, total)
}

/// Best strategy used by every party, over all relabeling classes.
pub fn best_homogeneous(k: usize) -> Result<(Strategy, Probability)> {
    validate_party_count(k)?;
    let scored: Vec<(Strategy, Probability)> = Strategy::canonical_all()
        .into_par_iter()
        .map(|s| {
            let p = evaluate_collapsed(&StrategyProfile {
                strategies: vec![s; k],
            });
            (s, p)
        })
        .collect();
    // first maximum in table order
    let best = scored
        .into_iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("non-empty strategy set");
    Ok(best)
}

/// A random profile of two distinct strategies split `n` / `k − n`, `0 < n < k`.
pub fn random_two_group_profile<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<StrategyProfile> {
    validate_party_count(k)?;
    let pick = |rng: &mut R| {
        Strategy::all()
            .nth(rng.gen_range(0..729))
            .expect("in range")
    };
    let first = pick(rng);
    let mut second = pick(rng);
    while second == first {
        second = pick(rng);
    }
    let split = rng.gen_range(1..k);
    let mut strategies = vec![first; split];
    strategies.extend(std::iter::repeat_n(second, k - split));
    StrategyProfile::new(strategies)
}

/// Greedy single-party improvement: each round picks a party at random and
/// switches it to its best response among all relabeling classes.
pub fn local_search<R: Rng + ?Sized>(
    start: &StrategyProfile,
    rounds: usize,
    rng: &mut R,
) -> (StrategyProfile, Probability) {
    let candidates = Strategy::canonical_all();
    let mut profile = start.clone();
    let mut value = evaluate_collapsed(&profile);
    for _ in 0..rounds {
        let party = rng.gen_range(0..profile.parties());
        let (s, v) = candidates
            .par_iter()
            .map(|&s| (s, evaluate_collapsed(&profile.with_party(party, s))))
            .reduce_with(|a, b| if b.1 > a.1 { b } else { a })
            .expect("non-empty candidate set");
        if v > value {
            profile = profile.with_party(party, s);
            value = v;
        }
    }
    (profile, value)
}

/// Admissible inputs consistent with one transcript, indexed by zero count `m`
/// and then by `ΣY mod 3`.
pub fn transcript_counts_by_zeros(
    profile: &StrategyProfile,
    transcript: &[u8],
) -> Result<Vec<[BigCount; 3]>> {
    let k = profile.parties();
    if transcript.len() != k || transcript.iter().any(|&t| t > 2) {
        return Err(Error::InvalidArgument(
            "transcript must hold one trit per party".into(),
        ));
    }
    let mut table: Vec<[BigCount; 3]> = vec![std::array::from_fn(|_| BigCount::zero()); k + 1];
    table[0][0] = BigCount::from(1u32);
    for (s, &t) in profile.strategies().iter().zip(transcript) {
        let mut next: Vec<[BigCount; 3]> = vec![std::array::from_fn(|_| BigCount::zero()); k + 1];
        for (y, x) in s.cell(t) {
            let dz = (x == 0) as usize;
            for m in 0..k {
                for r in 0..3 {
                    if !table[m][r].is_zero() {
                        next[m + dz][(r + y as usize) % 3] += &table[m][r];
                    }
                }
            }
        }
        table = next;
    }
    for (m, row) in table.iter_mut().enumerate() {
        if m % 3 != 0 {
            *row = std::array::from_fn(|_| BigCount::zero());
        }
    }
    Ok(table)
}

/// One zero-count row of the ten-party example.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleCase {
    pub zeros: usize,
    #[serde(serialize_with = "serialize_count")]
    pub count: BigCount,
    /// `G` from `ΣY + (m/3 mod 3)`.
    pub g_value: u8,
    /// Label the worked example prints for this row; it is `g_value + 1 mod 3`.
    pub printed_label: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub parties: usize,
    pub strategy: Strategy,
    pub transcript: String,
    /// Rows ordered by zero count descending.
    pub cases: Vec<ExampleCase>,
    #[serde(serialize_with = "serialize_count")]
    pub total: BigCount,
    #[serde(serialize_with = "serialize_counts")]
    pub counts_by_g: [BigCount; 3],
    pub guess: u8,
    #[serde(serialize_with = "serialize_count")]
    pub majority: BigCount,
    pub success: Probability,
    pub label_note: String,
}

/// Ten parties all using division A, conditioned on the all-zero transcript.
pub fn reproduce_worked_example() -> ExampleReport {
    let k = 10;
    let a = canonical_division(DivisionName::A, None).expect("fixed division");
    let profile = StrategyProfile::homogeneous(a, k).expect("10 = 3·3 + 1");
    let transcript = vec![0u8; k];
    let by_zeros = transcript_counts_by_zeros(&profile, &transcript).expect("valid transcript");
    let mut cases = Vec::new();
    let mut counts_by_g: [BigCount; 3] = std::array::from_fn(|_| BigCount::zero());
    for m in (0..=k).rev().filter(|m| m % 3 == 0) {
        // every party sent 0, so every trit is 0 and only ΣY ≡ 0 survives
        let count = by_zeros[m].iter().sum::<BigCount>();
        let g_value = ((m / 3) % 3) as u8;
        counts_by_g[g_value as usize] += &count;
        cases.push(ExampleCase {
            zeros: m,
            count,
            g_value,
            printed_label: (g_value + 1) % 3,
        });
    }
    let total: BigCount = counts_by_g.iter().sum();
    let guess = (0..3u8)
        .rev()
        .max_by(|&a, &b| counts_by_g[a as usize].cmp(&counts_by_g[b as usize]))
        .unwrap_or(0);
    let majority = counts_by_g[guess as usize].clone();
    ExampleReport {
        parties: k,
        strategy: a,
        transcript: crate::qudit_sim::render_digits(&transcript),
        cases,
        success: Probability::from_counts(majority.clone(), total.clone()),
        total,
        counts_by_g,
        guess,
        majority,
        label_note: "g_value follows G = ΣY + (m/3 mod 3); printed_label is the worked example's \
                     labelling, offset by +1 mod 3. Counts and success are label-independent."
            .into(),
    }
}

/// Binomial weight of each admissible zero count, a sanity aid for reports.
pub fn zero_count_weights(k: usize) -> Vec<(usize, BigCount)> {
    (0..=k)
        .step_by(3)
        .map(|m| (m, binomial(k as u64, m as i64)))
        .collect()
}
