//! Dense state vectors over `k` qudits of dimension 2 or 3, local gates,
//! computational-basis measurement, and the cube root of the cyclic shift.
//!
//! Basis strings are indexed with party 1 as the most significant base-`d`
//! digit, so the string `012` over qutrits is index `0·9 + 1·3 + 2`.

use std::f64::consts::PI;
use std::fmt;

pub use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of amplitudes a dense state may hold.
pub const MAX_AMPLITUDES: usize = 1 << 24;

/// Tolerance used when a gate is checked for unitarity at construction.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dimension(d: usize) -> Result<()> {
    match d {
        2 | 3 => Ok(()),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

fn dense_len(d: usize, k: usize) -> Result<usize> {
    check_dimension(d)?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "a state needs at least one party".into(),
        ));
    }
    let mut len: usize = 1;
    for _ in 0..k {
        len = len
            .checked_mul(d)
            .filter(|&l| l <= MAX_AMPLITUDES)
            .ok_or(Error::StateTooLarge {
                dim: d,
                parties: k,
                limit: MAX_AMPLITUDES,
            })?;
    }
    Ok(len)
}

/// Normalized state of `k` qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    d: usize,
    k: usize,
    amps: Vec<Complex64>,
}

impl QuditState {
    pub fn from_amplitudes(d: usize, k: usize, amps: Vec<Complex64>) -> Result<Self> {
        let len = dense_len(d, k)?;
        if amps.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > UNITARY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state norm² is {norm}, expected 1"
            )));
        }
        Ok(Self { d, k, amps })
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(d: usize, digits: &[u8]) -> Result<Self> {
        let len = dense_len(d, digits.len())?;
        let mut amps = vec![ZERO; len];
        amps[index_of(d, digits)?] = ONE;
        Ok(Self {
            d,
            k: digits.len(),
            amps,
        })
    }

    /// Normalized uniform superposition of all strings whose digit sum is `j` mod `d`.
    pub fn sum_class(k: usize, j: u8, d: usize) -> Result<Self> {
        let len = dense_len(d, k)?;
        if j as usize >= d {
            return Err(Error::InvalidArgument(format!(
                "class {j} out of range for d = {d}"
            )));
        }
        let amp = Complex64::new(((len / d) as f64).sqrt().recip(), 0.0);
        let amps = (0..len)
            .map(|idx| {
                if digit_sum(d, idx) == j as usize {
                    amp
                } else {
                    ZERO
                }
            })
            .collect();
        Ok(Self { d, k, amps })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn parties(&self) -> usize {
        self.k
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u8]) -> Result<Complex64> {
        if digits.len() != self.k {
            return Err(Error::InvalidArgument(
                "digit string length differs from party count".into(),
            ));
        }
        Ok(self.amps[index_of(self.d, digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Digits of basis index `idx`, party 1 first.
    pub fn digits_of(&self, idx: usize) -> Vec<u8> {
        digits_of(self.d, self.k, idx)
    }

    /// Largest entrywise distance `|self − c·other|`.
    pub fn max_deviation_from(&self, other: &QuditState, c: Complex64) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - c * b).norm())
            .fold(0.0, f64::max)
    }

    /// Applies `gate` to the tensor factor of `party` (1-based).
    pub fn apply_local(&self, gate: &LocalGate, party: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_local_in_place(gate, party)?;
        Ok(out)
    }

    pub(crate) fn apply_local_in_place(&mut self, gate: &LocalGate, party: usize) -> Result<()> {
        let d = self.d;
        if gate.d != d {
            return Err(Error::DimensionMismatch {
                gate: gate.d,
                state: d,
            });
        }
        if party == 0 || party > self.k {
            return Err(Error::PartyOutOfRange {
                index: party,
                parties: self.k,
            });
        }
        let stride = d.pow((self.k - party) as u32);
        let block = stride * d;
        let mut local = [ZERO; 3];
        for start in (0..self.amps.len()).step_by(block) {
            for offset in start..start + stride {
                for (t, slot) in local.iter_mut().enumerate().take(d) {
                    *slot = self.amps[offset + t * stride];
                }
                for row in 0..d {
                    let mut acc = ZERO;
                    for (col, v) in local.iter().enumerate().take(d) {
                        acc += gate.entry(row, col) * v;
                    }
                    self.amps[offset + row * stride] = acc;
                }
            }
        }
        Ok(())
    }

    /// Samples one full computational-basis outcome.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        MeasurementTable::new(self).sample(rng)
    }
}

/// Cumulative outcome distribution of a state, for repeated sampling.
#[derive(Debug, Clone)]
pub struct MeasurementTable {
    d: usize,
    k: usize,
    cumulative: Vec<f64>,
}

impl MeasurementTable {
    pub fn new(state: &QuditState) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self {
            d: state.d,
            k: state.k,
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.gen::<f64>() * total;
        // first index whose cumulative mass exceeds u, which always carries positive mass
        let mut idx = self.cumulative.partition_point(|&c| c <= u);
        if idx == self.cumulative.len() {
            idx = self.cumulative.partition_point(|&c| c < total);
        }
        digits_of(self.d, self.k, idx)
    }
}

pub fn make_sum_class_state(k: usize, j: u8, d: usize) -> Result<QuditState> {
    QuditState::sum_class(k, j, d)
}

pub fn index_of(d: usize, digits: &[u8]) -> Result<usize> {
    digits.iter().try_fold(0usize, |acc, &digit| {
        if digit as usize >= d {
            Err(Error::InvalidArgument(format!(
                "digit {digit} out of range for d = {d}"
            )))
        } else {
            Ok(acc * d + digit as usize)
        }
    })
}

pub fn digits_of(d: usize, k: usize, mut idx: usize) -> Vec<u8> {
    let mut digits = vec![0u8; k];
    for slot in digits.iter_mut().rev() {
        *slot = (idx % d) as u8;
        idx /= d;
    }
    digits
}

fn digit_sum(d: usize, mut idx: usize) -> usize {
    let mut s = 0;
    while idx > 0 {
        s += idx % d;
        idx /= d;
    }
    s % d
}

/// ASCII rendering of a digit string, party 1 first.
pub fn render_digits(digits: &[u8]) -> String {
    digits.iter().map(|&d| char::from(b'0' + d)).collect()
}

/// A `d×d` unitary acting on one party.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGate {
    d: usize,
    entries: Vec<Complex64>,
}

impl LocalGate {
    /// Row-major entries; rejects non-unitary matrices.
    pub fn new(d: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dimension(d)?;
        if entries.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "a {d}x{d} gate needs {} entries",
                d * d
            )));
        }
        let gate = Self { d, entries };
        let dev = gate.unitarity_deviation();
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(gate)
    }

    pub fn identity(d: usize) -> Result<Self> {
        check_dimension(d)?;
        let entries = (0..d * d)
            .map(|i| if i % (d + 1) == 0 { ONE } else { ZERO })
            .collect();
        Ok(Self { d, entries })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.d + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul(&self, rhs: &LocalGate) -> LocalGate {
        LocalGate {
            d: self.d,
            entries: matmul(self.d, &self.entries, &rhs.entries),
        }
    }

    pub fn pow(&self, n: u32) -> LocalGate {
        (0..n).fold(
            LocalGate::identity(self.d).expect("dimension already checked"),
            |acc, _| acc.mul(self),
        )
    }

    pub fn adjoint(&self) -> LocalGate {
        let d = self.d;
        let entries = (0..d * d)
            .map(|i| self.entries[(i % d) * d + i / d].conj())
            .collect();
        LocalGate { d, entries }
    }

    /// `‖M†M − I‖∞` entrywise.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.d;
        let prod = matmul(d, &self.adjoint().entries, &self.entries);
        prod.iter()
            .enumerate()
            .map(|(i, v)| (v - if i % (d + 1) == 0 { ONE } else { ZERO }).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &LocalGate) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn matmul(d: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for r in 0..d {
        for c in 0..d {
            out[r * d + c] = (0..d).map(|t| a[r * d + t] * b[t * d + c]).sum();
        }
    }
    out
}

/// Cyclic shift `|t⟩ → |t+1 mod d⟩`; NOT for `d = 2`.
pub fn permutation_gate(d: usize) -> Result<LocalGate> {
    check_dimension(d)?;
    let mut entries = vec![ZERO; d * d];
    for col in 0..d {
        entries[((col + 1) % d) * d + col] = ONE;
    }
    Ok(LocalGate { d, entries })
}

/// Primitive cube root of unity `e^{2πi/3}`.
pub fn third_root_of_unity() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// Eigenbasis change `S` with rows `(1, a^r, a^{2r})`; satisfies `S P S⁻¹ = diag(1, a, a²)`.
pub fn eigenbasis_change() -> [[Complex64; 3]; 3] {
    let a = third_root_of_unity();
    let mut s = [[ONE; 3]; 3];
    for (r, row) in s.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = a.powu((r * c) as u32);
        }
    }
    s
}

/// Choice of cube roots for the eigenvalues `a` and `a²` of the cyclic shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootBranch {
    pub r1: u8,
    pub r2: u8,
}

impl RootBranch {
    pub fn new(r1: u8, r2: u8) -> Result<Self> {
        if r1 > 2 || r2 > 2 {
            return Err(Error::InvalidArgument(format!(
                "branch ({r1}, {r2}) out of range"
            )));
        }
        Ok(Self { r1, r2 })
    }

    /// All nine branches, `r1` major.
    pub fn all() -> impl Iterator<Item = RootBranch> {
        (0..3u8).flat_map(|r1| (0..3u8).map(move |r2| RootBranch { r1, r2 }))
    }

    /// Cube roots `(ω₁, ω₂)` with `ω₁³ = a` and `ω₂³ = a²`.
    pub fn roots(&self) -> (Complex64, Complex64) {
        let root = |num: u32| Complex64::from_polar(1.0, 2.0 * PI * num as f64 / 9.0);
        (root(1 + 3 * self.r1 as u32), root(2 + 3 * self.r2 as u32))
    }
}

impl fmt::Display for RootBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r1, self.r2)
    }
}

/// Root of the cyclic shift: `S⁻¹ A^{1/3} S` for qutrits (a branch is
/// required), the square root of NOT `(1/2)[[1+i, 1−i], [1−i, 1+i]]` for qubits.
pub fn root_gate(d: usize, branch: Option<RootBranch>) -> Result<LocalGate> {
    match d {
        2 => {
            let p = Complex64::new(0.5, 0.5);
            let m = Complex64::new(0.5, -0.5);
            LocalGate::new(2, vec![p, m, m, p])
        }
        3 => {
            let branch = branch.ok_or_else(|| {
                Error::InvalidArgument("the qutrit root gate needs a cube-root branch".into())
            })?;
            let (w1, w2) = branch.roots();
            let diag = [ONE, w1, w2];
            let s = eigenbasis_change();
            // S is symmetric with S S† = 3I, so S⁻¹ = conj(S) / 3
            let mut entries = vec![ZERO; 9];
            for r in 0..3 {
                for c in 0..3 {
                    entries[r * 3 + c] = (0..3)
                        .map(|t| s[t][r].conj() * diag[t] * s[t][c])
                        .sum::<Complex64>()
                        / 3.0;
                }
            }
            LocalGate::new(3, entries)
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Outcome of checking one root branch on three qutrits.
#[derive(Debug, Clone, Serialize)]
pub struct BranchCheck {
    pub branch: RootBranch,
    /// `max |U³ − P|`.
    pub cube_deviation: f64,
    /// Constant `c` with `(U⊗U⊗U)[p]³ = c·[p+1]³`, read off at `p = 0`.
    #[serde(serialize_with = "serialize_complex")]
    pub phase: Complex64,
    /// Largest entrywise deviation over the three classes.
    pub class_deviation: f64,
    pub passed: bool,
}

fn serialize_complex<S: serde::Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&crate::rational::render_f64(c.re))?;
    t.serialize_element(&crate::rational::render_f64(c.im))?;
    t.end()
}

/// Checks whether `U⊗U⊗U` rotates every class `[p]³` into `[p+1]³` with one common phase.
pub fn check_root_gate(branch: RootBranch, gate: &LocalGate, tol: f64) -> Result<BranchCheck> {
    let cube_deviation = gate.pow(3).max_abs_diff(&permutation_gate(3)?);
    let mut phase = None;
    let mut class_deviation: f64 = 0.0;
    for p in 0..3u8 {
        let mut evolved = QuditState::sum_class(3, p, 3)?;
        for party in 1..=3 {
            evolved.apply_local_in_place(gate, party)?;
        }
        let target = QuditState::sum_class(3, (p + 1) % 3, 3)?;
        let c = *phase.get_or_insert_with(|| overlap(&target, &evolved));
        class_deviation = class_deviation.max(evolved.max_deviation_from(&target, c));
    }
    let phase = phase.unwrap_or(ONE);
    class_deviation = class_deviation.max((phase.norm() - 1.0).abs());
    let passed = cube_deviation <= tol && class_deviation <= tol;
    Ok(BranchCheck {
        branch,
        cube_deviation,
        phase,
        class_deviation,
        passed,
    })
}

/// `⟨a|b⟩`.
pub fn overlap(a: &QuditState, b: &QuditState) -> Complex64 {
    a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum()
}

/// Checks all nine branches in order.
pub fn scan_root_branches(tol: f64) -> Result<Vec<BranchCheck>> {
    RootBranch::all()
        .map(|b| check_root_gate(b, &root_gate(3, Some(b))?, tol))
        .collect()
}

/// First branch (in `r1`-major order) that passes [`check_root_gate`] at `tol`.
pub fn find_valid_root_branch(tol: f64) -> Result<BranchCheck> {
    scan_root_branches(tol)?
        .into_iter()
        .find(|c| c.passed)
        .ok_or(Error::NoValidBranch)
}

/// If `state = c·[j]^k` (digit sum mod `d`) within `tol`, returns `(j, c)`.
pub fn classify_sum_class(state: &QuditState, tol: f64) -> Option<(u8, Complex64)> {
    let d = state.d;
    let scale = ((state.amps.len() / d) as f64).sqrt();
    (0..d as u8).find_map(|j| {
        let first = (0..state.amps.len()).find(|&i| digit_sum(d, i) == j as usize)?;
        let c = state.amps[first] * scale;
        if (c.norm() - 1.0).abs() > tol {
            return None;
        }
        let expected = c / scale;
        let ok = state.amps.iter().enumerate().all(|(i, a)| {
            let want = if digit_sum(d, i) == j as usize {
                expected
            } else {
                ZERO
            };
            (a - want).norm() <= tol
        });
        ok.then_some((j, c))
    })
}
