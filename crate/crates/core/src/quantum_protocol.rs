//! The entanglement-assisted protocol: every party holding a zero bit applies
//! the root gate to its qutrit of `[0]^k`, all parties measure, and each one
//! broadcasts `Y^i + x^i mod 3`. The broadcast trits sum to `G`.

use std::collections::HashMap;

use num_bigint::RandBigInt;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{binomial, trit_add, BigCount};
use crate::error::{Error, Result};
use crate::qudit_sim::{
    classify_sum_class, find_valid_root_branch, root_gate, BranchCheck, LocalGate,
    MeasurementTable, QuditState, RootBranch,
};

/// Largest party count the dense engine accepts (3^13 amplitudes).
pub const MAX_DENSE_PARTIES: usize = 13;

/// Party count must be `3n + 1` with at least four parties.
pub fn validate_party_count(k: usize) -> Result<()> {
    if k < 4 || k % 3 != 1 {
        return Err(Error::InvalidArgument(format!(
            "party count {k} is not of the form 3n+1 with n >= 1"
        )));
    }
    Ok(())
}

/// Distributed inputs: a trit and a bit per party.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RegisterInput {
    y: Vec<u8>,
    x: Vec<u8>,
}

impl RegisterInput {
    pub fn new(y: Vec<u8>, x: Vec<u8>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::InvalidArgument(
                "trit and bit vectors differ in length".into(),
            ));
        }
        validate_party_count(y.len())?;
        if let Some(t) = y.iter().find(|&&t| t > 2) {
            return Err(Error::InvalidArgument(format!("{t} is not a trit")));
        }
        l_of_x(&x)?;
        Ok(Self { y, x })
    }

    pub fn parties(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn zero_count(&self) -> usize {
        self.x.iter().filter(|&&b| b == 0).count()
    }
}

/// `(m / 3) mod 3` where `m` is the number of zero bits.
pub fn l_of_x(x: &[u8]) -> Result<u8> {
    if let Some(b) = x.iter().find(|&&b| b > 1) {
        return Err(Error::Inadmissible(format!("{b} is not a bit")));
    }
    let m = x.iter().filter(|&&b| b == 0).count();
    if m % 3 != 0 {
        return Err(Error::Inadmissible(format!(
            "{m} zero bits is not a multiple of 3"
        )));
    }
    Ok(((m / 3) % 3) as u8)
}

/// `G(Y, X) = ΣY + l(X) mod 3`.
pub fn global_function(input: &RegisterInput) -> u8 {
    let l = l_of_x(&input.x).expect("validated at construction");
    (trit_add(&input.y) + l) % 3
}

/// Every admissible `(Y, X)` for `k` parties, `X`-major.
pub fn enumerate_admissible(k: usize) -> Result<impl Iterator<Item = RegisterInput>> {
    validate_party_count(k)?;
    if k > 20 {
        return Err(Error::EnumerationBound {
            parties: k,
            limit: 20,
        });
    }
    let trit_strings = 3usize.pow(k as u32);
    let inputs = (0u32..1 << k)
        .filter(move |mask| (k as u32 - mask.count_ones()).is_multiple_of(3))
        .flat_map(move |mask| {
            let x: Vec<u8> = (0..k).map(|i| ((mask >> (k - 1 - i)) & 1) as u8).collect();
            (0..trit_strings).map(move |t| RegisterInput {
                y: crate::qudit_sim::digits_of(3, k, t),
                x: x.clone(),
            })
        });
    Ok(inputs)
}

/// Uniform draws from the admissible inputs; never materializes anything of size `3^k`.
///
/// Holds the zero-count weights `C(k, m)` so repeated draws skip the big-integer setup.
#[derive(Debug, Clone)]
pub struct AdmissibleSampler {
    k: usize,
    weights: Vec<(usize, BigCount)>,
    total: BigCount,
}

impl AdmissibleSampler {
    pub fn new(k: usize) -> Result<Self> {
        validate_party_count(k)?;
        let weights: Vec<(usize, BigCount)> = (0..=k)
            .step_by(3)
            .map(|m| (m, binomial(k as u64, m as i64)))
            .collect();
        let total = weights.iter().map(|(_, w)| w).sum();
        Ok(Self { k, weights, total })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RegisterInput {
        let k = self.k;
        let mut pick = rng.gen_biguint_below(&self.total);
        let mut zeros = k;
        for (m, w) in &self.weights {
            if pick < *w {
                zeros = *m;
                break;
            }
            pick -= w;
        }
        let mut x = vec![1u8; k];
        for i in index::sample(rng, k, zeros) {
            x[i] = 0;
        }
        let y = (0..k).map(|_| rng.gen_range(0..3u8)).collect();
        RegisterInput { y, x }
    }
}

pub fn sample_admissible<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<RegisterInput> {
    Ok(AdmissibleSampler::new(k)?.sample(rng))
}

/// Sum of the broadcast trits.
pub fn decode(transmissions: &[u8]) -> u8 {
    trit_add(transmissions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Dense,
    Analytic,
}

/// One execution of the protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolRun {
    pub input: RegisterInput,
    /// Measurement outcomes `x^i`.
    pub outcomes: Vec<u8>,
    /// Broadcast trits `Y^i + x^i mod 3`.
    pub transmissions: Vec<u8>,
    pub decoded: u8,
    pub expected: u8,
    pub engine: Engine,
}

impl ProtocolRun {
    fn finish(input: RegisterInput, outcomes: Vec<u8>, engine: Engine) -> Self {
        let transmissions: Vec<u8> = input
            .y
            .iter()
            .zip(&outcomes)
            .map(|(y, x)| (y + x) % 3)
            .collect();
        let decoded = decode(&transmissions);
        let expected = global_function(&input);
        Self {
            input,
            outcomes,
            transmissions,
            decoded,
            expected,
            engine,
        }
    }

    pub fn success(&self) -> bool {
        self.decoded == self.expected
    }
}

/// Pre-measurement state for one bit pattern.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub state: QuditState,
    /// `(class, phase)` if the state is a phased sum-class state.
    pub class: Option<(u8, Complex64)>,
    table: MeasurementTable,
}

/// State-vector engine; caches the evolved state per bit pattern since `Y` never touches it.
#[derive(Debug, Clone)]
pub struct DenseEngine {
    gate: LocalGate,
    tolerance: f64,
    cache: HashMap<Vec<u8>, PreparedState>,
}

impl DenseEngine {
    pub fn new(branch: RootBranch) -> Result<Self> {
        Ok(Self::with_gate(root_gate(3, Some(branch))?))
    }

    /// Engine driven by an arbitrary local gate (used to exercise failure paths).
    pub fn with_gate(gate: LocalGate) -> Self {
        Self {
            gate,
            tolerance: 1e-10,
            cache: HashMap::new(),
        }
    }

    /// Builds `[0]^k` and applies the gate at every zero bit.
    pub fn evolve(&self, x: &[u8]) -> Result<QuditState> {
        let k = x.len();
        if k > MAX_DENSE_PARTIES {
            return Err(Error::StateTooLarge {
                dim: 3,
                parties: k,
                limit: 3usize.pow(MAX_DENSE_PARTIES as u32),
            });
        }
        let mut state = QuditState::sum_class(k, 0, 3)?;
        for (i, _) in x.iter().enumerate().filter(|(_, &b)| b == 0) {
            state.apply_local_in_place(&self.gate, i + 1)?;
        }
        Ok(state)
    }

    pub fn prepare(&mut self, x: &[u8]) -> Result<&PreparedState> {
        if !self.cache.contains_key(x) {
            let state = self.evolve(x)?;
            let class = classify_sum_class(&state, self.tolerance);
            let table = MeasurementTable::new(&state);
            self.cache.insert(
                x.to_vec(),
                PreparedState {
                    state,
                    class,
                    table,
                },
            );
        }
        Ok(&self.cache[x])
    }

    pub fn run<R: Rng + ?Sized>(
        &mut self,
        input: &RegisterInput,
        rng: &mut R,
    ) -> Result<ProtocolRun> {
        let outcomes = self.prepare(&input.x)?.table.sample(rng);
        Ok(ProtocolRun::finish(input.clone(), outcomes, Engine::Dense))
    }
}

/// One-shot dense run with the validated branch.
pub fn run_dense<R: Rng + ?Sized>(input: &RegisterInput, rng: &mut R) -> Result<ProtocolRun> {
    let branch = find_valid_root_branch(1e-10)?.branch;
    DenseEngine::new(branch)?.run(input, rng)
}

/// Evidence that the class-rotation property holds, required by [`AnalyticEngine`].
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCertificate {
    pub branch: BranchCheck,
    pub parties: Vec<usize>,
    pub patterns_checked: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

/// Verifies the root branch and, for every admissible bit pattern at each `k`,
/// that the evolved state is `c·[l(X)]^k` with `|c| = 1`.
pub fn verify_lemma(parties: &[usize], tolerance: f64) -> Result<LemmaCertificate> {
    let branch = find_valid_root_branch(tolerance)?;
    let engine = DenseEngine::new(branch.branch)?;
    verify_lemma_with(&engine, branch, parties, tolerance)
}

pub fn verify_lemma_with(
    engine: &DenseEngine,
    branch: BranchCheck,
    parties: &[usize],
    tolerance: f64,
) -> Result<LemmaCertificate> {
    if !branch.passed {
        return Err(Error::VerificationFailed(format!(
            "root branch {} failed",
            branch.branch
        )));
    }
    let mut patterns_checked = 0;
    let mut max_deviation: f64 = branch.class_deviation.max(branch.cube_deviation);
    for &k in parties {
        validate_party_count(k)?;
        for mask in 0u32..1 << k {
            let x: Vec<u8> = (0..k).map(|i| ((mask >> (k - 1 - i)) & 1) as u8).collect();
            let Ok(l) = l_of_x(&x) else { continue };
            let state = engine.evolve(&x)?;
            let target = QuditState::sum_class(k, l, 3)?;
            let c = crate::qudit_sim::overlap(&target, &state);
            let dev = state
                .max_deviation_from(&target, c)
                .max((c.norm() - 1.0).abs());
            max_deviation = max_deviation.max(dev);
            if dev > tolerance {
                return Err(Error::VerificationFailed(format!(
                    "k = {k}, X = {}: deviation {dev:e} from class {l}",
                    crate::qudit_sim::render_digits(&x)
                )));
            }
            patterns_checked += 1;
        }
    }
    Ok(LemmaCertificate {
        branch,
        parties: parties.to_vec(),
        patterns_checked,
        max_deviation,
        tolerance,
    })
}

/// Samples outcomes directly from the class `l(X)` without building any state.
#[derive(Debug, Clone)]
pub struct AnalyticEngine {
    certificate: LemmaCertificate,
}

impl AnalyticEngine {
    pub fn new(certificate: LemmaCertificate) -> Result<Self> {
        if !certificate.branch.passed || certificate.patterns_checked == 0 {
            return Err(Error::VerificationFailed(
                "certificate does not cover any verified pattern".into(),
            ));
        }
        Ok(Self { certificate })
    }

    pub fn certificate(&self) -> &LemmaCertificate {
        &self.certificate
    }

    pub fn run<R: Rng + ?Sized>(&self, input: &RegisterInput, rng: &mut R) -> ProtocolRun {
        let k = input.parties();
        let l = l_of_x(&input.x).expect("validated at construction");
        let mut outcomes: Vec<u8> = (0..k - 1).map(|_| rng.gen_range(0..3u8)).collect();
        let partial = trit_add(&outcomes);
        outcomes.push((l + 3 - partial) % 3);
        ProtocolRun::finish(input.clone(), outcomes, Engine::Analytic)
    }
}
