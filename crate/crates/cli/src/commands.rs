use std::time::Instant;

use qtrit_core::bounds::{self, BoundParams, Family, ImRule};
use qtrit_core::classical_analysis::{
    best_homogeneous, canonical_division, division_type, evaluate_collapsed, evaluate_exhaustive,
    local_search, reproduce_worked_example, DivisionName, Strategy, StrategyProfile,
    EXHAUSTIVE_LIMIT, LONG_RUN_LIMIT,
};
use qtrit_core::quantum_protocol::{
    validate_party_count, verify_lemma, verify_lemma_with, AdmissibleSampler, AnalyticEngine,
    DenseEngine, Engine, ProtocolRun, MAX_DENSE_PARTIES,
};
use qtrit_core::qudit_sim::{
    check_root_gate, classify_sum_class, make_sum_class_state, permutation_gate, render_digits,
    root_gate, scan_root_branches, Complex64, LocalGate,
};
use qtrit_core::rational::render_f64;
use qtrit_core::{Error, Probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::envelope::ReportEnvelope;

/// Trials handled by one random stream.
pub const BATCH_TRIALS: u64 = 1024;

pub const SEEDING_SCHEME: &str =
    "ChaCha8 seeded from --seed; trial batch b (1024 trials each) uses stream b";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or arguments; exit code 2.
    Usage(String),
    /// A computation could not complete; exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::Parse(_)
            | Error::EnumerationBound { .. }
            | Error::StateTooLarge { .. }
            | Error::UnsupportedDimension(_)
            | Error::Inadmissible(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    deviation: String,
    detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, deviation: f64, detail: Value) -> Self {
        Self {
            name: name.into(),
            passed,
            deviation: render_f64(deviation),
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub parties: Vec<usize>,
    pub tolerance: f64,
    /// Replace the root gate by a slightly skewed unitary; every gate check must then fail.
    pub tamper: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            parties: vec![4, 7],
            tolerance: 1e-10,
            tamper: false,
        }
    }
}

fn tampered(gate: &LocalGate) -> LocalGate {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let skew = LocalGate::new(
        3,
        vec![
            one,
            zero,
            zero,
            zero,
            one,
            zero,
            zero,
            zero,
            Complex64::from_polar(1.0, 1e-3),
        ],
    )
    .expect("diagonal phase matrix is unitary");
    gate.mul(&skew)
}

pub fn quantum_verify(opts: &VerifyOptions) -> CliResult<ReportEnvelope> {
    let started = Instant::now();
    let tol = opts.tolerance;
    let mut checks = Vec::new();

    let scan = scan_root_branches(tol)?;
    let chosen = scan.iter().find(|c| c.passed).cloned();
    checks.push(Check::new(
        "root-branch-search",
        chosen.is_some(),
        scan.iter()
            .map(|c| c.class_deviation)
            .fold(f64::INFINITY, f64::min),
        json!({
            "selected": chosen.as_ref().map(|c| c.branch.to_string()),
            "branches": scan,
        }),
    ));

    if let Some(chosen) = chosen {
        let mut gate = root_gate(3, Some(chosen.branch))?;
        if opts.tamper {
            gate = tampered(&gate);
        }
        let cube_dev = gate.pow(3).max_abs_diff(&permutation_gate(3)?);
        checks.push(Check::new(
            "cube-root",
            cube_dev <= tol,
            cube_dev,
            json!({}),
        ));

        let rotation = check_root_gate(chosen.branch, &gate, tol)?;
        checks.push(Check::new(
            "class-rotation",
            rotation.passed,
            rotation.class_deviation,
            serde_json::to_value(&rotation).expect("serializable"),
        ));

        let engine = DenseEngine::with_gate(gate);
        for &k in &opts.parties {
            validate_party_count(k)?;
            if k > MAX_DENSE_PARTIES {
                return Err(CliError::Usage(format!(
                    "dense sweep needs k <= {MAX_DENSE_PARTIES}, got {k}"
                )));
            }
            let name = format!("class-sweep-k{k}");
            match verify_lemma_with(&engine, rotation.clone(), &[k], tol) {
                Ok(cert) => checks.push(Check::new(
                    name,
                    true,
                    cert.max_deviation,
                    json!({ "patterns_checked": cert.patterns_checked }),
                )),
                Err(e) => checks.push(Check::new(
                    name,
                    false,
                    f64::NAN,
                    json!({ "error": e.to_string() }),
                )),
            }
        }
    }

    let qubit_gate = root_gate(2, None)?;
    let swapped = make_sum_class_state(2, 0, 2)?
        .apply_local(&qubit_gate, 1)?
        .apply_local(&qubit_gate, 2)?;
    let target = make_sum_class_state(2, 1, 2)?;
    let (passed, dev, phase) = match classify_sum_class(&swapped, tol) {
        Some((1, c)) => (true, swapped.max_deviation_from(&target, c), Some(c)),
        _ => (false, f64::NAN, None),
    };
    checks.push(Check::new(
        "qubit-swap",
        passed,
        dev,
        json!({ "phase": phase.map(|c| [render_f64(c.re), render_f64(c.im)]) }),
    ));

    let passed = checks.iter().all(|c| c.passed);
    let config = json!({
        "k": opts.parties,
        "tolerance": render_f64(tol),
        "tamper": opts.tamper,
    });
    Ok(ReportEnvelope::new(
        "quantum-verify",
        config,
        passed,
        json!({ "checks": checks }),
        started,
    ))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub parties: usize,
    pub trials: u64,
    pub engine: Engine,
    pub seed: u64,
    pub records: bool,
}

#[derive(Debug, Serialize)]
struct RunRecord {
    trial: u64,
    k: usize,
    y: String,
    x: String,
    outcomes: String,
    transmissions: String,
    decoded: u8,
    expected: u8,
    engine: Engine,
    seed: u64,
}

impl RunRecord {
    fn new(trial: u64, seed: u64, run: &ProtocolRun) -> Self {
        Self {
            trial,
            k: run.input.parties(),
            y: render_digits(run.input.y()),
            x: render_digits(run.input.x()),
            outcomes: render_digits(&run.outcomes),
            transmissions: render_digits(&run.transmissions),
            decoded: run.decoded,
            expected: run.expected,
            engine: run.engine,
            seed,
        }
    }
}

struct TrialSummary {
    successes: u64,
    records: Vec<RunRecord>,
}

/// Runs `trials` protocol executions in deterministic batches.
fn run_trials(opts: &RunOptions) -> CliResult<TrialSummary> {
    let k = opts.parties;
    validate_party_count(k)?;
    let analytic = match opts.engine {
        Engine::Dense => {
            if k > MAX_DENSE_PARTIES {
                return Err(CliError::Usage(format!(
                    "the dense engine handles k <= {MAX_DENSE_PARTIES}; use --engine analytic for k = {k}"
                )));
            }
            None
        }
        Engine::Analytic => Some(AnalyticEngine::new(verify_lemma(&[4, 7], 1e-10)?)?),
    };
    let branch = qtrit_core::qudit_sim::find_valid_root_branch(1e-10)?.branch;
    let sampler = AdmissibleSampler::new(k)?;
    let batches = opts.trials.div_ceil(BATCH_TRIALS);
    let results: Vec<CliResult<TrialSummary>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(opts.seed, b);
            let mut dense = DenseEngine::new(branch)?;
            let start = b * BATCH_TRIALS;
            let end = (start + BATCH_TRIALS).min(opts.trials);
            let mut summary = TrialSummary {
                successes: 0,
                records: Vec::new(),
            };
            for trial in start..end {
                let input = sampler.sample(&mut rng);
                let run = match &analytic {
                    Some(engine) => engine.run(&input, &mut rng),
                    None => dense.run(&input, &mut rng)?,
                };
                summary.successes += run.success() as u64;
                if opts.records {
                    summary.records.push(RunRecord::new(trial, opts.seed, &run));
                }
            }
            Ok(summary)
        })
        .collect();
    let mut total = TrialSummary {
        successes: 0,
        records: Vec::new(),
    };
    for r in results {
        let r = r?;
        total.successes += r.successes;
        total.records.extend(r.records);
    }
    Ok(total)
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Dense => "dense",
        Engine::Analytic => "analytic",
    }
}

pub fn quantum_run(opts: &RunOptions) -> CliResult<ReportEnvelope> {
    let started = Instant::now();
    if opts.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let summary = run_trials(opts)?;
    let failures = opts.trials - summary.successes;
    let config = json!({
        "k": opts.parties,
        "trials": opts.trials,
        "engine": engine_name(opts.engine),
        "seed": opts.seed,
        "seeding": SEEDING_SCHEME,
    });
    let mut payload = json!({
        "successes": summary.successes,
        "failures": failures,
        "success_rate": Probability::from_ratio(summary.successes, opts.trials),
    });
    if opts.records {
        payload["records"] = serde_json::to_value(&summary.records).expect("serializable");
    }
    Ok(ReportEnvelope::new(
        "quantum-run",
        config,
        failures == 0,
        payload,
        started,
    ))
}

/// Parses `A`, `001122`, or a comma list of entries with optional `xN` repeats,
/// e.g. `001122x3,012012`. A single entry without a repeat count fills all `k` parties.
pub fn parse_profile(spec: &str, k: usize) -> CliResult<StrategyProfile> {
    let entries: Vec<&str> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let parse_one = |s: &str| -> CliResult<Strategy> {
        if s.len() == 6 {
            return Ok(s.parse::<Strategy>()?);
        }
        let name: DivisionName = s.parse()?;
        Ok(canonical_division(name, None)?)
    };
    let mut strategies = Vec::new();
    if let [single] = entries.as_slice() {
        if !single.contains('x') {
            return Ok(StrategyProfile::homogeneous(parse_one(single)?, k)?);
        }
    }
    for entry in entries {
        let (body, count) = match entry.split_once('x') {
            Some((b, n)) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad repeat count in {entry:?}")))?;
                (b, n)
            }
            None => (entry, 1),
        };
        let s = parse_one(body)?;
        strategies.extend(std::iter::repeat_n(s, count));
    }
    if strategies.len() != k {
        return Err(CliError::Usage(format!(
            "profile lists {} parties, --k is {k}",
            strategies.len()
        )));
    }
    Ok(StrategyProfile::new(strategies)?)
}

#[derive(Debug, Clone)]
pub enum ClassicalCommand {
    Example,
    Eval {
        parties: usize,
        profile: String,
        long_run: bool,
    },
    Search {
        parties: usize,
        rounds: usize,
        seed: u64,
    },
}

fn group_summary(profile: &StrategyProfile) -> Value {
    Value::Array(
        profile
            .groups()
            .into_iter()
            .map(
                |(s, n)| json!({ "strategy": s, "parties": n, "division_type": division_type(&s) }),
            )
            .collect(),
    )
}

pub fn classical(cmd: &ClassicalCommand) -> CliResult<ReportEnvelope> {
    let started = Instant::now();
    match cmd {
        ClassicalCommand::Example => {
            let report = reproduce_worked_example();
            let passed = report.total == 341u32.into() && report.majority == 210u32.into();
            Ok(ReportEnvelope::new(
                "classical-example",
                json!({}),
                passed,
                serde_json::to_value(&report).expect("serializable"),
                started,
            ))
        }
        ClassicalCommand::Eval {
            parties,
            profile,
            long_run,
        } => {
            let k = *parties;
            let prof = parse_profile(profile, k)?;
            let collapsed = evaluate_collapsed(&prof);
            let limit = if *long_run {
                LONG_RUN_LIMIT
            } else {
                EXHAUSTIVE_LIMIT
            };
            let exhaustive = if k <= limit {
                Some(evaluate_exhaustive(&prof, *long_run)?)
            } else {
                None
            };
            let agree = exhaustive.as_ref().map(|e| *e == collapsed);
            let config = json!({ "k": k, "profile": profile, "long_run": long_run });
            let payload = json!({
                "groups": group_summary(&prof),
                "collapsed": collapsed,
                "exhaustive": exhaustive,
                "agree": agree,
                "gap_to_third": render_f64(collapsed.gap_to_third_f64()),
            });
            Ok(ReportEnvelope::new(
                "classical-eval",
                config,
                agree.unwrap_or(true),
                payload,
                started,
            ))
        }
        ClassicalCommand::Search {
            parties,
            rounds,
            seed,
        } => {
            let k = *parties;
            let (best, value) = best_homogeneous(k)?;
            let mut payload = json!({
                "best_homogeneous": {
                    "strategy": best,
                    "division_type": division_type(&best),
                    "probability": value,
                    "gap_to_third": render_f64(value.gap_to_third_f64()),
                },
            });
            if *rounds > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let start = StrategyProfile::homogeneous(best, k)?;
                let (prof, v) = local_search(&start, *rounds, &mut rng);
                payload["local_search"] = json!({
                    "rounds": rounds,
                    "groups": group_summary(&prof),
                    "probability": v,
                    "gap_to_third": render_f64(v.gap_to_third_f64()),
                });
            }
            let config = json!({ "k": k, "rounds": rounds, "seed": seed });
            Ok(ReportEnvelope::new(
                "classical-search",
                config,
                true,
                payload,
                started,
            ))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundsOptions {
    pub family: Family,
    pub js: Vec<u64>,
    pub im_rule: ImRule,
    /// Restrict the grid to one value of `a` (F, L, N) or of `i`/`m` (A).
    pub a: Option<u8>,
    pub i: Option<u8>,
    pub m: Option<u8>,
}

pub fn bounds_table(opts: &BoundsOptions) -> CliResult<ReportEnvelope> {
    let started = Instant::now();
    if opts.js.is_empty() {
        return Err(CliError::Usage("no j values given".into()));
    }
    let grid = |j: u64| -> Vec<BoundParams> {
        bounds::default_grid(opts.family, j, opts.im_rule)
            .into_iter()
            .filter(|p| opts.a.is_none_or(|a| p.a == a))
            .filter(|p| opts.i.is_none_or(|i| p.i == i))
            .filter(|p| opts.m.is_none_or(|m| p.m == m))
            .collect()
    };
    if grid(opts.js[0]).is_empty() {
        return Err(CliError::Usage(
            "parameter filters leave an empty grid".into(),
        ));
    }
    let rows = bounds::convergence_table(opts.family, &opts.js, grid)?;
    let passed = rows.iter().all(|r| {
        let v = r.value.to_f64();
        (0.0..=1.0).contains(&v)
    });
    let config = json!({
        "family": opts.family.to_string(),
        "j": opts.js,
        "im_rule": opts.im_rule.to_string(),
        "a": opts.a,
        "i": opts.i,
        "m": opts.m,
    });
    let payload = json!({ "rows": rows });
    Ok(ReportEnvelope::new(
        "bounds", config, passed, payload, started,
    ))
}

#[derive(Debug, Clone)]
pub struct GapOptions {
    pub parties: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

pub fn gap_report(opts: &GapOptions) -> CliResult<ReportEnvelope> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut passed = true;
    for &k in &opts.parties {
        let engine = if k <= 10 {
            Engine::Dense
        } else {
            Engine::Analytic
        };
        let run = RunOptions {
            parties: k,
            trials: opts.trials,
            engine,
            seed: opts.seed,
            records: false,
        };
        let quantum = Probability::from_ratio(run_trials(&run)?.successes, opts.trials);
        passed &= quantum == Probability::from_ratio(1, 1);
        let (strategy, classical) = best_homogeneous(k)?;
        rows.push(json!({
            "k": k,
            "engine": engine_name(engine),
            "quantum_num": quantum.numer().to_string(),
            "quantum_den": quantum.denom().to_string(),
            "quantum_float": render_f64(quantum.to_f64()),
            "classical_strategy": strategy.to_string(),
            "classical_num": classical.numer().to_string(),
            "classical_den": classical.denom().to_string(),
            "classical_float": render_f64(classical.to_f64()),
            "baseline_float": render_f64(1.0 / 3.0),
            "classical_gap_float": render_f64(classical.gap_to_third_f64()),
        }));
    }
    let config = json!({
        "k": opts.parties,
        "trials": opts.trials,
        "seed": opts.seed,
        "seeding": SEEDING_SCHEME,
    });
    Ok(ReportEnvelope::new(
        "gap-report",
        config,
        passed,
        json!({ "rows": rows }),
        started,
    ))
}

/// CSV rendering of the `rows` array of a report.
pub fn rows_to_csv(envelope: &ReportEnvelope) -> CliResult<String> {
    let rows = envelope.payload["rows"].as_array().ok_or_else(|| {
        CliError::Usage(format!(
            "{} has no tabular output; use --format json",
            envelope.command
        ))
    })?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first().and_then(Value::as_object) {
        writer
            .write_record(first.keys())
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    for row in rows {
        let fields: Vec<String> = row
            .as_object()
            .map(|o| {
                o.values()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect()
            })
            .unwrap_or_default();
        writer
            .write_record(&fields)
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}

/// Parses `5..60:5`, `5..60` (step 1) or `5,10,20`.
pub fn parse_j_values(spec: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Usage(format!("cannot parse j values {spec:?}"));
    if let Some((range, step)) = spec.split_once("..").map(|(lo, rest)| {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        ((lo, hi), step)
    }) {
        let lo: u64 = range.0.trim().parse().map_err(|_| bad())?;
        let hi: u64 = range.1.trim().parse().map_err(|_| bad())?;
        let step: u64 = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step as usize).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}
