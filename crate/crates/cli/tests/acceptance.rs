//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use qtrit_cli::{classical, quantum_run, ClassicalCommand, RunOptions};
use qtrit_core::bounds::{self, BoundParams, Family, ImRule};
use qtrit_core::classical_analysis::{
    best_homogeneous, canonical_division, evaluate_collapsed, evaluate_exhaustive,
    random_two_group_profile, reproduce_worked_example, DivisionName, Strategy, StrategyProfile,
};
use qtrit_core::quantum_protocol::{enumerate_admissible, global_function, DenseEngine, Engine};
use qtrit_core::qudit_sim::{
    classify_sum_class, find_valid_root_branch, make_sum_class_state, permutation_gate, root_gate,
};
use qtrit_core::{grouped_sum, ramus, ramus_rounded, GroupedSumSpec, Probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(p: &Probability) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

fn root_gate_lemma() -> Outcome {
    let check = find_valid_root_branch(1e-10).map_err(|e| e.to_string())?;
    let gate = root_gate(3, Some(check.branch)).map_err(|e| e.to_string())?;
    let cube = gate.pow(3).max_abs_diff(&permutation_gate(3).unwrap());
    ensure(cube <= 1e-10, || format!("U^3 deviates from P by {cube:e}"))?;
    let mut phase = None;
    let mut worst: f64 = cube;
    for p in 0..3u8 {
        let mut state = make_sum_class_state(3, p, 3).unwrap();
        for party in 1..=3 {
            state = state.apply_local(&gate, party).unwrap();
        }
        let target = make_sum_class_state(3, (p + 1) % 3, 3).unwrap();
        let (class, c) =
            classify_sum_class(&state, 1e-10).ok_or("image is not a sum-class state")?;
        ensure(class == (p + 1) % 3, || {
            format!("[{p}] maps to class {class}")
        })?;
        let c0 = *phase.get_or_insert(c);
        worst = worst
            .max(state.max_deviation_from(&target, c0))
            .max((c0.norm() - 1.0).abs());
    }
    ensure(worst <= 1e-10, || format!("deviation {worst:e}"))?;
    Ok(format!(
        "branch {}, phase {:.3}, max deviation {worst:.2e}",
        check.branch,
        phase.unwrap()
    ))
}

fn qubit_swap() -> Outcome {
    let gate = root_gate(2, None).map_err(|e| e.to_string())?;
    let state = make_sum_class_state(2, 0, 2)
        .and_then(|s| s.apply_local(&gate, 1))
        .and_then(|s| s.apply_local(&gate, 2))
        .map_err(|e| e.to_string())?;
    let target = make_sum_class_state(2, 1, 2).unwrap();
    let (class, c) =
        classify_sum_class(&state, 1e-10).ok_or("image is not a parity-class state")?;
    let dev = state
        .max_deviation_from(&target, c)
        .max((c.norm() - 1.0).abs());
    ensure(class == 1 && dev <= 1e-10, || {
        format!("class {class}, deviation {dev:e}")
    })?;
    Ok(format!("phase {c:.3}, deviation {dev:.2e}"))
}

fn quantum_success() -> Outcome {
    let branch = find_valid_root_branch(1e-10)
        .map_err(|e| e.to_string())?
        .branch;
    let mut summary = Vec::new();
    for (k, expected) in [(4usize, 405usize), (7, 94_041)] {
        let mut engine = DenseEngine::new(branch).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let mut total = 0;
        for input in enumerate_admissible(k).map_err(|e| e.to_string())? {
            let run = engine.run(&input, &mut rng).map_err(|e| e.to_string())?;
            ensure(run.decoded == global_function(&input), || {
                format!("k={k}: failure on {input:?}")
            })?;
            total += 1;
        }
        ensure(total == expected, || {
            format!("k={k}: {total} inputs, expected {expected}")
        })?;
        summary.push(format!("k={k} {total}/{total}"));
    }
    for (k, trials, engine) in [
        (10usize, 1000u64, Engine::Dense),
        (100, 100_000, Engine::Analytic),
    ] {
        let report = quantum_run(&RunOptions {
            parties: k,
            trials,
            engine,
            seed: 2024,
            records: false,
        })
        .map_err(|e| e.to_string())?;
        let ok = report.payload["successes"].as_u64() == Some(trials);
        ensure(ok && report.passed, || format!("k={k}: {}", report.payload))?;
        summary.push(format!("k={k} {trials}/{trials}"));
    }
    Ok(summary.join(", "))
}

fn worked_example() -> Outcome {
    let report = reproduce_worked_example();
    let counts: Vec<String> = report.cases.iter().map(|c| c.count.to_string()).collect();
    ensure(counts == ["10", "210", "120", "1"], || {
        format!("counts {counts:?}")
    })?;
    ensure(report.total == 341u32.into(), || {
        format!("total {}", report.total)
    })?;
    ensure(report.success == Probability::from_ratio(210, 341), || {
        format!("success {}", report.success)
    })?;
    Ok(format!(
        "counts {counts:?}, success {}",
        ratio(&report.success)
    ))
}

fn evaluator_equivalence() -> Outcome {
    let mut checked = 0;
    let mut agree = |profile: &StrategyProfile| -> Result<(), String> {
        let a = evaluate_exhaustive(profile, false).map_err(|e| e.to_string())?;
        let b = evaluate_collapsed(profile);
        checked += 1;
        ensure(a == b, || {
            format!("{:?}: exhaustive {a} vs collapsed {b}", profile.groups())
        })
    };
    for k in [4, 7] {
        for name in DivisionName::ALL {
            let s = canonical_division(name, None).map_err(|e| e.to_string())?;
            agree(&StrategyProfile::homogeneous(s, k).unwrap())?;
        }
    }
    for s in Strategy::canonical_all() {
        agree(&StrategyProfile::homogeneous(s, 4).unwrap())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        agree(&random_two_group_profile(4, &mut rng).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{checked} profiles agree exactly"))
}

fn classical_collapse() -> Outcome {
    let pinned = [
        (4usize, "4/5"),
        (13, "1716/2731"),
        (31, "303906051/715827883"),
        (61, "267037541015397434/768614336404564651"),
    ];
    let mut prev: Option<Probability> = None;
    let mut last = Probability::one_third();
    for (k, expected) in pinned {
        let (_, v) = best_homogeneous(k).map_err(|e| e.to_string())?;
        ensure(ratio(&v) == expected, || {
            format!("k={k}: {} != pinned {expected}", ratio(&v))
        })?;
        if let Some(p) = &prev {
            ensure(v <= *p, || format!("k={k}: {v} exceeds previous {p}"))?;
        }
        prev = Some(v.clone());
        last = v;
    }
    let gap = last.gap_to_third_f64();
    ensure(gap < 0.1, || format!("k=61 gap {gap}"))?;
    Ok(format!("non-increasing, k=61 gap {gap:.4e}"))
}

fn ramus_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 0..=60u64 {
        for p in 2..=9u64 {
            for q in 0..p {
                let spec = GroupedSumSpec::new(n, q, p).map_err(|e| e.to_string())?;
                let exact = grouped_sum(spec);
                let rounded = ramus_rounded(spec, 256).map_err(|e| e.to_string())?;
                ensure(rounded == exact, || {
                    format!("(n={n}; q={q}, p={p}): {rounded} != {exact}")
                })?;
                let exact_f = exact.to_string().parse::<f64>().unwrap();
                if exact_f > 0.0 {
                    worst = worst.max((ramus(spec) - exact_f).abs() / exact_f);
                }
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || {
        format!("double-precision relative error {worst:e}")
    })?;
    Ok(format!(
        "{cases} sums exact, double-precision relative error {worst:.2e}"
    ))
}

fn bound_convergence() -> Outcome {
    let j = 60;
    let gap = |f: Family, p: &BoundParams| bounds::bound(f, p).map(|v| v.gap_to_third_f64().abs());
    let mut worst_a: f64 = 0.0;
    for p in bounds::default_grid(Family::A, j, ImRule::Max) {
        worst_a = worst_a.max(gap(Family::A, &p).map_err(|e| e.to_string())?);
    }
    ensure(worst_a < 1e-3, || format!("A gap {worst_a:e}"))?;
    let mut n0 = 0.0;
    for p in bounds::default_grid(Family::N, j, ImRule::Max) {
        let v = bounds::bound(Family::N, &p).map_err(|e| e.to_string())?;
        if p.a == 0 {
            n0 = v.gap_to_third_f64().abs();
            ensure(n0 < 1e-6, || format!("N^0 gap {n0:e}"))?;
        } else {
            ensure(v == Probability::one_third(), || format!("N^{} = {v}", p.a))?;
        }
    }
    let mut worst_fl: f64 = 0.0;
    for family in [Family::F, Family::L] {
        for p in bounds::default_grid(family, j, ImRule::default()) {
            worst_fl = worst_fl.max(gap(family, &p).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst_fl < 1e-2, || format!("F/L gap {worst_fl:e}"))?;
    Ok(format!(
        "A {worst_a:.2e}, N^0 {n0:.2e}, N^1,2 exact, F/L {worst_fl:.2e}"
    ))
}

fn determinism() -> Outcome {
    let runs = || -> Result<Vec<(String, String)>, String> {
        let reports = [
            quantum_run(&RunOptions {
                parties: 7,
                trials: 3000,
                engine: Engine::Dense,
                seed: 99,
                records: true,
            }),
            quantum_run(&RunOptions {
                parties: 40,
                trials: 5000,
                engine: Engine::Analytic,
                seed: 99,
                records: true,
            }),
            classical(&ClassicalCommand::Search {
                parties: 13,
                rounds: 4,
                seed: 99,
            }),
            classical(&ClassicalCommand::Eval {
                parties: 7,
                profile: "001122x4,012012x3".into(),
                long_run: false,
            }),
        ];
        reports
            .into_iter()
            .map(|r| {
                r.map(|r| (r.payload_sha256, serde_json::to_string(&r.payload).unwrap()))
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let first = runs()?;
    let second = runs()?;
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        ensure(a == b, || format!("report {i} differs: {} vs {}", a.0, b.0))?;
    }
    Ok(format!("{} reports identical across two runs", first.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("root-gate lemma", root_gate_lemma),
        ("dimension-2 swap", qubit_swap),
        ("quantum perfect success", quantum_success),
        ("ten-party worked example", worked_example),
        ("evaluator equivalence", evaluator_equivalence),
        ("classical collapse toward 1/3", classical_collapse),
        ("ramus identity", ramus_identity),
        ("bound convergence at j=60", bound_convergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name} — {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name} — {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
