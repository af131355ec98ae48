//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p emme --test acceptance`. The process exits non-zero
//! when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emme::axioms::{
    check_model_consistency, coherent_reads, derive_hb, derive_rf, derive_sw, is_valid_execution,
    tear_free_reads, CandidateExecution,
};
use emme::coverage::{
    default_predicates, eval_cube_vector, minimize, predicate_by_id, synthesize, Cube, Dnf,
};
use emme::exec::{enumerate_executions, reconstruct_values, ValidExecution};
use emme::frontend::{emit_source, parse_str};
use emme::litmus::{
    classify, generate_litmus, ingest_observed, parse_expected_header, run_harness, EngineConfig,
    RunReport, Verdict,
};
use emme::progen::{enumerate_programs, sample_corpus, GenConfig};
use emme::program::{ControlValuation, EventId, EventKind, Order};
use emme::relation::Relation3;
use emme::value::{Value, ViewKind};

use common::{engine_signatures, oracle, oracle_signatures, MIXED};

/// Wall-clock limits, pinned here so the tolerances are visible in one place.
const CANDIDATE_LIMIT: Duration = Duration::from_secs(1);
const BRANCHES_LIMIT: Duration = Duration::from_secs(10);
const PERF_LIMIT: Duration = Duration::from_secs(10);
const PERF_SLACK_LIMIT: Duration = Duration::from_secs(30);
const PERF_SLACK_COUNT: usize = 2;
const COVERAGE_LIMIT: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;

fn ev(n: usize) -> EventId {
    EventId(n - 1)
}

fn rbf(triples: &[(usize, usize, u32)]) -> Relation3 {
    triples.iter().map(|&(r, w, b)| (ev(r), ev(w), b)).collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn reads_from(x: &ValidExecution, r: usize, w: usize, value: i128) -> bool {
    x.witness.rf.iter().any(|(a, b)| a == ev(r) && b == ev(w))
        && x.witness.rf.iter().filter(|(a, _)| *a == ev(r)).count() == 1
        && x.witness.values.get(&ev(r)) == Some(&Value::Int(value))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p = parse_str(MIXED).map_err(|e| e.to_string())?;
    let ce = CandidateExecution::new(
        &p,
        ControlValuation(vec![false]),
        rbf(&[(4, 1, 0), (3, 2, 0), (3, 6, 1)]),
    );
    let w = is_valid_execution(&ce).ok_or("candidate rejected")?;
    let values = reconstruct_values(&p, &ce.cv, &ce.rbf).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        values[&ev(3)] == Value::Int(769),
        format!("ev3 = {}", values[&ev(3)]),
    )?;
    ensure(w.values[&ev(3)] == Value::Int(769), "witness value differs")?;
    ensure(elapsed < CANDIDATE_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("ev3 = 769 in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = parse_str(MIXED).map_err(|e| e.to_string())?;
    let ve = enumerate_executions(&p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let then = ve
        .iter()
        .any(|x| x.cv.0 == [true] && reads_from(x, 4, 2, 1));
    let els = ve
        .iter()
        .any(|x| x.cv.0 == [false] && reads_from(x, 4, 1, 0));
    ensure(then, "no THEN execution where ev4 reads 1 from ev2")?;
    ensure(els, "no ELSE execution where ev4 reads 0 from init")?;
    let expected = oracle_signatures(&p);
    ensure(
        ve.len() == expected.len(),
        format!("{} executions, oracle {}", ve.len(), expected.len()),
    )?;
    ensure(
        engine_signatures(&p, &ve) == expected,
        "execution sets differ from the oracle",
    )?;
    ensure(elapsed < BRANCHES_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} executions (oracle {}) in {elapsed:?}",
        ve.len(),
        expected.len()
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cfg = GenConfig {
        blocks: vec![2],
        views: vec![ViewKind::I8],
        orders: vec![Order::Unordered, Order::SeqCst],
        kinds: vec![
            EventKind::Read,
            EventKind::Write,
            EventKind::ReadModifyWrite,
        ],
        max_threads: 2,
        allow_branches: false,
        ..GenConfig::default()
    };
    let (mut programs, mut executions) = (0usize, 0usize);
    for n in 1..=4 {
        for p in enumerate_programs(&cfg.clone().with_events(n)).map_err(|e| e.to_string())? {
            let ve = enumerate_executions(&p).map_err(|e| e.to_string())?;
            if engine_signatures(&p, &ve) != oracle_signatures(&p) {
                return Err(format!("mismatch on\n{}", emit_source(&p)));
            }
            programs += 1;
            executions += ve.len();
        }
    }
    Ok(format!(
        "{programs} programs, {executions} executions agree in {:?}",
        start.elapsed()
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let report = check_model_consistency(4);
    ensure(
        report.is_ok(),
        format!(
            "{} violations, first: {:?}",
            report.violations.len(),
            report.violations.first()
        ),
    )?;
    Ok(format!(
        "{} programs, {} witnesses, 0 violations in {:?}",
        report.programs,
        report.witnesses,
        start.elapsed()
    ))
}

fn criterion_5() -> Outcome {
    let cfg = GenConfig {
        event_count: 7,
        max_threads: 3,
        blocks: vec![4],
        views: vec![ViewKind::I8, ViewKind::I16, ViewKind::I32],
        allow_branches: true,
        ..GenConfig::default()
    };
    let programs = sample_corpus(&cfg, 20, 2024).map_err(|e| e.to_string())?;
    let mut times = Vec::new();
    for p in &programs {
        let start = Instant::now();
        enumerate_executions(p).map_err(|e| format!("{e} on\n{}", emit_source(p)))?;
        times.push(start.elapsed());
    }
    let slow = times.iter().filter(|&&t| t >= PERF_LIMIT).count();
    let worst = times.iter().max().copied().unwrap_or_default();
    ensure(
        slow <= PERF_SLACK_COUNT && worst < PERF_SLACK_LIMIT,
        format!("{slow} programs over {PERF_LIMIT:?}, worst {worst:?}"),
    )?;
    Ok(format!(
        "20 programs, worst {worst:?}, {slow} over {PERF_LIMIT:?}"
    ))
}

fn criterion_6() -> Outcome {
    let cfg = GenConfig {
        event_count: 5,
        max_threads: 3,
        blocks: vec![2],
        views: vec![ViewKind::I8, ViewKind::I16],
        allow_branches: true,
        ..GenConfig::default()
    };
    let preds = default_predicates();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut worst = Duration::ZERO;
    for p in sample_corpus(&cfg, 400, 6).map_err(|e| e.to_string())? {
        let ve = enumerate_executions(&p).map_err(|e| e.to_string())?;
        let mut keys: Vec<String> = ve
            .iter()
            .map(|x| x.output_key(&p))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if keys.len() < 5 {
            continue;
        }
        keys.shuffle(&mut rng);
        let take = rng.gen_range(1..keys.len());
        let observed: BTreeSet<String> = keys[..take].iter().cloned().collect();
        let start = Instant::now();
        let r = synthesize(&p, &ve, &observed, &preds).map_err(|e| e.to_string())?;
        worst = worst.max(start.elapsed());
        for x in &ve {
            let c = eval_cube_vector(&p, x, &preds);
            let holds = if observed.contains(&x.output_key(&p)) {
                r.sigma_obs.eval(&c)
            } else {
                r.sigma_unobs.eval(&c)
            };
            ensure(
                holds,
                format!("witness outside its formula in\n{}", emit_source(&p)),
            )?;
        }
        for (sigma, delta) in [
            (&r.sigma_obs, &r.delta_obs),
            (&r.sigma_unobs, &r.delta_unobs),
        ] {
            ensure(
                sigma.truth_table() == Dnf::from_cubes(preds.len(), delta).truth_table(),
                "minimized formula changed the function",
            )?;
        }
        checked += 1;
        if checked == 25 {
            break;
        }
    }
    ensure(
        checked == 25,
        format!("only {checked} programs with at least 5 outputs"),
    )?;
    ensure(worst < COVERAGE_LIMIT, format!("synthesis took {worst:?}"))?;
    let all: Vec<Cube> = (0..1u32 << 11)
        .step_by(3)
        .map(|m| (0..11).map(|i| m >> i & 1 == 1).collect())
        .collect();
    ensure(
        minimize(11, &all).truth_table() == Dnf::from_cubes(11, &all).truth_table(),
        "dense 11-variable minimization",
    )?;
    Ok(format!("25 programs, worst synthesis {worst:?}"))
}

fn criterion_7() -> Outcome {
    let p = parse_str("var x = new SharedArrayBuffer();\nThread t1 { x-I8[0] = 1; }\nThread t2 { print(x-I8[0]); }")
        .map_err(|e| e.to_string())?;
    let ve = enumerate_executions(&p).map_err(|e| e.to_string())?;
    let observed: BTreeSet<String> = ["t2:ev3=0".to_string()].into();
    let pi = vec![predicate_by_id("R2H").ok_or("no R2H")?];
    let r = synthesize(&p, &ve, &observed, &pi).map_err(|e| e.to_string())?;
    let obs = r.sigma_obs.display(&r.predicates).to_string();
    let unobs = r.sigma_unobs.display(&r.predicates).to_string();
    ensure(
        obs == "R2H" && unobs == "!R2H",
        format!("SIGMA_OBS = {obs}, SIGMA_UNOBS = {unobs}"),
    )?;
    ensure(r.comparison.obs_implies_not_unobs, "formulas overlap")?;
    Ok(format!(
        "SIGMA_OBS = {obs}, SIGMA_UNOBS = {unobs}, disjoint"
    ))
}

fn criterion_8() -> Outcome {
    let cfg = GenConfig {
        event_count: 4,
        max_threads: 3,
        blocks: vec![2],
        views: vec![ViewKind::I8, ViewKind::I16],
        allow_branches: true,
        ..GenConfig::default()
    };
    let mut corpus = sample_corpus(&cfg, 10, 8).map_err(|e| e.to_string())?;
    corpus.push(parse_str(MIXED).map_err(|e| e.to_string())?);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for (i, p) in corpus.iter().enumerate() {
        let t = generate_litmus(p, &enumerate_executions(p).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ensure(
            parse_expected_header(&t.source).ok() == Some(t.expected_outputs.clone()),
            "header round trip",
        )?;
        let expected: Vec<String> = t.expected_outputs.iter().cloned().collect();
        let cases: [(&str, Vec<String>, Verdict); 3] = [
            ("all", expected.clone(), Verdict::Exact),
            (
                "one",
                expected[..1].to_vec(),
                if expected.len() == 1 {
                    Verdict::Exact
                } else {
                    Verdict::Subset
                },
            ),
            ("bad", vec!["t9:ev99=7".to_string()], Verdict::Violation),
        ];
        for (name, lines, want) in cases {
            let file = dir.path().join(format!("{i}-{name}.txt"));
            std::fs::write(
                &file,
                lines.iter().map(|l| format!("{l}\n")).collect::<String>(),
            )
            .map_err(|e| e.to_string())?;
            let engine = EngineConfig::new(format!(
                "sed -n \"$(( {{run}} % {} + 1 ))p\" '{}'",
                lines.len(),
                file.display()
            ));
            let report = run_harness(&engine, &t, lines.len() as u64).map_err(|e| e.to_string())?;
            runs += report.runs;
            ensure(
                classify(&report, &t.expected_outputs).verdict == want,
                format!("mock `{name}` misclassified"),
            )?;
            let log = std::fs::read_to_string(&file).map_err(|e| e.to_string())?;
            let from_log = RunReport::new(
                ingest_observed(&log).map_err(|e| e.to_string())?,
                &t.expected_outputs,
            );
            ensure(
                classify(&from_log, &t.expected_outputs).verdict == want,
                format!("log `{name}` misclassified"),
            )?;
        }
    }
    Ok(format!(
        "{} programs, {runs} mock runs classified",
        corpus.len()
    ))
}

fn criterion_9() -> Outcome {
    let src = "var x = new SharedArrayBuffer();\nThread a { x-I16[0] = 1; }\nThread b { x-I16[0] = 2; }\nThread c { print(x-I16[0]); }";
    let p = parse_str(src).map_err(|e| e.to_string())?;
    let torn = CandidateExecution::new(
        &p,
        ControlValuation::default(),
        rbf(&[(4, 2, 0), (4, 3, 1)]),
    );
    ensure(
        !tear_free_reads(&torn, &derive_rf(&torn.rbf)),
        "two-writer read passed TFR",
    )?;
    ensure(
        is_valid_execution(&torn).is_none(),
        "two-writer read accepted",
    )?;
    let tear = parse_str(&src.replace("print(", "tear print(")).map_err(|e| e.to_string())?;
    let ok = CandidateExecution::new(
        &tear,
        ControlValuation::default(),
        rbf(&[(4, 2, 0), (4, 3, 1)]),
    );
    ensure(
        tear_free_reads(&ok, &derive_rf(&ok.rbf)),
        "tear read failed TFR",
    )?;
    ensure(
        oracle::check(&tear, &[], &[(3, 1, 0), (3, 2, 1)]).is_some(),
        "oracle rejects tear read",
    )?;

    let p =
        parse_str("var x = new SharedArrayBuffer();\nThread t { x-I8[0] = 1; print(x-I8[0]); }")
            .map_err(|e| e.to_string())?;
    let hb_of = |ce: &CandidateExecution| {
        derive_hb(ce.program, &ce.cv, &derive_sw(ce, &derive_rf(&ce.rbf)))
            .map_err(|e| format!("{e:?}"))
    };
    let shadowed = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 1, 0)]));
    ensure(
        !coherent_reads(&shadowed, &hb_of(&shadowed)?),
        "shadowed init read passed CR",
    )?;
    ensure(
        is_valid_execution(&shadowed).is_none(),
        "shadowed init read accepted",
    )?;
    let latest = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 2, 0)]));
    ensure(
        coherent_reads(&latest, &hb_of(&latest)?),
        "latest write failed CR",
    )?;
    Ok("TFR two-writer and shadowed-init CR vectors behave".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ELSE candidate reads 769", criterion_1),
        ("both branches are enumerated", criterion_2),
        ("oracle equivalence up to 4 events", criterion_3),
        ("model consistency at bound 4", criterion_4),
        ("7-event performance envelope", criterion_5),
        ("coverage synthesis correctness", criterion_6),
        ("R2H separation", criterion_7),
        ("litmus classification", criterion_8),
        ("TFR and CR unit vectors", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
