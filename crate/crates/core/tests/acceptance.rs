//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Run with `cargo test -p rsill-core --test acceptance`.

mod common;

use std::process::ExitCode;

use common::{closed_procs, load, source, CORPUS};
use rsill_core::analysis::{client_potential, measure_script, ClientScript, StoreAnnotations, StoreKind};
use rsill_core::lang::{IndexEnv, Metric, SType, Signature};
use rsill_core::monitor::{bound_report, check_monotone, deep_check, split_phases};
use rsill_core::parser::{parse_program, pretty_program};
use rsill_core::runtime::{run, Pred, RunOptions, Runner, Scheduler, Status, Trace};
use rsill_core::typechecker::{check_signature, min_potential};

/// Index bound for the corpus typechecking sweep.
const SAMPLE_MAX: u64 = 64;
/// Longest script in the exhaustive oracle comparison.
const MAX_SCRIPT: usize = 8;
/// Seeds of the randomized schedules.
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn client_last() -> RunOptions {
    RunOptions {
        scheduler: Scheduler::ClientLast,
        ..RunOptions::default()
    }
}

fn run_ok(sig: &Signature, main: &str, opts: &RunOptions) -> Result<Trace, String> {
    let t = run(sig, main, opts).map_err(|e| format!("{main}: {e}"))?;
    ensure(t.summary.status == Status::Done, format!("{main}: ended {:?}", t.summary.status))?;
    Ok(t)
}

/// Smallest k with 2^k ≥ x, by doubling.
fn ceil_log2(x: u64) -> u64 {
    let (mut k, mut p) = (0, 1u64);
    while p < x {
        p *= 2;
        k += 1;
    }
    k
}

fn corpus_typechecks() -> Outcome {
    let mut checked = 0;
    for name in CORPUS {
        let report = check_signature(&load(name), Metric::MESSAGES, SAMPLE_MAX);
        if let Some(f) = report.first_failure() {
            return Err(format!("{name}: {} {:?} fails: {:?}", f.def, f.indices, f.error));
        }
        checked += report.entries.len();
    }
    let counter = check_signature(&load("counter"), Metric::MESSAGES, SAMPLE_MAX);
    let b0 = counter.entries.iter().filter(|e| e.def == "b0").count();
    ensure(b0 == SAMPLE_MAX as usize, format!("b0 checked at {b0} indices"))?;

    // b1 without potential: the inc branch sends t.inc (annotation 1, cost 1)
    // and receives only the one unit on its own inc.
    let bad = check_signature(&load("bad_b1"), Metric::MESSAGES, SAMPLE_MAX);
    let f = bad.first_failure().ok_or("bad_b1 was accepted")?;
    let ineq = f.failed_inequality.as_ref().ok_or("bad_b1 failure has no inequality")?;
    ensure(f.def == "b1", format!("bad_b1 first fails in {}", f.def))?;
    ensure(ineq.summary() == "1 ≥ 2", format!("bad_b1 cites {}", ineq.summary()))?;

    // ins^0 leaves elem nothing to forward the insertion with: label + element.
    let q = check_signature(&load("queue_ins0"), Metric::MESSAGES, SAMPLE_MAX);
    let g = q.first_failure().ok_or("queue_ins0 was accepted")?;
    let qineq = g.failed_inequality.as_ref().ok_or("queue_ins0 failure has no inequality")?;
    ensure(g.def == "elem", format!("queue_ins0 first fails in {}", g.def))?;
    ensure(qineq.summary() == "0 ≥ 2", format!("queue_ins0 cites {}", qineq.summary()))?;
    Ok(format!(
        "{checked} instances pass; bad_b1 rejected with {ineq} ({}); queue_ins0 rejected with {qineq} ({})",
        ineq.summary(),
        qineq.summary()
    ))
}

fn counter_bounds() -> Outcome {
    let sig = load("counter");
    // `main` builds the value 5 without messages and then reads it
    let t = run_ok(&sig, "main", &client_last())?;
    let [_, _, read] = split_phases(&t, 0);
    let bound = 2 * ceil_log2(5 + 1) + 2;
    ensure(read.work == 8 && bound == 8, format!("read at 5: work {} bound {bound}", read.work))?;
    ensure(read.injected == bound, format!("val carried {}", read.injected))?;

    let t = run_ok(&sig, "inc8", &client_last())?;
    let [_, incs, _] = split_phases(&t, 8);
    let trailing: u64 = (0u32..8).map(|k| k.trailing_ones() as u64).sum();
    ensure(incs.work == trailing, format!("8 incs: work {} oracle {trailing}", incs.work))?;
    ensure(incs.injected == 8 && incs.slack == 1, format!("8 incs: injected {} slack {}", incs.injected, incs.slack))?;
    Ok(format!(
        "read at 5: work {} = bound {bound}; 8 incs: work {} vs potential {} (slack {})",
        read.work, incs.work, incs.injected, incs.slack
    ))
}

fn store_tightness() -> Outcome {
    let m = 3u64;
    let n = 0u64;
    let stack = run_ok(&load("stack"), "main", &client_last())?;
    let [_, s, _] = split_phases(&stack, 6);
    ensure(s.work == 2 * m, format!("stack: work {}", s.work))?;

    let clients = load("clients");
    let l1 = run_ok(&clients, "main", &client_last())?;
    let [_, p1, _] = split_phases(&l1, 6);
    let phi1 = 2 * m * n + m * (m - 1) + 2 * m;
    ensure(p1.work == phi1, format!("queue l1: work {} expected {phi1}", p1.work))?;

    let l2 = run_ok(&clients, "alternating", &client_last())?;
    let [_, p2, _] = split_phases(&l2, 6);
    let phi2 = 2 * m * (n + 1);
    ensure(p2.work == phi2, format!("queue l2: work {} expected {phi2}", p2.work))?;

    let q = StoreAnnotations::queue();
    ensure(
        client_potential(&StoreAnnotations::stack(), &ClientScript::ins_then_del(3, 0)) == s.work
            && client_potential(&q, &ClientScript::ins_then_del(3, 0)) == phi1
            && client_potential(&q, &ClientScript::alternating(3, 0)) == phi2,
        "recurrence disagrees with the closed forms",
    )?;
    Ok(format!("stack 3+3: {}; queue l1: {}; queue l2: {}", s.work, p1.work, p2.work))
}

fn fqueue_amortized() -> Outcome {
    let t = run_ok(&load("fqueue"), "main", &client_last())?;
    let [_, p, _] = split_phases(&t, 8);
    let bound = 6 * 4 + 2 * 4;
    ensure(p.work < bound, format!("work {} not below {bound}", p.work))?;
    Ok(format!("4 ins + 4 del: work {} < {bound}", p.work))
}

fn runnable(sig: &Signature) -> Vec<String> {
    closed_procs(sig)
        .into_iter()
        .filter(|n| matches!(sig.proc_defs[n].provides.1, SType::One(_)))
        .collect()
}

fn monotone_runs() -> Outcome {
    let mut runs = 0;
    for name in CORPUS {
        let sig = load(name);
        for main in runnable(&sig) {
            let mut works = Vec::new();
            let schedules = std::iter::once(Scheduler::RoundRobin).chain(SEEDS.map(Scheduler::Random));
            for scheduler in schedules {
                let opts = RunOptions {
                    scheduler,
                    keep_configs: true,
                    ..RunOptions::default()
                };
                let who = format!("{name}/{main} {scheduler:?}");
                let t = run_ok(&sig, &main, &opts).map_err(|e| format!("{who}: {e}"))?;
                check_monotone(&t).map_err(|v| format!("{who}: {v}"))?;
                let b = bound_report(&t);
                ensure(b.slack >= 0, format!("{who}: slack {}", b.slack))?;
                deep_check(&sig, &t, Metric::MESSAGES).map_err(|e| format!("{who}: {e}"))?;
                works.push(t.summary.total_work);
                runs += 1;
            }
            ensure(works.windows(2).all(|w| w[0] == w[1]), format!("{name}/{main}: work varies {works:?}"))?;
        }
    }

    // injected fault: one extra unit of potential partway through
    let sig = load("stack");
    let mut r = Runner::new(&sig, "main", RunOptions::default()).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        r.step_once().map_err(|e| e.to_string())?;
    }
    match r.config_mut().preds.values_mut().next() {
        Some(Pred::Proc(p)) => p.potential += 1,
        Some(Pred::Msg(m)) => m.potential += 1,
        None => return Err("fault fixture has no predicates".into()),
    }
    let status = r.run_to_end().map_err(|e| e.to_string())?;
    let t = r.finish(status);
    let v = check_monotone(&t).err().ok_or("bumped potential went unnoticed")?;
    ensure(v.step == 10, format!("fault flagged at step {}", v.step))?;
    Ok(format!("{runs} runs monotone, bounded and re-typed; fault flagged at step {}", v.step))
}

fn oracle_equivalence() -> Outcome {
    let mut scripts = 0;
    for (kind, file, ann) in [
        (StoreKind::Stack, "stack", StoreAnnotations::stack()),
        (StoreKind::Queue, "queue", StoreAnnotations::queue()),
    ] {
        let src = source(file);
        for len in 0..=MAX_SCRIPT {
            for script in ClientScript::all_of_len(len, 0) {
                let phi = client_potential(&ann, &script);
                let m = measure_script(kind, &src, &script, Metric::MESSAGES).map_err(|e| format!("{file} {script}: {e}"))?;
                ensure(m.script.work == phi, format!("{file} {script}: measured {} vs Φ {phi}", m.script.work))?;
                scripts += 1;
            }
        }
    }
    ensure(scripts >= 2 * (1 << MAX_SCRIPT), format!("only {scripts} scripts"))?;
    Ok(format!("{scripts} scripts of length ≤ {MAX_SCRIPT}, Φ = measured work"))
}

fn declared_potentials() -> Outcome {
    let at = |pairs: &[(&str, u64)]| -> IndexEnv { pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect() };
    let cases: [(&str, &str, IndexEnv, u64); 6] = [
        ("list", "nil0", at(&[]), 2),
        ("list", "cons0", at(&[]), 2),
        ("list", "cons1", at(&[]), 3),
        ("stack", "empty", at(&[]), 0),
        ("counter", "b1", at(&[("n", 0)]), 1),
        ("counter", "e", at(&[]), 0),
    ];
    let mut got = Vec::new();
    for (file, def, env, want) in cases {
        let q = min_potential(&load(file), def, &env, Metric::MESSAGES).map_err(|e| format!("{def}: {e}"))?;
        ensure(q == want, format!("{def}: {q}, expected {want}"))?;
        got.push(format!("{def}={q}"));
    }
    Ok(got.join(" "))
}

fn roundtrip() -> Outcome {
    let mut files: Vec<&str> = CORPUS.to_vec();
    files.extend(["bad_b1", "queue_ins0"]);
    for name in &files {
        let sig = load(name);
        let again = parse_program(&pretty_program(&sig)).map_err(|e| format!("{name}: {e}"))?;
        ensure(again == sig, format!("{name}: reparse differs"))?;
    }
    Ok(format!("{} files", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("corpus typechecking", corpus_typechecks),
        ("counter bounds", counter_bounds),
        ("stack/queue tightness", store_tightness),
        ("functional queue amortization", fqueue_amortized),
        ("soundness monotonicity", monotone_runs),
        ("oracle equivalence", oracle_equivalence),
        ("declared potentials", declared_potentials),
        ("parser roundtrip", roundtrip),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
