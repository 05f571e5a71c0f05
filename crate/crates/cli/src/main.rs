//! `rsill`: check, run and analyze resource-annotated session-typed programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsill_core::analysis::{client_potential, compare_clients, measure_script, ClientScript, StoreAnnotations, StoreKind};
use rsill_core::lang::{Metric, Signature};
use rsill_core::monitor::{bound_report, check_monotone, deep_check, split_phases};
use rsill_core::parser::SourceFile;
use rsill_core::runtime::{run, RunOptions, Scheduler, Trace};
use rsill_core::typechecker::check_signature;

const FAILURE: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "rsill", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck every definition at every index vector up to --indices.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        indices: u64,
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long)]
        json: bool,
    },
    /// Run a closed process and print the run summary.
    Run(RunArgs),
    /// Run with monitoring on and report the potential bound.
    Bound(RunArgs),
    /// Potential a store client needs, from the store's annotations.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct MetricArg {
    /// Costs of label, channel and close messages.
    #[arg(long, value_name = "L,C,E", default_value = "1,1,1", value_parser = parse_metric)]
    metric: Metric,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [label, channel, close] => Ok(Metric { label, channel, close }),
        _ => Err("expected three comma-separated costs".to_string()),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Rr,
    Rand,
    ClientLast,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value = "main")]
    main: String,
    #[arg(long, value_enum, default_value = "rr")]
    scheduler: SchedulerArg,
    /// Seed for `--scheduler rand`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    metric: MetricArg,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Write the trace as JSON lines.
    #[arg(long, value_name = "OUT")]
    trace: Option<PathBuf>,
    /// Check weight monotonicity and report the potential bound.
    #[arg(long)]
    monitor: bool,
    /// Re-type the configuration after every step.
    #[arg(long)]
    deep_check: bool,
    /// Report setup/script/rest phases for a client with this many operations.
    #[arg(long, value_name = "OPS")]
    split: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// stack, queue, fqueue or fqueue-corpus.
    #[arg(long)]
    preset: String,
    /// Operations: `ins,del,...`, `iid...`, `l1:M` or `l2:M`.
    #[arg(long)]
    script: String,
    /// Size of the store before the script starts.
    #[arg(long, default_value_t = 0)]
    n0: u64,
    /// Second script to compare against.
    #[arg(long)]
    vs: Option<String>,
    /// Also run each script against this store program and report its work.
    #[arg(long, value_name = "FILE")]
    measure: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            file,
            indices,
            metric,
            json,
        } => check(&file, indices, metric.metric, json),
        Command::Run(args) => execute(&args, args.monitor),
        Command::Bound(args) => execute(&args, true),
        Command::Analyze(args) => analyze(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

type CmdResult = Result<(), (u8, String)>;

fn load(path: &Path) -> Result<Signature, (u8, String)> {
    SourceFile::load(path)
        .map(|f| f.parsed)
        .map_err(|e| (FAILURE, format!("{}: {e}", path.display())))
}

fn check(file: &Path, indices: u64, metric: Metric, json: bool) -> CmdResult {
    let sig = load(file)?;
    let report = check_signature(&sig, metric, indices);
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        for e in report.failures() {
            let at = if e.indices.is_empty() {
                String::new()
            } else {
                format!("[{}]", e.indices.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
            };
            let why = e.error.as_ref().map(|x| x.to_string()).unwrap_or_default();
            println!("FAIL {}{at}: {why}", e.def);
            if let Some(ineq) = &e.failed_inequality {
                println!("  failed inequality: {ineq}  ({})", ineq.summary());
            }
        }
        println!(
            "{} instances checked, {} passed, {} failed",
            report.entries.len(),
            report.passed(),
            report.entries.len() - report.passed()
        );
    }
    if report.ok() {
        Ok(())
    } else {
        Err((FAILURE, String::new()))
    }
}

fn execute(args: &RunArgs, monitor: bool) -> CmdResult {
    let sig = load(&args.file)?;
    if !sig.proc_defs.contains_key(&args.main) {
        return Err((USAGE, format!("no process named `{}`", args.main)));
    }
    let opts = RunOptions {
        scheduler: match args.scheduler {
            SchedulerArg::Rr => Scheduler::RoundRobin,
            SchedulerArg::Rand => Scheduler::Random(args.seed),
            SchedulerArg::ClientLast => Scheduler::ClientLast,
        },
        metric: args.metric.metric,
        max_steps: args.max_steps,
        keep_configs: args.deep_check,
    };
    let trace = run(&sig, &args.main, &opts).map_err(|e| (FAILURE, e.to_string()))?;
    if let Some(out) = &args.trace {
        std::fs::write(out, trace.to_jsonl()).map_err(|e| (FAILURE, format!("{}: {e}", out.display())))?;
    }
    let mut failed = Vec::new();
    let mut doc = serde_json::json!({ "summary": trace.summary });
    print_line(args.json, &format!(
        "status {:?} totalWork {} totalPotential {} steps {}",
        trace.summary.status, trace.summary.total_work, trace.summary.total_potential, trace.summary.steps
    ));
    if monitor {
        monitor_report(&trace, args.json, &mut doc, &mut failed);
    }
    if args.deep_check {
        match deep_check(&sig, &trace, args.metric.metric) {
            Ok(n) => {
                doc["deepCheck"] = serde_json::json!({ "ok": true, "configs": n });
                print_line(args.json, &format!("deep check: {n} configurations typed"));
            }
            Err(e) => {
                doc["deepCheck"] = serde_json::json!({ "ok": false, "error": e.to_string() });
                failed.push(format!("deep check: {e}"));
            }
        }
    }
    if let Some(ops) = args.split {
        let phases = split_phases(&trace, ops);
        for p in &phases {
            print_line(args.json, &format!(
                "phase {} steps {}..{} work {} injected {} slack {}",
                p.name, p.first_step, p.end_step, p.work, p.injected, p.slack
            ));
        }
        doc["phases"] = serde_json::to_value(&phases).expect("phases serialize");
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err((FAILURE, failed.join("; ")))
    }
}

fn print_line(json: bool, line: &str) {
    if !json {
        println!("{line}");
    }
}

fn monitor_report(trace: &Trace, json: bool, doc: &mut serde_json::Value, failed: &mut Vec<String>) {
    let bound = bound_report(trace);
    print_line(json, &format!(
        "bound: initialPotential {} finalWork {} slack {} ({:?})",
        bound.initial_potential, bound.final_work, bound.slack, bound.status
    ));
    if !bound.holds() {
        failed.push(format!("work {} exceeds potential {}", bound.final_work, bound.initial_potential));
    }
    doc["bound"] = serde_json::to_value(&bound).expect("bound serializes");
    match check_monotone(trace) {
        Ok(()) => {
            doc["monotone"] = serde_json::json!({ "ok": true });
            print_line(json, "weight: nonincreasing");
        }
        Err(v) => {
            doc["monotone"] = serde_json::json!({ "ok": false, "violation": v });
            failed.push(v.to_string());
        }
    }
}

fn analyze(args: &AnalyzeArgs) -> CmdResult {
    let ann = StoreAnnotations::preset(&args.preset).ok_or_else(|| (USAGE, format!("unknown preset `{}`", args.preset)))?;
    let parse = |s: &str| {
        s.parse::<ClientScript>()
            .map(|c| ClientScript { start_size: args.n0, ..c })
            .map_err(|e| (USAGE, e.to_string()))
    };
    let mut scripts = vec![parse(&args.script)?];
    if let Some(vs) = &args.vs {
        scripts.push(parse(vs)?);
    }
    let store = match &args.measure {
        Some(path) => {
            let kind: StoreKind = args.preset.parse().map_err(|e| (USAGE, e))?;
            let src = std::fs::read_to_string(path).map_err(|e| (FAILURE, format!("{}: {e}", path.display())))?;
            Some((kind, src))
        }
        None => None,
    };
    let mut rows = Vec::new();
    for s in &scripts {
        let mut row = serde_json::json!({
            "script": s.to_string(),
            "startSize": s.start_size,
            "potential": client_potential(&ann, s),
        });
        if let Some((kind, src)) = &store {
            let m = measure_script(*kind, src, s, Metric::MESSAGES).map_err(|e| (FAILURE, e.to_string()))?;
            row["measuredWork"] = m.script.work.into();
        }
        rows.push(row);
    }
    let comparison = (scripts.len() == 2).then(|| compare_clients(&ann, &scripts[0], &scripts[1]));
    match args.format {
        Format::Json => {
            let mut doc = serde_json::json!({ "preset": args.preset, "clients": rows });
            if let Some(c) = comparison {
                doc["comparison"] = serde_json::to_value(c).expect("comparison serializes");
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        Format::Tsv => {
            let measured = store.is_some();
            println!("script\tn0\tpotential{}", if measured { "\tmeasured" } else { "" });
            for r in &rows {
                print!("{}\t{}\t{}", r["script"].as_str().unwrap_or(""), r["startSize"], r["potential"]);
                if measured {
                    print!("\t{}", r["measuredWork"]);
                }
                println!();
            }
            if let Some(c) = comparison {
                println!("# first is {:?} than second ({} vs {})", c.ordering, c.first, c.second);
            }
        }
    }
    Ok(())
}
