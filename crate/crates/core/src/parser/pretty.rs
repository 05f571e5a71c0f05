use std::fmt::Write;

use super::TAIL_CALL_PREFIX;
use crate::lang::{Constraint, CostMode, PotExpr, ProcDef, ProcExpr, Signature, TypeDef};

fn params(out: &mut String, params: &[String], domain: &[Constraint]) {
    out.push('[');
    out.push_str(&params.join(", "));
    if !domain.is_empty() {
        let cs: Vec<String> = domain.iter().map(ToString::to_string).collect();
        let _ = write!(out, " | {}", cs.join(", "));
    }
    out.push(']');
}

fn index_args(args: &[PotExpr]) -> String {
    if args.is_empty() {
        String::new()
    } else {
        let a: Vec<String> = args.iter().map(ToString::to_string).collect();
        format!("[{}]", a.join(", "))
    }
}

fn type_def(out: &mut String, def: &TypeDef) {
    let _ = write!(out, "type {}", def.name);
    if !def.params.is_empty() || !def.domain.is_empty() {
        params(out, &def.params, &def.domain);
    }
    let _ = writeln!(out, " = {}", def.body);
}

fn proc_def(out: &mut String, def: &ProcDef) {
    if def.cost_mode == CostMode::Costfree {
        out.push_str("costfree ");
    }
    let _ = write!(out, "proc {} ", def.name);
    params(out, &def.params, &def.domain);
    let uses: Vec<String> = def.uses.iter().map(|(x, t)| format!("{x} : {t}")).collect();
    let _ = writeln!(
        out,
        " |{}| ({}) -> ({} : {}) =",
        def.potential,
        uses.join(", "),
        def.provides.0,
        def.provides.1
    );
    proc_at(out, &def.body, 1);
    out.push('\n');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Renders a process term, one action per line.
pub fn pretty_proc(p: &ProcExpr) -> String {
    let mut out = String::new();
    proc_at(&mut out, p, 0);
    out
}

fn proc_at(out: &mut String, p: &ProcExpr, depth: usize) {
    indent(out, depth);
    match p {
        ProcExpr::Spawn {
            def,
            index_args: args,
            chan_args,
            bind,
            cont,
        } => {
            let call = format!("{def}{}({})", index_args(args), chan_args.join(", "));
            if bind.starts_with(TAIL_CALL_PREFIX) {
                if let ProcExpr::Fwd { provided, used } = &**cont {
                    if used == bind {
                        let _ = writeln!(out, "{call} providing {provided}");
                        return;
                    }
                }
            }
            let _ = writeln!(out, "{bind} <- spawn {call};");
            proc_at(out, cont, depth);
        }
        ProcExpr::Fwd { provided, used } => {
            let _ = writeln!(out, "fwd {provided} {used}");
        }
        ProcExpr::SendLabel { chan, label, cont } => {
            let _ = writeln!(out, "{chan}.{label};");
            proc_at(out, cont, depth);
        }
        ProcExpr::CaseRecv { chan, arms } => {
            let _ = writeln!(out, "case {chan} {{");
            for (i, arm) in arms.iter().enumerate() {
                indent(out, depth);
                let _ = writeln!(out, "{} {} =>", if i == 0 { " " } else { "|" }, arm.label);
                proc_at(out, &arm.body, depth + 2);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        ProcExpr::SendChan { chan, payload, cont } => {
            let _ = writeln!(out, "send {chan} {payload};");
            proc_at(out, cont, depth);
        }
        ProcExpr::RecvChan { chan, bind, cont } => {
            let _ = writeln!(out, "{bind} <- recv {chan};");
            proc_at(out, cont, depth);
        }
        ProcExpr::Close { chan } => {
            let _ = writeln!(out, "close {chan}");
        }
        ProcExpr::Wait { chan, cont } => {
            let _ = writeln!(out, "wait {chan};");
            proc_at(out, cont, depth);
        }
    }
}

/// Deterministic rendering; types first, then processes, each in name order.
pub fn pretty_program(sig: &Signature) -> String {
    let mut out = String::new();
    for def in sig.type_defs.values() {
        type_def(&mut out, def);
    }
    if !sig.type_defs.is_empty() && !sig.proc_defs.is_empty() {
        out.push('\n');
    }
    for def in sig.proc_defs.values() {
        proc_def(&mut out, def);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;
    use crate::lang::SType;

    #[test]
    fn one_prints_with_annotation() {
        assert_eq!(SType::One(PotExpr::zero()).to_string(), "1^0");
    }

    #[test]
    fn tensor_prints_zero_annotation() {
        let t = SType::Tensor(
            PotExpr::zero(),
            Box::new(SType::TVar("A".into(), vec![])),
            Box::new(SType::TVar("B".into(), vec![])),
        );
        assert_eq!(t.to_string(), "A *^0 B");
    }

    #[test]
    fn nested_program_round_trips() {
        let src = "\
type ctr[n] = &{ inc^1 : ctr[n+1], val^(2*clog(n)+2) : 1^0 }
type pair = (1^0 -o 1^1) *^2 (1^0)
proc b [n | n >= 1] |n-1| (t : ctr[n]) -> (s : ctr[2*n]) =
  case s {
    inc => t.inc; b[n](t) providing s
  | val => x <- spawn b[n](t); wait x; close s
  }
costfree proc m [] |0| () -> (c : 1^0) = y <- recv c; send c y; close c
";
        let sig = parse_program(src).unwrap();
        let printed = pretty_program(&sig);
        assert_eq!(parse_program(&printed).unwrap(), sig, "{printed}");
        assert!(printed.contains("b[n](t) providing s"));
    }
}
