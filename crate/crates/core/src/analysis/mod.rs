//! Potential needed by clients of a generic store.
//!
//! A store of size `n` offers `ins^i : A -o^a store[n+1]` and
//! `del^d : +{ none^p : 1^e, some^s : A *^t store[n-1] }`. A client is a
//! list of operations; the potential it must bring follows from the
//! annotations alone, without looking at the store implementation:
//!
//! ```text
//! Φ([], n)        = 0
//! Φ(ins :: ℓ, n)  = Φ(ℓ, n+1) + i(n) + a
//! Φ(del :: ℓ, n)  = Φ(ℓ, n-1) + d - s - t     (n > 0)
//! Φ(del :: ℓ, 0)  = max(0, d - p - e)         (the client stops here)
//! ```
//!
//! [`measure_script`] runs the same script against a store program so the
//! two can be compared.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::lang::{eval_pot, IndexEnv, Metric, PotExpr, Signature};
use crate::monitor::{split_phases, PhaseReport};
use crate::parser::{parse_program, ParseError};
use crate::runtime::{run, RunOptions, RuntimeError, Scheduler, Status};
use crate::typechecker::{min_potential, TypeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Ins,
    Del,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClientScript {
    pub ops: Vec<Op>,
    pub start_size: u64,
}

impl ClientScript {
    pub fn new(ops: Vec<Op>, start_size: u64) -> Self {
        ClientScript { ops, start_size }
    }

    /// `m` insertions followed by `m` deletions.
    pub fn ins_then_del(m: usize, start_size: u64) -> Self {
        let mut ops = vec![Op::Ins; m];
        ops.extend(vec![Op::Del; m]);
        ClientScript { ops, start_size }
    }

    /// `m` insertion/deletion pairs.
    pub fn alternating(m: usize, start_size: u64) -> Self {
        let ops = (0..m).flat_map(|_| [Op::Ins, Op::Del]).collect();
        ClientScript { ops, start_size }
    }

    /// Every script of exactly `len` operations, in binary counting order.
    pub fn all_of_len(len: usize, start_size: u64) -> impl Iterator<Item = ClientScript> {
        (0u64..1 << len).map(move |bits| {
            let ops = (0..len)
                .map(|k| if bits >> k & 1 == 0 { Op::Ins } else { Op::Del })
                .collect();
            ClientScript { ops, start_size }
        })
    }

    /// Operations actually sent: a deletion from the empty store is the last.
    pub fn executed(&self) -> usize {
        let mut n = self.start_size;
        for (k, op) in self.ops.iter().enumerate() {
            match op {
                Op::Ins => n += 1,
                Op::Del if n == 0 => return k + 1,
                Op::Del => n -= 1,
            }
        }
        self.ops.len()
    }
}

impl fmt::Display for ClientScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<&str> = self
            .ops
            .iter()
            .map(|o| match o {
                Op::Ins => "ins",
                Op::Del => "del",
            })
            .collect();
        write!(f, "[{}]@{}", ops.join(","), self.start_size)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("bad script `{0}`: expected ins/del tokens, a string of i and d, or l1:M / l2:M")]
pub struct ScriptParseError(pub String);

impl FromStr for ClientScript {
    type Err = ScriptParseError;

    /// Accepts `ins,del,ins`, `idi`, `l1:3` (three ins then three del) and
    /// `l2:3` (three ins/del pairs). The start size defaults to 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScriptParseError(s.to_string());
        let s = s.trim();
        if let Some((kind, m)) = s.split_once(':') {
            let m: usize = m.trim().parse().map_err(|_| bad())?;
            return match kind.trim() {
                "l1" => Ok(ClientScript::ins_then_del(m, 0)),
                "l2" => Ok(ClientScript::alternating(m, 0)),
                _ => Err(bad()),
            };
        }
        let tokens: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let mut ops = Vec::new();
        for t in tokens {
            match t {
                "ins" => ops.push(Op::Ins),
                "del" => ops.push(Op::Del),
                _ if t.chars().all(|c| c == 'i' || c == 'd') => {
                    ops.extend(t.chars().map(|c| if c == 'i' { Op::Ins } else { Op::Del }))
                }
                _ => return Err(bad()),
            }
        }
        Ok(ClientScript { ops, start_size: 0 })
    }
}

/// Annotations of the generic store type. `i` may mention the size `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoreAnnotations {
    pub i: PotExpr,
    pub a: u64,
    pub d: u64,
    pub p: u64,
    pub e: u64,
    pub s: u64,
    pub t: u64,
}

impl StoreAnnotations {
    fn with(i: PotExpr, d: u64) -> Self {
        StoreAnnotations {
            i,
            a: 0,
            d,
            p: 0,
            e: 0,
            s: 0,
            t: 0,
        }
    }

    pub fn stack() -> Self {
        Self::with(PotExpr::zero(), 2)
    }

    /// Inserting into a queue of size `n` costs `2n`.
    pub fn queue() -> Self {
        Self::with(PotExpr::mul(PotExpr::Const(2), PotExpr::var("n")), 2)
    }

    /// Two-list queue with the annotations `ins^6`, `del^2`.
    pub fn fqueue() -> Self {
        Self::with(PotExpr::Const(6), 2)
    }

    /// Two-list queue as implemented in the corpus, where each deletion
    /// also pays for the fresh `nil` cells of a reversal.
    pub fn fqueue_corpus() -> Self {
        Self::with(PotExpr::Const(6), 4)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "stack" => Some(Self::stack()),
            "queue" => Some(Self::queue()),
            "fqueue" => Some(Self::fqueue()),
            "fqueue-corpus" => Some(Self::fqueue_corpus()),
            _ => None,
        }
    }

    pub fn ins_at(&self, n: u64) -> u64 {
        let env = IndexEnv::from([("n".to_string(), n)]);
        // `n` is the only variable a preset may use
        eval_pot(&self.i, &env).unwrap_or(0)
    }
}

/// Φ(ℓ, n₀) for the script.
pub fn client_potential(ann: &StoreAnnotations, script: &ClientScript) -> u64 {
    fn phi(ann: &StoreAnnotations, ops: &[Op], n: u64) -> u64 {
        match ops.split_first() {
            None => 0,
            Some((Op::Ins, rest)) => phi(ann, rest, n + 1) + ann.ins_at(n) + ann.a,
            Some((Op::Del, rest)) if n > 0 => {
                (phi(ann, rest, n - 1) + ann.d).saturating_sub(ann.s + ann.t)
            }
            Some((Op::Del, _)) => ann.d.saturating_sub(ann.p + ann.e),
        }
    }
    phi(ann, &script.ops, script.start_size)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    /// How the first client's potential compares with the second's.
    #[serde(serialize_with = "ordering_name")]
    pub ordering: Ordering,
    pub first: u64,
    pub second: u64,
}

fn ordering_name<S: serde::Serializer>(o: &Ordering, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    })
}

pub fn compare_clients(ann: &StoreAnnotations, a: &ClientScript, b: &ClientScript) -> Comparison {
    let first = client_potential(ann, a);
    let second = client_potential(ann, b);
    Comparison {
        ordering: first.cmp(&second),
        first,
        second,
    }
}

/// Store programs in the corpus the script client can drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreKind {
    Stack,
    Queue,
    FQueue,
}

impl FromStr for StoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stack" => Ok(StoreKind::Stack),
            "queue" => Ok(StoreKind::Queue),
            "fqueue" | "fqueue-corpus" => Ok(StoreKind::FQueue),
            _ => Err(format!("unknown store `{s}`")),
        }
    }
}

/// Name of the generated client process.
pub const SCRIPT_CLIENT: &str = "script_client";

impl StoreKind {
    fn prebuild(self, n0: u64, out: &mut String) {
        use std::fmt::Write;
        let last = |j: u64| if j == n0 { "s".to_string() } else { format!("e{j}") };
        match self {
            StoreKind::Stack | StoreKind::Queue => {
                let _ = writeln!(out, "  {} <- spawn empty[]();", last(0));
                for j in 1..=n0 {
                    let idx = if self == StoreKind::Queue { format!("{}", j - 1) } else { String::new() };
                    let _ = writeln!(
                        out,
                        "  p{j} <- spawn new_item[](); {} <- spawn elem[{idx}](p{j}, e{});",
                        last(j),
                        j - 1
                    );
                }
            }
            StoreKind::FQueue => {
                let _ = writeln!(out, "  i0 <- spawn nil_in[]();");
                for j in 1..=n0 {
                    let _ = writeln!(out, "  p{j} <- spawn new_item[](); i{j} <- spawn cons_in[](p{j}, i{});", j - 1);
                }
                let _ = writeln!(out, "  o <- spawn nil_out[]();");
                let _ = writeln!(out, "  s <- spawn queue2[](i{n0}, o);");
            }
        }
    }

    fn drain(self, n: u64) -> String {
        match self {
            StoreKind::Queue => format!("drain_q[{n}](s) providing c"),
            _ => "drain[](s) providing c".to_string(),
        }
    }

    /// Source of a cost-free client process that runs `script` on a fresh
    /// store, then drains whatever is left.
    pub fn client_source(self, script: &ClientScript) -> String {
        let mut out = format!("costfree proc {SCRIPT_CLIENT} [] |0| () -> (c : 1) =\n");
        self.prebuild(script.start_size, &mut out);
        let mut n = script.start_size;
        let mut open = 0;
        let mut tail = None;
        for (k, op) in script.ops.iter().enumerate() {
            match op {
                Op::Ins => {
                    out.push_str(&format!("  x{k} <- spawn new_item[](); s.ins; send s x{k};\n"));
                    n += 1;
                }
                Op::Del => {
                    out.push_str(&format!(
                        "  s.del; case s {{ none => wait s; close c | some => y{k} <- recv s; wait y{k};\n"
                    ));
                    open += 1;
                    if n == 0 {
                        // never taken: the store is empty
                        tail = Some(self.drain(0));
                        break;
                    }
                    n -= 1;
                }
            }
        }
        out.push_str("  ");
        out.push_str(&tail.unwrap_or_else(|| self.drain(n)));
        out.push_str(&" }".repeat(open));
        out.push('\n');
        out
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("generated client does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("generated client does not check: {0}")]
    Type(#[from] TypeError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("script run ended with status {0:?}")]
    Unfinished(Status),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Measurement {
    /// Potential the generated client was given.
    pub potential: u64,
    /// Operations sent before the client stopped.
    pub executed: usize,
    /// Store work caused by the script.
    pub script: PhaseReport,
    pub total_work: u64,
}

/// Appends a client for `script` to the store program `store_src`, gives it
/// the least potential it checks with, runs it with the client scheduled
/// last, and reports the work of the script phase.
pub fn measure_script(
    kind: StoreKind,
    store_src: &str,
    script: &ClientScript,
    metric: Metric,
) -> Result<Measurement, AnalysisError> {
    let src = format!("{store_src}\n{}", kind.client_source(script));
    let mut sig: Signature = parse_program(&src)?;
    let potential = min_potential(&sig, SCRIPT_CLIENT, &IndexEnv::new(), metric)?;
    if let Some(def) = sig.proc_defs.get_mut(SCRIPT_CLIENT) {
        def.potential = PotExpr::Const(potential);
    }
    let opts = RunOptions {
        scheduler: Scheduler::ClientLast,
        metric,
        ..RunOptions::default()
    };
    let trace = run(&sig, SCRIPT_CLIENT, &opts)?;
    if trace.summary.status != Status::Done {
        return Err(AnalysisError::Unfinished(trace.summary.status));
    }
    let executed = script.executed();
    let [_, phase, _] = split_phases(&trace, executed);
    Ok(Measurement {
        potential,
        executed,
        script: phase,
        total_work: trace.summary.total_work,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn script(s: &str, n0: u64) -> ClientScript {
        ClientScript {
            start_size: n0,
            ..s.parse().unwrap()
        }
    }

    #[test]
    fn stack_pays_two_per_deletion() {
        let ann = StoreAnnotations::stack();
        assert_eq!(client_potential(&ann, &ClientScript::ins_then_del(3, 0)), 6);
    }

    #[test]
    fn queue_clients_differ_by_order() {
        let ann = StoreAnnotations::queue();
        assert_eq!(client_potential(&ann, &ClientScript::ins_then_del(3, 2)), 24);
        let c = compare_clients(&ann, &ClientScript::ins_then_del(3, 0), &ClientScript::alternating(3, 0));
        assert_eq!((c.first, c.second, c.ordering), (12, 6, Ordering::Greater));
    }

    #[test]
    fn two_list_queue_has_constant_insertion() {
        let ann = StoreAnnotations::fqueue();
        assert_eq!(client_potential(&ann, &ClientScript::alternating(3, 0)), 24);
        assert_eq!(client_potential(&StoreAnnotations::queue(), &ClientScript::alternating(3, 0)), 6);
    }

    #[test]
    fn trivial_comparisons() {
        let ann = StoreAnnotations::queue();
        let a = ClientScript::ins_then_del(2, 1);
        assert_eq!(compare_clients(&ann, &a, &a).ordering, Ordering::Equal);
        let e = ClientScript::new(vec![], 0);
        let c = compare_clients(&ann, &e, &e);
        assert_eq!((c.first, c.second), (0, 0));
    }

    #[test]
    fn deleting_from_empty_ends_the_script() {
        let ann = StoreAnnotations::stack();
        let s = script("del,ins,del", 0);
        assert_eq!(s.executed(), 1);
        assert_eq!(client_potential(&ann, &s), 2);
        let s = script("ddd", 1);
        assert_eq!(s.executed(), 2);
        assert_eq!(client_potential(&ann, &s), 4);
    }

    #[test]
    fn script_syntax() {
        assert_eq!(script("ins, del", 0).ops, vec![Op::Ins, Op::Del]);
        assert_eq!(script("idd", 0).ops, vec![Op::Ins, Op::Del, Op::Del]);
        assert_eq!("l2:2".parse::<ClientScript>().unwrap(), ClientScript::alternating(2, 0));
        assert!("push".parse::<ClientScript>().is_err());
        assert!("l3:2".parse::<ClientScript>().is_err());
        assert_eq!(script("id", 3).to_string(), "[ins,del]@3");
    }

    #[test]
    fn enumeration_covers_every_script() {
        let all: Vec<_> = ClientScript::all_of_len(3, 0).collect();
        assert_eq!(all.len(), 8);
        let distinct: std::collections::BTreeSet<String> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn generated_client_parses_for_every_store() {
        for kind in [StoreKind::Stack, StoreKind::Queue, StoreKind::FQueue] {
            let src = kind.client_source(&script("iddi", 2));
            assert!(src.contains("s.del"), "{src}");
            let open = src.matches('{').count();
            assert_eq!(open, src.matches('}').count());
        }
    }

    fn arb_script() -> impl Strategy<Value = ClientScript> {
        (prop::collection::vec(prop::bool::ANY, 0..10), 0u64..5).prop_map(|(bits, n0)| {
            let ops = bits.into_iter().map(|b| if b { Op::Ins } else { Op::Del }).collect();
            ClientScript::new(ops, n0)
        })
    }

    proptest! {
        #[test]
        fn phi_is_monotone_in_each_annotation(s in arb_script(), k in 0usize..7, bump in 1u64..4) {
            let base = StoreAnnotations { i: PotExpr::Const(1), a: 1, d: 3, p: 0, e: 0, s: 1, t: 0 };
            let mut more = base.clone();
            match k {
                0 => more.i = PotExpr::Const(1 + bump),
                1 => more.a += bump,
                2 => more.d += bump,
                3 => more.p += bump,
                4 => more.e += bump,
                5 => more.s += bump,
                _ => more.t += bump,
            }
            let (lo, hi) = (client_potential(&base, &s), client_potential(&more, &s));
            // p, e, s and t are refunds: raising them lowers Φ
            if k <= 2 {
                prop_assert!(hi >= lo);
            } else {
                prop_assert!(hi <= lo);
            }
        }

        #[test]
        fn stack_potential_counts_deletions(s in arb_script()) {
            let ann = StoreAnnotations::stack();
            let dels = s.ops[..s.executed()].iter().filter(|o| **o == Op::Del).count() as u64;
            prop_assert_eq!(client_potential(&ann, &s), 2 * dels);
        }
    }
}
