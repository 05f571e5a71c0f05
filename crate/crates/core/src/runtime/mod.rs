//! Asynchronous cost semantics over configurations of processes and messages.
//!
//! Each send mints a fresh continuation channel and leaves a message
//! predicate behind. The sender pays the metric cost in work and hands the
//! type's annotation potential to the message; the receiver collects both.
//! A dynamic potential ledger makes the static bound checkable per step.

mod config;
mod sched;
mod trace;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use config::{ChannelState, Config, Ends, External, MsgPred, Payload, Polarity, Pred, PredRef, ProcPred, CHANNEL_PREFIX};
pub use sched::{run, RunOptions, Runner, Scheduler};
pub use trace::{Status, Summary, Trace, TraceEvent};

use crate::error::LangError;
use crate::lang::{eval_closed, eval_pot, proc_env, whnf, CostMode, Metric, ProcExpr, SType, Signature};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("no process named `{0}`")]
    NoSuchMain(String),
    #[error("`{0}` is not a closed program (it uses channels or takes indices)")]
    MainNotClosed(String),
    #[error("negative potential: {actor} holds {have} but must pay {need}")]
    NegativePotential { actor: String, have: u64, need: u64 },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("rule instance is not enabled")]
    NotEnabled,
    #[error(transparent)]
    Lang(#[from] LangError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "spawn_c")]
    SpawnC,
    #[serde(rename = "fwd_s")]
    FwdS,
    #[serde(rename = "fwd_plus_r")]
    FwdPlusR,
    #[serde(rename = "fwd_minus_r")]
    FwdMinusR,
    #[serde(rename = "plusC_s")]
    PlusCS,
    #[serde(rename = "plusC_r")]
    PlusCR,
    #[serde(rename = "withC_s")]
    WithCS,
    #[serde(rename = "withC_r")]
    WithCR,
    #[serde(rename = "tensorC_s")]
    TensorCS,
    #[serde(rename = "tensorC_r")]
    TensorCR,
    #[serde(rename = "lolliC_s")]
    LolliCS,
    #[serde(rename = "lolliC_r")]
    LolliCR,
    #[serde(rename = "oneC_s")]
    OneCS,
    #[serde(rename = "oneC_r")]
    OneCR,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::SpawnC => "spawn_c",
            Rule::FwdS => "fwd_s",
            Rule::FwdPlusR => "fwd_plus_r",
            Rule::FwdMinusR => "fwd_minus_r",
            Rule::PlusCS => "plusC_s",
            Rule::PlusCR => "plusC_r",
            Rule::WithCS => "withC_s",
            Rule::WithCR => "withC_r",
            Rule::TensorCS => "tensorC_s",
            Rule::TensorCR => "tensorC_r",
            Rule::LolliCS => "lolliC_s",
            Rule::LolliCR => "lolliC_r",
            Rule::OneCS => "oneC_s",
            Rule::OneCR => "oneC_r",
        }
    }

    pub fn is_label_send(self) -> bool {
        matches!(self, Rule::PlusCS | Rule::WithCS)
    }

    pub fn is_send(self) -> bool {
        matches!(
            self,
            Rule::PlusCS | Rule::WithCS | Rule::TensorCS | Rule::LolliCS | Rule::OneCS
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule together with the predicates matching its premises.
///
/// `subjects` is `[actor]` for rules with one premise and `[message, receiver]`
/// for receives and forward absorption. `key` is the process the scheduler
/// attributes the instance to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleInstance {
    pub rule: Rule,
    pub subjects: Vec<PredRef>,
    pub key: PredRef,
}

/// Builds the initial configuration of a closed program.
pub fn init_config(sig: &Signature, main: &str) -> Result<Config, RuntimeError> {
    let def = sig
        .proc_defs
        .get(main)
        .ok_or_else(|| RuntimeError::NoSuchMain(main.to_string()))?;
    if !def.uses.is_empty() || !def.params.is_empty() {
        return Err(RuntimeError::MainNotClosed(main.to_string()));
    }
    let env = proc_env(def, &[])?;
    let potential = eval_pot(&def.potential, &env)?;
    let mut config = Config::new(def.provides.1.clone());
    let root = config.root().to_string();
    config.insert(Pred::Proc(ProcPred {
        provides: root.clone(),
        work: 0,
        potential,
        expr: def.body.rename_one(&def.provides.0, &root),
        cost_mode: def.cost_mode,
        def: def.name.clone(),
    }));
    Ok(config)
}

/// Every rule instance whose premises are present, in predicate order.
pub fn enabled(config: &Config) -> Vec<RuleInstance> {
    // Index messages by the channel their receiver blocks on.
    let mut to_client: BTreeMap<&str, (u64, &MsgPred)> = BTreeMap::new();
    let mut to_provider: BTreeMap<&str, (u64, &MsgPred)> = BTreeMap::new();
    let mut provider: BTreeMap<&str, u64> = BTreeMap::new();
    let mut client: BTreeMap<String, u64> = BTreeMap::new();
    for (id, p) in &config.preds {
        match p {
            Pred::Msg(m) => match &m.payload {
                Payload::Label {
                    subject, polarity, ..
                }
                | Payload::Chan {
                    subject, polarity, ..
                } => {
                    let map = match polarity {
                        Polarity::ProviderToClient => &mut to_client,
                        Polarity::ClientToProvider => &mut to_provider,
                    };
                    map.insert(subject, (*id, m));
                }
                Payload::Close { subject } => {
                    to_client.insert(subject, (*id, m));
                }
                Payload::Fwd { .. } => {}
            },
            Pred::Proc(pp) => {
                provider.insert(&pp.provides, *id);
                for c in p.uses() {
                    client.insert(c, *id);
                }
            }
        }
    }

    let mut out = Vec::new();
    let one = |rule, id| RuleInstance {
        rule,
        subjects: vec![PredRef::Pred(id)],
        key: PredRef::Pred(id),
    };
    let recv = |rule, msg: u64, id: u64| RuleInstance {
        rule,
        subjects: vec![PredRef::Pred(msg), PredRef::Pred(id)],
        key: PredRef::Pred(id),
    };
    for (&id, p) in &config.preds {
        match p {
            Pred::Proc(pp) => {
                let own = |c: &str| c == pp.provides;
                match &pp.expr {
                    ProcExpr::Spawn { .. } => out.push(one(Rule::SpawnC, id)),
                    ProcExpr::Fwd { .. } => out.push(one(Rule::FwdS, id)),
                    ProcExpr::SendLabel { chan, .. } => {
                        out.push(one(if own(chan) { Rule::PlusCS } else { Rule::WithCS }, id))
                    }
                    ProcExpr::SendChan { chan, .. } => {
                        out.push(one(if own(chan) { Rule::TensorCS } else { Rule::LolliCS }, id))
                    }
                    ProcExpr::Close { .. } => out.push(one(Rule::OneCS, id)),
                    ProcExpr::CaseRecv { chan, .. } => {
                        if own(chan) {
                            if let Some((m, MsgPred { payload: Payload::Label { .. }, .. })) = to_provider.get(chan.as_str()) {
                                out.push(recv(Rule::WithCR, *m, id));
                            }
                        } else if let Some((m, MsgPred { payload: Payload::Label { .. }, .. })) =
                            to_client.get(chan.as_str())
                        {
                            out.push(recv(Rule::PlusCR, *m, id));
                        }
                    }
                    ProcExpr::RecvChan { chan, .. } => {
                        if own(chan) {
                            if let Some((m, MsgPred { payload: Payload::Chan { .. }, .. })) = to_provider.get(chan.as_str()) {
                                out.push(recv(Rule::LolliCR, *m, id));
                            }
                        } else if let Some((m, MsgPred { payload: Payload::Chan { .. }, .. })) =
                            to_client.get(chan.as_str())
                        {
                            out.push(recv(Rule::TensorCR, *m, id));
                        }
                    }
                    ProcExpr::Wait { chan, .. } => {
                        if let Some((m, MsgPred { payload: Payload::Close { .. }, .. })) = to_client.get(chan.as_str()) {
                            out.push(recv(Rule::OneCR, *m, id));
                        }
                    }
                }
            }
            Pred::Msg(m) => match &m.payload {
                Payload::Fwd { from, to } => {
                    if let Some(&pid) = provider.get(to.as_str()) {
                        out.push(recv(Rule::FwdPlusR, id, pid));
                    }
                    if let Some(&cid) = client.get(from) {
                        out.push(recv(Rule::FwdMinusR, id, cid));
                    } else if !config.external.closed && config.external.channel == *from {
                        out.push(RuleInstance {
                            rule: Rule::FwdMinusR,
                            subjects: vec![PredRef::Pred(id), PredRef::External],
                            key: PredRef::External,
                        });
                    }
                }
                Payload::Close { subject } if !config.external.closed && config.external.channel == *subject => {
                    out.push(RuleInstance {
                        rule: Rule::OneCR,
                        subjects: vec![PredRef::Pred(id), PredRef::External],
                        key: PredRef::External,
                    });
                }
                _ => {}
            },
        }
    }
    out
}

fn proc_mut(config: &mut Config, id: u64) -> Result<&mut ProcPred, RuntimeError> {
    match config.preds.get_mut(&id) {
        Some(Pred::Proc(p)) => Ok(p),
        _ => Err(RuntimeError::NotEnabled),
    }
}

fn take_msg(config: &mut Config, id: u64) -> Result<MsgPred, RuntimeError> {
    match config.preds.remove(&id) {
        Some(Pred::Msg(m)) => Ok(m),
        Some(other) => {
            config.preds.insert(id, other);
            Err(RuntimeError::NotEnabled)
        }
        None => Err(RuntimeError::NotEnabled),
    }
}

fn debit(p: &mut ProcPred, amount: u64) -> Result<(), RuntimeError> {
    p.potential = p
        .potential
        .checked_sub(amount)
        .ok_or_else(|| RuntimeError::NegativePotential {
            actor: format!("{} providing {}", p.def, p.provides),
            have: p.potential,
            need: amount,
        })?;
    Ok(())
}

fn view_whnf(sig: &Signature, config: &Config, c: &str) -> Result<SType, RuntimeError> {
    let v = config
        .view(c)
        .ok_or_else(|| RuntimeError::ProtocolViolation(format!("channel {c} has no state")))?;
    Ok(whnf(v, sig)?)
}

fn protocol(msg: String) -> RuntimeError {
    RuntimeError::ProtocolViolation(msg)
}

/// What a step did, before the runner attaches step numbers and weights.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepInfo {
    pub channels: Vec<String>,
    pub actor: String,
    pub client: bool,
    pub label: Option<String>,
    pub carried: u64,
}

/// Applies one rule instance in place.
pub fn step(
    sig: &Signature,
    config: &mut Config,
    inst: &RuleInstance,
    metric: Metric,
) -> Result<StepInfo, RuntimeError> {
    let first = match inst.subjects.first() {
        Some(PredRef::Pred(id)) => *id,
        _ => return Err(RuntimeError::NotEnabled),
    };
    match inst.rule {
        Rule::SpawnC => spawn(sig, config, first),
        Rule::FwdS => {
            let p = proc_mut(config, first)?;
            let ProcExpr::Fwd { provided, used } = p.expr.clone() else {
                return Err(RuntimeError::NotEnabled);
            };
            if provided != p.provides {
                return Err(protocol(format!("{} forwards {provided}, which it does not provide", p.def)));
            }
            let info = StepInfo {
                channels: vec![provided.clone(), used.clone()],
                actor: p.def.clone(),
                client: p.cost_mode == CostMode::Costfree,
                ..StepInfo::default()
            };
            let work = p.work;
            config.preds.insert(
                first,
                Pred::Msg(MsgPred {
                    carrier: provided.clone(),
                    work,
                    potential: 0,
                    payload: Payload::Fwd {
                        from: provided,
                        to: used,
                    },
                }),
            );
            Ok(info)
        }
        Rule::FwdPlusR | Rule::FwdMinusR => absorb_forward(config, inst, first),
        Rule::PlusCS | Rule::WithCS | Rule::TensorCS | Rule::LolliCS | Rule::OneCS => {
            send(sig, config, inst.rule, first, metric)
        }
        Rule::PlusCR | Rule::WithCR | Rule::TensorCR | Rule::LolliCR | Rule::OneCR => receive(config, inst, first),
    }
}

fn spawn(sig: &Signature, config: &mut Config, id: u64) -> Result<StepInfo, RuntimeError> {
    let p = proc_mut(config, id)?;
    let ProcExpr::Spawn {
        def,
        index_args,
        chan_args,
        bind,
        cont,
    } = p.expr.clone()
    else {
        return Err(RuntimeError::NotEnabled);
    };
    let callee = sig.proc_def(&def)?;
    let values = index_args.iter().map(eval_closed).collect::<Result<Vec<_>, _>>()?;
    let env = proc_env(callee, &values)?;
    let potential = eval_pot(&callee.potential, &env)?;
    if chan_args.len() != callee.uses.len() {
        return Err(protocol(format!("{def} called with {} channel(s)", chan_args.len())));
    }
    debit(p, potential)?;
    let parent = p.def.clone();
    let client = p.cost_mode == CostMode::Costfree;
    let c = config.fresh_channel(callee.provides.1.subst(&env));
    let mut map: BTreeMap<String, String> = callee
        .uses
        .iter()
        .map(|(x, _)| x.clone())
        .zip(chan_args.iter().cloned())
        .collect();
    map.insert(callee.provides.0.clone(), c.clone());
    let body = callee.body.subst_indices(&env).rename(&map);
    let p = proc_mut(config, id)?;
    p.expr = cont.rename_one(&bind, &c);
    config.insert(Pred::Proc(ProcPred {
        provides: c.clone(),
        work: 0,
        potential,
        expr: body,
        cost_mode: callee.cost_mode,
        def: callee.name.clone(),
    }));
    let mut channels = vec![c];
    channels.extend(chan_args);
    Ok(StepInfo {
        channels,
        actor: parent,
        client,
        label: Some(def),
        carried: potential,
    })
}

fn absorb_forward(config: &mut Config, inst: &RuleInstance, msg_id: u64) -> Result<StepInfo, RuntimeError> {
    let msg = take_msg(config, msg_id)?;
    let Payload::Fwd { from, to } = msg.payload.clone() else {
        config.preds.insert(msg_id, Pred::Msg(msg));
        return Err(RuntimeError::NotEnabled);
    };
    let mut info = StepInfo {
        channels: vec![from.clone(), to.clone()],
        carried: msg.potential,
        ..StepInfo::default()
    };
    match (inst.rule, inst.subjects.get(1)) {
        (Rule::FwdPlusR, Some(PredRef::Pred(pid))) => {
            let p = proc_mut(config, *pid)?;
            if p.provides != to {
                return Err(RuntimeError::NotEnabled);
            }
            p.provides = from.clone();
            p.expr = p.expr.rename_one(&to, &from);
            p.work += msg.work;
            p.potential += msg.potential;
            info.actor = p.def.clone();
            info.client = p.cost_mode == CostMode::Costfree;
            if let Some(state) = config.channels.remove(&to) {
                config.channels.insert(
                    from.clone(),
                    ChannelState {
                        id: from.clone(),
                        provider_view: state.provider_view,
                    },
                );
            }
        }
        (Rule::FwdMinusR, Some(PredRef::Pred(cid))) => {
            let p = proc_mut(config, *cid)?;
            p.expr = p.expr.rename_one(&from, &to);
            p.work += msg.work;
            p.potential += msg.potential;
            info.actor = p.def.clone();
            info.client = p.cost_mode == CostMode::Costfree;
            config.channels.remove(&from);
        }
        (Rule::FwdMinusR, Some(PredRef::External)) => {
            config.external.channel = to.clone();
            config.external.work += msg.work;
            config.external.potential += msg.potential;
            info.actor = "external".to_string();
            config.channels.remove(&from);
        }
        _ => return Err(RuntimeError::NotEnabled),
    }
    Ok(info)
}

fn send(sig: &Signature, config: &mut Config, rule: Rule, id: u64, metric: Metric) -> Result<StepInfo, RuntimeError> {
    let p = proc_mut(config, id)?.clone();
    let cost = metric.for_mode(p.cost_mode);
    let mut info = StepInfo {
        actor: p.def.clone(),
        client: p.cost_mode == CostMode::Costfree,
        ..StepInfo::default()
    };
    let (msg, next_expr, work, charge) = match (&p.expr, rule) {
        (ProcExpr::Close { chan }, Rule::OneCS) => {
            let SType::One(r) = view_whnf(sig, config, chan)? else {
                return Err(protocol(format!("{} closes {chan}, whose type is not 1", p.def)));
            };
            let r = eval_closed(&r)?;
            if p.potential < r + cost.close {
                return Err(RuntimeError::NegativePotential {
                    actor: format!("{} providing {}", p.def, p.provides),
                    have: p.potential,
                    need: r + cost.close,
                });
            }
            info.channels = vec![chan.clone()];
            info.carried = r;
            // The closer's residual beyond `r` is dropped with it.
            let msg = MsgPred {
                carrier: chan.clone(),
                work: p.work + cost.close,
                potential: r,
                payload: Payload::Close { subject: chan.clone() },
            };
            config.preds.insert(id, Pred::Msg(msg));
            return Ok(info);
        }
        (ProcExpr::SendLabel { chan, label, cont }, Rule::PlusCS | Rule::WithCS) => {
            let view = view_whnf(sig, config, chan)?;
            let bs = match (&view, rule) {
                (SType::IChoice(bs), Rule::PlusCS) | (SType::EChoice(bs), Rule::WithCS) => bs,
                _ => return Err(protocol(format!("{} sends {label} on {chan} : {view}", p.def))),
            };
            let b = bs
                .iter()
                .find(|b| b.label == *label)
                .ok_or_else(|| protocol(format!("label {label} not in {view}")))?;
            let r = eval_closed(&b.pot)?;
            let c2 = config.fresh_channel(b.cont.clone());
            let polarity = if rule == Rule::PlusCS {
                Polarity::ProviderToClient
            } else {
                Polarity::ClientToProvider
            };
            info.channels = vec![chan.clone(), c2.clone()];
            info.label = Some(label.clone());
            info.carried = r;
            let msg = MsgPred {
                carrier: if rule == Rule::PlusCS { chan.clone() } else { c2.clone() },
                work: 0,
                potential: r,
                payload: Payload::Label {
                    subject: chan.clone(),
                    label: label.clone(),
                    cont: c2.clone(),
                    polarity,
                },
            };
            (msg, cont.rename_one(chan, &c2), cost.label, r + cost.label)
        }
        (ProcExpr::SendChan { chan, payload, cont }, Rule::TensorCS | Rule::LolliCS) => {
            let view = view_whnf(sig, config, chan)?;
            let (r, b) = match (view, rule) {
                (SType::Tensor(r, _, b), Rule::TensorCS) | (SType::Lolli(r, _, b), Rule::LolliCS) => (r, b),
                (view, _) => return Err(protocol(format!("{} sends a channel on {chan} : {view}", p.def))),
            };
            let r = eval_closed(&r)?;
            let c2 = config.fresh_channel(*b);
            let polarity = if rule == Rule::TensorCS {
                Polarity::ProviderToClient
            } else {
                Polarity::ClientToProvider
            };
            info.channels = vec![chan.clone(), payload.clone(), c2.clone()];
            info.carried = r;
            let msg = MsgPred {
                carrier: if rule == Rule::TensorCS { chan.clone() } else { c2.clone() },
                work: 0,
                potential: r,
                payload: Payload::Chan {
                    subject: chan.clone(),
                    payload: payload.clone(),
                    cont: c2.clone(),
                    polarity,
                },
            };
            (msg, cont.rename_one(chan, &c2), cost.channel, r + cost.channel)
        }
        _ => return Err(RuntimeError::NotEnabled),
    };
    let new_provides = match msg.payload {
        Payload::Label {
            polarity: Polarity::ProviderToClient,
            ref cont,
            ..
        }
        | Payload::Chan {
            polarity: Polarity::ProviderToClient,
            ref cont,
            ..
        } => cont.clone(),
        _ => p.provides.clone(),
    };
    let pm = proc_mut(config, id)?;
    debit(pm, charge)?;
    pm.work += work;
    pm.expr = next_expr;
    pm.provides = new_provides;
    config.insert(Pred::Msg(msg));
    Ok(info)
}

fn receive(config: &mut Config, inst: &RuleInstance, msg_id: u64) -> Result<StepInfo, RuntimeError> {
    let msg = take_msg(config, msg_id)?;
    if let (Rule::OneCR, Some(PredRef::External)) = (inst.rule, inst.subjects.get(1)) {
        let Payload::Close { subject } = &msg.payload else {
            config.preds.insert(msg_id, Pred::Msg(msg));
            return Err(RuntimeError::NotEnabled);
        };
        config.external.work += msg.work;
        config.external.potential += msg.potential;
        config.external.closed = true;
        config.channels.remove(subject);
        return Ok(StepInfo {
            channels: vec![subject.clone()],
            actor: "external".to_string(),
            carried: msg.potential,
            ..StepInfo::default()
        });
    }
    let Some(PredRef::Pred(rid)) = inst.subjects.get(1).copied() else {
        config.preds.insert(msg_id, Pred::Msg(msg));
        return Err(RuntimeError::NotEnabled);
    };
    let p = proc_mut(config, rid)?;
    let mut info = StepInfo {
        actor: p.def.clone(),
        client: p.cost_mode == CostMode::Costfree,
        carried: msg.potential,
        ..StepInfo::default()
    };
    let consumed;
    match (&msg.payload, p.expr.clone()) {
        (Payload::Label { subject, label, cont, polarity }, ProcExpr::CaseRecv { chan, arms }) if chan == *subject => {
            let arm = arms
                .iter()
                .find(|a| a.label == *label)
                .ok_or_else(|| protocol(format!("{} has no arm for {label}", p.def)))?;
            p.expr = arm.body.rename_one(&chan, cont);
            if *polarity == Polarity::ClientToProvider {
                p.provides = cont.clone();
            }
            info.channels = vec![subject.clone(), cont.clone()];
            info.label = Some(label.clone());
            consumed = subject.clone();
        }
        (
            Payload::Chan {
                subject,
                payload,
                cont,
                polarity,
            },
            ProcExpr::RecvChan { chan, bind, cont: body },
        ) if chan == *subject => {
            let map = BTreeMap::from([(chan.clone(), cont.clone()), (bind, payload.clone())]);
            p.expr = body.rename(&map);
            if *polarity == Polarity::ClientToProvider {
                p.provides = cont.clone();
            }
            info.channels = vec![subject.clone(), payload.clone(), cont.clone()];
            consumed = subject.clone();
        }
        (Payload::Close { subject }, ProcExpr::Wait { chan, cont }) if chan == *subject => {
            p.expr = *cont;
            info.channels = vec![subject.clone()];
            consumed = subject.clone();
        }
        _ => {
            config.preds.insert(msg_id, Pred::Msg(msg));
            return Err(RuntimeError::NotEnabled);
        }
    }
    p.work += msg.work;
    p.potential += msg.potential;
    config.channels.remove(&consumed);
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn sig(src: &str) -> Signature {
        parse_program(src).unwrap()
    }

    #[test]
    fn init_rejects_open_mains() {
        let s = sig("proc p [] |0| (x : 1^0) -> (c : 1^0) = wait x; close c");
        assert_eq!(init_config(&s, "p").unwrap_err(), RuntimeError::MainNotClosed("p".into()));
        assert_eq!(init_config(&s, "q").unwrap_err(), RuntimeError::NoSuchMain("q".into()));
    }

    #[test]
    fn init_evaluates_declared_potential() {
        let s = sig("proc m [] |clog(4)+1| () -> (c : 1^0) = close c");
        let c = init_config(&s, "m").unwrap();
        // bit length of 4 is 3
        assert_eq!(c.totals(), (0, 3 + 1));
        assert_eq!(c.weight(), 4);
    }

    #[test]
    fn blocked_case_has_no_instance() {
        let s = sig("type t = +{ a^0 : 1^0 }\nproc m [] |0| (x : t) -> (c : 1^0) = case x { a => wait x; close c }");
        let mut c = Config::new(SType::One(crate::PotExpr::zero()));
        c.channels.insert(
            "c#9".into(),
            ChannelState {
                id: "c#9".into(),
                provider_view: s.type_defs["t"].body.clone(),
            },
        );
        c.insert(Pred::Proc(ProcPred {
            provides: "c#0".into(),
            work: 0,
            potential: 0,
            expr: s.proc_defs["m"].body.rename_one("x", "c#9").rename_one("c", "c#0"),
            cost_mode: CostMode::Standard,
            def: "m".into(),
        }));
        assert!(enabled(&c).is_empty());
    }

    #[test]
    fn close_step_adds_close_cost_to_the_message() {
        let s = sig("proc m [] |1| () -> (c : 1^0) = close c");
        let mut c = init_config(&s, "m").unwrap();
        let inst = enabled(&c).remove(0);
        assert_eq!(inst.rule, Rule::OneCS);
        step(&s, &mut c, &inst, Metric::MESSAGES).unwrap();
        let Pred::Msg(m) = &c.preds[&0] else { panic!() };
        assert_eq!((m.work, m.potential), (1, 0));
        let inst = enabled(&c).remove(0);
        assert_eq!((inst.rule, inst.key), (Rule::OneCR, PredRef::External));
        step(&s, &mut c, &inst, Metric::MESSAGES).unwrap();
        assert!(c.is_final());
        assert_eq!(c.totals(), (1, 0));
    }

    #[test]
    fn underfunded_send_is_a_negative_potential() {
        let s = sig("proc m [] |0| () -> (c : 1^0) = close c");
        let mut c = init_config(&s, "m").unwrap();
        let inst = enabled(&c).remove(0);
        let err = step(&s, &mut c, &inst, Metric::MESSAGES).unwrap_err();
        assert!(matches!(err, RuntimeError::NegativePotential { have: 0, need: 1, .. }));
    }

    #[test]
    fn forward_keeps_work_and_drops_potential() {
        let s = sig(
            "proc k [] |0| () -> (d : 1^0) = close d\n\
             proc m [] |2| () -> (c : 1^0) = x <- spawn k[](); fwd c x",
        );
        let mut c = init_config(&s, "m").unwrap();
        let inst = enabled(&c).remove(0);
        step(&s, &mut c, &inst, Metric::FREE).unwrap();
        proc_mut(&mut c, 0).unwrap().work = 3;
        let before = c.weight();
        let inst = enabled(&c).into_iter().find(|i| i.rule == Rule::FwdS).unwrap();
        step(&s, &mut c, &inst, Metric::FREE).unwrap();
        let Pred::Msg(m) = &c.preds[&0] else { panic!() };
        assert_eq!((m.work, m.potential), (3, 0));
        assert_eq!(c.weight(), before - 2);
    }
}
