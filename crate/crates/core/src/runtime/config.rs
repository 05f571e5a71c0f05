use std::collections::BTreeMap;

use serde::Serialize;

use crate::lang::{CostMode, ProcExpr, SType};

/// Prefix of every runtime channel name. Source identifiers cannot contain
/// `#`, so substituting runtime names into process bodies never captures.
pub const CHANNEL_PREFIX: &str = "c#";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProcPred {
    pub provides: String,
    pub work: u64,
    pub potential: u64,
    pub expr: ProcExpr,
    pub cost_mode: CostMode,
    /// Definition this process was spawned from.
    pub def: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Polarity {
    ProviderToClient,
    ClientToProvider,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Payload {
    /// `from ← to`: the provider of `from` is now whoever provides `to`.
    Fwd { from: String, to: String },
    /// A label sent along `subject`; the session continues on `cont`.
    Label {
        subject: String,
        label: String,
        cont: String,
        polarity: Polarity,
    },
    /// A channel sent along `subject`; the session continues on `cont`.
    Chan {
        subject: String,
        payload: String,
        cont: String,
        polarity: Polarity,
    },
    Close { subject: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MsgPred {
    /// The channel this message provides.
    pub carrier: String,
    pub work: u64,
    pub potential: u64,
    pub payload: Payload,
}

impl MsgPred {
    /// Channels the message uses as a client.
    pub fn uses(&self) -> Vec<&str> {
        match &self.payload {
            Payload::Fwd { to, .. } => vec![to],
            Payload::Label {
                subject,
                cont,
                polarity,
                ..
            } => match polarity {
                Polarity::ProviderToClient => vec![cont],
                Polarity::ClientToProvider => vec![subject],
            },
            Payload::Chan {
                subject,
                payload,
                cont,
                polarity,
            } => match polarity {
                Polarity::ProviderToClient => vec![payload, cont],
                Polarity::ClientToProvider => vec![subject, payload],
            },
            Payload::Close { .. } => vec![],
        }
    }

    /// The message written as a process term.
    pub fn as_process(&self) -> ProcExpr {
        let fwd = |provided: &str, used: &str| {
            Box::new(ProcExpr::Fwd {
                provided: provided.to_string(),
                used: used.to_string(),
            })
        };
        let link = |subject: &str, cont: &str, polarity: Polarity| match polarity {
            Polarity::ProviderToClient => fwd(subject, cont),
            Polarity::ClientToProvider => fwd(cont, subject),
        };
        match &self.payload {
            Payload::Fwd { from, to } => *fwd(from, to),
            Payload::Label {
                subject,
                label,
                cont,
                polarity,
            } => ProcExpr::SendLabel {
                chan: subject.clone(),
                label: label.clone(),
                cont: link(subject, cont, *polarity),
            },
            Payload::Chan {
                subject,
                payload,
                cont,
                polarity,
            } => ProcExpr::SendChan {
                chan: subject.clone(),
                payload: payload.clone(),
                cont: link(subject, cont, *polarity),
            },
            Payload::Close { subject } => ProcExpr::Close { chan: subject.clone() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Pred {
    Proc(ProcPred),
    Msg(MsgPred),
}

impl Pred {
    pub fn work(&self) -> u64 {
        match self {
            Pred::Proc(p) => p.work,
            Pred::Msg(m) => m.work,
        }
    }

    pub fn potential(&self) -> u64 {
        match self {
            Pred::Proc(p) => p.potential,
            Pred::Msg(m) => m.potential,
        }
    }

    pub fn provides(&self) -> &str {
        match self {
            Pred::Proc(p) => &p.provides,
            Pred::Msg(m) => &m.carrier,
        }
    }

    /// Channels the predicate is a client of.
    pub fn uses(&self) -> Vec<String> {
        match self {
            Pred::Proc(p) => {
                let mut fc = p.expr.free_chans();
                fc.remove(&p.provides);
                fc.into_iter().collect()
            }
            Pred::Msg(m) => m.uses().into_iter().map(str::to_string).collect(),
        }
    }

    pub fn cost_mode(&self) -> Option<CostMode> {
        match self {
            Pred::Proc(p) => Some(p.cost_mode),
            Pred::Msg(_) => None,
        }
    }
}

/// Observer of the root channel. It stands in for the environment that
/// receives the program's final `close`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct External {
    pub channel: String,
    pub work: u64,
    pub potential: u64,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChannelState {
    pub id: String,
    pub provider_view: SType,
}

/// Either a predicate (by insertion id) or the external observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PredRef {
    Pred(u64),
    External,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ends {
    pub providers: Vec<PredRef>,
    pub clients: Vec<PredRef>,
}

/// A multiset of predicates keyed by insertion id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Config {
    pub preds: BTreeMap<u64, Pred>,
    pub channels: BTreeMap<String, ChannelState>,
    pub external: External,
    pub fresh_counter: u64,
    pub next_id: u64,
}

impl Config {
    pub fn new(root_view: SType) -> Self {
        let root = format!("{CHANNEL_PREFIX}0");
        Config {
            preds: BTreeMap::new(),
            channels: BTreeMap::from([(
                root.clone(),
                ChannelState {
                    id: root.clone(),
                    provider_view: root_view,
                },
            )]),
            external: External {
                channel: root,
                work: 0,
                potential: 0,
                closed: false,
            },
            fresh_counter: 1,
            next_id: 0,
        }
    }

    pub fn root(&self) -> &str {
        &self.external.channel
    }

    pub fn fresh_channel(&mut self, view: SType) -> String {
        let id = format!("{CHANNEL_PREFIX}{}", self.fresh_counter);
        self.fresh_counter += 1;
        self.channels.insert(
            id.clone(),
            ChannelState {
                id: id.clone(),
                provider_view: view,
            },
        );
        id
    }

    pub fn insert(&mut self, pred: Pred) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.preds.insert(id, pred);
        id
    }

    pub fn view(&self, c: &str) -> Option<&SType> {
        self.channels.get(c).map(|s| &s.provider_view)
    }

    /// Componentwise sums of work and potential, including the observer.
    pub fn totals(&self) -> (u64, u64) {
        let (w, p) = self
            .preds
            .values()
            .fold((0, 0), |(w, p), x| (w + x.work(), p + x.potential()));
        (w + self.external.work, p + self.external.potential)
    }

    /// Total potential plus total work.
    pub fn weight(&self) -> u64 {
        let (w, p) = self.totals();
        w + p
    }

    /// Providers and clients of every channel mentioned anywhere.
    pub fn ends(&self) -> BTreeMap<String, Ends> {
        let mut out: BTreeMap<String, Ends> = BTreeMap::new();
        for c in self.channels.keys() {
            out.entry(c.clone()).or_default();
        }
        for (id, p) in &self.preds {
            out.entry(p.provides().to_string())
                .or_default()
                .providers
                .push(PredRef::Pred(*id));
            for c in p.uses() {
                out.entry(c).or_default().clients.push(PredRef::Pred(*id));
            }
        }
        if !self.external.closed {
            out.entry(self.external.channel.clone())
                .or_default()
                .clients
                .push(PredRef::External);
        }
        out
    }

    pub fn is_final(&self) -> bool {
        self.external.closed && self.preds.is_empty()
    }
}
