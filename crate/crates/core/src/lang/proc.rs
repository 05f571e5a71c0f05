//! Process terms and process definitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::pot::{Constraint, IndexEnv, PotExpr};
use super::types::SType;

/// One arm of a `case`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    pub body: ProcExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcExpr {
    /// `bind <- spawn def[index_args](chan_args); cont`
    Spawn {
        def: String,
        index_args: Vec<PotExpr>,
        chan_args: Vec<String>,
        bind: String,
        cont: Box<ProcExpr>,
    },
    /// `fwd provided used`
    Fwd { provided: String, used: String },
    /// `chan.label; cont`
    SendLabel {
        chan: String,
        label: String,
        cont: Box<ProcExpr>,
    },
    /// `case chan { label => body | ... }`
    CaseRecv { chan: String, arms: Vec<Arm> },
    /// `send chan payload; cont`
    SendChan {
        chan: String,
        payload: String,
        cont: Box<ProcExpr>,
    },
    /// `bind <- recv chan; cont`
    RecvChan {
        chan: String,
        bind: String,
        cont: Box<ProcExpr>,
    },
    Close { chan: String },
    Wait { chan: String, cont: Box<ProcExpr> },
}

impl ProcExpr {
    pub fn arm(arms: &[Arm], label: &str) -> Option<usize> {
        arms.iter().position(|a| a.label == label)
    }

    /// Simultaneous renaming of free channel names. Binders shadow.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> ProcExpr {
        let r = |c: &String| map.get(c).cloned().unwrap_or_else(|| c.clone());
        let under = |bind: &String, body: &ProcExpr| {
            if map.contains_key(bind) {
                let mut inner = map.clone();
                inner.remove(bind);
                body.rename(&inner)
            } else {
                body.rename(map)
            }
        };
        match self {
            ProcExpr::Spawn {
                def,
                index_args,
                chan_args,
                bind,
                cont,
            } => ProcExpr::Spawn {
                def: def.clone(),
                index_args: index_args.clone(),
                chan_args: chan_args.iter().map(r).collect(),
                bind: bind.clone(),
                cont: Box::new(under(bind, cont)),
            },
            ProcExpr::Fwd { provided, used } => ProcExpr::Fwd {
                provided: r(provided),
                used: r(used),
            },
            ProcExpr::SendLabel { chan, label, cont } => ProcExpr::SendLabel {
                chan: r(chan),
                label: label.clone(),
                cont: Box::new(cont.rename(map)),
            },
            ProcExpr::CaseRecv { chan, arms } => ProcExpr::CaseRecv {
                chan: r(chan),
                arms: arms
                    .iter()
                    .map(|a| Arm {
                        label: a.label.clone(),
                        body: a.body.rename(map),
                    })
                    .collect(),
            },
            ProcExpr::SendChan {
                chan,
                payload,
                cont,
            } => ProcExpr::SendChan {
                chan: r(chan),
                payload: r(payload),
                cont: Box::new(cont.rename(map)),
            },
            ProcExpr::RecvChan { chan, bind, cont } => ProcExpr::RecvChan {
                chan: r(chan),
                bind: bind.clone(),
                cont: Box::new(under(bind, cont)),
            },
            ProcExpr::Close { chan } => ProcExpr::Close { chan: r(chan) },
            ProcExpr::Wait { chan, cont } => ProcExpr::Wait {
                chan: r(chan),
                cont: Box::new(cont.rename(map)),
            },
        }
    }

    /// Substitutes index variables in spawn arguments.
    pub fn subst_indices(&self, env: &IndexEnv) -> ProcExpr {
        let mut out = self.clone();
        out.subst_indices_in_place(env);
        out
    }

    fn subst_indices_in_place(&mut self, env: &IndexEnv) {
        match self {
            ProcExpr::Spawn { index_args, cont, .. } => {
                for a in index_args.iter_mut() {
                    *a = a.subst(env);
                }
                cont.subst_indices_in_place(env);
            }
            ProcExpr::CaseRecv { arms, .. } => arms.iter_mut().for_each(|a| a.body.subst_indices_in_place(env)),
            ProcExpr::SendLabel { cont, .. }
            | ProcExpr::SendChan { cont, .. }
            | ProcExpr::RecvChan { cont, .. }
            | ProcExpr::Wait { cont, .. } => cont.subst_indices_in_place(env),
            ProcExpr::Fwd { .. } | ProcExpr::Close { .. } => {}
        }
    }

    pub fn rename_one(&self, from: &str, to: &str) -> ProcExpr {
        self.rename(&BTreeMap::from([(from.to_string(), to.to_string())]))
    }

    pub fn free_chans(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        let bound_in = |bind: &String, body: &ProcExpr, out: &mut BTreeSet<String>| {
            let mut inner = BTreeSet::new();
            body.collect_free(&mut inner);
            inner.remove(bind);
            out.extend(inner);
        };
        match self {
            ProcExpr::Spawn {
                chan_args,
                bind,
                cont,
                ..
            } => {
                out.extend(chan_args.iter().cloned());
                bound_in(bind, cont, out);
            }
            ProcExpr::Fwd { provided, used } => {
                out.insert(provided.clone());
                out.insert(used.clone());
            }
            ProcExpr::SendLabel { chan, cont, .. } | ProcExpr::Wait { chan, cont } => {
                out.insert(chan.clone());
                cont.collect_free(out);
            }
            ProcExpr::CaseRecv { chan, arms } => {
                out.insert(chan.clone());
                arms.iter().for_each(|a| a.body.collect_free(out));
            }
            ProcExpr::SendChan {
                chan,
                payload,
                cont,
            } => {
                out.insert(chan.clone());
                out.insert(payload.clone());
                cont.collect_free(out);
            }
            ProcExpr::RecvChan { chan, bind, cont } => {
                out.insert(chan.clone());
                bound_in(bind, cont, out);
            }
            ProcExpr::Close { chan } => {
                out.insert(chan.clone());
            }
        }
    }

    /// Short name of the head constructor, for diagnostics.
    pub fn head_name(&self) -> &'static str {
        match self {
            ProcExpr::Spawn { .. } => "spawn",
            ProcExpr::Fwd { .. } => "fwd",
            ProcExpr::SendLabel { .. } => "send label",
            ProcExpr::CaseRecv { .. } => "case",
            ProcExpr::SendChan { .. } => "send",
            ProcExpr::RecvChan { .. } => "recv",
            ProcExpr::Close { .. } => "close",
            ProcExpr::Wait { .. } => "wait",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    #[default]
    Standard,
    Costfree,
}

/// `[costfree] proc name[params | domain] |potential| (uses) -> (provides) = body`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcDef {
    pub name: String,
    pub params: Vec<String>,
    pub domain: Vec<Constraint>,
    pub potential: PotExpr,
    pub uses: Vec<(String, SType)>,
    pub provides: (String, SType),
    pub cost_mode: CostMode,
    pub body: ProcExpr,
}

/// Cost of each message kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Metric {
    pub label: u64,
    pub channel: u64,
    pub close: u64,
}

impl Default for Metric {
    fn default() -> Self {
        Metric::MESSAGES
    }
}

impl Metric {
    /// One unit per message.
    pub const MESSAGES: Metric = Metric {
        label: 1,
        channel: 1,
        close: 1,
    };
    pub const FREE: Metric = Metric {
        label: 0,
        channel: 0,
        close: 0,
    };

    /// The metric a process of the given mode pays under.
    pub fn for_mode(self, mode: CostMode) -> Metric {
        match mode {
            CostMode::Standard => self,
            CostMode::Costfree => Metric::FREE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wait_then_close(c: &str, d: &str) -> ProcExpr {
        ProcExpr::Wait {
            chan: d.into(),
            cont: Box::new(ProcExpr::Close { chan: c.into() }),
        }
    }

    #[test]
    fn rename_is_simultaneous() {
        let p = ProcExpr::Fwd {
            provided: "a".into(),
            used: "b".into(),
        };
        let map = BTreeMap::from([("a".to_string(), "b".to_string()), ("b".to_string(), "a".to_string())]);
        assert_eq!(
            p.rename(&map),
            ProcExpr::Fwd {
                provided: "b".into(),
                used: "a".into()
            }
        );
    }

    #[test]
    fn binders_shadow_renaming() {
        let p = ProcExpr::RecvChan {
            chan: "s".into(),
            bind: "x".into(),
            cont: Box::new(wait_then_close("s", "x")),
        };
        let q = p.rename_one("x", "c#9");
        assert_eq!(q, p);
        let q = p.rename_one("s", "c#1");
        assert_eq!(q.free_chans(), BTreeSet::from(["c#1".to_string()]));
    }

    #[test]
    fn free_channels_exclude_bound_names() {
        let p = ProcExpr::Spawn {
            def: "item".into(),
            index_args: vec![],
            chan_args: vec!["t".into()],
            bind: "x".into(),
            cont: Box::new(wait_then_close("s", "x")),
        };
        let names: Vec<_> = p.free_chans().into_iter().collect();
        assert_eq!(names, vec!["s".to_string(), "t".to_string()]);
    }

    #[test]
    fn costfree_mode_zeroes_metric() {
        assert_eq!(Metric::MESSAGES.for_mode(CostMode::Costfree), Metric::FREE);
        assert_eq!(Metric::MESSAGES.for_mode(CostMode::Standard), Metric::MESSAGES);
    }
}
