//! Potential-aware typing of process definitions and runtime configurations.
//!
//! Checking is syntax-directed. Every process head is classified as a debit
//! (label/channel send, close, spawn), a credit (receive, wait, case) or a
//! forward. [`min_potential`] folds the debits bottom-up. [`check_def`] walks
//! forward from the declared potential, threading the exact residual, and
//! records one [`Step`] per rule.

mod config;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use config::{typecheck_config, ConfigError};

use crate::error::LangError;
use crate::lang::{
    eval_closed, eval_pot, proc_env, type_equal, whnf, Branch, IndexEnv, Metric, ProcDef, ProcExpr, SType,
    Signature,
};

/// The linear context: channel name to its (closed) type.
pub type Ctx = BTreeMap<String, SType>;

/// A context together with the potential available to the process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingContext {
    pub entries: Ctx,
    pub potential: u64,
}

/// `lhs₁ + … ≥ rhs₁ + …` over the naturals, kept term by term for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub lhs: Vec<u64>,
    pub rhs: Vec<u64>,
}

impl Inequality {
    pub fn lhs_total(&self) -> u64 {
        self.lhs.iter().sum()
    }

    pub fn rhs_total(&self) -> u64 {
        self.rhs.iter().sum()
    }

    pub fn holds(&self) -> bool {
        self.lhs_total() >= self.rhs_total()
    }

    /// The inequality between the two sums, e.g. `1 ≥ 2`.
    pub fn summary(&self) -> String {
        format!("{} ≥ {}", self.lhs_total(), self.rhs_total())
    }
}

fn join_terms(ts: &[u64]) -> String {
    if ts.is_empty() {
        return "0".to_string();
    }
    ts.iter().map(u64::to_string).collect::<Vec<_>>().join("+")
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≥ {}", join_terms(&self.lhs), join_terms(&self.rhs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TypeErrorKind {
    InsufficientPotential,
    ContextMismatch,
    LabelNotInType,
    LinearityViolation,
    WrongProvidedType,
    DomainViolation,
    UnknownType,
    UnknownProc,
    IndexError,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{kind:?} in {location}: {detail}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub location: String,
    pub detail: String,
    pub inequality: Option<Inequality>,
}

impl TypeError {
    fn new(kind: TypeErrorKind, location: impl Into<String>, detail: impl Into<String>) -> Self {
        TypeError {
            kind,
            location: location.into(),
            detail: detail.into(),
            inequality: None,
        }
    }

    fn lang(location: &str, e: LangError) -> Self {
        let kind = match e {
            LangError::UnknownType(_) => TypeErrorKind::UnknownType,
            LangError::UnknownProc(_) => TypeErrorKind::UnknownProc,
            LangError::DomainViolation { .. } => TypeErrorKind::DomainViolation,
            LangError::UnboundIndexVar(_) | LangError::IndexArity { .. } => TypeErrorKind::IndexError,
        };
        TypeError::new(kind, location, e.to_string())
    }
}

/// One rule application in a derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub point: String,
    pub rule: &'static str,
    pub context: Vec<String>,
    pub before: u64,
    pub after: u64,
    pub inequality: Option<Inequality>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub steps: Vec<Step>,
    pub conclusion: String,
}

fn show_ctx(ctx: &Ctx) -> Vec<String> {
    ctx.iter().map(|(c, t)| format!("{c} : {t}")).collect()
}

/// A judgment `ctx ⊢ p :: prov` at a program point.
struct Judg<'p> {
    p: &'p ProcExpr,
    ctx: Ctx,
    prov: (String, SType),
    path: String,
}

enum Shape<'p> {
    Debit {
        rule: &'static str,
        costs: Vec<u64>,
        next: Option<Judg<'p>>,
    },
    Credit {
        rule: &'static str,
        arms: Vec<(u64, Judg<'p>)>,
    },
    Id,
}

struct Checker<'a> {
    sig: &'a Signature,
    metric: Metric,
    who: String,
}

impl<'a> Checker<'a> {
    fn loc(&self, point: &str) -> String {
        if point.is_empty() {
            self.who.clone()
        } else {
            format!("{} at {point}", self.who)
        }
    }

    fn err(&self, kind: TypeErrorKind, point: &str, detail: impl Into<String>) -> TypeError {
        TypeError::new(kind, self.loc(point), detail)
    }

    fn whnf(&self, t: &SType, point: &str) -> Result<SType, TypeError> {
        whnf(t, self.sig).map_err(|e| TypeError::lang(&self.loc(point), e))
    }

    fn pot(&self, e: &crate::lang::PotExpr, point: &str) -> Result<u64, TypeError> {
        eval_closed(e).map_err(|err| TypeError::lang(&self.loc(point), err))
    }

    fn equal(&self, a: &SType, b: &SType, point: &str) -> Result<bool, TypeError> {
        type_equal(a, b, self.sig).map_err(|e| TypeError::lang(&self.loc(point), e))
    }

    fn take(&self, ctx: &mut Ctx, c: &str, point: &str) -> Result<SType, TypeError> {
        ctx.remove(c).ok_or_else(|| {
            self.err(
                TypeErrorKind::ContextMismatch,
                point,
                format!("channel `{c}` is not in the context"),
            )
        })
    }

    fn fresh(&self, j: &Judg, ctx: &Ctx, x: &str, point: &str) -> Result<(), TypeError> {
        if ctx.contains_key(x) || j.prov.0 == x {
            return Err(self.err(
                TypeErrorKind::LinearityViolation,
                point,
                format!("channel `{x}` is already in scope"),
            ));
        }
        Ok(())
    }

    fn branch<'b>(&self, bs: &'b [Branch], label: &str, point: &str) -> Result<&'b Branch, TypeError> {
        bs.iter().find(|b| b.label == label).ok_or_else(|| {
            self.err(
                TypeErrorKind::LabelNotInType,
                point,
                format!("label `{label}` is not offered"),
            )
        })
    }

    fn analyze<'p>(&self, j: &Judg<'p>) -> Result<Shape<'p>, TypeError> {
        use TypeErrorKind::*;
        let sub = |point: &str| {
            if j.path.is_empty() {
                point.to_string()
            } else {
                format!("{} > {point}", j.path)
            }
        };
        let provided = |c: &str| c == j.prov.0;
        match j.p {
            ProcExpr::Fwd { provided: x, used: y } => {
                let point = sub(&format!("fwd {x} {y}"));
                if !provided(x) {
                    return Err(self.err(
                        WrongProvidedType,
                        &point,
                        format!("`fwd` must name the provided channel `{}` first", j.prov.0),
                    ));
                }
                let Some(ty) = j.ctx.get(y) else {
                    return Err(self.err(ContextMismatch, &point, format!("channel `{y}` is not in the context")));
                };
                if j.ctx.len() > 1 {
                    return Err(self.err(
                        LinearityViolation,
                        &point,
                        format!("unconsumed channels: {}", show_ctx(&j.ctx).join(", ")),
                    ));
                }
                if !self.equal(ty, &j.prov.1, &point)? {
                    return Err(self.err(
                        WrongProvidedType,
                        &point,
                        format!("`{y} : {ty}` cannot provide `{x} : {}`", j.prov.1),
                    ));
                }
                Ok(Shape::Id)
            }
            ProcExpr::Close { chan } => {
                let point = sub(&format!("close {chan}"));
                if !provided(chan) {
                    return Err(self.err(ContextMismatch, &point, format!("`{chan}` is not the provided channel")));
                }
                let SType::One(r) = self.whnf(&j.prov.1, &point)? else {
                    return Err(self.err(
                        WrongProvidedType,
                        &point,
                        format!("`{chan} : {}` cannot be closed", j.prov.1),
                    ));
                };
                if !j.ctx.is_empty() {
                    return Err(self.err(
                        LinearityViolation,
                        &point,
                        format!("unconsumed channels: {}", show_ctx(&j.ctx).join(", ")),
                    ));
                }
                Ok(Shape::Debit {
                    rule: "oneR",
                    costs: vec![self.pot(&r, &point)?, self.metric.close],
                    next: None,
                })
            }
            ProcExpr::Wait { chan, cont } => {
                let point = sub(&format!("wait {chan}"));
                let mut ctx = j.ctx.clone();
                let t = self.take(&mut ctx, chan, &point)?;
                let SType::One(r) = self.whnf(&t, &point)? else {
                    return Err(self.err(ContextMismatch, &point, format!("`{chan} : {t}` cannot be waited on")));
                };
                Ok(Shape::Credit {
                    rule: "oneL",
                    arms: vec![(
                        self.pot(&r, &point)?,
                        Judg {
                            p: cont,
                            ctx,
                            prov: j.prov.clone(),
                            path: point,
                        },
                    )],
                })
            }
            ProcExpr::SendLabel { chan, label, cont } => {
                let point = sub(&format!("{chan}.{label}"));
                let mut ctx = j.ctx.clone();
                let mut prov = j.prov.clone();
                let rule;
                let r;
                if provided(chan) {
                    let SType::IChoice(bs) = self.whnf(&prov.1, &point)? else {
                        return Err(self.err(
                            WrongProvidedType,
                            &point,
                            format!("`{chan} : {}` does not offer an internal choice", prov.1),
                        ));
                    };
                    let b = self.branch(&bs, label, &point)?;
                    rule = "plusR";
                    r = self.pot(&b.pot, &point)?;
                    prov.1 = b.cont.clone();
                } else {
                    let t = self.take(&mut ctx, chan, &point)?;
                    let SType::EChoice(bs) = self.whnf(&t, &point)? else {
                        return Err(self.err(
                            ContextMismatch,
                            &point,
                            format!("`{chan} : {t}` does not accept labels"),
                        ));
                    };
                    let b = self.branch(&bs, label, &point)?;
                    rule = "withL";
                    r = self.pot(&b.pot, &point)?;
                    ctx.insert(chan.clone(), b.cont.clone());
                }
                Ok(Shape::Debit {
                    rule,
                    costs: vec![r, self.metric.label],
                    next: Some(Judg {
                        p: cont,
                        ctx,
                        prov,
                        path: point,
                    }),
                })
            }
            ProcExpr::CaseRecv { chan, arms } => {
                let point = sub(&format!("case {chan}"));
                let mut ctx = j.ctx.clone();
                let (rule, bs) = if provided(chan) {
                    let SType::EChoice(bs) = self.whnf(&j.prov.1, &point)? else {
                        return Err(self.err(
                            WrongProvidedType,
                            &point,
                            format!("`{chan} : {}` does not offer an external choice", j.prov.1),
                        ));
                    };
                    ("withR", bs)
                } else {
                    let t = self.take(&mut ctx, chan, &point)?;
                    let SType::IChoice(bs) = self.whnf(&t, &point)? else {
                        return Err(self.err(ContextMismatch, &point, format!("`{chan} : {t}` does not send labels")));
                    };
                    ("plusL", bs)
                };
                if let Some(b) = bs.iter().find(|b| ProcExpr::arm(arms, &b.label).is_none()) {
                    return Err(self.err(LabelNotInType, &point, format!("no arm for label `{}`", b.label)));
                }
                let mut out = Vec::new();
                for arm in arms {
                    let b = self.branch(&bs, &arm.label, &point)?;
                    let mut ctx = ctx.clone();
                    let mut prov = j.prov.clone();
                    if provided(chan) {
                        prov.1 = b.cont.clone();
                    } else {
                        ctx.insert(chan.clone(), b.cont.clone());
                    }
                    out.push((
                        self.pot(&b.pot, &point)?,
                        Judg {
                            p: &arm.body,
                            ctx,
                            prov,
                            path: format!("{point}/{}", arm.label),
                        },
                    ));
                }
                Ok(Shape::Credit { rule, arms: out })
            }
            ProcExpr::SendChan { chan, payload, cont } => {
                let point = sub(&format!("send {chan} {payload}"));
                if chan == payload {
                    return Err(self.err(LinearityViolation, &point, format!("`{chan}` sent along itself")));
                }
                let mut ctx = j.ctx.clone();
                let mut prov = j.prov.clone();
                let w = self.take(&mut ctx, payload, &point)?;
                let (rule, r, a) = if provided(chan) {
                    let SType::Tensor(r, a, b) = self.whnf(&prov.1, &point)? else {
                        return Err(self.err(
                            WrongProvidedType,
                            &point,
                            format!("`{chan} : {}` does not send channels", prov.1),
                        ));
                    };
                    prov.1 = *b;
                    ("tensorR", r, a)
                } else {
                    let t = self.take(&mut ctx, chan, &point)?;
                    let SType::Lolli(r, a, b) = self.whnf(&t, &point)? else {
                        return Err(self.err(
                            ContextMismatch,
                            &point,
                            format!("`{chan} : {t}` does not accept channels"),
                        ));
                    };
                    ctx.insert(chan.clone(), *b);
                    ("lolliL", r, a)
                };
                if !self.equal(&w, &a, &point)? {
                    return Err(self.err(
                        ContextMismatch,
                        &point,
                        format!("payload `{payload} : {w}` does not match `{a}`"),
                    ));
                }
                Ok(Shape::Debit {
                    rule,
                    costs: vec![self.pot(&r, &point)?, self.metric.channel],
                    next: Some(Judg {
                        p: cont,
                        ctx,
                        prov,
                        path: point,
                    }),
                })
            }
            ProcExpr::RecvChan { chan, bind, cont } => {
                let point = sub(&format!("{bind} <- recv {chan}"));
                let mut ctx = j.ctx.clone();
                let mut prov = j.prov.clone();
                self.fresh(j, &ctx, bind, &point)?;
                let (rule, r) = if provided(chan) {
                    let SType::Lolli(r, a, b) = self.whnf(&prov.1, &point)? else {
                        return Err(self.err(
                            WrongProvidedType,
                            &point,
                            format!("`{chan} : {}` does not receive channels", prov.1),
                        ));
                    };
                    prov.1 = *b;
                    ctx.insert(bind.clone(), *a);
                    ("lolliR", r)
                } else {
                    let t = self.take(&mut ctx, chan, &point)?;
                    let SType::Tensor(r, a, b) = self.whnf(&t, &point)? else {
                        return Err(self.err(ContextMismatch, &point, format!("`{chan} : {t}` does not send channels")));
                    };
                    ctx.insert(chan.clone(), *b);
                    ctx.insert(bind.clone(), *a);
                    ("tensorL", r)
                };
                Ok(Shape::Credit {
                    rule,
                    arms: vec![(
                        self.pot(&r, &point)?,
                        Judg {
                            p: cont,
                            ctx,
                            prov,
                            path: point,
                        },
                    )],
                })
            }
            ProcExpr::Spawn {
                def,
                index_args,
                chan_args,
                bind,
                cont,
            } => {
                let call = format!(
                    "{def}[{}]({})",
                    index_args.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "),
                    chan_args.join(", ")
                );
                let point = sub(&format!("{bind} <- spawn {call}"));
                let lang = |e| TypeError::lang(&self.loc(&point), e);
                let callee = self.sig.proc_def(def).map_err(lang)?;
                let values = index_args
                    .iter()
                    .map(eval_closed)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(lang)?;
                let env = proc_env(callee, &values).map_err(lang)?;
                if chan_args.len() != callee.uses.len() {
                    return Err(self.err(
                        ContextMismatch,
                        &point,
                        format!("`{def}` uses {} channel(s), got {}", callee.uses.len(), chan_args.len()),
                    ));
                }
                let mut ctx = j.ctx.clone();
                for (arg, (_, expected)) in chan_args.iter().zip(&callee.uses) {
                    let t = self.take(&mut ctx, arg, &point)?;
                    let expected = expected.subst(&env);
                    if !self.equal(&t, &expected, &point)? {
                        return Err(self.err(
                            ContextMismatch,
                            &point,
                            format!("argument `{arg} : {t}` does not match `{expected}`"),
                        ));
                    }
                }
                self.fresh(j, &ctx, bind, &point)?;
                ctx.insert(bind.clone(), callee.provides.1.subst(&env));
                let p = eval_pot(&callee.potential, &env).map_err(lang)?;
                Ok(Shape::Debit {
                    rule: "spawn",
                    costs: vec![p],
                    next: Some(Judg {
                        p: cont,
                        ctx,
                        prov: j.prov.clone(),
                        path: point,
                    }),
                })
            }
        }
    }

    /// Least potential that types `j`.
    fn need(&self, j: &Judg) -> Result<u64, TypeError> {
        match self.analyze(j)? {
            Shape::Debit { costs, next, .. } => {
                let rest = match next {
                    Some(n) => self.need(&n)?,
                    None => 0,
                };
                Ok(costs.iter().sum::<u64>() + rest)
            }
            Shape::Credit { arms, .. } => {
                let mut best = 0;
                for (r, arm) in arms {
                    best = best.max(self.need(&arm)?.saturating_sub(r));
                }
                Ok(best)
            }
            Shape::Id => Ok(0),
        }
    }

    fn derive(&self, j: &Judg, terms: Vec<u64>, steps: &mut Vec<Step>) -> Result<(), TypeError> {
        let before: u64 = terms.iter().sum();
        let point = |n: &Judg| n.path.clone();
        match self.analyze(j)? {
            Shape::Debit { rule, costs, next } => {
                let paid: u64 = costs.iter().sum();
                let mut rhs = costs;
                if let Some(n) = &next {
                    rhs.push(self.need(n)?);
                }
                let ineq = Inequality { lhs: terms, rhs };
                let at = next.as_ref().map(point).unwrap_or_else(|| format!("{} > close", j.path));
                if !ineq.holds() {
                    let mut e = self.err(
                        TypeErrorKind::InsufficientPotential,
                        &at,
                        format!("needs {ineq}, which fails"),
                    );
                    e.inequality = Some(ineq);
                    return Err(e);
                }
                let after = before - paid;
                steps.push(Step {
                    point: at,
                    rule,
                    context: show_ctx(&j.ctx),
                    before,
                    after,
                    inequality: Some(ineq),
                });
                if let Some(n) = next {
                    self.derive(&n, vec![after], steps)?;
                }
                Ok(())
            }
            Shape::Credit { rule, arms } => {
                for (r, arm) in arms {
                    let mut t = terms.clone();
                    if r > 0 {
                        t.push(r);
                    }
                    steps.push(Step {
                        point: point(&arm),
                        rule,
                        context: show_ctx(&j.ctx),
                        before,
                        after: before + r,
                        inequality: None,
                    });
                    self.derive(&arm, t, steps)?;
                }
                Ok(())
            }
            Shape::Id => {
                steps.push(Step {
                    point: format!("{} > fwd", j.path).trim_start_matches(" > ").to_string(),
                    rule: "id",
                    context: show_ctx(&j.ctx),
                    before,
                    after: 0,
                    inequality: None,
                });
                Ok(())
            }
        }
    }
}

fn conclusion(ctx: &Ctx, q: u64, who: &str, prov: &(String, SType)) -> String {
    format!("{} ⊢{q} {who} :: ({} : {})", show_ctx(ctx).join(", "), prov.0, prov.1)
}

/// Types a closed process term against a context and provided channel.
#[allow(clippy::too_many_arguments)]
pub fn check_process(
    sig: &Signature,
    metric: Metric,
    who: &str,
    body: &ProcExpr,
    ctx: Ctx,
    provides: (String, SType),
    q: u64,
) -> Result<Derivation, TypeError> {
    let ck = Checker {
        sig,
        metric,
        who: who.to_string(),
    };
    let conclusion = conclusion(&ctx, q, who, &provides);
    let root = Judg {
        p: body,
        ctx,
        prov: provides,
        path: String::new(),
    };
    let mut steps = Vec::new();
    ck.derive(&root, vec![q], &mut steps)?;
    Ok(Derivation { steps, conclusion })
}

/// Least potential with which a closed process term types.
pub fn process_need(
    sig: &Signature,
    metric: Metric,
    who: &str,
    body: &ProcExpr,
    ctx: Ctx,
    provides: (String, SType),
) -> Result<u64, TypeError> {
    let ck = Checker {
        sig,
        metric,
        who: who.to_string(),
    };
    ck.need(&Judg {
        p: body,
        ctx,
        prov: provides,
        path: String::new(),
    })
}

struct Instance {
    who: String,
    metric: Metric,
    q: u64,
    body: ProcExpr,
    ctx: Ctx,
    provides: (String, SType),
}

fn instance(def: &ProcDef, metric: Metric, env: &IndexEnv) -> Result<Instance, TypeError> {
    let values: Vec<u64> = def
        .params
        .iter()
        .map(|x| {
            env.get(x).copied().ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::IndexError,
                    def.name.clone(),
                    format!("no value for index `{x}`"),
                )
            })
        })
        .collect::<Result<_, _>>()?;
    let who = if values.is_empty() {
        def.name.clone()
    } else {
        format!(
            "{}[{}]",
            def.name,
            values.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
        )
    };
    let env = proc_env(def, &values).map_err(|e| TypeError::lang(&who, e))?;
    let q = eval_pot(&def.potential, &env).map_err(|e| TypeError::lang(&who, e))?;
    let ctx = def.uses.iter().map(|(x, t)| (x.clone(), t.subst(&env))).collect();
    Ok(Instance {
        metric: metric.for_mode(def.cost_mode),
        q,
        body: def.body.subst_indices(&env),
        ctx,
        provides: (def.provides.0.clone(), def.provides.1.subst(&env)),
        who,
    })
}

/// Checks `def` at the indices in `env` against its declared potential.
/// The metric is replaced by the zero metric for cost-free definitions.
pub fn check_def(sig: &Signature, def: &ProcDef, metric: Metric, env: &IndexEnv) -> Result<Derivation, TypeError> {
    let i = instance(def, metric, env)?;
    check_process(sig, i.metric, &i.who, &i.body, i.ctx, i.provides, i.q)
}

/// Least declared potential with which `name` checks at `env`.
pub fn min_potential(sig: &Signature, name: &str, env: &IndexEnv, metric: Metric) -> Result<u64, TypeError> {
    let def = sig.proc_def(name).map_err(|e| TypeError::lang(name, e))?;
    let i = instance(def, metric, env)?;
    process_need(sig, i.metric, &i.who, &i.body, i.ctx, i.provides)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEntry {
    pub def: String,
    pub indices: Vec<u64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_inequality: Option<Inequality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<TypeError>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn first_failure(&self) -> Option<&ReportEntry> {
        self.failures().next()
    }

    pub fn passed(&self) -> usize {
        self.entries.len() - self.failures().count()
    }
}

fn unresolved_types(sig: &Signature, t: &SType) -> Vec<String> {
    let mut out = Vec::new();
    t.visit_tvars(&mut |name, _| {
        if !sig.type_defs.contains_key(name) && !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
    });
    out
}

fn fail(def: &str, indices: Vec<u64>, e: TypeError) -> ReportEntry {
    ReportEntry {
        def: def.to_string(),
        indices,
        status: Status::Fail,
        failed_inequality: e.inequality.clone(),
        error: Some(e),
    }
}

/// Index vectors with components in `0..=max` (odometer order).
fn index_grid(arity: usize, max: u64) -> impl Iterator<Item = Vec<u64>> {
    let mut cur = Some(vec![0u64; arity]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut k = arity;
        loop {
            if k == 0 {
                cur = None;
                break;
            }
            k -= 1;
            if next[k] < max {
                next[k] += 1;
                cur = Some(next);
                break;
            }
            next[k] = 0;
        }
        Some(out)
    })
}

/// Runs [`check_def`] for every definition at every in-domain index vector
/// with components up to `sample_max`. Type references are resolved first.
pub fn check_signature(sig: &Signature, metric: Metric, sample_max: u64) -> Report {
    let mut report = Report::default();
    for def in sig.type_defs.values() {
        for name in unresolved_types(sig, &def.body) {
            report.entries.push(fail(
                &def.name,
                vec![],
                TypeError::new(TypeErrorKind::UnknownType, def.name.clone(), format!("unknown type `{name}`")),
            ));
        }
    }
    for def in sig.proc_defs.values() {
        let mut missing = Vec::new();
        for (_, t) in def.uses.iter().chain(std::iter::once(&def.provides)) {
            missing.extend(unresolved_types(sig, t));
        }
        if let Some(name) = missing.first() {
            report.entries.push(fail(
                &def.name,
                vec![],
                TypeError::new(TypeErrorKind::UnknownType, def.name.clone(), format!("unknown type `{name}`")),
            ));
            continue;
        }
        for indices in index_grid(def.params.len(), sample_max) {
            let env: IndexEnv = def.params.iter().cloned().zip(indices.iter().copied()).collect();
            match crate::lang::check_domain(&def.domain, &env) {
                Ok(Some(_)) => continue,
                Ok(None) => {}
                Err(e) => {
                    report.entries.push(fail(&def.name, indices, TypeError::lang(&def.name, e)));
                    continue;
                }
            }
            match check_def(sig, def, metric, &env) {
                Ok(_) => report.entries.push(ReportEntry {
                    def: def.name.clone(),
                    indices,
                    status: Status::Pass,
                    failed_inequality: None,
                    error: None,
                }),
                Err(e) => report.entries.push(fail(&def.name, indices, e)),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const COUNTER: &str = "
type bits = +{ zero^0 : bits, one^0 : bits, dollar^0 : 1^0 }
type ctr[n] = &{ inc^1 : ctr[n+1], val^(2*clog(n)+2) : bits }
proc e [] |0| () -> (s : ctr[0]) =
  case s {
    inc => t <- spawn e[](); b1[0](t) providing s
  | val => s.dollar; close s
  }
proc b0 [n | n >= 1] |0| (t : ctr[n]) -> (s : ctr[2*n]) =
  case s {
    inc => b1[n](t) providing s
  | val => s.zero; t.val; fwd s t
  }
proc b1 [n] |P| (t : ctr[n]) -> (s : ctr[2*n+1]) =
  case s {
    inc => t.inc; b0[n+1](t) providing s
  | val => s.one; t.val; fwd s t
  }
";

    fn counter(p: u64) -> Signature {
        parse_program(&COUNTER.replace("|P|", &format!("|{p}|"))).unwrap()
    }

    fn at(n: u64) -> IndexEnv {
        IndexEnv::from([("n".to_string(), n)])
    }

    #[test]
    fn b1_checks_with_one_unit() {
        let sig = counter(1);
        let d = check_def(&sig, &sig.proc_defs["b1"], Metric::MESSAGES, &at(0)).unwrap();
        let send = d.steps.iter().find(|s| s.rule == "withL").unwrap();
        assert_eq!(send.before, 2);
        assert_eq!(send.after, 0);
    }

    #[test]
    fn b1_without_potential_reports_the_inequality() {
        let sig = counter(0);
        let err = check_def(&sig, &sig.proc_defs["b1"], Metric::MESSAGES, &at(0)).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::InsufficientPotential);
        let ineq = err.inequality.unwrap();
        assert_eq!(ineq.to_string(), "0+1 ≥ 1+1+0");
        assert_eq!(ineq.summary(), "1 ≥ 2");
    }

    #[test]
    fn b0_fails_at_zero_and_checks_above() {
        let sig = counter(1);
        let b0 = &sig.proc_defs["b0"];
        let err = check_def(&sig, b0, Metric::MESSAGES, &at(0)).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::DomainViolation);
        for n in 1..=64 {
            check_def(&sig, b0, Metric::MESSAGES, &at(n)).unwrap();
        }
    }

    #[test]
    fn b0_val_branch_is_short_at_zero_without_domain() {
        let sig = parse_program(&COUNTER.replace("|P|", "|1|").replace("[n | n >= 1]", "[n]")).unwrap();
        let err = check_def(&sig, &sig.proc_defs["b0"], Metric::MESSAGES, &at(0)).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::InsufficientPotential);
        assert!(err.location.contains("case s/val"), "{}", err.location);
    }

    #[test]
    fn min_potentials_of_counter_cells() {
        let sig = counter(1);
        let m = Metric::MESSAGES;
        assert_eq!(min_potential(&sig, "e", &IndexEnv::new(), m).unwrap(), 0);
        assert_eq!(min_potential(&sig, "b1", &at(0), m).unwrap(), 1);
        assert_eq!(min_potential(&sig, "b0", &at(3), m).unwrap(), 0);
    }

    #[test]
    fn counter_signature_passes_on_the_grid() {
        let report = check_signature(&counter(1), Metric::MESSAGES, 64);
        assert!(report.ok(), "{:?}", report.first_failure());
        // e once, b0 for 1..=64, b1 for 0..=64
        assert_eq!(report.entries.len(), 1 + 64 + 65);
    }

    #[test]
    fn unknown_type_is_a_failure_entry() {
        let sig = parse_program("type a = +{ x^0 : nowhere }").unwrap();
        let report = check_signature(&sig, Metric::MESSAGES, 4);
        let f = report.first_failure().unwrap();
        assert_eq!(f.error.as_ref().unwrap().kind, TypeErrorKind::UnknownType);
    }

    #[test]
    fn costfree_mode_ignores_message_costs() {
        let sig = parse_program("costfree proc m [] |0| () -> (c : 1^0) = close c").unwrap();
        check_def(&sig, &sig.proc_defs["m"], Metric::MESSAGES, &IndexEnv::new()).unwrap();
        let sig = parse_program("proc m [] |0| () -> (c : 1^0) = close c").unwrap();
        assert!(check_def(&sig, &sig.proc_defs["m"], Metric::MESSAGES, &IndexEnv::new()).is_err());
    }

    #[test]
    fn linearity_and_context_errors() {
        let leak = "proc p [] |0| (x : 1^0) -> (c : 1^0) = close c";
        let sig = parse_program(leak).unwrap();
        let err = check_def(&sig, &sig.proc_defs["p"], Metric::FREE, &IndexEnv::new()).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::LinearityViolation);

        let missing = "proc p [] |0| () -> (c : 1^0) = wait y; close c";
        let sig = parse_program(missing).unwrap();
        let err = check_def(&sig, &sig.proc_defs["p"], Metric::FREE, &IndexEnv::new()).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::ContextMismatch);

        let label = "type t = +{ a^0 : 1^0 }\nproc p [] |0| () -> (c : t) = c.b; close c";
        let sig = parse_program(label).unwrap();
        let err = check_def(&sig, &sig.proc_defs["p"], Metric::FREE, &IndexEnv::new()).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::LabelNotInType);

        let wrong = "type t = +{ a^0 : 1^0 }\nproc p [] |0| (x : 1^0) -> (c : t) = fwd c x";
        let sig = parse_program(wrong).unwrap();
        let err = check_def(&sig, &sig.proc_defs["p"], Metric::FREE, &IndexEnv::new()).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::WrongProvidedType);
    }

    #[test]
    fn forward_discards_residual() {
        let sig = parse_program("proc p [] |5| (x : 1^0) -> (c : 1^0) = fwd c x").unwrap();
        let d = check_def(&sig, &sig.proc_defs["p"], Metric::MESSAGES, &IndexEnv::new()).unwrap();
        let last = d.steps.last().unwrap();
        assert_eq!((last.rule, last.before, last.after), ("id", 5, 0));
    }

    #[test]
    fn index_grid_enumerates_all_vectors() {
        let v: Vec<_> = index_grid(2, 1).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(index_grid(0, 9).count(), 1);
    }
}
