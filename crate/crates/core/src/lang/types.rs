//! Resource-annotated session types, unfolding, and equirecursive equality.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pot::{check_domain, eval_pot, Constraint, IndexEnv, PotExpr};
use super::Signature;
use crate::error::LangError;

/// One labelled alternative of a choice type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub pot: PotExpr,
    pub cont: SType,
}

/// A session type from the provider's point of view.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SType {
    TVar(String, Vec<PotExpr>),
    /// Internal choice: the provider sends a label.
    IChoice(Vec<Branch>),
    /// External choice: the provider receives a label.
    EChoice(Vec<Branch>),
    /// The provider sends a channel of the payload type.
    Tensor(PotExpr, Box<SType>, Box<SType>),
    /// The provider receives a channel of the payload type.
    Lolli(PotExpr, Box<SType>, Box<SType>),
    One(PotExpr),
}

impl SType {
    pub fn branch(branches: &[Branch], label: &str) -> Option<usize> {
        branches.iter().position(|b| b.label == label)
    }

    pub fn subst(&self, env: &IndexEnv) -> SType {
        match self {
            SType::TVar(n, args) => SType::TVar(n.clone(), args.iter().map(|a| a.subst(env)).collect()),
            SType::IChoice(bs) => SType::IChoice(subst_branches(bs, env)),
            SType::EChoice(bs) => SType::EChoice(subst_branches(bs, env)),
            SType::Tensor(p, a, b) => {
                SType::Tensor(p.subst(env), Box::new(a.subst(env)), Box::new(b.subst(env)))
            }
            SType::Lolli(p, a, b) => {
                SType::Lolli(p.subst(env), Box::new(a.subst(env)), Box::new(b.subst(env)))
            }
            SType::One(p) => SType::One(p.subst(env)),
        }
    }

    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            SType::TVar(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            SType::IChoice(bs) | SType::EChoice(bs) => {
                for b in bs {
                    b.pot.free_vars(out);
                    b.cont.free_vars(out);
                }
            }
            SType::Tensor(p, a, b) | SType::Lolli(p, a, b) => {
                p.free_vars(out);
                a.free_vars(out);
                b.free_vars(out);
            }
            SType::One(p) => p.free_vars(out),
        }
    }

    /// Calls `f` on every type-variable reference.
    pub fn visit_tvars(&self, f: &mut dyn FnMut(&str, &[PotExpr])) {
        match self {
            SType::TVar(n, args) => f(n, args),
            SType::IChoice(bs) | SType::EChoice(bs) => bs.iter().for_each(|b| b.cont.visit_tvars(f)),
            SType::Tensor(_, a, b) | SType::Lolli(_, a, b) => {
                a.visit_tvars(f);
                b.visit_tvars(f);
            }
            SType::One(_) => {}
        }
    }
}

fn subst_branches(bs: &[Branch], env: &IndexEnv) -> Vec<Branch> {
    bs.iter()
        .map(|b| Branch {
            label: b.label.clone(),
            pot: b.pot.subst(env),
            cont: b.cont.subst(env),
        })
        .collect()
}

/// `type name[params | domain] = body`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDef {
    pub name: String,
    pub params: Vec<String>,
    pub domain: Vec<Constraint>,
    pub body: SType,
}

/// Instantiates `def` at evaluated indices, checking its domain.
pub fn instantiate(def: &TypeDef, values: &[u64]) -> Result<SType, LangError> {
    if values.len() != def.params.len() {
        return Err(LangError::IndexArity {
            name: def.name.clone(),
            expected: def.params.len(),
            got: values.len(),
        });
    }
    let env: IndexEnv = def.params.iter().cloned().zip(values.iter().copied()).collect();
    if let Some(c) = check_domain(&def.domain, &env)? {
        return Err(LangError::DomainViolation {
            name: def.name.clone(),
            indices: join_values(values),
            constraint: c.to_string(),
        });
    }
    Ok(def.body.subst(&env))
}

pub(crate) fn join_values(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
}

/// Replaces a type variable by its definition, with indices evaluated under
/// `env`. Other types are returned unchanged.
pub fn unfold(t: &SType, sig: &Signature, env: &IndexEnv) -> Result<SType, LangError> {
    match t {
        SType::TVar(name, args) => {
            let def = sig
                .type_defs
                .get(name)
                .ok_or_else(|| LangError::UnknownType(name.clone()))?;
            let values = args
                .iter()
                .map(|a| eval_pot(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            instantiate(def, &values)
        }
        _ => Ok(t.clone()),
    }
}

/// Unfolds a closed type until its head is a structural constructor.
pub fn whnf(t: &SType, sig: &Signature) -> Result<SType, LangError> {
    let env = IndexEnv::new();
    let mut cur = t.clone();
    // Contractive definitions need one step; the bound guards hand-built signatures.
    for _ in 0..64 {
        if !matches!(cur, SType::TVar(..)) {
            return Ok(cur);
        }
        cur = unfold(&cur, sig, &env)?;
    }
    Err(LangError::UnknownType(format!("{t} (non-contractive)")))
}

type Key = (String, Vec<u64>);

const EQUALITY_FUEL: usize = 100_000;

/// Coinductive equality of closed types.
pub fn type_equal(a: &SType, b: &SType, sig: &Signature) -> Result<bool, LangError> {
    let mut eq = Equality {
        sig,
        seen: HashSet::new(),
        fuel: EQUALITY_FUEL,
    };
    eq.equal(a, b)
}

struct Equality<'a> {
    sig: &'a Signature,
    seen: HashSet<(Key, Key)>,
    fuel: usize,
}

impl Equality<'_> {
    fn key(&self, t: &SType) -> Result<Option<Key>, LangError> {
        match t {
            SType::TVar(n, args) => {
                let env = IndexEnv::new();
                let vs = args.iter().map(|a| eval_pot(a, &env)).collect::<Result<_, _>>()?;
                Ok(Some((n.clone(), vs)))
            }
            _ => Ok(None),
        }
    }

    fn pot_eq(&self, p: &PotExpr, q: &PotExpr) -> Result<bool, LangError> {
        let env = IndexEnv::new();
        Ok(eval_pot(p, &env)? == eval_pot(q, &env)?)
    }

    fn equal(&mut self, a: &SType, b: &SType) -> Result<bool, LangError> {
        let (ka, kb) = (self.key(a)?, self.key(b)?);
        if ka.is_some() || kb.is_some() {
            if self.fuel == 0 {
                return Ok(false);
            }
            self.fuel -= 1;
            if let (Some(ka), Some(kb)) = (ka, kb) {
                if ka == kb || !self.seen.insert((ka, kb)) {
                    return Ok(true);
                }
            }
            let env = IndexEnv::new();
            let ua = unfold(a, self.sig, &env)?;
            let ub = unfold(b, self.sig, &env)?;
            return self.equal(&ua, &ub);
        }
        match (a, b) {
            (SType::IChoice(xs), SType::IChoice(ys)) | (SType::EChoice(xs), SType::EChoice(ys)) => {
                if xs.len() != ys.len() {
                    return Ok(false);
                }
                for x in xs {
                    let Some(j) = SType::branch(ys, &x.label) else {
                        return Ok(false);
                    };
                    if !self.pot_eq(&x.pot, &ys[j].pot)? || !self.equal(&x.cont, &ys[j].cont)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (SType::Tensor(p, a1, a2), SType::Tensor(q, b1, b2))
            | (SType::Lolli(p, a1, a2), SType::Lolli(q, b1, b2)) => {
                Ok(self.pot_eq(p, q)? && self.equal(a1, b1)? && self.equal(a2, b2)?)
            }
            (SType::One(p), SType::One(q)) => self.pot_eq(p, q),
            _ => Ok(false),
        }
    }
}

pub(crate) fn fmt_annot(f: &mut fmt::Formatter<'_>, p: &PotExpr) -> fmt::Result {
    match p {
        PotExpr::Const(_) | PotExpr::IVar(_) => write!(f, "^{p}"),
        _ => write!(f, "^({p})"),
    }
}

fn fmt_branches(f: &mut fmt::Formatter<'_>, open: &str, bs: &[Branch]) -> fmt::Result {
    write!(f, "{open}{{ ")?;
    for (i, b) in bs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", b.label)?;
        fmt_annot(f, &b.pot)?;
        write!(f, " : {}", b.cont)?;
    }
    write!(f, " }}")
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::TVar(n, args) => {
                write!(f, "{n}")?;
                if !args.is_empty() {
                    let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                    write!(f, "[{}]", args.join(", "))?;
                }
                Ok(())
            }
            SType::IChoice(bs) => fmt_branches(f, "+", bs),
            SType::EChoice(bs) => fmt_branches(f, "&", bs),
            SType::Tensor(p, a, b) | SType::Lolli(p, a, b) => {
                if matches!(**a, SType::Tensor(..) | SType::Lolli(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {}", if matches!(self, SType::Tensor(..)) { "*" } else { "-o" })?;
                fmt_annot(f, p)?;
                write!(f, " {b}")
            }
            SType::One(p) => {
                write!(f, "1")?;
                fmt_annot(f, p)
            }
        }
    }
}
