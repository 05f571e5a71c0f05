//! Natural-valued index and potential expressions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LangError;

/// Index variable environment.
pub type IndexEnv = BTreeMap<String, u64>;

/// Potential / index arithmetic over the naturals.
///
/// `CLog(e)` is `⌈log₂(e + 1)⌉`, the number of bits needed to write `e`.
/// `Sub` is truncated subtraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PotExpr {
    Const(u64),
    IVar(String),
    Add(Box<PotExpr>, Box<PotExpr>),
    Sub(Box<PotExpr>, Box<PotExpr>),
    Mul(Box<PotExpr>, Box<PotExpr>),
    CLog(Box<PotExpr>),
}

/// `⌈log₂(n + 1)⌉`, computed as the bit length of `n`.
pub fn clog(n: u64) -> u64 {
    u64::from(u64::BITS - n.leading_zeros())
}

impl PotExpr {
    pub fn zero() -> Self {
        PotExpr::Const(0)
    }

    pub fn var(name: &str) -> Self {
        PotExpr::IVar(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: PotExpr, b: PotExpr) -> Self {
        PotExpr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: PotExpr, b: PotExpr) -> Self {
        PotExpr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: PotExpr, b: PotExpr) -> Self {
        PotExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn clog(a: PotExpr) -> Self {
        PotExpr::CLog(Box::new(a))
    }

    pub fn as_const(&self) -> Option<u64> {
        match self {
            PotExpr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Free index variables, in first-occurrence order.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            PotExpr::Const(_) => {}
            PotExpr::IVar(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            PotExpr::Add(a, b) | PotExpr::Sub(a, b) | PotExpr::Mul(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            PotExpr::CLog(a) => a.free_vars(out),
        }
    }

    /// Replaces bound variables by their values; unbound ones are kept.
    /// Subterms that become closed are folded to constants.
    pub fn subst(&self, env: &IndexEnv) -> PotExpr {
        let out = self.subst_raw(env);
        let mut fv = Vec::new();
        out.free_vars(&mut fv);
        match (fv.is_empty(), eval_closed(&out)) {
            (true, Ok(v)) => PotExpr::Const(v),
            _ => out,
        }
    }

    fn subst_raw(&self, env: &IndexEnv) -> PotExpr {
        match self {
            PotExpr::Const(_) => self.clone(),
            PotExpr::IVar(x) => match env.get(x) {
                Some(v) => PotExpr::Const(*v),
                None => self.clone(),
            },
            PotExpr::Add(a, b) => PotExpr::add(a.subst(env), b.subst(env)),
            PotExpr::Sub(a, b) => PotExpr::sub(a.subst(env), b.subst(env)),
            PotExpr::Mul(a, b) => PotExpr::mul(a.subst(env), b.subst(env)),
            PotExpr::CLog(a) => PotExpr::clog(a.subst(env)),
        }
    }
}

/// Evaluates `e` under `env`. Arithmetic saturates at `u64::MAX`.
pub fn eval_pot(e: &PotExpr, env: &IndexEnv) -> Result<u64, LangError> {
    Ok(match e {
        PotExpr::Const(v) => *v,
        PotExpr::IVar(x) => *env
            .get(x)
            .ok_or_else(|| LangError::UnboundIndexVar(x.clone()))?,
        PotExpr::Add(a, b) => eval_pot(a, env)?.saturating_add(eval_pot(b, env)?),
        PotExpr::Sub(a, b) => eval_pot(a, env)?.saturating_sub(eval_pot(b, env)?),
        PotExpr::Mul(a, b) => eval_pot(a, env)?.saturating_mul(eval_pot(b, env)?),
        PotExpr::CLog(a) => clog(eval_pot(a, env)?),
    })
}

/// Evaluates a closed expression.
pub fn eval_closed(e: &PotExpr) -> Result<u64, LangError> {
    eval_pot(e, &IndexEnv::new())
}

// Precedence levels used by the printer: 1 for + and -, 2 for *, 3 for atoms.
fn prec(e: &PotExpr) -> u8 {
    match e {
        PotExpr::Add(..) | PotExpr::Sub(..) => 1,
        PotExpr::Mul(..) => 2,
        _ => 3,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &PotExpr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for PotExpr {
    // Binary operators are left-associative, so a right operand of equal
    // precedence is parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotExpr::Const(v) => write!(f, "{v}"),
            PotExpr::IVar(x) => write!(f, "{x}"),
            PotExpr::Add(a, b) | PotExpr::Sub(a, b) => {
                let op = if matches!(self, PotExpr::Add(..)) { "+" } else { "-" };
                write_operand(f, a, 1)?;
                write!(f, "{op}")?;
                write_operand(f, b, 2)
            }
            PotExpr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            PotExpr::CLog(a) => write!(f, "clog({a})"),
        }
    }
}

/// A linear constraint `lhs >= rhs` (or `lhs <= rhs`, stored flipped).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub lhs: PotExpr,
    pub rhs: PotExpr,
}

impl Constraint {
    pub fn holds(&self, env: &IndexEnv) -> Result<bool, LangError> {
        Ok(eval_pot(&self.lhs, env)? >= eval_pot(&self.rhs, env)?)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} >= {}", self.lhs, self.rhs)
    }
}

/// Checks every constraint; the first violated one is returned.
pub fn check_domain<'a>(
    domain: &'a [Constraint],
    env: &IndexEnv,
) -> Result<Option<&'a Constraint>, LangError> {
    for c in domain {
        if !c.holds(env)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
