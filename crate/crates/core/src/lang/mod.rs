//! Abstract syntax shared by every other module.

pub mod pot;
pub mod proc;
pub mod types;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use pot::{check_domain, clog, eval_closed, eval_pot, Constraint, IndexEnv, PotExpr};
pub use proc::{Arm, CostMode, Metric, ProcDef, ProcExpr};
pub use types::{instantiate, type_equal, unfold, whnf, Branch, SType, TypeDef};

use crate::error::LangError;

/// Type and process definitions of a program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub type_defs: BTreeMap<String, TypeDef>,
    pub proc_defs: BTreeMap<String, ProcDef>,
}

impl Signature {
    pub fn proc_def(&self, name: &str) -> Result<&ProcDef, LangError> {
        self.proc_defs
            .get(name)
            .ok_or_else(|| LangError::UnknownProc(name.to_string()))
    }

    /// Evaluates the declared potential of `name` at concrete indices,
    /// checking arity and domain.
    pub fn proc_potential(&self, name: &str, indices: &[u64]) -> Result<u64, LangError> {
        let def = self.proc_def(name)?;
        let env = proc_env(def, indices)?;
        eval_pot(&def.potential, &env)
    }
}

/// Binds a definition's index parameters, checking arity and domain.
pub fn proc_env(def: &ProcDef, indices: &[u64]) -> Result<IndexEnv, LangError> {
    if indices.len() != def.params.len() {
        return Err(LangError::IndexArity {
            name: def.name.clone(),
            expected: def.params.len(),
            got: indices.len(),
        });
    }
    let env: IndexEnv = def.params.iter().cloned().zip(indices.iter().copied()).collect();
    if let Some(c) = check_domain(&def.domain, &env)? {
        return Err(LangError::DomainViolation {
            name: def.name.clone(),
            indices: types::join_values(indices),
            constraint: c.to_string(),
        });
    }
    Ok(env)
}
