use thiserror::Error;

use super::{check_process, Ctx};
use crate::lang::{Metric, SType, Signature};
use crate::runtime::{Config, Pred};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("predicate {pred} does not type: {detail}")]
    PreservationViolation { pred: String, detail: String },
    #[error("channel {channel} breaks the forest shape: {detail}")]
    NotAForest { channel: String, detail: String },
}

fn view(config: &Config, c: &str, who: &str) -> Result<SType, ConfigError> {
    config
        .view(c)
        .cloned()
        .ok_or_else(|| ConfigError::PreservationViolation {
            pred: who.to_string(),
            detail: format!("channel {c} has no protocol state"),
        })
}

/// Types every predicate against the channel states and returns the total
/// weight. Processes are checked at their ledger potential under their own
/// metric; messages are checked at their carried potential with all costs 0.
pub fn typecheck_config(sig: &Signature, config: &Config, metric: Metric) -> Result<u64, ConfigError> {
    for (c, ends) in config.ends() {
        let detail = match (ends.providers.len(), ends.clients.len()) {
            (1, 0 | 1) => continue,
            (0, _) => "no provider".to_string(),
            (p, 0 | 1) => format!("{p} providers"),
            (_, k) => format!("{k} clients"),
        };
        return Err(ConfigError::NotAForest { channel: c, detail });
    }
    for (id, pred) in &config.preds {
        let (who, body, m) = match pred {
            Pred::Proc(p) => (
                format!("#{id} proc {} providing {}", p.def, p.provides),
                p.expr.clone(),
                metric.for_mode(p.cost_mode),
            ),
            Pred::Msg(m) => (
                format!("#{id} msg on {}", m.carrier),
                m.as_process(),
                Metric::FREE,
            ),
        };
        let mut ctx = Ctx::new();
        for c in pred.uses() {
            let t = view(config, &c, &who)?;
            ctx.insert(c, t);
        }
        let prov = pred.provides().to_string();
        let t = view(config, &prov, &who)?;
        check_process(sig, m, &who, &body, ctx, (prov, t), pred.potential()).map_err(|e| {
            ConfigError::PreservationViolation {
                pred: who.clone(),
                detail: e.to_string(),
            }
        })?;
    }
    Ok(config.weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::runtime::{enabled, init_config, step, Config, MsgPred, Payload};

    const SRC: &str = "
type bits = +{ zero^0 : bits, one^1 : bits, dollar^0 : 1^0 }
proc src [] |5| () -> (b : bits) = b.one; b.zero; b.dollar; close b
costfree proc eat [] |0| (b : bits) -> (c : 1^0) =
  case b { zero => eat[](b) providing c | one => eat[](b) providing c | dollar => wait b; close c }
costfree proc main [] |5| () -> (c : 1^0) = b <- spawn src[](); eat[](b) providing c
";

    #[test]
    fn empty_configuration_weighs_nothing() {
        let sig = Signature::default();
        let mut c = Config::new(SType::One(crate::PotExpr::zero()));
        c.channels.clear();
        c.external.closed = true;
        assert_eq!(typecheck_config(&sig, &c, Metric::MESSAGES).unwrap(), 0);
    }

    #[test]
    fn initial_configuration_weighs_declared_potential() {
        let sig = parse_program(SRC).unwrap();
        let c = init_config(&sig, "main").unwrap();
        assert_eq!(typecheck_config(&sig, &c, Metric::MESSAGES).unwrap(), 5);
    }

    #[test]
    fn every_step_retypes_with_the_same_weight() {
        let sig = parse_program(SRC).unwrap();
        let mut c = init_config(&sig, "main").unwrap();
        let mut last = c.weight();
        loop {
            let insts = enabled(&c);
            let Some(inst) = insts.first() else { break };
            step(&sig, &mut c, inst, Metric::MESSAGES).unwrap();
            let w = typecheck_config(&sig, &c, Metric::MESSAGES).unwrap();
            assert_eq!(w, c.weight());
            assert!(w <= last);
            last = w;
        }
        assert!(c.is_final());
    }

    #[test]
    fn corrupted_message_is_a_preservation_violation() {
        let sig = parse_program(SRC).unwrap();
        let mut c = init_config(&sig, "main").unwrap();
        let is_label = |p: &Pred| matches!(p, Pred::Msg(MsgPred { payload: Payload::Label { .. }, .. }));
        while !c.preds.values().any(is_label) {
            let inst = enabled(&c).remove(0);
            step(&sig, &mut c, &inst, Metric::MESSAGES).unwrap();
        }
        let (id, _) = c.preds.iter().find(|(_, p)| is_label(p)).unwrap();
        let id = *id;
        typecheck_config(&sig, &c, Metric::MESSAGES).unwrap();
        if let Some(Pred::Msg(m)) = c.preds.get_mut(&id) {
            m.potential = 0;
        }
        let err = typecheck_config(&sig, &c, Metric::MESSAGES).unwrap_err();
        assert!(matches!(err, ConfigError::PreservationViolation { .. }), "{err}");
    }
}
