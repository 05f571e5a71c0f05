use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{enabled, init_config, step, Config, Pred, PredRef, RuleInstance, RuntimeError, Status, Summary, Trace, TraceEvent};
use crate::lang::{CostMode, Metric, Signature};

/// Policy for choosing among enabled rule instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduler {
    /// Cycles through processes in insertion order.
    RoundRobin,
    /// Uniform choice from a `ChaCha8Rng` seeded with the value.
    Random(u64),
    /// Round robin that only runs cost-free processes when nothing else can move.
    ClientLast,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scheduler: Scheduler,
    pub metric: Metric,
    pub max_steps: usize,
    /// Retain every intermediate configuration in the trace.
    pub keep_configs: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            scheduler: Scheduler::RoundRobin,
            metric: Metric::MESSAGES,
            max_steps: 1_000_000,
            keep_configs: false,
        }
    }
}

enum Picker {
    Cursor(Option<PredRef>),
    Random(Box<ChaCha8Rng>),
}

fn after_cursor(cands: &[&RuleInstance], cursor: Option<PredRef>) -> usize {
    cursor
        .and_then(|c| cands.iter().position(|i| i.key > c))
        .unwrap_or(0)
}

impl Picker {
    fn new(s: Scheduler) -> Self {
        match s {
            Scheduler::Random(seed) => Picker::Random(Box::new(ChaCha8Rng::seed_from_u64(seed))),
            _ => Picker::Cursor(None),
        }
    }

    fn pick(&mut self, scheduler: Scheduler, config: &Config, insts: &[RuleInstance]) -> usize {
        match self {
            Picker::Random(rng) => rng.random_range(0..insts.len()),
            Picker::Cursor(cursor) => {
                let mut order: Vec<usize> = (0..insts.len()).collect();
                order.sort_by_key(|&i| insts[i].key);
                if scheduler == Scheduler::ClientLast {
                    let store: Vec<usize> = order
                        .iter()
                        .copied()
                        .filter(|&i| !is_client(config, insts[i].key))
                        .collect();
                    if !store.is_empty() {
                        order = store;
                    }
                }
                let cands: Vec<&RuleInstance> = order.iter().map(|&i| &insts[i]).collect();
                let k = after_cursor(&cands, *cursor);
                *cursor = Some(cands[k].key);
                order[k]
            }
        }
    }
}

fn is_client(config: &Config, key: PredRef) -> bool {
    match key {
        PredRef::Pred(id) => matches!(
            config.preds.get(&id),
            Some(Pred::Proc(p)) if p.cost_mode == CostMode::Costfree
        ),
        PredRef::External => false,
    }
}

/// Step-by-step driver; [`run`] loops it to completion.
pub struct Runner<'a> {
    sig: &'a Signature,
    opts: RunOptions,
    config: Config,
    picker: Picker,
    initial_weight: u64,
    events: Vec<TraceEvent>,
    configs: Vec<Config>,
}

impl<'a> Runner<'a> {
    pub fn new(sig: &'a Signature, main: &str, opts: RunOptions) -> Result<Self, RuntimeError> {
        let config = init_config(sig, main)?;
        Ok(Self::from_config(sig, config, opts))
    }

    pub fn from_config(sig: &'a Signature, config: Config, opts: RunOptions) -> Self {
        let configs = if opts.keep_configs { vec![config.clone()] } else { Vec::new() };
        Runner {
            sig,
            picker: Picker::new(opts.scheduler),
            initial_weight: config.weight(),
            opts,
            config,
            events: Vec::new(),
            configs,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Direct access for tests that perturb a run.
    pub fn config_mut(&mut self) -> &mut Config {
        &mut self.config
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Applies one scheduled instance; `None` when nothing is enabled.
    pub fn step_once(&mut self) -> Result<Option<&TraceEvent>, RuntimeError> {
        let insts = enabled(&self.config);
        if insts.is_empty() {
            return Ok(None);
        }
        let k = self.picker.pick(self.opts.scheduler, &self.config, &insts);
        let (w0, p0) = self.config.totals();
        let info = step(self.sig, &mut self.config, &insts[k], self.opts.metric)?;
        let (w1, p1) = self.config.totals();
        self.events.push(TraceEvent {
            step: self.events.len(),
            rule: insts[k].rule,
            channels: info.channels,
            work_delta: w1.saturating_sub(w0),
            pot_delta: p1 as i64 - p0 as i64,
            weight: w1 + p1,
            actor: info.actor,
            client: info.client,
            label: info.label,
            carried: info.carried,
            total_work: w1,
        });
        if self.opts.keep_configs {
            self.configs.push(self.config.clone());
        }
        Ok(self.events.last())
    }

    /// Runs until the program finishes, blocks, or exhausts the step budget.
    pub fn run_to_end(&mut self) -> Result<Status, RuntimeError> {
        while self.events.len() < self.opts.max_steps {
            if self.step_once()?.is_none() {
                return Ok(if self.config.is_final() { Status::Done } else { Status::Stuck });
            }
        }
        Ok(if enabled(&self.config).is_empty() && self.config.is_final() {
            Status::Done
        } else {
            Status::Budget
        })
    }

    pub fn finish(self, status: Status) -> Trace {
        let (total_work, total_potential) = self.config.totals();
        Trace {
            initial_weight: self.initial_weight,
            summary: Summary {
                status,
                total_work,
                total_potential,
                steps: self.events.len(),
            },
            events: self.events,
            final_config: self.config,
            configs: self.configs,
        }
    }
}

/// Runs `main` from its initial configuration.
pub fn run(sig: &Signature, main: &str, opts: &RunOptions) -> Result<Trace, RuntimeError> {
    let mut runner = Runner::new(sig, main, opts.clone())?;
    let status = runner.run_to_end()?;
    Ok(runner.finish(status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const PIPE: &str = "
type bits = +{ zero^0 : bits, one^0 : bits, dollar^0 : 1^0 }
proc src [] |4| () -> (b : bits) = b.one; b.zero; b.dollar; close b
costfree proc eat [] |0| (b : bits) -> (c : 1^0) =
  case b { zero => eat[](b) providing c | one => eat[](b) providing c | dollar => wait b; close c }
costfree proc main [] |4| () -> (c : 1^0) = b <- spawn src[](); eat[](b) providing c
";

    #[test]
    fn closed_pipeline_finishes() {
        let sig = parse_program(PIPE).unwrap();
        let t = run(&sig, "main", &RunOptions::default()).unwrap();
        assert_eq!(t.summary.status, Status::Done);
        // three labels and one close, all sent by `src`
        assert_eq!(t.summary.total_work, 3 + 1);
        assert_eq!(t.summary.total_potential, 0);
    }

    #[test]
    fn trivial_close_is_one_step_plus_root_consumption() {
        let sig = parse_program("proc m [] |1| () -> (c : 1^0) = close c").unwrap();
        let t = run(&sig, "m", &RunOptions::default()).unwrap();
        assert_eq!(t.summary.total_work, 1);
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.events[1].actor, "external");
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let sig = parse_program(PIPE).unwrap();
        let opts = RunOptions {
            scheduler: Scheduler::Random(7),
            ..RunOptions::default()
        };
        let a = run(&sig, "main", &opts).unwrap();
        let b = run(&sig, "main", &opts).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn budget_stops_the_run() {
        let sig = parse_program(PIPE).unwrap();
        let opts = RunOptions {
            max_steps: 3,
            ..RunOptions::default()
        };
        let t = run(&sig, "main", &opts).unwrap();
        assert_eq!(t.summary.status, Status::Budget);
        assert_eq!(t.summary.steps, 3);
    }

    #[test]
    fn jsonl_has_one_line_per_event_and_a_summary() {
        let sig = parse_program(PIPE).unwrap();
        let t = run(&sig, "main", &RunOptions::default()).unwrap();
        let text = t.to_jsonl();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), t.events.len() + 1);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        for k in ["step", "rule", "channels", "workDelta", "potDelta", "weight"] {
            assert!(first.get(k).is_some(), "missing {k}");
        }
        let last: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
        assert_eq!(last["status"], "Done");
        assert_eq!(last["totalWork"], 4);
    }
}
