use serde::Serialize;

use super::{Config, Rule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEvent {
    pub step: usize,
    pub rule: Rule,
    pub channels: Vec<String>,
    /// Change of total work.
    pub work_delta: u64,
    /// Change of total potential.
    pub pot_delta: i64,
    /// Weight after the step.
    pub weight: u64,
    /// Definition of the acting process.
    pub actor: String,
    /// Whether the actor runs under the cost-free metric.
    pub client: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Potential moved by the step's message (or given to a spawned child).
    pub carried: u64,
    /// Total work after the step.
    pub total_work: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Done,
    Stuck,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub status: Status,
    pub total_work: u64,
    pub total_potential: u64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial_weight: u64,
    pub events: Vec<TraceEvent>,
    pub summary: Summary,
    pub final_config: Config,
    /// Configuration before the first step and after every step, when retained.
    pub configs: Vec<Config>,
}

impl Trace {
    /// Weight before the first step followed by the weight after each step.
    pub fn weights(&self) -> Vec<u64> {
        std::iter::once(self.initial_weight)
            .chain(self.events.iter().map(|e| e.weight))
            .collect()
    }

    /// One JSON object per event, then the summary object.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}
