//! Run-time checks of the soundness theorem on traces.
//!
//! Every step must leave the configuration weight (potential plus work)
//! unchanged or smaller, and the potential a closed program starts with must
//! cover all the work it performs. [`deep_check`] goes further and re-types
//! every intermediate configuration.

use serde::Serialize;
use thiserror::Error;

use crate::lang::{Metric, Signature};
use crate::runtime::{Config, Rule, Status, Trace, TraceEvent};
use crate::typechecker::{typecheck_config, ConfigError};

/// Total potential plus total work of a configuration.
pub fn weight(config: &Config) -> u64 {
    config.weight()
}

/// Weights before the first step and after every step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightSeries {
    pub values: Vec<u64>,
}

impl WeightSeries {
    pub fn of(trace: &Trace) -> Self {
        WeightSeries { values: trace.weights() }
    }

    /// First index `k` with `values[k + 1] > values[k]`.
    pub fn first_increase(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] > w[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Error)]
#[error("weight rose from {before} to {after} at step {step}")]
pub struct Violation {
    pub step: usize,
    pub before: u64,
    pub after: u64,
}

/// Scans the weight series and reports the first step that increases it.
pub fn check_monotone(trace: &Trace) -> Result<(), Violation> {
    let series = WeightSeries::of(trace);
    match series.first_increase() {
        None => Ok(()),
        Some(k) => Err(Violation {
            step: k,
            before: series.values[k],
            after: series.values[k + 1],
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundStatus {
    Holds,
    Exceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub initial_potential: u64,
    pub final_work: u64,
    /// `initial_potential - final_work`; negative only when the bound fails.
    pub slack: i64,
    pub status: BoundStatus,
    pub run_status: Status,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.status == BoundStatus::Holds
    }
}

/// Compares the initial weight of a run (all potential, since no work has
/// been done yet) with the work it performed.
pub fn bound_report(trace: &Trace) -> BoundReport {
    let initial_potential = trace.initial_weight;
    let final_work = trace.summary.total_work;
    let slack = initial_potential as i64 - final_work as i64;
    BoundReport {
        initial_potential,
        final_work,
        slack,
        status: if slack >= 0 { BoundStatus::Holds } else { BoundStatus::Exceeded },
        run_status: trace.summary.status,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DeepCheckError {
    #[error("the trace did not retain its configurations")]
    NoConfigs,
    #[error("after step {step}: {source}")]
    PreservationViolation {
        step: usize,
        #[source]
        source: ConfigError,
    },
    #[error("after step {step}: typed weight {typed} but measured {measured}")]
    WeightMismatch { step: usize, typed: u64, measured: u64 },
}

/// Re-types the initial configuration and the configuration after every
/// step. Returns the number of configurations checked.
pub fn deep_check(sig: &Signature, trace: &Trace, metric: Metric) -> Result<usize, DeepCheckError> {
    if trace.configs.len() != trace.events.len() + 1 {
        if trace.events.is_empty() {
            return Ok(0);
        }
        return Err(DeepCheckError::NoConfigs);
    }
    for (k, config) in trace.configs.iter().enumerate() {
        // configs[0] precedes the first step; report it as step 0
        let step = k.saturating_sub(1);
        let typed = typecheck_config(sig, config, metric)
            .map_err(|source| DeepCheckError::PreservationViolation { step, source })?;
        let measured = weight(config);
        if typed != measured {
            return Err(DeepCheckError::WeightMismatch { step, typed, measured });
        }
    }
    Ok(trace.configs.len())
}

/// One segment of a run delimited by the client's label sends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseReport {
    pub name: &'static str,
    /// First event of the phase.
    pub first_step: usize,
    /// One past the last event.
    pub end_step: usize,
    /// Work done during the phase.
    pub work: u64,
    /// Annotation potential carried by labels and channels the client sent.
    pub injected: u64,
    /// `injected - work`.
    pub slack: i64,
}

fn is_client_label(e: &TraceEvent) -> bool {
    e.client && e.rule.is_label_send()
}

fn phase(name: &'static str, events: &[TraceEvent], first: usize, end: usize) -> PhaseReport {
    let work_at = |k: usize| if k == 0 { 0 } else { events[k - 1].total_work };
    let work = work_at(end) - work_at(first);
    let injected = events[first..end]
        .iter()
        .filter(|e| e.client && e.rule.is_send() && e.rule != Rule::OneCS)
        .map(|e| e.carried)
        .sum::<u64>();
    PhaseReport {
        name,
        first_step: first,
        end_step: end,
        work,
        injected,
        slack: injected as i64 - work as i64,
    }
}

/// Splits a run into `setup` (before the client's first label send),
/// `script` (from there up to its `ops + 1`-th label send) and `rest`.
///
/// Under a client-last scheduler the store has finished reacting to the
/// script when the next client label goes out, so the script phase measures
/// exactly the store work caused by the first `ops` operations.
pub fn split_phases(trace: &Trace, ops: usize) -> [PhaseReport; 3] {
    let events = &trace.events;
    let sends: Vec<usize> = events
        .iter()
        .enumerate()
        .filter(|(_, e)| is_client_label(e))
        .map(|(k, _)| k)
        .collect();
    let n = events.len();
    let start = sends.first().copied().unwrap_or(n);
    let end = sends.get(ops).copied().unwrap_or(n).max(start);
    [
        phase("setup", events, 0, start),
        phase("script", events, start, end),
        phase("rest", events, end, n),
    ]
}
