use std::time::Instant;

use crate::oracles::{CallCounts, OracleCounters};

/// One row per outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub calls: CallCounts,
    /// Objective at the solver's current output point.
    pub f_value: f64,
    /// `f_value - f*` when a reference optimum is known.
    pub gap: Option<f64>,
    pub wall_ms: f64,
    /// `||x_k - x'_k||` for the Moreau methods, zero otherwise.
    pub coupling: f64,
    pub best_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            records: Vec::new(),
        }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// First record whose gap is at most `eps`.
    pub fn first_reaching(&self, eps: f64) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.gap.is_some_and(|g| g <= eps))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TraceOptions {
    /// Reference optimum used for the gap column.
    pub reference: Option<f64>,
    /// Stop as soon as the recorded gap falls to this level.
    pub stop_gap: Option<f64>,
    /// Record wall-clock milliseconds; zeros otherwise so traces stay reproducible.
    pub wall_clock: bool,
}

pub(crate) struct Recorder<'t> {
    trace: &'t mut RunTrace,
    options: TraceOptions,
    start: Instant,
    best: f64,
}

impl<'t> Recorder<'t> {
    pub(crate) fn new(trace: &'t mut RunTrace, options: TraceOptions) -> Self {
        trace.records.clear();
        Self {
            trace,
            options,
            start: Instant::now(),
            best: f64::INFINITY,
        }
    }

    /// Appends a row and reports whether the early-stop level was reached.
    pub(crate) fn record(
        &mut self,
        k: usize,
        counters: &OracleCounters,
        f_value: f64,
        coupling: f64,
    ) -> bool {
        self.best = self.best.min(f_value);
        self.record_with_best(k, counters, f_value, coupling, self.best)
    }

    pub(crate) fn record_with_best(
        &mut self,
        k: usize,
        counters: &OracleCounters,
        f_value: f64,
        coupling: f64,
        best_value: f64,
    ) -> bool {
        let gap = self.options.reference.map(|r| f_value - r);
        let wall_ms = if self.options.wall_clock {
            self.start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.trace.records.push(TraceRecord {
            k,
            calls: counters.snapshot(),
            f_value,
            gap,
            wall_ms,
            coupling,
            best_value,
        });
        matches!((gap, self.options.stop_gap), (Some(g), Some(s)) if g <= s)
    }
}
