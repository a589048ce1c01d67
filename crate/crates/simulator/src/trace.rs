use std::io::{BufRead, Write};

use propdyn_graph::{Color, Graph, ProcessKind, ProcessState, SwitchRule};
use serde::{Deserialize, Serialize};

use crate::SimError;

/// One switch. Edge pairs are `(switched node, neighbor)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub step: u64,
    pub node: usize,
    pub created: Vec<(usize, usize)>,
    pub removed: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub kind: ProcessKind,
    pub events: Vec<Event>,
    pub initial_coloring: Vec<Color>,
    pub final_coloring: Vec<Color>,
    pub total_steps: u64,
    pub stabilized: bool,
}

/// First line of a JSONL trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub record: String,
    pub n: usize,
    pub kind: ProcessKind,
    pub total_steps: u64,
    pub stabilized: bool,
    pub initial: String,
    #[serde(rename = "final")]
    pub final_coloring: String,
}

fn bits(colors: &[Color]) -> String {
    colors.iter().map(|&c| if c { '1' } else { '0' }).collect()
}

fn unbits(s: &str) -> Result<Vec<Color>, SimError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(SimError::Trace(format!("bad coloring character {c:?}"))),
        })
        .collect()
}

impl Trace {
    /// Node sequence of the trace, usable as a scripted schedule.
    pub fn schedule(&self) -> Vec<usize> {
        self.events.iter().map(|e| e.node).collect()
    }

    /// Replays the events from the initial coloring, checking switchability
    /// and the recorded edge effects, and returns the resulting coloring.
    pub fn replay(&self, g: &Graph, rule: &SwitchRule) -> Result<Vec<Color>, SimError> {
        let mut state = ProcessState::new(g, self.kind, self.initial_coloring.clone())?;
        for ev in &self.events {
            let eff = propdyn_graph::switch(g, &mut state, rule, ev.node)
                .map_err(|_| SimError::NotSwitchable { step: ev.step, node: ev.node })?;
            if eff.created != ev.created || eff.removed != ev.removed {
                return Err(SimError::Trace(format!("edge effects differ at step {}", ev.step)));
            }
        }
        Ok(state.colors().to_vec())
    }

    pub fn header(&self) -> TraceHeader {
        TraceHeader {
            record: "header".into(),
            n: self.initial_coloring.len(),
            kind: self.kind,
            total_steps: self.total_steps,
            stabilized: self.stabilized,
            initial: bits(&self.initial_coloring),
            final_coloring: bits(&self.final_coloring),
        }
    }

    /// Header line followed by one event per line.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<(), SimError> {
        serde_json::to_writer(&mut w, &self.header())?;
        writeln!(w)?;
        for ev in &self.events {
            serde_json::to_writer(&mut w, ev)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Trace, SimError> {
        let mut lines = r.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
        let first = lines.next().ok_or_else(|| SimError::Trace("empty trace".into()))??;
        let h: TraceHeader = serde_json::from_str(&first)?;
        if h.record != "header" {
            return Err(SimError::Trace(format!("expected header record, got {:?}", h.record)));
        }
        let events = lines
            .map(|l| Ok(serde_json::from_str::<Event>(&l?)?))
            .collect::<Result<Vec<_>, SimError>>()?;
        if events.len() as u64 != h.total_steps {
            return Err(SimError::Trace(format!(
                "header says {} steps, found {}",
                h.total_steps,
                events.len()
            )));
        }
        let initial_coloring = unbits(&h.initial)?;
        if initial_coloring.len() != h.n {
            return Err(SimError::Trace("initial coloring length differs from n".into()));
        }
        Ok(Trace {
            kind: h.kind,
            events,
            initial_coloring,
            final_coloring: unbits(&h.final_coloring)?,
            total_steps: h.total_steps,
            stabilized: h.stabilized,
        })
    }
}
