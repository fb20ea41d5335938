//! JSONL run logs.
//!
//! A log starts with a `header` line, followed per tick by one `tick` line, one
//! `report` line per novelty report and, when the robot acted, one `decision`
//! line. World events appear as `event` lines just before the tick they were
//! applied on. The log ends with one `verdict` line per expectation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::sim::TickRecord;
use crate::arena::{WorldEvent, NUM_SENSORS};
use crate::error::Result;

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl RunHeader {
    pub fn new(scenario: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: LOG_SCHEMA_VERSION,
            scenario: scenario.to_string(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub index: usize,
    pub expectation: String,
    pub pass: bool,
}

/// One line of the JSONL log.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogLine<'a> {
    Header(&'a RunHeader),
    Event {
        tick: u64,
        #[serde(flatten)]
        event: &'a WorldEvent,
    },
    Tick {
        tick: u64,
        heading: f64,
        readings: [f64; NUM_SENSORS],
        scanning: bool,
    },
    Report {
        tick: u64,
        sensor_id: usize,
        winner: usize,
        novelty: f64,
        is_new: bool,
        raw_strength: f64,
    },
    Decision {
        tick: u64,
        action: &'static str,
        sensor_id: Option<usize>,
        heading_after: f64,
    },
    Verdict(&'a Verdict),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub events: Vec<(u64, WorldEvent)>,
    pub records: Vec<TickRecord>,
    pub verdicts: Vec<Verdict>,
}

impl RunLog {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.pass).collect()
    }

    /// Number of ticks on which the robot changed heading.
    pub fn rotations(&self) -> usize {
        self.records.iter().filter(|r| r.heading_after != r.heading).count()
    }

    pub fn lines(&self) -> impl Iterator<Item = LogLine<'_>> {
        let header = std::iter::once(LogLine::Header(&self.header));
        let mut events = self.events.iter().peekable();
        let body = self.records.iter().flat_map(move |r| {
            let mut lines = Vec::new();
            while let Some((tick, event)) = events.next_if(|(t, _)| *t == r.tick) {
                lines.push(LogLine::Event { tick: *tick, event });
            }
            lines.push(LogLine::Tick {
                tick: r.tick,
                heading: r.heading,
                readings: r.readings,
                scanning: r.scanning,
            });
            lines.extend(r.reports.iter().map(|p| LogLine::Report {
                tick: r.tick,
                sensor_id: p.sensor_id,
                winner: p.winner,
                novelty: p.novelty,
                is_new: p.is_new,
                raw_strength: p.raw_strength,
            }));
            if r.action.sensor().is_some() {
                lines.push(LogLine::Decision {
                    tick: r.tick,
                    action: r.action.name(),
                    sensor_id: r.action.sensor(),
                    heading_after: r.heading_after,
                });
            }
            lines
        });
        let verdicts = self.verdicts.iter().map(LogLine::Verdict);
        header.chain(body).chain(verdicts)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for line in self.lines() {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}
