//! Scripted experiments: a timeline of world events plus windows in which a
//! particular reaction of the robot is expected.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! name = "example"
//! ticks = 400
//!
//! [config]            # optional RunConfig overrides
//! forgetting = false
//!
//! [[timeline]]
//! tick = 50
//! event = "add_light"
//! id = "lamp"
//! sensor = 1          # place in sensor 1's field (or give an absolute `bearing`)
//! pattern = "slow"    # preset name, or an inline table such as { kind = "periodic", period = 8, duty = 0.5 }
//!
//! [[expect]]
//! from = 50
//! to = 150
//! action = "turns_toward"
//! light = "lamp"
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::config::{merge_tables, RunConfig};
use super::runlog::{RunHeader, RunLog, Verdict};
use super::sim::{Simulation, TickRecord};
use crate::arena::{FlashPattern, LightSource, World, WorldEvent, SENSOR_SPACING_DEG};
use crate::clustering::ClustererKind;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternSpec {
    Preset(String),
    Explicit(FlashPattern),
}

impl PatternSpec {
    pub fn resolve(&self) -> Result<FlashPattern> {
        let pattern = match self {
            Self::Preset(name) => FlashPattern::preset(name)
                .ok_or_else(|| Error::InvalidPattern(format!("unknown preset `{name}`")))?,
            Self::Explicit(p) => p.clone(),
        };
        pattern.validate()?;
        Ok(pattern)
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ScenarioEvent {
    AddLight {
        id: String,
        #[serde(default)]
        bearing: Option<f64>,
        /// Place the light dead centre in this sensor's field at the time of the event.
        #[serde(default)]
        sensor: Option<usize>,
        #[serde(default = "one")]
        intensity: f64,
        pattern: PatternSpec,
    },
    RemoveLight {
        id: String,
    },
    SetActive {
        id: String,
        active: bool,
    },
    SetPattern {
        id: String,
        pattern: PatternSpec,
    },
}

impl ScenarioEvent {
    pub fn light_id(&self) -> &str {
        match self {
            Self::AddLight { id, .. }
            | Self::RemoveLight { id }
            | Self::SetActive { id, .. }
            | Self::SetPattern { id, .. } => id,
        }
    }

    /// Turns the scripted event into a concrete world event, resolving
    /// sensor-relative placement against the current heading.
    pub fn to_world_event(&self, world: &World) -> Result<WorldEvent> {
        Ok(match self {
            Self::AddLight { id, bearing, sensor, intensity, pattern } => {
                let bearing = match (bearing, sensor) {
                    (Some(b), None) => *b,
                    (None, Some(s)) => world.heading + SENSOR_SPACING_DEG * *s as f64,
                    _ => {
                        return Err(Error::InvalidScenario(format!(
                            "light `{id}` needs exactly one of `bearing` or `sensor`"
                        )))
                    }
                };
                let mut light = LightSource::new(id.clone(), bearing, pattern.resolve()?);
                light.intensity = *intensity;
                WorldEvent::AddLight { light }
            }
            Self::RemoveLight { id } => WorldEvent::RemoveLight { id: id.clone() },
            Self::SetActive { id, active } => WorldEvent::SetActive { id: id.clone(), active: *active },
            Self::SetPattern { id, pattern } => WorldEvent::SetPattern { id: id.clone(), pattern: pattern.resolve()? },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub event: ScenarioEvent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ExpectedAction {
    TurnsToward { light: String },
    NoResponse,
}

/// Expected behaviour over the inclusive tick window `from..=to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub from: u64,
    pub to: u64,
    #[serde(flatten)]
    pub action: ExpectedAction,
    #[serde(default)]
    pub label: Option<String>,
}

impl Expectation {
    pub fn describe(&self) -> String {
        let what = match &self.action {
            ExpectedAction::TurnsToward { light } => format!("turns_toward({light})"),
            ExpectedAction::NoResponse => "no_response".to_string(),
        };
        match &self.label {
            Some(label) => format!("{label}: {what} in [{}, {}]", self.from, self.to),
            None => format!("{what} in [{}, {}]", self.from, self.to),
        }
    }

    /// Judges the expectation against the recorded ticks. `bearings` maps light
    /// ids to where they were placed.
    pub fn evaluate(&self, records: &[TickRecord], bearings: &HashMap<String, f64>) -> Result<bool> {
        let window = records.iter().filter(|r| (self.from..=self.to).contains(&r.tick));
        Ok(match &self.action {
            ExpectedAction::TurnsToward { light } => {
                let bearing = *bearings
                    .get(light)
                    .ok_or_else(|| Error::UnknownLight(light.clone()))?;
                let mut probe = World::new(0);
                window
                    .filter(|r| r.action.sensor().is_some())
                    .any(|r| {
                        probe.heading = r.heading_after;
                        probe.faces(bearing)
                    })
            }
            ExpectedAction::NoResponse => {
                let mut window = window.peekable();
                match window.peek() {
                    None => true,
                    Some(first) => {
                        let h = first.heading;
                        window.all(|r| r.heading == h && r.heading_after == h)
                    }
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub ticks: u64,
    /// Clusterer kinds whose failures are reported but do not fail a suite.
    #[serde(default)]
    pub non_gating_kinds: Vec<ClustererKind>,
    #[serde(default)]
    pub config: toml::Table,
    #[serde(default)]
    pub timeline: Vec<TimedEvent>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

impl ScenarioScript {
    pub fn from_toml(text: &str) -> Result<Self> {
        let script: Self = toml::from_str(text)?;
        script.validate()?;
        Ok(script)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(format!("{}: {msg}", self.name)));
        if self.ticks == 0 {
            return bad("ticks must be positive".into());
        }
        if let Some(w) = self.timeline.windows(2).find(|w| w[1].tick < w[0].tick) {
            return bad(format!("timeline goes backwards at tick {}", w[1].tick));
        }
        let mut known = Vec::new();
        for e in &self.timeline {
            if e.tick >= self.ticks {
                return bad(format!("event at tick {} is past the end", e.tick));
            }
            match &e.event {
                ScenarioEvent::AddLight { id, bearing, sensor, pattern, .. } => {
                    if bearing.is_some() == sensor.is_some() {
                        return bad(format!("light `{id}` needs exactly one of `bearing` or `sensor`"));
                    }
                    if sensor.is_some_and(|s| s >= crate::arena::NUM_SENSORS) {
                        return bad(format!("light `{id}` placed on a non-existent sensor"));
                    }
                    pattern.resolve()?;
                    known.push(id.as_str());
                }
                other => {
                    if !known.contains(&other.light_id()) {
                        return bad(format!("event refers to unknown light `{}`", other.light_id()));
                    }
                    if let ScenarioEvent::SetPattern { pattern, .. } = other {
                        pattern.resolve()?;
                    }
                }
            }
        }
        for (i, x) in self.expect.iter().enumerate() {
            if x.from > x.to {
                return bad(format!("expectation {i} has an empty window"));
            }
            if let ExpectedAction::TurnsToward { light } = &x.action {
                if !known.contains(&light.as_str()) {
                    return bad(format!("expectation {i} names unknown light `{light}`"));
                }
            }
        }
        if let Some(i) = self.expect.windows(2).position(|w| w[1].from <= w[0].to) {
            return bad(format!("expectation windows {i} and {} overlap or are out of order", i + 1));
        }
        Ok(())
    }

    /// Layers the script's `[config]` over `base`.
    pub fn resolve_config(&self, base: &toml::Table) -> Result<RunConfig> {
        let mut table = base.clone();
        merge_tables(&mut table, &self.config);
        RunConfig::from_table(table)
    }
}

/// Runs a script against a fully resolved configuration.
pub fn run_with_config(script: &ScenarioScript, config: RunConfig) -> Result<RunLog> {
    script.validate()?;
    let mut sim = Simulation::new(config.clone())?;
    let mut bearings = HashMap::new();
    let mut records = Vec::with_capacity(script.ticks as usize);
    let mut events = script.timeline.iter().peekable();
    let mut applied = Vec::new();
    for tick in 0..script.ticks {
        while let Some(e) = events.next_if(|e| e.tick == tick) {
            let world_event = e.event.to_world_event(sim.world())?;
            if let WorldEvent::AddLight { light } = &world_event {
                bearings.insert(light.id.clone(), light.bearing);
            }
            sim.apply(world_event.clone())?;
            applied.push((tick, world_event));
        }
        records.push(sim.step()?);
    }
    let verdicts = script
        .expect
        .iter()
        .enumerate()
        .map(|(index, x)| {
            Ok(Verdict {
                index,
                expectation: x.describe(),
                pass: x.evaluate(&records, &bearings)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunLog {
        header: RunHeader::new(&script.name, &config),
        events: applied,
        records,
        verdicts,
    })
}

/// Runs a script with its own config layered over `base`, at `seed`.
pub fn run_scenario(script: &ScenarioScript, base: &toml::Table, seed: u64) -> Result<RunLog> {
    let mut config = script.resolve_config(base)?;
    config.seed = seed;
    run_with_config(script, config)
}
