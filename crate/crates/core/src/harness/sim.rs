//! The closed loop: world -> four novelty filters -> attention -> world.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::arena::{World, WorldEvent, NUM_SENSORS};
use crate::attention::{execute, Action, Attention, CalibrationScan, ScanStep};
use crate::error::Result;
use crate::filter::{NoveltyFilter, NoveltyReport};

/// Everything that happened during one tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Heading while the sensors were read.
    pub heading: f64,
    pub readings: [f64; NUM_SENSORS],
    pub reports: Vec<NoveltyReport<f64>>,
    pub action: Action,
    /// Heading once the tick's action (or scan step) was carried out.
    pub heading_after: f64,
    pub scanning: bool,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    config: RunConfig,
    world: World,
    filters: Vec<NoveltyFilter<f64>>,
    attention: Attention<f64>,
    scan: Option<CalibrationScan>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let filters = (0..NUM_SENSORS)
            .map(|s| NoveltyFilter::new(s, config.filter_config(s)))
            .collect::<Result<Vec<_>>>()?;
        let mut world = World::new(config.seed);
        world.noise_std = config.noise_std;
        Ok(Self {
            attention: Attention::new(config.attention_config())?,
            config,
            world,
            filters,
            scan: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn filters(&self) -> &[NoveltyFilter<f64>] {
        &self.filters
    }

    pub fn scanning(&self) -> bool {
        self.scan.is_some()
    }

    pub fn apply(&mut self, event: WorldEvent) -> Result<()> {
        self.world.apply_event(event)
    }

    pub fn set_forgetting(&mut self, forgetting: bool) {
        self.config.forgetting = forgetting;
        self.filters.iter_mut().for_each(|f| f.set_forgetting(forgetting));
    }

    /// Back to tick zero with no lights and untrained filters.
    pub fn reset(&mut self) -> Result<()> {
        *self = Self::new(self.config.clone())?;
        Ok(())
    }

    fn after_rotation(&mut self) {
        if self.config.clear_context_on_turn {
            self.filters.iter_mut().for_each(NoveltyFilter::clear_context);
        }
        self.attention.clear();
    }

    /// Senses, filters, decides and acts, then advances the clock.
    pub fn step(&mut self) -> Result<TickRecord> {
        let tick = self.world.tick;
        let heading = self.world.heading;
        let readings = self.world.readings();
        let mut reports = Vec::with_capacity(NUM_SENSORS);
        for (filter, &reading) in self.filters.iter_mut().zip(&readings) {
            if let Some(report) = filter.ingest(reading)? {
                reports.push(report);
            }
        }

        let scanning = self.scan.is_some();
        let mut action = Action::None;
        if let Some(scan) = self.scan.as_mut() {
            match scan.tick(&mut self.world) {
                ScanStep::Dwell => {}
                ScanStep::Rotated => self.after_rotation(),
                ScanStep::Finished => {
                    self.scan = None;
                    self.after_rotation();
                }
            }
        } else {
            let decision = self.attention.decide(&reports)?;
            action = decision.action;
            self.scan = execute(&decision, &mut self.world, self.config.scan_dwell);
            if self.world.heading != heading || self.scan.is_some() {
                self.after_rotation();
            }
        }

        let record = TickRecord {
            tick,
            heading,
            readings,
            reports,
            action,
            heading_after: self.world.heading,
            scanning,
        };
        self.world.advance();
        Ok(record)
    }
}
