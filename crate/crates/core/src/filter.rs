//! Per-sensor novelty filter.
//!
//! Readings are gathered into a lag vector, classified by a [`Clusterer`], and the
//! winner's output passes through a habituable synapse. A neuron that wins often
//! ends up with a low efficacy, so only unfamiliar inputs yield a strong output.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::clustering::{Clusterer, ClustererConfig, ClustererKind};
use crate::error::{Error, Result};
use crate::habituation::{HabituationParams, SynapseState};
use crate::scalar::Scalar;

/// Fixed-capacity window of the most recent readings, oldest first.
#[derive(Clone, Debug, PartialEq)]
pub struct LagBuffer<T> {
    readings: VecDeque<T>,
    capacity: usize,
}

impl<T: Scalar> LagBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            readings: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, reading: T) {
        if self.readings.len() == self.capacity {
            self.readings.pop_front();
        }
        self.readings.push_back(reading);
    }

    pub fn is_full(&self) -> bool {
        self.readings.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn clear(&mut self) {
        self.readings.clear();
    }

    /// The lag vector, once the window is full.
    pub fn vector(&self) -> Option<Vec<T>> {
        self.is_full().then(|| self.readings.iter().copied().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyReport<T> {
    pub sensor_id: usize,
    pub winner: usize,
    /// Winner's efficacy before this tick's habituation step.
    pub novelty: T,
    /// The winner had never fired before.
    pub is_new: bool,
    pub raw_strength: T,
}

impl<T: Scalar> NoveltyReport<T> {
    /// New stimuli always count; otherwise the efficacy must exceed the boredom threshold.
    pub fn is_novel(&self, boredom_threshold: T) -> bool {
        self.is_new || self.novelty > boredom_threshold
    }
}

/// Free-function form of [`NoveltyReport::is_novel`].
pub fn is_novel<T: Scalar>(report: &NoveltyReport<T>, config: &FilterConfig<T>) -> bool {
    report.is_novel(config.boredom_threshold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct FilterConfig<T> {
    pub clusterer: ClustererConfig<T>,
    pub habituation: HabituationParams<T>,
    pub forgetting: bool,
    pub boredom_threshold: T,
}

impl<T: Scalar> FilterConfig<T> {
    pub fn new(kind: ClustererKind, seed: u64, forgetting: bool) -> Self {
        Self {
            clusterer: ClustererConfig::new(kind, seed),
            habituation: HabituationParams::robot(),
            forgetting,
            boredom_threshold: T::lit(0.4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.clusterer.validate()?;
        self.habituation.validate()?;
        let t = self.boredom_threshold;
        if !(t > T::zero() && t < self.habituation.y0) {
            return Err(Error::InvalidParameter(format!(
                "boredom threshold must lie in (0, y0), got {t}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoveltyFilter<T> {
    sensor_id: usize,
    config: FilterConfig<T>,
    lag: LagBuffer<T>,
    clusterer: Clusterer<T>,
    synapses: Vec<SynapseState<T>>,
}

impl<T: Scalar> NoveltyFilter<T> {
    pub fn new(sensor_id: usize, config: FilterConfig<T>) -> Result<Self> {
        config.validate()?;
        let clusterer = Clusterer::new(config.clusterer.clone())?;
        let synapses = vec![SynapseState::resting(&config.habituation); clusterer.num_neurons()];
        Ok(Self {
            sensor_id,
            lag: LagBuffer::new(clusterer.input_dim()),
            clusterer,
            synapses,
            config,
        })
    }

    pub fn sensor_id(&self) -> usize {
        self.sensor_id
    }

    pub fn config(&self) -> &FilterConfig<T> {
        &self.config
    }

    pub fn clusterer(&self) -> &Clusterer<T> {
        &self.clusterer
    }

    pub fn synapses(&self) -> &[SynapseState<T>] {
        &self.synapses
    }

    pub fn efficacies(&self) -> Vec<T> {
        self.synapses.iter().map(|s| s.efficacy).collect()
    }

    pub fn set_forgetting(&mut self, forgetting: bool) {
        self.config.forgetting = forgetting;
    }

    /// Feeds one reading. Returns a report whenever a classification happens:
    /// every tick for the TKM, and once the lag window is full for the others.
    ///
    /// The report carries the winner's efficacy as it was before firing, so the
    /// first win of any neuron reports the resting value.
    pub fn ingest(&mut self, reading: T) -> Result<Option<NoveltyReport<T>>> {
        if !(reading >= T::zero() && reading <= T::one()) {
            return Err(Error::ReadingOutOfRange(reading.as_f64()));
        }
        self.lag.push(reading);
        let Some(input) = self.lag.vector() else {
            return Ok(None);
        };
        let result = self.clusterer.classify(&input)?;
        let winner = result.winner;
        let before = self.synapses[winner];
        let report = NoveltyReport {
            sensor_id: self.sensor_id,
            winner,
            novelty: before.efficacy,
            is_new: !before.ever_fired,
            raw_strength: result.normalized_match,
        };

        let params = &self.config.habituation;
        let forgetting = self.config.forgetting;
        for (i, synapse) in self.synapses.iter_mut().enumerate() {
            let stimulus = if i == winner { T::one() } else { T::zero() };
            *synapse = synapse.step(stimulus, params, forgetting)?;
        }
        self.clusterer.train(&input, winner)?;
        Ok(Some(report))
    }

    /// Drops short-term context (lag window, TKM activities) while keeping what
    /// has been learned. Used when the sensor suddenly points somewhere else.
    pub fn clear_context(&mut self) {
        self.lag.clear();
        self.clusterer.clear_context();
    }

    /// Back to the freshly constructed state, config unchanged.
    pub fn reset(&mut self) {
        self.lag.clear();
        self.clusterer.reset();
        let resting = SynapseState::resting(&self.config.habituation);
        self.synapses.iter_mut().for_each(|s| *s = resting);
    }
}
