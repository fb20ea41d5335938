//! Clustering back-ends for the novelty filter.
//!
//! Three interchangeable networks share the [`Clusterer`] interface:
//!
//! * [`ClustererKind::SomRing`]: a self-organising map on a ring, trained as a
//!   learning vector quantiser with a fixed nearest-neighbour neighbourhood.
//! * [`ClustererKind::Tkm`]: a temporal Kohonen map whose leaky-integrator
//!   activities carry a short memory of previous inputs.
//! * [`ClustererKind::Kmeans`]: online k-means, moving only the winning prototype.
//!
//! Learning rate and neighbourhood are constant so the maps never stop learning.

pub mod kmeans;
pub mod som;
pub mod tkm;

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use tkm::HistoryEntry;

/// Version tag written into [`ClustererSnapshot`] documents.
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClustererKind {
    SomRing,
    Tkm,
    Kmeans,
}

impl ClustererKind {
    pub const ALL: [ClustererKind; 3] = [Self::SomRing, Self::Tkm, Self::Kmeans];

    pub fn name(self) -> &'static str {
        match self {
            Self::SomRing => "som_ring",
            Self::Tkm => "tkm",
            Self::Kmeans => "kmeans",
        }
    }

    /// Input width: a six-reading lag vector, or the bare reading for the TKM.
    pub fn default_input_dim(self) -> usize {
        match self {
            Self::Tkm => 1,
            Self::SomRing | Self::Kmeans => 6,
        }
    }

    /// Whether a higher score wins (activity) rather than a lower one (distance).
    pub fn higher_wins(self) -> bool {
        matches!(self, Self::Tkm)
    }
}

impl fmt::Display for ClustererKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClustererKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "som_ring" | "som" => Ok(Self::SomRing),
            "tkm" => Ok(Self::Tkm),
            "kmeans" | "k-means" => Ok(Self::Kmeans),
            other => Err(Error::InvalidParameter(format!("unknown clusterer kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClustererConfig<T> {
    pub kind: ClustererKind,
    pub num_neurons: usize,
    pub input_dim: usize,
    pub eta: T,
    /// Leaky-integrator decay (TKM only).
    pub gamma: T,
    /// Number of past steps folded into a TKM weight update (TKM only).
    pub history_depth: usize,
    pub seed: u64,
}

impl<T: Scalar> ClustererConfig<T> {
    /// Twelve neurons, `eta = 0.25`, `gamma = 0.4`, history depth 3.
    pub fn new(kind: ClustererKind, seed: u64) -> Self {
        Self {
            kind,
            num_neurons: 12,
            input_dim: kind.default_input_dim(),
            eta: T::lit(0.25),
            gamma: T::lit(0.4),
            history_depth: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_neurons < 2 {
            return Err(Error::InvalidParameter(format!(
                "num_neurons must be >= 2, got {}",
                self.num_neurons
            )));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidParameter("input_dim must be positive".into()));
        }
        if !(self.eta >= T::zero() && self.eta <= T::one()) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.gamma >= T::zero() && self.gamma < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Dense `neurons x dim` weight matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    rows: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> Weights<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || dim == 0 {
            return Err(Error::InvalidParameter("weight matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), dim, data })
    }

    /// Uniform random weights in `[0, 1)`.
    pub fn random(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * dim).map(|_| T::lit(rng.random::<f64>())).collect();
        Self { rows, dim, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.iter_rows().map(<[T]>::to_vec).collect()
    }

    pub(crate) fn check_input(&self, input: &[T]) -> Result<()> {
        if input.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: input.len() })
        }
    }

    pub(crate) fn check_neuron(&self, index: usize) -> Result<()> {
        if index < self.rows {
            Ok(())
        } else {
            Err(Error::NeuronOutOfRange { index, len: self.rows })
        }
    }

    /// Moves row `i` a fraction `eta` of the way towards `target`.
    pub(crate) fn pull(&mut self, i: usize, target: &[T], eta: T) {
        for (w, &v) in self.row_mut(i).iter_mut().zip(target) {
            *w = *w + eta * (v - *w);
        }
    }
}

/// Squared Euclidean distance.
pub fn sq_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// The winner and its two neighbours on a ring of `len` neurons.
pub fn ring_neighbourhood(winner: usize, len: usize) -> [usize; 3] {
    [(winner + len - 1) % len, winner, (winner + 1) % len]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResult<T> {
    pub winner: usize,
    /// Squared distance for the distance kinds (lower wins), activity for the TKM.
    pub score: T,
    /// Match quality on a common `[0, 1]` scale.
    pub normalized_match: T,
}

impl<T: Scalar> ClassifyResult<T> {
    pub(crate) fn from_distance(winner: usize, d: T, dim: usize) -> Self {
        let dim = T::from_usize(dim).unwrap_or_else(T::one);
        Self {
            winner,
            score: d,
            normalized_match: (-d / dim).exp(),
        }
    }

    pub(crate) fn from_activity(winner: usize, a: T) -> Self {
        Self {
            winner,
            score: a,
            normalized_match: a.min(T::one()).max(T::zero()),
        }
    }
}

/// Index of the smallest value; the lowest index wins ties.
pub(crate) fn argmin<T: Scalar>(values: impl Iterator<Item = T>) -> Option<(usize, T)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if v >= b => best,
        _ => Some((i, v)),
    })
}

/// Clustering network state: weights plus the TKM's short-term memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Clusterer<T> {
    config: ClustererConfig<T>,
    weights: Weights<T>,
    activities: Vec<T>,
    history: VecDeque<HistoryEntry<T>>,
}

impl<T: Scalar> Clusterer<T> {
    pub fn new(config: ClustererConfig<T>) -> Result<Self> {
        config.validate()?;
        let weights = Weights::random(config.num_neurons, config.input_dim, config.seed);
        Ok(Self {
            activities: vec![T::zero(); config.num_neurons],
            history: VecDeque::with_capacity(config.history_depth),
            config,
            weights,
        })
    }

    /// Builds a clusterer around explicit weights (their shape overrides the config).
    pub fn with_weights(mut config: ClustererConfig<T>, weights: Weights<T>) -> Result<Self> {
        config.num_neurons = weights.rows();
        config.input_dim = weights.dim();
        config.validate()?;
        Ok(Self {
            activities: vec![T::zero(); weights.rows()],
            history: VecDeque::with_capacity(config.history_depth),
            config,
            weights,
        })
    }

    pub fn config(&self) -> &ClustererConfig<T> {
        &self.config
    }

    pub fn kind(&self) -> ClustererKind {
        self.config.kind
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn activities(&self) -> &[T] {
        &self.activities
    }

    pub fn set_activities(&mut self, activities: Vec<T>) -> Result<()> {
        if activities.len() != self.weights.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.rows(),
                got: activities.len(),
            });
        }
        self.activities = activities;
        Ok(())
    }

    pub fn history(&self) -> &VecDeque<HistoryEntry<T>> {
        &self.history
    }

    pub fn num_neurons(&self) -> usize {
        self.weights.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.dim()
    }

    /// Picks the winning neuron for `input`. For the TKM this also updates the
    /// leaky-integrator activities.
    pub fn classify(&mut self, input: &[T]) -> Result<ClassifyResult<T>> {
        match self.config.kind {
            ClustererKind::SomRing => som::classify(&self.weights, input),
            ClustererKind::Kmeans => kmeans::classify(&self.weights, input),
            ClustererKind::Tkm => tkm::classify(&self.weights, &mut self.activities, self.config.gamma, input),
        }
    }

    /// Applies the learning rule for the neuron that won on `input`.
    pub fn train(&mut self, input: &[T], winner: usize) -> Result<()> {
        let eta = self.config.eta;
        match self.config.kind {
            ClustererKind::SomRing => som::train(&mut self.weights, input, winner, eta),
            ClustererKind::Kmeans => kmeans::train(&mut self.weights, input, winner, eta),
            ClustererKind::Tkm => tkm::train(
                &mut self.weights,
                &mut self.history,
                input,
                winner,
                eta,
                self.config.gamma,
                self.config.history_depth,
            ),
        }
    }

    /// Forgets short-term temporal context (TKM activities and update history);
    /// learned weights are kept.
    pub fn clear_context(&mut self) {
        self.activities.iter_mut().for_each(|a| *a = T::zero());
        self.history.clear();
    }

    /// Re-initializes weights from the configured seed and clears all memory.
    pub fn reset(&mut self) {
        self.weights = Weights::random(self.config.num_neurons, self.config.input_dim, self.config.seed);
        self.clear_context();
    }

    pub fn snapshot(&self) -> ClustererSnapshot<T> {
        ClustererSnapshot {
            version: SNAPSHOT_VERSION,
            config: self.config.clone(),
            weights: self.weights.to_rows(),
            activities: self.activities.clone(),
            history: self.history.iter().cloned().collect(),
        }
    }

    pub fn from_snapshot(snapshot: ClustererSnapshot<T>) -> Result<Self> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion(snapshot.version));
        }
        let weights = Weights::from_rows(&snapshot.weights)?;
        let mut clusterer = Self::with_weights(snapshot.config, weights)?;
        clusterer.set_activities(snapshot.activities)?;
        for entry in &snapshot.history {
            clusterer.weights.check_input(&entry.input)?;
            if entry.weights.rows() != clusterer.weights.rows() || entry.weights.dim() != clusterer.weights.dim() {
                return Err(Error::InvalidParameter("history snapshot shape differs from weights".into()));
            }
        }
        clusterer.history = snapshot.history.into();
        Ok(clusterer)
    }
}

/// Serializable image of a [`Clusterer`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClustererSnapshot<T> {
    pub version: u32,
    pub config: ClustererConfig<T>,
    pub weights: Vec<Vec<T>>,
    pub activities: Vec<T>,
    pub history: Vec<HistoryEntry<T>>,
}

impl<T: Scalar> ClustererSnapshot<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_wraps() {
        assert_eq!(ring_neighbourhood(0, 12), [11, 0, 1]);
        assert_eq!(ring_neighbourhood(11, 12), [10, 11, 0]);
        assert_eq!(ring_neighbourhood(1, 2), [0, 1, 0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmin([2.0, 1.0, 1.0].into_iter()), Some((1, 1.0)));
    }

    #[test]
    fn config_validation() {
        let mut c = ClustererConfig::<f64>::new(ClustererKind::SomRing, 0);
        assert!(c.validate().is_ok());
        c.num_neurons = 1;
        assert!(c.validate().is_err());
        let mut c = ClustererConfig::<f64>::new(ClustererKind::Tkm, 0);
        c.gamma = 1.0;
        assert!(c.validate().is_err());
        let mut c = ClustererConfig::<f64>::new(ClustererKind::Kmeans, 0);
        c.eta = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_init_in_unit_range_and_seeded() {
        let a = Weights::<f64>::random(12, 6, 7);
        let b = Weights::<f64>::random(12, 6, 7);
        assert_eq!(a, b);
        assert!(a.iter_rows().flatten().all(|&w| (0.0..1.0).contains(&w)));
        assert_ne!(a, Weights::random(12, 6, 8));
    }

    #[test]
    fn kind_parsing() {
        for kind in ClustererKind::ALL {
            assert_eq!(kind.name().parse::<ClustererKind>().unwrap(), kind);
        }
        assert!("gas".parse::<ClustererKind>().is_err());
    }

    #[test]
    fn snapshot_json_restores_state() {
        let mut c = Clusterer::<f64>::new(ClustererConfig::new(ClustererKind::Tkm, 3)).unwrap();
        for x in [0.0, 1.0, 1.0, 0.5] {
            let r = c.classify(&[x]).unwrap();
            c.train(&[x], r.winner).unwrap();
        }
        let json = c.snapshot().to_json().unwrap();
        let restored = Clusterer::from_snapshot(ClustererSnapshot::from_json(&json).unwrap()).unwrap();
        assert_eq!(restored, c);

        let mut bad = c.snapshot();
        bad.version = 99;
        assert!(matches!(Clusterer::from_snapshot(bad), Err(Error::SnapshotVersion(99))));
    }
}
