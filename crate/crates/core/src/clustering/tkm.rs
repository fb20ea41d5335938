//! Temporal Kohonen map.
//!
//! Each neuron is a leaky integrator: `a_i <- gamma * a_i + exp(-|v - w_i|^2 / 2)`.
//! The most active neuron wins, so recent winners are favoured; equal
//! activities go to the nearer neuron, then to the lower index. Weight updates
//! fold in the last few (input, weight) pairs, discounted by `gamma^k`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{ring_neighbourhood, sq_distance, ClassifyResult, Weights};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Input seen at a past step together with the weights in force at that step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry<T> {
    pub input: Vec<T>,
    pub weights: Weights<T>,
}

/// Gaussian match gain of one neuron.
pub fn gain<T: Scalar>(input: &[T], w: &[T]) -> T {
    (-T::lit(0.5) * sq_distance(input, w)).exp()
}

/// Integrates `input` into every neuron's activity and returns the most active.
pub fn classify<T: Scalar>(
    weights: &Weights<T>,
    activities: &mut [T],
    gamma: T,
    input: &[T],
) -> Result<ClassifyResult<T>> {
    weights.check_input(input)?;
    if activities.len() != weights.rows() {
        return Err(Error::DimensionMismatch { expected: weights.rows(), got: activities.len() });
    }
    let mut distances = Vec::with_capacity(activities.len());
    for (a, w) in activities.iter_mut().zip(weights.iter_rows()) {
        let d = sq_distance(input, w);
        *a = gamma * *a + (-T::lit(0.5) * d).exp();
        distances.push(d);
    }
    // Near a perfect match the gain rounds to 1, so equal activities are
    // separated by the distance before falling back to the lowest index.
    let mut winner = 0;
    for i in 1..activities.len() {
        let (a, b) = (activities[i], activities[winner]);
        if a > b || (a == b && distances[i] < distances[winner]) {
            winner = i;
        }
    }
    Ok(ClassifyResult::from_activity(winner, activities[winner]))
}

/// Updates the winner and its ring neighbours with the discounted sum of the
/// current and up to `depth` remembered differences, then records the current
/// step in `history` (most recent first).
pub fn train<T: Scalar>(
    weights: &mut Weights<T>,
    history: &mut VecDeque<HistoryEntry<T>>,
    input: &[T],
    winner: usize,
    eta: T,
    gamma: T,
    depth: usize,
) -> Result<()> {
    weights.check_input(input)?;
    weights.check_neuron(winner)?;
    let before = weights.clone();
    let mut hood = ring_neighbourhood(winner, weights.rows()).to_vec();
    hood.sort_unstable();
    hood.dedup();
    for i in hood {
        let mut delta = vec![T::zero(); weights.dim()];
        accumulate(&mut delta, input, before.row(i), T::one());
        let mut discount = T::one();
        for past in history.iter().take(depth) {
            discount = discount * gamma;
            accumulate(&mut delta, &past.input, past.weights.row(i), discount);
        }
        for (w, d) in weights.row_mut(i).iter_mut().zip(&delta) {
            *w = *w + eta * *d;
        }
    }
    if depth > 0 {
        history.push_front(HistoryEntry { input: input.to_vec(), weights: before });
        history.truncate(depth);
    }
    Ok(())
}

fn accumulate<T: Scalar>(delta: &mut [T], v: &[T], w: &[T], discount: T) {
    for ((d, &x), &y) in delta.iter_mut().zip(v).zip(w) {
        *d = *d + discount * (x - y);
    }
}
