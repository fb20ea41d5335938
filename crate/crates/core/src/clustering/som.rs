//! Ring-shaped self-organising map trained as a learning vector quantiser.

use super::{argmin, ring_neighbourhood, sq_distance, ClassifyResult, Weights};
use crate::error::Result;
use crate::scalar::Scalar;

/// Nearest neuron by squared Euclidean distance.
pub fn classify<T: Scalar>(weights: &Weights<T>, input: &[T]) -> Result<ClassifyResult<T>> {
    weights.check_input(input)?;
    let (winner, d) = argmin(weights.iter_rows().map(|w| sq_distance(input, w))).expect("non-empty map");
    Ok(ClassifyResult::from_distance(winner, d, weights.dim()))
}

/// Pulls the winner and its two ring neighbours towards `input` by `eta`.
pub fn train<T: Scalar>(weights: &mut Weights<T>, input: &[T], winner: usize, eta: T) -> Result<()> {
    weights.check_input(input)?;
    weights.check_neuron(winner)?;
    let mut hood = ring_neighbourhood(winner, weights.rows()).to_vec();
    hood.sort_unstable();
    hood.dedup();
    for i in hood {
        weights.pull(i, input, eta);
    }
    Ok(())
}
