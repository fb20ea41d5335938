//! Online k-means: nearest-prototype assignment, winner-only updates.

use super::{argmin, sq_distance, ClassifyResult, Weights};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nearest prototype by squared Euclidean distance.
pub fn classify<T: Scalar>(prototypes: &Weights<T>, input: &[T]) -> Result<ClassifyResult<T>> {
    prototypes.check_input(input)?;
    let (winner, d) = argmin(prototypes.iter_rows().map(|mu| sq_distance(input, mu))).expect("non-empty prototype set");
    Ok(ClassifyResult::from_distance(winner, d, prototypes.dim()))
}

/// `mu_winner += eta * (x - mu_winner)`; every other prototype is left alone.
pub fn train<T: Scalar>(prototypes: &mut Weights<T>, input: &[T], winner: usize, eta: T) -> Result<()> {
    prototypes.check_input(input)?;
    prototypes.check_neuron(winner)?;
    prototypes.pull(winner, input, eta);
    Ok(())
}

/// Sum-of-squares clustering cost with each point assigned to its nearest prototype.
pub fn cost<T: Scalar, P: AsRef<[T]>>(prototypes: &Weights<T>, data: &[P]) -> Result<T> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("cost needs at least one point".into()));
    }
    data.iter().try_fold(T::zero(), |acc, x| Ok(acc + classify(prototypes, x.as_ref())?.score))
}
