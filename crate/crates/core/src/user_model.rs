//! Simulated user: picks among the shown items with probability mixing a
//! polynomial-similarity softmax and uniform noise.

use rand::Rng;

use crate::dataset::{euclidean, Dataset};
use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserParams<F> {
    /// Exponent `a` of the similarity `d^-a`.
    pub sharpness: F,
    /// Probability mass `lambda` of a uniformly random pick.
    pub noise: F,
    /// Distances are floored here before exponentiation.
    pub epsilon: F,
}

impl<F: Scalar> Default for UserParams<F> {
    fn default() -> Self {
        UserParams {
            sharpness: F::lit(2.0),
            noise: F::lit(0.1),
            epsilon: F::lit(1e-9),
        }
    }
}

impl<F: Scalar> UserParams<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sharpness > F::zero() && self.sharpness.is_finite()) {
            return Err(Error::validation("sharpness must be positive"));
        }
        if !(self.noise >= F::zero() && self.noise <= F::one()) {
            return Err(Error::validation("noise must lie in [0, 1]"));
        }
        if self.epsilon.is_nan() || self.epsilon <= F::zero() {
            return Err(Error::validation("epsilon must be positive"));
        }
        Ok(())
    }
}

/// `max(d(x, t), epsilon)^-sharpness`.
pub fn similarity<F: Scalar>(x: &[F], t: &[F], params: &UserParams<F>) -> Result<F> {
    let d = crate::dataset::distance(x, t)?;
    Ok(similarity_from_distance(d, params))
}

fn similarity_from_distance<F: Scalar>(d: F, params: &UserParams<F>) -> F {
    d.max(params.epsilon).powf(-params.sharpness)
}

/// Pick probabilities over display positions:
/// `(1 - lambda) * S_j / sum S + lambda / k`.
pub fn choice_distribution<F: Scalar>(
    display: &DisplaySet,
    target: &[F],
    dataset: &Dataset<F>,
    params: &UserParams<F>,
) -> Result<Vec<F>> {
    params.validate()?;
    if target.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            found: target.len(),
        });
    }
    let distances: Vec<F> = display
        .indices()
        .iter()
        .map(|&i| {
            dataset.check_index(i)?;
            Ok(euclidean(dataset.vector(i), target))
        })
        .collect::<Result<_>>()?;
    Ok(choice_distribution_from_distances(&distances, params))
}

pub(crate) fn choice_distribution_from_distances<F: Scalar>(
    distances: &[F],
    params: &UserParams<F>,
) -> Vec<F> {
    // Scaling all similarities by a common factor cancels in the ratio; the
    // shift by the smallest distance keeps d^-a in range.
    let d_min = distances
        .iter()
        .map(|&d| d.max(params.epsilon))
        .fold(F::infinity(), F::min);
    let sims: Vec<F> = distances
        .iter()
        .map(|&d| similarity_from_distance(d, params) / similarity_from_distance(d_min, params))
        .collect();
    let total: F = sims.iter().copied().sum();
    let k = F::from_usize(distances.len()).unwrap();
    let keep = F::one() - params.noise;
    sims.into_iter()
        .map(|s| keep * s / total + params.noise / k)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceOutcome {
    /// A target-set member was shown; the search ends.
    Success,
    /// The user picked this display position.
    Chose(usize),
}

/// Ends the search if any shown item is in `target_set`, otherwise samples a
/// position from [`choice_distribution`] against the target vector `target`.
pub fn simulate_choice<F: Scalar, R: Rng + ?Sized>(
    display: &DisplaySet,
    target_set: &[usize],
    target: &[F],
    dataset: &Dataset<F>,
    params: &UserParams<F>,
    rng: &mut R,
) -> Result<ChoiceOutcome> {
    if display.indices().iter().any(|i| target_set.contains(i)) {
        return Ok(ChoiceOutcome::Success);
    }
    let probs = choice_distribution(display, target, dataset, params)?;
    Ok(ChoiceOutcome::Chose(sample_categorical(&probs, rng)))
}

pub(crate) fn sample_categorical<F: Scalar, R: Rng + ?Sized>(probs: &[F], rng: &mut R) -> usize {
    let u = F::unit(rng);
    let mut acc = F::zero();
    for (j, &p) in probs.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return j;
        }
    }
    probs.len() - 1
}
