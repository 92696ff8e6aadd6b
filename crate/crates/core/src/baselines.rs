//! Comparison algorithms: constant-discount weighting (AL) and PicHunter.

use rand::Rng;

use crate::dataset::{euclidean, Dataset};
use crate::ds::validate_partition;
use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::sampling::check_k;
use crate::scalar::Scalar;

pub const DEFAULT_AL_DISCOUNT: f64 = 0.5;
pub const DEFAULT_PICHUNTER_SIGMA: f64 = 0.3;

/// Per-item weights demoted by a constant factor whenever an item falls
/// outside the chosen cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AlState<F> {
    w: Vec<F>,
    beta: F,
}

impl<F: Scalar> AlState<F> {
    pub fn new(n: usize, beta: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 items, got {n}")));
        }
        Self::check_beta(beta)?;
        Ok(AlState {
            w: vec![F::one(); n],
            beta,
        })
    }

    pub fn from_weights(w: Vec<F>, beta: F) -> Result<Self> {
        Self::check_beta(beta)?;
        if w.len() < 2 || w.iter().any(|x| !(*x >= F::zero() && *x <= F::one())) {
            return Err(Error::validation("weights must lie in [0, 1]"));
        }
        Ok(AlState { w, beta })
    }

    fn check_beta(beta: F) -> Result<()> {
        if beta >= F::zero() && beta < F::one() {
            Ok(())
        } else {
            Err(Error::validation(format!("discount must be in [0, 1), got {beta}")))
        }
    }

    pub fn weights(&self) -> &[F] {
        &self.w
    }

    pub fn discount(&self) -> F {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Multiplies the weight of every item outside `chosen_partition` by the
    /// discount.
    pub fn update(&mut self, chosen_partition: &[usize]) -> Result<()> {
        validate_partition(chosen_partition, self.len())?;
        let mut keep = vec![false; self.len()];
        for &i in chosen_partition {
            keep[i] = true;
        }
        for (w, keep) in self.w.iter_mut().zip(keep) {
            if !keep {
                *w = *w * self.beta;
            }
        }
        Ok(())
    }

    /// Draws `k` distinct items without replacement, each draw proportional
    /// to the remaining weights. If every remaining weight has underflowed to
    /// zero the draw is uniform over the remaining items.
    pub fn select<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<DisplaySet> {
        check_k(k, self.len())?;
        let mut w = self.w.clone();
        let mut taken = vec![false; w.len()];
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            let total: F = w.iter().copied().sum();
            let pick = if total > F::zero() {
                let u = F::unit(rng) * total;
                let mut acc = F::zero();
                let mut pick = None;
                let mut last = None;
                for (i, &wi) in w.iter().enumerate() {
                    if wi > F::zero() {
                        last = Some(i);
                        acc = acc + wi;
                        if u < acc {
                            pick = Some(i);
                            break;
                        }
                    }
                }
                pick.or(last).unwrap()
            } else {
                let free: Vec<usize> = (0..w.len()).filter(|&i| !taken[i]).collect();
                free[rng.random_range(0..free.len())]
            };
            taken[pick] = true;
            w[pick] = F::zero();
            chosen.push(pick);
        }
        Ok(DisplaySet::from_distinct(chosen))
    }
}

/// Probability per item of being the target, multiplied each round by a
/// normalised exponential kernel of distance to the picked item.
#[derive(Debug, Clone, PartialEq)]
pub struct PicHunterState<F> {
    p: Vec<F>,
    sigma: F,
}

impl<F: Scalar> PicHunterState<F> {
    pub fn new(n: usize, sigma: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 items, got {n}")));
        }
        let uniform = F::one() / F::from_usize(n).unwrap();
        Self::from_probabilities(vec![uniform; n], sigma)
    }

    pub fn from_probabilities(p: Vec<F>, sigma: F) -> Result<Self> {
        if !(sigma > F::zero() && sigma.is_finite()) {
            return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
        }
        if p.len() < 2 || p.iter().any(|x| !x.is_finite() || *x < F::zero()) {
            return Err(Error::validation("probabilities must be finite and >= 0"));
        }
        Ok(PicHunterState { p, sigma })
    }

    pub fn probabilities(&self) -> &[F] {
        &self.p
    }

    pub fn sigma(&self) -> F {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `p_i <- p_i * G_i` with `G_i = exp(-d_i/sigma) / sum_j exp(-d_j/sigma)`
    /// and `d_i` the distance from item `i` to the picked item, followed by
    /// renormalisation of `p`.
    pub fn update(&mut self, selected_item: usize, dataset: &Dataset<F>) -> Result<()> {
        dataset.check_index(selected_item)?;
        if dataset.len() != self.len() {
            return Err(Error::validation(format!(
                "state has {} items, dataset {}",
                self.len(),
                dataset.len()
            )));
        }
        let s = dataset.vector(selected_item);
        let dist: Vec<F> = dataset.vectors().map(|x| euclidean(x, s)).collect();
        self.update_with_distances(&dist)
    }

    pub fn update_with_distances(&mut self, distances: &[F]) -> Result<()> {
        if distances.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: distances.len(),
            });
        }
        // exp(-(d - d_min)/sigma) is the kernel up to a constant factor, which
        // the normalisation of G removes.
        let d_min = distances.iter().copied().fold(F::infinity(), F::min);
        let kernel: Vec<F> = distances
            .iter()
            .map(|&d| (-(d - d_min) / self.sigma).exp())
            .collect();
        let z: F = kernel.iter().copied().sum();
        for (p, g) in self.p.iter_mut().zip(kernel) {
            *p = *p * (g / z);
        }
        let total: F = self.p.iter().copied().sum();
        if total > F::zero() {
            self.p.iter_mut().for_each(|p| *p = *p / total);
        }
        Ok(())
    }

    /// The `k` most probable items, ties to the lower index.
    pub fn select(&self, k: usize) -> Result<DisplaySet> {
        check_k(k, self.len())?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.p[b].partial_cmp(&self.p[a]).unwrap().then(a.cmp(&b)));
        order.truncate(k);
        Ok(DisplaySet::from_distinct(order))
    }
}
