//! Beta Experts: an independent Beta posterior per item over "this item
//! would satisfy the user".
//!
//! Every round adds one count to every item: to `a` for members of the chosen
//! cell and to `b` for everyone else, so after `R` rounds item `i` holds
//! `Beta(a0 + n_i, b0 + R - n_i)`.

use rand::Rng;

use crate::ds::validate_partition;
use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::sampling::select_distinct;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BetaState<F> {
    a: Vec<F>,
    b: Vec<F>,
    a0: F,
    b0: F,
    rounds: usize,
}

impl<F: Scalar> BetaState<F> {
    pub fn new(n: usize, a0: F, b0: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 items, got {n}")));
        }
        if !(a0 > F::zero() && b0 > F::zero() && a0.is_finite() && b0.is_finite()) {
            return Err(Error::validation(format!(
                "beta prior must be positive, got a0={a0}, b0={b0}"
            )));
        }
        Ok(BetaState {
            a: vec![a0; n],
            b: vec![b0; n],
            a0,
            b0,
            rounds: 0,
        })
    }

    /// Uniform `Beta(1, 1)` prior.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, F::one(), F::one())
    }

    /// Rebuilds a state from stored parameters, e.g. a snapshot.
    pub fn from_parts(a: Vec<F>, b: Vec<F>, a0: F, b0: F, rounds: usize) -> Result<Self> {
        let mut state = Self::new(a.len(), a0, b0)?;
        if b.len() != a.len() {
            return Err(Error::validation("a and b lengths differ"));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite() || *x <= F::zero()) {
            return Err(Error::validation("beta parameters must be positive"));
        }
        state.a = a;
        state.b = b;
        state.rounds = rounds;
        Ok(state)
    }

    pub fn a(&self) -> &[F] {
        &self.a
    }

    pub fn b(&self) -> &[F] {
        &self.b
    }

    pub fn prior(&self) -> (F, F) {
        (self.a0, self.b0)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn posterior_mean(&self, i: usize) -> F {
        self.a[i] / (self.a[i] + self.b[i])
    }

    pub fn update(&mut self, chosen_partition: &[usize]) -> Result<()> {
        validate_partition(chosen_partition, self.len())?;
        let mut member = vec![false; self.len()];
        for &i in chosen_partition {
            member[i] = true;
        }
        let one = F::one();
        for (i, &m) in member.iter().enumerate() {
            if m {
                self.a[i] = self.a[i] + one;
            } else {
                self.b[i] = self.b[i] + one;
            }
        }
        self.rounds += 1;
        Ok(())
    }

    /// Per slot, draw `f_i ~ Beta(a_i, b_i)` as `r_a / (r_a + r_b)` with
    /// `r_a ~ Gamma(a_i)`, `r_b ~ Gamma(b_i)`, and show the argmax.
    ///
    /// Scores are compared as `ln r_a - ln r_b`, the logit of `f_i`, which
    /// preserves the argmax and stays finite for small shapes.
    pub fn select<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<DisplaySet> {
        select_distinct(
            self.len(),
            k,
            rng,
            |_| (),
            |_, rng, scores| {
                for (i, s) in scores.iter_mut().enumerate() {
                    let ra = F::ln_gamma_variate(self.a[i], rng);
                    let rb = F::ln_gamma_variate(self.b[i], rng);
                    *s = ra - rb;
                }
            },
        )
    }

    /// Probability of each cell being picked, given `p_i` at the posterior
    /// mean: softmax over cells of the summed log odds `log(p_i / (1 - p_i))`.
    pub fn predict_choice(&self, partitions: &[Vec<usize>]) -> Result<Vec<F>> {
        if partitions.is_empty() {
            return Err(Error::validation("no partitions given"));
        }
        let mut seen = vec![false; self.len()];
        let mut scores = Vec::with_capacity(partitions.len());
        for cell in partitions {
            if cell.is_empty() {
                return Err(Error::EmptyPartition);
            }
            let mut s = F::zero();
            for &i in cell {
                if i >= self.len() {
                    return Err(Error::IndexOutOfRange { index: i, len: self.len() });
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::validation(format!("item {i} is in two partitions")));
                }
                // log(p / (1 - p)) with p = a / (a + b)
                s = s + (self.a[i] / self.b[i]).ln();
            }
            scores.push(s);
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::validation("partitions do not cover every item"));
        }
        let max = scores.iter().copied().fold(F::neg_infinity(), F::max);
        let exp: Vec<F> = scores.iter().map(|&s| (s - max).exp()).collect();
        let total: F = exp.iter().copied().sum();
        Ok(exp.into_iter().map(|e| e / total).collect())
    }
}
