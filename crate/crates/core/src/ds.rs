//! Dirichlet Search: a Dirichlet posterior over which single item is the
//! target.
//!
//! Two update paths are provided. [`DirichletState::vb_update`] is the
//! closed-form variational step that shares one unit of pseudocount mass over
//! the chosen cell. [`GibbsChain`] instead resamples the exact posterior from
//! the full [`RoundHistory`] using one latent responsibility per past round.

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::partition::{assign_partitions, DisplaySet};
use crate::sampling::{fill_ln_gamma, select_distinct};
use crate::scalar::Scalar;

/// Default number of Gibbs sweeps before a measure sample is used.
pub const DEFAULT_GIBBS_SWEEPS: usize = 100;

/// Checks that `partition` is a nonempty set of valid, distinct indices.
pub(crate) fn validate_partition(partition: &[usize], n: usize) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let mut seen = vec![false; n];
    for &i in partition {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::validation(format!(
                "item {i} listed twice in partition"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletState<F> {
    alpha: Vec<F>,
}

impl<F: Scalar> DirichletState<F> {
    /// Uniform base measure `1/n` with unit pseudocount.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 items, got {n}")));
        }
        let share = F::one() / F::from_usize(n).unwrap();
        Ok(DirichletState {
            alpha: vec![share; n],
        })
    }

    pub fn from_alpha(alpha: Vec<F>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::validation("need at least 2 items"));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < F::zero()) {
            return Err(Error::validation("alpha entries must be finite and >= 0"));
        }
        if alpha.iter().copied().sum::<F>() <= F::zero() {
            return Err(Error::validation("alpha must have positive total mass"));
        }
        Ok(DirichletState { alpha })
    }

    pub fn alpha(&self) -> &[F] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn total_mass(&self) -> F {
        self.alpha.iter().copied().sum()
    }

    /// Shares one unit of mass over `chosen_partition` in proportion to
    /// `max(0, alpha_i - 1/2)`, the surrogate for `exp(E[log theta_i])`.
    /// When every weight is zero the unit is split evenly.
    pub fn vb_update(&mut self, chosen_partition: &[usize]) -> Result<()> {
        validate_partition(chosen_partition, self.len())?;
        let half = F::lit(0.5);
        let weight = |a: F| (a - half).max(F::zero());
        let total: F = chosen_partition.iter().map(|&i| weight(self.alpha[i])).sum();
        if total > F::zero() {
            let increments: Vec<F> = chosen_partition
                .iter()
                .map(|&i| weight(self.alpha[i]) / total)
                .collect();
            for (&i, inc) in chosen_partition.iter().zip(increments) {
                self.alpha[i] = self.alpha[i] + inc;
            }
        } else {
            let share = F::one() / F::from_usize(chosen_partition.len()).unwrap();
            for &i in chosen_partition {
                self.alpha[i] = self.alpha[i] + share;
            }
        }
        Ok(())
    }

    /// Thompson-style selection: for each slot, draw `Gamma(alpha_i^tau, 1)`
    /// for every item and show the argmax. Normalising the draws into a
    /// Dirichlet sample would not change the argmax, so it is skipped.
    pub fn select<R: Rng + ?Sized>(&self, k: usize, tau: F, rng: &mut R) -> Result<DisplaySet> {
        let alpha = &self.alpha;
        select_distinct(
            alpha.len(),
            k,
            rng,
            |_| (),
            |_, rng, scores| fill_ln_gamma(scores, rng, tau, |i| alpha[i]),
        )
    }
}

/// One past round: what was shown, what was picked and the picked cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    display: DisplaySet,
    chosen_position: usize,
    chosen_partition: Vec<usize>,
}

impl RoundRecord {
    pub fn new(display: DisplaySet, chosen_position: usize, chosen_partition: Vec<usize>) -> Result<Self> {
        let chosen = display.item(chosen_position).ok_or(Error::IndexOutOfRange {
            index: chosen_position,
            len: display.len(),
        })?;
        if !chosen_partition.contains(&chosen) {
            return Err(Error::validation(format!(
                "chosen partition does not contain the chosen item {chosen}"
            )));
        }
        Ok(RoundRecord {
            display,
            chosen_position,
            chosen_partition,
        })
    }

    pub fn display(&self) -> &DisplaySet {
        &self.display
    }

    pub fn chosen_position(&self) -> usize {
        self.chosen_position
    }

    pub fn chosen_item(&self) -> usize {
        self.display.indices()[self.chosen_position]
    }

    pub fn chosen_partition(&self) -> &[usize] {
        &self.chosen_partition
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundHistory {
    rounds: Vec<RoundRecord>,
}

impl RoundHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Computes the chosen cell against `dataset` and appends the round.
    pub fn record<F: Scalar>(
        &mut self,
        dataset: &Dataset<F>,
        display: DisplaySet,
        chosen_position: usize,
    ) -> Result<&RoundRecord> {
        let cell = assign_partitions(dataset, &display)?.members(chosen_position)?;
        self.push(RoundRecord::new(display, chosen_position, cell)?);
        Ok(self.rounds.last().unwrap())
    }

    pub fn push(&mut self, record: RoundRecord) {
        self.rounds.push(record);
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

/// How measure samples are drawn for Gibbs-based selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsOptions {
    /// Sweeps run before a measure sample is used.
    pub sweeps: usize,
    /// When set, a single chain serves all slots of a display: after the
    /// initial `sweeps`, each further slot advances the chain by this many
    /// sweeps. When unset every slot runs its own fresh chain.
    pub thin: Option<usize>,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            sweeps: DEFAULT_GIBBS_SWEEPS,
            thin: None,
        }
    }
}

/// Auxiliary-variable Gibbs chain over the target measure `m`.
///
/// Each past round `l` gets a latent responsibility `v_l` in its chosen cell,
/// drawn with probability proportional to `m`. Given the responsibilities,
/// `m ~ Dirichlet(1/n + counts)`. The measure is held in log space: with
/// Dirichlet shapes near `1/n` most coordinates are far below `f64` range.
pub struct GibbsChain<'h, F> {
    cells: Vec<&'h [usize]>,
    prior: F,
    log_m: Vec<F>,
    linear: Vec<F>,
    counts: Vec<u32>,
    draws: Vec<F>,
}

impl<'h, F: Scalar> GibbsChain<'h, F> {
    /// Starts the chain at the uniform base measure.
    pub fn new(history: &'h RoundHistory, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation(format!("need at least 2 items, got {n}")));
        }
        let cells = history
            .rounds()
            .iter()
            .map(|r| {
                validate_partition(r.chosen_partition(), n)?;
                Ok(r.chosen_partition())
            })
            .collect::<Result<Vec<_>>>()?;
        let prior = F::one() / F::from_usize(n).unwrap();
        Ok(GibbsChain {
            cells,
            prior,
            log_m: vec![prior.ln(); n],
            linear: vec![F::zero(); n],
            counts: vec![0; n],
            draws: vec![F::zero(); n],
        })
    }

    pub fn log_measure(&self) -> &[F] {
        &self.log_m
    }

    pub fn measure(&self) -> Vec<F> {
        self.log_m.iter().map(|l| l.exp()).collect()
    }

    /// Draws `m ~ Dirichlet(1/n + counts)` into `log_m`.
    fn draw_measure<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (g, &c) in self.draws.iter_mut().zip(&self.counts) {
            let shape = self.prior + F::from_u32(c).unwrap();
            *g = F::ln_gamma_variate(shape, rng);
        }
        let max = self.draws.iter().copied().fold(F::neg_infinity(), F::max);
        let log_total = max
            + self
                .draws
                .iter()
                .map(|&g| (g - max).exp())
                .sum::<F>()
                .ln();
        for (l, &g) in self.log_m.iter_mut().zip(&self.draws) {
            *l = g - log_total;
        }
    }

    /// One full sweep: resample every responsibility, then the measure.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        if !self.cells.is_empty() {
            for (m, &l) in self.linear.iter_mut().zip(&self.log_m) {
                *m = l.exp();
            }
            for cell in &self.cells {
                let h = sample_responsibility(cell, &self.linear, &self.log_m, rng);
                self.counts[h] += 1;
            }
        }
        self.draw_measure(rng);
    }
}

/// Picks `h` from `cell` with probability proportional to `m_h`. Falls back
/// to log-space weights when every linear `m_h` in the cell underflowed.
fn sample_responsibility<F: Scalar, R: Rng + ?Sized>(
    cell: &[usize],
    linear: &[F],
    log_m: &[F],
    rng: &mut R,
) -> usize {
    let total: F = cell.iter().map(|&h| linear[h]).sum();
    if total > F::zero() && total.is_finite() {
        return pick_weighted(cell, |h| linear[h], total, rng);
    }
    let max = cell.iter().map(|&h| log_m[h]).fold(F::neg_infinity(), F::max);
    let w = |h: usize| (log_m[h] - max).exp();
    let total: F = cell.iter().map(|&h| w(h)).sum();
    pick_weighted(cell, w, total, rng)
}

fn pick_weighted<F: Scalar, R: Rng + ?Sized>(
    cell: &[usize],
    weight: impl Fn(usize) -> F,
    total: F,
    rng: &mut R,
) -> usize {
    let u = F::unit(rng) * total;
    let mut acc = F::zero();
    let mut last_positive = cell[0];
    for &h in cell {
        let w = weight(h);
        if w > F::zero() {
            last_positive = h;
            acc = acc + w;
            if u < acc {
                return h;
            }
        }
    }
    last_positive
}

/// A measure sample (probability vector of length `n`) from the Gibbs chain
/// after `sweeps` sweeps. With no history this is a direct
/// `Dirichlet(1/n, ..., 1/n)` draw.
pub fn gibbs_posterior_sample<F: Scalar, R: Rng + ?Sized>(
    history: &RoundHistory,
    n: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<F>> {
    if sweeps == 0 {
        return Err(Error::validation("sweeps must be >= 1"));
    }
    let mut chain = GibbsChain::<F>::new(history, n)?;
    if history.is_empty() {
        chain.sweep(rng);
    } else {
        for _ in 0..sweeps {
            chain.sweep(rng);
        }
    }
    Ok(chain.measure())
}

/// Gibbs-based selection: per slot, obtain a measure sample `m` and show the
/// argmax of `Gamma(m_i^tau, 1)` draws.
pub fn ds_gibbs_select<F: Scalar, R: Rng + ?Sized>(
    history: &RoundHistory,
    n: usize,
    k: usize,
    options: GibbsOptions,
    tau: F,
    rng: &mut R,
) -> Result<DisplaySet> {
    if options.sweeps == 0 {
        return Err(Error::validation("sweeps must be >= 1"));
    }
    crate::sampling::check_k(k, n)?;
    let sweeps = if history.is_empty() { 1 } else { options.sweeps };
    let draw = |m: &Vec<F>, rng: &mut R, scores: &mut [F]| {
        fill_ln_gamma(scores, rng, tau, |i| m[i].exp())
    };
    match options.thin {
        None => select_distinct(
            n,
            k,
            rng,
            |rng| {
                let mut chain = GibbsChain::new(history, n).expect("validated history");
                for _ in 0..sweeps {
                    chain.sweep(rng);
                }
                chain.log_m
            },
            draw,
        ),
        Some(thin) => {
            let mut chain = GibbsChain::new(history, n)?;
            let mut first = true;
            select_distinct(
                n,
                k,
                rng,
                |rng| {
                    let steps = if std::mem::take(&mut first) { sweeps } else { thin.max(1) };
                    for _ in 0..steps {
                        chain.sweep(rng);
                    }
                    chain.log_m.clone()
                },
                draw,
            )
        }
    }
}
