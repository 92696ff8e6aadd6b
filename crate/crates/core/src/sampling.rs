//! Sample-then-argmax display selection shared by the Bayesian engines.

use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::scalar::Scalar;

/// Resamples allowed for a slot whose argmax was already displayed.
pub const MAX_DUPLICATE_RESAMPLES: usize = 64;

/// Smallest Gamma shape handed to the sampler.
pub const MIN_GAMMA_SHAPE: f64 = 1e-12;

/// Index of the largest score; equal scores go to the lower index.
pub fn argmax<F: Scalar>(scores: &[F]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn argmax_excluding<F: Scalar>(scores: &[F], taken: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if taken[i] {
            continue;
        }
        match best {
            Some(b) if s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidDisplaySize { k, n })
    } else {
        Ok(())
    }
}

/// Fills `k` display slots with distinct items.
///
/// For each slot, `prepare` runs once (e.g. a posterior draw) and `draw`
/// fills a score per item; the slot takes the argmax. A repeated item
/// triggers a fresh `draw`, up to [`MAX_DUPLICATE_RESAMPLES`] times, after
/// which the best not-yet-shown item of the last draw is used.
pub(crate) fn select_distinct<F, R, P>(
    n: usize,
    k: usize,
    rng: &mut R,
    mut prepare: impl FnMut(&mut R) -> P,
    mut draw: impl FnMut(&P, &mut R, &mut [F]),
) -> Result<DisplaySet>
where
    F: Scalar,
    R: Rng + ?Sized,
{
    check_k(k, n)?;
    let mut scores = vec![F::zero(); n];
    let mut taken = vec![false; n];
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let ctx = prepare(rng);
        let mut pick = None;
        for _ in 0..=MAX_DUPLICATE_RESAMPLES {
            draw(&ctx, rng, &mut scores);
            let best = argmax(&scores);
            if !taken[best] {
                pick = Some(best);
                break;
            }
        }
        let pick = pick
            .or_else(|| argmax_excluding(&scores, &taken))
            .expect("k <= n leaves an untaken item");
        taken[pick] = true;
        chosen.push(pick);
    }
    Ok(DisplaySet::from_distinct(chosen))
}

/// Log Gamma draws with per-item shapes `shape(i)`, floored at
/// [`MIN_GAMMA_SHAPE`] and raised to the power `tau`.
pub(crate) fn fill_ln_gamma<F, R>(
    scores: &mut [F],
    rng: &mut R,
    tau: F,
    shape: impl Fn(usize) -> F,
) where
    F: Scalar,
    R: Rng + ?Sized,
{
    let floor = F::lit(MIN_GAMMA_SHAPE);
    let one = F::one();
    for (i, s) in scores.iter_mut().enumerate() {
        let mut a = shape(i).max(floor);
        if tau != one {
            a = a.powf(tau).max(floor);
        }
        *s = F::ln_gamma_variate(a, rng);
    }
}
