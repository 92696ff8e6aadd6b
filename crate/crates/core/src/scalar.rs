//! Floating-point scalar abstraction shared by every engine.
//!
//! All numerical code is generic over [`Scalar`], which is implemented for
//! `f32` and `f64`. Random variates that need a concrete distribution
//! implementation (Gamma) are routed through the trait so generic code never
//! has to name `rand_distr` bounds.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::num::ParseFloatError;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distr::{Open01, StandardUniform};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr<Err = ParseFloatError>
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding if the target is narrower.
    fn lit(x: f64) -> Self;

    /// Uniform draw on `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on the open interval `(0, 1)`.
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from `Gamma(shape, 1)`. `shape` must be positive and finite.
    fn gamma_variate<R: Rng + ?Sized>(shape: Self, rng: &mut R) -> Self;

    /// Logarithm of a `Gamma(shape, 1)` draw.
    ///
    /// For `shape < 1` this uses `X = Y * U^(1/shape)` with
    /// `Y ~ Gamma(shape + 1)`, evaluated in log space so tiny shapes do not
    /// underflow to zero. Only the ordering of draws matters for argmax
    /// selection, so callers compare these values directly.
    fn ln_gamma_variate<R: Rng + ?Sized>(shape: Self, rng: &mut R) -> Self {
        if shape >= Self::one() {
            Self::gamma_variate(shape, rng).ln()
        } else {
            let boosted = Self::gamma_variate(shape + Self::one(), rng).ln();
            boosted + Self::open01(rng).ln() / shape
        }
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardUniform.sample(rng)
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            #[inline]
            fn gamma_variate<R: Rng + ?Sized>(shape: Self, rng: &mut R) -> Self {
                Gamma::<$t>::new(shape, 1.0)
                    .expect("gamma shape must be positive and finite")
                    .sample(rng)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_of_exp_ln_gamma<F: Scalar>(shape: f64, draws: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = F::lit(shape);
        (0..draws)
            .map(|_| F::ln_gamma_variate(s, &mut rng).exp().to_f64_lossy())
            .sum::<f64>()
            / draws as f64
    }

    #[test]
    fn log_gamma_variates_have_gamma_mean() {
        // E[Gamma(s, 1)] = s
        for &shape in &[0.3, 1.0, 4.5] {
            let m = mean_of_exp_ln_gamma::<f64>(shape, 40_000);
            assert!((m - shape).abs() < 0.05 * shape.max(1.0), "{shape}: {m}");
            let m32 = mean_of_exp_ln_gamma::<f32>(shape, 40_000);
            assert!((m32 - shape).abs() < 0.05 * shape.max(1.0), "{shape}: {m32}");
        }
    }

    #[test]
    fn tiny_shapes_stay_finite_in_log_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v = f64::ln_gamma_variate(1e-12, &mut rng);
            assert!(v.is_finite());
            let v = f32::ln_gamma_variate(1e-6, &mut rng);
            assert!(v.is_finite());
        }
    }
}
