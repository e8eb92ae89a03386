//! Seeded random streams and truncated Gaussian draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numeric::{bisect, norm_cdf, norm_pdf};
use crate::{Error, Result};

/// Independent, reproducible stream for item `index` under `seed`.
///
/// Streams never overlap, so per-device draws do not depend on how many
/// devices precede them or on evaluation order.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A Gaussian truncated to `mean ± half_width`.
///
/// `scale` is the width of the parent Gaussian; `None` is the flat limit
/// (uniform on the window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub scale: Option<f64>,
    pub half_width: f64,
}

/// Standard deviation of `N(0, scale²)` truncated to `±half_width`.
pub fn truncated_sd(scale: f64, half_width: f64) -> f64 {
    if !half_width.is_finite() {
        return scale;
    }
    let a = half_width / scale;
    if a < 1e-3 {
        // nearly flat parent: series avoids cancellation in the closed form
        return half_width / libm::sqrt(3.0) * (1.0 - a * a / 15.0);
    }
    let mass = 2.0 * norm_cdf(a) - 1.0;
    let var_factor = 1.0 - 2.0 * a * norm_pdf(a) / mass;
    scale * libm::sqrt(var_factor.max(0.0))
}

impl TruncatedNormal {
    /// Plain truncation at `k` parent standard deviations.
    pub fn clipped(mean: f64, sd: f64, k: f64) -> Self {
        if sd == 0.0 {
            return TruncatedNormal { mean, scale: Some(0.0), half_width: 0.0 };
        }
        TruncatedNormal { mean, scale: Some(sd), half_width: k * sd }
    }

    /// Parent width chosen so that the truncated distribution has standard
    /// deviation `sd`. When `sd` is at or beyond what the window can carry
    /// (`half_width/√3`, the uniform limit) the flat limit is used.
    pub fn moment_matched(mean: f64, sd: f64, half_width: f64) -> Result<Self> {
        if !(sd >= 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidParameter {
                what: "truncated normal",
                reason: "needs sd >= 0 and a positive window",
            });
        }
        if sd == 0.0 {
            return Ok(TruncatedNormal { mean, scale: Some(0.0), half_width });
        }
        let uniform_sd = half_width / libm::sqrt(3.0);
        if sd >= uniform_sd * (1.0 - 1e-9) {
            return Ok(TruncatedNormal { mean, scale: None, half_width });
        }
        // truncated_sd is increasing in scale, from 0 to the uniform limit
        let mut hi = sd;
        while truncated_sd(hi, half_width) < sd {
            hi *= 2.0;
        }
        let b = bisect(|s| truncated_sd(s, half_width) - sd, sd, hi, 1e-12 * sd, 200)?;
        Ok(TruncatedNormal { mean, scale: Some(b.root), half_width })
    }

    /// Standard deviation of the distribution actually sampled.
    pub fn sd(&self) -> f64 {
        match self.scale {
            None => self.half_width / libm::sqrt(3.0),
            Some(0.0) => 0.0,
            Some(s) => truncated_sd(s, self.half_width),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h = self.half_width;
        match self.scale {
            Some(s) if s == 0.0 || h == 0.0 => self.mean,
            None => self.mean + h * (2.0 * rng.random::<f64>() - 1.0),
            Some(s) if h / s > 2.0 => loop {
                let z: f64 = rng.sample(StandardNormal);
                if (z * s).abs() <= h {
                    return self.mean + z * s;
                }
            },
            Some(s) => loop {
                // flat proposal on the window, Gaussian acceptance; efficient for narrow windows
                let x = h * (2.0 * rng.random::<f64>() - 1.0);
                if rng.random::<f64>() <= libm::exp(-0.5 * (x / s) * (x / s)) {
                    return self.mean + x;
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::std_pop;
    use std::vec::Vec;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 3).random();
        let c: u64 = stream(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_limit_sd() {
        // wide parent: truncated sd tends to w/sqrt(12) for a window of width w
        let sd = truncated_sd(1e6, 0.056);
        assert!((sd - 0.112 / libm::sqrt(12.0)).abs() < 1e-9);
    }

    #[test]
    fn moment_matching_hits_requested_sd() {
        let t = TruncatedNormal::moment_matched(0.0, 0.025, 0.056).unwrap();
        assert!((t.sd() - 0.025).abs() < 1e-12);
        let mut rng = stream(1, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| t.sample(&mut rng)).collect();
        assert!(xs.iter().all(|x| x.abs() <= 0.056));
        assert!((std_pop(&xs) - 0.025).abs() < 2e-4);
    }

    #[test]
    fn infeasible_sd_falls_back_to_flat() {
        let t = TruncatedNormal::moment_matched(977.77, 0.033, 0.056).unwrap();
        assert_eq!(t.scale, None);
        assert!((t.sd() - 0.112 / libm::sqrt(12.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_sd_is_deterministic() {
        let t = TruncatedNormal::clipped(5.0, 0.0, 3.0);
        let mut rng = stream(1, 0);
        assert_eq!(t.sample(&mut rng), 5.0);
    }
}
