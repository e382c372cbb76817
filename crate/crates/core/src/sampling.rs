//! Deterministic sample generation shared by every probe.
//!
//! A sample set is a fixed list of structured stress vectors followed by
//! vectors with coordinates drawn uniformly from a compact box. The same
//! `(box, p, seed, count)` always yields the same list.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Width used for the finite side of a half-infinite domain.
const UNBOUNDED_SPAN: f64 = 10.0;
/// Relative inset applied at open endpoints.
const OPEN_INSET: f64 = 1e-3;
/// Relative perturbation of the near-constant stress vector.
const NEAR_CONSTANT: f64 = 1e-6;

/// A compact box `[lo, hi]^p` that samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl SampleBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument {
                field: "sample box",
                reason: format!("[{lo}, {hi}] is not a finite nondegenerate range"),
            });
        }
        Ok(Self { lo, hi })
    }

    /// A compact sub-box of `domain`: bounded sides are kept, unbounded
    /// sides are truncated, open sides are moved inward slightly.
    pub fn within(domain: &Interval) -> Self {
        let (mut lo, mut hi) = match (domain.lower().is_finite(), domain.upper().is_finite()) {
            (true, true) => (domain.lower(), domain.upper()),
            (true, false) => (domain.lower(), domain.lower() + UNBOUNDED_SPAN),
            (false, true) => (domain.upper() - UNBOUNDED_SPAN, domain.upper()),
            (false, false) => (-UNBOUNDED_SPAN, UNBOUNDED_SPAN),
        };
        let inset = OPEN_INSET * (hi - lo);
        if !domain.lower_closed() {
            lo += inset;
        }
        if !domain.upper_closed() {
            hi -= inset;
        }
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    sample_box: SampleBox,
    arity: usize,
    seed: u64,
    stress: bool,
}

impl Sampler {
    pub fn new(sample_box: SampleBox, arity: usize, seed: u64) -> Self {
        Self {
            sample_box,
            arity,
            seed,
            stress: true,
        }
    }

    /// Disables the leading stress vectors; every sample is then uniform.
    pub fn uniform_only(mut self) -> Self {
        self.stress = false;
        self
    }

    pub fn sample_box(&self) -> SampleBox {
        self.sample_box
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Near-constant, one-outlier, alternating-extremes and ramp vectors.
    pub fn stress_vectors(&self) -> Vec<Vec<f64>> {
        let SampleBox { lo, hi } = self.sample_box;
        let p = self.arity;
        if p == 0 {
            return Vec::new();
        }
        let mid = lo + 0.5 * (hi - lo);
        let mut out = Vec::new();

        let mut near = vec![mid; p];
        near[p - 1] = mid + NEAR_CONSTANT * (hi - lo);
        out.push(near);

        for position in [0, p - 1, p / 2] {
            let mut low_outlier = vec![hi; p];
            low_outlier[position] = lo;
            let mut high_outlier = vec![lo; p];
            high_outlier[position] = hi;
            out.push(low_outlier);
            out.push(high_outlier);
        }

        out.push((0..p).map(|i| if i % 2 == 0 { lo } else { hi }).collect());
        out.push((0..p).map(|i| if i % 2 == 0 { hi } else { lo }).collect());

        if p > 1 {
            let step = (hi - lo) / (p - 1) as f64;
            out.push((0..p).map(|i| (lo + step * i as f64).min(hi)).collect());
        }
        out.dedup();
        out
    }

    /// Returns exactly `count` vectors.
    pub fn draw(&self, count: usize) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = if self.stress {
            self.stress_vectors().into_iter().take(count).collect()
        } else {
            Vec::new()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let SampleBox { lo, hi } = self.sample_box;
        while out.len() < count {
            out.push((0..self.arity).map(|_| rng.random_range(lo..=hi)).collect());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_within_open_positive_axis() {
        let b = SampleBox::within(&Interval::positive());
        assert!(b.lo > 0.0);
        assert!(b.hi < 10.0 && b.hi > 9.9);
    }

    #[test]
    fn box_within_closed_interval_is_the_interval() {
        let b = SampleBox::within(&Interval::closed(0.0, 1.0).unwrap());
        assert_eq!(b, SampleBox { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn draw_is_deterministic_and_exact_length() {
        let s = Sampler::new(SampleBox::new(1.0, 2.0).unwrap(), 3, 7);
        let a = s.draw(50);
        let b = s.draw(50);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|v| v.len() == 3 && v.iter().all(|&x| (1.0..=2.0).contains(&x))));
        assert_ne!(a, Sampler::new(SampleBox::new(1.0, 2.0).unwrap(), 3, 8).draw(50));
    }

    #[test]
    fn stress_vectors_come_first() {
        let s = Sampler::new(SampleBox::new(0.0, 1.0).unwrap(), 2, 1);
        let stress = s.stress_vectors();
        assert_eq!(s.draw(3), stress[..3].to_vec());
        assert_eq!(s.draw(1).len(), 1);
        let plain = s.clone().uniform_only().draw(3);
        assert_ne!(plain[0], stress[0]);
    }

    #[test]
    fn rejects_bad_box() {
        assert!(SampleBox::new(1.0, 1.0).is_err());
        assert!(SampleBox::new(0.0, f64::INFINITY).is_err());
    }
}
