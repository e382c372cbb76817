//! Max-over-samples reductions used by the residual and uniqueness probes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct MaxReport {
    pub samples: usize,
    /// Largest value of the probed quantity; `0.0` when no sample evaluated.
    pub max: f64,
    /// Sample index and vector attaining `max`.
    pub argmax: Option<(usize, Vec<f64>)>,
    pub errors: Vec<(usize, String)>,
}

impl MaxReport {
    pub fn evaluated(&self) -> usize {
        self.samples - self.errors.len()
    }
}

/// Evaluates `f` on every sample in parallel and reduces in sample order,
/// so the result does not depend on scheduling. NaN counts as an error.
pub fn max_over<F>(samples: &[Vec<f64>], f: F) -> MaxReport
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let values: Vec<Result<f64>> = samples.par_iter().map(|v| f(v)).collect();
    reduce_max(samples, values)
}

/// Folds per-sample values (aligned with `samples`) into a [`MaxReport`].
pub fn reduce_max(samples: &[Vec<f64>], values: Vec<Result<f64>>) -> MaxReport {
    let mut report = MaxReport {
        samples: samples.len(),
        max: 0.0,
        argmax: None,
        errors: Vec::new(),
    };
    for (i, value) in values.into_iter().enumerate() {
        match value {
            Ok(x) if x.is_nan() => report.errors.push((i, "evaluated to NaN".into())),
            Ok(x) => {
                if report.argmax.is_none() || x > report.max {
                    report.max = x;
                    report.argmax = Some((i, samples[i].clone()));
                }
            }
            Err(e) => report.errors.push((i, e.to_string())),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn reduces_in_sample_order() {
        let samples = vec![vec![1.0], vec![3.0], vec![-1.0], vec![3.0]];
        let r = max_over(&samples, |v| {
            if v[0] < 0.0 {
                Err(Error::EmptyVector)
            } else {
                Ok(v[0])
            }
        });
        assert_eq!(r.max, 3.0);
        assert_eq!(r.argmax, Some((1, vec![3.0])));
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].0, 2);
        assert_eq!(r.evaluated(), 3);
    }
}
