//! Experiment drivers: decoder ablation on a synthetic graph signal,
//! unsupervised graph classification, and social recommendation.

pub mod classify;
pub mod reconstruct;
pub mod recsys;
pub mod synthetic;

pub use classify::{classify_eval, ClassifyOptions};
pub use reconstruct::{reconstruct_demo, ReconstructOptions, ReconstructOutcome};
pub use recsys::{ils, ils_naive, inject_noise, recsys_run, Rating, RatingData, RecsysOptions, RecsysOutcome};

use crate::error::{Error, Result};

/// Named metrics, optional per-fold or per-seed series, and the seeds used.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub metrics: Vec<(String, f64)>,
    pub per_fold: Vec<(String, Vec<f64>)>,
    pub seeds: Vec<u64>,
}

impl EvalReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    pub fn push_series(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.per_fold.push((name.into(), values));
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.per_fold.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        let bad = self
            .metrics
            .iter()
            .map(|(n, v)| (n, std::slice::from_ref(v)))
            .chain(self.per_fold.iter().map(|(n, v)| (n, v.as_slice())))
            .find(|(_, vs)| vs.iter().any(|v| !v.is_finite()));
        match bad {
            Some((name, _)) => Err(Error::Data(format!("metric {name} is not finite"))),
            None => Ok(()),
        }
    }

    /// One line, `name=value` pairs.
    pub fn summary(&self) -> String {
        self.metrics
            .iter()
            .map(|(n, v)| format!("{n}={}", crate::io::format_sig6(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_std() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }

    #[test]
    fn non_finite_metrics_are_rejected() {
        let mut r = EvalReport::default();
        r.push("rmse", 0.5);
        assert!(r.ensure_finite().is_ok());
        r.push_series("fold", vec![1.0, f64::NAN]);
        assert!(r.ensure_finite().is_err());
        assert_eq!(r.summary(), "rmse=0.5");
    }
}
