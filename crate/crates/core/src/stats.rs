//! Small numeric helpers shared by tabulation and the Moran statistics.

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Mean and population variance (n denominator), two passes.
pub fn mean_and_population_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    (mean, var)
}

/// Z-scores using the population standard deviation.
pub fn population_zscores(values: &[f64], what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cannot standardize an empty field"));
    }
    let (mean, var) = mean_and_population_variance(values);
    let sd = var.sqrt();
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(sd.is_finite() && sd > 16.0 * f64::EPSILON * scale) {
        return Err(Error::ConstantField(format!("{what} has zero variance")));
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}
