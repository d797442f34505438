//! Small summary statistics over score samples.

use statrs::statistics::{Data, Median, OrderStatistics, Statistics};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().mean()
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    Data::new(xs.to_vec()).median()
}

/// Percentile `p` in [0, 100].
pub fn percentile(xs: &[f64], p: usize) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    Data::new(xs.to_vec()).percentile(p)
}

/// Tukey fences `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`.
pub fn tukey_fences(xs: &[f64]) -> (f64, f64) {
    let mut d = Data::new(xs.to_vec());
    let (q1, q3) = (d.lower_quartile(), d.upper_quartile());
    let iqr = q3 - q1;
    (q1 - 1.5 * iqr, q3 + 1.5 * iqr)
}
