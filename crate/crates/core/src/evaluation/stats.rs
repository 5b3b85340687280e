use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::EvalError;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub t: f64,
    pub df: usize,
    pub p_value: f64,
    pub significant: bool,
}

impl SignificanceResult {
    /// Significant at the 5% level with the first sample having the larger mean.
    pub fn better(&self) -> bool {
        self.significant && self.t > 0.0
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn student_t_p_value(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Unpaired two-sample t-test with pooled variance.
pub fn t_test(a: &[f64], b: &[f64]) -> Result<SignificanceResult, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::InsufficientRuns(a.len().min(b.len())));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let df = a.len() + b.len() - 2;
    let (m1, m2) = (mean(a), mean(b));
    let ss = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    let pooled = (ss(a, m1) + ss(b, m2)) / df as f64;
    let (t, p_value) = if pooled == 0.0 {
        if m1 == m2 {
            (0.0, 1.0)
        } else {
            log::warn!("t-test with zero pooled variance and unequal means; reporting p = 0");
            ((m1 - m2).signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = (m1 - m2) / (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
        (t, student_t_p_value(t, df as f64))
    };
    Ok(SignificanceResult { t, df, p_value, significant: p_value < SIGNIFICANCE_LEVEL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs() {
        let r = t_test(&[0.5, 0.6, 0.7], &[0.5, 0.6, 0.7]).unwrap();
        assert_eq!((r.t, r.p_value, r.df), (0.0, 1.0, 4));
    }

    #[test]
    fn constant_unequal_samples() {
        let r = t_test(&[0.6, 0.6], &[0.5, 0.5]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.t.is_infinite() && r.t > 0.0 && r.better());
    }

    #[test]
    fn too_few_runs() {
        assert!(matches!(t_test(&[0.5], &[0.5, 0.6]), Err(EvalError::InsufficientRuns(1))));
    }

    #[test]
    fn std_of_short_lists() {
        assert_eq!(sample_std(&[0.3]), 0.0);
        assert!((sample_std(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
