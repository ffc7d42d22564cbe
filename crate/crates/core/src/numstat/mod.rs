//! Numeric t-tests for running programs on real data.
//!
//! Nothing here feeds the verifier; verdicts never depend on floating point.

mod demo;

pub use demo::{load_csv, run_demo, DemoLine, DemoReport};

use num_traits::Float;
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::specs::Alternative;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("sample has zero variance")]
    DegenerateSample,
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("degrees of freedom must be at least 1")]
    InvalidDF,
    #[error("no data bound to dataset `{0}`")]
    UnboundDataset(String),
    #[error("{0}: numeric engine not implemented")]
    NotImplemented(String),
    #[error("paired samples have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("data file: {0}")]
    Data(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats<F> {
    pub n: usize,
    pub mean: F,
    /// Sample standard deviation, divisor `n - 1`.
    pub sd: F,
}

fn cast<F: Float>(x: usize) -> F {
    F::from(x).expect("count fits in a float")
}

pub fn sample_stats<F: Float>(y: &[F]) -> Result<SampleStats<F>, NumError> {
    let n = y.len();
    if n < 2 {
        return Err(NumError::TooFewObservations(n));
    }
    let mean = y.iter().fold(F::zero(), |a, &b| a + b) / cast(n);
    let ss = y.iter().fold(F::zero(), |a, &b| a + (b - mean) * (b - mean));
    Ok(SampleStats {
        n,
        mean,
        sd: (ss / cast(n - 1)).sqrt(),
    })
}

/// `(mean(y) - mu0) / (s / sqrt(n))`.
pub fn t_statistic<F: Float>(y: &[F], mu0: F) -> Result<F, NumError> {
    let s = sample_stats(y)?;
    if s.sd == F::zero() {
        return Err(NumError::DegenerateSample);
    }
    Ok((s.mean - mu0) / (s.sd / cast::<F>(s.n).sqrt()))
}

/// Pooled-variance two-sample statistic and its degrees of freedom.
pub fn t_statistic_pooled<F: Float>(y1: &[F], y2: &[F]) -> Result<(F, u64), NumError> {
    let a = sample_stats(y1)?;
    let b = sample_stats(y2)?;
    let df = a.n + b.n - 2;
    let pooled = ((cast::<F>(a.n - 1)) * a.sd * a.sd + cast::<F>(b.n - 1) * b.sd * b.sd) / cast(df);
    if pooled == F::zero() {
        return Err(NumError::DegenerateSample);
    }
    let se = (pooled * (F::one() / cast(a.n) + F::one() / cast(b.n))).sqrt();
    Ok(((a.mean - b.mean) / se, df as u64))
}

/// Statistic of the differences `y1 - y2`.
pub fn t_statistic_paired<F: Float>(y1: &[F], y2: &[F]) -> Result<(F, u64), NumError> {
    if y1.len() != y2.len() {
        return Err(NumError::LengthMismatch(y1.len(), y2.len()));
    }
    let d: Vec<F> = y1.iter().zip(y2).map(|(&a, &b)| a - b).collect();
    Ok((t_statistic(&d, F::zero())?, d.len() as u64 - 1))
}

/// `Pr[|T| > |t|]` for Student's t with `df` degrees of freedom, through
/// the regularized incomplete beta `I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn t_two_sided_pvalue<F: Float>(t: F, df: u64) -> Result<F, NumError> {
    if df < 1 {
        return Err(NumError::InvalidDF);
    }
    let t = t.to_f64().unwrap_or(f64::NAN).abs();
    if t == 0.0 {
        return Ok(F::one());
    }
    if t.is_infinite() {
        return Ok(F::zero());
    }
    let v = df as f64;
    let x = v / (v + t * t);
    let p = beta_reg(v / 2.0, 0.5, x).clamp(0.0, 1.0);
    Ok(F::from(p).unwrap_or_else(F::nan))
}

/// p-value for the tail an alternative selects.
pub fn t_pvalue<F: Float>(t: F, df: u64, alt: Alternative) -> Result<F, NumError> {
    let two = t_two_sided_pvalue(t, df)?;
    let half = two / (F::one() + F::one());
    Ok(match alt {
        Alternative::Two => two,
        Alternative::Up if t > F::zero() => half,
        Alternative::Up => F::one() - half,
        Alternative::Low if t < F::zero() => half,
        Alternative::Low => F::one() - half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degenerate_sample() {
        assert_eq!(t_statistic(&[1.0, 1.0, 1.0], 1.0), Err(NumError::DegenerateSample));
    }

    #[test]
    fn mean_at_mu0_gives_zero() {
        let s = sample_stats(&[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(s.sd, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(t_statistic(&[0.0, 2.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn five_points() {
        let t = t_statistic(&[1.0, 2.0, 3.0, 4.0, 5.0], 2.0).unwrap();
        assert_abs_diff_eq!(t, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let t: f32 = t_statistic(&[1.0f32, 2.0, 3.0, 4.0, 5.0], 2.0).unwrap();
        assert!((t - 2f32.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn zero_statistic_is_one() {
        for df in [1, 2, 7, 1000] {
            assert_eq!(t_two_sided_pvalue(0.0, df).unwrap(), 1.0);
        }
    }

    #[test]
    fn cauchy_closed_form() {
        // df = 1 is Cauchy: two-sided p = 1 - 2 atan(t) / pi.
        for t in [0.3f64, 1.0, 2.5, 10.0] {
            let exact = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert_abs_diff_eq!(t_two_sided_pvalue(t, 1).unwrap(), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn tail_limit_and_bad_df() {
        assert!(t_two_sided_pvalue(1e8, 5).unwrap() < 1e-30);
        assert_eq!(t_two_sided_pvalue(f64::INFINITY, 5).unwrap(), 0.0);
        assert_eq!(t_two_sided_pvalue(1.0, 0), Err(NumError::InvalidDF));
    }

    #[test]
    fn one_sided_halves() {
        let two = t_two_sided_pvalue(2.0, 9).unwrap();
        assert_abs_diff_eq!(t_pvalue(2.0, 9, Alternative::Up).unwrap(), two / 2.0);
        assert_abs_diff_eq!(t_pvalue(2.0, 9, Alternative::Low).unwrap(), 1.0 - two / 2.0);
        assert_abs_diff_eq!(t_pvalue(0.0, 9, Alternative::Up).unwrap(), 0.5);
    }

    #[test]
    fn pooled_matches_hand_computation() {
        // means 2 and 5, both variances 1, n = 3 each: se = sqrt(2/3)
        let (t, df) = t_statistic_pooled(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(df, 4);
        assert_abs_diff_eq!(t, -3.0 / (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
    }
}
