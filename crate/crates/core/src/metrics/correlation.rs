//! Pearson correlation with t-distribution p-values, and the
//! camera-installation factor analysis built on it.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::MetricsError;
use crate::geometry::GeometryFactors;

/// Sample Pearson correlation and its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Computes the sample Pearson correlation of `xs` and `ys` and the
/// two-sided p-value from the t-distribution with `n - 2` degrees of
/// freedom.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<Correlation, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricsError::TooFewSamples { needed: 3, got: n });
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    let df = nf - 2.0;
    let one_minus_r2 = 1.0 - r * r;
    let p = if one_minus_r2 <= 0.0 {
        0.0
    } else {
        let t = r.abs() * (df / one_minus_r2).sqrt();
        student_t_two_sided_p(t, df)
    };
    Ok(Correlation { r, p, n })
}

/// Two-sided tail probability of the t-distribution:
/// `P(|T| >= t) = I_{df / (df + t^2)}(df / 2, 1 / 2)`.
fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Lanczos approximation of `ln |Gamma(x)|` for positive arguments.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection formula
        return core::f64::consts::PI.ln() - (core::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * core::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function `I_x(a, b)` via Lentz's continued
/// fraction, using the symmetry relation for fast convergence.
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// One localized view sample with its measured errors, for the
/// camera-installation analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSample {
    pub factors: GeometryFactors,
    /// Euclidean localization error against ground truth, meters.
    pub loc_err_m: f64,
    /// Angular orientation error, degrees; absent when the view carried no
    /// orientation estimate.
    pub ori_err_deg: Option<f64>,
}

/// Correlations of one installation factor against both error kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCorrelation {
    pub factor: &'static str,
    pub localization: Correlation,
    /// Absent when no sample carried an orientation error.
    pub orientation: Option<Correlation>,
}

/// Full factor analysis output.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorAnalysis {
    pub factors: Vec<FactorCorrelation>,
    pub samples: usize,
}

pub const FACTOR_NAMES: [&str; 4] = ["distance", "facing_angle", "h_norm", "v_norm"];

/// Correlates each of the four installation factors against localization
/// and orientation errors.
pub fn factor_analysis(samples: &[FactorSample]) -> Result<FactorAnalysis, MetricsError> {
    if samples.len() < 3 {
        return Err(MetricsError::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let value_of = |s: &GeometryFactors, name: &str| -> f64 {
        match name {
            "distance" => s.distance,
            "facing_angle" => s.facing_angle_deg,
            "h_norm" => s.h_norm,
            "v_norm" => s.v_norm,
            _ => unreachable!(),
        }
    };
    let mut factors = Vec::with_capacity(4);
    for name in FACTOR_NAMES {
        let xs: Vec<f64> = samples.iter().map(|s| value_of(&s.factors, name)).collect();
        let loc: Vec<f64> = samples.iter().map(|s| s.loc_err_m).collect();
        let localization = pearson_r(&xs, &loc)?;

        let with_ori: Vec<(f64, f64)> = samples
            .iter()
            .filter_map(|s| s.ori_err_deg.map(|e| (value_of(&s.factors, name), e)))
            .collect();
        let orientation = if with_ori.is_empty() {
            None
        } else {
            let (fx, fe): (Vec<f64>, Vec<f64>) = with_ori.into_iter().unzip();
            Some(pearson_r(&fx, &fe)?)
        };
        factors.push(FactorCorrelation {
            factor: name,
            localization,
            orientation,
        });
    }
    Ok(FactorAnalysis {
        factors,
        samples: samples.len(),
    })
}
