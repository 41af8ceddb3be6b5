//! One-sample Kolmogorov-Smirnov statistic and critical values.

use crate::error::{Error, Result};

/// Largest sample size served from the exact table; above it the
/// asymptotic `c(alpha) / sqrt(n)` form is used.
pub const KS_TABLE_MAX_N: usize = 40;

/// Significance levels with tabulated critical values.
pub const SUPPORTED_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

/// Two-sided critical values `d` with `P(D_n > d) = alpha` for the exact
/// null distribution of `D_n`, n = 1..=40, rounded to 5 decimals.
const KS_TABLE: [[f64; KS_TABLE_MAX_N]; 3] = [
    // alpha = 0.10
    [
        0.95000, 0.77639, 0.63604, 0.56522, 0.50945, 0.46799, 0.43607, 0.40962, 0.38746, 0.36866,
        0.35242, 0.33815, 0.32549, 0.31417, 0.30397, 0.29472, 0.28627, 0.27851, 0.27135, 0.26473,
        0.25857, 0.25283, 0.24746, 0.24242, 0.23767, 0.23320, 0.22897, 0.22497, 0.22117, 0.21756,
        0.21412, 0.21084, 0.20771, 0.20471, 0.20185, 0.19910, 0.19646, 0.19392, 0.19148, 0.18913,
    ],
    // alpha = 0.05
    [
        0.97500, 0.84189, 0.70760, 0.62394, 0.56328, 0.51926, 0.48342, 0.45427, 0.43001, 0.40925,
        0.39122, 0.37543, 0.36143, 0.34890, 0.33760, 0.32733, 0.31796, 0.30936, 0.30143, 0.29408,
        0.28724, 0.28087, 0.27490, 0.26931, 0.26404, 0.25907, 0.25438, 0.24993, 0.24571, 0.24170,
        0.23788, 0.23424, 0.23076, 0.22743, 0.22425, 0.22119, 0.21826, 0.21544, 0.21273, 0.21012,
    ],
    // alpha = 0.01
    [
        0.99500, 0.92929, 0.82900, 0.73424, 0.66853, 0.61661, 0.57581, 0.54179, 0.51332, 0.48893,
        0.46770, 0.44905, 0.43247, 0.41762, 0.40420, 0.39201, 0.38086, 0.37062, 0.36117, 0.35241,
        0.34426, 0.33666, 0.32954, 0.32286, 0.31657, 0.31063, 0.30502, 0.29971, 0.29466, 0.28986,
        0.28529, 0.28094, 0.27677, 0.27279, 0.26897, 0.26532, 0.26180, 0.25843, 0.25518, 0.25205,
    ],
];

/// Asymptotic coefficients `c(alpha)` matching [`SUPPORTED_ALPHAS`].
const KS_ASYMPTOTIC: [f64; 3] = [1.224, 1.358, 1.628];

/// `D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)` over the sorted
/// sample. Ties need no special handling: the extreme ranks of a tied run
/// carry the largest gaps.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "K-S statistic of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .fold(0.0, |d: f64, (i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            d.max(above).max(below)
        })
        .clamp(0.0, 1.0)
}

fn alpha_row(alpha: f64) -> Result<usize> {
    SUPPORTED_ALPHAS
        .iter()
        .position(|a| (a - alpha).abs() < 1e-12)
        .ok_or_else(|| {
            Error::Domain(format!(
                "alpha {alpha} has no tabulated K-S critical value (supported: 0.10, 0.05, 0.01)"
            ))
        })
}

/// Critical value of `D_n` at significance `alpha`: reject when `D` exceeds it.
pub fn ks_critical_value(n: usize, alpha: f64) -> Result<f64> {
    let row = alpha_row(alpha)?;
    if n == 0 {
        return Err(Error::Domain("K-S critical value needs n >= 1".into()));
    }
    if n <= KS_TABLE_MAX_N {
        Ok(KS_TABLE[row][n - 1])
    } else {
        Ok(KS_ASYMPTOTIC[row] / (n as f64).sqrt())
    }
}

/// Validates `alpha` against the table without a sample size.
pub fn check_alpha(alpha: f64) -> Result<()> {
    alpha_row(alpha).map(|_| ())
}
