use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Candidate distribution families for RSS samples.
///
/// The shifted families live on the positive axis, so samples are mapped
/// through `y = anchor - x` with `anchor = max(x) + 1` before fitting; every
/// sample lands at `y >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionFamily {
    Normal,
    Logistic,
    LognormalShifted,
    WeibullShifted,
}

impl DistributionFamily {
    pub const ALL: [DistributionFamily; 4] = [
        DistributionFamily::Normal,
        DistributionFamily::Logistic,
        DistributionFamily::LognormalShifted,
        DistributionFamily::WeibullShifted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionFamily::Normal => "normal",
            DistributionFamily::Logistic => "logistic",
            DistributionFamily::LognormalShifted => "lognormal_shifted",
            DistributionFamily::WeibullShifted => "weibull_shifted",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            DistributionFamily::Normal | DistributionFamily::Logistic => 2,
            DistributionFamily::LognormalShifted | DistributionFamily::WeibullShifted => 3,
        }
    }
}

impl fmt::Display for DistributionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(DistributionFamily::Normal),
            "logistic" => Ok(DistributionFamily::Logistic),
            "lognormal" | "lognormal_shifted" => Ok(DistributionFamily::LognormalShifted),
            "weibull" | "weibull_shifted" => Ok(DistributionFamily::WeibullShifted),
            other => Err(Error::Config(format!(
                "unknown distribution family `{other}`"
            ))),
        }
    }
}

/// A member of one of the candidate families with concrete parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    Normal {
        mean: f64,
        stdev: f64,
    },
    Logistic {
        location: f64,
        scale: f64,
    },
    /// `anchor - X` is log-normal with log-mean `mu` and log-stdev `sigma`.
    LognormalShifted {
        anchor: f64,
        mu: f64,
        sigma: f64,
    },
    /// `anchor - X` is Weibull with the given shape and scale.
    WeibullShifted {
        anchor: f64,
        shape: f64,
        scale: f64,
    },
}

impl Distribution {
    pub fn family(&self) -> DistributionFamily {
        match self {
            Distribution::Normal { .. } => DistributionFamily::Normal,
            Distribution::Logistic { .. } => DistributionFamily::Logistic,
            Distribution::LognormalShifted { .. } => DistributionFamily::LognormalShifted,
            Distribution::WeibullShifted { .. } => DistributionFamily::WeibullShifted,
        }
    }

    /// Parameter vector: location/scale first, with the shift anchor leading
    /// for the shifted families.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Distribution::Normal { mean, stdev } => vec![mean, stdev],
            Distribution::Logistic { location, scale } => vec![location, scale],
            Distribution::LognormalShifted { anchor, mu, sigma } => vec![anchor, mu, sigma],
            Distribution::WeibullShifted {
                anchor,
                shape,
                scale,
            } => vec![anchor, shape, scale],
        }
    }

    pub fn from_params(family: DistributionFamily, params: &[f64]) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(Error::Validation(format!(
                "{family} takes {} parameters, got {}",
                family.param_count(),
                params.len()
            )));
        }
        let dist = match family {
            DistributionFamily::Normal => Distribution::Normal {
                mean: params[0],
                stdev: params[1],
            },
            DistributionFamily::Logistic => Distribution::Logistic {
                location: params[0],
                scale: params[1],
            },
            DistributionFamily::LognormalShifted => Distribution::LognormalShifted {
                anchor: params[0],
                mu: params[1],
                sigma: params[2],
            },
            DistributionFamily::WeibullShifted => Distribution::WeibullShifted {
                anchor: params[0],
                shape: params[1],
                scale: params[2],
            },
        };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params();
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation(format!(
                "{} parameters must be finite: {params:?}",
                self.family()
            )));
        }
        let positive = match *self {
            Distribution::Normal { stdev, .. } => stdev > 0.0,
            Distribution::Logistic { scale, .. } => scale > 0.0,
            Distribution::LognormalShifted { sigma, .. } => sigma > 0.0,
            Distribution::WeibullShifted { shape, scale, .. } => shape > 0.0 && scale > 0.0,
        };
        if !positive {
            return Err(Error::Validation(format!(
                "{} scale/shape parameters must be positive: {params:?}",
                self.family()
            )));
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, stdev } => {
                let z = (x - mean) / stdev;
                (-0.5 * z * z).exp() / (stdev * SQRT_2PI)
            }
            Distribution::Logistic { location, scale } => {
                let e = (-((x - location) / scale).abs()).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            Distribution::LognormalShifted { anchor, mu, sigma } => {
                let y = anchor - x;
                if y <= 0.0 {
                    return 0.0;
                }
                let z = (y.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (y * sigma * SQRT_2PI)
            }
            Distribution::WeibullShifted {
                anchor,
                shape,
                scale,
            } => {
                let y = anchor - x;
                if y <= 0.0 {
                    return 0.0;
                }
                let r = y / scale;
                shape / scale * r.powf(shape - 1.0) * (-r.powf(shape)).exp()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, stdev } => 0.5 * erfc(-(x - mean) / (stdev * SQRT_2)),
            Distribution::Logistic { location, scale } => {
                let z = (x - location) / scale;
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            // P(X <= x) = P(Y >= anchor - x)
            Distribution::LognormalShifted { anchor, mu, sigma } => {
                let y = anchor - x;
                if y <= 0.0 {
                    return 1.0;
                }
                0.5 * erfc((y.ln() - mu) / (sigma * SQRT_2))
            }
            Distribution::WeibullShifted {
                anchor,
                shape,
                scale,
            } => {
                let y = anchor - x;
                if y <= 0.0 {
                    return 1.0;
                }
                (-(y / scale).powf(shape)).exp()
            }
        }
    }

    /// `(pdf, cdf)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        (self.pdf(x), self.cdf(x))
    }
}

/// Estimates the parameters of `family` from `samples`.
///
/// Normal uses the sample mean and the unbiased standard deviation; Logistic
/// matches the same two moments (`scale = stdev * sqrt(3) / pi`); the shifted
/// families use maximum likelihood on `anchor - x`.
pub fn estimate_params(family: DistributionFamily, samples: &[f64]) -> Result<Distribution> {
    if samples.len() < 2 {
        return Err(Error::Domain(format!(
            "estimating {family} needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let dist = match family {
        DistributionFamily::Normal => {
            let (mean, stdev) = mean_stdev(samples)?;
            Distribution::Normal { mean, stdev }
        }
        DistributionFamily::Logistic => {
            let (mean, stdev) = mean_stdev(samples)?;
            Distribution::Logistic {
                location: mean,
                scale: stdev * 3f64.sqrt() / PI,
            }
        }
        DistributionFamily::LognormalShifted => {
            let anchor = shift_anchor(samples);
            let logs: Vec<f64> = samples.iter().map(|x| (anchor - x).ln()).collect();
            let n = logs.len() as f64;
            let mu = logs.iter().sum::<f64>() / n;
            let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n;
            if var.is_nan() || var <= 0.0 {
                return Err(Error::DegenerateFit(
                    "zero variance of log-shifted samples".into(),
                ));
            }
            Distribution::LognormalShifted {
                anchor,
                mu,
                sigma: var.sqrt(),
            }
        }
        DistributionFamily::WeibullShifted => {
            let anchor = shift_anchor(samples);
            let ys: Vec<f64> = samples.iter().map(|x| anchor - x).collect();
            let (shape, scale) = weibull_mle(&ys)?;
            Distribution::WeibullShifted {
                anchor,
                shape,
                scale,
            }
        }
    };
    dist.validate()
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    Ok(dist)
}

/// Sample mean and unbiased standard deviation; zero spread is degenerate.
pub(crate) fn mean_stdev(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let stdev = (ss / (n - 1.0)).sqrt();
    if stdev.is_nan() || stdev <= 1e-12 * mean.abs().max(1.0) {
        return Err(Error::DegenerateFit(format!(
            "zero sample variance (all samples near {mean})"
        )));
    }
    Ok((mean, stdev))
}

fn shift_anchor(samples: &[f64]) -> f64 {
    samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0
}

/// Two-parameter Weibull maximum likelihood for positive data.
///
/// The shape solves `sum(y^k ln y) / sum(y^k) - 1/k - mean(ln y) = 0`, whose
/// left side increases in `k`; it is bracketed and bisected on data scaled to
/// `(0, 1]`, which leaves the shape unchanged.
fn weibull_mle(ys: &[f64]) -> Result<(f64, f64)> {
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let logs: Vec<f64> = ys.iter().map(|y| (y / ymax).ln()).collect();
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;
    if mean_log.is_nan() || mean_log >= -1e-12 {
        return Err(Error::DegenerateFit(
            "zero spread of shifted samples".into(),
        ));
    }
    let score = |k: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for &l in &logs {
            let w = (k * l).exp();
            num += w * l;
            den += w;
        }
        num / den - 1.0 / k - mean_log
    };
    let mut lo = 1e-3;
    while score(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::DegenerateFit("Weibull shape below bracket".into()));
        }
    }
    let mut hi = 1.0;
    while score(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::DegenerateFit("Weibull shape above bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let shape = 0.5 * (lo + hi);
    let mean_pow = logs.iter().map(|l| (shape * l).exp()).sum::<f64>() / n;
    let scale = ymax * mean_pow.powf(1.0 / shape);
    Ok((shape, scale))
}
