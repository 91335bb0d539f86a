//! Importance-sampling and plain Monte Carlo estimates of the bound
//! expectations.
//!
//! A path takes `m` steps; step `j` goes up with probability `θ_{block(j)}`
//! (the fixed per-block tilt) or `1/2` (plain Monte Carlo). Its contribution
//! is `∏ r(X_j, j) / p(X_j)` when the endpoint is at or below the threshold
//! and 0 otherwise. Everything is accumulated in log space with a running
//! maximum shift so that contributions near `10^70` are handled directly.
//!
//! Path `k` draws from its own ChaCha stream keyed by `(seed, k)`, so results
//! do not depend on how paths are spread across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{optimal_tilt, TiltProfile};
use crate::error::{Error, Result};
use crate::model::{ArraySpec, BoundKind, BoundTarget, GvVariant};
use crate::numeric::Scientific;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsConfig {
    pub samples: usize,
    pub seed: u64,
    pub target: BoundTarget,
    /// `false` samples fair coins (plain Monte Carlo).
    pub use_tilt: bool,
}

impl IsConfig {
    pub fn tilted(target: BoundTarget, samples: usize, seed: u64) -> Self {
        IsConfig {
            samples,
            seed,
            target,
            use_tilt: true,
        }
    }

    pub fn plain(target: BoundTarget, samples: usize, seed: u64) -> Self {
        IsConfig {
            use_tilt: false,
            ..IsConfig::tilted(target, samples, seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Is,
    Mc,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsResult {
    /// Natural log of the point estimate; `-inf` (null in JSON) when no path hit.
    #[serde(with = "finite_or_null")]
    pub log_estimate: f64,
    pub mantissa: f64,
    pub exponent10: i64,
    pub estimate: f64,
    pub std_error: f64,
    /// `std_error / 10^exponent10`.
    pub std_error_scaled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hit_fraction: f64,
    #[serde(with = "finite_or_null")]
    pub log_second_moment: f64,
    /// Standard error of `log_second_moment` (delta method).
    pub log_second_moment_se: f64,
    pub samples: usize,
    pub seed: u64,
    pub method: Method,
    pub kind: String,
    pub tilt: Option<TiltProfile>,
}

impl IsResult {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("IS result: {msg}")));
        if !(0.0..=1.0).contains(&self.hit_fraction) {
            return bad("hit_fraction outside [0, 1]");
        }
        if !(self.std_error >= 0.0) {
            return bad("negative std_error");
        }
        if !(self.ci_low <= self.estimate && self.estimate <= self.ci_high) {
            return bad("estimate outside its interval");
        }
        if self.samples < 2 {
            return bad("fewer than 2 samples");
        }
        Ok(())
    }
}

/// Streaming sufficient statistics of per-path contributions, stored relative
/// to the largest log-contribution seen so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accumulator {
    count: u64,
    hits: u64,
    shift: f64,
    sum: f64,
    sum_sq: f64,
    sum_quad: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator {
            count: 0,
            hits: 0,
            shift: f64::NEG_INFINITY,
            sum: 0.0,
            sum_sq: 0.0,
            sum_quad: 0.0,
        }
    }
}

impl Accumulator {
    /// Adds one path; `None` is a path that missed the event.
    pub fn push(&mut self, log_contribution: Option<f64>) {
        self.count += 1;
        let Some(l) = log_contribution else { return };
        self.hits += 1;
        if l > self.shift {
            self.rescale(l);
        }
        let y = (l - self.shift).exp();
        self.sum += y;
        self.sum_sq += y * y;
        self.sum_quad += (y * y) * (y * y);
    }

    fn rescale(&mut self, shift: f64) {
        if self.shift != f64::NEG_INFINITY {
            let f = (self.shift - shift).exp();
            self.sum *= f;
            self.sum_sq *= f * f;
            self.sum_quad *= (f * f) * (f * f);
        }
        self.shift = shift;
    }

    pub fn merge(&mut self, mut other: Accumulator) {
        let shift = self.shift.max(other.shift);
        if shift != f64::NEG_INFINITY {
            self.rescale(shift);
            other.rescale(shift);
        }
        self.count += other.count;
        self.hits += other.hits;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.sum_quad += other.sum_quad;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn summary(&self) -> Summary {
        let k = self.count as f64;
        if self.hits == 0 {
            return Summary {
                log_mean: f64::NEG_INFINITY,
                log_std_error: f64::NEG_INFINITY,
                log_second_moment: f64::NEG_INFINITY,
                log_second_moment_se: 0.0,
                hit_fraction: 0.0,
            };
        }
        let mean = self.sum / k;
        let var = ((self.sum_sq - self.sum * mean) / (k - 1.0)).max(0.0);
        let second = self.sum_sq / k;
        let var_sq = ((self.sum_quad - self.sum_sq * second) / (k - 1.0)).max(0.0);
        Summary {
            log_mean: self.shift + mean.ln(),
            log_std_error: self.shift + 0.5 * (var / k).ln(),
            log_second_moment: 2.0 * self.shift + second.ln(),
            log_second_moment_se: (var_sq / k).sqrt() / second,
            hit_fraction: self.hits as f64 / k,
        }
    }
}

/// Log-scale summary of an [`Accumulator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub log_mean: f64,
    pub log_std_error: f64,
    pub log_second_moment: f64,
    pub log_second_moment_se: f64,
    pub hit_fraction: f64,
}

/// One simulated path: final position and accumulated log-weight
/// `Σ log r(X_j, j) - log p(X_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub endpoint: usize,
    pub log_weight: f64,
}

/// Per-step sampling probabilities and log-weights for one target.
#[derive(Debug, Clone)]
pub struct PathSampler {
    up_probability: Vec<f64>,
    log_up: Vec<f64>,
    log_down: Vec<f64>,
    threshold: usize,
    log_prefactor: f64,
}

impl PathSampler {
    /// Samples step `j` up with the tilt's probability for `j`'s block.
    pub fn tilted(spec: &ArraySpec, target: &BoundTarget, tilt: &TiltProfile) -> Result<Self> {
        let m = target.horizon();
        let mut up_probability = Vec::with_capacity(m);
        let mut log_up = Vec::with_capacity(m);
        let mut log_down = Vec::with_capacity(m);
        for j in 1..=m {
            let theta = tilt.thetas[spec.block_of(j)? - 1];
            let cost = spec.running_cost(true, j)? as f64;
            up_probability.push(theta);
            log_up.push(cost.ln() - theta.ln());
            log_down.push(-(-theta).ln_1p());
        }
        Ok(PathSampler {
            up_probability,
            log_up,
            log_down,
            threshold: target.threshold(),
            log_prefactor: (target.prefactor() as f64).ln(),
        })
    }

    /// Fair-coin sampler: the weight of a path is `∏ 2 r(X_j, j)`.
    pub fn plain(spec: &ArraySpec, target: &BoundTarget) -> Result<Self> {
        let m = target.horizon();
        let log_up = (1..=m)
            .map(|j| Ok((2.0 * spec.running_cost(true, j)? as f64).ln()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathSampler {
            up_probability: vec![0.5; m],
            log_up,
            log_down: vec![std::f64::consts::LN_2; m],
            threshold: target.threshold(),
            log_prefactor: (target.prefactor() as f64).ln(),
        })
    }

    /// Independent generator for path `index` under `seed`.
    pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PathSample {
        let mut endpoint = 0;
        let mut log_weight = 0.0;
        for ((&p, &up), &down) in self.up_probability.iter().zip(&self.log_up).zip(&self.log_down) {
            if rng.random::<f64>() < p {
                endpoint += 1;
                log_weight += up;
            } else {
                log_weight += down;
            }
        }
        PathSample {
            endpoint,
            log_weight,
        }
    }

    /// Log of the path's estimator contribution, prefactor included.
    pub fn contribution(&self, path: &PathSample) -> Option<f64> {
        (path.endpoint <= self.threshold).then_some(path.log_weight + self.log_prefactor)
    }

    pub fn path_contribution(&self, seed: u64, index: u64) -> Option<f64> {
        self.contribution(&self.sample(&mut Self::path_rng(seed, index)))
    }

    /// Statistics of paths `indices` under `seed`.
    pub fn accumulate(&self, seed: u64, indices: std::ops::Range<u64>) -> Accumulator {
        let mut acc = Accumulator::default();
        for k in indices {
            acc.push(self.path_contribution(seed, k));
        }
        acc
    }
}

/// Log-weight every tilted path ending at `endpoint` carries:
/// `λ (endpoint - m) + Σ_{j ≤ m} log(e^λ + s_{block(j)} - 1)`.
pub fn weight_of_endpoint(
    spec: &ArraySpec,
    tilt: &TiltProfile,
    horizon: usize,
    endpoint: usize,
) -> Result<f64> {
    if horizon > spec.row_length() || endpoint > horizon {
        return Err(Error::OutOfDomain {
            name: "endpoint",
            value: endpoint as f64,
            domain: "[0, horizon]",
        });
    }
    let lambda = tilt.lambda_star;
    let costs = spec.step_costs();
    let per_step: f64 = costs[..horizon]
        .iter()
        .map(|&c| lambda + (c as f64 * (-lambda).exp()).ln_1p())
        .sum();
    Ok(per_step - lambda * horizon as f64 + lambda * endpoint as f64)
}

fn check_target(target: &BoundTarget) -> Result<()> {
    if target.kind() == BoundKind::GvSum {
        return Err(Error::UnsupportedTarget {
            operation: "is_estimate",
            kind: target.kind().name(),
        });
    }
    Ok(())
}

/// Runs `config.samples` paths and summarizes them.
pub fn is_estimate(spec: &ArraySpec, config: &IsConfig) -> Result<IsResult> {
    if config.samples < 2 {
        return Err(Error::TooFewSamples(config.samples));
    }
    check_target(&config.target)?;
    let (sampler, tilt, method) = if config.use_tilt {
        let tilt = optimal_tilt(spec, config.target.kind())?;
        let sampler = PathSampler::tilted(spec, &config.target, &tilt)?;
        (sampler, Some(tilt), Method::Is)
    } else {
        (PathSampler::plain(spec, &config.target)?, None, Method::Mc)
    };

    let seed = config.seed;
    let contributions: Vec<Option<f64>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|k| sampler.path_contribution(seed, k))
        .collect();
    let mut acc = Accumulator::default();
    for c in contributions {
        acc.push(c);
    }
    Ok(build_result(&acc.summary(), config, method, tilt))
}

fn build_result(
    summary: &Summary,
    config: &IsConfig,
    method: Method,
    tilt: Option<TiltProfile>,
) -> IsResult {
    let sci = Scientific::from_ln(summary.log_mean);
    let estimate = summary.log_mean.exp();
    let std_error = summary.log_std_error.exp();
    IsResult {
        log_estimate: summary.log_mean,
        mantissa: sci.mantissa,
        exponent10: sci.exponent,
        estimate,
        std_error,
        std_error_scaled: sci.rescale(std_error),
        ci_low: estimate - 2.0 * std_error,
        ci_high: estimate + 2.0 * std_error,
        hit_fraction: summary.hit_fraction,
        log_second_moment: summary.log_second_moment,
        log_second_moment_se: summary.log_second_moment_se,
        samples: config.samples,
        seed: config.seed,
        method,
        kind: config.target.label(),
        tilt,
    }
}

/// One row of the asymptotic-optimality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityRow {
    pub n: usize,
    /// `(1/n) log` of the empirical second moment.
    pub scaled_second_moment: f64,
    /// Standard error of `scaled_second_moment`.
    pub scaled_second_moment_se: f64,
    pub two_rate: f64,
    /// `scaled_second_moment - two_rate`.
    pub gap: f64,
    pub hit_fraction: f64,
}

/// Scales `shape` to each row length in `n_list` and compares the tilted
/// estimator's second-moment growth with `2 V(0, 0)`.
pub fn optimality_diagnostic(
    shape: &ArraySpec,
    kind: BoundKind,
    samples: usize,
    seed: u64,
    n_list: &[usize],
) -> Result<Vec<OptimalityRow>> {
    n_list
        .iter()
        .map(|&n| {
            let spec = shape.scaled_to(n)?;
            let target = match kind {
                BoundKind::RaoSum => BoundTarget::rao(&spec),
                _ => BoundTarget::gv_expectation(&spec, GvVariant::Full),
            };
            let result = is_estimate(&spec, &IsConfig::tilted(target, samples, seed))?;
            let two_rate = 2.0 * result.tilt.as_ref().map_or(0.0, |t| t.rate);
            let scaled = result.log_second_moment / n as f64;
            Ok(OptimalityRow {
                n,
                scaled_second_moment: scaled,
                scaled_second_moment_se: result.log_second_moment_se / n as f64,
                two_rate,
                gap: scaled - two_rate,
                hit_fraction: result.hit_fraction,
            })
        })
        .collect()
}
