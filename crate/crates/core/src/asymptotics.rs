//! Exponential growth rates of the bounds.
//!
//! As `n → ∞` with `t = μ n` and `l_i = a_i n`, `(1/n) log` of a bound tends
//! to the value of the concave program
//!
//! ```text
//! sup Σ a_i (θ_i log(s_i - 1) + H(θ_i))   subject to  Σ a_i θ_i ≤ budget
//! ```
//!
//! with `budget = μ/2` for the Rao bound and `μ` for the GV bound. The
//! unconstrained maximizer is `θ_i = (s_i - 1)/s_i`; otherwise a Lagrange
//! multiplier `λ > 0` gives `θ_i = (s_i - 1)/(e^λ + s_i - 1)` and is fixed by
//! the budget equation, whose left side is strictly decreasing in `λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::log_tail_grid;
use crate::model::{ArraySpec, BoundKind, BoundTarget, GvVariant};
use crate::numeric::Scientific;

const THETA_CLAMP: f64 = 1e-15;
const MAX_BISECTIONS: usize = 200;

/// `-θ log θ - (1 - θ) log(1 - θ)`, natural log, with `H(0) = H(1) = 0`.
pub fn entropy(theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::OutOfDomain {
            name: "theta",
            value: theta,
            domain: "[0, 1]",
        });
    }
    Ok(entropy_unchecked(theta))
}

fn entropy_unchecked(theta: f64) -> f64 {
    let xlogx = |p: f64| if p <= 0.0 { 0.0 } else { p * p.ln() };
    -xlogx(theta) - xlogx(1.0 - theta)
}

/// Per-block contribution `θ log(s - 1) + H(θ)`.
fn block_payoff(s: u64, theta: f64) -> f64 {
    let theta = theta.clamp(THETA_CLAMP, 1.0 - THETA_CLAMP);
    theta * ((s - 1) as f64).ln() + entropy_unchecked(theta)
}

/// `(s - 1)/(e^λ + s - 1)`, stable for large `λ`.
pub fn tilted_probability(s: u64, lambda: f64) -> f64 {
    let c = (s - 1) as f64;
    let r = c * (-lambda).exp();
    r / (1.0 + r)
}

/// Optimal per-block up-probabilities and the resulting growth rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltProfile {
    pub lambda_star: f64,
    pub thetas: Vec<f64>,
    /// Growth rate in nats per step.
    pub rate: f64,
    pub budget: f64,
    pub constrained: bool,
}

impl TiltProfile {
    /// Checks the profile's internal consistency against a shape.
    pub fn validate(&self, fractions: &[f64], alphabet_sizes: &[u64]) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(format!("tilt profile: {msg}")));
        if self.thetas.len() != alphabet_sizes.len() || fractions.len() != alphabet_sizes.len() {
            return bad("block count mismatch".into());
        }
        if !(self.lambda_star >= 0.0) {
            return bad(format!("lambda_star {} is negative", self.lambda_star));
        }
        for (&theta, &s) in self.thetas.iter().zip(alphabet_sizes) {
            let expected = tilted_probability(s, self.lambda_star);
            if (theta - expected).abs() > 1e-12 {
                return bad(format!("theta {theta} does not match lambda_star"));
            }
        }
        let load: f64 = fractions.iter().zip(&self.thetas).map(|(a, t)| a * t).sum();
        if self.constrained && (load - self.budget).abs() > 1e-10 {
            return bad(format!("binding constraint has load {load} != {}", self.budget));
        }
        if !self.constrained && (self.lambda_star != 0.0 || load > self.budget + 1e-12) {
            return bad("slack constraint with nonzero multiplier".into());
        }
        if self.rate < 0.0 {
            return bad(format!("negative rate {}", self.rate));
        }
        Ok(())
    }
}

/// The weighted program `sup Σ w_i (θ_i log(s_i - 1) + H(θ_i))` subject to
/// `Σ w_i θ_i ≤ capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProgram {
    weights: Vec<f64>,
    alphabet_sizes: Vec<u64>,
}

impl RateProgram {
    pub fn new(weights: Vec<f64>, alphabet_sizes: Vec<u64>) -> Self {
        assert_eq!(weights.len(), alphabet_sizes.len());
        RateProgram {
            weights,
            alphabet_sizes,
        }
    }

    pub fn for_spec(spec: &ArraySpec) -> Self {
        RateProgram::new(spec.scaled().fractions, spec.alphabet_sizes().to_vec())
    }

    /// `Σ w_i (s_i - 1)/(e^λ + s_i - 1)`.
    pub fn load(&self, lambda: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.alphabet_sizes)
            .map(|(w, &s)| w * tilted_probability(s, lambda))
            .sum()
    }

    /// Load of the unconstrained maximizer.
    pub fn free_load(&self) -> f64 {
        self.load(0.0)
    }

    pub fn objective(&self, thetas: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.alphabet_sizes)
            .zip(thetas)
            .map(|((w, &s), &theta)| w * block_payoff(s, theta))
            .sum()
    }

    /// Unique `λ > 0` with `load(λ) = capacity`, or 0 when the unconstrained
    /// maximizer already fits. Requires `capacity > 0`.
    fn multiplier(&self, capacity: f64) -> f64 {
        debug_assert!(capacity > 0.0);
        if self.free_load() <= capacity {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.load(hi) >= capacity {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.load(mid) > capacity {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (r_lo, r_hi) = (self.load(lo) - capacity, self.load(hi) - capacity);
        if r_lo.abs() < r_hi.abs() {
            lo
        } else {
            hi
        }
    }

    /// Solves the program at the given capacity.
    pub fn solve(&self, capacity: f64) -> TiltProfile {
        if capacity <= 0.0 {
            return TiltProfile {
                lambda_star: f64::INFINITY,
                thetas: vec![0.0; self.alphabet_sizes.len()],
                rate: 0.0,
                budget: capacity,
                constrained: true,
            };
        }
        let lambda = self.multiplier(capacity);
        let thetas: Vec<f64> = self
            .alphabet_sizes
            .iter()
            .map(|&s| tilted_probability(s, lambda))
            .collect();
        let rate = if lambda == 0.0 {
            // θ = (s - 1)/s gives exactly log s per unit weight
            self.weights
                .iter()
                .zip(&self.alphabet_sizes)
                .map(|(w, &s)| w * (s as f64).ln())
                .sum()
        } else {
            self.objective(&thetas)
        };
        TiltProfile {
            lambda_star: lambda,
            thetas,
            rate,
            budget: capacity,
            constrained: lambda > 0.0,
        }
    }
}

/// Budget of the limit program: `μ/2` for the Rao bound, `μ` for GV bounds.
pub fn budget_for(spec: &ArraySpec, kind: BoundKind) -> f64 {
    let mu = spec.scaled().mu;
    if kind.is_rao() {
        mu / 2.0
    } else {
        mu
    }
}

/// Lagrange multiplier for the spec's block fractions at `budget`.
pub fn solve_lambda(spec: &ArraySpec, budget: f64) -> Result<f64> {
    if !(budget > 0.0 && budget < 1.0) {
        return Err(Error::OutOfDomain {
            name: "budget",
            value: budget,
            domain: "(0, 1)",
        });
    }
    Ok(RateProgram::for_spec(spec).multiplier(budget))
}

pub fn optimal_tilt(spec: &ArraySpec, kind: BoundKind) -> Result<TiltProfile> {
    let program = RateProgram::for_spec(spec);
    let budget = budget_for(spec, kind);
    if kind.is_rao() {
        debug_assert!(program.free_load() >= budget - 1e-15);
    }
    if budget < 1.0 {
        solve_lambda(spec, budget)?;
    }
    Ok(program.solve(budget))
}

/// Large-deviations point estimate `e^{n V(0,0)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdEstimate {
    pub row_length: usize,
    pub rate: f64,
    /// `n · rate`, natural log of the estimate.
    pub log_value: f64,
    pub value: Scientific,
}

pub fn ld_estimate(spec: &ArraySpec, kind: BoundKind) -> Result<LdEstimate> {
    let tilt = optimal_tilt(spec, kind)?;
    let n = spec.row_length();
    let log_value = n as f64 * tilt.rate;
    Ok(LdEstimate {
        row_length: n,
        rate: tilt.rate,
        log_value,
        value: Scientific::from_ln(log_value),
    })
}

/// Limit value `V(x, τ)`: the best rate achievable over the remaining time
/// `[τ, 1]` starting from scaled position `x`.
pub fn value_function(spec: &ArraySpec, kind: BoundKind, x: f64, tau: f64) -> Result<f64> {
    let budget = budget_for(spec, kind);
    if !(0.0..=budget + 1e-12).contains(&x) {
        return Err(Error::OutOfDomain {
            name: "x",
            value: x,
            domain: "[0, budget]",
        });
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::OutOfDomain {
            name: "tau",
            value: tau,
            domain: "[0, 1]",
        });
    }
    Ok(remaining_program(spec, tau).solve(budget - x).rate)
}

/// Program over the time remaining after `tau`: the current block keeps
/// `A_i - τ`, later blocks their full fraction.
fn remaining_program(spec: &ArraySpec, tau: f64) -> RateProgram {
    let cumulative = spec.scaled().cumulative();
    let weights = cumulative
        .windows(2)
        .map(|w| (w[1] - tau.max(w[0])).max(0.0))
        .collect();
    RateProgram::new(weights, spec.alphabet_sizes().to_vec())
}

/// Values on a rectangular `(x, τ)` lattice; `values[i][j]` belongs to
/// `(x[i], tau[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Vec<f64>,
    pub tau: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Grid {
    /// CSV with header `x,tau,value`, x-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,tau,value\n");
        for (xi, row) in self.x.iter().zip(&self.values) {
            for (ti, v) in self.tau.iter().zip(row) {
                out.push_str(&format!("{xi},{ti},{v}\n"));
            }
        }
        out
    }
}

/// Target whose horizon and threshold the prelimit grid walks: the Rao target
/// or the full-horizon GV expectation.
fn grid_target(spec: &ArraySpec, kind: BoundKind) -> BoundTarget {
    if kind.is_rao() {
        BoundTarget::rao(spec)
    } else {
        BoundTarget::gv_expectation(spec, GvVariant::Full)
    }
}

/// `V_n(x, i) = (1/n) log M(x, i)` for integer positions `0 ≤ x ≤ T` and
/// steps `0 ≤ i ≤ m`, reported at scaled coordinates `(x/n, i/n)`.
pub fn prelimit_grid(spec: &ArraySpec, kind: BoundKind) -> Grid {
    let target = grid_target(spec, kind);
    let n = spec.row_length() as f64;
    let costs = spec.step_costs();
    let logs = log_tail_grid(&costs[..target.horizon()], target.threshold());
    Grid {
        x: (0..=target.threshold()).map(|x| x as f64 / n).collect(),
        tau: (0..=target.horizon()).map(|i| i as f64 / n).collect(),
        values: logs
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / n).collect())
            .collect(),
    }
}

/// `V(x, τ)` on `x_points` evenly spaced positions in `[0, budget]` and
/// `tau_points` evenly spaced times in `[0, 1]`. Rows are computed in
/// parallel.
pub fn limit_grid(spec: &ArraySpec, kind: BoundKind, x_points: usize, tau_points: usize) -> Result<Grid> {
    let budget = budget_for(spec, kind);
    let spaced = |count: usize, hi: f64| -> Vec<f64> {
        match count {
            0 => vec![],
            1 => vec![0.0],
            _ => (0..count).map(|i| hi * i as f64 / (count - 1) as f64).collect(),
        }
    };
    let x = spaced(x_points, budget);
    let tau = spaced(tau_points, 1.0);
    let values = x
        .par_iter()
        .map(|&xv| {
            tau.iter()
                .map(|&tv| value_function(spec, kind, xv, tv))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid { x, tau, values })
}

/// Limit values at the prelimit lattice points, for direct comparison.
pub fn limit_on_lattice(spec: &ArraySpec, kind: BoundKind) -> Result<Grid> {
    let lattice = prelimit_grid(spec, kind);
    let values = lattice
        .x
        .par_iter()
        .map(|&xv| {
            lattice
                .tau
                .iter()
                .map(|&tv| value_function(spec, kind, xv, tv.min(1.0)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid {
        x: lattice.x,
        tau: lattice.tau,
        values,
    })
}
