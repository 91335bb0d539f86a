//! Exact bound values.
//!
//! Three independent routes evaluate the same integers:
//!
//! * [`direct_bound`] sums over all compositions `u_1 + … + u_σ = i` of the
//!   binomial products, which costs on the order of [`direct_op_count`]
//!   multiplications;
//! * [`dp_bound`] runs the backward recursion
//!   `M(x, k) = c_{k+1} M(x + 1, k + 1) + M(x, k + 1)` over the lattice
//!   `0 ≤ x ≤ T, 0 ≤ k ≤ m` with `M(x, m) = 1` and `M(T + 1, ·) = 0`, which
//!   needs `O(T m)` big-integer operations and `O(T)` memory;
//! * [`brute_force_oracle`] enumerates every up/down string of the horizon.
//!
//! All arithmetic is exact. [`dp_bound_log`] is the floating-point log-space
//! version of the recursion for callers that only need magnitudes.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{ArraySpec, BoundKind, BoundTarget};
use crate::numeric::{log_add_exp, Scientific};

/// Largest horizon the brute-force oracle will enumerate.
pub const MAX_ORACLE_HORIZON: usize = 24;

/// Arbitrary-precision nonnegative count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.0.bits();
        if bits <= 1000 {
            return self.0.to_f64().unwrap().ln();
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_f64().unwrap();
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }

    /// Decimal mantissa and exponent taken from the exact digit string.
    pub fn scientific(&self) -> Scientific {
        if self.0.is_zero() {
            return Scientific::ZERO;
        }
        let digits = self.0.to_string();
        let head = &digits[..digits.len().min(17)];
        let mantissa = format!("{}.{}", &head[..1], &head[1..]).parse::<f64>().unwrap();
        Scientific {
            mantissa,
            exponent: digits.len() as i64 - 1,
        }
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<BigUint> for BigCount {
    fn from(value: BigUint) -> Self {
        BigCount(value)
    }
}

impl From<u64> for BigCount {
    fn from(value: u64) -> Self {
        BigCount(BigUint::from(value))
    }
}

/// `C(n, k) (base)^k` for `k = 0..=n`.
fn weighted_binomials(n: usize, base: u64) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = BigUint::one();
    let mut power = BigUint::one();
    for k in 0..=n {
        out.push(&binom * &power);
        binom = binom * BigUint::from(n - k) / BigUint::from(k + 1);
        power *= base;
    }
    out
}

/// Sum over all compositions `(u_1, …, u_σ)` with `Σ u ≤ budget` of
/// `∏ tables[m][u_m]`.
fn composition_sum(tables: &[Vec<BigUint>], budget: usize) -> BigUint {
    fn walk(tables: &[Vec<BigUint>], budget: usize, product: &BigUint, acc: &mut BigUint) {
        let Some((table, rest)) = tables.split_first() else {
            *acc += product;
            return;
        };
        for (u, term) in table.iter().enumerate().take(budget + 1) {
            if term.is_zero() {
                continue;
            }
            walk(rest, budget - u, &(product * term), acc);
        }
    }
    let mut acc = BigUint::zero();
    walk(tables, budget, &BigUint::one(), &mut acc);
    acc
}

/// Evaluates the Rao sum or the Gilbert-Varshamov sum straight from its
/// composition formula.
///
/// For the GV sum the last block contributes `s_σ C(l_σ - 1, u_σ - 1)
/// (s_σ - 1)^(u_σ - 1)`, which vanishes for `u_σ = 0`; the `i = 0` term is
/// counted as 1.
pub fn direct_bound(spec: &ArraySpec, target: &BoundTarget) -> Result<BigCount> {
    let blocks = spec.alphabet_sizes().iter().zip(spec.block_lengths());
    match target.kind() {
        BoundKind::RaoSum => {
            let tables: Vec<_> = blocks.map(|(&s, &l)| weighted_binomials(l, s - 1)).collect();
            Ok(composition_sum(&tables, target.threshold()).into())
        }
        BoundKind::GvSum => {
            let sigma = spec.num_blocks();
            let mut tables: Vec<_> = blocks
                .take(sigma - 1)
                .map(|(&s, &l)| weighted_binomials(l, s - 1))
                .collect();
            let s_last = spec.last_alphabet();
            let l_last = spec.block_lengths()[sigma - 1];
            let mut last = vec![BigUint::zero()];
            last.extend(
                weighted_binomials(l_last - 1, s_last - 1)
                    .into_iter()
                    .map(|v| v * s_last),
            );
            tables.push(last);
            Ok((composition_sum(&tables, target.threshold()) + 1u32).into())
        }
        BoundKind::GvExpectation => Err(Error::UnsupportedTarget {
            operation: "direct_bound",
            kind: target.kind().name(),
        }),
    }
}

/// `M(0, 0)` of the backward recursion over the given up-step costs.
fn tail_count(costs: &[u64], threshold: usize) -> BigUint {
    let width = threshold.min(costs.len()) + 1;
    let mut column = vec![BigUint::one(); width];
    for &c in costs.iter().rev() {
        // ascending x reads column[x + 1] before it is overwritten
        for x in 0..width - 1 {
            let up = &column[x + 1] * c;
            column[x] += up;
        }
    }
    column.swap_remove(0)
}

/// Evaluates any bound target with the backward recursion.
pub fn dp_bound(spec: &ArraySpec, target: &BoundTarget) -> BigCount {
    let costs = spec.step_costs();
    let value = match target.kind() {
        BoundKind::GvSum => {
            // 1 + s_σ · (paths over the first n - 1 letters with at most t - 2 up-steps)
            let t = spec.strength();
            if t < 2 {
                BigUint::one()
            } else {
                tail_count(&costs[..costs.len() - 1], t - 2) * spec.last_alphabet() + 1u32
            }
        }
        _ => tail_count(&costs[..target.horizon()], target.threshold()) * target.prefactor(),
    };
    value.into()
}

/// Natural log of [`dp_bound`] computed in floating point.
///
/// Each step adds one `log_add_exp`, so the relative error grows roughly
/// linearly with the horizon (about `1e-15` per step).
pub fn dp_bound_log(spec: &ArraySpec, target: &BoundTarget) -> f64 {
    let costs = spec.step_costs();
    match target.kind() {
        BoundKind::GvSum => {
            let t = spec.strength();
            if t < 2 {
                0.0
            } else {
                let tail = log_tail_column(&costs[..costs.len() - 1], t - 2)[0];
                log_add_exp(0.0, tail + (spec.last_alphabet() as f64).ln())
            }
        }
        _ => {
            log_tail_column(&costs[..target.horizon()], target.threshold())[0]
                + (target.prefactor() as f64).ln()
        }
    }
}

fn log_tail_column(costs: &[u64], threshold: usize) -> Vec<f64> {
    let width = threshold.min(costs.len()) + 1;
    let mut column = vec![0.0f64; width];
    for &c in costs.iter().rev() {
        let lc = (c as f64).ln();
        for x in 0..width - 1 {
            column[x] = log_add_exp(column[x], lc + column[x + 1]);
        }
    }
    column
}

/// `ln M(x, k)` for `0 ≤ x ≤ threshold` (rows) and `0 ≤ k ≤ horizon`
/// (columns) of the backward recursion over `costs[..horizon]`.
pub fn log_tail_grid(costs: &[u64], threshold: usize) -> Vec<Vec<f64>> {
    let m = costs.len();
    let mut grid = vec![vec![0.0f64; m + 1]; threshold + 1];
    for k in (0..m).rev() {
        let lc = (costs[k] as f64).ln();
        for x in 0..=threshold {
            let stay = grid[x][k + 1];
            grid[x][k] = if x < threshold {
                log_add_exp(stay, lc + grid[x + 1][k + 1])
            } else {
                stay
            };
        }
    }
    grid
}

/// Product of a string's weights, kept in `u128` until it overflows.
enum Product {
    Small(u128),
    Big(BigUint),
}

impl Product {
    fn mul(self, factor: u64) -> Product {
        match self {
            Product::Small(v) => match v.checked_mul(factor as u128) {
                Some(p) => Product::Small(p),
                None => Product::Big(BigUint::from(v) * factor),
            },
            Product::Big(v) => Product::Big(v * factor),
        }
    }

    fn add_to(self, small: &mut u128, big: &mut BigUint) {
        match self {
            Product::Small(v) => match small.checked_add(v) {
                Some(s) => *small = s,
                None => {
                    *big += *small;
                    *small = v;
                }
            },
            Product::Big(v) => *big += v,
        }
    }
}

/// Enumerates all `2^m` up/down strings of the target's horizon and sums
/// their weights directly.
///
/// For the GV sum a nonzero string is admitted only if its final letter is an
/// up-step, which then carries weight `s_σ` instead of `s_σ - 1`; the all-down
/// string contributes 1.
pub fn brute_force_oracle(spec: &ArraySpec, target: &BoundTarget) -> Result<BigCount> {
    let m = target.horizon();
    if m > MAX_ORACLE_HORIZON {
        return Err(Error::OracleTooLarge {
            horizon: m,
            max: MAX_ORACLE_HORIZON,
        });
    }
    let costs: Vec<u64> = (1..=m)
        .map(|j| spec.running_cost(true, j))
        .collect::<Result<_>>()?;
    let gv_sum = target.kind() == BoundKind::GvSum;
    let mut small = 0u128;
    let mut big = BigUint::zero();
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize > target.threshold() {
            continue;
        }
        let mut product = Product::Small(1);
        if gv_sum && mask != 0 {
            if mask >> (m - 1) & 1 == 0 {
                continue;
            }
            product = product.mul(spec.last_alphabet());
        }
        let mut bits = if gv_sum { mask & !(1 << (m - 1)) } else { mask };
        while bits != 0 {
            product = product.mul(costs[bits.trailing_zeros() as usize]);
            bits &= bits - 1;
        }
        product.add_to(&mut small, &mut big);
    }
    Ok(((big + small) * target.prefactor()).into())
}

/// Lower bound `Σ_{i=0}^{⌊t/2⌋} σ C(σ + i - 1, σ - 1)` on the number of
/// operations a direct evaluation of the Rao sum performs.
pub fn direct_op_count(spec: &ArraySpec) -> BigCount {
    let sigma = spec.num_blocks();
    let mut total = BigUint::zero();
    // C(σ - 1 + i, σ - 1) built up incrementally in i
    let mut binom = BigUint::one();
    for i in 0..=spec.strength() / 2 {
        total += &binom * sigma;
        binom = binom * (sigma + i) / (i + 1);
    }
    total.into()
}
