use std::fmt;

use serde::{Deserialize, Serialize};

/// `ln(e^a + e^b)` without overflow; either argument may be `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// A positive number rendered as `mantissa × 10^exponent` with
/// `1 ≤ mantissa < 10` (or zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scientific {
    pub mantissa: f64,
    pub exponent: i64,
}

impl Scientific {
    pub const ZERO: Scientific = Scientific {
        mantissa: 0.0,
        exponent: 0,
    };

    /// Renders `e^log_value`. `-inf` maps to zero.
    pub fn from_ln(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let log10 = log_value / std::f64::consts::LN_10;
        let mut exponent = log10.floor();
        let mut mantissa = 10f64.powf(log10 - exponent);
        if mantissa >= 10.0 {
            mantissa /= 10.0;
            exponent += 1.0;
        }
        Scientific {
            mantissa,
            exponent: exponent as i64,
        }
    }

    /// Natural log of the rendered value.
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_10
    }

    /// `value / 10^exponent`, i.e. `value` expressed at this number's scale.
    pub fn rescale(&self, value: f64) -> f64 {
        value / 10f64.powi(self.exponent as i32)
    }
}

impl fmt::Display for Scientific {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*}e{}", p, self.mantissa, self.exponent),
            None => write!(f, "{}e{}", self.mantissa, self.exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct() {
        let (a, b) = (1.5f64, -0.25f64);
        assert!((log_add_exp(a, b) - (a.exp() + b.exp()).ln()).abs() < 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn scientific_rendering() {
        let s = Scientific::from_ln(190051f64.ln());
        assert_eq!(s.exponent, 5);
        assert!((s.mantissa - 1.90051).abs() < 1e-12);
        assert_eq!(format!("{s:.2}"), "1.90e5");
        assert_eq!(Scientific::from_ln(f64::NEG_INFINITY), Scientific::ZERO);
        let big = Scientific::from_ln(400.0);
        assert!((big.ln() - 400.0).abs() < 1e-10);
        assert!((big.rescale(6000.0 * 10f64.powi(big.exponent as i32)) - 6000.0).abs() < 1e-6);
    }
}
