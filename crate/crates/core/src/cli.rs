//! Command-line front end. [`run`] maps a parsed [`RunRequest`] to the text
//! written on standard output (or an error document for standard error) and
//! an exit status, so the binary stays a thin wrapper.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    ld_estimate, limit_grid, limit_on_lattice, optimal_tilt, prelimit_grid, RateProgram,
    TiltProfile,
};
use crate::error::{Error, Result};
use crate::exact::{brute_force_oracle, direct_bound, direct_op_count, dp_bound, BigCount};
use crate::model::{ArraySpec, BoundKind, BoundTarget, GvVariant};
use crate::simulate::{is_estimate, IsConfig, IsResult};

/// Environment variable capping the number of sampling threads.
pub const THREADS_ENV: &str = "OABOUNDS_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(name = "oabounds", version, about = "Rao and Gilbert-Varshamov bounds for mixed-level orthogonal arrays")]
pub struct RunRequest {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact bound value.
    Exact {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundArg::Rao)]
        bound: BoundArg,
        /// Which GV expectation (only with --bound gv-expectation).
        #[arg(long, value_enum, default_value_t = VariantArg::Full)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = OutputArg::Json)]
        output: OutputArg,
    },
    /// Large-deviations growth rate, optimal tilt and point estimate.
    Rate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundArg::Rao)]
        bound: BoundArg,
        #[arg(long, value_enum, default_value_t = OutputArg::Json)]
        output: OutputArg,
    },
    /// Importance-sampling (or plain Monte Carlo) estimate.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundArg::Rao)]
        bound: BoundArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Full)]
        variant: VariantArg,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample fair coins instead of the optimal tilt.
        #[arg(long)]
        plain: bool,
        #[arg(long, value_enum, default_value_t = OutputArg::Json)]
        output: OutputArg,
    },
    /// Rao and GV growth rates over a range of μ at the spec's block fractions.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        mu_from: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_to: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = OutputArg::Csv)]
        output: OutputArg,
    },
    /// Limit value function V and prelimit V_n grids.
    Levelcurves {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundArg::Rao)]
        bound: BoundArg,
        /// Points per axis for the limit grid; 0 evaluates V on the prelimit lattice.
        #[arg(long, default_value_t = 0)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = OutputArg::Csv)]
        output: OutputArg,
    },
    /// Lower bound on the operation count of the direct Rao sum.
    Opcount {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputArg::Json)]
        output: OutputArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Rao,
    Gv,
    GvExpectation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Shifted,
    ShiftedScaled,
    Full,
}

impl From<VariantArg> for GvVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Shifted => GvVariant::Shifted,
            VariantArg::ShiftedScaled => GvVariant::ShiftedScaled,
            VariantArg::Full => GvVariant::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Dp,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Json,
    Csv,
}

/// Exit status and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDocument {
    pub bound: String,
    pub method: String,
    pub value: String,
    pub mantissa: f64,
    pub exponent10: i64,
}

impl ExactDocument {
    pub fn validate(&self) -> Result<()> {
        let value: num_bigint::BigUint = self
            .value
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("not a decimal integer: {}", self.value)))?;
        let sci = BigCount::from(value).scientific();
        if sci.exponent != self.exponent10 || (sci.mantissa - self.mantissa).abs() > 1e-12 {
            return Err(Error::InvalidSpec("mantissa/exponent disagree with value".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDocument {
    pub kind: String,
    pub n: usize,
    pub mu: f64,
    #[serde(flatten)]
    pub tilt: TiltProfile,
    pub ld_log_estimate: f64,
    pub ld_mantissa: f64,
    pub ld_exponent10: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub rao_rate: f64,
    pub gv_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDocument {
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ErrorDocument {
    error: String,
    message: String,
}

pub fn run(request: &RunRequest) -> Outcome {
    match execute(&request.command) {
        Ok(stdout) => Outcome {
            status: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let doc = ErrorDocument {
                error: e.code().to_string(),
                message: e.to_string(),
            };
            Outcome {
                status: 1,
                stdout: String::new(),
                stderr: serde_json::to_string(&doc).unwrap() + "\n",
            }
        }
    }
}

/// Applies `OABOUNDS_THREADS` to the global thread pool, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn load_spec(path: &Path) -> Result<ArraySpec> {
    ArraySpec::from_json(&std::fs::read_to_string(path)?)
}

fn target_for(spec: &ArraySpec, bound: BoundArg, variant: VariantArg) -> BoundTarget {
    match bound {
        BoundArg::Rao => BoundTarget::rao(spec),
        BoundArg::Gv => BoundTarget::gv_sum(spec),
        BoundArg::GvExpectation => BoundTarget::gv_expectation(spec, variant.into()),
    }
}

fn kind_for(bound: BoundArg) -> BoundKind {
    match bound {
        BoundArg::Rao => BoundKind::RaoSum,
        _ => BoundKind::GvExpectation,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_value(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn execute(command: &Command) -> Result<String> {
    match *command {
        Command::Exact {
            ref spec,
            bound,
            variant,
            method,
            output,
        } => {
            let spec = load_spec(spec)?;
            let target = target_for(&spec, bound, variant);
            let (value, method) = match method {
                MethodArg::Direct => (direct_bound(&spec, &target)?, "direct"),
                MethodArg::Dp => (dp_bound(&spec, &target), "dp"),
                MethodArg::Oracle => (brute_force_oracle(&spec, &target)?, "oracle"),
            };
            let sci = value.scientific();
            let doc = ExactDocument {
                bound: target.label(),
                method: method.to_string(),
                value: value.to_string(),
                mantissa: sci.mantissa,
                exponent10: sci.exponent,
            };
            match output {
                OutputArg::Json => to_json(&doc),
                OutputArg::Csv => Ok(format!(
                    "bound,method,value,mantissa,exponent10\n{},{},{},{},{}\n",
                    doc.bound, doc.method, doc.value, doc.mantissa, doc.exponent10
                )),
            }
        }
        Command::Rate {
            ref spec,
            bound,
            output,
        } => {
            let spec = load_spec(spec)?;
            let kind = kind_for(bound);
            let tilt = optimal_tilt(&spec, kind)?;
            let ld = ld_estimate(&spec, kind)?;
            let doc = RateDocument {
                kind: kind.name().to_string(),
                n: spec.row_length(),
                mu: spec.scaled().mu,
                tilt,
                ld_log_estimate: ld.log_value,
                ld_mantissa: ld.value.mantissa,
                ld_exponent10: ld.value.exponent,
            };
            match output {
                OutputArg::Json => to_json(&doc),
                OutputArg::Csv => {
                    let mut out = String::from("block,alphabet_size,fraction,theta\n");
                    let fractions = spec.scaled().fractions;
                    for (i, ((s, a), theta)) in spec
                        .alphabet_sizes()
                        .iter()
                        .zip(&fractions)
                        .zip(&doc.tilt.thetas)
                        .enumerate()
                    {
                        out.push_str(&format!("{},{s},{a},{theta}\n", i + 1));
                    }
                    Ok(out)
                }
            }
        }
        Command::Simulate {
            ref spec,
            bound,
            variant,
            samples,
            seed,
            plain,
            output,
        } => {
            let spec = load_spec(spec)?;
            let target = target_for(&spec, bound, variant);
            let config = IsConfig {
                samples,
                seed,
                target,
                use_tilt: !plain,
            };
            let result = is_estimate(&spec, &config)?;
            match output {
                OutputArg::Json => to_json(&result),
                OutputArg::Csv => Ok(simulate_csv(&result)),
            }
        }
        Command::Sweep {
            ref spec,
            mu_from,
            mu_to,
            steps,
            output,
        } => {
            let spec = load_spec(spec)?;
            let rows = sweep(&spec, mu_from, mu_to, steps)?;
            match output {
                OutputArg::Json => to_json(&rows),
                OutputArg::Csv => {
                    let mut out = String::from("mu,rao_rate,gv_rate\n");
                    for r in &rows {
                        out.push_str(&format!("{},{},{}\n", r.mu, r.rao_rate, r.gv_rate));
                    }
                    Ok(out)
                }
            }
        }
        Command::Levelcurves {
            ref spec,
            bound,
            grid,
            output,
        } => {
            let spec = load_spec(spec)?;
            let kind = kind_for(bound);
            let limit = match grid {
                0 => limit_on_lattice(&spec, kind)?,
                1 => {
                    return Err(Error::OutOfDomain {
                        name: "grid",
                        value: 1.0,
                        domain: "0 or at least 2",
                    })
                }
                g => limit_grid(&spec, kind, g, g)?,
            };
            let prelimit = prelimit_grid(&spec, kind);
            match output {
                OutputArg::Csv => Ok(format!("{}\n{}", limit.to_csv(), prelimit.to_csv())),
                OutputArg::Json => to_json(&serde_json::json!({
                    "limit": limit,
                    "prelimit": prelimit,
                })),
            }
        }
        Command::Opcount { ref spec, output } => {
            let spec = load_spec(spec)?;
            let value = direct_op_count(&spec).to_string();
            match output {
                OutputArg::Json => to_json(&CountDocument { value }),
                OutputArg::Csv => Ok(format!("value\n{value}\n")),
            }
        }
    }
}

fn simulate_csv(r: &IsResult) -> String {
    format!(
        "log_estimate,mantissa,exponent10,std_error,ci_low,ci_high,hit_fraction,samples,seed,method,kind\n\
         {},{},{},{},{},{},{},{},{},{},{}\n",
        csv_value(r.log_estimate),
        r.mantissa,
        r.exponent10,
        r.std_error,
        r.ci_low,
        r.ci_high,
        r.hit_fraction,
        r.samples,
        r.seed,
        serde_json::to_value(r.method).unwrap().as_str().unwrap(),
        r.kind
    )
}

/// Rao and GV rates at `steps + 1` evenly spaced values of μ in
/// `[mu_from, mu_to]`, holding the spec's block fractions and alphabets
/// fixed. The Rao budget `μ/2` never exceeds the unconstrained load (which is
/// at least 1/2), so it is used as is; at μ = 0 both rates are 0.
pub fn sweep(spec: &ArraySpec, mu_from: f64, mu_to: f64, steps: usize) -> Result<Vec<SweepRow>> {
    for (name, mu) in [("mu_from", mu_from), ("mu_to", mu_to)] {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::OutOfDomain {
                name,
                value: mu,
                domain: "[0, 1]",
            });
        }
    }
    if mu_from > mu_to {
        return Err(Error::OutOfDomain {
            name: "mu_from",
            value: mu_from,
            domain: "at most mu_to",
        });
    }
    if steps == 0 {
        return Err(Error::OutOfDomain {
            name: "steps",
            value: 0.0,
            domain: "at least 1",
        });
    }
    let program = RateProgram::for_spec(spec);
    let free = program.free_load();
    Ok((0..=steps)
        .map(|i| {
            let mu = mu_from + (mu_to - mu_from) * i as f64 / steps as f64;
            SweepRow {
                mu,
                rao_rate: program.solve((mu / 2.0).min(free)).rate,
                gv_rate: program.solve(mu).rate,
            }
        })
        .collect())
}
