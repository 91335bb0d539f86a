//! Array parameters, scaled parameters and the per-step cost model shared by
//! every bound computation.
//!
//! A mixed-level array with block alphabets `s_1..s_σ`, block lengths
//! `l_1..l_σ` and strength `t` has row length `n = Σ l_i`. Every method in
//! this crate walks the `n` letters of a row in order; letter `j` (1-based)
//! belongs to the block whose cumulative range contains it and carries the
//! up-step cost `s_i - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of an `OA(N, s_1^l_1 … s_σ^l_σ, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ArraySpec {
    alphabet_sizes: Vec<u64>,
    block_lengths: Vec<usize>,
    strength: usize,
    /// `ends[i]` is the 1-based index of the last letter of block `i`.
    ends: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    alphabet_sizes: Vec<u64>,
    block_lengths: Vec<usize>,
    strength: usize,
}

impl TryFrom<RawSpec> for ArraySpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        ArraySpec::new(raw.alphabet_sizes, raw.block_lengths, raw.strength)
    }
}

impl From<ArraySpec> for RawSpec {
    fn from(spec: ArraySpec) -> Self {
        RawSpec {
            alphabet_sizes: spec.alphabet_sizes,
            block_lengths: spec.block_lengths,
            strength: spec.strength,
        }
    }
}

impl ArraySpec {
    pub fn new(alphabet_sizes: Vec<u64>, block_lengths: Vec<usize>, strength: usize) -> Result<Self> {
        if alphabet_sizes.is_empty() {
            return Err(Error::InvalidSpec("at least one block is required".into()));
        }
        if alphabet_sizes.len() != block_lengths.len() {
            return Err(Error::InvalidSpec(format!(
                "{} alphabet sizes but {} block lengths",
                alphabet_sizes.len(),
                block_lengths.len()
            )));
        }
        if let Some(&s) = alphabet_sizes.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidSpec(format!("alphabet size {s} is below 2")));
        }
        if block_lengths.contains(&0) {
            return Err(Error::InvalidSpec("block lengths must be at least 1".into()));
        }
        let ends: Vec<usize> = block_lengths
            .iter()
            .scan(0usize, |acc, &l| {
                *acc += l;
                Some(*acc)
            })
            .collect();
        let n = *ends.last().unwrap();
        if strength < 1 || strength > n {
            return Err(Error::InvalidSpec(format!(
                "strength {strength} outside 1..={n}"
            )));
        }
        Ok(ArraySpec {
            alphabet_sizes,
            block_lengths,
            strength,
            ends,
        })
    }

    /// Parses a spec document. Well-formed JSON describing an impossible
    /// array is reported as [`Error::InvalidSpec`].
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn alphabet_sizes(&self) -> &[u64] {
        &self.alphabet_sizes
    }

    pub fn block_lengths(&self) -> &[usize] {
        &self.block_lengths
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    /// Number of blocks σ.
    pub fn num_blocks(&self) -> usize {
        self.alphabet_sizes.len()
    }

    /// Row length n.
    pub fn row_length(&self) -> usize {
        *self.ends.last().unwrap()
    }

    /// Alphabet size of the last block, `s_σ`.
    pub fn last_alphabet(&self) -> u64 {
        *self.alphabet_sizes.last().unwrap()
    }

    /// 1-based block containing the 1-based letter index `step`.
    pub fn block_of(&self, step: usize) -> Result<usize> {
        let n = self.row_length();
        if step < 1 || step > n {
            return Err(Error::StepOutOfRange { step, n });
        }
        Ok(self.ends.partition_point(|&end| end < step) + 1)
    }

    /// Multiplicative weight of a step: 1 for a down-step, `s_i - 1` for an
    /// up-step inside block `i`.
    pub fn running_cost(&self, up: bool, step: usize) -> Result<u64> {
        let block = self.block_of(step)?;
        Ok(if up { self.alphabet_sizes[block - 1] - 1 } else { 1 })
    }

    /// Up-step costs `c_j = s_{block(j)} - 1` for `j = 1..=n`, in order.
    pub fn step_costs(&self) -> Vec<u64> {
        self.alphabet_sizes
            .iter()
            .zip(&self.block_lengths)
            .flat_map(|(&s, &l)| std::iter::repeat_n(s - 1, l))
            .collect()
    }

    pub fn scaled(&self) -> ScaledParams {
        let n = self.row_length() as f64;
        ScaledParams {
            mu: self.strength as f64 / n,
            fractions: self.block_lengths.iter().map(|&l| l as f64 / n).collect(),
        }
    }

    /// The same shape (block fractions, alphabets, μ) at row length `n`.
    ///
    /// Block lengths are rounded to the nearest integer with the last block
    /// absorbing the remainder; the strength is `round(μ n)` clamped to `1..=n`.
    pub fn scaled_to(&self, n: usize) -> Result<ArraySpec> {
        let params = self.scaled();
        let sigma = self.num_blocks();
        let mut lengths: Vec<usize> = params.fractions[..sigma - 1]
            .iter()
            .map(|a| (a * n as f64).round() as usize)
            .collect();
        let used: usize = lengths.iter().sum();
        if used >= n {
            return Err(Error::InvalidSpec(format!(
                "row length {n} is too short for {sigma} blocks"
            )));
        }
        lengths.push(n - used);
        let strength = ((params.mu * n as f64).round() as usize).clamp(1, n);
        ArraySpec::new(self.alphabet_sizes.clone(), lengths, strength)
    }
}

/// Strength and block lengths as fractions of the row length: `t = μ n`,
/// `l_i = a_i n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub mu: f64,
    pub fractions: Vec<f64>,
}

impl ScaledParams {
    /// Cumulative fractions `A_0 = 0, A_1, …, A_σ = 1`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.fractions.len() + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for a in &self.fractions {
            acc += a;
            out.push(acc);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    RaoSum,
    GvSum,
    GvExpectation,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::RaoSum => "rao",
            BoundKind::GvSum => "gv",
            BoundKind::GvExpectation => "gv-expectation",
        }
    }

    pub fn is_rao(self) -> bool {
        self == BoundKind::RaoSum
    }
}

/// Which Gilbert-Varshamov expectation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GvVariant {
    /// `n - 1` steps, threshold `t - 1`, no prefactor.
    Shifted,
    /// `n - 1` steps, threshold `t - 1`, multiplied by `s_σ`.
    ShiftedScaled,
    /// `n` steps, threshold `t`, no prefactor.
    Full,
}

impl GvVariant {
    pub const ALL: [GvVariant; 3] = [GvVariant::Shifted, GvVariant::ShiftedScaled, GvVariant::Full];

    pub fn name(self) -> &'static str {
        match self {
            GvVariant::Shifted => "shifted",
            GvVariant::ShiftedScaled => "shifted-scaled",
            GvVariant::Full => "full",
        }
    }
}

/// The quantity a bound computation evaluates: paths of `horizon` steps whose
/// up-step count stays at or below `threshold`, times `prefactor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundTarget {
    kind: BoundKind,
    threshold: usize,
    horizon: usize,
    prefactor: u64,
    variant: Option<GvVariant>,
}

impl BoundTarget {
    pub fn rao(spec: &ArraySpec) -> Self {
        BoundTarget {
            kind: BoundKind::RaoSum,
            threshold: spec.strength() / 2,
            horizon: spec.row_length(),
            prefactor: 1,
            variant: None,
        }
    }

    pub fn gv_sum(spec: &ArraySpec) -> Self {
        BoundTarget {
            kind: BoundKind::GvSum,
            threshold: spec.strength() - 1,
            horizon: spec.row_length(),
            prefactor: 1,
            variant: None,
        }
    }

    pub fn gv_expectation(spec: &ArraySpec, variant: GvVariant) -> Self {
        let (n, t) = (spec.row_length(), spec.strength());
        let (threshold, horizon, prefactor) = match variant {
            GvVariant::Shifted => (t - 1, n - 1, 1),
            GvVariant::ShiftedScaled => (t - 1, n - 1, spec.last_alphabet()),
            GvVariant::Full => (t, n, 1),
        };
        BoundTarget {
            kind: BoundKind::GvExpectation,
            threshold,
            horizon,
            prefactor,
            variant: Some(variant),
        }
    }

    /// Every target that can be evaluated for `spec`.
    pub fn all(spec: &ArraySpec) -> Vec<BoundTarget> {
        let mut out = vec![BoundTarget::rao(spec), BoundTarget::gv_sum(spec)];
        out.extend(GvVariant::ALL.iter().map(|&v| BoundTarget::gv_expectation(spec, v)));
        out
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn prefactor(&self) -> u64 {
        self.prefactor
    }

    pub fn variant(&self) -> Option<GvVariant> {
        self.variant
    }

    pub fn label(&self) -> String {
        match self.variant {
            Some(v) => format!("{}:{}", self.kind.name(), v.name()),
            None => self.kind.name().to_string(),
        }
    }
}
