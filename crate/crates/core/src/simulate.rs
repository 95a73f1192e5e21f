//! Monte Carlo study of leading-component collinearity classes: draw row
//! samples from a multivariate normal with a target correlation matrix,
//! standardize each sample, and tally which variable subsets load on the
//! leading principal component at a given identifier threshold.
//!
//! Randomness discipline: every trial gets its own stream, keyed by hashing
//! a domain tag with the seed and trial index into a ChaCha8 seed. The same
//! `(seed, trial)` pair therefore reproduces the same sample bit-for-bit, on
//! any platform, regardless of how many trials run or in what order.

use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_lower, correlation_matrix, standardize_columns, sym_eigen, Matrix,
    SYMMETRY_TOLERANCE,
};
use crate::vr_select::collinearity_identifier;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Configuration of one frequency study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Target correlation matrix Φ of the sampled rows.
    pub correlation: Matrix,
    /// Rows per trial.
    pub n: usize,
    pub trials: u64,
    /// Identifier threshold for class membership.
    pub a: f64,
    /// Variance-share cutoff, carried for completeness; the study itself
    /// always examines the leading component.
    pub b: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        correlation: Matrix,
        n: usize,
        trials: u64,
        a: f64,
        b: f64,
        seed: u64,
    ) -> Result<SimConfig> {
        if correlation.rows() != correlation.cols() || correlation.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "correlation matrix is {}x{}",
                correlation.rows(),
                correlation.cols()
            )));
        }
        if !correlation.is_symmetric(SYMMETRY_TOLERANCE) {
            return Err(Error::ParamOutOfRange(
                "correlation matrix must be symmetric".into(),
            ));
        }
        for i in 0..correlation.rows() {
            if (correlation.get(i, i) - 1.0).abs() > 1e-12 {
                return Err(Error::ParamOutOfRange(format!(
                    "correlation diagonal entry {i} is {}, not 1",
                    correlation.get(i, i)
                )));
            }
        }
        if n < 2 {
            return Err(Error::ParamOutOfRange(format!(
                "need at least 2 rows per trial, got {n}"
            )));
        }
        if trials == 0 {
            return Err(Error::ParamOutOfRange("trials must be at least 1".into()));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "threshold a must lie in (0,1], got {a}"
            )));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "cutoff b must lie in (0,1), got {b}"
            )));
        }
        Ok(SimConfig {
            correlation,
            n,
            trials,
            a,
            b,
            seed,
        })
    }
}

/// How often each canonical variable subset formed the leading-component
/// class. Subsets are sorted 0-based column index lists of the correlation
/// matrix; the empty subset counts trials where no variable passed the
/// threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    /// Rows sorted by descending count, ties by subset.
    pub rows: Vec<FrequencyRow>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub members: Vec<usize>,
    pub count: u64,
}

impl FrequencyTable {
    pub fn count_of(&self, members: &[usize]) -> u64 {
        self.rows
            .iter()
            .find(|r| r.members == members)
            .map_or(0, |r| r.count)
    }
}

/// Per-trial ChaCha8 stream: seed bytes are the SHA-256 of a domain tag,
/// the study seed, and the trial index.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"eemx-sim");
    hasher.update(seed.to_le_bytes());
    hasher.update(trial.to_le_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// One standard-normal pair by the Box–Muller transform over 53-bit
/// uniforms.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut u1 = 0.0;
    while u1 <= 0.0 {
        u1 = ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64);
    }
    let u2 = ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64);
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// Draw the trial's n×p sample whose rows are iid N(0, Φ): each row is L·g
/// for the Cholesky factor L of Φ and a standard normal vector g.
pub fn generate_mvn(config: &SimConfig, trial: u64) -> Result<Matrix> {
    let l = cholesky_lower(&config.correlation)?;
    let p = config.correlation.rows();
    let mut rng = trial_rng(config.seed, trial);
    let total = config.n * p;
    let mut draws = Vec::with_capacity(total + 1);
    while draws.len() < total {
        let (g1, g2) = normal_pair(&mut rng);
        draws.push(g1);
        draws.push(g2);
    }
    let mut sample = Matrix::zeros(config.n, p);
    for row in 0..config.n {
        let g = &draws[row * p..(row + 1) * p];
        for i in 0..p {
            let mut value = 0.0;
            for (j, gj) in g.iter().enumerate().take(i + 1) {
                value += l.get(i, j) * gj;
            }
            sample.set(row, i, value);
        }
    }
    Ok(sample)
}

/// Members of the leading-component class of one sample: standardize, take
/// the correlation matrix's top eigenpair, and keep the (0-based) columns
/// whose identifier reaches `a`.
fn leading_class_members(sample: &Matrix, a: f64) -> Result<Vec<usize>> {
    let (z, _, _) = standardize_columns(sample)?;
    let corr = correlation_matrix(&z)?;
    let eig = sym_eigen(&corr)?;
    let mut members = Vec::new();
    for k in 0..sample.cols() {
        if collinearity_identifier(&eig, 2, k + 2)? >= a {
            members.push(k);
        }
    }
    Ok(members)
}

/// Run the full study: per trial, sample, standardize, and tally the
/// leading-component class membership at threshold `a`.
pub fn pcc_frequency_study(config: &SimConfig) -> Result<FrequencyTable> {
    let mut tallies: HashMap<Vec<usize>, u64> = HashMap::new();
    for trial in 0..config.trials {
        let sample = generate_mvn(config, trial)?;
        let members = leading_class_members(&sample, config.a)?;
        *tallies.entry(members).or_insert(0) += 1;
    }
    let mut rows: Vec<FrequencyRow> = tallies
        .into_iter()
        .map(|(members, count)| FrequencyRow { members, count })
        .collect();
    rows.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| x.members.cmp(&y.members)));
    Ok(FrequencyTable {
        rows,
        total: config.trials,
    })
}
