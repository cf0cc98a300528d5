//! Cost and space predictions that never touch register data, slope
//! fitting, and a classical Karatsuba reference.
//!
//! The Toffoli predictor walks the same recursion shape as the traced
//! multiplier but only sums prices from the [`CostModel`]. Agreement
//! between the two is the main self-consistency check of the crate.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::karatsuba::{choose_parameters, MultiplierConfig};
use crate::revarith::CostModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Karatsuba,
    Schoolbook,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Karatsuba, Algorithm::Schoolbook];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Karatsuba => "karatsuba",
            Algorithm::Schoolbook => "schoolbook",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "karatsuba" => Ok(Algorithm::Karatsuba),
            "schoolbook" => Ok(Algorithm::Schoolbook),
            other => Err(Error::InvalidInput(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// One metered multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SweepPoint {
    pub algorithm: Algorithm,
    pub n: usize,
    pub w: usize,
    pub m: usize,
    pub toffoli: u64,
    pub high_water_bits: u64,
}

/// Exact Toffoli total of a Karatsuba multiply-accumulate on `n`-bit
/// operands with the default layout.
pub fn predicted_toffoli_count(n: usize, cost: &CostModel) -> Result<u64> {
    Ok(predicted_toffoli_for(&choose_parameters(n)?, cost))
}

/// Exact Toffoli total for an explicit layout: compute, fold, uncompute.
pub fn predicted_toffoli_for(cfg: &MultiplierConfig, cost: &CostModel) -> u64 {
    2 * predicted_recursion_toffoli(cfg, cost) + predicted_fold_toffoli(cfg, cost)
}

/// Toffolis of one pass of the piece recursion on `m` pieces. Depends on
/// `(w, m)` and the base-case cutoff only.
pub fn predicted_recursion_toffoli(cfg: &MultiplierConfig, cost: &CostModel) -> u64 {
    let ipw = cfg.input_piece_width();
    let opw = cfg.output_piece_width();
    let piece_product: u64 = (0..ipw)
        .map(|row| cost.ctrl_add_cost(ipw.min(opw.saturating_sub(row))))
        .sum();

    // Sub-products only ever have a power-of-two piece count, so walk the
    // sizes upward from the base case.
    let mut k = 1;
    let mut level = piece_product;
    while k < cfg.pieces() && k < cfg.base_case_pieces() {
        k *= 2;
        level = (k * k) as u64 * piece_product;
    }
    if k > cfg.base_case_pieces() {
        // base_case_pieces is not a power of two; the base case is the
        // largest power of two not above it.
        k /= 2;
        level = (k * k) as u64 * piece_product;
    }
    while k < cfg.pieces() {
        k *= 2;
        let h = k / 2;
        let scaling = 2 * (2 * k - h) as u64 * cost.add_cost(opw);
        let input_sums = 4 * h as u64 * cost.add_cost(ipw);
        level = scaling + input_sums + 3 * level;
    }
    level
}

/// Toffolis of folding the output pieces into the 2n-bit target. Pieces
/// are clipped at the top of the target, so this term depends on `n`.
pub fn predicted_fold_toffoli(cfg: &MultiplierConfig, cost: &CostModel) -> u64 {
    let opw = cfg.output_piece_width();
    let two_n = 2 * cfg.n();
    (0..cfg.output_piece_count())
        .map(|i| i * cfg.word_bits())
        .take_while(|&offset| offset < two_n)
        .map(|offset| cost.add_cost(opw.min(two_n - offset)))
        .sum()
}

/// Exact Toffoli total of the full-width schoolbook multiply-accumulate.
pub fn predicted_schoolbook_toffoli(n: usize, cost: &CostModel) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("operands need at least one bit".into()));
    }
    Ok((0..n)
        .map(|row| cost.ctrl_add_cost(n.min(2 * n - row)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpacePrediction {
    /// Padded bits of one operand.
    pub input_bits: u64,
    /// Padded bits of the temporary output.
    pub output_bits: u64,
    /// Peak workspace of a single adder.
    pub adder_ancilla_bits: u64,
    /// Operands, target, both padded inputs, padded output and adder
    /// workspace, all live at once.
    pub total_high_water: u64,
}

pub fn predicted_space_bits(n: usize, cost: &CostModel) -> Result<SpacePrediction> {
    let cfg = choose_parameters(n)?;
    let input_bits = (cfg.pieces() * (cfg.word_bits() + cfg.lg_pieces())) as u64;
    let output_bits = (2 * cfg.pieces() * (2 * cfg.word_bits() + 3 * cfg.lg_pieces())) as u64;
    let adder_ancilla_bits = cost.ancilla_add(cfg.output_piece_width());
    Ok(SpacePrediction {
        input_bits,
        output_bits,
        adder_ancilla_bits,
        total_high_water: 4 * n as u64 + 2 * input_bits + output_bits + adder_ancilla_bits,
    })
}

/// Peak bits of the schoolbook multiply-accumulate, operands included.
pub fn predicted_schoolbook_space_bits(n: usize, cost: &CostModel) -> u64 {
    4 * n as u64 + cost.ancilla_add(n)
}

/// Least-squares slope of `lg(count)` against `lg(n)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "slope fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "slope fit needs positive values, got ({x}, {y})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y.log2())).collect();
    let len = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "slope fit needs two distinct sizes".into(),
        ));
    }
    Ok(sxy / sxx)
}

const CLASSICAL_BASE_BITS: u64 = 32;

/// `u * v` by the classical three-product recursion, with native
/// multiplication once both operands fit in 32 bits.
pub fn classical_karatsuba_multiply(u: &BigUint, v: &BigUint) -> BigUint {
    let n = u.bits().max(v.bits());
    if n <= CLASSICAL_BASE_BITS {
        let a = u.iter_u64_digits().next().unwrap_or(0);
        let b = v.iter_u64_digits().next().unwrap_or(0);
        return BigUint::from(a * b);
    }
    let pivot = n >> 1;
    let mask = (BigUint::one() << pivot) - 1u32;
    let (a, b) = (u & &mask, u >> pivot);
    let (x, y) = (v & &mask, v >> pivot);

    let low = classical_karatsuba_multiply(&a, &x);
    let high = classical_karatsuba_multiply(&b, &y);
    let sum = classical_karatsuba_multiply(&(a + b), &(x + y));
    // ay + bx = (a+b)(x+y) - ax - by
    let middle = sum - &low - &high;

    let mut total = low;
    if !middle.is_zero() {
        total += middle << pivot;
    }
    total + (high << (2 * pivot))
}
