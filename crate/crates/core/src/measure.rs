//! Metered single multiplications in a fresh context.

use num_bigint::BigUint;

use crate::analysis::{Algorithm, SweepPoint};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::karatsuba::{choose_parameters, multiply_add, multiply_add_schoolbook};
use crate::revarith::{CostModel, Sign};

/// Outcome of [`trace_multiply`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub point: SweepPoint,
    pub result: BigUint,
}

/// Allocates `u`, `v` (n bits) and a 2n-bit target holding `t0`, runs one
/// `target += u * v`, and reports the counts. The registers are charged to
/// the high-water mark like any other bit.
pub fn trace_multiply(
    algorithm: Algorithm,
    n: usize,
    t0: &BigUint,
    u: &BigUint,
    v: &BigUint,
    cost: CostModel,
) -> Result<Trace> {
    if n == 0 {
        return Err(Error::InvalidInput("operands need at least one bit".into()));
    }
    let mut ctx = Context::new(cost);
    let target = ctx.alloc(2 * n)?;
    let ur = ctx.alloc(n)?;
    let vr = ctx.alloc(n)?;
    ctx.load(target, t0)?;
    ctx.load(ur, u)?;
    ctx.load(vr, v)?;
    let before = ctx.log().allocated_bits();

    let (w, m) = match algorithm {
        Algorithm::Karatsuba => {
            multiply_add(&mut ctx, target, ur, vr, Sign::Plus)?;
            let cfg = choose_parameters(n)?;
            (cfg.word_bits(), cfg.pieces())
        }
        Algorithm::Schoolbook => {
            multiply_add_schoolbook(&mut ctx, target, ur, vr, Sign::Plus)?;
            (n, 1)
        }
    };
    if ctx.log().allocated_bits() != before {
        return Err(Error::Invariant(format!(
            "{} bits still allocated after the multiplication",
            ctx.log().allocated_bits() - before
        )));
    }
    let report = ctx.log().report();
    Ok(Trace {
        point: SweepPoint {
            algorithm,
            n,
            w,
            m,
            toffoli: report.toffoli,
            high_water_bits: report.high_water_bits,
        },
        result: ctx.read(target)?,
    })
}
