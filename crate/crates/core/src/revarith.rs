//! Reversible arithmetic primitives with Toffoli accounting.
//!
//! Every primitive here is its own adjoint up to the [`Sign`] flag: running
//! an operation with `Sign::Plus` and then with `Sign::Minus` on the same
//! windows restores every bit. Charges depend only on window widths.

use std::ops::Neg;

use num_bigint::BigUint;
use num_traits::One;

use crate::bitbuf::{mask128, Window};
use crate::context::Context;
use crate::error::{Error, Result};

/// Direction of an accumulation: `+=` or `-=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        self.flip()
    }
}

/// `bits -> per_bit * bits + constant`, with zero width always costing zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Affine {
    pub per_bit: u64,
    pub constant: u64,
}

impl Affine {
    pub const fn new(per_bit: u64, constant: u64) -> Self {
        Self { per_bit, constant }
    }

    #[inline]
    pub fn at(&self, bits: usize) -> u64 {
        if bits == 0 {
            0
        } else {
            self.per_bit * bits as u64 + self.constant
        }
    }
}

/// Gate and workspace charges for the adders everything else is built from.
///
/// The default prices an in-place ripple-carry addition of a `k`-bit source
/// at `2k` Toffolis, its singly-controlled form at `2k + 1`, and assumes one
/// ancilla bit of workspace for either.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostModel {
    pub add: Affine,
    pub ctrl_add: Affine,
    pub adder_ancilla: Affine,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            add: Affine::new(2, 0),
            ctrl_add: Affine::new(2, 1),
            adder_ancilla: Affine::new(0, 1),
        }
    }
}

impl CostModel {
    #[inline]
    pub fn add_cost(&self, bits: usize) -> u64 {
        self.add.at(bits)
    }

    #[inline]
    pub fn ctrl_add_cost(&self, bits: usize) -> u64 {
        self.ctrl_add.at(bits)
    }

    #[inline]
    pub fn ancilla_add(&self, bits: usize) -> u64 {
        self.adder_ancilla.at(bits)
    }

    /// Charge for a shift-and-add product: one controlled addition of
    /// `min(f2_bits, target_bits - i)` bits for each bit `i` of the first
    /// factor that still lands inside the target.
    pub fn schoolbook_cost(&self, f1_bits: usize, f2_bits: usize, target_bits: usize) -> u64 {
        let rows = f1_bits.min(target_bits) as u64;
        let (f2, t) = (f2_bits as u64, target_bits as u64);
        if rows == 0 || f2 == 0 {
            return 0;
        }
        // Rows 0..full add all f2 bits; the rest are clipped to t - i.
        let full = if t >= f2 { (t - f2 + 1).min(rows) } else { 0 };
        let clipped: u64 = if full < rows {
            // sum over i in full..rows of (t - i)
            let count = rows - full;
            count * t - (full + rows - 1) * count / 2
        } else {
            0
        };
        let total_bits = full * f2 + clipped;
        self.ctrl_add.per_bit * total_bits + self.ctrl_add.constant * rows
    }
}

#[inline]
fn charge_adder(ctx: &mut Context, toffoli: u64, ancilla_width: usize) -> Result<()> {
    let (_, log, cost) = ctx.parts_mut();
    let ancilla = cost.ancilla_add(ancilla_width);
    log.record_toffoli(toffoli);
    log.track_alloc(ancilla);
    log.track_free(ancilla)
}

/// `target += sign * source`, modulo `2^width(target)`.
///
/// A source wider than the target is truncated to the target width. The
/// two windows must not share any bit, including being the same window.
pub fn plus_equal(ctx: &mut Context, target: Window, source: Window, sign: Sign) -> Result<()> {
    if target.overlaps(&source) {
        return Err(Error::Aliasing(target, source));
    }
    let width = target.width().min(source.width());
    let tw = target.width();
    if tw <= 128 {
        let (regs, _, _) = ctx.parts_mut();
        let s = regs
            .buffer(source.buffer())?
            .read_u128(source.offset(), width);
        let buf = regs.buffer_mut(target.buffer())?;
        let old = buf.read_u128(target.offset(), tw);
        let new = match sign {
            Sign::Plus => old.wrapping_add(s),
            Sign::Minus => old.wrapping_sub(s),
        };
        buf.write_u128(target.offset(), tw, new & mask128(tw));
    } else {
        let (regs, _, _) = ctx.parts_mut();
        let s = regs
            .buffer(source.buffer())?
            .read_big(source.offset(), width);
        let buf = regs.buffer_mut(target.buffer())?;
        let old = buf.read_big(target.offset(), tw);
        let new = accumulate_big(old, &s, sign, tw);
        buf.write_big(target.offset(), tw, &new);
    }
    let cost = ctx.cost().add_cost(width);
    charge_adder(ctx, cost, width)
}

/// `(old + sign * delta) mod 2^bits` for `delta < 2^bits`.
fn accumulate_big(old: BigUint, delta: &BigUint, sign: Sign, bits: usize) -> BigUint {
    let modulus = BigUint::one() << bits;
    match sign {
        Sign::Plus => (old + delta) % &modulus,
        Sign::Minus => (old + &modulus - delta) % &modulus,
    }
}

/// `target += sign * f1 * f2`, modulo `2^width(target)`, by schoolbook
/// shift-and-add. The three windows must be pairwise disjoint.
pub fn plus_equal_product_schoolbook(
    ctx: &mut Context,
    target: Window,
    f1: Window,
    f2: Window,
    sign: Sign,
) -> Result<()> {
    for (a, b) in [(target, f1), (target, f2), (f1, f2)] {
        if a.overlaps(&b) {
            return Err(Error::Aliasing(a, b));
        }
    }
    let tw = target.width();
    {
        let (regs, _, _) = ctx.parts_mut();
        if f1.width() <= 64 && f2.width() <= 64 && tw <= 128 {
            let a = regs.buffer(f1.buffer())?.read_u128(f1.offset(), f1.width());
            let b = regs.buffer(f2.buffer())?.read_u128(f2.offset(), f2.width());
            let product = a * b;
            let buf = regs.buffer_mut(target.buffer())?;
            let old = buf.read_u128(target.offset(), tw);
            let new = match sign {
                Sign::Plus => old.wrapping_add(product),
                Sign::Minus => old.wrapping_sub(product),
            };
            buf.write_u128(target.offset(), tw, new & mask128(tw));
        } else {
            let a = regs.read_uint(f1)?;
            let b = regs.read_uint(f2)?;
            let product = (a * b) % (BigUint::one() << tw);
            let buf = regs.buffer_mut(target.buffer())?;
            let old = buf.read_big(target.offset(), tw);
            let new = accumulate_big(old, &product, sign, tw);
            buf.write_big(target.offset(), tw, &new);
        }
    }
    let cost = ctx.cost().schoolbook_cost(f1.width(), f2.width(), tw);
    charge_adder(ctx, cost, f2.width().min(tw))
}

/// `target ^= source` on the low `min(width)` bits. Built from CNOTs only,
/// so no Toffoli is charged. Used to copy into freshly zeroed registers.
pub fn xor_into(ctx: &mut Context, target: Window, source: Window) -> Result<()> {
    if target.overlaps(&source) {
        return Err(Error::Aliasing(target, source));
    }
    let width = target.width().min(source.width());
    let (regs, _, _) = ctx.parts_mut();
    let chunks = regs
        .buffer(source.buffer())?
        .read_chunks(source.offset(), width);
    regs.buffer_mut(target.buffer())?
        .xor_chunks(target.offset(), width, &chunks);
    Ok(())
}
