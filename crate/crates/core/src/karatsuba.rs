//! Space-efficient reversible Karatsuba multiply-accumulate.
//!
//! Inputs are split into `m` padded words ("pieces") of logical width `w`.
//! The recursion never stores a partial product: each of the three
//! half-size products is accumulated straight into a sub-range of the output
//! pieces. The `(1 - 2^(w*h))` factors that Karatsuba attaches to `a*x` and
//! `b*y` are applied by temporarily dividing the output by that factor (an
//! ascending self-addition at stride `h`), accumulating, and multiplying it
//! back (the matching descending self-subtraction). `a + b` and `x + y` are
//! stored over `a` and `x` for the third product and subtracted out again.
//!
//! Padding keeps every piece wide enough that no carry ever has to cross a
//! piece boundary: input pieces are `w + lg m` bits, output pieces
//! `2w + 3 lg m` bits. At the top level the padded pieces are folded into
//! the real target, and the whole recursion is then run again with the
//! opposite sign to return the temporary register to zero.

use std::ops::Range;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bitbuf::{BufferId, Window};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::revarith::{plus_equal, plus_equal_product_schoolbook, xor_into, Sign};
use crate::tracer::Phase;

pub const DEFAULT_BASE_CASE_PIECES: usize = 1;

/// Word layout of one multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiplierConfig {
    n: usize,
    word_bits: usize,
    pieces: usize,
    base_case_pieces: usize,
}

impl MultiplierConfig {
    /// `n`-bit operands split into `pieces` words of `word_bits` bits.
    pub fn new(n: usize, word_bits: usize, pieces: usize) -> Result<Self> {
        if n == 0 || word_bits == 0 {
            return Err(Error::InvalidInput(format!(
                "need n >= 1 and w >= 1, got n={n} w={word_bits}"
            )));
        }
        if !pieces.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "piece count {pieces} is not a power of two"
            )));
        }
        if word_bits
            .checked_mul(pieces)
            .is_none_or(|covered| covered < n)
        {
            return Err(Error::InvalidInput(format!(
                "{pieces} words of {word_bits} bits do not cover {n} bits"
            )));
        }
        Ok(Self {
            n,
            word_bits,
            pieces,
            base_case_pieces: DEFAULT_BASE_CASE_PIECES,
        })
    }

    /// Recursion stops once a sub-product has at most this many pieces.
    pub fn with_base_case_pieces(mut self, pieces: usize) -> Result<Self> {
        if pieces == 0 {
            return Err(Error::InvalidInput(
                "base case needs at least one piece".into(),
            ));
        }
        self.base_case_pieces = pieces;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word_bits(&self) -> usize {
        self.word_bits
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn lg_pieces(&self) -> usize {
        self.pieces.trailing_zeros() as usize
    }

    pub fn base_case_pieces(&self) -> usize {
        self.base_case_pieces
    }

    pub fn input_piece_width(&self) -> usize {
        self.word_bits + self.lg_pieces()
    }

    pub fn output_piece_width(&self) -> usize {
        2 * self.word_bits + 3 * self.lg_pieces()
    }

    pub fn output_piece_count(&self) -> usize {
        2 * self.pieces
    }

    /// Bits of one padded operand.
    pub fn padded_input_bits(&self) -> usize {
        self.pieces * self.input_piece_width()
    }

    /// Bits of the padded temporary output.
    pub fn padded_output_bits(&self) -> usize {
        self.output_piece_count() * self.output_piece_width()
    }
}

/// `w = max(1, floor(lg n))` and `m` the smallest power of two with
/// `m * w >= n`.
pub fn choose_parameters(n: usize) -> Result<MultiplierConfig> {
    if n == 0 {
        return Err(Error::InvalidInput("operands need at least one bit".into()));
    }
    let w = (n.ilog2() as usize).max(1);
    let m = n.div_ceil(w).next_power_of_two();
    MultiplierConfig::new(n, w, m)
}

/// Equal-width, disjoint pieces laid out back to back in one register.
/// Piece `i` carries logical weight `2^(stride * i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PieceArray {
    buffer: BufferId,
    start: usize,
    piece_width: usize,
    count: usize,
    stride: usize,
}

impl PieceArray {
    /// Allocates `count` zeroed pieces in a fresh register.
    pub fn allocate(
        ctx: &mut Context,
        count: usize,
        piece_width: usize,
        stride: usize,
    ) -> Result<Self> {
        if count == 0 || piece_width == 0 {
            return Err(Error::Structure(format!(
                "cannot allocate {count} pieces of {piece_width} bits"
            )));
        }
        let buffer = ctx.alloc_buffer(count * piece_width);
        Ok(Self {
            buffer,
            start: 0,
            piece_width,
            count,
            stride,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn piece_width(&self) -> usize {
        self.piece_width
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn buffer(&self) -> BufferId {
        self.buffer
    }

    /// Bit range covered in the backing register.
    pub fn bit_range(&self) -> Range<usize> {
        self.start..self.start + self.count * self.piece_width
    }

    #[inline]
    pub fn piece(&self, i: usize) -> Window {
        assert!(i < self.count, "piece {i} out of {}", self.count);
        Window::from_parts(
            self.buffer,
            self.start + i * self.piece_width,
            self.piece_width,
        )
    }

    pub fn pieces(&self) -> impl Iterator<Item = Window> + '_ {
        (0..self.count).map(|i| self.piece(i))
    }

    /// Sub-array on the same register; weights restart at the slice start.
    #[inline]
    pub fn slice(&self, range: Range<usize>) -> PieceArray {
        assert!(
            range.start <= range.end && range.end <= self.count,
            "slice {range:?} out of {}",
            self.count
        );
        PieceArray {
            buffer: self.buffer,
            start: self.start + range.start * self.piece_width,
            piece_width: self.piece_width,
            count: range.end - range.start,
            stride: self.stride,
        }
    }

    pub fn overlaps(&self, other: &PieceArray) -> bool {
        let (a, b) = (self.bit_range(), other.bit_range());
        self.buffer == other.buffer && a.start < b.end && b.start < a.end
    }

    pub fn overlaps_window(&self, w: &Window) -> bool {
        let r = self.bit_range();
        self.buffer == w.buffer() && r.start < w.end() && w.offset() < r.end
    }

    pub fn values(&self, ctx: &Context) -> Result<Vec<BigUint>> {
        self.pieces().map(|p| ctx.read(p)).collect()
    }

    /// `sum_i value(piece_i) * 2^(stride * i)`, without any reduction.
    pub fn logical_value(&self, ctx: &Context) -> Result<BigUint> {
        let mut total = BigUint::zero();
        for (i, v) in self.values(ctx)?.into_iter().enumerate() {
            total += v << (self.stride * i);
        }
        Ok(total)
    }

    /// Overwrites the pieces with `values` (each reduced to the piece width).
    pub fn load(&self, ctx: &mut Context, values: &[BigUint]) -> Result<()> {
        if values.len() != self.count {
            return Err(Error::Structure(format!(
                "{} values for {} pieces",
                values.len(),
                self.count
            )));
        }
        for (i, v) in values.iter().enumerate() {
            ctx.load(self.piece(i), v)?;
        }
        Ok(())
    }

    /// Releases the backing register. Only valid for an array that spans
    /// the whole register, and every bit must already be zero.
    pub fn release(self, ctx: &mut Context) -> Result<()> {
        let len = ctx.buffer(self.buffer)?.len();
        if self.start != 0 || self.count * self.piece_width != len {
            return Err(Error::Structure(
                "only a whole piece register can be released".into(),
            ));
        }
        ctx.release(self.buffer)
    }
}

/// One level of the recursion, as seen by a [`Probe`].
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub in1: PieceArray,
    pub in2: PieceArray,
    pub out: PieceArray,
    pub sign: Sign,
    pub depth: usize,
    /// Number of enclosing levels whose inputs currently hold `a + b`
    /// in place of `a`.
    pub summed: usize,
}

/// Observation hooks for the recursion. All methods default to no-ops.
pub trait Probe {
    fn enter(&mut self, _ctx: &Context, _frame: &Frame) {}
    fn exit(&mut self, _ctx: &Context, _frame: &Frame) {}
    fn base_case(&mut self, _ctx: &Context, _frame: &Frame) {}
}

pub struct NoProbe;

impl Probe for NoProbe {}

impl<P: Probe + ?Sized> Probe for &mut P {
    fn enter(&mut self, ctx: &Context, frame: &Frame) {
        (**self).enter(ctx, frame)
    }
    fn exit(&mut self, ctx: &Context, frame: &Frame) {
        (**self).exit(ctx, frame)
    }
    fn base_case(&mut self, ctx: &Context, frame: &Frame) {
        (**self).base_case(ctx, frame)
    }
}

/// Copies the `w`-bit words of `src` into fresh `w + lg m`-bit pieces.
pub fn split_into_padded_pieces(
    ctx: &mut Context,
    src: Window,
    cfg: &MultiplierConfig,
) -> Result<PieceArray> {
    if src.width() != cfg.n() {
        return Err(Error::InvalidInput(format!(
            "source has {} bits, config expects {}",
            src.width(),
            cfg.n()
        )));
    }
    let pieces = PieceArray::allocate(ctx, cfg.pieces(), cfg.input_piece_width(), cfg.word_bits())?;
    copy_words(ctx, src, &pieces, cfg)?;
    Ok(pieces)
}

/// Inverse of [`split_into_padded_pieces`]: clears the copies against the
/// unchanged source and releases them.
pub fn unsplit_padded_pieces(
    ctx: &mut Context,
    pieces: PieceArray,
    src: Window,
    cfg: &MultiplierConfig,
) -> Result<()> {
    copy_words(ctx, src, &pieces, cfg)?;
    pieces.release(ctx)
}

fn copy_words(
    ctx: &mut Context,
    src: Window,
    pieces: &PieceArray,
    cfg: &MultiplierConfig,
) -> Result<()> {
    let w = cfg.word_bits();
    for i in 0..pieces.len() {
        let lo = i * w;
        if lo >= cfg.n() {
            break;
        }
        let word = src.sub(lo, w.min(cfg.n() - lo))?;
        xor_into(ctx, pieces.piece(i), word)?;
    }
    Ok(())
}

/// Zeroed temporary output: `2m` pieces of `2w + 3 lg m` bits.
pub fn allocate_output_pieces(ctx: &mut Context, cfg: &MultiplierConfig) -> Result<PieceArray> {
    PieceArray::allocate(
        ctx,
        cfg.output_piece_count(),
        cfg.output_piece_width(),
        cfg.word_bits(),
    )
}

/// `out[i] += out[i - h]` for ascending `i >= h`: divides the piece vector
/// by `1 - 2^(stride * h)` modulo its length.
pub fn apply_inverse_scaling(ctx: &mut Context, out: &PieceArray, h: usize) -> Result<()> {
    for i in h..out.len() {
        plus_equal(ctx, out.piece(i), out.piece(i - h), Sign::Plus)?;
    }
    Ok(())
}

/// `out[i] -= out[i - h]` for descending `i >= h`: multiplies the piece
/// vector by `1 - 2^(stride * h)`. Exact inverse of
/// [`apply_inverse_scaling`].
pub fn apply_scaling(ctx: &mut Context, out: &PieceArray, h: usize) -> Result<()> {
    for i in (h..out.len()).rev() {
        plus_equal(ctx, out.piece(i), out.piece(i - h), Sign::Minus)?;
    }
    Ok(())
}

fn check_structure(in1: &PieceArray, in2: &PieceArray, out: &PieceArray) -> Result<()> {
    let k = in1.len();
    if in2.len() != k {
        return Err(Error::Structure(format!(
            "input piece counts differ: {k} vs {}",
            in2.len()
        )));
    }
    if !k.is_power_of_two() {
        return Err(Error::Structure(format!(
            "input piece count {k} is not a power of two"
        )));
    }
    if out.len() != 2 * k {
        return Err(Error::Structure(format!(
            "output has {} pieces, expected {}",
            out.len(),
            2 * k
        )));
    }
    if in1.overlaps(in2) || out.overlaps(in1) || out.overlaps(in2) {
        return Err(Error::Structure("piece arrays overlap".into()));
    }
    Ok(())
}

/// Adds `sign * U * V` into the output pieces, where `U` and `V` are the
/// weighted piece sums of the inputs. Inputs are restored on return.
///
/// Output pieces change by exactly the coefficients of the piece-wise
/// polynomial product, each modulo the output piece width.
pub fn add_product_into_pieces(
    ctx: &mut Context,
    in1: &PieceArray,
    in2: &PieceArray,
    out: &PieceArray,
    sign: Sign,
) -> Result<()> {
    add_product_into_pieces_with(
        ctx,
        in1,
        in2,
        out,
        sign,
        DEFAULT_BASE_CASE_PIECES,
        &mut NoProbe,
    )
}

pub fn add_product_into_pieces_with<P: Probe>(
    ctx: &mut Context,
    in1: &PieceArray,
    in2: &PieceArray,
    out: &PieceArray,
    sign: Sign,
    base_case_pieces: usize,
    probe: &mut P,
) -> Result<()> {
    check_structure(in1, in2, out)?;
    if base_case_pieces == 0 {
        return Err(Error::Structure(
            "base case needs at least one piece".into(),
        ));
    }
    let frame = Frame {
        in1: *in1,
        in2: *in2,
        out: *out,
        sign,
        depth: 0,
        summed: 0,
    };
    recurse(ctx, frame, base_case_pieces, probe)
}

fn recurse<P: Probe>(ctx: &mut Context, f: Frame, base: usize, probe: &mut P) -> Result<()> {
    probe.enter(ctx, &f);
    let Frame {
        in1,
        in2,
        out,
        sign,
        ..
    } = f;
    let k = in1.len();
    if k <= base {
        probe.base_case(ctx, &f);
        for j in 0..k {
            for l in 0..k {
                plus_equal_product_schoolbook(
                    ctx,
                    out.piece(j + l),
                    in1.piece(j),
                    in2.piece(l),
                    sign,
                )?;
            }
        }
    } else {
        let h = k / 2;
        let child =
            |in1: PieceArray, in2: PieceArray, out: PieceArray, sign: Sign, summed: usize| Frame {
                in1,
                in2,
                out,
                sign,
                depth: f.depth + 1,
                summed,
            };
        let (a, b) = (in1.slice(0..h), in1.slice(h..k));
        let (x, y) = (in2.slice(0..h), in2.slice(h..k));

        // out += a*x*(1 - 2^wh) - b*y*2^wh*(1 - 2^wh)
        apply_inverse_scaling(ctx, &out, h)?;
        recurse(
            ctx,
            child(a, x, out.slice(0..2 * h), sign, f.summed),
            base,
            probe,
        )?;
        recurse(
            ctx,
            child(b, y, out.slice(h..3 * h), -sign, f.summed),
            base,
            probe,
        )?;
        apply_scaling(ctx, &out, h)?;

        // out += (a + b)*(x + y)*2^wh
        for i in 0..h {
            plus_equal(ctx, a.piece(i), b.piece(i), Sign::Plus)?;
            plus_equal(ctx, x.piece(i), y.piece(i), Sign::Plus)?;
        }
        recurse(
            ctx,
            child(a, x, out.slice(h..3 * h), sign, f.summed + 1),
            base,
            probe,
        )?;
        for i in 0..h {
            plus_equal(ctx, a.piece(i), b.piece(i), Sign::Minus)?;
            plus_equal(ctx, x.piece(i), y.piece(i), Sign::Minus)?;
        }
    }
    probe.exit(ctx, &f);
    Ok(())
}

/// `target += sign * sum_i piece_i * 2^(w * i)` modulo `2^width(target)`,
/// one addition per piece that lands inside the target.
pub fn fold_pieces_into_target(
    ctx: &mut Context,
    out_pieces: &PieceArray,
    target: Window,
    cfg: &MultiplierConfig,
    sign: Sign,
) -> Result<()> {
    if target.width() != 2 * cfg.n() {
        return Err(Error::InvalidInput(format!(
            "target has {} bits, expected {}",
            target.width(),
            2 * cfg.n()
        )));
    }
    if let Some(p) = out_pieces.pieces().find(|p| p.overlaps(&target)) {
        return Err(Error::Aliasing(p, target));
    }
    let w = cfg.word_bits();
    for (i, piece) in out_pieces.pieces().enumerate() {
        let Some(dst) = target.tail(w * i) else {
            break;
        };
        plus_equal(ctx, dst, piece, sign)?;
    }
    Ok(())
}

fn check_operands(target: Window, u: Window, v: Window) -> Result<usize> {
    let n = u.width();
    if v.width() != n {
        return Err(Error::InvalidInput(format!(
            "factor widths differ: {n} vs {}",
            v.width()
        )));
    }
    if target.width() != 2 * n {
        return Err(Error::InvalidInput(format!(
            "target has {} bits, expected {}",
            target.width(),
            2 * n
        )));
    }
    for (a, b) in [(target, u), (target, v), (u, v)] {
        if a.overlaps(&b) {
            return Err(Error::Aliasing(a, b));
        }
    }
    Ok(n)
}

/// `target += sign * u * v` modulo `2^(2n)` using the inline Karatsuba
/// recursion. `u` and `v` are left unchanged and every temporary bit is
/// returned to zero and released.
pub fn multiply_add(
    ctx: &mut Context,
    target: Window,
    u: Window,
    v: Window,
    sign: Sign,
) -> Result<()> {
    let n = check_operands(target, u, v)?;
    let cfg = choose_parameters(n)?;
    multiply_add_with(ctx, &cfg, target, u, v, sign, &mut NoProbe)
}

/// [`multiply_add`] with an explicit layout and a recursion probe.
pub fn multiply_add_with<P: Probe>(
    ctx: &mut Context,
    cfg: &MultiplierConfig,
    target: Window,
    u: Window,
    v: Window,
    sign: Sign,
    probe: &mut P,
) -> Result<()> {
    let n = check_operands(target, u, v)?;
    if n != cfg.n() {
        return Err(Error::InvalidInput(format!(
            "operands have {n} bits, config expects {}",
            cfg.n()
        )));
    }
    let base = cfg.base_case_pieces();
    let outer = ctx.log_mut().enter_phase(Phase::Split);
    let pu = split_into_padded_pieces(ctx, u, cfg)?;
    let pv = split_into_padded_pieces(ctx, v, cfg)?;
    let out = allocate_output_pieces(ctx, cfg)?;

    ctx.log_mut().enter_phase(Phase::Compute);
    add_product_into_pieces_with(ctx, &pu, &pv, &out, Sign::Plus, base, probe)?;

    ctx.log_mut().enter_phase(Phase::Fold);
    fold_pieces_into_target(ctx, &out, target, cfg, sign)?;

    ctx.log_mut().enter_phase(Phase::Uncompute);
    add_product_into_pieces_with(ctx, &pu, &pv, &out, Sign::Minus, base, probe)?;
    out.release(ctx)?;

    ctx.log_mut().enter_phase(Phase::Unsplit);
    unsplit_padded_pieces(ctx, pv, v, cfg)?;
    unsplit_padded_pieces(ctx, pu, u, cfg)?;
    ctx.log_mut().enter_phase(outer);
    Ok(())
}

/// Same contract as [`multiply_add`], as one full-width schoolbook product.
pub fn multiply_add_schoolbook(
    ctx: &mut Context,
    target: Window,
    u: Window,
    v: Window,
    sign: Sign,
) -> Result<()> {
    check_operands(target, u, v)?;
    let outer = ctx.log_mut().enter_phase(Phase::Compute);
    plus_equal_product_schoolbook(ctx, target, u, v, sign)?;
    ctx.log_mut().enter_phase(outer);
    Ok(())
}
