//! Per-level invariants of the inline Karatsuba recursion, checked by
//! instrumenting every call against brute-force piece arithmetic.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revkara::{
    add_product_into_pieces_with, apply_inverse_scaling, apply_scaling, choose_parameters,
    multiply_add_with, Context, Frame, PieceArray, Probe, Sign,
};

struct Snapshot {
    in1: Vec<BigUint>,
    in2: Vec<BigUint>,
    out: Vec<BigUint>,
}

/// Checks, for every frame, that inputs come back unchanged and that each
/// output piece moved by exactly `sign * c_i` (mod its width), where `c_i`
/// is the i-th coefficient of the piece-wise product.
#[derive(Default)]
struct ContractProbe {
    stack: Vec<Snapshot>,
    frames_checked: usize,
}

fn weighted(values: &[BigUint], stride: usize) -> BigUint {
    values
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (i, v)| acc + (v << (stride * i)))
}

impl Probe for ContractProbe {
    fn enter(&mut self, ctx: &Context, f: &Frame) {
        self.stack.push(Snapshot {
            in1: f.in1.values(ctx).unwrap(),
            in2: f.in2.values(ctx).unwrap(),
            out: f.out.values(ctx).unwrap(),
        });
    }

    fn exit(&mut self, ctx: &Context, f: &Frame) {
        let snap = self.stack.pop().expect("balanced enter/exit");
        assert_eq!(
            f.in1.values(ctx).unwrap(),
            snap.in1,
            "in1 restored at depth {}",
            f.depth
        );
        assert_eq!(
            f.in2.values(ctx).unwrap(),
            snap.in2,
            "in2 restored at depth {}",
            f.depth
        );

        let k = f.in1.len();
        let modulus = BigUint::one() << f.out.piece_width();
        let after = f.out.values(ctx).unwrap();
        let mut deltas = Vec::with_capacity(2 * k);
        for (i, new) in after.iter().enumerate() {
            let coeff: BigUint = (0..k)
                .filter(|j| i >= *j && i - j < k)
                .map(|j| &snap.in1[j] * &snap.in2[i - j])
                .sum();
            let delta = match f.sign {
                Sign::Plus => (new + &modulus - &snap.out[i]) % &modulus,
                Sign::Minus => (&snap.out[i] + &modulus - new) % &modulus,
            };
            assert_eq!(delta, coeff, "piece {i} at depth {}", f.depth);
            deltas.push(delta);
        }
        let stride = f.out.stride();
        assert_eq!(
            weighted(&deltas, stride),
            weighted(&snap.in1, stride) * weighted(&snap.in2, stride)
        );
        self.frames_checked += 1;
    }
}

fn random_pieces(
    ctx: &mut Context,
    rng: &mut ChaCha8Rng,
    count: usize,
    width: usize,
    stride: usize,
    value_bits: usize,
) -> PieceArray {
    let arr = PieceArray::allocate(ctx, count, width, stride).unwrap();
    let vals: Vec<BigUint> = (0..count)
        .map(|_| BigUint::from(rng.gen::<u64>() >> (64 - value_bits)))
        .collect();
    arr.load(ctx, &vals).unwrap();
    arr
}

#[test]
fn weighted_sum_contract_and_input_restoration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in [1usize, 2, 4, 8] {
        let lg = k.trailing_zeros() as usize;
        for w in 1..=3usize {
            let (ipw, opw) = (w + lg, 2 * w + 3 * lg);
            let mut probe = ContractProbe::default();
            for case in 0..1000 {
                let mut ctx = Context::default();
                let in1 = random_pieces(&mut ctx, &mut rng, k, ipw, w, w);
                let in2 = random_pieces(&mut ctx, &mut rng, k, ipw, w, w);
                let out = random_pieces(&mut ctx, &mut rng, 2 * k, opw, w, opw);
                let sign = if case % 2 == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                add_product_into_pieces_with(&mut ctx, &in1, &in2, &out, sign, 1, &mut probe)
                    .unwrap();
            }
            let frames_per_call = (3usize.pow(lg as u32) * 3 - 1) / 2;
            assert_eq!(probe.frames_checked, 1000 * frames_per_call, "k={k} w={w}");
        }
    }
}

#[test]
fn zeroed_output_receives_exact_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in [1usize, 2, 4, 8] {
        let lg = k.trailing_zeros() as usize;
        for w in 1..=3usize {
            for _ in 0..1000 {
                let mut ctx = Context::default();
                let in1 = random_pieces(&mut ctx, &mut rng, k, w + lg, w, w);
                let in2 = random_pieces(&mut ctx, &mut rng, k, w + lg, w, w);
                let out = PieceArray::allocate(&mut ctx, 2 * k, 2 * w + 3 * lg, w).unwrap();
                let expected = in1.logical_value(&ctx).unwrap() * in2.logical_value(&ctx).unwrap();
                add_product_into_pieces_with(
                    &mut ctx,
                    &in1,
                    &in2,
                    &out,
                    Sign::Plus,
                    1,
                    &mut revkara::NoProbe,
                )
                .unwrap();
                assert_eq!(out.logical_value(&ctx).unwrap(), expected);
            }
        }
    }
}

#[test]
fn scaling_loops_invert_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in [1usize, 2, 4, 8] {
        let lg = k.trailing_zeros() as usize;
        for w in 1..=3usize {
            let opw = 2 * w + 3 * lg;
            for _ in 0..1000 {
                let mut ctx = Context::default();
                let out = random_pieces(&mut ctx, &mut rng, 2 * k, opw, w, opw);
                let before = ctx.buffer(out.buffer()).unwrap().clone();
                let h = (k / 2).max(1);
                apply_inverse_scaling(&mut ctx, &out, h).unwrap();
                apply_scaling(&mut ctx, &out, h).unwrap();
                assert_eq!(ctx.buffer(out.buffer()).unwrap(), &before);
            }
        }
    }
}

/// Records the largest base-case factor relative to the bound implied by
/// how many `a + b` sums are stacked on the current path.
struct BoundProbe {
    word_bits: usize,
    input_piece_width: usize,
    base_cases: usize,
}

impl Probe for BoundProbe {
    fn base_case(&mut self, ctx: &Context, f: &Frame) {
        let limit = ((BigUint::one() << self.word_bits) - 1u32) << f.summed;
        for arr in [f.in1, f.in2] {
            for v in arr.values(ctx).unwrap() {
                assert!(v <= limit, "factor {v} exceeds {limit}");
                assert!(v.bits() as usize <= self.input_piece_width);
            }
        }
        self.base_cases += 1;
    }
}

#[test]
fn base_case_factors_stay_within_padding() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in [1usize, 5, 16, 33, 64, 100, 255] {
        let cfg = choose_parameters(n).unwrap();
        for _ in 0..20 {
            let mut ctx = Context::default();
            let t = ctx.alloc(2 * n).unwrap();
            let u = ctx.alloc(n).unwrap();
            let v = ctx.alloc(n).unwrap();
            // all-ones operands drive the sums to their maximum
            let all = (BigUint::one() << n) - 1u32;
            let uv = if rng.gen_bool(0.3) {
                all.clone()
            } else {
                num_bigint::RandBigInt::gen_biguint(&mut rng, n as u64)
            };
            ctx.load(u, &uv).unwrap();
            ctx.load(v, &all).unwrap();
            let mut probe = BoundProbe {
                word_bits: cfg.word_bits(),
                input_piece_width: cfg.input_piece_width(),
                base_cases: 0,
            };
            multiply_add_with(&mut ctx, &cfg, t, u, v, Sign::Plus, &mut probe).unwrap();
            assert_eq!(probe.base_cases, 2 * 3usize.pow(cfg.lg_pieces() as u32));
            assert_eq!(ctx.read(t).unwrap(), &uv * &all);
        }
    }
}
