//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! with the measured quantities, then asserts. The line goes straight to
//! the stderr handle so it shows up even when the harness captures output.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revkara::{
    add_product_into_pieces_with, apply_inverse_scaling, apply_scaling, choose_parameters,
    fit_loglog_slope, multiply_add, predicted_schoolbook_toffoli, predicted_toffoli_count,
    trace_multiply, Algorithm, Context, CostModel, Frame, PieceArray, Probe, Sign, Window,
};

fn verdict(id: u32, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id}: {status} {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn factor_regs(ctx: &mut Context, n: usize) -> (Window, Window, Window) {
    let t = ctx.alloc(2 * n).unwrap();
    let u = ctx.alloc(n).unwrap();
    let v = ctx.alloc(n).unwrap();
    (t, u, v)
}

fn traced(alg: Algorithm, n: usize) -> revkara::SweepPoint {
    let one = BigUint::one();
    trace_multiply(alg, n, &one, &one, &one, CostModel::default())
        .unwrap()
        .point
}

#[test]
fn criterion_1_oracle_correctness() {
    let mut exhaustive = 0u64;
    for n in 1..=6usize {
        let mut ctx = Context::default();
        let (t, u, v) = factor_regs(&mut ctx, n);
        let mask = (1u128 << (2 * n)) - 1;
        for a in 0u64..(1 << n) {
            ctx.load(u, &BigUint::from(a)).unwrap();
            for b in 0u64..(1 << n) {
                ctx.load(v, &BigUint::from(b)).unwrap();
                for t0 in 0u64..(1 << (2 * n)) {
                    ctx.load(t, &BigUint::from(t0)).unwrap();
                    multiply_add(&mut ctx, t, u, v, Sign::Plus).unwrap();
                    let got = ctx.read_u128(t).unwrap();
                    let want = (t0 as u128 + a as u128 * b as u128) & mask;
                    if got != want {
                        verdict(1, false, &format!("n={n} t0={t0} u={a} v={b} got {got}"));
                    }
                    exhaustive += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0001);
    let mut random = 0u64;
    for n in [16usize, 64, 256, 1024, 4096] {
        let mut ctx = Context::default();
        let (t, u, v) = factor_regs(&mut ctx, n);
        let modulus = BigUint::one() << (2 * n);
        for _ in 0..1000 {
            let t0 = rng.gen_biguint(2 * n as u64);
            let a = rng.gen_biguint(n as u64);
            let b = rng.gen_biguint(n as u64);
            ctx.load(t, &t0).unwrap();
            ctx.load(u, &a).unwrap();
            ctx.load(v, &b).unwrap();
            multiply_add(&mut ctx, t, u, v, Sign::Plus).unwrap();
            if ctx.read(t).unwrap() != (&t0 + &a * &b) % &modulus {
                verdict(1, false, &format!("n={n} t0={t0} u={a} v={b}"));
            }
            random += 1;
        }
    }
    verdict(
        1,
        true,
        &format!("exhaustive={exhaustive} random={random} mismatches=0"),
    );
}

#[test]
fn criterion_2_reversibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0002);
    let mut cases = 0;
    for n in [8usize, 64, 512] {
        let mut ctx = Context::default();
        let (t, u, v) = factor_regs(&mut ctx, n);
        let baseline = ctx.log().allocated_bits();
        for _ in 0..1000 {
            ctx.load(t, &rng.gen_biguint(2 * n as u64)).unwrap();
            ctx.load(u, &rng.gen_biguint(n as u64)).unwrap();
            ctx.load(v, &rng.gen_biguint(n as u64)).unwrap();
            let before: Vec<_> = [t, u, v]
                .iter()
                .map(|w| ctx.buffer(w.buffer()).unwrap().clone())
                .collect();
            multiply_add(&mut ctx, t, u, v, Sign::Plus).unwrap();
            multiply_add(&mut ctx, t, u, v, Sign::Minus).unwrap();
            let restored = [t, u, v]
                .iter()
                .zip(&before)
                .all(|(w, b)| ctx.buffer(w.buffer()).unwrap() == b);
            if !restored || ctx.log().allocated_bits() != baseline || ctx.regs().live() != 3 {
                verdict(2, false, &format!("n={n} state not restored"));
            }
            cases += 1;
        }
    }
    verdict(2, true, &format!("cases={cases}"));
}

#[test]
fn criterion_3_predictor_matches_tracer() {
    let cost = CostModel::default();
    let sizes: Vec<usize> = (1..=256).chain((9..=14).map(|e| 1 << e)).collect();
    for &n in &sizes {
        let got = traced(Algorithm::Karatsuba, n).toffoli;
        let want = predicted_toffoli_count(n, &cost).unwrap();
        if got != want {
            verdict(3, false, &format!("n={n} traced={got} predicted={want}"));
        }
    }
    verdict(3, true, &format!("sizes={} all equal", sizes.len()));
}

#[test]
fn criterion_4_gate_count_scaling() {
    let cost = CostModel::default();
    let mut kara = Vec::new();
    let mut school = Vec::new();
    for e in 12..=17u32 {
        let n = 1usize << e;
        let k = traced(Algorithm::Karatsuba, n).toffoli;
        assert_eq!(k, predicted_toffoli_count(n, &cost).unwrap());
        let s = predicted_schoolbook_toffoli(n, &cost).unwrap();
        kara.push((n as f64, k as f64));
        school.push((n as f64, s as f64));
    }
    let ks = fit_loglog_slope(&kara).unwrap();
    let ss = fit_loglog_slope(&school).unwrap();
    let ok = (1.47..=1.70).contains(&ks) && (1.90..=2.10).contains(&ss);
    verdict(
        4,
        ok,
        &format!("karatsuba_slope={ks:.4} (want [1.47,1.70]) schoolbook_slope={ss:.4} (want [1.90,2.10])"),
    );
}

#[test]
fn criterion_5_linear_space() {
    let mut ratios = Vec::new();
    for e in 8..=17u32 {
        let n = 1usize << e;
        let hw = traced(Algorithm::Karatsuba, n).high_water_bits;
        ratios.push((n, hw as f64 / n as f64));
    }
    let max = ratios.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min = ratios.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    let flatness = max / min;

    let mut exact_checked = 0;
    let mut exact_violation = None;
    for n in (1usize << 8)..=(1usize << 17) {
        let cfg = choose_parameters(n).unwrap();
        if n.div_ceil(cfg.word_bits()) != cfg.pieces() {
            continue;
        }
        exact_checked += 1;
        if cfg.padded_input_bits() > 2 * n || cfg.padded_output_bits() > 10 * n {
            exact_violation.get_or_insert(n);
        }
    }

    let listing: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}:{r:.3}")).collect();
    let ok = max <= 24.0 && flatness <= 2.5 && exact_violation.is_none();
    verdict(
        5,
        ok,
        &format!(
            "max_ratio={max:.3} (want <=24) flatness={flatness:.3} (want <=2.5) \
             exact_bounds_checked={exact_checked} exact_violation={exact_violation:?} ratios=[{}]",
            listing.join(" ")
        ),
    );
}

#[test]
fn criterion_6_staircase() {
    let a = traced(Algorithm::Karatsuba, 700);
    let b = traced(Algorithm::Karatsuba, 800);
    let pair_ok = (a.w, a.m) == (b.w, b.m) && a.toffoli == b.toffoli;

    let mut buckets: BTreeMap<(usize, usize), Vec<(usize, u64)>> = BTreeMap::new();
    for n in (512..=4096).step_by(64) {
        let p = traced(Algorithm::Karatsuba, n);
        buckets.entry((p.w, p.m)).or_default().push((n, p.toffoli));
    }
    let uneven: Vec<String> = buckets
        .iter()
        .filter(|(_, pts)| pts.iter().any(|p| p.1 != pts[0].1))
        .map(|((w, m), pts)| {
            let lo = pts.iter().map(|p| p.1).min().unwrap();
            let hi = pts.iter().map(|p| p.1).max().unwrap();
            format!("(w={w},m={m}):{lo}..{hi}")
        })
        .collect();
    let ok = pair_ok && uneven.is_empty();
    verdict(
        6,
        ok,
        &format!(
            "n700={} n800={} buckets={} non_constant_buckets=[{}]",
            a.toffoli,
            b.toffoli,
            buckets.len(),
            uneven.join(" ")
        ),
    );
}

#[test]
fn criterion_7_crossover() {
    let cost = CostModel::default();
    // geometric schedule, eight points per octave, 2^8..2^20
    let sizes: Vec<usize> = (64..=160)
        .map(|i| (2f64.powf(i as f64 / 8.0)).round() as usize)
        .collect();
    let mut last_loss = None;
    for &n in &sizes {
        let k = predicted_toffoli_count(n, &cost).unwrap();
        let s = predicted_schoolbook_toffoli(n, &cost).unwrap();
        if k >= s {
            last_loss = Some(n);
        }
    }
    let n_star = match last_loss {
        None => sizes[0],
        Some(l) => match sizes.iter().find(|&&n| n > l) {
            Some(&n) => n,
            None => usize::MAX,
        },
    };
    let n_star_fine = last_loss.map(|l| {
        // refine the boundary between the last losing and first winning grid points
        (l..n_star)
            .rev()
            .find(|&n| {
                predicted_toffoli_count(n, &cost).unwrap()
                    >= predicted_schoolbook_toffoli(n, &cost).unwrap()
            })
            .map_or(l, |n| n + 1)
    });
    let ok = (1_000..=100_000).contains(&n_star);
    verdict(
        7,
        ok,
        &format!(
            "n*={n_star} (grid {}..{}, want [1e3,1e5]) refined_n*={:?}",
            sizes[0],
            sizes[sizes.len() - 1],
            n_star_fine
        ),
    );
}

struct Snapshot {
    in1: Vec<BigUint>,
    in2: Vec<BigUint>,
    out: Vec<BigUint>,
}

#[derive(Default)]
struct Checker {
    stack: Vec<Snapshot>,
    frames: u64,
    failure: Option<String>,
}

impl Probe for Checker {
    fn enter(&mut self, ctx: &Context, f: &Frame) {
        self.stack.push(Snapshot {
            in1: f.in1.values(ctx).unwrap(),
            in2: f.in2.values(ctx).unwrap(),
            out: f.out.values(ctx).unwrap(),
        });
    }

    fn exit(&mut self, ctx: &Context, f: &Frame) {
        let snap = self.stack.pop().unwrap();
        self.frames += 1;
        if self.failure.is_some() {
            return;
        }
        if f.in1.values(ctx).unwrap() != snap.in1 || f.in2.values(ctx).unwrap() != snap.in2 {
            self.failure = Some(format!("inputs not restored at depth {}", f.depth));
            return;
        }
        let k = f.in1.len();
        let w = f.out.stride();
        let modulus = BigUint::one() << f.out.piece_width();
        let after = f.out.values(ctx).unwrap();
        let mut weighted_delta = BigUint::zero();
        for (i, (new, old)) in after.iter().zip(&snap.out).enumerate() {
            let d = match f.sign {
                Sign::Plus => (new + &modulus - old) % &modulus,
                Sign::Minus => (old + &modulus - new) % &modulus,
            };
            weighted_delta += d << (w * i);
        }
        let value = |v: &[BigUint]| {
            v.iter()
                .enumerate()
                .fold(BigUint::zero(), |acc, (i, p)| acc + (p << (w * i)))
        };
        if weighted_delta != value(&snap.in1) * value(&snap.in2) {
            self.failure = Some(format!("weighted sum off at depth {} k={k}", f.depth));
        }
    }
}

#[test]
fn criterion_8_recursion_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let mut checker = Checker::default();
    let mut scaling_failures = 0;
    let mut cases = 0;
    for k in [1usize, 2, 4, 8] {
        let lg = k.trailing_zeros() as usize;
        for w in 1..=3usize {
            let (ipw, opw) = (w + lg, 2 * w + 3 * lg);
            for case in 0..1000 {
                let mut ctx = Context::default();
                let mut fill = |ctx: &mut Context, count: usize, width: usize, bits: usize| {
                    let arr = PieceArray::allocate(ctx, count, width, w).unwrap();
                    let vals: Vec<BigUint> = (0..count)
                        .map(|_| BigUint::from(rng.gen::<u64>() >> (64 - bits)))
                        .collect();
                    arr.load(ctx, &vals).unwrap();
                    arr
                };
                let in1 = fill(&mut ctx, k, ipw, w);
                let in2 = fill(&mut ctx, k, ipw, w);
                let out = fill(&mut ctx, 2 * k, opw, opw);
                let sign = if case % 2 == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                add_product_into_pieces_with(&mut ctx, &in1, &in2, &out, sign, 1, &mut checker)
                    .unwrap();

                let before = ctx.buffer(out.buffer()).unwrap().clone();
                let h = (k / 2).max(1);
                apply_inverse_scaling(&mut ctx, &out, h).unwrap();
                apply_scaling(&mut ctx, &out, h).unwrap();
                if ctx.buffer(out.buffer()).unwrap() != &before {
                    scaling_failures += 1;
                }
                cases += 1;
            }
        }
    }
    let ok = checker.failure.is_none() && scaling_failures == 0;
    verdict(
        8,
        ok,
        &format!(
            "cases={cases} frames={} contract_failure={:?} scaling_failures={scaling_failures}",
            checker.frames, checker.failure
        ),
    );
}
