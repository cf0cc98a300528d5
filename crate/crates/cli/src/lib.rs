//! Command-line driver for the reversible multiplier: property verification,
//! single metered traces and CSV sweeps.

use std::io::Write;

use clap::{Parser, Subcommand};
use num_bigint::{BigUint, RandBigInt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use revkara::{trace_multiply, Algorithm, Context, CostModel, Sign, SweepPoint, Window};

pub const CSV_HEADER: &str = "algorithm,n,w,m,toffoli,bits_high_water";

/// Sizes used by `verify` beyond the exhaustive range.
pub const RANDOM_SIZES: [usize; 8] = [9, 16, 31, 64, 100, 128, 256, 1024];

#[derive(Debug, Parser)]
#[command(
    name = "revkara",
    version,
    about = "Reversible Karatsuba multiplier toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check multiply-accumulate against native arithmetic.
    Verify {
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(0..=12))]
        max_exhaustive_n: u32,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Meter a single multiplication and print one CSV row.
    Trace {
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long, default_value = "karatsuba")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Meter a geometric range of sizes and print CSV.
    Sweep {
        #[arg(long, value_parser = positive)]
        min: usize,
        #[arg(long, value_parser = positive)]
        max: usize,
        #[arg(long, default_value_t = 2.0)]
        factor: f64,
        #[arg(long, value_delimiter = ',', default_value = "karatsuba,schoolbook")]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Range, growth factor and algorithm subset for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub factor: f64,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_min == 0 {
            return Err("--min must be at least 1".into());
        }
        if self.n_max < self.n_min {
            return Err(format!(
                "--max {} is below --min {}",
                self.n_max, self.n_min
            ));
        }
        if !(self.factor.is_finite() && self.factor > 1.0) {
            return Err(format!("--factor must exceed 1, got {}", self.factor));
        }
        if self.algorithms.is_empty() {
            return Err("--algorithms is empty".into());
        }
        Ok(())
    }

    /// Geometric schedule `round(n_min * factor^i)` up to `n_max`, deduplicated.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        let mut i = 0i32;
        loop {
            let x = (self.n_min as f64 * self.factor.powi(i)).round();
            if x > self.n_max as f64 {
                break;
            }
            let n = x as usize;
            if out.last() != Some(&n) {
                out.push(n);
            }
            i += 1;
        }
        out
    }
}

pub fn csv_row(p: &SweepPoint) -> String {
    format!(
        "{},{},{},{},{},{}",
        p.algorithm, p.n, p.w, p.m, p.toffoli, p.high_water_bits
    )
}

fn random_operands(rng: &mut ChaCha8Rng, n: usize) -> (BigUint, BigUint, BigUint) {
    (
        rng.gen_biguint(2 * n as u64),
        rng.gen_biguint(n as u64),
        rng.gen_biguint(n as u64),
    )
}

pub fn trace_point(
    algorithm: Algorithm,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> revkara::Result<SweepPoint> {
    let (t0, u, v) = random_operands(rng, n);
    Ok(trace_multiply(algorithm, n, &t0, &u, &v, CostModel::default())?.point)
}

/// One row per (n, algorithm), in ascending n and the requested algorithm order.
pub fn sweep(spec: &SweepSpec) -> revkara::Result<Vec<SweepPoint>> {
    let mut rows = Vec::new();
    for n in spec.sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ n as u64);
        for &alg in &spec.algorithms {
            rows.push(trace_point(alg, n, &mut rng)?);
        }
    }
    Ok(rows)
}

/// The operation under verification: `t += sign * u * v`.
pub type Multiplier = fn(&mut Context, Window, Window, Window, Sign) -> revkara::Result<()>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub n: usize,
    pub t0: BigUint,
    pub u: BigUint,
    pub v: BigUint,
    pub got: Option<BigUint>,
    pub reason: String,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "n={} t0={} u={} v={}: {}",
            self.n, self.t0, self.u, self.v, self.reason
        )?;
        if let Some(g) = &self.got {
            write!(f, " (got {g})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub exhaustive_cases: u64,
    pub random_cases: u64,
    pub counterexample: Option<Counterexample>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

struct Bench {
    ctx: Context,
    t: Window,
    u: Window,
    v: Window,
    modulus: BigUint,
    n: usize,
}

impl Bench {
    fn new(n: usize) -> Bench {
        let mut ctx = Context::default();
        let t = ctx.alloc(2 * n).expect("n >= 1");
        let u = ctx.alloc(n).expect("n >= 1");
        let v = ctx.alloc(n).expect("n >= 1");
        Bench {
            ctx,
            t,
            u,
            v,
            modulus: BigUint::from(1u32) << (2 * n),
            n,
        }
    }

    /// Forward product against the oracle, then the inverse must restore
    /// every register and the allocation count.
    fn check(
        &mut self,
        mul: Multiplier,
        t0: &BigUint,
        u: &BigUint,
        v: &BigUint,
    ) -> Option<Counterexample> {
        let fail = |got, reason: &str| Counterexample {
            n: self.n,
            t0: t0.clone(),
            u: u.clone(),
            v: v.clone(),
            got,
            reason: reason.to_string(),
        };
        let ctx = &mut self.ctx;
        ctx.load(self.t, t0).ok()?;
        ctx.load(self.u, u).ok()?;
        ctx.load(self.v, v).ok()?;
        let baseline = ctx.log().allocated_bits();
        if let Err(e) = mul(ctx, self.t, self.u, self.v, Sign::Plus) {
            return Some(fail(None, &format!("forward error: {e}")));
        }
        let got = ctx.read(self.t).ok()?;
        if got != (t0 + u * v) % &self.modulus {
            return Some(fail(Some(got), "product mismatch"));
        }
        if &ctx.read(self.u).ok()? != u || &ctx.read(self.v).ok()? != v {
            return Some(fail(None, "factor register modified"));
        }
        if let Err(e) = mul(ctx, self.t, self.u, self.v, Sign::Minus) {
            return Some(fail(None, &format!("inverse error: {e}")));
        }
        let back = ctx.read(self.t).ok()?;
        if &back != t0 {
            return Some(fail(Some(back), "inverse did not restore target"));
        }
        if ctx.log().allocated_bits() != baseline {
            return Some(fail(None, "ancilla left allocated"));
        }
        None
    }
}

/// Exhaustive over all factor pairs (with a random accumulator) for
/// `n <= max_exhaustive_n`, then `cases` random triples per size in
/// [`RANDOM_SIZES`] above that range.
pub fn verify(mul: Multiplier, max_exhaustive_n: usize, cases: usize, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport::default();
    for n in 1..=max_exhaustive_n {
        let mut bench = Bench::new(n);
        for a in 0u64..(1 << n) {
            for b in 0u64..(1 << n) {
                let t0 = rng.gen_biguint(2 * n as u64);
                let (u, v) = (BigUint::from(a), BigUint::from(b));
                report.exhaustive_cases += 1;
                if let Some(c) = bench.check(mul, &t0, &u, &v) {
                    report.counterexample = Some(c);
                    return report;
                }
            }
        }
    }
    for n in RANDOM_SIZES.into_iter().filter(|&n| n > max_exhaustive_n) {
        let mut bench = Bench::new(n);
        for _ in 0..cases {
            let (t0, u, v) = random_operands(&mut rng, n);
            report.random_cases += 1;
            if let Some(c) = bench.check(mul, &t0, &u, &v) {
                report.counterexample = Some(c);
                return report;
            }
        }
    }
    report
}

fn usage(err: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    2
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    execute(cli.command, revkara::multiply_add, out, err)
}

pub fn execute(cmd: Command, mul: Multiplier, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cmd {
        Command::Verify {
            max_exhaustive_n,
            cases,
            seed,
        } => {
            let report = verify(mul, max_exhaustive_n as usize, cases, seed);
            let _ = writeln!(
                out,
                "exhaustive cases: {}, random cases: {}",
                report.exhaustive_cases, report.random_cases
            );
            match report.counterexample {
                None => {
                    let _ = writeln!(out, "PASS");
                    0
                }
                Some(c) => {
                    let _ = writeln!(out, "FAIL {c}");
                    let _ = writeln!(err, "counterexample: {c}");
                    1
                }
            }
        }
        Command::Trace { n, algorithm, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match trace_point(algorithm, n, &mut rng) {
                Ok(p) => {
                    let _ = writeln!(out, "{}", csv_row(&p));
                    0
                }
                Err(e) => usage(err, &e.to_string()),
            }
        }
        Command::Sweep {
            min,
            max,
            factor,
            algorithms,
            seed,
        } => {
            let spec = SweepSpec {
                n_min: min,
                n_max: max,
                factor,
                algorithms,
                seed,
            };
            if let Err(msg) = spec.validate() {
                return usage(err, &msg);
            }
            let rows = match sweep(&spec) {
                Ok(r) => r,
                Err(e) => return usage(err, &e.to_string()),
            };
            let _ = writeln!(out, "{CSV_HEADER}");
            for p in &rows {
                let _ = writeln!(out, "{}", csv_row(p));
            }
            let _ = writeln!(err, "{} rows", rows.len());
            0
        }
    }
}
