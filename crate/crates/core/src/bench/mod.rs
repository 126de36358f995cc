//! Benchmark and verification harness.
//!
//! Each bench generates seeded inputs, times the library kernel over a
//! number of repetitions and optionally compares every repetition's output
//! with a sequential oracle.

pub mod cli;
pub mod data;
pub mod kernels;
pub mod oracle;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;

use crate::containers::{DistributedDenseMatrix, DistributedVector};
use crate::error::Result;
use crate::model::SegmentedRange;
use crate::runtime::{Binding, Runtime, RuntimeConfig, ZipMode};

use data::{checksum_f64, checksum_i64, checksum_u64, close, BenchRng, Checksum};
use kernels::OptionBook;

/// Relative tolerance for reassociated floating-point results.
pub const FLOAT_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for GEMM entries.
pub const GEMM_TOLERANCE: f64 = 1e-10;
/// Triad scalar.
pub const STREAM_ALPHA: f64 = 3.0;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum BenchKind {
    Dot,
    Reduce,
    #[value(name = "inclusive_scan")]
    InclusiveScan,
    #[value(name = "black_scholes")]
    BlackScholes,
    Stream,
    Gemm,
    Sort,
}

impl BenchKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchKind::Dot => "dot",
            BenchKind::Reduce => "reduce",
            BenchKind::InclusiveScan => "inclusive_scan",
            BenchKind::BlackScholes => "black_scholes",
            BenchKind::Stream => "stream",
            BenchKind::Gemm => "gemm",
            BenchKind::Sort => "sort",
        }
    }

    /// Elements for vector benches, matrix dimension for GEMM.
    pub fn default_size(self) -> usize {
        match self {
            BenchKind::Gemm => 512,
            _ => 10_000_000,
        }
    }
}

impl fmt::Display for BenchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    pub bench: BenchKind,
    pub size: usize,
    pub locales: usize,
    pub reps: usize,
    pub seed: u64,
    pub check: bool,
    pub mode: ZipMode,
}

impl BenchSpec {
    pub fn new(bench: BenchKind, size: usize, locales: usize) -> Self {
        BenchSpec {
            bench,
            size,
            locales,
            reps: 3,
            seed: 1,
            check: false,
            mode: ZipMode::Relaxed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub spec: BenchSpec,
    /// Wall time of each repetition.
    pub seconds: Vec<f64>,
    /// Output checksum of each repetition.
    pub checksums: Vec<u64>,
    /// `None` when checking was not requested.
    pub verified: Option<bool>,
    /// Bytes moved per repetition, for bandwidth reporting.
    pub bytes: Option<usize>,
}

impl BenchResult {
    pub fn median_seconds(&self) -> f64 {
        let mut s = self.seconds.clone();
        s.sort_by(f64::total_cmp);
        match s.len() {
            0 => 0.0,
            n if n % 2 == 1 => s[n / 2],
            n => 0.5 * (s[n / 2 - 1] + s[n / 2]),
        }
    }

    pub fn checksum(&self) -> u64 {
        self.checksums.last().copied().unwrap_or(0)
    }

    pub fn passed(&self) -> bool {
        self.verified != Some(false)
    }
}

/// Runs one bench on a fresh runtime.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchResult> {
    let rt = Runtime::with_config(RuntimeConfig {
        locales: spec.locales,
        binding: Binding::Unbound,
        zip_mode: spec.mode,
    })?;
    run_bench_on(&rt, spec)
}

struct Rep {
    seconds: f64,
    checksum: u64,
    ok: bool,
}

fn timed<F: FnOnce() -> Result<()>>(f: F) -> Result<f64> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed().as_secs_f64())
}

/// Runs one bench on an existing runtime. The result records the runtime's
/// locale count in place of the spec's.
pub fn run_bench_on(rt: &Runtime, spec: &BenchSpec) -> Result<BenchResult> {
    let spec = &BenchSpec {
        locales: rt.locale_count(),
        ..spec.clone()
    };
    let n = spec.size;
    let reps = spec.reps.max(1);
    let mut rng = BenchRng::new(spec.seed);
    let mut bytes = None;
    let mut runs = Vec::with_capacity(reps);
    match spec.bench {
        BenchKind::Dot => {
            let (a, b) = (rng.f64s(n, 0.0, 1.0), rng.f64s(n, 0.0, 1.0));
            let expected = spec.check.then(|| oracle::dot(&a, &b));
            let (va, vb) = (
                DistributedVector::from_slice(rt, &a)?,
                DistributedVector::from_slice(rt, &b)?,
            );
            for _ in 0..reps {
                let mut got = 0.0;
                let seconds = timed(|| {
                    got = kernels::dot(&va, &vb)?;
                    Ok(())
                })?;
                let ok = expected.is_none_or(|e| close(got, e, FLOAT_TOLERANCE));
                runs.push(Rep {
                    seconds,
                    checksum: Checksum::new().f64(got).finish(),
                    ok,
                });
            }
        }
        BenchKind::Reduce => {
            let data = rng.u64s(n, 20);
            let expected = spec.check.then(|| oracle::sum(&data));
            let v = DistributedVector::from_slice(rt, &data)?;
            for _ in 0..reps {
                let mut got = 0;
                let seconds = timed(|| {
                    got = kernels::sum(&v)?;
                    Ok(())
                })?;
                let ok = expected.is_none_or(|e| got == e);
                runs.push(Rep {
                    seconds,
                    checksum: Checksum::new().u64(got).finish(),
                    ok,
                });
            }
        }
        BenchKind::InclusiveScan => {
            let data: Vec<i64> = rng.u64s(n, 20).into_iter().map(|x| x as i64 - (1 << 19)).collect();
            let expected = spec.check.then(|| oracle::prefix_sum(&data));
            let input = DistributedVector::from_slice(rt, &data)?;
            let out = DistributedVector::new(rt, n, 0i64)?;
            for _ in 0..reps {
                let seconds = timed(|| kernels::prefix_sum(&input, &out))?;
                let got = out.to_vec()?;
                let ok = expected.as_ref().is_none_or(|e| &got == e);
                runs.push(Rep {
                    seconds,
                    checksum: checksum_i64(&got),
                    ok,
                });
            }
        }
        BenchKind::BlackScholes => {
            let spot = rng.f64s(n, 50.0, 150.0);
            let strike = rng.f64s(n, 50.0, 150.0);
            let rate = rng.f64s(n, 0.0, 0.1);
            let sigma = rng.f64s(n, 0.05, 0.5);
            let expiry = rng.f64s(n, 0.1, 2.0);
            let expected = spec
                .check
                .then(|| oracle::black_scholes(&spot, &strike, &rate, &sigma, &expiry));
            let book = OptionBook {
                spot: DistributedVector::from_slice(rt, &spot)?,
                strike: DistributedVector::from_slice(rt, &strike)?,
                rate: DistributedVector::from_slice(rt, &rate)?,
                sigma: DistributedVector::from_slice(rt, &sigma)?,
                expiry: DistributedVector::from_slice(rt, &expiry)?,
            };
            let out = DistributedVector::new(rt, n, 0.0)?;
            for _ in 0..reps {
                let seconds = timed(|| kernels::black_scholes(&book, &out))?;
                let got = out.to_vec()?;
                let ok = expected.as_ref().is_none_or(|e| all_close(&got, e, FLOAT_TOLERANCE));
                runs.push(Rep {
                    seconds,
                    checksum: checksum_f64(&got),
                    ok,
                });
            }
        }
        BenchKind::Stream => {
            let (b, c) = (rng.f64s(n, 0.0, 1.0), rng.f64s(n, 0.0, 1.0));
            let expected = spec.check.then(|| oracle::stream_triad(&b, &c, STREAM_ALPHA));
            let va = DistributedVector::new(rt, n, 0.0)?;
            let (vb, vc) = (
                DistributedVector::from_slice(rt, &b)?,
                DistributedVector::from_slice(rt, &c)?,
            );
            bytes = Some(3 * n * std::mem::size_of::<f64>());
            for _ in 0..reps {
                let seconds = timed(|| kernels::stream_triad(&va, &vb, &vc, STREAM_ALPHA))?;
                let got = va.to_vec()?;
                let ok = expected.as_ref().is_none_or(|e| &got == e);
                runs.push(Rep {
                    seconds,
                    checksum: checksum_f64(&got),
                    ok,
                });
            }
        }
        BenchKind::Gemm => {
            let (a, b) = (rng.f64s(n * n, -1.0, 1.0), rng.f64s(n * n, -1.0, 1.0));
            let expected = spec.check.then(|| oracle::gemm(&a, &b, n));
            let tiling = kernels::gemm_tiling(n, rt.locale_count());
            let ma = DistributedDenseMatrix::from_fn(rt, (n, n), &tiling, |r, c| a[r * n + c])?;
            let mb = DistributedDenseMatrix::from_fn(rt, (n, n), &tiling, |r, c| b[r * n + c])?;
            let mc = DistributedDenseMatrix::new(rt, (n, n), &tiling, 0.0)?;
            for _ in 0..reps {
                let seconds = timed(|| kernels::gemm(&ma, &mb, &mc))?;
                let got = mc.to_dense()?.into_vec();
                let ok = expected.as_ref().is_none_or(|e| all_close(&got, e, GEMM_TOLERANCE));
                runs.push(Rep {
                    seconds,
                    checksum: checksum_f64(&got),
                    ok,
                });
            }
        }
        BenchKind::Sort => {
            let data = rng.u64s(n, 64);
            let expected = spec.check.then(|| oracle::sort(&data));
            let v = DistributedVector::from_slice(rt, &data)?;
            for rep in 0..reps {
                if rep > 0 {
                    v.assign(&data)?;
                }
                let seconds = timed(|| kernels::sort_keys(&v))?;
                let got = v.to_vec()?;
                let ok = expected.as_ref().is_none_or(|e| &got == e);
                runs.push(Rep {
                    seconds,
                    checksum: checksum_u64(&got),
                    ok,
                });
            }
        }
    }
    Ok(BenchResult {
        spec: spec.clone(),
        seconds: runs.iter().map(|r| r.seconds).collect(),
        checksums: runs.iter().map(|r| r.checksum).collect(),
        verified: spec.check.then(|| runs.iter().all(|r| r.ok)),
        bytes,
    })
}

fn all_close(got: &[f64], expected: &[f64], tol: f64) -> bool {
    got.len() == expected.len() && got.iter().zip(expected).all(|(&g, &e)| close(g, e, tol))
}

pub const CSV_HEADER: &str = "bench,size,locales,rep,seconds,checksum,verified";

/// One header line, then one row per repetition of each result.
pub fn write_csv<W: Write>(results: &[BenchResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let verified = match r.verified {
            Some(true) => "true",
            Some(false) => "false",
            None => "unchecked",
        };
        for (rep, (secs, sum)) in r.seconds.iter().zip(&r.checksums).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:016x},{}",
                r.spec.bench, r.spec.size, r.spec.locales, rep, secs, sum, verified
            )?;
        }
    }
    Ok(())
}

pub fn emit_csv(results: &[BenchResult], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    write_csv(results, &mut writer)?;
    writer.flush()?;
    Ok(())
}
