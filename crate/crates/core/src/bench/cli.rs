//! Command-line front end of the benchmark harness.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::runtime::{default_locale_count, ZipMode};

use super::{emit_csv, run_bench, BenchKind, BenchResult, BenchSpec};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Strict,
    Relaxed,
}

/// Runs library kernels on simulated locales, times them and checks them
/// against sequential oracles.
#[derive(Debug, Parser)]
#[command(name = "drbench", version)]
struct Args {
    /// Benchmarks to run (repeat or separate with commas).
    #[arg(long, value_enum, required = true, value_delimiter = ',')]
    bench: Vec<BenchKind>,
    /// Element count, or matrix dimension for gemm [default: 10000000, gemm 512].
    #[arg(long)]
    size: Option<usize>,
    /// Locale count [default: $SEGRANGE_LOCALES, else hardware threads].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    locales: Option<u64>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Verify every repetition against a sequential oracle.
    #[arg(long)]
    check: bool,
    /// Zip alignment mode.
    #[arg(long, value_enum, default_value_t = Mode::Relaxed)]
    mode: Mode,
    /// Write per-repetition rows to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME_ERROR: i32 = 3;

/// Parses `argv` (program name first), runs the benches and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let locales = args.locales.map_or_else(default_locale_count, |l| l as usize);
    let mode = match args.mode {
        Mode::Strict => ZipMode::Strict,
        Mode::Relaxed => ZipMode::Relaxed,
    };
    let mut results: Vec<BenchResult> = Vec::new();
    for bench in args.bench {
        let spec = BenchSpec {
            bench,
            size: args.size.unwrap_or(bench.default_size()),
            locales,
            reps: args.reps as usize,
            seed: args.seed,
            check: args.check,
            mode,
        };
        match run_bench(&spec) {
            Ok(result) => {
                println!("{}", summary(&result));
                results.push(result);
            }
            Err(e) => {
                eprintln!("drbench: {bench}: {e}");
                return EXIT_RUNTIME_ERROR;
            }
        }
    }
    if let Some(path) = &args.csv {
        if let Err(e) = emit_csv(&results, path) {
            eprintln!("drbench: cannot write {}: {e}", path.display());
            return EXIT_RUNTIME_ERROR;
        }
    }
    if results.iter().all(BenchResult::passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

fn summary(r: &BenchResult) -> String {
    let median = r.median_seconds();
    let mut line = format!(
        "{:<14} size={:<10} locales={:<3} reps={:<3} median={:.6}s checksum={:016x}",
        r.spec.bench.name(),
        r.spec.size,
        r.spec.locales,
        r.seconds.len(),
        median,
        r.checksum()
    );
    if let Some(bytes) = r.bytes {
        if median > 0.0 {
            line.push_str(&format!(" bandwidth={:.3}GB/s", bytes as f64 / median / 1e9));
        }
    }
    line.push_str(match r.verified {
        Some(true) => " verified",
        Some(false) => " MISMATCH",
        None => "",
    });
    line
}
