//! STREAM triad `a = b + alpha * c` over three zipped vectors.

use std::time::Instant;

use segrange::bench::kernels::stream_triad;
use segrange::containers::DistributedVector;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let n = 1 << 20;
    let rt = Runtime::from_env()?;
    let a = DistributedVector::new(&rt, n, 0.0)?;
    let b = DistributedVector::new(&rt, n, 1.0)?;
    let c = DistributedVector::new(&rt, n, 2.0)?;

    let start = Instant::now();
    stream_triad(&a, &b, &c, 3.0)?;
    let secs = start.elapsed().as_secs_f64();
    let gbs = (3 * n * std::mem::size_of::<f64>()) as f64 / secs / 1e9;
    println!(
        "n={n} locales={} time={secs:.6}s bandwidth={gbs:.2} GB/s",
        rt.locale_count()
    );
    println!("a[0]={} a[n-1]={}", a.get(0)?, a.get(n - 1)?);
    Ok(())
}
