//! Black-Scholes call pricing over a distributed option book.

use segrange::bench::kernels::{black_scholes, call_price, OptionBook};
use segrange::containers::DistributedVector;
use segrange::model::SegmentedRange;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(2)?;
    let book = OptionBook {
        spot: DistributedVector::from_slice(&rt, &[100.0, 90.0, 110.0, 100.0])?,
        strike: DistributedVector::from_slice(&rt, &[100.0, 100.0, 100.0, 100.0])?,
        rate: DistributedVector::from_slice(&rt, &[0.0, 0.05, 0.05, 0.02])?,
        sigma: DistributedVector::from_slice(&rt, &[0.2, 0.3, 0.3, 0.0])?,
        expiry: DistributedVector::from_slice(&rt, &[1.0, 0.5, 0.5, 1.0])?,
    };
    let prices = DistributedVector::new(&rt, 4, 0.0)?;
    black_scholes(&book, &prices)?;
    for (i, p) in prices.to_vec()?.iter().enumerate() {
        println!("option {i}: {p:.4}");
    }
    println!(
        "at the money, 20% vol, 1y: {:.4}",
        call_price(100.0, 100.0, 0.0, 0.2, 1.0)
    );
    Ok(())
}
