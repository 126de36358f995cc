//! Dot product of two distributed vectors via `zip`, `transform` and `reduce`.

use segrange::algorithms::{reduce, Plus};
use segrange::containers::DistributedVector;
use segrange::runtime::Runtime;
use segrange::views::{transform, zip};

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(4)?;
    let a = DistributedVector::from_slice(&rt, &[1.0, 2.0, 3.0, 4.0, 5.0])?;
    let b = DistributedVector::from_slice(&rt, &[5.0, 4.0, 3.0, 2.0, 1.0])?;

    let products = transform(zip((&a, &b))?, |(x, y): (f64, f64)| x * y);
    let dot = reduce(&products, 0.0, Plus)?;
    println!("a . b = {dot}");
    assert_eq!(dot, 35.0);
    Ok(())
}
