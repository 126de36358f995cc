//! Inclusive and exclusive prefix sums, with the per-segment trace.

use segrange::algorithms::{exclusive_scan, inclusive_scan_traced, Plus};
use segrange::containers::DistributedVector;
use segrange::model::SegmentedRange;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(3)?;
    let input = DistributedVector::from_slice(&rt, &[1i64, 2, 3, 4, 5, 6, 7])?;
    let out = DistributedVector::new(&rt, 7, 0i64)?;

    let trace = inclusive_scan_traced(&input, &out, Plus)?;
    println!("inclusive: {:?}", out.to_vec()?);
    println!("segment sums: {:?}", trace.partial_sums);
    println!("offsets: {:?}", trace.offsets);

    exclusive_scan(&input, &out, 100, Plus)?;
    println!("exclusive from 100: {:?}", out.to_vec()?);

    // In place.
    inclusive_scan_traced(&input, &input, |a: i64, b: i64| a.max(b) + 1)?;
    println!("in-place running max+1: {:?}", input.to_vec()?);
    Ok(())
}
