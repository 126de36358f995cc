//! Lazy views composed over a distributed vector.

use segrange::containers::DistributedVector;
use segrange::model::{Segment, SegmentedRange};
use segrange::runtime::Runtime;
use segrange::views::{zip, ViewExt};

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(3)?;
    let v = DistributedVector::from_slice(&rt, &(0..10).collect::<Vec<i64>>())?;

    let lens: Vec<usize> = v.segments().iter().map(Segment::len).collect();
    println!("segments of v: {lens:?}");

    let window = (&v).skip(2).take(5).transform(|x: i64| x * x);
    let lens: Vec<usize> = window.segments().iter().map(Segment::len).collect();
    println!(
        "skip(2).take(5).transform(x^2) = {:?} in segments {lens:?}",
        window.to_vec()?
    );

    // A vector with a different segmentation still zips element by element.
    let w = DistributedVector::from_slice(&Runtime::new(4)?, &(100..110).collect::<Vec<i64>>())?;
    let pairs = zip((&v, &w))?;
    let lens: Vec<usize> = pairs.segments().iter().map(Segment::len).collect();
    println!("zip over 3 and 4 segments -> chunks {lens:?}");
    println!("first pairs: {:?}", &pairs.to_vec()?[..3]);
    Ok(())
}
