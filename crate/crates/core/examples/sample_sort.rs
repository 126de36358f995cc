//! Distributed sample sort, with its splitter selection exposed.

use segrange::algorithms::{select_splitters, sort, sort_by};
use segrange::bench::data::BenchRng;
use segrange::containers::DistributedVector;
use segrange::model::SegmentedRange;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(4)?;
    let mut rng = BenchRng::new(42);
    let keys: Vec<u32> = (0..20).map(|_| (rng.next_u64() % 100) as u32).collect();
    let v = DistributedVector::from_slice(&rt, &keys)?;
    println!("input:  {:?}", v.to_vec()?);

    let mut samples = keys.clone();
    samples.sort_unstable();
    println!(
        "splitters from all keys: {:?}",
        select_splitters(&samples, rt.locale_count())
    );

    sort(&v)?;
    println!("sorted: {:?}", v.to_vec()?);

    sort_by(&v, |a: &u32, b: &u32| b.cmp(a))?;
    println!("desc:   {:?}", v.to_vec()?);
    Ok(())
}
