use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use segrange::algorithms::{
    copy, exclusive_scan, for_each, inclusive_scan, inclusive_scan_traced, reduce, sort, sort_by, Max, Min, Multiplies,
    Plus,
};
use segrange::containers::{DistributedVector, LocalArray, Partition};
use segrange::model::{Segment, SegmentedRange};
use segrange::runtime::Runtime;
use segrange::views;

fn prefix_sums(v: &[i64]) -> Vec<i64> {
    let mut acc = 0;
    v.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

#[test]
fn for_each_increments() {
    let rt = Runtime::new(2).unwrap();
    let v = DistributedVector::from_slice(&rt, &[0, 1, 2]).unwrap();
    for_each(&v, |x: &mut i32| *x += 1).unwrap();
    assert_eq!(v.to_vec().unwrap(), vec![1, 2, 3]);
}

#[test]
fn for_each_over_zip_accumulates() {
    let rt = Runtime::new(3).unwrap();
    let a = DistributedVector::from_slice(&rt, &(0..20).collect::<Vec<i64>>()).unwrap();
    let b = DistributedVector::from_slice_with_partition(&rt, &(100..120).collect::<Vec<i64>>(), Partition::Blocks(5))
        .unwrap();
    let z = views::zip((&a, &b)).unwrap();
    for_each(&z, |(x, y): (&mut i64, &mut i64)| *x += *y).unwrap();
    let oracle: Vec<i64> = (0..20).map(|i| i + 100 + i).collect();
    assert_eq!(a.to_vec().unwrap(), oracle);
}

#[test]
fn for_each_counts_and_empty() {
    let rt = Runtime::new(4).unwrap();
    let v = DistributedVector::new(&rt, 1001, 0u8).unwrap();
    let count = Arc::new(AtomicUsize::new(0));
    let c = Arc::clone(&count);
    for_each(&v, move |_x: &mut u8| {
        c.fetch_add(1, Ordering::Relaxed);
    })
    .unwrap();
    assert_eq!(count.load(Ordering::Relaxed), 1001);
    let e = DistributedVector::new(&rt, 0, 0u8).unwrap();
    for_each(&e, |_x: &mut u8| panic!("no elements")).unwrap();
}

#[test]
fn for_each_reports_panics() {
    let rt = Runtime::new(2).unwrap();
    let v = DistributedVector::new(&rt, 10, 0u8).unwrap();
    let err = for_each(&v, |_x: &mut u8| panic!("boom")).unwrap_err();
    assert!(err.to_string().contains("boom"), "{err}");
}

#[test]
fn reduce_examples() {
    for p in [1, 2, 3, 4, 7] {
        let rt = Runtime::new(p).unwrap();
        let v = DistributedVector::from_slice(&rt, &(1..=100).collect::<Vec<u64>>()).unwrap();
        assert_eq!(reduce(&v, 0, Plus).unwrap(), 5050);
        assert_eq!(reduce(&v, 0, Max).unwrap(), 100);
        assert_eq!(reduce(&v, 1000, Min).unwrap(), 1);
        let e = DistributedVector::new(&rt, 0, 0u64).unwrap();
        assert_eq!(reduce(&e, 42, Plus).unwrap(), 42);
    }
}

#[test]
fn float_product_is_stable_across_locales() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let data: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.999..1.001)).collect();
    let products: Vec<f64> = [1, 4]
        .iter()
        .map(|&p| {
            let rt = Runtime::new(p).unwrap();
            let v = DistributedVector::from_slice(&rt, &data).unwrap();
            reduce(&v, 1.0, Multiplies).unwrap()
        })
        .collect();
    assert!(((products[0] - products[1]) / products[0]).abs() <= 1e-12);
}

#[test]
fn dot_product_via_views() {
    let rt = Runtime::new(3).unwrap();
    let a = DistributedVector::from_slice(&rt, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let b = DistributedVector::from_slice(&rt, &[4.0, 3.0, 2.0, 1.0]).unwrap();
    let products = views::transform(views::zip((&a, &b)).unwrap(), |(x, y): (f64, f64)| x * y);
    assert_eq!(reduce(&products, 0.0, Plus).unwrap(), 20.0);
}

#[test]
fn inclusive_scan_example() {
    let rt = Runtime::new(2).unwrap();
    let input = DistributedVector::from_slice(&rt, &[1i64, 2, 3, 4]).unwrap();
    let out = DistributedVector::new(&rt, 4, 0i64).unwrap();
    let trace = inclusive_scan_traced(&input, &out, Plus).unwrap();
    assert_eq!(out.to_vec().unwrap(), vec![1, 3, 6, 10]);
    assert_eq!(trace.partial_sums, vec![Some(3), Some(7)]);
    assert_eq!(trace.offsets, vec![None, Some(3)]);
}

#[test]
fn scan_in_place_matches_out_of_place() {
    let rt = Runtime::new(3).unwrap();
    let data: Vec<i64> = (0..50).map(|x| x * x % 17).collect();
    let v = DistributedVector::from_slice(&rt, &data).unwrap();
    inclusive_scan(&v, &v, Plus).unwrap();
    assert_eq!(v.to_vec().unwrap(), prefix_sums(&data));
    let w = DistributedVector::from_slice(&rt, &data).unwrap();
    exclusive_scan(&w, &w, 5, Plus).unwrap();
    let mut expected = vec![5];
    expected.extend(prefix_sums(&data).iter().take(49).map(|x| x + 5));
    assert_eq!(w.to_vec().unwrap(), expected);
}

#[test]
fn exclusive_scan_examples() {
    let rt = Runtime::new(2).unwrap();
    let input = DistributedVector::from_slice(&rt, &[1i64, 2, 3, 4]).unwrap();
    let out = DistributedVector::new(&rt, 4, 0i64).unwrap();
    exclusive_scan(&input, &out, 0, Plus).unwrap();
    assert_eq!(out.to_vec().unwrap(), vec![0, 1, 3, 6]);
    for p in 1..=4 {
        let rt = Runtime::new(p).unwrap();
        let input = DistributedVector::from_slice(&rt, &[1i64, 1]).unwrap();
        let out = DistributedVector::new(&rt, 2, 0i64).unwrap();
        exclusive_scan(&input, &out, 10, Plus).unwrap();
        assert_eq!(out.to_vec().unwrap(), vec![10, 11]);
    }
}

#[test]
fn scan_misaligned_and_views() {
    let rt = Runtime::new(4).unwrap();
    let data: Vec<i64> = (0..33).collect();
    let input = DistributedVector::from_slice_with_partition(&rt, &data, Partition::Blocks(3)).unwrap();
    let out = DistributedVector::new(&rt, 33, 0i64).unwrap();
    inclusive_scan(&views::transform(&input, |x| x * 2), &out, Plus).unwrap();
    let doubled: Vec<i64> = data.iter().map(|x| x * 2).collect();
    assert_eq!(out.to_vec().unwrap(), prefix_sums(&doubled));
    // Output into a local array.
    let local = LocalArray::filled(33, 0i64);
    inclusive_scan(&input, &local, Plus).unwrap();
    assert_eq!(local.read().unwrap().to_vec(), prefix_sums(&data));
    // Length mismatch.
    let short = DistributedVector::new(&rt, 32, 0i64).unwrap();
    assert!(inclusive_scan(&input, &short, Plus).is_err());
}

#[test]
fn sort_examples() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::from_slice(&rt, &(0..10).rev().collect::<Vec<u32>>()).unwrap();
    sort(&v).unwrap();
    assert_eq!(v.to_vec().unwrap(), (0..10).collect::<Vec<_>>());

    let rt = Runtime::new(4).unwrap();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let data: Vec<u64> = (0..100_000).map(|_| rng.gen()).collect();
    let v = DistributedVector::from_slice(&rt, &data).unwrap();
    sort(&v).unwrap();
    let mut oracle = data;
    oracle.sort_unstable();
    assert_eq!(v.to_vec().unwrap(), oracle);

    let same = DistributedVector::new(&rt, 1000, 7u8).unwrap();
    sort(&same).unwrap();
    assert_eq!(same.to_vec().unwrap(), vec![7u8; 1000]);
    // Segment lengths are unchanged by sorting.
    assert_eq!(
        same.segments().iter().map(Segment::len).collect::<Vec<_>>(),
        vec![250; 4]
    );
}

#[test]
fn sort_descending_and_local() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::from_slice(&rt, &[5, 1, 4, 2, 3, 9, 0]).unwrap();
    sort_by(&v, |a: &i32, b: &i32| b.cmp(a)).unwrap();
    assert_eq!(v.to_vec().unwrap(), vec![9, 5, 4, 3, 2, 1, 0]);
    let l = LocalArray::from_vec(vec![3, 1, 2]);
    sort(&l).unwrap();
    assert_eq!(l.read().unwrap().to_vec(), vec![1, 2, 3]);
}

#[test]
fn copy_between_layouts() {
    let data: Vec<u32> = (0..1000).collect();
    let rt3 = Runtime::new(3).unwrap();
    let rt4 = Runtime::new(4).unwrap();
    let a = DistributedVector::from_slice(&rt3, &data).unwrap();
    let b = DistributedVector::new(&rt4, 1000, 0u32).unwrap();
    copy(&a, &b).unwrap();
    assert_eq!(b.to_vec().unwrap(), data);

    let src = LocalArray::from_vec(data.clone());
    let mid = DistributedVector::new(&rt3, 1000, 0u32).unwrap();
    let dst = LocalArray::filled(1000, 0u32);
    copy(&src, &mid).unwrap();
    copy(&mid, &dst).unwrap();
    assert_eq!(dst.read().unwrap().to_vec(), data);

    let empty = DistributedVector::new(&rt3, 0, 0u32).unwrap();
    copy(&LocalArray::from_vec(Vec::<u32>::new()), &empty).unwrap();
    assert!(copy(&a, &DistributedVector::new(&rt3, 999, 0u32).unwrap()).is_err());
}

#[test]
fn overlapping_copy_shifts() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::from_slice(&rt, &(0..12).collect::<Vec<i32>>()).unwrap();
    copy(&views::drop(&v, 1), &views::take(&v, 11)).unwrap();
    assert_eq!(v.to_vec().unwrap(), vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 11]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn algorithms_match_sequential(data in prop::collection::vec(-1000i64..1000, 0..200), p in 1usize..8) {
        let rt = Runtime::new(p).unwrap();
        let v = DistributedVector::from_slice(&rt, &data).unwrap();
        prop_assert_eq!(reduce(&v, 0, Plus).unwrap(), data.iter().sum::<i64>());

        let out = DistributedVector::new(&rt, data.len(), 0i64).unwrap();
        inclusive_scan(&v, &out, Plus).unwrap();
        let inc = out.to_vec().unwrap();
        prop_assert_eq!(&inc, &prefix_sums(&data));
        if let Some(last) = inc.last() {
            prop_assert_eq!(*last, reduce(&v, 0, Plus).unwrap());
        }

        let ex = DistributedVector::new(&rt, data.len(), 0i64).unwrap();
        exclusive_scan(&v, &ex, 0, Plus).unwrap();
        let ex = ex.to_vec().unwrap();
        for i in 0..data.len() {
            prop_assert_eq!(inc[i], ex[i] + data[i]);
        }

        sort(&v).unwrap();
        let mut sorted = data.clone();
        sorted.sort_unstable();
        prop_assert_eq!(v.to_vec().unwrap(), sorted);
    }
}
