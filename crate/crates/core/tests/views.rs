use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use segrange::containers::{DistributedVector, LocalArray, Partition};
use segrange::model::{is_aligned, LocaleId, ReadAccess, Segment, SegmentedRange};
use segrange::runtime::{Runtime, RuntimeConfig, ZipMode};
use segrange::views::{self, realign_segments, trim_segments, ViewExt};
use segrange::Error;

fn lengths<R: SegmentedRange>(r: &R) -> Vec<usize> {
    r.segments().iter().map(Segment::len).collect()
}

fn ranks<R: SegmentedRange>(r: &R) -> Vec<Option<LocaleId>> {
    r.segments().iter().map(Segment::locale).collect()
}

fn flatten<R: SegmentedRange>(r: &R) -> Vec<<R::Segment as Segment>::Item> {
    r.segments()
        .iter()
        .flat_map(|s| s.read().unwrap().iter().collect::<Vec<_>>())
        .collect()
}

#[test]
fn transform_doubles_and_keeps_layout() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::from_slice(&rt, &(0..10).collect::<Vec<i64>>()).unwrap();
    let t = views::transform(&v, |x| 2 * x);
    assert_eq!(t.to_vec().unwrap(), (0..10).map(|x| 2 * x).collect::<Vec<_>>());
    assert_eq!(lengths(&t), vec![4, 4, 2]);
    assert_eq!(ranks(&t), vec![Some(LocaleId(0)), Some(LocaleId(1)), Some(LocaleId(2))]);

    let small = DistributedVector::from_slice(&rt, &[1, 2, 3]).unwrap();
    assert_eq!(
        views::transform(&small, |x: i32| 2 * x).to_vec().unwrap(),
        vec![2, 4, 6]
    );
}

#[test]
fn transform_composition() {
    let rt = Runtime::new(4).unwrap();
    let v = DistributedVector::from_slice(&rt, &(0..37).collect::<Vec<i64>>()).unwrap();
    let f = |x: i64| x * 3 + 1;
    let g = |x: i64| x * x - 7;
    let nested = (&v).transform(f).transform(g);
    let fused = (&v).transform(move |x| g(f(x)));
    assert_eq!(nested.to_vec().unwrap(), fused.to_vec().unwrap());
}

#[test]
fn trim_examples() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::with_partition(&rt, 9, 0u8, Partition::Lengths(vec![3, 3, 3])).unwrap();
    let segs = v.segments();
    let t = trim_segments(&segs, 2, 7).unwrap();
    assert_eq!(t.iter().map(Segment::len).collect::<Vec<_>>(), vec![1, 3, 1]);
    assert_eq!(
        t.iter().map(Segment::locale).collect::<Vec<_>>(),
        vec![Some(LocaleId(0)), Some(LocaleId(1)), Some(LocaleId(2))]
    );
    assert_eq!(trim_segments(&segs, 0, 9).unwrap().len(), 3);
    assert!(trim_segments(&segs, 4, 4).unwrap().is_empty());
    assert!(matches!(trim_segments(&segs, 5, 4), Err(Error::InvalidTrim { .. })));
    assert!(matches!(trim_segments(&segs, 0, 10), Err(Error::InvalidTrim { .. })));
    // Cutting on a boundary leaves no empty pieces.
    assert_eq!(trim_segments(&segs, 3, 6).unwrap().len(), 1);
}

#[test]
fn take_and_drop() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::from_slice(&rt, &(0..10).collect::<Vec<u32>>()).unwrap();
    assert_eq!(views::take(&v, 5).to_vec().unwrap(), vec![0, 1, 2, 3, 4]);
    let d = views::drop(&v, 4);
    assert_eq!(lengths(&d), vec![4, 2]);
    assert_eq!(d.to_vec().unwrap(), (4..10).collect::<Vec<_>>());
    assert_eq!(views::take(&v, 1_000_000_000).len(), 10);
    assert_eq!(views::drop(&v, 1_000).len(), 0);
    assert!(views::drop(&v, 1_000).segments().is_empty());
    // take/drop keep ranks.
    assert_eq!(ranks(&d), vec![Some(LocaleId(1)), Some(LocaleId(2))]);
}

#[test]
fn aligned_zip_pairs_segments() {
    let rt = Runtime::new(4).unwrap();
    let a = DistributedVector::from_slice(&rt, &(0..4).collect::<Vec<i32>>()).unwrap();
    let b = DistributedVector::with_partition(&rt, 4, 0i32, Partition::Block).unwrap();
    let z = views::zip((&a, &b)).unwrap();
    assert_eq!(z.segments().len(), a.segments().len());
    assert_eq!(z.to_vec().unwrap(), vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
    let rt8 = Runtime::new(8).unwrap();
    let c = DistributedVector::new(&rt8, 4, 1u8).unwrap();
    let d = DistributedVector::new(&rt8, 4, 2u8).unwrap();
    let z = views::zip((&c, &d)).unwrap();
    assert_eq!(lengths(&z), vec![1, 1, 1, 1, 0, 0, 0, 0]);
}

#[test]
fn relaxed_zip_realigns() {
    let rt = Runtime::new(2).unwrap();
    let a = DistributedVector::with_partition(&rt, 8, 1i32, Partition::Lengths(vec![4, 4])).unwrap();
    let b = DistributedVector::with_partition(&rt, 8, 2i32, Partition::Lengths(vec![3, 5])).unwrap();
    let z = views::zip((&a, &b)).unwrap();
    assert_eq!(lengths(&z), vec![3, 1, 4]);
    assert_eq!(z.to_vec().unwrap(), vec![(1, 2); 8]);
    assert_eq!(ranks(&z), vec![Some(LocaleId(0)), Some(LocaleId(0)), Some(LocaleId(1))]);
}

#[test]
fn strict_zip_rejects_misaligned() {
    let rt = Runtime::with_config(RuntimeConfig {
        locales: 2,
        zip_mode: ZipMode::Strict,
        ..RuntimeConfig::default()
    })
    .unwrap();
    let a = DistributedVector::with_partition(&rt, 8, 1i32, Partition::Lengths(vec![4, 4])).unwrap();
    let b = DistributedVector::with_partition(&rt, 8, 2i32, Partition::Lengths(vec![3, 5])).unwrap();
    assert!(matches!(views::zip((&a, &b)), Err(Error::NonAlignedZip)));
    let c = DistributedVector::with_partition(&rt, 8, 3i32, Partition::Lengths(vec![4, 4])).unwrap();
    assert!(views::zip((&a, &c)).is_ok());
    rt.set_zip_mode(ZipMode::Relaxed);
    assert!(views::zip((&a, &b)).is_ok());
}

#[test]
fn zip_truncates_and_mixes_local() {
    let rt = Runtime::new(3).unwrap();
    let a = DistributedVector::from_slice(&rt, &(0..10).collect::<Vec<i32>>()).unwrap();
    let l = LocalArray::from_vec((100..107).collect::<Vec<i32>>());
    let z = views::zip((&l, &a)).unwrap();
    assert_eq!(z.len(), 7);
    assert_eq!(lengths(&z), vec![4, 3]);
    // Rank comes from the first base that has one.
    assert_eq!(ranks(&z), vec![Some(LocaleId(0)), Some(LocaleId(1))]);
    assert_eq!(z.get(6).unwrap(), (106, 6));
}

#[test]
fn zip_of_three_and_writes() {
    let rt = Runtime::new(3).unwrap();
    let a = DistributedVector::new(&rt, 10, 0i64).unwrap();
    let b = DistributedVector::from_slice(&rt, &(0..10).collect::<Vec<i64>>()).unwrap();
    let c = DistributedVector::with_partition(&rt, 10, 10i64, Partition::Lengths(vec![5, 5])).unwrap();
    let z = views::zip((&a, &b, &c)).unwrap();
    for seg in z.segments() {
        let mut w = seg.write().unwrap();
        use segrange::model::WriteAccess;
        for (x, y, s) in w.iter_mut() {
            *x = *y + *s;
        }
    }
    assert_eq!(a.to_vec().unwrap(), (10..20).collect::<Vec<_>>());
    let aliased = views::zip((&a, &a)).unwrap();
    assert!(matches!(aliased.segments()[0].write(), Err(Error::AliasedWrite(_))));
    assert!(aliased.segments()[0].read().is_ok());
}

#[test]
fn views_are_lazy() {
    let rt = Runtime::new(2).unwrap();
    let v = DistributedVector::new(&rt, 100, 1u32).unwrap();
    let count = Arc::new(AtomicUsize::new(0));
    let c = Arc::clone(&count);
    let t = views::transform(&v, move |x| {
        c.fetch_add(1, Ordering::SeqCst);
        x
    });
    let composed = views::zip((views::take(&t, 50), views::drop(&v, 20))).unwrap();
    let _ = composed.segments();
    let _ = composed.len();
    assert_eq!(count.load(Ordering::SeqCst), 0);
    assert_eq!(composed.to_vec().unwrap().len(), 50);
    assert_eq!(count.load(Ordering::SeqCst), 50);
}

#[test]
fn sweep_examples() {
    let cuts = |l: &[Vec<usize>]| -> Vec<usize> { realign_segments(l).unwrap().iter().map(|c| c.len).collect() };
    assert_eq!(cuts(&[vec![4, 4], vec![3, 5]]), vec![3, 1, 4]);
    assert_eq!(cuts(&[vec![2, 2, 2], vec![3, 3]]), vec![2, 1, 1, 2]);
    assert_eq!(cuts(&[vec![3, 3, 3], vec![3, 3, 3]]), vec![3, 3, 3]);
}

fn boundaries(lengths: &[usize]) -> Vec<usize> {
    let total: usize = lengths.iter().sum();
    let mut acc = 0;
    let mut out = Vec::new();
    for l in lengths {
        acc += l;
        if acc > 0 && acc < total {
            out.push(acc);
        }
    }
    out.dedup();
    out
}

fn split(total: usize, cuts: Vec<usize>) -> Vec<usize> {
    let mut points: Vec<usize> = cuts.into_iter().map(|c| c % (total + 1)).collect();
    points.push(0);
    points.push(total);
    points.sort_unstable();
    points.windows(2).map(|w| w[1] - w[0]).collect()
}

proptest! {
    #[test]
    fn sweep_cuts_at_union_of_boundaries(total in 0usize..200, c1 in prop::collection::vec(0usize..1000, 0..8), c2 in prop::collection::vec(0usize..1000, 0..8)) {
        let a = split(total, c1);
        let b = split(total, c2);
        let chunks: Vec<usize> = realign_segments(&[a.clone(), b.clone()]).unwrap().iter().map(|c| c.len).collect();
        let mut expected: Vec<usize> = boundaries(&a).into_iter().chain(boundaries(&b)).collect();
        expected.sort_unstable();
        expected.dedup();
        prop_assert_eq!(boundaries(&chunks), expected);
        prop_assert!(chunks.iter().all(|&c| c > 0));
    }

    #[test]
    fn take_drop_transform_match_oracle(n in 0usize..80, p in 1usize..8, t in 0usize..100, d in 0usize..100) {
        let rt = Runtime::new(p).unwrap();
        let data: Vec<i64> = (0..n as i64).collect();
        let v = DistributedVector::from_slice(&rt, &data).unwrap();
        let view = (&v).skip(d).transform(|x| x * 2 + 1).take(t);
        let oracle: Vec<i64> = data.iter().skip(d).map(|x| x * 2 + 1).take(t).collect();
        prop_assert_eq!(view.to_vec().unwrap(), oracle.clone());
        prop_assert_eq!(flatten(&view), oracle);
        prop_assert_eq!(view.len(), n.saturating_sub(d).min(t));
    }

    #[test]
    fn zip_matches_oracle(n in 0usize..60, m in 0usize..60, p in 1usize..6, q in 1usize..6) {
        let rt = Runtime::new(6).unwrap();
        let a: Vec<u32> = (0..n as u32).collect();
        let b: Vec<u32> = (0..m as u32).map(|x| x * 7).collect();
        let va = DistributedVector::from_slice_with_partition(&rt, &a, Partition::Blocks(p)).unwrap();
        let vb = DistributedVector::from_slice_with_partition(&rt, &b, Partition::Blocks(q)).unwrap();
        let z = views::zip((&va, &vb)).unwrap();
        let oracle: Vec<(u32, u32)> = a.iter().copied().zip(b.iter().copied()).collect();
        prop_assert_eq!(flatten(&z), oracle);
        if p == q && n == m {
            prop_assert!(is_aligned(&[va.distribution().clone(), vb.distribution().clone()]));
            prop_assert_eq!(z.segments().len(), va.segments().len());
        }
    }
}
