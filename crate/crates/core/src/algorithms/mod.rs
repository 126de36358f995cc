//! Segment-parallel algorithms.
//!
//! Each algorithm runs one task per segment on the segment's locale and
//! waits for all of them before returning. Ranges without a runtime are
//! processed on the calling thread.

mod copy;
mod dispatch;
mod ops;
mod scan;
mod sort;

use std::sync::Arc;

pub use copy::copy;
pub use ops::{BinaryOp, Max, Min, Multiplies, Plus};
pub use scan::{exclusive_scan, inclusive_scan, inclusive_scan_traced, ScanTrace};
pub use sort::{chunk_bounds, sample_positions, select_splitters, sort, sort_by};

use crate::error::Result;
use crate::model::{ElemOf, ReadAccess, Segment, SegmentedRange, WriteAccess};

use dispatch::run_jobs;

/// Applies `f` once to every element, through the segments' write access.
///
/// For containers `f` receives `&mut T`; for zips a tuple of the bases'
/// elements; for transforms the computed value.
pub fn for_each<R, F>(range: &R, f: F) -> Result<()>
where
    R: SegmentedRange + ?Sized,
    F: for<'g> Fn(ElemOf<'g, R::Segment>) + Send + Sync + 'static,
{
    let f = Arc::new(f);
    let jobs = range
        .segments()
        .into_iter()
        .filter(|seg| !seg.is_empty())
        .map(|seg| {
            let f = Arc::clone(&f);
            (seg.locale(), move || {
                let mut access = seg.write()?;
                for elem in access.iter_mut() {
                    f(elem);
                }
                Ok(())
            })
        })
        .collect();
    run_jobs(range.runtime().as_ref(), jobs)?;
    Ok(())
}

/// Folds the range with `op`, starting from `init`.
///
/// Each segment is folded on its locale; the partial results are combined on
/// the caller in ascending segment order, so exact types give the same
/// answer for any segmentation.
pub fn reduce<R, T, Op>(range: &R, init: T, op: Op) -> Result<T>
where
    R: SegmentedRange + ?Sized,
    R::Segment: Segment<Item = T>,
    T: Clone + Send + 'static,
    Op: BinaryOp<T>,
{
    let jobs = range
        .segments()
        .into_iter()
        .filter(|seg| !seg.is_empty())
        .map(|seg| {
            let op = op.clone();
            (seg.locale(), move || {
                let access = seg.read()?;
                Ok(access.iter().reduce(|a, b| op.apply(a, b)))
            })
        })
        .collect();
    let partials: Vec<Option<T>> = run_jobs(range.runtime().as_ref(), jobs)?;
    Ok(partials.into_iter().flatten().fold(init, |acc, p| op.apply(acc, p)))
}
