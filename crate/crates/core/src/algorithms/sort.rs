use std::cmp::Ordering;

use crate::error::Result;
use crate::model::{ContiguousSegment, LocaleId, SegmentedRange};
use crate::runtime::{copy_slices, wait_all_ok, HandleSlice, Runtime, StorageHandle, Ticket};
use crate::views::realign_segments;

use super::dispatch::run_jobs;

/// Sorts a range in place in nondecreasing order. Not stable.
pub fn sort<R, T>(range: &R) -> Result<()>
where
    R: SegmentedRange + ?Sized,
    R::Segment: ContiguousSegment<Item = T>,
    T: Ord + Clone + Send + Sync + 'static,
{
    sort_by(range, T::cmp)
}

/// Sample sort with one chunk per segment.
///
/// Segments are sorted locally and each contributes `n - 1` evenly spaced
/// samples (all of its elements if it has fewer). The driver picks `n - 1`
/// splitters from the sorted samples; every element goes to the first chunk
/// whose splitter is not less than it. Chunks live on the segments' locales,
/// are sorted there and copied back over the segments in order.
pub fn sort_by<R, T, C>(range: &R, cmp: C) -> Result<()>
where
    R: SegmentedRange + ?Sized,
    R::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    C: Fn(&T, &T) -> Ordering + Clone + Send + Sync + 'static,
{
    let segments: Vec<HandleSlice<T>> = range.segments().iter().map(ContiguousSegment::storage).collect();
    let n = segments.len();
    if n == 0 {
        return Ok(());
    }
    let runtime = range.runtime();
    let rt = runtime.as_ref();
    let locales: Vec<Option<LocaleId>> = segments.iter().map(HandleSlice::locale).collect();

    // Local sort and sampling.
    let jobs = segments
        .iter()
        .cloned()
        .map(|seg| {
            let cmp = cmp.clone();
            (seg.locale(), move || {
                let mut values = seg.write()?;
                values.sort_unstable_by(&cmp);
                Ok(sample_positions(values.len(), n)
                    .map(|p| values[p].clone())
                    .collect::<Vec<T>>())
            })
        })
        .collect();
    let samples: Vec<Vec<T>> = run_jobs(rt, jobs)?;
    if n == 1 {
        return Ok(());
    }
    let mut samples: Vec<T> = samples.into_iter().flatten().collect();
    if samples.is_empty() {
        return Ok(());
    }
    samples.sort_unstable_by(&cmp);
    let splitters = select_splitters(&samples, n);
    let filler = samples.swap_remove(0);

    // Per segment, where each destination chunk starts.
    let jobs = segments
        .iter()
        .cloned()
        .map(|seg| {
            let cmp = cmp.clone();
            let splitters = splitters.clone();
            (seg.locale(), move || {
                let values = seg.read()?;
                Ok(chunk_bounds(&values, &splitters, &cmp))
            })
        })
        .collect();
    let bounds: Vec<Vec<usize>> = run_jobs(rt, jobs)?;

    let mut chunk_sizes = vec![0usize; n];
    for b in &bounds {
        for (d, size) in chunk_sizes.iter_mut().enumerate() {
            *size += b[d + 1] - b[d];
        }
    }
    let chunks: Vec<StorageHandle<T>> = chunk_sizes
        .iter()
        .zip(&locales)
        .map(|(&size, &locale)| match (rt, locale) {
            (Some(rt), Some(locale)) => rt.allocate_with(locale, size, filler.clone()),
            _ => Ok(StorageHandle::host(vec![filler.clone(); size])),
        })
        .collect::<Result<_>>()?;

    // Redistribute.
    let mut fill = vec![0usize; n];
    let mut moves = Vec::new();
    for (seg, b) in segments.iter().zip(&bounds) {
        for d in 0..n {
            let count = b[d + 1] - b[d];
            if count > 0 {
                moves.push((seg.sub(b[d]..b[d + 1]), chunks[d].full().sub(fill[d]..fill[d] + count)));
                fill[d] += count;
            }
        }
    }
    bulk_copy(rt, moves)?;

    let jobs = chunks
        .iter()
        .map(|chunk| {
            let cmp = cmp.clone();
            let chunk = chunk.full();
            (chunk.locale(), move || {
                chunk.write()?.sort_unstable_by(&cmp);
                Ok(())
            })
        })
        .collect();
    run_jobs(rt, jobs)?;

    // Copy back in order.
    let plan = realign_segments(&[chunk_sizes, segments.iter().map(HandleSlice::len).collect()])?;
    let moves = plan
        .into_iter()
        .map(|c| {
            let (ci, cr) = c.parts[0].clone();
            let (si, sr) = c.parts[1].clone();
            (chunks[ci].full().sub(cr), segments[si].sub(sr))
        })
        .collect();
    bulk_copy(rt, moves)
}

/// Positions `floor((j + 1) * len / n)` for `j < n - 1`, or every position
/// when the segment is shorter than `n - 1`.
pub fn sample_positions(len: usize, n: usize) -> Box<dyn Iterator<Item = usize>> {
    if len < n.saturating_sub(1) {
        Box::new(0..len)
    } else {
        Box::new((0..n.saturating_sub(1)).map(move |j| (j + 1) * len / n))
    }
}

/// `n - 1` evenly spaced entries of the sorted sample set.
pub fn select_splitters<T: Clone>(sorted_samples: &[T], n: usize) -> Vec<T> {
    let s = sorted_samples.len();
    (0..n.saturating_sub(1))
        .map(|j| sorted_samples[(j + 1) * s / n].clone())
        .collect()
}

/// Start offsets of every destination chunk within a sorted segment, plus
/// the segment length. Chunk `d` receives the elements `x` with
/// `splitters[d - 1] < x <= splitters[d]`.
pub fn chunk_bounds<T, C>(sorted: &[T], splitters: &[T], cmp: &C) -> Vec<usize>
where
    C: Fn(&T, &T) -> Ordering,
{
    let mut bounds = Vec::with_capacity(splitters.len() + 2);
    bounds.push(0);
    for s in splitters {
        bounds.push(sorted.partition_point(|x| cmp(x, s) != Ordering::Greater));
    }
    bounds.push(sorted.len());
    bounds
}

fn bulk_copy<T>(runtime: Option<&Runtime>, moves: Vec<(HandleSlice<T>, HandleSlice<T>)>) -> Result<()>
where
    T: Clone + Send + Sync + 'static,
{
    match runtime {
        Some(rt) => {
            let tickets: Vec<Ticket<Result<()>>> = moves
                .iter()
                .map(|(src, dst)| rt.copy_async(src, dst))
                .collect::<Result<_>>()?;
            wait_all_ok(tickets)?;
        }
        None => {
            for (src, dst) in &moves {
                copy_slices(src, dst)?;
            }
        }
    }
    Ok(())
}
