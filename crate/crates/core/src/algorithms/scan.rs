use std::collections::HashSet;

use crate::containers::{DistributedVector, LocalArray};
use crate::error::{Error, Result};
use crate::model::{is_aligned, ContiguousSegment, Distribution, ReadAccess, Segment, SegmentedRange};
use crate::runtime::{Runtime, StorageId};

use super::copy::copy;
use super::dispatch::run_jobs;
use super::ops::BinaryOp;

/// Intermediate values of a parallel inclusive scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTrace<T> {
    /// Last element of each output segment after the local scans (`None` for
    /// empty segments).
    pub partial_sums: Vec<Option<T>>,
    /// Value added to each segment in the offset pass: the fold of all
    /// earlier partial sums.
    pub offsets: Vec<Option<T>>,
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Flavor {
    Inclusive,
    Exclusive,
}

/// `out[i] = in[0] op ... op in[i]`.
pub fn inclusive_scan<I, O, T, Op>(input: &I, out: &O, op: Op) -> Result<()>
where
    I: SegmentedRange + ?Sized,
    I::Segment: Segment<Item = T>,
    O: SegmentedRange + ?Sized,
    O::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    Op: BinaryOp<T>,
{
    inclusive_scan_traced(input, out, op).map(|_| ())
}

/// [`inclusive_scan`], also returning the per-segment intermediates.
pub fn inclusive_scan_traced<I, O, T, Op>(input: &I, out: &O, op: Op) -> Result<ScanTrace<T>>
where
    I: SegmentedRange + ?Sized,
    I::Segment: Segment<Item = T>,
    O: SegmentedRange + ?Sized,
    O::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    Op: BinaryOp<T>,
{
    scan(input, out, None, op, Flavor::Inclusive)
}

/// `out[0] = init`, `out[i] = init op in[0] op ... op in[i-1]`.
pub fn exclusive_scan<I, O, T, Op>(input: &I, out: &O, init: T, op: Op) -> Result<()>
where
    I: SegmentedRange + ?Sized,
    I::Segment: Segment<Item = T>,
    O: SegmentedRange + ?Sized,
    O::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    Op: BinaryOp<T>,
{
    scan(input, out, Some(init), op, Flavor::Exclusive).map(|_| ())
}

fn scan<I, O, T, Op>(input: &I, out: &O, init: Option<T>, op: Op, flavor: Flavor) -> Result<ScanTrace<T>>
where
    I: SegmentedRange + ?Sized,
    I::Segment: Segment<Item = T>,
    O: SegmentedRange + ?Sized,
    O::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    Op: BinaryOp<T>,
{
    if input.len() != out.len() {
        return Err(Error::LengthMismatch {
            expected: out.len(),
            found: input.len(),
        });
    }
    let out_segs = out.segments();
    let runtime = out.runtime().or_else(|| input.runtime());
    if out.is_empty() {
        return Ok(ScanTrace {
            partial_sums: vec![None; out_segs.len()],
            offsets: vec![None; out_segs.len()],
        });
    }
    let in_segs = input.segments();
    let out_dist = Distribution::of_segments(&out_segs);
    if is_aligned(&[Distribution::of_segments(&in_segs), out_dist.clone()]) && self_contained(&in_segs, &out_segs) {
        return scan_aligned(runtime.as_ref(), in_segs, out_segs, init, op, flavor);
    }

    // Stage the input in a buffer laid out like `out`.
    let filler = input.get(0)?;
    match &runtime {
        Some(rt) if out_dist.descriptors().iter().all(|d| d.rank.is_some()) => {
            let temp = DistributedVector::with_distribution(rt, &out_dist, filler)?;
            copy(input, &temp)?;
            scan_aligned(runtime.as_ref(), temp.segments(), out_segs, init, op, flavor)
        }
        _ if out_segs.len() == 1 => {
            let temp = LocalArray::filled(out.len(), filler);
            copy(input, &temp)?;
            scan_aligned(runtime.as_ref(), temp.segments(), out_segs, init, op, flavor)
        }
        _ => {
            let staged = LocalArray::from_vec(input.to_vec()?);
            let temp_out = LocalArray::filled(out.len(), staged.read()?[0].clone());
            let trace = scan_aligned(None, staged.segments(), temp_out.segments(), init, op, flavor)?;
            copy(&temp_out, out)?;
            Ok(trace)
        }
    }
}

/// True unless an input segment shares storage with an output segment other
/// than its counterpart.
fn self_contained<S: Segment, D: Segment>(input: &[S], out: &[D]) -> bool {
    let out_ids: Vec<Vec<StorageId>> = out
        .iter()
        .map(|d| {
            let mut ids = Vec::new();
            d.storage_ids(&mut ids);
            ids
        })
        .collect();
    let all: HashSet<StorageId> = out_ids.iter().flatten().copied().collect();
    input.iter().zip(&out_ids).all(|(s, own)| {
        let mut ids = Vec::new();
        s.storage_ids(&mut ids);
        ids.iter().all(|id| !all.contains(id) || own.contains(id))
    })
}

fn scan_aligned<S, D, T, Op>(
    runtime: Option<&Runtime>,
    input: Vec<S>,
    out: Vec<D>,
    init: Option<T>,
    op: Op,
    flavor: Flavor,
) -> Result<ScanTrace<T>>
where
    S: Segment<Item = T>,
    D: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
    Op: BinaryOp<T>,
{
    // Local scan per segment; each task returns its segment's total.
    let jobs = input
        .into_iter()
        .zip(out.iter().cloned())
        .map(|(src, dst)| {
            let op = op.clone();
            (dst.locale(), move || local_scan(&src, &dst, &op, flavor))
        })
        .collect();
    let partial_sums: Vec<Option<T>> = run_jobs(runtime, jobs)?;

    // Scan the partial sums on the driver.
    let mut offsets = Vec::with_capacity(partial_sums.len());
    let mut running = init;
    for partial in &partial_sums {
        offsets.push(running.clone());
        if let Some(p) = partial {
            running = Some(match running {
                Some(acc) => op.apply(acc, p.clone()),
                None => p.clone(),
            });
        }
    }

    // Offset pass.
    let jobs = out
        .into_iter()
        .zip(offsets.iter().cloned())
        .filter(|(dst, offset)| !dst.is_empty() && (offset.is_some() || flavor == Flavor::Exclusive))
        .map(|(dst, offset)| {
            let op = op.clone();
            (dst.locale(), move || {
                let mut values = dst.storage().write()?;
                match flavor {
                    Flavor::Inclusive => {
                        let offset = offset.expect("filtered above");
                        for x in values.iter_mut() {
                            *x = op.apply(offset.clone(), x.clone());
                        }
                    }
                    Flavor::Exclusive => {
                        let offset = offset.expect("exclusive scan starts from init");
                        for x in values[1..].iter_mut() {
                            *x = op.apply(offset.clone(), x.clone());
                        }
                        values[0] = offset;
                    }
                }
                Ok(())
            })
        })
        .collect();
    run_jobs(runtime, jobs)?;
    Ok(ScanTrace { partial_sums, offsets })
}

/// Inclusive: `dst[j] = src[0] op .. op src[j]`. Exclusive: the same shifted
/// right by one, with `dst[0]` left for the offset pass. Returns the fold of
/// the whole segment.
fn local_scan<S, D, T, Op>(src: &S, dst: &D, op: &Op, flavor: Flavor) -> Result<Option<T>>
where
    S: Segment<Item = T>,
    D: ContiguousSegment<Item = T>,
    T: Clone,
    Op: BinaryOp<T>,
{
    let mut ids = Vec::new();
    src.storage_ids(&mut ids);
    let target = dst.storage();
    let shared = ids.contains(&target.handle().id());
    let write = |values: &mut dyn Iterator<Item = T>| -> Result<Option<T>> {
        let mut out = target.write()?;
        let mut acc: Option<T> = None;
        for (k, x) in values.enumerate() {
            let next = match acc.take() {
                Some(a) => op.apply(a, x),
                None => x,
            };
            match flavor {
                Flavor::Inclusive => out[k] = next.clone(),
                Flavor::Exclusive => {
                    if k + 1 < out.len() {
                        out[k + 1] = next.clone();
                    }
                }
            }
            acc = Some(next);
        }
        Ok(acc)
    };
    if shared {
        let staged: Vec<T> = src.read()?.iter().collect();
        write(&mut staged.into_iter())
    } else {
        let guard = src.read()?;
        let total = write(&mut guard.iter());
        drop(guard);
        total
    }
}
