use crate::error::{Error, Result};
use crate::model::{ContiguousSegment, ReadAccess, Segment, SegmentedRange};
use crate::runtime::{HandleSlice, StorageId};
use crate::views::realign_segments;

use super::dispatch::run_jobs;

/// Copies `src` into `dst` element by element.
///
/// Both segmentations are cut at the union of their boundaries and each
/// piece is copied by a task on the destination's locale. When the two
/// ranges share storage every piece is read before any is written.
pub fn copy<S, D, T>(src: &S, dst: &D) -> Result<()>
where
    S: SegmentedRange + ?Sized,
    S::Segment: Segment<Item = T>,
    D: SegmentedRange + ?Sized,
    D::Segment: ContiguousSegment<Item = T>,
    T: Clone + Send + Sync + 'static,
{
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            expected: dst.len(),
            found: src.len(),
        });
    }
    let pieces = copy_plan(&src.segments(), &dst.segments())?;
    if pieces.is_empty() {
        return Ok(());
    }
    let runtime = dst.runtime().or_else(|| src.runtime());

    let mut src_ids = Vec::new();
    let mut dst_ids: Vec<StorageId> = Vec::new();
    for (s, d) in &pieces {
        s.storage_ids(&mut src_ids);
        dst_ids.push(d.handle().id());
    }
    let overlapping = src_ids.iter().any(|id| dst_ids.contains(id));

    if !overlapping {
        let jobs = pieces
            .into_iter()
            .map(|(s, d)| {
                let locale = d.locale().or(s.locale());
                (locale, move || write_piece(&s, &d))
            })
            .collect();
        run_jobs(runtime.as_ref(), jobs)?;
        return Ok(());
    }

    let (sources, targets): (Vec<_>, Vec<_>) = pieces.into_iter().unzip();
    let reads = sources
        .into_iter()
        .map(|s| (s.locale(), move || Ok(s.read()?.iter().collect::<Vec<T>>())))
        .collect();
    let staged: Vec<Vec<T>> = run_jobs(runtime.as_ref(), reads)?;
    let writes = targets
        .into_iter()
        .zip(staged)
        .map(|(d, values)| {
            (d.locale(), move || {
                d.write()?.clone_from_slice(&values);
                Ok(())
            })
        })
        .collect();
    run_jobs(runtime.as_ref(), writes)?;
    Ok(())
}

/// Matching `(source piece, destination slice)` pairs of equal length.
pub(crate) fn copy_plan<S, D>(src: &[S], dst: &[D]) -> Result<Vec<(S, HandleSlice<D::Item>)>>
where
    S: Segment,
    D: ContiguousSegment,
{
    let lengths = vec![
        src.iter().map(Segment::len).collect::<Vec<_>>(),
        dst.iter().map(Segment::len).collect::<Vec<_>>(),
    ];
    let plan = realign_segments(&lengths)?;
    Ok(plan
        .into_iter()
        .map(|chunk| {
            let (si, sr) = chunk.parts[0].clone();
            let (di, dr) = chunk.parts[1].clone();
            (src[si].trim(sr), dst[di].storage().sub(dr))
        })
        .collect())
}

fn write_piece<S, T>(src: &S, dst: &HandleSlice<T>) -> Result<()>
where
    S: Segment<Item = T>,
{
    let values = src.read()?;
    let mut out = dst.write()?;
    for (d, s) in out.iter_mut().zip(values.iter()) {
        *d = s;
    }
    Ok(())
}
