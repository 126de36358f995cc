use crate::error::{Error, Result};
use crate::model::{RangeKind, Segment, SegmentedRange};
use crate::runtime::Runtime;

/// Restricts a segment list to global elements `[first, last)`.
///
/// Segments entirely inside the window are passed through untouched, partial
/// ones are trimmed and the rest (including empty intersections) are
/// dropped. The full window returns the input unchanged.
pub fn trim_segments<S: Segment>(segments: &[S], first: usize, last: usize) -> Result<Vec<S>> {
    let total: usize = segments.iter().map(Segment::len).sum();
    if first > last || last > total {
        return Err(Error::InvalidTrim {
            first,
            last,
            len: total,
        });
    }
    if first == 0 && last == total {
        return Ok(segments.to_vec());
    }
    let mut out = Vec::new();
    let mut start = 0;
    for seg in segments {
        let end = start + seg.len();
        let lo = first.max(start);
        let hi = last.min(end);
        if lo < hi {
            if lo == start && hi == end {
                out.push(seg.clone());
            } else {
                out.push(seg.trim(lo - start..hi - start));
            }
        }
        start = end;
        if start >= last {
            break;
        }
    }
    Ok(out)
}

/// The first `min(count, len)` elements of a range.
#[derive(Clone)]
pub struct TakeView<B> {
    base: B,
    count: usize,
}

impl<B: SegmentedRange> TakeView<B> {
    pub fn new(base: B, count: usize) -> Self {
        TakeView { base, count }
    }
}

impl<B: SegmentedRange> SegmentedRange for TakeView<B> {
    type Segment = B::Segment;

    fn segments(&self) -> Vec<B::Segment> {
        let segments = self.base.segments();
        let total = segments.iter().map(Segment::len).sum::<usize>();
        trim_segments(&segments, 0, self.count.min(total)).expect("window within range")
    }

    fn len(&self) -> usize {
        self.count.min(self.base.len())
    }

    fn kind(&self) -> RangeKind {
        self.base.kind()
    }

    fn runtime(&self) -> Option<Runtime> {
        self.base.runtime()
    }
}

/// A range without its first `min(count, len)` elements.
#[derive(Clone)]
pub struct DropView<B> {
    base: B,
    count: usize,
}

impl<B: SegmentedRange> DropView<B> {
    pub fn new(base: B, count: usize) -> Self {
        DropView { base, count }
    }
}

impl<B: SegmentedRange> SegmentedRange for DropView<B> {
    type Segment = B::Segment;

    fn segments(&self) -> Vec<B::Segment> {
        let segments = self.base.segments();
        let total = segments.iter().map(Segment::len).sum::<usize>();
        trim_segments(&segments, self.count.min(total), total).expect("window within range")
    }

    fn len(&self) -> usize {
        self.base.len().saturating_sub(self.count)
    }

    fn kind(&self) -> RangeKind {
        self.base.kind()
    }

    fn runtime(&self) -> Option<Runtime> {
        self.base.runtime()
    }
}
