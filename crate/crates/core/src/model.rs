//! Locality and segmentation contracts.
//!
//! A [`Segment`] is a contiguous run of elements that lives in one memory
//! locale (or in driver memory, for plain local arrays). A [`SegmentedRange`]
//! exposes an ordered list of segments whose concatenation is the range's
//! global element sequence. Every container, view and algorithm in the crate
//! is written against these two traits.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::runtime::HandleSlice;
use crate::runtime::{Runtime, SliceRead, SliceWrite, StorageId};

/// Index of a memory locale.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocaleId(pub usize);

impl LocaleId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for LocaleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for LocaleId {
    fn from(value: usize) -> Self {
        LocaleId(value)
    }
}

/// Placement and extent of one segment inside a global index space.
///
/// `rank` is `None` only for pieces of plain driver-side arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentDescriptor {
    pub rank: Option<LocaleId>,
    pub global_offset: usize,
    pub length: usize,
}

/// Ordered segment descriptors that tile `[0, total_length)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distribution {
    total_length: usize,
    descriptors: Vec<SegmentDescriptor>,
}

impl Distribution {
    /// Builds a distribution from `(rank, length)` pairs laid out back to back.
    pub fn from_parts<I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (Option<LocaleId>, usize)>,
    {
        let mut offset = 0;
        let descriptors = parts
            .into_iter()
            .map(|(rank, length)| {
                let d = SegmentDescriptor {
                    rank,
                    global_offset: offset,
                    length,
                };
                offset += length;
                d
            })
            .collect();
        Distribution {
            total_length: offset,
            descriptors,
        }
    }

    pub fn of_segments<S: Segment>(segments: &[S]) -> Self {
        Self::from_parts(segments.iter().map(|s| (s.locale(), s.len())))
    }

    pub fn total_length(&self) -> usize {
        self.total_length
    }

    pub fn descriptors(&self) -> &[SegmentDescriptor] {
        &self.descriptors
    }

    pub fn segment_count(&self) -> usize {
        self.descriptors.len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.descriptors.iter().map(|d| d.length).collect()
    }

    pub fn ranks(&self) -> Vec<Option<LocaleId>> {
        self.descriptors.iter().map(|d| d.rank).collect()
    }

    /// Interior cut points, i.e. segment start offsets other than `0` and
    /// `total_length`, deduplicated.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut cuts: Vec<usize> = self
            .descriptors
            .iter()
            .map(|d| d.global_offset)
            .filter(|&o| o != 0 && o != self.total_length)
            .collect();
        cuts.dedup();
        cuts
    }

    /// Maps a global index to `(segment index, offset inside segment)`.
    pub fn locate(&self, index: usize) -> Option<(usize, usize)> {
        if index >= self.total_length {
            return None;
        }
        // Last descriptor starting at or before `index` that is non-empty.
        let seg = self
            .descriptors
            .partition_point(|d| d.global_offset <= index)
            .checked_sub(1)?;
        let mut seg = seg;
        while self.descriptors[seg].length == 0 {
            seg -= 1;
        }
        Some((seg, index - self.descriptors[seg].global_offset))
    }

    /// True when descriptors are contiguous, start at zero and sum to the
    /// total length.
    pub fn is_well_formed(&self) -> bool {
        let mut offset = 0;
        for d in &self.descriptors {
            if d.global_offset != offset {
                return false;
            }
            offset += d.length;
        }
        offset == self.total_length
    }
}

/// Default block partition: `p` segments of `ceil(n / p)` elements, the tail
/// truncated. Segment `i` has length `min(s, max(0, n - i*s))`.
pub fn block_lengths(n: usize, p: usize) -> Vec<usize> {
    assert!(p >= 1, "block partition needs at least one segment");
    let s = n.div_ceil(p);
    (0..p).map(|i| s.min(n.saturating_sub(i * s))).collect()
}

/// Read access to a locked segment.
pub trait ReadAccess {
    type Item;
    type Iter<'g>: Iterator<Item = Self::Item>
    where
        Self: 'g;

    fn iter(&self) -> Self::Iter<'_>;

    fn get(&self, index: usize) -> Self::Item;
}

/// Mutable (or, for computed views, read-only) element access to a locked
/// segment, as used by `for_each`.
pub trait WriteAccess {
    type Elem<'g>
    where
        Self: 'g;
    type IterMut<'g>: Iterator<Item = Self::Elem<'g>>
    where
        Self: 'g;

    fn iter_mut(&mut self) -> Self::IterMut<'_>;
}

/// One locale-resident piece of a segmented range.
///
/// Segments are cheap handles: cloning never copies elements. Element access
/// goes through [`Segment::read`] / [`Segment::write`], which lock the
/// underlying storage for the lifetime of the returned guard.
pub trait Segment: Clone + Send + Sync + 'static {
    type Item: Clone + Send + 'static;
    type Read: ReadAccess<Item = Self::Item>;
    type Write: WriteAccess;

    /// Owning locale, or `None` for driver memory.
    fn locale(&self) -> Option<LocaleId>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sub-segment covering `range` (segment-relative). Keeps the locale.
    fn trim(&self, range: Range<usize>) -> Self;

    fn read(&self) -> Result<Self::Read>;

    fn write(&self) -> Result<Self::Write>;

    /// Identifiers of every storage block this segment touches.
    fn storage_ids(&self, ids: &mut Vec<StorageId>);
}

/// Something that lives wholly in one locale.
pub trait RemoteRange {
    fn rank(&self) -> LocaleId;
}

/// A segment backed directly by one slice of storage.
pub trait ContiguousSegment: Segment {
    fn storage(&self) -> HandleSlice<Self::Item>;
}

pub type ElemOf<'g, S> = <<S as Segment>::Write as WriteAccess>::Elem<'g>;
pub type ItemOf<R> = <<R as SegmentedRange>::Segment as Segment>::Item;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RangeKind {
    /// Plain driver-side data with no locale.
    Local,
    /// A single piece living in one locale.
    Remote,
    /// Partitioned over locales.
    Distributed,
}

/// A range that exposes its segmentation.
pub trait SegmentedRange {
    type Segment: Segment;

    /// Segments in order; their concatenation is the global sequence.
    fn segments(&self) -> Vec<Self::Segment>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> RangeKind {
        RangeKind::Distributed
    }

    /// Runtime owning the range's storage, if any.
    fn runtime(&self) -> Option<Runtime>;

    fn distribution(&self) -> Distribution {
        Distribution::of_segments(&self.segments())
    }

    /// Segment-by-segment cursor over every element.
    fn iter(&self) -> GlobalIter<Self::Segment> {
        GlobalIter::new(self.segments())
    }

    fn get(&self, index: usize) -> Result<<Self::Segment as Segment>::Item> {
        let segments = self.segments();
        let dist = Distribution::of_segments(&segments);
        let (seg, offset) = dist.locate(index).ok_or(Error::IndexOutOfBounds {
            index,
            len: dist.total_length(),
        })?;
        Ok(segments[seg].read()?.get(offset))
    }

    fn to_vec(&self) -> Result<Vec<<Self::Segment as Segment>::Item>> {
        let mut out = Vec::with_capacity(self.len());
        for seg in self.segments() {
            out.extend(seg.read()?.iter());
        }
        Ok(out)
    }
}

impl<R: SegmentedRange + ?Sized> SegmentedRange for &R {
    type Segment = R::Segment;

    fn segments(&self) -> Vec<Self::Segment> {
        (**self).segments()
    }

    fn len(&self) -> usize {
        (**self).len()
    }

    fn kind(&self) -> RangeKind {
        (**self).kind()
    }

    fn runtime(&self) -> Option<Runtime> {
        (**self).runtime()
    }
}

impl<R: RemoteRange + ?Sized> RemoteRange for &R {
    fn rank(&self) -> LocaleId {
        (**self).rank()
    }
}

/// Makes a segment type usable wherever a range is expected (a range with a
/// single segment).
macro_rules! segment_as_range {
    ($ty:ident < $($g:ident),* > where $($bounds:tt)*) => {
        impl<$($g),*> $crate::model::SegmentedRange for $ty<$($g),*> where $($bounds)* {
            type Segment = Self;

            fn segments(&self) -> Vec<Self> {
                if $crate::model::Segment::is_empty(self) {
                    Vec::new()
                } else {
                    vec![self.clone()]
                }
            }

            fn len(&self) -> usize {
                $crate::model::Segment::len(self)
            }

            fn kind(&self) -> $crate::model::RangeKind {
                match $crate::model::Segment::locale(self) {
                    Some(_) => $crate::model::RangeKind::Remote,
                    None => $crate::model::RangeKind::Local,
                }
            }

            fn runtime(&self) -> Option<$crate::runtime::Runtime> {
                None
            }
        }
    };
}
pub(crate) use segment_as_range;

/// Locale of a remote range. Stable across calls.
pub fn rank_of<R: RemoteRange + ?Sized>(range: &R) -> LocaleId {
    range.rank()
}

pub fn segments_of<R: SegmentedRange + ?Sized>(range: &R) -> Vec<R::Segment> {
    range.segments()
}

/// Plain span over a contiguous segment, valid only on the owning locale.
pub fn local_view<S>(segment: &S, current: LocaleId) -> Result<SliceRead<S::Item>>
where
    S: ContiguousSegment + RemoteRange,
{
    check_locale(segment.rank(), current)?;
    segment.storage().read()
}

pub fn local_view_mut<S>(segment: &S, current: LocaleId) -> Result<SliceWrite<S::Item>>
where
    S: ContiguousSegment + RemoteRange,
{
    check_locale(segment.rank(), current)?;
    segment.storage().write()
}

fn check_locale(segment: LocaleId, current: LocaleId) -> Result<()> {
    if segment == current {
        Ok(())
    } else {
        Err(Error::OffLocaleAccess {
            segment,
            current: Some(current),
        })
    }
}

/// True iff all distributions have the same segment count and, segment by
/// segment, equal lengths and equal ranks.
pub fn is_aligned(distributions: &[Distribution]) -> bool {
    let Some((first, rest)) = distributions.split_first() else {
        return true;
    };
    rest.iter().all(|d| {
        d.segment_count() == first.segment_count()
            && d.descriptors()
                .iter()
                .zip(first.descriptors())
                .all(|(a, b)| a.length == b.length && a.rank == b.rank)
    })
}

/// Pairwise alignment of two ranges.
pub fn aligned<A, B>(a: &A, b: &B) -> bool
where
    A: SegmentedRange + ?Sized,
    B: SegmentedRange + ?Sized,
{
    is_aligned(&[a.distribution(), b.distribution()])
}

/// Global iteration over a segmented range.
///
/// Each segment is read under its lock and buffered before its elements are
/// yielded, so the cursor never holds a lock between calls.
pub struct GlobalIter<S: Segment> {
    segments: std::vec::IntoIter<S>,
    buffer: std::vec::IntoIter<S::Item>,
}

impl<S: Segment> GlobalIter<S> {
    pub fn new(segments: Vec<S>) -> Self {
        GlobalIter {
            segments: segments.into_iter(),
            buffer: Vec::new().into_iter(),
        }
    }
}

impl<S: Segment> Iterator for GlobalIter<S> {
    type Item = S::Item;

    fn next(&mut self) -> Option<S::Item> {
        loop {
            if let Some(item) = self.buffer.next() {
                return Some(item);
            }
            let seg = self.segments.next()?;
            let guard = seg.read().unwrap_or_else(|e| panic!("global iteration failed: {e}"));
            self.buffer = guard.iter().collect::<Vec<_>>().into_iter();
        }
    }
}
