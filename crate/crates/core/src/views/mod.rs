//! Lazy views over segmented ranges.
//!
//! Views hold their bases by value; containers clone shallowly, so a view
//! keeps its base's storage alive. Pass `&range` to borrow instead.

mod transform;
mod trim;
mod zip;

pub use transform::{TransformRead, TransformSegment, TransformView};
pub use trim::{trim_segments, DropView, TakeView};
pub use zip::{realign_segments, RealignChunk, Zip, ZipAccess, ZipBases, ZipSegment};

use crate::error::Result;
use crate::model::{Segment, SegmentedRange};

pub fn transform<B, F, U>(base: B, f: F) -> TransformView<B, F>
where
    B: SegmentedRange,
    F: Fn(<B::Segment as Segment>::Item) -> U + Send + Sync + 'static,
{
    TransformView::new(base, f)
}

pub fn take<B: SegmentedRange>(base: B, count: usize) -> TakeView<B> {
    TakeView::new(base, count)
}

pub fn drop<B: SegmentedRange>(base: B, count: usize) -> DropView<B> {
    DropView::new(base, count)
}

/// Zips a tuple of 2 to 6 ranges.
pub fn zip<B: ZipBases>(bases: B) -> Result<Zip<B>> {
    Zip::new(bases)
}

/// Method-style view adaptors.
pub trait ViewExt: SegmentedRange + Sized {
    fn transform<F, U>(self, f: F) -> TransformView<Self, F>
    where
        F: Fn(<Self::Segment as Segment>::Item) -> U + Send + Sync + 'static,
    {
        TransformView::new(self, f)
    }

    fn take(self, count: usize) -> TakeView<Self> {
        TakeView::new(self, count)
    }

    fn skip(self, count: usize) -> DropView<Self> {
        DropView::new(self, count)
    }
}

impl<R: SegmentedRange> ViewExt for R {}
