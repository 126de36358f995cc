use std::ops::Range;
use std::sync::Arc;

use crate::error::Result;
use crate::model::{
    segment_as_range, LocaleId, RangeKind, ReadAccess, RemoteRange, Segment, SegmentedRange, WriteAccess,
};
use crate::runtime::{Runtime, StorageId};

/// Lazy elementwise map over a range. Read-only.
pub struct TransformView<B, F> {
    base: B,
    f: Arc<F>,
}

impl<B: Clone, F> Clone for TransformView<B, F> {
    fn clone(&self) -> Self {
        TransformView {
            base: self.base.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<B, F> TransformView<B, F> {
    pub fn new(base: B, f: F) -> Self {
        TransformView { base, f: Arc::new(f) }
    }

    pub fn base(&self) -> &B {
        &self.base
    }
}

impl<B, F, U> SegmentedRange for TransformView<B, F>
where
    B: SegmentedRange,
    F: Fn(<B::Segment as Segment>::Item) -> U + Send + Sync + 'static,
    U: Clone + Send + 'static,
{
    type Segment = TransformSegment<B::Segment, F>;

    fn segments(&self) -> Vec<Self::Segment> {
        self.base
            .segments()
            .into_iter()
            .map(|base| TransformSegment {
                base,
                f: Arc::clone(&self.f),
            })
            .collect()
    }

    fn len(&self) -> usize {
        self.base.len()
    }

    fn kind(&self) -> RangeKind {
        self.base.kind()
    }

    fn runtime(&self) -> Option<Runtime> {
        self.base.runtime()
    }
}

/// A base segment with a function applied on read. Same rank as the base.
pub struct TransformSegment<S, F> {
    base: S,
    f: Arc<F>,
}

impl<S: Clone, F> Clone for TransformSegment<S, F> {
    fn clone(&self) -> Self {
        TransformSegment {
            base: self.base.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<S, F> TransformSegment<S, F> {
    pub fn new(base: S, f: F) -> Self {
        TransformSegment { base, f: Arc::new(f) }
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

impl<S, F, U> Segment for TransformSegment<S, F>
where
    S: Segment,
    F: Fn(S::Item) -> U + Send + Sync + 'static,
    U: Clone + Send + 'static,
{
    type Item = U;
    type Read = TransformRead<S::Read, F>;
    type Write = TransformRead<S::Read, F>;

    fn locale(&self) -> Option<LocaleId> {
        self.base.locale()
    }

    fn len(&self) -> usize {
        self.base.len()
    }

    fn trim(&self, range: Range<usize>) -> Self {
        TransformSegment {
            base: self.base.trim(range),
            f: Arc::clone(&self.f),
        }
    }

    fn read(&self) -> Result<Self::Read> {
        Ok(TransformRead {
            guard: self.base.read()?,
            f: Arc::clone(&self.f),
        })
    }

    /// Transform segments cannot be written; this is the read guard, whose
    /// "mutable" elements are computed values.
    fn write(&self) -> Result<Self::Write> {
        self.read()
    }

    fn storage_ids(&self, ids: &mut Vec<StorageId>) {
        self.base.storage_ids(ids)
    }
}

impl<S: RemoteRange, F> RemoteRange for TransformSegment<S, F> {
    fn rank(&self) -> LocaleId {
        self.base.rank()
    }
}

segment_as_range!(TransformSegment<S, F> where TransformSegment<S, F>: Segment);

pub struct TransformRead<R, F> {
    guard: R,
    f: Arc<F>,
}

impl<R, F, U> ReadAccess for TransformRead<R, F>
where
    R: ReadAccess,
    F: Fn(R::Item) -> U,
{
    type Item = U;
    type Iter<'g>
        = std::iter::Map<R::Iter<'g>, &'g F>
    where
        Self: 'g;

    fn iter(&self) -> Self::Iter<'_> {
        self.guard.iter().map(&*self.f)
    }

    fn get(&self, index: usize) -> U {
        (self.f)(self.guard.get(index))
    }
}

impl<R, F, U> WriteAccess for TransformRead<R, F>
where
    R: ReadAccess,
    F: Fn(R::Item) -> U,
{
    type Elem<'g>
        = U
    where
        Self: 'g;
    type IterMut<'g>
        = std::iter::Map<R::Iter<'g>, &'g F>
    where
        Self: 'g;

    fn iter_mut(&mut self) -> Self::IterMut<'_> {
        self.guard.iter().map(&*self.f)
    }
}
