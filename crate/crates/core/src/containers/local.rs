use std::ops::Range;

use crate::error::Result;
use crate::model::{segment_as_range, ContiguousSegment, LocaleId, RangeKind, Segment, SegmentedRange};
use crate::runtime::{HandleSlice, Runtime, SliceRead, SliceWrite, StorageHandle, StorageId};

/// A plain array in driver memory. It has no locale; zipped with segmented
/// ranges it is cut to match their segments.
pub struct LocalArray<T> {
    handle: StorageHandle<T>,
}

impl<T> Clone for LocalArray<T> {
    fn clone(&self) -> Self {
        LocalArray {
            handle: self.handle.clone(),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> LocalArray<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        LocalArray {
            handle: StorageHandle::host(values),
        }
    }

    pub fn filled(len: usize, value: T) -> Self {
        Self::from_vec(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.handle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handle.is_empty()
    }

    pub fn read(&self) -> Result<SliceRead<T>> {
        self.handle.full().read()
    }

    pub fn write(&self) -> Result<SliceWrite<T>> {
        self.handle.full().write()
    }
}

impl<T: Clone + Send + Sync + 'static> SegmentedRange for LocalArray<T> {
    type Segment = HostSegment<T>;

    fn segments(&self) -> Vec<HostSegment<T>> {
        if self.is_empty() {
            Vec::new()
        } else {
            vec![HostSegment {
                slice: self.handle.full(),
            }]
        }
    }

    fn len(&self) -> usize {
        self.handle.len()
    }

    fn kind(&self) -> RangeKind {
        RangeKind::Local
    }

    fn runtime(&self) -> Option<Runtime> {
        None
    }
}

/// A slice of a [`LocalArray`].
pub struct HostSegment<T> {
    slice: HandleSlice<T>,
}

impl<T> Clone for HostSegment<T> {
    fn clone(&self) -> Self {
        HostSegment {
            slice: self.slice.clone(),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> Segment for HostSegment<T> {
    type Item = T;
    type Read = SliceRead<T>;
    type Write = SliceWrite<T>;

    fn locale(&self) -> Option<LocaleId> {
        None
    }

    fn len(&self) -> usize {
        self.slice.len()
    }

    fn trim(&self, range: Range<usize>) -> Self {
        HostSegment {
            slice: self.slice.sub(range),
        }
    }

    fn read(&self) -> Result<SliceRead<T>> {
        self.slice.read()
    }

    fn write(&self) -> Result<SliceWrite<T>> {
        self.slice.write()
    }

    fn storage_ids(&self, ids: &mut Vec<StorageId>) {
        ids.push(self.slice.handle().id());
    }
}

impl<T: Clone + Send + Sync + 'static> ContiguousSegment for HostSegment<T> {
    fn storage(&self) -> HandleSlice<T> {
        self.slice.clone()
    }
}

segment_as_range!(HostSegment<T> where T: Clone + Send + Sync + 'static);
