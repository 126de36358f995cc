use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    block_lengths, segment_as_range, ContiguousSegment, Distribution, LocaleId, RangeKind, RemoteRange, Segment,
    SegmentedRange,
};
use crate::runtime::{copy_from_host, HandleSlice, Runtime, SliceRead, SliceWrite, StorageHandle, StorageId};

/// How a [`DistributedVector`] is split into segments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Partition {
    /// One block per locale: `P` segments of `ceil(n/P)` elements.
    #[default]
    Block,
    /// `p` block segments, segment `i` on locale `i mod P`.
    Blocks(usize),
    /// Explicit segment lengths, segment `i` on locale `i mod P`.
    Lengths(Vec<usize>),
    /// Explicit `(locale, length)` per segment.
    Explicit(Vec<(LocaleId, usize)>),
}

impl Partition {
    fn resolve(&self, n: usize, locales: usize) -> Result<Vec<(LocaleId, usize)>> {
        let cyclic = |lens: Vec<usize>| -> Vec<(LocaleId, usize)> {
            lens.into_iter()
                .enumerate()
                .map(|(i, l)| (LocaleId(i % locales), l))
                .collect()
        };
        let parts = match self {
            Partition::Block => cyclic(block_lengths(n, locales)),
            Partition::Blocks(0) => return Err(Error::InvalidTiling("partition needs at least one segment".into())),
            Partition::Blocks(p) => cyclic(block_lengths(n, *p)),
            Partition::Lengths(lens) => cyclic(lens.clone()),
            Partition::Explicit(parts) => parts.clone(),
        };
        let total: usize = parts.iter().map(|p| p.1).sum();
        if total != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: total,
            });
        }
        if let Some(&(locale, _)) = parts.iter().find(|p| p.0 .0 >= locales) {
            return Err(Error::InvalidLocale { locale, count: locales });
        }
        Ok(parts)
    }
}

struct VectorInner<T> {
    runtime: Runtime,
    distribution: Distribution,
    storage: Vec<StorageHandle<T>>,
}

/// One-dimensional array partitioned over locales.
///
/// Cloning is shallow: clones share storage, which is how views keep their
/// base alive.
pub struct DistributedVector<T> {
    inner: Arc<VectorInner<T>>,
}

impl<T> Clone for DistributedVector<T> {
    fn clone(&self) -> Self {
        DistributedVector {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T> std::fmt::Debug for DistributedVector<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistributedVector")
            .field("len", &self.inner.distribution.total_length())
            .field("lengths", &self.inner.distribution.lengths())
            .finish()
    }
}

impl<T: Clone + Send + Sync + 'static> DistributedVector<T> {
    /// Block-partitioned vector with every element set to `init`.
    pub fn new(runtime: &Runtime, len: usize, init: T) -> Result<Self> {
        Self::with_partition(runtime, len, init, Partition::Block)
    }

    pub fn with_partition(runtime: &Runtime, len: usize, init: T, partition: Partition) -> Result<Self> {
        let parts = partition.resolve(len, runtime.locale_count())?;
        Self::allocate(runtime, len, parts, |locale, l| {
            runtime.allocate_with(locale, l, init.clone())
        })
    }

    /// Vector laid out exactly like `distribution` (segments without a rank go
    /// to locale 0).
    pub fn with_distribution(runtime: &Runtime, distribution: &Distribution, init: T) -> Result<Self> {
        let parts = distribution
            .descriptors()
            .iter()
            .map(|d| (d.rank.unwrap_or(LocaleId(0)), d.length))
            .collect();
        Self::with_partition(runtime, distribution.total_length(), init, Partition::Explicit(parts))
    }

    pub fn from_slice(runtime: &Runtime, values: &[T]) -> Result<Self> {
        Self::from_slice_with_partition(runtime, values, Partition::Block)
    }

    pub fn from_slice_with_partition(runtime: &Runtime, values: &[T], partition: Partition) -> Result<Self> {
        let parts = partition.resolve(values.len(), runtime.locale_count())?;
        let mut offset = 0;
        Self::allocate(runtime, values.len(), parts, |locale, l| {
            let chunk = values[offset..offset + l].to_vec();
            offset += l;
            runtime.allocate_from(locale, chunk)
        })
    }

    fn allocate<F>(runtime: &Runtime, len: usize, parts: Vec<(LocaleId, usize)>, mut alloc: F) -> Result<Self>
    where
        F: FnMut(LocaleId, usize) -> Result<StorageHandle<T>>,
    {
        // An empty vector has no segments at all.
        let parts = if len == 0 { Vec::new() } else { parts };
        let storage = parts
            .iter()
            .map(|&(locale, l)| alloc(locale, l))
            .collect::<Result<Vec<_>>>()?;
        let distribution = Distribution::from_parts(parts.into_iter().map(|(r, l)| (Some(r), l)));
        Ok(DistributedVector {
            inner: Arc::new(VectorInner {
                runtime: runtime.clone(),
                distribution,
                storage,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.distribution.total_length()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn runtime(&self) -> &Runtime {
        &self.inner.runtime
    }

    pub fn distribution(&self) -> &Distribution {
        &self.inner.distribution
    }

    pub fn storage(&self) -> &[StorageHandle<T>] {
        &self.inner.storage
    }

    fn locate(&self, index: usize) -> Result<(usize, usize)> {
        self.inner
            .distribution
            .locate(index)
            .ok_or(Error::IndexOutOfBounds { index, len: self.len() })
    }

    /// Proxy reference to element `index`.
    pub fn element(&self, index: usize) -> Result<crate::runtime::ElementRef<T>> {
        let (seg, offset) = self.locate(index)?;
        self.inner.storage[seg].at(offset)
    }

    pub fn get(&self, index: usize) -> Result<T> {
        self.element(index)?.read()
    }

    pub fn set(&self, index: usize, value: T) -> Result<()> {
        self.element(index)?.write(value)
    }

    /// Overwrites the whole vector from a host slice.
    pub fn assign(&self, values: &[T]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        for (d, h) in self.inner.distribution.descriptors().iter().zip(&self.inner.storage) {
            copy_from_host(&values[d.global_offset..d.global_offset + d.length], &h.full())?;
        }
        Ok(())
    }
}

impl<T: Clone + Send + Sync + 'static> SegmentedRange for DistributedVector<T> {
    type Segment = VectorSegment<T>;

    fn segments(&self) -> Vec<VectorSegment<T>> {
        self.inner
            .storage
            .iter()
            .zip(self.inner.distribution.descriptors())
            .map(|(h, d)| VectorSegment {
                rank: d.rank.expect("vector segments always have a rank"),
                slice: h.full(),
            })
            .collect()
    }

    fn len(&self) -> usize {
        DistributedVector::len(self)
    }

    fn kind(&self) -> RangeKind {
        RangeKind::Distributed
    }

    fn runtime(&self) -> Option<Runtime> {
        Some(self.inner.runtime.clone())
    }

    fn distribution(&self) -> Distribution {
        self.inner.distribution.clone()
    }
}

/// A contiguous piece of a distributed vector on one locale.
pub struct VectorSegment<T> {
    rank: LocaleId,
    slice: HandleSlice<T>,
}

impl<T> Clone for VectorSegment<T> {
    fn clone(&self) -> Self {
        VectorSegment {
            rank: self.rank,
            slice: self.slice.clone(),
        }
    }
}

impl<T> std::fmt::Debug for VectorSegment<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorSegment")
            .field("rank", &self.rank)
            .field("range", &self.slice.range())
            .finish()
    }
}

impl<T: Clone + Send + Sync + 'static> Segment for VectorSegment<T> {
    type Item = T;
    type Read = SliceRead<T>;
    type Write = SliceWrite<T>;

    fn locale(&self) -> Option<LocaleId> {
        Some(self.rank)
    }

    fn len(&self) -> usize {
        self.slice.len()
    }

    fn trim(&self, range: Range<usize>) -> Self {
        VectorSegment {
            rank: self.rank,
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

impl<T: Clone + Send + Sync + 'static> ContiguousSegment for VectorSegment<T> {
    fn storage(&self) -> HandleSlice<T> {
        self.slice.clone()
    }
}

impl<T> RemoteRange for VectorSegment<T> {
    fn rank(&self) -> LocaleId {
        self.rank
    }
}

segment_as_range!(VectorSegment<T> where T: Clone + Send + Sync + 'static);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{local_view, rank_of};

    #[test]
    fn block_layout_examples() {
        let rt = Runtime::new(3).unwrap();
        let v = DistributedVector::new(&rt, 10, 0u32).unwrap();
        assert_eq!(v.distribution().lengths(), vec![4, 4, 2]);
        let ranks: Vec<_> = v.segments().iter().map(rank_of).collect();
        assert_eq!(ranks, vec![LocaleId(0), LocaleId(1), LocaleId(2)]);

        let rt8 = Runtime::new(8).unwrap();
        let w = DistributedVector::new(&rt8, 4, 0u32).unwrap();
        assert_eq!(w.distribution().lengths(), vec![1, 1, 1, 1, 0, 0, 0, 0]);

        let e = DistributedVector::new(&rt, 0, 0u32).unwrap();
        assert!(e.segments().is_empty());
        assert_eq!(e.to_vec().unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn get_set_across_segments() {
        let rt = Runtime::new(3).unwrap();
        let v = DistributedVector::new(&rt, 10, 7i64).unwrap();
        assert_eq!(v.get(0).unwrap(), 7);
        v.set(5, 9).unwrap();
        assert_eq!(v.get(5).unwrap(), 9);
        // Index 5 is segment 1, offset 1.
        assert_eq!(v.segments()[1].read().unwrap()[1], 9);
        assert!(matches!(v.get(10), Err(Error::IndexOutOfBounds { index: 10, len: 10 })));
        assert!(v.set(10, 0).is_err());
    }

    #[test]
    fn local_view_checks_locale() {
        let rt = Runtime::new(2).unwrap();
        let v = DistributedVector::from_slice(&rt, &[1, 2, 3, 4]).unwrap();
        let seg = &v.segments()[1];
        assert_eq!(&*local_view(seg, LocaleId(1)).unwrap(), &[3, 4]);
        assert!(matches!(
            local_view(seg, LocaleId(0)),
            Err(Error::OffLocaleAccess { .. })
        ));
        let empty = seg.trim(0..0);
        assert!(local_view(&empty, LocaleId(1)).unwrap().is_empty());
    }

    #[test]
    fn partitions() {
        let rt = Runtime::new(2).unwrap();
        let v = DistributedVector::with_partition(&rt, 8, 0u8, Partition::Lengths(vec![3, 5])).unwrap();
        assert_eq!(v.distribution().lengths(), vec![3, 5]);
        let w = DistributedVector::with_partition(&rt, 8, 0u8, Partition::Blocks(3)).unwrap();
        assert_eq!(w.distribution().lengths(), vec![3, 3, 2]);
        assert_eq!(w.distribution().ranks()[2], Some(LocaleId(0)));
        assert!(DistributedVector::with_partition(&rt, 8, 0u8, Partition::Lengths(vec![3, 4])).is_err());
        assert!(DistributedVector::with_partition(&rt, 2, 0u8, Partition::Explicit(vec![(LocaleId(5), 2)])).is_err());
    }

    #[test]
    fn assign_and_iterate() {
        let rt = Runtime::new(3).unwrap();
        let v = DistributedVector::new(&rt, 7, 0u16).unwrap();
        v.assign(&[1, 2, 3, 4, 5, 6, 7]).unwrap();
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6, 7]);
        assert!(v.assign(&[1]).is_err());
    }
}
