use std::ops::{Deref, DerefMut, Range};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::lock_api::{ArcRwLockReadGuard, ArcRwLockWriteGuard};
use parking_lot::{RawRwLock, RwLock};

use crate::error::{Error, Result};
use crate::model::{LocaleId, ReadAccess, WriteAccess};

pub type StorageId = usize;

static NEXT_STORAGE_ID: AtomicUsize = AtomicUsize::new(1);

/// Per-locale allocation accounting.
#[derive(Debug)]
pub(crate) struct Registry {
    bytes: Vec<AtomicUsize>,
    live: Vec<AtomicUsize>,
}

impl Registry {
    pub(crate) fn new(locales: usize) -> Self {
        Registry {
            bytes: (0..locales).map(|_| AtomicUsize::new(0)).collect(),
            live: (0..locales).map(|_| AtomicUsize::new(0)).collect(),
        }
    }

    fn acquire(&self, locale: LocaleId, bytes: usize) {
        self.bytes[locale.0].fetch_add(bytes, Ordering::Relaxed);
        self.live[locale.0].fetch_add(1, Ordering::Relaxed);
    }

    fn release(&self, locale: LocaleId, bytes: usize) {
        self.bytes[locale.0].fetch_sub(bytes, Ordering::Relaxed);
        self.live[locale.0].fetch_sub(1, Ordering::Relaxed);
    }

    pub(crate) fn bytes(&self, locale: LocaleId) -> usize {
        self.bytes[locale.0].load(Ordering::Relaxed)
    }

    pub(crate) fn live(&self, locale: LocaleId) -> usize {
        self.live[locale.0].load(Ordering::Relaxed)
    }
}

struct StorageInner<T> {
    id: StorageId,
    locale: Option<LocaleId>,
    len: usize,
    data: Arc<RwLock<Vec<T>>>,
    freed: AtomicBool,
    registry: Option<Arc<Registry>>,
}

impl<T> StorageInner<T> {
    fn release(&self) {
        if let (Some(reg), Some(locale)) = (&self.registry, self.locale) {
            reg.release(locale, self.len * std::mem::size_of::<T>());
        }
    }
}

impl<T> Drop for StorageInner<T> {
    fn drop(&mut self) {
        if !*self.freed.get_mut() {
            self.release();
        }
    }
}

/// A block of elements owned by one locale.
///
/// Handles are shared references: cloning a handle does not copy the data.
/// The block is released when the last handle drops, or earlier through
/// [`StorageHandle::free`], after which every access fails with
/// [`Error::UseAfterFree`].
pub struct StorageHandle<T> {
    inner: Arc<StorageInner<T>>,
}

impl<T> Clone for StorageHandle<T> {
    fn clone(&self) -> Self {
        StorageHandle {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T> std::fmt::Debug for StorageHandle<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StorageHandle")
            .field("id", &self.inner.id)
            .field("locale", &self.inner.locale)
            .field("len", &self.inner.len)
            .finish()
    }
}

impl<T> StorageHandle<T> {
    pub(crate) fn new(locale: Option<LocaleId>, data: Vec<T>, registry: Option<Arc<Registry>>) -> Self {
        let len = data.len();
        if let (Some(reg), Some(locale)) = (&registry, locale) {
            reg.acquire(locale, len * std::mem::size_of::<T>());
        }
        StorageHandle {
            inner: Arc::new(StorageInner {
                id: NEXT_STORAGE_ID.fetch_add(1, Ordering::Relaxed),
                locale,
                len,
                data: Arc::new(RwLock::new(data)),
                freed: AtomicBool::new(false),
                registry,
            }),
        }
    }

    /// Driver-memory block with no locale.
    pub fn host(data: Vec<T>) -> Self {
        Self::new(None, data, None)
    }

    pub fn id(&self) -> StorageId {
        self.inner.id
    }

    /// Owning locale; `None` for driver memory.
    pub fn locale(&self) -> Option<LocaleId> {
        self.inner.locale
    }

    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    pub fn is_freed(&self) -> bool {
        self.inner.freed.load(Ordering::Acquire)
    }

    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// Releases the block now. Other handles to it become dangling.
    pub fn free(&self) -> Result<()> {
        if self.inner.freed.swap(true, Ordering::AcqRel) {
            return Err(Error::DoubleFree(self.inner.id));
        }
        let old = std::mem::take(&mut *self.inner.data.write());
        drop(old);
        self.inner.release();
        Ok(())
    }

    pub fn full(&self) -> HandleSlice<T> {
        HandleSlice {
            handle: self.clone(),
            range: 0..self.inner.len,
        }
    }

    pub fn slice(&self, range: Range<usize>) -> Result<HandleSlice<T>> {
        if range.start > range.end || range.end > self.inner.len {
            return Err(Error::IndexOutOfBounds {
                index: range.end.max(range.start),
                len: self.inner.len,
            });
        }
        Ok(HandleSlice {
            handle: self.clone(),
            range,
        })
    }

    /// Proxy reference to one element.
    pub fn at(&self, index: usize) -> Result<ElementRef<T>> {
        if index >= self.inner.len {
            return Err(Error::IndexOutOfBounds {
                index,
                len: self.inner.len,
            });
        }
        Ok(ElementRef {
            handle: self.clone(),
            index,
        })
    }

    fn check_live(&self) -> Result<()> {
        if self.is_freed() {
            Err(Error::UseAfterFree(self.inner.id))
        } else {
            Ok(())
        }
    }

    fn lock_read(&self) -> Result<ArcRwLockReadGuard<RawRwLock, Vec<T>>> {
        // Recursive so that a zip reading the same block twice cannot stall
        // behind a queued writer.
        let guard = self.inner.data.read_arc_recursive();
        self.check_live()?;
        Ok(guard)
    }

    fn lock_write(&self) -> Result<ArcRwLockWriteGuard<RawRwLock, Vec<T>>> {
        let guard = self.inner.data.write_arc();
        self.check_live()?;
        Ok(guard)
    }
}

/// `(handle, index)` accessor standing in for a remote reference.
#[derive(Clone, Debug)]
pub struct ElementRef<T> {
    handle: StorageHandle<T>,
    index: usize,
}

impl<T: Clone> ElementRef<T> {
    pub fn read(&self) -> Result<T> {
        Ok(self.handle.lock_read()?[self.index].clone())
    }

    pub fn write(&self, value: T) -> Result<()> {
        self.handle.lock_write()?[self.index] = value;
        Ok(())
    }
}

/// A range of elements inside one storage block.
#[derive(Debug)]
pub struct HandleSlice<T> {
    handle: StorageHandle<T>,
    range: Range<usize>,
}

impl<T> Clone for HandleSlice<T> {
    fn clone(&self) -> Self {
        HandleSlice {
            handle: self.handle.clone(),
            range: self.range.clone(),
        }
    }
}

impl<T> HandleSlice<T> {
    pub fn handle(&self) -> &StorageHandle<T> {
        &self.handle
    }

    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn locale(&self) -> Option<LocaleId> {
        self.handle.locale()
    }

    /// Sub-slice, relative to this slice.
    pub fn sub(&self, range: Range<usize>) -> HandleSlice<T> {
        debug_assert!(range.start <= range.end && range.end <= self.len());
        HandleSlice {
            handle: self.handle.clone(),
            range: self.range.start + range.start..self.range.start + range.end,
        }
    }

    pub fn read(&self) -> Result<SliceRead<T>> {
        Ok(SliceRead {
            guard: self.handle.lock_read()?,
            range: self.range.clone(),
        })
    }

    pub fn write(&self) -> Result<SliceWrite<T>> {
        Ok(SliceWrite {
            guard: self.handle.lock_write()?,
            range: self.range.clone(),
        })
    }
}

/// Shared lock over a slice of a storage block; derefs to `[T]`.
pub struct SliceRead<T> {
    guard: ArcRwLockReadGuard<RawRwLock, Vec<T>>,
    range: Range<usize>,
}

impl<T> Deref for SliceRead<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.guard[self.range.clone()]
    }
}

/// Exclusive lock over a slice of a storage block; derefs to `[T]`.
pub struct SliceWrite<T> {
    guard: ArcRwLockWriteGuard<RawRwLock, Vec<T>>,
    range: Range<usize>,
}

impl<T> Deref for SliceWrite<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.guard[self.range.clone()]
    }
}

impl<T> DerefMut for SliceWrite<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.guard[self.range.clone()]
    }
}

impl<T: Clone> ReadAccess for SliceRead<T> {
    type Item = T;
    type Iter<'g>
        = std::iter::Cloned<std::slice::Iter<'g, T>>
    where
        Self: 'g;

    fn iter(&self) -> Self::Iter<'_> {
        (**self).iter().cloned()
    }

    fn get(&self, index: usize) -> T {
        self[index].clone()
    }
}

impl<T> WriteAccess for SliceWrite<T> {
    type Elem<'g>
        = &'g mut T
    where
        Self: 'g;
    type IterMut<'g>
        = std::slice::IterMut<'g, T>
    where
        Self: 'g;

    fn iter_mut(&mut self) -> Self::IterMut<'_> {
        (**self).iter_mut()
    }
}

/// Elementwise copy between two slices. Fails before writing anything if the
/// lengths differ or either block was freed.
pub fn copy_slices<T: Clone>(src: &HandleSlice<T>, dst: &HandleSlice<T>) -> Result<()> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            expected: dst.len(),
            found: src.len(),
        });
    }
    if src.handle.ptr_eq(&dst.handle) {
        let mut guard = src.handle.lock_write()?;
        if src.range != dst.range {
            let staged = guard[src.range.clone()].to_vec();
            guard[dst.range.clone()].clone_from_slice(&staged);
        }
        return Ok(());
    }
    // Lock in id order so opposing copies cannot deadlock.
    if src.handle.id() < dst.handle.id() {
        let from = src.read()?;
        let mut to = dst.write()?;
        to.clone_from_slice(&from);
    } else {
        let mut to = dst.write()?;
        let from = src.read()?;
        to.clone_from_slice(&from);
    }
    Ok(())
}

pub fn copy_from_host<T: Clone>(src: &[T], dst: &HandleSlice<T>) -> Result<()> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            expected: dst.len(),
            found: src.len(),
        });
    }
    dst.write()?.clone_from_slice(src);
    Ok(())
}

pub fn copy_to_host<T: Clone>(src: &HandleSlice<T>, dst: &mut [T]) -> Result<()> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            expected: dst.len(),
            found: src.len(),
        });
    }
    dst.clone_from_slice(&src.read()?);
    Ok(())
}
