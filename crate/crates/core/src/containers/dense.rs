use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{segment_as_range, LocaleId, ReadAccess, RemoteRange, Segment, SegmentedRange, WriteAccess};
use crate::runtime::{HandleSlice, Runtime, SliceRead, SliceWrite, StorageHandle, StorageId, Ticket};

use super::tiling::{TileLayout, Tiling};

/// A dense row-major matrix in driver memory.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> DenseMatrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}

struct DenseInner<T> {
    runtime: Runtime,
    layout: TileLayout,
    tiles: Vec<StorageHandle<T>>,
}

/// A dense matrix split into a tile grid, each tile stored row-major on its
/// owning locale.
///
/// `segments()` yields the tiles in row-major tile order; a tile's elements
/// are `(row, col, value)` tuples with global indices.
pub struct DistributedDenseMatrix<T> {
    inner: Arc<DenseInner<T>>,
}

impl<T> Clone for DistributedDenseMatrix<T> {
    fn clone(&self) -> Self {
        DistributedDenseMatrix {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> DistributedDenseMatrix<T> {
    pub fn new(runtime: &Runtime, shape: (usize, usize), tiling: &Tiling, init: T) -> Result<Self> {
        Self::build(runtime, shape, tiling, |layout, i, j| {
            let (r, c) = layout.tile_extent(i, j);
            runtime.allocate_with(layout.owner(i, j), r * c, init.clone())
        })
    }

    pub fn from_fn(
        runtime: &Runtime,
        shape: (usize, usize),
        tiling: &Tiling,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        Self::build(runtime, shape, tiling, |layout, i, j| {
            let rows = layout.row_range(i);
            let cols = layout.col_range(j);
            let mut data = Vec::with_capacity(rows.len() * cols.len());
            for r in rows {
                for c in cols.clone() {
                    data.push(f(r, c));
                }
            }
            runtime.allocate_from(layout.owner(i, j), data)
        })
    }

    pub fn from_dense(runtime: &Runtime, matrix: &DenseMatrix<T>, tiling: &Tiling) -> Result<Self> {
        Self::from_fn(runtime, matrix.shape(), tiling, |r, c| matrix.get(r, c).clone())
    }

    fn build<F>(runtime: &Runtime, shape: (usize, usize), tiling: &Tiling, mut alloc: F) -> Result<Self>
    where
        F: FnMut(&TileLayout, usize, usize) -> Result<StorageHandle<T>>,
    {
        let layout = TileLayout::resolve(tiling, shape, runtime.locale_count())?;
        let mut tiles = Vec::with_capacity(layout.tile_count());
        for i in 0..layout.tile_grid.0 {
            for j in 0..layout.tile_grid.1 {
                tiles.push(alloc(&layout, i, j)?);
            }
        }
        Ok(DistributedDenseMatrix {
            inner: Arc::new(DenseInner {
                runtime: runtime.clone(),
                layout,
                tiles,
            }),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.layout.shape
    }

    pub fn layout(&self) -> &TileLayout {
        &self.inner.layout
    }

    pub fn tile_grid(&self) -> (usize, usize) {
        self.inner.layout.tile_grid
    }

    pub fn runtime(&self) -> &Runtime {
        &self.inner.runtime
    }

    /// Remote view of tile `(i, j)`.
    pub fn tile(&self, i: usize, j: usize) -> Result<DenseTile<T>> {
        let layout = &self.inner.layout;
        layout.check_tile(i, j)?;
        let (rows, cols) = layout.tile_extent(i, j);
        Ok(DenseTile {
            rank: layout.owner(i, j),
            origin: (layout.row_range(i).start, layout.col_range(j).start),
            extent: (rows, cols),
            slice: self.inner.tiles[layout.tile_index(i, j)].full(),
        })
    }

    /// Local copy of tile `(i, j)`.
    pub fn get_tile(&self, i: usize, j: usize) -> Result<DenseMatrix<T>> {
        self.tile(i, j)?.to_local()
    }

    /// Starts copying tile `(i, j)` on the owner's copy engine.
    pub fn get_tile_async(&self, i: usize, j: usize) -> Result<Ticket<Result<DenseMatrix<T>>>> {
        let tile = self.tile(i, j)?;
        self.inner.runtime.submit_copy(tile.rank, move || tile.to_local())
    }

    fn locate(&self, row: usize, col: usize) -> Result<(&StorageHandle<T>, usize)> {
        let layout = &self.inner.layout;
        let (ti, tj, r, c) = layout.locate(row, col).ok_or(Error::EntryOutOfBounds {
            row,
            col,
            rows: layout.shape.0,
            cols: layout.shape.1,
        })?;
        let width = layout.tile_extent(ti, tj).1;
        Ok((&self.inner.tiles[layout.tile_index(ti, tj)], r * width + c))
    }

    pub fn get(&self, row: usize, col: usize) -> Result<T> {
        let (h, i) = self.locate(row, col)?;
        h.at(i)?.read()
    }

    pub fn set(&self, row: usize, col: usize, value: T) -> Result<()> {
        let (h, i) = self.locate(row, col)?;
        h.at(i)?.write(value)
    }

    /// Gathers the whole matrix into driver memory.
    pub fn to_dense(&self) -> Result<DenseMatrix<T>> {
        let (m, k) = self.shape();
        let mut data: Vec<Option<T>> = vec![None; m * k];
        for seg in self.segments() {
            for (r, c, v) in seg.read()?.iter() {
                data[r * k + c] = Some(v);
            }
        }
        Ok(DenseMatrix {
            rows: m,
            cols: k,
            data: data.into_iter().map(|v| v.expect("tiles cover the matrix")).collect(),
        })
    }
}

impl<T: Clone + Send + Sync + 'static> SegmentedRange for DistributedDenseMatrix<T> {
    type Segment = DenseTile<T>;

    fn segments(&self) -> Vec<DenseTile<T>> {
        let (gr, gc) = self.inner.layout.tile_grid;
        (0..gr)
            .flat_map(|i| (0..gc).map(move |j| (i, j)))
            .map(|(i, j)| self.tile(i, j).expect("index inside tile grid"))
            .collect()
    }

    fn len(&self) -> usize {
        let (m, k) = self.shape();
        m * k
    }

    fn runtime(&self) -> Option<Runtime> {
        Some(self.inner.runtime.clone())
    }
}

/// A tile of a distributed dense matrix (or a linear sub-range of one, after
/// trimming). Elements are `(row, col, value)` with global indices.
pub struct DenseTile<T> {
    rank: LocaleId,
    origin: (usize, usize),
    extent: (usize, usize),
    slice: HandleSlice<T>,
}

impl<T> Clone for DenseTile<T> {
    fn clone(&self) -> Self {
        DenseTile {
            rank: self.rank,
            origin: self.origin,
            extent: self.extent,
            slice: self.slice.clone(),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> DenseTile<T> {
    /// Global `(row, col)` of the tile's top-left element.
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.extent.0
    }

    pub fn cols(&self) -> usize {
        self.extent.1
    }

    pub fn row_stride(&self) -> usize {
        self.extent.1
    }

    /// Tile-local element read.
    pub fn get(&self, row: usize, col: usize) -> Result<T> {
        if row >= self.extent.0 || col >= self.extent.1 {
            return Err(Error::EntryOutOfBounds {
                row,
                col,
                rows: self.extent.0,
                cols: self.extent.1,
            });
        }
        self.slice.handle().at(row * self.extent.1 + col)?.read()
    }

    /// Row-major span over the tile's storage, valid on the owning locale.
    pub fn local_view(&self, current: LocaleId) -> Result<SliceRead<T>> {
        self.check(current)?;
        self.slice.read()
    }

    pub fn local_view_mut(&self, current: LocaleId) -> Result<SliceWrite<T>> {
        self.check(current)?;
        self.slice.write()
    }

    fn check(&self, current: LocaleId) -> Result<()> {
        if current != self.rank {
            return Err(Error::OffLocaleAccess {
                segment: self.rank,
                current: Some(current),
            });
        }
        Ok(())
    }

    /// Copy of the whole tile (ignores any trim).
    pub fn to_local(&self) -> Result<DenseMatrix<T>> {
        let data = self.slice.handle().full().read()?.to_vec();
        DenseMatrix::from_vec(self.extent.0, self.extent.1, data)
    }

    /// Overwrites the whole tile.
    pub fn assign(&self, values: &DenseMatrix<T>) -> Result<()> {
        if values.shape() != self.extent {
            return Err(Error::LengthMismatch {
                expected: self.extent.0 * self.extent.1,
                found: values.rows() * values.cols(),
            });
        }
        self.slice.handle().full().write()?.clone_from_slice(values.as_slice());
        Ok(())
    }

    fn cursor(&self) -> TileCursor {
        TileCursor {
            origin: self.origin,
            cols: self.extent.1,
            start: self.slice.range().start,
        }
    }
}

#[derive(Copy, Clone)]
struct TileCursor {
    origin: (usize, usize),
    cols: usize,
    start: usize,
}

impl TileCursor {
    fn position(&self, offset: usize) -> (usize, usize) {
        let linear = self.start + offset;
        (self.origin.0 + linear / self.cols, self.origin.1 + linear % self.cols)
    }
}

pub struct DenseTileRead<T> {
    cursor: TileCursor,
    guard: SliceRead<T>,
}

impl<T: Clone> ReadAccess for DenseTileRead<T> {
    type Item = (usize, usize, T);
    type Iter<'g>
        = TileIter<'g, T>
    where
        Self: 'g;

    fn iter(&self) -> TileIter<'_, T> {
        TileIter {
            cursor: self.cursor,
            inner: (*self.guard).iter().enumerate(),
        }
    }

    fn get(&self, index: usize) -> (usize, usize, T) {
        let (r, c) = self.cursor.position(index);
        (r, c, self.guard[index].clone())
    }
}

pub struct TileIter<'g, T> {
    cursor: TileCursor,
    inner: std::iter::Enumerate<std::slice::Iter<'g, T>>,
}

impl<T: Clone> Iterator for TileIter<'_, T> {
    type Item = (usize, usize, T);

    fn next(&mut self) -> Option<Self::Item> {
        let (i, v) = self.inner.next()?;
        let (r, c) = self.cursor.position(i);
        Some((r, c, v.clone()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

pub struct DenseTileWrite<T> {
    cursor: TileCursor,
    guard: SliceWrite<T>,
}

impl<T> WriteAccess for DenseTileWrite<T> {
    type Elem<'g>
        = (usize, usize, &'g mut T)
    where
        Self: 'g;
    type IterMut<'g>
        = TileIterMut<'g, T>
    where
        Self: 'g;

    fn iter_mut(&mut self) -> TileIterMut<'_, T> {
        TileIterMut {
            cursor: self.cursor,
            inner: self.guard.iter_mut().enumerate(),
        }
    }
}

pub struct TileIterMut<'g, T> {
    cursor: TileCursor,
    inner: std::iter::Enumerate<std::slice::IterMut<'g, T>>,
}

impl<'g, T> Iterator for TileIterMut<'g, T> {
    type Item = (usize, usize, &'g mut T);

    fn next(&mut self) -> Option<Self::Item> {
        let (i, v) = self.inner.next()?;
        let (r, c) = self.cursor.position(i);
        Some((r, c, v))
    }
}

impl<T: Clone + Send + Sync + 'static> Segment for DenseTile<T> {
    type Item = (usize, usize, T);
    type Read = DenseTileRead<T>;
    type Write = DenseTileWrite<T>;

    fn locale(&self) -> Option<LocaleId> {
        Some(self.rank)
    }

    fn len(&self) -> usize {
        self.slice.len()
    }

    fn trim(&self, range: Range<usize>) -> Self {
        DenseTile {
            slice: self.slice.sub(range),
            ..self.clone()
        }
    }

    fn read(&self) -> Result<DenseTileRead<T>> {
        Ok(DenseTileRead {
            cursor: self.cursor(),
            guard: self.slice.read()?,
        })
    }

    fn write(&self) -> Result<DenseTileWrite<T>> {
        Ok(DenseTileWrite {
            cursor: self.cursor(),
            guard: self.slice.write()?,
        })
    }

    fn storage_ids(&self, ids: &mut Vec<StorageId>) {
        ids.push(self.slice.handle().id());
    }
}

impl<T> RemoteRange for DenseTile<T> {
    fn rank(&self) -> LocaleId {
        self.rank
    }
}

segment_as_range!(DenseTile<T> where T: Clone + Send + Sync + 'static);
