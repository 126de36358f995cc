use std::ops::{AddAssign, Range};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{segment_as_range, LocaleId, ReadAccess, RemoteRange, Segment, SegmentedRange, WriteAccess};
use crate::runtime::{HandleSlice, Runtime, SliceRead, SliceWrite, StorageHandle, StorageId};

use super::tiling::{TileLayout, Tiling};

/// Compressed sparse row block with tile-local indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrBlock<T> {
    pub rows: usize,
    pub cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T> CsrBlock<T> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Checks the CSR shape invariants.
    pub fn is_valid(&self) -> bool {
        self.row_offsets.len() == self.rows + 1
            && self.row_offsets.first() == Some(&0)
            && self.row_offsets.windows(2).all(|w| w[0] <= w[1])
            && self.row_offsets.last() == Some(&self.values.len())
            && self.col_indices.len() == self.values.len()
            && self.col_indices.iter().all(|&c| c < self.cols)
    }

    /// Builds a block from tile-local `(row, col, value)` triples, summing
    /// duplicates.
    fn assemble(rows: usize, cols: usize, mut entries: Vec<(usize, usize, T)>) -> Self
    where
        T: AddAssign,
    {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        CsrBlock {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

struct SparseInner<T> {
    runtime: Runtime,
    layout: TileLayout,
    tiles: Vec<SparseTileData<T>>,
}

struct SparseTileData<T> {
    row_offsets: Arc<[usize]>,
    col_indices: Arc<[usize]>,
    values: StorageHandle<T>,
}

/// Sparse matrix stored as one CSR block per tile, tiles placed by the same
/// rules as [`DistributedDenseMatrix`](super::DistributedDenseMatrix).
///
/// Iteration visits tiles in row-major tile order and each tile in CSR order,
/// yielding `(row, col, value)` with global indices.
pub struct DistributedSparseMatrix<T> {
    inner: Arc<SparseInner<T>>,
}

impl<T> Clone for DistributedSparseMatrix<T> {
    fn clone(&self) -> Self {
        DistributedSparseMatrix {
            inner: Arc::clone(&self.inner),
        }
    }
}

impl<T> DistributedSparseMatrix<T>
where
    T: Clone + Send + Sync + AddAssign + 'static,
{
    /// Duplicate coordinates are summed.
    pub fn from_tuples<I>(runtime: &Runtime, shape: (usize, usize), tuples: I, tiling: &Tiling) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let layout = TileLayout::resolve(tiling, shape, runtime.locale_count())?;
        let mut buckets: Vec<Vec<(usize, usize, T)>> = (0..layout.tile_count()).map(|_| Vec::new()).collect();
        for (row, col, value) in tuples {
            let (ti, tj, r, c) = layout.locate(row, col).ok_or(Error::EntryOutOfBounds {
                row,
                col,
                rows: shape.0,
                cols: shape.1,
            })?;
            buckets[layout.tile_index(ti, tj)].push((r, c, value));
        }
        let mut tiles = Vec::with_capacity(buckets.len());
        for (index, entries) in buckets.into_iter().enumerate() {
            let (i, j) = (index / layout.tile_grid.1, index % layout.tile_grid.1);
            let (rows, cols) = layout.tile_extent(i, j);
            let block = CsrBlock::assemble(rows, cols, entries);
            tiles.push(SparseTileData {
                row_offsets: block.row_offsets.into(),
                col_indices: block.col_indices.into(),
                values: runtime.allocate_from(layout.owner(i, j), block.values)?,
            });
        }
        Ok(DistributedSparseMatrix {
            inner: Arc::new(SparseInner {
                runtime: runtime.clone(),
                layout,
                tiles,
            }),
        })
    }
}

impl<T: Clone + Send + Sync + 'static> DistributedSparseMatrix<T> {
    pub fn shape(&self) -> (usize, usize) {
        self.inner.layout.shape
    }

    pub fn layout(&self) -> &TileLayout {
        &self.inner.layout
    }

    pub fn runtime(&self) -> &Runtime {
        &self.inner.runtime
    }

    pub fn nnz(&self) -> usize {
        self.inner.tiles.iter().map(|t| t.values.len()).sum()
    }

    pub fn tile(&self, i: usize, j: usize) -> Result<SparseTile<T>> {
        let layout = &self.inner.layout;
        layout.check_tile(i, j)?;
        let data = &self.inner.tiles[layout.tile_index(i, j)];
        Ok(SparseTile {
            rank: layout.owner(i, j),
            origin: (layout.row_range(i).start, layout.col_range(j).start),
            row_offsets: Arc::clone(&data.row_offsets),
            col_indices: Arc::clone(&data.col_indices),
            values: data.values.full(),
        })
    }

    /// Local copy of the CSR block of tile `(i, j)`.
    pub fn get_tile(&self, i: usize, j: usize) -> Result<CsrBlock<T>> {
        let layout = &self.inner.layout;
        layout.check_tile(i, j)?;
        let data = &self.inner.tiles[layout.tile_index(i, j)];
        let (rows, cols) = layout.tile_extent(i, j);
        Ok(CsrBlock {
            rows,
            cols,
            row_offsets: data.row_offsets.to_vec(),
            col_indices: data.col_indices.to_vec(),
            values: data.values.full().read()?.to_vec(),
        })
    }
}

impl<T: Clone + Send + Sync + 'static> SegmentedRange for DistributedSparseMatrix<T> {
    type Segment = SparseTile<T>;

    fn segments(&self) -> Vec<SparseTile<T>> {
        let (gr, gc) = self.inner.layout.tile_grid;
        (0..gr)
            .flat_map(|i| (0..gc).map(move |j| (i, j)))
            .map(|(i, j)| self.tile(i, j).expect("index inside tile grid"))
            .collect()
    }

    fn len(&self) -> usize {
        self.nnz()
    }

    fn runtime(&self) -> Option<Runtime> {
        Some(self.inner.runtime.clone())
    }
}

/// The stored entries of one tile, or a contiguous run of them after
/// trimming.
pub struct SparseTile<T> {
    rank: LocaleId,
    origin: (usize, usize),
    row_offsets: Arc<[usize]>,
    col_indices: Arc<[usize]>,
    values: HandleSlice<T>,
}

impl<T> Clone for SparseTile<T> {
    fn clone(&self) -> Self {
        SparseTile {
            rank: self.rank,
            origin: self.origin,
            row_offsets: Arc::clone(&self.row_offsets),
            col_indices: Arc::clone(&self.col_indices),
            values: self.values.clone(),
        }
    }
}

impl<T> SparseTile<T> {
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    fn cursor(&self) -> CsrCursor {
        CsrCursor {
            origin: self.origin,
            row_offsets: Arc::clone(&self.row_offsets),
            col_indices: Arc::clone(&self.col_indices),
            start: self.values.range().start,
        }
    }
}

#[derive(Clone)]
struct CsrCursor {
    origin: (usize, usize),
    row_offsets: Arc<[usize]>,
    col_indices: Arc<[usize]>,
    start: usize,
}

impl CsrCursor {
    fn row_of(&self, nz: usize) -> usize {
        self.row_offsets.partition_point(|&o| o <= nz) - 1
    }

    fn position(&self, offset: usize) -> (usize, usize) {
        let nz = self.start + offset;
        (self.origin.0 + self.row_of(nz), self.origin.1 + self.col_indices[nz])
    }

    fn walk(&self) -> CsrWalk {
        let nz = self.start;
        let row = if self.row_offsets.len() > 1 {
            self.row_of(nz).min(self.row_offsets.len() - 2)
        } else {
            0
        };
        CsrWalk {
            cursor: self.clone(),
            nz,
            row,
        }
    }
}

struct CsrWalk {
    cursor: CsrCursor,
    nz: usize,
    row: usize,
}

impl CsrWalk {
    fn advance(&mut self) -> (usize, usize) {
        while self.cursor.row_offsets[self.row + 1] <= self.nz {
            self.row += 1;
        }
        let pos = (
            self.cursor.origin.0 + self.row,
            self.cursor.origin.1 + self.cursor.col_indices[self.nz],
        );
        self.nz += 1;
        pos
    }
}

pub struct SparseTileRead<T> {
    cursor: CsrCursor,
    guard: SliceRead<T>,
}

impl<T: Clone> ReadAccess for SparseTileRead<T> {
    type Item = (usize, usize, T);
    type Iter<'g>
        = SparseIter<'g, T>
    where
        Self: 'g;

    fn iter(&self) -> SparseIter<'_, T> {
        SparseIter {
            walk: self.cursor.walk(),
            values: (*self.guard).iter(),
        }
    }

    fn get(&self, index: usize) -> (usize, usize, T) {
        let (r, c) = self.cursor.position(index);
        (r, c, self.guard[index].clone())
    }
}

pub struct SparseIter<'g, T> {
    walk: CsrWalk,
    values: std::slice::Iter<'g, T>,
}

impl<T: Clone> Iterator for SparseIter<'_, T> {
    type Item = (usize, usize, T);

    fn next(&mut self) -> Option<Self::Item> {
        let v = self.values.next()?;
        let (r, c) = self.walk.advance();
        Some((r, c, v.clone()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.values.size_hint()
    }
}

pub struct SparseTileWrite<T> {
    cursor: CsrCursor,
    guard: SliceWrite<T>,
}

impl<T> WriteAccess for SparseTileWrite<T> {
    type Elem<'g>
        = (usize, usize, &'g mut T)
    where
        Self: 'g;
    type IterMut<'g>
        = SparseIterMut<'g, T>
    where
        Self: 'g;

    fn iter_mut(&mut self) -> SparseIterMut<'_, T> {
        SparseIterMut {
            walk: self.cursor.walk(),
            values: self.guard.iter_mut(),
        }
    }
}

pub struct SparseIterMut<'g, T> {
    walk: CsrWalk,
    values: std::slice::IterMut<'g, T>,
}

impl<'g, T> Iterator for SparseIterMut<'g, T> {
    type Item = (usize, usize, &'g mut T);

    fn next(&mut self) -> Option<Self::Item> {
        let v = self.values.next()?;
        let (r, c) = self.walk.advance();
        Some((r, c, v))
    }
}

impl<T: Clone + Send + Sync + 'static> Segment for SparseTile<T> {
    type Item = (usize, usize, T);
    type Read = SparseTileRead<T>;
    type Write = SparseTileWrite<T>;

    fn locale(&self) -> Option<LocaleId> {
        Some(self.rank)
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn trim(&self, range: Range<usize>) -> Self {
        SparseTile {
            values: self.values.sub(range),
            ..self.clone()
        }
    }

    fn read(&self) -> Result<SparseTileRead<T>> {
        Ok(SparseTileRead {
            cursor: self.cursor(),
            guard: self.values.read()?,
        })
    }

    fn write(&self) -> Result<SparseTileWrite<T>> {
        Ok(SparseTileWrite {
            cursor: self.cursor(),
            guard: self.values.write()?,
        })
    }

    fn storage_ids(&self, ids: &mut Vec<StorageId>) {
        ids.push(self.values.handle().id());
    }
}

impl<T> RemoteRange for SparseTile<T> {
    fn rank(&self) -> LocaleId {
        self.rank
    }
}

segment_as_range!(SparseTile<T> where T: Clone + Send + Sync + 'static);
