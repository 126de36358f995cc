use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::LocaleId;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TilingKind {
    BlockCyclic,
    BlockRow,
    BlockColumn,
    Explicit,
}

/// Requested partitioning of a matrix into tiles and of tiles onto locales.
///
/// `BlockRow`/`BlockColumn` ignore the shape fields and are resolved against
/// the matrix shape and locale count. `BlockCyclic` fills in any missing field
/// with a default; `Explicit` requires both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    pub kind: TilingKind,
    pub tile_shape: Option<(usize, usize)>,
    pub processor_grid: Option<(usize, usize)>,
}

impl Tiling {
    /// Near-square processor grid, one tile per processor.
    pub fn block_cyclic() -> Self {
        Tiling {
            kind: TilingKind::BlockCyclic,
            tile_shape: None,
            processor_grid: None,
        }
    }

    pub fn block_cyclic_with(tile_shape: (usize, usize), processor_grid: (usize, usize)) -> Self {
        Tiling {
            kind: TilingKind::BlockCyclic,
            tile_shape: Some(tile_shape),
            processor_grid: Some(processor_grid),
        }
    }

    pub fn block_row() -> Self {
        Tiling {
            kind: TilingKind::BlockRow,
            tile_shape: None,
            processor_grid: None,
        }
    }

    pub fn block_column() -> Self {
        Tiling {
            kind: TilingKind::BlockColumn,
            tile_shape: None,
            processor_grid: None,
        }
    }

    pub fn explicit(tile_shape: (usize, usize), processor_grid: (usize, usize)) -> Self {
        Tiling {
            kind: TilingKind::Explicit,
            tile_shape: Some(tile_shape),
            processor_grid: Some(processor_grid),
        }
    }
}

/// `(pr, pc)` with `pr * pc == p` and `pc` the largest divisor not above
/// `sqrt(p)`.
pub fn square_grid(p: usize) -> (usize, usize) {
    let mut pc = 1;
    let mut d = 1;
    while d * d <= p {
        if p.is_multiple_of(d) {
            pc = d;
        }
        d += 1;
    }
    (p / pc, pc)
}

/// A tiling resolved against a concrete shape and locale count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileLayout {
    pub shape: (usize, usize),
    pub tile_shape: (usize, usize),
    pub processor_grid: (usize, usize),
    pub tile_grid: (usize, usize),
}

impl TileLayout {
    pub fn resolve(tiling: &Tiling, shape: (usize, usize), locales: usize) -> Result<TileLayout> {
        let (m, k) = shape;
        let (tile_shape, grid) = match tiling.kind {
            TilingKind::BlockRow => ((m.div_ceil(locales).max(1), k.max(1)), (locales, 1)),
            TilingKind::BlockColumn => ((m.max(1), k.div_ceil(locales).max(1)), (1, locales)),
            TilingKind::BlockCyclic => {
                let grid = tiling.processor_grid.unwrap_or_else(|| square_grid(locales));
                let tile = tiling
                    .tile_shape
                    .unwrap_or((m.div_ceil(grid.0.max(1)).max(1), k.div_ceil(grid.1.max(1)).max(1)));
                (tile, grid)
            }
            TilingKind::Explicit => match (tiling.tile_shape, tiling.processor_grid) {
                (Some(t), Some(g)) => (t, g),
                _ => {
                    return Err(Error::InvalidTiling(
                        "explicit tiling needs a tile shape and a processor grid".into(),
                    ))
                }
            },
        };
        if tile_shape.0 == 0 || tile_shape.1 == 0 {
            return Err(Error::InvalidTiling(format!(
                "tile shape {tile_shape:?} has a zero extent"
            )));
        }
        if grid.0 == 0 || grid.1 == 0 || grid.0 * grid.1 > locales {
            return Err(Error::InvalidTiling(format!(
                "processor grid {grid:?} does not fit {locales} locales"
            )));
        }
        Ok(TileLayout {
            shape,
            tile_shape,
            processor_grid: grid,
            tile_grid: (m.div_ceil(tile_shape.0), k.div_ceil(tile_shape.1)),
        })
    }

    pub fn tile_count(&self) -> usize {
        self.tile_grid.0 * self.tile_grid.1
    }

    /// Owner of tile `(i, j)`: `(i mod pr) * pc + (j mod pc)`.
    pub fn owner(&self, i: usize, j: usize) -> LocaleId {
        let (pr, pc) = self.processor_grid;
        LocaleId((i % pr) * pc + (j % pc))
    }

    pub fn row_range(&self, i: usize) -> Range<usize> {
        let start = i * self.tile_shape.0;
        start..(start + self.tile_shape.0).min(self.shape.0)
    }

    pub fn col_range(&self, j: usize) -> Range<usize> {
        let start = j * self.tile_shape.1;
        start..(start + self.tile_shape.1).min(self.shape.1)
    }

    /// Tile extent `(rows, cols)` after clipping to the matrix bounds.
    pub fn tile_extent(&self, i: usize, j: usize) -> (usize, usize) {
        (self.row_range(i).len(), self.col_range(j).len())
    }

    /// `(tile row, tile col, row in tile, col in tile)` of a global element.
    pub fn locate(&self, row: usize, col: usize) -> Option<(usize, usize, usize, usize)> {
        if row >= self.shape.0 || col >= self.shape.1 {
            return None;
        }
        let (tr, tc) = self.tile_shape;
        Some((row / tr, col / tc, row % tr, col % tc))
    }

    pub fn tile_index(&self, i: usize, j: usize) -> usize {
        i * self.tile_grid.1 + j
    }

    pub fn check_tile(&self, i: usize, j: usize) -> Result<()> {
        if i < self.tile_grid.0 && j < self.tile_grid.1 {
            Ok(())
        } else {
            Err(Error::TileOutOfBounds {
                row: i,
                col: j,
                grid_rows: self.tile_grid.0,
                grid_cols: self.tile_grid.1,
            })
        }
    }
}
