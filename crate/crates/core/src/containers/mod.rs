//! Owning distributed containers.

mod dense;
mod local;
pub mod mtx;
mod sparse;
mod tiling;
mod vector;

pub use dense::{DenseMatrix, DenseTile, DistributedDenseMatrix};
pub use local::{HostSegment, LocalArray};
pub use mtx::{load_matrix_market, parse_matrix_market, read_matrix_market, MatrixMarket};
pub use sparse::{CsrBlock, DistributedSparseMatrix, SparseTile};
pub use tiling::{square_grid, TileLayout, Tiling, TilingKind};
pub use vector::{DistributedVector, Partition, VectorSegment};
