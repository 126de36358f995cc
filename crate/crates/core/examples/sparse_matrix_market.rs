//! Load a Matrix Market file into a distributed CSR matrix.

use std::path::PathBuf;

use segrange::containers::{load_matrix_market, Tiling};
use segrange::model::SegmentedRange;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/small.mtx"));
    let rt = Runtime::new(2)?;
    let m = load_matrix_market(&rt, &path, &Tiling::block_row())?;
    println!("{}: nnz={} tiles={:?}", path.display(), m.nnz(), m.layout().tile_grid);
    for i in 0..m.layout().tile_grid.0 {
        let block = m.get_tile(i, 0)?;
        println!(
            "tile {i}: row_offsets={:?} cols={:?} values={:?}",
            block.row_offsets, block.col_indices, block.values
        );
    }
    println!("entries: {:?}", m.to_vec()?);
    Ok(())
}
