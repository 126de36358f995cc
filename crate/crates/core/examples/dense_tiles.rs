//! Block-cyclic dense matrix: tile ownership, local views and tile copies.

use segrange::containers::{DenseMatrix, DistributedDenseMatrix, Tiling};
use segrange::model::{rank_of, SegmentedRange};
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(4)?;
    let m = DistributedDenseMatrix::from_fn(&rt, (5, 7), &Tiling::block_cyclic_with((2, 3), (2, 2)), |r, c| {
        (10 * r + c) as i32
    })?;
    let (gr, gc) = m.tile_grid();
    println!("5x7 matrix in a {gr}x{gc} tile grid");
    for i in 0..gr {
        let owners: Vec<usize> = (0..gc).map(|j| rank_of(&m.tile(i, j).unwrap()).0).collect();
        println!("tile row {i}: owners {owners:?}");
    }

    let corner = m.tile(gr - 1, gc - 1)?;
    println!(
        "clipped corner tile {}x{} at {:?}: {:?}",
        corner.rows(),
        corner.cols(),
        corner.origin(),
        corner.to_local()?
    );

    let fetched = m.get_tile_async(0, 1)?.into_result().expect("tile copy task")?;
    println!("tile (0,1) = {fetched:?}");

    m.tile(0, 0)?.assign(&DenseMatrix::filled(2, 3, -1))?;
    println!(
        "row 0 after assign: {:?}",
        (0..7).map(|c| m.get(0, c).unwrap()).collect::<Vec<_>>()
    );
    println!("tiles in segment order: {}", m.segments().len());
    Ok(())
}
