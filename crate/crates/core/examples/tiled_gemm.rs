//! Tiled matrix multiply where each output tile is computed on its owner.

use segrange::bench::kernels::{gemm, gemm_tiling};
use segrange::containers::DistributedDenseMatrix;
use segrange::runtime::Runtime;

fn main() -> segrange::Result<()> {
    let d = 6;
    let rt = Runtime::new(4)?;
    let tiling = gemm_tiling(d, rt.locale_count());
    let a = DistributedDenseMatrix::from_fn(&rt, (d, d), &tiling, |r, c| (r + c) as f64)?;
    let b = DistributedDenseMatrix::from_fn(&rt, (d, d), &tiling, |r, c| f64::from(u8::from(r == c)) * 2.0)?;
    let c = DistributedDenseMatrix::new(&rt, (d, d), &tiling, 0.0)?;
    println!("tile grid {:?}, tile shape {:?}", c.tile_grid(), c.layout().tile_shape);

    gemm(&a, &b, &c)?;
    let dense = c.to_dense()?;
    for r in 0..d {
        let row: Vec<f64> = (0..d).map(|col| *dense.get(r, col)).collect();
        println!("{row:?}");
    }
    Ok(())
}
