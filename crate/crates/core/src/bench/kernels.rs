//! Benchmark kernels built from the library's containers, views and
//! algorithms.

use crate::algorithms::{for_each, inclusive_scan, reduce, sort, Plus};
use crate::containers::{DenseMatrix, DistributedDenseMatrix, DistributedVector, Tiling};
use crate::error::{Error, Result};
use crate::model::LocaleId;
use crate::runtime::{wait_all_ok, Runtime, Ticket};
use crate::views::{transform, zip};

/// `sum(a[i] * b[i])` as zip, transform, reduce.
pub fn dot(a: &DistributedVector<f64>, b: &DistributedVector<f64>) -> Result<f64> {
    let products = transform(zip((a, b))?, |(x, y): (f64, f64)| x * y);
    reduce(&products, 0.0, Plus)
}

pub fn sum(v: &DistributedVector<u64>) -> Result<u64> {
    reduce(v, 0, Plus)
}

pub fn prefix_sum(input: &DistributedVector<i64>, out: &DistributedVector<i64>) -> Result<()> {
    inclusive_scan(input, out, Plus)
}

/// `a[i] = b[i] + alpha * c[i]`.
pub fn stream_triad(
    a: &DistributedVector<f64>,
    b: &DistributedVector<f64>,
    c: &DistributedVector<f64>,
    alpha: f64,
) -> Result<()> {
    for_each(&zip((a, b, c))?, move |(a, b, c): (&mut f64, &mut f64, &mut f64)| {
        *a = *b + alpha * *c;
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// European call price, closed form. With no volatility left
/// (`sigma * sqrt(t) == 0`) the price is the discounted intrinsic value.
pub fn call_price(spot: f64, strike: f64, rate: f64, sigma: f64, expiry: f64) -> f64 {
    let discount = strike * (-rate * expiry).exp();
    let vol = sigma * expiry.sqrt();
    if vol == 0.0 {
        return (spot - discount).max(0.0);
    }
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * expiry) / vol;
    let d2 = d1 - vol;
    spot * normal_cdf(d1) - discount * normal_cdf(d2)
}

/// Option inputs, one vector per parameter.
pub struct OptionBook {
    pub spot: DistributedVector<f64>,
    pub strike: DistributedVector<f64>,
    pub rate: DistributedVector<f64>,
    pub sigma: DistributedVector<f64>,
    pub expiry: DistributedVector<f64>,
}

pub fn black_scholes(book: &OptionBook, out: &DistributedVector<f64>) -> Result<()> {
    let z = zip((out, &book.spot, &book.strike, &book.rate, &book.sigma, &book.expiry))?;
    for_each(
        &z,
        |(c, s, k, r, v, t): (&mut f64, &mut f64, &mut f64, &mut f64, &mut f64, &mut f64)| {
            *c = call_price(*s, *k, *r, *v, *t);
        },
    )
}

pub fn sort_keys(v: &DistributedVector<u64>) -> Result<()> {
    sort(v)
}

/// Square-tile block-cyclic layout for a `d x d` GEMM operand: processor
/// grid as close to square as `locales` allows, tiles of
/// `ceil(d / max(pr, pc))` on each side so A's column tiles match B's row
/// tiles.
pub fn gemm_tiling(d: usize, locales: usize) -> Tiling {
    let (pr, pc) = crate::containers::square_grid(locales);
    let side = d.div_ceil(pr.max(pc)).max(1);
    Tiling::block_cyclic_with((side, side), (pr, pc))
}

/// `C = A * B`, one task per C tile on its owner. Each task fetches the A
/// row and B column tiles it needs with `get_tile_async` and accumulates
/// with a plain triple loop.
pub fn gemm(
    a: &DistributedDenseMatrix<f64>,
    b: &DistributedDenseMatrix<f64>,
    c: &DistributedDenseMatrix<f64>,
) -> Result<()> {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    if k != k2 || c.shape() != (m, n) {
        return Err(Error::InvalidTiling(format!(
            "cannot multiply {:?} by {:?} into {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    let (la, lb, lc) = (a.layout(), b.layout(), c.layout());
    if la.tile_shape.1 != lb.tile_shape.0 || la.tile_shape.0 != lc.tile_shape.0 || lb.tile_shape.1 != lc.tile_shape.1 {
        return Err(Error::InvalidTiling("operand tile shapes do not conform".into()));
    }
    let rt: &Runtime = c.runtime();
    let (gr, gc) = lc.tile_grid;
    let inner = la.tile_grid.1;
    let mut tickets: Vec<Ticket<Result<()>>> = Vec::with_capacity(gr * gc);
    for i in 0..gr {
        for j in 0..gc {
            let (a, b, c) = (a.clone(), b.clone(), c.clone());
            let owner: LocaleId = lc.owner(i, j);
            tickets.push(rt.submit(owner, move || {
                let mut pending = Vec::with_capacity(inner);
                for t in 0..inner {
                    pending.push((a.get_tile_async(i, t)?, b.get_tile_async(t, j)?));
                }
                let (rows, cols) = c.layout().tile_extent(i, j);
                let mut acc = DenseMatrix::filled(rows, cols, 0.0);
                for (ta, tb) in pending {
                    let ta = ta.into_result()??;
                    let tb = tb.into_result()??;
                    multiply_accumulate(&ta, &tb, &mut acc);
                }
                c.tile(i, j)?.assign(&acc)
            })?);
        }
    }
    wait_all_ok(tickets)?;
    Ok(())
}

/// `acc += a * b`, accumulating over the shared index in ascending order.
pub fn multiply_accumulate(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>, acc: &mut DenseMatrix<f64>) {
    let (rows, shared) = a.shape();
    let cols = b.cols();
    let (av, bv) = (a.as_slice(), b.as_slice());
    let cv = acc.as_mut_slice();
    for r in 0..rows {
        for s in 0..shared {
            let x = av[r * shared + s];
            let brow = &bv[s * cols..(s + 1) * cols];
            let crow = &mut cv[r * cols..(r + 1) * cols];
            for (c, &y) in crow.iter_mut().zip(brow) {
                *c += x * y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_price_edges() {
        assert_eq!(call_price(120.0, 100.0, 0.0, 0.0, 1.0), 20.0);
        assert_eq!(call_price(80.0, 100.0, 0.0, 0.0, 1.0), 0.0);
        assert_eq!(call_price(120.0, 100.0, 0.05, 0.3, 0.0), 20.0);
        assert!((call_price(120.0, 100.0, 0.0, 0.2, 1e-12) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn gemm_tiles_conform() {
        for p in 1..=8 {
            for d in [0, 1, 5, 32] {
                let t = gemm_tiling(d, p);
                let (side, _) = t.tile_shape.unwrap();
                assert_eq!(t.tile_shape, Some((side, side)));
            }
        }
    }
}
