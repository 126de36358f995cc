use std::collections::HashMap;
use std::io::Write;

use proptest::prelude::*;
use segrange::containers::{
    load_matrix_market, DenseMatrix, DistributedDenseMatrix, DistributedSparseMatrix, DistributedVector, Partition,
    TileLayout, Tiling,
};
use segrange::model::{block_lengths, rank_of, LocaleId, Segment, SegmentedRange};
use segrange::runtime::Runtime;
use segrange::Error;

#[test]
fn vector_layout_examples() {
    let rt3 = Runtime::new(3).unwrap();
    let v = DistributedVector::new(&rt3, 10, 0u8).unwrap();
    let segs = v.segments();
    assert_eq!(segs.iter().map(Segment::len).collect::<Vec<_>>(), vec![4, 4, 2]);
    assert_eq!(
        segs.iter().map(rank_of).collect::<Vec<_>>(),
        vec![LocaleId(0), LocaleId(1), LocaleId(2)]
    );

    let rt8 = Runtime::new(8).unwrap();
    let v = DistributedVector::new(&rt8, 4, 0u8).unwrap();
    assert_eq!(
        v.segments().iter().map(Segment::len).collect::<Vec<_>>(),
        vec![1, 1, 1, 1, 0, 0, 0, 0]
    );

    assert!(DistributedVector::new(&rt3, 0, 0u8).unwrap().segments().is_empty());
}

#[test]
fn vector_get_set() {
    let rt = Runtime::new(3).unwrap();
    let v = DistributedVector::new(&rt, 10, 7i32).unwrap();
    assert_eq!(v.get(0).unwrap(), 7);
    v.set(5, 9).unwrap();
    assert_eq!(v.get(5).unwrap(), 9);
    assert_eq!(v.segments()[1].read().unwrap()[1], 9);
    assert!(matches!(v.get(10), Err(Error::IndexOutOfBounds { index: 10, len: 10 })));
}

#[test]
fn partition_law_exhaustive() {
    for p in 1..=16 {
        let rt = Runtime::new(p).unwrap();
        for n in 0..=100 {
            let v = DistributedVector::new(&rt, n, 0u8).unwrap();
            let lens: Vec<usize> = v.segments().iter().map(Segment::len).collect();
            let expected = if n == 0 { Vec::new() } else { block_lengths(n, p) };
            assert_eq!(lens, expected, "n={n} p={p}");
        }
    }
}

#[test]
fn dense_examples() {
    let rt = Runtime::new(2).unwrap();
    let m = DistributedDenseMatrix::new(&rt, (4, 4), &Tiling::block_cyclic_with((2, 2), (2, 1)), 1.5f64).unwrap();
    assert_eq!(m.tile_grid(), (2, 2));
    let owners: Vec<usize> = m.segments().iter().map(|t| rank_of(t).0).collect();
    assert_eq!(owners, vec![0, 0, 1, 1]);
    assert!(m.to_dense().unwrap().as_slice().iter().all(|&x| x == 1.5));

    let rt4 = Runtime::new(4).unwrap();
    let r = DistributedDenseMatrix::new(&rt4, (10, 3), &Tiling::block_row(), 0u8).unwrap();
    assert_eq!(r.tile_grid(), (4, 1));
    let ranks: Vec<usize> = (0..4).map(|i| rank_of(&r.tile(i, 0).unwrap()).0).collect();
    assert_eq!(ranks, vec![0, 1, 2, 3]);

    let empty = DistributedDenseMatrix::new(&rt4, (0, 0), &Tiling::block_cyclic(), 0u8).unwrap();
    assert_eq!(empty.tile_grid(), (0, 0));
    assert!(matches!(
        DistributedDenseMatrix::new(&rt4, (4, 4), &Tiling::explicit((2, 2), (3, 2)), 0u8),
        Err(Error::InvalidTiling(_))
    ));
}

#[test]
fn dense_get_tile_matches_global_reads() {
    let rt = Runtime::new(6).unwrap();
    let m = DistributedDenseMatrix::from_fn(&rt, (13, 11), &Tiling::block_cyclic_with((4, 3), (2, 3)), |r, c| {
        (r * 100 + c) as i64
    })
    .unwrap();
    let (gr, gc) = m.tile_grid();
    for i in 0..gr {
        for j in 0..gc {
            let tile = m.get_tile(i, j).unwrap();
            let async_tile = m.get_tile_async(i, j).unwrap().into_result().unwrap().unwrap();
            assert_eq!(tile, async_tile);
            let rows = m.layout().row_range(i);
            let cols = m.layout().col_range(j);
            assert_eq!(tile.shape(), (rows.len(), cols.len()));
            for (lr, r) in rows.clone().enumerate() {
                for (lc, c) in cols.clone().enumerate() {
                    assert_eq!(*tile.get(lr, lc), m.get(r, c).unwrap());
                }
            }
        }
    }
    assert!(matches!(m.get_tile(gr, 0), Err(Error::TileOutOfBounds { .. })));
}

#[test]
fn identity_tile() {
    let rt = Runtime::new(4).unwrap();
    let m = DistributedDenseMatrix::from_fn(&rt, (8, 8), &Tiling::block_cyclic(), |r, c| f64::from(u8::from(r == c)))
        .unwrap();
    let t = m.get_tile(1, 1).unwrap();
    assert_eq!(t, DenseMatrix::from_fn(4, 4, |r, c| f64::from(u8::from(r == c))));
}

#[test]
fn sparse_examples() {
    let rt = Runtime::new(1).unwrap();
    let m = DistributedSparseMatrix::from_tuples(&rt, (2, 2), vec![(0, 0, 1.0), (1, 1, 2.0)], &Tiling::block_cyclic())
        .unwrap();
    assert_eq!(m.to_vec().unwrap(), vec![(0, 0, 1.0), (1, 1, 2.0)]);
}

fn write_mtx(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn matrix_market_loading() {
    let rt = Runtime::new(2).unwrap();
    let f = write_mtx("%%MatrixMarket matrix coordinate real symmetric\n% test\n3 3 2\n3 2 1.5\n1 1 -2\n");
    let m = load_matrix_market(&rt, f.path(), &Tiling::block_row()).unwrap();
    let mut got = m.to_vec().unwrap();
    got.sort_by_key(|e| (e.0, e.1));
    assert_eq!(got, vec![(0, 0, -2.0), (1, 2, 1.5), (2, 1, 1.5)]);

    let empty = write_mtx("%%MatrixMarket matrix coordinate real general\n5 5 0\n");
    let m = load_matrix_market(&rt, empty.path(), &Tiling::block_cyclic()).unwrap();
    assert_eq!(m.nnz(), 0);
    assert!(m.to_vec().unwrap().is_empty());

    let bad = write_mtx("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n");
    assert!(matches!(
        load_matrix_market(&rt, bad.path(), &Tiling::block_cyclic()),
        Err(Error::Parse { line: 3, .. })
    ));
    assert!(matches!(
        load_matrix_market(&rt, "/nonexistent/file.mtx", &Tiling::block_cyclic()),
        Err(Error::Io(_))
    ));
}

fn tile_cover_holds(shape: (usize, usize), tile: (usize, usize)) -> bool {
    let layout = TileLayout::resolve(&Tiling::explicit(tile, (1, 1)), shape, 1).unwrap();
    let mut hits = vec![0u8; shape.0 * shape.1];
    for i in 0..layout.tile_grid.0 {
        for j in 0..layout.tile_grid.1 {
            for r in layout.row_range(i) {
                for c in layout.col_range(j) {
                    hits[r * shape.1 + c] += 1;
                }
            }
        }
    }
    hits.iter().all(|&h| h == 1)
}

proptest! {
    #[test]
    fn vector_round_trip(n in 1usize..200, p in 1usize..9, ops in prop::collection::vec((0usize..1000, any::<i32>()), 0..60)) {
        let rt = Runtime::new(p).unwrap();
        let v = DistributedVector::new(&rt, n, 0i32).unwrap();
        let mut oracle = vec![0i32; n];
        for (i, x) in ops {
            let i = i % n;
            v.set(i, x).unwrap();
            oracle[i] = x;
            prop_assert_eq!(v.get(i).unwrap(), x);
        }
        prop_assert_eq!(v.to_vec().unwrap(), oracle);
    }

    #[test]
    fn tiles_cover_matrix(m in 0usize..40, k in 0usize..40, tr in 1usize..12, tc in 1usize..12) {
        prop_assert!(tile_cover_holds((m, k), (tr, tc)));
    }

    #[test]
    fn sparse_fidelity(
        m in 1usize..30,
        k in 1usize..30,
        entries in prop::collection::vec((0usize..30, 0usize..30, -50i64..50), 0..120),
        p in 1usize..7,
    ) {
        let rt = Runtime::new(p).unwrap();
        let entries: Vec<(usize, usize, i64)> = entries.into_iter().map(|(r, c, v)| (r % m, c % k, v)).collect();
        let mat = DistributedSparseMatrix::from_tuples(&rt, (m, k), entries.clone(), &Tiling::block_cyclic()).unwrap();
        let mut expected: HashMap<(usize, usize), i64> = HashMap::new();
        for (r, c, v) in &entries {
            *expected.entry((*r, *c)).or_default() += v;
        }
        let got = mat.to_vec().unwrap();
        prop_assert_eq!(got.len(), expected.len());
        let got_map: HashMap<(usize, usize), i64> = got.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        prop_assert_eq!(got_map, expected);
        let (gr, gc) = mat.layout().tile_grid;
        let mut nnz = 0;
        for i in 0..gr {
            for j in 0..gc {
                let block = mat.get_tile(i, j).unwrap();
                prop_assert!(block.is_valid());
                nnz += block.row_offsets.last().copied().unwrap_or(0);
            }
        }
        prop_assert_eq!(nnz, mat.nnz());
    }
}

#[test]
fn partition_errors() {
    let rt = Runtime::new(2).unwrap();
    assert!(matches!(
        DistributedVector::with_partition(&rt, 5, 0u8, Partition::Lengths(vec![2, 2])),
        Err(Error::LengthMismatch { .. })
    ));
    assert!(matches!(
        DistributedVector::with_partition(&rt, 2, 0u8, Partition::Explicit(vec![(LocaleId(5), 2)])),
        Err(Error::InvalidLocale { .. })
    ));
}
