use std::ops::Range;

use itertools::multizip;

use crate::error::{Error, Result};
use crate::model::{is_aligned, LocaleId, RangeKind, ReadAccess, Segment, SegmentedRange, WriteAccess};
use crate::runtime::{Runtime, StorageId, ZipMode};

use super::trim::trim_segments;

/// One output chunk of the realignment sweep: its length and, per base, the
/// source segment index and the range within that segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealignChunk {
    pub len: usize,
    pub parts: Vec<(usize, Range<usize>)>,
}

/// Cuts several segmentations of the same length at the union of their
/// boundaries.
///
/// Walks every base with a (segment, offset) cursor and repeatedly emits a
/// chunk as long as the shortest remainder among the current segments. Empty
/// segments are skipped.
pub fn realign_segments(lengths: &[Vec<usize>]) -> Result<Vec<RealignChunk>> {
    let totals: Vec<usize> = lengths.iter().map(|l| l.iter().sum()).collect();
    if let Some(&first) = totals.first() {
        if let Some(&bad) = totals.iter().find(|&&t| t != first) {
            return Err(Error::LengthMismatch {
                expected: first,
                found: bad,
            });
        }
    }
    let total = totals.first().copied().unwrap_or(0);
    let mut cursor: Vec<(usize, usize)> = vec![(0, 0); lengths.len()];
    let mut chunks = Vec::new();
    let mut done = 0;
    while done < total {
        for (lens, (seg, off)) in lengths.iter().zip(cursor.iter_mut()) {
            while *off == lens[*seg] {
                *seg += 1;
                *off = 0;
            }
        }
        let len = lengths
            .iter()
            .zip(&cursor)
            .map(|(lens, &(seg, off))| lens[seg] - off)
            .min()
            .expect("at least one base");
        let parts = cursor.iter().map(|&(seg, off)| (seg, off..off + len)).collect();
        for (_, off) in cursor.iter_mut() {
            *off += len;
        }
        chunks.push(RealignChunk { len, parts });
        done += len;
    }
    Ok(chunks)
}

/// A tuple of ranges that can be zipped.
pub trait ZipBases {
    type Segments: Clone + Send + Sync + 'static;

    fn lengths(&self) -> Vec<usize>;

    fn kinds(&self) -> Vec<RangeKind>;

    fn runtime(&self) -> Option<Runtime>;

    /// Distributions of the bases that are partitioned over locales.
    fn distributed(&self) -> Vec<crate::model::Distribution>;

    fn zipped(&self, len: usize) -> Vec<ZipSegment<Self::Segments>>;
}

/// Elementwise tuple of two or more ranges, truncated to the shortest.
///
/// Segments come from cutting every base at the union of their boundaries;
/// equal segmentations are paired index by index.
#[derive(Clone)]
pub struct Zip<B> {
    bases: B,
    len: usize,
}

impl<B: ZipBases> Zip<B> {
    /// Fails with [`Error::NonAlignedZip`] when the runtime is in strict mode
    /// and the distributed bases are not aligned.
    pub fn new(bases: B) -> Result<Self> {
        if let Some(rt) = bases.runtime() {
            if rt.zip_mode() == ZipMode::Strict && !is_aligned(&bases.distributed()) {
                return Err(Error::NonAlignedZip);
            }
        }
        let len = bases.lengths().into_iter().min().unwrap_or(0);
        Ok(Zip { bases, len })
    }

    pub fn bases(&self) -> &B {
        &self.bases
    }
}

impl<B: ZipBases> SegmentedRange for Zip<B>
where
    ZipSegment<B::Segments>: Segment,
{
    type Segment = ZipSegment<B::Segments>;

    fn segments(&self) -> Vec<Self::Segment> {
        self.bases.zipped(self.len)
    }

    fn len(&self) -> usize {
        self.len
    }

    fn kind(&self) -> RangeKind {
        let kinds = self.bases.kinds();
        if kinds.contains(&RangeKind::Distributed) {
            RangeKind::Distributed
        } else if kinds.contains(&RangeKind::Remote) {
            RangeKind::Remote
        } else {
            RangeKind::Local
        }
    }

    fn runtime(&self) -> Option<Runtime> {
        self.bases.runtime()
    }
}

/// Corresponding pieces of each base, all of the same length.
#[derive(Clone)]
pub struct ZipSegment<T> {
    segments: T,
    len: usize,
    rank: Option<LocaleId>,
}

impl<T> ZipSegment<T> {
    pub fn parts(&self) -> &T {
        &self.segments
    }
}

pub struct ZipAccess<T>(T);

fn first_rank(ranks: &[Option<LocaleId>]) -> Option<LocaleId> {
    ranks.iter().flatten().next().copied()
}

fn check_unaliased(ids: &mut [StorageId]) -> Result<()> {
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::AliasedWrite(w[0])),
        None => Ok(()),
    }
}

macro_rules! zip_arity {
    ($($B:ident $S:ident $i:tt),+) => {
        impl<$($B: SegmentedRange),+> ZipBases for ($($B,)+) {
            type Segments = ($($B::Segment,)+);

            fn lengths(&self) -> Vec<usize> {
                vec![$(self.$i.len()),+]
            }

            fn kinds(&self) -> Vec<RangeKind> {
                vec![$(self.$i.kind()),+]
            }

            fn runtime(&self) -> Option<Runtime> {
                None$(.or_else(|| self.$i.runtime()))+
            }

            fn distributed(&self) -> Vec<crate::model::Distribution> {
                let mut out = Vec::new();
                $(
                    if self.$i.kind() == RangeKind::Distributed {
                        out.push(self.$i.distribution());
                    }
                )+
                out
            }

            fn zipped(&self, len: usize) -> Vec<ZipSegment<Self::Segments>> {
                let segs = ($(
                    trim_segments(&self.$i.segments(), 0, len).expect("zip length within every base"),
                )+);
                let lengths = vec![$(segs.$i.iter().map(Segment::len).collect::<Vec<_>>()),+];
                let make = |parts: Self::Segments, len: usize| {
                    let rank = first_rank(&[$(parts.$i.locale()),+]);
                    ZipSegment { segments: parts, len, rank }
                };
                if lengths.windows(2).all(|w| w[0] == w[1]) {
                    return (0..lengths[0].len())
                        .map(|k| make(($(segs.$i[k].clone(),)+), lengths[0][k]))
                        .collect();
                }
                realign_segments(&lengths)
                    .expect("bases trimmed to a common length")
                    .into_iter()
                    .map(|chunk| {
                        let parts = ($({
                            let (seg, range) = &chunk.parts[$i];
                            let s = &segs.$i[*seg];
                            if range.start == 0 && range.end == s.len() {
                                s.clone()
                            } else {
                                s.trim(range.clone())
                            }
                        },)+);
                        make(parts, chunk.len)
                    })
                    .collect()
            }
        }

        impl<$($S: Segment),+> Segment for ZipSegment<($($S,)+)> {
            type Item = ($($S::Item,)+);
            type Read = ZipAccess<($($S::Read,)+)>;
            type Write = ZipAccess<($($S::Write,)+)>;

            /// First base with a locale, by convention.
            fn locale(&self) -> Option<LocaleId> {
                self.rank
            }

            fn len(&self) -> usize {
                self.len
            }

            fn trim(&self, range: Range<usize>) -> Self {
                ZipSegment {
                    segments: ($(self.segments.$i.trim(range.clone()),)+),
                    len: range.len(),
                    rank: self.rank,
                }
            }

            fn read(&self) -> Result<Self::Read> {
                Ok(ZipAccess(($(self.segments.$i.read()?,)+)))
            }

            /// Fails with [`Error::AliasedWrite`] if two bases share storage.
            fn write(&self) -> Result<Self::Write> {
                let mut ids = Vec::new();
                self.storage_ids(&mut ids);
                check_unaliased(&mut ids)?;
                Ok(ZipAccess(($(self.segments.$i.write()?,)+)))
            }

            fn storage_ids(&self, ids: &mut Vec<StorageId>) {
                $(self.segments.$i.storage_ids(ids);)+
            }
        }

        impl<$($S: ReadAccess),+> ReadAccess for ZipAccess<($($S,)+)> {
            type Item = ($($S::Item,)+);
            type Iter<'g> = itertools::Zip<($($S::Iter<'g>,)+)> where Self: 'g;

            fn iter(&self) -> Self::Iter<'_> {
                multizip(($(self.0.$i.iter(),)+))
            }

            fn get(&self, index: usize) -> Self::Item {
                ($(self.0.$i.get(index),)+)
            }
        }

        impl<$($S: WriteAccess),+> WriteAccess for ZipAccess<($($S,)+)> {
            type Elem<'g> = ($($S::Elem<'g>,)+) where Self: 'g;
            type IterMut<'g> = itertools::Zip<($($S::IterMut<'g>,)+)> where Self: 'g;

            #[allow(non_snake_case)]
            fn iter_mut(&mut self) -> Self::IterMut<'_> {
                let ($($B,)+) = &mut self.0;
                multizip(($($B.iter_mut(),)+))
            }
        }

        impl<$($S: Segment),+> SegmentedRange for ZipSegment<($($S,)+)> {
            type Segment = Self;

            fn segments(&self) -> Vec<Self> {
                if self.len == 0 { Vec::new() } else { vec![self.clone()] }
            }

            fn len(&self) -> usize {
                self.len
            }

            fn kind(&self) -> RangeKind {
                if self.rank.is_some() { RangeKind::Remote } else { RangeKind::Local }
            }

            fn runtime(&self) -> Option<Runtime> {
                None
            }
        }
    };
}

zip_arity!(A0 S0 0, A1 S1 1);
zip_arity!(A0 S0 0, A1 S1 1, A2 S2 2);
zip_arity!(A0 S0 0, A1 S1 1, A2 S2 2, A3 S3 3);
zip_arity!(A0 S0 0, A1 S1 1, A2 S2 2, A3 S3 3, A4 S4 4);
zip_arity!(A0 S0 0, A1 S1 1, A2 S2 2, A3 S3 3, A4 S4 4, A5 S5 5);
