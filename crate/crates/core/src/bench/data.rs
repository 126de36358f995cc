use std::hash::Hasher;

use fnv::FnvHasher;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// xoshiro256++ seeded through SplitMix64.
pub struct BenchRng(Xoshiro256PlusPlus);

impl BenchRng {
    pub fn new(seed: u64) -> Self {
        BenchRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn f64s(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Values below `2^bits`.
    pub fn u64s(&mut self, n: usize, bits: u32) -> Vec<u64> {
        let shift = 64 - bits.clamp(1, 64);
        (0..n).map(|_| self.next_u64() >> shift).collect()
    }
}

/// FNV-1a over little-endian encodings.
#[derive(Default)]
pub struct Checksum(FnvHasher);

impl Checksum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.write(&v.to_le_bytes());
        self
    }

    pub fn i64(&mut self, v: i64) -> &mut Self {
        self.0.write(&v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.u64(v.to_bits())
    }

    pub fn finish(&self) -> u64 {
        self.0.finish()
    }
}

pub fn checksum_f64(values: &[f64]) -> u64 {
    let mut c = Checksum::new();
    values.iter().for_each(|&v| {
        c.f64(v);
    });
    c.finish()
}

pub fn checksum_u64(values: &[u64]) -> u64 {
    let mut c = Checksum::new();
    values.iter().for_each(|&v| {
        c.u64(v);
    });
    c.finish()
}

pub fn checksum_i64(values: &[i64]) -> u64 {
    let mut c = Checksum::new();
    values.iter().for_each(|&v| {
        c.i64(v);
    });
    c.finish()
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
