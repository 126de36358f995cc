//! Sequential reference implementations on plain vectors.

use super::kernels::call_price;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn sum(v: &[u64]) -> u64 {
    let mut s = 0u64;
    for &x in v {
        s += x;
    }
    s
}

pub fn prefix_sum(v: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(v.len());
    let mut s = 0i64;
    for &x in v {
        s += x;
        out.push(s);
    }
    out
}

pub fn stream_triad(b: &[f64], c: &[f64], alpha: f64) -> Vec<f64> {
    let mut a = vec![0.0; b.len()];
    for i in 0..b.len() {
        a[i] = b[i] + alpha * c[i];
    }
    a
}

pub fn black_scholes(spot: &[f64], strike: &[f64], rate: &[f64], sigma: &[f64], expiry: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(spot.len());
    for i in 0..spot.len() {
        out.push(call_price(spot[i], strike[i], rate[i], sigma[i], expiry[i]));
    }
    out
}

/// Row-major `d x d` triple loop, accumulating over `k` in ascending order.
pub fn gemm(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * b[k * d + j];
            }
            c[i * d + j] = s;
        }
    }
    c
}

pub fn sort(v: &[u64]) -> Vec<u64> {
    let mut out = v.to_vec();
    out.sort();
    out
}
