#![allow(dead_code)]

use modelclass::rng::{self, Rng};
use modelclass::{standardize, Dataset, RawTable};
use ndarray::{Array1, Array2};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn gen(seed: u64) -> Rng {
    rng::stream(seed, &[0xC0DE])
}

pub fn normal_matrix(n: usize, p: usize, r: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || r.sample(StandardNormal))
}

pub fn normal_vec(n: usize, r: &mut Rng) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || r.sample(StandardNormal))
}

/// Standardized Gaussian design; `y = Σ_{j<k} coef·x_j + noise`.
pub fn sparse_problem(n: usize, p: usize, k: usize, coef: f64, noise: f64, seed: u64) -> Dataset<f64> {
    let mut r = gen(seed);
    let x = normal_matrix(n, p, &mut r);
    let e = normal_vec(n, &mut r);
    let y = Array1::from_shape_fn(n, |i| (0..k).map(|j| coef * x[[i, j]]).sum::<f64>() + noise * e[i]);
    standardize(&RawTable::unnamed(x, y).unwrap()).unwrap()
}

/// `y` exactly equal to `x_a + 0.7 x_b`.
pub fn spanned_problem(n: usize, p: usize, a: usize, b: usize, seed: u64) -> Dataset<f64> {
    let mut r = gen(seed);
    let x = normal_matrix(n, p, &mut r);
    let y = Array1::from_shape_fn(n, |i| x[[i, a]] + 0.7 * x[[i, b]]);
    standardize(&RawTable::unnamed(x, y).unwrap()).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sylvester Hadamard matrix of order `2^k`.
pub fn hadamard(k: u32) -> Array2<f64> {
    let n = 1usize << k;
    Array2::from_shape_fn((n, n), |(i, j)| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}
