use rand::Rng;

use super::Matrix;

/// Glorot/Xavier uniform initialization: `U(−a, a)` with `a = √(6 / (fan_in + fan_out))`.
pub fn xavier_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("length matches shape")
}

/// Inverted-dropout keep mask: each entry is `0` with probability `rate`,
/// otherwise `1 / (1 − rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Matrix {
    let keep = 1.0 / (1.0 - rate);
    let data = (0..rows * cols)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect();
    Matrix::from_vec(rows, cols, data).expect("length matches shape")
}

/// Applies inverted dropout. Identity when `training` is false or `rate` is 0.
pub fn dropout<R: Rng + ?Sized>(x: &Matrix, rate: f64, training: bool, rng: &mut R) -> Matrix {
    if !training || rate == 0.0 {
        return x.clone();
    }
    let mask = dropout_mask(x.rows(), x.cols(), rate, rng);
    x.hadamard(&mask).expect("mask has the input shape")
}
