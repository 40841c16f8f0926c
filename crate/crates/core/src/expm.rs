//! Matrix exponential by scaling and squaring around a degree-13 diagonal
//! Padé approximant (Higham, "The scaling and squaring method for the
//! matrix exponential revisited", 2005).
//!
//! The input is scaled by `2^-s` until its 1-norm is at most
//! `THETA_13 = 5.37`, at which point the [13/13] approximant has backward
//! error below the double-precision unit roundoff. The approximant is then
//! squared `s` times. Only the degree-13 branch is used, so the result is a
//! fixed sequence of floating-point operations for a given input.

use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` for a square matrix of any size.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::config(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("matrix exponential input has non-finite entries"));
    }
    let n = a.nrows();
    let norm = norm_1(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);

    let b = &PADE_13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::numeric("singular Padé denominator in matrix exponential"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("matrix exponential overflowed"));
    }
    Ok(r)
}

/// `e^A` for a fixed-size square matrix.
pub fn matrix_exponential<const N: usize>(a: &SMatrix<f64, N, N>) -> Result<SMatrix<f64, N, N>> {
    let dynamic = DMatrix::from_column_slice(N, N, a.as_slice());
    let e = expm(&dynamic)?;
    Ok(SMatrix::<f64, N, N>::from_column_slice(e.as_slice()))
}
