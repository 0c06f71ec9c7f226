//! Ordinary least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

/// Column pivots smaller than this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub nobs: usize,
}

/// Fits `y ≈ X β`. `design` is row-major with `ncols` columns. Returns
/// `None` when the design is rank deficient or has fewer rows than columns.
pub fn ols(design: &[f64], ncols: usize, y: &[f64]) -> Option<OlsFit> {
    let nobs = y.len();
    if ncols == 0 || design.len() != nobs * ncols || nobs < ncols {
        return None;
    }
    let x = DMatrix::from_row_slice(nobs, ncols, design);
    let yv = DVector::from_column_slice(y);
    let qr = x.qr();
    let r = qr.r();
    let max_diag = (0..ncols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag.is_nan() || max_diag <= 0.0 || (0..ncols).any(|i| r[(i, i)].abs() <= RANK_TOL * max_diag) {
        return None;
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r.solve_upper_triangular(&qty)?;
    let resid = &yv - DMatrix::from_row_slice(nobs, ncols, design) * &beta;
    Some(OlsFit {
        coefficients: beta.iter().copied().collect(),
        rss: resid.norm_squared(),
        nobs,
    })
}
