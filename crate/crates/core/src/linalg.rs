//! Complex linear-algebra aliases and small helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use nalgebra::Complex;

use crate::{IsacError, Result};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance on the anti-Hermitian part accepted before a matrix
/// is symmetrized and factorized.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// One draw of a circularly symmetric complex Gaussian with total variance
/// `variance` (each of the real and imaginary parts carries half of it).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(scale * re, scale * im)
}

pub fn complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    CVector::from_fn(len, |_, _| complex_normal(rng, variance))
}

/// Column-major fill, so `vec()` of the result is the draw order.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let data: Vec<C64> = (0..rows * cols)
        .map(|_| complex_normal(rng, variance))
        .collect();
    CMatrix::from_vec(rows, cols, data)
}

/// `vec(M)`: columns stacked top to bottom.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest entry of `M - M^H` relative to the largest entry of `M`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// Lower Cholesky factor of a Hermitian matrix, reading only its lower
/// triangle. `None` unless every pivot is real, finite and positive.
pub fn cholesky_lower(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Cholesky factorization `A = L L^H` of a Hermitian positive definite
/// matrix, after checking the Hermitian defect and averaging `A` with its
/// conjugate transpose.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    l: CMatrix,
}

impl HermitianFactor {
    pub fn new(m: &CMatrix, what: &str) -> Result<Self> {
        if !m.is_square() {
            return Err(IsacError::Numerical(format!(
                "{what} is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(IsacError::Numerical(format!(
                "{what} has non-finite entries"
            )));
        }
        let defect = hermitian_defect(m);
        if defect > HERMITIAN_TOL {
            return Err(IsacError::Numerical(format!(
                "{what} is not Hermitian (relative defect {defect:.3e})"
            )));
        }
        let l = cholesky_lower(&hermitian_part(m))
            .ok_or_else(|| IsacError::Numerical(format!("{what} is not positive definite")))?;
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> &CMatrix {
        &self.l
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &CVector) -> CVector {
        let mut out = self.whiten(b);
        self.l.ad_solve_lower_triangular_mut(&mut out);
        out
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let mut out = b.clone();
        self.l.solve_lower_triangular_mut(&mut out);
        self.l.ad_solve_lower_triangular_mut(&mut out);
        out
    }

    /// `L^{-1} b`, so that `b^H A^{-1} b = ||L^{-1} b||^2`.
    pub fn whiten(&self, b: &CVector) -> CVector {
        let mut out = b.clone();
        self.whiten_mut(&mut out);
        out
    }

    pub fn whiten_mut(&self, b: &mut CVector) {
        self.l.solve_lower_triangular_mut(b);
    }

    /// `b^H A^{-1} b`.
    pub fn quadratic_inverse(&self, b: &CVector) -> f64 {
        self.whiten(b).norm_squared()
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.dim();
        self.solve_matrix(&CMatrix::identity(n, n))
    }
}
