//! Dense complex matrices and Hermitian operators on the spin Hilbert space.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense complex matrix. Basis index `i` corresponds to the magnetic quantum
/// number `mu = s - i`, so index 0 is the highest-weight state.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative Hermiticity tolerance accepted by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

pub(crate) fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

impl HermitianOperator {
    /// Validates squareness, finiteness and Hermiticity, then stores the exactly
    /// symmetrized matrix `(M + M^dagger) / 2`.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = max_abs(&(&mat - mat.adjoint()));
        if residual > HERMITICITY_TOL * max_abs(&mat) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Projects an arbitrary square matrix onto its Hermitian part.
    pub fn symmetrize(mat: ComplexMatrix) -> Self {
        let adj = mat.adjoint();
        let mut sym = (mat + adj) * Complex64::new(0.5, 0.0);
        for i in 0..sym.nrows() {
            sym[(i, i)].im = 0.0;
        }
        Self { mat: sym }
    }

    pub fn from_real_imag(real: &[Vec<f64>], imag: &[Vec<f64>]) -> Result<Self> {
        let dim = real.len();
        if imag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: imag.len(),
            });
        }
        for row in real.iter().chain(imag) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Self::new(ComplexMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(real[i][j], imag[i][j])
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Hermitian matrix with i.i.d. standard Gaussian real diagonal and complex
    /// off-diagonal entries.
    pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut mat = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            mat[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
            for j in (i + 1)..dim {
                let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                mat[(i, j)] = z;
                mat[(j, i)] = z.conj();
            }
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Re Tr[A B]`; the trace of a product of Hermitian matrices is real.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                // Tr[AB] = sum_ij A_ij B_ji and B_ji = conj(B_ij)
                let a = self.mat[(i, j)];
                let b = other.mat[(i, j)];
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(factor, 0.0),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &HermitianOperator) -> Self {
        Self {
            mat: &self.mat + &other.mat * Complex64::new(factor, 0.0),
        }
    }

    /// Real linear combination `sum_k c_k O_k` of operators of equal dimension.
    pub fn linear_combination<'a, I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a HermitianOperator)>,
    {
        let mut mat = ComplexMatrix::zeros(dim, dim);
        for (c, op) in terms {
            mat.zip_apply(&op.mat, |acc, z| *acc += z * c);
        }
        Self::symmetrize(mat)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &HermitianOperator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinates in the Hilbert-Schmidt orthonormal basis `E_ii`,
    /// `(E_ij + E_ji)/sqrt2`, `i(E_ij - E_ji)/sqrt2` (`i < j`), so that
    /// `Tr[A B]` is the Euclidean dot product of coordinate vectors.
    pub fn hs_coordinates(&self) -> Vec<f64> {
        let d = self.dim();
        let r2 = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(d * d);
        v.extend((0..d).map(|i| self.mat[(i, i)].re));
        for i in 0..d {
            for j in (i + 1)..d {
                v.push(r2 * self.mat[(i, j)].re);
                v.push(r2 * self.mat[(i, j)].im);
            }
        }
        v
    }

    /// Inverse of [`HermitianOperator::hs_coordinates`].
    pub fn from_hs_coordinates(dim: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: coords.len(),
            });
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut mat = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            mat[(i, i)] = Complex64::new(coords[i], 0.0);
        }
        let mut k = dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let z = Complex64::new(h * coords[k], h * coords[k + 1]);
                mat[(i, j)] = z;
                mat[(j, i)] = z.conj();
                k += 2;
            }
        }
        Ok(Self { mat })
    }

    /// Checks positive semidefiniteness and unit trace, each within `tol`.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        let trace = self.trace();
        if (trace - 1.0).abs() > tol {
            return Err(Error::NotDensityMatrix(format!(
                "trace is {trace}, expected 1"
            )));
        }
        let floor = self.eigenvalues()[0];
        if floor < -tol {
            return Err(Error::NotDensityMatrix(format!(
                "smallest eigenvalue is {floor:e}, expected >= 0"
            )));
        }
        Ok(())
    }

    /// Clips negative eigenvalues to zero and renormalizes to unit trace.
    pub fn psd_repair(&self) -> Self {
        let eig = SymmetricEigen::new(self.mat.clone());
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let n = self.dim();
        if total <= 0.0 {
            return Self::identity(n).scaled(1.0 / n as f64);
        }
        let v = &eig.eigenvectors;
        let mut mat = ComplexMatrix::zeros(n, n);
        for (k, &l) in clipped.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let col = v.column(k);
            mat += (col * col.adjoint()) * Complex64::new(l / total, 0.0);
        }
        Self::symmetrize(mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_square() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn trace_product_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = HermitianOperator::random_gaussian(4, &mut rng);
        let b = HermitianOperator::random_gaussian(4, &mut rng);
        let direct = (a.matrix() * b.matrix()).trace();
        assert!((a.trace_product(&b) - direct.re).abs() < 1e-12);
        assert!(direct.im.abs() < 1e-12);
    }

    #[test]
    fn hs_coordinates_preserve_trace_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = HermitianOperator::random_gaussian(5, &mut rng);
        let b = HermitianOperator::random_gaussian(5, &mut rng);
        let (va, vb) = (a.hs_coordinates(), b.hs_coordinates());
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((dot - a.trace_product(&b)).abs() < 1e-12);
        let back = HermitianOperator::from_hs_coordinates(5, &va).unwrap();
        assert!(back.frobenius_distance(&a) < 1e-14);
    }

    #[test]
    fn psd_repair_gives_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = HermitianOperator::random_gaussian(3, &mut rng);
        let rho = a.psd_repair();
        rho.check_density(1e-12).unwrap();
    }
}
